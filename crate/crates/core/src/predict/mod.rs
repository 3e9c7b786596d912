//! Online prediction: horizon models per section group, scheduled
//! retraining and an event-time driven engine with crash recovery.

mod engine;
mod registry;
mod train;

pub use engine::{replay, Engine, EngineStats, RunPlan};
pub use registry::{GroupModels, ModelRegistry, RegistryHandle, SectionGroup, TrainingSet, VERSION_KEY};
pub use train::{
    evaluate_held_out, predict_article, select_horizon, train_horizon_models, HorizonScore, Prediction, RetrainOutcome,
    TrainReport, Trainer,
};
