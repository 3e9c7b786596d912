//! Seasonality correction, effective shelf-life and visit-profile classes.

mod classify;
mod seasonality;
mod shelf;

pub use classify::{
    classify_curve, classify_profile, equivalent_minute_curve, moving_average, theil_sen_slope, write_diagnostics_csv,
    ProfileClass, ProfileClassification, ProfileDiagnostics, ProfileGroup,
};
pub use seasonality::{hour_of_week, sitewide_hourly_visits, SeasonalityProfile, HOURS_PER_WEEK};
pub use shelf::{reaches_fraction, shelf_life, shelf_life_checked, shelf_life_minutes, ShelfLife};
