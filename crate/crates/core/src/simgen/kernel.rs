use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::lifecycle::ProfileClass;

/// Shape of an article's attention over time, in hours-equivalent since
/// publication. The main component peaks at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Kernel {
    Decreasing { half_life: f64 },
    Delayed { plateau: f64, half_life: f64 },
    Steady { duration: f64, half_life: f64 },
    Increasing { start_level: f64, ramp: f64, half_life: f64 },
    /// Fast decay plus a log-normal-shaped second pulse peaking near
    /// `pulse_center` at `pulse_ratio` of the first peak.
    Rebounding { half_life: f64, pulse_center: f64, pulse_sigma: f64, pulse_ratio: f64 },
}

fn decay(u: f64, half_life: f64) -> f64 {
    (-u.max(0.0) * std::f64::consts::LN_2 / half_life).exp()
}

impl Kernel {
    pub fn class(&self) -> ProfileClass {
        match self {
            Kernel::Decreasing { .. } => ProfileClass::Decreasing,
            Kernel::Delayed { .. } => ProfileClass::DelayedDecreasing,
            Kernel::Steady { .. } => ProfileClass::Steady,
            Kernel::Increasing { .. } => ProfileClass::Increasing,
            Kernel::Rebounding { .. } => ProfileClass::Rebounding,
        }
    }

    /// Draws shape parameters for `class`, with `half_life` as the long-run decay.
    pub fn sample<R: Rng + ?Sized>(class: ProfileClass, half_life: f64, rng: &mut R) -> Kernel {
        match class {
            ProfileClass::Decreasing => Kernel::Decreasing { half_life },
            ProfileClass::DelayedDecreasing => Kernel::Delayed {
                plateau: rng.random_range(1.5..4.0),
                half_life,
            },
            ProfileClass::Steady => Kernel::Steady {
                duration: rng.random_range(14.0..36.0),
                half_life,
            },
            ProfileClass::Increasing => Kernel::Increasing {
                start_level: rng.random_range(0.25..0.45),
                ramp: rng.random_range(10.0..16.0),
                half_life,
            },
            ProfileClass::Rebounding => Kernel::Rebounding {
                half_life: rng.random_range(1.5..3.0),
                pulse_center: rng.random_range(6.0..10.0),
                pulse_sigma: rng.random_range(0.1..0.2),
                pulse_ratio: rng.random_range(0.5..0.9),
            },
        }
    }

    /// The main component at `u` hours-equivalent.
    pub fn base(&self, u: f64) -> f64 {
        match *self {
            Kernel::Decreasing { half_life } | Kernel::Rebounding { half_life, .. } => decay(u, half_life),
            Kernel::Delayed { plateau, half_life } => decay(u - plateau, half_life),
            Kernel::Steady { duration, half_life } => decay(u - duration, half_life),
            Kernel::Increasing { start_level, ramp, half_life } => {
                if u < ramp {
                    start_level + (1.0 - start_level) * u.max(0.0) / ramp
                } else {
                    decay(u - ramp, half_life)
                }
            }
        }
    }

    /// The second pulse of rebounding shapes; 0 otherwise.
    pub fn pulse(&self, u: f64) -> f64 {
        match *self {
            Kernel::Rebounding { pulse_center, pulse_sigma, pulse_ratio, .. } if u > 0.0 => {
                let z = (u / pulse_center).ln() / pulse_sigma;
                pulse_ratio * (-0.5 * z * z).exp()
            }
            _ => 0.0,
        }
    }

    pub fn intensity(&self, u: f64) -> f64 {
        self.base(u) + self.pulse(u)
    }

    /// Noiseless visits per equivalent minute over the first `minutes`
    /// equivalent minutes, scaled so the first peak is `peak_rate`.
    pub fn curve(&self, minutes: usize, peak_rate: f64) -> Vec<f64> {
        (0..minutes).map(|m| peak_rate * self.intensity((m as f64 + 0.5) / 60.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ClassifierConfig;
    use crate::lifecycle::classify_curve;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes_start_at_peak_or_ramp() {
        assert_eq!(Kernel::Decreasing { half_life: 8.0 }.base(0.0), 1.0);
        assert!((Kernel::Decreasing { half_life: 8.0 }.base(8.0) - 0.5).abs() < 1e-12);
        assert_eq!(Kernel::Delayed { plateau: 2.0, half_life: 8.0 }.base(1.9), 1.0);
        let inc = Kernel::Increasing { start_level: 0.3, ramp: 10.0, half_life: 8.0 };
        assert!((inc.base(5.0) - 0.65).abs() < 1e-12);
    }

    #[test]
    fn canonical_fixtures_classified() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = ClassifierConfig::default();
        for class in ProfileClass::ALL {
            let mut correct = 0;
            for _ in 0..50 {
                let hl = 8.0 * (rng.random_range(-0.6f64..0.6)).exp();
                let k = Kernel::sample(class, hl, &mut rng);
                if classify_curve(&k.curve(720, 20.0), &cfg).0 == class {
                    correct += 1;
                }
            }
            assert!(correct >= 48, "{class}: {correct}/50");
        }
    }
}
