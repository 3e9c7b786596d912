use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::design::{DesignMatrix, Term};
use super::qr::solve_least_squares;
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_NAMES, LOG_TRANSFORMED, NUM_FEATURES};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_MAGIC: &str = "# newslife linear model";

/// What the response variable is, which decides how predictions are mapped back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// log(visits + 1); predictions are back-transformed and clamped.
    LogVisits,
    /// Used as is (e.g. shelf-life in minutes).
    Raw,
}

impl TargetKind {
    fn as_str(self) -> &'static str {
        match self {
            TargetKind::LogVisits => "log_visits",
            TargetKind::Raw => "raw",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// Every term that was considered; coefficients of unused terms are 0.
    pub terms: Vec<Term>,
    pub coefficients: Vec<f64>,
    pub retained: Vec<bool>,
    pub n: usize,
    pub rss: f64,
    pub tss: f64,
    pub r_squared: f64,
    pub aic: f64,
    pub log_transformed: [bool; NUM_FEATURES],
    pub target: TargetKind,
    /// Free-form provenance such as group, horizon or training time.
    pub meta: BTreeMap<String, String>,
}

/// n·ln(RSS/n) + 2·edf, with edf the number of fitted coefficients
/// (intercept included). A perfect fit scores −∞.
pub fn aic_value(n: usize, rss: f64, edf: usize) -> f64 {
    if rss <= 0.0 {
        return f64::NEG_INFINITY;
    }
    n as f64 * (rss / n as f64).ln() + 2.0 * edf as f64
}

pub fn aic(model: &LinearModel) -> f64 {
    model.aic
}

fn total_ss(y: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len().max(1) as f64;
    y.iter().map(|v| (v - mean).powi(2)).sum()
}

/// 1 − SS_res/SS_tot; 0 when the actual values have no variance.
pub fn r_squared(actual: &[f64], predicted: &[f64]) -> f64 {
    let tss = total_ss(actual);
    if tss == 0.0 {
        return 0.0;
    }
    let rss: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum();
    1.0 - rss / tss
}

/// Ordinary least squares over the columns of `design` flagged in `use_cols`
/// (all columns when `None`).
pub fn fit_ols_subset(design: &DesignMatrix, y: &[f64], use_cols: Option<&[bool]>, target: TargetKind) -> LinearModel {
    assert_eq!(design.rows, y.len(), "design rows must match targets");
    let idx: Vec<usize> = (0..design.terms.len()).filter(|&j| use_cols.is_none_or(|u| u[j])).collect();
    let cols: Vec<&[f64]> = idx.iter().map(|&j| design.columns[j].as_slice()).collect();
    let sol = solve_least_squares(&cols, y);
    let mut coefficients = vec![0.0; design.terms.len()];
    let mut retained = vec![false; design.terms.len()];
    for (k, &j) in idx.iter().enumerate() {
        coefficients[j] = sol.beta[k];
        retained[j] = sol.retained[k];
    }
    let rss: f64 = (0..design.rows)
        .map(|i| {
            let fitted: f64 = design.columns.iter().zip(&coefficients).map(|(c, b)| c[i] * b).sum();
            (y[i] - fitted).powi(2)
        })
        .sum();
    let tss = total_ss(y);
    LinearModel {
        terms: design.terms.clone(),
        coefficients,
        retained,
        n: y.len(),
        rss,
        tss,
        r_squared: if tss == 0.0 { 0.0 } else { 1.0 - rss / tss },
        aic: aic_value(y.len(), rss, sol.rank),
        log_transformed: LOG_TRANSFORMED,
        target,
        meta: BTreeMap::new(),
    }
}

pub fn fit_ols(design: &DesignMatrix, y: &[f64], target: TargetKind) -> LinearModel {
    fit_ols_subset(design, y, None, target)
}

impl LinearModel {
    pub fn retained_terms(&self) -> impl Iterator<Item = (Term, f64)> + '_ {
        self.terms
            .iter()
            .zip(&self.coefficients)
            .zip(&self.retained)
            .filter(|(_, r)| **r)
            .map(|((t, c), _)| (*t, *c))
    }

    /// Number of retained non-intercept terms.
    pub fn k(&self) -> usize {
        self.retained_terms().filter(|(t, _)| *t != Term::Intercept).count()
    }

    fn transform(&self, raw: &[f64; NUM_FEATURES]) -> [f64; NUM_FEATURES] {
        let mut x = *raw;
        for (v, log) in x.iter_mut().zip(self.log_transformed) {
            if log {
                *v = v.ln_1p();
            }
        }
        x
    }

    /// Model output on the response scale it was fitted on.
    pub fn linear_predictor(&self, raw: &[f64; NUM_FEATURES]) -> f64 {
        let x = self.transform(raw);
        self.retained_terms().map(|(t, c)| c * t.eval(&x)).sum()
    }

    /// Prediction in target units. For visit targets this is exp(ŷ) − 1,
    /// never below `observed`.
    pub fn predict_with_floor(&self, raw: &[f64; NUM_FEATURES], observed: f64) -> f64 {
        let y = self.linear_predictor(raw);
        match self.target {
            TargetKind::LogVisits => y.exp_m1().max(observed),
            TargetKind::Raw => y,
        }
    }

    /// Prediction for a feature vector, floored at its visit count.
    pub fn predict(&self, fv: &FeatureVector) -> f64 {
        self.predict_with_floor(&fv.values(), fv.v)
    }

    pub fn predict_batch(&self, fvs: &[FeatureVector]) -> Vec<f64> {
        fvs.iter().map(|f| self.predict(f)).collect()
    }

    /// Serializes to the flat, line-oriented model file format.
    pub fn to_flat_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MODEL_MAGIC}");
        let _ = writeln!(s, "format_version\t{MODEL_FORMAT_VERSION}");
        let _ = writeln!(s, "target\t{}", self.target.as_str());
        let transform: Vec<String> = FEATURE_NAMES
            .iter()
            .zip(self.log_transformed)
            .map(|(n, l)| format!("{n}:{}", if l { "log1p" } else { "identity" }))
            .collect();
        let _ = writeln!(s, "transform\t{}", transform.join(","));
        let _ = writeln!(s, "n\t{}", self.n);
        let _ = writeln!(s, "rss\t{:?}", self.rss);
        let _ = writeln!(s, "tss\t{:?}", self.tss);
        let _ = writeln!(s, "r_squared\t{:?}", self.r_squared);
        let _ = writeln!(s, "aic\t{:?}", self.aic);
        for (k, v) in &self.meta {
            let _ = writeln!(s, "meta\t{k}\t{v}");
        }
        for ((t, c), r) in self.terms.iter().zip(&self.coefficients).zip(&self.retained) {
            let _ = writeln!(s, "term\t{}\t{}\t{:?}", t.label(), *r as u8, c);
        }
        s
    }

    pub fn from_flat_str(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::ModelFormat(msg);
        let mut lines = text.lines();
        if lines.next().map(str::trim_end) != Some(MODEL_MAGIC) {
            return Err(bad("missing model header".into()));
        }
        let mut version = None;
        let mut target = None;
        let mut log_transformed = None;
        let mut n = None;
        let (mut rss, mut tss, mut r2, mut aic) = (None, None, None, None);
        let mut meta = BTreeMap::new();
        let (mut terms, mut coefficients, mut retained) = (Vec::new(), Vec::new(), Vec::new());
        let num = |v: &str, what: &str| v.parse::<f64>().map_err(|_| bad(format!("bad {what}: {v}")));
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match (fields[0], fields.len()) {
                ("format_version", 2) => version = Some(fields[1].parse::<u32>().map_err(|_| bad("bad version".into()))?),
                ("target", 2) => {
                    target = Some(match fields[1] {
                        "log_visits" => TargetKind::LogVisits,
                        "raw" => TargetKind::Raw,
                        other => return Err(bad(format!("unknown target {other}"))),
                    })
                }
                ("transform", 2) => {
                    let mut flags = [false; NUM_FEATURES];
                    let entries: Vec<&str> = fields[1].split(',').collect();
                    if entries.len() != NUM_FEATURES {
                        return Err(bad("transform must list every feature".into()));
                    }
                    for (i, e) in entries.iter().enumerate() {
                        flags[i] = match e.split_once(':') {
                            Some((name, "log1p")) if name == FEATURE_NAMES[i] => true,
                            Some((name, "identity")) if name == FEATURE_NAMES[i] => false,
                            _ => return Err(bad(format!("bad transform entry {e}"))),
                        };
                    }
                    log_transformed = Some(flags);
                }
                ("n", 2) => n = Some(fields[1].parse::<usize>().map_err(|_| bad("bad n".into()))?),
                ("rss", 2) => rss = Some(num(fields[1], "rss")?),
                ("tss", 2) => tss = Some(num(fields[1], "tss")?),
                ("r_squared", 2) => r2 = Some(num(fields[1], "r_squared")?),
                ("aic", 2) => aic = Some(num(fields[1], "aic")?),
                ("meta", 3) => {
                    meta.insert(fields[1].to_string(), fields[2].to_string());
                }
                ("term", 4) => {
                    terms.push(Term::parse(fields[1]).ok_or_else(|| bad(format!("unknown term {}", fields[1])))?);
                    retained.push(match fields[2] {
                        "1" => true,
                        "0" => false,
                        other => return Err(bad(format!("bad retained flag {other}"))),
                    });
                    coefficients.push(num(fields[3], "coefficient")?);
                }
                _ => return Err(bad(format!("unrecognized line {}: {line}", lineno + 2))),
            }
        }
        match version {
            Some(MODEL_FORMAT_VERSION) => {}
            Some(v) => return Err(bad(format!("unsupported format version {v}"))),
            None => return Err(bad("missing format_version".into())),
        }
        let missing = |what: &str| bad(format!("missing {what}"));
        Ok(LinearModel {
            terms,
            coefficients,
            retained,
            n: n.ok_or_else(|| missing("n"))?,
            rss: rss.ok_or_else(|| missing("rss"))?,
            tss: tss.ok_or_else(|| missing("tss"))?,
            r_squared: r2.ok_or_else(|| missing("r_squared"))?,
            aic: aic.ok_or_else(|| missing("aic"))?,
            log_transformed: log_transformed.ok_or_else(|| missing("transform"))?,
            target: target.ok_or_else(|| missing("target"))?,
            meta,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_flat_string())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_flat_str(&std::fs::read_to_string(path)?)
    }
}
