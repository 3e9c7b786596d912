use super::design::{DesignMatrix, Term};
use super::model::{aic_value, fit_ols_subset, LinearModel, TargetKind};
use super::qr::Compressed;

/// Bidirectional stepwise selection by AIC over the terms of `design`,
/// starting from all of them. Each round tries dropping every active term and
/// re-adding every dropped one, and takes the single move with the lowest AIC
/// if it strictly improves; ties go to the earlier term. The intercept is
/// always kept, and interactions may stay without their main effects.
pub fn stepwise_select(design: &DesignMatrix, y: &[f64], target: TargetKind) -> LinearModel {
    let p = design.terms.len();
    let cols: Vec<&[f64]> = design.columns.iter().map(|c| c.as_slice()).collect();
    let comp = Compressed::new(&cols, y);
    let n = y.len();
    let score = |active: &[bool]| -> f64 {
        let subset: Vec<usize> = (0..p).filter(|&j| active[j]).collect();
        let (sol, rss) = comp.solve_subset(&subset);
        aic_value(n, rss, sol.rank)
    };
    let mut active = vec![true; p];
    let mut current = score(&active);
    for _ in 0..p * p + 1 {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..p {
            if design.terms[j] == Term::Intercept {
                continue;
            }
            active[j] = !active[j];
            let s = score(&active);
            active[j] = !active[j];
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((j, s));
            }
        }
        match best {
            Some((j, s)) if s < current => {
                active[j] = !active[j];
                current = s;
            }
            _ => break,
        }
    }
    fit_ols_subset(design, y, Some(&active), target)
}
