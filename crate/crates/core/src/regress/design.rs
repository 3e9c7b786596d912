use serde::{Deserialize, Serialize};

use crate::features::{transform_features, FEATURE_NAMES, NUM_FEATURES};

/// One column of a design matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Intercept,
    Main(usize),
    Pair(usize, usize),
}

impl Term {
    pub fn label(self) -> String {
        match self {
            Term::Intercept => "(Intercept)".to_string(),
            Term::Main(i) => FEATURE_NAMES[i].to_string(),
            Term::Pair(i, j) => format!("{}:{}", FEATURE_NAMES[i], FEATURE_NAMES[j]),
        }
    }

    pub fn parse(label: &str) -> Option<Term> {
        if label == "(Intercept)" {
            return Some(Term::Intercept);
        }
        let idx = |name: &str| FEATURE_NAMES.iter().position(|n| *n == name);
        match label.split_once(':') {
            Some((a, b)) => {
                let (i, j) = (idx(a)?, idx(b)?);
                (i < j).then_some(Term::Pair(i, j))
            }
            None => idx(label).map(Term::Main),
        }
    }

    /// Value of this term for an already transformed feature row.
    pub fn eval(self, x: &[f64; NUM_FEATURES]) -> f64 {
        match self {
            Term::Intercept => 1.0,
            Term::Main(i) => x[i],
            Term::Pair(i, j) => x[i] * x[j],
        }
    }
}

/// Intercept, the ten mains in formula order and, optionally, the 45
/// pairwise products ordered by (first, second) feature index.
pub fn full_terms(include_interactions: bool) -> Vec<Term> {
    let mut terms = vec![Term::Intercept];
    terms.extend((0..NUM_FEATURES).map(Term::Main));
    if include_interactions {
        for i in 0..NUM_FEATURES {
            for j in i + 1..NUM_FEATURES {
                terms.push(Term::Pair(i, j));
            }
        }
    }
    terms
}

/// Intercept plus the given mains and all their pairwise products.
pub fn terms_for(features: &[usize], include_interactions: bool) -> Vec<Term> {
    let mut f = features.to_vec();
    f.sort_unstable();
    f.dedup();
    let mut terms = vec![Term::Intercept];
    terms.extend(f.iter().map(|&i| Term::Main(i)));
    if include_interactions {
        for (a, &i) in f.iter().enumerate() {
            for &j in &f[a + 1..] {
                terms.push(Term::Pair(i, j));
            }
        }
    }
    terms
}

/// Column-major design matrix over transformed features.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub terms: Vec<Term>,
    pub columns: Vec<Vec<f64>>,
    pub rows: usize,
}

impl DesignMatrix {
    /// Builds the matrix for raw (untransformed) feature rows.
    pub fn from_raw(rows: &[[f64; NUM_FEATURES]], terms: &[Term]) -> Self {
        let transformed: Vec<_> = rows.iter().map(transform_features).collect();
        Self::from_transformed(&transformed, terms)
    }

    pub fn from_transformed(rows: &[[f64; NUM_FEATURES]], terms: &[Term]) -> Self {
        let columns = terms.iter().map(|t| rows.iter().map(|x| t.eval(x)).collect()).collect();
        DesignMatrix {
            terms: terms.to_vec(),
            columns,
            rows: rows.len(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.label()).collect()
    }

    pub fn column(&self, term: Term) -> Option<&[f64]> {
        self.terms.iter().position(|t| *t == term).map(|i| self.columns[i].as_slice())
    }
}

/// Design matrix for the standard scope: 11 columns, or 56 with interactions.
pub fn build_design_matrix(rows: &[[f64; NUM_FEATURES]], include_interactions: bool) -> DesignMatrix {
    DesignMatrix::from_raw(rows, &full_terms(include_interactions))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_counts() {
        let row = [[1.0; NUM_FEATURES]];
        assert_eq!(build_design_matrix(&row, false).columns.len(), 11);
        assert_eq!(build_design_matrix(&row, true).columns.len(), 56);
    }

    #[test]
    fn labels_in_order() {
        let labels = build_design_matrix(&[[0.0; NUM_FEATURES]], true).labels();
        assert_eq!(&labels[..3], &["(Intercept)", "v", "vr"]);
        assert_eq!(labels[11], "v:vr");
        assert_eq!(labels[55], "unip:cp");
        for l in &labels {
            assert_eq!(Term::parse(l).unwrap().label(), *l);
        }
    }

    #[test]
    fn interaction_is_product_of_mains() {
        let rows: Vec<[f64; NUM_FEATURES]> = (0..7)
            .map(|i| std::array::from_fn(|j| ((i * 3 + j * 5) % 11) as f64 * 0.7))
            .collect();
        let m = build_design_matrix(&rows, true);
        let v = m.column(Term::Main(0)).unwrap();
        let t = m.column(Term::Main(4)).unwrap();
        let vt = m.column(Term::Pair(0, 4)).unwrap();
        for k in 0..rows.len() {
            assert_eq!(vt[k], v[k] * t[k]);
        }
    }

    #[test]
    fn permuting_rows_permutes_rows_only() {
        let rows: Vec<[f64; NUM_FEATURES]> = (0..5).map(|i| std::array::from_fn(|j| (i * 10 + j) as f64)).collect();
        let mut rev = rows.clone();
        rev.reverse();
        let a = build_design_matrix(&rows, true);
        let b = build_design_matrix(&rev, true);
        for (ca, cb) in a.columns.iter().zip(&b.columns) {
            let mut cb = cb.clone();
            cb.reverse();
            assert_eq!(ca, &cb);
        }
    }
}
