//! Householder QR with column pivoting, on column-major data.

/// Relative pivot magnitude below which a column counts as linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Least-squares solution of a possibly rank-deficient system.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// One coefficient per input column; 0 for dropped columns.
    pub beta: Vec<f64>,
    pub retained: Vec<bool>,
    pub rank: usize,
    /// Squared norm of the part of `y` orthogonal to the retained columns,
    /// as accumulated during the factorization.
    pub residual_ss: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Builds the Householder reflector that maps `x` onto a multiple of e1.
/// Returns `(v, beta, alpha)` with `H = I - beta v vᵀ` and `Hx = alpha e1`.
fn reflector(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let norm = dot(x, x).sqrt();
    if norm == 0.0 {
        return (vec![0.0; x.len()], 0.0, 0.0);
    }
    let alpha = if x[0] > 0.0 { -norm } else { norm };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vv = dot(&v, &v);
    let beta = if vv == 0.0 { 0.0 } else { 2.0 / vv };
    (v, beta, alpha)
}

fn apply(v: &[f64], beta: f64, target: &mut [f64]) {
    if beta == 0.0 {
        return;
    }
    let s = beta * dot(v, target);
    for (t, vi) in target.iter_mut().zip(v) {
        *t -= s * vi;
    }
}

/// Solves min ‖y − Aβ‖ for the columns in `cols` (each of length n).
///
/// Columns are chosen greedily by largest remaining norm (lowest index wins
/// ties); factorization stops once the next pivot falls below
/// `RANK_TOLERANCE` times the first one.
pub fn solve_least_squares(cols: &[&[f64]], y: &[f64]) -> Solution {
    let p = cols.len();
    let n = y.len();
    let mut a: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
    let mut qty = y.to_vec();
    let mut order: Vec<usize> = (0..p).collect();
    let mut rdiag = Vec::new();
    let steps = n.min(p);
    let mut rank = 0;
    let mut first_pivot = 0.0;
    for k in 0..steps {
        let (best, best_norm) = (k..p)
            .map(|j| (j, dot(&a[j][k..], &a[j][k..]).sqrt()))
            .fold((k, -1.0), |acc, (j, nrm)| if nrm > acc.1 { (j, nrm) } else { acc });
        if k == 0 {
            first_pivot = best_norm;
        }
        if best_norm == 0.0 || best_norm < RANK_TOLERANCE * first_pivot {
            break;
        }
        a.swap(k, best);
        order.swap(k, best);
        let (v, beta, alpha) = reflector(&a[k][k..]);
        for col in a.iter_mut().skip(k + 1) {
            apply(&v, beta, &mut col[k..]);
        }
        apply(&v, beta, &mut qty[k..]);
        a[k][k] = alpha;
        for x in &mut a[k][k + 1..] {
            *x = 0.0;
        }
        rdiag.push(alpha);
        rank += 1;
    }
    // Back substitution on the leading rank×rank triangle.
    let mut coef = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = qty[i];
        for (j, c) in coef.iter().enumerate().skip(i + 1) {
            s -= a[j][i] * c;
        }
        coef[i] = s / a[i][i];
    }
    let mut beta = vec![0.0; p];
    let mut retained = vec![false; p];
    for (k, c) in coef.into_iter().enumerate() {
        beta[order[k]] = c;
        retained[order[k]] = true;
    }
    let residual_ss = dot(&qty[rank..], &qty[rank..]);
    Solution {
        beta,
        retained,
        rank,
        residual_ss,
    }
}

/// A least-squares problem reduced to an orthogonally equivalent system with
/// at most `p + 1` rows: `‖y − Xβ‖² = ‖z − Rβ‖² + ss_perp` for every β.
/// Refitting any column subset on `(R, z)` is then independent of n.
#[derive(Debug, Clone)]
pub struct Compressed {
    /// Column-major, `rows` entries per column.
    pub r: Vec<Vec<f64>>,
    pub z: Vec<f64>,
    pub ss_perp: f64,
}

impl Compressed {
    pub fn new(cols: &[&[f64]], y: &[f64]) -> Self {
        let p = cols.len();
        let n = y.len();
        let mut a: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
        let mut qty = y.to_vec();
        let steps = n.min(p);
        for k in 0..steps {
            let (v, beta, alpha) = reflector(&a[k][k..]);
            for col in a.iter_mut().skip(k + 1) {
                apply(&v, beta, &mut col[k..]);
            }
            apply(&v, beta, &mut qty[k..]);
            if beta != 0.0 {
                a[k][k] = alpha;
                for x in &mut a[k][k + 1..] {
                    *x = 0.0;
                }
            }
        }
        let rows = steps;
        let r = a.into_iter().map(|mut c| {
            c.truncate(rows);
            c
        });
        let ss_perp = dot(&qty[rows..], &qty[rows..]);
        qty.truncate(rows);
        Compressed { r: r.collect(), z: qty, ss_perp }
    }

    /// Fits the given subset of columns; RSS is returned alongside.
    pub fn solve_subset(&self, subset: &[usize]) -> (Solution, f64) {
        let cols: Vec<&[f64]> = subset.iter().map(|&j| self.r[j].as_slice()).collect();
        let sol = solve_least_squares(&cols, &self.z);
        let rss = sol.residual_ss + self.ss_perp;
        (sol, rss)
    }
}
