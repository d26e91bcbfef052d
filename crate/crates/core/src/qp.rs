//! Zoom/rigid energy in general quadratic-program form and the
//! equality-constrained solve for the grid intervals.
//!
//! The unknown vector is d = (d_row[0..m], d_col[0..n]). The objective
//! 1/2 d'Pd + q'd (plus a dropped constant) reproduces
//! E_zoom + lambda * E_rigid, and the two constraint rows pin the interval
//! sums to the crop extent so the mapping never crops the source.

use crate::error::{Axis, Error, Result};
use crate::importance::ScoreGrid;

/// Zoom factor and rigidity weight.
#[derive(Debug, Clone, Copy)]
pub struct ZoomParams {
    /// Target linear magnification for important areas, >= 1.
    pub gamma: f64,
    /// Weight of the aspect-ratio (rigid) energy, >= 0.
    pub lambda: f64,
}

impl ZoomParams {
    pub fn new(gamma: f64, lambda: f64) -> Result<ZoomParams> {
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "zoom factor {gamma} must be finite and >= 1"
            )));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "balance weight {lambda} must be finite and >= 0"
            )));
        }
        Ok(ZoomParams { gamma, lambda })
    }
}

/// Assembled problem: minimize 1/2 d'Pd + q'd subject to Ad = b_eq.
///
/// `p` is (m+n)^2 row-major and symmetric, `a` is 2 x (m+n) row-major
/// with row 0 selecting the row intervals and row 1 the column intervals.
#[derive(Debug, Clone)]
pub struct QPProblem {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub a: Vec<f64>,
    pub b_eq: [f64; 2],
    pub m: usize,
    pub n: usize,
}

impl QPProblem {
    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    /// 1/2 d'Pd + q'd (without the dropped constant).
    pub fn quadratic(&self, d: &[f64]) -> f64 {
        let n = self.dim();
        assert_eq!(d.len(), n);
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.p[i * n + j] * d[j];
            }
            acc += d[i] * (0.5 * row + self.q[i]);
        }
        acc
    }
}

/// Solved grid point intervals, strictly positive, summing to the crop
/// extent per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Intervals {
    pub d_row: Vec<f64>,
    pub d_col: Vec<f64>,
}

impl Intervals {
    /// Exact uniform spacing for the given grid shape.
    pub fn uniform(m: usize, n: usize, crop_w: f64, crop_h: f64) -> Intervals {
        Intervals {
            d_row: vec![crop_h / m as f64; m],
            d_col: vec![crop_w / n as f64; n],
        }
    }
}

/// Builds P, q, A, b_eq from the patch scores.
pub fn assemble(scores: &ScoreGrid, crop_w: f64, crop_h: f64, zp: &ZoomParams) -> QPProblem {
    assert!(crop_w > 0.0 && crop_h > 0.0, "crop extent must be positive");
    let m = scores.rows();
    let n = scores.cols();
    let dim = m + n;
    let (gamma, lambda) = (zp.gamma, zp.lambda);

    // squared scores and their row/column sums
    let mut s2 = vec![0.0; m * n];
    let mut s_row = vec![0.0; m];
    let mut s_col = vec![0.0; n];
    for l in 0..m {
        for k in 0..n {
            let v = scores.get(l, k);
            let sq = v * v;
            s2[l * n + k] = sq;
            s_row[l] += sq;
            s_col[k] += sq;
        }
    }

    let row_stretch = m as f64 / crop_h;
    let col_stretch = n as f64 / crop_w;
    let target_row = crop_h / (gamma * m as f64);
    let target_col = crop_w / (gamma * n as f64);

    let mut p = vec![0.0; dim * dim];
    let mut q = vec![0.0; dim];
    for l in 0..m {
        p[l * dim + l] = 2.0 * s_row[l] * (lambda * row_stretch * row_stretch + 1.0);
        q[l] = -2.0 * s_row[l] * target_row;
    }
    for k in 0..n {
        let i = m + k;
        p[i * dim + i] = 2.0 * s_col[k] * (lambda * col_stretch * col_stretch + 1.0);
        q[i] = -2.0 * s_col[k] * target_col;
    }
    let cross_scale = -2.0 * lambda * row_stretch * col_stretch;
    for l in 0..m {
        for k in 0..n {
            let v = cross_scale * s2[l * n + k];
            p[l * dim + (m + k)] = v;
            p[(m + k) * dim + l] = v;
        }
    }

    let mut a = vec![0.0; 2 * dim];
    for l in 0..m {
        a[l] = 1.0;
    }
    for k in 0..n {
        a[dim + m + k] = 1.0;
    }

    QPProblem {
        p,
        q,
        a,
        b_eq: [crop_h, crop_w],
        m,
        n,
    }
}

/// Evaluates the two energies literally from their definitions; the
/// matrix form in [`assemble`] must agree with this up to the dropped
/// constant.
pub fn energy(
    d: &Intervals,
    scores: &ScoreGrid,
    crop_w: f64,
    crop_h: f64,
    zp: &ZoomParams,
) -> (f64, f64) {
    let m = scores.rows();
    let n = scores.cols();
    assert_eq!(d.d_row.len(), m);
    assert_eq!(d.d_col.len(), n);
    let target_row = crop_h / (zp.gamma * m as f64);
    let target_col = crop_w / (zp.gamma * n as f64);
    let row_stretch = m as f64 / crop_h;
    let col_stretch = n as f64 / crop_w;

    let mut e_zoom = 0.0;
    let mut e_rigid = 0.0;
    for l in 0..m {
        for k in 0..n {
            let s = scores.get(l, k);
            let s2 = s * s;
            let zr = d.d_row[l] - target_row;
            let zc = d.d_col[k] - target_col;
            e_zoom += s2 * (zr * zr + zc * zc);
            let stretch = row_stretch * d.d_row[l] - col_stretch * d.d_col[k];
            e_rigid += s2 * stretch * stretch;
        }
    }
    (e_zoom, e_rigid)
}

/// Solves the equality-constrained program via the Schur complement of
/// the positive-definite block: P y = A' nu ... with a single iterative
/// refinement pass, then validates the KKT residuals and positivity.
pub fn solve(prob: &QPProblem) -> Result<Intervals> {
    let dim = prob.dim();
    assert_eq!(prob.p.len(), dim * dim);
    assert_eq!(prob.q.len(), dim);
    assert_eq!(prob.a.len(), 2 * dim);

    let chol = Cholesky::factor(dim, &prob.p)
        .ok_or_else(|| Error::SolverFailure("quadratic term is not positive definite".into()))?;

    let neg_q: Vec<f64> = prob.q.iter().map(|v| -v).collect();
    let (mut d, mut nu) = kkt_step(prob, &chol, &neg_q, &prob.b_eq)?;

    // one refinement pass on the full KKT residual
    let (r_stat, r_feas) = kkt_residual(prob, &d, &nu);
    let (dd, dnu) = kkt_step(prob, &chol, &r_stat, &r_feas)?;
    for i in 0..dim {
        d[i] += dd[i];
    }
    nu[0] += dnu[0];
    nu[1] += dnu[1];

    let (r_stat, r_feas) = kkt_residual(prob, &d, &nu);
    let q_scale = 1.0 + prob.q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let b_scale = 1.0 + prob.b_eq[0].abs().max(prob.b_eq[1].abs());
    let stat_norm = r_stat.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let feas_norm = r_feas[0].abs().max(r_feas[1].abs());
    if !(stat_norm <= 1e-8 * q_scale && feas_norm <= 1e-9 * b_scale) {
        return Err(Error::SolverFailure(format!(
            "KKT residuals too large: stationarity {stat_norm:e}, feasibility {feas_norm:e}"
        )));
    }

    for (i, &v) in d.iter().enumerate() {
        if !(v > 0.0) {
            let (axis, index) = if i < prob.m {
                (Axis::Row, i)
            } else {
                (Axis::Col, i - prob.m)
            };
            return Err(Error::DegenerateDeformation {
                axis,
                index,
                value: v,
            });
        }
    }

    Ok(Intervals {
        d_row: d[..prob.m].to_vec(),
        d_col: d[prob.m..].to_vec(),
    })
}

/// Solves P d + A' nu = rhs_top, A d = rhs_bot for (d, nu) given the
/// factored P.
fn kkt_step(
    prob: &QPProblem,
    chol: &Cholesky,
    rhs_top: &[f64],
    rhs_bot: &[f64; 2],
) -> Result<(Vec<f64>, [f64; 2])> {
    let dim = prob.dim();

    // y = P^-1 rhs_top, Y_j = P^-1 a_j for the two constraint rows
    let y = chol.solve(rhs_top);
    let y0 = chol.solve(&prob.a[..dim]);
    let y1 = chol.solve(&prob.a[dim..]);

    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    // Schur complement M = A P^-1 A' (2x2, SPD)
    let m00 = dot(&prob.a[..dim], &y0);
    let m01 = dot(&prob.a[..dim], &y1);
    let m11 = dot(&prob.a[dim..], &y1);
    // M nu = A y - rhs_bot
    let r0 = dot(&prob.a[..dim], &y) - rhs_bot[0];
    let r1 = dot(&prob.a[dim..], &y) - rhs_bot[1];
    let det = m00 * m11 - m01 * m01;
    if !(det.is_finite() && det.abs() > f64::MIN_POSITIVE) {
        return Err(Error::SolverFailure("singular constraint system".into()));
    }
    let nu0 = (m11 * r0 - m01 * r1) / det;
    let nu1 = (m00 * r1 - m01 * r0) / det;

    let mut d = y;
    for i in 0..dim {
        d[i] -= nu0 * y0[i] + nu1 * y1[i];
    }
    Ok((d, [nu0, nu1]))
}

/// Residuals of the KKT conditions at (d, nu): returns
/// (-(Pd + q + A'nu), b - Ad), i.e. the right-hand side for a
/// refinement step.
fn kkt_residual(prob: &QPProblem, d: &[f64], nu: &[f64; 2]) -> (Vec<f64>, [f64; 2]) {
    let dim = prob.dim();
    let mut top = vec![0.0; dim];
    for i in 0..dim {
        let mut acc = prob.q[i];
        for j in 0..dim {
            acc += prob.p[i * dim + j] * d[j];
        }
        acc += prob.a[i] * nu[0] + prob.a[dim + i] * nu[1];
        top[i] = -acc;
    }
    let mut bot = [prob.b_eq[0], prob.b_eq[1]];
    for i in 0..dim {
        bot[0] -= prob.a[i] * d[i];
        bot[1] -= prob.a[dim + i] * d[i];
    }
    (top, bot)
}

/// Dense lower-triangular Cholesky factor of a symmetric positive
/// definite matrix.
struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn factor(n: usize, a: &[f64]) -> Option<Cholesky> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut acc = a[i * n + j];
                for k in 0..j {
                    acc -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(acc > 0.0) || !acc.is_finite() {
                        return None;
                    }
                    l[i * n + i] = acc.sqrt();
                } else {
                    l[i * n + j] = acc / l[j * n + j];
                }
            }
        }
        Some(Cholesky { n, l })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        // forward: L z = b
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.l[i * n + k] * x[k];
            }
            x[i] /= self.l[i * n + i];
        }
        // backward: L' x = z
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.l[k * n + i] * x[k];
            }
            x[i] /= self.l[i * n + i];
        }
        x
    }
}
