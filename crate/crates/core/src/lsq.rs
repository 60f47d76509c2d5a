//! Weighted least squares under a single linear equality constraint.
//!
//! Solves `min_β Σ_r w_r (x_rᵀβ − y_r)²` subject to `cᵀβ = d` by eliminating
//! the coordinate with the largest `|c_j|` and running a Householder QR on
//! the reduced, row-scaled design. The solution is affine in `(y, d)`, so the
//! solver exposes it as `β = G y + h d`, which also lets callers propagate
//! per-row standard errors.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold on `|R_jj|` below which the reduced design is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ConstrainedLeastSquares {
    /// `p × rows`
    gain: DMatrix<f64>,
    /// `p`
    offset: DVector<f64>,
}

impl ConstrainedLeastSquares {
    /// Factors the problem for `design` (`rows × p`), row `weights` and the
    /// constraint vector `constraint` (length `p`).
    pub fn new(design: &DMatrix<f64>, weights: &[f64], constraint: &[f64]) -> Result<Self> {
        let (rows, p) = design.shape();
        if weights.len() != rows {
            return Err(Error::Schema(format!(
                "{} weights for {rows} design rows",
                weights.len()
            )));
        }
        if constraint.len() != p {
            return Err(Error::Schema(format!(
                "constraint has {} entries for {p} coefficients",
                constraint.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Estimation(
                "regression weights must be finite and non-negative".into(),
            ));
        }
        let (pivot, c_pivot) = constraint
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .ok_or_else(|| Error::Estimation("no coefficients to estimate".into()))?;
        if c_pivot == 0.0 {
            return Err(Error::Estimation("constraint vector is zero".into()));
        }

        let free: Vec<usize> = (0..p).filter(|&j| j != pivot).collect();
        if free.is_empty() {
            // fully determined by the constraint
            return Ok(Self {
                gain: DMatrix::zeros(1, rows),
                offset: DVector::from_element(1, 1.0 / c_pivot),
            });
        }
        if rows < free.len() {
            return Err(Error::Estimation(format!(
                "{rows} regression rows cannot identify {} free coefficients; sample more coalitions",
                free.len()
            )));
        }

        let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        // reduced design: X_j − X_pivot c_j / c_pivot, rows scaled by √w
        let reduced = DMatrix::from_fn(rows, free.len(), |r, k| {
            let j = free[k];
            sqrt_w[r] * (design[(r, j)] - design[(r, pivot)] * constraint[j] / c_pivot)
        });
        let qr = reduced.qr();
        let r_mat = qr.r();
        let max_diag = (0..free.len()).map(|k| r_mat[(k, k)].abs()).fold(0.0, f64::max);
        if let Some(k) = (0..free.len()).find(|&k| r_mat[(k, k)].abs() <= RANK_TOL * max_diag.max(f64::MIN_POSITIVE)) {
            return Err(Error::Estimation(format!(
                "design matrix is rank deficient: coefficient {} is not identified by the sampled rows \
                 (too few or duplicate coalitions)",
                free[k]
            )));
        }
        let mut qt_w = qr.q().transpose();
        for r in 0..rows {
            for k in 0..free.len() {
                qt_w[(k, r)] *= sqrt_w[r];
            }
        }
        // P = R⁻¹ Qᵀ √W, so that β_free = P (y − X_pivot d / c_pivot)
        let projector = r_mat
            .solve_upper_triangular(&qt_w)
            .ok_or_else(|| Error::Estimation("triangular solve failed".into()))?;
        let pivot_col = design.column(pivot).into_owned();
        let p_xp = &projector * &pivot_col;

        let mut gain = DMatrix::zeros(p, rows);
        let mut offset = DVector::zeros(p);
        for (k, &j) in free.iter().enumerate() {
            gain.row_mut(j).copy_from(&projector.row(k));
            offset[j] = -p_xp[k] / c_pivot;
        }
        let mut pivot_gain = nalgebra::RowDVector::zeros(rows);
        let mut pivot_offset = 1.0 / c_pivot;
        for &j in &free {
            pivot_gain -= gain.row(j) * (constraint[j] / c_pivot);
            pivot_offset -= offset[j] * constraint[j] / c_pivot;
        }
        gain.row_mut(pivot).copy_from(&pivot_gain);
        offset[pivot] = pivot_offset;
        Ok(Self { gain, offset })
    }

    /// Solution for right-hand sides `y` (`rows × m`) and constraint values `d` (length `m`).
    pub fn solve(&self, y: &DMatrix<f64>, d: &[f64]) -> Result<DMatrix<f64>> {
        if y.nrows() != self.gain.ncols() || y.ncols() != d.len() {
            return Err(Error::Schema("right-hand side shape mismatch".into()));
        }
        let d = DVector::from_column_slice(d);
        Ok(&self.gain * y + &self.offset * d.transpose())
    }

    /// `G` in `β = G y + h d`.
    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// `h` in `β = G y + h d`.
    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: the KKT system `[2XᵀWX c; cᵀ 0] [β; λ] = [2XᵀWy; d]`.
    fn kkt(design: &DMatrix<f64>, w: &[f64], y: &DVector<f64>, c: &[f64], d: f64) -> DVector<f64> {
        let p = design.ncols();
        let wm = DMatrix::from_diagonal(&DVector::from_column_slice(w));
        let xtwx = design.transpose() * &wm * design;
        let xtwy = design.transpose() * &wm * y;
        let mut a = DMatrix::zeros(p + 1, p + 1);
        let mut b = DVector::zeros(p + 1);
        for i in 0..p {
            for j in 0..p {
                a[(i, j)] = 2.0 * xtwx[(i, j)];
            }
            a[(i, p)] = c[i];
            a[(p, i)] = c[i];
            b[i] = 2.0 * xtwy[i];
        }
        b[p] = d;
        a.lu().solve(&b).unwrap().rows(0, p).into_owned()
    }

    #[test]
    fn matches_kkt_solution() {
        let design = DMatrix::from_row_slice(
            6,
            3,
            &[
                1.0, 0.0, 2.0, 0.5, 1.0, 0.0, 0.0, 1.0, 1.0, 2.0, -1.0, 0.5, 1.0, 1.0, 1.0, -0.5, 0.3, 2.0,
            ],
        );
        let w = [1.0, 0.5, 2.0, 0.25, 1.5, 0.8];
        let y = DVector::from_column_slice(&[1.0, 2.0, -1.0, 0.5, 3.0, 0.1]);
        let c = [1.0, -2.0, 0.5];
        let d = 0.7;
        let solver = ConstrainedLeastSquares::new(&design, &w, &c).unwrap();
        let beta = solver
            .solve(&DMatrix::from_column_slice(6, 1, y.as_slice()), &[d])
            .unwrap();
        let oracle = kkt(&design, &w, &y, &c, d);
        for j in 0..3 {
            assert!((beta[(j, 0)] - oracle[j]).abs() < 1e-10, "{beta} vs {oracle}");
        }
        let lhs: f64 = (0..3).map(|j| c[j] * beta[(j, 0)]).sum();
        assert!((lhs - d).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        // column 2 duplicates column 1
        let design = DMatrix::from_row_slice(4, 3, &[1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let err = ConstrainedLeastSquares::new(&design, &[1.0; 4], &[1.0, 0.0, 0.0]).unwrap_err();
        assert!(
            matches!(err, Error::Estimation(ref m) if m.contains("rank deficient")),
            "{err}"
        );
    }

    #[test]
    fn too_few_rows() {
        let design = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 1.0]);
        assert!(ConstrainedLeastSquares::new(&design, &[1.0], &[1.0, 1.0, 1.0]).is_err());
    }
}
