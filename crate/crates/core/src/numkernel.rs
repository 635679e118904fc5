//! Dense singular value decomposition, smallest singular triplets and
//! minimum-norm least squares.
//!
//! Backed by `nalgebra`'s bidiagonal SVD. Everything above this module only
//! sees [`SvdResult`] and [`Triplet`], which carry a fixed ordering and sign
//! convention so that results are reproducible.
//!
//! [`smallest_svd`] is a cheaper variant for tall matrices that only needs a
//! few of the smallest triplets: it takes an eigenbasis of `MᵀM` and refines
//! it with a Rayleigh–Ritz step on `M` itself, falling back to the full SVD
//! when the refined triplets are not provably close to the true ones.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative gap below which two singular values are considered coalesced.
pub const COALESCENCE_GAP: f64 = 1e-10;

/// Largest accepted bound on the angle between a Ritz vector from
/// [`smallest_svd`] and the true singular vector, `‖Mᵀu − σv‖ / gap` with
/// the gap measured to the first singular value outside the subspace.
/// The matching error in `σ` is quadratic in this bound.
pub const RITZ_ANGLE_TOL: f64 = 1e-6;

/// Thin SVD `M = U diag(s) Vᵀ` with `s` sorted nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `rows × r` orthonormal columns, `r = min(rows, cols)`.
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    /// `cols × r` orthonormal columns.
    pub v: DMatrix<f64>,
}

impl SvdResult {
    pub fn sigma_max(&self) -> f64 {
        if self.singular_values.is_empty() {
            0.0
        } else {
            self.singular_values[0]
        }
    }

    /// The `k`-th smallest singular value (1-based).
    pub fn kth_smallest(&self, k: usize) -> f64 {
        self.singular_values[self.singular_values.len() - k]
    }

    /// Number of singular values not exceeding `rel_tol * sigma_max`.
    pub fn corank(&self, rel_tol: f64) -> usize {
        let thresh = rel_tol * self.sigma_max();
        self.singular_values.iter().filter(|&&s| s <= thresh).count()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let us = DMatrix::from_fn(self.u.nrows(), self.u.ncols(), |i, j| {
            self.u[(i, j)] * self.singular_values[j]
        });
        us * self.v.transpose()
    }
}

/// One singular triplet `(σ, u, v)` with `M v = σ u`.
#[derive(Debug, Clone)]
pub struct Triplet {
    pub sigma: f64,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
}

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(what.to_string()))
    }
}

/// Full (thin) SVD with descending singular values. Each pair of singular
/// vectors is signed so that the largest-magnitude entry of `u` is positive.
pub fn svd(m: &DMatrix<f64>) -> Result<SvdResult> {
    check_finite(m, "svd input")?;
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    if r == 0 {
        return Ok(SvdResult {
            u: DMatrix::zeros(rows, 0),
            singular_values: DVector::zeros(0),
            v: DMatrix::zeros(cols, 0),
        });
    }
    let dec = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("svd iteration".into()))?;
    let u_raw = dec.u.expect("u requested");
    let vt_raw = dec.v_t.expect("v requested");
    let s_raw = dec.singular_values;

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| s_raw[b].total_cmp(&s_raw[a]));

    let mut u = DMatrix::zeros(rows, r);
    let mut v = DMatrix::zeros(cols, r);
    let mut s = DVector::zeros(r);
    for (dst, &src) in order.iter().enumerate() {
        let mut ucol = u_raw.column(src).into_owned();
        let mut vcol = vt_raw.row(src).transpose();
        let pivot = ucol
            .iter()
            .copied()
            .fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            ucol.neg_mut();
            vcol.neg_mut();
        }
        u.set_column(dst, &ucol);
        v.set_column(dst, &vcol);
        s[dst] = s_raw[src].max(0.0);
    }
    Ok(SvdResult {
        u,
        singular_values: s,
        v,
    })
}

fn sign_fix(u: &mut DMatrix<f64>, v: &mut DMatrix<f64>, j: usize) {
    let pivot = u
        .column(j)
        .iter()
        .copied()
        .fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if pivot < 0.0 {
        u.column_mut(j).neg_mut();
        v.column_mut(j).neg_mut();
    }
}

/// The `p` smallest singular triplets of `m`, stored like a full [`svd`]
/// (descending, same sign convention) but with only `p` columns. The
/// second value is `σ_max(m)`.
///
/// When `p > 1` the largest returned triplet acts as a guard that widens
/// the gap for the others: its value is still accurate to second order, but
/// its vectors are not checked.
pub fn smallest_svd(m: &DMatrix<f64>, p: usize) -> Result<(SvdResult, f64)> {
    check_finite(m, "svd input")?;
    let (rows, cols) = m.shape();
    if p == 0 || p > rows.min(cols) {
        return Err(Error::Parameter(format!(
            "requested {p} smallest triplets of a {rows}×{cols} matrix"
        )));
    }
    if rows < cols || p == cols {
        return Ok(tail_of_full(m, p)?);
    }
    let eig = m.tr_mul(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let sigma_max = eig.eigenvalues[order[cols - 1]].max(0.0).sqrt();
    let basis = DMatrix::from_fn(cols, p, |i, j| eig.eigenvectors[(i, order[j])]);
    let ritz = (m * &basis)
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("svd iteration".into()))?;
    let ru = ritz.u.expect("u requested");
    let rvt = ritz.v_t.expect("v requested");
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&a, &b| ritz.singular_values[b].total_cmp(&ritz.singular_values[a]));
    let mut u = DMatrix::from_fn(rows, p, |i, j| ru[(i, idx[j])]);
    let w = DMatrix::from_fn(p, p, |i, j| rvt[(idx[j], i)]);
    let mut v = &basis * w;
    let values = DVector::from_fn(p, |j, _| ritz.singular_values[idx[j]].max(0.0));
    let outside = eig.eigenvalues[order[p]].max(0.0).sqrt();
    let back = m.tr_mul(&u);
    let checked = if p > 1 { 1 } else { 0 };
    for j in checked..p {
        let gap = outside - values[j];
        let res = (back.column(j) - v.column(j) * values[j]).norm();
        if !(gap > 0.0 && res <= RITZ_ANGLE_TOL * gap) {
            return tail_of_full(m, p);
        }
    }
    for j in 0..p {
        sign_fix(&mut u, &mut v, j);
    }
    Ok((
        SvdResult {
            u,
            singular_values: values,
            v,
        },
        sigma_max,
    ))
}

fn tail_of_full(m: &DMatrix<f64>, p: usize) -> Result<(SvdResult, f64)> {
    let dec = svd(m)?;
    let r = dec.singular_values.len();
    let sigma_max = dec.sigma_max();
    Ok((
        SvdResult {
            u: dec.u.columns(r - p, p).into_owned(),
            singular_values: dec.singular_values.rows(r - p, p).into_owned(),
            v: dec.v.columns(r - p, p).into_owned(),
        },
        sigma_max,
    ))
}

/// The `k` smallest singular triplets of `m`, in ascending order of `σ`.
///
/// Only the `min(rows, cols)` singular values of the thin SVD are
/// considered, so `k` may not exceed that number.
pub fn smallest_triplets(m: &DMatrix<f64>, k: usize) -> Result<Vec<Triplet>> {
    let dec = svd(m)?;
    smallest_from(&dec, k)
}

/// Same as [`smallest_triplets`] on an already computed decomposition.
pub fn smallest_from(dec: &SvdResult, k: usize) -> Result<Vec<Triplet>> {
    let r = dec.singular_values.len();
    if k == 0 || k > r {
        return Err(Error::Parameter(format!(
            "requested {k} smallest triplets of a matrix with {r} singular values"
        )));
    }
    warn_on_coalescence(dec, k);
    Ok((0..k)
        .map(|i| {
            let idx = r - 1 - i;
            Triplet {
                sigma: dec.singular_values[idx],
                u: dec.u.column(idx).into_owned(),
                v: dec.v.column(idx).into_owned(),
            }
        })
        .collect())
}

/// Triplet of the `k`-th smallest singular value (1-based).
pub fn kth_smallest_triplet(dec: &SvdResult, k: usize) -> Result<Triplet> {
    let r = dec.singular_values.len();
    if k == 0 || k > r {
        return Err(Error::Parameter(format!(
            "singular value index {k} out of range 1..={r}"
        )));
    }
    let idx = r - k;
    Ok(Triplet {
        sigma: dec.singular_values[idx],
        u: dec.u.column(idx).into_owned(),
        v: dec.v.column(idx).into_owned(),
    })
}

/// Whether the `k`-th smallest singular value is within the coalescence gap
/// of one of its neighbours.
pub fn is_coalesced(dec: &SvdResult, k: usize) -> bool {
    is_coalesced_at_scale(dec, k, dec.sigma_max())
}

/// [`is_coalesced`] with the gap measured relative to `scale` instead of the
/// largest stored value (for the partial result of [`smallest_svd`]).
pub fn is_coalesced_at_scale(dec: &SvdResult, k: usize, scale: f64) -> bool {
    let r = dec.singular_values.len();
    if k == 0 || k > r {
        return false;
    }
    let idx = r - k;
    let gap = COALESCENCE_GAP * scale;
    let s = &dec.singular_values;
    let s_k = s[idx];
    // exact zeros are a multiple kernel, not a coalescence
    if s_k <= gap {
        return false;
    }
    (idx > 0 && (s[idx - 1] - s_k).abs() < gap) || (idx + 1 < r && (s_k - s[idx + 1]).abs() < gap)
}

fn warn_on_coalescence(dec: &SvdResult, k: usize) {
    if is_coalesced(dec, k) {
        log::warn!(
            "singular value {} of {} is not simple; singular vectors are not unique",
            k,
            dec.singular_values.len()
        );
    }
}

/// Minimum-norm minimizer `X` of `‖M X − rhs‖_F`.
pub fn least_squares(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != rhs.nrows() {
        return Err(Error::Dimension(format!(
            "least squares with {} equations but right-hand side of {} rows",
            m.nrows(),
            rhs.nrows()
        )));
    }
    check_finite(rhs, "least squares right-hand side")?;
    let dec = svd(m)?;
    let cutoff = (m.nrows().max(m.ncols()) as f64) * f64::EPSILON * dec.sigma_max();
    let mut coeffs = dec.u.transpose() * rhs;
    for (i, mut row) in coeffs.row_iter_mut().enumerate() {
        let s = dec.singular_values[i];
        if s > cutoff {
            row /= s;
        } else {
            row.fill(0.0);
        }
    }
    Ok(&dec.v * coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_svd_matches_full() {
        let m = DMatrix::from_fn(12, 7, |i, j| {
            let (x, y) = (i as f64, j as f64);
            (5.0 * x + 11.0 * y + 0.3 * x * y).sin() + if i == j { 0.3 * (y + 1.0) } else { 0.0 }
        });
        let full = svd(&m).unwrap();
        for p in 1..=7 {
            let (part, smax) = smallest_svd(&m, p).unwrap();
            assert!((smax - full.sigma_max()).abs() <= 1e-12 * smax);
            for j in 0..p {
                let f = 7 - p + j;
                assert!((part.singular_values[j] - full.singular_values[f]).abs() <= 1e-12 * smax);
                let ang = part.v.column(j).dot(&full.v.column(f)).abs();
                assert!((ang - 1.0).abs() < 1e-10, "p {p} j {j}: {ang}");
                assert!((part.u.column(j) - full.u.column(f)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn smallest_svd_of_rank_deficient() {
        // Example 1 resultant: one exact zero with kernel (1, -2, 1, -1).
        let m = DMatrix::from_row_slice(4, 4, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 1.0, -1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -2.0]);
        let tall = DMatrix::from_fn(8, 4, |i, j| if i < 4 { m[(i, j)] } else { 0.5 * m[(i - 4, j)] });
        let (part, _) = smallest_svd(&tall, 2).unwrap();
        assert!(part.singular_values[1] < 1e-14);
        let k = DVector::from_vec(vec![1.0, -2.0, 1.0, -1.0]).normalize();
        assert!((part.v.column(1).dot(&k).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let dec = svd(&DMatrix::identity(3, 3)).unwrap();
        for s in dec.singular_values.iter() {
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_values_sorted() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0, 2.0]));
        let dec = svd(&m).unwrap();
        assert_eq!(dec.singular_values.as_slice(), &[3.0, 2.0, 1.0]);
        let small = smallest_triplets(&m, 2).unwrap();
        assert_eq!(small[0].sigma, 1.0);
        assert_eq!(small[1].sigma, 2.0);
    }

    #[test]
    fn reconstructs_random_rectangular() {
        let m = DMatrix::from_fn(5, 3, |i, j| ((i * 7 + j * 3) as f64).sin());
        for mat in [m.clone(), m.transpose()] {
            let dec = svd(&mat).unwrap();
            let err = (dec.reconstruct() - &mat).norm();
            assert!(err <= 1e-12 * mat.norm());
            let r = dec.singular_values.len();
            assert!((dec.u.transpose() * &dec.u - DMatrix::identity(r, r)).norm() < 1e-12);
            assert!((dec.v.transpose() * &dec.v - DMatrix::identity(r, r)).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(svd(&m), Err(Error::Numeric(_))));
    }

    #[test]
    fn k_out_of_range() {
        let m = DMatrix::identity(3, 2);
        assert!(smallest_triplets(&m, 3).is_err());
        assert!(smallest_triplets(&m, 0).is_err());
    }

    #[test]
    fn sign_convention() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, -1.0, 0.0]);
        let dec = svd(&m).unwrap();
        for j in 0..2 {
            let col = dec.u.column(j);
            let big = col.iter().copied().fold(0.0_f64, |b, x| if x.abs() > b.abs() { x } else { b });
            assert!(big > 0.0);
        }
        assert!((dec.reconstruct() - m).norm() < 1e-14);
    }

    #[test]
    fn square_solve_is_exact() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let x_true = DMatrix::from_row_slice(3, 1, &[1.0, -2.0, 0.5]);
        let rhs = &m * &x_true;
        let x = least_squares(&m, &rhs).unwrap();
        assert!((&m * &x - &rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn orthonormal_columns_give_transpose_solution() {
        let q = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.6, 0.0, 0.8]);
        let rhs = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let x = least_squares(&q, &rhs).unwrap();
        assert!((x - q.transpose() * &rhs).norm() < 1e-14);
    }

    #[test]
    fn residual_orthogonal_to_range() {
        let m = DMatrix::from_fn(6, 3, |i, j| ((i + 1) as f64).powi(j as i32) / 10.0);
        let rhs = DMatrix::from_fn(6, 2, |i, j| ((i * 3 + j) as f64).cos());
        let x = least_squares(&m, &rhs).unwrap();
        let res = &m * &x - &rhs;
        assert!((m.transpose() * res).norm() < 1e-10);
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        // two identical columns: minimum-norm solution splits the weight
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let rhs = DMatrix::from_row_slice(2, 1, &[2.0, 2.0]);
        let x = least_squares(&m, &rhs).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }
}
