//! Subspace method for (approximate) common right factors, least-squares
//! cofactor recovery, and exact common-factor extraction from a shifted
//! row echelon form of growing resultants.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matpoly::{dist, FactorizationTriple, MatPoly, PolyPair};
use crate::numkernel::{least_squares, smallest_from, svd};
use crate::structmat::{block_hankel, build_with_layout, toeplitz_of, SylvesterLayout};

/// Quantities that let a caller judge how well the prescribed degree fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceDiagnostics {
    /// The `q` smallest singular values of the stacked Hankel matrix, ascending.
    pub k_matrix_singulars: Vec<f64>,
    /// `σ_{qd+1} / σ_{qd}` of the resultant (ascending order); large when the
    /// numerical null space is well separated.
    pub nullspace_gap: f64,
    /// `‖τ(C) V₀‖_F` for the normalized factor.
    pub residual: f64,
    /// Coefficient distance between the input and `(Ā C, B̄ C)`.
    pub recovery_distance: f64,
    pub ell: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SubspaceOptions {
    /// Resultant window; defaults to `n(q + 1)`.
    pub ell: Option<usize>,
}

/// Runs the subspace method with default options.
pub fn subspace_gcd(pair: &PolyPair, d: usize) -> Result<(FactorizationTriple, SubspaceDiagnostics)> {
    subspace_gcd_with(pair, d, SubspaceOptions::default())
}

/// Right singular vectors of the `k` smallest singular values, counting the
/// structural zeros of a wide matrix.
fn null_basis(m: &DMatrix<f64>, k: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let padded;
    let m = if m.nrows() < m.ncols() {
        padded = m.clone().resize_vertically(m.ncols(), 0.0);
        &padded
    } else {
        m
    };
    let dec = svd(m)?;
    let trips = smallest_from(&dec, k)?;
    let mut basis = DMatrix::zeros(m.ncols(), k);
    for (j, t) in trips.iter().enumerate() {
        basis.set_column(j, &t.v);
    }
    let ascending: Vec<f64> = dec.singular_values.iter().rev().copied().collect();
    Ok((basis, ascending))
}

pub fn subspace_gcd_with(
    pair: &PolyPair,
    d: usize,
    opts: SubspaceOptions,
) -> Result<(FactorizationTriple, SubspaceDiagnostics)> {
    let n = pair.degree();
    if d == 0 || d >= n {
        return Err(Error::Parameter(format!(
            "factor degree must satisfy 0 < d < n = {n}, got {d}"
        )));
    }
    let layout = SylvesterLayout::for_pair(pair, opts.ell)?;
    let q = layout.q;
    let k = q * d;
    let s = build_with_layout(pair, layout)?;

    let (v0, ascending) = null_basis(&s.dense, k)?;
    let nullspace_gap = match (ascending.get(k - 1), ascending.get(k)) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => f64::INFINITY,
    };

    // K = [H(V_k), …, H(V_1)]; column order does not affect its left
    // singular vectors.
    let hankels: Vec<DMatrix<f64>> = v0
        .column_iter()
        .map(|col| block_hankel(col.as_slice(), q, d))
        .collect::<Result<_>>()?;
    let width: usize = hankels.iter().map(|h| h.ncols()).sum();
    let mut kmat = DMatrix::zeros(q * (d + 1), width);
    let mut off = 0;
    for h in &hankels {
        kmat.view_mut((0, off), h.shape()).copy_from(h);
        off += h.ncols();
    }
    let kdec = svd(&kmat)?;
    let left = smallest_from(&kdec, q)?;
    let mut coeff_row = DMatrix::zeros(q, q * (d + 1));
    for (i, t) in left.iter().enumerate() {
        coeff_row.set_row(i, &t.u.transpose());
    }
    let c = MatPoly::from_leading_first_row(&coeff_row, q)?;
    if c.degree() != d {
        return Err(Error::Normalization { smallest_singular: 0.0 });
    }
    let c = c.monic_normalize()?;

    let residual = (toeplitz_of(&c, layout.ell)? * &v0).norm();
    let (triple, recovery_distance) = recover_cofactors(pair, &c)?;
    let diagnostics = SubspaceDiagnostics {
        k_matrix_singulars: left.iter().map(|t| t.sigma).collect(),
        nullspace_gap,
        residual,
        recovery_distance,
        ell: layout.ell,
    };
    Ok((triple, diagnostics))
}

/// Least-squares cofactors for a given right factor `c`:
/// minimizes `‖A − Ā C‖² + ‖B − B̄ C‖²` and returns the triple together with
/// the coefficient distance between the input and `(Ā C, B̄ C)`.
pub fn recover_cofactors(pair: &PolyPair, c: &MatPoly) -> Result<(FactorizationTriple, f64)> {
    if !c.is_square() || c.rows() != pair.cols() {
        return Err(Error::Dimension(format!(
            "factor must be {q}×{q} for a pair with {q} columns",
            q = pair.cols()
        )));
    }
    let n = pair.degree();
    if c.degree() > n {
        return Err(Error::Parameter(format!(
            "factor degree {} exceeds pair degree {n}",
            c.degree()
        )));
    }
    let q = c.rows();
    // [Ā_{n-d} … Ā_0] τ(C) = [A_n … A_0]
    let tau_t = toeplitz_of(c, n + 1)?.transpose();
    let solve = |p: &MatPoly| -> Result<MatPoly> {
        let rhs = p.leading_first_row(n).transpose();
        let x = least_squares(&tau_t, &rhs)?;
        MatPoly::from_leading_first_row(&x.transpose(), q)
    };
    let abar = solve(&pair.a)?;
    let bbar = solve(&pair.b)?;
    let triple = FactorizationTriple::new(c.clone(), abar, bbar)?;
    let distance = dist(pair, &triple.product_pair()?)?;
    Ok((triple, distance))
}

/// Tuning for [`exact_gcd_echelon_with`].
#[derive(Debug, Clone, Copy)]
pub struct EchelonOptions {
    /// Pivots at or below `pivot_tol × (largest row norm)` count as zero.
    pub pivot_tol: f64,
    /// Pivots within this factor above the threshold are rank-ambiguous.
    pub ambiguity_factor: f64,
    /// Largest number of extra windows tried before giving up; `None` uses
    /// `n(q + 1) + 2`.
    pub max_extra: Option<usize>,
}

impl Default for EchelonOptions {
    fn default() -> Self {
        EchelonOptions {
            pivot_tol: 1e-10,
            ambiguity_factor: 100.0,
            max_extra: None,
        }
    }
}

/// Row echelon form by Gaussian elimination with partial pivoting. Returns
/// the reduced matrix and the pivot column of every nonzero row. Rows with
/// pivots at or beyond any given column span the intersection of the row
/// space with the vectors supported there, independently of the row order
/// chosen by pivoting.
fn row_echelon(m: &DMatrix<f64>, opts: &EchelonOptions) -> Result<(DMatrix<f64>, Vec<usize>)> {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = a.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
    let thresh = opts.pivot_tol * scale;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, a[(i, c)].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= thresh {
            for i in r..rows {
                a[(i, c)] = 0.0;
            }
            continue;
        }
        if val <= opts.ambiguity_factor * thresh {
            return Err(Error::RankTolerance {
                pivot: val,
                threshold: thresh,
            });
        }
        a.swap_rows(r, best);
        let p = a[(r, c)];
        for i in r + 1..rows {
            let f = a[(i, c)] / p;
            if f != 0.0 {
                for j in c..cols {
                    let v = a[(r, j)];
                    a[(i, j)] -= f * v;
                }
            }
            a[(i, c)] = 0.0;
        }
        pivots.push(c);
        r += 1;
    }
    Ok((a, pivots))
}

/// Exact greatest common right divisor, normalized to monic form.
pub fn exact_gcd_echelon(pair: &PolyPair) -> Result<MatPoly> {
    exact_gcd_echelon_with(pair, EchelonOptions::default())
}

/// Grows the window `w + ℓ` until `rank S_{w+ℓ+1} − rank S_{w+ℓ}` equals the
/// column count `q`, then reads the factor off the last `q` nonzero rows of
/// the echelon form of `S_{w+ℓ}`.
pub fn exact_gcd_echelon_with(pair: &PolyPair, opts: EchelonOptions) -> Result<MatPoly> {
    let w = pair.degree();
    let q = pair.cols();
    let max_extra = opts.max_extra.unwrap_or(w * (q + 1) + 2);
    let echelon_at = |extra: usize| -> Result<(DMatrix<f64>, Vec<usize>)> {
        let layout = SylvesterLayout::new(pair.a.rows(), pair.b.rows(), q, w, w + extra)?;
        row_echelon(&build_with_layout(pair, layout)?.dense, &opts)
    };

    let mut prev = echelon_at(1)?;
    for extra in 1..=max_extra {
        let next = echelon_at(extra + 1)?;
        if next.1.len() - prev.1.len() == q {
            let (ech, pivots) = prev;
            let rank = pivots.len();
            if rank < q {
                return Err(Error::Dimension("resultant rank below factor size".into()));
            }
            let first = pivots[rank - q];
            let block = first / q;
            let total_blocks = w + extra;
            let width = (total_blocks - block) * q;
            let rowsel = ech.view((rank - q, block * q), (q, width)).into_owned();
            let g = MatPoly::from_leading_first_row(&rowsel, q)?;
            return g.monic_normalize();
        }
        prev = next;
    }
    Err(Error::EchelonConvergence {
        max_window: w + max_extra,
    })
}
