//! Generalized Sylvester resultants, the orthogonal projection onto their
//! structure, block-Toeplitz multiplication operators and block-Hankel
//! reshapes.
//!
//! Inside every structured matrix the coefficient blocks are laid out
//! leading-first (`A_n … A_0`), while [`MatPoly`] stores them ascending.
//! Conversion happens at the boundary of this module.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matpoly::{MatPoly, PolyPair};

/// Shape bookkeeping for `S_ℓ(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SylvesterLayout {
    /// Rows of each `A` coefficient.
    pub m_a: usize,
    /// Rows of each `B` coefficient.
    pub m_b: usize,
    /// Common column count of all coefficient blocks.
    pub q: usize,
    /// Degree of the (padded) polynomials.
    pub n: usize,
    /// Number of block columns.
    pub ell: usize,
}

impl SylvesterLayout {
    pub fn new(m_a: usize, m_b: usize, q: usize, n: usize, ell: usize) -> Result<Self> {
        if ell < n + 1 {
            return Err(Error::Parameter(format!(
                "window ell = {ell} must be at least degree + 1 = {}",
                n + 1
            )));
        }
        if m_a == 0 || m_b == 0 || q == 0 {
            return Err(Error::Dimension("empty coefficient blocks".into()));
        }
        Ok(SylvesterLayout { m_a, m_b, q, n, ell })
    }

    /// Layout for `pair` with the window that makes the resultant's corank
    /// equal the common multiplicity: `ell = n(q + 1)`.
    pub fn default_for(pair: &PolyPair) -> Result<Self> {
        let n = pair.degree();
        Self::new(pair.a.rows(), pair.b.rows(), pair.cols(), n, default_window(n, pair.cols()))
    }

    pub fn for_pair(pair: &PolyPair, ell: Option<usize>) -> Result<Self> {
        let n = pair.degree();
        let ell = ell.unwrap_or_else(|| default_window(n, pair.cols()));
        Self::new(pair.a.rows(), pair.b.rows(), pair.cols(), n, ell)
    }

    /// Block rows per half, `ℓ − n`.
    pub fn shifts(&self) -> usize {
        self.ell - self.n
    }

    pub fn rows(&self) -> usize {
        (self.m_a + self.m_b) * self.shifts()
    }

    pub fn cols(&self) -> usize {
        self.q * self.ell
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    fn b_offset(&self) -> usize {
        self.m_a * self.shifts()
    }
}

/// `n(q + 1)` for a degree `n ≥ 1`; degree-0 pairs get the minimal window.
pub fn default_window(n: usize, q: usize) -> usize {
    (n * (q + 1)).max(n + 1)
}

/// A generalized Sylvester matrix together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SylvesterMatrix {
    pub layout: SylvesterLayout,
    pub dense: DMatrix<f64>,
}

impl SylvesterMatrix {
    /// Assembles the structured matrix from leading-first coefficient blocks
    /// (`a_blocks[t]` is `A_{n−t}`).
    pub fn from_blocks(
        layout: SylvesterLayout,
        a_blocks: &[DMatrix<f64>],
        b_blocks: &[DMatrix<f64>],
    ) -> Result<Self> {
        let n = layout.n;
        if a_blocks.len() != n + 1 || b_blocks.len() != n + 1 {
            return Err(Error::Dimension(format!("expected {} coefficient blocks per half", n + 1)));
        }
        if a_blocks.iter().any(|b| b.shape() != (layout.m_a, layout.q))
            || b_blocks.iter().any(|b| b.shape() != (layout.m_b, layout.q))
        {
            return Err(Error::Dimension("coefficient block shape does not match layout".into()));
        }
        let (q, shifts) = (layout.q, layout.shifts());
        let mut dense = DMatrix::zeros(layout.rows(), layout.cols());
        for i in 0..shifts {
            for t in 0..=n {
                dense
                    .view_mut((i * layout.m_a, (i + t) * q), (layout.m_a, q))
                    .copy_from(&a_blocks[t]);
                dense
                    .view_mut((layout.b_offset() + i * layout.m_b, (i + t) * q), (layout.m_b, q))
                    .copy_from(&b_blocks[t]);
            }
        }
        Ok(SylvesterMatrix { layout, dense })
    }

    pub fn zeros(layout: SylvesterLayout) -> Self {
        let dense = DMatrix::zeros(layout.rows(), layout.cols());
        SylvesterMatrix { layout, dense }
    }

    /// `‖dense − P_𝒮(dense)‖_F`.
    pub fn structure_deviation(&self) -> f64 {
        let p = project_structure(&self.dense, &self.layout).expect("shape matches layout");
        (&self.dense - p.dense).norm()
    }

    pub fn norm(&self) -> f64 {
        self.dense.norm()
    }
}

fn leading_first(p: &MatPoly, n: usize) -> Vec<DMatrix<f64>> {
    (0..=n).map(|t| p.coeff(n - t)).collect()
}

/// `S_ℓ(A, B)`: `ℓ − n` shifted copies of `[A_n … A_0]` stacked over the
/// same for `B`. Lower-degree members are zero-padded to the pair degree.
pub fn build_resultant(pair: &PolyPair, ell: usize) -> Result<SylvesterMatrix> {
    let n = pair.degree();
    let layout = SylvesterLayout::new(pair.a.rows(), pair.b.rows(), pair.cols(), n, ell)?;
    build_with_layout(pair, layout)
}

/// Builds the resultant on a given layout; the layout degree may exceed the
/// pair degree (extra leading blocks are zero).
pub fn build_with_layout(pair: &PolyPair, layout: SylvesterLayout) -> Result<SylvesterMatrix> {
    if pair.degree() > layout.n
        || pair.a.rows() != layout.m_a
        || pair.b.rows() != layout.m_b
        || pair.cols() != layout.q
    {
        return Err(Error::Dimension("pair does not fit the resultant layout".into()));
    }
    SylvesterMatrix::from_blocks(layout, &leading_first(&pair.a, layout.n), &leading_first(&pair.b, layout.n))
}

/// Averages of the `ℓ − n` occurrences of every coefficient block, leading
/// first, for the `A` and `B` halves.
fn block_averages(h: &DMatrix<f64>, layout: &SylvesterLayout) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
    let (q, n, shifts) = (layout.q, layout.n, layout.shifts());
    let scale = 1.0 / shifts as f64;
    let mut a = vec![DMatrix::zeros(layout.m_a, q); n + 1];
    let mut b = vec![DMatrix::zeros(layout.m_b, q); n + 1];
    for j in 0..shifts {
        for t in 0..=n {
            a[t] += h.view((j * layout.m_a, (j + t) * q), (layout.m_a, q));
            b[t] += h.view((layout.b_offset() + j * layout.m_b, (j + t) * q), (layout.m_b, q));
        }
    }
    for blk in a.iter_mut().chain(b.iter_mut()) {
        *blk *= scale;
    }
    (a, b)
}

/// Frobenius-orthogonal projection of `h` onto the Sylvester structure: each
/// coefficient block becomes the mean of the blocks on its structural
/// diagonal, everything off the band becomes zero.
pub fn project_structure(h: &DMatrix<f64>, layout: &SylvesterLayout) -> Result<SylvesterMatrix> {
    if h.shape() != layout.shape() {
        return Err(Error::Dimension(format!(
            "matrix of shape {:?} does not match layout shape {:?}",
            h.shape(),
            layout.shape()
        )));
    }
    let (a, b) = block_averages(h, layout);
    SylvesterMatrix::from_blocks(*layout, &a, &b)
}

/// Projection of the rank-one matrix `u vᵀ` without forming it.
pub fn project_rank_one(u: &DVector<f64>, v: &DVector<f64>, layout: &SylvesterLayout) -> Result<SylvesterMatrix> {
    if u.len() != layout.rows() || v.len() != layout.cols() {
        return Err(Error::Dimension("singular vectors do not match layout".into()));
    }
    let (q, n, shifts) = (layout.q, layout.n, layout.shifts());
    let scale = 1.0 / shifts as f64;
    let mut a = vec![DMatrix::zeros(layout.m_a, q); n + 1];
    let mut b = vec![DMatrix::zeros(layout.m_b, q); n + 1];
    for j in 0..shifts {
        let ua = u.rows(j * layout.m_a, layout.m_a);
        let ub = u.rows(layout.b_offset() + j * layout.m_b, layout.m_b);
        for t in 0..=n {
            let vt = v.rows((j + t) * q, q).transpose();
            a[t] += &ua * &vt;
            b[t] += &ub * &vt;
        }
    }
    for blk in a.iter_mut().chain(b.iter_mut()) {
        *blk *= scale;
    }
    SylvesterMatrix::from_blocks(*layout, &a, &b)
}

/// Block-Toeplitz multiplication operator `τ(C)` with `block_cols` block
/// columns: block row `j` holds `[C_d … C_0]` starting at block column `j`.
///
/// With this convention `S_ℓ(Ā C, B̄ C) = S_{ℓ−d}(Ā, B̄) · τ(C)` for
/// `τ(C)` built with `ℓ` block columns.
pub fn toeplitz_of(c: &MatPoly, block_cols: usize) -> Result<DMatrix<f64>> {
    if !c.is_square() {
        return Err(Error::Dimension("multiplication operator needs a square factor".into()));
    }
    let (q, d) = (c.rows(), c.degree());
    if block_cols < d + 1 {
        return Err(Error::Parameter(format!(
            "{block_cols} block columns cannot hold a degree-{d} factor"
        )));
    }
    let block_rows = block_cols - d;
    let mut t = DMatrix::zeros(q * block_rows, q * block_cols);
    for j in 0..block_rows {
        for s in 0..=d {
            t.view_mut((j * q, (j + s) * q), (q, q)).copy_from(&c.coeff(d - s));
        }
    }
    Ok(t)
}

/// Reshapes `v` column-major into `V̄` with `m` rows and returns the
/// `m(d+1) × (c−d)` block-Hankel matrix whose column `j` stacks
/// `V̄[:, j], …, V̄[:, j+d]`.
pub fn block_hankel(v: &[f64], m: usize, d: usize) -> Result<DMatrix<f64>> {
    if m == 0 || v.len() % m != 0 {
        return Err(Error::Dimension(format!(
            "vector of length {} cannot be reshaped into {m} rows",
            v.len()
        )));
    }
    let c = v.len() / m;
    if c < d + 1 {
        return Err(Error::Dimension(format!(
            "{c} block columns are too few for a degree-{d} Hankel reshape"
        )));
    }
    Ok(DMatrix::from_fn(m * (d + 1), c - d, |i, j| v[(j + i / m) * m + i % m]))
}

/// Structure tolerance used by [`read_coefficients`], relative to
/// `max(1, ‖S‖_F)`.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Reads the polynomial pair back from a structured matrix (the first block
/// row of each half).
pub fn read_coefficients(s: &SylvesterMatrix) -> Result<PolyPair> {
    let deviation = s.structure_deviation();
    if deviation > STRUCTURE_TOL * s.norm().max(1.0) {
        return Err(Error::Structure { deviation });
    }
    let l = &s.layout;
    let a: Vec<DMatrix<f64>> = (0..=l.n)
        .rev()
        .map(|t| s.dense.view((0, t * l.q), (l.m_a, l.q)).into_owned())
        .collect();
    let b: Vec<DMatrix<f64>> = (0..=l.n)
        .rev()
        .map(|t| s.dense.view((l.b_offset(), t * l.q), (l.m_b, l.q)).into_owned())
        .collect();
    PolyPair::new(MatPoly::new(a)?, MatPoly::new(b)?)
}

/// Coefficient distance encoded by a structured perturbation `εE` with
/// `‖E‖_F = 1`: every block occurs `ℓ − n` times, so the distance is
/// `ε / sqrt(ℓ − n)`.
pub fn poly_distance_of(epsilon: f64, layout: &SylvesterLayout) -> f64 {
    epsilon / (layout.shifts() as f64).sqrt()
}

/// Frobenius inner product `tr(Aᵀ B)`.
pub fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    fn example_pair() -> PolyPair {
        let a = MatPoly::new(vec![m2(-1.0, 0.0, 1.0, -1.0), DMatrix::identity(2, 2)]).unwrap();
        let b = MatPoly::new(vec![m2(0.0, 1.0, 0.0, -2.0), DMatrix::identity(2, 2)]).unwrap();
        PolyPair::new(a, b).unwrap()
    }

    #[test]
    fn classical_resultant_of_example() {
        let s = build_resultant(&example_pair(), 2).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            1.0, 0.0, -1.0, 0.0,
            0.0, 1.0, 1.0, -1.0,
            1.0, 0.0, 0.0, 1.0,
            0.0, 1.0, 0.0, -2.0,
        ]);
        assert_eq!(s.dense, expected);
        let kernel = DVector::from_vec(vec![1.0, -2.0, 1.0, -1.0]);
        assert_eq!(&s.dense * kernel, DVector::zeros(4));
    }

    #[test]
    fn window_three_resultant_of_example() {
        let s = build_resultant(&example_pair(), 3).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(8, 6, &[
            1.0, 0.0, -1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 1.0, -1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0, -1.0, 0.0,
            0.0, 0.0, 0.0, 1.0, 1.0, -1.0,
            1.0, 0.0, 0.0, 1.0, 0.0, 0.0,
            0.0, 1.0, 0.0, -2.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 0.0, 1.0, 0.0, -2.0,
        ]);
        assert_eq!(s.dense, expected);
        assert_eq!(s.dense.rank(1e-10), 6);
    }

    #[test]
    fn scalar_sylvester_of_coprime_linears() {
        let pair = PolyPair::new(MatPoly::scalar(&[1.0, 1.0]).unwrap(), MatPoly::scalar(&[-1.0, 1.0]).unwrap()).unwrap();
        let s = build_resultant(&pair, 2).unwrap();
        assert_eq!(s.dense, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]));
        assert!((s.dense.determinant() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn window_too_small() {
        assert!(matches!(build_resultant(&example_pair(), 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn projection_of_all_ones() {
        let layout = SylvesterLayout::new(1, 1, 1, 1, 3).unwrap();
        let p = project_structure(&DMatrix::from_element(4, 3, 1.0), &layout).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 3, &[
            1.0, 1.0, 0.0,
            0.0, 1.0, 1.0,
            1.0, 1.0, 0.0,
            0.0, 1.0, 1.0,
        ]);
        assert_eq!(p.dense, expected);
    }

    #[test]
    fn projection_fixes_structured_and_checks_shape() {
        let s = build_resultant(&example_pair(), 3).unwrap();
        assert_eq!(project_structure(&s.dense, &s.layout).unwrap(), s);
        assert!(project_structure(&DMatrix::zeros(3, 3), &s.layout).is_err());
    }

    #[test]
    fn rank_one_projection_matches_dense() {
        let layout = SylvesterLayout::new(2, 3, 2, 2, 5).unwrap();
        let u = DVector::from_fn(layout.rows(), |i, _| (i as f64 * 0.7).sin());
        let v = DVector::from_fn(layout.cols(), |i, _| (i as f64 * 1.3).cos());
        let fast = project_rank_one(&u, &v, &layout).unwrap();
        let slow = project_structure(&(&u * v.transpose()), &layout).unwrap();
        assert!((fast.dense - slow.dense).norm() < 1e-14);
    }

    #[test]
    fn toeplitz_cases() {
        let c = MatPoly::scalar(&[-1.0, 1.0]).unwrap();
        assert_eq!(
            toeplitz_of(&c, 3).unwrap(),
            DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 0.0, 1.0, -1.0])
        );
        assert_eq!(toeplitz_of(&MatPoly::identity(2), 3).unwrap(), DMatrix::identity(6, 6));
        assert!(toeplitz_of(&MatPoly::constant(DMatrix::zeros(2, 3)).unwrap(), 3).is_err());
    }

    #[test]
    fn hankel_cases() {
        let h = block_hankel(&[1.0, 2.0, 3.0, 4.0], 1, 1).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 3.0, 4.0]));
        let h = block_hankel(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2, 1).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(4, 2, &[1.0, 3.0, 2.0, 4.0, 3.0, 5.0, 4.0, 6.0]));
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(block_hankel(&v, 2, 0).unwrap(), DMatrix::from_column_slice(2, 3, &v));
        assert!(block_hankel(&v, 4, 0).is_err());
        assert!(block_hankel(&v, 2, 3).is_err());
    }

    #[test]
    fn hankel_matches_index_enumeration() {
        let v: Vec<f64> = (0..15).map(|i| i as f64).collect();
        let (m, d) = (3, 2);
        let h = block_hankel(&v, m, d).unwrap();
        let c = v.len() / m;
        for j in 0..c - d {
            let mut expected = Vec::new();
            for s in 0..=d {
                for r in 0..m {
                    // V̄[r, j+s] in column-major storage
                    expected.push(v[r + m * (j + s)]);
                }
            }
            assert_eq!(h.column(j).iter().copied().collect::<Vec<_>>(), expected);
        }
    }

    #[test]
    fn read_back_and_structure_violation() {
        let pair = example_pair();
        let s = build_resultant(&pair, 3).unwrap();
        assert_eq!(read_coefficients(&s).unwrap(), pair);
        let mut broken = s.clone();
        broken.dense[(0, 5)] = 1.0;
        assert!(matches!(read_coefficients(&broken), Err(Error::Structure { .. })));
    }

    #[test]
    fn distance_conversion() {
        let layout = SylvesterLayout::new(2, 2, 2, 1, 2).unwrap();
        assert_eq!(poly_distance_of(0.0, &layout), 0.0);
        assert_eq!(poly_distance_of(0.3, &layout), 0.3);
        let layout = SylvesterLayout::new(2, 2, 2, 1, 5).unwrap();
        assert!((poly_distance_of(0.3, &layout) - 0.15).abs() < 1e-16);
    }
}
