//! Matrix polynomials `A(λ) = A_0 + A_1 λ + ⋯ + A_n λ^n` with real
//! coefficient matrices, and pairs of them sharing a column count.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest condition number accepted for the leading coefficient when
/// normalizing a polynomial to monic form.
pub const MONIC_COND_LIMIT: f64 = 1e12;

/// A matrix polynomial with coefficients stored degree-ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct MatPoly {
    rows: usize,
    cols: usize,
    coeffs: Vec<DMatrix<f64>>,
}

impl MatPoly {
    /// Builds a polynomial from degree-ascending coefficients. Zero leading
    /// coefficients are dropped (a single zero coefficient is kept).
    pub fn new(coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::Dimension("polynomial needs at least one coefficient".into()))?;
        let (rows, cols) = first.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("coefficient matrices must be non-empty".into()));
        }
        if let Some((j, bad)) = coeffs.iter().enumerate().find(|(_, c)| c.shape() != (rows, cols)) {
            return Err(Error::Dimension(format!(
                "coefficient {j} has shape {:?}, expected {:?}",
                bad.shape(),
                (rows, cols)
            )));
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.iter().all(|&x| x == 0.0)) {
            coeffs.pop();
        }
        Ok(MatPoly { rows, cols, coeffs })
    }

    /// Scalar (1×1) polynomial from degree-ascending coefficients.
    pub fn scalar(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| DMatrix::from_element(1, 1, c)).collect())
    }

    /// Convenience constructor from row-major coefficient slices.
    pub fn from_row_slices(rows: usize, cols: usize, coeffs: &[&[f64]]) -> Result<Self> {
        let mut mats = Vec::with_capacity(coeffs.len());
        for (j, c) in coeffs.iter().enumerate() {
            if c.len() != rows * cols {
                return Err(Error::Dimension(format!(
                    "coefficient {j} has {} entries, expected {}",
                    c.len(),
                    rows * cols
                )));
            }
            mats.push(DMatrix::from_row_slice(rows, cols, c));
        }
        Self::new(mats)
    }

    pub fn constant(m: DMatrix<f64>) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn identity(size: usize) -> Self {
        MatPoly {
            rows: size,
            cols: size,
            coeffs: vec![DMatrix::identity(size, size)],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    /// Coefficient of `λ^j`; zero beyond the degree.
    pub fn coeff(&self, j: usize) -> DMatrix<f64> {
        self.coeffs
            .get(j)
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.rows, self.cols))
    }

    pub fn leading(&self) -> &DMatrix<f64> {
        self.coeffs.last().expect("non-empty")
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Degree-ascending coefficients zero-padded up to `degree`.
    pub fn padded(&self, degree: usize) -> Vec<DMatrix<f64>> {
        (0..=degree.max(self.degree())).map(|j| self.coeff(j)).collect()
    }

    /// Coefficients of `self` laid side by side, leading first:
    /// `[A_n, A_{n-1}, …, A_0]` for the given `degree ≥ deg(self)`.
    pub fn leading_first_row(&self, degree: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, self.cols * (degree + 1));
        for t in 0..=degree {
            let c = self.coeff(degree - t);
            out.view_mut((0, t * self.cols), (self.rows, self.cols)).copy_from(&c);
        }
        out
    }

    /// Inverse of [`MatPoly::leading_first_row`].
    pub fn from_leading_first_row(row: &DMatrix<f64>, cols: usize) -> Result<Self> {
        if cols == 0 || row.ncols() % cols != 0 {
            return Err(Error::Dimension(format!(
                "{} columns is not a multiple of block width {cols}",
                row.ncols()
            )));
        }
        let blocks = row.ncols() / cols;
        let coeffs = (0..blocks)
            .rev()
            .map(|t| row.view((0, t * cols), (row.nrows(), cols)).into_owned())
            .collect();
        Self::new(coeffs)
    }

    /// Convolution product `self · other`.
    pub fn mul(&self, other: &MatPoly) -> Result<MatPoly> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}×{} by {}×{} polynomial",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![DMatrix::zeros(self.rows, other.cols); self.degree() + other.degree() + 1];
        for (i, p) in self.coeffs.iter().enumerate() {
            for (j, q) in other.coeffs.iter().enumerate() {
                out[i + j] += p * q;
            }
        }
        MatPoly::new(out)
    }

    /// Coefficientwise sum; shapes must agree.
    pub fn add(&self, other: &MatPoly) -> Result<MatPoly> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("cannot add polynomials of different shapes".into()));
        }
        let n = self.degree().max(other.degree());
        MatPoly::new((0..=n).map(|j| self.coeff(j) + other.coeff(j)).collect())
    }

    pub fn scale(&self, s: f64) -> MatPoly {
        MatPoly::new(self.coeffs.iter().map(|c| c * s).collect()).expect("same shape")
    }

    /// Left multiplication of every coefficient by a constant matrix.
    pub fn left_mul_const(&self, m: &DMatrix<f64>) -> Result<MatPoly> {
        if m.ncols() != self.rows {
            return Err(Error::Dimension("constant factor has wrong column count".into()));
        }
        MatPoly::new(self.coeffs.iter().map(|c| m * c).collect())
    }

    /// Horner evaluation at a real point.
    pub fn evaluate(&self, lambda: f64) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(self.rows, self.cols);
        for c in self.coeffs.iter().rev() {
            acc *= lambda;
            acc += c;
        }
        acc
    }

    /// Coefficientwise transpose, turning left factors into right factors.
    pub fn transpose(&self) -> MatPoly {
        MatPoly {
            rows: self.cols,
            cols: self.rows,
            coeffs: self.coeffs.iter().map(|c| c.transpose()).collect(),
        }
    }

    /// Perturbs every entry of every coefficient by `level` times a
    /// standard-normal draw.
    pub fn add_noise(&self, level: f64, seed: u64) -> Result<MatPoly> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.add_noise_with(level, &mut rng)
    }

    pub fn add_noise_with(&self, level: f64, rng: &mut impl rand::Rng) -> Result<MatPoly> {
        if !(level >= 0.0) || !level.is_finite() {
            return Err(Error::Parameter(format!("noise level must be nonnegative, got {level}")));
        }
        if level == 0.0 {
            return Ok(self.clone());
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                c.map(|x| {
                    let z: f64 = StandardNormal.sample(rng);
                    x + level * z
                })
            })
            .collect();
        MatPoly::new(coeffs)
    }

    /// Left-multiplies by the inverse of the leading coefficient so that the
    /// result is monic.
    pub fn monic_normalize(&self) -> Result<MatPoly> {
        self.monic_normalize_with(MONIC_COND_LIMIT)
    }

    pub fn monic_normalize_with(&self, max_cond: f64) -> Result<MatPoly> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "monic normalization needs a square polynomial, got {}×{}",
                self.rows, self.cols
            )));
        }
        let lead = self.leading();
        let sv = lead.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if !(smin > 0.0) || smax / smin > max_cond {
            return Err(Error::Normalization {
                smallest_singular: smin,
            });
        }
        let inv = lead
            .clone()
            .try_inverse()
            .ok_or(Error::Normalization {
                smallest_singular: smin,
            })?;
        let mut coeffs: Vec<DMatrix<f64>> = self.coeffs.iter().map(|c| &inv * c).collect();
        let n = coeffs.len() - 1;
        coeffs[n] = DMatrix::identity(self.rows, self.cols);
        MatPoly::new(coeffs)
    }

    /// Sum of squared Frobenius norms of all coefficients.
    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_squared()).sum()
    }

    /// Largest absolute coefficient difference, zero-padding the shorter.
    pub fn max_abs_diff(&self, other: &MatPoly) -> f64 {
        let n = self.degree().max(other.degree());
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        (0..=n)
            .map(|j| (self.coeff(j) - other.coeff(j)).amax())
            .fold(0.0, f64::max)
    }
}

/// Two matrix polynomials with a common column count, i.e. in the
/// orientation where common factors are right factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyPair {
    pub a: MatPoly,
    pub b: MatPoly,
}

impl PolyPair {
    pub fn new(a: MatPoly, b: MatPoly) -> Result<Self> {
        if a.cols() != b.cols() {
            return Err(Error::Dimension(format!(
                "pair needs a common column count, got {} and {}",
                a.cols(),
                b.cols()
            )));
        }
        Ok(PolyPair { a, b })
    }

    /// Builds the right-orientation pair from two polynomials sharing a row
    /// count (left factors), by transposition.
    pub fn from_left(a: &MatPoly, b: &MatPoly) -> Result<Self> {
        Self::new(a.transpose(), b.transpose())
    }

    /// Transposes both members back to left orientation.
    pub fn transposed(&self) -> (MatPoly, MatPoly) {
        (self.a.transpose(), self.b.transpose())
    }

    /// Common column count, the size of a right common factor.
    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    pub fn degree(&self) -> usize {
        self.a.degree().max(self.b.degree())
    }

    pub fn add_noise(&self, level: f64, seed: u64) -> Result<PolyPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PolyPair::new(
            self.a.add_noise_with(level, &mut rng)?,
            self.b.add_noise_with(level, &mut rng)?,
        )
    }

    /// Total number of real coefficients at the pair's common degree.
    pub fn entry_count(&self) -> usize {
        (self.degree() + 1) * (self.a.rows() + self.b.rows()) * self.cols()
    }
}

/// Coefficient distance `sqrt(Σ‖A_j − Â_j‖² + Σ‖B_j − B̂_j‖²)`, zero-padding
/// lower-degree members.
pub fn dist(x: &PolyPair, y: &PolyPair) -> Result<f64> {
    Ok((poly_dist_sq(&x.a, &y.a)? + poly_dist_sq(&x.b, &y.b)?).sqrt())
}

fn poly_dist_sq(p: &MatPoly, q: &MatPoly) -> Result<f64> {
    if p.rows() != q.rows() || p.cols() != q.cols() {
        return Err(Error::Dimension(format!(
            "cannot compare {}×{} with {}×{} polynomial",
            p.rows(),
            p.cols(),
            q.rows(),
            q.cols()
        )));
    }
    let n = p.degree().max(q.degree());
    Ok((0..=n).map(|j| (p.coeff(j) - q.coeff(j)).norm_squared()).sum())
}

/// A common right factor `c` with cofactors: `a ≈ abar·c`, `b ≈ bbar·c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationTriple {
    pub c: MatPoly,
    pub abar: MatPoly,
    pub bbar: MatPoly,
    pub d: usize,
}

impl FactorizationTriple {
    pub fn new(c: MatPoly, abar: MatPoly, bbar: MatPoly) -> Result<Self> {
        if !c.is_square() {
            return Err(Error::Dimension("common factor must be square".into()));
        }
        if abar.cols() != c.rows() || bbar.cols() != c.rows() {
            return Err(Error::Dimension("cofactor column count must match factor size".into()));
        }
        let d = c.degree();
        Ok(FactorizationTriple { c, abar, bbar, d })
    }

    /// The exactly factorable pair `(abar·c, bbar·c)`.
    pub fn product_pair(&self) -> Result<PolyPair> {
        PolyPair::new(self.abar.mul(&self.c)?, self.bbar.mul(&self.c)?)
    }
}

fn normal_matrix(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Random `m×m` pair of degree `n` with a planted monic common right factor
/// of degree `d`. Entries of the factor's lower coefficients and of the
/// cofactors are standard normal.
pub fn random_with_common_factor(
    m: usize,
    n: usize,
    d: usize,
    seed: u64,
) -> Result<(PolyPair, FactorizationTriple)> {
    if m == 0 || d == 0 || d >= n {
        return Err(Error::Parameter(format!(
            "need m ≥ 1 and 0 < d < n, got m = {m}, n = {n}, d = {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c_coeffs: Vec<DMatrix<f64>> = (0..d).map(|_| normal_matrix(m, m, &mut rng)).collect();
    c_coeffs.push(DMatrix::identity(m, m));
    let c = MatPoly::new(c_coeffs)?;
    let abar = MatPoly::new((0..=n - d).map(|_| normal_matrix(m, m, &mut rng)).collect())?;
    let bbar = MatPoly::new((0..=n - d).map(|_| normal_matrix(m, m, &mut rng)).collect())?;
    let triple = FactorizationTriple::new(c, abar, bbar)?;
    let pair = triple.product_pair()?;
    Ok((pair, triple))
}

/// On-disk representation: row-major 2-D arrays, degree-ascending.
#[derive(Serialize, Deserialize)]
struct MatPolyRepr {
    rows: usize,
    cols: usize,
    degree: usize,
    coeffs: Vec<Vec<Vec<f64>>>,
}

impl Serialize for MatPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.row_iter().map(|r| r.iter().copied().collect()).collect())
            .collect();
        MatPolyRepr {
            rows: self.rows,
            cols: self.cols,
            degree: self.degree(),
            coeffs,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MatPolyRepr::deserialize(d)?;
        MatPoly::try_from(repr).map_err(D::Error::custom)
    }
}

impl TryFrom<MatPolyRepr> for MatPoly {
    type Error = Error;

    fn try_from(repr: MatPolyRepr) -> Result<Self> {
        if repr.coeffs.len() != repr.degree + 1 {
            return Err(Error::Parse {
                field: "coeffs".into(),
                message: format!(
                    "degree {} needs {} coefficients, found {}",
                    repr.degree,
                    repr.degree + 1,
                    repr.coeffs.len()
                ),
            });
        }
        let mut mats = Vec::with_capacity(repr.coeffs.len());
        for (j, c) in repr.coeffs.iter().enumerate() {
            if c.len() != repr.rows || c.iter().any(|r| r.len() != repr.cols) {
                return Err(Error::Parse {
                    field: format!("coeffs[{j}]"),
                    message: format!("expected a {}×{} array", repr.rows, repr.cols),
                });
            }
            let flat: Vec<f64> = c.iter().flatten().copied().collect();
            if flat.iter().any(|x| !x.is_finite()) {
                return Err(Error::Parse {
                    field: format!("coeffs[{j}]"),
                    message: "non-finite entry".into(),
                });
            }
            mats.push(DMatrix::from_row_slice(repr.rows, repr.cols, &flat));
        }
        MatPoly::new(mats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    /// A(λ) of the coprime 2×2 degree-1 example.
    fn example_a() -> MatPoly {
        MatPoly::new(vec![m2(-1.0, 0.0, 1.0, -1.0), m2(1.0, 0.0, 0.0, 1.0)]).unwrap()
    }

    #[test]
    fn product_of_printed_factors() {
        // [[λ+1, −λ],[−λ+3, −1]] · [[λ+1, −1],[1, λ+1]]
        let abar = MatPoly::new(vec![m2(1.0, 0.0, 3.0, -1.0), m2(1.0, -1.0, -1.0, 0.0)]).unwrap();
        let c = MatPoly::new(vec![m2(1.0, -1.0, 1.0, 1.0), m2(1.0, 0.0, 0.0, 1.0)]).unwrap();
        let p = abar.mul(&c).unwrap();
        let expected = MatPoly::new(vec![
            m2(1.0, -1.0, 2.0, -4.0),
            m2(1.0, -2.0, 2.0, 0.0),
            m2(1.0, -1.0, -1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn identity_product_and_scalar_expansion() {
        let a = example_a();
        assert_eq!(a.mul(&MatPoly::identity(2)).unwrap(), a);
        let p = MatPoly::scalar(&[-1.0, 1.0]).unwrap();
        let q = MatPoly::scalar(&[-2.0, 1.0]).unwrap();
        assert_eq!(p.mul(&q).unwrap(), MatPoly::scalar(&[2.0, -3.0, 1.0]).unwrap());
    }

    #[test]
    fn mul_shape_mismatch() {
        let p = MatPoly::constant(DMatrix::zeros(2, 3)).unwrap();
        assert!(matches!(p.mul(&p), Err(Error::Dimension(_))));
    }

    #[test]
    fn evaluate_cases() {
        assert_eq!(example_a().evaluate(1.0), m2(0.0, 0.0, 1.0, 0.0));
        assert_eq!(example_a().evaluate(0.0), m2(-1.0, 0.0, 1.0, -1.0));
        let k = MatPoly::constant(m2(1.0, 2.0, 3.0, 4.0)).unwrap();
        assert_eq!(k.evaluate(7.5), m2(1.0, 2.0, 3.0, 4.0));
    }

    #[test]
    fn transpose_cases() {
        let a = example_a();
        let at = a.transpose();
        assert_eq!(at.evaluate(0.0), m2(-1.0, 1.0, 0.0, -1.0));
        assert_eq!(at.coeff(1), DMatrix::identity(2, 2));
        assert_eq!(at.transpose(), a);
        let sym = MatPoly::new(vec![m2(1.0, 2.0, 2.0, 3.0), m2(0.0, 1.0, 1.0, 0.0)]).unwrap();
        assert_eq!(sym.transpose(), sym);
    }

    #[test]
    fn dist_basic() {
        let pair = PolyPair::new(example_a(), example_a()).unwrap();
        assert_eq!(dist(&pair, &pair).unwrap(), 0.0);
        let mut c = example_a().coeffs().to_vec();
        c[0][(1, 0)] += 0.25;
        let other = PolyPair::new(MatPoly::new(c).unwrap(), example_a()).unwrap();
        assert!((dist(&pair, &other).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(dist(&pair, &other).unwrap(), dist(&other, &pair).unwrap());
    }

    #[test]
    fn dist_pads_lower_degree() {
        let x = PolyPair::new(MatPoly::scalar(&[1.0, 2.0, 3.0]).unwrap(), MatPoly::scalar(&[1.0]).unwrap()).unwrap();
        let y = PolyPair::new(MatPoly::scalar(&[1.0, 2.0]).unwrap(), MatPoly::scalar(&[1.0]).unwrap()).unwrap();
        assert!((dist(&x, &y).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn noise_cases() {
        let a = example_a();
        assert_eq!(a.add_noise(0.0, 3).unwrap(), a);
        assert_eq!(a.add_noise(0.1, 3).unwrap(), a.add_noise(0.1, 3).unwrap());
        assert_ne!(a.add_noise(0.1, 3).unwrap(), a.add_noise(0.1, 4).unwrap());
        assert!(a.add_noise(-1.0, 3).is_err());
    }

    #[test]
    fn noise_distance_matches_chi_mean() {
        // E‖z‖ for z ~ N(0, I_k) is sqrt(2)·Γ((k+1)/2)/Γ(k/2); k = 8 here.
        let a = example_a();
        let pair = PolyPair::new(a.clone(), MatPoly::constant(DMatrix::zeros(2, 2)).unwrap()).unwrap();
        let level = 0.3;
        let trials = 4000;
        let mean: f64 = (0..trials)
            .map(|s| {
                let noisy = PolyPair::new(a.add_noise(level, s).unwrap(), pair.b.clone()).unwrap();
                dist(&pair, &noisy).unwrap()
            })
            .sum::<f64>()
            / trials as f64;
        // Γ(4.5)/Γ(4) = 11.631728/6
        let chi_mean = 2f64.sqrt() * (11.631_728_396_567_45 / 6.0);
        assert!((mean - level * chi_mean).abs() < 0.02 * level * chi_mean, "{mean}");
        assert!((chi_mean - 8f64.sqrt()).abs() < 0.1);
    }

    #[test]
    fn monic_cases() {
        let c = MatPoly::new(vec![m2(1.0, -1.0, 1.0, 1.0), DMatrix::identity(2, 2)]).unwrap();
        assert_eq!(c.monic_normalize().unwrap(), c);
        let s = MatPoly::scalar(&[2.0, 2.0]).unwrap();
        assert_eq!(s.monic_normalize().unwrap(), MatPoly::scalar(&[1.0, 1.0]).unwrap());
        let diag = MatPoly::new(vec![m2(2.0, 0.0, 0.0, 8.0), m2(2.0, 0.0, 0.0, 4.0)]).unwrap();
        let n = diag.monic_normalize().unwrap();
        assert_eq!(n.coeff(0), m2(1.0, 0.0, 0.0, 2.0));
        assert_eq!(n.coeff(1), DMatrix::identity(2, 2));
    }

    #[test]
    fn monic_rejects_singular_leading() {
        let c = MatPoly::new(vec![DMatrix::identity(2, 2), m2(1.0, 1.0, 1.0, 1.0)]).unwrap();
        match c.monic_normalize() {
            Err(Error::Normalization { smallest_singular }) => assert!(smallest_singular < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn planted_instance_reconstructs() {
        let (pair, triple) = random_with_common_factor(2, 3, 1, 11).unwrap();
        assert_eq!(pair.a, triple.abar.mul(&triple.c).unwrap());
        assert!(dist(&pair, &triple.product_pair().unwrap()).unwrap() <= 1e-12);
        assert_eq!(triple.c.leading(), &DMatrix::identity(2, 2));
        assert_eq!(pair.degree(), 3);

        let (scalar, t) = random_with_common_factor(1, 4, 2, 5).unwrap();
        assert_eq!(scalar.a.rows(), 1);
        assert_eq!(t.d, 2);
        assert!(random_with_common_factor(2, 2, 2, 0).is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let a = example_a();
        let text = serde_json::to_string(&a).unwrap();
        assert!(text.contains("\"degree\":1"));
        let back: MatPoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);

        let bad = r#"{"rows":2,"cols":2,"degree":1,"coeffs":[[[1,0],[0,1]],[[1,0]]]}"#;
        let err = serde_json::from_str::<MatPoly>(bad).unwrap_err().to_string();
        assert!(err.contains("coeffs[1]"), "{err}");
    }
}
