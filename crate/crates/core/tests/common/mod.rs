//! Test-only reference computations, independent of the library's solvers.
#![allow(dead_code)]

use agcd::{MatPoly, PolyPair};
use nalgebra::{DMatrix, DVector};

pub const EXACT_PAIR: &str = include_str!("../fixtures/exact_pair.json");
pub const COPRIME_PAIR: &str = include_str!("../fixtures/coprime_pair.json");

#[derive(serde::Deserialize)]
struct PairFile {
    a: MatPoly,
    b: MatPoly,
}

pub fn load_pair(text: &str) -> PolyPair {
    let f: PairFile = serde_json::from_str(text).expect("fixture parses");
    PolyPair::new(f.a, f.b).expect("fixture is a valid pair")
}

/// `[[λ+1, −1], [1, λ+1]]`.
pub fn exact_factor() -> MatPoly {
    MatPoly::from_row_slices(2, 2, &[&[1.0, -1.0, 1.0, 1.0], &[1.0, 0.0, 0.0, 1.0]]).unwrap()
}

/// Ascending coefficients of `Π (z − r)`.
pub fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, &x) in c.iter().enumerate() {
            next[i + 1] += x;
            next[i] -= r * x;
        }
        c = next;
    }
    c
}

/// Size of the multiset intersection of two root lists.
pub fn common_root_count(a: &[i32], b: &[i32]) -> usize {
    let mut rest = b.to_vec();
    let mut count = 0;
    for r in a {
        if let Some(i) = rest.iter().position(|x| x == r) {
            rest.swap_remove(i);
            count += 1;
        }
    }
    count
}

/// Classical Sylvester matrix of two scalar polynomials (ascending input),
/// written out row by row from the textbook definition.
pub fn classical_sylvester(a: &[f64], b: &[f64]) -> DMatrix<f64> {
    let (na, nb) = (a.len() - 1, b.len() - 1);
    let size = na + nb;
    let mut s = DMatrix::zeros(size, size);
    for i in 0..nb {
        for j in 0..=na {
            s[(i, i + j)] = a[na - j];
        }
    }
    for i in 0..na {
        for j in 0..=nb {
            s[(nb + i, i + j)] = b[nb - j];
        }
    }
    s
}

/// Number of singular values at most `rel · σ_max`.
pub fn numerical_corank(m: &DMatrix<f64>, rel: f64) -> usize {
    let s = m.clone().singular_values();
    let max = s.max();
    let full = m.nrows().min(m.ncols());
    let small = s.iter().filter(|&&x| x <= rel * max).count();
    small + m.ncols().saturating_sub(full)
}

/// Angle between two vectors, sign-insensitive. Uses the chord length
/// rather than `acos`, which cannot resolve angles below about 1e-8.
pub fn angle(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let x = x / x.norm();
    let mut y = y / y.norm();
    if x.dot(&y) < 0.0 {
        y = -y;
    }
    2.0 * ((&x - &y).norm() / 2.0).min(1.0).asin()
}

/// Distance from `x` to the column space of `t`.
fn residual(t: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let qr = t.clone().qr();
    let q = qr.q();
    (x - &q * (q.transpose() * x)).norm()
}

/// Matrix of multiplication by the polynomial `c` (ascending), mapping
/// degree `< cols` coefficient vectors to degree `< cols + deg c`.
fn factor_matrix(c: &[f64], cols: usize) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(cols + c.len() - 1, cols);
    for j in 0..cols {
        for (i, &ci) in c.iter().enumerate() {
            t[(i + j, j)] = ci;
        }
    }
    t
}

/// Squared distance from `(p, q)` to the nearest pair divisible by `c`,
/// with both sides read homogeneously (a vanishing leading coefficient of
/// `c` stands for a root at infinity).
fn shared_factor_objective(p: &DVector<f64>, q: &DVector<f64>, c: &[f64]) -> f64 {
    let t = factor_matrix(c, p.len() + 1 - c.len());
    residual(&t, p).powi(2) + residual(&t, q).powi(2)
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// Compass search from `x` with initial step `step`.
fn compass_search(f: impl Fn(f64, f64) -> f64, mut x: (f64, f64), mut step: f64) -> f64 {
    let mut fx = f(x.0, x.1);
    while step > 1e-11 {
        let mut moved = false;
        for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let y = (x.0 + dx * step, x.1 + dy * step);
            let fy = f(y.0, y.1);
            if fy < fx {
                x = y;
                fx = fy;
                moved = true;
                break;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    fx
}

/// Smallest squared distance over real linear factors `cos θ · z − sin θ`.
fn best_linear(p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    let f = |th: f64| shared_factor_objective(p, q, &[-th.sin(), th.cos()]);
    let grid = 3600;
    let step = std::f64::consts::PI / grid as f64;
    let vals: Vec<f64> = (0..grid).map(|i| f(i as f64 * step)).collect();
    let mut best = f64::INFINITY;
    for i in 0..grid {
        let prev = vals[(i + grid - 1) % grid];
        let next = vals[(i + 1) % grid];
        if vals[i] <= prev && vals[i] <= next {
            let th = i as f64 * step;
            best = best.min(vals[i]).min(golden_section(f, th - step, th + step));
        }
    }
    best
}

/// Smallest squared distance over real quadratic factors, parametrized by
/// spherical angles of their coefficient vector.
fn best_quadratic(p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    let f = |phi: f64, psi: f64| {
        let c = [phi.sin() * psi.cos(), phi.sin() * psi.sin(), phi.cos()];
        shared_factor_objective(p, q, &c)
    };
    let (np, ns) = (120, 240);
    let dphi = std::f64::consts::PI / np as f64;
    let dpsi = 2.0 * std::f64::consts::PI / ns as f64;
    let at = |i: usize, j: usize| (i as f64 * dphi, j as f64 * dpsi);
    let vals: Vec<Vec<f64>> = (0..=np).map(|i| (0..ns).map(|j| f(at(i, j).0, at(i, j).1)).collect()).collect();
    let mut best = f64::INFINITY;
    for i in 0..=np {
        for j in 0..ns {
            let v = vals[i][j];
            let nb = [
                vals[i.saturating_sub(1)][j],
                vals[(i + 1).min(np)][j],
                vals[i][(j + ns - 1) % ns],
                vals[i][(j + 1) % ns],
            ];
            if nb.iter().all(|&x| v <= x) {
                best = best.min(compass_search(f, at(i, j), dphi));
            }
        }
    }
    best
}

/// Smallest coefficient distance from a scalar pair to a pair with a common
/// root anywhere in the extended complex plane, by direct minimization over
/// the shared real linear or quadratic factor. Both inputs are ascending and
/// zero-padded to the same length.
pub fn siso_common_root_distance(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    let p = DVector::from_column_slice(p);
    let q = DVector::from_column_slice(q);
    let mut best = best_linear(&p, &q);
    if p.len() >= 3 {
        best = best.min(best_quadratic(&p, &q));
    }
    best.sqrt()
}
