//! Controllability of input/output systems `P(σ) y = Q(σ) u` and their
//! distance to the set of uncontrollable systems.
//!
//! A system is controllable iff `R = [Q  −P]` is left prime, i.e. `P` and `Q`
//! have no nontrivial common left factor. Transposing turns left factors
//! into right factors, so every test runs on the pair `(Pᵀ, Qᵀ)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matpoly::{dist, MatPoly, PolyPair};
use crate::numkernel::svd;
use crate::odegcd::{agcd_ode, OdeParams};
use crate::structmat::{build_resultant, default_window};

/// Tolerance on `‖P_lead − I‖_max` for accepting `P` as monic.
const MONIC_TOL: f64 = 1e-12;

/// Continuation runs used by [`default_params`].
pub const UNCONTROLLABILITY_STARTS: usize = 8;

/// Solver defaults for [`distance_to_uncontrollability`]: the distance is a
/// global quantity, so several starts are used.
pub fn default_params() -> OdeParams {
    OdeParams {
        starts: UNCONTROLLABILITY_STARTS,
        ..OdeParams::default()
    }
}

/// An input/output system with monic `P` (`p×p`) and `Q` (`p×m`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IoSystem {
    p: MatPoly,
    q: MatPoly,
}

impl IoSystem {
    pub fn new(p: MatPoly, q: MatPoly) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::Dimension(format!("P must be square, got {}×{}", p.rows(), p.cols())));
        }
        if p.rows() != q.rows() {
            return Err(Error::Dimension(format!(
                "P has {} rows but Q has {}",
                p.rows(),
                q.rows()
            )));
        }
        let dev = (p.leading() - DMatrix::identity(p.rows(), p.cols())).amax();
        if dev > MONIC_TOL {
            return Err(Error::Parameter(format!(
                "P must be monic (leading coefficient deviates from identity by {dev:e})"
            )));
        }
        Ok(IoSystem { p, q })
    }

    pub fn p(&self) -> &MatPoly {
        &self.p
    }

    pub fn q(&self) -> &MatPoly {
        &self.q
    }

    pub fn outputs(&self) -> usize {
        self.p.rows()
    }

    pub fn inputs(&self) -> usize {
        self.q.cols()
    }

    /// `(Pᵀ, Qᵀ)`, whose common right factors are the common left factors
    /// of `(P, Q)`.
    pub fn transposed_pair(&self) -> PolyPair {
        PolyPair::from_left(&self.p, &self.q).expect("row counts checked at construction")
    }
}

#[derive(Deserialize)]
struct IoSystemRepr {
    p: MatPoly,
    q: MatPoly,
}

impl<'de> Deserialize<'de> for IoSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = IoSystemRepr::deserialize(d)?;
        IoSystem::new(r.p, r.q).map_err(D::Error::custom)
    }
}

/// Result of the left-primeness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityReport {
    pub controllable: bool,
    /// `σ_min / σ_max` of the resultant of `(Pᵀ, Qᵀ)`.
    pub margin: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Left-primeness test for an arbitrary pair `(P, Q)` with equal row
/// counts; `P` need not be monic.
pub fn left_prime_report(p: &MatPoly, q: &MatPoly, rank_tol: f64) -> Result<ControllabilityReport> {
    let pair = PolyPair::from_left(p, q)?;
    let n = pair.degree();
    if n == 0 {
        // Constant P and Q: left prime iff [P Q] has full row rank.
        let mut r = DMatrix::zeros(p.rows(), p.cols() + q.cols());
        r.view_mut((0, 0), (p.rows(), p.cols())).copy_from(&p.coeff(0));
        r.view_mut((0, p.cols()), (q.rows(), q.cols())).copy_from(&q.coeff(0));
        return Ok(report_from(&r.transpose(), rank_tol)?);
    }
    let s = build_resultant(&pair, default_window(n, pair.cols()))?;
    report_from(&s.dense, rank_tol)
}

fn report_from(m: &DMatrix<f64>, rank_tol: f64) -> Result<ControllabilityReport> {
    let dec = svd(m)?;
    let sigma_max = dec.sigma_max();
    let sigma_min = if m.nrows() < m.ncols() {
        0.0
    } else {
        dec.singular_values[dec.singular_values.len() - 1]
    };
    let margin = if sigma_max > 0.0 { sigma_min / sigma_max } else { 0.0 };
    Ok(ControllabilityReport {
        controllable: margin > rank_tol,
        margin,
        sigma_min,
        sigma_max,
    })
}

/// Controllable iff the smallest singular value of the resultant of
/// `(Pᵀ, Qᵀ)` exceeds `rank_tol · σ_max`.
pub fn is_controllable(sys: &IoSystem, rank_tol: f64) -> Result<ControllabilityReport> {
    left_prime_report(&sys.p, &sys.q, rank_tol)
}

/// Nearest uncontrollable system found by the gradient-flow solver.
///
/// The distance is an upper bound on the true infimum: the solver searches
/// perturbations admitting a common left factor of degree one, and the
/// extracted factor is normalized to be monic.
#[derive(Debug, Clone, Serialize)]
pub struct UncontrollabilityReport {
    /// Coefficient distance `‖[P Q] − [P̂ Q̂]‖`.
    pub distance: f64,
    pub p_hat: MatPoly,
    pub q_hat: MatPoly,
    /// `(P̂_lead⁻¹ P̂, P̂_lead⁻¹ Q̂)`, when `P̂` has an invertible leading
    /// coefficient.
    pub monic_witness: Option<IoSystem>,
    /// Distance from the input to the monic witness.
    pub monic_distance: Option<f64>,
    pub epsilon: f64,
    /// Absolute zero tolerance the solver drove `σ_p` below.
    pub tol: f64,
    pub converged: bool,
}

impl UncontrollabilityReport {
    /// Left-primeness test of `(P̂, Q̂)` against the solver's zero tolerance:
    /// uncontrollable iff the smallest singular value of its resultant is
    /// at most `tol`.
    pub fn witness_report(&self) -> Result<ControllabilityReport> {
        let mut rep = left_prime_report(&self.p_hat, &self.q_hat, 0.0)?;
        rep.controllable = rep.sigma_min > self.tol;
        Ok(rep)
    }
}

/// Perturbs `P` and `Q` minimally until they share a left factor of degree
/// one. `Q` is zero-padded to the degree of `P` (its padded coefficients may
/// be perturbed).
pub fn distance_to_uncontrollability(sys: &IoSystem, params: &OdeParams) -> Result<UncontrollabilityReport> {
    let pair = sys.transposed_pair();
    if pair.degree() == 0 {
        return Err(Error::Parameter("system of degree zero has no degree-one factor".into()));
    }
    let (res, _) = agcd_ode(&pair, 1, params)?;
    let p_hat = res.a_hat.transpose();
    let q_hat = res.b_hat.transpose();
    let (monic_witness, monic_distance) = match p_hat.padded(sys.p.degree()).last() {
        Some(lead) => match lead.clone().try_inverse() {
            Some(inv) if p_hat.degree() == sys.p.degree() => {
                let pm = p_hat.left_mul_const(&inv)?;
                let qm = q_hat.left_mul_const(&inv)?;
                match IoSystem::new(pm.monic_normalize()?, qm) {
                    Ok(w) => {
                        let dm = system_distance(sys, &w)?;
                        (Some(w), Some(dm))
                    }
                    Err(_) => (None, None),
                }
            }
            _ => (None, None),
        },
        None => (None, None),
    };
    Ok(UncontrollabilityReport {
        distance: res.coeff_distance,
        p_hat,
        q_hat,
        monic_witness,
        monic_distance,
        epsilon: res.epsilon,
        tol: res.tol,
        converged: res.converged,
    })
}

/// `‖[P Q] − [P' Q']‖` over all coefficients.
pub fn system_distance(x: &IoSystem, y: &IoSystem) -> Result<f64> {
    dist(&x.transposed_pair(), &y.transposed_pair())
}
