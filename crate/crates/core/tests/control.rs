mod common;

use agcd::control::{default_params, left_prime_report, system_distance};
use agcd::numkernel::svd;
use agcd::structmat::{build_resultant, default_window};
use agcd::{distance_to_uncontrollability, is_controllable, IoSystem, MatPoly};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Monic cubic `P` and quadratic `Q` with standard normal coefficients.
fn siso_case(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p: Vec<f64> = (0..3).map(|_| normal(&mut rng)).collect();
    p.push(1.0);
    let mut q: Vec<f64> = (0..3).map(|_| normal(&mut rng)).collect();
    q.push(0.0);
    (p, q)
}

fn siso_system(p: &[f64], q: &[f64]) -> IoSystem {
    IoSystem::new(MatPoly::scalar(p).unwrap(), MatPoly::scalar(&q[..q.len() - 1]).unwrap()).unwrap()
}

fn m2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

/// Two outputs, one input, common left factor `zI + C0`.
fn planted_mimo() -> IoSystem {
    let c = MatPoly::new(vec![m2(0.5, -1.0, 0.3, 0.2), DMatrix::identity(2, 2)]).unwrap();
    let pbar = MatPoly::new(vec![m2(1.0, 0.2, -0.4, 2.0), m2(0.3, 0.0, 0.1, -0.6), DMatrix::identity(2, 2)]).unwrap();
    let qbar = MatPoly::new(vec![
        DMatrix::from_row_slice(2, 1, &[1.0, -1.0]),
        DMatrix::from_row_slice(2, 1, &[0.5, 0.7]),
    ])
    .unwrap();
    IoSystem::new(c.mul(&pbar).unwrap(), c.mul(&qbar).unwrap()).unwrap()
}

fn assert_witness_fails(res: &agcd::control::UncontrollabilityReport, outputs: usize) {
    assert!(!res.witness_report().unwrap().controllable);
    // Left factor of degree one in `outputs` rows: that many tiny singular values.
    let pair = agcd::PolyPair::from_left(&res.p_hat, &res.q_hat).unwrap();
    let n = pair.degree();
    let s = build_resultant(&pair, default_window(n, pair.cols())).unwrap();
    let dec = svd(&s.dense).unwrap();
    let small = dec.singular_values.iter().filter(|&&x| x <= res.tol).count();
    assert!(small >= outputs, "{small} small singular values, tol {:e}", res.tol);
    if let Some(w) = &res.monic_witness {
        assert!(!is_controllable(w, 1e-6).unwrap().controllable);
    }
}

#[test]
fn siso_distance_matches_direct_minimization() {
    for seed in 0..10 {
        let (p, q) = siso_case(seed);
        let oracle = common::siso_common_root_distance(&p, &q);
        let res = distance_to_uncontrollability(&siso_system(&p, &q), &default_params()).unwrap();
        assert!(res.converged, "seed {seed}");
        let rel = (res.distance - oracle).abs() / oracle;
        assert!(rel <= 0.05, "seed {seed}: solver {} oracle {oracle}", res.distance);
        assert_witness_fails(&res, 1);
    }
}

#[test]
fn planted_mimo_is_at_distance_zero() {
    let sys = planted_mimo();
    assert!(!is_controllable(&sys, 1e-8).unwrap().controllable);
    let res = distance_to_uncontrollability(&sys, &default_params()).unwrap();
    assert!(res.converged);
    assert!(res.distance <= 1e-8);
    assert_witness_fails(&res, 2);
}

#[test]
fn perturbed_mimo_witness() {
    let sys = planted_mimo();
    let noisy = IoSystem::new(sys.p().clone(), sys.q().add_noise(0.05, 3).unwrap()).unwrap();
    assert!(is_controllable(&noisy, 1e-8).unwrap().controllable);
    let res = distance_to_uncontrollability(&noisy, &default_params()).unwrap();
    assert!(res.converged);
    assert!(res.distance > 0.0);
    // The planted system is itself uncontrollable, so it bounds the distance.
    assert!(res.distance <= system_distance(&noisy, &sys).unwrap() + 1e-9);
    assert_witness_fails(&res, 2);
}

fn lerp(x: &[f64], y: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| (1.0 - t) * a + t * b).collect()
}

fn scalar_coeffs(m: &MatPoly, len: usize) -> Vec<f64> {
    let mut c: Vec<f64> = m.coeffs().iter().map(|x| x[(0, 0)]).collect();
    c.resize(len, 0.0);
    c
}

// The distance need not shrink monotonically along an arbitrary line toward
// an uncontrollable system, so the solver is compared with the oracle at
// each point instead.
#[test]
fn solver_tracks_oracle_toward_planted_system() {
    let (p, q) = siso_case(42);
    // Common root at 0.6.
    let pu = common::poly_from_roots(&[0.6, -1.1, 0.4]);
    let mut qu: Vec<f64> = common::poly_from_roots(&[0.6, 2.0]).iter().map(|c| 0.8 * c).collect();
    qu.push(0.0);
    for i in 0..5 {
        let t = i as f64 / 4.0;
        let (pt, qt) = (lerp(&p, &pu, t), lerp(&q, &qu, t));
        let res = distance_to_uncontrollability(&siso_system(&pt, &qt), &default_params()).unwrap();
        assert!(res.converged, "t = {t}");
        if i == 4 {
            assert!(res.distance <= 1e-8, "planted end: {}", res.distance);
            continue;
        }
        let oracle = common::siso_common_root_distance(&pt, &qt);
        let rel = (res.distance - oracle).abs() / oracle;
        assert!(rel <= 0.05, "t = {t}: solver {} oracle {oracle}", res.distance);
    }
}

// Moving toward the nearest uncontrollable system shrinks the distance
// linearly.
#[test]
fn distance_is_linear_toward_nearest_witness() {
    let (p, q) = siso_case(42);
    let res = distance_to_uncontrollability(&siso_system(&p, &q), &default_params()).unwrap();
    let ph = scalar_coeffs(&res.p_hat, p.len());
    let qh = scalar_coeffs(&res.q_hat, q.len());
    for t in [0.25, 0.5, 0.75] {
        let oracle = common::siso_common_root_distance(&lerp(&p, &ph, t), &lerp(&q, &qh, t));
        let expected = (1.0 - t) * res.distance;
        assert!((oracle - expected).abs() <= 0.05 * expected, "t = {t}: oracle {oracle}, expected {expected}");
    }
}

#[test]
fn siso_fixture_is_controllable() {
    let sys: IoSystem = serde_json::from_str(include_str!("fixtures/siso_system.json")).unwrap();
    let rep = is_controllable(&sys, 1e-8).unwrap();
    assert!(rep.controllable);
    assert!(rep.margin > 1e-3);
}

#[test]
fn constant_pair_rank_test() {
    let p = MatPoly::constant(DMatrix::identity(2, 2)).unwrap();
    let q = MatPoly::constant(DMatrix::zeros(2, 1)).unwrap();
    assert!(left_prime_report(&p, &q, 1e-8).unwrap().controllable);
}
