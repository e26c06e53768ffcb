//! Randomized cross-checks of the stability module against independent
//! numeric routes: characteristic coefficients against closed forms, the
//! closed-form pencil cubic against a numeric determinant, Hurwitz
//! closed forms against Routh–Hurwitz, and the cubic eigenvalue solver
//! against a determinant sign-change scan.

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ondemand::cubic::CubicCoeffs;
use ondemand::params::ModelParams;
use ondemand::stability::{
    characteristic_cubic, condition_i, condition_ii, cqlf_exists, deficit_hurwitz_condition,
    pencil_cubic, surplus_inverse, CqlfVerdict, SwitchedPair,
};

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}

/// Random valid parameters: rates log-uniform in [0.01, 10], alpha uniform
/// in [0, 0.99].
fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams {
        lambda: log_uniform(rng, 0.01, 10.0),
        r: 1,
        alpha: rng.random::<f64>() * 0.99,
        beta: log_uniform(rng, 0.01, 10.0),
        mu: log_uniform(rng, 0.01, 10.0),
        delta: log_uniform(rng, 0.01, 10.0),
        theta: log_uniform(rng, 0.01, 10.0),
        gamma: log_uniform(rng, 0.01, 10.0),
        epsilon: log_uniform(rng, 0.01, 10.0),
    }
    .validated()
    .unwrap()
}

/// Closed-form characteristic coefficients of the two regimes.
fn surplus_char_closed(p: &ModelParams) -> CubicCoeffs {
    CubicCoeffs::new(
        1.0,
        p.beta * p.gamma + p.mu + p.theta,
        p.beta * p.epsilon + p.beta * p.gamma * p.mu + p.mu * p.theta,
        p.beta * p.epsilon * p.mu,
    )
}

fn deficit_char_closed(p: &ModelParams) -> CubicCoeffs {
    CubicCoeffs::new(
        1.0,
        p.beta * p.gamma + p.mu * (1.0 - p.alpha) + p.delta,
        p.beta * p.epsilon + p.beta * p.gamma * p.mu + p.delta * p.mu * (1.0 - p.alpha),
        p.beta * p.epsilon * p.mu,
    )
}

fn assert_close(a: f64, b: f64, rel: f64, what: &str) {
    let scale = 1.0_f64.max(a.abs()).max(b.abs());
    assert!(
        (a - b).abs() <= rel * scale,
        "{what}: {a} vs {b} (rel {})",
        (a - b).abs() / scale
    );
}

#[test]
fn characteristic_coefficients_match_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for _ in 0..10_000 {
        let p = random_params(&mut rng);
        let pair = SwitchedPair::from_params(&p);
        let (num_s, cf_s) = (characteristic_cubic(&pair.surplus), surplus_char_closed(&p));
        let (num_d, cf_d) = (characteristic_cubic(&pair.deficit), deficit_char_closed(&p));
        for (num, cf) in [(num_s, cf_s), (num_d, cf_d)] {
            assert_close(num.a1, cf.a1, 1e-10, "a1");
            assert_close(num.a2, cf.a2, 1e-10, "a2");
            assert_close(num.a3, cf.a3, 1e-10, "a3");
        }
    }
}

#[test]
fn pencil_cubic_matches_numeric_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let pair = SwitchedPair::from_params(&p);
        let closed = pencil_cubic(&p);
        let inv = pair
            .surplus
            .try_inverse()
            .expect("surplus regime matrix is nonsingular");
        for _ in 0..20 {
            let tau = rng.random::<f64>() * 100.0;
            let numeric =
                (inv + pair.deficit * tau).determinant() * (-p.beta * p.epsilon * p.mu);
            let value = closed.eval(tau);
            // Conditioning scale of the polynomial evaluation; the two routes
            // must agree relative to it.
            let scale = closed.a0.abs() * tau.powi(3)
                + closed.a1.abs() * tau * tau
                + closed.a2.abs() * tau
                + closed.a3.abs();
            assert!(
                (numeric - value).abs() <= 1e-8 * scale,
                "pencil mismatch at tau = {tau}: closed {value}, numeric {numeric}, scale {scale}"
            );
        }
    }
}

#[test]
fn closed_form_inverse_matches_numeric() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    for _ in 0..2000 {
        let p = random_params(&mut rng);
        let pair = SwitchedPair::from_params(&p);
        let product = pair.surplus * surplus_inverse(&p);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (product[(i, j)] - expect).abs() < 1e-8,
                    "inverse defect at ({i},{j}): {}",
                    product[(i, j)]
                );
            }
        }
    }
}

#[test]
fn surplus_always_hurwitz_and_deficit_closed_form_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    for _ in 0..10_000 {
        let p = random_params(&mut rng);
        let pair = SwitchedPair::from_params(&p);
        assert!(
            characteristic_cubic(&pair.surplus).is_hurwitz().unwrap(),
            "surplus regime must be Hurwitz: {p:?}"
        );
        let rh = characteristic_cubic(&pair.deficit).is_hurwitz().unwrap();
        let cf = deficit_hurwitz_condition(&p);
        assert_eq!(rh, cf, "deficit Hurwitz disagreement: {p:?}");
    }
}

#[test]
fn gain_conditions_imply_cqlf_and_positive_pencil() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut satisfied_draws = 0usize;
    for _ in 0..10_000 {
        let p = random_params(&mut rng);
        if !(condition_i(&p).satisfied || condition_ii(&p).satisfied) {
            continue;
        }
        satisfied_draws += 1;
        let pair = SwitchedPair::from_params(&p);
        assert_eq!(
            cqlf_exists(&pair),
            CqlfVerdict::Exists,
            "sufficient condition held but CQLF missing: {p:?}"
        );
        let poly = pencil_cubic(&p);
        for k in 0..20 {
            let tau = k as f64 * 5.0;
            assert!(
                poly.eval(tau) > 0.0,
                "pencil cubic not positive at tau = {tau}: {p:?}"
            );
        }
    }
    assert!(
        satisfied_draws > 100,
        "draw distribution degenerate: only {satisfied_draws} stable draws"
    );
}

#[test]
fn gamma_above_ratio_bound_makes_deficit_hurwitz() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    for _ in 0..5000 {
        let mut p = random_params(&mut rng);
        let bound = (p.alpha * p.mu - p.delta) / p.beta;
        if p.gamma <= bound {
            p.gamma = bound + log_uniform(&mut rng, 0.01, 10.0);
        }
        assert!(deficit_hurwitz_condition(&p), "{p:?}");
    }
}

/// Real eigenvalues of the regime product located by the closed-form cubic
/// solver, cross-checked against a sign-change scan of `det(M - s I)` over
/// `[-S, 0)` with `S = 10 ||M||_inf`.
#[test]
fn product_eigenvalues_agree_with_determinant_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut negatives_seen = 0usize;
    for _ in 0..400 {
        let p = random_params(&mut rng);
        let pair = SwitchedPair::from_params(&p);
        let product = pair.surplus * pair.deficit;
        let inf_norm: f64 = (0..3)
            .map(|i| (0..3).map(|j| product[(i, j)].abs()).sum::<f64>())
            .fold(0.0_f64, f64::max);
        let span = 10.0 * inf_norm;

        let det_at = |s: f64| (product - Matrix3::identity() * s).determinant();
        // Bracket sign changes on a fine grid, then bisect.
        let grid = 20_000usize;
        let mut scan_roots = Vec::new();
        let mut prev_s = -span;
        let mut prev_f = det_at(prev_s);
        for k in 1..=grid {
            let s = -span + span * (k as f64) / (grid as f64) - 1e-12;
            let f = det_at(s);
            if prev_f == 0.0 {
                scan_roots.push(prev_s);
            } else if prev_f.signum() != f.signum() {
                let (mut lo, mut hi) = (prev_s, s);
                let (mut flo, _) = (prev_f, f);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let fmid = det_at(mid);
                    if fmid == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if flo.signum() != fmid.signum() {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fmid;
                    }
                }
                scan_roots.push(0.5 * (lo + hi));
            }
            prev_s = s;
            prev_f = f;
        }

        let cubic_negatives: Vec<f64> = characteristic_cubic(&product)
            .real_roots()
            .into_iter()
            .filter(|root| (-span..0.0).contains(root))
            .collect();
        negatives_seen += cubic_negatives.len();

        for root in &scan_roots {
            assert!(
                cubic_negatives.iter().any(|c| (c - root).abs() < 1e-6),
                "scan root {root} unmatched by cubic solver (cubic: {cubic_negatives:?})"
            );
        }
        for root in &cubic_negatives {
            assert!(
                scan_roots.iter().any(|s| (s - root).abs() < 1e-6),
                "cubic root {root} unmatched by scan (scan: {scan_roots:?})"
            );
        }
    }
    assert!(
        negatives_seen > 20,
        "scan exercised too few negative eigenvalues ({negatives_seen})"
    );
}
