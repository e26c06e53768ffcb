//! Property tests for the coordinate transforms and the piecewise-linear
//! structure of the fluid dynamics.

use nalgebra::Vector3;
use proptest::prelude::*;

use ondemand::fluid::rhs_unbounded;
use ondemand::params::ModelParams;
use ondemand::stability::SwitchedPair;
use ondemand::state::{FluidState, SimState};

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (
        0.01_f64..10.0,
        1_u64..10_000,
        0.0_f64..0.99,
        0.01_f64..10.0,
        0.01_f64..10.0,
        0.0_f64..10.0,
        0.0_f64..10.0,
        (0.01_f64..10.0, 0.01_f64..10.0),
    )
        .prop_map(
            |(lambda, r, alpha, beta, mu, delta, theta, (gamma, epsilon))| ModelParams {
                lambda,
                r,
                alpha,
                beta,
                mu,
                delta,
                theta,
                gamma,
                epsilon,
            },
        )
}

proptest! {
    #[test]
    fn centering_round_trips(
        p in params_strategy(),
        pending in 0_i64..2_000_000,
        queue_diff in -1_000_000_i64..1_000_000,
        in_service in 0_i64..2_000_000,
    ) {
        prop_assert!(p.validate().is_ok());
        let s = SimState::new(pending, queue_diff, in_service);
        let (x, y, v) = s.to_centered(&p).to_raw(&p);
        let scale = 1.0 + p.operating_point().pending.abs() + pending.abs() as f64
            + queue_diff.abs() as f64 + s.agents_in_system().abs() as f64;
        prop_assert!((x - pending as f64).abs() < 1e-12 * scale);
        prop_assert!((y - queue_diff as f64).abs() < 1e-12 * scale);
        prop_assert!((v - s.agents_in_system() as f64).abs() < 1e-12 * scale);
    }

    #[test]
    fn zero_pending_maps_to_floor(
        p in params_strategy(),
        queue_diff in -1_000_000_i64..1_000_000,
        in_service in 0_i64..2_000_000,
    ) {
        let s = SimState::new(0, queue_diff, in_service);
        let c = s.to_centered(&p);
        // Both sides compute lambda (1 - alpha) / beta the same way, so the
        // match is exact.
        prop_assert_eq!(c.pending, p.centered_floor());
    }

    #[test]
    fn regime_difference_has_rank_one(p in params_strategy()) {
        let pair = SwitchedPair::from_params(&p);
        prop_assert!(pair.difference_rank() <= 1);
        // The difference column vanishes only on a measure-zero parameter
        // set; random draws must land on rank one.
        prop_assert_eq!(pair.difference_rank(), 1);
    }

    #[test]
    fn rhs_matches_regime_matrix_action(
        p in params_strategy(),
        x in -10.0_f64..10.0,
        y in -10.0_f64..10.0,
        v in -10.0_f64..10.0,
    ) {
        let pair = SwitchedPair::from_params(&p);
        let s = FluidState::new(x, y, v);
        let d = rhs_unbounded(&s, &p);
        let matrix = if y >= 0.0 { &pair.surplus } else { &pair.deficit };
        let expect = matrix * Vector3::new(x, y, v);
        let scale = 1.0 + expect.amax();
        prop_assert!((d.pending - expect[0]).abs() < 1e-12 * scale);
        prop_assert!((d.queue_diff - expect[1]).abs() < 1e-12 * scale);
        prop_assert!((d.agents - expect[2]).abs() < 1e-12 * scale);
    }
}
