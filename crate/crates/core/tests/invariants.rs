use proptest::prelude::*;
use squeeze_core::{
    build_cycle, compose, cop, cycle_ledger, rotation, squeeze_map, steady_state, BathModel, ColdCoupling, Covar2,
    GaussChannel, MachineParams, Mat2, OscillatorParams, Phase,
};

fn model() -> impl Strategy<Value = BathModel> {
    prop_oneof![Just(BathModel::IndependentOscillator), Just(BathModel::Rwa)]
}

prop_compose! {
    fn machine()(
        model in model(),
        log_q in 3.0f64..7.0,
        log_wt in -4.0f64..-1.0,
        log_eps in -10.0f64..-0.5,
        log_nh in 2.0f64..6.0,
        ratio in 0.1f64..0.99,
        log_mu in -1.0f64..2.0,
    ) -> MachineParams {
        let omega_m = 1e6;
        MachineParams {
            osc: OscillatorParams::from_quality(omega_m, 10f64.powf(log_q)).unwrap(),
            n_h: 10f64.powf(log_nh),
            n_c: ratio * 10f64.powf(log_nh),
            epsilon: ColdCoupling::new(10f64.powf(log_eps)).unwrap(),
            mu: 10f64.powf(log_mu),
            tau: 10f64.powf(log_wt) / omega_m,
            model,
        }
    }
}

prop_compose! {
    fn covariance()(a in 0.1f64..10.0, b in -3.0f64..3.0, c in 0.1f64..10.0) -> Covar2 {
        Covar2::new(a * a, a * b, b * b + c * c)
    }
}

prop_compose! {
    fn channel()(m in prop::array::uniform4(-2.0f64..2.0), n in covariance()) -> GaussChannel {
        GaussChannel::new(Mat2::new(m[0], m[1], m[2], m[3]), n)
    }
}

proptest! {
    #[test]
    fn homogeneous_determinant_tracks_losses(p in machine()) {
        let c = build_cycle(&p).unwrap();
        let keep = 1.0 - p.epsilon.epsilon();
        let expected = keep * keep * (-p.osc.gamma * p.tau).exp();
        prop_assert!((c.m_hom.det() - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn added_noise_is_positive_semidefinite(p in machine()) {
        let v = build_cycle(&p).unwrap().v_add;
        prop_assert!(v.is_positive_semidefinite(), "{v:?}");
    }

    #[test]
    fn steady_state_is_a_fixed_point(p in machine()) {
        let c = build_cycle(&p).unwrap();
        let ss = steady_state(&p).unwrap();
        let next = c.full().apply(&ss.v_ss);
        prop_assert!((next - ss.v_ss).max_abs() <= 1e-8 * ss.v_ss.max_abs());
    }

    #[test]
    fn ledger_closes(p in machine()) {
        if let Ok(l) = cycle_ledger(&p) {
            prop_assert!(l.closure_error() <= 1e-9 * l.flow_scale());
        }
    }

    #[test]
    fn cop_respects_carnot(p in machine()) {
        if let Ok(l) = cycle_ledger(&p) {
            match cop(&l, &p) {
                Ok(r) => prop_assert!(r.within_bound, "{r:?}"),
                Err(_) => prop_assert_eq!(l.phase, Phase::Trivial),
            }
        }
    }

    #[test]
    fn rwa_never_runs_engine_or_fridge(p in machine()) {
        let p = p.with_model(BathModel::Rwa);
        let l = cycle_ledger(&p).unwrap();
        prop_assert!(!matches!(l.phase, Phase::Engine | Phase::Fridge), "{l:?}");
    }

    #[test]
    fn squeezers_and_rotations_are_symplectic(mu in 1e-2f64..1e2, theta in -10.0f64..10.0) {
        prop_assert!((squeeze_map(mu).unwrap().det() - 1.0).abs() <= 1e-12);
        prop_assert!((rotation(theta).det() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rotations_preserve_thermal_states(n in 0.0f64..1e4, theta in -10.0f64..10.0) {
        let v = Covar2::thermal(n);
        let out = GaussChannel::unitary(rotation(theta)).apply(&v);
        prop_assert!((out - v).max_abs() <= 1e-12 * v.max_abs());
    }

    #[test]
    fn composition_matches_sequential_application(a in channel(), b in channel(), v in covariance()) {
        let seq = a.apply(&b.apply(&v));
        let once = compose(&a, &b).apply(&v);
        prop_assert!((seq - once).max_abs() <= 1e-10 * seq.max_abs().max(1.0));
    }
}
