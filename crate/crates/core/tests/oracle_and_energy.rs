use symparc::fput::{
    energy_breakdown, experiment_energy, fput_system, paper_initial_state, FputParams,
};
use symparc::scheme::SchemeSpec;
use symparc::system::harmonic_oscillator;
use symparc::{reference_solve, PhaseState, StageSolveConfig, SolverMode};

#[test]
fn reference_conserves_fput_energy() {
    let params = FputParams::new(3, 50.0).unwrap();
    let sys = fput_system(params).unwrap();
    let x0 = paper_initial_state(&params);
    let x1 = reference_solve(&sys, &x0, 1.0, 1e-12).unwrap();
    let h0 = energy_breakdown(&params, &x0).unwrap().hamiltonian;
    let h1 = energy_breakdown(&params, &x1).unwrap().hamiltonian;
    assert!((h1 - h0).abs() < 1e-10, "{:e}", h1 - h0);
    assert!((x1.t - 1.0).abs() < 1e-15);
}

#[test]
fn reference_matches_harmonic_closed_form() {
    let omega = 10.0;
    let sys = harmonic_oscillator(omega);
    let x0 = PhaseState::new(vec![1.0], vec![0.0], 0.0).unwrap();
    let x1 = reference_solve(&sys, &x0, 1.0, 1e-12).unwrap();
    assert!((x1.q[0] - omega.cos()).abs() < 1e-12);
    assert!((x1.p[0] + omega * omega.sin()).abs() < 1e-11 * omega);
}

#[test]
fn p_stable_schemes_show_no_energy_drift() {
    let params = FputParams::default();
    for name in ["lgl4", "lgl6"] {
        let spec: SchemeSpec = name.parse().unwrap();
        let cfg = StageSolveConfig::default().with_mode(SolverMode::LinearlyImplicit);
        let mut stepper = spec.stepper(cfg).unwrap();
        let series = experiment_energy(&mut stepper, &params, 0.04, 200.0).unwrap();
        assert_eq!(series.points.len(), 5001);
        let max = series.max_h_err();
        assert!(max > 0.0 && max < 1e-2, "{name}: {max:e}");
        let (first, second) = series.half_maxima();
        assert!(second <= 2.0 * first && first <= 2.0 * second, "{name}: {first:e} {second:e}");
        assert!(series.drift_slope().abs() < 0.1 * max / 200.0, "{name}");
        for p in &series.points {
            assert!((p.total_oscillatory - 1.0).abs() < 0.1, "{name} t={}", p.t);
            assert!(p.oscillatory.iter().all(|&i| i >= 0.0));
        }
    }
}

#[test]
fn halving_the_step_reduces_the_energy_error_off_resonance() {
    let params = FputParams::default();
    let spec: SchemeSpec = "lgl4".parse().unwrap();
    let cfg = StageSolveConfig::default().with_mode(SolverMode::LinearlyImplicit);
    let run = |h: f64| {
        let mut st = spec.stepper(cfg).unwrap();
        experiment_energy(&mut st, &params, h, 20.0).unwrap().max_h_err()
    };
    let (coarse, fine) = (run(0.04), run(0.02));
    assert!(fine < coarse, "{coarse:e} {fine:e}");
}
