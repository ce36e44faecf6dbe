#![allow(dead_code)]

pub mod golden;

use nalgebra::DMatrix;
use symparc::fput::{fput_system, paper_initial_state, FputParams};
use symparc::scheme::SchemeSpec;
use symparc::{PhaseState, SolverMode, StageSolveConfig};

/// `max |DΦᵀ J DΦ − J|` for one step of `spec` on FPUT, with `DΦ` from
/// central differences.
pub fn symplectic_residual(spec: &SchemeSpec, omega: f64, h: f64) -> f64 {
    let params = FputParams::new(3, omega).unwrap();
    let sys = fput_system(params).unwrap();
    let x0 = paper_initial_state(&params);
    let d = x0.dim();
    let cfg = StageSolveConfig::default()
        .with_mode(SolverMode::LinearlyImplicit)
        .with_tolerance(1e-15);
    let mut stepper = spec.stepper(StageSolveConfig { max_iterations: 200, ..cfg }).unwrap();
    let mut flow = |z: &[f64]| -> Vec<f64> {
        let st = PhaseState::new(z[..d].to_vec(), z[d..].to_vec(), 0.0).unwrap();
        let out = stepper.step(&sys, &st, h).unwrap().state;
        out.q.into_iter().chain(out.p).collect()
    };
    let z0: Vec<f64> = x0.q.iter().chain(&x0.p).copied().collect();
    let n = 2 * d;
    let eps = 1e-6;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let mut zp = z0.clone();
        let mut zm = z0.clone();
        zp[k] += eps;
        zm[k] -= eps;
        let (fp, fm) = (flow(&zp), flow(&zm));
        for i in 0..n {
            jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * eps);
        }
    }
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..d {
        j[(i, d + i)] = 1.0;
        j[(d + i, i)] = -1.0;
    }
    (jac.transpose() * &j * &jac - &j).amax()
}
