use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde_json::json;
use symparc::fput::{
    experiment_energy_with_stride, experiment_order_reduction,
    experiment_resonance_sweep, fput_system, paper_initial_state, sweep_grid, FputParams,
};
use symparc::scheme::SchemeSpec;
use symparc::stability::stability_intervals;
use symparc::system::{free_particle, harmonic_oscillator};
use symparc::{
    build_scheme, integrate_with, verify_order_conditions, IntegrateOptions, PhaseState,
    ReferenceOptions, SplitForceSystem, StageSolveConfig,
};

use crate::args::{
    Common, ConvergeArgs, EnergyArgs, Format, FputCommand, IntegrateArgs, Problem, ReductionArgs,
    StabilityArgs, SweepArgs, TableauArgs,
};

pub type CmdResult = Result<(), Box<dyn std::error::Error>>;

fn open_out(common: &Common) -> io::Result<Box<dyn Write>> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(common: &Common, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CmdResult {
    let mut w = open_out(common)?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn emit_json(common: &Common, value: &serde_json::Value) -> CmdResult {
    emit(common, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn stage_config(common: &Common, sys: Option<&SplitForceSystem>) -> StageSolveConfig {
    let base = match sys {
        Some(sys) => StageSolveConfig::for_system(sys),
        // FPUT always has a linear fast force
        None => StageSolveConfig::default().with_mode(symparc::SolverMode::LinearlyImplicit),
    };
    let cfg = base.with_tolerance(common.tol);
    match common.solver {
        Some(s) => cfg.with_mode(s.into()),
        None => cfg,
    }
}

pub fn tableau(common: &Common, args: &TableauArgs) -> CmdResult {
    let scheme = match args.scheme {
        Some(spec) => spec.ark_scheme()?,
        None => build_scheme(args.s1, args.variant.into())?,
    };
    let mut value = serde_json::to_value(scheme.to_json())?;
    if args.verify {
        let report = verify_order_conditions(&scheme);
        value = json!({ "scheme": value, "order_conditions": report });
        if !report.pass {
            emit_json(common, &value)?;
            return Err(format!("order conditions fail (max residual {:e})", report.max_residual()).into());
        }
    }
    emit_json(common, &value)
}

pub fn stability(common: &Common, args: &StabilityArgs) -> CmdResult {
    let report = stability_intervals(&args.scheme.ark_scheme()?, args.mu_max)?;
    let stride = args.stride as usize;
    let write_json = |w: &mut dyn Write| -> io::Result<()> {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)
    };
    let write_csv = |w: &mut dyn Write| report.write_csv(w, stride);
    match common.format {
        Format::Csv => emit(common, write_csv)?,
        Format::Json => emit(common, write_json)?,
    }
    if let Some(path) = &args.companion {
        let mut w = BufWriter::new(File::create(path)?);
        match common.format {
            Format::Csv => write_json(&mut w)?,
            Format::Json => write_csv(&mut w)?,
        }
        w.flush()?;
    }
    eprintln!(
        "{}: p_stable={} intervals={} resonances={}",
        report.scheme,
        report.p_stable,
        report.intervals.len(),
        report.resonances.len()
    );
    Ok(())
}

fn build_problem(args: &IntegrateArgs) -> Result<(SplitForceSystem, PhaseState), Box<dyn std::error::Error>> {
    Ok(match args.problem {
        Problem::Fput => {
            let params = FputParams::new(args.ell, args.omega)?;
            (fput_system(params)?, paper_initial_state(&params))
        }
        Problem::Harmonic => (harmonic_oscillator(args.omega), PhaseState::new(vec![1.0], vec![0.0], 0.0)?),
        Problem::Free => {
            let d = args.ell.max(1);
            (free_particle(d), PhaseState::new(vec![0.0; d], vec![1.0; d], 0.0)?)
        }
    })
}

fn step_count(h: f64, t_end: f64) -> Result<usize, String> {
    let n = t_end / h;
    if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
        return Err(format!("t_end = {t_end} is not a multiple of h = {h}"));
    }
    Ok(n.round() as usize)
}

pub fn integrate(common: &Common, args: &IntegrateArgs) -> CmdResult {
    let (sys, state0) = build_problem(args)?;
    let n = step_count(args.h, args.t_end)?;
    let mut stepper = args.scheme.stepper(stage_config(common, Some(&sys)))?;
    let opts = IntegrateOptions {
        n_steps: n,
        stride: args.stride as usize,
    };
    let traj = integrate_with(&mut stepper, &sys, &state0, args.h, opts, |_, _| {})?;
    match common.format {
        Format::Csv => emit(common, |w| traj.write_csv(w))?,
        Format::Json => {
            let states: Vec<_> = traj
                .states
                .iter()
                .zip(&traj.stage_iterations)
                .map(|(s, it)| json!({ "t": s.t, "q": s.q, "p": s.p, "stage_iters": it }))
                .collect();
            emit_json(
                common,
                &json!({ "scheme": args.scheme, "h": args.h, "stride": args.stride, "states": states }),
            )?;
        }
    }
    let last = traj.last();
    let h_err = match (sys.hamiltonian(&state0), sys.hamiltonian(last)) {
        (Some(a), Some(b)) => format!("{:e}", (b - a).abs()),
        _ => "n/a".into(),
    };
    eprintln!(
        "{}: steps={n} t={} H_err={h_err} q={:?} p={:?}",
        args.scheme, last.t, last.q, last.p
    );
    Ok(())
}

pub fn fput(common: &Common, cmd: &FputCommand) -> CmdResult {
    match cmd {
        FputCommand::Energy(a) => energy(common, a, (50.0, 0.04, 200.0, 1)),
        FputCommand::Highfreq(a) => energy(common, a, (1000.0, 0.1, 4000.0, 10)),
        FputCommand::Sweep(a) => sweep(common, a),
        FputCommand::Reduction(a) => reduction(common, a),
    }
}

fn energy(common: &Common, args: &EnergyArgs, defaults: (f64, f64, f64, u32)) -> CmdResult {
    let params = FputParams::new(args.ell, args.omega.unwrap_or(defaults.0))?;
    let h = args.h.unwrap_or(defaults.1);
    let t_end = args.t_end.unwrap_or(defaults.2);
    let stride = args.stride.unwrap_or(defaults.3) as usize;
    let mut stepper = args.scheme.stepper(stage_config(common, None))?;
    let series = experiment_energy_with_stride(&mut stepper, &params, h, t_end, stride)?;
    match common.format {
        Format::Csv => emit(common, |w| series.write_csv(w))?,
        Format::Json => emit_json(common, &serde_json::to_value(&series)?)?,
    }
    let last = series.points.last().map_or(0.0, |p| p.total_oscillatory);
    eprintln!(
        "{}: max_H_err={:e} drift_slope={:e} I_final={last}",
        args.scheme,
        series.max_h_err(),
        series.drift_slope()
    );
    Ok(())
}

fn sweep(common: &Common, args: &SweepArgs) -> CmdResult {
    FputParams::new(args.ell, 1.0)?;
    let grid = sweep_grid(args.points as usize, args.max);
    let result = experiment_resonance_sweep(&args.scheme, stage_config(common, None), args.ell, args.h, args.t_end, &grid)?;
    let peaks = result.energy_peaks(0.05);
    match common.format {
        Format::Csv => emit(common, |w| result.write_csv(w))?,
        Format::Json => emit_json(common, &json!({ "sweep": result, "peaks": peaks }))?,
    }
    let failed = result.points.iter().filter(|p| p.error.is_some()).count();
    let top: Vec<String> = peaks.iter().take(3).map(|p| format!("{:.4}", p.h_omega_over_pi)).collect();
    eprintln!("{}: peaks at hω/π = [{}], failed points {failed}", args.scheme, top.join(", "));
    Ok(())
}

/// `h = 3/N`, `N = round(30·10^{k/7})` for `k = 0..14`.
pub fn default_reduction_hs() -> Vec<f64> {
    (0..=14)
        .map(|k| 3.0 / (30.0 * 10f64.powf(k as f64 / 7.0)).round())
        .collect()
}

fn reduction_table(
    common: &Common,
    schemes: &[SchemeSpec],
    ell: usize,
    t_end: f64,
    hs: &[f64],
    omegas: &[f64],
    ref_tol: f64,
) -> Result<symparc::fput::ReductionTable, Box<dyn std::error::Error>> {
    let reference = ReferenceOptions {
        tol: ref_tol,
        ..Default::default()
    };
    Ok(experiment_order_reduction(schemes, stage_config(common, None), ell, t_end, hs, omegas, &reference)?)
}

fn report_slopes(table: &symparc::fput::ReductionTable, schemes: &[SchemeSpec], omegas: &[f64]) {
    for s in schemes {
        for &w in omegas {
            let (q, p, all) = table.slopes(s, w);
            eprintln!("{s} omega={w}: slope q_s={q:.3} p_s={p:.3} all={all:.3}");
        }
    }
}

fn reduction(common: &Common, args: &ReductionArgs) -> CmdResult {
    let hs = if args.hs.is_empty() { default_reduction_hs() } else { args.hs.clone() };
    let table = reduction_table(common, &args.schemes, args.ell, args.t_end, &hs, &args.omegas, args.ref_tol)?;
    match common.format {
        Format::Csv => emit(common, |w| table.write_csv(w))?,
        Format::Json => emit_json(common, &serde_json::to_value(&table)?)?,
    }
    report_slopes(&table, &args.schemes, &args.omegas);
    failed_rows(&table)
}

fn failed_rows(table: &symparc::fput::ReductionTable) -> CmdResult {
    let failed: Vec<String> = table
        .rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{} h={}: {e}", r.scheme, r.h)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(failed.join("; ").into())
    }
}

pub fn converge(common: &Common, args: &ConvergeArgs) -> CmdResult {
    let hs = if args.hs.is_empty() {
        vec![0.1, 0.05, 0.025, 0.0125, 0.00625]
    } else {
        args.hs.clone()
    };
    let schemes = [args.scheme];
    let omegas = [args.omega];
    let table = reduction_table(common, &schemes, args.ell, args.t_end, &hs, &omegas, args.ref_tol)?;
    let rows = table.series(&args.scheme, args.omega);
    match common.format {
        Format::Csv => emit(common, |w| {
            writeln!(w, "h,err_qs,err_ps,err_all")?;
            for r in &rows {
                writeln!(
                    w,
                    "{},{},{},{}",
                    symparc::format::fmt_f64(r.h),
                    symparc::format::fmt_f64(r.err_qs),
                    symparc::format::fmt_f64(r.err_ps),
                    symparc::format::fmt_f64(r.err_all)
                )?;
            }
            Ok(())
        })?,
        Format::Json => {
            let (q, p, all) = table.slopes(&args.scheme, args.omega);
            emit_json(common, &json!({ "table": table, "slopes": { "q_s": q, "p_s": p, "all": all } }))?
        }
    }
    report_slopes(&table, &schemes, &omegas);
    failed_rows(&table)
}
