use std::path::Path;

use serde_json::json;
use sgn_core::diagnostics::{
    convergence_study, diagnostics_series, error_norms, ConvergenceTable, DiagnosticsRecord,
    StudySetup,
};
use sgn_core::integrators::{run_simulation, Scheme};
use sgn_core::reference::{m_from_u, rk4_run};
use sgn_core::structure::{lift, project, ZState};
use sgn_core::verification::{run_battery, Bound, Check};
use sgn_core::{DiffOperator, Params, PhysicalState};

use crate::config::{Resolved, RunConfig, SchemeName};
use crate::error::CliError;
use crate::output::{
    convergence_rows, diagnostics_rows, num, snapshot_table, write_csv, write_json,
};

/// States kept from one run.
pub struct Trajectory {
    pub scheme: SchemeName,
    pub snapshots: Vec<(PhysicalState, Option<ZState>)>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub steps: usize,
    pub dt: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &PhysicalState {
        &self
            .snapshots
            .last()
            .expect("the final state is always kept")
            .0
    }
}

/// Runs `scheme` on the resolved configuration, keeping snapshots and
/// diagnostics at their strides plus the initial and final states.
pub fn simulate(resolved: &Resolved, scheme: SchemeName) -> Result<Trajectory, CliError> {
    let cfg = &resolved.config;
    let op = DiffOperator::new(cfg.diff_operator, resolved.grid);
    let initial = resolved.scenario.initial_state(resolved.grid)?;
    let keep_snapshot = |step: usize, last: bool| last || step.is_multiple_of(cfg.snapshot_stride);
    let keep_diag = |step: usize, last: bool| last || step.is_multiple_of(cfg.diagnostics_stride);
    let mut snapshots = Vec::new();
    let mut diag_states = Vec::new();
    let mut diag_iters = Vec::new();

    let (steps, dt) = match scheme {
        SchemeName::Box | SchemeName::SpectralMidpoint => {
            let z0 = lift(&initial, &op)?;
            let kind = if scheme == SchemeName::Box {
                Scheme::Box
            } else {
                Scheme::SpectralMidpoint
            };
            let t_end = cfg.t_end;
            let summary = run_simulation(
                &z0,
                kind,
                &resolved.step,
                &resolved.params,
                t_end,
                1,
                |ev| {
                    let last = ev.state.t() == t_end;
                    let state = project(ev.state);
                    if keep_diag(ev.step, last) {
                        diag_states.push(state.clone());
                        diag_iters.push(ev.iterations);
                    }
                    if keep_snapshot(ev.step, last) {
                        snapshots.push((state, Some(ev.state.clone())));
                    }
                    Ok(())
                },
            )?;
            (summary.steps, summary.dt)
        }
        SchemeName::ReferenceRk4 => {
            let hm = m_from_u(&initial, &op)?;
            let t_end = cfg.t_end;
            let run = rk4_run(&hm, cfg.dt, t_end, &op, &resolved.params, 1, |step, st| {
                let last = st.t() == t_end;
                if keep_diag(step, last) || keep_snapshot(step, last) {
                    let state = st.to_physical(&op)?;
                    if keep_diag(step, last) {
                        diag_states.push(state.clone());
                        diag_iters.push(0);
                    }
                    if keep_snapshot(step, last) {
                        snapshots.push((state, None));
                    }
                }
                Ok(())
            })?;
            (run.steps, run.dt)
        }
    };
    let diagnostics = diagnostics_series(&diag_states, &diag_iters, &op, &resolved.params)?;
    Ok(Trajectory {
        scheme,
        snapshots,
        diagnostics,
        steps,
        dt,
    })
}

fn metadata(resolved: &Resolved, command: &str, extra: serde_json::Value) -> serde_json::Value {
    let sc = &resolved.scenario;
    json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": resolved.config,
        "scenario": {
            "name": sc.name(),
            "parameters": sc.parameters(),
            "certification": sc.certification().map(|c| json!({
                "grid_points": c.grid_points,
                "domain_length": c.domain_length,
                "mass_residual": c.mass_residual,
                "momentum_residual": c.momentum_residual,
            })),
        },
        "run": extra,
    })
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn cmd_run(config_path: &Path) -> Result<String, CliError> {
    let resolved = RunConfig::load(config_path)?.resolve()?;
    let scheme = resolved.config.scheme;
    let traj = simulate(&resolved, scheme)?;
    let dir = &resolved.config.output_dir;
    create_dir(dir)?;
    for (index, (state, z)) in traj.snapshots.iter().enumerate() {
        let z = if resolved.config.z_columns {
            match z {
                Some(z) => Some(z.clone()),
                None => Some(lift(
                    state,
                    &DiffOperator::new(resolved.config.diff_operator, state.grid()),
                )?),
            }
        } else {
            None
        };
        let (header, rows) = snapshot_table(state, z.as_ref());
        write_csv(&dir.join(format!("snap_{index}.csv")), &header, &rows)?;
    }
    write_csv(
        &dir.join("diagnostics.csv"),
        &DiagnosticsRecord::HEADER,
        &diagnostics_rows(&traj.diagnostics),
    )?;
    let meta = metadata(
        &resolved,
        "run",
        json!({"steps": traj.steps, "dt": traj.dt, "snapshots": traj.snapshots.len()}),
    );
    write_json(&dir.join("metadata.json"), &meta)?;
    let first = &traj.diagnostics[0];
    let last = traj.diagnostics.last().expect("nonempty");
    Ok(format!(
        "{} on {} ({} points): {} steps of {:.6e} to t = {}\n  mass drift {:.3e}, energy drift {:.3e}\n  output in {}",
        scheme.name(),
        resolved.scenario.name(),
        resolved.grid.n(),
        traj.steps,
        traj.dt,
        last.t,
        last.mass - first.mass,
        last.energy - first.energy,
        dir.display()
    ))
}

pub fn format_checks(checks: &[Check]) -> String {
    let mut out = String::new();
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in checks {
        let op = match c.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        out.push_str(&format!(
            "{:<4} {:<12} {:<width$}  {:>10.3e} {op} {:.1e}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.group,
            c.name,
            c.value,
            c.threshold,
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    out
}

pub fn cmd_verify(seed: u64, as_json: bool) -> Result<(String, bool), CliError> {
    let checks = run_battery(seed, &Params::default())?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let text = if as_json {
        serde_json::to_string_pretty(&json!({"seed": seed, "checks": checks}))
            .expect("serializable")
    } else {
        format_checks(&checks)
    };
    Ok((text, failed == 0))
}

pub fn cmd_convergence(config_path: &Path, resolutions: &[usize]) -> Result<String, CliError> {
    let resolved = RunConfig::load(config_path)?.resolve()?;
    if !resolved.scenario.has_exact_solution() {
        return Err(CliError::Config {
            key: Some("scenario.name".to_string()),
            line: None,
            message: format!(
                "`{}` has no exact solution to measure errors against",
                resolved.scenario.name()
            ),
        });
    }
    if resolutions.len() < 2 {
        return Err(CliError::Config {
            key: Some("--resolutions".to_string()),
            line: None,
            message: "need at least two resolutions".to_string(),
        });
    }
    let cfg = &resolved.config;
    let setup = StudySetup {
        length: resolved.grid.length(),
        t_end: cfg.t_end,
        courant: cfg.dt / resolved.grid.dx(),
        diff: cfg.diff_operator,
        newton_tol: cfg.newton_tol,
    };
    let table = convergence_study(
        &resolved.scenario,
        cfg.scheme.study(),
        resolutions,
        &setup,
        &resolved.params,
    )?;
    create_dir(&cfg.output_dir)?;
    write_csv(
        &cfg.output_dir.join("convergence.csv"),
        &ConvergenceTable::CSV_HEADER,
        &convergence_rows(&table),
    )?;
    write_json(
        &cfg.output_dir.join("metadata.json"),
        &metadata(
            &resolved,
            "convergence",
            json!({"resolutions": resolutions, "table": table}),
        ),
    )?;
    let mut out = format!(
        "{} on {}, dt = {:.4} dx, t_end = {}\n{:>6} {:>12} {:>12} {:>12} {:>7}\n",
        cfg.scheme.name(),
        resolved.scenario.name(),
        setup.courant,
        cfg.t_end,
        "n",
        "dt",
        "L2(h)",
        "Linf(h)",
        "order"
    );
    for r in &table.rows {
        out.push_str(&format!(
            "{:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>7}\n",
            r.n,
            r.dt,
            r.error_l2,
            r.error_linf,
            r.observed_order
                .map(|o| format!("{o:.2}"))
                .unwrap_or_else(|| "-".to_string())
        ));
    }
    Ok(out)
}

pub fn cmd_compare(config_path: &Path) -> Result<String, CliError> {
    let resolved = RunConfig::load(config_path)?.resolve()?;
    let results: Vec<Result<Trajectory, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = SchemeName::ALL
            .iter()
            .map(|&scheme| {
                let resolved = &resolved;
                s.spawn(move || simulate(resolved, scheme))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    let trajectories = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let dir = &resolved.config.output_dir;
    create_dir(dir)?;
    let header = [
        "t",
        "mass_drift",
        "momentum_drift",
        "energy_drift",
        "tangential_drift",
    ];
    let mut summary = String::new();
    for traj in &trajectories {
        let first = traj.diagnostics[0];
        let rows: Vec<Vec<String>> = traj
            .diagnostics
            .iter()
            .map(|r| {
                vec![
                    num(r.t),
                    num(r.mass - first.mass),
                    num(r.momentum - first.momentum),
                    num(r.energy - first.energy),
                    num(r.tangential - first.tangential),
                ]
            })
            .collect();
        write_csv(
            &dir.join(format!("drift_{}.csv", traj.scheme.name())),
            &header,
            &rows,
        )?;
        let last = traj.diagnostics.last().expect("nonempty");
        summary.push_str(&format!(
            "{:<18} steps {:>6}  mass drift {:>10.3e}  energy drift {:>10.3e}\n",
            traj.scheme.name(),
            traj.steps,
            last.mass - first.mass,
            last.energy - first.energy
        ));
    }
    let mut rows = Vec::new();
    for (i, a) in trajectories.iter().enumerate() {
        for b in &trajectories[i + 1..] {
            let e = error_norms(a.final_state(), b.final_state())?;
            summary.push_str(&format!(
                "{} vs {}: L2(h) {:.3e}, Linf(h) {:.3e}\n",
                a.scheme.name(),
                b.scheme.name(),
                e.h_l2,
                e.h_linf
            ));
            rows.push(vec![
                a.scheme.name().to_string(),
                b.scheme.name().to_string(),
                num(e.h_l2),
                num(e.h_linf),
                num(e.u_l2),
                num(e.u_linf),
            ]);
        }
    }
    write_csv(
        &dir.join("pairwise.csv"),
        &["scheme_a", "scheme_b", "h_l2", "h_linf", "u_l2", "u_linf"],
        &rows,
    )?;
    write_json(
        &dir.join("metadata.json"),
        &metadata(
            &resolved,
            "compare",
            json!(trajectories
                .iter()
                .map(|t| json!({"scheme": t.scheme.name(), "steps": t.steps, "dt": t.dt}))
                .collect::<Vec<_>>()),
        ),
    )?;
    Ok(summary)
}
