//! Energy and momentum densities of the multi-symplectic form, their local
//! conservation laws, global invariants of `(h, u)` snapshots, error norms
//! and convergence tables.

use serde::{Deserialize, Serialize};

use crate::diff::{integrate, DiffKind, DiffOperator};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D, Params, PhysicalState};
use crate::integrators::{run_simulation, BoxSchemeConfig, Scheme};
use crate::reference::{m_from_u, rk4_run};
use crate::scenarios::Scenario;
use crate::structure::s_unchecked;
use crate::structure::{build_k, build_m, comp, grad_s, lift, project, ZField, ZState, DIM};

/// Tensor densities `E = S + z_x.K.z / 2`, `F = -z_t.K.z / 2`,
/// `G = S + z_t.M.z / 2` and `I = -z_x.M.z / 2`, evaluated with the full
/// (non-periodic) potential.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorDensities {
    pub e: Field,
    pub f: Field,
    pub g: Field,
    pub i: Field,
}

/// Nodes of `z` with the secular part of the potential restored.
fn full_nodes(z: &ZState) -> Vec<[f64; DIM]> {
    let phi = z.phi_full();
    (0..z.grid().n())
        .map(|i| {
            let mut node = z.node(i);
            node[comp::PHI] = phi[i];
            node
        })
        .collect()
}

fn slice(f: &ZField, i: usize) -> &[f64] {
    &f.data()[DIM * i..DIM * (i + 1)]
}

pub fn tensor_efgi(
    z: &ZState,
    z_t: &ZField,
    z_x: &ZField,
    params: &Params,
) -> Result<TensorDensities> {
    let grid = z.grid();
    grid.check_same(&z_t.grid())?;
    grid.check_same(&z_x.grid())?;
    let (m, k) = (build_m(), build_k());
    let nodes = full_nodes(z);
    let n = grid.n();
    let (mut e, mut f, mut g, mut ii) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (i, node) in nodes.iter().enumerate() {
        let s = s_unchecked(node, params.g);
        let (zt, zx) = (slice(z_t, i), slice(z_x, i));
        e[i] = s + 0.5 * k.bilinear(zx, node);
        f[i] = -0.5 * k.bilinear(zt, node);
        g[i] = s + 0.5 * m.bilinear(zt, node);
        ii[i] = -0.5 * m.bilinear(zx, node);
    }
    Ok(TensorDensities {
        e: Field::new(grid, e)?,
        f: Field::new(grid, f)?,
        g: Field::new(grid, g)?,
        i: Field::new(grid, ii)?,
    })
}

/// The tensor densities rewritten in `(h, u, phi)`: `-E`, `-F`, `G` and `I`
/// as total derivatives of potentials plus the classical densities and
/// fluxes. Derivatives of products containing the potential use the product
/// rule, so the secular part of `phi` is handled exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalDensities {
    pub neg_e: Field,
    pub neg_f: Field,
    pub g: Field,
    pub i: Field,
}

pub fn physical_efgi(
    z: &ZState,
    z_t: &ZField,
    op: &DiffOperator,
    params: &Params,
) -> Result<PhysicalDensities> {
    let grid = z.grid();
    grid.check_same(&z_t.grid())?;
    let n = grid.n();
    let h = z.fields().component_values(comp::H);
    let u = z.fields().component_values(comp::U);
    let phi = z.phi_full();
    let phi_x = z.dx(op)?.component_values(comp::PHI);
    let phi_t = z_t.component_values(comp::PHI);
    let h_t = z_t.component_values(comp::H);
    let u_t = z_t.component_values(comp::U);
    let h_x = op.apply(&h);
    let u_x = op.apply(&u);
    let u_xx = op.apply(&u_x);
    let u_xt = op.apply(&u_t);
    let hu: Vec<f64> = (0..n).map(|i| h[i] * u[i]).collect();
    let hu_x = op.apply(&hu);
    let h3ux: Vec<f64> = (0..n).map(|i| h[i].powi(3) * u_x[i]).collect();
    let h3ux_x = op.apply(&h3ux);
    let h3uux: Vec<f64> = (0..n).map(|i| h3ux[i] * u[i]).collect();
    let h3uux_x = op.apply(&h3uux);

    let mut neg_e = vec![0.0; n];
    let mut neg_f = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut ii = vec![0.0; n];
    for i in 0..n {
        let gamma = h[i] * (u_x[i] * u_x[i] - u_xt[i] - u[i] * u_xx[i]);
        let h2 = h[i] * h[i];
        let h3 = h2 * h[i];
        // A = phi h / 2 + h^3 u_x / 6 and B = phi h u / 2 + h^3 u u_x / 6.
        let a_x = 0.5 * (phi_x[i] * h[i] + phi[i] * h_x[i]) + h3ux_x[i] / 6.0;
        let a_t = 0.5 * (phi_t[i] * h[i] + phi[i] * h_t[i])
            + (3.0 * h2 * h_t[i] * u_x[i] + h3 * u_xt[i]) / 6.0;
        let b_x = 0.5 * (phi_x[i] * hu[i] + phi[i] * hu_x[i]) + h3uux_x[i] / 6.0;
        let b_t = 0.5 * (phi_t[i] * hu[i] + phi[i] * (h_t[i] * u[i] + h[i] * u_t[i]))
            + (3.0 * h2 * h_t[i] * u[i] * u_x[i] + h3 * (u_t[i] * u_x[i] + u[i] * u_xt[i])) / 6.0;
        let half_g_h2 = 0.5 * params.g * h2;
        neg_e[i] = 0.5 * hu[i] * u[i] + half_g_h2 + h3 * u_x[i] * u_x[i] / 6.0 - b_x;
        neg_f[i] =
            (0.5 * u[i] * u[i] + h2 * u_x[i] * u_x[i] / 6.0 + params.g * h[i] + h[i] * gamma / 3.0)
                * hu[i]
                + b_t;
        g[i] = hu[i] * u[i] + half_g_h2 + h2 * gamma / 3.0 + a_t;
        ii[i] = hu[i] - a_x;
    }
    Ok(PhysicalDensities {
        neg_e: Field::new(grid, neg_e)?,
        neg_f: Field::new(grid, neg_f)?,
        g: Field::new(grid, g)?,
        i: Field::new(grid, ii)?,
    })
}

/// `x`-derivative of `a.A.z` for periodic `a` and the state `z`, by the
/// product rule.
fn dx_bilinear(
    form: &crate::structure::SkewForm,
    a: &ZField,
    a_x: &ZField,
    nodes: &[[f64; DIM]],
    z_x: &ZField,
    i: usize,
) -> f64 {
    form.bilinear(slice(a_x, i), &nodes[i]) + form.bilinear(slice(a, i), slice(z_x, i))
}

/// Local conservation laws `E_t + F_x` and `I_t + G_x` for a state with known
/// time derivative. Time derivatives of the densities use the chain rule and
/// space derivatives use `op` with the product rule for the potential.
pub fn tensor_law_residuals(
    z: &ZState,
    z_t: &ZField,
    op: &DiffOperator,
    params: &Params,
) -> Result<(Field, Field)> {
    let grid = z.grid();
    grid.check_same(&z_t.grid())?;
    let (m, k) = (build_m(), build_k());
    let nodes = full_nodes(z);
    let z_x = z.dx(op)?;
    let z_tx = z_t.dx(op);
    let s: Vec<f64> = nodes.iter().map(|nd| s_unchecked(nd, params.g)).collect();
    let s_x = op.apply(&s);
    let n = grid.n();
    let mut law_e = vec![0.0; n];
    let mut law_i = vec![0.0; n];
    for i in 0..n {
        let gs = grad_s(&nodes[i], params);
        let (zt, zx, ztx) = (slice(z_t, i), slice(&z_x, i), slice(&z_tx, i));
        let s_t: f64 = gs.iter().zip(zt).map(|(a, b)| a * b).sum();
        let e_t = s_t + 0.5 * (k.bilinear(ztx, &nodes[i]) + k.bilinear(zx, zt));
        let f_x = -0.5 * dx_bilinear(&k, z_t, &z_tx, &nodes, &z_x, i);
        let i_t = -0.5 * (m.bilinear(ztx, &nodes[i]) + m.bilinear(zx, zt));
        let g_x = s_x[i] + 0.5 * dx_bilinear(&m, z_t, &z_tx, &nodes, &z_x, i);
        law_e[i] = e_t + f_x;
        law_i[i] = i_t + g_x;
    }
    Ok((Field::new(grid, law_e)?, Field::new(grid, law_i)?))
}

/// Re-lifts three consecutive snapshots and evaluates both local laws at the
/// middle one with centred differences in time.
///
/// Each lift fixes the potential's additive constant independently, so the
/// outer snapshots are shifted to make the mean potential advance at the
/// mean rate implied by the `h` row of the system at the middle snapshot.
pub fn conservation_residuals(
    window: &[PhysicalState],
    op: &DiffOperator,
    params: &Params,
) -> Result<(Field, Field)> {
    if window.len() < 3 {
        return Err(Error::InsufficientSnapshots {
            needed: 3,
            got: window.len(),
        });
    }
    let (before, mid, after) = (&window[0], &window[1], &window[2]);
    let grid = mid.grid();
    let (t0, t1, t2) = (before.t(), mid.t(), after.t());
    if !(t0 < t1 && t1 < t2) {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: "snapshot times must increase".to_string(),
        });
    }
    let z0 = lift(before, op)?;
    let z1 = lift(mid, op)?;
    let z2 = lift(after, op)?;
    let n = grid.n();
    let span = t2 - t0;

    let p_t: Vec<f64> = (0..n)
        .map(|i| (z2.node(i)[comp::P] - z0.node(i)[comp::P]) / span)
        .collect();
    let r_x = op.apply(&z1.fields().component_values(comp::R));
    let phi_rate = (0..n)
        .map(|i| grad_s(&z1.node(i), params)[comp::H] - (p_t[i] + r_x[i]) / 3.0)
        .sum::<f64>()
        / n as f64;
    let mean_phi = |z: &ZState| z.component(comp::PHI).mean();
    let shift = |z: ZState, target_mean: f64| -> Result<ZState> {
        let offset = target_mean - mean_phi(&z);
        let mut fields = z.fields().clone();
        let phi: Vec<f64> = fields
            .component_values(comp::PHI)
            .iter()
            .map(|v| v + offset)
            .collect();
        fields.set_component(comp::PHI, &phi);
        ZState::new(fields, z.phi_slope(), z.t())
    };
    let base = mean_phi(&z1);
    let z0 = shift(z0, base - phi_rate * (t1 - t0))?;
    let z2 = shift(z2, base + phi_rate * (t2 - t1))?;

    let z_t = z2.fields().axpy(-1.0, z0.fields())?.scaled(1.0 / span);
    let densities = |z: &ZState| -> Result<TensorDensities> {
        let zx = z.dx(op)?;
        tensor_efgi(z, &ZField::zeros(grid), &zx, params)
    };
    let (d0, d2) = (densities(&z0)?, densities(&z2)?);

    let (m, k) = (build_m(), build_k());
    let nodes = full_nodes(&z1);
    let z_x = z1.dx(op)?;
    let z_tx = z_t.dx(op);
    let s: Vec<f64> = nodes.iter().map(|nd| s_unchecked(nd, params.g)).collect();
    let s_x = op.apply(&s);
    let mut law_e = vec![0.0; n];
    let mut law_i = vec![0.0; n];
    for i in 0..n {
        let e_t = (d2.e.values()[i] - d0.e.values()[i]) / span;
        let i_t = (d2.i.values()[i] - d0.i.values()[i]) / span;
        let f_x = -0.5 * dx_bilinear(&k, &z_t, &z_tx, &nodes, &z_x, i);
        let g_x = s_x[i] + 0.5 * dx_bilinear(&m, &z_t, &z_tx, &nodes, &z_x, i);
        law_e[i] = e_t + f_x;
        law_i[i] = i_t + g_x;
    }
    Ok((Field::new(grid, law_e)?, Field::new(grid, law_i)?))
}

/// Domain integrals of the classical densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub tangential: f64,
}

pub fn global_invariants(
    state: &PhysicalState,
    op: &DiffOperator,
    params: &Params,
) -> Result<Invariants> {
    let grid = state.grid();
    grid.check_same(&op.grid())?;
    let (h, u) = (state.h().values(), state.u().values());
    let u_x = op.apply(u);
    let tangential = m_from_u(state, op)?;
    let n = grid.n();
    let field = |f: &dyn Fn(usize) -> f64| Field::new(grid, (0..n).map(f).collect());
    Ok(Invariants {
        mass: integrate(state.h()),
        momentum: integrate(&field(&|i| h[i] * u[i])?),
        energy: integrate(&field(&|i| {
            0.5 * h[i] * u[i] * u[i]
                + h[i].powi(3) * u_x[i] * u_x[i] / 6.0
                + 0.5 * params.g * h[i] * h[i]
        })?),
        tangential: integrate(tangential.m()),
    })
}

/// One row of `diagnostics.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub tangential: f64,
    pub e_int: f64,
    pub i_int: f64,
    /// Largest pointwise residual of the two local tensor laws.
    pub ms_law_max: f64,
    pub newton_iters: usize,
}

impl DiagnosticsRecord {
    pub const HEADER: [&'static str; 9] = [
        "t",
        "mass",
        "momentum",
        "energy",
        "tangential",
        "E_int",
        "I_int",
        "ms_law_max",
        "newton_iters",
    ];
}

/// Diagnostics for every snapshot of a trajectory. The local-law residual of
/// snapshot `k` uses the window centred at `k`, clamped to the interior at the
/// two ends; it is `NaN` when fewer than three snapshots exist.
pub fn diagnostics_series(
    snapshots: &[PhysicalState],
    newton_iters: &[usize],
    op: &DiffOperator,
    params: &Params,
) -> Result<Vec<DiagnosticsRecord>> {
    if newton_iters.len() != snapshots.len() {
        return Err(Error::InvalidParameter {
            name: "newton_iters",
            reason: "one iteration count per snapshot is required".to_string(),
        });
    }
    let count = snapshots.len();
    let laws: Vec<f64> = if count >= 3 {
        (1..count - 1)
            .map(|c| {
                let (e, i) = conservation_residuals(&snapshots[c - 1..=c + 1], op, params)?;
                Ok(e.max_abs().max(i.max_abs()))
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    snapshots
        .iter()
        .enumerate()
        .map(|(k, state)| {
            let inv = global_invariants(state, op, params)?;
            let z = lift(state, op)?;
            let d = tensor_efgi(&z, &ZField::zeros(state.grid()), &z.dx(op)?, params)?;
            let ms_law_max = if laws.is_empty() {
                f64::NAN
            } else {
                laws[k.clamp(1, count - 2) - 1]
            };
            Ok(DiagnosticsRecord {
                t: state.t(),
                mass: inv.mass,
                momentum: inv.momentum,
                energy: inv.energy,
                tangential: inv.tangential,
                e_int: integrate(&d.e),
                i_int: integrate(&d.i),
                ms_law_max,
                newton_iters: newton_iters[k],
            })
        })
        .collect()
}

/// Discrete `L2` (`sqrt(dx sum e^2)`) and max norms of the differences in
/// `h` and `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub h_l2: f64,
    pub h_linf: f64,
    pub u_l2: f64,
    pub u_linf: f64,
}

pub fn error_norms(numeric: &PhysicalState, exact: &PhysicalState) -> Result<ErrorNorms> {
    numeric.grid().check_same(&exact.grid())?;
    let dx = numeric.grid().dx();
    let norms = |a: &Field, b: &Field| {
        let (mut sq, mut max) = (0.0_f64, 0.0_f64);
        for (x, y) in a.values().iter().zip(b.values()) {
            let d = x - y;
            sq += d * d;
            max = max.max(d.abs());
        }
        ((dx * sq).sqrt(), max)
    };
    let (h_l2, h_linf) = norms(numeric.h(), exact.h());
    let (u_l2, u_linf) = norms(numeric.u(), exact.u());
    Ok(ErrorNorms {
        h_l2,
        h_linf,
        u_l2,
        u_linf,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dt: f64,
    pub error_l2: f64,
    pub error_linf: f64,
    /// `log(e_prev / e) / log(dx_prev / dx)` against the previous row.
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Builds the table from `(n, dt, l2, linf)` on domains of equal length,
    /// filling in observed orders from the `L2` errors.
    pub fn from_errors(entries: &[(usize, f64, f64, f64)]) -> Self {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(entries.len());
        for &(n, dt, error_l2, error_linf) in entries {
            let observed_order = rows
                .last()
                .map(|prev| (prev.error_l2 / error_l2).ln() / (n as f64 / prev.n as f64).ln());
            rows.push(ConvergenceRow {
                n,
                dt,
                error_l2,
                error_linf,
                observed_order,
            });
        }
        Self { rows }
    }

    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.observed_order).collect()
    }

    pub const CSV_HEADER: [&'static str; 5] =
        ["n", "dt", "error_l2", "error_linf", "observed_order"];
}

/// Which solver a convergence study exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyScheme {
    Box,
    SpectralMidpoint,
    ReferenceRk4,
}

impl StudyScheme {
    pub fn name(self) -> &'static str {
        match self {
            StudyScheme::Box => "box",
            StudyScheme::SpectralMidpoint => "spectral_midpoint",
            StudyScheme::ReferenceRk4 => "reference_rk4",
        }
    }
}

/// Fixed settings of a convergence study; the step is `courant * dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudySetup {
    pub length: f64,
    pub t_end: f64,
    pub courant: f64,
    /// Operator used to lift initial data and by the reference solver.
    pub diff: DiffKind,
    pub newton_tol: f64,
}

/// Runs one solver on a fresh grid from the scenario's initial data.
pub fn simulate(
    scenario: &Scenario,
    scheme: StudyScheme,
    grid: Grid1D,
    dt: f64,
    setup: &StudySetup,
    params: &Params,
) -> Result<PhysicalState> {
    let op = DiffOperator::new(setup.diff, grid);
    let initial = scenario.initial_state(grid)?;
    match scheme {
        StudyScheme::Box | StudyScheme::SpectralMidpoint => {
            let z = lift(&initial, &op)?;
            let cfg = BoxSchemeConfig::new(dt)?.with_tol(setup.newton_tol)?;
            let kind = if scheme == StudyScheme::Box {
                Scheme::Box
            } else {
                Scheme::SpectralMidpoint
            };
            let run = run_simulation(&z, kind, &cfg, params, setup.t_end, usize::MAX, |_| Ok(()))?;
            Ok(project(&run.final_state))
        }
        StudyScheme::ReferenceRk4 => {
            let hm = m_from_u(&initial, &op)?;
            let run = rk4_run(&hm, dt, setup.t_end, &op, params, usize::MAX, |_, _| Ok(()))?;
            run.final_state.to_physical(&op)
        }
    }
}

/// Errors in `h` against the scenario's exact solution at each resolution.
pub fn convergence_study(
    scenario: &Scenario,
    scheme: StudyScheme,
    resolutions: &[usize],
    setup: &StudySetup,
    params: &Params,
) -> Result<ConvergenceTable> {
    if !scenario.has_exact_solution() {
        return Err(Error::InvalidParameter {
            name: "scenario",
            reason: format!(
                "`{}` has no exact solution to measure errors against",
                scenario.name()
            ),
        });
    }
    let mut entries = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let row = || -> Result<(usize, f64, f64, f64)> {
            let grid = Grid1D::new(setup.length, n)?;
            let dt = setup.courant * grid.dx();
            let numeric = simulate(scenario, scheme, grid, dt, setup, params)?;
            let exact = scenario
                .exact_solution(grid, numeric.t())
                .expect("checked above")?;
            let norms = error_norms(&numeric, &exact)?;
            Ok((n, dt, norms.h_l2, norms.h_linf))
        };
        entries.push(row().map_err(|e| Error::StudyRowFailed {
            n,
            source: Box::new(e),
        })?);
    }
    Ok(ConvergenceTable::from_errors(&entries))
}
