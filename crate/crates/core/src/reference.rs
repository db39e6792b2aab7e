//! Classical method-of-lines solver in depth and tangential-momentum
//! variables, integrated with the four-stage Runge-Kutta method. It shares
//! nothing with the multi-symplectic schemes beyond the derivative operators
//! and serves as an independent cross-check.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::diff::{wrap, DiffOperator};
use crate::error::{Error, Result};
use crate::grid::{check_positive_depth, max_abs, Field, Grid1D, Params, PhysicalState};
use crate::linalg::CyclicBandMatrix;

/// Field magnitude above which a run is declared unstable.
pub const INSTABILITY_THRESHOLD: f64 = 1e6;
/// Fraction of the shallow-water CFL limit used by [`default_dt`].
pub const DEFAULT_CFL: f64 = 0.25;

const CG_TOL: f64 = 1e-12;
const CG_MAX_ITER: usize = 1000;

/// Depth `h` and tangential momentum `m = u - h^-1 (h^3 u_x)_x / 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct HMState {
    h: Field,
    m: Field,
    t: f64,
}

impl HMState {
    pub fn new(h: Field, m: Field, t: f64) -> Result<Self> {
        h.grid().check_same(&m.grid())?;
        check_positive_depth(h.values())?;
        Ok(Self { h, m, t })
    }

    pub fn h(&self) -> &Field {
        &self.h
    }

    pub fn m(&self) -> &Field {
        &self.m
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> Grid1D {
        self.h.grid()
    }

    /// Recovers `(h, u)`.
    pub fn to_physical(&self, op: &DiffOperator) -> Result<PhysicalState> {
        let u = u_from_hm(self, op)?;
        PhysicalState::new(self.h.clone(), u, self.t)
    }
}

pub fn m_from_u(state: &PhysicalState, op: &DiffOperator) -> Result<HMState> {
    let grid = state.grid();
    grid.check_same(&op.grid())?;
    let h = state.h().values();
    let u = state.u().values();
    let m: Vec<f64> = u
        .iter()
        .zip(dispersive_term(h, u, op))
        .map(|(u, d)| u - d)
        .collect();
    HMState::new(state.h().clone(), Field::new(grid, m)?, state.t())
}

/// `h^-1 (h^3 u_x)_x / 3`.
fn dispersive_term(h: &[f64], u: &[f64], op: &DiffOperator) -> Vec<f64> {
    let ux = op.apply(u);
    let flux: Vec<f64> = h.iter().zip(&ux).map(|(h, ux)| h.powi(3) * ux).collect();
    op.apply(&flux)
        .iter()
        .zip(h)
        .map(|(d, h)| d / (3.0 * h))
        .collect()
}

/// `h u - (h^3 u_x)_x / 3`.
fn elliptic_apply(h: &[f64], u: &[f64], op: &DiffOperator) -> Vec<f64> {
    let d = dispersive_term(h, u, op);
    h.iter()
        .zip(u)
        .zip(d)
        .map(|((h, u), d)| h * (u - d))
        .collect()
}

/// Solves `h u - (h^3 u_x)_x / 3 = h m` for `u`.
pub fn u_from_hm(state: &HMState, op: &DiffOperator) -> Result<Field> {
    let grid = state.grid();
    grid.check_same(&op.grid())?;
    let h = state.h.values();
    let rhs: Vec<f64> = h.iter().zip(state.m.values()).map(|(h, m)| h * m).collect();
    let u = match op.stencil() {
        Some(stencil) => solve_banded(h, &rhs, &stencil)?,
        None => solve_spectral(h, &rhs, op)?,
    };
    Field::new(grid, u)
}

fn solve_banded(h: &[f64], rhs: &[f64], stencil: &[(isize, f64)]) -> Result<Vec<f64>> {
    let n = h.len();
    let reach = stencil
        .iter()
        .map(|(o, _)| o.unsigned_abs())
        .max()
        .unwrap_or(0);
    let mut mat = CyclicBandMatrix::zeros(n, 2 * reach);
    for i in 0..n {
        mat.add(i, i, h[i]);
        for &(o1, w1) in stencil {
            let k = wrap(i, o1, n);
            let hk3 = h[k].powi(3);
            for &(o2, w2) in stencil {
                mat.add(i, wrap(k, o2, n), -w1 * hk3 * w2 / 3.0);
            }
        }
    }
    let lu = mat.factor().map_err(|e| Error::SolverBreakdown {
        residual: e.pivot,
        iterations: 0,
    })?;
    Ok(lu.solve(rhs))
}

/// Conjugate gradients on the symmetric positive definite spectral operator,
/// preconditioned by the exact inverse of its constant-coefficient version.
fn solve_spectral(h: &[f64], rhs: &[f64], op: &DiffOperator) -> Result<Vec<f64>> {
    let n = h.len();
    let pre = SymbolInverse::new(op.grid(), h.iter().sum::<f64>() / n as f64);
    let tol = CG_TOL * max_abs(rhs).max(1.0);
    let mut u = pre.apply(rhs);
    let au = elliptic_apply(h, &u, op);
    let mut r: Vec<f64> = rhs.iter().zip(&au).map(|(b, a)| b - a).collect();
    let mut z = pre.apply(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for iteration in 0..CG_MAX_ITER {
        let res = max_abs(&r);
        if res <= tol {
            return Ok(u);
        }
        let ap = elliptic_apply(h, &p, op);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverBreakdown {
                residual: res,
                iterations: iteration,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            u[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = pre.apply(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverBreakdown {
        residual: max_abs(&r),
        iterations: CG_MAX_ITER,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inverse of `depth + depth^3 k^2 / 3` applied in Fourier space.
struct SymbolInverse {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    weights: Vec<f64>,
}

impl SymbolInverse {
    fn new(grid: Grid1D, depth: f64) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let weights = (0..n)
            .map(|j| {
                let mode = if j <= n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                let k = 2.0 * std::f64::consts::PI * mode / grid.length();
                1.0 / ((depth + depth.powi(3) * k * k / 3.0) * n as f64)
            })
            .collect();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            weights,
        }
    }

    fn apply(&self, values: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (b, w) in buf.iter_mut().zip(&self.weights) {
            *b *= w;
        }
        self.inverse.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }
}

/// Time derivatives `(h_t, m_t)` of the semi-discrete system.
pub fn classical_rhs(
    state: &HMState,
    op: &DiffOperator,
    params: &Params,
) -> Result<(Field, Field)> {
    let grid = state.grid();
    let u = u_from_hm(state, op)?;
    let (h, u, m) = (state.h.values(), u.values(), state.m.values());
    let ux = op.apply(u);
    let mass_flux: Vec<f64> = h.iter().zip(u).map(|(h, u)| h * u).collect();
    let momentum_flux: Vec<f64> = (0..grid.n())
        .map(|i| {
            // u - m equals h^-1 (h^3 u_x)_x / 3 by construction of u.
            0.5 * u[i] * u[i] + params.g * h[i]
                - 0.5 * h[i] * h[i] * ux[i] * ux[i]
                - u[i] * (u[i] - m[i])
        })
        .collect();
    let negate = |v: Vec<f64>| v.into_iter().map(|x| -x).collect::<Vec<_>>();
    Ok((
        Field::new(grid, negate(op.apply(&mass_flux)))?,
        Field::new(grid, negate(op.apply(&momentum_flux)))?,
    ))
}

/// Step `DEFAULT_CFL * dx / sqrt(g * max h)`.
pub fn default_dt(state: &HMState, params: &Params) -> f64 {
    let hmax = state.h.values().iter().fold(0.0_f64, |a, &b| a.max(b));
    DEFAULT_CFL * state.grid().dx() / (params.g * hmax).sqrt()
}

fn rk4_step(state: &HMState, dt: f64, op: &DiffOperator, params: &Params) -> Result<HMState> {
    let grid = state.grid();
    let stage = |base: &HMState, k: &(Field, Field), scale: f64| -> Result<HMState> {
        let h = base.h.zip_with(&k.0, |a, b| a + scale * b)?;
        let m = base.m.zip_with(&k.1, |a, b| a + scale * b)?;
        HMState::new(h, m, base.t + scale)
    };
    let k1 = classical_rhs(state, op, params)?;
    let k2 = classical_rhs(&stage(state, &k1, 0.5 * dt)?, op, params)?;
    let k3 = classical_rhs(&stage(state, &k2, 0.5 * dt)?, op, params)?;
    let k4 = classical_rhs(&stage(state, &k3, dt)?, op, params)?;
    let combine = |base: &Field, a: &Field, b: &Field, c: &Field, d: &Field| {
        let values = (0..grid.n())
            .map(|i| {
                base.values()[i]
                    + dt / 6.0
                        * (a.values()[i]
                            + 2.0 * b.values()[i]
                            + 2.0 * c.values()[i]
                            + d.values()[i])
            })
            .collect();
        Field::new(grid, values)
    };
    let h = combine(&state.h, &k1.0, &k2.0, &k3.0, &k4.0)?;
    let m = combine(&state.m, &k1.1, &k2.1, &k3.1, &k4.1)?;
    HMState::new(h, m, state.t + dt)
}

/// Outcome of [`rk4_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRun {
    pub final_state: HMState,
    pub steps: usize,
    /// Step actually used: the requested step shrunk so that a whole number
    /// of steps reaches `t_end`.
    pub dt: f64,
}

/// Integrates to `t_end`, passing the initial state, every `stride`-th state
/// and the final state to `observer` together with the step index.
pub fn rk4_run<F>(
    initial: &HMState,
    dt: f64,
    t_end: f64,
    op: &DiffOperator,
    params: &Params,
    stride: usize,
    mut observer: F,
) -> Result<ReferenceRun>
where
    F: FnMut(usize, &HMState) -> Result<()>,
{
    initial.grid().check_same(&op.grid())?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: "time step must be positive".to_string(),
        });
    }
    let span = t_end - initial.t;
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            reason: format!("must exceed the initial time {}", initial.t),
        });
    }
    let stride = stride.max(1);
    let steps = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    observer(0, initial)?;
    let mut state = initial.clone();
    for step in 1..=steps {
        let t = state.t;
        let mut next = rk4_step(&state, dt, op, params).map_err(|e| Error::StepFailed {
            step,
            t,
            source: Box::new(e),
        })?;
        let size = next.h.max_abs().max(next.m.max_abs());
        if !(size <= INSTABILITY_THRESHOLD) {
            return Err(Error::Instability {
                t: next.t,
                max_abs: size,
            });
        }
        if step == steps {
            next.t = t_end;
        }
        if step % stride == 0 || step == steps {
            observer(step, &next)?;
        }
        state = next;
    }
    Ok(ReferenceRun {
        final_state: state,
        steps,
        dt,
    })
}
