use crate::error::{Error, Result};
use crate::grid::max_abs;
use crate::structure::{comp, DIM};

const MIN_STEP: f64 = 1.0 / 1024.0;
/// Residual contraction above which a reused Jacobian is refreshed.
const REFRESH_RATIO: f64 = 0.25;

pub(crate) trait NonlinearSystem {
    fn residual(&self, x: &[f64]) -> Vec<f64>;

    /// Returns `J^{-1} rhs`, with `J` evaluated at `x` when `refresh` is set
    /// (or whenever the system does not cache factorisations).
    fn solve_linearized(&mut self, x: &[f64], rhs: &[f64], refresh: bool) -> Result<Vec<f64>>;

    /// Whether `solve_linearized` may reuse an older factorisation.
    fn reuses_jacobian(&self) -> bool {
        false
    }
}

pub(crate) struct NewtonResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn first_dry(x: &[f64]) -> Option<(usize, f64)> {
    x.iter()
        .skip(comp::H)
        .step_by(DIM)
        .enumerate()
        .find(|(_, &h)| !(h > 0.0))
        .map(|(i, &h)| (i, h))
}

/// Damped Newton iteration on a node-major state vector; stops when the
/// residual max-norm is at most `tol`.
pub(crate) fn solve<S: NonlinearSystem>(
    sys: &mut S,
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
    damping: f64,
) -> Result<NewtonResult> {
    let mut x = x0;
    let mut r = sys.residual(&x);
    let mut norm = max_abs(&r);
    let mut trace = vec![norm];
    let mut iterations = 0;
    let mut refresh = true;
    while !(norm <= tol) {
        if iterations == max_iter || !norm.is_finite() {
            return Err(Error::NewtonDivergence {
                tol,
                final_residual: norm,
                trace,
            });
        }
        let delta = sys.solve_linearized(&x, &r, refresh)?;
        let mut step = damping;
        let (cand, cand_r, cand_norm) = loop {
            let cand: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a - step * d).collect();
            if let Some((index, value)) = first_dry(&cand) {
                if step <= MIN_STEP {
                    return Err(Error::DryState {
                        iteration: iterations,
                        index,
                        value,
                    });
                }
                step *= 0.5;
                continue;
            }
            let cand_r = sys.residual(&cand);
            let cand_norm = max_abs(&cand_r);
            if cand_norm < norm || step <= MIN_STEP {
                break (cand, cand_r, cand_norm);
            }
            step *= 0.5;
        };
        iterations += 1;
        refresh = sys.reuses_jacobian() && cand_norm > REFRESH_RATIO * norm;
        x = cand;
        r = cand_r;
        norm = cand_norm;
        trace.push(norm);
    }
    Ok(NewtonResult {
        x,
        iterations,
        residual: norm,
    })
}
