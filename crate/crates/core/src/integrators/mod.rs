//! Implicit time steppers for the multi-symplectic system.
//!
//! * [`box_step`]: the Preissmann box scheme on space-time cells.
//! * [`spectral_midpoint_step`]: implicit midpoint in time with Fourier
//!   differentiation in space.
//! * [`euler_box_step`]: fully implicit Euler in time with box averaging in
//!   space. It is not multi-symplectic and serves as a negative control.
//!
//! [`tangent_box_step`] propagates perturbations through the linearised box
//! map and [`discrete_twoform_residual`] evaluates the discrete
//! multi-symplectic conservation law on them.

mod box_scheme;
mod newton;
mod run;
mod spectral;
mod twoform;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{ZField, ZState};

pub use box_scheme::{
    box_residual, box_step, box_step_backward, box_step_with_guess, euler_box_step,
    tangent_box_step, tangent_euler_box_step,
};
pub use run::{run_simulation, RunSummary, Scheme, StepEvent};
pub use spectral::{
    spectral_midpoint_residual, spectral_midpoint_step, spectral_midpoint_step_with_guess,
};
pub use twoform::{discrete_twoform_residual, TangentPair};

/// Time step and Newton controls shared by the implicit schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSchemeConfig {
    pub dt: f64,
    /// Bound on the max-norm of the nonlinear residual at exit.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Initial Newton step length in `(0, 1]`; halved whenever a step would
    /// increase the residual.
    pub damping: f64,
}

impl BoxSchemeConfig {
    pub const DEFAULT_TOL: f64 = 1e-11;
    pub const DEFAULT_MAX_ITER: usize = 25;

    pub fn new(dt: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            newton_tol: Self::DEFAULT_TOL,
            newton_max_iter: Self::DEFAULT_MAX_ITER,
            damping: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        self.newton_tol = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", "time step must be positive");
        }
        if !(self.newton_tol > 0.0) {
            return bad("newton_tol", "tolerance must be positive");
        }
        if self.newton_max_iter == 0 {
            return bad("newton_max_iter", "need at least one iteration");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping", "must lie in (0, 1]");
        }
        Ok(())
    }
}

/// A converged step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: ZState,
    pub iterations: usize,
    /// Residual max-norm at exit.
    pub residual: f64,
}

/// Linear extrapolation `2 z^n - z^(n-1)`, the Newton starting point after
/// the first step.
pub fn extrapolate(current: &ZState, previous: &ZState) -> Result<ZField> {
    current.fields().scaled(2.0).axpy(-1.0, previous.fields())
}
