use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Params;
use crate::structure::ZState;

use super::{
    box_step_with_guess, extrapolate, spectral_midpoint_step_with_guess, BoxSchemeConfig,
    StepOutcome,
};

/// Time integrator selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Box,
    SpectralMidpoint,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Box => "box",
            Scheme::SpectralMidpoint => "spectral_midpoint",
        }
    }

    pub fn step_with_guess(
        self,
        z: &ZState,
        guess: &crate::structure::ZField,
        cfg: &BoxSchemeConfig,
        params: &Params,
    ) -> Result<StepOutcome> {
        match self {
            Scheme::Box => box_step_with_guess(z, guess, cfg, params),
            Scheme::SpectralMidpoint => spectral_midpoint_step_with_guess(z, guess, cfg, params),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box" => Ok(Scheme::Box),
            "spectral_midpoint" | "spectral" => Ok(Scheme::SpectralMidpoint),
            other => Err(Error::InvalidParameter {
                name: "scheme",
                reason: format!("unknown scheme '{other}' (expected box or spectral_midpoint)"),
            }),
        }
    }
}

/// State handed to the observer: the initial state (`step == 0`), every
/// `stride`-th step, and the final step.
#[derive(Debug, Clone, Copy)]
pub struct StepEvent<'a> {
    pub step: usize,
    pub state: &'a ZState,
    /// Newton iterations of this step (0 for the initial state).
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_state: ZState,
    pub steps: usize,
    /// Step actually used: the requested step shrunk so that a whole number
    /// of steps reaches `t_end`.
    pub dt: f64,
    pub total_iterations: usize,
    pub max_residual: f64,
}

/// Integrates from `initial.t()` to `t_end`. Step errors are wrapped with the
/// failing step index and start time.
pub fn run_simulation<F>(
    initial: &ZState,
    scheme: Scheme,
    cfg: &BoxSchemeConfig,
    params: &Params,
    t_end: f64,
    stride: usize,
    mut observer: F,
) -> Result<RunSummary>
where
    F: FnMut(StepEvent<'_>) -> Result<()>,
{
    cfg.validate()?;
    let span = t_end - initial.t();
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            reason: format!("must exceed the initial time {}", initial.t()),
        });
    }
    let stride = stride.max(1);
    let steps = ((span / cfg.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let step_cfg = BoxSchemeConfig {
        dt: span / steps as f64,
        ..*cfg
    };

    observer(StepEvent {
        step: 0,
        state: initial,
        iterations: 0,
        residual: 0.0,
    })?;
    let mut previous: Option<ZState> = None;
    let mut current = initial.clone();
    let mut total_iterations = 0;
    let mut max_residual: f64 = 0.0;
    for step in 1..=steps {
        let guess = match &previous {
            Some(prev) => extrapolate(&current, prev)?,
            None => current.fields().clone(),
        };
        let outcome = scheme
            .step_with_guess(&current, &guess, &step_cfg, params)
            .map_err(|e| Error::StepFailed {
                step,
                t: current.t(),
                source: Box::new(e),
            })?;
        total_iterations += outcome.iterations;
        max_residual = max_residual.max(outcome.residual);
        let mut next = outcome.state;
        if step == steps {
            next = ZState::new(next.into_fields(), initial.phi_slope(), t_end)?;
        }
        if step % stride == 0 || step == steps {
            observer(StepEvent {
                step,
                state: &next,
                iterations: outcome.iterations,
                residual: outcome.residual,
            })?;
        }
        previous = Some(std::mem::replace(&mut current, next));
    }
    Ok(RunSummary {
        final_state: current,
        steps,
        dt: step_cfg.dt,
        total_iterations,
        max_residual,
    })
}
