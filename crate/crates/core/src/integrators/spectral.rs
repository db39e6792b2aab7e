use crate::diff::{DiffKind, DiffOperator};
use crate::error::{Error, Result};
use crate::grid::Params;
use crate::linalg::DenseLu;
use crate::structure::{build_k, build_m, comp, grad_s, hess_s, SkewForm, ZField, ZState, DIM};

use super::newton::{self, NonlinearSystem};
use super::{BoxSchemeConfig, StepOutcome};

/// Implicit midpoint in time with Fourier differentiation in space. The
/// Jacobian is dense; its factorisation is reused across Newton iterations
/// until the residual stops contracting quickly.
struct SpectralSystem<'a> {
    old: &'a [f64],
    n: usize,
    slope: f64,
    dt: f64,
    params: Params,
    op: DiffOperator,
    dense_d: Vec<f64>,
    m: SkewForm,
    k: SkewForm,
    lu: Option<DenseLu>,
}

impl<'a> SpectralSystem<'a> {
    fn new(z: &'a ZState, dt: f64, params: &Params) -> Self {
        let grid = z.grid();
        let op = DiffOperator::new(DiffKind::Fourier, grid);
        Self {
            old: z.fields().data(),
            n: grid.n(),
            slope: z.phi_slope(),
            dt,
            params: *params,
            dense_d: Vec::new(),
            op,
            m: build_m(),
            k: build_k(),
            lu: None,
        }
    }

    fn midpoint(&self, new: &[f64]) -> Vec<f64> {
        new.iter()
            .zip(self.old)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    fn residual_vec(&self, new: &[f64]) -> Vec<f64> {
        let mid = self.midpoint(new);
        let mut mid_x = vec![0.0; mid.len()];
        for c in 0..DIM {
            let comp_values: Vec<f64> = mid.iter().skip(c).step_by(DIM).copied().collect();
            for (i, d) in self.op.apply(&comp_values).into_iter().enumerate() {
                mid_x[DIM * i + c] = d;
            }
        }
        let mut r = vec![0.0; mid.len()];
        for i in 0..self.n {
            let range = DIM * i..DIM * (i + 1);
            let node: [f64; DIM] = mid[range.clone()].try_into().expect("node width");
            let time_diff: Vec<f64> = new[range.clone()]
                .iter()
                .zip(&self.old[range.clone()])
                .map(|(a, b)| (a - b) / self.dt)
                .collect();
            let mut space = mid_x[range.clone()].to_vec();
            space[comp::PHI] += self.slope;
            let out = &mut r[range];
            for (o, gr) in out.iter_mut().zip(grad_s(&node, &self.params)) {
                *o = -gr;
            }
            self.m.apply_add(1.0, &time_diff, out);
            self.k.apply_add(1.0, &space, out);
        }
        r
    }

    fn jacobian(&mut self, new: &[f64]) -> Vec<f64> {
        let n = self.n;
        if self.dense_d.is_empty() {
            self.dense_d = self.op.dense_matrix();
        }
        let size = DIM * n;
        let mut jac = vec![0.0; size * size];
        let mid = self.midpoint(new);
        for i in 0..n {
            let node: [f64; DIM] = mid[DIM * i..DIM * (i + 1)].try_into().expect("node width");
            let hess = hess_s(&node, &self.params);
            for r in 0..DIM {
                let row = (DIM * i + r) * size;
                for c in 0..DIM {
                    jac[row + DIM * i + c] -= 0.5 * hess[r][c];
                }
            }
            for &(r, c, coef) in self.m.entries() {
                jac[(DIM * i + r) * size + DIM * i + c] += coef / self.dt;
            }
            for j in 0..n {
                let d = self.dense_d[i * n + j];
                if d == 0.0 {
                    continue;
                }
                for &(r, c, coef) in self.k.entries() {
                    jac[(DIM * i + r) * size + DIM * j + c] += 0.5 * coef * d;
                }
            }
        }
        jac
    }
}

impl NonlinearSystem for SpectralSystem<'_> {
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.residual_vec(x)
    }

    fn solve_linearized(&mut self, x: &[f64], rhs: &[f64], refresh: bool) -> Result<Vec<f64>> {
        if refresh || self.lu.is_none() {
            let jac = self.jacobian(x);
            let lu = DenseLu::factor(DIM * self.n, &jac).map_err(|e| Error::SingularJacobian {
                row: e.row / DIM,
                pivot: e.pivot,
                hint: "the linearised midpoint step is degenerate at this state; try a smaller \
                       time step"
                    .to_string(),
            })?;
            self.lu = Some(lu);
        }
        Ok(self.lu.as_ref().expect("factorised above").solve(rhs))
    }

    fn reuses_jacobian(&self) -> bool {
        true
    }
}

fn step(
    z: &ZState,
    guess: ZField,
    dt: f64,
    cfg: &BoxSchemeConfig,
    params: &Params,
) -> Result<StepOutcome> {
    cfg.validate()?;
    z.grid().check_same(&guess.grid())?;
    let mut sys = SpectralSystem::new(z, dt, params);
    let sol = newton::solve(
        &mut sys,
        guess.into_data(),
        cfg.newton_tol,
        cfg.newton_max_iter,
        cfg.damping,
    )?;
    let fields = ZField::from_data(z.grid(), sol.x)?;
    Ok(StepOutcome {
        state: ZState::new(fields, z.phi_slope(), z.t() + dt)?,
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

/// Advances one implicit-midpoint step with Fourier differentiation.
pub fn spectral_midpoint_step(
    z: &ZState,
    cfg: &BoxSchemeConfig,
    params: &Params,
) -> Result<StepOutcome> {
    step(z, z.fields().clone(), cfg.dt, cfg, params)
}

/// As [`spectral_midpoint_step`] with an explicit Newton starting point.
pub fn spectral_midpoint_step_with_guess(
    z: &ZState,
    guess: &ZField,
    cfg: &BoxSchemeConfig,
    params: &Params,
) -> Result<StepOutcome> {
    step(z, guess.clone(), cfg.dt, cfg, params)
}

/// Nodal residual of the midpoint equations for the pair `(z_n, z_np1)`.
pub fn spectral_midpoint_residual(
    z_n: &ZState,
    z_np1: &ZState,
    cfg: &BoxSchemeConfig,
    params: &Params,
) -> Result<ZField> {
    z_n.grid().check_same(&z_np1.grid())?;
    let sys = SpectralSystem::new(z_n, cfg.dt, params);
    ZField::from_data(z_n.grid(), sys.residual_vec(z_np1.fields().data()))
}
