use crate::error::{Error, Result};
use crate::grid::{Grid1D, Params};
use crate::linalg::{CyclicBandLu, CyclicBandMatrix, SingularPivot};
use crate::structure::{build_k, build_m, comp, grad_s, hess_s, SkewForm, ZField, ZState, DIM};

use super::newton::{self, NonlinearSystem};
use super::twoform::TangentPair;
use super::{BoxSchemeConfig, StepOutcome};

/// Time weight of the midpoint box scheme.
const MIDPOINT: f64 = 0.5;
/// Time weight of the fully implicit Euler variant.
const IMPLICIT_EULER: f64 = 1.0;
/// Scalar half-bandwidth of the cell Jacobian: a cell couples the eight
/// unknowns of two neighbouring nodes.
const HALF_BANDWIDTH: usize = 2 * DIM - 1;

/// One cell-centred time step with time weight `theta` (`1/2` for the box
/// scheme). The unknown is the node-major state at the new time level.
struct BoxSystem<'a> {
    old: &'a [f64],
    n: usize,
    even: bool,
    slope: f64,
    dt: f64,
    dx: f64,
    theta: f64,
    params: Params,
    m: SkewForm,
    k: SkewForm,
}

impl<'a> BoxSystem<'a> {
    fn new(z: &'a ZState, dt: f64, theta: f64, params: &Params) -> Self {
        let grid = z.grid();
        Self {
            old: z.fields().data(),
            n: grid.n(),
            even: grid.is_even(),
            slope: z.phi_slope(),
            dt,
            dx: grid.dx(),
            theta,
            params: *params,
            m: build_m(),
            k: build_k(),
        }
    }

    fn node(data: &[f64], i: usize) -> &[f64] {
        &data[DIM * i..DIM * (i + 1)]
    }

    /// Time-weighted state at node `i`.
    fn weighted(&self, new: &[f64], i: usize) -> [f64; DIM] {
        let a = Self::node(new, i);
        let b = Self::node(self.old, i);
        std::array::from_fn(|c| self.theta * a[c] + (1.0 - self.theta) * b[c])
    }

    /// Space-time centre of cell `i` (between nodes `i` and `i + 1`).
    fn centre(&self, new: &[f64], i: usize) -> [f64; DIM] {
        let a = self.weighted(new, i);
        let b = self.weighted(new, (i + 1) % self.n);
        std::array::from_fn(|c| 0.5 * (a[c] + b[c]))
    }

    fn cell_residual(&self, new: &[f64], i: usize, out: &mut [f64]) {
        let j = (i + 1) % self.n;
        let (a1, b1) = (Self::node(new, i), Self::node(new, j));
        let (a0, b0) = (Self::node(self.old, i), Self::node(self.old, j));
        let time_diff: [f64; DIM] =
            std::array::from_fn(|c| 0.5 * (a1[c] + b1[c] - a0[c] - b0[c]) / self.dt);
        let wi = self.weighted(new, i);
        let wj = self.weighted(new, j);
        let mut space_diff: [f64; DIM] = std::array::from_fn(|c| (wj[c] - wi[c]) / self.dx);
        space_diff[comp::PHI] += self.slope;
        let grad = grad_s(&self.centre(new, i), &self.params);
        out.iter_mut().zip(grad).for_each(|(o, gr)| *o = -gr);
        self.m.apply_add(1.0, &time_diff, out);
        self.k.apply_add(1.0, &space_diff, out);
    }

    fn residual_vec(&self, new: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.n * DIM];
        for (i, out) in r.chunks_exact_mut(DIM).enumerate() {
            self.cell_residual(new, i, out);
        }
        r
    }

    /// Derivative of the residual of every cell with respect to the state at
    /// one time level: `new_level` selects the new level (weight `theta`) or
    /// the old one (weight `1 - theta`).
    fn jacobian(&self, new: &[f64], new_level: bool) -> CyclicBandMatrix {
        let (time_sign, weight) = if new_level {
            (1.0, self.theta)
        } else {
            (-1.0, 1.0 - self.theta)
        };
        let mut jac = CyclicBandMatrix::zeros(self.n * DIM, HALF_BANDWIDTH);
        for i in 0..self.n {
            let j = (i + 1) % self.n;
            let hess = hess_s(&self.centre(new, i), &self.params);
            for (node, side) in [(i, -1.0), (j, 1.0)] {
                for r in 0..DIM {
                    for c in 0..DIM {
                        let v = -0.5 * weight * hess[r][c];
                        if v != 0.0 {
                            jac.add(DIM * i + r, DIM * node + c, v);
                        }
                    }
                }
                for &(r, c, coef) in self.m.entries() {
                    jac.add(
                        DIM * i + r,
                        DIM * node + c,
                        time_sign * 0.5 * coef / self.dt,
                    );
                }
                for &(r, c, coef) in self.k.entries() {
                    jac.add(DIM * i + r, DIM * node + c, side * weight * coef / self.dx);
                }
            }
        }
        jac
    }

    fn factor(&self, jac: CyclicBandMatrix) -> Result<CyclicBandLu> {
        jac.factor().map_err(|e| singular_error(e, self.even))
    }
}

fn singular_error(e: SingularPivot, even: bool) -> Error {
    let hint = if even {
        "the grid has an even number of points, where two-point cell averaging has an \
         alternating null mode on a periodic domain; use an odd number of points"
    } else {
        "the linearised step is degenerate at this state; try a smaller time step"
    };
    Error::SingularJacobian {
        row: e.row / DIM,
        pivot: e.pivot,
        hint: hint.to_string(),
    }
}

impl NonlinearSystem for BoxSystem<'_> {
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.residual_vec(x)
    }

    fn solve_linearized(&mut self, x: &[f64], rhs: &[f64], _refresh: bool) -> Result<Vec<f64>> {
        let lu = self.factor(self.jacobian(x, true))?;
        Ok(lu.solve(rhs))
    }
}

fn step(
    z: &ZState,
    guess: ZField,
    dt: f64,
    theta: f64,
    cfg: &BoxSchemeConfig,
    params: &Params,
) -> Result<StepOutcome> {
    cfg.validate()?;
    z.grid().check_same(&guess.grid())?;
    let mut sys = BoxSystem::new(z, dt, theta, params);
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

/// Advances one box-scheme step of length `cfg.dt`, starting Newton from `z`.
pub fn box_step(z: &ZState, cfg: &BoxSchemeConfig, params: &Params) -> Result<StepOutcome> {
    step(z, z.fields().clone(), cfg.dt, MIDPOINT, cfg, params)
}

/// As [`box_step`] with an explicit Newton starting point.
pub fn box_step_with_guess(
    z: &ZState,
    guess: &ZField,
    cfg: &BoxSchemeConfig,
    params: &Params,
) -> Result<StepOutcome> {
    step(z, guess.clone(), cfg.dt, MIDPOINT, cfg, params)
}

/// One box-scheme step of length `-cfg.dt`.
pub fn box_step_backward(
    z: &ZState,
    cfg: &BoxSchemeConfig,
    params: &Params,
) -> Result<StepOutcome> {
    step(z, z.fields().clone(), -cfg.dt, MIDPOINT, cfg, params)
}

/// Fully implicit Euler step with the same cell averaging in space. Not
/// multi-symplectic; used as a negative control.
pub fn euler_box_step(z: &ZState, cfg: &BoxSchemeConfig, params: &Params) -> Result<StepOutcome> {
    step(z, z.fields().clone(), cfg.dt, IMPLICIT_EULER, cfg, params)
}

/// Per-cell box-scheme residual of the pair `(z_n, z_np1)` with step `cfg.dt`.
/// Entry `8 i + r` is row `r` of cell `i`.
pub fn box_residual(
    z_n: &ZState,
    z_np1: &ZState,
    cfg: &BoxSchemeConfig,
    params: &Params,
) -> Result<ZField> {
    z_n.grid().check_same(&z_np1.grid())?;
    let sys = BoxSystem::new(z_n, cfg.dt, MIDPOINT, params);
    ZField::from_data(z_n.grid(), sys.residual_vec(z_np1.fields().data()))
}

fn tangent(
    z_n: &ZState,
    z_np1: &ZState,
    pair: &TangentPair,
    theta: f64,
    cfg: &BoxSchemeConfig,
    params: &Params,
) -> Result<TangentPair> {
    let grid: Grid1D = z_n.grid();
    grid.check_same(&z_np1.grid())?;
    grid.check_same(&pair.first.grid())?;
    grid.check_same(&pair.second.grid())?;
    let sys = BoxSystem::new(z_n, cfg.dt, theta, params);
    let new = z_np1.fields().data();
    let lu = sys.factor(sys.jacobian(new, true))?;
    let old_jac = sys.jacobian(new, false);
    let propagate = |dz: &ZField| -> Result<ZField> {
        let rhs: Vec<f64> = old_jac.matvec(dz.data()).iter().map(|v| -v).collect();
        ZField::from_data(grid, lu.solve(&rhs))
    };
    Ok(TangentPair {
        first: propagate(&pair.first)?,
        second: propagate(&pair.second)?,
    })
}

/// Pushes both perturbations of `pair` through the linearisation of the box
/// step `z_n -> z_np1`.
pub fn tangent_box_step(
    z_n: &ZState,
    z_np1: &ZState,
    pair: &TangentPair,
    cfg: &BoxSchemeConfig,
    params: &Params,
) -> Result<TangentPair> {
    tangent(z_n, z_np1, pair, MIDPOINT, cfg, params)
}

/// Linearisation of [`euler_box_step`].
pub fn tangent_euler_box_step(
    z_n: &ZState,
    z_np1: &ZState,
    pair: &TangentPair,
    cfg: &BoxSchemeConfig,
    params: &Params,
) -> Result<TangentPair> {
    tangent(z_n, z_np1, pair, IMPLICIT_EULER, cfg, params)
}
