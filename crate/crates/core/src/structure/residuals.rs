//! Pointwise residuals of the multi-symplectic system, of the physical
//! balance laws in `(h, u)`, and of the Euler-Lagrange equations of the
//! relaxed Lagrangian. Time derivatives are always supplied by the caller.

use super::comp::{H, PHI, U, V};
use super::hamiltonian::grad_s;
use super::skew::{build_k, build_m};
use super::state::{ZField, ZState};
use super::DIM;
use crate::diff::DiffOperator;
use crate::error::Result;
use crate::grid::{check_positive_depth, Field, Grid1D, Params, PhysicalState};

const THIRD: f64 = 1.0 / 3.0;
const SIXTH: f64 = 1.0 / 6.0;

/// `M z_t + K z_x - grad S(z)` at every node.
pub fn ms_residual(z: &ZState, z_t: &ZField, op: &DiffOperator, params: &Params) -> Result<ZField> {
    let grid = z.grid();
    grid.check_same(&z_t.grid())?;
    let zx = z.dx(op)?;
    let (m, k) = (build_m(), build_k());
    let mut out = ZField::zeros(grid);
    let data = out.data_mut();
    for i in 0..grid.n() {
        let gs = grad_s(&z.node(i), params);
        let row = &mut data[DIM * i..DIM * (i + 1)];
        m.apply_add(1.0, &z_t.data()[DIM * i..DIM * (i + 1)], row);
        k.apply_add(1.0, &zx.data()[DIM * i..DIM * (i + 1)], row);
        for c in 0..DIM {
            row[c] -= gs[c];
        }
    }
    Ok(out)
}

/// Caller-supplied time derivatives of the physical fields.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDerivatives {
    pub h_t: Field,
    pub u_t: Field,
    /// Mixed derivative `u_xt`.
    pub u_xt: Field,
}

impl TimeDerivatives {
    /// Derivatives of a profile translating at `speed`: `d/dt = -speed d/dx`.
    pub fn traveling(state: &PhysicalState, speed: f64, op: &DiffOperator) -> Result<Self> {
        let hx = op.derivative(state.h())?;
        let ux = op.derivative(state.u())?;
        let uxx = op.derivative(&ux)?;
        Ok(Self {
            h_t: hx.map(|v| -speed * v),
            u_t: ux.map(|v| -speed * v),
            u_xt: uxx.map(|v| -speed * v),
        })
    }

    fn check(&self, grid: Grid1D) -> Result<()> {
        grid.check_same(&self.h_t.grid())?;
        grid.check_same(&self.u_t.grid())?;
        grid.check_same(&self.u_xt.grid())
    }
}

fn field(grid: Grid1D, values: Vec<f64>) -> Field {
    Field::new(grid, values).expect("length matches grid")
}

/// Vertical acceleration at the free surface, `h (u_x^2 - u_xt - u u_xx)`.
pub fn gamma(state: &PhysicalState, u_xt: &Field, op: &DiffOperator) -> Result<Field> {
    let grid = state.grid();
    grid.check_same(&u_xt.grid())?;
    let (h, u) = (state.h().values(), state.u().values());
    let ux = op.apply(u);
    let uxx = op.apply(&ux);
    let uxt = u_xt.values();
    Ok(field(
        grid,
        (0..grid.n())
            .map(|i| h[i] * (ux[i] * ux[i] - uxt[i] - u[i] * uxx[i]))
            .collect(),
    ))
}

/// Mass: `h_t + (h u)_x`.
pub fn residual_mass(state: &PhysicalState, h_t: &Field, op: &DiffOperator) -> Result<Field> {
    let grid = state.grid();
    grid.check_same(&h_t.grid())?;
    grid.check_same(&op.grid())?;
    let flux: Vec<f64> = state
        .h()
        .values()
        .iter()
        .zip(state.u().values())
        .map(|(h, u)| h * u)
        .collect();
    let dflux = op.apply(&flux);
    Ok(field(
        grid,
        h_t.values()
            .iter()
            .zip(&dflux)
            .map(|(a, b)| a + b)
            .collect(),
    ))
}

/// Non-conservative momentum: `u_t + u u_x + g h_x + (h^2 gamma)_x / (3 h)`.
pub fn residual_momentum(
    state: &PhysicalState,
    u_t: &Field,
    u_xt: &Field,
    op: &DiffOperator,
    params: &Params,
) -> Result<Field> {
    let grid = state.grid();
    grid.check_same(&u_t.grid())?;
    grid.check_same(&op.grid())?;
    check_positive_depth(state.h().values())?;
    let (h, u) = (state.h().values(), state.u().values());
    let gam = gamma(state, u_xt, op)?;
    let h2g: Vec<f64> = h.iter().zip(gam.values()).map(|(h, g)| h * h * g).collect();
    let dh2g = op.apply(&h2g);
    let ux = op.apply(u);
    let hx = op.apply(h);
    let ut = u_t.values();
    Ok(field(
        grid,
        (0..grid.n())
            .map(|i| ut[i] + u[i] * ux[i] + params.g * hx[i] + THIRD * dh2g[i] / h[i])
            .collect(),
    ))
}

struct Common {
    h: Vec<f64>,
    u: Vec<f64>,
    ux: Vec<f64>,
    gamma: Vec<f64>,
}

fn common(state: &PhysicalState, td: &TimeDerivatives, op: &DiffOperator) -> Result<Common> {
    let grid = state.grid();
    td.check(grid)?;
    grid.check_same(&op.grid())?;
    check_positive_depth(state.h().values())?;
    Ok(Common {
        h: state.h().values().to_vec(),
        u: state.u().values().to_vec(),
        ux: op.apply(state.u().values()),
        gamma: gamma(state, &td.u_xt, op)?.into_values(),
    })
}

/// `(hu)_t + (h u^2 + g h^2/2 + h^2 gamma/3)_x`.
pub fn residual_momentum_flux(
    state: &PhysicalState,
    td: &TimeDerivatives,
    op: &DiffOperator,
    params: &Params,
) -> Result<Field> {
    let Common { h, u, gamma, .. } = common(state, td, op)?;
    let n = h.len();
    let g = params.g;
    let flux: Vec<f64> = (0..n)
        .map(|i| h[i] * u[i] * u[i] + 0.5 * g * h[i] * h[i] + THIRD * h[i] * h[i] * gamma[i])
        .collect();
    let dflux = op.apply(&flux);
    let (ht, ut) = (td.h_t.values(), td.u_t.values());
    Ok(field(
        state.grid(),
        (0..n)
            .map(|i| ht[i] * u[i] + h[i] * ut[i] + dflux[i])
            .collect(),
    ))
}

/// Energy density `h u^2/2 + h^3 u_x^2/6 + g h^2/2` with flux
/// `(u^2/2 + h^2 u_x^2/6 + g h + h gamma/3) h u`.
pub fn residual_energy(
    state: &PhysicalState,
    td: &TimeDerivatives,
    op: &DiffOperator,
    params: &Params,
) -> Result<Field> {
    let Common { h, u, ux, gamma } = common(state, td, op)?;
    let n = h.len();
    let g = params.g;
    let flux: Vec<f64> = (0..n)
        .map(|i| {
            (0.5 * u[i] * u[i]
                + SIXTH * h[i] * h[i] * ux[i] * ux[i]
                + g * h[i]
                + THIRD * h[i] * gamma[i])
                * h[i]
                * u[i]
        })
        .collect();
    let dflux = op.apply(&flux);
    let (ht, ut, uxt) = (td.h_t.values(), td.u_t.values(), td.u_xt.values());
    Ok(field(
        state.grid(),
        (0..n)
            .map(|i| {
                let dens_t = 0.5 * ht[i] * u[i] * u[i]
                    + h[i] * u[i] * ut[i]
                    + 0.5 * h[i] * h[i] * ht[i] * ux[i] * ux[i]
                    + THIRD * h[i].powi(3) * ux[i] * uxt[i]
                    + g * h[i] * ht[i];
                dens_t + dflux[i]
            })
            .collect(),
    ))
}

/// Tangential momentum `u - (h^3 u_x)_x / (3h)` with flux
/// `u^2/2 + g h - h^2 u_x^2/2 - u (h^3 u_x)_x / (3h)`.
pub fn residual_tangential(
    state: &PhysicalState,
    td: &TimeDerivatives,
    op: &DiffOperator,
    params: &Params,
) -> Result<Field> {
    let Common { h, u, ux, .. } = common(state, td, op)?;
    let n = h.len();
    let g = params.g;
    let h3ux: Vec<f64> = (0..n).map(|i| h[i].powi(3) * ux[i]).collect();
    let d_h3ux = op.apply(&h3ux);
    let flux: Vec<f64> = (0..n)
        .map(|i| {
            0.5 * u[i] * u[i] + g * h[i]
                - 0.5 * h[i] * h[i] * ux[i] * ux[i]
                - THIRD * u[i] * d_h3ux[i] / h[i]
        })
        .collect();
    let dflux = op.apply(&flux);
    let (ht, ut, uxt) = (td.h_t.values(), td.u_t.values(), td.u_xt.values());
    // d/dt (h^3 u_x) = 3 h^2 h_t u_x + h^3 u_xt
    let h3ux_t: Vec<f64> = (0..n)
        .map(|i| 3.0 * h[i] * h[i] * ht[i] * ux[i] + h[i].powi(3) * uxt[i])
        .collect();
    let d_h3ux_t = op.apply(&h3ux_t);
    Ok(field(
        state.grid(),
        (0..n)
            .map(|i| {
                let dens_t =
                    ut[i] - THIRD * (d_h3ux_t[i] / h[i] - ht[i] * d_h3ux[i] / (h[i] * h[i]));
                dens_t + dflux[i]
            })
            .collect(),
    ))
}

/// Nodal inputs of the relaxed Lagrangian: depth `h`, potential `phi`,
/// velocity `u`, vertical velocity `v`, multiplier `mu`, and the derivatives
/// that appear in the Euler-Lagrange equations.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFields {
    pub h: Field,
    pub h_t: Field,
    pub h_x: Field,
    pub phi: Field,
    pub phi_t: Field,
    pub phi_x: Field,
    pub u: Field,
    pub v: Field,
    pub v_t: Field,
    pub v_x: Field,
    pub mu: Field,
    pub mu_x: Field,
}

impl LagrangianFields {
    /// Reads the fields off a lifted state with `mu = u`, given its time
    /// derivative.
    pub fn from_state(z: &ZState, z_t: &ZField, op: &DiffOperator) -> Result<Self> {
        let grid = z.grid();
        grid.check_same(&z_t.grid())?;
        let zx = z.dx(op)?;
        let f = |c: usize| z.component(c);
        Ok(Self {
            h: f(H),
            h_t: z_t.component(H),
            h_x: zx.component(H),
            phi: field(grid, z.phi_full()),
            phi_t: z_t.component(PHI),
            phi_x: zx.component(PHI),
            u: f(U),
            v: f(V),
            v_t: z_t.component(V),
            v_x: zx.component(V),
            mu: f(U),
            mu_x: zx.component(U),
        })
    }

    fn grid(&self) -> Grid1D {
        self.h.grid()
    }

    fn check(&self) -> Result<()> {
        let g = self.grid();
        for f in [
            &self.h_t,
            &self.h_x,
            &self.phi,
            &self.phi_t,
            &self.phi_x,
            &self.u,
            &self.v,
            &self.v_t,
            &self.v_x,
            &self.mu,
            &self.mu_x,
        ] {
            g.check_same(&f.grid())?;
        }
        Ok(())
    }
}

/// Relaxed Lagrangian density with the impermeability constraint
/// `nu = h_t + mu h_x` substituted.
pub fn lagrangian_density(f: &LagrangianFields, params: &Params) -> Result<Field> {
    f.check()?;
    let g = params.g;
    let n = f.grid().n();
    let v = |x: &Field, i: usize| x.values()[i];
    Ok(field(
        f.grid(),
        (0..n)
            .map(|i| {
                let (h, mu, u, vv, phi) = (
                    v(&f.h, i),
                    v(&f.mu, i),
                    v(&f.u, i),
                    v(&f.v, i),
                    v(&f.phi, i),
                );
                let nu = v(&f.h_t, i) + mu * v(&f.h_x, i);
                nu * phi - 0.5 * g * h * h
                    + h * (mu * u - 0.5 * u * u + THIRD * nu * vv - SIXTH * vv * vv
                        + phi * v(&f.mu_x, i))
            })
            .collect(),
    ))
}

/// The five Euler-Lagrange residuals, in the order of variations
/// `u`, `v`, `mu`, `phi`, `h`.
pub fn el_residuals(f: &LagrangianFields, params: &Params) -> Result<[Field; 5]> {
    f.check()?;
    let g = params.g;
    let n = f.grid().n();
    let mut out: [Vec<f64>; 5] = Default::default();
    for o in out.iter_mut() {
        o.reserve(n);
    }
    for i in 0..n {
        let at = |x: &Field| x.values()[i];
        let (h, ht, hx) = (at(&f.h), at(&f.h_t), at(&f.h_x));
        let (u, v, mu, mux) = (at(&f.u), at(&f.v), at(&f.mu), at(&f.mu_x));
        let (phix, phit) = (at(&f.phi_x), at(&f.phi_t));
        out[0].push(mu - u);
        out[1].push(ht + mu * hx - v);
        out[2].push(u + THIRD * v * hx - phix);
        out[3].push(ht + hx * mu + h * mux);
        out[4].push(
            mu * u
                - 0.5 * u * u
                - SIXTH * v * v
                - mu * phix
                - phit
                - g * h
                - THIRD * h * (at(&f.v_t) + mu * at(&f.v_x) + v * mux),
        );
    }
    let grid = f.grid();
    Ok(out.map(|vals| field(grid, vals)))
}

/// Euler-Lagrange residuals rewritten as rows of the multi-symplectic system
/// after substituting `mu = u`, `p = h v`, `q = h u`, `r = h u v`, `s = h_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MsRowsFromEl {
    /// Row `(Sh)`: `-EL_h + (v/3) EL_v + u EL_mu`.
    pub sh: Field,
    /// Row `(Sphi)`: `-EL_phi`.
    pub sphi: Field,
    /// Row `(Sp)`: `-EL_v / 3`.
    pub sp: Field,
    /// Row `(Sq)`: `-EL_mu`.
    pub sq: Field,
}

pub fn el_as_ms_rows(el: &[Field; 5], f: &LagrangianFields) -> Result<MsRowsFromEl> {
    f.check()?;
    let grid = f.grid();
    let n = grid.n();
    let (u, v) = (f.u.values(), f.v.values());
    let (e_v, e_mu, e_h) = (el[1].values(), el[2].values(), el[4].values());
    Ok(MsRowsFromEl {
        sh: field(
            grid,
            (0..n)
                .map(|i| -e_h[i] + THIRD * v[i] * e_v[i] + u[i] * e_mu[i])
                .collect(),
        ),
        sphi: el[3].map(|x| -x),
        sp: field(grid, e_v.iter().map(|x| -THIRD * x).collect()),
        sq: field(grid, e_mu.iter().map(|x| -x).collect()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::DiffKind;
    use crate::structure::comp::{P, Q, S};
    use crate::structure::state::lift;

    fn still(g: Grid1D, h0: f64) -> PhysicalState {
        PhysicalState::new(Field::constant(g, h0), Field::zeros(g), 0.0).unwrap()
    }

    #[test]
    fn still_water_ms_residual_vanishes_with_bernoulli_drift() {
        let g = Grid1D::new(10.0, 16).unwrap();
        let op = DiffOperator::new(DiffKind::Fourier, g);
        let params = Params { g: 2.0 };
        let z = lift(&still(g, 0.7), &op).unwrap();
        let mut zt = ZField::zeros(g);
        zt.set_component(PHI, &[-2.0 * 0.7; 16]);
        let r = ms_residual(&z, &zt, &op, &params).unwrap();
        assert!(r.max_abs() < 1e-15);
    }

    #[test]
    fn algebraic_row_reports_momentum_mismatch() {
        let g = Grid1D::new(10.0, 16).unwrap();
        let op = DiffOperator::new(DiffKind::Fd2, g);
        let mut f = ZField::zeros(g);
        let (h, u, v, p, q, s) = (1.2, 0.3, 0.1, 0.5, 0.9, 0.0);
        for (c, val) in [(H, h), (U, u), (V, v), (P, p), (Q, q), (S, s)] {
            f.set_component(c, &[val; 16]);
        }
        let z = ZState::new(f, 0.0, 0.0).unwrap();
        let r = ms_residual(&z, &ZField::zeros(g), &op, &Params::default()).unwrap();
        let expect = h * u - q - s / 3.0 * (p - h * v);
        assert!((r.node(3)[U] - expect).abs() < 1e-15);
    }

    #[test]
    fn physical_residuals_vanish_for_still_water_and_uniform_flow() {
        let g = Grid1D::new(10.0, 32).unwrap();
        let op = DiffOperator::new(DiffKind::Fourier, g);
        let params = Params::default();
        for st in [
            still(g, 1.0),
            PhysicalState::new(Field::constant(g, 2.0), Field::constant(g, 0.3), 0.0).unwrap(),
        ] {
            let td = TimeDerivatives {
                h_t: Field::zeros(g),
                u_t: Field::zeros(g),
                u_xt: Field::zeros(g),
            };
            assert!(residual_mass(&st, &td.h_t, &op).unwrap().max_abs() < 1e-14);
            assert!(
                residual_momentum(&st, &td.u_t, &td.u_xt, &op, &params)
                    .unwrap()
                    .max_abs()
                    < 1e-14
            );
            assert!(
                residual_momentum_flux(&st, &td, &op, &params)
                    .unwrap()
                    .max_abs()
                    < 1e-13
            );
            assert!(residual_energy(&st, &td, &op, &params).unwrap().max_abs() < 1e-13);
            assert!(
                residual_tangential(&st, &td, &op, &params)
                    .unwrap()
                    .max_abs()
                    < 1e-13
            );
        }
        // A depth bump without flow has no mass flux.
        let bump = PhysicalState::new(
            Field::from_fn(g, |x| {
                1.0 + 0.1 * (2.0 * std::f64::consts::PI * x / 10.0).cos()
            }),
            Field::zeros(g),
            0.0,
        )
        .unwrap();
        assert!(
            residual_mass(&bump, &Field::zeros(g), &op)
                .unwrap()
                .max_abs()
                < 1e-15
        );
    }

    #[test]
    fn lagrangian_simple_values() {
        let g = Grid1D::new(10.0, 8).unwrap();
        let z = Field::zeros(g);
        let mk = |h: f64| LagrangianFields {
            h: Field::constant(g, h),
            h_t: z.clone(),
            h_x: z.clone(),
            phi: z.clone(),
            phi_t: z.clone(),
            phi_x: z.clone(),
            u: z.clone(),
            v: z.clone(),
            v_t: z.clone(),
            v_x: z.clone(),
            mu: z.clone(),
            mu_x: z.clone(),
        };
        let l = lagrangian_density(&mk(1.0), &Params { g: 1.0 }).unwrap();
        assert!(l.values().iter().all(|&v| v == -0.5));
        let l = lagrangian_density(&mk(0.8), &Params { g: 9.81 }).unwrap();
        assert!(l
            .values()
            .iter()
            .all(|&v| (v + 0.5 * 9.81 * 0.64).abs() < 1e-15));

        let mut still = mk(0.8);
        still.phi_t = Field::constant(g, -9.81 * 0.8);
        let el = el_residuals(&still, &Params { g: 9.81 }).unwrap();
        assert!(el.iter().all(|f| f.max_abs() < 1e-15));

        let mut off = mk(1.0);
        off.mu = Field::constant(g, 0.25);
        off.u = Field::constant(g, 0.1);
        let el = el_residuals(&off, &Params { g: 1.0 }).unwrap();
        assert!(el[0].values().iter().all(|&v| v == 0.25 - 0.1));
    }
}
