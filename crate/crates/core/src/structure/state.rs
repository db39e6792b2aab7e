use super::comp::{H, P, PHI, Q, R, S, U, V};
use super::DIM;
use crate::diff::DiffOperator;
use crate::error::{Error, Result};
use crate::grid::{check_positive_depth, max_abs, Field, Grid1D, PhysicalState};

/// Eight nodal fields stored node-major: entry `8 * i + c` is component `c`
/// at grid point `i`. Used for states, their derivatives and residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct ZField {
    grid: Grid1D,
    data: Vec<f64>,
}

impl ZField {
    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            data: vec![0.0; DIM * grid.n()],
        }
    }

    pub fn from_data(grid: Grid1D, data: Vec<f64>) -> Result<Self> {
        if data.len() != DIM * grid.n() {
            return Err(Error::InvalidParameter {
                name: "data",
                reason: format!("expected {} values, got {}", DIM * grid.n(), data.len()),
            });
        }
        Ok(Self { grid, data })
    }

    pub fn from_components(components: [&Field; DIM]) -> Result<Self> {
        let grid = components[0].grid();
        let mut out = Self::zeros(grid);
        for (c, f) in components.into_iter().enumerate() {
            grid.check_same(&f.grid())?;
            out.set_component(c, f.values());
        }
        Ok(out)
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn node(&self, i: usize) -> [f64; DIM] {
        let mut z = [0.0; DIM];
        z.copy_from_slice(&self.data[DIM * i..DIM * (i + 1)]);
        z
    }

    pub fn component_values(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(DIM).copied().collect()
    }

    pub fn component(&self, c: usize) -> Field {
        Field::new(self.grid, self.component_values(c)).expect("length matches grid")
    }

    pub fn set_component(&mut self, c: usize, values: &[f64]) {
        assert_eq!(values.len(), self.grid.n());
        for (i, &v) in values.iter().enumerate() {
            self.data[DIM * i + c] = v;
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn component_max_abs(&self, c: usize) -> f64 {
        self.data
            .iter()
            .skip(c)
            .step_by(DIM)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Per-component derivative; no secular part is added.
    pub fn dx(&self, op: &DiffOperator) -> ZField {
        let mut out = ZField::zeros(self.grid);
        for c in 0..DIM {
            out.set_component(c, &op.apply(&self.component_values(c)));
        }
        out
    }

    pub fn scaled(&self, a: f64) -> ZField {
        ZField {
            grid: self.grid,
            data: self.data.iter().map(|v| a * v).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &ZField) -> Result<ZField> {
        self.grid.check_same(&other.grid)?;
        Ok(ZField {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| x + a * y)
                .collect(),
        })
    }
}

/// Multi-symplectic state at time `t`.
///
/// `phi` is not periodic in general: `phi_x` has mean `phi_slope`. The stored
/// `phi` component is the periodic part, and the full potential is
/// `phi(x) = phi_periodic(x) + phi_slope * x` on `[0, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZState {
    fields: ZField,
    phi_slope: f64,
    t: f64,
}

impl ZState {
    pub fn new(fields: ZField, phi_slope: f64, t: f64) -> Result<Self> {
        check_positive_depth(&fields.component_values(H))?;
        Ok(Self {
            fields,
            phi_slope,
            t,
        })
    }

    pub(crate) fn new_unchecked(fields: ZField, phi_slope: f64, t: f64) -> Self {
        Self {
            fields,
            phi_slope,
            t,
        }
    }

    pub fn fields(&self) -> &ZField {
        &self.fields
    }

    pub fn into_fields(self) -> ZField {
        self.fields
    }

    pub fn grid(&self) -> Grid1D {
        self.fields.grid()
    }

    pub fn phi_slope(&self) -> f64 {
        self.phi_slope
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn node(&self, i: usize) -> [f64; DIM] {
        self.fields.node(i)
    }

    pub fn component(&self, c: usize) -> Field {
        self.fields.component(c)
    }

    /// Full potential including the secular part.
    pub fn phi_full(&self) -> Vec<f64> {
        let grid = self.grid();
        self.fields
            .component_values(PHI)
            .iter()
            .enumerate()
            .map(|(i, p)| p + self.phi_slope * grid.x(i))
            .collect()
    }

    /// `z_x` with the secular slope included in the `phi` row.
    pub fn dx(&self, op: &DiffOperator) -> Result<ZField> {
        self.grid().check_same(&op.grid())?;
        let mut d = self.fields.dx(op);
        for i in 0..self.grid().n() {
            d.data[DIM * i + PHI] += self.phi_slope;
        }
        Ok(d)
    }
}

/// Lifts `(h, u)` to the eight-component state using the algebraic
/// identifications `s = h_x`, `v = -h u_x`, `p = h v`, `q = h u`, `r = h u v`
/// and `phi_x = u + s v / 3`, with the gauge `phi(0) = 0`.
pub fn lift(state: &PhysicalState, op: &DiffOperator) -> Result<ZState> {
    let grid = state.grid();
    grid.check_same(&op.grid())?;
    let h = state.h().values();
    let u = state.u().values();
    check_positive_depth(h)?;
    let s = op.apply(h);
    let ux = op.apply(u);
    let n = grid.n();
    let mut z = ZField::zeros(grid);
    let mut w = vec![0.0; n];
    for i in 0..n {
        let v = -h[i] * ux[i];
        let node = &mut z.data[DIM * i..DIM * (i + 1)];
        node[H] = h[i];
        node[U] = u[i];
        node[V] = v;
        node[P] = h[i] * v;
        node[Q] = h[i] * u[i];
        node[R] = h[i] * u[i] * v;
        node[S] = s[i];
        w[i] = u[i] + s[i] * v / 3.0;
    }
    let (slope, periodic) = op.antiderivative_split(&Field::new(grid, w)?)?;
    let offset = periodic.values()[0];
    let phi: Vec<f64> = periodic.values().iter().map(|v| v - offset).collect();
    z.set_component(PHI, &phi);
    Ok(ZState::new_unchecked(z, slope, state.t()))
}

/// Extracts `(h, u, t)`.
pub fn project(z: &ZState) -> PhysicalState {
    let grid = z.grid();
    let h = Field::new(grid, z.fields.component_values(H)).expect("length matches grid");
    let u = Field::new(grid, z.fields.component_values(U)).expect("length matches grid");
    PhysicalState::new(h, u, z.t()).expect("ZState depth is positive")
}

/// Time derivative of a steadily translating state: `z_t = -c z_x`, except
/// that `phi` also drifts uniformly at rate `bernoulli` (`-g h0` for a wave on
/// still water of depth `h0`).
pub fn traveling_z_t(z: &ZState, speed: f64, bernoulli: f64, op: &DiffOperator) -> Result<ZField> {
    let mut zt = z.dx(op)?.scaled(-speed);
    for i in 0..z.grid().n() {
        zt.data[DIM * i + PHI] += bernoulli;
    }
    Ok(zt)
}
