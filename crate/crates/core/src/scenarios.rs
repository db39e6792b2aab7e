//! Initial conditions, with exact solutions where they are known.
//!
//! A scenario that carries an exact solution certifies it on construction:
//! the solution is substituted into the mass and momentum equations under
//! the traveling-wave substitution `d/dt = -c d/dx`, with spectral
//! derivatives, and the residual sup-norms must stay below
//! [`CERTIFICATION_TOL`].

use std::collections::BTreeMap;

use serde::Serialize;

use crate::diff::{DiffKind, DiffOperator};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D, Params, PhysicalState};
use crate::structure::{residual_mass, residual_momentum, TimeDerivatives};

pub const CERTIFICATION_TOL: f64 = 1e-8;
pub const CERTIFICATION_POINTS: usize = 512;
/// Largest admissible deviation of the solitary profile from `h0` at the
/// edges of the certification domain.
pub const TAIL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    StillWater {
        h0: f64,
    },
    GaussianHump {
        h0: f64,
        a: f64,
        width: f64,
    },
    UniformStream {
        h0: f64,
        u0: f64,
    },
    SolitaryWave {
        h0: f64,
        a: f64,
        speed: f64,
        kappa: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub grid_points: usize,
    pub domain_length: f64,
    pub mass_residual: f64,
    pub momentum_residual: f64,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.mass_residual <= CERTIFICATION_TOL && self.momentum_residual <= CERTIFICATION_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    name: &'static str,
    kind: ScenarioKind,
    certification: Option<CertificationReport>,
}

impl Scenario {
    pub fn still_water(h0: f64) -> Result<Self> {
        check_depth(h0)?;
        Self::certified(
            "still_water",
            ScenarioKind::StillWater { h0 },
            &Params::default(),
        )
    }

    pub fn uniform_stream(h0: f64, u0: f64) -> Result<Self> {
        check_depth(h0)?;
        if !u0.is_finite() {
            return Err(invalid("u0", "must be finite"));
        }
        Self::certified(
            "uniform_stream",
            ScenarioKind::UniformStream { h0, u0 },
            &Params::default(),
        )
    }

    /// `h = h0 + a exp(-((x - L/2)/width)^2)`, at rest. No exact solution.
    pub fn gaussian_hump(h0: f64, a: f64, width: f64) -> Result<Self> {
        check_depth(h0)?;
        if !(a > -h0) {
            return Err(invalid("a", "amplitude must exceed -h0"));
        }
        if !(width > 0.0) {
            return Err(invalid("width", "must be positive"));
        }
        Ok(Self {
            name: "gaussian_hump",
            kind: ScenarioKind::GaussianHump { h0, a, width },
            certification: None,
        })
    }

    /// Classical sech^2 solitary wave of the Serre equations:
    /// `h = h0 + a sech^2(kappa (x - c t - x0))`, `u = c (1 - h0/h)`,
    /// `c = sqrt(g (h0 + a))`, `kappa = sqrt(3a) / (2 h0 sqrt(h0 + a))`.
    pub fn solitary_wave(h0: f64, a: f64, params: &Params) -> Result<Self> {
        check_depth(h0)?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid("a", "solitary amplitude must be positive"));
        }
        let speed = (params.g * (h0 + a)).sqrt();
        let kappa = (3.0 * a).sqrt() / (2.0 * h0 * (h0 + a).sqrt());
        Self::certified(
            "solitary_wave",
            ScenarioKind::SolitaryWave {
                h0,
                a,
                speed,
                kappa,
            },
            params,
        )
    }

    fn certified(name: &'static str, kind: ScenarioKind, params: &Params) -> Result<Self> {
        let mut sc = Self {
            name,
            kind,
            certification: None,
        };
        let report = sc.certify(params)?;
        if !report.passed() {
            return Err(Error::CertificationFailure {
                scenario: name.to_string(),
                detail: format!(
                    "mass residual {:e}, momentum residual {:e} (tolerance {CERTIFICATION_TOL:e})",
                    report.mass_residual, report.momentum_residual
                ),
            });
        }
        sc.certification = Some(report);
        Ok(sc)
    }

    /// Substitutes the exact solution into the mass and momentum equations
    /// on a [`CERTIFICATION_POINTS`]-point grid of length
    /// [`Scenario::certification_length`].
    pub fn certify(&self, params: &Params) -> Result<CertificationReport> {
        let grid = Grid1D::new(self.certification_length(), CERTIFICATION_POINTS)?;
        let op = DiffOperator::new(DiffKind::Fourier, grid);
        let state = self.initial_state(grid)?;
        let td = TimeDerivatives::traveling(&state, self.speed(), &op)?;
        let mass = residual_mass(&state, &td.h_t, &op)?.max_abs();
        let momentum = residual_momentum(&state, &td.u_t, &td.u_xt, &op, params)?.max_abs();
        Ok(CertificationReport {
            grid_points: CERTIFICATION_POINTS,
            domain_length: grid.length(),
            mass_residual: mass,
            momentum_residual: momentum,
        })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn certification(&self) -> Option<&CertificationReport> {
        self.certification.as_ref()
    }

    pub fn parameters(&self) -> BTreeMap<&'static str, f64> {
        match self.kind {
            ScenarioKind::StillWater { h0 } => BTreeMap::from([("h0", h0)]),
            ScenarioKind::GaussianHump { h0, a, width } => {
                BTreeMap::from([("h0", h0), ("a", a), ("width", width)])
            }
            ScenarioKind::UniformStream { h0, u0 } => BTreeMap::from([("h0", h0), ("u0", u0)]),
            ScenarioKind::SolitaryWave {
                h0,
                a,
                speed,
                kappa,
            } => BTreeMap::from([("h0", h0), ("a", a), ("c", speed), ("kappa", kappa)]),
        }
    }

    pub fn h0(&self) -> f64 {
        match self.kind {
            ScenarioKind::StillWater { h0 }
            | ScenarioKind::GaussianHump { h0, .. }
            | ScenarioKind::UniformStream { h0, .. }
            | ScenarioKind::SolitaryWave { h0, .. } => h0,
        }
    }

    /// Translation speed of the exact solution (zero when it is steady).
    pub fn speed(&self) -> f64 {
        match self.kind {
            ScenarioKind::SolitaryWave { speed, .. } => speed,
            _ => 0.0,
        }
    }

    pub fn has_exact_solution(&self) -> bool {
        !matches!(self.kind, ScenarioKind::GaussianHump { .. })
    }

    /// Default simulation domain, `40 h0`.
    pub fn default_length(&self) -> f64 {
        40.0 * self.h0()
    }

    /// Domain on which the solitary tails fall below [`TAIL_TOL`], so that
    /// the periodic extension is smooth to round-off.
    pub fn certification_length(&self) -> f64 {
        match self.kind {
            ScenarioKind::SolitaryWave { a, kappa, .. } => {
                // a sech^2(kappa L/2) <= 4 a exp(-kappa L)
                let tail = (4.0 * a / TAIL_TOL).ln() / kappa;
                tail.max(self.default_length())
            }
            _ => self.default_length(),
        }
    }

    pub fn initial_state(&self, grid: Grid1D) -> Result<PhysicalState> {
        self.state_at(grid, 0.0)
    }

    /// Exact solution at time `t`, when one exists. The solitary crest starts
    /// at the centre of the domain and wraps around periodically.
    pub fn exact_solution(&self, grid: Grid1D, t: f64) -> Option<Result<PhysicalState>> {
        self.has_exact_solution().then(|| self.state_at(grid, t))
    }

    fn state_at(&self, grid: Grid1D, t: f64) -> Result<PhysicalState> {
        let l = grid.length();
        let (h, u) = match self.kind {
            ScenarioKind::StillWater { h0 } => (Field::constant(grid, h0), Field::zeros(grid)),
            ScenarioKind::UniformStream { h0, u0 } => {
                (Field::constant(grid, h0), Field::constant(grid, u0))
            }
            ScenarioKind::GaussianHump { h0, a, width } => (
                Field::from_fn(grid, |x| h0 + a * (-((x - 0.5 * l) / width).powi(2)).exp()),
                Field::zeros(grid),
            ),
            ScenarioKind::SolitaryWave {
                h0,
                a,
                speed,
                kappa,
            } => {
                let centre = 0.5 * l + speed * t;
                let h = Field::from_fn(grid, |x| {
                    let xi = (x - centre + 0.5 * l).rem_euclid(l) - 0.5 * l;
                    h0 + a / (kappa * xi).cosh().powi(2)
                });
                let u = h.map(|hv| speed * (1.0 - h0 / hv));
                (h, u)
            }
        };
        PhysicalState::new(h, u, t)
    }
}

fn check_depth(h0: f64) -> Result<()> {
    if h0 > 0.0 && h0.is_finite() {
        Ok(())
    } else {
        Err(invalid("h0", "depth must be positive"))
    }
}

fn invalid(name: &'static str, reason: &str) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_scenarios() {
        let grid = Grid1D::new(40.0, 32).unwrap();
        let still = Scenario::still_water(1.0)
            .unwrap()
            .initial_state(grid)
            .unwrap();
        assert!(still.h().values().iter().all(|&h| h == 1.0));
        assert!(still.u().values().iter().all(|&u| u == 0.0));

        let flat_hump = Scenario::gaussian_hump(1.0, 0.0, 2.0).unwrap();
        assert_eq!(flat_hump.initial_state(grid).unwrap(), still);
        assert!(flat_hump.exact_solution(grid, 1.0).is_none());

        let rest = Scenario::uniform_stream(1.0, 0.0).unwrap();
        assert_eq!(rest.initial_state(grid).unwrap(), still);
    }

    #[test]
    fn invalid_parameters() {
        assert!(Scenario::still_water(0.0).is_err());
        assert!(Scenario::gaussian_hump(1.0, -1.0, 1.0).is_err());
        assert!(Scenario::gaussian_hump(1.0, 0.1, 0.0).is_err());
        assert!(Scenario::solitary_wave(1.0, 0.0, &Params::default()).is_err());
    }

    #[test]
    fn solitary_speed() {
        let sc = Scenario::solitary_wave(1.0, 0.2, &Params::default()).unwrap();
        assert!((sc.speed() - 1.2_f64.sqrt()).abs() < 1e-15);
        assert!((sc.speed() - 1.0954451).abs() < 1e-7);
        let report = sc.certification().unwrap();
        assert!(report.passed());
        assert!(report.domain_length >= 40.0);
    }

    #[test]
    fn construction_is_deterministic() {
        let grid = Grid1D::new(40.0, 257).unwrap();
        let a = Scenario::solitary_wave(1.0, 0.3, &Params::default()).unwrap();
        let b = Scenario::solitary_wave(1.0, 0.3, &Params::default()).unwrap();
        assert_eq!(a, b);
        let (sa, sb) = (
            a.initial_state(grid).unwrap(),
            b.initial_state(grid).unwrap(),
        );
        assert!(sa
            .h()
            .values()
            .iter()
            .zip(sb.h().values())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn exact_solution_translates_and_wraps() {
        let grid = Grid1D::new(40.0, 400).unwrap();
        let sc = Scenario::solitary_wave(1.0, 0.2, &Params::default()).unwrap();
        let c = sc.speed();
        // After a full period the crest is back where it started.
        let period = 40.0 / c;
        let s0 = sc.initial_state(grid).unwrap();
        let s1 = sc.exact_solution(grid, period).unwrap().unwrap();
        let err = s0.h().zip_with(s1.h(), |a, b| a - b).unwrap().max_abs();
        assert!(err < 1e-12, "{err}");
    }
}
