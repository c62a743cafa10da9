//! Scenario files: TOML with `[geometry]`, `[bc]`, `[coefficients]`, `[data]` and `[run]` sections.
//!
//! Scalar expansions are either a number (a constant) or a list of `[k, a, b]`
//! triples meaning Σ a cos kθ + b sin kθ. Vector expansions are tables with `x`
//! and `y` scalar expansions.

use std::path::{Path, PathBuf};

use mssolve_core::evolution::{EvolutionProblem, GeneralData};
use mssolve_core::ms_operator::{Coefficients, ScalarCoefficient, VectorCoefficient};
use mssolve_core::sobolev::Trajectory;
use mssolve_core::{Backend, BoundaryConfig, InterfaceGeometry, MuOuter, PeriodicField, VectorField, VelocityOuter};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_CUTOFF: usize = 32;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Expansion {
    Constant(f64),
    Terms(Vec<(i64, f64, f64)>),
}

impl Default for Expansion {
    fn default() -> Self {
        Expansion::Constant(0.0)
    }
}

impl Expansion {
    pub fn field(&self, cutoff: usize) -> PeriodicField {
        match self {
            Expansion::Constant(c) => PeriodicField::constant(cutoff, *c),
            Expansion::Terms(terms) => terms
                .iter()
                .filter(|(k, _, _)| k.unsigned_abs() as usize <= cutoff)
                .fold(PeriodicField::zeros(cutoff), |f, &(k, a, b)| {
                    if k == 0 {
                        &f + &PeriodicField::constant(cutoff, a)
                    } else {
                        &f + &PeriodicField::trig(cutoff, k.abs(), a, b * k.signum() as f64)
                    }
                }),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Expansion::Constant(c) => *c == 0.0,
            Expansion::Terms(t) => t.iter().all(|&(_, a, b)| a == 0.0 && b == 0.0),
        }
    }

    /// Largest |k| referenced.
    fn max_mode(&self) -> usize {
        match self {
            Expansion::Constant(_) => 0,
            Expansion::Terms(t) => t.iter().map(|(k, _, _)| k.unsigned_abs() as usize).max().unwrap_or(0),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Expansion::Constant(c) => vec![*c],
            Expansion::Terms(t) => t.iter().flat_map(|&(_, a, b)| [a, b]).collect(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VectorExpansion {
    #[serde(default)]
    pub x: Expansion,
    #[serde(default)]
    pub y: Expansion,
}

impl VectorExpansion {
    pub fn field(&self, cutoff: usize) -> VectorField {
        VectorField::new(self.x.field(cutoff), self.y.field(cutoff))
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    /// Mean interface radius.
    pub r0: f64,
    /// Perturbation of the interface radius, ρ(θ) = r₀ + perturbation.
    #[serde(default)]
    pub perturbation: Expansion,
    pub outer_radius: f64,
    /// Tubular neighborhood half-width; defaults to (R − max ρ)/4.
    pub delta: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MuOuterSpec {
    Neumann,
    Dirichlet,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum VelocityOuterSpec {
    Dirichlet,
    Navier,
    Robin,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BcSpec {
    #[serde(default = "default_mu")]
    pub mu_outer: MuOuterSpec,
    #[serde(default = "default_velocity")]
    pub velocity_outer: VelocityOuterSpec,
    /// Friction constant α₂ or α₃.
    #[serde(default)]
    pub alpha: f64,
}

fn default_mu() -> MuOuterSpec {
    MuOuterSpec::Neumann
}

fn default_velocity() -> VelocityOuterSpec {
    VelocityOuterSpec::Dirichlet
}

impl Default for BcSpec {
    fn default() -> Self {
        Self { mu_outer: default_mu(), velocity_outer: default_velocity(), alpha: 0.0 }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub sigma: Option<f64>,
    /// Weight of the μ jump in the interface equation; 1 for pure
    /// Mullins–Sekerka, ½ for the coupled problem.
    pub jump_weight: Option<f64>,
    #[serde(default)]
    pub b: VectorExpansion,
    #[serde(default)]
    pub b1: Expansion,
    #[serde(default)]
    pub b2: Expansion,
    #[serde(default)]
    pub a3: VectorExpansion,
    #[serde(default)]
    pub a4: VectorExpansion,
    #[serde(default)]
    pub a5: Expansion,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    /// Added to both traces μ^±.
    #[serde(default)]
    pub mu_trace: Expansion,
    /// Outer datum for μ⁻.
    #[serde(default)]
    pub mu_outer: Expansion,
    /// Velocity jump [v].
    #[serde(default)]
    pub velocity_jump: VectorExpansion,
    /// Traction jump independent of h.
    #[serde(default)]
    pub traction: VectorExpansion,
    /// Outer velocity datum g.
    #[serde(default)]
    pub velocity_outer: VectorExpansion,
    /// Forcing g of the interface equation, constant in time.
    #[serde(default)]
    pub forcing: Expansion,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum BackendSpec {
    Spectral,
    Bie,
}

impl From<BackendSpec> for Backend {
    fn from(b: BackendSpec) -> Self {
        match b {
            BackendSpec::Spectral => Backend::Spectral,
            BackendSpec::Bie => Backend::Bie,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub k: Option<usize>,
    pub backend: Option<BackendSpec>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub h0: Expansion,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    geometry: GeometrySpec,
    #[serde(default)]
    bc: BcSpec,
    #[serde(default)]
    coefficients: CoefficientSpec,
    #[serde(default)]
    data: DataSpec,
    run: RunSpec,
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub geometry: GeometrySpec,
    pub bc: BcSpec,
    pub coefficients: CoefficientSpec,
    pub data: DataSpec,
    pub h0: Expansion,
    pub sigma: f64,
    pub jump_weight: f64,
    pub t_end: f64,
    pub dt: f64,
    pub k: usize,
    pub backend: BackendSpec,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

/// Command-line overrides applied before validation.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub k: Option<usize>,
    pub dt: Option<f64>,
    pub backend: Option<BackendSpec>,
    pub out: Option<PathBuf>,
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    parse_scenario_with(path, &Overrides::default())
}

pub fn parse_scenario_with(path: &Path, ov: &Overrides) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario_str(&text, ov)
}

pub fn parse_scenario_str(text: &str, ov: &Overrides) -> Result<Scenario, CliError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        CliError::Parse { line, message: e.message().to_string() }
    })?;
    let invalid = |m: &str| Err(CliError::Validation(m.to_string()));
    let sigma = raw.coefficients.sigma.unwrap_or(1.0);
    if !(sigma > 0.0 && sigma.is_finite()) {
        return invalid("surface tension must be positive");
    }
    let t_end = match raw.run.t_end {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(_) => return invalid("run.t_end must be positive"),
        None => return invalid("run.t_end is required"),
    };
    let dt = match ov.dt.or(raw.run.dt) {
        Some(d) if d > 0.0 && d.is_finite() => d,
        Some(_) => return invalid("run.dt must be positive"),
        None => return invalid("run.dt is required"),
    };
    let k = ov.k.or(raw.run.k).unwrap_or(DEFAULT_CUTOFF);
    if k == 0 {
        return invalid("run.k must be at least 1");
    }
    let g = &raw.geometry;
    if !(g.r0 > 0.0 && g.outer_radius > g.r0) {
        return invalid("geometry requires 0 < r0 < outer_radius");
    }
    if raw.bc.alpha < 0.0 || !raw.bc.alpha.is_finite() {
        return invalid("bc.alpha must be finite and nonnegative");
    }
    let jump_weight = raw.coefficients.jump_weight.unwrap_or(1.0);
    if !(jump_weight > 0.0 && jump_weight.is_finite()) {
        return invalid("coefficients.jump_weight must be positive");
    }
    let c = &raw.coefficients;
    let d = &raw.data;
    let scalars = [
        ("geometry.perturbation", &g.perturbation),
        ("coefficients.b1", &c.b1),
        ("coefficients.b2", &c.b2),
        ("coefficients.a5", &c.a5),
        ("data.mu_trace", &d.mu_trace),
        ("data.mu_outer", &d.mu_outer),
        ("data.forcing", &d.forcing),
        ("run.h0", &raw.run.h0),
    ];
    let vectors = [
        ("coefficients.b", &c.b),
        ("coefficients.a3", &c.a3),
        ("coefficients.a4", &c.a4),
        ("data.velocity_jump", &d.velocity_jump),
        ("data.traction", &d.traction),
        ("data.velocity_outer", &d.velocity_outer),
    ];
    let all = scalars
        .iter()
        .copied()
        .chain(vectors.iter().flat_map(|&(n, v)| [(n, &v.x), (n, &v.y)]));
    for (name, e) in all {
        if e.max_mode() > k {
            return Err(CliError::Validation(format!("{name} references mode {} above K = {k}", e.max_mode())));
        }
        if e.values().iter().any(|v| !v.is_finite()) {
            return Err(CliError::Validation(format!("{name} has a non-finite coefficient")));
        }
    }
    Ok(Scenario {
        sigma,
        jump_weight,
        t_end,
        dt,
        k,
        backend: ov.backend.or(raw.run.backend).unwrap_or(BackendSpec::Spectral),
        out: ov.out.clone().or(raw.run.out.clone()),
        seed: raw.run.seed,
        h0: raw.run.h0.clone(),
        geometry: raw.geometry,
        bc: raw.bc,
        coefficients: raw.coefficients,
        data: raw.data,
    })
}

impl Scenario {
    pub fn boundary_config(&self) -> BoundaryConfig {
        let mu = match self.bc.mu_outer {
            MuOuterSpec::Neumann => MuOuter::Neumann,
            MuOuterSpec::Dirichlet => MuOuter::Dirichlet,
        };
        let alpha = self.bc.alpha;
        let v = match self.bc.velocity_outer {
            VelocityOuterSpec::Dirichlet => VelocityOuter::Dirichlet,
            VelocityOuterSpec::Navier => VelocityOuter::NavierSlip { alpha },
            VelocityOuterSpec::Robin => VelocityOuter::Robin { alpha },
        };
        BoundaryConfig::new(mu, v)
    }

    pub fn backend(&self) -> Backend {
        self.backend.into()
    }

    pub fn geometry(&self) -> mssolve_core::Result<InterfaceGeometry> {
        let g = &self.geometry;
        let rho = &PeriodicField::constant(self.k, g.r0) + &g.perturbation.field(self.k);
        let rho_max = rho.real_samples(8 * self.k + 16).into_iter().fold(f64::MIN, f64::max);
        let delta = g.delta.unwrap_or(0.25 * (g.outer_radius - rho_max));
        if g.perturbation.is_zero() {
            InterfaceGeometry::circle(g.r0, g.outer_radius, delta)
        } else {
            InterfaceGeometry::fixed(rho, g.outer_radius, delta)
        }
    }

    pub fn h0(&self) -> PeriodicField {
        self.h0.field(self.k)
    }

    pub fn coefficients(&self) -> Coefficients {
        let k = self.k;
        let c = &self.coefficients;
        let scalar = |e: &Expansion| {
            if e.is_zero() {
                ScalarCoefficient::zero()
            } else {
                ScalarCoefficient::constant(e.field(k))
            }
        };
        let vector = |e: &VectorExpansion| {
            if e.is_zero() {
                VectorCoefficient::zero()
            } else {
                VectorCoefficient::constant(e.field(k))
            }
        };
        Coefficients {
            b: vector(&c.b),
            b1: scalar(&c.b1),
            b2: scalar(&c.b2),
            a3: vector(&c.a3),
            a4: vector(&c.a4),
            a5: scalar(&c.a5),
            jump_weight: self.jump_weight,
            ..Coefficients::mullins_sekerka(self.sigma)
        }
    }

    pub fn general_data(&self) -> GeneralData {
        let k = self.k;
        let d = &self.data;
        GeneralData {
            mu_trace: d.mu_trace.field(k),
            mu_outer: d.mu_outer.field(k),
            velocity_jump: d.velocity_jump.field(k),
            traction: d.traction.field(k),
            velocity_outer: d.velocity_outer.field(k),
            ..GeneralData::zeros(k)
        }
    }

    pub fn evolution_problem(&self) -> mssolve_core::Result<EvolutionProblem> {
        let mut p = EvolutionProblem::new(self.geometry()?, self.h0(), self.t_end, self.dt)?;
        p.bc = self.boundary_config();
        p.coefficients = self.coefficients();
        p.data = self.general_data();
        let g = self.data.forcing.field(self.k);
        p.g = Trajectory::new(vec![0.0, self.t_end], vec![g.clone(), g])?;
        p.backend = self.backend();
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[geometry]
r0 = 1.0
outer_radius = 2.0

[run]
t_end = 0.1
dt = 0.01
h0 = [[1, 1.0, 0.0]]
"#;

    #[test]
    fn minimal_defaults() {
        let s = parse_scenario_str(MINIMAL, &Overrides::default()).unwrap();
        assert_eq!(s.k, DEFAULT_CUTOFF);
        assert_eq!(s.sigma, 1.0);
        assert_eq!(s.boundary_config(), BoundaryConfig::default());
        assert_eq!(s.h0().mode(1).re, 0.5);
        assert!(s.geometry().unwrap().circle_radius(0.0).is_some());
    }

    #[test]
    fn overrides_win() {
        let ov = Overrides { k: Some(4), dt: Some(0.05), backend: Some(BackendSpec::Bie), out: None };
        let s = parse_scenario_str(MINIMAL, &ov).unwrap();
        assert_eq!((s.k, s.dt, s.backend), (4, 0.05, BackendSpec::Bie));
    }

    #[test]
    fn mode_above_cutoff_rejected() {
        let ov = Overrides { k: Some(2), ..Default::default() };
        let text = MINIMAL.replace("[[1, 1.0, 0.0]]", "[[3, 1.0, 0.0]]");
        assert!(matches!(parse_scenario_str(&text, &ov), Err(CliError::Validation(m)) if m.contains("run.h0")));
    }

    #[test]
    fn unknown_field_reports_line() {
        let text = MINIMAL.replace("outer_radius = 2.0", "outer_radius = 2.0\nradius = 3");
        match parse_scenario_str(&text, &Overrides::default()) {
            Err(CliError::Parse { line, message }) => {
                assert_eq!(line, Some(5));
                assert!(message.contains("radius"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_sine_modes_flip() {
        let e = Expansion::Terms(vec![(-2, 1.0, 1.0)]);
        let f = Expansion::Terms(vec![(2, 1.0, -1.0)]);
        assert_eq!(e.field(3), f.field(3));
    }
}
