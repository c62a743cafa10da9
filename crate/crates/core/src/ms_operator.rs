//! The Mullins–Sekerka operator A₀ = B∘S^N∘𝔇 and its lower-order perturbations.
//!
//! 𝔇 maps h to the traces σΔ_Γh (± b₂h), S^N and S^{DN} solve the two-phase
//! Laplace problem with Neumann or Dirichlet outer condition, and B takes the
//! normal jump [∂_nμ] pulled back to the parameter circle. Operators act on
//! fields of cutoff K and are assembled as dense matrices by probing each
//! Fourier mode.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bc::{BoundaryConfig, MuOuter};
use crate::error::{Error, Result};
use crate::field::{PeriodicField, VectorField, C64};
use crate::geometry::{surface_gradient, surface_laplacian, InterfaceGeometry};
use crate::linalg::{largest_singular_value, CMat};
use crate::twophase_elliptic::{Backend, LaplaceData, LaplaceSolver};
use crate::twophase_stokes::{StokesData, StokesSolver};

pub const POWER_TOL: f64 = 1e-6;
pub const POWER_MAX_ITER: usize = 10_000;

type ScalarFn = Arc<dyn Fn(f64) -> PeriodicField + Send + Sync>;
type VectorFn = Arc<dyn Fn(f64) -> VectorField + Send + Sync>;

/// Time-dependent scalar coefficient on Σ.
#[derive(Clone, Default)]
pub struct ScalarCoefficient(Option<ScalarFn>);

impl ScalarCoefficient {
    pub fn zero() -> Self {
        Self(None)
    }

    pub fn constant(f: PeriodicField) -> Self {
        if f.is_zero() {
            return Self(None);
        }
        Self(Some(Arc::new(move |_| f.clone())))
    }

    pub fn from_fn(f: impl Fn(f64) -> PeriodicField + Send + Sync + 'static) -> Self {
        Self(Some(Arc::new(f)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_none()
    }

    pub fn at(&self, t: f64) -> Option<PeriodicField> {
        self.0.as_ref().map(|f| f(t))
    }
}

impl std::fmt::Debug for ScalarCoefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.is_zero() { "ScalarCoefficient(0)" } else { "ScalarCoefficient(..)" })
    }
}

/// Time-dependent vector coefficient on Σ.
#[derive(Clone, Default)]
pub struct VectorCoefficient(Option<VectorFn>);

impl VectorCoefficient {
    pub fn zero() -> Self {
        Self(None)
    }

    pub fn constant(f: VectorField) -> Self {
        if f.is_zero() {
            return Self(None);
        }
        Self(Some(Arc::new(move |_| f.clone())))
    }

    pub fn from_fn(f: impl Fn(f64) -> VectorField + Send + Sync + 'static) -> Self {
        Self(Some(Arc::new(f)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_none()
    }

    pub fn at(&self, t: f64) -> Option<VectorField> {
        self.0.as_ref().map(|f| f(t))
    }
}

impl std::fmt::Debug for VectorCoefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.is_zero() { "VectorCoefficient(0)" } else { "VectorCoefficient(..)" })
    }
}

/// Coefficients of the linearized evolution.
///
/// `b2` is the ±b₂h trace coefficient (a₂ in the coupled problem); `a3`, `a4`,
/// `a5` enter the traction jump a₃h + a₄Δ_Γh + a₅∇_Γh of the Stokes coupling.
/// `jump_weight` multiplies [∂_nμ]: 1 for the pure Mullins–Sekerka problem,
/// ½ in the coupled problem.
#[derive(Clone, Debug)]
pub struct Coefficients {
    pub sigma: f64,
    pub b: VectorCoefficient,
    pub b1: ScalarCoefficient,
    pub b2: ScalarCoefficient,
    pub a3: VectorCoefficient,
    pub a4: VectorCoefficient,
    pub a5: ScalarCoefficient,
    pub jump_weight: f64,
}

impl Coefficients {
    /// Pure Mullins–Sekerka: only surface tension.
    pub fn mullins_sekerka(sigma: f64) -> Self {
        Self {
            sigma,
            b: VectorCoefficient::zero(),
            b1: ScalarCoefficient::zero(),
            b2: ScalarCoefficient::zero(),
            a3: VectorCoefficient::zero(),
            a4: VectorCoefficient::zero(),
            a5: ScalarCoefficient::zero(),
            jump_weight: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidConfig("surface tension must be positive".into()));
        }
        if !(self.jump_weight > 0.0) {
            return Err(Error::InvalidConfig("jump weight must be positive".into()));
        }
        Ok(())
    }

    pub fn has_stokes(&self) -> bool {
        !(self.a3.is_zero() && self.a4.is_zero() && self.a5.is_zero())
    }
}

/// A linear map on fields of a fixed cutoff.
pub trait LinearOperator: Sync {
    fn cutoff(&self) -> usize;

    fn apply(&self, h: &PeriodicField) -> Result<PeriodicField>;

    /// Dense matrix on the coefficients of modes −K..K, by probing each mode.
    fn matrix(&self) -> Result<CMat> {
        let k = self.cutoff();
        let n = 2 * k + 1;
        let cols: Vec<PeriodicField> = (0..n)
            .into_par_iter()
            .map(|j| self.apply(&PeriodicField::single_mode(k, j as i64 - k as i64, C64::new(1.0, 0.0))))
            .collect::<Result<_>>()?;
        let mut m = CMat::zeros(n, n);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = c.mode(i as i64 - k as i64);
            }
        }
        Ok(m)
    }
}

/// Diagonal operator ĥ_k ↦ λ(k)ĥ_k.
#[derive(Clone, Debug)]
pub struct FourierMultiplier {
    symbol: Vec<C64>,
}

impl FourierMultiplier {
    pub fn new(cutoff: usize, symbol: impl Fn(i64) -> C64) -> Self {
        let k = cutoff as i64;
        Self {
            symbol: (-k..=k).map(symbol).collect(),
        }
    }

    pub fn identity(cutoff: usize) -> Self {
        Self::new(cutoff, |_| C64::new(1.0, 0.0))
    }

    pub fn symbol(&self, k: i64) -> C64 {
        self.symbol[(k + self.cutoff() as i64) as usize]
    }
}

impl LinearOperator for FourierMultiplier {
    fn cutoff(&self) -> usize {
        (self.symbol.len() - 1) / 2
    }

    fn apply(&self, h: &PeriodicField) -> Result<PeriodicField> {
        let k = self.cutoff();
        if h.cutoff() != k {
            return Err(Error::CutoffMismatch { expected: k, got: h.cutoff() });
        }
        let modes = h.modes().iter().zip(&self.symbol).map(|(a, s)| a * s).collect();
        Ok(PeriodicField::from_modes(modes))
    }

    fn matrix(&self) -> Result<CMat> {
        Ok(CMat::from_diagonal(&nalgebra::DVector::from_vec(self.symbol.clone())))
    }
}

/// A dense matrix acting on coefficients.
#[derive(Clone, Debug)]
pub struct MatrixOperator(pub CMat);

impl LinearOperator for MatrixOperator {
    fn cutoff(&self) -> usize {
        (self.0.ncols() - 1) / 2
    }

    fn apply(&self, h: &PeriodicField) -> Result<PeriodicField> {
        let k = self.cutoff();
        if h.cutoff() != k {
            return Err(Error::CutoffMismatch { expected: k, got: h.cutoff() });
        }
        let v = &self.0 * nalgebra::DVector::from_column_slice(h.modes());
        Ok(PeriodicField::from_modes(v.iter().copied().collect()))
    }

    fn matrix(&self) -> Result<CMat> {
        Ok(self.0.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// B∘S^N applied to symmetric traces h (no σΔ_Γ).
    DtN,
    /// B∘S^N∘𝔇 with 𝔇h = σΔ_Γh.
    A0,
    /// B∘(S^{DN} − S^N)∘𝔇.
    B0,
    /// Normal jump of the solution with traces ±b₂h under the configured outer condition.
    B1,
    /// ½X₀*((v⁺+v⁻)·n) for the traction jump a₃h + a₄Δ_Γh + a₅∇_Γh.
    StokesVelocity,
    /// ℬ = b̃·∇_Γ − b₁ + w(B₀ + B₁) + B(t); B₀ only for a Dirichlet outer μ.
    Bfull,
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "dtn" => Self::DtN,
            "a0" => Self::A0,
            "b0" => Self::B0,
            "b1" => Self::B1,
            "stokes" | "stokesvelocity" => Self::StokesVelocity,
            "bfull" => Self::Bfull,
            _ => return Err(Error::InvalidConfig(format!("unknown operator kind '{s}'"))),
        })
    }
}

/// One of the operators frozen at time t, with its solvers factorized.
pub struct OperatorHandle {
    kind: OperatorKind,
    geometry: InterfaceGeometry,
    t: f64,
    coefficients: Coefficients,
    bc: BoundaryConfig,
    cutoff: usize,
    backend: Backend,
    neumann: Option<Arc<LaplaceSolver>>,
    dirichlet: Option<Arc<LaplaceSolver>>,
    stokes: Option<Arc<StokesSolver>>,
}

impl OperatorHandle {
    pub fn new(
        kind: OperatorKind,
        geometry: &InterfaceGeometry,
        t: f64,
        coefficients: &Coefficients,
        bc: &BoundaryConfig,
        backend: Backend,
        cutoff: usize,
    ) -> Result<Self> {
        coefficients.validate()?;
        bc.validate()?;
        let c = coefficients;
        let dirichlet_mu = bc.mu_outer == MuOuter::Dirichlet;
        let (need_n, need_d, need_s) = match kind {
            OperatorKind::DtN | OperatorKind::A0 => (true, false, false),
            OperatorKind::B0 => (true, true, false),
            OperatorKind::B1 => (!dirichlet_mu, dirichlet_mu, false),
            OperatorKind::StokesVelocity => (false, false, true),
            OperatorKind::Bfull => {
                let b1 = !c.b2.is_zero();
                (dirichlet_mu || b1, dirichlet_mu, c.has_stokes())
            }
        };
        let laplace = |outer| LaplaceSolver::new(geometry, t, outer, backend, cutoff).map(Arc::new);
        let neumann = if need_n { Some(laplace(MuOuter::Neumann)?) } else { None };
        let dirichlet = if need_d { Some(laplace(MuOuter::Dirichlet)?) } else { None };
        let stokes = if need_s {
            Some(Arc::new(StokesSolver::new(geometry, t, bc, backend, cutoff)?))
        } else {
            None
        };
        Ok(Self {
            kind,
            geometry: geometry.clone(),
            t,
            coefficients: coefficients.clone(),
            bc: *bc,
            cutoff,
            backend,
            neumann,
            dirichlet,
            stokes,
        })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// The same operator at time t. On static geometry the factorized solvers
    /// are shared and only the coefficients are re-evaluated.
    pub fn with_time(&self, t: f64) -> Result<Self> {
        if !self.geometry.is_static() {
            return Self::new(self.kind, &self.geometry, t, &self.coefficients, &self.bc, self.backend, self.cutoff);
        }
        Ok(Self {
            kind: self.kind,
            geometry: self.geometry.clone(),
            t,
            coefficients: self.coefficients.clone(),
            bc: self.bc,
            cutoff: self.cutoff,
            backend: self.backend,
            neumann: self.neumann.clone(),
            dirichlet: self.dirichlet.clone(),
            stokes: self.stokes.clone(),
        })
    }

    fn solver(&self, outer: MuOuter) -> &LaplaceSolver {
        let s = match outer {
            MuOuter::Neumann => &self.neumann,
            MuOuter::Dirichlet => &self.dirichlet,
        };
        s.as_deref().expect("solver assembled for this operator kind")
    }

    fn jump(&self, outer: MuOuter, f_plus: PeriodicField, f_minus: PeriodicField) -> Result<PeriodicField> {
        Ok(self.solver(outer).solve(&LaplaceData::traces(f_plus, f_minus))?.jump())
    }

    fn trace(&self, h: &PeriodicField) -> PeriodicField {
        surface_laplacian(h, &self.geometry, self.t).scale_real(self.coefficients.sigma)
    }

    fn b0(&self, h: &PeriodicField) -> Result<PeriodicField> {
        let f = self.trace(h);
        let d = self.jump(MuOuter::Dirichlet, f.clone(), f.clone())?;
        let n = self.jump(MuOuter::Neumann, f.clone(), f)?;
        Ok(&d - &n)
    }

    fn b1(&self, h: &PeriodicField) -> Result<PeriodicField> {
        match self.coefficients.b2.at(self.t) {
            None => Ok(PeriodicField::zeros(self.cutoff)),
            Some(b2) => {
                let f = b2.multiply(h).resize(self.cutoff);
                self.jump(self.bc.mu_outer, f.clone(), -&f)
            }
        }
    }

    fn stokes_velocity(&self, h: &PeriodicField) -> Result<PeriodicField> {
        let c = &self.coefficients;
        if !c.has_stokes() {
            return Ok(PeriodicField::zeros(self.cutoff));
        }
        let a = traction_of(h, c, &self.geometry, self.t);
        let solver = self.stokes.as_ref().expect("stokes solver assembled");
        let v = solver.solve(&StokesData::traction_driven(a))?;
        Ok(v.mean_normal_velocity(&self.geometry).resize(self.cutoff))
    }

    /// c∂_θh − b₁h with c = ∂_tS + b·X₀'/|X₀'|².
    fn transport(&self, h: &PeriodicField) -> PeriodicField {
        let k = self.cutoff;
        let c = &self.coefficients;
        let n = self.geometry.metric_grid(k);
        let snap = self.geometry.snapshot(self.t, n);
        let dts: Vec<C64> = snap.dt_s().into_iter().map(|v| C64::new(v, 0.0)).collect();
        let mut out = h.derivative(1).multiply_samples(&dts);
        if let Some(b) = c.b.at(self.t) {
            let grad = surface_gradient(h, &self.geometry, self.t);
            out = &out + &b.dot(&grad).resize(k);
        }
        if let Some(b1) = c.b1.at(self.t) {
            out = &out - &b1.multiply(h).resize(k);
        }
        if h.is_real() {
            out.symmetrize();
        }
        out
    }
}

/// Traction jump a₃h + a₄Δ_Γh + a₅∇_Γh at time t, at the cutoff of h.
pub fn traction_of(h: &PeriodicField, c: &Coefficients, geometry: &InterfaceGeometry, t: f64) -> VectorField {
    let k = h.cutoff();
    let mut a = VectorField::zeros(k);
    if let Some(a3) = c.a3.at(t) {
        a = a.add(&a3.times(h).resize(k));
    }
    if let Some(a4) = c.a4.at(t) {
        a = a.add(&a4.times(&surface_laplacian(h, geometry, t)).resize(k));
    }
    if let Some(a5) = c.a5.at(t) {
        let g = surface_gradient(h, geometry, t);
        a = a.add(&VectorField::new(g.x.multiply(&a5), g.y.multiply(&a5)).resize(k));
    }
    a
}

impl LinearOperator for OperatorHandle {
    fn cutoff(&self) -> usize {
        self.cutoff
    }

    fn apply(&self, h: &PeriodicField) -> Result<PeriodicField> {
        if h.cutoff() != self.cutoff {
            return Err(Error::CutoffMismatch {
                expected: self.cutoff,
                got: h.cutoff(),
            });
        }
        match self.kind {
            OperatorKind::DtN => self.jump(MuOuter::Neumann, h.clone(), h.clone()),
            OperatorKind::A0 => {
                let f = self.trace(h);
                self.jump(MuOuter::Neumann, f.clone(), f)
            }
            OperatorKind::B0 => self.b0(h),
            OperatorKind::B1 => self.b1(h),
            OperatorKind::StokesVelocity => self.stokes_velocity(h),
            OperatorKind::Bfull => {
                let w = self.coefficients.jump_weight;
                let mut out = self.transport(h);
                if self.bc.mu_outer == MuOuter::Dirichlet {
                    out = &out + &(&self.b0(h)? * w);
                }
                if !self.coefficients.b2.is_zero() {
                    out = &out + &(&self.b1(h)? * w);
                }
                if self.coefficients.has_stokes() {
                    out = &out + &self.stokes_velocity(h)?;
                }
                Ok(out)
            }
        }
    }
}

/// σΔ_Γh + sign·b₂h on Σ.
pub fn apply_dirichlet_trace(
    h: &PeriodicField,
    sign: f64,
    sigma: f64,
    b2: &PeriodicField,
    geometry: &InterfaceGeometry,
    t: f64,
) -> PeriodicField {
    let f = surface_laplacian(h, geometry, t).scale_real(sigma);
    if b2.is_zero() {
        return f;
    }
    &f + &b2.multiply(h).resize(h.cutoff()).scale_real(sign)
}

fn one_shot(kind: OperatorKind, h: &PeriodicField, geometry: &InterfaceGeometry, t: f64, c: &Coefficients, bc: &BoundaryConfig, backend: Backend) -> Result<PeriodicField> {
    OperatorHandle::new(kind, geometry, t, c, bc, backend, h.cutoff())?.apply(h)
}

pub fn apply_a0(h: &PeriodicField, geometry: &InterfaceGeometry, t: f64, sigma: f64, backend: Backend) -> Result<PeriodicField> {
    let c = Coefficients::mullins_sekerka(sigma);
    one_shot(OperatorKind::A0, h, geometry, t, &c, &BoundaryConfig::default(), backend)
}

pub fn apply_b0(h: &PeriodicField, geometry: &InterfaceGeometry, t: f64, sigma: f64, backend: Backend) -> Result<PeriodicField> {
    let c = Coefficients::mullins_sekerka(sigma);
    one_shot(OperatorKind::B0, h, geometry, t, &c, &BoundaryConfig::default(), backend)
}

pub fn apply_b1(
    h: &PeriodicField,
    geometry: &InterfaceGeometry,
    t: f64,
    b2: &PeriodicField,
    outer: MuOuter,
    backend: Backend,
) -> Result<PeriodicField> {
    let c = Coefficients {
        b2: ScalarCoefficient::constant(b2.clone()),
        ..Coefficients::mullins_sekerka(1.0)
    };
    let bc = BoundaryConfig {
        mu_outer: outer,
        ..Default::default()
    };
    one_shot(OperatorKind::B1, h, geometry, t, &c, &bc, backend)
}

/// Eigenvalue of A₀ (Neumann outer) or A₀ + B₀ (Dirichlet outer) on mode k for
/// concentric circles r₀ < R, with ρ = (r₀/R)².
pub fn ms_symbol(k: i64, r0: f64, big_r: f64, sigma: f64, outer: MuOuter) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let ak = k.unsigned_abs() as i32;
    let kf = ak as f64;
    let rk = (r0 / big_r).powi(2 * ak);
    let base = 2.0 * sigma * kf.powi(3) / r0.powi(3);
    match outer {
        MuOuter::Neumann => base / (1.0 + rk),
        MuOuter::Dirichlet => base / (1.0 - rk),
    }
}

/// Symbol of B₀ on concentric circles.
pub fn b0_symbol(k: i64, r0: f64, big_r: f64, sigma: f64) -> f64 {
    ms_symbol(k, r0, big_r, sigma, MuOuter::Dirichlet) - ms_symbol(k, r0, big_r, sigma, MuOuter::Neumann)
}

/// Symbol of B₁ for constant b₂ on concentric circles.
pub fn b1_symbol(k: i64, r0: f64, big_r: f64, b2: f64, outer: MuOuter) -> f64 {
    let ak = k.unsigned_abs() as i32;
    let kf = ak as f64;
    let rk = (r0 / big_r).powi(2 * ak);
    if k == 0 {
        // Ω⁻ carries −b₂ with either a constant (Neumann) or a logarithmic profile
        return match outer {
            MuOuter::Neumann => 0.0,
            MuOuter::Dirichlet => b2 / (r0 * (big_r / r0).ln()),
        };
    }
    match outer {
        MuOuter::Neumann => -2.0 * b2 * kf / r0 * rk / (1.0 + rk),
        MuOuter::Dirichlet => 2.0 * b2 * kf / r0 * rk / (1.0 - rk),
    }
}

/// ms_symbol for a geometry that must be a circle at time t.
pub fn ms_symbol_on(geometry: &InterfaceGeometry, t: f64, k: i64, sigma: f64, outer: MuOuter) -> Result<f64> {
    let r0 = geometry.circle_radius(t).ok_or(Error::NonCircularGeometry { t })?;
    Ok(ms_symbol(k, r0, geometry.outer_radius(), sigma, outer))
}

fn sobolev_weights(k: usize, s: f64) -> Vec<f64> {
    let k = k as i64;
    (-k..=k).map(|m| (1.0 + (m * m) as f64).powf(s / 2.0)).collect()
}

/// ‖M‖ between H^{s_in} and H^{s_out} coefficient spaces.
pub fn matrix_norm_estimate(m: &CMat, s_in: f64, s_out: f64) -> Result<f64> {
    let k = (m.ncols() - 1) / 2;
    let win = sobolev_weights(k, s_in);
    let wout = sobolev_weights(k, s_out);
    let w = CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (wout[i] / win[j]));
    largest_singular_value(&w, POWER_TOL, POWER_MAX_ITER)
}

/// Operator norm H^{s_in} → H^{s_out} at the operator's cutoff.
pub fn operator_norm_estimate(op: &dyn LinearOperator, s_in: f64, s_out: f64) -> Result<f64> {
    matrix_norm_estimate(&op.matrix()?, s_in, s_out)
}

/// ‖P − Q‖ between H^{s_in} and H^{s_out}; the relative continuity proxy.
pub fn difference_norm(p: &dyn LinearOperator, q: &dyn LinearOperator, s_in: f64, s_out: f64) -> Result<f64> {
    if p.cutoff() != q.cutoff() {
        return Err(Error::CutoffMismatch {
            expected: p.cutoff(),
            got: q.cutoff(),
        });
    }
    matrix_norm_estimate(&(p.matrix()? - q.matrix()?), s_in, s_out)
}
