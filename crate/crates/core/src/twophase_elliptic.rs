//! Two-phase Laplace problems for the chemical potential: Dirichlet traces on Γ_t
//! from both sides, a polynomial volume source, and a Neumann or Dirichlet
//! condition on ∂Ω. Two backends: modal expansions in each phase (exact on
//! concentric circles, collocation least squares otherwise) and a Nyström
//! boundary integral discretization.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Dyn};

use crate::bc::{BoundaryConfig, MuOuter};
use crate::bie::{self, Curve};
use crate::error::{Error, Result};
use crate::field::{nodes, PeriodicField, C64};
use crate::geometry::{CurveSnapshot, InterfaceGeometry, Phase};
use crate::linalg::{CMat, CVec, LeastSquares};
use crate::nearfield::{self, RayFrame, Side};
use crate::sobolev::{h_norm, xt_norm, Trajectory};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Discretization used for interface problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    #[default]
    Spectral,
    Bie,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Backend::Spectral),
            "bie" => Ok(Backend::Bie),
            other => Err(Error::InvalidConfig(format!("unknown backend '{other}'"))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Spectral => "spectral",
            Backend::Bie => "bie",
        })
    }
}

/// One term c·r^m e^{ikθ} of a volume source; m ≥ |k| with m − |k| even so the
/// term is a polynomial in (x, y).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceTerm {
    pub k: i64,
    pub m: u32,
    pub coeff: C64,
}

/// Volume source a₁ as a finite sum of polynomial terms, valid on all of Ω.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VolumeSource {
    terms: Vec<SourceTerm>,
}

impl VolumeSource {
    pub fn new(terms: Vec<SourceTerm>) -> Result<Self> {
        for t in &terms {
            let ak = t.k.unsigned_abs();
            if (t.m as u64) < ak || !(t.m as u64 - ak).is_multiple_of(2) {
                return Err(Error::InvalidConfig(format!(
                    "source term r^{} e^(i{}θ) is not a polynomial",
                    t.m, t.k
                )));
            }
        }
        Ok(Self { terms })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[SourceTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == ZERO)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| SourceTerm {
                    coeff: t.coeff * c,
                    ..*t
                })
                .collect(),
        }
    }

    /// a₁ at a point given in polar coordinates.
    pub fn value(&self, r: f64, theta: f64) -> C64 {
        self.terms
            .iter()
            .map(|t| t.coeff * r.powi(t.m as i32) * C64::from_polar(1.0, t.k as f64 * theta))
            .sum()
    }

    /// Particular solution P = Σ c r^{m+2} e^{ikθ}/((m+2)² − k²) with ΔP = a₁:
    /// returns (P, ∂_rP, ∂_θP).
    pub fn particular(&self, r: f64, theta: f64) -> (C64, C64, C64) {
        let mut out = (ZERO, ZERO, ZERO);
        for t in &self.terms {
            let n = t.m as f64 + 2.0;
            let a = t.coeff / (n * n - (t.k * t.k) as f64);
            let e = C64::from_polar(1.0, t.k as f64 * theta);
            let v = a * r.powf(n) * e;
            out.0 += v;
            out.1 += a * n * r.powf(n - 1.0) * e;
            out.2 += v * C64::new(0.0, t.k as f64);
        }
        out
    }
}

/// Data of one two-phase Laplace solve.
#[derive(Clone, Debug)]
pub struct LaplaceData {
    /// Dirichlet traces μ^± on Γ_t as functions of the curve parameter.
    pub f_plus: PeriodicField,
    pub f_minus: PeriodicField,
    pub source: VolumeSource,
    /// Outer datum a₄ on ∂Ω as a function of the polar angle.
    pub outer: PeriodicField,
}

impl LaplaceData {
    pub fn traces(f_plus: PeriodicField, f_minus: PeriodicField) -> Self {
        let k = f_plus.cutoff();
        Self {
            f_plus,
            f_minus,
            source: VolumeSource::zero(),
            outer: PeriodicField::zeros(k),
        }
    }

    pub fn symmetric(f: PeriodicField) -> Self {
        Self::traces(f.clone(), f)
    }
}

/// Values of the Ω⁻ radial basis, the outer lift, and their r-derivatives.
fn minus_basis(k: i64, r: f64, rho_min: f64, outer: f64, bc: MuOuter) -> (f64, f64) {
    let ak = k.unsigned_abs() as i32;
    if ak == 0 {
        return match bc {
            MuOuter::Neumann => (1.0, 0.0),
            MuOuter::Dirichlet => {
                let d = (rho_min / outer).ln();
                ((r / outer).ln() / d, 1.0 / (r * d))
            }
        };
    }
    let kf = ak as f64;
    let a = (rho_min / r).powi(ak);
    let b = (rho_min * r / (outer * outer)).powi(ak);
    let q = (rho_min / outer).powi(2 * ak);
    match bc {
        MuOuter::Neumann => ((a + b) / (1.0 + q), kf * (b - a) / (r * (1.0 + q))),
        MuOuter::Dirichlet => ((a - b) / (1.0 - q), -kf * (a + b) / (r * (1.0 - q))),
    }
}

fn outer_lift(k: i64, r: f64, outer: f64, bc: MuOuter) -> (f64, f64) {
    let ak = k.unsigned_abs() as i32;
    match (bc, ak) {
        (MuOuter::Neumann, 0) => (outer * (r / outer).ln(), outer / r),
        (MuOuter::Neumann, _) => {
            let kf = ak as f64;
            (outer / kf * (r / outer).powi(ak), (r / outer).powi(ak - 1))
        }
        (MuOuter::Dirichlet, 0) => (1.0, 0.0),
        (MuOuter::Dirichlet, _) => {
            let p = (r / outer).powi(ak);
            (p, ak as f64 * p / r)
        }
    }
}

fn plus_basis(k: i64, r: f64, scale: f64) -> (f64, f64) {
    let ak = k.unsigned_abs() as i32;
    if ak == 0 {
        return (1.0, 0.0);
    }
    let p = (r / scale).powi(ak);
    (p, ak as f64 * p / r)
}

/// Modal representation of μ^± with modes |k| ≤ kb.
#[derive(Clone, Debug)]
struct ModalRep {
    kb: usize,
    plus: Vec<C64>,
    minus: Vec<C64>,
    scale_plus: f64,
    scale_minus: f64,
    outer: f64,
    bc: MuOuter,
    lift: Vec<(i64, C64)>,
    source: VolumeSource,
}

impl ModalRep {
    /// (value, ∂_r, ∂_θ) at polar (r, θ).
    fn eval_polar(&self, r: f64, theta: f64, phase: Phase) -> (C64, C64, C64) {
        let kb = self.kb as i64;
        let (mut v, mut dr, mut dt) = self.source.particular(r, theta);
        let coeffs = match phase {
            Phase::Plus => &self.plus,
            Phase::Minus => &self.minus,
        };
        for k in -kb..=kb {
            let c = coeffs[(k + kb) as usize];
            if c == ZERO {
                continue;
            }
            let (b, db) = match phase {
                Phase::Plus => plus_basis(k, r, self.scale_plus),
                Phase::Minus => minus_basis(k, r, self.scale_minus, self.outer, self.bc),
            };
            let e = c * C64::from_polar(1.0, k as f64 * theta);
            v += e * b;
            dr += e * db;
            dt += e * b * C64::new(0.0, k as f64);
        }
        if phase == Phase::Minus {
            for &(k, c) in &self.lift {
                let (b, db) = outer_lift(k, r, self.outer, self.bc);
                let e = c * C64::from_polar(1.0, k as f64 * theta);
                v += e * b;
                dr += e * db;
                dt += e * b * C64::new(0.0, k as f64);
            }
        }
        (v, dr, dt)
    }
}

/// Layer densities of the boundary integral representation in each phase.
/// Single- and double-layer densities of the harmonic parts.
#[derive(Clone, Debug)]
struct ScalarLayers {
    plus_curve: Curve,
    minus_curve: Curve,
    outer_curve: Curve,
    u_plus: Vec<C64>,
    q_plus: Vec<C64>,
    c_plus: C64,
    u_minus: Vec<C64>,
    q_minus: Vec<C64>,
    u_outer: Vec<C64>,
    q_outer: Vec<C64>,
    c_minus: C64,
}

impl ScalarLayers {
    /// Harmonic part (value, ∂_x, ∂_y) by the Nyström sum.
    fn direct(&self, x: [f64; 2], phase: Phase) -> Vec<C64> {
        let mut v = ZERO;
        let mut g = [ZERO; 2];
        let mut add = |curve: &Curve, q: &[C64], u: &[C64]| {
            for j in 0..curve.len() {
                let d = [x[0] - curve.x[j][0], x[1] - curve.x[j][1]];
                let r2 = d[0] * d[0] + d[1] * d[1];
                let s = -(r2.ln()) / (4.0 * PI) * curve.w[j];
                let sg = bie::laplace_slp_grad(x, curve, j);
                let (dv, dg) = bie::laplace_dlp_kernel(x, curve, j);
                v += q[j] * s - u[j] * dv;
                g[0] += q[j] * sg[0] - u[j] * dg[0];
                g[1] += q[j] * sg[1] - u[j] * dg[1];
            }
        };
        match phase {
            Phase::Plus => {
                add(&self.plus_curve, &self.q_plus, &self.u_plus);
                v += self.c_plus;
            }
            Phase::Minus => {
                add(&self.minus_curve, &self.q_minus, &self.u_minus);
                add(&self.outer_curve, &self.q_outer, &self.u_outer);
                v += self.c_minus;
            }
        }
        vec![v, g[0], g[1]]
    }

    fn upsample(&self, geometry: &InterfaceGeometry, t: f64) -> Self {
        let f = nearfield::UPSAMPLE;
        let n = f * self.plus_curve.len();
        let snap = geometry.snapshot(t, n);
        let up = |v: &[C64]| nearfield::upsample(v, f);
        Self {
            plus_curve: Curve::interface(&snap, true),
            minus_curve: Curve::interface(&snap, false),
            outer_curve: Curve::circle(geometry.outer_radius(), n),
            u_plus: up(&self.u_plus),
            q_plus: up(&self.q_plus),
            c_plus: self.c_plus,
            u_minus: up(&self.u_minus),
            q_minus: up(&self.q_minus),
            u_outer: up(&self.u_outer),
            q_outer: up(&self.q_outer),
            c_minus: self.c_minus,
        }
    }

    /// (value, ∂_x, ∂_y) traces from u and q = ∂_ν u on one curve.
    fn traces(curve: &Curve, u: &[C64], q: &[C64]) -> Vec<PeriodicField> {
        let n = curve.len();
        let kk = n / 2 - 1;
        let uf = PeriodicField::from_samples(u, kk);
        let du = uf.derivative(1).samples(n);
        let (mut gx, mut gy) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for j in 0..n {
            let tau = curve.tangent(j);
            let nu = curve.nu[j];
            let us = du[j] / curve.speed[j];
            gx.push(q[j] * nu[0] + us * tau[0]);
            gy.push(q[j] * nu[1] + us * tau[1]);
        }
        vec![uf, PeriodicField::from_samples(&gx, kk), PeriodicField::from_samples(&gy, kk)]
    }
}

#[derive(Clone, Debug)]
struct LayerRep {
    coarse: ScalarLayers,
    fine: ScalarLayers,
    frame: RayFrame,
    /// Harmonic-part traces on Γ from Ω⁺, from Ω⁻, and on ∂Ω.
    traces: [Vec<PeriodicField>; 3],
    source: VolumeSource,
}

impl LayerRep {
    fn new(coarse: ScalarLayers, geometry: &InterfaceGeometry, t: f64, source: VolumeSource) -> Self {
        let spacing = |c: &Curve| c.w.iter().copied().fold(0.0, f64::max);
        let traces = [
            ScalarLayers::traces(&coarse.plus_curve, &coarse.u_plus, &coarse.q_plus),
            ScalarLayers::traces(&coarse.minus_curve, &coarse.u_minus, &coarse.q_minus),
            ScalarLayers::traces(&coarse.outer_curve, &coarse.u_outer, &coarse.q_outer),
        ];
        Self {
            fine: coarse.upsample(geometry, t),
            frame: RayFrame {
                rho: geometry.radius_at(t).0,
                outer: geometry.outer_radius(),
                h_gamma: spacing(&coarse.plus_curve),
                h_outer: spacing(&coarse.outer_curve),
            },
            coarse,
            traces,
            source,
        }
    }

    fn eval(&self, x: [f64; 2], phase: Phase) -> (C64, [C64; 2]) {
        let h = self.frame.eval(
            x,
            phase,
            |fine, y| if fine { self.fine.direct(y, phase) } else { self.coarse.direct(y, phase) },
            |side, th| {
                let tr = match (side, phase) {
                    (Side::Outer, _) => &self.traces[2],
                    (Side::Gamma, Phase::Plus) => &self.traces[0],
                    (Side::Gamma, Phase::Minus) => &self.traces[1],
                };
                tr.iter().map(|f| f.eval(th)).collect()
            },
        );
        let r = x[0].hypot(x[1]);
        let th = x[1].atan2(x[0]);
        let (p, pr, pt) = self.source.particular(r, th);
        let (c, s) = (th.cos(), th.sin());
        let gp = if r > 0.0 {
            [pr * c - pt * s / r, pr * s + pt * c / r]
        } else {
            [ZERO, ZERO]
        };
        (h[0] + p, [h[1] + gp[0], h[2] + gp[1]])
    }
}

#[derive(Clone, Debug)]
enum Rep {
    Modal(ModalRep),
    Layer(Box<LayerRep>),
}

/// Solution (μ⁺, μ⁻) of a two-phase Laplace problem at one time.
#[derive(Clone, Debug)]
pub struct TwoPhaseScalarField {
    backend: Backend,
    t: f64,
    rep: Rep,
    dn_plus: PeriodicField,
    dn_minus: PeriodicField,
}

impl TwoPhaseScalarField {
    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// n·∇μ^± on Γ_t (n pointing into Ω⁺), as a function of the curve parameter.
    pub fn normal_derivative(&self, phase: Phase) -> &PeriodicField {
        match phase {
            Phase::Plus => &self.dn_plus,
            Phase::Minus => &self.dn_minus,
        }
    }

    /// [∂_nμ] = n·∇μ⁺ − n·∇μ⁻.
    pub fn jump(&self) -> PeriodicField {
        &self.dn_plus - &self.dn_minus
    }

    /// μ^± at a point of the closure of the phase.
    pub fn value(&self, x: [f64; 2], phase: Phase) -> C64 {
        match &self.rep {
            Rep::Modal(m) => m.eval_polar(x[0].hypot(x[1]), x[1].atan2(x[0]), phase).0,
            Rep::Layer(l) => l.eval(x, phase).0,
        }
    }

    pub fn gradient(&self, x: [f64; 2], phase: Phase) -> [C64; 2] {
        match &self.rep {
            Rep::Modal(m) => {
                let r = x[0].hypot(x[1]);
                let th = x[1].atan2(x[0]);
                let (_, dr, dt) = m.eval_polar(r, th, phase);
                let (c, s) = (th.cos(), th.sin());
                if r == 0.0 {
                    // only |k| = 1 modes have a gradient at the origin; P is at least quadratic
                    let kb = m.kb as i64;
                    let mut g = [ZERO; 2];
                    if phase == Phase::Plus && m.kb >= 1 {
                        let a = m.plus[(1 + kb) as usize] / m.scale_plus;
                        let b = m.plus[(kb - 1) as usize] / m.scale_plus;
                        g = [a + b, C64::new(0.0, 1.0) * (a - b)];
                    }
                    return g;
                }
                [dr * c - dt * s / r, dr * s + dt * c / r]
            }
            Rep::Layer(l) => l.eval(x, phase).1,
        }
    }

    /// Values on a ring inside a phase: Ω⁺ at r = frac·ρ(θ), Ω⁻ at
    /// r = ρ(θ) + frac·(R − ρ(θ)), sampled on n equispaced angles.
    pub fn ring(&self, geometry: &InterfaceGeometry, phase: Phase, frac: f64, n: usize) -> Vec<C64> {
        let outer = geometry.outer_radius();
        nodes(n)
            .into_iter()
            .map(|th| {
                let rho = geometry.radius_derivs(th, self.t)[0];
                let r = match phase {
                    Phase::Plus => frac * rho,
                    Phase::Minus => rho + frac * (outer - rho),
                };
                self.value([r * th.cos(), r * th.sin()], phase)
            })
            .collect()
    }
}

#[allow(clippy::large_enum_variant)]
enum Imp {
    Circle {
        r0: f64,
    },
    Collocation {
        kb: usize,
        snap: CurveSnapshot,
        scale_plus: f64,
        scale_minus: f64,
        theta: Vec<f64>,
        rho: Vec<f64>,
        ls_plus: LeastSquares,
        ls_minus: LeastSquares,
    },
    Bie(Box<BieImp>),
}

struct BieImp {
    geometry: InterfaceGeometry,
    snap: CurveSnapshot,
    plus_curve: Curve,
    minus_curve: Curve,
    outer_curve: Curve,
    lu_plus: nalgebra::linalg::LU<f64, Dyn, Dyn>,
    lu_minus: nalgebra::linalg::LU<f64, Dyn, Dyn>,
    d_plus: DMatrix<f64>,
    d_minus: DMatrix<f64>,
    s_go: DMatrix<f64>,
    d_go: DMatrix<f64>,
    s_oo: DMatrix<f64>,
    d_og: DMatrix<f64>,
    d_oo: DMatrix<f64>,
    a_plus: DMatrix<f64>,
    a_minus: DMatrix<f64>,
}

/// Factorized two-phase Laplace solver for one geometry snapshot; reusable for
/// many data sets (column probing, time stepping on static geometry).
pub struct LaplaceSolver {
    backend: Backend,
    bc: MuOuter,
    t: f64,
    cutoff: usize,
    outer: f64,
    imp: Imp,
}

/// Residual tolerance of the collocation and integral equation solves.
pub const RESIDUAL_TOL: f64 = 1e-8;

pub(crate) const MAX_COLLOCATION_MODES: usize = 160;

impl LaplaceSolver {
    /// Spectral backend with default resolution, BIE with max(256, 4K) nodes.
    pub fn new(
        geometry: &InterfaceGeometry,
        t: f64,
        bc: MuOuter,
        backend: Backend,
        cutoff: usize,
    ) -> Result<Self> {
        let nodes = (4 * cutoff + 8).max(256);
        Self::with_resolution(geometry, t, bc, backend, cutoff, nodes + nodes % 2)
    }

    /// `nodes` is the quadrature size per curve for the BIE backend.
    pub fn with_resolution(
        geometry: &InterfaceGeometry,
        t: f64,
        bc: MuOuter,
        backend: Backend,
        cutoff: usize,
        nodes: usize,
    ) -> Result<Self> {
        let outer = geometry.outer_radius();
        let imp = match backend {
            Backend::Spectral => match geometry.circle_radius(t) {
                Some(r0) => Imp::Circle { r0 },
                None => return Self::adaptive_collocation(geometry, t, bc, cutoff),
            },
            Backend::Bie => {
                if !nodes.is_multiple_of(2) || nodes < 16 {
                    return Err(Error::InvalidConfig("BIE node count must be even and >= 16".into()));
                }
                Imp::Bie(Box::new(Self::bie(geometry, t, bc, nodes)?))
            }
        };
        Ok(Self {
            backend,
            bc,
            t,
            cutoff,
            outer,
            imp,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Grows the basis until a top-mode probe passes the residual check.
    fn adaptive_collocation(geometry: &InterfaceGeometry, t: f64, bc: MuOuter, cutoff: usize) -> Result<Self> {
        let k = cutoff.max(1);
        let probe = LaplaceData::symmetric(&PeriodicField::trig(k, k as i64, 1.0, 1.0) + &PeriodicField::constant(k, 1.0));
        let mut kb = 2 * cutoff + 16;
        loop {
            let solver = Self {
                backend: Backend::Spectral,
                bc,
                t,
                cutoff,
                outer: geometry.outer_radius(),
                imp: Self::collocation(geometry, t, bc, kb)?,
            };
            match solver.solve_collocation(&probe) {
                Err(Error::BackendResolutionTooLow { .. }) if kb < MAX_COLLOCATION_MODES => {
                    kb = (kb * 3 / 2).min(MAX_COLLOCATION_MODES);
                }
                _ => return Ok(solver),
            }
        }
    }

    fn collocation(geometry: &InterfaceGeometry, t: f64, bc: MuOuter, kb: usize) -> Result<Imp> {
        let snap = geometry.snapshot(t, geometry.metric_grid(kb));
        let (scale_plus, scale_minus) = (snap.rho_max(), snap.rho_min());
        let m = 4 * kb + 8;
        let theta = nodes(m);
        let (rho_f, _) = geometry.radius_at(t);
        let rho = rho_f.real_samples(m);
        let outer = geometry.outer_radius();
        let kbi = kb as i64;
        let build = |phase: Phase| {
            CMat::from_fn(m, 2 * kb + 1, |i, j| {
                let k = j as i64 - kbi;
                let b = match phase {
                    Phase::Plus => plus_basis(k, rho[i], scale_plus).0,
                    Phase::Minus => minus_basis(k, rho[i], scale_minus, outer, bc).0,
                };
                C64::from_polar(b, k as f64 * theta[i])
            })
        };
        let ls_plus = LeastSquares::new(build(Phase::Plus))?;
        let ls_minus = LeastSquares::new(build(Phase::Minus))?;
        Ok(Imp::Collocation {
            kb,
            snap,
            scale_plus,
            scale_minus,
            theta,
            rho,
            ls_plus,
            ls_minus,
        })
    }

    fn bie(geometry: &InterfaceGeometry, t: f64, bc: MuOuter, n: usize) -> Result<BieImp> {
        let snap = geometry.snapshot(t, n);
        let plus_curve = Curve::interface(&snap, true);
        let minus_curve = Curve::interface(&snap, false);
        let outer_curve = Curve::circle(geometry.outer_radius(), n);
        let kress = bie::kress_weights(n);
        let s_gg = bie::laplace_slp(&plus_curve.x, &plus_curve, Some(&kress));
        let d_plus = bie::laplace_dlp(&plus_curve.x, &plus_curve, true);
        let d_minus = bie::laplace_dlp(&minus_curve.x, &minus_curve, true);
        let s_go = bie::laplace_slp(&minus_curve.x, &outer_curve, None);
        let d_go = bie::laplace_dlp(&minus_curve.x, &outer_curve, false);
        let s_og = bie::laplace_slp(&outer_curve.x, &minus_curve, None);
        let d_og = bie::laplace_dlp(&outer_curve.x, &minus_curve, false);
        let s_oo = bie::laplace_slp(&outer_curve.x, &outer_curve, Some(&kress));
        let d_oo = bie::laplace_dlp(&outer_curve.x, &outer_curve, true);

        // Ω⁺: [S 1; wᵀ 0] [q; c]
        let mut a_plus = DMatrix::zeros(n + 1, n + 1);
        a_plus.view_mut((0, 0), (n, n)).copy_from(&s_gg);
        for i in 0..n {
            a_plus[(i, n)] = 1.0;
            a_plus[(n, i)] = plus_curve.w[i];
        }
        // Ω⁻: unknowns [q_Γ; outer unknown; c]
        let mut a_minus = DMatrix::zeros(2 * n + 1, 2 * n + 1);
        a_minus.view_mut((0, 0), (n, n)).copy_from(&s_gg);
        a_minus.view_mut((n, 0), (n, n)).copy_from(&s_og);
        match bc {
            MuOuter::Neumann => {
                a_minus.view_mut((0, n), (n, n)).copy_from(&(-&d_go));
                let mut blk = -&d_oo;
                for i in 0..n {
                    blk[(i, i)] -= 0.5;
                }
                a_minus.view_mut((n, n), (n, n)).copy_from(&blk);
            }
            MuOuter::Dirichlet => {
                a_minus.view_mut((0, n), (n, n)).copy_from(&s_go);
                a_minus.view_mut((n, n), (n, n)).copy_from(&s_oo);
                for i in 0..n {
                    a_minus[(2 * n, n + i)] = outer_curve.w[i];
                }
            }
        }
        for i in 0..2 * n {
            a_minus[(i, 2 * n)] = 1.0;
        }
        for i in 0..n {
            a_minus[(2 * n, i)] = minus_curve.w[i];
        }
        let lu_plus = a_plus.clone().lu();
        let lu_minus = a_minus.clone().lu();
        for lu in [&lu_plus, &lu_minus] {
            let u = lu.u();
            let d: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].abs()).collect();
            let hi = d.iter().copied().fold(0.0, f64::max);
            let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
            if !(lo > 0.0) {
                return Err(Error::SingularSystem("boundary integral system".into()));
            }
            if hi / lo > 1e12 {
                log::warn!("boundary integral system is ill conditioned (pivot ratio {:.3e})", hi / lo);
            }
        }
        Ok(BieImp {
            geometry: geometry.clone(),
            snap,
            plus_curve,
            minus_curve,
            outer_curve,
            lu_plus,
            lu_minus,
            d_plus,
            d_minus,
            s_go,
            d_go,
            s_oo,
            d_og,
            d_oo,
            a_plus,
            a_minus,
        })
    }

    fn check_data(&self, data: &LaplaceData) -> Result<()> {
        for f in [&data.f_plus, &data.f_minus] {
            if f.cutoff() != self.cutoff {
                return Err(Error::CutoffMismatch {
                    expected: self.cutoff,
                    got: f.cutoff(),
                });
            }
        }
        Ok(())
    }

    pub fn solve(&self, data: &LaplaceData) -> Result<TwoPhaseScalarField> {
        self.check_data(data)?;
        match &self.imp {
            Imp::Circle { r0 } => self.solve_circle(*r0, data),
            Imp::Collocation { .. } => self.solve_collocation(data),
            Imp::Bie(b) => self.solve_bie(b, data),
        }
    }

    /// Per-mode outer lift coefficients so that the lift plus P meets the outer datum.
    fn lift_coefficients(&self, data: &LaplaceData) -> Vec<(i64, C64)> {
        let big_r = self.outer;
        let ka = data.outer.cutoff() as i64;
        let kp = data.source.terms().iter().map(|t| t.k.abs()).max().unwrap_or(0);
        let kmax = ka.max(kp);
        // modes of P and ∂_rP on r = R
        let n = (4 * kmax + 8) as usize;
        let th = nodes(n);
        let (pv, pr): (Vec<C64>, Vec<C64>) = th
            .iter()
            .map(|&t| {
                let (v, dr, _) = data.source.particular(big_r, t);
                (v, dr)
            })
            .unzip();
        let target = match self.bc {
            MuOuter::Neumann => PeriodicField::from_samples(&pr, kmax as usize),
            MuOuter::Dirichlet => PeriodicField::from_samples(&pv, kmax as usize),
        };
        let a4 = data.outer.resize(kmax as usize);
        (-kmax..=kmax)
            .filter_map(|k| {
                let c = a4.mode(k) - target.mode(k);
                (c.norm() > 0.0).then_some((k, c))
            })
            .collect()
    }

    fn solve_circle(&self, r0: f64, data: &LaplaceData) -> Result<TwoPhaseScalarField> {
        let kb = self.cutoff;
        let kbi = kb as i64;
        let lift = self.lift_coefficients(data);
        let mut rep = ModalRep {
            kb,
            plus: vec![ZERO; 2 * kb + 1],
            minus: vec![ZERO; 2 * kb + 1],
            scale_plus: r0,
            scale_minus: r0,
            outer: self.outer,
            bc: self.bc,
            lift,
            source: data.source.clone(),
        };
        // modes of P and the lift on r = r₀
        let n = (4 * kb + 8).max(16);
        let th = nodes(n);
        let known_plus: Vec<C64> = th.iter().map(|&t| rep.eval_polar(r0, t, Phase::Plus).0).collect();
        let known_minus: Vec<C64> = th.iter().map(|&t| rep.eval_polar(r0, t, Phase::Minus).0).collect();
        let kp = PeriodicField::from_samples(&known_plus, kb);
        let km = PeriodicField::from_samples(&known_minus, kb);
        let mut dn_plus = PeriodicField::zeros(kb);
        let mut dn_minus = PeriodicField::zeros(kb);
        for k in -kbi..=kbi {
            let i = (k + kbi) as usize;
            rep.plus[i] = data.f_plus.mode(k) - kp.mode(k);
            rep.minus[i] = data.f_minus.mode(k) - km.mode(k);
        }
        // n = −e_r on circles: n·∇μ = −∂_rμ
        let dr_plus: Vec<C64> = th.iter().map(|&t| rep.eval_polar(r0, t, Phase::Plus).1).collect();
        let dr_minus: Vec<C64> = th.iter().map(|&t| rep.eval_polar(r0, t, Phase::Minus).1).collect();
        let fp = PeriodicField::from_samples(&dr_plus, kb);
        let fm = PeriodicField::from_samples(&dr_minus, kb);
        for k in -kbi..=kbi {
            dn_plus.set_mode(k, -fp.mode(k));
            dn_minus.set_mode(k, -fm.mode(k));
        }
        self.finish(Rep::Modal(rep), dn_plus, dn_minus, data)
    }

    fn finish(
        &self,
        rep: Rep,
        mut dn_plus: PeriodicField,
        mut dn_minus: PeriodicField,
        data: &LaplaceData,
    ) -> Result<TwoPhaseScalarField> {
        let real = data.f_plus.is_real()
            && data.f_minus.is_real()
            && data.outer.is_real()
            && data.source.terms().is_empty();
        if real {
            dn_plus.symmetrize();
            dn_minus.symmetrize();
        }
        Ok(TwoPhaseScalarField {
            backend: self.backend,
            t: self.t,
            rep,
            dn_plus,
            dn_minus,
        })
    }

    fn solve_collocation(&self, data: &LaplaceData) -> Result<TwoPhaseScalarField> {
        let Imp::Collocation {
            kb,
            snap,
            scale_plus,
            scale_minus,
            theta,
            rho,
            ls_plus,
            ls_minus,
        } = &self.imp
        else {
            unreachable!()
        };
        let kb = *kb;
        let mut rep = ModalRep {
            kb,
            plus: vec![ZERO; 2 * kb + 1],
            minus: vec![ZERO; 2 * kb + 1],
            scale_plus: *scale_plus,
            scale_minus: *scale_minus,
            outer: self.outer,
            bc: self.bc,
            lift: self.lift_coefficients(data),
            source: data.source.clone(),
        };
        let m = theta.len();
        let rhs = |phase: Phase, f: &PeriodicField, rep: &ModalRep| {
            CVec::from_fn(m, |i, _| f.eval(theta[i]) - rep.eval_polar(rho[i], theta[i], phase).0)
        };
        let bp = rhs(Phase::Plus, &data.f_plus, &rep);
        let bm = rhs(Phase::Minus, &data.f_minus, &rep);
        rep.plus = ls_plus.solve(&bp).iter().copied().collect();
        rep.minus = ls_minus.solve(&bm).iter().copied().collect();

        // residual on a staggered check grid
        let scale = data.f_plus.max_abs().max(data.f_minus.max_abs()).max(1.0);
        let mut worst: f64 = 0.0;
        let nc = 3 * kb + 7;
        for i in 0..nc {
            let th = (i as f64 + 0.5) * 2.0 * PI / nc as f64;
            let d = snap_radius(snap, th);
            for (phase, f) in [(Phase::Plus, &data.f_plus), (Phase::Minus, &data.f_minus)] {
                let v = rep.eval_polar(d, th, phase).0;
                worst = worst.max((v - f.eval(th)).norm());
            }
        }
        if worst > RESIDUAL_TOL * scale {
            return Err(Error::BackendResolutionTooLow {
                residual: worst,
                tolerance: RESIDUAL_TOL * scale,
            });
        }

        let n = snap.n;
        let mut sp = Vec::with_capacity(n);
        let mut sm = Vec::with_capacity(n);
        for j in 0..n {
            let (r, th) = (snap.rho[j], snap.theta[j]);
            let nrm = snap.normal[j];
            let (c, s) = (th.cos(), th.sin());
            for (phase, out) in [(Phase::Plus, &mut sp), (Phase::Minus, &mut sm)] {
                let (_, dr, dt) = rep.eval_polar(r, th, phase);
                let g = [dr * c - dt * s / r, dr * s + dt * c / r];
                out.push(g[0] * nrm[0] + g[1] * nrm[1]);
            }
        }
        let dn_plus = PeriodicField::from_samples(&sp, self.cutoff);
        let dn_minus = PeriodicField::from_samples(&sm, self.cutoff);
        self.finish(Rep::Modal(rep), dn_plus, dn_minus, data)
    }

    fn solve_bie(&self, b: &BieImp, data: &LaplaceData) -> Result<TwoPhaseScalarField> {
        let n = b.snap.n;
        let big_r = self.outer;
        // harmonic parts: subtract the particular solution
        let f_plus: Vec<C64> = (0..n)
            .map(|j| data.f_plus.eval(b.snap.theta[j]) - data.source.particular(b.snap.rho[j], b.snap.theta[j]).0)
            .collect();
        let f_minus: Vec<C64> = (0..n)
            .map(|j| data.f_minus.eval(b.snap.theta[j]) - data.source.particular(b.snap.rho[j], b.snap.theta[j]).0)
            .collect();
        let outer_theta = nodes(n);
        let g: Vec<C64> = outer_theta
            .iter()
            .map(|&th| {
                let (p, pr, _) = data.source.particular(big_r, th);
                data.outer.eval(th)
                    - match self.bc {
                        MuOuter::Neumann => pr,
                        MuOuter::Dirichlet => p,
                    }
            })
            .collect();

        let split = |v: &[C64]| -> DMatrix<f64> { DMatrix::from_fn(v.len(), 2, |i, c| if c == 0 { v[i].re } else { v[i].im }) };
        let fp = split(&f_plus);
        let fm = split(&f_minus);
        let gm = split(&g);

        let mut rhs_p = DMatrix::zeros(n + 1, 2);
        let top = &fp * 0.5 + &b.d_plus * &fp;
        rhs_p.view_mut((0, 0), (n, 2)).copy_from(&top);
        let sol_p = b
            .lu_plus
            .solve(&rhs_p)
            .ok_or_else(|| Error::SingularSystem("interior boundary integral system".into()))?;
        check_residual(&b.a_plus, &sol_p, &rhs_p)?;

        let mut rhs_m = DMatrix::zeros(2 * n + 1, 2);
        match self.bc {
            MuOuter::Neumann => {
                let top = &fm * 0.5 + &b.d_minus * &fm - &b.s_go * &gm;
                let bot = &b.d_og * &fm - &b.s_oo * &gm;
                rhs_m.view_mut((0, 0), (n, 2)).copy_from(&top);
                rhs_m.view_mut((n, 0), (n, 2)).copy_from(&bot);
                for c in 0..2 {
                    rhs_m[(2 * n, c)] = -(0..n).map(|i| b.outer_curve.w[i] * gm[(i, c)]).sum::<f64>();
                }
            }
            MuOuter::Dirichlet => {
                let top = &fm * 0.5 + &b.d_minus * &fm + &b.d_go * &gm;
                let bot = &gm * 0.5 + &b.d_og * &fm + &b.d_oo * &gm;
                rhs_m.view_mut((0, 0), (n, 2)).copy_from(&top);
                rhs_m.view_mut((n, 0), (n, 2)).copy_from(&bot);
            }
        }
        let sol_m = b
            .lu_minus
            .solve(&rhs_m)
            .ok_or_else(|| Error::SingularSystem("annular boundary integral system".into()))?;
        check_residual(&b.a_minus, &sol_m, &rhs_m)?;

        let col = |m: &DMatrix<f64>, i: usize| C64::new(m[(i, 0)], m[(i, 1)]);
        let q_plus: Vec<C64> = (0..n).map(|i| col(&sol_p, i)).collect();
        let q_minus: Vec<C64> = (0..n).map(|i| col(&sol_m, i)).collect();
        let other: Vec<C64> = (0..n).map(|i| col(&sol_m, n + i)).collect();
        let (u_outer, q_outer) = match self.bc {
            MuOuter::Neumann => (other, g.clone()),
            MuOuter::Dirichlet => (g.clone(), other),
        };
        // ν = −n on the Ω⁺ side, ν = n on the Ω⁻ side; P cancels in the jump
        let dn_p: Vec<C64> = (0..n)
            .map(|j| -q_plus[j] + normal_grad_p(&data.source, &b.snap, j))
            .collect();
        let dn_m: Vec<C64> = (0..n)
            .map(|j| q_minus[j] + normal_grad_p(&data.source, &b.snap, j))
            .collect();
        let dn_plus = PeriodicField::from_samples(&dn_p, self.cutoff);
        let dn_minus = PeriodicField::from_samples(&dn_m, self.cutoff);
        let layers = ScalarLayers {
            plus_curve: b.plus_curve.clone(),
            minus_curve: b.minus_curve.clone(),
            outer_curve: b.outer_curve.clone(),
            u_plus: f_plus,
            q_plus,
            c_plus: col(&sol_p, n),
            u_minus: f_minus,
            q_minus,
            u_outer,
            q_outer,
            c_minus: col(&sol_m, 2 * n),
        };
        let rep = LayerRep::new(layers, &b.geometry, self.t, data.source.clone());
        self.finish(Rep::Layer(Box::new(rep)), dn_plus, dn_minus, data)
    }
}

fn normal_grad_p(src: &VolumeSource, snap: &CurveSnapshot, j: usize) -> C64 {
    if src.terms().is_empty() {
        return ZERO;
    }
    let (r, th) = (snap.rho[j], snap.theta[j]);
    let (_, dr, dt) = src.particular(r, th);
    let (c, s) = (th.cos(), th.sin());
    let g = [dr * c - dt * s / r, dr * s + dt * c / r];
    g[0] * snap.normal[j][0] + g[1] * snap.normal[j][1]
}

fn snap_radius(snap: &CurveSnapshot, theta: f64) -> f64 {
    // trigonometric interpolation of the stored radius samples
    let f = PeriodicField::from_real_samples(&snap.rho, (snap.n - 1) / 2);
    f.eval(theta).re
}

fn check_residual(a: &DMatrix<f64>, x: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    let r = a * x - b;
    let rel = r.norm() / b.norm().max(1e-300);
    if b.norm() > 0.0 && rel > RESIDUAL_TOL {
        return Err(Error::SingularSystem(format!("residual {rel:.3e} after direct solve")));
    }
    Ok(())
}

/// One-shot solve with explicit traces, volume source and outer datum.
#[allow(clippy::too_many_arguments)]
pub fn solve_two_phase_laplace(
    f_plus: &PeriodicField,
    f_minus: &PeriodicField,
    a1: &VolumeSource,
    a4: &PeriodicField,
    bc: &BoundaryConfig,
    geometry: &InterfaceGeometry,
    t: f64,
    backend: Backend,
) -> Result<TwoPhaseScalarField> {
    if f_plus.cutoff() != f_minus.cutoff() {
        return Err(Error::CutoffMismatch {
            expected: f_plus.cutoff(),
            got: f_minus.cutoff(),
        });
    }
    let solver = LaplaceSolver::new(geometry, t, bc.mu_outer, backend, f_plus.cutoff())?;
    solver.solve(&LaplaceData {
        f_plus: f_plus.clone(),
        f_minus: f_minus.clone(),
        source: a1.clone(),
        outer: a4.clone(),
    })
}

/// Pullback of [∂_nμ] = n·∇μ⁺ − n·∇μ⁻ at the solver's cutoff.
pub fn normal_jump(mu: &TwoPhaseScalarField) -> PeriodicField {
    mu.jump()
}

/// Ring surrogate of the phase norms: mean over rings at fractions ¼, ½, ¾ of the
/// squared H^s(T¹) norm of the ring samples.
pub fn phase_norm_sq(mu: &TwoPhaseScalarField, geometry: &InterfaceGeometry, phase: Phase, s: f64, cutoff: usize) -> f64 {
    let n = 4 * cutoff + 8;
    let fr = [0.25, 0.5, 0.75];
    fr.iter()
        .map(|&f| {
            let v = mu.ring(geometry, phase, f, n);
            h_norm(&PeriodicField::from_samples(&v, cutoff), s).powi(2)
        })
        .sum::<f64>()
        / fr.len() as f64
}

/// (LHS, RHS) of the a-priori bound for μ: LHS = Σ_± ‖μ^±‖_{L²H²} + ‖μ^±‖_{L⁶H¹} with
/// ring-surrogate phase norms, RHS = xt_norm(h).
pub fn mu_estimate_report(
    mu_traj: &[TwoPhaseScalarField],
    h_traj: &Trajectory,
    geometry: &InterfaceGeometry,
) -> Result<(f64, f64)> {
    if mu_traj.len() != h_traj.len() {
        return Err(Error::InvalidConfig(format!(
            "{} potentials for {} time nodes",
            mu_traj.len(),
            h_traj.len()
        )));
    }
    let rhs = xt_norm(h_traj)?;
    let k = h_traj.cutoff();
    let mut lhs = 0.0;
    for phase in [Phase::Plus, Phase::Minus] {
        let h2: Vec<f64> = mu_traj.iter().map(|m| phase_norm_sq(m, geometry, phase, 2.0, k)).collect();
        let h1: Vec<f64> = mu_traj
            .iter()
            .map(|m| phase_norm_sq(m, geometry, phase, 1.0, k).powi(3))
            .collect();
        lhs += h_traj.integrate(|i| h2[i]).sqrt() + h_traj.integrate(|i| h1[i]).powf(1.0 / 6.0);
    }
    Ok((lhs, rhs))
}

/// lhs/rhs, with 0/0 read as 0.
pub fn estimate_ratio((lhs, rhs): (f64, f64)) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn circles() -> InterfaceGeometry {
        InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap()
    }

    #[test]
    fn constants_are_reproduced() {
        let g = circles();
        for backend in [Backend::Spectral, Backend::Bie] {
            let s = LaplaceSolver::with_resolution(&g, 0.0, MuOuter::Neumann, backend, 4, 64).unwrap();
            let mu = s.solve(&LaplaceData::symmetric(PeriodicField::constant(4, 1.0))).unwrap();
            assert!(mu.jump().max_abs() < 1e-10, "{backend}");
            assert_abs_diff_eq!(mu.value([0.3, 0.2], Phase::Plus).re, 1.0, epsilon = 1e-10);
            // interior quadrature at 64 nodes limits the annulus value
            assert_abs_diff_eq!(mu.value([1.4, 0.2], Phase::Minus).re, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn radial_dirichlet_profile() {
        let g = circles();
        let s = LaplaceSolver::new(&g, 0.0, MuOuter::Dirichlet, Backend::Spectral, 2).unwrap();
        let mu = s.solve(&LaplaceData::symmetric(PeriodicField::constant(2, 1.0))).unwrap();
        let r: f64 = 1.5;
        assert_abs_diff_eq!(mu.value([r, 0.0], Phase::Minus).re, (2.0 / r).ln() / 2f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(mu.value([0.5, 0.1], Phase::Plus).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn source_and_outer_data_bie_match_spectral() {
        let g = circles();
        let src = VolumeSource::new(vec![
            SourceTerm { k: 0, m: 0, coeff: C64::new(1.0, 0.0) },
            SourceTerm { k: 1, m: 1, coeff: C64::new(0.5, 0.0) },
            SourceTerm { k: -1, m: 1, coeff: C64::new(0.5, 0.0) },
        ])
        .unwrap();
        for bc in [MuOuter::Neumann, MuOuter::Dirichlet] {
            let data = LaplaceData {
                f_plus: PeriodicField::trig(6, 2, 1.0, 0.3),
                f_minus: PeriodicField::trig(6, 3, -0.5, 0.2),
                source: src.clone(),
                outer: PeriodicField::trig(6, 1, 0.4, 0.0),
            };
            let a = LaplaceSolver::new(&g, 0.0, bc, Backend::Spectral, 6).unwrap().solve(&data).unwrap();
            let b = LaplaceSolver::with_resolution(&g, 0.0, bc, Backend::Bie, 6, 128).unwrap().solve(&data).unwrap();
            assert!((&a.jump() - &b.jump()).max_abs() < 1e-9, "{bc:?}");
            let x = [0.9 * 0.6, 0.4 * 0.6];
            assert!((a.value(x, Phase::Plus) - b.value(x, Phase::Plus)).norm() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_polynomial_source() {
        assert!(VolumeSource::new(vec![SourceTerm { k: 2, m: 1, coeff: C64::new(1.0, 0.0) }]).is_err());
    }
}
