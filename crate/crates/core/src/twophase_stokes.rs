//! Two-phase stationary Stokes problems in Ω = B_R(0) with a star-shaped
//! interface Γ_t: velocity and traction jumps on Γ_t, a polynomial body force,
//! and one outer condition family (B₁ Dirichlet, B₂ Navier slip, B₃ Robin).
//!
//! Backends mirror the Laplace solver: stream-function modes per phase (exact
//! per mode on concentric circles, collocation least squares otherwise) and a
//! Nyström discretization of the direct boundary integral formulation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Dyn};

use crate::bc::{BoundaryConfig, VelocityOuter};
use crate::bie::{self, Curve};
use crate::error::{Error, Result};
use crate::field::{nodes, PeriodicField, VectorField, C64};
use crate::geometry::{CurveSnapshot, InterfaceGeometry, Phase};
use crate::linalg::{gauss_legendre, min_norm_solve, nullspace, CMat, CVec, LeastSquares};
use crate::nearfield::{self, RayFrame, Side};
use crate::sobolev::h_norm;
use crate::twophase_elliptic::{Backend, VolumeSource, MAX_COLLOCATION_MODES, RESIDUAL_TOL};

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Volume force f = ∇Φ + ∇^⊥Ψ with ∇^⊥ = (∂_y, −∂_x) and polynomial potentials.
/// The particular pair is p_p = Φ, v_p = ∇^⊥χ with Δχ = −Ψ.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BodyForce {
    pub potential: VolumeSource,
    pub stream: VolumeSource,
}

impl BodyForce {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.potential.is_zero() && self.stream.is_zero()
    }

    fn particular(&self, r: f64, th: f64) -> PolarState {
        let mut st = PolarState::default();
        if self.is_zero() {
            return st;
        }
        let r = r.max(1e-12);
        for t in self.stream.terms() {
            let n = t.m as f64 + 2.0;
            let a = -t.coeff / (n * n - (t.k * t.k) as f64);
            let f = [
                a * r.powf(n),
                a * n * r.powf(n - 1.0),
                a * n * (n - 1.0) * r.powf(n - 2.0),
                ZERO,
            ];
            let mut v = stream_vals(t.k, f, r);
            v.p = ZERO;
            st.add_mode(t.k, &v, r, C64::from_polar(1.0, t.k as f64 * th));
        }
        st.p += self.potential.value(r, th);
        st
    }

    /// f at a Cartesian point.
    pub fn value(&self, x: [f64; 2]) -> [C64; 2] {
        let r = x[0].hypot(x[1]).max(1e-12);
        let th = x[1].atan2(x[0]);
        let (mut fr, mut ft) = (ZERO, ZERO);
        for t in self.potential.terms() {
            let e = t.coeff * C64::from_polar(1.0, t.k as f64 * th) * r.powf(t.m as f64 - 1.0);
            fr += e * t.m as f64;
            ft += e * I * t.k as f64;
        }
        for t in self.stream.terms() {
            let e = t.coeff * C64::from_polar(1.0, t.k as f64 * th) * r.powf(t.m as f64 - 1.0);
            fr += e * I * t.k as f64;
            ft -= e * t.m as f64;
        }
        let (c, s) = (th.cos(), th.sin());
        [fr * c - ft * s, fr * s + ft * c]
    }
}

/// Radial factor of one homogeneous Stokes solution in angular mode k.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Radial {
    /// Stream function F = (r/ρ)^a.
    Power { a: f64, scale: f64 },
    /// F = r log(r/ρ), used with |k| = 1.
    RLog { scale: f64 },
    /// k = 0: u_θ = r/ρ.
    Rotation { scale: f64 },
    /// k = 0: u_θ = ρ/r.
    Vortex { scale: f64 },
    /// k = 0: u_r = ρ/r.
    Source { scale: f64 },
    /// k = 0: constant pressure.
    Pressure,
}

/// Polar velocity, pressure and radial derivatives of one mode, without e^{ikθ}.
#[derive(Clone, Copy, Debug, Default)]
struct ModeVals {
    ur: C64,
    ut: C64,
    p: C64,
    dur: C64,
    dut: C64,
}

/// ψ = F e^{ikθ}: u_r = ikF/r, u_θ = −F', p = i rΦ'/k with Φ = Δ_k F.
fn stream_vals(k: i64, f: [C64; 4], r: f64) -> ModeVals {
    let kk = (k * k) as f64;
    let ik = I * k as f64;
    let [f0, f1, f2, f3] = f;
    let p = if k == 0 {
        ZERO
    } else {
        let dphi = f3 + f2 / r - f1 / (r * r) - f1 * kk / (r * r) + f0 * 2.0 * kk / (r * r * r);
        I * r * dphi / k as f64
    };
    ModeVals {
        ur: ik * f0 / r,
        ut: -f1,
        p,
        dur: ik * (f1 / r - f0 / (r * r)),
        dut: -f2,
    }
}

impl Radial {
    fn eval(&self, k: i64, r: f64) -> ModeVals {
        let re = |v: f64| C64::new(v, 0.0);
        match *self {
            Radial::Power { a, scale } => {
                let f0 = (r / scale).powf(a);
                stream_vals(
                    k,
                    [
                        re(f0),
                        re(a * f0 / r),
                        re(a * (a - 1.0) * f0 / (r * r)),
                        re(a * (a - 1.0) * (a - 2.0) * f0 / (r * r * r)),
                    ],
                    r,
                )
            }
            Radial::RLog { scale } => {
                let l = (r / scale).ln();
                stream_vals(k, [re(r * l), re(l + 1.0), re(1.0 / r), re(-1.0 / (r * r))], r)
            }
            Radial::Rotation { scale } => ModeVals {
                ut: re(r / scale),
                dut: re(1.0 / scale),
                ..Default::default()
            },
            Radial::Vortex { scale } => ModeVals {
                ut: re(scale / r),
                dut: re(-scale / (r * r)),
                ..Default::default()
            },
            Radial::Source { scale } => ModeVals {
                ur: re(scale / r),
                dur: re(-scale / (r * r)),
                ..Default::default()
            },
            Radial::Pressure => ModeVals {
                p: re(1.0),
                ..Default::default()
            },
        }
    }
}

/// Velocity, pressure and velocity gradient in the polar frame; g[i][j] = (∇v)_{ij}
/// with index 0 = r, 1 = θ and (∇v)_{ij} = ∂_j v_i.
#[derive(Clone, Copy, Debug, Default)]
struct PolarState {
    ur: C64,
    ut: C64,
    p: C64,
    g: [[C64; 2]; 2],
}

impl PolarState {
    fn add_mode(&mut self, k: i64, v: &ModeVals, r: f64, e: C64) {
        let ik = I * k as f64;
        self.ur += v.ur * e;
        self.ut += v.ut * e;
        self.p += v.p * e;
        self.g[0][0] += v.dur * e;
        self.g[0][1] += (ik * v.ur - v.ut) / r * e;
        self.g[1][0] += v.dut * e;
        self.g[1][1] += (ik * v.ut + v.ur) / r * e;
    }

    fn srr(&self) -> C64 {
        self.g[0][0] * 2.0 - self.p
    }

    fn srt(&self) -> C64 {
        self.g[0][1] + self.g[1][0]
    }

    fn to_point(self, th: f64) -> PointState {
        let (c, s) = (th.cos(), th.sin());
        let q = [[c, -s], [s, c]];
        let pol = [self.ur, self.ut];
        let mut v = [ZERO; 2];
        let mut grad = [[ZERO; 2]; 2];
        for i in 0..2 {
            for a in 0..2 {
                v[i] += pol[a] * q[i][a];
            }
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        grad[i][j] += self.g[a][b] * (q[i][a] * q[j][b]);
                    }
                }
            }
        }
        PointState { v, grad, p: self.p }
    }
}

/// Velocity, velocity gradient (∂_j v_i) and pressure at a Cartesian point.
#[derive(Clone, Copy, Debug, Default)]
pub struct PointState {
    pub v: [C64; 2],
    pub grad: [[C64; 2]; 2],
    pub p: C64,
}

impl PointState {
    /// D_s v = ½(∇v + ∇vᵀ).
    pub fn strain(&self) -> [[C64; 2]; 2] {
        let g = &self.grad;
        [
            [g[0][0], (g[0][1] + g[1][0]) * 0.5],
            [(g[0][1] + g[1][0]) * 0.5, g[1][1]],
        ]
    }

    /// 2D_s v − pI.
    pub fn stress(&self) -> [[C64; 2]; 2] {
        let d = self.strain();
        [
            [d[0][0] * 2.0 - self.p, d[0][1] * 2.0],
            [d[1][0] * 2.0, d[1][1] * 2.0 - self.p],
        ]
    }

    pub fn traction(&self, n: [f64; 2]) -> [C64; 2] {
        let s = self.stress();
        [s[0][0] * n[0] + s[0][1] * n[1], s[1][0] * n[0] + s[1][1] * n[1]]
    }

    pub fn divergence(&self) -> C64 {
        self.grad[0][0] + self.grad[1][1]
    }
}

fn mode_state(k: i64, b: &Radial, r: f64) -> PolarState {
    let mut st = PolarState::default();
    st.add_mode(k, &b.eval(k, r), r, C64::new(1.0, 0.0));
    st
}

fn plus_basis(k: i64, scale: f64) -> Vec<Radial> {
    if k == 0 {
        vec![Radial::Rotation { scale }, Radial::Pressure]
    } else {
        let a = k.unsigned_abs() as f64;
        vec![Radial::Power { a, scale }, Radial::Power { a: a + 2.0, scale }]
    }
}

fn minus_basis(k: i64, inner: f64, outer: f64, with_pressure: bool) -> Vec<Radial> {
    match k.unsigned_abs() {
        0 => {
            let mut b = vec![
                Radial::Rotation { scale: outer },
                Radial::Vortex { scale: inner },
                Radial::Source { scale: inner },
            ];
            if with_pressure {
                b.push(Radial::Pressure);
            }
            b
        }
        1 => vec![
            Radial::Power { a: 1.0, scale: outer },
            Radial::Power { a: 3.0, scale: outer },
            Radial::Power { a: -1.0, scale: inner },
            Radial::RLog { scale: outer },
        ],
        ak => {
            let a = ak as f64;
            vec![
                Radial::Power { a, scale: outer },
                Radial::Power { a: a + 2.0, scale: outer },
                Radial::Power { a: -a, scale: inner },
                Radial::Power { a: 2.0 - a, scale: inner },
            ]
        }
    }
}

/// The two outer-condition rows of B_j applied to a polar state on r = R.
fn outer_row(bc: VelocityOuter, st: &PolarState) -> [C64; 2] {
    match bc {
        VelocityOuter::Dirichlet => [st.ur, st.ut],
        VelocityOuter::NavierSlip { alpha } => [st.ur, st.srt() + st.ut * alpha],
        VelocityOuter::Robin { alpha } => [st.srr() + st.ur * alpha, st.srt() + st.ut * alpha],
    }
}

#[derive(Clone, Copy, Debug)]
struct Term {
    k: i64,
    basis: Radial,
    c: C64,
}

#[derive(Clone, Debug)]
struct ModalFlow {
    plus: Vec<Term>,
    minus: Vec<Term>,
    force: BodyForce,
    p_shift: C64,
}

impl ModalFlow {
    fn polar(&self, r: f64, th: f64, phase: Phase) -> PolarState {
        let r = r.max(1e-12);
        let mut st = self.force.particular(r, th);
        let terms = match phase {
            Phase::Plus => &self.plus,
            Phase::Minus => &self.minus,
        };
        for t in terms {
            st.add_mode(t.k, &t.basis.eval(t.k, r), r, t.c * C64::from_polar(1.0, t.k as f64 * th));
        }
        st.p += self.p_shift;
        st
    }

    fn point(&self, x: [f64; 2], phase: Phase) -> PointState {
        let th = x[1].atan2(x[0]);
        self.polar(x[0].hypot(x[1]), th, phase).to_point(th)
    }
}

/// Stokeslet and stresslet densities on Γ (both sides) and ∂Ω.
#[derive(Clone, Debug)]
struct Layers {
    plus: Curve,
    minus: Curve,
    outer: Curve,
    v_plus: Vec<[C64; 2]>,
    t_plus: Vec<[C64; 2]>,
    v_minus: Vec<[C64; 2]>,
    t_minus: Vec<[C64; 2]>,
    v_outer: Vec<[C64; 2]>,
    t_outer: Vec<[C64; 2]>,
}

impl Layers {
    /// Homogeneous (v_x, v_y, p) by the Nyström sum.
    fn direct(&self, x: [f64; 2], phase: Phase) -> Vec<C64> {
        let mut out = vec![ZERO; 3];
        let mut add = |c: &Curve, v: &[[C64; 2]], t: &[[C64; 2]]| {
            for j in 0..c.len() {
                let g = bie::stokeslet(x, c, j);
                let d = bie::stresslet(x, c, j);
                for p in 0..2 {
                    for q in 0..2 {
                        out[p] += t[j][q] * g[p][q] + v[j][q] * d[p][q];
                    }
                }
                let gp = bie::stokeslet_pressure(x, c, j);
                let dp = bie::stresslet_pressure(x, c, j);
                out[2] += t[j][0] * gp[0] + t[j][1] * gp[1] + v[j][0] * dp[0] + v[j][1] * dp[1];
            }
        };
        match phase {
            Phase::Plus => add(&self.plus, &self.v_plus, &self.t_plus),
            Phase::Minus => {
                add(&self.minus, &self.v_minus, &self.t_minus);
                add(&self.outer, &self.v_outer, &self.t_outer);
            }
        }
        out
    }

    fn upsample(&self, geometry: &InterfaceGeometry, t: f64) -> Self {
        let n = nearfield::UPSAMPLE * self.plus.len();
        let snap = geometry.snapshot(t, n);
        let up = |v: &[[C64; 2]]| -> Vec<[C64; 2]> {
            let c = |i: usize| nearfield::upsample(&v.iter().map(|u| u[i]).collect::<Vec<_>>(), nearfield::UPSAMPLE);
            let (x, y) = (c(0), c(1));
            x.into_iter().zip(y).map(|(a, b)| [a, b]).collect()
        };
        Self {
            plus: Curve::interface(&snap, true),
            minus: Curve::interface(&snap, false),
            outer: Curve::circle(geometry.outer_radius(), n),
            v_plus: up(&self.v_plus),
            t_plus: up(&self.t_plus),
            v_minus: up(&self.v_minus),
            t_minus: up(&self.t_minus),
            v_outer: up(&self.v_outer),
            t_outer: up(&self.t_outer),
        }
    }
}

#[derive(Clone, Debug)]
struct LayerFlow {
    coarse: Layers,
    fine: Layers,
    frame: RayFrame,
    /// Homogeneous (v_x, v_y, p) traces on Γ from Ω⁺, from Ω⁻, and on ∂Ω.
    traces: [Vec<PeriodicField>; 3],
    force: BodyForce,
}

impl LayerFlow {
    fn eval(&self, x: [f64; 2], phase: Phase) -> ([C64; 2], C64) {
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
        let th = x[1].atan2(x[0]);
        let pp = self.force.particular(x[0].hypot(x[1]), th).to_point(th);
        ([h[0] + pp.v[0], h[1] + pp.v[1]], h[2] + pp.p)
    }
}

#[derive(Clone, Debug)]
enum FlowRep {
    Modal(ModalFlow),
    Layer(Box<LayerFlow>),
}

/// Traces of a two-phase flow on Γ_t as functions of the curve parameter.
#[derive(Clone, Debug)]
pub struct FlowTraces {
    pub v_plus: VectorField,
    pub v_minus: VectorField,
    pub p_plus: PeriodicField,
    pub p_minus: PeriodicField,
}

impl FlowTraces {
    /// Largest coefficient difference over all four traces.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let d = |a: &PeriodicField, b: &PeriodicField| (a - b).max_abs();
        d(&self.v_plus.x, &other.v_plus.x)
            .max(d(&self.v_plus.y, &other.v_plus.y))
            .max(d(&self.v_minus.x, &other.v_minus.x))
            .max(d(&self.v_minus.y, &other.v_minus.y))
            .max(d(&self.p_plus, &other.p_plus))
            .max(d(&self.p_minus, &other.p_minus))
    }
}

/// Solution (v^±, p^±) of a two-phase Stokes problem at one time.
#[derive(Clone, Debug)]
pub struct TwoPhaseFlowField {
    backend: Backend,
    t: f64,
    rep: FlowRep,
    traces: FlowTraces,
}

impl TwoPhaseFlowField {
    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn traces(&self) -> &FlowTraces {
        &self.traces
    }

    /// Velocity at an interior point of the phase. Layer potentials lose accuracy
    /// within a few node spacings of a boundary.
    pub fn velocity(&self, x: [f64; 2], phase: Phase) -> [C64; 2] {
        match &self.rep {
            FlowRep::Modal(m) => m.point(x, phase).v,
            FlowRep::Layer(l) => l.eval(x, phase).0,
        }
    }

    /// Full local state; gradients are available from the modal representation only.
    pub fn state(&self, x: [f64; 2], phase: Phase) -> Result<PointState> {
        match &self.rep {
            FlowRep::Modal(m) => Ok(m.point(x, phase)),
            FlowRep::Layer(_) => Err(Error::Unsupported(
                "interior gradients of a layer representation".into(),
            )),
        }
    }

    pub fn pressure(&self, x: [f64; 2], phase: Phase) -> Result<C64> {
        match &self.rep {
            FlowRep::Modal(m) => Ok(m.point(x, phase).p),
            FlowRep::Layer(l) => Ok(l.eval(x, phase).1),
        }
    }

    /// ½(v⁺ + v⁻)·n on Γ_t, pulled back to the curve parameter.
    pub fn mean_normal_velocity(&self, geometry: &InterfaceGeometry) -> PeriodicField {
        let k = self.traces.v_plus.cutoff();
        let snap = geometry.snapshot(self.t, 4 * k + 16);
        let vals: Vec<C64> = (0..snap.n)
            .map(|j| {
                let th = snap.theta[j];
                let n = snap.normal[j];
                let tr = &self.traces;
                let vx = tr.v_plus.x.eval(th) + tr.v_minus.x.eval(th);
                let vy = tr.v_plus.y.eval(th) + tr.v_minus.y.eval(th);
                (vx * n[0] + vy * n[1]) * 0.5
            })
            .collect();
        let mut f = PeriodicField::from_samples(&vals, k);
        if self.traces.v_plus.is_real() && self.traces.v_minus.is_real() {
            f.symmetrize();
        }
        f
    }
}

/// Data of one two-phase Stokes solve. Vector fields on Γ_t are functions of the
/// curve parameter; g on ∂Ω is a function of the polar angle and is read per
/// active B_j (full vector for B₁, normal and tangential parts for B₂, the
/// Robin right-hand side for B₃).
#[derive(Clone, Debug)]
pub struct StokesData {
    pub force: BodyForce,
    pub jump: VectorField,
    pub traction: VectorField,
    pub outer: VectorField,
}

impl StokesData {
    pub fn zeros(cutoff: usize) -> Self {
        Self {
            force: BodyForce::zero(),
            jump: VectorField::zeros(cutoff),
            traction: VectorField::zeros(cutoff),
            outer: VectorField::zeros(cutoff),
        }
    }

    /// Only a traction jump, the setting of the energy identity.
    pub fn traction_driven(a: VectorField) -> Self {
        let k = a.cutoff();
        Self {
            traction: a,
            ..Self::zeros(k)
        }
    }

    fn cutoff(&self) -> usize {
        self.jump.cutoff().max(self.traction.cutoff())
    }

    fn is_real(&self) -> bool {
        self.jump.is_real()
            && self.traction.is_real()
            && self.outer.is_real()
            && self.force.potential.terms().is_empty()
            && self.force.stream.terms().is_empty()
    }
}

/// ∫_Γ n·s ds − ∫_∂Ω n·g ds. With [v] = v⁺ − v⁻ and n pointing into Ω⁺, a
/// solution exists for Γ₃ᵛ = ∅ exactly when this vanishes.
pub fn check_compatibility(
    s: &VectorField,
    g: &VectorField,
    geometry: &InterfaceGeometry,
    _bc: &BoundaryConfig,
    t: f64,
) -> f64 {
    let k = s.cutoff().max(g.cutoff()).max(geometry.cutoff());
    let snap = geometry.snapshot(t, 4 * k + 16);
    let w = snap.arc_weights();
    let on_gamma: C64 = (0..snap.n)
        .map(|j| {
            let th = snap.theta[j];
            let n = snap.normal[j];
            (s.x.eval(th) * n[0] + s.y.eval(th) * n[1]) * w[j]
        })
        .sum();
    // ∫ e_r·g over the circle of radius R is 2πR times the zero mode of g_r
    let (gr, _) = g.to_polar();
    let on_outer = gr.mode(0) * 2.0 * PI * geometry.outer_radius();
    (on_gamma - on_outer).re
}

fn compatibility_tol(data: &StokesData) -> f64 {
    1e-10 * data.jump.x.max_abs().max(data.jump.y.max_abs()).max(data.outer.x.max_abs()).max(data.outer.y.max_abs()).max(1.0)
}

/// Tensor-product quadrature of a phase: trapezoid in θ, Gauss–Legendre along rays.
fn phase_quadrature(geometry: &InterfaceGeometry, t: f64, phase: Phase, n_theta: usize, n_r: usize) -> Vec<(f64, f64, f64)> {
    let big_r = geometry.outer_radius();
    let (gx, gw) = gauss_legendre(n_r, 0.0, 1.0);
    let h = 2.0 * PI / n_theta as f64;
    let mut out = Vec::with_capacity(n_theta * n_r);
    for th in nodes(n_theta) {
        let rho = geometry.radius_derivs(th, t)[0];
        let (a, b) = match phase {
            Phase::Plus => (0.0, rho),
            Phase::Minus => (rho, big_r),
        };
        for (x, w) in gx.iter().zip(&gw) {
            let r = a + (b - a) * x;
            out.push((r, th, w * (b - a) * r * h));
        }
    }
    out
}

/// ∫ f over one phase, f given in polar coordinates (r, θ).
pub fn integrate_phase(
    geometry: &InterfaceGeometry,
    t: f64,
    phase: Phase,
    n_theta: usize,
    f: impl Fn(f64, f64) -> C64,
) -> C64 {
    phase_quadrature(geometry, t, phase, n_theta, 48)
        .into_iter()
        .map(|(r, th, w)| f(r, th) * w)
        .sum()
}

/// Polar modes (g_r, g_θ) of the outer datum after removing B_j(v_p, p_p).
fn outer_data_polar(data: &StokesData, bc: VelocityOuter, outer: f64, k: usize) -> (PeriodicField, PeriodicField) {
    let (gr, gt) = data.outer.to_polar();
    let mut gr = gr.resize(k);
    let mut gt = gt.resize(k);
    if !data.force.is_zero() {
        let n = 4 * k + 16;
        let (cr, ct): (Vec<C64>, Vec<C64>) = nodes(n)
            .into_iter()
            .map(|th| {
                let r = outer_row(bc, &data.force.particular(outer, th));
                (r[0], r[1])
            })
            .unzip();
        gr = &gr - &PeriodicField::from_samples(&cr, k);
        gt = &gt - &PeriodicField::from_samples(&ct, k);
    }
    (gr, gt)
}

fn force_cutoff(f: &BodyForce) -> usize {
    f.potential
        .terms()
        .iter()
        .chain(f.stream.terms())
        .map(|t| t.m as usize + 3)
        .max()
        .unwrap_or(0)
}

struct Colloc {
    kb: usize,
    theta: Vec<f64>,
    rho: Vec<f64>,
    normal: Vec<[f64; 2]>,
    scale_plus: f64,
    inner: f64,
    /// Per mode: Ω⁻ basis, outer-row matrix and its nullspace.
    minus: Vec<(i64, Vec<Radial>, CMat, CMat)>,
    ls: LeastSquares,
}

struct StokesBie {
    snap: CurveSnapshot,
    plus: Curve,
    minus: Curve,
    outer: Curve,
    lu: nalgebra::linalg::LU<f64, Dyn, Dyn>,
    a: DMatrix<f64>,
    s_gg: DMatrix<f64>,
    d_minus: DMatrix<f64>,
    s_go: DMatrix<f64>,
    d_go: DMatrix<f64>,
    s_og: DMatrix<f64>,
    d_og: DMatrix<f64>,
    s_oo: DMatrix<f64>,
    d_oo: DMatrix<f64>,
    /// Pressure at the origin of the Ω⁻ representation, per density entry:
    /// single and double layer on Γ, then on ∂Ω.
    ext: [Vec<f64>; 4],
    normalized: bool,
}

enum StokesImp {
    Circle { r0: f64 },
    Collocation(Box<Colloc>),
    Bie(Box<StokesBie>),
}

/// Factorized two-phase Stokes solver for one geometry snapshot.
pub struct StokesSolver {
    backend: Backend,
    bc: BoundaryConfig,
    t: f64,
    cutoff: usize,
    outer: f64,
    geometry: InterfaceGeometry,
    imp: StokesImp,
}

impl StokesSolver {
    pub fn new(geometry: &InterfaceGeometry, t: f64, bc: &BoundaryConfig, backend: Backend, cutoff: usize) -> Result<Self> {
        let nodes = (4 * cutoff + 8).max(256);
        Self::with_resolution(geometry, t, bc, backend, cutoff, nodes + nodes % 2)
    }

    /// `nodes` is the quadrature size per curve for the BIE backend.
    pub fn with_resolution(
        geometry: &InterfaceGeometry,
        t: f64,
        bc: &BoundaryConfig,
        backend: Backend,
        cutoff: usize,
        nodes: usize,
    ) -> Result<Self> {
        bc.check_coercive()?;
        let imp = match backend {
            Backend::Spectral => match geometry.circle_radius(t) {
                Some(r0) => StokesImp::Circle { r0 },
                None => StokesImp::Collocation(Box::new(Self::adaptive_collocation(geometry, t, bc, cutoff)?)),
            },
            Backend::Bie => {
                if !nodes.is_multiple_of(2) || nodes < 16 {
                    return Err(Error::InvalidConfig("BIE node count must be even and >= 16".into()));
                }
                StokesImp::Bie(Box::new(Self::bie(geometry, t, bc, nodes)?))
            }
        };
        Ok(Self {
            backend,
            bc: *bc,
            t,
            cutoff,
            outer: geometry.outer_radius(),
            geometry: geometry.clone(),
            imp,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Grows the basis until a top-mode traction probe meets the residual check.
    fn adaptive_collocation(geometry: &InterfaceGeometry, t: f64, bc: &BoundaryConfig, cutoff: usize) -> Result<Colloc> {
        let k = cutoff.max(1);
        let probe = StokesData::traction_driven(VectorField::new(
            &PeriodicField::trig(k, k as i64, 1.0, 0.0) + &PeriodicField::constant(k, 1.0),
            PeriodicField::trig(k, k as i64, 0.0, 1.0),
        ));
        let mut kb = 2 * cutoff + 16;
        loop {
            let c = Self::collocation(geometry, t, bc, kb)?;
            let (_, excess) = colloc_flow(&c, &probe, bc, geometry, t)?;
            if excess <= 0.1 || kb >= MAX_COLLOCATION_MODES {
                if excess > 0.1 {
                    log::warn!("collocation basis capped at {kb} modes (probe residual ratio {excess:.3e})");
                }
                return Ok(c);
            }
            kb = (kb * 3 / 2).min(MAX_COLLOCATION_MODES);
        }
    }

    fn collocation(geometry: &InterfaceGeometry, t: f64, bc: &BoundaryConfig, kb: usize) -> Result<Colloc> {
        let snap = geometry.snapshot(t, geometry.metric_grid(kb));
        let (scale_plus, inner) = (snap.rho_max(), snap.rho_min());
        let outer = geometry.outer_radius();
        let m = 2 * kb + 8;
        let cs = geometry.snapshot(t, m);
        let kbi = kb as i64;
        let with_p = !bc.gamma3_empty();
        let mut minus = Vec::with_capacity(2 * kb + 1);
        for k in -kbi..=kbi {
            let mb = minus_basis(k, inner, outer, k != 0 || with_p);
            let rows = CMat::from_fn(2, mb.len(), |i, j| outer_row(bc.v_outer, &mode_state(k, &mb[j], outer))[i]);
            let ns = nullspace(&rows, 1e-12);
            minus.push((k, mb, rows, ns));
        }
        let mut c = Colloc {
            kb,
            theta: cs.theta.clone(),
            rho: cs.rho.clone(),
            normal: cs.normal.clone(),
            scale_plus,
            inner,
            minus,
            ls: LeastSquares::new(CMat::identity(1, 1))?,
        };
        let cols = c.columns();
        let mut a = CMat::zeros(4 * m, cols.len());
        for i in 0..m {
            let (r, th, n) = (c.rho[i], c.theta[i], c.normal[i]);
            for (j, col) in cols.iter().enumerate() {
                let st = c.column_state(col, r, th).to_point(th);
                let tr = st.traction(n);
                let sg = if col.1 == Phase::Plus { 1.0 } else { -1.0 };
                a[(4 * i, j)] = st.v[0] * sg;
                a[(4 * i + 1, j)] = st.v[1] * sg;
                a[(4 * i + 2, j)] = tr[0] * sg;
                a[(4 * i + 3, j)] = tr[1] * sg;
            }
        }
        c.ls = LeastSquares::new(a)?;
        Ok(c)
    }

    fn bie(geometry: &InterfaceGeometry, t: f64, bc: &BoundaryConfig, n: usize) -> Result<StokesBie> {
        let snap = geometry.snapshot(t, n);
        let plus = Curve::interface(&snap, true);
        let minus = Curve::interface(&snap, false);
        let outer = Curve::circle(geometry.outer_radius(), n);
        let kress = bie::kress_weights(n);
        let s_gg = bie::stokes_slp(&plus, &plus, true, Some(&kress));
        let d_plus = bie::stokes_dlp(&plus, &plus, true);
        let d_minus = bie::stokes_dlp(&minus, &minus, true);
        let s_go = bie::stokes_slp(&minus, &outer, false, None);
        let d_go = bie::stokes_dlp(&minus, &outer, false);
        let s_og = bie::stokes_slp(&outer, &minus, false, None);
        let d_og = bie::stokes_dlp(&outer, &minus, false);
        let s_oo = bie::stokes_slp(&outer, &outer, true, Some(&kress));
        let d_oo = bie::stokes_dlp(&outer, &outer, true);
        let (vm, tm) = outer_maps(bc.v_outer, &outer);

        let m = 2 * n;
        let normalized = bc.gamma3_empty();
        let extra = 1 + usize::from(normalized);
        let size = 3 * m + extra;
        let mut a = DMatrix::zeros(size, size);
        let half = DMatrix::<f64>::identity(m, m) * 0.5;
        // Ω⁺ on Γ
        a.view_mut((0, 0), (m, m)).copy_from(&(&half - &d_plus));
        a.view_mut((0, m), (m, m)).copy_from(&(-&s_gg));
        // Ω⁻ on Γ
        a.view_mut((m, 0), (m, m)).copy_from(&(&half - &d_minus));
        a.view_mut((m, m), (m, m)).copy_from(&s_gg);
        a.view_mut((m, 2 * m), (m, m)).copy_from(&(-(&s_go * &tm + &d_go * &vm)));
        // Ω⁻ on ∂Ω
        a.view_mut((2 * m, 0), (m, m)).copy_from(&(-&d_og));
        a.view_mut((2 * m, m), (m, m)).copy_from(&s_og);
        a.view_mut((2 * m, 2 * m), (m, m)).copy_from(&(&vm * 0.5 - &s_oo * &tm - &d_oo * &vm));
        // A normal density shift on either closed curve leaves every velocity
        // unchanged, so the Ω⁻ representation is required to vanish at the origin
        // (outside Ω⁻), which pins the relative pressure level of Γ and ∂Ω.
        let layer = |c: &Curve, f: fn([f64; 2], &Curve, usize) -> [f64; 2]| -> Vec<f64> {
            let mut v = vec![0.0; m];
            for j in 0..n {
                let q = f([0.0, 0.0], c, j);
                v[j] = q[0];
                v[n + j] = q[1];
            }
            v
        };
        let ext = [
            layer(&minus, bie::stokeslet_pressure),
            layer(&minus, bie::stresslet_pressure),
            layer(&outer, bie::stokeslet_pressure),
            layer(&outer, bie::stresslet_pressure),
        ];
        let row = 3 * m;
        for c in 0..m {
            a[(row, c)] = ext[1][c];
            a[(row, m + c)] = -ext[0][c];
            a[(row, 2 * m + c)] = (0..m).map(|i| ext[2][i] * tm[(i, c)] + ext[3][i] * vm[(i, c)]).sum::<f64>();
        }
        if normalized {
            // ∫_Ω p = ½∫_Γ x·a − ½∫_∂Ω x·t_o
            let row = 3 * m + 1;
            for j in 0..n {
                let w = outer.w[j];
                let x = outer.x[j];
                for c in 0..m {
                    a[(row, 2 * m + c)] += -0.5 * w * (x[0] * tm[(j, c)] + x[1] * tm[(n + j, c)]);
                }
            }
        }
        // bordering columns absorb the rank deficit of the square block
        for e in 0..extra {
            for i in 0..3 * m {
                a[(i, 3 * m + e)] = (1.3 * i as f64 + 0.7 + 2.1 * e as f64).sin();
            }
        }
        let lu = a.clone().lu();
        let u = lu.u();
        let d: Vec<f64> = (0..size).map(|i| u[(i, i)].abs()).collect();
        let hi = d.iter().copied().fold(0.0, f64::max);
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        if !(lo > 0.0) {
            return Err(Error::SingularSystem("Stokes boundary integral system".into()));
        }
        if hi / lo > 1e12 {
            log::warn!("Stokes boundary integral system is ill conditioned (pivot ratio {:.3e})", hi / lo);
        }
        Ok(StokesBie {
            snap,
            plus,
            minus,
            outer,
            lu,
            a,
            s_gg,
            d_minus,
            s_go,
            d_go,
            s_og,
            d_og,
            s_oo,
            d_oo,
            ext,
            normalized,
        })
    }

    fn check_data(&self, data: &StokesData) -> Result<()> {
        for f in [&data.jump, &data.traction] {
            if f.cutoff() != self.cutoff {
                return Err(Error::CutoffMismatch {
                    expected: self.cutoff,
                    got: f.cutoff(),
                });
            }
        }
        if self.bc.gamma3_empty() {
            let c = check_compatibility(&data.jump, &data.outer, &self.geometry, &self.bc, self.t);
            if c.abs() > compatibility_tol(data) {
                return Err(Error::CompatibilityViolated { residual: c });
            }
        }
        Ok(())
    }

    pub fn solve(&self, data: &StokesData) -> Result<TwoPhaseFlowField> {
        self.check_data(data)?;
        match &self.imp {
            StokesImp::Circle { r0 } => self.solve_circle(*r0, data),
            StokesImp::Collocation(c) => self.solve_collocation(c, data),
            StokesImp::Bie(b) => self.solve_bie(b, data),
        }
    }

    fn solve_circle(&self, r0: f64, data: &StokesData) -> Result<TwoPhaseFlowField> {
        let big_r = self.outer;
        let kmax = (data.cutoff().max(data.outer.cutoff()) + 1).max(force_cutoff(&data.force));
        let (sr, st) = data.jump.to_polar();
        let (ar, at) = data.traction.to_polar();
        let (gr, gt) = outer_data_polar(data, self.bc.v_outer, big_r, kmax);
        let with_p = !self.bc.gamma3_empty();
        let mut flow = ModalFlow {
            plus: Vec::new(),
            minus: Vec::new(),
            force: data.force.clone(),
            p_shift: ZERO,
        };
        let km = kmax as i64;
        for k in -km..=km {
            let rhs = [sr.mode(k), st.mode(k), ar.mode(k), at.mode(k), gr.mode(k), gt.mode(k)];
            if rhs.iter().all(|v| *v == ZERO) {
                continue;
            }
            let pb = plus_basis(k, r0);
            let mb = minus_basis(k, r0, big_r, k != 0 || with_p);
            let np = pb.len();
            let mut a = CMat::zeros(6, np + mb.len());
            for (j, b) in pb.iter().chain(&mb).enumerate() {
                let sg = if j < np { 1.0 } else { -1.0 };
                let s = mode_state(k, b, r0);
                a[(0, j)] = s.ur * sg;
                a[(1, j)] = s.ut * sg;
                a[(2, j)] = -s.srr() * sg;
                a[(3, j)] = -s.srt() * sg;
                if j >= np {
                    let o = outer_row(self.bc.v_outer, &mode_state(k, b, big_r));
                    a[(4, j)] = o[0];
                    a[(5, j)] = o[1];
                }
            }
            let b = CVec::from_row_slice(&rhs);
            let x = LeastSquares::new(a.clone())?.solve(&b);
            let res = (&a * &x - &b).norm();
            if res > 1e-10 * b.norm().max(1.0) {
                return Err(Error::CompatibilityViolated { residual: res });
            }
            for (j, basis) in pb.iter().chain(&mb).enumerate() {
                let t = Term { k, basis: *basis, c: x[j] };
                if j < np {
                    flow.plus.push(t);
                } else {
                    flow.minus.push(t);
                }
            }
        }
        self.finish_modal(flow, data)
    }

    fn solve_collocation(&self, c: &Colloc, data: &StokesData) -> Result<TwoPhaseFlowField> {
        let (flow, excess) = colloc_flow(c, data, &self.bc, &self.geometry, self.t)?;
        if excess > 1.0 {
            return Err(Error::BackendResolutionTooLow {
                residual: excess * RESIDUAL_TOL,
                tolerance: RESIDUAL_TOL,
            });
        }
        self.finish_modal(flow, data)
    }

    fn finish_modal(&self, mut flow: ModalFlow, data: &StokesData) -> Result<TwoPhaseFlowField> {
        let k = self.cutoff;
        if self.bc.gamma3_empty() {
            let nt = 4 * (k + force_cutoff(&data.force)) + 32;
            // on circles only the k = 0 terms have nonzero angular mean
            let circle = self.geometry.circle_radius(self.t).is_some() && data.force.is_zero();
            let mean = ModalFlow {
                plus: flow.plus.iter().filter(|t| t.k == 0).cloned().collect(),
                minus: flow.minus.iter().filter(|t| t.k == 0).cloned().collect(),
                force: BodyForce::zero(),
                p_shift: ZERO,
            };
            let (src, nt) = if circle { (&mean, 8) } else { (&flow, nt) };
            let total: C64 = [Phase::Plus, Phase::Minus]
                .iter()
                .map(|&ph| integrate_phase(&self.geometry, self.t, ph, nt, |r, th| src.polar(r, th, ph).p))
                .sum();
            flow.p_shift = -total / (PI * self.outer * self.outer);
        }
        let n = 4 * k + 16;
        let snap = self.geometry.snapshot(self.t, n);
        let mut vals: [Vec<C64>; 6] = Default::default();
        for j in 0..n {
            let (r, th) = (snap.rho[j], snap.theta[j]);
            for (o, ph) in [(0, Phase::Plus), (3, Phase::Minus)] {
                let st = flow.polar(r, th, ph).to_point(th);
                vals[o].push(st.v[0]);
                vals[o + 1].push(st.v[1]);
                vals[o + 2].push(st.p);
            }
        }
        let traces = self.make_traces(&vals, data);
        Ok(TwoPhaseFlowField {
            backend: self.backend,
            t: self.t,
            rep: FlowRep::Modal(flow),
            traces,
        })
    }

    fn make_traces(&self, vals: &[Vec<C64>; 6], data: &StokesData) -> FlowTraces {
        let k = self.cutoff;
        let real = data.is_real();
        let f = |v: &Vec<C64>| {
            let mut p = PeriodicField::from_samples(v, k);
            if real {
                p.symmetrize();
            }
            p
        };
        FlowTraces {
            v_plus: VectorField::new(f(&vals[0]), f(&vals[1])),
            p_plus: f(&vals[2]),
            v_minus: VectorField::new(f(&vals[3]), f(&vals[4])),
            p_minus: f(&vals[5]),
        }
    }

    fn solve_bie(&self, b: &StokesBie, data: &StokesData) -> Result<TwoPhaseFlowField> {
        let n = b.snap.n;
        let m = 2 * n;
        let big_r = self.outer;
        let stack = |f: &dyn Fn(usize) -> [C64; 2]| -> DMatrix<f64> {
            DMatrix::from_fn(m, 2, |i, c| {
                let v = f(i % n)[i / n];
                if c == 0 {
                    v.re
                } else {
                    v.im
                }
            })
        };
        let th = &b.snap.theta;
        let s = stack(&|j| [data.jump.x.eval(th[j]), data.jump.y.eval(th[j])]);
        let a = stack(&|j| [data.traction.x.eval(th[j]), data.traction.y.eval(th[j])]);
        let outer_th = nodes(n);
        let g_at: Vec<[C64; 2]> = outer_th
            .iter()
            .map(|&t| {
                let row = outer_row(self.bc.v_outer, &data.force.particular(big_r, t));
                let (c, sn) = (t.cos(), t.sin());
                // the rows are polar; subtract them in polar form
                let gx = data.outer.x.eval(t);
                let gy = data.outer.y.eval(t);
                let gr = gx * c + gy * sn - row[0];
                let gt = -gx * sn + gy * c - row[1];
                [gr, gt]
            })
            .collect();
        let (vk, tk) = outer_known(self.bc.v_outer, &outer_th, &g_at);
        let vk = stack(&|j| vk[j]);
        let tk = stack(&|j| tk[j]);

        let half = 0.5;
        let size = b.a.nrows();
        let mut rhs = DMatrix::zeros(size, 2);
        let r2 = &s * half - &b.s_gg * &a - &b.d_minus * &s + &b.s_go * &tk + &b.d_go * &vk;
        let r3 = -&vk * half - &b.s_og * &a - &b.d_og * &s + &b.s_oo * &tk + &b.d_oo * &vk;
        rhs.view_mut((m, 0), (m, 2)).copy_from(&r2);
        rhs.view_mut((2 * m, 0), (m, 2)).copy_from(&r3);
        for c in 0..2 {
            let col = |mat: &DMatrix<f64>, e: &[f64]| (0..m).map(|i| mat[(i, c)] * e[i]).sum::<f64>();
            rhs[(3 * m, c)] = col(&a, &b.ext[0]) + col(&s, &b.ext[1]) - col(&tk, &b.ext[2]) - col(&vk, &b.ext[3]);
        }
        if b.normalized {
            let nt = 4 * force_cutoff(&data.force) + 32;
            let pp: C64 = [Phase::Plus, Phase::Minus]
                .iter()
                .map(|&ph| integrate_phase(&self.geometry, self.t, ph, nt, |r, t| data.force.particular(r, t).p))
                .sum();
            let mut v = -pp;
            for j in 0..n {
                let x = b.plus.x[j];
                let ax = C64::new(a[(j, 0)], a[(j, 1)]);
                let ay = C64::new(a[(n + j, 0)], a[(n + j, 1)]);
                v -= (ax * x[0] + ay * x[1]) * (0.5 * b.plus.w[j]);
                let y = b.outer.x[j];
                let tx = C64::new(tk[(j, 0)], tk[(j, 1)]);
                let ty = C64::new(tk[(n + j, 0)], tk[(n + j, 1)]);
                v += (tx * y[0] + ty * y[1]) * (0.5 * b.outer.w[j]);
            }
            rhs[(3 * m + 1, 0)] = v.re;
            rhs[(3 * m + 1, 1)] = v.im;
        }
        let sol = b
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::SingularSystem("Stokes boundary integral system".into()))?;
        let res = (&b.a * &sol - &rhs).norm() / rhs.norm().max(1e-300);
        if rhs.norm() > 0.0 && res > RESIDUAL_TOL {
            return Err(Error::SingularSystem(format!("residual {res:.3e} after direct solve")));
        }
        let (vm, tm) = outer_maps(self.bc.v_outer, &b.outer);
        let xo = sol.view((2 * m, 0), (m, 2)).into_owned();
        let v_o = &vm * &xo + &vk;
        let t_o = &tm * &xo + &tk;
        let pick = |mat: &DMatrix<f64>, off: usize| -> Vec<[C64; 2]> {
            (0..n)
                .map(|j| {
                    [
                        C64::new(mat[(off + j, 0)], mat[(off + j, 1)]),
                        C64::new(mat[(off + n + j, 0)], mat[(off + n + j, 1)]),
                    ]
                })
                .collect()
        };
        let v_plus = pick(&sol, 0);
        let t_plus = pick(&sol, m);
        let sv = pick(&s, 0);
        let av = pick(&a, 0);
        let v_minus: Vec<[C64; 2]> = (0..n).map(|j| [v_plus[j][0] - sv[j][0], v_plus[j][1] - sv[j][1]]).collect();
        let t_minus: Vec<[C64; 2]> = (0..n).map(|j| [-av[j][0] - t_plus[j][0], -av[j][1] - t_plus[j][1]]).collect();

        let pressure = |v: &[[C64; 2]], t: &[[C64; 2]], curve: &Curve| -> Vec<C64> {
            let kk = n / 2 - 1;
            let dvx = PeriodicField::from_samples(&v.iter().map(|u| u[0]).collect::<Vec<_>>(), kk).derivative(1).samples(n);
            let dvy = PeriodicField::from_samples(&v.iter().map(|u| u[1]).collect::<Vec<_>>(), kk).derivative(1).samples(n);
            (0..n)
                .map(|j| {
                    let tau = curve.tangent(j);
                    let nu = curve.nu[j];
                    let tds = (dvx[j] * tau[0] + dvy[j] * tau[1]) / curve.speed[j];
                    -(t[j][0] * nu[0] + t[j][1] * nu[1]) - tds * 2.0
                })
                .collect()
        };
        let p_plus = pressure(&v_plus, &t_plus, &b.plus);
        let p_minus = pressure(&v_minus, &t_minus, &b.minus);
        let v_outer = pick(&v_o, 0);
        let t_outer = pick(&t_o, 0);
        let p_outer = pressure(&v_outer, &t_outer, &b.outer);
        let kk = n / 2 - 1;
        let fields = |v: &[[C64; 2]], p: &[C64]| -> Vec<PeriodicField> {
            vec![
                PeriodicField::from_samples(&v.iter().map(|u| u[0]).collect::<Vec<_>>(), kk),
                PeriodicField::from_samples(&v.iter().map(|u| u[1]).collect::<Vec<_>>(), kk),
                PeriodicField::from_samples(p, kk),
            ]
        };
        let layer_traces = [fields(&v_plus, &p_plus), fields(&v_minus, &p_minus), fields(&v_outer, &p_outer)];

        let mut vals: [Vec<C64>; 6] = Default::default();
        for j in 0..n {
            let (r, t) = (b.snap.rho[j], th[j]);
            let pp = data.force.particular(r, t).to_point(t);
            vals[0].push(v_plus[j][0] + pp.v[0]);
            vals[1].push(v_plus[j][1] + pp.v[1]);
            vals[2].push(p_plus[j] + pp.p);
            vals[3].push(v_minus[j][0] + pp.v[0]);
            vals[4].push(v_minus[j][1] + pp.v[1]);
            vals[5].push(p_minus[j] + pp.p);
        }
        let traces = self.make_traces(&vals, data);
        let coarse = Layers {
            plus: b.plus.clone(),
            minus: b.minus.clone(),
            outer: b.outer.clone(),
            v_plus,
            t_plus,
            v_minus,
            t_minus,
            v_outer,
            t_outer,
        };
        let spacing = |c: &Curve| c.w.iter().copied().fold(0.0, f64::max);
        let rep = LayerFlow {
            fine: coarse.upsample(&self.geometry, self.t),
            frame: RayFrame {
                rho: self.geometry.radius_at(self.t).0,
                outer: big_r,
                h_gamma: spacing(&coarse.plus),
                h_outer: spacing(&coarse.outer),
            },
            coarse,
            traces: layer_traces,
            force: data.force.clone(),
        };
        Ok(TwoPhaseFlowField {
            backend: self.backend,
            t: self.t,
            rep: FlowRep::Layer(Box::new(rep)),
            traces,
        })
    }
}

/// Collocation solve; returns the flow and the staggered-grid residual as a
/// multiple of the relative tolerance.
fn colloc_flow(
c: &Colloc,
data: &StokesData,
bc: &BoundaryConfig,
geometry: &InterfaceGeometry,
t: f64,
) -> Result<(ModalFlow, f64)> {
    let kb = c.kb;
    let big_r = geometry.outer_radius();
    let (gr, gt) = outer_data_polar(data, bc.v_outer, big_r, kb);
    let mut flow = ModalFlow {
        plus: Vec::new(),
        minus: Vec::new(),
        force: data.force.clone(),
        p_shift: ZERO,
    };
    // outer lifts
    for (k, mb, rows, _) in &c.minus {
        let g = CVec::from_row_slice(&[gr.mode(*k), gt.mode(*k)]);
        if g.norm() == 0.0 {
            continue;
        }
        let l = min_norm_solve(rows, &g)?;
        for (j, b) in mb.iter().enumerate() {
            flow.minus.push(Term { k: *k, basis: *b, c: l[j] });
        }
    }
    let lift = flow.clone();
    let m = c.theta.len();
    let mut rhs = CVec::zeros(4 * m);
    for i in 0..m {
        let (r, th, n) = (c.rho[i], c.theta[i], c.normal[i]);
        let lm = lift.polar(r, th, Phase::Minus).to_point(th);
        let lp = lift.polar(r, th, Phase::Plus).to_point(th);
        let tm = lm.traction(n);
        let tp = lp.traction(n);
        rhs[4 * i] = data.jump.x.eval(th) - lp.v[0] + lm.v[0];
        rhs[4 * i + 1] = data.jump.y.eval(th) - lp.v[1] + lm.v[1];
        rhs[4 * i + 2] = data.traction.x.eval(th) - tp[0] + tm[0];
        rhs[4 * i + 3] = data.traction.y.eval(th) - tp[1] + tm[1];
    }
    let x = c.ls.solve(&rhs);
    for (j, col) in c.columns().iter().enumerate() {
        match col.1 {
            Phase::Plus => flow.plus.push(Term {
                k: col.0,
                basis: plus_basis(col.0, c.scale_plus)[col.2],
                c: x[j],
            }),
            Phase::Minus => {
                let (_, mb, _, ns) = &c.minus[(col.0 + kb as i64) as usize];
                for (l, b) in mb.iter().enumerate() {
                    flow.minus.push(Term {
                        k: col.0,
                        basis: *b,
                        c: x[j] * ns[(l, col.2)],
                    });
                }
            }
        }
    }
    // residual on a staggered grid
    let scale = [&data.jump.x, &data.jump.y, &data.traction.x, &data.traction.y]
        .iter()
        .map(|f| f.max_abs())
        .fold(1.0, f64::max);
    let nc = 3 * kb + 7;
    let mut worst: f64 = 0.0;
    for i in 0..nc {
        let th = (i as f64 + 0.5) * 2.0 * PI / nc as f64;
        let [rho, drho, _] = geometry.radius_derivs(th, t);
        let tx = [drho * th.cos() - rho * th.sin(), drho * th.sin() + rho * th.cos()];
        let sp = tx[0].hypot(tx[1]);
        let n = [-tx[1] / sp, tx[0] / sp];
        let p = flow.polar(rho, th, Phase::Plus).to_point(th);
        let q = flow.polar(rho, th, Phase::Minus).to_point(th);
        let (tp, tq) = (p.traction(n), q.traction(n));
        for (got, want) in [
            (p.v[0] - q.v[0], data.jump.x.eval(th)),
            (p.v[1] - q.v[1], data.jump.y.eval(th)),
            (tp[0] - tq[0], data.traction.x.eval(th)),
            (tp[1] - tq[1], data.traction.y.eval(th)),
        ] {
            worst = worst.max((got - want).norm());
        }
    }
    Ok((flow, worst / (RESIDUAL_TOL * scale)))
}

impl Colloc {
    /// (k, phase, index): plus basis index, or nullspace column for Ω⁻.
    fn columns(&self) -> Vec<(i64, Phase, usize)> {
        let kbi = self.kb as i64;
        let mut out = Vec::new();
        for k in -kbi..=kbi {
            for j in 0..2 {
                out.push((k, Phase::Plus, j));
            }
            let ns = &self.minus[(k + kbi) as usize].3;
            for j in 0..ns.ncols() {
                out.push((k, Phase::Minus, j));
            }
        }
        out
    }

    fn column_state(&self, col: &(i64, Phase, usize), r: f64, th: f64) -> PolarState {
        let (k, phase, idx) = *col;
        let e = C64::from_polar(1.0, k as f64 * th);
        let mut st = PolarState::default();
        match phase {
            Phase::Plus => {
                let b = plus_basis(k, self.scale_plus)[idx];
                st.add_mode(k, &b.eval(k, r), r, e);
            }
            Phase::Minus => {
                let (_, mb, _, ns) = &self.minus[(k + self.kb as i64) as usize];
                for (l, b) in mb.iter().enumerate() {
                    st.add_mode(k, &b.eval(k, r), r, e * ns[(l, idx)]);
                }
            }
        }
        let _ = self.inner;
        st
    }
}

/// v_o = V x + v_known, t_o = T x + t_known on the outer nodes (layout [x | y]).
fn outer_maps(bc: VelocityOuter, outer: &Curve) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = outer.len();
    let m = 2 * n;
    match bc {
        VelocityOuter::Dirichlet => (DMatrix::zeros(m, m), DMatrix::identity(m, m)),
        VelocityOuter::Robin { alpha } => (DMatrix::identity(m, m), DMatrix::identity(m, m) * -alpha),
        VelocityOuter::NavierSlip { alpha } => {
            // unknowns: tangential velocity (first n), normal traction (last n)
            let mut v = DMatrix::zeros(m, m);
            let mut t = DMatrix::zeros(m, m);
            for i in 0..n {
                let [c, s] = outer.nu[i];
                v[(i, i)] = -s;
                v[(n + i, i)] = c;
                t[(i, n + i)] = c;
                t[(n + i, n + i)] = s;
                t[(i, i)] = alpha * s;
                t[(n + i, i)] = -alpha * c;
            }
            (v, t)
        }
    }
}

/// Known parts of (v_o, t_o) from polar outer data (g_r, g_θ) at the outer nodes.
fn outer_known(bc: VelocityOuter, theta: &[f64], g: &[[C64; 2]]) -> (Vec<[C64; 2]>, Vec<[C64; 2]>) {
    let cart = |th: f64, r: C64, t: C64| [r * th.cos() - t * th.sin(), r * th.sin() + t * th.cos()];
    let zero = [ZERO; 2];
    theta
        .iter()
        .zip(g)
        .map(|(&th, g)| match bc {
            VelocityOuter::Dirichlet => (cart(th, g[0], g[1]), zero),
            VelocityOuter::NavierSlip { .. } => (cart(th, g[0], ZERO), cart(th, ZERO, g[1])),
            VelocityOuter::Robin { .. } => (zero, cart(th, g[0], g[1])),
        })
        .unzip()
}

/// One-shot solve.
pub fn solve_two_phase_stokes(
    data: &StokesData,
    bc: &BoundaryConfig,
    geometry: &InterfaceGeometry,
    t: f64,
    backend: Backend,
) -> Result<TwoPhaseFlowField> {
    if data.jump.cutoff() != data.traction.cutoff() {
        return Err(Error::CutoffMismatch {
            expected: data.jump.cutoff(),
            got: data.traction.cutoff(),
        });
    }
    StokesSolver::new(geometry, t, bc, backend, data.cutoff())?.solve(data)
}

/// Energy balance of a traction-driven solve (f = 0, s = 0, g = 0):
/// ∫ 2|D_s v|² over both phases plus the friction term on ∂Ω, against −∫_Γ a·v̄.
#[derive(Clone, Copy, Debug)]
pub struct EnergyBalance {
    pub lhs: f64,
    pub rhs: C64,
}

impl EnergyBalance {
    pub fn residual(&self) -> f64 {
        (C64::new(self.lhs, 0.0) - self.rhs).norm()
    }
}

pub fn energy_balance(
    field: &TwoPhaseFlowField,
    data: &StokesData,
    bc: &BoundaryConfig,
    geometry: &InterfaceGeometry,
) -> Result<EnergyBalance> {
    let FlowRep::Modal(flow) = &field.rep else {
        return Err(Error::Unsupported("energy identity needs velocity gradients (spectral backend)".into()));
    };
    let t = field.t;
    let k = field.traces.v_plus.cutoff().max(data.cutoff());
    let nt = 4 * k + 32;
    let mut lhs = 0.0;
    for ph in [Phase::Plus, Phase::Minus] {
        lhs += integrate_phase(geometry, t, ph, nt, |r, th| {
            let d = flow.polar(r, th, ph).to_point(th).strain();
            let s: f64 = d.iter().flatten().map(|v| v.norm_sqr()).sum();
            C64::new(2.0 * s, 0.0)
        })
        .re;
    }
    let big_r = geometry.outer_radius();
    let alpha = bc.v_outer.alpha();
    if alpha > 0.0 {
        let h = 2.0 * PI / nt as f64;
        for th in nodes(nt) {
            let st = flow.polar(big_r, th, Phase::Minus);
            let e = match bc.v_outer {
                VelocityOuter::NavierSlip { .. } => st.ut.norm_sqr(),
                _ => st.ur.norm_sqr() + st.ut.norm_sqr(),
            };
            lhs += alpha * e * big_r * h;
        }
    }
    let snap = geometry.snapshot(t, nt);
    let w = snap.arc_weights();
    let tr = &field.traces;
    let rhs: C64 = (0..nt)
        .map(|j| {
            let th = snap.theta[j];
            let v = [tr.v_minus.x.eval(th), tr.v_minus.y.eval(th)];
            let a = [data.traction.x.eval(th), data.traction.y.eval(th)];
            -(a[0] * v[0].conj() + a[1] * v[1].conj()) * w[j]
        })
        .sum();
    Ok(EnergyBalance { lhs, rhs })
}

/// |LHS − RHS| of the energy identity.
pub fn energy_identity_residual(
    field: &TwoPhaseFlowField,
    data: &StokesData,
    bc: &BoundaryConfig,
    geometry: &InterfaceGeometry,
) -> Result<f64> {
    Ok(energy_balance(field, data, bc, geometry)?.residual())
}

/// Ring-surrogate norm of a phase quantity: mean over rings at ¼, ½, ¾ of the
/// squared H^s(T¹) norm.
fn ring_norm_sq(
    geometry: &InterfaceGeometry,
    t: f64,
    phase: Phase,
    cutoff: usize,
    s: f64,
    f: impl Fn([f64; 2]) -> Vec<C64>,
) -> f64 {
    let n = 4 * cutoff + 8;
    let big_r = geometry.outer_radius();
    let fr = [0.25, 0.5, 0.75];
    let mut total = 0.0;
    for &frac in &fr {
        let mut cols: Vec<Vec<C64>> = Vec::new();
        for th in nodes(n) {
            let rho = geometry.radius_derivs(th, t)[0];
            let r = match phase {
                Phase::Plus => frac * rho,
                Phase::Minus => rho + frac * (big_r - rho),
            };
            let v = f([r * th.cos(), r * th.sin()]);
            if cols.is_empty() {
                cols = vec![Vec::with_capacity(n); v.len()];
            }
            for (c, x) in cols.iter_mut().zip(v) {
                c.push(x);
            }
        }
        total += cols
            .iter()
            .map(|c| h_norm(&PeriodicField::from_samples(c, cutoff), s).powi(2))
            .sum::<f64>();
    }
    total / fr.len() as f64
}

fn vec_norm(v: &VectorField, s: f64) -> f64 {
    (h_norm(&v.x, s).powi(2) + h_norm(&v.y, s).powi(2)).sqrt()
}

/// (LHS, RHS) of the a-priori Stokes bound with ring-surrogate phase norms:
/// LHS = Σ_± ‖v^±‖_{H²} + ‖p^±‖_{H¹}, RHS = ‖f‖_{L²} + ‖s‖_{H^{3/2}} + ‖a‖_{H^{1/2}} + ‖g‖.
pub fn stokes_estimate_report(
    field: &TwoPhaseFlowField,
    data: &StokesData,
    bc: &BoundaryConfig,
    geometry: &InterfaceGeometry,
) -> Result<(f64, f64)> {
    let t = field.t;
    let k = data.cutoff().max(1);
    let mut lhs = 0.0;
    for ph in [Phase::Plus, Phase::Minus] {
        let v = ring_norm_sq(geometry, t, ph, k, 2.0, |x| field.velocity(x, ph).to_vec());
        let p = ring_norm_sq(geometry, t, ph, k, 1.0, |x| vec![field.pressure(x, ph).unwrap_or(ZERO)]);
        lhs += v.sqrt() + p.sqrt();
    }
    let nt = 4 * (k + force_cutoff(&data.force)) + 32;
    let f2: f64 = [Phase::Plus, Phase::Minus]
        .iter()
        .map(|&ph| {
            integrate_phase(geometry, t, ph, nt, |r, th| {
                let f = data.force.value([r * th.cos(), r * th.sin()]);
                C64::new(f[0].norm_sqr() + f[1].norm_sqr(), 0.0)
            })
            .re
        })
        .sum();
    let (gr, gt) = data.outer.to_polar();
    let g = match bc.v_outer {
        VelocityOuter::Dirichlet => vec_norm(&data.outer, 1.5),
        VelocityOuter::NavierSlip { .. } => h_norm(&gr, 1.5) + h_norm(&gt, 0.5),
        VelocityOuter::Robin { .. } => vec_norm(&data.outer, 0.5),
    };
    let rhs = f2.sqrt() + vec_norm(&data.jump, 1.5) + vec_norm(&data.traction, 0.5) + g;
    Ok((lhs, rhs))
}

/// Radial factor of a harmonic function in Ω⁻ for mode k.
#[derive(Clone, Copy, Debug)]
enum Harmonic {
    Grow { scale: f64 },
    Decay { scale: f64 },
    Log { scale: f64 },
}

impl Harmonic {
    /// (value, ∂_r) without e^{ikθ}.
    fn eval(&self, k: i64, r: f64) -> (f64, f64) {
        let a = k.unsigned_abs() as i32;
        match *self {
            Harmonic::Grow { scale } => ((r / scale).powi(a), a as f64 * (r / scale).powi(a) / r),
            Harmonic::Decay { scale } => ((scale / r).powi(a), -a as f64 * (scale / r).powi(a) / r),
            Harmonic::Log { scale } => ((r / scale).ln(), 1.0 / r),
        }
    }
}

/// Reduction of a velocity jump to zero: q harmonic in Ω⁻ with n·∇q = n·s on Γ_t,
/// w a Stokes velocity in Ω⁻ with w = s − ∇q on Γ_t and w = 0 on ∂Ω, and the
/// combined lift w̃ = w + ∇q with w̃ = s on Γ_t and div w̃ = 0.
#[derive(Clone, Debug)]
pub struct JumpLift {
    q: Vec<(i64, Harmonic, C64)>,
    w: ModalFlow,
    trace_error: f64,
}

impl JumpLift {
    pub fn q_value(&self, x: [f64; 2]) -> C64 {
        let (r, th) = (x[0].hypot(x[1]), x[1].atan2(x[0]));
        self.q
            .iter()
            .map(|(k, h, c)| c * h.eval(*k, r).0 * C64::from_polar(1.0, *k as f64 * th))
            .sum()
    }

    pub fn q_gradient(&self, x: [f64; 2]) -> [C64; 2] {
        let (r, th) = (x[0].hypot(x[1]), x[1].atan2(x[0]));
        let (mut gr, mut gt) = (ZERO, ZERO);
        for (k, h, c) in &self.q {
            let (v, d) = h.eval(*k, r);
            let e = c * C64::from_polar(1.0, *k as f64 * th);
            gr += e * d;
            gt += e * v * I * *k as f64 / r;
        }
        let (co, si) = (th.cos(), th.sin());
        [gr * co - gt * si, gr * si + gt * co]
    }

    pub fn w_velocity(&self, x: [f64; 2]) -> [C64; 2] {
        self.w.point(x, Phase::Minus).v
    }

    /// w̃ = w + ∇q.
    pub fn velocity(&self, x: [f64; 2]) -> [C64; 2] {
        let a = self.w_velocity(x);
        let b = self.q_gradient(x);
        [a[0] + b[0], a[1] + b[1]]
    }

    /// Largest |w̃ − s| over a check grid on Γ_t.
    pub fn trace_error(&self) -> f64 {
        self.trace_error
    }
}

/// Builds the jump lift. The outer condition of q is a uniform flux when Γ₃ᵛ = ∅
/// (so the harmonic problem is solvable) and q = 0 otherwise.
pub fn lift_jump(
    s: &VectorField,
    g: &VectorField,
    geometry: &InterfaceGeometry,
    bc: &BoundaryConfig,
    t: f64,
) -> Result<JumpLift> {
    if bc.gamma3_empty() {
        let c = check_compatibility(s, g, geometry, bc, t);
        let tol = 1e-10 * s.x.max_abs().max(s.y.max_abs()).max(g.x.max_abs()).max(g.y.max_abs()).max(1.0);
        if c.abs() > tol {
            return Err(Error::CompatibilityViolated { residual: c });
        }
    }
    let big_r = geometry.outer_radius();
    let kb = 2 * s.cutoff() + 16;
    let kbi = kb as i64;
    let m = 2 * kb + 8;
    let snap = geometry.snapshot(t, m);
    let inner = snap.rho_min();
    let neumann = bc.gamma3_empty();
    let w_gamma = snap.arc_weights();
    let flux: C64 = (0..m)
        .map(|j| {
            let th = snap.theta[j];
            let n = snap.normal[j];
            (s.x.eval(th) * n[0] + s.y.eval(th) * n[1]) * w_gamma[j]
        })
        .sum();

    // q: per mode one reduced column; k = 0 Neumann keeps q's constant at zero
    let mut qcols: Vec<(i64, Vec<(Harmonic, C64)>)> = Vec::new();
    let mut qlift: Vec<(i64, Harmonic, C64)> = Vec::new();
    for k in -kbi..=kbi {
        if k == 0 {
            if neumann {
                qlift.push((0, Harmonic::Log { scale: big_r }, -flux / (2.0 * PI)));
            } else {
                qcols.push((0, vec![(Harmonic::Log { scale: big_r }, C64::new(1.0, 0.0))]));
            }
            continue;
        }
        let (g_, d_) = (Harmonic::Grow { scale: big_r }, Harmonic::Decay { scale: inner });
        let (a, b) = if neumann {
            (g_.eval(k, big_r).1, d_.eval(k, big_r).1)
        } else {
            (g_.eval(k, big_r).0, d_.eval(k, big_r).0)
        };
        let nrm = a.hypot(b);
        qcols.push((k, vec![(g_, C64::new(b / nrm, 0.0)), (d_, C64::new(-a / nrm, 0.0))]));
    }
    let ns_th: Vec<f64> = snap.theta.clone();
    let gradq = |k: i64, parts: &[(Harmonic, C64)], r: f64, th: f64| -> [C64; 2] {
        let (mut gr, mut gt) = (ZERO, ZERO);
        let e = C64::from_polar(1.0, k as f64 * th);
        for (h, c) in parts {
            let (v, d) = h.eval(k, r);
            gr += c * e * d;
            gt += c * e * v * I * k as f64 / r;
        }
        [gr * th.cos() - gt * th.sin(), gr * th.sin() + gt * th.cos()]
    };
    let a = CMat::from_fn(m, qcols.len(), |i, j| {
        let g = gradq(qcols[j].0, &qcols[j].1, snap.rho[i], ns_th[i]);
        g[0] * snap.normal[i][0] + g[1] * snap.normal[i][1]
    });
    let b = CVec::from_fn(m, |i, _| {
        let th = ns_th[i];
        let n = snap.normal[i];
        let mut v = s.x.eval(th) * n[0] + s.y.eval(th) * n[1];
        for (k, h, c) in &qlift {
            let g = gradq(*k, &[(*h, *c)], snap.rho[i], th);
            v -= g[0] * n[0] + g[1] * n[1];
        }
        v
    });
    let xq = LeastSquares::new(a)?.solve(&b);
    let mut q = qlift.clone();
    for (j, (k, parts)) in qcols.iter().enumerate() {
        for (h, c) in parts {
            q.push((*k, *h, c * xq[j]));
        }
    }

    // w: single-phase Stokes in Ω⁻ with homogeneous Dirichlet data on ∂Ω
    let mut wcols: Vec<(i64, Vec<Radial>, CMat)> = Vec::new();
    for k in -kbi..=kbi {
        let mb = minus_basis(k, inner, big_r, false);
        let rows = CMat::from_fn(2, mb.len(), |i, j| {
            outer_row(VelocityOuter::Dirichlet, &mode_state(k, &mb[j], big_r))[i]
        });
        let ns = nullspace(&rows, 1e-12);
        wcols.push((k, mb, ns));
    }
    let cols: Vec<(usize, usize)> = wcols
        .iter()
        .enumerate()
        .flat_map(|(i, (_, _, ns))| (0..ns.ncols()).map(move |j| (i, j)))
        .collect();
    let col_state = |c: &(usize, usize), r: f64, th: f64| {
        let (k, mb, ns) = &wcols[c.0];
        let e = C64::from_polar(1.0, *k as f64 * th);
        let mut st = PolarState::default();
        for (l, b) in mb.iter().enumerate() {
            st.add_mode(*k, &b.eval(*k, r), r, e * ns[(l, c.1)]);
        }
        st.to_point(th)
    };
    let mut aw = CMat::zeros(2 * m, cols.len());
    let mut bw = CVec::zeros(2 * m);
    let lq = JumpLift {
        q: q.clone(),
        w: ModalFlow {
            plus: Vec::new(),
            minus: Vec::new(),
            force: BodyForce::zero(),
            p_shift: ZERO,
        },
        trace_error: 0.0,
    };
    for i in 0..m {
        let (r, th) = (snap.rho[i], ns_th[i]);
        for (j, c) in cols.iter().enumerate() {
            let st = col_state(c, r, th);
            aw[(2 * i, j)] = st.v[0];
            aw[(2 * i + 1, j)] = st.v[1];
        }
        let gq = lq.q_gradient(snap.x[i]);
        bw[2 * i] = s.x.eval(th) - gq[0];
        bw[2 * i + 1] = s.y.eval(th) - gq[1];
    }
    let xw = LeastSquares::new(aw)?.solve(&bw);
    let mut w = lq.w.clone();
    for (j, c) in cols.iter().enumerate() {
        let (k, mb, ns) = &wcols[c.0];
        for (l, b) in mb.iter().enumerate() {
            w.minus.push(Term {
                k: *k,
                basis: *b,
                c: xw[j] * ns[(l, c.1)],
            });
        }
    }
    let mut lift = JumpLift { q, w, trace_error: 0.0 };
    let nc = 3 * kb + 7;
    let mut worst: f64 = 0.0;
    for i in 0..nc {
        let th = (i as f64 + 0.5) * 2.0 * PI / nc as f64;
        let x = geometry.point(th, t);
        let v = lift.velocity(x);
        worst = worst.max((v[0] - s.x.eval(th)).norm()).max((v[1] - s.y.eval(th)).norm());
    }
    lift.trace_error = worst;
    Ok(lift)
}

pub use crate::radial_fem::{discrete_infsup, korn_constant};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{oracle_stokes_mode, StokesModeData};
    use approx::assert_abs_diff_eq;

    fn circles() -> InterfaceGeometry {
        InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap()
    }

    fn normal_field(k: usize) -> VectorField {
        // n = −e_r on circles about the origin
        VectorField::new(PeriodicField::trig(k, 1, -1.0, 0.0), PeriodicField::trig(k, 1, 0.0, -1.0))
    }

    #[test]
    fn laplace_young_pressures() {
        let g = circles();
        let data = StokesData::traction_driven(normal_field(4));
        for backend in [Backend::Spectral, Backend::Bie] {
            let sol = solve_two_phase_stokes(&data, &BoundaryConfig::default(), &g, 0.0, backend).unwrap();
            let tr = sol.traces();
            assert_abs_diff_eq!(tr.p_plus.mode(0).re, -0.75, epsilon = 1e-9);
            assert_abs_diff_eq!(tr.p_minus.mode(0).re, 0.25, epsilon = 1e-9);
            assert!(tr.v_plus.x.max_abs() < 1e-9);
        }
    }

    #[test]
    fn homogeneous_basis_satisfies_stokes() {
        // −Δv + ∇p = 0 and div v = 0 by finite differences of the evaluated field
        let flow = ModalFlow {
            plus: vec![],
            minus: vec![
                Term { k: 3, basis: Radial::Power { a: 5.0, scale: 2.0 }, c: C64::new(0.7, -0.2) },
                Term { k: -2, basis: Radial::Power { a: 0.0, scale: 1.0 }, c: C64::new(0.3, 0.1) },
                Term { k: 1, basis: Radial::RLog { scale: 2.0 }, c: C64::new(1.0, 0.0) },
                Term { k: 0, basis: Radial::Vortex { scale: 1.0 }, c: C64::new(0.5, 0.0) },
            ],
            force: BodyForce::zero(),
            p_shift: ZERO,
        };
        let h = 1e-3;
        let x0 = [1.1, 0.9];
        let at = |dx: f64, dy: f64| flow.point([x0[0] + dx, x0[1] + dy], Phase::Minus);
        let c = at(0.0, 0.0);
        assert!(c.divergence().norm() < 1e-12);
        let (xp, xm, yp, ym) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
        for i in 0..2 {
            let lap = (xp.v[i] + xm.v[i] + yp.v[i] + ym.v[i] - c.v[i] * 4.0) / (h * h);
            let gp = if i == 0 { (xp.p - xm.p) / (2.0 * h) } else { (yp.p - ym.p) / (2.0 * h) };
            assert!((gp - lap).norm() < 1e-5, "component {i}: {}", (gp - lap).norm());
            // gradient consistency
            let fd = (xp.v[i] - xm.v[i]) / (2.0 * h);
            assert!((fd - c.grad[i][0]).norm() < 1e-5);
        }
    }

    #[test]
    fn body_force_particular_solution() {
        let f = BodyForce {
            potential: VolumeSource::new(vec![crate::twophase_elliptic::SourceTerm { k: 1, m: 1, coeff: C64::new(1.0, 0.0) }]).unwrap(),
            stream: VolumeSource::new(vec![crate::twophase_elliptic::SourceTerm { k: 2, m: 2, coeff: C64::new(0.5, 0.0) }]).unwrap(),
        };
        let h = 1e-3;
        let x0 = [0.4, -0.3];
        let at = |dx: f64, dy: f64| {
            let x = [x0[0] + dx, x0[1] + dy];
            let th = x[1].atan2(x[0]);
            f.particular(x[0].hypot(x[1]), th).to_point(th)
        };
        let c = at(0.0, 0.0);
        let fv = f.value(x0);
        assert!(c.divergence().norm() < 1e-12);
        let (xp, xm, yp, ym) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
        for i in 0..2 {
            let lap = (xp.v[i] + xm.v[i] + yp.v[i] + ym.v[i] - c.v[i] * 4.0) / (h * h);
            let gp = if i == 0 { (xp.p - xm.p) / (2.0 * h) } else { (yp.p - ym.p) / (2.0 * h) };
            assert!((gp - lap - fv[i]).norm() < 1e-5);
        }
    }

    #[test]
    fn mode_one_normal_traction_matches_oracle() {
        let g = circles();
        let k = 4;
        // a = cosθ·n
        let a = VectorField::new(
            &PeriodicField::trig(k, 2, -0.5, 0.0) + &PeriodicField::constant(k, -0.5),
            PeriodicField::trig(k, 2, 0.0, -0.5),
        );
        let data = StokesData::traction_driven(a);
        let sol = solve_two_phase_stokes(&data, &BoundaryConfig::default(), &g, 0.0, Backend::Spectral).unwrap();
        // a·e_r = −cosθ → mode ±1 coefficient −½
        let d = StokesModeData { a_r: C64::new(-0.5, 0.0), ..Default::default() };
        let o = oracle_stokes_mode(1, 1.0, 2.0, VelocityOuter::Dirichlet, d).unwrap();
        let (ur, _) = sol.traces().v_plus.to_polar();
        assert_abs_diff_eq!((ur.mode(1) - o.ur_plus).norm(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn compatibility_examples() {
        let g = circles();
        let bc = BoundaryConfig::default();
        let z = VectorField::zeros(3);
        assert_eq!(check_compatibility(&z, &z, &g, &bc, 0.0), 0.0);
        assert_abs_diff_eq!(check_compatibility(&normal_field(3), &z, &g, &bc, 0.0), 2.0 * PI, epsilon = 1e-12);
        let tang = VectorField::new(PeriodicField::trig(3, 1, 0.0, -1.0), PeriodicField::trig(3, 1, 1.0, 0.0));
        assert_abs_diff_eq!(check_compatibility(&tang, &z, &g, &bc, 0.0), 0.0, epsilon = 1e-12);
    }
}
