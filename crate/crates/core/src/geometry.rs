//! Star-shaped interfaces Γ_t = {ρ(θ,t)(cosθ, sinθ)} inside the disk of radius R,
//! tubular coordinates and surface differential operators.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{nodes, PeriodicField, VectorField, C64};
use crate::sobolev::Trajectory;

/// Time-dependent radius: returns (ρ(·,t), ∂_tρ(·,t)).
pub type RadiusFamily = Arc<dyn Fn(f64) -> (PeriodicField, PeriodicField) + Send + Sync>;

#[derive(Clone)]
enum Radius {
    Sampled(Vec<PeriodicField>),
    Family(RadiusFamily),
}

/// Which side of Γ_t a point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Enclosed region Ω⁺.
    Plus,
    /// Annular region Ω⁻ between Γ_t and ∂Ω.
    Minus,
}

#[derive(Clone)]
pub struct InterfaceGeometry {
    radius: Radius,
    time_grid: Vec<f64>,
    outer_radius: f64,
    delta: f64,
    cutoff: usize,
    snapshots: Vec<Arc<CurveSnapshot>>,
}

impl std::fmt::Debug for InterfaceGeometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InterfaceGeometry")
            .field("outer_radius", &self.outer_radius)
            .field("delta", &self.delta)
            .field("cutoff", &self.cutoff)
            .field("time_grid", &self.time_grid)
            .finish()
    }
}

/// Point in tubular coordinates: X(r,s,t) = X₀(s,t) + r·n(s,t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubularPoint {
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

/// Default quadrature grid used for the precomputed snapshots.
const DEFAULT_GRID: usize = 256;

/// Build a geometry from radius samples at the given times (one field per time).
pub fn build_interface(
    radius_modes: Vec<PeriodicField>,
    outer_radius: f64,
    delta: f64,
    time_grid: Vec<f64>,
) -> Result<InterfaceGeometry> {
    if radius_modes.is_empty() || radius_modes.len() != time_grid.len() {
        return Err(Error::InvalidConfig(format!(
            "{} radius samples for {} time nodes",
            radius_modes.len(),
            time_grid.len()
        )));
    }
    let radius_modes: Vec<PeriodicField> = radius_modes.into_iter().map(|f| f.real_part()).collect();
    let cutoff = radius_modes.iter().map(|f| f.cutoff()).max().unwrap_or(0);
    let radius_modes = radius_modes.into_iter().map(|f| f.resize(cutoff)).collect();
    InterfaceGeometry::assemble(Radius::Sampled(radius_modes), cutoff, outer_radius, delta, time_grid)
}

impl InterfaceGeometry {
    /// Static circle of radius `r0`.
    pub fn circle(r0: f64, outer_radius: f64, delta: f64) -> Result<Self> {
        build_interface(vec![PeriodicField::constant(0, r0)], outer_radius, delta, vec![0.0])
    }

    /// Static curve.
    pub fn fixed(radius: PeriodicField, outer_radius: f64, delta: f64) -> Result<Self> {
        build_interface(vec![radius], outer_radius, delta, vec![0.0])
    }

    /// Geometry given by an analytic family t ↦ (ρ, ∂_tρ); invariants are checked on `time_grid`.
    pub fn from_family(
        family: RadiusFamily,
        outer_radius: f64,
        delta: f64,
        time_grid: Vec<f64>,
    ) -> Result<Self> {
        let cutoff = family(time_grid.first().copied().unwrap_or(0.0)).0.cutoff();
        Self::assemble(Radius::Family(family), cutoff, outer_radius, delta, time_grid)
    }

    fn assemble(
        radius: Radius,
        cutoff: usize,
        outer_radius: f64,
        delta: f64,
        time_grid: Vec<f64>,
    ) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidConfig("delta must be positive".into()));
        }
        if time_grid.is_empty() || time_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("time grid must be nonempty and increasing".into()));
        }
        let mut g = Self {
            radius,
            time_grid,
            outer_radius,
            delta,
            cutoff,
            snapshots: Vec::new(),
        };
        let grid = DEFAULT_GRID.max(8 * cutoff + 8);
        let mut snaps = Vec::with_capacity(g.time_grid.len());
        for &t in &g.time_grid {
            let s = CurveSnapshot::new(&g, t, grid);
            let min = s.rho.iter().copied().fold(f64::INFINITY, f64::min);
            let max = s.rho.iter().copied().fold(0.0, f64::max);
            if !(min > 0.0) {
                return Err(Error::NonPositiveRadius { min, t });
            }
            let gap = outer_radius - max;
            if !(gap > 3.0 * delta) {
                return Err(Error::SeparationViolation {
                    outer: outer_radius,
                    gap,
                    limit: 3.0 * delta,
                });
            }
            snaps.push(Arc::new(s));
        }
        g.snapshots = snaps;
        Ok(g)
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.time_grid
    }

    /// Highest radius mode.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn is_static(&self) -> bool {
        matches!(&self.radius, Radius::Sampled(s) if s.len() == 1)
    }

    /// Precomputed snapshot on the default grid at the i-th stored time.
    pub fn stored_snapshot(&self, i: usize) -> &CurveSnapshot {
        &self.snapshots[i]
    }

    /// (ρ(·,t), ∂_tρ(·,t)). Stored samples are interpolated by cubic Hermite
    /// polynomials with three-point slopes.
    pub fn radius_at(&self, t: f64) -> (PeriodicField, PeriodicField) {
        match &self.radius {
            Radius::Family(f) => f(t),
            Radius::Sampled(s) => {
                let n = s.len();
                if n == 1 {
                    return (s[0].clone(), PeriodicField::zeros(self.cutoff));
                }
                let tg = &self.time_grid;
                let t = t.clamp(tg[0], tg[n - 1]);
                let i = (tg.partition_point(|&x| x <= t).max(1) - 1).min(n - 2);
                let slope = |j: usize| -> PeriodicField {
                    let (a, b) = if j == 0 {
                        (0, 1)
                    } else if j == n - 1 {
                        (n - 2, n - 1)
                    } else {
                        (j - 1, j + 1)
                    };
                    (&s[b] - &s[a]).scale_real(1.0 / (tg[b] - tg[a]))
                };
                let h = tg[i + 1] - tg[i];
                let u = (t - tg[i]) / h;
                let (m0, m1) = (slope(i), slope(i + 1));
                let h00 = 2.0 * u.powi(3) - 3.0 * u * u + 1.0;
                let h10 = u.powi(3) - 2.0 * u * u + u;
                let h01 = -2.0 * u.powi(3) + 3.0 * u * u;
                let h11 = u.powi(3) - u * u;
                let rho = &(&s[i].scale_real(h00) + &m0.scale_real(h10 * h)) + &(&s[i + 1].scale_real(h01) + &m1.scale_real(h11 * h));
                let d00 = (6.0 * u * u - 6.0 * u) / h;
                let d10 = 3.0 * u * u - 4.0 * u + 1.0;
                let d01 = (-6.0 * u * u + 6.0 * u) / h;
                let d11 = 3.0 * u * u - 2.0 * u;
                let rate = &(&s[i].scale_real(d00) + &m0.scale_real(d10)) + &(&s[i + 1].scale_real(d01) + &m1.scale_real(d11));
                (rho, rate)
            }
        }
    }

    /// Radius if Γ_t is a circle about the origin (all nonconstant modes below 1e−14).
    pub fn circle_radius(&self, t: f64) -> Option<f64> {
        let (rho, _) = self.radius_at(t);
        let r0 = rho.mode(0).re;
        let k = rho.cutoff() as i64;
        let round = (-k..=k).filter(|&m| m != 0).all(|m| rho.mode(m).norm() <= 1e-14 * r0.abs());
        round.then_some(r0)
    }

    /// Snapshot of the curve at time t on `n` equispaced nodes.
    pub fn snapshot(&self, t: f64, n: usize) -> CurveSnapshot {
        if let Some(i) = self.time_grid.iter().position(|&s| s == t) {
            if self.snapshots.get(i).is_some_and(|s| s.n == n) {
                return (*self.snapshots[i]).clone();
            }
        }
        CurveSnapshot::new(self, t, n)
    }

    /// ρ and its first two θ-derivatives at one angle.
    pub fn radius_derivs(&self, theta: f64, t: f64) -> [f64; 3] {
        let (rho, _) = self.radius_at(t);
        radius_derivs_of(&rho, theta)
    }

    /// X₀(θ,t).
    pub fn point(&self, theta: f64, t: f64) -> [f64; 2] {
        let r = self.radius_derivs(theta, t)[0];
        [r * theta.cos(), r * theta.sin()]
    }

    /// Unit normal n(θ,t) pointing from Ω⁻ into Ω⁺.
    pub fn normal(&self, theta: f64, t: f64) -> [f64; 2] {
        let f = Frame::at(&self.radius_derivs(theta, t), theta);
        f.normal
    }

    /// Signed curvature (positive for convex curves).
    pub fn curvature(&self, theta: f64, t: f64) -> f64 {
        Frame::at(&self.radius_derivs(theta, t), theta).kappa
    }

    /// Phase containing x: Ω⁺ iff |x| < ρ(arg x).
    pub fn phase_of(&self, x: [f64; 2], t: f64) -> Phase {
        let r = x[0].hypot(x[1]);
        let phi = x[1].atan2(x[0]);
        if r < self.radius_derivs(phi, t)[0] {
            Phase::Plus
        } else {
            Phase::Minus
        }
    }

    /// Signed distance to Γ_t: positive in Ω⁺, negative in Ω⁻.
    pub fn signed_distance(&self, x: [f64; 2], t: f64) -> f64 {
        let (rho, _) = self.radius_at(t);
        let m = 2048;
        let samples = rho.real_samples(m);
        let th = nodes(m);
        let mut best = (f64::INFINITY, 0.0);
        for (j, &r) in samples.iter().enumerate() {
            let d = (r * th[j].cos() - x[0]).powi(2) + (r * th[j].sin() - x[1]).powi(2);
            if d < best.0 {
                best = (d, th[j]);
            }
        }
        let theta = newton_projection(&rho, x, best.1);
        let d = radius_derivs_of(&rho, theta);
        let dist = (d[0] * theta.cos() - x[0]).hypot(d[0] * theta.sin() - x[1]);
        match self.phase_of(x, t) {
            Phase::Plus => dist,
            Phase::Minus => -dist,
        }
    }

    /// (r, s) with x = X₀(s,t) + r·n(s,t), for |r| < 3δ.
    pub fn tubular_coordinates(&self, x: [f64; 2], t: f64) -> Result<TubularPoint> {
        let (rho, _) = self.radius_at(t);
        let theta = newton_projection(&rho, x, x[1].atan2(x[0]));
        let d = radius_derivs_of(&rho, theta);
        let f = Frame::at(&d, theta);
        let r = (x[0] - f.point[0]) * f.normal[0] + (x[1] - f.point[1]) * f.normal[1];
        let limit = 3.0 * self.delta;
        if !(r.abs() < limit) {
            return Err(Error::OutsideTubularNeighborhood {
                distance: r.abs(),
                limit,
            });
        }
        Ok(TubularPoint {
            r,
            s: theta.rem_euclid(2.0 * PI),
            t,
        })
    }

    /// X(r,s,t).
    pub fn from_tubular(&self, p: TubularPoint) -> [f64; 2] {
        let f = Frame::at(&self.radius_derivs(p.s, p.t), p.s);
        [f.point[0] + p.r * f.normal[0], f.point[1] + p.r * f.normal[1]]
    }

    pub fn max_radius(&self, t: f64) -> f64 {
        let (rho, _) = self.radius_at(t);
        rho.real_samples(DEFAULT_GRID.max(8 * rho.cutoff() + 8)).into_iter().fold(0.0, f64::max)
    }

    pub fn min_radius(&self, t: f64) -> f64 {
        let (rho, _) = self.radius_at(t);
        rho.real_samples(DEFAULT_GRID.max(8 * rho.cutoff() + 8))
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Grid size used for metric products with fields of cutoff `k`.
    pub fn metric_grid(&self, k: usize) -> usize {
        (4 * (k + self.cutoff) + 32).max(64)
    }
}

fn radius_derivs_of(rho: &PeriodicField, theta: f64) -> [f64; 3] {
    let k = rho.cutoff() as i64;
    let mut out = [0.0; 3];
    for m in -k..=k {
        let c = rho.mode(m);
        if c.norm() == 0.0 {
            continue;
        }
        let e = c * C64::from_polar(1.0, m as f64 * theta);
        let im = C64::new(0.0, m as f64);
        out[0] += e.re;
        out[1] += (e * im).re;
        out[2] += (e * im * im).re;
    }
    out
}

/// Newton iteration for the foot point: (X₀(θ) − x)·X₀'(θ) = 0.
fn newton_projection(rho: &PeriodicField, x: [f64; 2], theta0: f64) -> f64 {
    let k = rho.cutoff() as i64;
    let mut theta = theta0;
    for _ in 0..50 {
        let mut d = [0.0; 4];
        for m in -k..=k {
            let c = rho.mode(m);
            if c.norm() == 0.0 {
                continue;
            }
            let e = c * C64::from_polar(1.0, m as f64 * theta);
            let im = C64::new(0.0, m as f64);
            d[0] += e.re;
            d[1] += (e * im).re;
            d[2] += (e * im * im).re;
            d[3] += (e * im * im * im).re;
        }
        let (c, s) = (theta.cos(), theta.sin());
        let p = [d[0] * c, d[0] * s];
        let p1 = [d[1] * c - d[0] * s, d[1] * s + d[0] * c];
        let p2 = [
            d[2] * c - 2.0 * d[1] * s - d[0] * c,
            d[2] * s + 2.0 * d[1] * c - d[0] * s,
        ];
        let diff = [p[0] - x[0], p[1] - x[1]];
        let f = diff[0] * p1[0] + diff[1] * p1[1];
        let fp = p1[0] * p1[0] + p1[1] * p1[1] + diff[0] * p2[0] + diff[1] * p2[1];
        if fp.abs() < 1e-300 {
            break;
        }
        let step = f / fp;
        theta -= step;
        if step.abs() < 1e-12 {
            break;
        }
    }
    theta
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    point: [f64; 2],
    tangent: [f64; 2],
    second: [f64; 2],
    normal: [f64; 2],
    speed: f64,
    kappa: f64,
}

impl Frame {
    fn at(d: &[f64; 3], theta: f64) -> Self {
        let (c, s) = (theta.cos(), theta.sin());
        let point = [d[0] * c, d[0] * s];
        let tangent = [d[1] * c - d[0] * s, d[1] * s + d[0] * c];
        let second = [
            d[2] * c - 2.0 * d[1] * s - d[0] * c,
            d[2] * s + 2.0 * d[1] * c - d[0] * s,
        ];
        let speed = tangent[0].hypot(tangent[1]);
        // counterclockwise curve: the left normal points inward
        let normal = [-tangent[1] / speed, tangent[0] / speed];
        let kappa = (tangent[0] * second[1] - tangent[1] * second[0]) / speed.powi(3);
        Self {
            point,
            tangent,
            second,
            normal,
            speed,
            kappa,
        }
    }
}

/// Curve data on `n` equispaced parameter nodes at a fixed time.
#[derive(Clone, Debug)]
pub struct CurveSnapshot {
    pub t: f64,
    pub n: usize,
    pub outer_radius: f64,
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
    pub drho: Vec<f64>,
    pub rho_t: Vec<f64>,
    pub x: Vec<[f64; 2]>,
    pub dx: Vec<[f64; 2]>,
    pub ddx: Vec<[f64; 2]>,
    pub normal: Vec<[f64; 2]>,
    pub speed: Vec<f64>,
    pub kappa: Vec<f64>,
    /// Circle radius when Γ_t is a circle about the origin.
    pub circle: Option<f64>,
}

impl CurveSnapshot {
    pub fn new(g: &InterfaceGeometry, t: f64, n: usize) -> Self {
        let (rho_f, rate_f) = g.radius_at(t);
        let rho = rho_f.real_samples(n);
        let drho = rho_f.derivative(1).real_samples(n);
        let ddrho = rho_f.derivative(2).real_samples(n);
        let rho_t = rate_f.real_samples(n);
        let theta = nodes(n);
        let mut x = Vec::with_capacity(n);
        let mut dx = Vec::with_capacity(n);
        let mut ddx = Vec::with_capacity(n);
        let mut normal = Vec::with_capacity(n);
        let mut speed = Vec::with_capacity(n);
        let mut kappa = Vec::with_capacity(n);
        for j in 0..n {
            let f = Frame::at(&[rho[j], drho[j], ddrho[j]], theta[j]);
            x.push(f.point);
            dx.push(f.tangent);
            ddx.push(f.second);
            normal.push(f.normal);
            speed.push(f.speed);
            kappa.push(f.kappa);
        }
        Self {
            t,
            n,
            outer_radius: g.outer_radius,
            theta,
            rho,
            drho,
            rho_t,
            x,
            dx,
            ddx,
            normal,
            speed,
            kappa,
            circle: g.circle_radius(t),
        }
    }

    pub fn rho_min(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn rho_max(&self) -> f64 {
        self.rho.iter().copied().fold(0.0, f64::max)
    }

    /// Arclength quadrature weights |X₀'|·2π/n.
    pub fn arc_weights(&self) -> Vec<f64> {
        let h = 2.0 * PI / self.n as f64;
        self.speed.iter().map(|s| s * h).collect()
    }

    /// ∂_tS(X₀(θ,t)) = −(X₀'·∂_tX₀)/|X₀'|² on the nodes.
    pub fn dt_s(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| -self.drho[j] * self.rho_t[j] / self.speed[j].powi(2))
            .collect()
    }

    /// Normal as a vector field with cutoff `k`.
    pub fn normal_field(&self, k: usize) -> VectorField {
        let nx: Vec<f64> = self.normal.iter().map(|v| v[0]).collect();
        let ny: Vec<f64> = self.normal.iter().map(|v| v[1]).collect();
        VectorField::new(
            PeriodicField::from_real_samples(&nx, k),
            PeriodicField::from_real_samples(&ny, k),
        )
    }
}

/// ∇_Γh = X₀'/|X₀'|² ∂_θh.
pub fn surface_gradient(h: &PeriodicField, g: &InterfaceGeometry, t: f64) -> VectorField {
    let k = h.cutoff();
    let snap = g.snapshot(t, g.metric_grid(k));
    surface_gradient_on(h, &snap)
}

pub fn surface_gradient_on(h: &PeriodicField, snap: &CurveSnapshot) -> VectorField {
    let k = h.cutoff();
    let dh = h.derivative(1).samples(snap.n);
    let (mut gx, mut gy) = (Vec::with_capacity(snap.n), Vec::with_capacity(snap.n));
    for j in 0..snap.n {
        let w = 1.0 / snap.speed[j].powi(2);
        gx.push(dh[j] * snap.dx[j][0] * w);
        gy.push(dh[j] * snap.dx[j][1] * w);
    }
    let mut v = VectorField::from_samples(&gx, &gy, k);
    if h.is_real() {
        v.x.symmetrize();
        v.y.symmetrize();
    }
    v
}

/// Δ_Γh = |X₀'|⁻¹ ∂_θ(|X₀'|⁻¹ ∂_θh).
pub fn surface_laplacian(h: &PeriodicField, g: &InterfaceGeometry, t: f64) -> PeriodicField {
    let k = h.cutoff();
    let snap = g.snapshot(t, g.metric_grid(k));
    surface_laplacian_on(h, &snap)
}

pub fn surface_laplacian_on(h: &PeriodicField, snap: &CurveSnapshot) -> PeriodicField {
    let k = h.cutoff();
    let n = snap.n;
    if let Some(r0) = snap.circle {
        let km = k as i64;
        let modes = (-km..=km).map(|m| h.mode(m) * (-(m * m) as f64 / (r0 * r0))).collect();
        let mut f = PeriodicField::from_modes(modes);
        if h.is_real() {
            f.symmetrize();
        }
        return f;
    }
    let full = (n - 1) / 2;
    let dh = h.derivative(1).samples(n);
    let inner: Vec<C64> = dh.iter().zip(&snap.speed).map(|(d, s)| d / s).collect();
    let d2 = PeriodicField::from_samples(&inner, full).derivative(1).samples(n);
    let out: Vec<C64> = d2.iter().zip(&snap.speed).map(|(d, s)| d / s).collect();
    let mut f = PeriodicField::from_samples(&out, k);
    if h.is_real() {
        f.symmetrize();
    }
    f
}

/// D_{t,Γ}h = ∂_th + ∂_tS ∂_θh along a trajectory.
pub fn material_derivative(h: &Trajectory, g: &InterfaceGeometry) -> Result<Trajectory> {
    if h.len() < 2 {
        return Err(Error::InsufficientTimeSamples {
            needed: 2,
            got: h.len(),
        });
    }
    let dt = h.time_derivative()?;
    let k = h.cutoff();
    let mut out = Vec::with_capacity(h.len());
    for (i, &t) in h.times().iter().enumerate() {
        let snap = g.snapshot(t, g.metric_grid(k));
        let ds: Vec<C64> = snap.dt_s().into_iter().map(|v| C64::new(v, 0.0)).collect();
        let adv = h.fields()[i].derivative(1).multiply_samples(&ds);
        out.push(&dt.fields()[i] + &adv);
    }
    Trajectory::new(h.times().to_vec(), out)
}

/// Smooth cut-off: 1 on |s| ≤ δ, 0 for |s| ≥ 2δ, with 0 ≥ sξ'(s) ≥ −3.
pub fn cutoff(s: f64, delta: f64) -> f64 {
    smooth_step((2.0 * delta - s.abs()) / delta)
}

/// Derivative of [`cutoff`] in s.
pub fn cutoff_derivative(s: f64, delta: f64) -> f64 {
    let u = (2.0 * delta - s.abs()) / delta;
    -s.signum() * smooth_step_derivative(u) / delta
}

fn bump(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = bump(u);
        a / (a + bump(1.0 - u))
    }
}

fn smooth_step_derivative(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let (a, b) = (bump(u), bump(1.0 - u));
    let (da, db) = (a / (u * u), -b / ((1.0 - u) * (1.0 - u)));
    (da * (a + b) - a * (da + db)) / (a + b).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn peanut() -> InterfaceGeometry {
        InterfaceGeometry::fixed(PeriodicField::from_fn(4, |t| 1.0 + 0.1 * (2.0 * t).cos()), 3.0, 0.1).unwrap()
    }

    #[test]
    fn unit_circle_normal_points_inward() {
        let g = InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap();
        let n = g.normal(0.0, 0.0);
        assert_abs_diff_eq!(n[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn separation_is_enforced() {
        assert!(matches!(
            InterfaceGeometry::circle(1.0, 1.5, 0.2),
            Err(Error::SeparationViolation { .. })
        ));
        assert!(matches!(
            InterfaceGeometry::circle(-1.0, 1.5, 0.2),
            Err(Error::NonPositiveRadius { .. })
        ));
    }

    #[test]
    fn circle_signed_distance() {
        let g = InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap();
        assert_abs_diff_eq!(g.signed_distance([0.0, 0.0], 0.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.signed_distance([1.5, 0.0], 0.0), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn circle_tubular_coordinates() {
        let g = InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap();
        let p = g.tubular_coordinates([0.9, 0.0], 0.0).unwrap();
        assert_abs_diff_eq!(p.r, 0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(p.s, 0.0, epsilon = 1e-14);
        assert!(matches!(
            g.tubular_coordinates([0.0, 0.0], 0.0),
            Err(Error::OutsideTubularNeighborhood { .. })
        ));
    }

    #[test]
    fn curvature_matches_finite_differences() {
        let g = peanut();
        let h = 1e-5;
        let p = |t: f64| g.point(t, 0.0);
        let (a, b, c) = (p(-h), p(0.0), p(h));
        let d1 = [(c[0] - a[0]) / (2.0 * h), (c[1] - a[1]) / (2.0 * h)];
        let d2 = [(c[0] - 2.0 * b[0] + a[0]) / (h * h), (c[1] - 2.0 * b[1] + a[1]) / (h * h)];
        let k_fd = (d1[0] * d2[1] - d1[1] * d2[0]) / d1[0].hypot(d1[1]).powi(3);
        assert_abs_diff_eq!(g.curvature(0.0, 0.0), k_fd, epsilon = 1e-5);
        // closed form for ρ = 1 + 0.1cos2θ at θ = 0: (ρ² + 2ρ'² − ρρ'')/(ρ²+ρ'²)^{3/2} with ρ=1.1, ρ''=−0.4
        assert_abs_diff_eq!(g.curvature(0.0, 0.0), (1.21 + 0.44) / 1.1f64.powi(3), epsilon = 1e-13);
    }

    #[test]
    fn cutoff_clauses() {
        assert_eq!(cutoff(0.5, 1.0), 1.0);
        assert_eq!(cutoff(3.0, 1.0), 0.0);
        for i in 0..=10_000 {
            let s = 1.0 + i as f64 / 10_000.0;
            let v = s * cutoff_derivative(s, 1.0);
            assert!((-4.0..=0.0).contains(&v), "s = {s}: {v}");
        }
    }

    #[test]
    fn circle_laplace_beltrami() {
        let g = InterfaceGeometry::circle(2.0, 4.0, 0.2).unwrap();
        let h = PeriodicField::trig(6, 3, 1.0, 0.0);
        let l = surface_laplacian(&h, &g, 0.0);
        assert_abs_diff_eq!(l.mode(3).re, -9.0 / 4.0 * 0.5, epsilon = 1e-14);
    }
}
