//! Time stepping of ∂_th + 𝒜(t)h = g with 𝒜 = wA₀ + ℬ.
//!
//! A₀ is treated implicitly and ℬ = c∂_θ − b₁ + w(B₀ + B₁) + B(t) explicitly:
//! (I + Δt·wA₀(t_{n+1}))h_{n+1} = h_n + Δt(g(t_{n+1}) − ℬ(t_n)h_n).
//! The weight w is 1 for the pure Mullins–Sekerka problem and ½ when coupled
//! to Stokes.

use nalgebra::DVector;

use crate::bc::{BoundaryConfig, MuOuter, VelocityOuter};
use crate::error::{Error, Result};
use crate::field::{PeriodicField, VectorField, C64};
use crate::geometry::{surface_laplacian, InterfaceGeometry, Phase};
use crate::linalg::CMat;
use crate::ms_operator::{traction_of, Coefficients, LinearOperator, OperatorHandle, OperatorKind};
use crate::sobolev::{h_norm, norm_table, xt_norm, Trajectory};
use crate::twophase_elliptic::{
    estimate_ratio, mu_estimate_report, Backend, LaplaceData, LaplaceSolver, TwoPhaseScalarField, VolumeSource,
};
use crate::twophase_stokes::{check_compatibility, BodyForce, StokesData, StokesSolver, TwoPhaseFlowField};

/// Explicit-part amplification beyond which a step is refused.
pub const MAX_EXPLICIT_GROWTH: f64 = 10.0;
/// Tolerance of the post-hoc interface and boundary checks.
pub const POST_HOC_TOL: f64 = 1e-6;

/// Inhomogeneous data of the coupled problem, fixed in time.
#[derive(Clone, Debug)]
pub struct GeneralData {
    /// a₁: source in Δμ^± = a₁.
    pub mu_source: VolumeSource,
    /// a₃: added to both traces μ^±.
    pub mu_trace: PeriodicField,
    /// a₄: outer datum for μ⁻.
    pub mu_outer: PeriodicField,
    /// Volume force of the Stokes system.
    pub force: BodyForce,
    /// Velocity jump [v].
    pub velocity_jump: VectorField,
    /// Traction jump independent of h.
    pub traction: VectorField,
    /// Outer datum of B_j(v⁻, p⁻).
    pub velocity_outer: VectorField,
}

impl GeneralData {
    pub fn zeros(cutoff: usize) -> Self {
        Self {
            mu_source: VolumeSource::zero(),
            mu_trace: PeriodicField::zeros(cutoff),
            mu_outer: PeriodicField::zeros(cutoff),
            force: BodyForce::zero(),
            velocity_jump: VectorField::zeros(cutoff),
            traction: VectorField::zeros(cutoff),
            velocity_outer: VectorField::zeros(cutoff),
        }
    }

    pub fn mu_is_zero(&self) -> bool {
        self.mu_source.is_zero() && self.mu_trace.is_zero() && self.mu_outer.is_zero()
    }

    pub fn stokes_is_zero(&self) -> bool {
        self.force.is_zero() && self.velocity_jump.is_zero() && self.traction.is_zero() && self.velocity_outer.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.mu_is_zero() && self.stokes_is_zero()
    }

    fn laplace_data(&self, f_plus: PeriodicField, f_minus: PeriodicField) -> LaplaceData {
        let k = f_plus.cutoff();
        LaplaceData {
            f_plus: &f_plus + &self.mu_trace.resize(k),
            f_minus: &f_minus + &self.mu_trace.resize(k),
            source: self.mu_source.clone(),
            outer: self.mu_outer.resize(k),
        }
    }

    fn stokes_data(&self, traction: VectorField) -> StokesData {
        let k = traction.cutoff();
        StokesData {
            force: self.force.clone(),
            jump: self.velocity_jump.resize(k),
            traction: traction.add(&self.traction.resize(k)),
            outer: self.velocity_outer.resize(k),
        }
    }
}

/// A linear evolution problem on [0, T] with uniform steps.
#[derive(Clone, Debug)]
pub struct EvolutionProblem {
    pub geometry: InterfaceGeometry,
    pub bc: BoundaryConfig,
    pub coefficients: Coefficients,
    pub data: GeneralData,
    pub g: Trajectory,
    pub h0: PeriodicField,
    pub t_end: f64,
    pub dt: f64,
    pub backend: Backend,
}

impl EvolutionProblem {
    /// Pure Mullins–Sekerka with σ = 1, g = 0, homogeneous data.
    pub fn new(geometry: InterfaceGeometry, h0: PeriodicField, t_end: f64, dt: f64) -> Result<Self> {
        let k = h0.cutoff();
        let g = Trajectory::new(vec![0.0, t_end.max(f64::MIN_POSITIVE)], vec![PeriodicField::zeros(k); 2])?;
        Ok(Self {
            geometry,
            bc: BoundaryConfig::default(),
            coefficients: Coefficients::mullins_sekerka(1.0),
            data: GeneralData::zeros(k),
            g,
            h0,
            t_end,
            dt,
            backend: Backend::Spectral,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.h0.cutoff()
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.t_end > 0.0) || !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("T and dt must be positive".into()));
        }
        let n = (self.t_end / self.dt).round();
        if n < 1.0 || (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::InvalidConfig(format!(
                "dt = {} does not divide T = {}",
                self.dt, self.t_end
            )));
        }
        Ok(n as usize)
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        let n = self.steps()?;
        Ok((0..=n).map(|i| i as f64 * self.dt).collect())
    }

    fn forcing(&self, t: f64) -> PeriodicField {
        self.g.at(t).resize(self.cutoff())
    }

    pub fn validate(&self) -> Result<()> {
        self.coefficients.validate()?;
        self.bc.validate()?;
        let times = self.times()?;
        if !self.h0.check_real(1e-12) {
            return Err(Error::InvalidConfig("initial value must be real".into()));
        }
        if self.bc.gamma3_empty() && !(self.data.velocity_jump.is_zero() && self.data.velocity_outer.is_zero()) {
            for &t in &times {
                let r = check_compatibility(&self.data.velocity_jump, &self.data.velocity_outer, &self.geometry, &self.bc, t);
                let scale = self.data.velocity_jump.x.max_abs().max(self.data.velocity_jump.y.max_abs()).max(1.0);
                if r.abs() > 1e-10 * scale {
                    return Err(Error::CompatibilityViolated { residual: r });
                }
            }
        }
        Ok(())
    }
}

/// The problem with μ̂, v̂ carrying the inhomogeneous data removed:
/// ĝ = g − w[∂_nμ̂] − ½(v̂⁺+v̂⁻)·n on the step grid.
pub fn reduce_data(problem: &EvolutionProblem) -> Result<EvolutionProblem> {
    problem.validate()?;
    if problem.data.is_zero() {
        return Ok(problem.clone());
    }
    let k = problem.cutoff();
    let p = problem;
    let static_geo = p.geometry.is_static();
    let mut cached: Option<PeriodicField> = None;
    let times = p.times()?;
    let mut fields = Vec::with_capacity(times.len());
    for &t in &times {
        let corr = match (&cached, static_geo) {
            (Some(c), true) => c.clone(),
            _ => {
                let c = data_correction(p, t)?;
                cached = Some(c.clone());
                c
            }
        };
        fields.push(&p.forcing(t) - &corr);
    }
    let mut out = p.clone();
    out.g = Trajectory::new(times, fields)?;
    out.data = GeneralData::zeros(k);
    Ok(out)
}

fn data_correction(p: &EvolutionProblem, t: f64) -> Result<PeriodicField> {
    let k = p.cutoff();
    let zero = PeriodicField::zeros(k);
    let mut corr = zero.clone();
    if !p.data.mu_is_zero() {
        let solver = LaplaceSolver::new(&p.geometry, t, p.bc.mu_outer, p.backend, k)?;
        let mu = solver.solve(&p.data.laplace_data(zero.clone(), zero.clone()))?;
        corr = &corr + &(&mu.jump() * p.coefficients.jump_weight);
    }
    if !p.data.stokes_is_zero() {
        let solver = StokesSolver::new(&p.geometry, t, &p.bc, p.backend, k)?;
        let v = solver.solve(&p.data.stokes_data(VectorField::zeros(k)))?;
        corr = &corr + &v.mean_normal_velocity(&p.geometry).resize(k);
    }
    Ok(corr)
}

/// B(t)h = ½X₀*((v_h⁺+v_h⁻)·n) for the traction jump a₃h + a₄Δ_Γh + a₅∇_Γh.
pub fn stokes_velocity_term(
    h: &PeriodicField,
    geometry: &InterfaceGeometry,
    t: f64,
    coefficients: &Coefficients,
    bc: &BoundaryConfig,
    backend: Backend,
) -> Result<PeriodicField> {
    if !coefficients.has_stokes() {
        return Ok(PeriodicField::zeros(h.cutoff()));
    }
    OperatorHandle::new(OperatorKind::StokesVelocity, geometry, t, coefficients, bc, backend, h.cutoff())?.apply(h)
}

/// Factorized I + Δt·wA₀ at one time.
struct Implicit {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    m: CMat,
}

struct Stepper<'a> {
    p: &'a EvolutionProblem,
    implicit: Option<Implicit>,
    explicit: Option<OperatorHandle>,
}

/// One step's bookkeeping.
#[derive(Clone, Copy, Debug)]
pub struct StepInfo {
    /// Relative residual of the implicit solve.
    pub residual: f64,
    /// ‖h_n − Δtℬh_n‖/‖h_n‖ in H^{1/2}.
    pub growth: f64,
}

impl<'a> Stepper<'a> {
    fn new(p: &'a EvolutionProblem) -> Self {
        Self {
            p,
            implicit: None,
            explicit: None,
        }
    }

    fn implicit_at(&mut self, t: f64) -> Result<&Implicit> {
        if self.implicit.is_none() || !self.p.geometry.is_static() {
            let p = self.p;
            let k = p.cutoff();
            let a0 = OperatorHandle::new(OperatorKind::A0, &p.geometry, t, &p.coefficients, &p.bc, p.backend, k)?;
            let scale = C64::new(p.dt * p.coefficients.jump_weight, 0.0);
            let m = CMat::identity(2 * k + 1, 2 * k + 1) + a0.matrix()? * scale;
            let lu = m.clone().lu();
            if !m.iter().all(|z| z.is_finite()) {
                return Err(Error::ImplicitSolveFailed("non-finite implicit matrix".into()));
            }
            self.implicit = Some(Implicit { lu, m });
        }
        Ok(self.implicit.as_ref().unwrap())
    }

    fn explicit_at(&mut self, t: f64) -> Result<&OperatorHandle> {
        let p = self.p;
        let next = match &self.explicit {
            Some(op) => op.with_time(t)?,
            None => OperatorHandle::new(OperatorKind::Bfull, &p.geometry, t, &p.coefficients, &p.bc, p.backend, p.cutoff())?,
        };
        self.explicit = Some(next);
        Ok(self.explicit.as_ref().unwrap())
    }

    fn advance(&mut self, h: &PeriodicField, t: f64) -> Result<(PeriodicField, StepInfo)> {
        let dt = self.p.dt;
        let bh = self.explicit_at(t)?.apply(h)?;
        let explicit = h - &bh.scale_real(dt);
        let nh = h_norm(h, 0.5);
        let growth = if nh > 0.0 { h_norm(&explicit, 0.5) / nh } else { 1.0 };
        if growth > MAX_EXPLICIT_GROWTH {
            return Err(Error::StepsizeTooLarge { factor: growth });
        }
        let rhs = &explicit + &self.p.forcing(t + dt).scale_real(dt);
        let imp = self.implicit_at(t + dt)?;
        let b = DVector::from_column_slice(rhs.modes());
        let x = imp
            .lu
            .solve(&b)
            .ok_or_else(|| Error::ImplicitSolveFailed("singular implicit matrix".into()))?;
        let residual = (&imp.m * &x - &b).norm() / b.norm().max(f64::MIN_POSITIVE);
        if !residual.is_finite() {
            return Err(Error::ImplicitSolveFailed("non-finite solution".into()));
        }
        let mut out = PeriodicField::from_modes(x.iter().copied().collect());
        if h.is_real() && rhs.is_real() {
            out.symmetrize();
        }
        Ok((out, StepInfo { residual, growth }))
    }
}

/// One IMEX step of the homogenized problem from t_n with step Δt.
pub fn step(h_n: &PeriodicField, t_n: f64, dt: f64, problem: &EvolutionProblem) -> Result<PeriodicField> {
    let p = EvolutionProblem { dt, ..problem.clone() };
    Stepper::new(&p).advance(h_n, t_n).map(|(h, _)| h)
}

#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub xt_norm: f64,
    /// Rows (t, H^{1/2}, H², H^{7/2}).
    pub norms: Vec<[f64; 4]>,
    /// Ratio of the μ estimate's left side to xt_norm(h).
    pub mu_estimate_ratio: f64,
    pub step_residuals: Vec<f64>,
    pub max_step_residual: f64,
    pub max_growth: f64,
}

/// Runs the stepper over [0, T] after removing the inhomogeneous data.
pub fn evolve(problem: &EvolutionProblem) -> Result<(Trajectory, Diagnostics)> {
    let reduced = reduce_data(problem)?;
    let times = reduced.times()?;
    let mut stepper = Stepper::new(&reduced);
    let mut h = reduced.h0.clone();
    let mut fields = vec![h.clone()];
    let mut residuals = Vec::with_capacity(times.len() - 1);
    let mut max_growth: f64 = 0.0;
    for w in times.windows(2) {
        let (next, info) = stepper.advance(&h, w[0])?;
        residuals.push(info.residual);
        max_growth = max_growth.max(info.growth);
        fields.push(next.clone());
        h = next;
        log::debug!("t = {:.6}, |h|_1/2 = {:.6e}", w[1], h_norm(&h, 0.5));
    }
    let traj = Trajectory::new(times, fields)?;
    let mu_estimate_ratio = mu_ratio(&reduced, &traj)?;
    let diagnostics = Diagnostics {
        xt_norm: xt_norm(&traj)?,
        norms: norm_table(&traj),
        mu_estimate_ratio,
        max_step_residual: residuals.iter().copied().fold(0.0, f64::max),
        step_residuals: residuals,
        max_growth,
    };
    Ok((traj, diagnostics))
}

/// μ estimate ratio on at most 65 time nodes of the trajectory.
fn mu_ratio(p: &EvolutionProblem, traj: &Trajectory) -> Result<f64> {
    let n = traj.len();
    let stride = n.div_ceil(64).max(1);
    let idx: Vec<usize> = (0..n).step_by(stride).chain(if !(n - 1).is_multiple_of(stride) { Some(n - 1) } else { None }).collect();
    let sub = Trajectory::new(
        idx.iter().map(|&i| traj.times()[i]).collect(),
        idx.iter().map(|&i| traj.fields()[i].clone()).collect(),
    )?;
    let k = p.cutoff();
    let mut solver: Option<LaplaceSolver> = None;
    let mut mus = Vec::with_capacity(sub.len());
    for (&t, h) in sub.times().iter().zip(sub.fields()) {
        if solver.is_none() || !p.geometry.is_static() {
            solver = Some(LaplaceSolver::new(&p.geometry, t, p.bc.mu_outer, p.backend, k)?);
        }
        let (fp, fm) = mu_traces(h, p, t);
        mus.push(solver.as_ref().unwrap().solve(&p.data.laplace_data(fp, fm))?);
    }
    Ok(estimate_ratio(mu_estimate_report(&mus, &sub, &p.geometry)?))
}

/// σΔ_Γh ± b₂h.
fn mu_traces(h: &PeriodicField, p: &EvolutionProblem, t: f64) -> (PeriodicField, PeriodicField) {
    let k = h.cutoff();
    let base = surface_laplacian(h, &p.geometry, t).scale_real(p.coefficients.sigma);
    match p.coefficients.b2.at(t) {
        None => (base.clone(), base),
        Some(b2) => {
            let e = b2.multiply(h).resize(k);
            (&base + &e, &base - &e)
        }
    }
}

/// Largest interface and boundary condition violations of a reconstructed state.
#[derive(Clone, Copy, Debug, Default)]
pub struct ResidualReport {
    pub mu_trace: f64,
    pub mu_outer: f64,
    pub velocity_jump: f64,
    pub traction_jump: f64,
    pub velocity_outer: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        [self.mu_trace, self.mu_outer, self.velocity_jump, self.traction_jump, self.velocity_outer]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct CoupledState {
    pub t: f64,
    pub h: PeriodicField,
    pub mu: TwoPhaseScalarField,
    pub flow: Option<TwoPhaseFlowField>,
    pub residuals: ResidualReport,
}

#[derive(Clone, Debug)]
pub struct CoupledSolution {
    pub trajectory: Trajectory,
    pub diagnostics: Diagnostics,
    pub states: Vec<CoupledState>,
}

impl CoupledSolution {
    pub fn max_residual(&self) -> f64 {
        self.states.iter().map(|s| s.residuals.max()).fold(0.0, f64::max)
    }
}

/// Evolves h, then reconstructs μ^± and (v^±, p^±) at the output times with the
/// original data and re-checks every interface and boundary condition.
pub fn solve_coupled(problem: &EvolutionProblem, output_times: &[f64]) -> Result<CoupledSolution> {
    let (trajectory, diagnostics) = evolve(problem)?;
    let p = problem;
    let k = p.cutoff();
    let want_flow = p.coefficients.has_stokes() || !p.data.stokes_is_zero();
    let mut states = Vec::with_capacity(output_times.len());
    for &t in output_times {
        if !(0.0..=p.t_end).contains(&t) {
            return Err(Error::InvalidConfig(format!("output time {t} outside [0, {}]", p.t_end)));
        }
        let h = trajectory.at(t);
        let (fp, fm) = mu_traces(&h, p, t);
        let ldata = p.data.laplace_data(fp, fm);
        let mu = LaplaceSolver::new(&p.geometry, t, p.bc.mu_outer, p.backend, k)?.solve(&ldata)?;
        let flow = if want_flow || p.bc.check_coercive().is_ok() {
            let sdata = p.data.stokes_data(traction_of(&h, &p.coefficients, &p.geometry, t));
            let f = StokesSolver::new(&p.geometry, t, &p.bc, p.backend, k)?.solve(&sdata)?;
            Some((f, sdata))
        } else {
            None
        };
        let mut residuals = mu_residuals(&mu, &ldata, p, t);
        if let Some((f, sdata)) = &flow {
            stokes_residuals(f, sdata, p, t, &mut residuals)?;
        }
        states.push(CoupledState {
            t,
            h,
            mu,
            flow: flow.map(|(f, _)| f),
            residuals,
        });
    }
    Ok(CoupledSolution {
        trajectory,
        diagnostics,
        states,
    })
}

fn check_nodes(k: usize) -> Vec<f64> {
    crate::field::nodes(2 * k + 9)
}

fn scale_of(fields: &[&PeriodicField]) -> f64 {
    fields.iter().map(|f| f.max_abs()).fold(1.0, f64::max)
}

fn mu_residuals(mu: &TwoPhaseScalarField, data: &LaplaceData, p: &EvolutionProblem, t: f64) -> ResidualReport {
    let big_r = p.geometry.outer_radius();
    let scale = scale_of(&[&data.f_plus, &data.f_minus, &data.outer]);
    let mut trace: f64 = 0.0;
    let mut outer: f64 = 0.0;
    for th in check_nodes(data.f_plus.cutoff()) {
        let x = p.geometry.point(th, t);
        trace = trace
            .max((mu.value(x, Phase::Plus) - data.f_plus.eval(th)).norm())
            .max((mu.value(x, Phase::Minus) - data.f_minus.eval(th)).norm());
        let y = [big_r * th.cos(), big_r * th.sin()];
        let got = match p.bc.mu_outer {
            MuOuter::Dirichlet => mu.value(y, Phase::Minus),
            MuOuter::Neumann => {
                let gr = mu.gradient(y, Phase::Minus);
                gr[0] * th.cos() + gr[1] * th.sin()
            }
        };
        outer = outer.max((got - data.outer.eval(th)).norm());
    }
    ResidualReport {
        mu_trace: trace / scale,
        mu_outer: outer / scale,
        ..Default::default()
    }
}

fn stokes_residuals(
    f: &TwoPhaseFlowField,
    data: &StokesData,
    p: &EvolutionProblem,
    t: f64,
    out: &mut ResidualReport,
) -> Result<()> {
    let big_r = p.geometry.outer_radius();
    let k = data.traction.cutoff();
    let scale = scale_of(&[
        &data.jump.x,
        &data.jump.y,
        &data.traction.x,
        &data.traction.y,
        &data.outer.x,
        &data.outer.y,
    ]);
    let tr = f.traces();
    let mut jump: f64 = 0.0;
    let mut traction: f64 = 0.0;
    let mut outer: f64 = 0.0;
    let gradients = f.state([0.0, 0.0], Phase::Plus).is_ok();
    for th in check_nodes(k) {
        for c in 0..2 {
            let (vp, vm, s) = if c == 0 {
                (&tr.v_plus.x, &tr.v_minus.x, &data.jump.x)
            } else {
                (&tr.v_plus.y, &tr.v_minus.y, &data.jump.y)
            };
            jump = jump.max((vp.eval(th) - vm.eval(th) - s.eval(th)).norm());
        }
        if !gradients {
            continue;
        }
        let x = p.geometry.point(th, t);
        let n = p.geometry.normal(th, t);
        let tp = f.state(x, Phase::Plus)?.traction(n);
        let tm = f.state(x, Phase::Minus)?.traction(n);
        let a = [data.traction.x.eval(th), data.traction.y.eval(th)];
        for c in 0..2 {
            traction = traction.max((tp[c] - tm[c] - a[c]).norm());
        }
        let e = [th.cos(), th.sin()];
        let y = [big_r * e[0], big_r * e[1]];
        let st = f.state(y, Phase::Minus)?;
        let v = st.v;
        let g = [data.outer.x.eval(th), data.outer.y.eval(th)];
        let tau = [-e[1], e[0]];
        let dot = |a: [C64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        let r = match p.bc.v_outer {
            VelocityOuter::Dirichlet => [v[0] - g[0], v[1] - g[1]],
            VelocityOuter::NavierSlip { alpha } => {
                // the pressure drops out of the tangential traction
                let sn = st.traction(e);
                [dot(v, e) - dot(g, e), dot(sn, tau) + dot(v, tau) * alpha - dot(g, tau)]
            }
            VelocityOuter::Robin { alpha } => {
                let sn = st.traction(e);
                [sn[0] + v[0] * alpha - g[0], sn[1] + v[1] * alpha - g[1]]
            }
        };
        outer = outer.max(r[0].norm()).max(r[1].norm());
    }
    out.velocity_jump = jump / scale;
    out.traction_jump = traction / scale;
    out.velocity_outer = outer / scale;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ms_operator::ms_symbol;

    fn annulus() -> InterfaceGeometry {
        InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap()
    }

    #[test]
    fn single_mode_implicit_euler() {
        let k = 4;
        let h = PeriodicField::trig(k, 2, 1.0, 0.0);
        let p = EvolutionProblem::new(annulus(), h.clone(), 0.1, 0.01).unwrap();
        let next = step(&h, 0.0, 0.01, &p).unwrap();
        let lam = ms_symbol(2, 1.0, 2.0, 1.0, MuOuter::Neumann);
        assert!((&next - &h.scale_real(1.0 / (1.0 + 0.01 * lam))).max_abs() < 1e-12);
    }

    #[test]
    fn zero_stays_zero_and_mass_is_kept() {
        let k = 6;
        let p = EvolutionProblem::new(annulus(), PeriodicField::zeros(k), 0.05, 0.01).unwrap();
        let (traj, d) = evolve(&p).unwrap();
        assert!(traj.fields().iter().all(|f| f.max_abs() == 0.0));
        assert_eq!(d.xt_norm, 0.0);
        let h0 = &PeriodicField::constant(k, 0.3) + &PeriodicField::trig(k, 3, 0.2, 0.1);
        let p = EvolutionProblem::new(annulus(), h0, 0.05, 0.01).unwrap();
        let (traj, _) = evolve(&p).unwrap();
        for f in traj.fields() {
            assert!((f.mode(0).re - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn stepsize_refusal() {
        let k = 4;
        let h = PeriodicField::trig(k, 1, 1.0, 0.0);
        let mut p = EvolutionProblem::new(annulus(), h.clone(), 1.0, 1.0).unwrap();
        p.coefficients.b1 = crate::ms_operator::ScalarCoefficient::constant(PeriodicField::constant(k, -20.0));
        assert!(matches!(step(&h, 0.0, 1.0, &p), Err(Error::StepsizeTooLarge { .. })));
    }

    #[test]
    fn reduce_with_zero_data_is_identity() {
        let p = EvolutionProblem::new(annulus(), PeriodicField::trig(4, 1, 1.0, 0.0), 0.1, 0.05).unwrap();
        let r = reduce_data(&p).unwrap();
        assert!((&r.g.at(0.05) - &p.g.at(0.05)).max_abs() == 0.0);
    }
}
