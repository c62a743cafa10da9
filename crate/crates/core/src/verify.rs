//! Acceptance checks shared by the integration suite and the `verify` subcommand.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bc::{BoundaryConfig, MuOuter, VelocityOuter};
use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolutionProblem};
use crate::field::{PeriodicField, VectorField, C64};
use crate::geometry::{InterfaceGeometry, Phase};
use crate::ms_operator::{
    ms_symbol, operator_norm_estimate, Coefficients, LinearOperator, OperatorHandle, OperatorKind, ScalarCoefficient,
    VectorCoefficient,
};
use crate::oracle::{oracle_laplace_mode, oracle_stokes_mode, StokesModeData};
use crate::sobolev::{h_norm, Trajectory};
use crate::twophase_elliptic::{Backend, LaplaceData, LaplaceSolver};
use crate::twophase_stokes::{
    check_compatibility, discrete_infsup, energy_balance, korn_constant, solve_two_phase_stokes, BodyForce, StokesData,
    StokesSolver,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// Reduced sizes for smoke runs; runtime budgets are not enforced.
    Quick,
    Full,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub r0: f64,
    pub outer_radius: f64,
    pub sigma: f64,
    pub level: Level,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { r0: 1.0, outer_radius: 2.0, sigma: 1.0, level: Level::Full }
    }
}

impl VerifyConfig {
    fn full(&self) -> bool {
        self.level == Level::Full
    }

    fn geometry(&self) -> Result<InterfaceGeometry> {
        InterfaceGeometry::circle(self.r0, self.outer_radius, 0.2 * (self.outer_radius - self.r0))
    }
}

/// Outcome of one criterion. `value` is the measured quantity compared against `tolerance`.
#[derive(Clone, Debug)]
pub struct Check {
    pub id: usize,
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget: Option<f64>,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} value={:.3e} tol={:.1e} time={:.1}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.value,
            self.tolerance,
            self.seconds,
            self.detail
        )
    }
}

struct Outcome {
    value: f64,
    tolerance: f64,
    passed: bool,
    detail: String,
}

type Criterion = fn(&VerifyConfig) -> Result<Outcome>;

const CRITERIA: [(&str, Criterion, f64); 10] = [
    ("elliptic-oracle", elliptic_oracle, 10.0),
    ("stokes-oracle", stokes_oracle, 30.0),
    ("backend-agreement", backend_agreement, 60.0),
    ("ms-symbol", ms_symbol_structure, f64::INFINITY),
    ("perturbation-ordering", perturbation_ordering, f64::INFINITY),
    ("energy-identity", energy_identity, f64::INFINITY),
    ("korn", korn, f64::INFINITY),
    ("inf-sup", inf_sup, f64::INFINITY),
    ("compatibility", compatibility, f64::INFINITY),
    ("evolution", evolution, f64::INFINITY),
];

/// Total runtime budget of the full suite in seconds.
pub const SUITE_BUDGET: f64 = 300.0;

pub fn criterion_count() -> usize {
    CRITERIA.len()
}

/// Runs criterion `id` (1-based).
pub fn run_check(id: usize, cfg: &VerifyConfig) -> Check {
    let (name, f, budget) = CRITERIA[id - 1];
    let budget = (cfg.full() && budget.is_finite()).then_some(budget);
    let start = Instant::now();
    let out = f(cfg);
    let seconds = start.elapsed().as_secs_f64();
    let mut check = match out {
        Ok(o) => Check {
            id,
            name,
            value: o.value,
            tolerance: o.tolerance,
            passed: o.passed,
            detail: o.detail,
            seconds,
            budget,
        },
        Err(e) => Check {
            id,
            name,
            value: f64::NAN,
            tolerance: f64::NAN,
            passed: false,
            detail: format!("error: {e}"),
            seconds,
            budget,
        },
    };
    if let Some(b) = budget {
        if seconds > b {
            check.passed = false;
            check.detail = format!("{} (over budget {b:.0}s)", check.detail);
        }
    }
    check
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<Check> {
    (1..=CRITERIA.len()).map(|i| run_check(i, cfg)).collect()
}

fn outcome(value: f64, tolerance: f64, passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { value, tolerance, passed, detail })
}

fn below(value: f64, tolerance: f64, detail: String) -> Result<Outcome> {
    outcome(value, tolerance, value < tolerance, detail)
}

fn families() -> [BoundaryConfig; 3] {
    [
        BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::Dirichlet),
        BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::NavierSlip { alpha: 1.0 }),
        BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::Robin { alpha: 1.0 }),
    ]
}

fn random_field(rng: &mut ChaCha8Rng, k: usize, decay: f64) -> PeriodicField {
    let mut f = PeriodicField::constant(k, rng.gen_range(-1.0..1.0));
    for j in 1..=k as i64 {
        let d = (-(j as f64) * decay).exp();
        f = &f + &PeriodicField::trig(k, j, d * rng.gen_range(-1.0..1.0), d * rng.gen_range(-1.0..1.0));
    }
    f
}

fn random_vector(rng: &mut ChaCha8Rng, k: usize, decay: f64) -> VectorField {
    VectorField::new(random_field(rng, k, decay), random_field(rng, k, decay))
}

/// n = −e_r on circles.
fn circle_normal(k: usize) -> VectorField {
    VectorField::new(PeriodicField::trig(k, 1, -1.0, 0.0), PeriodicField::trig(k, 1, 0.0, -1.0))
}

fn elliptic_oracle(cfg: &VerifyConfig) -> Result<Outcome> {
    let kmax = if cfg.full() { 32 } else { 8 };
    let g = cfg.geometry()?;
    let (fp, fm) = (C64::new(1.0, 0.3), C64::new(-0.5, 0.2));
    let mut worst: f64 = 0.0;
    for outer in [MuOuter::Neumann, MuOuter::Dirichlet] {
        let solver = LaplaceSolver::new(&g, 0.0, outer, Backend::Spectral, kmax)?;
        for k in 0..=kmax as i64 {
            let data = LaplaceData::traces(
                PeriodicField::single_mode(kmax, k, fp),
                PeriodicField::single_mode(kmax, k, fm),
            );
            let got = solver.solve(&data)?.jump().mode(k);
            let want = oracle_laplace_mode(k, cfg.r0, cfg.outer_radius, outer, (fp, fm))?.jump;
            worst = worst.max((got - want).norm());
        }
    }
    below(worst, 1e-7, format!("max |jump - oracle| over k <= {kmax}, both outer BCs"))
}

fn stokes_oracle(cfg: &VerifyConfig) -> Result<Outcome> {
    let kmax = if cfg.full() { 16 } else { 4 };
    let g = cfg.geometry()?;
    let base = StokesModeData {
        s_r: C64::new(0.4, -0.1),
        s_t: C64::new(-0.2, 0.3),
        a_r: C64::new(1.0, 0.2),
        a_t: C64::new(0.3, -0.5),
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    for bc in families() {
        let solver = StokesSolver::new(&g, 0.0, &bc, Backend::Spectral, kmax + 1)?;
        for k in 0..=kmax as i64 {
            let mut d = base;
            if k == 0 && bc.gamma3_empty() {
                d.s_r = C64::new(0.0, 0.0);
            }
            let mode = |c: C64| PeriodicField::single_mode(kmax, k, c);
            let data = StokesData {
                force: BodyForce::zero(),
                jump: VectorField::from_polar(&mode(d.s_r), &mode(d.s_t)),
                traction: VectorField::from_polar(&mode(d.a_r), &mode(d.a_t)),
                outer: VectorField::zeros(kmax + 1),
            };
            let tr = solver.solve(&data)?.traces().clone();
            let (urp, utp) = tr.v_plus.to_polar();
            let (urm, utm) = tr.v_minus.to_polar();
            let got = [urp.mode(k), utp.mode(k), tr.p_plus.mode(k), urm.mode(k), utm.mode(k), tr.p_minus.mode(k)];
            let want = oracle_stokes_mode(k, cfg.r0, cfg.outer_radius, bc.v_outer, d)?.to_array();
            for (a, b) in got.iter().zip(want.iter()) {
                worst = worst.max((a - b).norm());
            }
        }
    }
    below(worst, 1e-6, format!("max trace discrepancy over k <= {kmax}, B1/B2/B3"))
}

fn backend_agreement(cfg: &VerifyConfig) -> Result<Outcome> {
    let (k, nodes) = if cfg.full() { (8, 256) } else { (4, 64) };
    let g = cfg.geometry()?;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut laplace: f64 = 0.0;
    for outer in [MuOuter::Neumann, MuOuter::Dirichlet] {
        let data = LaplaceData::traces(random_field(&mut rng, k, 0.6), random_field(&mut rng, k, 0.6));
        let a = LaplaceSolver::new(&g, 0.0, outer, Backend::Spectral, k)?.solve(&data)?;
        let b = LaplaceSolver::with_resolution(&g, 0.0, outer, Backend::Bie, k, nodes)?.solve(&data)?;
        for ph in [Phase::Plus, Phase::Minus] {
            laplace = laplace.max((a.normal_derivative(ph) - b.normal_derivative(ph)).max_abs());
        }
    }
    let mut stokes: f64 = 0.0;
    for bc in families() {
        let jump = random_vector(&mut rng, k, 0.6);
        let mut outer = random_vector(&mut rng, k, 0.6);
        if bc.gamma3_empty() {
            let c = check_compatibility(&jump, &outer, &g, &bc, 0.0) / (2.0 * PI * g.outer_radius());
            outer = outer.add(&VectorField::new(PeriodicField::trig(k, 1, c, 0.0), PeriodicField::trig(k, 1, 0.0, c)));
        }
        let data = StokesData { force: BodyForce::zero(), jump, traction: random_vector(&mut rng, k, 0.6), outer };
        let a = StokesSolver::new(&g, 0.0, &bc, Backend::Spectral, k)?.solve(&data)?;
        let b = StokesSolver::with_resolution(&g, 0.0, &bc, Backend::Bie, k, nodes)?.solve(&data)?;
        stokes = stokes.max(a.traces().max_diff(b.traces()));
    }
    below(
        laplace.max(stokes),
        1e-6,
        format!("{nodes} nodes: Laplace {laplace:.2e}, Stokes {stokes:.2e}"),
    )
}

fn ms_symbol_structure(cfg: &VerifyConfig) -> Result<Outcome> {
    let (r0, big_r, s) = (cfg.r0, cfg.outer_radius, cfg.sigma);
    let kmax = 64i64;
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for outer in [MuOuter::Neumann, MuOuter::Dirichlet] {
        ok &= ms_symbol(0, r0, big_r, s, outer) == 0.0;
        ok &= (1..=kmax).all(|k| ms_symbol(k, r0, big_r, s, outer) > 0.0);
        let top = ms_symbol(kmax, r0, big_r, s, outer) / (kmax as f64).powi(3);
        for k in 32..=kmax {
            let r = ms_symbol(k, r0, big_r, s, outer) / (k as f64).powi(3);
            worst = worst.max(((r - top) / top).abs());
        }
    }
    // the closed form against the discrete operator
    let kc = if cfg.full() { 64 } else { 16 };
    let g = cfg.geometry()?;
    let c = Coefficients::mullins_sekerka(s);
    let a0 = OperatorHandle::new(OperatorKind::A0, &g, 0.0, &c, &BoundaryConfig::default(), Backend::Spectral, kc)?;
    let mut probe: f64 = 0.0;
    for k in 0..=kc as i64 {
        let got = a0.apply(&PeriodicField::single_mode(kc, k, C64::new(1.0, 0.0)))?.mode(k);
        let want = ms_symbol(k, r0, big_r, s, MuOuter::Neumann);
        probe = probe.max((got.re - want).abs().max(got.im.abs()) / want.max(1.0));
    }
    ok &= probe < 1e-9;
    outcome(
        worst,
        0.01,
        ok && worst < 0.01,
        format!("symbol(0)=0, positive to 64, A0 probe rel. error {probe:.1e}"),
    )
}

fn norm_coefficients(k: usize) -> Coefficients {
    let n = circle_normal(k);
    Coefficients {
        b2: ScalarCoefficient::constant(&PeriodicField::constant(k, 1.0) + &PeriodicField::trig(k, 1, 0.3, 0.0)),
        a3: VectorCoefficient::constant(n.clone()),
        a4: VectorCoefficient::constant(n.scale(C64::new(0.5, 0.0))),
        a5: ScalarCoefficient::constant(PeriodicField::constant(k, 0.25)),
        ..Coefficients::mullins_sekerka(1.0)
    }
}

fn perturbation_ordering(cfg: &VerifyConfig) -> Result<Outcome> {
    let (k1, k2) = if cfg.full() { (64, 128) } else { (16, 32) };
    let g = cfg.geometry()?;
    let bc = BoundaryConfig::new(MuOuter::Dirichlet, VelocityOuter::Dirichlet);
    let norm = |kind: OperatorKind, k: usize, s_in: f64| -> Result<f64> {
        let mut c = norm_coefficients(k);
        c.sigma = cfg.sigma;
        let op = OperatorHandle::new(kind, &g, 0.0, &c, &bc, Backend::Spectral, k)?;
        operator_norm_estimate(&op, s_in, 0.5)
    };
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (kind, s, label) in [
        (OperatorKind::B0, 2.5, "B0"),
        (OperatorKind::B1, 1.5, "B1"),
        (OperatorKind::StokesVelocity, 2.0, "B"),
    ] {
        let (a, b) = (norm(kind, k1, s)?, norm(kind, k2, s)?);
        let change = ((b - a) / a).abs();
        worst = worst.max(if change.is_finite() { change } else { f64::INFINITY });
        detail.push(format!("{label} {a:.4}->{b:.4}"));
    }
    let (a, b) = (norm(OperatorKind::A0, k1, 2.5)?, norm(OperatorKind::A0, k2, 2.5)?);
    let growth = b / a;
    detail.push(format!("A0 x{growth:.3}"));
    outcome(
        worst,
        0.1,
        worst < 0.1 && growth >= 1.8,
        format!("K {k1}->{k2}: {}", detail.join(", ")),
    )
}

fn energy_identity(cfg: &VerifyConfig) -> Result<Outcome> {
    let (draws, k) = if cfg.full() { (10, 6) } else { (3, 4) };
    let g = cfg.geometry()?;
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut worst: f64 = 0.0;
    for bc in families() {
        for _ in 0..draws {
            let d = StokesData::traction_driven(random_vector(&mut rng, k, 0.3));
            let sol = solve_two_phase_stokes(&d, &bc, &g, 0.0, Backend::Spectral)?;
            worst = worst.max(energy_balance(&sol, &d, &bc, &g)?.residual());
        }
    }
    below(worst, 1e-6, format!("{draws} traction-driven solves per BC family"))
}

fn korn(cfg: &VerifyConfig) -> Result<Outcome> {
    let res: &[usize] = if cfg.full() { &[16, 32, 64] } else { &[8, 16] };
    let g = cfg.geometry()?;
    let mut worst: f64 = 0.0;
    let mut finite = true;
    for bc in families() {
        let c: Vec<f64> = res.iter().map(|&r| korn_constant(&bc, &g, r)).collect::<Result<_>>()?;
        finite &= c.iter().all(|x| x.is_finite() && *x > 0.0);
        for w in c.windows(2) {
            worst = worst.max(((w[1] - w[0]) / w[0]).abs());
        }
    }
    let slip0 = BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::NavierSlip { alpha: 0.0 });
    let singular = matches!(korn_constant(&slip0, &g, res[0]), Err(Error::SingularForm { .. }));
    outcome(
        worst,
        0.1,
        finite && singular && worst < 0.1,
        format!("resolutions {res:?}; B2 alpha=0 singular: {singular}"),
    )
}

fn inf_sup(cfg: &VerifyConfig) -> Result<Outcome> {
    let res: &[usize] = if cfg.full() { &[16, 32, 64] } else { &[8, 16, 32] };
    let g = cfg.geometry()?;
    let mut worst: f64 = 0.0;
    let mut lowest = f64::INFINITY;
    for bc in families() {
        let b: Vec<f64> = res.iter().map(|&r| discrete_infsup(&bc, &g, r)).collect::<Result<_>>()?;
        lowest = lowest.min(b.iter().copied().fold(f64::INFINITY, f64::min));
        for w in b.windows(2) {
            worst = worst.max(1.0 - w[1] / w[0]);
        }
    }
    outcome(
        worst,
        0.15,
        lowest > 0.0 && worst < 0.15,
        format!("resolutions {res:?}; smallest beta {lowest:.4}"),
    )
}

fn compatibility(cfg: &VerifyConfig) -> Result<Outcome> {
    let k = 4;
    let g = cfg.geometry()?;
    let d = StokesData { jump: circle_normal(k), ..StokesData::zeros(k) };
    let residual = check_compatibility(&d.jump, &d.outer, &g, &BoundaryConfig::default(), 0.0);
    let mut rejected = true;
    for v in [VelocityOuter::Dirichlet, VelocityOuter::NavierSlip { alpha: 1.0 }] {
        let bc = BoundaryConfig::new(MuOuter::Neumann, v);
        rejected &= matches!(
            solve_two_phase_stokes(&d, &bc, &g, 0.0, Backend::Spectral),
            Err(Error::CompatibilityViolated { .. })
        );
    }
    let robin = BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::Robin { alpha: 1.0 });
    let accepted = solve_two_phase_stokes(&d, &robin, &g, 0.0, Backend::Spectral).is_ok();
    outcome(
        residual.abs(),
        0.0,
        rejected && accepted,
        format!("s = n: rejected without outflow boundary: {rejected}; accepted with Robin: {accepted}"),
    )
}

fn smooth_random(rng: &mut ChaCha8Rng, k: usize, modes: i64) -> PeriodicField {
    let mut f = PeriodicField::zeros(k);
    for m in 1..=modes.min(k as i64) {
        let d = (-(m as f64) / 2.0).exp();
        f = &f + &PeriodicField::trig(k, m, d * rng.gen_range(-1.0..1.0), d * rng.gen_range(-1.0..1.0));
    }
    f
}

/// Variable coefficients for the coupled problem, including a Stokes traction term.
fn coupled_coefficients(k: usize, seed: u64, sigma: f64) -> Coefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = VectorField::new(smooth_random(&mut rng, k, 3).scale_real(0.2), smooth_random(&mut rng, k, 3).scale_real(0.2));
    let b1 = smooth_random(&mut rng, k, 2).scale_real(0.3);
    let b2 = &PeriodicField::constant(k, 0.5) + &smooth_random(&mut rng, k, 2).scale_real(0.2);
    Coefficients {
        b: VectorCoefficient::constant(b),
        b1: ScalarCoefficient::from_fn(move |t| b1.scale_real(1.0 + 0.5 * t.sin())),
        b2: ScalarCoefficient::constant(b2),
        a3: VectorCoefficient::constant(circle_normal(k).scale(C64::new(0.3, 0.0))),
        jump_weight: 0.5,
        ..Coefficients::mullins_sekerka(sigma)
    }
}

/// Largest H^{1/2} error over the step grid for h* = e^{−t}(cos θ + ½ sin 2θ).
fn manufactured_errors(cfg: &VerifyConfig, steps: &[usize]) -> Result<Vec<f64>> {
    let (k, t_end) = (8, 0.4);
    let g = cfg.geometry()?;
    let c = coupled_coefficients(k, 11, cfg.sigma);
    let bc = BoundaryConfig::default();
    let shape = &PeriodicField::trig(k, 1, 1.0, 0.0) + &PeriodicField::trig(k, 2, 0.0, 0.5);
    let exact = |t: f64| shape.scale_real((-t).exp());
    let a0 = OperatorHandle::new(OperatorKind::A0, &g, 0.0, &c, &bc, Backend::Spectral, k)?;
    let bf = OperatorHandle::new(OperatorKind::Bfull, &g, 0.0, &c, &bc, Backend::Spectral, k)?;
    let mut samples = Vec::new();
    let fine = 4 * steps.iter().copied().max().unwrap_or(1);
    for i in 0..=fine {
        let t = t_end * i as f64 / fine as f64;
        let h = exact(t);
        let a = &a0.apply(&h)? * c.jump_weight;
        let b = bf.with_time(t)?.apply(&h)?;
        samples.push(&(&(-&h) + &a) + &b);
    }
    let times = (0..=fine).map(|i| t_end * i as f64 / fine as f64).collect();
    let forcing = Trajectory::new(times, samples)?;
    let mut base = EvolutionProblem::new(g, exact(0.0), t_end, t_end)?;
    base.coefficients = c;
    base.g = forcing;
    steps
        .iter()
        .map(|&n| {
            let p = EvolutionProblem { dt: t_end / n as f64, ..base.clone() };
            let (traj, _) = evolve(&p)?;
            Ok(traj
                .times()
                .iter()
                .zip(traj.fields())
                .map(|(&t, h)| h_norm(&(h - &exact(t)), 0.5))
                .fold(0.0, f64::max))
        })
        .collect()
}

fn evolution(cfg: &VerifyConfig) -> Result<Outcome> {
    let g = cfg.geometry()?;
    // manufactured solution
    let errs = manufactured_errors(cfg, &[20, 40, 80])?;
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    // halving Δt halves the error to within 20%
    let halving = errs.windows(2).map(|w| ((w[1] / w[0] - 0.5) / 0.5).abs()).fold(0.0, f64::max);

    // a-priori bound across draws and cutoffs
    let (draws, ks): (u64, &[usize]) = if cfg.full() { (4, &[32, 64]) } else { (2, &[8, 16]) };
    let mut ratios = Vec::new();
    let mut k_spread: f64 = 0.0;
    for seed in 0..draws {
        let mut per_k = Vec::new();
        for &k in ks {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let h0 = smooth_random(&mut rng, k, 12);
            let q = smooth_random(&mut rng, k, 12);
            let forcing = Trajectory::from_fn(0.2, 20, |t| q.scale_real((3.0 * t).cos()))?;
            let mut p = EvolutionProblem::new(g.clone(), h0.clone(), 0.2, 0.01)?;
            p.coefficients = coupled_coefficients(k, seed, cfg.sigma);
            p.g = forcing.clone();
            let (_, d) = evolve(&p)?;
            per_k.push(d.xt_norm / (forcing.lp_hs(2.0, 0.5) + h_norm(&h0, 2.0)));
        }
        k_spread = k_spread.max(((per_k[1] - per_k[0]) / per_k[0]).abs());
        ratios.extend(per_k);
    }
    let c_max = ratios.iter().copied().fold(0.0, f64::max);
    let c_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let bound_ok = c_max.is_finite() && k_spread < 0.1 && c_max / c_min < 5.0;

    // pure Mullins–Sekerka decay of mode 1
    let h0 = PeriodicField::trig(8, 1, 1.0, 0.0);
    let mut p = EvolutionProblem::new(g, h0.clone(), 0.5, 1e-3)?;
    p.coefficients = Coefficients::mullins_sekerka(cfg.sigma);
    let (traj, _) = evolve(&p)?;
    let end = traj.last().ok_or_else(|| Error::InvalidConfig("empty trajectory".into()))?;
    let rate = -(end.mode(1).norm() / h0.mode(1).norm()).ln() / 0.5;
    let lam = ms_symbol(1, cfg.r0, cfg.outer_radius, cfg.sigma, MuOuter::Neumann);
    let decay_err = ((rate - lam) / lam).abs();

    outcome(
        halving,
        0.2,
        halving < 0.2 && bound_ok && decay_err < 0.01,
        format!(
            "orders {:.3}/{:.3}; C in [{c_min:.3}, {c_max:.3}], K spread {k_spread:.3}; decay rel. error {decay_err:.1e}",
            orders[0], orders[1]
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_symbol_and_compatibility_pass() {
        let cfg = VerifyConfig { level: Level::Quick, ..Default::default() };
        for id in [4, 9] {
            let c = run_check(id, &cfg);
            assert!(c.passed, "{}", c.line());
        }
    }

    #[test]
    fn errors_become_failures() {
        let cfg = VerifyConfig { r0: 2.5, level: Level::Quick, ..Default::default() };
        let c = run_check(9, &cfg);
        assert!(!c.passed && c.detail.starts_with("error"));
    }
}
