use mssolve_core::evolution::{evolve, reduce_data, solve_coupled, EvolutionProblem, POST_HOC_TOL};
use mssolve_core::field::{PeriodicField, VectorField, C64};
use mssolve_core::ms_operator::{
    ms_symbol, Coefficients, LinearOperator, OperatorHandle, OperatorKind, ScalarCoefficient, VectorCoefficient,
};
use mssolve_core::sobolev::{h_norm, Trajectory};
use mssolve_core::twophase_elliptic::Backend;
use mssolve_core::{BoundaryConfig, Error, InterfaceGeometry, MuOuter, VelocityOuter};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn annulus() -> InterfaceGeometry {
    InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap()
}

fn smooth_random(rng: &mut ChaCha8Rng, k: usize, modes: i64) -> PeriodicField {
    let mut f = PeriodicField::zeros(k);
    for m in 1..=modes.min(k as i64) {
        let d = (-(m as f64) / 2.0).exp();
        f = &f + &PeriodicField::trig(k, m, d * rng.gen_range(-1.0..1.0), d * rng.gen_range(-1.0..1.0));
    }
    f
}

fn outward(k: usize) -> VectorField {
    // n on circles is −e_r
    VectorField::new(PeriodicField::trig(k, 1, -1.0, 0.0), PeriodicField::trig(k, 1, 0.0, -1.0))
}

#[test]
fn pure_ms_mode_one_decay_matches_symbol() {
    let k = 8;
    let h0 = PeriodicField::trig(k, 1, 1.0, 0.0);
    let p = EvolutionProblem::new(annulus(), h0.clone(), 0.5, 1e-3).unwrap();
    let (traj, _) = evolve(&p).unwrap();
    let end = traj.last().unwrap();
    let rate = -(end.mode(1).norm() / h0.mode(1).norm()).ln() / 0.5;
    let lam = ms_symbol(1, 1.0, 2.0, 1.0, MuOuter::Neumann);
    assert!((rate - lam).abs() < 0.01 * lam, "{rate} vs {lam}");
}

#[test]
fn modes_decay_and_stiff_steps_are_stable() {
    let k = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h0 = &smooth_random(&mut rng, k, 64) + &PeriodicField::constant(k, 0.2);
    let p = EvolutionProblem::new(annulus(), h0.clone(), 1.0, 0.1).unwrap();
    let (traj, _) = evolve(&p).unwrap();
    for w in traj.fields().windows(2) {
        for m in -(k as i64)..=k as i64 {
            // roundoff floor of the dense implicit solve
            let (a, b) = (w[0].mode(m).norm(), w[1].mode(m).norm());
            assert!(b <= a * (1.0 + 1e-12) + 1e-14, "mode {m}: {a:e} -> {b:e}");
        }
        assert!((w[1].mode(0).re - 0.2).abs() < 1e-12);
    }
    // smooth data gives super-algebraic decay of h(T)
    let end = traj.last().unwrap();
    let top = end.mode(1).norm().max(1e-300);
    for m in 2..=k as i64 {
        assert!(end.mode(m).norm() * (m as f64).powi(8) <= 10.0 * top, "mode {m}");
    }
}

fn coupled_coefficients(k: usize, seed: u64) -> Coefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = VectorField::new(smooth_random(&mut rng, k, 3).scale_real(0.2), smooth_random(&mut rng, k, 3).scale_real(0.2));
    let b1 = smooth_random(&mut rng, k, 2).scale_real(0.3);
    let b2 = &PeriodicField::constant(k, 0.5) + &smooth_random(&mut rng, k, 2).scale_real(0.2);
    let a3 = outward(k).scale(C64::new(0.3, 0.0));
    Coefficients {
        b: VectorCoefficient::constant(b),
        b1: ScalarCoefficient::from_fn(move |t| b1.scale_real(1.0 + 0.5 * t.sin())),
        b2: ScalarCoefficient::constant(b2),
        a3: VectorCoefficient::constant(a3),
        jump_weight: 0.5,
        ..Coefficients::mullins_sekerka(1.0)
    }
}

/// g = ∂_t h* + 𝒜(t)h* for h* = e^{−t}(cos θ + 0.5 sin 2θ).
fn manufactured(k: usize, t_end: f64, n: usize) -> (EvolutionProblem, impl Fn(f64) -> PeriodicField) {
    let g = annulus();
    let c = coupled_coefficients(k, 11);
    let bc = BoundaryConfig::default();
    let shape = &PeriodicField::trig(k, 1, 1.0, 0.0) + &PeriodicField::trig(k, 2, 0.0, 0.5);
    let exact = move |t: f64| shape.scale_real((-t).exp());
    let a0 = OperatorHandle::new(OperatorKind::A0, &g, 0.0, &c, &bc, Backend::Spectral, k).unwrap();
    let bf = OperatorHandle::new(OperatorKind::Bfull, &g, 0.0, &c, &bc, Backend::Spectral, k).unwrap();
    let forcing = Trajectory::from_fn(t_end, n, |t| {
        let h = exact(t);
        let a = &a0.apply(&h).unwrap() * c.jump_weight;
        let b = bf.with_time(t).unwrap().apply(&h).unwrap();
        &(&(-&h) + &a) + &b
    })
    .unwrap();
    let mut p = EvolutionProblem::new(g, exact(0.0), t_end, t_end / n as f64).unwrap();
    p.coefficients = c;
    p.g = forcing;
    (p, exact)
}

#[test]
fn manufactured_solution_first_order() {
    let (k, t_end) = (8, 0.4);
    let (base, exact) = manufactured(k, t_end, 160);
    let errs: Vec<f64> = [20usize, 40, 80]
        .iter()
        .map(|&n| {
            let p = EvolutionProblem { dt: t_end / n as f64, ..base.clone() };
            let (traj, _) = evolve(&p).unwrap();
            traj.times()
                .iter()
                .zip(traj.fields())
                .map(|(&t, h)| h_norm(&(h - &exact(t)), 0.5))
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 0.8 && order < 1.3, "{errs:?}");
    }
}

#[test]
fn solution_map_is_linear() {
    let k = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let run = |h0: &PeriodicField, g: &Trajectory| {
        let mut p = EvolutionProblem::new(annulus(), h0.clone(), 0.2, 0.02).unwrap();
        p.coefficients = coupled_coefficients(k, 2);
        p.g = g.clone();
        evolve(&p).unwrap().0
    };
    for _ in 0..3 {
        let (f1, f2) = (smooth_random(&mut rng, k, 8), smooth_random(&mut rng, k, 8));
        let (q1, q2) = (smooth_random(&mut rng, k, 5), smooth_random(&mut rng, k, 5));
        let g1 = Trajectory::from_fn(0.2, 10, |t| q1.scale_real(t.cos())).unwrap();
        let g2 = Trajectory::from_fn(0.2, 10, |t| q2.scale_real(1.0 + t)).unwrap();
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let g12 = Trajectory::from_fn(0.2, 10, |t| &q1.scale_real(a * t.cos()) + &q2.scale_real(b * (1.0 + t))).unwrap();
        let lhs = run(&(&f1.scale_real(a) + &f2.scale_real(b)), &g12);
        let (r1, r2) = (run(&f1, &g1), run(&f2, &g2));
        for i in 0..lhs.len() {
            let rhs = &r1.fields()[i].scale_real(a) + &r2.fields()[i].scale_real(b);
            assert!((&lhs.fields()[i] - &rhs).max_abs() < 1e-10);
        }
    }
}

#[test]
fn a_priori_bound_uniform_over_draws_and_cutoff() {
    let mut ratios = Vec::new();
    for seed in 0..4u64 {
        let mut per_k = Vec::new();
        for k in [32usize, 64] {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let h0 = smooth_random(&mut rng, k, 12);
            let q = smooth_random(&mut rng, k, 12);
            let g = Trajectory::from_fn(0.2, 20, |t| q.scale_real((3.0 * t).cos())).unwrap();
            let mut p = EvolutionProblem::new(annulus(), h0.clone(), 0.2, 0.01).unwrap();
            p.coefficients = coupled_coefficients(k, seed);
            p.g = g.clone();
            let (_, d) = evolve(&p).unwrap();
            let rhs = g.lp_hs(2.0, 0.5) + h_norm(&h0, 2.0);
            per_k.push(d.xt_norm / rhs);
        }
        assert!(((per_k[1] - per_k[0]) / per_k[0]).abs() < 0.1, "{per_k:?}");
        ratios.extend(per_k);
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(max.is_finite() && max / min < 5.0, "{ratios:?}");
}

#[test]
fn reduction_with_outer_flux() {
    let k = 4;
    let c = 0.7;
    let mut p = EvolutionProblem::new(annulus(), PeriodicField::zeros(k), 0.1, 0.05).unwrap();
    p.coefficients.jump_weight = 0.5;
    p.data.mu_outer = PeriodicField::constant(k, c);
    let r = reduce_data(&p).unwrap();
    // μ̂⁺ = 0, μ̂⁻ = cR ln(r/r₀): [∂_nμ̂] = cR/r₀
    let want = -0.5 * c * 2.0;
    for f in r.g.fields() {
        assert!((f.mode(0).re - want).abs() < 1e-10 && (f - &PeriodicField::constant(k, want)).max_abs() < 1e-10);
    }
    assert!(r.data.is_zero());
}

#[test]
fn reduction_rejects_incompatible_outer_velocity() {
    let k = 4;
    let mut p = EvolutionProblem::new(annulus(), PeriodicField::zeros(k), 0.1, 0.05).unwrap();
    let er = outward(k).scale(C64::new(-1.0, 0.0));
    p.data.velocity_outer = er;
    assert!(matches!(reduce_data(&p), Err(Error::CompatibilityViolated { .. })));
}

#[test]
fn coupled_post_hoc_residuals() {
    let k = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut p = EvolutionProblem::new(annulus(), smooth_random(&mut rng, k, 6), 0.1, 0.01).unwrap();
    p.coefficients = coupled_coefficients(k, 4);
    p.coefficients.a4 = VectorCoefficient::constant(outward(k).scale(C64::new(0.1, 0.0)));
    p.coefficients.a5 = ScalarCoefficient::constant(PeriodicField::constant(k, 0.2));
    p.data.mu_trace = PeriodicField::trig(k, 2, 0.3, 0.0);
    p.data.mu_outer = PeriodicField::trig(k, 1, 0.0, 0.2);
    p.data.traction = VectorField::new(PeriodicField::trig(k, 3, 0.1, 0.0), PeriodicField::trig(k, 1, 0.0, 0.2));
    // tangential outer data keeps the flux balance
    p.data.velocity_outer = VectorField::new(PeriodicField::trig(k, 1, 0.0, -0.1), PeriodicField::trig(k, 1, 0.1, 0.0));
    for bc in [
        BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::Dirichlet),
        BoundaryConfig::new(MuOuter::Dirichlet, VelocityOuter::NavierSlip { alpha: 1.0 }),
        BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::Robin { alpha: 1.0 }),
    ] {
        p.bc = bc;
        let sol = solve_coupled(&p, &[0.0, 0.05, 0.1]).unwrap();
        assert!(sol.max_residual() < POST_HOC_TOL, "{bc:?}: {:?}", sol.states.iter().map(|s| s.residuals).collect::<Vec<_>>());
    }
}

#[test]
fn pure_ms_has_no_flow() {
    let k = 6;
    let p = EvolutionProblem::new(annulus(), PeriodicField::trig(k, 2, 1.0, 0.0), 0.05, 0.01).unwrap();
    let sol = solve_coupled(&p, &[0.05]).unwrap();
    let flow = sol.states[0].flow.as_ref().unwrap();
    assert!(flow.traces().v_plus.x.max_abs() < 1e-14 && flow.traces().p_plus.max_abs() < 1e-14);
    assert!(sol.max_residual() < POST_HOC_TOL);
    let zero = EvolutionProblem::new(annulus(), PeriodicField::zeros(k), 0.05, 0.01).unwrap();
    let sol = solve_coupled(&zero, &[0.0, 0.05]).unwrap();
    assert!(sol.states.iter().all(|s| s.h.max_abs() == 0.0 && s.mu.jump().max_abs() == 0.0));
}
