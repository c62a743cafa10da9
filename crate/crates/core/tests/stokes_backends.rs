use mssolve_core::field::{PeriodicField, VectorField, C64};
use mssolve_core::twophase_elliptic::{Backend, SourceTerm, VolumeSource};
use mssolve_core::twophase_stokes::{check_compatibility, solve_two_phase_stokes, BodyForce, StokesData};
use mssolve_core::{BoundaryConfig, InterfaceGeometry, MuOuter, Phase, VelocityOuter};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_field(rng: &mut ChaCha8Rng, k: usize) -> PeriodicField {
    let mut f = PeriodicField::zeros(k);
    for j in 1..=k as i64 {
        let decay = (-(j as f64) * 0.6).exp();
        f = &f + &PeriodicField::trig(k, j, decay * rng.gen_range(-1.0..1.0), decay * rng.gen_range(-1.0..1.0));
    }
    &f + &PeriodicField::constant(k, rng.gen_range(-1.0..1.0))
}

fn random_vector(rng: &mut ChaCha8Rng, k: usize) -> VectorField {
    VectorField::new(random_field(rng, k), random_field(rng, k))
}

fn force() -> BodyForce {
    let term = |k: i64, m: u32, c: C64| SourceTerm { k, m, coeff: c };
    BodyForce {
        potential: VolumeSource::new(vec![term(1, 1, C64::new(0.3, 0.2)), term(-1, 1, C64::new(0.3, -0.2))]).unwrap(),
        stream: VolumeSource::new(vec![term(0, 2, C64::new(0.4, 0.0)), term(2, 2, C64::new(-0.1, 0.0))]).unwrap(),
    }
}

fn bcs() -> [BoundaryConfig; 3] {
    [
        BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::Dirichlet),
        BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::NavierSlip { alpha: 1.0 }),
        BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::Robin { alpha: 1.0 }),
    ]
}

/// Random data that satisfies the flux condition when Γ₃ᵛ = ∅.
fn data(rng: &mut ChaCha8Rng, k: usize, bc: &BoundaryConfig, g: &InterfaceGeometry) -> StokesData {
    let jump = random_vector(rng, k);
    let traction = random_vector(rng, k);
    let mut outer = random_vector(rng, k);
    if bc.gamma3_empty() {
        let c = check_compatibility(&jump, &outer, g, bc, 0.0) / (2.0 * PI * g.outer_radius());
        outer = outer.add(&VectorField::new(PeriodicField::trig(k, 1, c, 0.0), PeriodicField::trig(k, 1, 0.0, c)));
        assert!(check_compatibility(&jump, &outer, g, bc, 0.0).abs() < 1e-12);
    }
    StokesData { force: force(), jump, traction, outer }
}

#[test]
fn bie_reproduces_spectral_on_circle() {
    let g = InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for bc in bcs() {
        let d = data(&mut rng, 6, &bc, &g);
        let a = solve_two_phase_stokes(&d, &bc, &g, 0.0, Backend::Spectral).unwrap();
        let b = solve_two_phase_stokes(&d, &bc, &g, 0.0, Backend::Bie).unwrap();
        let diff = a.traces().max_diff(b.traces());
        assert!(diff < 1e-6, "{bc:?}: {diff:.3e}");
        // interior values away from the curves
        let near = [(0.3, Phase::Plus), (0.9999, Phase::Plus), (0.98, Phase::Plus), (1.0001, Phase::Minus), (1.5, Phase::Minus), (1.9999, Phase::Minus)];
        for (x, ph) in near.iter().flat_map(|&(r, ph)| [0.4f64, 2.9].map(|t| ([r * t.cos(), r * t.sin()], ph))) {
            let (va, vb) = (a.velocity(x, ph), b.velocity(x, ph));
            let (pa, pb) = (a.pressure(x, ph).unwrap(), b.pressure(x, ph).unwrap());
            let e = (va[0] - vb[0]).norm().max((va[1] - vb[1]).norm()).max((pa - pb).norm());
            assert!(e < 1e-6, "{bc:?} at {x:?}: {e:.3e}");
        }
    }
}

#[test]
fn collocation_matches_bie_off_circle() {
    let k = 4;
    let radius = &PeriodicField::constant(k, 1.0) + &PeriodicField::trig(k, 3, 0.08, 0.04);
    let g = InterfaceGeometry::fixed(radius, 2.0, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for bc in bcs() {
        let d = data(&mut rng, k, &bc, &g);
        let a = solve_two_phase_stokes(&d, &bc, &g, 0.0, Backend::Spectral).unwrap();
        let b = solve_two_phase_stokes(&d, &bc, &g, 0.0, Backend::Bie).unwrap();
        let diff = a.traces().max_diff(b.traces());
        assert!(diff < 1e-5, "{bc:?}: {diff:.3e}");
    }
}

#[test]
fn jump_conditions_hold_on_traces() {
    let g = InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for backend in [Backend::Spectral, Backend::Bie] {
        for bc in bcs() {
            let d = data(&mut rng, 5, &bc, &g);
            let sol = solve_two_phase_stokes(&d, &bc, &g, 0.0, backend).unwrap();
            let tr = sol.traces();
            let jump = tr.v_plus.sub(&tr.v_minus).sub(&d.jump.resize(tr.v_plus.cutoff()));
            assert!(jump.x.max_abs().max(jump.y.max_abs()) < 1e-8, "{backend:?} {bc:?}");
        }
    }
}

#[test]
fn solution_is_linear_in_data() {
    let g = InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap();
    let bc = BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::Robin { alpha: 1.0 });
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (d1, d2) = (data(&mut rng, 4, &bc, &g), data(&mut rng, 4, &bc, &g));
    let c = C64::new(0.7, 0.0);
    let sum = StokesData {
        force: BodyForce {
            potential: VolumeSource::new([d1.force.potential.terms(), d2.force.potential.scale(c).terms()].concat()).unwrap(),
            stream: VolumeSource::new([d1.force.stream.terms(), d2.force.stream.scale(c).terms()].concat()).unwrap(),
        },
        jump: d1.jump.add(&d2.jump.scale(c)),
        traction: d1.traction.add(&d2.traction.scale(c)),
        outer: d1.outer.add(&d2.outer.scale(c)),
    };
    let solve = |d: &StokesData| solve_two_phase_stokes(d, &bc, &g, 0.0, Backend::Spectral).unwrap();
    let (s1, s2, s) = (solve(&d1), solve(&d2), solve(&sum));
    for x in [[0.2, 0.1], [1.4, -0.3]] {
        let ph = g.phase_of(x, 0.0);
        let (a, b, v) = (s1.velocity(x, ph), s2.velocity(x, ph), s.velocity(x, ph));
        for i in 0..2 {
            assert!((a[i] + b[i] * c - v[i]).norm() < 1e-10);
        }
    }
}
