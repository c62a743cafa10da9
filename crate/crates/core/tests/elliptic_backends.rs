use mssolve_core::field::{PeriodicField, C64};
use mssolve_core::twophase_elliptic::{solve_two_phase_laplace, Backend, SourceTerm, VolumeSource};
use mssolve_core::{BoundaryConfig, InterfaceGeometry, MuOuter, Phase, TwoPhaseScalarField, VelocityOuter};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(rng: &mut ChaCha8Rng, k: usize) -> PeriodicField {
    let mut f = PeriodicField::constant(k, rng.gen_range(-1.0..1.0));
    for j in 1..=k as i64 {
        let d = (-(j as f64) * 0.5).exp();
        f = &f + &PeriodicField::trig(k, j, d * rng.gen_range(-1.0..1.0), d * rng.gen_range(-1.0..1.0));
    }
    f
}

fn source() -> VolumeSource {
    VolumeSource::new(vec![
        SourceTerm { k: 0, m: 0, coeff: C64::new(0.5, 0.0) },
        SourceTerm { k: 2, m: 2, coeff: C64::new(0.2, 0.1) },
        SourceTerm { k: -2, m: 2, coeff: C64::new(0.2, -0.1) },
    ])
    .unwrap()
}

fn probe_points() -> Vec<([f64; 2], Phase)> {
    let mut v = Vec::new();
    for (r, ph) in [(0.3, Phase::Plus), (0.9999, Phase::Plus), (0.99, Phase::Plus), (1.0001, Phase::Minus), (1.02, Phase::Minus), (1.5, Phase::Minus), (1.9999, Phase::Minus)] {
        for th in [0.1f64, 2.3, 4.4] {
            v.push(([r * th.cos(), r * th.sin()], ph));
        }
    }
    v
}

fn max_gap(a: &TwoPhaseScalarField, b: &TwoPhaseScalarField) -> f64 {
    let mut worst: f64 = (a.jump().resize(b.jump().cutoff()).max_abs() - b.jump().max_abs()).abs();
    for ph in [Phase::Plus, Phase::Minus] {
        let d = a.normal_derivative(ph);
        let e = b.normal_derivative(ph);
        for th in [0.0, 0.7, 1.9, 3.3, 5.1] {
            worst = worst.max((d.eval(th) - e.eval(th)).norm());
        }
    }
    worst
}

#[test]
fn bie_reproduces_spectral_on_circle() {
    let g = InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for mu in [MuOuter::Neumann, MuOuter::Dirichlet] {
        let bc = BoundaryConfig::new(mu, VelocityOuter::Dirichlet);
        let (fp, fm, a4) = (random_field(&mut rng, 8), random_field(&mut rng, 8), random_field(&mut rng, 8));
        let a = solve_two_phase_laplace(&fp, &fm, &source(), &a4, &bc, &g, 0.0, Backend::Spectral).unwrap();
        let b = solve_two_phase_laplace(&fp, &fm, &source(), &a4, &bc, &g, 0.0, Backend::Bie).unwrap();
        let gap = max_gap(&a, &b);
        assert!(gap < 1e-6, "{mu:?}: {gap:.3e}");
        for (x, ph) in probe_points() {
            let dv = (a.value(x, ph) - b.value(x, ph)).norm();
            let (ga, gb) = (a.gradient(x, ph), b.gradient(x, ph));
            let dg = (ga[0] - gb[0]).norm().max((ga[1] - gb[1]).norm());
            assert!(dv < 1e-8 && dg < 1e-6, "{mu:?} {x:?}: {dv:.3e} {dg:.3e}");
        }
    }
}

#[test]
fn collocation_matches_bie_off_circle() {
    let k = 6;
    let radius = &PeriodicField::constant(k, 1.0) + &PeriodicField::trig(k, 2, 0.1, -0.05);
    let g = InterfaceGeometry::fixed(radius, 2.0, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for mu in [MuOuter::Neumann, MuOuter::Dirichlet] {
        let bc = BoundaryConfig::new(mu, VelocityOuter::Dirichlet);
        let (fp, fm, a4) = (random_field(&mut rng, k), random_field(&mut rng, k), random_field(&mut rng, k));
        let a = solve_two_phase_laplace(&fp, &fm, &source(), &a4, &bc, &g, 0.0, Backend::Spectral).unwrap();
        let b = solve_two_phase_laplace(&fp, &fm, &source(), &a4, &bc, &g, 0.0, Backend::Bie).unwrap();
        let gap = max_gap(&a, &b);
        assert!(gap < 1e-6, "{mu:?}: {gap:.3e}");
    }
}
