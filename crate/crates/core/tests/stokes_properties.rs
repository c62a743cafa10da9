use approx::assert_abs_diff_eq;
use mssolve_core::field::{PeriodicField, VectorField, C64};
use mssolve_core::twophase_elliptic::Backend;
use mssolve_core::twophase_stokes::{
    discrete_infsup, energy_balance, energy_identity_residual, integrate_phase, korn_constant, lift_jump,
    solve_two_phase_stokes, StokesData,
};
use mssolve_core::{BoundaryConfig, Error, InterfaceGeometry, MuOuter, Phase, VelocityOuter};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn circles() -> InterfaceGeometry {
    InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap()
}

fn bc(v: VelocityOuter) -> BoundaryConfig {
    BoundaryConfig::new(MuOuter::Neumann, v)
}

fn families() -> [BoundaryConfig; 3] {
    [
        bc(VelocityOuter::Dirichlet),
        bc(VelocityOuter::NavierSlip { alpha: 1.0 }),
        bc(VelocityOuter::Robin { alpha: 1.0 }),
    ]
}

fn normal(k: usize) -> VectorField {
    VectorField::new(PeriodicField::trig(k, 1, -1.0, 0.0), PeriodicField::trig(k, 1, 0.0, -1.0))
}

fn random_traction(rng: &mut ChaCha8Rng, k: usize) -> VectorField {
    let mut c = || {
        let mut f = PeriodicField::constant(k, rng.gen_range(-1.0..1.0));
        for j in 1..=k as i64 {
            f = &f + &PeriodicField::trig(k, j, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        f
    };
    VectorField::new(c(), c())
}

#[test]
fn zero_data_gives_zero_flow() {
    let g = circles();
    for b in families() {
        for backend in [Backend::Spectral, Backend::Bie] {
            let sol = solve_two_phase_stokes(&StokesData::zeros(3), &b, &g, 0.0, backend).unwrap();
            let tr = sol.traces();
            let m = [&tr.v_plus.x, &tr.v_plus.y, &tr.p_plus, &tr.v_minus.x, &tr.v_minus.y, &tr.p_minus]
                .iter()
                .map(|f| f.max_abs())
                .fold(0.0, f64::max);
            assert_eq!(m, 0.0);
        }
    }
}

#[test]
fn energy_identity_for_random_tractions() {
    let g = circles();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for b in families() {
        for _ in 0..4 {
            let d = StokesData::traction_driven(random_traction(&mut rng, 4));
            let sol = solve_two_phase_stokes(&d, &b, &g, 0.0, Backend::Spectral).unwrap();
            let e = energy_balance(&sol, &d, &b, &g).unwrap();
            assert!(e.lhs > 0.0);
            assert!(e.residual() < 1e-6 * (e.lhs + e.rhs.norm()), "{b:?}: {:.3e}", e.residual());
        }
    }
}

#[test]
fn energy_identity_needs_gradients() {
    let g = circles();
    let d = StokesData::traction_driven(normal(2));
    let b = bc(VelocityOuter::Dirichlet);
    let sol = solve_two_phase_stokes(&d, &b, &g, 0.0, Backend::Bie).unwrap();
    assert!(matches!(energy_identity_residual(&sol, &d, &b, &g), Err(Error::Unsupported(_))));
}

#[test]
fn compatibility_is_enforced_without_outflow() {
    let g = circles();
    let d = StokesData { jump: normal(2), ..StokesData::zeros(2) };
    for backend in [Backend::Spectral, Backend::Bie] {
        let r = solve_two_phase_stokes(&d, &bc(VelocityOuter::Dirichlet), &g, 0.0, backend);
        assert!(matches!(r, Err(Error::CompatibilityViolated { .. })), "{backend:?}");
        let ok = solve_two_phase_stokes(&d, &bc(VelocityOuter::Robin { alpha: 1.0 }), &g, 0.0, backend).unwrap();
        let tr = ok.traces();
        let jump = tr.v_plus.sub(&tr.v_minus).sub(&normal(tr.v_plus.cutoff()));
        assert!(jump.x.max_abs().max(jump.y.max_abs()) < 1e-8);
    }
}

#[test]
fn frictionless_slip_is_rejected() {
    let g = circles();
    let r = solve_two_phase_stokes(
        &StokesData::traction_driven(normal(2)),
        &bc(VelocityOuter::NavierSlip { alpha: 0.0 }),
        &g,
        0.0,
        Backend::Spectral,
    );
    assert!(matches!(r, Err(Error::CoercivityViolated(_))), "{r:?}");
}

#[test]
fn repeated_solves_agree_and_pressure_has_zero_mean() {
    let g = circles();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = StokesData::traction_driven(random_traction(&mut rng, 5));
    for backend in [Backend::Spectral, Backend::Bie] {
        let b = bc(VelocityOuter::Dirichlet);
        let s1 = solve_two_phase_stokes(&d, &b, &g, 0.0, backend).unwrap();
        let s2 = solve_two_phase_stokes(&d, &b, &g, 0.0, backend).unwrap();
        assert!(s1.traces().max_diff(s2.traces()) < 1e-12);
        let mean: C64 = [Phase::Plus, Phase::Minus]
            .iter()
            .map(|&ph| {
                integrate_phase(&g, 0.0, ph, 64, |r, th| s1.pressure([r * th.cos(), r * th.sin()], ph).unwrap())
            })
            .sum();
        assert!(mean.norm() < 1e-8, "{backend:?}: {mean}");
    }
}

#[test]
fn velocity_is_divergence_free_inside() {
    let g = circles();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for b in families() {
        let d = StokesData::traction_driven(random_traction(&mut rng, 4));
        let sol = solve_two_phase_stokes(&d, &b, &g, 0.0, Backend::Spectral).unwrap();
        for _ in 0..20 {
            let r: f64 = rng.gen_range(0.05..1.95);
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let x = [r * th.cos(), r * th.sin()];
            let st = sol.state(x, g.phase_of(x, 0.0)).unwrap();
            assert!(st.divergence().norm() < 1e-8);
        }
    }
}

/// Polynomial stream function x^a y^b: returns the test velocity ∇^⊥ψ and its gradient.
fn test_field(a: i32, b: i32, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let p = |e: i32, v: f64| if e < 0 { 0.0 } else { v.powi(e) };
    let (ai, bi) = (a as f64, b as f64);
    let psi_y = bi * p(a, x[0]) * p(b - 1, x[1]);
    let psi_x = ai * p(a - 1, x[0]) * p(b, x[1]);
    let psi_xy = ai * bi * p(a - 1, x[0]) * p(b - 1, x[1]);
    let psi_xx = ai * (ai - 1.0) * p(a - 2, x[0]) * p(b, x[1]);
    let psi_yy = bi * (bi - 1.0) * p(a, x[0]) * p(b - 2, x[1]);
    ([psi_y, -psi_x], [[psi_xy, psi_yy], [-psi_xx, -psi_xy]])
}

#[test]
fn weak_form_against_divergence_free_fields() {
    // Robin outer condition: no essential constraint on the test space
    let g = circles();
    let b = bc(VelocityOuter::Robin { alpha: 1.0 });
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let k = 4;
    let d = StokesData::traction_driven(random_traction(&mut rng, k));
    let sol = solve_two_phase_stokes(&d, &b, &g, 0.0, Backend::Spectral).unwrap();
    let nt = 96;
    let monomials: Vec<(i32, i32)> = (1..=4).flat_map(|n| (0..=n).map(move |a| (a, n - a))).collect();
    assert!(monomials.len() > 2 * k);
    for (a, bb) in monomials {
        let mut lhs = C64::new(0.0, 0.0);
        for ph in [Phase::Plus, Phase::Minus] {
            lhs += integrate_phase(&g, 0.0, ph, nt, |r, th| {
                let x = [r * th.cos(), r * th.sin()];
                let dv = sol.state(x, ph).unwrap().strain();
                let (_, gp) = test_field(a, bb, x);
                let mut s = C64::new(0.0, 0.0);
                for i in 0..2 {
                    for j in 0..2 {
                        s += dv[i][j] * (gp[i][j] + gp[j][i]);
                    }
                }
                s
            });
        }
        let h = 2.0 * std::f64::consts::PI / nt as f64;
        for th in (0..nt).map(|j| j as f64 * h) {
            let x = [2.0 * th.cos(), 2.0 * th.sin()];
            let v = sol.velocity(x, Phase::Minus);
            let (phi, _) = test_field(a, bb, x);
            lhs += (v[0] * phi[0] + v[1] * phi[1]) * 2.0 * h;
            // interface: unit circle, ds = dθ
            let y = [th.cos(), th.sin()];
            let (phi, _) = test_field(a, bb, y);
            lhs += (d.traction.x.eval(th) * phi[0] + d.traction.y.eval(th) * phi[1]) * h;
        }
        assert!(lhs.norm() < 1e-8, "x^{a} y^{bb}: {:.3e}", lhs.norm());
    }
}

#[test]
fn lift_of_zero_jump_vanishes() {
    let g = circles();
    let z = VectorField::zeros(3);
    let l = lift_jump(&z, &z, &g, &bc(VelocityOuter::Dirichlet), 0.0).unwrap();
    assert_eq!(l.q_value([0.0, 1.5]).norm(), 0.0);
    let v = l.velocity([1.2, 0.4]);
    assert_eq!(v[0].norm() + v[1].norm(), 0.0);
}

#[test]
fn tangential_jump_is_carried_by_stokes_lift() {
    let g = circles();
    let c = 0.7;
    let s = VectorField::new(PeriodicField::trig(2, 1, 0.0, -c), PeriodicField::trig(2, 1, c, 0.0));
    let l = lift_jump(&s, &VectorField::zeros(2), &g, &bc(VelocityOuter::Dirichlet), 0.0).unwrap();
    for x in [[0.0, 1.4], [-1.3, 0.9], [1.9, 0.1]] {
        let gq = l.q_gradient(x);
        assert!(gq[0].norm() + gq[1].norm() < 1e-10);
    }
    assert!(l.trace_error() < 1e-8);
}

#[test]
fn normal_jump_potential_matches_closed_form() {
    // s = n cosθ on the unit circle: −∂_r q = cosθ at r = 1, ∂_r q = 0 at r = 2
    // gives q = (r/3 + 4/(3r)) cosθ
    let g = circles();
    let k = 3;
    let n = normal(k);
    let cos = PeriodicField::trig(k, 1, 1.0, 0.0);
    let s = VectorField::new(n.x.multiply(&cos).resize(k), n.y.multiply(&cos).resize(k));
    let l = lift_jump(&s, &VectorField::zeros(k), &g, &bc(VelocityOuter::Dirichlet), 0.0).unwrap();
    for (r, th) in [(1.2, 0.3), (1.7, 2.0), (1.95, -1.0)] {
        let want = (r / 3.0 + 4.0 / (3.0 * r)) * f64::cos(th);
        let got = l.q_value([r * f64::cos(th), r * f64::sin(th)]);
        assert_abs_diff_eq!(got.re, want, epsilon = 1e-9);
        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-9);
    }
    assert!(l.trace_error() < 1e-8);
}

#[test]
fn incompatible_jump_cannot_be_lifted() {
    let g = circles();
    let r = lift_jump(&normal(2), &VectorField::zeros(2), &g, &bc(VelocityOuter::Dirichlet), 0.0);
    assert!(matches!(r, Err(Error::CompatibilityViolated { .. })));
}

#[test]
fn korn_constants_stable_under_refinement() {
    let g = circles();
    for b in families() {
        let c1 = korn_constant(&b, &g, 16).unwrap();
        let c2 = korn_constant(&b, &g, 32).unwrap();
        assert!(c1.is_finite() && ((c2 - c1) / c1).abs() < 0.1, "{b:?}: {c1} {c2}");
    }
}

#[test]
fn infsup_bounded_below_under_refinement() {
    let g = circles();
    for b in families() {
        let betas: Vec<f64> = [16, 32, 64].iter().map(|&r| discrete_infsup(&b, &g, r).unwrap()).collect();
        assert!(betas[0] > 0.1);
        for w in betas.windows(2) {
            assert!(w[1] > 0.85 * w[0], "{b:?}: {betas:?}");
        }
    }
}
