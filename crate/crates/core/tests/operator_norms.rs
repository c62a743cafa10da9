use std::sync::Arc;

use mssolve_core::field::{PeriodicField, VectorField, C64};
use mssolve_core::ms_operator::{
    b0_symbol, difference_norm, ms_symbol, operator_norm_estimate, Coefficients, FourierMultiplier, LinearOperator,
    OperatorHandle, OperatorKind, ScalarCoefficient, VectorCoefficient,
};
use mssolve_core::twophase_elliptic::Backend;
use mssolve_core::{BoundaryConfig, InterfaceGeometry, MuOuter, VelocityOuter};
use proptest::prelude::*;

fn annulus() -> InterfaceGeometry {
    InterfaceGeometry::circle(1.0, 2.0, 0.2).unwrap()
}

fn coefficients(k: usize) -> Coefficients {
    let b2 = &PeriodicField::constant(k, 1.0) + &PeriodicField::trig(k, 1, 0.3, 0.0);
    let n = VectorField::new(PeriodicField::trig(k, 1, -1.0, 0.0), PeriodicField::trig(k, 1, 0.0, -1.0));
    Coefficients {
        b2: ScalarCoefficient::constant(b2),
        a3: VectorCoefficient::constant(n.clone()),
        a4: VectorCoefficient::constant(n.scale(C64::new(0.5, 0.0))),
        a5: ScalarCoefficient::constant(PeriodicField::constant(k, 0.25)),
        ..Coefficients::mullins_sekerka(1.0)
    }
}

fn norm(kind: OperatorKind, k: usize, s_in: f64) -> f64 {
    let bc = BoundaryConfig::new(MuOuter::Dirichlet, VelocityOuter::Dirichlet);
    let op = OperatorHandle::new(kind, &annulus(), 0.0, &coefficients(k), &bc, Backend::Spectral, k).unwrap();
    operator_norm_estimate(&op, s_in, 0.5).unwrap()
}

#[test]
fn lower_order_norms_stable_a0_grows() {
    for (kind, s) in [(OperatorKind::B0, 2.5), (OperatorKind::B1, 1.5), (OperatorKind::StokesVelocity, 2.0)] {
        let a = norm(kind, 16, s);
        let b = norm(kind, 32, s);
        assert!(a.is_finite() && ((b - a) / a).abs() < 0.1, "{kind:?}: {a} {b}");
    }
    let a = norm(OperatorKind::A0, 16, 2.5);
    let b = norm(OperatorKind::A0, 32, 2.5);
    assert!(b / a > 1.8, "{a} {b}");
    let a = norm(OperatorKind::A0, 16, 3.5);
    let b = norm(OperatorKind::A0, 32, 3.5);
    assert!(((b - a) / a).abs() < 0.1, "{a} {b}");
}

#[test]
fn a0_symbol_sweep_against_closed_form() {
    let g = annulus();
    let c = Coefficients::mullins_sekerka(1.0);
    for outer in [MuOuter::Neumann, MuOuter::Dirichlet] {
        let bc = BoundaryConfig::new(MuOuter::Neumann, VelocityOuter::Dirichlet);
        let a0 = OperatorHandle::new(OperatorKind::A0, &g, 0.0, &c, &bc, Backend::Spectral, 32).unwrap();
        let b0 = OperatorHandle::new(OperatorKind::B0, &g, 0.0, &c, &bc, Backend::Spectral, 32).unwrap();
        for k in [1i64, 2, 5, 13, 32] {
            let h = PeriodicField::single_mode(32, k, C64::new(1.0, 0.0));
            let mut got = a0.apply(&h).unwrap().mode(k).re;
            if outer == MuOuter::Dirichlet {
                got += b0.apply(&h).unwrap().mode(k).re;
            }
            let want = ms_symbol(k, 1.0, 2.0, 1.0, outer);
            assert!((got - want).abs() < 1e-9 * want, "k={k} {outer:?}: {got} {want}");
        }
    }
    // B₀ decays relative to A₀
    let ratios: Vec<f64> = (1..12).map(|k| b0_symbol(k, 1.0, 2.0, 1.0) / ms_symbol(k, 1.0, 2.0, 1.0, MuOuter::Neumann)).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
    for (i, r) in ratios.iter().enumerate() {
        assert!(*r <= 3.0 * 0.25f64.powi(i as i32 + 1));
    }
}

#[test]
fn noncircular_a0_on_constants_and_bie_agrees() {
    let radius = &PeriodicField::constant(3, 1.0) + &PeriodicField::trig(3, 3, 0.06, 0.0);
    let g = InterfaceGeometry::fixed(radius, 2.0, 0.1).unwrap();
    let c = Coefficients::mullins_sekerka(1.0);
    let bc = BoundaryConfig::default();
    let spec = OperatorHandle::new(OperatorKind::A0, &g, 0.0, &c, &bc, Backend::Spectral, 6).unwrap();
    let one = PeriodicField::constant(6, 1.0);
    assert!(spec.apply(&one).unwrap().max_abs() < 1e-8);
    let bie = OperatorHandle::new(OperatorKind::A0, &g, 0.0, &c, &bc, Backend::Bie, 6).unwrap();
    let h = &PeriodicField::trig(6, 2, 1.0, 0.3) + &PeriodicField::trig(6, 1, 0.0, 0.5);
    let a = spec.apply(&h).unwrap();
    let b = bie.apply(&h).unwrap();
    assert!((&a - &b).max_abs() < 1e-6 * a.max_abs(), "{}", (&a - &b).max_abs());
}

fn rotating(amp: f64) -> InterfaceGeometry {
    let family = Arc::new(move |t: f64| {
        let (c, s) = ((2.0 * t).cos(), (2.0 * t).sin());
        let rho = &PeriodicField::constant(2, 1.0) + &PeriodicField::trig(2, 2, amp * c, amp * s);
        let rate = PeriodicField::trig(2, 2, 2.0 * amp * s, -2.0 * amp * c);
        (rho, rate)
    });
    InterfaceGeometry::from_family(family, 2.0, 0.1, vec![0.0, 0.5]).unwrap()
}

#[test]
fn relative_continuity_on_rotating_curve() {
    let g = rotating(0.05);
    let c = Coefficients::mullins_sekerka(1.0);
    let bc = BoundaryConfig::default();
    let k = 6;
    let op = |t| OperatorHandle::new(OperatorKind::A0, &g, t, &c, &bc, Backend::Spectral, k).unwrap();
    let base = op(0.0);
    let eps: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&dt| difference_norm(&base, &op(dt), 3.5, 0.5).unwrap())
        .collect();
    assert!(eps[1] < 0.7 * eps[0] && eps[2] < 0.7 * eps[1], "{eps:?}");
}

#[test]
fn multiplier_norms() {
    let id = FourierMultiplier::identity(32);
    assert!((operator_norm_estimate(&id, 0.5, 0.5).unwrap() - 1.0).abs() < 1e-12);
    let cube = FourierMultiplier::new(128, |k| C64::new((k.abs() as f64).powi(3), 0.0));
    let n = operator_norm_estimate(&cube, 3.5, 0.5).unwrap();
    assert!(n < 1.0 && n > 0.999);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn handles_are_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, seed in 0u64..1000) {
        let k = 8;
        let f = PeriodicField::from_fn(k, |t| (t + seed as f64).sin() + 0.3 * (3.0 * t).cos());
        let h = PeriodicField::from_fn(k, |t| (2.0 * t + 0.1 * seed as f64).cos());
        let bc = BoundaryConfig::new(MuOuter::Dirichlet, VelocityOuter::Dirichlet);
        for kind in [OperatorKind::DtN, OperatorKind::A0, OperatorKind::B0, OperatorKind::B1, OperatorKind::Bfull] {
            let op = OperatorHandle::new(kind, &annulus(), 0.0, &coefficients(k), &bc, Backend::Spectral, k).unwrap();
            let lhs = op.apply(&(&f.scale_real(a) + &h.scale_real(b))).unwrap();
            let rhs = &op.apply(&f).unwrap().scale_real(a) + &op.apply(&h).unwrap().scale_real(b);
            prop_assert!((&lhs - &rhs).max_abs() < 1e-10 * (1.0 + lhs.max_abs()));
        }
    }

    #[test]
    fn symbol_symmetric_positive(k in 1i64..200, r0 in 0.3f64..1.5, sigma in 0.1f64..5.0) {
        for outer in [MuOuter::Neumann, MuOuter::Dirichlet] {
            let s = ms_symbol(k, r0, 2.0, sigma, outer);
            prop_assert!(s > 0.0);
            prop_assert_eq!(s, ms_symbol(-k, r0, 2.0, sigma, outer));
        }
    }
}
