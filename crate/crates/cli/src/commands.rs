//! Subcommand implementations. Each writes its artifacts into `out` and returns a short summary.

use std::path::Path;

use log::info;
use mssolve_core::evolution::evolve;
use mssolve_core::field::nodes;
use mssolve_core::geometry::surface_laplacian;
use mssolve_core::ms_operator::{b0_symbol, b1_symbol, ms_symbol, traction_of};
use mssolve_core::twophase_elliptic::{LaplaceData, LaplaceSolver};
use mssolve_core::twophase_stokes::{check_compatibility, energy_identity_residual, solve_two_phase_stokes, StokesData};
use mssolve_core::verify::{run_check, criterion_count, Level, VerifyConfig};
use mssolve_core::{Error, MuOuter, PeriodicField, Phase};
use serde_json::json;

use crate::output::{json_num, provenance, write_csv, write_json};
use crate::scenario::Scenario;
use crate::{CliError, VERSION};

/// Sample count for nodal output.
fn output_nodes(k: usize) -> usize {
    4 * k + 4
}

fn re(f: &PeriodicField, n: usize) -> Vec<f64> {
    f.real_samples(n)
}

/// μ^± = σΔ_Γh₀ ± b₂h₀ + a₃ with outer datum a₄.
pub fn solve_elliptic(s: &Scenario, out: &Path) -> Result<String, CliError> {
    let k = s.k;
    let g = s.geometry()?;
    let bc = s.boundary_config();
    let h = s.h0();
    let base = &surface_laplacian(&h, &g, 0.0).scale_real(s.sigma) + &s.data.mu_trace.field(k);
    let b2h = s.coefficients.b2.field(k).multiply(&h).resize(k);
    let data = LaplaceData {
        f_plus: &base + &b2h,
        f_minus: &base - &b2h,
        outer: s.data.mu_outer.field(k),
        ..LaplaceData::traces(PeriodicField::zeros(k), PeriodicField::zeros(k))
    };
    let mu = LaplaceSolver::new(&g, 0.0, bc.mu_outer, s.backend(), k)?.solve(&data)?;
    let n = output_nodes(k);
    let (dp, dm, jump) = (
        re(mu.normal_derivative(Phase::Plus), n),
        re(mu.normal_derivative(Phase::Minus), n),
        re(&mu.jump(), n),
    );
    let rows: Vec<Vec<f64>> = nodes(n).iter().enumerate().map(|(j, &t)| vec![t, dp[j], dm[j], jump[j]]).collect();
    write_csv(
        &out.join("elliptic.csv"),
        &provenance("solve-elliptic", s),
        &["theta", "dn_mu_plus", "dn_mu_minus", "jump"],
        &rows,
    )?;
    let jump_max = mu.jump().max_abs();
    write_json(
        &out.join("elliptic.json"),
        &json!({
            "version": VERSION,
            "K": k,
            "backend": format!("{:?}", s.backend).to_lowercase(),
            "jump_max_coefficient": json_num(jump_max),
            "jump_h_half": json_num(mu.jump().h_norm(0.5)),
        }),
    )?;
    Ok(format!("max |[dn mu]| coefficient {jump_max:.6e}"))
}

/// Traction a₃h₀ + a₄Δ_Γh₀ + a₅∇_Γh₀ plus the fixed traction datum.
pub fn solve_stokes(s: &Scenario, out: &Path) -> Result<String, CliError> {
    let k = s.k;
    let g = s.geometry()?;
    let bc = s.boundary_config();
    let coeffs = s.coefficients();
    let traction = traction_of(&s.h0(), &coeffs, &g, 0.0).add(&s.data.traction.field(k));
    let data = StokesData {
        traction,
        jump: s.data.velocity_jump.field(k),
        outer: s.data.velocity_outer.field(k),
        ..StokesData::zeros(k)
    };
    let flux = check_compatibility(&data.jump, &data.outer, &g, &bc, 0.0);
    let sol = solve_two_phase_stokes(&data, &bc, &g, 0.0, s.backend())?;
    let tr = sol.traces();
    let n = output_nodes(k);
    let cols = [
        re(&tr.v_plus.x, n),
        re(&tr.v_plus.y, n),
        re(&tr.p_plus, n),
        re(&tr.v_minus.x, n),
        re(&tr.v_minus.y, n),
        re(&tr.p_minus, n),
        re(&sol.mean_normal_velocity(&g), n),
    ];
    let rows: Vec<Vec<f64>> = nodes(n)
        .iter()
        .enumerate()
        .map(|(j, &t)| std::iter::once(t).chain(cols.iter().map(|c| c[j])).collect())
        .collect();
    write_csv(
        &out.join("stokes.csv"),
        &provenance("solve-stokes", s),
        &["theta", "vx_plus", "vy_plus", "p_plus", "vx_minus", "vy_minus", "p_minus", "mean_normal_velocity"],
        &rows,
    )?;
    let energy = match energy_identity_residual(&sol, &data, &bc, &g) {
        Ok(r) => json_num(r),
        Err(Error::Unsupported(_)) => serde_json::Value::Null,
        Err(e) => return Err(e.into()),
    };
    let speed = tr.v_plus.x.max_abs().max(tr.v_plus.y.max_abs()).max(tr.v_minus.x.max_abs()).max(tr.v_minus.y.max_abs());
    write_json(
        &out.join("stokes.json"),
        &json!({
            "version": VERSION,
            "K": k,
            "backend": format!("{:?}", s.backend).to_lowercase(),
            "boundary": format!("{:?}", bc.v_outer),
            "flux_residual": json_num(flux),
            "max_velocity_coefficient": json_num(speed),
            "energy_identity_residual": energy,
        }),
    )?;
    Ok(format!("max velocity coefficient {speed:.6e}"))
}

/// Closed-form symbols on concentric circles; B₁ uses the mean of b₂.
pub fn spectrum(s: &Scenario, out: &Path) -> Result<String, CliError> {
    let g = s.geometry()?;
    let r0 = g.circle_radius(0.0).ok_or(Error::NonCircularGeometry { t: 0.0 })?;
    let big_r = g.outer_radius();
    let outer = s.boundary_config().mu_outer;
    let b2 = s.coefficients.b2.field(s.k).mode(0).re;
    let rows: Vec<Vec<f64>> = (0..=s.k as i64)
        .map(|k| {
            let a0 = ms_symbol(k, r0, big_r, s.sigma, MuOuter::Neumann);
            let b0 = b0_symbol(k, r0, big_r, s.sigma);
            let b1 = b1_symbol(k, r0, big_r, b2, outer);
            let total = ms_symbol(k, r0, big_r, s.sigma, outer);
            vec![k as f64, a0, b0, b1, total]
        })
        .collect();
    write_csv(
        &out.join("spectrum.csv"),
        &provenance("spectrum", s),
        &["k", "a0", "b0", "b1", "ms_symbol"],
        &rows,
    )?;
    Ok(format!("{} modes", rows.len()))
}

pub fn run_evolve(s: &Scenario, out: &Path) -> Result<String, CliError> {
    let p = s.evolution_problem()?;
    let (traj, diag) = evolve(&p)?;
    let n = output_nodes(s.k);
    let theta = nodes(n);
    let mut rows = Vec::with_capacity(traj.fields().len() * n);
    for (&t, h) in traj.times().iter().zip(traj.fields()) {
        for (th, v) in theta.iter().zip(h.real_samples(n)) {
            rows.push(vec![t, *th, v]);
        }
    }
    let comment = provenance("evolve", s);
    write_csv(&out.join("trajectory.csv"), &comment, &["t", "theta", "h"], &rows)?;
    let norms: Vec<Vec<f64>> = diag.norms.iter().map(|r| r.to_vec()).collect();
    write_csv(&out.join("norms.csv"), &comment, &["t", "h_half", "h_two", "h_seven_half"], &norms)?;
    write_json(
        &out.join("diagnostics.json"),
        &json!({
            "version": VERSION,
            "K": s.k,
            "dt": json_num(s.dt),
            "t_end": json_num(s.t_end),
            "steps": traj.fields().len() - 1,
            "xt_norm": json_num(diag.xt_norm),
            "mu_estimate_ratio": json_num(diag.mu_estimate_ratio),
            "max_step_residual": json_num(diag.max_step_residual),
            "max_growth": json_num(diag.max_growth),
        }),
    )?;
    info!("evolved {} steps", traj.fields().len() - 1);
    Ok(format!("xt_norm {:.6e}", diag.xt_norm))
}

/// Runs the acceptance criteria on the scenario's circles (r₀, R, σ).
pub fn verify(s: Option<&Scenario>, quick: bool, out: &Path) -> Result<String, CliError> {
    let mut cfg = VerifyConfig { level: if quick { Level::Quick } else { Level::Full }, ..Default::default() };
    if let Some(s) = s {
        if !s.geometry.perturbation.is_zero() {
            return Err(CliError::Validation("verify needs a circular interface".into()));
        }
        cfg.r0 = s.geometry.r0;
        cfg.outer_radius = s.geometry.outer_radius;
        cfg.sigma = s.sigma;
    }
    let mut checks = Vec::new();
    for id in 1..=criterion_count() {
        let c = run_check(id, &cfg);
        println!("{}", c.line());
        checks.push(c);
    }
    let failed: Vec<usize> = checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    let report = json!({
        "version": VERSION,
        "level": if quick { "quick" } else { "full" },
        "r0": json_num(cfg.r0),
        "outer_radius": json_num(cfg.outer_radius),
        "sigma": json_num(cfg.sigma),
        "all_passed": failed.is_empty(),
        "criteria": checks.iter().map(|c| json!({
            "id": c.id,
            "name": c.name,
            "passed": c.passed,
            "value": json_num(c.value),
            "tolerance": json_num(c.tolerance),
            "seconds": json_num(c.seconds),
            "budget_seconds": c.budget.map(json_num),
            "detail": c.detail,
        })).collect::<Vec<_>>(),
    });
    write_json(&out.join("verify.json"), &report)?;
    if failed.is_empty() {
        Ok(format!("all {} criteria passed", checks.len()))
    } else {
        Err(CliError::VerifyFailed(failed))
    }
}
