//! Per-mode radial finite elements on the disk Ω = B_R(0) for the Korn constant
//! and the discrete inf-sup constant of the divergence.
//!
//! A velocity in mode k is (u_r(r), u_θ(r)) e^{ikθ}; writing u_θ = i·w(r) makes
//! every form real. Velocities are continuous P2 in r, pressures continuous P1.
//! Modes k and −k give the same numbers, so only k ≥ 0 is assembled.

use nalgebra::DMatrix;

use crate::bc::{BoundaryConfig, VelocityOuter};
use crate::error::{Error, Result};
use crate::geometry::InterfaceGeometry;
use crate::linalg::{gauss_legendre, generalized_eigenvalues};

/// Highest angular mode included at a given radial resolution.
fn max_mode(resolution: usize) -> usize {
    (resolution / 4).clamp(2, 16)
}

type QuadPoint = (f64, f64, [f64; 3], [f64; 3], [f64; 2]);

struct Mesh {
    n: usize,
    h: f64,
    qx: Vec<f64>,
    qw: Vec<f64>,
}

impl Mesh {
    fn new(n: usize, big_r: f64) -> Self {
        let (qx, qw) = gauss_legendre(5, 0.0, 1.0);
        Self {
            n,
            h: big_r / n as f64,
            qx,
            qw,
        }
    }

    fn nv(&self) -> usize {
        2 * self.n + 1
    }

    /// Quadrature points of element e: (r, weight·r, P2 values, P2 derivatives, P1 values).
    fn points(&self, e: usize) -> Vec<QuadPoint> {
        let h = self.h;
        self.qx
            .iter()
            .zip(&self.qw)
            .map(|(&x, &w)| {
                let r = (e as f64 + x) * h;
                let phi = [2.0 * (x - 0.5) * (x - 1.0), 4.0 * x * (1.0 - x), 2.0 * x * (x - 0.5)];
                let dphi = [(4.0 * x - 3.0) / h, (4.0 - 8.0 * x) / h, (4.0 * x - 1.0) / h];
                (r, w * h * r, phi, dphi, [1.0 - x, x])
            })
            .collect()
    }
}

/// Velocity forms of mode k: (H¹ Gram, ∫|D_s v|² r dr) on dofs [u_r | w].
fn velocity_forms(mesh: &Mesh, k: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let nv = mesh.nv();
    let mut h1 = DMatrix::zeros(2 * nv, 2 * nv);
    let mut dd = DMatrix::zeros(2 * nv, 2 * nv);
    for e in 0..mesh.n {
        for (r, wr, phi, dphi, _) in mesh.points(e) {
            // each local function contributes linear terms to the densities
            // rows: u_r', w', (k u_r − w)/r, (u_r − k w)/r, u_r, w, (w' − w/r + k u_r/r)
            let mut terms: Vec<(usize, [f64; 7])> = Vec::with_capacity(6);
            for a in 0..3 {
                let i = 2 * e + a;
                terms.push((i, [dphi[a], 0.0, k * phi[a] / r, phi[a] / r, phi[a], 0.0, k * phi[a] / r]));
                terms.push((nv + i, [0.0, dphi[a], -phi[a] / r, -k * phi[a] / r, 0.0, phi[a], dphi[a] - phi[a] / r]));
            }
            for (i, ti) in &terms {
                for (j, tj) in &terms {
                    let h = (0..6).map(|c| ti[c] * tj[c]).sum::<f64>();
                    let d = ti[0] * tj[0] + ti[3] * tj[3] + 0.5 * ti[6] * tj[6];
                    h1[(*i, *j)] += wr * h;
                    dd[(*i, *j)] += wr * d;
                }
            }
        }
    }
    (h1, dd)
}

/// Map from reduced to full velocity dofs: pole conditions at r = 0 and the
/// essential outer conditions of the active B_j.
fn velocity_constraints(nv: usize, k: usize, bc: VelocityOuter) -> DMatrix<f64> {
    let last = nv - 1;
    let (ur_r, w_r) = match bc {
        VelocityOuter::Dirichlet => (true, true),
        VelocityOuter::NavierSlip { .. } => (true, false),
        VelocityOuter::Robin { .. } => (false, false),
    };
    let mut fixed = vec![false; 2 * nv];
    fixed[last] = ur_r;
    fixed[nv + last] = w_r;
    // pole: u_r(0) = w(0) = 0 unless k = 1, where u_r(0) = w(0)
    let tie = k == 1;
    if !tie {
        fixed[0] = true;
        fixed[nv] = true;
    }
    let free: Vec<usize> = (0..2 * nv).filter(|&i| !fixed[i] && !(tie && i == nv)).collect();
    let mut p = DMatrix::zeros(2 * nv, free.len());
    for (c, &i) in free.iter().enumerate() {
        p[(i, c)] = 1.0;
        if tie && i == 0 {
            p[(nv, c)] = 1.0;
        }
    }
    p
}

fn boundary_form(nv: usize, big_r: f64, bc: VelocityOuter) -> DMatrix<f64> {
    let last = nv - 1;
    let mut b = DMatrix::zeros(2 * nv, 2 * nv);
    match bc {
        VelocityOuter::Dirichlet => {}
        VelocityOuter::NavierSlip { alpha } => b[(nv + last, nv + last)] = alpha * big_r,
        VelocityOuter::Robin { alpha } => {
            b[(last, last)] = alpha * big_r;
            b[(nv + last, nv + last)] = alpha * big_r;
        }
    }
    b
}

/// Korn constant C with ‖v‖²_{H¹} ≤ C²(‖D_s v‖² + α₂‖v_τ‖²_{∂Ω} + α₃‖v‖²_{∂Ω}) on
/// the discrete space: C = λ_min^{−1/2} of the generalized eigenproblem of the
/// right-hand form against the H¹ form.
pub fn korn_constant(bc: &BoundaryConfig, geometry: &InterfaceGeometry, resolution: usize) -> Result<f64> {
    bc.validate()?;
    if resolution < 2 {
        return Err(Error::InvalidConfig("resolution must be at least 2".into()));
    }
    let big_r = geometry.outer_radius();
    let mesh = Mesh::new(resolution, big_r);
    let nv = mesh.nv();
    let mut lambda = f64::INFINITY;
    for k in 0..=max_mode(resolution) {
        let (h1, dd) = velocity_forms(&mesh, k as f64);
        let rhs = dd + boundary_form(nv, big_r, bc.v_outer);
        let p = velocity_constraints(nv, k, bc.v_outer);
        let a = p.transpose() * rhs * &p;
        let m = p.transpose() * h1 * &p;
        let ev = generalized_eigenvalues(&a, &m)?;
        lambda = lambda.min(ev[0]);
    }
    if lambda < 1e-9 {
        return Err(Error::SingularForm { lambda });
    }
    Ok(lambda.powf(-0.5))
}

/// Smallest singular value of the discrete divergence from the velocity space
/// (H¹ norm, essential conditions of the active B_j) to the pressure space (L²,
/// mean zero when Γ₃ᵛ = ∅).
pub fn discrete_infsup(bc: &BoundaryConfig, geometry: &InterfaceGeometry, resolution: usize) -> Result<f64> {
    bc.validate()?;
    if resolution < 2 {
        return Err(Error::InvalidConfig("resolution must be at least 2".into()));
    }
    let big_r = geometry.outer_radius();
    let mesh = Mesh::new(resolution, big_r);
    let nv = mesh.nv();
    let np = resolution + 1;
    let mut beta2 = f64::INFINITY;
    for k in 0..=max_mode(resolution) {
        let kf = k as f64;
        let (h1, _) = velocity_forms(&mesh, kf);
        let mut b = DMatrix::zeros(np, 2 * nv);
        let mut mp = DMatrix::zeros(np, np);
        for e in 0..mesh.n {
            for (r, wr, phi, dphi, psi) in mesh.points(e) {
                for (a, &q) in psi.iter().enumerate() {
                    let pi = e + a;
                    for c in 0..3 {
                        let i = 2 * e + c;
                        // div v = u_r' + u_r/r − k w/r
                        b[(pi, i)] += wr * q * (dphi[c] + phi[c] / r);
                        b[(pi, nv + i)] += wr * q * (-kf * phi[c] / r);
                    }
                    for (c, &q2) in psi.iter().enumerate() {
                        mp[(pi, e + c)] += wr * q * q2;
                    }
                }
            }
        }
        let pv = velocity_constraints(nv, k, bc.v_outer);
        let hr = pv.transpose() * h1 * &pv;
        let br = &b * &pv;
        let pp = pressure_constraints(np, k, bc.gamma3_empty(), &mp);
        let bq = pp.transpose() * br;
        let mq = pp.transpose() * mp * &pp;
        let chol = hr
            .cholesky()
            .ok_or_else(|| Error::SingularSystem("velocity Gram matrix".into()))?;
        let x = chol.solve(&bq.transpose());
        let s = &bq * x;
        let s = (&s + s.transpose()) * 0.5;
        let ev = generalized_eigenvalues(&s, &mq)?;
        beta2 = beta2.min(ev[0]);
    }
    Ok(beta2.max(0.0).sqrt())
}

/// Pressure space: q(0) = 0 for k ≥ 1 (smooth modes vanish at the pole) and,
/// for k = 0 with Γ₃ᵛ = ∅, the mean-zero constraint ∫ q r dr = 0.
fn pressure_constraints(np: usize, k: usize, mean_zero: bool, mp: &DMatrix<f64>) -> DMatrix<f64> {
    if k >= 1 {
        let mut p = DMatrix::zeros(np, np - 1);
        for c in 0..np - 1 {
            p[(c + 1, c)] = 1.0;
        }
        return p;
    }
    if !mean_zero {
        return DMatrix::identity(np, np);
    }
    // eliminate the last dof through Σ_j c_j q_j = 0 with c = M·1
    let c: Vec<f64> = (0..np).map(|i| mp.row(i).sum()).collect();
    let mut p = DMatrix::zeros(np, np - 1);
    for j in 0..np - 1 {
        p[(j, j)] = 1.0;
        p[(np - 1, j)] = -c[j] / c[np - 1];
    }
    p
}
