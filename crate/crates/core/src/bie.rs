//! Nyström discretization of layer potentials on smooth closed curves: periodic
//! trapezoid rule with Kress's product quadrature for the logarithmic part.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::geometry::CurveSnapshot;

/// Boundary nodes with an orientation chosen by the caller (`nu` is the outward
/// normal of the domain the curve bounds).
#[derive(Clone, Debug)]
pub struct Curve {
    pub x: Vec<[f64; 2]>,
    pub dx: Vec<[f64; 2]>,
    pub ddx: Vec<[f64; 2]>,
    pub speed: Vec<f64>,
    pub nu: Vec<[f64; 2]>,
    /// Quadrature weights |x'|·2π/N.
    pub w: Vec<f64>,
}

impl Curve {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Interface nodes; `outward_plus` selects ν = −n (boundary of Ω⁺) instead of ν = n.
    pub fn interface(snap: &CurveSnapshot, outward_plus: bool) -> Self {
        let sgn = if outward_plus { -1.0 } else { 1.0 };
        let h = 2.0 * PI / snap.n as f64;
        Self {
            x: snap.x.clone(),
            dx: snap.dx.clone(),
            ddx: snap.ddx.clone(),
            speed: snap.speed.clone(),
            nu: snap.normal.iter().map(|n| [sgn * n[0], sgn * n[1]]).collect(),
            w: snap.speed.iter().map(|s| s * h).collect(),
        }
    }

    /// Circle |x| = radius with outward radial normal.
    pub fn circle(radius: f64, n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        let mut c = Self {
            x: Vec::with_capacity(n),
            dx: Vec::with_capacity(n),
            ddx: Vec::with_capacity(n),
            speed: vec![radius; n],
            nu: Vec::with_capacity(n),
            w: vec![radius * h; n],
        };
        for j in 0..n {
            let t = j as f64 * h;
            let (s, co) = t.sin_cos();
            c.x.push([radius * co, radius * s]);
            c.dx.push([-radius * s, radius * co]);
            c.ddx.push([-radius * co, -radius * s]);
            c.nu.push([co, s]);
        }
        c
    }

    /// Unit tangent consistent with the parametrization.
    pub fn tangent(&self, j: usize) -> [f64; 2] {
        [self.dx[j][0] / self.speed[j], self.dx[j][1] / self.speed[j]]
    }

    /// Signed curvature term x''·ν/|x'|² used by the double-layer diagonal.
    pub fn bend(&self, j: usize) -> f64 {
        (self.ddx[j][0] * self.nu[j][0] + self.ddx[j][1] * self.nu[j][1]) / self.speed[j].powi(2)
    }
}

/// Kress weights R_j(t_i) for ∫₀^{2π} log(4 sin²((t−τ)/2)) φ(τ) dτ on N = 2n nodes.
pub fn kress_weights(n_nodes: usize) -> DMatrix<f64> {
    let n = n_nodes / 2;
    let h = 2.0 * PI / n_nodes as f64;
    // depends only on i − j
    let row: Vec<f64> = (0..n_nodes)
        .map(|d| {
            let t = d as f64 * h;
            let mut s = 0.0;
            for m in 1..n {
                s += (m as f64 * t).cos() / m as f64;
            }
            -4.0 * PI / n_nodes as f64 * s - 4.0 * PI / (n_nodes * n_nodes) as f64 * (n as f64 * t).cos()
        })
        .collect();
    DMatrix::from_fn(n_nodes, n_nodes, |i, j| row[(i + n_nodes - j) % n_nodes])
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Laplace single layer S q(x_i) = ∫ −(1/2π) log|x_i − y| q(y) ds_y.
/// `kress` must be supplied when target and source are the same curve.
pub fn laplace_slp(target: &[[f64; 2]], src: &Curve, kress: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let n = src.len();
    let h = 2.0 * PI / n as f64;
    DMatrix::from_fn(target.len(), n, |i, j| match kress {
        None => {
            let d = sub(target[i], src.x[j]);
            -(dot(d, d).ln()) / (4.0 * PI) * src.w[j]
        }
        Some(r) => {
            let tdiff = (i as f64 - j as f64) * h;
            let l2 = if i == j {
                -(src.speed[j].powi(2)).ln() / (4.0 * PI)
            } else {
                let d = sub(src.x[i], src.x[j]);
                let s2 = 4.0 * (0.5 * tdiff).sin().powi(2);
                -(dot(d, d) / s2).ln() / (4.0 * PI)
            };
            -r[(i, j)] / (4.0 * PI) * src.speed[j] + h * l2 * src.speed[j]
        }
    })
}

/// Laplace double layer D u(x_i) = ∫ ∂_{ν_y}(−(1/2π) log|x_i − y|) u(y) ds_y; on-curve
/// diagonal uses the smooth limit.
pub fn laplace_dlp(target: &[[f64; 2]], src: &Curve, same: bool) -> DMatrix<f64> {
    DMatrix::from_fn(target.len(), src.len(), |i, j| {
        if same && i == j {
            return src.bend(j) / (4.0 * PI) * src.w[j];
        }
        let d = sub(src.x[j], target[i]);
        -dot(d, src.nu[j]) / (2.0 * PI * dot(d, d)) * src.w[j]
    })
}

/// Gradient in x of the single-layer kernel −(1/2π) log|x − y| times weight.
pub fn laplace_slp_grad(x: [f64; 2], src: &Curve, j: usize) -> [f64; 2] {
    let d = sub(x, src.x[j]);
    let r2 = dot(d, d);
    let c = -src.w[j] / (2.0 * PI * r2);
    [c * d[0], c * d[1]]
}

/// Value and x-gradient of the double-layer kernel ∂_{ν_y}G(x,y) times weight.
pub fn laplace_dlp_kernel(x: [f64; 2], src: &Curve, j: usize) -> (f64, [f64; 2]) {
    // ∂_ν_y G = −(1/2π) (y−x)·ν/|y−x|² = (1/2π) d·ν/|d|² with d = x − y
    let d = sub(x, src.x[j]);
    let r2 = dot(d, d);
    let nu = src.nu[j];
    let dn = dot(d, nu);
    let c = src.w[j] / (2.0 * PI);
    let v = c * dn / r2;
    let g = [
        c * (nu[0] / r2 - 2.0 * dn * d[0] / (r2 * r2)),
        c * (nu[1] / r2 - 2.0 * dn * d[1] / (r2 * r2)),
    ];
    (v, g)
}

/// Stokes single-layer block (stokeslet G = (1/4π)(−log r I + r̂⊗r̂)), 2N×2M with
/// unknown layout [x-components | y-components].
pub fn stokes_slp(target: &Curve, src: &Curve, same: bool, kress: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let (m, n) = (target.len(), src.len());
    let h = 2.0 * PI / n as f64;
    let mut a = DMatrix::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let w = src.w[j];
            let (lg, rr) = if same && i == j {
                let t = src.tangent(j);
                // smooth remainder of −log r at coincidence: −log|x'|
                (-(src.speed[j]).ln(), [[t[0] * t[0], t[0] * t[1]], [t[1] * t[0], t[1] * t[1]]])
            } else {
                let d = sub(target.x[i], src.x[j]);
                let r2 = dot(d, d);
                let lg = if same {
                    let tdiff = (i as f64 - j as f64) * h;
                    -0.5 * (r2 / (4.0 * (0.5 * tdiff).sin().powi(2))).ln()
                } else {
                    -0.5 * r2.ln()
                };
                (lg, [[d[0] * d[0] / r2, d[0] * d[1] / r2], [d[1] * d[0] / r2, d[1] * d[1] / r2]])
            };
            for p in 0..2 {
                for q in 0..2 {
                    let delta = if p == q { 1.0 } else { 0.0 };
                    let mut v = (delta * lg + rr[p][q]) * w / (4.0 * PI);
                    if same && p == q {
                        if let Some(r) = kress {
                            // −log r = −½ log(4 sin²) + smooth; the log part by Kress weights
                            v += -0.5 * r[(i, j)] * src.speed[j] / (4.0 * PI);
                        }
                    }
                    a[(p * m + i, q * n + j)] = v;
                }
            }
        }
    }
    a
}

/// Stokes double-layer block: (D φ)_i(x) = ∫ (1/π) r_i r_j r_k ν_k / |r|⁴ φ_j ds_y with
/// r = y − x, ν outward from the domain on the source curve.
pub fn stokes_dlp(target: &Curve, src: &Curve, same: bool) -> DMatrix<f64> {
    let (m, n) = (target.len(), src.len());
    let mut a = DMatrix::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let w = src.w[j];
            let k = if same && i == j {
                let t = src.tangent(j);
                let c = -src.bend(j) / (2.0 * PI);
                [[c * t[0] * t[0], c * t[0] * t[1]], [c * t[1] * t[0], c * t[1] * t[1]]]
            } else {
                let d = sub(src.x[j], target.x[i]);
                let r2 = dot(d, d);
                let c = dot(d, src.nu[j]) / (PI * r2 * r2);
                [[c * d[0] * d[0], c * d[0] * d[1]], [c * d[1] * d[0], c * d[1] * d[1]]]
            };
            for p in 0..2 {
                for q in 0..2 {
                    a[(p * m + i, q * n + j)] = k[p][q] * w;
                }
            }
        }
    }
    a
}

/// Stokeslet velocity kernel at an off-curve point: returns the 2×2 block times weight.
pub fn stokeslet(x: [f64; 2], src: &Curve, j: usize) -> [[f64; 2]; 2] {
    let d = sub(x, src.x[j]);
    let r2 = dot(d, d);
    let lg = -0.5 * r2.ln();
    let c = src.w[j] / (4.0 * PI);
    [
        [c * (lg + d[0] * d[0] / r2), c * d[0] * d[1] / r2],
        [c * d[1] * d[0] / r2, c * (lg + d[1] * d[1] / r2)],
    ]
}

/// Stresslet (double-layer) velocity kernel at an off-curve point.
pub fn stresslet(x: [f64; 2], src: &Curve, j: usize) -> [[f64; 2]; 2] {
    let d = sub(src.x[j], x);
    let r2 = dot(d, d);
    let c = dot(d, src.nu[j]) / (PI * r2 * r2) * src.w[j];
    [
        [c * d[0] * d[0], c * d[0] * d[1]],
        [c * d[1] * d[0], c * d[1] * d[1]],
    ]
}

/// Pressure of the Stokeslet layer: p(x) = Σ_j c_j·t_j with the returned c_j.
pub fn stokeslet_pressure(x: [f64; 2], src: &Curve, j: usize) -> [f64; 2] {
    let d = sub(x, src.x[j]);
    let c = src.w[j] / (2.0 * PI * dot(d, d));
    [c * d[0], c * d[1]]
}

/// Pressure of the stresslet layer: p(x) = Σ_j c_j·φ_j with the returned c_j.
pub fn stresslet_pressure(x: [f64; 2], src: &Curve, j: usize) -> [f64; 2] {
    let d = sub(src.x[j], x);
    let r2 = dot(d, d);
    let nu = src.nu[j];
    let dn = dot(d, nu);
    let w = src.w[j] / PI;
    [
        w * (nu[0] / r2 - 2.0 * d[0] * dn / (r2 * r2)),
        w * (nu[1] / r2 - 2.0 * d[1] * dn / (r2 * r2)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_layer_of_constant_on_circle() {
        // S1 on a circle of radius a equals −a log a at every node
        let a = 1.7;
        let c = Curve::circle(a, 64);
        let k = kress_weights(64);
        let s = laplace_slp(&c.x, &c, Some(&k));
        for i in 0..64 {
            let v: f64 = s.row(i).iter().sum();
            assert!((v + a * a.ln()).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn double_layer_of_constant_is_minus_half() {
        let c = Curve::circle(1.3, 48);
        let d = laplace_dlp(&c.x, &c, true);
        for i in 0..48 {
            let v: f64 = d.row(i).iter().sum();
            assert!((v + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn stokes_double_layer_of_constant() {
        // interior limit is c, exterior 0, the curve itself ½c
        let c = Curve::circle(0.8, 64);
        let d = stokes_dlp(&c, &c, true);
        let v: Vec<f64> = (0..128).map(|i| if i < 64 { 1.0 } else { 0.0 }).collect();
        let out = &d * nalgebra::DVector::from_vec(v);
        for i in 0..64 {
            assert!((out[i] - 0.5).abs() < 1e-12, "{}", out[i]);
            assert!(out[64 + i].abs() < 1e-12);
        }
    }

    #[test]
    fn layer_pressures_balance_velocities() {
        // −Δu + ∇p = 0 for both layers, by central differences at an off-curve point
        let c = Curve::circle(1.0, 40);
        let dens = |j: usize| [(0.3 * j as f64).sin(), (0.7 * j as f64).cos()];
        for single in [true, false] {
            let eval = |x: [f64; 2]| {
                let (mut u, mut p) = ([0.0; 2], 0.0);
                for j in 0..c.len() {
                    let f = dens(j);
                    let (k, q) = if single {
                        (stokeslet(x, &c, j), stokeslet_pressure(x, &c, j))
                    } else {
                        (stresslet(x, &c, j), stresslet_pressure(x, &c, j))
                    };
                    for a in 0..2 {
                        u[a] += k[a][0] * f[0] + k[a][1] * f[1];
                    }
                    p += q[0] * f[0] + q[1] * f[1];
                }
                (u, p)
            };
            let x0 = [1.6, 0.4];
            let h = 1e-3;
            let (u0, _) = eval(x0);
            let at = |dx: f64, dy: f64| eval([x0[0] + dx, x0[1] + dy]);
            let (xp, xm, yp, ym) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
            let grad = [(xp.1 - xm.1) / (2.0 * h), (yp.1 - ym.1) / (2.0 * h)];
            for a in 0..2 {
                let lap = (xp.0[a] + xm.0[a] + yp.0[a] + ym.0[a] - 4.0 * u0[a]) / (h * h);
                assert!((grad[a] - lap).abs() < 1e-5 * (1.0 + lap.abs()), "single={single} {a}: {} vs {}", grad[a], lap);
            }
        }
    }
}
