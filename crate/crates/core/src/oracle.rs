//! Independent reference solvers: per-mode radial finite differences on concentric
//! circles with Richardson extrapolation, an arclength finite-difference
//! Laplace–Beltrami operator, and extended-precision norm summation.
//!
//! Nothing here shares code with the spectral or boundary-integral backends apart
//! from the banded linear solver.

use crate::bc::{MuOuter, VelocityOuter};
use crate::error::{Error, Result};
use crate::field::{PeriodicField, C64};
use crate::geometry::InterfaceGeometry;
use crate::linalg::{gauss_legendre, Banded};

const I: C64 = C64::new(0.0, 1.0);

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Operator kind of a radial two-point problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialKind {
    Laplace,
    Biharmonic,
}

/// Description of a per-mode radial problem on [0, r₀] ∪ [r₀, R].
#[derive(Clone, Copy, Debug)]
pub struct RadialBVP {
    pub k: i64,
    pub r0: f64,
    pub outer: f64,
    pub kind: RadialKind,
    /// Intervals per phase on the coarsest level.
    pub m: usize,
    /// Number of grid doublings (levels = refinements + 1).
    pub refinements: usize,
    /// Required agreement of the two highest-order extrapolants, relative to max(1, |value|).
    pub tolerance: f64,
}

impl RadialBVP {
    pub fn new(k: i64, r0: f64, outer: f64, kind: RadialKind) -> Self {
        Self {
            k,
            r0,
            outer,
            kind,
            m: 1000,
            refinements: 3,
            tolerance: 1e-8,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0 < self.outer) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < r0 < R, got r0 = {}, R = {}",
                self.r0, self.outer
            )));
        }
        if self.m < 1000 {
            return Err(Error::InvalidConfig("oracle grids need at least 1000 intervals".into()));
        }
        Ok(())
    }

    /// Run `solve(M)` on each level and Richardson-extrapolate every output component.
    fn extrapolate<const N: usize>(
        &self,
        solve: impl Fn(usize) -> Result<[C64; N]>,
    ) -> Result<[C64; N]> {
        let levels = self.refinements + 1;
        let mut table: Vec<Vec<[C64; N]>> = Vec::with_capacity(levels);
        for l in 0..levels {
            let mut row = vec![solve(self.m << l)?];
            for j in 1..=l {
                // one-sided boundary stencils bring odd powers: h², h³, h⁴, ...
                let f = 2f64.powi(j as i32 + 1);
                let prev = &table[l - 1][j - 1];
                let cur = row[j - 1];
                let mut next = [C64::new(0.0, 0.0); N];
                for q in 0..N {
                    next[q] = cur[q] + (cur[q] - prev[q]) / (f - 1.0);
                }
                row.push(next);
            }
            table.push(row);
        }
        let best = table[levels - 1][levels - 1];
        if levels > 1 {
            let other = table[levels - 2][levels - 2];
            let diff = (0..N)
                .map(|q| (best[q] - other[q]).norm() / best[q].norm().max(1.0))
                .fold(0.0, f64::max);
            if diff > self.tolerance {
                return Err(Error::ExtrapolationDisagreement {
                    difference: diff,
                    tolerance: self.tolerance,
                });
            }
        }
        Ok(best)
    }
}

/// Per-mode reference for the two-phase Laplace problem with Dirichlet data on r = r₀.
#[derive(Clone, Debug)]
pub struct LaplaceModeResult {
    /// ∂_rμ⁺ and ∂_rμ⁻ at r₀.
    pub dr_plus: C64,
    pub dr_minus: C64,
    /// [∂_nμ] = n·∇μ⁺ − n·∇μ⁻ with n = −e_r.
    pub jump: C64,
    /// μ⁻ at r = R.
    pub outer_value: C64,
    /// Profiles from the finest grid: (r, μ) on [0,r₀] and [r₀,R].
    pub profile_plus: Vec<(f64, C64)>,
    pub profile_minus: Vec<(f64, C64)>,
}

/// Solve Δμ^± = 0 for the mode e^{ikθ} with μ^±(r₀) = f^± and a homogeneous outer condition.
pub fn oracle_laplace_mode(
    k: i64,
    r0: f64,
    outer: f64,
    bc_outer: MuOuter,
    dirichlet_values: (C64, C64),
) -> Result<LaplaceModeResult> {
    let bvp = RadialBVP::new(k, r0, outer, RadialKind::Laplace);
    oracle_laplace(&bvp, bc_outer, dirichlet_values)
}

pub fn oracle_laplace(
    bvp: &RadialBVP,
    bc_outer: MuOuter,
    (fp, fm): (C64, C64),
) -> Result<LaplaceModeResult> {
    bvp.validate()?;
    let k2 = (bvp.k * bvp.k) as f64;
    let (r0, big_r) = (bvp.r0, bvp.outer);
    let solve_plus = |m: usize| -> Result<Vec<C64>> {
        let h = r0 / m as f64;
        let mut a = Banded::new(m + 1, 2, 2);
        let mut b = vec![C64::new(0.0, 0.0); m + 1];
        if bvp.k == 0 {
            // symmetric ghost node: u_1 = u_0 to second order
            a.add_re(0, 0, -1.0);
            a.add_re(0, 1, 1.0);
        } else {
            a.add_re(0, 0, 1.0);
        }
        for i in 1..m {
            let r = i as f64 * h;
            a.add_re(i, i - 1, 1.0 / (h * h) - 1.0 / (2.0 * h * r));
            a.add_re(i, i, -2.0 / (h * h) - k2 / (r * r));
            a.add_re(i, i + 1, 1.0 / (h * h) + 1.0 / (2.0 * h * r));
        }
        a.add_re(m, m, 1.0);
        b[m] = fp;
        a.solve(b)
    };
    let solve_minus = |m: usize| -> Result<Vec<C64>> {
        let h = (big_r - r0) / m as f64;
        let mut a = Banded::new(m + 1, 2, 2);
        let mut b = vec![C64::new(0.0, 0.0); m + 1];
        a.add_re(0, 0, 1.0);
        b[0] = fm;
        for i in 1..m {
            let r = r0 + i as f64 * h;
            a.add_re(i, i - 1, 1.0 / (h * h) - 1.0 / (2.0 * h * r));
            a.add_re(i, i, -2.0 / (h * h) - k2 / (r * r));
            a.add_re(i, i + 1, 1.0 / (h * h) + 1.0 / (2.0 * h * r));
        }
        match bc_outer {
            MuOuter::Dirichlet => a.add_re(m, m, 1.0),
            MuOuter::Neumann => {
                a.add_re(m, m, 3.0 / (2.0 * h));
                a.add_re(m, m - 1, -4.0 / (2.0 * h));
                a.add_re(m, m - 2, 1.0 / (2.0 * h));
            }
        }
        a.solve(b)
    };
    let outputs = |m: usize| -> Result<[C64; 3]> {
        let up = solve_plus(m)?;
        let um = solve_minus(m)?;
        let hp = r0 / m as f64;
        let hm = (big_r - r0) / m as f64;
        let dp = (up[m] * 3.0 - up[m - 1] * 4.0 + up[m - 2]) / (2.0 * hp);
        let dm = (um[0] * -3.0 + um[1] * 4.0 - um[2]) / (2.0 * hm);
        Ok([dp, dm, um[m]])
    };
    let [dr_plus, dr_minus, outer_value] = bvp.extrapolate(outputs)?;
    let finest = bvp.m << bvp.refinements;
    let up = solve_plus(finest)?;
    let um = solve_minus(finest)?;
    let hp = r0 / finest as f64;
    let hm = (big_r - r0) / finest as f64;
    Ok(LaplaceModeResult {
        dr_plus,
        dr_minus,
        jump: -dr_plus + dr_minus,
        outer_value,
        profile_plus: up.iter().enumerate().map(|(i, &u)| (i as f64 * hp, u)).collect(),
        profile_minus: um
            .iter()
            .enumerate()
            .map(|(i, &u)| (r0 + i as f64 * hm, u))
            .collect(),
    })
}

/// Per-mode jump and outer data for the two-phase Stokes problem on circles, in
/// polar components: [u_r] = s_r, [u_θ] = s_θ, −[σ_rr] = a_r, −[σ_rθ] = a_θ
/// (the traction jump [σ]n with n = −e_r), and outer data (g_r, g_θ).
#[derive(Clone, Copy, Debug, Default)]
pub struct StokesModeData {
    pub s_r: C64,
    pub s_t: C64,
    pub a_r: C64,
    pub a_t: C64,
    pub g_r: C64,
    pub g_t: C64,
}

/// Interface traces of the per-mode Stokes solution at r = r₀.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StokesModeTraces {
    pub ur_plus: C64,
    pub ut_plus: C64,
    pub p_plus: C64,
    pub ur_minus: C64,
    pub ut_minus: C64,
    pub p_minus: C64,
}

impl StokesModeTraces {
    pub fn to_array(&self) -> [C64; 6] {
        [
            self.ur_plus,
            self.ut_plus,
            self.p_plus,
            self.ur_minus,
            self.ut_minus,
            self.p_minus,
        ]
    }

    pub fn from_array(a: [C64; 6]) -> Self {
        Self {
            ur_plus: a[0],
            ut_plus: a[1],
            p_plus: a[2],
            ur_minus: a[3],
            ut_minus: a[4],
            p_minus: a[5],
        }
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Stream-function finite-difference reference for mode k of the two-phase Stokes problem.
///
/// For k ≠ 0 the unknowns are F and Φ = Δ_kF on both radial grids with ψ = F(r)e^{ikθ},
/// u_r = ikF/r, u_θ = −F' and p = i rΦ'/k. For k = 0 the swirl u_θ is solved by finite
/// differences while the radial part (u_r = C/r in Ω⁻) and the pressure constants are
/// closed-form; the pressure is normalized by ∫_Ω p = 0 unless the outer condition is Robin.
pub fn oracle_stokes_mode(
    k: i64,
    r0: f64,
    outer: f64,
    bc_outer: VelocityOuter,
    data: StokesModeData,
) -> Result<StokesModeTraces> {
    let bvp = RadialBVP::new(k, r0, outer, RadialKind::Biharmonic);
    oracle_stokes(&bvp, bc_outer, data)
}

pub fn oracle_stokes(
    bvp: &RadialBVP,
    bc_outer: VelocityOuter,
    data: StokesModeData,
) -> Result<StokesModeTraces> {
    bvp.validate()?;
    if bvp.k == 0 {
        return stokes_mode_zero(bvp, bc_outer, data);
    }
    let t = bvp.extrapolate(|m| stokes_fd(bvp, bc_outer, &data, m).map(|t| t.to_array()))?;
    Ok(StokesModeTraces::from_array(t))
}

/// Linear combination of grid unknowns: (index, coefficient).
type Stencil = Vec<(usize, C64)>;

fn stokes_fd(
    bvp: &RadialBVP,
    bc_outer: VelocityOuter,
    d: &StokesModeData,
    m: usize,
) -> Result<StokesModeTraces> {
    let k = bvp.k as f64;
    let k2 = k * k;
    let (r0, big_r) = (bvp.r0, bvp.outer);
    let hp = r0 / m as f64;
    let hm = (big_r - r0) / m as f64;
    let n = 4 * (m + 1);
    let fp = |i: usize| 2 * i;
    let pp = |i: usize| 2 * i + 1;
    let fm = |i: usize| 2 * (m + 1) + 2 * i;
    let pm = |i: usize| 2 * (m + 1) + 2 * i + 1;
    let mut a = Banded::new(n, 9, 9);
    let mut b = vec![C64::new(0.0, 0.0); n];

    // L_k applied at interior node: u'' + u'/r − k²u/r²
    let lap = |idx: &dyn Fn(usize) -> usize, i: usize, r: f64, h: f64| -> Stencil {
        vec![
            (idx(i - 1), c(1.0 / (h * h) - 1.0 / (2.0 * h * r))),
            (idx(i), c(-2.0 / (h * h) - k2 / (r * r))),
            (idx(i + 1), c(1.0 / (h * h) + 1.0 / (2.0 * h * r))),
        ]
    };
    let put = |a: &mut Banded, row: usize, s: &Stencil| {
        for &(j, v) in s {
            a.add(row, j, v);
        }
    };

    // origin regularity
    a.add_re(fp(0), fp(0), 1.0);
    a.add_re(pp(0), pp(0), 1.0);
    for i in 1..m {
        let r = i as f64 * hp;
        let mut s = lap(&fp, i, r, hp);
        s.push((pp(i), c(-1.0)));
        put(&mut a, fp(i), &s);
        put(&mut a, pp(i), &lap(&pp, i, r, hp));
    }
    for i in 1..m {
        let r = r0 + i as f64 * hm;
        let mut s = lap(&fm, i, r, hm);
        s.push((pm(i), c(-1.0)));
        put(&mut a, fm(i), &s);
        put(&mut a, pm(i), &lap(&pm, i, r, hm));
    }

    // one-sided derivative stencils at the ends of each grid
    let d_end = |idx: &dyn Fn(usize) -> usize, h: f64| -> Stencil {
        vec![
            (idx(m), c(3.0 / (2.0 * h))),
            (idx(m - 1), c(-4.0 / (2.0 * h))),
            (idx(m - 2), c(1.0 / (2.0 * h))),
        ]
    };
    let d_start = |idx: &dyn Fn(usize) -> usize, h: f64| -> Stencil {
        vec![
            (idx(0), c(-3.0 / (2.0 * h))),
            (idx(1), c(4.0 / (2.0 * h))),
            (idx(2), c(-1.0 / (2.0 * h))),
        ]
    };
    let scale = |s: &Stencil, w: C64| -> Stencil { s.iter().map(|&(j, v)| (j, v * w)).collect() };
    let join = |parts: Vec<Stencil>| -> Stencil { parts.into_iter().flatten().collect() };

    // physical quantities as stencils in (F, F', Φ, Φ') at radius r
    struct Q {
        ur: Stencil,
        ut: Stencil,
        srr: Stencil,
        srt: Stencil,
        p: Stencil,
    }
    let quantities = |f: usize, df: Stencil, phi: usize, dphi: Stencil, r: f64| -> Q {
        let ik = I * k;
        let ur = vec![(f, ik / r)];
        let ut = scale(&df, c(-1.0));
        let p = scale(&dphi, I * r / k);
        // σ_rr = 2ik(F'/r − F/r²) − p
        let srr = join(vec![
            scale(&df, ik * 2.0 / r),
            vec![(f, -ik * 2.0 / (r * r))],
            scale(&p, c(-1.0)),
        ]);
        // σ_rθ = −Φ + 2F'/r − 2k²F/r²
        let srt = join(vec![
            vec![(phi, c(-1.0)), (f, c(-2.0 * k2 / (r * r)))],
            scale(&df, c(2.0 / r)),
        ]);
        Q { ur, ut, srr, srt, p }
    };
    let qp = quantities(fp(m), d_end(&fp, hp), pp(m), d_end(&pp, hp), r0);
    let qm = quantities(fm(0), d_start(&fm, hm), pm(0), d_start(&pm, hm), r0);
    let qo = quantities(fm(m), d_end(&fm, hm), pm(m), d_end(&pm, hm), big_r);

    let diff = |x: &Stencil, y: &Stencil| join(vec![x.clone(), scale(y, c(-1.0))]);
    put(&mut a, fp(m), &diff(&qp.ur, &qm.ur));
    b[fp(m)] = d.s_r;
    put(&mut a, pp(m), &diff(&qp.ut, &qm.ut));
    b[pp(m)] = d.s_t;
    put(&mut a, fm(0), &scale(&diff(&qp.srr, &qm.srr), c(-1.0)));
    b[fm(0)] = d.a_r;
    put(&mut a, pm(0), &scale(&diff(&qp.srt, &qm.srt), c(-1.0)));
    b[pm(0)] = d.a_t;

    let (row_r, row_t) = match bc_outer {
        VelocityOuter::Dirichlet => (qo.ur.clone(), qo.ut.clone()),
        VelocityOuter::NavierSlip { alpha } => (
            qo.ur.clone(),
            join(vec![qo.srt.clone(), scale(&qo.ut, c(alpha))]),
        ),
        VelocityOuter::Robin { alpha } => (
            join(vec![qo.srr.clone(), scale(&qo.ur, c(alpha))]),
            join(vec![qo.srt.clone(), scale(&qo.ut, c(alpha))]),
        ),
    };
    put(&mut a, fm(m), &row_r);
    b[fm(m)] = d.g_r;
    put(&mut a, pm(m), &row_t);
    b[pm(m)] = d.g_t;

    let x = a.solve(b)?;
    let ev = |s: &Stencil| s.iter().map(|&(j, v)| v * x[j]).sum::<C64>();
    Ok(StokesModeTraces {
        ur_plus: ev(&qp.ur),
        ut_plus: ev(&qp.ut),
        p_plus: ev(&qp.p),
        ur_minus: ev(&qm.ur),
        ut_minus: ev(&qm.ut),
        p_minus: ev(&qm.p),
    })
}

fn stokes_mode_zero(
    bvp: &RadialBVP,
    bc_outer: VelocityOuter,
    d: StokesModeData,
) -> Result<StokesModeTraces> {
    let (r0, big_r) = (bvp.r0, bvp.outer);
    // swirl: u_θ'' + u_θ'/r − u_θ/r² = 0, σ_rθ = u_θ' − u_θ/r
    let swirl = |m: usize| -> Result<[C64; 2]> {
        let hp = r0 / m as f64;
        let hm = (big_r - r0) / m as f64;
        let n = 2 * (m + 1);
        let up = |i: usize| i;
        let um = |i: usize| m + 1 + i;
        let mut a = Banded::new(n, 4, 4);
        let mut b = vec![C64::new(0.0, 0.0); n];
        a.add_re(0, 0, 1.0);
        let interior = |a: &mut Banded, idx: &dyn Fn(usize) -> usize, i: usize, r: f64, h: f64| {
            a.add_re(idx(i), idx(i - 1), 1.0 / (h * h) - 1.0 / (2.0 * h * r));
            a.add_re(idx(i), idx(i), -2.0 / (h * h) - 1.0 / (r * r));
            a.add_re(idx(i), idx(i + 1), 1.0 / (h * h) + 1.0 / (2.0 * h * r));
        };
        for i in 1..m {
            interior(&mut a, &up, i, i as f64 * hp, hp);
            interior(&mut a, &um, i, r0 + i as f64 * hm, hm);
        }
        // [u_θ] = s_θ
        a.add_re(up(m), up(m), 1.0);
        a.add_re(up(m), um(0), -1.0);
        b[up(m)] = d.s_t;
        // −[σ_rθ] = a_θ
        let row = um(0);
        a.add_re(row, up(m), -(3.0 / (2.0 * hp) - 1.0 / r0));
        a.add_re(row, up(m - 1), 4.0 / (2.0 * hp));
        a.add_re(row, up(m - 2), -1.0 / (2.0 * hp));
        a.add_re(row, um(0), -3.0 / (2.0 * hm) - 1.0 / r0);
        a.add_re(row, um(1), 4.0 / (2.0 * hm));
        a.add_re(row, um(2), -1.0 / (2.0 * hm));
        b[row] = d.a_t;
        let last = um(m);
        match bc_outer {
            VelocityOuter::Dirichlet => a.add_re(last, last, 1.0),
            VelocityOuter::NavierSlip { alpha } | VelocityOuter::Robin { alpha } => {
                a.add_re(last, um(m), 3.0 / (2.0 * hm) - 1.0 / big_r + alpha);
                a.add_re(last, um(m - 1), -4.0 / (2.0 * hm));
                a.add_re(last, um(m - 2), 1.0 / (2.0 * hm));
            }
        }
        b[last] = d.g_t;
        let x = a.solve(b)?;
        Ok([x[up(m)], x[um(0)]])
    };
    let [ut_plus, ut_minus] = bvp.extrapolate(swirl)?;

    // radial part: u_r⁺ = 0, u_r⁻ = C/r, constant pressures
    let area_p = std::f64::consts::PI * r0 * r0;
    let area_m = std::f64::consts::PI * (big_r * big_r - r0 * r0);
    let cc = -d.s_r * r0;
    let (pp, pm) = match bc_outer {
        VelocityOuter::Dirichlet | VelocityOuter::NavierSlip { .. } => {
            let mismatch = (cc / big_r - d.g_r).norm();
            if mismatch > 1e-12 * (1.0 + d.g_r.norm() + d.s_r.norm()) {
                return Err(Error::CompatibilityViolated {
                    residual: mismatch * 2.0 * std::f64::consts::PI * big_r,
                });
            }
            // p⁺ − p⁻ = a_r + 2C/r₀², area-weighted mean zero
            let jump = d.a_r + cc * 2.0 / (r0 * r0);
            let pm = -jump * area_p / (area_p + area_m);
            (pm + jump, pm)
        }
        VelocityOuter::Robin { alpha } => {
            // outer: σ_rr + αu_r = −2C/R² − p⁻ + αC/R = g_r
            let pm = -cc * 2.0 / (big_r * big_r) + cc * alpha / big_r - d.g_r;
            let pp = pm + d.a_r + cc * 2.0 / (r0 * r0);
            (pp, pm)
        }
    };
    Ok(StokesModeTraces {
        ur_plus: C64::new(0.0, 0.0),
        ut_plus,
        p_plus: pp,
        ur_minus: cc / r0,
        ut_minus,
        p_minus: pm,
    })
}

/// Δ_Γh at parameter θ by central differences in arclength, Richardson-extrapolated
/// over step sizes ds and ds/2.
pub fn oracle_laplace_beltrami(
    geometry: &InterfaceGeometry,
    h: &PeriodicField,
    theta: f64,
    t: f64,
) -> f64 {
    let speed = |th: f64| {
        let d = geometry.radius_derivs(th, t);
        d[0].hypot(d[1])
    };
    let (gx, gw) = gauss_legendre(24, 0.0, 1.0);
    let arc = |a: f64, b: f64| -> f64 {
        gx.iter()
            .zip(&gw)
            .map(|(x, w)| w * (b - a) * speed(a + (b - a) * x))
            .sum()
    };
    // θ with arclength(θ₀, θ) = s by Newton
    let shift = |s: f64| -> f64 {
        let mut th = theta + s / speed(theta);
        for _ in 0..50 {
            let f = arc(theta, th) - s;
            let step = f / speed(th);
            th -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        th
    };
    let hv = |th: f64| h.eval(th).re;
    let d2 = |ds: f64| (hv(shift(ds)) - 2.0 * hv(theta) + hv(shift(-ds))) / (ds * ds);
    let ds = 1e-2;
    (4.0 * d2(ds / 2.0) - d2(ds)) / 3.0
}

/// Double-double accumulator (error-free transformations).
#[derive(Clone, Copy, Debug, Default)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        (s, err)
    }

    fn add(self, x: DoubleDouble) -> Self {
        let (s, e) = Self::two_sum(self.hi, x.hi);
        let e = e + self.lo + x.lo;
        let (hi, lo) = Self::two_sum(s, e);
        Self { hi, lo }
    }

    fn mul(a: f64, b: f64) -> Self {
        let p = a * b;
        let e = a.mul_add(b, -p);
        Self { hi: p, lo: e }
    }

    fn mul_dd(self, b: DoubleDouble) -> Self {
        let p = Self::mul(self.hi, b.hi);
        let lo = p.lo + self.hi * b.lo + self.lo * b.hi;
        let (hi, lo) = Self::two_sum(p.hi, lo);
        Self { hi, lo }
    }

    fn sqrt(self) -> f64 {
        if self.hi <= 0.0 {
            return 0.0;
        }
        let y = self.hi.sqrt();
        // one Newton correction in double-double
        let y2 = Self::mul(y, y);
        let r = self.add(Self { hi: -y2.hi, lo: -y2.lo });
        y + r.hi / (2.0 * y)
    }
}

/// Extended-precision reference for sqrt(Σ (1+k²)^s |ĥ_k|²).
pub fn oracle_h_norm(f: &PeriodicField, s: f64) -> f64 {
    let k = f.cutoff() as i64;
    let mut acc = DoubleDouble::default();
    for m in -k..=k {
        let c = f.mode(m);
        let w = DoubleDouble {
            hi: (1.0 + (m * m) as f64).powf(s),
            lo: 0.0,
        };
        let a2 = DoubleDouble::mul(c.re, c.re).add(DoubleDouble::mul(c.im, c.im));
        acc = acc.add(w.mul_dd(a2));
    }
    acc.sqrt()
}
