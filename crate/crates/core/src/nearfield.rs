//! Accurate evaluation of layer representations close to their curves.
//!
//! Far from the curves the coarse Nyström sum is used directly. Within four
//! node spacings the densities are evaluated on an eightfold upsampled curve,
//! and closer still the value is interpolated along the ray through x between
//! the boundary trace and four upsampled evaluations at safe distances.

use crate::field::{PeriodicField, C64};
use crate::geometry::Phase;

pub(crate) const UPSAMPLE: usize = 8;
const SAFE: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Gamma,
    Outer,
}

/// Star-shaped interface ρ(θ) inside the circle of radius R, with the largest
/// coarse node spacing on each curve.
#[derive(Clone, Debug)]
pub(crate) struct RayFrame {
    pub rho: PeriodicField,
    pub outer: f64,
    pub h_gamma: f64,
    pub h_outer: f64,
}

impl RayFrame {
    /// Evaluates at x in the given phase. `direct(fine, y)` is the Nyström sum
    /// on the coarse or upsampled curves, `trace(side, θ)` the one-sided limit.
    pub fn eval(
        &self,
        x: [f64; 2],
        phase: Phase,
        direct: impl Fn(bool, [f64; 2]) -> Vec<C64>,
        trace: impl Fn(Side, f64) -> Vec<C64>,
    ) -> Vec<C64> {
        let r = x[0].hypot(x[1]);
        let th = x[1].atan2(x[0]);
        let rho = self.rho.eval(th).re;
        let drho = self.rho.derivative(1).eval(th).re;
        let stretch = rho.hypot(drho) / rho;
        let gamma = ((r - rho).abs() / stretch, self.h_gamma);
        let mut near = (Side::Gamma, gamma.0, gamma.1, stretch);
        if phase == Phase::Minus {
            let d = self.outer - r;
            if d / self.h_outer < gamma.0 / gamma.1 {
                near = (Side::Outer, d, self.h_outer, 1.0);
            }
        }
        let (side, dn, h, stretch) = near;
        if dn >= SAFE * h {
            return direct(false, x);
        }
        let hf = h / UPSAMPLE as f64;
        if dn >= SAFE * hf {
            return direct(true, x);
        }
        // ray from the foot point into the phase
        let (foot, dir) = match (side, phase) {
            (Side::Gamma, Phase::Plus) => (rho, -1.0),
            (Side::Gamma, Phase::Minus) => (rho, 1.0),
            (Side::Outer, _) => (self.outer, -1.0),
        };
        let (c, s) = (th.cos(), th.sin());
        let mut nodes = vec![0.0];
        let mut vals = vec![trace(side, th)];
        for j in 0..4 {
            let sj = stretch * SAFE * hf * (1.0 + 0.5 * j as f64);
            let rj = foot + dir * sj;
            nodes.push(sj);
            vals.push(direct(true, [rj * c, rj * s]));
        }
        let target = (r - foot).abs();
        let mut out = vec![C64::new(0.0, 0.0); vals[0].len()];
        for (i, vi) in vals.iter().enumerate() {
            let l: f64 = (0..nodes.len())
                .filter(|&m| m != i)
                .map(|m| (target - nodes[m]) / (nodes[i] - nodes[m]))
                .product();
            for (o, v) in out.iter_mut().zip(vi) {
                *o += v * l;
            }
        }
        out
    }
}

/// Trigonometric upsampling of node values to `factor`·n nodes.
pub(crate) fn upsample(vals: &[C64], factor: usize) -> Vec<C64> {
    let n = vals.len();
    PeriodicField::from_samples(vals, n / 2 - 1).samples(factor * n)
}
