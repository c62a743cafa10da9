//! Truncated Fourier series on the unit circle T¹ = [0, 2π).

use std::cell::RefCell;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Equispaced nodes θ_j = 2πj/n.
pub fn nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n as f64)
        .collect()
}

/// Samples on `n` equispaced nodes to Fourier coefficients c_k, |k| ≤ cutoff.
/// Modes above n/2 cannot be resolved and come back as aliases.
pub fn analyze(samples: &[C64], cutoff: usize) -> Vec<C64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    forward_plan(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let k = cutoff as i64;
    (-k..=k)
        .map(|m| {
            if 2 * m.unsigned_abs() as usize > n || (2 * m.unsigned_abs() as usize == n && m < 0) {
                C64::new(0.0, 0.0)
            } else {
                buf[m.rem_euclid(n as i64) as usize] * scale
            }
        })
        .collect()
}

/// Coefficients c_k, k = −K..K to samples on `n` equispaced nodes.
pub fn synthesize(modes: &[C64], n: usize) -> Vec<C64> {
    let k = (modes.len() as i64 - 1) / 2;
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for (idx, c) in modes.iter().enumerate() {
        let m = idx as i64 - k;
        buf[m.rem_euclid(n as i64) as usize] += *c;
    }
    inverse_plan(n).process(&mut buf);
    buf
}

/// Grid size that resolves products of two fields with cutoffs `k1`, `k2` exactly.
pub fn product_grid(k1: usize, k2: usize) -> usize {
    (2 * (k1 + k2) + 2).max(8)
}

/// Scalar field on T¹ stored as Fourier modes ĥ_k, |k| ≤ K.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicField {
    cutoff: usize,
    modes: Vec<C64>,
    real: bool,
}

impl PeriodicField {
    pub fn zeros(cutoff: usize) -> Self {
        Self {
            cutoff,
            modes: vec![C64::new(0.0, 0.0); 2 * cutoff + 1],
            real: true,
        }
    }

    /// Build from modes ordered k = −K..K. The reality flag is set when the
    /// coefficients are conjugate-symmetric to 1e−14.
    pub fn from_modes(modes: Vec<C64>) -> Self {
        assert!(modes.len() % 2 == 1, "mode vector must have odd length");
        let cutoff = (modes.len() - 1) / 2;
        let mut f = Self {
            cutoff,
            modes,
            real: false,
        };
        f.real = f.check_real(1e-14);
        f
    }

    pub fn constant(cutoff: usize, c: f64) -> Self {
        let mut f = Self::zeros(cutoff);
        f.modes[cutoff] = C64::new(c, 0.0);
        f
    }

    /// e^{ikθ}·c.
    pub fn single_mode(cutoff: usize, k: i64, c: C64) -> Self {
        let mut f = Self::zeros(cutoff);
        f.set_mode(k, c);
        f.real = f.check_real(1e-14);
        f
    }

    /// a·cos(kθ) + b·sin(kθ).
    pub fn trig(cutoff: usize, k: i64, a: f64, b: f64) -> Self {
        let mut f = Self::zeros(cutoff);
        if k == 0 {
            f.set_mode(0, C64::new(a, 0.0));
        } else {
            let c = C64::new(a, -b) * 0.5;
            f.set_mode(k, c);
            f.set_mode(-k, c.conj());
        }
        f.real = true;
        f
    }

    /// Project complex samples on equispaced nodes onto modes |k| ≤ cutoff.
    pub fn from_samples(samples: &[C64], cutoff: usize) -> Self {
        Self::from_modes(analyze(samples, cutoff))
    }

    /// Real samples; the result is symmetrized so the reality flag holds exactly.
    pub fn from_real_samples(samples: &[f64], cutoff: usize) -> Self {
        let c: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
        let mut f = Self::from_samples(&c, cutoff);
        f.symmetrize();
        f
    }

    /// Sample a real function on 4(K+1) nodes and keep modes |k| ≤ K.
    pub fn from_fn(cutoff: usize, f: impl Fn(f64) -> f64) -> Self {
        let n = (4 * (cutoff + 1)).max(16);
        let s: Vec<f64> = nodes(n).into_iter().map(f).collect();
        Self::from_real_samples(&s, cutoff)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn modes(&self) -> &[C64] {
        &self.modes
    }

    pub fn mode(&self, k: i64) -> C64 {
        if k.unsigned_abs() as usize > self.cutoff {
            C64::new(0.0, 0.0)
        } else {
            self.modes[(k + self.cutoff as i64) as usize]
        }
    }

    pub fn set_mode(&mut self, k: i64, c: C64) {
        assert!(k.unsigned_abs() as usize <= self.cutoff, "mode {k} above cutoff");
        self.modes[(k + self.cutoff as i64) as usize] = c;
        self.real = false;
    }

    /// Recompute the reality flag with tolerance relative to the largest mode.
    pub fn check_real(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        let k = self.cutoff as i64;
        (0..=k).all(|m| (self.mode(m) - self.mode(-m).conj()).norm() <= tol * scale)
    }

    /// Replace by its real part (projection onto conjugate-symmetric modes).
    pub fn symmetrize(&mut self) {
        let k = self.cutoff as i64;
        for m in 0..=k {
            let a = self.mode(m);
            let b = self.mode(-m);
            let c = (a + b.conj()) * 0.5;
            self.modes[(m + k) as usize] = c;
            self.modes[(k - m) as usize] = c.conj();
        }
        self.real = true;
    }

    pub fn real_part(&self) -> Self {
        let mut f = self.clone();
        f.symmetrize();
        f
    }

    /// Field whose values are the complex conjugates of this one.
    pub fn conj(&self) -> Self {
        let k = self.cutoff as i64;
        let modes = (-k..=k).map(|m| self.mode(-m).conj()).collect();
        Self {
            cutoff: self.cutoff,
            modes,
            real: self.real,
        }
    }

    /// Imaginary part as a real field.
    pub fn imag_part(&self) -> Self {
        let c = self.conj();
        let mut f = (self - &c).scale(C64::new(0.0, -0.5));
        f.symmetrize();
        f
    }

    pub fn max_abs(&self) -> f64 {
        self.modes.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.modes.iter().all(|c| c.norm() == 0.0)
    }

    /// Point evaluation by direct summation.
    pub fn eval(&self, theta: f64) -> C64 {
        let k = self.cutoff as i64;
        (-k..=k)
            .map(|m| self.mode(m) * C64::from_polar(1.0, m as f64 * theta))
            .sum()
    }

    pub fn samples(&self, n: usize) -> Vec<C64> {
        synthesize(&self.modes, n)
    }

    pub fn real_samples(&self, n: usize) -> Vec<f64> {
        self.samples(n).into_iter().map(|c| c.re).collect()
    }

    /// m-th derivative in θ.
    pub fn derivative(&self, order: u32) -> Self {
        let k = self.cutoff as i64;
        let modes = (-k..=k)
            .map(|m| self.mode(m) * (I * m as f64).powu(order))
            .collect();
        Self {
            cutoff: self.cutoff,
            modes,
            real: self.real,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let modes = self.modes.iter().map(|m| m * c).collect();
        Self {
            cutoff: self.cutoff,
            modes,
            real: self.real && c.im == 0.0,
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Same field with a new cutoff (zero padding or truncation).
    pub fn resize(&self, cutoff: usize) -> Self {
        let k = cutoff as i64;
        let modes = (-k..=k).map(|m| self.mode(m)).collect();
        Self {
            cutoff,
            modes,
            real: self.real,
        }
    }

    /// Drop modes |k| > K'.
    pub fn project(&self, cutoff: usize) -> Self {
        assert!(cutoff <= self.cutoff, "project cannot raise the cutoff");
        self.resize(cutoff)
    }

    /// Pointwise product, computed exactly on a product grid and truncated to
    /// the larger of the two cutoffs.
    pub fn multiply(&self, other: &Self) -> Self {
        let n = product_grid(self.cutoff, other.cutoff);
        let a = self.samples(n);
        let b = other.samples(n);
        let p: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut f = Self::from_samples(&p, self.cutoff.max(other.cutoff));
        if self.real && other.real {
            f.symmetrize();
        }
        f
    }

    /// Pointwise product with a function given by samples on `n` nodes, where the
    /// samples are assumed to resolve the result. Output cutoff equals input cutoff.
    pub fn multiply_samples(&self, weights: &[C64]) -> Self {
        let n = weights.len();
        let a = self.samples(n);
        let p: Vec<C64> = a.iter().zip(weights).map(|(x, y)| x * y).collect();
        Self::from_samples(&p, self.cutoff)
    }

    /// sqrt(Σ (1+k²)^s |ĥ_k|²).
    pub fn h_norm(&self, s: f64) -> f64 {
        crate::sobolev::h_norm(self, s)
    }

    pub fn l2_inner(&self, other: &Self) -> C64 {
        let k = self.cutoff.max(other.cutoff) as i64;
        (-k..=k).map(|m| self.mode(m).conj() * other.mode(m)).sum()
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let k = self.cutoff.max(other.cutoff) as i64;
        let modes = (-k..=k)
            .map(|m| self.mode(m) + other.mode(m) * sign)
            .collect();
        Self {
            cutoff: k as usize,
            modes,
            real: self.real && other.real,
        }
    }
}

impl Add for &PeriodicField {
    type Output = PeriodicField;
    fn add(self, rhs: Self) -> PeriodicField {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &PeriodicField {
    type Output = PeriodicField;
    fn sub(self, rhs: Self) -> PeriodicField {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &PeriodicField {
    type Output = PeriodicField;
    fn neg(self) -> PeriodicField {
        self.scale_real(-1.0)
    }
}

impl Mul<f64> for &PeriodicField {
    type Output = PeriodicField;
    fn mul(self, rhs: f64) -> PeriodicField {
        self.scale_real(rhs)
    }
}

/// Vector field on T¹ with Cartesian components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x: PeriodicField,
    pub y: PeriodicField,
}

impl VectorField {
    pub fn new(x: PeriodicField, y: PeriodicField) -> Self {
        Self { x, y }
    }

    pub fn zeros(cutoff: usize) -> Self {
        Self::new(PeriodicField::zeros(cutoff), PeriodicField::zeros(cutoff))
    }

    pub fn constant(cutoff: usize, vx: f64, vy: f64) -> Self {
        Self::new(
            PeriodicField::constant(cutoff, vx),
            PeriodicField::constant(cutoff, vy),
        )
    }

    pub fn cutoff(&self) -> usize {
        self.x.cutoff().max(self.y.cutoff())
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.x.is_real() && self.y.is_real()
    }

    pub fn resize(&self, cutoff: usize) -> Self {
        Self::new(self.x.resize(cutoff), self.y.resize(cutoff))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(self.x.scale(c), self.y.scale(c))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.x + &other.x, &self.y + &other.y)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(&self.x - &other.x, &self.y - &other.y)
    }

    /// Vector times scalar field, pointwise.
    pub fn times(&self, s: &PeriodicField) -> Self {
        Self::new(self.x.multiply(s), self.y.multiply(s))
    }

    pub fn dot(&self, other: &Self) -> PeriodicField {
        &self.x.multiply(&other.x) + &self.y.multiply(&other.y)
    }

    pub fn samples(&self, n: usize) -> (Vec<C64>, Vec<C64>) {
        (self.x.samples(n), self.y.samples(n))
    }

    pub fn from_samples(x: &[C64], y: &[C64], cutoff: usize) -> Self {
        Self::new(
            PeriodicField::from_samples(x, cutoff),
            PeriodicField::from_samples(y, cutoff),
        )
    }

    /// Radial and angular components (v·e_r, v·e_θ) with e_r = (cosθ, sinθ),
    /// computed exactly on modes. Output cutoff is K+1.
    pub fn to_polar(&self) -> (PeriodicField, PeriodicField) {
        let k = self.cutoff() as i64 + 1;
        let half = 0.5;
        let mut vr = Vec::with_capacity((2 * k + 1) as usize);
        let mut vt = Vec::with_capacity((2 * k + 1) as usize);
        for m in -k..=k {
            let xm = self.x.mode(m - 1);
            let xp = self.x.mode(m + 1);
            let ym = self.y.mode(m - 1);
            let yp = self.y.mode(m + 1);
            // cosθ f → (f_{k−1}+f_{k+1})/2, sinθ f → (f_{k−1}−f_{k+1})/(2i)
            let cos_x = (xm + xp) * half;
            let sin_x = (xm - xp) * half / I;
            let cos_y = (ym + yp) * half;
            let sin_y = (ym - yp) * half / I;
            vr.push(cos_x + sin_y);
            vt.push(-sin_x + cos_y);
        }
        let real = self.is_real();
        let mut r = PeriodicField::from_modes(vr);
        let mut t = PeriodicField::from_modes(vt);
        if real {
            r.symmetrize();
            t.symmetrize();
        }
        (r, t)
    }

    /// Inverse of [`to_polar`]. Output cutoff is K+1.
    pub fn from_polar(vr: &PeriodicField, vt: &PeriodicField) -> Self {
        let k = vr.cutoff().max(vt.cutoff()) as i64 + 1;
        let half = 0.5;
        let mut vx = Vec::new();
        let mut vy = Vec::new();
        for m in -k..=k {
            let cos_r = (vr.mode(m - 1) + vr.mode(m + 1)) * half;
            let sin_r = (vr.mode(m - 1) - vr.mode(m + 1)) * half / I;
            let cos_t = (vt.mode(m - 1) + vt.mode(m + 1)) * half;
            let sin_t = (vt.mode(m - 1) - vt.mode(m + 1)) * half / I;
            vx.push(cos_r - sin_t);
            vy.push(sin_r + cos_t);
        }
        let real = vr.is_real() && vt.is_real();
        let mut x = PeriodicField::from_modes(vx);
        let mut y = PeriodicField::from_modes(vy);
        if real {
            x.symmetrize();
            y.symmetrize();
        }
        Self::new(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn analyze_synthesize_round_trip() {
        let f = PeriodicField::from_modes(
            (-3..=3)
                .map(|k: i64| C64::new(k as f64, (k * k) as f64 * 0.1))
                .collect(),
        );
        let s = f.samples(16);
        let g = PeriodicField::from_samples(&s, 3);
        for k in -3..=3 {
            assert_abs_diff_eq!((f.mode(k) - g.mode(k)).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn trig_matches_samples() {
        let f = PeriodicField::trig(4, 2, 0.5, -1.5);
        let n = 12;
        for (j, v) in f.real_samples(n).into_iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            assert_abs_diff_eq!(v, 0.5 * (2.0 * th).cos() - 1.5 * (2.0 * th).sin(), epsilon = 1e-14);
        }
        assert!(f.is_real());
    }

    #[test]
    fn product_of_cosines() {
        let a = PeriodicField::trig(3, 1, 1.0, 0.0);
        let b = PeriodicField::trig(3, 2, 1.0, 0.0);
        let p = a.multiply(&b);
        // cosθ cos2θ = (cosθ + cos3θ)/2
        assert_abs_diff_eq!(p.mode(1).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.mode(3).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.mode(2).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn polar_round_trip_and_normal() {
        // e_r itself has v_r = 1, v_θ = 0
        let er = VectorField::new(PeriodicField::trig(2, 1, 1.0, 0.0), PeriodicField::trig(2, 1, 0.0, 1.0));
        let (vr, vt) = er.to_polar();
        assert_abs_diff_eq!(vr.mode(0).re, 1.0, epsilon = 1e-15);
        assert!(vt.max_abs() < 1e-15);
        let back = VectorField::from_polar(&vr, &vt);
        for k in -2..=2 {
            assert_abs_diff_eq!((back.x.mode(k) - er.x.mode(k)).norm(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!((back.y.mode(k) - er.y.mode(k)).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let f = PeriodicField::trig(5, 3, 0.0, 1.0);
        let d = f.derivative(1);
        let expected = PeriodicField::trig(5, 3, 3.0, 0.0);
        for k in -5..=5 {
            assert_abs_diff_eq!((d.mode(k) - expected.mode(k)).norm(), 0.0, epsilon = 1e-14);
        }
    }
}
