//! Sobolev norms on T¹ and the space-time norm of X_T.

use crate::error::{Error, Result};
pub use crate::field::PeriodicField;

/// sqrt(Σ_k (1+k²)^s |ĥ_k|²).
pub fn h_norm(f: &PeriodicField, s: f64) -> f64 {
    let k = f.cutoff() as i64;
    (-k..=k)
        .map(|m| (1.0 + (m * m) as f64).powf(s) * f.mode(m).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Drop all modes above `cutoff`.
pub fn project(f: &PeriodicField, cutoff: usize) -> PeriodicField {
    f.project(cutoff)
}

/// Smallest η such that ‖f‖²_{5/2} ≤ ε²‖f‖²_{7/2} + η²‖f‖²_{1/2} holds mode by
/// mode for |k| ≤ cutoff. This implies the unsquared bound with the same ε, η.
pub fn interpolation_eta(eps: f64, cutoff: usize) -> f64 {
    (0..=cutoff as i64)
        .map(|k| {
            let w = 1.0 + (k * k) as f64;
            w * w - eps * eps * w * w * w
        })
        .fold(0.0_f64, f64::max)
        .sqrt()
}

/// Time series of fields on a common cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    fields: Vec<PeriodicField>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, fields: Vec<PeriodicField>) -> Result<Self> {
        if times.len() != fields.len() {
            return Err(Error::InvalidConfig(format!(
                "{} times but {} fields",
                times.len(),
                fields.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("time grid must increase".into()));
        }
        if let Some(first) = fields.first() {
            let k = first.cutoff();
            if let Some(bad) = fields.iter().find(|f| f.cutoff() != k) {
                return Err(Error::CutoffMismatch {
                    expected: k,
                    got: bad.cutoff(),
                });
            }
        }
        Ok(Self { times, fields })
    }

    /// Sample `f(t)` on a uniform grid with `steps` intervals on [0, t_end].
    pub fn from_fn(t_end: f64, steps: usize, f: impl Fn(f64) -> PeriodicField) -> Result<Self> {
        let times: Vec<f64> = (0..=steps)
            .map(|i| t_end * i as f64 / steps as f64)
            .collect();
        let fields = times.iter().map(|&t| f(t)).collect();
        Self::new(times, fields)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[PeriodicField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn cutoff(&self) -> usize {
        self.fields.first().map_or(0, |f| f.cutoff())
    }

    pub fn last(&self) -> Option<&PeriodicField> {
        self.fields.last()
    }

    pub fn push(&mut self, t: f64, f: PeriodicField) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::InvalidConfig("time grid must increase".into()));
            }
            if f.cutoff() != self.cutoff() {
                return Err(Error::CutoffMismatch {
                    expected: self.cutoff(),
                    got: f.cutoff(),
                });
            }
        }
        self.times.push(t);
        self.fields.push(f);
        Ok(())
    }

    /// Piecewise-linear interpolation in time, clamped at the ends.
    pub fn at(&self, t: f64) -> PeriodicField {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.fields[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.fields[n - 1].clone();
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        &self.fields[i].scale_real(1.0 - w) + &self.fields[i + 1].scale_real(w)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            times: self.times.clone(),
            fields: self.fields.iter().map(|f| f.scale_real(c)).collect(),
        }
    }

    /// Second-order time derivative: three-point differences on the possibly
    /// nonuniform grid, one-sided at the ends.
    pub fn time_derivative(&self) -> Result<Self> {
        let n = self.times.len();
        if n < 2 {
            return Err(Error::InsufficientTimeSamples { needed: 2, got: n });
        }
        let t = &self.times;
        let f = &self.fields;
        let comb = |c: &[(usize, f64)]| {
            c.iter()
                .fold(PeriodicField::zeros(self.cutoff()), |acc, &(i, w)| {
                    &acc + &f[i].scale_real(w)
                })
        };
        if n == 2 {
            let d = comb(&[(0, -1.0 / (t[1] - t[0])), (1, 1.0 / (t[1] - t[0]))]);
            return Self::new(t.clone(), vec![d.clone(), d]);
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let d = if i == 0 {
                let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
                comb(&[
                    (0, -(2.0 * h1 + h2) / (h1 * (h1 + h2))),
                    (1, (h1 + h2) / (h1 * h2)),
                    (2, -h1 / (h2 * (h1 + h2))),
                ])
            } else if i == n - 1 {
                let (h1, h2) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
                comb(&[
                    (n - 3, h2 / (h1 * (h1 + h2))),
                    (n - 2, -(h1 + h2) / (h1 * h2)),
                    (n - 1, (h1 + 2.0 * h2) / (h2 * (h1 + h2))),
                ])
            } else {
                let (h1, h2) = (t[i] - t[i - 1], t[i + 1] - t[i]);
                comb(&[
                    (i - 1, -h2 / (h1 * (h1 + h2))),
                    (i, (h2 - h1) / (h1 * h2)),
                    (i + 1, h1 / (h2 * (h1 + h2))),
                ])
            };
            out.push(d);
        }
        Self::new(t.clone(), out)
    }

    /// Composite trapezoid rule of a per-node scalar.
    pub fn integrate(&self, g: impl Fn(usize) -> f64) -> f64 {
        self.times
            .windows(2)
            .enumerate()
            .map(|(i, w)| 0.5 * (w[1] - w[0]) * (g(i) + g(i + 1)))
            .sum()
    }

    /// (∫ ‖h‖_{H^s}^p dt)^{1/p} by the trapezoid rule.
    pub fn lp_hs(&self, p: f64, s: f64) -> f64 {
        let v: Vec<f64> = self.fields.iter().map(|f| h_norm(f, s).powf(p)).collect();
        self.integrate(|i| v[i]).powf(1.0 / p)
    }
}

/// ‖h‖_{L²(H^{7/2})} + ‖h‖_{H¹(H^{1/2})} + ‖h(0)‖_{H²}.
pub fn xt_norm(traj: &Trajectory) -> Result<f64> {
    let parts = xt_norm_parts(traj)?;
    Ok(parts.iter().sum())
}

/// The three summands of [`xt_norm`] in order.
pub fn xt_norm_parts(traj: &Trajectory) -> Result<[f64; 3]> {
    let n = traj.len();
    if n < 2 {
        return Err(Error::InsufficientTimeSamples { needed: 2, got: n });
    }
    let dt = traj.time_derivative()?;
    let h72: Vec<f64> = traj.fields.iter().map(|f| h_norm(f, 3.5).powi(2)).collect();
    let h12: Vec<f64> = traj.fields.iter().map(|f| h_norm(f, 0.5).powi(2)).collect();
    let d12: Vec<f64> = dt.fields.iter().map(|f| h_norm(f, 0.5).powi(2)).collect();
    let l2 = traj.integrate(|i| h72[i]).sqrt();
    let h1 = traj.integrate(|i| h12[i] + d12[i]).sqrt();
    let init = h_norm(&traj.fields[0], 2.0);
    Ok([l2, h1, init])
}

/// Norm table rows (t, H^{1/2}, H², H^{7/2}).
pub fn norm_table(traj: &Trajectory) -> Vec<[f64; 4]> {
    traj.times
        .iter()
        .zip(&traj.fields)
        .map(|(&t, f)| [t, h_norm(f, 0.5), h_norm(f, 2.0), h_norm(f, 3.5)])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::C64;
    use approx::assert_relative_eq;

    #[test]
    fn single_zero_mode_has_unit_norm() {
        let f = PeriodicField::constant(4, 1.0);
        for s in [0.0, 0.5, 2.0, 3.5] {
            assert_relative_eq!(h_norm(&f, s), 1.0);
        }
    }

    #[test]
    fn symmetric_first_mode() {
        let mut f = PeriodicField::zeros(3);
        f.set_mode(1, C64::new(1.0, 0.0));
        f.set_mode(-1, C64::new(1.0, 0.0));
        assert_relative_eq!(h_norm(&f, 1.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_trajectory_xt_norm() {
        let mut f = PeriodicField::zeros(2);
        f.set_mode(1, C64::new(1.0, 0.0));
        f.set_mode(-1, C64::new(1.0, 0.0));
        let traj = Trajectory::from_fn(1.0, 10, |_| f.clone()).unwrap();
        let expected = (2.0 * 2f64.powf(3.5)).sqrt() + (2.0 * 2f64.sqrt()).sqrt() + (2.0 * 4.0f64).sqrt();
        assert_relative_eq!(xt_norm(&traj).unwrap(), expected, epsilon = 1e-13);
    }

    #[test]
    fn decaying_mode_matches_closed_form() {
        let traj = Trajectory::from_fn(1.0, 64, |t| PeriodicField::trig(2, 1, (-t).exp(), 0.0)).unwrap();
        let i = (1.0 - (-2.0f64).exp()) / 2.0;
        let expected = (2f64.powf(2.5) * i).sqrt() + (2.0 * 2f64.powf(-0.5) * i).sqrt() + 2f64.sqrt();
        let got = xt_norm(&traj).unwrap();
        // trapezoid error at 64 intervals is about 1e-4 absolute, 3e-5 relative
        assert!((got - expected).abs() < 1e-4 * expected, "{got} vs {expected}");
    }

    #[test]
    fn zero_trajectory() {
        let traj = Trajectory::from_fn(1.0, 4, |_| PeriodicField::zeros(3)).unwrap();
        assert_eq!(xt_norm(&traj).unwrap(), 0.0);
    }

    #[test]
    fn single_node_is_rejected() {
        let traj = Trajectory::new(vec![0.0], vec![PeriodicField::zeros(1)]).unwrap();
        assert!(matches!(
            xt_norm(&traj),
            Err(Error::InsufficientTimeSamples { .. })
        ));
    }

    #[test]
    fn derivative_is_exact_for_quadratics_on_nonuniform_grid() {
        let times = vec![0.0, 0.1, 0.35, 0.5, 0.9];
        let fields = times
            .iter()
            .map(|&t| PeriodicField::constant(0, t * t))
            .collect();
        let d = Trajectory::new(times.clone(), fields).unwrap().time_derivative().unwrap();
        for (t, f) in times.iter().zip(d.fields()) {
            assert_relative_eq!(f.mode(0).re, 2.0 * t, epsilon = 1e-12);
        }
    }
}
