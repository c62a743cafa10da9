//! Small dense and banded linear algebra helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Least-squares solver for a fixed tall matrix, reusable for many right-hand sides.
/// Columns are scaled to unit norm before the QR factorization.
pub struct LeastSquares {
    qr: nalgebra::linalg::QR<C64, nalgebra::Dyn, nalgebra::Dyn>,
    r: CMat,
    col_scale: Vec<f64>,
    rows: usize,
}

impl LeastSquares {
    pub fn new(mut a: CMat) -> Result<Self> {
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::InvalidConfig(format!(
                "least squares needs rows >= cols ({m} < {n})"
            )));
        }
        let mut col_scale = Vec::with_capacity(n);
        for j in 0..n {
            let s = a.column(j).norm();
            let s = if s > 0.0 { 1.0 / s } else { 1.0 };
            a.column_mut(j).scale_mut(s);
            col_scale.push(s);
        }
        let qr = a.qr();
        let r = qr.r();
        let dmax = (0..n).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
        let dmin = (0..n).map(|i| r[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        if !(dmin > 1e-14 * dmax) {
            return Err(Error::SingularSystem(format!(
                "rank-deficient collocation matrix (diag ratio {:.3e})",
                dmin / dmax
            )));
        }
        Ok(Self {
            qr,
            r,
            col_scale,
            rows: m,
        })
    }

    pub fn solve(&self, b: &CVec) -> CVec {
        assert_eq!(b.len(), self.rows);
        let n = self.col_scale.len();
        let mut y = b.clone();
        self.qr.q_tr_mul(&mut y);
        let top = y.rows(0, n).into_owned();
        let mut x = self
            .r
            .view((0, 0), (n, n))
            .solve_upper_triangular(&top)
            .expect("nonsingular R");
        for (xi, s) in x.iter_mut().zip(&self.col_scale) {
            *xi *= *s;
        }
        x
    }
}

/// LU solve of a square complex system.
pub fn solve_dense(a: CMat, b: &CVec) -> Result<CVec> {
    a.lu()
        .solve(b)
        .ok_or_else(|| Error::SingularSystem("LU pivot breakdown".into()))
}

/// Banded matrix with partial-pivoting LU, entries (i, j) with −kl ≤ j−i ≤ ku.
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
}

impl Banded {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![zero(); n * width],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i},{j}) outside band"
        );
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn add_re(&mut self, i: usize, j: usize, v: f64) {
        self.add(i, j, C64::new(v, 0.0));
    }

    /// Solve in place; consumes the matrix.
    pub fn solve(mut self, mut b: Vec<C64>) -> Result<Vec<C64>> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        for i in 0..n {
            let last_row = (i + kl).min(n - 1);
            let mut p = i;
            let mut best = self.data[self.idx(i, i)].norm();
            for r in i + 1..=last_row {
                let v = self.data[self.idx(r, i)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= 1e-300 * scale.max(1.0) {
                return Err(Error::SingularSystem(format!("zero pivot in column {i}")));
            }
            let last_col = (i + ku + kl).min(n - 1);
            if p != i {
                for j in i..=last_col {
                    let a = self.idx(i, j);
                    let c = self.idx(p, j);
                    self.data.swap(a, c);
                }
                b.swap(i, p);
            }
            let piv = self.data[self.idx(i, i)];
            for r in i + 1..=last_row {
                let f = self.data[self.idx(r, i)] / piv;
                if f == zero() {
                    continue;
                }
                for j in i..=last_col {
                    let v = self.data[self.idx(i, j)];
                    let k = self.idx(r, j);
                    self.data[k] -= f * v;
                }
                let bi = b[i];
                b[r] -= f * bi;
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + ku + kl).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=last_col {
                s -= self.data[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
        Ok(b)
    }
}

/// Gauss–Legendre nodes and weights on [a, b].
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    let (h, c) = (0.5 * (b - a), 0.5 * (b + a));
    (
        x.into_iter().map(|t| c + h * t).collect(),
        w.into_iter().map(|t| h * t).collect(),
    )
}

/// Eigenvalues of the real symmetric pencil (a, m) with m positive definite, ascending.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("mass matrix not positive definite".into()))?;
    let l = chol.l();
    let linv_a = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::SingularSystem("triangular solve".into()))?;
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or_else(|| Error::SingularSystem("triangular solve".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(ev)
}

/// Basis of the right nullspace of a small matrix, by Gaussian elimination with
/// complete pivoting. Pivots below `tol`·max|a| count as zero.
pub fn nullspace(a: &CMat, tol: f64) -> CMat {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let scale = w.iter().fold(0.0_f64, |s, v| s.max(v.norm())).max(1e-300);
    let mut cols: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    for r in 0..m.min(n) {
        let (mut pi, mut pj, mut best) = (r, r, 0.0);
        for i in r..m {
            for j in r..n {
                let v = w[(i, j)].norm();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= tol * scale {
            break;
        }
        w.swap_rows(r, pi);
        w.swap_columns(r, pj);
        cols.swap(r, pj);
        let piv = w[(r, r)];
        for j in 0..n {
            w[(r, j)] /= piv;
        }
        for i in 0..m {
            if i != r {
                let f = w[(i, r)];
                if f != zero() {
                    for j in 0..n {
                        let v = w[(r, j)];
                        w[(i, j)] -= f * v;
                    }
                }
            }
        }
        rank += 1;
    }
    let dim = n - rank;
    let mut out = CMat::zeros(n, dim);
    for f in 0..dim {
        let free = rank + f;
        out[(cols[free], f)] = C64::new(1.0, 0.0);
        for p in 0..rank {
            out[(cols[p], f)] = -w[(p, free)];
        }
    }
    for f in 0..dim {
        let nrm = out.column(f).norm();
        out.column_mut(f).scale_mut(1.0 / nrm);
    }
    out
}

/// Minimum-norm solution of an underdetermined full-row-rank system.
pub fn min_norm_solve(a: &CMat, b: &CVec) -> Result<CVec> {
    let aat = a * a.adjoint();
    let y = solve_dense(aat, b)?;
    Ok(a.adjoint() * y)
}

/// Largest singular value of `a` by power iteration on aᴴa, stopping when the
/// estimate changes by less than `rel_tol` relatively. The iteration matrix is
/// squared after every step (for up to 60 steps) so that clustered top
/// singular values still separate.
pub fn largest_singular_value(a: &CMat, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return Ok(0.0);
    }
    let mut g = a.adjoint() * a;
    let mut v = CVec::from_fn(n, |i, _| C64::new(1.0 + 0.1 * ((i * 7 + 3) % 11) as f64, 0.0));
    v /= C64::new(v.norm(), 0.0);
    let mut est = 0.0;
    for it in 0..max_iter {
        let sigma = (a * &v).norm();
        if it > 0 && (sigma - est).abs() <= rel_tol * sigma {
            return Ok(sigma.max(est));
        }
        est = sigma;
        let mut w = &g * &v;
        let nw = w.norm();
        if nw == 0.0 {
            return Ok(sigma);
        }
        w /= C64::new(nw, 0.0);
        v = w;
        if it < 60 {
            let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
            g = &g * &g;
            g /= C64::new(scale * scale, 0.0);
        }
    }
    Err(Error::PowerIterationStall {
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn least_squares_recovers_consistent_complex_solution() {
        let a = CMat::from_fn(7, 3, |i, j| {
            C64::new((i as f64 + 1.0).powi(j as i32), 0.3 * (i * j) as f64)
        });
        let x = CVec::from_vec(vec![C64::new(1.0, -2.0), C64::new(0.5, 0.25), C64::new(-3.0, 1.0)]);
        let b = &a * &x;
        let y = LeastSquares::new(a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(y.iter()) {
            assert_abs_diff_eq!((u - v).norm(), 0.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn banded_matches_dense() {
        let n = 12;
        let (kl, ku) = (2, 3);
        let mut band = Banded::new(n, kl, ku);
        let mut dense = CMat::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                let v = C64::new(((i * 3 + j * 5) % 7) as f64 - 3.0, (i as f64 - j as f64) * 0.1);
                band.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let x = band.solve(b.clone()).unwrap();
        let r = &dense * CVec::from_vec(x) - CVec::from_vec(b);
        assert!(r.norm() < 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6, 0.0, 2.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(11)).sum();
        assert_abs_diff_eq!(s, 2f64.powi(12) / 12.0, epsilon = 1e-10);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = CMat::from_row_slice(1, 3, &[C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 1.0)]);
        let z = nullspace(&a, 1e-13);
        assert_eq!(z.ncols(), 2);
        assert!((&a * &z).norm() < 1e-14);
    }

    #[test]
    fn power_iteration_diagonal() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(-3.0, 0.0), C64::new(2.0, 0.0)]));
        let s = largest_singular_value(&a, 1e-12, 10_000).unwrap();
        assert_abs_diff_eq!(s, 3.0, epsilon = 1e-9);
    }
}
