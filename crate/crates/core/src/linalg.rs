//! Small dense complex matrices: determinants, inverses and eigenvalues.
//!
//! Sizes here never exceed a handful of rows, so everything is plain
//! row-major storage and textbook algorithms.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
// shadowed by inherent methods whenever std is linked
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "matrix must be square");
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Self {
        let c: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&c)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).norm());
            }
        }
        worst
    }

    /// Determinant by LU factorisation with partial pivoting.
    pub fn det(&self) -> Complex64 {
        let n = self.n;
        let mut a = self.clone();
        let mut det = Complex64::one();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
                .unwrap();
            if a[(p, k)].is_zero() {
                return Complex64::zero();
            }
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            let piv = a[(k, k)];
            det *= piv;
            for i in k + 1..n {
                let f = a[(i, k)] / piv;
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.n {
            self.data.swap(a * self.n + j, b * self.n + j);
        }
    }

    /// Inverse by Gauss-Jordan elimination, `None` when a pivot is negligible.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let scale = self.max_abs();
        if scale == 0.0 {
            return None;
        }
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
                .unwrap();
            if a[(p, k)].norm() <= 1e-13 * scale {
                return None;
            }
            a.swap_rows(p, k);
            inv.swap_rows(p, k);
            let piv = a[(k, k)].inv();
            for j in 0..n {
                a[(k, j)] *= piv;
                inv[(k, j)] *= piv;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)];
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let (akj, ikj) = (a[(k, j)], inv[(k, j)]);
                    a[(i, j)] -= f * akj;
                    inv[(i, j)] -= f * ikj;
                }
            }
        }
        Some(inv)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Upper Hessenberg form by Householder reflections (similar to `self`).
    pub fn hessenberg(&self) -> Self {
        let n = self.n;
        let mut h = self.clone();
        if n < 3 {
            return h;
        }
        for k in 0..n - 2 {
            let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
            let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let phase = if x[0].is_zero() {
                Complex64::one()
            } else {
                x[0] / x[0].norm()
            };
            let mut v = x.clone();
            v[0] += phase * norm;
            let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if vnorm == 0.0 {
                continue;
            }
            for c in v.iter_mut() {
                *c /= vnorm;
            }
            // H <- P H with P = I - 2 v v^H on rows k+1..n
            for j in 0..n {
                let w: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)])
                    .sum();
                for (i, vi) in v.iter().enumerate() {
                    h[(k + 1 + i, j)] -= vi * w * 2.0;
                }
            }
            // H <- H P on columns k+1..n
            for i in 0..n {
                let w: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(j, vj)| h[(i, k + 1 + j)] * vj)
                    .sum();
                for (j, vj) in v.iter().enumerate() {
                    h[(i, k + 1 + j)] -= w * vj.conj() * 2.0;
                }
            }
            for i in k + 2..n {
                h[(i, k)] = Complex64::zero();
            }
        }
        h
    }

    /// Eigenvalues by Hessenberg reduction and shifted QR with deflation.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut h = self.hessenberg();
        let mut eig = vec![Complex64::zero(); n];
        if n == 0 {
            return eig;
        }
        let scale = self.max_abs().max(f64::min_positive_value());
        let mut hi = n - 1;
        let mut iter = 0usize;
        loop {
            if hi == 0 {
                eig[0] = h[(0, 0)];
                break;
            }
            let mut l = hi;
            while l > 0 {
                let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
                let s = if s == 0.0 { scale } else { s };
                if h[(l, l - 1)].norm() <= f64::EPSILON * s {
                    h[(l, l - 1)] = Complex64::zero();
                    break;
                }
                l -= 1;
            }
            if l == hi {
                eig[hi] = h[(hi, hi)];
                hi -= 1;
                iter = 0;
                continue;
            }
            iter += 1;
            if iter > 500 {
                // Give up on further convergence; report the diagonal.
                for (k, e) in eig.iter_mut().enumerate().take(hi + 1) {
                    *e = h[(k, k)];
                }
                break;
            }
            let (a, b, c, d) = (
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            let mut mu = if iter % 11 == 10 {
                d + c.norm() * 0.75
            } else {
                let half = (a - d) * 0.5;
                let disc = (half * half + b * c).sqrt();
                let m1 = (a + d) * 0.5 + disc;
                let m2 = (a + d) * 0.5 - disc;
                if (m1 - d).norm() < (m2 - d).norm() {
                    m1
                } else {
                    m2
                }
            };
            if !mu.is_finite() {
                mu = d;
            }
            qr_step(&mut h, l, hi, mu);
        }
        eig
    }
}

/// One shifted QR sweep on the active block `lo..=hi` of a Hessenberg matrix.
fn qr_step(h: &mut CMatrix, lo: usize, hi: usize, mu: Complex64) {
    for k in lo..=hi {
        h[(k, k)] -= mu;
    }
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (1.0, Complex64::zero())
        } else if a.is_zero() {
            (0.0, b.conj() / b.norm())
        } else {
            (a.norm() / r, (a / a.norm()) * b.conj() / r)
        };
        for j in k..=hi {
            let (x, y) = (h[(k, j)], h[(k + 1, j)]);
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        rots.push((c, s));
    }
    for (idx, (c, s)) in rots.into_iter().enumerate() {
        let k = lo + idx;
        for i in lo..=hi.min(k + 2) {
            let (x, y) = (h[(i, k)], h[(i, k + 1)]);
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += mu;
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut StdRng, n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    #[test]
    fn det_and_inverse() {
        let m = CMatrix::from_real(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((m.det() - c(3.0, 0.0)).norm() < 1e-15);
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        assert!(id.sub(&CMatrix::identity(2)).max_abs() < 1e-15);
        let sing = CMatrix::from_real(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn eigenvalues_equal_modulus() {
        // unshifted QR stalls on this one
        let m = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 2.0)],
        ]);
        let mut e = m.eigenvalues();
        e.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((e[0] - c(0.0, 2.0)).norm() < 1e-14);
        assert!((e[1] - c(2.0, 0.0)).norm() < 1e-14);

        let rot = CMatrix::from_real(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        let e = rot.eigenvalues();
        let prod = e[0] * e[1];
        assert!((prod - c(1.0, 0.0)).norm() < 1e-13);
        assert!((e[0] + e[1]).norm() < 1e-13);
    }

    #[test]
    fn eigenvalues_match_det_and_trace() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in 1..=5 {
            for _ in 0..40 {
                let m = random_matrix(&mut rng, n);
                let e = m.eigenvalues();
                let prod: Complex64 = e.iter().product();
                let sum: Complex64 = e.iter().sum();
                let trace: Complex64 = (0..n).map(|i| m[(i, i)]).sum();
                let det = m.det();
                assert!((prod - det).norm() <= 1e-10 * det.norm().max(1.0), "n={n}");
                assert!(
                    (sum - trace).norm() <= 1e-10 * trace.norm().max(1.0),
                    "n={n}"
                );
            }
        }
    }

    #[test]
    fn hessenberg_is_similar() {
        let mut rng = StdRng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 4);
        let h = m.hessenberg();
        for i in 2..4 {
            for j in 0..i - 1 {
                assert!(h[(i, j)].norm() < 1e-14);
            }
        }
        assert!((h.det() - m.det()).norm() < 1e-12);
    }
}
