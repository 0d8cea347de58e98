//! Symmetric tridiagonal eigensolver for the lowest few eigenpairs.
//!
//! Eigenvalues come from bisection on Sturm sequence counts, eigenvectors
//! from inverse iteration with a partially pivoted LU of `T - lambda I`.
//! Each new vector is reorthogonalised against the ones already found, which
//! also separates (near-)degenerate pairs. Everything is deterministic.

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    off_sq: Vec<f64>,
    pivmin: f64,
    norm: f64,
}

impl SymTridiagonal {
    /// `diag` has length `n`, `off` length `n - 1`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || off.len() + 1 != n {
            return Err(Error::InvalidParameter {
                name: "off",
                value: off.len() as f64,
                reason: "off-diagonal must have exactly n - 1 entries",
            });
        }
        if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "diag",
                value: f64::NAN,
                reason: "matrix entries must be finite",
            });
        }
        let off_sq: Vec<f64> = off.iter().map(|e| e * e).collect();
        let max_off_sq = off_sq.iter().cloned().fold(0.0, f64::max);
        let pivmin = f64::MIN_POSITIVE * max_off_sq.max(1.0);
        let norm = (0..n)
            .map(|i| {
                let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { off[i].abs() } else { 0.0 };
                diag[i].abs() + left + right
            })
            .fold(0.0, f64::max);
        Ok(Self {
            diag,
            off,
            off_sq,
            pivmin,
            norm,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < self.pivmin {
            q = -self.pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            q = self.diag[i] - x - self.off_sq[i - 1] / q;
            if q.abs() < self.pivmin {
                q = -self.pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let k = k.min(self.len());
        if k == 0 {
            return Vec::new();
        }
        let (g_lo, g_hi) = self.gershgorin();
        let spread = (g_hi - g_lo).max(self.pivmin);
        let g_lo = g_lo - 2.0 * EPS * spread - self.pivmin;
        let g_hi = g_hi + 2.0 * EPS * spread + self.pivmin;

        // grow an upper bracket for the k-th eigenvalue from the bottom of the spectrum
        let mut step = 1.0f64.max(1e-6 * spread);
        let mut top = g_lo + step;
        while top < g_hi && self.count_below(top) < k {
            step *= 2.0;
            top = (g_lo + step).min(g_hi);
        }
        let top = top.min(g_hi);

        let mut lower = vec![g_lo; k];
        let mut upper = vec![top; k];
        let mut values = Vec::with_capacity(k);
        for j in 0..k {
            let (mut lo, mut hi) = (lower[j], upper[j]);
            for _ in 0..256 {
                let mid = 0.5 * (lo + hi);
                let width = hi - lo;
                if width <= 2.0 * EPS * lo.abs().max(hi.abs()) + self.pivmin || mid <= lo || mid >= hi {
                    break;
                }
                let c = self.count_below(mid);
                for u in upper.iter_mut().take(c.min(k)) {
                    *u = u.min(mid);
                }
                for l in lower.iter_mut().skip(c) {
                    *l = l.max(mid);
                }
                if c > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            values.push(0.5 * (lo + hi));
        }
        values
    }

    /// Unit-norm eigenvector for the eigenvalue `lambda`, orthogonal to `previous`.
    pub fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.len();
        if n == 1 {
            return Ok(vec![1.0]);
        }
        let lu = ShiftedLu::factor(self, lambda);
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64) * 0.754_877_666 + 0.1).sin())
            .collect();
        normalize(&mut x);

        let tol = 100.0 * (n as f64).sqrt() * EPS * self.norm.max(1.0);
        let mut residual = f64::INFINITY;
        const MAX_ITER: usize = 6;
        for _ in 0..MAX_ITER {
            lu.solve(&mut x);
            for _ in 0..2 {
                for p in previous {
                    let d = dot(&x, p);
                    for (xi, pi) in x.iter_mut().zip(p) {
                        *xi -= d * pi;
                    }
                }
            }
            if normalize(&mut x) == 0.0 {
                return Err(Error::NoConvergence {
                    what: "inverse iteration",
                    iterations: 0,
                    residual: f64::INFINITY,
                });
            }
            residual = self.residual(lambda, &x);
            if residual <= tol {
                break;
            }
        }
        if residual > tol * 1e3 {
            return Err(Error::NoConvergence {
                what: "inverse iteration",
                iterations: MAX_ITER,
                residual,
            });
        }
        let pivot = x
            .iter()
            .cloned()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(x)
    }

    /// `|| T x - lambda x ||_2`.
    pub fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        let n = self.len();
        let mut acc = 0.0;
        for i in 0..n {
            let mut r = (self.diag[i] - lambda) * x[i];
            if i > 0 {
                r += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                r += self.off[i] * x[i + 1];
            }
            acc += r * r;
        }
        acc.sqrt()
    }

    /// Lowest `k` eigenpairs; vectors are unit-norm in the Euclidean sense.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let values = self.lowest_eigenvalues(k);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        for &v in &values {
            let x = self.eigenvector(v, &vectors)?;
            vectors.push(x);
        }
        Ok((values, vectors))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// LU factorisation with partial pivoting of `T - shift I`.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.len();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - shift).collect();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = EPS * t.norm.max(f64::MIN_POSITIVE);

        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        // guard against overflow on the next sweep
        let m = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m > 1e150 {
            b.iter_mut().for_each(|v| *v /= m);
        }
    }
}
