//! Dense Cholesky factorization for reduced Laplacians.
//!
//! Matrices are square, row-major `Vec<f64>` buffers. The factor `R` is lower
//! triangular with `A = R Rᵀ`; only its lower triangle is meaningful.

use crate::error::{Error, Result};

/// Pivots at or below this fraction of the largest diagonal entry are treated
/// as numerical disconnection.
pub const PIVOT_RELATIVE_FLOOR: f64 = 1e-12;

/// Difference of two unit vectors `e_u - e_v` in reduced coordinates.
///
/// `None` marks the anchored vertex, whose coordinate is crossed out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairVector {
    pub plus: Option<usize>,
    pub minus: Option<usize>,
}

impl PairVector {
    pub fn new(plus: Option<usize>, minus: Option<usize>) -> Self {
        Self { plus, minus }
    }

    /// Smallest nonzero coordinate, if any.
    fn first_nonzero(&self) -> Option<usize> {
        match (self.plus, self.minus) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Inner product `aᵀ x`.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.plus.map_or(0.0, |i| x[i]) - self.minus.map_or(0.0, |i| x[i])
    }

    fn write_into(&self, buf: &mut [f64], scale: f64) {
        buf.fill(0.0);
        if let Some(i) = self.plus {
            buf[i] += scale;
        }
        if let Some(i) = self.minus {
            buf[i] -= scale;
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    n: usize,
    r: Vec<f64>,
}

impl Cholesky {
    /// Factors the row-major `n × n` matrix `a`. Only the lower triangle is read.
    pub fn factor(n: usize, a: &[f64]) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::Argument(format!(
                "matrix buffer has {} entries, expected {}",
                a.len(),
                n * n
            )));
        }
        let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0, f64::max);
        let floor = PIVOT_RELATIVE_FLOOR * max_diag;
        let mut r = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let s = dot(&r[i * n..i * n + j], &r[j * n..j * n + j]);
                r[i * n + j] = (a[i * n + j] - s) / r[j * n + j];
            }
            let s = dot(&r[i * n..i * n + i], &r[i * n..i * n + i]);
            let pivot = a[i * n + i] - s;
            if pivot.is_nan() || pivot <= floor {
                return Err(Error::Numerical(format!(
                    "Cholesky pivot {pivot:.3e} at row {i} is below {floor:.3e}; \
                     matrix is singular or ill-conditioned"
                )));
            }
            r[i * n + i] = pivot.sqrt();
        }
        Ok(Self { n, r })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)` of the factor, `j <= i`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.n + j]
    }

    /// `log det A = 2 Σ log R_ii`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.r[i * self.n + i].ln()).sum::<f64>()
    }

    /// Solves `R y = b` in place. Entries of `b` before `start` must be zero.
    fn forward_from(&self, b: &mut [f64], start: usize) {
        let n = self.n;
        for i in start..n {
            let s = dot(&self.r[i * n + start..i * n + i], &b[start..i]);
            b[i] = (b[i] - s) / self.r[i * n + i];
        }
    }

    /// Solves `Rᵀ x = y` in place.
    fn backward(&self, y: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let xi = y[i] / self.r[i * n + i];
            y[i] = xi;
            let row = &self.r[i * n..i * n + i];
            for (yj, rij) in y[..i].iter_mut().zip(row) {
                *yj -= rij * xi;
            }
        }
    }

    /// Solves `R y = b`.
    pub fn forward_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        let start = y.iter().position(|&x| x != 0.0).unwrap_or(self.n);
        self.forward_from(&mut y, start);
        y
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.forward_solve(b);
        self.backward(&mut x);
        x
    }

    /// `aᵀ A⁻¹ a` via one sparse forward substitution.
    pub fn quadratic_form_inverse(&self, a: PairVector) -> f64 {
        let Some(start) = a.first_nonzero() else {
            return 0.0;
        };
        let mut y = vec![0.0; self.n];
        a.write_into(&mut y, 1.0);
        self.forward_from(&mut y, start);
        dot(&y[start..], &y[start..])
    }

    /// `A⁻¹ a`.
    pub fn solve_pair(&self, a: PairVector) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        a.write_into(&mut x, 1.0);
        let start = a.first_nonzero().unwrap_or(self.n);
        self.forward_from(&mut x, start);
        self.backward(&mut x);
        x
    }

    /// Updates the factor in place so that it factors `A + w a aᵀ`, `w > 0`.
    #[allow(clippy::needless_range_loop)]
    pub fn rank_one_update(&mut self, a: PairVector, weight: f64) {
        let Some(start) = a.first_nonzero() else {
            return;
        };
        let n = self.n;
        let mut x = vec![0.0; n];
        a.write_into(&mut x, weight.sqrt());
        for j in start..n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let rjj = self.r[j * n + j];
            let rho = rjj.hypot(xj);
            let c = rho / rjj;
            let s = xj / rjj;
            self.r[j * n + j] = rho;
            for i in j + 1..n {
                let rij = (self.r[i * n + j] + s * x[i]) / c;
                self.r[i * n + j] = rij;
                x[i] = c * x[i] - s * rij;
            }
        }
    }

    /// Transposed inverse factor, for evaluating many quadratic forms at once.
    pub fn inverse_table(&self) -> InverseFactor {
        let n = self.n;
        // Row j of `zt` holds column j of R⁻¹, nonzero from index j onwards.
        let mut zt = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.fill(0.0);
            col[j] = 1.0;
            self.forward_from(&mut col, j);
            zt[j * n..(j + 1) * n].copy_from_slice(&col);
        }
        InverseFactor { n, zt }
    }
}

/// Columns of `R⁻¹`, so that `aᵀ A⁻¹ a = ‖R⁻¹ a‖²` costs O(n) per pair.
#[derive(Debug, Clone)]
pub struct InverseFactor {
    n: usize,
    zt: Vec<f64>,
}

impl InverseFactor {
    pub fn quadratic_form(&self, a: PairVector) -> f64 {
        let n = self.n;
        match (a.plus, a.minus) {
            (Some(u), Some(v)) => {
                let (lo, hi) = if u < v { (u, v) } else { (v, u) };
                let zl = &self.zt[lo * n..(lo + 1) * n];
                let zh = &self.zt[hi * n..(hi + 1) * n];
                // Column `hi` vanishes above row `hi`.
                let head = dot(&zl[lo..hi], &zl[lo..hi]);
                let tail: f64 = zl[hi..]
                    .iter()
                    .zip(&zh[hi..])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                head + tail
            }
            (Some(u), None) | (None, Some(u)) => {
                let z = &self.zt[u * n + u..(u + 1) * n];
                dot(z, z)
            }
            (None, None) => 0.0,
        }
    }
}
