//! Small dense matrices sized for hypersurface dimensions (n <= 4 in
//! practice, arbitrary n supported).

use alloc::vec;
use alloc::vec::Vec;

/// Row-major square matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row length must equal matrix dimension");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { n: self.n, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { n: self.n, data }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Symmetric part `(A + A^T) / 2`.
    pub fn sym_part(&self) -> Self {
        self.add(&self.transpose()).scale(0.5)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(libm::fabs(v)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    /// Max-entry norm of `A - A^T`.
    pub fn asymmetry(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                m = m.max(libm::fabs(self.get(i, j) - self.get(j, i)));
            }
        }
        m
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol * self.max_abs().max(1.0)
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut piv = col;
            let mut best = libm::fabs(a[col * n + col]);
            for row in (col + 1)..n {
                let v = libm::fabs(a[row * n + col]);
                if v > best {
                    best = v;
                    piv = row;
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for row in (col + 1)..n {
                let f = a[row * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[row * n + j] -= f * a[col * n + j];
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    /// Returns `None` when a pivot vanishes to machine precision.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let mut piv = col;
            let mut best = libm::fabs(a[col * n + col]);
            for row in (col + 1)..n {
                let v = libm::fabs(a[row * n + col]);
                if v > best {
                    best = v;
                    piv = row;
                }
            }
            if best == 0.0 {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                    inv.data.swap(col * n + j, piv * n + j);
                }
            }
            let d = a[col * n + col];
            for j in 0..n {
                a[col * n + j] /= d;
                inv.data[col * n + j] /= d;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = a[row * n + col];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[row * n + j] -= f * a[col * n + j];
                    inv.data[row * n + j] -= f * inv.data[col * n + j];
                }
            }
        }
        Some(inv)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
    /// sorted in descending order.
    pub fn sym_eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = self.sym_part();
        let scale = a.max_abs().max(1.0);
        for _sweep in 0..64 {
            let mut off = 0.0_f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(libm::fabs(a.get(i, j)));
                }
            }
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if libm::fabs(apq) <= 1e-300 {
                        continue;
                    }
                    let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + libm::sqrt(theta * theta + 1.0))
                    } else {
                        -1.0 / (-theta + libm::sqrt(theta * theta + 1.0))
                    };
                    let c = 1.0 / libm::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
        eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
        eig
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn from_slice(n: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, data: data.to_vec() }
    }
}

/// Solves a cyclically tridiagonal system by the Sherman-Morrison trick on
/// top of the Thomas algorithm.
///
/// The matrix has diagonal `diag`, subdiagonal `sub` (`sub[i]` multiplies
/// `x[i-1]`, with `sub[0]` the top-right corner entry multiplying `x[n-1]`)
/// and superdiagonal `sup` (`sup[i]` multiplies `x[i+1]`, with `sup[n-1]`
/// the bottom-left corner entry multiplying `x[0]`).
pub fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(n >= 3, "cyclic tridiagonal solve needs n >= 3");
    assert_eq!(sub.len(), n);
    assert_eq!(sup.len(), n);
    assert_eq!(rhs.len(), n);

    let alpha = sub[0]; // corner (0, n-1)
    let beta = sup[n - 1]; // corner (n-1, 0)
    let gamma = -diag[0];

    let mut d = diag.to_vec();
    d[0] = diag[0] - gamma;
    d[n - 1] = diag[n - 1] - alpha * beta / gamma;

    let y = solve_tridiagonal(sub, &d, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = beta;
    let z = solve_tridiagonal(sub, &d, sup, &u);

    let vy = y[0] + alpha / gamma * y[n - 1];
    let vz = z[0] + alpha / gamma * z[n - 1];
    let factor = vy / (1.0 + vz);
    y.iter().zip(&z).map(|(yi, zi)| yi - factor * zi).collect()
}

/// Thomas algorithm for a strictly tridiagonal system (no wrap entries;
/// `sub[0]` and `sup[n-1]` are ignored).
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    x
}

/// Bisection for a sign change of `f` bracketed by `[a, b]`.
/// Both endpoint values must have opposite signs.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    let fb = f(b);
    debug_assert!(fa * fb <= 0.0, "bisect requires a sign change");
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if libm::fabs(b - a) <= tol {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse_small() {
        let m = SquareMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        assert!((m.det() - 5.0).abs() < 1e-14);
        let inv = m.inverse().unwrap();
        let prod = m.matmul(&inv);
        assert!(prod.sub(&SquareMatrix::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn det_singular() {
        let m = SquareMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(m.det(), 0.0);
        assert!(m.inverse().is_none());
    }

    #[test]
    fn eigenvalues_symmetric_3x3() {
        // diag(3, 1, -2) conjugated by a rotation keeps the spectrum.
        let m = SquareMatrix::from_rows(&[
            &[2.0, 1.0, 0.0],
            &[1.0, 2.0, 0.5],
            &[0.0, 0.5, -2.0],
        ]);
        let eig = m.sym_eigenvalues();
        let tr: f64 = eig.iter().sum();
        assert!((tr - m.trace()).abs() < 1e-12);
        let frob2: f64 = eig.iter().map(|l| l * l).sum();
        assert!((frob2 - m.frobenius_norm().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn cyclic_tridiagonal_matches_dense() {
        let n = 6;
        let sub = [0.7, -0.3, 0.2, -0.1, 0.4, 0.25];
        let diag = [4.0, 3.5, 4.2, 3.9, 4.1, 3.7];
        let sup = [0.3, 0.2, -0.4, 0.1, -0.2, 0.5];
        let rhs = [1.0, -2.0, 0.5, 3.0, -1.5, 0.25];
        let x = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs);

        let mut dense = SquareMatrix::zeros(n);
        for i in 0..n {
            dense.set(i, i, diag[i]);
            dense.set(i, (i + n - 1) % n, sub[i]);
            dense.set(i, (i + 1) % n, sup[i]);
        }
        let inv = dense.inverse().unwrap();
        for i in 0..n {
            let xi: f64 = (0..n).map(|j| inv.get(i, j) * rhs[j]).sum();
            assert!((x[i] - xi).abs() < 1e-12, "component {i}: {} vs {}", x[i], xi);
        }
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12);
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-11);
    }
}
