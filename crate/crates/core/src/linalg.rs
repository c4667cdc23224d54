//! Small dense linear algebra: LU solves with partial pivoting, cyclic
//! Jacobi eigendecomposition of symmetric matrices, numerical nullspaces,
//! and real-polynomial roots via companion-matrix eigenvalues.
//!
//! Everything here targets tiny systems (n <= 10 or so); robustness is
//! preferred over speed throughout.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fmath;

/// Dense row-major matrix view used by the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: alloc::vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Mat {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        let mut out = alloc::vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut s = 0.0;
            for j in 0..self.cols {
                s += self[(i, j)] * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(fmath::abs(x)))
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &Mat) -> f64 {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    let mut sign = 1.0;
    let mut out = 1.0;
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if fmath::abs(m[(row, col)]) > fmath::abs(m[(pivot, col)]) {
                pivot = row;
            }
        }
        if m[(pivot, col)] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(pivot, j)];
                m[(pivot, j)] = tmp;
            }
            sign = -sign;
        }
        out *= m[(col, col)];
        for row in col + 1..n {
            let f = m[(row, col)] / m[(col, col)];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m[(col, j)];
                m[(row, j)] -= f * v;
            }
        }
    }
    sign * out
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
pub fn lu_solve(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(a.rows, a.cols);
    assert_eq!(a.rows, b.len());
    let n = a.rows;
    let mut m = a.clone();
    let mut x: Vec<f64> = b.into();
    let scale = m.max_abs().max(1e-300);
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if fmath::abs(m[(row, col)]) > fmath::abs(m[(pivot, col)]) {
                pivot = row;
            }
        }
        if fmath::abs(m[(pivot, col)]) <= 1e-14 * scale {
            return Err(Error::SingularSystem);
        }
        if pivot != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(pivot, j)];
                m[(pivot, j)] = tmp;
            }
            x.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = m[(row, col)] / m[(col, col)];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m[(col, j)];
                m[(row, j)] -= f * v;
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for j in col + 1..n {
            s -= m[(col, j)] * x[j];
        }
        x[col] = s / m[(col, col)];
    }
    Ok(x)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues and the matrix whose columns are the corresponding
/// orthonormal eigenvectors.
pub fn sym_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    // enforce exact symmetry against accumulated asymmetric rounding
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let mut v = Mat::identity(n);
    let scale = m.max_abs().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(fmath::abs(m[(i, j)]));
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if fmath::abs(apq) <= 1e-18 * scale {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + fmath::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + fmath::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / fmath::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eig = (0..n).map(|i| m[(i, i)]).collect();
    (eig, v)
}

/// Singular values of a rectangular matrix, descending.
///
/// One-sided Jacobi on the column vectors of the taller orientation: small
/// singular values come out as plain vector norms, with no squaring loss.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let b = if a.rows >= a.cols { a.clone() } else { a.transpose() };
    let (m, n) = (b.rows, b.cols);
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| b[(i, j)]).collect()).collect();
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(a, b)| a * b).sum() };
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let d = dot(&cols[i], &cols[j]);
                let aii = dot(&cols[i], &cols[i]);
                let ajj = dot(&cols[j], &cols[j]);
                if fmath::abs(d) <= 1e-16 * fmath::sqrt(aii * ajj).max(1e-300) {
                    continue;
                }
                rotated = true;
                let theta = 0.5 * fmath::atan2(2.0 * d, aii - ajj);
                let (c, s) = (fmath::cos(theta), fmath::sin(theta));
                for r in 0..m {
                    let vi = cols[i][r];
                    let vj = cols[j][r];
                    cols[i][r] = c * vi + s * vj;
                    cols[j][r] = -s * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| fmath::sqrt(dot(c, c))).collect();
    sv.sort_unstable_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// Numerical rank at the given relative singular-value threshold.
pub fn numerical_rank(a: &Mat, rel_tol: f64) -> usize {
    let sv = singular_values(a);
    if sv.is_empty() || sv[0] == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * sv[0]).count()
}

/// Orthonormal basis of the numerical nullspace of A (right null vectors),
/// using the relative threshold `rel_tol` on singular values.
pub fn nullspace(a: &Mat, rel_tol: f64) -> Vec<Vec<f64>> {
    let gram = a.transpose().matmul(a);
    let (eig, v) = sym_eigen(&gram);
    let sigma_max = eig.iter().fold(0.0f64, |m, &e| m.max(e.max(0.0))).max(0.0);
    let sigma_max = fmath::sqrt(sigma_max);
    let mut out = Vec::new();
    for (i, &e) in eig.iter().enumerate() {
        let sigma = fmath::sqrt(e.max(0.0));
        if sigma <= rel_tol * sigma_max.max(1e-300) {
            out.push((0..a.cols).map(|r| v[(r, i)]).collect());
        }
    }
    out
}

/// Roots of the real polynomial c[0] + c[1] x + ... + c[n] x^n, computed as
/// the eigenvalues of the balanced companion matrix (Francis double-shift QR
/// on the Hessenberg form).
pub fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    // strip trailing zero leading coefficients
    let mut deg = coeffs.len();
    let max_c = coeffs.iter().fold(0.0f64, |m, &c| m.max(fmath::abs(c)));
    if max_c == 0.0 {
        return Vec::new();
    }
    while deg > 1 && fmath::abs(coeffs[deg - 1]) <= 1e-14 * max_c {
        deg -= 1;
    }
    let n = deg - 1; // polynomial degree
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return alloc::vec![Complex64::new(-coeffs[0] / coeffs[1], 0.0)];
    }
    if n == 2 {
        let (a, b, c) = (coeffs[2], coeffs[1], coeffs[0]);
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = fmath::sqrt(disc);
            // avoid cancellation
            let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
            let r1 = q / a;
            let r2 = if q != 0.0 { c / q } else { 0.0 };
            return alloc::vec![Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)];
        } else {
            let sq = fmath::sqrt(-disc);
            return alloc::vec![
                Complex64::new(-b / (2.0 * a), sq / (2.0 * a)),
                Complex64::new(-b / (2.0 * a), -sq / (2.0 * a)),
            ];
        }
    }

    // companion matrix (already upper Hessenberg)
    let lead = coeffs[n];
    let mut h = Mat::zeros(n, n);
    for i in 0..n {
        h[(i, n - 1)] = -coeffs[i] / lead;
    }
    for i in 1..n {
        h[(i, i - 1)] = 1.0;
    }
    balance(&mut h);
    hessenberg_eigenvalues(h)
}

/// Real roots of a polynomial: companion eigenvalues with |Im| below
/// `imag_tol` relative to the root magnitude.
pub fn real_poly_roots(coeffs: &[f64], imag_tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = poly_roots(coeffs)
        .into_iter()
        .filter(|z| fmath::abs(z.im) <= imag_tol * (1.0 + fmath::hypot(z.re, z.im)))
        .map(|z| z.re)
        .collect();
    out.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

fn balance(h: &mut Mat) {
    let n = h.rows;
    // simple iterative balancing in powers of 2
    for _ in 0..10 {
        let mut converged = true;
        for i in 0..n {
            let mut row = 0.0;
            let mut col = 0.0;
            for j in 0..n {
                if i != j {
                    row += fmath::abs(h[(i, j)]);
                    col += fmath::abs(h[(j, i)]);
                }
            }
            if row == 0.0 || col == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let mut c = col;
            while c < row / 2.0 {
                c *= 2.0;
                f *= 2.0;
            }
            while c > row * 2.0 {
                c /= 2.0;
                f /= 2.0;
            }
            if f != 1.0 {
                converged = false;
                for j in 0..n {
                    h[(i, j)] /= f;
                }
                for j in 0..n {
                    h[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Eigenvalues of a real upper-Hessenberg matrix by the shifted QR iteration
/// with deflation (Wilkinson-style double shift handled through explicit
/// 2x2 block resolution).
fn hessenberg_eigenvalues(mut h: Mat) -> Vec<Complex64> {
    let mut n = h.rows;
    let mut out = Vec::with_capacity(n);
    let scale = h.max_abs().max(1e-300);
    let eps = 1e-15 * scale;
    let mut iter_budget = 60 * n;

    while n > 0 {
        if n == 1 {
            out.push(Complex64::new(h[(0, 0)], 0.0));
            break;
        }
        // find deflation point
        let mut l = n - 1;
        while l > 0 {
            let small = fmath::abs(h[(l, l - 1)])
                <= 1e-14 * (fmath::abs(h[(l, l)]) + fmath::abs(h[(l - 1, l - 1)])).max(eps);
            if small {
                break;
            }
            l -= 1;
        }
        if l == n - 1 {
            out.push(Complex64::new(h[(n - 1, n - 1)], 0.0));
            n -= 1;
            continue;
        }
        if l == n - 2 {
            // resolve the trailing 2x2 block exactly
            let a = h[(n - 2, n - 2)];
            let b = h[(n - 2, n - 1)];
            let c = h[(n - 1, n - 2)];
            let d = h[(n - 1, n - 1)];
            let tr = a + d;
            let det = a * d - b * c;
            let disc = tr * tr - 4.0 * det;
            if disc >= 0.0 {
                let sq = fmath::sqrt(disc);
                out.push(Complex64::new(0.5 * (tr + sq), 0.0));
                out.push(Complex64::new(0.5 * (tr - sq), 0.0));
            } else {
                let sq = fmath::sqrt(-disc);
                out.push(Complex64::new(0.5 * tr, 0.5 * sq));
                out.push(Complex64::new(0.5 * tr, -0.5 * sq));
            }
            n -= 2;
            continue;
        }
        if iter_budget == 0 {
            // give up gracefully: report remaining diagonal entries
            for i in 0..n {
                out.push(Complex64::new(h[(i, i)], 0.0));
            }
            break;
        }
        iter_budget -= 1;

        // Wilkinson shift from the trailing 2x2 of the active block
        let a = h[(n - 2, n - 2)];
        let b = h[(n - 2, n - 1)];
        let c = h[(n - 1, n - 2)];
        let d = h[(n - 1, n - 1)];
        let tr = a + d;
        let det = a * d - b * c;
        let disc = tr * tr - 4.0 * det;
        let shift = if disc >= 0.0 {
            let sq = fmath::sqrt(disc);
            let e1 = 0.5 * (tr + sq);
            let e2 = 0.5 * (tr - sq);
            if fmath::abs(e1 - d) < fmath::abs(e2 - d) {
                e1
            } else {
                e2
            }
        } else {
            // complex pair: use the real part (implicit single shift still
            // converges to the 2x2 deflation handled above)
            0.5 * tr
        };

        // shifted QR step on the active window l..n via Givens rotations
        let lo = l;
        let hi = n;
        for i in lo..hi {
            h[(i, i)] -= shift;
        }
        let mut rot = Vec::with_capacity(hi - lo - 1);
        for i in lo..hi - 1 {
            let x = h[(i, i)];
            let y = h[(i + 1, i)];
            let r = fmath::hypot(x, y);
            let (cs, sn) = if r == 0.0 { (1.0, 0.0) } else { (x / r, y / r) };
            rot.push((cs, sn));
            for j in i..hi {
                let hi_j = h[(i, j)];
                let hip_j = h[(i + 1, j)];
                h[(i, j)] = cs * hi_j + sn * hip_j;
                h[(i + 1, j)] = -sn * hi_j + cs * hip_j;
            }
        }
        for (idx, &(cs, sn)) in rot.iter().enumerate() {
            let i = lo + idx;
            let top = if i + 2 < hi { i + 2 } else { hi - 1 };
            for j in lo..=top {
                let h_ji = h[(j, i)];
                let h_jip = h[(j, i + 1)];
                h[(j, i)] = cs * h_ji + sn * h_jip;
                h[(j, i + 1)] = -sn * h_ji + cs * h_jip;
            }
        }
        for i in lo..hi {
            h[(i, i)] += shift;
        }
    }
    out
}
