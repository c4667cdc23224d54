//! Discrete holomorphic functions: complex lattice maps whose quad cross
//! ratios factor through real edge factors. These are the Weierstrass and
//! Bryant data for the minimal and CMC 1 generators.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fmath;
use crate::grid::Grid;

/// Complex lattice function with real cross ratio factorization
/// q_{m,n} = a_h(m) / a_v(n).
#[derive(Debug, Clone)]
pub struct DiscreteHolo {
    pub g: Grid<Complex64>,
    pub a_h: Vec<f64>,
    pub a_v: Vec<f64>,
}

/// Complex cross ratio of a quad (g_p, g_q, g_r, g_s).
pub fn complex_cross_ratio(p: Complex64, q: Complex64, r: Complex64, s: Complex64) -> Result<Complex64> {
    let d1 = q - p;
    let d2 = r - q;
    let d3 = s - r;
    let d4 = p - s;
    let scale = abs_c(d1) + abs_c(d2) + abs_c(d3) + abs_c(d4);
    for d in [d1, d2, d3, d4] {
        if abs_c(d) <= 1e-15 * (1.0 + scale) {
            return Err(Error::Domain("repeated consecutive vertices"));
        }
    }
    Ok(d1 / d2 * d3 / d4)
}

fn abs_c(z: Complex64) -> f64 {
    fmath::hypot(z.re, z.im)
}

impl DiscreteHolo {
    pub fn rows(&self) -> usize {
        self.g.rows()
    }

    pub fn cols(&self) -> usize {
        self.g.cols()
    }

    /// Builds the factorization from the lattice values, verifying that all
    /// cross ratios are real and factor consistently.
    pub fn from_values(g: Grid<Complex64>, tol: f64) -> Result<DiscreteHolo> {
        let qrows = g.rows() - 1;
        let qcols = g.cols() - 1;
        let mut q_real = Grid::fill(qrows, qcols, 0.0f64);
        for m in 0..qrows {
            for n in 0..qcols {
                let q = complex_cross_ratio(g[(m, n)], g[(m + 1, n)], g[(m + 1, n + 1)], g[(m, n + 1)])?;
                if q.im.abs() > tol * (1.0 + abs_c(q)) {
                    return Err(Error::NotIsothermic { m, n, residual: q.im.abs() });
                }
                q_real[(m, n)] = q.re;
            }
        }
        // geometric-mean seed on the base row, then propagate
        let mut log_sum = 0.0;
        for n in 0..qcols {
            let q = q_real[(0, n)];
            if fmath::abs(q) < 1e-300 {
                return Err(Error::NotIsothermic { m: 0, n, residual: f64::INFINITY });
            }
            log_sum += fmath::ln(fmath::abs(q));
        }
        let mut a_h = alloc::vec![0.0f64; qrows];
        let mut a_v = alloc::vec![0.0f64; qcols];
        a_h[0] = fmath::exp(log_sum / qcols as f64);
        for n in 0..qcols {
            a_v[n] = a_h[0] / q_real[(0, n)];
        }
        for m in 1..qrows {
            a_h[m] = q_real[(m, 0)] * a_v[0];
        }
        for m in 0..qrows {
            for n in 0..qcols {
                let res = fmath::abs(q_real[(m, n)] - a_h[m] / a_v[n]) / (1.0 + fmath::abs(q_real[(m, n)]));
                if res > tol {
                    return Err(Error::NotIsothermic { m, n, residual: res });
                }
            }
        }
        // edge injectivity ("no umbilics"): g_q != g_p along both directions
        for m in 0..g.rows() {
            for n in 0..g.cols() {
                if m + 1 < g.rows() && abs_c(g[(m + 1, n)] - g[(m, n)]) < 1e-14 {
                    return Err(Error::Domain("g is not edge injective"));
                }
                if n + 1 < g.cols() && abs_c(g[(m, n + 1)] - g[(m, n)]) < 1e-14 {
                    return Err(Error::Domain("g is not edge injective"));
                }
            }
        }
        Ok(DiscreteHolo { g, a_h, a_v })
    }

    pub fn edge_factor(&self, p: (usize, usize), q: (usize, usize)) -> Result<f64> {
        if p.1 == q.1 && (p.0 + 1 == q.0 || q.0 + 1 == p.0) {
            Ok(self.a_h[p.0.min(q.0)])
        } else if p.0 == q.0 && (p.1 + 1 == q.1 || q.1 + 1 == p.1) {
            Ok(self.a_v[p.1.min(q.1)])
        } else {
            Err(Error::Domain("vertices are not adjacent"))
        }
    }
}

/// g_{m,n} = c (m + i n): all cross ratios are -1.
pub fn dhf_linear(c: Complex64, rows: usize, cols: usize) -> Result<DiscreteHolo> {
    if abs_c(c) == 0.0 {
        return Err(Error::Domain("c must be nonzero"));
    }
    let g = Grid::from_fn(rows, cols, |m, n| c * Complex64::new(m as f64, n as f64));
    DiscreteHolo::from_values(g, 1e-10)
}

/// g_{m,n} = exp(c1 m + i c2 n): constant cross ratio, computed from the
/// lattice values rather than assumed.
pub fn dhf_exp(c1: f64, c2: f64, rows: usize, cols: usize) -> Result<DiscreteHolo> {
    if c1 == 0.0 && c2 == 0.0 {
        return Err(Error::Domain("c1 and c2 must not both vanish"));
    }
    let k = fmath::abs(c2) / core::f64::consts::TAU;
    if fmath::abs(k - (k + 0.5) as i64 as f64) < 1e-12 && c2 != 0.0 && fmath::abs(c2) >= core::f64::consts::TAU - 1e-12 {
        return Err(Error::Domain("c2 multiple of 2 pi degenerates the lattice"));
    }
    if c2 == 0.0 {
        return Err(Error::Domain("pure-real exponent gives a collinear image"));
    }
    let g = Grid::from_fn(rows, cols, |m, n| {
        let re = fmath::exp(c1 * m as f64) * fmath::cos(c2 * n as f64);
        let im = fmath::exp(c1 * m as f64) * fmath::sin(c2 * n as f64);
        Complex64::new(re, im)
    });
    DiscreteHolo::from_values(g, 1e-9)
}

/// Root-finds c1 so that the exponential lattice has cross ratio -1, by
/// bisection on the directly computed quad cross ratio.
pub fn solve_c1(c2: f64, tol: f64) -> Result<f64> {
    let cr = |c1: f64| -> Result<f64> {
        let g = |m: f64, n: f64| {
            Complex64::new(
                fmath::exp(c1 * m) * fmath::cos(c2 * n),
                fmath::exp(c1 * m) * fmath::sin(c2 * n),
            )
        };
        let q = complex_cross_ratio(g(0.0, 0.0), g(1.0, 0.0), g(1.0, 1.0), g(0.0, 1.0))?;
        Ok(q.re)
    };
    let mut lo = 1e-8;
    let mut hi = 20.0;
    let f_lo = cr(lo)? + 1.0;
    let f_hi = cr(hi)? + 1.0;
    if f_lo.is_nan() || f_hi.is_nan() || f_lo * f_hi > 0.0 {
        return Err(Error::NoConvergence { what: "solve_c1 bracketing", residual: f_lo.min(f_hi) });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = cr(mid)? + 1.0;
        if fmath::abs(f_mid) < tol {
            return Ok(mid);
        }
        if f_lo * f_mid <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Discrete z^alpha for alpha in (0, 2): axis values by the three-point
/// recursion from the seeds g_00 = 0, g_10 = 1, g_01 = i^alpha, interior by
/// the cross-ratio -1 condition. The recursion then holds at every interior
/// vertex, which is verified and reported.
pub fn dhf_zalpha(alpha: f64, rows: usize, cols: usize, tol: f64) -> Result<(DiscreteHolo, f64)> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain("alpha must lie in (0, 2)"));
    }
    let mut g = Grid::fill(rows, cols, Complex64::new(0.0, 0.0));
    g[(0, 0)] = Complex64::new(0.0, 0.0);
    g[(1, 0)] = Complex64::new(1.0, 0.0);
    let half_pi = core::f64::consts::FRAC_PI_2;
    g[(0, 1)] = Complex64::new(fmath::cos(alpha * half_pi), fmath::sin(alpha * half_pi));
    // m-axis: alpha g_m = 2m (g_{m+1}-g_m)(g_m-g_{m-1})/(g_{m+1}-g_{m-1})
    for m in 1..rows - 1 {
        let prev = g[(m - 1, 0)];
        let here = g[(m, 0)];
        let a = here - prev;
        let t = here * (alpha / (2.0 * m as f64));
        let denom = a - t;
        if abs_c(denom) < 1e-14 {
            return Err(Error::Domain("z^alpha recursion denominator vanished"));
        }
        g[(m + 1, 0)] = here + t * a / denom;
    }
    // n-axis
    for n in 1..cols - 1 {
        let prev = g[(0, n - 1)];
        let here = g[(0, n)];
        let a = here - prev;
        let t = here * (alpha / (2.0 * n as f64));
        let denom = a - t;
        if abs_c(denom) < 1e-14 {
            return Err(Error::Domain("z^alpha recursion denominator vanished"));
        }
        g[(0, n + 1)] = here + t * a / denom;
    }
    // interior: cross ratio -1 determines g_r from g_p, g_q, g_s
    for m in 1..rows {
        for n in 1..cols {
            let gp = g[(m - 1, n - 1)];
            let gq = g[(m, n - 1)];
            let gs = g[(m - 1, n)];
            let a = gq - gp;
            let d = gp - gs;
            let denom = a - d;
            if abs_c(denom) < 1e-14 {
                return Err(Error::Domain("z^alpha interior fill degenerated"));
            }
            g[(m, n)] = (a * gs - d * gq) / denom;
        }
    }
    // the recursion holds automatically at interior vertices: verify
    let mut recursion_residual = 0.0f64;
    for m in 1..rows - 1 {
        for n in 1..cols - 1 {
            let gmn = g[(m, n)];
            let tm = {
                let num = (g[(m + 1, n)] - gmn) * (gmn - g[(m - 1, n)]);
                let den = g[(m + 1, n)] - g[(m - 1, n)];
                num / den * (2.0 * m as f64)
            };
            let tn = {
                let num = (g[(m, n + 1)] - gmn) * (gmn - g[(m, n - 1)]);
                let den = g[(m, n + 1)] - g[(m, n - 1)];
                num / den * (2.0 * n as f64)
            };
            let res = tm + tn - gmn * alpha;
            recursion_residual = recursion_residual.max(abs_c(res) / (1.0 + abs_c(gmn)));
        }
    }
    if recursion_residual > tol {
        return Err(Error::NoConvergence { what: "z^alpha recursion", residual: recursion_residual });
    }
    let holo = DiscreteHolo::from_values(g, 1e-8)?;
    Ok((holo, recursion_residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_cross_ratios() {
        for c in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)] {
            let h = dhf_linear(c, 5, 5).unwrap();
            for m in 0..4 {
                for n in 0..4 {
                    let q = h.a_h[m] / h.a_v[n];
                    assert!((q + 1.0).abs() < 1e-12);
                }
            }
            // factor split: a_h = 1, a_v = -1 with the geometric-mean seed
            assert!((h.a_h[0] - 1.0).abs() < 1e-12);
            assert!((h.a_v[0] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_cross_ratio_constant_and_solved() {
        let c2 = core::f64::consts::TAU / 8.0;
        // closed form c1 = 2 asinh(sin(c2/2)) should give cross ratio -1
        let c1 = 2.0 * (c2 / 2.0).sin().asinh();
        let h = dhf_exp(c1, c2, 6, 9).unwrap();
        for m in 0..5 {
            for n in 0..8 {
                assert!((h.a_h[m] / h.a_v[n] + 1.0).abs() < 1e-12);
            }
        }
        // the bisection solver finds the same c1
        let solved = solve_c1(c2, 1e-13).unwrap();
        assert!((solved - c1).abs() < 1e-6, "solved {solved} vs closed form {c1}");

        // generic exponent: constant cross ratio -sinh^2(c1/2)/sin^2(c2/2),
        // verified against the direct quad evaluation
        let (c1, c2) = (0.7, 1.1);
        let h = dhf_exp(c1, c2, 5, 5).unwrap();
        let expected = -((c1 / 2.0f64).sinh() / (c2 / 2.0f64).sin()).powi(2);
        for m in 0..4 {
            for n in 0..4 {
                let q = h.a_h[m] / h.a_v[n];
                assert!((q - expected).abs() < 1e-10 * (1.0 + expected.abs()));
            }
        }
        // c2 = pi: formula oracle again
        let h = dhf_exp(0.4, core::f64::consts::PI, 4, 4).unwrap();
        let expected = -((0.4f64 / 2.0).sinh() / (core::f64::consts::FRAC_PI_2).sin()).powi(2);
        let q = h.a_h[0] / h.a_v[0];
        assert!((q - expected).abs() < 1e-10);
        // collinear degenerate input flagged
        assert!(dhf_exp(0.5, 0.0, 4, 4).is_err());
    }

    #[test]
    fn zalpha_reduces_to_linear_at_one() {
        let (h, _) = dhf_zalpha(1.0, 6, 6, 1e-9).unwrap();
        for m in 0..6 {
            for n in 0..6 {
                let expected = Complex64::new(m as f64, n as f64);
                assert!(abs_c(h.g[(m, n)] - expected) < 1e-9, "({m},{n}): {:?}", h.g[(m, n)]);
            }
        }
    }

    #[test]
    fn zalpha_seed_and_interior_recursion() {
        let alpha = 0.5;
        let (h, _) = dhf_zalpha(alpha, 6, 6, 1e-9).unwrap();
        // g_{0,1} = i^alpha = e^{i pi/4} for alpha = 1/2
        let expected = Complex64::new((core::f64::consts::FRAC_PI_4).cos(), (core::f64::consts::FRAC_PI_4).sin());
        assert!(abs_c(h.g[(0, 1)] - expected) < 1e-12);

        let (h, resid) = dhf_zalpha(2.0 / 3.0, 8, 8, 1e-9).unwrap();
        assert!(resid < 1e-9, "interior recursion residual {resid}");
        // all cross ratios are -1
        for m in 0..7 {
            for n in 0..7 {
                assert!((h.a_h[m] / h.a_v[n] + 1.0).abs() < 1e-9);
            }
        }
    }
}
