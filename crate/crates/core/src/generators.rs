//! Constructors for explicit discrete nets: minimal nets in R^3 from
//! discrete holomorphic data, CMC 1 nets in H^3 from the discrete Bryant
//! equation, CMC surfaces of revolution in any space form, and sampled
//! smooth maximal surfaces via the Weierstrass-type integral.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::conserved::ConservedQuantity;
use crate::dhf::DiscreteHolo;
use crate::error::{Error, Result};
use crate::fmath;
use crate::grid::Grid;
use crate::mink::{hermitian_to_poincare, MinkVec, SpaceForm};
use crate::net::QuadNet;
use crate::quat::Quaternion;

fn c_to_quat(z: Complex64) -> Quaternion {
    // the complex plane sits in the quaternions as span{1, i}
    Quaternion::new(z.re, z.im, 0.0, 0.0)
}

/// Discrete minimal net in R^3 from a discrete holomorphic function:
/// edge increments (i - g_p j) j (a_pq/(g_q - g_p)) (i - g_q j), integrated
/// from the base vertex. Quad closure holds for exact holomorphic input and
/// is verified here.
pub fn minimal_net(holo: &DiscreteHolo, tol: f64) -> Result<QuadNet> {
    let rows = holo.rows();
    let cols = holo.cols();
    let incr = |p: (usize, usize), q: (usize, usize)| -> Result<Quaternion> {
        let gp = holo.g[p];
        let gq = holo.g[q];
        let a = holo.edge_factor(p, q)?;
        let dg = gq - gp;
        if fmath::hypot(dg.re, dg.im) < 1e-14 {
            return Err(Error::Domain("g is not edge injective"));
        }
        let left = Quaternion::I - c_to_quat(gp) * Quaternion::J;
        let right = Quaternion::I - c_to_quat(gq) * Quaternion::J;
        let middle = c_to_quat(Complex64::new(a, 0.0) / dg);
        let d = left * Quaternion::J * middle * right;
        // the increment is imaginary for any holomorphic data
        if fmath::abs(d.re()) > 1e-12 * (1.0 + d.norm()) {
            return Err(Error::Domain("minimal edge increment is not imaginary"));
        }
        Ok(d.im())
    };
    // quad closure: the four summed increments vanish
    let mut worst: Option<(usize, usize, f64)> = None;
    for m in 0..rows - 1 {
        for n in 0..cols - 1 {
            let p = (m, n);
            let q = (m + 1, n);
            let r = (m + 1, n + 1);
            let s = (m, n + 1);
            let total = incr(p, q)? + incr(q, r)? - incr(s, r)? - incr(p, s)?;
            let scale = incr(p, q)?.norm() + incr(p, s)?.norm();
            let res = total.norm() / (1.0 + scale);
            if worst.map(|w| res > w.2).unwrap_or(true) {
                worst = Some((m, n, res));
            }
        }
    }
    if let Some((m, n, res)) = worst {
        if res > tol {
            return Err(Error::ClosureFailure { m, n, residual: res });
        }
    }
    let mut verts = Grid::fill(rows, cols, Quaternion::ZERO);
    for m in 0..rows {
        for n in 0..cols {
            if n > 0 {
                verts[(m, n)] = verts[(m, n - 1)] + incr((m, n - 1), (m, n))?;
            } else if m > 0 {
                verts[(m, n)] = verts[(m - 1, n)] + incr((m - 1, n), (m, n))?;
            }
        }
    }
    let mut net = QuadNet::new(0.0, verts);
    net.set_factors(holo.a_h.clone(), holo.a_v.clone());
    Ok(net)
}

/// 2x2 complex matrix helper for the Bryant propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl CMat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> CMat2 {
        CMat2 { a, b, c, d }
    }

    pub fn identity() -> CMat2 {
        CMat2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn mul(&self, o: &CMat2) -> CMat2 {
        CMat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn max_abs(&self) -> f64 {
        let n = |z: Complex64| fmath::hypot(z.re, z.im);
        n(self.a).max(n(self.b)).max(n(self.c)).max(n(self.d))
    }

    fn sub(&self, o: &CMat2) -> CMat2 {
        CMat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

/// Discrete CMC 1 net in H^3: the Bryant frame F and the surface
/// e = F conj(F)^t / det F, reported in the Hermitian model, together with
/// its Poincare-ball coordinates as a kappa = -1 quad net.
#[derive(Debug, Clone)]
pub struct BryantNet {
    pub frame: Grid<CMat2>,
    pub hermitian: Grid<[[Complex64; 2]; 2]>,
    /// Poincare-ball vertices; the ball is the kappa = -1 chart.
    pub net: QuadNet,
    /// Worst |Im det F| relative to |det F|.
    pub det_drift: f64,
    /// Worst relative plaquette residual of the frame propagation.
    pub compat_residual: f64,
    /// Worst deviation of the Hermitian vertices from det 1 / positive trace.
    pub membership_residual: f64,
}

/// Propagates F_q = F_p (I + (lambda a_pq/(g_q - g_p)) [[g_p, -g_p g_q], [1, -g_q]]).
pub fn bryant_net(holo: &DiscreteHolo, lambda: f64, f0: CMat2, tol: f64) -> Result<BryantNet> {
    let det0 = f0.det();
    if fmath::abs(det0.im) > 1e-12 * (1.0 + fmath::hypot(det0.re, det0.im)) || fmath::hypot(det0.re, det0.im) < 1e-12 {
        return Err(Error::Domain("det F0 must be real and nonzero"));
    }
    let rows = holo.rows();
    let cols = holo.cols();
    let step = |p: (usize, usize), q: (usize, usize)| -> Result<CMat2> {
        let gp = holo.g[p];
        let gq = holo.g[q];
        let dg = gq - gp;
        if fmath::hypot(dg.re, dg.im) < 1e-14 {
            return Err(Error::Domain("g is not edge injective"));
        }
        let a = holo.edge_factor(p, q)?;
        let f = Complex64::new(lambda * a, 0.0) / dg;
        Ok(CMat2::new(
            Complex64::new(1.0, 0.0) + gp * f,
            -(gp * gq * f),
            f,
            Complex64::new(1.0, 0.0) - gq * f,
        ))
    };
    // plaquette compatibility
    let mut compat = 0.0f64;
    for m in 0..rows - 1 {
        for n in 0..cols - 1 {
            let p = (m, n);
            let q = (m + 1, n);
            let r = (m + 1, n + 1);
            let s = (m, n + 1);
            let via_q = step(p, q)?.mul(&step(q, r)?);
            let via_s = step(p, s)?.mul(&step(s, r)?);
            let res = via_q.sub(&via_s).max_abs() / (1.0 + via_q.max_abs() + via_s.max_abs());
            compat = compat.max(res);
        }
    }
    if compat > tol {
        return Err(Error::NoConvergence { what: "Bryant frame compatibility", residual: compat });
    }
    let mut frame = Grid::fill(rows, cols, CMat2::identity());
    frame[(0, 0)] = f0;
    for m in 0..rows {
        for n in 0..cols {
            if n > 0 {
                frame[(m, n)] = frame[(m, n - 1)].mul(&step((m, n - 1), (m, n))?);
            } else if m > 0 {
                frame[(m, n)] = frame[(m - 1, n)].mul(&step((m - 1, n), (m, n))?);
            }
        }
    }
    let mut det_drift = 0.0f64;
    let mut membership = 0.0f64;
    let mut hermitian = Grid::fill(rows, cols, [[Complex64::new(0.0, 0.0); 2]; 2]);
    let mut ball = Grid::fill(rows, cols, Quaternion::ZERO);
    let mut degenerate = true;
    for m in 0..rows {
        for n in 0..cols {
            let f = frame[(m, n)];
            let det = f.det();
            det_drift = det_drift.max(fmath::abs(det.im) / fmath::hypot(det.re, det.im).max(1e-300));
            if fmath::hypot(det.re, det.im) < 1e-13 {
                return Err(Error::Domain("Bryant frame determinant vanished"));
            }
            // e = F conj(F)^t / det F
            let (a, b, c, d) = (f.a, f.b, f.c, f.d);
            let m11 = a * a.conj() + b * b.conj();
            let m12 = a * c.conj() + b * d.conj();
            let m21 = c * a.conj() + d * b.conj();
            let m22 = c * c.conj() + d * d.conj();
            let s = Complex64::new(1.0, 0.0) / Complex64::new(det.re, 0.0);
            let h = [[m11 * s, m12 * s], [m21 * s, m22 * s]];
            // membership: Hermitian, det 1, positive trace
            let herm_defect = fmath::hypot((h[0][1] - h[1][0].conj()).re, (h[0][1] - h[1][0].conj()).im)
                .max(fmath::abs(h[0][0].im))
                .max(fmath::abs(h[1][1].im));
            let det_h = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            let det_defect = fmath::hypot(det_h.re - 1.0, det_h.im);
            membership = membership.max(herm_defect).max(det_defect);
            if h[0][0].re + h[1][1].re <= 0.0 {
                return Err(Error::Domain("Hermitian vertex has nonpositive trace"));
            }
            hermitian[(m, n)] = h;
            let p = hermitian_to_poincare(&h);
            ball[(m, n)] = Quaternion::imag(p[0], p[1], p[2]);
            if m + n > 0 && (ball[(m, n)] - ball[(0, 0)]).norm() > 1e-10 {
                degenerate = false;
            }
        }
    }
    if degenerate {
        return Err(Error::Domain("net degenerates to a point"));
    }
    if membership > tol {
        return Err(Error::NoConvergence { what: "H^3 membership", residual: membership });
    }
    let mut net = QuadNet::new(-1.0, ball);
    net.factorize(1e-7)?;
    Ok(BryantNet { frame, hermitian, net, det_drift, compat_residual: compat, membership_residual: membership })
}

/// Profile state of a discrete CMC surface of revolution: radius r, height
/// h, the Z-entry H, and the normal components rho (radial) and eta (axial),
/// normalized so that rho^2 + eta^2 = 1.
#[derive(Debug, Clone, Copy)]
pub struct RevolutionState {
    pub kappa: f64,
    pub alpha: f64,
    pub r: f64,
    pub h: f64,
    pub big_h: f64,
    pub rho: f64,
    pub eta: f64,
}

/// Gauge fixing the step size along the 1-parameter family of valid steps.
#[derive(Debug, Clone, Copy)]
pub enum StepGauge {
    /// Prescribe dr^2 + dh^2.
    StepLength(f64),
    /// Prescribe the horizontal edge factor -alpha (dr^2 + dh^2)/(r r').
    EdgeFactor(f64),
}

/// Result of one profile step with the per-equation residuals (the nine
/// revolution equations, in paper order) and the conserved 2 H_kappa.
#[derive(Debug, Clone, Copy)]
pub struct RevolutionStep {
    pub state: RevolutionState,
    pub residuals: [f64; 9],
    pub h_kappa2: f64,
    /// Horizontal edge factor of the step.
    pub a_h: f64,
}

/// Builds a seed state: rho from the closure equation
/// rho + H r = -alpha (1 + kappa (r^2 + h^2))/r, eta from the normalization.
pub fn revolution_seed(
    kappa: f64,
    alpha: f64,
    r0: f64,
    h0: f64,
    big_h0: f64,
    eta_sign: f64,
) -> Result<RevolutionState> {
    if r0 <= 0.0 {
        return Err(Error::Domain("r0 must be positive"));
    }
    let w = r0 * r0 + h0 * h0;
    let rho = -alpha * (1.0 + kappa * w) / r0 - big_h0 * r0;
    let disc = 1.0 - rho * rho;
    if disc < 0.0 {
        return Err(Error::Domain("seed violates rho^2 + eta^2 = 1; adjust alpha or H"));
    }
    let eta = if eta_sign >= 0.0 { fmath::sqrt(disc) } else { -fmath::sqrt(disc) };
    Ok(RevolutionState { kappa, alpha, r: r0, h: h0, big_h: big_h0, rho, eta })
}

struct Derived {
    big_h1: f64,
    rho1: f64,
    eta1: f64,
    // partial derivatives w.r.t. (r', h')
    d_big_h1: [f64; 2],
    d_rho1: [f64; 2],
    d_eta1: [f64; 2],
}

fn derived(st: &RevolutionState, r1: f64, h1: f64) -> Derived {
    let RevolutionState { kappa, alpha, r, h, big_h, rho, eta } = *st;
    let w = r * r + h * h;
    let w1 = r1 * r1 + h1 * h1;
    let dr = r1 - r;
    let dh = h1 - h;
    let big_h1 = big_h + alpha * kappa * (w - w1) / (r * r1);
    let dh1_dr1 = (alpha * kappa / r) * (-2.0 * r1 * r1 - w + w1) / (r1 * r1);
    let dh1_dh1 = -2.0 * alpha * kappa * h1 / (r * r1);

    let n_rho = dr + kappa * (r1 * w - r * w1);
    let rho1 = rho - (big_h1 * r1 - big_h * r) + alpha * n_rho / (r * r1);
    let d_rho_dr1 = -dh1_dr1 * r1 - big_h1 + alpha * (1.0 + kappa * (w1 - 2.0 * r1 * r1)) / (r1 * r1);
    let d_rho_dh1 = -dh1_dh1 * r1 - 2.0 * alpha * kappa * h1 / r1;

    let n_eta = dh + kappa * (h1 * w - h * w1);
    let eta1 = eta - (big_h1 * h1 - big_h * h) + alpha * n_eta / (r * r1);
    let d_eta_dr1 = -dh1_dr1 * h1 + alpha * (-2.0 * kappa * h * r1 * r1 - n_eta) / (r * r1 * r1);
    let d_eta_dh1 = -dh1_dh1 * h1 - big_h1 + alpha * (1.0 + kappa * w - 2.0 * kappa * h * h1) / (r * r1);

    Derived {
        big_h1,
        rho1,
        eta1,
        d_big_h1: [dh1_dr1, dh1_dh1],
        d_rho1: [d_rho_dr1, d_rho_dh1],
        d_eta1: [d_eta_dr1, d_eta_dh1],
    }
}

/// The conserved combination 2 H_kappa = H (1 + kappa w) + 2 kappa (r rho + h eta).
pub fn h_kappa2(st: &RevolutionState) -> f64 {
    let w = st.r * st.r + st.h * st.h;
    st.big_h * (1.0 + st.kappa * w) + 2.0 * st.kappa * (st.r * st.rho + st.h * st.eta)
}

/// Advances the profile one step: (6), (7), (8) determine H', rho', eta';
/// the closure equation (4) and the chosen gauge fix (r', h') via a Newton
/// iteration with the analytic Jacobian; all nine equation residuals are
/// evaluated on the result.
///
/// Equations (4), (5) alone leave the step size free (the valid steps form a
/// 1-parameter family through the current state), so a gauge is required;
/// (5), (9) and the normalization (1) are verified a posteriori.
pub fn revolution_step(
    st: &RevolutionState,
    gauge: StepGauge,
    guess: (f64, f64),
    tol: f64,
) -> Result<RevolutionStep> {
    let RevolutionState { kappa, alpha, r, h, big_h, rho, eta } = *st;
    let mut r1 = r + guess.0;
    let mut h1 = h + guess.1;
    if r1 <= 0.0 {
        r1 = r * 0.5;
    }
    let mut converged = false;
    let mut last_res = f64::INFINITY;
    for _ in 0..50 {
        if r1 <= 0.0 {
            return Err(Error::Domain("profile hit the axis (r <= 0)"));
        }
        let d = derived(st, r1, h1);
        let dr = r1 - r;
        let dh = h1 - h;
        let g1 = (d.rho1 + rho) * dr + (d.eta1 + eta) * dh;
        let g1_r = d.d_rho1[0] * dr + (d.rho1 + rho) + d.d_eta1[0] * dh;
        let g1_h = d.d_rho1[1] * dr + d.d_eta1[1] * dh + (d.eta1 + eta);
        let (g2, g2_r, g2_h) = match gauge {
            StepGauge::StepLength(l2) => (dr * dr + dh * dh - l2, 2.0 * dr, 2.0 * dh),
            StepGauge::EdgeFactor(a_target) => {
                let val = -alpha * (dr * dr + dh * dh) / (r * r1) - a_target;
                let dval_r = -alpha * (2.0 * dr * r1 - (dr * dr + dh * dh)) / (r * r1 * r1);
                let dval_h = -alpha * 2.0 * dh / (r * r1);
                (val, dval_r, dval_h)
            }
        };
        last_res = fmath::abs(g1).max(fmath::abs(g2));
        if last_res < 1e-13 {
            converged = true;
            break;
        }
        let det = g1_r * g2_h - g1_h * g2_r;
        if fmath::abs(det) < 1e-300 {
            return Err(Error::NoConvergence { what: "revolution Newton (singular Jacobian)", residual: last_res });
        }
        let step_r = (g1 * g2_h - g1_h * g2) / det;
        let step_h = (g1_r * g2 - g1 * g2_r) / det;
        r1 -= step_r;
        h1 -= step_h;
    }
    if !converged {
        return Err(Error::NoConvergence { what: "revolution Newton", residual: last_res });
    }
    if r1 <= 0.0 {
        return Err(Error::Domain("profile hit the axis (r <= 0)"));
    }
    let d = derived(st, r1, h1);
    let next = RevolutionState { kappa, alpha, r: r1, h: h1, big_h: d.big_h1, rho: d.rho1, eta: d.eta1 };
    // all nine equations, in the paper's order
    let w = r * r + h * h;
    let w1 = r1 * r1 + h1 * h1;
    let dr = r1 - r;
    let dh = h1 - h;
    let residuals = [
        // (1) rho^2 + eta^2 constant
        fmath::abs(next.rho * next.rho + next.eta * next.eta - (rho * rho + eta * eta)),
        // (2) H depends only on m: structural
        0.0,
        // (3) at m+1
        fmath::abs(next.rho + next.big_h * r1 + alpha * (1.0 + kappa * w1) / r1),
        // (4)
        fmath::abs((next.rho + rho) * dr + (next.eta + eta) * dh),
        // (5)
        fmath::abs(dr * (next.eta - eta) - dh * (next.rho - rho)),
        // (6)
        fmath::abs(next.big_h - big_h - alpha * kappa * (w - w1) / (r * r1)),
        // (7)
        fmath::abs(next.rho - rho + next.big_h * r1 - big_h * r - alpha * (dr + kappa * (r1 * w - r * w1)) / (r * r1)),
        // (8)
        fmath::abs(next.eta - eta + next.big_h * h1 - big_h * h - alpha * (dh + kappa * (h1 * w - h * w1)) / (r * r1)),
        // (9)
        fmath::abs(
            2.0 * (r * rho + h * eta - r1 * next.rho - h1 * next.eta) + big_h * w
                - next.big_h * w1
                - alpha * (w - w1) / (r * r1),
        ),
    ];
    let worst = residuals.iter().fold(0.0f64, |a, &b| a.max(b));
    if worst > tol {
        return Err(Error::NoConvergence { what: "revolution step residuals", residual: worst });
    }
    Ok(RevolutionStep {
        state: next,
        residuals,
        h_kappa2: h_kappa2(&next),
        a_h: -alpha * (dr * dr + dh * dh) / (r * r1),
    })
}

/// A full surface of revolution with its linear conserved quantity.
#[derive(Debug, Clone)]
pub struct RevolutionNet {
    pub net: QuadNet,
    pub cq: ConservedQuantity,
    pub states: Vec<RevolutionState>,
    /// Max equation residual over all steps.
    pub step_residual: f64,
    /// Max drift of 2 H_kappa over all steps.
    pub h_kappa_drift: f64,
}

/// Assembles the net e_{m,n} = r_m (cos theta_n i + sin theta_n j) + h_m k
/// with theta_n = 2 pi n / N and the conserved quantity built from
/// (H_m, rho_m, eta_m).
pub fn revolution_net(
    seed: RevolutionState,
    m_steps: usize,
    n_spokes: usize,
    step_len: f64,
    tol: f64,
) -> Result<RevolutionNet> {
    if n_spokes < 3 {
        return Err(Error::Domain("need at least 3 spokes"));
    }
    let mut states = alloc::vec![seed];
    let mut a_h = Vec::new();
    let mut guess = (0.0, step_len);
    let mut step_residual = 0.0f64;
    let mut h_kappa_drift = 0.0f64;
    let hk0 = h_kappa2(&seed);
    for _ in 0..m_steps {
        let st = *states.last().unwrap();
        let step = revolution_step(&st, StepGauge::StepLength(step_len * step_len), guess, tol)?;
        guess = (step.state.r - st.r, step.state.h - st.h);
        step_residual = step_residual.max(step.residuals.iter().fold(0.0f64, |a, &b| a.max(b)));
        h_kappa_drift = h_kappa_drift.max(fmath::abs(step.h_kappa2 - hk0));
        a_h.push(step.a_h);
        states.push(step.state);
    }
    let rows = states.len();
    let tau = core::f64::consts::TAU;
    let spoke = |n: usize| {
        let th = tau * n as f64 / n_spokes as f64;
        (fmath::cos(th), fmath::sin(th))
    };
    let verts = Grid::from_fn(rows, n_spokes, |m, n| {
        let (c, s) = spoke(n);
        Quaternion::imag(states[m].r * c, states[m].r * s, states[m].h)
    });
    let mut net = QuadNet::new(seed.kappa, verts);
    let sp = fmath::sin(core::f64::consts::PI / n_spokes as f64);
    let a_v = alloc::vec![4.0 * seed.alpha * sp * sp; n_spokes - 1];
    net.set_factors(a_h, a_v);

    // conserved quantity from the revolution data
    let q_vec = SpaceForm::new(seed.kappa).q_vec();
    let q_grid = Grid::fill(rows, n_spokes, q_vec);
    let z_grid = Grid::from_fn(rows, n_spokes, |m, n| {
        let (c, s) = spoke(n);
        let e = Quaternion::imag(states[m].r * c, states[m].r * s, states[m].h);
        let normal = Quaternion::imag(states[m].rho * c, states[m].rho * s, states[m].eta);
        let z_up = normal + e.scale(states[m].big_h);
        let zinf = 2.0 * e.dot3(&normal) + states[m].big_h * e.norm_sq();
        MinkVec::new(z_up, states[m].big_h, zinf)
    });
    let cq = ConservedQuantity::linear(q_grid, z_grid);
    Ok(RevolutionNet { net, cq, states, step_residual, h_kappa_drift })
}

/// Sampled smooth maximal surface in R^{2,1} from the Weierstrass-type data
/// (g, eta): f = Re int (1 + g^2, i (1 - g^2), -2g) eta, integrated with the
/// refined trapezoid rule over grid edges. Coordinates are (x, y, t) with
/// the metric dx^2 + dy^2 - dt^2.
#[derive(Debug, Clone)]
pub struct MaximalSample {
    pub z: Grid<Complex64>,
    pub verts: Grid<[f64; 3]>,
    /// Unit (timelike) Gauss map where defined; None at singular samples.
    pub gauss: Grid<Option<[f64; 3]>>,
    /// Conformal metric factor (1 - |g|^2)^2 |eta|^2.
    pub metric_factor: Grid<f64>,
    /// |g| = 1 flags.
    pub singular: Grid<bool>,
    /// Worst |loop integral| around a grid plaquette.
    pub closure_residual: f64,
}

/// Samples the representation over the rectangle [re0, re1] x [im0, im1]
/// with the given resolution; `refine` is the number of trapezoid substeps
/// per grid edge.
#[allow(clippy::too_many_arguments)]
pub fn kobayashi_sample(
    g: &dyn Fn(Complex64) -> Complex64,
    eta: &dyn Fn(Complex64) -> Complex64,
    re0: f64,
    re1: f64,
    im0: f64,
    im1: f64,
    rows: usize,
    cols: usize,
    refine: usize,
    singular_tol: f64,
) -> Result<MaximalSample> {
    if rows < 2 || cols < 2 {
        return Err(Error::Domain("grid needs at least 2x2 samples"));
    }
    let refine = refine.max(1);
    let z_at = |m: usize, n: usize| {
        Complex64::new(
            re0 + (re1 - re0) * m as f64 / (rows - 1) as f64,
            im0 + (im1 - im0) * n as f64 / (cols - 1) as f64,
        )
    };
    let z = Grid::from_fn(rows, cols, z_at);
    let integrand = |w: Complex64| -> [Complex64; 3] {
        let gv = g(w);
        let ev = eta(w);
        [
            (Complex64::new(1.0, 0.0) + gv * gv) * ev,
            Complex64::new(0.0, 1.0) * (Complex64::new(1.0, 0.0) - gv * gv) * ev,
            Complex64::new(-2.0, 0.0) * gv * ev,
        ]
    };
    // refined trapezoid integral of the C^3 integrand along a straight edge
    let edge_integral = |za: Complex64, zb: Complex64| -> [Complex64; 3] {
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        let dz = (zb - za) / refine as f64;
        let mut prev = integrand(za);
        for k in 1..=refine {
            let t = za + dz * k as f64;
            let cur = integrand(t);
            for i in 0..3 {
                acc[i] += (prev[i] + cur[i]) * 0.5 * dz;
            }
            prev = cur;
        }
        acc
    };
    // closure around every plaquette
    let mut closure = 0.0f64;
    for m in 0..rows - 1 {
        for n in 0..cols - 1 {
            let (zp, zq, zr, zs) = (z[(m, n)], z[(m + 1, n)], z[(m + 1, n + 1)], z[(m, n + 1)]);
            let mut total = [Complex64::new(0.0, 0.0); 3];
            for (a, b) in [(zp, zq), (zq, zr), (zr, zs), (zs, zp)] {
                let e = edge_integral(a, b);
                for i in 0..3 {
                    total[i] += e[i];
                }
            }
            let norm = total.iter().map(|c| c.norm_sqr()).sum::<f64>();
            closure = closure.max(fmath::sqrt(norm));
        }
    }
    // integrate along the comb from the (0, 0) corner
    let mut acc = Grid::fill(rows, cols, [Complex64::new(0.0, 0.0); 3]);
    for m in 0..rows {
        for n in 0..cols {
            if n > 0 {
                let e = edge_integral(z[(m, n - 1)], z[(m, n)]);
                for i in 0..3 {
                    acc[(m, n)][i] = acc[(m, n - 1)][i] + e[i];
                }
            } else if m > 0 {
                let e = edge_integral(z[(m - 1, n)], z[(m, n)]);
                for i in 0..3 {
                    acc[(m, n)][i] = acc[(m - 1, n)][i] + e[i];
                }
            }
        }
    }
    let verts = acc.map(|c| [c[0].re, c[1].re, c[2].re]);
    let mut gauss = Grid::fill(rows, cols, None);
    let mut metric = Grid::fill(rows, cols, 0.0f64);
    let mut singular = Grid::fill(rows, cols, false);
    for m in 0..rows {
        for n in 0..cols {
            let gv = g(z[(m, n)]);
            let ev = eta(z[(m, n)]);
            let g2 = gv.norm_sqr();
            let factor = (1.0 - g2) * (1.0 - g2) * ev.norm_sqr();
            metric[(m, n)] = factor;
            if fmath::abs(fmath::sqrt(g2) - 1.0) < singular_tol {
                singular[(m, n)] = true;
            } else {
                let d = g2 - 1.0;
                gauss[(m, n)] = Some([-2.0 * gv.re / d, -2.0 * gv.im / d, (g2 + 1.0) / d]);
            }
        }
    }
    Ok(MaximalSample { z, verts, gauss, metric_factor: metric, singular, closure_residual: closure })
}
