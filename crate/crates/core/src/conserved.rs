//! Linear and polynomial conserved quantities: residual verification,
//! existence solvers, mean curvature, behaviour under Calapso and Darboux
//! transforms, Baecklund values and complementary surfaces, envelopes.
//!
//! A polynomial P(lambda) = Q + lambda P_1 + ... + lambda^n Z with
//! R^{4,1}-valued lattice coefficients is conserved when
//! (I + lambda tau_pq) P_q = P_p (I + lambda tau_pq) on every edge for all
//! lambda; a linear conserved quantity is exactly the discrete CMC condition
//! for the space form determined by Q.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;
use crate::grid::Grid;
use crate::linalg::{self, Mat};
use crate::mink::MinkVec;
use crate::net::{MoutardLift, QuadNet};
use crate::quat::QuatMat2;
use crate::transforms::{edge_tau_from_lifts, Calapso, Darboux};

/// Lambda samples used by the independent evaluation oracle.
pub const LAMBDA_SAMPLES: [f64; 3] = [-1.0, 1.0 / 3.0, 2.0];

/// Polynomial conserved quantity: coefficient lattices [P_0 = Q, ..., P_n = Z].
#[derive(Debug, Clone)]
pub struct ConservedQuantity {
    pub coeffs: Vec<Grid<MinkVec>>,
}

impl ConservedQuantity {
    pub fn linear(q: Grid<MinkVec>, z: Grid<MinkVec>) -> ConservedQuantity {
        ConservedQuantity { coeffs: alloc::vec![q, z] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// P(lambda) at a vertex.
    pub fn eval(&self, m: usize, n: usize, lambda: f64) -> MinkVec {
        let mut acc = MinkVec::ZERO;
        let mut pow = 1.0;
        for c in &self.coeffs {
            acc = acc + c[(m, n)].scaled(pow);
            pow *= lambda;
        }
        acc
    }

    /// Largest component magnitude over all coefficients and vertices.
    pub fn size(&self) -> f64 {
        let mut s = 0.0f64;
        for c in &self.coeffs {
            for (_, v) in c.iter() {
                s = s.max(v.scale());
            }
        }
        s
    }

    pub fn scaled(&self, s: f64) -> ConservedQuantity {
        ConservedQuantity {
            coeffs: self.coeffs.iter().map(|c| c.map(|v| v.scaled(s))).collect(),
        }
    }

    /// Reindexes the polynomial lambda -> lambda + mu.
    pub fn shifted(&self, mu: f64) -> ConservedQuantity {
        let deg = self.coeffs.len();
        let rows = self.coeffs[0].rows();
        let cols = self.coeffs[0].cols();
        let mut out: Vec<Grid<MinkVec>> = (0..deg).map(|_| Grid::fill(rows, cols, MinkVec::ZERO)).collect();
        // binomial re-expansion: new P_k = sum_{j >= k} C(j, k) mu^{j-k} P_j
        for k in 0..deg {
            for j in k..deg {
                let mut binom = 1.0f64;
                for t in 0..k {
                    binom *= (j - t) as f64 / (t + 1) as f64;
                }
                let factor = binom * fmath::powi(mu, (j - k) as i32);
                for m in 0..rows {
                    for n in 0..cols {
                        let add = self.coeffs[j][(m, n)].scaled(factor);
                        out[k][(m, n)] = out[k][(m, n)] + add;
                    }
                }
            }
        }
        ConservedQuantity { coeffs: out }
    }

    /// Drops top coefficients whose size is below `rel_tol` times the overall
    /// coefficient scale.
    pub fn trimmed(mut self, rel_tol: f64) -> ConservedQuantity {
        let scale = self.size().max(1e-300);
        while self.coeffs.len() > 1 {
            let top = self.coeffs.last().unwrap();
            let top_size = top.iter().fold(0.0f64, |s, (_, v)| s.max(v.scale()));
            if top_size <= rel_tol * scale {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        self
    }
}

/// Residual report of the conserved-quantity equation.
#[derive(Debug, Clone)]
pub struct CqReport {
    /// Worst relative residual over edges and polynomial coefficients.
    pub coeff_residual: f64,
    /// Worst relative residual of the lambda-sampled equation (independent
    /// oracle at the [`LAMBDA_SAMPLES`]).
    pub sample_residual: f64,
    /// For linear quantities: residuals of dQ = 0, dZ = Q tau - tau Q, and
    /// Z_p tau = tau Z_q.
    pub split_residuals: Option<[f64; 3]>,
    /// Worst residual per edge, for fault localization: ((m, n), horizontal, value).
    pub worst_edge: Option<((usize, usize), bool, f64)>,
}

impl CqReport {
    pub fn max_residual(&self) -> f64 {
        let mut r = self.coeff_residual.max(self.sample_residual);
        if let Some(s) = self.split_residuals {
            r = r.max(s[0]).max(s[1]).max(s[2]);
        }
        r
    }
}

fn tau_for_edge(net: &QuadNet, lifts: &Grid<MinkVec>, p: (usize, usize), q: (usize, usize)) -> Result<QuatMat2> {
    let a = net.edge_factor(p, q)?;
    edge_tau_from_lifts(a, &lifts[p], &lifts[q])
}

/// Verifies (I + lambda tau) P_q = P_p (I + lambda tau) coefficient-wise on
/// every edge, with a lambda-sampling cross-check.
///
/// tau is computed from the net's edge factors, which must be the ones the
/// quantity was built against (the equation scales with the factor gauge).
pub fn verify_cq(net: &QuadNet, p: &ConservedQuantity) -> Result<CqReport> {
    let lifts = net.lift_grid()?;
    let deg = p.coeffs.len();
    let scale = p.size().max(1e-300);
    let mut coeff_residual = 0.0f64;
    let mut sample_residual = 0.0f64;
    let mut worst_edge: Option<((usize, usize), bool, f64)> = None;
    let mut split = [0.0f64; 3];

    for (pp, qq) in net.edges() {
        let tau = tau_for_edge(net, &lifts, pp, qq)?;
        let tau_scale = tau.max_norm().max(1e-300);
        let mut edge_worst = 0.0f64;
        // coefficient k of (I + lambda tau) P_q - P_p (I + lambda tau):
        // (P_k,q - P_k,p) + tau P_{k-1},q - P_{k-1},p tau
        for k in 0..=deg {
            let mut resid = QuatMat2::zero();
            if k < deg {
                resid = resid + (p.coeffs[k][qq] - p.coeffs[k][pp]).to_mat();
            }
            if k > 0 {
                let prev_q = p.coeffs[k - 1][qq].to_mat();
                let prev_p = p.coeffs[k - 1][pp].to_mat();
                resid = resid + tau * prev_q - prev_p * tau;
            }
            let denom = scale * (1.0 + tau_scale);
            let r = resid.max_norm() / denom;
            coeff_residual = coeff_residual.max(r);
            edge_worst = edge_worst.max(r);
        }
        // independent oracle: evaluate P(lambda) and test the full equation
        for lambda in LAMBDA_SAMPLES {
            let pl_q = p.eval(qq.0, qq.1, lambda).to_mat();
            let pl_p = p.eval(pp.0, pp.1, lambda).to_mat();
            let one_tau = QuatMat2::IDENTITY + tau.scale(lambda);
            let resid = one_tau * pl_q - pl_p * one_tau;
            let denom = scale * (1.0 + fmath::abs(lambda)) * (1.0 + fmath::abs(lambda) * tau_scale);
            sample_residual = sample_residual.max(resid.max_norm() / denom);
        }
        // split conditions for the linear case
        if deg == 2 {
            let q0 = p.coeffs[0][qq] - p.coeffs[0][pp];
            split[0] = split[0].max(q0.scale() / scale);
            let q_mat = p.coeffs[0][pp].to_mat();
            let dz = (p.coeffs[1][qq] - p.coeffs[1][pp]).to_mat();
            let rhs = q_mat * tau - tau * q_mat;
            split[1] = split[1].max((dz - rhs).max_norm() / (scale * (1.0 + tau_scale)));
            let zt = p.coeffs[1][pp].to_mat() * tau - tau * p.coeffs[1][qq].to_mat();
            split[2] = split[2].max(zt.max_norm() / (scale * (1.0 + tau_scale)));
        }
        let horizontal = pp.1 == qq.1;
        if worst_edge.map(|w| edge_worst > w.2).unwrap_or(true) {
            worst_edge = Some((pp, horizontal, edge_worst));
        }
    }
    Ok(CqReport {
        coeff_residual,
        sample_residual,
        split_residuals: if deg == 2 { Some(split) } else { None },
        worst_edge,
    })
}

/// Star around a center: the center plus its four edge neighbors, in the
/// order used by the existence solvers.
fn star_indices(center: (usize, usize)) -> [(usize, usize); 5] {
    let (m, n) = center;
    [(m, n), (m + 1, n), (m, n + 1), (m - 1, n), (m, n - 1)]
}

fn gram(lifts: &[MinkVec]) -> Mat {
    let n = lifts.len();
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = lifts[i].inner(&lifts[j]);
        }
    }
    a
}

/// Propagates Z from the center over the whole net by
/// Z_q = Z_p + 2 <Q, F_p> F_q - 2 <Q, F_q> F_p with Moutard lifts F.
fn propagate_z(
    net: &QuadNet,
    moutard: &MoutardLift,
    center: (usize, usize),
    q_vec: &MinkVec,
    z_center: MinkVec,
) -> Result<Grid<MinkVec>> {
    let rows = net.rows();
    let cols = net.cols();
    let mut z = Grid::fill(rows, cols, MinkVec::ZERO);
    let mut known = Grid::fill(rows, cols, false);
    z[center] = z_center;
    known[center] = true;
    // breadth-first from the center
    let mut queue = alloc::collections::VecDeque::new();
    queue.push_back(center);
    while let Some((m, n)) = queue.pop_front() {
        let neighbors = [
            (m.wrapping_add(1), n),
            (m.wrapping_sub(1), n),
            (m, n.wrapping_add(1)),
            (m, n.wrapping_sub(1)),
        ];
        for (mm, nn) in neighbors {
            if mm >= rows || nn >= cols || known[(mm, nn)] || !net.is_valid(mm, nn) {
                continue;
            }
            let fp = moutard.lifts[(m, n)];
            let fq = moutard.lifts[(mm, nn)];
            z[(mm, nn)] = z[(m, n)] + fq.scaled(2.0 * q_vec.inner(&fp)) - fp.scaled(2.0 * q_vec.inner(&fq));
            known[(mm, nn)] = true;
            queue.push_back((mm, nn));
        }
    }
    Ok(z)
}

/// One verified linear conserved quantity together with its residual report.
#[derive(Debug, Clone)]
pub struct LcqCandidate {
    pub cq: ConservedQuantity,
    pub report: CqReport,
}

/// Solves for Z at a star given Q, on a net that is at least 3x3 around the
/// center: the 5x5 Gram system A c = 2 B A q.
pub fn solve_z_given_q(
    net: &QuadNet,
    moutard: &MoutardLift,
    center: (usize, usize),
    q_vec: &MinkVec,
    tol: f64,
) -> Result<LcqCandidate> {
    let (m, n) = center;
    if m == 0 || n == 0 || m + 1 >= net.rows() || n + 1 >= net.cols() {
        return Err(Error::Domain("center must be an interior vertex"));
    }
    let star = star_indices(center);
    let lifts: Vec<MinkVec> = star.iter().map(|&ix| moutard.lifts[ix]).collect();
    let a = gram(&lifts);
    // rhs_i = 2 <F_center, F_i> <F_i, Q>: the orthogonality of Z at the
    // center and at each neighbor after one propagation step
    let rhs: Vec<f64> = (0..5)
        .map(|i| 2.0 * lifts[0].inner(&lifts[i]) * lifts[i].inner(q_vec))
        .collect();
    let c = lu_solve_spherical(&a, &rhs)?;
    let mut z_center = MinkVec::ZERO;
    for i in 0..5 {
        z_center = z_center + lifts[i].scaled(c[i]);
    }
    let z = propagate_z(net, moutard, center, q_vec, z_center)?;
    let q_grid = Grid::fill(net.rows(), net.cols(), *q_vec);
    let cq = ConservedQuantity::linear(q_grid, z);
    let report = verify_cq(net, &cq)?;
    if report.max_residual() > tol {
        return Err(Error::NoConvergence {
            what: "linear conserved quantity verification",
            residual: report.max_residual(),
        });
    }
    Ok(LcqCandidate { cq, report })
}

fn lu_solve_spherical(a: &Mat, rhs: &[f64]) -> Result<Vec<f64>> {
    linalg::lu_solve(a, rhs).map_err(|e| match e {
        Error::SingularSystem => Error::SphericalStar,
        other => other,
    })
}

/// Outcome of the 5x5 existence solver.
#[derive(Debug, Clone)]
pub struct LcqSolveOutcome {
    /// Verified linear conserved quantities, best residual first. Multiple
    /// entries mean the nullspace was more than 1-dimensional.
    pub candidates: Vec<LcqCandidate>,
    /// Best residual among rejected nullspace vectors, when no candidate
    /// verified: the "no linear conserved quantity" diagnostic.
    pub best_rejected: Option<f64>,
}

/// Existence solver on a net that is at least 5x5 around the center: builds
/// the 4x5 system E A^{-1} B A + C G - C E - D A~ and reads Q off its
/// nullspace, then solves for Z and verifies the full equation.
pub fn solve_lcq(
    net: &QuadNet,
    moutard: &MoutardLift,
    center: (usize, usize),
    tol: f64,
) -> Result<LcqSolveOutcome> {
    let (m, n) = center;
    if m < 2 || n < 2 || m + 2 >= net.rows() || n + 2 >= net.cols() {
        return Err(Error::Domain("center must have a full 5x5 neighborhood"));
    }
    let star = star_indices(center);
    let ring2 = [(m + 2, n), (m, n + 2), (m - 2, n), (m, n - 2)];
    // mid-ring vertex between the center and each ring-2 vertex
    let mids = [(m + 1, n), (m, n + 1), (m - 1, n), (m, n - 1)];
    for ix in star.iter().chain(ring2.iter()) {
        if !net.is_valid(ix.0, ix.1) {
            return Err(Error::Domain("5x5 neighborhood has missing vertices"));
        }
    }
    let f: Vec<MinkVec> = star.iter().map(|&ix| moutard.lifts[ix]).collect();
    let g2: Vec<MinkVec> = ring2.iter().map(|&ix| moutard.lifts[ix]).collect();
    let fmid: Vec<MinkVec> = mids.iter().map(|&ix| moutard.lifts[ix]).collect();

    let a = gram(&f);
    // E[r][j] = <F_j, G_r>
    let mut e = Mat::zeros(4, 5);
    for r in 0..4 {
        for j in 0..5 {
            e[(r, j)] = f[j].inner(&g2[r]);
        }
    }
    // G: all four rows equal the center row of A
    let mut g = Mat::zeros(4, 5);
    for r in 0..4 {
        for j in 0..5 {
            g[(r, j)] = f[0].inner(&f[j]);
        }
    }
    // A~: rows 2..5 of A (the four neighbor rows)
    let mut a_tilde = Mat::zeros(4, 5);
    for r in 0..4 {
        for j in 0..5 {
            a_tilde[(r, j)] = f[j].inner(&f[r + 1]);
        }
    }
    let mut b = Mat::zeros(5, 5);
    for i in 0..5 {
        b[(i, i)] = f[0].inner(&f[i]);
    }
    let mut c_diag = Mat::zeros(4, 4);
    let mut d_diag = Mat::zeros(4, 4);
    for r in 0..4 {
        c_diag[(r, r)] = fmid[r].inner(&g2[r]);
        d_diag[(r, r)] = f[0].inner(&g2[r]);
    }

    // X = A^{-1} (B A), column by column
    let ba = b.matmul(&a);
    let mut x = Mat::zeros(5, 5);
    for col in 0..5 {
        let rhs: Vec<f64> = (0..5).map(|r| ba[(r, col)]).collect();
        let sol = lu_solve_spherical(&a, &rhs)?;
        for r in 0..5 {
            x[(r, col)] = sol[r];
        }
    }
    let mut system = e.matmul(&x);
    let cg = c_diag.matmul(&g);
    let ce = c_diag.matmul(&e);
    let da = d_diag.matmul(&a_tilde);
    for r in 0..4 {
        for j in 0..5 {
            system[(r, j)] += cg[(r, j)] - ce[(r, j)] - da[(r, j)];
        }
    }

    let null = linalg::nullspace(&system, 1e-8);
    let mut candidates = Vec::new();
    let mut best_rejected: Option<f64> = None;
    for qv in null {
        let mut q_vec = MinkVec::ZERO;
        for i in 0..5 {
            q_vec = q_vec + f[i].scaled(qv[i]);
        }
        if q_vec.scale() < 1e-12 {
            continue;
        }
        match solve_z_given_q(net, moutard, center, &q_vec, tol) {
            Ok(cand) => candidates.push(cand),
            Err(Error::NoConvergence { residual, .. }) => {
                best_rejected = Some(best_rejected.map_or(residual, |b: f64| b.min(residual)));
            }
            Err(other) => return Err(other),
        }
    }
    candidates.sort_by(|x, y| {
        x.report
            .max_residual()
            .partial_cmp(&y.report.max_residual())
            .unwrap()
    });
    Ok(LcqSolveOutcome { candidates, best_rejected })
}

/// Mean curvature data of a linear conserved quantity.
///
/// The quantity is rescaled so that ||Z|| = 1 (rescaling Q as well, which
/// rescales the ambient curvature). Two conventions are reported: `h_model`
/// is -<Z, Q> in the light-cone model, whose chart metric is four times the
/// Euclidean one; `h_euclidean_abs` = 2 |h_model| matches the Euclidean
/// surface-theory scale (a discrete cylinder of chart radius r gives
/// 1/(2r)). The overall sign depends on the orientation of Z and is
/// reported separately.
#[derive(Debug, Clone, Copy)]
pub struct MeanCurvatureReport {
    /// -<Z, Q> after normalization, with its orientation-dependent sign.
    pub h_model: f64,
    pub h_model_abs: f64,
    /// 2 |h_model|: the Euclidean-convention magnitude.
    pub h_euclidean_abs: f64,
    /// Sign of h_model: +1 or -1 (orientation flag).
    pub sign: f64,
    /// Curvature -||Q||^2 of the ambient space form after normalization.
    pub kappa: f64,
    /// Applied normalization factor 1/||Z||.
    pub scale: f64,
    /// ||Z|| before normalization.
    pub z_norm: f64,
}

/// Computes the mean curvature of a linear conserved quantity, after
/// checking that ||Z|| and <Z, Q> are vertex independent.
pub fn mean_curvature(p: &ConservedQuantity, net: &QuadNet, tol: f64) -> Result<MeanCurvatureReport> {
    if p.order() < 1 {
        return Err(Error::Domain("mean curvature needs an order >= 1 quantity"));
    }
    let q_grid = &p.coeffs[0];
    let z_grid = &p.coeffs[p.order()];
    let base = net.base_vertex()?;
    let z0 = z_grid[base];
    let q0 = q_grid[base];
    let z_norm_sq = z0.norm_sq();
    let scale_sq = p.size() * p.size();
    if z_norm_sq <= tol * (1.0 + scale_sq) {
        return Err(Error::Domain("||Z|| = 0: spherical or degenerate quantity"));
    }
    // constancy across vertices
    for m in 0..net.rows() {
        for n in 0..net.cols() {
            if !net.is_valid(m, n) {
                continue;
            }
            let dz = fmath::abs(z_grid[(m, n)].norm_sq() - z_norm_sq);
            let dh = fmath::abs(z_grid[(m, n)].inner(&q_grid[(m, n)]) - z0.inner(&q0));
            if dz > tol * (1.0 + scale_sq) || dh > tol * (1.0 + scale_sq) {
                return Err(Error::NoConvergence {
                    what: "||Z|| or <Z,Q> constancy",
                    residual: dz.max(dh),
                });
            }
        }
    }
    let z_norm = fmath::sqrt(z_norm_sq);
    let h_model = -z0.inner(&q0) / z_norm_sq;
    let kappa = -q0.norm_sq() / z_norm_sq;
    Ok(MeanCurvatureReport {
        h_model,
        h_model_abs: fmath::abs(h_model),
        h_euclidean_abs: 2.0 * fmath::abs(h_model),
        sign: if h_model >= 0.0 { 1.0 } else { -1.0 },
        kappa,
        scale: 1.0 / z_norm,
        z_norm,
    })
}

/// Conserved quantity of the Calapso transform:
/// P^mu_p = T_p (P_p(lambda + mu)) T_p^{-1}, same order.
pub fn calapso_shift_cq(p: &ConservedQuantity, cal: &Calapso, tol: f64) -> Result<ConservedQuantity> {
    let shifted = p.shifted(cal.lambda);
    let mut out = Vec::with_capacity(shifted.coeffs.len());
    for coeff in &shifted.coeffs {
        let rows = coeff.rows();
        let cols = coeff.cols();
        let mut grid = Grid::fill(rows, cols, MinkVec::ZERO);
        for mm in 0..rows {
            for nn in 0..cols {
                grid[(mm, nn)] = coeff[(mm, nn)].conjugate_by(&cal.frame[(mm, nn)], tol.max(1e-8))?;
            }
        }
        out.push(grid);
    }
    Ok(ConservedQuantity { coeffs: out })
}

/// Conserved quantity of a Darboux transform, of order at most n + 1:
/// P^ = mu^2 (I - lambda F^ F) P(lambda) (I - lambda F F^), with the lifts
/// arranged so that <F_p, F^_p> = -1/(2 mu) (the mixed-quad Moutard
/// normalization, which makes mu (mu - lambda) A^{-1} P A polynomial).
pub fn darboux_cq(
    p: &ConservedQuantity,
    net: &QuadNet,
    moutard: &MoutardLift,
    dar: &Darboux,
    tol: f64,
) -> Result<ConservedQuantity> {
    let mu = dar.mu;
    if mu == 0.0 {
        return Err(Error::Domain("Darboux parameter must be nonzero"));
    }
    let rows = net.rows();
    let cols = net.cols();
    let sf = net.space_form();
    let deg = p.coeffs.len();
    let mut out: Vec<Grid<MinkVec>> = (0..deg + 2).map(|_| Grid::fill(rows, cols, MinkVec::ZERO)).collect();
    let mut top_size = 0.0f64;
    for m in 0..rows {
        for n in 0..cols {
            if !net.is_valid(m, n) {
                continue;
            }
            let f = moutard.lifts[(m, n)];
            let fhat0 = sf.lift(dar.transformed.vertex(m, n))?;
            let pairing = f.inner(&fhat0);
            if fmath::abs(pairing) < 1e-300 {
                return Err(Error::Domain("Darboux transform touches the net"));
            }
            let fhat = fhat0.scaled(-1.0 / (2.0 * mu * pairing));
            let w_left = fhat.to_mat() * f.to_mat(); // F^ F
            let w_right = f.to_mat() * fhat.to_mat(); // F F^
            // each coefficient lies in R^{4,1} but only after cancellation
            // between its terms, so measure the projection defect against the
            // term magnitudes rather than the (possibly tiny) result
            let term_scale = (1.0 + w_left.max_norm()) * p.size().max(1.0) * (1.0 + w_right.max_norm());
            // coefficient k of mu^2 (I - lambda W_l) P (I - lambda W_r):
            // mu^2 [P_k - W_l P_{k-1} - P_{k-1} W_r + W_l P_{k-2} W_r]
            for k in 0..deg + 2 {
                let mut acc = QuatMat2::zero();
                if k < deg {
                    acc = acc + p.coeffs[k][(m, n)].to_mat();
                }
                if k >= 1 && k - 1 < deg {
                    let prev = p.coeffs[k - 1][(m, n)].to_mat();
                    acc = acc - w_left * prev - prev * w_right;
                }
                if k >= 2 && k - 2 < deg {
                    let prev2 = p.coeffs[k - 2][(m, n)].to_mat();
                    acc = acc + w_left * prev2 * w_right;
                }
                let acc = acc.scale(mu * mu);
                let (v, defect) = MinkVec::project_mat(&acc);
                if defect > tol.max(1e-9) * mu * mu * term_scale {
                    return Err(Error::Domain("Darboux coefficient left R^{4,1}"));
                }
                if k == deg + 1 {
                    top_size = top_size.max(v.scale());
                }
                out[k][(m, n)] = v;
            }
        }
    }
    let scale = p.size().max(1e-300) * mu * mu;
    if top_size > tol * scale {
        return Err(Error::NoConvergence {
            what: "Darboux conserved-quantity top coefficient",
            residual: top_size / scale,
        });
    }
    out.pop(); // the vanishing lambda^{n+2} coefficient
    Ok(ConservedQuantity { coeffs: out }.trimmed(1e-12))
}

/// Checks both closed forms of dP_pq against the direct difference, per edge
/// and per lambda sample. Returns the worst relative residual.
pub fn dp_edge_formula_check(net: &QuadNet, p: &ConservedQuantity) -> Result<f64> {
    let lifts = net.lift_grid()?;
    let scale = p.size().max(1e-300);
    let mut worst = 0.0f64;
    for (pp, qq) in net.edges() {
        let a = net.edge_factor(pp, qq)?;
        let fp = lifts[pp];
        let fq = lifts[qq];
        let ip = fp.inner(&fq);
        if fmath::abs(ip) < 1e-300 {
            return Err(Error::Domain("degenerate edge"));
        }
        for lambda in LAMBDA_SAMPLES {
            let pl_p = p.eval(pp.0, pp.1, lambda);
            let pl_q = p.eval(qq.0, qq.1, lambda);
            let direct = pl_q - pl_p;
            let form1 = fp.scaled(pl_q.inner(&fq)).sub_into(fq.scaled(pl_p.inner(&fp))).scaled(lambda * a / ip);
            let denom = 1.0 - lambda * a;
            if fmath::abs(denom) < 1e-10 {
                continue; // lambda sample hits a pole of the second form
            }
            let form2 = fp
                .scaled(pl_p.inner(&fq))
                .sub_into(fq.scaled(pl_q.inner(&fp)))
                .scaled(lambda * a / (denom * ip));
            worst = worst.max((direct - form1).scale() / (1.0 + scale));
            worst = worst.max((direct - form2).scale() / (1.0 + scale));
        }
    }
    Ok(worst)
}

impl MinkVec {
    fn sub_into(self, other: MinkVec) -> MinkVec {
        self - other
    }
}

/// A real root of ||P(lambda)||^2 with the complementary-surface lift P(mu).
#[derive(Debug, Clone)]
pub struct BaecklundRoot {
    pub mu: f64,
    /// Lift of the complementary surface: F^_p = P_p(mu), lightlike by
    /// construction and orthogonal to P(mu).
    pub lift: Grid<MinkVec>,
    /// True when mu is a (numerically) repeated root: the CMC +-sqrt(-kappa)
    /// case where a type-0 Baecklund transform exists.
    pub is_double: bool,
}

/// Real zeros of lambda -> ||P(lambda)||^2 found through companion-matrix
/// eigenvalues; the polynomial is vertex independent and this is verified.
pub fn baecklund_values(net: &QuadNet, p: &ConservedQuantity, tol: f64) -> Result<Vec<BaecklundRoot>> {
    if p.order() < 1 {
        return Err(Error::Domain("Baecklund values need order >= 1"));
    }
    let deg = p.coeffs.len();
    let base = net.base_vertex()?;
    let norm_poly = |m: usize, n: usize| -> Vec<f64> {
        let mut coeffs = alloc::vec![0.0f64; 2 * deg - 1];
        for i in 0..deg {
            for j in 0..deg {
                coeffs[i + j] += p.coeffs[i][(m, n)].inner(&p.coeffs[j][(m, n)]);
            }
        }
        coeffs
    };
    let base_poly = norm_poly(base.0, base.1);
    let scale = base_poly.iter().fold(0.0f64, |s, &c| s.max(fmath::abs(c))).max(1e-300);
    for m in 0..net.rows() {
        for n in 0..net.cols() {
            if !net.is_valid(m, n) {
                continue;
            }
            let other = norm_poly(m, n);
            for (c0, c1) in base_poly.iter().zip(&other) {
                if fmath::abs(c0 - c1) > tol.max(1e-9) * scale {
                    return Err(Error::NoConvergence {
                        what: "||P(lambda)||^2 vertex independence",
                        residual: fmath::abs(c0 - c1) / scale,
                    });
                }
            }
        }
    }
    let roots = linalg::real_poly_roots(&base_poly, 1e-8);
    let mut out = Vec::new();
    let mut i = 0;
    while i < roots.len() {
        let mu = roots[i];
        let mut is_double = false;
        if i + 1 < roots.len() && fmath::abs(roots[i + 1] - mu) < 1e-6 * (1.0 + fmath::abs(mu)) {
            is_double = true;
        }
        let lift = Grid::from_fn(net.rows(), net.cols(), |m, n| p.eval(m, n, mu));
        out.push(BaecklundRoot { mu, lift, is_double });
        if is_double {
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(out)
}

/// Orthogonality test P(mu) perp F^ at every vertex; one vertex suffices in
/// theory, all are checked. Returns the worst relative residual.
pub fn baecklund_residual(
    net: &QuadNet,
    p: &ConservedQuantity,
    mu: f64,
    fhat_lifts: &Grid<MinkVec>,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for m in 0..net.rows() {
        for n in 0..net.cols() {
            if !net.is_valid(m, n) {
                continue;
            }
            let pmu = p.eval(m, n, mu);
            let fh = fhat_lifts[(m, n)];
            let denom = (1.0 + pmu.scale()) * (1.0 + fh.scale());
            worst = worst.max(fmath::abs(pmu.inner(&fh)) / denom);
        }
    }
    Ok(worst)
}

/// Is the Darboux transform at mu a Baecklund transform of P?
pub fn is_baecklund(
    net: &QuadNet,
    p: &ConservedQuantity,
    mu: f64,
    fhat_lifts: &Grid<MinkVec>,
    tol: f64,
) -> Result<bool> {
    Ok(baecklund_residual(net, p, mu, fhat_lifts)? <= tol)
}

/// Residuals of the envelope conditions for a sphere congruence Z.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeReport {
    /// Worst |<F_p, Z_p>| (incidence), relative.
    pub incidence: f64,
    /// Worst rank-3 defect of span{Z_p - Z_q, F_p, F_q} (touching): the third
    /// singular value relative to the first.
    pub touching: f64,
}

/// Checks that the net envelops the congruence Z: incidence at vertices and
/// the touching condition Z_p = Z_q mod span{F_p, F_q} on edges.
pub fn envelope_check(net: &QuadNet, z: &Grid<MinkVec>) -> Result<EnvelopeReport> {
    let lifts = net.lift_grid()?;
    let mut incidence = 0.0f64;
    for m in 0..net.rows() {
        for n in 0..net.cols() {
            if !net.is_valid(m, n) {
                continue;
            }
            let f = lifts[(m, n)];
            let zz = z[(m, n)];
            incidence = incidence.max(fmath::abs(f.inner(&zz)) / ((1.0 + f.scale()) * (1.0 + zz.scale())));
        }
    }
    let mut touching = 0.0f64;
    for (pp, qq) in net.edges() {
        let dz = z[pp] - z[qq];
        let rows = alloc::vec![
            dz.coords().to_vec(),
            lifts[pp].coords().to_vec(),
            lifts[qq].coords().to_vec(),
        ];
        let mat = Mat::from_rows(&rows);
        let sv = linalg::singular_values(&mat);
        if sv[0] > 0.0 {
            touching = touching.max(sv[2] / sv[0]);
        }
    }
    Ok(EnvelopeReport { incidence, touching })
}

/// Batch residuals for the standing properties of a verified polynomial
/// conserved quantity (constant norms, the dP formula, Z perp F, curvature
/// spheres well defined from both sides and incident to both endpoints).
#[derive(Debug, Clone, Copy)]
pub struct StandingProperties {
    pub z_norm_constancy: f64,
    pub q_norm_constancy: f64,
    pub dp_formula: f64,
    pub z_perp_f: f64,
    pub curvature_sphere_two_sided: f64,
    pub curvature_sphere_incidence: f64,
    /// For linear quantities: constancy of <Q, Z>.
    pub qz_constancy: Option<f64>,
}

pub fn standing_properties(net: &QuadNet, p: &ConservedQuantity) -> Result<StandingProperties> {
    let lifts = net.lift_grid()?;
    let n_ord = p.order();
    let base = net.base_vertex()?;
    let z_grid = &p.coeffs[n_ord];
    let q_grid = &p.coeffs[0];
    let scale_sq = (p.size() * p.size()).max(1e-300);

    let mut z_norm_constancy = 0.0f64;
    let mut q_norm_constancy = 0.0f64;
    let mut z_perp_f = 0.0f64;
    let mut qz = 0.0f64;
    let z_base = z_grid[base].norm_sq();
    let q_base = q_grid[base].norm_sq();
    let qz_base = q_grid[base].inner(&z_grid[base]);
    for m in 0..net.rows() {
        for n in 0..net.cols() {
            if !net.is_valid(m, n) {
                continue;
            }
            z_norm_constancy = z_norm_constancy.max(fmath::abs(z_grid[(m, n)].norm_sq() - z_base) / scale_sq);
            q_norm_constancy = q_norm_constancy.max(fmath::abs(q_grid[(m, n)].norm_sq() - q_base) / scale_sq);
            let f = lifts[(m, n)];
            z_perp_f = z_perp_f.max(fmath::abs(f.inner(&z_grid[(m, n)])) / ((1.0 + f.scale()) * (1.0 + z_grid[(m, n)].scale())));
            qz = qz.max(fmath::abs(q_grid[(m, n)].inner(&z_grid[(m, n)]) - qz_base) / scale_sq);
        }
    }

    let dp_formula = dp_edge_formula_check(net, p)?;

    // curvature sphere S_pq from both sides, and its incidence
    let pn1 = &p.coeffs[n_ord.saturating_sub(1)];
    let mut two_sided = 0.0f64;
    let mut sphere_incidence = 0.0f64;
    if z_base > 1e-12 * scale_sq {
        for (pp, qq) in net.edges() {
            let a = net.edge_factor(pp, qq)?;
            let fp = lifts[pp];
            let fq = lifts[qq];
            let ip = fp.inner(&fq);
            if fmath::abs(ip) < 1e-300 {
                continue;
            }
            let s_from_p = z_grid[pp] + fp.scaled(a * pn1[qq].inner(&fq) / ip);
            let s_from_q = z_grid[qq] + fq.scaled(a * pn1[pp].inner(&fp) / ip);
            let denom = 1.0 + s_from_p.scale() + s_from_q.scale();
            two_sided = two_sided.max((s_from_p - s_from_q).scale() / denom);
            let s = s_from_p;
            sphere_incidence = sphere_incidence
                .max(fmath::abs(s.inner(&fp)) / ((1.0 + s.scale()) * (1.0 + fp.scale())))
                .max(fmath::abs(s.inner(&fq)) / ((1.0 + s.scale()) * (1.0 + fq.scale())));
        }
    }
    Ok(StandingProperties {
        z_norm_constancy,
        q_norm_constancy,
        dp_formula,
        z_perp_f,
        curvature_sphere_two_sided: two_sided,
        curvature_sphere_incidence: sphere_incidence,
        qz_constancy: if n_ord == 1 { Some(qz) } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mink::SpaceForm;
    use crate::net::QuadNet;
    use crate::quat::Quaternion;
    use crate::transforms::{calapso, christoffel, darboux};

    /// Discrete unit cylinder with its revolution edge factors and the
    /// hand-derived linear conserved quantity.
    pub(crate) fn cylinder_with_lcq(rows: usize, spokes: usize, alpha: f64) -> (QuadNet, ConservedQuantity) {
        let delta = 0.4f64;
        let nn = spokes as f64;
        let verts = Grid::from_fn(rows, spokes, |m, n| {
            let th = core::f64::consts::TAU * n as f64 / nn;
            Quaternion::imag(crate::fmath::cos(th), crate::fmath::sin(th), m as f64 * delta)
        });
        let mut net = QuadNet::new(0.0, verts);
        // revolution factors: a_h = -alpha (dh^2 + dr^2)/(r r'), a_v = 4 alpha sin^2(pi/N)
        let a_h = alloc::vec![-alpha * delta * delta; rows - 1];
        let s = crate::fmath::sin(core::f64::consts::PI / nn);
        let a_v = alloc::vec![4.0 * alpha * s * s; spokes - 1];
        net.set_factors(a_h, a_v);

        // Z from the revolution data: H = alpha, rho = -2 alpha, eta = 0
        let h_coeff = alpha;
        let rho = -2.0 * alpha;
        let q_vec = SpaceForm::new(0.0).q_vec();
        let z = Grid::from_fn(rows, spokes, |m, n| {
            let th = core::f64::consts::TAU * n as f64 / nn;
            let radial = Quaternion::imag(crate::fmath::cos(th), crate::fmath::sin(th), 0.0);
            let e = verts_at(m, n, rows, spokes, delta);
            let npart = radial.scale(rho);
            let z_up = npart + e.scale(h_coeff);
            // zinf = 2 (e . n) + H |e|^2
            let zinf = 2.0 * e.dot3(&npart) + h_coeff * e.norm_sq();
            MinkVec::new(z_up, h_coeff, zinf)
        });
        let q_grid = Grid::fill(rows, spokes, q_vec);
        (net, ConservedQuantity::linear(q_grid, z))
    }

    fn verts_at(m: usize, n: usize, _rows: usize, spokes: usize, delta: f64) -> Quaternion {
        let th = core::f64::consts::TAU * n as f64 / spokes as f64;
        Quaternion::imag(crate::fmath::cos(th), crate::fmath::sin(th), m as f64 * delta)
    }

    #[test]
    fn cylinder_lcq_verifies() {
        let (net, cq) = cylinder_with_lcq(5, 8, 0.5);
        let report = verify_cq(&net, &cq).unwrap();
        assert!(report.coeff_residual < 1e-12, "coeff residual {}", report.coeff_residual);
        assert!(report.sample_residual < 1e-12);
        let split = report.split_residuals.unwrap();
        assert!(split[0] < 1e-14 && split[1] < 1e-12 && split[2] < 1e-12);
    }

    #[test]
    fn cylinder_mean_curvature() {
        let (net, cq) = cylinder_with_lcq(5, 8, 0.5);
        let mc = mean_curvature(&cq, &net, 1e-10).unwrap();
        // ||Z|| = 2 alpha = 1, -<Z,Q> = alpha/2 = 1/4, euclidean 2x -> 1/2
        assert!((mc.z_norm - 1.0).abs() < 1e-12);
        assert!((mc.h_model_abs - 0.25).abs() < 1e-12);
        assert!((mc.h_euclidean_abs - 0.5).abs() < 1e-12);
        assert!(mc.kappa.abs() < 1e-12);
        // scaling the quantity leaves the normalized value unchanged
        let scaled = cq.scaled(3.0);
        let mc2 = mean_curvature(&scaled, &net, 1e-10).unwrap();
        assert!((mc2.h_euclidean_abs - 0.5).abs() < 1e-12);
    }

    #[test]
    fn spherical_net_order_zero_quantity() {
        // net inscribed in the unit sphere: Q := S is conserved with Z = 0
        let verts = Grid::from_fn(4, 4, |m, n| {
            let u = -0.3 + 0.2 * m as f64;
            let v = -0.3 + 0.2 * n as f64;
            let d = 1.0 + u * u + v * v;
            Quaternion::imag(2.0 * u / d, 2.0 * v / d, (u * u + v * v - 1.0) / d)
        });
        let mut net = QuadNet::new(0.0, verts);
        net.factorize(1e-9).unwrap();
        let s_vec = MinkVec::new(Quaternion::ZERO, 1.0, -1.0); // unit sphere
        let q_grid = Grid::fill(4, 4, s_vec);
        let z_grid = Grid::fill(4, 4, MinkVec::ZERO);
        let cq = ConservedQuantity::linear(q_grid, z_grid);
        let report = verify_cq(&net, &cq).unwrap();
        assert!(report.max_residual() < 1e-10, "residual {}", report.max_residual());
    }

    #[test]
    fn fault_injection_localizes() {
        let (net, mut cq) = cylinder_with_lcq(5, 8, 0.5);
        let z = &mut cq.coeffs[1];
        z[(2, 3)] = z[(2, 3)] + MinkVec::new(Quaternion::imag(0.01, 0.0, 0.0), 0.0, 0.0);
        let report = verify_cq(&net, &cq).unwrap();
        assert!(report.coeff_residual > 1e-5);
        let ((m, n), _, _) = report.worst_edge.unwrap();
        // worst edge must touch the perturbed vertex
        assert!((m as i32 - 2).abs() <= 1 && (n as i32 - 3).abs() <= 1, "({m},{n})");
    }

    #[test]
    fn solver_recovers_z_from_q() {
        let (net, cq) = cylinder_with_lcq(5, 8, 0.5);
        // the solver needs the factors (already set) and a Moutard lift
        let moutard = net.moutard_lift(1e-9).unwrap();
        let q_vec = cq.coeffs[0][(0, 0)];
        let cand = solve_z_given_q(&net, &moutard, (2, 3), &q_vec, 1e-8).unwrap();
        assert!(cand.report.max_residual() < 1e-10);
        // Z given Q is unique up to the stated propagation freedom, so the
        // normalized curvature data must match the hand-built quantity
        let mc_solved = mean_curvature(&cand.cq, &net, 1e-8).unwrap();
        let mc_hand = mean_curvature(&cq, &net, 1e-8).unwrap();
        assert!((mc_solved.h_euclidean_abs - mc_hand.h_euclidean_abs).abs() < 1e-10);
        assert!((mc_solved.kappa - mc_hand.kappa).abs() < 1e-10);
    }

    #[test]
    fn five_by_five_solver_finds_lcq() {
        let (net, cq) = cylinder_with_lcq(5, 8, 0.5);
        let moutard = net.moutard_lift(1e-9).unwrap();
        let outcome = solve_lcq(&net, &moutard, (2, 3), 1e-8).unwrap();
        assert!(!outcome.candidates.is_empty(), "no lcq found: {:?}", outcome.best_rejected);
        let best = &outcome.candidates[0];
        assert!(best.report.max_residual() < 1e-9);
        // the recovered Q must be proportional to [[0,1],[0,0]]
        let qv = best.cq.coeffs[0][(2, 3)];
        let qn = qv.scale();
        assert!(qv.x.norm() < 1e-8 * qn);
        assert!(qv.x0.abs() < 1e-8 * qn);
        assert!(qv.xinf.abs() > 0.9 * qn);
        // and the normalized mean curvature matches the hand-built one
        let mc = mean_curvature(&best.cq, &net, 1e-8).unwrap();
        let mc0 = mean_curvature(&cq, &net, 1e-8).unwrap();
        assert!((mc.h_euclidean_abs - mc0.h_euclidean_abs).abs() < 1e-9);
    }

    #[test]
    fn five_by_five_solver_rejects_non_cmc() {
        let (net, _) = cylinder_with_lcq(5, 8, 0.5);
        // perturb one vertex off the cylinder, breaking the cq but keeping
        // the star nonspherical
        let mut verts = Grid::from_fn(5, 8, |m, n| net.vertex(m, n));
        verts[(2, 3)] = verts[(2, 3)] + Quaternion::imag(0.05, -0.02, 0.03);
        let mut bad = QuadNet::new(0.0, verts);
        let (a_h, a_v) = net.factors().unwrap();
        bad.set_factors(a_h.into(), a_v.into());
        let Ok(moutard) = bad.moutard_lift(1e-2) else {
            return; // perturbation already breaks the Moutard lift: fine
        };
        let outcome = solve_lcq(&bad, &moutard, (2, 4), 1e-8).unwrap();
        assert!(outcome.candidates.is_empty());
        assert!(outcome.best_rejected.unwrap_or(1.0) > 1e-8);
    }

    #[test]
    fn spherical_star_detected() {
        // a net on the round sphere has singular star systems
        let verts = Grid::from_fn(5, 5, |m, n| {
            let u = -0.4 + 0.2 * m as f64;
            let v = -0.4 + 0.2 * n as f64;
            let d = 1.0 + u * u + v * v;
            Quaternion::imag(2.0 * u / d, 2.0 * v / d, (u * u + v * v - 1.0) / d)
        });
        let mut net = QuadNet::new(0.0, verts);
        net.factorize(1e-9).unwrap();
        let moutard = net.moutard_lift(1e-9).unwrap();
        let q_vec = SpaceForm::new(0.0).q_vec();
        match solve_z_given_q(&net, &moutard, (2, 2), &q_vec, 1e-8) {
            Err(Error::SphericalStar) => {}
            other => panic!("expected SphericalStar, got {:?}", other.map(|c| c.report.max_residual())),
        }
    }

    #[test]
    fn calapso_shift_preserves_cq_and_shifts_h() {
        let (net, cq) = cylinder_with_lcq(5, 8, 0.5);
        let chr = christoffel(&net, 1e-9).unwrap();
        let mu = 0.1;
        let cal = calapso(&net, &chr, mu, QuatMat2::IDENTITY, 1e-9).unwrap();
        let shifted = calapso_shift_cq(&cq, &cal, 1e-8).unwrap();
        assert_eq!(shifted.order(), 1);
        let report = verify_cq(&cal.transformed, &shifted).unwrap();
        assert!(report.max_residual() < 1e-9, "residual {}", report.max_residual());
        // Lawson shift: normalized model H moves by -mu
        let mc0 = mean_curvature(&cq, &net, 1e-8).unwrap();
        let mc1 = mean_curvature(&shifted, &cal.transformed, 1e-8).unwrap();
        assert!(
            (mc1.h_model - (mc0.h_model - mu)).abs() < 1e-9,
            "H^mu = {} vs H - mu = {}",
            mc1.h_model,
            mc0.h_model - mu
        );
        // mu = 0 is the identity
        let cal0 = calapso(&net, &chr, 0.0, QuatMat2::IDENTITY, 1e-9).unwrap();
        let same = calapso_shift_cq(&cq, &cal0, 1e-8).unwrap();
        let d = same.coeffs[1][(2, 2)] - cq.coeffs[1][(2, 2)];
        assert!(d.scale() < 1e-10);
    }

    #[test]
    fn dp_formula_holds_for_cylinder() {
        let (net, cq) = cylinder_with_lcq(5, 8, 0.5);
        let worst = dp_edge_formula_check(&net, &cq).unwrap();
        assert!(worst < 1e-11, "dP formula residual {worst}");
        // lambda = 0 trivially: dP = dQ = 0 (covered by the formula at 0)
        // a non-conserved Z breaks the formula
        let mut broken = cq.clone();
        broken.coeffs[1][(1, 1)] = broken.coeffs[1][(1, 1)] + MinkVec::new(Quaternion::imag(0.1, 0.0, 0.0), 0.0, 0.0);
        let bad = dp_edge_formula_check(&net, &broken).unwrap();
        assert!(bad > 1e-4);
    }

    #[test]
    fn baecklund_roots_of_cylinder() {
        let (net, cq) = cylinder_with_lcq(5, 8, 0.5);
        // normalized: ||Z|| = 1, H_model = 1/4, kappa = 0:
        // ||P(lambda)||^2 = lambda^2 - 2 H lambda = lambda (lambda - 1/2)
        let roots = baecklund_values(&net, &cq, 1e-9).unwrap();
        assert_eq!(roots.len(), 2);
        let mus: Vec<f64> = roots.iter().map(|r| r.mu).collect();
        assert!(mus[0].abs() < 1e-10);
        assert!((mus[1] - 0.5).abs() < 1e-10);
        // each root gives a lightlike complementary lift orthogonal to P(mu)
        for r in &roots {
            if r.mu.abs() < 1e-9 {
                continue; // mu = 0 root: P(0) = Q, lightlike but not a transform
            }
            for m in 0..net.rows() {
                for n in 0..net.cols() {
                    assert!(r.lift[(m, n)].is_lightlike(1e-9));
                }
            }
            assert!(is_baecklund(&net, &cq, r.mu, &r.lift, 1e-9).unwrap());
        }
    }

    #[test]
    fn darboux_cq_raises_order_by_at_most_one() {
        let (net, cq) = cylinder_with_lcq(5, 8, 0.5);
        let chr = christoffel(&net, 1e-9).unwrap();
        let moutard = net.moutard_lift(1e-9).unwrap();
        let mu = 0.8;
        let init = net.vertex(0, 0) + Quaternion::imag(0.3, 0.1, 0.2);
        let dar = darboux(&net, &chr, mu, init, 1e-8).unwrap();
        let hat = darboux_cq(&cq, &net, &moutard, &dar, 1e-7).unwrap();
        assert!(hat.order() <= 2);
        let report = verify_cq(&dar.transformed, &hat).unwrap();
        assert!(report.max_residual() < 1e-8, "residual {}", report.max_residual());
    }

    #[test]
    fn envelope_of_cylinder_z() {
        let (net, cq) = cylinder_with_lcq(5, 8, 0.5);
        let rep = envelope_check(&net, &cq.coeffs[1]).unwrap();
        assert!(rep.incidence < 1e-12, "incidence {}", rep.incidence);
        assert!(rep.touching < 1e-10, "touching {}", rep.touching);
        // perturbed Z fails incidence
        let mut z = cq.coeffs[1].clone();
        z[(2, 2)] = z[(2, 2)] + MinkVec::new(Quaternion::imag(0.05, 0.04, 0.03), 0.02, 0.01);
        let bad = envelope_check(&net, &z).unwrap();
        assert!(bad.incidence > 1e-4);
    }

    #[test]
    fn standing_properties_of_cylinder() {
        let (net, cq) = cylinder_with_lcq(5, 8, 0.5);
        let props = standing_properties(&net, &cq).unwrap();
        assert!(props.z_norm_constancy < 1e-12);
        assert!(props.q_norm_constancy < 1e-14);
        assert!(props.dp_formula < 1e-11);
        assert!(props.z_perp_f < 1e-12);
        assert!(props.curvature_sphere_two_sided < 1e-11);
        assert!(props.curvature_sphere_incidence < 1e-11);
        assert!(props.qz_constancy.unwrap() < 1e-13);
    }

    #[test]
    fn null_z_implies_positive_cross_ratios() {
        // the paper's explicit example: values j, i+j, 0, i in a checkered
        // pattern; a_h = 1, a_v = 2, Z = -(unscaled lift), ||Z||^2 = 0
        let verts = Grid::from_fn(4, 4, |m, n| match (m % 2, n % 2) {
            (0, 0) => Quaternion::J,
            (1, 0) => Quaternion::I + Quaternion::J,
            (1, 1) => Quaternion::ZERO,
            _ => Quaternion::I,
        });
        let mut net = QuadNet::new(0.0, verts);
        net.set_factors(alloc::vec![1.0; 3], alloc::vec![2.0; 3]);
        // all cross ratios are 1/2, positive, exactly
        for (m, n) in net.quad_indices() {
            let q = net.quad_cross_ratio(m, n).unwrap();
            assert!((q - Quaternion::real(0.5)).norm() < 1e-14);
        }
        let z = Grid::from_fn(4, 4, |m, n| {
            let e = net.vertex(m, n);
            // -[[e, -e^2], [1, -e]]
            MinkVec::new(-e, -1.0, -e.norm_sq())
        });
        let q_grid = Grid::fill(4, 4, MinkVec::new(Quaternion::ZERO, 0.0, 1.0));
        let cq = ConservedQuantity::linear(q_grid, z.clone());
        let report = verify_cq(&net, &cq).unwrap();
        assert!(report.max_residual() < 1e-12, "residual {}", report.max_residual());
        // ||Z||^2 = 0 at every vertex
        for (_, v) in z.iter() {
            assert!(v.norm_sq().abs() < 1e-13);
        }
    }
}
