//! Quad lattices of points in Im H: cross ratios, isothermic factorization,
//! Moutard lifts, vertex stars, and central spheres.
//!
//! A net is discrete isothermic when every quad is concircular (real cross
//! ratio) and the cross ratios factor as q = a_h(m)/a_v(n) with the factor of
//! each edge shared by the opposite edge of both adjacent quads. Everything
//! downstream (Christoffel, Calapso, Darboux, conserved quantities) consumes
//! the factors computed or assigned here.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fmath;
use crate::grid::Grid;
use crate::linalg::{self, Mat};
use crate::mink::{MinkVec, SpaceForm, SphereVec};
use crate::quat::Quaternion;

/// Quaternionic cross ratio (f_q - f_p)(f_r - f_q)^{-1}(f_s - f_r)(f_p - f_s)^{-1}.
///
/// Real exactly when the four points are concircular.
pub fn cross_ratio(
    fp: Quaternion,
    fq: Quaternion,
    fr: Quaternion,
    fs: Quaternion,
) -> Result<Quaternion> {
    let d1 = fq - fp;
    let d2 = fr - fq;
    let d3 = fs - fr;
    let d4 = fp - fs;
    let scale = d1.norm() + d2.norm() + d3.norm() + d4.norm();
    for d in [d1, d2, d3, d4] {
        if d.norm() <= 1e-15 * (1.0 + scale) {
            return Err(Error::Domain("repeated consecutive quad vertices"));
        }
    }
    Ok(d1 * d2.inverse()? * d3 * d4.inverse()?)
}

/// Moebius-invariant form of the cross ratio: Re(q) + i ||Im(q)||, the
/// branch with nonnegative imaginary part.
pub fn hat_cross_ratio(
    fp: Quaternion,
    fq: Quaternion,
    fr: Quaternion,
    fs: Quaternion,
) -> Result<Complex64> {
    let q = cross_ratio(fp, fq, fr, fs)?;
    Ok(Complex64::new(q.re(), q.im_norm()))
}

/// Cross ratio from the Gram matrix of light-cone lifts.
///
/// With s_ij = <P_i, P_j> and E = det(s), returns
/// (s12 s34 - s13 s24 + s14 s23 + sqrt(E)) / (2 s14 s23); E <= 0 always
/// holds for genuine lifts and sqrt(E) contributes i sqrt(-E).
pub fn cross_ratio_from_gram(s: &[[f64; 4]; 4], tol: f64) -> Result<Complex64> {
    let mut scale = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            if fmath::abs(s[i][j] - s[j][i]) > tol * (1.0 + fmath::abs(s[i][j])) {
                return Err(Error::Domain("Gram matrix is not symmetric"));
            }
            scale = scale.max(fmath::abs(s[i][j]));
        }
    }
    for i in 0..4 {
        if fmath::abs(s[i][i]) > tol * (1.0 + scale) {
            return Err(Error::Domain("Gram diagonal must vanish for lightlike lifts"));
        }
    }
    let denom = s[0][3] * s[1][2];
    if fmath::abs(denom) <= 1e-300 || fmath::abs(denom) <= tol * tol * scale * scale * 1e-6 {
        return Err(Error::Domain("degenerate configuration: s14 * s23 = 0"));
    }
    let m = Mat::from_rows(&[
        s[0].to_vec().into(),
        s[1].to_vec().into(),
        s[2].to_vec().into(),
        s[3].to_vec().into(),
    ]);
    let e = linalg::det(&m);
    let scale4 = scale * scale * scale * scale;
    if e > tol * (1.0 + scale4) {
        return Err(Error::Domain("Gram determinant must be nonpositive"));
    }
    let e = e.min(0.0);
    let num_re = s[0][1] * s[2][3] - s[0][2] * s[1][3] + s[0][3] * s[1][2];
    let num_im = fmath::sqrt(-e);
    let q = Complex64::new(num_re, num_im) / (2.0 * denom);
    // normalize to the nonnegative-imaginary branch
    Ok(Complex64::new(q.re, fmath::abs(q.im)))
}

/// Rectangular lattice of imaginary-quaternion vertices with per-edge cross
/// ratio factors.
///
/// Vertices are indexed `(m, n)`; the factor of every horizontal edge
/// `(m, n) - (m+1, n)` depends only on `m` and that of every vertical edge
/// `(m, n) - (m, n+1)` only on `n`, which is exactly the isothermic
/// factorization property. Holes are allowed at the boundary via the
/// validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadNet {
    pub kappa: f64,
    verts: Grid<Quaternion>,
    mask: Grid<bool>,
    a_h: Option<Vec<f64>>,
    a_v: Option<Vec<f64>>,
}

/// Moutard lift: per-vertex scalings of the space-form lifts making
/// F_p F_q + F_q F_p = a_pq I hold on every edge.
#[derive(Debug, Clone)]
pub struct MoutardLift {
    pub lifts: Grid<MinkVec>,
    pub scales: Grid<f64>,
    /// Worst relative residual of the edge identity.
    pub edge_residual: f64,
    /// Worst relative deviation of (F_r - F_p) from parallelity with (F_q - F_s).
    pub parallel_residual: f64,
}

impl QuadNet {
    pub fn new(kappa: f64, verts: Grid<Quaternion>) -> QuadNet {
        let mask = Grid::fill(verts.rows(), verts.cols(), true);
        QuadNet { kappa, verts, mask, a_h: None, a_v: None }
    }

    pub fn with_mask(kappa: f64, verts: Grid<Quaternion>, mask: Grid<bool>) -> QuadNet {
        assert_eq!(verts.rows(), mask.rows());
        assert_eq!(verts.cols(), mask.cols());
        QuadNet { kappa, verts, mask, a_h: None, a_v: None }
    }

    /// Assigns edge factors produced by a generator (trusted, not recomputed).
    pub fn set_factors(&mut self, a_h: Vec<f64>, a_v: Vec<f64>) {
        assert_eq!(a_h.len(), self.rows().saturating_sub(1));
        assert_eq!(a_v.len(), self.cols().saturating_sub(1));
        self.a_h = Some(a_h);
        self.a_v = Some(a_v);
    }

    pub fn rows(&self) -> usize {
        self.verts.rows()
    }

    pub fn cols(&self) -> usize {
        self.verts.cols()
    }

    pub fn space_form(&self) -> SpaceForm {
        SpaceForm::new(self.kappa)
    }

    pub fn vertex(&self, m: usize, n: usize) -> Quaternion {
        self.verts[(m, n)]
    }

    pub fn vertices(&self) -> &Grid<Quaternion> {
        &self.verts
    }

    pub fn mask(&self) -> &Grid<bool> {
        &self.mask
    }

    pub fn is_valid(&self, m: usize, n: usize) -> bool {
        self.verts.get(m, n).is_some() && self.mask[(m, n)]
    }

    pub fn factors(&self) -> Option<(&[f64], &[f64])> {
        match (&self.a_h, &self.a_v) {
            (Some(h), Some(v)) => Some((h, v)),
            _ => None,
        }
    }

    /// Factor of the edge between two adjacent vertices.
    pub fn edge_factor(&self, p: (usize, usize), q: (usize, usize)) -> Result<f64> {
        let (a_h, a_v) = self.factors().ok_or(Error::Domain("net has no edge factors"))?;
        if p.1 == q.1 && (p.0 + 1 == q.0 || q.0 + 1 == p.0) {
            Ok(a_h[p.0.min(q.0)])
        } else if p.0 == q.0 && (p.1 + 1 == q.1 || q.1 + 1 == p.1) {
            Ok(a_v[p.1.min(q.1)])
        } else {
            Err(Error::Domain("vertices are not adjacent"))
        }
    }

    /// True when all four corners of quad (m, n) are valid.
    pub fn quad_valid(&self, m: usize, n: usize) -> bool {
        m + 1 < self.rows()
            && n + 1 < self.cols()
            && self.is_valid(m, n)
            && self.is_valid(m + 1, n)
            && self.is_valid(m + 1, n + 1)
            && self.is_valid(m, n + 1)
    }

    /// Corner values (p, q, r, s) of quad (m, n) in counterclockwise order.
    pub fn quad(&self, m: usize, n: usize) -> [Quaternion; 4] {
        [
            self.verts[(m, n)],
            self.verts[(m + 1, n)],
            self.verts[(m + 1, n + 1)],
            self.verts[(m, n + 1)],
        ]
    }

    pub fn quad_indices(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for m in 0..self.rows().saturating_sub(1) {
            for n in 0..self.cols().saturating_sub(1) {
                if self.quad_valid(m, n) {
                    out.push((m, n));
                }
            }
        }
        out
    }

    /// Valid horizontal edges as (p, q) index pairs, q = p + (1, 0).
    pub fn h_edges(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut out = Vec::new();
        for m in 0..self.rows().saturating_sub(1) {
            for n in 0..self.cols() {
                if self.is_valid(m, n) && self.is_valid(m + 1, n) {
                    out.push(((m, n), (m + 1, n)));
                }
            }
        }
        out
    }

    /// Valid vertical edges as (p, q) index pairs, q = p + (0, 1).
    pub fn v_edges(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut out = Vec::new();
        for m in 0..self.rows() {
            for n in 0..self.cols().saturating_sub(1) {
                if self.is_valid(m, n) && self.is_valid(m, n + 1) {
                    out.push(((m, n), (m, n + 1)));
                }
            }
        }
        out
    }

    pub fn edges(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut out = self.h_edges();
        out.extend(self.v_edges());
        out
    }

    /// Relative concircularity defect ||Im q^|| / (1 + |q^|) of quad (m, n).
    pub fn concircularity_residual(&self, m: usize, n: usize) -> Result<f64> {
        let [p, q, r, s] = self.quad(m, n);
        let cr = cross_ratio(p, q, r, s)?;
        Ok(cr.im_norm() / (1.0 + cr.norm()))
    }

    /// Cross ratio of quad (m, n).
    pub fn quad_cross_ratio(&self, m: usize, n: usize) -> Result<Quaternion> {
        let [p, q, r, s] = self.quad(m, n);
        cross_ratio(p, q, r, s)
    }

    /// Computes the cross ratio factorizing function, storing per-row factors
    /// a_h and per-column factors a_v with q_{m,n} = a_h(m)/a_v(n).
    ///
    /// The base horizontal factor is seeded with the geometric mean of |q|
    /// over the base row (the global scalar is free). Fails with the worst
    /// quad index when a quad is nonconcircular or the Toda relation is
    /// violated.
    pub fn factorize(&mut self, tol: f64) -> Result<()> {
        let qrows = self.rows().saturating_sub(1);
        let qcols = self.cols().saturating_sub(1);
        if qrows == 0 || qcols == 0 {
            return Err(Error::Domain("net has no quads"));
        }
        let mut q_real: Grid<Option<f64>> = Grid::fill(qrows, qcols, None);
        for (m, n) in self.quad_indices() {
            let res = self.concircularity_residual(m, n)?;
            if res > tol {
                return Err(Error::NotIsothermic { m, n, residual: res });
            }
            q_real[(m, n)] = Some(self.quad_cross_ratio(m, n)?.re());
        }

        // bipartite propagation: row nodes carry a_h, column nodes carry a_v
        let mut a_h: Vec<Option<f64>> = alloc::vec![None; qrows];
        let mut a_v: Vec<Option<f64>> = alloc::vec![None; qcols];
        // seed from the first row that has quads
        let mut seeded = false;
        for m in 0..qrows {
            let mut log_sum = 0.0;
            let mut count = 0usize;
            for n in 0..qcols {
                if let Some(q) = q_real[(m, n)] {
                    if fmath::abs(q) < 1e-300 {
                        return Err(Error::NotIsothermic { m, n, residual: f64::INFINITY });
                    }
                    log_sum += fmath::ln(fmath::abs(q));
                    count += 1;
                }
            }
            if count > 0 {
                a_h[m] = Some(fmath::exp(log_sum / count as f64));
                seeded = true;
                break;
            }
        }
        if !seeded {
            return Err(Error::Domain("net has no valid quads"));
        }
        // breadth-first over the quad adjacency between row and column factors
        let mut changed = true;
        while changed {
            changed = false;
            for m in 0..qrows {
                for n in 0..qcols {
                    let Some(q) = q_real[(m, n)] else { continue };
                    match (a_h[m], a_v[n]) {
                        (Some(h), None) => {
                            a_v[n] = Some(h / q);
                            changed = true;
                        }
                        (None, Some(v)) => {
                            a_h[m] = Some(q * v);
                            changed = true;
                        }
                        _ => {}
                    }
                }
            }
        }
        // consistency check (the Toda relation, quad by quad)
        let mut worst: Option<(usize, usize, f64)> = None;
        for m in 0..qrows {
            for n in 0..qcols {
                let Some(q) = q_real[(m, n)] else { continue };
                let (Some(h), Some(v)) = (a_h[m], a_v[n]) else {
                    return Err(Error::Domain("quad graph is disconnected"));
                };
                let res = fmath::abs(q - h / v) / (1.0 + fmath::abs(q));
                if worst.map(|w| res > w.2).unwrap_or(true) {
                    worst = Some((m, n, res));
                }
            }
        }
        if let Some((m, n, res)) = worst {
            if res > tol {
                return Err(Error::NotIsothermic { m, n, residual: res });
            }
        }
        self.a_h = Some(a_h.into_iter().map(|x| x.unwrap_or(0.0)).collect());
        self.a_v = Some(a_v.into_iter().map(|x| x.unwrap_or(0.0)).collect());
        Ok(())
    }

    /// Space-form lifts of all valid vertices.
    pub fn lift_grid(&self) -> Result<Grid<MinkVec>> {
        let sf = self.space_form();
        let mut out = Grid::fill(self.rows(), self.cols(), MinkVec::ZERO);
        for m in 0..self.rows() {
            for n in 0..self.cols() {
                if self.is_valid(m, n) {
                    out[(m, n)] = sf.lift(self.verts[(m, n)])?;
                }
            }
        }
        Ok(out)
    }

    /// First valid vertex in row-major order; the base of all propagations.
    pub fn base_vertex(&self) -> Result<(usize, usize)> {
        for m in 0..self.rows() {
            for n in 0..self.cols() {
                if self.is_valid(m, n) {
                    return Ok((m, n));
                }
            }
        }
        Err(Error::Domain("net has no valid vertices"))
    }

    /// Visits valid vertices in breadth-first order from the base vertex,
    /// calling `step(p, q)` for each tree edge.
    pub fn bfs_edges(&self, mut step: impl FnMut((usize, usize), (usize, usize)) -> Result<()>) -> Result<()> {
        let base = self.base_vertex()?;
        let mut seen = Grid::fill(self.rows(), self.cols(), false);
        seen[base] = true;
        let mut queue = alloc::collections::VecDeque::new();
        queue.push_back(base);
        while let Some((m, n)) = queue.pop_front() {
            let mut neighbors: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
            for (dm, dn) in neighbors.iter_mut().map(|x| *x) {
                let (mm, nn) = (m as isize + dm, n as isize + dn);
                if mm < 0 || nn < 0 {
                    continue;
                }
                let (mm, nn) = (mm as usize, nn as usize);
                if mm >= self.rows() || nn >= self.cols() || seen[(mm, nn)] || !self.is_valid(mm, nn) {
                    continue;
                }
                step((m, n), (mm, nn))?;
                seen[(mm, nn)] = true;
                queue.push_back((mm, nn));
            }
        }
        for m in 0..self.rows() {
            for n in 0..self.cols() {
                if self.is_valid(m, n) && !seen[(m, n)] {
                    return Err(Error::Domain("valid vertex set is disconnected"));
                }
            }
        }
        Ok(())
    }

    /// Builds a Moutard lift by propagating per-vertex scales from the base
    /// vertex, then verifies both the edge identity and the diagonal
    /// parallelogram property on every quad.
    ///
    /// The base scale is 1; the remaining checkerboard freedom of the lift is
    /// inherent (any even/odd rescaling is again Moutard).
    pub fn moutard_lift(&self, tol: f64) -> Result<MoutardLift> {
        let (_, _) = self.factors().ok_or(Error::Domain("factorize the net first"))?;
        let lifts0 = self.lift_grid()?;
        let mut scales = Grid::fill(self.rows(), self.cols(), 0.0f64);
        scales[self.base_vertex()?] = 1.0;
        self.bfs_edges(|p, q| {
            let a = self.edge_factor(p, q)?;
            let ip = lifts0[p].inner(&lifts0[q]);
            if fmath::abs(ip) < 1e-300 {
                return Err(Error::Domain("degenerate edge in Moutard propagation"));
            }
            scales[q] = -a / (2.0 * scales[p] * ip);
            Ok(())
        })?;
        let lifts = Grid::from_fn(self.rows(), self.cols(), |m, n| lifts0[(m, n)].scaled(scales[(m, n)]));

        // verify the edge identity on all edges (non-tree edges included)
        let mut edge_residual = 0.0f64;
        for (p, q) in self.edges() {
            let a = self.edge_factor(p, q)?;
            let res = fmath::abs(2.0 * lifts[p].inner(&lifts[q]) + a) / (1.0 + fmath::abs(a));
            edge_residual = edge_residual.max(res);
        }
        // diagonal parallelogram property on all quads
        let mut parallel_residual = 0.0f64;
        for (m, n) in self.quad_indices() {
            let fp = lifts[(m, n)].coords();
            let fq = lifts[(m + 1, n)].coords();
            let fr = lifts[(m + 1, n + 1)].coords();
            let fs = lifts[(m, n + 1)].coords();
            let u: [f64; 5] = core::array::from_fn(|i| fr[i] - fp[i]);
            let v: [f64; 5] = core::array::from_fn(|i| fq[i] - fs[i]);
            let vv: f64 = v.iter().map(|x| x * x).sum();
            let uu: f64 = u.iter().map(|x| x * x).sum();
            let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            let mu = if vv > 0.0 { uv / vv } else { 0.0 };
            let mut diff = 0.0;
            for i in 0..5 {
                let d = u[i] - mu * v[i];
                diff += d * d;
            }
            let res = fmath::sqrt(diff) / (1.0 + fmath::sqrt(uu) + fmath::sqrt(vv));
            parallel_residual = parallel_residual.max(res);
        }
        if edge_residual > tol || parallel_residual > tol {
            return Err(Error::NoConvergence {
                what: "Moutard lift propagation",
                residual: edge_residual.max(parallel_residual),
            });
        }
        Ok(MoutardLift { lifts, scales, edge_residual, parallel_residual })
    }

    /// Central sphere through the diagonal vertex star of (m, n): the
    /// Minkowski-orthogonal complement of the five star lifts.
    pub fn vertex_star_sphere(&self, m: usize, n: usize, tol: f64) -> Result<SphereVec> {
        if m == 0 || n == 0 || m + 1 >= self.rows() || n + 1 >= self.cols() {
            return Err(Error::Domain("diagonal star requires an interior vertex"));
        }
        let idx = [(m, n), (m + 1, n + 1), (m + 1, n - 1), (m - 1, n - 1), (m - 1, n + 1)];
        for (a, b) in idx {
            if !self.is_valid(a, b) {
                return Err(Error::Domain("diagonal star vertex is missing"));
            }
        }
        let sf = self.space_form();
        let lifts: Vec<MinkVec> = idx
            .iter()
            .map(|&(a, b)| sf.lift(self.verts[(a, b)]))
            .collect::<Result<_>>()?;
        star_orthogonal_sphere(&lifts, tol).map_err(|e| match e {
            Error::Domain("star spans all of R^{4,1}") => Error::NotIsothermic {
                m,
                n,
                residual: f64::NAN,
            },
            other => other,
        })
    }

    /// Gram-rank test of the non-diagonal vertex star (the vertex and its
    /// four edge neighbors): true when the five lifts span at most a
    /// 4-dimensional space, i.e. the five points are cospherical.
    pub fn is_vertex_star_spherical(&self, m: usize, n: usize, tol: f64) -> Result<bool> {
        if m == 0 || n == 0 || m + 1 >= self.rows() || n + 1 >= self.cols() {
            return Err(Error::Domain("vertex star requires an interior vertex"));
        }
        let idx = [(m, n), (m + 1, n), (m - 1, n), (m, n + 1), (m, n - 1)];
        let sf = self.space_form();
        let mut rows = Vec::with_capacity(5);
        for (a, b) in idx {
            if !self.is_valid(a, b) {
                return Err(Error::Domain("vertex star vertex is missing"));
            }
            rows.push(sf.lift(self.verts[(a, b)])?.coords().to_vec());
        }
        let mat = Mat::from_rows(&rows);
        let sv = linalg::singular_values(&mat);
        Ok(sv[4] <= tol * sv[0].max(1e-300))
    }
}

/// S perpendicular to all given light-cone lifts, certified by the Gram
/// determinant. Errors when the span is genuinely 5-dimensional.
pub(crate) fn star_orthogonal_sphere(lifts: &[MinkVec], tol: f64) -> Result<SphereVec> {
    // rows: <F_i, e_j> = metric-weighted coordinates of F_i
    let rows: Vec<Vec<f64>> = lifts
        .iter()
        .map(|f| {
            let c = f.coords();
            alloc::vec![c[0], c[1], c[2], c[3], -c[4]]
        })
        .collect();
    let mat = Mat::from_rows(&rows);
    // smallest right singular vector is the orthogonal-complement candidate
    let gram = mat.transpose().matmul(&mat);
    let (eig, v) = linalg::sym_eigen(&gram);
    let mut min_i = 0;
    for i in 1..eig.len() {
        if eig[i] < eig[min_i] {
            min_i = i;
        }
    }
    let coords: [f64; 5] = core::array::from_fn(|r| v[(r, min_i)]);
    let s = MinkVec::from_coords(coords);
    // verify orthogonality; scale-free because both factors are unit-ish
    let mut worst = 0.0f64;
    for f in lifts {
        worst = worst.max(fmath::abs(f.inner(&s)) / (1.0 + f.scale()));
    }
    if worst > tol {
        return Err(Error::Domain("star spans all of R^{4,1}"));
    }
    SphereVec::new(s)
}
