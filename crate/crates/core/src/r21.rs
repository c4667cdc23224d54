//! Discrete spacelike CMC nets in R^{2,1}: the theta-formula cross ratio on
//! spacelike circles and the four-condition CMC verification.
//!
//! Coordinates are (x, y, t) with inner product x1 x2 + y1 y2 - t1 t2 and
//! the Minkowski cross product u ^ v = eta (u x v), eta = diag(1, 1, -1).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;
use crate::grid::Grid;

pub type Vec3 = [f64; 3];

pub fn minkowski_dot(u: &Vec3, v: &Vec3) -> f64 {
    u[0] * v[0] + u[1] * v[1] - u[2] * v[2]
}

fn euclid_cross(u: &Vec3, v: &Vec3) -> Vec3 {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

/// Minkowski cross product: <u ^ v, w> = det[u, v, w].
pub fn minkowski_cross(u: &Vec3, v: &Vec3) -> Vec3 {
    let c = euclid_cross(u, v);
    [c[0], c[1], -c[2]]
}

fn sub(u: &Vec3, v: &Vec3) -> Vec3 {
    [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
}

fn add(u: &Vec3, v: &Vec3) -> Vec3 {
    [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
}

fn scale(u: &Vec3, s: f64) -> Vec3 {
    [u[0] * s, u[1] * s, u[2] * s]
}

fn norm3(u: &Vec3) -> f64 {
    fmath::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])
}

/// Cross ratio of four points on a circle in a spacelike plane: the plane is
/// moved to horizontal by a Lorentz isometry (equivalently, read in an
/// orthonormal in-plane frame, where the induced metric is Euclidean), and
/// q = sin((tp - tq)/2) csc((tq - tr)/2) sin((tr - ts)/2) csc((ts - tp)/2)
/// from the circle angles.
pub fn r21_cross_ratio(pts: &[Vec3; 4], tol: f64) -> Result<f64> {
    let u0 = sub(&pts[1], &pts[0]);
    let u1 = sub(&pts[2], &pts[0]);
    let u2 = sub(&pts[3], &pts[0]);
    let scale_len = norm3(&u0) + norm3(&u1) + norm3(&u2);
    // Euclidean normal of the affine plane
    let n_e = euclid_cross(&u0, &u1);
    if norm3(&n_e) < 1e-13 * (1.0 + scale_len * scale_len) {
        return Err(Error::Domain("points are collinear"));
    }
    // coplanarity
    let volume = n_e[0] * u2[0] + n_e[1] * u2[1] + n_e[2] * u2[2];
    if fmath::abs(volume) > tol * (1.0 + norm3(&n_e) * norm3(&u2)) {
        return Err(Error::Domain("points are not coplanar"));
    }
    // spacelike plane <=> the Minkowski-orthogonal direction is timelike
    let n_m = [n_e[0], n_e[1], -n_e[2]];
    if minkowski_dot(&n_m, &n_m) >= 0.0 {
        return Err(Error::Domain("plane is not spacelike"));
    }
    // orthonormal in-plane frame (the induced metric is Euclidean)
    let e1 = {
        let n2 = minkowski_dot(&u0, &u0);
        if n2 <= 0.0 {
            return Err(Error::Domain("degenerate in-plane direction"));
        }
        scale(&u0, 1.0 / fmath::sqrt(n2))
    };
    let e2 = {
        let mut v = u1;
        let p = minkowski_dot(&v, &e1);
        v = sub(&v, &scale(&e1, p));
        let n2 = minkowski_dot(&v, &v);
        if n2 <= 0.0 {
            return Err(Error::Domain("degenerate in-plane direction"));
        }
        scale(&v, 1.0 / fmath::sqrt(n2))
    };
    let coords: Vec<[f64; 2]> = pts
        .iter()
        .map(|p| {
            let d = sub(p, &pts[0]);
            [minkowski_dot(&d, &e1), minkowski_dot(&d, &e2)]
        })
        .collect();
    // circumcircle through the first three points
    let (x1, y1) = (coords[1][0], coords[1][1]);
    let (x2, y2) = (coords[2][0], coords[2][1]);
    let d = 2.0 * (x1 * y2 - y1 * x2);
    if fmath::abs(d) < 1e-13 * (1.0 + scale_len * scale_len) {
        return Err(Error::Domain("circle points are collinear"));
    }
    let s1 = x1 * x1 + y1 * y1;
    let s2 = x2 * x2 + y2 * y2;
    let cx = (y2 * s1 - y1 * s2) / d;
    let cy = (x1 * s2 - x2 * s1) / d;
    let radius = fmath::hypot(cx, cy);
    // the fourth point must lie on the circle
    let r4 = fmath::hypot(coords[3][0] - cx, coords[3][1] - cy);
    if fmath::abs(r4 - radius) > tol.max(1e-10) * (1.0 + radius) {
        return Err(Error::Domain("points are not concircular"));
    }
    let theta: Vec<f64> = coords
        .iter()
        .map(|c| fmath::atan2(c[1] - cy, c[0] - cx))
        .collect();
    let q = fmath::sin(0.5 * (theta[0] - theta[1])) / fmath::sin(0.5 * (theta[1] - theta[2]))
        * fmath::sin(0.5 * (theta[2] - theta[3]))
        / fmath::sin(0.5 * (theta[3] - theta[0]));
    Ok(q)
}

/// Residual channels of the four discrete spacelike CMC conditions.
#[derive(Debug, Clone, Copy)]
pub struct R21CmcReport {
    /// max |<n_p, n_p> + 1| over vertices.
    pub unit_normal: f64,
    /// max |d(e) ^ n_q + n_p ^ d(e)| over edges (parallelity of dn and de).
    pub parallel: f64,
    /// max |<d(e), n_p + n_q>| over edges.
    pub mixed_orthogonality: f64,
    /// max |h (dn + H d(e)) + a d(e)/|d(e)|^2| over edges.
    pub christoffel: f64,
}

impl R21CmcReport {
    pub fn max_residual(&self) -> f64 {
        self.unit_normal
            .max(self.parallel)
            .max(self.mixed_orthogonality)
            .max(self.christoffel)
    }
}

/// Spacelike CMC net data in R^{2,1}: vertices, unit normals, edge factors.
#[derive(Debug, Clone)]
pub struct R21Net {
    pub verts: Grid<Vec3>,
    pub normals: Grid<Vec3>,
    /// Horizontal edge factors, per row index m.
    pub a_h: Vec<f64>,
    /// Vertical edge factors, per column index n.
    pub a_v: Vec<f64>,
}

impl R21Net {
    fn edge_factor(&self, p: (usize, usize), q: (usize, usize)) -> f64 {
        if p.1 == q.1 {
            self.a_h[p.0.min(q.0)]
        } else {
            self.a_v[p.1.min(q.1)]
        }
    }

    fn edges(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut out = Vec::new();
        for m in 0..self.verts.rows() {
            for n in 0..self.verts.cols() {
                if m + 1 < self.verts.rows() {
                    out.push(((m, n), (m + 1, n)));
                }
                if n + 1 < self.verts.cols() {
                    out.push(((m, n), (m, n + 1)));
                }
            }
        }
        out
    }
}

/// Evaluates the four CMC conditions at the given constants h and H.
pub fn r21_cmc_verify(net: &R21Net, h: f64, big_h: f64) -> R21CmcReport {
    let mut unit_normal = 0.0f64;
    for (_, n) in net.normals.iter() {
        unit_normal = unit_normal.max(fmath::abs(minkowski_dot(n, n) + 1.0));
    }
    let mut parallel = 0.0f64;
    let mut mixed = 0.0f64;
    let mut christoffel = 0.0f64;
    for (p, q) in net.edges() {
        let de = sub(&net.verts[q], &net.verts[p]);
        let np = net.normals[p];
        let nq = net.normals[q];
        let cr = add(&minkowski_cross(&de, &nq), &minkowski_cross(&np, &de));
        parallel = parallel.max(norm3(&cr) / (1.0 + norm3(&de)));
        mixed = mixed.max(fmath::abs(minkowski_dot(&de, &add(&np, &nq))) / (1.0 + norm3(&de)));
        let a = net.edge_factor(p, q);
        let de_sq = minkowski_dot(&de, &de);
        let dn = sub(&nq, &np);
        let lhs = scale(&add(&dn, &scale(&de, big_h)), h);
        let rhs = scale(&de, -a / de_sq);
        christoffel = christoffel.max(norm3(&sub(&lhs, &rhs)) / (1.0 + norm3(&rhs)));
    }
    R21CmcReport { unit_normal, parallel, mixed_orthogonality: mixed, christoffel }
}

/// Discrete spacelike cylinder over the hyperbola x^2 - t^2 = -r^2 extruded
/// along y, with its exact normals, edge factors, and CMC constants
/// (h, H) = (2r, -1/(2r)).
pub fn spacelike_cylinder(m_steps: usize, n_steps: usize, r: f64, beta: f64, delta: f64) -> (R21Net, f64, f64) {
    let verts = Grid::from_fn(m_steps, n_steps, |m, n| {
        let u = beta * n as f64;
        [r * fmath::sinh(u), delta * m as f64, r * fmath::cosh(u)]
    });
    let normals = Grid::from_fn(m_steps, n_steps, |_m, n| {
        let u = beta * n as f64;
        [-fmath::sinh(u), 0.0, -fmath::cosh(u)]
    });
    let sh = fmath::sinh(beta / 2.0);
    let a_h = alloc::vec![delta * delta; m_steps.saturating_sub(1)];
    let a_v = alloc::vec![-4.0 * r * r * sh * sh; n_steps.saturating_sub(1)];
    let net = R21Net { verts, normals, a_h, a_v };
    (net, 2.0 * r, -1.0 / (2.0 * r))
}

/// Flat spacelike grid with constant normal: conditions 1 to 3 hold with
/// H = 0; the fourth is the umbilic-degenerate case (no finite h scales the
/// vanishing dn to the Christoffel differential of a plane).
pub fn flat_grid(rows: usize, cols: usize, d1: f64, d2: f64) -> R21Net {
    let verts = Grid::from_fn(rows, cols, |m, n| [d1 * m as f64, d2 * n as f64, 0.0]);
    let normals = Grid::fill(rows, cols, [0.0, 0.0, -1.0]);
    let a_h = alloc::vec![d1 * d1; rows.saturating_sub(1)];
    let a_v = alloc::vec![-d2 * d2; cols.saturating_sub(1)];
    R21Net { verts, normals, a_h, a_v }
}

/// A Lorentz isometry of R^{2,1}: rotation about the t-axis, boost along x,
/// and a translation.
#[derive(Debug, Clone, Copy)]
pub struct LorentzIsometry {
    pub rotation: f64,
    pub rapidity: f64,
    pub translation: Vec3,
}

impl LorentzIsometry {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        let (c, s) = (fmath::cos(self.rotation), fmath::sin(self.rotation));
        let rotated = [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]];
        let (ch, sh) = (fmath::cosh(self.rapidity), fmath::sinh(self.rapidity));
        let boosted = [ch * rotated[0] + sh * rotated[2], rotated[1], sh * rotated[0] + ch * rotated[2]];
        add(&boosted, &self.translation)
    }

    /// Applies only the linear part (for direction vectors like normals).
    pub fn apply_linear(&self, p: &Vec3) -> Vec3 {
        let mut out = self.apply(p);
        let origin = self.apply(&[0.0, 0.0, 0.0]);
        out = sub(&out, &origin);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn horizontal_unit_circle_square() {
        // angles 0, pi/2, pi, 3pi/2 on the horizontal unit circle: q = -1
        let pts = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
        ];
        let q = r21_cross_ratio(&pts, 1e-10).unwrap();
        assert!((q + 1.0).abs() < 1e-12, "q = {q}");
    }

    #[test]
    fn cross_ratio_is_lorentz_invariant() {
        let mut rng = StdRng::seed_from_u64(77);
        let base = [
            [1.0, 0.0, 0.0],
            [0.3, 0.9539392014169456, 0.0],
            [-0.8, 0.5999999999999999, 0.0],
            [0.1, -0.99498743710662, 0.0],
        ];
        let q0 = r21_cross_ratio(&base, 1e-9).unwrap();
        for _ in 0..100 {
            let iso = LorentzIsometry {
                rotation: rng.gen_range(0.0..core::f64::consts::TAU),
                rapidity: rng.gen_range(-1.5..1.5),
                translation: [
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                ],
            };
            let moved = [
                iso.apply(&base[0]),
                iso.apply(&base[1]),
                iso.apply(&base[2]),
                iso.apply(&base[3]),
            ];
            let q = r21_cross_ratio(&moved, 1e-9).unwrap();
            assert!((q - q0).abs() < 1e-10 * (1.0 + q0.abs()), "q = {q} vs {q0}");
        }
    }

    #[test]
    fn lightlike_plane_rejected() {
        // plane spanned by (1,0,0) and the lightlike (0,1,1)
        let pts = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0],
        ];
        match r21_cross_ratio(&pts, 1e-9) {
            Err(Error::Domain(msg)) => assert!(msg.contains("spacelike")),
            other => panic!("expected non-spacelike error, got {other:?}"),
        }
    }

    #[test]
    fn spacelike_cylinder_passes_cmc_conditions() {
        let (net, h, big_h) = spacelike_cylinder(6, 7, 1.0, 0.35, 0.4);
        assert!((big_h + 0.5).abs() < 1e-14);
        let report = r21_cmc_verify(&net, h, big_h);
        assert!(report.unit_normal < 1e-12, "unit normal {}", report.unit_normal);
        assert!(report.parallel < 1e-12, "parallel {}", report.parallel);
        assert!(report.mixed_orthogonality < 1e-12, "mixed {}", report.mixed_orthogonality);
        assert!(report.christoffel < 1e-12, "christoffel {}", report.christoffel);
        // the net's quads are concircular-spacelike with the factor ratio
        let pts = [
            net.verts[(0, 0)],
            net.verts[(1, 0)],
            net.verts[(1, 1)],
            net.verts[(0, 1)],
        ];
        let q = r21_cross_ratio(&pts, 1e-9).unwrap();
        assert!((q - net.a_h[0] / net.a_v[0]).abs() < 1e-10 * (1.0 + q.abs()));
    }

    #[test]
    fn perturbed_cylinder_fails() {
        let (mut net, h, big_h) = spacelike_cylinder(5, 6, 1.0, 0.35, 0.4);
        net.verts[(2, 3)][0] += 0.01;
        let report = r21_cmc_verify(&net, h, big_h);
        assert!(report.max_residual() > 1e-4);
    }

    #[test]
    fn flat_grid_conditions() {
        // the totally umbilic case: conditions 1 to 3 hold exactly (with
        // H = 0 and constant normal); condition 4 has no finite h, which is
        // the plane's degeneracy, so it is reported rather than asserted
        let net = flat_grid(4, 4, 0.7, 1.1);
        let report = r21_cmc_verify(&net, 1.0, 0.0);
        assert!(report.unit_normal < 1e-14);
        assert!(report.parallel < 1e-14);
        assert!(report.mixed_orthogonality < 1e-14);
        assert!(report.christoffel > 0.1);
    }
}
