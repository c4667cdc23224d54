//! The R^{4,1} matrix model: light cone, space-form quadrics, sphere vectors,
//! inversions, and conversions between models of hyperbolic space.
//!
//! An element is the 2x2 quaternionic matrix [[x, xinf], [x0, -x]] with x
//! imaginary, carrying the Minkowski metric <X,Y> I = -(XY + YX)/2 of
//! signature (4,1). Points of the space form M_kappa are light-cone elements
//! normalized against Q = [[0, 1], [kappa, 0]]; spacelike vectors determine
//! spheres.

use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fmath;
use crate::quat::{QuatMat2, Quaternion};

/// Element of R^{4,1} in 2x2 quaternionic matrix form [[x, xinf], [x0, -x]].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MinkVec {
    /// Imaginary quaternion in the upper-left entry.
    pub x: Quaternion,
    /// Real lower-left entry.
    pub x0: f64,
    /// Real upper-right entry.
    pub xinf: f64,
}

impl MinkVec {
    pub const ZERO: MinkVec = MinkVec {
        x: Quaternion::ZERO,
        x0: 0.0,
        xinf: 0.0,
    };

    pub const fn new(x: Quaternion, x0: f64, xinf: f64) -> Self {
        MinkVec { x, x0, xinf }
    }

    /// Orthonormal basis with signature (+, +, +, +, -).
    pub fn basis() -> [MinkVec; 5] {
        [
            MinkVec::new(Quaternion::I, 0.0, 0.0),
            MinkVec::new(Quaternion::J, 0.0, 0.0),
            MinkVec::new(Quaternion::K, 0.0, 0.0),
            MinkVec::new(Quaternion::ZERO, -1.0, 1.0),
            MinkVec::new(Quaternion::ZERO, 1.0, 1.0),
        ]
    }

    /// Coordinates (x1, x2, x3, x4, x5) with x4 = (xinf - x0)/2 and
    /// x5 = (xinf + x0)/2.
    pub fn coords(&self) -> [f64; 5] {
        [
            self.x.x,
            self.x.y,
            self.x.z,
            0.5 * (self.xinf - self.x0),
            0.5 * (self.xinf + self.x0),
        ]
    }

    pub fn from_coords(c: [f64; 5]) -> MinkVec {
        MinkVec::new(Quaternion::imag(c[0], c[1], c[2]), c[4] - c[3], c[3] + c[4])
    }

    pub fn to_mat(&self) -> QuatMat2 {
        QuatMat2::new(
            self.x,
            Quaternion::real(self.xinf),
            Quaternion::real(self.x0),
            -self.x,
        )
    }

    /// Reads a matrix back as an R^{4,1} element, validating its structure.
    pub fn from_mat(t: &QuatMat2, tol: f64) -> Result<MinkVec> {
        let scale = t.max_norm().max(1e-300);
        let (v, defect) = MinkVec::project_mat(t);
        if defect > tol * scale {
            return Err(Error::Domain("matrix does not lie in R^{4,1}"));
        }
        Ok(v)
    }

    /// Nearest R^{4,1} element of a matrix together with the absolute size of
    /// the discarded components. Used where heavy cancellation makes the
    /// defect meaningful only against the sizes of the inputs.
    pub fn project_mat(t: &QuatMat2) -> (MinkVec, f64) {
        let x = (t.a.im() - t.d.im()).scale(0.5);
        let defect = fmath::abs(t.a.w)
            .max(fmath::abs(t.d.w))
            .max((t.a.im() + t.d.im()).norm() * 0.5)
            .max(t.b.im_norm())
            .max(t.c.im_norm());
        (MinkVec::new(x, t.c.w, t.b.w), defect)
    }

    /// Minkowski inner product; <X,Y> I = -(XY + YX)/2.
    pub fn inner(&self, other: &MinkVec) -> f64 {
        self.x.dot3(&other.x) - 0.5 * (self.xinf * other.x0 + self.x0 * other.xinf)
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    /// sqrt(<X,X>) for spacelike X.
    pub fn spacelike_norm(&self) -> Result<f64> {
        let n2 = self.norm_sq();
        if n2 <= 0.0 {
            return Err(Error::Domain("vector is not spacelike"));
        }
        Ok(fmath::sqrt(n2))
    }

    /// Euclidean size of the components, for relative tolerances.
    pub fn scale(&self) -> f64 {
        fmath::sqrt(self.x.norm_sq() + self.x0 * self.x0 + self.xinf * self.xinf)
    }

    pub fn is_lightlike(&self, tol: f64) -> bool {
        let s = self.scale();
        fmath::abs(self.norm_sq()) <= tol * (1.0 + s * s)
    }

    pub fn scaled(&self, s: f64) -> MinkVec {
        MinkVec::new(self.x.scale(s), self.x0 * s, self.xinf * s)
    }

    /// Conjugation X -> T X T^{-1} by a Moebius group element, an isometry of
    /// R^{4,1} preserving the light cone.
    pub fn conjugate_by(&self, t: &QuatMat2, tol: f64) -> Result<MinkVec> {
        let t_inv = t.inverse()?;
        let m = *t * self.to_mat() * t_inv;
        MinkVec::from_mat(&m, tol)
    }
}

impl Add for MinkVec {
    type Output = MinkVec;
    fn add(self, o: MinkVec) -> MinkVec {
        MinkVec::new(self.x + o.x, self.x0 + o.x0, self.xinf + o.xinf)
    }
}

impl Sub for MinkVec {
    type Output = MinkVec;
    fn sub(self, o: MinkVec) -> MinkVec {
        MinkVec::new(self.x - o.x, self.x0 - o.x0, self.xinf - o.xinf)
    }
}

impl Neg for MinkVec {
    type Output = MinkVec;
    fn neg(self) -> MinkVec {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for MinkVec {
    type Output = MinkVec;
    fn mul(self, s: f64) -> MinkVec {
        self.scaled(s)
    }
}

/// Space form of sectional curvature kappa, realized as the quadric
/// { X in L^4 : <X, Q> = -1 } with Q = [[0, 1], [kappa, 0]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceForm {
    pub kappa: f64,
}

impl SpaceForm {
    pub const EUCLIDEAN: SpaceForm = SpaceForm { kappa: 0.0 };

    pub const fn new(kappa: f64) -> Self {
        SpaceForm { kappa }
    }

    /// The vector Q determining the quadric.
    pub fn q_vec(&self) -> MinkVec {
        MinkVec::new(Quaternion::ZERO, self.kappa, 1.0)
    }

    /// Light-cone lift of a point, normalized into the quadric:
    /// X = 2/(1 - kappa x^2) [[x, -x^2], [1, -x]].
    pub fn lift(&self, x: Quaternion) -> Result<MinkVec> {
        let r2 = x.norm_sq();
        // x imaginary: x^2 = -|x|^2, so 1 - kappa x^2 = 1 + kappa |x|^2
        let denom = 1.0 + self.kappa * r2;
        if fmath::abs(denom) <= 1e-13 * (1.0 + fmath::abs(self.kappa) * r2) {
            return Err(Error::Domain("point lies on the quadric's excluded set"));
        }
        let s = 2.0 / denom;
        Ok(MinkVec::new(x.scale(s), s, s * r2))
    }

    /// Chart point and normalizing scale of a light-cone element.
    ///
    /// Returns the imaginary quaternion x = (upper left)/(lower left) and the
    /// real alpha with alpha X in M_kappa.
    pub fn project(&self, x: &MinkVec, tol: f64) -> Result<(Quaternion, f64)> {
        let s = x.scale();
        if !x.is_lightlike(tol.max(1e-8)) {
            return Err(Error::Domain("projection input is not lightlike"));
        }
        if fmath::abs(x.x0) <= 1e-13 * (1.0 + s) {
            return Err(Error::ProjectsToInfinity);
        }
        let q = self.q_vec();
        let pairing = x.inner(&q);
        if fmath::abs(pairing) <= 1e-13 * (1.0 + s) {
            return Err(Error::ProjectsToInfinity);
        }
        Ok((x.x.scale(1.0 / x.x0), -1.0 / pairing))
    }
}

/// Spacelike vector of R^{4,1}, determining the sphere
/// { Y in M_kappa : <Y, S> = 0 }. Defined projectively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereVec(pub MinkVec);

/// Euclidean description of the sphere S~ determined by a spacelike vector,
/// read in the kappa = 0 chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereGeometry {
    Sphere {
        /// Center z/z0 in the chart.
        center: Quaternion,
        /// Radius 2||S||/|z0| in the metric of M_0, which scales the chart by
        /// a factor of 2; equals 1/h0.
        radius: f64,
        /// Radius ||S||/|z0| of the chart sphere |y - center| = const.
        chart_radius: f64,
        /// Mean curvature |z0|/(2||S||) of the sphere in M_0.
        h0: f64,
    },
    /// z0 = 0: the sphere through infinity, a plane { y : y.normal = offset }.
    Plane { normal: Quaternion, offset: f64 },
}

impl SphereVec {
    pub fn new(v: MinkVec) -> Result<SphereVec> {
        if v.norm_sq() <= 0.0 {
            return Err(Error::Domain("sphere vector must be spacelike"));
        }
        Ok(SphereVec(v))
    }

    /// Sphere vector of the chart sphere |y - center| = r (so ||S|| = r).
    pub fn from_center_radius(center: Quaternion, r: f64) -> Result<SphereVec> {
        if r <= 0.0 {
            return Err(Error::Domain("sphere radius must be positive"));
        }
        let c2 = center.norm_sq();
        SphereVec::new(MinkVec::new(center, 1.0, c2 - r * r))
    }

    pub fn unit(&self) -> Result<SphereVec> {
        let n = self.0.spacelike_norm()?;
        Ok(SphereVec(self.0.scaled(1.0 / n)))
    }

    /// Center, radius and mean curvature of the sphere in M_0, or its plane
    /// data when the lower-left entry vanishes.
    pub fn geometry(&self, tol: f64) -> Result<SphereGeometry> {
        let norm = self.0.spacelike_norm()?;
        let z0 = self.0.x0;
        if fmath::abs(z0) <= tol * (1.0 + self.0.scale()) {
            let zn = self.0.x.norm();
            if zn == 0.0 {
                return Err(Error::Domain("degenerate sphere vector"));
            }
            // membership -2(y.z) + zinf = 0
            return Ok(SphereGeometry::Plane {
                normal: self.0.x.scale(1.0 / zn),
                offset: self.0.xinf / (2.0 * zn),
            });
        }
        Ok(SphereGeometry::Sphere {
            center: self.0.x.scale(1.0 / z0),
            radius: 2.0 * norm / fmath::abs(z0),
            chart_radius: norm / fmath::abs(z0),
            h0: fmath::abs(z0) / (2.0 * norm),
        })
    }

    /// Mean curvature of the sphere when read in the space form M_kappa.
    pub fn h_kappa(&self, kappa: f64, tol: f64) -> Result<f64> {
        match self.geometry(tol)? {
            SphereGeometry::Sphere { center, h0, .. } => {
                // H_kappa = H_0 - kappa/(4 H_0) - H_0 kappa C_0^2, C_0^2 = -|C_0|^2
                Ok(h0 - kappa / (4.0 * h0) + h0 * kappa * center.norm_sq())
            }
            SphereGeometry::Plane { .. } => Err(Error::Domain("plane has no center")),
        }
    }

    /// Intersection angle with another sphere, in [0, pi].
    ///
    /// The orientation-dependent sign of the paper's formula is not fixed
    /// here; callers choose an orientation convention.
    pub fn angle_to(&self, other: &SphereVec, tol: f64) -> Result<f64> {
        let n1 = self.0.spacelike_norm()?;
        let n2 = other.0.spacelike_norm()?;
        let cos = self.0.inner(&other.0) / (n1 * n2);
        if fmath::abs(cos) > 1.0 + tol {
            return Err(Error::Domain("spheres do not intersect"));
        }
        Ok(fmath::acos(cos.clamp(-1.0, 1.0)))
    }

    /// Inversion through the sphere: p -> p - 2 <p, S> S at ||S|| = 1.
    ///
    /// The vector is normalized internally, so any spacelike representative
    /// may be passed.
    pub fn invert(&self, p: &MinkVec) -> Result<MinkVec> {
        let u = self.unit()?;
        Ok(*p - u.0.scaled(2.0 * p.inner(&u.0)))
    }
}

/// Hyperboloid point of H^3 in R^{3,1}, coordinates (x1, x2, x3, x0) with
/// x0 > 0 and x0^2 - x1^2 - x2^2 - x3^2 = 1.
pub type HyperboloidPoint = [f64; 4];

/// Stereographic projection of the hyperboloid onto the Poincare ball.
pub fn to_poincare(p: HyperboloidPoint, tol: f64) -> Result<[f64; 3]> {
    let [x1, x2, x3, x0] = p;
    if x0 <= 0.0 {
        return Err(Error::Domain("hyperboloid point must have x0 > 0"));
    }
    let residual = x0 * x0 - x1 * x1 - x2 * x2 - x3 * x3 - 1.0;
    if fmath::abs(residual) > tol * (1.0 + x0 * x0) {
        return Err(Error::Domain("point is not on the hyperboloid"));
    }
    let d = 1.0 + x0;
    Ok([x1 / d, x2 / d, x3 / d])
}

/// Inverse of [`to_poincare`].
pub fn from_poincare(p: [f64; 3]) -> Result<HyperboloidPoint> {
    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    if r2 >= 1.0 {
        return Err(Error::Domain("point must lie in the open unit ball"));
    }
    let s = 2.0 / (1.0 - r2);
    Ok([s * p[0], s * p[1], s * p[2], (1.0 + r2) / (1.0 - r2)])
}

/// Moebius map from the Poincare ball to the upper half space, sending the
/// origin to (0, 0, 1) and fixing the boundary circle { x3 = 0, |x| = 1 }.
pub fn to_upper_half(p: [f64; 3]) -> Result<[f64; 3]> {
    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    if r2 >= 1.0 {
        return Err(Error::Domain("point must lie in the open unit ball"));
    }
    let denom = p[0] * p[0] + p[1] * p[1] + (p[2] - 1.0) * (p[2] - 1.0);
    Ok([2.0 * p[0] / denom, 2.0 * p[1] / denom, (1.0 - r2) / denom])
}

/// Inverse of [`to_upper_half`].
pub fn from_upper_half(u: [f64; 3]) -> Result<[f64; 3]> {
    if u[2] <= 0.0 {
        return Err(Error::Domain("upper half-space point must have x3 > 0"));
    }
    let s2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let denom = u[0] * u[0] + u[1] * u[1] + (u[2] + 1.0) * (u[2] + 1.0);
    Ok([2.0 * u[0] / denom, 2.0 * u[1] / denom, (s2 - 1.0) / denom])
}

/// Map psi from R^{3,1} to 2x2 Hermitian matrices, with
/// -det(psi(x)) = <x, x>. Rows are [[x0+x3, x1+i x2], [x1-i x2, x0-x3]].
pub fn to_hermitian(p: HyperboloidPoint) -> [[Complex64; 2]; 2] {
    let [x1, x2, x3, x0] = p;
    [
        [Complex64::new(x0 + x3, 0.0), Complex64::new(x1, x2)],
        [Complex64::new(x1, -x2), Complex64::new(x0 - x3, 0.0)],
    ]
}

pub fn hermitian_det(m: &[[Complex64; 2]; 2]) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Isometry from the Hermitian model to the Poincare ball.
pub fn hermitian_to_poincare(m: &[[Complex64; 2]; 2]) -> [f64; 3] {
    let a11 = m[0][0].re;
    let a22 = m[1][1].re;
    let a12 = m[0][1];
    let denom = 2.0 + a11 + a22;
    [2.0 * a12.re / denom, 2.0 * a12.im / denom, (a11 - a22) / denom]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const TOL: f64 = 1e-12;

    fn rand_imag(rng: &mut StdRng) -> Quaternion {
        Quaternion::imag(
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
        )
    }

    #[test]
    fn basis_signature() {
        let e = MinkVec::basis();
        let expected = [1.0, 1.0, 1.0, 1.0, -1.0];
        for (v, sig) in e.iter().zip(expected) {
            assert!((v.inner(v) - sig).abs() < TOL);
        }
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(e[i].inner(&e[j]).abs() < TOL);
                }
            }
        }
    }

    #[test]
    fn inner_matches_matrix_anticommutator() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let a = MinkVec::new(rand_imag(&mut rng), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let b = MinkVec::new(rand_imag(&mut rng), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let anti = a.to_mat() * b.to_mat() + b.to_mat() * a.to_mat();
            // -(XY + YX)/2 must be <X,Y> I
            let inner = a.inner(&b);
            assert!((anti.a.re() + 2.0 * inner).abs() < 1e-11);
            assert!((anti.d.re() + 2.0 * inner).abs() < 1e-11);
            assert!(anti.a.im_norm() < 1e-11);
            assert!(anti.b.norm() < 1e-11);
            assert!(anti.c.norm() < 1e-11);
        }
    }

    #[test]
    fn timelike_basis_vector() {
        let e5 = MinkVec::new(Quaternion::ZERO, 1.0, 1.0);
        assert!((e5.inner(&e5) + 1.0).abs() < TOL);
    }

    #[test]
    fn lift_examples() {
        let sf0 = SpaceForm::new(0.0);
        let at_origin = sf0.lift(Quaternion::ZERO).unwrap();
        assert_eq!(at_origin, MinkVec::new(Quaternion::ZERO, 2.0, 0.0));
        assert!(at_origin.is_lightlike(TOL));

        let sf1 = SpaceForm::new(1.0);
        let at_i = sf1.lift(Quaternion::I).unwrap();
        assert!((at_i.x - Quaternion::I).norm() < TOL);
        assert!((at_i.x0 - 1.0).abs() < TOL);
        assert!((at_i.xinf - 1.0).abs() < TOL);
        assert!((at_i.inner(&sf1.q_vec()) + 1.0).abs() < TOL);

        // kappa = 0 lifts of 0 and i pair to -2 = 2(p - q)^2
        let p0 = sf0.lift(Quaternion::ZERO).unwrap();
        let pi = sf0.lift(Quaternion::I).unwrap();
        assert!((p0.inner(&pi) + 2.0).abs() < TOL);
    }

    #[test]
    fn lift_project_round_trip() {
        let mut rng = StdRng::seed_from_u64(5);
        for kappa in [-1.0, 0.0, 1.0] {
            let sf = SpaceForm::new(kappa);
            for _ in 0..3 {
                let x = rand_imag(&mut rng);
                if kappa < 0.0 && (x.norm() - 1.0).abs() < 0.2 {
                    continue; // stay away from the excluded set
                }
                let lifted = sf.lift(x).unwrap();
                assert!((lifted.inner(&sf.q_vec()) + 1.0).abs() < 1e-11);
                let (back, alpha) = sf.project(&lifted, 1e-8).unwrap();
                assert!((back - x).norm() < 1e-11);
                assert!((alpha - 1.0).abs() < 1e-11); // already normalized
                // rescaled representatives project to the same point
                let (back2, alpha2) = sf.project(&lifted.scaled(3.0), 1e-8).unwrap();
                assert!((back2 - x).norm() < 1e-11);
                assert!((alpha2 - 1.0 / 3.0).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn sphere_geometry_example() {
        // S = [[0, -1], [1, 0]]: unit sphere about the origin in the chart
        let s = SphereVec::new(MinkVec::new(Quaternion::ZERO, 1.0, -1.0)).unwrap();
        match s.geometry(1e-10).unwrap() {
            SphereGeometry::Sphere { center, radius, chart_radius, h0 } => {
                assert!(center.norm() < TOL);
                assert!((radius - 2.0).abs() < TOL);
                assert!((chart_radius - 1.0).abs() < TOL);
                assert!((h0 - 0.5).abs() < TOL);
            }
            SphereGeometry::Plane { .. } => panic!("expected a sphere"),
        }
        // projective invariance
        let scaled = SphereVec::new(s.0.scaled(5.0)).unwrap();
        match scaled.geometry(1e-10).unwrap() {
            SphereGeometry::Sphere { center, radius, .. } => {
                assert!(center.norm() < TOL);
                assert!((radius - 2.0).abs() < TOL);
            }
            SphereGeometry::Plane { .. } => panic!("expected a sphere"),
        }
    }

    #[test]
    fn sphere_membership_matches_chart_distance() {
        let mut rng = StdRng::seed_from_u64(9);
        let sf0 = SpaceForm::EUCLIDEAN;
        for _ in 0..50 {
            let center = rand_imag(&mut rng);
            let r = rng.gen_range(0.3..2.0);
            let s = SphereVec::from_center_radius(center, r).unwrap();
            let SphereGeometry::Sphere { center: c2, chart_radius, .. } = s.geometry(1e-10).unwrap()
            else {
                panic!("expected sphere");
            };
            assert!((c2 - center).norm() < 1e-10);
            assert!((chart_radius - r).abs() < 1e-10);
            // a random chart point on the sphere is orthogonal to S after lifting
            let dir = rand_imag(&mut rng);
            let dir = if dir.norm() < 1e-6 { Quaternion::I } else { dir.scale(1.0 / dir.norm()) };
            let y = center + dir.scale(r);
            let lift = sf0.lift(y).unwrap();
            assert!(lift.inner(&s.0).abs() < 1e-10 * (1.0 + lift.scale() * s.0.scale()));
        }
    }

    #[test]
    fn sphere_angles() {
        let s1 = SphereVec::from_center_radius(Quaternion::ZERO, 1.0).unwrap();
        assert!(s1.angle_to(&s1, 1e-10).unwrap().abs() < 1e-7);

        // unit spheres with centers at distance 1: law of cosines gives
        // cos(angle) = (1 + 1 - 1)/2 = 1/2
        let s2 = SphereVec::from_center_radius(Quaternion::I, 1.0).unwrap();
        let angle = s1.angle_to(&s2, 1e-10).unwrap();
        assert!((angle - core::f64::consts::FRAC_PI_3).abs() < 1e-12);

        // orthogonal spheres: centers distance sqrt(2), both radius 1
        let s3 = SphereVec::from_center_radius(
            Quaternion::imag(1.0, 1.0, 0.0),
            1.0,
        )
        .unwrap();
        let right = s1.angle_to(&s3, 1e-10).unwrap();
        assert!((right - core::f64::consts::FRAC_PI_2).abs() < 1e-12);

        // disjoint spheres rejected
        let far = SphereVec::from_center_radius(Quaternion::imag(5.0, 0.0, 0.0), 1.0).unwrap();
        assert!(s1.angle_to(&far, 1e-10).is_err());
    }

    #[test]
    fn inversion_properties() {
        let mut rng = StdRng::seed_from_u64(21);
        let s = SphereVec::from_center_radius(Quaternion::ZERO, 1.5).unwrap();
        let sf0 = SpaceForm::EUCLIDEAN;
        for _ in 0..50 {
            let p = MinkVec::new(rand_imag(&mut rng), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let q = s.invert(&p).unwrap();
            // involution
            let back = s.invert(&q).unwrap();
            assert!((back - p).scale() < 1e-11 * (1.0 + p.scale()));
            // isometry
            assert!((q.norm_sq() - p.norm_sq()).abs() < 1e-10 * (1.0 + p.scale() * p.scale()));
            // fixed set
            if p.inner(&s.unit().unwrap().0).abs() < 1e-14 {
                assert!((q - p).scale() < 1e-12);
            }
        }
        // classical inversion: |x| = d maps to chart radius^2 / d along the same ray
        let x = Quaternion::imag(0.7, -0.2, 0.4);
        let d = x.norm();
        let lifted = sf0.lift(x).unwrap();
        let image = s.invert(&lifted).unwrap();
        assert!(image.is_lightlike(1e-12));
        let (y, _) = sf0.project(&image, 1e-8).unwrap();
        let rho = 1.5;
        let expected = x.scale(rho * rho / (d * d));
        assert!((y - expected).norm() < 1e-11);
    }

    #[test]
    fn conjugation_is_isometry() {
        let mut rng = StdRng::seed_from_u64(33);
        // random G element: [[q1, 0], [0, q2]] and [[0,1],[1,0]] products
        for _ in 0..40 {
            let q1 = crate::quat::Quaternion::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let t = QuatMat2::new(q1, Quaternion::ZERO, Quaternion::ZERO, q1.conj().inverse().unwrap());
            assert!(t.in_mob3(1e-9));
            let a = MinkVec::new(rand_imag(&mut rng), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let b = MinkVec::new(rand_imag(&mut rng), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let ta = a.conjugate_by(&t, 1e-9).unwrap();
            let tb = b.conjugate_by(&t, 1e-9).unwrap();
            assert!((ta.inner(&tb) - a.inner(&b)).abs() < 1e-9 * (1.0 + a.scale() * b.scale()));
        }
    }

    #[test]
    fn antipodal_map_is_in_g() {
        // x -> kappa^{-1} x^{-1} realized by T = [[0, 1/kappa], [1, 0]]
        for kappa in [1.0f64, -1.0] {
            let t = QuatMat2::new(
                Quaternion::ZERO,
                Quaternion::real(1.0 / kappa),
                Quaternion::ONE,
                Quaternion::ZERO,
            );
            assert!(t.in_mob3(1e-10));
            let x = Quaternion::imag(0.3, 0.4, -0.2);
            match t.mob_apply(x) {
                crate::quat::MobiusImage::Point(y) => {
                    let expected = x.inverse().unwrap().scale(1.0 / kappa);
                    assert!((y - expected).norm() < 1e-12);
                }
                crate::quat::MobiusImage::Infinity => panic!("unexpected infinity"),
            }
        }
    }

    #[test]
    fn poincare_model_conversions() {
        assert_eq!(to_poincare([0.0, 0.0, 0.0, 1.0], 1e-8).unwrap(), [0.0, 0.0, 0.0]);
        let t = 1.0f64;
        let p = to_poincare([0.0, 0.0, t.sinh(), t.cosh()], 1e-8).unwrap();
        assert!((p[2] - (t / 2.0).tanh()).abs() < TOL);
        // round trip
        let back = from_poincare(p).unwrap();
        assert!((back[2] - t.sinh()).abs() < 1e-12);
        assert!((back[3] - t.cosh()).abs() < 1e-12);
        // off-hyperboloid input rejected
        assert!(to_poincare([0.3, 0.0, 0.0, 1.2], 1e-8).is_err());
    }

    #[test]
    fn upper_half_space_conversions() {
        let u = to_upper_half([0.0, 0.0, 0.0]).unwrap();
        assert!((u[0]).abs() < TOL && (u[1]).abs() < TOL && (u[2] - 1.0).abs() < TOL);
        // near-boundary points of the equator circle are nearly fixed
        let eps = 1e-9;
        let p = [1.0 - eps, 0.0, 0.0];
        let u = to_upper_half(p).unwrap();
        assert!((u[0] - p[0]).abs() < 1e-7 && u[1].abs() < 1e-7 && u[2].abs() < 1e-7);
        // round trip
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..50 {
            let mut p = [
                rng.gen_range(-0.7..0.7),
                rng.gen_range(-0.7..0.7),
                rng.gen_range(-0.7..0.7),
            ];
            let n2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            if n2 >= 0.96 {
                p = [0.1, 0.1, 0.1];
            }
            let u = to_upper_half(p).unwrap();
            assert!(u[2] > 0.0);
            let back = from_upper_half(u).unwrap();
            for i in 0..3 {
                assert!((back[i] - p[i]).abs() < 1e-12);
            }
        }
        assert!(to_upper_half([1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn hermitian_model() {
        let id = to_hermitian([0.0, 0.0, 0.0, 1.0]);
        assert!((id[0][0].re - 1.0).abs() < TOL && (id[1][1].re - 1.0).abs() < TOL);
        assert!(id[0][1].norm_sqr().sqrt() < TOL);

        let mut rng = StdRng::seed_from_u64(43);
        for _ in 0..50 {
            let v = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            let m = to_hermitian(v);
            let minkowski = v[3] * v[3] - v[0] * v[0] - v[1] * v[1] - v[2] * v[2];
            // <x,x>_{3,1} = -x0^2 + ... here with signature so that
            // -det(psi) = x1^2 + x2^2 + x3^2 - x0^2
            assert!((hermitian_det(&m).re + (-minkowski)).abs() < 1e-10);
            assert!(hermitian_det(&m).im.abs() < 1e-12);
        }

        // boost along x3 acts as conjugation by diag(e^{t/2}, e^{-t/2})
        let t = 0.8f64;
        let (ch, sh) = (t.cosh(), t.sinh());
        let v = [0.4, -0.3, 0.6, (1.0f64 + 0.4 * 0.4 + 0.3 * 0.3 + 0.6 * 0.6).sqrt()];
        let boosted = [v[0], v[1], v[2] * ch + v[3] * sh, v[2] * sh + v[3] * ch];
        let lhs = to_hermitian(boosted);
        let m = to_hermitian(v);
        let (e, einv) = ((t / 2.0).exp(), (-t / 2.0).exp());
        // B psi B^* with B = diag(e^{t/2}, e^{-t/2})
        let rhs = [
            [m[0][0] * e * e, m[0][1] * e * einv],
            [m[1][0] * e * einv, m[1][1] * einv * einv],
        ];
        for r in 0..2 {
            for c in 0..2 {
                assert!((lhs[r][c] - rhs[r][c]).norm_sqr().sqrt() < 1e-12);
            }
        }
    }
}
