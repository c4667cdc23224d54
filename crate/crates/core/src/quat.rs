//! Quaternions, 2x2 quaternionic matrices, Study determinants, and the
//! Moebius group G acting on Im H by x -> (ax+b)(cx+d)^{-1}.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::fmath;

/// Quaternion w + x i + y j + z k with f64 components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    /// Imaginary quaternion x i + y j + z k, the model of R^3 used throughout.
    pub const fn imag(x: f64, y: f64, z: f64) -> Self {
        Quaternion { w: 0.0, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Quaternion { w, x: 0.0, y: 0.0, z: 0.0 }
    }

    pub fn re(&self) -> f64 {
        self.w
    }

    /// Imaginary part as a quaternion with zero real part.
    pub fn im(&self) -> Quaternion {
        Quaternion::imag(self.x, self.y, self.z)
    }

    pub fn im_norm(&self) -> f64 {
        fmath::sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
    }

    pub fn conj(&self) -> Quaternion {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sq(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        fmath::sqrt(self.norm_sq())
    }

    pub fn scale(&self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Euclidean dot product of the four components.
    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Euclidean dot product of the imaginary parts.
    pub fn dot3(&self, other: &Quaternion) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn is_imaginary(&self, tol: f64) -> bool {
        fmath::abs(self.w) <= tol * (1.0 + self.norm())
    }

    /// q^{-1} = conj(q)/|q|^2.
    pub fn inverse(&self) -> Result<Quaternion> {
        let n2 = self.norm_sq();
        if n2 == 0.0 {
            return Err(Error::ZeroQuaternion);
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    pub fn to_array3(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array3(v: [f64; 3]) -> Quaternion {
        Quaternion::imag(v[0], v[1], v[2])
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

/// 2x2 quaternionic matrix [[a, b], [c, d]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuatMat2 {
    pub a: Quaternion,
    pub b: Quaternion,
    pub c: Quaternion,
    pub d: Quaternion,
}

/// Image of a point under a Moebius transformation of Im H u {inf}.
///
/// Sphere inversions legitimately send the center to infinity, so this is a
/// tagged value rather than an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobiusImage {
    Point(Quaternion),
    Infinity,
}

impl QuatMat2 {
    pub const IDENTITY: QuatMat2 = QuatMat2 {
        a: Quaternion::ONE,
        b: Quaternion::ZERO,
        c: Quaternion::ZERO,
        d: Quaternion::ONE,
    };

    pub const fn new(a: Quaternion, b: Quaternion, c: Quaternion, d: Quaternion) -> Self {
        QuatMat2 { a, b, c, d }
    }

    pub fn zero() -> Self {
        QuatMat2::new(Quaternion::ZERO, Quaternion::ZERO, Quaternion::ZERO, Quaternion::ZERO)
    }

    pub fn scale(&self, s: f64) -> QuatMat2 {
        QuatMat2::new(self.a.scale(s), self.b.scale(s), self.c.scale(s), self.d.scale(s))
    }

    /// Largest entry norm; used to make residuals scale-free.
    pub fn max_norm(&self) -> f64 {
        let mut m = self.a.norm();
        for q in [self.b, self.c, self.d] {
            let n = q.norm();
            if n > m {
                m = n;
            }
        }
        m
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a.norm_sq() + self.b.norm_sq() + self.c.norm_sq() + self.d.norm_sq()
    }

    /// Study determinant: the determinant of T conj(T)^t, which is real.
    ///
    /// [T] = |a|^2 |d|^2 + |b|^2 |c|^2 - 2 Re(b conj(d) c conj(a)),
    /// and [T1 T2] = [T1][T2].
    pub fn study_det(&self) -> f64 {
        let QuatMat2 { a, b, c, d } = *self;
        a.norm_sq() * d.norm_sq() + b.norm_sq() * c.norm_sq()
            - 2.0 * (b * d.conj() * c * a.conj()).re()
    }

    /// Closed-form inverse via the Study determinant.
    pub fn inverse(&self) -> Result<QuatMat2> {
        let det = self.study_det();
        let scale = self.frobenius_sq();
        if det == 0.0 || fmath::abs(det) < 1e-300 * scale * scale {
            return Err(Error::SingularMatrix { study_det: det });
        }
        let QuatMat2 { a, b, c, d } = *self;
        let inv = QuatMat2::new(
            a.conj().scale(d.norm_sq()) - c.conj() * d * b.conj(),
            c.conj().scale(b.norm_sq()) - a.conj() * b * d.conj(),
            b.conj().scale(c.norm_sq()) - d.conj() * c * a.conj(),
            d.conj().scale(a.norm_sq()) - b.conj() * a * c.conj(),
        );
        Ok(inv.scale(1.0 / det))
    }

    /// Residual of the Moebius group constraints
    /// conj(b)d + conj(d)b = conj(a)c + conj(c)a = 0 and Im(conj(a)d + conj(c)b) = 0,
    /// normalized by the squared matrix scale.
    pub fn mob3_residual(&self) -> f64 {
        let QuatMat2 { a, b, c, d } = *self;
        let bd = (b.conj() * d).re();
        let ac = (a.conj() * c).re();
        let ad_cb = a.conj() * d + c.conj() * b;
        let scale = self.frobenius_sq().max(1e-300);
        let mut r = 2.0 * fmath::abs(bd);
        r = r.max(2.0 * fmath::abs(ac));
        r = r.max(ad_cb.im_norm());
        r / scale
    }

    /// Membership test for the group G of matrices acting on the light cone.
    ///
    /// Requires both constraint residuals below `tol` and a nonvanishing real
    /// part of conj(a)d + conj(c)b.
    pub fn in_mob3(&self, tol: f64) -> bool {
        let QuatMat2 { a, b, c, d } = *self;
        let ad_cb = a.conj() * d + c.conj() * b;
        let scale = self.frobenius_sq().max(1e-300);
        self.mob3_residual() < tol && fmath::abs(ad_cb.re()) / scale > tol
    }

    /// Moebius action x -> (ax + b)(cx + d)^{-1} on imaginary quaternions.
    pub fn mob_apply(&self, x: Quaternion) -> MobiusImage {
        let num = self.a * x + self.b;
        let den = self.c * x + self.d;
        let den_sq = den.norm_sq();
        let scale = (self.max_norm() * (1.0 + x.norm())).max(1e-300);
        if fmath::sqrt(den_sq) <= 1e-14 * scale {
            return MobiusImage::Infinity;
        }
        MobiusImage::Point(num * den.conj().scale(1.0 / den_sq))
    }
}

impl Add for QuatMat2 {
    type Output = QuatMat2;
    fn add(self, o: QuatMat2) -> QuatMat2 {
        QuatMat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for QuatMat2 {
    type Output = QuatMat2;
    fn sub(self, o: QuatMat2) -> QuatMat2 {
        QuatMat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for QuatMat2 {
    type Output = QuatMat2;
    fn neg(self) -> QuatMat2 {
        self.scale(-1.0)
    }
}

impl Mul for QuatMat2 {
    type Output = QuatMat2;
    fn mul(self, o: QuatMat2) -> QuatMat2 {
        QuatMat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Mul<f64> for QuatMat2 {
    type Output = QuatMat2;
    fn mul(self, s: f64) -> QuatMat2 {
        self.scale(s)
    }
}
