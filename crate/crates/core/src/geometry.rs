//! Planar primitives shared by every solver.
//!
//! All kernels are generic over the scalar type. Public angles are in
//! degrees; rotations convert to radians internally.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::Float;

use crate::error::{Error, Result};

/// A planar point or vector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2<T = f64> {
    pub x: T,
    pub y: T,
}

/// Rotation sense about a center: `Ccw` is +1, `Cw` is -1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Ccw,
    Cw,
}

impl Orientation {
    pub fn sign<T: Float>(self) -> T {
        match self {
            Orientation::Ccw => T::one(),
            Orientation::Cw => -T::one(),
        }
    }

    /// `Ccw` for non-negative values.
    pub fn from_sign<T: Float>(value: T) -> Self {
        if value >= T::zero() {
            Orientation::Ccw
        } else {
            Orientation::Cw
        }
    }
}

impl<T: Float> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Ok(self * (T::one() / n))
        } else {
            Err(Error::DegenerateDirection)
        }
    }

    /// Counter-clockwise rotation by `radians` about the origin.
    pub fn rotated(self, radians: T) -> Self {
        let (s, c) = radians.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Affine combination `(1 - t) self + t other`.
    pub fn lerp(self, other: Self, t: T) -> Self {
        self * (T::one() - t) + other * t
    }
}

impl<T: Float> Add for Vec2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Float> AddAssign for Vec2<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Float> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Float> SubAssign for Vec2<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Float> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl<T: Float> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2<f64> {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Vec2<f64>> for [f64; 2] {
    fn from(v: Vec2<f64>) -> Self {
        [v.x, v.y]
    }
}

/// Relative tolerance `nominal`, floored at a few ulps for narrow types.
pub(crate) fn tolerance<T: Float>(nominal: f64) -> T {
    let floor = T::epsilon() * T::from(64.0).unwrap();
    T::from(nominal).unwrap().max(floor)
}

/// `(from - to_subtract) / ‖from - to_subtract‖`.
pub fn unit_direction<T: Float>(from: Vec2<T>, to_subtract: Vec2<T>) -> Result<Vec2<T>> {
    (from - to_subtract).normalized()
}

/// Intersections of two circles, ordered with the point on the left of the
/// center line `c1 -> c2` first. Tangent circles yield a single point.
pub fn circle_circle_intersections<T: Float>(
    c1: Vec2<T>,
    r1: T,
    c2: Vec2<T>,
    r2: T,
) -> Result<Vec<Vec2<T>>> {
    let delta = c2 - c1;
    let d = delta.norm();
    if d == T::zero() {
        return if r1 == r2 {
            Err(Error::InfiniteIntersections)
        } else {
            Ok(Vec::new())
        };
    }
    let two = T::one() + T::one();
    let along = (r1 * r1 - r2 * r2 + d * d) / (two * d);
    let h2 = r1 * r1 - along * along;
    let scale = r1.max(r2).max(d);
    let tol = tolerance::<T>(1e-9) * scale * scale;
    let axis = delta * (T::one() / d);
    let foot = c1 + axis * along;
    if h2 < -tol {
        Ok(Vec::new())
    } else if h2 <= tol {
        Ok(vec![foot])
    } else {
        let offset = axis.perp() * h2.sqrt();
        Ok(vec![foot + offset, foot - offset])
    }
}

/// Smallest `μ ∈ [0, 1]` with `‖(1-μ)p0 + μ p1 - center‖ = radius`.
pub fn segment_circle_first_hit<T: Float>(
    p0: Vec2<T>,
    p1: Vec2<T>,
    center: Vec2<T>,
    radius: T,
) -> Option<T> {
    let d = p1 - p0;
    let f = p0 - center;
    let a = d.dot(d);
    if a == T::zero() {
        return None;
    }
    let two = T::one() + T::one();
    let b = two * f.dot(d);
    let c = f.dot(f) - radius * radius;
    let four_ac = (two + two) * a * c;
    let mut disc = b * b - four_ac;
    let tol = tolerance::<T>(1e-9) * (b * b).max(four_ac.abs()).max(a * a * radius.powi(4));
    if disc < T::zero() {
        if disc < -tol {
            return None;
        }
        disc = T::zero();
    }
    // q = -(b + sign(b)√disc)/2 avoids cancellation; roots are q/a and c/q.
    let sign = if b >= T::zero() { T::one() } else { -T::one() };
    let q = -(b + sign * disc.sqrt()) / two;
    let mut roots = if q == T::zero() {
        [T::zero(), T::zero()]
    } else {
        [q / a, c / q]
    };
    if roots[1] < roots[0] {
        roots.swap(0, 1);
    }
    roots
        .into_iter()
        .find(|&mu| mu >= T::zero() && mu <= T::one())
}

/// Angle between two vectors in degrees, in `[0, 180]`.
pub fn angle_between_deg<T: Float>(u: Vec2<T>, v: Vec2<T>) -> Result<T> {
    let nu = u.norm();
    let nv = v.norm();
    if nu == T::zero() || nv == T::zero() {
        return Err(Error::DegenerateDirection);
    }
    let cos = (u.dot(v) / (nu * nv)).max(-T::one()).min(T::one());
    Ok(cos.acos().to_degrees())
}

/// `center + R(orientation · angle)(p - center)`.
pub fn rotate_about<T: Float>(
    p: Vec2<T>,
    center: Vec2<T>,
    angle_deg: T,
    orientation: Orientation,
) -> Vec2<T> {
    let radians = orientation.sign::<T>() * angle_deg.to_radians();
    center + (p - center).rotated(radians)
}
