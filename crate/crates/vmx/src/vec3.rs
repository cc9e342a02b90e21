use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Cartesian 3-vector used for positions, momenta and fields.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n == 0.0 {
            ZERO
        } else {
            self / n
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn comp(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn set_comp(&mut self, i: usize, value: f64) {
        match i {
            0 => self.x = value,
            1 => self.y = value,
            _ => self.z = value,
        }
    }

    /// Any unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthogonal(self) -> Vec3 {
        let trial = if self.x.abs() < 0.9 {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(0.0, 1.0, 0.0)
        };
        (trial - self * (trial.dot(self) / self.norm_sq())).normalized()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        self.x -= o.x;
        self.y -= o.y;
        self.z -= o.z;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// 3x3 matrix acting on [`Vec3`], row-major.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct Mat3 {
    pub rows: [Vec3; 3],
}

impl Mat3 {
    pub fn from_rows(r0: Vec3, r1: Vec3, r2: Vec3) -> Self {
        Mat3 { rows: [r0, r1, r2] }
    }

    pub fn identity() -> Self {
        Mat3::from_rows(
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        )
    }

    /// Outer product a b^T.
    pub fn outer(a: Vec3, b: Vec3) -> Self {
        Mat3::from_rows(b * a.x, b * a.y, b * a.z)
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.rows[0].dot(v), self.rows[1].dot(v), self.rows[2].dot(v))
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        Mat3::from_rows(self.rows[0] * s, self.rows[1] * s, self.rows[2] * s)
    }

    pub fn add(&self, o: &Mat3) -> Mat3 {
        Mat3::from_rows(
            self.rows[0] + o.rows[0],
            self.rows[1] + o.rows[1],
            self.rows[2] + o.rows[2],
        )
    }

    pub fn sub(&self, o: &Mat3) -> Mat3 {
        Mat3::from_rows(
            self.rows[0] - o.rows[0],
            self.rows[1] - o.rows[1],
            self.rows[2] - o.rows[2],
        )
    }

    /// Rotation taking the unit vector `from` to the unit vector `to` (Rodrigues).
    pub fn rotation_between(from: Vec3, to: Vec3) -> Mat3 {
        let c = from.dot(to);
        let axis = from.cross(to);
        let s2 = axis.norm_sq();
        if s2 < 1e-30 {
            if c > 0.0 {
                return Mat3::identity();
            }
            // antipodal: rotate by pi around any orthogonal axis
            let a = from.any_orthogonal();
            let k = Mat3::outer(a, a);
            return k.scale(2.0).sub(&Mat3::identity());
        }
        let k = Mat3::from_rows(
            Vec3::new(0.0, -axis.z, axis.y),
            Vec3::new(axis.z, 0.0, -axis.x),
            Vec3::new(-axis.y, axis.x, 0.0),
        );
        let mut kk = Mat3::default();
        for i in 0..3 {
            for j in 0..3 {
                let mut sum = 0.0;
                for l in 0..3 {
                    sum += k.rows[i].comp(l) * k.rows[l].comp(j);
                }
                kk.rows[i].set_comp(j, sum);
            }
        }
        Mat3::identity().add(&k).add(&kk.scale((1.0 - c) / s2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_is_orthogonal() {
        let a = Vec3::new(1.0, 2.0, 3.0);
        let b = Vec3::new(-0.5, 0.7, 0.2);
        let c = a.cross(b);
        assert!(c.dot(a).abs() < 1e-14);
        assert!(c.dot(b).abs() < 1e-14);
    }

    #[test]
    fn rotation_maps_from_to() {
        let from = Vec3::new(0.0, 0.0, 1.0);
        let cases = [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.6, -0.8, 0.0),
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(0.3, 0.4, 0.866025403784).normalized(),
        ];
        for to in cases {
            let r = Mat3::rotation_between(from, to);
            let img = r.apply(from);
            assert!((img - to).norm() < 1e-12, "image {img:?} target {to:?}");
            // orthogonality: preserves lengths
            let v = Vec3::new(0.2, -1.3, 0.5);
            assert!((r.apply(v).norm() - v.norm()).abs() < 1e-12);
        }
    }
}
