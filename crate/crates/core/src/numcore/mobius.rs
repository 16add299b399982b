use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Determinant threshold below which a matrix is not a Mobius map.
pub const DET_EPS: f64 = 1e-12;

/// A point of the Riemann sphere in homogeneous coordinates `[z : w]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub z: Complex64,
    pub w: Complex64,
}

impl HPoint {
    pub const INFINITY: HPoint = HPoint {
        z: Complex64 { re: 1.0, im: 0.0 },
        w: Complex64 { re: 0.0, im: 0.0 },
    };

    pub fn finite(z: Complex64) -> Self {
        HPoint {
            z,
            w: Complex64::new(1.0, 0.0),
        }
    }

    pub fn real(x: f64) -> Self {
        HPoint::finite(Complex64::new(x, 0.0))
    }

    /// Affine coordinate, `None` at (or numerically at) infinity.
    pub fn affine(&self) -> Option<Complex64> {
        (self.w.norm() > 1e-300 && (self.z / self.w).is_finite()).then(|| self.z / self.w)
    }

    pub fn is_infinite(&self) -> bool {
        self.affine().is_none()
    }

    fn cross(&self, other: &HPoint) -> Complex64 {
        self.z * other.w - self.w * other.z
    }

    /// Chordal distance on the Riemann sphere.
    pub fn chordal(&self, other: &HPoint) -> f64 {
        let na = (self.z.norm_sqr() + self.w.norm_sqr()).sqrt();
        let nb = (other.z.norm_sqr() + other.w.norm_sqr()).sqrt();
        self.cross(other).norm() / (na * nb)
    }
}

impl From<Complex64> for HPoint {
    fn from(z: Complex64) -> Self {
        HPoint::finite(z)
    }
}

/// `z -> (a z + b) / (c z + d)`, stored with unit Frobenius norm and the
/// first entry of largest modulus made positive real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    m: [Complex64; 4],
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let fro = [a, b, c, d].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !fro.is_finite() || fro == 0.0 {
            return Err(Error::DegenerateMobius);
        }
        let mut m = [a / fro, b / fro, c / fro, d / fro];
        if (m[0] * m[3] - m[1] * m[2]).norm() <= DET_EPS {
            return Err(Error::DegenerateMobius);
        }
        let mut best = 0;
        for k in 1..4 {
            if m[k].norm() > m[best].norm() * (1.0 + 1e-12) {
                best = k;
            }
        }
        let phase = m[best].conj() / m[best].norm();
        for z in &mut m {
            *z *= phase;
        }
        Ok(Mobius { m })
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let r = |x| Complex64::new(x, 0.0);
        Mobius::new(r(a), r(b), r(c), r(d))
    }

    pub fn identity() -> Self {
        Mobius::from_real(1.0, 0.0, 0.0, 1.0).unwrap()
    }

    /// The Cayley map `(z - i) / (z + i)` from the real line onto the circle.
    pub fn cayley() -> Self {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        Mobius::new(one, -i, one, i).unwrap()
    }

    /// Entries `(a, b, c, d)`.
    pub fn entries(&self) -> [Complex64; 4] {
        self.m
    }

    pub fn det(&self) -> Complex64 {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    pub fn apply_h(&self, p: HPoint) -> HPoint {
        let [a, b, c, d] = self.m;
        HPoint {
            z: a * p.z + b * p.w,
            w: c * p.z + d * p.w,
        }
    }

    /// Image of a finite point; `None` if it is sent to infinity.
    pub fn apply(&self, z: Complex64) -> Option<Complex64> {
        self.apply_h(HPoint::finite(z)).affine()
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let [_, _, c, d] = self.m;
        self.det() / ((c * z + d) * (c * z + d))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = other.m;
        Mobius::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
            .expect("composition of invertible maps is invertible")
    }

    pub fn inverse(&self) -> Mobius {
        let [a, b, c, d] = self.m;
        Mobius::new(d, -b, -c, a).expect("inverse of an invertible map is invertible")
    }

    /// Proportional to a real matrix.
    pub fn is_real(&self, tol: f64) -> bool {
        self.m.iter().all(|z| z.im.abs() <= tol)
    }

    /// Real with positive determinant: preserves the upper half plane and
    /// the cyclic order of the extended real line.
    pub fn preserves_real_orientation(&self, tol: f64) -> bool {
        self.is_real(tol) && self.det().re > 0.0
    }

    /// Sends `a -> 0`, `b -> 1`, `c -> infinity`.
    fn to_standard(p: [HPoint; 3]) -> Result<Mobius> {
        let [a, b, c] = p;
        for (x, y, name) in [(a, b, "a,b"), (b, c, "b,c"), (a, c, "a,c")] {
            if x.chordal(&y) <= DET_EPS {
                return Err(Error::CoincidentPoints(name.into()));
            }
        }
        let bc = b.cross(&c);
        let ba = b.cross(&a);
        Mobius::new(bc * a.w, -bc * a.z, ba * c.w, -ba * c.z)
    }

    /// The unique map with `from[k] -> to[k]`.
    pub fn from_three_points(from: [HPoint; 3], to: [HPoint; 3]) -> Result<Mobius> {
        let s = Mobius::to_standard(from)?;
        let t = Mobius::to_standard(to)?;
        Ok(t.inverse().compose(&s))
    }

    /// A random real map with positive determinant, `|entries| <= 1` before
    /// normalization.
    pub fn random_real_orientation_preserving(rng: &mut impl rand::Rng) -> Mobius {
        loop {
            let e: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let det = e[0] * e[3] - e[1] * e[2];
            if det > 0.1 {
                return Mobius::from_real(e[0], e[1], e[2], e[3]).unwrap();
            }
        }
    }
}

/// The anticonformal symmetry `z -> 1 / conj(z)` fixing the unit circle.
pub fn circle_reflect(p: HPoint) -> HPoint {
    HPoint {
        z: p.w.conj(),
        w: p.z.conj(),
    }
}

/// The three cube roots of unity `1, e^{2pi i/3}, e^{-2pi i/3}`.
pub fn cube_roots() -> [Complex64; 3] {
    [
        Complex64::new(1.0, 0.0),
        Complex64::from_polar(1.0, 2.0 * PI / 3.0),
        Complex64::from_polar(1.0, -2.0 * PI / 3.0),
    ]
}
