use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mobius::{cube_roots, HPoint, Mobius};
use super::poly::{coeff_vec, wronskian, Poly};
use super::roots::poly_roots;
use crate::error::{Error, Result};

/// Relative threshold for a common root of numerator and denominator.
pub const COMMON_ROOT_TOL: f64 = 1e-8;

/// A rational function `P/Q` of formal degree `d`, stored as two binary
/// forms so that the point at infinity is handled projectively.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rational {
    #[serde(with = "coeff_vec")]
    p: Vec<Complex64>,
    #[serde(with = "coeff_vec")]
    q: Vec<Complex64>,
}

fn pad(p: &Poly, d: usize) -> Result<Vec<Complex64>> {
    match p.degree() {
        Some(k) if k > d => Err(Error::DegreeChange {
            expected: d,
            found: k,
        }),
        _ => Ok(p.padded(d + 1)[..d + 1].to_vec()),
    }
}

impl Rational {
    pub fn new(p: &Poly, q: &Poly, d: usize) -> Result<Self> {
        if p.is_zero() && q.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(Rational {
            p: pad(p, d)?,
            q: pad(q, d)?,
        })
    }

    pub fn degree(&self) -> usize {
        self.p.len() - 1
    }

    pub fn numerator(&self) -> Poly {
        Poly::new(self.p.clone())
    }

    pub fn denominator(&self) -> Poly {
        Poly::new(self.q.clone())
    }

    pub fn eval_h(&self, x: HPoint) -> HPoint {
        let form = |c: &[Complex64]| {
            let mut acc = Complex64::default();
            let mut zp = Complex64::new(1.0, 0.0);
            let d = c.len() - 1;
            for (k, &a) in c.iter().enumerate() {
                acc += a * zp * x.w.powu((d - k) as u32);
                zp *= x.z;
            }
            acc
        };
        HPoint {
            z: form(&self.p),
            w: form(&self.q),
        }
    }

    /// Value at a finite point; `None` at a pole.
    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        self.eval_h(HPoint::finite(z)).affine()
    }

    /// `Q P' - Q' P`, so that `F' = W / Q^2`.
    pub fn wronskian(&self) -> Poly {
        wronskian(&self.denominator(), &self.numerator())
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let q = self.denominator().eval(z);
        self.wronskian().eval(z) / (q * q)
    }

    /// `F'/F = P'/P - Q'/Q`.
    pub fn log_derivative(&self, z: Complex64) -> Complex64 {
        let (p, q) = (self.numerator(), self.denominator());
        p.derivative().eval(z) / p.eval(z) - q.derivative().eval(z) / q.eval(z)
    }

    /// Finite critical points with multiplicity.
    pub fn critical_points(&self) -> Result<Vec<Complex64>> {
        poly_roots(&self.wronskian())
    }

    /// `l ∘ F`.
    pub fn post(&self, l: &Mobius) -> Rational {
        let [a, b, c, d] = l.entries();
        Rational {
            p: self.p.iter().zip(&self.q).map(|(&x, &y)| a * x + b * y).collect(),
            q: self.p.iter().zip(&self.q).map(|(&x, &y)| c * x + d * y).collect(),
        }
    }

    /// `F ∘ M`.
    pub fn pre(&self, m: &Mobius) -> Rational {
        let d = self.degree();
        let basis = substitution_basis(m, d);
        let apply = |c: &[Complex64]| {
            let mut out = vec![Complex64::default(); d + 1];
            for (k, &a) in c.iter().enumerate() {
                for (j, &b) in basis[k].iter().enumerate() {
                    out[j] += a * b;
                }
            }
            out
        };
        Rational {
            p: apply(&self.p),
            q: apply(&self.q),
        }
    }

    /// True if `P` and `Q` share a root on the sphere, so the actual degree
    /// is below the formal one.
    pub fn has_common_root(&self) -> bool {
        let (p, q) = (self.numerator(), self.denominator());
        let (a, b) = if p.degree() >= q.degree() { (&p, &q) } else { (&q, &p) };
        if b.is_zero() {
            return a.degree().unwrap_or(0) > 0;
        }
        let d = self.degree();
        if a.degree().unwrap_or(0) < d && b.degree().unwrap_or(0) < d {
            return true;
        }
        match poly_roots(a) {
            Ok(roots) => roots
                .iter()
                .any(|&z| b.eval(z).norm() <= COMMON_ROOT_TOL * b.abs_eval(z)),
            Err(_) => true,
        }
    }

    /// Samples `F(1/conj z) = 1/conj F(z)` at the given points.
    pub fn circle_symmetry_defect(&self, samples: &[Complex64]) -> f64 {
        samples
            .iter()
            .filter_map(|&z| {
                let lhs = self.eval(Complex64::new(1.0, 0.0) / z.conj())?;
                let rhs = Complex64::new(1.0, 0.0) / self.eval(z)?.conj();
                Some((lhs - rhs).norm() / (1.0 + rhs.norm()))
            })
            .fold(0.0, f64::max)
    }
}

/// `basis[k]` holds the coefficients of `(a z + b)^k (c z + d)^{n-k}`.
pub(crate) fn substitution_basis(m: &Mobius, n: usize) -> Vec<Vec<Complex64>> {
    let [a, b, c, d] = m.entries();
    let num = Poly::new(vec![b, a]);
    let den = Poly::new(vec![d, c]);
    let one = Poly::constant(Complex64::new(1.0, 0.0));
    let mut num_pows = vec![one.clone()];
    let mut den_pows = vec![one];
    for k in 1..=n {
        num_pows.push(&num_pows[k - 1] * &num);
        den_pows.push(&den_pows[k - 1] * &den);
    }
    (0..=n)
        .map(|k| (&num_pows[k] * &den_pows[n - k]).padded(n + 1)[..n + 1].to_vec())
        .collect()
}

/// `C ∘ f ∘ C^{-1}` with `C(z) = (z - i)/(z + i)`.
pub fn cayley_transport(f: &Rational) -> Result<Rational> {
    let c = Mobius::cayley();
    let out = f.pre(&c.inverse()).post(&c);
    if out.has_common_root() {
        return Err(Error::DegreeChange {
            expected: f.degree(),
            found: f.degree() - 1,
        });
    }
    Ok(out)
}

/// Result of normalizing a circle-model function to the class `R*`.
#[derive(Clone, Debug)]
pub struct Normalized {
    /// `G = l ∘ F ∘ M^{-1}`.
    pub g: Rational,
    /// Source change of variables sending the anchors to the cube roots.
    pub m: Mobius,
    /// Target change of variables.
    pub l: Mobius,
    /// The circle-model function `F` that was normalized.
    pub source: Rational,
}

impl Normalized {
    /// `G(z)` through the composition. Stays accurate when `M` is strongly
    /// contracting, where the expanded coefficients of `G` lose precision.
    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        let w = self.m.inverse().apply_h(HPoint::finite(z));
        self.l.apply_h(self.source.eval_h(w)).affine()
    }

    /// `G'(z)` by the chain rule.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let inv = self.m.inverse();
        let Some(w) = inv.apply(z) else {
            return Complex64::new(f64::NAN, f64::NAN);
        };
        let Some(u) = self.source.eval(w) else {
            return Complex64::new(f64::NAN, f64::NAN);
        };
        self.l.derivative(u) * self.source.derivative(w) * inv.derivative(z)
    }

    /// As [`rstar_defects`], evaluated through the composition.
    pub fn defects(&self) -> (f64, f64) {
        cube_roots().iter().fold((0.0, 0.0), |(fix, der), &v| {
            let gv = self.eval(v).map_or(f64::INFINITY, |w| (w - v).norm());
            (fix.max(gv), der.max(self.derivative(v).norm()))
        })
    }
}

/// Maximum of `|G(v) - v|` and of `|G'(v)|` over the cube roots.
pub fn rstar_defects(g: &Rational) -> (f64, f64) {
    cube_roots().iter().fold((0.0, 0.0), |(fix, der), &v| {
        let gv = g.eval(v).map_or(f64::INFINITY, |w| (w - v).norm());
        (fix.max(gv), der.max(g.derivative(v).norm()))
    })
}

/// Checks the normalization: fixed cube roots that are critical points.
pub fn is_rstar(g: &Rational, fix_tol: f64, deriv_tol: f64) -> bool {
    let (fix, der) = rstar_defects(g);
    fix < fix_tol && der < deriv_tol
}

fn anticlockwise(a: Complex64, b: Complex64, c: Complex64) -> bool {
    let tau = 2.0 * std::f64::consts::PI;
    let ab = (b / a).arg().rem_euclid(tau);
    let ac = (c / a).arg().rem_euclid(tau);
    ab > 0.0 && ab < ac
}

/// Moves anchors `(v_0, v_1, v_N)` to the cube roots `(1, w, w^2)` in the
/// source and their images back to the cube roots in the target.
pub fn normalize_to_rstar(f: &Rational, anchors: [Complex64; 3]) -> Result<Normalized> {
    let w = f.wronskian();
    for (k, &a) in anchors.iter().enumerate() {
        if (a.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::Normalization(format!("anchor {k} is off the circle")));
        }
        if w.eval(a).norm() > 1e-6 * w.abs_eval(a).max(f64::MIN_POSITIVE) {
            return Err(Error::Normalization(format!("anchor {k} is not critical")));
        }
    }
    if !anticlockwise(anchors[0], anchors[1], anchors[2]) {
        return Err(Error::Normalization(
            "anchors are not in anticlockwise order".into(),
        ));
    }
    let roots = cube_roots().map(HPoint::finite);
    let m = Mobius::from_three_points(anchors.map(HPoint::finite), roots)?;
    let g0 = f.pre(&m.inverse());
    let values = anchors.map(|a| f.eval_h(HPoint::finite(a)));
    let l = Mobius::from_three_points(values, roots)
        .map_err(|e| Error::Normalization(format!("anchor values: {e}")))?;
    Ok(Normalized {
        g: g0.post(&l),
        m,
        l,
        source: f.clone(),
    })
}
