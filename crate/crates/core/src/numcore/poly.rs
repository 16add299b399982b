use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Relative tolerance below which trailing coefficients are dropped.
pub const COEFF_EPS: f64 = 1e-12;

/// A complex polynomial, coefficients ascending by degree.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    c: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: impl Into<Vec<Complex64>>) -> Self {
        let mut p = Poly { c: coeffs.into() };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>())
    }

    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn constant(a: Complex64) -> Self {
        Poly::new(vec![a])
    }

    /// `a z^k`.
    pub fn monomial(a: Complex64, k: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); k + 1];
        c[k] = a;
        Poly::new(c)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Poly::constant(Complex64::new(1.0, 0.0));
        for &r in roots {
            p = &p * &Poly::new(vec![-r, Complex64::new(1.0, 0.0)]);
        }
        p
    }

    fn trim(&mut self) {
        let scale = self.c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        while let Some(last) = self.c.last() {
            if last.norm() <= COEFF_EPS * scale || last.norm() == 0.0 {
                self.c.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    /// Coefficient of `z^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.c.get(k).copied().unwrap_or_default()
    }

    /// Coefficients padded with zeros to length `len`.
    pub fn padded(&self, len: usize) -> Vec<Complex64> {
        let mut v = self.c.clone();
        v.resize(len.max(v.len()), Complex64::default());
        v
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.c.iter().rev().fold(Complex64::default(), |acc, &a| acc * z + a)
    }

    /// `sum |c_k| |z|^k`, the natural scale for a residual at `z`.
    pub fn abs_eval(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| a * k as f64)
                .collect::<Vec<_>>(),
        )
    }

    pub fn scale(&self, a: Complex64) -> Poly {
        Poly::new(self.c.iter().map(|&x| x * a).collect::<Vec<_>>())
    }

    pub fn conj(&self) -> Poly {
        Poly::new(self.c.iter().map(|x| x.conj()).collect::<Vec<_>>())
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// All imaginary parts below `tol` times the largest coefficient.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.max_abs_coeff();
        self.c.iter().all(|z| z.im.abs() <= tol * scale)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polynomial serialization cannot fail")
    }
}

/// `r q' - r' q`.
pub fn wronskian(r: &Poly, q: &Poly) -> Poly {
    &(r * &q.derivative()) - &(&r.derivative() * q)
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect::<Vec<_>>())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect::<Vec<_>>())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::default(); self.c.len() + rhs.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in rhs.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, a) in self.c.iter().enumerate().rev() {
            if a.norm() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({a})")?;
            match k {
                0 => {}
                1 => write!(f, "z")?,
                _ => write!(f, "z^{k}")?,
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        coeffs_repr(&self.c).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Poly::new(repr_coeffs::<D>(PolyRepr::deserialize(d)?)?))
    }
}

fn coeffs_repr(c: &[Complex64]) -> PolyRepr {
    PolyRepr {
        re: c.iter().map(|z| z.re).collect(),
        im: c.iter().map(|z| z.im).collect(),
    }
}

fn repr_coeffs<'de, D: Deserializer<'de>>(
    r: PolyRepr,
) -> std::result::Result<Vec<Complex64>, D::Error> {
    if r.re.len() != r.im.len() {
        return Err(serde::de::Error::custom("re and im lengths differ"));
    }
    Ok(r.re.into_iter().zip(r.im).map(|(a, b)| Complex64::new(a, b)).collect())
}

/// Serde adapter writing a raw coefficient vector in the `{"re","im"}` form
/// without trimming.
pub(crate) mod coeff_vec {
    use super::*;

    pub fn serialize<S: Serializer>(c: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
        coeffs_repr(c).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Complex64>, D::Error> {
        repr_coeffs::<D>(PolyRepr::deserialize(d)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wronskian_of_the_counterexample_pair() {
        let f0 = Poly::new(vec![c(0.0, -1.0), c(1.0, 0.0)]);
        let f1 = Poly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 3.0), c(1.0, 0.0)]);
        let w = wronskian(&f0, &f1);
        assert_eq!(w, Poly::from_real(&[0.0, 6.0, 0.0, 2.0]));
    }

    #[test]
    fn wronskian_small_cases() {
        let one = Poly::from_real(&[1.0]);
        let z = Poly::from_real(&[0.0, 1.0]);
        assert_eq!(wronskian(&one, &z), one);
        let r = Poly::from_real(&[1.0, -2.0, 5.0]);
        assert!(wronskian(&r, &r).is_zero());
    }

    #[test]
    fn trimming_and_degree() {
        let p = Poly::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(1e-14, 0.0)]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(Poly::zero().degree(), None);
        assert!(Poly::from_real(&[0.0, 0.0]).is_zero());
    }

    #[test]
    fn from_roots_expands() {
        let p = Poly::from_roots(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(p, Poly::from_real(&[-1.0, 0.0, 1.0]));
        assert_eq!(p.eval(c(3.0, 0.0)), c(8.0, 0.0));
    }

    #[test]
    fn json_shape() {
        let p = Poly::new(vec![c(1.0, 2.0), c(0.0, -1.0)]);
        let s = p.to_json();
        assert_eq!(s, r#"{"re":[1.0,0.0],"im":[2.0,-1.0]}"#);
        assert_eq!(serde_json::from_str::<Poly>(&s).unwrap(), p);
        assert!(serde_json::from_str::<Poly>(r#"{"re":[1.0],"im":[]}"#).is_err());
    }
}
