use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::mobius::Mobius;
use super::poly::{coeff_vec, wronskian, Poly};
use super::rational::{substitution_basis, Rational};
use super::roots::{poly_roots, root_multiplicities};
use crate::error::{Error, Result};

/// Rank threshold: smaller normalized Plucker vectors mean dependent rows.
const RANK_EPS: f64 = 1e-12;

/// Relative residual below which both basis elements vanish at a point.
pub const D1_TOL: f64 = 1e-6;

/// A 2-dimensional subspace of polynomials of degree at most `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane2 {
    rows: [Vec<Complex64>; 2],
    plucker: Vec<Complex64>,
}

fn minors(r0: &[Complex64], r1: &[Complex64]) -> Vec<Complex64> {
    let n = r0.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(r0[i] * r1[j] - r0[j] * r1[i]);
        }
    }
    out
}

fn pair_index(n: usize, k: usize) -> (usize, usize) {
    let mut k = k;
    for i in 0..n {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
    }
    unreachable!("index past the last pair")
}

fn argmax_first(v: &[Complex64]) -> usize {
    let mut best = 0;
    for (k, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() * (1.0 + 1e-9) {
            best = k;
        }
    }
    best
}

impl Plane2 {
    /// Row space of two coefficient vectors, padded to a common length
    /// `d + 1`.
    pub fn new(r0: &[Complex64], r1: &[Complex64], d: usize) -> Result<Self> {
        let n = d + 1;
        if d == 0 || r0.len() > n || r1.len() > n {
            return Err(Error::DegeneratePlane(format!(
                "rows must have at most {n} coefficients and d >= 1"
            )));
        }
        let mut a = r0.to_vec();
        let mut b = r1.to_vec();
        a.resize(n, Complex64::default());
        b.resize(n, Complex64::default());
        let na = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nb = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let p = minors(&a, &b);
        let pn = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(pn > RANK_EPS * na * nb) {
            return Err(Error::DegeneratePlane("rows are dependent".into()));
        }
        // Column-pivoted reduction on the largest minor.
        let (i, j) = pair_index(n, argmax_first(&p));
        let det = a[i] * b[j] - a[j] * b[i];
        let row0: Vec<Complex64> = (0..n).map(|k| (b[j] * a[k] - a[j] * b[k]) / det).collect();
        let row1: Vec<Complex64> = (0..n).map(|k| (a[i] * b[k] - b[i] * a[k]) / det).collect();
        let mut plucker = minors(&row0, &row1);
        let norm = plucker.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let lead = plucker[argmax_first(&plucker)];
        let phase = lead.conj() / lead.norm();
        for z in &mut plucker {
            *z *= phase / norm;
        }
        Ok(Plane2 {
            rows: [row0, row1],
            plucker,
        })
    }

    pub fn from_polys(r: &Poly, q: &Poly, d: usize) -> Result<Self> {
        Plane2::new(r.coeffs(), q.coeffs(), d)
    }

    pub fn from_real(r: &[f64], q: &[f64], d: usize) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        Plane2::new(&c(r), &c(q), d)
    }

    pub fn d(&self) -> usize {
        self.rows[0].len() - 1
    }

    /// Canonical basis rows, reduced on the pivot columns.
    pub fn rows(&self) -> &[Vec<Complex64>; 2] {
        &self.rows
    }

    pub fn basis(&self) -> (Poly, Poly) {
        (Poly::new(self.rows[0].clone()), Poly::new(self.rows[1].clone()))
    }

    /// Unit Plucker vector, first entry of largest modulus positive real.
    pub fn plucker(&self) -> &[Complex64] {
        &self.plucker
    }

    /// Lexicographic order on Plucker coordinates (real, then imaginary).
    pub fn key_cmp(&self, other: &Plane2) -> Ordering {
        for (a, b) in self.plucker.iter().zip(&other.plucker) {
            let o = a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
            if o != Ordering::Equal {
                return o;
            }
        }
        self.plucker.len().cmp(&other.plucker.len())
    }

    /// Sine of the angle between the Plucker lines, `sqrt(1 - |<P1, P2>|^2)`,
    /// computed as the norm of the orthogonal residual.
    pub fn distance(&self, other: &Plane2) -> f64 {
        if self.plucker.len() != other.plucker.len() {
            return 1.0;
        }
        let ip: Complex64 = self
            .plucker
            .iter()
            .zip(&other.plucker)
            .map(|(a, b)| a.conj() * b)
            .sum();
        other
            .plucker
            .iter()
            .zip(&self.plucker)
            .map(|(b, a)| (b - ip * a).norm_sqr())
            .sum::<f64>()
            .sqrt()
            .min(1.0)
    }

    pub fn wronskian(&self) -> Poly {
        let (r, q) = self.basis();
        wronskian(&r, &q)
    }

    /// `sigma_3 / sigma_1` of the stack of the basis and its conjugate.
    pub fn realness_ratio(&self) -> f64 {
        let n = self.d() + 1;
        let mut m = DMatrix::<Complex64>::zeros(4, n);
        for k in 0..n {
            m[(0, k)] = self.rows[0][k];
            m[(1, k)] = self.rows[1][k];
            m[(2, k)] = self.rows[0][k].conj();
            m[(3, k)] = self.rows[1][k].conj();
        }
        let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s.get(2).copied().unwrap_or(0.0) / s[0]
    }

    pub fn is_real_plane(&self, tol: f64) -> bool {
        self.realness_ratio() < tol
    }

    /// Two real polynomials spanning the plane.
    pub fn real_basis(&self, tol: f64) -> Result<[Vec<f64>; 2]> {
        if !self.is_real_plane(tol) {
            return Err(Error::NotReal);
        }
        let n = self.d() + 1;
        let mut m = DMatrix::<f64>::zeros(4, n);
        for k in 0..n {
            m[(0, k)] = self.rows[0][k].re;
            m[(1, k)] = self.rows[0][k].im;
            m[(2, k)] = self.rows[1][k].re;
            m[(3, k)] = self.rows[1][k].im;
        }
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let row = |i: usize| (0..n).map(|k| v_t[(i, k)]).collect::<Vec<f64>>();
        Ok([row(order[0]), row(order[1])])
    }

    /// The rational function `row0 / row1`, of formal degree `d`.
    pub fn to_rational(&self) -> Rational {
        let (r, q) = self.basis();
        Rational::new(&r, &q, self.d()).expect("plane rows are nonzero")
    }

    /// Smallest relative value of `max(|r0(z)|, |r1(z)|)` over the Wronskian
    /// roots, with the point at infinity included when the degree drops.
    pub fn d1_score(&self) -> f64 {
        let d = self.d();
        let lead = self.rows[0][d].norm().max(self.rows[1][d].norm());
        let (r, q) = self.basis();
        let w = wronskian(&r, &q);
        let Ok(roots) = poly_roots(&w) else {
            return 0.0;
        };
        roots
            .iter()
            .map(|&z| {
                let a = r.eval(z).norm() / r.abs_eval(z).max(f64::MIN_POSITIVE);
                let b = q.eval(z).norm() / q.abs_eval(z).max(f64::MIN_POSITIVE);
                a.max(b)
            })
            .fold(lead, f64::min)
    }

    /// Finite zeros of the Wronskian with multiplicity.
    pub fn critical_points(&self) -> Result<Vec<Complex64>> {
        let d = self.d();
        if self.rows[0][d].norm() <= D1_TOL && self.rows[1][d].norm() <= D1_TOL {
            return Err(Error::DegeneratePlane("degree d is not attained".into()));
        }
        let (r, q) = self.basis();
        let roots = poly_roots(&wronskian(&r, &q))?;
        for (z, m) in root_multiplicities(&roots) {
            if m < 2 {
                continue;
            }
            let vanish = |p: &Poly| p.eval(z).norm() <= D1_TOL * p.abs_eval(z);
            if vanish(&r) && vanish(&q) {
                return Err(Error::DegeneratePlane(format!("common root at {z}")));
            }
        }
        Ok(roots)
    }

    /// The plane `{ p(M z) (c z + d)^d }`, whose critical points are the
    /// preimages under `M` of the original ones.
    pub fn pullback(&self, m: &Mobius) -> Plane2 {
        let d = self.d();
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
        Plane2::new(&apply(&self.rows[0]), &apply(&self.rows[1]), d)
            .expect("an invertible substitution preserves rank")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plane serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct PlaneRepr {
    rows: [Poly; 2],
    #[serde(with = "coeff_vec")]
    plucker: Vec<Complex64>,
}

#[derive(Serialize)]
struct PlaneReprRef<'a> {
    rows: [RowRef<'a>; 2],
    #[serde(serialize_with = "coeff_vec::serialize")]
    plucker: &'a [Complex64],
}

#[derive(Serialize)]
struct RowRef<'a>(#[serde(serialize_with = "coeff_vec::serialize")] &'a [Complex64]);

impl Serialize for Plane2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PlaneReprRef {
            rows: [RowRef(&self.rows[0]), RowRef(&self.rows[1])],
            plucker: &self.plucker,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Plane2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PlaneRepr::deserialize(d)?;
        let n = r.plucker.len();
        let deg = (1..=64).find(|k| k * (k + 1) / 2 == n).unwrap_or(0);
        let [a, b] = r.rows;
        Plane2::from_polys(&a, &b, deg).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn counterexample() -> Plane2 {
        let f0 = [c(0.0, -1.0), c(1.0, 0.0)];
        let f1 = [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 3.0), c(1.0, 0.0)];
        Plane2::new(&f0, &f1, 3).unwrap()
    }

    #[test]
    fn realness_examples() {
        assert!(!counterexample().is_real_plane(1e-8));
        assert!(counterexample().real_basis(1e-8).is_err());
        let p = Plane2::from_real(&[1.0], &[0.0, 1.0], 1).unwrap();
        assert!(p.is_real_plane(1e-8));
        let p = Plane2::new(&[c(0.0, 1.0), c(0.0, 1.0)], &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 2)
            .unwrap();
        assert!(p.is_real_plane(1e-8));
        let [a, b] = p.real_basis(1e-8).unwrap();
        let q = Plane2::from_real(&a, &b, 2).unwrap();
        assert!(q.distance(&Plane2::from_real(&[1.0, 1.0], &[0.0, 0.0, 1.0], 2).unwrap()) < 1e-8);
    }

    #[test]
    fn canonical_form_is_basis_independent() {
        let a = [c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 1.0)];
        let b = [c(0.0, 0.0), c(1.0, 1.0), c(3.0, 0.0)];
        let p = Plane2::new(&a, &b, 2).unwrap();
        let mix = |x: Complex64, y: Complex64| -> Vec<Complex64> {
            a.iter().zip(&b).map(|(&u, &v)| x * u + y * v).collect()
        };
        let q = Plane2::new(&mix(c(2.0, 1.0), c(0.3, 0.0)), &mix(c(-1.0, 0.0), c(0.0, 4.0)), 2)
            .unwrap();
        assert!(p.distance(&q) < 1e-12);
        for (x, y) in p.plucker().iter().zip(q.plucker()) {
            assert!((x - y).norm() < 1e-12);
        }
        let again = Plane2::new(&p.rows()[0], &p.rows()[1], 2).unwrap();
        assert_eq!(again.key_cmp(&p), Ordering::Equal);
    }

    #[test]
    fn dependent_rows_rejected() {
        let a = [c(1.0, 0.0), c(2.0, 0.0)];
        let b = [c(2.0, 0.0), c(4.0, 0.0)];
        assert!(Plane2::new(&a, &b, 1).is_err());
    }

    #[test]
    fn critical_points_of_known_planes() {
        let p = Plane2::from_real(&[1.0, -2.0, 1.0], &[1.0, 2.0, 1.0], 2).unwrap();
        let crit = p.critical_points().unwrap();
        assert_eq!(crit.len(), 2);
        assert!((crit[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((crit[1] - c(1.0, 0.0)).norm() < 1e-12);
        let p = Plane2::from_real(&[1.0], &[0.0, 0.0, 0.0, 1.0], 3).unwrap();
        let crit = p.critical_points().unwrap();
        assert_eq!(crit, vec![c(0.0, 0.0); 2]);
        let common = Plane2::from_real(&[-1.0, 1.0], &[0.0, -1.0, 1.0], 2).unwrap();
        assert!(matches!(common.critical_points(), Err(Error::DegeneratePlane(_))));
        let low = Plane2::from_real(&[1.0], &[0.0, 1.0], 2).unwrap();
        assert!(low.critical_points().is_err());
    }

    #[test]
    fn pullback_moves_critical_points() {
        let p = Plane2::from_real(&[1.0, -2.0, 1.0], &[1.0, 2.0, 1.0], 2).unwrap();
        let m = Mobius::from_real(2.0, 1.0, 0.5, 3.0).unwrap();
        let crit = p.pullback(&m).critical_points().unwrap();
        let inv = m.inverse();
        let mut want = [inv.apply(c(-1.0, 0.0)).unwrap(), inv.apply(c(1.0, 0.0)).unwrap()];
        want.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (x, y) in crit.iter().zip(&want) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = counterexample();
        let s = p.to_json();
        assert!(s.starts_with(r#"{"rows":[{"re":"#));
        assert!(s.contains(r#""plucker":{"re":"#));
        let q: Plane2 = serde_json::from_str(&s).unwrap();
        assert!(p.distance(&q) < 1e-14);
    }
}
