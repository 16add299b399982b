//! Total-degree homotopy on the chart equations, tracked in projective
//! coordinates with a random affine patch.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

type C = Complex64;

/// The chart system `W(p, q)(x_i) = 0` with
/// `p = z^d + sum_{k <= d-2} a_k z^k` and `q = z^{d-1} + sum_{k <= d-2} b_k z^k`.
/// Unknowns are ordered `a_0 .. a_{d-2}, b_0 .. b_{d-2}`.
#[derive(Clone, Debug)]
pub struct ChartSystem {
    d: usize,
    points: Vec<C>,
}

/// Per-point powers used in both the affine and the homogenized equations.
struct PointData {
    alpha: Vec<C>,
    dalpha: Vec<C>,
    p0: C,
    p1: C,
    q0: C,
    q1: C,
}

impl ChartSystem {
    pub fn new(d: usize, points: &[C]) -> Self {
        ChartSystem {
            d,
            points: points.to_vec(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[C] {
        &self.points
    }

    /// Number of unknowns, equal to the number of equations.
    pub fn size(&self) -> usize {
        2 * (self.d - 1)
    }

    fn point_data(&self, x: C) -> PointData {
        let d = self.d;
        let m = d - 1;
        let mut alpha = Vec::with_capacity(m);
        let mut dalpha = Vec::with_capacity(m);
        let mut pow = C::new(1.0, 0.0);
        let mut prev = C::new(0.0, 0.0);
        for k in 0..m {
            alpha.push(pow);
            dalpha.push(prev * k as f64);
            prev = pow;
            pow *= x;
        }
        // pow = x^{d-1}, prev = x^{d-2}
        PointData {
            alpha,
            dalpha,
            p0: pow * x,
            p1: pow * d as f64,
            q0: pow,
            q1: prev * (d - 1) as f64,
        }
    }

    /// Homogenized equations in `U = (a, b, h)` and their Jacobian.
    pub fn eval_homogeneous(&self, u: &[C], jac: Option<&mut DMatrix<C>>) -> Vec<C> {
        let m = self.d - 1;
        let n = self.size();
        let h = u[n];
        let mut out = Vec::with_capacity(n);
        let mut jac = jac;
        for (i, &x) in self.points.iter().enumerate() {
            let pd = self.point_data(x);
            let mut p = pd.p0 * h;
            let mut dp = pd.p1 * h;
            let mut q = pd.q0 * h;
            let mut dq = pd.q1 * h;
            for k in 0..m {
                p += u[k] * pd.alpha[k];
                dp += u[k] * pd.dalpha[k];
                q += u[m + k] * pd.alpha[k];
                dq += u[m + k] * pd.dalpha[k];
            }
            out.push(p * dq - dp * q);
            if let Some(j) = jac.as_deref_mut() {
                for k in 0..m {
                    j[(i, k)] = pd.alpha[k] * dq - pd.dalpha[k] * q;
                    j[(i, m + k)] = p * pd.dalpha[k] - dp * pd.alpha[k];
                }
                j[(i, n)] = pd.p0 * dq + p * pd.q1 - pd.p1 * q - dp * pd.q0;
            }
        }
        out
    }

    /// Affine equations and Jacobian at `h = 1`.
    pub fn eval_affine(&self, u: &[C]) -> (DVector<C>, DMatrix<C>) {
        let n = self.size();
        let mut full = u.to_vec();
        full.push(C::new(1.0, 0.0));
        let mut jac = DMatrix::zeros(n, n + 1);
        let f = self.eval_homogeneous(&full, Some(&mut jac));
        (DVector::from_vec(f), jac.columns(0, n).into_owned())
    }

    /// Coefficients (ascending) of `p` and `q` for an affine point.
    pub fn polys(&self, u: &[C]) -> (Vec<C>, Vec<C>) {
        let d = self.d;
        let m = d - 1;
        let mut p = vec![C::default(); d + 1];
        let mut q = vec![C::default(); d + 1];
        p[..m].copy_from_slice(&u[..m]);
        q[..m].copy_from_slice(&u[m..2 * m]);
        p[d] = C::new(1.0, 0.0);
        q[d - 1] = C::new(1.0, 0.0);
        (p, q)
    }

    /// Newton iteration on the affine system; returns the improved point and
    /// the final update norm relative to the point.
    pub fn newton_polish(&self, u0: &[C], max_iter: usize) -> Option<(Vec<C>, f64)> {
        let mut u = DVector::from_column_slice(u0);
        let mut last = f64::INFINITY;
        for _ in 0..max_iter {
            let (f, j) = self.eval_affine(u.as_slice());
            let du = j.lu().solve(&f)?;
            let step = du.norm() / (1.0 + u.norm());
            u -= du;
            if !u.iter().all(|z| z.is_finite()) {
                return None;
            }
            if step < 1e-15 || (step > 0.5 * last && last < 1e-12) {
                last = step;
                break;
            }
            last = step;
        }
        Some((u.as_slice().to_vec(), last))
    }
}

/// Random data defining one homotopy run.
#[derive(Clone, Debug)]
pub struct StartData {
    pub gamma: C,
    pub c: Vec<C>,
    pub patch: Vec<C>,
}

#[derive(Clone, Copy, Debug)]
pub struct TrackerSettings {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
    pub corrector_tol: f64,
}

impl Default for TrackerSettings {
    fn default() -> Self {
        TrackerSettings {
            initial_step: 0.02,
            max_step: 0.1,
            min_step: 1e-14,
            max_steps: 50_000,
            corrector_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathEnd {
    /// Finite endpoint in affine chart coordinates.
    Finite(Vec<C>),
    /// Endpoint at (or numerically near) infinity.
    Diverged,
    /// Step size collapsed or the step budget ran out.
    Failed,
}

struct Homotopy<'a> {
    sys: &'a ChartSystem,
    start: &'a StartData,
}

impl Homotopy<'_> {
    /// `H(U, t)` with the patch row appended, plus `H_U` and `H_t`.
    fn eval(&self, u: &[C], t: f64, want_jac: bool) -> (DVector<C>, Option<DMatrix<C>>, DVector<C>) {
        let n = self.sys.size();
        let h = u[n];
        let s = 1.0 - t;
        let g = self.start.gamma;
        let mut jf = DMatrix::zeros(n + 1, n + 1);
        let f = self.sys.eval_homogeneous(u, want_jac.then_some(&mut jf));
        let mut val = DVector::zeros(n + 1);
        let mut ht = DVector::zeros(n + 1);
        for i in 0..n {
            let gi = u[i] * u[i] - self.start.c[i] * h * h;
            val[i] = g * s * gi + f[i] * t;
            ht[i] = f[i] - g * gi;
        }
        val[n] = self.start.patch.iter().zip(u).map(|(a, b)| a * b).sum::<C>() - C::new(1.0, 0.0);
        let jac = want_jac.then(|| {
            let mut j = jf * C::new(t, 0.0);
            for i in 0..n {
                j[(i, i)] += g * s * 2.0 * u[i];
                j[(i, n)] -= g * s * 2.0 * self.start.c[i] * h;
            }
            for k in 0..=n {
                j[(n, k)] = self.start.patch[k];
            }
            j
        });
        (val, jac, ht)
    }

    fn velocity(&self, u: &DVector<C>, t: f64) -> Option<DVector<C>> {
        let (_, j, ht) = self.eval(u.as_slice(), t, true);
        j.unwrap().lu().solve(&(-ht))
    }

    fn correct(&self, u: DVector<C>, t: f64, tol: f64) -> Option<DVector<C>> {
        let mut u = u;
        let mut last = f64::INFINITY;
        for _ in 0..4 {
            let (val, j, _) = self.eval(u.as_slice(), t, true);
            let du = j.unwrap().lu().solve(&val)?;
            let step = du.norm() / u.norm().max(1e-300);
            u -= du;
            if step > 0.5 * last && step > tol {
                return None;
            }
            if step <= tol {
                return Some(u);
            }
            last = step;
        }
        None
    }
}

/// Start points: all sign choices of `U_i = ±sqrt(c_i)`, indexed by the bits
/// of `index`, scaled onto the patch.
pub fn start_point(start: &StartData, index: usize) -> Option<Vec<C>> {
    let n = start.c.len();
    let mut u: Vec<C> = (0..n)
        .map(|i| {
            let r = start.c[i].sqrt();
            if index >> i & 1 == 1 {
                -r
            } else {
                r
            }
        })
        .collect();
    u.push(C::new(1.0, 0.0));
    let lam: C = start.patch.iter().zip(&u).map(|(a, b)| a * b).sum();
    if lam.norm() < 1e-12 {
        return None;
    }
    Some(u.into_iter().map(|z| z / lam).collect())
}

/// Tracks one path from `t = 0` to `t = 1`.
pub fn track_path(
    sys: &ChartSystem,
    start: &StartData,
    index: usize,
    settings: &TrackerSettings,
    divergence: f64,
) -> PathEnd {
    let hom = Homotopy { sys, start };
    let Some(u0) = start_point(start, index) else {
        return PathEnd::Failed;
    };
    let n = sys.size();
    let mut u = DVector::from_vec(u0);
    let mut t = 0.0;
    let mut h = settings.initial_step;
    let mut streak = 0;
    let mut steps = 0;
    while t < 1.0 {
        steps += 1;
        if steps > settings.max_steps || h < settings.min_step {
            // Stalling with a vanishing homogenizing coordinate means the
            // path is heading to infinity.
            return if u[n].norm() <= 1e-4 * u.norm() {
                PathEnd::Diverged
            } else {
                PathEnd::Failed
            };
        }
        let hh = h.min(1.0 - t);
        let predicted = (|| {
            let k1 = hom.velocity(&u, t)?;
            let k2 = hom.velocity(&(&u + &k1 * C::new(hh / 2.0, 0.0)), t + hh / 2.0)?;
            let k3 = hom.velocity(&(&u + &k2 * C::new(hh / 2.0, 0.0)), t + hh / 2.0)?;
            let k4 = hom.velocity(&(&u + &k3 * C::new(hh, 0.0)), t + hh)?;
            Some(&u + (k1 + k2 * C::new(2.0, 0.0) + k3 * C::new(2.0, 0.0) + k4) * C::new(hh / 6.0, 0.0))
        })();
        let t_next = if hh >= 1.0 - t { 1.0 } else { t + hh };
        match predicted.and_then(|p| hom.correct(p, t_next, settings.corrector_tol)) {
            Some(c) => {
                u = c;
                t = t_next;
                streak += 1;
                if streak >= 3 {
                    h = (2.0 * h).min(settings.max_step);
                    streak = 0;
                }
            }
            None => {
                h /= 2.0;
                streak = 0;
            }
        }
    }
    let scale = u.norm();
    let hcoord = u[n];
    if hcoord.norm() <= scale / divergence {
        return PathEnd::Diverged;
    }
    PathEnd::Finite(u.iter().take(n).map(|z| z / hcoord).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_point_gives_minus_power() {
        let xs: Vec<C> = [-1.5, 0.5, 2.0, 3.0].iter().map(|&x| C::new(x, 0.0)).collect();
        let sys = ChartSystem::new(3, &xs);
        assert_eq!(sys.size(), 4);
        let (f, _) = sys.eval_affine(&[C::default(); 4]);
        for (v, x) in f.iter().zip(&xs) {
            assert!((v + x.powu(4)).norm() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let xs: Vec<C> = [-1.0, -0.2, 0.4, 0.9, 1.3, 2.0].iter().map(|&x| C::new(x, 0.0)).collect();
        let sys = ChartSystem::new(4, &xs);
        let n = sys.size();
        let u: Vec<C> = (0..=n).map(|k| C::new(0.3 * k as f64 - 0.5, 0.1 * k as f64)).collect();
        let mut j = DMatrix::zeros(n, n + 1);
        let f0 = sys.eval_homogeneous(&u, Some(&mut j));
        let eps = 1e-7;
        for k in 0..=n {
            let mut v = u.clone();
            v[k] += C::new(eps, 0.0);
            let f1 = sys.eval_homogeneous(&v, None);
            for i in 0..n {
                let fd = (f1[i] - f0[i]) / eps;
                assert!((fd - j[(i, k)]).norm() < 1e-5, "entry ({i},{k})");
            }
        }
    }
}
