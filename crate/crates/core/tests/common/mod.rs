#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::Rng;
use wronski_core::netcomb::NetClass;
use wronski_core::numcore::{Mobius, Plane2};

/// Residuals and Jacobian of `W(p, q)(x_i) = 0` for
/// `p = z^d + sum_{k<=d-2} a_k z^k`, `q = z^{d-1} + sum_{k<=d-2} b_k z^k`,
/// written out directly from `W = p q' - p' q`.
fn system(d: usize, points: &[f64], u: &[C]) -> (DVector<C>, DMatrix<C>) {
    let m = d - 1;
    let n = 2 * m;
    let mut f = DVector::zeros(n);
    let mut j = DMatrix::zeros(n, n);
    for (i, &x) in points.iter().enumerate() {
        let x = C::new(x, 0.0);
        let pw = |k: usize| x.powu(k as u32);
        let dpw = |k: usize| if k == 0 { C::default() } else { pw(k - 1) * k as f64 };
        let (mut p, mut dp) = (pw(d), dpw(d));
        let (mut q, mut dq) = (pw(d - 1), dpw(d - 1));
        for k in 0..m {
            p += u[k] * pw(k);
            dp += u[k] * dpw(k);
            q += u[m + k] * pw(k);
            dq += u[m + k] * dpw(k);
        }
        f[i] = p * dq - dp * q;
        for k in 0..m {
            j[(i, k)] = pw(k) * dq - dpw(k) * q;
            j[(i, m + k)] = p * dpw(k) - dp * pw(k);
        }
    }
    (f, j)
}

fn to_plane(d: usize, u: &[C]) -> Plane2 {
    let m = d - 1;
    let mut p = vec![C::default(); d + 1];
    let mut q = vec![C::default(); d + 1];
    p[..m].copy_from_slice(&u[..m]);
    q[..m].copy_from_slice(&u[m..]);
    p[d] = C::new(1.0, 0.0);
    q[d - 1] = C::new(1.0, 0.0);
    Plane2::new(&p, &q, d).expect("monic rows are independent")
}

/// All planes reached by plain Newton iteration from `starts` random
/// complex starting points, merged at Plucker distance `1e-6`.
pub fn newton_oracle(d: usize, points: &[f64], starts: usize, rng: &mut impl Rng) -> Vec<Plane2> {
    let n = 2 * (d - 1);
    let mut found: Vec<Plane2> = Vec::new();
    for _ in 0..starts {
        let scale = 10f64.powf(rng.gen_range(-0.5..1.5));
        let mut u: Vec<C> = (0..n)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale)
            .collect();
        let mut converged = false;
        for _ in 0..80 {
            let (f, j) = system(d, points, &u);
            let Some(du) = j.lu().solve(&f) else { break };
            for (a, b) in u.iter_mut().zip(du.iter()) {
                *a -= b;
            }
            let size = u.iter().map(|z| z.norm()).fold(1.0, f64::max);
            if !size.is_finite() || size > 1e8 {
                break;
            }
            if du.norm() < 1e-13 * size {
                converged = true;
                break;
            }
        }
        if !converged {
            continue;
        }
        let plane = to_plane(d, &u);
        if found.iter().all(|q| q.distance(&plane) > 1e-6) {
            found.push(plane);
        }
    }
    found
}

/// The net with vertex `k` renamed `perm[k - 1]`.
pub fn relabel(net: &NetClass, perm: &[usize]) -> NetClass {
    NetClass::new(
        net.d(),
        net.matching().iter().map(|&(a, b)| (perm[a - 1], perm[b - 1])),
    )
    .expect("relabelling by the point order keeps the matching non-crossing")
}

/// A random real Mobius map; every other one reverses orientation.
pub fn random_real_mobius(rng: &mut impl Rng, reverse: bool) -> Mobius {
    let m = Mobius::random_real_orientation_preserving(rng);
    if reverse {
        m.compose(&Mobius::from_real(-1.0, 0.0, 0.0, 1.0).unwrap())
    } else {
        m
    }
}

/// Images of the points under `m`, sorted, with `perm[i]` the 1-based
/// position of the image of point `i`; `None` if a point goes to infinity
/// or the images crowd together.
pub fn transform_points(points: &[f64], m: &Mobius) -> Option<(Vec<f64>, Vec<usize>)> {
    let images: Vec<f64> = points
        .iter()
        .map(|&x| m.apply(C::new(x, 0.0)).map(|z| z.re))
        .collect::<Option<_>>()?;
    let mut order: Vec<usize> = (0..images.len()).collect();
    order.sort_by(|&a, &b| images[a].total_cmp(&images[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| images[i]).collect();
    let spread = sorted[sorted.len() - 1] - sorted[0];
    if !spread.is_finite() || sorted.windows(2).any(|w| w[1] - w[0] < 1e-3 * spread) {
        return None;
    }
    let mut perm = vec![0; images.len()];
    for (pos, &i) in order.iter().enumerate() {
        perm[i] = pos + 1;
    }
    Some((sorted, perm))
}
