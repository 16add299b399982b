use nalgebra::DMatrix;
use num_complex::Complex64;

use super::poly::Poly;
use crate::error::{Error, Result};

/// Radius within which polished roots are treated as one multiple root.
pub const CLUSTER_RADIUS: f64 = 1e-8;

/// Candidates closer than this are tested for being a single multiple root.
const CLUSTER_PROBE: f64 = 1e-4;

/// All roots of `p` with multiplicity, sorted by real then imaginary part.
pub fn poly_roots(p: &Poly) -> Result<Vec<Complex64>> {
    let Some(deg) = p.degree() else {
        return Err(Error::ZeroPolynomial);
    };
    let c = p.coeffs();
    let low = c.iter().take_while(|z| z.norm() == 0.0).count();
    let mut roots = vec![Complex64::default(); low];
    let reduced = &c[low..];
    if deg > low {
        let approx = companion_eigenvalues(reduced)?;
        roots.extend(approx.into_iter().map(|z| newton_polish(p, z)));
    }
    let mut roots = merge_clusters(p, roots);
    for z in &mut roots {
        let tiny = 1e-14 * z.norm().max(1.0);
        if z.re.abs() <= tiny {
            z.re = 0.0;
        }
        if z.im.abs() <= tiny {
            z.im = 0.0;
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// Roots grouped as `(value, multiplicity)`.
pub fn root_multiplicities(roots: &[Complex64]) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for &r in roots {
        match out
            .iter_mut()
            .find(|(z, _)| (z - r).norm() <= CLUSTER_RADIUS * (1.0 + r.norm()))
        {
            Some((_, m)) => *m += 1,
            None => out.push((r, 1)),
        }
    }
    out
}

fn companion_eigenvalues(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    let lead = c[n];
    if n == 1 {
        return Ok(vec![-c[0] / lead]);
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    balance(&mut m);
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Normalization("eigenvalue iteration did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::Normalization("eigenvalues unavailable".into()))?;
    Ok(eig.iter().copied().collect())
}

/// Diagonal similarity by powers of two equalizing row and column norms.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].norm();
                    row += m[(i, j)].norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut g = row / radix;
            while col < g {
                f *= radix;
                col *= radix * radix;
            }
            g = row * radix;
            while col > g {
                f /= radix;
                col /= radix * radix;
            }
            if (col + row / f) < 0.95 * total {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

fn newton_polish(p: &Poly, z0: Complex64) -> Complex64 {
    let dp = p.derivative();
    let mut z = z0;
    let mut best = (p.eval(z).norm(), z);
    for _ in 0..50 {
        let d = dp.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        z -= p.eval(z) / d;
        let r = p.eval(z).norm();
        if !r.is_finite() {
            break;
        }
        if r < best.0 {
            best = (r, z);
        } else if r >= best.0 * 0.5 {
            break;
        }
    }
    best.1
}

/// Replaces groups of nearby roots by a single polished multiple root when
/// the derivatives confirm the multiplicity.
fn merge_clusters(p: &Poly, mut roots: Vec<Complex64>) -> Vec<Complex64> {
    let n = roots.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        g[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1.0 + roots[i].norm().max(roots[j].norm());
            if (roots[i] - roots[j]).norm() <= CLUSTER_PROBE * scale {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut group, i);
        members[r].push(i);
    }
    for idx in members.into_iter().filter(|m| m.len() > 1) {
        let m = idx.len();
        let centroid = idx.iter().map(|&i| roots[i]).sum::<Complex64>() / m as f64;
        let mut derivs = vec![p.clone()];
        for _ in 1..m {
            let next = derivs.last().unwrap().derivative();
            derivs.push(next);
        }
        let z = newton_polish(&derivs[m - 1], centroid);
        let vanishes = derivs
            .iter()
            .all(|q| q.eval(z).norm() <= 1e-6 * q.abs_eval(z).max(f64::MIN_POSITIVE));
        let tight = idx
            .iter()
            .all(|&i| (roots[i] - z).norm() <= 1e-4_f64.max(CLUSTER_RADIUS) * (1.0 + z.norm()));
        if vanishes && tight {
            for &i in &idx {
                roots[i] = z;
            }
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn quadratic_and_cubic() {
        let r = poly_roots(&Poly::from_real(&[1.0, 0.0, 1.0])).unwrap();
        assert!(close(&r, &[c(0.0, -1.0), c(0.0, 1.0)], 1e-14));
        let r = poly_roots(&Poly::from_real(&[0.0, 6.0, 0.0, 2.0])).unwrap();
        let s = 3f64.sqrt();
        assert!(close(&r, &[c(0.0, -s), c(0.0, 0.0), c(0.0, s)], 1e-13));
    }

    #[test]
    fn double_root_is_exact_pair() {
        let r = poly_roots(&Poly::from_real(&[1.0, -2.0, 1.0])).unwrap();
        assert_eq!(r[0], r[1]);
        assert!((r[0] - c(1.0, 0.0)).norm() < 1e-10);
        assert_eq!(root_multiplicities(&r), vec![(r[0], 2)]);
        let triple = Poly::from_roots(&[c(0.5, 1.0); 3]);
        let r = poly_roots(&triple).unwrap();
        assert_eq!(root_multiplicities(&r).len(), 1);
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert_eq!(poly_roots(&Poly::zero()), Err(Error::ZeroPolynomial));
        assert!(poly_roots(&Poly::from_real(&[3.0])).unwrap().is_empty());
    }

    #[test]
    fn wide_spread_roots() {
        let want: Vec<Complex64> = (1..=10).map(|k| c(k as f64, 0.0)).collect();
        let r = poly_roots(&Poly::from_roots(&want)).unwrap();
        assert!(close(&r, &want, 1e-6));
    }
}
