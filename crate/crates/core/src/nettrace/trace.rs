use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcomb::NetClass;
use crate::numcore::Rational;

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceConfig {
    pub step: f64,
    pub correction_tol: f64,
    pub landing_radius: f64,
    pub max_steps: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            step: 1e-3,
            correction_tol: 1e-10,
            landing_radius: 1e-4,
            max_steps: 1_000_000,
        }
    }
}

impl TraceConfig {
    pub fn with_step(step: f64) -> Self {
        TraceConfig {
            step,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.step, self.correction_tol, self.landing_radius]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0);
        if !positive || self.max_steps == 0 || self.landing_radius <= self.correction_tol {
            return Err(Error::Trace("invalid trace configuration".into()));
        }
        Ok(())
    }
}

/// A chord of `F^{-1}(T)` inside the unit disk, joining two vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TracedChord {
    pub start_vertex: usize,
    pub end_vertex: usize,
    pub polyline: Vec<C>,
}

/// `log|F|` and `F'/F` at `z`.
fn level(f: &Rational, z: C) -> (f64, C) {
    let (p, q) = (f.numerator(), f.denominator());
    let (pv, qv) = (p.eval(z), q.eval(z));
    let h = pv.norm().ln() - qv.norm().ln();
    let g = p.derivative().eval(z) / pv - q.derivative().eval(z) / qv;
    (h, g)
}

fn correct(f: &Rational, z: C, tol: f64) -> Option<C> {
    let mut z = z;
    for _ in 0..12 {
        let (h, g) = level(f, z);
        if !h.is_finite() || g.norm() == 0.0 || !g.is_finite() {
            return None;
        }
        if h.abs() < tol {
            return Some(z);
        }
        z -= g.conj() * (h / g.norm_sqr());
    }
    let (h, _) = level(f, z);
    (h.abs() < tol).then_some(z)
}

/// Traces the branch of `|F| = 1` entering the disk at vertex `start`
/// (index into `crit`), returning the landing vertex and the polyline.
pub fn trace_from(f: &Rational, crit: &[C], start: usize, cfg: &TraceConfig) -> Result<(usize, Vec<C>)> {
    let c0 = crit[start];
    let mut dir = -c0 / c0.norm();
    let mut z = c0;
    let mut line = vec![c0];
    let others = || (0..crit.len()).filter(move |&j| j != start);
    for _ in 0..cfg.max_steps {
        let mut dists: Vec<(usize, f64)> = others().map(|j| (j, (z - crit[j]).norm())).collect();
        dists.sort_by(|a, b| a.1.total_cmp(&b.1));
        let nearest = dists[0];
        let leaving = (z - c0).norm() < 4.0 * cfg.step;
        let on_circle = 1.0 - z.norm() < cfg.landing_radius;
        if line.len() > 1 && (nearest.1 < cfg.landing_radius || (on_circle && !leaving)) {
            // Chords meet the circle only at critical points.
            if dists.get(1).is_some_and(|second| second.1 < 2.0 * nearest.1.max(cfg.landing_radius)) {
                return Err(Error::Trace(format!(
                    "ambiguous landing near vertex {}",
                    nearest.0 + 1
                )));
            }
            line.push(crit[nearest.0]);
            return Ok((nearest.0, line));
        }
        let mut s = cfg.step.min(0.5 * nearest.1);
        if !leaving {
            s = s.min(0.5 * (1.0 - z.norm()));
        }
        loop {
            if s < 1e-14 {
                return Err(Error::Trace(format!(
                    "step collapsed tracing from vertex {}",
                    start + 1
                )));
            }
            let pred = z + dir * s;
            let moved = correct(f, pred, cfg.correction_tol)
                .filter(|w| w.norm() < 1.0 && (w - pred).norm() <= 0.5 * s && (w - z).norm() > 0.1 * s);
            match moved {
                Some(w) => {
                    let (_, g) = level(f, w);
                    let mut t = C::i() * g.conj();
                    t /= t.norm();
                    let step_dir = (w - z) / (w - z).norm();
                    if (t * step_dir.conj()).re < 0.0 {
                        t = -t;
                    }
                    dir = t;
                    z = w;
                    line.push(w);
                    break;
                }
                None => s /= 2.0,
            }
        }
    }
    Err(Error::Trace(format!(
        "no landing within {} steps from vertex {}",
        cfg.max_steps,
        start + 1
    )))
}

/// All chords, each traced from both ends and reconciled. Vertices are
/// numbered `1..=2d-2` by position in `crit`.
pub fn trace_chords(f: &Rational, crit: &[C], cfg: &TraceConfig) -> Result<Vec<TracedChord>> {
    cfg.validate()?;
    let n = crit.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Trace(format!("{n} critical points cannot be paired")));
    }
    let mut cfg = *cfg;
    for _attempt in 0..3 {
        let traces: Vec<Result<(usize, Vec<C>)>> =
            (0..n).map(|k| trace_from(f, crit, k, &cfg)).collect();
        let ok: Option<Vec<(usize, Vec<C>)>> = traces.iter().map(|t| t.as_ref().ok().cloned()).collect();
        let consistent = ok
            .as_ref()
            .is_some_and(|t| (0..n).all(|k| t[t[k].0].0 == k && t[k].0 != k));
        if consistent {
            let t = ok.unwrap();
            let chords = (0..n)
                .filter(|&k| k < t[k].0)
                .map(|k| TracedChord {
                    start_vertex: k + 1,
                    end_vertex: t[k].0 + 1,
                    polyline: t[k].1.clone(),
                })
                .collect();
            return Ok(chords);
        }
        if _attempt == 2 {
            if let Some(Err(e)) = traces.into_iter().find(|t| t.is_err()) {
                return Err(e);
            }
            break;
        }
        cfg.step /= 4.0;
    }
    Err(Error::Trace("the two tracings of a chord disagree".into()))
}

/// The matching read off the chords, as a canonical net.
pub fn net_from_chords(d: usize, chords: &[TracedChord]) -> Result<NetClass> {
    NetClass::new(d, chords.iter().map(|c| (c.start_vertex, c.end_vertex)))
}

/// Largest `||F| - 1|` over the polyline samples.
pub fn level_defect(f: &Rational, chord: &TracedChord) -> f64 {
    chord
        .polyline
        .iter()
        .filter_map(|&z| f.eval(z))
        .map(|w| (w.norm() - 1.0).abs())
        .fold(0.0, f64::max)
}

fn segments_cross(a: C, b: C, c: C, d: C) -> bool {
    let orient = |p: C, q: C, r: C| ((q - p).conj() * (r - p)).im;
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// True if polylines of distinct chords never cross.
pub fn chords_disjoint(chords: &[TracedChord]) -> bool {
    let cell = chords
        .iter()
        .flat_map(|c| c.polyline.windows(2).map(|w| (w[1] - w[0]).norm()))
        .fold(1e-6, f64::max)
        * 2.0;
    let key = |z: C| ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<(usize, usize)>> = HashMap::new();
    for (ci, c) in chords.iter().enumerate() {
        for (si, w) in c.polyline.windows(2).enumerate() {
            let (k0, k1) = (key(w[0]), key(w[1]));
            for x in k0.0.min(k1.0)..=k0.0.max(k1.0) {
                for y in k0.1.min(k1.1)..=k0.1.max(k1.1) {
                    grid.entry((x, y)).or_default().push((ci, si));
                }
            }
        }
    }
    for bucket in grid.values() {
        for (i, &(ca, sa)) in bucket.iter().enumerate() {
            for &(cb, sb) in &bucket[i + 1..] {
                if ca == cb {
                    continue;
                }
                let a = &chords[ca].polyline;
                let b = &chords[cb].polyline;
                if segments_cross(a[sa], a[sa + 1], b[sb], b[sb + 1]) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::Poly;

    #[test]
    fn degree_two_has_one_chord() {
        // (z-1)^2 / (z+1)^2 has critical points -1 and 1.
        let f = Rational::new(
            &Poly::from_real(&[1.0, -2.0, 1.0]),
            &Poly::from_real(&[1.0, 2.0, 1.0]),
            2,
        )
        .unwrap();
        let g = crate::numcore::cayley_transport(&f).unwrap();
        let crit = [C::new(0.0, 1.0), C::new(0.0, -1.0)];
        assert!(g.derivative(crit[0]).norm() < 1e-12);
        let chords = trace_chords(&g, &crit, &TraceConfig::default()).unwrap();
        assert_eq!(chords.len(), 1);
        assert_eq!((chords[0].start_vertex, chords[0].end_vertex), (1, 2));
        assert!(level_defect(&g, &chords[0]) < 1e-9);
        assert!(chords_disjoint(&chords));
        assert!(chords[0].polyline.iter().all(|z| z.norm() <= 1.0));
    }

    #[test]
    fn segment_crossing() {
        let c = |a, b| C::new(a, b);
        assert!(segments_cross(c(0.0, 0.0), c(1.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)));
        assert!(!segments_cross(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)));
    }
}
