//! Critical sequences: arc lengths between consecutive critical points on
//! the unit circle, with `v_0`, `v_1` and `v_N` pinned to the cube roots of
//! unity, and the open faces of the polytope they form.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labelpoly::{check_arc_subset, ArcSet, ArcSubsetW};
use crate::netcomb::{AnalyzedNet, EdgeId, NetClass};

const TWO_PI: f64 = 2.0 * PI;
const THIRD: f64 = TWO_PI / 3.0;

/// Tolerance for anchors, ordering and the three sum constraints.
pub const SEQUENCE_TOL: f64 = 1e-9;

/// Arc lengths `l(t_k)`, `k = 1..2d-2`, keyed to a net for its index `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalSequence {
    net: NetClass,
    l: BTreeMap<EdgeId, f64>,
}

impl CriticalSequence {
    /// Validates the three sum constraints and nonnegativity.
    pub fn new(net: &AnalyzedNet, lengths: &[f64]) -> Result<Self> {
        let n_arcs = net.net.vertex_count();
        if lengths.len() != n_arcs {
            return Err(Error::InvalidSequence(format!(
                "expected {n_arcs} arc lengths, found {}",
                lengths.len()
            )));
        }
        if let Some(k) = lengths.iter().position(|&l| l < -SEQUENCE_TOL || l.is_nan()) {
            return Err(Error::InvalidSequence(format!("negative length on t{}", k + 1)));
        }
        let n = net.n_index();
        let sums = [
            lengths[0],
            lengths[1..n].iter().sum::<f64>(),
            lengths[n..].iter().sum::<f64>(),
        ];
        for (which, s) in sums.iter().enumerate() {
            if (s - THIRD).abs() > SEQUENCE_TOL * n_arcs as f64 {
                return Err(Error::InvalidSequence(format!(
                    "run {} sums to {s}, not 2pi/3",
                    which + 1
                )));
            }
        }
        let l = lengths
            .iter()
            .enumerate()
            .map(|(i, &v)| (EdgeId::Arc(i + 1), v.max(0.0)))
            .collect();
        Ok(CriticalSequence {
            net: net.net.clone(),
            l,
        })
    }

    pub fn net(&self) -> &NetClass {
        &self.net
    }

    /// Lengths in arc order `t_1, t_2, ...`.
    pub fn lengths(&self) -> Vec<f64> {
        self.l.values().copied().collect()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.l[&EdgeId::Arc(k)]
    }

    /// Arcs with positive length.
    pub fn support(&self) -> ArcSet {
        ArcSet::from_arcs(
            self.l
                .iter()
                .filter(|(_, &v)| v > SEQUENCE_TOL)
                .map(|(e, _)| match e {
                    EdgeId::Arc(k) => *k,
                    _ => unreachable!(),
                }),
        )
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.support().len() == self.l.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sequence serialization cannot fail")
    }

    pub fn from_json(net: &AnalyzedNet, s: &str) -> Result<Self> {
        let raw: CriticalSequence = serde_json::from_str(s)?;
        if raw.net != net.net {
            return Err(Error::InvalidSequence("sequence belongs to another net".into()));
        }
        CriticalSequence::new(net, &raw.lengths())
    }
}

fn cube_root(k: i32) -> Complex64 {
    Complex64::from_polar(1.0, THIRD * k as f64)
}

/// Arc lengths of a point configuration. `points[k-1]` is the image of
/// `v_k`; the last point is `v_0 = 1`. Angles accumulate from `1`, so arcs
/// longer than `pi` are measured correctly.
pub fn seq_from_points(net: &AnalyzedNet, points: &[Complex64]) -> Result<CriticalSequence> {
    let n_arcs = net.net.vertex_count();
    if points.len() != n_arcs {
        return Err(Error::InvalidSequence(format!(
            "expected {n_arcs} points, found {}",
            points.len()
        )));
    }
    let n = net.n_index();
    let anchors = [(n_arcs, cube_root(0)), (1, cube_root(1)), (n, cube_root(-1))];
    for (k, target) in anchors {
        if (points[k - 1] - target).norm() > SEQUENCE_TOL {
            return Err(Error::InvalidSequence(format!(
                "v{k} must sit at {target}, found {}",
                points[k - 1]
            )));
        }
    }
    let mut angles = Vec::with_capacity(n_arcs + 1);
    angles.push(0.0);
    for (i, z) in points[..n_arcs - 1].iter().enumerate() {
        if (z.norm() - 1.0).abs() > SEQUENCE_TOL {
            return Err(Error::InvalidSequence(format!("v{} is off the circle", i + 1)));
        }
        let mut a = z.arg().rem_euclid(TWO_PI);
        if a < THIRD - SEQUENCE_TOL {
            a += TWO_PI;
        }
        angles.push(a);
    }
    angles.push(TWO_PI);
    let mut lengths = Vec::with_capacity(n_arcs);
    for w in angles.windows(2) {
        let l = w[1] - w[0];
        if l < -SEQUENCE_TOL {
            return Err(Error::InvalidSequence(
                "points are not in anticlockwise order".into(),
            ));
        }
        lengths.push(l.max(0.0));
    }
    CriticalSequence::new(net, &lengths)
}

/// Points `exp(i * cumulative length)`, the image of `v_1 .. v_{2d-2}`.
pub fn points_from_seq(seq: &CriticalSequence) -> Vec<Complex64> {
    let mut angle = 0.0;
    let mut out: Vec<Complex64> = seq
        .lengths()
        .into_iter()
        .map(|l| {
            angle += l;
            Complex64::from_polar(1.0, angle)
        })
        .collect();
    // v_0 closes the loop exactly.
    if let Some(last) = out.last_mut() {
        *last = Complex64::new(1.0, 0.0);
    }
    out
}

/// An open face `A_W` of the critical-sequence polytope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpenFaceA {
    pub w: ArcSubsetW,
}

impl OpenFaceA {
    /// A point of the face: each of the three runs splits `2pi/3` evenly
    /// over its arcs in `W`.
    pub fn barycenter(&self, net: &AnalyzedNet) -> CriticalSequence {
        let n_arcs = net.net.vertex_count();
        let n = net.n_index();
        let arcs = self.w.arcs();
        let mut lengths = vec![0.0; n_arcs];
        for run in [1..=1, 2..=n, n + 1..=n_arcs] {
            let live: Vec<usize> = run.filter(|&k| arcs.contains(k)).collect();
            for &k in &live {
                lengths[k - 1] = THIRD / live.len() as f64;
            }
        }
        CriticalSequence::new(net, &lengths).expect("barycenter satisfies the constraints")
    }

    pub fn dimension(&self, net: &AnalyzedNet) -> usize {
        let n = net.n_index();
        let arcs = self.w.arcs();
        let left = (2..=n).filter(|&k| arcs.contains(k)).count();
        let right = (n + 1..=net.net.vertex_count()).filter(|&k| arcs.contains(k)).count();
        left + right - 2
    }
}

/// Every nonempty open face, ordered lexicographically by sorted arc list.
pub fn enumerate_open_faces(net: &AnalyzedNet) -> Vec<OpenFaceA> {
    let n_arcs = net.net.vertex_count();
    let mut faces: Vec<(Vec<usize>, OpenFaceA)> = (0u64..1 << n_arcs)
        .map(|bits| ArcSet::from_bits(bits << 1))
        .filter(|&arcs| check_arc_subset(net, arcs).is_ok())
        .map(|arcs| {
            let w = ArcSubsetW::new(net, arcs).expect("checked above");
            (arcs.iter().collect(), OpenFaceA { w })
        })
        .collect();
    faces.sort();
    faces.into_iter().map(|(_, f)| f).collect()
}

/// `A_{W1}` lies in the closure of `A_{W2}` exactly when `W1 ⊆ W2`.
pub fn face_leq(w1: &ArcSubsetW, w2: &ArcSubsetW) -> bool {
    w1.arcs().is_subset(&w2.arcs())
}

/// Dimension of the polytope, a product of simplices of dimensions `N-2`
/// and `2d-N-3`.
pub fn sigma_dimension(net: &AnalyzedNet) -> usize {
    let n = net.n_index();
    (n - 2) + (2 * net.d() - n - 3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d3() -> AnalyzedNet {
        AnalyzedNet::new(&NetClass::new(3, [(1, 2), (3, 4)]).unwrap()).unwrap()
    }

    #[test]
    fn d3_points_with_free_middle_vertex() {
        let net = d3();
        let x = Complex64::from_polar(1.0, THIRD + 0.5);
        let pts = [cube_root(1), x, cube_root(-1), cube_root(0)];
        let seq = seq_from_points(&net, &pts).unwrap();
        let l = seq.lengths();
        assert!((l[0] - THIRD).abs() < 1e-12);
        assert!((l[3] - THIRD).abs() < 1e-12);
        assert!((l[1] - 0.5).abs() < 1e-12);
        assert!((l[1] + l[2] - THIRD).abs() < 1e-12);
        let back = points_from_seq(&seq);
        for (a, b) in back.iter().zip(&pts) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn anchors_enforced() {
        let net = d3();
        let pts = [cube_root(1), cube_root(1), cube_root(0), cube_root(0)];
        assert!(seq_from_points(&net, &pts).is_err());
        let out_of_order = [
            cube_root(1),
            Complex64::from_polar(1.0, 0.3),
            cube_root(-1),
            cube_root(0),
        ];
        assert!(seq_from_points(&net, &out_of_order).is_err());
    }

    #[test]
    fn degenerate_points_coincide() {
        let net = d3();
        let pts = [cube_root(1), cube_root(1), cube_root(-1), cube_root(0)];
        let seq = seq_from_points(&net, &pts).unwrap();
        assert_eq!(seq.support(), ArcSet::from_arcs([1, 3, 4]));
        let back = points_from_seq(&seq);
        assert!((back[0] - back[1]).norm() < 1e-15);
    }

    #[test]
    fn d3_open_faces() {
        let net = d3();
        let faces: Vec<ArcSet> = enumerate_open_faces(&net).iter().map(|f| f.w.arcs()).collect();
        assert_eq!(
            faces,
            vec![
                ArcSet::from_arcs([1, 2, 3, 4]),
                ArcSet::from_arcs([1, 2, 4]),
                ArcSet::from_arcs([1, 3, 4]),
            ]
        );
        assert_eq!(sigma_dimension(&net), 1);
    }

    #[test]
    fn face_order_is_inclusion() {
        let net = d3();
        let all = ArcSubsetW::full(&net);
        let w = ArcSubsetW::new(&net, ArcSet::from_arcs([1, 2, 4])).unwrap();
        assert!(face_leq(&w, &all));
        assert!(!face_leq(&all, &w));
        assert!(face_leq(&w, &w));
    }

    #[test]
    fn barycenter_lies_in_face() {
        let net = d3();
        for face in enumerate_open_faces(&net) {
            let seq = face.barycenter(&net);
            assert_eq!(seq.support(), face.w.arcs());
        }
    }

    #[test]
    fn json_form() {
        let net = d3();
        let seq = OpenFaceA { w: ArcSubsetW::full(&net) }.barycenter(&net);
        let s = seq.to_json();
        assert!(s.starts_with(r#"{"net":{"d":3,"matching":[[1,2],[3,4]]},"l":{"t1":"#));
        assert_eq!(CriticalSequence::from_json(&net, &s).unwrap(), seq);
    }
}
