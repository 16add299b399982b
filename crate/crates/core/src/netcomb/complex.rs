use std::collections::{BTreeMap, VecDeque};

use super::{EdgeId, NetClass, Vertex};
use crate::error::{Error, Result};

pub type FaceId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

/// An edge traversed from `from` to `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirectedEdge {
    pub edge: EdgeId,
    pub from: Vertex,
    pub to: Vertex,
}

impl DirectedEdge {
    fn reversed(self) -> Self {
        DirectedEdge {
            edge: self.edge,
            from: self.to,
            to: self.from,
        }
    }
}

/// A face with its boundary oriented so that the face lies on the left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub id: FaceId,
    pub side: Side,
    pub boundary: Vec<DirectedEdge>,
}

impl Face {
    pub fn vertex_count(&self) -> usize {
        self.boundary.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.boundary.iter().map(|de| de.from)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.boundary.iter().map(|de| de.edge)
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.boundary.iter().any(|de| de.edge == e)
    }

    pub fn directed(&self, e: EdgeId) -> Option<DirectedEdge> {
        self.boundary.iter().copied().find(|de| de.edge == e)
    }
}

/// Cellular decomposition of the sphere induced by a net. Faces `0..d` lie
/// in the unit disk; face `d + i` is the mirror image of face `i`.
#[derive(Clone, Debug)]
pub struct CellComplex {
    net: NetClass,
    faces: Vec<Face>,
    edges: Vec<EdgeId>,
    edge_faces: BTreeMap<EdgeId, [FaceId; 2]>,
}

impl CellComplex {
    pub fn net(&self) -> &NetClass {
        &self.net
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: FaceId) -> &Face {
        &self.faces[id]
    }

    pub fn inside_faces(&self) -> &[Face] {
        &self.faces[..self.net.d()]
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    /// The two faces adjacent to an edge.
    pub fn faces_of(&self, e: EdgeId) -> Option<[FaceId; 2]> {
        self.edge_faces.get(&e).copied()
    }

    /// The face across `e` from `face`.
    pub fn across(&self, face: FaceId, e: EdgeId) -> Option<FaceId> {
        let [a, b] = self.faces_of(e)?;
        if a == face {
            Some(b)
        } else if b == face {
            Some(a)
        } else {
            None
        }
    }

    pub fn mirror_face(&self, face: FaceId) -> FaceId {
        let d = self.net.d();
        if face < d {
            face + d
        } else {
            face - d
        }
    }

    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        match e {
            EdgeId::Arc(k) => self.net.arc_endpoints(k),
            EdgeId::Chord(a, b) | EdgeId::Mirror(a, b) => (a, b),
        }
    }

    /// The edges incident to a vertex: two arcs, its chord and its mirror.
    pub fn vertex_edges(&self, v: Vertex) -> [EdgeId; 4] {
        let n = self.net.vertex_count();
        let chord = EdgeId::chord(v, self.net.partner(v));
        let next_arc = if v == n { 1 } else { v + 1 };
        [EdgeId::Arc(v), EdgeId::Arc(next_arc), chord, chord.mirror()]
    }

    pub fn vertex_degree(&self, v: Vertex) -> usize {
        self.edges
            .iter()
            .filter(|&&e| {
                let (a, b) = self.endpoints(e);
                a == v || b == v
            })
            .count()
    }

    /// The unique inside face having arc `t_k` on its boundary.
    pub fn inside_face_of_arc(&self, k: usize) -> FaceId {
        let [a, b] = self.edge_faces[&EdgeId::Arc(k)];
        a.min(b)
    }
}

/// Builds the cell complex of a net: inside faces are traced by walking
/// anticlockwise along an arc, then across the chord at its head.
pub fn build_complex(net: &NetClass) -> Result<CellComplex> {
    let d = net.d();
    let n = net.vertex_count();
    let next_arc = |v: Vertex| if v == n { 1 } else { v + 1 };

    let mut arc_used = vec![false; n + 1];
    let mut faces = Vec::with_capacity(2 * d);
    for start in 1..=n {
        if arc_used[start] {
            continue;
        }
        let mut boundary = Vec::new();
        let mut k = start;
        loop {
            if arc_used[k] {
                return Err(Error::Structural(format!("arc t{k} visited twice")));
            }
            arc_used[k] = true;
            let (from, to) = net.arc_endpoints(k);
            boundary.push(DirectedEdge {
                edge: EdgeId::Arc(k),
                from,
                to,
            });
            let partner = net.partner(to);
            boundary.push(DirectedEdge {
                edge: EdgeId::chord(to, partner),
                from: to,
                to: partner,
            });
            k = next_arc(partner);
            if k == start {
                break;
            }
        }
        faces.push(Face {
            id: faces.len(),
            side: Side::Inside,
            boundary,
        });
    }
    if faces.len() != d {
        return Err(Error::Structural(format!(
            "expected {d} inside faces, found {}",
            faces.len()
        )));
    }
    for i in 0..d {
        // Reflection reverses orientation.
        let boundary = faces[i]
            .boundary
            .iter()
            .rev()
            .map(|de| {
                let r = de.reversed();
                DirectedEdge {
                    edge: r.edge.mirror(),
                    ..r
                }
            })
            .collect();
        faces.push(Face {
            id: d + i,
            side: Side::Outside,
            boundary,
        });
    }

    let mut adjacency: BTreeMap<EdgeId, Vec<FaceId>> = BTreeMap::new();
    for face in &faces {
        for e in face.edges() {
            adjacency.entry(e).or_default().push(face.id);
        }
    }
    let mut edge_faces = BTreeMap::new();
    for (e, fs) in adjacency {
        match fs.as_slice() {
            &[a, b] if a != b => {
                edge_faces.insert(e, [a, b]);
            }
            _ => {
                return Err(Error::Structural(format!(
                    "edge {e} borders {} faces",
                    fs.len()
                )))
            }
        }
    }
    let edges: Vec<EdgeId> = edge_faces.keys().copied().collect();
    Ok(CellComplex {
        net: net.clone(),
        faces,
        edges,
        edge_faces,
    })
}

/// Distinguished face, vertices and edges of a net.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Distinguished {
    pub g0: FaceId,
    /// `N(gamma)`: `v_{-1} = v_N`.
    pub n: usize,
    pub e1: EdgeId,
    pub e_neg1: EdgeId,
    /// Whichever of `e1`, `e_neg1` lies on the circle.
    pub e_prime: EdgeId,
    pub e_dbl_prime: EdgeId,
}

pub fn distinguished_elements(complex: &CellComplex) -> Result<Distinguished> {
    let net = complex.net();
    let v0 = net.vertex_count();
    let v1 = 1;
    let candidates: Vec<&Face> = complex
        .inside_faces()
        .iter()
        .filter(|f| {
            f.vertex_count() >= 4 && f.vertices().any(|v| v == v0) && f.vertices().any(|v| v == v1)
        })
        .collect();
    let g0 = match candidates.as_slice() {
        [g0] => *g0,
        _ => {
            return Err(Error::Structural(format!(
                "{} candidate distinguished faces for net {net}",
                candidates.len()
            )))
        }
    };
    let len = g0.boundary.len();
    let i = g0
        .boundary
        .iter()
        .position(|de| de.from == v0)
        .expect("v0 lies on the boundary");
    let out = g0.boundary[i];
    let inc = g0.boundary[(i + len - 1) % len];
    if out.to != v1 {
        return Err(Error::Structural(format!(
            "edge after v0 on the distinguished face ends at v{}",
            out.to
        )));
    }
    let (e_prime, e_dbl_prime) = match (out.edge.is_arc(), inc.edge.is_arc()) {
        (true, false) => (out.edge, inc.edge),
        (false, true) => (inc.edge, out.edge),
        _ => {
            return Err(Error::Structural(
                "exactly one of e1, e-1 must be an arc".into(),
            ))
        }
    };
    let n = inc.from;
    if n < 3 || n + 3 > 2 * net.d() {
        return Err(Error::Structural(format!("N = {n} out of range")));
    }
    Ok(Distinguished {
        g0: g0.id,
        n,
        e1: out.edge,
        e_neg1: inc.edge,
        e_prime,
        e_dbl_prime,
    })
}

/// Parity of every face, `+1` on the distinguished face and alternating
/// across every edge. Indexed by `FaceId`.
pub fn parity_map(complex: &CellComplex, dist: &Distinguished) -> Result<Vec<i8>> {
    let mut parity = vec![0i8; complex.faces().len()];
    parity[dist.g0] = 1;
    let mut queue = VecDeque::from([dist.g0]);
    while let Some(f) = queue.pop_front() {
        for e in complex.face(f).edges() {
            let g = complex.across(f, e).expect("edge borders face");
            if parity[g] == 0 {
                parity[g] = -parity[f];
                queue.push_back(g);
            } else if parity[g] == parity[f] {
                return Err(Error::Structural(format!(
                    "faces {f} and {g} share edge {e} and have equal parity"
                )));
            }
        }
    }
    if parity.contains(&0) {
        return Err(Error::Structural("face adjacency is disconnected".into()));
    }
    Ok(parity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcomb::enumerate_nets;

    fn net(pairs: &[(usize, usize)]) -> NetClass {
        NetClass::new(pairs.len() + 1, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn d3_first_net_faces() {
        let c = build_complex(&net(&[(1, 2), (3, 4)])).unwrap();
        let inside: Vec<Vec<EdgeId>> = c.inside_faces().iter().map(|f| f.edges().collect()).collect();
        assert_eq!(
            inside,
            vec![
                vec![EdgeId::Arc(1), EdgeId::Chord(1, 2), EdgeId::Arc(3), EdgeId::Chord(3, 4)],
                vec![EdgeId::Arc(2), EdgeId::Chord(1, 2)],
                vec![EdgeId::Arc(4), EdgeId::Chord(3, 4)],
            ]
        );
        // Arc t1 runs from v_0 = v_4 to v_1 on the boundary of the 4-gon.
        assert_eq!(
            c.face(0).boundary[0],
            DirectedEdge {
                edge: EdgeId::Arc(1),
                from: 4,
                to: 1
            }
        );
        // The mirror face walks the arcs clockwise.
        assert!(c.face(3).boundary.iter().any(|de| de.edge == EdgeId::Arc(1) && de.from == 1));
    }

    #[test]
    fn d3_distinguished() {
        let c = build_complex(&net(&[(1, 2), (3, 4)])).unwrap();
        let g = distinguished_elements(&c).unwrap();
        assert_eq!(g.g0, 0);
        assert_eq!(g.n, 3);
        assert_eq!((g.e1, g.e_prime), (EdgeId::Arc(1), EdgeId::Arc(1)));
        assert_eq!((g.e_neg1, g.e_dbl_prime), (EdgeId::Chord(3, 4), EdgeId::Chord(3, 4)));

        let c = build_complex(&net(&[(1, 4), (2, 3)])).unwrap();
        let g = distinguished_elements(&c).unwrap();
        assert_eq!(c.face(g.g0).vertex_count(), 4);
        assert_eq!(g.n, 3);
        assert_eq!((g.e1, g.e_dbl_prime), (EdgeId::Chord(1, 4), EdgeId::Chord(1, 4)));
        assert_eq!((g.e_neg1, g.e_prime), (EdgeId::Arc(4), EdgeId::Arc(4)));
    }

    #[test]
    fn d3_parity() {
        let c = build_complex(&net(&[(1, 2), (3, 4)])).unwrap();
        let g = distinguished_elements(&c).unwrap();
        let p = parity_map(&c, &g).unwrap();
        assert_eq!(&p[..3], &[1, -1, -1]);
        for f in 0..3 {
            assert_eq!(p[c.mirror_face(f)], -p[f]);
        }
    }

    #[test]
    fn counts_for_every_small_net() {
        for d in 3..=6 {
            for n in enumerate_nets(d).unwrap() {
                let c = build_complex(&n).unwrap();
                assert_eq!(c.faces().len(), 2 * d);
                assert_eq!(c.edges().len(), 4 * d - 4);
                assert!(c.faces().iter().all(|f| f.vertex_count() % 2 == 0));
                for v in 1..=2 * d - 2 {
                    assert_eq!(c.vertex_degree(v), 4);
                    for e in c.vertex_edges(v) {
                        assert!(c.faces_of(e).is_some());
                    }
                }
                let g = distinguished_elements(&c).unwrap();
                assert!((3..=2 * d - 3).contains(&g.n));
            }
        }
    }

    #[test]
    fn d2_has_no_distinguished_face() {
        let c = build_complex(&net(&[(1, 2)])).unwrap();
        assert!(matches!(distinguished_elements(&c), Err(Error::Structural(_))));
    }
}
