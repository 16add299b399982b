//! Nets encoded as non-crossing perfect matchings of the `2d-2` circle
//! vertices, together with the cell complex, distinguished elements, parity
//! and dual trees derived from them.
//!
//! Vertices are numbered `1..=2d-2` anticlockwise; vertex `2d-2` plays the
//! role of `v_0`, the vertex sitting at `1` on the unit circle.

mod complex;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use complex::{
    build_complex, distinguished_elements, parity_map, CellComplex, DirectedEdge, Distinguished,
    Face, FaceId, Side,
};
pub use tree::{dual_trees, face_order, DualTree, TreeNode};

/// Index of a vertex on the unit circle, in `1..=2d-2`.
pub type Vertex = usize;

/// `u_d = binom(2d-2, d-1) / d`, the number of net classes.
pub fn catalan_u(d: usize) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidDegree(d));
    }
    // C_{k+1} = C_k * 2(2k+1) / (k+2), exact at every step.
    let mut c: u64 = 1;
    for k in 0..(d as u128 - 1) {
        let next = u128::from(c) * (2 * (2 * k + 1)) / (k + 2);
        c = u64::try_from(next).map_err(|_| Error::Overflow("catalan number"))?;
    }
    Ok(c)
}

/// An edge of a net. Arcs `t_k` join `v_{k-1}` and `v_k` on the circle,
/// chords lie in the open unit disk and mirrors are their reflections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeId {
    Arc(usize),
    Chord(usize, usize),
    Mirror(usize, usize),
}

impl EdgeId {
    pub fn chord(a: usize, b: usize) -> Self {
        EdgeId::Chord(a.min(b), a.max(b))
    }

    pub fn is_arc(&self) -> bool {
        matches!(self, EdgeId::Arc(_))
    }

    /// Image under the symmetry `z -> 1/conj(z)`.
    pub fn mirror(&self) -> Self {
        match *self {
            EdgeId::Arc(k) => EdgeId::Arc(k),
            EdgeId::Chord(a, b) => EdgeId::Mirror(a, b),
            EdgeId::Mirror(a, b) => EdgeId::Chord(a, b),
        }
    }

    /// True for arcs and chords, the edges lying in the closed unit disk.
    pub fn in_closed_disk(&self) -> bool {
        !matches!(self, EdgeId::Mirror(..))
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeId::Arc(k) => write!(f, "t{k}"),
            EdgeId::Chord(a, b) => write!(f, "c{a}-{b}"),
            EdgeId::Mirror(a, b) => write!(f, "m{a}-{b}"),
        }
    }
}

impl FromStr for EdgeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownEdge(s.to_string());
        let mut chars = s.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let rest = chars.as_str();
        match kind {
            't' => rest.parse().map(EdgeId::Arc).map_err(|_| bad()),
            'c' | 'm' => {
                let (a, b) = rest.split_once('-').ok_or_else(bad)?;
                let a: usize = a.parse().map_err(|_| bad())?;
                let b: usize = b.parse().map_err(|_| bad())?;
                if a == b {
                    return Err(bad());
                }
                let e = EdgeId::chord(a, b);
                Ok(if kind == 'c' { e } else { e.mirror() })
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for EdgeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EdgeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A class of nets, stored as a canonical non-crossing perfect matching.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NetClass {
    d: usize,
    matching: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
struct RawNetClass {
    d: usize,
    matching: Vec<(usize, usize)>,
}

impl<'de> Deserialize<'de> for NetClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawNetClass::deserialize(deserializer)?;
        NetClass::new(raw.d, raw.matching).map_err(serde::de::Error::custom)
    }
}

impl NetClass {
    /// Validates and canonicalizes a matching of `{1, ..., 2d-2}`.
    pub fn new(d: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDegree(d));
        }
        let n = 2 * d - 2;
        let mut matching: Vec<(usize, usize)> =
            pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        matching.sort_unstable();
        if matching.len() != d - 1 {
            return Err(Error::InvalidMatching(format!(
                "expected {} pairs, found {}",
                d - 1,
                matching.len()
            )));
        }
        let mut seen = vec![false; n + 1];
        for &(a, b) in &matching {
            if a == b || a == 0 || b > n {
                return Err(Error::InvalidMatching(format!("bad pair {{{a},{b}}}")));
            }
            for v in [a, b] {
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::InvalidMatching(format!("vertex {v} matched twice")));
                }
            }
        }
        for (i, &(a, b)) in matching.iter().enumerate() {
            for &(c, e) in &matching[i + 1..] {
                if (a < c && c < b && b < e) || (c < a && a < e && e < b) {
                    return Err(Error::InvalidMatching(format!(
                        "pairs {{{a},{b}}} and {{{c},{e}}} cross"
                    )));
                }
            }
        }
        Ok(NetClass { d, matching })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of circle vertices, `2d-2`.
    pub fn vertex_count(&self) -> usize {
        2 * self.d - 2
    }

    pub fn matching(&self) -> &[(usize, usize)] {
        &self.matching
    }

    pub fn partner(&self, v: Vertex) -> Vertex {
        self.matching
            .iter()
            .find_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .expect("vertex outside the matching")
    }

    pub fn chords(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.matching.iter().map(|&(a, b)| EdgeId::Chord(a, b))
    }

    pub fn arcs(&self) -> impl Iterator<Item = EdgeId> {
        (1..=self.vertex_count()).map(EdgeId::Arc)
    }

    /// Endpoints of an arc `t_k`: `(v_{k-1}, v_k)` with `v_0 = v_{2d-2}`.
    pub fn arc_endpoints(&self, k: usize) -> (Vertex, Vertex) {
        let prev = if k == 1 { self.vertex_count() } else { k - 1 };
        (prev, k)
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        match e {
            EdgeId::Arc(k) => (1..=self.vertex_count()).contains(&k),
            EdgeId::Chord(a, b) | EdgeId::Mirror(a, b) => self.matching.contains(&(a, b)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("net serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl fmt::Display for NetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, b)) in self.matching.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{{a},{b}}}")?;
        }
        write!(f, "}}")
    }
}

/// All net classes for degree `d`, in lexicographic order.
pub fn enumerate_nets(d: usize) -> Result<Vec<NetClass>> {
    if d < 2 {
        return Err(Error::InvalidDegree(d));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(d - 1);
    let points: Vec<usize> = (1..=2 * d - 2).collect();
    matchings_of(&points, &mut current, &mut |m| {
        out.push(NetClass::new(d, m.iter().copied()).expect("generated matching is non-crossing"));
    });
    out.sort();
    Ok(out)
}

// Recurses on the partner of the smallest unmatched point. Points between
// the pair must match among themselves, so only odd offsets are allowed.
fn matchings_of(
    points: &[usize],
    current: &mut Vec<(usize, usize)>,
    emit: &mut dyn FnMut(&[(usize, usize)]),
) {
    fn go(
        pending: &mut Vec<&[usize]>,
        current: &mut Vec<(usize, usize)>,
        emit: &mut dyn FnMut(&[(usize, usize)]),
    ) {
        let Some(block) = pending.pop() else {
            emit(current);
            return;
        };
        if block.is_empty() {
            go(pending, current, emit);
            pending.push(block);
            return;
        }
        for j in (1..block.len()).step_by(2) {
            current.push((block[0], block[j]));
            pending.push(&block[j + 1..]);
            pending.push(&block[1..j]);
            go(pending, current, emit);
            pending.pop();
            pending.pop();
            current.pop();
        }
        pending.push(block);
    }
    let mut pending = vec![points];
    go(&mut pending, current, emit);
}

/// A net with all of its derived combinatorial structure computed once.
#[derive(Clone, Debug)]
pub struct AnalyzedNet {
    pub net: NetClass,
    pub complex: CellComplex,
    pub distinguished: Distinguished,
    pub parity: Vec<i8>,
    pub s_tree: DualTree,
    pub s_hat: DualTree,
    pub order: Vec<FaceId>,
}

impl AnalyzedNet {
    pub fn new(net: &NetClass) -> Result<Self> {
        let complex = build_complex(net)?;
        let distinguished = distinguished_elements(&complex)?;
        let parity = parity_map(&complex, &distinguished)?;
        let (s_tree, s_hat) = dual_trees(&complex, &distinguished)?;
        let order = face_order(&complex, &s_tree)?;
        Ok(AnalyzedNet {
            net: net.clone(),
            complex,
            distinguished,
            parity,
            s_tree,
            s_hat,
            order,
        })
    }

    pub fn d(&self) -> usize {
        self.net.d()
    }

    /// `N(gamma)`, the index of `v_{-1}`.
    pub fn n_index(&self) -> usize {
        self.distinguished.n
    }

    /// Arcs and chords, the variables of a labeling.
    pub fn disk_edges(&self) -> Vec<EdgeId> {
        self.net.arcs().chain(self.net.chords()).collect()
    }
}
