//! Labelings of a net: validation, the affine dimension of the labeling
//! polytope, support sets, and the explicit constructions that realize a
//! prescribed set of surviving arcs.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcomb::{AnalyzedNet, EdgeId, FaceId, NetClass, Side, Vertex};

/// Tolerance on face sums and label bounds.
pub const LABEL_TOL: f64 = 1e-9;

const TWO_PI: f64 = 2.0 * PI;

/// A set of arcs `t_k`, bit `k` standing for `t_k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcSet(u64);

impl ArcSet {
    pub fn empty() -> Self {
        ArcSet(0)
    }

    /// All arcs `t_1 .. t_n`.
    pub fn full(n: usize) -> Self {
        assert!(n < 64, "at most 63 arcs");
        ArcSet(((1u64 << n) - 1) << 1)
    }

    pub fn from_arcs(arcs: impl IntoIterator<Item = usize>) -> Self {
        arcs.into_iter().fold(ArcSet(0), |s, k| s.with(k))
    }

    pub fn with(self, k: usize) -> Self {
        assert!((1..64).contains(&k), "arc index out of range");
        ArcSet(self.0 | (1 << k))
    }

    pub fn contains(&self, k: usize) -> bool {
        k < 64 && self.0 & (1 << k) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(&self, other: &ArcSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(&self, other: &ArcSet) -> ArcSet {
        ArcSet(self.0 | other.0)
    }

    pub fn bits(&self) -> u64 {
        self.0
    }

    pub fn from_bits(bits: u64) -> Self {
        ArcSet(bits & !1)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (1..64).filter(|&k| self.contains(k))
    }

    pub fn edges(&self) -> Vec<EdgeId> {
        self.iter().map(EdgeId::Arc).collect()
    }

    /// Parses a comma-separated list such as `t1,t2,t4`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut set = ArcSet::empty();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.parse::<EdgeId>()? {
                EdgeId::Arc(k) if (1..64).contains(&k) => set = set.with(k),
                _ => return Err(Error::InvalidArcSubset(format!("{part} is not an arc"))),
            }
        }
        Ok(set)
    }
}

impl fmt::Display for ArcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|k| format!("t{k}")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Checks that an arc subset describes a nonempty open face of the
/// critical-sequence polytope: `t_1` is present and both runs
/// `t_2..t_N` and `t_{N+1}..t_{2d-2}` meet the subset.
pub fn check_arc_subset(net: &AnalyzedNet, arcs: ArcSet) -> Result<()> {
    let n_arcs = net.net.vertex_count();
    let n = net.n_index();
    if !arcs.is_subset(&ArcSet::full(n_arcs)) {
        return Err(Error::InvalidArcSubset(format!(
            "{arcs} contains arcs beyond t{n_arcs}"
        )));
    }
    let e_prime = net.distinguished.e_prime;
    let EdgeId::Arc(k_prime) = e_prime else {
        unreachable!("e' is an arc")
    };
    for k in [k_prime, 1] {
        if !arcs.contains(k) {
            let which = if k == k_prime { format!("e' = {e_prime}") } else { "t1".into() };
            return Err(Error::InvalidArcSubset(format!("{arcs} must contain {which}")));
        }
    }
    if !(2..=n).any(|k| arcs.contains(k)) || !(n + 1..=n_arcs).any(|k| arcs.contains(k)) {
        return Err(Error::InvalidArcSubset(format!(
            "{arcs} must meet both t2..t{n} and t{}..t{n_arcs}",
            n + 1
        )));
    }
    Ok(())
}

/// An arc subset `W` satisfying the open-face conditions for its net.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcSubsetW(ArcSet);

impl ArcSubsetW {
    pub fn new(net: &AnalyzedNet, arcs: ArcSet) -> Result<Self> {
        check_arc_subset(net, arcs)?;
        Ok(ArcSubsetW(arcs))
    }

    pub fn full(net: &AnalyzedNet) -> Self {
        ArcSubsetW(ArcSet::full(net.net.vertex_count()))
    }

    pub fn arcs(&self) -> ArcSet {
        self.0
    }
}

/// Edge labels on the closed disk; mirror labels equal their chords.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Labeling {
    net: NetClass,
    p: BTreeMap<EdgeId, f64>,
}

impl Labeling {
    pub fn new(net: NetClass, p: BTreeMap<EdgeId, f64>) -> Result<Self> {
        for &e in p.keys() {
            if !e.in_closed_disk() || !net.contains_edge(e) {
                return Err(Error::EdgeNotInNet(e));
            }
        }
        Ok(Labeling { net, p })
    }

    pub fn net(&self) -> &NetClass {
        &self.net
    }

    /// Stored labels: arcs and chords only.
    pub fn values(&self) -> &BTreeMap<EdgeId, f64> {
        &self.p
    }

    /// Label of any edge; a mirror reads its chord. Missing labels are `NaN`.
    pub fn get(&self, e: EdgeId) -> f64 {
        let key = if e.in_closed_disk() { e } else { e.mirror() };
        self.p.get(&key).copied().unwrap_or(f64::NAN)
    }

    /// All `4d-4` labels with mirrors materialized.
    pub fn full_values(&self) -> BTreeMap<EdgeId, f64> {
        self.p
            .iter()
            .flat_map(|(&e, &v)| [(e, v), (e.mirror(), v)])
            .collect()
    }

    pub fn face_sum(&self, net: &AnalyzedNet, face: FaceId) -> f64 {
        net.complex.face(face).edges().map(|e| self.get(e)).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("labeling serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: Labeling = serde_json::from_str(s)?;
        Labeling::new(raw.net, raw.p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NetMismatch,
    Missing(EdgeId),
    OutOfRange { edge: EdgeId, value: f64 },
    FaceSum { face: FaceId, sum: f64 },
    Normalization { edge: EdgeId, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NetMismatch => write!(f, "labeling belongs to a different net"),
            Violation::Missing(e) => write!(f, "no label for {e}"),
            Violation::OutOfRange { edge, value } => {
                write!(f, "label {value} of {edge} outside [0, 2pi]")
            }
            Violation::FaceSum { face, sum } => {
                write!(f, "labels around face {face} sum to {sum}, not 2pi")
            }
            Violation::Normalization { edge, value } => {
                write!(f, "distinguished edge {edge} has label {value}, not 2pi/3")
            }
        }
    }
}

/// Violations of nonnegativity, the face sums and the normalization of the
/// two distinguished edges, at tolerance `tol`.
pub fn validate_labeling_tol(net: &AnalyzedNet, p: &Labeling, tol: f64) -> Vec<Violation> {
    if p.net() != &net.net {
        return vec![Violation::NetMismatch];
    }
    let mut out = Vec::new();
    for e in net.disk_edges() {
        let v = p.get(e);
        if v.is_nan() {
            out.push(Violation::Missing(e));
        } else if !(-tol..=TWO_PI + tol).contains(&v) {
            out.push(Violation::OutOfRange { edge: e, value: v });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for face in net.complex.inside_faces() {
        let sum = p.face_sum(net, face.id);
        if (sum - TWO_PI).abs() > tol {
            out.push(Violation::FaceSum { face: face.id, sum });
        }
    }
    for e in [net.distinguished.e1, net.distinguished.e_neg1] {
        let v = p.get(e);
        if (v - TWO_PI / 3.0).abs() > tol {
            out.push(Violation::Normalization { edge: e, value: v });
        }
    }
    out
}

pub fn validate_labeling(net: &AnalyzedNet, p: &Labeling) -> Vec<Violation> {
    validate_labeling_tol(net, p, LABEL_TOL)
}

/// Affine dimension of the labeling polytope: the number of disk edges
/// minus the numerical rank of the face-sum and normalization constraints.
pub fn labeling_dimension(net: &AnalyzedNet) -> usize {
    let edges = net.disk_edges();
    let col: BTreeMap<EdgeId, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let faces = net.complex.inside_faces();
    let mut a = DMatrix::<f64>::zeros(faces.len() + 2, edges.len());
    for (row, face) in faces.iter().enumerate() {
        for e in face.edges() {
            a[(row, col[&e])] += 1.0;
        }
    }
    a[(faces.len(), col[&net.distinguished.e1])] = 1.0;
    a[(faces.len() + 1, col[&net.distinguished.e_neg1])] = 1.0;
    let sv = a.singular_values();
    let tol = sv.max() * 1e-9 * edges.len() as f64;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    edges.len() - rank
}

/// Zero set, the region `D` around the distinguished face, and the derived
/// arc sets.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportData {
    /// Edges with zero label, mirrors included.
    pub zero_edges: BTreeSet<EdgeId>,
    pub region_faces: BTreeSet<FaceId>,
    pub region_edges: BTreeSet<EdgeId>,
    /// Arcs lying in `D`.
    pub e_arcs: ArcSet,
    /// Zero arcs and chords on the boundary of `D`.
    pub e_boundary: BTreeSet<EdgeId>,
    /// Edges of `D` whose label is not strictly between 0 and 2pi.
    pub bound_violations: Vec<EdgeId>,
}

impl SupportData {
    /// Whether the surviving arcs form a valid open face.
    pub fn arcs_form_open_face(&self, net: &AnalyzedNet) -> bool {
        check_arc_subset(net, self.e_arcs).is_ok()
    }
}

/// Region growing: faces connect through edges with positive label.
pub fn support(net: &AnalyzedNet, p: &Labeling) -> SupportData {
    support_tol(net, p, LABEL_TOL)
}

/// As [`support`], treating labels at most `zero_tol` as zero.
pub fn support_tol(net: &AnalyzedNet, p: &Labeling, zero_tol: f64) -> SupportData {
    let complex = &net.complex;
    let zero_edges: BTreeSet<EdgeId> = complex
        .edges()
        .iter()
        .copied()
        .filter(|&e| p.get(e) <= zero_tol)
        .collect();
    let mut region_faces = BTreeSet::from([net.distinguished.g0]);
    let mut stack = vec![net.distinguished.g0];
    while let Some(f) = stack.pop() {
        for e in complex.face(f).edges() {
            if zero_edges.contains(&e) {
                continue;
            }
            let g = complex.across(f, e).expect("edge borders face");
            if region_faces.insert(g) {
                stack.push(g);
            }
        }
    }
    let mut region_edges = BTreeSet::new();
    let mut e_boundary = BTreeSet::new();
    for &f in &region_faces {
        for e in complex.face(f).edges() {
            if zero_edges.contains(&e) {
                if e.in_closed_disk() {
                    e_boundary.insert(e);
                }
            } else {
                region_edges.insert(e);
            }
        }
    }
    let e_arcs = ArcSet::from_arcs(region_edges.iter().filter_map(|e| match e {
        EdgeId::Arc(k) => Some(*k),
        _ => None,
    }));
    let bound_violations = region_edges
        .iter()
        .copied()
        .filter(|&e| {
            let v = p.get(e);
            !(v > LABEL_TOL && v < TWO_PI - LABEL_TOL)
        })
        .collect();
    SupportData {
        zero_edges,
        region_faces,
        region_edges,
        e_arcs,
        e_boundary,
        bound_violations,
    }
}

/// Arcs where the critical sequence of `p` is predicted to be nonzero.
pub fn predicted_support(net: &AnalyzedNet, p: &Labeling) -> ArcSet {
    support(net, p).e_arcs
}

// Subtree of S^ spanned by the root and the leaves of `arcs`, as a node mask.
fn arc_subtree(net: &AnalyzedNet, arcs: ArcSet) -> Vec<bool> {
    let tree = &net.s_hat;
    tree.spanning_subtree(arcs.iter().map(|k| {
        tree.index_of(crate::netcomb::TreeNode::Arc(k))
            .expect("every arc has a leaf")
    }))
}

fn in_subtree(net: &AnalyzedNet, mask: &[bool], e: EdgeId) -> bool {
    mask[net.s_hat.child_of_edge(e).expect("disk edge labels a tree edge")]
}

/// Boundary edges of the region determined by `w`: tree edges leaving the
/// subtree spanned by the root and the leaves of `w`.
pub fn e0_from_w(net: &AnalyzedNet, w: &ArcSubsetW) -> BTreeSet<EdgeId> {
    let mask = arc_subtree(net, w.arcs());
    let tree = &net.s_hat;
    tree.edge_labels()
        .filter(|&e| {
            let child = tree.child_of_edge(e).expect("labelled edge");
            let (parent, _) = tree.parent(child).expect("child has a parent");
            !mask[child] && mask[parent]
        })
        .collect()
}

type PiUnits = Rational64;

fn to_labeling(net: &AnalyzedNet, units: BTreeMap<EdgeId, PiUnits>) -> Labeling {
    let p = units
        .into_iter()
        .map(|(e, u)| (e, *u.numer() as f64 / *u.denom() as f64 * PI))
        .collect();
    Labeling::new(net.net.clone(), p).expect("constructed labels lie on net edges")
}

// Labels on the distinguished face: 2/3 on e' and e'', the remaining third
// split evenly over the other boundary edges whose tree edge lies in `mask`.
fn label_distinguished_face(
    net: &AnalyzedNet,
    mask: &[bool],
    units: &mut BTreeMap<EdgeId, PiUnits>,
) -> Result<()> {
    let g0 = net.complex.face(net.distinguished.g0);
    let special = [net.distinguished.e_prime, net.distinguished.e_dbl_prime];
    let shared: Vec<EdgeId> = g0
        .edges()
        .filter(|e| !special.contains(e) && in_subtree(net, mask, *e))
        .collect();
    if shared.is_empty() {
        return Err(Error::Structural(
            "no boundary edge of the distinguished face survives".into(),
        ));
    }
    let third = PiUnits::new(2, 3);
    let share = third / PiUnits::from(shared.len() as i64);
    for e in g0.edges() {
        let v = if special.contains(&e) {
            third
        } else if shared.contains(&e) {
            share
        } else {
            PiUnits::from(0)
        };
        units.insert(e, v);
    }
    Ok(())
}

fn parent_edge(net: &AnalyzedNet, face: FaceId) -> (usize, EdgeId) {
    let tree = &net.s_tree;
    let node = tree
        .index_of(crate::netcomb::TreeNode::Face(face))
        .expect("inside face has a node");
    let (_, e) = tree.parent(node).expect("non-root face has a parent");
    (node, e)
}

/// A labeling whose surviving arcs are exactly `w`, built face by face along
/// the dual tree.
pub fn lemma6_labeling(net: &AnalyzedNet, w: &ArcSubsetW) -> Result<Labeling> {
    check_arc_subset(net, w.arcs())?;
    let mask = arc_subtree(net, w.arcs());
    let mut units = BTreeMap::new();
    label_distinguished_face(net, &mask, &mut units)?;
    let two = PiUnits::from(2);
    let zero = PiUnits::from(0);
    for &face in &net.order[1..] {
        let (_, e_star) = parent_edge(net, face);
        let p_star = units[&e_star];
        let others: Vec<EdgeId> = net
            .complex
            .face(face)
            .edges()
            .filter(|&e| e != e_star)
            .collect();
        if p_star == two {
            for e in others {
                units.insert(e, zero);
            }
        } else if p_star == zero {
            let e2 = *others.iter().min().expect("faces have at least two edges");
            for e in others {
                units.insert(e, if e == e2 { two } else { zero });
            }
        } else {
            let live: Vec<EdgeId> = others
                .iter()
                .copied()
                .filter(|&e| in_subtree(net, &mask, e))
                .collect();
            if live.is_empty() {
                return Err(Error::Structural(format!(
                    "face {face} has no surviving edge besides {e_star}"
                )));
            }
            let share = (two - p_star) / PiUnits::from(live.len() as i64);
            for e in others {
                units.insert(e, if live.contains(&e) { share } else { zero });
            }
        }
    }
    Ok(to_labeling(net, units))
}

/// A labeling vanishing on the boundary sets of every member of a
/// decreasing chain `W_1 ⊇ ... ⊇ W_k`. The full arc set is prepended when
/// the chain does not start with it.
pub fn lemma7_labeling(net: &AnalyzedNet, chain: &[ArcSubsetW]) -> Result<Labeling> {
    let full = ArcSubsetW::full(net);
    let mut sets: Vec<ArcSet> = Vec::with_capacity(chain.len() + 1);
    if chain.first() != Some(&full) {
        sets.push(full.arcs());
    }
    for w in chain {
        check_arc_subset(net, w.arcs())?;
        sets.push(w.arcs());
    }
    if sets.windows(2).any(|pair| !pair[1].is_subset(&pair[0])) {
        return Err(Error::NonNestedChain);
    }
    let masks: Vec<Vec<bool>> = sets.iter().map(|&w| arc_subtree(net, w)).collect();
    let mut units = BTreeMap::new();
    label_distinguished_face(net, masks.last().expect("chain is nonempty"), &mut units)?;
    let two = PiUnits::from(2);
    let zero = PiUnits::from(0);
    for &face in &net.order[1..] {
        let (node, e_star) = parent_edge(net, face);
        let s_node = net
            .s_hat
            .index_of(crate::netcomb::TreeNode::Face(face))
            .expect("face node in S^");
        debug_assert_eq!(net.s_tree.node(node), net.s_hat.node(s_node));
        let m = masks
            .iter()
            .rposition(|mask| mask[s_node])
            .expect("the full subtree contains every face");
        let others: Vec<EdgeId> = net
            .complex
            .face(face)
            .edges()
            .filter(|&e| e != e_star)
            .collect();
        let live: Vec<EdgeId> = others
            .iter()
            .copied()
            .filter(|&e| in_subtree(net, &masks[m], e))
            .collect();
        if live.is_empty() {
            return Err(Error::Structural(format!(
                "face {face} is a leaf of its subtree"
            )));
        }
        let share = (two - units[&e_star]) / PiUnits::from(live.len() as i64);
        for e in others {
            units.insert(e, if live.contains(&e) { share } else { zero });
        }
    }
    Ok(to_labeling(net, units))
}

/// The nondegenerate labeling obtained with every arc surviving.
pub fn interior_labeling(net: &AnalyzedNet) -> Result<Labeling> {
    lemma6_labeling(net, &ArcSubsetW::full(net))
}

/// A vertex of the collapsed complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuotientVertex {
    Original(Vertex),
    /// A component of the complement of `D`, identified to a point; lists
    /// the original vertices it contains.
    Collapsed(Vec<Vertex>),
}

/// The complex obtained by collapsing each component of the complement of
/// `D` to a point.
#[derive(Clone, Debug)]
pub struct QuotientComplex {
    pub vertices: Vec<QuotientVertex>,
    /// Surviving edges with their endpoints as quotient vertex indices.
    pub edges: Vec<(EdgeId, usize, usize)>,
    /// Surviving faces with their boundary vertex cycles.
    pub faces: Vec<(FaceId, Vec<usize>)>,
}

impl QuotientComplex {
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(_, a, b)| usize::from(a == v) + usize::from(b == v))
            .sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }
}

pub fn collapse_complex(net: &AnalyzedNet, p: &Labeling) -> QuotientComplex {
    let complex = &net.complex;
    let sup = support(net, p);
    let n = net.net.vertex_count();
    let in_d = |v: Vertex| {
        complex
            .vertex_edges(v)
            .iter()
            .all(|e| sup.region_edges.contains(e))
    };

    // Union-find over the vertices outside D, merged along every cell of B.
    let mut parent: Vec<usize> = (0..=n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut union = |a: usize, b: usize| {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    for &e in complex.edges() {
        if !sup.region_edges.contains(&e) {
            let (a, b) = complex.endpoints(e);
            union(a, b);
        }
    }
    for face in complex.faces() {
        if !sup.region_faces.contains(&face.id) {
            let vs: Vec<Vertex> = face.vertices().collect();
            for w in vs.windows(2) {
                union(w[0], w[1]);
            }
        }
    }

    let mut vertices = Vec::new();
    let mut index = vec![usize::MAX; n + 1];
    let mut groups: BTreeMap<usize, Vec<Vertex>> = BTreeMap::new();
    for v in 1..=n {
        if in_d(v) {
            index[v] = vertices.len();
            vertices.push(QuotientVertex::Original(v));
        } else {
            groups.entry(find(&mut parent, v)).or_default().push(v);
        }
    }
    for members in groups.into_values() {
        for &v in &members {
            index[v] = vertices.len();
        }
        vertices.push(QuotientVertex::Collapsed(members));
    }

    let edges = sup
        .region_edges
        .iter()
        .map(|&e| {
            let (a, b) = complex.endpoints(e);
            (e, index[a], index[b])
        })
        .collect();
    let faces = sup
        .region_faces
        .iter()
        .map(|&f| {
            let mut cycle: Vec<usize> = complex.face(f).vertices().map(|v| index[v]).collect();
            cycle.dedup();
            while cycle.len() > 1 && cycle.first() == cycle.last() {
                cycle.pop();
            }
            (f, cycle)
        })
        .collect();
    QuotientComplex {
        vertices,
        edges,
        faces,
    }
}

/// Faces inside the unit disk of the region `D`.
pub fn region_inside_faces(net: &AnalyzedNet, sup: &SupportData) -> Vec<FaceId> {
    sup.region_faces
        .iter()
        .copied()
        .filter(|&f| net.complex.face(f).side == Side::Inside)
        .collect()
}
