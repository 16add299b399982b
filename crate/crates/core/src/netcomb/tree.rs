use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::complex::{CellComplex, Distinguished, FaceId};
use super::EdgeId;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeNode {
    /// `q_G` for an inside face.
    Face(FaceId),
    /// The leaf `q_e` attached for an arc `t_k`.
    Arc(usize),
}

/// A rooted tree whose edges `tau_e` are labelled by the net edge they cross.
#[derive(Clone, Debug)]
pub struct DualTree {
    nodes: Vec<TreeNode>,
    parent: Vec<Option<(usize, EdgeId)>>,
    children: Vec<Vec<(EdgeId, usize)>>,
    index: BTreeMap<TreeNode, usize>,
    edge_child: BTreeMap<EdgeId, usize>,
}

impl DualTree {
    fn with_root(root: TreeNode) -> Self {
        DualTree {
            nodes: vec![root],
            parent: vec![None],
            children: vec![vec![]],
            index: BTreeMap::from([(root, 0)]),
            edge_child: BTreeMap::new(),
        }
    }

    fn attach(&mut self, parent: usize, edge: EdgeId, node: TreeNode) -> Result<usize> {
        if self.index.contains_key(&node) || self.edge_child.contains_key(&edge) {
            return Err(Error::Structural(format!(
                "dual graph has a cycle through {edge}"
            )));
        }
        let id = self.nodes.len();
        self.nodes.push(node);
        self.parent.push(Some((parent, edge)));
        self.children.push(vec![]);
        self.children[parent].push((edge, id));
        self.children[parent].sort_unstable();
        self.index.insert(node, id);
        self.edge_child.insert(edge, id);
        Ok(id)
    }

    /// Index of the root `q_0`.
    pub fn root(&self) -> usize {
        0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_child.len()
    }

    pub fn node(&self, id: usize) -> TreeNode {
        self.nodes[id]
    }

    pub fn index_of(&self, node: TreeNode) -> Option<usize> {
        self.index.get(&node).copied()
    }

    pub fn parent(&self, id: usize) -> Option<(usize, EdgeId)> {
        self.parent[id]
    }

    /// Children of a node, ordered by the edge label.
    pub fn children(&self, id: usize) -> &[(EdgeId, usize)] {
        &self.children[id]
    }

    /// The node at the far end (away from the root) of `tau_e`.
    pub fn child_of_edge(&self, e: EdgeId) -> Option<usize> {
        self.edge_child.get(&e).copied()
    }

    pub fn edge_labels(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edge_child.keys().copied()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.children[i].is_empty())
    }

    /// Nodes on the path from `id` up to the root, inclusive.
    pub fn path_to_root(&self, mut id: usize) -> Vec<usize> {
        let mut path = vec![id];
        while let Some((p, _)) = self.parent[id] {
            path.push(p);
            id = p;
        }
        path
    }

    /// True if `a` lies strictly before `b` on the path from the root to `b`.
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        a != b && self.path_to_root(b).contains(&a)
    }

    /// Membership mask of the minimal subtree containing the root and `targets`.
    pub fn spanning_subtree(&self, targets: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut inside = vec![false; self.nodes.len()];
        inside[self.root()] = true;
        for t in targets {
            let mut id = t;
            while !inside[id] {
                inside[id] = true;
                id = self.parent[id].expect("non-root node has a parent").0;
            }
        }
        inside
    }

    /// Connectivity and acyclicity, checked from scratch on the edge list.
    pub fn is_tree(&self) -> bool {
        let n = self.nodes.len();
        if self.edge_child.len() + 1 != n {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.root()];
        let mut visited = 0;
        while let Some(u) = stack.pop() {
            if std::mem::replace(&mut seen[u], true) {
                return false;
            }
            visited += 1;
            stack.extend(self.children[u].iter().map(|&(_, c)| c));
        }
        visited == n
    }
}

/// The dual tree `S` of the inside faces and its extension `S^` by one leaf
/// per arc, both rooted at the distinguished face.
pub fn dual_trees(complex: &CellComplex, dist: &Distinguished) -> Result<(DualTree, DualTree)> {
    let d = complex.net().d();
    let mut s = DualTree::with_root(TreeNode::Face(dist.g0));
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let TreeNode::Face(f) = s.node(u) else {
            unreachable!()
        };
        let mut chords: Vec<EdgeId> = complex
            .face(f)
            .edges()
            .filter(|e| matches!(e, EdgeId::Chord(..)))
            .collect();
        chords.sort_unstable();
        for e in chords {
            if s.parent(u).is_some_and(|(_, pe)| pe == e) {
                continue;
            }
            let g = complex.across(f, e).expect("chord borders two faces");
            let child = s.attach(u, e, TreeNode::Face(g))?;
            queue.push_back(child);
        }
    }
    if s.node_count() != d || s.edge_count() != d - 1 {
        return Err(Error::Structural(format!(
            "dual tree has {} nodes and {} edges",
            s.node_count(),
            s.edge_count()
        )));
    }
    let mut s_hat = s.clone();
    for u in 0..s.node_count() {
        let TreeNode::Face(f) = s.node(u) else {
            unreachable!()
        };
        for e in complex.face(f).edges() {
            if let EdgeId::Arc(k) = e {
                s_hat.attach(u, e, TreeNode::Arc(k))?;
            }
        }
    }
    Ok((s, s_hat))
}

/// Breadth-first order of the inside faces from the distinguished face, in
/// which each face shares exactly one edge with the union of its predecessors.
pub fn face_order(complex: &CellComplex, s: &DualTree) -> Result<Vec<FaceId>> {
    let mut order = Vec::with_capacity(s.node_count());
    let mut position = vec![usize::MAX; s.node_count()];
    let mut queue = VecDeque::from([s.root()]);
    while let Some(u) = queue.pop_front() {
        position[u] = order.len();
        let TreeNode::Face(f) = s.node(u) else {
            unreachable!()
        };
        order.push(f);
        queue.extend(s.children(u).iter().map(|&(_, c)| c));
    }

    let mut seen_edges: BTreeSet<EdgeId> = BTreeSet::new();
    for (k, &f) in order.iter().enumerate() {
        let shared = complex
            .face(f)
            .edges()
            .filter(|e| seen_edges.contains(e))
            .count();
        if k > 0 && shared != 1 {
            return Err(Error::Structural(format!(
                "face {f} shares {shared} edges with its predecessors"
            )));
        }
        seen_edges.extend(complex.face(f).edges());
    }
    for b in 0..s.node_count() {
        for a in s.path_to_root(b).into_iter().skip(1) {
            if position[a] >= position[b] {
                return Err(Error::Structural(
                    "face order does not refine the tree order".into(),
                ));
            }
        }
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcomb::{build_complex, distinguished_elements, enumerate_nets, NetClass};

    #[test]
    fn d3_trees() {
        let net = NetClass::new(3, [(1, 2), (3, 4)]).unwrap();
        let c = build_complex(&net).unwrap();
        let g = distinguished_elements(&c).unwrap();
        let (s, s_hat) = dual_trees(&c, &g).unwrap();
        assert_eq!(s.node_count(), 3);
        let kids: Vec<_> = s.children(0).iter().map(|&(e, c)| (e, s.node(c))).collect();
        assert_eq!(
            kids,
            vec![
                (EdgeId::Chord(1, 2), TreeNode::Face(1)),
                (EdgeId::Chord(3, 4), TreeNode::Face(2))
            ]
        );
        let leaf_parent = |k| {
            let id = s_hat.index_of(TreeNode::Arc(k)).unwrap();
            s_hat.node(s_hat.parent(id).unwrap().0)
        };
        assert_eq!(leaf_parent(1), TreeNode::Face(0));
        assert_eq!(leaf_parent(3), TreeNode::Face(0));
        assert_eq!(leaf_parent(2), TreeNode::Face(1));
        assert_eq!(leaf_parent(4), TreeNode::Face(2));
        assert_eq!(face_order(&c, &s).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn tree_shapes_for_all_small_nets() {
        for d in 3..=6 {
            for net in enumerate_nets(d).unwrap() {
                let c = build_complex(&net).unwrap();
                let g = distinguished_elements(&c).unwrap();
                let (s, s_hat) = dual_trees(&c, &g).unwrap();
                assert!(s.is_tree() && s_hat.is_tree());
                assert_eq!(s.edge_count(), d - 1);
                assert_eq!(s_hat.node_count(), d + 2 * d - 2);
                assert!(s_hat.leaves().count() >= 2 * d - 2);
                let order = face_order(&c, &s).unwrap();
                assert_eq!(order[0], g.g0);
                assert_eq!(order.len(), d);
            }
        }
    }

    #[test]
    fn spanning_subtree_marks_root_paths() {
        let net = NetClass::new(3, [(1, 2), (3, 4)]).unwrap();
        let c = build_complex(&net).unwrap();
        let g = distinguished_elements(&c).unwrap();
        let (_, s_hat) = dual_trees(&c, &g).unwrap();
        let leaf = s_hat.index_of(TreeNode::Arc(2)).unwrap();
        let mask = s_hat.spanning_subtree([leaf]);
        let marked: Vec<TreeNode> = (0..mask.len()).filter(|&i| mask[i]).map(|i| s_hat.node(i)).collect();
        assert_eq!(marked.len(), 3);
        assert!(marked.contains(&TreeNode::Face(1)));
    }
}
