//! Voting trees as hash-consed DAGs.
//!
//! Trees are built inside a [`Forest`], an append-only arena that
//! canonicalizes nodes: asking for the same leaf or the same pair of
//! children twice returns the same [`NodeId`]. Children always precede
//! their parents, so arena order is a topological order. A finished tree is
//! snapshotted into a [`VotingTree`], which holds only the reachable nodes
//! in left-first post-order; two structurally equal trees produce identical
//! snapshots.
//!
//! Evaluation follows match semantics: at each internal node the left
//! child's winner `i` advances iff `i == j` or `i` beats `j`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::tournament::{Candidate, Tournament, MAX_VERTICES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tuple length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("cannot build a tree from zero leaves")]
    Empty,
    #[error("variable {0} is unbound")]
    Unbound(String),
    #[error("candidate {candidate} out of range for a tournament on {n} vertices")]
    OutOfRange { candidate: Candidate, n: usize },
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        offset: usize,
        message: String,
    },
}

/// A leaf label: a tournament vertex or a named input.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Candidate(Candidate),
    Variable(Box<str>),
}

impl Label {
    pub fn var(name: &str) -> Self {
        Label::Variable(name.into())
    }

    pub fn is_identifier(name: &str) -> bool {
        let mut chars = name.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }
}

impl From<Candidate> for Label {
    fn from(c: Candidate) -> Self {
        Label::Candidate(c)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Candidate(c) => write!(f, "{c}"),
            Label::Variable(v) => f.write_str(v),
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    Leaf(Label),
    Internal(NodeId, NodeId),
}

/// Variable assignment used at evaluation time.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Bindings(BTreeMap<String, Candidate>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: Candidate) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: Candidate) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<Candidate> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Candidate)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

impl<'a> FromIterator<(&'a str, Candidate)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (&'a str, Candidate)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

/// Append-only hash-consing arena of tree nodes.
#[derive(Default, Clone)]
pub struct Forest {
    nodes: Vec<Node>,
    index: HashMap<Node, NodeId>,
    depth: Vec<u32>,
    leaves: Vec<BigUint>,
}

impl Forest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct nodes ever created.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let (depth, leaves) = match &node {
            Node::Leaf(_) => (0, BigUint::from(1u32)),
            Node::Internal(l, r) => (
                1 + self.depth[l.index()].max(self.depth[r.index()]),
                &self.leaves[l.index()] + &self.leaves[r.index()],
            ),
        };
        let id = NodeId(u32::try_from(self.nodes.len()).expect("forest exceeds u32 nodes"));
        self.nodes.push(node.clone());
        self.depth.push(depth);
        self.leaves.push(leaves);
        self.index.insert(node, id);
        id
    }

    pub fn leaf(&mut self, label: Label) -> NodeId {
        self.intern(Node::Leaf(label))
    }

    pub fn candidate(&mut self, c: Candidate) -> NodeId {
        self.leaf(Label::Candidate(c))
    }

    pub fn variable(&mut self, name: &str) -> NodeId {
        self.leaf(Label::var(name))
    }

    /// The match between two subtrees; `left` is the first-listed competitor.
    pub fn node(&mut self, left: NodeId, right: NodeId) -> NodeId {
        self.intern(Node::Internal(left, right))
    }

    /// Complete binary tree whose leaves, left to right, are `items`.
    pub fn from_tuple(&mut self, items: &[NodeId]) -> Result<NodeId, TreeError> {
        if items.is_empty() {
            return Err(TreeError::Empty);
        }
        if !items.len().is_power_of_two() {
            return Err(TreeError::NotPowerOfTwo(items.len()));
        }
        let mut layer = items.to_vec();
        while layer.len() > 1 {
            layer = layer.chunks(2).map(|p| self.node(p[0], p[1])).collect();
        }
        Ok(layer[0])
    }

    /// [`Forest::from_tuple`] over leaf labels.
    pub fn from_labels(&mut self, labels: &[Label]) -> Result<NodeId, TreeError> {
        let leaves: Vec<_> = labels.iter().map(|l| self.leaf(l.clone())).collect();
        self.from_tuple(&leaves)
    }

    pub fn leaf_count(&self, id: NodeId) -> &BigUint {
        &self.leaves[id.index()]
    }

    pub fn depth(&self, id: NodeId) -> u32 {
        self.depth[id.index()]
    }

    /// Node ids reachable from `roots`, ascending (hence topologically sorted).
    pub fn reachable(&self, roots: &[NodeId]) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = roots.to_vec();
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.index()], true) {
                continue;
            }
            if let Node::Internal(l, r) = self.nodes[id.index()] {
                stack.push(l);
                stack.push(r);
            }
        }
        (0..self.nodes.len())
            .filter(|&i| seen[i])
            .map(|i| NodeId(i as u32))
            .collect()
    }

    pub fn dag_size(&self, root: NodeId) -> usize {
        self.reachable(&[root]).len()
    }

    pub fn stats(&self, root: NodeId) -> TreeStats {
        TreeStats {
            leaves: self.leaf_count(root).clone(),
            depth: self.depth(root),
            dag_nodes: self.dag_size(root),
        }
    }

    /// Replaces every leaf whose label is a key of `map` by the mapped node.
    /// Shared structure stays shared: each original node is rewritten once.
    pub fn substitute_many(&mut self, root: NodeId, map: &HashMap<Label, NodeId>) -> NodeId {
        let order = self.reachable(&[root]);
        let mut rewritten: HashMap<NodeId, NodeId> = HashMap::with_capacity(order.len());
        for id in order {
            let new = match self.nodes[id.index()].clone() {
                Node::Leaf(label) => map.get(&label).copied().unwrap_or(id),
                Node::Internal(l, r) => {
                    let (l2, r2) = (rewritten[&l], rewritten[&r]);
                    if (l2, r2) == (l, r) {
                        id
                    } else {
                        self.node(l2, r2)
                    }
                }
            };
            rewritten.insert(id, new);
        }
        rewritten[&root]
    }

    /// Replaces every leaf labeled `target` by `replacement`.
    pub fn substitute(&mut self, root: NodeId, target: &Label, replacement: NodeId) -> NodeId {
        let map = HashMap::from([(target.clone(), replacement)]);
        self.substitute_many(root, &map)
    }

    /// Rewrites every leaf label through `f`.
    pub fn relabel(&mut self, root: NodeId, mut f: impl FnMut(&Label) -> Label) -> NodeId {
        let order = self.reachable(&[root]);
        let mut map = HashMap::new();
        for id in &order {
            if let Node::Leaf(label) = &self.nodes[id.index()] {
                map.entry(label.clone()).or_insert_with(|| f(label));
            }
        }
        let map: HashMap<Label, NodeId> = map
            .into_iter()
            .map(|(from, to)| {
                let id = self.leaf(to);
                (from, id)
            })
            .collect();
        self.substitute_many(root, &map)
    }

    /// Snapshot of the tree rooted at `root`.
    pub fn extract(&self, root: NodeId) -> VotingTree {
        let mut nodes = Vec::new();
        let mut remap: HashMap<NodeId, u32> = HashMap::new();
        // Iterative left-first post-order, visiting each shared node once.
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if remap.contains_key(&id) {
                continue;
            }
            match &self.nodes[id.index()] {
                Node::Leaf(label) => {
                    remap.insert(id, nodes.len() as u32);
                    nodes.push(Node::Leaf(label.clone()));
                }
                &Node::Internal(l, r) => {
                    if expanded {
                        let node = Node::Internal(NodeId(remap[&l]), NodeId(remap[&r]));
                        remap.insert(id, nodes.len() as u32);
                        nodes.push(node);
                    } else {
                        stack.push((id, true));
                        stack.push((r, false));
                        stack.push((l, false));
                    }
                }
            }
        }
        VotingTree { nodes }
    }

    /// Copies a snapshot into this forest, returning its root.
    pub fn insert(&mut self, tree: &VotingTree) -> NodeId {
        let mut ids: Vec<NodeId> = Vec::with_capacity(tree.nodes.len());
        for node in &tree.nodes {
            let id = match node {
                Node::Leaf(label) => self.leaf(label.clone()),
                Node::Internal(l, r) => self.node(ids[l.index()], ids[r.index()]),
            };
            ids.push(id);
        }
        *ids.last().expect("trees are nonempty")
    }
}

/// Size report for a tree. Leaf counts are of the fully expanded tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeStats {
    #[serde(serialize_with = "serialize_decimal")]
    pub leaves: BigUint,
    pub depth: u32,
    pub dag_nodes: usize,
}

fn serialize_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

/// An immutable tree: reachable nodes in left-first post-order, root last.
/// Child references index into `nodes`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VotingTree {
    nodes: Vec<Node>,
}

impl VotingTree {
    pub fn leaf(label: Label) -> Self {
        Self {
            nodes: vec![Node::Leaf(label)],
        }
    }

    pub fn candidate(c: Candidate) -> Self {
        Self::leaf(Label::Candidate(c))
    }

    pub fn join(left: &VotingTree, right: &VotingTree) -> Self {
        let mut forest = Forest::new();
        let l = forest.insert(left);
        let r = forest.insert(right);
        let root = forest.node(l, r);
        forest.extract(root)
    }

    pub fn from_tuple(labels: &[Label]) -> Result<Self, TreeError> {
        let mut forest = Forest::new();
        let root = forest.from_labels(labels)?;
        Ok(forest.extract(root))
    }

    pub fn substitute(&self, target: &Label, replacement: &VotingTree) -> Self {
        let mut forest = Forest::new();
        let root = forest.insert(self);
        let with = forest.insert(replacement);
        let out = forest.substitute(root, target, with);
        forest.extract(out)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        self.nodes.last().expect("trees are nonempty")
    }

    pub fn dag_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Children of the root, if it is internal.
    pub fn children(&self) -> Option<(VotingTree, VotingTree)> {
        let mut forest = Forest::new();
        let root = forest.insert(self);
        match *forest.get(root) {
            Node::Leaf(_) => None,
            Node::Internal(l, r) => Some((forest.extract(l), forest.extract(r))),
        }
    }

    pub fn stats(&self) -> TreeStats {
        let mut leaves: Vec<BigUint> = Vec::with_capacity(self.nodes.len());
        let mut depth: Vec<u32> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            match node {
                Node::Leaf(_) => {
                    leaves.push(BigUint::from(1u32));
                    depth.push(0);
                }
                Node::Internal(l, r) => {
                    let sum = &leaves[l.index()] + &leaves[r.index()];
                    leaves.push(sum);
                    depth.push(1 + depth[l.index()].max(depth[r.index()]));
                }
            }
        }
        TreeStats {
            leaves: leaves.pop().expect("trees are nonempty"),
            depth: depth.pop().expect("trees are nonempty"),
            dag_nodes: self.nodes.len(),
        }
    }

    /// Distinct leaf labels, sorted.
    pub fn labels(&self) -> Vec<Label> {
        let mut labels: Vec<Label> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf(l) => Some(l.clone()),
                Node::Internal(..) => None,
            })
            .collect();
        labels.sort();
        labels.dedup();
        labels
    }

    /// Names of the variables appearing on leaves, sorted.
    pub fn variables(&self) -> Vec<String> {
        self.labels()
            .into_iter()
            .filter_map(|l| match l {
                Label::Variable(v) => Some(v.to_string()),
                Label::Candidate(_) => None,
            })
            .collect()
    }

    pub fn program(&self, bindings: &Bindings) -> Result<Program, TreeError> {
        let mut forest = Forest::new();
        let root = forest.insert(self);
        Program::new(&forest, &[root], bindings)
    }

    /// Winner of the tree on `tournament` with `bindings` applied.
    pub fn evaluate(
        &self,
        tournament: &Tournament,
        bindings: &Bindings,
    ) -> Result<Candidate, TreeError> {
        self.program(bindings)?.winner(tournament)
    }
}

/// A flattened, binding-resolved evaluator over one or more roots of a
/// forest. Every reachable node is evaluated exactly once per tournament,
/// which is the per-call memoization of shared subtrees.
#[derive(Clone, Debug)]
pub struct Program {
    leaf_values: Vec<u8>,
    ops: Vec<(u32, u32)>,
    roots: Vec<u32>,
    max_candidate: Candidate,
}

impl Program {
    pub fn new(forest: &Forest, roots: &[NodeId], bindings: &Bindings) -> Result<Self, TreeError> {
        let order = forest.reachable(roots);
        let mut slot: HashMap<NodeId, u32> = HashMap::with_capacity(order.len());
        let mut leaf_values = Vec::new();
        let mut max_candidate = 0;
        for &id in &order {
            if let Node::Leaf(label) = forest.get(id) {
                let c = match label {
                    Label::Candidate(c) => *c,
                    Label::Variable(v) => bindings
                        .get(v)
                        .ok_or_else(|| TreeError::Unbound(v.to_string()))?,
                };
                if c as usize >= MAX_VERTICES {
                    return Err(TreeError::OutOfRange {
                        candidate: c,
                        n: MAX_VERTICES,
                    });
                }
                max_candidate = max_candidate.max(c);
                slot.insert(id, leaf_values.len() as u32);
                leaf_values.push(c as u8);
            }
        }
        let mut ops = Vec::new();
        for &id in &order {
            if let Node::Internal(l, r) = *forest.get(id) {
                slot.insert(id, (leaf_values.len() + ops.len()) as u32);
                ops.push((slot[&l], slot[&r]));
            }
        }
        Ok(Self {
            roots: roots.iter().map(|r| slot[r]).collect(),
            leaf_values,
            ops,
            max_candidate,
        })
    }

    pub fn slots(&self) -> usize {
        self.leaf_values.len() + self.ops.len()
    }

    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    pub fn max_candidate(&self) -> Candidate {
        self.max_candidate
    }

    pub fn check(&self, tournament: &Tournament) -> Result<(), TreeError> {
        if (self.max_candidate as usize) < tournament.n() {
            Ok(())
        } else {
            Err(TreeError::OutOfRange {
                candidate: self.max_candidate,
                n: tournament.n(),
            })
        }
    }

    /// Evaluates every node into `scratch`. The caller must have run
    /// [`Program::check`] against a tournament of the same size.
    #[inline]
    pub fn run(&self, tournament: &Tournament, scratch: &mut Vec<u8>) {
        scratch.clear();
        scratch.extend_from_slice(&self.leaf_values);
        for &(a, b) in &self.ops {
            let left = scratch[a as usize];
            let right = scratch[b as usize];
            let winner = if tournament.row(left as usize) >> right & 1 == 1 {
                left
            } else {
                right
            };
            scratch.push(winner);
        }
    }

    /// Winner of root `k` after [`Program::run`].
    #[inline]
    pub fn root_winner(&self, scratch: &[u8], k: usize) -> Candidate {
        Candidate::from(scratch[self.roots[k] as usize])
    }

    /// Winner of the first root.
    pub fn winner(&self, tournament: &Tournament) -> Result<Candidate, TreeError> {
        self.check(tournament)?;
        let mut scratch = Vec::with_capacity(self.slots());
        self.run(tournament, &mut scratch);
        Ok(self.root_winner(&scratch, 0))
    }

    /// Winners of all roots.
    pub fn winners(&self, tournament: &Tournament) -> Result<Vec<Candidate>, TreeError> {
        self.check(tournament)?;
        let mut scratch = Vec::with_capacity(self.slots());
        self.run(tournament, &mut scratch);
        Ok((0..self.roots.len())
            .map(|k| self.root_winner(&scratch, k))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tournament::{Direction, ScaleGuard};

    /// Recursive evaluation of the fully expanded tree, no sharing.
    fn naive(forest: &Forest, id: NodeId, t: &Tournament, b: &Bindings) -> Candidate {
        match forest.get(id) {
            Node::Leaf(Label::Candidate(c)) => *c,
            Node::Leaf(Label::Variable(v)) => b.get(v).unwrap(),
            &Node::Internal(l, r) => {
                let i = naive(forest, l, t, b);
                let j = naive(forest, r, t, b);
                if i == j || t.beats(i, j).unwrap() {
                    i
                } else {
                    j
                }
            }
        }
    }

    #[test]
    fn hash_consing_shares_identity() {
        let mut f = Forest::new();
        let a = f.candidate(1);
        let b = f.candidate(2);
        let m1 = f.node(a, b);
        let m2 = f.node(a, b);
        assert_eq!(m1, m2);
        assert_eq!(f.len(), 3);
        assert_eq!(f.leaf_count(m1), &BigUint::from(2u32));
        let doubled = f.node(m1, m1);
        assert_eq!(f.leaf_count(doubled), &BigUint::from(4u32));
        assert_eq!(f.dag_size(doubled), 4);
    }

    #[test]
    fn match_on_clockwise() {
        let cw = Direction::Clockwise.tournament();
        let m12 = VotingTree::join(&VotingTree::candidate(1), &VotingTree::candidate(2));
        assert_eq!(m12.evaluate(&cw, &Bindings::new()).unwrap(), 1);
        let m21 = VotingTree::join(&VotingTree::candidate(2), &VotingTree::candidate(1));
        assert_eq!(m21.evaluate(&cw, &Bindings::new()).unwrap(), 1);
        for i in 0..3 {
            let mii = VotingTree::join(&VotingTree::candidate(i), &VotingTree::candidate(i));
            assert_eq!(mii.evaluate(&cw, &Bindings::new()).unwrap(), i);
        }
    }

    #[test]
    fn from_tuple_shapes() {
        let labels: Vec<Label> = (0..8).map(Label::Candidate).collect();
        let t = VotingTree::from_tuple(&labels).unwrap();
        let stats = t.stats();
        assert_eq!(stats.leaves, BigUint::from(8u32));
        assert_eq!(stats.depth, 3);
        assert_eq!(stats.dag_nodes, 15);

        let single = VotingTree::from_tuple(&[Label::var("x")]).unwrap();
        assert_eq!(single.stats().dag_nodes, 1);
        assert_eq!(single.stats().depth, 0);

        assert_eq!(
            VotingTree::from_tuple(&labels[..6]),
            Err(TreeError::NotPowerOfTwo(6))
        );
        assert_eq!(VotingTree::from_tuple(&[]), Err(TreeError::Empty));
    }

    #[test]
    fn evaluation_errors() {
        let mut f = Forest::new();
        let x = f.variable("X");
        let five = f.candidate(5);
        let root = f.node(x, five);
        let tree = f.extract(root);
        let t = Tournament::from_index(6, 0).unwrap();
        assert_eq!(
            tree.evaluate(&t, &Bindings::new()),
            Err(TreeError::Unbound("X".into()))
        );
        let cw = Direction::Clockwise.tournament();
        assert!(matches!(
            tree.evaluate(&cw, &Bindings::new().with("X", 0)),
            Err(TreeError::OutOfRange { candidate: 5, n: 3 })
        ));
        assert!(tree.evaluate(&t, &Bindings::new().with("X", 0)).is_ok());
    }

    #[test]
    fn substitution_examples() {
        let mut f = Forest::new();
        let x = f.variable("X");
        let zero = f.candidate(0);
        let two = f.candidate(2);
        let m = f.node(x, zero);
        let out = f.substitute(m, &Label::var("X"), two);
        assert_eq!(out, f.node(two, zero));

        // Absent target is the identity.
        assert_eq!(f.substitute(m, &Label::var("Q"), two), m);

        // Leaf count: L - k + k * leaf_count(r).
        let xx = f.node(x, x);
        let t = f.node(xx, zero);
        let r = f.node(two, zero);
        let r = f.node(r, zero);
        let s = f.substitute(t, &Label::var("X"), r);
        assert_eq!(f.leaf_count(s), &BigUint::from(3u32 - 2 + 2 * 3));
        assert_eq!(f.dag_size(s), f.dag_size(r) + 2);
    }

    #[test]
    fn relabel_maps_every_leaf() {
        let mut f = Forest::new();
        let t = f.from_labels(&[0u32.into(), 1u32.into(), 0u32.into(), 1u32.into()]).unwrap();
        let shifted = f.relabel(t, |l| match l {
            Label::Candidate(c) => Label::Candidate(c + 3),
            other => other.clone(),
        });
        assert_eq!(
            f.extract(shifted).labels(),
            vec![Label::Candidate(3), Label::Candidate(4)]
        );
    }

    #[test]
    fn extract_insert_round_trip() {
        let mut f = Forest::new();
        let t = f.from_labels(&[0u32.into(), 1u32.into(), 2u32.into(), 0u32.into()]).unwrap();
        let x = f.variable("X");
        let root = f.node(t, x);
        let root = f.node(root, t);
        let snap = f.extract(root);
        let mut g = Forest::new();
        let again = g.insert(&snap);
        assert_eq!(g.extract(again), snap);
        assert_eq!(snap.stats(), f.stats(root));
        let (l, r) = snap.children().unwrap();
        assert_eq!(r, f.extract(t));
        let Node::Internal(fl, _) = *f.get(root) else {
            unreachable!()
        };
        assert_eq!(l, f.extract(fl));
    }

    /// Every tree shape with `leaves` leaves over the given label alphabet.
    fn all_trees(f: &mut Forest, leaves: usize, alphabet: &[Candidate]) -> Vec<NodeId> {
        if leaves == 1 {
            return alphabet.iter().map(|&c| f.candidate(c)).collect();
        }
        let mut out = Vec::new();
        for k in 1..leaves {
            let lefts = all_trees(f, k, alphabet);
            let rights = all_trees(f, leaves - k, alphabet);
            for &l in &lefts {
                for &r in &rights {
                    out.push(f.node(l, r));
                }
            }
        }
        out
    }

    #[test]
    fn memoized_matches_naive_on_small_trees() {
        // All shapes up to 4 leaves over 3 labels, plus a sample of larger
        // shared trees, against every tournament on 3 and 4 vertices.
        for n in [3usize, 4] {
            let alphabet: Vec<Candidate> = (0..n as Candidate).collect();
            let mut f = Forest::new();
            let mut roots = Vec::new();
            for leaves in 1..=4 {
                roots.extend(all_trees(&mut f, leaves, &alphabet[..3]));
            }
            // Larger trees with up to 8 leaves built from shared pieces.
            let small = roots.clone();
            for (k, &a) in small.iter().enumerate().step_by(7) {
                let b = small[(k * 13 + 5) % small.len()];
                roots.push(f.node(a, b));
            }
            let program = Program::new(&f, &roots, &Bindings::new()).unwrap();
            let mut range = crate::tournament::enumerate_tournaments(n, ScaleGuard::default())
                .unwrap();
            let mut scratch = Vec::new();
            while let Some((_, t)) = range.advance() {
                program.run(t, &mut scratch);
                for (k, &root) in roots.iter().enumerate() {
                    let w = program.root_winner(&scratch, k);
                    assert_eq!(w, naive(&f, root, t, &Bindings::new()));
                    let labels = f.extract(root).labels();
                    assert!(labels.contains(&Label::Candidate(w)));
                }
            }
        }
    }
}
