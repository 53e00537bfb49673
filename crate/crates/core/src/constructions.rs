//! Named voting-tree constructions.
//!
//! * [`lambda_against`]: one challenger matched against each member of a set,
//!   with the pair results merged by an arbitrary binary tree.
//! * [`baseline`]: the complete tree over the identity permutation.
//! * [`omega`]: the recursive family whose winner always has out-degree at
//!   least `k` on `k(k+1)/2 + 1` candidates.
//! * [`phi_tree`], [`lambda_full`], [`lambda_sq`], [`psi`], [`psi_virtual`]: the gadgets
//!   for perfect manipulator tournaments.
//!
//! Every builder works inside a caller-supplied [`Forest`] so results can be
//! combined and evaluated together; `*_tree` wrappers return snapshots.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::tournament::Candidate;
use crate::tree::{Forest, Label, NodeId, TreeError, VotingTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("challenger {0} must not appear among its opponents")]
    ChallengerInSet(Label),
    #[error("the opponent set is empty")]
    EmptySet,
    #[error("{what} needs {requirement}, got n={n}")]
    Shape {
        what: &'static str,
        requirement: &'static str,
        n: usize,
    },
    #[error("shuffle index {i} out of range 1..={n}")]
    PhiIndex { i: usize, n: usize },
    #[error("guarantee level must be at least 1")]
    ZeroLevel,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// How the pair results of a [`lambda_against`] tree are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShapePolicy {
    /// Heap-shaped complete tree, bottom level filled from the left.
    #[default]
    LeftComplete,
    /// Left-deep chain: `(((p0 p1) p2) p3)`.
    Caterpillar,
    /// Random leaf order and random merges, reproducible from the seed.
    Random(u64),
}

/// Merges `items` into a single tree according to `shape`.
pub fn combine(forest: &mut Forest, items: &[NodeId], shape: ShapePolicy) -> NodeId {
    assert!(!items.is_empty(), "combine needs at least one subtree");
    match shape {
        ShapePolicy::LeftComplete => left_complete(forest, items),
        ShapePolicy::Caterpillar => items[1..]
            .iter()
            .fold(items[0], |acc, &next| forest.node(acc, next)),
        ShapePolicy::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pool = items.to_vec();
            pool.shuffle(&mut rng);
            while pool.len() > 1 {
                let k = rng.gen_range(0..pool.len() - 1);
                let right = pool.remove(k + 1);
                pool[k] = forest.node(pool[k], right);
            }
            pool[0]
        }
    }
}

fn left_complete(forest: &mut Forest, items: &[NodeId]) -> NodeId {
    let count = items.len();
    // Heap positions 1..2N; leaves live at N..2N. Items are placed on the
    // leaf positions in left-to-right (in-order) order.
    let mut leaf_order = Vec::with_capacity(count);
    let mut stack = Vec::new();
    let mut pos = 1usize;
    loop {
        while pos < count {
            stack.push(pos);
            pos *= 2;
        }
        if pos < 2 * count {
            leaf_order.push(pos);
        }
        match stack.pop() {
            Some(parent) => pos = 2 * parent + 1,
            None => break,
        }
    }
    let mut heap: Vec<Option<NodeId>> = vec![None; 2 * count];
    for (&slot, &item) in leaf_order.iter().zip(items) {
        heap[slot] = Some(item);
    }
    for p in (1..count).rev() {
        let (l, r) = (heap[2 * p].expect("child"), heap[2 * p + 1].expect("child"));
        heap[p] = Some(forest.node(l, r));
    }
    heap[1].expect("root")
}

/// Matches `challenger` against each opponent (challenger on the left) and
/// merges the pair results by `shape`.
pub fn lambda_against_nodes(
    forest: &mut Forest,
    challenger: NodeId,
    opponents: &[NodeId],
    shape: ShapePolicy,
) -> Result<NodeId, BuildError> {
    if opponents.is_empty() {
        return Err(BuildError::EmptySet);
    }
    let pairs: Vec<NodeId> = opponents
        .iter()
        .map(|&s| forest.node(challenger, s))
        .collect();
    Ok(combine(forest, &pairs, shape))
}

/// The one-against-set tree for a challenger label and opponent labels.
pub fn lambda_against(
    forest: &mut Forest,
    challenger: &Label,
    opponents: &[Label],
    shape: ShapePolicy,
) -> Result<NodeId, BuildError> {
    if opponents.contains(challenger) {
        return Err(BuildError::ChallengerInSet(challenger.clone()));
    }
    let i = forest.leaf(challenger.clone());
    let others: Vec<NodeId> = opponents.iter().map(|s| forest.leaf(s.clone())).collect();
    lambda_against_nodes(forest, i, &others, shape)
}

/// Complete tree over `0..n` in order; `n` must be a power of two.
pub fn baseline(forest: &mut Forest, n: usize) -> Result<NodeId, BuildError> {
    if !n.is_power_of_two() {
        return Err(BuildError::Shape {
            what: "baseline",
            requirement: "a power of two",
            n,
        });
    }
    let labels: Vec<Label> = (0..n as Candidate).map(Label::Candidate).collect();
    Ok(forest.from_labels(&labels)?)
}

/// Candidate count of the level-`k` tree: `k(k+1)/2 + 1`.
pub const fn omega_candidates(k: usize) -> usize {
    k * (k + 1) / 2 + 1
}

/// Expanded leaf count of the level-`k` tree from the recurrence
/// `L(1) = 2`, `L(k+1) = C(n_k + k, n_k) * (1 + L(k))`.
pub fn omega_leaf_count(k: usize) -> num_bigint::BigUint {
    use num_bigint::BigUint;
    let mut leaves = BigUint::from(2u32);
    for level in 1..k.max(1) {
        let n = omega_candidates(level);
        leaves = binomial(n + level, n) * (leaves + 1u32);
    }
    leaves
}

fn binomial(n: usize, k: usize) -> num_bigint::BigUint {
    let mut acc = num_bigint::BigUint::from(1u32);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Level-`k` guarantee tree on candidates `0..k(k+1)/2 + 1`.
///
/// Level 1 is the match `(0 1)`. Level `k+1` on `{0, .., n+k}` matches 0
/// against one copy of the level-`k` tree per `n`-subset of `{1, .., n+k}`
/// (lexicographic subset order), each copy relabeled order-preservingly onto
/// its subset; the pair results are merged left-complete.
pub fn omega(forest: &mut Forest, k: usize) -> Result<NodeId, BuildError> {
    if k == 0 {
        return Err(BuildError::ZeroLevel);
    }
    let all: Vec<Candidate> = (0..omega_candidates(k) as Candidate).collect();
    let mut memo = HashMap::new();
    Ok(omega_on(forest, k, &all, &mut memo))
}

// Relabeling a level-k tree onto a sorted set S order-preservingly is the
// same as building it directly on S, which lets copies on equal subsets
// share one node.
fn omega_on(
    forest: &mut Forest,
    k: usize,
    set: &[Candidate],
    memo: &mut HashMap<(usize, Vec<Candidate>), NodeId>,
) -> NodeId {
    debug_assert_eq!(set.len(), omega_candidates(k));
    if let Some(&id) = memo.get(&(k, set.to_vec())) {
        return id;
    }
    let id = if k == 1 {
        let a = forest.candidate(set[0]);
        let b = forest.candidate(set[1]);
        forest.node(a, b)
    } else {
        let sub = omega_candidates(k - 1);
        let head = forest.candidate(set[0]);
        let pairs: Vec<NodeId> = subsets(&set[1..], sub)
            .into_iter()
            .map(|s| {
                let inner = omega_on(forest, k - 1, &s, memo);
                forest.node(head, inner)
            })
            .collect();
        combine(forest, &pairs, ShapePolicy::LeftComplete)
    };
    memo.insert((k, set.to_vec()), id);
    id
}

/// Guarantee tree for an arbitrary candidate count: the largest level whose
/// candidate count fits in `n`. Returns the tree and its level.
pub fn omega_for_candidates(forest: &mut Forest, n: usize) -> Result<(NodeId, usize), BuildError> {
    if n < 2 {
        return Err(BuildError::Shape {
            what: "omega",
            requirement: "at least 2 candidates",
            n,
        });
    }
    let mut k = 1;
    while omega_candidates(k + 1) <= n {
        k += 1;
    }
    Ok((omega(forest, k)?, k))
}

/// All `size`-subsets of `items` in lexicographic order.
pub fn subsets<T: Copy>(items: &[T], size: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    if size > items.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(pos) = (0..size).rev().find(|&p| idx[p] != p + items.len() - size) else {
            return out;
        };
        idx[pos] += 1;
        for q in pos + 1..size {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Perfect-shuffle permutation on `1..=n` (1-indexed, `n` even).
pub fn phi_perm(n: usize, i: usize) -> Result<usize, BuildError> {
    if n == 0 || n % 2 == 1 {
        return Err(BuildError::Shape {
            what: "shuffle permutation",
            requirement: "an even n",
            n,
        });
    }
    if !(1..=n).contains(&i) {
        return Err(BuildError::PhiIndex { i, n });
    }
    Ok(if i % 2 == 1 { i.div_ceil(2) } else { n / 2 + i / 2 })
}

/// Complete tree over `(1, .., n, phi(1), .., phi(n))`, shifted to 0-indexed labels.
pub fn phi_tree(forest: &mut Forest, n: usize) -> Result<NodeId, BuildError> {
    if n < 4 || !n.is_power_of_two() {
        return Err(BuildError::Shape {
            what: "shuffle tree",
            requirement: "a power of two >= 4",
            n,
        });
    }
    let mut labels: Vec<Label> = (0..n as Candidate).map(Label::Candidate).collect();
    for i in 1..=n {
        labels.push(Label::Candidate((phi_perm(n, i)? - 1) as Candidate));
    }
    Ok(forest.from_labels(&labels)?)
}

fn need_three(what: &'static str, n: usize, i: Candidate) -> Result<(), BuildError> {
    if n < 3 {
        return Err(BuildError::Shape {
            what,
            requirement: "n >= 3",
            n,
        });
    }
    if i as usize >= n {
        return Err(BuildError::Tree(TreeError::OutOfRange { candidate: i, n }));
    }
    Ok(())
}

/// `i` against every other candidate of `0..n`, in increasing order.
pub fn lambda_full(forest: &mut Forest, n: usize, i: Candidate) -> Result<NodeId, BuildError> {
    need_three("one-against-all tree", n, i)?;
    let others: Vec<Label> = (0..n as Candidate)
        .filter(|&m| m != i)
        .map(Label::Candidate)
        .collect();
    lambda_against(forest, &Label::Candidate(i), &others, ShapePolicy::LeftComplete)
}

/// The one-against-all tree for `i` with every leaf labeled `m` replaced by
/// the one-against-all tree for `m`.
pub fn lambda_sq(forest: &mut Forest, n: usize, i: Candidate) -> Result<NodeId, BuildError> {
    need_three("squared one-against-all tree", n, i)?;
    let outer = lambda_full(forest, n, i)?;
    let mut map = HashMap::new();
    for m in 0..n as Candidate {
        map.insert(Label::Candidate(m), lambda_full(forest, n, m)?);
    }
    Ok(forest.substitute_many(outer, &map))
}

/// The squared one-against-all tree for `j` with every leaf labeled `j`
/// replaced by the shuffle tree.
pub fn psi(forest: &mut Forest, n: usize, j: Candidate) -> Result<NodeId, BuildError> {
    if n < 4 || !n.is_power_of_two() {
        return Err(BuildError::Shape {
            what: "anti-manipulator tree",
            requirement: "a power of two >= 4",
            n,
        });
    }
    let squared = lambda_sq(forest, n, j)?;
    let shuffle = phi_tree(forest, n)?;
    Ok(forest.substitute(squared, &Label::Candidate(j), shuffle))
}

/// Anti-manipulator variant that treats the shuffle tree as a virtual
/// challenger: the one-against-set tree of the shuffle tree against every
/// candidate, itself played against the one-against-all trees of every
/// candidate. Unlike [`psi`], no candidate is removed from an opponent set.
pub fn psi_virtual(forest: &mut Forest, n: usize) -> Result<NodeId, BuildError> {
    if n < 4 || !n.is_power_of_two() {
        return Err(BuildError::Shape {
            what: "anti-manipulator tree",
            requirement: "a power of two >= 4",
            n,
        });
    }
    let shuffle = phi_tree(forest, n)?;
    let everyone: Vec<NodeId> = (0..n as Candidate).map(|m| forest.candidate(m)).collect();
    let inner = lambda_against_nodes(forest, shuffle, &everyone, ShapePolicy::LeftComplete)?;
    let rotated = (0..n as Candidate)
        .map(|m| lambda_full(forest, n, m))
        .collect::<Result<Vec<_>, _>>()?;
    lambda_against_nodes(forest, inner, &rotated, ShapePolicy::LeftComplete)
}

/// Snapshot helper: runs a builder in a fresh forest.
pub fn build(
    f: impl FnOnce(&mut Forest) -> Result<NodeId, BuildError>,
) -> Result<VotingTree, BuildError> {
    let mut forest = Forest::new();
    let root = f(&mut forest)?;
    Ok(forest.extract(root))
}
