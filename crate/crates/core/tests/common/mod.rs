//! Reference implementations used as test oracles. Nothing here calls the
//! library's evaluator, enumerators or field arithmetic.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use ballotree::tree::{Label, Node};
use ballotree::VotingTree;

/// Adjacency matrix from a canonical bitstring: pairs (u, v), u < v, in
/// lexicographic order; `1` means u beats v.
pub fn beats_matrix(n: usize, bits: &str) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    let mut chars = bits.chars();
    for u in 0..n {
        m[u][u] = true;
        for v in u + 1..n {
            let b = chars.next().expect("bitstring too short") == '1';
            m[u][v] = b;
            m[v][u] = !b;
        }
    }
    assert!(chars.next().is_none(), "bitstring too long");
    m
}

/// Bitstring of the `index`-th tournament, first pair most significant.
pub fn bitstring(n: usize, index: u64) -> String {
    let m = n * (n - 1) / 2;
    (0..m)
        .map(|p| if index >> (m - 1 - p) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn out_degree(m: &[Vec<bool>], v: usize) -> usize {
    (0..m.len()).filter(|&u| u != v && m[v][u]).count()
}

/// Bottom-up evaluation over the snapshot's node list.
pub fn eval(tree: &VotingTree, m: &[Vec<bool>], vars: &HashMap<&str, u32>) -> u32 {
    let mut w: Vec<u32> = Vec::with_capacity(tree.nodes().len());
    for node in tree.nodes() {
        let v = match node {
            Node::Leaf(Label::Candidate(c)) => *c,
            Node::Leaf(Label::Variable(name)) => vars[&**name],
            Node::Internal(a, b) => {
                let (x, y) = (w[a.index()], w[b.index()]);
                if x == y || m[x as usize][y as usize] {
                    x
                } else {
                    y
                }
            }
        };
        w.push(v);
    }
    *w.last().unwrap()
}

/// Clockwise: 0 -> 1 -> 2 -> 0.
pub fn cycle(clockwise: bool) -> Vec<Vec<bool>> {
    beats_matrix(3, if clockwise { "101" } else { "010" })
}

/// Perfect manipulator test: B = out-neighbours, C = in-neighbours of
/// alpha, both nonempty, every B member beats every C member.
pub fn pm_classes(m: &[Vec<bool>], alpha: usize) -> Option<Vec<char>> {
    let n = m.len();
    let class: Vec<char> = (0..n)
        .map(|v| if v == alpha { 'A' } else if m[alpha][v] { 'B' } else { 'C' })
        .collect();
    let b: Vec<usize> = (0..n).filter(|&v| class[v] == 'B').collect();
    let c: Vec<usize> = (0..n).filter(|&v| class[v] == 'C').collect();
    if b.is_empty() || c.is_empty() {
        return None;
    }
    b.iter()
        .all(|&x| c.iter().all(|&y| m[x][y]))
        .then_some(class)
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// n * sum_b C(n-1, b) 2^(C(b,2) + C(n-1-b,2)), over nonempty B and C.
pub fn pm_closed_form(n: u128) -> u128 {
    (1..n - 1)
        .map(|b| binomial(n - 1, b) << (binomial(b, 2) + binomial(n - 1 - b, 2)))
        .sum::<u128>()
        * n
}

pub fn f3_add(a: u8, b: u8) -> u8 {
    (a + b) % 3
}

pub fn f3_mul(a: u8, b: u8) -> u8 {
    (a * b) % 3
}

pub fn f3_neg(a: u8) -> u8 {
    (3 - a) % 3
}

/// Random polynomial as source text, with its value function.
pub enum Expr {
    Const(u8),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Sq(Box<Expr>),
}

pub const NAMES: [&str; 3] = ["x", "y", "z"];

impl Expr {
    pub fn random(rng: &mut impl rand::Rng, depth: usize, vars: usize) -> Expr {
        if depth == 0 || rng.gen_bool(0.3) {
            return if rng.gen_bool(0.7) {
                Expr::Var(rng.gen_range(0..vars))
            } else {
                Expr::Const(rng.gen_range(0..3))
            };
        }
        let op = rng.gen_range(0..4);
        let mut sub = || Box::new(Expr::random(rng, depth - 1, vars));
        match op {
            0 => Expr::Neg(sub()),
            1 => Expr::Add(sub(), sub()),
            2 => Expr::Mul(sub(), sub()),
            _ => Expr::Sq(sub()),
        }
    }

    pub fn text(&self) -> String {
        match self {
            Expr::Const(c) => c.to_string(),
            Expr::Var(i) => NAMES[*i].to_string(),
            Expr::Neg(a) => format!("-({})", a.text()),
            Expr::Add(a, b) => format!("({}) + ({})", a.text(), b.text()),
            Expr::Mul(a, b) => format!("({}) * ({})", a.text(), b.text()),
            Expr::Sq(a) => format!("({})^2", a.text()),
        }
    }

    pub fn value(&self, env: &[u8]) -> u8 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => env[*i],
            Expr::Neg(a) => f3_neg(a.value(env)),
            Expr::Add(a, b) => f3_add(a.value(env), b.value(env)),
            Expr::Mul(a, b) => f3_mul(a.value(env), b.value(env)),
            Expr::Sq(a) => {
                let v = a.value(env);
                f3_mul(v, v)
            }
        }
    }
}
