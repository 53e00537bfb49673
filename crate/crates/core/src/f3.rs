//! Arithmetic over GF(3) with voting trees.
//!
//! Vertices 0, 1, 2 of a non-transitive 3-tournament double as field
//! elements. On the clockwise tournament (0 -> 1 -> 2 -> 0) the vertex that
//! beats `x` is `x - 1`; on the counterclockwise one it is `x + 1`. The
//! gates below combine that single asymmetric primitive into trees whose
//! winner is the same field value on both tournaments.
//!
//! Gates take their inputs as forest nodes, which is the same as building
//! the gate over variable leaves and substituting the inputs for them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use thiserror::Error;

use crate::constructions::{lambda_against_nodes, ShapePolicy};
use crate::tournament::{Candidate, Direction};
use crate::tree::{Bindings, Forest, NodeId, TreeError, VotingTree};

/// An element of GF(3).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct F3(u8);

impl F3 {
    pub const ZERO: F3 = F3(0);
    pub const ONE: F3 = F3(1);
    pub const TWO: F3 = F3(2);
    pub const ALL: [F3; 3] = [F3(0), F3(1), F3(2)];

    pub fn new(v: u32) -> Self {
        F3((v % 3) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn square(self) -> F3 {
        self * self
    }

    /// As a tournament vertex.
    pub fn candidate(self) -> Candidate {
        Candidate::from(self.0)
    }
}

impl Add for F3 {
    type Output = F3;
    fn add(self, rhs: F3) -> F3 {
        F3((self.0 + rhs.0) % 3)
    }
}

impl Sub for F3 {
    type Output = F3;
    fn sub(self, rhs: F3) -> F3 {
        self + -rhs
    }
}

impl Neg for F3 {
    type Output = F3;
    fn neg(self) -> F3 {
        F3((3 - self.0) % 3)
    }
}

impl Mul for F3 {
    type Output = F3;
    fn mul(self, rhs: F3) -> F3 {
        F3((self.0 * rhs.0) % 3)
    }
}

impl fmt::Display for F3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn constant(forest: &mut Forest, v: u32) -> NodeId {
    forest.candidate(v)
}

/// Winner is the unique vertex beating the input: the input matched
/// against each of 0, 1, 2, pair results merged left-complete.
pub fn yield_gate(forest: &mut Forest, x: NodeId) -> NodeId {
    let consts: Vec<NodeId> = (0..3).map(|v| constant(forest, v)).collect();
    lambda_against_nodes(forest, x, &consts, ShapePolicy::LeftComplete)
        .expect("three opponents")
}

/// Match between the yields of the two inputs; computes `-x - y` when the
/// inputs differ.
pub fn pair_gate(forest: &mut Forest, x: NodeId, y: NodeId) -> NodeId {
    let yx = yield_gate(forest, x);
    let yy = yield_gate(forest, y);
    forest.node(yx, yy)
}

/// `-x - y`: two pair gates on `(x, G(x, y))` and `(G(x, y), y)` feeding a
/// final pair gate.
pub fn neg_sum(forest: &mut Forest, x: NodeId, y: NodeId) -> NodeId {
    let first = pair_gate(forest, x, y);
    let upper = pair_gate(forest, x, first);
    let lower = pair_gate(forest, first, y);
    pair_gate(forest, upper, lower)
}

pub fn negate(forest: &mut Forest, x: NodeId) -> NodeId {
    let zero = constant(forest, 0);
    neg_sum(forest, x, zero)
}

pub fn add(forest: &mut Forest, x: NodeId, y: NodeId) -> NodeId {
    let s = neg_sum(forest, x, y);
    negate(forest, s)
}

/// Separates 0 from {1, 2}: clockwise `0, 1, 2 -> 0, 2, 2`,
/// counterclockwise `0, 1, 2 -> 2, 1, 1`.
pub fn square_first_half(forest: &mut Forest, x: NodeId) -> NodeId {
    let one = constant(forest, 1);
    let two = constant(forest, 2);
    let top = forest.node(x, one);
    let top = forest.node(top, two);
    let top = yield_gate(forest, top);
    let top = yield_gate(forest, top);
    let bottom = forest.node(x, two);
    let bottom = forest.node(bottom, one);
    let bottom = yield_gate(forest, bottom);
    forest.node(top, bottom)
}

/// `1 - yield(yield(y))`.
pub fn square_second_half(forest: &mut Forest, y: NodeId) -> NodeId {
    let once = yield_gate(forest, y);
    let twice = yield_gate(forest, once);
    let negated = negate(forest, twice);
    let one = constant(forest, 1);
    add(forest, one, negated)
}

pub fn square(forest: &mut Forest, x: NodeId) -> NodeId {
    let half = square_first_half(forest, x);
    square_second_half(forest, half)
}

/// `x^2 + (y^2 - (x + y)^2)`, which is `-2xy = xy` in GF(3).
pub fn multiply(forest: &mut Forest, x: NodeId, y: NodeId) -> NodeId {
    let xx = square(forest, x);
    let yy = square(forest, y);
    let sum = add(forest, x, y);
    let sum_sq = square(forest, sum);
    let minus = negate(forest, sum_sq);
    let rest = add(forest, yy, minus);
    add(forest, xx, rest)
}

/// The gate library, for tables and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Yield,
    Pair,
    NegSum,
    Negate,
    Add,
    SquareFirstHalf,
    SquareSecondHalf,
    Square,
    Multiply,
}

impl Gate {
    pub const ALL: [Gate; 9] = [
        Gate::Yield,
        Gate::Pair,
        Gate::NegSum,
        Gate::Negate,
        Gate::Add,
        Gate::SquareFirstHalf,
        Gate::SquareSecondHalf,
        Gate::Square,
        Gate::Multiply,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Gate::Yield => "yield",
            Gate::Pair => "pair",
            Gate::NegSum => "neg_sum",
            Gate::Negate => "negate",
            Gate::Add => "add",
            Gate::SquareFirstHalf => "square_first_half",
            Gate::SquareSecondHalf => "square_second_half",
            Gate::Square => "square",
            Gate::Multiply => "multiply",
        }
    }

    pub fn from_name(name: &str) -> Option<Gate> {
        Gate::ALL.into_iter().find(|g| g.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Gate::Pair | Gate::NegSum | Gate::Add | Gate::Multiply => 2,
            _ => 1,
        }
    }

    /// Input variable names, in order.
    pub fn inputs(self) -> &'static [&'static str] {
        if self.arity() == 2 {
            &["X", "Y"]
        } else {
            &["X"]
        }
    }

    /// Builds the gate over variable leaves `X` (and `Y`).
    pub fn build(self, forest: &mut Forest) -> NodeId {
        let x = forest.variable("X");
        let y = forest.variable("Y");
        match self {
            Gate::Yield => yield_gate(forest, x),
            Gate::Pair => pair_gate(forest, x, y),
            Gate::NegSum => neg_sum(forest, x, y),
            Gate::Negate => negate(forest, x),
            Gate::Add => add(forest, x, y),
            Gate::SquareFirstHalf => square_first_half(forest, x),
            Gate::SquareSecondHalf => square_second_half(forest, x),
            Gate::Square => square(forest, x),
            Gate::Multiply => multiply(forest, x, y),
        }
    }

    pub fn tree(self) -> VotingTree {
        let mut forest = Forest::new();
        let root = self.build(&mut forest);
        forest.extract(root)
    }
}

/// Evaluates a tree on the tournament of `direction`.
pub fn eval_f3(
    tree: &VotingTree,
    direction: Direction,
    assignment: &Bindings,
) -> Result<F3, TreeError> {
    let winner = tree.evaluate(&direction.tournament(), assignment)?;
    Ok(F3::new(winner))
}

/// Polynomial expressions over GF(3).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum GateExpr {
    Const(F3),
    Var(String),
    Neg(Box<GateExpr>),
    Add(Box<GateExpr>, Box<GateExpr>),
    Mul(Box<GateExpr>, Box<GateExpr>),
    Square(Box<GateExpr>),
}

impl GateExpr {
    pub fn var(name: &str) -> Self {
        GateExpr::Var(name.to_string())
    }

    pub fn constant(v: u32) -> Self {
        GateExpr::Const(F3::new(v))
    }

    pub fn negation(e: GateExpr) -> Self {
        GateExpr::Neg(Box::new(e))
    }

    pub fn sum(a: GateExpr, b: GateExpr) -> Self {
        GateExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn product(a: GateExpr, b: GateExpr) -> Self {
        GateExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn square(e: GateExpr) -> Self {
        GateExpr::Square(Box::new(e))
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            GateExpr::Const(_) => {}
            GateExpr::Var(v) => {
                out.insert(v.clone());
            }
            GateExpr::Neg(e) | GateExpr::Square(e) => e.collect_vars(out),
            GateExpr::Add(a, b) | GateExpr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            GateExpr::Const(_) | GateExpr::Var(_) => 0,
            GateExpr::Neg(e) | GateExpr::Square(e) => 1 + e.depth(),
            GateExpr::Add(a, b) | GateExpr::Mul(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Direct field arithmetic; `None` if a variable is unassigned.
    pub fn eval(&self, assignment: &HashMap<String, F3>) -> Option<F3> {
        Some(match self {
            GateExpr::Const(c) => *c,
            GateExpr::Var(v) => *assignment.get(v)?,
            GateExpr::Neg(e) => -e.eval(assignment)?,
            GateExpr::Add(a, b) => a.eval(assignment)? + b.eval(assignment)?,
            GateExpr::Mul(a, b) => a.eval(assignment)? * b.eval(assignment)?,
            GateExpr::Square(e) => e.eval(assignment)?.square(),
        })
    }
}

impl fmt::Display for GateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateExpr::Const(c) => write!(f, "{c}"),
            GateExpr::Var(v) => f.write_str(v),
            GateExpr::Neg(e) => write!(f, "-({e})"),
            GateExpr::Add(a, b) => write!(f, "({a} + {b})"),
            GateExpr::Mul(a, b) => write!(f, "({a} * {b})"),
            GateExpr::Square(e) => write!(f, "({e})^2"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable name {0:?} is not an identifier")]
    BadVariable(String),
}

impl CompileError {
    /// The offending line with a caret under the error column.
    pub fn annotate(&self, source: &str) -> String {
        match self {
            CompileError::Syntax { column, message } => {
                format!("{source}\n{:>width$}\nerror: {message}", "^", width = *column)
            }
            other => other.to_string(),
        }
    }
}

/// Parses infix GF(3) expressions: `+`, binary and unary `-`, `*`, `^2`,
/// parentheses, identifiers, constants 0/1/2.
pub fn parse_expr(source: &str) -> Result<GateExpr, CompileError> {
    let mut p = ExprParser {
        src: source.as_bytes(),
        pos: 0,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected input after expression"));
    }
    Ok(e)
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, message: &str) -> CompileError {
        CompileError::Syntax {
            column: self.pos + 1,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<GateExpr, CompileError> {
        let mut acc = self.product()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if op == b'+' {
                GateExpr::sum(acc, rhs)
            } else {
                GateExpr::sum(acc, GateExpr::negation(rhs))
            };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<GateExpr, CompileError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = GateExpr::product(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<GateExpr, CompileError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(GateExpr::negation(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<GateExpr, CompileError> {
        let mut base = self.atom()?;
        while self.peek() == Some(b'^') {
            self.pos += 1;
            if self.peek() != Some(b'2') {
                return Err(self.error("only the exponent 2 is supported"));
            }
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(c) if c.is_ascii_alphanumeric()) {
                return Err(self.error("only the exponent 2 is supported"));
            }
            base = GateExpr::square(base);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<GateExpr, CompileError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                match &self.src[start..self.pos] {
                    b"0" => Ok(GateExpr::constant(0)),
                    b"1" => Ok(GateExpr::constant(1)),
                    b"2" => Ok(GateExpr::constant(2)),
                    _ => {
                        self.pos = start;
                        Err(self.error("constants must be 0, 1 or 2"))
                    }
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_alphanumeric() || *c == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                Ok(GateExpr::var(name))
            }
            Some(_) => Err(self.error("expected a constant, variable or '('")),
            None => Err(self.error("unexpected end of expression")),
        }
    }
}

/// Lowers an expression through the gate constructors. Equal
/// sub-expressions compile to the same node.
pub fn compile_into(
    forest: &mut Forest,
    expr: &GateExpr,
    declared: &[&str],
) -> Result<NodeId, CompileError> {
    for name in declared {
        if !crate::tree::Label::is_identifier(name) {
            return Err(CompileError::BadVariable(name.to_string()));
        }
    }
    let mut memo = HashMap::new();
    lower(forest, expr, declared, &mut memo)
}

fn lower(
    forest: &mut Forest,
    expr: &GateExpr,
    declared: &[&str],
    memo: &mut HashMap<GateExpr, NodeId>,
) -> Result<NodeId, CompileError> {
    if let Some(&id) = memo.get(expr) {
        return Ok(id);
    }
    let id = match expr {
        GateExpr::Const(c) => forest.candidate(c.candidate()),
        GateExpr::Var(v) => {
            if !declared.contains(&v.as_str()) {
                return Err(CompileError::UnknownVariable(v.clone()));
            }
            forest.variable(v)
        }
        GateExpr::Neg(e) => {
            let inner = lower(forest, e, declared, memo)?;
            negate(forest, inner)
        }
        GateExpr::Add(a, b) => {
            let a = lower(forest, a, declared, memo)?;
            let b = lower(forest, b, declared, memo)?;
            add(forest, a, b)
        }
        GateExpr::Mul(a, b) => {
            let a = lower(forest, a, declared, memo)?;
            let b = lower(forest, b, declared, memo)?;
            multiply(forest, a, b)
        }
        GateExpr::Square(e) => {
            let inner = lower(forest, e, declared, memo)?;
            square(forest, inner)
        }
    };
    memo.insert(expr.clone(), id);
    Ok(id)
}

pub fn compile(expr: &GateExpr, declared: &[&str]) -> Result<VotingTree, CompileError> {
    let mut forest = Forest::new();
    let root = compile_into(&mut forest, expr, declared)?;
    Ok(forest.extract(root))
}

/// Random expression of depth at most `max_depth` over `vars`.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, max_depth: usize, vars: &[&str]) -> GateExpr {
    let leaf = |rng: &mut R| {
        if vars.is_empty() || rng.gen_bool(0.25) {
            GateExpr::constant(rng.gen_range(0..3))
        } else {
            GateExpr::var(vars[rng.gen_range(0..vars.len())])
        }
    };
    if max_depth == 0 || rng.gen_bool(0.2) {
        return leaf(rng);
    }
    match rng.gen_range(0..4) {
        0 => GateExpr::negation(random_expr(rng, max_depth - 1, vars)),
        1 => GateExpr::sum(
            random_expr(rng, max_depth - 1, vars),
            random_expr(rng, max_depth - 1, vars),
        ),
        2 => GateExpr::product(
            random_expr(rng, max_depth - 1, vars),
            random_expr(rng, max_depth - 1, vars),
        ),
        _ => GateExpr::square(random_expr(rng, max_depth - 1, vars)),
    }
}

/// Every assignment of `vars` to GF(3), in lexicographic order.
pub fn assignments(vars: &[String]) -> Vec<HashMap<String, F3>> {
    let mut out = vec![HashMap::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|a| {
                F3::ALL.into_iter().map(move |value| {
                    let mut next = a.clone();
                    next.insert(v.clone(), value);
                    next
                })
            })
            .collect();
    }
    out
}

pub fn to_bindings(assignment: &HashMap<String, F3>) -> Bindings {
    assignment
        .iter()
        .map(|(k, v)| (k.as_str(), v.candidate()))
        .collect()
}

/// One row of a truth table.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct TableRow {
    pub direction: &'static str,
    pub inputs: Vec<(String, u8)>,
    pub output: u8,
}

/// Evaluates `tree` on every assignment of its variables and both directions.
pub fn truth_table(tree: &VotingTree) -> Result<Vec<TableRow>, TreeError> {
    let vars = tree.variables();
    let mut rows = Vec::new();
    for direction in Direction::BOTH {
        for a in assignments(&vars) {
            let out = eval_f3(tree, direction, &to_bindings(&a))?;
            rows.push(TableRow {
                direction: direction.name(),
                inputs: vars.iter().map(|v| (v.clone(), a[v].value())).collect(),
                output: out.value(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use Direction::{Clockwise as Cw, Counterclockwise as Ccw};

    fn run1(gate: Gate, d: Direction, x: u32) -> u32 {
        let b = Bindings::new().with("X", x);
        gate.tree().evaluate(&d.tournament(), &b).unwrap()
    }

    fn run2(gate: Gate, d: Direction, x: u32, y: u32) -> u32 {
        let b = Bindings::new().with("X", x).with("Y", y);
        gate.tree().evaluate(&d.tournament(), &b).unwrap()
    }

    #[test]
    fn field_tables() {
        assert_eq!(F3::ONE + F3::TWO, F3::ZERO);
        assert_eq!(-F3::ONE, F3::TWO);
        assert_eq!(F3::TWO * F3::TWO, F3::ONE);
        assert_eq!(F3::ZERO - F3::ONE, F3::TWO);
        for x in F3::ALL {
            for y in F3::ALL {
                if x != y {
                    let z = F3::ALL.into_iter().find(|&z| z != x && z != y).unwrap();
                    assert_eq!(x + y + z, F3::ZERO);
                }
            }
        }
    }

    #[test]
    fn yield_examples() {
        assert_eq!(run1(Gate::Yield, Cw, 1), 0);
        assert_eq!(run1(Gate::Yield, Ccw, 1), 2);
        for x in 0..3 {
            let t = Cw.tournament();
            let beater = (0..3).find(|&v| v != x && t.beats(v, x).unwrap()).unwrap();
            assert_eq!(run1(Gate::Yield, Cw, x), beater);
            assert_eq!(run1(Gate::Yield, Cw, x), (x + 2) % 3);
            assert_eq!(run1(Gate::Yield, Ccw, x), (x + 1) % 3);
        }
        assert_eq!(Gate::Yield.tree().stats().leaves, 6u32.into());
    }

    #[test]
    fn pair_gate_examples() {
        for d in Direction::BOTH {
            for x in 0..3u32 {
                for y in 0..3u32 {
                    let got = run2(Gate::Pair, d, x, y);
                    if x != y {
                        assert_eq!(got, 3 - x - y, "{d} {x} {y}");
                    } else if d == Cw {
                        assert_eq!(got, (x + 2) % 3);
                    } else {
                        assert_eq!(got, (x + 1) % 3);
                    }
                }
            }
        }
    }

    #[test]
    fn neg_sum_negate_add() {
        for d in Direction::BOTH {
            assert_eq!(run2(Gate::NegSum, d, 1, 2), 0);
            assert_eq!(run2(Gate::NegSum, d, 0, 0), 0);
            assert_eq!(run1(Gate::Negate, d, 0), 0);
            assert_eq!(run1(Gate::Negate, d, 1), 2);
            assert_eq!(run1(Gate::Negate, d, 2), 1);
            assert_eq!(run2(Gate::Add, d, 1, 2), 0);
            assert_eq!(run2(Gate::Add, d, 2, 2), 1);
            for x in 0..3 {
                for y in 0..3 {
                    assert_eq!(run2(Gate::NegSum, d, x, y), (6 - x - y) % 3);
                    assert_eq!(run2(Gate::Add, d, x, y), (x + y) % 3);
                }
            }
        }
    }

    #[test]
    fn squaring_halves() {
        let cw: Vec<u32> = (0..3).map(|x| run1(Gate::SquareFirstHalf, Cw, x)).collect();
        let ccw: Vec<u32> = (0..3).map(|x| run1(Gate::SquareFirstHalf, Ccw, x)).collect();
        assert_eq!(cw, vec![0, 2, 2]);
        assert_eq!(ccw, vec![2, 1, 1]);
        assert_eq!(run1(Gate::SquareSecondHalf, Cw, 0), 0);
        assert_eq!(run1(Gate::SquareSecondHalf, Ccw, 2), 0);
        for d in Direction::BOTH {
            let sq: Vec<u32> = (0..3).map(|x| run1(Gate::Square, d, x)).collect();
            assert_eq!(sq, vec![0, 1, 1]);
        }
    }

    #[test]
    fn multiply_table() {
        for d in Direction::BOTH {
            assert_eq!(run2(Gate::Multiply, d, 2, 2), 1);
            for x in 0..3 {
                assert_eq!(run2(Gate::Multiply, d, x, 0), 0);
                for y in 0..3 {
                    assert_eq!(run2(Gate::Multiply, d, x, y), x * y % 3);
                }
            }
        }
    }

    #[test]
    fn sharing_keeps_multiply_small() {
        let sq = Gate::Square.tree().stats();
        let mul = Gate::Multiply.tree().stats();
        assert!(mul.dag_nodes < 10 * sq.dag_nodes, "{mul:?} vs {sq:?}");
        assert!(mul.leaves > sq.leaves);
    }

    #[test]
    fn substitution_commutes_with_evaluation() {
        // Plugging a tree into X evaluates like binding X to that tree's winner.
        let inner_cases: Vec<VotingTree> = vec![
            VotingTree::candidate(2),
            Gate::Negate.tree(),
            Gate::Square.tree().substitute(&crate::tree::Label::var("X"), &VotingTree::from_tuple(&[
                crate::tree::Label::var("Y"),
                1u32.into(),
            ]).unwrap()),
        ];
        for gate in Gate::ALL {
            let outer = gate.tree();
            for inner in &inner_cases {
                let plugged = outer.substitute(&crate::tree::Label::var("X"), inner);
                for d in Direction::BOTH {
                    for x in 0..3 {
                        for y in 0..3 {
                            let b = Bindings::new().with("X", x).with("Y", y);
                            let t = d.tournament();
                            let inner_winner = inner.evaluate(&t, &b).unwrap();
                            let rebound = Bindings::new().with("X", inner_winner).with("Y", y);
                            assert_eq!(
                                plugged.evaluate(&t, &b).unwrap(),
                                outer.evaluate(&t, &rebound).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn parser_accepts_infix() {
        let e = parse_expr("x^2 + 2*x*y + y^2").unwrap();
        assert_eq!(
            e,
            GateExpr::sum(
                GateExpr::sum(
                    GateExpr::square(GateExpr::var("x")),
                    GateExpr::product(
                        GateExpr::product(GateExpr::constant(2), GateExpr::var("x")),
                        GateExpr::var("y")
                    )
                ),
                GateExpr::square(GateExpr::var("y"))
            )
        );
        assert_eq!(
            parse_expr("-x - (y)").unwrap(),
            GateExpr::sum(
                GateExpr::negation(GateExpr::var("x")),
                GateExpr::negation(GateExpr::var("y"))
            )
        );
        assert_eq!(
            parse_expr("(x+1)^2^2").unwrap(),
            GateExpr::square(GateExpr::square(GateExpr::sum(
                GateExpr::var("x"),
                GateExpr::constant(1)
            )))
        );
    }

    #[test]
    fn parser_reports_columns() {
        assert_eq!(
            parse_expr("x + * y"),
            Err(CompileError::Syntax {
                column: 5,
                message: "expected a constant, variable or '('".into()
            })
        );
        assert!(matches!(parse_expr("x^3"), Err(CompileError::Syntax { column: 3, .. })));
        assert!(matches!(parse_expr("3*x"), Err(CompileError::Syntax { column: 1, .. })));
        assert!(matches!(parse_expr("(x + y"), Err(CompileError::Syntax { column: 7, .. })));
        assert!(matches!(parse_expr("x y"), Err(CompileError::Syntax { column: 3, .. })));
        let annotated = parse_expr("x + * y").unwrap_err().annotate("x + * y");
        assert!(annotated.starts_with("x + * y\n    ^\n"));
    }

    #[test]
    fn compile_examples() {
        let v = compile(&GateExpr::var("X"), &["X"]).unwrap();
        assert_eq!(v, VotingTree::leaf(crate::tree::Label::var("X")));

        let e = GateExpr::sum(GateExpr::var("X"), GateExpr::constant(0));
        let t = compile(&e, &["X"]).unwrap();
        for d in Direction::BOTH {
            for x in 0..3 {
                let b = Bindings::new().with("X", x);
                assert_eq!(eval_f3(&t, d, &b).unwrap(), F3::new(x));
            }
        }

        assert_eq!(
            compile(&GateExpr::var("Z"), &["X"]),
            Err(CompileError::UnknownVariable("Z".into()))
        );
    }

    #[test]
    fn binomial_square_identity() {
        let lhs = compile(&parse_expr("x^2 + 2*x*y + y^2").unwrap(), &["x", "y"]).unwrap();
        let rhs = compile(&parse_expr("(x + y)^2").unwrap(), &["x", "y"]).unwrap();
        for d in Direction::BOTH {
            for x in 0..3 {
                for y in 0..3 {
                    let b = Bindings::new().with("x", x).with("y", y);
                    let want = F3::new((x + y) * (x + y));
                    assert_eq!(eval_f3(&lhs, d, &b).unwrap(), want);
                    assert_eq!(eval_f3(&rhs, d, &b).unwrap(), want);
                }
            }
        }
    }

    #[test]
    fn shared_subexpressions_share_nodes() {
        let mut f = Forest::new();
        let e = parse_expr("(x*y) + (x*y)").unwrap();
        let root = compile_into(&mut f, &e, &["x", "y"]).unwrap();
        let mut g = Forest::new();
        let single = compile_into(&mut g, &parse_expr("x*y").unwrap(), &["x", "y"]).unwrap();
        // The product is built once; the sum adds only the add gate around it.
        let add_only = Gate::Add.tree().dag_nodes();
        assert!(f.dag_size(root) <= g.dag_size(single) + add_only);
    }

    #[test]
    fn random_expressions_match_field_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vars = ["x", "y", "z"];
        for _ in 0..25 {
            let e = random_expr(&mut rng, 3, &vars);
            assert!(e.depth() <= 3);
            let tree = compile(&e, &vars).unwrap();
            let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
            for a in assignments(&names) {
                let want = e.eval(&a).unwrap();
                for d in Direction::BOTH {
                    assert_eq!(eval_f3(&tree, d, &to_bindings(&a)).unwrap(), want, "{e}");
                }
            }
        }
    }

    #[test]
    fn transitive_inputs_have_no_contract() {
        // On 0 > 1 > 2 the top vertex wins every yield gate.
        let t = crate::tournament::Tournament::transitive(&[0, 1, 2]).unwrap();
        let y = Gate::Yield.tree();
        let b = Bindings::new().with("X", 2);
        assert_eq!(y.evaluate(&t, &b).unwrap(), 0);
    }

    #[test]
    fn table_has_all_rows() {
        let rows = truth_table(&Gate::Multiply.tree()).unwrap();
        assert_eq!(rows.len(), 18);
        for r in rows {
            assert_eq!(r.output, r.inputs[0].1 * r.inputs[1].1 % 3);
        }
    }
}
