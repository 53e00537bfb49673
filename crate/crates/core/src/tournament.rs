//! Tournaments on labeled vertices `0..n`.
//!
//! A tournament is stored as one adjacency bitmask per vertex, with the
//! diagonal bit set so that `beats(u, u)` holds without special casing.
//! The external form is the canonical orientation bitstring: one bit per
//! unordered pair `(u, v)`, `u < v`, in lexicographic pair order, set when
//! `u` beats `v`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Candidate index. Candidates are 0-indexed.
pub type Candidate = u32;

/// Largest vertex count a [`Tournament`] can hold (one `u64` row per vertex).
pub const MAX_VERTICES: usize = 64;

/// Default cap on `n` for exhaustive enumeration (2^28 tournaments at `n = 8`).
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 8;

/// Environment variable overriding [`DEFAULT_EXHAUSTIVE_LIMIT`].
pub const EXHAUSTIVE_LIMIT_ENV: &str = "BALLOTREE_EXHAUSTIVE_LIMIT";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TournamentError {
    #[error("expected {expected} orientation bits for n={n}, got {got}")]
    BitLength { n: usize, expected: usize, got: usize },
    #[error("candidate {candidate} out of range for n={n}")]
    OutOfRange { candidate: Candidate, n: usize },
    #[error("vertex count {0} exceeds the supported maximum of {MAX_VERTICES}")]
    TooLarge(usize),
    #[error("exhaustive enumeration at n={n} exceeds the limit {limit}; force it or raise {EXHAUSTIVE_LIMIT_ENV}")]
    ScaleRefused { n: usize, limit: usize },
    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },
    #[error("invalid perfect manipulator spec: {0}")]
    InvalidSpec(String),
}

/// Number of unordered pairs, `C(n, 2)`.
pub const fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the pair `(u, v)`, `u < v`, in canonical lexicographic order.
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u < v && v < n);
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

/// Iterates all pairs `(u, v)`, `u < v`, in canonical order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tournament {
    n: usize,
    rows: Vec<u64>,
}

impl Tournament {
    /// Builds a tournament from its canonical orientation bits.
    pub fn new(n: usize, bits: &[bool]) -> Result<Self, TournamentError> {
        let expected = num_pairs(n);
        if bits.len() != expected {
            return Err(TournamentError::BitLength {
                n,
                expected,
                got: bits.len(),
            });
        }
        let mut t = Self::empty(n)?;
        for ((u, v), &bit) in pairs(n).zip(bits) {
            t.orient(u, v, bit);
        }
        Ok(t)
    }

    /// The tournament in which every `u < v` is beaten by `v`; every pair
    /// bit is clear.
    fn empty(n: usize) -> Result<Self, TournamentError> {
        if n > MAX_VERTICES {
            return Err(TournamentError::TooLarge(n));
        }
        let mut rows = vec![0u64; n];
        for (v, row) in rows.iter_mut().enumerate() {
            *row = 1 << v;
        }
        let mut t = Self { n, rows };
        for (u, v) in pairs(n) {
            t.orient(u, v, false);
        }
        Ok(t)
    }

    /// Builds the tournament whose bitstring, read as a binary number with
    /// the first pair as the most significant bit, equals `index`.
    pub fn from_index(n: usize, index: u64) -> Result<Self, TournamentError> {
        let m = num_pairs(n);
        if m < 64 && index >> m != 0 {
            return Err(TournamentError::Format {
                what: "tournament index",
                reason: format!("{index} does not fit in {m} bits"),
            });
        }
        let mut t = Self::empty(n)?;
        for (p, (u, v)) in pairs(n).enumerate() {
            let shift = m - 1 - p;
            t.orient(u, v, shift < 64 && (index >> shift) & 1 == 1);
        }
        Ok(t)
    }

    /// Parses a bitstring of `'0'`/`'1'` characters in canonical pair order.
    pub fn from_bitstring(n: usize, bits: &str) -> Result<Self, TournamentError> {
        let parsed = parse_bits(bits, "tournament bitstring")?;
        Self::new(n, &parsed)
    }

    /// Transitive tournament in which `order[0]` beats everyone, `order[1]`
    /// beats everyone but `order[0]`, and so on.
    pub fn transitive(order: &[Candidate]) -> Result<Self, TournamentError> {
        let n = order.len();
        let mut t = Self::empty(n)?;
        let mut seen = 0u64;
        for (rank, &c) in order.iter().enumerate() {
            t.check(c)?;
            if seen >> c & 1 == 1 {
                return Err(TournamentError::Format {
                    what: "transitive order",
                    reason: format!("candidate {c} repeated"),
                });
            }
            seen |= 1 << c;
            for &d in &order[rank + 1..] {
                t.set_edge(c as usize, d as usize);
            }
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adjacency row of `u`: bit `v` is set iff `u` beats `v` (including `v == u`).
    #[inline]
    pub fn row(&self, u: usize) -> u64 {
        self.rows[u]
    }

    /// Match semantics: true iff `u == v` or `u -> v`.
    pub fn beats(&self, u: Candidate, v: Candidate) -> Result<bool, TournamentError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.rows[u as usize] >> v & 1 == 1)
    }

    pub fn out_degree(&self, v: Candidate) -> Result<usize, TournamentError> {
        self.check(v)?;
        Ok(self.degree(v as usize))
    }

    #[inline]
    pub(crate) fn degree(&self, v: usize) -> usize {
        self.rows[v].count_ones() as usize - 1
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// All vertices of maximum out-degree, ascending.
    pub fn copeland_winners(&self) -> Vec<Candidate> {
        let degrees = self.out_degrees();
        let Some(&best) = degrees.iter().max() else {
            return Vec::new();
        };
        (0..self.n as Candidate)
            .filter(|&v| degrees[v as usize] == best)
            .collect()
    }

    /// Canonical orientation bits.
    pub fn bits(&self) -> Vec<bool> {
        pairs(self.n).map(|(u, v)| self.rows[u] >> v & 1 == 1).collect()
    }

    pub fn bitstring(&self) -> String {
        self.bits().iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Inverse of [`Tournament::from_index`]; only meaningful for `C(n,2) <= 64`.
    pub fn index(&self) -> u64 {
        self.bits()
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    /// True iff the tournament has no directed cycle.
    pub fn is_transitive(&self) -> bool {
        let mut degrees = self.out_degrees();
        degrees.sort_unstable();
        degrees.iter().enumerate().all(|(i, &d)| i == d)
    }

    /// Makes `u` beat `v`.
    pub(crate) fn set_edge(&mut self, u: usize, v: usize) {
        self.rows[u] |= 1 << v;
        self.rows[v] &= !(1 << u);
    }

    /// Orients the pair `u < v`: `u -> v` when `forward`, else `v -> u`.
    #[inline]
    pub(crate) fn orient(&mut self, u: usize, v: usize, forward: bool) {
        if forward {
            self.set_edge(u, v);
        } else {
            self.set_edge(v, u);
        }
    }

    #[inline]
    pub(crate) fn flip(&mut self, u: usize, v: usize) {
        self.rows[u] ^= 1 << v;
        self.rows[v] ^= 1 << u;
    }

    fn check(&self, c: Candidate) -> Result<(), TournamentError> {
        if (c as usize) < self.n {
            Ok(())
        } else {
            Err(TournamentError::OutOfRange {
                candidate: c,
                n: self.n,
            })
        }
    }
}

impl fmt::Debug for Tournament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tournament(n={}, {})", self.n, self.bitstring())
    }
}

/// Text form: `n=<k>` on the first line, the bitstring on the second.
impl fmt::Display for Tournament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n)?;
        writeln!(f, "{}", self.bitstring())
    }
}

impl FromStr for Tournament {
    type Err = TournamentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let format_err = |reason: &str| TournamentError::Format {
            what: "tournament file",
            reason: reason.to_string(),
        };
        let mut lines = s.lines().map(str::trim);
        let header = lines.next().ok_or_else(|| format_err("empty input"))?;
        let n = header
            .strip_prefix("n=")
            .and_then(|k| k.trim().parse::<usize>().ok())
            .ok_or_else(|| format_err("first line must be n=<count>"))?;
        let bits = lines.next().unwrap_or("");
        if lines.any(|l| !l.is_empty()) {
            return Err(format_err("trailing content after the bitstring"));
        }
        Self::from_bitstring(n, bits)
    }
}

pub(crate) fn parse_bits(s: &str, what: &'static str) -> Result<Vec<bool>, TournamentError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(TournamentError::Format {
                what,
                reason: format!("unexpected character {other:?}"),
            }),
        })
        .collect()
}

/// One of the two non-transitive tournaments on `{0, 1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// 0 -> 1 -> 2 -> 0
    Clockwise,
    /// 0 -> 2 -> 1 -> 0
    Counterclockwise,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Clockwise, Direction::Counterclockwise];

    pub fn tournament(self) -> Tournament {
        // Pair order is (0,1), (0,2), (1,2).
        let bits = match self {
            Direction::Clockwise => [true, false, true],
            Direction::Counterclockwise => [false, true, false],
        };
        Tournament::new(3, &bits).expect("three pairs")
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Clockwise => "clockwise",
            Direction::Counterclockwise => "counterclockwise",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = TournamentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clockwise" | "cw" => Ok(Direction::Clockwise),
            "counterclockwise" | "ccw" => Ok(Direction::Counterclockwise),
            _ => Err(TournamentError::Format {
                what: "direction",
                reason: format!("{s:?} is neither clockwise nor counterclockwise"),
            }),
        }
    }
}

/// Guards exhaustive enumeration against accidental blow-ups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleGuard {
    pub limit: usize,
    pub force: bool,
}

impl Default for ScaleGuard {
    fn default() -> Self {
        Self {
            limit: DEFAULT_EXHAUSTIVE_LIMIT,
            force: false,
        }
    }
}

impl ScaleGuard {
    /// Default guard with the limit taken from [`EXHAUSTIVE_LIMIT_ENV`] when set.
    pub fn from_env() -> Self {
        let limit = std::env::var(EXHAUSTIVE_LIMIT_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_EXHAUSTIVE_LIMIT);
        Self {
            limit,
            force: false,
        }
    }

    pub fn forced() -> Self {
        Self {
            force: true,
            ..Self::default()
        }
    }

    pub fn check(&self, n: usize) -> Result<(), TournamentError> {
        if self.force || n <= self.limit {
            Ok(())
        } else {
            Err(TournamentError::ScaleRefused {
                n,
                limit: self.limit,
            })
        }
    }
}

/// Total number of tournaments on `n` vertices, `2^C(n,2)`, for `C(n,2) < 64`.
pub fn tournament_count(n: usize) -> Result<u64, TournamentError> {
    let m = num_pairs(n);
    if m >= 64 {
        return Err(TournamentError::TooLarge(n));
    }
    Ok(1u64 << m)
}

/// All tournaments on `n` vertices in increasing bitstring order.
pub fn enumerate_tournaments(
    n: usize,
    guard: ScaleGuard,
) -> Result<TournamentRange, TournamentError> {
    guard.check(n)?;
    let total = tournament_count(n)?;
    TournamentRange::new(n, 0..total)
}

/// A contiguous slice of the tournament index space. Consecutive
/// tournaments differ in the trailing pairs only, so the iterator updates
/// one shared tournament in place instead of rebuilding it.
#[derive(Debug, Clone)]
pub struct TournamentRange {
    current: Tournament,
    next: u64,
    end: u64,
    started: bool,
    /// Pairs in reverse canonical order: `tail[k]` is index bit `k`.
    tail: Vec<(usize, usize)>,
}

impl TournamentRange {
    pub fn new(n: usize, range: std::ops::Range<u64>) -> Result<Self, TournamentError> {
        let total = tournament_count(n)?;
        let end = range.end.min(total);
        let start = range.start.min(end);
        let mut tail: Vec<_> = pairs(n).collect();
        tail.reverse();
        Ok(Self {
            current: Tournament::from_index(n, start.min(total.saturating_sub(1)))?,
            next: start,
            end,
            started: false,
            tail,
        })
    }

    /// Advances and lends the next tournament with its index.
    pub fn advance(&mut self) -> Option<(u64, &Tournament)> {
        if self.next >= self.end {
            return None;
        }
        if self.started {
            // Incrementing flips the trailing ones and the first zero above them.
            let changed = (self.next ^ (self.next - 1)).count_ones() as usize;
            for &(u, v) in &self.tail[..changed] {
                self.current.flip(u, v);
            }
        }
        self.started = true;
        let index = self.next;
        self.next += 1;
        Some((index, &self.current))
    }
}

impl Iterator for TournamentRange {
    type Item = Tournament;

    fn next(&mut self) -> Option<Tournament> {
        self.advance().map(|(_, t)| t.clone())
    }
}

/// A perfect manipulator tournament: `alpha` beats all of `b`, all of `b`
/// beat all of `c`, all of `c` beat `alpha`. `inner_b` / `inner_c` orient
/// the pairs inside `b` and inside `c` in lexicographic order of the
/// (sorted) members.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PmSpec {
    pub alpha: Candidate,
    pub b: Vec<Candidate>,
    pub c: Vec<Candidate>,
    pub inner_b: Vec<bool>,
    pub inner_c: Vec<bool>,
}

/// Which class of a perfect manipulator tournament a vertex belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PmClass {
    A,
    B,
    C,
}

impl PmClass {
    /// The class beaten by `self`.
    pub fn prey(self) -> PmClass {
        match self {
            PmClass::A => PmClass::B,
            PmClass::B => PmClass::C,
            PmClass::C => PmClass::A,
        }
    }

    /// The class that beats `self`.
    pub fn predator(self) -> PmClass {
        match self {
            PmClass::A => PmClass::C,
            PmClass::B => PmClass::A,
            PmClass::C => PmClass::B,
        }
    }
}

impl PmSpec {
    pub fn n(&self) -> usize {
        1 + self.b.len() + self.c.len()
    }

    pub fn validate(&self) -> Result<(), TournamentError> {
        let bad = |why: String| Err(TournamentError::InvalidSpec(why));
        if self.b.is_empty() || self.c.is_empty() {
            return bad("B and C must both be nonempty".into());
        }
        let n = self.n();
        if n > MAX_VERTICES {
            return Err(TournamentError::TooLarge(n));
        }
        let mut seen = 0u64;
        for &v in std::iter::once(&self.alpha).chain(&self.b).chain(&self.c) {
            if v as usize >= n {
                return bad(format!("vertex {v} out of range for n={n}"));
            }
            if seen >> v & 1 == 1 {
                return bad(format!("vertex {v} appears twice"));
            }
            seen |= 1 << v;
        }
        if !self.b.windows(2).all(|w| w[0] < w[1]) || !self.c.windows(2).all(|w| w[0] < w[1]) {
            return bad("B and C must be listed in increasing order".into());
        }
        if self.inner_b.len() != num_pairs(self.b.len()) {
            return bad(format!(
                "innerB needs {} bits, got {}",
                num_pairs(self.b.len()),
                self.inner_b.len()
            ));
        }
        if self.inner_c.len() != num_pairs(self.c.len()) {
            return bad(format!(
                "innerC needs {} bits, got {}",
                num_pairs(self.c.len()),
                self.inner_c.len()
            ));
        }
        Ok(())
    }

    pub fn class_of(&self, v: Candidate) -> Option<PmClass> {
        if v == self.alpha {
            Some(PmClass::A)
        } else if self.b.binary_search(&v).is_ok() {
            Some(PmClass::B)
        } else if self.c.binary_search(&v).is_ok() {
            Some(PmClass::C)
        } else {
            None
        }
    }

    pub fn realize(&self) -> Result<Tournament, TournamentError> {
        self.validate()?;
        let mut t = Tournament::empty(self.n())?;
        self.write_into(&mut t);
        Ok(t)
    }

    /// Overwrites every edge of `t` (which must have `n` vertices).
    pub(crate) fn write_into(&self, t: &mut Tournament) {
        let alpha = self.alpha as usize;
        for &b in &self.b {
            t.set_edge(alpha, b as usize);
            for &c in &self.c {
                t.set_edge(b as usize, c as usize);
            }
        }
        for &c in &self.c {
            t.set_edge(c as usize, alpha);
        }
        write_inner(t, &self.b, &self.inner_b);
        write_inner(t, &self.c, &self.inner_c);
    }
}

fn write_inner(t: &mut Tournament, members: &[Candidate], bits: &[bool]) {
    let k = members.len();
    for ((i, j), &bit) in pairs(k).zip(bits) {
        t.orient(members[i] as usize, members[j] as usize, bit);
    }
}

fn format_list(items: &[Candidate]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// `alpha=<v>; B=<list>; C=<list>; innerB=<bits>; innerC=<bits>`
impl fmt::Display for PmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha={}; B={}; C={}; innerB={}; innerC={}",
            self.alpha,
            format_list(&self.b),
            format_list(&self.c),
            format_bits(&self.inner_b),
            format_bits(&self.inner_c)
        )
    }
}

impl FromStr for PmSpec {
    type Err = TournamentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: String| TournamentError::Format {
            what: "perfect manipulator spec",
            reason,
        };
        let fields: Vec<(&str, &str)> = s
            .trim()
            .split(';')
            .map(|part| {
                part.split_once('=')
                    .map(|(k, v)| (k.trim(), v.trim()))
                    .ok_or_else(|| err(format!("expected key=value, got {part:?}")))
            })
            .collect::<Result<_, _>>()?;
        let keys: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
        if keys != ["alpha", "B", "C", "innerB", "innerC"] {
            return Err(err(format!(
                "expected fields alpha, B, C, innerB, innerC in order, got {keys:?}"
            )));
        }
        let list = |v: &str| -> Result<Vec<Candidate>, TournamentError> {
            if v.is_empty() {
                return Ok(Vec::new());
            }
            v.split(',')
                .map(|x| {
                    x.trim()
                        .parse()
                        .map_err(|_| err(format!("bad vertex {x:?}")))
                })
                .collect()
        };
        let alpha = fields[0]
            .1
            .parse()
            .map_err(|_| err(format!("bad alpha {:?}", fields[0].1)))?;
        let spec = PmSpec {
            alpha,
            b: list(fields[1].1)?,
            c: list(fields[2].1)?,
            inner_b: parse_bits(fields[3].1, "innerB")?,
            inner_c: parse_bits(fields[4].1, "innerC")?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Closed-form number of perfect manipulator specs on `n >= 3` vertices:
/// `n * sum_{b=1}^{n-2} C(n-1, b) * 2^(C(b,2) + C(n-1-b,2))`.
pub fn pm_count(n: usize) -> u128 {
    if n < 3 {
        return 0;
    }
    let rest = n - 1;
    let mut binom: u128 = 1;
    let mut total: u128 = 0;
    for b in 1..rest {
        binom = binom * (rest - b + 1) as u128 / b as u128;
        total += binom << (num_pairs(b) + num_pairs(rest - b));
    }
    n as u128 * total
}

/// All specs sharing one `(alpha, B)` choice; the inner orientations are
/// indexed by `0..inner_count()`, innerB bits most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmBlock {
    pub alpha: Candidate,
    pub b: Vec<Candidate>,
    pub c: Vec<Candidate>,
}

impl PmBlock {
    pub fn inner_bits(&self) -> usize {
        num_pairs(self.b.len()) + num_pairs(self.c.len())
    }

    pub fn inner_count(&self) -> u64 {
        1u64 << self.inner_bits()
    }

    pub fn spec(&self, inner: u64) -> PmSpec {
        let nb = num_pairs(self.b.len());
        let total = self.inner_bits();
        let bit = |k: usize| (inner >> (total - 1 - k)) & 1 == 1;
        PmSpec {
            alpha: self.alpha,
            b: self.b.clone(),
            c: self.c.clone(),
            inner_b: (0..nb).map(bit).collect(),
            inner_c: (nb..total).map(bit).collect(),
        }
    }

    pub fn specs(&self) -> impl Iterator<Item = PmSpec> + '_ {
        (0..self.inner_count()).map(move |i| self.spec(i))
    }
}

/// Every `(alpha, B)` choice on `n` vertices: alpha ascending, then the
/// membership mask of B over the remaining vertices ascending.
pub fn pm_blocks(n: usize) -> Result<Vec<PmBlock>, TournamentError> {
    if n < 3 {
        return Err(TournamentError::InvalidSpec(format!(
            "perfect manipulator tournaments need n >= 3, got {n}"
        )));
    }
    if n > MAX_VERTICES || num_pairs(n - 2) >= 64 {
        return Err(TournamentError::TooLarge(n));
    }
    let mut blocks = Vec::new();
    for alpha in 0..n as Candidate {
        let others: Vec<Candidate> = (0..n as Candidate).filter(|&v| v != alpha).collect();
        let full = (1u64 << others.len()) - 1;
        for mask in 1..full {
            let (b, c): (Vec<_>, Vec<_>) = others
                .iter()
                .enumerate()
                .partition(|(k, _)| mask >> k & 1 == 1);
            blocks.push(PmBlock {
                alpha,
                b: b.into_iter().map(|(_, &v)| v).collect(),
                c: c.into_iter().map(|(_, &v)| v).collect(),
            });
        }
    }
    Ok(blocks)
}

/// Every perfect manipulator spec on `n` vertices exactly once.
pub fn enumerate_pm(n: usize) -> Result<impl Iterator<Item = PmSpec>, TournamentError> {
    let blocks = pm_blocks(n)?;
    Ok(blocks
        .into_iter()
        .flat_map(|block| (0..block.inner_count()).map(move |i| block.spec(i))))
}

/// Draws a spec: alpha uniform, each other vertex into B or C uniformly
/// conditioned on both being nonempty, then uniform inner orientations.
pub fn sample_pm<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PmSpec, TournamentError> {
    if n < 3 {
        return Err(TournamentError::InvalidSpec(format!(
            "perfect manipulator tournaments need n >= 3, got {n}"
        )));
    }
    if n > MAX_VERTICES {
        return Err(TournamentError::TooLarge(n));
    }
    let alpha = rng.gen_range(0..n as Candidate);
    let others: Vec<Candidate> = (0..n as Candidate).filter(|&v| v != alpha).collect();
    let (b, c) = loop {
        let (b, c): (Vec<Candidate>, Vec<Candidate>) =
            others.iter().partition(|_| rng.gen_bool(0.5));
        if !b.is_empty() && !c.is_empty() {
            break (b, c);
        }
    };
    let inner_b = (0..num_pairs(b.len())).map(|_| rng.gen_bool(0.5)).collect();
    let inner_c = (0..num_pairs(c.len())).map(|_| rng.gen_bool(0.5)).collect();
    Ok(PmSpec {
        alpha,
        b,
        c,
        inner_b,
        inner_c,
    })
}

/// Seeded convenience wrapper around [`sample_pm`].
pub fn sample_pm_seeded(n: usize, seed: u64) -> Result<PmSpec, TournamentError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    sample_pm(n, &mut rng)
}

/// Uniformly random tournament: every pair oriented by a fair coin.
pub fn sample_tournament<R: rand::Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<Tournament, TournamentError> {
    let mut t = Tournament::empty(n)?;
    for (u, v) in pairs(n) {
        t.orient(u, v, rng.gen_bool(0.5));
    }
    Ok(t)
}
