//! Exhaustive and sampled checkers.
//!
//! Every checker splits its case space into fixed chunks, runs the chunks on
//! a rayon pool of the requested size and merges chunk results with an
//! associative, order-independent reduction. Witnesses are the first case in
//! enumeration order (or the smallest bitstring, for minima), so the outcome
//! does not depend on the worker count. Sampled modes draw chunk `b` from a
//! ChaCha8 stream `b` seeded with the user seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::constructions::{
    build, combine, lambda_full, lambda_sq, omega, omega_candidates, omega_leaf_count, phi_tree,
    psi, psi_virtual, BuildError, ShapePolicy,
};
use crate::f3::{
    assignments, compile, eval_f3, random_expr, to_bindings, CompileError, Gate, GateExpr, F3,
};
use crate::tournament::{
    num_pairs, pm_blocks, pm_count, sample_pm, sample_tournament, tournament_count, Candidate,
    Direction, PmClass, PmSpec, ScaleGuard, Tournament, TournamentError, TournamentRange,
};
use crate::tree::{Bindings, Forest, Label, NodeId, Program, TreeError, VotingTree};

pub const REPORT_SCHEMA: &str = "ballotree.report/v1";
pub const RNG_NAME: &str = "ChaCha8Rng";
/// Cases per work chunk; also the sample count per RNG stream.
pub const CHUNK: u64 = 1 << 14;
/// Default sample count for sampled checks.
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Tournament(#[from] TournamentError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("{0}")]
    Invalid(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampled { count: u64, seed: u64 },
}

impl Mode {
    fn report(&self) -> ModeReport {
        match *self {
            Mode::Exhaustive => ModeReport::Exhaustive,
            Mode::Sampled { count, seed } => ModeReport::Sampled {
                count,
                seed,
                generator: RNG_NAME,
                stream_chunk: CHUNK,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeReport {
    Exhaustive,
    Sampled {
        count: u64,
        seed: u64,
        generator: &'static str,
        stream_chunk: u64,
    },
    Composite,
}

/// Execution settings shared by all checkers.
#[derive(Debug, Clone, Copy, Default)]
pub struct Config {
    /// Worker count; `None` uses the available parallelism.
    pub jobs: Option<usize>,
    pub guard: ScaleGuard,
}

impl Config {
    pub fn with_jobs(jobs: usize) -> Self {
        Self {
            jobs: Some(jobs),
            ..Self::default()
        }
    }

    fn run<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, VerifyError> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(jobs) = self.jobs {
            builder = builder.num_threads(jobs.max(1));
        }
        let pool = builder
            .build()
            .map_err(|e| VerifyError::Pool(e.to_string()))?;
        Ok(pool.install(f))
    }
}

/// A replayable counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct Witness {
    /// Tournament in its text form (`n=<k>` line, bitstring line).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tournament: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pm_spec: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub bindings: BTreeMap<String, Candidate>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub mode: ModeReport,
    pub cases: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_cases: Option<u64>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub observed: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<VerificationReport>,
    pub wall_time_ms: u64,
}

impl VerificationReport {
    fn new(check: impl Into<String>, mode: ModeReport) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            check: check.into(),
            params: BTreeMap::new(),
            mode,
            cases: 0,
            expected_cases: None,
            passed: true,
            witness: None,
            observed: BTreeMap::new(),
            parts: Vec::new(),
            wall_time_ms: 0,
        }
    }

    fn param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn composite(check: impl Into<String>, parts: Vec<VerificationReport>) -> Self {
        let mut report = Self::new(check, ModeReport::Composite);
        report.cases = parts.iter().map(|p| p.cases).sum();
        report.passed = parts.iter().all(|p| p.passed);
        report.wall_time_ms = parts.iter().map(|p| p.wall_time_ms).sum();
        report.parts = parts;
        report
    }

    fn fail(&mut self, witness: Witness) {
        self.passed = false;
        if self.witness.is_none() {
            self.witness = Some(witness);
        }
    }

    /// JSON value with every timing field removed, for comparisons.
    pub fn outcome(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        strip_timing(&mut v);
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One line per check, indented by nesting.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        self.summarize(0, &mut out);
        out
    }

    fn summarize(&self, depth: usize, out: &mut String) {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let _ = write!(
            out,
            "{:indent$}{status} {} ({} cases",
            "",
            self.check,
            self.cases,
            indent = depth * 2
        );
        for (k, v) in &self.observed {
            let _ = write!(out, ", {k}={v}");
        }
        let _ = writeln!(out, ", {} ms)", self.wall_time_ms);
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "{:indent$}  witness: {}", "", w.detail, indent = depth * 2);
            if let Some(t) = &w.tournament {
                let _ = writeln!(
                    out,
                    "{:indent$}  tournament: {}",
                    "",
                    t.trim().replace('\n', " "),
                    indent = depth * 2
                );
            }
            if let Some(s) = &w.pm_spec {
                let _ = writeln!(out, "{:indent$}  spec: {s}", "", indent = depth * 2);
            }
        }
        for part in &self.parts {
            part.summarize(depth + 1, out);
        }
    }
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("wall_time_ms");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// Chunk boundaries of `0..total`.
fn chunks(total: u64) -> Vec<(u64, u64)> {
    (0..total.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(total)))
        .collect()
}

/// Case index, tournament and failure description.
type TournamentFailure = (u64, Tournament, String);

/// Runs `visit` on every tournament of the case space. `visit` returns a
/// failure description; the earliest failure in case order is kept.
fn sweep_tournaments<F>(
    n: usize,
    mode: Mode,
    cfg: &Config,
    visit: F,
) -> Result<(u64, Option<TournamentFailure>), VerifyError>
where
    F: Fn(&Tournament, &mut Vec<u8>) -> Option<String> + Sync,
{
    let (total, sampled_seed) = match mode {
        Mode::Exhaustive => {
            cfg.guard.check(n)?;
            (tournament_count(n)?, None)
        }
        Mode::Sampled { count, seed } => (count, Some(seed)),
    };
    let work = chunks(total);
    let failures = cfg.run(|| {
        work.par_iter()
            .map(|&(start, end)| -> Result<Option<TournamentFailure>, VerifyError> {
                let mut scratch = Vec::new();
                match sampled_seed {
                    None => {
                        let mut range = TournamentRange::new(n, start..end)?;
                        while let Some((index, t)) = range.advance() {
                            if let Some(why) = visit(t, &mut scratch) {
                                return Ok(Some((index, t.clone(), why)));
                            }
                        }
                    }
                    Some(seed) => {
                        let mut rng = chunk_rng(seed, start);
                        for index in start..end {
                            let t = sample_tournament(n, &mut rng)?;
                            if let Some(why) = visit(&t, &mut scratch) {
                                return Ok(Some((index, t, why)));
                            }
                        }
                    }
                }
                Ok(None)
            })
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok((total, failures.into_iter().flatten().min_by_key(|f| f.0)))
}

fn chunk_rng(seed: u64, chunk_start: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk_start / CHUNK);
    rng
}

/// Minimum winner out-degree over the case space, with the attaining
/// tournament whose bitstring is smallest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinOutdegree {
    pub min: usize,
    pub witness: Tournament,
    pub cases: u64,
}

pub fn min_winner_outdegree(
    tree: &VotingTree,
    n: usize,
    mode: Mode,
    cfg: &Config,
) -> Result<MinOutdegree, VerifyError> {
    let program = tree.program(&Bindings::new())?;
    min_winner_outdegree_program(&program, n, mode, cfg)
}

fn min_winner_outdegree_program(
    program: &Program,
    n: usize,
    mode: Mode,
    cfg: &Config,
) -> Result<MinOutdegree, VerifyError> {
    program.check(&Tournament::from_index(n, 0)?)?;
    let (total, seed) = match mode {
        Mode::Exhaustive => {
            cfg.guard.check(n)?;
            (tournament_count(n)?, None)
        }
        Mode::Sampled { count, seed } => (count, Some(seed)),
    };
    if total == 0 {
        return Err(VerifyError::Invalid("no cases to check".into()));
    }
    type Best = Option<(usize, Tournament)>;
    fn better(a: &Best, b: &Best) -> bool {
        match (a, b) {
            (Some(_), None) => true,
            (Some((da, ta)), Some((db, tb))) => {
                da < db || (da == db && ta.bits() < tb.bits())
            }
            _ => false,
        }
    }
    let work = chunks(total);
    let results = cfg.run(|| {
        work.par_iter()
            .map(|&(start, end)| -> Result<Best, VerifyError> {
                let mut scratch = Vec::with_capacity(program.slots());
                let mut best: Best = None;
                let mut best_degree = usize::MAX;
                match seed {
                    None => {
                        // Increasing index order: the first attaining
                        // tournament is the smallest bitstring.
                        let mut range = TournamentRange::new(n, start..end)?;
                        while let Some((_, t)) = range.advance() {
                            program.run(t, &mut scratch);
                            let d = t.degree(program.root_winner(&scratch, 0) as usize);
                            if d < best_degree {
                                best_degree = d;
                                best = Some((d, t.clone()));
                            }
                        }
                    }
                    Some(seed) => {
                        let mut rng = chunk_rng(seed, start);
                        for _ in start..end {
                            let t = sample_tournament(n, &mut rng)?;
                            program.run(&t, &mut scratch);
                            let d = t.degree(program.root_winner(&scratch, 0) as usize);
                            if d <= best_degree {
                                let candidate = Some((d, t));
                                if better(&candidate, &best) {
                                    best_degree = d;
                                    best = candidate;
                                }
                            }
                        }
                    }
                }
                Ok(best)
            })
            .collect::<Result<Vec<Best>, _>>()
    })??;
    let best = results
        .into_iter()
        .fold(None, |acc: Best, b| if better(&b, &acc) { b } else { acc });
    let (min, witness) = best.expect("nonempty case space");
    Ok(MinOutdegree {
        min,
        witness,
        cases: total,
    })
}

fn tournament_witness(t: &Tournament, detail: String) -> Witness {
    Witness {
        tournament: Some(t.to_string()),
        detail,
        ..Witness::default()
    }
}

/// Checks that `tree` always elects a vertex of out-degree at least `bound`.
pub fn check_guarantee(
    name: &str,
    tree: &VotingTree,
    n: usize,
    bound: usize,
    mode: Mode,
    cfg: &Config,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let outcome = min_winner_outdegree(tree, n, mode, cfg)?;
    let mut report = VerificationReport::new(name, mode.report())
        .param("n", json!(n))
        .param("bound", json!(bound));
    report.cases = outcome.cases;
    if mode == Mode::Exhaustive {
        report.expected_cases = Some(tournament_count(n)?);
    }
    report
        .observed
        .insert("min_outdegree".into(), json!(outcome.min));
    // The minimum's witness is recorded even on success: it is the
    // adversarial input achieving the observed minimum.
    let witness = tournament_witness(
        &outcome.witness,
        format!("winner has out-degree {}", outcome.min),
    );
    if outcome.min < bound {
        report.fail(witness);
    } else {
        report.witness = Some(witness);
    }
    report.wall_time_ms = elapsed_ms(start);
    Ok(report)
}

/// Guarantee tree levels `1..=kmax`: exhaustive for levels up to 3, sampled
/// (`samples` tournaments) at level 4, size recurrence only beyond.
pub fn check_levels(
    kmax: usize,
    samples: u64,
    seed: u64,
    cfg: &Config,
) -> Result<VerificationReport, VerifyError> {
    if kmax == 0 {
        return Err(VerifyError::Invalid("kmax must be at least 1".into()));
    }
    let mut parts = Vec::new();
    for k in 1..=kmax {
        let start = Instant::now();
        let n = omega_candidates(k);
        let mut sizes = VerificationReport::new(format!("omega k={k} size"), ModeReport::Exhaustive)
            .param("k", json!(k));
        let expected_leaves = omega_leaf_count(k);
        sizes
            .observed
            .insert("candidates".into(), json!(n));
        sizes
            .observed
            .insert("leaves".into(), json!(expected_leaves.to_string()));
        if n != k * (k + 1) / 2 + 1 {
            sizes.fail(Witness {
                detail: format!("candidate count {n} for level {k}"),
                ..Witness::default()
            });
        }
        if k <= 4 {
            let mut forest = Forest::new();
            let root = omega(&mut forest, k)?;
            let tree = forest.extract(root);
            let built = tree.stats().leaves;
            sizes.cases = 1;
            if built != expected_leaves {
                sizes.fail(Witness {
                    detail: format!("built tree has {built} leaves, recurrence gives {expected_leaves}"),
                    ..Witness::default()
                });
            }
            let labels = tree.labels();
            if labels != (0..n as Candidate).map(Label::Candidate).collect::<Vec<_>>() {
                sizes.fail(Witness {
                    detail: format!("labels are not exactly 0..{n}"),
                    ..Witness::default()
                });
            }
            sizes.wall_time_ms = elapsed_ms(start);
            parts.push(sizes);
            let mode = if k <= 3 {
                Mode::Exhaustive
            } else {
                Mode::Sampled {
                    count: samples,
                    seed,
                }
            };
            // Level 3 lives on 7 vertices, always within the default guard.
            let inner_cfg = Config {
                guard: ScaleGuard {
                    limit: cfg.guard.limit.max(7),
                    ..cfg.guard
                },
                ..*cfg
            };
            parts.push(check_guarantee(
                &format!("omega k={k} guarantee"),
                &tree,
                n,
                k,
                mode,
                &inner_cfg,
            )?);
        } else {
            sizes.wall_time_ms = elapsed_ms(start);
            parts.push(sizes);
        }
    }
    Ok(VerificationReport::composite("levels", parts)
        .param("kmax", json!(kmax))
        .param("samples", json!(samples))
        .param("seed", json!(seed)))
}

/// Vertex classes of one perfect manipulator tournament.
pub struct PmView<'a> {
    pub alpha: Candidate,
    pub class: &'a [PmClass],
}

type PmFailure = (u64, PmSpec, String);

/// Case count, violation count and the earliest violation.
type PmOutcome = (u64, u64, Option<PmFailure>);

fn merge_pm(parts: Vec<(u64, Option<PmFailure>)>) -> (u64, Option<PmFailure>) {
    let violations = parts.iter().map(|p| p.0).sum();
    (violations, parts.into_iter().filter_map(|p| p.1).min_by_key(|f| f.0))
}

/// Runs `visit` on every perfect manipulator tournament of the case space.
/// Every case is visited, so the violation count is exact.
fn sweep_pm<F>(
    n: usize,
    mode: Mode,
    cfg: &Config,
    program: &Program,
    visit: F,
) -> Result<PmOutcome, VerifyError>
where
    F: Fn(&PmView<'_>, &Program, &[u8]) -> Option<String> + Sync,
{
    if program.max_candidate() as usize >= n {
        return Err(TreeError::OutOfRange {
            candidate: program.max_candidate(),
            n,
        }
        .into());
    }
    match mode {
        Mode::Exhaustive => {
            cfg.guard.check(n)?;
            let blocks = pm_blocks(n)?;
            // Global case index of each block's first spec.
            let mut offsets = Vec::with_capacity(blocks.len());
            let mut total = 0u64;
            for block in &blocks {
                offsets.push(total);
                total += block.inner_count();
            }
            let work: Vec<(usize, u64, u64)> = blocks
                .iter()
                .enumerate()
                .flat_map(|(b, block)| {
                    chunks(block.inner_count())
                        .into_iter()
                        .map(move |(s, e)| (b, s, e))
                })
                .collect();
            let failures = cfg.run(|| {
                work.par_iter()
                    .map(|&(b, start, end)| -> Result<(u64, Option<PmFailure>), VerifyError> {
                        let block = &blocks[b];
                        let mut t = block.spec(start).realize()?;
                        let mut class = vec![PmClass::A; n];
                        block.b.iter().for_each(|&v| class[v as usize] = PmClass::B);
                        block.c.iter().for_each(|&v| class[v as usize] = PmClass::C);
                        let view = PmView {
                            alpha: block.alpha,
                            class: &class,
                        };
                        let inner_pairs: Vec<(usize, usize)> = inner_pairs(&block.b)
                            .into_iter()
                            .chain(inner_pairs(&block.c))
                            .collect();
                        let bits = inner_pairs.len();
                        let mut scratch = Vec::with_capacity(program.slots());
                        let mut violations = 0u64;
                        let mut first = None;
                        for inner in start..end {
                            for (k, &(u, v)) in inner_pairs.iter().enumerate() {
                                t.orient(u, v, (inner >> (bits - 1 - k)) & 1 == 1);
                            }
                            program.run(&t, &mut scratch);
                            if let Some(why) = visit(&view, program, &scratch) {
                                violations += 1;
                                if first.is_none() {
                                    first = Some((offsets[b] + inner, block.spec(inner), why));
                                }
                            }
                        }
                        Ok((violations, first))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })??;
            let expected = pm_count(n);
            if u128::from(total) != expected {
                return Err(VerifyError::Invalid(format!(
                    "enumerated {total} specs, closed form gives {expected}"
                )));
            }
            let (violations, first) = merge_pm(failures);
            Ok((total, violations, first))
        }
        Mode::Sampled { count, seed } => {
            let work = chunks(count);
            let failures = cfg.run(|| {
                work.par_iter()
                    .map(|&(start, end)| -> Result<(u64, Option<PmFailure>), VerifyError> {
                        let mut rng = chunk_rng(seed, start);
                        let mut scratch = Vec::with_capacity(program.slots());
                        let mut class = vec![PmClass::A; n];
                        let mut violations = 0u64;
                        let mut first = None;
                        for index in start..end {
                            let spec = sample_pm(n, &mut rng)?;
                            let t = spec.realize()?;
                            class[spec.alpha as usize] = PmClass::A;
                            spec.b.iter().for_each(|&v| class[v as usize] = PmClass::B);
                            spec.c.iter().for_each(|&v| class[v as usize] = PmClass::C);
                            let view = PmView {
                                alpha: spec.alpha,
                                class: &class,
                            };
                            program.run(&t, &mut scratch);
                            if let Some(why) = visit(&view, program, &scratch) {
                                violations += 1;
                                if first.is_none() {
                                    first = Some((index, spec, why));
                                }
                            }
                        }
                        Ok((violations, first))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })??;
            let (violations, first) = merge_pm(failures);
            Ok((count, violations, first))
        }
    }
}

fn inner_pairs(members: &[Candidate]) -> Vec<(usize, usize)> {
    crate::tournament::pairs(members.len())
        .map(|(i, j)| (members[i] as usize, members[j] as usize))
        .collect()
}

fn pm_report(
    check: &str,
    n: usize,
    mode: Mode,
    outcome: PmOutcome,
    start: Instant,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new(check, mode.report()).param("n", json!(n));
    report.cases = outcome.0;
    report
        .observed
        .insert("violations".into(), json!(outcome.1));
    if mode == Mode::Exhaustive {
        report.expected_cases = u64::try_from(pm_count(n)).ok();
    }
    if let Some((index, spec, why)) = outcome.2 {
        report.fail(Witness {
            tournament: Some(spec.realize()?.to_string()),
            pm_spec: Some(spec.to_string()),
            detail: format!("case {index}: {why}"),
            ..Witness::default()
        });
    }
    report.wall_time_ms = elapsed_ms(start);
    Ok(report)
}

/// Which anti-manipulator tree to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiVariant {
    /// Leaves labeled `j` of the squared one-against-all tree replaced by
    /// the shuffle tree.
    Substituted { j: Candidate },
    /// The shuffle tree as a virtual challenger against every candidate.
    Virtual,
}

impl PsiVariant {
    pub fn name(&self) -> &'static str {
        match self {
            PsiVariant::Substituted { .. } => "substituted",
            PsiVariant::Virtual => "virtual",
        }
    }

    pub fn build(&self, forest: &mut Forest, n: usize) -> Result<NodeId, BuildError> {
        match *self {
            PsiVariant::Substituted { j } => psi(forest, n, j),
            PsiVariant::Virtual => psi_virtual(forest, n),
        }
    }
}

/// Checks that the anti-manipulator tree never elects the manipulator.
/// Every violation is counted.
pub fn check_manipulator(
    n: usize,
    variant: PsiVariant,
    mode: Mode,
    cfg: &Config,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let mut forest = Forest::new();
    let root = variant.build(&mut forest, n)?;
    let program = Program::new(&forest, &[root], &Bindings::new())?;
    let outcome = sweep_pm(n, mode, cfg, &program, |view, p, scratch| {
        let w = p.root_winner(scratch, 0);
        (w == view.alpha).then(|| format!("manipulator {w} wins"))
    })?;
    let report = pm_report("manipulator", n, mode, outcome, start)?
        .param("variant", json!(variant.name()));
    Ok(match variant {
        PsiVariant::Substituted { j } => report.param("j", json!(j)),
        PsiVariant::Virtual => report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    /// One-against-set: the challenger wins iff it beats the whole set,
    /// otherwise the winner is a set member beating the challenger.
    AgainstSet { random_shapes: usize },
    /// The shuffle tree never elects a member of C.
    Phi,
    /// One-against-all rotates classes A -> C, B -> A, C -> B.
    OneAgainstAll,
    /// Its square rotates A -> B, B -> C, C -> A.
    OneAgainstAllSquared,
}

impl Lemma {
    pub fn name(&self) -> &'static str {
        match self {
            Lemma::AgainstSet { .. } => "against-set",
            Lemma::Phi => "phi",
            Lemma::OneAgainstAll => "one-against-all",
            Lemma::OneAgainstAllSquared => "one-against-all-squared",
        }
    }

    pub fn from_name(name: &str) -> Option<Lemma> {
        match name {
            "against-set" | "against-s" => Some(Lemma::AgainstSet { random_shapes: 10 }),
            "phi" => Some(Lemma::Phi),
            "one-against-all" | "rotation" => Some(Lemma::OneAgainstAll),
            "one-against-all-squared" | "rotation2" => Some(Lemma::OneAgainstAllSquared),
            _ => None,
        }
    }
}

pub fn check_lemma(
    lemma: Lemma,
    n: usize,
    mode: Mode,
    cfg: &Config,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    match lemma {
        Lemma::AgainstSet { random_shapes } => check_against_set(n, random_shapes, mode, cfg),
        Lemma::Phi => {
            let mut forest = Forest::new();
            let root = phi_tree(&mut forest, n)?;
            let program = Program::new(&forest, &[root], &Bindings::new())?;
            let outcome = sweep_pm(n, mode, cfg, &program, |view, p, scratch| {
                let w = p.root_winner(scratch, 0);
                (view.class[w as usize] == PmClass::C).then(|| format!("winner {w} is in C"))
            })?;
            pm_report(lemma.name(), n, mode, outcome, start)
        }
        Lemma::OneAgainstAll | Lemma::OneAgainstAllSquared => {
            let squared = lemma == Lemma::OneAgainstAllSquared;
            let mut forest = Forest::new();
            let roots = (0..n as Candidate)
                .map(|i| {
                    if squared {
                        lambda_sq(&mut forest, n, i)
                    } else {
                        lambda_full(&mut forest, n, i)
                    }
                })
                .collect::<Result<Vec<NodeId>, _>>()?;
            let program = Program::new(&forest, &roots, &Bindings::new())?;
            let outcome = sweep_pm(n, mode, cfg, &program, |view, p, scratch| {
                (0..n).find_map(|i| {
                    let from = view.class[i];
                    let want = if squared { from.prey() } else { from.predator() };
                    let w = p.root_winner(scratch, i);
                    let got = view.class[w as usize];
                    (got != want).then(|| {
                        format!("tree for {i} (class {from:?}) elected {w} in class {got:?}, expected {want:?}")
                    })
                })
            })?;
            pm_report(lemma.name(), n, mode, outcome, start)
        }
    }
}

fn check_against_set(
    n: usize,
    random_shapes: usize,
    mode: Mode,
    cfg: &Config,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    if !(2..=16).contains(&n) {
        return Err(VerifyError::Invalid(format!(
            "against-set check needs 2 <= n <= 16, got {n}"
        )));
    }
    struct Case {
        challenger: Candidate,
        set_mask: u64,
        shape: ShapePolicy,
    }
    let mut forest = Forest::new();
    let mut cases = Vec::new();
    let mut roots = Vec::new();
    for i in 0..n as Candidate {
        let others: Vec<Candidate> = (0..n as Candidate).filter(|&m| m != i).collect();
        for mask in 1u64..(1 << others.len()) {
            let members: Vec<Candidate> = others
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &v)| v)
                .collect();
            let set_mask = members.iter().fold(0u64, |acc, &v| acc | 1 << v);
            let challenger = forest.candidate(i);
            let pairs: Vec<NodeId> = members
                .iter()
                .map(|&s| {
                    let s = forest.candidate(s);
                    forest.node(challenger, s)
                })
                .collect();
            let shapes = std::iter::once(ShapePolicy::LeftComplete).chain(
                (0..random_shapes as u64).map(|r| {
                    ShapePolicy::Random(((i as u64) << 40) ^ (mask << 8) ^ r)
                }),
            );
            for shape in shapes {
                roots.push(combine(&mut forest, &pairs, shape));
                cases.push(Case {
                    challenger: i,
                    set_mask,
                    shape,
                });
            }
        }
    }
    let program = Program::new(&forest, &roots, &Bindings::new())?;
    let (tournaments, failure) = sweep_tournaments(n, mode, cfg, |t, scratch| {
        program.run(t, scratch);
        cases.iter().enumerate().find_map(|(k, case)| {
            let i = case.challenger as usize;
            let w = program.root_winner(scratch, k) as usize;
            let row = t.row(i);
            let sweeps = row & case.set_mask == case.set_mask;
            let ok = if sweeps {
                w == i
            } else {
                case.set_mask >> w & 1 == 1 && t.row(w) >> i & 1 == 1
            };
            (!ok).then(|| {
                format!(
                    "challenger {i} against set mask {:#b} ({:?}) elected {w}",
                    case.set_mask, case.shape
                )
            })
        })
    })?;
    let mut report = VerificationReport::new("against-set", mode.report())
        .param("n", json!(n))
        .param("random_shapes", json!(random_shapes));
    report.cases = tournaments * cases.len() as u64;
    report
        .observed
        .insert("trees".into(), json!(cases.len()));
    report
        .observed
        .insert("tournaments".into(), json!(tournaments));
    if mode == Mode::Exhaustive {
        let sets = n as u64 * ((1u64 << (n - 1)) - 1);
        report.expected_cases = Some(tournament_count(n)? * sets * (1 + random_shapes as u64));
    }
    if let Some((index, t, why)) = failure {
        report.fail(tournament_witness(&t, format!("tournament {index}: {why}")));
    }
    report.wall_time_ms = elapsed_ms(start);
    Ok(report)
}

/// Two-leaf trees on every 3-vertex tournament: the left label wins iff its
/// pair bit says it beats the right one.
pub fn check_match() -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let mut report = VerificationReport::new("match", ModeReport::Exhaustive);
    report.expected_cases = Some(24);
    for index in 0..tournament_count(3)? {
        let t = Tournament::from_index(3, index)?;
        let bits = t.bitstring();
        for (p, (i, j)) in crate::tournament::pairs(3).enumerate() {
            let (i, j) = (i as Candidate, j as Candidate);
            let want = if bits.as_bytes()[p] == b'1' { i } else { j };
            let tree = VotingTree::join(&VotingTree::candidate(i), &VotingTree::candidate(j));
            let got = tree.evaluate(&t, &Bindings::new())?;
            report.cases += 1;
            if got != want {
                report.fail(tournament_witness(
                    &t,
                    format!("({i} {j}) elected {got}, expected {want}"),
                ));
            }
        }
    }
    report.wall_time_ms = elapsed_ms(start);
    Ok(report)
}

/// Reference truth table of each gate, written directly in field terms.
pub fn gate_oracle(gate: Gate, direction: Direction, x: F3, y: F3) -> F3 {
    let beater = |v: F3| match direction {
        Direction::Clockwise => v - F3::ONE,
        Direction::Counterclockwise => v + F3::ONE,
    };
    match gate {
        Gate::Yield => beater(x),
        Gate::Pair => {
            if x == y {
                beater(x)
            } else {
                -x - y
            }
        }
        Gate::NegSum => -x - y,
        Gate::Negate => -x,
        Gate::Add => x + y,
        Gate::SquareFirstHalf => {
            let table = match direction {
                Direction::Clockwise => [0, 2, 2],
                Direction::Counterclockwise => [2, 1, 1],
            };
            F3::new(table[x.value() as usize])
        }
        Gate::SquareSecondHalf => F3::ONE - beater(beater(x)),
        Gate::Square => x * x,
        Gate::Multiply => x * y,
    }
}

fn gate_table_report(gate: Gate) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let tree = gate.tree();
    let stats = tree.stats();
    let mut report = VerificationReport::new(format!("gate {}", gate.name()), ModeReport::Exhaustive);
    report.expected_cases = Some(2 * 3u64.pow(gate.arity() as u32));
    report
        .observed
        .insert("leaves".into(), json!(stats.leaves.to_string()));
    report
        .observed
        .insert("dag_nodes".into(), json!(stats.dag_nodes));
    let ys: &[F3] = if gate.arity() == 2 { &F3::ALL } else { &[F3::ZERO] };
    for direction in Direction::BOTH {
        let t = direction.tournament();
        for x in F3::ALL {
            for &y in ys {
                let mut b = Bindings::new().with("X", x.candidate());
                if gate.arity() == 2 {
                    b.insert("Y", y.candidate());
                }
                let got = F3::new(tree.evaluate(&t, &b)?);
                let want = gate_oracle(gate, direction, x, y);
                report.cases += 1;
                if got != want {
                    report.fail(Witness {
                        tournament: Some(t.to_string()),
                        bindings: b.iter().map(|(k, v)| (k.to_string(), v)).collect(),
                        detail: format!("{direction}: got {got}, expected {want}"),
                        ..Witness::default()
                    });
                }
            }
        }
    }
    report.wall_time_ms = elapsed_ms(start);
    Ok(report)
}

/// Compiles `count` random polynomials (depth <= 4, 1-3 variables) and
/// compares every assignment on both directions against field arithmetic.
pub fn check_compiler(count: u64, seed: u64) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = ["x", "y", "z"];
    let mut report = VerificationReport::new(
        "compiler",
        Mode::Sampled { count, seed }.report(),
    );
    report.params.insert("max_depth".into(), json!(4));
    let mut evaluations = 0u64;
    for index in 0..count {
        let arity = rand::Rng::gen_range(&mut rng, 1..=pool.len());
        let vars = &pool[..arity];
        let expr: GateExpr = random_expr(&mut rng, 4, vars);
        let tree = compile(&expr, vars)?;
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        for a in assignments(&names) {
            let want = expr.eval(&a).expect("total assignment");
            let bindings = to_bindings(&a);
            for direction in Direction::BOTH {
                evaluations += 1;
                let got = eval_f3(&tree, direction, &bindings)?;
                if got != want {
                    report.fail(Witness {
                        tournament: Some(direction.tournament().to_string()),
                        bindings: bindings.iter().map(|(k, v)| (k.to_string(), v)).collect(),
                        detail: format!("expression #{index} {expr}: got {got}, expected {want}"),
                        ..Witness::default()
                    });
                }
            }
        }
        report.cases += 1;
    }
    report
        .observed
        .insert("evaluations".into(), json!(evaluations));
    report.wall_time_ms = elapsed_ms(start);
    Ok(report)
}

/// Full truth tables of every gate plus the compiler sample.
pub fn check_gates(compiler_samples: u64, seed: u64) -> Result<VerificationReport, VerifyError> {
    let mut parts = Gate::ALL
        .into_iter()
        .map(gate_table_report)
        .collect::<Result<Vec<_>, _>>()?;
    parts.push(check_compiler(compiler_samples, seed)?);
    Ok(VerificationReport::composite("gates", parts))
}

/// Exhaustive minimum for the complete tree over `0..n`.
pub fn check_baseline(n: usize, mode: Mode, cfg: &Config) -> Result<VerificationReport, VerifyError> {
    let tree = build(|f| crate::constructions::baseline(f, n))?;
    let bound = n.trailing_zeros() as usize;
    check_guarantee("baseline", &tree, n, bound, mode, cfg)
}

/// Winner classes of a perfect manipulator spec under a list of trees;
/// used to replay witnesses.
pub fn classify_winners(spec: &PmSpec, trees: &[VotingTree]) -> Result<Vec<PmClass>, VerifyError> {
    let t = spec.realize()?;
    trees
        .iter()
        .map(|tree| {
            let w = tree.evaluate(&t, &Bindings::new())?;
            spec.class_of(w)
                .ok_or_else(|| VerifyError::Invalid(format!("winner {w} outside the spec")))
        })
        .collect()
}

/// Number of orientation bits of an `n`-vertex tournament; re-exported for
/// report consumers.
pub fn pair_count(n: usize) -> usize {
    num_pairs(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn serial() -> Config {
        Config::with_jobs(1)
    }

    #[test]
    fn match_table() {
        let r = check_match().unwrap();
        assert!(r.passed);
        assert_eq!(r.cases, 24);
    }

    #[test]
    fn baseline_four() {
        let r = check_baseline(4, Mode::Exhaustive, &serial()).unwrap();
        assert!(r.passed);
        assert_eq!(r.cases, 64);
        assert_eq!(r.observed["min_outdegree"], json!(2));
    }

    #[test]
    fn guarantee_failure_has_replayable_witness() {
        // Demanding 3 from the 4-leaf baseline must fail at the smallest
        // bitstring whose winner has out-degree 2.
        let tree = build(|f| crate::constructions::baseline(f, 4)).unwrap();
        let r = check_guarantee("strict", &tree, 4, 3, Mode::Exhaustive, &serial()).unwrap();
        assert!(!r.passed);
        let w = r.witness.unwrap();
        let t: Tournament = w.tournament.unwrap().parse().unwrap();
        let winner = tree.evaluate(&t, &Bindings::new()).unwrap();
        assert_eq!(t.out_degree(winner).unwrap(), 2);
        // No smaller bitstring attains degree 2.
        for index in 0..t.index() {
            let s = Tournament::from_index(4, index).unwrap();
            let w = tree.evaluate(&s, &Bindings::new()).unwrap();
            assert!(s.out_degree(w).unwrap() > 2);
        }
    }

    #[test]
    fn levels_small() {
        let r = check_levels(2, 1000, 1, &serial()).unwrap();
        assert!(r.passed, "{}", r.summary());
        assert_eq!(r.parts.len(), 4);
        assert_eq!(r.parts[1].observed["min_outdegree"], json!(1));
        assert_eq!(r.parts[1].cases, 2);
        assert_eq!(r.parts[3].cases, 64);
    }

    #[test]
    fn pm_lemmas_at_four() {
        for lemma in [Lemma::Phi, Lemma::OneAgainstAll, Lemma::OneAgainstAllSquared] {
            let r = check_lemma(lemma, 4, Mode::Exhaustive, &serial()).unwrap();
            assert!(r.passed, "{}", r.summary());
            assert_eq!(r.cases, 48);
            assert_eq!(r.expected_cases, Some(48));
        }
        let r = check_manipulator(4, PsiVariant::Virtual, Mode::Exhaustive, &serial()).unwrap();
        assert!(r.passed);
        assert_eq!(r.cases, 48);
    }

    #[test]
    fn substituted_psi_counterexamples() {
        // Replacing every j leaf also strips j from the inner opponent sets,
        // so the manipulator wins when j is alone in its class.
        let r = check_manipulator(
            4,
            PsiVariant::Substituted { j: 0 },
            Mode::Exhaustive,
            &serial(),
        )
        .unwrap();
        assert!(!r.passed);
        assert_eq!(r.observed["violations"], json!(6));
        let w = r.witness.unwrap();
        let spec: PmSpec = w.pm_spec.unwrap().parse().unwrap();
        assert!(spec.b == vec![0] || spec.c == vec![0]);
        let tree = build(|f| psi(f, 4, 0)).unwrap();
        let t = spec.realize().unwrap();
        assert_eq!(tree.evaluate(&t, &Bindings::new()).unwrap(), spec.alpha);
    }

    #[test]
    fn pm_sweep_reports_failures() {
        // The plain baseline tree does elect members of C on some PM
        // tournaments; the checker must find and replay one.
        let mut forest = Forest::new();
        let root = crate::constructions::baseline(&mut forest, 4).unwrap();
        let program = Program::new(&forest, &[root], &Bindings::new()).unwrap();
        let outcome = sweep_pm(4, Mode::Exhaustive, &serial(), &program, |view, p, s| {
            let w = p.root_winner(s, 0);
            (view.class[w as usize] == PmClass::C).then(|| "in C".to_string())
        })
        .unwrap();
        let (index, spec, _) = outcome.2.expect("baseline is not C-free");
        assert!(outcome.1 >= 1);
        let all: Vec<PmSpec> = crate::tournament::enumerate_pm(4).unwrap().collect();
        assert_eq!(all[index as usize], spec);
        let tree = forest.extract(root);
        assert_eq!(classify_winners(&spec, &[tree]).unwrap(), vec![PmClass::C]);
    }

    #[test]
    fn against_set_small() {
        let r = check_lemma(
            Lemma::AgainstSet { random_shapes: 3 },
            4,
            Mode::Exhaustive,
            &serial(),
        )
        .unwrap();
        assert!(r.passed);
        assert_eq!(r.expected_cases, Some(r.cases));
        assert_eq!(r.cases, 64 * 4 * 7 * 4);
    }

    #[test]
    fn gates_pass() {
        let r = check_gates(20, 9).unwrap();
        assert!(r.passed, "{}", r.summary());
        let tables: u64 = r.parts[..Gate::ALL.len()].iter().map(|p| p.cases).sum();
        assert_eq!(tables, 6 + 18 + 18 + 6 + 18 + 6 + 6 + 6 + 18);
    }

    #[test]
    fn oracle_matches_lemma_tables() {
        use Direction::*;
        let f = |d, x| gate_oracle(Gate::SquareFirstHalf, d, F3::new(x), F3::ZERO).value();
        assert_eq!([f(Clockwise, 0), f(Clockwise, 1), f(Clockwise, 2)], [0, 2, 2]);
        assert_eq!(
            [f(Counterclockwise, 0), f(Counterclockwise, 1), f(Counterclockwise, 2)],
            [2, 1, 1]
        );
        assert_eq!(
            gate_oracle(Gate::SquareSecondHalf, Clockwise, F3::ZERO, F3::ZERO),
            F3::ZERO
        );
        assert_eq!(
            gate_oracle(Gate::SquareSecondHalf, Counterclockwise, F3::TWO, F3::ZERO),
            F3::ZERO
        );
    }

    #[test]
    fn sampled_runs_are_reproducible_and_job_independent() {
        let tree = build(|f| omega(f, 2)).unwrap();
        let mode = Mode::Sampled {
            count: 3 * CHUNK + 17,
            seed: 42,
        };
        let a = check_guarantee("omega", &tree, 4, 2, mode, &Config::with_jobs(1)).unwrap();
        let b = check_guarantee("omega", &tree, 4, 2, mode, &Config::with_jobs(3)).unwrap();
        assert_eq!(a.outcome(), b.outcome());
        assert_eq!(a.cases, 3 * CHUNK + 17);
    }

    #[test]
    fn exhaustive_guard_refuses() {
        let tree = build(|f| crate::constructions::baseline(f, 16)).unwrap();
        assert!(matches!(
            min_winner_outdegree(&tree, 16, Mode::Exhaustive, &serial()),
            Err(VerifyError::Tournament(TournamentError::ScaleRefused { .. }))
        ));
        assert!(matches!(
            check_manipulator(16, PsiVariant::Virtual, Mode::Exhaustive, &serial()),
            Err(VerifyError::Tournament(TournamentError::ScaleRefused { .. }))
        ));
    }

    #[test]
    fn report_json_has_schema() {
        let r = check_baseline(2, Mode::Exhaustive, &serial()).unwrap();
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], json!(REPORT_SCHEMA));
        assert_eq!(v["mode"]["kind"], json!("exhaustive"));
        assert!(r.outcome().get("wall_time_ms").is_none());
        assert!(r.summary().starts_with("PASS baseline (2 cases"));
    }
}
