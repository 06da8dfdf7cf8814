//! Lattice searches for extremal p-adic configurations.
//!
//! The search space is the finite lattice of entries `x·p^(-j)` with
//! `x ∈ {0, …, p^k − 1}`. Results are statements about that lattice only: a
//! `Found` witness is a genuine configuration over `Q_p`, while
//! `ExhaustedNotFound` says nothing about configurations outside the lattice.
//!
//! Families are sets of distinct `(τ, f)` pairs. Every constraint is
//! symmetric under reordering, so the search fixes an order on candidate
//! pairs and only builds families with strictly increasing indices.
//!
//! All lattice entries are nonnegative, so every lifted outer product
//! `τ^{⊗m} (f^{⊗m})ᵀ` has nonnegative entries. A sum of such matrices can
//! equal `b·I` only if each summand is diagonal and the diagonal partial sums
//! never exceed `b`; both facts are used for pruning.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, gram, sup_norm, FrameConfig};
use crate::scalar::{AbsValue, Backend, Prime, Rational, Scalar, Valuation};
use crate::symtensor::{lift_functional, lift_vector, sym_dim, sym_frame_operator};
use crate::welch::{self, BoundReport, Variant};

/// Largest per-entry alphabet `p^k` accepted.
pub const MAX_ALPHABET: u64 = 1 << 16;
/// Largest number of per-slot candidate pairs materialized.
pub const MAX_PAIRS: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("witness failed re-verification: {0}")]
    Reverification(String),
    #[error(transparent)]
    Welch(#[from] welch::WelchError),
}

/// Constraint on the cross products `f_j(τ_k) f_k(τ_j)`, `j ≠ k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma {
    /// No constraint.
    Any,
    /// All cross products share one absolute value, whichever it is.
    Common,
    /// All cross products have absolute value `p^(-v)`.
    Fixed(i64),
    /// All cross products have finite valuation below `v`.
    Below(i64),
}

impl Gamma {
    fn accepts(self, common: Option<Valuation>, v: Valuation) -> bool {
        match self {
            Gamma::Any => true,
            Gamma::Common => common.is_none_or(|c| c == v),
            Gamma::Fixed(g) => v == Valuation::Finite(g),
            Gamma::Below(g) => v < Valuation::Finite(g),
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Any => f.write_str("any"),
            Gamma::Common => f.write_str("common"),
            Gamma::Fixed(v) => write!(f, "{v}"),
            Gamma::Below(v) => write!(f, "<{v}"),
        }
    }
}

impl std::str::FromStr for Gamma {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" => Ok(Gamma::Any),
            "common" => Ok(Gamma::Common),
            v if v.starts_with('<') => v[1..].parse().map(Gamma::Below).map_err(|_| format!("invalid gamma {v:?}")),
            v => v.parse().map(Gamma::Fixed).map_err(|_| format!("invalid gamma {v:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraints {
    /// `‖τ_j‖ = ‖f_j‖ = 1` in the sup norm.
    pub unit_norms: bool,
    /// The frame operator (on `Sym^m` for equality searches) is `b·I`.
    pub tight: bool,
    pub gamma: Gamma,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub prime: Prime,
    /// Entries are drawn from `{0, …, p^precision − 1}`.
    pub precision: u32,
    /// Entries are multiplied by `p^(-scale)`; `scale ≤ precision`.
    pub scale: u32,
    pub d: usize,
    pub n: usize,
    /// Required value of every `f_j(τ_j)`.
    #[serde(with = "crate::linalg::rational_text")]
    pub a: Rational,
    pub constraints: Constraints,
}

impl SearchSpace {
    pub fn new(prime: Prime, precision: u32, d: usize, n: usize) -> Self {
        SearchSpace {
            prime,
            precision,
            scale: 0,
            d,
            n,
            a: Rational::one(),
            constraints: Constraints { unit_norms: true, tight: false, gamma: Gamma::Any },
        }
    }

    pub fn backend(&self) -> Backend {
        Backend::Padic(self.prime)
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |s: String| Err(SearchError::InvalidSpace(s));
        if self.precision == 0 {
            return bad("precision must be at least 1".into());
        }
        if self.scale > self.precision {
            return bad(format!("scale {} exceeds precision {}", self.scale, self.precision));
        }
        if self.d == 0 || self.n == 0 {
            return bad("d and n must be positive".into());
        }
        match self.alphabet() {
            Some(a) if a <= MAX_ALPHABET => {}
            _ => return bad(format!("p^k = {}^{} is too large", self.prime, self.precision)),
        }
        Ok(())
    }

    fn alphabet(&self) -> Option<u64> {
        self.prime.get().checked_pow(self.precision)
    }

    /// The entry values `x·p^(-scale)`, in increasing order of `x`.
    pub fn lattice_values(&self) -> Vec<Rational> {
        let denom = BigInt::from(self.prime.get()).pow(self.scale);
        (0..self.alphabet().expect("validated"))
            .map(|x| Rational::new(BigInt::from(x), denom.clone()))
            .collect()
    }

    /// `(p^k)^(2·d·n)`: every assignment of the `2·d·n` entries.
    pub fn candidate_count(&self) -> BigUint {
        BigUint::from(self.alphabet().expect("validated")).pow((2 * self.d * self.n) as u32)
    }
}

/// Streams every configuration of a space in lexicographic order.
///
/// The entry tuple is laid out slot by slot: `τ_1`, `f_1`, `τ_2`, `f_2`, …,
/// with the first entry most significant.
pub struct LatticeIter {
    backend: Backend,
    d: usize,
    n: usize,
    values: Vec<Rational>,
    digits: Vec<usize>,
    done: bool,
}

impl LatticeIter {
    /// Skips the first `offset` configurations.
    pub fn starting_at(space: &SearchSpace, offset: u128) -> Self {
        let values = space.lattice_values();
        let base = values.len() as u128;
        let len = 2 * space.d * space.n;
        let mut digits = vec![0usize; len];
        let mut rest = offset;
        for slot in digits.iter_mut().rev() {
            *slot = (rest % base) as usize;
            rest /= base;
        }
        LatticeIter { backend: space.backend(), d: space.d, n: space.n, values, digits, done: rest > 0 }
    }

    fn current(&self) -> FrameConfig {
        let d = self.d;
        let mut vectors = Vec::with_capacity(self.n);
        let mut functionals = Vec::with_capacity(self.n);
        for slot in self.digits.chunks(2 * d) {
            let entry = |i: usize| Scalar::Rational(self.values[slot[i]].clone());
            vectors.push((0..d).map(entry).collect());
            functionals.push((d..2 * d).map(entry).collect());
        }
        FrameConfig::new(self.backend, vectors, functionals).expect("lattice configs are well formed")
    }
}

impl Iterator for LatticeIter {
    type Item = FrameConfig;

    fn next(&mut self) -> Option<FrameConfig> {
        if self.done {
            return None;
        }
        let out = self.current();
        let base = self.values.len();
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < base {
                break;
            }
            self.digits[i] = 0;
        }
        Some(out)
    }
}

pub fn enumerate_lattice(space: &SearchSpace) -> LatticeIter {
    LatticeIter::starting_at(space, 0)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Maximum number of search nodes to visit.
    pub budget: Option<u64>,
    /// Shuffles the candidate order; the existence answer does not depend on it.
    pub seed: Option<u64>,
    /// Number of index-range partitions scanned in parallel.
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificates {
    /// `b` with `S = b·I`, when tightness was required.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Scalar>,
    /// `v_p(f_j(τ_k))` for all `j, k`.
    pub gram_valuations: Vec<Vec<Valuation>>,
    /// Valuation of the common cross product, for equiangular families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Valuation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<BoundReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Outcome {
    Found { config: FrameConfig, certificates: Certificates },
    ExhaustedNotFound,
    Budget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub space: SearchSpace,
    /// Order of the symmetric power used for tightness and equality.
    pub m: u32,
    pub outcome: Outcome,
    pub explored: u64,
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquiangularStatus {
    Complete,
    Budget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquiangularResult {
    pub space: SearchSpace,
    pub n_max: usize,
    pub status: EquiangularStatus,
    pub best_n: usize,
    pub witness: Option<FrameConfig>,
    pub certificates: Option<Certificates>,
    pub explored: u64,
    pub seed: Option<u64>,
}

/// What a complete family must satisfy beyond the space's constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    /// `max{|Σ f_l(τ_l)^{2m}|, max |f_j(τ_k) f_k(τ_j)|^m} = |Σ f_j(τ_j)^m|² / |C(d+m−1, m)|`.
    Equality { m: u32 },
    /// No extra condition; tightness (if requested) is on the base space.
    Constraints,
}

impl Goal {
    fn order(self) -> u32 {
        match self {
            Goal::Equality { m } => m,
            Goal::Constraints => 1,
        }
    }
}

struct Candidate {
    tau: Vec<Scalar>,
    u: Vec<Scalar>,
    /// Diagonal of the lifted outer product (all off-diagonal entries are 0).
    diag: Vec<Rational>,
}

struct Problem<'a> {
    space: &'a SearchSpace,
    goal: Goal,
    n: usize,
    backend: Backend,
    candidates: Vec<Candidate>,
    /// Target `b` when tightness is required.
    b: Option<Rational>,
    /// Valuation the Welch right-hand side takes, for equality searches.
    rhs: Option<Valuation>,
}

impl<'a> Problem<'a> {
    fn new(space: &'a SearchSpace, n: usize, goal: Goal, seed: Option<u64>) -> Result<Self, SearchError> {
        space.validate()?;
        let backend = space.backend();
        let m = goal.order();
        let d = space.d;
        let values = space.lattice_values();
        let per_vector = (values.len() as u64).checked_pow(d as u32).filter(|&c| c * c <= MAX_PAIRS);
        let Some(per_vector) = per_vector else {
            return Err(SearchError::InvalidSpace(format!(
                "{} candidate pairs per slot exceeds {MAX_PAIRS}",
                BigUint::from(values.len()).pow(2 * d as u32)
            )));
        };
        let dim = sym_dim(d, m).to_usize().expect("small dimension");
        let a = Scalar::Rational(space.a.clone());
        let vectors: Vec<Vec<Scalar>> = (0..per_vector).map(|i| digits_to_vector(i, &values, d)).collect();
        let mut candidates = Vec::new();
        for tau in &vectors {
            if space.constraints.unit_norms && sup_norm(tau, &backend).expect("rational") != AbsValue::ONE {
                continue;
            }
            for u in &vectors {
                if space.constraints.unit_norms && sup_norm(u, &backend).expect("rational") != AbsValue::ONE {
                    continue;
                }
                if linalg::dot(u, tau) != a {
                    continue;
                }
                let diag = if space.constraints.tight {
                    match diagonal_lift(tau, u, m, dim) {
                        Some(diag) => diag,
                        None => continue,
                    }
                } else {
                    Vec::new()
                };
                candidates.push(Candidate { tau: tau.clone(), u: u.clone(), diag });
            }
        }
        if let Some(seed) = seed {
            candidates.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        // Trace of S on Sym^m is n·a^m, so S = b·I forces b = n·a^m / dim.
        let b = space.constraints.tight.then(|| {
            Rational::from_integer(BigInt::from(n)) * space.a.pow(m as i32) / Rational::from_integer(BigInt::from(dim))
        });
        let rhs = match goal {
            Goal::Equality { m } => {
                let trace = Scalar::Rational(Rational::from_integer(BigInt::from(n)) * space.a.pow(m as i32));
                let num = backend.abs(&trace).expect("rational").pow(2);
                num.checked_div(welch::sym_dim_abs(&backend, d, m)).map(AbsValue::valuation)
            }
            Goal::Constraints => None,
        };
        Ok(Problem { space, goal, n, backend, candidates, b, rhs })
    }

    fn pairing(&self, j: usize, k: usize) -> Scalar {
        linalg::dot(&self.candidates[j].u, &self.candidates[k].tau)
    }

    fn config(&self, family: &[usize]) -> FrameConfig {
        FrameConfig::new(
            self.backend,
            family.iter().map(|&i| self.candidates[i].tau.clone()).collect(),
            family.iter().map(|&i| self.candidates[i].u.clone()).collect(),
        )
        .expect("well formed")
    }
}

fn digits_to_vector(mut index: u64, values: &[Rational], d: usize) -> Vec<Scalar> {
    let base = values.len() as u64;
    let mut out = vec![Scalar::zero(); d];
    for slot in out.iter_mut().rev() {
        *slot = Scalar::Rational(values[(index % base) as usize].clone());
        index /= base;
    }
    out
}

/// Diagonal of `lift(τ) lift(u)ᵀ`, or `None` if it has an off-diagonal entry.
fn diagonal_lift(tau: &[Scalar], u: &[Scalar], m: u32, dim: usize) -> Option<Vec<Rational>> {
    let lt = lift_vector(tau, m);
    let lu = lift_functional(u, m);
    debug_assert_eq!(lt.len(), dim);
    for (i, x) in lt.iter().enumerate() {
        for (j, y) in lu.iter().enumerate() {
            if i != j && !x.is_zero() && !y.is_zero() {
                return None;
            }
        }
    }
    Some(
        lt.iter()
            .zip(&lu)
            .map(|(x, y)| (x * y).as_rational().expect("rational").clone())
            .collect(),
    )
}

struct Dfs<'p, 'a> {
    prob: &'p Problem<'a>,
    cap: Option<u64>,
    explored: u64,
    truncated: bool,
    family: Vec<usize>,
    /// Common cross-product valuation after each push, for `Gamma::Common`.
    common: Vec<Option<Valuation>>,
    diag: Vec<Rational>,
}

impl<'p, 'a> Dfs<'p, 'a> {
    fn new(prob: &'p Problem<'a>, cap: Option<u64>) -> Self {
        let dim = prob.candidates.first().map_or(0, |c| c.diag.len());
        Dfs {
            prob,
            cap,
            explored: 0,
            truncated: false,
            family: Vec::with_capacity(prob.n),
            common: Vec::with_capacity(prob.n),
            diag: vec![Rational::zero(); dim],
        }
    }

    /// Tries each root in `roots` in order; stops at the first complete family.
    fn run(&mut self, roots: std::ops::Range<usize>) -> bool {
        self.descend(roots.start, roots.end)
    }

    fn descend(&mut self, start: usize, end: usize) -> bool {
        let total = self.prob.candidates.len();
        let remaining = self.prob.n - self.family.len();
        let end = end.min((total + 1).saturating_sub(remaining));
        for i in start..end {
            if self.cap.is_some_and(|c| self.explored >= c) {
                self.truncated = true;
                return false;
            }
            self.explored += 1;
            let Some(common) = self.admissible(i) else { continue };
            self.push(i, common);
            if self.family.len() == self.prob.n {
                if self.complete() {
                    return true;
                }
            } else if self.descend(i + 1, total) {
                return true;
            }
            if self.truncated {
                return false;
            }
            self.pop();
        }
        false
    }

    /// Checks the new pair against the partial family; returns the updated
    /// common valuation.
    fn admissible(&self, i: usize) -> Option<Option<Valuation>> {
        let prob = self.prob;
        let space = prob.space;
        let mut common = self.common.last().copied().flatten();
        for &j in &self.family {
            let cross = &prob.pairing(j, i) * &prob.pairing(i, j);
            let v = prob.backend.valuation(&cross).expect("rational");
            if !space.constraints.gamma.accepts(common, v) {
                return None;
            }
            if space.constraints.gamma == Gamma::Common {
                common = Some(v);
            }
            if let (Goal::Equality { m }, Some(rhs)) = (prob.goal, prob.rhs) {
                // |cross|^m ≤ rhs
                if v.times(m) < rhs {
                    return None;
                }
            }
        }
        if let Some(b) = &prob.b {
            let c = &prob.candidates[i];
            if self.diag.iter().zip(&c.diag).any(|(acc, x)| &(acc + x) > b) {
                return None;
            }
        }
        Some(common)
    }

    fn push(&mut self, i: usize, common: Option<Valuation>) {
        self.family.push(i);
        self.common.push(common);
        if self.prob.b.is_some() {
            for (acc, x) in self.diag.iter_mut().zip(&self.prob.candidates[i].diag) {
                *acc += x;
            }
        }
    }

    fn pop(&mut self) {
        let i = self.family.pop().expect("nonempty");
        self.common.pop();
        if self.prob.b.is_some() {
            for (acc, x) in self.diag.iter_mut().zip(&self.prob.candidates[i].diag) {
                *acc -= x;
            }
        }
    }

    fn complete(&self) -> bool {
        let prob = self.prob;
        if let Some(b) = &prob.b {
            if self.diag.iter().any(|x| x != b) {
                return false;
            }
        }
        match prob.goal {
            Goal::Constraints => true,
            Goal::Equality { m } => {
                let Some(rhs) = prob.rhs else { return false };
                let a = Scalar::Rational(prob.space.a.clone());
                let diag_sum = &Scalar::from_int(prob.n as i64) * &a.pow(2 * m);
                let mut lhs = prob.backend.valuation(&diag_sum).expect("rational");
                for (x, &j) in self.family.iter().enumerate() {
                    for &k in &self.family[x + 1..] {
                        let cross = &prob.pairing(j, k) * &prob.pairing(k, j);
                        lhs = lhs.min(prob.backend.valuation(&cross).expect("rational").times(m));
                    }
                }
                lhs == rhs
            }
        }
    }
}

struct PartitionOutcome {
    found: Option<Vec<usize>>,
    explored: u64,
    truncated: bool,
}

enum LevelOutcome {
    Found(Vec<usize>),
    Exhausted,
    Budget,
}

/// Splits `0..len` into `parts` contiguous ranges.
pub fn partition_ranges(len: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    let parts = parts.max(1);
    let chunk = len.div_ceil(parts).max(1);
    (0..parts).map(|i| (i * chunk).min(len)..((i + 1) * chunk).min(len)).collect()
}

/// Searches one family size, partitioning the root choice across workers.
///
/// The reducer walks partitions in index order, so the answer and explored
/// count equal those of a single sequential scan.
fn search_level(prob: &Problem, options: &SearchOptions) -> (LevelOutcome, u64) {
    let ranges = partition_ranges(prob.candidates.len(), options.workers);
    let cap = options.budget;
    let parts: Vec<PartitionOutcome> = ranges
        .into_par_iter()
        .map(|range| {
            let mut dfs = Dfs::new(prob, cap);
            let found = dfs.run(range).then(|| dfs.family.clone());
            PartitionOutcome { found, explored: dfs.explored, truncated: dfs.truncated }
        })
        .collect();
    let mut total = 0u64;
    for part in parts {
        let over = cap.is_some_and(|c| total + part.explored > c);
        if part.truncated || over {
            return (LevelOutcome::Budget, cap.expect("truncation implies a budget"));
        }
        total += part.explored;
        if let Some(family) = part.found {
            return (LevelOutcome::Found(family), total);
        }
    }
    (LevelOutcome::Exhausted, total)
}

fn gram_valuations(config: &FrameConfig) -> Vec<Vec<Valuation>> {
    let backend = config.backend();
    gram(config)
        .to_rows()
        .iter()
        .map(|row| row.iter().map(|x| backend.valuation(x).expect("rational")).collect())
        .collect()
}

/// Recomputes every requested condition on `config` from scratch.
///
/// Used to re-verify search witnesses, including ones parsed back from JSON.
pub fn verify_witness(space: &SearchSpace, goal: Goal, config: &FrameConfig) -> Result<Certificates, SearchError> {
    let fail = |s: String| Err(SearchError::Reverification(s));
    let backend = space.backend();
    if config.backend() != backend || config.d() != space.d {
        return fail("backend or dimension differs from the search space".into());
    }
    let n = config.n();
    let a = Scalar::Rational(space.a.clone());
    for j in 0..n {
        if config.pairing(j, j) != a {
            return fail(format!("f_{j}(τ_{j}) != {a}"));
        }
        if space.constraints.unit_norms {
            let tn = sup_norm(&config.vectors()[j], &backend).map_err(|e| SearchError::Reverification(e.to_string()))?;
            let fnorm =
                sup_norm(&config.functionals()[j], &backend).map_err(|e| SearchError::Reverification(e.to_string()))?;
            if tn != AbsValue::ONE || fnorm != AbsValue::ONE {
                return fail(format!("pair {j} is not unit norm"));
            }
        }
        for k in 0..j {
            if config.vectors()[j] == config.vectors()[k] && config.functionals()[j] == config.functionals()[k] {
                return fail(format!("pairs {k} and {j} coincide"));
            }
        }
    }
    let g = gram(config);
    let mut common = None;
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let v = backend.valuation(&(&g[(j, k)] * &g[(k, j)])).expect("rational");
            if !space.constraints.gamma.accepts(common, v) {
                return fail(format!("cross product ({j}, {k}) has valuation {v}"));
            }
            common = Some(v);
        }
    }
    let m = goal.order();
    let b = if space.constraints.tight {
        let op = sym_frame_operator(config, m).map_err(|e| SearchError::Reverification(e.to_string()))?;
        match linalg::is_scalar_identity(&op.matrix) {
            Some(b) => Some(b),
            None => return fail("frame operator is not a scalar multiple of the identity".into()),
        }
    } else {
        None
    };
    let report = match goal {
        Goal::Equality { m } if n >= 2 => {
            let r = welch::check_bound(config, m, Variant::Padic)?;
            if !(r.hypothesis.satisfied && r.lhs == r.rhs) {
                return fail(format!("bound verdict {:?}, not equality", r.verdict));
            }
            Some(r)
        }
        Goal::Equality { m } => {
            // n = 1: no cross terms; max{|a^{2m}|} against |a^m|² / |C|.
            let x = config.pairing(0, 0);
            let lhs = backend.abs(&x.pow(2 * m)).expect("rational");
            let rhs = backend.abs(&x.pow(m)).expect("rational").pow(2).checked_div(welch::sym_dim_abs(&backend, space.d, m));
            if Some(lhs) != rhs {
                return fail("single-element equality fails".into());
            }
            None
        }
        Goal::Constraints => None,
    };
    let gamma = if n >= 2 && space.constraints.gamma != Gamma::Any { common } else { None };
    Ok(Certificates { b, gram_valuations: gram_valuations(config), gamma, report })
}

fn run_single(space: &SearchSpace, goal: Goal, options: &SearchOptions) -> Result<SearchResult, SearchError> {
    let prob = Problem::new(space, space.n, goal, options.seed)?;
    let (outcome, explored) = search_level(&prob, options);
    let outcome = match outcome {
        LevelOutcome::Found(family) => {
            let config = prob.config(&family);
            let certificates = verify_witness(space, goal, &config)?;
            Outcome::Found { config, certificates }
        }
        LevelOutcome::Exhausted => Outcome::ExhaustedNotFound,
        LevelOutcome::Budget => Outcome::Budget,
    };
    Ok(SearchResult { space: space.clone(), m: goal.order(), outcome, explored, seed: options.seed })
}

/// First lattice family meeting `f_j(τ_j) = a`, `S^{(m)} = b·I`, unit norms
/// (if requested) and equality in the order-`m` bound.
pub fn search_equality(space: &SearchSpace, m: u32, options: &SearchOptions) -> Result<SearchResult, SearchError> {
    if m == 0 {
        return Err(SearchError::InvalidSpace("order m must be at least 1".into()));
    }
    if !space.constraints.tight {
        return Err(SearchError::InvalidSpace("equality search requires the tight constraint".into()));
    }
    run_single(space, Goal::Equality { m }, options)
}

/// `n = d²` unit-norm pairs with `f_j(τ_j) = 1`, `S = b·I` on `Q_p^d`, and
/// `|f_j(τ_k) f_k(τ_j)| = |d|` for `j ≠ k`.
pub fn search_zauner(prime: Prime, d: usize, precision: u32, options: &SearchOptions) -> Result<SearchResult, SearchError> {
    let gamma = Backend::Padic(prime).integer_valuation(&BigInt::from(d));
    let Valuation::Finite(gamma) = gamma else { unreachable!("d > 0") };
    let space = SearchSpace {
        constraints: Constraints { unit_norms: true, tight: true, gamma: Gamma::Fixed(gamma) },
        ..SearchSpace::new(prime, precision, d, d * d)
    };
    run_single(&space, Goal::Constraints, options)
}

/// Largest `n ≤ n_max` admitting unit-norm pairs with `f_j(τ_j) = a` and all
/// cross products satisfying `gamma`.
///
/// Families are hereditary, so sizes are tried upward and the scan stops at
/// the first size with no family.
pub fn search_equiangular(
    space: &SearchSpace,
    n_max: usize,
    options: &SearchOptions,
) -> Result<EquiangularResult, SearchError> {
    space.validate()?;
    if n_max == 0 {
        return Err(SearchError::InvalidSpace("n_max must be at least 1".into()));
    }
    let mut explored = 0u64;
    let mut best: Option<(usize, FrameConfig)> = None;
    let mut status = EquiangularStatus::Complete;
    for n in 1..=n_max {
        let level_space = SearchSpace { n, ..space.clone() };
        let prob = Problem::new(&level_space, n, Goal::Constraints, options.seed)?;
        let remaining = SearchOptions { budget: options.budget.map(|b| b - explored), ..*options };
        let (outcome, used) = search_level(&prob, &remaining);
        explored += used;
        match outcome {
            LevelOutcome::Found(family) => best = Some((n, prob.config(&family))),
            LevelOutcome::Exhausted => break,
            LevelOutcome::Budget => {
                status = EquiangularStatus::Budget;
                break;
            }
        }
    }
    let (best_n, witness, certificates) = match best {
        Some((n, config)) => {
            let level_space = SearchSpace { n, ..space.clone() };
            let certs = verify_witness(&level_space, Goal::Constraints, &config)?;
            (n, Some(config), Some(certs))
        }
        None => (0, None, None),
    };
    Ok(EquiangularResult {
        space: space.clone(),
        n_max,
        status,
        best_n,
        witness,
        certificates,
        explored,
        seed: options.seed,
    })
}

/// Convenience wrapper with the positional parameters used by the CLI.
pub fn search_equiangular_params(
    prime: Prime,
    d: usize,
    a: Rational,
    gamma: Gamma,
    n_max: usize,
    precision: u32,
    options: &SearchOptions,
) -> Result<EquiangularResult, SearchError> {
    let space = SearchSpace {
        a,
        constraints: Constraints { unit_norms: true, tight: false, gamma },
        ..SearchSpace::new(prime, precision, d, n_max)
    };
    search_equiangular(&space, n_max, options)
}

/// Exhaustive reference: scans every ordered configuration of the lattice,
/// without pruning, for one family size. Intended for small spaces only.
pub fn naive_exists(space: &SearchSpace, goal: Goal) -> bool {
    enumerate_lattice(space).any(|c| verify_witness(space, goal, &c).is_ok())
}

impl SearchResult {
    pub fn is_found(&self) -> bool {
        matches!(self.outcome, Outcome::Found { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn seq() -> SearchOptions {
        SearchOptions { workers: 1, ..Default::default() }
    }

    #[test]
    fn lattice_stream_order_and_offsets() {
        let space = SearchSpace::new(prime(2), 1, 1, 1);
        assert_eq!(space.candidate_count(), BigUint::from(4u8));
        let all: Vec<FrameConfig> = enumerate_lattice(&space).collect();
        assert_eq!(all.len(), 4);
        let flat: Vec<String> = all
            .iter()
            .map(|c| format!("{}{}", c.vectors()[0][0], c.functionals()[0][0]))
            .collect();
        assert_eq!(flat, ["00", "01", "10", "11"]);
        let suffix: Vec<FrameConfig> = LatticeIter::starting_at(&space, 2).collect();
        assert_eq!(suffix, all[2..]);
        assert_eq!(LatticeIter::starting_at(&space, 4).count(), 0);
        assert_eq!(LatticeIter::starting_at(&space, 99).count(), 0);

        let space = SearchSpace::new(prime(3), 1, 2, 2);
        assert_eq!(space.candidate_count(), BigUint::from(3u32).pow(8u32));
    }

    #[test]
    fn scaled_lattice_values() {
        let mut space = SearchSpace::new(prime(3), 2, 1, 1);
        space.scale = 1;
        let values = space.lattice_values();
        assert_eq!(values.len(), 9);
        assert_eq!(values[4], Rational::new(4.into(), 3.into()));
        space.scale = 3;
        assert!(space.validate().is_err());
    }

    #[test]
    fn equality_trivial_line() {
        let mut space = SearchSpace::new(prime(5), 1, 1, 1);
        space.constraints.tight = true;
        let r = search_equality(&space, 1, &seq()).unwrap();
        match &r.outcome {
            Outcome::Found { config, certificates } => {
                assert_eq!(config.vectors()[0], vec![Scalar::one()]);
                assert_eq!(config.functionals()[0], vec![Scalar::one()]);
                assert_eq!(certificates.b, Some(Scalar::one()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_needs_tight_flag() {
        let space = SearchSpace::new(prime(5), 1, 1, 1);
        assert!(matches!(search_equality(&space, 1, &seq()), Err(SearchError::InvalidSpace(_))));
    }

    #[test]
    fn equality_2_3_not_on_integer_lattice() {
        // S = (n/d)·I = (3/2)·I cannot have entries in Z[1/p] for p = 5 or 2.
        for p in [5, 2] {
            let mut space = SearchSpace::new(prime(p), 1, 2, 3);
            space.constraints.tight = true;
            let r = search_equality(&space, 1, &seq()).unwrap();
            assert_eq!(r.outcome, Outcome::ExhaustedNotFound);
        }
    }

    #[test]
    fn equality_found_when_b_is_integral() {
        // d = 2, n = 2 over p = 3: b = 1 and the standard basis attains equality.
        let mut space = SearchSpace::new(prime(3), 1, 2, 2);
        space.constraints.tight = true;
        space.constraints.unit_norms = false;
        let r = search_equality(&space, 1, &seq()).unwrap();
        match &r.outcome {
            Outcome::Found { config, certificates } => {
                assert_eq!(linalg::is_scalar_identity(&linalg::frame_operator(config)), Some(Scalar::one()));
                assert_eq!(certificates.b, Some(Scalar::one()));
            }
            other => panic!("{other:?}"),
        }
        assert!(naive_exists(&space, Goal::Equality { m: 1 }));
    }

    #[test]
    fn zauner_d1() {
        for p in [2, 3, 5] {
            let r = search_zauner(prime(p), 1, 1, &seq()).unwrap();
            match r.outcome {
                Outcome::Found { config, certificates } => {
                    assert_eq!(config.n(), 1);
                    assert_eq!(certificates.b, Some(Scalar::one()));
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn equiangular_p5_d2() {
        let r = search_equiangular_params(prime(5), 2, Rational::one(), Gamma::Fixed(0), 3, 1, &seq()).unwrap();
        assert_eq!(r.best_n, 3);
        assert_eq!(r.status, EquiangularStatus::Complete);
        let w = r.witness.unwrap();
        let space = SearchSpace {
            constraints: Constraints { unit_norms: true, tight: false, gamma: Gamma::Fixed(0) },
            ..SearchSpace::new(prime(5), 1, 2, 3)
        };
        verify_witness(&space, Goal::Constraints, &w).unwrap();
    }

    #[test]
    fn equiangular_single_element() {
        let r = search_equiangular_params(prime(3), 2, Rational::one(), Gamma::Fixed(7), 1, 1, &seq()).unwrap();
        assert_eq!(r.best_n, 1);
        // a = 2 with entries in {0, 1}: f(τ) ≤ 2 requires τ = u = (1, 1).
        let r = search_equiangular_params(prime(2), 2, Rational::from_integer(2.into()), Gamma::Any, 1, 1, &seq())
            .unwrap();
        assert_eq!(r.best_n, 1);
    }

    #[test]
    fn budget_is_reported() {
        let run = |budget| {
            let opts = SearchOptions { budget, ..seq() };
            search_equiangular_params(prime(5), 2, Rational::one(), Gamma::Fixed(0), 4, 1, &opts).unwrap()
        };
        let full = run(None);
        assert_eq!(full.status, EquiangularStatus::Complete);
        assert!(full.explored > 1);
        assert_eq!(run(Some(full.explored)), full);
        let cut = run(Some(full.explored - 1));
        assert_eq!(cut.status, EquiangularStatus::Budget);
        assert_eq!(cut.explored, full.explored - 1);
    }

    #[test]
    fn partitions_agree_with_sequential() {
        for workers in [2, 3, 4, 7] {
            let opts = SearchOptions { workers, ..seq() };
            let a = search_equiangular_params(prime(5), 2, Rational::one(), Gamma::Fixed(0), 3, 1, &seq()).unwrap();
            let b = search_equiangular_params(prime(5), 2, Rational::one(), Gamma::Fixed(0), 3, 1, &opts).unwrap();
            assert_eq!(a, b);
            for budget in [1, 5, 40, 200] {
                let sa = SearchOptions { budget: Some(budget), ..seq() };
                let sb = SearchOptions { budget: Some(budget), ..opts };
                let a = search_zauner(prime(3), 2, 1, &sa).unwrap();
                let b = search_zauner(prime(3), 2, 1, &sb).unwrap();
                assert_eq!(a, b, "workers {workers} budget {budget}");
            }
        }
    }

    #[test]
    fn seeded_runs_are_deterministic() {
        let opts = SearchOptions { seed: Some(42), workers: 3, ..Default::default() };
        let a = search_equiangular_params(prime(5), 2, Rational::one(), Gamma::Common, 4, 1, &opts).unwrap();
        let b = search_equiangular_params(prime(5), 2, Rational::one(), Gamma::Common, 4, 1, &opts).unwrap();
        assert_eq!(a, b);
        let unseeded = search_equiangular_params(prime(5), 2, Rational::one(), Gamma::Common, 4, 1, &seq()).unwrap();
        assert_eq!(a.best_n, unseeded.best_n);
    }

    #[test]
    fn ranges_cover() {
        for len in 0..20 {
            for parts in 1..6 {
                let r = partition_ranges(len, parts);
                assert_eq!(r.len(), parts);
                let covered: Vec<usize> = r.into_iter().flatten().collect();
                assert_eq!(covered, (0..len).collect::<Vec<_>>());
            }
        }
    }
}
