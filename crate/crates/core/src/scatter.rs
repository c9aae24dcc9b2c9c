//! Scattered samples, concentration bounds, reference learners and the
//! learner-driven distinguisher.

use std::collections::HashMap;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::csp::{signs_of_mask, Assignment, Literal, Sign, TABLE_ARITY_CAP};
use crate::error::{Error, Result};
use crate::predicates::dnf_of_not_t;
use crate::realize::{eval_dnf, realize_hypothesis, DnfFormula};
use crate::rng::RngState;
use crate::sample::{Example, LabeledSample};

/// Confidence parameter handed to the learner by [`distinguisher`].
pub const DISTINGUISHER_DELTA: f64 = 0.25;

/// Largest `n` searched by [`BruteForceAssignment`].
pub const ASSIGNMENT_VAR_CAP: usize = 16;

/// Largest number of candidate DNFs enumerated by [`BruteForceDnf`].
pub const DNF_CANDIDATE_CAP: u64 = 2_000_000;

/// A classifier `{±1}^len → {0, 1}`.
pub trait Hypothesis {
    fn input_len(&self) -> usize;
    fn predict(&self, x: &[Sign]) -> Result<bool>;
}

impl<H: Hypothesis + ?Sized> Hypothesis for Box<H> {
    fn input_len(&self) -> usize {
        (**self).input_len()
    }
    fn predict(&self, x: &[Sign]) -> Result<bool> {
        (**self).predict(x)
    }
}

impl Hypothesis for DnfFormula {
    fn input_len(&self) -> usize {
        self.vars()
    }
    fn predict(&self, x: &[Sign]) -> Result<bool> {
        eval_dnf(self, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstantHypothesis {
    pub len: usize,
    pub label: bool,
}

impl Hypothesis for ConstantHypothesis {
    fn input_len(&self) -> usize {
        self.len
    }
    fn predict(&self, x: &[Sign]) -> Result<bool> {
        check_len(self.len, x)?;
        Ok(self.label)
    }
}

/// An explicit table, defaulting to `fallback` on unseen instances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LookupHypothesis {
    pub len: usize,
    pub table: HashMap<Vec<Sign>, bool>,
    pub fallback: bool,
}

impl Hypothesis for LookupHypothesis {
    fn input_len(&self) -> usize {
        self.len
    }
    fn predict(&self, x: &[Sign]) -> Result<bool> {
        check_len(self.len, x)?;
        Ok(self.table.get(x).copied().unwrap_or(self.fallback))
    }
}

/// Dense table over `{±1}^len`; entry `i` is the value at the input whose
/// coordinate `j` is `+1` iff bit `j` of `i` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTableHypothesis {
    len: usize,
    table: Vec<bool>,
}

impl TruthTableHypothesis {
    pub fn new(len: usize, table: Vec<bool>) -> Result<Self> {
        if len > TABLE_ARITY_CAP {
            return Err(Error::CapExceeded {
                what: "truth table length",
                value: len,
                cap: TABLE_ARITY_CAP,
            });
        }
        if table.len() != 1 << len {
            return Err(Error::ArityMismatch {
                expected: 1 << len,
                got: table.len(),
            });
        }
        Ok(Self { len, table })
    }

    /// Evaluates `h` on every input.
    pub fn tabulate(h: &dyn Hypothesis) -> Result<Self> {
        let len = h.input_len();
        if len > TABLE_ARITY_CAP {
            return Err(Error::CapExceeded {
                what: "truth table length",
                value: len,
                cap: TABLE_ARITY_CAP,
            });
        }
        let table = (0..1usize << len)
            .map(|m| h.predict(&signs_of_mask(m, len)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(len, table)
    }

    pub fn index_of(x: &[Sign]) -> usize {
        x.iter()
            .enumerate()
            .filter(|(_, s)| s.is_plus())
            .fold(0, |acc, (j, _)| acc | 1 << j)
    }
}

impl Hypothesis for TruthTableHypothesis {
    fn input_len(&self) -> usize {
        self.len
    }
    fn predict(&self, x: &[Sign]) -> Result<bool> {
        check_len(self.len, x)?;
        Ok(self.table[Self::index_of(x)])
    }
}

/// `1 - h`.
pub struct Complement<H>(pub H);

impl<H: Hypothesis> Hypothesis for Complement<H> {
    fn input_len(&self) -> usize {
        self.0.input_len()
    }
    fn predict(&self, x: &[Sign]) -> Result<bool> {
        self.0.predict(x).map(|b| !b)
    }
}

fn check_len(len: usize, x: &[Sign]) -> Result<()> {
    if x.len() != len {
        return Err(Error::ArityMismatch {
            expected: len,
            got: x.len(),
        });
    }
    Ok(())
}

/// Fraction of examples of `s` that `h` mislabels.
pub fn empirical_error(h: &dyn Hypothesis, s: &LabeledSample) -> Result<Ratio<u64>> {
    if s.is_empty() {
        return Err(Error::InvalidParameter("empirical error of an empty sample".into()));
    }
    check_len(h.input_len(), &vec![Sign::Plus; s.instance_len()])?;
    let mut wrong = 0u64;
    for e in s.examples() {
        if h.predict(&e.instance)? != e.label {
            wrong += 1;
        }
    }
    Ok(Ratio::new(wrong, s.len() as u64))
}

fn error_count(h: &dyn Hypothesis, examples: &[&Example]) -> Result<u64> {
    let mut wrong = 0;
    for e in examples {
        if h.predict(&e.instance)? != e.label {
            wrong += 1;
        }
    }
    Ok(wrong)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceMeter {
    /// Examples handed out by the oracle.
    pub draws: u64,
    /// Hypothesis evaluations performed by the learner.
    pub evaluations: u64,
}

/// Draws examples uniformly, with replacement, from a fixed sample.
pub struct ExampleOracle<'a> {
    sample: &'a LabeledSample,
    rng: &'a mut RngState,
    meter: ResourceMeter,
}

impl<'a> ExampleOracle<'a> {
    pub fn new(sample: &'a LabeledSample, rng: &'a mut RngState) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::InvalidParameter("oracle over an empty sample".into()));
        }
        Ok(Self {
            sample,
            rng,
            meter: ResourceMeter::default(),
        })
    }

    pub fn draw(&mut self) -> &'a Example {
        let i = self.rng.gen_range(0..self.sample.len());
        self.meter.draws += 1;
        &self.sample.examples()[i]
    }

    pub fn draw_many(&mut self, count: usize) -> Vec<&'a Example> {
        (0..count).map(|_| self.draw()).collect()
    }

    pub fn instance_len(&self) -> usize {
        self.sample.instance_len()
    }

    pub fn record_evaluations(&mut self, count: u64) {
        self.meter.evaluations += count;
    }

    pub fn meter(&self) -> ResourceMeter {
        self.meter
    }
}

pub trait Learner {
    fn name(&self) -> &'static str;
    fn learn(
        &self,
        oracle: &mut ExampleOracle<'_>,
        epsilon: f64,
        delta: f64,
        instance_len: usize,
    ) -> Result<Box<dyn Hypothesis>>;
}

fn check_accuracy(epsilon: f64, delta: f64) -> Result<()> {
    if !((0.0..1.0).contains(&epsilon) && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= epsilon < 1 and 0 < delta < 1, got {epsilon}, {delta}"
        )));
    }
    Ok(())
}

/// Draws for agnostic empirical-risk minimization over `exp(ln_class_size)`
/// hypotheses to land within `epsilon / 4` of the best, with probability
/// `1 - delta`. Needs `epsilon > 0`.
pub fn agnostic_draws(ln_class_size: f64, epsilon: f64, delta: f64) -> Result<usize> {
    if epsilon <= 0.0 {
        return Err(Error::InvalidParameter(
            "a default draw budget needs epsilon > 0; pass an explicit budget".into(),
        ));
    }
    let tol = epsilon / 4.0;
    Ok(((ln_class_size + (2.0 / delta).ln()) / (2.0 * tol * tol)).ceil() as usize)
}

/// Majority label among `labels`; ties go to 0.
fn majority(labels: impl Iterator<Item = bool>) -> bool {
    let (pos, total) = labels.fold((0usize, 0usize), |(p, t), l| (p + usize::from(l), t + 1));
    2 * pos > total
}

/// Memorizes drawn examples (majority label per instance, 0 when unseen).
/// Stops once every instance of the domain has been seen, or at `max_draws`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Memorizer {
    pub max_draws: usize,
}

impl Default for Memorizer {
    fn default() -> Self {
        Self { max_draws: 1_000_000 }
    }
}

impl Learner for Memorizer {
    fn name(&self) -> &'static str {
        "memorizer"
    }

    fn learn(
        &self,
        oracle: &mut ExampleOracle<'_>,
        epsilon: f64,
        delta: f64,
        instance_len: usize,
    ) -> Result<Box<dyn Hypothesis>> {
        check_accuracy(epsilon, delta)?;
        let domain = (instance_len <= TABLE_ARITY_CAP).then(|| 1usize << instance_len);
        let mut votes: HashMap<Vec<Sign>, (u64, u64)> = HashMap::new();
        for _ in 0..self.max_draws {
            let e = oracle.draw();
            let v = votes.entry(e.instance.clone()).or_default();
            v.0 += u64::from(e.label);
            v.1 += 1;
            if domain == Some(votes.len()) {
                break;
            }
        }
        let table = votes.into_iter().map(|(x, (p, t))| (x, 2 * p > t)).collect();
        Ok(Box::new(LookupHypothesis {
            len: instance_len,
            table,
            fallback: false,
        }))
    }
}

/// Returns a constant: `fixed` if set, else the majority of `draws` labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[derive(Default)]
pub struct ConstantLearner {
    pub fixed: Option<bool>,
    pub draws: Option<usize>,
}


impl Learner for ConstantLearner {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn learn(
        &self,
        oracle: &mut ExampleOracle<'_>,
        epsilon: f64,
        delta: f64,
        instance_len: usize,
    ) -> Result<Box<dyn Hypothesis>> {
        check_accuracy(epsilon, delta)?;
        let label = match self.fixed {
            Some(b) => b,
            None => {
                let draws = match self.draws {
                    Some(d) => d,
                    None => agnostic_draws(2f64.ln(), epsilon, delta)?,
                };
                majority(oracle.draw_many(draws).into_iter().map(|e| e.label))
            }
        };
        Ok(Box::new(ConstantHypothesis {
            len: instance_len,
            label,
        }))
    }
}

/// Empirical-risk minimization over all DNFs with at most `max_clauses`
/// terms on the instance coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteForceDnf {
    pub max_clauses: usize,
    pub draws: Option<usize>,
}

/// All `3^len` conjunctions, each coordinate absent, positive or negative.
fn all_terms(len: usize) -> Vec<Vec<Literal>> {
    let count = 3usize.pow(len as u32);
    (0..count)
        .map(|mut code| {
            let mut term = Vec::new();
            for var in 0..len {
                match code % 3 {
                    1 => term.push(Literal::pos(var)),
                    2 => term.push(Literal::neg(var)),
                    _ => {}
                }
                code /= 3;
            }
            term
        })
        .collect()
}

/// Number of multisets of size `0..=c` from `t` items.
fn dnf_candidate_count(terms: u64, max_clauses: usize) -> Option<u64> {
    let mut total = 0u64;
    for c in 0..=max_clauses as u64 {
        // C(terms + c - 1, c)
        let mut binom: u128 = 1;
        for i in 0..c {
            binom = binom * u128::from(terms + i) / u128::from(i + 1);
            if binom > u128::from(u64::MAX) {
                return None;
            }
        }
        total = total.checked_add(binom as u64)?;
    }
    Some(total)
}

impl Learner for BruteForceDnf {
    fn name(&self) -> &'static str {
        "bf-dnf"
    }

    fn learn(
        &self,
        oracle: &mut ExampleOracle<'_>,
        epsilon: f64,
        delta: f64,
        instance_len: usize,
    ) -> Result<Box<dyn Hypothesis>> {
        check_accuracy(epsilon, delta)?;
        let terms = all_terms_checked(instance_len)?;
        let count = dnf_candidate_count(terms.len() as u64, self.max_clauses).unwrap_or(u64::MAX);
        if count > DNF_CANDIDATE_CAP {
            return Err(Error::CapExceeded {
                what: "DNF candidates",
                value: count as usize,
                cap: DNF_CANDIDATE_CAP as usize,
            });
        }
        let draws = match self.draws {
            Some(d) => d,
            None => agnostic_draws((count as f64).ln(), epsilon, delta)?,
        };
        let drawn = oracle.draw_many(draws);

        // Per-term truth vectors over the drawn examples.
        let term_hits: Vec<Vec<bool>> = terms
            .iter()
            .map(|t| {
                drawn
                    .iter()
                    .map(|e| t.iter().all(|l| e.instance[l.var] == l.sign))
                    .collect()
            })
            .collect();

        let mut best: (u64, Vec<usize>) = (u64::MAX, Vec::new());
        let mut chosen = Vec::with_capacity(self.max_clauses);
        let mut evaluations = 0u64;
        search_dnfs(&term_hits, &drawn, self.max_clauses, 0, &mut chosen, &mut best, &mut evaluations);
        oracle.record_evaluations(evaluations);
        let clauses = best.1.iter().map(|&i| terms[i].clone()).collect();
        Ok(Box::new(DnfFormula::new(instance_len, clauses)?))
    }
}

fn all_terms_checked(len: usize) -> Result<Vec<Vec<Literal>>> {
    // 3^13 is already past the candidate cap for a single clause.
    if len > 12 {
        return Err(Error::CapExceeded {
            what: "DNF learner instance length",
            value: len,
            cap: 12,
        });
    }
    Ok(all_terms(len))
}

fn search_dnfs(
    term_hits: &[Vec<bool>],
    drawn: &[&Example],
    remaining: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    best: &mut (u64, Vec<usize>),
    evaluations: &mut u64,
) {
    *evaluations += 1;
    let wrong = drawn
        .iter()
        .enumerate()
        .filter(|(i, e)| chosen.iter().any(|&t| term_hits[t][*i]) != e.label)
        .count() as u64;
    if wrong < best.0 {
        *best = (wrong, chosen.clone());
    }
    if remaining == 0 || best.0 == 0 {
        return;
    }
    for t in from..term_hits.len() {
        chosen.push(t);
        search_dnfs(term_hits, drawn, remaining - 1, t, chosen, best, evaluations);
        chosen.pop();
    }
}

/// Empirical-risk minimization over `h_ψ`, `ψ ∈ {±1}^n`, where `h_ψ` labels a
/// tuple 1 iff `ψ` violates `T_{K,M}` on it. Instances are `g`-embedded
/// tuples of arity `K·M`, and the returned hypothesis is the realized DNF.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteForceAssignment {
    pub k: usize,
    pub m: usize,
    pub draws: Option<usize>,
}

impl BruteForceAssignment {
    pub fn variables_for(&self, instance_len: usize) -> Result<usize> {
        let per_var = 2 * self.k * self.m;
        if per_var == 0 || !instance_len.is_multiple_of(per_var) {
            return Err(Error::ArityMismatch {
                expected: per_var,
                got: instance_len,
            });
        }
        let n = instance_len / per_var;
        if n > ASSIGNMENT_VAR_CAP {
            return Err(Error::CapExceeded {
                what: "assignment learner variables",
                value: n,
                cap: ASSIGNMENT_VAR_CAP,
            });
        }
        Ok(n)
    }
}

impl Learner for BruteForceAssignment {
    fn name(&self) -> &'static str {
        "bf-psi"
    }

    fn learn(
        &self,
        oracle: &mut ExampleOracle<'_>,
        epsilon: f64,
        delta: f64,
        instance_len: usize,
    ) -> Result<Box<dyn Hypothesis>> {
        check_accuracy(epsilon, delta)?;
        let n = self.variables_for(instance_len)?;
        let pd = dnf_of_not_t(self.k, self.m)?;
        let draws = match self.draws {
            Some(d) => d,
            None => agnostic_draws(n as f64 * 2f64.ln(), epsilon, delta)?,
        };
        let drawn = oracle.draw_many(draws);
        let mut best: Option<(u64, DnfFormula)> = None;
        for mask in 0..1u64 << n {
            let psi = Assignment::from_mask(mask, n);
            let h = realize_hypothesis(&psi, &pd, n)?;
            let wrong = error_count(&h, &drawn)?;
            oracle.record_evaluations(drawn.len() as u64);
            if best.as_ref().is_none_or(|(w, _)| wrong < *w) {
                let done = wrong == 0;
                best = Some((wrong, h));
                if done {
                    break;
                }
            }
        }
        let (_, h) = best.expect("at least one assignment");
        Ok(Box::new(h))
    }
}

/// Learner choice by name: `memorizer`, `constant`, `bf-dnf`, `bf-psi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LearnerKind {
    Memorizer,
    Constant,
    BruteForceDnf { max_clauses: usize },
    BruteForceAssignment { k: usize, m: usize },
}

impl LearnerKind {
    pub fn build(self, draws: Option<usize>) -> Box<dyn Learner> {
        match self {
            Self::Memorizer => Box::new(match draws {
                Some(d) => Memorizer { max_draws: d },
                None => Memorizer::default(),
            }),
            Self::Constant => Box::new(ConstantLearner { fixed: None, draws }),
            Self::BruteForceDnf { max_clauses } => Box::new(BruteForceDnf { max_clauses, draws }),
            Self::BruteForceAssignment { k, m } => Box::new(BruteForceAssignment { k, m, draws }),
        }
    }
}

/// The four reference learners with default budgets.
pub fn reference_learners(max_clauses: usize, k: usize, m: usize) -> Vec<Box<dyn Learner>> {
    [
        LearnerKind::Memorizer,
        LearnerKind::Constant,
        LearnerKind::BruteForceDnf { max_clauses },
        LearnerKind::BruteForceAssignment { k, m },
    ]
    .into_iter()
    .map(|kind| kind.build(None))
    .collect()
}

/// `(p, β)`: every fixed hypothesis has empirical error at most `β` with
/// probability at most `2^{-p}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterParams {
    pub p: f64,
    pub beta: f64,
}

impl ScatterParams {
    pub fn new(p: f64, beta: f64) -> Result<Self> {
        if !(p > 0.0 && beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "scatter parameters need p > 0 and 0 < beta < 1, got ({p}, {beta})"
            )));
        }
        Ok(Self { p, beta })
    }

    pub fn tail_bound(&self) -> f64 {
        (-self.p).exp2()
    }
}

/// Scatter parameters of `m` examples with fair-coin labels.
///
/// Err_S(f) ≤ 1/4 means at most m/4 heads in m tosses; Hoeffding bounds this
/// by `exp(-2 (1/4)^2 m) = exp(-m/8) ≤ 2^{-m/8}`.
pub fn hoeffding_scatter(m: u64) -> Result<ScatterParams> {
    ScatterParams::new(m as f64 / 8.0, 0.25)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundMode {
    Kl,
    Quadratic,
}

/// Binary relative entropy `D(β‖α)` in nats.
pub fn binary_kl(beta: f64, alpha: f64) -> f64 {
    fn term(p: f64, q: f64) -> f64 {
        if p == 0.0 {
            0.0
        } else if q == 0.0 {
            f64::INFINITY
        } else {
            p * (p / q).ln()
        }
    }
    term(beta, alpha) + term(1.0 - beta, 1.0 - alpha)
}

/// Bound on the probability that the average of `n` independent `[0, 1]`
/// variables with mean at most `α` reaches `β`.
pub fn linial_luria_bound(alpha: f64, beta: f64, n: f64, mode: BoundMode) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) || n < 0.0 {
        return Err(Error::Domain(format!("need 0 <= alpha < beta <= 1, n >= 0; got ({alpha}, {beta}, {n})")));
    }
    if beta <= alpha {
        return Err(Error::Domain(format!("beta = {beta} must exceed alpha = {alpha}")));
    }
    Ok(match mode {
        BoundMode::Kl => (-binary_kl(beta, alpha) * n).exp(),
        BoundMode::Quadratic => (-2.0 * (beta - alpha).powi(2) * n).exp(),
    })
}

/// Failure bound for one packing block scanned over `n` draws: mean
/// `1 - 2^{-K}`, deviation `2^{-(K+1)}`, `floor(n / 2K)` independent trials.
pub fn packing_concentration(k: usize, n: u64, mode: BoundMode) -> Result<f64> {
    let alpha = 1.0 - (-(k as f64)).exp2();
    let beta = alpha + (-(k as f64) - 1.0).exp2();
    let trials = (n / (2 * k as u64)) as f64;
    linial_luria_bound(alpha, beta, trials, mode)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisScatter {
    pub hits: u64,
    pub frequency: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterReport {
    pub trials: u64,
    pub params: ScatterParams,
    /// `2^{-p}`.
    pub bound: f64,
    /// Three binomial standard deviations at the bound.
    pub slack: f64,
    pub per_hypothesis: Vec<HypothesisScatter>,
    /// Trials in which some hypothesis had error ≤ β.
    pub union_hits: u64,
    pub union_frequency: f64,
    /// `|H| · 2^{-p}`.
    pub union_bound: f64,
    pub union_slack: f64,
    pub union_flagged: bool,
}

impl ScatterReport {
    pub fn any_flagged(&self) -> bool {
        self.union_flagged || self.per_hypothesis.iter().any(|h| h.flagged)
    }
}

fn three_sigma(p: f64, trials: u64) -> f64 {
    let p = p.min(1.0);
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Draws `trials` samples (trial `i` uses `RngState::derive(seed, i)`) and
/// counts how often each hypothesis reaches error ≤ β.
pub fn empirical_scatter_check<F>(
    mut sampler: F,
    hypotheses: &[&dyn Hypothesis],
    params: ScatterParams,
    trials: u64,
    seed: u64,
) -> Result<ScatterReport>
where
    F: FnMut(&mut RngState) -> Result<LabeledSample>,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("scatter check needs at least one trial".into()));
    }
    let beta = Ratio::new((params.beta * 1e9).round() as u64, 1_000_000_000);
    let mut hits = vec![0u64; hypotheses.len()];
    let mut union_hits = 0u64;
    for i in 0..trials {
        let mut rng = RngState::derive(seed, i);
        let s = sampler(&mut rng)?;
        let mut any = false;
        for (h, count) in hypotheses.iter().zip(hits.iter_mut()) {
            if empirical_error(*h, &s)? <= beta {
                *count += 1;
                any = true;
            }
        }
        union_hits += u64::from(any);
    }
    let bound = params.tail_bound();
    let slack = three_sigma(bound, trials);
    let per_hypothesis = hits
        .into_iter()
        .map(|h| {
            let frequency = h as f64 / trials as f64;
            HypothesisScatter {
                hits: h,
                frequency,
                flagged: frequency > bound + slack,
            }
        })
        .collect();
    let union_bound = hypotheses.len() as f64 * bound;
    let union_slack = three_sigma(union_bound, trials);
    let union_frequency = union_hits as f64 / trials as f64;
    Ok(ScatterReport {
        trials,
        params,
        bound,
        slack,
        per_hypothesis,
        union_hits,
        union_frequency,
        union_bound,
        union_slack,
        union_flagged: union_frequency > union_bound + union_slack,
    })
}

/// `m` uniform instances of length `len` with fair-coin labels.
pub fn uniform_label_sample(len: usize, m: usize, rng: &mut RngState) -> LabeledSample {
    let examples = (0..m)
        .map(|_| Example {
            instance: (0..len).map(|_| Sign::from_bool(rng.gen())).collect(),
            label: rng.gen(),
        })
        .collect();
    LabeledSample::new(len, examples).expect("uniform lengths")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Realizable,
    Unrealizable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguishOutcome {
    pub verdict: Verdict,
    pub error: Ratio<u64>,
    pub meter: ResourceMeter,
}

/// Runs `learner` with accuracy `beta` and confidence 1/4 on an oracle that
/// resamples `s`, then answers "realizable" iff the returned hypothesis has
/// error at most `beta` on `s`.
pub fn distinguisher(
    s: &LabeledSample,
    learner: &dyn Learner,
    beta: Ratio<u64>,
    rng: &mut RngState,
) -> Result<DistinguishOutcome> {
    if s.is_empty() {
        return Err(Error::InvalidParameter("distinguisher needs a non-empty sample".into()));
    }
    let beta_f = *beta.numer() as f64 / *beta.denom() as f64;
    let mut oracle = ExampleOracle::new(s, rng)?;
    let h = learner
        .learn(&mut oracle, beta_f, DISTINGUISHER_DELTA, s.instance_len())
        .map_err(|e| match e {
            Error::Learner(_) => e,
            other => Error::Learner(format!("{}: {other}", learner.name())),
        })?;
    let error = empirical_error(h.as_ref(), s).map_err(|e| Error::Learner(format!("{}: {e}", learner.name())))?;
    Ok(DistinguishOutcome {
        verdict: if error <= beta {
            Verdict::Realizable
        } else {
            Verdict::Unrealizable
        },
        error,
        meter: oracle.meter(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{apply_tuple, eval_predicate, random_tuple, PredicateSpec};
    use crate::realize::g_map;
    use proptest::prelude::*;

    fn full_domain_sample(len: usize, f: impl Fn(&[Sign]) -> bool) -> LabeledSample {
        let ex = (0..1usize << len)
            .map(|m| {
                let x = signs_of_mask(m, len);
                let label = f(&x);
                Example { instance: x, label }
            })
            .collect();
        LabeledSample::new(len, ex).unwrap()
    }

    #[test]
    fn error_of_realizer_and_complement() {
        let h = DnfFormula::new(3, vec![vec![Literal::pos(0), Literal::neg(2)]]).unwrap();
        let s = full_domain_sample(3, |x| h.predict(x).unwrap());
        assert_eq!(empirical_error(&h, &s).unwrap(), Ratio::new(0, 1));
        let c = Complement(h.clone());
        assert_eq!(empirical_error(&c, &s).unwrap(), Ratio::new(1, 1));
        let k = ConstantHypothesis { len: 3, label: false };
        assert_eq!(empirical_error(&k, &s).unwrap(), Ratio::new(2, 8));
        assert_eq!(empirical_error(&Complement(k), &s).unwrap(), Ratio::new(6, 8));
        assert!(empirical_error(&h, &LabeledSample::empty(3)).is_err());
        assert!(empirical_error(&h, &full_domain_sample(2, |_| true)).is_err());
    }

    proptest! {
        #[test]
        fn error_matches_direct_loop(seed in any::<u64>(), m in 1usize..40) {
            let mut rng = RngState::new(seed);
            let s = uniform_label_sample(5, m, &mut rng);
            let h = DnfFormula::new(5, vec![vec![Literal::pos(1)], vec![Literal::neg(3), Literal::pos(4)]]).unwrap();
            let mut wrong = 0u64;
            for e in s.examples() {
                let v = (e.instance[1] == Sign::Plus) || (e.instance[3] == Sign::Minus && e.instance[4] == Sign::Plus);
                if v != e.label { wrong += 1; }
            }
            prop_assert_eq!(empirical_error(&h, &s).unwrap(), Ratio::new(wrong, m as u64));
            let c = Complement(h.clone());
            prop_assert_eq!(empirical_error(&c, &s).unwrap(), Ratio::from_integer(1) - empirical_error(&h, &s).unwrap());
        }

        #[test]
        fn kl_below_quadratic(a in 0.0f64..0.999, d in 0.0001f64..1.0, n in 0.0f64..500.0) {
            let b = (a + d * (1.0 - a)).min(1.0);
            prop_assume!(b > a);
            let kl = linial_luria_bound(a, b, n, BoundMode::Kl).unwrap();
            let q = linial_luria_bound(a, b, n, BoundMode::Quadratic).unwrap();
            prop_assert!(kl <= q * (1.0 + 1e-12));
        }
    }

    #[test]
    fn hoeffding_values() {
        let p = hoeffding_scatter(800).unwrap();
        assert_eq!(p.p, 100.0);
        assert_eq!(p.beta, 0.25);
        assert_eq!(p.tail_bound(), 2f64.powi(-100));
        assert_eq!(hoeffding_scatter(8).unwrap().p, 1.0);
        assert!(hoeffding_scatter(0).is_err());
    }

    #[test]
    fn bound_domain_and_limits() {
        assert!(linial_luria_bound(0.5, 0.5, 10.0, BoundMode::Kl).is_err());
        assert!(linial_luria_bound(0.6, 0.5, 10.0, BoundMode::Quadratic).is_err());
        let eps = 1e-9;
        for mode in [BoundMode::Kl, BoundMode::Quadratic] {
            let v = linial_luria_bound(0.3, 0.3 + eps, 10.0, mode).unwrap();
            assert!((v - 1.0).abs() < 1e-6);
        }
        assert_eq!(linial_luria_bound(0.0, 0.5, 3.0, BoundMode::Kl).unwrap(), 0.0);
        assert!(linial_luria_bound(0.5, 1.0, 3.0, BoundMode::Kl).unwrap() > 0.0);
    }

    #[test]
    fn packing_concentration_closed_form() {
        for k in [2usize, 3] {
            for n in [64u64, 256] {
                let got = packing_concentration(k, n, BoundMode::Quadratic).unwrap();
                let dev = 2f64.powi(-(k as i32 + 1));
                let want = (-2.0 * dev * dev * (n / (2 * k as u64)) as f64).exp();
                assert!(((got - want) / want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn memorizer_reproduces_covering_sample() {
        let s = full_domain_sample(4, |x| x[0] != x[3]);
        let mut rng = RngState::new(1);
        let mut oracle = ExampleOracle::new(&s, &mut rng).unwrap();
        let h = Memorizer::default().learn(&mut oracle, 0.1, 0.25, 4).unwrap();
        assert_eq!(empirical_error(h.as_ref(), &s).unwrap(), Ratio::new(0, 1));
        let out = distinguisher(&s, &Memorizer::default(), Ratio::new(0, 1), &mut RngState::new(2)).unwrap();
        assert_eq!(out.verdict, Verdict::Realizable);
        assert!(out.meter.draws >= 16);
    }

    #[test]
    fn constant_learners() {
        let s = full_domain_sample(3, |_| true);
        let zero = ConstantLearner {
            fixed: Some(false),
            draws: None,
        };
        let out = distinguisher(&s, &zero, Ratio::new(9, 10), &mut RngState::new(3)).unwrap();
        assert_eq!(out.verdict, Verdict::Unrealizable);
        assert_eq!(out.error, Ratio::new(1, 1));

        let skew = full_domain_sample(3, |x| x[0] == Sign::Plus || x[1] == Sign::Plus);
        let mut rng = RngState::new(4);
        let mut oracle = ExampleOracle::new(&skew, &mut rng).unwrap();
        let h = ConstantLearner::default().learn(&mut oracle, 0.25, 0.25, 3).unwrap();
        assert_eq!(empirical_error(h.as_ref(), &skew).unwrap(), Ratio::new(2, 8));
    }

    #[test]
    fn dnf_learner_finds_two_term_target() {
        let target = DnfFormula::new(3, vec![vec![Literal::pos(0), Literal::pos(1)], vec![Literal::neg(2)]]).unwrap();
        let s = full_domain_sample(3, |x| target.predict(x).unwrap());
        let learner = BruteForceDnf {
            max_clauses: 2,
            draws: Some(400),
        };
        let out = distinguisher(&s, &learner, Ratio::new(0, 1), &mut RngState::new(5)).unwrap();
        assert_eq!(out.verdict, Verdict::Realizable);
        assert!(out.meter.evaluations > 0);
        let capped = BruteForceDnf {
            max_clauses: 3,
            draws: None,
        };
        let big = full_domain_sample(9, |_| true);
        assert!(matches!(
            distinguisher(&big, &capped, Ratio::new(1, 4), &mut RngState::new(5)),
            Err(Error::Learner(_))
        ));
    }

    #[test]
    fn assignment_learner_on_realizable_sample() {
        let (k, m, n) = (2, 2, 6);
        let mut rng = RngState::new(6);
        let psi = Assignment::random(n, &mut rng);
        let p = PredicateSpec::Tkm { k, m };
        let ex = (0..300)
            .map(|_| {
                let x = random_tuple(n, k * m, &mut rng).unwrap();
                let label = !eval_predicate(&p, &apply_tuple(&x, &psi).unwrap()).unwrap();
                Example {
                    instance: g_map(&x, n).unwrap(),
                    label,
                }
            })
            .collect();
        let s = LabeledSample::new(2 * k * m * n, ex).unwrap();
        let learner = BruteForceAssignment { k, m, draws: Some(2000) };
        let out = distinguisher(&s, &learner, Ratio::new(0, 1), &mut RngState::new(7)).unwrap();
        assert_eq!(out.error, Ratio::new(0, 1));
        assert_eq!(out.verdict, Verdict::Realizable);
    }

    #[test]
    fn assignment_learner_caps() {
        let l = BruteForceAssignment { k: 2, m: 2, draws: None };
        assert!(l.variables_for(8 * 17).is_err());
        assert!(l.variables_for(7).is_err());
        assert_eq!(l.variables_for(64).unwrap(), 8);
    }

    #[test]
    fn distinguisher_refuses_empty_sample() {
        let s = LabeledSample::empty(3);
        assert!(distinguisher(&s, &Memorizer::default(), Ratio::new(1, 4), &mut RngState::new(0)).is_err());
    }

    #[test]
    fn distinguisher_is_deterministic() {
        let mut rng = RngState::new(8);
        let s = uniform_label_sample(3, 40, &mut rng);
        let l = BruteForceDnf { max_clauses: 1, draws: None };
        let a = distinguisher(&s, &l, Ratio::new(1, 4), &mut RngState::new(9)).unwrap();
        let b = distinguisher(&s, &l, Ratio::new(1, 4), &mut RngState::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn truth_table_tabulation() {
        let h = DnfFormula::new(3, vec![vec![Literal::pos(0), Literal::neg(2)]]).unwrap();
        let t = TruthTableHypothesis::tabulate(&h).unwrap();
        for m in 0..8 {
            let x = signs_of_mask(m, 3);
            assert_eq!(TruthTableHypothesis::index_of(&x), m);
            assert_eq!(t.predict(&x).unwrap(), h.predict(&x).unwrap());
        }
    }

    #[test]
    fn scatter_negative_control() {
        let h = ConstantHypothesis { len: 4, label: true };
        let params = hoeffding_scatter(32).unwrap();
        let report = empirical_scatter_check(
            |rng| {
                let mut s = uniform_label_sample(4, 32, rng);
                s = LabeledSample::new(
                    4,
                    s.examples().iter().map(|e| Example { instance: e.instance.clone(), label: true }).collect(),
                )?;
                Ok(s)
            },
            &[&h],
            params,
            200,
            1,
        )
        .unwrap();
        assert_eq!(report.per_hypothesis[0].frequency, 1.0);
        assert!(report.any_flagged());
    }

    #[test]
    fn scatter_singleton_uniform() {
        let h = ConstantHypothesis { len: 4, label: false };
        let params = hoeffding_scatter(32).unwrap();
        let report = empirical_scatter_check(|rng| Ok(uniform_label_sample(4, 32, rng)), &[&h], params, 20_000, 2).unwrap();
        assert!(report.per_hypothesis[0].frequency <= 2f64.powi(-4) + report.slack);
        assert!(!report.any_flagged());
    }

    #[test]
    fn union_grows_at_most_additively() {
        let a = ConstantHypothesis { len: 4, label: false };
        let b = DnfFormula::new(4, vec![vec![Literal::pos(0)]]).unwrap();
        let params = hoeffding_scatter(16).unwrap();
        let one = empirical_scatter_check(|rng| Ok(uniform_label_sample(4, 16, rng)), &[&a], params, 5000, 3).unwrap();
        let two =
            empirical_scatter_check(|rng| Ok(uniform_label_sample(4, 16, rng)), &[&a, &b], params, 5000, 3).unwrap();
        assert!(two.union_hits <= one.per_hypothesis[0].hits + two.per_hypothesis[1].hits);
        assert!(two.union_hits >= one.union_hits);
    }
}
