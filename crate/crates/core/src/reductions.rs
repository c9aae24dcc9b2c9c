//! The reduction chain from `SAT_K` formulas to labeled samples.
//!
//! 1. [`pack_blocks`]: greedily pack `M` variable-disjoint clauses from each
//!    block of `B` consecutive clauses into one `T_{K,M}` constraint, or stop
//!    with an early "satisfiable" verdict.
//! 2. [`negate_half`]: replace each constraint, with probability 1/2, by a fresh
//!    uniform `¬T_{K,M}` constraint.
//! 3. [`formula_to_sample`]: read the mixed formula as a sample over tuples,
//!    `¬T` labeled 1 and `T` labeled 0, then embed tuples with
//!    [`crate::realize::g_map`].

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::csp::{random_tuple, Constraint, Formula, PredicateSpec, SignedTuple};
use crate::error::{Error, Result};
use crate::realize::{g_inverse, g_map};
use crate::rng::RngState;
use crate::sample::{Example, LabeledSample};
use crate::stats::{chi_square_independence, ChiSquareTest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionParams {
    /// Clause width `K` of the source formula.
    pub k: usize,
    /// Clauses packed per output constraint (`M`).
    pub pack: usize,
    /// Block size `B`: consecutive source clauses scanned per output constraint.
    pub block: usize,
}

/// Result of the desk-scale feasibility check `M <= floor(B / 2K) / 2^{K+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub bound: f64,
    pub feasible: bool,
}

impl ReductionParams {
    pub fn new(k: usize, pack: usize, block: usize) -> Result<Self> {
        let p = Self { k, pack, block };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.pack == 0 {
            return Err(Error::InvalidParameter("K and M must be at least 1".into()));
        }
        if self.block < self.pack {
            return Err(Error::InvalidParameter(format!(
                "block size {} is smaller than M = {}",
                self.block, self.pack
            )));
        }
        Ok(())
    }

    /// The regime where packing failure is exponentially unlikely on random
    /// input. Outside it the reduction is still correct, only less likely to
    /// reach the last stage.
    pub fn feasibility(&self) -> Feasibility {
        let prefix = (self.block / (2 * self.k)) as f64;
        let bound = prefix / 2f64.powi(self.k as i32 + 1);
        Feasibility {
            bound,
            feasible: self.pack as f64 <= bound,
        }
    }

    pub fn packed_predicate(&self) -> PredicateSpec {
        PredicateSpec::Tkm {
            k: self.k,
            m: self.pack,
        }
    }
}

/// Handling of a trailing partial block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RemainderPolicy {
    /// Refuse formulas whose length is not a multiple of the block size.
    #[default]
    Strict,
    /// Drop the trailing partial block.
    Truncate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedFormula {
    pub formula: Formula,
    /// For each packed constraint, indices of the source clauses it joins, in
    /// selection order.
    pub provenance: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PackResult {
    /// Some block held fewer than `M` disjoint clauses.
    Satisfiable { block: usize, selected: usize },
    Packed(PackedFormula),
}

pub fn pack_blocks(j: &Formula, params: &ReductionParams, policy: RemainderPolicy) -> Result<PackResult> {
    params.validate()?;
    for c in j.constraints() {
        if *c.predicate() != (PredicateSpec::SatK { k: params.k }) {
            return Err(Error::ArityMismatch {
                expected: params.k,
                got: c.tuple().arity(),
            });
        }
    }
    let rem = j.len() % params.block;
    if rem != 0 && policy == RemainderPolicy::Strict {
        return Err(Error::InvalidParameter(format!(
            "{} constraints is not a multiple of block size {}",
            j.len(),
            params.block
        )));
    }
    let usable = j.len() - rem;
    let packed_pred = params.packed_predicate();
    let mut constraints = Vec::with_capacity(usable / params.block);
    let mut provenance = Vec::with_capacity(usable / params.block);
    let mut used: HashSet<usize> = HashSet::new();
    for (b, block) in j.constraints()[..usable].chunks(params.block).enumerate() {
        used.clear();
        let mut chosen = Vec::with_capacity(params.pack);
        for (r, c) in block.iter().enumerate() {
            if chosen.len() == params.pack {
                break;
            }
            let vars = c.tuple().entries();
            if vars.iter().all(|l| !used.contains(&l.var)) {
                used.extend(vars.iter().map(|l| l.var));
                chosen.push(b * params.block + r);
            }
        }
        if chosen.len() < params.pack {
            return Ok(PackResult::Satisfiable {
                block: b,
                selected: chosen.len(),
            });
        }
        let tuple = SignedTuple::concat(chosen.iter().map(|&i| j.constraints()[i].tuple()))?;
        constraints.push(Constraint::new(packed_pred.clone(), tuple)?);
        provenance.push(chosen);
    }
    Ok(PackResult::Packed(PackedFormula {
        formula: Formula::new(j.n(), constraints)?,
        provenance,
    }))
}

/// Per constraint: a fair coin (drawn first); on heads the constraint is
/// replaced by a fresh uniform `¬T_{K,M}` constraint, on tails it is kept.
pub fn negate_half(j: &Formula, rng: &mut RngState) -> Result<Formula> {
    let mut out = Vec::with_capacity(j.len());
    for c in j.constraints() {
        let (k, m) = match c.predicate() {
            PredicateSpec::Tkm { k, m } => (*k, *m),
            other => {
                return Err(Error::InvalidParameter(format!("expected T_{{K,M}} constraint, got {other}")))
            }
        };
        if rng.gen::<bool>() {
            let tuple = random_tuple(j.n(), k * m, rng)?;
            out.push(Constraint::new(PredicateSpec::NotTkm { k, m }, tuple)?);
        } else {
            out.push(c.clone());
        }
    }
    Formula::new(j.n(), out)
}

/// A labeled sample over signed tuples of arity `K·M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleSample {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub examples: Vec<(SignedTuple, bool)>,
}

fn polarity_shape(j: &Formula) -> Result<Option<(usize, usize)>> {
    let mut shape = None;
    for c in j.constraints() {
        let km = match c.predicate() {
            PredicateSpec::Tkm { k, m } | PredicateSpec::NotTkm { k, m } => (*k, *m),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "expected T/¬T constraint, got {other}"
                )))
            }
        };
        match shape {
            None => shape = Some(km),
            Some(s) if s != km => {
                return Err(Error::ArityMismatch {
                    expected: s.0 * s.1,
                    got: km.0 * km.1,
                })
            }
            _ => {}
        }
    }
    Ok(shape)
}

/// `¬T` constraint with tuple `x` becomes `(x, 1)`; `T` becomes `(x, 0)`.
///
/// An empty formula has no shape; `(k, m)` defaults to `(1, 1)`.
pub fn formula_to_sample(j: &Formula) -> Result<TupleSample> {
    let (k, m) = polarity_shape(j)?.unwrap_or((1, 1));
    let examples = j
        .constraints()
        .iter()
        .map(|c| (c.tuple().clone(), matches!(c.predicate(), PredicateSpec::NotTkm { .. })))
        .collect();
    Ok(TupleSample {
        n: j.n(),
        k,
        m,
        examples,
    })
}

/// Inverse of [`formula_to_sample`].
pub fn sample_to_formula(s: &TupleSample) -> Result<Formula> {
    let constraints = s
        .examples
        .iter()
        .map(|(x, label)| {
            let p = if *label {
                PredicateSpec::not_tkm(s.k, s.m)?
            } else {
                PredicateSpec::tkm(s.k, s.m)?
            };
            Constraint::new(p, x.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Formula::new(s.n, constraints)
}

/// Embeds every tuple with `g`.
pub fn embed_sample(s: &TupleSample) -> Result<LabeledSample> {
    let len = 2 * s.k * s.m * s.n;
    let examples = s
        .examples
        .iter()
        .map(|(x, label)| {
            Ok(Example {
                instance: g_map(x, s.n)?,
                label: *label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledSample::new(len, examples)
}

/// Inverse of [`embed_sample`].
pub fn decode_sample(s: &LabeledSample, k: usize, m: usize) -> Result<TupleSample> {
    let arity = k * m;
    if arity == 0 || !s.instance_len().is_multiple_of(2 * arity) {
        return Err(Error::ArityMismatch {
            expected: 2 * arity,
            got: s.instance_len(),
        });
    }
    let n = s.instance_len() / (2 * arity);
    let examples = s
        .examples()
        .iter()
        .map(|e| Ok((g_inverse(&e.instance, arity, n)?, e.label)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TupleSample { n, k, m, examples })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSample {
    pub packed: PackedFormula,
    pub mixed: Formula,
    pub tuples: TupleSample,
    pub sample: LabeledSample,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PipelineOutcome {
    Satisfiable { block: usize, selected: usize },
    Sample(Box<PipelineSample>),
}

/// `pack_blocks → negate_half → formula_to_sample → g`.
pub fn full_pipeline(
    j: &Formula,
    params: &ReductionParams,
    policy: RemainderPolicy,
    rng: &mut RngState,
) -> Result<PipelineOutcome> {
    let packed = match pack_blocks(j, params, policy)? {
        PackResult::Satisfiable { block, selected } => return Ok(PipelineOutcome::Satisfiable { block, selected }),
        PackResult::Packed(p) => p,
    };
    let mixed = negate_half(&packed.formula, rng)?;
    let mut tuples = formula_to_sample(&mixed)?;
    tuples.k = params.k;
    tuples.m = params.pack;
    let sample = embed_sample(&tuples)?;
    Ok(PipelineOutcome::Sample(Box::new(PipelineSample {
        packed,
        mixed,
        tuples,
        sample,
    })))
}

/// Chi-square test of independence between the label and the `(sign, var)` of
/// tuple position `position`, over a `2 × 2n` contingency table.
pub fn label_independence_test(s: &TupleSample, position: usize) -> Result<ChiSquareTest> {
    let cats = 2 * s.n;
    let mut table = vec![vec![0u64; cats]; 2];
    for (x, label) in &s.examples {
        let l = x.entries().get(position).ok_or(Error::IndexOutOfRange {
            index: position,
            n: x.arity(),
        })?;
        let cat = 2 * l.var + usize::from(!l.sign.is_plus());
        table[usize::from(*label)][cat] += 1;
    }
    chi_square_independence(&table)
}
