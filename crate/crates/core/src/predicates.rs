//! Closed-form predicate analytics and predicate-level DNF representations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::csp::{eval_predicate, signs_of_mask, Literal, PredicateSpec, Sign, TABLE_ARITY_CAP};
use crate::error::{Error, Result};

/// A DNF over the positions `0..arity` of a predicate input.
///
/// Literal `(s, j)` holds iff input position `j` equals `s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateDnf {
    predicate: PredicateSpec,
    clauses: Vec<Vec<Literal>>,
}

impl PredicateDnf {
    /// Builds the representation and, for arity up to the table cap, checks it
    /// against `predicate` on every input.
    pub fn new(predicate: PredicateSpec, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        predicate.validate()?;
        let arity = predicate.arity();
        for clause in &clauses {
            for (i, l) in clause.iter().enumerate() {
                if l.var >= arity {
                    return Err(Error::IndexOutOfRange { index: l.var, n: arity });
                }
                if clause[..i].contains(l) {
                    return Err(Error::Malformed(format!("duplicate literal on position {}", l.var)));
                }
            }
        }
        let dnf = Self { predicate, clauses };
        if arity <= TABLE_ARITY_CAP {
            for mask in 0..1usize << arity {
                let z = signs_of_mask(mask, arity);
                if dnf.eval(&z)? != eval_predicate(&dnf.predicate, &z)? {
                    return Err(Error::Malformed(format!(
                        "DNF disagrees with {} at input mask {mask:#x}",
                        dnf.predicate
                    )));
                }
            }
        }
        Ok(dnf)
    }

    pub fn predicate(&self) -> &PredicateSpec {
        &self.predicate
    }

    pub fn arity(&self) -> usize {
        self.predicate.arity()
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn eval(&self, z: &[Sign]) -> Result<bool> {
        if z.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: z.len(),
            });
        }
        Ok(self
            .clauses
            .iter()
            .any(|c| c.iter().all(|l| z[l.var] == l.sign)))
    }
}

/// De Morgan form of `¬T_{K,M}`: clause `b` says every position of block `b`
/// is `-1`.
pub fn dnf_of_not_t(k: usize, m: usize) -> Result<PredicateDnf> {
    let predicate = PredicateSpec::not_tkm(k, m)?;
    let clauses = (0..m)
        .map(|b| (b * k..(b + 1) * k).map(Literal::neg).collect())
        .collect();
    PredicateDnf::new(predicate, clauses)
}

/// A canonical DNF for any predicate.
///
/// `SatK` gives `K` unit clauses, `NotTkm` the De Morgan form, `Tkm` the
/// `K^M` product expansion, and truth tables their minterms.
pub fn dnf_of(p: &PredicateSpec) -> Result<PredicateDnf> {
    p.validate()?;
    match p {
        PredicateSpec::SatK { k } => {
            PredicateDnf::new(p.clone(), (0..*k).map(|j| vec![Literal::pos(j)]).collect())
        }
        PredicateSpec::NotTkm { k, m } => dnf_of_not_t(*k, *m),
        PredicateSpec::Tkm { k, m } => {
            let count = (*k as u64).checked_pow(*m as u32).filter(|&c| c <= 1 << TABLE_ARITY_CAP);
            let Some(count) = count else {
                return Err(Error::CapExceeded {
                    what: "T_{K,M} expansion clauses",
                    value: usize::MAX,
                    cap: 1 << TABLE_ARITY_CAP,
                });
            };
            let clauses = (0..count)
                .map(|mut code| {
                    (0..*m)
                        .map(|b| {
                            let pick = (code % *k as u64) as usize;
                            code /= *k as u64;
                            Literal::pos(b * k + pick)
                        })
                        .collect()
                })
                .collect();
            PredicateDnf::new(p.clone(), clauses)
        }
        PredicateSpec::TruthTable { arity, table } => {
            let clauses = table
                .iter()
                .enumerate()
                .filter(|(_, &v)| v)
                .map(|(mask, _)| {
                    signs_of_mask(mask, *arity)
                        .into_iter()
                        .enumerate()
                        .map(|(j, s)| Literal::new(s, j))
                        .collect()
                })
                .collect();
            PredicateDnf::new(p.clone(), clauses)
        }
    }
}

fn pow2(e: usize) -> BigInt {
    BigInt::one() << e
}

/// Number of inputs in `{±1}^arity` where `p` is 0, in closed form.
pub fn zero_count(p: &PredicateSpec) -> Result<BigInt> {
    p.validate()?;
    Ok(match p {
        PredicateSpec::SatK { .. } => BigInt::one(),
        PredicateSpec::Tkm { k, m } => pow2(k * m) - (pow2(*k) - 1u32).pow(*m as u32),
        PredicateSpec::NotTkm { k, m } => (pow2(*k) - 1u32).pow(*m as u32),
        PredicateSpec::TruthTable { table, .. } => BigInt::from(table.iter().filter(|v| !**v).count()),
    })
}

/// Fraction of inputs on which `p` is 1, exactly.
///
/// `T_{K,M}`: `(1-2^-K)^M`; `¬T_{K,M}`: `1-(1-2^-K)^M`; `SAT_K`: `1-2^-K`;
/// truth tables: popcount over `2^arity`.
pub fn satisfying_fraction(p: &PredicateSpec) -> Result<BigRational> {
    let total = pow2(p.arity());
    let ones = &total - zero_count(p)?;
    Ok(BigRational::new(ones, total))
}

/// The same fraction by enumerating every input. Refused above the table cap.
pub fn exhaustive_fraction(p: &PredicateSpec) -> Result<BigRational> {
    let arity = p.arity();
    if arity > TABLE_ARITY_CAP {
        return Err(Error::CapExceeded {
            what: "arity",
            value: arity,
            cap: TABLE_ARITY_CAP,
        });
    }
    let mut ones = 0u64;
    for mask in 0..1usize << arity {
        ones += u64::from(eval_predicate(p, &signs_of_mask(mask, arity))?);
    }
    Ok(BigRational::new(BigInt::from(ones), pow2(arity)))
}

/// Probability that a single fresh `¬T_{K,M}` constraint is violated by a fixed
/// assignment: `(1-2^-K)^M`.
pub fn negated_violation_probability(k: usize, m: usize) -> Result<BigRational> {
    let p = PredicateSpec::not_tkm(k, m)?;
    Ok(BigRational::new(zero_count(&p)?, pow2(k * m)))
}

/// Union bound on a planted assignment failing some of `constraints` fresh
/// `¬T_{K,M}` constraints: `constraints · (1-2^-K)^M`.
pub fn negation_failure_bound(k: usize, m: usize, constraints: u64) -> Result<BigRational> {
    Ok(negated_violation_probability(k, m)? * BigRational::from_integer(BigInt::from(constraints)))
}

/// Exact test of `constraints · (1-2^-K)^M <= 1/constraints`.
pub fn survival_condition_holds(k: usize, m: usize, constraints: u64) -> Result<bool> {
    if constraints == 0 {
        return Ok(true);
    }
    let lhs = negation_failure_bound(k, m, constraints)?;
    let rhs = BigRational::new(BigInt::one(), BigInt::from(constraints));
    Ok(lhs <= rhs)
}

/// The sufficient clause count `2^{K+2} · log2(constraints)`.
pub fn survival_threshold(k: usize, constraints: u64) -> f64 {
    2f64.powi(k as i32 + 2) * (constraints as f64).log2()
}

/// Smallest `M` satisfying [`survival_condition_holds`].
pub fn minimal_survival_m(k: usize, constraints: u64) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let ceiling = survival_threshold(k, constraints).ceil().max(1.0) as usize;
    for m in 1..=ceiling {
        if survival_condition_holds(k, m, constraints)? {
            return Ok(m);
        }
    }
    Ok(ceiling)
}

/// The log-space inequality chain (all logs base 2) bounding
/// `log(c · (1-2^-K)^M)` by `-log c`.
///
/// Returns the successive right-hand sides; each must dominate the previous
/// expression for the bound to go through.
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalChain {
    pub exact: f64,
    pub via_log1p: f64,
    pub via_ratio: f64,
    pub via_half: f64,
    pub target: f64,
}

impl SurvivalChain {
    pub fn holds(&self) -> bool {
        self.exact <= self.via_log1p
            && self.via_log1p <= self.via_ratio
            && self.via_ratio <= self.via_half
            && self.via_half <= self.target
    }
}

pub fn survival_chain(k: usize, m: usize, constraints: u64) -> SurvivalChain {
    let lm = (constraints as f64).log2();
    let q = 2f64.powi(-(k as i32));
    let y = q / (1.0 - q);
    let mf = m as f64;
    SurvivalChain {
        exact: lm + mf * (1.0 - q).log2(),
        via_log1p: lm - mf * (1.0 + y).log2(),
        via_ratio: lm - mf * y,
        via_half: lm - mf * 2f64.powi(-(k as i32 + 1)),
        target: -lm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn smallest_not_t() {
        let d = dnf_of_not_t(1, 1).unwrap();
        assert_eq!(d.clauses(), &[vec![Literal::neg(0)]]);
    }

    #[test]
    fn not_t_clause_counts() {
        for k in 1..=4 {
            for m in 1..=4 {
                let d = dnf_of_not_t(k, m).unwrap();
                assert_eq!(d.clauses().len(), m);
                assert!(d.clauses().iter().all(|c| c.len() == k && c.iter().all(|l| l.sign == Sign::Minus)));
            }
        }
    }

    #[test]
    fn not_t_2_2_matches_predicate_everywhere() {
        let d = dnf_of_not_t(2, 2).unwrap();
        let p = PredicateSpec::not_tkm(2, 2).unwrap();
        for mask in 0..16 {
            let z = signs_of_mask(mask, 4);
            assert_eq!(d.eval(&z).unwrap(), eval_predicate(&p, &z).unwrap());
        }
    }

    #[test]
    fn wrong_dnf_is_rejected() {
        let p = PredicateSpec::not_tkm(2, 1).unwrap();
        assert!(PredicateDnf::new(p, vec![vec![Literal::neg(0)]]).is_err());
    }

    #[test]
    fn fractions() {
        assert_eq!(satisfying_fraction(&PredicateSpec::not_tkm(2, 2).unwrap()).unwrap(), ratio(7, 16));
        assert_eq!(satisfying_fraction(&PredicateSpec::tkm(3, 1).unwrap()).unwrap(), ratio(7, 8));
        assert_eq!(satisfying_fraction(&PredicateSpec::sat(3).unwrap()).unwrap(), ratio(7, 8));
        assert_eq!(zero_count(&PredicateSpec::not_tkm(2, 2).unwrap()).unwrap(), BigInt::from(9));
    }

    #[test]
    fn closed_form_matches_enumeration() {
        let mut preds = vec![];
        for k in 1..=4 {
            preds.push(PredicateSpec::sat(k).unwrap());
            for m in 1..=4 {
                if k * m <= 16 {
                    preds.push(PredicateSpec::tkm(k, m).unwrap());
                    preds.push(PredicateSpec::not_tkm(k, m).unwrap());
                }
            }
        }
        preds.push(PredicateSpec::truth_table(3, vec![true, false, false, true, true, true, false, false]).unwrap());
        for p in &preds {
            assert_eq!(satisfying_fraction(p).unwrap(), exhaustive_fraction(p).unwrap(), "{p}");
        }
    }

    #[test]
    fn canonical_dnfs_verify() {
        for p in [
            PredicateSpec::sat(3).unwrap(),
            PredicateSpec::tkm(2, 3).unwrap(),
            PredicateSpec::tkm(3, 2).unwrap(),
            PredicateSpec::truth_table(2, vec![false, true, true, false]).unwrap(),
        ] {
            dnf_of(&p).unwrap();
        }
        assert_eq!(dnf_of(&PredicateSpec::tkm(2, 3).unwrap()).unwrap().clauses().len(), 8);
    }

    #[test]
    fn survival_inequality() {
        // 256 · (3/4)^128 <= 1/256 comfortably; 256 · (3/4)^38 does not.
        assert!(survival_condition_holds(2, 128, 256).unwrap());
        assert!(survival_condition_holds(2, 64, 256).unwrap());
        assert!(!survival_condition_holds(2, 38, 256).unwrap());
        assert_eq!(minimal_survival_m(2, 256).unwrap(), 39);
        assert_eq!(survival_threshold(2, 256), 128.0);
    }

    #[test]
    fn chain_holds_at_threshold() {
        for k in 1..=5 {
            for &c in &[2u64, 16, 256, 4096] {
                let m = survival_threshold(k, c).ceil() as usize;
                let chain = survival_chain(k, m, c);
                assert!(chain.holds(), "k={k} c={c} {chain:?}");
                assert!(survival_condition_holds(k, m, c).unwrap());
            }
        }
    }
}
