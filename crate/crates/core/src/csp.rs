//! Constraint satisfaction instances over signed tuples.
//!
//! Variables are indexed from 0 internally; the text formats in [`crate::io`]
//! use 1-based signed integers. A `±1` value is a [`Sign`], with
//! [`Sign::Plus`] read as *true*.

use std::fmt;
use std::ops::{Mul, Neg};

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngState;

/// Largest `n` the exhaustive oracles will enumerate.
pub const BRUTE_FORCE_CAP: usize = 24;

/// Rejection attempts allowed per planted constraint.
pub const PLANTED_ATTEMPT_CAP: u64 = 1_000_000;

/// Truth tables (and anything enumerated over `{±1}^arity`) stop here.
pub const TABLE_ARITY_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }

    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bool(self == rhs)
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        Sign::from_bool(self == Sign::Minus)
    }
}

/// `(sign, variable)` pair. In a tuple it contributes `sign · ψ[var]`; in a DNF
/// clause it is satisfied iff the coordinate `var` equals `sign`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub sign: Sign,
    pub var: usize,
}

impl Literal {
    pub fn new(sign: Sign, var: usize) -> Self {
        Self { sign, var }
    }

    pub fn pos(var: usize) -> Self {
        Self::new(Sign::Plus, var)
    }

    pub fn neg(var: usize) -> Self {
        Self::new(Sign::Minus, var)
    }

    /// 1-based signed integer, DIMACS style.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        v * self.sign.value()
    }
}

/// An ordered list of literals over pairwise distinct variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedTuple(Vec<Literal>);

impl SignedTuple {
    pub fn new(entries: Vec<Literal>) -> Result<Self> {
        for (i, a) in entries.iter().enumerate() {
            if entries[..i].iter().any(|b| b.var == a.var) {
                return Err(Error::DuplicateIndex(a.var));
            }
        }
        Ok(Self(entries))
    }

    pub fn from_pairs(pairs: &[(Sign, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(s, v)| Literal::new(s, v)).collect())
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Literal] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Literal> {
        self.0
    }

    pub fn max_var(&self) -> Option<usize> {
        self.0.iter().map(|l| l.var).max()
    }

    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.0.iter().find(|l| l.var >= n) {
            Some(l) => Err(Error::IndexOutOfRange { index: l.var, n }),
            None => Ok(()),
        }
    }

    /// Concatenation; fails if the parts share a variable.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a SignedTuple>) -> Result<Self> {
        let entries = parts.into_iter().flat_map(|t| t.0.iter().copied()).collect();
        Self::new(entries)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredicateSpec {
    /// Disjunction of `k` literals.
    SatK { k: usize },
    /// Conjunction of `m` disjoint `k`-wise disjunctions over consecutive blocks.
    Tkm { k: usize, m: usize },
    /// Complement of [`PredicateSpec::Tkm`].
    NotTkm { k: usize, m: usize },
    /// Lookup table; entry `i` is the value at the input whose position `j`
    /// is `+1` iff bit `j` of `i` is set.
    TruthTable { arity: usize, table: Vec<bool> },
}

impl PredicateSpec {
    pub fn sat(k: usize) -> Result<Self> {
        let p = PredicateSpec::SatK { k };
        p.validate()?;
        Ok(p)
    }

    pub fn tkm(k: usize, m: usize) -> Result<Self> {
        let p = PredicateSpec::Tkm { k, m };
        p.validate()?;
        Ok(p)
    }

    pub fn not_tkm(k: usize, m: usize) -> Result<Self> {
        let p = PredicateSpec::NotTkm { k, m };
        p.validate()?;
        Ok(p)
    }

    pub fn truth_table(arity: usize, table: Vec<bool>) -> Result<Self> {
        let p = PredicateSpec::TruthTable { arity, table };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PredicateSpec::SatK { k } if *k == 0 => {
                Err(Error::InvalidParameter("K must be at least 1".into()))
            }
            PredicateSpec::Tkm { k, m } | PredicateSpec::NotTkm { k, m } if *k == 0 || *m == 0 => {
                Err(Error::InvalidParameter("K and M must be at least 1".into()))
            }
            PredicateSpec::TruthTable { arity, .. } if *arity > TABLE_ARITY_CAP => {
                Err(Error::CapExceeded {
                    what: "truth table arity",
                    value: *arity,
                    cap: TABLE_ARITY_CAP,
                })
            }
            PredicateSpec::TruthTable { arity, table } if table.len() != 1usize << arity => {
                Err(Error::ArityMismatch {
                    expected: 1usize << arity,
                    got: table.len(),
                })
            }
            _ => Ok(()),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            PredicateSpec::SatK { k } => *k,
            PredicateSpec::Tkm { k, m } | PredicateSpec::NotTkm { k, m } => k * m,
            PredicateSpec::TruthTable { arity, .. } => *arity,
        }
    }

    /// The complementary predicate.
    ///
    /// `SatK` has no dedicated complement variant, so it becomes a truth table
    /// (and is refused above the table arity cap).
    pub fn negation(&self) -> Result<Self> {
        match self {
            PredicateSpec::Tkm { k, m } => Ok(PredicateSpec::NotTkm { k: *k, m: *m }),
            PredicateSpec::NotTkm { k, m } => Ok(PredicateSpec::Tkm { k: *k, m: *m }),
            PredicateSpec::TruthTable { arity, table } => Ok(PredicateSpec::TruthTable {
                arity: *arity,
                table: table.iter().map(|b| !b).collect(),
            }),
            PredicateSpec::SatK { .. } => {
                let t = self.to_truth_table()?;
                t.negation()
            }
        }
    }

    pub fn to_truth_table(&self) -> Result<Self> {
        let arity = self.arity();
        if arity > TABLE_ARITY_CAP {
            return Err(Error::CapExceeded {
                what: "truth table arity",
                value: arity,
                cap: TABLE_ARITY_CAP,
            });
        }
        let table = (0..1usize << arity)
            .map(|mask| eval_predicate(self, &signs_of_mask(mask, arity)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PredicateSpec::TruthTable { arity, table })
    }
}

impl fmt::Display for PredicateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateSpec::SatK { k } => write!(f, "SAT_{k}"),
            PredicateSpec::Tkm { k, m } => write!(f, "T_{{{k},{m}}}"),
            PredicateSpec::NotTkm { k, m } => write!(f, "!T_{{{k},{m}}}"),
            PredicateSpec::TruthTable { arity, .. } => write!(f, "table/{arity}"),
        }
    }
}

/// The `±1` vector whose position `j` is `+1` iff bit `j` of `mask` is set.
pub fn signs_of_mask(mask: usize, len: usize) -> Vec<Sign> {
    (0..len).map(|j| Sign::from_bool(mask >> j & 1 == 1)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    predicate: PredicateSpec,
    tuple: SignedTuple,
}

impl Constraint {
    pub fn new(predicate: PredicateSpec, tuple: SignedTuple) -> Result<Self> {
        predicate.validate()?;
        if predicate.arity() != tuple.arity() {
            return Err(Error::ArityMismatch {
                expected: predicate.arity(),
                got: tuple.arity(),
            });
        }
        Ok(Self { predicate, tuple })
    }

    pub fn predicate(&self) -> &PredicateSpec {
        &self.predicate
    }

    pub fn tuple(&self) -> &SignedTuple {
        &self.tuple
    }
}

/// A collection of constraints over variables `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Formula {
    n: usize,
    constraints: Vec<Constraint>,
}

impl Formula {
    pub fn new(n: usize, constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            c.tuple.check_range(n)?;
        }
        Ok(Self { n, constraints })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn into_constraints(self) -> Vec<Constraint> {
        self.constraints
    }
}

/// A `±1` assignment `ψ` to the variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(Vec<Sign>);

impl Assignment {
    pub fn new(values: Vec<Sign>) -> Self {
        Self(values)
    }

    /// Assignment whose variable `i` is `+1` iff bit `i` of `mask` is set.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self((0..n).map(|i| Sign::from_bool(mask >> i & 1 == 1)).collect())
    }

    pub fn random(n: usize, rng: &mut RngState) -> Self {
        Self((0..n).map(|_| Sign::from_bool(rng.gen())).collect())
    }

    pub fn values(&self) -> &[Sign] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, var: usize) -> Option<Sign> {
        self.0.get(var).copied()
    }
}

/// `U_x(ψ)`: entry `j` is `sign_j · ψ[var_j]`.
pub fn apply_tuple(tuple: &SignedTuple, psi: &Assignment) -> Result<Vec<Sign>> {
    tuple
        .entries()
        .iter()
        .map(|l| {
            psi.get(l.var).map(|v| l.sign * v).ok_or(Error::IndexOutOfRange {
                index: l.var,
                n: psi.len(),
            })
        })
        .collect()
}

pub fn eval_predicate(p: &PredicateSpec, z: &[Sign]) -> Result<bool> {
    if z.len() != p.arity() {
        return Err(Error::ArityMismatch {
            expected: p.arity(),
            got: z.len(),
        });
    }
    Ok(match p {
        PredicateSpec::SatK { .. } => z.iter().any(|s| s.is_plus()),
        PredicateSpec::Tkm { k, .. } => all_blocks_hit(z, *k),
        PredicateSpec::NotTkm { k, .. } => !all_blocks_hit(z, *k),
        PredicateSpec::TruthTable { table, .. } => {
            let idx = z
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, s)| acc | (usize::from(s.is_plus()) << j));
            table[idx]
        }
    })
}

fn all_blocks_hit(z: &[Sign], k: usize) -> bool {
    z.chunks(k).all(|block| block.iter().any(|s| s.is_plus()))
}

pub fn eval_constraint(c: &Constraint, psi: &Assignment) -> Result<bool> {
    eval_predicate(&c.predicate, &apply_tuple(&c.tuple, psi)?)
}

/// Fraction of constraints of `j` satisfied by `psi`. The empty formula has value 1.
pub fn value_under(j: &Formula, psi: &Assignment) -> Result<Ratio<u64>> {
    if j.is_empty() {
        return Ok(Ratio::from_integer(1));
    }
    let mut sat = 0u64;
    for c in j.constraints() {
        if eval_constraint(c, psi)? {
            sat += 1;
        }
    }
    Ok(Ratio::new(sat, j.len() as u64))
}

fn guard_brute_force(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_CAP {
        return Err(Error::CapExceeded {
            what: "n",
            value: n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    Ok(())
}

/// Exact `VAL(J)` by enumerating all `2^n` assignments, with a witness.
///
/// Ties go to the assignment with the smallest mask.
pub fn brute_force_val(j: &Formula) -> Result<(Ratio<u64>, Assignment)> {
    guard_brute_force(j.n())?;
    let mut best: Option<(u64, u64)> = None;
    for mask in 0..1u64 << j.n() {
        let psi = Assignment::from_mask(mask, j.n());
        let mut sat = 0u64;
        for c in j.constraints() {
            sat += u64::from(eval_constraint(c, &psi)?);
        }
        if best.is_none_or(|(b, _)| sat > b) {
            best = Some((sat, mask));
            if sat == j.len() as u64 {
                break;
            }
        }
    }
    let (sat, mask) = best.expect("at least one assignment is enumerated");
    let val = if j.is_empty() {
        Ratio::from_integer(1)
    } else {
        Ratio::new(sat, j.len() as u64)
    };
    Ok((val, Assignment::from_mask(mask, j.n())))
}

pub fn brute_force_satisfiable(j: &Formula) -> Result<Option<Assignment>> {
    guard_brute_force(j.n())?;
    'outer: for mask in 0..1u64 << j.n() {
        let psi = Assignment::from_mask(mask, j.n());
        for c in j.constraints() {
            if !eval_constraint(c, &psi)? {
                continue 'outer;
            }
        }
        return Ok(Some(psi));
    }
    Ok(None)
}

/// A uniform signed tuple of the given arity over `n` variables.
///
/// Draw order: `arity` index draws (partial Fisher–Yates over `0..n`), then
/// `arity` sign bits.
pub fn random_tuple(n: usize, arity: usize, rng: &mut RngState) -> Result<SignedTuple> {
    if n < arity {
        return Err(Error::TooFewVariables { n, needed: arity });
    }
    // Sparse view of the permuted array: only displaced slots are stored.
    let mut displaced: Vec<(usize, usize)> = Vec::with_capacity(arity);
    let lookup = |d: &Vec<(usize, usize)>, i: usize| {
        d.iter().rev().find(|(slot, _)| *slot == i).map_or(i, |(_, v)| *v)
    };
    let mut vars = Vec::with_capacity(arity);
    for j in 0..arity {
        let r = rng.gen_range(j..n);
        let vr = lookup(&displaced, r);
        let vj = lookup(&displaced, j);
        displaced.push((r, vj));
        displaced.push((j, vr));
        vars.push(vr);
    }
    let entries = vars
        .into_iter()
        .map(|v| Literal::new(Sign::from_bool(rng.gen()), v))
        .collect();
    Ok(SignedTuple(entries))
}

pub fn random_constraint(n: usize, p: &PredicateSpec, rng: &mut RngState) -> Result<Constraint> {
    let tuple = random_tuple(n, p.arity(), rng)?;
    Ok(Constraint {
        predicate: p.clone(),
        tuple,
    })
}

/// `m` independent uniform `p`-constraints.
pub fn random_formula(n: usize, m: usize, p: &PredicateSpec, rng: &mut RngState) -> Result<Formula> {
    p.validate()?;
    if n < p.arity() {
        return Err(Error::TooFewVariables {
            n,
            needed: p.arity(),
        });
    }
    let constraints = (0..m)
        .map(|_| random_constraint(n, p, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(Formula { n, constraints })
}

/// Each constraint is a uniform `¬p`-constraint with probability 1/2 and a
/// uniform `p`-constraint otherwise. The polarity bit is drawn before the tuple.
pub fn random_mixed_formula(
    n: usize,
    m: usize,
    p: &PredicateSpec,
    rng: &mut RngState,
) -> Result<Formula> {
    p.validate()?;
    let neg = p.negation()?;
    if n < p.arity() {
        return Err(Error::TooFewVariables {
            n,
            needed: p.arity(),
        });
    }
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let negated: bool = rng.gen();
        let pred = if negated { &neg } else { p };
        constraints.push(random_constraint(n, pred, rng)?);
    }
    Ok(Formula { n, constraints })
}

/// A uniform `p`-constraint conditioned on being satisfied by `psi`, by
/// rejection. Returns the constraint and the number of attempts used.
pub fn planted_constraint(
    n: usize,
    p: &PredicateSpec,
    psi: &Assignment,
    rng: &mut RngState,
) -> Result<(Constraint, u64)> {
    if psi.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            got: psi.len(),
        });
    }
    for attempt in 1..=PLANTED_ATTEMPT_CAP {
        let c = random_constraint(n, p, rng)?;
        if eval_constraint(&c, psi)? {
            return Ok((c, attempt));
        }
    }
    Err(Error::RejectionExhausted {
        attempts: PLANTED_ATTEMPT_CAP,
    })
}

/// `m` independent planted constraints; `psi` satisfies the result.
pub fn planted_formula(
    n: usize,
    m: usize,
    p: &PredicateSpec,
    psi: &Assignment,
    rng: &mut RngState,
) -> Result<Formula> {
    p.validate()?;
    if n < p.arity() {
        return Err(Error::TooFewVariables {
            n,
            needed: p.arity(),
        });
    }
    let constraints = (0..m)
        .map(|_| planted_constraint(n, p, psi, rng).map(|(c, _)| c))
        .collect::<Result<Vec<_>>>()?;
    Ok(Formula { n, constraints })
}
