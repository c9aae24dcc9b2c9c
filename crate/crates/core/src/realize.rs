//! Realizing tuple hypotheses `h_ψ` by DNF formulas over `{±1}^{2·arity·n}`.
//!
//! A tuple `x` is embedded by [`g_map`], which places exactly one `-1` per tuple
//! position. Any predicate with a `T`-clause DNF then yields, for every `ψ`, a
//! `T`-clause DNF `h` with `h(g(x)) = h_ψ(x)` ([`realize_hypothesis`]).
//!
//! The halfspace bridge goes through the complement: a DNF is negated into a CNF
//! ([`complement_cnf`]) and each CNF clause becomes one halfspace
//! ([`cnf_to_halfspaces`]). The intersection accepts exactly where the DNF is 0.

use serde::{Deserialize, Serialize};

use crate::csp::{apply_tuple, eval_predicate, Assignment, Literal, PredicateSpec, Sign, SignedTuple};
use crate::error::{Error, Result};
use crate::predicates::PredicateDnf;

/// Coordinate `(position, sign, var)` of the embedding space.
///
/// Linear order is position-major, then sign (`+1` before `-1`), then variable:
/// `position · 2n + [sign = -1] · n + var`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GIndex {
    pub position: usize,
    pub sign: Sign,
    pub var: usize,
}

impl GIndex {
    pub fn new(position: usize, sign: Sign, var: usize) -> Self {
        Self { position, sign, var }
    }

    pub fn linear(self, n: usize) -> usize {
        let s = match self.sign {
            Sign::Plus => 0,
            Sign::Minus => 1,
        };
        self.position * 2 * n + s * n + self.var
    }

    pub fn from_linear(idx: usize, n: usize) -> Self {
        let position = idx / (2 * n);
        let rest = idx % (2 * n);
        let sign = if rest < n { Sign::Plus } else { Sign::Minus };
        Self::new(position, sign, rest % n)
    }
}

/// `g(x)`: all `+1` except coordinate `(j, -sign_j, var_j)` for each position `j`.
pub fn g_map(x: &SignedTuple, n: usize) -> Result<Vec<Sign>> {
    x.check_range(n)?;
    let mut v = vec![Sign::Plus; 2 * x.arity() * n];
    for (j, l) in x.entries().iter().enumerate() {
        v[GIndex::new(j, -l.sign, l.var).linear(n)] = Sign::Minus;
    }
    Ok(v)
}

/// Inverse of [`g_map`] on its image.
pub fn g_inverse(v: &[Sign], arity: usize, n: usize) -> Result<SignedTuple> {
    if n == 0 || v.len() != 2 * arity * n {
        return Err(Error::ArityMismatch {
            expected: 2 * arity * n,
            got: v.len(),
        });
    }
    let mut entries = Vec::with_capacity(arity);
    for (j, block) in v.chunks(2 * n).enumerate() {
        let mut hits = block.iter().enumerate().filter(|(_, s)| **s == Sign::Minus);
        match (hits.next(), hits.next()) {
            (Some((idx, _)), None) => {
                let g = GIndex::from_linear(j * 2 * n + idx, n);
                entries.push(Literal::new(-g.sign, g.var));
            }
            _ => {
                return Err(Error::Malformed(format!(
                    "position {j} of embedded vector does not hold exactly one -1"
                )))
            }
        }
    }
    SignedTuple::new(entries)
}

/// `h_ψ(x) = P(U_x(ψ))`.
pub fn h_psi_eval(psi: &Assignment, p: &PredicateSpec, x: &SignedTuple) -> Result<bool> {
    eval_predicate(p, &apply_tuple(x, psi)?)
}

/// A DNF over variables `0..vars`. An empty clause is true; an empty clause
/// list is false.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DnfFormula {
    vars: usize,
    clauses: Vec<Vec<Literal>>,
}

fn check_clauses(vars: usize, clauses: &[Vec<Literal>]) -> Result<()> {
    for clause in clauses {
        for (i, l) in clause.iter().enumerate() {
            if l.var >= vars {
                return Err(Error::IndexOutOfRange { index: l.var, n: vars });
            }
            if clause[..i].contains(l) {
                return Err(Error::Malformed(format!("duplicate literal {}", l.to_dimacs())));
            }
        }
    }
    Ok(())
}

impl DnfFormula {
    pub fn new(vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        check_clauses(vars, &clauses)?;
        Ok(Self { vars, clauses })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    /// Total number of literals.
    pub fn size(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    pub fn push_clause(&mut self, clause: Vec<Literal>) -> Result<()> {
        check_clauses(self.vars, std::slice::from_ref(&clause))?;
        self.clauses.push(clause);
        Ok(())
    }
}

pub fn eval_dnf(f: &DnfFormula, v: &[Sign]) -> Result<bool> {
    if v.len() != f.vars {
        return Err(Error::ArityMismatch {
            expected: f.vars,
            got: v.len(),
        });
    }
    Ok(f.clauses.iter().any(|c| c.iter().all(|l| v[l.var] == l.sign)))
}

/// The DNF `h` with `h ∘ g = h_ψ` for the predicate represented by `pd`.
///
/// Clause `t` of the result holds, for every literal `(b, j)` of clause `t` of
/// `pd` and every variable `i`, the positive literal on coordinate
/// `(j, ψ_i · b, i)`.
pub fn realize_hypothesis(psi: &Assignment, pd: &PredicateDnf, n: usize) -> Result<DnfFormula> {
    if psi.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            got: psi.len(),
        });
    }
    let vars = 2 * pd.arity() * n;
    let clauses = pd
        .clauses()
        .iter()
        .map(|clause| {
            clause
                .iter()
                .flat_map(|lit| {
                    psi.values()
                        .iter()
                        .enumerate()
                        .map(move |(i, &s)| Literal::pos(GIndex::new(lit.var, s * lit.sign, i).linear(n)))
                })
                .collect()
        })
        .collect();
    Ok(DnfFormula { vars, clauses })
}

/// A CNF over variables `0..vars`. An empty clause is false; an empty clause
/// list is true.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CnfFormula {
    vars: usize,
    clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    pub fn new(vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        check_clauses(vars, &clauses)?;
        Ok(Self { vars, clauses })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn eval(&self, v: &[Sign]) -> Result<bool> {
        if v.len() != self.vars {
            return Err(Error::ArityMismatch {
                expected: self.vars,
                got: v.len(),
            });
        }
        Ok(self.clauses.iter().all(|c| c.iter().any(|l| v[l.var] == l.sign)))
    }
}

/// De Morgan complement: `¬∨_t ∧_r l_{t,r} = ∧_t ∨_r ¬l_{t,r}`.
pub fn complement_cnf(f: &DnfFormula) -> CnfFormula {
    CnfFormula {
        vars: f.vars,
        clauses: f
            .clauses
            .iter()
            .map(|c| c.iter().map(|l| Literal::new(-l.sign, l.var)).collect())
            .collect(),
    }
}

/// Accepts `x ∈ {±1}^n` iff `⟨w, x⟩ >= threshold`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Halfspace {
    pub weights: Vec<i64>,
    pub threshold: i64,
}

impl Halfspace {
    pub fn accepts(&self, x: &[Sign]) -> Result<bool> {
        if x.len() != self.weights.len() {
            return Err(Error::ArityMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        let dot: i64 = self.weights.iter().zip(x).map(|(w, s)| w * s.value()).sum();
        Ok(dot >= self.threshold)
    }
}

/// One halfspace per CNF clause: a clause with `k` literals `(s_i, v_i)` maps to
/// `Σ s_i x_{v_i} >= 2 - k`, which fails only when every literal is false.
pub fn cnf_to_halfspaces(f: &CnfFormula) -> Vec<Halfspace> {
    f.clauses
        .iter()
        .map(|clause| {
            let mut weights = vec![0i64; f.vars];
            for l in clause {
                weights[l.var] += l.sign.value();
            }
            Halfspace {
                weights,
                threshold: 2 - clause.len() as i64,
            }
        })
        .collect()
}

pub fn intersection_accepts(hs: &[Halfspace], x: &[Sign]) -> Result<bool> {
    for h in hs {
        if !h.accepts(x)? {
            return Ok(false);
        }
    }
    Ok(true)
}
