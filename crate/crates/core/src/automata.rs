//! Deterministic automata over `{±1}` that realize DNFs on replicated input.
//!
//! For a DNF with `c` clauses over `n` variables, the automaton reads `c`
//! copies of `x`. Segment `t` checks clause `t` with two states per position,
//! one for "no violation so far" and one for "violated". A clean segment end
//! jumps to an accepting sink; a violated one moves on to the next segment,
//! and after the last segment the run rejects.

use serde::{Deserialize, Serialize};

use crate::csp::Sign;
use crate::error::{Error, Result};
use crate::realize::DnfFormula;

fn symbol(s: Sign) -> usize {
    match s {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfa {
    /// `transitions[q] = [successor on +1, successor on -1]`.
    transitions: Vec<[usize; 2]>,
    accepting: Vec<bool>,
    start: usize,
    sink: Option<usize>,
}

impl Dfa {
    pub fn new(
        transitions: Vec<[usize; 2]>,
        accepting: Vec<bool>,
        start: usize,
        sink: Option<usize>,
    ) -> Result<Self> {
        let states = transitions.len();
        if states == 0 {
            return Err(Error::Malformed("automaton has no states".into()));
        }
        if accepting.len() != states {
            return Err(Error::ArityMismatch {
                expected: states,
                got: accepting.len(),
            });
        }
        for &q in transitions.iter().flatten().chain(std::iter::once(&start)) {
            if q >= states {
                return Err(Error::IndexOutOfRange { index: q, n: states });
            }
        }
        if let Some(s) = sink {
            if s >= states {
                return Err(Error::IndexOutOfRange { index: s, n: states });
            }
            if !accepting[s] || transitions[s] != [s, s] {
                return Err(Error::Malformed(format!("state {s} is not an accepting sink")));
            }
        }
        Ok(Self {
            transitions,
            accepting,
            start,
            sink,
        })
    }

    pub fn states(&self) -> usize {
        self.transitions.len()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn sink(&self) -> Option<usize> {
        self.sink
    }

    pub fn transitions(&self) -> &[[usize; 2]] {
        &self.transitions
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn step(&self, q: usize, s: Sign) -> usize {
        self.transitions[q][symbol(s)]
    }
}

/// `copies` consecutive copies of `x`.
pub fn replicate_input(x: &[Sign], copies: usize) -> Vec<Sign> {
    x.repeat(copies)
}

/// Recovers `x` from a word built by [`replicate_input`] with `copies >= 1`.
pub fn dereplicate(word: &[Sign], copies: usize) -> Result<Vec<Sign>> {
    if copies == 0 || !word.len().is_multiple_of(copies) {
        return Err(Error::InvalidParameter(format!(
            "word of length {} is not {copies} copies",
            word.len()
        )));
    }
    let n = word.len() / copies;
    let x = &word[..n];
    if word.chunks(n.max(1)).any(|c| c != x) {
        return Err(Error::Malformed("copies differ".into()));
    }
    Ok(x.to_vec())
}

pub fn run_dfa(a: &Dfa, word: &[Sign]) -> bool {
    let q = word.iter().fold(a.start, |q, &s| a.step(q, s));
    a.accepting[q]
}

/// Upper bound `2·c·n + 1` on the automaton size.
pub fn state_bound(clauses: usize, vars: usize) -> usize {
    2 * clauses * vars + 1
}

/// The replicated-input automaton, for any number of clauses.
pub fn dnf_to_dfa(f: &DnfFormula) -> Dfa {
    let c = f.clauses().len();
    let n = f.vars();
    if c == 0 {
        return Dfa::new(vec![[0, 0]], vec![false], 0, None).expect("single rejecting state");
    }
    if n == 0 {
        // Every clause over zero variables is empty, hence true.
        return Dfa::new(vec![[0, 0]], vec![true], 0, Some(0)).expect("single accepting sink");
    }

    // allowed[t][p]: bit 0 set if +1 keeps clause t alive at position p, bit 1 for -1.
    let allowed: Vec<Vec<u8>> = f
        .clauses()
        .iter()
        .map(|clause| {
            let mut row = vec![0b11u8; n];
            for l in clause {
                row[l.var] &= match l.sign {
                    Sign::Plus => 0b01,
                    Sign::Minus => 0b10,
                };
            }
            row
        })
        .collect();

    // Layout: per segment t, clean(t, p) for p in 0..n, then violated(t, p)
    // for p in 1..n; then the sink, then the reject state.
    let per_segment = 2 * n - 1;
    let clean = |t: usize, p: usize| t * per_segment + p;
    let violated = |t: usize, p: usize| t * per_segment + n + p - 1;
    let sink = c * per_segment;
    let reject = sink + 1;
    let next_segment = |t: usize| if t + 1 < c { clean(t + 1, 0) } else { reject };

    let total = reject + 1;
    let mut transitions = vec![[0usize; 2]; total];
    let mut accepting = vec![false; total];
    for t in 0..c {
        for p in 0..n {
            let last = p + 1 == n;
            for s in [Sign::Plus, Sign::Minus] {
                let ok = allowed[t][p] >> symbol(s) & 1 == 1;
                transitions[clean(t, p)][symbol(s)] = match (last, ok) {
                    (false, true) => clean(t, p + 1),
                    (false, false) => violated(t, p + 1),
                    (true, true) => sink,
                    (true, false) => next_segment(t),
                };
                if p >= 1 {
                    transitions[violated(t, p)][symbol(s)] =
                        if last { next_segment(t) } else { violated(t, p + 1) };
                }
            }
        }
    }
    transitions[sink] = [sink, sink];
    accepting[sink] = true;
    transitions[reject] = [reject, reject];

    let dfa = Dfa::new(transitions, accepting, clean(0, 0), Some(sink)).expect("construction is well formed");
    assert!(dfa.states() <= state_bound(c, n));
    dfa
}

/// [`dnf_to_dfa`] restricted to at most as many clauses as variables.
pub fn dnf_to_dfa_strict(f: &DnfFormula) -> Result<Dfa> {
    if f.clauses().len() > f.vars() {
        return Err(Error::InvalidParameter(format!(
            "{} clauses exceed {} variables",
            f.clauses().len(),
            f.vars()
        )));
    }
    Ok(dnf_to_dfa(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{signs_of_mask, Literal};
    use crate::realize::eval_dnf;
    use Sign::{Minus, Plus};

    #[test]
    fn replicate_basics() {
        let x = vec![Plus, Minus, Minus];
        assert_eq!(replicate_input(&x, 1), x);
        assert_eq!(replicate_input(&x, 4).len(), 12);
        assert_eq!(dereplicate(&replicate_input(&x, 4), 4).unwrap(), x);
        assert!(dereplicate(&[Plus, Minus], 2).is_err());
    }

    #[test]
    fn single_conjunction() {
        let f = DnfFormula::new(2, vec![vec![Literal::pos(0), Literal::pos(1)]]).unwrap();
        let a = dnf_to_dfa(&f);
        assert!(a.states() <= 5);
        for m in 0..4 {
            let x = signs_of_mask(m, 2);
            assert_eq!(run_dfa(&a, &replicate_input(&x, 1)), m == 3);
        }
    }

    #[test]
    fn empty_clause_accepts_everything() {
        let f = DnfFormula::new(3, vec![vec![], vec![Literal::neg(1)]]).unwrap();
        let a = dnf_to_dfa(&f);
        for m in 0..8 {
            let x = signs_of_mask(m, 3);
            let word = replicate_input(&x, 2);
            // First segment already lands in the sink.
            let q = word[..3].iter().fold(a.start(), |q, &s| a.step(q, s));
            assert_eq!(Some(q), a.sink());
            assert!(run_dfa(&a, &word));
        }
    }

    #[test]
    fn degenerate_shapes() {
        let none = DnfFormula::new(3, vec![]).unwrap();
        let a = dnf_to_dfa(&none);
        assert_eq!(a.states(), 1);
        assert!(!run_dfa(&a, &[]));

        let zero_vars = DnfFormula::new(0, vec![vec![], vec![]]).unwrap();
        let a = dnf_to_dfa(&zero_vars);
        assert_eq!(a.states(), 1);
        assert!(run_dfa(&a, &[]));
    }

    #[test]
    fn contradictory_clause_never_survives() {
        let f = DnfFormula::new(2, vec![vec![Literal::pos(0), Literal::neg(0)]]).unwrap();
        let a = dnf_to_dfa(&f);
        for m in 0..4 {
            let x = signs_of_mask(m, 2);
            assert!(!run_dfa(&a, &x));
            assert!(!eval_dnf(&f, &x).unwrap());
        }
    }

    #[test]
    fn sink_absorbs() {
        let f = DnfFormula::new(1, vec![vec![Literal::pos(0)]]).unwrap();
        let a = dnf_to_dfa(&f);
        assert!(run_dfa(&a, &[Plus, Minus, Minus, Plus]));
    }

    #[test]
    fn empty_word_uses_start_state() {
        let f = DnfFormula::new(1, vec![vec![Literal::pos(0)]]).unwrap();
        let a = dnf_to_dfa(&f);
        assert_eq!(run_dfa(&a, &[]), a.is_accepting(a.start()));
    }

    #[test]
    fn strict_mode_limits_clauses() {
        let f = DnfFormula::new(1, vec![vec![], vec![]]).unwrap();
        assert!(dnf_to_dfa_strict(&f).is_err());
    }

    #[test]
    fn malformed_automata_rejected() {
        assert!(Dfa::new(vec![[0, 1]], vec![false], 0, None).is_err());
        assert!(Dfa::new(vec![[0, 0], [1, 0]], vec![false, true], 0, Some(1)).is_err());
        assert!(Dfa::new(vec![], vec![], 0, None).is_err());
    }
}
