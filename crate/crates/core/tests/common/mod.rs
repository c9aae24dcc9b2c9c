#![allow(dead_code)]

use rand::Rng;
use rsat_core::csp::{Literal, Sign, SignedTuple};
use rsat_core::realize::DnfFormula;
use rsat_core::rng::RngState;

/// Every signed tuple of the given arity over `n` variables.
pub fn all_tuples(n: usize, arity: usize) -> Vec<SignedTuple> {
    fn rec(n: usize, arity: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == arity {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !cur.contains(&v) {
                cur.push(v);
                rec(n, arity, cur, out);
                cur.pop();
            }
        }
    }
    let mut index_lists = Vec::new();
    rec(n, arity, &mut Vec::new(), &mut index_lists);
    let mut out = Vec::with_capacity(index_lists.len() << arity);
    for vars in index_lists {
        for mask in 0..1usize << arity {
            let lits = vars
                .iter()
                .enumerate()
                .map(|(j, &v)| Literal::new(Sign::from_bool(mask >> j & 1 == 1), v))
                .collect();
            out.push(SignedTuple::new(lits).unwrap());
        }
    }
    out
}

/// Each variable joins a clause with probability 2/3, with a random sign.
pub fn random_dnf(vars: usize, clauses: usize, rng: &mut RngState) -> DnfFormula {
    let cs = (0..clauses)
        .map(|_| {
            (0..vars)
                .filter_map(|v| match rng.gen_range(0..3) {
                    0 => None,
                    1 => Some(Literal::pos(v)),
                    _ => Some(Literal::neg(v)),
                })
                .collect()
        })
        .collect();
    DnfFormula::new(vars, cs).unwrap()
}
