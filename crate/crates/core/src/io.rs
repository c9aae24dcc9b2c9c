//! Line-oriented text formats.
//!
//! Every format starts with a `p <kind> ...` header; lines starting with `c`
//! and blank lines are ignored. Variables are 1-based in files and 0-based in
//! memory. Emitters produce the canonical form, which parses back to the same
//! value and re-emits byte-identically.
//!
//! | kind     | header                  | body line                          |
//! |----------|-------------------------|------------------------------------|
//! | `gcsp`   | `p gcsp n m K M`        | tag `S`, `T` or `N`, then literals |
//! | `sample` | `p sample len m`        | `±string label`                    |
//! | `dnf`    | `p dnf vars clauses`    | `lit… 0`                           |
//! | `dfa`    | `p dfa states start sink` | `succ+ succ- accept` (sink -1 = none) |
//! | `hs`     | `p hs vars count`       | `threshold w_1 … w_vars`           |

use std::fmt::Write as _;

use thiserror::Error;

use crate::automata::Dfa;
use crate::csp::{Assignment, Constraint, Formula, Literal, PredicateSpec, Sign, SignedTuple};
use crate::error::{Error, Result};
use crate::realize::{DnfFormula, Halfspace};
use crate::sample::{Example, LabeledSample};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing `p {0}` header")]
    MissingHeader(&'static str),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("second header line")]
    DuplicateHeader,
    #[error("header declares {expected} records, body has {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: i64, n: usize },
    #[error("variable {0} repeated within a tuple")]
    DuplicateIndex(i64),
    #[error("bad token `{0}`")]
    BadToken(String),
    #[error("unknown constraint tag `{0}`")]
    UnknownTag(String),
    #[error("label `{0}` is not 0 or 1")]
    BadLabel(String),
    #[error("clause is not terminated by 0")]
    MissingTerminator,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn err<T>(line: usize, kind: ParseErrorKind) -> std::result::Result<T, ParseError> {
    Err(ParseError { line, kind })
}

type PResult<T> = std::result::Result<T, ParseError>;

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('c'))
}

fn last_line(text: &str) -> usize {
    text.lines().count().max(1)
}

fn parse_int<T: std::str::FromStr>(line: usize, tok: &str) -> PResult<T> {
    tok.parse().or_else(|_| err(line, ParseErrorKind::BadToken(tok.to_string())))
}

struct Body<'a> {
    header_line: usize,
    fields: Vec<&'a str>,
    rows: Vec<(usize, &'a str)>,
}

/// Splits off the header `p <kind> f1 f2 ...` with exactly `fields` fields.
fn split_header<'a>(text: &'a str, kind: &'static str, fields: usize) -> PResult<Body<'a>> {
    let mut lines = content_lines(text);
    let (header_line, header) = match lines.next() {
        Some(h) => h,
        None => return err(last_line(text), ParseErrorKind::MissingHeader(kind)),
    };
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.first() != Some(&"p") {
        return err(header_line, ParseErrorKind::MissingHeader(kind));
    }
    if toks.get(1) != Some(&kind) || toks.len() != fields + 2 {
        return err(
            header_line,
            ParseErrorKind::MalformedHeader(format!("expected `p {kind}` with {fields} fields, got `{header}`")),
        );
    }
    let rows: Vec<(usize, &str)> = lines.collect();
    if let Some(&(l, _)) = rows.iter().find(|(_, r)| r.starts_with('p')) {
        return err(l, ParseErrorKind::DuplicateHeader);
    }
    Ok(Body {
        header_line,
        fields: toks[2..].to_vec(),
        rows,
    })
}

fn header_usize(body: &Body<'_>, i: usize) -> PResult<usize> {
    body.fields[i].parse().or_else(|_| {
        err(
            body.header_line,
            ParseErrorKind::MalformedHeader(format!("field `{}` is not a count", body.fields[i])),
        )
    })
}

fn check_count(text: &str, expected: usize, got: usize) -> PResult<()> {
    if expected != got {
        return err(last_line(text), ParseErrorKind::CountMismatch { expected, got });
    }
    Ok(())
}

/// Signed 1-based literals to 0-based ones, checking range and distinctness.
fn parse_literals(line: usize, toks: &[&str], n: usize, distinct: bool) -> PResult<Vec<Literal>> {
    let mut out: Vec<Literal> = Vec::with_capacity(toks.len());
    for tok in toks {
        let v: i64 = parse_int(line, tok)?;
        if v == 0 {
            return err(line, ParseErrorKind::BadToken(tok.to_string()));
        }
        let index = v.unsigned_abs() as usize;
        if index > n {
            return err(line, ParseErrorKind::IndexOutOfRange { index: v.abs(), n });
        }
        let lit = Literal::new(if v > 0 { Sign::Plus } else { Sign::Minus }, index - 1);
        if distinct && out.iter().any(|l| l.var == lit.var) {
            return err(line, ParseErrorKind::DuplicateIndex(v.abs()));
        }
        if !distinct && out.contains(&lit) {
            return err(line, ParseErrorKind::DuplicateIndex(v.abs()));
        }
        out.push(lit);
    }
    Ok(out)
}

fn join_literals(lits: &[Literal]) -> String {
    lits.iter().map(|l| l.to_dimacs().to_string()).collect::<Vec<_>>().join(" ")
}

fn invalid(line: usize, e: Error) -> ParseError {
    ParseError {
        line,
        kind: ParseErrorKind::Invalid(e.to_string()),
    }
}

pub fn parse_gcnf(text: &str) -> std::result::Result<Formula, ParseError> {
    let body = split_header(text, "gcsp", 4)?;
    let n = header_usize(&body, 0)?;
    let m = header_usize(&body, 1)?;
    let k = header_usize(&body, 2)?;
    let pack = header_usize(&body, 3)?;
    if k == 0 || pack == 0 {
        return err(body.header_line, ParseErrorKind::MalformedHeader("K and M must be positive".into()));
    }
    let mut constraints = Vec::with_capacity(body.rows.len());
    for &(line, row) in &body.rows {
        let toks: Vec<&str> = row.split_whitespace().collect();
        let predicate = match toks[0] {
            "S" => PredicateSpec::SatK { k },
            "T" => PredicateSpec::Tkm { k, m: pack },
            "N" => PredicateSpec::NotTkm { k, m: pack },
            other => return err(line, ParseErrorKind::UnknownTag(other.to_string())),
        };
        let lits = &toks[1..];
        if lits.len() != predicate.arity() {
            return err(
                line,
                ParseErrorKind::ArityMismatch {
                    expected: predicate.arity(),
                    got: lits.len(),
                },
            );
        }
        let tuple = SignedTuple::new(parse_literals(line, lits, n, true)?).map_err(|e| invalid(line, e))?;
        constraints.push(Constraint::new(predicate, tuple).map_err(|e| invalid(line, e))?);
    }
    check_count(text, m, constraints.len())?;
    Formula::new(n, constraints).map_err(|e| invalid(body.header_line, e))
}

/// Canonical text. `K` and `M` come from the constraints (1 when absent);
/// formulas mixing shapes or using truth tables have no encoding.
pub fn emit_gcnf(f: &Formula) -> Result<String> {
    let mut shape: Option<(usize, Option<usize>)> = None;
    for c in f.constraints() {
        let (k, m) = match c.predicate() {
            PredicateSpec::SatK { k } => (*k, None),
            PredicateSpec::Tkm { k, m } | PredicateSpec::NotTkm { k, m } => (*k, Some(*m)),
            PredicateSpec::TruthTable { .. } => {
                return Err(Error::InvalidParameter("truth-table predicates have no gcsp encoding".into()))
            }
        };
        shape = match shape {
            None => Some((k, m)),
            Some((k0, m0)) => {
                if k0 != k || (m0.is_some() && m.is_some() && m0 != m) {
                    return Err(Error::InvalidParameter("constraints disagree on K or M".into()));
                }
                Some((k0, m0.or(m)))
            }
        };
    }
    let (k, m) = shape.map_or((1, 1), |(k, m)| (k, m.unwrap_or(1)));
    let mut out = format!("p gcsp {} {} {} {}\n", f.n(), f.len(), k, m);
    for c in f.constraints() {
        let tag = match c.predicate() {
            PredicateSpec::SatK { .. } => 'S',
            PredicateSpec::Tkm { .. } => 'T',
            _ => 'N',
        };
        writeln!(out, "{tag} {}", join_literals(c.tuple().entries())).expect("string write");
    }
    Ok(out)
}

fn parse_signs(line: usize, tok: &str) -> PResult<Vec<Sign>> {
    tok.chars()
        .map(|ch| match ch {
            '+' => Ok(Sign::Plus),
            '-' => Ok(Sign::Minus),
            _ => err(line, ParseErrorKind::BadToken(tok.to_string())),
        })
        .collect()
}

fn sign_string(v: &[Sign]) -> String {
    v.iter().map(|s| s.as_char()).collect()
}

/// A file with no content lines is the empty sample over length 0.
pub fn parse_sample(text: &str) -> std::result::Result<LabeledSample, ParseError> {
    if content_lines(text).next().is_none() {
        return Ok(LabeledSample::empty(0));
    }
    let body = split_header(text, "sample", 2)?;
    let len = header_usize(&body, 0)?;
    let m = header_usize(&body, 1)?;
    let mut examples = Vec::with_capacity(body.rows.len());
    for &(line, row) in &body.rows {
        let toks: Vec<&str> = row.split_whitespace().collect();
        let (instance, label) = match (len, toks.as_slice()) {
            (0, [label]) => (Vec::new(), *label),
            (_, [x, label]) => (parse_signs(line, x)?, *label),
            _ => return err(line, ParseErrorKind::BadToken(row.to_string())),
        };
        if instance.len() != len {
            return err(
                line,
                ParseErrorKind::ArityMismatch {
                    expected: len,
                    got: instance.len(),
                },
            );
        }
        let label = match label {
            "0" => false,
            "1" => true,
            other => return err(line, ParseErrorKind::BadLabel(other.to_string())),
        };
        examples.push(Example { instance, label });
    }
    check_count(text, m, examples.len())?;
    LabeledSample::new(len, examples).map_err(|e| invalid(body.header_line, e))
}

pub fn emit_sample(s: &LabeledSample) -> String {
    let mut out = format!("p sample {} {}\n", s.instance_len(), s.len());
    for e in s.examples() {
        writeln!(out, "{} {}", sign_string(&e.instance), u8::from(e.label)).expect("string write");
    }
    out
}

pub fn parse_dnf(text: &str) -> std::result::Result<DnfFormula, ParseError> {
    let body = split_header(text, "dnf", 2)?;
    let vars = header_usize(&body, 0)?;
    let count = header_usize(&body, 1)?;
    let mut clauses = Vec::with_capacity(body.rows.len());
    for &(line, row) in &body.rows {
        let toks: Vec<&str> = row.split_whitespace().collect();
        match toks.split_last() {
            Some((&"0", lits)) => clauses.push(parse_literals(line, lits, vars, false)?),
            _ => return err(line, ParseErrorKind::MissingTerminator),
        }
    }
    check_count(text, count, clauses.len())?;
    DnfFormula::new(vars, clauses).map_err(|e| invalid(body.header_line, e))
}

pub fn emit_dnf(f: &DnfFormula) -> String {
    let mut out = format!("p dnf {} {}\n", f.vars(), f.clauses().len());
    for clause in f.clauses() {
        if clause.is_empty() {
            out.push_str("0\n");
        } else {
            writeln!(out, "{} 0", join_literals(clause)).expect("string write");
        }
    }
    out
}

pub fn parse_dfa(text: &str) -> std::result::Result<Dfa, ParseError> {
    let body = split_header(text, "dfa", 3)?;
    let states = header_usize(&body, 0)?;
    let start = header_usize(&body, 1)?;
    let sink: i64 = parse_int(body.header_line, body.fields[2])?;
    let sink = match sink {
        -1 => None,
        s if s >= 0 => Some(s as usize),
        _ => return err(body.header_line, ParseErrorKind::BadToken(body.fields[2].to_string())),
    };
    let mut transitions = Vec::with_capacity(body.rows.len());
    let mut accepting = Vec::with_capacity(body.rows.len());
    for &(line, row) in &body.rows {
        let toks: Vec<&str> = row.split_whitespace().collect();
        if toks.len() != 3 {
            return err(line, ParseErrorKind::ArityMismatch { expected: 3, got: toks.len() });
        }
        let succ = |tok: &str| -> PResult<usize> {
            let q: usize = parse_int(line, tok)?;
            if q >= states {
                return err(line, ParseErrorKind::IndexOutOfRange { index: q as i64, n: states });
            }
            Ok(q)
        };
        transitions.push([succ(toks[0])?, succ(toks[1])?]);
        accepting.push(match toks[2] {
            "0" => false,
            "1" => true,
            other => return err(line, ParseErrorKind::BadLabel(other.to_string())),
        });
    }
    check_count(text, states, transitions.len())?;
    Dfa::new(transitions, accepting, start, sink).map_err(|e| invalid(body.header_line, e))
}

pub fn emit_dfa(a: &Dfa) -> String {
    let sink = a.sink().map_or(-1, |s| s as i64);
    let mut out = format!("p dfa {} {} {}\n", a.states(), a.start(), sink);
    for (q, t) in a.transitions().iter().enumerate() {
        writeln!(out, "{} {} {}", t[0], t[1], u8::from(a.is_accepting(q))).expect("string write");
    }
    out
}

pub fn parse_halfspaces(text: &str) -> std::result::Result<Vec<Halfspace>, ParseError> {
    let body = split_header(text, "hs", 2)?;
    let vars = header_usize(&body, 0)?;
    let count = header_usize(&body, 1)?;
    let mut out = Vec::with_capacity(body.rows.len());
    for &(line, row) in &body.rows {
        let nums = row
            .split_whitespace()
            .map(|t| parse_int::<i64>(line, t))
            .collect::<PResult<Vec<_>>>()?;
        if nums.len() != vars + 1 {
            return err(line, ParseErrorKind::ArityMismatch { expected: vars + 1, got: nums.len() });
        }
        out.push(Halfspace {
            threshold: nums[0],
            weights: nums[1..].to_vec(),
        });
    }
    check_count(text, count, out.len())?;
    Ok(out)
}

/// `vars` is needed for an empty list.
pub fn emit_halfspaces(hs: &[Halfspace], vars: usize) -> Result<String> {
    let mut out = format!("p hs {} {}\n", vars, hs.len());
    for h in hs {
        if h.weights.len() != vars {
            return Err(Error::ArityMismatch {
                expected: vars,
                got: h.weights.len(),
            });
        }
        out.push_str(&h.threshold.to_string());
        for w in &h.weights {
            write!(out, " {w}").expect("string write");
        }
        out.push('\n');
    }
    Ok(out)
}

/// A single `±` string; comment lines are allowed.
pub fn parse_assignment(text: &str) -> std::result::Result<Assignment, ParseError> {
    let mut lines = content_lines(text);
    let (line, row) = lines.next().unwrap_or((1, ""));
    if let Some((extra, _)) = lines.next() {
        return err(extra, ParseErrorKind::BadToken("trailing content after assignment".into()));
    }
    Ok(Assignment::new(parse_signs(line, row)?))
}

pub fn emit_assignment(a: &Assignment) -> String {
    format!("{}\n", sign_string(a.values()))
}
