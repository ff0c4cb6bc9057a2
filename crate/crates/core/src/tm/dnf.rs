//! Disjunctive normal form for precondition clauses.

use std::fmt;

use super::clause::Clause;
use super::{TmError, MAX_DEPTH, MAX_DISJUNCTS};

/// A possibly negated atom. Quantified and conditional sub-clauses are kept
/// whole as opaque atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub negated: bool,
    pub atom: Clause,
}

impl Literal {
    pub fn to_clause(&self) -> Clause {
        if self.negated {
            Clause::not(self.atom.clone())
        } else {
            self.atom.clone()
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "(not {})", self.atom)
        } else {
            write!(f, "{}", self.atom)
        }
    }
}

/// An OR of ANDs. No disjuncts is false; one empty disjunct is true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dnf(pub Vec<Vec<Literal>>);

impl Dnf {
    /// `(or (and ..) ..)`, collapsed to a single `and` or literal when possible.
    pub fn to_clause(&self) -> Clause {
        let conj = |lits: &[Literal]| match lits {
            [one] => one.to_clause(),
            _ => Clause::And(lits.iter().map(Literal::to_clause).collect()),
        };
        match self.0.as_slice() {
            [one] => conj(one),
            many => Clause::Or(many.iter().map(|d| conj(d)).collect()),
        }
    }

    /// Every literal of every disjunct, first occurrence order.
    pub fn literals(&self) -> Vec<&Literal> {
        let mut out: Vec<&Literal> = Vec::new();
        for lit in self.0.iter().flatten() {
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        out
    }
}

pub fn to_dnf(c: &Clause) -> Result<Dnf, TmError> {
    if c.depth() > MAX_DEPTH {
        return Err(TmError::DepthExceeded);
    }
    dnf(c, false).map(Dnf)
}

fn product(parts: Vec<Vec<Vec<Literal>>>) -> Result<Vec<Vec<Literal>>, TmError> {
    let mut acc: Vec<Vec<Literal>> = vec![Vec::new()];
    for part in parts {
        if acc.len().saturating_mul(part.len()) > MAX_DISJUNCTS {
            return Err(TmError::TooManyDisjuncts);
        }
        acc = acc
            .iter()
            .flat_map(|a| {
                part.iter().map(move |b| {
                    let mut d = a.clone();
                    d.extend(b.iter().cloned());
                    d
                })
            })
            .collect();
    }
    Ok(acc)
}

fn union(parts: Vec<Vec<Vec<Literal>>>) -> Result<Vec<Vec<Literal>>, TmError> {
    let out: Vec<_> = parts.into_iter().flatten().collect();
    if out.len() > MAX_DISJUNCTS {
        return Err(TmError::TooManyDisjuncts);
    }
    Ok(out)
}

fn dnf(c: &Clause, negated: bool) -> Result<Vec<Vec<Literal>>, TmError> {
    let sub = |cs: &[Clause], neg| cs.iter().map(|c| dnf(c, neg)).collect::<Result<Vec<_>, _>>();
    match c {
        Clause::Empty if negated => Ok(Vec::new()),
        Clause::Empty => Ok(vec![Vec::new()]),
        Clause::Not(inner) => dnf(inner, !negated),
        Clause::And(cs) if !negated => product(sub(cs, false)?),
        Clause::And(cs) => union(sub(cs, true)?),
        Clause::Or(cs) if !negated => union(sub(cs, false)?),
        Clause::Or(cs) => product(sub(cs, true)?),
        Clause::Pred { .. } | Clause::Exists { .. } | Clause::Forall { .. } | Clause::When(..) => {
            Ok(vec![vec![Literal {
                negated,
                atom: c.clone(),
            }]])
        }
    }
}
