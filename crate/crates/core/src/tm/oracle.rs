//! Brute-force equivalence check: ground both clauses over a small universe
//! and compare truth tables.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::clause::{Clause, Param};

/// Largest number of members allowed per type.
pub const MAX_PER_TYPE: usize = 4;
/// Largest number of ground atoms in one truth table.
pub const MAX_ATOMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("type `{ty}` has {size} members; at most {MAX_PER_TYPE} are enumerated")]
    UniverseTooLarge { ty: String, size: usize },
    #[error("{0} ground atoms; at most {MAX_ATOMS} are enumerated")]
    TooManyAtoms(usize),
}

/// Named constants per type. Characters also count as objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    pub objects: Vec<String>,
    pub characters: Vec<String>,
}

impl Universe {
    /// `objects` plain objects and `characters` agents.
    pub fn new(objects: usize, characters: usize) -> Self {
        Self {
            objects: (0..objects).map(|i| format!("o{i}")).collect(),
            characters: (0..characters).map(|i| format!("c{i}")).collect(),
        }
    }

    /// Values a variable of type `ty` ranges over.
    pub fn members(&self, ty: &str) -> Vec<&str> {
        let chars = self.characters.iter().map(String::as_str);
        if ty == "character" {
            chars.collect()
        } else {
            self.objects.iter().map(String::as_str).chain(chars).collect()
        }
    }

    fn check(&self) -> Result<(), OracleError> {
        for (ty, size) in [("object", self.objects.len()), ("character", self.characters.len())] {
            if size > MAX_PER_TYPE {
                return Err(OracleError::UniverseTooLarge { ty: ty.into(), size });
            }
        }
        Ok(())
    }
}

enum Formula {
    Const(bool),
    Atom(usize),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    fn eval(&self, bits: u64) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Atom(i) => (bits >> i) & 1 == 1,
            Formula::Not(f) => !f.eval(bits),
            Formula::And(fs) => fs.iter().all(|f| f.eval(bits)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(bits)),
        }
    }
}

struct Grounder<'a> {
    universe: &'a Universe,
    atoms: BTreeMap<(String, Vec<String>), usize>,
}

impl Grounder<'_> {
    fn ground(&mut self, c: &Clause, env: &mut Vec<(String, String)>) -> Formula {
        let bind_all = |g: &mut Self, var: &str, ty: &str, body: &Clause, env: &mut Vec<(String, String)>| {
            let members: Vec<String> = g.universe.members(ty).into_iter().map(str::to_string).collect();
            members
                .into_iter()
                .map(|m| {
                    env.push((var.to_string(), m));
                    let f = g.ground(body, env);
                    env.pop();
                    f
                })
                .collect::<Vec<_>>()
        };
        match c {
            Clause::Empty => Formula::Const(true),
            Clause::Pred { name, args } => {
                let args: Vec<String> = args
                    .iter()
                    .map(|a| {
                        env.iter()
                            .rev()
                            .find(|(v, _)| v == a)
                            .map_or_else(|| a.clone(), |(_, m)| m.clone())
                    })
                    .collect();
                let next = self.atoms.len();
                Formula::Atom(*self.atoms.entry((name.clone(), args)).or_insert(next))
            }
            Clause::Not(inner) => Formula::Not(Box::new(self.ground(inner, env))),
            Clause::And(cs) => Formula::And(cs.iter().map(|c| self.ground(c, env)).collect()),
            Clause::Or(cs) => Formula::Or(cs.iter().map(|c| self.ground(c, env)).collect()),
            Clause::When(cond, eff) => {
                let cond = self.ground(cond, env);
                Formula::Or(vec![Formula::Not(Box::new(cond)), self.ground(eff, env)])
            }
            Clause::Exists { var, ty, body } => Formula::Or(bind_all(self, var, ty, body, env)),
            Clause::Forall { var, ty, body } => Formula::And(bind_all(self, var, ty, body, env)),
        }
    }
}

fn assignments<'u>(params: &[Param], universe: &'u Universe) -> Vec<Vec<(String, String)>> {
    let mut out = vec![Vec::new()];
    for p in params {
        let members = universe.members(&p.ty);
        out = out
            .into_iter()
            .flat_map(|env: Vec<(String, String)>| {
                members.iter().map(move |m| {
                    let mut e = env.clone();
                    e.push((p.var.clone(), m.to_string()));
                    e
                })
            })
            .collect();
    }
    out
}

fn equal_under(a: &Clause, b: &Clause, env: &[(String, String)], universe: &Universe) -> Result<bool, OracleError> {
    let mut g = Grounder {
        universe,
        atoms: BTreeMap::new(),
    };
    let mut env = env.to_vec();
    let fa = g.ground(a, &mut env);
    let fb = g.ground(b, &mut env);
    let n = g.atoms.len();
    if n > MAX_ATOMS {
        return Err(OracleError::TooManyAtoms(n));
    }
    Ok((0..1u64 << n).all(|bits| fa.eval(bits) == fb.eval(bits)))
}

/// True when `a` and `b` agree on every truth assignment to their ground
/// atoms, for every binding of `params` over `universe`. `when` reads as
/// implication; quantifiers expand over the universe.
pub fn semantic_equiv(a: &Clause, b: &Clause, params: &[Param], universe: &Universe) -> Result<bool, OracleError> {
    universe.check()?;
    let envs = assignments(params, universe);
    let results: Result<Vec<bool>, OracleError> = envs
        .par_iter()
        .map(|env| equal_under(a, b, env, universe))
        .collect();
    Ok(results?.into_iter().all(|x| x))
}
