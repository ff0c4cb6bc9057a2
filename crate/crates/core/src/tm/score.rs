//! Literal-set precision / recall / F1 between predicted and gold actions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::canon::{canonical_effect, canonical_literal, canonical_precondition};
use super::clause::{Clause, PddlActionBody, PddlActionSet};
use super::dnf::to_dnf;
use super::domain::DomainSignature;
use crate::metrics::{Counts, Prf};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmScoreOptions {
    /// Also score the condition literals of `when` effects.
    pub include_when_conditions: bool,
    /// Rename parameters to `?p0`, `?p1`, ... so literals match by position.
    pub positional_params: bool,
}

impl Default for TmScoreOptions {
    fn default() -> Self {
        Self {
            include_when_conditions: false,
            positional_params: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmScore<T> {
    pub counts: Counts,
    pub prf: Prf<T>,
    pub per_action: BTreeMap<String, Counts>,
}

/// Renames free occurrences of the mapped variables.
fn rename(c: &Clause, map: &BTreeMap<String, String>) -> Clause {
    let sub = |cs: &[Clause]| cs.iter().map(|c| rename(c, map)).collect();
    let shadowed = |var: &str| {
        let mut m = map.clone();
        m.remove(var);
        m
    };
    match c {
        Clause::Pred { name, args } => Clause::Pred {
            name: name.clone(),
            args: args.iter().map(|a| map.get(a).cloned().unwrap_or_else(|| a.clone())).collect(),
        },
        Clause::And(cs) => Clause::And(sub(cs)),
        Clause::Or(cs) => Clause::Or(sub(cs)),
        Clause::Not(x) => Clause::not(rename(x, map)),
        Clause::When(a, b) => Clause::when(rename(a, map), rename(b, map)),
        Clause::Exists { var, ty, body } => Clause::exists(var, ty, rename(body, &shadowed(var))),
        Clause::Forall { var, ty, body } => Clause::forall(var, ty, rename(body, &shadowed(var))),
        Clause::Empty => Clause::Empty,
    }
}

#[derive(Default)]
struct Items {
    all: BTreeSet<String>,
    hallucinated: BTreeSet<String>,
}

impl Items {
    fn add(&mut self, tag: &str, text: String, source: &Clause, domain: &DomainSignature) {
        let item = format!("{tag} {text}");
        let mut unknown = false;
        source.for_each_pred(&mut |name, _| unknown |= !domain.predicates.contains_key(name));
        if unknown {
            self.hallucinated.insert(item.clone());
        }
        self.all.insert(item);
    }

    fn add_condition(&mut self, tag: &str, c: &Clause, domain: &DomainSignature) {
        match to_dnf(c) {
            Ok(d) => {
                for l in d.literals() {
                    let text = canonical_literal(l).unwrap_or_else(|_| l.to_string());
                    self.add(tag, text, &l.atom, domain);
                }
            }
            Err(_) => self.add(tag, c.to_string(), c, domain),
        }
    }

    fn add_effect(&mut self, c: &Clause, opts: &TmScoreOptions, domain: &DomainSignature) {
        match c {
            Clause::Empty => {}
            Clause::And(cs) => cs.iter().for_each(|c| self.add_effect(c, opts, domain)),
            Clause::When(cond, eff) => {
                if opts.include_when_conditions {
                    self.add_condition("cond", cond, domain);
                }
                self.add_effect(eff, opts, domain);
            }
            Clause::Pred { .. } => self.add("eff", c.to_string(), c, domain),
            Clause::Not(x) if matches!(**x, Clause::Pred { .. }) => self.add("eff", c.to_string(), c, domain),
            Clause::Forall { .. } => {
                let text = canonical_effect(c).unwrap_or_else(|_| c.to_string());
                self.add("eff", text, c, domain);
            }
            other => {
                let text = canonical_precondition(other).unwrap_or_else(|_| other.to_string());
                self.add("eff", text, other, domain);
            }
        }
    }
}

fn items(a: &PddlActionBody, opts: &TmScoreOptions, domain: &DomainSignature) -> Items {
    let map: BTreeMap<String, String> = if opts.positional_params {
        a.parameters
            .iter()
            .enumerate()
            .map(|(i, p)| (p.var.clone(), format!("?p{i}")))
            .collect()
    } else {
        BTreeMap::new()
    };
    let mut out = Items::default();
    out.add_condition("pre", &rename(&a.precondition, &map), domain);
    out.add_effect(&rename(&a.effect, &map), opts, domain);
    out
}

/// Micro-averaged over all actions in either set. Literals using predicates
/// outside the domain never count as true positives.
pub fn score_tm<T: Scalar>(
    pred: &PddlActionSet,
    gold: &PddlActionSet,
    domain: &DomainSignature,
    opts: &TmScoreOptions,
) -> TmScore<T> {
    let names: BTreeSet<&String> = pred.actions.keys().chain(gold.actions.keys()).collect();
    let mut per_action = BTreeMap::new();
    let mut total = Counts::default();
    for name in names {
        let p = pred.actions.get(name).map(|a| items(a, opts, domain)).unwrap_or_default();
        let g = gold.actions.get(name).map(|a| items(a, opts, domain)).unwrap_or_default();
        let tp = p
            .all
            .intersection(&g.all)
            .filter(|i| !p.hallucinated.contains(*i))
            .count() as u64;
        let c = Counts::new(tp, p.all.len() as u64 - tp, g.all.len() as u64 - tp);
        total += c;
        per_action.insert(name.clone(), c);
    }
    TmScore {
        counts: total,
        prf: total.prf(),
        per_action,
    }
}
