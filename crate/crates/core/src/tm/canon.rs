//! Canonical text of action bodies: preconditions in sorted DNF, effects as
//! sorted conjunctions, bound variables renamed by binding depth.

use super::clause::{parse_pddl_actions, Clause, PddlActionBody, PddlActionSet};
use super::dnf::{to_dnf, Literal};
use super::domain::DomainSignature;
use super::validate::validate_pddl;
use super::{TmError, MAX_DEPTH};
use crate::engine::CanonicalSignature;

/// Bound variables in scope, innermost last, with their canonical names.
#[derive(Default)]
struct Scope(Vec<(String, String)>);

impl Scope {
    fn bind<T>(&mut self, var: &str, f: impl FnOnce(&mut Self, &str) -> T) -> T {
        let name = format!("?#{}", self.0.len());
        self.0.push((var.to_string(), name.clone()));
        let out = f(self, &name);
        self.0.pop();
        out
    }

    fn rename<'a>(&'a self, arg: &'a str) -> &'a str {
        self.0
            .iter()
            .rev()
            .find(|(v, _)| v == arg)
            .map_or(arg, |(_, n)| n.as_str())
    }

    fn pred(&self, name: &str, args: &[String]) -> String {
        let mut s = format!("({name}");
        for a in args {
            s.push(' ');
            s.push_str(self.rename(a));
        }
        s.push(')');
        s
    }
}

fn sorted_unique(mut items: Vec<String>) -> Vec<String> {
    items.sort();
    items.dedup();
    items
}

fn pre(c: &Clause, scope: &mut Scope) -> Result<String, TmError> {
    let dnf = to_dnf(c)?;
    let mut disjuncts = Vec::with_capacity(dnf.0.len());
    for conj in &dnf.0 {
        let lits = conj
            .iter()
            .map(|l| literal(l, scope))
            .collect::<Result<Vec<_>, _>>()?;
        disjuncts.push(format!("(and{})", sorted_unique(lits).iter().map(|l| format!(" {l}")).collect::<String>()));
    }
    Ok(format!(
        "(or{})",
        sorted_unique(disjuncts).iter().map(|d| format!(" {d}")).collect::<String>()
    ))
}

fn literal(l: &Literal, scope: &mut Scope) -> Result<String, TmError> {
    let atom = match &l.atom {
        Clause::Pred { name, args } => scope.pred(name, args),
        Clause::Exists { var, ty, body } => {
            scope.bind(var, |s, v| Ok::<_, TmError>(format!("(exists ({v} - {ty}) {})", pre(body, s)?)))?
        }
        Clause::Forall { var, ty, body } => {
            scope.bind(var, |s, v| Ok::<_, TmError>(format!("(forall ({v} - {ty}) {})", pre(body, s)?)))?
        }
        Clause::When(c, e) => format!("(when {} {})", pre(c, scope)?, eff(e, scope)?),
        other => pre(other, scope)?,
    };
    Ok(if l.negated { format!("(not {atom})") } else { atom })
}

/// Canonical text of one literal, outside any binder.
pub(crate) fn canonical_literal(l: &Literal) -> Result<String, TmError> {
    literal(l, &mut Scope::default())
}

fn eff_items(c: &Clause, scope: &mut Scope, out: &mut Vec<String>) -> Result<(), TmError> {
    match c {
        Clause::Empty => {}
        Clause::And(cs) => {
            for c in cs {
                eff_items(c, scope, out)?;
            }
        }
        Clause::Pred { name, args } => out.push(scope.pred(name, args)),
        Clause::Not(inner) if matches!(**inner, Clause::Pred { .. }) => {
            let Clause::Pred { name, args } = &**inner else { unreachable!() };
            out.push(format!("(not {})", scope.pred(name, args)));
        }
        Clause::When(cond, e) => out.push(format!("(when {} {})", pre(cond, scope)?, eff(e, scope)?)),
        Clause::Forall { var, ty, body } => {
            let s = scope.bind(var, |s, v| Ok::<_, TmError>(format!("(forall ({v} - {ty}) {})", eff(body, s)?)))?;
            out.push(s);
        }
        other => out.push(pre(other, scope)?),
    }
    Ok(())
}

fn eff(c: &Clause, scope: &mut Scope) -> Result<String, TmError> {
    let mut items = Vec::new();
    eff_items(c, scope, &mut items)?;
    Ok(format!(
        "(and{})",
        sorted_unique(items).iter().map(|i| format!(" {i}")).collect::<String>()
    ))
}

fn check_depth(c: &Clause) -> Result<(), TmError> {
    if c.depth() > MAX_DEPTH {
        Err(TmError::DepthExceeded)
    } else {
        Ok(())
    }
}

pub fn canonical_precondition(c: &Clause) -> Result<String, TmError> {
    check_depth(c)?;
    pre(c, &mut Scope::default())
}

pub fn canonical_effect(c: &Clause) -> Result<String, TmError> {
    check_depth(c)?;
    eff(c, &mut Scope::default())
}

pub fn canonical_action(a: &PddlActionBody) -> Result<String, TmError> {
    let params: Vec<String> = a.parameters.iter().map(|p| format!("{} - {}", p.var, p.ty)).collect();
    Ok(format!(
        "(:action {} :parameters ({}) :precondition {} :effect {})",
        a.name,
        params.join(" "),
        canonical_precondition(&a.precondition)?,
        canonical_effect(&a.effect)?
    ))
}

/// Canonical actions in name order, one per line.
pub fn action_set_signature(set: &PddlActionSet) -> Result<String, TmError> {
    let lines = set.iter().map(canonical_action).collect::<Result<Vec<_>, _>>()?;
    Ok(lines.join("\n"))
}

pub fn canonicalize_pddl(set: &PddlActionSet, domain: &DomainSignature) -> CanonicalSignature {
    let violations = validate_pddl(set, domain);
    if let Some(v) = violations.first() {
        return CanonicalSignature::Invalid(v.into());
    }
    match action_set_signature(set) {
        Ok(sig) => CanonicalSignature::valid(sig),
        Err(e) => CanonicalSignature::Invalid((&e.to_violation()).into()),
    }
}

pub fn canonicalize_pddl_text(text: &str, domain: &DomainSignature) -> CanonicalSignature {
    match parse_pddl_actions(text) {
        Ok(set) => canonicalize_pddl(&set, domain),
        Err(e) => CanonicalSignature::Invalid((&e.to_violation()).into()),
    }
}
