//! Static checks of action bodies against the domain declarations.

use std::collections::BTreeMap;

use super::clause::{Clause, PddlActionBody, PddlActionSet};
use super::domain::DomainSignature;
use super::MAX_DEPTH;
use crate::violation::{Violation, ViolationKind};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    Precondition,
    Effect,
}

struct Checker<'a> {
    domain: &'a DomainSignature,
    action: &'a str,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn push(&mut self, kind: ViolationKind, detail: String) {
        self.out.push(Violation::new(kind, format!("{}: {detail}", self.action)));
    }

    fn walk(&mut self, c: &Clause, part: Part, scope: &mut Vec<(String, String)>) {
        match c {
            Clause::Pred { name, args } => self.check_pred(name, args, scope),
            Clause::And(cs) | Clause::Or(cs) => cs.iter().for_each(|c| self.walk(c, part, scope)),
            Clause::Not(c) => self.walk(c, part, scope),
            Clause::When(cond, eff) => {
                if part == Part::Precondition {
                    self.push(ViolationKind::OperatorPlacement, "`when` inside a precondition".into());
                }
                self.walk(cond, Part::Precondition, scope);
                self.walk(eff, part, scope);
            }
            Clause::Exists { var, ty, body } | Clause::Forall { var, ty, body } => {
                if matches!(c, Clause::Forall { .. }) && part == Part::Precondition {
                    self.push(ViolationKind::OperatorPlacement, "`forall` inside a precondition".into());
                }
                self.check_type(ty);
                scope.push((var.clone(), ty.clone()));
                self.walk(body, part, scope);
                scope.pop();
            }
            Clause::Empty => {}
        }
    }

    fn check_type(&mut self, ty: &str) {
        if !self.domain.types.contains(ty) {
            self.push(ViolationKind::TypeMismatch, format!("unknown type `{ty}`"));
        }
    }

    fn check_pred(&mut self, name: &str, args: &[String], scope: &[(String, String)]) {
        let Some(slots) = self.domain.predicates.get(name) else {
            self.push(ViolationKind::UnknownPredicate, format!("`{name}` is not declared"));
            return;
        };
        if slots.len() != args.len() {
            self.push(
                ViolationKind::ArityMismatch,
                format!("`{name}` takes {} argument(s), got {}", slots.len(), args.len()),
            );
            return;
        }
        for (arg, slot) in args.iter().zip(slots) {
            let Some((_, ty)) = scope.iter().rev().find(|(v, _)| v == arg) else {
                self.push(ViolationKind::UndeclaredVariable, format!("`{arg}` in `{name}` is not declared"));
                continue;
            };
            if !self.domain.is_subtype(ty, slot) {
                self.push(
                    ViolationKind::TypeMismatch,
                    format!("`{arg}` is {ty} but `{name}` expects {slot}"),
                );
            }
        }
    }
}

pub fn validate_action(a: &PddlActionBody, domain: &DomainSignature) -> Vec<Violation> {
    let mut ck = Checker {
        domain,
        action: &a.name,
        out: Vec::new(),
    };
    let mut seen = BTreeMap::new();
    for p in &a.parameters {
        ck.check_type(&p.ty);
        if seen.insert(p.var.clone(), ()).is_some() {
            ck.push(ViolationKind::UndeclaredVariable, format!("parameter `{}` declared twice", p.var));
        }
    }
    for (c, part) in [(&a.precondition, Part::Precondition), (&a.effect, Part::Effect)] {
        if c.depth() > MAX_DEPTH {
            ck.push(ViolationKind::DepthExceeded, format!("nesting deeper than {MAX_DEPTH}"));
            continue;
        }
        let mut scope: Vec<(String, String)> =
            a.parameters.iter().map(|p| (p.var.clone(), p.ty.clone())).collect();
        ck.walk(c, part, &mut scope);
    }
    ck.out
}

pub fn validate_pddl(set: &PddlActionSet, domain: &DomainSignature) -> Vec<Violation> {
    set.iter().flat_map(|a| validate_action(a, domain)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tm::{parse_pddl_actions, virtualhome_domain};

    fn kinds(text: &str) -> Vec<ViolationKind> {
        let set = parse_pddl_actions(text).unwrap();
        validate_pddl(&set, virtualhome_domain()).iter().map(|v| v.kind).collect()
    }

    #[test]
    fn unknown_predicate() {
        assert_eq!(
            kinds("(:action a :parameters (?char - character) :precondition (flying ?char) :effect ())"),
            [ViolationKind::UnknownPredicate]
        );
    }

    #[test]
    fn type_mismatch() {
        assert_eq!(
            kinds("(:action a :parameters (?obj1 - object ?obj2 - object) :precondition (next_to ?obj1 ?obj2) :effect ())"),
            [ViolationKind::TypeMismatch]
        );
        assert!(kinds("(:action a :parameters (?c - character ?d - character) :precondition (next_to ?c ?d) :effect ())").is_empty());
    }

    #[test]
    fn placement_and_scope() {
        assert_eq!(
            kinds("(:action a :parameters (?o - object) :precondition (when (on ?o) (off ?o)) :effect ())"),
            [ViolationKind::OperatorPlacement]
        );
        assert_eq!(
            kinds("(:action a :parameters (?o - object) :precondition (on ?x) :effect ())"),
            [ViolationKind::UndeclaredVariable]
        );
        assert!(kinds("(:action a :parameters (?o - object) :precondition (exists (?x - object) (obj_ontop ?o ?x)) :effect (forall (?y - object) (not (obj_inside ?o ?y))))").is_empty());
        assert_eq!(
            kinds("(:action a :parameters (?o - object) :precondition (on ?o ?o) :effect ())"),
            [ViolationKind::ArityMismatch]
        );
    }

    #[test]
    fn every_declared_predicate_validates_at_its_arity() {
        let d = virtualhome_domain();
        for (name, slots) in &d.predicates {
            let params: Vec<String> = slots.iter().enumerate().map(|(i, t)| format!("?a{i} - {t}")).collect();
            let args: Vec<String> = (0..slots.len()).map(|i| format!("?a{i}")).collect();
            let text = format!(
                "(:action t :parameters ({}) :precondition ({name} {}) :effect ())",
                params.join(" "),
                args.join(" ")
            );
            assert!(kinds(&text).is_empty(), "{text}");
        }
    }
}
