//! Predicate declarations of the household planning domain.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use super::clause::parse_typed_vars;
use super::sexpr::{parse_all, SExpr};
use super::TmError;

const DOMAIN_TEXT: &str = include_str!("../../resources/virtualhome_domain.pddl");

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DomainSignature {
    pub types: BTreeSet<String>,
    /// Predicate name to ordered parameter types.
    pub predicates: BTreeMap<String, Vec<String>>,
}

impl DomainSignature {
    /// Reads the `:types` and `:predicates` sections of a `(define (domain ...))` form.
    pub fn parse(text: &str) -> Result<Self, TmError> {
        let exprs = parse_all(text)?;
        let mut sig = DomainSignature::default();
        let define = exprs.first().and_then(SExpr::list).unwrap_or(&[]);
        for section in define.iter().filter_map(SExpr::list) {
            let head = section.first().and_then(SExpr::atom).map(str::to_ascii_lowercase);
            match head.as_deref() {
                Some(":types") => {
                    for t in section[1..].iter().filter_map(SExpr::atom) {
                        if t != "-" {
                            sig.types.insert(t.to_ascii_lowercase());
                        }
                    }
                }
                Some(":predicates") => {
                    for decl in section[1..].iter().filter_map(SExpr::list) {
                        let Some(name) = decl.first().and_then(SExpr::atom) else { continue };
                        let params = parse_typed_vars(&decl[1..])?;
                        sig.predicates
                            .insert(name.to_ascii_lowercase(), params.into_iter().map(|p| p.ty).collect());
                    }
                }
                _ => {}
            }
        }
        Ok(sig)
    }

    pub fn arity(&self, predicate: &str) -> Option<usize> {
        self.predicates.get(predicate).map(Vec::len)
    }

    /// `character` values may fill `object` slots; the reverse is not allowed.
    pub fn is_subtype(&self, ty: &str, of: &str) -> bool {
        ty == of || (ty == "character" && of == "object")
    }
}

pub fn virtualhome_domain() -> &'static DomainSignature {
    static DOMAIN: OnceLock<DomainSignature> = OnceLock::new();
    DOMAIN.get_or_init(|| DomainSignature::parse(DOMAIN_TEXT).expect("bundled domain parses"))
}
