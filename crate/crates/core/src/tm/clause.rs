//! PDDL action bodies: the clause tree, the reader and the pretty printer.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use super::sexpr::{parse_all, Pos, SExpr, SExprError};
use super::TmError;
use crate::json::{parse_completion, strip_fence};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Clause {
    Pred { name: String, args: Vec<String> },
    And(Vec<Clause>),
    Or(Vec<Clause>),
    Not(Box<Clause>),
    When(Box<Clause>, Box<Clause>),
    Exists { var: String, ty: String, body: Box<Clause> },
    Forall { var: String, ty: String, body: Box<Clause> },
    Empty,
}

impl Clause {
    pub fn pred<S: Into<String>>(name: &str, args: impl IntoIterator<Item = S>) -> Self {
        Clause::Pred {
            name: name.to_ascii_lowercase(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn not(c: Clause) -> Self {
        Clause::Not(Box::new(c))
    }

    pub fn when(cond: Clause, eff: Clause) -> Self {
        Clause::When(Box::new(cond), Box::new(eff))
    }

    pub fn exists(var: &str, ty: &str, body: Clause) -> Self {
        Clause::Exists {
            var: var.into(),
            ty: ty.to_ascii_lowercase(),
            body: Box::new(body),
        }
    }

    pub fn forall(var: &str, ty: &str, body: Clause) -> Self {
        Clause::Forall {
            var: var.into(),
            ty: ty.to_ascii_lowercase(),
            body: Box::new(body),
        }
    }

    /// Nesting depth; a predicate has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Clause::Pred { .. } | Clause::Empty => 1,
            Clause::And(cs) | Clause::Or(cs) => 1 + cs.iter().map(Clause::depth).max().unwrap_or(0),
            Clause::Not(c) => 1 + c.depth(),
            Clause::When(a, b) => 1 + a.depth().max(b.depth()),
            Clause::Exists { body, .. } | Clause::Forall { body, .. } => 1 + body.depth(),
        }
    }

    /// Calls `f` on every predicate in the tree.
    pub fn for_each_pred<'a>(&'a self, f: &mut impl FnMut(&'a str, &'a [String])) {
        match self {
            Clause::Pred { name, args } => f(name, args),
            Clause::And(cs) | Clause::Or(cs) => cs.iter().for_each(|c| c.for_each_pred(f)),
            Clause::Not(c) => c.for_each_pred(f),
            Clause::When(a, b) => {
                a.for_each_pred(f);
                b.for_each_pred(f);
            }
            Clause::Exists { body, .. } | Clause::Forall { body, .. } => body.for_each_pred(f),
            Clause::Empty => {}
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, cs: &[Clause]| {
            f.write_str("(")?;
            f.write_str(head)?;
            for c in cs {
                write!(f, " {c}")?;
            }
            f.write_str(")")
        };
        match self {
            Clause::Pred { name, args } => {
                write!(f, "({name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Clause::And(cs) => list(f, "and", cs),
            Clause::Or(cs) => list(f, "or", cs),
            Clause::Not(c) => write!(f, "(not {c})"),
            Clause::When(a, b) => write!(f, "(when {a} {b})"),
            Clause::Exists { var, ty, body } => write!(f, "(exists ({var} - {ty}) {body})"),
            Clause::Forall { var, ty, body } => write!(f, "(forall ({var} - {ty}) {body})"),
            Clause::Empty => f.write_str("()"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Param {
    pub var: String,
    pub ty: String,
}

impl Param {
    pub fn new(var: &str, ty: &str) -> Self {
        Self {
            var: var.into(),
            ty: ty.to_ascii_lowercase(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PddlActionBody {
    pub name: String,
    pub parameters: Vec<Param>,
    pub precondition: Clause,
    pub effect: Clause,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PddlActionSet {
    pub actions: BTreeMap<String, PddlActionBody>,
}

impl PddlActionSet {
    pub fn get(&self, name: &str) -> Option<&PddlActionBody> {
        self.actions.get(&name.to_ascii_lowercase())
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PddlActionBody> {
        self.actions.values()
    }
}

fn err(pos: Pos, message: impl Into<String>) -> TmError {
    TmError::Parse {
        line: pos.line,
        column: pos.col,
        message: message.into(),
    }
}

impl From<SExprError> for TmError {
    fn from(e: SExprError) -> Self {
        let SExprError::Unbalanced(p) = e;
        TmError::UnbalancedParens {
            line: p.line,
            column: p.col,
        }
    }
}

/// Reads `?a ?b - t ?c - u`; untyped trailing variables default to `object`.
pub fn parse_typed_vars(items: &[SExpr]) -> Result<Vec<Param>, TmError> {
    let mut out = Vec::new();
    let mut pending: Vec<&str> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let tok = items[i].atom().ok_or_else(|| err(items[i].pos(), "expected a variable"))?;
        if tok == "-" {
            let ty = items
                .get(i + 1)
                .and_then(SExpr::atom)
                .ok_or_else(|| err(items[i].pos(), "expected a type after `-`"))?;
            if pending.is_empty() {
                return Err(err(items[i].pos(), "type marker without variables"));
            }
            out.extend(pending.drain(..).map(|v| Param::new(v, ty)));
            i += 2;
        } else {
            pending.push(tok);
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|v| Param::new(v, "object")));
    Ok(out)
}

pub fn clause_from_sexpr(e: &SExpr) -> Result<Clause, TmError> {
    let items = e.list().ok_or_else(|| err(e.pos(), "expected a parenthesized clause"))?;
    let Some(head) = items.first() else {
        return Ok(Clause::Empty);
    };
    let head_name = head
        .atom()
        .ok_or_else(|| err(head.pos(), "expected an operator or predicate name"))?
        .to_ascii_lowercase();
    let rest = &items[1..];
    let arity = |n: usize| {
        if rest.len() == n {
            Ok(())
        } else {
            Err(err(e.pos(), format!("`{head_name}` takes {n} argument(s)")))
        }
    };
    let sub = |xs: &[SExpr]| xs.iter().map(clause_from_sexpr).collect::<Result<Vec<_>, _>>();
    Ok(match head_name.as_str() {
        "and" => Clause::And(sub(rest)?),
        "or" => Clause::Or(sub(rest)?),
        "not" => {
            arity(1)?;
            Clause::not(clause_from_sexpr(&rest[0])?)
        }
        "when" => {
            arity(2)?;
            Clause::when(clause_from_sexpr(&rest[0])?, clause_from_sexpr(&rest[1])?)
        }
        "exists" | "forall" => {
            arity(2)?;
            let vars = rest[0]
                .list()
                .ok_or_else(|| err(rest[0].pos(), "expected a variable list"))?;
            let vars = parse_typed_vars(vars)?;
            if vars.is_empty() {
                return Err(err(rest[0].pos(), "quantifier without variables"));
            }
            let mut body = clause_from_sexpr(&rest[1])?;
            for p in vars.iter().rev() {
                body = if head_name == "exists" {
                    Clause::exists(&p.var, &p.ty, body)
                } else {
                    Clause::forall(&p.var, &p.ty, body)
                };
            }
            body
        }
        _ => {
            let args = rest
                .iter()
                .map(|a| {
                    a.atom()
                        .map(str::to_string)
                        .ok_or_else(|| err(a.pos(), "predicate arguments must be atoms"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Clause::Pred {
                name: head_name,
                args,
            }
        }
    })
}

fn action_from_sexpr(e: &SExpr) -> Result<PddlActionBody, TmError> {
    let items = e.list().ok_or_else(|| err(e.pos(), "expected `(:action ...)`"))?;
    match items.first().and_then(SExpr::atom) {
        Some(h) if h.eq_ignore_ascii_case(":action") => {}
        _ => return Err(err(e.pos(), "expected `(:action ...)`")),
    }
    let name = items
        .get(1)
        .and_then(SExpr::atom)
        .ok_or_else(|| err(e.pos(), "action name missing"))?
        .to_ascii_lowercase();
    let mut body = PddlActionBody {
        name,
        parameters: Vec::new(),
        precondition: Clause::Empty,
        effect: Clause::Empty,
    };
    let mut i = 2;
    while i < items.len() {
        let key = items[i]
            .atom()
            .ok_or_else(|| err(items[i].pos(), "expected a `:keyword`"))?
            .to_ascii_lowercase();
        let value = items
            .get(i + 1)
            .ok_or_else(|| err(items[i].pos(), format!("`{key}` has no value")))?;
        match key.as_str() {
            ":parameters" => {
                let vars = value
                    .list()
                    .ok_or_else(|| err(value.pos(), "expected a parameter list"))?;
                body.parameters = parse_typed_vars(vars)?;
            }
            ":precondition" => body.precondition = clause_from_sexpr(value)?,
            ":effect" => body.effect = clause_from_sexpr(value)?,
            other => return Err(err(items[i].pos(), format!("unknown keyword `{other}`"))),
        }
        i += 2;
    }
    Ok(body)
}

/// Reads PDDL text, or a JSON object whose `output` member holds it.
pub fn parse_pddl_actions(text: &str) -> Result<PddlActionSet, TmError> {
    let inner = strip_fence(text).trim();
    let pddl;
    let source = if inner.starts_with('{') {
        let doc = parse_completion(text, false).map_err(|e| TmError::Parse {
            line: e.line,
            column: e.column,
            message: e.message,
        })?;
        pddl = doc
            .get("output")
            .and_then(|v| v.as_str())
            .ok_or_else(|| err(Pos { line: 1, col: 1 }, "`output` must be a string"))?
            .to_string();
        pddl.as_str()
    } else {
        inner
    };
    let exprs = parse_all(source)?;
    if exprs.is_empty() {
        return Err(err(Pos { line: 1, col: 1 }, "no actions found"));
    }
    let mut set = PddlActionSet::default();
    for e in &exprs {
        let action = action_from_sexpr(e)?;
        if set.actions.contains_key(&action.name) {
            return Err(TmError::DuplicateAction(action.name));
        }
        set.actions.insert(action.name.clone(), action);
    }
    Ok(set)
}

fn write_clause(out: &mut String, c: &Clause, indent: usize) {
    let pad = "  ".repeat(indent);
    match c {
        Clause::And(cs) | Clause::Or(cs) if !cs.is_empty() => {
            let head = if matches!(c, Clause::And(_)) { "and" } else { "or" };
            let _ = write!(out, "({head}");
            for sub in cs {
                let _ = write!(out, "\n{pad}  ");
                write_clause(out, sub, indent + 1);
            }
            out.push(')');
        }
        _ => {
            let _ = write!(out, "{c}");
        }
    }
}

fn format_params(params: &[Param]) -> String {
    params
        .iter()
        .map(|p| format!("{} - {}", p.var, p.ty))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn pretty_action(a: &PddlActionBody) -> String {
    let mut out = format!("(:action {}\n  :parameters ({})\n  :precondition ", a.name, format_params(&a.parameters));
    write_clause(&mut out, &a.precondition, 2);
    out.push_str("\n  :effect ");
    write_clause(&mut out, &a.effect, 2);
    out.push_str("\n)");
    out
}

pub fn pretty_print(set: &PddlActionSet) -> String {
    set.iter().map(pretty_action).collect::<Vec<_>>().join("\n\n")
}

/// Wraps the printed actions as `{"output": "..."}`.
pub fn to_json(set: &PddlActionSet) -> String {
    serde_json::json!({ "output": pretty_print(set) }).to_string()
}
