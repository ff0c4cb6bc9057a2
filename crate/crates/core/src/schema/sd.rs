//! Subgoal decomposition plans: a JSON wrapper around ordered lines, each a
//! flat `and`/`or` combination of state or action primitives.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{ParseOptions, SchemaError};
use crate::engine::CanonicalSignature;
use crate::json::{parse_completion, JsonValue};
use crate::scene::{normalize_name, EnvState};
use crate::violation::{Violation, ViolationKind};

const STATE_TABLE: &str = include_str!("../../resources/sd_state_vocabulary.md");
const ACTION_TABLE: &str = include_str!("../../resources/sd_action_vocabulary.md");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    State,
    Action,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    /// Any object or agent.
    Object,
    /// Agents only.
    Character,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VocabEntry {
    pub name: String,
    pub kind: PrimitiveKind,
    pub slots: Vec<SlotKind>,
    /// Properties every argument must carry (action entries only).
    pub restriction: Vec<String>,
}

impl VocabEntry {
    pub fn arity(&self) -> usize {
        self.slots.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SdVocabulary {
    entries: BTreeMap<(String, bool), VocabEntry>,
}

fn table_rows(table: &str) -> impl Iterator<Item = Vec<String>> + '_ {
    table
        .lines()
        .map(str::trim)
        .filter(|l| l.starts_with('|'))
        .skip(2)
        .map(|l| {
            l.trim_matches('|')
                .split('|')
                .map(|c| c.trim().to_string())
                .collect()
        })
}

fn parse_slots(cell: &str) -> Vec<SlotKind> {
    if cell.eq_ignore_ascii_case("none") {
        return Vec::new();
    }
    cell.trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(|a| {
            if a.trim().starts_with("character") {
                SlotKind::Character
            } else {
                SlotKind::Object
            }
        })
        .collect()
}

fn parse_restriction(cell: &str) -> Vec<String> {
    match cell.split_once('[') {
        Some((_, rest)) => rest
            .trim_end_matches(']')
            .split(',')
            .map(|p| p.trim().trim_matches('\'').to_string())
            .filter(|p| !p.is_empty())
            .collect(),
        None => Vec::new(),
    }
}

impl SdVocabulary {
    pub fn parse(states: &str, actions: &str) -> Self {
        let mut entries = BTreeMap::new();
        for row in table_rows(states) {
            let e = VocabEntry {
                name: row[0].clone(),
                kind: PrimitiveKind::State,
                slots: parse_slots(&row[1]),
                restriction: Vec::new(),
            };
            entries.insert((e.name.clone(), false), e);
        }
        for row in table_rows(actions) {
            let e = VocabEntry {
                name: row[0].clone(),
                kind: PrimitiveKind::Action,
                slots: parse_slots(&row[1]),
                restriction: parse_restriction(&row[2]),
            };
            entries.insert((e.name.clone(), true), e);
        }
        Self { entries }
    }

    /// Looks a predicate up, preferring the state reading when a name is in
    /// both tables.
    pub fn get(&self, name: &str) -> Option<&VocabEntry> {
        let key = name.trim().to_ascii_uppercase();
        self.entries
            .get(&(key.clone(), false))
            .or_else(|| self.entries.get(&(key, true)))
    }

    pub fn action(&self, name: &str) -> Option<&VocabEntry> {
        self.entries.get(&(name.trim().to_ascii_uppercase(), true))
    }

    pub fn iter(&self) -> impl Iterator<Item = &VocabEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn sd_vocabulary() -> &'static SdVocabulary {
    static VOCAB: OnceLock<SdVocabulary> = OnceLock::new();
    VOCAB.get_or_init(|| SdVocabulary::parse(STATE_TABLE, ACTION_TABLE))
}

/// `name.id` argument.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ref {
    pub name: String,
    pub id: u64,
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.name, self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Primitive {
    pub predicate: String,
    pub args: Vec<Ref>,
}

impl Primitive {
    /// Upper-cased predicate, lower-cased names.
    pub fn normalized(&self) -> String {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|r| format!("{}.{}", normalize_name(&r.name), r.id))
            .collect();
        format!("{}({})", self.predicate.to_ascii_uppercase(), args.join(", "))
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return f.write_str(&self.predicate);
        }
        let args: Vec<String> = self.args.iter().map(Ref::to_string).collect();
        write!(f, "{}({})", self.predicate, args.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LineOp {
    Single,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgoalLine {
    pub op: LineOp,
    pub operands: Vec<Primitive>,
}

impl fmt::Display for SubgoalLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = match self.op {
            LineOp::Or => " or ",
            _ => " and ",
        };
        let parts: Vec<String> = self.operands.iter().map(Primitive::to_string).collect();
        f.write_str(&parts.join(sep))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgoalPlan {
    pub necessity: bool,
    pub actions_to_include: Vec<String>,
    pub lines: Vec<SubgoalLine>,
}

fn parse_ref(token: &str) -> Result<Ref, SchemaError> {
    let bad = || SchemaError::BadRef {
        token: token.to_string(),
    };
    let (name, id) = token.rsplit_once('.').ok_or_else(bad)?;
    let name = name.trim();
    let id: u64 = id.trim().parse().map_err(|_| bad())?;
    if name.is_empty() || id == 0 {
        return Err(bad());
    }
    Ok(Ref {
        name: name.to_string(),
        id,
    })
}

/// Parses one line. `line_no` is 1-based and only used in errors.
pub fn parse_line(text: &str, line_no: usize) -> Result<SubgoalLine, SchemaError> {
    let chars: Vec<char> = text.chars().collect();
    let err = |col: usize, msg: &str| SchemaError::Parse {
        line: line_no,
        column: col + 1,
        message: msg.to_string(),
    };
    let mut pos = 0;
    let skip_ws = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].is_whitespace() {
            *pos += 1;
        }
    };
    let word = |pos: &mut usize| {
        let start = *pos;
        while *pos < chars.len() && (chars[*pos].is_alphanumeric() || chars[*pos] == '_') {
            *pos += 1;
        }
        chars[start..*pos].iter().collect::<String>()
    };
    let mut operands = Vec::new();
    let mut op: Option<LineOp> = None;
    loop {
        skip_ws(&mut pos);
        let name = word(&mut pos);
        if name.is_empty() {
            return Err(err(pos, "expected a predicate name"));
        }
        skip_ws(&mut pos);
        let mut args = Vec::new();
        if pos < chars.len() && chars[pos] == '(' {
            let open = pos;
            let close = chars[open..]
                .iter()
                .position(|&c| c == ')')
                .map(|p| p + open)
                .ok_or_else(|| err(open, "unclosed parenthesis"))?;
            let inner: String = chars[open + 1..close].iter().collect();
            if inner.contains('(') {
                return Err(err(open, "nested parentheses are not allowed"));
            }
            if !inner.trim().is_empty() {
                for tok in inner.split(',') {
                    args.push(parse_ref(tok.trim())?);
                }
            }
            pos = close + 1;
        }
        operands.push(Primitive {
            predicate: name,
            args,
        });
        skip_ws(&mut pos);
        if pos >= chars.len() {
            break;
        }
        let at = pos;
        let this = match word(&mut pos).to_ascii_lowercase().as_str() {
            "and" => LineOp::And,
            "or" => LineOp::Or,
            _ => return Err(err(at, "expected `and` or `or`")),
        };
        match op {
            Some(prev) if prev != this => return Err(SchemaError::MixedOperators { line: line_no }),
            _ => op = Some(this),
        }
    }
    Ok(SubgoalLine {
        op: op.unwrap_or(LineOp::Single),
        operands,
    })
}

pub fn parse_subgoal_plan(text: &str) -> Result<SubgoalPlan, SchemaError> {
    parse_subgoal_plan_with(text, ParseOptions::LENIENT)
}

pub fn parse_subgoal_plan_with(text: &str, opts: ParseOptions) -> Result<SubgoalPlan, SchemaError> {
    let doc = parse_completion(text, opts.strict)?;
    plan_from_json(&doc)
}

pub fn plan_from_json(doc: &JsonValue) -> Result<SubgoalPlan, SchemaError> {
    if doc.as_object().is_none() {
        return Err(SchemaError::shape("<root>", "an object"));
    }
    let necessity = match doc.get("necessity_to_use_action") {
        Some(JsonValue::Bool(b)) => *b,
        Some(JsonValue::String(s)) => match s.trim().to_ascii_lowercase().as_str() {
            "yes" => true,
            "no" => false,
            _ => return Err(SchemaError::shape("necessity_to_use_action", "\"yes\" or \"no\"")),
        },
        _ => return Err(SchemaError::shape("necessity_to_use_action", "\"yes\" or \"no\"")),
    };
    let strings = |key: &str| -> Result<Vec<String>, SchemaError> {
        doc.get(key)
            .and_then(JsonValue::as_array)
            .and_then(|items| items.iter().map(|v| v.as_str().map(str::to_string)).collect())
            .ok_or_else(|| SchemaError::shape(key, "a list of strings"))
    };
    let actions_to_include = strings("actions_to_include")?;
    let lines = strings("output")?
        .iter()
        .enumerate()
        .map(|(i, l)| parse_line(l, i + 1))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SubgoalPlan {
        necessity,
        actions_to_include,
        lines,
    })
}

pub fn to_json(plan: &SubgoalPlan) -> String {
    let doc = JsonValue::Object(vec![
        (
            "necessity_to_use_action".into(),
            JsonValue::String(if plan.necessity { "yes" } else { "no" }.into()),
        ),
        (
            "actions_to_include".into(),
            JsonValue::Array(plan.actions_to_include.iter().cloned().map(JsonValue::String).collect()),
        ),
        (
            "output".into(),
            JsonValue::Array(plan.lines.iter().map(|l| JsonValue::String(l.to_string())).collect()),
        ),
    ]);
    serde_json::to_string(&doc).expect("plan serializes")
}

pub fn validate_subgoal_plan(plan: &SubgoalPlan, scene: Option<&EnvState>) -> Vec<Violation> {
    let vocab = sd_vocabulary();
    let mut out = Vec::new();
    let mut used_actions = BTreeSet::new();
    for (i, line) in plan.lines.iter().enumerate() {
        let ln = i + 1;
        if (line.op == LineOp::Single) != (line.operands.len() == 1) {
            out.push(Violation::new(ViolationKind::OperandCount, format!("line {ln}")));
        }
        for prim in &line.operands {
            let Some(entry) = vocab.get(&prim.predicate) else {
                out.push(Violation::new(
                    ViolationKind::UnknownPredicate,
                    format!("line {ln}: `{}` is not in the vocabulary", prim.predicate),
                ));
                continue;
            };
            if entry.kind == PrimitiveKind::Action {
                used_actions.insert(entry.name.clone());
            }
            if prim.args.len() != entry.arity() {
                out.push(Violation::new(
                    ViolationKind::ArityMismatch,
                    format!("line {ln}: {} takes {} argument(s), got {}", entry.name, entry.arity(), prim.args.len()),
                ));
                continue;
            }
            for (slot, arg) in entry.slots.iter().zip(&prim.args) {
                let is_char_name = normalize_name(&arg.name) == "character";
                if entry.kind == PrimitiveKind::Action && is_char_name {
                    out.push(Violation::new(
                        ViolationKind::CharacterArgument,
                        format!("line {ln}: {} takes items, not agents", entry.name),
                    ));
                    continue;
                }
                let Some(scene) = scene else { continue };
                let Some(node) = i64::try_from(arg.id).ok().and_then(|id| scene.node(id)) else {
                    out.push(Violation::new(
                        ViolationKind::UnresolvedId,
                        format!("line {ln}: `{arg}` is not in the scene"),
                    ));
                    continue;
                };
                if !node.name_matches(&arg.name) {
                    out.push(Violation::new(
                        ViolationKind::UnknownObject,
                        format!("line {ln}: id {} is `{}`, not `{}`", node.id, node.name, arg.name),
                    ));
                    continue;
                }
                if *slot == SlotKind::Character && node.id != scene.character_id() {
                    out.push(Violation::new(
                        ViolationKind::TypeMismatch,
                        format!("line {ln}: {} expects the character, got `{arg}`", entry.name),
                    ));
                }
                for prop in &entry.restriction {
                    if !node.has_property(prop) {
                        out.push(Violation::new(
                            ViolationKind::PropertyUnsat,
                            format!("line {ln}: {} needs `{arg}` to be {prop}", entry.name),
                        ));
                    }
                }
            }
        }
    }
    let listed: BTreeSet<String> = plan
        .actions_to_include
        .iter()
        .map(|a| a.trim().to_ascii_uppercase())
        .collect();
    for a in &listed {
        if vocab.action(a).is_none() {
            out.push(Violation::new(
                ViolationKind::UnknownPredicate,
                format!("`{a}` in actions_to_include is not an action"),
            ));
        }
    }
    let inconsistent = |m: String| Violation::new(ViolationKind::NecessityInconsistent, m);
    if plan.necessity && listed.is_empty() {
        out.push(inconsistent("necessity is yes but no actions are listed".into()));
    }
    if !plan.necessity && !listed.is_empty() {
        out.push(inconsistent("necessity is no but actions are listed".into()));
    }
    for a in listed.difference(&used_actions) {
        out.push(inconsistent(format!("listed action {a} is never used")));
    }
    for a in used_actions.difference(&listed) {
        out.push(inconsistent(format!("action {a} is used but not listed")));
    }
    out
}

/// Operands sorted within each line; line order kept; listed actions as a set.
pub fn plan_signature(plan: &SubgoalPlan) -> String {
    let actions: BTreeSet<String> = plan
        .actions_to_include
        .iter()
        .map(|a| a.trim().to_ascii_uppercase())
        .collect();
    let lines: Vec<(LineOp, Vec<String>)> = plan
        .lines
        .iter()
        .map(|l| {
            let mut ops: Vec<String> = l.operands.iter().map(Primitive::normalized).collect();
            ops.sort();
            (l.op, ops)
        })
        .collect();
    serde_json::to_string(&(plan.necessity, actions, lines)).expect("signature serializes")
}

pub fn canonicalize_subgoal_plan(plan: &SubgoalPlan, scene: Option<&EnvState>) -> CanonicalSignature {
    let violations = validate_subgoal_plan(plan, scene);
    CanonicalSignature::gate(&violations, || plan_signature(plan))
}

pub fn canonicalize_subgoal_text(
    text: &str,
    opts: ParseOptions,
    scene: Option<&EnvState>,
) -> CanonicalSignature {
    match parse_subgoal_plan_with(text, opts) {
        Ok(p) => canonicalize_subgoal_plan(&p, scene),
        Err(e) => CanonicalSignature::Invalid((&e.to_violation()).into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_1: &str = r#"{"necessity_to_use_action": "no", "actions_to_include": [], "output": ["NEXT_TO(character.65, dvd_player.1000)", "FACING(character.65, dvd_player.1000)", "PLUGGED_IN(dvd_player.1000) and CLOSED(dvd_player.1000)", "ON(dvd_player.1000)"]}"#;
    const EXAMPLE_2: &str = r#"{"necessity_to_use_action": "yes", "actions_to_include": ["LOOKAT"], "output": ["NEXT_TO(character.65, computer.417)", "ONTOP(character.65, chair.356)", "HOLDS_RH(character.65, mouse.413) and HOLDS_LH(character.65, keyboard.415)", "FACING(character.65, computer.417)", "LOOKAT(computer.417)"]}"#;

    fn kinds(v: &[Violation]) -> Vec<ViolationKind> {
        v.iter().map(|v| v.kind).collect()
    }

    fn plan(lines: &[&str], necessity: bool, actions: &[&str]) -> SubgoalPlan {
        SubgoalPlan {
            necessity,
            actions_to_include: actions.iter().map(|s| s.to_string()).collect(),
            lines: lines
                .iter()
                .enumerate()
                .map(|(i, l)| parse_line(l, i + 1).unwrap())
                .collect(),
        }
    }

    #[test]
    fn vocabulary_tables() {
        let v = sd_vocabulary();
        assert_eq!(v.iter().filter(|e| e.kind == PrimitiveKind::State).count(), 17);
        assert_eq!(v.iter().filter(|e| e.kind == PrimitiveKind::Action).count(), 19);
        assert_eq!(v.get("BETWEEN").unwrap().arity(), 3);
        assert_eq!(v.get("SLEEP").unwrap().arity(), 0);
        assert_eq!(v.get("FACING").unwrap().slots, [SlotKind::Character, SlotKind::Object]);
        assert_eq!(v.get("DRINK").unwrap().restriction, ["DRINKABLE", "RECIPIENT"]);
    }

    #[test]
    fn paper_examples_parse_and_validate() {
        let p = parse_subgoal_plan(EXAMPLE_1).unwrap();
        assert_eq!(p.lines.len(), 4);
        assert_eq!(p.lines[0].op, LineOp::Single);
        assert_eq!(p.lines[2].op, LineOp::And);
        assert!(validate_subgoal_plan(&p, None).is_empty());
        let p = parse_subgoal_plan(EXAMPLE_2).unwrap();
        assert_eq!(p.lines[2].operands.len(), 2);
        assert!(validate_subgoal_plan(&p, None).is_empty());
    }

    #[test]
    fn grammar_errors() {
        assert_eq!(
            parse_line("A(x.1) and B(y.2) or C(z.3)", 3),
            Err(SchemaError::MixedOperators { line: 3 })
        );
        assert_eq!(
            parse_line("ON(tv)", 1),
            Err(SchemaError::BadRef { token: "tv".into() })
        );
        assert!(matches!(parse_line("ON(tv.1", 1), Err(SchemaError::Parse { .. })));
        assert!(matches!(parse_line("ON(tv.1) then OFF(tv.1)", 1), Err(SchemaError::Parse { .. })));
        assert_eq!(parse_line("SLEEP", 1).unwrap().operands[0].args, []);
    }

    #[test]
    fn validation() {
        let p = plan(&["TELEPORT(character.65)"], false, &[]);
        assert_eq!(kinds(&validate_subgoal_plan(&p, None)), [ViolationKind::UnknownPredicate]);
        let p = plan(&["SLEEP(character.65)"], true, &["SLEEP"]);
        assert_eq!(kinds(&validate_subgoal_plan(&p, None)), [ViolationKind::ArityMismatch]);
        let p = plan(&["ON(tv.1)"], true, &[]);
        assert_eq!(kinds(&validate_subgoal_plan(&p, None)), [ViolationKind::NecessityInconsistent]);
        let p = plan(&["LOOKAT(tv.1)"], false, &[]);
        assert_eq!(kinds(&validate_subgoal_plan(&p, None)), [ViolationKind::NecessityInconsistent]);
    }

    #[test]
    fn scene_restrictions() {
        use crate::scene::EnvNode;
        let scene = EnvState::new(
            [
                EnvNode::new(65, "character"),
                EnvNode::new(7, "book").with_properties(["GRABBABLE"]),
            ],
            [],
            65,
        )
        .unwrap();
        let p = plan(&["READ(book.7)"], true, &["READ"]);
        assert_eq!(kinds(&validate_subgoal_plan(&p, Some(&scene))), [ViolationKind::PropertyUnsat]);
        let p = plan(&["FACING(book.7, book.7)"], false, &[]);
        assert_eq!(kinds(&validate_subgoal_plan(&p, Some(&scene))), [ViolationKind::TypeMismatch]);
        let p = plan(&["ON(lamp.9)"], false, &[]);
        assert_eq!(kinds(&validate_subgoal_plan(&p, Some(&scene))), [ViolationKind::UnresolvedId]);
    }

    #[test]
    fn signatures() {
        let a = plan(&["ON(a.1) and OFF(b.2)"], false, &[]);
        let b = plan(&["OFF(b.2) and ON(a.1)"], false, &[]);
        assert_eq!(plan_signature(&a), plan_signature(&b));
        let c = plan(&["ON(a.1)", "OFF(b.2)"], false, &[]);
        let d = plan(&["OFF(b.2)", "ON(a.1)"], false, &[]);
        assert_ne!(plan_signature(&c), plan_signature(&d));
        let dup = plan(&["ON(a.1) and ON(a.1)"], false, &[]);
        let single = plan(&["ON(a.1)"], false, &[]);
        assert_ne!(plan_signature(&dup), plan_signature(&single));
        let spaced = plan(&["ON( A.1 )  and  off(b.2)"], false, &[]);
        assert_eq!(plan_signature(&a), plan_signature(&spaced));
    }

    #[test]
    fn round_trip() {
        let p = parse_subgoal_plan(EXAMPLE_2).unwrap();
        assert_eq!(parse_subgoal_plan_with(&to_json(&p), ParseOptions::STRICT).unwrap(), p);
    }
}
