//! Action sequencing programs: an ordered JSON object whose keys are action
//! names and whose values are `[name, id, ...]` argument lists.

use serde::{Deserialize, Serialize};

use super::{ParseOptions, SchemaError};
use crate::engine::CanonicalSignature;
use crate::json::{parse_completion, JsonValue};
use crate::library::action_library;
use crate::scene::{normalize_name, EnvState, NodeId};
use crate::violation::{Violation, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectArg {
    pub name: String,
    pub id: String,
}

impl ObjectArg {
    pub fn new(name: impl Into<String>, id: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            id: id.into(),
        }
    }

    /// Numeric scene id, when the id is an integer.
    pub fn node_id(&self) -> Option<NodeId> {
        self.id.trim().parse().ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionStep {
    pub action: String,
    pub args: Vec<ObjectArg>,
}

impl ActionStep {
    pub fn new(action: impl Into<String>, args: Vec<ObjectArg>) -> Self {
        Self {
            action: action.into(),
            args,
        }
    }

    /// Upper-cased action name.
    pub fn action_key(&self) -> String {
        self.action.trim().to_ascii_uppercase()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ActionProgram {
    pub steps: Vec<ActionStep>,
}

pub fn parse_program(text: &str) -> Result<ActionProgram, SchemaError> {
    parse_program_with(text, ParseOptions::LENIENT)
}

pub fn parse_program_with(text: &str, opts: ParseOptions) -> Result<ActionProgram, SchemaError> {
    let doc = parse_completion(text, opts.strict)?;
    program_from_json(&doc)
}

pub fn program_from_json(doc: &JsonValue) -> Result<ActionProgram, SchemaError> {
    let entries = doc
        .as_object()
        .ok_or_else(|| SchemaError::shape("<root>", "an object of action commands"))?;
    if entries.is_empty() {
        return Err(SchemaError::EmptyProgram);
    }
    let mut steps = Vec::with_capacity(entries.len());
    for (i, (action, value)) in entries.iter().enumerate() {
        let bad = || SchemaError::BadArgShape { step: i };
        let items = value.as_array().ok_or_else(bad)?;
        if !matches!(items.len(), 0 | 2 | 4) {
            return Err(bad());
        }
        let texts = items
            .iter()
            .map(JsonValue::scalar_text)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(bad)?;
        let args = texts
            .chunks(2)
            .map(|pair| ObjectArg::new(pair[0].clone(), pair[1].clone()))
            .collect();
        steps.push(ActionStep::new(action.clone(), args));
    }
    Ok(ActionProgram { steps })
}

/// Serializes with one key per step, repeated keys included.
pub fn to_json(prog: &ActionProgram) -> String {
    let entries = prog
        .steps
        .iter()
        .map(|s| {
            let args = s
                .args
                .iter()
                .flat_map(|a| [JsonValue::String(a.name.clone()), JsonValue::String(a.id.clone())])
                .collect();
            (s.action.clone(), JsonValue::Array(args))
        })
        .collect();
    serde_json::to_string(&JsonValue::Object(entries)).expect("program serializes")
}

/// Static checks: library membership, arity, no `character` arguments, and,
/// with a scene, id resolution and property preconditions.
pub fn validate_program(prog: &ActionProgram, scene: Option<&EnvState>) -> Vec<Violation> {
    let lib = action_library();
    let mut out = Vec::new();
    if prog.steps.is_empty() {
        out.push(Violation::new(ViolationKind::EmptyProgram, "program has no actions"));
    }
    for (i, step) in prog.steps.iter().enumerate() {
        let Some(def) = lib.get(&step.action) else {
            out.push(Violation::new(
                ViolationKind::UnknownAction,
                format!("step {i}: `{}` is not in the action library", step.action),
            ));
            continue;
        };
        if step.args.len() != def.arity {
            out.push(Violation::new(
                ViolationKind::ArityMismatch,
                format!("step {i}: {} takes {} object(s), got {}", def.name, def.arity, step.args.len()),
            ));
        }
        for (slot, arg) in step.args.iter().enumerate() {
            if normalize_name(&arg.name) == "character" {
                out.push(Violation::new(
                    ViolationKind::CharacterArgument,
                    format!("step {i}: character used as an object argument"),
                ));
                continue;
            }
            let Some(scene) = scene else { continue };
            let Some(node) = arg.node_id().and_then(|id| scene.node(id)) else {
                out.push(Violation::new(
                    ViolationKind::UnresolvedId,
                    format!("step {i}: id `{}` of `{}` is not in the scene", arg.id, arg.name),
                ));
                continue;
            };
            if !node.name_matches(&arg.name) {
                out.push(Violation::new(
                    ViolationKind::UnknownObject,
                    format!("step {i}: id {} is `{}`, not `{}`", node.id, node.name, arg.name),
                ));
                continue;
            }
            if let Some(required) = def.preconditions.get(slot) {
                for prop in required {
                    if !node.has_property(prop) {
                        out.push(Violation::new(
                            ViolationKind::PropertyUnsat,
                            format!("step {i}: {} needs `{}` to be {prop}", def.name, node.name),
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Ordered `(ACTION, [(name, id)])` tuples; step order is part of the meaning.
pub fn program_signature(prog: &ActionProgram) -> String {
    let steps: Vec<(String, Vec<(String, &str)>)> = prog
        .steps
        .iter()
        .map(|s| {
            let args = s
                .args
                .iter()
                .map(|a| (normalize_name(&a.name), a.id.as_str()))
                .collect();
            (s.action_key(), args)
        })
        .collect();
    serde_json::to_string(&steps).expect("steps serialize")
}

pub fn canonicalize_program(prog: &ActionProgram, scene: Option<&EnvState>) -> CanonicalSignature {
    let violations = validate_program(prog, scene);
    CanonicalSignature::gate(&violations, || program_signature(prog))
}

pub fn canonicalize_program_text(
    text: &str,
    opts: ParseOptions,
    scene: Option<&EnvState>,
) -> CanonicalSignature {
    match parse_program_with(text, opts) {
        Ok(p) => canonicalize_program(&p, scene),
        Err(e) => CanonicalSignature::Invalid((&e.to_violation()).into()),
    }
}
