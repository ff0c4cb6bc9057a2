//! Goal interpretation: node, edge and action goal sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ParseOptions, SchemaError};
use crate::engine::CanonicalSignature;
use crate::json::{parse_completion, JsonValue};
use crate::library::action_library;
use crate::metrics::{Counts, Prf};
use crate::scalar::Scalar;
use crate::scene::{normalize_name, EnvState};
use crate::violation::{Violation, ViolationKind};
use crate::vocab::{NodeState, Relation};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeGoal {
    pub name: String,
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeGoal {
    pub from_name: String,
    pub relation: String,
    pub to_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionGoal {
    pub action: String,
}

impl NodeGoal {
    pub fn new(name: &str, state: &str) -> Self {
        Self {
            name: normalize_name(name),
            state: state.trim().to_ascii_uppercase(),
        }
    }
}

impl EdgeGoal {
    pub fn new(from: &str, relation: &str, to: &str) -> Self {
        Self {
            from_name: normalize_name(from),
            relation: relation.trim().to_ascii_uppercase(),
            to_name: normalize_name(to),
        }
    }
}

impl ActionGoal {
    pub fn new(action: &str) -> Self {
        Self {
            action: action.trim().to_ascii_uppercase(),
        }
    }
}

/// Parsed goal sets. Duplicates collapse and order is irrelevant.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GoalSpec {
    pub node_goals: BTreeSet<NodeGoal>,
    pub edge_goals: BTreeSet<EdgeGoal>,
    pub action_goals: BTreeSet<ActionGoal>,
}

/// Allowed `to_name` targets per relation.
pub type RelObjPairs = BTreeMap<String, Vec<String>>;

#[derive(Debug, Clone, Copy, Default)]
pub struct GiContext<'a> {
    pub scene: Option<&'a EnvState>,
    pub rel_obj_pairs: Option<&'a RelObjPairs>,
}

const NODE_KEYS: [&str; 2] = ["node goals", "node_goals"];
const EDGE_KEYS: [&str; 2] = ["edge goals", "edge_goals"];
const ACTION_KEYS: [&str; 2] = ["action goals", "action_goals"];

pub fn parse_gi(text: &str) -> Result<GoalSpec, SchemaError> {
    parse_gi_with(text, ParseOptions::LENIENT)
}

pub fn parse_gi_with(text: &str, opts: ParseOptions) -> Result<GoalSpec, SchemaError> {
    let doc = parse_completion(text, opts.strict)?;
    goal_spec_from_json(&doc)
}

pub fn goal_spec_from_json(doc: &JsonValue) -> Result<GoalSpec, SchemaError> {
    let entries = doc
        .as_object()
        .ok_or_else(|| SchemaError::shape("<root>", "an object"))?;
    let mut spec = GoalSpec::default();
    for (key, value) in entries {
        let k = key.trim();
        if NODE_KEYS.contains(&k) {
            for item in list(key, value)? {
                spec.node_goals
                    .insert(NodeGoal::new(field(key, item, "name")?, field(key, item, "state")?));
            }
        } else if EDGE_KEYS.contains(&k) {
            for item in list(key, value)? {
                spec.edge_goals.insert(EdgeGoal::new(
                    field(key, item, "from_name")?,
                    field(key, item, "relation")?,
                    field(key, item, "to_name")?,
                ));
            }
        } else if ACTION_KEYS.contains(&k) {
            for item in list(key, value)? {
                spec.action_goals.insert(ActionGoal::new(field(key, item, "action")?));
            }
        } else {
            log::warn!("ignoring unknown goal key `{key}`");
        }
    }
    if spec.action_goals.len() >= 3 {
        log::warn!("{} action goals; fewer than three expected", spec.action_goals.len());
    }
    Ok(spec)
}

fn list<'a>(key: &str, value: &'a JsonValue) -> Result<&'a [JsonValue], SchemaError> {
    value
        .as_array()
        .ok_or_else(|| SchemaError::shape(key, "a list"))
}

fn field<'a>(key: &str, item: &'a JsonValue, name: &str) -> Result<&'a str, SchemaError> {
    item.get(name)
        .and_then(JsonValue::as_str)
        .ok_or_else(|| SchemaError::shape(format!("{key}.{name}"), "a string"))
}

/// Serializes with the space-separated key names, goals in sorted order.
pub fn to_json(spec: &GoalSpec) -> String {
    let nodes: Vec<_> = spec
        .node_goals
        .iter()
        .map(|g| serde_json::json!({"name": g.name, "state": g.state}))
        .collect();
    let edges: Vec<_> = spec
        .edge_goals
        .iter()
        .map(|g| serde_json::json!({"from_name": g.from_name, "relation": g.relation, "to_name": g.to_name}))
        .collect();
    let actions: Vec<_> = spec
        .action_goals
        .iter()
        .map(|g| serde_json::json!({"action": g.action}))
        .collect();
    let doc = JsonValue::Object(vec![
        ("node goals".into(), to_value(nodes)),
        ("edge goals".into(), to_value(edges)),
        ("action goals".into(), to_value(actions)),
    ]);
    serde_json::to_string(&doc).expect("goal spec serializes")
}

fn to_value(v: Vec<serde_json::Value>) -> JsonValue {
    serde_json::from_value(serde_json::Value::Array(v)).expect("plain JSON converts")
}

pub fn validate_gi(spec: &GoalSpec, scene: Option<&EnvState>) -> Vec<Violation> {
    validate_gi_with(
        spec,
        &GiContext {
            scene,
            rel_obj_pairs: None,
        },
    )
}

pub fn validate_gi_with(spec: &GoalSpec, ctx: &GiContext<'_>) -> Vec<Violation> {
    let mut out = Vec::new();
    let check_object = |name: &str, out: &mut Vec<Violation>| {
        if let Some(scene) = ctx.scene {
            if !scene.has_object_named(name) {
                out.push(Violation::new(
                    ViolationKind::UnknownObject,
                    format!("object `{name}` is not in the scene"),
                ));
            }
        }
    };
    for g in &spec.node_goals {
        if g.state.parse::<NodeState>().is_err() {
            out.push(Violation::new(
                ViolationKind::InvalidState,
                format!("state `{}` of `{}`", g.state, g.name),
            ));
        }
        check_object(&g.name, &mut out);
    }
    for g in &spec.edge_goals {
        if g.relation.parse::<Relation>().is_err() || !is_gi_relation(&g.relation) {
            out.push(Violation::new(
                ViolationKind::InvalidRelation,
                format!("relation `{}`", g.relation),
            ));
        }
        check_object(&g.from_name, &mut out);
        check_object(&g.to_name, &mut out);
        if let Some(pairs) = ctx.rel_obj_pairs {
            if let Some(allowed) = pairs.get(&g.relation) {
                if !allowed.iter().any(|a| normalize_name(a) == g.to_name) {
                    out.push(Violation::new(
                        ViolationKind::InvalidTarget,
                        format!("`{}` is not a {} target", g.to_name, g.relation),
                    ));
                }
            }
        }
    }
    for g in &spec.action_goals {
        let well_formed = !g.action.is_empty() && g.action.bytes().all(|b| b.is_ascii_uppercase() || b == b'_');
        if !well_formed || !action_library().contains(&g.action) {
            out.push(Violation::new(
                ViolationKind::UnknownAction,
                format!("action `{}`", g.action),
            ));
        }
    }
    out
}

/// The relation names of the goal vocabulary itself (not their aliases).
fn is_gi_relation(token: &str) -> bool {
    Relation::ALL.iter().any(|r| r.as_str() == token)
}

/// Stable encoding of the three goal sets, each as sorted tuples.
pub fn gi_signature(spec: &GoalSpec) -> String {
    let mut tuples: Vec<Vec<&str>> = Vec::new();
    tuples.extend(spec.node_goals.iter().map(|g| vec!["N", &g.name, &g.state]));
    tuples.extend(
        spec.edge_goals
            .iter()
            .map(|g| vec!["E", &g.from_name, &g.relation, &g.to_name]),
    );
    tuples.extend(spec.action_goals.iter().map(|g| vec!["A", &g.action]));
    tuples.sort();
    serde_json::to_string(&tuples).expect("tuples serialize")
}

/// Signature of a validated spec, or invalid with the first violation.
pub fn canonicalize_gi(spec: &GoalSpec, ctx: &GiContext<'_>) -> CanonicalSignature {
    let violations = validate_gi_with(spec, ctx);
    CanonicalSignature::gate(&violations, || gi_signature(spec))
}

/// Full text-to-signature path.
pub fn canonicalize_gi_text(text: &str, opts: ParseOptions, ctx: &GiContext<'_>) -> CanonicalSignature {
    match parse_gi_with(text, opts) {
        Ok(spec) => canonicalize_gi(&spec, ctx),
        Err(e) => CanonicalSignature::Invalid((&e.to_violation()).into()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScore<T> {
    pub counts: Counts,
    pub prf: Prf<T>,
}

impl<T: Scalar> LevelScore<T> {
    fn from_counts(counts: Counts) -> Self {
        Self {
            prf: counts.prf(),
            counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiScore<T> {
    pub node: LevelScore<T>,
    pub edge: LevelScore<T>,
    pub action: LevelScore<T>,
    pub overall: LevelScore<T>,
}

/// Per-level and overall set precision / recall / F1.
pub fn score_gi<T: Scalar>(pred: &GoalSpec, gold: &GoalSpec) -> GiScore<T> {
    let node = Counts::of_sets(&pred.node_goals, &gold.node_goals);
    let edge = Counts::of_sets(&pred.edge_goals, &gold.edge_goals);
    let action = Counts::of_sets(&pred.action_goals, &gold.action_goals);
    // The three tuple kinds are disjoint, so the union's counts are sums.
    let overall = node + edge + action;
    GiScore {
        node: LevelScore::from_counts(node),
        edge: LevelScore::from_counts(edge),
        action: LevelScore::from_counts(action),
        overall: LevelScore::from_counts(overall),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::EnvNode;

    const EXAMPLE: &str = "{'node goals': [{'name': 'washing_machine', 'state': 'ON'}], 'edge goals': [{'from_name': 'clothes', 'relation': 'INSIDE', 'to_name': 'washing_machine'}], 'action goals': [{'action': 'WASH'}]}";

    fn washer_scene() -> EnvState {
        EnvState::new(
            [
                EnvNode::new(65, "character"),
                EnvNode::new(1001, "washing_machine"),
                EnvNode::new(1003, "clothes"),
            ],
            [],
            65,
        )
        .unwrap()
    }

    #[test]
    fn parses_the_prompt_example() {
        let spec = parse_gi(EXAMPLE).unwrap();
        assert_eq!(spec.node_goals.len(), 1);
        assert_eq!(spec.edge_goals.len(), 1);
        assert_eq!(spec.action_goals.len(), 1);
        assert!(spec.node_goals.contains(&NodeGoal::new("washing_machine", "ON")));
    }

    #[test]
    fn fence_is_stripped() {
        let fenced = format!("```json {EXAMPLE} ```");
        assert_eq!(parse_gi(&fenced).unwrap(), parse_gi(EXAMPLE).unwrap());
        assert!(parse_gi_with(&fenced, ParseOptions::STRICT).is_err());
    }

    #[test]
    fn wrong_shape() {
        let err = parse_gi("{\"node goals\": \"oops\"}").unwrap_err();
        assert!(matches!(err, SchemaError::WrongShape { .. }));
        assert_eq!(err.to_violation().error_class(), crate::violation::ErrorClass::ParseError);
        assert!(matches!(parse_gi("not json at all"), Err(SchemaError::Parse { .. })));
        assert!(matches!(parse_gi("[1, 2]"), Err(SchemaError::WrongShape { .. })));
    }

    #[test]
    fn underscore_keys_and_missing_lists() {
        let spec = parse_gi(r#"{"node_goals": [{"name": "tv", "state": "on"}], "extra": 1}"#).unwrap();
        assert_eq!(spec.node_goals.len(), 1);
        assert!(spec.edge_goals.is_empty() && spec.action_goals.is_empty());
        assert_eq!(spec.node_goals.first().unwrap().state, "ON");
    }

    #[test]
    fn validation_cases() {
        let scene = washer_scene();
        let spec = parse_gi(EXAMPLE).unwrap();
        assert!(validate_gi(&spec, Some(&scene)).is_empty());

        let bad_state = parse_gi(r#"{"node goals": [{"name": "washing_machine", "state": "HALF_OPEN"}]}"#).unwrap();
        let v = validate_gi(&bad_state, Some(&scene));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::InvalidState);

        let dragon = parse_gi(r#"{"node goals": [{"name": "dragon", "state": "ON"}]}"#).unwrap();
        let v = validate_gi(&dragon, Some(&scene));
        assert_eq!(v[0].kind, ViolationKind::UnknownObject);
        assert_eq!(v[0].error_class(), crate::violation::ErrorClass::Hallucination);
        assert!(validate_gi(&dragon, None).is_empty());

        let fly = parse_gi(r#"{"action goals": [{"action": "FLY"}]}"#).unwrap();
        assert_eq!(validate_gi(&fly, None)[0].kind, ViolationKind::UnknownAction);
        let rel = parse_gi(r#"{"edge goals": [{"from_name": "a", "relation": "NEAR", "to_name": "b"}]}"#).unwrap();
        assert_eq!(validate_gi(&rel, None)[0].kind, ViolationKind::InvalidRelation);
    }

    #[test]
    fn relation_target_table() {
        let mut pairs = RelObjPairs::new();
        pairs.insert("INSIDE".into(), vec!["washing_machine".into()]);
        let ctx = GiContext {
            scene: None,
            rel_obj_pairs: Some(&pairs),
        };
        assert!(validate_gi_with(&parse_gi(EXAMPLE).unwrap(), &ctx).is_empty());
        let other = parse_gi(r#"{"edge goals": [{"from_name": "clothes", "relation": "INSIDE", "to_name": "sink"}]}"#).unwrap();
        assert_eq!(validate_gi_with(&other, &ctx)[0].kind, ViolationKind::InvalidTarget);
    }

    #[test]
    fn signatures() {
        let a = parse_gi(r#"{"node goals": [{"name": "a", "state": "ON"}, {"name": "b", "state": "OFF"}]}"#).unwrap();
        let b = parse_gi(r#"{"node goals": [{"state": "OFF", "name": "b"}, {"name": "a", "state": "ON"}]}"#).unwrap();
        let dup = parse_gi(r#"{"node goals": [{"name": "a", "state": "ON"}, {"name": "a", "state": "ON"}, {"name": "b", "state": "OFF"}]}"#).unwrap();
        let c = parse_gi(r#"{"node goals": [{"name": "a", "state": "OFF"}, {"name": "b", "state": "OFF"}]}"#).unwrap();
        assert_eq!(gi_signature(&a), gi_signature(&b));
        assert_eq!(gi_signature(&a), gi_signature(&dup));
        assert_ne!(gi_signature(&a), gi_signature(&c));
        let ctx = GiContext::default();
        assert!(canonicalize_gi_text("garbage", ParseOptions::LENIENT, &ctx).signature().is_none());
    }

    #[test]
    fn json_round_trip() {
        let spec = parse_gi(EXAMPLE).unwrap();
        let text = to_json(&spec);
        assert!(text.starts_with("{\"node goals\""));
        assert_eq!(parse_gi_with(&text, ParseOptions::STRICT).unwrap(), spec);
    }

    #[test]
    fn scoring() {
        let pred = GoalSpec {
            node_goals: [NodeGoal::new("a", "ON"), NodeGoal::new("b", "ON")].into(),
            ..GoalSpec::default()
        };
        let gold = GoalSpec {
            node_goals: [NodeGoal::new("b", "ON"), NodeGoal::new("c", "ON")].into(),
            ..GoalSpec::default()
        };
        let s: GiScore<f64> = score_gi(&pred, &gold);
        assert_eq!((s.node.prf.precision, s.node.prf.recall, s.node.prf.f1), (0.5, 0.5, 0.5));
        let s: GiScore<f64> = score_gi(&gold, &gold);
        assert_eq!(s.overall.prf.f1, 1.0);
        let s: GiScore<f64> = score_gi(&GoalSpec::default(), &gold);
        assert_eq!((s.overall.prf.precision, s.overall.prf.recall, s.overall.prf.f1), (0.0, 0.0, 0.0));
    }
}
