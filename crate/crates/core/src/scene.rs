//! Symbolic scene graph: objects with states and properties, relation
//! edges, and one acting character.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::vocab::{Relation, EXCLUSIVE_PAIRS};

pub type NodeId = i64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvNode {
    pub id: NodeId,
    pub name: String,
    #[serde(default)]
    pub states: BTreeSet<String>,
    #[serde(default)]
    pub properties: BTreeSet<String>,
    #[serde(default)]
    pub is_room: bool,
}

impl EnvNode {
    pub fn new(id: NodeId, name: impl Into<String>) -> Self {
        Self {
            id,
            name: name.into(),
            states: BTreeSet::new(),
            properties: BTreeSet::new(),
            is_room: false,
        }
    }

    pub fn with_states<I: IntoIterator<Item = S>, S: AsRef<str>>(mut self, states: I) -> Self {
        self.states
            .extend(states.into_iter().map(|s| s.as_ref().to_ascii_uppercase()));
        self
    }

    pub fn with_properties<I: IntoIterator<Item = S>, S: AsRef<str>>(mut self, props: I) -> Self {
        self.properties
            .extend(props.into_iter().map(|s| s.as_ref().to_ascii_uppercase()));
        self
    }

    pub fn room(mut self) -> Self {
        self.is_room = true;
        self
    }

    pub fn has_state(&self, state: &str) -> bool {
        self.states.contains(state)
    }

    pub fn has_property(&self, prop: &str) -> bool {
        self.properties.contains(prop)
    }

    /// Name comparison used for grounding: case- and whitespace-insensitive.
    pub fn name_matches(&self, name: &str) -> bool {
        normalize_name(&self.name) == normalize_name(name)
    }
}

/// Lowercase with inner whitespace runs collapsed to one space.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EnvEdge {
    pub from: NodeId,
    pub relation: Relation,
    pub to: NodeId,
}

impl EnvEdge {
    pub fn new(from: NodeId, relation: Relation, to: NodeId) -> Self {
        Self { from, relation, to }
    }
}

/// On-disk form of a scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFile {
    pub nodes: Vec<EnvNode>,
    #[serde(default)]
    pub edges: Vec<EnvEdge>,
    pub character_id: NodeId,
}

/// A scene whose invariants have been checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SceneFile", into = "SceneFile")]
pub struct EnvState {
    nodes: BTreeMap<NodeId, EnvNode>,
    edges: BTreeSet<EnvEdge>,
    character_id: NodeId,
}

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scene JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scene invariant violated: {0}")]
    SceneInvariantViolation(String),
}

impl TryFrom<SceneFile> for EnvState {
    type Error = String;

    fn try_from(file: SceneFile) -> Result<Self, Self::Error> {
        EnvState::new(file.nodes, file.edges, file.character_id).map_err(|e| e.to_string())
    }
}

impl From<EnvState> for SceneFile {
    fn from(s: EnvState) -> Self {
        SceneFile {
            nodes: s.nodes.into_values().collect(),
            edges: s.edges.into_iter().collect(),
            character_id: s.character_id,
        }
    }
}

impl EnvState {
    pub fn new(
        nodes: impl IntoIterator<Item = EnvNode>,
        edges: impl IntoIterator<Item = EnvEdge>,
        character_id: NodeId,
    ) -> Result<Self, SceneError> {
        let mut map = BTreeMap::new();
        for mut node in nodes {
            node.states = node.states.iter().map(|s| s.trim().to_ascii_uppercase()).collect();
            node.properties = node
                .properties
                .iter()
                .map(|s| s.trim().to_ascii_uppercase())
                .collect();
            let id = node.id;
            if map.insert(id, node).is_some() {
                return Err(SceneError::SceneInvariantViolation(format!("duplicate node id {id}")));
            }
        }
        let state = EnvState {
            nodes: map,
            edges: edges.into_iter().collect(),
            character_id,
        };
        state.check()?;
        Ok(state)
    }

    /// Re-checks every invariant.
    pub fn check(&self) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::SceneInvariantViolation(m));
        if !self.nodes.contains_key(&self.character_id) {
            return bad(format!("character node {} missing", self.character_id));
        }
        for node in self.nodes.values() {
            for (a, b) in EXCLUSIVE_PAIRS {
                if node.has_state(a) && node.has_state(b) {
                    return bad(format!("node {} ({}) is both {a} and {b}", node.id, node.name));
                }
            }
        }
        for e in &self.edges {
            for end in [e.from, e.to] {
                if !self.nodes.contains_key(&end) {
                    return bad(format!("edge {:?} references missing node {end}", e));
                }
            }
        }
        Ok(())
    }

    pub fn character_id(&self) -> NodeId {
        self.character_id
    }

    pub fn character(&self) -> &EnvNode {
        &self.nodes[&self.character_id]
    }

    pub fn node(&self, id: NodeId) -> Option<&EnvNode> {
        self.nodes.get(&id)
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> Option<&mut EnvNode> {
        self.nodes.get_mut(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &EnvNode> {
        self.nodes.values()
    }

    pub fn nodes_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a EnvNode> + 'a {
        self.nodes.values().filter(move |n| n.name_matches(name))
    }

    pub fn has_object_named(&self, name: &str) -> bool {
        self.nodes_named(name).next().is_some()
    }

    pub fn edges(&self) -> impl Iterator<Item = &EnvEdge> {
        self.edges.iter()
    }

    pub fn has_edge(&self, from: NodeId, relation: Relation, to: NodeId) -> bool {
        self.edges.contains(&EnvEdge::new(from, relation, to))
    }

    pub(crate) fn add_edge(&mut self, from: NodeId, relation: Relation, to: NodeId) {
        self.edges.insert(EnvEdge::new(from, relation, to));
    }

    pub(crate) fn remove_edges(&mut self, pred: impl Fn(&EnvEdge) -> bool) {
        self.edges.retain(|e| !pred(e));
    }

    /// Targets of `from`'s outgoing edges with `relation`.
    pub fn targets(&self, from: NodeId, relation: Relation) -> impl Iterator<Item = NodeId> + '_ {
        self.edges
            .iter()
            .filter(move |e| e.from == from && e.relation == relation)
            .map(|e| e.to)
    }
}

/// Loads a scene from an instance file (its `scene` member) or from a bare
/// scene document.
pub fn load_scene(path: impl AsRef<Path>) -> Result<EnvState, SceneError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })?;
    scene_from_json(&text)
}

pub fn scene_from_json(text: &str) -> Result<EnvState, SceneError> {
    let mut doc: serde_json::Value = serde_json::from_str(text)?;
    let scene = match doc.get_mut("scene") {
        Some(s) => s.take(),
        None => doc,
    };
    let file: SceneFile = serde_json::from_value(scene)?;
    EnvState::new(file.nodes, file.edges, file.character_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn washer_scene() -> String {
        r#"{
          "instance_id": "wash-1",
          "task": "as",
          "scene": {
            "nodes": [
              {"id": 65, "name": "character"},
              {"id": 1, "name": "bathroom", "is_room": true},
              {"id": 1001, "name": "washing_machine",
               "states": ["PLUGGED_IN", "CLOSED", "OFF"],
               "properties": ["CAN_OPEN", "HAS_PLUG", "HAS_SWITCH", "RECIPIENT"]}
            ],
            "edges": [{"from": 65, "relation": "INSIDE", "to": 1}],
            "character_id": 65
          }
        }"#
        .to_string()
    }

    #[test]
    fn loads_instance_scene() {
        let s = scene_from_json(&washer_scene()).unwrap();
        let wm = s.node(1001).unwrap();
        assert!(wm.has_state("PLUGGED_IN") && wm.has_state("CLOSED") && wm.has_state("OFF"));
        assert!(s.has_edge(65, Relation::Inside, 1));
        assert_eq!(s.character().name, "character");
    }

    #[test]
    fn exclusive_states_rejected() {
        let doc = washer_scene().replace("\"OFF\"", "\"OFF\", \"ON\"");
        assert!(matches!(
            scene_from_json(&doc),
            Err(SceneError::Json(_)) | Err(SceneError::SceneInvariantViolation(_))
        ));
        let n = EnvNode::new(2, "tv").with_states(["ON", "OFF"]);
        let err = EnvState::new([EnvNode::new(1, "character"), n], [], 1).unwrap_err();
        assert!(matches!(err, SceneError::SceneInvariantViolation(_)));
    }

    #[test]
    fn dangling_edge_rejected() {
        let err = EnvState::new(
            [EnvNode::new(1, "character")],
            [EnvEdge::new(1, Relation::Close, 99)],
            1,
        )
        .unwrap_err();
        assert!(matches!(err, SceneError::SceneInvariantViolation(_)));
        let doc = washer_scene().replace("\"to\": 1}", "\"to\": 7}");
        assert!(scene_from_json(&doc).is_err());
    }

    #[test]
    fn missing_character_rejected() {
        assert!(EnvState::new([EnvNode::new(2, "tv")], [], 1).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = scene_from_json(&washer_scene()).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: EnvState = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn name_normalization() {
        assert_eq!(normalize_name("  Washing   Machine "), "washing machine");
        assert!(EnvNode::new(1, "sink").name_matches("Sink"));
    }
}
