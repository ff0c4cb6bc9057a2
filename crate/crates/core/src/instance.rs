//! Instance files: one JSON document per evaluation item, holding the
//! scene, goal conditions and the task-specific gold output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::exec::Goals;
use crate::json::JsonValue;
use crate::scene::EnvState;
use crate::schema::gi::{self, GoalSpec, RelObjPairs};
use crate::schema::sd::{self, SubgoalPlan};
use crate::schema::{action_seq, SchemaError};
use crate::schema::action_seq::ActionProgram;
use crate::task::Task;
use crate::tm::{self, PddlActionSet, TmError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub instance_id: String,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<EnvState>,
    #[serde(default)]
    pub goals: Goals,
    /// Reference output in the task's own format. Kept order-preserving so
    /// programs with repeated action keys survive.
    pub gold: JsonValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_obj_pairs: Option<RelObjPairs>,
    /// Values for the prompt template placeholders.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_fields: Option<BTreeMap<String, String>>,
}

/// A parsed gold output.
#[derive(Debug, Clone, PartialEq)]
pub enum Gold {
    Goals(GoalSpec),
    Program(ActionProgram),
    Plan(SubgoalPlan),
    Pddl(PddlActionSet),
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed instance: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("instance {instance_id}: {detail}")]
    Dataset { instance_id: String, detail: String },
}

impl Instance {
    fn dataset_error(&self, detail: impl Into<String>) -> InstanceError {
        InstanceError::Dataset {
            instance_id: self.instance_id.clone(),
            detail: detail.into(),
        }
    }

    /// The gold output as text; JSON strings are returned unquoted.
    pub fn gold_text(&self) -> String {
        match &self.gold {
            JsonValue::String(s) => s.clone(),
            other => serde_json::to_string(other).expect("gold serializes"),
        }
    }

    /// Parses the gold output for this instance's task.
    pub fn parse_gold(&self) -> Result<Gold, InstanceError> {
        let schema = |e: SchemaError| self.dataset_error(format!("gold does not parse: {e}"));
        let pddl = |e: TmError| self.dataset_error(format!("gold does not parse: {e}"));
        match self.task {
            Task::GoalInterpretation => gi::goal_spec_from_json(&self.gold).map(Gold::Goals).map_err(schema),
            Task::ActionSequencing => action_seq::program_from_json(&self.gold)
                .map(Gold::Program)
                .map_err(schema),
            Task::SubgoalDecomposition => sd::plan_from_json(&self.gold).map(Gold::Plan).map_err(schema),
            Task::TransitionModeling => tm::parse_pddl_actions(&self.gold_text())
                .map(Gold::Pddl)
                .map_err(pddl),
        }
    }

    /// Checks that the instance carries what its task needs.
    pub fn check(&self) -> Result<(), InstanceError> {
        if self.task == Task::ActionSequencing && self.scene.is_none() {
            return Err(self.dataset_error("action sequencing needs a scene"));
        }
        self.parse_gold().map(|_| ())
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(&text).map_err(|source| InstanceError::Json {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<(), InstanceError> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(inst).expect("instance serializes");
    fs::write(path, text + "\n").map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// `*.json` files directly inside `dir`, sorted by path.
pub fn instance_paths(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, InstanceError> {
    let dir = dir.as_ref();
    let io = |source| InstanceError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Every instance in `dir`, sorted by instance id.
pub fn load_instances(dir: impl AsRef<Path>) -> Result<Vec<Instance>, InstanceError> {
    let mut out = instance_paths(dir)?
        .into_iter()
        .map(load_instance)
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    Ok(out)
}

/// File name of the pool for an instance.
pub fn pool_file_name(instance_id: &str) -> String {
    format!("{instance_id}.jsonl")
}
