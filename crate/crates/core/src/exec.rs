//! Symbolic execution of action programs over a scene graph, and goal
//! checking for task and execution success.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::library::action_library;
use crate::scene::{EnvNode, EnvState, NodeId};
use crate::schema::action_seq::{ActionProgram, ActionStep};
use crate::vocab::Relation;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum FailReason {
    UnknownAction { action: String },
    ArityMismatch { expected: usize, got: usize },
    UnresolvedObject { id: String },
    ProximityViolation { object: NodeId },
    MissingProperty { object: NodeId, property: String },
    WrongState { object: NodeId, required: String },
    HandsFull,
    NotHolding { object: NodeId },
    NotSittingOrLying,
}

impl fmt::Display for FailReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailReason::UnknownAction { action } => write!(f, "unknown action {action}"),
            FailReason::ArityMismatch { expected, got } => {
                write!(f, "expected {expected} object(s), got {got}")
            }
            FailReason::UnresolvedObject { id } => write!(f, "no object with id {id}"),
            FailReason::ProximityViolation { object } => write!(f, "character is not next to {object}"),
            FailReason::MissingProperty { object, property } => {
                write!(f, "object {object} lacks {property}")
            }
            FailReason::WrongState { object, required } => {
                write!(f, "object {object} must be {required}")
            }
            FailReason::HandsFull => f.write_str("both hands are full"),
            FailReason::NotHolding { object } => write!(f, "character is not holding {object}"),
            FailReason::NotSittingOrLying => f.write_str("character is neither sitting nor lying"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StepOutcome {
    Ok,
    Failed(FailReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepResult {
    pub index: usize,
    pub action: String,
    pub outcome: StepOutcome,
}

/// Outcome of running a program. Steps after the first failure are not run
/// and do not appear in `steps`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecTrace {
    pub steps: Vec<StepResult>,
    #[serde(rename = "final")]
    pub final_state: EnvState,
    pub executed_actions: Vec<String>,
}

impl ExecTrace {
    pub fn failed_step(&self) -> Option<(usize, &FailReason)> {
        self.steps.iter().find_map(|s| match &s.outcome {
            StepOutcome::Failed(r) => Some((s.index, r)),
            StepOutcome::Ok => None,
        })
    }

    pub fn succeeded(&self) -> bool {
        self.failed_step().is_none()
    }
}

/// Runs `prog` on a private copy of `scene`.
pub fn execute_program(scene: &EnvState, prog: &ActionProgram) -> ExecTrace {
    let mut state = scene.clone();
    let mut steps = Vec::with_capacity(prog.steps.len());
    let mut executed = Vec::new();
    for (index, step) in prog.steps.iter().enumerate() {
        let action = step.action_key();
        let outcome = match apply_step(&mut state, step) {
            Ok(()) => {
                executed.push(action.clone());
                StepOutcome::Ok
            }
            Err(r) => StepOutcome::Failed(r),
        };
        let failed = matches!(outcome, StepOutcome::Failed(_));
        steps.push(StepResult {
            index,
            action,
            outcome,
        });
        if failed {
            break;
        }
    }
    ExecTrace {
        steps,
        final_state: state,
        executed_actions: executed,
    }
}

fn is_near(s: &EnvState, obj: NodeId) -> bool {
    let c = s.character_id();
    s.has_edge(c, Relation::Close, obj) || held_hand(s, obj).is_some()
}

fn held_hand(s: &EnvState, obj: NodeId) -> Option<Relation> {
    let c = s.character_id();
    [Relation::HoldsRh, Relation::HoldsLh]
        .into_iter()
        .find(|&h| s.has_edge(c, h, obj))
}

fn require_near(s: &EnvState, obj: NodeId) -> Result<(), FailReason> {
    if is_near(s, obj) {
        Ok(())
    } else {
        Err(FailReason::ProximityViolation { object: obj })
    }
}

fn require_held(s: &EnvState, obj: NodeId) -> Result<Relation, FailReason> {
    held_hand(s, obj).ok_or(FailReason::NotHolding { object: obj })
}

fn require_state(node: &EnvNode, state: &str) -> Result<(), FailReason> {
    if node.has_state(state) {
        Ok(())
    } else {
        Err(FailReason::WrongState {
            object: node.id,
            required: state.to_string(),
        })
    }
}

fn set_state(s: &mut EnvState, obj: NodeId, on: &str, off: &str) {
    let node = s.node_mut(obj).expect("resolved node");
    node.states.remove(off);
    node.states.insert(on.to_string());
}

fn release(s: &mut EnvState, obj: NodeId) {
    let c = s.character_id();
    s.remove_edges(|e| e.from == c && e.to == obj && matches!(e.relation, Relation::HoldsRh | Relation::HoldsLh));
}

fn apply_step(s: &mut EnvState, step: &ActionStep) -> Result<(), FailReason> {
    let def = action_library()
        .get(&step.action)
        .ok_or_else(|| FailReason::UnknownAction {
            action: step.action.clone(),
        })?;
    if step.args.len() != def.arity {
        return Err(FailReason::ArityMismatch {
            expected: def.arity,
            got: step.args.len(),
        });
    }
    let mut ids = Vec::with_capacity(step.args.len());
    for (slot, arg) in step.args.iter().enumerate() {
        let node = arg
            .node_id()
            .and_then(|id| s.node(id))
            .ok_or_else(|| FailReason::UnresolvedObject { id: arg.id.clone() })?;
        for prop in &def.preconditions[slot] {
            if !node.has_property(prop) {
                return Err(FailReason::MissingProperty {
                    object: node.id,
                    property: prop.clone(),
                });
            }
        }
        ids.push(node.id);
    }
    let c = s.character_id();
    match def.name.as_str() {
        "WALK" | "RUN" | "FIND" => {
            let target = ids[0];
            s.remove_edges(|e| e.relation == Relation::Close && (e.from == c || e.to == c));
            s.add_edge(c, Relation::Close, target);
            if s.node(target).is_some_and(|n| n.is_room) {
                s.remove_edges(|e| e.from == c && e.relation == Relation::Inside);
                s.add_edge(c, Relation::Inside, target);
            }
        }
        "GRAB" => {
            let obj = ids[0];
            require_near(s, obj)?;
            if held_hand(s, obj).is_none() {
                let hand = [Relation::HoldsRh, Relation::HoldsLh]
                    .into_iter()
                    .find(|&h| s.targets(c, h).next().is_none())
                    .ok_or(FailReason::HandsFull)?;
                let rooms: Vec<NodeId> = s.nodes().filter(|n| n.is_room).map(|n| n.id).collect();
                s.remove_edges(|e| {
                    e.from == obj
                        && matches!(e.relation, Relation::On | Relation::Inside)
                        && !rooms.contains(&e.to)
                });
                s.add_edge(c, hand, obj);
            }
        }
        "OPEN" | "CLOSE" => {
            let obj = ids[0];
            require_near(s, obj)?;
            let (from, to) = if def.name == "OPEN" { ("CLOSED", "OPEN") } else { ("OPEN", "CLOSED") };
            require_state(&s.node(obj).expect("resolved"), from)?;
            set_state(s, obj, to, from);
        }
        "SWITCHON" | "SWITCHOFF" => {
            let obj = ids[0];
            require_near(s, obj)?;
            let node = s.node(obj).expect("resolved");
            let (from, to) = if def.name == "SWITCHON" { ("OFF", "ON") } else { ("ON", "OFF") };
            require_state(node, from)?;
            if def.name == "SWITCHON" && node.has_property("HAS_PLUG") {
                require_state(node, "PLUGGED_IN")?;
            }
            set_state(s, obj, to, from);
        }
        "PLUGIN" | "PLUGOUT" => {
            let obj = ids[0];
            require_near(s, obj)?;
            let (from, to) = if def.name == "PLUGIN" {
                ("PLUGGED_OUT", "PLUGGED_IN")
            } else {
                ("PLUGGED_IN", "PLUGGED_OUT")
            };
            require_state(&s.node(obj).expect("resolved"), from)?;
            set_state(s, obj, to, from);
        }
        "PUTBACK" | "PUTIN" => {
            let (obj, dest) = (ids[0], ids[1]);
            require_held(s, obj)?;
            require_near(s, dest)?;
            let relation = if def.name == "PUTIN" {
                require_state(&s.node(dest).expect("resolved"), "OPEN")?;
                Relation::Inside
            } else {
                Relation::On
            };
            release(s, obj);
            s.add_edge(obj, relation, dest);
        }
        "SIT" | "LIE" => {
            let obj = ids[0];
            require_near(s, obj)?;
            let (on, off) = if def.name == "SIT" { ("SITTING", "LYING") } else { ("LYING", "SITTING") };
            set_state(s, c, on, off);
            s.add_edge(c, Relation::On, obj);
        }
        "STANDUP" => {
            let me = s.character();
            if !me.has_state("SITTING") && !me.has_state("LYING") {
                return Err(FailReason::NotSittingOrLying);
            }
            let me = s.node_mut(c).expect("character");
            me.states.remove("SITTING");
            me.states.remove("LYING");
            s.remove_edges(|e| e.from == c && e.relation == Relation::On);
        }
        "WASH" | "RINSE" | "SCRUB" | "WIPE" => {
            let obj = ids[0];
            require_near(s, obj)?;
            set_state(s, obj, "CLEAN", "DIRTY");
        }
        "DRINK" | "EAT" | "READ" => {
            require_held(s, ids[0])?;
        }
        "POUR" => {
            let (src, dest) = (ids[0], ids[1]);
            require_near(s, src)?;
            require_near(s, dest)?;
            release(s, src);
        }
        "DROP" | "RELEASE" => {
            let obj = ids[0];
            require_near(s, obj)?;
            release(s, obj);
        }
        _ => {
            for &obj in &ids {
                require_near(s, obj)?;
            }
        }
    }
    Ok(())
}

/// An object named by scene id or by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObjectRef {
    Id(NodeId),
    Name(String),
}

impl ObjectRef {
    fn resolve(&self, s: &EnvState) -> Vec<NodeId> {
        match self {
            ObjectRef::Id(id) => s.node(*id).map(|n| vec![n.id]).unwrap_or_default(),
            ObjectRef::Name(name) => s.nodes_named(name).map(|n| n.id).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateGoal {
    pub object: ObjectRef,
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationGoal {
    pub from: ObjectRef,
    pub relation: Relation,
    pub to: ObjectRef,
}

/// Goal conditions for one instance. Each action line lists alternatives
/// separated by `or`; lines must be met in order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Goals {
    #[serde(default)]
    pub node: Vec<StateGoal>,
    #[serde(default)]
    pub edge: Vec<RelationGoal>,
    #[serde(default)]
    pub action_lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GoalReport {
    pub tsr: bool,
    pub esr: bool,
    pub node: Vec<bool>,
    pub edge: Vec<bool>,
    pub action: Vec<bool>,
}

impl GoalReport {
    pub fn goals_met(&self) -> bool {
        self.node.iter().chain(&self.edge).chain(&self.action).all(|&b| b)
    }
}

/// Splits `"TYPE or TOUCH"` into upper-cased alternatives.
pub fn action_alternatives(line: &str) -> Vec<String> {
    line.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .split(" or ")
        .map(|a| a.trim().to_ascii_uppercase())
        .filter(|a| !a.is_empty())
        .collect()
}

fn edge_holds(s: &EnvState, from: NodeId, relation: Relation, to: NodeId) -> bool {
    s.has_edge(from, relation, to) || (relation == Relation::Close && s.has_edge(to, relation, from))
}

pub fn check_goals(trace: &ExecTrace, goals: &Goals) -> GoalReport {
    let s = &trace.final_state;
    let node = goals
        .node
        .iter()
        .map(|g| {
            let state = g.state.trim().to_ascii_uppercase();
            g.object
                .resolve(s)
                .iter()
                .any(|&id| s.node(id).is_some_and(|n| n.has_state(&state)))
        })
        .collect();
    let edge = goals
        .edge
        .iter()
        .map(|g| {
            let (froms, tos) = (g.from.resolve(s), g.to.resolve(s));
            froms
                .iter()
                .any(|&a| tos.iter().any(|&b| edge_holds(s, a, g.relation, b)))
        })
        .collect();
    // Greedy subsequence match: each line takes the earliest remaining
    // executed action among its alternatives.
    let mut cursor = 0;
    let mut action = Vec::with_capacity(goals.action_lines.len());
    for line in &goals.action_lines {
        let alts = action_alternatives(line);
        let hit = trace.executed_actions[cursor..]
            .iter()
            .position(|a| alts.contains(a));
        match hit {
            Some(off) => {
                cursor += off + 1;
                action.push(true);
            }
            None => action.push(false),
        }
    }
    let mut report = GoalReport {
        tsr: false,
        esr: trace.succeeded(),
        node,
        edge,
        action,
    };
    report.tsr = report.esr && report.goals_met();
    report
}
