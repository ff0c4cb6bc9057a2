//! Seeded synthetic scenes, gold outputs, renderings and candidate pools.
//!
//! Every generator returns outputs that pass their task validator. The
//! `render_*` functions reorder everything the canonical form ignores, so
//! two renderings of one value always share a signature.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::{check_goals, execute_program, Goals, ObjectRef, RelationGoal, StateGoal};
use crate::instance::Instance;
use crate::json::JsonValue;
use crate::library::action_library;
use crate::scene::{EnvEdge, EnvNode, EnvState, NodeId};
use crate::schema::action_seq::{self, ActionProgram, ActionStep, ObjectArg};
use crate::schema::gi::{ActionGoal, EdgeGoal, GoalSpec, NodeGoal};
use crate::schema::sd::{self, sd_vocabulary, LineOp, Primitive, PrimitiveKind, Ref, SlotKind, SubgoalLine, SubgoalPlan};
use crate::sources::corrupt::mix_seed;
use crate::sources::pool::PoolFile;
use crate::task::Task;
use crate::tm::{pretty_print, virtualhome_domain, Clause, Param, PddlActionBody, PddlActionSet};
use crate::vocab::Relation;

pub const CHARACTER_ID: NodeId = 1;

struct Template {
    name: &'static str,
    properties: &'static [&'static str],
    states: &'static [&'static str],
}

const TEMPLATES: &[Template] = &[
    Template { name: "tv", properties: &["HAS_SWITCH", "HAS_PLUG", "LOOKABLE"], states: &["OFF", "PLUGGED_IN"] },
    Template { name: "lamp", properties: &["HAS_SWITCH", "HAS_PLUG", "MOVABLE"], states: &["OFF", "PLUGGED_OUT"] },
    Template {
        name: "washing_machine",
        properties: &["HAS_SWITCH", "HAS_PLUG", "CAN_OPEN", "CONTAINERS", "RECIPIENT"],
        states: &["CLOSED", "OFF", "PLUGGED_IN"],
    },
    Template {
        name: "microwave",
        properties: &["HAS_SWITCH", "HAS_PLUG", "CAN_OPEN", "CONTAINERS"],
        states: &["CLOSED", "OFF", "PLUGGED_IN"],
    },
    Template { name: "fridge", properties: &["CAN_OPEN", "CONTAINERS", "HAS_PLUG"], states: &["CLOSED", "PLUGGED_IN"] },
    Template { name: "cabinet", properties: &["CAN_OPEN", "CONTAINERS", "SURFACES"], states: &["OPEN"] },
    Template { name: "cup", properties: &["GRABBABLE", "RECIPIENT", "POURABLE", "MOVABLE"], states: &["DIRTY"] },
    Template { name: "plate", properties: &["GRABBABLE", "RECIPIENT", "MOVABLE"], states: &["DIRTY"] },
    Template { name: "book", properties: &["GRABBABLE", "READABLE", "HAS_PAPER", "MOVABLE"], states: &["CLOSED"] },
    Template { name: "apple", properties: &["GRABBABLE", "EATABLE", "CUTABLE"], states: &[] },
    Template { name: "milk", properties: &["GRABBABLE", "DRINKABLE", "POURABLE"], states: &[] },
    Template { name: "clothes_shirt", properties: &["GRABBABLE", "CLOTHES", "HANGABLE"], states: &["DIRTY"] },
    Template { name: "soap", properties: &["GRABBABLE", "CREAM"], states: &[] },
    Template { name: "chair", properties: &["SITTABLE", "MOVABLE", "GRABBABLE"], states: &[] },
    Template { name: "sofa", properties: &["SITTABLE", "LIEABLE"], states: &[] },
    Template { name: "bed", properties: &["SITTABLE", "LIEABLE", "SURFACES"], states: &["CLEAN"] },
    Template { name: "kitchen_table", properties: &["SURFACES", "MOVABLE"], states: &[] },
    Template { name: "keyboard", properties: &["HAS_SWITCH", "GRABBABLE", "HAS_PLUG"], states: &["OFF", "PLUGGED_IN"] },
];

const ROOMS: [&str; 3] = ["kitchen", "bedroom", "living_room"];

/// A scene with one character, three rooms and 4–8 distinct objects, each
/// inside a room.
pub fn synth_scene(rng: &mut impl Rng) -> EnvState {
    let mut nodes = vec![EnvNode::new(CHARACTER_ID, "character")];
    for (i, room) in ROOMS.iter().enumerate() {
        nodes.push(EnvNode::new(10 + i as NodeId, *room).room());
    }
    let count = rng.gen_range(4..=8);
    let picked: Vec<&Template> = TEMPLATES.choose_multiple(rng, count).collect();
    let mut edges = vec![EnvEdge::new(CHARACTER_ID, Relation::Inside, 10)];
    for (i, t) in picked.iter().enumerate() {
        let id = 100 + i as NodeId;
        nodes.push(
            EnvNode::new(id, t.name)
                .with_properties(t.properties.iter())
                .with_states(t.states.iter()),
        );
        edges.push(EnvEdge::new(id, Relation::Inside, 10 + rng.gen_range(0..3)));
    }
    EnvState::new(nodes, edges, CHARACTER_ID).expect("synthetic scene is consistent")
}

fn objects(scene: &EnvState) -> Vec<&EnvNode> {
    scene
        .nodes()
        .filter(|n| !n.is_room && n.id != scene.character_id())
        .collect()
}

fn with_property<'a>(scene: &'a EnvState, prop: &str) -> Vec<&'a EnvNode> {
    objects(scene).into_iter().filter(|n| n.has_property(prop)).collect()
}

// ---------------------------------------------------------------- goals

fn node_goal_states(n: &EnvNode) -> Vec<&'static str> {
    let mut s = vec!["CLEAN", "DIRTY"];
    if n.has_property("HAS_SWITCH") {
        s.extend(["ON", "OFF"]);
    }
    if n.has_property("CAN_OPEN") {
        s.extend(["OPEN", "CLOSED"]);
    }
    if n.has_property("HAS_PLUG") {
        s.extend(["PLUGGED_IN", "PLUGGED_OUT"]);
    }
    s
}

/// A valid goal specification over the scene with at least two goals.
pub fn random_goal_spec(scene: &EnvState, rng: &mut impl Rng) -> GoalSpec {
    let objs = objects(scene);
    let mut spec = GoalSpec::default();
    while spec.node_goals.len() + spec.edge_goals.len() + spec.action_goals.len() < 2 {
        for _ in 0..rng.gen_range(0..=3) {
            let n = objs.choose(rng).expect("scene has objects");
            let state = node_goal_states(n).choose(rng).copied().expect("states");
            spec.node_goals.insert(NodeGoal::new(&n.name, state));
        }
        if rng.gen_bool(0.3) {
            let state = ["SITTING", "LYING"].choose(rng).expect("two");
            spec.node_goals.insert(NodeGoal::new("character", state));
        }
        for _ in 0..rng.gen_range(0..=2) {
            let pair: Vec<&&EnvNode> = objs.choose_multiple(rng, 2).collect();
            if pair.len() < 2 {
                break;
            }
            let rel = ["ON", "INSIDE", "CLOSE"].choose(rng).expect("three");
            spec.edge_goals.insert(EdgeGoal::new(&pair[0].name, rel, &pair[1].name));
        }
        if rng.gen_bool(0.3) {
            let n = objs.choose(rng).expect("scene has objects");
            let rel = ["HOLDS_RH", "HOLDS_LH", "FACING"].choose(rng).expect("three");
            spec.edge_goals.insert(EdgeGoal::new("character", rel, &n.name));
        }
        if rng.gen_bool(0.4) {
            let names: Vec<&str> = action_library().names().collect();
            spec.action_goals.insert(ActionGoal::new(names.choose(rng).expect("library")));
        }
    }
    spec
}

fn json_obj(mut entries: Vec<(&str, String)>, rng: &mut impl Rng) -> JsonValue {
    entries.shuffle(rng);
    JsonValue::Object(entries.into_iter().map(|(k, v)| (k.to_string(), JsonValue::String(v))).collect())
}

/// Goal spec JSON with every list, key order and key spelling randomized.
pub fn render_goal_spec(spec: &GoalSpec, rng: &mut impl Rng) -> String {
    let mut nodes: Vec<JsonValue> = spec
        .node_goals
        .iter()
        .map(|g| json_obj(vec![("name", g.name.clone()), ("state", g.state.clone())], rng))
        .collect();
    let mut edges: Vec<JsonValue> = spec
        .edge_goals
        .iter()
        .map(|g| {
            json_obj(
                vec![
                    ("from_name", g.from_name.clone()),
                    ("relation", g.relation.clone()),
                    ("to_name", g.to_name.clone()),
                ],
                rng,
            )
        })
        .collect();
    let mut actions: Vec<JsonValue> = spec
        .action_goals
        .iter()
        .map(|g| json_obj(vec![("action", g.action.clone())], rng))
        .collect();
    nodes.shuffle(rng);
    edges.shuffle(rng);
    actions.shuffle(rng);
    let sep = if rng.gen_bool(0.5) { " " } else { "_" };
    let mut top = vec![
        (format!("node{sep}goals"), JsonValue::Array(nodes)),
        (format!("edge{sep}goals"), JsonValue::Array(edges)),
        (format!("action{sep}goals"), JsonValue::Array(actions)),
    ];
    top.shuffle(rng);
    serde_json::to_string(&JsonValue::Object(top)).expect("spec serializes")
}

// ------------------------------------------------------------- programs

fn step(action: &str, args: &[&EnvNode]) -> ActionStep {
    ActionStep::new(action, args.iter().map(|n| ObjectArg::new(n.name.clone(), n.id.to_string())).collect())
}

fn state_after(scene: &EnvState, steps: &[ActionStep]) -> EnvState {
    execute_program(scene, &ActionProgram { steps: steps.to_vec() }).final_state
}

/// Appends one chore to `steps` and its goals to `goals`. Returns false
/// when the scene offers nothing for the chosen chore.
fn add_chore(scene: &EnvState, steps: &mut Vec<ActionStep>, goals: &mut Goals, rng: &mut impl Rng) -> bool {
    let now = state_after(scene, steps);
    let node = |n: &EnvNode| now.node(n.id).cloned().expect("node persists");
    let id = |n: &EnvNode| ObjectRef::Id(n.id);
    match rng.gen_range(0..6) {
        0 => {
            let Some(x) = with_property(&now, "HAS_SWITCH").into_iter().filter(|n| n.has_state("OFF")).collect::<Vec<_>>().choose(rng).map(|n| node(n)) else {
                return false;
            };
            steps.push(step("WALK", &[&x]));
            if x.has_state("PLUGGED_OUT") {
                steps.push(step("PLUGIN", &[&x]));
            }
            steps.push(step("SWITCHON", &[&x]));
            goals.node.push(StateGoal { object: id(&x), state: "ON".into() });
        }
        1 => {
            let Some(x) = with_property(&now, "CAN_OPEN").into_iter().filter(|n| n.has_state("CLOSED")).collect::<Vec<_>>().choose(rng).map(|n| node(n)) else {
                return false;
            };
            steps.push(step("WALK", &[&x]));
            steps.push(step("OPEN", &[&x]));
            goals.node.push(StateGoal { object: id(&x), state: "OPEN".into() });
        }
        2 => {
            let Some(x) = objects(&now).into_iter().filter(|n| n.has_state("DIRTY")).collect::<Vec<_>>().choose(rng).map(|n| node(n)) else {
                return false;
            };
            steps.push(step("WALK", &[&x]));
            steps.push(step("WASH", &[&x]));
            goals.node.push(StateGoal { object: id(&x), state: "CLEAN".into() });
        }
        3 => {
            let grabbable = with_property(&now, "GRABBABLE");
            let Some(o) = grabbable.choose(rng).map(|n| node(n)) else { return false };
            let surfaces: Vec<&EnvNode> = objects(&now).into_iter().filter(|n| n.id != o.id).collect();
            let Some(s) = surfaces.choose(rng).map(|n| node(n)) else { return false };
            steps.push(step("WALK", &[&o]));
            steps.push(step("GRAB", &[&o]));
            steps.push(step("WALK", &[&s]));
            steps.push(step("PUTBACK", &[&o, &s]));
            goals.edge.push(RelationGoal { from: id(&o), relation: Relation::On, to: id(&s) });
        }
        4 => {
            let grabbable = with_property(&now, "GRABBABLE");
            let Some(o) = grabbable.choose(rng).map(|n| node(n)) else { return false };
            let containers: Vec<&EnvNode> = with_property(&now, "CAN_OPEN").into_iter().filter(|n| n.id != o.id).collect();
            let Some(c) = containers.choose(rng).map(|n| node(n)) else { return false };
            steps.push(step("WALK", &[&o]));
            steps.push(step("GRAB", &[&o]));
            steps.push(step("WALK", &[&c]));
            if !c.has_state("OPEN") {
                steps.push(step("OPEN", &[&c]));
            }
            steps.push(step("PUTIN", &[&o, &c]));
            goals.edge.push(RelationGoal { from: id(&o), relation: Relation::Inside, to: id(&c) });
        }
        _ => {
            let Some(x) = objects(&now).choose(rng).map(|n| node(n)) else { return false };
            let (act, line) = [("TOUCH", "TOUCH or PUSH"), ("LOOKAT", "LOOKAT"), ("WATCH", "WATCH or LOOKAT")]
                .choose(rng)
                .copied()
                .expect("three");
            steps.push(step("WALK", &[&x]));
            steps.push(step(act, &[&x]));
            goals.action_lines.push(line.into());
        }
    }
    true
}

/// A program that executes cleanly and the goals it achieves.
pub fn random_program(scene: &EnvState, rng: &mut impl Rng) -> (ActionProgram, Goals) {
    for _ in 0..50 {
        let mut steps = Vec::new();
        let mut goals = Goals::default();
        let chores = rng.gen_range(1..=3);
        let mut added = 0;
        for _ in 0..chores * 4 {
            if added == chores {
                break;
            }
            if add_chore(scene, &mut steps, &mut goals, rng) {
                added += 1;
            }
        }
        if added == 0 {
            continue;
        }
        let prog = ActionProgram { steps };
        let report = check_goals(&execute_program(scene, &prog), &goals);
        if report.tsr && action_seq::validate_program(&prog, Some(scene)).is_empty() {
            return (prog, goals);
        }
    }
    // Always achievable: approach something and touch it.
    let x = objects(scene)[0];
    let prog = ActionProgram {
        steps: vec![step("WALK", &[x]), step("TOUCH", &[x])],
    };
    let goals = Goals {
        action_lines: vec!["TOUCH".into()],
        ..Goals::default()
    };
    (prog, goals)
}

pub fn render_program(prog: &ActionProgram) -> String {
    action_seq::to_json(prog)
}

// ---------------------------------------------------------------- plans

fn as_ref(n: &EnvNode) -> Ref {
    Ref {
        name: n.name.clone(),
        id: n.id as u64,
    }
}

fn random_state_primitive(scene: &EnvState, rng: &mut impl Rng) -> Primitive {
    let vocab = sd_vocabulary();
    let states: Vec<_> = vocab
        .iter()
        .filter(|e| e.kind == PrimitiveKind::State && e.arity() > 0 && e.arity() <= 2)
        .collect();
    let entry = states.choose(rng).expect("state vocabulary");
    let objs = objects(scene);
    let character = scene.character();
    let args = entry
        .slots
        .iter()
        .map(|slot| match slot {
            SlotKind::Character => as_ref(character),
            SlotKind::Object => as_ref(objs.choose(rng).expect("objects")),
        })
        .collect();
    Primitive {
        predicate: entry.name.clone(),
        args,
    }
}

fn random_action_primitive(scene: &EnvState, rng: &mut impl Rng) -> Option<Primitive> {
    let vocab = sd_vocabulary();
    let actions: Vec<_> = vocab
        .iter()
        .filter(|e| e.kind == PrimitiveKind::Action && vocab.get(&e.name).is_some_and(|g| g.kind == PrimitiveKind::Action))
        .collect();
    for _ in 0..20 {
        let entry = actions.choose(rng)?;
        let fits: Vec<&EnvNode> = objects(scene)
            .into_iter()
            .filter(|n| entry.restriction.iter().all(|p| n.has_property(p)))
            .collect();
        if entry.arity() > 0 && fits.is_empty() {
            continue;
        }
        let args = (0..entry.arity()).map(|_| as_ref(fits.choose(rng).expect("non-empty"))).collect();
        return Some(Primitive {
            predicate: entry.name.clone(),
            args,
        });
    }
    None
}

/// A valid plan with 2–5 pairwise distinct lines.
pub fn random_subgoal_plan(scene: &EnvState, rng: &mut impl Rng) -> SubgoalPlan {
    let use_actions = rng.gen_bool(0.4);
    let mut lines: Vec<SubgoalLine> = Vec::new();
    let mut actions: Vec<String> = Vec::new();
    let target = rng.gen_range(2..=5);
    while lines.len() < target {
        let width = rng.gen_range(1..=3);
        let mut operands: Vec<Primitive> = Vec::new();
        for _ in 0..width {
            let prim = if use_actions && rng.gen_bool(0.35) {
                random_action_primitive(scene, rng).unwrap_or_else(|| random_state_primitive(scene, rng))
            } else {
                random_state_primitive(scene, rng)
            };
            if !operands.contains(&prim) {
                operands.push(prim);
            }
        }
        let op = match operands.len() {
            1 => LineOp::Single,
            _ if rng.gen_bool(0.5) => LineOp::And,
            _ => LineOp::Or,
        };
        let line = SubgoalLine { op, operands };
        let sig = |l: &SubgoalLine| {
            let mut ops: Vec<String> = l.operands.iter().map(Primitive::normalized).collect();
            ops.sort();
            (l.op, ops)
        };
        if lines.iter().any(|l| sig(l) == sig(&line)) {
            continue;
        }
        lines.push(line);
    }
    let vocab = sd_vocabulary();
    for l in &lines {
        for p in &l.operands {
            if vocab.get(&p.predicate).is_some_and(|e| e.kind == PrimitiveKind::Action) && !actions.contains(&p.predicate) {
                actions.push(p.predicate.clone());
            }
        }
    }
    SubgoalPlan {
        necessity: !actions.is_empty(),
        actions_to_include: actions,
        lines,
    }
}

/// Plan JSON with operands, listed actions and top-level keys shuffled.
pub fn render_subgoal_plan(plan: &SubgoalPlan, rng: &mut impl Rng) -> String {
    let mut plan = plan.clone();
    plan.actions_to_include.shuffle(rng);
    for l in &mut plan.lines {
        l.operands.shuffle(rng);
    }
    let JsonValue::Object(mut top) = serde_json::from_str(&sd::to_json(&plan)).expect("plan JSON") else {
        unreachable!("plans serialize to objects")
    };
    top.shuffle(rng);
    serde_json::to_string(&JsonValue::Object(top)).expect("plan serializes")
}

// ---------------------------------------------------------------- pddl

const ACTION_NAMES: [&str; 8] = [
    "switch_on", "switch_off", "open", "close", "grab", "put_in", "plug_in", "wipe",
];

fn random_pred(params: &[Param], rng: &mut impl Rng) -> Option<Clause> {
    let domain = virtualhome_domain();
    let preds: Vec<(&String, &Vec<String>)> = domain.predicates.iter().filter(|(_, tys)| tys.len() <= 2).collect();
    for _ in 0..20 {
        let (name, tys) = preds.choose(rng)?;
        let mut args = Vec::new();
        for ty in tys.iter() {
            let fits: Vec<&Param> = params.iter().filter(|p| domain.is_subtype(&p.ty, ty)).collect();
            match fits.choose(rng) {
                Some(p) => args.push(p.var.clone()),
                None => break,
            }
        }
        if args.len() == tys.len() {
            return Some(Clause::pred(name.as_str(), args));
        }
    }
    None
}

fn random_literal(params: &[Param], rng: &mut impl Rng) -> Clause {
    let atom = random_pred(params, rng).expect("some predicate fits the parameters");
    if rng.gen_bool(0.3) {
        Clause::not(atom)
    } else {
        atom
    }
}

/// A random precondition-shaped clause of bounded depth over `params`,
/// using and/or/not and, below the top, existential quantifiers.
pub fn random_precondition(params: &[Param], depth: usize, rng: &mut impl Rng) -> Clause {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_literal(params, rng);
    }
    match rng.gen_range(0..5) {
        0 | 1 => Clause::And((0..rng.gen_range(2..=3)).map(|_| random_precondition(params, depth - 1, rng)).collect()),
        2 | 3 => Clause::Or((0..rng.gen_range(2..=3)).map(|_| random_precondition(params, depth - 1, rng)).collect()),
        _ => {
            let var = format!("?q{depth}");
            let mut inner = params.to_vec();
            inner.push(Param::new(&var, "object"));
            Clause::exists(&var, "object", random_precondition(&inner, depth - 1, rng))
        }
    }
}

fn random_effect(params: &[Param], rng: &mut impl Rng) -> Clause {
    let mut parts: Vec<Clause> = (0..rng.gen_range(1..=3)).map(|_| random_literal(params, rng)).collect();
    if rng.gen_bool(0.3) {
        parts.push(Clause::when(random_literal(params, rng), random_literal(params, rng)));
    }
    Clause::And(parts)
}

fn random_params(rng: &mut impl Rng) -> Vec<Param> {
    let mut params = Vec::new();
    if rng.gen_bool(0.6) {
        params.push(Param::new("?char", "character"));
    }
    for i in 0..rng.gen_range(1..=2) {
        params.push(Param::new(&format!("?obj{i}"), "object"));
    }
    params
}

/// One to three actions with random bodies over the household domain.
pub fn random_action_set(rng: &mut impl Rng) -> PddlActionSet {
    let mut set = PddlActionSet::default();
    let count = rng.gen_range(1..=3);
    let names: Vec<&str> = ACTION_NAMES.choose_multiple(rng, count).copied().collect();
    for name in names {
        let parameters = random_params(rng);
        let body = PddlActionBody {
            name: name.to_string(),
            precondition: random_precondition(&parameters, 2, rng),
            effect: random_effect(&parameters, rng),
            parameters,
        };
        set.actions.insert(name.to_string(), body);
    }
    set
}

/// Reorders every `and` and `or` operand list, recursively.
pub fn shuffle_clause(c: &Clause, rng: &mut impl Rng) -> Clause {
    match c {
        Clause::And(cs) | Clause::Or(cs) => {
            let mut cs: Vec<Clause> = cs.iter().map(|x| shuffle_clause(x, rng)).collect();
            cs.shuffle(rng);
            if matches!(c, Clause::And(_)) {
                Clause::And(cs)
            } else {
                Clause::Or(cs)
            }
        }
        Clause::Not(x) => Clause::not(shuffle_clause(x, rng)),
        Clause::When(a, b) => Clause::when(shuffle_clause(a, rng), shuffle_clause(b, rng)),
        Clause::Exists { var, ty, body } => Clause::exists(var, ty, shuffle_clause(body, rng)),
        Clause::Forall { var, ty, body } => Clause::forall(var, ty, shuffle_clause(body, rng)),
        other => other.clone(),
    }
}

/// PDDL text with actions and all conjunct/disjunct lists reordered.
pub fn render_action_set(set: &PddlActionSet, rng: &mut impl Rng) -> String {
    let mut bodies: Vec<PddlActionBody> = set
        .iter()
        .map(|a| PddlActionBody {
            precondition: shuffle_clause(&a.precondition, rng),
            effect: shuffle_clause(&a.effect, rng),
            ..a.clone()
        })
        .collect();
    bodies.shuffle(rng);
    bodies.iter().map(crate::tm::clause::pretty_action).collect::<Vec<_>>().join("\n")
}

// ------------------------------------------------------------- datasets

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub instances_per_task: usize,
    pub pool_size: usize,
    /// Chance that a candidate is a valid but different output.
    pub alt_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            instances_per_task: 100,
            pool_size: 5,
            alt_rate: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthItem {
    pub instance: Instance,
    pub pool: PoolFile,
}

fn to_json_value(text: &str) -> JsonValue {
    serde_json::from_str(text).expect("generated JSON parses")
}

/// One synthetic instance with a pool of gold renderings and occasional
/// valid alternatives. Deterministic in `(cfg.seed, task, index)`.
pub fn synth_item(task: Task, index: usize, cfg: &SynthConfig) -> SynthItem {
    let id = format!("{}-{index:04}", task.code());
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, &id));
    let scene = synth_scene(&mut rng);
    let mut goals = Goals::default();
    let mut alt_rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, &format!("{id}/alt")));
    let (gold, mut render): (JsonValue, Box<dyn FnMut(&mut ChaCha8Rng, bool) -> String>) = match task {
        Task::GoalInterpretation => {
            let spec = random_goal_spec(&scene, &mut rng);
            let alt = random_goal_spec(&scene, &mut alt_rng);
            let gold = to_json_value(&crate::schema::gi::to_json(&spec));
            (gold, Box::new(move |r, use_alt| render_goal_spec(if use_alt { &alt } else { &spec }, r)))
        }
        Task::ActionSequencing => {
            let (prog, g) = random_program(&scene, &mut rng);
            goals = g;
            let mut short = prog.clone();
            short.steps.pop();
            if short.steps.is_empty() {
                short = prog.clone();
            }
            let gold = to_json_value(&render_program(&prog));
            (gold, Box::new(move |_, use_alt| render_program(if use_alt { &short } else { &prog })))
        }
        Task::SubgoalDecomposition => {
            let plan = random_subgoal_plan(&scene, &mut rng);
            let alt = random_subgoal_plan(&scene, &mut alt_rng);
            let gold = to_json_value(&sd::to_json(&plan));
            (gold, Box::new(move |r, use_alt| render_subgoal_plan(if use_alt { &alt } else { &plan }, r)))
        }
        Task::TransitionModeling => {
            let set = random_action_set(&mut rng);
            let alt = random_action_set(&mut alt_rng);
            let gold = JsonValue::String(pretty_print(&set));
            (gold, Box::new(move |r, use_alt| render_action_set(if use_alt { &alt } else { &set }, r)))
        }
    };
    let candidates = (0..cfg.pool_size.max(1))
        .map(|_| {
            let use_alt = rng.gen_bool(cfg.alt_rate.clamp(0.0, 1.0));
            render(&mut rng, use_alt)
        })
        .collect();
    let scene = (task != Task::TransitionModeling).then_some(scene);
    let instance = Instance {
        instance_id: id.clone(),
        task,
        scene,
        goals,
        gold,
        rel_obj_pairs: None,
        prompt_fields: None,
    };
    SynthItem {
        instance,
        pool: PoolFile {
            instance_id: id,
            task,
            candidates,
        },
    }
}

pub fn synth_dataset(tasks: &[Task], cfg: &SynthConfig) -> Vec<SynthItem> {
    tasks
        .iter()
        .flat_map(|&task| (0..cfg.instances_per_task).map(move |i| synth_item(task, i, cfg)))
        .collect()
}

/// Instance-id keyed view, handy for joining with pools.
pub fn by_id(items: &[SynthItem]) -> BTreeMap<&str, &SynthItem> {
    items.iter().map(|i| (i.instance.instance_id.as_str(), i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonicalizers::TaskCanonicalizer;
    use crate::engine::Canonicalizer;
    use crate::tm::validate_pddl;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn generated_outputs_are_valid() {
        for seed in 0..200 {
            let mut r = rng(seed);
            let scene = synth_scene(&mut r);
            let gi = TaskCanonicalizer::new(Task::GoalInterpretation).with_scene(Some(&scene));
            let text = render_goal_spec(&random_goal_spec(&scene, &mut r), &mut r);
            assert!(gi.violations(&text).is_empty(), "{text}: {:?}", gi.violations(&text));

            let (prog, goals) = random_program(&scene, &mut r);
            let report = check_goals(&execute_program(&scene, &prog), &goals);
            assert!(report.tsr, "{}", render_program(&prog));

            let plan = random_subgoal_plan(&scene, &mut r);
            let v = sd::validate_subgoal_plan(&plan, Some(&scene));
            assert!(v.is_empty(), "{v:?}");

            let set = random_action_set(&mut r);
            let v = validate_pddl(&set, virtualhome_domain());
            assert!(v.is_empty(), "{v:?}\n{}", pretty_print(&set));
        }
    }

    #[test]
    fn renderings_share_signatures() {
        let mut r = rng(9);
        let scene = synth_scene(&mut r);
        let spec = random_goal_spec(&scene, &mut r);
        let c = TaskCanonicalizer::new(Task::GoalInterpretation);
        assert_eq!(c.canonicalize(&render_goal_spec(&spec, &mut r)), c.canonicalize(&render_goal_spec(&spec, &mut r)));
        let set = random_action_set(&mut r);
        let c = TaskCanonicalizer::new(Task::TransitionModeling);
        assert_eq!(c.canonicalize(&render_action_set(&set, &mut r)), c.canonicalize(&render_action_set(&set, &mut r)));
    }

    #[test]
    fn items_are_deterministic_and_gold_is_consistent() {
        let cfg = SynthConfig {
            instances_per_task: 5,
            ..SynthConfig::default()
        };
        let a = synth_dataset(&Task::ALL, &cfg);
        let b = synth_dataset(&Task::ALL, &cfg);
        assert_eq!(a.len(), 20);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.instance, y.instance);
            assert_eq!(x.pool, y.pool);
            x.instance.check().unwrap();
        }
    }
}
