//! One canonicalizer per task, bundling the parse options and whatever
//! context (scene, relation targets, domain) its validator needs.

use crate::engine::{CanonicalSignature, Canonicalizer};
use crate::scene::EnvState;
use crate::schema::gi::{self, GiContext, RelObjPairs};
use crate::schema::{action_seq, sd, ParseOptions};
use crate::task::Task;
use crate::tm::{self, DomainSignature};
use crate::violation::Violation;

#[derive(Debug, Clone, Copy)]
pub struct TaskCanonicalizer<'a> {
    pub task: Task,
    pub opts: ParseOptions,
    pub scene: Option<&'a EnvState>,
    pub rel_obj_pairs: Option<&'a RelObjPairs>,
    pub domain: &'a DomainSignature,
}

impl<'a> TaskCanonicalizer<'a> {
    /// Lenient parsing, no scene, the bundled PDDL domain.
    pub fn new(task: Task) -> Self {
        Self {
            task,
            opts: ParseOptions::LENIENT,
            scene: None,
            rel_obj_pairs: None,
            domain: tm::virtualhome_domain(),
        }
    }

    pub fn with_scene(mut self, scene: Option<&'a EnvState>) -> Self {
        self.scene = scene;
        self
    }

    pub fn with_rel_obj_pairs(mut self, pairs: Option<&'a RelObjPairs>) -> Self {
        self.rel_obj_pairs = pairs;
        self
    }

    pub fn with_options(mut self, opts: ParseOptions) -> Self {
        self.opts = opts;
        self
    }

    fn gi_context(&self) -> GiContext<'a> {
        GiContext {
            scene: self.scene,
            rel_obj_pairs: self.rel_obj_pairs,
        }
    }

    /// Every violation in `text`. A parse failure yields exactly one.
    pub fn violations(&self, text: &str) -> Vec<Violation> {
        match self.task {
            Task::GoalInterpretation => match gi::parse_gi_with(text, self.opts) {
                Ok(spec) => gi::validate_gi_with(&spec, &self.gi_context()),
                Err(e) => vec![e.to_violation()],
            },
            Task::ActionSequencing => match action_seq::parse_program_with(text, self.opts) {
                Ok(p) => action_seq::validate_program(&p, self.scene),
                Err(e) => vec![e.to_violation()],
            },
            Task::SubgoalDecomposition => match sd::parse_subgoal_plan_with(text, self.opts) {
                Ok(p) => sd::validate_subgoal_plan(&p, self.scene),
                Err(e) => vec![e.to_violation()],
            },
            Task::TransitionModeling => match tm::parse_pddl_actions(text) {
                Ok(set) => tm::validate_pddl(&set, self.domain),
                Err(e) => vec![e.to_violation()],
            },
        }
    }
}

impl Canonicalizer for TaskCanonicalizer<'_> {
    fn canonicalize(&self, text: &str) -> CanonicalSignature {
        match self.task {
            Task::GoalInterpretation => gi::canonicalize_gi_text(text, self.opts, &self.gi_context()),
            Task::ActionSequencing => action_seq::canonicalize_program_text(text, self.opts, self.scene),
            Task::SubgoalDecomposition => sd::canonicalize_subgoal_text(text, self.opts, self.scene),
            Task::TransitionModeling => tm::canonicalize_pddl_text(text, self.domain),
        }
    }
}
