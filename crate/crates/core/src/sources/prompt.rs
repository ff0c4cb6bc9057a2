//! Prompt templates for the four tasks and placeholder substitution.

use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};

use crate::task::Task;

const GI_TEXT: &str = include_str!("../../resources/prompts/goal_interpretation.txt");
const AS_TEXT: &str = include_str!("../../resources/prompts/action_sequencing.txt");
const SD_TEXT: &str = include_str!("../../resources/prompts/subgoal_decomposition.txt");
const TM_TEXT: &str = include_str!("../../resources/prompts/transition_modeling.txt");

/// SHA-256 of each bundled template file, to detect edits.
pub const TEMPLATE_SHA256: [(Task, &str); 4] = [
    (Task::GoalInterpretation, "6fa8a80bc691c104712301b99ab393f361622ddb3f19427b058f6cf13735b168"),
    (Task::ActionSequencing, "2ebba43b176e51385a19cdaf43cf45bbf13b2e14004a4a85c81596df927d8b2b"),
    (Task::SubgoalDecomposition, "c61cd6cc6788655b65590eaf73f645b9bbe10992631a4aec0affba0100314cc5"),
    (Task::TransitionModeling, "31635613f2db694b853221bf26bde735ad4bec30b6aa0dff63f85b5cca073aa4"),
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("no value for placeholder <{0}>")]
    MissingField(String),
    #[error("<{0}> is not a placeholder of this template")]
    UnknownField(String),
}

/// A template is a fixed preamble followed by a body whose `<name>`
/// placeholders are substituted. Angle-bracket text in the preamble is
/// instruction text and is never touched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub task: Option<Task>,
    pub preamble: String,
    pub body: String,
    pub placeholders: BTreeSet<String>,
}

fn placeholders(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Splits at the first occurrence of `marker`; the marker starts the body.
fn split_at_marker<'a>(text: &'a str, marker: &str) -> (&'a str, &'a str) {
    let at = text.find(marker).expect("template marker present");
    text.split_at(at)
}

impl PromptTemplate {
    pub fn new(preamble: impl Into<String>, body: impl Into<String>, placeholders: BTreeSet<String>) -> Self {
        Self {
            task: None,
            preamble: preamble.into(),
            body: body.into(),
            placeholders,
        }
    }

    /// The bundled template for `task`.
    pub fn builtin(task: Task) -> Self {
        let (preamble, body, names): (&str, &str, &[&str]) = match task {
            Task::GoalInterpretation => (
                "",
                GI_TEXT,
                &["object_in_scene", "relation_types", "rel_obj_pairs", "action_space", "goal_str"],
            ),
            Task::ActionSequencing => {
                let (p, b) = split_at_marker(AS_TEXT, "Input:\nThe relevant objects");
                (p, b, &["object_in_scene", "cur_change", "node_goals", "edge_goals", "action_goals"])
            }
            Task::SubgoalDecomposition => {
                let (p, b) = split_at_marker(SD_TEXT, "Now, it is time for you");
                (
                    p,
                    b,
                    &["task_name", "relevant_objects", "initial_states", "final_states", "final_actions", "necessity"],
                )
            }
            Task::TransitionModeling => {
                let (p, b) = split_at_marker(TM_TEXT, "Input:\n<problem_file>");
                (p, b, &["problem_file", "action_handlers"])
            }
        };
        Self {
            task: Some(task),
            preamble: preamble.to_string(),
            body: body.to_string(),
            placeholders: placeholders(names),
        }
    }

    /// `<name>` tokens in the body that look like placeholders.
    pub fn body_tokens(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut rest = self.body.as_str();
        while let Some(start) = rest.find('<') {
            rest = &rest[start + 1..];
            if let Some(end) = rest.find('>') {
                let name = &rest[..end];
                if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    out.insert(name.to_string());
                }
            }
        }
        out
    }
}

/// Substitutes every declared placeholder in the body in one left-to-right
/// pass, so inserted values are never re-expanded.
pub fn render_prompt(template: &PromptTemplate, fields: &BTreeMap<String, String>) -> Result<String, PromptError> {
    if let Some(unknown) = fields.keys().find(|k| !template.placeholders.contains(*k)) {
        return Err(PromptError::UnknownField(unknown.clone()));
    }
    if let Some(missing) = template.placeholders.iter().find(|p| !fields.contains_key(*p)) {
        return Err(PromptError::MissingField(missing.clone()));
    }
    let mut out = String::with_capacity(template.preamble.len() + template.body.len());
    out.push_str(&template.preamble);
    let mut rest = template.body.as_str();
    while let Some(start) = rest.find('<') {
        out.push_str(&rest[..start]);
        rest = &rest[start..];
        let hit = rest[1..]
            .find('>')
            .map(|end| &rest[1..1 + end])
            .filter(|name| template.placeholders.contains(*name));
        match hit {
            Some(name) => {
                out.push_str(&fields[name]);
                rest = &rest[name.len() + 2..];
            }
            None => {
                out.push('<');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Checksum of the bundled template file for `task`.
pub fn template_checksum(task: Task) -> String {
    let text = match task {
        Task::GoalInterpretation => GI_TEXT,
        Task::ActionSequencing => AS_TEXT,
        Task::SubgoalDecomposition => SD_TEXT,
        Task::TransitionModeling => TM_TEXT,
    };
    sha256_hex(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fields(t: &PromptTemplate) -> BTreeMap<String, String> {
        t.placeholders.iter().map(|p| (p.clone(), format!("[{p}]"))).collect()
    }

    #[test]
    fn checksums_match() {
        for (task, sum) in TEMPLATE_SHA256 {
            assert_eq!(template_checksum(task), sum, "{task:?}");
        }
    }

    #[test]
    fn body_placeholders_are_declared() {
        for task in Task::ALL {
            let t = PromptTemplate::builtin(task);
            assert_eq!(t.body_tokens(), t.placeholders, "{task:?}");
        }
    }

    #[test]
    fn full_render_leaves_no_placeholder() {
        for task in Task::ALL {
            let t = PromptTemplate::builtin(task);
            let out = render_prompt(&t, &fields(&t)).unwrap();
            let body_out = &out[t.preamble.len()..];
            for p in &t.placeholders {
                assert!(!body_out.contains(&format!("<{p}>")), "{task:?} {p}");
                assert!(body_out.contains(&format!("[{p}]")));
            }
            assert!(out.starts_with(&t.preamble));
        }
    }

    #[test]
    fn goal_str_substitution() {
        let t = PromptTemplate::builtin(Task::GoalInterpretation);
        let mut f = fields(&t);
        f.insert("goal_str".into(), "Wash clothes".into());
        let out = render_prompt(&t, &f).unwrap();
        assert!(out.contains("Wash clothes"));
        assert!(!out.contains("<goal_str>"));
    }

    #[test]
    fn subgoal_rules_keep_their_angle_brackets() {
        let t = PromptTemplate::builtin(Task::SubgoalDecomposition);
        let out = render_prompt(&t, &fields(&t)).unwrap();
        assert!(out.contains("\"necessity_to_use_action\": <necessity>"));
        assert!(out.contains("## Necessity to Use Actions\n[necessity]"));
    }

    #[test]
    fn field_errors() {
        let t = PromptTemplate::builtin(Task::GoalInterpretation);
        let mut f = fields(&t);
        f.remove("relation_types");
        assert_eq!(render_prompt(&t, &f), Err(PromptError::MissingField("relation_types".into())));
        let mut f = fields(&t);
        f.insert("bogus".into(), String::new());
        assert_eq!(render_prompt(&t, &f), Err(PromptError::UnknownField("bogus".into())));
    }

    #[test]
    fn empty_and_plain_templates() {
        let empty = PromptTemplate::new("", "", BTreeSet::new());
        assert_eq!(render_prompt(&empty, &BTreeMap::new()).unwrap(), "");
        let plain = PromptTemplate::new("", "a <b> c", BTreeSet::new());
        let once = render_prompt(&plain, &BTreeMap::new()).unwrap();
        assert_eq!(once, "a <b> c");
    }

    #[test]
    fn values_are_not_re_expanded() {
        let t = PromptTemplate::new("", "<x>|<y>", placeholders(&["x", "y"]));
        let f: BTreeMap<String, String> = [("x".to_string(), "<y>".to_string()), ("y".to_string(), "1".to_string())].into();
        assert_eq!(render_prompt(&t, &f).unwrap(), "<y>|1");
    }
}
