//! The household action library: 39 actions with their argument counts and
//! per-argument property preconditions, loaded from a bundled table.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Serialize;

const LIBRARY_TABLE: &str = include_str!("../resources/action_library.txt");

/// Bump when the bundled table changes.
pub const LIBRARY_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActionDef {
    pub name: String,
    pub arity: usize,
    /// Required properties, one conjunction per argument slot.
    pub preconditions: Vec<Vec<String>>,
    pub description: String,
}

#[derive(Debug, Clone, Default)]
pub struct ActionLibrary {
    actions: BTreeMap<String, ActionDef>,
}

impl ActionLibrary {
    /// Parses lines of the form `NAME: (arity, [[props], ...]) # description`.
    pub fn parse(table: &str) -> Result<Self, String> {
        let mut actions = BTreeMap::new();
        for (lineno, line) in table.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| format!("line {}: {msg}", lineno + 1);
            let (name, rest) = line.split_once(':').ok_or_else(|| err("missing ':'"))?;
            let (spec, description) = match rest.split_once('#') {
                Some((s, d)) => (s.trim(), d.trim()),
                None => (rest.trim(), ""),
            };
            let spec = spec
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| err("expected parenthesized tuple"))?;
            let (arity, pre) = spec.split_once(',').ok_or_else(|| err("missing arity"))?;
            let arity: usize = arity.trim().parse().map_err(|_| err("bad arity"))?;
            let pre = crate::json::relax_quotes(pre.trim());
            let preconditions: Vec<Vec<String>> =
                serde_json::from_str(&pre).map_err(|e| err(&e.to_string()))?;
            // Zero-arity actions list no slots; the table writes `[]`.
            if preconditions.len() != arity {
                return Err(err("precondition slots do not match arity"));
            }
            let name = name.trim().to_string();
            actions.insert(
                name.clone(),
                ActionDef {
                    name,
                    arity,
                    preconditions,
                    description: description.to_string(),
                },
            );
        }
        Ok(Self { actions })
    }

    /// Case-insensitive lookup.
    pub fn get(&self, name: &str) -> Option<&ActionDef> {
        let key = name.trim().to_ascii_uppercase();
        self.actions.get(&key)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActionDef> {
        self.actions.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.actions.keys().map(String::as_str)
    }
}

/// The bundled library.
pub fn action_library() -> &'static ActionLibrary {
    static LIB: OnceLock<ActionLibrary> = OnceLock::new();
    LIB.get_or_init(|| ActionLibrary::parse(LIBRARY_TABLE).expect("bundled action library parses"))
}
