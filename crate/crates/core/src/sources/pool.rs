//! Candidate pools on disk as JSON Lines: a `{instance_id, task}` header
//! followed by one `{index, text}` record per candidate.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::Candidate;
use crate::task::Task;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolFile {
    pub instance_id: String,
    pub task: Task,
    pub candidates: Vec<String>,
}

impl PoolFile {
    pub fn to_candidates(&self) -> Vec<Candidate> {
        Candidate::pool(self.candidates.iter().cloned())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    instance_id: String,
    task: Task,
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    index: usize,
    text: String,
}

#[derive(Debug, thiserror::Error)]
pub enum PoolError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("candidate index {found} where {expected} was expected")]
    IndexGap { expected: usize, found: usize },
    #[error("pool has no candidates")]
    Empty,
}

pub fn parse_pool(text: &str) -> Result<PoolFile, PoolError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(PoolError::Empty)?;
    let header: Header = serde_json::from_str(header).map_err(|e| PoolError::Format {
        line: hline,
        message: e.to_string(),
    })?;
    let mut records = Vec::new();
    for (line, l) in lines {
        let r: Record = serde_json::from_str(l).map_err(|e| PoolError::Format {
            line,
            message: e.to_string(),
        })?;
        records.push((line, r));
    }
    if records.is_empty() {
        return Err(PoolError::Empty);
    }
    records.sort_by_key(|(_, r)| r.index);
    for (expected, (line, r)) in records.iter().enumerate() {
        if r.index < expected {
            return Err(PoolError::Format {
                line: *line,
                message: format!("duplicate index {}", r.index),
            });
        }
        if r.index != expected {
            return Err(PoolError::IndexGap {
                expected,
                found: r.index,
            });
        }
    }
    Ok(PoolFile {
        instance_id: header.instance_id,
        task: header.task,
        candidates: records.into_iter().map(|(_, r)| r.text).collect(),
    })
}

pub fn pool_to_jsonl(pool: &PoolFile) -> String {
    let mut out = serde_json::to_string(&Header {
        instance_id: pool.instance_id.clone(),
        task: pool.task,
    })
    .expect("header serializes");
    out.push('\n');
    for (index, text) in pool.candidates.iter().enumerate() {
        let rec = Record {
            index,
            text: text.clone(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn load_pool(path: impl AsRef<Path>) -> Result<PoolFile, PoolError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| PoolError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_pool(&text)
}

pub fn write_pool(path: impl AsRef<Path>, pool: &PoolFile) -> Result<(), PoolError> {
    let path = path.as_ref();
    fs::write(path, pool_to_jsonl(pool)).map_err(|source| PoolError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_candidates() {
        let mut text = r#"{"instance_id":"i1","task":"gi"}"#.to_string();
        for i in 0..5 {
            text.push_str(&format!("\n{{\"index\":{i},\"text\":\"c{i}\"}}"));
        }
        let p = parse_pool(&text).unwrap();
        assert_eq!(p.candidates, ["c0", "c1", "c2", "c3", "c4"]);
        assert_eq!(p.task, Task::GoalInterpretation);
    }

    #[test]
    fn out_of_order_records_are_sorted() {
        let text = "{\"instance_id\":\"i\",\"task\":\"tm\"}\n{\"index\":1,\"text\":\"b\"}\n{\"index\":0,\"text\":\"a\"}";
        let p = parse_pool(text).unwrap();
        assert_eq!(p.candidates, ["a", "b"]);
        assert_eq!(p.task, Task::TransitionModeling);
    }

    #[test]
    fn gaps_and_format_errors() {
        let text = "{\"instance_id\":\"i\",\"task\":\"as\"}\n{\"index\":0,\"text\":\"a\"}\n{\"index\":1,\"text\":\"b\"}\n{\"index\":3,\"text\":\"d\"}";
        assert!(matches!(parse_pool(text), Err(PoolError::IndexGap { expected: 2, found: 3 })));
        let text = "{\"instance_id\":\"i\",\"task\":\"as\"}\nnot json";
        assert!(matches!(parse_pool(text), Err(PoolError::Format { line: 2, .. })));
        assert!(matches!(parse_pool("{\"instance_id\":\"i\",\"task\":\"as\"}"), Err(PoolError::Empty)));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let pool = PoolFile {
            instance_id: "x".into(),
            task: Task::SubgoalDecomposition,
            candidates: vec!["line\nbreak".into(), "{\"a\": 1}".into()],
        };
        write_pool(&path, &pool).unwrap();
        assert_eq!(load_pool(&path).unwrap(), pool);
    }
}
