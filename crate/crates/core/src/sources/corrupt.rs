//! Seeded synthetic corruption of candidate pools.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Candidate;
use crate::library::action_library;
use crate::vocab::NodeState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CorruptionKind {
    /// Cut the text somewhere in its last quarter.
    Truncate,
    /// Wrap the text in a markdown code fence.
    FenceWrap,
    /// Misspell one key.
    KeyRename,
    /// Replace one binary state with its opposite.
    StateFlip,
    /// Replace one action or predicate name with an unknown one.
    ActionHallucinate,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 5] = [
        CorruptionKind::Truncate,
        CorruptionKind::FenceWrap,
        CorruptionKind::KeyRename,
        CorruptionKind::StateFlip,
        CorruptionKind::ActionHallucinate,
    ];
}

impl std::str::FromStr for CorruptionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        CorruptionKind::ALL
            .into_iter()
            .find(|k| serde_json::to_value(k).ok().and_then(|v| v.as_str().map(|n| n == key)) == Some(true))
            .ok_or_else(|| format!("unknown corruption kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub rate: f64,
    pub kinds: Vec<CorruptionKind>,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(format!("rate {} is outside [0, 1]", self.rate));
        }
        if self.rate > 0.0 && self.kinds.is_empty() {
            return Err("no corruption kinds given".into());
        }
        Ok(())
    }
}

const FAKE_ACTIONS: [&str; 5] = ["TELEPORT", "LEVITATE", "SUMMON", "DISASSEMBLE", "HYPNOTIZE"];
const FAKE_PREDICATES: [&str; 4] = ["levitating", "teleported", "enchanted", "invisible"];

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Byte ranges of whole-word occurrences of `word`.
fn word_hits(text: &str, word: &str) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    text.match_indices(word)
        .map(|(i, _)| (i, i + word.len()))
        .filter(|&(s, e)| (s == 0 || !is_word_byte(bytes[s - 1])) && (e == bytes.len() || !is_word_byte(bytes[e])))
        .collect()
}

fn splice(text: &str, (s, e): (usize, usize), with: &str) -> String {
    format!("{}{}{}", &text[..s], with, &text[e..])
}

fn truncate(text: &str, rng: &mut ChaCha8Rng) -> String {
    let t = text.trim_end();
    let chars: Vec<char> = t.chars().collect();
    let n = chars.len();
    if n < 2 {
        return String::new();
    }
    let lo = (3 * n / 4).min(n - 1);
    let cut = rng.gen_range(lo..n);
    let cut = cut.min(n - 1);
    chars[..cut].iter().collect()
}

/// Quoted JSON keys, or `:keyword` tokens for PDDL text.
fn key_spans(text: &str) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'"' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j] != b'"' {
                if bytes[j] == b'\\' {
                    j += 1;
                }
                j += 1;
            }
            if j >= bytes.len() {
                break;
            }
            let mut k = j + 1;
            while k < bytes.len() && bytes[k].is_ascii_whitespace() {
                k += 1;
            }
            if k < bytes.len() && bytes[k] == b':' && j > start {
                spans.push((start, j));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    if spans.is_empty() {
        for (i, _) in text.match_indices(':') {
            let end = i + 1 + bytes[i + 1..].iter().take_while(|b| is_word_byte(**b)).count();
            if end > i + 1 && (i == 0 || !is_word_byte(bytes[i - 1])) {
                spans.push((i + 1, end));
            }
        }
    }
    spans
}

fn key_rename(text: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let spans = key_spans(text);
    let &(s, e) = spans.choose(rng)?;
    Some(splice(text, (s, e), &format!("{}_x", &text[s..e])))
}

fn state_flip(text: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let mut hits = Vec::new();
    for st in NodeState::ALL {
        let Some(opp) = st.opposite() else { continue };
        let (up, opp_up) = (st.as_str(), opp.as_str());
        let (low, opp_low) = (up.to_ascii_lowercase(), opp_up.to_ascii_lowercase());
        for h in word_hits(text, up) {
            hits.push((h, opp_up.to_string()));
        }
        for h in word_hits(text, &low) {
            hits.push((h, opp_low.clone()));
        }
    }
    hits.sort();
    let (span, with) = hits.choose(rng)?;
    Some(splice(text, *span, with))
}

fn hallucinate(text: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let mut hits: Vec<(usize, usize)> = action_library()
        .names()
        .flat_map(|name| word_hits(text, name))
        .collect();
    if !hits.is_empty() {
        hits.sort();
        let span = *hits.choose(rng)?;
        return Some(splice(text, span, FAKE_ACTIONS.choose(rng)?));
    }
    // PDDL text: rename a predicate in head position.
    let bytes = text.as_bytes();
    let mut preds = Vec::new();
    for (i, _) in text.match_indices('(') {
        let start = i + 1;
        let end = start + bytes[start..].iter().take_while(|b| is_word_byte(**b)).count();
        if end > start && !matches!(&text[start..end], "and" | "or" | "not" | "when" | "exists" | "forall") {
            preds.push((start, end));
        }
    }
    let span = *preds.choose(rng)?;
    Some(splice(text, span, FAKE_PREDICATES.choose(rng)?))
}

/// Applies `kind`; kinds that find nothing to change fall back to truncation
/// so that a chosen candidate is always altered.
pub fn corrupt_text(text: &str, kind: CorruptionKind, rng: &mut ChaCha8Rng) -> String {
    let out = match kind {
        CorruptionKind::Truncate => None,
        CorruptionKind::FenceWrap => Some(format!("```json\n{text}\n```")),
        CorruptionKind::KeyRename => key_rename(text, rng),
        CorruptionKind::StateFlip => state_flip(text, rng),
        CorruptionKind::ActionHallucinate => hallucinate(text, rng),
    };
    out.unwrap_or_else(|| truncate(text, rng))
}

/// Corrupts each candidate independently with probability `spec.rate`.
/// Returns the new pool and which candidates were altered.
pub fn corrupt_pool(pool: &[Candidate], spec: &CorruptionSpec) -> (Vec<Candidate>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut flags = Vec::with_capacity(pool.len());
    let out = pool
        .iter()
        .map(|c| {
            let hit = spec.rate > 0.0 && rng.gen_bool(spec.rate.clamp(0.0, 1.0));
            flags.push(hit);
            if !hit {
                return c.clone();
            }
            let kind = *spec.kinds.choose(&mut rng).expect("kinds validated non-empty");
            Candidate::new(c.index, corrupt_text(&c.text, kind, &mut rng))
        })
        .collect();
    (out, flags)
}

/// Derives a per-item seed from a base seed and a name (FNV-1a).
pub fn mix_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
