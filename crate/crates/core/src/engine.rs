//! Structured self-consistency: canonicalize a candidate pool, prune invalid
//! candidates, vote over semantic signatures and return the first
//! representative of the winning class.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::violation::{ErrorClass, Violation};

/// One raw completion and its position in the pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub index: usize,
    pub text: String,
}

impl Candidate {
    pub fn new(index: usize, text: impl Into<String>) -> Self {
        Self {
            index,
            text: text.into(),
        }
    }

    /// Builds a pool with contiguous indices from raw texts.
    pub fn pool<I, S>(texts: I) -> Vec<Candidate>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| Candidate::new(i, t))
            .collect()
    }
}

/// Opaque canonical form naming a semantic equivalence class.
///
/// The engine only compares and hashes signatures; their content is owned by
/// the task canonicalizers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature(String);

impl Signature {
    pub fn new(value: impl Into<String>) -> Self {
        Signature(value.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Why a candidate was rejected by its canonicalizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvalidReason {
    pub class: ErrorClass,
    pub detail: String,
}

impl InvalidReason {
    pub fn new(class: ErrorClass, detail: impl Into<String>) -> Self {
        Self {
            class,
            detail: detail.into(),
        }
    }
}

impl From<&Violation> for InvalidReason {
    fn from(v: &Violation) -> Self {
        InvalidReason::new(v.error_class(), v.to_string())
    }
}

/// Result of canonicalizing one candidate: a signature or the invalid marker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalSignature {
    Valid(Signature),
    Invalid(InvalidReason),
}

impl CanonicalSignature {
    pub fn valid(value: impl Into<String>) -> Self {
        CanonicalSignature::Valid(Signature::new(value))
    }

    pub fn invalid(class: ErrorClass, detail: impl Into<String>) -> Self {
        CanonicalSignature::Invalid(InvalidReason::new(class, detail))
    }

    /// Invalid with the first violation as the reason, or valid from `make`.
    pub fn gate(violations: &[Violation], make: impl FnOnce() -> String) -> Self {
        match violations.first() {
            Some(v) => CanonicalSignature::Invalid(v.into()),
            None => CanonicalSignature::valid(make()),
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, CanonicalSignature::Valid(_))
    }

    pub fn signature(&self) -> Option<&Signature> {
        match self {
            CanonicalSignature::Valid(s) => Some(s),
            CanonicalSignature::Invalid(_) => None,
        }
    }
}

/// Maps a raw completion to its canonical signature.
pub trait Canonicalizer: Sync {
    fn canonicalize(&self, text: &str) -> CanonicalSignature;
}

impl<F> Canonicalizer for F
where
    F: Fn(&str) -> CanonicalSignature + Sync,
{
    fn canonicalize(&self, text: &str) -> CanonicalSignature {
        self(text)
    }
}

/// What to return when every candidate is invalid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AllInvalidPolicy {
    #[default]
    Fail,
    ReturnFirstRaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SscConfig {
    pub n_samples: usize,
    pub temperature: f64,
    pub all_invalid_policy: AllInvalidPolicy,
}

impl Default for SscConfig {
    fn default() -> Self {
        Self {
            n_samples: 5,
            temperature: 0.7,
            all_invalid_policy: AllInvalidPolicy::Fail,
        }
    }
}

impl SscConfig {
    pub fn validate(&self) -> Result<(), SscError> {
        if self.n_samples == 0 {
            return Err(SscError::Config("n_samples must be at least 1".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(SscError::Config("temperature must be non-negative".into()));
        }
        Ok(())
    }
}

/// One equivalence class seen in the pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteClass {
    pub signature: Signature,
    pub votes: usize,
    pub first_seen: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvalidCandidate {
    pub index: usize,
    #[serde(flatten)]
    pub reason: InvalidReason,
}

/// Vote counts per signature, kept in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VoteTally {
    pub classes: Vec<VoteClass>,
    pub pruned: usize,
    pub invalid: Vec<InvalidCandidate>,
}

impl VoteTally {
    pub fn counts(&self) -> BTreeMap<&Signature, usize> {
        self.classes.iter().map(|c| (&c.signature, c.votes)).collect()
    }

    pub fn first_seen(&self, signature: &Signature) -> Option<usize> {
        self.classes
            .iter()
            .find(|c| &c.signature == signature)
            .map(|c| c.first_seen)
    }

    pub fn total(&self) -> usize {
        self.classes.iter().map(|c| c.votes).sum::<usize>() + self.pruned
    }

    /// Most-voted class; ties go to the class seen first.
    pub fn winner(&self) -> Option<&VoteClass> {
        let mut best: Option<&VoteClass> = None;
        for class in &self.classes {
            match best {
                Some(b) if b.votes >= class.votes => {}
                _ => best = Some(class),
            }
        }
        best
    }

    /// True when at least two classes share the top vote count.
    pub fn has_tie(&self) -> bool {
        match self.winner() {
            Some(w) => self.classes.iter().filter(|c| c.votes == w.votes).count() > 1,
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SscResult {
    pub selected: Option<Candidate>,
    pub winning_signature: Option<Signature>,
    pub tally: VoteTally,
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SscError {
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("all {} candidates are invalid", .reasons.len())]
    AllInvalid { reasons: Vec<InvalidCandidate> },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Canonicalizes each candidate; output is in pool order.
pub fn canonicalize_pool<C>(pool: &[Candidate], canonicalizer: &C) -> Vec<CanonicalSignature>
where
    C: Canonicalizer + ?Sized,
{
    pool.par_iter()
        .map(|c| canonicalizer.canonicalize(&c.text))
        .collect()
}

/// Counts votes per valid signature and records the first position of each.
pub fn tally_votes(signatures: &[CanonicalSignature]) -> VoteTally {
    let mut tally = VoteTally::default();
    let mut slot: HashMap<&Signature, usize> = HashMap::new();
    for (i, sig) in signatures.iter().enumerate() {
        match sig {
            CanonicalSignature::Invalid(reason) => {
                tally.pruned += 1;
                tally.invalid.push(InvalidCandidate {
                    index: i,
                    reason: reason.clone(),
                });
            }
            CanonicalSignature::Valid(s) => match slot.get(s) {
                Some(&k) => tally.classes[k].votes += 1,
                None => {
                    slot.insert(s, tally.classes.len());
                    tally.classes.push(VoteClass {
                        signature: s.clone(),
                        votes: 1,
                        first_seen: i,
                    });
                }
            },
        }
    }
    tally
}

/// Votes over already-computed signatures.
pub fn select(
    pool: &[Candidate],
    signatures: &[CanonicalSignature],
    policy: AllInvalidPolicy,
) -> Result<SscResult, SscError> {
    if pool.is_empty() {
        return Err(SscError::EmptyPool);
    }
    debug_assert_eq!(pool.len(), signatures.len());
    let tally = tally_votes(signatures);
    match tally.winner() {
        Some(w) => Ok(SscResult {
            selected: Some(pool[w.first_seen].clone()),
            winning_signature: Some(w.signature.clone()),
            degraded: false,
            tally,
        }),
        None => match policy {
            AllInvalidPolicy::Fail => Err(SscError::AllInvalid {
                reasons: tally.invalid,
            }),
            AllInvalidPolicy::ReturnFirstRaw => Ok(SscResult {
                selected: Some(pool[0].clone()),
                winning_signature: None,
                degraded: true,
                tally,
            }),
        },
    }
}

/// Full inference step over a sampled pool.
pub fn run_ssc<C>(pool: &[Candidate], canonicalizer: &C, config: &SscConfig) -> Result<SscResult, SscError>
where
    C: Canonicalizer + ?Sized,
{
    if pool.is_empty() {
        return Err(SscError::EmptyPool);
    }
    let signatures = canonicalize_pool(pool, canonicalizer);
    select(pool, &signatures, config.all_invalid_policy)
}
