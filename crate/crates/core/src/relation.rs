//! Pairing biomedical and SDoH entities of an abstract: LLM relation labels
//! and the sentence co-occurrence filter.
//!
//! An entity's frequency is the number of distinct sentences mentioning it.
//! The co-occurrence score of a pair is the number of sentences mentioning
//! both divided by the larger of the two frequencies, so it always lies in
//! `[0, 1]`. Pairs are kept only when the score is strictly greater than the
//! threshold (0.5 by default) and the model proposed a relation.

use std::collections::BTreeSet;
use std::io::Write;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::BackendError;
use crate::corpus::AbstractDoc;
use crate::extraction::llm::{LlmBackend, LlmQuery, LlmRequest};
use crate::extraction::{prompt, BioMention, DocExtraction, SdohEntity};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Labels a model may answer with. `no_relation` means the pair is dropped.
pub const RELATION_VOCABULARY: [&str; 5] = [
    "associated_with",
    "increases_risk_of",
    "decreases_risk_of",
    "affects",
    "no_relation",
];

/// Catch-all label for free-text answers.
pub const FALLBACK_RELATION: &str = "associated_with";

pub type Score = Ratio<usize>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelationError {
    #[error("doc {doc_id}: sentence index {index} out of range ({len} sentences)")]
    IndexOutOfRange { doc_id: String, index: usize, len: usize },
}

/// Number of distinct sentences in `doc` containing the entity.
pub fn sentence_frequency(indices: &BTreeSet<usize>, doc: &AbstractDoc) -> Result<usize, RelationError> {
    if let Some(&max) = indices.last() {
        if max >= doc.sentences.len() {
            return Err(RelationError::IndexOutOfRange {
                doc_id: doc.doc_id.clone(),
                index: max,
                len: doc.sentences.len(),
            });
        }
    }
    Ok(indices.len())
}

/// `|a ∩ b| / max(|a|, |b|)`, or 0 when both sets are empty.
pub fn co_occurrence_score(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Score {
    let max = a.len().max(b.len());
    if max == 0 {
        return Score::from_integer(0);
    }
    Score::new(a.intersection(b).count(), max)
}

/// Maps a raw model answer onto the relation vocabulary. Free text falls
/// into `associated_with`; `no_relation` and empty answers give `None`.
pub fn parse_relation(raw: &str) -> Option<String> {
    let cleaned = raw
        .trim()
        .trim_matches(|c: char| matches!(c, '"' | '\'' | '`' | '*'))
        .trim_end_matches('.')
        .trim();
    if cleaned.is_empty() {
        return None;
    }
    let token = cleaned.to_ascii_lowercase().replace([' ', '-'], "_");
    match RELATION_VOCABULARY.iter().find(|v| **v == token) {
        Some(&"no_relation") => None,
        Some(v) => Some((*v).to_string()),
        None => Some(FALLBACK_RELATION.to_string()),
    }
}

pub fn propose_relation(
    bio: &BioMention,
    sdoh: &SdohEntity,
    doc: &AbstractDoc,
    llm: &dyn LlmBackend,
) -> Result<Option<String>, BackendError> {
    let request = LlmRequest {
        prompt: prompt::relation_prompt(&bio.surface, &sdoh.display, &doc.abstract_text, &RELATION_VOCABULARY),
        query: LlmQuery::Relation {
            bio: bio.surface.clone(),
            sdoh: sdoh.surface.clone(),
        },
    };
    Ok(parse_relation(&llm.complete(&request)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub bio: BioMention,
    pub sdoh: SdohEntity,
    pub co_occurrence: Score,
    pub relation_label: Option<String>,
    pub doc_id: String,
}

impl ScoredPair {
    pub fn score_f64(&self) -> f64 {
        *self.co_occurrence.numer() as f64 / *self.co_occurrence.denom() as f64
    }
}

fn exceeds(score: &Score, threshold: f64) -> bool {
    (*score.numer() as f64) > threshold * (*score.denom() as f64)
}

/// Keeps pairs with a relation label and a score strictly above
/// `threshold`, preserving order.
pub fn filter_pairs(pairs: Vec<ScoredPair>, threshold: f64) -> Vec<ScoredPair> {
    pairs
        .into_iter()
        .filter(|p| p.relation_label.is_some() && exceeds(&p.co_occurrence, threshold))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRelations {
    pub doc_id: String,
    pub scored: Vec<ScoredPair>,
    pub retained: Vec<ScoredPair>,
    pub skipped: Vec<String>,
}

/// Labels every (bio, SDoH) pair of a document with the model, scores it,
/// and filters. Pairs whose model call fails are skipped and logged.
pub fn relate_document(
    doc: &AbstractDoc,
    extraction: &DocExtraction,
    llm: &dyn LlmBackend,
    threshold: f64,
) -> Result<DocRelations, RelationError> {
    let mut scored = Vec::new();
    let mut skipped = Vec::new();
    for bio in &extraction.bio {
        sentence_frequency(&bio.sentence_indices, doc)?;
        for sdoh in &extraction.sdoh {
            sentence_frequency(&sdoh.sentence_indices, doc)?;
            let relation_label = match propose_relation(bio, sdoh, doc, llm) {
                Ok(label) => label,
                Err(e) => {
                    log::warn!("{}: skipping pair ({}, {}): {e}", doc.doc_id, bio.surface, sdoh.surface);
                    skipped.push(format!("{}|{}: {e}", bio.surface, sdoh.surface));
                    continue;
                }
            };
            scored.push(ScoredPair {
                co_occurrence: co_occurrence_score(&bio.sentence_indices, &sdoh.sentence_indices),
                bio: bio.clone(),
                sdoh: sdoh.clone(),
                relation_label,
                doc_id: doc.doc_id.clone(),
            });
        }
    }
    let retained = filter_pairs(scored.clone(), threshold);
    Ok(DocRelations {
        doc_id: doc.doc_id.clone(),
        scored,
        retained,
        skipped,
    })
}

/// Writes retained pairs as CSV:
/// `doc_id,bio_id,bio_surface,relation,sdoh_surface,sdoh_subtype,score`.
pub fn write_pairs_csv<W: Write>(pairs: &[ScoredPair], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["doc_id", "bio_id", "bio_surface", "relation", "sdoh_surface", "sdoh_subtype", "score"])?;
    for p in pairs {
        w.write_record([
            p.doc_id.as_str(),
            &p.bio.identifier.to_string(),
            &p.bio.surface,
            p.relation_label.as_deref().unwrap_or(""),
            &p.sdoh.surface,
            &p.sdoh.sdoh_subtype,
            &p.score_f64().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
