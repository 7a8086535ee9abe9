//! Entity extraction: biomedical mentions from an annotator, SDoH candidates
//! from a generic NER pass, and two-round LLM filtering/classification of
//! candidates into the SDoH taxonomy.

pub mod llm;
pub mod ner;
pub mod prompt;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::BackendError;
use crate::corpus::{AbstractDoc, Corpus};
use crate::ids::{normalize_surface, NamespacedId};
use crate::taxonomy::SdohTaxonomy;

pub use llm::{LlmBackend, LlmQuery, LlmRequest};
pub use ner::{Annotation, NerBackend};

use prompt::{parse_label, LabelAnswer};

/// The six annotator entity types that count as biomedical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BioType {
    Gene,
    Disease,
    Chemical,
    Mutation,
    Species,
    CellLine,
}

impl BioType {
    /// Maps annotator type names (PubTator spellings included) onto the
    /// closed set; anything else is `None`.
    pub fn parse(s: &str) -> Option<Self> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        Some(match key.as_str() {
            "gene" | "geneprotein" | "protein" => BioType::Gene,
            "disease" => BioType::Disease,
            "chemical" | "drug" => BioType::Chemical,
            "mutation" | "dnamutation" | "proteinmutation" | "snp" | "variant" => BioType::Mutation,
            "species" => BioType::Species,
            "cellline" => BioType::CellLine,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BioType::Gene => "gene",
            BioType::Disease => "disease",
            BioType::Chemical => "chemical",
            BioType::Mutation => "mutation",
            BioType::Species => "species",
            BioType::CellLine => "cell_line",
        }
    }

    fn default_namespace(self) -> &'static str {
        match self {
            BioType::Gene => "ncbigene",
            BioType::Disease | BioType::Chemical => "mesh",
            BioType::Mutation => "tmvar",
            BioType::Species => "ncbitaxon",
            BioType::CellLine => "cellosaurus",
        }
    }

    /// Normalizes an annotator identifier: `MESH:D000544` → `mesh:D000544`,
    /// a bare gene id `348` → `ncbigene:348`. Only the first of several
    /// `;`-separated ids is kept.
    pub fn identifier(self, raw: &str) -> Option<NamespacedId> {
        let first = raw.split([';', ',']).next()?.trim();
        if first.is_empty() || first == "-" {
            return None;
        }
        match first.split_once(':') {
            Some((ns, local)) => NamespacedId::new(ns, local).ok(),
            None => NamespacedId::new(self.default_namespace(), first).ok(),
        }
    }
}

impl fmt::Display for BioType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BioMention {
    pub surface: String,
    pub entity_type: BioType,
    pub identifier: NamespacedId,
    pub sentence_indices: BTreeSet<usize>,
    pub doc_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateMention {
    pub surface: String,
    pub sentence_indices: BTreeSet<usize>,
    pub doc_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdohEntity {
    /// Lowercased, whitespace-collapsed surface; the entity's identity.
    pub surface: String,
    /// Surface as first seen in the text.
    pub display: String,
    pub sdoh_type: String,
    pub sdoh_subtype: String,
    pub sentence_indices: BTreeSet<usize>,
    pub doc_id: String,
}

impl SdohEntity {
    pub fn id(&self) -> NamespacedId {
        NamespacedId::sdoh_entity(&self.surface)
    }
}

fn sentences_overlapping(doc: &AbstractDoc, a: &Annotation) -> Result<BTreeSet<usize>, BackendError> {
    let text = &doc.abstract_text;
    let bad = |m: String| BackendError::Annotation {
        doc_id: doc.doc_id.clone(),
        message: m,
    };
    if a.start >= a.end || a.end > text.len() || !text.is_char_boundary(a.start) || !text.is_char_boundary(a.end) {
        return Err(bad(format!(
            "annotation {:?} span {}..{} lies outside the text (len {})",
            a.text,
            a.start,
            a.end,
            text.len()
        )));
    }
    if !a.text.is_empty() && !text[a.start..a.end].eq_ignore_ascii_case(&a.text) {
        return Err(bad(format!(
            "annotation {:?} does not match text {:?} at {}..{}",
            a.text,
            &text[a.start..a.end],
            a.start,
            a.end
        )));
    }
    let idx: BTreeSet<usize> = doc
        .sentences
        .iter()
        .filter(|s| s.char_span.0 < a.end && a.start < s.char_span.1)
        .map(|s| s.index)
        .collect();
    if idx.is_empty() {
        return Err(bad(format!("annotation {:?} falls between sentences", a.text)));
    }
    Ok(idx)
}

/// Biomedical mentions of `doc`, one per (identifier, case-folded surface),
/// in order of first occurrence. Annotations outside the six types or
/// without an identifier are dropped.
pub fn extract_bio_entities(doc: &AbstractDoc, backend: &dyn NerBackend) -> Result<Vec<BioMention>, BackendError> {
    let annotations = backend.annotate(doc)?;
    let mut out: Vec<BioMention> = Vec::new();
    let mut index: HashMap<(NamespacedId, String), usize> = HashMap::new();
    for a in &annotations {
        let sentences = sentences_overlapping(doc, a)?;
        let Some(ty) = BioType::parse(&a.entity_type) else {
            log::debug!("{}: dropping {:?} of type {:?}", doc.doc_id, a.text, a.entity_type);
            continue;
        };
        let Some(id) = a.identifier.as_deref().and_then(|i| ty.identifier(i)) else {
            log::debug!("{}: dropping {:?} without identifier", doc.doc_id, a.text);
            continue;
        };
        let surface = doc.abstract_text[a.start..a.end].trim().to_string();
        let key = (id.clone(), surface.to_lowercase());
        match index.get(&key) {
            Some(&i) => out[i].sentence_indices.extend(sentences),
            None => {
                index.insert(key, out.len());
                out.push(BioMention {
                    surface,
                    entity_type: ty,
                    identifier: id,
                    sentence_indices: sentences,
                    doc_id: doc.doc_id.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Candidate SDoH terms: every annotated span, trimmed, deduplicated per
/// document by case-folded surface with sentence sets unioned.
pub fn extract_sdoh_candidates(
    doc: &AbstractDoc,
    backend: &dyn NerBackend,
) -> Result<Vec<CandidateMention>, BackendError> {
    let annotations = backend.annotate(doc)?;
    let mut out: Vec<CandidateMention> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for a in &annotations {
        let sentences = sentences_overlapping(doc, a)?;
        let surface = doc.abstract_text[a.start..a.end].trim();
        if surface.is_empty() {
            continue;
        }
        let key = normalize_surface(surface);
        match index.get(&key) {
            Some(&i) => out[i].sentence_indices.extend(sentences),
            None => {
                index.insert(key, out.len());
                out.push(CandidateMention {
                    surface: surface.to_string(),
                    sentence_indices: sentences,
                    doc_id: doc.doc_id.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Drops candidates whose case-folded surface equals a biomedical mention's.
pub fn remove_bio_overlap(cands: Vec<CandidateMention>, bio: &[BioMention]) -> Vec<CandidateMention> {
    let bio_surfaces: HashSet<String> = bio.iter().map(|b| normalize_surface(&b.surface)).collect();
    cands
        .into_iter()
        .filter(|c| !bio_surfaces.contains(&normalize_surface(&c.surface)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Round {
    Type,
    Subtype,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discarded {
    pub surface: String,
    pub round: Round,
    /// Raw answer when it could not be parsed; `None` for an explicit NONE.
    pub unparsed_response: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateError {
    pub surface: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub entities: Vec<SdohEntity>,
    pub discarded: Vec<Discarded>,
    pub errors: Vec<CandidateError>,
}

fn context_sentences<'a>(doc: &'a AbstractDoc, indices: &BTreeSet<usize>) -> Vec<&'a str> {
    indices
        .iter()
        .filter_map(|&i| doc.sentences.get(i))
        .map(|s| s.text.as_str())
        .collect()
}

/// Two-round classification. Round one asks for an SDoH type (or NONE),
/// round two for a subtype of that type (or NONE). Candidates answered NONE
/// or with an unparseable label in either round are discarded; backend
/// failures are recorded per candidate and the rest continue.
pub fn filter_and_classify(
    doc: &AbstractDoc,
    cands: &[CandidateMention],
    taxonomy: &SdohTaxonomy,
    llm: &dyn LlmBackend,
) -> Classification {
    let type_names: Vec<String> = taxonomy.type_names().map(str::to_string).collect();
    let mut out = Classification::default();
    let mut seen: HashMap<String, usize> = HashMap::new();

    for cand in cands {
        let context = context_sentences(doc, &cand.sentence_indices);
        let discard = |out: &mut Classification, round, unparsed: Option<String>| {
            if let Some(raw) = &unparsed {
                log::warn!("{}: discarding {:?}, unparseable {round:?} answer {raw:?}", doc.doc_id, cand.surface);
            }
            out.discarded.push(Discarded {
                surface: cand.surface.clone(),
                round,
                unparsed_response: unparsed,
            });
        };
        let fail = |out: &mut Classification, e: BackendError| {
            log::warn!("{}: classification of {:?} failed: {e}", doc.doc_id, cand.surface);
            out.errors.push(CandidateError {
                surface: cand.surface.clone(),
                message: e.to_string(),
            });
        };

        let request = LlmRequest {
            prompt: prompt::sdoh_type_prompt(&cand.surface, &context, &type_names),
            query: LlmQuery::SdohType {
                term: cand.surface.clone(),
            },
        };
        let raw = match llm.complete(&request) {
            Ok(r) => r,
            Err(e) => {
                fail(&mut out, e);
                continue;
            }
        };
        let sdoh_type = match parse_label(&raw, &type_names) {
            LabelAnswer::Label(t) => t.to_string(),
            LabelAnswer::None => {
                discard(&mut out, Round::Type, None);
                continue;
            }
            LabelAnswer::Unparseable => {
                discard(&mut out, Round::Type, Some(raw));
                continue;
            }
        };

        let subtypes: Vec<String> = taxonomy.subtypes_of(&sdoh_type).unwrap_or_default().to_vec();
        let request = LlmRequest {
            prompt: prompt::sdoh_subtype_prompt(&cand.surface, &sdoh_type, &context, &subtypes),
            query: LlmQuery::SdohSubtype {
                term: cand.surface.clone(),
                sdoh_type: sdoh_type.clone(),
            },
        };
        let raw = match llm.complete(&request) {
            Ok(r) => r,
            Err(e) => {
                fail(&mut out, e);
                continue;
            }
        };
        let subtype = match parse_label(&raw, &subtypes) {
            LabelAnswer::Label(s) => s.to_string(),
            LabelAnswer::None => {
                discard(&mut out, Round::Subtype, None);
                continue;
            }
            LabelAnswer::Unparseable => {
                discard(&mut out, Round::Subtype, Some(raw));
                continue;
            }
        };
        debug_assert!(taxonomy.is_valid_pair(&sdoh_type, &subtype));

        let surface = normalize_surface(&cand.surface);
        match seen.get(&surface) {
            // differently-cased duplicates keep the first classification
            Some(&i) => out.entities[i].sentence_indices.extend(cand.sentence_indices.iter().copied()),
            None => {
                seen.insert(surface.clone(), out.entities.len());
                out.entities.push(SdohEntity {
                    surface,
                    display: cand.surface.clone(),
                    sdoh_type,
                    sdoh_subtype: subtype,
                    sentence_indices: cand.sentence_indices.clone(),
                    doc_id: doc.doc_id.clone(),
                });
            }
        }
    }
    out
}

/// Everything extracted from one abstract.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocExtraction {
    pub doc_id: String,
    pub bio: Vec<BioMention>,
    pub candidates: Vec<CandidateMention>,
    pub sdoh: Vec<SdohEntity>,
    pub discarded: Vec<Discarded>,
    pub errors: Vec<CandidateError>,
}

pub struct Extractor<'a> {
    pub bio_ner: &'a dyn NerBackend,
    pub sdoh_ner: &'a dyn NerBackend,
    pub llm: &'a dyn LlmBackend,
    pub taxonomy: &'a SdohTaxonomy,
}

impl Extractor<'_> {
    pub fn extract_document(&self, doc: &AbstractDoc) -> Result<DocExtraction, BackendError> {
        let bio = extract_bio_entities(doc, self.bio_ner)?;
        let candidates = remove_bio_overlap(extract_sdoh_candidates(doc, self.sdoh_ner)?, &bio);
        let classified = filter_and_classify(doc, &candidates, self.taxonomy, self.llm);
        Ok(DocExtraction {
            doc_id: doc.doc_id.clone(),
            bio,
            candidates,
            sdoh: classified.entities,
            discarded: classified.discarded,
            errors: classified.errors,
        })
    }

    /// Extracts every document in parallel; results keep corpus order.
    pub fn extract_corpus(&self, corpus: &Corpus) -> Result<Vec<DocExtraction>, BackendError> {
        corpus.docs.par_iter().map(|d| self.extract_document(d)).collect()
    }
}
