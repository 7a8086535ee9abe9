//! Literature-mined SDoH knowledge graphs: corpus ingestion, entity and
//! relation extraction through pluggable backends, graph assembly and
//! identifier merging, and relational-GCN link-prediction evaluation.

pub mod backend;
pub mod corpus;
pub mod extraction;
pub mod gnn;
pub mod ids;
pub mod idmerge;
pub mod kgraph;
pub mod linkpred;
pub mod relation;
pub mod stats;
pub mod synthetic;
pub mod taxonomy;

pub use ids::NamespacedId;
pub use corpus::{AbstractDoc, Corpus};
pub use extraction::{BioMention, BioType, DocExtraction, SdohEntity};
pub use gnn::{EncodedGraph, ModelConfig, RgcnModel};
pub use idmerge::MergeReport;
pub use kgraph::{EdgeKey, Evidence, KnowledgeGraph, Node, NodeKind, Triplet};
pub use linkpred::{Comparison, EvalResult, MaskSplit};
pub use relation::{DocRelations, ScoredPair};
pub use taxonomy::SdohTaxonomy;
