//! The pipeline stages. Each reads the previous stage's files from the
//! output directory and writes its own through a [`Staging`].

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use sdohkg::backend::{FixtureEntry, Recording};
use sdohkg::corpus::{corpus_stats, ingest_corpus};
use sdohkg::extraction::llm::{ChatCompletionClient, FixtureLlm, RecordingLlm, RuleLlm};
use sdohkg::extraction::ner::{FixtureNer, LexiconNer, PubTatorClient, RecordingNer};
use sdohkg::extraction::{DocExtraction, Extractor, LlmBackend, NerBackend};
use sdohkg::gnn::{self, EncodedGraph};
use sdohkg::idmerge::{self, Aligner, CuiIndex, FixtureUmls, IdMap, MapKind, UmlsBackend, UtsClient};
use sdohkg::kgraph::{self, KnowledgeGraph};
use sdohkg::linkpred::{self, EvalSettings, GeneMaskSpec, PairKind};
use sdohkg::relation::{self, DocRelations};
use sdohkg::taxonomy::SdohTaxonomy;
use sdohkg::NamespacedId;

use crate::config::{LlmKind, NerKind, RunConfig, UmlsKind};
use crate::manifest::Staging;

pub const BIO_SERVICE: &str = "bio";
pub const SDOH_SERVICE: &str = "sdoh";

/// File names inside the output directory.
pub mod files {
    pub const CORPUS: &str = "corpus.jsonl";
    pub const CORPUS_STATS: &str = "corpus_stats.json";
    pub const EXTRACTIONS: &str = "extractions.jsonl";
    pub const EXTRACT_SUMMARY: &str = "extract_summary.json";
    pub const RELATIONS: &str = "relations.jsonl";
    pub const PAIRS: &str = "pairs.csv";
    pub const SCORED_PAIRS: &str = "scored_pairs.csv";
    pub const SDOH_KG: &str = "sdoh_kg.csv";
    pub const SDOH_KG_EVIDENCE: &str = "sdoh_kg.evidence.jsonl";
    pub const AD_SUBGRAPH: &str = "ad_subgraph.csv";
    pub const AD_SUBGRAPH_EVIDENCE: &str = "ad_subgraph.evidence.jsonl";
    pub const MERGED_KG: &str = "merged_kg.csv";
    pub const MERGED_KG_EVIDENCE: &str = "merged_kg.evidence.jsonl";
    pub const MERGE_REPORT: &str = "merge_report.json";
    pub const CHECKPOINT: &str = "model.ckpt";
    pub const LOSS: &str = "loss.csv";
    pub const EVAL_RANDOM: &str = "eval_random.csv";
    pub const EVAL_RANDOM_RUNS: &str = "eval_random_runs.csv";
    pub const EVAL_GENES: &str = "eval_genes.csv";
    pub const EVAL_GENES_RUNS: &str = "eval_genes_runs.csv";
    pub const PRED_GENE_SDOH: &str = "predictions_gene_sdoh.csv";
    pub const PRED_GENE_SDOH_HALF: &str = "predictions_gene_sdoh_above_half.csv";
    pub const PRED_GENE_GENE: &str = "predictions_gene_gene.csv";
    pub const RECORDED_NER: &str = "recorded/ner_fixture.jsonl";
    pub const RECORDED_LLM: &str = "recorded/llm_fixture.jsonl";
}

/// What a stage tells the manifest beyond its output files.
#[derive(Debug, Default)]
pub struct StageReport {
    pub inputs: Vec<PathBuf>,
    pub seeds: Vec<u64>,
    pub backends: BTreeMap<String, String>,
    pub parameters: serde_json::Value,
    /// Printed to stdout after the stage commits.
    pub summary: String,
}

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a Path,
}

impl Ctx<'_> {
    fn prior(&self, name: &str, stage: &str) -> Result<PathBuf> {
        let p = self.out.join(name);
        if !p.is_file() {
            bail!("{} not found; run `{stage}` first", p.display());
        }
        Ok(p)
    }

    fn taxonomy(&self, report: &mut StageReport) -> Result<SdohTaxonomy> {
        match &self.cfg.paths.taxonomy {
            Some(p) => {
                report.inputs.push(p.clone());
                let t = SdohTaxonomy::from_file(p).with_context(|| format!("taxonomy {}", p.display()))?;
                sdohkg::taxonomy::validate_taxonomy(&t)
                    .map_err(|v| anyhow::anyhow!("taxonomy {} is invalid: {v:?}", p.display()))?;
                Ok(t)
            }
            None => Ok(SdohTaxonomy::healthy_people_2030().clone()),
        }
    }

    fn graph(&self, name: &str, stage: &str, report: &mut StageReport) -> Result<KnowledgeGraph> {
        let p = self.prior(name, stage)?;
        report.inputs.push(p.clone());
        let side = kgraph::evidence_path(&p);
        if side.is_file() {
            report.inputs.push(side);
        }
        kgraph::deserialize(&p).with_context(|| format!("reading {}", p.display()))
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), i + 1))?);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(stage: &mut Staging, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    stage.write(name, text)?;
    Ok(())
}

fn csv_file(stage: &mut Staging, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(stage.file(name)?)?))
}

fn ner_backend(kind: NerKind, service: &str, ctx: &Ctx, report: &mut StageReport) -> Result<Box<dyn NerBackend>> {
    let paths = &ctx.cfg.paths;
    report.backends.insert(format!("{service}_ner"), format!("{kind:?}").to_lowercase());
    Ok(match kind {
        NerKind::Lexicon => {
            let p = if service == BIO_SERVICE { &paths.bio_lexicon } else { &paths.sdoh_lexicon };
            let p = p.as_ref().context("lexicon path missing")?;
            report.inputs.push(p.clone());
            Box::new(LexiconNer::from_file(service, p)?)
        }
        NerKind::Fixture => {
            let p = paths.ner_fixture.as_ref().context("paths.ner_fixture missing")?;
            report.inputs.push(p.clone());
            Box::new(FixtureNer::load(service, service, p)?)
        }
        NerKind::Http => Box::new(PubTatorClient::new(ctx.cfg.http.pubtator.clone())),
    })
}

fn llm_backend(ctx: &Ctx, report: &mut StageReport) -> Result<Box<dyn LlmBackend>> {
    let cfg = ctx.cfg;
    report.backends.insert("llm".into(), format!("{:?}", cfg.backends.llm).to_lowercase());
    Ok(match cfg.backends.llm {
        LlmKind::Rules => {
            let p = cfg.paths.llm_rules.as_ref().context("paths.llm_rules missing")?;
            report.inputs.push(p.clone());
            Box::new(RuleLlm::from_file(p)?)
        }
        LlmKind::Fixture => {
            let p = cfg.paths.llm_fixture.as_ref().context("paths.llm_fixture missing")?;
            report.inputs.push(p.clone());
            Box::new(FixtureLlm::load(p)?)
        }
        LlmKind::Http => {
            report.backends.insert("llm_model".into(), cfg.http.llm_model.clone());
            Box::new(ChatCompletionClient::new(cfg.http.llm.clone(), cfg.http.llm_model.clone()))
        }
    })
}

/// Writes a recording, keeping entries from an earlier recording at the
/// same place (extract and relate both talk to the LLM).
fn save_recording(ctx: &Ctx, stage: &mut Staging, name: &str, rec: &Recording) -> Result<()> {
    let previous = ctx.out.join(name);
    if previous.is_file() {
        let old: Vec<FixtureEntry> = read_jsonl(&previous)?;
        for e in old {
            rec.push(e.request_hash, e.response);
        }
    }
    rec.write_jsonl(stage.file(name)?)?;
    Ok(())
}

pub fn ingest(ctx: &Ctx, stage: &mut Staging) -> Result<StageReport> {
    let src = &ctx.cfg.paths.corpus;
    let corpus = ingest_corpus(src).with_context(|| format!("ingesting {}", src.display()))?;
    let mut buf = Vec::new();
    corpus.write_jsonl(&mut buf)?;
    stage.write(files::CORPUS, buf)?;
    let stats = corpus_stats(&corpus);
    write_json(stage, files::CORPUS_STATS, &stats)?;
    Ok(StageReport {
        inputs: vec![src.clone()],
        summary: format!("documents\t{}\nsentences\t{}\n", stats.doc_count, stats.sentence_count),
        ..StageReport::default()
    })
}

pub fn extract(ctx: &Ctx, stage: &mut Staging) -> Result<StageReport> {
    let mut report = StageReport::default();
    let corpus_path = ctx.prior(files::CORPUS, "ingest")?;
    report.inputs.push(corpus_path.clone());
    let corpus = ingest_corpus(&corpus_path)?;
    let taxonomy = ctx.taxonomy(&mut report)?;
    let b = &ctx.cfg.backends;
    let mut bio = ner_backend(b.bio_ner, BIO_SERVICE, ctx, &mut report)?;
    let mut sdoh = ner_backend(b.sdoh_ner, SDOH_SERVICE, ctx, &mut report)?;
    let mut llm = llm_backend(ctx, &mut report)?;
    let ner_rec = Arc::new(Recording::default());
    let llm_rec = Arc::new(Recording::default());
    if b.record {
        bio = Box::new(RecordingNer::new(bio, BIO_SERVICE, ner_rec.clone()));
        sdoh = Box::new(RecordingNer::new(sdoh, SDOH_SERVICE, ner_rec.clone()));
        llm = Box::new(RecordingLlm::new(llm, llm_rec.clone()));
    }
    let extractor = Extractor {
        bio_ner: bio.as_ref(),
        sdoh_ner: sdoh.as_ref(),
        llm: llm.as_ref(),
        taxonomy: &taxonomy,
    };
    let docs = extractor.extract_corpus(&corpus)?;
    write_jsonl(&stage.file(files::EXTRACTIONS)?, &docs)?;
    let count = |f: fn(&DocExtraction) -> usize| docs.iter().map(f).sum::<usize>();
    let summary = json!({
        "documents": docs.len(),
        "bio_mentions": count(|d| d.bio.len()),
        "sdoh_candidates": count(|d| d.candidates.len()),
        "sdoh_entities": count(|d| d.sdoh.len()),
        "discarded": count(|d| d.discarded.len()),
        "errors": count(|d| d.errors.len()),
    });
    write_json(stage, files::EXTRACT_SUMMARY, &summary)?;
    if b.record {
        save_recording(ctx, stage, files::RECORDED_NER, &ner_rec)?;
        save_recording(ctx, stage, files::RECORDED_LLM, &llm_rec)?;
    }
    report.summary = summary
        .as_object()
        .expect("object")
        .iter()
        .map(|(k, v)| format!("{k}\t{v}\n"))
        .collect();
    Ok(report)
}

pub fn relate(ctx: &Ctx, stage: &mut Staging) -> Result<StageReport> {
    let mut report = StageReport::default();
    let corpus_path = ctx.prior(files::CORPUS, "ingest")?;
    let ext_path = ctx.prior(files::EXTRACTIONS, "extract")?;
    report.inputs.extend([corpus_path.clone(), ext_path.clone()]);
    let corpus = ingest_corpus(&corpus_path)?;
    let extractions: Vec<DocExtraction> = read_jsonl(&ext_path)?;
    let mut llm = llm_backend(ctx, &mut report)?;
    let llm_rec = Arc::new(Recording::default());
    if ctx.cfg.backends.record {
        llm = Box::new(RecordingLlm::new(llm, llm_rec.clone()));
    }
    let threshold = ctx.cfg.threshold;
    let docs: Vec<DocRelations> = extractions
        .par_iter()
        .map(|ext| {
            let doc = corpus
                .get(&ext.doc_id)
                .with_context(|| format!("extraction for unknown document {}", ext.doc_id))?;
            Ok(relation::relate_document(doc, ext, llm.as_ref(), threshold)?)
        })
        .collect::<Result<_>>()?;
    write_jsonl(&stage.file(files::RELATIONS)?, &docs)?;
    let retained: Vec<_> = docs.iter().flat_map(|d| d.retained.iter().cloned()).collect();
    let scored: Vec<_> = docs.iter().flat_map(|d| d.scored.iter().cloned()).collect();
    relation::write_pairs_csv(&retained, csv_file(stage, files::PAIRS)?)?;
    relation::write_pairs_csv(&scored, csv_file(stage, files::SCORED_PAIRS)?)?;
    if ctx.cfg.backends.record {
        save_recording(ctx, stage, files::RECORDED_LLM, &llm_rec)?;
    }
    report.parameters = json!({ "threshold": threshold });
    report.summary = format!("scored pairs\t{}\nretained pairs\t{}\n", scored.len(), retained.len());
    Ok(report)
}

pub fn build_kg(ctx: &Ctx, stage: &mut Staging) -> Result<StageReport> {
    let mut report = StageReport::default();
    let rel_path = ctx.prior(files::RELATIONS, "relate")?;
    report.inputs.push(rel_path.clone());
    let docs: Vec<DocRelations> = read_jsonl(&rel_path)?;
    let taxonomy = ctx.taxonomy(&mut report)?;
    let kg = kgraph::assemble_sdoh_graph(&docs, &taxonomy)?;
    stage.file(files::SDOH_KG_EVIDENCE)?;
    kgraph::serialize(&kg, stage.file(files::SDOH_KG)?)?;
    report.summary = kgraph::graph_stats(&kg).to_string();
    Ok(report)
}

pub fn stats(ctx: &Ctx, stage: &mut Staging, graph: Option<&Path>) -> Result<StageReport> {
    let mut report = StageReport::default();
    let path = match graph {
        Some(p) => p.to_path_buf(),
        None => ctx.prior(files::SDOH_KG, "build-kg")?,
    };
    report.inputs.push(path.clone());
    let kg = kgraph::deserialize(&path).with_context(|| format!("reading {}", path.display()))?;
    let s = kgraph::graph_stats(&kg);
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph");
    stage.write(&format!("{stem}.stats.tsv"), s.to_string())?;
    report.summary = s.to_string();
    Ok(report)
}

/// UMLS off: every lookup misses.
struct NoUmls;

impl UmlsBackend for NoUmls {
    fn name(&self) -> &str {
        "none"
    }

    fn lookup_cui(&self, _term: &str) -> Result<Option<String>, sdohkg::backend::BackendError> {
        Ok(None)
    }
}

pub fn merge(ctx: &Ctx, stage: &mut Staging) -> Result<StageReport> {
    let cfg = ctx.cfg;
    let mut report = StageReport::default();
    let primekg_path = cfg.paths.primekg.as_ref().context("paths.primekg is required for merge")?;
    report.inputs.push(primekg_path.clone());
    let primekg = kgraph::deserialize(primekg_path).with_context(|| format!("reading {}", primekg_path.display()))?;
    let center: NamespacedId = cfg.merge.center.parse()?;
    let sub = idmerge::extract_ad_subgraph(&primekg, &center, cfg.merge.hops, &idmerge::default_type_filter())?;
    let sdoh = ctx.graph(files::SDOH_KG, "build-kg", &mut report)?;

    let mut maps: Vec<IdMap> = Vec::new();
    for (path, kind) in [
        (&cfg.paths.mesh_omim_to_mondo, MapKind::MeshOmimToMondo),
        (&cfg.paths.mesh_to_drugbank, MapKind::MeshToDrugbank),
    ] {
        if let Some(p) = path {
            report.inputs.push(p.clone());
            maps.push(idmerge::load_mapping(p, kind)?);
        }
    }
    let umls: Box<dyn UmlsBackend> = match cfg.backends.umls {
        UmlsKind::None => Box::new(NoUmls),
        UmlsKind::Fixture => {
            let p = cfg.paths.umls_fixture.as_ref().context("paths.umls_fixture missing")?;
            report.inputs.push(p.clone());
            Box::new(FixtureUmls::load(p)?)
        }
        UmlsKind::Http => Box::new(UtsClient::new(cfg.http.umls.clone())),
    };
    report.backends.insert("umls".into(), umls.name().to_string());
    let cui_index = match &cfg.paths.cui_xref {
        Some(p) => {
            report.inputs.push(p.clone());
            CuiIndex::load(p)?
        }
        None => CuiIndex::default(),
    };
    let aligner = Aligner {
        maps: &maps,
        umls: umls.as_ref(),
        cui_index: &cui_index,
        target: &sub,
    };
    let (merged, merge_report) = idmerge::align_and_merge(&sdoh, &sub, &aligner);
    stage.file(files::AD_SUBGRAPH_EVIDENCE)?;
    kgraph::serialize(&sub, stage.file(files::AD_SUBGRAPH)?)?;
    stage.file(files::MERGED_KG_EVIDENCE)?;
    kgraph::serialize(&merged, stage.file(files::MERGED_KG)?)?;
    write_json(stage, files::MERGE_REPORT, &merge_report)?;
    report.parameters = json!({ "center": cfg.merge.center, "hops": cfg.merge.hops });
    report.summary = format!(
        "subgraph\tnodes {}\tedges {}\nsdoh graph\tnodes {}\tedges {}\nmerged\tnodes {}\tedges {}\n\
         mapped directly\t{}\nmapped via UMLS\t{}\nkept original\t{}\n",
        merge_report.nodes_b,
        merge_report.edges_b,
        merge_report.nodes_a,
        merge_report.edges_a,
        merge_report.nodes_merged,
        merge_report.edges_merged,
        merge_report.matched_direct,
        merge_report.matched_umls,
        merge_report.kept_original,
    );
    Ok(report)
}

fn model_config(cfg: &RunConfig) -> gnn::ModelConfig {
    gnn::ModelConfig {
        seed: cfg.seed,
        ..cfg.model.clone()
    }
}

pub fn train(ctx: &Ctx, stage: &mut Staging) -> Result<StageReport> {
    let mut report = StageReport::default();
    let merged = ctx.graph(files::MERGED_KG, "merge", &mut report)?;
    let enc = EncodedGraph::new(&merged);
    let config = model_config(ctx.cfg);
    let outcome = gnn::train(&enc, &config)?;
    gnn::save_checkpoint(&outcome.model, stage.file(files::CHECKPOINT)?)?;
    gnn::write_loss_csv(&outcome.loss_trace, csv_file(stage, files::LOSS)?)?;
    report.seeds = vec![config.seed];
    report.parameters = serde_json::to_value(&config)?;
    report.summary = format!(
        "nodes\t{}\nedges\t{}\nfirst loss\t{:.6}\nlast loss\t{:.6}\n",
        enc.node_count(),
        enc.edges.len(),
        outcome.loss_trace.first().copied().unwrap_or(f64::NAN),
        outcome.loss_trace.last().copied().unwrap_or(f64::NAN),
    );
    Ok(report)
}

fn eval_settings(cfg: &RunConfig) -> EvalSettings {
    EvalSettings {
        model: cfg.model.clone(),
        mask_fraction: cfg.eval.mask_fraction,
        negatives: cfg.eval.negatives,
        seeds: cfg.eval.seeds.clone(),
    }
}

fn results_summary(rows: &[linkpred::Comparison]) -> String {
    rows.iter()
        .map(|c| {
            format!(
                "{}\t{:.3} ± {:.3}\t{:.3} ± {:.3}\tp={:.4}{}\n",
                c.name,
                c.a.mean,
                c.a.std,
                c.b.mean,
                c.b.std,
                c.test.p,
                if c.test.significant(linkpred::SIGNIFICANCE) { " *" } else { "" }
            )
        })
        .collect()
}

pub fn eval_random(ctx: &Ctx, stage: &mut Staging) -> Result<StageReport> {
    let mut report = StageReport::default();
    let a = ctx.graph(files::AD_SUBGRAPH, "merge", &mut report)?;
    let b = ctx.graph(files::MERGED_KG, "merge", &mut report)?;
    let settings = eval_settings(ctx.cfg);
    let mut rows = Vec::new();
    for rel in &ctx.cfg.eval.relations {
        log::info!("evaluating relation {rel}");
        rows.push(linkpred::run_relation_eval(&a, &b, rel, &settings).with_context(|| format!("relation {rel}"))?);
    }
    linkpred::write_results_csv(&rows, csv_file(stage, files::EVAL_RANDOM)?)?;
    linkpred::write_runs_csv(&rows, csv_file(stage, files::EVAL_RANDOM_RUNS)?)?;
    report.seeds = settings.seeds.clone();
    report.parameters = serde_json::to_value(&settings)?;
    report.summary = results_summary(&rows);
    Ok(report)
}

pub fn eval_genes(ctx: &Ctx, stage: &mut Staging) -> Result<StageReport> {
    let mut report = StageReport::default();
    let a = ctx.graph(files::AD_SUBGRAPH, "merge", &mut report)?;
    let b = ctx.graph(files::MERGED_KG, "merge", &mut report)?;
    let path = ctx.cfg.paths.validated_edges.as_ref().context("paths.validated_edges is required for eval-genes")?;
    report.inputs.push(path.clone());
    let validated = linkpred::load_validated_edges(path)?;
    let settings = eval_settings(ctx.cfg);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for gene in &ctx.cfg.eval.genes {
        let spec = GeneMaskSpec {
            gene: gene.clone(),
            validated: validated.clone(),
        };
        match linkpred::run_gene_eval(&a, &b, &spec, &settings) {
            Ok(c) => rows.push(c),
            Err(e @ (linkpred::EvalError::GeneAbsent(_) | linkpred::EvalError::NoValidatedEdges(_))) => {
                log::warn!("skipping {gene}: {e}");
                skipped.push(gene.clone());
            }
            Err(e) => return Err(e).with_context(|| format!("gene {gene}")),
        }
    }
    if rows.is_empty() {
        bail!("no gene could be evaluated (skipped: {})", skipped.join(", "));
    }
    linkpred::write_results_csv(&rows, csv_file(stage, files::EVAL_GENES)?)?;
    linkpred::write_runs_csv(&rows, csv_file(stage, files::EVAL_GENES_RUNS)?)?;
    report.seeds = settings.seeds.clone();
    report.parameters = json!({ "settings": settings, "skipped_genes": skipped });
    report.summary = results_summary(&rows);
    Ok(report)
}

pub fn predict(ctx: &Ctx, stage: &mut Staging) -> Result<StageReport> {
    let mut report = StageReport::default();
    let merged = ctx.graph(files::MERGED_KG, "merge", &mut report)?;
    let ckpt = ctx.prior(files::CHECKPOINT, "train")?;
    report.inputs.push(ckpt.clone());
    let model = gnn::load_checkpoint(&ckpt)?;
    let enc = EncodedGraph::new(&merged);
    let z = gnn::rgcn_forward(&enc, &model).context("checkpoint does not fit the merged graph; re-run `train`")?;
    let top_n = ctx.cfg.eval.top_n;
    let mut summary = String::new();
    for (kind, top_name, half_name) in [
        (PairKind::GeneSdoh, files::PRED_GENE_SDOH, Some(files::PRED_GENE_SDOH_HALF)),
        (PairKind::GeneGene, files::PRED_GENE_GENE, None),
    ] {
        let mut preds = linkpred::exploratory_predict(&enc, &z, kind, top_n);
        linkpred::name_predictions(&mut preds, &merged);
        linkpred::write_predictions_csv(&preds.top, csv_file(stage, top_name)?)?;
        summary.push_str(&format!("{kind:?} top\t{}\n", preds.top.len()));
        if let Some(name) = half_name {
            linkpred::write_predictions_csv(&preds.above_half, csv_file(stage, name)?)?;
            let genes: std::collections::BTreeSet<&str> = preds.above_half.iter().map(|p| p.u_id.as_str()).collect();
            summary.push_str(&format!("{kind:?} above 0.5\t{} pairs, {} genes\n", preds.above_half.len(), genes.len()));
        }
    }
    report.seeds = vec![model.seed];
    report.parameters = json!({ "top_n": top_n });
    report.summary = summary;
    Ok(report)
}
