//! Command-line front end for the SDoH knowledge-graph pipeline.
//!
//! Exit codes: 0 ok, 1 stage failure, 2 usage or configuration error.

pub mod config;
pub mod manifest;
pub mod stages;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{LlmKind, NerKind, RunConfig, UmlsKind};
use crate::manifest::{manifest_path, FileHash, Manifest, Staging, MANIFEST_VERSION};
use crate::stages::{Ctx, StageReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_STAGE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sdohkg", version, about = "Build and evaluate an SDoH knowledge graph")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(short, long, global = true, default_value = "sdohkg.toml")]
    pub config: PathBuf,
    /// Output directory; overrides `paths.output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Check the stage's manifest against the files on disk instead of running it.
    #[arg(long, global = true)]
    pub verify: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Evaluation seeds, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    pub learning_rate: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub bio_ner: Option<NerKind>,
    #[arg(long, global = true, value_enum)]
    pub sdoh_ner: Option<NerKind>,
    #[arg(long, global = true, value_enum)]
    pub llm: Option<LlmKind>,
    #[arg(long, global = true, value_enum)]
    pub umls: Option<UmlsKind>,
    /// Record backend answers under `<out>/recorded/`.
    #[arg(long, global = true)]
    pub record: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Read and segment the corpus.
    Ingest,
    /// Biomedical and SDoH entity extraction.
    Extract,
    /// Relation labels and co-occurrence filtering.
    Relate,
    /// Assemble the SDoH knowledge graph.
    BuildKg,
    /// Node and edge counts of a graph file.
    Stats {
        /// Graph CSV; defaults to the SDoH graph in the output directory.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Extract the disease subgraph, align identifiers and merge.
    Merge {
        /// Center node id; overrides `merge.center`.
        #[arg(long)]
        center: Option<String>,
    },
    /// Train the encoder on the merged graph.
    Train,
    /// Random-mask link prediction, subgraph vs merged graph.
    EvalRandom,
    /// Validated-edge masks per gene, subgraph vs merged graph.
    EvalGenes,
    /// Rank unseen gene–SDoH and gene–gene pairs.
    Predict,
}

impl Command {
    pub fn stage_name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Extract => "extract",
            Command::Relate => "relate",
            Command::BuildKg => "build-kg",
            Command::Stats { .. } => "stats",
            Command::Merge { .. } => "merge",
            Command::Train => "train",
            Command::EvalRandom => "eval-random",
            Command::EvalGenes => "eval-genes",
            Command::Predict => "predict",
        }
    }
}

impl Cli {
    /// Loads the config file and applies the flag overrides.
    pub fn run_config(&self) -> Result<RunConfig, config::ConfigError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(out) = &self.out {
            cfg.paths.output_dir = out.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = &self.seeds {
            cfg.eval.seeds = s.clone();
        }
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if let Some(e) = self.epochs {
            cfg.model.epochs = e;
        }
        if let Some(lr) = self.learning_rate {
            cfg.model.learning_rate = lr;
        }
        if let Some(k) = self.bio_ner {
            cfg.backends.bio_ner = k;
        }
        if let Some(k) = self.sdoh_ner {
            cfg.backends.sdoh_ner = k;
        }
        if let Some(k) = self.llm {
            cfg.backends.llm = k;
        }
        if let Some(k) = self.umls {
            cfg.backends.umls = k;
        }
        if self.record {
            cfg.backends.record = true;
        }
        if let Command::Merge { center: Some(c) } = &self.command {
            cfg.merge.center = c.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    run(&cli)
}

pub fn run(cli: &Cli) -> i32 {
    let cfg = match cli.run_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let stage = cli.command.stage_name();
    let out = cfg.paths.output_dir.clone();
    if cli.verify {
        return verify(&out, stage);
    }
    match run_stage(&cli.command, &cfg, &cli.config, &out) {
        Ok(summary) => {
            print!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {stage} failed: {e:#}");
            EXIT_STAGE
        }
    }
}

fn verify(out: &Path, stage: &str) -> i32 {
    let path = manifest_path(out, stage);
    let m = match Manifest::load(&path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_STAGE;
        }
    };
    let bad = m.verify();
    for (p, why) in &bad {
        eprintln!("mismatch {}: {why}", p.display());
    }
    if bad.is_empty() {
        println!("{stage}: {} inputs and {} outputs match", m.inputs.len(), m.outputs.len());
        EXIT_OK
    } else {
        EXIT_STAGE
    }
}

/// Runs one stage with staging, manifest and quarantine. Returns the
/// stage's summary text.
pub fn run_stage(command: &Command, cfg: &RunConfig, config_path: &Path, out: &Path) -> anyhow::Result<String> {
    let stage_name = command.stage_name();
    std::fs::create_dir_all(out)?;
    let started = Instant::now();
    let mut stage = Staging::begin(out, stage_name)?;
    let ctx = Ctx { cfg, out };
    let result = match command {
        Command::Ingest => stages::ingest(&ctx, &mut stage),
        Command::Extract => stages::extract(&ctx, &mut stage),
        Command::Relate => stages::relate(&ctx, &mut stage),
        Command::BuildKg => stages::build_kg(&ctx, &mut stage),
        Command::Stats { graph } => stages::stats(&ctx, &mut stage, graph.as_deref()),
        Command::Merge { .. } => stages::merge(&ctx, &mut stage),
        Command::Train => stages::train(&ctx, &mut stage),
        Command::EvalRandom => stages::eval_random(&ctx, &mut stage),
        Command::EvalGenes => stages::eval_genes(&ctx, &mut stage),
        Command::Predict => stages::predict(&ctx, &mut stage),
    };
    let report: StageReport = match result {
        Ok(r) => r,
        Err(e) => {
            match stage.quarantine() {
                Ok(dir) => log::warn!("partial outputs of {stage_name} moved to {}", dir.display()),
                Err(qe) => log::error!("could not quarantine {stage_name} outputs: {qe}"),
            }
            return Err(e);
        }
    };
    let outputs = stage.commit()?;
    let mut inputs = vec![config_path.to_path_buf()];
    inputs.extend(report.inputs);
    let hash_all = |paths: &[PathBuf]| -> std::io::Result<Vec<FileHash>> {
        let mut seen = BTreeMap::new();
        for p in paths {
            seen.entry(p.clone()).or_insert(());
        }
        seen.keys().map(|p| FileHash::of(p)).collect()
    };
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        stage: stage_name.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs: hash_all(&inputs)?,
        outputs: hash_all(&outputs)?,
        seeds: report.seeds,
        backends: report.backends,
        parameters: report.parameters,
        duration_ms: started.elapsed().as_millis(),
    };
    manifest.write(&manifest_path(out, stage_name))?;
    Ok(report.summary)
}
