//! Link-prediction protocols: random and targeted-gene mask-and-recover with
//! MRR over sampled negatives, paired comparison of two graphs, and
//! exploratory ranking of unseen pairs.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gnn::{self, rgcn_forward, score_edge, sigmoid, stream_rng, EncodedGraph, GnnError, ModelConfig};
use crate::kgraph::{EdgeKey, KnowledgeGraph, NodeKind};
use crate::stats::{self, paired_t_test, StatsError, TTest};
use ndarray::Array2;

pub const DEFAULT_MASK_FRACTION: f64 = 0.2;
pub const DEFAULT_NEGATIVES: usize = 20;
pub const DEFAULT_REPEATS: usize = 5;
pub const DEFAULT_TOP_N: usize = 1000;
pub const SIGNIFICANCE: f64 = 0.05;
const MASK_STREAM: u64 = 3;
const EVAL_STREAM: u64 = 4;

/// Table 3 relation letters and their PrimeKG relation names.
pub const TABLE3_RELATIONS: [(&str, &str); 7] = [
    ("A", "anatomy_protein_present"),
    ("B", "indication"),
    ("C", "disease_phenotype_positive"),
    ("D", "disease_protein"),
    ("E", "drug_effect"),
    ("F", "bioprocess_protein"),
    ("G", "drug_protein"),
];

pub const AD_GENES: [&str; 17] = [
    "APOE", "TREM2", "CD33", "CLU", "BIN1", "CR1", "SORL1", "CD2AP", "EPHA1", "INPP5D", "SHARPIN", "ABI3", "PLCG2",
    "PICALM", "C7", "SPI1", "PTK2B",
];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("relation {relation} has {found} edges, need at least {needed}")]
    TooFewEdges {
        relation: String,
        found: usize,
        needed: usize,
    },
    #[error("mask fraction {fraction} of {total} edges leaves no test edges")]
    EmptyTest { fraction: f64, total: usize },
    #[error("edge ({head}, {relation}, {tail}) has {available} eligible negatives, need {needed}")]
    NegativeShortfall {
        head: String,
        relation: String,
        tail: String,
        available: usize,
        needed: usize,
    },
    #[error("gene {0} not in graph")]
    GeneAbsent(String),
    #[error("no validated edge of gene {0} is in the graph")]
    NoValidatedEdges(String),
    #[error("{path} line {line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] GnnError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSplit {
    pub relation: String,
    pub train_edges: Vec<EdgeKey>,
    pub test_edges: Vec<EdgeKey>,
    pub mask_fraction: f64,
    pub seed: u64,
}

/// `round(fraction × total)` with halves rounded up.
pub fn mask_count(fraction: f64, total: usize) -> usize {
    (fraction * total as f64 + 0.5).floor() as usize
}

/// Uniformly masks `round(fraction × n)` edges of one relation.
pub fn mask_edges(g: &KnowledgeGraph, relation: &str, fraction: f64, seed: u64) -> Result<MaskSplit, EvalError> {
    const MIN_EDGES: usize = 5;
    let mut edges: Vec<EdgeKey> = g.edge_keys().filter(|k| k.relation == relation).cloned().collect();
    if edges.len() < MIN_EDGES {
        return Err(EvalError::TooFewEdges {
            relation: relation.into(),
            found: edges.len(),
            needed: MIN_EDGES,
        });
    }
    let k = mask_count(fraction, edges.len());
    if k == 0 || fraction <= 0.0 {
        return Err(EvalError::EmptyTest {
            fraction,
            total: edges.len(),
        });
    }
    edges.shuffle(&mut stream_rng(seed, MASK_STREAM));
    let mut test_edges = edges.split_off(edges.len() - k.min(edges.len()));
    test_edges.sort();
    edges.sort();
    Ok(MaskSplit {
        relation: relation.into(),
        train_edges: edges,
        test_edges,
        mask_fraction: fraction,
        seed,
    })
}

/// The graph a split trains on: everything except the test edges and
/// their reverse twins, which PrimeKG lists for symmetric relations.
pub fn training_graph(full: &KnowledgeGraph, split: &MaskSplit) -> KnowledgeGraph {
    let mut removed: BTreeSet<EdgeKey> = split.test_edges.iter().cloned().collect();
    for k in &split.test_edges {
        removed.insert(EdgeKey::new(k.tail.clone(), k.relation.clone(), k.head.clone()));
    }
    full.without_edges(&removed)
}

/// Tails already linked from each `(head, relation)` in the full graph.
pub struct LinkIndex<'g> {
    linked: HashMap<(usize, &'g str), HashSet<usize>>,
}

impl<'g> LinkIndex<'g> {
    pub fn new(full: &'g KnowledgeGraph, enc: &EncodedGraph) -> Self {
        let mut linked: HashMap<(usize, &str), HashSet<usize>> = HashMap::new();
        for k in full.edge_keys() {
            linked
                .entry((enc.index[&k.head], k.relation.as_str()))
                .or_default()
                .insert(enc.index[&k.tail]);
        }
        Self { linked }
    }

    /// Tail candidates for corrupting `(u, r, v)`: nodes of `v`'s kind other
    /// than `v` and not already linked from `u` under `r`.
    pub fn negative_candidates(&self, enc: &EncodedGraph, edge: &EdgeKey) -> Vec<usize> {
        let empty = HashSet::new();
        let linked = self
            .linked
            .get(&(enc.index[&edge.head], edge.relation.as_str()))
            .unwrap_or(&empty);
        let v = enc.index[&edge.tail];
        let kind = &enc.node_kinds[v];
        (0..enc.node_count())
            .filter(|&i| i != v && &enc.node_kinds[i] == kind && !linked.contains(&i))
            .collect()
    }

    pub fn sample_negatives(
        &self,
        enc: &EncodedGraph,
        edge: &EdgeKey,
        k: usize,
        rng: &mut impl rand::Rng,
    ) -> Result<Vec<usize>, EvalError> {
        let pool = self.negative_candidates(enc, edge);
        if pool.len() < k {
            return Err(EvalError::NegativeShortfall {
                head: edge.head.to_string(),
                relation: edge.relation.clone(),
                tail: edge.tail.to_string(),
                available: pool.len(),
                needed: k,
            });
        }
        Ok(index::sample(rng, pool.len(), k).into_iter().map(|i| pool[i]).collect())
    }
}

/// One-off form of [`LinkIndex::sample_negatives`].
pub fn sample_negatives(
    full: &KnowledgeGraph,
    enc: &EncodedGraph,
    edge: &EdgeKey,
    k: usize,
    rng: &mut impl rand::Rng,
) -> Result<Vec<usize>, EvalError> {
    LinkIndex::new(full, enc).sample_negatives(enc, edge, k, rng)
}

/// Reciprocal of the true candidate's rank; tied candidates share the
/// mean of the ranks they span.
pub fn reciprocal_rank(true_score: f64, negative_scores: &[f64]) -> f64 {
    let greater = negative_scores.iter().filter(|&&s| s > true_score).count() as f64;
    let ties = negative_scores.iter().filter(|&&s| s == true_score).count() as f64;
    1.0 / (1.0 + greater + ties / 2.0)
}

pub fn mean_reciprocal_rank(ranks: &[f64]) -> f64 {
    if ranks.is_empty() {
        0.0
    } else {
        stats::mean(ranks)
    }
}

/// Trains on the split's training graph and scores every test edge against
/// `k` sampled negatives.
pub fn evaluate_split(
    full: &KnowledgeGraph,
    split: &MaskSplit,
    config: &ModelConfig,
    k: usize,
) -> Result<f64, EvalError> {
    let train = training_graph(full, split);
    let enc = EncodedGraph::new(&train);
    let model = gnn::train(&enc, config)?.model;
    let z = rgcn_forward(&enc, &model)?;
    let links = LinkIndex::new(full, &enc);
    let mut rng = stream_rng(config.seed, EVAL_STREAM);
    let mut rr = Vec::with_capacity(split.test_edges.len());
    for edge in &split.test_edges {
        let negatives = links.sample_negatives(&enc, edge, k, &mut rng)?;
        let (u, v) = (enc.index[&edge.head], enc.index[&edge.tail]);
        let neg: Vec<f64> = negatives.iter().map(|&n| score_edge(z.row(u), z.row(n))).collect();
        rr.push(reciprocal_rank(score_edge(z.row(u), z.row(v)), &neg));
    }
    Ok(mean_reciprocal_rank(&rr))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub name: String,
    pub mrr_runs: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub seeds: Vec<u64>,
}

impl EvalResult {
    pub fn new(name: impl Into<String>, mrr_runs: Vec<f64>, seeds: Vec<u64>) -> Self {
        Self {
            name: name.into(),
            mean: stats::mean(&mrr_runs),
            std: stats::sample_std(&mrr_runs),
            mrr_runs,
            seeds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub a: EvalResult,
    pub b: EvalResult,
    pub test: TTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub model: ModelConfig,
    pub mask_fraction: f64,
    pub negatives: usize,
    pub seeds: Vec<u64>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            mask_fraction: DEFAULT_MASK_FRACTION,
            negatives: DEFAULT_NEGATIVES,
            seeds: (0..DEFAULT_REPEATS as u64).collect(),
        }
    }
}

/// Runs every seed on both graphs. Run `i` uses `seeds[i]` for the mask,
/// the model and the negatives on both sides, so the runs pair up.
pub fn compare_graphs<F>(
    name: &str,
    graph_a: &KnowledgeGraph,
    graph_b: &KnowledgeGraph,
    settings: &EvalSettings,
    make_split: F,
) -> Result<Comparison, EvalError>
where
    F: Fn(&KnowledgeGraph, u64) -> Result<MaskSplit, EvalError> + Sync,
{
    let runs: Vec<(f64, f64)> = settings
        .seeds
        .par_iter()
        .map(|&seed| {
            let config = ModelConfig {
                seed,
                ..settings.model.clone()
            };
            let a = evaluate_split(graph_a, &make_split(graph_a, seed)?, &config, settings.negatives)?;
            let b = evaluate_split(graph_b, &make_split(graph_b, seed)?, &config, settings.negatives)?;
            Ok((a, b))
        })
        .collect::<Result<_, EvalError>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = runs.into_iter().unzip();
    let test = paired_t_test(&ys, &xs)?;
    Ok(Comparison {
        name: name.into(),
        a: EvalResult::new(name, xs, settings.seeds.clone()),
        b: EvalResult::new(name, ys, settings.seeds.clone()),
        test,
    })
}

pub fn run_relation_eval(
    graph_a: &KnowledgeGraph,
    graph_b: &KnowledgeGraph,
    relation: &str,
    settings: &EvalSettings,
) -> Result<Comparison, EvalError> {
    compare_graphs(relation, graph_a, graph_b, settings, |g, seed| {
        mask_edges(g, relation, settings.mask_fraction, seed)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidatedEdge {
    pub gene_a: String,
    pub gene_b: String,
    pub evidence: String,
}

/// Reads `gene_a \t gene_b \t evidence_tag`; a header starting with
/// `gene_a` is skipped.
pub fn load_validated_edges(path: impl AsRef<Path>) -> Result<Vec<ValidatedEdge>, EvalError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let file = File::open(path).map_err(|source| EvalError::Io {
        path: shown.clone(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| EvalError::Io {
            path: shown.clone(),
            source,
        })?;
        if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("gene_a")) {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() < 2 || cols[0].is_empty() || cols[1].is_empty() {
            return Err(EvalError::Malformed {
                path: shown.clone(),
                line: i + 1,
                message: "expected gene_a<TAB>gene_b<TAB>evidence_tag".into(),
            });
        }
        out.push(ValidatedEdge {
            gene_a: cols[0].into(),
            gene_b: cols[1].into(),
            evidence: cols.get(2).copied().unwrap_or_default().into(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneMaskSpec {
    pub gene: String,
    pub validated: Vec<ValidatedEdge>,
}

fn gene_symbol<'a>(g: &'a KnowledgeGraph, id: &crate::NamespacedId) -> Option<&'a str> {
    g.node(id)
        .filter(|n| n.kind == NodeKind::GeneProtein)
        .map(|n| n.display_name.as_str())
}

/// Masks the gene's edges (either direction, any relation) whose partner is
/// one of its validated partners.
pub fn mask_gene_edges(g: &KnowledgeGraph, spec: &GeneMaskSpec, seed: u64) -> Result<MaskSplit, EvalError> {
    let is_gene = |id: &crate::NamespacedId| gene_symbol(g, id).is_some_and(|s| s.eq_ignore_ascii_case(&spec.gene));
    if !g.node_ids().any(is_gene) {
        return Err(EvalError::GeneAbsent(spec.gene.clone()));
    }
    let partners: BTreeSet<String> = spec
        .validated
        .iter()
        .filter_map(|e| {
            if e.gene_a.eq_ignore_ascii_case(&spec.gene) {
                Some(e.gene_b.to_ascii_uppercase())
            } else if e.gene_b.eq_ignore_ascii_case(&spec.gene) {
                Some(e.gene_a.to_ascii_uppercase())
            } else {
                None
            }
        })
        .collect();
    let partner_of = |a: &crate::NamespacedId, b: &crate::NamespacedId| {
        is_gene(a) && gene_symbol(g, b).is_some_and(|s| partners.contains(&s.to_ascii_uppercase()))
    };
    let incident: Vec<&EdgeKey> = g.edge_keys().filter(|k| is_gene(&k.head) || is_gene(&k.tail)).collect();
    let (test, train): (Vec<&EdgeKey>, Vec<&EdgeKey>) = incident
        .iter()
        .partition(|k| partner_of(&k.head, &k.tail) || partner_of(&k.tail, &k.head));
    let found: BTreeSet<String> = test
        .iter()
        .flat_map(|k| [&k.head, &k.tail])
        .filter_map(|id| gene_symbol(g, id))
        .map(str::to_ascii_uppercase)
        .collect();
    for p in partners.iter().filter(|p| !found.contains(*p)) {
        log::warn!("validated edge {}–{p} is not in the graph", spec.gene);
    }
    if test.is_empty() {
        return Err(EvalError::NoValidatedEdges(spec.gene.clone()));
    }
    Ok(MaskSplit {
        relation: format!("gene:{}", spec.gene),
        mask_fraction: test.len() as f64 / incident.len() as f64,
        train_edges: train.into_iter().cloned().collect(),
        test_edges: test.into_iter().cloned().collect(),
        seed,
    })
}

pub fn run_gene_eval(
    graph_a: &KnowledgeGraph,
    graph_b: &KnowledgeGraph,
    spec: &GeneMaskSpec,
    settings: &EvalSettings,
) -> Result<Comparison, EvalError> {
    compare_graphs(&spec.gene, graph_a, graph_b, settings, |g, seed| mask_gene_edges(g, spec, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    GeneSdoh,
    GeneGene,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub u_id: String,
    pub u_name: String,
    pub v_id: String,
    pub v_name: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Predictions {
    /// The `top_n` most probable pairs.
    pub top: Vec<Prediction>,
    /// Every pair with probability above 0.5 (gene–SDoH only).
    pub above_half: Vec<Prediction>,
}

/// Ranking key: higher probability first, then smaller `(u, v)`. `Ord`
/// puts the worse candidate last.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Ranked {
    p: f64,
    u: usize,
    v: usize,
}

impl Eq for Ranked {}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        other.p.total_cmp(&self.p).then((self.u, self.v).cmp(&(other.u, other.v)))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn push_bounded(heap: &mut BinaryHeap<Ranked>, r: Ranked, cap: usize) {
    if heap.len() < cap {
        heap.push(r);
    } else if heap.peek().is_some_and(|worst| r < *worst) {
        heap.pop();
        heap.push(r);
    }
}

/// Scores every unlinked candidate pair of `kind` with `σ(⟨z_u, z_v⟩)`.
/// Gene–gene pairs are unordered; a pair counts as linked if any relation
/// joins it in either direction.
pub fn exploratory_predict(enc: &EncodedGraph, z: &Array2<f64>, kind: PairKind, top_n: usize) -> Predictions {
    let linked: HashSet<(usize, usize)> = enc
        .edges
        .iter()
        .flat_map(|&(h, _, t)| [(h, t), (t, h)])
        .collect();
    let genes: Vec<usize> = (0..enc.node_count())
        .filter(|&i| enc.node_kinds[i] == NodeKind::GeneProtein)
        .collect();
    let tails: Vec<usize> = match kind {
        PairKind::GeneSdoh => (0..enc.node_count())
            .filter(|&i| enc.node_kinds[i] == NodeKind::SdohEntity)
            .collect(),
        PairKind::GeneGene => genes.clone(),
    };
    let candidates = |u: usize| {
        let linked = &linked;
        tails
            .iter()
            .copied()
            .filter(move |&v| v != u && !(kind == PairKind::GeneGene && v < u) && !linked.contains(&(u, v)))
            .map(move |v| Ranked {
                p: sigmoid(score_edge(z.row(u), z.row(v))),
                u,
                v,
            })
    };
    let heap = genes
        .par_iter()
        .fold(BinaryHeap::new, |mut heap, &u| {
            for r in candidates(u) {
                push_bounded(&mut heap, r, top_n);
            }
            heap
        })
        .reduce(BinaryHeap::new, |mut a, b| {
            for r in b {
                push_bounded(&mut a, r, top_n);
            }
            a
        });
    let mut above: Vec<Ranked> = match kind {
        PairKind::GeneSdoh => genes.iter().flat_map(|&u| candidates(u)).filter(|r| r.p > 0.5).collect(),
        PairKind::GeneGene => Vec::new(),
    };
    above.sort();
    let to_pred = |r: Ranked| Prediction {
        u_id: enc.node_ids[r.u].to_string(),
        u_name: String::new(),
        v_id: enc.node_ids[r.v].to_string(),
        v_name: String::new(),
        probability: r.p,
    };
    Predictions {
        top: heap.into_sorted_vec().into_iter().map(to_pred).collect(),
        above_half: above.into_iter().map(to_pred).collect(),
    }
}

/// Fills display names from the graph.
pub fn name_predictions(preds: &mut Predictions, g: &KnowledgeGraph) {
    let name = |id: &str| {
        id.parse()
            .ok()
            .and_then(|id| g.node(&id).map(|n| n.display_name.clone()))
            .unwrap_or_default()
    };
    for p in preds.top.iter_mut().chain(preds.above_half.iter_mut()) {
        p.u_name = name(&p.u_id);
        p.v_name = name(&p.v_id);
    }
}

pub fn write_predictions_csv<W: Write>(preds: &[Prediction], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u_id", "u_name", "v_id", "v_name", "probability"])?;
    for p in preds {
        w.write_record([&p.u_id, &p.u_name, &p.v_id, &p.v_name, &format!("{:.12}", p.probability)])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per comparison: `name, mrr_mean_a, mrr_std_a, mrr_mean_b,
/// mrr_std_b, t, p, significant`.
pub fn write_results_csv<W: Write>(rows: &[Comparison], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "name", "mrr_mean_a", "mrr_std_a", "mrr_mean_b", "mrr_std_b", "t", "p", "significant",
    ])?;
    for c in rows {
        w.write_record([
            c.name.clone(),
            format!("{:.6}", c.a.mean),
            format!("{:.6}", c.a.std),
            format!("{:.6}", c.b.mean),
            format!("{:.6}", c.b.std),
            c.test.t.map_or_else(String::new, |t| format!("{t:.6}")),
            format!("{:.6}", c.test.p),
            if c.test.significant(SIGNIFICANCE) { "*" } else { "" }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-run MRRs, for auditing the paired test.
pub fn write_runs_csv<W: Write>(rows: &[Comparison], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "seed", "mrr_a", "mrr_b"])?;
    for c in rows {
        for ((seed, a), b) in c.a.seeds.iter().zip(&c.a.mrr_runs).zip(&c.b.mrr_runs) {
            w.write_record([c.name.clone(), seed.to_string(), format!("{a:.6}"), format!("{b:.6}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgraph::{Node, Triplet};
    use crate::NamespacedId;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn id(s: &str) -> NamespacedId {
        s.parse().unwrap()
    }

    fn node(i: &str, name: &str, kind: NodeKind) -> Node {
        Node::new(id(i), name, kind)
    }

    fn edge(h: &str, r: &str, t: &str) -> Triplet {
        Triplet {
            head: id(h),
            relation: r.into(),
            tail: id(t),
            evidence: vec![],
        }
    }

    fn chain(n: usize) -> KnowledgeGraph {
        KnowledgeGraph::from_parts(
            (0..=n).map(|i| node(&format!("x:{i:02}"), "", NodeKind::Drug)),
            (0..n).map(|i| edge(&format!("x:{i:02}"), "r", &format!("x:{:02}", i + 1))),
        )
        .unwrap()
    }

    #[test]
    fn mask_arithmetic() {
        let g = chain(10);
        let s = mask_edges(&g, "r", 0.2, 1).unwrap();
        assert_eq!((s.test_edges.len(), s.train_edges.len()), (2, 8));
        assert_eq!(s, mask_edges(&g, "r", 0.2, 1).unwrap());
        assert!(matches!(mask_edges(&g, "r", 0.0, 1), Err(EvalError::EmptyTest { .. })));
        assert!(matches!(mask_edges(&chain(4), "r", 0.2, 1), Err(EvalError::TooFewEdges { .. })));
        assert_eq!(mask_count(0.25, 10), 3);
        assert_eq!(mask_count(0.2, 12), 2);
    }

    #[test]
    fn reverse_twins_leave_training_graph() {
        let g = KnowledgeGraph::from_parts(
            (0..6).map(|i| node(&format!("x:{i}"), "", NodeKind::Drug)),
            (0..5).flat_map(|i| {
                let (a, b) = (format!("x:{i}"), format!("x:{}", i + 1));
                [edge(&a, "r", &b), edge(&b, "r", &a)]
            }),
        )
        .unwrap();
        let s = mask_edges(&g, "r", 0.2, 0).unwrap();
        let train = training_graph(&g, &s);
        for k in &s.test_edges {
            assert!(!train.contains_edge(&EdgeKey::new(k.tail.clone(), "r", k.head.clone())));
        }
    }

    fn star_with_pool(pool: usize, linked: usize) -> KnowledgeGraph {
        let mut nodes = vec![node("g:u", "", NodeKind::GeneProtein)];
        let mut edges = vec![edge("g:u", "r", "d:v")];
        nodes.push(node("d:v", "", NodeKind::Disease));
        for i in 0..pool {
            nodes.push(node(&format!("d:{i:02}"), "", NodeKind::Disease));
            if i < linked {
                edges.push(edge("g:u", "r", &format!("d:{i:02}")));
            }
        }
        nodes.push(node("g:other", "", NodeKind::GeneProtein));
        KnowledgeGraph::from_parts(nodes, edges).unwrap()
    }

    #[test]
    fn negatives_forced_set_exclusion_and_shortfall() {
        let g = star_with_pool(20, 0);
        let enc = EncodedGraph::new(&g);
        let e = EdgeKey::new(id("g:u"), "r", id("d:v"));
        let mut got = sample_negatives(&g, &enc, &e, 20, &mut stream_rng(1, 0)).unwrap();
        got.sort();
        let want: Vec<usize> = (0..20).map(|i| enc.index[&id(&format!("d:{i:02}"))]).collect();
        assert_eq!(got, want);

        let g = star_with_pool(25, 3);
        let enc = EncodedGraph::new(&g);
        for seed in 0..20 {
            let got = sample_negatives(&g, &enc, &e, 20, &mut stream_rng(seed, 0)).unwrap();
            for banned in ["d:00", "d:01", "d:02", "d:v", "g:other"] {
                assert!(!got.contains(&enc.index[&id(banned)]));
            }
            assert_eq!(got, sample_negatives(&g, &enc, &e, 20, &mut stream_rng(seed, 0)).unwrap());
        }
        match sample_negatives(&star_with_pool(10, 0), &EncodedGraph::new(&star_with_pool(10, 0)), &e, 20, &mut stream_rng(0, 0)) {
            Err(EvalError::NegativeShortfall { available, needed, .. }) => assert_eq!((available, needed), (10, 20)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reciprocal_ranks() {
        assert_eq!(reciprocal_rank(0.9, &[0.1; 20]), 1.0);
        assert_eq!(reciprocal_rank(0.5, &[0.9, 0.1, 0.2]), 0.5);
        // all tied: mid-rank of 1..=21 is 11
        assert_abs_diff_eq!(reciprocal_rank(0.3, &[0.3; 20]), 1.0 / 11.0);
        assert_eq!(mean_reciprocal_rank(&[1.0, 0.5]), 0.75);
    }

    #[test]
    fn random_scores_match_harmonic_expectation() {
        let h21: f64 = (1..=21).map(|k| 1.0 / k as f64).sum();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let rr: Vec<f64> = (0..20_000)
            .map(|_| {
                let neg: Vec<f64> = (0..20).map(|_| rng.random()).collect();
                reciprocal_rank(rng.random(), &neg)
            })
            .collect();
        assert!((mean_reciprocal_rank(&rr) - h21 / 21.0).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn rr_bounds(t in -1.0f64..1.0, neg in prop::collection::vec(prop::sample::select(vec![-1.0, 0.0, 0.5, 1.0]), 20)) {
            let r = reciprocal_rank(t, &neg);
            prop_assert!((1.0 / 21.0..=1.0).contains(&r));
        }
    }

    fn genes_fixture() -> KnowledgeGraph {
        let names = ["APOE", "TREM2", "CLU", "BIN1", "CD33", "ABI3"];
        KnowledgeGraph::from_parts(
            names
                .iter()
                .enumerate()
                .map(|(i, n)| node(&format!("ncbigene:{i}"), n, NodeKind::GeneProtein))
                .chain([node("sdoh:poverty", "poverty", NodeKind::SdohEntity), node("sdoh:stress", "stress", NodeKind::SdohEntity)]),
            [
                edge("ncbigene:0", "protein_protein", "ncbigene:1"),
                edge("ncbigene:1", "protein_protein", "ncbigene:0"),
                edge("ncbigene:0", "protein_protein", "ncbigene:2"),
                edge("ncbigene:3", "protein_protein", "ncbigene:0"),
                edge("ncbigene:4", "protein_protein", "ncbigene:5"),
                edge("ncbigene:0", "associated_with", "sdoh:poverty"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn gene_mask_matches_hand_listed_set() {
        let g = genes_fixture();
        let spec = GeneMaskSpec {
            gene: "APOE".into(),
            validated: vec![
                ValidatedEdge { gene_a: "APOE".into(), gene_b: "TREM2".into(), evidence: "co-ip".into() },
                ValidatedEdge { gene_a: "bin1".into(), gene_b: "apoe".into(), evidence: "y2h".into() },
                ValidatedEdge { gene_a: "APOE".into(), gene_b: "PICALM".into(), evidence: "x".into() },
                ValidatedEdge { gene_a: "CD33".into(), gene_b: "ABI3".into(), evidence: "x".into() },
            ],
        };
        let s = mask_gene_edges(&g, &spec, 0).unwrap();
        let got: Vec<String> = s.test_edges.iter().map(|k| format!("{}>{}", k.head, k.tail)).collect();
        assert_eq!(got, ["ncbigene:0>ncbigene:1", "ncbigene:1>ncbigene:0", "ncbigene:3>ncbigene:0"]);
        assert_eq!(s.train_edges.len(), 2);
        let missing = GeneMaskSpec { gene: "SPI1".into(), validated: vec![] };
        assert!(matches!(mask_gene_edges(&g, &missing, 0), Err(EvalError::GeneAbsent(_))));
        let none = GeneMaskSpec { gene: "CLU".into(), validated: spec.validated.clone() };
        assert!(matches!(mask_gene_edges(&g, &none, 0), Err(EvalError::NoValidatedEdges(_))));
    }

    #[test]
    fn exploratory_matches_exhaustive_oracle() {
        let g = genes_fixture();
        let enc = EncodedGraph::new(&g);
        let model = gnn::RgcnModel::init(&enc, 8, 3).unwrap();
        let z = rgcn_forward(&enc, &model).unwrap();
        for kind in [PairKind::GeneGene, PairKind::GeneSdoh] {
            let got = exploratory_predict(&enc, &z, kind, 1000);
            let mut oracle = Vec::new();
            for u in 0..enc.node_count() {
                for v in 0..enc.node_count() {
                    let (ku, kv) = (&enc.node_kinds[u], &enc.node_kinds[v]);
                    let ok = match kind {
                        PairKind::GeneGene => *ku == NodeKind::GeneProtein && *kv == NodeKind::GeneProtein && u < v,
                        PairKind::GeneSdoh => *ku == NodeKind::GeneProtein && *kv == NodeKind::SdohEntity,
                    };
                    let linked = enc.edges.iter().any(|&(h, _, t)| (h, t) == (u, v) || (h, t) == (v, u));
                    if ok && !linked {
                        let p = 1.0 / (1.0 + (-z.row(u).dot(&z.row(v))).exp());
                        oracle.push((p, enc.node_ids[u].to_string(), enc.node_ids[v].to_string()));
                    }
                }
            }
            oracle.sort_by(|a, b| b.0.total_cmp(&a.0).then((&a.1, &a.2).cmp(&(&b.1, &b.2))));
            let got_keys: Vec<(String, String)> = got.top.iter().map(|p| (p.u_id.clone(), p.v_id.clone())).collect();
            let want: Vec<(String, String)> = oracle.iter().map(|o| (o.1.clone(), o.2.clone())).collect();
            assert_eq!(got_keys, want);
            for (p, o) in got.top.iter().zip(&oracle) {
                assert_abs_diff_eq!(p.probability, o.0, epsilon = 1e-12);
            }
            let truncated = exploratory_predict(&enc, &z, kind, 3);
            assert_eq!(truncated.top, got.top[..3.min(got.top.len())]);
        }
        let gg = exploratory_predict(&enc, &z, PairKind::GeneGene, 1000);
        assert_eq!(gg.top.len(), 15 - 4);
    }

    #[test]
    fn identical_graphs_pair_exactly() {
        let mut edges = Vec::new();
        let mut nodes = Vec::new();
        for i in 0..30 {
            nodes.push(node(&format!("g:{i:02}"), "", NodeKind::GeneProtein));
            nodes.push(node(&format!("d:{i:02}"), "", NodeKind::Disease));
        }
        for i in 0..30 {
            for j in 0..3 {
                edges.push(edge(&format!("g:{i:02}"), "r", &format!("d:{:02}", (i + j * 7) % 30)));
            }
        }
        let g = KnowledgeGraph::from_parts(nodes, edges).unwrap();
        let settings = EvalSettings {
            model: ModelConfig { feature_dim: 8, epochs: 5, ..ModelConfig::default() },
            seeds: vec![1, 2, 3],
            ..EvalSettings::default()
        };
        let c = run_relation_eval(&g, &g, "r", &settings).unwrap();
        assert_eq!(c.a.mrr_runs, c.b.mrr_runs);
        assert_eq!((c.test.t, c.test.p), (None, 1.0));
        for m in &c.a.mrr_runs {
            assert!((1.0 / 21.0..=1.0).contains(m));
        }
        let mut out = Vec::new();
        write_results_csv(&[c], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("name,mrr_mean_a,mrr_std_a,mrr_mean_b,mrr_std_b,t,p,significant\nr,"));
        assert!(text.trim_end().ends_with(",,1.000000,"));
    }
}
