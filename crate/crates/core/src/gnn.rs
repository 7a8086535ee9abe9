//! One-layer relational GCN encoder with a dot-product decoder.
//!
//! `h_v = W_0 x_v + Σ_r mean_{u ∈ N_r(v)} W_r x_u`, then ReLU and L2
//! normalization (`e_1` for an all-zero row). Every relation `r` also gets a
//! reverse relation `rev_r` so heads receive messages from their tails.
//! Input features are frozen, so the per-relation neighbour means are fixed
//! and `H = X W_0ᵀ + Σ_r M_r W_rᵀ`.
//!
//! Random streams: every generator is `ChaCha8Rng::seed_from_u64(seed)` with
//! stream 0 for features, 1 for weights and 2 for training negatives.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::NamespacedId;
use crate::kgraph::{KnowledgeGraph, NodeKind};

pub const REVERSE_PREFIX: &str = "rev_";
const FEATURE_STREAM: u64 = 0;
const WEIGHT_STREAM: u64 = 1;
const NEGATIVE_STREAM: u64 = 2;
const CHECKPOINT_MAGIC: &[u8; 8] = b"SDKGRGCN";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum GnnError {
    #[error("cannot build features for an empty graph")]
    EmptyGraph,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("loss became {loss} at epoch {epoch}")]
    NonFinite { epoch: usize, loss: f64 },
    #[error("graph has no edges to train on")]
    NoEdges,
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Dense integer view of a graph. Node order is the graph's id order, so
/// graphs sharing a node set (a graph and its masked copy) share indices.
#[derive(Debug, Clone)]
pub struct EncodedGraph {
    pub node_ids: Vec<NamespacedId>,
    pub node_kinds: Vec<NodeKind>,
    pub index: HashMap<NamespacedId, usize>,
    /// Relations as they appear in the graph.
    pub relations: Vec<String>,
    /// `(head, relation, tail)` over `relations`.
    pub edges: Vec<(usize, usize, usize)>,
    /// Convolution relations: each relation followed by its reverse.
    pub conv_relations: Vec<String>,
    /// `in_neighbors[c][v]` lists the `u` with a message `u → v` under
    /// convolution relation `c`.
    pub in_neighbors: Vec<Vec<Vec<usize>>>,
}

impl EncodedGraph {
    pub fn new(g: &KnowledgeGraph) -> Self {
        let node_ids: Vec<NamespacedId> = g.node_ids().cloned().collect();
        let node_kinds = g.nodes().map(|n| n.kind.clone()).collect();
        let index: HashMap<NamespacedId, usize> = node_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let relations: Vec<String> = g.relations().into_iter().map(str::to_string).collect();
        let rel_index: HashMap<&str, usize> = relations.iter().enumerate().map(|(i, r)| (r.as_str(), i)).collect();
        let edges: Vec<(usize, usize, usize)> = g
            .edge_keys()
            .map(|k| (index[&k.head], rel_index[k.relation.as_str()], index[&k.tail]))
            .collect();
        let conv_relations = relations
            .iter()
            .flat_map(|r| [r.clone(), format!("{REVERSE_PREFIX}{r}")])
            .collect();
        let n = node_ids.len();
        let mut in_neighbors = vec![vec![Vec::new(); n]; 2 * relations.len()];
        for &(h, r, t) in &edges {
            in_neighbors[2 * r][t].push(h);
            in_neighbors[2 * r + 1][h].push(t);
        }
        Self {
            node_ids,
            node_kinds,
            index,
            relations,
            edges,
            conv_relations,
            in_neighbors,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn relation_index(&self, relation: &str) -> Option<usize> {
        self.relations.iter().position(|r| r == relation)
    }

    /// Per-convolution-relation neighbour means of `x`; rows without
    /// neighbours stay zero.
    pub fn neighbor_means(&self, x: &Array2<f64>) -> Vec<Array2<f64>> {
        self.in_neighbors
            .iter()
            .map(|adj| {
                let mut m = Array2::zeros(x.raw_dim());
                for (v, nbrs) in adj.iter().enumerate() {
                    if nbrs.is_empty() {
                        continue;
                    }
                    let mut row = m.row_mut(v);
                    for &u in nbrs {
                        row += &x.row(u);
                    }
                    row /= nbrs.len() as f64;
                }
                m
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub feature_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub negatives_per_positive: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            feature_dim: 50,
            epochs: 200,
            learning_rate: 0.01,
            negatives_per_positive: 1,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), GnnError> {
        if self.feature_dim == 0 {
            return Err(GnnError::Config("feature_dim must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(GnnError::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(GnnError::Config(format!("learning_rate {} is not a finite non-negative number", self.learning_rate)));
        }
        if self.negatives_per_positive == 0 {
            return Err(GnnError::Config("negatives_per_positive must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RgcnModel {
    pub seed: u64,
    pub relations: Vec<String>,
    /// Frozen input features, one row per node.
    pub x: Array2<f64>,
    pub w0: Array2<f64>,
    /// One matrix per convolution relation.
    pub w: Vec<Array2<f64>>,
}

/// `n × dim` i.i.d. standard normal features.
pub fn init_features(n: usize, dim: usize, seed: u64) -> Result<Array2<f64>, GnnError> {
    if n == 0 {
        return Err(GnnError::EmptyGraph);
    }
    let mut rng = stream_rng(seed, FEATURE_STREAM);
    Ok(Array2::from_shape_simple_fn((n, dim), || StandardNormal.sample(&mut rng)))
}

impl RgcnModel {
    /// Features from the seed; weights `N(0, 1/dim)`.
    pub fn init(g: &EncodedGraph, dim: usize, seed: u64) -> Result<Self, GnnError> {
        let x = init_features(g.node_count(), dim, seed)?;
        let mut rng = stream_rng(seed, WEIGHT_STREAM);
        let normal = Normal::new(0.0, (1.0 / dim as f64).sqrt()).expect("valid std");
        let mut draw = || Array2::from_shape_simple_fn((dim, dim), || normal.sample(&mut rng));
        let w0 = draw();
        let w = g.conv_relations.iter().map(|_| draw()).collect();
        Ok(Self {
            seed,
            relations: g.conv_relations.clone(),
            x,
            w0,
            w,
        })
    }

    pub fn dim(&self) -> usize {
        self.w0.nrows()
    }

    fn check(&self, g: &EncodedGraph) -> Result<(), GnnError> {
        let d = self.dim();
        if self.x.nrows() != g.node_count() {
            return Err(GnnError::Dimension(format!(
                "model has {} feature rows, graph has {} nodes",
                self.x.nrows(),
                g.node_count()
            )));
        }
        if self.w.len() != g.conv_relations.len() {
            return Err(GnnError::Dimension(format!(
                "model has {} relation weights, graph needs {}",
                self.w.len(),
                g.conv_relations.len()
            )));
        }
        if self.x.ncols() != d || self.w0.ncols() != d || self.w.iter().any(|w| w.dim() != (d, d)) {
            return Err(GnnError::Dimension(format!("weights are not all {d}×{d}")));
        }
        Ok(())
    }

    /// All weight matrices, self-loop first.
    pub fn weights(&self) -> impl Iterator<Item = &Array2<f64>> {
        std::iter::once(&self.w0).chain(self.w.iter())
    }

    fn weights_mut(&mut self) -> impl Iterator<Item = &mut Array2<f64>> {
        std::iter::once(&mut self.w0).chain(self.w.iter_mut())
    }
}

/// Forward-pass intermediates kept for the backward pass.
struct Forward {
    h: Array2<f64>,
    z: Array2<f64>,
    norms: Array1<f64>,
}

/// Neighbour means restricted to the nodes that receive messages: for
/// convolution relation `c`, row `k` of `means[c]` belongs to node `rows[c][k]`.
struct Messages {
    rows: Vec<Vec<usize>>,
    means: Vec<Array2<f64>>,
}

impl Messages {
    fn new(g: &EncodedGraph, x: &Array2<f64>) -> Self {
        let mut rows = Vec::with_capacity(g.in_neighbors.len());
        let mut means = Vec::with_capacity(g.in_neighbors.len());
        for adj in &g.in_neighbors {
            let targets: Vec<usize> = (0..adj.len()).filter(|&v| !adj[v].is_empty()).collect();
            let mut m = Array2::zeros((targets.len(), x.ncols()));
            for (k, &v) in targets.iter().enumerate() {
                let mut row = m.row_mut(k);
                for &u in &adj[v] {
                    row += &x.row(u);
                }
                row /= adj[v].len() as f64;
            }
            rows.push(targets);
            means.push(m);
        }
        Self { rows, means }
    }
}

fn pre_activation(model: &RgcnModel, msg: &Messages) -> Array2<f64> {
    let mut h = model.x.dot(&model.w0.t());
    for ((rows, m), w) in msg.rows.iter().zip(&msg.means).zip(&model.w) {
        let part = m.dot(&w.t());
        for (k, &v) in rows.iter().enumerate() {
            let mut row = h.row_mut(v);
            row += &part.row(k);
        }
    }
    h
}

fn activate(h: Array2<f64>) -> Forward {
    let mut z = h.mapv(|v| v.max(0.0));
    let mut norms = Array1::zeros(z.nrows());
    for (i, mut row) in z.axis_iter_mut(Axis(0)).enumerate() {
        let norm = row.dot(&row).sqrt();
        norms[i] = norm;
        if norm > 0.0 {
            row /= norm;
        } else {
            row.fill(0.0);
            row[0] = 1.0;
        }
    }
    Forward { h, z, norms }
}

/// Unit-norm node embeddings, one row per node.
pub fn rgcn_forward(g: &EncodedGraph, model: &RgcnModel) -> Result<Array2<f64>, GnnError> {
    model.check(g)?;
    let msg = Messages::new(g, &model.x);
    Ok(activate(pre_activation(model, &msg)).z)
}

pub fn score_edge(z_u: ArrayView1<f64>, z_v: ArrayView1<f64>) -> f64 {
    z_u.dot(&z_v)
}

pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `-log σ(s)` for label 1, `-log(1-σ(s))` for label 0, computed stably.
fn bce(s: f64, label: f64) -> f64 {
    let softplus = |t: f64| t.max(0.0) + (-t.abs()).exp().ln_1p();
    if label > 0.5 {
        softplus(-s)
    } else {
        softplus(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w0: Array2<f64>,
    pub w: Vec<Array2<f64>>,
}

impl Gradients {
    pub fn iter(&self) -> impl Iterator<Item = &Array2<f64>> {
        std::iter::once(&self.w0).chain(self.w.iter())
    }
}

/// Node-index pairs `(u, v)` scored as `⟨z_u, z_v⟩`.
pub type Pair = (usize, usize);

/// Mean binary cross-entropy over positives (label 1) and negatives
/// (label 0), with analytic gradients for every weight matrix.
pub fn loss_and_grad(
    g: &EncodedGraph,
    model: &RgcnModel,
    positives: &[Pair],
    negatives: &[Pair],
) -> Result<(f64, Gradients), GnnError> {
    model.check(g)?;
    let msg = Messages::new(g, &model.x);
    Ok(loss_and_grad_prepared(model, &msg, positives, negatives))
}

fn loss_and_grad_prepared(model: &RgcnModel, msg: &Messages, positives: &[Pair], negatives: &[Pair]) -> (f64, Gradients) {
    let fwd = activate(pre_activation(model, msg));
    let total = (positives.len() + negatives.len()).max(1) as f64;
    let mut loss = 0.0;
    let mut dz = Array2::<f64>::zeros(fwd.z.raw_dim());
    let labelled = positives.iter().map(|p| (p, 1.0)).chain(negatives.iter().map(|p| (p, 0.0)));
    for (&(u, v), label) in labelled {
        let s = score_edge(fwd.z.row(u), fwd.z.row(v));
        loss += bce(s, label);
        let ds = (sigmoid(s) - label) / total;
        let zv = fwd.z.row(v).to_owned();
        let zu = fwd.z.row(u).to_owned();
        dz.row_mut(u).scaled_add(ds, &zv);
        dz.row_mut(v).scaled_add(ds, &zu);
    }
    loss /= total;

    // through normalization and ReLU
    let mut dh = dz;
    for (i, mut row) in dh.axis_iter_mut(Axis(0)).enumerate() {
        let norm = fwd.norms[i];
        if norm == 0.0 {
            row.fill(0.0);
            continue;
        }
        let z = fwd.z.row(i);
        let proj = z.dot(&row);
        row.scaled_add(-proj, &z);
        row /= norm;
        for (d, &h) in row.iter_mut().zip(fwd.h.row(i)) {
            if h <= 0.0 {
                *d = 0.0;
            }
        }
    }
    let dht = dh.t();
    let grads = Gradients {
        w0: dht.dot(&model.x),
        w: msg
            .rows
            .iter()
            .zip(&msg.means)
            .map(|(rows, m)| dh.select(Axis(0), rows).t().dot(m))
            .collect(),
    };
    (loss, grads)
}

/// Draws `k` corrupted tails per positive from the nodes of the tail's kind,
/// avoiding known edges when possible.
pub fn sample_training_negatives(
    g: &EncodedGraph,
    positives: &[Pair],
    known: &BTreeSet<Pair>,
    pools: &BTreeMap<&NodeKind, Vec<usize>>,
    k: usize,
    rng: &mut impl Rng,
) -> Vec<Pair> {
    let mut out = Vec::with_capacity(positives.len() * k);
    for &(u, v) in positives {
        let pool = &pools[&g.node_kinds[v]];
        let pool: &[usize] = if pool.len() > 1 { pool } else { &[] };
        for _ in 0..k {
            let mut pick = 0;
            for _ in 0..10 {
                pick = if pool.is_empty() {
                    rng.random_range(0..g.node_count())
                } else {
                    pool[rng.random_range(0..pool.len())]
                };
                if pick != v && !known.contains(&(u, pick)) {
                    break;
                }
            }
            out.push((u, pick));
        }
    }
    out
}

pub fn kind_pools(g: &EncodedGraph) -> BTreeMap<&NodeKind, Vec<usize>> {
    let mut pools: BTreeMap<&NodeKind, Vec<usize>> = BTreeMap::new();
    for (i, k) in g.node_kinds.iter().enumerate() {
        pools.entry(k).or_default().push(i);
    }
    pools
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: RgcnModel,
    /// Loss before each epoch's update.
    pub loss_trace: Vec<f64>,
}

/// Full-batch gradient descent over every edge of `g`.
pub fn train(g: &EncodedGraph, config: &ModelConfig) -> Result<TrainOutcome, GnnError> {
    config.validate()?;
    if g.edges.is_empty() {
        return Err(GnnError::NoEdges);
    }
    let mut model = RgcnModel::init(g, config.feature_dim, config.seed)?;
    let msg = Messages::new(g, &model.x);
    let positives: Vec<Pair> = g.edges.iter().map(|&(h, _, t)| (h, t)).collect();
    let known: BTreeSet<Pair> = positives.iter().copied().collect();
    let pools = kind_pools(g);
    let mut rng = stream_rng(config.seed, NEGATIVE_STREAM);
    let mut loss_trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let negatives = sample_training_negatives(g, &positives, &known, &pools, config.negatives_per_positive, &mut rng);
        let (loss, grads) = loss_and_grad_prepared(&model, &msg, &positives, &negatives);
        if !loss.is_finite() {
            return Err(GnnError::NonFinite { epoch, loss });
        }
        loss_trace.push(loss);
        for (w, dw) in model.weights_mut().zip(grads.iter()) {
            w.scaled_add(-config.learning_rate, dw);
        }
        log::debug!("epoch {epoch} loss {loss:.6}");
    }
    Ok(TrainOutcome { model, loss_trace })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDiffReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates skipped because the perturbation crossed a ReLU kink.
    pub skipped: usize,
}

/// Denominator floor for the relative error, so coordinates with
/// vanishing gradient compare by absolute error.
pub const FD_REL_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FD_REL_FLOOR)
}

/// Central-difference check of `loss_and_grad` over `coords` random weight
/// coordinates.
pub fn finite_diff_check(
    g: &EncodedGraph,
    model: &RgcnModel,
    positives: &[Pair],
    negatives: &[Pair],
    eps: f64,
    coords: usize,
    seed: u64,
) -> Result<FiniteDiffReport, GnnError> {
    model.check(g)?;
    let msg = Messages::new(g, &model.x);
    let (_, grads) = loss_and_grad_prepared(model, &msg, positives, negatives);
    let base_mask = pre_activation(model, &msg).mapv(|v| v > 0.0);
    let d = model.dim();
    let mats = 1 + model.w.len();
    let mut rng = stream_rng(seed, 0);
    let mut report = FiniteDiffReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    let mut probe = model.clone();
    let mut attempts = 0;
    while report.checked < coords && attempts < coords * 20 {
        attempts += 1;
        let (m, i, j) = (rng.random_range(0..mats), rng.random_range(0..d), rng.random_range(0..d));
        let orig = model.weights().nth(m).expect("index in range")[[i, j]];
        let mut eval = |delta: f64| {
            probe.weights_mut().nth(m).expect("index in range")[[i, j]] = orig + delta;
            let h = pre_activation(&probe, &msg);
            let crossed = h.iter().zip(base_mask.iter()).any(|(&v, &pos)| (v > 0.0) != pos);
            (loss_and_grad_prepared(&probe, &msg, positives, negatives).0, crossed)
        };
        let (plus, c1) = eval(eps);
        let (minus, c2) = eval(-eps);
        probe.weights_mut().nth(m).expect("index in range")[[i, j]] = orig;
        if c1 || c2 {
            report.skipped += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * eps);
        let analytic = grads.iter().nth(m).expect("index in range")[[i, j]];
        report.max_rel_error = report.max_rel_error.max(relative_error(analytic, numeric));
        report.checked += 1;
    }
    Ok(report)
}

fn put_u64(w: &mut impl Write, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_matrix(w: &mut impl Write, m: &Array2<f64>) -> std::io::Result<()> {
    for v in m.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Binary checkpoint: magic, version, node count, dim, seed, relation
/// vocabulary, then `X`, `W_0` and each `W_r` as row-major little-endian
/// f64.
pub fn write_checkpoint(model: &RgcnModel, out: &mut impl Write) -> std::io::Result<()> {
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    put_u64(out, model.x.nrows() as u64)?;
    put_u64(out, model.dim() as u64)?;
    put_u64(out, model.seed)?;
    put_u64(out, model.relations.len() as u64)?;
    for r in &model.relations {
        put_u64(out, r.len() as u64)?;
        out.write_all(r.as_bytes())?;
    }
    for m in std::iter::once(&model.x).chain(model.weights()) {
        put_matrix(out, m)?;
    }
    Ok(())
}

pub fn read_checkpoint(input: &mut impl Read) -> Result<RgcnModel, String> {
    fn get<const N: usize>(r: &mut impl Read) -> Result<[u8; N], String> {
        let mut b = [0u8; N];
        r.read_exact(&mut b).map_err(|e| format!("truncated: {e}"))?;
        Ok(b)
    }
    let get_u64 = |r: &mut dyn Read| -> Result<u64, String> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b).map_err(|e| format!("truncated: {e}"))?;
        Ok(u64::from_le_bytes(b))
    };
    if &get::<8>(input)? != CHECKPOINT_MAGIC {
        return Err("not a model checkpoint".into());
    }
    let version = u32::from_le_bytes(get::<4>(input)?);
    if version != CHECKPOINT_VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let n = get_u64(input)? as usize;
    let d = get_u64(input)? as usize;
    let seed = get_u64(input)?;
    let r = get_u64(input)? as usize;
    if d == 0 || d > 1 << 16 || r > 1 << 20 {
        return Err(format!("implausible header (dim {d}, relations {r})"));
    }
    let mut relations = Vec::with_capacity(r);
    for _ in 0..r {
        let len = get_u64(input)? as usize;
        let mut buf = vec![0u8; len.min(1 << 20)];
        input.read_exact(&mut buf).map_err(|e| format!("truncated: {e}"))?;
        relations.push(String::from_utf8(buf).map_err(|e| e.to_string())?);
    }
    let mut matrix = |rows: usize| -> Result<Array2<f64>, String> {
        let mut data = Vec::with_capacity(rows * d);
        for _ in 0..rows * d {
            data.push(f64::from_le_bytes(get::<8>(input)?));
        }
        Array2::from_shape_vec((rows, d), data).map_err(|e| e.to_string())
    };
    let x = matrix(n)?;
    let w0 = matrix(d)?;
    let w = (0..r).map(|_| matrix(d)).collect::<Result<Vec<_>, _>>()?;
    let mut rest = Vec::new();
    input.read_to_end(&mut rest).map_err(|e| e.to_string())?;
    if !rest.is_empty() {
        return Err(format!("{} trailing bytes", rest.len()));
    }
    Ok(RgcnModel {
        seed,
        relations,
        x,
        w0,
        w,
    })
}

pub fn save_checkpoint(model: &RgcnModel, path: impl AsRef<Path>) -> Result<(), GnnError> {
    let path = path.as_ref();
    let io = |source| GnnError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    write_checkpoint(model, &mut w).map_err(io)?;
    w.flush().map_err(io)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<RgcnModel, GnnError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| GnnError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_checkpoint(&mut BufReader::new(file)).map_err(|message| GnnError::Checkpoint {
        path: path.display().to_string(),
        message,
    })
}

pub fn write_loss_csv(trace: &[f64], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "loss"])?;
    for (i, l) in trace.iter().enumerate() {
        w.write_record([i.to_string(), format!("{l:.12}")])?;
    }
    w.flush()?;
    Ok(())
}
