//! Typed knowledge graphs: triplet assembly from extraction results,
//! deduplicating merge, statistics and PrimeKG-style CSV serialization.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::{BioType, SdohEntity};
use crate::ids::{ns, NamespacedId};
use crate::relation::{DocRelations, Score, ScoredPair};
use crate::taxonomy::SdohTaxonomy;

pub const SUBORDINATE: &str = "subordinate";

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge ({head}, {relation}, {tail}) references missing node {missing}")]
    Dangling {
        head: NamespacedId,
        relation: String,
        tail: NamespacedId,
        missing: NamespacedId,
    },
    #[error("SDoH entity {surface:?} has invalid classification ({sdoh_type}, {subtype})")]
    InvalidSdoh {
        surface: String,
        sdoh_type: String,
        subtype: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} row {row}: {message}")]
    Schema { path: PathBuf, row: u64, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    GeneProtein,
    Disease,
    Drug,
    Chemical,
    OtherBio(String),
    SdohEntity,
    SdohSubtype,
    SdohType,
}

impl NodeKind {
    pub fn parse(s: &str) -> Self {
        match s.trim() {
            "gene/protein" => NodeKind::GeneProtein,
            "disease" => NodeKind::Disease,
            "drug" => NodeKind::Drug,
            "chemical" => NodeKind::Chemical,
            "sdoh_entity" => NodeKind::SdohEntity,
            "sdoh_subtype" => NodeKind::SdohSubtype,
            "sdoh_type" => NodeKind::SdohType,
            other => NodeKind::OtherBio(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            NodeKind::GeneProtein => "gene/protein",
            NodeKind::Disease => "disease",
            NodeKind::Drug => "drug",
            NodeKind::Chemical => "chemical",
            NodeKind::OtherBio(s) => s,
            NodeKind::SdohEntity => "sdoh_entity",
            NodeKind::SdohSubtype => "sdoh_subtype",
            NodeKind::SdohType => "sdoh_type",
        }
    }

    pub fn is_bio(&self) -> bool {
        !matches!(self, NodeKind::SdohEntity | NodeKind::SdohSubtype | NodeKind::SdohType)
    }

    pub fn from_bio_type(t: BioType) -> Self {
        match t {
            BioType::Gene => NodeKind::GeneProtein,
            BioType::Disease => NodeKind::Disease,
            BioType::Chemical => NodeKind::Chemical,
            other => NodeKind::OtherBio(other.as_str().to_string()),
        }
    }

    /// Best guess for a node known only by its identifier.
    pub fn from_namespace(namespace: &str) -> Self {
        match namespace {
            ns::SDOH => NodeKind::SdohEntity,
            ns::SDOH_SUBTYPE => NodeKind::SdohSubtype,
            ns::SDOH_TYPE => NodeKind::SdohType,
            ns::NCBIGENE => NodeKind::GeneProtein,
            ns::MONDO | ns::OMIM => NodeKind::Disease,
            ns::DRUGBANK => NodeKind::Drug,
            _ => NodeKind::OtherBio("biomedical_entity".into()),
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Node {
    pub id: NamespacedId,
    pub display_name: String,
    pub kind: NodeKind,
}

impl Node {
    pub fn new(id: NamespacedId, display_name: impl Into<String>, kind: NodeKind) -> Self {
        Self {
            id,
            display_name: display_name.into(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Evidence {
    pub doc_id: String,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey {
    pub head: NamespacedId,
    pub relation: String,
    pub tail: NamespacedId,
}

impl EdgeKey {
    pub fn new(head: NamespacedId, relation: impl Into<String>, tail: NamespacedId) -> Self {
        Self {
            head,
            relation: relation.into(),
            tail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triplet {
    pub head: NamespacedId,
    pub relation: String,
    pub tail: NamespacedId,
    pub evidence: Vec<Evidence>,
}

impl Triplet {
    pub fn key(&self) -> EdgeKey {
        EdgeKey::new(self.head.clone(), self.relation.clone(), self.tail.clone())
    }
}

/// Nodes and triplets emitted for one abstract.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletBatch {
    pub nodes: Vec<Node>,
    pub triplets: Vec<Triplet>,
}

/// A deduplicated typed multigraph. Edges are unique by
/// `(head, relation, tail)`; evidence of duplicate edges is unioned. When
/// two records of the same node disagree on name or kind, the smaller one
/// (by `Ord`) wins, which keeps merging order-insensitive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeGraph {
    nodes: BTreeMap<NamespacedId, Node>,
    edges: BTreeMap<EdgeKey, BTreeSet<Evidence>>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph, failing if an edge endpoint has no node.
    pub fn from_parts(
        nodes: impl IntoIterator<Item = Node>,
        triplets: impl IntoIterator<Item = Triplet>,
    ) -> Result<Self, GraphError> {
        let mut g = Self::new();
        for n in nodes {
            g.upsert_node(n);
        }
        for t in triplets {
            g.insert_triplet(t)?;
        }
        Ok(g)
    }

    pub fn upsert_node(&mut self, node: Node) {
        match self.nodes.get_mut(&node.id) {
            Some(existing) if node < *existing => *existing = node,
            Some(_) => {}
            None => {
                self.nodes.insert(node.id.clone(), node);
            }
        }
    }

    pub fn insert_triplet(&mut self, t: Triplet) -> Result<(), GraphError> {
        for end in [&t.head, &t.tail] {
            if !self.nodes.contains_key(end) {
                return Err(GraphError::Dangling {
                    head: t.head.clone(),
                    relation: t.relation.clone(),
                    tail: t.tail.clone(),
                    missing: end.clone(),
                });
            }
        }
        let key = t.key();
        self.edges.entry(key).or_default().extend(t.evidence);
        Ok(())
    }

    pub fn node(&self, id: &NamespacedId) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl ExactSizeIterator<Item = &NamespacedId> {
        self.nodes.keys()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (&EdgeKey, &BTreeSet<Evidence>)> {
        self.edges.iter()
    }

    pub fn edge_keys(&self) -> impl ExactSizeIterator<Item = &EdgeKey> {
        self.edges.keys()
    }

    pub fn contains_edge(&self, key: &EdgeKey) -> bool {
        self.edges.contains_key(key)
    }

    pub fn evidence(&self, key: &EdgeKey) -> Option<&BTreeSet<Evidence>> {
        self.edges.get(key)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn relations(&self) -> BTreeSet<&str> {
        self.edges.keys().map(|k| k.relation.as_str()).collect()
    }

    pub fn triplets(&self) -> impl Iterator<Item = Triplet> + '_ {
        self.edges.iter().map(|(k, ev)| Triplet {
            head: k.head.clone(),
            relation: k.relation.clone(),
            tail: k.tail.clone(),
            evidence: ev.iter().cloned().collect(),
        })
    }

    /// Checks that every edge endpoint is a node.
    pub fn validate(&self) -> Result<(), GraphError> {
        for k in self.edges.keys() {
            for end in [&k.head, &k.tail] {
                if !self.nodes.contains_key(end) {
                    return Err(GraphError::Dangling {
                        head: k.head.clone(),
                        relation: k.relation.clone(),
                        tail: k.tail.clone(),
                        missing: end.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Nodes with no incident edge.
    pub fn isolated_nodes(&self) -> Vec<&NamespacedId> {
        let used: BTreeSet<&NamespacedId> = self.edges.keys().flat_map(|k| [&k.head, &k.tail]).collect();
        self.nodes.keys().filter(|id| !used.contains(id)).collect()
    }

    /// Union of two graphs under canonical ids.
    pub fn union(&self, other: &KnowledgeGraph) -> KnowledgeGraph {
        let mut g = self.clone();
        for n in other.nodes.values() {
            g.upsert_node(n.clone());
        }
        for (k, ev) in &other.edges {
            g.edges.entry(k.clone()).or_default().extend(ev.iter().cloned());
        }
        g
    }

    /// Keeps the given edges and the nodes they touch.
    pub fn edge_subgraph<'a>(&self, keys: impl IntoIterator<Item = &'a EdgeKey>) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for k in keys {
            if let Some(ev) = self.edges.get(k) {
                for end in [&k.head, &k.tail] {
                    g.nodes.insert(end.clone(), self.nodes[end].clone());
                }
                g.edges.insert(k.clone(), ev.clone());
            }
        }
        g
    }

    /// The graph without the given edges; nodes are kept.
    pub fn without_edges(&self, removed: &BTreeSet<EdgeKey>) -> KnowledgeGraph {
        KnowledgeGraph {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .filter(|(k, _)| !removed.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Replaces node ids according to `rename`; edges are rewritten and
    /// re-deduplicated.
    pub fn rename_nodes(&self, rename: &HashMap<NamespacedId, Node>) -> KnowledgeGraph {
        let map = |id: &NamespacedId| rename.get(id).map_or_else(|| id.clone(), |n| n.id.clone());
        let mut g = KnowledgeGraph::new();
        for n in self.nodes.values() {
            g.upsert_node(rename.get(&n.id).cloned().unwrap_or_else(|| n.clone()));
        }
        for (k, ev) in &self.edges {
            let key = EdgeKey::new(map(&k.head), k.relation.clone(), map(&k.tail));
            g.edges.entry(key).or_default().extend(ev.iter().cloned());
        }
        g
    }
}

/// Deduplicates triplets from any number of documents into one graph.
/// Endpoints without a node record are materialized from their namespace.
pub fn dedup_merge(nodes: impl IntoIterator<Item = Node>, triplets: impl IntoIterator<Item = Triplet>) -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    for n in nodes {
        g.upsert_node(n);
    }
    let triplets: Vec<Triplet> = triplets.into_iter().collect();
    for t in &triplets {
        for end in [&t.head, &t.tail] {
            if g.node(end).is_none() {
                g.upsert_node(Node::new(end.clone(), end.local_id(), NodeKind::from_namespace(end.namespace())));
            }
        }
    }
    for t in triplets {
        g.insert_triplet(t).expect("endpoints materialized");
    }
    g
}

pub fn merge_batches(batches: impl IntoIterator<Item = TripletBatch>) -> KnowledgeGraph {
    let (mut nodes, mut triplets) = (Vec::new(), Vec::new());
    for b in batches {
        nodes.extend(b.nodes);
        triplets.extend(b.triplets);
    }
    dedup_merge(nodes, triplets)
}

/// Picks one subtype per SDoH surface across documents: the most frequent
/// classification, ties broken by the smaller (type, subtype).
pub fn consensus_classification<'a>(
    entities: impl IntoIterator<Item = &'a SdohEntity>,
) -> HashMap<String, (String, String)> {
    let mut votes: HashMap<String, BTreeMap<(String, String), usize>> = HashMap::new();
    for e in entities {
        *votes
            .entry(e.surface.clone())
            .or_default()
            .entry((e.sdoh_type.clone(), e.sdoh_subtype.clone()))
            .or_insert(0) += 1;
    }
    votes
        .into_iter()
        .map(|(surface, v)| {
            let best = v
                .into_iter()
                .max_by(|(ka, ca), (kb, cb)| ca.cmp(cb).then_with(|| kb.cmp(ka)))
                .map(|(k, _)| k)
                .expect("at least one vote");
            (surface, best)
        })
        .collect()
}

/// Expands retained pairs into the three triplet kinds: (bio, relation,
/// SDoH entity), (SDoH entity, subordinate, subtype) and (subtype,
/// subordinate, type). `consensus` overrides per-document classifications.
pub fn build_triplets(
    retained: &[ScoredPair],
    taxonomy: &SdohTaxonomy,
    consensus: Option<&HashMap<String, (String, String)>>,
) -> Result<TripletBatch, GraphError> {
    let mut batch = TripletBatch::default();
    let mut seen_nodes = BTreeSet::new();
    let mut seen_sub = BTreeSet::new();
    let mut push_node = |batch: &mut TripletBatch, n: Node| {
        if seen_nodes.insert(n.id.clone()) {
            batch.nodes.push(n);
        }
    };
    for p in retained {
        let Some(label) = &p.relation_label else { continue };
        let (sdoh_type, subtype) = consensus
            .and_then(|c| c.get(&p.sdoh.surface))
            .cloned()
            .unwrap_or_else(|| (p.sdoh.sdoh_type.clone(), p.sdoh.sdoh_subtype.clone()));
        if !taxonomy.is_valid_pair(&sdoh_type, &subtype) {
            return Err(GraphError::InvalidSdoh {
                surface: p.sdoh.surface.clone(),
                sdoh_type,
                subtype,
            });
        }
        let bio_id = p.bio.identifier.clone();
        let sdoh_id = p.sdoh.id();
        let subtype_id = NamespacedId::sdoh_subtype(&subtype);
        let type_id = NamespacedId::sdoh_type(&sdoh_type);

        push_node(
            &mut batch,
            Node::new(bio_id.clone(), &p.bio.surface, NodeKind::from_bio_type(p.bio.entity_type)),
        );
        push_node(&mut batch, Node::new(sdoh_id.clone(), &p.sdoh.surface, NodeKind::SdohEntity));
        push_node(&mut batch, Node::new(subtype_id.clone(), &subtype, NodeKind::SdohSubtype));
        push_node(&mut batch, Node::new(type_id.clone(), &sdoh_type, NodeKind::SdohType));

        batch.triplets.push(Triplet {
            head: bio_id,
            relation: label.clone(),
            tail: sdoh_id.clone(),
            evidence: vec![Evidence {
                doc_id: p.doc_id.clone(),
                score: p.co_occurrence,
            }],
        });
        if seen_sub.insert((sdoh_id.clone(), subtype_id.clone())) {
            batch.triplets.push(Triplet {
                head: sdoh_id,
                relation: SUBORDINATE.into(),
                tail: subtype_id.clone(),
                evidence: vec![],
            });
        }
        if seen_sub.insert((subtype_id.clone(), type_id.clone())) {
            batch.triplets.push(Triplet {
                head: subtype_id,
                relation: SUBORDINATE.into(),
                tail: type_id,
                evidence: vec![],
            });
        }
    }
    Ok(batch)
}

/// Builds the SDoH graph from every document's relation results, using a
/// corpus-wide consensus classification for each SDoH entity.
pub fn assemble_sdoh_graph(docs: &[DocRelations], taxonomy: &SdohTaxonomy) -> Result<KnowledgeGraph, GraphError> {
    let consensus = consensus_classification(docs.iter().flat_map(|d| d.retained.iter().map(|p| &p.sdoh)));
    let batches = docs
        .iter()
        .map(|d| build_triplets(&d.retained, taxonomy, Some(&consensus)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_batches(batches))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub nodes_per_kind: BTreeMap<String, usize>,
    pub edges_per_relation: BTreeMap<String, usize>,
    pub sdoh_entities: usize,
}

pub fn graph_stats(kg: &KnowledgeGraph) -> GraphStats {
    let mut nodes_per_kind = BTreeMap::new();
    for n in kg.nodes() {
        *nodes_per_kind.entry(n.kind.as_str().to_string()).or_insert(0) += 1;
    }
    let mut edges_per_relation = BTreeMap::new();
    for k in kg.edge_keys() {
        *edges_per_relation.entry(k.relation.clone()).or_insert(0) += 1;
    }
    GraphStats {
        node_count: kg.node_count(),
        edge_count: kg.edge_count(),
        sdoh_entities: nodes_per_kind.get("sdoh_entity").copied().unwrap_or(0),
        nodes_per_kind,
        edges_per_relation,
    }
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "node\t{}", self.node_count)?;
        writeln!(f, "edge\t{}", self.edge_count)?;
        writeln!(f, "unique SDoH entities\t{}", self.sdoh_entities)?;
        writeln!(f, "nodes by type:")?;
        for (k, v) in &self.nodes_per_kind {
            writeln!(f, "  {k}\t{v}")?;
        }
        writeln!(f, "edges by relation:")?;
        for (k, v) in &self.edges_per_relation {
            writeln!(f, "  {k}\t{v}")?;
        }
        Ok(())
    }
}

pub const GRAPH_COLUMNS: [&str; 9] = [
    "relation", "x_id", "x_type", "x_name", "x_source", "y_id", "y_type", "y_name", "y_source",
];

/// Path of the evidence sidecar for a graph file: `graph.csv` →
/// `graph.evidence.jsonl`.
pub fn evidence_path(path: &Path) -> PathBuf {
    path.with_extension("evidence.jsonl")
}

#[derive(Debug, Serialize, Deserialize)]
struct EvidenceLine {
    x_id: NamespacedId,
    relation: String,
    y_id: NamespacedId,
    evidence: Vec<Evidence>,
}

/// Writes the edge list CSV and its evidence sidecar. Isolated nodes are
/// not representable in an edge list and are dropped with a warning.
pub fn serialize(kg: &KnowledgeGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let path = path.as_ref();
    let io = |source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    };
    let isolated = kg.isolated_nodes();
    if !isolated.is_empty() {
        log::warn!("{}: {} isolated nodes not written", path.display(), isolated.len());
    }
    let file = File::create(path).map_err(io)?;
    write_graph_csv(kg, BufWriter::new(file)).map_err(|e| io(std::io::Error::other(e)))?;

    let side = evidence_path(path);
    let mut w = BufWriter::new(File::create(&side).map_err(|source| GraphError::Io {
        path: side.clone(),
        source,
    })?);
    for (k, ev) in kg.edges() {
        if ev.is_empty() {
            continue;
        }
        let line = EvidenceLine {
            x_id: k.head.clone(),
            relation: k.relation.clone(),
            y_id: k.tail.clone(),
            evidence: ev.iter().cloned().collect(),
        };
        serde_json::to_writer(&mut w, &line).expect("evidence serializes");
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_graph_csv<W: Write>(kg: &KnowledgeGraph, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRAPH_COLUMNS)?;
    for k in kg.edge_keys() {
        let x = &kg.nodes[&k.head];
        let y = &kg.nodes[&k.tail];
        w.write_record([
            k.relation.as_str(),
            x.id.local_id(),
            x.kind.as_str(),
            &x.display_name,
            x.id.namespace(),
            y.id.local_id(),
            y.kind.as_str(),
            &y.display_name,
            y.id.namespace(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Column positions of a headed CSV, failing on any missing column.
pub(crate) fn column_index(
    headers: &csv::StringRecord,
    required: &[&str],
    path: &Path,
) -> Result<Vec<usize>, GraphError> {
    required
        .iter()
        .map(|c| {
            headers.iter().position(|h| h.trim() == *c).ok_or_else(|| GraphError::Schema {
                path: path.to_path_buf(),
                row: 1,
                message: format!("missing column {c:?}"),
            })
        })
        .collect()
}

/// Namespace for a PrimeKG `x_source`/`y_source` value. PrimeKG writes
/// `NCBI` for Entrez gene ids; everything else is lowercased.
pub fn source_namespace(source: &str) -> String {
    match source.trim() {
        "NCBI" => ns::NCBIGENE.to_string(),
        other => other.to_ascii_lowercase(),
    }
}

/// Reads an edge list with the PrimeKG columns; extra columns such as
/// `display_relation` or `x_index` are ignored.
pub fn read_graph_csv<R: std::io::Read>(input: R, path: &Path) -> Result<KnowledgeGraph, GraphError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(input);
    let schema = |row: u64, message: String| GraphError::Schema {
        path: path.to_path_buf(),
        row,
        message,
    };
    let headers = rdr.headers().map_err(|e| schema(1, e.to_string()))?.clone();
    let idx = column_index(&headers, &GRAPH_COLUMNS, path)?;
    let mut g = KnowledgeGraph::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| schema(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let row = rec.position().map_or(0, |p| p.line());
        let col = |i: usize| rec.get(idx[i]).unwrap_or_default();
        let node = |id: usize, kind: usize, name: usize, source: usize| -> Result<Node, GraphError> {
            let id = NamespacedId::new(source_namespace(col(source)), col(id)).map_err(|e| schema(row, e.to_string()))?;
            Ok(Node::new(id, col(name), NodeKind::parse(col(kind))))
        };
        let relation = col(0);
        if relation.trim().is_empty() {
            return Err(schema(row, "empty relation".into()));
        }
        let x = node(1, 2, 3, 4)?;
        let y = node(5, 6, 7, 8)?;
        let key = EdgeKey::new(x.id.clone(), relation, y.id.clone());
        g.upsert_node(x);
        g.upsert_node(y);
        g.edges.entry(key).or_default();
    }
    Ok(g)
}

pub fn deserialize(path: impl AsRef<Path>) -> Result<KnowledgeGraph, GraphError> {
    let path = path.as_ref();
    let io = |p: &Path, source| GraphError::Io {
        path: p.to_path_buf(),
        source,
    };
    let mut g = read_graph_csv(BufReader::new(File::open(path).map_err(|e| io(path, e))?), path)?;
    let side = evidence_path(path);
    if side.exists() {
        let reader = BufReader::new(File::open(&side).map_err(|e| io(&side, e))?);
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| io(&side, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row = i as u64 + 1;
            let ev: EvidenceLine = serde_json::from_str(&line).map_err(|e| GraphError::Schema {
                path: side.clone(),
                row,
                message: e.to_string(),
            })?;
            let key = EdgeKey::new(ev.x_id, ev.relation, ev.y_id);
            match g.edges.get_mut(&key) {
                Some(set) => set.extend(ev.evidence),
                None => {
                    return Err(GraphError::Schema {
                        path: side.clone(),
                        row,
                        message: format!("evidence for unknown edge ({}, {}, {})", key.head, key.relation, key.tail),
                    })
                }
            }
        }
    }
    g.validate()?;
    Ok(g)
}
