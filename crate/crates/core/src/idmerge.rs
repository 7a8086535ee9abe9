//! Identifier alignment between the mined SDoH graph and PrimeKG, AD-centred
//! subgraph extraction and graph merging.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::backend::{request_hash, BackendError, FixtureStore, HttpConfig, HttpTransport, Method, Recording};
use crate::ids::{normalize_surface, ns, NamespacedId};
use crate::kgraph::{EdgeKey, GraphError, KnowledgeGraph, Node, NodeKind};

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("{path} line {line}: {source_id} maps to both {first} and {second}")]
    Conflict {
        path: PathBuf,
        line: usize,
        source_id: NamespacedId,
        first: NamespacedId,
        second: NamespacedId,
    },
    #[error("center node {0} not in graph")]
    MissingCenter(NamespacedId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    MeshOmimToMondo,
    MeshToDrugbank,
}

impl MapKind {
    fn sources(self) -> &'static [&'static str] {
        match self {
            MapKind::MeshOmimToMondo => &[ns::MESH, ns::OMIM],
            MapKind::MeshToDrugbank => &[ns::MESH],
        }
    }

    fn target(self) -> &'static str {
        match self {
            MapKind::MeshOmimToMondo => ns::MONDO,
            MapKind::MeshToDrugbank => ns::DRUGBANK,
        }
    }

    fn target_kind(self) -> NodeKind {
        match self {
            MapKind::MeshOmimToMondo => NodeKind::Disease,
            MapKind::MeshToDrugbank => NodeKind::Drug,
        }
    }

    /// Bare source ids: numeric ones are OMIM, the rest MeSH.
    fn default_source(self, raw: &str) -> &'static str {
        match self {
            MapKind::MeshOmimToMondo if raw.chars().all(|c| c.is_ascii_digit()) => ns::OMIM,
            _ => ns::MESH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    pub kind: MapKind,
    pub entries: BTreeMap<NamespacedId, NamespacedId>,
}

impl IdMap {
    pub fn get(&self, id: &NamespacedId) -> Option<&NamespacedId> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Loads a two-column `source_id \t target_id` TSV. Ids may be namespaced
/// (`mesh:D000544`) or bare, in which case the namespace follows from
/// `kind`. A header line is detected and skipped.
pub fn load_mapping(path: impl AsRef<Path>, kind: MapKind) -> Result<IdMap, MergeError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| MergeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_mapping(BufReader::new(file), kind, path)
}

pub fn parse_mapping<R: BufRead>(reader: R, kind: MapKind, path: &Path) -> Result<IdMap, MergeError> {
    let mut entries: BTreeMap<NamespacedId, NamespacedId> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| MergeError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let malformed = |message: String| MergeError::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(malformed(format!("expected 2 tab-separated columns, found {}", cols.len())));
        }
        if line_no == 1 && cols.iter().any(|c| c.to_ascii_lowercase().contains("id")) && !cols[0].contains(':') {
            continue;
        }
        let parse = |raw: &str, default_ns: &str| -> Result<NamespacedId, MergeError> {
            if raw.contains(':') {
                raw.parse().map_err(|e: crate::ids::IdError| malformed(e.to_string()))
            } else {
                NamespacedId::new(default_ns, raw).map_err(|e| malformed(e.to_string()))
            }
        };
        let src = parse(cols[0], kind.default_source(cols[0]))?;
        let dst = parse(cols[1], kind.target())?;
        if !kind.sources().contains(&src.namespace()) {
            return Err(malformed(format!("source {src} not valid for {kind:?}")));
        }
        if dst.namespace() != kind.target() {
            return Err(malformed(format!("target {dst} not valid for {kind:?}")));
        }
        match entries.get(&src) {
            Some(prev) if *prev != dst => {
                return Err(MergeError::Conflict {
                    path: path.to_path_buf(),
                    line: line_no,
                    source_id: src.clone(),
                    first: prev.clone(),
                    second: dst,
                })
            }
            Some(_) => {}
            None => {
                entries.insert(src, dst);
            }
        }
    }
    Ok(IdMap { kind, entries })
}

/// Term → UMLS concept lookup.
pub trait UmlsBackend: Send + Sync {
    fn name(&self) -> &str;
    fn lookup_cui(&self, term: &str) -> Result<Option<String>, BackendError>;
}

fn umls_request(term: &str) -> Value {
    serde_json::json!({ "service": "umls", "term": normalize_surface(term) })
}

/// Offline UMLS lookups from a JSONL file of `{"term": ..., "cui": ...}`
/// lines (`cui` may be null). Terms match after surface normalization.
#[derive(Debug, Clone, Default)]
pub struct FixtureUmls {
    cuis: HashMap<String, Option<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UmlsFixtureLine {
    pub term: String,
    pub cui: Option<String>,
}

impl FixtureUmls {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| BackendError::io(path.display().to_string(), e))?;
        let mut cuis = HashMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| BackendError::io(path.display().to_string(), e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: UmlsFixtureLine = serde_json::from_str(&line)
                .map_err(|e| BackendError::Parse(format!("{} line {}: {e}", path.display(), i + 1)))?;
            cuis.insert(normalize_surface(&rec.term), rec.cui);
        }
        Ok(Self { cuis })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            cuis: pairs
                .into_iter()
                .map(|(t, c)| (normalize_surface(t), Some(c.to_string())))
                .collect(),
        }
    }
}

impl UmlsBackend for FixtureUmls {
    fn name(&self) -> &str {
        "fixture"
    }

    /// Terms absent from the fixture are misses, not errors.
    fn lookup_cui(&self, term: &str) -> Result<Option<String>, BackendError> {
        Ok(self.cuis.get(&normalize_surface(term)).cloned().flatten())
    }
}

/// Lookups from a request-hash fixture recorded with [`RecordingUmls`].
pub struct ReplayUmls {
    store: FixtureStore,
}

impl ReplayUmls {
    pub fn new(store: FixtureStore) -> Self {
        Self { store }
    }
}

impl UmlsBackend for ReplayUmls {
    fn name(&self) -> &str {
        "replay"
    }

    fn lookup_cui(&self, term: &str) -> Result<Option<String>, BackendError> {
        let hash = request_hash(&umls_request(term));
        match self.store.get(&hash) {
            Some(v) => Ok(v.as_str().map(str::to_string)),
            None => Err(BackendError::FixtureMiss {
                hash,
                what: format!("umls term {term:?}"),
            }),
        }
    }
}

pub struct RecordingUmls<B> {
    inner: B,
    recording: std::sync::Arc<Recording>,
}

impl<B: UmlsBackend> RecordingUmls<B> {
    pub fn new(inner: B, recording: std::sync::Arc<Recording>) -> Self {
        Self { inner, recording }
    }
}

impl<B: UmlsBackend> UmlsBackend for RecordingUmls<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn lookup_cui(&self, term: &str) -> Result<Option<String>, BackendError> {
        let cui = self.inner.lookup_cui(term)?;
        self.recording.push(
            request_hash(&umls_request(term)),
            cui.clone().map_or(Value::Null, Value::String),
        );
        Ok(cui)
    }
}

/// UMLS Terminology Services exact-match search:
/// `{endpoint}/search/current?string=<term>&searchType=exact&apiKey=<key>`.
pub struct UtsClient {
    transport: HttpTransport,
}

impl UtsClient {
    pub fn new(config: HttpConfig) -> Self {
        Self {
            transport: HttpTransport::new(config),
        }
    }
}

pub fn parse_uts_search(body: &str) -> Result<Option<String>, BackendError> {
    let v: Value = serde_json::from_str(body).map_err(|e| BackendError::Parse(e.to_string()))?;
    let results = v
        .pointer("/result/results")
        .and_then(Value::as_array)
        .ok_or_else(|| BackendError::Parse("missing result.results".into()))?;
    Ok(results
        .first()
        .and_then(|r| r.get("ui"))
        .and_then(Value::as_str)
        .filter(|ui| *ui != "NONE")
        .map(str::to_string))
}

impl UmlsBackend for UtsClient {
    fn name(&self) -> &str {
        "uts"
    }

    fn lookup_cui(&self, term: &str) -> Result<Option<String>, BackendError> {
        let config = self.transport.config();
        let mut query = form_urlencoded::Serializer::new(String::new());
        query.append_pair("string", term).append_pair("searchType", "exact");
        if let Some(key) = config.api_key()? {
            query.append_pair("apiKey", &key);
        }
        let url = format!("{}/search/current?{}", config.endpoint.trim_end_matches('/'), query.finish());
        let key = request_hash(&umls_request(term));
        let body = self.transport.send(&url, Method::Get, &[], &key)?;
        parse_uts_search(&body)
    }
}

/// CUI cross-references recorded for target-graph nodes, read from a TSV of
/// `node_id \t cui`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CuiIndex {
    by_cui: BTreeMap<String, NamespacedId>,
}

impl CuiIndex {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MergeError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| MergeError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut by_cui = BTreeMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| MergeError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let malformed = |message: String| MergeError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((id, cui)) = line.split_once('\t') else {
                return Err(malformed("expected node_id<TAB>cui".into()));
            };
            if i == 0 && !id.contains(':') {
                continue;
            }
            let id: NamespacedId = id.trim().parse().map_err(|e: crate::ids::IdError| malformed(e.to_string()))?;
            by_cui.insert(cui.trim().to_string(), id);
        }
        Ok(Self { by_cui })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, NamespacedId)>) -> Self {
        Self {
            by_cui: pairs.into_iter().collect(),
        }
    }

    pub fn get(&self, cui: &str) -> Option<&NamespacedId> {
        self.by_cui.get(cui)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Direct,
    Umls,
    Original,
}

/// Everything the mapping cascade consults.
pub struct Aligner<'a> {
    pub maps: &'a [IdMap],
    pub umls: &'a dyn UmlsBackend,
    pub cui_index: &'a CuiIndex,
    pub target: &'a KnowledgeGraph,
}

impl Aligner<'_> {
    /// Maps one biomedical node: direct mapping file hit, then a UMLS CUI
    /// that the target graph knows (as a `umls:` node or through the CUI
    /// index), then the original id. Genes keep their id.
    pub fn map_identifier(&self, node: &Node) -> (NamespacedId, Provenance) {
        if node.kind == NodeKind::GeneProtein || !node.kind.is_bio() {
            return (node.id.clone(), Provenance::Original);
        }
        let mut maps: Vec<&IdMap> = self.maps.iter().collect();
        // chemicals try DrugBank before MONDO, everything else the reverse
        maps.sort_by_key(|m| match (&node.kind, m.kind) {
            (NodeKind::Chemical | NodeKind::Drug, MapKind::MeshToDrugbank) => 0,
            (NodeKind::Chemical | NodeKind::Drug, _) => 1,
            (_, MapKind::MeshOmimToMondo) => 0,
            _ => 1,
        });
        if let Some(hit) = maps.iter().find_map(|m| m.get(&node.id)) {
            return (hit.clone(), Provenance::Direct);
        }
        match self.umls.lookup_cui(&node.display_name) {
            Ok(Some(cui)) => {
                let as_node = NamespacedId::new(ns::UMLS, &cui).expect("non-empty cui");
                if self.target.node(&as_node).is_some() {
                    return (as_node, Provenance::Umls);
                }
                if let Some(id) = self.cui_index.get(&cui).filter(|id| self.target.node(id).is_some()) {
                    return (id.clone(), Provenance::Umls);
                }
            }
            Ok(None) => {}
            Err(e) => log::warn!("UMLS lookup for {:?} failed, keeping {}: {e}", node.display_name, node.id),
        }
        (node.id.clone(), Provenance::Original)
    }

    /// Rewrites every biomedical node of `g`. Mapped nodes take the target
    /// graph's record when it has one.
    pub fn map_graph(&self, g: &KnowledgeGraph) -> (KnowledgeGraph, MappingCounts) {
        let mut counts = MappingCounts::default();
        let mut rename = HashMap::new();
        for node in g.nodes().filter(|n| n.kind.is_bio()) {
            let (id, prov) = self.map_identifier(node);
            match prov {
                Provenance::Direct => counts.matched_direct += 1,
                Provenance::Umls => counts.matched_umls += 1,
                Provenance::Original => counts.kept_original += 1,
            }
            if prov == Provenance::Original {
                continue;
            }
            let renamed = self.target.node(&id).cloned().unwrap_or_else(|| {
                let kind = match id.namespace() {
                    ns::MONDO => MapKind::MeshOmimToMondo.target_kind(),
                    ns::DRUGBANK => MapKind::MeshToDrugbank.target_kind(),
                    _ => node.kind.clone(),
                };
                Node::new(id.clone(), node.display_name.clone(), kind)
            });
            rename.insert(node.id.clone(), renamed);
        }
        let mapped = g.rename_nodes(&rename);
        counts.collapsed = g.node_count() - mapped.node_count();
        if counts.collapsed > 0 {
            log::warn!("{} nodes collapsed onto shared target ids", counts.collapsed);
        }
        (mapped, counts)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingCounts {
    pub matched_direct: usize,
    pub matched_umls: usize,
    pub kept_original: usize,
    /// Distinct source nodes that mapped onto the same target id.
    pub collapsed: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeReport {
    pub matched_direct: usize,
    pub matched_umls: usize,
    pub kept_original: usize,
    pub collapsed: usize,
    pub nodes_a: usize,
    pub edges_a: usize,
    pub nodes_b: usize,
    pub edges_b: usize,
    pub nodes_merged: usize,
    pub edges_merged: usize,
    pub shared_nodes: usize,
    pub shared_edges: usize,
}

/// Undirected BFS ball of radius `hops`, then the induced edges with at
/// least one endpoint whose kind is in `type_filter`.
pub fn extract_ad_subgraph(
    g: &KnowledgeGraph,
    center: &NamespacedId,
    hops: usize,
    type_filter: &[NodeKind],
) -> Result<KnowledgeGraph, MergeError> {
    if g.node(center).is_none() {
        return Err(MergeError::MissingCenter(center.clone()));
    }
    let mut adj: HashMap<&NamespacedId, Vec<&NamespacedId>> = HashMap::new();
    for k in g.edge_keys() {
        adj.entry(&k.head).or_default().push(&k.tail);
        adj.entry(&k.tail).or_default().push(&k.head);
    }
    let mut dist: HashMap<&NamespacedId, usize> = HashMap::from([(center, 0)]);
    let mut queue = VecDeque::from([center]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v];
        if d == hops {
            continue;
        }
        for &u in adj.get(v).into_iter().flatten() {
            if !dist.contains_key(u) {
                dist.insert(u, d + 1);
                queue.push_back(u);
            }
        }
    }
    let typed = |id: &NamespacedId| type_filter.contains(&g.node(id).expect("validated graph").kind);
    let keep: Vec<&EdgeKey> = g
        .edge_keys()
        .filter(|k| dist.contains_key(&k.head) && dist.contains_key(&k.tail))
        .filter(|k| typed(&k.head) || typed(&k.tail))
        .collect();
    Ok(g.edge_subgraph(keep))
}

pub fn default_type_filter() -> Vec<NodeKind> {
    vec![NodeKind::GeneProtein, NodeKind::Disease, NodeKind::Drug]
}

/// Union of the (already mapped) SDoH graph and the PrimeKG subgraph.
pub fn merge_graphs(a: &KnowledgeGraph, b: &KnowledgeGraph) -> (KnowledgeGraph, MergeReport) {
    let merged = a.union(b);
    let a_nodes: BTreeSet<_> = a.node_ids().collect();
    let a_edges: BTreeSet<_> = a.edge_keys().collect();
    let report = MergeReport {
        nodes_a: a.node_count(),
        edges_a: a.edge_count(),
        nodes_b: b.node_count(),
        edges_b: b.edge_count(),
        nodes_merged: merged.node_count(),
        edges_merged: merged.edge_count(),
        shared_nodes: b.node_ids().filter(|id| a_nodes.contains(id)).count(),
        shared_edges: b.edge_keys().filter(|k| a_edges.contains(k)).count(),
        ..MergeReport::default()
    };
    (merged, report)
}

/// Maps `sdoh` onto the target namespaces and merges it with `sub`.
pub fn align_and_merge(sdoh: &KnowledgeGraph, sub: &KnowledgeGraph, aligner: &Aligner<'_>) -> (KnowledgeGraph, MergeReport) {
    let (mapped, counts) = aligner.map_graph(sdoh);
    let (merged, mut report) = merge_graphs(&mapped, sub);
    report.matched_direct = counts.matched_direct;
    report.matched_umls = counts.matched_umls;
    report.kept_original = counts.kept_original;
    report.collapsed = counts.collapsed;
    (merged, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgraph::{dedup_merge, Triplet};
    use proptest::prelude::*;

    fn id(s: &str) -> NamespacedId {
        s.parse().unwrap()
    }

    fn tsv(s: &str, kind: MapKind) -> Result<IdMap, MergeError> {
        parse_mapping(s.as_bytes(), kind, Path::new("m.tsv"))
    }

    fn t(h: &str, r: &str, tl: &str) -> Triplet {
        Triplet {
            head: id(h),
            relation: r.into(),
            tail: id(tl),
            evidence: vec![],
        }
    }

    fn graph(nodes: &[(&str, NodeKind)], edges: &[(&str, &str, &str)]) -> KnowledgeGraph {
        KnowledgeGraph::from_parts(
            nodes.iter().map(|(i, k)| Node::new(id(i), *i, k.clone())),
            edges.iter().map(|(h, r, tl)| t(h, r, tl)),
        )
        .unwrap()
    }

    #[test]
    fn mapping_loads_dedups_and_rejects_conflicts() {
        let m = tsv("source_id\ttarget_id\nD1\tmondo:1\nmesh:D2\t2\n104300\t3\n", MapKind::MeshOmimToMondo).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.get(&id("omim:104300")), Some(&id("mondo:3")));
        let m = tsv("D1\tmondo:1\nD2\tmondo:2\nD3\tmondo:3\nD1\tmondo:1\n", MapKind::MeshOmimToMondo).unwrap();
        assert_eq!(m.len(), 3);
        match tsv("mesh:D1\tmondo:1\nmesh:D1\tmondo:2\n", MapKind::MeshOmimToMondo).unwrap_err() {
            MergeError::Conflict { source_id, line, .. } => {
                assert_eq!(source_id, id("mesh:D1"));
                assert_eq!(line, 2);
            }
            e => panic!("{e}"),
        }
        assert!(tsv("D1\tmondo:1\n", MapKind::MeshToDrugbank).is_err());
    }

    #[test]
    fn cascade() {
        let maps = [tsv("DX\tmondo:MX\n", MapKind::MeshOmimToMondo).unwrap()];
        let umls = FixtureUmls::from_pairs([("amyloid plaque", "C0002"), ("tau", "C0003")]);
        let target = graph(
            &[("umls:C0002", NodeKind::Disease), ("mondo:MX", NodeKind::Disease), ("drugbank:DB1", NodeKind::Drug)],
            &[("umls:C0002", "r", "mondo:MX"), ("mondo:MX", "r", "drugbank:DB1")],
        );
        let cui_index = CuiIndex::from_pairs([("C0003".to_string(), id("drugbank:DB1"))]);
        let a = Aligner {
            maps: &maps,
            umls: &umls,
            cui_index: &cui_index,
            target: &target,
        };
        let n = |i: &str, name: &str| Node::new(id(i), name, NodeKind::Disease);
        assert_eq!(a.map_identifier(&n("mesh:DX", "x")), (id("mondo:MX"), Provenance::Direct));
        assert_eq!(
            a.map_identifier(&n("mesh:DY", "Amyloid  Plaque")),
            (id("umls:C0002"), Provenance::Umls)
        );
        assert_eq!(a.map_identifier(&n("mesh:DW", "tau")), (id("drugbank:DB1"), Provenance::Umls));
        assert_eq!(a.map_identifier(&n("mesh:DZ", "zzz")), (id("mesh:DZ"), Provenance::Original));
        let gene = Node::new(id("ncbigene:348"), "APOE", NodeKind::GeneProtein);
        assert_eq!(a.map_identifier(&gene).1, Provenance::Original);
    }

    struct Failing;
    impl UmlsBackend for Failing {
        fn name(&self) -> &str {
            "failing"
        }
        fn lookup_cui(&self, _: &str) -> Result<Option<String>, BackendError> {
            Err(BackendError::Parse("down".into()))
        }
    }

    #[test]
    fn umls_failure_is_a_miss() {
        let target = KnowledgeGraph::new();
        let a = Aligner {
            maps: &[],
            umls: &Failing,
            cui_index: &CuiIndex::default(),
            target: &target,
        };
        let n = Node::new(id("mesh:D1"), "x", NodeKind::Disease);
        assert_eq!(a.map_identifier(&n), (id("mesh:D1"), Provenance::Original));
    }

    #[test]
    fn uts_parsing() {
        assert_eq!(
            parse_uts_search(r#"{"result":{"results":[{"ui":"C0002395","name":"AD"}]}}"#).unwrap(),
            Some("C0002395".into())
        );
        assert_eq!(parse_uts_search(r#"{"result":{"results":[{"ui":"NONE"}]}}"#).unwrap(), None);
        assert!(parse_uts_search("{}").is_err());
    }

    #[test]
    fn subgraph_examples() {
        let g = graph(
            &[("x:c", NodeKind::Disease), ("x:1", NodeKind::Drug), ("x:2", NodeKind::Drug), ("x:3", NodeKind::Drug)],
            &[("x:c", "r", "x:1"), ("x:2", "r", "x:c"), ("x:c", "r", "x:3")],
        );
        assert_eq!(extract_ad_subgraph(&g, &id("x:c"), 2, &default_type_filter()).unwrap(), g);

        let gene = NodeKind::GeneProtein;
        let path = graph(
            &[("p:a", gene.clone()), ("p:b", gene.clone()), ("p:c", gene.clone()), ("p:d", gene)],
            &[("p:a", "r", "p:b"), ("p:b", "r", "p:c"), ("p:c", "r", "p:d")],
        );
        let sub = extract_ad_subgraph(&path, &id("p:a"), 2, &default_type_filter()).unwrap();
        let ids: Vec<String> = sub.node_ids().map(|i| i.to_string()).collect();
        assert_eq!(ids, ["p:a", "p:b", "p:c"]);
        assert_eq!(sub.edge_count(), 2);

        let effect = NodeKind::OtherBio("effect/phenotype".into());
        let g = graph(
            &[("x:c", NodeKind::Disease), ("x:e1", effect.clone()), ("x:e2", effect)],
            &[("x:c", "r", "x:e1"), ("x:e1", "r", "x:e2")],
        );
        let sub = extract_ad_subgraph(&g, &id("x:c"), 2, &default_type_filter()).unwrap();
        assert_eq!(sub.edge_count(), 1);
        assert!(matches!(
            extract_ad_subgraph(&g, &id("x:zz"), 2, &default_type_filter()),
            Err(MergeError::MissingCenter(_))
        ));
    }

    #[test]
    fn merge_examples() {
        let a = graph(&[("a:1", NodeKind::Drug), ("mondo:MX", NodeKind::Disease)], &[("a:1", "r", "mondo:MX")]);
        let b = graph(&[("b:1", NodeKind::Drug), ("mondo:MX", NodeKind::Disease)], &[("mondo:MX", "s", "b:1")]);
        let c = graph(&[("c:1", NodeKind::Drug), ("c:2", NodeKind::Drug)], &[("c:1", "r", "c:2")]);
        let (m, r) = merge_graphs(&a, &c);
        assert_eq!((r.nodes_merged, r.edges_merged), (4, 2));
        let (m2, r) = merge_graphs(&a, &b);
        assert_eq!((r.nodes_merged, r.edges_merged, r.shared_nodes), (3, 2, 1));
        assert!(m2.node(&id("mondo:MX")).is_some());
        assert_eq!(merge_graphs(&m, &m).0, m);
    }

    #[test]
    fn map_graph_counts_sum_and_adopts_target_records() {
        let sdoh = graph(
            &[
                ("mesh:D1", NodeKind::Disease),
                ("mesh:D2", NodeKind::Chemical),
                ("ncbigene:1", NodeKind::GeneProtein),
                ("sdoh:poverty", NodeKind::SdohEntity),
            ],
            &[("mesh:D1", "r", "sdoh:poverty"), ("mesh:D2", "r", "sdoh:poverty"), ("ncbigene:1", "r", "sdoh:poverty")],
        );
        let target = graph(
            &[("mondo:9", NodeKind::Disease), ("drugbank:DB9", NodeKind::Drug)],
            &[("drugbank:DB9", "indication", "mondo:9")],
        );
        let maps = [
            tsv("D1\tmondo:9\n", MapKind::MeshOmimToMondo).unwrap(),
            tsv("D2\tdrugbank:DB9\n", MapKind::MeshToDrugbank).unwrap(),
        ];
        let a = Aligner {
            maps: &maps,
            umls: &FixtureUmls::default(),
            cui_index: &CuiIndex::default(),
            target: &target,
        };
        let (merged, report) = align_and_merge(&sdoh, &target, &a);
        assert_eq!(report.matched_direct + report.matched_umls + report.kept_original, 3);
        assert_eq!(report.matched_direct, 2);
        assert_eq!(report.nodes_a, sdoh.node_count());
        assert_eq!(merged.node(&id("mondo:9")).unwrap().display_name, "mondo:9");
        assert_eq!((report.nodes_merged, report.edges_merged), (4, 4));
    }

    fn brute_ball(g: &KnowledgeGraph, c: &NamespacedId, hops: usize) -> BTreeSet<NamespacedId> {
        let mut ball = BTreeSet::from([c.clone()]);
        for _ in 0..hops {
            let mut next = ball.clone();
            for k in g.edge_keys() {
                if ball.contains(&k.head) {
                    next.insert(k.tail.clone());
                }
                if ball.contains(&k.tail) {
                    next.insert(k.head.clone());
                }
            }
            ball = next;
        }
        ball
    }

    prop_compose! {
        fn arb_graph()(n in 2usize..20, kinds in prop::collection::vec(0u8..4, 20),
                       edges in prop::collection::vec((0usize..20, 0usize..20, 0u8..2), 0..40)) -> KnowledgeGraph {
            let kind = |i: usize| match kinds[i] {
                0 => NodeKind::GeneProtein,
                1 => NodeKind::Disease,
                2 => NodeKind::OtherBio("anatomy".into()),
                _ => NodeKind::OtherBio("effect/phenotype".into()),
            };
            let nodes = (0..n).map(|i| Node::new(id(&format!("n:{i}")), format!("{i}"), kind(i)));
            let triplets = edges.into_iter().filter(|(a, b, _)| *a < n && *b < n)
                .map(|(a, b, r)| t(&format!("n:{a}"), &format!("r{r}"), &format!("n:{b}")));
            KnowledgeGraph::from_parts(nodes, triplets).unwrap()
        }
    }

    proptest! {
        #[test]
        fn subgraph_matches_brute_force(g in arb_graph(), hops in 0usize..4) {
            let c = id("n:0");
            let sub = extract_ad_subgraph(&g, &c, hops, &default_type_filter()).unwrap();
            let ball = brute_ball(&g, &c, hops);
            let filter = default_type_filter();
            let expected: BTreeSet<&EdgeKey> = g.edge_keys()
                .filter(|k| ball.contains(&k.head) && ball.contains(&k.tail))
                .filter(|k| filter.contains(&g.node(&k.head).unwrap().kind) || filter.contains(&g.node(&k.tail).unwrap().kind))
                .collect();
            prop_assert_eq!(sub.edge_keys().collect::<BTreeSet<_>>(), expected);
            for n in sub.nodes() {
                prop_assert_eq!(g.node(&n.id), Some(n));
            }
        }

        #[test]
        fn merge_union_arithmetic(a in arb_graph(), b in arb_graph()) {
            let (m, r) = merge_graphs(&a, &b);
            let nodes: BTreeSet<_> = a.node_ids().chain(b.node_ids()).collect();
            let edges: BTreeSet<_> = a.edge_keys().chain(b.edge_keys()).collect();
            prop_assert_eq!(r.nodes_merged, nodes.len());
            prop_assert_eq!(r.edges_merged, edges.len());
            prop_assert_eq!(r.nodes_merged, r.nodes_a + r.nodes_b - r.shared_nodes);
            prop_assert_eq!(r.edges_merged, r.edges_a + r.edges_b - r.shared_edges);
            prop_assert_eq!(merge_graphs(&m, &m).0, m.clone());
            prop_assert_eq!(dedup_merge(m.nodes().cloned().collect::<Vec<_>>(), m.triplets().collect::<Vec<_>>()), m);
        }
    }
}
