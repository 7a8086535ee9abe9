//! End-to-end checks on the bundled mini corpus with the replay backends.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use sdohkg::corpus::{corpus_stats, ingest_corpus};
use sdohkg::extraction::llm::FixtureLlm;
use sdohkg::extraction::ner::FixtureNer;
use sdohkg::extraction::{Extractor, Round};
use sdohkg::idmerge::{self, Aligner, CuiIndex, FixtureUmls, MapKind, Provenance};
use sdohkg::kgraph::{self, assemble_sdoh_graph, graph_stats};
use sdohkg::relation::{relate_document, DEFAULT_THRESHOLD};
use sdohkg::{Corpus, DocExtraction, DocRelations, KnowledgeGraph, NamespacedId, NodeKind, SdohTaxonomy};

fn mini(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini").join(name)
}

fn id(s: &str) -> NamespacedId {
    s.parse().unwrap()
}

fn corpus() -> Corpus {
    ingest_corpus(mini("corpus.jsonl")).unwrap()
}

fn extract(corpus: &Corpus) -> Vec<DocExtraction> {
    let bio = FixtureNer::load("bio", "bio", mini("ner_fixture.jsonl")).unwrap();
    let sdoh = FixtureNer::load("sdoh", "sdoh", mini("ner_fixture.jsonl")).unwrap();
    let llm = FixtureLlm::load(mini("llm_fixture.jsonl")).unwrap();
    Extractor {
        bio_ner: &bio,
        sdoh_ner: &sdoh,
        llm: &llm,
        taxonomy: SdohTaxonomy::healthy_people_2030(),
    }
    .extract_corpus(corpus)
    .unwrap()
}

fn relate(corpus: &Corpus, ext: &[DocExtraction]) -> Vec<DocRelations> {
    let llm = FixtureLlm::load(mini("llm_fixture.jsonl")).unwrap();
    corpus
        .docs
        .iter()
        .zip(ext)
        .map(|(d, e)| relate_document(d, e, &llm, DEFAULT_THRESHOLD).unwrap())
        .collect()
}

fn doc<'a>(ext: &'a [DocExtraction], doc_id: &str) -> &'a DocExtraction {
    ext.iter().find(|e| e.doc_id == doc_id).unwrap()
}

#[derive(serde::Deserialize)]
struct HandCount {
    doc_count: usize,
    sentence_count: usize,
    sentences_per_doc: BTreeMap<String, usize>,
    per_query_term: BTreeMap<String, usize>,
}

#[test]
fn corpus_matches_hand_count() {
    let want: HandCount =
        serde_json::from_str(&std::fs::read_to_string(mini("corpus_manifest.json")).unwrap()).unwrap();
    let c = corpus();
    let stats = corpus_stats(&c);
    assert_eq!(stats.doc_count, want.doc_count);
    assert_eq!(stats.sentence_count, want.sentence_count);
    assert_eq!(stats.per_query_term, want.per_query_term);
    let got: BTreeMap<String, usize> = c.docs.iter().map(|d| (d.doc_id.clone(), d.sentences.len())).collect();
    assert_eq!(got, want.sentences_per_doc);
    for d in &c.docs {
        for s in &d.sentences {
            assert_eq!(&d.abstract_text[s.char_span.0..s.char_span.1], s.text);
        }
    }
}

#[test]
fn fixture_extraction_examples() {
    let c = corpus();
    let ext = extract(&c);

    let pm1 = doc(&ext, "PM0001");
    let apoe = pm1.bio.iter().find(|b| b.surface == "APOE").expect("APOE mention");
    assert_eq!(apoe.identifier, id("ncbigene:348"));
    assert_eq!(apoe.sentence_indices, BTreeSet::from([1, 2]));
    let poverty = pm1.sdoh.iter().find(|s| s.surface == "poverty").expect("poverty entity");
    assert_eq!((poverty.sdoh_type.as_str(), poverty.sdoh_subtype.as_str()), ("Economic Stability", "Poverty"));

    let dropped = |doc_id: &str, surface: &str| {
        doc(&ext, doc_id)
            .discarded
            .iter()
            .find(|d| d.surface.eq_ignore_ascii_case(surface))
            .map(|d| d.round)
    };
    assert_eq!(dropped("PM0003", "chronic stress"), Some(Round::Type));
    assert_eq!(dropped("PM0017", "Marital status"), Some(Round::Subtype));

    // a bio mention wins over the same SDoH candidate
    assert!(ext
        .iter()
        .flat_map(|e| &e.candidates)
        .all(|c| !c.surface.eq_ignore_ascii_case("dementia")));
    assert!(ext.iter().all(|e| e.errors.is_empty()));

    let taxonomy = SdohTaxonomy::healthy_people_2030();
    for e in ext.iter().flat_map(|e| &e.sdoh) {
        assert!(taxonomy.is_valid_pair(&e.sdoh_type, &e.sdoh_subtype), "{e:?}");
    }
}

#[test]
fn extraction_is_deterministic() {
    let c = corpus();
    let a = serde_json::to_string(&extract(&c)).unwrap();
    let b = serde_json::to_string(&extract(&c)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fixture_relation_examples() {
    let c = corpus();
    let ext = extract(&c);
    let rel = relate(&c, &ext);
    let pair = |doc_id: &str, bio: &str, sdoh: &str| {
        rel.iter()
            .find(|r| r.doc_id == doc_id)
            .unwrap()
            .scored
            .iter()
            .find(|p| p.bio.surface == bio && p.sdoh.surface == sdoh)
            .cloned()
            .unwrap_or_else(|| panic!("{doc_id}: no pair ({bio}, {sdoh})"))
    };
    let retained = |doc_id: &str, bio: &str, sdoh: &str| {
        rel.iter()
            .find(|r| r.doc_id == doc_id)
            .unwrap()
            .retained
            .iter()
            .any(|p| p.bio.surface == bio && p.sdoh.surface == sdoh)
    };

    let p = pair("PM0001", "APOE", "poverty");
    assert_eq!(p.relation_label.as_deref(), Some("associated_with"));
    assert_eq!(p.score_f64(), 1.0);
    assert!(retained("PM0001", "APOE", "poverty"));

    // full co-occurrence, but the model says no relation
    let p = pair("PM0025", "SHARPIN", "educational attainment");
    assert_eq!(p.score_f64(), 1.0);
    assert_eq!(p.relation_label, None);
    assert!(!retained("PM0025", "SHARPIN", "educational attainment"));

    // labelled, but a score of exactly one half stays out
    let p = pair("PM0019", "PICALM", "poverty");
    assert_eq!(p.score_f64(), 0.5);
    assert!(p.relation_label.is_some());
    assert!(!retained("PM0019", "PICALM", "poverty"));

    for r in &rel {
        for p in &r.retained {
            assert!(p.score_f64() > 0.5 && p.relation_label.is_some());
        }
    }
}

#[test]
fn golden_graph() {
    let c = corpus();
    let ext = extract(&c);
    let rel = relate(&c, &ext);
    let built = assemble_sdoh_graph(&rel, SdohTaxonomy::healthy_people_2030()).unwrap();
    let golden = kgraph::deserialize(mini("golden/sdoh_kg.csv")).unwrap();
    assert_eq!(built, golden);

    let stats = graph_stats(&golden);
    assert_eq!((stats.node_count, stats.edge_count), (63, 66));
    assert_eq!(stats.nodes_per_kind["sdoh_type"], 5);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("kg.csv");
    kgraph::serialize(&golden, &out).unwrap();
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        std::fs::read_to_string(mini("golden/sdoh_kg.csv")).unwrap()
    );
    assert_eq!(kgraph::deserialize(&out).unwrap(), golden);
}

fn primekg_subgraph() -> KnowledgeGraph {
    let full = kgraph::deserialize(mini("primekg_mini.csv")).unwrap();
    let sub = idmerge::extract_ad_subgraph(&full, &id("mondo:4975"), 2, &idmerge::default_type_filter()).unwrap();
    assert!(full.node(&id("mondo:90001")).is_some());
    sub
}

#[test]
fn subgraph_drops_far_and_untyped_structure() {
    let sub = primekg_subgraph();
    assert!(sub.node(&id("mondo:4975")).is_some());
    assert!(sub.node(&id("mondo:90001")).is_none(), "island disease kept");
    assert!(sub.nodes().all(|n| !matches!(&n.kind, NodeKind::OtherBio(k) if k == "pathway")));
    let filter = idmerge::default_type_filter();
    for k in sub.edge_keys() {
        let typed = |i: &NamespacedId| filter.contains(&sub.node(i).unwrap().kind);
        assert!(typed(&k.head) || typed(&k.tail), "{k:?}");
    }
}

#[test]
fn identifier_cascade_on_fixtures() {
    let sub = primekg_subgraph();
    let maps = vec![
        idmerge::load_mapping(mini("mesh_omim_to_mondo.tsv"), MapKind::MeshOmimToMondo).unwrap(),
        idmerge::load_mapping(mini("mesh_to_drugbank.tsv"), MapKind::MeshToDrugbank).unwrap(),
    ];
    let umls = FixtureUmls::load(mini("umls_fixture.jsonl")).unwrap();
    let cui = CuiIndex::load(mini("cui_xref.tsv")).unwrap();
    let aligner = Aligner {
        maps: &maps,
        umls: &umls,
        cui_index: &cui,
        target: &sub,
    };
    let golden = kgraph::deserialize(mini("golden/sdoh_kg.csv")).unwrap();
    let node = |s: &str| golden.node(&id(s)).unwrap().clone();

    assert_eq!(aligner.map_identifier(&node("mesh:D003704")), (id("mondo:1627"), Provenance::Direct));
    let asthma = node("mesh:D001249");
    assert_eq!(aligner.map_identifier(&asthma).0, id("mondo:4979"));

    let (merged, report) = idmerge::align_and_merge(&golden, &sub, &aligner);
    assert_eq!(report.nodes_merged, report.nodes_a + report.nodes_b - report.shared_nodes);
    assert_eq!(merged.edge_count(), report.edges_a + report.edges_b - report.shared_edges);
    assert!(report.matched_direct > 0);
    // genes keep their ids and land on the PrimeKG gene nodes
    assert!(merged.node(&id("ncbigene:348")).is_some());
    let decline = node("mesh:D060825");
    assert_eq!(aligner.map_identifier(&decline), (id("umls:C0234985"), Provenance::Umls));
    assert!(merged.node(&id("mesh:D060825")).is_none());
    assert!(report.matched_umls >= 1);
    assert_eq!(
        report.matched_direct + report.matched_umls + report.kept_original,
        golden.nodes().filter(|n| n.kind.is_bio()).count()
    );
}
