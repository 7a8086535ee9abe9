use std::collections::BTreeSet;
use std::hint::black_box;
use std::path::{Path, PathBuf};

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sdohkg::gnn::{self, EncodedGraph, RgcnModel};
use sdohkg::idmerge::{self, Aligner, CuiIndex, FixtureUmls, MapKind};
use sdohkg::kgraph;
use sdohkg::relation::co_occurrence_score;
use sdohkg::synthetic::{planted_communities, PlantedConfig};

fn mini(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini").join(name)
}

fn rgcn(c: &mut Criterion) {
    let mut group = c.benchmark_group("rgcn");
    group.sample_size(20);
    for side in [25, 50] {
        let planted = planted_communities(&PlantedConfig {
            side_size: side,
            ..PlantedConfig::default()
        });
        let g = EncodedGraph::new(&planted.augmented);
        let model = RgcnModel::init(&g, 50, 0).unwrap();
        let n = g.node_count();
        let pos: Vec<_> = g.edges.iter().map(|&(h, _, t)| (h, t)).collect();
        let neg: Vec<_> = pos.iter().map(|&(h, t)| (h, (t + 1) % n)).collect();

        group.bench_with_input(BenchmarkId::new("forward", n), &g, |b, g| {
            b.iter(|| gnn::rgcn_forward(g, black_box(&model)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("loss_and_grad", n), &g, |b, g| {
            b.iter(|| gnn::loss_and_grad(g, black_box(&model), &pos, &neg).unwrap())
        });
    }
    group.finish();
}

fn co_occurrence(c: &mut Criterion) {
    let mut group = c.benchmark_group("co_occurrence");
    for len in [8usize, 64, 512] {
        let a: BTreeSet<usize> = (0..len).step_by(2).collect();
        let b: BTreeSet<usize> = (0..len).step_by(3).collect();
        group.bench_with_input(BenchmarkId::from_parameter(len), &(a, b), |bench, (a, b)| {
            bench.iter(|| co_occurrence_score(black_box(a), black_box(b)))
        });
    }
    group.finish();
}

fn merge(c: &mut Criterion) {
    let full = kgraph::deserialize(mini("primekg_mini.csv")).unwrap();
    let sdoh = kgraph::deserialize(mini("golden/sdoh_kg.csv")).unwrap();
    let center = "mondo:4975".parse().unwrap();
    let filter = idmerge::default_type_filter();
    let maps = vec![
        idmerge::load_mapping(mini("mesh_omim_to_mondo.tsv"), MapKind::MeshOmimToMondo).unwrap(),
        idmerge::load_mapping(mini("mesh_to_drugbank.tsv"), MapKind::MeshToDrugbank).unwrap(),
    ];
    let umls = FixtureUmls::load(mini("umls_fixture.jsonl")).unwrap();
    let cui = CuiIndex::load(mini("cui_xref.tsv")).unwrap();

    c.bench_function("merge/subgraph", |b| {
        b.iter(|| idmerge::extract_ad_subgraph(black_box(&full), &center, 2, &filter).unwrap())
    });
    let sub = idmerge::extract_ad_subgraph(&full, &center, 2, &filter).unwrap();
    let aligner = Aligner {
        maps: &maps,
        umls: &umls,
        cui_index: &cui,
        target: &sub,
    };
    c.bench_function("merge/align_and_merge", |b| {
        b.iter(|| idmerge::align_and_merge(black_box(&sdoh), &sub, &aligner))
    });
}

criterion_group!(benches, rgcn, co_occurrence, merge);
criterion_main!(benches);
