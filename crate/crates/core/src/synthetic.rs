//! Seeded synthetic graphs with planted community structure, used to check
//! that the encoder recovers structure it should be able to see.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gnn::stream_rng;
use crate::ids::NamespacedId;
use crate::kgraph::{KnowledgeGraph, Node, NodeKind, Triplet};

pub const TARGET_RELATION: &str = "targets";
pub const AUX_RELATION: &str = "co_listed";
pub const EXTRA_RELATION: &str = "interacts";

/// Two communities, each a gene side and a disease side. `targets` runs
/// gene → disease, dense inside a community and sparse across. `co_listed`
/// links disease pairs at random regardless of community. The augmented
/// graph adds `interacts` between genes of the same community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedConfig {
    pub side_size: usize,
    pub within_density: f64,
    pub cross_density: f64,
    pub aux_density: f64,
    pub extra_density: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            side_size: 50,
            within_density: 1.0,
            cross_density: 0.01,
            aux_density: 0.05,
            extra_density: 0.3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedGraphs {
    pub base: KnowledgeGraph,
    pub augmented: KnowledgeGraph,
}

fn node_id(side: char, community: usize, i: usize) -> NamespacedId {
    NamespacedId::new(if side == 'g' { "gene" } else { "disease" }, format!("c{community}_{i:03}")).expect("valid id")
}

pub fn planted_communities(cfg: &PlantedConfig) -> PlantedGraphs {
    let mut rng = stream_rng(cfg.seed, 7);
    let n = cfg.side_size;
    let mut nodes = Vec::new();
    for c in 0..2 {
        for i in 0..n {
            nodes.push(Node::new(node_id('g', c, i), format!("G{c}_{i}"), NodeKind::GeneProtein));
            nodes.push(Node::new(node_id('d', c, i), format!("D{c}_{i}"), NodeKind::Disease));
        }
    }
    let edge = |h: NamespacedId, r: &str, t: NamespacedId| Triplet {
        head: h,
        relation: r.into(),
        tail: t,
        evidence: vec![],
    };
    let mut base = Vec::new();
    for cg in 0..2 {
        for i in 0..n {
            for cd in 0..2 {
                let p = if cg == cd { cfg.within_density } else { cfg.cross_density };
                for j in 0..n {
                    if rng.random_bool(p) {
                        base.push(edge(node_id('g', cg, i), TARGET_RELATION, node_id('d', cd, j)));
                    }
                }
            }
        }
    }
    for c1 in 0..2 {
        for i in 0..n {
            for c2 in 0..2 {
                for j in 0..n {
                    if (c1, i) < (c2, j) && rng.random_bool(cfg.aux_density) {
                        base.push(edge(node_id('d', c1, i), AUX_RELATION, node_id('d', c2, j)));
                    }
                }
            }
        }
    }
    let mut extra = Vec::new();
    for c in 0..2 {
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.random_bool(cfg.extra_density) {
                    extra.push(edge(node_id('g', c, i), EXTRA_RELATION, node_id('g', c, j)));
                }
            }
        }
    }
    let base_graph = KnowledgeGraph::from_parts(nodes.clone(), base.clone()).expect("endpoints exist");
    let augmented = KnowledgeGraph::from_parts(nodes, base.into_iter().chain(extra)).expect("endpoints exist");
    PlantedGraphs {
        base: base_graph,
        augmented,
    }
}
