//! Random models, cluster maps and τ families for property tests and
//! benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;

use crate::abstraction::{derive_high_by_pushforward, TauFamily};
use crate::docalc::{high_admg_from_cluster_map, ClusterAdmg, MAX_CLUSTER_VALUES};
use crate::engine::{assignment_count, CausalModel, Domain, FiniteMap, Variable};
use crate::graph::{ClusterMap, Dag, NodeId, NodeSet, ValidatedClusterMap};

#[derive(Clone, Copy, Debug)]
pub struct ModelShape {
    pub max_domain: usize,
    /// Probability that a non-final row entry is forced to zero.
    pub zero_prob: f64,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape {
            max_domain: 3,
            zero_prob: 0.0,
        }
    }
}

/// Node names `N0, N1, ...`.
pub fn node_names(n: usize) -> Vec<NodeId> {
    (0..n).map(|i| NodeId::new(format!("N{i}"))).collect()
}

/// A DAG on `n` nodes: a random hidden topological order, each forward
/// pair joined with probability `edge_prob`, and a shuffled declared order.
pub fn random_dag<R: Rng + ?Sized>(rng: &mut R, n: usize, edge_prob: f64) -> Dag {
    let names = node_names(n);
    let mut topo = names.clone();
    topo.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push((topo[i].clone(), topo[j].clone()));
            }
        }
    }
    let mut declared = names;
    declared.shuffle(rng);
    Dag::new(declared, edges).expect("forward edges are acyclic")
}

/// A stochastic row of length `k`: exponential weights normalised, with
/// the last entry set to one minus the rest so the row sums exactly.
pub fn random_row<R: Rng + ?Sized>(rng: &mut R, k: usize, zero_prob: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    if zero_prob > 0.0 {
        for x in w.iter_mut() {
            if rng.gen_bool(zero_prob) {
                *x = 0.0;
            }
        }
        if w.iter().all(|x| *x == 0.0) {
            let i = rng.gen_range(0..k);
            w[i] = 1.0;
        }
    }
    let total: f64 = w.iter().sum();
    let mut row: Vec<f64> = w.iter().map(|x| x / total).collect();
    let head: f64 = row[..k - 1].iter().sum();
    row[k - 1] = (1.0 - head).max(0.0);
    row
}

/// A model on `g` with random domain sizes in `2..=max_domain` and random
/// rows.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, g: &Dag, latent: &NodeSet, shape: ModelShape) -> CausalModel {
    let sizes: Vec<usize> = (0..g.len())
        .map(|_| rng.gen_range(2..=shape.max_domain.max(2)))
        .collect();
    let domains: Vec<Domain> = sizes.iter().map(|&k| Domain::range(k)).collect();
    let tables = (0..g.len())
        .map(|i| {
            let rows: usize = g
                .parent_list(g.node(i).as_str())
                .expect("known node")
                .iter()
                .map(|p| sizes[g.index_of(p.as_str()).expect("known node")])
                .product();
            (0..rows)
                .flat_map(|_| random_row(rng, sizes[i], shape.zero_prob))
                .collect()
        })
        .collect();
    CausalModel::from_tables(g.clone(), latent.clone(), domains, tables).expect("generated model is valid")
}

/// A cluster map that need not be valid: nodes are spread over a random
/// number of clusters, each removed with probability `remove_prob`.
/// Multi-node clusters are named by joining member names with `_`.
pub fn random_cluster_map<R: Rng + ?Sized>(rng: &mut R, nodes: &[NodeId], remove_prob: f64) -> ClusterMap {
    let n = nodes.len();
    let k = rng.gen_range(1..=n.max(1));
    let mut slot: Vec<Option<usize>> = nodes
        .iter()
        .map(|_| {
            if rng.gen_bool(remove_prob) {
                None
            } else {
                Some(rng.gen_range(0..k))
            }
        })
        .collect();
    if slot.iter().all(Option::is_none) {
        let i = rng.gen_range(0..n);
        slot[i] = Some(0);
    }
    let mut clusters: Vec<(NodeId, Vec<NodeId>)> = Vec::new();
    for c in 0..k {
        let members: Vec<NodeId> = nodes
            .iter()
            .zip(&slot)
            .filter(|(_, s)| **s == Some(c))
            .map(|(n, _)| n.clone())
            .collect();
        if members.is_empty() {
            continue;
        }
        let name = members.iter().map(NodeId::as_str).collect::<Vec<_>>().join("_");
        clusters.push((NodeId::new(name), members));
    }
    let removed = nodes
        .iter()
        .zip(&slot)
        .filter(|(_, s)| s.is_none())
        .map(|(n, _)| n.clone())
        .collect();
    ClusterMap::from_clusters(nodes, clusters, removed).expect("generated map is well formed")
}

/// A cluster map valid for `g`, found by rejection sampling; falls back to
/// the identity after `tries` failures.
pub fn random_valid_cluster_map<R: Rng + ?Sized>(
    rng: &mut R,
    g: &Dag,
    remove_prob: f64,
    tries: usize,
) -> ValidatedClusterMap {
    for _ in 0..tries {
        let cm = random_cluster_map(rng, g.nodes(), remove_prob);
        if let Ok(v) = ValidatedClusterMap::derive(g, &cm) {
            return v;
        }
    }
    ValidatedClusterMap::derive(g, &ClusterMap::identity(g.nodes())).expect("identity map is valid")
}

fn cluster_vars(low: &CausalModel, cm: &ClusterMap, h: &NodeId) -> Vec<Variable> {
    let members: NodeSet = cm.cluster(h.as_str()).expect("high node").iter().cloned().collect();
    low.vars_of(&members).expect("cluster members are low nodes")
}

/// A random surjective map from `n` inputs onto `k <= n` outputs.
fn random_surjection<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut image: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
    image.shuffle(rng);
    image
}

/// A random τ family for a validated map.
///
/// With `natural` set, components of high nodes that have children are
/// injective and sinks get arbitrary surjections, so the pushforward high
/// model is an exact abstraction. Otherwise components of high nodes with
/// children are strictly coarsening, which generically breaks naturality.
pub fn random_tau<R: Rng + ?Sized>(
    rng: &mut R,
    low: &CausalModel,
    cm: &ValidatedClusterMap,
    natural: bool,
) -> TauFamily {
    let high = cm.high_graph();
    let maps = cm.high_nodes().iter().map(|h| {
        let vars = cluster_vars(low, cm, h);
        let n = assignment_count(&vars);
        let has_children = !high.children(h.as_str()).expect("high node").is_empty();
        let k = match (natural, has_children) {
            (true, true) => n,
            (false, true) if n > 1 => rng.gen_range(1..n),
            _ => rng.gen_range(1..=n),
        };
        let image = random_surjection(rng, n, k);
        let out = Variable::new(h.clone(), Domain::range(k));
        FiniteMap::new(vars, vec![out], image).expect("generated map is total")
    });
    TauFamily::new(maps).expect("one component per high node")
}

/// A random abstraction instance: low model, validated map, τ and the
/// pushforward high model.
#[derive(Clone, Debug)]
pub struct Instance {
    pub low: CausalModel,
    pub high: CausalModel,
    pub cm: ValidatedClusterMap,
    pub tau: TauFamily,
}

/// Draws a low model, a valid cluster map, τ and the pushforward high model.
///
/// Without `natural`, draws are repeated (a bounded number of times) until
/// the high graph has an edge, so that τ actually coarsens some parent.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, max_nodes: usize, shape: ModelShape, natural: bool) -> Instance {
    let mut tries = 0;
    let (low, cm) = loop {
        let n = rng.gen_range(1..=max_nodes);
        let g = random_dag(rng, n, 0.5);
        let low = random_model(rng, &g, &NodeSet::new(), shape);
        let cm = random_valid_cluster_map(rng, &g, 0.15, 20);
        tries += 1;
        if natural || cm.high_graph().edge_count() > 0 || tries >= 50 {
            break (low, cm);
        }
    };
    let tau = random_tau(rng, &low, &cm, natural);
    let high = derive_high_by_pushforward(&low, &cm, &tau).expect("derived shape matches");
    Instance { low, high, cm, tau }
}

/// A low model over a DAG with latent nodes and a cluster map over it in
/// which every latent is removed.
#[derive(Clone, Debug)]
pub struct LatentInstance {
    pub low: CausalModel,
    pub cm: ClusterMap,
    pub high: ClusterAdmg,
}

/// Samples until the cluster map yields a cluster ADMG whose clusters have
/// at most [`MAX_CLUSTER_VALUES`] joint values.
pub fn random_latent_instance<R: Rng + ?Sized>(
    rng: &mut R,
    max_nodes: usize,
    max_latent: usize,
    shape: ModelShape,
) -> LatentInstance {
    loop {
        let n = rng.gen_range(2..=max_nodes);
        let g = random_dag(rng, n, 0.45);
        let mut order = g.nodes().to_vec();
        order.shuffle(rng);
        let k = rng.gen_range(0..=max_latent.min(n - 1));
        let latent: NodeSet = order[..k].iter().cloned().collect();
        let low = random_model(rng, &g, &latent, shape);
        let observed: Vec<NodeId> = g.nodes().iter().filter(|v| !latent.contains(*v)).cloned().collect();
        let partial = random_cluster_map(rng, &observed, 0.15);
        let clusters = partial
            .high_nodes()
            .iter()
            .map(|h| (h.clone(), partial.cluster(h.as_str()).expect("listed").to_vec()))
            .collect();
        let removed = g
            .nodes()
            .iter()
            .filter(|v| partial.image(v.as_str()).is_none())
            .cloned()
            .collect();
        let cm = ClusterMap::from_clusters(g.nodes(), clusters, removed).expect("well formed");
        let small = cm.high_nodes().iter().all(|h| {
            let members: NodeSet = cm.cluster(h.as_str()).expect("listed").iter().cloned().collect();
            assignment_count(&low.vars_of(&members).expect("low nodes")) <= MAX_CLUSTER_VALUES
        });
        if !small {
            continue;
        }
        if let Ok(high) = high_admg_from_cluster_map(&g, &latent, &cm) {
            return LatentInstance { low, cm, high };
        }
    }
}
