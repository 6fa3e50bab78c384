//! Bundled models and abstractions used by tests, benches and the CLI.

use crate::abstraction::{
    derive_high_by_effect, derive_high_by_pushforward, epsilon_from_tau, EpsilonFamily, TauFamily,
};
use crate::engine::{CausalModel, Domain, FiniteMap, ModelBuilder, Variable};
use crate::graph::{ClusterMap, NodeId};

/// A low model, a high model and the maps between them.
#[derive(Clone, Debug)]
pub struct AbstractionFixture {
    pub low: CausalModel,
    pub high: CausalModel,
    pub cluster_map: ClusterMap,
    pub tau: TauFamily,
    pub epsilon: Option<EpsilonFamily>,
}

/// `A -> B` with `p(A=1) = 0.3`, `p(B=1 | A=0) = 0.2`, `p(B=1 | A=1) = 0.9`.
pub fn ab_model() -> CausalModel {
    ModelBuilder::new()
        .node("A", Domain::binary())
        .node("B", Domain::binary())
        .edge("A", "B")
        .kernel("A", vec![vec![0.7, 0.3]])
        .kernel("B", vec![vec![0.8, 0.2], vec![0.1, 0.9]])
        .build()
        .expect("fixture is valid")
}

/// A latent `U` confounding `A -> B`.
pub fn confounded_model() -> CausalModel {
    ModelBuilder::new()
        .latent("U", Domain::binary())
        .node("A", Domain::binary())
        .node("B", Domain::binary())
        .edge("U", "A")
        .edge("U", "B")
        .edge("A", "B")
        .kernel("U", vec![vec![0.6, 0.4]])
        .kernel("A", vec![vec![0.8, 0.2], vec![0.3, 0.7]])
        .kernel(
            "B",
            vec![vec![0.9, 0.1], vec![0.4, 0.6], vec![0.5, 0.5], vec![0.15, 0.85]],
        )
        .build()
        .expect("fixture is valid")
}

fn id_map(m: &CausalModel, n: &str) -> FiniteMap {
    FiniteMap::identity(vec![m.variable(n).expect("fixture node").clone()])
}

/// Every node is its own cluster with τ the identity.
pub fn identity_abstraction(m: &CausalModel) -> AbstractionFixture {
    AbstractionFixture {
        low: m.clone(),
        high: m.clone(),
        cluster_map: ClusterMap::identity(m.graph().nodes()),
        tau: TauFamily::identity(m),
        epsilon: Some(EpsilonFamily::identity(m)),
    }
}

/// `A -> B -> C` where the four values of `B` fall into two groups. The
/// group depends on `A` but the value within a group does not, while `C`
/// reacts to every value of `B`. Grouping `B` is an effect-focused
/// abstraction but not a cause-focused one.
pub fn chain_effect() -> AbstractionFixture {
    let within = [[0.25, 0.75], [0.6, 0.4]];
    let group_given_a = [[0.3, 0.7], [0.8, 0.2]];
    let rows_b = group_given_a
        .iter()
        .map(|g| {
            vec![
                g[0] * within[0][0],
                g[0] * within[0][1],
                g[1] * within[1][0],
                g[1] * within[1][1],
            ]
        })
        .collect();
    let low = ModelBuilder::new()
        .node("A", Domain::binary())
        .node("B", Domain::range(4))
        .node("C", Domain::binary())
        .edge("A", "B")
        .edge("B", "C")
        .kernel("A", vec![vec![0.45, 0.55]])
        .kernel("B", rows_b)
        .kernel(
            "C",
            vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.5, 0.5], vec![0.05, 0.95]],
        )
        .build()
        .expect("fixture is valid");
    let b = low.variable("B").expect("fixture node").clone();
    let tau = TauFamily::new([
        id_map(&low, "A"),
        FiniteMap::new(vec![b], vec![Variable::new("B", Domain::binary())], vec![0, 0, 1, 1]).expect("fixture map"),
        id_map(&low, "C"),
    ])
    .expect("fixture family");
    effect_fixture(low, ClusterMap::identity(&names(&["A", "B", "C"])), tau)
}

fn names(ns: &[&str]) -> Vec<NodeId> {
    ns.iter().map(|n| NodeId::new(*n)).collect()
}

fn effect_fixture(low: CausalModel, cm: ClusterMap, tau: TauFamily) -> AbstractionFixture {
    let high = derive_high_by_effect(&low, &cm, &tau).expect("fixture abstraction");
    let epsilon = epsilon_from_tau(&low, &cm, &tau).expect("fixture abstraction");
    AbstractionFixture {
        low,
        high,
        cluster_map: cm,
        tau,
        epsilon: Some(epsilon),
    }
}

pub const VOTERS: usize = 8;
const VOTER_BIAS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
/// Ad effect on the odds, indexed by `2 * a1 + a2`.
const AD_EFFECT: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

/// Two binary ads `A1`, `A2` and eight voters `X1..X8`.
///
/// Voter `i` votes with odds `bias_i * g(a1, a2)`, independently given the
/// ads. The voters form groups `G1 = X1..X4` and `G2 = X5..X8`, and τ
/// reports the number of votes in each group. Given the count, the votes
/// within a group do not depend on the ads, so the count is a sufficient
/// statistic.
pub fn voting() -> AbstractionFixture {
    let mut b = ModelBuilder::new()
        .node("A1", Domain::binary())
        .node("A2", Domain::binary())
        .kernel("A1", vec![vec![0.5, 0.5]])
        .kernel("A2", vec![vec![0.4, 0.6]]);
    for i in 0..VOTERS {
        let x = format!("X{}", i + 1);
        let bias = VOTER_BIAS[i % VOTER_BIAS.len()];
        let rows = AD_EFFECT
            .iter()
            .map(|g| {
                let odds = bias * g;
                vec![1.0 / (1.0 + odds), odds / (1.0 + odds)]
            })
            .collect();
        b = b
            .node(x.as_str(), Domain::binary())
            .edge("A1", x.as_str())
            .edge("A2", x.as_str())
            .kernel(x.as_str(), rows);
    }
    let low = b.build().expect("fixture is valid");

    let group = VOTERS / 2;
    let mut clusters = vec![(NodeId::new("A1"), names(&["A1"])), (NodeId::new("A2"), names(&["A2"]))];
    let mut maps = vec![id_map(&low, "A1"), id_map(&low, "A2")];
    for gi in 0..2 {
        let members: Vec<NodeId> = (0..group)
            .map(|i| NodeId::new(format!("X{}", gi * group + i + 1)))
            .collect();
        let vars = members
            .iter()
            .map(|n| low.variable(n.as_str()).expect("voter").clone())
            .collect();
        let high = format!("G{}", gi + 1);
        let out = Variable::new(high.as_str(), Domain::range(group + 1));
        maps.push(FiniteMap::from_fn(vars, vec![out], |v| vec![v.iter().sum()]).expect("fixture map"));
        clusters.push((NodeId::new(high), members));
    }
    let cm = ClusterMap::from_clusters(low.graph().nodes(), clusters, vec![]).expect("fixture cluster map");
    let tau = TauFamily::new(maps).expect("fixture family");
    effect_fixture(low, cm, tau)
}

/// A three-level chain of abstractions over binary `A -> B -> C`:
/// `{A, B}` merges into `AB` with τ keeping both values, then `{AB, C}`
/// merges into `ABC` with τ counting the ones.
#[derive(Clone, Debug)]
pub struct ThreeLevelChain {
    pub low: CausalModel,
    pub middle: CausalModel,
    pub high: CausalModel,
    pub cm12: ClusterMap,
    pub tau12: TauFamily,
    pub cm23: ClusterMap,
    pub tau23: TauFamily,
    pub cm13: ClusterMap,
    pub tau13: TauFamily,
}

pub fn three_level_chain() -> ThreeLevelChain {
    let low = ModelBuilder::new()
        .node("A", Domain::binary())
        .node("B", Domain::binary())
        .node("C", Domain::binary())
        .edge("A", "B")
        .edge("B", "C")
        .kernel("A", vec![vec![0.35, 0.65]])
        .kernel("B", vec![vec![0.7, 0.3], vec![0.2, 0.8]])
        .kernel("C", vec![vec![0.55, 0.45], vec![0.1, 0.9]])
        .build()
        .expect("fixture is valid");
    let var = |n: &str| low.variable(n).expect("fixture node").clone();

    let cm12 = ClusterMap::from_clusters(
        low.graph().nodes(),
        vec![("AB".into(), names(&["A", "B"])), ("C".into(), names(&["C"]))],
        vec![],
    )
    .expect("fixture cluster map");
    let ab = Variable::new("AB", Domain::new(["00", "01", "10", "11"]).expect("labels"));
    let tau12 = TauFamily::new([
        FiniteMap::from_fn(vec![var("A"), var("B")], vec![ab.clone()], |v| vec![2 * v[0] + v[1]]).expect("fixture map"),
        id_map(&low, "C"),
    ])
    .expect("fixture family");
    let middle = derive_high_by_pushforward(&low, &cm12, &tau12).expect("fixture abstraction");

    let cm23 = ClusterMap::from_clusters(
        middle.graph().nodes(),
        vec![("ABC".into(), names(&["AB", "C"]))],
        vec![],
    )
    .expect("fixture cluster map");
    let abc = Variable::new("ABC", Domain::range(4));
    let ones = [0, 1, 1, 2];
    let tau23 =
        TauFamily::new([
            FiniteMap::from_fn(vec![ab, var("C")], vec![abc.clone()], |v| vec![ones[v[0]] + v[1]])
                .expect("fixture map"),
        ])
        .expect("fixture family");
    let high = derive_high_by_pushforward(&middle, &cm23, &tau23).expect("fixture abstraction");

    let cm13 = ClusterMap::from_clusters(
        low.graph().nodes(),
        vec![("ABC".into(), names(&["A", "B", "C"]))],
        vec![],
    )
    .expect("fixture cluster map");
    let tau13 =
        TauFamily::new([
            FiniteMap::from_fn(vec![var("A"), var("B"), var("C")], vec![abc], |v| vec![v.iter().sum()])
                .expect("fixture map"),
        ])
        .expect("fixture family");

    ThreeLevelChain {
        low,
        middle,
        high,
        cm12,
        tau12,
        cm23,
        tau23,
        cm13,
        tau13,
    }
}
