use super::{Admg, Dag, GraphError, NodeId, NodeSet};

/// Latent projection of `g` onto `observed`.
///
/// `A -> B` iff some directed path from `A` to `B` has only latent interior
/// nodes; `A <-> B` iff some latent node reaches both `A` and `B` along
/// directed paths with latent interiors. Node order follows `g`.
pub fn latent_projection(g: &Dag, observed: &NodeSet) -> Result<Admg, GraphError> {
    let obs_idx = g.require_set(observed)?;
    let mut is_obs = vec![false; g.len()];
    for &i in &obs_idx {
        is_obs[i] = true;
    }
    let nodes: Vec<NodeId> = (0..g.len()).filter(|&i| is_obs[i]).map(|i| g.node(i).clone()).collect();

    let mut directed = Vec::new();
    for a in (0..g.len()).filter(|&i| is_obs[i]) {
        for b in observed_frontier(g, &is_obs, g.child_indices(a)) {
            directed.push((g.node(a).clone(), g.node(b).clone()));
        }
    }
    directed.sort();

    let mut bidirected = std::collections::BTreeSet::new();
    for u in (0..g.len()).filter(|&i| !is_obs[i]) {
        let reach = observed_frontier(g, &is_obs, g.child_indices(u));
        for (k, &a) in reach.iter().enumerate() {
            for &b in &reach[k + 1..] {
                bidirected.insert((a.min(b), a.max(b)));
            }
        }
    }
    let bidirected: Vec<(NodeId, NodeId)> = bidirected
        .into_iter()
        .map(|(a, b)| (g.node(a).clone(), g.node(b).clone()))
        .collect();

    let dag = Dag::from_parts(nodes, &directed)?;
    Admg::from_parts(dag, &bidirected)
}

/// Observed nodes reachable from `start` through latent-only interiors,
/// sorted by index.
fn observed_frontier(g: &Dag, is_obs: &[bool], start: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; g.len()];
    let mut stack: Vec<usize> = start.to_vec();
    let mut hits = Vec::new();
    while let Some(v) = stack.pop() {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        if is_obs[v] {
            hits.push(v);
        } else {
            stack.extend(g.child_indices(v).iter().copied());
        }
    }
    hits.sort_unstable();
    hits
}
