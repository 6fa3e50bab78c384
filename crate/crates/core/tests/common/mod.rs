//! Reference implementations that share no code paths with the library
//! beyond reading model tables and graph structure.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use cabs_core::engine::{CausalModel, Kernel};
use cabs_core::graph::{Admg, ClusterMap, Dag, NodeSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plain adjacency copied out of a model.
struct Net {
    names: Vec<String>,
    sizes: Vec<usize>,
    parents: Vec<Vec<usize>>,
    tables: Vec<Vec<f64>>,
}

impl Net {
    fn of(m: &CausalModel) -> Net {
        let g = m.graph();
        let names: Vec<String> = g.nodes().iter().map(|n| n.as_str().to_owned()).collect();
        let pos = |s: &str| names.iter().position(|n| n == s).unwrap();
        let mut parents = vec![Vec::new(); names.len()];
        for (a, b) in g.edges() {
            parents[pos(b.as_str())].push(pos(a.as_str()));
        }
        for p in &mut parents {
            p.sort();
        }
        let sizes = names.iter().map(|n| m.domain(n).unwrap().size()).collect();
        let tables = names.iter().map(|n| m.mechanism(n).unwrap().table().to_vec()).collect();
        Net {
            names,
            sizes,
            parents,
            tables,
        }
    }

    fn index(&self, s: &str) -> usize {
        self.names.iter().position(|n| n == s).unwrap()
    }

    /// Probability of a full assignment under the mutilated model: nodes in
    /// `fixed` contribute a point mass at their fixed value.
    fn mutilated_prob(&self, x: &[usize], fixed: &BTreeMap<usize, usize>) -> f64 {
        let mut p = 1.0;
        for i in 0..self.names.len() {
            if let Some(&v) = fixed.get(&i) {
                if x[i] != v {
                    return 0.0;
                }
                continue;
            }
            let mut row = 0;
            for &q in &self.parents[i] {
                row = row * self.sizes[q] + x[q];
            }
            p *= self.tables[i][row * self.sizes[i] + x[i]];
        }
        p
    }
}

fn odometer(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![0; sizes.len()];
    for _ in 0..total {
        out.push(cur.clone());
        for k in (0..sizes.len()).rev() {
            cur[k] += 1;
            if cur[k] < sizes[k] {
                break;
            }
            cur[k] = 0;
        }
    }
    out
}

/// `p(outcome | do(do_set))` by summing the full mutilated joint. Rows and
/// columns follow the variable order of `like`, which must be a kernel
/// over the same variables.
pub fn brute_interventional(m: &CausalModel, like: &Kernel) -> Vec<f64> {
    let net = Net::of(m);
    let ins: Vec<usize> = like.inputs().iter().map(|v| net.index(v.name.as_str())).collect();
    let outs: Vec<usize> = like.outputs().iter().map(|v| net.index(v.name.as_str())).collect();
    let in_sizes: Vec<usize> = ins.iter().map(|&i| net.sizes[i]).collect();
    let out_sizes: Vec<usize> = outs.iter().map(|&i| net.sizes[i]).collect();
    let cols: usize = out_sizes.iter().product();
    let all = odometer(&net.sizes);
    let mut table = Vec::new();
    for xin in odometer(&in_sizes) {
        let fixed: BTreeMap<usize, usize> = ins.iter().copied().zip(xin).collect();
        let mut row = vec![0.0; cols];
        for x in &all {
            let p = net.mutilated_prob(x, &fixed);
            if p == 0.0 {
                continue;
            }
            let mut c = 0;
            for (&o, &s) in outs.iter().zip(&out_sizes) {
                c = c * s + x[o];
            }
            row[c] += p;
        }
        table.extend(row);
    }
    table
}

/// Observational joint over `vars` (names, in the given order).
pub fn brute_marginal(m: &CausalModel, vars: &[&str]) -> (Vec<usize>, Vec<f64>) {
    let net = Net::of(m);
    let idx: Vec<usize> = vars.iter().map(|v| net.index(v)).collect();
    let sizes: Vec<usize> = idx.iter().map(|&i| net.sizes[i]).collect();
    let mut out = vec![0.0; sizes.iter().product()];
    for x in odometer(&net.sizes) {
        let p = net.mutilated_prob(&x, &BTreeMap::new());
        let mut c = 0;
        for (&i, &s) in idx.iter().zip(&sizes) {
            c = c * s + x[i];
        }
        out[c] += p;
    }
    (sizes, out)
}

/// Largest violation of `p(x,y,z) p(z) = p(x,z) p(y,z)` in the observed
/// joint.
pub fn ci_residual(m: &CausalModel, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> f64 {
    let order: Vec<&str> = x.iter().chain(y).chain(z).map(|n| n.as_str()).collect();
    let (sizes, joint) = brute_marginal(m, &order);
    let (nx, ny) = (x.len(), y.len());
    let key = |v: &[usize], keep: &[bool]| -> Vec<usize> {
        v.iter()
            .zip(keep)
            .map(|(a, k)| if *k { *a } else { usize::MAX })
            .collect()
    };
    let mask = |f: &dyn Fn(usize) -> bool| (0..order.len()).map(f).collect::<Vec<bool>>();
    let m_xz = mask(&|i| i < nx || i >= nx + ny);
    let m_yz = mask(&|i| i >= nx);
    let m_z = mask(&|i| i >= nx + ny);
    let mut pxz: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut pyz: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut pz: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let all = odometer(&sizes);
    for (v, p) in all.iter().zip(&joint) {
        *pxz.entry(key(v, &m_xz)).or_default() += p;
        *pyz.entry(key(v, &m_yz)).or_default() += p;
        *pz.entry(key(v, &m_z)).or_default() += p;
    }
    let mut worst: f64 = 0.0;
    for (v, p) in all.iter().zip(&joint) {
        let lhs = p * pz[&key(v, &m_z)];
        let rhs = pxz[&key(v, &m_xz)] * pyz[&key(v, &m_yz)];
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// d-separation by enumerating every simple path in the skeleton.
///
/// Bidirected edges become fresh latent parents.
pub fn dsep_by_paths(g: &Admg, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> bool {
    let mut names: Vec<String> = g.nodes().iter().map(|n| n.as_str().to_owned()).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let pos = |names: &Vec<String>, s: &str| names.iter().position(|n| n == s).unwrap();
    for (a, b) in g.directed().edges() {
        edges.push((pos(&names, a.as_str()), pos(&names, b.as_str())));
    }
    for (a, b) in g.bidirected() {
        let (ia, ib) = (pos(&names, a.as_str()), pos(&names, b.as_str()));
        names.push(format!("latent {a} {b}"));
        let u = names.len() - 1;
        edges.push((u, ia));
        edges.push((u, ib));
    }
    let n = names.len();
    let directed: HashSet<(usize, usize)> = edges.iter().copied().collect();
    let mut nbrs = vec![Vec::new(); n];
    for &(a, b) in &edges {
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    let zs: HashSet<usize> = z.iter().map(|s| pos(&names, s.as_str())).collect();
    // A node is "opened" as a collider if it or a descendant is in Z.
    let mut opens = vec![false; n];
    for (i, open) in opens.iter_mut().enumerate() {
        let mut stack = vec![i];
        let mut seen = vec![false; n];
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if zs.contains(&v) {
                *open = true;
                break;
            }
            stack.extend(edges.iter().filter(|e| e.0 == v).map(|e| e.1));
        }
    }
    let ys: HashSet<usize> = y.iter().map(|s| pos(&names, s.as_str())).collect();

    fn walk(
        path: &mut Vec<usize>,
        nbrs: &[Vec<usize>],
        directed: &HashSet<(usize, usize)>,
        zs: &HashSet<usize>,
        opens: &[bool],
        ys: &HashSet<usize>,
    ) -> bool {
        let last = *path.last().unwrap();
        if path.len() > 1 && ys.contains(&last) {
            return true;
        }
        for &next in &nbrs[last] {
            if path.contains(&next) {
                continue;
            }
            if path.len() >= 2 {
                let prev = path[path.len() - 2];
                let collider = directed.contains(&(prev, last)) && directed.contains(&(next, last));
                let blocked = if collider { !opens[last] } else { zs.contains(&last) };
                if blocked {
                    continue;
                }
            }
            path.push(next);
            let found = walk(path, nbrs, directed, zs, opens, ys);
            path.pop();
            if found {
                return true;
            }
        }
        false
    }

    for s in x {
        let start = pos(&names, s.as_str());
        if ys.contains(&start) {
            return false;
        }
        if walk(&mut vec![start], &nbrs, &directed, &zs, &opens, &ys) {
            return false;
        }
    }
    true
}

/// A graph whose nodes are sets of low node names.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
struct Quotient {
    nodes: BTreeSet<BTreeSet<String>>,
    edges: BTreeSet<(BTreeSet<String>, BTreeSet<String>)>,
}

impl Quotient {
    fn acyclic(&self) -> bool {
        let mut indeg: BTreeMap<&BTreeSet<String>, usize> = self.nodes.iter().map(|n| (n, 0)).collect();
        for (_, b) in &self.edges {
            *indeg.get_mut(b).unwrap() += 1;
        }
        let mut ready: Vec<&BTreeSet<String>> = indeg.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
        let mut done = 0;
        while let Some(n) = ready.pop() {
            done += 1;
            for (a, b) in &self.edges {
                if a == n {
                    let d = indeg.get_mut(b).unwrap();
                    *d -= 1;
                    if *d == 0 {
                        ready.push(b);
                    }
                }
            }
        }
        done == self.nodes.len()
    }

    fn merged(&self, a: &BTreeSet<String>, b: &BTreeSet<String>) -> Option<Quotient> {
        let ab: BTreeSet<String> = a.union(b).cloned().collect();
        let relabel = |n: &BTreeSet<String>| if n == a || n == b { ab.clone() } else { n.clone() };
        let nodes = self.nodes.iter().map(relabel).collect();
        let edges = self
            .edges
            .iter()
            .map(|(p, c)| (relabel(p), relabel(c)))
            .filter(|(p, c)| p != c)
            .collect();
        let q = Quotient { nodes, edges };
        q.acyclic().then_some(q)
    }

    fn deleted(&self, a: &BTreeSet<String>) -> Option<Quotient> {
        let children: Vec<&BTreeSet<String>> = self.edges.iter().filter(|(p, _)| p == a).map(|(_, c)| c).collect();
        if children.len() >= 2 {
            return None;
        }
        let parents: Vec<&BTreeSet<String>> = self.edges.iter().filter(|(_, c)| c == a).map(|(p, _)| p).collect();
        let mut edges: BTreeSet<_> = self.edges.iter().filter(|(p, c)| p != a && c != a).cloned().collect();
        for p in &parents {
            for c in &children {
                edges.insert(((*p).clone(), (*c).clone()));
            }
        }
        let mut nodes = self.nodes.clone();
        nodes.remove(a);
        Some(Quotient { nodes, edges })
    }
}

/// Every high edge set reachable from `g` by merges and non-confounder
/// deletions whose final nodes are exactly the clusters of `cm`. Edges are
/// reported between high names.
pub fn exhaustive_abstractions(g: &Dag, cm: &ClusterMap) -> BTreeSet<BTreeSet<(String, String)>> {
    let single = |s: &str| BTreeSet::from([s.to_owned()]);
    let start = Quotient {
        nodes: g.nodes().iter().map(|n| single(n.as_str())).collect(),
        edges: g
            .edges()
            .map(|(a, b)| (single(a.as_str()), single(b.as_str())))
            .collect(),
    };
    let mut target: BTreeMap<BTreeSet<String>, String> = BTreeMap::new();
    for h in cm.high_nodes() {
        let members = cm
            .cluster(h.as_str())
            .unwrap()
            .iter()
            .map(|n| n.as_str().to_owned())
            .collect();
        target.insert(members, h.as_str().to_owned());
    }
    let goal_nodes: BTreeSet<BTreeSet<String>> = target.keys().cloned().collect();

    let mut seen: HashSet<Quotient> = HashSet::new();
    let mut stack = vec![start];
    let mut found = BTreeSet::new();
    while let Some(q) = stack.pop() {
        if !seen.insert(q.clone()) {
            continue;
        }
        if q.nodes == goal_nodes {
            found.insert(
                q.edges
                    .iter()
                    .map(|(a, b)| (target[a].clone(), target[b].clone()))
                    .collect(),
            );
        }
        let nodes: Vec<&BTreeSet<String>> = q.nodes.iter().collect();
        for (i, a) in nodes.iter().enumerate() {
            if let Some(d) = q.deleted(a) {
                stack.push(d);
            }
            for b in &nodes[i + 1..] {
                if let Some(m) = q.merged(a, b) {
                    stack.push(m);
                }
            }
        }
    }
    found
}

/// Every `(X, Y, Z, W)` over `nodes` with each set of size at most
/// `max_size`, `Y` and `Z` nonempty, and the sets pairwise disjoint.
pub fn role_assignments(nodes: &[cabs_core::graph::NodeId], max_size: usize) -> Vec<[NodeSet; 4]> {
    let n = nodes.len();
    let mut out = Vec::new();
    let total = 5usize.pow(n as u32);
    for code in 0..total {
        let mut sets: [NodeSet; 4] = Default::default();
        let mut c = code;
        for v in nodes {
            let role = c % 5;
            c /= 5;
            if role > 0 {
                sets[role - 1].insert(v.clone());
            }
        }
        if sets[1].is_empty() || sets[2].is_empty() || sets.iter().any(|s| s.len() > max_size) {
            continue;
        }
        out.push(sets);
    }
    out
}

/// Tables of every query `(do mask, outcome mask)` over declared node
/// order, from one mutilated joint per intervention assignment. Rows and
/// columns count in mixed radix over declared order, rightmost fastest.
pub fn brute_all_queries(m: &CausalModel) -> BTreeMap<(u32, u32), Vec<f64>> {
    let net = Net::of(m);
    let n = net.names.len();
    let all = odometer(&net.sizes);
    let members = |mask: u32| (0..n).filter(move |i| mask >> i & 1 == 1).collect::<Vec<usize>>();
    let mut out = BTreeMap::new();
    for d in 0..(1u32 << n) {
        let ds = members(d);
        let d_sizes: Vec<usize> = ds.iter().map(|&i| net.sizes[i]).collect();
        let rest = !d & ((1u32 << n) - 1);
        let mut outcomes: Vec<u32> = (0..(1u32 << n)).filter(|o| o & !rest == 0).collect();
        outcomes.sort();
        let mut tables: Vec<Vec<f64>> = vec![Vec::new(); outcomes.len()];
        for xin in odometer(&d_sizes) {
            let fixed: BTreeMap<usize, usize> = ds.iter().copied().zip(xin).collect();
            let joint: Vec<f64> = all.iter().map(|x| net.mutilated_prob(x, &fixed)).collect();
            for (t, &o) in tables.iter_mut().zip(&outcomes) {
                let os = members(o);
                let cols: usize = os.iter().map(|&i| net.sizes[i]).product();
                let mut row = vec![0.0; cols];
                for (x, p) in all.iter().zip(&joint) {
                    if *p == 0.0 {
                        continue;
                    }
                    let mut c = 0;
                    for &i in &os {
                        c = c * net.sizes[i] + x[i];
                    }
                    row[c] += p;
                }
                t.extend(row);
            }
        }
        for (t, o) in tables.into_iter().zip(outcomes) {
            out.insert((d, o), t);
        }
    }
    out
}
