use super::domain::Radix;
use super::{assignment_count, CausalModel, Distribution, EngineError, Kernel};
use crate::exec::Exec;
use crate::graph::NodeSet;

/// Full joint over every node, latents included, in declared order.
pub fn joint(m: &CausalModel) -> Distribution {
    joint_with(m, Exec::default())
}

pub fn joint_with(m: &CausalModel, exec: Exec) -> Distribution {
    let all: NodeSet = m.graph().nodes().iter().cloned().collect();
    let k = interventional_with(m, &NodeSet::new(), &all, exec).expect("all nodes are known");
    Distribution::new_unchecked(k.outputs().to_vec(), k.table().to_vec())
}

/// `p(outcome | do(do_set))` by truncated factorization.
///
/// Rows range over assignments of `do_set` and columns over assignments of
/// `outcome`, both in declared order.
pub fn interventional(m: &CausalModel, do_set: &NodeSet, outcome: &NodeSet) -> Result<Kernel, EngineError> {
    interventional_with(m, do_set, outcome, Exec::default())
}

pub fn interventional_with(
    m: &CausalModel,
    do_set: &NodeSet,
    outcome: &NodeSet,
    exec: Exec,
) -> Result<Kernel, EngineError> {
    for n in do_set.iter().chain(outcome) {
        m.index(n.as_str())?;
    }
    if let Some(n) = do_set.intersection(outcome).next() {
        return Err(EngineError::OverlappingQuery(n.clone()));
    }
    let plan = Plan::new(m, do_set, outcome);
    let inputs = m.vars_of(do_set)?;
    let outputs = m.vars_of(outcome)?;
    let cols = assignment_count(&outputs);
    let rows = exec.map(assignment_count(&inputs), |r| plan.row(r));
    let table: Vec<f64> = rows.into_iter().flatten().collect();
    debug_assert_eq!(table.len(), assignment_count(&inputs) * cols);
    Ok(Kernel::new_unchecked(inputs, outputs, table))
}

/// Every row of `k` is a point mass.
pub fn is_deterministic(k: &Kernel) -> bool {
    k.is_deterministic()
}

/// Precomputed enumeration order for one query.
///
/// Only outcome nodes and their ancestors in the mutilated graph are
/// enumerated; every other free node sums out to one.
struct Plan<'a> {
    m: &'a CausalModel,
    sizes: Vec<usize>,
    do_idx: Vec<usize>,
    do_radix: Radix,
    /// Free nodes in topological order.
    free: Vec<usize>,
    /// Per free node: parent indices and strides into its mechanism rows.
    parent_strides: Vec<Vec<(usize, usize)>>,
    out_idx: Vec<usize>,
    out_radix: Radix,
}

impl<'a> Plan<'a> {
    fn new(m: &'a CausalModel, do_set: &NodeSet, outcome: &NodeSet) -> Self {
        let g = m.graph();
        let sizes: Vec<usize> = m.variables().iter().map(|v| v.size()).collect();
        let idx = |s: &NodeSet| -> Vec<usize> {
            let mut v: Vec<usize> = s.iter().map(|n| g.index_of(n.as_str()).expect("checked")).collect();
            v.sort_unstable();
            v
        };
        let do_idx = idx(do_set);
        let out_idx = idx(outcome);
        let mut is_do = vec![false; g.len()];
        for &i in &do_idx {
            is_do[i] = true;
        }

        // Ancestors of the outcome, not crossing into intervened nodes.
        let mut relevant = vec![false; g.len()];
        let mut stack = out_idx.clone();
        while let Some(v) = stack.pop() {
            if relevant[v] {
                continue;
            }
            relevant[v] = true;
            if !is_do[v] {
                stack.extend(g.parent_indices(v).iter().copied());
            }
        }
        let free: Vec<usize> = g
            .topo_indices()
            .iter()
            .copied()
            .filter(|&v| relevant[v] && !is_do[v])
            .collect();
        let parent_strides = free
            .iter()
            .map(|&v| {
                let ps = g.parent_indices(v);
                let radix = Radix::new(ps.iter().map(|&p| sizes[p]).collect());
                ps.iter().copied().zip(radix.strides().iter().copied()).collect()
            })
            .collect();
        Plan {
            m,
            do_radix: Radix::new(do_idx.iter().map(|&i| sizes[i]).collect()),
            out_radix: Radix::new(out_idx.iter().map(|&i| sizes[i]).collect()),
            sizes,
            do_idx,
            free,
            parent_strides,
            out_idx,
        }
    }

    fn row(&self, r: usize) -> Vec<f64> {
        let mut values = vec![0usize; self.sizes.len()];
        for (&i, v) in self.do_idx.iter().zip(self.do_radix.decode(r)) {
            values[i] = v;
        }
        let mut out = vec![0.0; self.out_radix.total()];
        self.descend(0, 1.0, &mut values, &mut out);
        out
    }

    /// Depth-first over free nodes in topological order, pruning zero
    /// weights. Leaves are visited in a fixed order.
    fn descend(&self, depth: usize, weight: f64, values: &mut [usize], out: &mut [f64]) {
        if depth == self.free.len() {
            let col: usize = self
                .out_idx
                .iter()
                .zip(self.out_radix.strides())
                .map(|(&i, s)| values[i] * s)
                .sum();
            out[col] += weight;
            return;
        }
        let v = self.free[depth];
        let row: usize = self.parent_strides[depth].iter().map(|&(p, s)| values[p] * s).sum();
        let probs = self.m.mechanisms()[v].row(row);
        for (x, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            values[v] = x;
            self.descend(depth + 1, weight * p, values, out);
        }
    }
}
