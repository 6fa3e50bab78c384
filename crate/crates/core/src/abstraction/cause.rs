use super::report::{AbstractionReport, SquarePart};
use super::tau::{cluster_vars, epsilon_from_tau};
use super::{AbstractionError, Setting, TauFamily};
use crate::engine::{
    decode_assignment, describe_assignment, interventional_with, CausalModel, Domain, Kernel, Variable, SEMANTIC_TOL,
};
use crate::exec::Exec;
use crate::graph::{ClusterMap, NodeId, NodeSet, ValidatedClusterMap};
use crate::queries::{enumerate_queries, Query};

/// Which interventional queries the consistency check covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// `p(B | do(A))` for ordered pairs of distinct single high nodes.
    Nodes,
    /// `p(Y | do(X))` for all disjoint `X`, `Y` with `Y` nonempty.
    Subsets,
}

/// Compares, for every high node `A`, the low mechanism of the cluster of
/// `A` given the clusters of its high parents, pushed through `τ_A`, with
/// the high mechanism of `A` evaluated at the τ-image of the parents.
pub fn check_naturality(
    low: &CausalModel,
    high: &CausalModel,
    cm: &ClusterMap,
    tau: &TauFamily,
) -> Result<AbstractionReport, AbstractionError> {
    check_naturality_with(low, high, cm, tau, Exec::default())
}

pub fn check_naturality_with(
    low: &CausalModel,
    high: &CausalModel,
    cm: &ClusterMap,
    tau: &TauFamily,
    exec: Exec,
) -> Result<AbstractionReport, AbstractionError> {
    let s = Setting::new(low, high, cm)?;
    tau.check(low, high, cm)?;
    let nodes = high.graph().nodes();
    let parts = exec.map_slice(nodes, |a| naturality_square(&s, tau, a, exec));
    let mut report = AbstractionReport::new("naturality", SEMANTIC_TOL);
    for part in parts {
        report.push(part?);
    }
    Ok(report)
}

fn naturality_square(s: &Setting, tau: &TauFamily, a: &NodeId, exec: Exec) -> Result<SquarePart, AbstractionError> {
    let parents = s.high.graph().parents(a.as_str())?;
    let low_parents = s.cm.expand(&parents)?;
    let cluster: NodeSet = s.cm.expand(&NodeSet::from([a.clone()]))?;
    let pushed = interventional_with(s.low, &low_parents, &cluster, exec)?.push_forward(tau.get(a.as_str())?)?;
    let tau_pa = tau.product(s.low, s.high, &s.cm, &parents)?;
    let mech = s.high.mechanism(a.as_str())?;
    let mut part = SquarePart::new(format!("mechanism of {a}"), SEMANTIC_TOL);
    compare_rows(&mut part, &pushed, mech, |r| tau_pa.apply(r));
    Ok(part)
}

/// Compares row `r` of `low` with row `row_map(r)` of `high` entrywise.
fn compare_rows(part: &mut SquarePart, low: &Kernel, high: &Kernel, row_map: impl Fn(usize) -> usize) {
    for r in 0..low.rows() {
        let hr = row_map(r);
        for c in 0..low.cols() {
            part.compare(
                low.get(r, c),
                high.get(hr, c),
                || describe_assignment(low.inputs(), &decode_assignment(low.inputs(), r)),
                || describe_assignment(low.outputs(), &decode_assignment(low.outputs(), c)),
            );
        }
    }
}

/// Compares low interventional distributions pushed through τ with the
/// high ones, for every query in `scope`.
pub fn check_interventional_consistency(
    low: &CausalModel,
    high: &CausalModel,
    cm: &ClusterMap,
    tau: &TauFamily,
    scope: Scope,
) -> Result<AbstractionReport, AbstractionError> {
    check_interventional_consistency_with(low, high, cm, tau, scope, Exec::default())
}

pub fn check_interventional_consistency_with(
    low: &CausalModel,
    high: &CausalModel,
    cm: &ClusterMap,
    tau: &TauFamily,
    scope: Scope,
    exec: Exec,
) -> Result<AbstractionReport, AbstractionError> {
    let s = Setting::new(low, high, cm)?;
    tau.check(low, high, cm)?;
    let queries = scope_queries(high, scope);
    let parts = exec.map_slice(&queries, |q| consistency_square(&s, tau, q, exec));
    let name = match scope {
        Scope::Nodes => "interventional consistency (nodes)",
        Scope::Subsets => "interventional consistency (subsets)",
    };
    let mut report = AbstractionReport::new(name, SEMANTIC_TOL);
    for part in parts {
        report.push(part?);
    }
    Ok(report)
}

fn scope_queries(high: &CausalModel, scope: Scope) -> Vec<Query> {
    match scope {
        Scope::Subsets => enumerate_queries(high.graph())
            .into_iter()
            .filter(|q| !q.outcome().is_empty())
            .collect(),
        Scope::Nodes => {
            let nodes = high.graph().nodes();
            let mut out = Vec::new();
            for a in nodes {
                for b in nodes.iter().filter(|b| *b != a) {
                    out.push(
                        Query::new(NodeSet::from([a.clone()]), NodeSet::from([b.clone()])).expect("distinct nodes"),
                    );
                }
            }
            out
        }
    }
}

fn consistency_square(s: &Setting, tau: &TauFamily, q: &Query, exec: Exec) -> Result<SquarePart, AbstractionError> {
    let low_do = s.cm.expand(q.do_set())?;
    let low_out = s.cm.expand(q.outcome())?;
    let tau_out = tau.product(s.low, s.high, &s.cm, q.outcome())?;
    let tau_do = tau.product(s.low, s.high, &s.cm, q.do_set())?;
    let pushed = interventional_with(s.low, &low_do, &low_out, exec)?.push_forward(&tau_out)?;
    let high = interventional_with(s.high, q.do_set(), q.outcome(), exec)?;
    let mut part = SquarePart::new(q.to_string(), SEMANTIC_TOL);
    compare_rows(&mut part, &pushed, &high, |r| tau_do.apply(r));
    Ok(part)
}

/// High graph and variables implied by `cm` and `tau`, in the order of the
/// abstracted graph.
fn derived_shape(
    low: &CausalModel,
    cm: &ClusterMap,
    tau: &TauFamily,
) -> Result<(ValidatedClusterMap, Vec<Variable>), AbstractionError> {
    let vcm = ValidatedClusterMap::derive(low.graph(), cm)?;
    let mut vars = Vec::new();
    for h in vcm.high_graph().nodes() {
        let comp = tau.get(h.as_str())?;
        let want = cluster_vars(low, cm, h)?;
        if comp.inputs() != want.as_slice() {
            return Err(AbstractionError::Shape(format!(
                "tau component for `{h}` does not match its cluster"
            )));
        }
        if !comp.is_surjective() {
            return Err(AbstractionError::NotSurjective(h.clone()));
        }
        vars.push(comp.outputs()[0].clone());
    }
    Ok((vcm, vars))
}

fn parent_vars(vcm: &ValidatedClusterMap, vars: &[Variable], a: &NodeId) -> Result<Vec<Variable>, AbstractionError> {
    let parents = vcm.high_graph().parents(a.as_str())?;
    Ok(vars.iter().filter(|v| parents.contains(&v.name)).cloned().collect())
}

fn assemble(
    vcm: &ValidatedClusterMap,
    vars: Vec<Variable>,
    tables: Vec<Vec<f64>>,
) -> Result<CausalModel, AbstractionError> {
    let domains: Vec<Domain> = vars.into_iter().map(|v| v.domain).collect();
    Ok(CausalModel::from_tables(
        vcm.high_graph().clone(),
        NodeSet::new(),
        domains,
        tables,
    )?)
}

/// Candidate high model whose mechanism row for high parent values `b~` is
/// the low mechanism at the first low preimage of `b~`, pushed through τ.
///
/// The result is a construction aid; it is an abstraction exactly when the
/// pushed rows do not depend on the chosen preimage.
pub fn derive_high_by_pushforward(
    low: &CausalModel,
    cm: &ClusterMap,
    tau: &TauFamily,
) -> Result<CausalModel, AbstractionError> {
    let (vcm, vars) = derived_shape(low, cm, tau)?;
    let mut tables = Vec::with_capacity(vars.len());
    for a in vcm.high_graph().nodes() {
        let pvars = parent_vars(&vcm, &vars, a)?;
        let tau_pa = tau.product_over(low, cm, pvars)?;
        let low_parents = cm.expand(&tau_pa.outputs().iter().map(|v| v.name.clone()).collect())?;
        let cluster = cm.expand(&NodeSet::from([a.clone()]))?;
        let pushed = crate::engine::interventional(low, &low_parents, &cluster)?.push_forward(tau.get(a.as_str())?)?;
        let mut table = Vec::with_capacity(tau_pa.output_count() * pushed.cols());
        for hb in 0..tau_pa.output_count() {
            let rep = *tau_pa
                .preimage(hb)
                .first()
                .ok_or_else(|| AbstractionError::NotSurjective(a.clone()))?;
            table.extend_from_slice(pushed.row(rep));
        }
        tables.push(table);
    }
    assemble(&vcm, vars, tables)
}

/// Candidate high model whose mechanism row for `b~` averages the low
/// mechanism pushed through τ over `ε(b | b~)`, with ε from
/// [`epsilon_from_tau`].
pub fn derive_high_by_effect(
    low: &CausalModel,
    cm: &ClusterMap,
    tau: &TauFamily,
) -> Result<CausalModel, AbstractionError> {
    let (vcm, vars) = derived_shape(low, cm, tau)?;
    let eps = epsilon_from_tau(low, cm, tau)?;
    let mut tables = Vec::with_capacity(vars.len());
    for a in vcm.high_graph().nodes() {
        let pvars = parent_vars(&vcm, &vars, a)?;
        let eps_pa = eps.product_over(low, cm, pvars)?;
        let low_parents: NodeSet = eps_pa.outputs().iter().map(|v| v.name.clone()).collect();
        let cluster = cm.expand(&NodeSet::from([a.clone()]))?;
        let pushed = crate::engine::interventional(low, &low_parents, &cluster)?.push_forward(tau.get(a.as_str())?)?;
        tables.push(eps_pa.compose(&pushed)?.table().to_vec());
    }
    assemble(&vcm, vars, tables)
}
