use super::report::{AbstractionReport, SquarePart};
use super::tau::{cluster_vars, left_inverse};
use super::{AbstractionError, EpsilonFamily, Setting, TauFamily};
use crate::engine::{
    decode_assignment, describe_assignment, interventional_with, CausalModel, Kernel, Variable, SEMANTIC_TOL,
    VALIDITY_TOL,
};
use crate::exec::Exec;
use crate::graph::{ClusterMap, NodeId, NodeSet, ValidatedClusterMap};

/// Checks ε as a transformation from the high model to the low one.
///
/// For every high node `A` this compares the high mechanism followed by
/// `ε_A` with `ε` of the parents followed by the low mechanism of the
/// cluster, compares the high marginal of `A` pushed through `ε_A` with
/// the low marginal of the cluster, and checks that each row of `ε_A` with
/// positive cluster mass is the low distribution conditioned on the
/// cluster value.
pub fn check_effect_focused(
    low: &CausalModel,
    high: &CausalModel,
    cm: &ClusterMap,
    eps: &EpsilonFamily,
) -> Result<AbstractionReport, AbstractionError> {
    check_effect_focused_with(low, high, cm, eps, Exec::default())
}

pub fn check_effect_focused_with(
    low: &CausalModel,
    high: &CausalModel,
    cm: &ClusterMap,
    eps: &EpsilonFamily,
    exec: Exec,
) -> Result<AbstractionReport, AbstractionError> {
    let s = Setting::new(low, high, cm)?;
    eps.check(low, high, cm)?;
    let nodes = high.graph().nodes();
    for a in nodes {
        if left_inverse(eps.get(a.as_str())?).is_none() {
            return Err(AbstractionError::NoLeftInverse(a.clone()));
        }
    }
    let parts = exec.map_slice(nodes, |a| effect_squares(&s, eps, a, exec));
    let mut report = AbstractionReport::new("effect-focused", SEMANTIC_TOL);
    for triple in parts {
        for part in triple? {
            report.push(part);
        }
    }
    Ok(report)
}

fn effect_squares(
    s: &Setting,
    eps: &EpsilonFamily,
    a: &NodeId,
    exec: Exec,
) -> Result<Vec<SquarePart>, AbstractionError> {
    let eps_a = eps.get(a.as_str())?;
    let parents = s.high.graph().parents(a.as_str())?;
    let cluster = s.cm.expand(&NodeSet::from([a.clone()]))?;
    let low_parents = s.cm.expand(&parents)?;

    let lhs = s.high.mechanism(a.as_str())?.compose(eps_a)?;
    let rhs = eps
        .product(s.low, s.high, &s.cm, &parents)?
        .compose(&interventional_with(s.low, &low_parents, &cluster, exec)?)?;
    let mut mechanism = SquarePart::new(format!("mechanism of {a}"), SEMANTIC_TOL);
    compare_same(&mut mechanism, &lhs, &rhs);

    let high_marginal = interventional_with(s.high, &NodeSet::new(), &NodeSet::from([a.clone()]), exec)?;
    let low_marginal = interventional_with(s.low, &NodeSet::new(), &cluster, exec)?;
    let mut marginal = SquarePart::new(format!("marginal of {a}"), SEMANTIC_TOL);
    compare_same(&mut marginal, &high_marginal.compose(eps_a)?, &low_marginal);

    let lambda = left_inverse(eps_a).expect("checked by caller");
    let mut mass = vec![0.0; lambda.output_count()];
    for (x, &p) in low_marginal.row(0).iter().enumerate() {
        mass[lambda.apply(x)] += p;
    }
    let mut transition = SquarePart::new(format!("transition of {a}"), SEMANTIC_TOL);
    for (h, &m) in mass.iter().enumerate() {
        if m <= VALIDITY_TOL {
            transition.skip(eps_a.cols());
            continue;
        }
        for x in 0..eps_a.cols() {
            let expected = if lambda.apply(x) == h {
                low_marginal.get(0, x) / m
            } else {
                0.0
            };
            transition.compare(
                eps_a.get(h, x),
                expected,
                || describe_assignment(eps_a.inputs(), &[h]),
                || describe_assignment(eps_a.outputs(), &decode_assignment(eps_a.outputs(), x)),
            );
        }
    }
    Ok(vec![mechanism, marginal, transition])
}

fn compare_same(part: &mut SquarePart, lhs: &Kernel, rhs: &Kernel) {
    for r in 0..lhs.rows() {
        for c in 0..lhs.cols() {
            part.compare(
                lhs.get(r, c),
                rhs.get(r, c),
                || describe_assignment(lhs.inputs(), &decode_assignment(lhs.inputs(), r)),
                || describe_assignment(lhs.outputs(), &decode_assignment(lhs.outputs(), c)),
            );
        }
    }
}

/// Checks `p(a | b~) = ε_A(a | a~) · p(a~ | b~)` for every high node `A`,
/// low cluster value `a` and high parent value `b~`, with ε the cluster
/// conditionals of the low observational distribution and
/// `p(a | b~) = Σ_b ε(b | b~) p(a | do(b))`.
///
/// Entries whose conditioning events have zero mass are skipped and
/// counted rather than failed.
pub fn check_sufficient_statistic(
    low: &CausalModel,
    cm: &ClusterMap,
    tau: &TauFamily,
) -> Result<AbstractionReport, AbstractionError> {
    let vcm = ValidatedClusterMap::derive(low.graph(), cm)?;
    let mut vars: Vec<Variable> = Vec::new();
    let mut eps_parts = Vec::new();
    let mut defined = std::collections::BTreeMap::new();
    let mut marginals = std::collections::BTreeMap::new();
    for h in vcm.high_graph().nodes() {
        let comp = tau.get(h.as_str())?;
        let cvars = cluster_vars(low, cm, h)?;
        if comp.inputs() != cvars.as_slice() {
            return Err(AbstractionError::Shape(format!(
                "tau component for `{h}` does not match its cluster"
            )));
        }
        if !comp.is_surjective() {
            return Err(AbstractionError::NotSurjective(h.clone()));
        }
        let names: NodeSet = cvars.iter().map(|v| v.name.clone()).collect();
        let marginal = crate::engine::interventional(low, &NodeSet::new(), &names)?;
        let (k, ok) = partial_epsilon(marginal.row(0), comp);
        eps_parts.push(k);
        defined.insert(h.clone(), ok);
        marginals.insert(h.clone(), marginal);
        vars.push(comp.outputs()[0].clone());
    }
    let eps = EpsilonFamily::new(eps_parts)?;

    let mut report = AbstractionReport::new("sufficient statistic", SEMANTIC_TOL);
    for a in vcm.high_graph().nodes() {
        let parents = vcm.high_graph().parents(a.as_str())?;
        let pvars: Vec<Variable> = vars.iter().filter(|v| parents.contains(&v.name)).cloned().collect();
        let eps_pa = eps.product_over(low, cm, pvars.clone())?;
        let low_parents: NodeSet = eps_pa.outputs().iter().map(|v| v.name.clone()).collect();
        let cluster = cm.expand(&NodeSet::from([a.clone()]))?;
        let given = eps_pa.compose(&crate::engine::interventional(low, &low_parents, &cluster)?)?;
        let tau_a = tau.get(a.as_str())?;
        let eps_a = eps.get(a.as_str())?;
        let p_a = marginals[a].row(0);

        let mut part = SquarePart::new(format!("sufficiency of {a}"), SEMANTIC_TOL);
        for hb in 0..given.rows() {
            let hv = decode_assignment(&pvars, hb);
            let usable = pvars.iter().zip(&hv).all(|(v, &x)| defined[&v.name][x]);
            if !usable {
                part.skip(given.cols());
                continue;
            }
            let row = given.row(hb);
            let mut cluster_mass = vec![0.0; tau_a.output_count()];
            for (x, &p) in row.iter().enumerate() {
                cluster_mass[tau_a.apply(x)] += p;
            }
            for (x, &lhs) in row.iter().enumerate() {
                if p_a[x] <= VALIDITY_TOL {
                    part.skip(1);
                    continue;
                }
                let ha = tau_a.apply(x);
                part.compare(
                    lhs,
                    eps_a.get(ha, x) * cluster_mass[ha],
                    || describe_assignment(&pvars, &hv),
                    || describe_assignment(eps_a.outputs(), &decode_assignment(eps_a.outputs(), x)),
                );
            }
        }
        report.push(part);
    }
    Ok(report)
}

/// Cluster conditionals of `probs`; rows with zero mass are uniform on the
/// preimage and flagged as undefined.
fn partial_epsilon(probs: &[f64], tau: &crate::engine::FiniteMap) -> (Kernel, Vec<bool>) {
    let rows = tau.output_count();
    let cols = tau.input_count();
    let mut mass = vec![0.0; rows];
    for (x, &p) in probs.iter().enumerate() {
        mass[tau.apply(x)] += p;
    }
    let mut table = vec![0.0; rows * cols];
    let mut ok = vec![true; rows];
    for (r, &m) in mass.iter().enumerate() {
        let pre = tau.preimage(r);
        if m <= VALIDITY_TOL {
            ok[r] = false;
            for &x in &pre {
                table[r * cols + x] = 1.0 / pre.len() as f64;
            }
        } else {
            for &x in &pre {
                table[r * cols + x] = probs[x] / m;
            }
        }
    }
    let k = Kernel::new_unchecked(tau.outputs().to_vec(), tau.inputs().to_vec(), table);
    (k, ok)
}
