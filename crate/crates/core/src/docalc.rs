//! The three do-calculus rules on a cluster ADMG, verified by brute force
//! on the low-level model.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::abstraction::{AbstractionReport, SquareResidual, Witness};
use crate::engine::{
    assignment_count, decode_assignment, describe_assignment, interventional, CausalModel, Domain, EngineError, Kernel,
    Projection, Radix, Variable, SEMANTIC_TOL, VALIDITY_TOL,
};
use crate::graph::{
    check_disjoint, latent_projection, Admg, ClusterMap, ClusterMapError, Dag, GraphError, NodeId, NodeSet,
    ValidatedClusterMap,
};

/// Largest joint domain a single cluster may have in brute-force checks.
pub const MAX_CLUSTER_VALUES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    /// Insertion or deletion of observations.
    One,
    /// Exchange of actions and observations.
    Two,
    /// Insertion or deletion of actions.
    Three,
}

impl Rule {
    pub fn from_number(n: u8) -> Option<Rule> {
        match n {
            1 => Some(Rule::One),
            2 => Some(Rule::Two),
            3 => Some(Rule::Three),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Rule::One => 1,
            Rule::Two => 2,
            Rule::Three => 3,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocalcError {
    #[error("the outcome set Y must not be empty")]
    EmptyOutcome,
    #[error("query mentions `{0}`, which is not a high-level node")]
    UnknownNode(NodeId),
    #[error("latent node `{0}` must not be clustered")]
    LatentClustered(NodeId),
    #[error("latent node `{0}` clashes with a high-level node name")]
    LatentNameClash(NodeId),
    #[error("cluster `{node}` has {size} joint values, more than {MAX_CLUSTER_VALUES}")]
    ClusterTooLarge { node: NodeId, size: usize },
    #[error("every conditioning assignment has zero probability; nothing was compared")]
    InconclusiveAllZeroMass,
    #[error(transparent)]
    ClusterMap(#[from] ClusterMapError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A rule with its pairwise disjoint node sets of the high graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleQuery {
    pub rule: Rule,
    pub x: NodeSet,
    pub y: NodeSet,
    pub z: NodeSet,
    pub w: NodeSet,
}

impl RuleQuery {
    pub fn new(rule: Rule, x: NodeSet, y: NodeSet, z: NodeSet, w: NodeSet) -> Result<Self, DocalcError> {
        if y.is_empty() {
            return Err(DocalcError::EmptyOutcome);
        }
        check_disjoint(&[&x, &y, &z, &w])?;
        Ok(RuleQuery { rule, x, y, z, w })
    }

    fn check_nodes(&self, nodes: &[NodeId]) -> Result<(), DocalcError> {
        for n in self.x.iter().chain(&self.y).chain(&self.z).chain(&self.w) {
            if !nodes.contains(n) {
                return Err(DocalcError::UnknownNode(n.clone()));
            }
        }
        Ok(())
    }

    /// The equality the rule licenses, in conventional notation.
    pub fn equality(&self) -> String {
        let (x, y, z, w) = (show(&self.x), show(&self.y), show(&self.z), show(&self.w));
        let given = |parts: &[String]| {
            let parts: Vec<&String> = parts.iter().filter(|p| !p.is_empty()).collect();
            if parts.is_empty() {
                String::new()
            } else {
                format!(" | {}", parts.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "))
            }
        };
        let act = |s: &str| {
            if s.is_empty() {
                String::new()
            } else {
                format!("do({s})")
            }
        };
        match self.rule {
            Rule::One => format!(
                "p({y}{}) = p({y}{})",
                given(&[act(&x), z.clone(), w.clone()]),
                given(&[act(&x), w.clone()])
            ),
            Rule::Two => format!(
                "p({y}{}) = p({y}{})",
                given(&[act(&x), act(&z), w.clone()]),
                given(&[act(&x), z.clone(), w.clone()])
            ),
            Rule::Three => format!(
                "p({y}{}) = p({y}{})",
                given(&[act(&x), act(&z), w.clone()]),
                given(&[act(&x), w.clone()])
            ),
        }
    }
}

fn show(s: &NodeSet) -> String {
    s.iter().map(NodeId::as_str).collect::<Vec<_>>().join(",")
}

/// Result of the graphical test for one rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Applicability {
    pub applicable: bool,
    /// The d-separation statement that was tested.
    pub statement: String,
    /// For rule 3, the members of Z that are not ancestors of W after
    /// removing edges into X; otherwise Z.
    pub surgered: NodeSet,
}

/// Tests the rule's d-separation condition on the surgered graph.
pub fn rule_applicable(h: &Admg, rq: &RuleQuery) -> Result<Applicability, DocalcError> {
    rq.check_nodes(h.nodes())?;
    let no_in_x = h.surgery_remove_incoming(&rq.x)?;
    let (g, surgered, graph_desc) = match rq.rule {
        Rule::One => (no_in_x, rq.z.clone(), format!("edges into {{{}}} removed", show(&rq.x))),
        Rule::Two => (
            no_in_x.surgery_remove_outgoing(&rq.z)?,
            rq.z.clone(),
            format!("edges into {{{}}} and out of {{{}}} removed", show(&rq.x), show(&rq.z)),
        ),
        Rule::Three => {
            let zw = no_in_x.non_ancestors_in(&rq.z, &rq.w)?;
            let desc = format!("edges into {{{}}} and into {{{}}} removed", show(&rq.x), show(&zw));
            (no_in_x.surgery_remove_incoming(&zw)?, zw, desc)
        }
    };
    let given: NodeSet = rq.x.union(&rq.w).cloned().collect();
    let applicable = g.d_separated(&rq.y, &rq.z, &given)?;
    let statement = format!(
        "({} ⟂ {} | {}) in H with {graph_desc}",
        show(&rq.y),
        show(&rq.z),
        show(&given)
    );
    Ok(Applicability {
        applicable,
        statement,
        surgered,
    })
}

/// Cluster ADMG of a low graph with latents, together with the clustered
/// DAG it projects from.
#[derive(Clone, Debug)]
pub struct ClusterAdmg {
    /// Clusters merged, removed nodes deleted, latents kept.
    pub dag: Dag,
    /// Latent projection of `dag` onto the high nodes.
    pub admg: Admg,
    /// The cluster map extended by one singleton cluster per latent.
    pub extended: ValidatedClusterMap,
    pub latent: NodeSet,
}

/// Builds the high ADMG: clusters are merged as in a graphical abstraction
/// with latents kept, and the result is projected onto the high nodes.
pub fn high_admg_from_cluster_map(low: &Dag, latent: &NodeSet, cm: &ClusterMap) -> Result<ClusterAdmg, DocalcError> {
    for u in latent {
        if !low.contains(u.as_str()) {
            return Err(GraphError::UnknownNode(u.clone()).into());
        }
        if cm.image(u.as_str()).is_some() {
            return Err(DocalcError::LatentClustered(u.clone()));
        }
        if cm.high_nodes().contains(u) {
            return Err(DocalcError::LatentNameClash(u.clone()));
        }
    }
    let mut clusters: Vec<(NodeId, Vec<NodeId>)> = cm
        .high_nodes()
        .iter()
        .map(|h| (h.clone(), cm.cluster(h.as_str()).expect("listed").to_vec()))
        .collect();
    clusters.extend(
        low.nodes()
            .iter()
            .filter(|n| latent.contains(*n))
            .map(|u| (u.clone(), vec![u.clone()])),
    );
    let removed: Vec<NodeId> = cm.removed().into_iter().filter(|n| !latent.contains(n)).collect();
    let ext = ClusterMap::from_clusters(low.nodes(), clusters, removed)?;
    let extended = ValidatedClusterMap::derive(low, &ext)?;
    let dag = extended.high_graph().clone();
    let observed: NodeSet = cm.high_nodes().iter().cloned().collect();
    let admg = latent_projection(&dag, &observed)?;
    Ok(ClusterAdmg {
        dag,
        admg,
        extended,
        latent: latent.clone(),
    })
}

/// Residual of one (do, evidence) assignment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssignmentResidual {
    pub assignment: String,
    pub residual: f64,
}

/// Numeric comparison of both sides of a rule on the low model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleReport {
    pub rule: Rule,
    pub equality: String,
    pub tolerance: f64,
    pub residual: f64,
    pub checked: usize,
    pub skipped: usize,
    pub assignments: Vec<AssignmentResidual>,
    pub witnesses: Vec<Witness>,
    pub passed: bool,
}

/// Computes both sides of the rule's equality on the low model for every
/// assignment of the cluster values involved.
///
/// Assignments whose conditioning events have probability at most 1e-12
/// are skipped and counted.
pub fn verify_rule_on_low(low: &CausalModel, cm: &ClusterMap, rq: &RuleQuery) -> Result<RuleReport, DocalcError> {
    let ca = high_admg_from_cluster_map(low.graph(), low.latent(), cm)?;
    rq.check_nodes(ca.admg.nodes())?;
    for h in rq.x.iter().chain(&rq.y).chain(&rq.z).chain(&rq.w) {
        let vars = low.vars_of(&cm.expand(&NodeSet::from([h.clone()]))?)?;
        let size = assignment_count(&vars);
        if size > MAX_CLUSTER_VALUES {
            return Err(DocalcError::ClusterTooLarge { node: h.clone(), size });
        }
    }
    let x = cm.expand(&rq.x)?;
    let y = cm.expand(&rq.y)?;
    let z = cm.expand(&rq.z)?;
    let w = cm.expand(&rq.w)?;
    let xv = low.vars_of(&x)?;
    let yv = low.vars_of(&y)?;
    let zv = low.vars_of(&z)?;
    let wv = low.vars_of(&w)?;
    let (ny, nz, nw) = (assignment_count(&yv), assignment_count(&zv), assignment_count(&wv));
    let union = |sets: &[&NodeSet]| -> NodeSet { sets.iter().flat_map(|s| s.iter().cloned()).collect() };

    // p(Y, Z, W | do(X)): used by every rule.
    let obs = interventional(low, &x, &union(&[&y, &z, &w]))?;
    let obs_t = Tables::new(&obs, &yv, &zv, &wv)?;
    // p(Y, W | do(X, Z)) for rules 2 and 3.
    let act = match rq.rule {
        Rule::One => None,
        _ => {
            let k = interventional(low, &union(&[&x, &z]), &union(&[&y, &w]))?;
            let t = Tables::new(&k, &yv, &[], &wv)?;
            let xp = Projection::new(k.inputs(), &names(&xv))?;
            let zp = Projection::new(k.inputs(), &names(&zv))?;
            let mut index = vec![0usize; assignment_count(&xv) * nz];
            let radix = Radix::of(k.inputs());
            for r in 0..k.rows() {
                let vals = radix.decode(r);
                index[xp.index(&vals) * nz + zp.index(&vals)] = r;
            }
            Some((k, t, index))
        }
    };

    let mut report = RuleReport {
        rule: rq.rule,
        equality: rq.equality(),
        tolerance: SEMANTIC_TOL,
        residual: 0.0,
        checked: 0,
        skipped: 0,
        assignments: Vec::new(),
        witnesses: Vec::new(),
        passed: true,
    };
    for xi in 0..assignment_count(&xv) {
        let t = obs_t.row(&obs, xi);
        for zi in 0..nz {
            for wi in 0..nw {
                let m_zw: f64 = (0..ny).map(|yi| t[(yi * nz + zi) * nw + wi]).sum();
                let m_w: f64 = (0..ny)
                    .flat_map(|yi| (0..nz).map(move |z2| (yi, z2)))
                    .map(|(yi, z2)| t[(yi * nz + z2) * nw + wi])
                    .sum();
                let acted = act.as_ref().map(|(k, tab, index)| tab.row(k, index[xi * nz + zi]));
                let m_act: f64 = acted.as_ref().map_or(1.0, |u| (0..ny).map(|yi| u[yi * nw + wi]).sum());
                let needed = match rq.rule {
                    Rule::One => m_zw,
                    Rule::Two => m_zw.min(m_act),
                    Rule::Three => m_w.min(m_act),
                };
                if needed <= VALIDITY_TOL {
                    report.skipped += 1;
                    continue;
                }
                let mut worst: f64 = 0.0;
                for yi in 0..ny {
                    let cond_zw = t[(yi * nz + zi) * nw + wi] / m_zw.max(f64::MIN_POSITIVE);
                    let cond_w = (0..nz).map(|z2| t[(yi * nz + z2) * nw + wi]).sum::<f64>() / m_w;
                    let do_z = acted.as_ref().map_or(0.0, |u| u[yi * nw + wi] / m_act);
                    let (lhs, rhs) = match rq.rule {
                        Rule::One => (cond_zw, cond_w),
                        Rule::Two => (do_z, cond_zw),
                        Rule::Three => (do_z, cond_w),
                    };
                    let d = (lhs - rhs).abs();
                    worst = worst.max(d);
                    if d.is_nan() || d > SEMANTIC_TOL {
                        report.witnesses.push(Witness {
                            square: report.equality.clone(),
                            input: describe_xzw(&xv, xi, &zv, zi, &wv, wi),
                            output: describe_assignment(&yv, &decode_assignment(&yv, yi)),
                            lhs,
                            rhs,
                        });
                    }
                }
                report.checked += 1;
                report.residual = report.residual.max(worst);
                report.assignments.push(AssignmentResidual {
                    assignment: describe_xzw(&xv, xi, &zv, zi, &wv, wi),
                    residual: worst,
                });
            }
        }
    }
    if report.checked == 0 {
        return Err(DocalcError::InconclusiveAllZeroMass);
    }
    report.passed = report.residual <= SEMANTIC_TOL;
    Ok(report)
}

fn names(vars: &[Variable]) -> Vec<NodeId> {
    vars.iter().map(|v| v.name.clone()).collect()
}

fn describe_xzw(xv: &[Variable], xi: usize, zv: &[Variable], zi: usize, wv: &[Variable], wi: usize) -> String {
    let parts: Vec<String> = [
        describe_assignment(xv, &decode_assignment(xv, xi)),
        describe_assignment(zv, &decode_assignment(zv, zi)),
        describe_assignment(wv, &decode_assignment(wv, wi)),
    ]
    .into_iter()
    .filter(|s| !s.is_empty())
    .collect();
    parts.join(", ")
}

/// Reindexes kernel rows as dense `[y][z][w]` arrays.
struct Tables {
    columns: Vec<usize>,
}

impl Tables {
    fn new(k: &Kernel, yv: &[Variable], zv: &[Variable], wv: &[Variable]) -> Result<Self, DocalcError> {
        let out = k.outputs();
        let (py, pz, pw) = (
            Projection::new(out, &names(yv))?,
            Projection::new(out, &names(zv))?,
            Projection::new(out, &names(wv))?,
        );
        let (nz, nw) = (assignment_count(zv), assignment_count(wv));
        let radix = Radix::of(out);
        let columns = (0..k.cols())
            .map(|c| {
                let v = radix.decode(c);
                (py.index(&v) * nz + pz.index(&v)) * nw + pw.index(&v)
            })
            .collect();
        Ok(Tables { columns })
    }

    fn row(&self, k: &Kernel, r: usize) -> Vec<f64> {
        let mut t = vec![0.0; self.columns.len()];
        for (c, &p) in k.row(r).iter().enumerate() {
            t[self.columns[c]] += p;
        }
        t
    }
}

/// Maps joint cluster values to low assignments for a list of cluster
/// nodes.
struct ClusterCoding {
    low_vars: Vec<Variable>,
    /// Per cluster node: member positions in `low_vars` and member radix.
    members: Vec<(Vec<usize>, Radix)>,
    radix: Radix,
}

impl ClusterCoding {
    fn new(low: &CausalModel, cm: &ClusterMap, nodes: &[NodeId]) -> Result<Self, DocalcError> {
        let set: NodeSet = nodes.iter().cloned().collect();
        let low_vars = low.vars_of(&cm.expand(&set)?)?;
        let mut members = Vec::new();
        let mut sizes = Vec::new();
        for h in nodes {
            let vars = low.vars_of(&cm.expand(&NodeSet::from([h.clone()]))?)?;
            let pos = vars
                .iter()
                .map(|v| low_vars.iter().position(|u| u.name == v.name).expect("member"))
                .collect();
            let r = Radix::of(&vars);
            sizes.push(r.total());
            members.push((pos, r));
        }
        Ok(ClusterCoding {
            low_vars,
            members,
            radix: Radix::new(sizes),
        })
    }

    fn total(&self) -> usize {
        self.radix.total()
    }

    /// Low assignment index of a clustered assignment index.
    fn low_index(&self, clustered: usize) -> usize {
        let mut values = vec![0usize; self.low_vars.len()];
        for ((pos, r), v) in self.members.iter().zip(self.radix.decode(clustered)) {
            for (&p, x) in pos.iter().zip(r.decode(v)) {
                values[p] = x;
            }
        }
        Radix::of(&self.low_vars).encode(&values)
    }
}

fn cluster_domain(low: &CausalModel, cm: &ClusterMap, h: &NodeId) -> Result<Domain, DocalcError> {
    let vars = low.vars_of(&cm.expand(&NodeSet::from([h.clone()]))?)?;
    if let [v] = vars.as_slice() {
        return Ok(v.domain.clone());
    }
    let labels: Vec<String> = (0..assignment_count(&vars))
        .map(|i| {
            let vals = decode_assignment(&vars, i);
            vars.iter()
                .zip(vals)
                .map(|(v, x)| v.domain.label(x).to_owned())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    Ok(Domain::new(labels.clone()).or_else(|_| Ok::<_, EngineError>(Domain::range(labels.len())))?)
}

/// The model over the clustered DAG whose mechanisms are the low
/// interventional kernels of each cluster given its clustered parents.
/// Cluster values are low assignments in mixed radix over the members.
pub fn clustered_model(low: &CausalModel, cm: &ClusterMap) -> Result<(CausalModel, ClusterAdmg), DocalcError> {
    let ca = high_admg_from_cluster_map(low.graph(), low.latent(), cm)?;
    let ext = ca.extended.map();
    let dag = &ca.dag;
    let mut domains = Vec::with_capacity(dag.len());
    for h in dag.nodes() {
        domains.push(cluster_domain(low, ext, h)?);
    }
    let mut tables = Vec::with_capacity(dag.len());
    for h in dag.nodes() {
        let parents = dag.parent_list(h.as_str())?;
        let pc = ClusterCoding::new(low, ext, &parents)?;
        let oc = ClusterCoding::new(low, ext, std::slice::from_ref(h))?;
        let k = interventional(
            low,
            &pc.low_vars.iter().map(|v| v.name.clone()).collect(),
            &oc.low_vars.iter().map(|v| v.name.clone()).collect(),
        )?;
        let mut table = Vec::with_capacity(pc.total() * oc.total());
        for r in 0..pc.total() {
            let lr = pc.low_index(r);
            for c in 0..oc.total() {
                table.push(k.get(lr, oc.low_index(c)));
            }
        }
        tables.push(table);
    }
    let m = CausalModel::from_tables(dag.clone(), ca.latent.clone(), domains, tables)?;
    Ok((m, ca))
}

/// Compares the clustered model with the low model on the observational
/// distribution and on every single-cluster intervention, over all high
/// nodes other than the intervened one.
pub fn check_clustered_factorization(low: &CausalModel, cm: &ClusterMap) -> Result<AbstractionReport, DocalcError> {
    let (clustered, ca) = clustered_model(low, cm)?;
    let ext = ca.extended.map();
    let high: Vec<NodeId> = ca.admg.nodes().to_vec();
    let mut report = AbstractionReport::new("clustered factorization", SEMANTIC_TOL);
    let mut targets: Vec<Option<&NodeId>> = vec![None];
    targets.extend(high.iter().map(Some));
    for a in targets {
        let do_set: NodeSet = a.into_iter().cloned().collect();
        let rest: Vec<NodeId> = high.iter().filter(|n| !do_set.contains(*n)).cloned().collect();
        let rest_set: NodeSet = rest.iter().cloned().collect();
        let hk = interventional(&clustered, &do_set, &rest_set)?;
        let lk = interventional(low, &ext.expand(&do_set)?, &ext.expand(&rest_set)?)?;
        // Clustered outputs are listed in clustered declared order.
        let ordered: Vec<NodeId> = clustered
            .graph()
            .nodes()
            .iter()
            .filter(|n| rest_set.contains(*n))
            .cloned()
            .collect();
        let oc = ClusterCoding::new(low, ext, &ordered)?;
        let mut residual = SquareResidual {
            square: match a {
                None => "observational".to_owned(),
                Some(a) => format!("do({a})"),
            },
            residual: 0.0,
            checked: 0,
            skipped: 0,
        };
        let mut witnesses = Vec::new();
        for r in 0..hk.rows() {
            for c in 0..hk.cols() {
                let (lhs, rhs) = (hk.get(r, c), lk.get(r, oc.low_index(c)));
                let d = (lhs - rhs).abs();
                residual.checked += 1;
                residual.residual = residual.residual.max(d);
                if d.is_nan() || d > SEMANTIC_TOL {
                    witnesses.push(Witness {
                        square: residual.square.clone(),
                        input: describe_assignment(hk.inputs(), &decode_assignment(hk.inputs(), r)),
                        output: describe_assignment(hk.outputs(), &decode_assignment(hk.outputs(), c)),
                        lhs,
                        rhs,
                    });
                }
            }
        }
        report.passed &= residual.residual <= SEMANTIC_TOL;
        report.squares.push(residual);
        report.witnesses.extend(witnesses);
    }
    Ok(report)
}
