use super::{Domain, EngineError, Kernel, Variable};
use crate::graph::{latent_projection, Admg, Dag, GraphError, NodeId, NodeSet};

/// Causal Bayesian network: a DAG, a domain per node and one mechanism per
/// node.
///
/// Mechanism inputs are the node's parents in declared order; the single
/// output is the node itself.
#[derive(Clone, Debug, PartialEq)]
pub struct CausalModel {
    graph: Dag,
    latent: NodeSet,
    vars: Vec<Variable>,
    mechanisms: Vec<Kernel>,
}

impl CausalModel {
    /// Assembles and validates a model. `domains` and `mechanisms` follow
    /// the declared node order of `graph`.
    pub fn new(
        graph: Dag,
        latent: NodeSet,
        domains: Vec<Domain>,
        mechanisms: Vec<Kernel>,
    ) -> Result<Self, EngineError> {
        if domains.len() != graph.len() {
            return Err(EngineError::ShapeMismatch(format!(
                "{} domains for {} nodes",
                domains.len(),
                graph.len()
            )));
        }
        if mechanisms.len() != graph.len() {
            let missing = graph.nodes()[mechanisms.len().min(graph.len().saturating_sub(1))].clone();
            return Err(EngineError::MissingMechanism(missing));
        }
        let vars = graph
            .nodes()
            .iter()
            .zip(domains)
            .map(|(n, d)| Variable::new(n.clone(), d))
            .collect();
        let m = CausalModel {
            graph,
            latent,
            vars,
            mechanisms,
        };
        validate_model(&m)?;
        Ok(m)
    }

    /// Builds a model from raw row-major tables, one per node, with parents
    /// in declared order.
    pub fn from_tables(
        graph: Dag,
        latent: NodeSet,
        domains: Vec<Domain>,
        tables: Vec<Vec<f64>>,
    ) -> Result<Self, EngineError> {
        if domains.len() != graph.len() || tables.len() != graph.len() {
            return Err(EngineError::ShapeMismatch(format!(
                "{} domains and {} tables for {} nodes",
                domains.len(),
                tables.len(),
                graph.len()
            )));
        }
        let vars: Vec<Variable> = graph
            .nodes()
            .iter()
            .zip(&domains)
            .map(|(n, d)| Variable::new(n.clone(), d.clone()))
            .collect();
        let mut mechanisms = Vec::with_capacity(graph.len());
        for (i, table) in tables.into_iter().enumerate() {
            let inputs = graph.parent_indices(i).iter().map(|&p| vars[p].clone()).collect();
            mechanisms.push(Kernel::new(inputs, vec![vars[i].clone()], table)?);
        }
        CausalModel::new(graph, latent, domains, mechanisms)
    }

    pub fn graph(&self) -> &Dag {
        &self.graph
    }

    pub fn latent(&self) -> &NodeSet {
        &self.latent
    }

    /// Non-latent nodes in declared order.
    pub fn observed(&self) -> Vec<NodeId> {
        self.graph
            .nodes()
            .iter()
            .filter(|n| !self.latent.contains(*n))
            .cloned()
            .collect()
    }

    /// Latent projection onto the observed nodes.
    pub fn observed_admg(&self) -> Result<Admg, GraphError> {
        latent_projection(&self.graph, &self.observed().into_iter().collect())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn variable(&self, n: &str) -> Result<&Variable, EngineError> {
        self.index(n).map(|i| &self.vars[i])
    }

    pub fn domain(&self, n: &str) -> Result<&Domain, EngineError> {
        self.variable(n).map(|v| &v.domain)
    }

    pub fn mechanism(&self, n: &str) -> Result<&Kernel, EngineError> {
        self.index(n).map(|i| &self.mechanisms[i])
    }

    pub fn mechanisms(&self) -> &[Kernel] {
        &self.mechanisms
    }

    pub(crate) fn index(&self, n: &str) -> Result<usize, EngineError> {
        self.graph
            .index_of(n)
            .ok_or_else(|| EngineError::UnknownVariable(NodeId::new(n)))
    }

    /// Variables for `names`, listed in declared order.
    pub fn vars_of(&self, names: &NodeSet) -> Result<Vec<Variable>, EngineError> {
        for n in names {
            self.index(n.as_str())?;
        }
        Ok(self.vars.iter().filter(|v| names.contains(&v.name)).cloned().collect())
    }

    /// Same model with a different latent designation.
    pub fn with_latent(&self, latent: NodeSet) -> Result<Self, EngineError> {
        for n in &latent {
            self.index(n.as_str())?;
        }
        Ok(CausalModel { latent, ..self.clone() })
    }
}

/// Checks every structural invariant and returns the first violation.
pub fn validate_model(m: &CausalModel) -> Result<(), EngineError> {
    for n in &m.latent {
        if !m.graph.contains(n.as_str()) {
            return Err(EngineError::UnknownVariable(n.clone()));
        }
    }
    for (i, var) in m.vars.iter().enumerate() {
        if &var.name != m.graph.node(i) {
            return Err(EngineError::ShapeMismatch(format!(
                "variable `{}` listed where `{}` is declared",
                var.name,
                m.graph.node(i)
            )));
        }
        let k = &m.mechanisms[i];
        for input in k.inputs() {
            if !m.graph.contains(input.name.as_str()) {
                return Err(EngineError::UnknownParent {
                    node: var.name.clone(),
                    parent: input.name.clone(),
                });
            }
        }
        let expected: Vec<&Variable> = m.graph.parent_indices(i).iter().map(|&p| &m.vars[p]).collect();
        let found: Vec<&Variable> = k.inputs().iter().collect();
        if expected != found {
            let names = |vs: &[&Variable]| vs.iter().map(|v| v.name.as_str()).collect::<Vec<_>>().join(",");
            return Err(EngineError::ShapeMismatch(format!(
                "mechanism for `{}` has inputs [{}], expected parents [{}]",
                var.name,
                names(&found),
                names(&expected)
            )));
        }
        if k.outputs() != std::slice::from_ref(var) {
            return Err(EngineError::ShapeMismatch(format!(
                "mechanism for `{}` must output exactly that node",
                var.name
            )));
        }
        k.validate().map_err(|e| match e {
            EngineError::NonStochasticRow { row, sum, .. } => EngineError::NonStochasticRow {
                kernel: var.name.to_string(),
                row,
                sum,
            },
            other => other,
        })?;
    }
    Ok(())
}

/// Incremental construction of a [`CausalModel`] by node name.
#[derive(Clone, Debug, Default)]
pub struct ModelBuilder {
    nodes: Vec<(NodeId, Domain, bool)>,
    edges: Vec<(NodeId, NodeId)>,
    kernels: Vec<(NodeId, Vec<Vec<f64>>)>,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, name: impl Into<NodeId>, domain: Domain) -> Self {
        self.nodes.push((name.into(), domain, false));
        self
    }

    pub fn latent(mut self, name: impl Into<NodeId>, domain: Domain) -> Self {
        self.nodes.push((name.into(), domain, true));
        self
    }

    pub fn edge(mut self, a: impl Into<NodeId>, b: impl Into<NodeId>) -> Self {
        self.edges.push((a.into(), b.into()));
        self
    }

    /// Mechanism rows, one per parent assignment in declared parent order.
    pub fn kernel(mut self, node: impl Into<NodeId>, rows: Vec<Vec<f64>>) -> Self {
        self.kernels.push((node.into(), rows));
        self
    }

    pub fn build(self) -> Result<CausalModel, EngineError> {
        let names: Vec<NodeId> = self.nodes.iter().map(|(n, _, _)| n.clone()).collect();
        let graph = Dag::from_parts(names, &self.edges)?;
        let latent: NodeSet = self
            .nodes
            .iter()
            .filter(|(_, _, l)| *l)
            .map(|(n, _, _)| n.clone())
            .collect();
        let vars: Vec<Variable> = self
            .nodes
            .iter()
            .map(|(n, d, _)| Variable::new(n.clone(), d.clone()))
            .collect();
        let mut mechanisms = Vec::with_capacity(vars.len());
        for (i, var) in vars.iter().enumerate() {
            let mut rows = None;
            for (n, r) in &self.kernels {
                if !graph.contains(n.as_str()) {
                    return Err(EngineError::UnknownVariable(n.clone()));
                }
                if n == &var.name {
                    if rows.is_some() {
                        return Err(EngineError::ShapeMismatch(format!("two kernels for `{n}`")));
                    }
                    rows = Some(r.clone());
                }
            }
            let rows = rows.ok_or_else(|| EngineError::MissingMechanism(var.name.clone()))?;
            let inputs = graph.parent_indices(i).iter().map(|&p| vars[p].clone()).collect();
            let k = Kernel::from_rows(inputs, vec![var.clone()], rows).map_err(|e| match e {
                EngineError::NonStochasticRow { row, sum, .. } => EngineError::NonStochasticRow {
                    kernel: var.name.to_string(),
                    row,
                    sum,
                },
                other => other,
            })?;
            mechanisms.push(k);
        }
        let domains = vars.into_iter().map(|v| v.domain).collect();
        CausalModel::new(graph, latent, domains, mechanisms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> ModelBuilder {
        ModelBuilder::new()
            .node("A", Domain::binary())
            .node("B", Domain::binary())
            .edge("A", "B")
            .kernel("A", vec![vec![0.7, 0.3]])
    }

    #[test]
    fn well_formed() {
        let m = two_node()
            .kernel("B", vec![vec![0.8, 0.2], vec![0.1, 0.9]])
            .build()
            .unwrap();
        assert!(validate_model(&m).is_ok());
        assert_eq!(m.observed().len(), 2);
    }

    #[test]
    fn bad_row_names_node_and_row() {
        let err = two_node()
            .kernel("B", vec![vec![0.8, 0.2], vec![0.1, 0.8]])
            .build()
            .unwrap_err();
        assert_eq!(
            err,
            EngineError::NonStochasticRow {
                kernel: "B".into(),
                row: 1,
                sum: 0.9
            }
        );
    }

    #[test]
    fn wrong_input_order() {
        let g = Dag::new(["A", "B", "C"], [("A", "C"), ("B", "C")]).unwrap();
        let vars: Vec<Variable> = ["A", "B", "C"]
            .iter()
            .map(|n| Variable::new(*n, Domain::binary()))
            .collect();
        let root = |v: &Variable| Kernel::new(vec![], vec![v.clone()], vec![0.5, 0.5]).unwrap();
        let c = Kernel::new(
            vec![vars[1].clone(), vars[0].clone()],
            vec![vars[2].clone()],
            vec![0.5; 8],
        )
        .unwrap();
        let err = CausalModel::new(
            g,
            NodeSet::new(),
            vec![Domain::binary(); 3],
            vec![root(&vars[0]), root(&vars[1]), c],
        )
        .unwrap_err();
        assert!(matches!(err, EngineError::ShapeMismatch(_)));
    }

    #[test]
    fn missing_kernel() {
        assert_eq!(
            two_node().build().unwrap_err(),
            EngineError::MissingMechanism("B".into())
        );
    }
}
