use std::collections::BTreeMap;

use super::AbstractionError;
use crate::engine::{
    assignment_count, CausalModel, Distribution, FiniteMap, Kernel, Projection, Radix, Variable, VALIDITY_TOL,
};
use crate::graph::{ClusterMap, NodeId, NodeSet};

fn single_output(outputs: &[Variable], what: &str) -> Result<NodeId, AbstractionError> {
    match outputs {
        [v] => Ok(v.name.clone()),
        _ => Err(AbstractionError::Shape(format!(
            "{what} components must have exactly one high-level variable"
        ))),
    }
}

/// One deterministic map per high node, from the joint domain of its
/// cluster (members in low declared order) to the high domain.
#[derive(Clone, Debug, PartialEq)]
pub struct TauFamily {
    components: BTreeMap<NodeId, FiniteMap>,
}

impl TauFamily {
    pub fn new(maps: impl IntoIterator<Item = FiniteMap>) -> Result<Self, AbstractionError> {
        let mut components = BTreeMap::new();
        for m in maps {
            let name = single_output(m.outputs(), "tau")?;
            if components.insert(name.clone(), m).is_some() {
                return Err(AbstractionError::DuplicateComponent(name));
            }
        }
        Ok(TauFamily { components })
    }

    /// Reads deterministic kernels as maps.
    pub fn from_kernels(kernels: impl IntoIterator<Item = Kernel>) -> Result<Self, AbstractionError> {
        let mut maps = Vec::new();
        for k in kernels {
            let name = single_output(k.outputs(), "tau")?;
            if !k.is_deterministic() {
                return Err(AbstractionError::NotDeterministic(name));
            }
            maps.push(FiniteMap::from_kernel(&k)?);
        }
        Self::new(maps)
    }

    /// Identity components for a model abstracted by itself.
    pub fn identity(m: &CausalModel) -> Self {
        let maps = m
            .variables()
            .iter()
            .map(|v| FiniteMap::new(vec![v.clone()], vec![v.clone()], (0..v.size()).collect()).expect("identity map"));
        Self::new(maps).expect("distinct names")
    }

    pub fn component(&self, high: &str) -> Option<&FiniteMap> {
        self.components.get(high)
    }

    pub fn components(&self) -> impl Iterator<Item = (&NodeId, &FiniteMap)> {
        self.components.iter()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub(crate) fn get(&self, high: &str) -> Result<&FiniteMap, AbstractionError> {
        self.component(high)
            .ok_or_else(|| AbstractionError::MissingComponent(NodeId::new(high)))
    }

    /// Checks every component against the models: inputs are the cluster
    /// variables, the output is the high variable, and the map is
    /// surjective.
    pub fn check(&self, low: &CausalModel, high: &CausalModel, cm: &ClusterMap) -> Result<(), AbstractionError> {
        for h in high.graph().nodes() {
            let comp = self.get(h.as_str())?;
            let want_in = cluster_vars(low, cm, h)?;
            if comp.inputs() != want_in.as_slice() {
                return Err(AbstractionError::Shape(format!(
                    "tau component for `{h}` must take the cluster variables [{}] in low declared order",
                    names(&want_in)
                )));
            }
            if comp.outputs() != std::slice::from_ref(high.variable(h.as_str())?) {
                return Err(AbstractionError::Shape(format!(
                    "tau component for `{h}` must output the high variable `{h}` with its domain"
                )));
            }
            if !comp.is_surjective() {
                return Err(AbstractionError::NotSurjective(h.clone()));
            }
        }
        if let Some(extra) = self.components.keys().find(|k| !high.graph().contains(k.as_str())) {
            return Err(AbstractionError::MissingComponent(extra.clone()));
        }
        Ok(())
    }

    /// Product map on the clusters of `set`: inputs are the low variables
    /// of the expanded set and outputs the high variables, both in
    /// declared order.
    pub fn product(
        &self,
        low: &CausalModel,
        high: &CausalModel,
        cm: &ClusterMap,
        set: &NodeSet,
    ) -> Result<FiniteMap, AbstractionError> {
        self.product_over(low, cm, high.vars_of(set)?)
    }

    /// Like [`TauFamily::product`] with the high variables given directly.
    pub(crate) fn product_over(
        &self,
        low: &CausalModel,
        cm: &ClusterMap,
        outputs: Vec<Variable>,
    ) -> Result<FiniteMap, AbstractionError> {
        let set: NodeSet = outputs.iter().map(|v| v.name.clone()).collect();
        let inputs = low.vars_of(&cm.expand(&set)?)?;
        let mut parts = Vec::with_capacity(outputs.len());
        for h in &outputs {
            let comp = self.get(h.name.as_str())?;
            let member_names: Vec<NodeId> = comp.inputs().iter().map(|v| v.name.clone()).collect();
            parts.push((comp, Projection::new(&inputs, &member_names)?));
        }
        let in_radix = Radix::of(&inputs);
        let out_radix = Radix::of(&outputs);
        let image = (0..in_radix.total())
            .map(|i| {
                let values = in_radix.decode(i);
                let out: Vec<usize> = parts
                    .iter()
                    .map(|(comp, proj)| comp.apply(proj.index(&values)))
                    .collect();
                out_radix.encode(&out)
            })
            .collect();
        Ok(FiniteMap::new(inputs, outputs, image)?)
    }
}

pub(crate) fn cluster_vars(low: &CausalModel, cm: &ClusterMap, h: &NodeId) -> Result<Vec<Variable>, AbstractionError> {
    let members = cm
        .cluster(h.as_str())
        .ok_or_else(|| AbstractionError::MissingComponent(h.clone()))?;
    Ok(low.vars_of(&members.iter().cloned().collect())?)
}

pub(crate) fn names(vars: &[Variable]) -> String {
    vars.iter().map(|v| v.name.as_str()).collect::<Vec<_>>().join(",")
}

/// One stochastic kernel per high node, from the high domain to the joint
/// domain of its cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonFamily {
    components: BTreeMap<NodeId, Kernel>,
}

impl EpsilonFamily {
    pub fn new(kernels: impl IntoIterator<Item = Kernel>) -> Result<Self, AbstractionError> {
        let mut components = BTreeMap::new();
        for k in kernels {
            let name = single_output(k.inputs(), "epsilon")?;
            if components.insert(name.clone(), k).is_some() {
                return Err(AbstractionError::DuplicateComponent(name));
            }
        }
        Ok(EpsilonFamily { components })
    }

    pub fn identity(m: &CausalModel) -> Self {
        Self::new(m.variables().iter().map(|v| Kernel::identity(vec![v.clone()]))).expect("distinct names")
    }

    pub fn component(&self, high: &str) -> Option<&Kernel> {
        self.components.get(high)
    }

    pub fn components(&self) -> impl Iterator<Item = (&NodeId, &Kernel)> {
        self.components.iter()
    }

    pub(crate) fn get(&self, high: &str) -> Result<&Kernel, AbstractionError> {
        self.component(high)
            .ok_or_else(|| AbstractionError::MissingComponent(NodeId::new(high)))
    }

    pub fn check(&self, low: &CausalModel, high: &CausalModel, cm: &ClusterMap) -> Result<(), AbstractionError> {
        for h in high.graph().nodes() {
            let comp = self.get(h.as_str())?;
            let want_out = cluster_vars(low, cm, h)?;
            if comp.outputs() != want_out.as_slice()
                || comp.inputs() != std::slice::from_ref(high.variable(h.as_str())?)
            {
                return Err(AbstractionError::Shape(format!(
                    "epsilon component for `{h}` must map `{h}` to the cluster variables [{}]",
                    names(&want_out)
                )));
            }
        }
        if let Some(extra) = self.components.keys().find(|k| !high.graph().contains(k.as_str())) {
            return Err(AbstractionError::MissingComponent(extra.clone()));
        }
        Ok(())
    }

    /// Product kernel on the clusters of `set`, from the high variables to
    /// the low variables of the expanded set, both in declared order.
    pub fn product(
        &self,
        low: &CausalModel,
        high: &CausalModel,
        cm: &ClusterMap,
        set: &NodeSet,
    ) -> Result<Kernel, AbstractionError> {
        self.product_over(low, cm, high.vars_of(set)?)
    }

    pub(crate) fn product_over(
        &self,
        low: &CausalModel,
        cm: &ClusterMap,
        inputs: Vec<Variable>,
    ) -> Result<Kernel, AbstractionError> {
        let set: NodeSet = inputs.iter().map(|v| v.name.clone()).collect();
        let outputs = low.vars_of(&cm.expand(&set)?)?;
        let mut parts = Vec::with_capacity(inputs.len());
        for h in &inputs {
            let comp = self.get(h.name.as_str())?;
            let member_names: Vec<NodeId> = comp.outputs().iter().map(|v| v.name.clone()).collect();
            parts.push((comp, Projection::new(&outputs, &member_names)?));
        }
        let in_radix = Radix::of(&inputs);
        let out_radix = Radix::of(&outputs);
        let cols = out_radix.total();
        let mut table = vec![0.0; in_radix.total() * cols];
        for r in 0..in_radix.total() {
            let hv = in_radix.decode(r);
            for c in 0..cols {
                let lv = out_radix.decode(c);
                let mut p = 1.0;
                for ((comp, proj), &x) in parts.iter().zip(&hv) {
                    p *= comp.get(x, proj.index(&lv));
                }
                table[r * cols + c] = p;
            }
        }
        Ok(Kernel::new_unchecked(inputs, outputs, table))
    }
}

/// Deterministic left inverse of `eps`, if its rows have disjoint supports.
pub fn left_inverse(eps: &Kernel) -> Option<FiniteMap> {
    let mut owner: Vec<Option<usize>> = vec![None; eps.cols()];
    for r in 0..eps.rows() {
        for (c, &p) in eps.row(r).iter().enumerate() {
            if p > VALIDITY_TOL {
                match owner[c] {
                    Some(o) if o != r => return None,
                    _ => owner[c] = Some(r),
                }
            }
        }
    }
    let image = owner.into_iter().map(|o| Some(o.unwrap_or(0))).collect();
    FiniteMap::from_partial(eps.outputs().to_vec(), eps.inputs().to_vec(), image).ok()
}

/// Whether `tau_A` after `eps_A` is the identity for every component.
pub fn check_right_inverse(tau: &TauFamily, eps: &EpsilonFamily) -> bool {
    if tau.len() != eps.components.len() {
        return false;
    }
    tau.components().all(|(h, t)| {
        let Some(e) = eps.component(h.as_str()) else {
            return false;
        };
        let Ok(round) = e.push_forward(t) else {
            return false;
        };
        Kernel::identity(e.inputs().to_vec())
            .max_abs_diff(&round)
            .is_some_and(|d| d <= VALIDITY_TOL)
    })
}

/// Whether `joint` equals the product of the components pointwise.
///
/// `joint` may list its input and output variables in any order.
pub fn check_factorization_of_tau(tau: &TauFamily, joint: &FiniteMap) -> bool {
    let inputs = joint.inputs();
    let outputs = joint.outputs();
    if outputs.len() != tau.len() {
        return false;
    }
    let mut parts = Vec::with_capacity(outputs.len());
    let mut covered = 0;
    for out in outputs {
        let Some(comp) = tau.component(out.name.as_str()) else {
            return false;
        };
        if comp.outputs() != std::slice::from_ref(out) {
            return false;
        }
        let member_names: Vec<NodeId> = comp.inputs().iter().map(|v| v.name.clone()).collect();
        for m in comp.inputs() {
            if !inputs.contains(m) {
                return false;
            }
        }
        covered += member_names.len();
        let Ok(proj) = Projection::new(inputs, &member_names) else {
            return false;
        };
        parts.push((comp, proj));
    }
    if covered != inputs.len() {
        return false;
    }
    let in_radix = Radix::of(inputs);
    let out_radix = Radix::of(outputs);
    (0..in_radix.total()).all(|i| {
        let values = in_radix.decode(i);
        let out = out_radix.decode(joint.apply(i));
        parts
            .iter()
            .zip(out)
            .all(|((comp, proj), y)| comp.apply(proj.index(&values)) == y)
    })
}

/// Observational law of the cluster of each value `a~` conditioned on the
/// preimage of `a~`.
pub fn epsilon_from_tau(
    low: &CausalModel,
    cm: &ClusterMap,
    tau: &TauFamily,
) -> Result<EpsilonFamily, AbstractionError> {
    let mut kernels = Vec::new();
    for h in cm.high_nodes() {
        let comp = tau.get(h.as_str())?;
        let want = cluster_vars(low, cm, h)?;
        if comp.inputs() != want.as_slice() {
            return Err(AbstractionError::Shape(format!(
                "tau component for `{h}` must take the cluster variables [{}]",
                names(&want)
            )));
        }
        let marginal =
            crate::engine::interventional(low, &NodeSet::new(), &want.iter().map(|v| v.name.clone()).collect())?;
        kernels.push(conditional_on_cluster(&marginal.row_distribution(0), comp, h)?);
    }
    EpsilonFamily::new(kernels)
}

/// Rows `p(a | tau(a) = a~)` of a distribution over a cluster.
pub(crate) fn conditional_on_cluster(
    d: &Distribution,
    tau: &FiniteMap,
    h: &NodeId,
) -> Result<Kernel, AbstractionError> {
    let rows = tau.output_count();
    let cols = tau.input_count();
    let mut table = vec![0.0; rows * cols];
    let mut mass = vec![0.0; rows];
    for (a, &p) in d.probs().iter().enumerate() {
        mass[tau.apply(a)] += p;
    }
    for (r, &m) in mass.iter().enumerate() {
        if m <= VALIDITY_TOL {
            return Err(AbstractionError::ZeroClusterMass {
                node: h.clone(),
                value: tau.outputs()[0].domain.label(r).to_owned(),
            });
        }
    }
    for (a, &p) in d.probs().iter().enumerate() {
        let r = tau.apply(a);
        table[r * cols + a] = p / mass[r];
    }
    debug_assert_eq!(assignment_count(tau.inputs()), cols);
    Ok(Kernel::new_unchecked(
        tau.outputs().to_vec(),
        tau.inputs().to_vec(),
        table,
    ))
}
