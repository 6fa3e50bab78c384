use super::{AbstractionError, TauFamily};
use crate::engine::{FiniteMap, Projection, Radix, Variable};
use crate::graph::{ClusterMap, NodeId, NodeSet};

/// Composes a low-to-middle abstraction with a middle-to-high one.
///
/// Each top-level cluster becomes the union of the low clusters of its
/// middle members, and low nodes removed at either stage are removed.
/// The composed τ applies the middle components and then the top one.
pub fn compose_abstractions(
    cm12: &ClusterMap,
    tau12: &TauFamily,
    cm23: &ClusterMap,
    tau23: &TauFamily,
) -> Result<(ClusterMap, TauFamily), AbstractionError> {
    let mid12: NodeSet = cm12.high_nodes().iter().cloned().collect();
    let mid23: NodeSet = cm23.low_nodes().iter().cloned().collect();
    if mid12 != mid23 {
        return Err(AbstractionError::Incompatible(
            "the first map's high nodes differ from the second map's low nodes".into(),
        ));
    }

    let low_order = cm12.low_nodes();
    let mut clusters = Vec::new();
    let mut maps = Vec::new();
    for top in cm23.high_nodes() {
        let mids = cm23.cluster(top.as_str()).expect("listed high node");
        let members: NodeSet = cm12.expand(&mids.iter().cloned().collect())?;
        let ordered: Vec<NodeId> = low_order.iter().filter(|n| members.contains(*n)).cloned().collect();
        clusters.push((top.clone(), ordered));

        let outer = tau23.get(top.as_str())?;
        let mut inputs: Vec<Variable> = Vec::new();
        let mut inner = Vec::new();
        for mid in outer.inputs() {
            let comp = tau12.get(mid.name.as_str())?;
            if comp.outputs() != std::slice::from_ref(mid) {
                return Err(AbstractionError::Incompatible(format!(
                    "middle variable `{}` has different domains in the two abstractions",
                    mid.name
                )));
            }
            inputs.extend(comp.inputs().iter().cloned());
            inner.push(comp);
        }
        let mut ordered_inputs = Vec::with_capacity(inputs.len());
        for n in low_order {
            if let Some(v) = inputs.iter().find(|v| &v.name == n) {
                ordered_inputs.push(v.clone());
            }
        }
        if ordered_inputs.len() != inputs.len() {
            return Err(AbstractionError::Incompatible(format!(
                "tau components below `{top}` do not cover distinct low variables"
            )));
        }
        let projections = inner
            .iter()
            .map(|comp| {
                let names: Vec<NodeId> = comp.inputs().iter().map(|v| v.name.clone()).collect();
                Projection::new(&ordered_inputs, &names)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mid_radix = Radix::of(outer.inputs());
        let map = FiniteMap::from_fn(ordered_inputs.clone(), outer.outputs().to_vec(), |values| {
            let mid: Vec<usize> = inner
                .iter()
                .zip(&projections)
                .map(|(comp, proj)| comp.apply(proj.index(values)))
                .collect();
            vec![outer.apply(mid_radix.encode(&mid))]
        })?;
        maps.push(map);
    }

    let mut removed = cm12.removed();
    removed.extend(cm12.expand(&cm23.removed().into_iter().collect())?);
    let removed: Vec<NodeId> = low_order.iter().filter(|n| removed.contains(n)).cloned().collect();
    let cm = ClusterMap::from_clusters(low_order, clusters, removed)?;
    Ok((cm, TauFamily::new(maps)?))
}
