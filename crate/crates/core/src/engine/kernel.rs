use super::domain::{assignment_count, Projection, Radix};
use super::{EngineError, Variable, VALIDITY_TOL};
use crate::graph::{NodeId, NodeSet};

fn label(vars: &[Variable]) -> String {
    let names: Vec<&str> = vars.iter().map(|v| v.name.as_str()).collect();
    names.join(",")
}

fn same_vars(a: &[Variable], b: &[Variable]) -> bool {
    a == b
}

/// Row-stochastic matrix from input assignments to output assignments.
///
/// Rows are indexed by input assignments and columns by output assignments,
/// both mixed-radix in the listed variable order with the rightmost
/// variable fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    inputs: Vec<Variable>,
    outputs: Vec<Variable>,
    table: Vec<f64>,
}

impl Kernel {
    pub fn new(inputs: Vec<Variable>, outputs: Vec<Variable>, table: Vec<f64>) -> Result<Self, EngineError> {
        let k = Kernel { inputs, outputs, table };
        k.validate()?;
        Ok(k)
    }

    pub(crate) fn new_unchecked(inputs: Vec<Variable>, outputs: Vec<Variable>, table: Vec<f64>) -> Self {
        debug_assert_eq!(table.len(), assignment_count(&inputs) * assignment_count(&outputs));
        Kernel { inputs, outputs, table }
    }

    /// Builds a kernel from explicit rows.
    pub fn from_rows(inputs: Vec<Variable>, outputs: Vec<Variable>, rows: Vec<Vec<f64>>) -> Result<Self, EngineError> {
        let cols = assignment_count(&outputs);
        let expected_rows = assignment_count(&inputs);
        if rows.len() != expected_rows {
            return Err(EngineError::ShapeMismatch(format!(
                "kernel for [{}] needs {expected_rows} rows, got {}",
                label(&outputs),
                rows.len()
            )));
        }
        let mut table = Vec::with_capacity(expected_rows * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(EngineError::ShapeMismatch(format!(
                    "row {i} of kernel for [{}] needs {cols} entries, got {}",
                    label(&outputs),
                    row.len()
                )));
            }
            table.extend(row);
        }
        Kernel::new(inputs, outputs, table)
    }

    pub fn identity(vars: Vec<Variable>) -> Self {
        let n = assignment_count(&vars);
        let mut table = vec![0.0; n * n];
        for i in 0..n {
            table[i * n + i] = 1.0;
        }
        Kernel::new_unchecked(vars.clone(), vars, table)
    }

    pub(crate) fn validate(&self) -> Result<(), EngineError> {
        let rows = assignment_count(&self.inputs);
        let cols = assignment_count(&self.outputs);
        if self.table.len() != rows * cols {
            return Err(EngineError::ShapeMismatch(format!(
                "kernel for [{}] needs {} entries, got {}",
                label(&self.outputs),
                rows * cols,
                self.table.len()
            )));
        }
        for r in 0..rows {
            let row = &self.table[r * cols..(r + 1) * cols];
            for (c, &p) in row.iter().enumerate() {
                if !(-VALIDITY_TOL..=1.0 + VALIDITY_TOL).contains(&p) {
                    return Err(EngineError::InvalidProbability {
                        kernel: label(&self.outputs),
                        row: r,
                        col: c,
                        value: p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > VALIDITY_TOL {
                return Err(EngineError::NonStochasticRow {
                    kernel: label(&self.outputs),
                    row: r,
                    sum,
                });
            }
        }
        Ok(())
    }

    pub fn inputs(&self) -> &[Variable] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Variable] {
        &self.outputs
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn rows(&self) -> usize {
        assignment_count(&self.inputs)
    }

    pub fn cols(&self) -> usize {
        assignment_count(&self.outputs)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.table[r * c..(r + 1) * c]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.table[row * self.cols() + col]
    }

    /// Row `r` as a distribution over the outputs.
    pub fn row_distribution(&self, r: usize) -> Distribution {
        Distribution {
            vars: self.outputs.clone(),
            probs: self.row(r).to_vec(),
        }
    }

    /// Row selected by a value index per input variable.
    pub fn row_for(&self, values: &[usize]) -> Result<Distribution, EngineError> {
        if values.len() != self.inputs.len() || values.iter().zip(&self.inputs).any(|(&v, var)| v >= var.size()) {
            return Err(EngineError::ShapeMismatch(format!(
                "assignment does not match kernel inputs [{}]",
                label(&self.inputs)
            )));
        }
        Ok(self.row_distribution(Radix::of(&self.inputs).encode(values)))
    }

    /// Every row is a point mass (largest entry within tolerance of 1).
    pub fn is_deterministic(&self) -> bool {
        (0..self.rows()).all(|r| self.row(r).iter().any(|&p| p >= 1.0 - VALIDITY_TOL))
    }

    /// Sequential composition `self ; next`.
    pub fn compose(&self, next: &Kernel) -> Result<Kernel, EngineError> {
        if !same_vars(&self.outputs, &next.inputs) {
            return Err(EngineError::ShapeMismatch(format!(
                "cannot compose: outputs [{}] vs inputs [{}]",
                label(&self.outputs),
                label(&next.inputs)
            )));
        }
        let (rows, mid, cols) = (self.rows(), self.cols(), next.cols());
        let mut table = vec![0.0; rows * cols];
        for r in 0..rows {
            let out = &mut table[r * cols..(r + 1) * cols];
            for m in 0..mid {
                let w = self.table[r * mid + m];
                if w == 0.0 {
                    continue;
                }
                for (c, o) in out.iter_mut().enumerate() {
                    *o += w * next.table[m * cols + c];
                }
            }
        }
        Ok(Kernel::new_unchecked(self.inputs.clone(), next.outputs.clone(), table))
    }

    /// Pushes every row through `f`.
    pub fn push_forward(&self, f: &FiniteMap) -> Result<Kernel, EngineError> {
        if !same_vars(&self.outputs, &f.inputs) {
            return Err(EngineError::ShapeMismatch(format!(
                "cannot push [{}] through a map on [{}]",
                label(&self.outputs),
                label(&f.inputs)
            )));
        }
        let cols = f.output_count();
        let mut table = vec![0.0; self.rows() * cols];
        for r in 0..self.rows() {
            for (c, &p) in self.row(r).iter().enumerate() {
                table[r * cols + f.image[c]] += p;
            }
        }
        Ok(Kernel::new_unchecked(self.inputs.clone(), f.outputs.clone(), table))
    }

    /// Same kernel with inputs and outputs listed in the given orders.
    pub fn reorder(&self, inputs: &[NodeId], outputs: &[NodeId]) -> Result<Kernel, EngineError> {
        if inputs.len() != self.inputs.len() || outputs.len() != self.outputs.len() {
            return Err(EngineError::ShapeMismatch("reorder must keep every variable".into()));
        }
        let in_proj = Projection::new(&self.inputs, inputs)?;
        let out_proj = Projection::new(&self.outputs, outputs)?;
        let new_inputs: Vec<Variable> = inputs
            .iter()
            .map(|n| self.inputs.iter().find(|v| &v.name == n).cloned().expect("projected"))
            .collect();
        let new_outputs: Vec<Variable> = outputs
            .iter()
            .map(|n| self.outputs.iter().find(|v| &v.name == n).cloned().expect("projected"))
            .collect();
        let (in_radix, out_radix) = (Radix::of(&self.inputs), Radix::of(&self.outputs));
        let cols = self.cols();
        let mut table = vec![0.0; self.table.len()];
        for r in 0..self.rows() {
            let nr = in_proj.index(&in_radix.decode(r));
            for c in 0..cols {
                let nc = out_proj.index(&out_radix.decode(c));
                table[nr * cols + nc] = self.table[r * cols + c];
            }
        }
        Ok(Kernel::new_unchecked(new_inputs, new_outputs, table))
    }

    /// Largest absolute entry difference, or `None` if shapes differ.
    pub fn max_abs_diff(&self, other: &Kernel) -> Option<f64> {
        if !same_vars(&self.inputs, &other.inputs) || !same_vars(&self.outputs, &other.outputs) {
            return None;
        }
        Some(max_abs_diff(&self.table, &other.table))
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Probability distribution over the joint assignments of `vars`.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    vars: Vec<Variable>,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(vars: Vec<Variable>, probs: Vec<f64>) -> Result<Self, EngineError> {
        Kernel::new(Vec::new(), vars.clone(), probs.clone())?;
        Ok(Distribution { vars, probs })
    }

    pub(crate) fn new_unchecked(vars: Vec<Variable>, probs: Vec<f64>) -> Self {
        Distribution { vars, probs }
    }

    /// The point mass on the single assignment of the empty product.
    pub fn unit() -> Self {
        Distribution {
            vars: Vec::new(),
            probs: vec![1.0],
        }
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, values: &[usize]) -> f64 {
        self.probs[Radix::of(&self.vars).encode(values)]
    }

    pub fn into_kernel(self) -> Kernel {
        Kernel::new_unchecked(Vec::new(), self.vars, self.probs)
    }

    /// Bayes conditioning on `evidence` (value indices), renormalised over
    /// the remaining variables.
    pub fn condition(&self, evidence: &[(NodeId, usize)]) -> Result<Distribution, EngineError> {
        let names: Vec<NodeId> = evidence.iter().map(|(n, _)| n.clone()).collect();
        let proj = Projection::new(&self.vars, &names)?;
        for (n, v) in evidence {
            let var = self.vars.iter().find(|x| &x.name == n).expect("projected");
            if *v >= var.size() {
                return Err(EngineError::ShapeMismatch(format!(
                    "value index {v} out of range for `{n}`"
                )));
            }
        }
        let target: Vec<usize> = evidence.iter().map(|(_, v)| *v).collect();
        let keep: Vec<Variable> = self.vars.iter().filter(|v| !names.contains(&v.name)).cloned().collect();
        let keep_names: Vec<NodeId> = keep.iter().map(|v| v.name.clone()).collect();
        let keep_proj = Projection::new(&self.vars, &keep_names)?;
        let radix = Radix::of(&self.vars);
        let mut out = vec![0.0; assignment_count(&keep)];
        let mut mass = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            let values = radix.decode(i);
            if proj.values(&values) == target {
                out[keep_proj.index(&values)] += p;
                mass += p;
            }
        }
        if mass <= VALIDITY_TOL {
            return Err(EngineError::ZeroEvidence { mass });
        }
        for p in &mut out {
            *p /= mass;
        }
        Ok(Distribution::new_unchecked(keep, out))
    }

    /// Sums out every variable not in `keep`.
    pub fn marginalize(&self, keep: &NodeSet) -> Result<Distribution, EngineError> {
        for n in keep {
            if !self.vars.iter().any(|v| &v.name == n) {
                return Err(EngineError::UnknownVariable(n.clone()));
            }
        }
        let kept: Vec<Variable> = self.vars.iter().filter(|v| keep.contains(&v.name)).cloned().collect();
        let names: Vec<NodeId> = kept.iter().map(|v| v.name.clone()).collect();
        let proj = Projection::new(&self.vars, &names)?;
        let radix = Radix::of(&self.vars);
        let mut out = vec![0.0; assignment_count(&kept)];
        for (i, &p) in self.probs.iter().enumerate() {
            out[proj.index(&radix.decode(i))] += p;
        }
        Ok(Distribution::new_unchecked(kept, out))
    }

    /// Image distribution under `f`.
    pub fn push_forward(&self, f: &FiniteMap) -> Result<Distribution, EngineError> {
        if !same_vars(&self.vars, &f.inputs) {
            return Err(EngineError::ShapeMismatch(format!(
                "cannot push [{}] through a map on [{}]",
                label(&self.vars),
                label(&f.inputs)
            )));
        }
        let mut out = vec![0.0; f.output_count()];
        for (i, &p) in self.probs.iter().enumerate() {
            out[f.image[i]] += p;
        }
        Ok(Distribution::new_unchecked(f.outputs.clone(), out))
    }

    pub fn max_abs_diff(&self, other: &Distribution) -> Option<f64> {
        (self.vars == other.vars).then(|| max_abs_diff(&self.probs, &other.probs))
    }
}

/// Total function between finite products, stored as an image table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMap {
    inputs: Vec<Variable>,
    outputs: Vec<Variable>,
    image: Vec<usize>,
}

impl FiniteMap {
    /// `image[i]` is the output assignment index of input assignment `i`.
    pub fn new(inputs: Vec<Variable>, outputs: Vec<Variable>, image: Vec<usize>) -> Result<Self, EngineError> {
        let partial: Vec<Option<usize>> = image.into_iter().map(Some).collect();
        Self::from_partial(inputs, outputs, partial)
    }

    /// Fails with [`EngineError::PartialMap`] at the first undefined input.
    pub fn from_partial(
        inputs: Vec<Variable>,
        outputs: Vec<Variable>,
        image: Vec<Option<usize>>,
    ) -> Result<Self, EngineError> {
        let n = assignment_count(&inputs);
        let m = assignment_count(&outputs);
        if image.len() != n {
            return Err(EngineError::ShapeMismatch(format!(
                "map on [{}] needs {n} entries, got {}",
                label(&inputs),
                image.len()
            )));
        }
        let mut total = Vec::with_capacity(n);
        for (i, y) in image.into_iter().enumerate() {
            match y {
                None => return Err(EngineError::PartialMap { input: i }),
                Some(y) if y >= m => {
                    return Err(EngineError::ShapeMismatch(format!(
                        "map image {y} out of range for [{}]",
                        label(&outputs)
                    )))
                }
                Some(y) => total.push(y),
            }
        }
        Ok(FiniteMap {
            inputs,
            outputs,
            image: total,
        })
    }

    /// Builds the map from a function on value-index tuples.
    pub fn from_fn<F>(inputs: Vec<Variable>, outputs: Vec<Variable>, f: F) -> Result<Self, EngineError>
    where
        F: Fn(&[usize]) -> Vec<usize>,
    {
        let in_radix = Radix::of(&inputs);
        let out_radix = Radix::of(&outputs);
        let image = (0..in_radix.total())
            .map(|i| {
                let y = f(&in_radix.decode(i));
                (y.len() == outputs.len() && y.iter().zip(&outputs).all(|(&v, var)| v < var.size()))
                    .then(|| out_radix.encode(&y))
            })
            .collect();
        Self::from_partial(inputs, outputs, image)
    }

    pub fn identity(vars: Vec<Variable>) -> Self {
        let n = assignment_count(&vars);
        FiniteMap {
            inputs: vars.clone(),
            outputs: vars,
            image: (0..n).collect(),
        }
    }

    /// Reads a deterministic kernel as a map.
    pub fn from_kernel(k: &Kernel) -> Result<Self, EngineError> {
        if !k.is_deterministic() {
            return Err(EngineError::NotDeterministic(label(k.outputs())));
        }
        let image = (0..k.rows())
            .map(|r| {
                k.row(r)
                    .iter()
                    .position(|&p| p >= 1.0 - VALIDITY_TOL)
                    .expect("deterministic row")
            })
            .collect();
        Ok(FiniteMap {
            inputs: k.inputs.clone(),
            outputs: k.outputs.clone(),
            image,
        })
    }

    pub fn inputs(&self) -> &[Variable] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Variable] {
        &self.outputs
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, input: usize) -> usize {
        self.image[input]
    }

    pub fn input_count(&self) -> usize {
        self.image.len()
    }

    pub fn output_count(&self) -> usize {
        assignment_count(&self.outputs)
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.output_count()];
        for &y in &self.image {
            hit[y] = true;
        }
        hit.into_iter().all(|h| h)
    }

    /// Inputs mapped to `output`, ascending.
    pub fn preimage(&self, output: usize) -> Vec<usize> {
        (0..self.image.len()).filter(|&i| self.image[i] == output).collect()
    }

    pub fn to_kernel(&self) -> Kernel {
        let cols = self.output_count();
        let mut table = vec![0.0; self.image.len() * cols];
        for (i, &y) in self.image.iter().enumerate() {
            table[i * cols + y] = 1.0;
        }
        Kernel::new_unchecked(self.inputs.clone(), self.outputs.clone(), table)
    }

    /// Composition `self` then `next`.
    pub fn then(&self, next: &FiniteMap) -> Result<FiniteMap, EngineError> {
        if !same_vars(&self.outputs, &next.inputs) {
            return Err(EngineError::ShapeMismatch(format!(
                "cannot compose maps: outputs [{}] vs inputs [{}]",
                label(&self.outputs),
                label(&next.inputs)
            )));
        }
        Ok(FiniteMap {
            inputs: self.inputs.clone(),
            outputs: next.outputs.clone(),
            image: self.image.iter().map(|&y| next.image[y]).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Domain;

    fn var(name: &str, n: usize) -> Variable {
        Variable::new(name, Domain::range(n))
    }

    #[test]
    fn kernel_validation() {
        let a = var("A", 2);
        let err = Kernel::from_rows(vec![], vec![a.clone()], vec![vec![0.5, 0.4]]).unwrap_err();
        assert!(matches!(err, EngineError::NonStochasticRow { row: 0, .. }));
        let err = Kernel::from_rows(vec![], vec![a.clone()], vec![vec![1.2, -0.2]]).unwrap_err();
        assert!(matches!(err, EngineError::InvalidProbability { .. }));
        assert!(Kernel::from_rows(vec![], vec![a], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn determinism() {
        let a = var("A", 2);
        assert!(Kernel::identity(vec![a.clone()]).is_deterministic());
        let half = Kernel::from_rows(vec![], vec![a.clone()], vec![vec![0.5, 0.5]]).unwrap();
        assert!(!half.is_deterministic());
        let nearly = Kernel::from_rows(vec![], vec![a], vec![vec![1.0 - 1e-13, 1e-13]]).unwrap();
        assert!(nearly.is_deterministic());
    }

    #[test]
    fn pushforwards() {
        let x = var("X", 4);
        let parity = var("P", 2);
        let uniform = Distribution::new(vec![x.clone()], vec![0.25; 4]).unwrap();
        let f = FiniteMap::from_fn(vec![x.clone()], vec![parity.clone()], |v| vec![v[0] % 2]).unwrap();
        assert_eq!(uniform.push_forward(&f).unwrap().probs(), &[0.5, 0.5]);

        let point = Distribution::new(vec![x.clone()], vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(point.push_forward(&f).unwrap().probs(), &[1.0, 0.0]);

        let y = var("Y", 3);
        let d = Distribution::new(vec![y.clone()], vec![0.1, 0.2, 0.7]).unwrap();
        let merge = FiniteMap::new(vec![y.clone()], vec![var("Z", 2)], vec![0, 0, 1]).unwrap();
        let out = d.push_forward(&merge).unwrap();
        assert!((out.probs()[0] - 0.3).abs() < 1e-15);
        assert!((out.probs()[1] - 0.7).abs() < 1e-15);

        assert_eq!(d.push_forward(&FiniteMap::identity(vec![y])).unwrap(), d);
    }

    #[test]
    fn partial_maps_rejected() {
        let x = var("X", 2);
        let err = FiniteMap::from_partial(vec![x.clone()], vec![x], vec![Some(0), None]).unwrap_err();
        assert_eq!(err, EngineError::PartialMap { input: 1 });
    }

    #[test]
    fn conditioning() {
        let (a, b) = (var("A", 2), var("B", 2));
        let u = Distribution::new(vec![a.clone(), b.clone()], vec![0.25; 4]).unwrap();
        let c = u.condition(&[("A".into(), 0)]).unwrap();
        assert_eq!(c.probs(), &[0.5, 0.5]);
        assert_eq!(c.vars(), std::slice::from_ref(&b));

        let skew = Distribution::new(vec![a, b], vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(
            skew.condition(&[("A".into(), 1)]),
            Err(EngineError::ZeroEvidence { .. })
        ));
    }

    #[test]
    fn marginals() {
        let (a, b) = (var("A", 2), var("B", 2));
        let d = Distribution::new(vec![a.clone(), b], vec![0.56, 0.14, 0.03, 0.27]).unwrap();
        let m = d.marginalize(&["A".into()].into()).unwrap();
        assert!((m.probs()[1] - 0.3).abs() < 1e-15);
        assert_eq!(d.marginalize(&NodeSet::new()).unwrap(), Distribution::unit());
        assert_eq!(d.marginalize(&["A".into(), "B".into()].into()).unwrap(), d);
        assert!(d.marginalize(&["Q".into()].into()).is_err());
    }

    #[test]
    fn reorder_and_compose() {
        let (a, b) = (var("A", 2), var("B", 3));
        let joint = Kernel::new(vec![], vec![a.clone(), b.clone()], vec![0.1, 0.2, 0.1, 0.3, 0.2, 0.1]).unwrap();
        let swapped = joint.reorder(&[], &["B".into(), "A".into()]).unwrap();
        // (B=1, A=1) is column 1*2 + 1.
        assert_eq!(swapped.get(0, 3), 0.2);
        let back = swapped.reorder(&[], &["A".into(), "B".into()]).unwrap();
        assert_eq!(back, joint);

        let id = Kernel::identity(vec![a.clone(), b.clone()]);
        assert_eq!(joint.compose(&id).unwrap(), joint);
        assert!(joint.compose(&Kernel::identity(vec![a])).is_err());
    }
}
