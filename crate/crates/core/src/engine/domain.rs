use std::collections::BTreeSet;
use std::fmt;

use super::EngineError;
use crate::graph::NodeId;

/// Finite ordered set of value labels. The order fixes table indexing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    values: Vec<String>,
}

impl Domain {
    pub fn new<I, S>(values: I) -> Result<Self, EngineError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(EngineError::EmptyDomain);
        }
        let mut seen = BTreeSet::new();
        for v in &values {
            if !seen.insert(v.as_str()) {
                return Err(EngineError::DuplicateValue(v.clone()));
            }
        }
        Ok(Domain { values })
    }

    /// Labels `"0"`, `"1"`, ..., `"n-1"`.
    pub fn range(n: usize) -> Self {
        Domain::new((0..n).map(|i| i.to_string())).expect("n > 0 distinct labels")
    }

    pub fn binary() -> Self {
        Domain::range(2)
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn label(&self, i: usize) -> &str {
        &self.values[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.values.iter().position(|v| v == label)
    }
}

/// A named node together with its domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: NodeId,
    pub domain: Domain,
}

impl Variable {
    pub fn new(name: impl Into<NodeId>, domain: Domain) -> Self {
        Variable {
            name: name.into(),
            domain,
        }
    }

    pub fn size(&self) -> usize {
        self.domain.size()
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Number of joint assignments of `vars` (1 for the empty list).
pub fn assignment_count(vars: &[Variable]) -> usize {
    vars.iter().map(Variable::size).product()
}

/// Mixed-radix indexing over a list of domain sizes, rightmost fastest.
#[derive(Clone, Debug)]
pub struct Radix {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl Radix {
    pub fn new(sizes: Vec<usize>) -> Self {
        let mut strides = vec![1; sizes.len()];
        let mut acc = 1usize;
        for i in (0..sizes.len()).rev() {
            strides[i] = acc;
            acc *= sizes[i];
        }
        Radix {
            sizes,
            strides,
            total: acc,
        }
    }

    pub fn of(vars: &[Variable]) -> Self {
        Radix::new(vars.iter().map(Variable::size).collect())
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (i, &s) in self.strides.iter().enumerate() {
            out[i] = index / s;
            index %= s;
        }
        out
    }

    pub fn encode(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.strides).map(|(v, s)| v * s).sum()
    }
}

/// Picks a sub-assignment out of assignments over a fixed variable list.
#[derive(Clone, Debug)]
pub struct Projection {
    positions: Vec<usize>,
    radix: Radix,
}

impl Projection {
    /// Selects `targets` (by name) out of `from`.
    pub fn new(from: &[Variable], targets: &[NodeId]) -> Result<Self, EngineError> {
        let mut positions = Vec::with_capacity(targets.len());
        let mut sizes = Vec::with_capacity(targets.len());
        for t in targets {
            let p = from
                .iter()
                .position(|v| &v.name == t)
                .ok_or_else(|| EngineError::UnknownVariable(t.clone()))?;
            positions.push(p);
            sizes.push(from[p].size());
        }
        Ok(Projection {
            positions,
            radix: Radix::new(sizes),
        })
    }

    /// Index of the selected sub-assignment of `values`.
    pub fn index(&self, values: &[usize]) -> usize {
        self.positions
            .iter()
            .zip(self.radix.strides())
            .map(|(&p, s)| values[p] * s)
            .sum()
    }

    pub fn values(&self, values: &[usize]) -> Vec<usize> {
        self.positions.iter().map(|&p| values[p]).collect()
    }
}

/// Human-readable `A=a, B=b` rendering of an assignment.
pub fn describe_assignment(vars: &[Variable], values: &[usize]) -> String {
    let parts: Vec<String> = vars
        .iter()
        .zip(values)
        .map(|(v, &x)| format!("{}={}", v.name, v.domain.label(x)))
        .collect();
    parts.join(", ")
}

/// Decodes `index` into per-variable value indices.
pub fn decode_assignment(vars: &[Variable], index: usize) -> Vec<usize> {
    Radix::of(vars).decode(index)
}

pub fn encode_assignment(vars: &[Variable], values: &[usize]) -> usize {
    Radix::of(vars).encode(values)
}
