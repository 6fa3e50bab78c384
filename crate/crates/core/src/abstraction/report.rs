use serde::Serialize;

/// Outcome of comparing two tables entry by entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SquareResidual {
    /// What was compared, e.g. a node's mechanism square or a query.
    pub square: String,
    /// Largest absolute entry difference.
    pub residual: f64,
    /// Entries compared.
    pub checked: usize,
    /// Entries left out because a conditioning event had zero mass.
    pub skipped: usize,
}

/// A single entry that differs by more than the tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub square: String,
    pub input: String,
    pub output: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Witness {
    pub fn difference(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Per-square residuals, violated entries and the overall verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbstractionReport {
    pub check: String,
    pub tolerance: f64,
    pub squares: Vec<SquareResidual>,
    pub witnesses: Vec<Witness>,
    pub skipped: usize,
    pub passed: bool,
}

impl AbstractionReport {
    pub(crate) fn new(check: &str, tolerance: f64) -> Self {
        AbstractionReport {
            check: check.to_owned(),
            tolerance,
            squares: Vec::new(),
            witnesses: Vec::new(),
            skipped: 0,
            passed: true,
        }
    }

    pub(crate) fn push(&mut self, part: SquarePart) {
        self.skipped += part.residual.skipped;
        self.passed &= part.residual.residual <= self.tolerance;
        self.squares.push(part.residual);
        self.witnesses.extend(part.witnesses);
    }

    /// Largest residual over all squares, 0 if there are none.
    pub fn max_residual(&self) -> f64 {
        self.squares.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    /// Merges another report into this one under a combined name.
    pub fn merge(mut self, other: AbstractionReport) -> Self {
        self.check = format!("{}+{}", self.check, other.check);
        self.tolerance = self.tolerance.max(other.tolerance);
        self.passed &= other.passed;
        self.skipped += other.skipped;
        self.squares.extend(other.squares);
        self.witnesses.extend(other.witnesses);
        self
    }
}

/// Residual and witnesses for one square, built entry by entry.
#[derive(Clone, Debug)]
pub(crate) struct SquarePart {
    pub(crate) residual: SquareResidual,
    pub(crate) witnesses: Vec<Witness>,
    tolerance: f64,
}

impl SquarePart {
    pub(crate) fn new(square: String, tolerance: f64) -> Self {
        SquarePart {
            residual: SquareResidual {
                square,
                residual: 0.0,
                checked: 0,
                skipped: 0,
            },
            witnesses: Vec::new(),
            tolerance,
        }
    }

    pub(crate) fn compare(
        &mut self,
        lhs: f64,
        rhs: f64,
        input: impl FnOnce() -> String,
        output: impl FnOnce() -> String,
    ) {
        let d = (lhs - rhs).abs();
        self.residual.checked += 1;
        if d > self.residual.residual || d.is_nan() {
            self.residual.residual = if d.is_nan() { f64::INFINITY } else { d };
        }
        if d.is_nan() || d > self.tolerance {
            self.witnesses.push(Witness {
                square: self.residual.square.clone(),
                input: input(),
                output: output(),
                lhs,
                rhs,
            });
        }
    }

    pub(crate) fn skip(&mut self, n: usize) {
        self.residual.skipped += n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_residuals() {
        let mut r = AbstractionReport::new("x", 1e-9);
        let mut ok = SquarePart::new("A".into(), 1e-9);
        ok.compare(0.5, 0.5 + 1e-12, String::new, String::new);
        r.push(ok);
        assert!(r.passed);
        let mut bad = SquarePart::new("B".into(), 1e-9);
        bad.compare(0.5, 0.6, || "B=0".into(), || "1".into());
        r.push(bad);
        assert!(!r.passed);
        assert_eq!(r.witnesses.len(), 1);
        assert!((r.max_residual() - 0.1).abs() < 1e-12);
    }
}
