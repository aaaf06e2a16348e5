//! Theorem-verification reports: JSON with numbers kept to 12 significant
//! digits, plus a plain-text summary table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::entanglement::OptimizerConfig;

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// How `lhs` is compared with `rhs` in a record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|lhs − rhs| ≤ tolerance`
    Equal,
    /// `lhs > rhs`
    Greater,
    /// `lhs < rhs`
    Less,
    /// `lhs ≥ rhs − tolerance`
    AtLeast,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64, tolerance: f64) -> bool {
        match self {
            Relation::Equal => (lhs - rhs).abs() <= tolerance,
            Relation::Greater => lhs > rhs,
            Relation::Less => lhs < rhs,
            Relation::AtLeast => lhs >= rhs - tolerance,
        }
    }

    /// Distance from `rhs` in the direction the relation cares about.
    pub fn residual(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::Equal => (lhs - rhs).abs(),
            Relation::Greater | Relation::AtLeast => rhs - lhs,
            Relation::Less => lhs - rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub trial: usize,
    pub dims: String,
    pub check: String,
    /// Named inputs of the comparison, e.g. `{"min_coherence": …, "local_entropy": …}`.
    pub quantities: BTreeMap<String, f64>,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub tolerance: f64,
    pub residual: f64,
    pub pass: bool,
    /// Convergence of the minimizer producing `lhs`; `None` when none was involved.
    pub converged: Option<bool>,
}

impl Record {
    pub fn new(trial: usize, dims: String, check: &str, lhs: f64, relation: Relation, rhs: f64, tolerance: f64) -> Self {
        let (lhs, rhs) = (round12(lhs), round12(rhs));
        Self {
            trial,
            dims,
            check: check.to_string(),
            quantities: BTreeMap::new(),
            lhs,
            relation,
            rhs,
            tolerance,
            residual: round12(relation.residual(lhs, rhs)),
            pass: relation.holds(lhs, rhs, tolerance),
            converged: None,
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.quantities.insert(name.to_string(), round12(value));
        self
    }

    pub fn converged(mut self, flag: bool) -> Self {
        self.converged = Some(flag);
        self
    }

    /// `lhs` came from a minimizer that did not converge, and an overestimate
    /// of it could turn a violation into a pass.
    pub fn critical_unconverged(&self) -> bool {
        self.converged == Some(false) && matches!(self.relation, Relation::Greater | Relation::AtLeast)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: u8,
    pub claim: String,
    pub trials: usize,
    pub dims: Vec<String>,
    pub seed: u64,
    pub config: OptimizerConfig,
    pub tolerances: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub records: Vec<Record>,
    pub checks: usize,
    pub failed: usize,
    pub unconverged: usize,
    pub critical_unconverged: usize,
    pub max_residual: f64,
    pub verdict: String,
}

impl TheoremReport {
    /// Sorts records by trial and fills in the totals and the verdict.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        theorem: u8,
        claim: &str,
        trials: usize,
        dims: Vec<String>,
        seed: u64,
        config: OptimizerConfig,
        tolerances: BTreeMap<String, f64>,
        notes: Vec<String>,
        mut records: Vec<Record>,
    ) -> Self {
        records.sort_by(|a, b| a.trial.cmp(&b.trial));
        let failed = records.iter().filter(|r| !r.pass).count();
        let unconverged = records.iter().filter(|r| r.converged == Some(false)).count();
        let critical_unconverged = records.iter().filter(|r| r.critical_unconverged()).count();
        let max_residual = records
            .iter()
            .filter(|r| r.relation == Relation::Equal)
            .map(|r| r.residual)
            .fold(0.0, f64::max);
        let verdict = if failed == 0 && critical_unconverged == 0 { "pass" } else { "fail" }.to_string();
        Self {
            theorem,
            claim: claim.to_string(),
            trials,
            dims,
            seed,
            config,
            tolerances,
            notes,
            checks: records.len(),
            records,
            failed,
            unconverged,
            critical_unconverged,
            max_residual,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    /// The verdict implied by the stored records alone.
    pub fn recomputed_verdict(&self) -> bool {
        self.records.iter().all(|r| r.relation.holds(r.lhs, r.rhs, r.tolerance) && !r.critical_unconverged())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn summary_table(&self) -> String {
        let mut by_check: BTreeMap<&str, (usize, usize, f64)> = BTreeMap::new();
        for r in &self.records {
            let e = by_check.entry(&r.check).or_insert((0, 0, f64::NEG_INFINITY));
            e.0 += 1;
            e.1 += r.pass as usize;
            e.2 = e.2.max(r.residual);
        }
        let mut s = String::new();
        let _ = writeln!(s, "theorem {}: {}", self.theorem, self.claim);
        let _ = writeln!(s, "dims {}  trials {}  seed {}", self.dims.join(","), self.trials, self.seed);
        let _ = writeln!(s, "{:<34} {:>7} {:>7} {:>14}", "check", "passed", "total", "worst residual");
        for (check, (total, passed, worst)) in by_check {
            let _ = writeln!(s, "{check:<34} {passed:>7} {total:>7} {worst:>14.4e}");
        }
        let _ = writeln!(s, "unconverged optimizer runs: {} ({} critical)", self.unconverged, self.critical_unconverged);
        let _ = writeln!(s, "verdict: {}", self.verdict.to_uppercase());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(-2.0e-17), -2.0e-17);
        assert_eq!(round12(0.0), 0.0);
    }

    #[test]
    fn relations() {
        assert!(Relation::Equal.holds(1.0, 1.0 + 1e-5, 1e-4));
        assert!(!Relation::Equal.holds(1.0, 1.1, 1e-4));
        assert!(Relation::Greater.holds(1e-3, 1e-6, 0.0));
        assert!(!Relation::Less.holds(1e-3, 1e-4, 0.0));
        assert!(Relation::AtLeast.holds(0.999, 1.0, 1e-3));
        assert!(!Relation::AtLeast.holds(0.99, 1.0, 1e-3));
    }

    #[test]
    fn verdict_follows_records() {
        let ok = Record::new(1, "2x2".into(), "a", 1.0, Relation::Equal, 1.0, 1e-9);
        let bad = Record::new(0, "2x2".into(), "b", 2.0, Relation::Less, 1.0, 0.0).converged(false);
        let rep = TheoremReport::assemble(2, "c", 2, vec!["2x2".into()], 7, OptimizerConfig::default(), BTreeMap::new(), vec![], vec![ok, bad]);
        assert_eq!(rep.records[0].trial, 0);
        assert!(!rep.passed());
        assert_eq!(rep.recomputed_verdict(), rep.passed());
        assert_eq!(rep.unconverged, 1);
        let back: TheoremReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        assert!(rep.summary_table().contains("FAIL"));
    }

    #[test]
    fn unconverged_lower_side_is_critical() {
        let eq = Record::new(0, "2x2".into(), "a", 1.0, Relation::Equal, 1.0, 1e-9).converged(false);
        let ge = Record::new(1, "2x2".into(), "b", 2.0, Relation::AtLeast, 1.0, 1e-3).converged(false);
        let mk = |records| TheoremReport::assemble(6, "c", 1, vec![], 0, OptimizerConfig::default(), BTreeMap::new(), vec![], records);
        assert!(mk(vec![eq.clone()]).passed());
        let rep = mk(vec![eq, ge]);
        assert!(!rep.passed());
        assert_eq!(rep.critical_unconverged, 1);
        assert!(!rep.recomputed_verdict());
    }
}
