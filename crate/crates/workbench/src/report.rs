use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `measured <= tolerance`
    AtMost,
    /// `measured >= tolerance`
    AtLeast,
    /// `measured > tolerance`
    Above,
    /// `measured < tolerance`
    Below,
    /// `measured == tolerance`
    Equal,
}

impl Relation {
    fn holds(self, measured: f64, tolerance: f64) -> bool {
        match self {
            Self::AtMost => measured <= tolerance,
            Self::AtLeast => measured >= tolerance,
            Self::Above => measured > tolerance,
            Self::Below => measured < tolerance,
            Self::Equal => measured == tolerance,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Self::AtMost => "<=",
            Self::AtLeast => ">=",
            Self::Above => ">",
            Self::Below => "<",
            Self::Equal => "==",
        }
    }
}

/// One measured quantity compared against its tolerance. NaN never passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub tolerance: f64,
    /// Where the tolerance comes from: a `tolerances.*` key or `exact`.
    pub provenance: String,
    pub passed: bool,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        measured: f64,
        relation: Relation,
        tolerance: f64,
        provenance: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            measured,
            relation,
            tolerance,
            provenance: provenance.into(),
            passed: relation.holds(measured, tolerance),
        }
    }

    /// A yes/no outcome, recorded as `1 == 1`.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Relation::Equal, 1.0, "exact")
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {:e} {} {:e} ({})",
            if self.passed { "pass" } else { "FAIL" },
            self.name,
            self.measured,
            self.relation.symbol(),
            self.tolerance,
            self.provenance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub parameters: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

impl ScenarioReport {
    pub fn new(scenario: impl Into<String>) -> Self {
        Self {
            scenario: scenario.into(),
            parameters: BTreeMap::new(),
            checks: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, name: &str, value: f64) {
        self.parameters.insert(name.into(), value);
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Merge another report's checks and tables under a name prefix.
    pub fn absorb(&mut self, other: ScenarioReport) {
        let prefix = other.scenario;
        for mut c in other.checks {
            c.name = format!("{prefix}/{}", c.name);
            self.checks.push(c);
        }
        for mut t in other.tables {
            t.name = format!("{prefix}/{}", t.name);
            self.tables.push(t);
        }
        self.notes.extend(other.notes);
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let passed = self.checks.iter().filter(|c| c.passed).count();
        writeln!(
            f,
            "scenario {}: {passed}/{} checks passed",
            self.scenario,
            self.checks.len()
        )?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations_and_nan() {
        assert!(Check::new("a", 1.0, Relation::AtMost, 1.0, "exact").passed);
        assert!(!Check::new("a", 1.0, Relation::Below, 1.0, "exact").passed);
        assert!(Check::new("a", 2.0, Relation::Above, 1.0, "exact").passed);
        for r in [
            Relation::AtMost,
            Relation::AtLeast,
            Relation::Above,
            Relation::Below,
            Relation::Equal,
        ] {
            assert!(!Check::new("nan", f64::NAN, r, 1.0, "exact").passed);
        }
        assert!(!Check::flag("f", false).passed);
    }

    #[test]
    fn absorb_prefixes_names() {
        let mut outer = ScenarioReport::new("suite");
        let mut inner = ScenarioReport::new("part");
        inner.check(Check::flag("ok", true));
        inner.tables.push(Table::new("t", &["x"]));
        outer.absorb(inner);
        assert!(outer.find("part/ok").is_some());
        assert!(outer.table("part/t").is_some());
        assert!(outer.passed());
    }
}
