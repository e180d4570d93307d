use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use subdiff_core::forward::SourceProfile;
use subdiff_core::fraccalc::TimeGrid;
use subdiff_core::inverse::InverseTolerances;
use subdiff_core::spectral::{dirichlet_laplacian_1d, CoefVector, SpectralOperator};

use crate::error::{WorkbenchError, WorkbenchResult};
use crate::profiles::{load_sampled, BuiltinProfile};

/// Every numerical threshold used by the workbench, in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative threshold on `λ_k|Δ_k|` marking a mode as degenerate.
    pub tau: f64,
    /// Modes below `near_factor` times the threshold are flagged.
    pub near_factor: f64,
    /// Largest data coefficient on a degenerate mode still treated as zero,
    /// relative to `‖ψ‖`.
    pub ortho: f64,
    /// Upper bound on `λ_1|Δ_1|` for the manufactured degenerate mode.
    pub degenerate_delta: f64,
    /// Lower bound on `λ_k|Δ_k|` for the other modes of that example.
    pub regular_delta: f64,
    /// Largest pointwise residual of the discrete equation.
    pub pde_residual: f64,
    /// Largest `|u_k(0) - u_k(T)|`.
    pub nonlocal_defect: f64,
    /// Distance of the computed manufactured trajectory from `(t - 1/2)²`.
    pub manufactured: f64,
    /// Final round-trip recovery error.
    pub recovery: f64,
    /// Agreement with closed forms (steady state, constant-source scan).
    pub closed_form: f64,
    /// Absolute agreement of Mittag-Leffler values with exact references.
    pub ml_abs: f64,
    /// Agreement of the example endpoint constants with their closed form.
    pub constants: f64,
    /// Slack on a decay constant fitted on one grid and checked on another.
    pub bound_slack: f64,
    /// Allowed growth of `x²`-scaled asymptotic deviations past the first decade.
    pub asymptotic_growth: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let inv = InverseTolerances::default();
        Self {
            tau: inv.tau,
            near_factor: inv.near_factor,
            ortho: inv.ortho,
            degenerate_delta: 1e-5,
            regular_delta: 0.01,
            pde_residual: 5e-3,
            nonlocal_defect: 1e-8,
            manufactured: 5e-4,
            recovery: 1e-5,
            closed_form: 1e-8,
            ml_abs: 1e-10,
            constants: 1e-10,
            bound_slack: 1.05,
            asymptotic_growth: 1.5,
        }
    }
}

impl Tolerances {
    pub fn inverse(&self) -> InverseTolerances {
        InverseTolerances {
            tau: self.tau,
            near_factor: self.near_factor,
            ortho: self.ortho,
        }
    }

    fn validate(&self) -> WorkbenchResult<()> {
        let fields = [
            ("tolerances.tau", self.tau),
            ("tolerances.near_factor", self.near_factor),
            ("tolerances.ortho", self.ortho),
            ("tolerances.degenerate_delta", self.degenerate_delta),
            ("tolerances.regular_delta", self.regular_delta),
            ("tolerances.pde_residual", self.pde_residual),
            ("tolerances.nonlocal_defect", self.nonlocal_defect),
            ("tolerances.manufactured", self.manufactured),
            ("tolerances.recovery", self.recovery),
            ("tolerances.closed_form", self.closed_form),
            ("tolerances.ml_abs", self.ml_abs),
            ("tolerances.constants", self.constants),
            ("tolerances.bound_slack", self.bound_slack),
            ("tolerances.asymptotic_growth", self.asymptotic_growth),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(WorkbenchError::config(
                    name,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        if self.near_factor < 1.0 {
            return Err(WorkbenchError::config("tolerances.near_factor", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorChoice {
    /// `-d²/dx²` on `(0, π)` with Dirichlet ends: `λ_k = k²`.
    #[default]
    DirichletLaplacian,
    /// Eigensystem JSON as written by `SpectralOperator::to_spec`.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceChoice {
    Builtin(BuiltinProfile),
    File { file: PathBuf },
}

impl Default for SourceChoice {
    fn default() -> Self {
        Self::Builtin(BuiltinProfile::TwoPlusSin)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub solution: Option<PathBuf>,
    pub inverse: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rho: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub t0: f64,
    /// Time steps.
    #[serde(rename = "M")]
    pub steps: usize,
    /// Retained modes.
    #[serde(rename = "N")]
    pub modes: usize,
    /// Spatial grid intervals of the builtin operator.
    #[serde(rename = "P")]
    pub points: usize,
    pub operator: OperatorChoice,
    pub g: SourceChoice,
    /// Source coefficients for `forward` and the round trip; drawn from the
    /// seed when absent.
    pub f: Option<Vec<f64>>,
    /// Measurement coefficients for `inverse`; synthesized from `f` when absent.
    pub psi: Option<Vec<f64>>,
    /// Chosen `f_k` on degenerate modes, as `[k, value]` pairs.
    pub free: Vec<(usize, f64)>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub output: OutputPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rho: 0.5,
            t_final: 1.0,
            t0: 0.5,
            steps: 2048,
            modes: 16,
            points: 128,
            operator: OperatorChoice::default(),
            g: SourceChoice::default(),
            f: None,
            psi: None,
            free: Vec::new(),
            seed: 0,
            tolerances: Tolerances::default(),
            output: OutputPaths::default(),
        }
    }
}

impl RunConfig {
    /// Parse a TOML or JSON file, chosen by extension (TOML otherwise).
    pub fn from_path(path: &Path) -> WorkbenchResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WorkbenchError::config("config", format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| WorkbenchError::config("config", e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| WorkbenchError::config("config", e.to_string()))
        }
    }

    pub fn validate(&self) -> WorkbenchResult<()> {
        let bad = |field: &str, msg: String| WorkbenchError::config(field, msg);
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(bad("rho", format!("must lie in (0, 1], got {}", self.rho)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(bad("T", format!("must be positive, got {}", self.t_final)));
        }
        if !(self.t0 > 0.0 && self.t0 < self.t_final) {
            return Err(bad(
                "t0",
                format!("must lie in (0, T) = (0, {}), got {}", self.t_final, self.t0),
            ));
        }
        if self.steps < 256 {
            return Err(bad("M", format!("must be at least 256, got {}", self.steps)));
        }
        if self.modes < 1 {
            return Err(bad("N", "must be at least 1".into()));
        }
        if self.points < 8 * self.modes {
            return Err(bad(
                "P",
                format!("must be at least 8N = {}, got {}", 8 * self.modes, self.points),
            ));
        }
        for (name, v) in [("f", &self.f), ("psi", &self.psi)] {
            if let Some(v) = v {
                if v.len() != self.modes {
                    return Err(bad(
                        name,
                        format!("has {} entries, expected N = {}", v.len(), self.modes),
                    ));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(bad(name, "entries must be finite".into()));
                }
            }
        }
        for &(k, v) in &self.free {
            if k == 0 || k > self.modes || !v.is_finite() {
                return Err(bad(
                    "free",
                    format!("entry [{k}, {v}] needs 1 <= k <= N and a finite value"),
                ));
            }
        }
        self.tolerances.validate()
    }

    pub fn grid(&self) -> WorkbenchResult<TimeGrid> {
        Ok(TimeGrid::new(self.t_final, self.steps)?)
    }

    pub fn operator(&self) -> WorkbenchResult<SpectralOperator> {
        match &self.operator {
            OperatorChoice::DirichletLaplacian => Ok(dirichlet_laplacian_1d(self.modes, self.points)?),
            OperatorChoice::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| WorkbenchError::config("operator", format!("{}: {e}", path.display())))?;
                let op = SpectralOperator::from_json(&text)
                    .map_err(|e| WorkbenchError::config("operator", e.to_string()))?;
                if op.modes() != self.modes {
                    return Err(WorkbenchError::config(
                        "operator",
                        format!("file holds {} modes, expected N = {}", op.modes(), self.modes),
                    ));
                }
                Ok(op)
            }
        }
    }

    /// The time profile on the configured grid, or on `grid` when given.
    pub fn source_on(&self, grid: TimeGrid) -> WorkbenchResult<SourceProfile> {
        match &self.g {
            SourceChoice::Builtin(p) => p.build(self.rho, grid),
            SourceChoice::File { file } => {
                let g = load_sampled(file)?;
                if g.grid() != grid {
                    return Err(WorkbenchError::config(
                        "g",
                        format!(
                            "samples span T = {} with {} steps, expected T = {} with M = {}",
                            g.grid().t_final(),
                            g.grid().steps(),
                            grid.t_final(),
                            grid.steps()
                        ),
                    ));
                }
                Ok(g)
            }
        }
    }

    pub fn source(&self) -> WorkbenchResult<SourceProfile> {
        self.source_on(self.grid()?)
    }

    /// Configured `f`, or `f_k = u_k / k²` with `u_k` uniform on `[-1, 1]`
    /// drawn from the seed.
    pub fn source_coefficients(&self) -> CoefVector {
        use rand::{Rng, SeedableRng};
        match &self.f {
            Some(f) => CoefVector::new(f.clone()).expect("validated"),
            None => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
                let values = (1..=self.modes)
                    .map(|k| rng.gen_range(-1.0..=1.0) / (k * k) as f64)
                    .collect();
                CoefVector::new(values).expect("finite draws")
            }
        }
    }

    pub fn free_values(&self) -> std::collections::BTreeMap<usize, f64> {
        self.free.iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(cfg: &RunConfig) -> String {
        match cfg.validate() {
            Err(WorkbenchError::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_are_valid() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!((cfg.modes, cfg.points, cfg.steps, cfg.t_final), (16, 128, 2048, 1.0));
    }

    #[test]
    fn each_violation_names_its_field() {
        let base = RunConfig::default();
        let cases: Vec<(&str, RunConfig)> = vec![
            (
                "rho",
                RunConfig {
                    rho: 0.0,
                    ..base.clone()
                },
            ),
            (
                "rho",
                RunConfig {
                    rho: 1.2,
                    ..base.clone()
                },
            ),
            (
                "rho",
                RunConfig {
                    rho: f64::NAN,
                    ..base.clone()
                },
            ),
            (
                "T",
                RunConfig {
                    t_final: -1.0,
                    ..base.clone()
                },
            ),
            (
                "t0",
                RunConfig {
                    t0: 1.0,
                    ..base.clone()
                },
            ),
            (
                "t0",
                RunConfig {
                    t0: 0.0,
                    ..base.clone()
                },
            ),
            (
                "M",
                RunConfig {
                    steps: 255,
                    ..base.clone()
                },
            ),
            (
                "N",
                RunConfig {
                    modes: 0,
                    ..base.clone()
                },
            ),
            (
                "P",
                RunConfig {
                    points: 127,
                    ..base.clone()
                },
            ),
            (
                "f",
                RunConfig {
                    f: Some(vec![1.0; 3]),
                    ..base.clone()
                },
            ),
            (
                "psi",
                RunConfig {
                    psi: Some(vec![f64::NAN; 16]),
                    ..base.clone()
                },
            ),
            (
                "free",
                RunConfig {
                    free: vec![(17, 1.0)],
                    ..base.clone()
                },
            ),
            (
                "tolerances.tau",
                RunConfig {
                    tolerances: Tolerances {
                        tau: 0.0,
                        ..Tolerances::default()
                    },
                    ..base.clone()
                },
            ),
        ];
        for (want, cfg) in cases {
            assert_eq!(field_of(&cfg), want);
        }
    }

    #[test]
    fn toml_and_json_agree() {
        let toml_text = r#"
            rho = 0.7
            T = 2.0
            t0 = 0.9
            M = 512
            N = 4
            P = 64
            g = "one-plus-t"
            free = [[2, 0.5]]
            [tolerances]
            tau = 1e-7
        "#;
        let from_toml: RunConfig = toml::from_str(toml_text).unwrap();
        let json = serde_json::to_string(&from_toml).unwrap();
        let from_json: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(from_toml, from_json);
        assert_eq!(from_toml.g, SourceChoice::Builtin(BuiltinProfile::OnePlusT));
        assert_eq!(from_toml.tolerances.tau, 1e-7);
        assert_eq!(from_toml.tolerances.recovery, 1e-5);
        from_toml.validate().unwrap();

        let file: RunConfig =
            toml::from_str("g = { file = \"g.json\" }\noperator = { kind = \"file\", path = \"op.json\" }").unwrap();
        assert_eq!(file.g, SourceChoice::File { file: "g.json".into() });
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }

    #[test]
    fn seeded_coefficients_are_reproducible() {
        let cfg = RunConfig {
            seed: 7,
            ..RunConfig::default()
        };
        assert_eq!(cfg.source_coefficients(), cfg.source_coefficients());
        let other = RunConfig {
            seed: 8,
            ..RunConfig::default()
        };
        assert_ne!(cfg.source_coefficients(), other.source_coefficients());
    }
}
