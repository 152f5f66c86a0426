use crate::error::{Error, Result};
use crate::operator::{
    build_operator_tensor_with, CoefficientFn, CoefficientKind, DiscretizedOperator,
    OperatorSpec1D, SamplingMode, TensorOperatorSpec,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base name of the report files.
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; the CLI flag wins.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    pub problem: ProblemConfig,
    pub scan: ScanConfig,
    #[serde(default)]
    pub checks: CheckConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Csv, ReportFormat::Json]
}

/// `D` copies of the 1D operator `Σ_s (-1)^s d^s a_s d^s`, combined as a
/// Kronecker sum.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "one")]
    pub dimension: usize,
    #[serde(default)]
    pub sampling: SamplingMode,
    /// `a_0 .. a_S`.
    pub coefficients: Vec<CoefficientConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub kind: CoefficientKind,
    pub params: Vec<f64>,
    #[serde(default)]
    pub smoothness_order: Option<u32>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    Tau,
    N,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Largest deviation over the spectrum.
    #[default]
    Max,
    /// Deviation of eigenpair `index_f`.
    Index,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub index_f: usize,
    /// `|α_f|²`.
    pub weight: f64,
}

/// Scan parameters. `grid` holds N (truncation, splitting N-sweep), τ
/// (splitting τ-sweep), M (resolution, sampling) or D (cost).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub kind: String,
    pub grid: Vec<f64>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "strang")]
    pub formula: String,
    #[serde(default = "dense")]
    pub solver: String,
    #[serde(default = "one")]
    pub index_f: usize,
    #[serde(default)]
    pub metric: Metric,
    /// Controls τ when it is not given: `λ_f τ / 2π = phase_fraction`.
    #[serde(default = "default_phase_fraction")]
    pub phase_fraction: f64,
    /// Adds the commuting-parts control series to a splitting scan.
    #[serde(default)]
    pub control: bool,
    /// Richardson reference grids for variable coefficients.
    #[serde(default)]
    pub richardson: Option<[usize; 2]>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub mixture: Vec<MixtureComponent>,
    #[serde(default = "one")]
    pub region_half_width: usize,
    /// Coarse grid for the prolonged ground-state guess.
    #[serde(default)]
    pub prolong_from: Option<usize>,
    /// Polylog exponent of the quantum gate count.
    #[serde(default = "default_c")]
    pub c: f64,
}

fn one() -> usize {
    1
}

fn strang() -> String {
    "strang".into()
}

fn dense() -> String {
    "dense".into()
}

fn default_phase_fraction() -> f64 {
    1.0 / 48.0
}

fn default_samples() -> usize {
    10_000
}

fn default_c() -> f64 {
    3.0
}

/// Pass/fail tolerances. A check runs only when its tolerance is declared.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub slope: Option<f64>,
    pub slope_tolerance: Option<f64>,
    /// Largest relative error still reported as exact.
    pub exact_tolerance: Option<f64>,
    pub control_max: Option<f64>,
    /// Decode error must stay below `factor · π/(Mτ)`.
    pub decode_bound: Option<f64>,
    /// Peak probability must reach `factor · (M² sin²(π/2M))⁻¹`.
    pub peak_bound: Option<f64>,
    /// Largest allowed distribution gap to the closed form.
    pub analytic_tolerance: Option<f64>,
    /// Binomial confidence multiplier.
    pub sigma: Option<f64>,
    pub prolong_fraction: Option<f64>,
    pub particle_statement: Option<String>,
    pub rotation_accuracy: Option<f64>,
    pub relative_accuracy: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::de::Deserializer::parse(text).map_err(|e| toml_error(text, "", &e))?;
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            toml_error(text, &path, e.inner())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config("name", "must be a nonempty file stem"));
        }
        if self.formats.is_empty() {
            return Err(Error::config("formats", "at least one format is required"));
        }
        self.problem.spec()?;
        let s = &self.scan;
        if s.grid.is_empty() {
            return Err(Error::config("scan.grid", "grid must be nonempty"));
        }
        if let Some(i) = s.grid.iter().position(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::config(
                format!("scan.grid[{i}]"),
                "grid values must be positive",
            ));
        }
        super::scans()
            .get(&s.kind)
            .map_err(|e| Error::config("scan.kind", e.to_string()))?;
        crate::splitting::product_formulas()
            .get(&s.formula)
            .map_err(|e| Error::config("scan.formula", e.to_string()))?;
        crate::solver::eigensolvers()
            .get(&s.solver)
            .map_err(|e| Error::config("scan.solver", e.to_string()))?;
        if !s.mixture.is_empty() {
            let total: f64 = s.mixture.iter().map(|c| c.weight).sum();
            if (total - 1.0).abs() > 1e-9 || s.mixture.iter().any(|c| c.weight < 0.0) {
                return Err(Error::config(
                    "scan.mixture",
                    format!("weights must be >= 0 and sum to 1, got {total}"),
                ));
            }
        }
        if !(s.phase_fraction > 0.0 && s.phase_fraction < 0.5) {
            return Err(Error::config("scan.phase_fraction", "must lie in (0, 1/2)"));
        }
        if s.samples == 0 {
            return Err(Error::config("scan.samples", "must be positive"));
        }
        if self.checks.slope.is_some() != self.checks.slope_tolerance.is_some() {
            return Err(Error::config(
                "checks",
                "slope and slope_tolerance go together",
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Grid value `i` as an integer, for N, M and D grids.
    pub fn grid_usize(&self, i: usize) -> Result<usize> {
        let g = self.scan.grid[i];
        if g.fract() != 0.0 {
            return Err(Error::config(
                format!("scan.grid[{i}]"),
                format!("{g} is not an integer"),
            ));
        }
        Ok(g as usize)
    }

    pub fn require_n(&self) -> Result<usize> {
        self.scan
            .n
            .ok_or_else(|| Error::config("scan.n", "this scan needs a fixed grid size"))
    }
}

#[derive(Deserialize)]
struct ProblemOnly {
    problem: ProblemConfig,
}

impl ProblemConfig {
    /// The `[problem]` table of a config file; other tables are ignored.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::de::Deserializer::parse(text).map_err(|e| toml_error(text, "", &e))?;
        let only: ProblemOnly = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            toml_error(text, &path, e.inner())
        })?;
        only.problem.spec()?;
        Ok(only.problem)
    }

    /// `-d²/dx²` on the unit interval.
    pub fn laplacian(dimension: usize) -> Self {
        let constant = |v: f64| CoefficientConfig {
            kind: CoefficientKind::Constant,
            params: vec![v],
            smoothness_order: None,
        };
        Self {
            dimension,
            sampling: SamplingMode::Spectral,
            coefficients: vec![constant(0.0), constant(1.0)],
        }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn spec_1d(&self) -> Result<OperatorSpec1D> {
        let coeffs = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(s, c)| {
                CoefficientFn::new(
                    c.kind,
                    c.params.clone(),
                    c.smoothness_order.unwrap_or(u32::MAX),
                )
                .map_err(|e| Error::config(format!("problem.coefficients[{s}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorSpec1D::new(coeffs)
            .map_err(|e| Error::config("problem.coefficients", e.to_string()))
    }

    pub fn spec(&self) -> Result<TensorOperatorSpec> {
        tensor_sum(self.spec_1d()?, self.dimension)
    }

    pub fn build(&self, n: usize) -> Result<DiscretizedOperator> {
        build_operator_tensor_with(&self.spec()?, n, self.sampling)
    }

    /// The same problem with only `a_S`, a multiplication operator whose
    /// split parts all commute.
    pub fn control(&self) -> Self {
        Self {
            coefficients: self.coefficients.last().cloned().into_iter().collect(),
            ..self.clone()
        }
    }

    /// Constant coefficients in every term.
    pub fn is_constant(&self) -> bool {
        self.coefficients
            .iter()
            .all(|c| c.kind == CoefficientKind::Constant)
    }
}

/// `Σ_α I ⊗ … ⊗ L ⊗ … ⊗ I` with `L` on axis `α`.
pub fn tensor_sum(spec: OperatorSpec1D, dimension: usize) -> Result<TensorOperatorSpec> {
    if dimension == 0 {
        return Err(Error::config("problem.dimension", "must be >= 1"));
    }
    let terms = (0..dimension)
        .map(|a| {
            (0..dimension)
                .map(|b| {
                    if a == b {
                        spec.clone()
                    } else {
                        OperatorSpec1D::identity()
                    }
                })
                .collect()
        })
        .collect();
    TensorOperatorSpec::new(dimension, terms)
}

fn toml_error(text: &str, path: &str, e: &toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    Error::Config {
        path: if path.is_empty() || path == "." {
            "<root>".into()
        } else {
            path.into()
        },
        line,
        message: e.message().to_string(),
    }
}
