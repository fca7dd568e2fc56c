//! JSON configuration schema for the `fraclab` command-line tool.
//!
//! Configs are strict: the top-level `schema` field must equal 1, unknown
//! keys are rejected everywhere, and every numeric parameter is validated by
//! the library constructors before any suite runs. All validation failures
//! map to exit code 2 with a message naming the offending field or bound.

use std::fmt;
use std::path::Path;

use fraclab::kernels::KernelKind;
use fraclab::{
    CorpusExpr, ExponentForm, ExponentVector, FraclabError, GridDomain, KernelSpec, NormMode,
    OperatorParams,
};
use serde::{Deserialize, Serialize};

/// Command-line failure modes. `Config` covers schema violations and numeric
/// refusals (exit code 2); `Io` covers filesystem problems (also exit 2,
/// since they are environment errors, not suite failures).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl From<FraclabError> for CliError {
    fn from(e: FraclabError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Top-level configuration. Field order here fixes the canonical key order
/// in every report that embeds the resolved config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub domain: DomainBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub corpus: Vec<Vec<ExprSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<ExprSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<ExprSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<ExponentBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<SuiteSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifyBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
}

/// Uniform midpoint grid plus the dyadic cube family depth used by every
/// suite in the config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    pub n: usize,
    pub corner: Vec<f64>,
    pub side: f64,
    pub points: usize,
    pub levels: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    /// One of `standard`, `holder`, `riesz`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

/// Smoothness/truncation parameters for the pointwise suites.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub delta: f64,
    pub epsilon: f64,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
}

/// A catalog expression reference: identifier plus numeric parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExprSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

impl ExprSpec {
    pub fn to_expr(&self, n: usize) -> Result<CorpusExpr, CliError> {
        CorpusExpr::from_catalog(&self.id, &self.params, n)
            .map_err(|e| config_err(format!("expression `{}`: {e}", self.id)))
    }
}

/// Lebesgue exponents: a constant vector for the weighted and maximal
/// suites, and/or variable-exponent closed forms with a per-slot order
/// split for the variable-exponent suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    /// Target order for maximal-only configs with no kernel block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable: Option<Vec<VarForm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_split: Option<Vec<f64>>,
}

/// Closed-form variable exponents (custom sample tables are not
/// configurable: suites must be able to resample at a finer grid).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum VarForm {
    Constant { p: f64 },
    Asymptotic { p_inf: f64, a_c: f64 },
    Smoothstep { p1: f64, p2: f64, r0: f64, w: f64 },
}

impl VarForm {
    pub fn to_form(&self) -> ExponentForm {
        match *self {
            VarForm::Constant { p } => ExponentForm::Constant { p },
            VarForm::Asymptotic { p_inf, a_c } => ExponentForm::Asymptotic { p_inf, a_c },
            VarForm::Smoothstep { p1, p2, r0, w } => ExponentForm::Smoothstep { p1, p2, r0, w },
        }
    }
}

/// One suite request. `suite` selects the check; the remaining fields are
/// suite-specific and rejected when they do not apply.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub suite: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub commutator: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<ExprSpec>,
}

impl SuiteSpec {
    pub fn mode(&self, at: usize) -> Result<NormMode, CliError> {
        match self.mode.as_deref() {
            Some("strong") => Ok(NormMode::Strong),
            Some("weak") => Ok(NormMode::Weak),
            Some(other) => Err(config_err(format!(
                "suites[{at}].mode: expected `strong` or `weak`, got `{other}`"
            ))),
            None => Err(config_err(format!(
                "suites[{at}].mode: suite `{}` needs a mode (`strong` or `weak`)",
                self.suite
            ))),
        }
    }

    /// Reject suite-specific fields that the named suite does not read, so
    /// misplaced settings fail loudly instead of being ignored.
    pub fn check_fields(&self, at: usize) -> Result<(), CliError> {
        let allowed: &[&str] = match self.suite.as_str() {
            "sharp-estimate" | "variable-exponent" => &["commutator"],
            "weighted" => &["mode", "commutator"],
            "maximal" => &["mode"],
            "fefferman-stein" => &["delta", "p", "weight"],
            "kolmogorov" => &["p", "u"],
            "bmo-dilation" => &["k_max"],
            other => {
                return Err(config_err(format!(
                    "suites[{at}].suite: unknown suite `{other}` (expected one of \
                     sharp-estimate, weighted, maximal, fefferman-stein, \
                     variable-exponent, kolmogorov, bmo-dilation)"
                )));
            }
        };
        let set: [(&str, bool); 7] = [
            ("mode", self.mode.is_some()),
            ("commutator", self.commutator),
            ("delta", self.delta.is_some()),
            ("p", self.p.is_some()),
            ("u", self.u.is_some()),
            ("k_max", self.k_max.is_some()),
            ("weight", self.weight.is_some()),
        ];
        for (name, is_set) in set {
            if is_set && !allowed.contains(&name) {
                return Err(config_err(format!(
                    "suites[{at}].{name}: field does not apply to suite `{}`",
                    self.suite
                )));
            }
        }
        Ok(())
    }

    pub fn require_f64(&self, field: &str, value: Option<f64>, at: usize) -> Result<f64, CliError> {
        value.ok_or_else(|| {
            config_err(format!(
                "suites[{at}].{field}: required by suite `{}`",
                self.suite
            ))
        })
    }
}

/// Kernel certification parameters (`certify-kernel` subcommand). All
/// fields default so a run config can be certified without extra keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyBlock {
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default = "default_nodes_per_axis")]
    pub nodes_per_axis: usize,
    #[serde(default = "default_size_samples")]
    pub size_samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_k_max() -> u32 {
    6
}
// A separation of 0.03 places the k = 1..6 annulus window where the
// modulated catalog kernel's slower decay is visible in the fit.
fn default_separation() -> f64 {
    0.03
}
fn default_nodes_per_axis() -> usize {
    64
}
fn default_size_samples() -> usize {
    256
}
fn default_seed() -> u64 {
    1
}

impl Default for CertifyBlock {
    fn default() -> Self {
        CertifyBlock {
            k_max: default_k_max(),
            separation: default_separation(),
            nodes_per_axis: default_nodes_per_axis(),
            size_samples: default_size_samples(),
            seed: default_seed(),
        }
    }
}

/// Output file names, resolved relative to the `--out` directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_csv_name")]
    pub csv: String,
}

fn default_csv_name() -> String {
    "cases.csv".to_string()
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            csv: default_csv_name(),
        }
    }
}

impl RunConfig {
    /// Parse and validate a config file. Schema violations report the JSON
    /// path of the offending key.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut de = serde_json::Deserializer::from_str(&text);
        let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let p = e.path().to_string();
            let at = if p == "." {
                String::new()
            } else {
                format!(" at `{p}`")
            };
            config_err(format!("{}{at}: {}", path.display(), e.inner()))
        })?;
        if cfg.schema != 1 {
            return Err(config_err(format!(
                "schema: unsupported value {} (this tool reads schema 1)",
                cfg.schema
            )));
        }
        cfg.build_domain()?;
        Ok(cfg)
    }

    pub fn build_domain(&self) -> Result<GridDomain, CliError> {
        GridDomain::new(
            self.domain.n,
            &self.domain.corner,
            self.domain.side,
            self.domain.points,
        )
        .map_err(|e| config_err(format!("domain: {e}")))
    }

    pub fn levels(&self) -> usize {
        self.domain.levels
    }

    pub fn build_kernel(&self) -> Result<KernelSpec, CliError> {
        let block = self
            .kernel
            .as_ref()
            .ok_or_else(|| config_err("kernel: block required by this command or suite"))?;
        let n = self.domain.n;
        let err = |msg: String| config_err(format!("kernel: {msg}"));
        match block.kind.as_str() {
            "riesz" => {
                if let Some(m) = block.m {
                    if m != 1 {
                        return Err(err(format!(
                            "the riesz kernel is linear (m = 1), got m = {m}"
                        )));
                    }
                }
                if block.gamma.is_some() || block.p0.is_some() || block.size_constant.is_some() {
                    return Err(err(
                        "the riesz kernel fixes size_constant, p0 and takes no gamma".to_string(),
                    ));
                }
                KernelSpec::riesz(n, block.alpha).map_err(|e| err(e.to_string()))
            }
            kind @ ("standard" | "holder") => {
                let m = block
                    .m
                    .ok_or_else(|| err("m (number of slots) is required".to_string()))?;
                let p0 = block
                    .p0
                    .ok_or_else(|| err("p0 (size-condition exponent) is required".to_string()))?;
                let a = block.size_constant.unwrap_or(1.0);
                let kk = if kind == "standard" {
                    if block.gamma.is_some() {
                        return Err(err("gamma only applies to the holder kernel".to_string()));
                    }
                    KernelKind::Standard
                } else {
                    let gamma = block
                        .gamma
                        .ok_or_else(|| err("holder kernel requires gamma".to_string()))?;
                    KernelKind::HolderModulated { gamma }
                };
                KernelSpec::new(kk, m, n, block.alpha, a, p0).map_err(|e| err(e.to_string()))
            }
            other => Err(err(format!(
                "unknown kind `{other}` (expected standard, holder, or riesz)"
            ))),
        }
    }

    pub fn build_params(&self) -> Result<OperatorParams, CliError> {
        let spec = self.build_kernel()?;
        let block = self
            .params
            .as_ref()
            .ok_or_else(|| config_err("params: block required by this suite"))?;
        let built = match &block.s {
            Some(s) => {
                OperatorParams::with_slot_exponents(spec, block.delta, block.epsilon, block.t, s)
            }
            None => OperatorParams::new(spec, block.delta, block.epsilon, block.t),
        };
        built.map_err(|e| config_err(format!("params: {e}")))
    }

    pub fn build_corpus(&self) -> Result<Vec<Vec<CorpusExpr>>, CliError> {
        if self.corpus.is_empty() {
            return Err(config_err("corpus: at least one input tuple is required"));
        }
        let n = self.domain.n;
        self.corpus
            .iter()
            .enumerate()
            .map(|(i, tuple)| {
                tuple
                    .iter()
                    .map(|e| {
                        e.to_expr(n)
                            .map_err(|err| config_err(format!("corpus[{i}]: {err}")))
                    })
                    .collect()
            })
            .collect()
    }

    /// Corpus restricted to single-function tuples, for the scalar suites.
    pub fn build_flat_corpus(&self) -> Result<Vec<CorpusExpr>, CliError> {
        let corpus = self.build_corpus()?;
        corpus
            .into_iter()
            .enumerate()
            .map(|(i, mut tuple)| {
                if tuple.len() != 1 {
                    return Err(config_err(format!(
                        "corpus[{i}]: this suite reads single-function tuples, got {}",
                        tuple.len()
                    )));
                }
                Ok(tuple.remove(0))
            })
            .collect()
    }

    pub fn build_weights(&self) -> Result<Vec<CorpusExpr>, CliError> {
        let n = self.domain.n;
        let list = self
            .weights
            .as_ref()
            .ok_or_else(|| config_err("weights: block required by this suite"))?;
        list.iter()
            .enumerate()
            .map(|(i, e)| {
                e.to_expr(n)
                    .map_err(|err| config_err(format!("weights[{i}]: {err}")))
            })
            .collect()
    }

    pub fn build_symbols(&self) -> Result<Vec<CorpusExpr>, CliError> {
        let n = self.domain.n;
        let list = self
            .symbols
            .as_ref()
            .ok_or_else(|| config_err("symbols: block required for commutator suites"))?;
        list.iter()
            .enumerate()
            .map(|(i, e)| {
                e.to_expr(n)
                    .map_err(|err| config_err(format!("symbols[{i}]: {err}")))
            })
            .collect()
    }

    fn exponent_block(&self) -> Result<&ExponentBlock, CliError> {
        self.exponents
            .as_ref()
            .ok_or_else(|| config_err("exponents: block required by this suite"))
    }

    /// Constant exponent vector, with the target order taken from
    /// `exponents.alpha` or, failing that, from the kernel block.
    pub fn exponent_vector(&self) -> Result<ExponentVector, CliError> {
        let block = self.exponent_block()?;
        let p = block
            .p
            .as_ref()
            .ok_or_else(|| config_err("exponents.p: required by this suite"))?;
        let alpha = match block.alpha {
            Some(a) => a,
            None => self
                .build_kernel()
                .map_err(|_| {
                    config_err("exponents.alpha: required when no kernel block sets the order")
                })?
                .alpha(),
        };
        ExponentVector::new(p, alpha, self.domain.n)
            .map_err(|e| config_err(format!("exponents: {e}")))
    }

    pub fn variable_forms(&self) -> Result<Vec<ExponentForm>, CliError> {
        let block = self.exponent_block()?;
        let forms = block
            .variable
            .as_ref()
            .ok_or_else(|| config_err("exponents.variable: required by this suite"))?;
        Ok(forms.iter().map(VarForm::to_form).collect())
    }

    pub fn alpha_split(&self) -> Result<&[f64], CliError> {
        let block = self.exponent_block()?;
        block
            .alpha_split
            .as_deref()
            .ok_or_else(|| config_err("exponents.alpha_split: required by this suite"))
    }

    pub fn output(&self) -> OutputBlock {
        self.output.clone().unwrap_or_default()
    }

    /// The certify block with defaults materialized, so certification
    /// reports embed the exact parameters they ran with.
    pub fn resolved_certify(&self) -> CertifyBlock {
        self.certify.clone().unwrap_or_default()
    }
}
