//! Experiment configuration: a single TOML document selecting a
//! distribution family, a test function, and a set of estimators, plus
//! validation of every cross-field constraint before anything runs.

use serde::Deserialize;
use steingrad::distributions::{GaussianParams, GvmParams, MixingSpec};
use steingrad::ef::{CoupledExponentialPair, ExponentialEf, GammaRateEf};
use steingrad::numerics::{Matrix, SpdMatrix, Vector};
use steingrad::testfns::TestFunction;

/// Error reported with exit code 2: the configuration itself is unusable.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: String,
    pub dim: usize,
    pub params: ParamsConfig,
    pub h: HConfig,
    pub estimators: Vec<String>,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub mu: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub sigma: Option<Vec<Vec<f64>>>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub shape: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HConfig {
    pub kind: String,
    pub a: Option<Vec<Vec<f64>>>,
    pub b: Option<Vec<f64>>,
    pub c: Option<f64>,
    pub weights: Option<Vec<f64>>,
}

/// A fully validated experiment ready to run.
pub struct Experiment {
    pub family: Family,
    pub h: TestFunction,
    pub estimators: Vec<String>,
    pub n_samples: usize,
    pub seed: u64,
    pub oracle: bool,
}

/// The concrete distribution the estimators run against.
pub enum Family {
    Gaussian(GaussianParams),
    Gvm {
        params: GvmParams,
        mixing: MixingSpec,
    },
    EfExponential(ExponentialEf),
    EfGamma(GammaRateEf),
    EfBivariate(CoupledExponentialPair),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian(_) => "gaussian",
            Family::Gvm { mixing, .. } => match mixing {
                MixingSpec::HalfNormalAbs => "skew-gaussian",
                MixingSpec::ExponentialUnit => "emg",
                MixingSpec::InvGamma { .. } => "student-t",
                MixingSpec::InvGauss { .. } => "nig",
                MixingSpec::Degenerate => "degenerate",
            },
            Family::EfExponential(_) => "ef-exponential",
            Family::EfGamma(_) => "ef-gamma",
            Family::EfBivariate(_) => "ef-bivariate",
        }
    }
}

const GAUSSIAN_ESTIMATORS: &[&str] = &["score", "bonnet", "stein-first-order", "price"];
const GVM_ESTIMATORS: &[&str] = &[
    "gvm-mu",
    "gvm-alpha",
    "gvm-alpha-marginalized",
    "gvm-sigma-hessian",
    "gvm-sigma-first-order",
    "gvm-sigma-marginalized",
];

/// Estimators whose per-sample terms need a Hessian.
pub fn needs_hessian(id: &str) -> bool {
    matches!(id, "price" | "gvm-sigma-hessian" | "gvm-sigma-marginalized")
}

pub fn parse(text: &str) -> Result<Experiment, ConfigError> {
    let cfg: ExperimentConfig = match toml::from_str(text) {
        Ok(cfg) => cfg,
        Err(e) => return bad(format!("malformed config: {e}")),
    };
    validate(cfg)
}

fn vector(raw: &[f64], dim: usize, what: &str) -> Result<Vector, ConfigError> {
    if raw.len() != dim {
        return bad(format!("{what} has length {}, expected {dim}", raw.len()));
    }
    Vector::new(raw.to_vec()).map_err(|e| ConfigError(format!("{what}: {e}")))
}

fn spd(raw: &[Vec<f64>], dim: usize) -> Result<SpdMatrix, ConfigError> {
    if raw.len() != dim || raw.iter().any(|r| r.len() != dim) {
        return bad(format!("sigma must be {dim}x{dim}"));
    }
    let spd = SpdMatrix::from_rows(raw).map_err(|e| ConfigError(format!("sigma: {e}")))?;
    spd.cholesky()
        .map_err(|e| ConfigError(format!("sigma: {e}")))?;
    Ok(spd)
}

fn build_h(cfg: &HConfig, dim: usize) -> Result<TestFunction, ConfigError> {
    match cfg.kind.as_str() {
        "quadratic" => {
            let a_rows = cfg.a.clone().unwrap_or_else(|| vec![vec![0.0; dim]; dim]);
            if a_rows.len() != dim || a_rows.iter().any(|r| r.len() != dim) {
                return bad(format!("h.a must be {dim}x{dim}"));
            }
            let a = Matrix::from_rows(&a_rows).map_err(|e| ConfigError(format!("h.a: {e}")))?;
            let b = match &cfg.b {
                Some(b) => vector(b, dim, "h.b")?,
                None => Vector::zeros(dim),
            };
            TestFunction::quadratic(a, b, cfg.c.unwrap_or(0.0))
                .map_err(|e| ConfigError(format!("h: {e}")))
        }
        "abs-sum" => Ok(TestFunction::abs_sum(dim)),
        "log-sum-exp" => {
            let w = cfg
                .weights
                .as_ref()
                .ok_or_else(|| ConfigError("log-sum-exp needs h.weights".into()))?;
            Ok(TestFunction::log_sum_exp(vector(w, dim, "h.weights")?))
        }
        other => bad(format!("unknown h kind '{other}'")),
    }
}

fn validate(cfg: ExperimentConfig) -> Result<Experiment, ConfigError> {
    if cfg.dim == 0 {
        return bad("dim must be at least 1");
    }
    if cfg.n_samples < 2 {
        return bad("n_samples must be at least 2");
    }
    if cfg.estimators.is_empty() {
        return bad("estimators list is empty");
    }
    let h = build_h(&cfg.h, cfg.dim)?;

    let family = match cfg.family.as_str() {
        "gaussian" => {
            let mu = vector(
                cfg.params.mu.as_deref().unwrap_or(&[]),
                cfg.dim,
                "params.mu",
            )?;
            let sigma = spd(
                cfg.params
                    .sigma
                    .as_deref()
                    .ok_or_else(|| ConfigError("missing params.sigma".into()))?,
                cfg.dim,
            )?;
            let p =
                GaussianParams::new(mu, sigma).map_err(|e| ConfigError(format!("params: {e}")))?;
            Family::Gaussian(p)
        }
        "skew-gaussian" | "emg" | "student-t" | "nig" => {
            let mu = vector(
                cfg.params.mu.as_deref().unwrap_or(&[]),
                cfg.dim,
                "params.mu",
            )?;
            let alpha = match &cfg.params.alpha {
                Some(a) => vector(a, cfg.dim, "params.alpha")?,
                None => Vector::zeros(cfg.dim),
            };
            let sigma = spd(
                cfg.params
                    .sigma
                    .as_deref()
                    .ok_or_else(|| ConfigError("missing params.sigma".into()))?,
                cfg.dim,
            )?;
            let mixing = match cfg.family.as_str() {
                "skew-gaussian" => MixingSpec::HalfNormalAbs,
                "emg" => MixingSpec::ExponentialUnit,
                "student-t" => {
                    let beta = cfg
                        .params
                        .beta
                        .ok_or_else(|| ConfigError("student-t needs params.beta".into()))?;
                    if !alpha.is_zero() {
                        return bad("student-t requires alpha = 0");
                    }
                    MixingSpec::inv_gamma(beta)
                        .map_err(|e| ConfigError(format!("params.beta: {e}")))?
                }
                "nig" => {
                    let beta = cfg
                        .params
                        .beta
                        .ok_or_else(|| ConfigError("nig needs params.beta".into()))?;
                    MixingSpec::inv_gauss(beta)
                        .map_err(|e| ConfigError(format!("params.beta: {e}")))?
                }
                _ => unreachable!(),
            };
            if cfg.family == "emg" && alpha.is_zero() {
                return bad("emg requires a nonzero alpha (DegenerateSkew at alpha = 0)");
            }
            let p = GvmParams::new(mu, alpha, sigma)
                .map_err(|e| ConfigError(format!("params: {e}")))?;
            Family::Gvm { params: p, mixing }
        }
        "ef-exponential" => {
            let lambda = cfg
                .params
                .lambda
                .ok_or_else(|| ConfigError("ef-exponential needs params.lambda".into()))?;
            if cfg.dim != 1 {
                return bad("ef-exponential is univariate (dim = 1)");
            }
            Family::EfExponential(
                ExponentialEf::new(lambda)
                    .map_err(|e| ConfigError(format!("params.lambda: {e}")))?,
            )
        }
        "ef-gamma" => {
            let lambda = cfg
                .params
                .lambda
                .ok_or_else(|| ConfigError("ef-gamma needs params.lambda".into()))?;
            let shape = cfg
                .params
                .shape
                .ok_or_else(|| ConfigError("ef-gamma needs params.shape".into()))?;
            if cfg.dim != 1 {
                return bad("ef-gamma is univariate (dim = 1)");
            }
            Family::EfGamma(
                GammaRateEf::new(shape, lambda).map_err(|e| ConfigError(format!("params: {e}")))?,
            )
        }
        "ef-bivariate" => {
            let lambda = cfg
                .params
                .lambda
                .ok_or_else(|| ConfigError("ef-bivariate needs params.lambda".into()))?;
            if cfg.dim != 2 {
                return bad("ef-bivariate is two-dimensional (dim = 2)");
            }
            Family::EfBivariate(
                CoupledExponentialPair::new(lambda)
                    .map_err(|e| ConfigError(format!("params.lambda: {e}")))?,
            )
        }
        other => return bad(format!("unknown family '{other}'")),
    };

    for id in &cfg.estimators {
        check_compatible(&family, id, &h)?;
    }

    if cfg.oracle && cfg.dim > 2 {
        return bad("oracle verification requires dim <= 2");
    }

    Ok(Experiment {
        family,
        h,
        estimators: cfg.estimators,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        oracle: cfg.oracle,
    })
}


fn check_compatible(family: &Family, id: &str, h: &TestFunction) -> Result<(), ConfigError> {
    let allowed: &[&str] = match family {
        Family::Gaussian(_) => GAUSSIAN_ESTIMATORS,
        Family::Gvm { .. } => GVM_ESTIMATORS,
        Family::EfExponential(_) | Family::EfGamma(_) => &["implicit"],
        Family::EfBivariate(_) => &["implicit-bivariate"],
    };
    if !allowed.contains(&id) {
        return bad(format!(
            "estimator '{id}' is not compatible with family '{}' (allowed: {})",
            family.name(),
            allowed.join(", ")
        ));
    }
    if needs_hessian(id) && !h.has_hessian() {
        return bad(format!(
            "SmoothnessViolation: estimator '{id}' requires a twice-differentiable h, \
             but abs-sum only has an almost-everywhere gradient"
        ));
    }
    if let Family::Gvm { mixing, .. } = family {
        let has_u_decomposition = matches!(
            mixing,
            MixingSpec::HalfNormalAbs | MixingSpec::ExponentialUnit
        );
        if id == "gvm-alpha-marginalized" && !has_u_decomposition {
            return bad(format!(
                "estimator '{id}' needs a u-decomposition, which only the skew-gaussian \
                 and emg families have"
            ));
        }
        if id == "gvm-sigma-marginalized" && has_u_decomposition {
            return bad(format!(
                "estimator '{id}' needs a v-decomposition, which only the student-t and \
                 nig families have"
            ));
        }
    }
    Ok(())
}
