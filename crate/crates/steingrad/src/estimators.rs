//! Monte-Carlo gradient estimators built on the Stein-type identities: the
//! score-function and first-order mean estimators, the first- and
//! second-order covariance estimators, their variance-mean-mixture
//! generalizations (joint and marginalized forms), and the implicit
//! reparameterization estimators driven by CDF derivatives.
//!
//! Every estimator walks its `RandomStream` sequentially and reduces in a
//! fixed order, so results are bit-identical across runs for a fixed token.

use crate::distributions::{gaussian_sample, gvm_sample, GaussianParams, GvmParams, MixingSpec};
use crate::ef::{bivariate_velocities, implicit_velocity_1d, BivariateEfMixture, UnivariateEf};
use crate::error::{Error, Result};
use crate::gvm_densities::WeightDecomposition;
use crate::numerics::{Matrix, RandomStream, Vector};
use crate::testfns::{Smoothness, TestFunction};

/// Which parameter a gradient estimate targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradTarget {
    Mu,
    Alpha,
    Sigma,
    Lambda(usize),
}

impl GradTarget {
    pub fn label(&self) -> String {
        match self {
            GradTarget::Mu => "mu".into(),
            GradTarget::Alpha => "alpha".into(),
            GradTarget::Sigma => "sigma".into(),
            GradTarget::Lambda(i) => format!("lambda{i}"),
        }
    }
}

/// Vector- or matrix-shaped value (matching the target parameter).
#[derive(Clone, Debug, PartialEq)]
pub enum Estimate {
    Vector(Vector),
    Matrix(Matrix),
}

impl Estimate {
    pub fn as_vector(&self) -> &Vector {
        match self {
            Estimate::Vector(v) => v,
            Estimate::Matrix(_) => panic!("matrix-shaped estimate"),
        }
    }

    pub fn as_matrix(&self) -> &Matrix {
        match self {
            Estimate::Matrix(m) => m,
            Estimate::Vector(_) => panic!("vector-shaped estimate"),
        }
    }

    /// Flatten to (coordinate label, value) pairs in a fixed order.
    pub fn flatten(&self) -> Vec<(String, f64)> {
        match self {
            Estimate::Vector(v) => (0..v.dim()).map(|k| (k.to_string(), v[k])).collect(),
            Estimate::Matrix(m) => {
                let mut out = Vec::with_capacity(m.n_rows() * m.n_cols());
                for j in 0..m.n_rows() {
                    for k in 0..m.n_cols() {
                        out.push((format!("{j},{k}"), m.get(j, k)));
                    }
                }
                out
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Estimate::Vector(v) => v.max_abs(),
            Estimate::Matrix(m) => m.max_abs(),
        }
    }
}

/// A Monte-Carlo gradient estimate with per-coordinate standard errors.
#[derive(Clone, Debug)]
pub struct GradEstimate {
    pub target: GradTarget,
    pub estimate: Estimate,
    pub std_error: Estimate,
    pub n_samples: usize,
    pub estimator_id: &'static str,
}

impl GradEstimate {
    /// (coordinate label, estimate, standard error) triples in a fixed
    /// order.
    pub fn rows(&self) -> Vec<(String, f64, f64)> {
        self.estimate
            .flatten()
            .into_iter()
            .zip(self.std_error.flatten())
            .map(|((label, est), (_, se))| (label, est, se))
            .collect()
    }
}

/// Sample count, random stream, and the variance-reduction switches shared
/// by every estimator.
#[derive(Clone, Copy, Debug)]
pub struct EstimatorConfig {
    pub n_samples: usize,
    pub rng: RandomStream,
    /// Replace each per-sample covariance term by its symmetric part; the
    /// limit is symmetric, so the expectation is unchanged.
    pub symmetrize_sigma: bool,
    /// Prefer the marginalized forms where a decomposition is
    /// available (a dispatch hint for batch runners; the marginalized
    /// estimators are their own entry points).
    pub marginalized: bool,
}

impl EstimatorConfig {
    pub fn new(n_samples: usize, rng: RandomStream) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::InvalidConfig(format!("n_samples {n_samples} < 2")));
        }
        Ok(EstimatorConfig {
            n_samples,
            rng,
            symmetrize_sigma: true,
            marginalized: false,
        })
    }

    pub fn with_symmetrize(mut self, on: bool) -> Self {
        self.symmetrize_sigma = on;
        self
    }
}

/// Streaming mean/variance over flat coordinate slices (Welford).
struct Accumulator {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Accumulator {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, term: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for (k, &x) in term.iter().enumerate() {
            let delta = x - self.mean[k];
            self.mean[k] += delta / n;
            self.m2[k] += delta * (x - self.mean[k]);
        }
    }

    /// Mean and standard error (sample std / sqrt(n)) per coordinate.
    fn finish(self) -> (Vec<f64>, Vec<f64>) {
        let n = self.count as f64;
        let se = self
            .m2
            .iter()
            .map(|m2| (m2 / (n - 1.0) / n).sqrt())
            .collect();
        (self.mean, se)
    }
}

fn vector_estimate(
    target: GradTarget,
    estimator_id: &'static str,
    acc: Accumulator,
) -> GradEstimate {
    let n = acc.count;
    let (mean, se) = acc.finish();
    GradEstimate {
        target,
        estimate: Estimate::Vector(Vector::from_raw(mean)),
        std_error: Estimate::Vector(Vector::from_raw(se)),
        n_samples: n,
        estimator_id,
    }
}

fn matrix_estimate(
    target: GradTarget,
    estimator_id: &'static str,
    d: usize,
    acc: Accumulator,
) -> GradEstimate {
    let n = acc.count;
    let (mean, se) = acc.finish();
    let to_matrix = |flat: Vec<f64>| {
        let mut m = Matrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                m.set(j, k, flat[j * d + k]);
            }
        }
        m
    };
    GradEstimate {
        target,
        estimate: Estimate::Matrix(to_matrix(mean)),
        std_error: Estimate::Matrix(to_matrix(se)),
        n_samples: n,
        estimator_id,
    }
}

fn matrix_flat(m: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.n_rows() * m.n_cols());
    for j in 0..m.n_rows() {
        for k in 0..m.n_cols() {
            out.push(m.get(j, k));
        }
    }
    out
}

fn check_dims(p_dim: usize, h: &TestFunction) -> Result<()> {
    if h.dim() != p_dim {
        return Err(Error::DimensionMismatch {
            expected: p_dim,
            got: h.dim(),
        });
    }
    Ok(())
}

fn require_hessian(h: &TestFunction, estimator: &str) -> Result<()> {
    if !h.has_hessian() || h.smoothness() < Smoothness::C1GradAc {
        return Err(Error::SmoothnessViolation(format!(
            "{estimator} needs a continuously differentiable gradient with a Hessian, got a {:?} function",
            h.smoothness()
        )));
    }
    Ok(())
}

/// Score-function estimator of the mean gradient:
/// `(1/N) sum inv(Sigma)(z_n - mu) h(z_n)`. Unbiased for any integrable h,
/// typically the high-variance baseline.
pub fn score_grad_mu(
    p: &GaussianParams,
    h: &TestFunction,
    cfg: &EstimatorConfig,
) -> Result<GradEstimate> {
    check_dims(p.dim(), h)?;
    let mut acc = Accumulator::new(p.dim());
    let mut rng = cfg.rng;
    for _ in 0..cfg.n_samples {
        let (r, z) = gaussian_sample(p, rng);
        rng = r;
        let term = p.sigma_solve(&z.sub(p.mu())).scale(h.value(&z));
        acc.push(term.as_slice());
    }
    Ok(vector_estimate(GradTarget::Mu, "score", acc))
}

/// First-order mean-gradient identity: `(1/N) sum grad h(z_n)`; needs only
/// an almost-everywhere gradient.
pub fn bonnet_grad_mu(
    p: &GaussianParams,
    h: &TestFunction,
    cfg: &EstimatorConfig,
) -> Result<GradEstimate> {
    check_dims(p.dim(), h)?;
    let mut acc = Accumulator::new(p.dim());
    let mut rng = cfg.rng;
    for _ in 0..cfg.n_samples {
        let (r, z) = gaussian_sample(p, rng);
        rng = r;
        acc.push(h.grad(&z).as_slice());
    }
    Ok(vector_estimate(GradTarget::Mu, "bonnet", acc))
}

/// First-order covariance-gradient identity:
/// `(1/2N) sum inv(Sigma)(z_n - mu) grad h(z_n)'`; needs only an
/// almost-everywhere gradient.
pub fn stein_first_order_sigma(
    p: &GaussianParams,
    h: &TestFunction,
    cfg: &EstimatorConfig,
) -> Result<GradEstimate> {
    check_dims(p.dim(), h)?;
    let d = p.dim();
    let mut acc = Accumulator::new(d * d);
    let mut rng = cfg.rng;
    for _ in 0..cfg.n_samples {
        let (r, z) = gaussian_sample(p, rng);
        rng = r;
        let score = p.sigma_solve(&z.sub(p.mu()));
        let mut term = score.outer(&h.grad(&z)).scale(0.5);
        if cfg.symmetrize_sigma {
            term = term.symmetric_part();
        }
        acc.push(&matrix_flat(&term));
    }
    Ok(matrix_estimate(
        GradTarget::Sigma,
        "stein-first-order",
        d,
        acc,
    ))
}

/// Second-order covariance-gradient identity: `(1/2N) sum hess h(z_n)`.
/// Requires a continuously differentiable gradient; exact (zero variance)
/// on quadratics.
pub fn price_grad_sigma(
    p: &GaussianParams,
    h: &TestFunction,
    cfg: &EstimatorConfig,
) -> Result<GradEstimate> {
    check_dims(p.dim(), h)?;
    require_hessian(h, "price")?;
    let d = p.dim();
    let mut acc = Accumulator::new(d * d);
    let mut rng = cfg.rng;
    for _ in 0..cfg.n_samples {
        let (r, z) = gaussian_sample(p, rng);
        rng = r;
        let term = h.hessian(&z).expect("gated above").scale(0.5);
        acc.push(&matrix_flat(&term));
    }
    Ok(matrix_estimate(GradTarget::Sigma, "price", d, acc))
}

/// Mixture mean gradient: `(1/N) sum grad h(z_n)` with `z` drawn from the
/// joint `q(w, z)`.
pub fn gvm_grad_mu(
    p: &GvmParams,
    m: &MixingSpec,
    h: &TestFunction,
    cfg: &EstimatorConfig,
) -> Result<GradEstimate> {
    check_dims(p.dim(), h)?;
    let mut acc = Accumulator::new(p.dim());
    let mut rng = cfg.rng;
    for _ in 0..cfg.n_samples {
        let (r, js) = gvm_sample(p, m, rng);
        rng = r;
        acc.push(h.grad(&js.z).as_slice());
    }
    Ok(vector_estimate(GradTarget::Mu, "gvm-mu", acc))
}

/// Mixture asymmetry gradient: `(1/N) sum u(w_n) grad h(z_n)`.
pub fn gvm_grad_alpha(
    p: &GvmParams,
    m: &MixingSpec,
    h: &TestFunction,
    cfg: &EstimatorConfig,
) -> Result<GradEstimate> {
    check_dims(p.dim(), h)?;
    let mut acc = Accumulator::new(p.dim());
    let mut rng = cfg.rng;
    for _ in 0..cfg.n_samples {
        let (r, js) = gvm_sample(p, m, rng);
        rng = r;
        acc.push(h.grad(&js.z).scale(m.u(js.w)).as_slice());
    }
    Ok(vector_estimate(GradTarget::Alpha, "gvm-alpha", acc))
}

/// Which of the two equal forms of the mixture covariance gradient to
/// average.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaEstimatorMode {
    /// `(1/2N) sum v(w_n) hess h(z_n)`; needs second-order smoothness.
    Hessian,
    /// `(1/2N) sum inv(Sigma)(z_n - mu - u(w_n) alpha) grad h(z_n)'`; needs
    /// only an almost-everywhere gradient.
    FirstOrder,
}

/// Mixture covariance gradient in either of its two equal forms.
pub fn gvm_grad_sigma(
    p: &GvmParams,
    m: &MixingSpec,
    h: &TestFunction,
    cfg: &EstimatorConfig,
    mode: SigmaEstimatorMode,
) -> Result<GradEstimate> {
    check_dims(p.dim(), h)?;
    if mode == SigmaEstimatorMode::Hessian {
        require_hessian(h, "gvm-sigma (hessian mode)")?;
    }
    let d = p.dim();
    let mut acc = Accumulator::new(d * d);
    let mut rng = cfg.rng;
    for _ in 0..cfg.n_samples {
        let (r, js) = gvm_sample(p, m, rng);
        rng = r;
        let term = match mode {
            SigmaEstimatorMode::Hessian => h
                .hessian(&js.z)
                .expect("gated above")
                .scale(0.5 * m.v(js.w)),
            SigmaEstimatorMode::FirstOrder => {
                let uw = m.u(js.w);
                let mean = if uw == 0.0 {
                    p.mu().clone()
                } else {
                    p.mu().add(&p.alpha().scale(uw))
                };
                let score = p.sigma_solve(&js.z.sub(&mean));
                let mut t = score.outer(&h.grad(&js.z)).scale(0.5);
                if cfg.symmetrize_sigma {
                    t = t.symmetric_part();
                }
                t
            }
        };
        acc.push(&matrix_flat(&term));
    }
    let id = match mode {
        SigmaEstimatorMode::Hessian => "gvm-sigma-hessian",
        SigmaEstimatorMode::FirstOrder => "gvm-sigma-first-order",
    };
    Ok(matrix_estimate(GradTarget::Sigma, id, d, acc))
}

/// Marginalized asymmetry gradient:
/// `sum_j E_{q_hat_j}[u_j(z) grad h(z)]`, drawing `n_samples` fresh draws
/// from every component density.
pub fn gvm_grad_alpha_marginalized(
    p: &GvmParams,
    dec: &WeightDecomposition,
    h: &TestFunction,
    cfg: &EstimatorConfig,
) -> Result<GradEstimate> {
    check_dims(p.dim(), h)?;
    let d = p.dim();
    let mut total_mean = vec![0.0; d];
    let mut total_var = vec![0.0; d];
    let mut rng = cfg.rng;
    for comp in dec.components() {
        let mut acc = Accumulator::new(d);
        for _ in 0..cfg.n_samples {
            let (r, z) = comp.density().sample(rng)?;
            rng = r;
            acc.push(h.grad(&z).scale(comp.weight(&z)).as_slice());
        }
        let (mean, se) = acc.finish();
        for k in 0..d {
            total_mean[k] += mean[k];
            total_var[k] += se[k] * se[k];
        }
    }
    Ok(GradEstimate {
        target: GradTarget::Alpha,
        estimate: Estimate::Vector(Vector::from_raw(total_mean)),
        std_error: Estimate::Vector(Vector::from_raw(
            total_var.into_iter().map(f64::sqrt).collect(),
        )),
        n_samples: cfg.n_samples,
        estimator_id: "gvm-alpha-marginalized",
    })
}

/// Marginalized covariance gradient:
/// `(1/2) sum_j E_{q_hat_j}[v_j(z) hess h(z)]`.
pub fn gvm_grad_sigma_marginalized(
    p: &GvmParams,
    dec: &WeightDecomposition,
    h: &TestFunction,
    cfg: &EstimatorConfig,
) -> Result<GradEstimate> {
    check_dims(p.dim(), h)?;
    require_hessian(h, "gvm-sigma-marginalized")?;
    let d = p.dim();
    let mut total_mean = vec![0.0; d * d];
    let mut total_var = vec![0.0; d * d];
    let mut rng = cfg.rng;
    for comp in dec.components() {
        let mut acc = Accumulator::new(d * d);
        for _ in 0..cfg.n_samples {
            let (r, z) = comp.density().sample(rng)?;
            rng = r;
            let term = h
                .hessian(&z)
                .expect("gated above")
                .scale(0.5 * comp.weight(&z));
            acc.push(&matrix_flat(&term));
        }
        let (mean, se) = acc.finish();
        for k in 0..d * d {
            total_mean[k] += mean[k];
            total_var[k] += se[k] * se[k];
        }
    }
    let to_matrix = |flat: Vec<f64>| {
        let mut m = Matrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                m.set(j, k, flat[j * d + k]);
            }
        }
        m
    };
    Ok(GradEstimate {
        target: GradTarget::Sigma,
        estimate: Estimate::Matrix(to_matrix(total_mean)),
        std_error: Estimate::Matrix(to_matrix(total_var.into_iter().map(f64::sqrt).collect())),
        n_samples: cfg.n_samples,
        estimator_id: "gvm-sigma-marginalized",
    })
}

/// Implicit reparameterization gradient for a univariate EF distribution:
/// `-(1/N) sum f_i(z_n) h'(z_n)` with `f_i = d(cdf)/d(lambda_i) / pdf`.
pub fn implicit_grad_1d<E: UnivariateEf>(
    dist: &E,
    i: usize,
    h: &TestFunction,
    cfg: &EstimatorConfig,
) -> Result<GradEstimate> {
    check_dims(1, h)?;
    let mut acc = Accumulator::new(1);
    let mut rng = cfg.rng;
    for _ in 0..cfg.n_samples {
        let (r, z) = dist.sample(rng);
        rng = r;
        let f = implicit_velocity_1d(dist, i, z)?;
        let g = h.grad(&Vector::from_raw(vec![z]));
        acc.push(&[-f * g[0]]);
    }
    Ok(vector_estimate(GradTarget::Lambda(i), "implicit", acc))
}

/// Implicit reparameterization gradient for a bivariate EF mixture:
/// `-(1/N) sum (f_{i,1} d1 h + f_{i,2} d2 h)` with the velocities from the
/// triangular solve.
pub fn implicit_grad_bivariate<M: BivariateEfMixture>(
    mix: &M,
    i: usize,
    h: &TestFunction,
    cfg: &EstimatorConfig,
) -> Result<GradEstimate> {
    check_dims(2, h)?;
    let mut acc = Accumulator::new(1);
    let mut rng = cfg.rng;
    for _ in 0..cfg.n_samples {
        let (r, z) = mix.sample(rng);
        rng = r;
        let f = bivariate_velocities(mix, i, z)?;
        let g = h.grad(&Vector::from_raw(z.to_vec()));
        acc.push(&[-(f[0] * g[0] + f[1] * g[1])]);
    }
    Ok(vector_estimate(
        GradTarget::Lambda(i),
        "implicit-bivariate",
        acc,
    ))
}

/// Per-sample term variances for a set of estimators on shared draws
/// (everything is re-run from the same starting token).
pub fn per_sample_variances(est: &GradEstimate) -> Vec<(String, f64)> {
    // Reconstruct Var = (se * sqrt(n))^2 * n / n  == se^2 * n.
    let n = est.n_samples as f64;
    est.rows()
        .into_iter()
        .map(|(label, _, se)| (label, se * se * n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gvm_densities::{
        emg_u_decomposition, nig_v_decomposition, skew_u_decomposition, student_v_decomposition,
    };
    use crate::numerics::SpdMatrix;

    const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

    fn gauss_1d(mu: f64, var: f64) -> GaussianParams {
        GaussianParams::new(
            Vector::new(vec![mu]).unwrap(),
            SpdMatrix::from_rows(&[vec![var]]).unwrap(),
        )
        .unwrap()
    }

    fn gvm_1d(mu: f64, alpha: f64, sigma: f64) -> GvmParams {
        GvmParams::new(
            Vector::new(vec![mu]).unwrap(),
            Vector::new(vec![alpha]).unwrap(),
            SpdMatrix::from_rows(&[vec![sigma]]).unwrap(),
        )
        .unwrap()
    }

    fn quad_1d(a: f64, b: f64, c: f64) -> TestFunction {
        TestFunction::quadratic(
            Matrix::from_rows(&[vec![a]]).unwrap(),
            Vector::new(vec![b]).unwrap(),
            c,
        )
        .unwrap()
    }

    fn linear_1d() -> TestFunction {
        quad_1d(0.0, 1.0, 0.0)
    }

    fn cfg(n: usize, seed: u64) -> EstimatorConfig {
        EstimatorConfig::new(n, RandomStream::new(seed, 0)).unwrap()
    }

    fn assert_within_se(got: f64, want: f64, se: f64, what: &str) {
        assert!(
            (got - want).abs() <= 4.0 * se + 1e-12,
            "{what}: {got} vs {want} (4se = {})",
            4.0 * se
        );
    }

    fn assert_agree(a: &GradEstimate, b: &GradEstimate) {
        for ((label, xa, sa), (_, xb, sb)) in a.rows().into_iter().zip(b.rows()) {
            let combined = (sa * sa + sb * sb).sqrt();
            assert!(
                (xa - xb).abs() <= 4.0 * combined + 1e-12,
                "{} vs {} disagree at {label}: {xa} vs {xb} (4se = {})",
                a.estimator_id,
                b.estimator_id,
                4.0 * combined
            );
        }
    }

    #[test]
    fn config_rejects_tiny_sample_counts() {
        assert!(EstimatorConfig::new(1, RandomStream::new(0, 0)).is_err());
        assert!(EstimatorConfig::new(2, RandomStream::new(0, 0)).is_ok());
    }

    #[test]
    fn score_on_constant_has_zero_mean() {
        let p = gauss_1d(0.5, 1.0);
        let est = score_grad_mu(&p, &TestFunction::constant(1, 3.0), &cfg(50_000, 1)).unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, 0.0, se, "score on constant");
    }

    #[test]
    fn score_quadratic_mean_gradient() {
        // E[z^2] = sigma^2 + mu^2, so d/dmu = 2 mu = 1.0 at mu = 0.5.
        let p = gauss_1d(0.5, 1.0);
        let est = score_grad_mu(&p, &quad_1d(1.0, 0.0, 0.0), &cfg(50_000, 2)).unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, 1.0, se, "score on quadratic");
    }

    #[test]
    fn bonnet_constant_is_exactly_zero() {
        let p = gauss_1d(0.5, 1.0);
        let est = bonnet_grad_mu(&p, &TestFunction::constant(1, 3.0), &cfg(1000, 3)).unwrap();
        assert_eq!(est.estimate.as_vector()[0], 0.0);
        assert_eq!(est.std_error.as_vector()[0], 0.0);
    }

    #[test]
    fn bonnet_agrees_with_score_on_shared_draws() {
        let p = gauss_1d(0.5, 1.0);
        let h = quad_1d(1.0, 0.0, 0.0);
        let c = cfg(50_000, 4);
        let bonnet = bonnet_grad_mu(&p, &h, &c).unwrap();
        let score = score_grad_mu(&p, &h, &c).unwrap();
        let (_, got, se) = bonnet.rows()[0].clone();
        assert_within_se(got, 1.0, se, "bonnet on quadratic");
        assert_agree(&bonnet, &score);
        // First-order form has lower variance here (reported, not asserted
        // in general; on quadratics it provably does).
        assert!(bonnet.std_error.as_vector()[0] < score.std_error.as_vector()[0]);
    }

    #[test]
    fn bonnet_abs_sum_analytic_target() {
        // d/dmu E|z| = 2 Phi(mu/sigma) - 1.
        let p = gauss_1d(0.3, 1.0);
        let est = bonnet_grad_mu(&p, &TestFunction::abs_sum(1), &cfg(50_000, 5)).unwrap();
        let want = 2.0 * crate::numerics::norm_cdf(0.3) - 1.0;
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, want, se, "bonnet on abs");
    }

    #[test]
    fn stein_first_order_targets() {
        let p = gauss_1d(0.0, 1.0);
        // Constant: exactly zero.
        let est =
            stein_first_order_sigma(&p, &TestFunction::constant(1, 2.0), &cfg(1000, 6)).unwrap();
        assert_eq!(est.estimate.as_matrix().max_abs(), 0.0);

        // d/d(sigma^2) E|z| = (1/2) sqrt(2/pi) at mu = 0.
        let est = stein_first_order_sigma(&p, &TestFunction::abs_sum(1), &cfg(50_000, 7)).unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, 0.5 * SQRT_2_OVER_PI, se, "stein on abs");
    }

    #[test]
    fn stein_first_order_quadratic_2d() {
        let sigma = SpdMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 0.8]]).unwrap();
        let p = GaussianParams::new(Vector::zeros(2), sigma).unwrap();
        let a = Matrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.7]]).unwrap();
        let h = TestFunction::quadratic(a.clone(), Vector::zeros(2), 0.0).unwrap();
        let est = stein_first_order_sigma(&p, &h, &cfg(100_000, 8)).unwrap();
        for (label, got, se) in est.rows() {
            let idx: Vec<usize> = label.split(',').map(|s| s.parse().unwrap()).collect();
            assert_within_se(got, a.get(idx[0], idx[1]), se, &format!("stein [{label}]"));
        }
        // Symmetrized terms produce an exactly symmetric estimate.
        let m = est.estimate.as_matrix();
        assert_eq!(m.get(0, 1), m.get(1, 0));

        // Without symmetrization the estimate is only symmetric in
        // expectation.
        let est_raw =
            stein_first_order_sigma(&p, &h, &cfg(100_000, 8).with_symmetrize(false)).unwrap();
        let m = est_raw.estimate.as_matrix();
        let s = est_raw.std_error.as_matrix();
        let combined = (s.get(0, 1).powi(2) + s.get(1, 0).powi(2)).sqrt();
        assert!(m.get(0, 1) != m.get(1, 0));
        assert!((m.get(0, 1) - m.get(1, 0)).abs() <= 4.0 * combined);
    }

    #[test]
    fn price_exact_on_quadratics() {
        let p = gauss_1d(0.3, 1.0);
        let h = quad_1d(1.5, 0.2, -1.0);
        let est = price_grad_sigma(&p, &h, &cfg(5000, 9)).unwrap();
        assert_eq!(est.estimate.as_matrix().get(0, 0), 1.5);
        assert!(est.std_error.as_matrix().max_abs() <= 1e-12);
    }

    #[test]
    fn price_rejects_abs_sum() {
        let p = gauss_1d(0.0, 1.0);
        let err = price_grad_sigma(&p, &TestFunction::abs_sum(1), &cfg(100, 10)).unwrap_err();
        assert!(matches!(err, Error::SmoothnessViolation(_)));
    }

    #[test]
    fn gvm_mu_linear_is_exact() {
        let p = gvm_1d(0.0, 1.0, 1.0);
        let est =
            gvm_grad_mu(&p, &MixingSpec::HalfNormalAbs, &linear_1d(), &cfg(1000, 11)).unwrap();
        assert_eq!(est.estimate.as_vector()[0], 1.0);
        assert_eq!(est.std_error.as_vector()[0], 0.0);
    }

    #[test]
    fn gvm_mu_student_quadratic() {
        // E[h] = E[w] sigma^2 + mu^2 so d/dmu = 2 mu = 0.4.
        let p = gvm_1d(0.2, 0.0, 1.0);
        let m = MixingSpec::inv_gamma(3.0).unwrap();
        let est = gvm_grad_mu(&p, &m, &quad_1d(1.0, 0.0, 0.0), &cfg(50_000, 12)).unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, 0.4, se, "gvm-mu student");
    }

    #[test]
    fn gvm_alpha_targets() {
        // u = 0 (Student's t): exactly zero with zero variance.
        let p = gvm_1d(0.0, 0.5, 1.0);
        let m = MixingSpec::inv_gamma(3.0).unwrap();
        let est = gvm_grad_alpha(&p, &m, &linear_1d(), &cfg(1000, 13)).unwrap();
        assert_eq!(est.estimate.as_vector()[0], 0.0);
        assert_eq!(est.std_error.as_vector()[0], 0.0);

        // Skew Gaussian: d/dalpha E[z] = E|w| = sqrt(2/pi).
        let p = gvm_1d(0.0, 1.0, 1.0);
        let est = gvm_grad_alpha(
            &p,
            &MixingSpec::HalfNormalAbs,
            &linear_1d(),
            &cfg(50_000, 14),
        )
        .unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, SQRT_2_OVER_PI, se, "gvm-alpha skew");

        // EMG: d/dalpha E[z] = E[w] = 1.
        let est = gvm_grad_alpha(
            &p,
            &MixingSpec::ExponentialUnit,
            &linear_1d(),
            &cfg(50_000, 15),
        )
        .unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, 1.0, se, "gvm-alpha emg");
    }

    #[test]
    fn gvm_alpha_marginalized_matches_joint_target() {
        let p = gvm_1d(0.0, 1.0, 1.0);
        let dec = skew_u_decomposition(&p);
        let est = gvm_grad_alpha_marginalized(&p, &dec, &linear_1d(), &cfg(50_000, 16)).unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, SQRT_2_OVER_PI, se, "marginalized alpha skew");

        let joint = gvm_grad_alpha(
            &p,
            &MixingSpec::HalfNormalAbs,
            &linear_1d(),
            &cfg(50_000, 17),
        )
        .unwrap();
        assert_agree(&est, &joint);

        let dec = emg_u_decomposition(&p).unwrap();
        let est = gvm_grad_alpha_marginalized(&p, &dec, &linear_1d(), &cfg(50_000, 18)).unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, 1.0, se, "marginalized alpha emg");

        // Constant h: both components contribute exactly zero.
        let est = gvm_grad_alpha_marginalized(
            &p,
            &skew_u_decomposition(&p),
            &TestFunction::constant(1, 5.0),
            &cfg(1000, 19),
        )
        .unwrap();
        assert_eq!(est.estimate.as_vector()[0], 0.0);
    }

    #[test]
    fn gvm_sigma_modes_and_targets() {
        // Student's t, quadratic: gradient = E[w] A = 1.5 A.
        let p = gvm_1d(0.0, 0.0, 1.0);
        let m = MixingSpec::inv_gamma(3.0).unwrap();
        let h = quad_1d(1.0, 0.0, 0.0);
        let hess =
            gvm_grad_sigma(&p, &m, &h, &cfg(50_000, 20), SigmaEstimatorMode::Hessian).unwrap();
        let (_, got, se) = hess.rows()[0].clone();
        assert_within_se(got, 1.5, se, "gvm-sigma hessian student");

        let first =
            gvm_grad_sigma(&p, &m, &h, &cfg(50_000, 20), SigmaEstimatorMode::FirstOrder).unwrap();
        assert_agree(&hess, &first);

        // Skew Gaussian quadratic: only the E[v] Sigma term depends on
        // Sigma, so the gradient is 1.
        let p = gvm_1d(0.0, 1.0, 1.0);
        let est = gvm_grad_sigma(
            &p,
            &MixingSpec::HalfNormalAbs,
            &h,
            &cfg(50_000, 21),
            SigmaEstimatorMode::Hessian,
        )
        .unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, 1.0, se, "gvm-sigma skew");

        // Hessian mode refuses locally-AC-only integrands.
        let err = gvm_grad_sigma(
            &p,
            &MixingSpec::HalfNormalAbs,
            &TestFunction::abs_sum(1),
            &cfg(100, 22),
            SigmaEstimatorMode::Hessian,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SmoothnessViolation(_)));
    }

    #[test]
    fn gvm_reduces_bitwise_to_gaussian_on_degenerate_mixing() {
        let mu = Vector::new(vec![0.4, -0.7]).unwrap();
        let sigma = SpdMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.9]]).unwrap();
        let g = GaussianParams::new(mu.clone(), sigma.clone()).unwrap();
        let p = GvmParams::new(mu, Vector::zeros(2), sigma).unwrap();
        let h = TestFunction::log_sum_exp(Vector::new(vec![1.0, -0.5]).unwrap());
        let c = cfg(2000, 23);

        let a = gvm_grad_mu(&p, &MixingSpec::Degenerate, &h, &c).unwrap();
        let b = bonnet_grad_mu(&g, &h, &c).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.std_error, b.std_error);

        let a = gvm_grad_sigma(
            &p,
            &MixingSpec::Degenerate,
            &h,
            &c,
            SigmaEstimatorMode::Hessian,
        )
        .unwrap();
        let b = price_grad_sigma(&g, &h, &c).unwrap();
        assert_eq!(a.estimate, b.estimate);

        let a = gvm_grad_sigma(
            &p,
            &MixingSpec::Degenerate,
            &h,
            &c,
            SigmaEstimatorMode::FirstOrder,
        )
        .unwrap();
        let b = stein_first_order_sigma(&g, &h, &c).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.std_error, b.std_error);
    }

    #[test]
    fn gvm_sigma_marginalized_targets() {
        // Student's t d=1, beta=2: gradient of E[z^2] in sigma is
        // E[w] = beta/(beta-1) = 2.
        let p = gvm_1d(0.0, 0.0, 1.0);
        let dec = student_v_decomposition(&p, 2.0).unwrap();
        let h = quad_1d(1.0, 0.0, 0.0);
        let est = gvm_grad_sigma_marginalized(&p, &dec, &h, &cfg(50_000, 24)).unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, 2.0, se, "marginalized sigma student");

        // Agrees with the joint estimator.
        let m = MixingSpec::inv_gamma(2.0).unwrap();
        let joint =
            gvm_grad_sigma(&p, &m, &h, &cfg(50_000, 25), SigmaEstimatorMode::Hessian).unwrap();
        assert_agree(&est, &joint);

        // NIG: against the joint estimator too.
        let p = gvm_1d(0.1, 0.4, 1.0);
        let dec = nig_v_decomposition(&p, 2.0).unwrap();
        let est = gvm_grad_sigma_marginalized(&p, &dec, &h, &cfg(50_000, 26)).unwrap();
        let m = MixingSpec::inv_gauss(2.0).unwrap();
        let joint =
            gvm_grad_sigma(&p, &m, &h, &cfg(50_000, 27), SigmaEstimatorMode::Hessian).unwrap();
        assert_agree(&est, &joint);

        // Constant: exactly zero.
        let est =
            gvm_grad_sigma_marginalized(&p, &dec, &TestFunction::constant(1, 1.0), &cfg(1000, 28))
                .unwrap();
        assert_eq!(est.estimate.as_matrix().max_abs(), 0.0);
    }

    #[test]
    fn implicit_1d_targets() {
        // Exponential rate: d/dlambda E[z] = -1/lambda^2.
        let d = crate::ef::ExponentialEf::new(2.0).unwrap();
        let est = implicit_grad_1d(&d, 0, &linear_1d(), &cfg(50_000, 29)).unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, -0.25, se, "implicit exponential");

        // Gamma(shape 2, rate 1): d/dlambda E[z] = -2/lambda^2.
        let d = crate::ef::GammaRateEf::new(2.0, 1.0).unwrap();
        let est = implicit_grad_1d(&d, 0, &linear_1d(), &cfg(50_000, 30)).unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, -2.0, se, "implicit gamma");
    }

    #[test]
    fn implicit_gaussian_mean_recovers_bonnet_bitwise() {
        let d = crate::ef::GaussianMeanEf::new(0.5, 1.0).unwrap();
        let g = gauss_1d(0.5, 1.0);
        let h = quad_1d(1.0, 0.0, 0.0);
        let c = cfg(5000, 31);
        let implicit = implicit_grad_1d(&d, 0, &h, &c).unwrap();
        let bonnet = bonnet_grad_mu(&g, &h, &c).unwrap();
        assert_eq!(
            implicit.estimate.as_vector()[0],
            bonnet.estimate.as_vector()[0]
        );
        assert_eq!(
            implicit.std_error.as_vector()[0],
            bonnet.std_error.as_vector()[0]
        );
    }

    #[test]
    fn implicit_bivariate_targets() {
        // Independent pair, h = z1 + z2: gradient -2/lambda^2.
        let lam = 1.5;
        let m = crate::ef::IndependentExponentialPair::new(lam).unwrap();
        let h = TestFunction::quadratic(
            Matrix::zeros(2, 2),
            Vector::new(vec![1.0, 1.0]).unwrap(),
            0.0,
        )
        .unwrap();
        let est = implicit_grad_bivariate(&m, 0, &h, &cfg(50_000, 32)).unwrap();
        let (_, got, se) = est.rows()[0].clone();
        assert_within_se(got, -2.0 / (lam * lam), se, "implicit independent pair");

        // Constant: exactly zero.
        let est =
            implicit_grad_bivariate(&m, 0, &TestFunction::constant(2, 9.9), &cfg(100, 33)).unwrap();
        assert_eq!(est.estimate.as_vector()[0], 0.0);
    }

    #[test]
    fn estimates_are_deterministic() {
        let p = gauss_1d(0.1, 2.0);
        let h = TestFunction::abs_sum(1);
        let c = cfg(10_000, 34);
        let a = stein_first_order_sigma(&p, &h, &c).unwrap();
        let b = stein_first_order_sigma(&p, &h, &c).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.std_error, b.std_error);
    }
}
