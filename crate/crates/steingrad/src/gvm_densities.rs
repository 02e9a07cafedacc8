//! Closed-form marginal densities `q(z | mu, alpha, Sigma)` of the four
//! named variance-mean mixtures, and the finite weight decompositions of
//! `integral u(w) q(w, z) dw` and `integral v(w) q(w, z) dw` that let the
//! marginalized estimators sample `z` alone.
//!
//! Everything is computed in log space; the exponentially modified Gaussian
//! closed form in particular overflows in linear space at moderate
//! Mahalanobis distances.

use crate::distributions::{
    gaussian_logpdf, gaussian_sample, gvm_sample, GaussianParams, GvmParams, MixingSpec,
};
use crate::error::{Error, Result};
use crate::numerics::{bessel_k_scaled, ln_bessel_k, ln_norm_cdf, RandomStream, SpdMatrix, Vector};

use statrs::function::gamma::ln_gamma;

const LN_2: f64 = std::f64::consts::LN_2;
const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_2PI: f64 = crate::distributions::LN_2PI;

/// `(z - mu)' inv(Sigma) alpha`, `alpha' inv(Sigma) alpha`, and
/// `(z - mu)' inv(Sigma) (z - mu)` in one pass.
fn mixture_statistics(p: &GvmParams, z: &Vector) -> (f64, f64, f64) {
    let diff = z.sub(p.mu());
    let solved_diff = p.sigma_solve(&diff);
    let solved_alpha = p.sigma_solve(p.alpha());
    (
        diff.dot(&solved_alpha),
        p.alpha().dot(&solved_alpha),
        diff.dot(&solved_diff),
    )
}

/// Log density of the multivariate skew Gaussian
/// `q(z) = 2 Phi(c / sqrt(1 + A)) N(z | mu, Sigma + alpha alpha')`
/// with `c = (z - mu)' inv(Sigma) alpha` and `A = alpha' inv(Sigma) alpha`.
pub fn skew_gaussian_logpdf(p: &GvmParams, z: &Vector) -> f64 {
    assert_eq!(p.dim(), z.dim(), "dimension mismatch");
    let (c, a, _) = mixture_statistics(p, z);
    let widened = SpdMatrix::new(p.sigma().as_matrix().add(&p.alpha().outer(p.alpha())))
        .expect("Sigma + alpha alpha' inherits symmetry");
    let base = GaussianParams::new(p.mu().clone(), widened).expect("rank-one update stays SPD");
    LN_2 + ln_norm_cdf(c / (1.0 + a).sqrt()) + gaussian_logpdf(&base, z)
}

/// Log density of the multivariate exponentially modified Gaussian.
///
/// Fails with `DegenerateSkew` at `alpha = 0`, where the closed form (and
/// its weight decomposition) divides by `alpha' inv(Sigma) alpha`.
pub fn emg_logpdf(p: &GvmParams, z: &Vector) -> Result<f64> {
    assert_eq!(p.dim(), z.dim(), "dimension mismatch");
    let (c, a, q) = mixture_statistics(p, z);
    if a <= 0.0 {
        return Err(Error::DegenerateSkew);
    }
    let d = p.dim() as f64;
    Ok(
        0.5 * LN_2PI - 0.5 * (d * LN_2PI + p.chol().log_det()) - 0.5 * a.ln()
            + ln_norm_cdf((c - 1.0) / a.sqrt())
            + 0.5 * ((c - 1.0) * (c - 1.0) / a - q),
    )
}

/// Log density of the multivariate Student's t with `2 beta` degrees of
/// freedom (`alpha` must be zero; the inverse-gamma mixture has no
/// asymmetry channel).
pub fn student_t_logpdf(p: &GvmParams, beta: f64, z: &Vector) -> Result<f64> {
    assert_eq!(p.dim(), z.dim(), "dimension mismatch");
    if beta <= 1.0 || !beta.is_finite() {
        return Err(Error::InvalidShape(beta));
    }
    if !p.alpha().is_zero() {
        return Err(Error::NonzeroAlpha);
    }
    let (_, _, q) = mixture_statistics(p, z);
    let d = p.dim() as f64;
    Ok(
        -0.5 * (d * LN_PI + p.chol().log_det()) + ln_gamma(beta + 0.5 * d) - ln_gamma(beta)
            + beta * (2.0 * beta).ln()
            - (beta + 0.5 * d) * (2.0 * beta + q).ln(),
    )
}

/// Log density of the multivariate normal inverse Gaussian with
/// `w ~ InvGauss(1, beta)`.
pub fn nig_logpdf(p: &GvmParams, beta: f64, z: &Vector) -> Result<f64> {
    assert_eq!(p.dim(), z.dim(), "dimension mismatch");
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::InvalidShape(beta));
    }
    let (c, a_stat, q) = mixture_statistics(p, z);
    let d = p.dim() as f64;
    let a = a_stat + beta;
    let b = q + beta;
    let order = 0.5 * (d + 1.0);
    Ok(
        0.5 * beta.ln() - 0.5 * (d + 1.0) * LN_2PI - 0.5 * p.chol().log_det()
            + c
            + beta
            + LN_2
            + 0.25 * (d + 1.0) * (a.ln() - b.ln())
            + ln_bessel_k(order, (a * b).sqrt())?,
    )
}

/// One `(weight_fn, base_density)` term of a finite decomposition.
pub struct WeightComponent {
    weight: Box<dyn Fn(&Vector) -> f64 + Send + Sync>,
    density: ComponentDensity,
}

impl WeightComponent {
    pub fn weight(&self, z: &Vector) -> f64 {
        (self.weight)(z)
    }

    pub fn density(&self) -> &ComponentDensity {
        &self.density
    }
}

/// A base density `q_hat_j` of a decomposition: its log density for the
/// pointwise identities and a sampler for the marginalized estimators.
pub enum ComponentDensity {
    Gaussian(GaussianParams),
    SkewGaussian(GvmParams),
    Emg(GvmParams),
    StudentT { params: GvmParams, beta: f64 },
    Nig { params: GvmParams, beta: f64 },
}

impl ComponentDensity {
    pub fn logpdf(&self, z: &Vector) -> Result<f64> {
        match self {
            ComponentDensity::Gaussian(p) => Ok(gaussian_logpdf(p, z)),
            ComponentDensity::SkewGaussian(p) => Ok(skew_gaussian_logpdf(p, z)),
            ComponentDensity::Emg(p) => emg_logpdf(p, z),
            ComponentDensity::StudentT { params, beta } => student_t_logpdf(params, *beta, z),
            ComponentDensity::Nig { params, beta } => nig_logpdf(params, *beta, z),
        }
    }

    /// Draw `z` from this base density.
    pub fn sample(&self, rng: RandomStream) -> Result<(RandomStream, Vector)> {
        match self {
            ComponentDensity::Gaussian(p) => Ok(gaussian_sample(p, rng)),
            ComponentDensity::SkewGaussian(p) => {
                let (rng, js) = gvm_sample(p, &MixingSpec::HalfNormalAbs, rng);
                Ok((rng, js.z))
            }
            ComponentDensity::Emg(p) => {
                let (rng, js) = gvm_sample(p, &MixingSpec::ExponentialUnit, rng);
                Ok((rng, js.z))
            }
            ComponentDensity::StudentT { params, beta } => {
                let (rng, js) = gvm_sample(params, &MixingSpec::inv_gamma(*beta)?, rng);
                Ok((rng, js.z))
            }
            ComponentDensity::Nig { params, beta } => {
                let (rng, js) = gvm_sample(params, &MixingSpec::inv_gauss(*beta)?, rng);
                Ok((rng, js.z))
            }
        }
    }
}

/// Finite decomposition `integral u(w) q(w, z) dw = sum_j u_j(z) q_hat_j(z)`
/// (or the same with `v`); every shipped family has at most two terms.
pub struct WeightDecomposition {
    components: Vec<WeightComponent>,
}

impl WeightDecomposition {
    pub fn components(&self) -> &[WeightComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Evaluate `sum_j weight_j(z) * q_hat_j(z)` pointwise.
    pub fn evaluate(&self, z: &Vector) -> Result<f64> {
        let mut acc = 0.0;
        for comp in &self.components {
            acc += comp.weight(z) * comp.density.logpdf(z)?.exp();
        }
        Ok(acc)
    }
}

/// Decomposition of `integral |w| q(w, z) dw` for the skew Gaussian:
/// `u_1 = sqrt(2/pi) / (1 + A)` against `N(mu, Sigma)` and
/// `u_2(z) = c(z) / (1 + A)` against the skew Gaussian itself.
pub fn skew_u_decomposition(p: &GvmParams) -> WeightDecomposition {
    let (_, a, _) = mixture_statistics(p, p.mu());
    let u1 = (2.0 / std::f64::consts::PI).sqrt() / (1.0 + a);
    let base = p.base_gaussian();
    let p2 = p.clone();
    WeightDecomposition {
        components: vec![
            WeightComponent {
                weight: Box::new(move |_| u1),
                density: ComponentDensity::Gaussian(base),
            },
            WeightComponent {
                weight: Box::new(move |z| {
                    let (c, a, _) = mixture_statistics(&p2, z);
                    c / (1.0 + a)
                }),
                density: ComponentDensity::SkewGaussian(p.clone()),
            },
        ],
    }
}

/// Decomposition of `integral w q(w, z) dw` for the exponentially modified
/// Gaussian: `u_1 = 1/A` against `N(mu, Sigma)` and `u_2(z) = (c(z) - 1)/A`
/// against the EMG itself.
pub fn emg_u_decomposition(p: &GvmParams) -> Result<WeightDecomposition> {
    let (_, a, _) = mixture_statistics(p, p.mu());
    if a <= 0.0 {
        return Err(Error::DegenerateSkew);
    }
    let base = p.base_gaussian();
    let p2 = p.clone();
    Ok(WeightDecomposition {
        components: vec![
            WeightComponent {
                weight: Box::new(move |_| 1.0 / a),
                density: ComponentDensity::Gaussian(base),
            },
            WeightComponent {
                weight: Box::new(move |z| {
                    let (c, a, _) = mixture_statistics(&p2, z);
                    (c - 1.0) / a
                }),
                density: ComponentDensity::Emg(p.clone()),
            },
        ],
    })
}

/// Single-term decomposition of `integral w q(w, z) dw` for Student's t:
/// `v_1(z) = beta / (beta + d/2 - 1) * (1 + Q(z) / (2 beta))` against the
/// t density itself.
pub fn student_v_decomposition(p: &GvmParams, beta: f64) -> Result<WeightDecomposition> {
    if beta <= 1.0 || !beta.is_finite() {
        return Err(Error::InvalidShape(beta));
    }
    let d = p.dim() as f64;
    let p2 = p.clone();
    Ok(WeightDecomposition {
        components: vec![WeightComponent {
            weight: Box::new(move |z| {
                let (_, _, q) = mixture_statistics(&p2, z);
                beta / (beta + 0.5 * d - 1.0) * (1.0 + q / (2.0 * beta))
            }),
            density: ComponentDensity::StudentT {
                params: p.clone(),
                beta,
            },
        }],
    })
}

/// Single-term decomposition of `integral w q(w, z) dw` for the NIG:
/// `v_1(z) = sqrt(b/a) K_{(d-1)/2}(sqrt(ab)) / K_{(d+1)/2}(sqrt(ab))`
/// with `a = alpha' inv(Sigma) alpha + beta` and
/// `b = (z - mu)' inv(Sigma) (z - mu) + beta`, against the NIG itself.
pub fn nig_v_decomposition(p: &GvmParams, beta: f64) -> Result<WeightDecomposition> {
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::InvalidShape(beta));
    }
    let d = p.dim() as f64;
    let p2 = p.clone();
    Ok(WeightDecomposition {
        components: vec![WeightComponent {
            weight: Box::new(move |z| {
                let (_, a_stat, q) = mixture_statistics(&p2, z);
                let a = a_stat + beta;
                let b = q + beta;
                let s = (a * b).sqrt();
                // The exponential scaling of K cancels in the ratio.
                let k_lo = bessel_k_scaled(0.5 * (d - 1.0), s).expect("supported order");
                let k_hi = bessel_k_scaled(0.5 * (d + 1.0), s).expect("supported order");
                (b / a).sqrt() * k_lo / k_hi
            }),
            density: ComponentDensity::Nig {
                params: p.clone(),
                beta,
            },
        }],
    })
}
