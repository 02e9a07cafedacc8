//! Parameter containers and samplers for multivariate Gaussians, the four
//! mixing laws, and the Gaussian variance-mean mixture construction
//! `q(w, z) = N(z | mu + u(w) alpha, v(w) Sigma) q(w)`.

use crate::error::{Error, Result};
use crate::numerics::{CholeskyFactor, RandomStream, SpdMatrix, Vector};

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Mean and covariance of a multivariate Gaussian, Cholesky-factored at
/// construction.
#[derive(Clone, Debug)]
pub struct GaussianParams {
    mu: Vector,
    sigma: SpdMatrix,
    chol: CholeskyFactor,
}

impl GaussianParams {
    pub fn new(mu: Vector, sigma: SpdMatrix) -> Result<Self> {
        if mu.dim() != sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: mu.dim(),
                got: sigma.dim(),
            });
        }
        let chol = sigma.cholesky()?;
        Ok(GaussianParams { mu, sigma, chol })
    }

    pub fn standard(dim: usize) -> Self {
        GaussianParams::new(Vector::zeros(dim), SpdMatrix::identity(dim)).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    pub fn mu(&self) -> &Vector {
        &self.mu
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn chol(&self) -> &CholeskyFactor {
        &self.chol
    }

    /// `inv(Sigma) * v` via the cached factor.
    pub fn sigma_solve(&self, v: &Vector) -> Vector {
        self.chol.solve(v)
    }
}

/// Location, asymmetry, and scale matrix of a Gaussian variance-mean
/// mixture.
#[derive(Clone, Debug)]
pub struct GvmParams {
    mu: Vector,
    alpha: Vector,
    sigma: SpdMatrix,
    chol: CholeskyFactor,
}

impl GvmParams {
    pub fn new(mu: Vector, alpha: Vector, sigma: SpdMatrix) -> Result<Self> {
        let d = mu.dim();
        if alpha.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: alpha.dim(),
            });
        }
        if sigma.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: sigma.dim(),
            });
        }
        let chol = sigma.cholesky()?;
        Ok(GvmParams {
            mu,
            alpha,
            sigma,
            chol,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    pub fn mu(&self) -> &Vector {
        &self.mu
    }

    pub fn alpha(&self) -> &Vector {
        &self.alpha
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn chol(&self) -> &CholeskyFactor {
        &self.chol
    }

    pub fn sigma_solve(&self, v: &Vector) -> Vector {
        self.chol.solve(v)
    }

    /// The plain Gaussian with the same location and scale.
    pub fn base_gaussian(&self) -> GaussianParams {
        GaussianParams {
            mu: self.mu.clone(),
            sigma: self.sigma.clone(),
            chol: self.chol.clone(),
        }
    }
}

/// Declared first and second moments of the mixing weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingMoments {
    pub e_u: f64,
    pub var_u: f64,
    pub e_v: f64,
}

/// Mixing law `q(w)` together with its weight maps `u(w)` and `v(w)`.
///
/// The four named laws produce the skew Gaussian, exponentially modified
/// Gaussian, Student's t, and normal inverse Gaussian mixtures; `Degenerate`
/// is the `u = 0, v = 1` point mass under which every mixture collapses to
/// the plain Gaussian (it consumes no random draws, so estimators reduce
/// bit-exactly).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MixingSpec {
    /// `w ~ N(0, 1)`, `u(w) = |w|`, `v(w) = 1` (skew Gaussian).
    HalfNormalAbs,
    /// `w ~ Exp(1)`, `u(w) = w`, `v(w) = 1` (exponentially modified Gaussian).
    ExponentialUnit,
    /// `w ~ InvGamma(beta, beta)`, `u = 0`, `v(w) = w` (Student's t with
    /// 2 beta degrees of freedom); beta > 1 so that `E[v]` exists.
    InvGamma { beta: f64 },
    /// `w ~ InvGauss(1, beta)`, `u(w) = v(w) = w` (normal inverse Gaussian).
    InvGauss { beta: f64 },
    /// Point mass with `u = 0`, `v = 1`.
    Degenerate,
}

impl MixingSpec {
    pub fn inv_gamma(beta: f64) -> Result<Self> {
        // The Price-type identities need E[v(w)] = beta/(beta-1) finite.
        if beta <= 1.0 || !beta.is_finite() {
            return Err(Error::InvalidShape(beta));
        }
        Ok(MixingSpec::InvGamma { beta })
    }

    pub fn inv_gauss(beta: f64) -> Result<Self> {
        if beta <= 0.0 || !beta.is_finite() {
            return Err(Error::InvalidShape(beta));
        }
        Ok(MixingSpec::InvGauss { beta })
    }

    pub fn name(&self) -> String {
        match self {
            MixingSpec::HalfNormalAbs => "half-normal-abs".into(),
            MixingSpec::ExponentialUnit => "exponential-1".into(),
            MixingSpec::InvGamma { beta } => format!("inv-gamma({beta})"),
            MixingSpec::InvGauss { beta } => format!("inv-gauss({beta})"),
            MixingSpec::Degenerate => "degenerate".into(),
        }
    }

    pub fn u(&self, w: f64) -> f64 {
        match self {
            MixingSpec::HalfNormalAbs => w.abs(),
            MixingSpec::ExponentialUnit | MixingSpec::InvGauss { .. } => w,
            MixingSpec::InvGamma { .. } | MixingSpec::Degenerate => 0.0,
        }
    }

    pub fn v(&self, w: f64) -> f64 {
        match self {
            MixingSpec::HalfNormalAbs | MixingSpec::ExponentialUnit | MixingSpec::Degenerate => 1.0,
            MixingSpec::InvGamma { .. } | MixingSpec::InvGauss { .. } => w,
        }
    }

    /// `u` identically zero (the mixture has no asymmetry channel).
    pub fn u_is_zero(&self) -> bool {
        matches!(self, MixingSpec::InvGamma { .. } | MixingSpec::Degenerate)
    }

    pub fn moments(&self) -> Option<MixingMoments> {
        match self {
            MixingSpec::HalfNormalAbs => Some(MixingMoments {
                e_u: (2.0 / std::f64::consts::PI).sqrt(),
                var_u: 1.0 - 2.0 / std::f64::consts::PI,
                e_v: 1.0,
            }),
            MixingSpec::ExponentialUnit => Some(MixingMoments {
                e_u: 1.0,
                var_u: 1.0,
                e_v: 1.0,
            }),
            MixingSpec::InvGamma { beta } => Some(MixingMoments {
                e_u: 0.0,
                var_u: 0.0,
                e_v: beta / (beta - 1.0),
            }),
            MixingSpec::InvGauss { beta } => Some(MixingMoments {
                e_u: 1.0,
                var_u: 1.0 / beta,
                e_v: 1.0,
            }),
            MixingSpec::Degenerate => Some(MixingMoments {
                e_u: 0.0,
                var_u: 0.0,
                e_v: 1.0,
            }),
        }
    }

    /// Density of the mixing draw expressed on (0, inf), usable as the
    /// outer weight in nested quadrature. The half-normal law folds to
    /// `2 phi(w)` (exact, since only |w| enters the mixture); the degenerate
    /// point mass has no density.
    pub fn density_on_half_line(&self, w: f64) -> Option<f64> {
        if matches!(self, MixingSpec::Degenerate) {
            return None;
        }
        if w <= 0.0 {
            return Some(0.0);
        }
        let pdf = match self {
            MixingSpec::HalfNormalAbs => {
                2.0 * (-0.5 * w * w).exp() / (2.0 * std::f64::consts::PI).sqrt()
            }
            MixingSpec::ExponentialUnit => (-w).exp(),
            MixingSpec::InvGamma { beta } => {
                let b = *beta;
                (b * b.ln() - statrs::function::gamma::ln_gamma(b) - (b + 1.0) * w.ln() - b / w)
                    .exp()
            }
            MixingSpec::InvGauss { beta } => {
                let b = *beta;
                (0.5 * (b / (2.0 * std::f64::consts::PI * w.powi(3))).ln()
                    - 0.5 * b * (w + 1.0 / w)
                    + b)
                    .exp()
            }
            MixingSpec::Degenerate => unreachable!(),
        };
        Some(pdf)
    }
}

/// One draw from the joint `q(w, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointSample {
    pub w: f64,
    pub z: Vector,
}

/// Draw `z = mu + L eps` with `eps` standard normal.
pub fn gaussian_sample(p: &GaussianParams, rng: RandomStream) -> (RandomStream, Vector) {
    let (rng, eps) = rng.next_normal_vec(p.dim());
    (rng, p.mu().add(&p.chol().mul_vec(&eps)))
}

/// Log density of `N(z | mu, Sigma)`.
pub fn gaussian_logpdf(p: &GaussianParams, z: &Vector) -> f64 {
    assert_eq!(p.dim(), z.dim(), "dimension mismatch in gaussian_logpdf");
    let diff = z.sub(p.mu());
    let maha = diff.dot(&p.sigma_solve(&diff));
    -0.5 * (p.dim() as f64 * LN_2PI + p.chol().log_det() + maha)
}

/// Gamma(shape, rate 1) by the Marsaglia-Tsang squeeze, shape >= 1.
pub(crate) fn gamma_sample(shape: f64, rng: RandomStream) -> (RandomStream, f64) {
    debug_assert!(shape >= 1.0);
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    let mut rng = rng;
    loop {
        let (r1, x) = rng.next_normal();
        rng = r1;
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let (r2, u) = rng.next_uniform();
        rng = r2;
        if u < 1.0 - 0.0331 * x.powi(4) {
            return (rng, d * v);
        }
        if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return (rng, d * v);
        }
    }
}

/// InvGauss(mean 1, shape beta) via the chi-square transform with a uniform
/// root choice.
fn inv_gauss_sample(beta: f64, rng: RandomStream) -> (RandomStream, f64) {
    let (rng, z) = rng.next_normal();
    let nu = z * z;
    let x = 1.0 + (nu - (4.0 * beta * nu + nu * nu).sqrt()) / (2.0 * beta);
    let (rng, u) = rng.next_uniform();
    if u <= 1.0 / (1.0 + x) {
        (rng, x)
    } else {
        (rng, 1.0 / x)
    }
}

/// Draw from the mixing law.
pub fn mixing_sample(m: &MixingSpec, rng: RandomStream) -> (RandomStream, f64) {
    match m {
        MixingSpec::HalfNormalAbs => rng.next_normal(),
        MixingSpec::ExponentialUnit => {
            let (rng, u) = rng.next_uniform();
            (rng, -u.ln())
        }
        MixingSpec::InvGamma { beta } => {
            let (rng, g) = gamma_sample(*beta, rng);
            (rng, *beta / g)
        }
        MixingSpec::InvGauss { beta } => inv_gauss_sample(*beta, rng),
        // Point mass; consumes no draws so degenerate mixtures stay on the
        // plain-Gaussian draw sequence.
        MixingSpec::Degenerate => (rng, 1.0),
    }
}

/// Draw `(w, z)` from the joint mixture.
pub fn gvm_sample(p: &GvmParams, m: &MixingSpec, rng: RandomStream) -> (RandomStream, JointSample) {
    let (rng, w) = mixing_sample(m, rng);
    let (rng, eps) = rng.next_normal_vec(p.dim());
    let le = p.chol().mul_vec(&eps);
    let uw = m.u(w);
    let vw = m.v(w);
    let scaled = if vw == 1.0 { le } else { le.scale(vw.sqrt()) };
    let mean = if uw == 0.0 {
        p.mu().clone()
    } else {
        p.mu().add(&p.alpha().scale(uw))
    };
    (
        rng,
        JointSample {
            w,
            z: mean.add(&scaled),
        },
    )
}
