//! Univariate continuous exponential-family contract — pdf, CDF, and the
//! parameter derivative of the CDF — plus a bivariate mixture contract whose
//! conditional structure makes the CDF map triangular. These feed the
//! implicit reparameterization estimators: the velocity of a sample under a
//! parameter change is `f_i(z) = d(cdf)/d(lambda_i) / pdf(z)`.

use crate::distributions::gamma_sample;
use crate::error::{Error, Result};
use crate::numerics::{norm_cdf, RandomStream};

use statrs::function::gamma::{gamma_lr, ln_gamma};

const DENSITY_FLOOR: f64 = 1e-300;

/// A univariate continuous exponential-family distribution with support
/// independent of the parameters.
pub trait UnivariateEf {
    /// Open support interval `(l, u)`.
    fn support(&self) -> (f64, f64);
    fn n_params(&self) -> usize;
    fn param(&self, i: usize) -> f64;
    /// Copy with parameter `i` replaced (for finite-difference probes).
    fn with_param(&self, i: usize, value: f64) -> Self
    where
        Self: Sized;
    fn pdf(&self, z: f64) -> f64;
    fn logpdf(&self, z: f64) -> f64;
    /// CDF `psi(z, lambda)`.
    fn cdf(&self, z: f64) -> f64;
    /// `d psi / d lambda_i` at `z`.
    fn dcdf_dparam(&self, i: usize, z: f64) -> f64;
    /// `d pdf / d z` at `z`.
    fn dpdf_dz(&self, z: f64) -> f64;
    fn sample(&self, rng: RandomStream) -> (RandomStream, f64);
    /// Characteristic length used to place quadrature nodes.
    fn quadrature_scale(&self) -> f64;

    fn in_support(&self, z: f64) -> bool {
        let (l, u) = self.support();
        z > l && z < u
    }
}

/// Implicit-reparameterization velocity
/// `f_i(z) = d(cdf)/d(lambda_i) / pdf(z)` for a univariate family.
pub fn implicit_velocity_1d<E: UnivariateEf>(dist: &E, i: usize, z: f64) -> Result<f64> {
    let (l, u) = dist.support();
    if !dist.in_support(z) {
        return Err(Error::OutOfSupport { z, lo: l, hi: u });
    }
    let q = dist.pdf(z);
    if q < DENSITY_FLOOR {
        return Err(Error::SingularTriangle);
    }
    Ok(dist.dcdf_dparam(i, z) / q)
}

/// Exponential distribution with learnable rate; support `(0, inf)`.
#[derive(Clone, Copy, Debug)]
pub struct ExponentialEf {
    rate: f64,
}

impl ExponentialEf {
    pub fn new(rate: f64) -> Result<Self> {
        if rate <= 0.0 || !rate.is_finite() {
            return Err(Error::InvalidShape(rate));
        }
        Ok(ExponentialEf { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl UnivariateEf for ExponentialEf {
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn n_params(&self) -> usize {
        1
    }

    fn param(&self, i: usize) -> f64 {
        assert_eq!(i, 0);
        self.rate
    }

    fn with_param(&self, i: usize, value: f64) -> Self {
        assert_eq!(i, 0);
        ExponentialEf::new(value).unwrap()
    }

    fn pdf(&self, z: f64) -> f64 {
        self.rate * (-self.rate * z).exp()
    }

    fn logpdf(&self, z: f64) -> f64 {
        self.rate.ln() - self.rate * z
    }

    fn cdf(&self, z: f64) -> f64 {
        -(-self.rate * z).exp_m1()
    }

    fn dcdf_dparam(&self, i: usize, z: f64) -> f64 {
        assert_eq!(i, 0);
        z * (-self.rate * z).exp()
    }

    fn dpdf_dz(&self, z: f64) -> f64 {
        -self.rate * self.pdf(z)
    }

    fn sample(&self, rng: RandomStream) -> (RandomStream, f64) {
        let (rng, u) = rng.next_uniform();
        (rng, -u.ln() / self.rate)
    }

    fn quadrature_scale(&self) -> f64 {
        1.0 / self.rate
    }
}

/// Gaussian with learnable mean and fixed variance; support `(-inf, inf)`.
///
/// Its velocity is identically -1, which is how implicit reparameterization
/// recovers the location-family gradient.
#[derive(Clone, Copy, Debug)]
pub struct GaussianMeanEf {
    mean: f64,
    variance: f64,
}

impl GaussianMeanEf {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if variance <= 0.0 || !variance.is_finite() || !mean.is_finite() {
            return Err(Error::InvalidShape(variance));
        }
        Ok(GaussianMeanEf { mean, variance })
    }
}

impl UnivariateEf for GaussianMeanEf {
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn n_params(&self) -> usize {
        1
    }

    fn param(&self, i: usize) -> f64 {
        assert_eq!(i, 0);
        self.mean
    }

    fn with_param(&self, i: usize, value: f64) -> Self {
        assert_eq!(i, 0);
        GaussianMeanEf::new(value, self.variance).unwrap()
    }

    fn pdf(&self, z: f64) -> f64 {
        self.logpdf(z).exp()
    }

    fn logpdf(&self, z: f64) -> f64 {
        let d = z - self.mean;
        -0.5 * (crate::distributions::LN_2PI + self.variance.ln() + d * d / self.variance)
    }

    fn cdf(&self, z: f64) -> f64 {
        norm_cdf((z - self.mean) / self.variance.sqrt())
    }

    fn dcdf_dparam(&self, i: usize, z: f64) -> f64 {
        assert_eq!(i, 0);
        -self.pdf(z)
    }

    fn dpdf_dz(&self, z: f64) -> f64 {
        -(z - self.mean) / self.variance * self.pdf(z)
    }

    fn sample(&self, rng: RandomStream) -> (RandomStream, f64) {
        let (rng, eps) = rng.next_normal();
        (rng, self.mean + self.variance.sqrt() * eps)
    }

    fn quadrature_scale(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Gamma with fixed shape (>= 1) and learnable rate; support `(0, inf)`.
///
/// The CDF is the regularized lower incomplete gamma `P(k, rate * z)`;
/// by scale invariance its rate derivative reduces to `(z / rate) * pdf(z)`,
/// so no numerical differentiation is needed inside the estimators.
#[derive(Clone, Copy, Debug)]
pub struct GammaRateEf {
    shape: f64,
    rate: f64,
}

impl GammaRateEf {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if shape < 1.0 || !shape.is_finite() {
            return Err(Error::InvalidShape(shape));
        }
        if rate <= 0.0 || !rate.is_finite() {
            return Err(Error::InvalidShape(rate));
        }
        Ok(GammaRateEf { shape, rate })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }
}

impl UnivariateEf for GammaRateEf {
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn n_params(&self) -> usize {
        1
    }

    fn param(&self, i: usize) -> f64 {
        assert_eq!(i, 0);
        self.rate
    }

    fn with_param(&self, i: usize, value: f64) -> Self {
        assert_eq!(i, 0);
        GammaRateEf::new(self.shape, value).unwrap()
    }

    fn pdf(&self, z: f64) -> f64 {
        self.logpdf(z).exp()
    }

    fn logpdf(&self, z: f64) -> f64 {
        self.shape * self.rate.ln() + (self.shape - 1.0) * z.ln()
            - self.rate * z
            - ln_gamma(self.shape)
    }

    fn cdf(&self, z: f64) -> f64 {
        gamma_lr(self.shape, self.rate * z)
    }

    fn dcdf_dparam(&self, i: usize, z: f64) -> f64 {
        assert_eq!(i, 0);
        z / self.rate * self.pdf(z)
    }

    fn dpdf_dz(&self, z: f64) -> f64 {
        self.pdf(z) * ((self.shape - 1.0) / z - self.rate)
    }

    fn sample(&self, rng: RandomStream) -> (RandomStream, f64) {
        let (rng, g) = gamma_sample(self.shape, rng);
        (rng, g / self.rate)
    }

    fn quadrature_scale(&self) -> f64 {
        self.shape / self.rate
    }
}

/// A bivariate exponential-family mixture `q(z1) q(z2 | z1)` sharing one
/// parameter vector. The stacked CDF map `Psi = (psi1, psi2)` has a
/// lower-triangular Jacobian in `z`, so the velocities come from forward
/// substitution.
pub trait BivariateEfMixture {
    fn n_params(&self) -> usize;
    fn param(&self, i: usize) -> f64;
    fn with_param(&self, i: usize, value: f64) -> Self
    where
        Self: Sized;
    fn support1(&self) -> (f64, f64);
    fn support2(&self, z1: f64) -> (f64, f64);
    fn pdf1(&self, z1: f64) -> f64;
    fn cdf1(&self, z1: f64) -> f64;
    fn dcdf1_dparam(&self, i: usize, z1: f64) -> f64;
    /// Conditional density `q(z2 | z1)`.
    fn pdf2(&self, z1: f64, z2: f64) -> f64;
    /// Conditional CDF `psi2(z1, z2, lambda)`.
    fn cdf2(&self, z1: f64, z2: f64) -> f64;
    fn dcdf2_dparam(&self, i: usize, z1: f64, z2: f64) -> f64;
    /// `d psi2 / d z1`, the off-diagonal of the triangular Jacobian.
    fn dcdf2_dz1(&self, z1: f64, z2: f64) -> f64;
    fn sample(&self, rng: RandomStream) -> (RandomStream, [f64; 2]);
    fn scale1(&self) -> f64;
    fn scale2(&self, z1: f64) -> f64;
}

/// Velocities `(f_{i,1}, f_{i,2})` solving the lower-triangular system
/// `grad_z Psi * f = grad_{lambda_i} Psi` by forward substitution:
/// `f_1 = dpsi1/dlambda / q(z1)` and
/// `f_2 = (dpsi2/dlambda - f_1 * dpsi2/dz1) / q(z2 | z1)`.
pub fn bivariate_velocities<M: BivariateEfMixture>(
    mix: &M,
    i: usize,
    z: [f64; 2],
) -> Result<[f64; 2]> {
    let (l1, u1) = mix.support1();
    if !(z[0] > l1 && z[0] < u1) {
        return Err(Error::OutOfSupport {
            z: z[0],
            lo: l1,
            hi: u1,
        });
    }
    let (l2, u2) = mix.support2(z[0]);
    if !(z[1] > l2 && z[1] < u2) {
        return Err(Error::OutOfSupport {
            z: z[1],
            lo: l2,
            hi: u2,
        });
    }
    let q1 = mix.pdf1(z[0]);
    let q2 = mix.pdf2(z[0], z[1]);
    if q1 < DENSITY_FLOOR || q2 < DENSITY_FLOOR {
        return Err(Error::SingularTriangle);
    }
    let f1 = mix.dcdf1_dparam(i, z[0]) / q1;
    let f2 = (mix.dcdf2_dparam(i, z[0], z[1]) - f1 * mix.dcdf2_dz1(z[0], z[1])) / q2;
    Ok([f1, f2])
}

/// `z1 ~ Exp(lambda)`, `z2 | z1 ~ Exp(lambda * z1)`: every evaluator is
/// elementary and `dpsi2/dz1` is nonzero, so the triangular coupling is
/// exercised.
#[derive(Clone, Copy, Debug)]
pub struct CoupledExponentialPair {
    lambda: f64,
}

impl CoupledExponentialPair {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidShape(lambda));
        }
        Ok(CoupledExponentialPair { lambda })
    }
}

impl BivariateEfMixture for CoupledExponentialPair {
    fn n_params(&self) -> usize {
        1
    }

    fn param(&self, i: usize) -> f64 {
        assert_eq!(i, 0);
        self.lambda
    }

    fn with_param(&self, i: usize, value: f64) -> Self {
        assert_eq!(i, 0);
        CoupledExponentialPair::new(value).unwrap()
    }

    fn support1(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn support2(&self, _z1: f64) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn pdf1(&self, z1: f64) -> f64 {
        self.lambda * (-self.lambda * z1).exp()
    }

    fn cdf1(&self, z1: f64) -> f64 {
        -(-self.lambda * z1).exp_m1()
    }

    fn dcdf1_dparam(&self, i: usize, z1: f64) -> f64 {
        assert_eq!(i, 0);
        z1 * (-self.lambda * z1).exp()
    }

    fn pdf2(&self, z1: f64, z2: f64) -> f64 {
        self.lambda * z1 * (-self.lambda * z1 * z2).exp()
    }

    fn cdf2(&self, z1: f64, z2: f64) -> f64 {
        -(-self.lambda * z1 * z2).exp_m1()
    }

    fn dcdf2_dparam(&self, i: usize, z1: f64, z2: f64) -> f64 {
        assert_eq!(i, 0);
        z1 * z2 * (-self.lambda * z1 * z2).exp()
    }

    fn dcdf2_dz1(&self, z1: f64, z2: f64) -> f64 {
        self.lambda * z2 * (-self.lambda * z1 * z2).exp()
    }

    fn sample(&self, rng: RandomStream) -> (RandomStream, [f64; 2]) {
        let (rng, u1) = rng.next_uniform();
        let z1 = -u1.ln() / self.lambda;
        let (rng, u2) = rng.next_uniform();
        let z2 = -u2.ln() / (self.lambda * z1);
        (rng, [z1, z2])
    }

    fn scale1(&self) -> f64 {
        1.0 / self.lambda
    }

    fn scale2(&self, z1: f64) -> f64 {
        1.0 / (self.lambda * z1)
    }
}

/// Two independent `Exp(lambda)` coordinates; `dpsi2/dz1 = 0`, so the second
/// velocity reduces to the univariate formula.
#[derive(Clone, Copy, Debug)]
pub struct IndependentExponentialPair {
    lambda: f64,
}

impl IndependentExponentialPair {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidShape(lambda));
        }
        Ok(IndependentExponentialPair { lambda })
    }
}

impl BivariateEfMixture for IndependentExponentialPair {
    fn n_params(&self) -> usize {
        1
    }

    fn param(&self, i: usize) -> f64 {
        assert_eq!(i, 0);
        self.lambda
    }

    fn with_param(&self, i: usize, value: f64) -> Self {
        assert_eq!(i, 0);
        IndependentExponentialPair::new(value).unwrap()
    }

    fn support1(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn support2(&self, _z1: f64) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn pdf1(&self, z1: f64) -> f64 {
        self.lambda * (-self.lambda * z1).exp()
    }

    fn cdf1(&self, z1: f64) -> f64 {
        -(-self.lambda * z1).exp_m1()
    }

    fn dcdf1_dparam(&self, i: usize, z1: f64) -> f64 {
        assert_eq!(i, 0);
        z1 * (-self.lambda * z1).exp()
    }

    fn pdf2(&self, _z1: f64, z2: f64) -> f64 {
        self.lambda * (-self.lambda * z2).exp()
    }

    fn cdf2(&self, _z1: f64, z2: f64) -> f64 {
        -(-self.lambda * z2).exp_m1()
    }

    fn dcdf2_dparam(&self, i: usize, _z1: f64, z2: f64) -> f64 {
        assert_eq!(i, 0);
        z2 * (-self.lambda * z2).exp()
    }

    fn dcdf2_dz1(&self, _z1: f64, _z2: f64) -> f64 {
        0.0
    }

    fn sample(&self, rng: RandomStream) -> (RandomStream, [f64; 2]) {
        let (rng, u1) = rng.next_uniform();
        let (rng, u2) = rng.next_uniform();
        (rng, [-u1.ln() / self.lambda, -u2.ln() / self.lambda])
    }

    fn scale1(&self) -> f64 {
        1.0 / self.lambda
    }

    fn scale2(&self, _z1: f64) -> f64 {
        1.0 / self.lambda
    }
}
