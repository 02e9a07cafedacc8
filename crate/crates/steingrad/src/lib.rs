//! Monte-Carlo gradient estimators built on Stein-type identities, together
//! with the deterministic oracles (quadrature + finite differences) used to
//! certify them.
//!
//! The crate is organized around a small set of layers:
//!
//! * [`numerics`] — vectors, SPD matrices, special functions, quadrature
//!   nodes, and the counter-based random stream everything else consumes.
//! * [`distributions`] — Gaussian and Gaussian variance-mean mixture
//!   parameter containers and samplers.
//! * [`gvm_densities`] — closed-form marginal densities of the four named
//!   mixtures (skew Gaussian, exponentially modified Gaussian, Student's t,
//!   normal inverse Gaussian) and their weight decompositions.
//! * [`ef`] — the univariate exponential-family contract (pdf / CDF /
//!   CDF-parameter-derivative) and a bivariate mixture contract, used by the
//!   implicit reparameterization estimators.
//! * [`testfns`] — integrands with hand-coded derivatives and smoothness tags.
//! * [`estimators`] — the gradient estimators themselves.
//! * [`oracle`] — quadrature expectations and finite-difference parameter
//!   gradients, independent of the estimator code paths they check.
//!
//! Everything is deterministic: random streams are immutable
//! `(seed, stream id, draw index)` tokens, estimators walk them
//! sequentially, and reruns are bit-identical.
//!
//! ```
//! use steingrad::distributions::{GvmParams, MixingSpec};
//! use steingrad::estimators::{gvm_grad_alpha, EstimatorConfig};
//! use steingrad::numerics::{RandomStream, SpdMatrix, Vector};
//! use steingrad::testfns::TestFunction;
//!
//! // Asymmetry gradient of E|z| under a 1-d skew Gaussian:
//! // d/dalpha E|z| = E[|w| (2 Phi(|w|) - 1)] = 1/sqrt(pi) at mu = 0,
//! // alpha = 1, sigma = 1.
//! let p = GvmParams::new(
//!     Vector::new(vec![0.0])?,
//!     Vector::new(vec![1.0])?,
//!     SpdMatrix::identity(1),
//! )?;
//! let h = TestFunction::abs_sum(1);
//! let cfg = EstimatorConfig::new(50_000, RandomStream::new(42, 0))?;
//! let grad = gvm_grad_alpha(&p, &MixingSpec::HalfNormalAbs, &h, &cfg)?;
//! let (_, estimate, std_error) = grad.rows()[0].clone();
//! assert!((estimate - 1.0 / std::f64::consts::PI.sqrt()).abs() < 4.0 * std_error);
//! # Ok::<(), steingrad::Error>(())
//! ```

pub mod distributions;
pub mod ef;
pub mod error;
pub mod estimators;
pub mod gvm_densities;
pub mod numerics;
pub mod oracle;
pub mod testfns;

pub use error::Error;
