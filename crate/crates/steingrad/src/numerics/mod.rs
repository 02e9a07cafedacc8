//! Self-contained numerical kernel: small dense linear algebra, special
//! functions, quadrature nodes, and the deterministic random stream.

mod linalg;
mod quadrature;
mod rng;
mod special;

pub use linalg::{cholesky, solve_spd, CholeskyFactor, Matrix, SpdMatrix, Vector};
pub(crate) use quadrature::hermite_cached;
pub use quadrature::{gauss_hermite_nodes, gauss_legendre_nodes};
pub use rng::RandomStream;
pub use special::{bessel_k, bessel_k_scaled, ln_bessel_k, ln_norm_cdf, norm_cdf};
