//! Integrands `h(z)` with hand-coded derivatives, spanning the smoothness
//! classes the gradient identities assume: a C2 quadratic, the locally-AC
//! `sum |z_k|` (no Hessian anywhere, no gradient on the coordinate
//! hyperplanes), and a smooth log-sum-exp with bounded derivatives.

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};

/// Smoothness class of a test function, ordered weakest to strongest.
///
/// `LocallyAc` is absolute continuity on compact intervals along almost
/// every axis-parallel line; `C1GradAc` adds a continuous gradient that is
/// itself locally AC (the hypothesis of the second-order identities); `C2`
/// is twice continuously differentiable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Smoothness {
    LocallyAc,
    C1GradAc,
    C2,
}

#[derive(Clone, Debug)]
enum Kind {
    Quadratic { a: Matrix, b: Vector, c: f64 },
    AbsSum,
    LogSumExp { weights: Vector },
}

/// A scalar integrand with value, almost-everywhere gradient, and optional
/// Hessian.
#[derive(Clone, Debug)]
pub struct TestFunction {
    dim: usize,
    smoothness: Smoothness,
    kind: Kind,
}

impl TestFunction {
    /// `h(z) = z' A z + b' z + c` with symmetric `A`.
    pub fn quadratic(a: Matrix, b: Vector, c: f64) -> Result<Self> {
        if a.n_rows() != a.n_cols() || !a.is_symmetric(1e-12) {
            return Err(Error::AsymmetricA);
        }
        if a.n_rows() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.n_rows(),
                got: b.dim(),
            });
        }
        Ok(TestFunction {
            dim: b.dim(),
            smoothness: Smoothness::C2,
            kind: Kind::Quadratic { a, b, c },
        })
    }

    /// Constant function, as the degenerate quadratic.
    pub fn constant(dim: usize, c: f64) -> Self {
        TestFunction::quadratic(Matrix::zeros(dim, dim), Vector::zeros(dim), c).unwrap()
    }

    /// `h(z) = sum_k |z_k|`; locally AC only, gradient undefined on the
    /// coordinate hyperplanes (a measure-zero set samplers hit with
    /// probability 0).
    pub fn abs_sum(dim: usize) -> Self {
        TestFunction {
            dim,
            smoothness: Smoothness::LocallyAc,
            kind: Kind::AbsSum,
        }
    }

    /// `h(z) = ln sum_k exp(w_k z_k)`; C2 with all derivatives bounded.
    pub fn log_sum_exp(weights: Vector) -> Self {
        TestFunction {
            dim: weights.dim(),
            smoothness: Smoothness::C2,
            kind: Kind::LogSumExp { weights },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn has_hessian(&self) -> bool {
        !matches!(self.kind, Kind::AbsSum)
    }

    pub fn value(&self, z: &Vector) -> f64 {
        debug_assert_eq!(z.dim(), self.dim);
        match &self.kind {
            Kind::Quadratic { a, b, c } => z.dot(&a.matvec(z)) + b.dot(z) + c,
            Kind::AbsSum => z.iter().map(|x| x.abs()).sum(),
            Kind::LogSumExp { weights } => {
                let m = weights
                    .iter()
                    .zip(z.iter())
                    .map(|(w, x)| w * x)
                    .fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = weights
                    .iter()
                    .zip(z.iter())
                    .map(|(w, x)| (w * x - m).exp())
                    .sum();
                m + s.ln()
            }
        }
    }

    /// Almost-everywhere gradient; on the non-differentiability set of
    /// `abs_sum` the sign convention returns 0, which leaves expectations
    /// unchanged.
    pub fn grad(&self, z: &Vector) -> Vector {
        debug_assert_eq!(z.dim(), self.dim);
        match &self.kind {
            Kind::Quadratic { a, b, .. } => a.matvec(z).scale(2.0).add(b),
            Kind::AbsSum => Vector::from_raw(
                z.iter()
                    .map(|x| if *x == 0.0 { 0.0 } else { x.signum() })
                    .collect(),
            ),
            Kind::LogSumExp { weights } => {
                let s = softmax(weights, z);
                Vector::from_raw(weights.iter().zip(s.iter()).map(|(w, s)| w * s).collect())
            }
        }
    }

    pub fn hessian(&self, z: &Vector) -> Option<Matrix> {
        debug_assert_eq!(z.dim(), self.dim);
        match &self.kind {
            Kind::Quadratic { a, .. } => Some(a.scale(2.0)),
            Kind::AbsSum => None,
            Kind::LogSumExp { weights } => {
                let s = softmax(weights, z);
                let mut h = Matrix::zeros(self.dim, self.dim);
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        let kron = if i == j { s[i] } else { 0.0 };
                        h.set(i, j, weights[i] * weights[j] * (kron - s[i] * s[j]));
                    }
                }
                Some(h)
            }
        }
    }

    /// The `(A, b, c)` coefficients when this is a quadratic.
    pub fn as_quadratic(&self) -> Option<(&Matrix, &Vector, f64)> {
        match &self.kind {
            Kind::Quadratic { a, b, c } => Some((a, b, *c)),
            _ => None,
        }
    }

    /// Whether the gradient is classically defined at `z`.
    pub fn is_differentiable_at(&self, z: &Vector) -> bool {
        match &self.kind {
            Kind::AbsSum => z.iter().all(|x| *x != 0.0),
            _ => true,
        }
    }

    /// Distance from `z` to the declared non-differentiability set
    /// (infinite for smooth functions); finite-difference probes stay
    /// clear of it.
    pub fn distance_to_nondifferentiable(&self, z: &Vector) -> f64 {
        match &self.kind {
            Kind::AbsSum => z.iter().fold(f64::INFINITY, |m, x| m.min(x.abs())),
            _ => f64::INFINITY,
        }
    }
}

fn softmax(weights: &Vector, z: &Vector) -> Vector {
    let m = weights
        .iter()
        .zip(z.iter())
        .map(|(w, x)| w * x)
        .fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = weights
        .iter()
        .zip(z.iter())
        .map(|(w, x)| (w * x - m).exp())
        .collect();
    let total: f64 = e.iter().sum();
    Vector::from_raw(e.into_iter().map(|x| x / total).collect())
}
