//! Deterministic ground truth for the estimators: tensor-product quadrature
//! for expectations (d <= 2, plus the mixing variable) and central finite
//! differences with Richardson checks for parameter gradients. Nothing here
//! shares code with the estimator sampling paths.

use std::sync::OnceLock;

use crate::distributions::{gaussian_logpdf, GaussianParams, GvmParams, MixingSpec};
use crate::ef::{BivariateEfMixture, UnivariateEf};
use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre_nodes, Matrix, SpdMatrix, Vector};
use crate::testfns::TestFunction;

/// Quadrature family for the z-integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Tensor Gauss-Hermite in the whitened coordinates; spectrally accurate
    /// for smooth integrands.
    GaussHermiteTensor,
    /// Composite Gauss-Legendre panels over a +-10 standard deviation box,
    /// split at the coordinate hyperplanes; handles kinked integrands like
    /// `sum |z_k|`.
    MappedGaussLegendre,
}

/// Resolution and tolerance of an oracle computation.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub points_per_axis: usize,
    pub mixing_points: usize,
    pub target_tol: f64,
}

impl QuadratureSpec {
    pub fn new(
        scheme: Scheme,
        points_per_axis: usize,
        mixing_points: usize,
        target_tol: f64,
    ) -> Result<Self> {
        if points_per_axis < 8 {
            return Err(Error::InvalidConfig(format!(
                "points-per-axis {points_per_axis} < 8"
            )));
        }
        if target_tol < 1e-10 {
            return Err(Error::InvalidConfig(format!(
                "target-tol {target_tol} < 1e-10"
            )));
        }
        Ok(QuadratureSpec {
            scheme,
            points_per_axis,
            mixing_points,
            target_tol,
        })
    }

    /// Scheme suited to the integrand: Gauss-Hermite for smooth functions,
    /// mapped Gauss-Legendre when the gradient is only almost-everywhere.
    pub fn default_for(h: &TestFunction) -> Self {
        let scheme = if h.has_hessian() {
            Scheme::GaussHermiteTensor
        } else {
            Scheme::MappedGaussLegendre
        };
        QuadratureSpec {
            scheme,
            points_per_axis: 48,
            mixing_points: 400,
            target_tol: 1e-8,
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            scheme: Scheme::GaussHermiteTensor,
            points_per_axis: 48,
            mixing_points: 400,
            target_tol: 1e-8,
        }
    }
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CACHE.get_or_init(|| gauss_legendre_nodes(16).unwrap())
}

/// Composite 16-point Gauss-Legendre points over `[lo, hi]` with panel
/// boundaries forced at the interior breakpoints, `total` points in all.
fn composite_gl_points(lo: f64, hi: f64, breaks: &[f64], total: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = gl16();
    let mut cuts = vec![lo];
    for &b in breaks {
        if b > lo && b < hi {
            cuts.push(b);
        }
    }
    cuts.push(hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let n_panels = (total / 16).max(cuts.len() - 1);
    let span: f64 = hi - lo;
    let mut out = Vec::with_capacity(n_panels * 16);
    for seg in cuts.windows(2) {
        let len = seg[1] - seg[0];
        let panels = ((n_panels as f64 * len / span).round() as usize).max(1);
        for p in 0..panels {
            let a = seg[0] + len * p as f64 / panels as f64;
            let b = seg[0] + len * (p + 1) as f64 / panels as f64;
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            for (t, w) in nodes.iter().zip(weights) {
                out.push((c + h * t, h * w));
            }
        }
    }
    out
}

/// Points and weights for `integral_0^inf f(w) dw` under the map
/// `w = scale * t / (1 - t)`.
fn half_line_points(scale: f64, total: usize) -> Vec<(f64, f64)> {
    composite_gl_points(0.0, 1.0, &[], total)
        .into_iter()
        .map(|(t, w)| {
            let denom = 1.0 - t;
            (scale * t / denom, w * scale / (denom * denom))
        })
        .collect()
}

/// Points and weights for `integral_-inf^inf f(z) dz` under the map
/// `z = center + scale * t / (1 - t^2)`.
fn full_line_points(center: f64, scale: f64, total: usize) -> Vec<(f64, f64)> {
    composite_gl_points(-1.0, 1.0, &[0.0], total)
        .into_iter()
        .map(|(t, w)| {
            let denom = 1.0 - t * t;
            let jac = scale * (1.0 + t * t) / (denom * denom);
            (center + scale * t / denom, w * jac)
        })
        .collect()
}

/// Gaussian expectation at fixed resolution (no refinement check).
fn expect_gaussian_raw(
    p: &GaussianParams,
    f: &dyn Fn(&Vector) -> f64,
    scheme: Scheme,
    n: usize,
) -> f64 {
    let d = p.dim();
    match scheme {
        Scheme::GaussHermiteTensor => {
            let rule = crate::numerics::hermite_cached(n.min(200)).unwrap();
            let (nodes, weights) = (&rule.0, &rule.1);
            let sqrt2 = std::f64::consts::SQRT_2;
            let norm = std::f64::consts::PI.powf(-(d as f64) / 2.0);
            match d {
                1 => {
                    let l = p.chol().lower().get(0, 0);
                    let mut z = Vector::zeros(1);
                    let mut acc = 0.0;
                    for (t, w) in nodes.iter().zip(weights) {
                        z[0] = p.mu()[0] + sqrt2 * l * t;
                        acc += w * f(&z);
                    }
                    acc * norm
                }
                2 => {
                    let lower = p.chol().lower();
                    let mut z = Vector::zeros(2);
                    let mut acc = 0.0;
                    for (t1, w1) in nodes.iter().zip(weights) {
                        let e1 = sqrt2 * t1;
                        let base0 = p.mu()[0] + lower.get(0, 0) * e1;
                        let base1 = p.mu()[1] + lower.get(1, 0) * e1;
                        for (t2, w2) in nodes.iter().zip(weights) {
                            let e2 = sqrt2 * t2;
                            z[0] = base0;
                            z[1] = base1 + lower.get(1, 1) * e2;
                            acc += w1 * w2 * f(&z);
                        }
                    }
                    acc * norm
                }
                _ => unreachable!("oracle limited to d <= 2"),
            }
        }
        Scheme::MappedGaussLegendre => {
            let half_width = 10.0;
            let axis = |k: usize| {
                let s = p.sigma().get(k, k).sqrt();
                composite_gl_points(
                    p.mu()[k] - half_width * s,
                    p.mu()[k] + half_width * s,
                    &[0.0],
                    n,
                )
            };
            match d {
                1 => {
                    let mut z = Vector::zeros(1);
                    let mut acc = 0.0;
                    for (z0, w) in axis(0) {
                        z[0] = z0;
                        acc += w * f(&z) * gaussian_logpdf(p, &z).exp();
                    }
                    acc
                }
                2 => {
                    let a0 = axis(0);
                    let a1 = axis(1);
                    let mut z = Vector::zeros(2);
                    let mut acc = 0.0;
                    for &(z0, w0) in &a0 {
                        for &(z1, w1) in &a1 {
                            z[0] = z0;
                            z[1] = z1;
                            acc += w0 * w1 * f(&z) * gaussian_logpdf(p, &z).exp();
                        }
                    }
                    acc
                }
                _ => unreachable!("oracle limited to d <= 2"),
            }
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d > 2 {
        return Err(Error::Domain(format!(
            "oracle quadrature limited to d <= 2, got {d}"
        )));
    }
    Ok(())
}

/// `E_{N(mu, Sigma)}[h(z)]` with a doubling check: the result at twice the
/// resolution must move by less than `target_tol`.
pub fn expect_gaussian(p: &GaussianParams, h: &TestFunction, spec: &QuadratureSpec) -> Result<f64> {
    check_dim(p.dim())?;
    let f = |z: &Vector| h.value(z);
    let coarse = expect_gaussian_raw(p, &f, spec.scheme, spec.points_per_axis);
    let fine = expect_gaussian_raw(p, &f, spec.scheme, 2 * spec.points_per_axis);
    if (fine - coarse).abs() > spec.target_tol {
        return Err(Error::NotConverged(format!(
            "gaussian expectation moved {:.3e} on refinement",
            (fine - coarse).abs()
        )));
    }
    Ok(fine)
}

/// `integral_0^inf f(w) q(w) dw` against the mixing density (the half-normal
/// law is folded onto the positive axis; the degenerate law evaluates at
/// its point mass).
pub fn w_integral(m: &MixingSpec, f: &dyn Fn(f64) -> f64, points: usize) -> f64 {
    if matches!(m, MixingSpec::Degenerate) {
        return f(1.0);
    }
    let mut acc = 0.0;
    for (w, weight) in half_line_points(1.0, points) {
        let q = m
            .density_on_half_line(w)
            .expect("non-degenerate law has a density");
        if q > 0.0 {
            acc += weight * q * f(w);
        }
    }
    acc
}

/// Conditional Gaussian log density `N(z | mu + u(w) alpha, v(w) Sigma)`
/// without refactorizing Sigma; the integrand of the marginalization
/// identity `q(z) = integral q(w) N(z | ...) dw`.
pub fn conditional_logpdf(p: &GvmParams, m: &MixingSpec, w: f64, z: &Vector) -> f64 {
    let uw = m.u(w);
    let vw = m.v(w);
    let mean = if uw == 0.0 {
        p.mu().clone()
    } else {
        p.mu().add(&p.alpha().scale(uw))
    };
    let diff = z.sub(&mean);
    let maha = diff.dot(&p.sigma_solve(&diff)) / vw;
    let d = p.dim() as f64;
    -0.5 * (d * crate::distributions::LN_2PI + p.chol().log_det() + d * vw.ln() + maha)
}

/// Nested expectation under the mixture at fixed resolution.
fn expect_gvm_raw(
    p: &GvmParams,
    m: &MixingSpec,
    f: &dyn Fn(&Vector) -> f64,
    scheme: Scheme,
    n_z: usize,
    n_w: usize,
) -> f64 {
    let inner = |w: f64| {
        let uw = m.u(w);
        let vw = m.v(w);
        let mean = if uw == 0.0 {
            p.mu().clone()
        } else {
            p.mu().add(&p.alpha().scale(uw))
        };
        let scaled_sigma = SpdMatrix::new(p.sigma().as_matrix().scale(vw)).unwrap();
        let cond = GaussianParams::new(mean, scaled_sigma).unwrap();
        expect_gaussian_raw(&cond, f, scheme, n_z)
    };
    w_integral(m, &inner, n_w)
}

/// `E_{q(z)}[h(z)]` under the mixture, with doubling checks in both the
/// z-resolution and the mixing resolution.
pub fn expect_gvm(
    p: &GvmParams,
    m: &MixingSpec,
    h: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_dim(p.dim())?;
    if matches!(m, MixingSpec::Degenerate) {
        return expect_gaussian(&p.base_gaussian(), h, spec);
    }
    let f = |z: &Vector| h.value(z);
    let a = expect_gvm_raw(
        p,
        m,
        &f,
        spec.scheme,
        spec.points_per_axis,
        spec.mixing_points,
    );
    let b = expect_gvm_raw(
        p,
        m,
        &f,
        spec.scheme,
        2 * spec.points_per_axis,
        spec.mixing_points,
    );
    if (b - a).abs() > spec.target_tol {
        return Err(Error::NotConverged(format!(
            "mixture expectation moved {:.3e} on z refinement",
            (b - a).abs()
        )));
    }
    let c = expect_gvm_raw(
        p,
        m,
        &f,
        spec.scheme,
        2 * spec.points_per_axis,
        2 * spec.mixing_points,
    );
    if (c - b).abs() > spec.target_tol {
        return Err(Error::NotConverged(format!(
            "mixture expectation moved {:.3e} on mixing refinement",
            (c - b).abs()
        )));
    }
    Ok(c)
}

/// Central difference with a two-step Richardson agreement check; returns
/// the extrapolated derivative.
pub fn fd_param_gradient(f: &dyn Fn(f64) -> Result<f64>, theta: f64, tol: f64) -> Result<f64> {
    let eps = 1e-4 * theta.abs().max(1.0);
    let diff = |e: f64| -> Result<f64> { Ok((f(theta + e)? - f(theta - e)?) / (2.0 * e)) };
    let d1 = diff(eps)?;
    let d2 = diff(0.5 * eps)?;
    if (d1 - d2).abs() > 10.0 * tol {
        return Err(Error::NotConverged(format!(
            "finite difference moved {:.3e} on step halving",
            (d1 - d2).abs()
        )));
    }
    Ok((4.0 * d2 - d1) / 3.0)
}

fn with_mu(p: &GaussianParams, k: usize, value: f64) -> GaussianParams {
    let mut mu = p.mu().clone();
    mu[k] = value;
    GaussianParams::new(mu, p.sigma().clone()).unwrap()
}

/// Perturb the symmetric pair `(j, k)` of an SPD matrix, failing with
/// `NotSpd` when the perturbed matrix loses definiteness.
fn perturb_sigma(sigma: &SpdMatrix, j: usize, k: usize, delta: f64) -> Result<SpdMatrix> {
    let mut m = sigma.as_matrix().clone();
    m.set(j, k, m.get(j, k) + delta);
    if j != k {
        m.set(k, j, m.get(k, j) + delta);
    }
    let spd = SpdMatrix::new(m).map_err(|_| Error::NotSpd)?;
    spd.cholesky().map_err(|_| Error::NotSpd)?;
    Ok(spd)
}

/// Finite-difference gradient of `E[h]` in the Gaussian mean.
pub fn fd_grad_mu(p: &GaussianParams, h: &TestFunction, spec: &QuadratureSpec) -> Result<Vector> {
    check_dim(p.dim())?;
    let n = 2 * spec.points_per_axis;
    let mut out = Vec::with_capacity(p.dim());
    for k in 0..p.dim() {
        let f = |theta: f64| -> Result<f64> {
            let pp = with_mu(p, k, theta);
            Ok(expect_gaussian_raw(&pp, &|z| h.value(z), spec.scheme, n))
        };
        out.push(fd_param_gradient(&f, p.mu()[k], spec.target_tol)?);
    }
    Ok(Vector::from_raw(out))
}

/// Finite-difference gradient of `E[h]` in the Gaussian covariance, moving
/// symmetric entries together (off-diagonal slots therefore divide by an
/// extra multiplicity of 2, matching the symmetric-matrix derivative
/// against which the second-order identities are stated).
pub fn fd_grad_sigma(
    p: &GaussianParams,
    h: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<Matrix> {
    check_dim(p.dim())?;
    let d = p.dim();
    let n = 2 * spec.points_per_axis;
    let mut out = Matrix::zeros(d, d);
    for j in 0..d {
        for k in j..d {
            let mult = if j == k { 1.0 } else { 2.0 };
            let base = p.sigma().get(j, k);
            let f = |theta: f64| -> Result<f64> {
                let sigma = perturb_sigma(p.sigma(), j, k, theta - base)?;
                let pp = GaussianParams::new(p.mu().clone(), sigma).map_err(|_| Error::NotSpd)?;
                Ok(expect_gaussian_raw(&pp, &|z| h.value(z), spec.scheme, n))
            };
            let g = fd_param_gradient(&f, base, spec.target_tol)? / mult;
            out.set(j, k, g);
            out.set(k, j, g);
        }
    }
    Ok(out)
}

fn gvm_with(p: &GvmParams, mu: Vector, alpha: Vector, sigma: SpdMatrix) -> Result<GvmParams> {
    let _ = p;
    GvmParams::new(mu, alpha, sigma).map_err(|_| Error::NotSpd)
}

/// Finite-difference gradient of the mixture expectation in `mu`.
pub fn fd_gvm_grad_mu(
    p: &GvmParams,
    m: &MixingSpec,
    h: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<Vector> {
    check_dim(p.dim())?;
    let n = 2 * spec.points_per_axis;
    let mut out = Vec::with_capacity(p.dim());
    for k in 0..p.dim() {
        let f = |theta: f64| -> Result<f64> {
            let mut mu = p.mu().clone();
            mu[k] = theta;
            let pp = gvm_with(p, mu, p.alpha().clone(), p.sigma().clone())?;
            Ok(expect_gvm_raw(
                &pp,
                m,
                &|z| h.value(z),
                spec.scheme,
                n,
                spec.mixing_points,
            ))
        };
        out.push(fd_param_gradient(&f, p.mu()[k], spec.target_tol)?);
    }
    Ok(Vector::from_raw(out))
}

/// Finite-difference gradient of the mixture expectation in `alpha`.
pub fn fd_gvm_grad_alpha(
    p: &GvmParams,
    m: &MixingSpec,
    h: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<Vector> {
    check_dim(p.dim())?;
    let n = 2 * spec.points_per_axis;
    let mut out = Vec::with_capacity(p.dim());
    for k in 0..p.dim() {
        let f = |theta: f64| -> Result<f64> {
            let mut alpha = p.alpha().clone();
            alpha[k] = theta;
            let pp = gvm_with(p, p.mu().clone(), alpha, p.sigma().clone())?;
            Ok(expect_gvm_raw(
                &pp,
                m,
                &|z| h.value(z),
                spec.scheme,
                n,
                spec.mixing_points,
            ))
        };
        out.push(fd_param_gradient(&f, p.alpha()[k], spec.target_tol)?);
    }
    Ok(Vector::from_raw(out))
}

/// Finite-difference gradient of the mixture expectation in `Sigma`
/// (symmetric-pair convention as in [`fd_grad_sigma`]).
pub fn fd_gvm_grad_sigma(
    p: &GvmParams,
    m: &MixingSpec,
    h: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<Matrix> {
    check_dim(p.dim())?;
    let d = p.dim();
    let n = 2 * spec.points_per_axis;
    let mut out = Matrix::zeros(d, d);
    for j in 0..d {
        for k in j..d {
            let mult = if j == k { 1.0 } else { 2.0 };
            let base = p.sigma().get(j, k);
            let f = |theta: f64| -> Result<f64> {
                let sigma = perturb_sigma(p.sigma(), j, k, theta - base)?;
                let pp = gvm_with(p, p.mu().clone(), p.alpha().clone(), sigma)?;
                Ok(expect_gvm_raw(
                    &pp,
                    m,
                    &|z| h.value(z),
                    spec.scheme,
                    n,
                    spec.mixing_points,
                ))
            };
            let g = fd_param_gradient(&f, base, spec.target_tol)? / mult;
            out.set(j, k, g);
            out.set(k, j, g);
        }
    }
    Ok(out)
}

/// Closed form `E[z'Az + b'z + c] = tr(A Sigma) + mu'A mu + b'mu + c` for a
/// Gaussian.
pub fn closed_form_quadratic_gaussian(p: &GaussianParams, h: &TestFunction) -> Result<f64> {
    let (a, b, c) = h
        .as_quadratic()
        .ok_or_else(|| Error::Domain("closed form requires a quadratic test function".into()))?;
    let mut tr = 0.0;
    for i in 0..p.dim() {
        for j in 0..p.dim() {
            tr += a.get(i, j) * p.sigma().get(j, i);
        }
    }
    Ok(tr + p.mu().dot(&a.matvec(p.mu())) + b.dot(p.mu()) + c)
}

/// Closed form for the mixture using the declared mixing moments:
/// mean `mu + E[u] alpha`, covariance `E[v] Sigma + Var[u] alpha alpha'`.
pub fn closed_form_quadratic_gvm(p: &GvmParams, m: &MixingSpec, h: &TestFunction) -> Result<f64> {
    let (a, b, c) = h
        .as_quadratic()
        .ok_or_else(|| Error::Domain("closed form requires a quadratic test function".into()))?;
    let moments = m.moments().ok_or(Error::MissingMoments)?;
    let mean = p.mu().add(&p.alpha().scale(moments.e_u));
    let cov = p
        .sigma()
        .as_matrix()
        .scale(moments.e_v)
        .add(&p.alpha().outer(p.alpha()).scale(moments.var_u));
    let mut tr = 0.0;
    for i in 0..p.dim() {
        for j in 0..p.dim() {
            tr += a.get(i, j) * cov.get(j, i);
        }
    }
    Ok(tr + mean.dot(&a.matvec(&mean)) + b.dot(&mean) + c)
}

/// `integral exp(logpdf(z)) dz` over a +-`half_width` x scale box around
/// `center`, d <= 2; used as the normalization probe for closed-form
/// densities.
pub fn integrate_density(
    logpdf: &dyn Fn(&Vector) -> f64,
    center: &Vector,
    scales: &[f64],
    points_per_axis: usize,
    half_width: f64,
) -> f64 {
    match center.dim() {
        1 => {
            let pts = composite_gl_points(
                center[0] - half_width * scales[0],
                center[0] + half_width * scales[0],
                &[center[0]],
                points_per_axis,
            );
            pts.iter()
                .map(|&(z, w)| w * logpdf(&Vector::from_raw(vec![z])).exp())
                .sum()
        }
        2 => {
            let a0 = composite_gl_points(
                center[0] - half_width * scales[0],
                center[0] + half_width * scales[0],
                &[center[0]],
                points_per_axis,
            );
            let a1 = composite_gl_points(
                center[1] - half_width * scales[1],
                center[1] + half_width * scales[1],
                &[center[1]],
                points_per_axis,
            );
            let mut acc = 0.0;
            for &(z0, w0) in &a0 {
                for &(z1, w1) in &a1 {
                    acc += w0 * w1 * logpdf(&Vector::from_raw(vec![z0, z1])).exp();
                }
            }
            acc
        }
        d => panic!("integrate_density limited to d <= 2, got {d}"),
    }
}

/// `E[f(z)]` under a univariate exponential-family distribution.
pub fn expect_ef<E: UnivariateEf>(dist: &E, f: &dyn Fn(f64) -> f64, points: usize) -> f64 {
    let (l, u) = dist.support();
    if l == 0.0 && u.is_infinite() {
        half_line_points(dist.quadrature_scale(), points)
            .into_iter()
            .map(|(z, w)| w * dist.pdf(z) * f(z))
            .sum()
    } else if l.is_infinite() && u.is_infinite() {
        // Center at the median-ish location: use the scale hint around the
        // point where the CDF is 1/2 (mean parameter for the shipped case).
        let center = dist.param(0);
        full_line_points(center, 4.0 * dist.quadrature_scale(), points)
            .into_iter()
            .map(|(z, w)| w * dist.pdf(z) * f(z))
            .sum()
    } else {
        unimplemented!("only half-line and full-line supports ship")
    }
}

/// Finite-difference gradient of `E[f]` in parameter `i` of a univariate
/// exponential-family distribution.
pub fn fd_ef_lambda<E: UnivariateEf>(
    dist: &E,
    i: usize,
    f: &dyn Fn(f64) -> f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let n = 4 * spec.points_per_axis;
    let g = |theta: f64| -> Result<f64> { Ok(expect_ef(&dist.with_param(i, theta), f, n)) };
    fd_param_gradient(&g, dist.param(i), spec.target_tol)
}

/// Nested expectation under a bivariate EF mixture on half-line supports.
pub fn expect_ef_bivariate<M: BivariateEfMixture>(
    mix: &M,
    f: &dyn Fn(f64, f64) -> f64,
    points: usize,
) -> f64 {
    debug_assert_eq!(mix.support1().0, 0.0);
    let mut acc = 0.0;
    for (z1, w1) in half_line_points(mix.scale1(), points) {
        let q1 = mix.pdf1(z1);
        if q1 <= 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for (z2, w2) in half_line_points(mix.scale2(z1), points) {
            inner += w2 * mix.pdf2(z1, z2) * f(z1, z2);
        }
        acc += w1 * q1 * inner;
    }
    acc
}

/// Finite-difference gradient of the bivariate mixture expectation in
/// parameter `i`.
pub fn fd_ef_lambda_bivariate<M: BivariateEfMixture>(
    mix: &M,
    i: usize,
    f: &dyn Fn(f64, f64) -> f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let n = 2 * spec.points_per_axis;
    let g =
        |theta: f64| -> Result<f64> { Ok(expect_ef_bivariate(&mix.with_param(i, theta), f, n)) };
    fd_param_gradient(&g, mix.param(i), spec.target_tol)
}
