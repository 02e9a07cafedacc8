//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS line when its assertions hold (run with `-- --nocapture` to see
//! them). Criteria are checked at the stated tolerances with fixed seeds.

use std::process::Command;

use steingrad::distributions::{GaussianParams, GvmParams, MixingSpec};
use steingrad::ef::{CoupledExponentialPair, ExponentialEf, IndependentExponentialPair};
use steingrad::error::Error;
use steingrad::estimators::{
    bonnet_grad_mu, gvm_grad_alpha, gvm_grad_alpha_marginalized, gvm_grad_mu, gvm_grad_sigma,
    gvm_grad_sigma_marginalized, implicit_grad_bivariate, price_grad_sigma,
    stein_first_order_sigma, EstimatorConfig, SigmaEstimatorMode,
};
use steingrad::gvm_densities::{
    emg_logpdf, emg_u_decomposition, nig_logpdf, nig_v_decomposition, skew_gaussian_logpdf,
    skew_u_decomposition, student_t_logpdf, student_v_decomposition,
};
use steingrad::numerics::{norm_cdf, Matrix, RandomStream, SpdMatrix, Vector};
use steingrad::oracle::{
    conditional_logpdf, fd_ef_lambda_bivariate, fd_grad_sigma, integrate_density, w_integral,
    QuadratureSpec,
};
use steingrad::testfns::TestFunction;

use steingrad_cli::config::{Experiment, Family};
use steingrad_cli::runner::{parse_table, run_experiment};

const N: usize = 200_000;

fn vec1(x: f64) -> Vector {
    Vector::new(vec![x]).unwrap()
}

fn vecn(xs: &[f64]) -> Vector {
    Vector::new(xs.to_vec()).unwrap()
}

fn spd1(x: f64) -> SpdMatrix {
    SpdMatrix::from_rows(&[vec![x]]).unwrap()
}

fn spd2(rows: [[f64; 2]; 2]) -> SpdMatrix {
    SpdMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).unwrap()
}

fn quad(a_rows: &[Vec<f64>], b: &[f64], c: f64) -> TestFunction {
    TestFunction::quadratic(Matrix::from_rows(a_rows).unwrap(), vecn(b), c).unwrap()
}

fn gauss(mu: &[f64], sigma: SpdMatrix) -> Family {
    Family::Gaussian(GaussianParams::new(vecn(mu), sigma).unwrap())
}

fn gvm(mu: &[f64], alpha: &[f64], sigma: SpdMatrix, mixing: MixingSpec) -> Family {
    Family::Gvm {
        params: GvmParams::new(vecn(mu), vecn(alpha), sigma).unwrap(),
        mixing,
    }
}

fn run_cells(name: &str, family: Family, h: TestFunction, ids: &[&str], seed: u64) -> usize {
    let exp = Experiment {
        family,
        h,
        estimators: ids.iter().map(|s| s.to_string()).collect(),
        n_samples: N,
        seed,
        oracle: true,
    };
    let (rows, all_ok) = run_experiment(&exp).unwrap_or_else(|e| panic!("{name}: {e}"));
    for row in &rows {
        // |estimate - oracle| <= 4 * std_error per coordinate; the exact
        // (zero-variance) estimators are held to the oracle's own 1e-8
        // accuracy instead, since their only error is the oracle's.
        let z = row.z_score.unwrap();
        assert!(
            z <= 4.0,
            "{name}/{}[{}]: estimate {} vs oracle {} (z = {z})",
            row.estimator_id,
            row.coord,
            row.estimate,
            row.oracle.unwrap()
        );
    }
    assert!(all_ok, "{name}: runner reported failure");
    ids.len()
}

#[test]
fn criterion_1_identity_suite() {
    let mut cells = 0;

    // Gaussian, d = 1.
    let quad1 = quad(&[vec![1.0]], &[0.3], 0.2);
    cells += run_cells(
        "gaussian-1d-quadratic",
        gauss(&[0.5], spd1(1.44)),
        quad1.clone(),
        &["score", "bonnet", "stein-first-order", "price"],
        101,
    );
    cells += run_cells(
        "gaussian-1d-abs",
        gauss(&[0.5], spd1(1.44)),
        TestFunction::abs_sum(1),
        &["score", "bonnet", "stein-first-order"],
        102,
    );

    // Gaussian, d = 2.
    let quad2 = quad(&[vec![1.0, 0.2], vec![0.2, 0.7]], &[0.3, -0.6], 0.4);
    let lse2 = TestFunction::log_sum_exp(vecn(&[1.0, -0.5]));
    let sigma2 = [[1.0, 0.3], [0.3, 0.8]];
    cells += run_cells(
        "gaussian-2d-quadratic",
        gauss(&[0.5, -0.3], spd2(sigma2)),
        quad2.clone(),
        &["score", "bonnet", "stein-first-order", "price"],
        103,
    );
    cells += run_cells(
        "gaussian-2d-lse",
        gauss(&[0.5, -0.3], spd2(sigma2)),
        lse2.clone(),
        &["score", "bonnet", "stein-first-order", "price"],
        104,
    );
    cells += run_cells(
        "gaussian-2d-abs",
        gauss(&[0.5, -0.3], spd2(sigma2)),
        TestFunction::abs_sum(2),
        &["score", "bonnet", "stein-first-order"],
        105,
    );

    // Variance-mean mixtures, d = 1 (quadratic) and d = 2 (log-sum-exp).
    cells += run_cells(
        "skew-1d-quadratic",
        gvm(&[0.3], &[0.8], spd1(1.2), MixingSpec::HalfNormalAbs),
        quad1.clone(),
        &[
            "gvm-mu",
            "gvm-alpha",
            "gvm-sigma-hessian",
            "gvm-sigma-first-order",
        ],
        106,
    );
    cells += run_cells(
        "skew-2d-lse",
        gvm(
            &[0.2, -0.4],
            &[0.6, 0.3],
            spd2(sigma2),
            MixingSpec::HalfNormalAbs,
        ),
        lse2.clone(),
        &["gvm-mu", "gvm-alpha"],
        107,
    );
    cells += run_cells(
        "emg-1d-quadratic",
        gvm(&[-0.2], &[0.6], spd1(0.9), MixingSpec::ExponentialUnit),
        quad1.clone(),
        &["gvm-mu", "gvm-alpha", "gvm-sigma-hessian"],
        108,
    );
    cells += run_cells(
        "emg-2d-lse",
        gvm(
            &[0.2, -0.3],
            &[0.6, 0.3],
            spd2(sigma2),
            MixingSpec::ExponentialUnit,
        ),
        lse2.clone(),
        &["gvm-mu", "gvm-alpha"],
        109,
    );
    cells += run_cells(
        "student-1d-quadratic",
        gvm(
            &[0.2],
            &[0.0],
            spd1(1.0),
            MixingSpec::inv_gamma(3.0).unwrap(),
        ),
        quad1.clone(),
        &["gvm-mu", "gvm-sigma-hessian", "gvm-sigma-first-order"],
        110,
    );
    cells += run_cells(
        "student-2d-quadratic",
        gvm(
            &[0.1, -0.2],
            &[0.0, 0.0],
            spd2(sigma2),
            MixingSpec::inv_gamma(3.0).unwrap(),
        ),
        quad2.clone(),
        &["gvm-mu", "gvm-sigma-hessian"],
        111,
    );
    cells += run_cells(
        "nig-1d-quadratic",
        gvm(
            &[0.1],
            &[0.7],
            spd1(1.1),
            MixingSpec::inv_gauss(2.0).unwrap(),
        ),
        quad1.clone(),
        &["gvm-mu", "gvm-alpha", "gvm-sigma-hessian"],
        112,
    );
    cells += run_cells(
        "nig-2d-lse",
        gvm(
            &[0.0, 0.1],
            &[0.4, 0.2],
            spd2(sigma2),
            MixingSpec::inv_gauss(2.0).unwrap(),
        ),
        lse2.clone(),
        &["gvm-mu", "gvm-alpha"],
        113,
    );

    // Implicit reparameterization, univariate and bivariate.
    let linear = quad(&[vec![0.0]], &[1.0], 0.0);
    for (k, lambda) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        cells += run_cells(
            "ef-exponential-linear",
            Family::EfExponential(ExponentialEf::new(lambda).unwrap()),
            linear.clone(),
            &["implicit"],
            120 + k as u64,
        );
    }
    cells += run_cells(
        "ef-exponential-quadratic",
        Family::EfExponential(ExponentialEf::new(1.0).unwrap()),
        quad(&[vec![1.0]], &[0.0], 0.0),
        &["implicit"],
        123,
    );
    cells += run_cells(
        "ef-gamma-linear",
        Family::EfGamma(steingrad::ef::GammaRateEf::new(2.0, 1.0).unwrap()),
        linear.clone(),
        &["implicit"],
        124,
    );
    cells += run_cells(
        "ef-bivariate-product",
        Family::EfBivariate(CoupledExponentialPair::new(1.0).unwrap()),
        quad(&[vec![0.0, 0.5], vec![0.5, 0.0]], &[0.0, 0.0], 0.0),
        &["implicit-bivariate"],
        125,
    );

    assert!(cells >= 40, "matrix has {cells} cells, expected ~40");
    println!("criterion 1 (identity suite, {cells} cells at 4 standard errors): PASS");
}

#[test]
fn criterion_2_price_exactness() {
    // Per-sample second-order terms on a quadratic equal A identically.
    let a1 = Matrix::from_rows(&[vec![1.5]]).unwrap();
    let h1 = TestFunction::quadratic(a1.clone(), vec1(0.2), -1.0).unwrap();
    let p1 = GaussianParams::new(vec1(0.3), spd1(1.0)).unwrap();
    let cfg = EstimatorConfig::new(N, RandomStream::new(201, 0)).unwrap();
    let est = price_grad_sigma(&p1, &h1, &cfg).unwrap();
    assert_eq!(est.estimate.as_matrix().get(0, 0), 1.5);
    assert!(est.std_error.as_matrix().max_abs() <= 1e-12);
    let fd = fd_grad_sigma(&p1, &h1, &QuadratureSpec::default()).unwrap();
    assert!((est.estimate.as_matrix().get(0, 0) - fd.get(0, 0)).abs() <= 1e-8);

    let a2 = Matrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.7]]).unwrap();
    let h2 = TestFunction::quadratic(a2.clone(), Vector::zeros(2), 0.0).unwrap();
    let p2 = GaussianParams::new(vecn(&[0.5, -0.3]), spd2([[1.0, 0.3], [0.3, 0.8]])).unwrap();
    let est = price_grad_sigma(&p2, &h2, &cfg).unwrap();
    let fd = fd_grad_sigma(&p2, &h2, &QuadratureSpec::default()).unwrap();
    for j in 0..2 {
        for k in 0..2 {
            assert_eq!(est.estimate.as_matrix().get(j, k), a2.get(j, k));
            assert!((est.estimate.as_matrix().get(j, k) - fd.get(j, k)).abs() <= 1e-8);
        }
    }
    assert!(est.std_error.as_matrix().max_abs() <= 1e-12);
    println!("criterion 2 (second-order exactness on quadratics): PASS");
}

#[test]
fn criterion_3_weak_assumption_abs_sum() {
    let cfg = EstimatorConfig::new(N, RandomStream::new(301, 0)).unwrap();
    let h = TestFunction::abs_sum(1);

    // First-order mean identity at mu = 0.3: target 2 Phi(0.3) - 1.
    let p = GaussianParams::new(vec1(0.3), spd1(1.0)).unwrap();
    let est = bonnet_grad_mu(&p, &h, &cfg).unwrap();
    let want = 2.0 * norm_cdf(0.3) - 1.0;
    let (_, got, se) = est.rows()[0].clone();
    assert!((got - want).abs() <= 4.0 * se, "{got} vs {want}");

    // First-order covariance identity at mu = 0: target (1/2) sqrt(2/pi).
    let p0 = GaussianParams::new(vec1(0.0), spd1(1.0)).unwrap();
    let est = stein_first_order_sigma(&p0, &h, &cfg).unwrap();
    let want = 0.5 * (2.0 / std::f64::consts::PI).sqrt();
    let (_, got, se) = est.rows()[0].clone();
    assert!((got - want).abs() <= 4.0 * se, "{got} vs {want}");

    // The second-order estimator refuses the almost-everywhere class.
    assert!(matches!(
        price_grad_sigma(&p0, &h, &cfg),
        Err(Error::SmoothnessViolation(_))
    ));
    println!("criterion 3 (first-order identities under the weak smoothness class): PASS");
}

fn probe_points(p: &GvmParams, m: &MixingSpec) -> Vec<Vector> {
    let mom = m.moments().unwrap();
    let mut out = Vec::new();
    let axis = |dim: usize| {
        let s = (mom.e_v * p.sigma().get(dim, dim) + mom.var_u * p.alpha()[dim] * p.alpha()[dim])
            .sqrt();
        (p.mu()[dim] + mom.e_u * p.alpha()[dim], s)
    };
    match p.dim() {
        1 => {
            let (c, s) = axis(0);
            for k in 0..20 {
                out.push(vec1(c + (-3.0 + 6.0 * k as f64 / 19.0) * s));
            }
        }
        2 => {
            let (c0, s0) = axis(0);
            let (c1, s1) = axis(1);
            for i in 0..5 {
                for j in 0..4 {
                    out.push(vecn(&[
                        c0 + (-3.0 + 6.0 * i as f64 / 4.0) * s0,
                        c1 + (-3.0 + 6.0 * j as f64 / 3.0) * s1,
                    ]));
                }
            }
        }
        _ => unreachable!(),
    }
    out
}

#[test]
fn criterion_4_density_marginalization() {
    let cases: Vec<(GvmParams, MixingSpec, f64)> = vec![
        (
            GvmParams::new(vec1(0.3), vec1(0.8), spd1(1.2)).unwrap(),
            MixingSpec::HalfNormalAbs,
            1e-6,
        ),
        (
            GvmParams::new(vec1(-0.2), vec1(0.6), spd1(0.9)).unwrap(),
            MixingSpec::ExponentialUnit,
            1e-6,
        ),
        (
            GvmParams::new(vec1(0.5), vec1(0.0), spd1(1.4)).unwrap(),
            MixingSpec::inv_gamma(3.0).unwrap(),
            1e-6,
        ),
        (
            GvmParams::new(vec1(0.1), vec1(0.7), spd1(1.1)).unwrap(),
            MixingSpec::inv_gauss(1.5).unwrap(),
            1e-5,
        ),
        (
            GvmParams::new(
                vecn(&[0.2, -0.4]),
                vecn(&[0.6, 0.3]),
                spd2([[1.0, 0.3], [0.3, 0.8]]),
            )
            .unwrap(),
            MixingSpec::HalfNormalAbs,
            1e-6,
        ),
        (
            GvmParams::new(
                vecn(&[0.0, 0.5]),
                vecn(&[0.5, -0.2]),
                spd2([[1.2, -0.2], [-0.2, 0.7]]),
            )
            .unwrap(),
            MixingSpec::ExponentialUnit,
            1e-6,
        ),
        (
            GvmParams::new(
                vecn(&[0.4, 0.0]),
                Vector::zeros(2),
                spd2([[1.0, 0.4], [0.4, 1.5]]),
            )
            .unwrap(),
            MixingSpec::inv_gamma(2.5).unwrap(),
            1e-6,
        ),
        (
            GvmParams::new(
                vecn(&[0.0, 0.0]),
                vecn(&[0.4, 0.2]),
                spd2([[0.9, 0.1], [0.1, 1.1]]),
            )
            .unwrap(),
            MixingSpec::inv_gauss(2.0).unwrap(),
            1e-5,
        ),
    ];
    for (p, m, tol) in &cases {
        let logpdf = |z: &Vector| -> f64 {
            match m {
                MixingSpec::HalfNormalAbs => skew_gaussian_logpdf(p, z),
                MixingSpec::ExponentialUnit => emg_logpdf(p, z).unwrap(),
                MixingSpec::InvGamma { beta } => student_t_logpdf(p, *beta, z).unwrap(),
                MixingSpec::InvGauss { beta } => nig_logpdf(p, *beta, z).unwrap(),
                MixingSpec::Degenerate => unreachable!(),
            }
        };
        // Pointwise marginalization at 20 probes.
        for z in probe_points(p, m) {
            let closed = logpdf(&z).exp();
            let quad = w_integral(m, &|w| conditional_logpdf(p, m, w, &z).exp(), 400);
            assert!(
                ((closed - quad) / quad).abs() < *tol,
                "{} at {:?}: {closed} vs {quad}",
                m.name(),
                z.as_slice()
            );
        }
        // Normalization on a d <= 2 grid.
        let mom = m.moments().unwrap();
        let scales: Vec<f64> = (0..p.dim())
            .map(|k| (mom.e_v * p.sigma().get(k, k)).sqrt() + p.alpha()[k].abs())
            .collect();
        let total = integrate_density(&|z| logpdf(z), p.mu(), &scales, 512, 60.0);
        assert!(
            (total - 1.0).abs() < *tol,
            "{} normalization: {total}",
            m.name()
        );
    }
    println!("criterion 4 (closed-form densities match w-quadrature and normalize): PASS");
}

#[test]
fn criterion_5_weight_decompositions() {
    // Pointwise decomposition identities.
    let cases: Vec<(GvmParams, MixingSpec, f64)> = vec![
        (
            GvmParams::new(vec1(0.3), vec1(0.8), spd1(1.2)).unwrap(),
            MixingSpec::HalfNormalAbs,
            1e-8,
        ),
        (
            GvmParams::new(vec1(-0.2), vec1(0.6), spd1(0.9)).unwrap(),
            MixingSpec::ExponentialUnit,
            1e-8,
        ),
        (
            GvmParams::new(vec1(0.5), vec1(0.0), spd1(1.4)).unwrap(),
            MixingSpec::inv_gamma(3.0).unwrap(),
            1e-8,
        ),
        (
            GvmParams::new(vec1(0.1), vec1(0.7), spd1(1.1)).unwrap(),
            MixingSpec::inv_gauss(1.5).unwrap(),
            1e-6,
        ),
    ];
    for (p, m, tol) in &cases {
        let dec = match m {
            MixingSpec::HalfNormalAbs => skew_u_decomposition(p),
            MixingSpec::ExponentialUnit => emg_u_decomposition(p).unwrap(),
            MixingSpec::InvGamma { beta } => student_v_decomposition(p, *beta).unwrap(),
            MixingSpec::InvGauss { beta } => nig_v_decomposition(p, *beta).unwrap(),
            MixingSpec::Degenerate => unreachable!(),
        };
        for z in probe_points(p, m) {
            let lhs = w_integral(
                m,
                &|w| {
                    let weight = match m {
                        MixingSpec::HalfNormalAbs | MixingSpec::ExponentialUnit => m.u(w),
                        _ => m.v(w),
                    };
                    weight * conditional_logpdf(p, m, w, &z).exp()
                },
                400,
            );
            let rhs = dec.evaluate(&z).unwrap();
            assert!(
                (lhs - rhs).abs() < tol * lhs.abs().max(1e-2),
                "{} at {:?}: {lhs} vs {rhs}",
                m.name(),
                z.as_slice()
            );
        }
    }

    // Marginalized estimators agree with joint estimators within a combined
    // 4 standard errors (independent streams).
    let agree = |a: &steingrad::estimators::GradEstimate,
                 b: &steingrad::estimators::GradEstimate| {
        for ((label, xa, sa), (_, xb, sb)) in a.rows().into_iter().zip(b.rows()) {
            let band = 4.0 * (sa * sa + sb * sb).sqrt() + 1e-12;
            assert!(
                (xa - xb).abs() <= band,
                "{} vs {} at {label}: {xa} vs {xb}",
                a.estimator_id,
                b.estimator_id
            );
        }
    };
    let h = quad(&[vec![1.0]], &[0.3], 0.0);
    let cfg_a = EstimatorConfig::new(N, RandomStream::new(501, 0)).unwrap();
    let cfg_b = EstimatorConfig::new(N, RandomStream::new(502, 0)).unwrap();

    let p = GvmParams::new(vec1(0.3), vec1(0.8), spd1(1.2)).unwrap();
    agree(
        &gvm_grad_alpha_marginalized(&p, &skew_u_decomposition(&p), &h, &cfg_a).unwrap(),
        &gvm_grad_alpha(&p, &MixingSpec::HalfNormalAbs, &h, &cfg_b).unwrap(),
    );
    let p = GvmParams::new(vec1(-0.2), vec1(0.6), spd1(0.9)).unwrap();
    agree(
        &gvm_grad_alpha_marginalized(&p, &emg_u_decomposition(&p).unwrap(), &h, &cfg_a).unwrap(),
        &gvm_grad_alpha(&p, &MixingSpec::ExponentialUnit, &h, &cfg_b).unwrap(),
    );
    let p = GvmParams::new(vec1(0.5), vec1(0.0), spd1(1.4)).unwrap();
    agree(
        &gvm_grad_sigma_marginalized(&p, &student_v_decomposition(&p, 3.0).unwrap(), &h, &cfg_a)
            .unwrap(),
        &gvm_grad_sigma(
            &p,
            &MixingSpec::inv_gamma(3.0).unwrap(),
            &h,
            &cfg_b,
            SigmaEstimatorMode::Hessian,
        )
        .unwrap(),
    );
    let p = GvmParams::new(vec1(0.1), vec1(0.7), spd1(1.1)).unwrap();
    agree(
        &gvm_grad_sigma_marginalized(&p, &nig_v_decomposition(&p, 1.5).unwrap(), &h, &cfg_a)
            .unwrap(),
        &gvm_grad_sigma(
            &p,
            &MixingSpec::inv_gauss(1.5).unwrap(),
            &h,
            &cfg_b,
            SigmaEstimatorMode::Hessian,
        )
        .unwrap(),
    );
    println!("criterion 5 (weight decompositions, pointwise and as estimators): PASS");
}

#[test]
fn criterion_6_implicit_reparameterization() {
    let cfg = EstimatorConfig::new(N, RandomStream::new(601, 0)).unwrap();
    let linear = quad(&[vec![0.0]], &[1.0], 0.0);
    for lambda in [0.5, 1.0, 2.0] {
        let d = ExponentialEf::new(lambda).unwrap();
        let est = steingrad::estimators::implicit_grad_1d(&d, 0, &linear, &cfg).unwrap();
        let want = -1.0 / (lambda * lambda);
        let (_, got, se) = est.rows()[0].clone();
        assert!(
            (got - want).abs() <= 4.0 * se,
            "lambda {lambda}: {got} vs {want}"
        );
    }

    // Coupled bivariate pair against the nested-quadrature FD oracle, with
    // h = z1 z2 (a well-defined expectation: E[z1 z2] = 1 / lambda).
    let m = CoupledExponentialPair::new(1.0).unwrap();
    let h = quad(&[vec![0.0, 0.5], vec![0.5, 0.0]], &[0.0, 0.0], 0.0);
    let est = implicit_grad_bivariate(&m, 0, &h, &cfg).unwrap();
    let spec =
        QuadratureSpec::new(steingrad::oracle::Scheme::GaussHermiteTensor, 48, 400, 1e-7).unwrap();
    let oracle = fd_ef_lambda_bivariate(&m, 0, &|z1, z2| z1 * z2, &spec).unwrap();
    let (_, got, se) = est.rows()[0].clone();
    assert!((got - oracle).abs() <= 4.0 * se, "{got} vs {oracle}");

    // Independent product pair: -2 / lambda^2 for h = z1 + z2.
    let lam = 1.5;
    let ind = IndependentExponentialPair::new(lam).unwrap();
    let h_sum = quad(&[vec![0.0, 0.0], vec![0.0, 0.0]], &[1.0, 1.0], 0.0);
    let est = implicit_grad_bivariate(&ind, 0, &h_sum, &cfg).unwrap();
    let (_, got, se) = est.rows()[0].clone();
    assert!((got + 2.0 / (lam * lam)).abs() <= 4.0 * se);
    println!("criterion 6 (implicit reparameterization gradients): PASS");
}

#[test]
fn criterion_7_reduction_laws() {
    // Degenerate mixing (u = 0, v = 1, alpha = 0) is bit-identical to the
    // plain Gaussian estimators on shared streams.
    let mu = vecn(&[0.4, -0.7]);
    let sigma = spd2([[1.0, 0.2], [0.2, 0.9]]);
    let g = GaussianParams::new(mu.clone(), sigma.clone()).unwrap();
    let p = GvmParams::new(mu, Vector::zeros(2), sigma).unwrap();
    let h = TestFunction::log_sum_exp(vecn(&[1.0, -0.5]));
    let cfg = EstimatorConfig::new(50_000, RandomStream::new(701, 0)).unwrap();

    let a = gvm_grad_mu(&p, &MixingSpec::Degenerate, &h, &cfg).unwrap();
    let b = bonnet_grad_mu(&g, &h, &cfg).unwrap();
    assert_eq!(a.estimate, b.estimate);
    assert_eq!(a.std_error, b.std_error);

    let a = gvm_grad_sigma(
        &p,
        &MixingSpec::Degenerate,
        &h,
        &cfg,
        SigmaEstimatorMode::Hessian,
    )
    .unwrap();
    let b = price_grad_sigma(&g, &h, &cfg).unwrap();
    assert_eq!(a.estimate, b.estimate);
    assert_eq!(a.std_error, b.std_error);

    let a = gvm_grad_sigma(
        &p,
        &MixingSpec::Degenerate,
        &h,
        &cfg,
        SigmaEstimatorMode::FirstOrder,
    )
    .unwrap();
    let b = stein_first_order_sigma(&g, &h, &cfg).unwrap();
    assert_eq!(a.estimate, b.estimate);
    assert_eq!(a.std_error, b.std_error);

    // With u identically zero the asymmetry gradient is exactly the zero
    // vector with zero variance.
    let a = gvm_grad_alpha(&p, &MixingSpec::Degenerate, &h, &cfg).unwrap();
    assert_eq!(a.estimate.as_vector().max_abs(), 0.0);
    assert_eq!(a.std_error.as_vector().max_abs(), 0.0);

    // And the implicit estimator on a fixed-variance Gaussian mean is the
    // first-order mean estimator, draw for draw.
    let d = steingrad::ef::GaussianMeanEf::new(0.4, 1.3).unwrap();
    let g1 = GaussianParams::new(vec1(0.4), spd1(1.3)).unwrap();
    let h1 = quad(&[vec![1.0]], &[0.0], 0.0);
    let a = steingrad::estimators::implicit_grad_1d(&d, 0, &h1, &cfg).unwrap();
    let b = bonnet_grad_mu(&g1, &h1, &cfg).unwrap();
    assert_eq!(a.estimate.as_vector()[0], b.estimate.as_vector()[0]);
    assert_eq!(a.std_error.as_vector()[0], b.std_error.as_vector()[0]);
    println!("criterion 7 (degenerate mixtures reduce bit-exactly): PASS");
}

fn write_config(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("steingrad-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const CLI_CONFIG: &str = r#"
family = "gaussian"
dim = 1
n_samples = 20000
seed = 42
oracle = true
estimators = ["bonnet", "score", "price", "stein-first-order"]

[params]
mu = [0.5]
sigma = [[1.0]]

[h]
kind = "quadratic"
a = [[1.0]]
b = [0.0]
c = 0.0
"#;

#[test]
fn criterion_8_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_steingrad");
    let cfg = write_config("determinism.toml", CLI_CONFIG);
    let out1 = std::env::temp_dir().join("steingrad-acceptance/out1.csv");
    let out2 = std::env::temp_dir().join("steingrad-acceptance/out2.csv");

    let run = |out: &std::path::Path, seed: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.arg("run").arg(&cfg).arg("--out").arg(out);
        if let Some(s) = seed {
            cmd.arg("--seed").arg(s);
        }
        let status = cmd.status().unwrap();
        status.code().unwrap()
    };

    assert_eq!(run(&out1, None), 0);
    assert_eq!(run(&out2, None), 0);
    let bytes1 = std::fs::read(&out1).unwrap();
    let bytes2 = std::fs::read(&out2).unwrap();
    assert_eq!(
        bytes1, bytes2,
        "same config and seed must be byte-identical"
    );

    // Seed override changes the draws but not the verdict.
    assert_eq!(run(&out2, Some("43")), 0);
    let bytes3 = std::fs::read(&out2).unwrap();
    assert_ne!(bytes1, bytes3);

    // Result files re-parse losslessly.
    let text = String::from_utf8(bytes1).unwrap();
    let rows = parse_table(&text).unwrap();
    assert_eq!(rows.len(), 4);
    let rendered = steingrad_cli::runner::render_results(&rows);
    assert_eq!(rendered, text);
    println!("criterion 8 (byte-reproducible CLI runs): PASS");
}

#[test]
fn criterion_9_variance_report() {
    let bin = env!("CARGO_BIN_EXE_steingrad");
    let cfg = write_config("variance.toml", CLI_CONFIG);
    let out = std::env::temp_dir().join("steingrad-acceptance/variance.csv");
    let status = Command::new(bin)
        .arg("compare-variance")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code().unwrap(), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut price_var = None;
    let mut stein_var = None;
    let mut bonnet_var = None;
    let mut score_var = None;
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let var: f64 = fields.last().unwrap().parse().unwrap();
        match fields[0] {
            "price" => price_var = Some(var),
            "stein-first-order" => stein_var = Some(var),
            "bonnet" => bonnet_var = Some(var),
            "score" => score_var = Some(var),
            _ => {}
        }
    }
    // The only hard assertion: the second-order estimator has zero variance
    // on quadratics; the first-order form does not.
    assert!(price_var.unwrap() <= 1e-24);
    assert!(stein_var.unwrap() > 0.0);
    // The remaining comparisons are a report, not an assertion.
    println!(
        "criterion 9 (variance report): PASS \
         (quadratic h: bonnet {:.3e} vs score {:.3e}; price {:.3e} vs stein {:.3e})",
        bonnet_var.unwrap(),
        score_var.unwrap(),
        price_var.unwrap(),
        stein_var.unwrap()
    );
}
