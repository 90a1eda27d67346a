//! Atmospheric loss, turbulence laws, the composite density and outage,
//! checked against independent quadrature and limiting cases.

mod common;

use approx::assert_relative_eq;
use common::simpson_rel;
use fsoirs::channel::*;
use fsoirs::pointing::GmlLaw;
use fsoirs::special::erfc;
use proptest::prelude::*;

const LN_CASES: [f64; 4] = [1e-3, 0.02, 0.075, 0.25];
const GG_CASES: [(f64, f64); 5] = [(4.2, 1.4), (2.5, 2.5), (11.3, 9.8), (1.3, 0.6), (3.1, 1.7)];

fn models() -> Vec<TurbulenceModel> {
    let mut v: Vec<_> = LN_CASES.iter().map(|&sigma2| TurbulenceModel::LogNormal { sigma2 }).collect();
    v.extend(GG_CASES.iter().map(|&(alpha, beta)| TurbulenceModel::GammaGamma { alpha, beta }));
    v
}

/// `∫₀^∞ g(h) dh` over `x = ln h`.
fn log_integral<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, tol: f64) -> f64 {
    simpson_rel(|x| g(x.exp()) * x.exp(), lo, hi, 512, tol)
}

fn budget(snr_db: f64, thr_db: f64) -> LinkBudget {
    LinkBudget {
        eta: 0.5,
        zeta: 1.0,
        kappa: 0.43e-3,
        snr: 10f64.powf(snr_db / 10.0),
        snr_thr: 10f64.powf(thr_db / 10.0),
        convention: SnrConvention::Transmit,
    }
}

const PLANAR: GmlLaw = GmlLaw::Planar { a0: 0.6, varpi: 1.7 };

#[test]
fn atmospheric_loss_reference() {
    let h = atmospheric_loss(1.0, 0.43e-3, 400.0, 500.0);
    assert_relative_eq!(h, 10f64.powf(-0.0387), max_relative = 1e-14);
    assert_eq!(atmospheric_loss(0.8, 0.0, 400.0, 500.0), 0.8);
}

#[test]
fn rytov_scaling() {
    let lambda = 1550e-9;
    let r1 = rytov(1.7e-14, lambda, 500.0);
    let r2 = rytov(1.7e-14, lambda, 1000.0);
    assert_relative_eq!(r2 / r1, 2f64.powf(11.0 / 6.0), max_relative = 1e-14);
    assert_eq!(rytov(0.0, lambda, 1000.0), 0.0);
    let k = 2.0 * std::f64::consts::PI / lambda;
    assert_relative_eq!(r1, 1.23 * 1.7e-14 * k.powf(7.0 / 6.0) * 500f64.powf(11.0 / 6.0), max_relative = 1e-14);
}

#[test]
fn gg_alpha_dominates_beta() {
    for i in 1..=1000 {
        let s = 10.0 * i as f64 / 1000.0;
        let (a, b) = gg_params(s);
        assert!(a >= b && b > 0.0, "σR² = {s}: α = {a}, β = {b}");
    }
}

#[test]
fn regime_selection() {
    assert_eq!(TurbulenceModel::from_rytov(0.2, DEFAULT_RYTOV_THRESHOLD), TurbulenceModel::LogNormal { sigma2: 0.05 });
    let (alpha, beta) = gg_params(0.5);
    assert_eq!(TurbulenceModel::from_rytov(0.5, DEFAULT_RYTOV_THRESHOLD), TurbulenceModel::GammaGamma { alpha, beta });
    assert!(TurbulenceModel::LogNormal { sigma2: 0.0 }.validate().is_err());
    assert!(TurbulenceModel::GammaGamma { alpha: 1.0, beta: -1.0 }.validate().is_err());
}

#[test]
fn turbulence_moments() {
    for m in models() {
        let norm = log_integral(|h| m.pdf(h), -40.0, 6.0, 1e-11);
        let mean = log_integral(|h| h * m.pdf(h), -40.0, 6.0, 1e-11);
        let second = log_integral(|h| h * h * m.pdf(h), -40.0, 7.0, 1e-11);
        let tol = if matches!(m, TurbulenceModel::LogNormal { .. }) { 1e-4 } else { 1e-3 };
        assert!((norm - 1.0).abs() <= tol, "{m:?}: ∫f = {norm}");
        assert!((mean - 1.0).abs() <= tol, "{m:?}: E h = {mean}");
        assert_relative_eq!(second, m.second_moment(), max_relative = 1e-3);
    }
}

#[test]
fn turbulence_cdf_matches_quadrature() {
    for m in models() {
        for y in [0.05f64, 0.4, 1.0, 2.5] {
            let want = log_integral(|h| m.pdf(h), -40.0, y.ln(), 1e-12);
            let got = m.cdf(y).unwrap();
            assert!((got - want).abs() <= 1e-7, "{m:?} at {y}: {got} vs {want}");
        }
        assert_eq!(m.cdf(0.0).unwrap(), 0.0);
        assert_eq!(m.cdf(f64::INFINITY).unwrap(), 1.0);
    }
}

#[test]
fn gg_closed_form_matches_density_quadrature() {
    for (alpha, beta) in [(4.2, 1.4), (1.3, 0.6), (3.1, 1.7), (7.77, 2.15)] {
        for y in [1e-3, 0.1, 0.8, 1.5, 4.0] {
            let (series, bound) = gg_cdf_series(y, alpha, beta).unwrap();
            let quad = gg_cdf_quad(y, alpha, beta).unwrap();
            // Where the rounding bound is small the series must agree; elsewhere
            // the public CDF falls back to quadrature.
            if bound <= 1e-12f64.max(1e-9 * series.abs()) {
                assert!((series - quad).abs() <= 1e-8, "({alpha}, {beta}) at {y}: {series} vs {quad}");
            }
            let cdf = TurbulenceModel::GammaGamma { alpha, beta }.cdf(y).unwrap();
            assert!((cdf - quad).abs() <= 1e-8);
        }
    }
    assert!(gg_near_integer(3.0004, 1.0));
    assert!(!gg_near_integer(3.2, 1.0));
    // α = β goes through quadrature without error.
    let m = TurbulenceModel::GammaGamma { alpha: 2.5, beta: 2.5 };
    assert!(m.cdf(0.7).unwrap() > 0.0);
}

#[test]
fn composite_density_integrates_to_one() {
    let h_p = budget(0.0, 0.0).h_p(400.0, 500.0);
    for turb in [TurbulenceModel::LogNormal { sigma2: 0.02 }, TurbulenceModel::GammaGamma { alpha: 4.2, beta: 1.4 }] {
        for law in [PLANAR, GmlLaw::hoyt(0.6, 0.004, 0.3, 2e-4)] {
            let centre = (0.5 * h_p * law.a0()).ln();
            let total = log_integral(|h| composite_pdf(h, h_p, 0.5, &law, &turb).unwrap(), centre - 30.0, centre + 6.0, 1e-8);
            assert!((total - 1.0).abs() <= 1e-4, "{law:?} {turb:?}: {total}");
        }
    }
}

#[test]
fn composite_density_delta_limit() {
    // Negligible turbulence leaves the scaled GML density.
    let turb = TurbulenceModel::LogNormal { sigma2: 1e-6 };
    let (h_p, eta) = (0.9, 0.5);
    let scale = eta * h_p;
    for frac in [0.1, 0.3, 0.6, 0.9] {
        let h = frac * scale * PLANAR.a0();
        let got = composite_pdf(h, h_p, eta, &PLANAR, &turb).unwrap();
        let want = PLANAR.pdf(h / scale) / scale;
        assert_relative_eq!(got, want, max_relative = 1e-2);
    }
    assert_eq!(composite_pdf(0.0, h_p, eta, &PLANAR, &turb).unwrap(), 0.0);
}

#[test]
fn ln_outage_matches_independent_quadrature() {
    let sigma2 = 0.05;
    let turb = TurbulenceModel::LogNormal { sigma2 };
    for snr_db in [10.0, 20.0, 30.0] {
        let b = budget(snr_db, 3.0);
        let h_p = b.h_p(400.0, 500.0);
        let h_th = b.gain_threshold(h_p, &PLANAR, &turb);
        let a0 = PLANAR.a0();
        // Pr{h_g h_a ≤ h_th/(η h_p)} over h_g = A₀e^{−s²}.
        let f_a = |y: f64| 0.5 * erfc(((1.0 / y).ln() - 2.0 * sigma2) / (8.0 * sigma2).sqrt());
        let oracle = simpson_rel(
            |s| {
                let x = a0 * (-s * s).exp();
                if s == 0.0 || x == 0.0 {
                    0.0
                } else {
                    PLANAR.pdf(x) * 2.0 * s * x * f_a(h_th / (b.eta * h_p * x))
                }
            },
            0.0,
            (60.0f64 / 1.7).sqrt(),
            256,
            1e-10,
        );
        let got = outage_ln(&b, h_p, &PLANAR, sigma2).unwrap();
        assert_relative_eq!(got, oracle, max_relative = 1e-6);
        let generic = outage_generic(&b, h_p, &PLANAR, &turb).unwrap();
        assert_relative_eq!(generic, oracle, max_relative = 1e-4);
    }
}

#[test]
fn gg_outage_matches_generic_path() {
    let law = GmlLaw::hoyt(0.6, 0.004, 0.3, 2e-4);
    for (alpha, beta) in [(4.2, 1.4), (1.3, 0.6), (11.3, 9.8)] {
        let turb = TurbulenceModel::GammaGamma { alpha, beta };
        for snr_db in [15.0, 30.0] {
            let b = budget(snr_db, 3.0);
            let h_p = b.h_p(400.0, 500.0);
            let closed = outage_gg(&b, h_p, &law, alpha, beta).unwrap();
            let generic = outage_generic(&b, h_p, &law, &turb).unwrap();
            assert!((closed / generic - 1.0).abs() <= 1e-3, "({alpha}, {beta}) at {snr_db} dB: {closed} vs {generic}");
        }
    }
}

#[test]
fn outage_limits() {
    let turbs = [TurbulenceModel::LogNormal { sigma2: 0.05 }, TurbulenceModel::GammaGamma { alpha: 4.2, beta: 1.4 }];
    for turb in turbs {
        let mut b = budget(20.0, 0.0);
        b.snr_thr = 0.0;
        let h_p = b.h_p(400.0, 500.0);
        assert_eq!(outage(&b, h_p, &PLANAR, &turb).unwrap(), 0.0);
        assert_eq!(outage_generic(&b, h_p, &PLANAR, &turb).unwrap(), 0.0);
        let b = budget(400.0, 3.0);
        assert!(outage(&b, h_p, &PLANAR, &turb).unwrap() < 1e-12);
        // Without sway the outage is the turbulence CDF at the threshold.
        let b = budget(20.0, 3.0);
        let point = GmlLaw::PointMass { a0: 0.6 };
        let y = b.gain_threshold(h_p, &point, &turb) / (b.eta * h_p * 0.6);
        assert_relative_eq!(outage(&b, h_p, &point, &turb).unwrap(), turb.cdf(y).unwrap(), max_relative = 1e-9);
    }
}

#[test]
fn average_received_convention() {
    let turb = TurbulenceModel::GammaGamma { alpha: 4.2, beta: 1.4 };
    let mut b = budget(20.0, 3.0);
    b.convention = SnrConvention::AverageReceived;
    let h_p = b.h_p(400.0, 500.0);
    let eh2 = (b.eta * h_p).powi(2) * PLANAR.moment(2.0) * turb.second_moment();
    assert_relative_eq!(b.transmit_snr(h_p, &PLANAR, &turb), b.snr / eh2, max_relative = 1e-14);
    let mut bad = b;
    bad.eta = 0.0;
    assert!(bad.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn outage_monotone_in_snr(snr_db in 0.0f64..40.0, step in 0.5f64..10.0, sigma2 in 0.005f64..0.2) {
        let turb = TurbulenceModel::LogNormal { sigma2 };
        let lo = budget(snr_db, 3.0);
        let hi = budget(snr_db + step, 3.0);
        let h_p = lo.h_p(400.0, 500.0);
        let p_lo = outage(&lo, h_p, &PLANAR, &turb).unwrap();
        let p_hi = outage(&hi, h_p, &PLANAR, &turb).unwrap();
        prop_assert!(p_hi <= p_lo && (0.0..=1.0).contains(&p_lo));
    }
}

#[test]
fn generic_outage_survives_far_turbulence_tail() {
    // Large L pushes z = z₀e^L past f64 range; the tail must contribute zero.
    let law = GmlLaw::hoyt(0.4127, 4e-3, 0.7845, 1.6487e-3);
    let budget = LinkBudget {
        eta: 0.5,
        zeta: 1.0,
        kappa: 0.43e-3,
        snr: 897.57,
        snr_thr: 2.5718,
        convention: SnrConvention::Transmit,
    };
    let h_p = budget.h_p(400.0, 500.0);
    let (alpha, beta) = (11.2700, 10.5149);
    let closed = outage_gg(&budget, h_p, &law, alpha, beta).unwrap();
    let generic = outage_generic(&budget, h_p, &law, &TurbulenceModel::GammaGamma { alpha, beta }).unwrap();
    assert_relative_eq!(generic, closed, max_relative = 1e-6);
}
