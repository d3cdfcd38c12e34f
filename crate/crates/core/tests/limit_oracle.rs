use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triwalk_core::analysis::{compare, ks_distance};
use triwalk_core::limit::{
    eigen_system, fourier_cycle, group_velocity, LimitLaw, LimitModel,
};
use triwalk_core::walk::{distribution, evolve, CoinOperator, InitialSpin, StepProtocol};
use triwalk_core::Complex;

fn spin_up() -> InitialSpin {
    InitialSpin::new(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)).unwrap()
}

fn random_spin(rng: &mut ChaCha8Rng) -> InitialSpin {
    let a = rng.gen_range(0.0..1.0f64);
    let (pa, pb) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
    InitialSpin::new(
        Complex::from_polar(a.sqrt(), pa),
        Complex::from_polar((1.0 - a).sqrt(), pb),
    )
    .unwrap()
}

fn random_theta(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.02..PI / 2.0 - 0.02) + rng.gen_range(0..4) as f64 * PI / 2.0
}

#[test]
fn eigenvalues_match_trace_and_determinant() {
    for theta in [0.2, PI / 4.0, 1.3, 2.0 * PI / 5.0, 2.9, 4.4] {
        let coin = CoinOperator::rotation(theta).unwrap();
        let proto = StepProtocol::three_period(theta).unwrap();
        for i in 0..500 {
            let k = -PI + (i as f64 + 0.5) * TAU / 500.0;
            let sys = eigen_system(&coin, k).unwrap();
            let m = fourier_cycle(&proto, k);
            let trace = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            assert!((sys.lambda[0] + sys.lambda[1] - trace).norm() < 1e-13);
            assert!((sys.lambda[0] * sys.lambda[1] - det).norm() < 1e-13);
            assert!((det.norm() - 1.0).abs() < 1e-13);
            assert!((sys.lambda[0] * sys.lambda[1].conj() - 1.0).norm() > 1e-12);
        }
    }
}

#[test]
fn eigen_normalization_matches_closed_form() {
    // N_j = 2{1 - A² + (-1)^j B sqrt(1 - A²)} evaluated naively away from k = 0, ±π
    let theta = 1.1;
    let (s, c) = f64::sin_cos(theta);
    let coin = CoinOperator::rotation(theta).unwrap();
    for i in 0..200 {
        let k = -3.0 + 6.0 * i as f64 / 199.0;
        if k.abs() < 0.05 {
            continue;
        }
        let a = c * c * (3.0 * k).cos() + s * s * k.cos();
        let b = c * c * (3.0 * k).sin() + s * s * k.sin();
        let r = (1.0 - a * a).sqrt();
        let sys = eigen_system(&coin, k).unwrap();
        for (idx, sign) in [(0, -1.0), (1, 1.0)] {
            let naive = 2.0 * (1.0 - a * a + sign * b * r);
            assert!((sys.norms[idx] - naive).abs() < 1e-12 * naive.max(1.0), "k={k}");
        }
    }
}

#[test]
fn velocity_matches_derivative_of_eigenphase() {
    let eps = 1e-5;
    for theta in [0.3, PI / 4.0, 2.0 * PI / 5.0, 2.5, 5.0] {
        let coin = CoinOperator::rotation(theta).unwrap();
        for i in 0..2000 {
            let k = -PI + (i as f64 + 0.5) * TAU / 2000.0;
            let (lo, mid, hi) = (
                eigen_system(&coin, k - eps).unwrap(),
                eigen_system(&coin, k).unwrap(),
                eigen_system(&coin, k + eps).unwrap(),
            );
            for j in 0..2 {
                let deriv = (hi.lambda[j] - lo.lambda[j]) / (2.0 * eps);
                // i λ' / (3 λ) with λ unimodular
                let fd = (Complex::i() * mid.lambda[j].conj() * deriv).re / 3.0;
                assert!((mid.velocities[j] - fd).abs() <= 1e-6, "theta={theta} k={k}");
            }
        }
    }
}

#[test]
fn velocity_range_is_the_support() {
    for theta in [PI / 4.0, 2.0 * PI / 5.0, PI / 5.0, 1.3] {
        let coin = CoinOperator::rotation(theta).unwrap();
        let m = LimitModel::rotation(theta, spin_up()).unwrap();
        let (lo, hull) = m.support_intervals().positive;
        let n = 100_000;
        let (mut min_abs, mut max_abs) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let k = -PI + (i as f64 + 0.5) * TAU / n as f64;
            let h = group_velocity(&coin, k, 1).unwrap();
            assert_eq!(h, -group_velocity(&coin, k, 2).unwrap());
            assert!(h.abs() < hull + 1e-9);
            min_abs = min_abs.min(h.abs());
            max_abs = max_abs.max(h.abs());
        }
        assert!((max_abs - hull).abs() < 1e-4, "theta={theta}");
        assert!((min_abs - lo.max(0.0)).abs() < 1e-4, "theta={theta} {min_abs} {lo}");
    }
}

#[test]
fn pushforward_histogram_mass_and_gap() {
    let m = LimitModel::rotation(2.0 * PI / 5.0, spin_up()).unwrap();
    let hist = m.pushforward_density(400, 1 << 14).unwrap();
    assert!((hist.total() - 1.0).abs() < 1e-8);
    let gap = m.support_intervals().gap().unwrap();
    for i in 0..hist.bins() {
        let (a, b) = hist.edges(i);
        if a > -gap && b < gap {
            assert!(hist.mass[i] <= 1e-10);
        }
    }
    assert!(m.pushforward_density(50, 1 << 10).is_err());
}

#[test]
fn closed_form_density_matches_pushforward_at_sample_points() {
    for (theta, x) in [(PI / 4.0, 0.5), (2.0 * PI / 5.0, 0.324_360_835_808_991_7)] {
        let m = LimitModel::rotation(theta, InitialSpin::symmetric()).unwrap();
        let closed = m.limit_density(x).unwrap();
        // Histogram of a thin bin around x from a fine k grid.
        let width = 2e-3;
        let law = LimitLaw::with_k_points(m, 1 << 18).unwrap();
        let oracle = (law.cdf(x + width / 2.0) - law.cdf(x - width / 2.0)) / width;
        let hist = m.pushforward_density(1000, 1 << 20).unwrap();
        let bin = ((x + 1.0) / hist.width) as usize;
        let (a, b) = hist.edges(bin);
        let bin_avg = m.density_integral(a, b, 256) / (b - a);
        assert!((closed - oracle).abs() < 1e-4 * closed, "{closed} {oracle}");
        assert!((hist.density(bin) - bin_avg).abs() < (0.02 * bin_avg).max(1e-3), "{} {bin_avg}", hist.density(bin));
    }
}

#[test]
fn density_nonnegative_for_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let theta = random_theta(&mut rng);
        let m = LimitModel::rotation(theta, random_spin(&mut rng)).unwrap();
        let hull = m.support_intervals().hull();
        for i in 0..10_000 {
            let x = -hull + 2.0 * hull * (i as f64 + 0.5) / 10_000.0;
            if let Ok(v) = m.limit_density(x) {
                assert!(v >= -1e-12, "theta={theta} x={x} v={v}");
            }
        }
    }
}

#[test]
fn trivial_phases_reduce_to_rotation_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let theta = random_theta(&mut rng);
        let spin = random_spin(&mut rng);
        let rot = LimitModel::rotation(theta, spin).unwrap();
        let gen = LimitModel::new(CoinOperator::general(0.0, 0.0, 0.0, theta).unwrap(), spin)
            .unwrap();
        let hull = rot.support_intervals().hull();
        for i in 0..1000 {
            let x = -hull + 2.0 * hull * (i as f64 + 0.5) / 1000.0;
            match (rot.limit_density(x), gen.limit_density(x)) {
                (Ok(a), Ok(b)) => assert!((a - b).abs() <= 1e-13, "{a} {b}"),
                (a, b) => assert_eq!(a.is_ok(), b.is_ok()),
            }
        }
    }
}

#[test]
fn general_coin_density_is_phase_covariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let (g, d, xi) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
        let theta = random_theta(&mut rng);
        let spin = random_spin(&mut rng);
        let gen = LimitModel::new(CoinOperator::general(g, d, xi, theta).unwrap(), spin).unwrap();
        let shifted = InitialSpin::new(
            spin.alpha() * Complex::from_polar(1.0, xi),
            spin.beta() * Complex::from_polar(1.0, -xi),
        )
        .unwrap();
        let rot = LimitModel::rotation(theta, shifted).unwrap();
        let hull = rot.support_intervals().hull();
        for i in 0..500 {
            let x = -hull + 2.0 * hull * (i as f64 + 0.5) / 500.0;
            if let (Ok(a), Ok(b)) = (gen.limit_density(x), rot.limit_density(x)) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} {b}");
            }
        }
    }
}

#[test]
fn general_coin_walk_converges_to_its_limit_law() {
    let coin = CoinOperator::general(0.7, -0.4, 1.1, 1.0).unwrap();
    let spin = InitialSpin::new(Complex::new(0.8, 0.0), Complex::new(0.0, 0.6)).unwrap();
    let model = LimitModel::new(coin, spin).unwrap();
    let law = LimitLaw::new(model);
    let report = compare(&law, 999, 2).unwrap();
    assert!(report.ks_distance <= 0.05, "{}", report.ks_distance);
    assert!(report.moment_errors[1].1 <= 5e-3);
    // Without the phase adjustment the law would be visibly different.
    let naive = LimitLaw::new(LimitModel::rotation(1.0, spin).unwrap());
    let dist = distribution(&evolve(&spin, &model.protocol().unwrap(), 999));
    let naive_ks = ks_distance(&dist, 999.0, &naive).unwrap();
    assert!(naive_ks > report.ks_distance);
}

#[test]
fn kspace_moments_match_density_moments() {
    for theta in [PI / 4.0, 2.0 * PI / 5.0] {
        for spin in [InitialSpin::symmetric(), spin_up()] {
            let m = LimitModel::rotation(theta, spin).unwrap();
            assert!((m.kspace_moment(0).unwrap() - 1.0).abs() < 1e-10);
            for r in 1..=4 {
                let (k_moment, err) = m.kspace_moment_with_error(r, 1 << 16).unwrap();
                assert!(err <= 1e-8, "r={r} err={err}");
                let x_moment = m.weighted_density_integral(-1.0, 1.0, 1 << 14, |x| x.powi(r as i32));
                assert!((k_moment - x_moment).abs() <= 1e-6, "r={r} {k_moment} {x_moment}");
            }
        }
    }
    let m = LimitModel::rotation(PI / 4.0, InitialSpin::symmetric()).unwrap();
    assert!(m.kspace_moment(1).unwrap().abs() <= 1e-8);
}

#[test]
fn cdf_agrees_with_density_quadrature() {
    let h = FRAC_1_SQRT_2;
    let spins = [
        InitialSpin::symmetric(),
        spin_up(),
        InitialSpin::new(Complex::new(h, 0.0), Complex::new(-h, 0.0)).unwrap(),
    ];
    for theta in [PI / 4.0, 2.0 * PI / 5.0, PI / 5.0] {
        for spin in spins {
            let m = LimitModel::rotation(theta, spin).unwrap();
            let law = LimitLaw::new(m);
            assert!((law.total_mass() - 1.0).abs() < 1e-8);
            let ends = m.support_intervals().endpoints();
            for i in 0..40 {
                let x = -0.95 + 1.9 * i as f64 / 39.0;
                if ends.iter().any(|e| (x - e).abs() < 0.02) {
                    continue;
                }
                let quad = m.density_integral(-1.0, x, 1 << 15);
                assert!((law.cdf(x) - quad).abs() <= 1e-6, "theta={theta} x={x}");
            }
        }
    }
}
