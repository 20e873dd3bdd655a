mod common;

use fxscale_core::laws::{
    fit_law_samples, law_over_times, max_range, mean_abs_return, LogGrid, Moment, MIN_FIT_WINDOWS,
};
use fxscale_core::{grw, GrwConfig, LawId, PriceDefinition, PricePath};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Price of the last tick at or before `t`, by linear scan.
fn quote_at(path: &PricePath, t: f64) -> f64 {
    let mut x = path.prices[0];
    for (&s, &p) in path.times.iter().zip(&path.prices) {
        if s <= t {
            x = p;
        }
    }
    x
}

fn p_mean(values: &[f64], moment: Moment) -> f64 {
    match moment {
        Moment::P1 => values.iter().sum::<f64>() / values.len() as f64,
        Moment::P2 => (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt(),
    }
}

#[test]
fn window_laws_match_scan_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let path = common::random_path(&mut rng, 300);
        if path.span_seconds() <= 0.0 {
            continue;
        }
        let dt = path.span_seconds() * rng.gen_range(0.02..1.0);
        let windows = (path.span_seconds() / dt).floor() as usize;
        let t0 = path.times[0];
        let def = path.price_def;
        let returns: Vec<f64> = (1..=windows)
            .map(|k| def.change(quote_at(&path, t0 + (k - 1) as f64 * dt), quote_at(&path, t0 + k as f64 * dt)).abs())
            .collect();
        let ranges: Vec<f64> = (0..windows)
            .map(|k| {
                let (start, end) = (t0 + k as f64 * dt, t0 + (k + 1) as f64 * dt);
                let open = quote_at(&path, start);
                let inside =
                    path.times.iter().zip(&path.prices).filter(|(&t, _)| t > start && t <= end).map(|(_, &x)| x);
                let hi = inside.clone().fold(open, f64::max);
                let lo = inside.fold(open, f64::min);
                def.change(open, open + (hi - lo))
            })
            .collect();
        for moment in [Moment::P1, Moment::P2] {
            let r = mean_abs_return(&path, dt, moment).unwrap();
            let m = max_range(&path, dt, moment).unwrap();
            assert_eq!(r.count as usize, windows);
            assert!((r.value - p_mean(&returns, moment)).abs() <= 1e-12 * r.value.max(1e-300));
            assert!((m.value - p_mean(&ranges, moment)).abs() <= 1e-12 * m.value.max(1e-300));
        }
    }
}

#[test]
fn ten_sample_toy_series() {
    let prices = [1.0, 1.01, 0.99, 1.0, 1.02, 1.02, 1.0, 0.98, 0.99, 1.0];
    let path = PricePath::from_price_slice(&prices);
    let expected = prices.windows(2).map(|w| ((w[1] - w[0]) / w[0]).abs()).sum::<f64>() / 9.0;
    let got = mean_abs_return(&path, 1.0, Moment::P1).unwrap();
    assert_eq!(got.count, 9);
    assert!((got.value - expected).abs() < 1e-15);
}

#[test]
fn intervals_beyond_the_span_leave_empty_samples() {
    let path = PricePath::from_price_slice(&[1.0, 1.1, 1.2]);
    let samples =
        law_over_times(&path, LawId::MeanReturn(Moment::P1), &LogGrid::from_points(vec![1.0, 2.0, 3.0])).unwrap();
    assert_eq!(samples.iter().map(|s| s.count).collect::<Vec<_>>(), vec![2, 1, 0]);
}

#[test]
fn sparse_windows_stay_out_of_fits() {
    let times: Vec<f64> = (0..=1000).map(f64::from).collect();
    let prices = times.iter().map(|t| 1.0 + 1e-4 * t.sin()).collect();
    let path = PricePath::from_prices(times, prices, PriceDefinition::ArithmeticMid);
    let grid = LogGrid::new(2.0, 0.2, 30);
    let samples = law_over_times(&path, LawId::MaxRange(Moment::P1), &grid).unwrap();
    let usable = samples.iter().filter(|s| s.count >= MIN_FIT_WINDOWS && s.value > 0.0).count();
    assert!(usable < samples.iter().filter(|s| s.count > 0).count());
    let fit = fit_law_samples(LawId::MaxRange(Moment::P1), &samples, None).unwrap();
    assert_eq!(fit.n_points, usable);
}

#[test]
fn grw_increments_have_the_configured_law() {
    let config = GrwConfig { n_ticks: 200_001, ..GrwConfig::with_seed(11) };
    let series = grw::generate(&config).unwrap();
    let x = series.prices();
    assert_eq!(x[0], config.x0);
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let n = dx.len() as f64;
    let mean = dx.iter().sum::<f64>() / n;
    let var = dx.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // five standard errors of the sample mean and variance
    assert!(mean.abs() < 5.0 * config.sigma / n.sqrt());
    let var_se = config.sigma.powi(2) * (2.0 / (n - 1.0)).sqrt();
    assert!((var - config.sigma.powi(2)).abs() < 5.0 * var_se);
}
