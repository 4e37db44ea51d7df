use crossings::rng::{normal, standard_normal, uniform, uniform_in, StreamKey};

fn kolmogorov_smirnov(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

fn normal_cdf(x: f64) -> f64 {
    // Abramowitz-Stegun 7.1.26 for erf, accurate to 1.5e-7
    let t = 1.0 / (1.0 + 0.3275911 * x.abs() / std::f64::consts::SQRT_2);
    let poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-(x * x) / 2.0).exp();
    0.5 * (1.0 + erf.copysign(x))
}

#[test]
fn normal_mean_and_variance() {
    let n = 1_000_000u64;
    let (mut s, mut s2) = (0.0, 0.0);
    for t in 0..n {
        let x = standard_normal(StreamKey::new(2024, t, 3));
        s += x;
        s2 += x * x;
    }
    let mean = s / n as f64;
    let var = s2 / n as f64 - mean * mean;
    // 5 standard errors
    assert!(mean.abs() < 5.0 / (n as f64).sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt(), "variance {var}");
}

#[test]
fn ks_uniform_and_normal() {
    let n = 100_000u64;
    // critical value at alpha = 0.001 is about 1.95 / sqrt(n)
    let crit = 1.95 / (n as f64).sqrt();
    let us: Vec<f64> = (0..n).map(|t| uniform(StreamKey::new(7, t, 0))).collect();
    assert!(kolmogorov_smirnov(us, |x| x) < crit);
    let zs: Vec<f64> = (0..n).map(|t| standard_normal(StreamKey::new(8, 0, t))).collect();
    assert!(kolmogorov_smirnov(zs, normal_cdf) < crit);
}

#[test]
fn streams_are_pure_functions_of_the_key() {
    let k = StreamKey::new(1, 2, 3);
    assert_eq!(uniform(k), uniform(k));
    assert_ne!(uniform(k), uniform(StreamKey::new(1, 2, 4)));
    assert_ne!(uniform(k), uniform(StreamKey::new(1, 3, 3)));
    assert_ne!(uniform(k), uniform(StreamKey::new(2, 2, 3)));
    assert_eq!(normal(k, 2.0, 0.0), 2.0);
    let x = uniform_in(k, -3.0, 5.0);
    assert!((-3.0..=5.0).contains(&x));
    assert!((normal(k, 1.0, 2.0) - (1.0 + 2.0 * standard_normal(k))).abs() < 1e-15);
}
