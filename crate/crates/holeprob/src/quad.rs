//! Gauss-Legendre rules on [0, 1].

use std::sync::OnceLock;

const MAX_ORDER: usize = 48;

static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();

fn build(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { t } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (t * p - pm) / (t * t - 1.0);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Nodes and weights of the `n`-point rule on [0, 1]; weights sum to 1.
pub fn gauss(n: usize) -> (&'static [f64], &'static [f64]) {
    assert!((1..=MAX_ORDER).contains(&n), "gauss order {n} unsupported");
    let rules = RULES.get_or_init(|| (1..=MAX_ORDER).map(build).collect());
    let (x, w) = &rules[n - 1];
    (x, w)
}
