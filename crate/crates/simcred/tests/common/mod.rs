//! Shared oracles and helpers for the integration suites.
#![allow(dead_code)]

/// Lanczos log-gamma (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, &g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Chi-square quantile by numeric integration (Simpson on the substituted
/// density, smooth for every dof >= 1) inverted by bisection. Independent
/// of the library's Wilson-Hilferty implementation.
pub fn chi_square_quantile_oracle(dof: usize, p: f64) -> f64 {
    let d = dof as f64;
    let log_norm = -(d / 2.0) * std::f64::consts::LN_2 - ln_gamma(d / 2.0);
    let integrand = |u: f64| {
        if u <= 0.0 {
            if dof == 1 {
                2.0 * log_norm.exp()
            } else {
                0.0
            }
        } else {
            (log_norm + (d - 1.0) * u.ln() - u * u / 2.0).exp() * 2.0
        }
    };
    let cdf = |x: f64| {
        let upper = x.sqrt();
        let n = 20_000;
        let h = upper / n as f64;
        let mut sum = integrand(0.0) + integrand(upper);
        for i in 1..n {
            sum += integrand(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum * h / 3.0
    };
    let (mut lo, mut hi) = (0.0, d + 200.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_simcred")
}
