#![allow(dead_code)]

use num_complex::Complex64;

/// `|g_0(tau)|^2` from the contour oracle below, frozen as regression values.
pub const G0_PINNED: [(f64, f64); 4] = [
    (0.5, 0.7284791861649856),
    (1.0, 0.535773114535827),
    (2.0, 0.3395414650525248),
    (5.0, 0.14342223632455564),
];

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| f64::from(k).ln()).sum()
}

/// Herman-Kluk `g_n(tau)` integrated in plain f64 along a deformed contour:
/// the real segment `[0, n]`, then a ray leaving `n` at angle
/// `atan(n tau) / 2` into the upper half plane, where the quadratic phase
/// turns into decay. Independent of the library's arbitrary-precision
/// Gauss-Kronrod path.
pub fn g_n_contour(n: u32, tau: f64) -> Complex64 {
    if tau < 0.0 {
        return g_n_contour(n, -tau).conj();
    }
    let i = Complex64::i();
    let nf = f64::from(n);
    let c = nf - 0.5;
    let lnf = ln_factorial(n);
    let f = |s: Complex64| -> Complex64 {
        let log_pow = if n == 0 { Complex64::new(0.0, 0.0) } else { nf * s.ln() };
        let expo = -s + log_pow - lnf + i * tau * (0.5 * s * s - c * s);
        expo.exp() * (1.0 - i * tau * s).sqrt()
    };
    let rule = gauss_legendre(32);
    let panel = |a: Complex64, b: Complex64| -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<Complex64>() * half
    };
    let mut total = Complex64::new(0.0, 0.0);
    let seg_panels = (nf * 4.0).ceil() as usize;
    for k in 0..seg_panels {
        let a = nf * k as f64 / seg_panels as f64;
        let b = nf * (k + 1) as f64 / seg_panels as f64;
        total += panel(a.into(), b.into());
    }
    let dir = Complex64::from_polar(1.0, 0.5 * (nf * tau).atan());
    let r_max = 4.0 * nf + 80.0;
    let ray_panels = (r_max / 0.25).ceil() as usize;
    for k in 0..ray_panels {
        let a = Complex64::new(nf, 0.0) + dir * (r_max * k as f64 / ray_panels as f64);
        let b = Complex64::new(nf, 0.0) + dir * (r_max * (k + 1) as f64 / ray_panels as f64);
        total += panel(a, b);
    }
    total
}
