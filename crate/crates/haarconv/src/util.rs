//! Small numeric helpers shared by the semigroup checks and test oracles.

/// Composite Simpson quadrature of `f` over `[a, b]` with `n` panels
/// (`n` is rounded up to the next even number).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n.max(2) } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

/// Kolmogorov-Smirnov statistic of a sample against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut worst = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let c = cdf(*x);
        let lo = (c - i as f64 / n).abs();
        let hi = (c - (i as f64 + 1.0) / n).abs();
        worst = worst.max(lo).max(hi);
    }
    worst
}

/// Index of the segment of a nondecreasing CDF grid containing `u`, plus the
/// linearly interpolated abscissa. `grid` and `cdf` have equal length >= 2,
/// `cdf[0] = 0`, `cdf[last] = 1`.
pub fn inverse_cdf_interp(grid: &[f64], cdf: &[f64], u: f64) -> f64 {
    debug_assert_eq!(grid.len(), cdf.len());
    let u = u.clamp(0.0, 1.0);
    let j = cdf.partition_point(|&c| c < u).min(cdf.len() - 1).max(1);
    let (c0, c1) = (cdf[j - 1], cdf[j]);
    let (x0, x1) = (grid[j - 1], grid[j]);
    if c1 <= c0 {
        x1
    } else {
        x0 + (x1 - x0) * (u - c0) / (c1 - c0)
    }
}
