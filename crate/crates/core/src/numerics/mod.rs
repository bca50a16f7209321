//! Numerical building blocks: quadrature, interpolation, tridiagonal
//! eigenproblems, scalar root finding and simple grid utilities.

pub mod interp;
pub mod quad;
pub mod roots;
pub mod tridiag;

/// Composite trapezoid rule for samples on a uniform grid.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dx * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

/// Trapezoid rule applied to the pointwise product of two sampled functions.
pub fn trapezoid_dot(a: &[f64], b: &[f64], dx: f64) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return 0.0;
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dx * (s - 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]))
}

/// Second-order centred first derivative; one-sided second-order stencils at
/// the two ends.
pub fn centered_diff(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return d;
    }
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * dx);
    }
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx);
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dx);
    d
}

/// `n` Chebyshev points of the first kind mapped to `[a, b]`, ascending.
pub fn chebyshev_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..n)
        .rev()
        .map(|k| mid + half * (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos())
        .collect()
}

/// Ordinary least-squares line `y = intercept + slope * x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}
