//! Four-point Lagrange interpolation on uniform grids.

/// Stencil start index and weights for evaluating a uniform-grid function at
/// `x`. The grid is `x0 + i * dx` for `i in 0..n`, with `n >= 4`.
///
/// The stencil is centred on the cell containing `x` and shifted inwards near
/// the ends, so the result is exact for cubics everywhere inside the grid.
pub fn lagrange4_weights(x0: f64, dx: f64, n: usize, x: f64) -> (usize, [f64; 4]) {
    debug_assert!(n >= 4);
    let s = (x - x0) / dx;
    let cell = s.floor();
    let mut start = cell as isize - 1;
    start = start.clamp(0, n as isize - 4);
    let start = start as usize;
    let t = s - start as f64;
    // nodes at t = 0, 1, 2, 3
    let w0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    let w1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let w2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    let w3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    (start, [w0, w1, w2, w3])
}

/// Applies precomputed weights to `values`.
#[inline]
pub fn apply4(values: &[f64], start: usize, w: &[f64; 4]) -> f64 {
    w[0] * values[start]
        + w[1] * values[start + 1]
        + w[2] * values[start + 2]
        + w[3] * values[start + 3]
}

/// Interpolates a uniform-grid function at `x`.
pub fn lagrange4(x0: f64, dx: f64, values: &[f64], x: f64) -> f64 {
    let (start, w) = lagrange4_weights(x0, dx, values.len(), x);
    apply4(values, start, &w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn cubics_are_reproduced(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64,
                                 d in -3.0..3.0f64, x in -2.0..2.0f64) {
            let f = |x: f64| a + b * x + c * x * x + d * x * x * x;
            let x0 = -2.0;
            let dx = 0.1;
            let vals: Vec<f64> = (0..41).map(|i| f(x0 + i as f64 * dx)).collect();
            prop_assert!((lagrange4(x0, dx, &vals, x) - f(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn nodes_are_interpolated_exactly() {
        let vals: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(lagrange4(0.0, 1.0, &vals, i as f64), *v);
        }
    }
}
