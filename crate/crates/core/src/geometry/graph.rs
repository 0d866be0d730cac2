//! Minimal-graph residual `Delta w - Xi(w)` with
//! `Xi(w) = D^2 w(grad w, grad w) / (1 + |grad w|^2)`.

/// Residual at a point from the full gradient and Hessian (row-major n x n).
pub fn vertical_graph_residual(grad: &[f64], hess: &[f64]) -> f64 {
    let n = grad.len();
    debug_assert_eq!(hess.len(), n * n);
    let lap: f64 = (0..n).map(|i| hess[i * n + i]).sum();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += hess[i * n + j] * grad[i] * grad[j];
        }
    }
    let g2: f64 = grad.iter().map(|g| g * g).sum();
    lap - quad / (1.0 + g2)
}

/// Same residual for a function of `(x1, r)` with `r = |(x2, .., xn)|`.
/// Derivatives are `(w1, wr, w11, w1r, wrr)`.
pub fn axisymmetric_graph_residual(n: usize, r: f64, d: [f64; 5]) -> f64 {
    let [_, wr, w11, _, wrr] = d;
    let lap = w11 + wrr + (n as f64 - 2.0) * wr / r;
    lap - xi(d)
}

/// `Xi` for an axisymmetric function (depends only on the meridian derivatives).
pub fn xi(d: [f64; 5]) -> f64 {
    let [w1, wr, w11, w1r, wrr] = d;
    (w11 * w1 * w1 + 2.0 * w1r * w1 * wr + wrr * wr * wr) / (1.0 + w1 * w1 + wr * wr)
}
