//! Legendre polynomials and the Legendre–Gauss–Lobatto (LGL) grid.
//!
//! The grid of order `N` has `N + 1` nodes: the endpoints `±1` and the
//! `N - 1` roots of `P'_N`. The quadrature weights `2 / (N(N+1) P_N(x_j)^2)`
//! integrate polynomials of degree `≤ 2N - 1` exactly.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const NEWTON_MAX_STEPS: usize = 100;
const NEWTON_STEP_TOL: f64 = 1e-15;

/// Evaluates `(P_N(x), P'_N(x))` with the three-term recurrence.
///
/// The derivative uses `P'_{k+1} = P'_{k-1} + (2k+1) P_k`, which stays exact
/// at the endpoints where the `1 / (1 - x^2)` form breaks down.
pub fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// `P''_N` at an interior point from the Legendre equation
/// `(1 - x^2) P'' = 2x P' - N(N+1) P`.
fn legendre_second_derivative(n: usize, x: f64, p: f64, dp: f64) -> f64 {
    let nn = (n * (n + 1)) as f64;
    (2.0 * x * dp - nn * p) / (1.0 - x * x)
}

/// Nodes, weights and `P_N(x_j)` of an LGL grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LglGrid {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pn_at_nodes: Vec<f64>,
}

impl LglGrid {
    /// Builds the grid of order `n` (`n + 1` nodes).
    pub fn new(n: usize) -> Result<Self> {
        lgl_nodes(n)
    }

    /// Polynomial order `N`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// All `N + 1` nodes in ascending order, endpoints included.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pn_at_nodes(&self) -> &[f64] {
        &self.pn_at_nodes
    }

    /// Number of interior nodes, `N - 1`.
    pub fn interior_len(&self) -> usize {
        self.order - 1
    }

    /// Interior nodes `x_1 .. x_{N-1}`.
    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[1..self.order]
    }

    /// Applies the LGL quadrature rule to `f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Evaluates the interpolant through `(x_j, values[j])` at `x` using the
    /// barycentric form of the cardinal functions. For LGL nodes the
    /// barycentric weights are proportional to `1 / P_N(x_j)`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        assert_eq!(values.len(), self.nodes.len(), "one value per node");
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &pj), &fj) in self.nodes.iter().zip(&self.pn_at_nodes).zip(values) {
            let dx = x - xj;
            if dx == 0.0 {
                return fj;
            }
            let t = 1.0 / (pj * dx);
            num += t * fj;
            den += t;
        }
        num / den
    }
}

/// Computes the LGL grid of order `n`.
///
/// Interior nodes are Newton-polished roots of `P'_N` started from the
/// Chebyshev–Gauss–Lobatto points. Only the left half is iterated; the right
/// half is mirrored so that `x_j = -x_{N-j}` holds exactly.
pub fn lgl_nodes(n: usize) -> Result<LglGrid> {
    if n < 2 {
        return Err(Error::GridOrder(n));
    }
    let mut nodes = vec![0.0; n + 1];
    nodes[0] = -1.0;
    nodes[n] = 1.0;

    for j in 1..=n / 2 {
        let mirror = n - j;
        if j == mirror {
            // Middle node of an even-order grid: P'_N is odd, so the root is 0.
            nodes[j] = 0.0;
            continue;
        }
        let mut x = -(PI * j as f64 / n as f64).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_STEPS {
            let (p, dp) = legendre_eval(n, x);
            let step = dp / legendre_second_derivative(n, x, p, dp);
            x -= step;
            if step.abs() < NEWTON_STEP_TOL {
                converged = true;
                break;
            }
        }
        if !converged || !(x > -1.0 && x < 0.0) {
            return Err(Error::NodeConvergence { index: j, order: n });
        }
        nodes[j] = x;
        nodes[mirror] = -x;
    }

    let nn = (n * (n + 1)) as f64;
    let pn_at_nodes: Vec<f64> = nodes.iter().map(|&x| legendre_eval(n, x).0).collect();
    let weights = pn_at_nodes.iter().map(|p| 2.0 / (nn * p * p)).collect();

    Ok(LglGrid {
        order: n,
        nodes,
        weights,
        pn_at_nodes,
    })
}
