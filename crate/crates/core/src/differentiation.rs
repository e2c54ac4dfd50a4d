//! Collocation derivative matrices on the mapped LGL grid.
//!
//! With the reduced radial function written as `ψ(r(x)) = √r'(x) f(x)`, the
//! algebraic map turns `d²/dr²` into `r'^{-3/2} (d²/dx²) r'^{-1/2}` with no
//! residual mapping potential. Collocating `f / r'` at the interior nodes and
//! rescaling the unknowns by `1 / P_N(x_j)` gives a kinetic matrix that is
//! symmetric entry by entry:
//!
//! ```text
//! K_ii = N(N+1) / (6 r'_i² (1 - x_i²))
//! K_ij = 1 / (r'_i r'_j (x_i - x_j)²)          i ≠ j
//! ```
//!
//! acting on the amplitudes `A_j = √r'_j ψ(r_j) / P_N(x_j)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lgl_grid::LglGrid;
use crate::mapping::MappingSpec;

/// Derivative operators for one `(grid, mapping)` pair.
///
/// Only the potential diagonal depends on `(g, λ, l)`, so one operator can be
/// shared by every Hamiltonian assembled on the same grid.
#[derive(Debug, Clone)]
pub struct CollocationOperator {
    grid: LglGrid,
    mapping: MappingSpec,
    d1: DMatrix<f64>,
    kinetic: DMatrix<f64>,
    radii: Vec<f64>,
    jacobians: Vec<f64>,
}

impl CollocationOperator {
    pub fn new(grid: LglGrid, mapping: MappingSpec) -> Result<Self> {
        let d1 = cardinal_d1(&grid);
        let interior = grid.interior_nodes();
        let radii: Vec<f64> = interior.iter().map(|&x| mapping.r(x)).collect();
        let jacobians: Vec<f64> = interior.iter().map(|&x| mapping.jacobian(x)).collect();
        for (i, (&r, &j)) in radii.iter().zip(&jacobians).enumerate() {
            if r.is_nan() || r <= 0.0 {
                return Err(Error::ZeroRadius { index: i + 1, r });
            }
            if !(j.is_finite() && j > 0.0) {
                return Err(Error::Mapping(format!(
                    "singular Jacobian r'(x) = {j} at interior node {}",
                    i + 1
                )));
            }
        }
        let kinetic = kinetic_matrix(&grid, &jacobians);
        Ok(Self {
            grid,
            mapping,
            d1,
            kinetic,
            radii,
            jacobians,
        })
    }

    pub fn grid(&self) -> &LglGrid {
        &self.grid
    }

    pub fn mapping(&self) -> &MappingSpec {
        &self.mapping
    }

    /// First-derivative matrix `g'_j(x_i)` on all `N + 1` nodes.
    pub fn d1(&self) -> &DMatrix<f64> {
        &self.d1
    }

    /// Symmetric matrix of `-½ d²/dr²` over the interior nodes.
    pub fn kinetic(&self) -> &DMatrix<f64> {
        &self.kinetic
    }

    /// `r(x_j)` at the interior nodes.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `r'(x_j)` at the interior nodes.
    pub fn jacobians(&self) -> &[f64] {
        &self.jacobians
    }

    pub fn dim(&self) -> usize {
        self.radii.len()
    }
}

/// LGL first-derivative matrix: `d1[i][j] = g'_j(x_i)`.
///
/// Off-diagonal entries are `P_N(x_i) / (P_N(x_j) (x_i - x_j))`. Diagonal
/// entries are analytically `-N(N+1)/4`, `0`, ..., `0`, `N(N+1)/4`; they are
/// stored as the negated off-diagonal row sum so that constants are
/// annihilated to rounding.
pub fn cardinal_d1(grid: &LglGrid) -> DMatrix<f64> {
    let n = grid.order();
    let x = grid.nodes();
    let p = grid.pn_at_nodes();
    let mut d1 = DMatrix::from_fn(n + 1, n + 1, |i, j| {
        if i == j {
            0.0
        } else {
            p[i] / (p[j] * (x[i] - x[j]))
        }
    });
    for i in 0..=n {
        let off: f64 = d1.row(i).iter().sum();
        d1[(i, i)] = -off;
    }
    d1
}

fn kinetic_matrix(grid: &LglGrid, jacobians: &[f64]) -> DMatrix<f64> {
    let n = grid.order();
    let x = grid.interior_nodes();
    let m = x.len();
    let nn = (n * (n + 1)) as f64;
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        let ji = jacobians[i];
        k[(i, i)] = nn / (6.0 * ji * ji * (1.0 - x[i] * x[i]));
        for j in 0..i {
            let dx = x[i] - x[j];
            let v = 1.0 / (ji * jacobians[j] * dx * dx);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lgl_grid::lgl_nodes;

    #[test]
    fn d1_differentiates_polynomials() {
        let g = lgl_nodes(8).unwrap();
        let d1 = cardinal_d1(&g);
        let f: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        for i in 0..=8 {
            let df: f64 = (0..=8).map(|j| d1[(i, j)] * f[j]).sum();
            assert!((df - 2.0 * g.nodes()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn d1_rows_annihilate_constants() {
        for n in [2, 8, 50, 200] {
            let d1 = cardinal_d1(&lgl_nodes(n).unwrap());
            for i in 0..=n {
                assert!(d1.row(i).sum().abs() < 1e-11, "N={n} row {i}");
            }
        }
        assert_eq!(cardinal_d1(&lgl_nodes(2).unwrap())[(0, 0)], -1.5);
        for n in [8, 50, 200] {
            let d1 = cardinal_d1(&lgl_nodes(n).unwrap());
            let corner = (n * (n + 1)) as f64 / 4.0;
            assert!((d1[(0, 0)] + corner).abs() < 1e-9 * corner);
            assert!((d1[(n, n)] - corner).abs() < 1e-9 * corner);
            assert!(d1[(n / 2, n / 2)].abs() < 1e-9 * corner);
        }
    }

    #[test]
    fn kinetic_matches_d1_squared() {
        // Collocation second derivative from d1·d1, rescaled to the symmetric
        // amplitudes, must agree with the closed form.
        let n = 40;
        let grid = lgl_nodes(n).unwrap();
        let mapping = MappingSpec::with_scale(25.0, 150.0).unwrap();
        let op = CollocationOperator::new(grid.clone(), mapping).unwrap();
        let d1 = op.d1();
        let d2 = d1 * d1;
        let p = grid.pn_at_nodes();
        let jac = op.jacobians();
        let kin = op.kinetic();
        let scale = kin.amax();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let (a, b) = (i + 1, j + 1);
                let from_d1 = -0.5 * d2[(a, b)] * p[b] / p[a] / (jac[i] * jac[j]);
                assert!(
                    (from_d1 - kin[(i, j)]).abs() < 1e-9 * scale,
                    "({i},{j}): {from_d1} vs {}",
                    kin[(i, j)]
                );
            }
        }
    }

    #[test]
    fn kinetic_is_exactly_symmetric() {
        let op = CollocationOperator::new(
            lgl_nodes(200).unwrap(),
            MappingSpec::with_scale(25.0, 150.0).unwrap(),
        )
        .unwrap();
        let k = op.kinetic();
        assert_eq!(k.nrows(), 199);
        let defect = (k - k.transpose()).amax() / k.amax();
        assert!(defect < 1e-13);
    }
}
