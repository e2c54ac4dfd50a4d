//! Potential, centrifugal barrier and Hamiltonian assembly.
//!
//! The radial equation is solved in the form
//! `[-½ d²/dr² + l(l+1)/(2r²) + V(r)/2] ψ = E ψ`, so the matrix eigenvalues
//! are `E`. Every reporting layer prints `2E`.

use nalgebra::DMatrix;

use crate::differentiation::CollocationOperator;
use crate::error::{Error, Result};
use crate::lgl_grid::LglGrid;
use crate::mapping::MappingSpec;

/// Couplings of `V(r) = r² + λ r² / (1 + g r²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    g: f64,
    lambda: f64,
}

impl PotentialParams {
    pub fn new(g: f64, lambda: f64) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::Coupling(g));
        }
        if !lambda.is_finite() {
            return Err(Error::Mapping(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        Ok(Self { g, lambda })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

pub fn potential_npo(r: f64, params: &PotentialParams) -> f64 {
    let r2 = r * r;
    r2 + params.lambda * r2 / (1.0 + params.g * r2)
}

pub fn centrifugal(r: f64, l: usize) -> f64 {
    let l = l as f64;
    l * (l + 1.0) / (2.0 * r * r)
}

/// One angular-momentum channel of the oscillator on a given grid.
#[derive(Debug, Clone)]
pub struct RadialProblem {
    pub params: PotentialParams,
    pub l: usize,
    pub grid: LglGrid,
    pub mapping: MappingSpec,
}

impl RadialProblem {
    pub fn new(params: PotentialParams, l: usize, grid: LglGrid, mapping: MappingSpec) -> Self {
        Self {
            params,
            l,
            grid,
            mapping,
        }
    }

    /// Builds a problem on the grid and mapping of an existing operator.
    pub fn on(op: &CollocationOperator, params: PotentialParams, l: usize) -> Self {
        Self::new(params, l, op.grid().clone(), *op.mapping())
    }
}

/// `V(r_j)/2 + l(l+1)/(2 r_j²)` over the interior nodes.
pub fn effective_diagonal(problem: &RadialProblem) -> Result<Vec<f64>> {
    problem
        .grid
        .interior_nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let r = problem.mapping.r(x);
            if r.is_nan() || r <= 0.0 {
                return Err(Error::ZeroRadius { index: i + 1, r });
            }
            Ok(0.5 * potential_npo(r, &problem.params) + centrifugal(r, problem.l))
        })
        .collect()
}

/// Kinetic matrix plus the effective potential on the diagonal.
pub fn assemble(problem: &RadialProblem, op: &CollocationOperator) -> Result<DMatrix<f64>> {
    if problem.grid.order() != op.grid().order() {
        return Err(Error::Dimension {
            operator: op.dim(),
            problem: problem.grid.interior_len(),
        });
    }
    if problem.mapping != *op.mapping() {
        return Err(Error::Mapping(
            "problem and operator were built with different mappings".into(),
        ));
    }
    let diag = effective_diagonal(problem)?;
    let mut h = op.kinetic().clone();
    for (i, v) in diag.into_iter().enumerate() {
        h[(i, i)] += v;
    }
    Ok(h)
}
