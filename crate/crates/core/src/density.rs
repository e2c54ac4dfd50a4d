//! Normalized radial wavefunctions and radial probability densities.
//!
//! The reduced radial function `ψ = rR` is recovered from a collocation
//! eigenvector through `ψ(r_j) = A_j P_N(x_j) / √r'(x_j)` and normalized with
//! the LGL rule, `Σ_j w_j r'_j ψ_j² = 1`. Off-grid values come from the
//! polynomial interpolant of `ψ / √r'`, which is the function the collocation
//! scheme represents exactly.

use crate::differentiation::CollocationOperator;
use crate::eigensolver::EigenSolution;
use crate::error::{Error, Result};
use crate::hamiltonian::PotentialParams;
use crate::spectrum::StateLabel;

/// Amplitudes below this fraction of the maximum are ignored when counting
/// sign changes.
pub const NODE_THRESHOLD: f64 = 1e-6;

/// `ψ` at the interior collocation nodes.
#[derive(Debug, Clone)]
pub struct Wavefunction {
    pub radii: Vec<f64>,
    pub psi: Vec<f64>,
    /// `|1 - Σ w_j r'_j ψ_j²|` after normalization.
    pub norm_defect: f64,
}

impl Wavefunction {
    /// Interior sign changes, ignoring amplitudes below [`NODE_THRESHOLD`]
    /// of the maximum.
    pub fn node_count(&self) -> usize {
        let max = self.psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut last = 0.0f64;
        let mut count = 0;
        for &v in &self.psi {
            if v.abs() < NODE_THRESHOLD * max {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
        count
    }
}

/// Rebuilds and normalizes `ψ` for eigenpair `k` of `solution`.
///
/// The overall sign makes the first lobe (first amplitude above 1e-6 of the
/// maximum) positive.
pub fn reconstruct_wavefunction(
    op: &CollocationOperator,
    solution: &EigenSolution,
    k: usize,
) -> Result<Wavefunction> {
    if k >= solution.len() {
        return Err(Error::StateIndex {
            n_r: k,
            available: solution.len(),
        });
    }
    let grid = op.grid();
    let pn = &grid.pn_at_nodes()[1..grid.order()];
    let w = &grid.weights()[1..grid.order()];
    let jac = op.jacobians();
    let a = solution.vectors().column(k);

    let mut psi: Vec<f64> = (0..op.dim())
        .map(|j| a[j] * pn[j] / jac[j].sqrt())
        .collect();
    let norm: f64 = (0..op.dim()).map(|j| w[j] * jac[j] * psi[j] * psi[j]).sum();
    let scale = 1.0 / norm.sqrt();
    let max = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let first = psi
        .iter()
        .find(|v| v.abs() > 1e-6 * max)
        .copied()
        .unwrap_or(1.0);
    let sign = if first < 0.0 { -1.0 } else { 1.0 };
    for v in &mut psi {
        *v *= sign * scale;
    }
    let renorm: f64 = (0..op.dim()).map(|j| w[j] * jac[j] * psi[j] * psi[j]).sum();

    Ok(Wavefunction {
        radii: op.radii().to_vec(),
        psi,
        norm_defect: (1.0 - renorm).abs(),
    })
}

/// Fraction of the normalized density with `r > fraction · r_max`.
pub fn outer_weight(op: &CollocationOperator, wf: &Wavefunction, fraction: f64) -> f64 {
    let grid = op.grid();
    let w = &grid.weights()[1..grid.order()];
    let cut = fraction * op.mapping().r_max();
    wf.radii
        .iter()
        .zip(&wf.psi)
        .enumerate()
        .filter(|(_, (r, _))| **r > cut)
        .map(|(j, (_, p))| w[j] * op.jacobians()[j] * p * p)
        .sum()
}

/// Evaluates `ψ(r)` anywhere in the box from the nodal values.
pub fn interpolate_psi(op: &CollocationOperator, wf: &Wavefunction, r: f64) -> Result<f64> {
    let mapping = op.mapping();
    if !(0.0..=mapping.r_max()).contains(&r) {
        return Err(Error::OutsideBox {
            r,
            r_max: mapping.r_max(),
        });
    }
    if r == 0.0 || r == mapping.r_max() {
        return Ok(0.0);
    }
    let mut f = Vec::with_capacity(wf.psi.len() + 2);
    f.push(0.0);
    f.extend(wf.psi.iter().zip(op.jacobians()).map(|(p, j)| p / j.sqrt()));
    f.push(0.0);
    let x = mapping.x_of_r(r).clamp(-1.0, 1.0);
    Ok(op.grid().interpolate(&f, x) * mapping.jacobian(x).sqrt())
}

/// Sampled radial distribution `|rR|² = |ψ|²` of one state.
#[derive(Debug, Clone)]
pub struct RadialDensity {
    pub state: StateLabel,
    pub params: PotentialParams,
    pub samples: Vec<(f64, f64)>,
    pub norm_defect: f64,
}

impl RadialDensity {
    /// Peak position and height, refined by a parabola through the largest
    /// sample and its neighbours.
    pub fn peak(&self) -> Option<(f64, f64)> {
        let (imax, _) = self
            .samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
        if imax == 0 || imax + 1 >= self.samples.len() {
            let (r, d) = self.samples[imax];
            return Some((r, d));
        }
        let (r0, y0) = self.samples[imax - 1];
        let (r1, y1) = self.samples[imax];
        let (r2, y2) = self.samples[imax + 1];
        // Parabola through three points, not necessarily equally spaced.
        let denom = (r0 - r1) * (r0 - r2) * (r1 - r2);
        let a = (r2 * (y1 - y0) + r1 * (y0 - y2) + r0 * (y2 - y1)) / denom;
        let b = (r2 * r2 * (y0 - y1) + r1 * r1 * (y2 - y0) + r0 * r0 * (y1 - y2)) / denom;
        let c = (r1 * r2 * (r1 - r2) * y0 + r2 * r0 * (r2 - r0) * y1 + r0 * r1 * (r0 - r1) * y2)
            / denom;
        if a >= 0.0 {
            return Some((r1, y1));
        }
        let rp = -b / (2.0 * a);
        Some((rp, c - b * b / (4.0 * a)))
    }

    /// CSV with header `r,density`, values in 12-significant-digit
    /// scientific notation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,density\n");
        for (r, d) in &self.samples {
            out.push_str(&format!("{},{}\n", sci12(*r), sci12(*d)));
        }
        out
    }
}

/// 12 significant digits in scientific notation, e.g. `1.23456789012e-3`.
pub fn sci12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Samples `|ψ|²` for eigenpair `k` at the requested radii.
pub fn density_profile(
    op: &CollocationOperator,
    solution: &EigenSolution,
    state: StateLabel,
    params: PotentialParams,
    radii: &[f64],
) -> Result<RadialDensity> {
    let wf = reconstruct_wavefunction(op, solution, state.n_r)?;
    let samples = radii
        .iter()
        .map(|&r| interpolate_psi(op, &wf, r).map(|p| (r, p * p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RadialDensity {
        state,
        params,
        samples,
        norm_defect: wf.norm_defect,
    })
}

/// `count` equally spaced radii from 0 to `r_end` inclusive.
pub fn uniform_radii(r_end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|i| r_end * i as f64 / (count - 1) as f64)
            .collect(),
    }
}
