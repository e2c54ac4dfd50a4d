//! The acceptance criteria as executable checks.
//!
//! Each check returns an [`Outcome`]; corpus-driven checks also list the
//! entries that missed their tolerance, so a caller can tell a regression
//! from a known misprint in the reference values.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{validate, ReferenceEntry, Table, ValidationReport};
use crate::config::SolverConfig;
use crate::density::reconstruct_wavefunction;
use crate::eigensolver::{bisection_eigenvalues, eigh_symmetric, symmetry_defect};
use crate::error::Result;
use crate::hamiltonian::PotentialParams;
use crate::spectrum::{enumerate_shell, Solver, StateLabel};

pub const HARMONIC_TOL: f64 = 1e-10;
pub const SYMMETRY_DEFECT_TOL: f64 = 1e-13;
pub const ORTHONORMALITY_TOL: f64 = 1e-10;
pub const NORM_DEFECT_TOL: f64 = 1e-10;
pub const REFINEMENT_TOL: f64 = 1e-11;
pub const REFINED_ORDER: usize = 240;
pub const ORACLE_TOL: f64 = 1e-12;
/// Splittings at `g = 1000, λ = -100` must fall below this.
pub const LARGE_G_SPLITTING: f64 = 2e-4;

/// The four coupling pairs printed in full.
pub const TABLE_IV_SETS: [(f64, f64); 4] =
    [(1000.0, 0.1), (10.0, 1000.0), (0.1, -1.0), (1.0, -100.0)];

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Everything in the criterion other than the per-entry comparisons.
    pub checks_passed: bool,
    pub failed_entries: Vec<ReferenceEntry>,
}

impl Outcome {
    fn new(id: u8, title: &'static str, passed: bool, detail: String) -> Self {
        Self {
            id,
            title,
            passed,
            detail,
            checks_passed: passed,
            failed_entries: Vec::new(),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {} {}: {} ({})",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail
        )
    }
}

fn table_outcome(report: &ValidationReport, table: Table, id: u8, title: &'static str) -> Outcome {
    let rows: Vec<_> = report.rows_for(table).collect();
    let failed: Vec<ReferenceEntry> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.entry.clone())
        .collect();
    let worst = rows
        .iter()
        .map(|r| r.abs_diff / r.entry.tolerance())
        .fold(0.0f64, f64::max);
    let mut detail = format!(
        "{} of {} entries within tolerance, worst diff/tol {:.2e}",
        rows.len() - failed.len(),
        rows.len(),
        worst
    );
    for e in &failed {
        let row = rows.iter().find(|r| &r.entry == e).expect("row");
        detail.push_str(&format!(
            "; miss g={} lambda={} nr={} l={} ref={} got={:.12}",
            e.g, e.lambda, e.nr, e.l, e.value, row.computed
        ));
    }
    let complete = rows.len() == table.expected_count();
    Outcome {
        id,
        title,
        passed: complete && failed.is_empty(),
        detail,
        checks_passed: complete,
        failed_entries: failed,
    }
}

/// Criterion 1: Table I exact cases to 1e-9 absolute.
pub fn exact_cases(report: &ValidationReport) -> Outcome {
    table_outcome(report, Table::I, 1, "exact-case suite")
}

/// Criterion 2: `λ = 0` reproduces `4n_r + 2l + 3` for `n ≤ 9` and for `l = 10, 20`.
pub fn harmonic_limit(config: &SolverConfig) -> Result<Outcome> {
    let solver = Solver::new(*config)?;
    let params = PotentialParams::new(1.0, 0.0)?;
    let mut states: Vec<StateLabel> = (0..=9).flat_map(enumerate_shell).collect();
    for l in [10, 20] {
        states.extend((0..5).map(|n_r| StateLabel::new(n_r, l)));
    }
    let levels = solver.levels_for_states(params, &states)?;
    let worst = states
        .iter()
        .map(|s| {
            let exact = (4 * s.n_r + 2 * s.l + 3) as f64;
            (levels.get(*s).unwrap_or(f64::NAN) - exact).abs()
        })
        .fold(
            0.0f64,
            |m, d| if d.is_nan() { f64::INFINITY } else { m.max(d) },
        );
    Ok(Outcome::new(
        2,
        "harmonic limit",
        worst < HARMONIC_TOL,
        format!("{} states, max |2E - exact| {:.2e}", states.len(), worst),
    ))
}

/// Criterion 3: Table II to 1e-8 relative.
pub fn table_ii(report: &ValidationReport) -> Outcome {
    table_outcome(report, Table::II, 3, "Table II regression")
}

/// Criterion 4: Table III, large box, to 1e-8 relative.
pub fn table_iii(report: &ValidationReport) -> Outcome {
    table_outcome(report, Table::III, 4, "Table III high-state regression")
}

/// Criterion 5: Table IV to 1e-8 relative.
pub fn table_iv(report: &ValidationReport) -> Outcome {
    table_outcome(report, Table::IV, 5, "Table IV regression")
}

/// Twelve splittings of shells 2..=7 at each coupling pair.
fn splitting_rows(solver: &Solver, pairs: &[(f64, f64)]) -> Result<Vec<Vec<f64>>> {
    pairs
        .par_iter()
        .map(|&(g, lambda)| {
            let levels = solver.levels(PotentialParams::new(g, lambda)?, 7)?;
            let mut row = Vec::new();
            for n in 2..=7 {
                row.extend(levels.splittings(n)?.into_iter().map(|r| r.delta));
            }
            Ok(row)
        })
        .collect()
}

/// Criterion 6: Table V to 2e-6 absolute, plus the λ and g trends of the splittings.
pub fn splittings(report: &ValidationReport, config: &SolverConfig) -> Result<Outcome> {
    let mut out = table_outcome(report, Table::V, 6, "Table V splittings and trends");
    let solver = Solver::new(*config)?;

    let by_lambda = splitting_rows(
        &solver,
        &[(0.1, -0.1), (0.1, -1.0), (0.1, -10.0), (0.1, -100.0)],
    )?;
    let by_g = splitting_rows(
        &solver,
        &[
            (0.1, -100.0),
            (1.0, -100.0),
            (10.0, -100.0),
            (100.0, -100.0),
            (1000.0, -100.0),
        ],
    )?;
    let count = by_lambda[0].len();
    let lambda_ok = (0..count).all(|k| by_lambda.windows(2).all(|w| w[1][k] > w[0][k]));
    let g_ok = (0..count).all(|k| by_g.windows(2).all(|w| w[1][k] < w[0][k]));
    let largest_at_big_g = by_g
        .last()
        .map_or(f64::NAN, |r| r.iter().copied().fold(0.0, f64::max));
    let vanish_ok = largest_at_big_g < LARGE_G_SPLITTING;

    out.detail.push_str(&format!(
        "; increasing in |lambda| at g=0.1: {lambda_ok}; decreasing in g at lambda=-100: {g_ok}; \
         largest at g=1000 {largest_at_big_g:.2e}"
    ));
    let trends_ok = count == 12 && lambda_ok && g_ok && vanish_ok;
    out.passed &= trends_ok;
    out.checks_passed &= trends_ok;
    Ok(out)
}

/// Criterion 7: Ordering signatures: mirror images at `(0.1, 0.1)` and `(0.1, -1)`
/// plus the `3s < 2d < 1g` violation at `(10, 1000)`.
pub fn orderings(report: &ValidationReport, config: &SolverConfig) -> Result<Outcome> {
    let solver = Solver::new(*config)?;
    let positive = solver.levels(PotentialParams::new(0.1, 0.1)?, 9)?;
    let negative = solver.levels(PotentialParams::new(0.1, -1.0)?, 9)?;
    let mut notes = Vec::new();

    let sig_pos = positive.ordering(9)?.to_string();
    let sig_neg = negative.ordering(9)?.to_string();
    let n9_ok = sig_pos == "5p<4f<3h<2j<1l" && sig_neg == "1l<2j<3h<4f<5p";
    notes.push(format!("n=9: {sig_pos} vs {sig_neg}"));

    let mut mirror_ok = true;
    for n in 0..=9 {
        let a = positive.ordering(n)?;
        let b = negative.ordering(n)?;
        let mut reversed = b.labels();
        reversed.reverse();
        if a.has_ties() || b.has_ties() || a.labels() != reversed {
            mirror_ok = false;
            notes.push(format!("n={n} not mirrored: {a} vs {b}"));
        }
    }

    let violation = solver.levels(PotentialParams::new(10.0, 1000.0)?, 4)?;
    let order = violation.ordering(4)?;
    let labels = order.labels();
    let pos = |s: StateLabel| labels.iter().position(|&x| x == s);
    let (s3, d2, g1) = (
        StateLabel::new(2, 0),
        StateLabel::new(1, 2),
        StateLabel::new(0, 4),
    );
    let violation_ok =
        matches!((pos(s3), pos(d2), pos(g1)), (Some(a), Some(b), Some(c)) if a < b && b < c);
    let table_rows: Vec<_> = report
        .rows_for(Table::IV)
        .filter(|r| r.entry.g == 10.0 && r.entry.lambda == 1000.0)
        .filter(|r| [s3, d2, g1].contains(&StateLabel::new(r.entry.nr, r.entry.l)))
        .collect();
    let values_ok = table_rows.len() == 3 && table_rows.iter().all(|r| r.pass);
    notes.push(format!("(10,1000) n=4: {order}"));

    Ok(Outcome::new(
        7,
        "ordering properties",
        n9_ok && mirror_ok && violation_ok && values_ok,
        notes.join("; "),
    ))
}

/// Orthonormality defect, node-count complaints, worst norm defect and the
/// number of states checked in one channel.
type ChannelCheck = (f64, Vec<String>, f64, usize);

/// Criterion 8: Structural properties of the discretization and its eigenvectors.
pub fn property_suite(corpus: &[ReferenceEntry], config: &SolverConfig) -> Result<Outcome> {
    let mut notes = Vec::new();
    let mut ok = true;

    // Kinetic symmetry for every box size in use.
    let mut boxes: Vec<f64> = corpus.iter().map(|e| e.r_max).collect();
    boxes.push(config.r_max);
    boxes.sort_by(f64::total_cmp);
    boxes.dedup();
    let mut solvers = BTreeMap::new();
    let mut defect = 0.0f64;
    for &r_max in &boxes {
        let solver = Solver::new(config.with_r_max(r_max))?;
        defect = defect.max(symmetry_defect(solver.operator().kinetic()));
        solvers.insert(r_max.to_bits(), solver);
    }
    ok &= defect < SYMMETRY_DEFECT_TOL;
    notes.push(format!("kinetic symmetry defect {defect:.1e}"));

    // Orthonormality, node counts and normalization per channel.
    let mut channels: BTreeMap<(u64, u64, u64, usize), Vec<usize>> = BTreeMap::new();
    for e in corpus {
        let states = match (e.state(), e.splitting_states()) {
            (Some(s), _) => vec![s],
            (None, Some((u, d))) => vec![u, d],
            _ => Vec::new(),
        };
        for s in states {
            channels
                .entry((e.r_max.to_bits(), e.g.to_bits(), e.lambda.to_bits(), s.l))
                .or_default()
                .push(s.n_r);
        }
    }
    let jobs: Vec<_> = channels.into_iter().collect();
    let checked: Vec<Result<ChannelCheck>> = jobs
        .par_iter()
        .map(|((r_max, g, lambda, l), n_rs)| {
            let solver = &solvers[r_max];
            let params = PotentialParams::new(f64::from_bits(*g), f64::from_bits(*lambda))?;
            let sol = solver.solve_channel(params, *l)?;
            let v = sol.vectors();
            let ortho = (v.transpose() * v - DMatrix::identity(v.ncols(), v.ncols())).amax();
            let mut bad_nodes = Vec::new();
            let mut norm = 0.0f64;
            let mut n_rs = n_rs.clone();
            n_rs.sort_unstable();
            n_rs.dedup();
            for &n_r in &n_rs {
                let wf = reconstruct_wavefunction(solver.operator(), &sol, n_r)?;
                if wf.node_count() != n_r {
                    bad_nodes.push(format!(
                        "g={} lambda={} {} has {} nodes",
                        params.g(),
                        params.lambda(),
                        StateLabel::new(n_r, *l),
                        wf.node_count()
                    ));
                }
                norm = norm.max(wf.norm_defect);
            }
            Ok((ortho, bad_nodes, norm, n_rs.len()))
        })
        .collect();
    let (mut ortho, mut norm, mut states) = (0.0f64, 0.0f64, 0usize);
    let mut bad_nodes = Vec::new();
    for c in checked {
        let (o, b, n, s) = c?;
        ortho = ortho.max(o);
        norm = norm.max(n);
        states += s;
        bad_nodes.extend(b);
    }
    ok &= ortho < ORTHONORMALITY_TOL && norm < NORM_DEFECT_TOL && bad_nodes.is_empty();
    notes.push(format!("orthonormality defect {ortho:.1e}"));
    notes.push(format!(
        "{states} validated states, {} node-count mismatches",
        bad_nodes.len()
    ));
    notes.extend(bad_nodes);
    notes.push(format!("normalization defect {norm:.1e}"));

    // Grid refinement on the Table IV sets.
    let coarse = Solver::new(*config)?;
    let fine = Solver::new(config.with_order(REFINED_ORDER))?;
    let mut drift = 0.0f64;
    for (g, lambda) in TABLE_IV_SETS {
        let params = PotentialParams::new(g, lambda)?;
        let a = coarse.levels(params, 9)?;
        let b = fine.levels(params, 9)?;
        for (s, e) in &a.energies {
            drift = drift.max((e - b.get(*s).unwrap_or(f64::NAN)).abs());
        }
    }
    ok &= drift < REFINEMENT_TOL;
    notes.push(format!(
        "max |2E(N={}) - 2E(N={REFINED_ORDER})| {drift:.1e}",
        config.order
    ));

    Ok(Outcome::new(8, "property suite", ok, notes.join("; ")))
}

/// Criterion 9: The tridiagonal QL solver against bisection on the given matrices.
pub fn small_matrix_oracle(matrices: &[DMatrix<f64>]) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for m in matrices {
        let ql = eigh_symmetric(m)?;
        let oracle = bisection_eigenvalues(m);
        for (a, b) in ql.values().iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(Outcome::new(
        9,
        "small-matrix oracle",
        !matrices.is_empty() && worst < ORACLE_TOL,
        format!("{} matrices, max deviation {worst:.1e}", matrices.len()),
    ))
}

/// All nine criteria against `corpus`; `oracle_matrices` feeds criterion 9.
pub fn run_all(
    corpus: &[ReferenceEntry],
    config: &SolverConfig,
    oracle_matrices: &[DMatrix<f64>],
) -> Result<Vec<Outcome>> {
    let report = validate(corpus, config)?;
    Ok(vec![
        exact_cases(&report),
        harmonic_limit(config)?,
        table_ii(&report),
        table_iii(&report),
        table_iv(&report),
        splittings(&report, config)?,
        orderings(&report, config)?,
        property_suite(corpus, config)?,
        small_matrix_oracle(oracle_matrices)?,
    ])
}
