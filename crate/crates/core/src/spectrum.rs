//! Labeled states, shells `n = 2n_r + l`, splittings, orderings and scans.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::SolverConfig;
use crate::density::{outer_weight, reconstruct_wavefunction};
use crate::differentiation::CollocationOperator;
use crate::eigensolver::{eigh_symmetric, EigenSolution, Provenance};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, PotentialParams, RadialProblem};

const LETTERS: [char; 10] = ['s', 'p', 'd', 'f', 'g', 'h', 'i', 'j', 'k', 'l'];

/// Energies (2E) closer than this are reported as degenerate.
pub const TIE_TOL: f64 = 1e-12;

/// Density fraction in the outer tenth of the box above which a state is
/// flagged as possibly box-limited.
pub const BOX_WARNING_FRACTION: f64 = 1e-8;

/// `(n_r, l)` with shell number `n = 2n_r + l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateLabel {
    pub n_r: usize,
    pub l: usize,
}

impl StateLabel {
    pub const fn new(n_r: usize, l: usize) -> Self {
        Self { n_r, l }
    }

    pub fn n(&self) -> usize {
        2 * self.n_r + self.l
    }

    pub fn name(&self) -> String {
        spectroscopic_label(self.n_r, self.l)
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    /// Parses `"4d"` or `"1[l=12]"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Label(s.to_string());
        let s = s.trim();
        let split = s.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
        let (digits, rest) = s.split_at(split);
        let level: usize = digits.parse().map_err(|_| bad())?;
        if level == 0 {
            return Err(bad());
        }
        let l = if let Some(inner) = rest.strip_prefix("[l=").and_then(|r| r.strip_suffix(']')) {
            inner.parse().map_err(|_| bad())?
        } else {
            let mut chars = rest.chars();
            let c = chars.next().ok_or_else(bad)?;
            if chars.next().is_some() {
                return Err(bad());
            }
            LETTERS
                .iter()
                .position(|&x| x == c.to_ascii_lowercase())
                .ok_or_else(bad)?
        };
        Ok(Self::new(level - 1, l))
    }
}

/// `(n_r + 1)` followed by the letter for `l`; `l > 9` is written `"1[l=12]"`.
pub fn spectroscopic_label(n_r: usize, l: usize) -> String {
    match LETTERS.get(l) {
        Some(c) => format!("{}{}", n_r + 1, c),
        None => format!("{}[l={}]", n_r + 1, l),
    }
}

/// All states of shell `n`, highest `l` first.
pub fn enumerate_shell(n: usize) -> Vec<StateLabel> {
    (0..=n / 2)
        .map(|n_r| StateLabel::new(n_r, n - 2 * n_r))
        .collect()
}

/// Catalogue position of the first splitting of shell `n` (shell 2 is 1).
pub fn first_splitting_index(n: usize) -> usize {
    1 + (2..n).map(|m| m / 2).sum::<usize>()
}

/// Gap between adjacent states of one shell, `2E(upper) - 2E(lower)`, where
/// `upper` has one more radial node than `lower`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingRecord {
    pub index: usize,
    pub upper: StateLabel,
    pub lower: StateLabel,
    pub delta: f64,
    pub params: PotentialParams,
}

/// Shell labels grouped by ascending energy; each group holds degenerate
/// states.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingSignature {
    pub groups: Vec<Vec<StateLabel>>,
}

impl OrderingSignature {
    /// Flattened ascending order.
    pub fn labels(&self) -> Vec<StateLabel> {
        self.groups.iter().flatten().copied().collect()
    }

    pub fn has_ties(&self) -> bool {
        self.groups.iter().any(|g| g.len() > 1)
    }
}

impl fmt::Display for OrderingSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|g| g.iter().map(|s| s.name()).collect::<Vec<_>>().join("="))
            .collect();
        f.write_str(&parts.join("<"))
    }
}

/// One solved state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSolution {
    pub label: StateLabel,
    pub two_e: f64,
    /// Normalized density beyond `0.9 r_max`.
    pub outer_fraction: f64,
    pub node_count: usize,
}

impl StateSolution {
    pub fn box_warning(&self) -> bool {
        self.outer_fraction > BOX_WARNING_FRACTION
    }

    pub fn nodes_consistent(&self) -> bool {
        self.node_count == self.label.n_r
    }
}

/// `2E` for a set of labeled states at one `(g, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    pub params: PotentialParams,
    pub energies: BTreeMap<StateLabel, f64>,
}

impl LevelSet {
    pub fn get(&self, label: StateLabel) -> Option<f64> {
        self.energies.get(&label).copied()
    }

    fn shell(&self, n: usize) -> Result<Vec<(StateLabel, f64)>> {
        enumerate_shell(n)
            .into_iter()
            .map(|s| {
                self.get(s).map(|e| (s, e)).ok_or(Error::StateIndex {
                    n_r: s.n_r,
                    available: 0,
                })
            })
            .collect()
    }

    /// Adjacent gaps of shell `n` in order of increasing `n_r`.
    pub fn splittings(&self, n: usize) -> Result<Vec<SplittingRecord>> {
        let mut states = self.shell(n)?;
        states.sort_by_key(|(s, _)| s.n_r);
        let base = first_splitting_index(n);
        Ok(states
            .windows(2)
            .enumerate()
            .map(|(k, w)| SplittingRecord {
                index: base + k,
                upper: w[1].0,
                lower: w[0].0,
                delta: w[1].1 - w[0].1,
                params: self.params,
            })
            .collect())
    }

    pub fn ordering(&self, n: usize) -> Result<OrderingSignature> {
        let mut states = self.shell(n)?;
        states.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut groups: Vec<Vec<StateLabel>> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for (s, e) in states {
            match groups.last_mut() {
                Some(g) if e - last < TIE_TOL => g.push(s),
                _ => groups.push(vec![s]),
            }
            last = e;
        }
        Ok(OrderingSignature { groups })
    }
}

/// Discretization plus the shared collocation operator.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    op: Arc<CollocationOperator>,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        Ok(Self {
            op: Arc::new(config.operator()?),
            config,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn operator(&self) -> &CollocationOperator {
        &self.op
    }

    /// Full spectrum of the `l` channel.
    pub fn solve_channel(&self, params: PotentialParams, l: usize) -> Result<EigenSolution> {
        let h = assemble(&RadialProblem::on(&self.op, params, l), &self.op)?;
        let mapping = self.op.mapping();
        Ok(eigh_symmetric(&h)?.with_meta(Provenance {
            g: params.g(),
            lambda: params.lambda(),
            l,
            order: self.config.order,
            alpha: mapping.alpha(),
            r_max: mapping.r_max(),
        }))
    }

    /// `2E` of one state, with the box-size and node-count diagnostics.
    pub fn solve_state(&self, params: PotentialParams, label: StateLabel) -> Result<StateSolution> {
        let sol = self.solve_channel(params, label.l)?;
        self.state_from(&sol, label)
    }

    fn state_from(&self, sol: &EigenSolution, label: StateLabel) -> Result<StateSolution> {
        let two_e = sol
            .values()
            .get(label.n_r)
            .map(|e| 2.0 * e)
            .ok_or(Error::StateIndex {
                n_r: label.n_r,
                available: sol.len(),
            })?;
        let wf = reconstruct_wavefunction(&self.op, sol, label.n_r)?;
        Ok(StateSolution {
            label,
            two_e,
            outer_fraction: outer_weight(&self.op, &wf, 0.9),
            node_count: wf.node_count(),
        })
    }

    /// Every state of shell `n`, in [`enumerate_shell`] order.
    pub fn solve_shell(&self, params: PotentialParams, n: usize) -> Result<Vec<StateSolution>> {
        enumerate_shell(n)
            .into_par_iter()
            .map(|s| self.solve_state(params, s))
            .collect()
    }

    /// `2E` for every state with shell number `≤ n_max`.
    pub fn levels(&self, params: PotentialParams, n_max: usize) -> Result<LevelSet> {
        self.levels_for_shells(params, 0..=n_max)
    }

    fn levels_for_shells<I>(&self, params: PotentialParams, shells: I) -> Result<LevelSet>
    where
        I: IntoIterator<Item = usize>,
    {
        let states: Vec<StateLabel> = shells.into_iter().flat_map(enumerate_shell).collect();
        self.levels_for_states(params, &states)
    }

    /// `2E` for the given states, one eigensolve per distinct `l`.
    pub fn levels_for_states(
        &self,
        params: PotentialParams,
        states: &[StateLabel],
    ) -> Result<LevelSet> {
        let mut wanted: BTreeMap<usize, usize> = BTreeMap::new();
        for s in states {
            let top = wanted.entry(s.l).or_insert(0);
            *top = (*top).max(s.n_r);
        }
        let channels: Vec<(usize, usize)> = wanted.into_iter().collect();
        let solved: Vec<Vec<(StateLabel, f64)>> = channels
            .par_iter()
            .map(|&(l, top)| {
                let sol = self.solve_channel(params, l)?;
                (0..=top)
                    .map(|n_r| {
                        sol.values()
                            .get(n_r)
                            .map(|e| (StateLabel::new(n_r, l), 2.0 * e))
                            .ok_or(Error::StateIndex {
                                n_r,
                                available: sol.len(),
                            })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(LevelSet {
            params,
            energies: solved.into_iter().flatten().collect(),
        })
    }

    pub fn splittings_for_shell(
        &self,
        params: PotentialParams,
        n: usize,
    ) -> Result<Vec<SplittingRecord>> {
        self.levels_for_shells(params, [n])?.splittings(n)
    }

    pub fn ordering_signature(
        &self,
        params: PotentialParams,
        n: usize,
    ) -> Result<OrderingSignature> {
        self.levels_for_shells(params, [n])?.ordering(n)
    }

    /// Solves every `(g, λ)` pair of the grid `g_values × lambda_values`.
    ///
    /// Rows come back in `g`-major order regardless of completion order; a
    /// failed cell records its error and the scan continues.
    pub fn scan(&self, g_values: &[f64], lambda_values: &[f64], n_max: usize) -> ScanTable {
        let pairs: Vec<(f64, f64)> = g_values
            .iter()
            .flat_map(|&g| lambda_values.iter().map(move |&l| (g, l)))
            .collect();
        let cells = pairs
            .par_iter()
            .map(|&(g, lambda)| ScanCell {
                g,
                lambda,
                outcome: self.scan_cell(g, lambda, n_max).map_err(|e| e.to_string()),
            })
            .collect();
        ScanTable { n_max, cells }
    }

    fn scan_cell(&self, g: f64, lambda: f64, n_max: usize) -> Result<ScanEntry> {
        let params = PotentialParams::new(g, lambda)?;
        let levels = self.levels(params, n_max)?;
        let orderings = (0..=n_max)
            .map(|n| levels.ordering(n))
            .collect::<Result<Vec<_>>>()?;
        let mut splittings = Vec::new();
        for n in 2..=n_max {
            splittings.extend(levels.splittings(n)?);
        }
        Ok(ScanEntry {
            levels,
            orderings,
            splittings,
        })
    }
}

/// Free-function form of [`Solver::solve_state`].
pub fn solve_state(
    params: PotentialParams,
    n_r: usize,
    l: usize,
    config: &SolverConfig,
) -> Result<StateSolution> {
    Solver::new(*config)?.solve_state(params, StateLabel::new(n_r, l))
}

#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub levels: LevelSet,
    /// Indexed by shell number.
    pub orderings: Vec<OrderingSignature>,
    pub splittings: Vec<SplittingRecord>,
}

#[derive(Debug, Clone)]
pub struct ScanCell {
    pub g: f64,
    pub lambda: f64,
    pub outcome: std::result::Result<ScanEntry, String>,
}

#[derive(Debug, Clone)]
pub struct ScanTable {
    pub n_max: usize,
    pub cells: Vec<ScanCell>,
}

impl ScanTable {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(spectroscopic_label(0, 0), "1s");
        assert_eq!(spectroscopic_label(3, 2), "4d");
        assert_eq!(spectroscopic_label(0, 9), "1l");
        assert_eq!(spectroscopic_label(1, 7), "2j");
        assert_eq!(spectroscopic_label(0, 12), "1[l=12]");
        assert_eq!(StateLabel::new(4, 1).n(), 9);
    }

    #[test]
    fn label_parsing() {
        assert_eq!("4d".parse::<StateLabel>().unwrap(), StateLabel::new(3, 2));
        assert_eq!("1l".parse::<StateLabel>().unwrap(), StateLabel::new(0, 9));
        assert_eq!(
            "2[l=20]".parse::<StateLabel>().unwrap(),
            StateLabel::new(1, 20)
        );
        for bad in ["", "s", "0s", "1x", "1ss", "1[l=]"] {
            assert!(bad.parse::<StateLabel>().is_err(), "{bad}");
        }
        for n_r in 0..5 {
            for l in 0..25 {
                let s = StateLabel::new(n_r, l);
                assert_eq!(s.name().parse::<StateLabel>().unwrap(), s);
            }
        }
    }

    #[test]
    fn shells() {
        let names = |n| {
            enumerate_shell(n)
                .iter()
                .map(|s| s.name())
                .collect::<Vec<_>>()
        };
        assert_eq!(names(0), ["1s"]);
        assert_eq!(names(4), ["1g", "2d", "3s"]);
        assert_eq!(names(9), ["1l", "2j", "3h", "4f", "5p"]);
        for n in 0..30 {
            let shell = enumerate_shell(n);
            assert_eq!(shell.len(), n / 2 + 1);
            assert!(shell.iter().all(|s| s.n() == n));
        }
    }

    #[test]
    fn splitting_catalogue_indices() {
        let firsts: Vec<usize> = (2..=10).map(first_splitting_index).collect();
        assert_eq!(firsts, [1, 2, 3, 5, 7, 10, 13, 17, 21]);
    }

    #[test]
    fn ordering_groups_ties() {
        let params = PotentialParams::new(1.0, 0.0).unwrap();
        let mut energies = BTreeMap::new();
        energies.insert(StateLabel::new(0, 2), 7.0);
        energies.insert(StateLabel::new(1, 0), 7.0 + 1e-13);
        let set = LevelSet { params, energies };
        let sig = set.ordering(2).unwrap();
        assert!(sig.has_ties());
        assert_eq!(sig.to_string(), "1d=2s");

        let mut energies = BTreeMap::new();
        energies.insert(StateLabel::new(0, 2), 7.5);
        energies.insert(StateLabel::new(1, 0), 7.0);
        let set = LevelSet { params, energies };
        assert_eq!(set.ordering(2).unwrap().to_string(), "2s<1d");
        let sp = set.splittings(2).unwrap();
        assert_eq!(sp.len(), 1);
        assert_eq!(sp[0].index, 1);
        assert_eq!(sp[0].upper, StateLabel::new(1, 0));
        assert_eq!(sp[0].delta, -0.5);
    }
}
