//! Published reference values and the regression harness that checks the
//! solver against them.
//!
//! Corpus rows are `table,g,lambda,nr,l,value,digits,rmax,exact`. For the
//! splitting table (`V`) the `nr` column holds the catalogue index and the
//! `l` column the shell number. Values are stored as printed, i.e. truncated.

pub mod acceptance;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::hamiltonian::PotentialParams;
use crate::spectrum::{enumerate_shell, first_splitting_index, LevelSet, Solver, StateLabel};

pub const CORPUS_HEADER: &str = "table,g,lambda,nr,l,value,digits,rmax,exact";
pub const REPORT_HEADER: &str = "table,g,lambda,nr,l,computed,reference,absdiff,pass";

const EMBEDDED: &str = include_str!("../data/reference.csv");
const EMBEDDED_SHA256: &str = "6a9ad718ea1611e458bf60a3edd3ecd1f2e53c5a6b7bcf0e21644d5c7057368f";

pub const TABLE_I_ABS_TOL: f64 = 1e-9;
pub const ENERGY_REL_TOL: f64 = 1e-8;
pub const SPLITTING_ABS_TOL: f64 = 2e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Table {
    /// Exactly solvable ground states.
    I,
    /// `n_r = 0, 1` for `l = 0..3`.
    II,
    /// High-lying `l = 10, 20` states in the large box.
    III,
    /// Shells `n = 0..5, 9` at four coupling pairs.
    IV,
    /// Same-shell splittings.
    V,
}

impl Table {
    pub const ALL: [Table; 5] = [Table::I, Table::II, Table::III, Table::IV, Table::V];

    /// Entries a complete corpus holds for this table.
    pub fn expected_count(self) -> usize {
        match self {
            Table::I => 8,
            Table::II => 24,
            Table::III => 20,
            Table::IV => 68,
            Table::V => 96,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Table::I => "I",
            Table::II => "II",
            Table::III => "III",
            Table::IV => "IV",
            Table::V => "V",
        }
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Table {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Table::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown table {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEntry {
    pub table: Table,
    pub g: f64,
    pub lambda: f64,
    /// Radial quantum number, or the splitting index for table V.
    pub nr: usize,
    /// Angular momentum, or the shell number for table V.
    pub l: usize,
    pub value: f64,
    pub printed_digits: u32,
    pub r_max: f64,
    pub exact: bool,
}

impl ReferenceEntry {
    pub fn is_splitting(&self) -> bool {
        self.table == Table::V
    }

    /// Target state of an energy entry.
    pub fn state(&self) -> Option<StateLabel> {
        (!self.is_splitting()).then(|| StateLabel::new(self.nr, self.l))
    }

    /// `(upper, lower)` states of a splitting entry.
    pub fn splitting_states(&self) -> Option<(StateLabel, StateLabel)> {
        if !self.is_splitting() {
            return None;
        }
        let k = self.nr.checked_sub(first_splitting_index(self.l))?;
        let mut shell = enumerate_shell(self.l);
        shell.sort_by_key(|s| s.n_r);
        Some((*shell.get(k + 1)?, shell[k]))
    }

    /// Acceptance bound on `|computed - value|`.
    pub fn tolerance(&self) -> f64 {
        match self.table {
            Table::I => TABLE_I_ABS_TOL,
            Table::II | Table::III | Table::IV => ENERGY_REL_TOL * self.value.abs(),
            Table::V => SPLITTING_ABS_TOL,
        }
    }

    /// States whose energies this entry needs.
    fn needed_states(&self) -> Vec<StateLabel> {
        match (self.state(), self.splitting_states()) {
            (Some(s), _) => vec![s],
            (None, Some((u, d))) => vec![u, d],
            _ => Vec::new(),
        }
    }
}

fn parse_row(line: &str, line_no: usize) -> Result<ReferenceEntry> {
    let err = |message: String| Error::Corpus {
        line: line_no,
        message,
    };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 9 {
        return Err(err(format!("expected 9 fields, found {}", fields.len())));
    }
    let real = |i: usize, name: &str| -> Result<f64> {
        fields[i]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(format!("bad {name} {:?}", fields[i])))
    };
    let int = |i: usize, name: &str| -> Result<usize> {
        fields[i]
            .parse::<usize>()
            .map_err(|_| err(format!("bad {name} {:?}", fields[i])))
    };
    let table: Table = fields[0].parse().map_err(err)?;
    let printed_digits = int(6, "digits")? as u32;
    if printed_digits < 6 {
        return Err(err(format!("printed digits {printed_digits} < 6")));
    }
    let exact = match fields[8] {
        "0" => false,
        "1" => true,
        other => return Err(err(format!("bad exact flag {other:?}"))),
    };
    let entry = ReferenceEntry {
        table,
        g: real(1, "g")?,
        lambda: real(2, "lambda")?,
        nr: int(3, "nr")?,
        l: int(4, "l")?,
        value: real(5, "value")?,
        printed_digits,
        r_max: real(7, "rmax")?,
        exact,
    };
    if entry.is_splitting() && entry.splitting_states().is_none() {
        return Err(err(format!(
            "splitting index {} does not belong to shell {}",
            entry.nr, entry.l
        )));
    }
    if exact && (entry.value * 10.0).fract() != 0.0 {
        return Err(err(format!(
            "exact value {} is not a terminating decimal",
            entry.value
        )));
    }
    Ok(entry)
}

/// Parses corpus text without enforcing table counts.
pub fn parse_corpus(text: &str) -> Result<Vec<ReferenceEntry>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == CORPUS_HEADER => {}
        Some((i, _)) => {
            return Err(Error::Corpus {
                line: i + 1,
                message: format!("expected header {CORPUS_HEADER:?}"),
            })
        }
        None => {
            return Err(Error::Corpus {
                line: 0,
                message: "corpus is empty".into(),
            })
        }
    }
    lines.map(|(i, l)| parse_row(l, i + 1)).collect()
}

fn check_counts(entries: &[ReferenceEntry]) -> Result<()> {
    for table in Table::ALL {
        let found = entries.iter().filter(|e| e.table == table).count();
        if found != table.expected_count() {
            return Err(Error::Corpus {
                line: 0,
                message: format!(
                    "table {table} has {found} entries, expected {}",
                    table.expected_count()
                ),
            });
        }
    }
    Ok(())
}

/// Loads and checks a complete corpus from disk.
pub fn load_corpus(path: &Path) -> Result<Vec<ReferenceEntry>> {
    let text = std::fs::read_to_string(path)?;
    let entries = parse_corpus(&text)?;
    check_counts(&entries)?;
    Ok(entries)
}

/// SHA-256 of the corpus shipped with the crate, hex encoded.
pub fn embedded_checksum() -> String {
    Sha256::digest(EMBEDDED.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The corpus shipped with the crate.
pub fn embedded_corpus() -> Result<Vec<ReferenceEntry>> {
    let sum = embedded_checksum();
    if sum != EMBEDDED_SHA256 {
        return Err(Error::Corpus {
            line: 0,
            message: format!("embedded corpus checksum {sum} does not match"),
        });
    }
    let entries = parse_corpus(EMBEDDED)?;
    check_counts(&entries)?;
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub entry: ReferenceEntry,
    /// `NaN` when the solve failed.
    pub computed: f64,
    pub abs_diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn rows_for(&self, table: Table) -> impl Iterator<Item = &ValidationRow> {
        self.rows.iter().filter(move |r| r.entry.table == table)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        for r in &self.rows {
            let e = &r.entry;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{:e},{}\n",
                e.table,
                e.g,
                e.lambda,
                e.nr,
                e.l,
                r.computed,
                e.value,
                r.abs_diff,
                if r.pass { 1 } else { 0 }
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let e = &r.entry;
            let what = match (e.state(), e.splitting_states()) {
                (Some(s), _) => s.name(),
                (None, Some((u, d))) => format!("#{} {}-{}", e.nr, u, d),
                _ => String::new(),
            };
            out.push_str(&format!(
                "{:<4} g={:<6} lambda={:<7} {:<14} ref={:<20} got={:<20.12} diff={:.2e} tol={:.1e} {}\n",
                e.table.as_str(),
                e.g,
                e.lambda,
                what,
                e.value,
                r.computed,
                r.abs_diff,
                e.tolerance(),
                if r.pass { "PASS" } else { "FAIL" }
            ));
        }
        for table in Table::ALL {
            let total = self.rows_for(table).count();
            let fails = self.rows_for(table).filter(|r| !r.pass).count();
            if total > 0 {
                out.push_str(&format!(
                    "table {table}: {total} entries, {fails} failures\n"
                ));
            }
        }
        out.push_str(&format!(
            "total: {} entries, {} failures\n",
            self.rows.len(),
            self.failures()
        ));
        out
    }
}

/// Recomputes every entry and compares it with the stored value.
///
/// Each entry is solved in a box of its own `r_max`; order and mapping come
/// from `config`. Rows keep the corpus order.
pub fn validate(entries: &[ReferenceEntry], config: &SolverConfig) -> Result<ValidationReport> {
    // (r_max, g, λ) bit patterns → states needed there.
    type Key = (u64, u64, u64);
    let mut groups: BTreeMap<Key, Vec<StateLabel>> = BTreeMap::new();
    for e in entries {
        let key = (e.r_max.to_bits(), e.g.to_bits(), e.lambda.to_bits());
        groups.entry(key).or_default().extend(e.needed_states());
    }

    let mut solvers: BTreeMap<u64, Solver> = BTreeMap::new();
    for &(r_max, _, _) in groups.keys() {
        if let std::collections::btree_map::Entry::Vacant(slot) = solvers.entry(r_max) {
            slot.insert(Solver::new(config.with_r_max(f64::from_bits(r_max)))?);
        }
    }

    let levels: BTreeMap<Key, Option<LevelSet>> = {
        use rayon::prelude::*;
        let jobs: Vec<(Key, Vec<StateLabel>)> = groups.into_iter().collect();
        jobs.into_par_iter()
            .map(|(key, states)| {
                let solver = &solvers[&key.0];
                let set = PotentialParams::new(f64::from_bits(key.1), f64::from_bits(key.2))
                    .and_then(|p| solver.levels_for_states(p, &states))
                    .ok();
                (key, set)
            })
            .collect()
    };

    let rows = entries
        .iter()
        .map(|e| {
            let key = (e.r_max.to_bits(), e.g.to_bits(), e.lambda.to_bits());
            let set = levels[&key].as_ref();
            let computed = match (set, e.state(), e.splitting_states()) {
                (Some(set), Some(s), _) => set.get(s),
                (Some(set), None, Some((u, d))) => set.get(u).zip(set.get(d)).map(|(a, b)| a - b),
                _ => None,
            }
            .unwrap_or(f64::NAN);
            let abs_diff = (computed - e.value).abs();
            ValidationRow {
                entry: e.clone(),
                computed,
                abs_diff,
                pass: abs_diff <= e.tolerance(),
            }
        })
        .collect();
    Ok(ValidationReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_corpus_loads() {
        let c = embedded_corpus().unwrap();
        assert_eq!(c.len(), 216);
        for t in Table::ALL {
            assert_eq!(
                c.iter().filter(|e| e.table == t).count(),
                t.expected_count()
            );
        }
        let e = c
            .iter()
            .find(|e| e.table == Table::I && e.g == 0.1 && e.lambda == -0.5)
            .unwrap();
        assert_eq!((e.nr, e.l, e.value, e.exact), (0, 1, 4.0, true));
        assert!(c.iter().filter(|e| e.exact).all(|e| e.table == Table::I));
        assert!(c.iter().all(|e| e.printed_digits >= 6));
    }

    #[test]
    fn splitting_rows_map_to_states() {
        let c = embedded_corpus().unwrap();
        let row = |idx| {
            c.iter()
                .find(|e| e.table == Table::V && e.nr == idx)
                .unwrap()
        };
        let names = |e: &ReferenceEntry| {
            let (u, d) = e.splitting_states().unwrap();
            format!("{u}-{d}")
        };
        assert_eq!(names(row(1)), "2s-1d");
        assert_eq!(names(row(2)), "2p-1f");
        assert_eq!(names(row(3)), "2d-1g");
        assert_eq!(names(row(4)), "3s-2d");
        assert_eq!(names(row(10)), "2h-1j");
        assert_eq!(names(row(11)), "3f-2h");
        assert_eq!(names(row(12)), "4p-3f");
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let text =
            format!("{CORPUS_HEADER}\nI,0.1,-0.46,0,0,2.4,13,150,1\nII,1,1,0,x,3.5,12,150,0\n");
        match parse_corpus(&text) {
            Err(Error::Corpus { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = format!("{CORPUS_HEADER}\nVI,1,1,0,0,3.5,12,150,0\n");
        assert!(matches!(
            parse_corpus(&text),
            Err(Error::Corpus { line: 2, .. })
        ));
        let text = format!("{CORPUS_HEADER}\nV,1,1,5,4,0.1,6,150,0\n");
        assert!(matches!(
            parse_corpus(&text),
            Err(Error::Corpus { line: 2, .. })
        ));
        assert!(parse_corpus("").is_err());
        assert!(parse_corpus("a,b\n").is_err());
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(load_corpus(&path).is_err());
    }

    #[test]
    fn incomplete_corpus_fails_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("partial.csv");
        std::fs::write(
            &path,
            format!("{CORPUS_HEADER}\nI,0.1,-0.46,0,0,2.4,13,150,1\n"),
        )
        .unwrap();
        assert!(matches!(
            load_corpus(&path),
            Err(Error::Corpus { line: 0, .. })
        ));
        let full = dir.path().join("full.csv");
        std::fs::write(&full, EMBEDDED).unwrap();
        assert_eq!(load_corpus(&full).unwrap().len(), 216);
    }
}
