//! The `npo` command-line interface.
//!
//! Energies are printed as `2E`, truncated toward zero (never rounded) at
//! `--digits` fractional places. Negative values are truncated toward zero as
//! well, so `-1.23999` at two places prints `-1.23`.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{
    MapParam, SolverConfig, DEFAULT_ORDER, DEFAULT_R_MAX, DEFAULT_SCALE, HIGH_R_MAX,
};
use crate::density::{density_profile, uniform_radii};
use crate::error::{Error, Result};
use crate::hamiltonian::PotentialParams;
use crate::refdata::{embedded_corpus, load_corpus, validate};
use crate::spectrum::{enumerate_shell, Solver, StateLabel, StateSolution};

/// Environment variable capping the worker threads of scans and validation.
pub const THREADS_ENV: &str = "NPO_THREADS";

/// Significant digits kept before truncating; the last bits of a double are
/// noise (a computed 2.4 comes out as 2.39999999999998).
pub const GUARD_SIGNIFICANT: i32 = 14;

/// `value` with exactly `digits` fractional places, truncated toward zero.
///
/// The shortest decimal that round-trips to `value` is first rounded to
/// [`GUARD_SIGNIFICANT`] significant digits, or to `digits + 1` places if
/// that is finer, and the result is cut.
pub fn format_truncated(value: f64, digits: usize) -> String {
    if !value.is_finite() {
        return format!("{value}");
    }
    let mag = value.abs();
    let text = format!("{mag}");
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let places = if mag == 0.0 {
        digits + 1
    } else {
        let int_digits = mag.log10().floor() as i32 + 1;
        (GUARD_SIGNIFICANT - int_digits).max(digits as i32 + 1) as usize
    };
    let (int, mut frac) = round_decimal(int, frac, places);
    frac.truncate(digits);
    while frac.len() < digits {
        frac.push('0');
    }
    let zero = int.bytes().all(|b| b == b'0') && frac.bytes().all(|b| b == b'0');
    let sign = if value < 0.0 && !zero { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Rounds the decimal `int.frac` half-up to `places` fractional digits.
fn round_decimal(int: &str, frac: &str, places: usize) -> (String, String) {
    if frac.len() <= places {
        return (int.to_string(), frac.to_string());
    }
    let mut digits: Vec<u8> = int.bytes().chain(frac.bytes().take(places)).collect();
    if frac.as_bytes()[places] >= b'5' {
        let mut k = digits.len();
        loop {
            if k == 0 {
                digits.insert(0, b'1');
                break;
            }
            k -= 1;
            if digits[k] == b'9' {
                digits[k] = b'0';
            } else {
                digits[k] += 1;
                break;
            }
        }
    }
    let split = digits.len() - places;
    let text = String::from_utf8(digits).expect("ascii digits");
    (text[..split].to_string(), text[split..].to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "npo",
    version,
    about = "Bound states of V(r) = r^2 + lambda r^2/(1 + g r^2)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print 2E for one state, one shell, or every shell up to --n-max.
    Solve(SolveArgs),
    /// Sweep 2E over g and lambda.
    Scan(ScanArgs),
    /// Adjacent same-shell gaps, 2E(n_r+1) - 2E(n_r).
    Splittings(SplittingArgs),
    /// Radial probability distribution |rR|^2 of one state.
    Density(DensityArgs),
    /// Recompute the reference corpus and report deviations.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Polynomial order of the collocation grid.
    #[arg(long = "N", default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    /// Map shape parameter α; the scale then follows as L = α r_max / 2.
    #[arg(long, conflicts_with = "scale")]
    pub alpha: Option<f64>,
    /// Map scale L; α = 2L / r_max. Default 25.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Box size.
    #[arg(long, conflicts_with = "high")]
    pub rmax: Option<f64>,
    /// Use the enlarged box (r_max = 300) for high-lying states.
    #[arg(long)]
    pub high: bool,
    /// Fractional digits kept when printing energies.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u8).range(1..=15))]
    pub digits: u8,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    pub fn solver_config(&self) -> Result<SolverConfig> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("scale", self.scale),
            ("rmax", self.rmax),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Mapping(format!(
                        "--{name} must be finite and positive"
                    )));
                }
            }
        }
        let r_max = match (self.rmax, self.high) {
            (Some(r), _) => r,
            (None, true) => HIGH_R_MAX,
            (None, false) => DEFAULT_R_MAX,
        };
        let map = match (self.alpha, self.scale) {
            (Some(a), _) => MapParam::Alpha(a),
            (None, Some(l)) => MapParam::Scale(l),
            (None, None) => MapParam::Scale(DEFAULT_SCALE),
        };
        Ok(SolverConfig {
            order: self.order,
            r_max,
            map,
        })
    }

    fn digits(&self) -> usize {
        self.digits as usize
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub g: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, requires = "nr", conflicts_with_all = ["n_shell", "all_shells"])]
    pub l: Option<usize>,
    /// Radial quantum number (number of nodes).
    #[arg(long, requires = "l", conflicts_with_all = ["n_shell", "all_shells"])]
    pub nr: Option<usize>,
    /// Every state of shell n = 2 n_r + l.
    #[arg(long, conflicts_with = "all_shells")]
    pub n_shell: Option<usize>,
    /// Every state of shells 0..=--n-max.
    #[arg(long)]
    pub all_shells: bool,
    #[arg(long, default_value_t = 9)]
    pub n_max: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Comma-separated g values.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "g_fixed"
    )]
    pub g: Vec<f64>,
    /// Comma-separated lambda values.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "lambda_fixed"
    )]
    pub lambda: Vec<f64>,
    /// Single g for a sweep over --lambda.
    #[arg(long, allow_hyphen_values = true)]
    pub g_fixed: Option<f64>,
    /// Single lambda for a sweep over --g.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_fixed: Option<f64>,
    /// Emit a two-column sweep of this state, e.g. 1s.
    #[arg(long)]
    pub state: Option<StateLabel>,
    #[arg(long, default_value_t = 9)]
    pub n_max: usize,
    /// Which table the full scan prints.
    #[arg(long, value_enum, default_value_t = ScanTableKind::Levels)]
    pub table: ScanTableKind,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScanTableKind {
    Levels,
    Orderings,
    Splittings,
}

#[derive(Debug, Args)]
pub struct SplittingArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub g: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    /// One shell only; default is shells 2..=7.
    #[arg(long)]
    pub n_shell: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub g: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    /// State label such as 1f or 3s.
    #[arg(long, conflicts_with_all = ["l", "nr"], required_unless_present_all = ["l", "nr"])]
    pub state: Option<StateLabel>,
    #[arg(long, requires = "nr")]
    pub l: Option<usize>,
    #[arg(long, requires = "l")]
    pub nr: Option<usize>,
    /// Number of uniformly spaced samples.
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    /// Last sample radius; defaults to r_max.
    #[arg(long)]
    pub r_end: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Corpus CSV; defaults to the built-in one.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Also write the CSV report to this path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

/// Outcome of a command: text for stdout (or `--out`) and an exit status.
struct Output {
    text: String,
    status: i32,
}

/// Parses `args` and runs the command, writing results to `stdout` and
/// diagnostics to `stderr`. Returns the process exit status: 0 on success,
/// 1 on solver or validation failure, 2 on usage errors.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };

    let common = match &cli.command {
        Command::Solve(a) => &a.common,
        Command::Scan(a) => &a.common,
        Command::Splittings(a) => &a.common,
        Command::Density(a) => &a.common,
        Command::Validate(a) => &a.common,
    }
    .clone();

    let pool = thread_pool();
    let mut notes = Vec::new();
    let result = pool.install(|| match &cli.command {
        Command::Solve(a) => cmd_solve(a, &mut notes),
        Command::Scan(a) => cmd_scan(a, &mut notes),
        Command::Splittings(a) => cmd_splittings(a),
        Command::Density(a) => cmd_density(a),
        Command::Validate(a) => cmd_validate(a, &mut notes),
    });
    for note in &notes {
        let _ = writeln!(stderr, "{note}");
    }

    match result {
        Ok(out) => {
            let written = match &common.out {
                Some(path) => fs::write(path, &out.text),
                None => stdout.write_all(out.text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 1;
            }
            out.status
        }
        Err(Error::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn thread_pool() -> rayon::ThreadPool {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

fn warn_state(notes: &mut Vec<String>, s: &StateSolution) {
    if s.box_warning() {
        notes.push(format!(
            "warning: {} has {:.1e} of its density in the outer 10% of the box; consider a larger --rmax",
            s.label, s.outer_fraction
        ));
    }
    if !s.nodes_consistent() {
        notes.push(format!(
            "warning: {} has {} nodes, expected {}",
            s.label, s.node_count, s.label.n_r
        ));
    }
}

fn cmd_solve(a: &SolveArgs, notes: &mut Vec<String>) -> Result<Output> {
    let params = PotentialParams::new(a.g, a.lambda)?;
    let solver = Solver::new(a.common.solver_config()?)?;
    let digits = a.common.digits();

    let states: Vec<StateLabel> = match (a.l, a.nr, a.n_shell, a.all_shells) {
        (Some(l), Some(nr), None, false) => {
            let s = solver.solve_state(params, StateLabel::new(nr, l))?;
            warn_state(notes, &s);
            return Ok(Output {
                text: format!("{}\n", format_truncated(s.two_e, digits)),
                status: 0,
            });
        }
        (None, None, Some(n), false) => enumerate_shell(n),
        (None, None, None, true) => (0..=a.n_max).flat_map(enumerate_shell).collect(),
        _ => {
            return Err(Error::Usage(
                "solve needs --l with --nr, --n-shell, or --all-shells".into(),
            ))
        }
    };

    let mut text = String::from("state,nr,l,n,energy\n");
    for label in states {
        let s = solver.solve_state(params, label)?;
        warn_state(notes, &s);
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            label,
            label.n_r,
            label.l,
            label.n(),
            format_truncated(s.two_e, digits)
        ));
    }
    Ok(Output { text, status: 0 })
}

fn cmd_scan(a: &ScanArgs, notes: &mut Vec<String>) -> Result<Output> {
    let solver = Solver::new(a.common.solver_config()?)?;
    let digits = a.common.digits();
    let g_values: Vec<f64> = a.g_fixed.map(|g| vec![g]).unwrap_or_else(|| a.g.clone());
    let lambda_values: Vec<f64> = a
        .lambda_fixed
        .map(|l| vec![l])
        .unwrap_or_else(|| a.lambda.clone());
    if a.g_fixed.is_none() && a.g.is_empty() {
        return Err(Error::Usage("scan needs --g or --g-fixed".into()));
    }
    if a.lambda_fixed.is_none() && a.lambda.is_empty() && a.g_fixed.is_some() {
        return Err(Error::Usage("scan needs --lambda or --lambda-fixed".into()));
    }

    if let Some(state) = a.state {
        // Two-column sweep: the free parameter against 2E.
        let (column, sweep_g) = match (a.g_fixed, a.lambda_fixed) {
            (Some(_), None) => ("lambda", false),
            (None, Some(_)) => ("g", true),
            _ => {
                return Err(Error::Usage(
                    "--state needs exactly one of --g-fixed or --lambda-fixed".into(),
                ))
            }
        };
        use rayon::prelude::*;
        let pairs: Vec<(f64, f64)> = g_values
            .iter()
            .flat_map(|&g| lambda_values.iter().map(move |&l| (g, l)))
            .collect();
        let solved: Vec<Result<StateSolution>> = pairs
            .par_iter()
            .map(|&(g, l)| solver.solve_state(PotentialParams::new(g, l)?, state))
            .collect();
        let mut text = format!("{column},energy\n");
        let mut failed = 0;
        for ((g, l), s) in pairs.iter().zip(solved) {
            let x = if sweep_g { g } else { l };
            match s {
                Ok(s) => {
                    warn_state(notes, &s);
                    text.push_str(&format!("{x},{}\n", format_truncated(s.two_e, digits)));
                }
                Err(e) => {
                    failed += 1;
                    notes.push(format!("error: g={g} lambda={l}: {e}"));
                    text.push_str(&format!("{x},NaN\n"));
                }
            }
        }
        return Ok(Output {
            text,
            status: i32::from(failed > 0),
        });
    }

    let table = solver.scan(&g_values, &lambda_values, a.n_max);
    let mut text = match a.table {
        ScanTableKind::Levels => String::from("g,lambda,state,nr,l,n,energy\n"),
        ScanTableKind::Orderings => String::from("g,lambda,n,ordering\n"),
        ScanTableKind::Splittings => String::from("g,lambda,index,n,upper,lower,delta\n"),
    };
    for cell in &table.cells {
        let entry = match &cell.outcome {
            Ok(entry) => entry,
            Err(e) => {
                notes.push(format!("error: g={} lambda={}: {e}", cell.g, cell.lambda));
                continue;
            }
        };
        match a.table {
            ScanTableKind::Levels => {
                for n in 0..=table.n_max {
                    for s in enumerate_shell(n) {
                        let e = entry.levels.get(s).unwrap_or(f64::NAN);
                        text.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            cell.g,
                            cell.lambda,
                            s,
                            s.n_r,
                            s.l,
                            n,
                            format_truncated(e, digits)
                        ));
                    }
                }
            }
            ScanTableKind::Orderings => {
                for (n, sig) in entry.orderings.iter().enumerate() {
                    text.push_str(&format!("{},{},{},{}\n", cell.g, cell.lambda, n, sig));
                }
            }
            ScanTableKind::Splittings => {
                for r in &entry.splittings {
                    text.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        cell.g,
                        cell.lambda,
                        r.index,
                        r.upper.n(),
                        r.upper,
                        r.lower,
                        format_truncated(r.delta, digits)
                    ));
                }
            }
        }
    }
    Ok(Output {
        text,
        status: i32::from(table.failures() > 0),
    })
}

fn cmd_splittings(a: &SplittingArgs) -> Result<Output> {
    let params = PotentialParams::new(a.g, a.lambda)?;
    let solver = Solver::new(a.common.solver_config()?)?;
    let shells: Vec<usize> = match a.n_shell {
        Some(n) if n < 2 => {
            return Err(Error::Usage(format!(
                "shell {n} has a single state and no splittings"
            )))
        }
        Some(n) => vec![n],
        None => (2..=7).collect(),
    };
    let levels = solver.levels(params, *shells.last().unwrap_or(&7))?;
    let mut text = String::from("index,n,upper,lower,delta\n");
    for n in shells {
        for r in levels.splittings(n)? {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                r.index,
                n,
                r.upper,
                r.lower,
                format_truncated(r.delta, a.common.digits())
            ));
        }
    }
    Ok(Output { text, status: 0 })
}

fn cmd_density(a: &DensityArgs) -> Result<Output> {
    let params = PotentialParams::new(a.g, a.lambda)?;
    let state = match (a.state, a.l, a.nr) {
        (Some(s), _, _) => s,
        (None, Some(l), Some(nr)) => StateLabel::new(nr, l),
        _ => {
            return Err(Error::Usage(
                "density needs --state or --l with --nr".into(),
            ))
        }
    };
    let solver = Solver::new(a.common.solver_config()?)?;
    let r_max = solver.operator().mapping().r_max();
    let r_end = a.r_end.unwrap_or(r_max);
    if !(r_end > 0.0 && r_end <= r_max) {
        return Err(Error::OutsideBox { r: r_end, r_max });
    }
    let sol = solver.solve_channel(params, state.l)?;
    let radii = uniform_radii(r_end, a.points);
    let profile = density_profile(solver.operator(), &sol, state, params, &radii)?;
    Ok(Output {
        text: profile.to_csv(),
        status: 0,
    })
}

fn cmd_validate(a: &ValidateArgs, notes: &mut Vec<String>) -> Result<Output> {
    let entries = match &a.corpus {
        Some(path) => load_corpus(path)?,
        None => embedded_corpus()?,
    };
    let config = a.common.solver_config()?;
    let report = validate(&entries, &config)?;
    if let Some(path) = &a.report {
        fs::write(path, report.to_csv())?;
    }
    let failures = report.failures();
    if failures > 0 {
        notes.push(format!("validation: {failures} failures"));
    }
    Ok(Output {
        text: report.to_text(),
        status: i32::from(failures > 0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_examples() {
        assert_eq!(format_truncated(3.1200818649, 9), "3.120081864");
        assert_eq!(format_truncated(-1.23999, 2), "-1.23");
        assert_eq!(format_truncated(2.4000000000001, 12), "2.400000000000");
        assert_eq!(format_truncated(2.4, 12), "2.400000000000");
        assert_eq!(format_truncated(-133.0, 3), "-133.000");
        assert_eq!(format_truncated(0.999999, 3), "0.999");
        assert_eq!(format_truncated(-0.0001, 2), "0.00");
        assert_eq!(format_truncated(7.0, 1), "7.0");
        assert_eq!(format_truncated(1e-20, 3), "0.000");
        assert_eq!(format_truncated(2.399999999999983, 12), "2.400000000000");
        assert_eq!(format_truncated(1312.251674809387, 12), "1312.251674809387");
        assert_eq!(format_truncated(0.0, 0), "0");
        assert_eq!(format_truncated(9.99999999999999, 3), "10.000");
        assert_eq!(format_truncated(-0.0, 2), "0.00");
    }

    #[test]
    fn common_config_resolution() {
        let parse = |extra: &[&str]| {
            let mut args = vec![
                "npo", "solve", "--g", "1", "--lambda", "1", "--l", "0", "--nr", "0",
            ];
            args.extend_from_slice(extra);
            match Cli::try_parse_from(args).unwrap().command {
                Command::Solve(a) => a.common.solver_config().unwrap(),
                _ => unreachable!(),
            }
        };
        assert_eq!(parse(&[]), SolverConfig::default());
        assert_eq!(parse(&["--high"]).r_max, 300.0);
        assert_eq!(parse(&["--alpha", "25"]).map, MapParam::Alpha(25.0));
        assert_eq!(parse(&["--scale", "10", "--rmax", "80"]).r_max, 80.0);
        assert_eq!(parse(&["--N", "120"]).order, 120);
    }
}
