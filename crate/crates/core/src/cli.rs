//! Command-line front end.
//!
//! Input formats (UTF-8, whitespace separated, blank lines and lines starting
//! with `#` or `%` are skipped):
//!
//! * `sets`: a header `m n`, then one line per set giving its size followed by
//!   its **1-based** elements. Every listed element becomes a 1 entry.
//! * `coo`: an optional header `m n`, then one `row col value` triple per line
//!   with **0-based** indices and `|value| ≤ 1`. Without a header the shape is
//!   the smallest one holding every entry.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::coloring::{run_mode, ColoringRun, Mode};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::SetSystemMatrix;
use crate::rng::SeededRng;

pub const SEED_ENV: &str = "DISCLIB_SEED";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Sets,
    Coo,
}

#[derive(Debug, Parser)]
#[command(name = "disclib", about = "Low-discrepancy colorings of set systems")]
pub struct Args {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "sets")]
    pub format: Format,
    /// Falls back to $DISCLIB_SEED, then to the config file's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "auto", value_parser = parse_mode)]
    pub mode: Mode,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Recompute the discrepancy and exit 2 if it exceeds the bound.
    #[arg(long)]
    pub verify: bool,
    /// JSON object overriding fields of the calibrated configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the phase trace as CSV, to stdout when no path is given.
    #[arg(long, num_args = 0..=1, default_missing_value = "-")]
    pub stats: Option<PathBuf>,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Numbered non-blank, non-comment lines.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let t = line.trim();
        (!t.is_empty() && !t.starts_with('#') && !t.starts_with('%')).then(|| (i + 1, t.split_whitespace().collect()))
    })
}

fn number<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("{what} {token:?} is not a valid number")))
}

pub fn parse_input(text: &str, format: Format) -> Result<SetSystemMatrix> {
    match format {
        Format::Sets => parse_sets(text),
        Format::Coo => parse_coo(text),
    }
}

fn header(line: usize, tokens: &[&str]) -> Result<(usize, usize)> {
    if tokens.len() != 2 {
        return Err(parse_err(line, "header must be `m n`"));
    }
    Ok((number(tokens[0], line, "m")?, number(tokens[1], line, "n")?))
}

fn parse_sets(text: &str) -> Result<SetSystemMatrix> {
    let mut lines = content_lines(text);
    let (line, tokens) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let (m, n) = header(line, &tokens)?;
    let mut entries = Vec::new();
    let mut rows = 0;
    for (line, tokens) in lines {
        if rows == m {
            return Err(parse_err(line, format!("more than {m} sets")));
        }
        let size: usize = number(tokens[0], line, "set size")?;
        if tokens.len() != size + 1 {
            return Err(parse_err(line, format!("set size {size} but {} elements", tokens.len() - 1)));
        }
        let mut seen = Vec::with_capacity(size);
        for token in &tokens[1..] {
            let e: usize = number(token, line, "element")?;
            if e == 0 || e > n {
                return Err(parse_err(line, format!("element {e} outside 1..={n}")));
            }
            if seen.contains(&e) {
                return Err(parse_err(line, format!("element {e} repeated")));
            }
            seen.push(e);
            entries.push((rows, e - 1, 1.0));
        }
        rows += 1;
    }
    if rows != m {
        return Err(parse_err(text.lines().count().max(1), format!("expected {m} sets, found {rows}")));
    }
    SetSystemMatrix::from_entries(&entries, m, n)
}

fn parse_coo(text: &str) -> Result<SetSystemMatrix> {
    let mut lines = content_lines(text).peekable();
    let shape = match lines.peek() {
        Some((line, tokens)) if tokens.len() == 2 => {
            let shape = header(*line, tokens)?;
            lines.next();
            Some(shape)
        }
        _ => None,
    };
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, tokens) in lines {
        if tokens.len() != 3 {
            return Err(parse_err(line, "expected `row col value`"));
        }
        let r: usize = number(tokens[0], line, "row")?;
        let c: usize = number(tokens[1], line, "col")?;
        let v: f64 = number(tokens[2], line, "value")?;
        if !(v.abs() <= 1.0) {
            return Err(parse_err(line, format!("|value| = {} > 1", v.abs())));
        }
        if let Some((m, n)) = shape {
            if r >= m || c >= n {
                return Err(parse_err(line, format!("index ({r}, {c}) outside {m}x{n}")));
            }
        }
        if !seen.insert((r, c)) {
            return Err(parse_err(line, format!("duplicate entry ({r}, {c})")));
        }
        entries.push((r, c, v));
    }
    let (m, n) = shape.unwrap_or_else(|| {
        entries
            .iter()
            .fold((0, 0), |(m, n), &(r, c, _)| (m.max(r + 1), n.max(c + 1)))
    });
    SetSystemMatrix::from_entries(&entries, m, n)
}

/// Writes a 0/1 matrix in the `sets` format.
pub fn emit_sets(a: &SetSystemMatrix) -> Result<String> {
    let mut out = format!("{} {}\n", a.rows(), a.cols());
    for r in 0..a.rows() {
        let (cols, vals) = a.row(r);
        if let Some(&v) = vals.iter().find(|&&v| v != 1.0) {
            return Err(Error::InvalidConfig(format!("row {r} has entry {v}; sets need 0/1 entries")));
        }
        out.push_str(&cols.len().to_string());
        for c in cols {
            write!(out, " {}", c + 1).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes any matrix in the `coo` format, header included.
pub fn emit_coo(a: &SetSystemMatrix) -> String {
    let mut out = format!("{} {}\n", a.rows(), a.cols());
    for (r, c, v) in a.entries_by_row() {
        writeln!(out, "{r} {c} {v:?}").unwrap();
    }
    out
}

/// One trace row without its wall-clock time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseSummary {
    pub phase: String,
    pub n_sub: usize,
    pub m_sub: usize,
    pub nnz: usize,
    pub disc_contrib: f64,
    pub retries: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub total_micros: u128,
    pub phase_micros: Vec<u128>,
}

/// The JSON report. Everything outside `timing` is a function of the input,
/// seed and configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub m: usize,
    pub n: usize,
    pub mode: Mode,
    pub seed: u64,
    pub coloring: Vec<f64>,
    pub discrepancy: f64,
    pub bound: f64,
    pub retries: u32,
    pub trace: Vec<PhaseSummary>,
    pub config: SolverConfig,
    pub timing: Timing,
}

impl RunReport {
    fn new(a: &SetSystemMatrix, mode: Mode, cfg: SolverConfig, run: ColoringRun, total_micros: u128) -> Self {
        let trace = &run.trace;
        Self {
            schema: SCHEMA_VERSION,
            m: a.rows(),
            n: a.cols(),
            mode,
            seed: cfg.seed,
            coloring: run.v.clone(),
            discrepancy: run.discrepancy,
            bound: cfg.spencer_bound(a.rows(), a.cols()),
            retries: run.retries,
            trace: trace
                .phases
                .iter()
                .map(|p| PhaseSummary {
                    phase: p.phase.clone(),
                    n_sub: p.n_sub,
                    m_sub: p.m_sub,
                    nnz: p.nnz,
                    disc_contrib: p.disc_contrib,
                    retries: p.retries,
                })
                .collect(),
            config: cfg,
            timing: Timing {
                total_micros,
                phase_micros: trace.phases.iter().map(|p| p.micros).collect(),
            },
        }
    }
}

/// [`SolverConfig::desk`] with the fields present in `overrides` replaced.
pub fn load_config(overrides: Option<&str>) -> Result<SolverConfig> {
    let Some(text) = overrides else {
        return Ok(SolverConfig::desk());
    };
    let bad = |e: serde_json::Error| Error::InvalidConfig(e.to_string());
    let patch: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
    let serde_json::Value::Object(patch) = patch else {
        return Err(Error::InvalidConfig("config must be a JSON object".into()));
    };
    let mut base = serde_json::to_value(SolverConfig::desk()).map_err(bad)?;
    let fields = base.as_object_mut().expect("config serializes to an object");
    for (k, v) in patch {
        fields.insert(k, v);
    }
    let cfg: SolverConfig = serde_json::from_value(base).map_err(bad)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Failures mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Input(String),
    Bound(String),
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_to(path: &Path, text: &str, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let res = if path == Path::new("-") {
        stdout.write_all(text.as_bytes())
    } else {
        std::fs::write(path, text)
    };
    res.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn execute(args: &Args, env_seed: Option<String>, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let input = Failure::Input;
    let text = read(&args.input)?;
    let a = parse_input(&text, args.format).map_err(|e| input(e.to_string()))?;
    let overrides = args.config.as_deref().map(read).transpose()?;
    let mut cfg = load_config(overrides.as_deref()).map_err(|e| input(e.to_string()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    } else if let Some(s) = env_seed {
        cfg.seed = s
            .trim()
            .parse()
            .map_err(|_| input(format!("{SEED_ENV}={s:?} is not a u64")))?;
    }

    let start = Instant::now();
    let mut rng = SeededRng::new(cfg.seed);
    let run = run_mode(&a, args.mode, &cfg, &mut rng).map_err(|e| Failure::Bound(e.to_string()))?;
    let total_micros = start.elapsed().as_micros();
    let csv = run.trace.to_csv();
    let report = RunReport::new(&a, args.mode, cfg, run, total_micros);

    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_to(args.out.as_deref().unwrap_or(Path::new("-")), &json, stdout)?;
    if let Some(path) = &args.stats {
        write_to(path, &csv, stdout)?;
    }
    if args.verify {
        let fresh = a.discrepancy(&report.coloring).map_err(|e| input(e.to_string()))?;
        if (fresh - report.discrepancy).abs() > 1e-9 {
            return Err(Failure::Bound(format!("reported discrepancy {} but recomputed {fresh}", report.discrepancy)));
        }
        if fresh > report.bound {
            return Err(Failure::Bound(format!("discrepancy {fresh} exceeds bound {}", report.bound)));
        }
    }
    Ok(())
}

/// Runs the CLI and returns the exit code: 0 on success, 1 on input or
/// configuration errors, 2 when no coloring within the bound was produced.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let first = e.to_string();
            let _ = writeln!(stderr, "{}", first.lines().next().unwrap_or("invalid arguments"));
            return 1;
        }
    };
    match execute(&args, std::env::var(SEED_ENV).ok(), stdout) {
        Ok(()) => 0,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(Failure::Bound(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_example() {
        let a = parse_input("1 3\n2 1 3\n", Format::Sets).unwrap();
        assert_eq!((a.rows(), a.cols()), (1, 3));
        assert_eq!(a.row(0), (&[0usize, 2][..], &[1.0, 1.0][..]));
    }

    #[test]
    fn coo_examples() {
        let a = parse_input("0 0 -0.5", Format::Coo).unwrap();
        assert_eq!((a.rows(), a.cols(), a.nnz()), (1, 1, 1));
        assert_eq!(a.row(0).1, &[-0.5]);
        let err = parse_input("0 0 2.0", Format::Coo).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn malformed_inputs_report_lines() {
        let cases = [
            ("2 3\n1 1\n1 4\n", 3, Format::Sets),
            ("1 3\n2 1\n", 2, Format::Sets),
            ("1 3\n2 2 2\n", 2, Format::Sets),
            ("1 3\nx 1\n", 2, Format::Sets),
            ("2 2\n0 0 1\n\n0 0 0.5\n", 4, Format::Coo),
            ("2 2\n0 5 1\n", 2, Format::Coo),
            ("1 1\n0 0 1 2\n", 2, Format::Coo),
        ];
        for (text, line, format) in cases {
            match parse_input(text, format) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
        assert!(matches!(parse_input("2 2\n1 1\n", Format::Sets), Err(Error::Parse { .. })));
    }

    #[test]
    fn comments_and_blank_lines() {
        let a = parse_input("# system\n2 2\n\n1 1\n% second\n2 1 2\n", Format::Sets).unwrap();
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn sets_emit_rejects_weighted_rows() {
        let a = SetSystemMatrix::from_entries(&[(0, 0, 0.5)], 1, 1).unwrap();
        assert!(emit_sets(&a).is_err());
    }

    #[test]
    fn config_overrides() {
        let cfg = load_config(Some(r#"{"c0": 1.5, "seed": 9}"#)).unwrap();
        assert_eq!(cfg.c0, 1.5);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.mwu_max_iters, SolverConfig::desk().mwu_max_iters);
        assert!(load_config(Some(r#"{"bogus": 1}"#)).is_err());
        assert!(load_config(Some(r#"{"c0": -1}"#)).is_err());
        assert!(load_config(Some("[1]")).is_err());
        assert_eq!(load_config(None).unwrap(), SolverConfig::desk());
    }

    fn matrix_strategy(values: bool) -> impl proptest::strategy::Strategy<Value = SetSystemMatrix> {
        use proptest::prelude::*;
        (0usize..6, 1usize..6).prop_flat_map(move |(m, n)| {
            let cell = if values {
                prop_oneof![Just(0.0), -1.0f64..=1.0].boxed()
            } else {
                prop_oneof![Just(0.0), Just(1.0)].boxed()
            };
            proptest::collection::vec(cell, m * n).prop_map(move |cells| {
                let entries: Vec<_> = cells
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(k, &v)| (k / n, k % n, v))
                    .collect();
                SetSystemMatrix::from_entries(&entries, m, n).unwrap()
            })
        })
    }

    proptest::proptest! {
        #[test]
        fn coo_round_trip(a in matrix_strategy(true)) {
            proptest::prop_assert_eq!(parse_input(&emit_coo(&a), Format::Coo).unwrap(), a);
        }

        #[test]
        fn sets_round_trip(a in matrix_strategy(false)) {
            proptest::prop_assert_eq!(parse_input(&emit_sets(&a).unwrap(), Format::Sets).unwrap(), a);
        }
    }
}
