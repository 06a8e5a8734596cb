//! `bellcorr`: command-line access to the correlation-inequality toolkit.
//!
//! Streams are written as JSON lines, single results as one JSON object.
//! Exit status is 0 on success, 2 for invalid input and 3 when the optimizer
//! did not converge (the result is still printed).

use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellcorr::classical::{l1_margin, membership, witness, CorrelationVector};
use bellcorr::inequality::{
    coefficients_from_signs, id_to_signs, mermin_signs, parse_polynomial, polynomial_string,
    signs_from_coefficients, signs_to_id, BellTable, InequalityId, SignTable,
};
use bellcorr::quantum::{
    extreme_point_q, ghz_observables, ghz_state, is_ppt, max_violation, mermin_bound,
    min_partial_transpose_eigenvalue, sample_separable, simulate_correlations, ObservableSpec, OptimizerSettings,
    PhaseVector,
};
use bellcorr::symmetry::{canonical_id, classify_all, ORBIT_MAX_SITES};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "bellcorr", version, about = "Full-correlation Bell inequalities for n parties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List inequalities by id with their polynomial and sign table.
    Enumerate(EnumerateArgs),
    /// Orbit census with maximal quantum violations (n <= 4).
    Classify(ClassifyArgs),
    /// Test a correlation vector for membership in the classical polytope.
    Membership(MembershipArgs),
    /// Maximal quantum violation of one inequality.
    Violation(ViolationArgs),
    /// GHZ correlations and observables realizing given phases.
    Ghz(GhzArgs),
    /// Compute the id of an inequality given in another form.
    Id(IdArgs),
    /// Check random separable states against every extremal inequality.
    PptCheck(PptArgs),
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(short = 'n')]
    n: u32,
    /// A single id (decimal).
    #[arg(long, conflicts_with_all = ["all", "range"])]
    id: Option<String>,
    /// Every id below 2^(2^n) (n <= 6).
    #[arg(long)]
    all: bool,
    /// Half-open id range `start:end` (n <= 6).
    #[arg(long, conflicts_with = "all")]
    range: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(short = 'n')]
    n: u32,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Skip the quantum optimizer.
    #[arg(long)]
    no_violation: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct MembershipArgs {
    /// Correlation vector: JSON `{"n": .., "xi": [..]}` or CSV of the 2^n
    /// values; `-` reads standard input.
    file: PathBuf,
}

#[derive(Args)]
struct ViolationArgs {
    #[arg(short = 'n')]
    n: Option<u32>,
    #[arg(long, conflicts_with_all = ["table", "polynomial"], requires = "n")]
    id: Option<String>,
    /// Coefficient table as JSON `{"n", "log_denominator", "numerators"}`.
    #[arg(long, conflicts_with = "polynomial")]
    table: Option<PathBuf>,
    #[arg(long, requires = "n")]
    polynomial: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random starting points besides the grid.
    #[arg(long)]
    starts: Option<usize>,
}

#[derive(Args)]
struct GhzArgs {
    #[arg(short = 'n')]
    n: u32,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi0: f64,
    /// Comma-separated site phases.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phi: Vec<f64>,
}

#[derive(Args)]
struct IdArgs {
    #[arg(short = 'n')]
    n: Option<u32>,
    /// The Mermin inequality on n sites.
    #[arg(long, requires = "n", conflicts_with_all = ["signs", "polynomial", "table"])]
    mermin: bool,
    /// Comma-separated signs f(r), r = 0, 1, ...; `+`, `-`, `1` or `-1`.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["polynomial", "table"])]
    signs: Option<String>,
    #[arg(long, requires = "n", conflicts_with = "table")]
    polynomial: Option<String>,
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct PptArgs {
    #[arg(short = 'n', default_value_t = 3)]
    n: u32,
    /// Number of random separable states.
    #[arg(long, default_value_t = 200)]
    states: usize,
    /// Number of random observable choices per state.
    #[arg(long, default_value_t = 50)]
    obs: usize,
    /// Product terms per separable state.
    #[arg(long, default_value_t = 4)]
    terms: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Input(String),
    NonConvergence,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn print_json<T: Serialize>(out: &mut impl Write, value: &T) -> CmdResult {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn signs_from_id(n: u32, text: &str) -> Result<SignTable, Failure> {
    Ok(id_to_signs(&InequalityId::parse(n, text)?))
}

#[derive(Serialize)]
struct EnumerateLine {
    n: u32,
    id: String,
    polynomial: String,
    signs: Vec<i64>,
}

fn enumerate_line(f: &SignTable) -> EnumerateLine {
    EnumerateLine {
        n: f.n(),
        id: signs_to_id(f).to_string(),
        polynomial: polynomial_string(&coefficients_from_signs(f)),
        signs: f.signs(),
    }
}

fn cmd_enumerate(args: &EnumerateArgs, out: &mut impl Write) -> CmdResult {
    if let Some(id) = &args.id {
        return print_json(out, &enumerate_line(&signs_from_id(args.n, id)?));
    }
    if args.n == 0 || args.n > 6 {
        return Err(input("--all and --range need 1 <= n <= 6"));
    }
    let last = u64::MAX >> (64 - (1u32 << args.n));
    let (start, end) = match (&args.range, args.all) {
        (Some(range), _) => {
            let (a, b) = range.split_once(':').ok_or_else(|| input("--range expects start:end"))?;
            let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
            if b == 0 || b - 1 > last || a > b {
                return Err(input(format!("range {range} is outside 0..={last}")));
            }
            (a, b - 1)
        }
        (None, true) => (0, last),
        (None, false) => return Err(input("give one of --id, --all or --range")),
    };
    if start > end {
        return Ok(());
    }
    for v in start..=end {
        print_json(out, &enumerate_line(&SignTable::from_word(args.n, v)?))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyRow {
    canonical_id: String,
    size: u64,
    flags: String,
    max_violation: Option<f64>,
}

fn cmd_classify(args: &ClassifyArgs, out: &mut impl Write) -> CmdResult {
    let settings = OptimizerSettings { seed: args.seed, ..OptimizerSettings::default() };
    let mut converged = true;
    let mut rows = Vec::new();
    for rec in classify_all(args.n)? {
        let max_violation = if args.no_violation {
            None
        } else {
            let result = max_violation(&coefficients_from_signs(&id_to_signs(&rec.canonical_id)), &settings);
            converged &= result.converged;
            Some(result.value)
        };
        rows.push(ClassifyRow {
            canonical_id: rec.canonical_id.to_string(),
            size: rec.size,
            flags: rec.flag_label(),
            max_violation,
        });
    }
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Table<'a> {
                n: u32,
                seed: u64,
                orbits: &'a [ClassifyRow],
            }
            print_json(out, &Table { n: args.n, seed: args.seed, orbits: &rows })?;
        }
    }
    if converged {
        Ok(())
    } else {
        Err(Failure::NonConvergence)
    }
}

fn read_source(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
    }
}

fn parse_correlations(text: &str) -> Result<CorrelationVector, Failure> {
    if text.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(text)?);
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut values = Vec::new();
    for record in reader.records() {
        for field in record?.iter().map(str::trim).filter(|f| !f.is_empty()) {
            values.push(field.parse::<f64>().map_err(|e| input(format!("CSV field {field:?}: {e}")))?);
        }
    }
    Ok(CorrelationVector::from_values(values)?)
}

fn cmd_membership(args: &MembershipArgs, out: &mut impl Write) -> CmdResult {
    let xi = parse_correlations(&read_source(&args.file)?)?;
    #[derive(Serialize)]
    struct Report {
        n: u32,
        margin: f64,
        member: bool,
        witness_id: String,
    }
    let m = membership(&xi);
    print_json(
        out,
        &Report { n: xi.n(), margin: m.margin, member: m.member, witness_id: signs_to_id(&witness(&xi)).to_string() },
    )
}

fn read_table(path: &Path) -> Result<BellTable, Failure> {
    Ok(serde_json::from_str(&read_source(path)?)?)
}

fn cmd_violation(args: &ViolationArgs, out: &mut impl Write) -> CmdResult {
    let beta = match (&args.id, &args.table, &args.polynomial) {
        (Some(id), _, _) => coefficients_from_signs(&signs_from_id(args.n.unwrap_or_default(), id)?),
        (_, Some(path), _) => read_table(path)?,
        (_, _, Some(text)) => parse_polynomial(args.n.unwrap_or_default(), text)?,
        _ => return Err(input("give one of --id, --table or --polynomial")),
    };
    if let Some(n) = args.n.filter(|&n| n != beta.n()) {
        return Err(input(format!("table has {} sites, -n says {n}", beta.n())));
    }
    let mut settings = OptimizerSettings { seed: args.seed, ..OptimizerSettings::default() };
    if let Some(starts) = args.starts {
        settings.random_starts = starts;
    }
    let result = max_violation(&beta, &settings);
    let n = beta.n();
    #[derive(Serialize)]
    struct Report {
        n: u32,
        id: Option<String>,
        value: f64,
        phases: PhaseVector,
        bound: f64,
        attained_fraction: f64,
        seed: u64,
        converged: bool,
    }
    let bound = mermin_bound(n);
    let report = Report {
        n,
        id: signs_from_coefficients(&beta).ok().map(|f| signs_to_id(&f).to_string()),
        value: result.value,
        phases: result.argmax,
        bound,
        attained_fraction: result.value / bound,
        seed: args.seed,
        converged: result.converged,
    };
    print_json(out, &report)?;
    if result.converged {
        Ok(())
    } else {
        Err(Failure::NonConvergence)
    }
}

fn cmd_ghz(args: &GhzArgs, out: &mut impl Write) -> CmdResult {
    let phi = if args.phi.is_empty() { vec![0.0; args.n as usize] } else { args.phi.clone() };
    if phi.len() != args.n as usize {
        return Err(input(format!("{} phases given for n = {}", phi.len(), args.n)));
    }
    let phases = PhaseVector::new(args.phi0, phi);
    let obs = ghz_observables(&phases);
    let xi = simulate_correlations(&ghz_state(args.n)?, &obs)?;
    let deviation = xi.values().iter().zip(extreme_point_q(&phases).values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    #[derive(Serialize)]
    struct Report {
        n: u32,
        phases: PhaseVector,
        correlations: Vec<f64>,
        /// x–y plane angles of `[A_k(0), A_k(1)]` per site.
        observables: Vec<[f64; 2]>,
        max_deviation_from_closed_form: f64,
    }
    let report = Report {
        n: args.n,
        observables: obs.xy_angles().expect("GHZ observables lie in the x-y plane"),
        phases,
        correlations: xi.values().to_vec(),
        max_deviation_from_closed_form: deviation,
    };
    print_json(out, &report)
}

fn parse_signs(text: &str) -> Result<SignTable, Failure> {
    let signs: Vec<i64> = text
        .split(',')
        .map(|t| match t.trim() {
            "+" | "1" | "+1" => Ok(1),
            "-" | "-1" => Ok(-1),
            other => Err(input(format!("sign {other:?} is not +1 or -1"))),
        })
        .collect::<Result<_, _>>()?;
    let n = bellcorr::transform::sites_for_len(signs.len())?;
    Ok(SignTable::new(n, &signs)?)
}

fn cmd_id(args: &IdArgs, out: &mut impl Write) -> CmdResult {
    let f = if args.mermin {
        mermin_signs(args.n.unwrap_or_default())?
    } else if let Some(text) = &args.signs {
        parse_signs(text)?
    } else if let Some(text) = &args.polynomial {
        signs_from_coefficients(&parse_polynomial(args.n.unwrap_or_default(), text)?)?
    } else if let Some(path) = &args.table {
        signs_from_coefficients(&read_table(path)?)?
    } else {
        return Err(input("give one of --mermin, --signs, --polynomial or --table"));
    };
    if let Some(n) = args.n.filter(|&n| n != f.n()) {
        return Err(input(format!("inequality has {} sites, -n says {n}", f.n())));
    }
    #[derive(Serialize)]
    struct Report {
        n: u32,
        id: String,
        orbit_id: Option<String>,
    }
    let orbit_id = if f.n() <= ORBIT_MAX_SITES { Some(canonical_id(&f)?.to_string()) } else { None };
    print_json(out, &Report { n: f.n(), id: signs_to_id(&f).to_string(), orbit_id })
}

fn cmd_ppt_check(args: &PptArgs, out: &mut impl Write) -> CmdResult {
    if !(1..=6).contains(&args.n) {
        return Err(input("ppt-check supports 1 <= n <= 6"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let specs: Vec<ObservableSpec> = (0..args.obs).map(|_| ObservableSpec::random(args.n, &mut rng)).collect();
    let (mut all_ppt, mut min_pt, mut max_value) = (true, f64::INFINITY, f64::NEG_INFINITY);
    let mut violations = 0usize;
    for i in 0..args.states {
        let state_seed = args.seed.wrapping_add(1).wrapping_add(i as u64);
        let rho = sample_separable(args.n, args.terms, state_seed)?;
        all_ppt &= is_ppt(&rho)?;
        if args.n > 1 {
            min_pt = min_pt.min(min_partial_transpose_eigenvalue(&rho)?.0);
        }
        for obs in &specs {
            // the ℓ1 margin is the largest value over all extremal inequalities
            let margin = l1_margin(&simulate_correlations(&rho, obs)?);
            violations += usize::from(margin > 1.0 + 1e-9);
            max_value = max_value.max(margin);
        }
    }
    #[derive(Serialize)]
    struct Report {
        n: u32,
        seed: u64,
        states: usize,
        observables: usize,
        all_ppt: bool,
        min_partial_transpose_eigenvalue: Option<f64>,
        max_inequality_value: Option<f64>,
        violations: usize,
    }
    let report = Report {
        n: args.n,
        seed: args.seed,
        states: args.states,
        observables: args.obs,
        all_ppt,
        min_partial_transpose_eigenvalue: min_pt.is_finite().then_some(min_pt),
        max_inequality_value: max_value.is_finite().then_some(max_value),
        violations,
    };
    print_json(out, &report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = match &cli.command {
        Command::Enumerate(a) => cmd_enumerate(a, &mut out),
        Command::Classify(a) => cmd_classify(a, &mut out),
        Command::Membership(a) => cmd_membership(a, &mut out),
        Command::Violation(a) => cmd_violation(a, &mut out),
        Command::Ghz(a) => cmd_ghz(a, &mut out),
        Command::Id(a) => cmd_id(a, &mut out),
        Command::PptCheck(a) => cmd_ppt_check(a, &mut out),
    };
    let flushed = out.flush();
    match result {
        Ok(()) if flushed.is_ok() => ExitCode::SUCCESS,
        Ok(()) => ExitCode::from(2),
        Err(Failure::NonConvergence) => {
            eprintln!("warning: the optimizer did not converge from every start");
            ExitCode::from(3)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
