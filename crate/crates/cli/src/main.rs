//! `campana-lab`: command-line front end for campana-core.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 domain error,
//! 4 failed internal check.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use campana_core::analysis::{self, AnalysisError, ConstantOptions, CountColumn};
use campana_core::fieldspec::{builtin_field, field_from_file, FieldError, FieldSpec};
use campana_core::groups::{builtin_group, builtin_groups_of_order, cyclic_group, GroupError, GroupTable};
use campana_core::localseries::{
    campana_leading_check, vanishing_check, CharacterValues, SeriesError, SplitType,
};
use campana_core::orbits::{b_exponent, count_s_gm, orbit_classes, OrbitError};
use campana_core::points::{self, CountTable, EnumerationConfig, PointError};
use campana_core::selftest::run_selftest;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug, Serialize)]
#[command(name = "campana-lab", version, about = "Campana and weak Campana points on norm-form varieties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CAMPANA_LAB_THREADS")]
    #[serde(skip)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, default_value_t = 0)]
    #[serde(skip)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Chars {
    Trivial,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Column {
    Weak,
    Campana,
}

#[derive(Args, Debug, Serialize)]
struct FieldArgs {
    /// Builtin field name, e.g. `gaussian` or `quadratic(-5)`.
    #[arg(long, conflicts_with = "spec")]
    field: Option<String>,
    /// Field description file (TOML or JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GroupArgs {
    /// Builtin group name, e.g. `cyclic(3)` or `klein4`.
    #[arg(long, conflicts_with = "cayley")]
    group: Option<String>,
    /// Cayley table as JSON.
    #[arg(long)]
    cayley: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// b(d,m), #S(G,m) and #S'(G,m).
    Invariants {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Orbit classes of m-multisets under right translation.
    Orbits {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Count weak Campana and Campana points of bounded height.
    Count {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        xmax: u64,
        /// Number of geometric checkpoints, or a comma-separated list of X values.
        #[arg(long, default_value = "8")]
        checkpoints: String,
        /// Extra primes in S, comma separated.
        #[arg(long, value_delimiter = ',')]
        exclude_primes: Vec<u64>,
        /// Zero the elapsed_ms column.
        #[arg(long)]
        no_timing: bool,
    },
    /// Local series at one place: vanishing and Campana regularity report.
    Series {
        /// Residue-degree pattern, e.g. `1,1,1` or `3`.
        #[arg(long)]
        split: String,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = Chars::Trivial)]
        chars: Chars,
        #[arg(long, default_value_t = 32)]
        terms: usize,
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Fit a count table against c·B^{1/m}(log B)^{b−1}.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        m: u32,
        /// Log-power exponent; computed from --d when omitted.
        #[arg(long)]
        b: Option<u64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_enum, default_value_t = Column::Weak)]
        column: Column,
    },
    /// Trivial-character estimate of the leading constant.
    Constant {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 100_000)]
        p_max: u64,
        /// Treat every good prime as inert.
        #[arg(long)]
        force_inert: bool,
    },
    /// Run the invariant suite.
    Selftest,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Domain(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Domain(_) => 3,
            Failure::Internal(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(s) => write!(f, "configuration error: {s}"),
            Failure::Domain(s) => write!(f, "domain error: {s}"),
            Failure::Internal(s) => write!(f, "internal check failed: {s}"),
        }
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::BadPrimeForMinPoly(_)
            | FieldError::UnsupportedPrime { .. }
            | FieldError::PrecisionExhausted { .. }
            | FieldError::Overflow(_) => Failure::Domain(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<GroupError> for Failure {
    fn from(e: GroupError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<OrbitError> for Failure {
    fn from(e: OrbitError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<PointError> for Failure {
    fn from(e: PointError) -> Self {
        match e {
            PointError::Field(f) => f.into(),
            PointError::Arith(_) | PointError::UnsupportedPrime { .. } => Failure::Domain(e.to_string()),
            PointError::Internal { .. } => Failure::Internal(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<SeriesError> for Failure {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::RamifiedUnsupported => Failure::Domain(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::InsufficientData(_) => Failure::Config(e.to_string()),
            AnalysisError::UnsupportedField(_) => Failure::Domain(e.to_string()),
            AnalysisError::Field(f) => f.into(),
            AnalysisError::Orbit(o) => o.into(),
            AnalysisError::Series(s) => s.into(),
            AnalysisError::NonFinite(_) | AnalysisError::Pool(_) => Failure::Internal(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Everything needed to rerun a command.
#[derive(Serialize)]
struct RunConfig<'a> {
    version: &'static str,
    seed: u64,
    threads: usize,
    #[serde(flatten)]
    cli: &'a Cli,
}

struct Ctx<'a> {
    cli: &'a Cli,
    threads: usize,
}

impl Ctx<'_> {
    fn run_config(&self) -> Value {
        serde_json::to_value(RunConfig {
            version: env!("CARGO_PKG_VERSION"),
            seed: self.cli.seed,
            threads: self.threads,
            cli: self.cli,
        })
        .expect("run config serializes")
    }

    fn format(&self, default: Format) -> Format {
        self.cli.format.unwrap_or(default)
    }

    fn emit(&self, text: &str) -> Outcome {
        match &self.cli.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json(&self, body: Value) -> Outcome {
        let mut doc = json!({ "run_config": self.run_config() });
        if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
            d.extend(b);
        }
        self.emit(&(serde_json::to_string_pretty(&doc).expect("json") + "\n"))
    }

    /// CSV with the run configuration as a leading comment line.
    fn emit_csv(&self, body: &str) -> Outcome {
        self.emit(&format!("# run_config {}\n{body}", self.run_config()))
    }
}

fn load_field(args: &FieldArgs) -> Result<FieldSpec, Failure> {
    match (&args.field, &args.spec) {
        (Some(name), None) => Ok(builtin_field(name)?),
        (None, Some(path)) => Ok(field_from_file(path)?),
        _ => Err(Failure::Config("give exactly one of --field or --spec".into())),
    }
}

fn load_group(args: &GroupArgs) -> Result<Option<(String, GroupTable)>, Failure> {
    match (&args.group, &args.cayley) {
        (Some(name), None) => Ok(Some((name.clone(), builtin_group(name)?))),
        (None, Some(path)) => Ok(Some((path.display().to_string(), GroupTable::from_json_file(path)?))),
        _ => Ok(None),
    }
}

fn cmd_invariants(ctx: &Ctx, d: usize, m: usize, group: &GroupArgs) -> Outcome {
    let b = b_exponent(d, m)?;
    let s_formula = count_s_gm(d, m)?;
    let groups = match load_group(group)? {
        Some(g) => vec![g],
        None => builtin_groups_of_order(d)
            .into_iter()
            .map(|n| builtin_group(&n).map(|g| (n, g)))
            .collect::<Result<_, _>>()?,
    };
    let mut rows = Vec::new();
    for (name, g) in groups {
        if g.order() != d {
            return Err(Failure::Config(format!("group {name} has order {}, not {d}", g.order())));
        }
        let classes = orbit_classes(&g, m)?;
        let reduced = classes.iter().filter(|c| c.distinct_support < d).count();
        rows.push(json!({
            "group": name, "d": d, "m": m, "b": b,
            "S_formula": s_formula, "S": classes.len(), "S_prime": reduced,
        }));
    }
    match ctx.format(Format::Csv) {
        Format::Json => ctx.emit_json(json!({ "invariants": rows })),
        Format::Csv => {
            let mut s = String::from("group,d,m,b,S_formula,S,S_prime\n");
            for r in &rows {
                writeln!(s, "{},{},{},{},{},{},{}", r["group"].as_str().unwrap_or(""), d, m, b, s_formula, r["S"], r["S_prime"])
                    .expect("string write");
            }
            ctx.emit_csv(&s)
        }
    }
}

fn cmd_orbits(ctx: &Ctx, m: usize, group: &GroupArgs) -> Outcome {
    let (name, g) = load_group(group)?.ok_or_else(|| Failure::Config("--group or --cayley is required".into()))?;
    let d = g.order();
    let classes = orbit_classes(&g, m)?;
    match ctx.format(Format::Csv) {
        Format::Json => ctx.emit_json(json!({ "group": name, "m": m, "classes": classes })),
        Format::Csv => {
            let mut s = String::from("representative,orbit_size,distinct_support,reduced\n");
            for c in &classes {
                let rep: Vec<String> = c.representative.iter().map(|g| g.to_string()).collect();
                writeln!(s, "{},{},{},{}", rep.join(" "), c.orbit_size, c.distinct_support, c.distinct_support < d)
                    .expect("string write");
            }
            ctx.emit_csv(&s)
        }
    }
}

fn parse_checkpoints(spec: &str, xmax: u64) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::Config(format!("bad --checkpoints `{spec}`"));
    if spec.contains(',') {
        let mut v: Vec<u64> = spec.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        v.sort_unstable();
        v.dedup();
        if v.first() == Some(&0) || v.last().is_some_and(|&x| x > xmax) {
            return Err(Failure::Config("checkpoints must lie in 1..=xmax".into()));
        }
        Ok(v)
    } else {
        let n: usize = spec.trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        Ok(points::default_checkpoints(xmax, n))
    }
}

fn cmd_count(ctx: &Ctx, field: &FieldArgs, m: u32, xmax: u64, checkpoints: &str, exclude: &[u64], no_timing: bool) -> Outcome {
    if xmax == 0 {
        return Err(Failure::Config("--xmax must be at least 1".into()));
    }
    if m < 2 {
        return Err(Failure::Config("--m must be at least 2".into()));
    }
    let f = load_field(field)?;
    let cfg = EnumerationConfig {
        m,
        xmax,
        checkpoints: parse_checkpoints(checkpoints, xmax)?,
        excluded: exclude.iter().copied().collect::<BTreeSet<u64>>(),
        threads: ctx.threads,
    };
    let mut table: CountTable = points::enumerate(&f, &cfg)?;
    if no_timing {
        table.clear_timing();
    }
    match ctx.format(Format::Csv) {
        Format::Csv => ctx.emit(&table.to_csv(Some(&ctx.run_config().to_string()))),
        Format::Json => ctx.emit_json(json!({ "table": table })),
    }
}

fn cmd_series(ctx: &Ctx, split: &str, m: usize, chars: Chars, terms: usize, group: &GroupArgs) -> Outcome {
    let st = SplitType::parse(split)?;
    let (_, g) = match load_group(group)? {
        Some(g) => g,
        None => (format!("cyclic({})", st.d), cyclic_group(st.d)?),
    };
    let cv = match chars {
        Chars::Trivial => CharacterValues::trivial(&st),
        Chars::Random => CharacterValues::random(&st, &mut ChaCha8Rng::seed_from_u64(ctx.cli.seed)),
    };
    let van = vanishing_check(&g, &st, &cv, m, terms)?;
    let camp = campana_leading_check(&st, &cv, m)?;
    match ctx.format(Format::Json) {
        Format::Json => ctx.emit_json(json!({ "characters": cv, "vanishing": van, "campana": camp }))?,
        Format::Csv => ctx.emit_csv(&van.quotient.to_csv())?,
    }
    if !van.vanishes || !van.bounds_hold || !camp.holds {
        return Err(Failure::Internal(format!(
            "split {st}, m = {m}: max |d_n| = {:e}, bounds {}, Campana {}",
            van.max_abs, van.bounds_hold, camp.holds
        )));
    }
    Ok(())
}

fn cmd_fit(ctx: &Ctx, input: &Path, m: u32, b: Option<u64>, d: Option<usize>, column: Column) -> Outcome {
    let text = std::fs::read_to_string(input)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", input.display())))?;
    let rows = CountTable::rows_from_csv(&text).map_err(Failure::Config)?;
    let b = match (b, d) {
        (Some(b), _) => b,
        (None, Some(d)) => b_exponent(d, m as usize)?,
        (None, None) => return Err(Failure::Config("give --b or --d".into())),
    };
    let table = CountTable {
        field: String::new(),
        degree: d.unwrap_or(0),
        m,
        excluded: Vec::new(),
        xmax: rows.last().map_or(0, |r| r.x),
        version: String::new(),
        rows,
    };
    let col = match column {
        Column::Weak => CountColumn::Weak,
        Column::Campana => CountColumn::Campana,
    };
    let rep = analysis::fit_counts(&table, m, b, col)?;
    match ctx.format(Format::Json) {
        Format::Json => ctx.emit_json(json!({ "fit": rep })),
        Format::Csv => {
            let mut s = String::from("B,N,ratio\n");
            for p in &rep.points {
                writeln!(s, "{},{},{}", p.b, p.n, p.ratio).expect("string write");
            }
            ctx.emit_csv(&s)
        }
    }
}

fn cmd_constant(ctx: &Ctx, field: &FieldArgs, m: usize, p_max: u64, force_inert: bool) -> Outcome {
    let f = load_field(field)?;
    let est = analysis::constant_estimate(&f, m, p_max, ConstantOptions { threads: ctx.threads, force_inert })?;
    match ctx.format(Format::Json) {
        Format::Json => ctx.emit_json(json!({ "constant": est })),
        Format::Csv => {
            let body = format!(
                "field,m,b,prefactor,residue_ratio,pole_piece,euler_truncation,estimate,p_max\n{},{},{},{},{},{},{},{},{}\n",
                est.field, est.m, est.b, est.prefactor, est.residue_ratio, est.pole_piece,
                est.euler_truncation, est.estimate, est.p_max
            );
            ctx.emit_csv(&body)
        }
    }
}

fn cmd_selftest(ctx: &Ctx) -> Outcome {
    let results = run_selftest(ctx.threads, ctx.cli.seed);
    let failed = results.iter().filter(|r| !r.passed).count();
    match ctx.format(Format::Csv) {
        Format::Json => ctx.emit_json(json!({ "checks": results }))?,
        Format::Csv => {
            let mut s = String::new();
            for r in &results {
                writeln!(s, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail).expect("string write");
            }
            ctx.emit(&s)?;
        }
    }
    if failed > 0 {
        return Err(Failure::Internal(format!("{failed} self-test check(s) failed")));
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(Failure::Config("--threads must be positive".into()));
    }
    let ctx = Ctx { cli, threads };
    match &cli.command {
        Command::Invariants { d, m, group } => cmd_invariants(&ctx, *d, *m, group),
        Command::Orbits { m, group } => cmd_orbits(&ctx, *m, group),
        Command::Count { field, m, xmax, checkpoints, exclude_primes, no_timing } => {
            cmd_count(&ctx, field, *m, *xmax, checkpoints, exclude_primes, *no_timing)
        }
        Command::Series { split, m, chars, terms, group } => cmd_series(&ctx, split, *m, *chars, *terms, group),
        Command::Fit { input, m, b, d, column } => cmd_fit(&ctx, input, *m, *b, *d, *column),
        Command::Constant { field, m, p_max, force_inert } => cmd_constant(&ctx, field, *m, *p_max, *force_inert),
        Command::Selftest => cmd_selftest(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("campana-lab: {e}");
            ExitCode::from(e.code())
        }
    }
}
