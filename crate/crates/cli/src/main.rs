use std::fs::{File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use cubeperc::checkers::{tree_count_bound, tree_count_exact};
use cubeperc::harness::{
    build_grid, giant_statistics, group_by_parameters, manifest, parse_checks, read_records, run_trial,
    second_component_scaling, sweep, write_census_csv, write_record, ExperimentRecord, MemoryBudget, Mode,
    ScalingFit, TrialConfig, CENSUS_HEADER, DEFAULT_C_GRID, UNIQUENESS_FACTOR,
};
use cubeperc::{CycleGraph, Error, GraphOracle, Hypercube};

const EXIT_VIOLATIONS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "cubeperc", version, about = "Site percolation experiments on the hypercube Q^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and append its record.
    Trial(TrialArgs),
    /// Run a grid of trials over d × epsilon × trials on a worker pool.
    Sweep(SweepArgs),
    /// Run one trial with structure checkers enabled and list every violation.
    Verify(TrialArgs),
    /// Run the two-round exposure and print the T/M/S split, merge rates and survivor census.
    Sprinkle(TrialArgs),
    /// Exact tree counts of small graphs beside the n(ed)^(k-1) bound.
    Trees(TreesArgs),
    /// Summarize a record file: giant statistics per (d, epsilon) and second-component scaling per epsilon.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    SingleRound,
    TwoRound,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::SingleRound => Mode::SingleRound,
            ModeArg::TwoRound => Mode::TwoRound,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Checkers to run, comma separated: sphere2, expansion, squid [default: none; verify uses sphere2,expansion]
    #[arg(long)]
    checks: Option<String>,
    /// Append output here instead of writing to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// jsonl writes full records; csv writes census rows (d, epsilon, seed, giant, second, max_nongiant_over_d).
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
    /// Exit with status 1 when any checker reports a violation.
    #[arg(long)]
    strict: bool,
    /// Merge-rate constants c (rows count components with |B ∩ M| >= c d), comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_C_GRID.to_vec())]
    c_grid: Vec<f64>,
    /// Test setting: plant 2d retained vertices in the radius-2 sphere of this vertex label.
    #[cfg(feature = "verification")]
    #[arg(long)]
    plant_sphere2: Option<u64>,
    /// Test setting: check expansion for components larger than this instead of 300 ln n.
    #[cfg(feature = "verification")]
    #[arg(long)]
    expansion_threshold_override: Option<f64>,
}

#[derive(Args)]
struct TrialArgs {
    /// Hypercube dimension.
    #[arg(long)]
    d: u32,
    /// Supercriticality: p = (1 + epsilon) / d.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exposure mode [default: single-round; sprinkle always uses two-round].
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Dimensions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<u32>,
    /// Epsilon values, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    epsilon: Vec<f64>,
    /// Master seed; trial seeds are derived from it and the grid index.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials per (d, epsilon) cell.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, value_enum, default_value = "single-round")]
    mode: ModeArg,
    /// Worker threads [default: logical CPUs].
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct TreesArgs {
    /// Graph: qD for the hypercube Q^D, cN for the cycle C_N.
    #[arg(long, default_value = "q3")]
    graph: String,
    /// Largest tree size to count.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
}

#[derive(Args)]
struct ReportArgs {
    /// Record file written by trial or sweep.
    records: PathBuf,
    /// csv prints both tables as comma-separated values, jsonl as one JSON object per row [default: aligned text]
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// A failure with the exit status it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn code_for(e: &Error) -> u8 {
    match e {
        Error::Resource(_) | Error::Refused(_) => EXIT_RESOURCE,
        _ => EXIT_USAGE,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: code_for(&e), error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: EXIT_USAGE, error }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: EXIT_USAGE, error: e.into() }
    }
}

type Outcome = Result<u8, Failure>;

fn config_from(d: u32, epsilon: f64, seed: u64, mode: Mode, common: &CommonArgs, default_checks: &str) -> Result<TrialConfig, Failure> {
    let mut config = TrialConfig::new(d, epsilon, seed).with_mode(mode);
    config.checks = parse_checks(common.checks.as_deref().unwrap_or(default_checks))?;
    config.c_grid = common.c_grid.clone();
    #[cfg(feature = "verification")]
    {
        config.plant_sphere2 = common.plant_sphere2.map(cubeperc::Vertex);
        if let Some(t) = common.expansion_threshold_override {
            config.expansion_threshold = cubeperc::checkers::SizeThreshold::Override(t);
        }
    }
    Ok(config)
}

/// Destination for records or census rows; a csv header is written once per empty target.
struct Sink {
    out: Box<dyn Write>,
    format: Format,
    needs_header: bool,
}

impl Sink {
    fn open(path: Option<&Path>, format: Format) -> Result<Self, Failure> {
        let (out, empty): (Box<dyn Write>, bool) = match path {
            Some(p) => {
                let file = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .with_context(|| format!("cannot open {}", p.display()))?;
                let empty = file.metadata()?.len() == 0;
                (Box::new(BufWriter::new(file)), empty)
            }
            None => (Box::new(io::stdout().lock()), true),
        };
        Ok(Sink { out, format, needs_header: empty })
    }

    fn write(&mut self, record: &ExperimentRecord) -> Result<(), Failure> {
        match self.format {
            Format::Jsonl => write_record(&mut self.out, record)?,
            Format::Csv => {
                let mut rows = Vec::new();
                write_census_csv(&mut rows, std::slice::from_ref(record))?;
                let text = String::from_utf8(rows).expect("ascii csv");
                let body = text.strip_prefix(CENSUS_HEADER).unwrap_or(&text).trim_start_matches('\n');
                if self.needs_header {
                    writeln!(self.out, "{CENSUS_HEADER}")?;
                    self.needs_header = false;
                }
                self.out.write_all(body.as_bytes())?;
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<(), Failure> {
        self.out.flush()?;
        Ok(())
    }
}

fn violation_status(strict: bool, violations: u64) -> u8 {
    if strict && violations > 0 {
        EXIT_VIOLATIONS
    } else {
        0
    }
}

/// Runs the trial and writes it to `--out`; with no `--out` the record goes to standard output
/// only when `echo` is set.
fn cmd_trial(args: &TrialArgs, default_mode: Mode, default_checks: &str, echo: bool) -> Result<ExperimentRecord, Failure> {
    let mode = args.mode.map(Mode::from).unwrap_or(default_mode);
    let config = config_from(args.d, args.epsilon, args.seed, mode, &args.common, default_checks)?;
    let record = run_trial(&config)?;
    if args.common.out.is_some() || echo {
        let mut sink = Sink::open(args.common.out.as_deref(), args.common.format)?;
        sink.write(&record)?;
        sink.finish()?;
    }
    Ok(record)
}

fn trial(args: &TrialArgs) -> Outcome {
    let record = cmd_trial(args, Mode::SingleRound, "", true)?;
    Ok(violation_status(args.common.strict, record.total_violations()))
}

fn verify(args: &TrialArgs) -> Outcome {
    let record = cmd_trial(args, Mode::SingleRound, "sphere2,expansion", false)?;
    let mut out = io::stdout().lock();
    for s in &record.checker_summaries {
        writeln!(
            out,
            "{:<10} violations={} examined={} skipped={} extreme={}{}",
            s.checker,
            s.violations,
            s.examined,
            s.skipped,
            s.extreme.map_or("-".into(), |x| x.to_string()),
            s.note.as_ref().map_or(String::new(), |n| format!(" ({n})"))
        )?;
        for w in &s.witnesses {
            writeln!(out, "  {}", serde_json::to_string(w).context("serializing witness")?)?;
        }
    }
    Ok(violation_status(args.common.strict, record.total_violations()))
}

fn sprinkle(args: &TrialArgs) -> Outcome {
    if matches!(args.mode, Some(ModeArg::SingleRound)) {
        return Err(Error::Domain("sprinkle runs the two-round exposure only".into()).into());
    }
    let record = cmd_trial(args, Mode::TwoRound, "", false)?;
    let merge = record.merge_summary.as_ref().expect("two-round record has a merge summary");
    let mut out = io::stdout().lock();
    writeln!(out, "d={} epsilon={} seed={} p1={:.6} p2={:.6}", record.d, record.epsilon, record.seed, record.p1.unwrap_or(0.0), record.p2.unwrap_or(0.0))?;
    writeln!(out, "partition  |T|={} |M|={} |S|={}", merge.t_size, merge.m_size, merge.s_size)?;
    writeln!(
        out,
        "round one  giant={} second={}{}",
        merge.first_round_giant,
        merge.first_round_second,
        if merge.ambiguous_giant { " (ambiguous giant: second exceeds half the largest)" } else { "" }
    )?;
    writeln!(
        out,
        "components of (S∪M)∩R: {} merged={} max_unmerged={} soundness_violations={}",
        merge.components, merge.merged, merge.max_unmerged, merge.soundness_violations
    )?;
    writeln!(out, "C1 = 18·200²/ε⁵ = {:.6e}; rows below use smaller constants", merge.c1)?;
    writeln!(out, "{:>8} {:>10} {:>9} {:>7} {:>14}", "c", "min|B∩M|", "eligible", "merged", "failure_bound")?;
    for row in &merge.rates {
        writeln!(out, "{:>8} {:>10.2} {:>9} {:>7} {:>14.6e}", row.c, row.min_in_m, row.eligible, row.merged, row.failure_bound)?;
    }
    writeln!(
        out,
        "final      giant={} max_nongiant={} max_nongiant/d={:.3}",
        record.giant,
        record.second,
        record.second as f64 / record.d as f64
    )?;
    let status = if merge.soundness_violations > 0 { EXIT_VIOLATIONS } else { 0 };
    Ok(status.max(violation_status(args.common.strict, record.total_violations())))
}

fn run_sweep(args: &SweepArgs) -> Outcome {
    let template = config_from(args.d[0], args.epsilon[0], 0, args.mode.into(), &args.common, "")?;
    let grid = build_grid(&template, &args.d, &args.epsilon, args.trials, args.seed);
    let jobs = args.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    if let Some(out) = &args.common.out {
        let path = PathBuf::from(format!("{}.manifest.json", out.display()));
        let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &manifest(&grid)).context("writing manifest")?;
    }
    let budget = MemoryBudget::from_env()?;
    let mut sink = Sink::open(args.common.out.as_deref(), args.common.format)?;
    let mut violations = 0;
    let mut worst_failure = 0;
    let mut write_error = None;
    sweep(&grid, jobs, budget, |outcome| match outcome.result {
        Ok(record) => {
            violations += record.total_violations();
            if write_error.is_none() {
                write_error = sink.write(&record).err();
            }
        }
        Err(f) => {
            eprintln!("trial {} (d={}, epsilon={}, seed={}) failed: {}", f.index, f.d, f.epsilon, f.seed, f.message);
            worst_failure = worst_failure.max(if f.kind == "resource" || f.kind == "refused" { EXIT_RESOURCE } else { EXIT_USAGE });
        }
    })?;
    if let Some(e) = write_error {
        return Err(e);
    }
    sink.finish()?;
    if worst_failure > 0 {
        return Ok(worst_failure);
    }
    Ok(violation_status(args.common.strict, violations))
}

fn trees(args: &TreesArgs) -> Outcome {
    let spec = args.graph.to_ascii_lowercase();
    let (kind, size) = spec.split_at(1.min(spec.len()));
    let size: u32 = size.parse().map_err(|_| anyhow::anyhow!("graph '{}' is not of the form qD or cN", args.graph))?;
    match kind {
        "q" => tree_table(&Hypercube::new(size)?, args),
        "c" => tree_table(&CycleGraph::new(size as u64)?, args),
        _ => Err(anyhow::anyhow!("graph '{}' is not of the form qD or cN", args.graph).into()),
    }
}

fn spec_name(args: &TreesArgs) -> String {
    args.graph.to_ascii_lowercase()
}

fn tree_table<G: GraphOracle>(graph: &G, args: &TreesArgs) -> Outcome {
    let mut out = io::stdout().lock();
    if let Format::Csv = args.format {
        writeln!(out, "k,exact,bound")?;
    }
    for k in 1..=args.k {
        let exact = tree_count_exact(graph, k)?;
        let bound = tree_count_bound(graph.vertex_count(), graph.degree(), k)?;
        match args.format {
            Format::Csv => writeln!(out, "{k},{exact},{bound}")?,
            Format::Jsonl => writeln!(out, "{{\"graph\":{:?},\"k\":{k},\"exact\":{exact},\"bound\":{bound:e}}}", spec_name(args))?,
        }
    }
    Ok(0)
}

fn report(args: &ReportArgs) -> Outcome {
    let file = File::open(&args.records).with_context(|| format!("cannot open {}", args.records.display()))?;
    let parsed = read_records(BufReader::new(file))?;
    if !parsed.skipped.is_empty() {
        let lines: Vec<String> = parsed.skipped.iter().map(|(l, _)| l.to_string()).collect();
        eprintln!("{} skipped (malformed lines: {})", parsed.skipped.len(), lines.join(", "));
    }
    if parsed.lines() > 0 && parsed.records.is_empty() {
        eprintln!("no readable records in {}", args.records.display());
        return Ok(EXIT_USAGE);
    }
    let mut out = io::stdout().lock();
    let mut giants = Vec::new();
    for group in group_by_parameters(&parsed.records).values() {
        giants.push(giant_statistics(group)?);
    }
    let mut by_epsilon: std::collections::BTreeMap<u64, Vec<&ExperimentRecord>> = Default::default();
    for r in &parsed.records {
        by_epsilon.entry(r.epsilon.to_bits()).or_default().push(r);
    }
    let fits: Vec<(f64, Result<ScalingFit, Error>)> =
        by_epsilon.values().map(|g| (g[0].epsilon, second_component_scaling(g))).collect();

    match args.format {
        None => {
            writeln!(out, "giant statistics (unique: giant > {UNIQUENESS_FACTOR} x second)")?;
            writeln!(
                out,
                "{:>4} {:>8} {:>6} {:>12} {:>12} {:>12} {:>8} {:>7}  flags",
                "d", "epsilon", "trials", "mean_giant", "std", "2εn/d", "ratio", "unique"
            )?;
            for s in &giants {
                let mut flags = Vec::new();
                if s.degenerate {
                    flags.push("degenerate");
                }
                if s.epsilon_outside_small_regime {
                    flags.push("epsilon>0.3");
                }
                writeln!(
                    out,
                    "{:>4} {:>8} {:>6} {:>12.1} {:>12.1} {:>12.1} {:>8.3} {:>7.2}  {}",
                    s.d, s.epsilon, s.trials, s.mean_giant, s.std_giant, s.predicted, s.ratio, s.uniqueness_rate, flags.join(",")
                )?;
            }
            writeln!(out)?;
            writeln!(out, "second-component scaling (max non-giant size against d)")?;
            for (epsilon, fit) in &fits {
                match fit {
                    Ok(fit) => {
                        for row in &fit.rows {
                            writeln!(
                                out,
                                "epsilon={epsilon} d={:>3} trials={:>4} mean={:>10.1} min={:>8} max={:>8}",
                                row.d, row.trials, row.mean_max_nongiant, row.min_max_nongiant, row.max_max_nongiant
                            )?;
                        }
                        writeln!(
                            out,
                            "epsilon={epsilon} linear slope={:.3} log-log slope={}{}",
                            fit.linear_slope,
                            fit.loglog_slope.map_or("-".to_string(), |s| format!("{s:.3}")),
                            if fit.superlinear { " (super-linear: flagged)" } else { "" }
                        )?;
                    }
                    Err(e) => writeln!(out, "epsilon={epsilon}: {e}")?,
                }
            }
        }
        Some(Format::Csv) => {
            writeln!(out, "d,epsilon,trials,mean_giant,std_giant,predicted,ratio,uniqueness_rate,degenerate,epsilon_outside_small_regime")?;
            for s in &giants {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    s.d, s.epsilon, s.trials, s.mean_giant, s.std_giant, s.predicted, s.ratio, s.uniqueness_rate, s.degenerate, s.epsilon_outside_small_regime
                )?;
            }
            writeln!(out)?;
            writeln!(out, "epsilon,d,trials,mean_max_nongiant,min_max_nongiant,max_max_nongiant,linear_slope,loglog_slope,superlinear")?;
            for fit in fits.iter().filter_map(|(_, f)| f.as_ref().ok()) {
                for row in &fit.rows {
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{}",
                        fit.epsilon,
                        row.d,
                        row.trials,
                        row.mean_max_nongiant,
                        row.min_max_nongiant,
                        row.max_max_nongiant,
                        fit.linear_slope,
                        fit.loglog_slope.map_or(String::new(), |s| s.to_string()),
                        fit.superlinear
                    )?;
                }
            }
        }
        Some(Format::Jsonl) => {
            for s in &giants {
                writeln!(out, "{}", serde_json::to_string(s).context("serializing statistics")?)?;
            }
            for fit in fits.iter().filter_map(|(_, f)| f.as_ref().ok()) {
                writeln!(out, "{}", serde_json::to_string(fit).context("serializing scaling fit")?)?;
            }
        }
    }
    Ok(0)
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Trial(a) => trial(a),
        Command::Verify(a) => verify(a),
        Command::Sprinkle(a) => sprinkle(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Trees(a) => trees(a),
        Command::Report(a) => report(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) if f.error.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
