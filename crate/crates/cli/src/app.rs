//! Argument parsing and the command implementations. `run` returns what would
//! go to stdout together with the exit status, so commands can be tested
//! without spawning a process.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use shortcut_frechet::interval::{
    approx_rank_select, count_in_interval_exact, threshold_count_and_sample, ThresholdOutcome,
};
use shortcut_frechet::oracle::{oracle_optimize_discrete, oracle_optimize_semi, OracleVariant};
use shortcut_frechet::semi::decide_semi;
use shortcut_frechet::two_sided::{decide_two_sided_at, witness};
use shortcut_frechet::{
    decide_one_sided, optimize_one_sided, optimize_semi, optimize_two_sided, Backend, HalfOpenInterval, OptimizeConfig,
    PointSeq, PolyCurve, SemiPath, Staircase, Stats,
};

use crate::bench::{self, BenchConfig};
use crate::gen::{generate, GenParams};
use crate::io::{read_curve, read_point_seq, write_instance, InstanceFile, Metadata};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RETRIES: i32 = 3;

/// `--delta` values are squared with this relative slack, so that a radius
/// printed with limited precision still passes at the value it was printed
/// from.
pub const DELTA_SLACK: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "dfds", version, about = "Fréchet distance with shortcuts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Is the distance at most --delta?
    Decide(DecideArgs),
    /// Exact distance with a certificate.
    Optimize(OptimizeArgs),
    /// A pair whose distance has rank close to k.
    Select(SelectArgs),
    /// Pairs with squared distance in (alpha, beta].
    Count(CountArgs),
    /// Write a random instance.
    Gen(GenArgs),
    /// Optimizer against the oracle on a size ladder.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    OneSided,
    TwoSided,
    Semi,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::OneSided => "one-sided",
            Variant::TwoSided => "two-sided",
            Variant::Semi => "semi",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Sampling,
    Hierarchical,
    NaiveCover,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Sampling => Backend::Sampling,
            BackendArg::Hierarchical => Backend::Hierarchical,
            BackendArg::NaiveCover => Backend::NaiveCover,
        }
    }
}

#[derive(Args, Debug)]
pub struct InputArgs {
    #[arg(long, value_enum)]
    pub variant: Variant,
    /// Point sequence A.
    #[arg(short = 'a', long = "a")]
    pub a: PathBuf,
    /// Point sequence B (discrete variants).
    #[arg(short = 'b', long = "b")]
    pub b: Option<PathBuf>,
    /// Polygonal curve (semi-continuous variant).
    #[arg(short = 'f', long = "f")]
    pub f: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, value_enum, default_value = "sampling")]
    pub backend: BackendArg,
    /// Output file instead of stdout.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DecideArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Leash length.
    #[arg(long, required_unless_present = "delta_sq")]
    pub delta: Option<f64>,
    /// Squared leash length, used exactly.
    #[arg(long, conflicts_with = "delta")]
    pub delta_sq: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Interval size target.
    #[arg(short = 'L', long = "L")]
    pub l: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub retries: u32,
    /// Compare with the brute-force oracle (only when m, n <= --verify-cap).
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 40)]
    pub verify_cap: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[arg(short = 'a', long = "a")]
    pub a: PathBuf,
    #[arg(short = 'b', long = "b")]
    pub b: PathBuf,
    /// Target rank, 1-based.
    #[arg(short = 'k')]
    pub k: usize,
    /// Rank tolerance.
    #[arg(short = 'L', long = "L")]
    pub l: usize,
    /// Also report the exact rank range of the returned distance.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(short = 'a', long = "a")]
    pub a: PathBuf,
    #[arg(short = 'b', long = "b")]
    pub b: PathBuf,
    /// Exclusive lower bound on the squared distance.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Inclusive upper bound on the squared distance.
    #[arg(long)]
    pub beta: f64,
    /// Run the randomized threshold test with this L instead of counting.
    #[arg(long)]
    pub threshold: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub m: usize,
    /// Edges of the base curve, and points of B.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub outlier_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for a.json, b.json and f.json.
    #[arg(short = 'o', long, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "one-sided")]
    pub variant: Variant,
    #[arg(long, value_delimiter = ',', default_values_t = [250, 500, 1000, 2000, 4000])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest size the oracle runs on.
    #[arg(long, default_value_t = 4000)]
    pub oracle_max: usize,
    /// Clustered point sets instead of curve samples.
    #[arg(long)]
    pub clustered: bool,
    #[arg(long, value_enum, default_value = "sampling")]
    pub backend: BackendArg,
    #[arg(short = 'L', long = "L")]
    pub l: Option<usize>,
    /// CSV output file instead of stdout.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

/// Parsed input of one of the three problems.
pub enum Problem {
    Discrete(Variant, PointSeq, PointSeq),
    Semi(PointSeq, PolyCurve),
}

impl InputArgs {
    pub fn load(&self) -> Result<Problem> {
        let a = read_point_seq(&self.a)?;
        match self.variant {
            Variant::Semi => {
                let f = self.f.as_ref().ok_or_else(|| anyhow!("--variant semi needs a curve (-f)"))?;
                Ok(Problem::Semi(a, read_curve(f)?))
            }
            v => {
                let b = self.b.as_ref().ok_or_else(|| anyhow!("--variant {} needs -b", v.name()))?;
                Ok(Problem::Discrete(v, a, read_point_seq(b)?))
            }
        }
    }
}

fn staircase_json(s: &Staircase) -> Value {
    json!(s.steps.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>())
}

fn semi_path_json(p: &SemiPath) -> Value {
    json!(p.steps.iter().map(|(i, cp)| json!({"a": i, "edge": cp.edge, "t": cp.t})).collect::<Vec<_>>())
}

/// `x` rounded to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub problem: Variant,
    /// Distance, 12 significant digits.
    pub delta_star: f64,
    pub delta_star_squared: f64,
    pub certificate: Value,
    pub seed: u64,
    pub backend: String,
    pub retry_count: u32,
    pub probes: u64,
    pub bifurcations: u64,
    pub phases: u64,
    pub decisions: u64,
    pub narrowing_rounds: u64,
    pub interval_size_target: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    pub wall_time_ms: f64,
}

impl ResultRecord {
    const CSV_HEADER: &'static str = "problem,delta_star,delta_star_squared,seed,backend,retry_count,probes,bifurcations,phases,decisions,narrowing_rounds,interval_size_target,verified,wall_time_ms";

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.problem.name(),
            self.delta_star,
            self.delta_star_squared,
            self.seed,
            self.backend,
            self.retry_count,
            self.probes,
            self.bifurcations,
            self.phases,
            self.decisions,
            self.narrowing_rounds,
            self.interval_size_target,
            self.verified.map_or(String::new(), |v| v.to_string()),
            self.wall_time_ms
        )
    }
}

pub fn optimize(args: &OptimizeArgs) -> Result<ResultRecord> {
    let problem = args.input.load()?;
    let cfg = OptimizeConfig {
        seed: args.common.seed,
        l: args.l,
        max_retries: args.retries,
        backend: args.common.backend.into(),
        ..OptimizeConfig::default()
    };
    let start = Instant::now();
    let (value, certificate, stats, verified): (f64, Value, Stats, Option<bool>) = match &problem {
        Problem::Discrete(v, a, b) => {
            let small = a.len() <= args.verify_cap && b.len() <= args.verify_cap;
            match v {
                Variant::OneSided => {
                    let r = optimize_one_sided(a, b, &cfg)?;
                    let ok = (args.verify && small)
                        .then(|| oracle_optimize_discrete(a, b, OracleVariant::OneSided) == r.delta_star_sq);
                    (r.delta_star_sq, staircase_json(&r.certificate), r.stats, ok)
                }
                _ => {
                    let r = optimize_two_sided(a, b, &cfg)?;
                    let path = witness(a, b, r.delta_star_sq).context("no staircase at the reported optimum")?;
                    let ok = (args.verify && small)
                        .then(|| oracle_optimize_discrete(a, b, OracleVariant::TwoSided) == r.delta_star_sq);
                    (r.delta_star_sq, staircase_json(&path), r.stats, ok)
                }
            }
        }
        Problem::Semi(a, f) => {
            let r = optimize_semi(a, f, &cfg)?;
            let small = a.len() <= args.verify_cap && f.edge_count() <= args.verify_cap;
            let ok = (args.verify && small).then(|| oracle_optimize_semi(a, f) == r.delta_star_sq);
            (r.delta_star_sq, semi_path_json(&r.certificate), r.stats, ok)
        }
    };
    Ok(ResultRecord {
        problem: args.input.variant,
        delta_star: sig12(value.sqrt()),
        delta_star_squared: value,
        certificate,
        seed: args.common.seed,
        backend: serde_json::to_value(cfg.backend)?.as_str().unwrap_or_default().to_string(),
        retry_count: stats.retries,
        probes: stats.probes,
        bifurcations: stats.bifurcations,
        phases: stats.phases,
        decisions: stats.decisions,
        narrowing_rounds: stats.narrowing_rounds,
        interval_size_target: stats.interval_size_target,
        verified,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn decide(args: &DecideArgs) -> Result<(Value, bool)> {
    let delta_sq = match (args.delta, args.delta_sq) {
        (_, Some(d)) => d,
        (Some(d), None) => d * d * (1.0 + DELTA_SLACK),
        (None, None) => bail!("--delta or --delta-sq is required"),
    };
    if !delta_sq.is_finite() || delta_sq < 0.0 {
        bail!("the leash length must be finite and non-negative");
    }
    let (yes, certificate) = match args.input.load()? {
        Problem::Discrete(Variant::OneSided, a, b) => {
            let d = decide_one_sided(&a, &b, delta_sq);
            (d.is_yes(), d.certificate().map(staircase_json))
        }
        Problem::Discrete(_, a, b) => {
            let yes = decide_two_sided_at(&a, &b, delta_sq, args.common.backend.into());
            (yes, yes.then(|| witness(&a, &b, delta_sq)).flatten().as_ref().map(staircase_json))
        }
        Problem::Semi(a, f) => {
            let d = decide_semi(&a, &f, delta_sq);
            (d.is_yes(), d.certificate().map(semi_path_json))
        }
    };
    let report = json!({
        "answer": if yes { "yes" } else { "no" },
        "variant": args.input.variant,
        "delta_sq": delta_sq,
        "certificate": certificate,
    });
    Ok((report, yes))
}

fn select(args: &SelectArgs) -> Result<Value> {
    let a = read_point_seq(&args.a)?;
    let b = read_point_seq(&args.b)?;
    let ((i, j), value_sq) = approx_rank_select(&a, &b, args.k, args.l, args.common.seed)?;
    let mut out = json!({"pair": [i, j], "value_sq": value_sq, "k": args.k, "L": args.l});
    if args.verify {
        let below = count_in_interval_exact(&a, &b, HalfOpenInterval { lo: f64::NEG_INFINITY, hi: value_sq.next_down() });
        let upto = count_in_interval_exact(&a, &b, HalfOpenInterval { lo: f64::NEG_INFINITY, hi: value_sq });
        out["rank_range"] = json!([below + 1, upto]);
    }
    Ok(out)
}

fn count(args: &CountArgs) -> Result<Value> {
    let a = read_point_seq(&args.a)?;
    let b = read_point_seq(&args.b)?;
    let iv = HalfOpenInterval::new(args.alpha, args.beta)?;
    Ok(match args.threshold {
        None => json!({"count": count_in_interval_exact(&a, &b, iv)}),
        Some(l) => match threshold_count_and_sample(&a, &b, iv, l, args.common.seed)? {
            ThresholdOutcome::AtMostL(est) => json!({"outcome": "at_most_l", "estimate": est}),
            ThresholdOutcome::MoreThanL(s) => json!({"outcome": "more_than_l", "sample": s}),
        },
    })
}

fn gen(args: &GenArgs) -> Result<Value> {
    if args.m == 0 || args.n == 0 {
        bail!("--m and --n must be positive");
    }
    let inst = generate(&GenParams {
        m: args.m,
        n: args.n,
        sigma: args.sigma,
        outlier_frac: args.outlier_frac,
        seed: args.seed,
    });
    fs::create_dir_all(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    let a = InstanceFile::PointSequence {
        points: crate::io::coords(&inst.a),
        metadata: Some(Metadata { outliers: inst.outliers.clone() }),
    };
    let files = [("a.json", a), ("b.json", InstanceFile::sequence(&inst.b)), ("f.json", InstanceFile::curve(&inst.curve))];
    for (name, file) in &files {
        write_instance(&args.output.join(name), file)?;
    }
    Ok(json!({
        "files": files.iter().map(|(name, _)| args.output.join(name)).collect::<Vec<_>>(),
        "outliers": inst.outliers.len(),
    }))
}

fn bench_cmd(args: &BenchArgs) -> Result<(String, String)> {
    let cfg = BenchConfig {
        variant: args.variant,
        sizes: args.sizes.clone(),
        trials: args.trials.max(1),
        seed: args.seed,
        oracle_max: args.oracle_max,
        clustered: args.clustered,
        opt: OptimizeConfig { l: args.l, backend: args.backend.into(), ..OptimizeConfig::default() },
    };
    let rows = bench::run(&cfg)?;
    let mut buf = Vec::new();
    bench::write_csv(&rows, &mut buf)?;
    let mut summary = String::new();
    for (name, time, probes) in bench::slopes(&rows) {
        let show = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        summary += &format!("slope {name}: time {} probes {}\n", show(time), show(probes));
    }
    Ok((String::from_utf8(buf)?, summary))
}

/// Result of one invocation.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn emit(output: &Option<PathBuf>, text: String) -> Result<String> {
    match output {
        Some(path) => {
            write_text(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<shortcut_frechet::Error>() {
        Some(shortcut_frechet::Error::RetriesExhausted { .. }) => EXIT_RETRIES,
        _ => EXIT_USAGE,
    }
}

fn dispatch(cmd: &Command) -> Result<Output> {
    let mut out = Output::default();
    match cmd {
        Command::Decide(args) => {
            let (report, yes) = decide(args)?;
            let text = match args.common.format {
                Format::Json => pretty(&report),
                Format::Csv => format!("answer,variant,delta_sq\n{},{},{}\n", report["answer"].as_str().unwrap(), args.input.variant.name(), report["delta_sq"]),
            };
            out.stdout = emit(&args.common.output, text)?;
            out.code = if yes { EXIT_YES } else { EXIT_NO };
        }
        Command::Optimize(args) => {
            let rec = optimize(args)?;
            let text = match args.common.format {
                Format::Json => serde_json::to_string_pretty(&rec)? + "\n",
                Format::Csv => format!("{}\n{}\n", ResultRecord::CSV_HEADER, rec.csv_row()),
            };
            out.stdout = emit(&args.common.output, text)?;
            if let Some(v) = rec.verified {
                out.stderr = format!("verified: {v}\n");
            }
        }
        Command::Select(args) => out.stdout = emit(&args.common.output, pretty(&select(args)?))?,
        Command::Count(args) => out.stdout = emit(&args.common.output, pretty(&count(args)?))?,
        Command::Gen(args) => out.stdout = pretty(&gen(args)?),
        Command::Bench(args) => {
            let (csv, summary) = bench_cmd(args)?;
            out.stdout = emit(&args.output, csv)?;
            out.stderr = summary;
        }
    }
    Ok(out)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Output { stdout: text, ..Output::default() }
            } else {
                Output { stderr: text, code, ..Output::default() }
            };
        }
    };
    dispatch(&cli.command).unwrap_or_else(|e| Output {
        stdout: String::new(),
        stderr: format!("error: {e:#}\n"),
        code: exit_code(&e),
    })
}
