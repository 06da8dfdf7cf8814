//! Command-line front end: `check`, `search`, `demo` and `symdim`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ultrawelch_core::scalar::{
    binomial_valuation, find_field_condition_counterexample, is_prime, parse_rational, Prime,
};
use ultrawelch_core::search::{
    self, Constraints, EquiangularResult, EquiangularStatus, Gamma, Outcome, SearchOptions, SearchResult, SearchSpace,
};
use ultrawelch_core::welch::{check_unital, demo_suite, NamedReport};
use ultrawelch_core::{check_bound, sym_dim, Backend, BoundReport, FrameConfig, Variant, Verdict};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const FIXTURES_ENV: &str = "ULTRAWELCH_FIXTURES";
pub const DEFAULT_FIXTURES: &str = "fixtures/v1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ultrawelch", version, about = "Exact checks and searches for non-Archimedean Welch bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the bound for a configuration file, once per order m.
    Check(CheckArgs),
    /// Search a finite p-adic lattice.
    Search {
        #[command(subcommand)]
        kind: SearchKind,
    },
    /// Emit the curated report bundle.
    Demo(OutArgs),
    /// Print dim Sym^m(K^d) and optionally its p-adic valuation.
    Symdim(SymdimArgs),
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated orders.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub m: Vec<u32>,
    /// Defaults to the variant matching the config's backend.
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Re-read the config over Q_p for this prime.
    #[arg(long)]
    pub prime: Option<u64>,
    /// Use the display that assumes f_j(τ_j) = 1.
    #[arg(long)]
    pub unital: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchCommon {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Maximum number of search nodes.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SearchKind {
    /// Tight families attaining equality in the order-m bound.
    Equality {
        /// Read the SearchSpace from JSON; lattice flags below are then ignored.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "1")]
        a: String,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        precision: u32,
        #[arg(long, default_value_t = 0)]
        scale: u32,
        /// any, common, an integer valuation, or <V for valuations below V.
        #[arg(long, default_value = "any", allow_hyphen_values = true)]
        gamma: Gamma,
        #[arg(long)]
        no_unit_norms: bool,
        #[command(flatten)]
        common: SearchCommon,
    },
    /// n = d² unit-norm tight systems with cross products of size |d|.
    Zauner {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        precision: u32,
        #[command(flatten)]
        common: SearchCommon,
    },
    /// Largest equiangular family up to n-max.
    Equiangular {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "1")]
        a: String,
        #[arg(long, default_value = "any", allow_hyphen_values = true)]
        gamma: Gamma,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        precision: u32,
        #[arg(long, default_value_t = 0)]
        scale: u32,
        #[command(flatten)]
        common: SearchCommon,
    },
}

#[derive(Args, Debug)]
pub struct SymdimArgs {
    pub d: usize,
    pub m: u32,
    #[arg(long)]
    pub prime: Option<u64>,
}

/// Provenance embedded in every report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub input: Option<String>,
    pub params: Value,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub output: Option<String>,
    pub version: String,
}

impl RunManifest {
    fn new(command: &str, params: Value, out: &Option<PathBuf>) -> Self {
        RunManifest {
            command: command.to_string(),
            input: None,
            params,
            seed: None,
            budget: None,
            output: out.as_ref().map(|p| p.display().to_string()),
            version: VERSION.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutput {
    pub manifest: RunManifest,
    pub config: FrameConfig,
    pub reports: Vec<BoundReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutput {
    pub manifest: RunManifest,
    pub result: SearchResult,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquiangularOutput {
    pub manifest: RunManifest,
    pub result: EquiangularResult,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldConditionEntry {
    pub name: String,
    pub prime: Prime,
    pub witness: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymdimRow {
    pub d: usize,
    pub m: u32,
    pub dim: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoBundle {
    pub manifest: RunManifest,
    pub reports: Vec<NamedReport>,
    pub field_condition: Vec<FieldConditionEntry>,
    #[serde(rename = "symdim-table")]
    pub symdim_table: Vec<SymdimRow>,
}

/// Pretty JSON with a trailing newline; the canonical encoding for all output.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn fixtures_dir() -> PathBuf {
    std::env::var_os(FIXTURES_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_FIXTURES))
}

/// Uses `path` as given if it exists, else looks for it in the fixtures directory.
pub fn resolve_input(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    let candidate = fixtures_dir().join(path);
    if candidate.exists() {
        candidate
    } else {
        path.to_path_buf()
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<(PathBuf, T)> {
    let resolved = resolve_input(path);
    let text = fs::read_to_string(&resolved).with_context(|| format!("cannot read {}", resolved.display()))?;
    let value = serde_json::from_str(&text).with_context(|| format!("{}: invalid input", resolved.display()))?;
    Ok((resolved, value))
}

fn emit(text: &str, out: &Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn prime(p: u64) -> anyhow::Result<Prime> {
    if !is_prime(p) {
        bail!("{p} is not prime");
    }
    Ok(Prime::new(p)?)
}

fn cmd_check(args: &CheckArgs) -> anyhow::Result<i32> {
    let (resolved, mut config): (PathBuf, FrameConfig) = read_json(&args.config)?;
    if let Some(p) = args.prime {
        config = config.with_backend(Backend::Padic(prime(p)?))?;
    }
    if args.m.is_empty() {
        bail!("--m needs at least one order");
    }
    let variant = args.variant.unwrap_or_else(|| Variant::for_backend(&config.backend()));
    let mut reports = Vec::with_capacity(args.m.len());
    for &m in &args.m {
        let r = if args.unital { check_unital(&config, m, variant) } else { check_bound(&config, m, variant) };
        reports.push(r?);
    }
    let violated = reports.iter().any(|r| r.verdict == Verdict::Violated);
    let mut manifest = RunManifest::new(
        "check",
        json!({ "m": args.m, "variant": variant, "prime": args.prime, "unital": args.unital }),
        &args.out,
    );
    manifest.input = Some(resolved.display().to_string());
    emit(&to_json(&CheckOutput { manifest, config, reports }), &args.out)?;
    Ok(if violated { EXIT_VIOLATED } else { EXIT_OK })
}

fn options(c: &SearchCommon) -> anyhow::Result<SearchOptions> {
    if c.workers == 0 {
        bail!("--workers must be at least 1");
    }
    Ok(SearchOptions { budget: c.budget, seed: c.seed, workers: c.workers })
}

fn search_manifest(kind: &str, params: Value, c: &SearchCommon) -> RunManifest {
    let mut m = RunManifest::new(&format!("search {kind}"), params, &c.out);
    m.seed = c.seed;
    m.budget = c.budget;
    m
}

fn finish_search(manifest: RunManifest, result: SearchResult, out: &Option<PathBuf>) -> anyhow::Result<i32> {
    let code = if result.outcome == Outcome::Budget { EXIT_BUDGET } else { EXIT_OK };
    emit(&to_json(&SearchOutput { manifest, result }), out)?;
    Ok(code)
}

fn cmd_search(kind: &SearchKind) -> anyhow::Result<i32> {
    match kind {
        SearchKind::Equality { space, prime: p, dim, n, a, m, precision, scale, gamma, no_unit_norms, common } => {
            let (input, space) = match space {
                Some(path) => {
                    let (resolved, s): (PathBuf, SearchSpace) = read_json(path)?;
                    (Some(resolved.display().to_string()), s)
                }
                None => {
                    let (Some(p), Some(d), Some(n)) = (p, dim, n) else {
                        bail!("equality search needs --space or all of --prime, --dim, --n");
                    };
                    let space = SearchSpace {
                        scale: *scale,
                        a: parse_rational(a)?,
                        constraints: Constraints { unit_norms: !no_unit_norms, tight: true, gamma: *gamma },
                        ..SearchSpace::new(prime(*p)?, *precision, *d, *n)
                    };
                    (None, space)
                }
            };
            let params = json!({ "space": space, "m": m, "workers": common.workers });
            let mut manifest = search_manifest("equality", params, common);
            manifest.input = input;
            let result = search::search_equality(&space, *m, &options(common)?)?;
            finish_search(manifest, result, &common.out)
        }
        SearchKind::Zauner { prime: p, dim, precision, common } => {
            if *dim == 0 {
                bail!("--dim must be at least 1");
            }
            let params = json!({ "prime": p, "dim": dim, "precision": precision, "workers": common.workers });
            let manifest = search_manifest("zauner", params, common);
            let result = search::search_zauner(prime(*p)?, *dim, *precision, &options(common)?)?;
            finish_search(manifest, result, &common.out)
        }
        SearchKind::Equiangular { prime: p, dim, a, gamma, n_max, precision, scale, common } => {
            let space = SearchSpace {
                scale: *scale,
                a: parse_rational(a)?,
                constraints: Constraints { unit_norms: true, tight: false, gamma: *gamma },
                ..SearchSpace::new(prime(*p)?, *precision, *dim, *n_max)
            };
            let params = json!({ "space": space, "n_max": n_max, "workers": common.workers });
            let manifest = search_manifest("equiangular", params, common);
            let result = search::search_equiangular(&space, *n_max, &options(common)?)?;
            let code = if result.status == EquiangularStatus::Budget { EXIT_BUDGET } else { EXIT_OK };
            emit(&to_json(&EquiangularOutput { manifest, result }), &common.out)?;
            Ok(code)
        }
    }
}

/// Largest prime covered by the demo's field-condition table.
pub const DEMO_PRIME_LIMIT: u64 = 13;
/// The demo's symdim table covers `1 ≤ d, m ≤` this.
pub const DEMO_SYMDIM_LIMIT: usize = 5;

pub fn demo_bundle(out: &Option<PathBuf>) -> anyhow::Result<DemoBundle> {
    let field_condition = (2..=DEMO_PRIME_LIMIT)
        .filter(|&p| is_prime(p))
        .map(|p| {
            let prime = Prime::new(p)?;
            let witness = find_field_condition_counterexample(&Backend::Padic(prime), p)?;
            Ok(FieldConditionEntry { name: format!("field-condition-counterexample-p{p}"), prime, witness })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut symdim_table = Vec::new();
    for d in 1..=DEMO_SYMDIM_LIMIT {
        for m in 1..=DEMO_SYMDIM_LIMIT as u32 {
            let dim = u64::try_from(sym_dim(d, m)).map_err(|e| anyhow!("{e}"))?;
            symdim_table.push(SymdimRow { d, m, dim });
        }
    }
    let params = json!({ "primes_up_to": DEMO_PRIME_LIMIT, "symdim_up_to": DEMO_SYMDIM_LIMIT });
    Ok(DemoBundle { manifest: RunManifest::new("demo", params, out), reports: demo_suite(), field_condition, symdim_table })
}

fn cmd_symdim(args: &SymdimArgs) -> anyhow::Result<i32> {
    if args.d == 0 || args.m == 0 {
        bail!("d and m must be at least 1");
    }
    let dim = sym_dim(args.d, args.m);
    let mut out = json!({ "d": args.d, "m": args.m, "dim": dim.to_string() });
    if let Some(p) = args.prime {
        let p = prime(p)?;
        let v = binomial_valuation(args.d as u64 + u64::from(args.m) - 1, u64::from(args.m), p)?;
        out["prime"] = json!(p);
        out["valuation"] = json!(v);
    }
    print!("{}", to_json(&out));
    Ok(EXIT_OK)
}

pub fn execute(cli: &Cli) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Search { kind } => cmd_search(kind),
        Command::Demo(args) => {
            emit(&to_json(&demo_bundle(&args.out)?), &args.out)?;
            Ok(EXIT_OK)
        }
        Command::Symdim(args) => cmd_symdim(args),
    }
}

/// Parses arguments, runs, and maps every failure to an exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}
