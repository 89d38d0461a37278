//! `picod`: build, check and benchmark pliable index codes from the command line.
//!
//! Exit codes: 0 success, 1 validation failure, 2 input error, 3 budget or
//! resampling cap exceeded.

mod pipeline;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use picod::collection::{bucket_decomposition, Log2Options};
use picod::encoder::{decode, encode, side_information, validate_encoder};
use picod::instance::{
    complete_two_uniform, gamma, named_example, random_gamma_bounded, random_instance, NamedExample,
};
use picod::oracle::{certify_chain, ChainBudgets};
use picod::{FieldMatrix, PicodInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use pipeline::{build, BuildParams, Strategy};

#[derive(Parser)]
#[command(
    name = "picod",
    version,
    about = "Pliable index codes from conflict-free colorings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance (random, complete 2-uniform, or a named example).
    Gen(GenArgs),
    /// Structural statistics of an instance.
    Stats { instance: PathBuf },
    /// Build an encoder, validate it, and write it out.
    BuildCode(BuildArgs),
    /// Check every receiver against an encoder.
    Verify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Encode random messages and decode them at every receiver.
    DecodeDemo {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Exact parameters of a tiny instance and the ordering between them.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = 2)]
        q: u64,
        /// Longest code length the brute-force search tries.
        #[arg(long)]
        l_max: Option<usize>,
    },
    /// Total colors of the log2 collection over random Γ-bounded ensembles (CSV).
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    min_size: usize,
    #[arg(long, default_value_t = 4)]
    max_size: usize,
    /// Reject edges that would push Γ above this value (`--n` becomes the edge cap).
    #[arg(long)]
    gamma_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, conflicts_with_all = ["m", "example"])]
    complete2: Option<usize>,
    #[arg(long, conflicts_with_all = ["m", "complete2"])]
    example: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Strategy::Indicator)]
    strategy: Strategy,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Field size; defaults to 2, or the smallest prime at least |D| for `mds`.
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Constant of the large-edge palette in the log2 collection.
    #[arg(long, default_value_t = 4.0)]
    c0: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "8,32,128,512")]
    gammas: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long, default_value_t = 300)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    min_size: usize,
    #[arg(long, default_value_t = 2)]
    max_size: usize,
    #[arg(long, default_value_t = 4.0)]
    c0: f64,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Validation(String),
    Input(String),
    Budget(String),
}

impl From<picod::Error> for Failure {
    fn from(e: picod::Error) -> Self {
        match e {
            e if e.is_budget() => Failure::Budget(e.to_string()),
            e @ picod::Error::UnsatisfiedReceiver { .. } => Failure::Validation(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn resolve_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or_else(|| rand::thread_rng().gen());
    eprintln!("seed: {seed}");
    seed
}

fn emit(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn load_instance(path: &Path) -> Result<PicodInstance, Failure> {
    PicodInstance::load(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> Result<FieldMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    FieldMatrix::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn gen(args: GenArgs) -> CliResult {
    let inst = if let Some(name) = &args.example {
        named_example(name.parse::<NamedExample>()?)
    } else if let Some(m) = args.complete2 {
        complete_two_uniform(m)?
    } else {
        let (Some(m), Some(n)) = (args.m, args.n) else {
            return Err(Failure::Input(
                "gen needs --example, --complete2, or both --m and --n".into(),
            ));
        };
        let seed = resolve_seed(args.seed);
        let sizes = (args.min_size, args.max_size);
        match args.gamma_max {
            Some(g) => random_gamma_bounded(m, n, sizes, g, seed)?,
            None => random_instance(m, n, sizes, seed)?,
        }
    };
    emit(&inst.to_json(), args.out.as_deref())
}

fn stats(path: &Path) -> CliResult {
    let inst = load_instance(path)?;
    let profile = gamma(&inst);
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for e in inst.edges() {
        *histogram.entry(e.len()).or_insert(0) += 1;
    }
    let buckets = match bucket_decomposition(&inst) {
        Ok(d) => json!({
            "large": d.large.len(),
            "bands": d.buckets.iter().map(|b| json!({
                "threshold": b.threshold,
                "edges": b.edges.len(),
            })).collect::<Vec<_>>(),
        }),
        Err(_) => serde_json::Value::Null,
    };
    let report = json!({
        "m": inst.m(),
        "n": inst.n(),
        "gamma": profile.gamma,
        "edge_sizes": histogram,
        "kappa": profile.kappa,
        "thresholds": profile.thresholds,
        "buckets": buckets,
    });
    println!("{report}");
    Ok(())
}

fn build_code(args: BuildArgs) -> CliResult {
    let inst = load_instance(&args.instance)?;
    let seed = resolve_seed(args.seed);
    let built = build(
        &inst,
        &BuildParams {
            strategy: args.strategy,
            k: args.k,
            q: args.q,
            seed,
            c0: args.c0,
        },
    )?;
    eprintln!("{}", built.summary);
    if !built.report.valid {
        return Err(Failure::Validation(format!(
            "encoder fails receivers {:?}",
            built.report.failing()
        )));
    }
    emit(&built.matrix.to_json(), args.out.as_deref())
}

fn verify(matrix: &Path, instance: &Path) -> CliResult {
    let inst = load_instance(instance)?;
    let g = load_matrix(matrix)?;
    let report = validate_encoder(&g, &inst)?;
    let out = json!({
        "valid": report.valid,
        "satisfied": report.satisfied_count(),
        "receivers": inst.n(),
        "failing": report.failing(),
        "verdicts": report.verdicts,
    });
    println!("{out}");
    if report.valid {
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "receivers {:?} are not satisfied",
            report.failing()
        )))
    }
}

fn decode_demo(matrix: &Path, instance: &Path, seed: Option<u64>, trials: usize) -> CliResult {
    let inst = load_instance(instance)?;
    let g = load_matrix(matrix)?;
    let seed = resolve_seed(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report = validate_encoder(&g, &inst)?;
    let k = g.k();
    let mut ok = 0;
    let mut attempted = 0;
    for _ in 0..trials {
        let x: Vec<u64> = (0..inst.m() * k).map(|_| rng.gen_range(0..g.q())).collect();
        let y = encode(&g, &x)?;
        for v in report.verdicts.iter().filter(|v| v.satisfied) {
            attempted += 1;
            let side = side_information(&inst, v.receiver, k, &x)?;
            let (d, xd) = decode(v, &g, &inst, &y, &side)?;
            if xd == x[d * k..(d + 1) * k] {
                ok += 1;
            }
        }
    }
    let total = trials * inst.n();
    println!(
        "{}",
        json!({ "seed": seed, "trials": trials, "round_trips": ok, "attempted": attempted, "expected": total })
    );
    if ok == total {
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "{ok} of {total} round trips succeeded"
        )))
    }
}

fn oracle(path: &Path, q: u64, l_max: Option<usize>) -> CliResult {
    let inst = load_instance(path)?;
    let mut budgets = ChainBudgets::exact_for(&inst);
    if let Some(l) = l_max {
        budgets.length = l;
    }
    let report = certify_chain(&inst, q, budgets)?;
    println!("{}", report.to_json());
    match report.chain_ok {
        Some(true) => Ok(()),
        Some(false) => Err(Failure::Validation(report.violations.join("; "))),
        None => Err(Failure::Budget("some search exceeded its budget".into())),
    }
}

fn bench(args: BenchArgs) -> CliResult {
    let seed = resolve_seed(args.seed);
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    println!("gamma,total_colors,seed,attempts,strategy");
    for &target in &args.gammas {
        let mut totals = Vec::new();
        for _ in 0..args.seeds {
            let run_seed: u64 = master.gen();
            let max_edges = args.m * target / 2;
            let inst = random_gamma_bounded(
                args.m,
                max_edges,
                (args.min_size, args.max_size),
                target,
                run_seed,
            )?;
            let opts = Log2Options {
                c0: args.c0,
                ..Log2Options::default()
            };
            let out = picod::collection::build_log2_collection(&inst, run_seed, opts)?;
            let total = out.collection.total_colors();
            totals.push(total);
            println!(
                "{},{},{},{},log2-collection",
                out.gamma, total, run_seed, out.resamples
            );
        }
        totals.sort_unstable();
        if let Some(&median) = totals.get(totals.len() / 2) {
            eprintln!("target gamma {target}: median total colors {median}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Stats { instance } => stats(&instance),
        Command::BuildCode(args) => build_code(args),
        Command::Verify { matrix, instance } => verify(&matrix, &instance),
        Command::DecodeDemo {
            matrix,
            instance,
            seed,
            trials,
        } => decode_demo(&matrix, &instance, seed, trials),
        Command::Oracle { instance, q, l_max } => oracle(&instance, q, l_max),
        Command::Bench(args) => bench(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("budget exceeded: {msg}");
            ExitCode::from(3)
        }
    }
}
