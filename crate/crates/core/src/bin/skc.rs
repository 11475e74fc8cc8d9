use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use skc::bench::{self, BenchConfig};
use skc::commutator::{max_commutator_angle, SkConstants};
use skc::engine::{DepthMode, EngineConfig, LENGTH_EXPONENT, TIME_EXPONENT};
use skc::net::{NetConfig, DEFAULT_DEDUPE_TOL, DEFAULT_MAX_ENTRIES};
use skc::target::parse_target;
use skc::verify::{self, VerifyConfig};
use skc::{BasicNet, Compiler, Error, InstructionSet, Order};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFY: u8 = 3;

/// Solovay-Kitaev compiler for SU(2) and SU(d) instruction sets.
#[derive(Parser)]
#[command(name = "skc", version)]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Basic-approximation nets.
    #[command(subcommand)]
    Net(NetCommand),
    /// Compile one target.
    Compile(CompileArgs),
    /// Compile Haar-random targets at every depth and fit scaling exponents.
    Bench(BenchArgs),
    /// Run the randomized property suites.
    Verify(VerifyArgs),
    /// Print the recursion constants for a dimension.
    Constants(ConstantsArgs),
}

#[derive(Subcommand)]
enum NetCommand {
    /// Enumerate, audit and save a net.
    Build(NetBuildArgs),
}

#[derive(Args)]
struct NetBuildArgs {
    /// Gate-set JSON file, or `clifford-t` for the built-in H, T, T_dag set.
    #[arg(long)]
    gateset: String,
    #[arg(long)]
    l0: usize,
    /// Deduplication tolerance.
    #[arg(long, default_value_t = DEFAULT_DEDUPE_TOL)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
    /// Haar samples for the eps0 audit; 0 skips it.
    #[arg(long, default_value_t = 1000)]
    audit_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
    max_entries: usize,
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long, default_value = "calibrated")]
    mode: DepthMode,
    /// Largest eps0 accepted in calibrated mode.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = skc::engine::DEFAULT_DEPTH_CAP)]
    depth_cap: usize,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// `I`, a gate name, `rx(..)`/`ry(..)`/`rz(..)`, or a matrix file.
    #[arg(long)]
    target: String,
    #[arg(long, conflicts_with = "eps", required_unless_present = "eps")]
    depth: Option<usize>,
    /// Target accuracy; the depth is chosen from the predicted error.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value = "product")]
    order: Order,
    /// Seed for the calibration probe used with `--eps`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 10)]
    targets: usize,
    #[arg(long, default_value_t = 4)]
    n_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 10_000)]
    comm_samples: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long)]
    json: bool,
}

enum Failure {
    Lib(Error),
    Verify(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Net(NetCommand::Build(a)) => net_build(a),
        Command::Compile(a) => compile(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Constants(a) => constants(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(n)) => {
            eprintln!("error: {n} verification check(s) failed");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            if let Error::NetTooCoarse { mode: "strict", .. } = e {
                eprintln!("hint: --mode calibrated accepts nets up to the practical threshold");
            }
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE })
        }
    }
}

fn load_gateset(spec: &str) -> skc::Result<InstructionSet> {
    if spec == "clifford-t" && !std::path::Path::new(spec).exists() {
        return Ok(InstructionSet::clifford_t());
    }
    InstructionSet::load(spec, &Default::default())
}

fn net_build(a: NetBuildArgs) -> CmdResult {
    let set = Arc::new(load_gateset(&a.gateset)?);
    let config = NetConfig {
        dedupe_tol: a.tol,
        max_entries: a.max_entries,
        ..NetConfig::default()
    };
    let start = Instant::now();
    let mut net = BasicNet::build(set, a.l0, &config)?;
    let build_time = start.elapsed().as_secs_f64();
    println!("entries\t{}", net.len());
    println!("l0\t{}", net.l0());
    println!("fingerprint\t{}", net.set_fingerprint());
    if a.audit_samples > 0 {
        let (max, mean) = net.audit(a.audit_samples, a.seed)?;
        println!("eps0\t{max:.6}");
        println!("eps0_mean\t{mean:.6}");
    }
    net.save(&a.out)?;
    if a.timings {
        println!("build_seconds\t{build_time:.3}");
    }
    Ok(())
}

fn compiler(a: &EngineArgs) -> skc::Result<Compiler> {
    let net = BasicNet::load_standalone(&a.net, &NetConfig::default())?;
    let mut config = EngineConfig::for_dim(net.dim()).with_mode(a.mode);
    if let Some(t) = a.threshold {
        config.calibrated_threshold = t;
    }
    config.depth_cap = a.depth_cap;
    Compiler::new(Arc::new(net), config)
}

const PROBE_SAMPLES: usize = 8;
const PROBE_DEPTH: usize = 2;

fn compile(a: CompileArgs) -> CmdResult {
    let compiler = compiler(&a.engine)?;
    let set = compiler.net().set().clone();
    let u = parse_target(&a.target, &set)?;
    let (report, c) = match (a.depth, a.eps) {
        (Some(n), _) => {
            let c = (a.engine.mode == DepthMode::Strict).then(|| compiler.config().constants.c_approx);
            (compiler.compile_with(&u, n, c)?, c)
        }
        (None, Some(eps)) => {
            let c = match a.engine.mode {
                DepthMode::Strict => compiler.config().constants.c_approx,
                DepthMode::Calibrated => compiler.calibrate(PROBE_SAMPLES, PROBE_DEPTH, a.seed)?,
            };
            let mut n = compiler.choose_depth(eps, c)?;
            loop {
                let report = compiler.compile_with(&u, n, Some(c))?;
                if report.measured_eps <= eps {
                    break (report, Some(c));
                }
                if n >= compiler.config().depth_cap {
                    return Err(Error::Unreachable {
                        target: eps,
                        cap: compiler.config().depth_cap,
                    }
                    .into());
                }
                log::info!("depth {n} reached {:.3e}; trying {}", report.measured_eps, n + 1);
                n += 1;
            }
        }
        (None, None) => unreachable!("clap requires --depth or --eps"),
    };
    let sequence = set.format_sequence(&report.sequence, a.order);
    if a.json {
        let mut doc = json!({
            "target": a.target,
            "mode": a.engine.mode.name(),
            "order": a.order,
            "depth": report.depth,
            "eps0": compiler.eps0(),
            "fitted_c": c,
            "predicted_eps": report.predicted_eps,
            "measured_eps": report.measured_eps,
            "raw_length": report.raw_length,
            "simplified_length": report.simplified_length,
            "evaluations": report.evaluations,
            "sequence": sequence,
        });
        if a.timings {
            doc["level_wall_times"] = json!(report.level_wall_times);
        }
        println!("{}", serde_json::to_string_pretty(&doc).map_err(Error::from)?);
    } else {
        println!("depth\t{}", report.depth);
        if let Some(p) = report.predicted_eps {
            println!("predicted_eps\t{p:.6e}");
        }
        println!("measured_eps\t{:.6e}", report.measured_eps);
        println!("raw_length\t{}", report.raw_length);
        println!("simplified_length\t{}", report.simplified_length);
        if a.timings {
            let t: Vec<String> = report.level_wall_times.iter().map(|x| format!("{x:.6}")).collect();
            println!("level_wall_times\t{}", t.join(","));
        }
        println!("sequence\t{sequence}");
    }
    Ok(())
}

fn bench_cmd(a: BenchArgs) -> CmdResult {
    let compiler = compiler(&a.engine)?;
    let c = match a.engine.mode {
        DepthMode::Strict => compiler.config().constants.c_approx,
        DepthMode::Calibrated => compiler.calibrate(PROBE_SAMPLES, PROBE_DEPTH, a.seed.wrapping_add(1))?,
    };
    let config = BenchConfig {
        targets: a.targets,
        n_max: a.n_max,
        seed: a.seed,
        timings: a.timings,
        keep_sequences: false,
        c: Some(c),
    };
    let out = bench::run(&compiler, &config)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&out).map_err(Error::from)?);
    } else {
        print!("{}", bench::to_tsv(&out));
    }
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> CmdResult {
    let cfg = VerifyConfig {
        seed: a.seed,
        samples: a.samples,
        comm_samples: a.comm_samples,
    };
    let results = verify::run_all(&cfg)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&results).map_err(Error::from)?);
    } else {
        for r in &results {
            println!(
                "{}\t{}\ttrials={}\tworst={:.6e}\tlimit={:.6e}",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                r.trials,
                r.worst,
                r.limit
            );
        }
    }
    match results.iter().filter(|r| !r.passed).count() {
        0 => Ok(()),
        n => Err(Failure::Verify(n)),
    }
}

fn constants(a: ConstantsArgs) -> CmdResult {
    if a.dim < 2 {
        return Err(Error::InvalidArgument("dimension must be at least 2".into()).into());
    }
    let k = SkConstants::for_dim(a.dim);
    let theta_max = max_commutator_angle();
    if a.json {
        let doc = json!({
            "constants": k,
            "theta_max": theta_max,
            "length_exponent": LENGTH_EXPONENT,
            "time_exponent": TIME_EXPONENT,
        });
        println!("{}", serde_json::to_string_pretty(&doc).map_err(Error::from)?);
    } else {
        println!("dim\t{}", k.dim);
        println!("c_gc\t{:.12}", k.c_gc);
        println!("c_approx\t{:.12}", k.c_approx);
        println!("c1\t{:.12}", k.c1);
        println!("c_gc_prime\t{:.12}", k.c_gc_prime);
        println!("c_gc_dprime\t{:.12}", k.c_gc_dprime);
        println!("eps0_bound\t{:.12}", k.eps0_bound);
        println!("balance_slack\t{}", k.balance_slack);
        println!("residual_slack\t{}", k.residual_slack);
        println!("theta_max\t{theta_max:.12}");
        println!("length_exponent\t{LENGTH_EXPONENT:.12}");
        println!("time_exponent\t{TIME_EXPONENT:.12}");
    }
    Ok(())
}
