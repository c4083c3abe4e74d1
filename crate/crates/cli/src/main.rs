//! `zorich` command line: class tables, verification suites, Lyapunov
//! exponent runs, witness searches, orbit traces, and diagram export.
//!
//! Every command is deterministic given its full configuration (seed
//! included) and embeds that configuration in its JSON output. Exit codes:
//! 0 success, 1 check failure, 2 usage error, 3 witness not found (soft).

use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use zorich::dynamics::IetState;
use zorich::lyapunov::{estimate_exponents, Mode};
use zorich::matrix::RatMatrix;
use zorich::monoid::{
    find_parabolic_witness, find_pinching_witness, find_strong_pinching_witness,
    find_twisting_witness, SearchError,
};
use zorich::rauzy::{all_classes, enumerate_class, DEFAULT_CLASS_CAP};
use zorich::symplectic::genus;
use zorich::verify::run_suite;
use zorich::Permutation;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_FOUND: u8 = 3;

#[derive(Parser)]
#[command(name = "zorich", version, about = "Rauzy classes, Zorich induction, Lyapunov spectra")]
struct Cli {
    /// Plain key=value config file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads for parallel sections (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of all Rauzy classes up to an alphabet size.
    Classes(ClassesArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Estimate Lyapunov exponents of the Zorich cocycle over a class.
    Exponents(ExponentsArgs),
    /// Search for a witness loop in a Rauzy monoid.
    Witness(WitnessArgs),
    /// Trace a Zorich orbit as JSON lines.
    Orbit(OrbitArgs),
    /// Export a Rauzy diagram.
    Diagram(DiagramArgs),
}

#[derive(Args)]
struct ClassesArgs {
    #[arg(long, short = 'd')]
    d_max: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of the named suites, or "all".
    #[arg(long)]
    suite: Option<String>,
    #[arg(long, short = 'd')]
    d_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ExponentsArgs {
    /// Class representative in "top/bottom" text form.
    #[arg(long = "class")]
    class: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// One seed per run; multiple runs execute in parallel.
    #[arg(long, value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    run_cap: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Restricted,
    Extended,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long, value_enum)]
    kind: Option<WitnessKindArg>,
    #[arg(long = "class")]
    class: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
    /// Gap threshold C for pinching / strong pinching.
    #[arg(long)]
    c_value: Option<f64>,
    /// Twisting: dimension of the moved subspace.
    #[arg(long)]
    subspace_dim: Option<usize>,
    /// Twisting: obstacles per instance.
    #[arg(long)]
    obstacle_count: Option<usize>,
    /// Twisting: number of random (F, obstacles) instances.
    #[arg(long)]
    instances: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessKindArg {
    Pinching,
    StrongPinching,
    Twisting,
    Parabolic,
}

#[derive(Args)]
struct OrbitArgs {
    #[arg(long = "class")]
    class: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    run_cap: Option<u64>,
    /// Number mode: float (f64 with per-step normalization) or exact
    /// (rational lengths, no rounding anywhere).
    #[arg(long, value_enum)]
    mode: Option<NumberModeArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NumberModeArg {
    Float,
    Exact,
}

#[derive(Args)]
struct DiagramArgs {
    #[arg(long = "class")]
    class: Option<String>,
    /// json or dot
    #[arg(long)]
    format: Option<String>,
}

/// key=value file, '#' comments allowed.
fn load_config(path: &str) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("config {path}: {e}"))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config {path}:{}: expected key=value", i + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

struct Resolver {
    config: BTreeMap<String, String>,
}

impl Resolver {
    fn get<T: std::str::FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, String> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.config.get(key) {
            Some(s) => s
                .parse::<T>()
                .map_err(|_| format!("config key '{key}': cannot parse '{s}'")),
            None => Ok(default),
        }
    }

    fn get_opt_string(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.config.get(key).cloned())
    }
}

fn emit(out: &Option<String>, payload: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, payload).map_err(|e| format!("write {path}: {e}")),
        None => {
            std::io::stdout()
                .write_all(payload.as_bytes())
                .map_err(|e| e.to_string())
        }
    }
}

fn parse_class(text: &str) -> Result<Permutation, String> {
    let p = Permutation::parse(text).map_err(|e| e.to_string())?;
    if !p.is_irreducible() {
        return Err(format!("{text} is not irreducible"));
    }
    Ok(p)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match load_config(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
        },
        None => BTreeMap::new(),
    };
    let r = Resolver { config };

    if let Some(workers) = cli.workers.or_else(|| {
        r.config
            .get("workers")
            .and_then(|s| s.parse().ok())
    }) {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .is_err()
        {
            eprintln!("error: worker pool already initialized");
            return ExitCode::from(EXIT_USAGE);
        }
    }

    let result = match cli.command {
        Command::Classes(args) => cmd_classes(&r, &cli.out, args),
        Command::Verify(args) => cmd_verify(&r, &cli.out, args),
        Command::Exponents(args) => cmd_exponents(&r, &cli.out, args),
        Command::Witness(args) => cmd_witness(&r, &cli.out, args),
        Command::Orbit(args) => cmd_orbit(&r, &cli.out, args),
        Command::Diagram(args) => cmd_diagram(&r, &cli.out, args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

const D_MAX_CAP: usize = 9;

fn cmd_classes(r: &Resolver, out: &Option<String>, args: ClassesArgs) -> Result<ExitCode, String> {
    let d_max = r.get(args.d_max, "d_max", 4usize)?;
    if !(2..=D_MAX_CAP).contains(&d_max) {
        return Err(format!("d_max must be in 2..={D_MAX_CAP}"));
    }
    let mut rows = Vec::new();
    for d in 2..=d_max {
        for class in all_classes(d, DEFAULT_CLASS_CAP).map_err(|e| e.to_string())? {
            let g = genus(class.representative());
            rows.push(json!({
                "representative": class.representative().to_text(),
                "d": d,
                "size": class.len(),
                "genus": g,
                "minimal": d == 2 * g,
            }));
        }
    }
    let payload = json!({
        "command": "classes",
        "config": { "d_max": d_max },
        "classes": rows,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&payload).unwrap()))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(r: &Resolver, out: &Option<String>, args: VerifyArgs) -> Result<ExitCode, String> {
    let suite = r.get_opt_string(args.suite, "suite").unwrap_or_else(|| "all".into());
    let d_max = r.get(args.d_max, "d_max", 5usize)?;
    let seed = r.get(args.seed, "seed", 1u64)?;
    if !(2..=D_MAX_CAP).contains(&d_max) {
        return Err(format!("d_max must be in 2..={D_MAX_CAP}"));
    }
    let report = if suite == "all" {
        // run the named suites in parallel; output order is fixed
        use rayon::prelude::*;
        let subs: Result<Vec<_>, _> = zorich::verify::SUITES
            .par_iter()
            .map(|s| run_suite(s, d_max, seed))
            .collect();
        let subs = subs.map_err(|e| e.to_string())?;
        let mut merged = zorich::verify::SuiteReport {
            suite: "all".into(),
            d_max,
            seed,
            checks: Vec::new(),
            passed: 0,
            failed: 0,
        };
        for (name, sub) in zorich::verify::SUITES.iter().zip(subs) {
            for c in sub.checks {
                if c.pass {
                    merged.passed += 1;
                } else {
                    merged.failed += 1;
                }
                merged.checks.push(zorich::verify::CheckResult {
                    name: format!("{name}/{}", c.name),
                    pass: c.pass,
                    detail: c.detail,
                });
            }
        }
        merged
    } else {
        run_suite(&suite, d_max, seed).map_err(|e| e.to_string())?
    };
    let ok = report.all_passed();
    let payload = json!({
        "command": "verify",
        "config": { "suite": suite, "d_max": d_max, "seed": seed },
        "report": report,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&payload).unwrap()))?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    })
}

fn cmd_exponents(r: &Resolver, out: &Option<String>, args: ExponentsArgs) -> Result<ExitCode, String> {
    let class_text = r
        .get_opt_string(args.class, "class")
        .ok_or("missing --class")?;
    let rep = parse_class(&class_text)?;
    let mode = match args.mode {
        Some(ModeArg::Restricted) => Mode::Restricted,
        Some(ModeArg::Extended) => Mode::Extended,
        None => match r.config.get("mode").map(|s| s.as_str()) {
            Some("extended") => Mode::Extended,
            Some("restricted") | None => Mode::Restricted,
            Some(other) => return Err(format!("unknown mode '{other}'")),
        },
    };
    let seeds = match args.seed {
        Some(s) => s,
        None => vec![r.get(None, "seed", 1u64)?],
    };
    let steps = r.get(args.steps, "steps", 1_000_000u64)?;
    let burn_in = r.get(args.burn_in, "burn_in", steps / 100)?;
    let run_cap = r.get(args.run_cap, "run_cap", zorich::lyapunov::DEFAULT_RUN_CAP)?;

    use rayon::prelude::*;
    let mut seeds_sorted = seeds;
    seeds_sorted.sort_unstable();
    let reports: Result<Vec<_>, _> = seeds_sorted
        .par_iter()
        .map(|&seed| estimate_exponents(&rep, mode, seed, steps, burn_in, run_cap))
        .collect();
    let reports = reports.map_err(|e| e.to_string())?;
    let all_valid = reports.iter().all(|rep| rep.valid);
    let payload = json!({
        "command": "exponents",
        "config": {
            "class": class_text, "mode": mode, "seeds": seeds_sorted,
            "steps": steps, "burn_in": burn_in, "run_cap": run_cap,
        },
        "reports": reports,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&payload).unwrap()))?;
    Ok(if all_valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    })
}

fn cmd_witness(r: &Resolver, out: &Option<String>, args: WitnessArgs) -> Result<ExitCode, String> {
    let class_text = r
        .get_opt_string(args.class, "class")
        .ok_or("missing --class")?;
    let rep = parse_class(&class_text)?;
    let class = enumerate_class(&rep, DEFAULT_CLASS_CAP).map_err(|e| e.to_string())?;
    let kind = match args.kind {
        Some(k) => k,
        None => match r.config.get("kind").map(|s| s.as_str()) {
            Some("pinching") => WitnessKindArg::Pinching,
            Some("strong-pinching") => WitnessKindArg::StrongPinching,
            Some("twisting") => WitnessKindArg::Twisting,
            Some("parabolic") => WitnessKindArg::Parabolic,
            Some(other) => return Err(format!("unknown witness kind '{other}'")),
            None => return Err("missing --kind".into()),
        },
    };
    let seed = r.get(args.seed, "seed", 1u64)?;
    let budget = r.get(args.budget, "budget", 2000u64)?;
    // the log-ratio chain of strong pinching needs a much smaller default
    // threshold than the multiplicative gaps of plain pinching
    let default_c = match kind {
        WitnessKindArg::StrongPinching => 5.0f64,
        _ => 1000.0f64,
    };
    let c_value = r.get(args.c_value, "c_value", default_c)?;

    let mut soft_missing = false;
    let results: Vec<Value> = match kind {
        WitnessKindArg::Pinching => {
            match find_pinching_witness(&class, 0, c_value, budget, seed) {
                Ok(w) => vec![serde_json::to_value(w).unwrap()],
                Err(SearchError::NotFound) => {
                    soft_missing = true;
                    vec![]
                }
                Err(e) => return Err(e.to_string()),
            }
        }
        WitnessKindArg::StrongPinching => {
            match find_strong_pinching_witness(&class, 0, c_value, budget, seed) {
                Ok(w) => vec![serde_json::to_value(w).unwrap()],
                Err(SearchError::NotFound) => {
                    soft_missing = true;
                    vec![]
                }
                Err(e) => return Err(e.to_string()),
            }
        }
        WitnessKindArg::Parabolic => match find_parabolic_witness(&class, seed, budget) {
            Ok(w) => vec![serde_json::to_value(w).unwrap()],
            Err(SearchError::NotFound) => {
                soft_missing = true;
                vec![]
            }
            Err(e) => return Err(e.to_string()),
        },
        WitnessKindArg::Twisting => {
            let d = class.d();
            let k = r.get(args.subspace_dim, "subspace_dim", d / 2)?;
            let obstacle_count = r.get(args.obstacle_count, "obstacle_count", 3usize)?;
            let instances = r.get(args.instances, "instances", 5usize)?;
            if k == 0 || k >= d {
                return Err("subspace_dim must be in 1..d".into());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out_vec = Vec::new();
            for instance in 0..instances {
                let f = random_subspace(&mut rng, d, k);
                let obstacles: Vec<RatMatrix> = (0..obstacle_count)
                    .map(|_| random_subspace(&mut rng, d, d - k))
                    .collect();
                match find_twisting_witness(&class, 0, &f, &obstacles, budget, seed + instance as u64)
                {
                    Ok(w) => out_vec.push(serde_json::to_value(w).unwrap()),
                    Err(SearchError::NotFound) => {
                        soft_missing = true;
                    }
                    Err(e) => return Err(e.to_string()),
                }
            }
            out_vec
        }
    };

    let kind_name = match kind {
        WitnessKindArg::Pinching => "pinching",
        WitnessKindArg::StrongPinching => "strong-pinching",
        WitnessKindArg::Twisting => "twisting",
        WitnessKindArg::Parabolic => "parabolic",
    };
    let payload = json!({
        "command": "witness",
        "config": {
            "class": class_text, "kind": kind_name, "seed": seed,
            "budget": budget, "c_value": c_value,
        },
        "found": !soft_missing,
        "witnesses": results,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&payload).unwrap()))?;
    Ok(if soft_missing {
        ExitCode::from(EXIT_NOT_FOUND)
    } else {
        ExitCode::SUCCESS
    })
}

/// Random full-rank d x k rational matrix with small integer entries.
fn random_subspace(rng: &mut ChaCha8Rng, d: usize, k: usize) -> RatMatrix {
    loop {
        let m = RatMatrix::from_fn(d, k, |_, _| {
            zorich::matrix::Rat::from_integer(rng.random_range(-9i64..=9).into())
        });
        if m.rank() == k {
            return m;
        }
    }
}

fn cmd_orbit(r: &Resolver, out: &Option<String>, args: OrbitArgs) -> Result<ExitCode, String> {
    let class_text = r
        .get_opt_string(args.class, "class")
        .ok_or("missing --class")?;
    let rep = parse_class(&class_text)?;
    let seed = r.get(args.seed, "seed", 1u64)?;
    let steps = r.get(args.steps, "steps", 100u64)?;
    let run_cap = r.get(args.run_cap, "run_cap", zorich::lyapunov::DEFAULT_RUN_CAP)?;
    let mode = match args.mode {
        Some(NumberModeArg::Float) => "float",
        Some(NumberModeArg::Exact) => "exact",
        None => match r.config.get("mode").map(|s| s.as_str()) {
            Some("exact") => "exact",
            Some("float") | None => "float",
            Some(other) => return Err(format!("unknown orbit mode '{other}' (float|exact)")),
        },
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::with_capacity(steps as usize + 1);
    lines.push(
        json!({
            "config": {
                "class": class_text, "seed": seed, "steps": steps,
                "run_cap": run_cap, "mode": mode,
            }
        })
        .to_string(),
    );
    let mut code = ExitCode::SUCCESS;
    if mode == "exact" {
        let lambda = zorich::dynamics::sample_lambda_rat(&mut rng, rep.d(), 128);
        let mut state = IetState::new(lambda, rep).map_err(|e| e.to_string())?;
        for step in 0..steps {
            match state.zorich_step(run_cap) {
                Ok(rec) => {
                    let lambda: Vec<String> =
                        state.lambda.iter().map(|l| l.to_string()).collect();
                    lines.push(
                        json!({
                            "step": step,
                            "m": rec.m,
                            "kind": rec.kind.letter().to_string(),
                            "winner": state.perm.alphabet().letter(rec.winner).to_string(),
                            "lambda": lambda,
                            "matrix_norm_log": rec.log_norm(),
                        })
                        .to_string(),
                    );
                }
                Err(e) => {
                    lines.push(json!({ "step": step, "error": e.to_string() }).to_string());
                    code = ExitCode::from(EXIT_CHECK_FAILED);
                    break;
                }
            }
        }
    } else {
        let lambda = zorich::dynamics::sample_lambda_f64(&mut rng, rep.d());
        let mut state = IetState::new(lambda, rep).map_err(|e| e.to_string())?;
        for step in 0..steps {
            match state.zorich_step(run_cap) {
                Ok(rec) => {
                    let total: f64 = state.lambda.iter().sum();
                    for l in state.lambda.iter_mut() {
                        *l /= total;
                    }
                    lines.push(
                        json!({
                            "step": step,
                            "m": rec.m,
                            "kind": rec.kind.letter().to_string(),
                            "winner": state.perm.alphabet().letter(rec.winner).to_string(),
                            "lambda": state.lambda,
                            "matrix_norm_log": rec.log_norm(),
                        })
                        .to_string(),
                    );
                }
                Err(e) => {
                    lines.push(json!({ "step": step, "error": e.to_string() }).to_string());
                    code = ExitCode::from(EXIT_CHECK_FAILED);
                    break;
                }
            }
        }
    }
    emit(out, &format!("{}\n", lines.join("\n")))?;
    Ok(code)
}

fn cmd_diagram(r: &Resolver, out: &Option<String>, args: DiagramArgs) -> Result<ExitCode, String> {
    let class_text = r
        .get_opt_string(args.class, "class")
        .ok_or("missing --class")?;
    let rep = parse_class(&class_text)?;
    let format = r
        .get_opt_string(args.format, "format")
        .unwrap_or_else(|| "json".into());
    let class = enumerate_class(&rep, DEFAULT_CLASS_CAP).map_err(|e| e.to_string())?;
    let payload = match format.as_str() {
        "json" => {
            let body = json!({
                "command": "diagram",
                "config": { "class": class_text, "format": "json" },
                "diagram": class.to_json(),
            });
            format!("{}\n", serde_json::to_string_pretty(&body).unwrap())
        }
        "dot" => class.to_dot(),
        other => return Err(format!("unknown format '{other}' (json|dot)")),
    };
    emit(out, &payload)?;
    Ok(ExitCode::SUCCESS)
}
