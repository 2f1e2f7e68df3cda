//! `subdual`: solve, bound and verify monotone submodular maximization instances.

mod bench;
mod checks;
mod methods;
mod report;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use subdual::dualcert::check_feasible;
use subdual::instances::{
    abc_instance, gap_coverage, gen_coverage, greedy_worstcase, load, save, sweep_models,
    GraphGenSpec,
};
use subdual::truth_lab::{verify_submodular_monotone, OPT_MAX_N, SUBMODULAR_MAX_N};
use subdual::{DualCertificate, Error, Oracle, Tolerances, ValueOracle, WeightedCoverage};

use crate::bench::BenchConfig;
use crate::checks::{failures, run_checks};
use crate::methods::{parse_k_range, parse_methods, run, Method, Outcome};
use crate::report::{Cell, Table};

#[derive(Parser)]
#[command(name = "subdual", version, about = "Submodular maximization with certified upper bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run solvers and bounds on one instance, one CSV row per budget.
    Solve(SolveArgs),
    /// Sweep generator specs, seeds and budgets; write per-run rows and mean ratios.
    Bench(BenchArgs),
    /// Check certificates and bounds, against exhaustive opt when the instance is small.
    Verify(VerifyArgs),
    /// Write a generated or named instance in the coverage text format.
    Gen(GenArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Coverage instance file.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    instance: Option<PathBuf>,
    /// Generator spec, e.g. "model=er n=40 p=0.1 seed=1".
    #[arg(long)]
    gen: Option<String>,
    /// Overrides the generator seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Common {
    /// Relative tolerance for tie-breaking and feasibility checks.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Emit line-delimited JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Budget: `5`, `2,4,8` or `10..40:10`.
    #[arg(long)]
    k: String,
    #[arg(long, default_value = "greedy,pd,gd1,gd2,bqs3,bqs4,topk,opt")]
    methods: String,
    /// Write the primal-dual certificate here (single budget only).
    #[arg(long)]
    emit_cert: Option<PathBuf>,
    /// Write the primal-dual event trace as CSV here (single budget only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Check certificates and bounds; exit 1 on any failure.
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BenchArgs {
    /// Generator spec; repeatable. Defaults to one spec per model at --n and --degree.
    #[arg(long = "gen")]
    specs: Vec<String>,
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Common expected degree of the default specs.
    #[arg(long, default_value_t = 6)]
    degree: usize,
    #[arg(long, default_value = "10..40:10")]
    k: String,
    /// Seeds per spec, starting at --seed.
    #[arg(long, default_value_t = 5)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "greedy,pd,gd1,gd2,bqs3,bqs4,topk")]
    methods: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "SUBDUAL_JOBS")]
    jobs: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    k: String,
    /// Certificate file to check in addition to the computed ones.
    #[arg(long)]
    cert: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Named {
    Gap,
    Abc,
    Worstcase,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, conflicts_with = "named", required_unless_present = "named")]
    gen: Option<String>,
    #[arg(long)]
    named: Option<Named>,
    #[arg(long)]
    seed: Option<u64>,
    /// Budget of the worst-case family.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Good-set weight of the worst-case family; must be divisible by k.
    #[arg(long, default_value_t = 32)]
    x: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit 2 for bad input or I/O, 1 for failed verification.
enum Failure {
    Error(String),
    Verify(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Error(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Error(e)
    }
}

type CliResult = Result<(), Failure>;

fn tolerances(rel: f64) -> Result<Tolerances, Failure> {
    Ok(Tolerances::new(rel, Tolerances::default().eps_abs)?)
}

fn parse_spec(s: &str, seed: Option<u64>) -> Result<GraphGenSpec, Failure> {
    let spec: GraphGenSpec = s.parse()?;
    Ok(match seed {
        Some(seed) => spec.with_seed(seed),
        None => spec,
    })
}

fn load_instance(args: &InstanceArgs) -> Result<(String, WeightedCoverage), Failure> {
    match (&args.instance, &args.gen) {
        (Some(path), _) => Ok((path.display().to_string(), load(path)?)),
        (None, Some(spec)) => {
            let spec = parse_spec(spec, args.seed)?;
            Ok((spec.to_string(), gen_coverage(&spec)?))
        }
        (None, None) => Err(Failure::Error("one of --instance or --gen is required".into())),
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn write_file(path: &PathBuf, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn run_all(
    methods: &[Method],
    f: &Oracle,
    k: usize,
    tol: &Tolerances,
) -> Result<BTreeMap<Method, Outcome>, Failure> {
    let mut out = BTreeMap::new();
    for &m in methods {
        match run(m, f, k, tol)? {
            Some(o) => {
                out.insert(m, o);
            }
            None => eprintln!(
                "note: {m} skipped for k = {k}: n = {} exceeds {OPT_MAX_N}",
                f.ground_size()
            ),
        }
    }
    Ok(out)
}

fn solve_columns() -> Vec<String> {
    let mut cols: Vec<String> = ["instance", "n", "k"].map(String::from).to_vec();
    for m in Method::ALL {
        cols.push(m.to_string());
        if m == Method::Pd {
            cols.push("pd_dual".into());
        }
    }
    for suffix in ["queries", "ms"] {
        cols.extend(Method::ALL.iter().map(|m| format!("{m}_{suffix}")));
    }
    cols.push("cert_check".into());
    cols
}

fn cmd_solve(args: SolveArgs) -> CliResult {
    let tol = tolerances(args.common.tol)?;
    let ks = parse_k_range(&args.k)?;
    let mut methods = parse_methods(&args.methods)?;
    let wants_pd_files = args.emit_cert.is_some() || args.trace.is_some();
    if wants_pd_files {
        if ks.len() != 1 {
            return Err("--emit-cert and --trace need a single budget".to_string().into());
        }
        if !methods.contains(&Method::Pd) {
            methods.push(Method::Pd);
            methods.sort();
        }
    }
    let (label, cov) = load_instance(&args.instance)?;
    let f = cov.into_oracle();
    let n = f.ground_size();

    let mut table = Table::new(solve_columns());
    let mut failed = 0;
    for &k in &ks {
        let outcomes = run_all(&methods, &f, k, &tol)?;
        let mut row: Vec<Cell> = vec![label.as_str().into(), n.into(), k.into()];
        for m in Method::ALL {
            row.push(outcomes.get(&m).map(|o| o.run.value).into());
            if m == Method::Pd {
                let dual = outcomes
                    .get(&m)
                    .and_then(|o| o.pd.as_ref())
                    .map(|pd| pd.certificate.objective);
                row.push(dual.into());
            }
        }
        row.extend(Method::ALL.map(|m| outcomes.get(&m).map(|o| o.run.queries).into()));
        row.extend(Method::ALL.map(|m| outcomes.get(&m).map(|o| o.run.ms).into()));
        let check = if args.verify {
            let fails = failures(&run_checks(&outcomes, &f, k, &tol)?);
            for msg in &fails {
                eprintln!("k = {k}: {msg}");
            }
            failed += fails.len();
            Cell::from(if fails.is_empty() { "ok".to_string() } else { fails.join("; ") })
        } else {
            Cell::Empty
        };
        row.push(check);
        table.push(row);

        if let Some(pd) = outcomes.get(&Method::Pd).and_then(|o| o.pd.as_ref()) {
            if let Some(path) = &args.emit_cert {
                write_file(path, &pd.certificate.to_text())?;
            }
            if let Some(path) = &args.trace {
                write_file(path, &pd.trace.to_csv())?;
            }
        }
    }
    table.write(io::stdout().lock(), args.common.json)?;
    if failed > 0 {
        return Err(Failure::Verify(failed));
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    let tol = tolerances(args.common.tol)?;
    let ks = parse_k_range(&args.k)?;
    let methods = parse_methods(&args.methods)?;
    let specs = if args.specs.is_empty() {
        let probe = sweep_models(args.n, args.degree);
        for s in &probe {
            s.validate()?;
        }
        probe
    } else {
        args.specs
            .iter()
            .map(|s| parse_spec(s, None))
            .collect::<Result<_, _>>()?
    };
    if args.trials == 0 {
        return Err("--trials must be at least 1".to_string().into());
    }
    let cfg = BenchConfig {
        specs,
        ks,
        seeds: (args.seed..args.seed + args.trials).collect(),
        methods,
        tol,
    };
    // Open the output first so an unwritable path fails before any work.
    let out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| Failure::Error(e.to_string()))?;
    let table = pool.install(|| bench::bench(&cfg))?;
    table.write(out, args.common.json)?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> CliResult {
    let tol = tolerances(args.tol)?;
    let ks = parse_k_range(&args.k)?;
    let (label, cov) = load_instance(&args.instance)?;
    let f = cov.into_oracle();
    let n = f.ground_size();
    let mut failed = 0;
    let mut out = io::stdout().lock();
    writeln!(out, "instance {label} (n = {n})")?;

    if n <= SUBMODULAR_MAX_N {
        let rep = verify_submodular_monotone(&f)?;
        match &rep.violation {
            None => writeln!(out, "  submodular and monotone: ok ({} sets)", rep.sets_evaluated)?,
            Some(v) => {
                failed += 1;
                writeln!(out, "  submodular and monotone: FAIL {v:?}")?;
            }
        }
    }
    if n > OPT_MAX_N {
        writeln!(out, "  exhaustive opt skipped: n = {n} exceeds {OPT_MAX_N}")?;
    }
    for &k in &ks {
        let outcomes = run_all(&Method::ALL, &f, k, &tol)?;
        writeln!(out, "k = {k}")?;
        for (m, o) in &outcomes {
            writeln!(out, "  {m:<7} {}", o.run.value)?;
            if let Some(pd) = &o.pd {
                writeln!(out, "  pd_dual {}", pd.certificate.objective)?;
            }
        }
        for (label, reason) in run_checks(&outcomes, &f, k, &tol)? {
            match reason {
                None => writeln!(out, "  check {label}: ok")?,
                Some(r) => {
                    failed += 1;
                    writeln!(out, "  check {label}: FAIL {r}")?;
                }
            }
        }
    }
    if let Some(path) = &args.cert {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Error(format!("{}: {e}", path.display())))?;
        let cert = DualCertificate::from_text(&text, &f)
            .map_err(|e| Failure::Error(format!("{}: {e}", path.display())))?;
        let rep = check_feasible(&cert, &f, &tol)?;
        match rep.reason {
            None => writeln!(
                out,
                "certificate {}: feasible, objective {}",
                path.display(),
                cert.objective
            )?,
            Some(r) => {
                failed += 1;
                writeln!(
                    out,
                    "certificate {}: FAIL violating element {}: {r}",
                    path.display(),
                    rep.violating_element
                )?;
            }
        }
    }
    if failed > 0 {
        writeln!(out, "verify: FAIL ({failed} failed checks)")?;
        return Err(Failure::Verify(failed));
    }
    writeln!(out, "verify: ok")?;
    Ok(())
}

fn cmd_gen(args: GenArgs) -> CliResult {
    let cov = match (&args.gen, args.named) {
        (Some(spec), _) => gen_coverage(&parse_spec(spec, args.seed)?)?,
        (None, Some(Named::Gap)) => gap_coverage(),
        (None, Some(Named::Abc)) => abc_instance(),
        (None, Some(Named::Worstcase)) => greedy_worstcase(args.k, args.x)?,
        (None, None) => return Err("one of --gen or --named is required".to_string().into()),
    };
    match &args.out {
        Some(path) => save(&cov, path)?,
        None => io::stdout().lock().write_all(cov.to_text().as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(n)) => {
            eprintln!("error: {n} verification check(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
