use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qpartition::gen::{prop1_instance, random_instance, setpartition_instance};
use qpartition::io::{InstanceFile, ResultFile};
use qpartition::model::{AssignmentMatrix, Instance, PartitionVector, SolveResult, Status};
use qpartition::oracle::{
    enumerate_binary, grid_search_two_queue, subset_sum_partition, AlphaSpec, GridSpec,
};
use qpartition::problem::{solve, Params, Problem};
use qpartition::sim::{simulate, SimConfig};
use qpartition::solvers::decide_set_partition;
use qpartition::sweep::{
    parse_pattern, sweep_alpha, sweep_coordinate, sweep_prop1, Range, Slot, Table,
};
use qpartition::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "qpartition", version, about = "Optimal server partitions and customer assignments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve sap, dap, spp, dpp, ksap, kspp or kdpp on an instance file
    Solve(SolveArgs),
    /// Simulate an assignment and report the empirical mean wait
    Simulate(SimulateArgs),
    /// Generate an instance file
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Tabulate objectives over a parameter range as CSV
    Sweep(SweepArgs),
    /// Brute-force references
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
    },
}

#[derive(Args)]
struct SolveArgs {
    problem: String,
    instance: PathBuf,
    /// capacity share of the first queue (sap, dap)
    #[arg(long)]
    alpha: Option<f64>,
    /// comma-separated capacity shares (ksap)
    #[arg(long)]
    alphas: Option<String>,
    /// number of queues (kspp, kdpp)
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// keep equal-mu types separate (dap only)
    #[arg(long)]
    no_merge: bool,
}

#[derive(Args)]
struct SimulateArgs {
    instance: PathBuf,
    /// result file, JSON matrix file, or inline rows such as "1,0;0.2,0.8"
    #[arg(long)]
    assignment: String,
    /// comma-separated capacity shares; defaults to those of a result file
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    horizon: u64,
    /// defaults to a tenth of the horizon
    #[arg(long)]
    warmup: Option<u64>,
    #[arg(long, default_value_t = 30)]
    batches: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenKind {
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        max_load: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Prop1 {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Setpartition {
        #[arg(long)]
        weights: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// sap or dap for alpha and x<i> sweeps, prop1 for t sweeps
    problem: String,
    instance: Option<PathBuf>,
    /// alpha, t, or x<i> (1-based coordinate)
    #[arg(long)]
    param: String,
    /// start:stop:steps
    #[arg(long)]
    range: String,
    /// fixed capacity share for x<i> sweeps
    #[arg(long)]
    alpha: Option<f64>,
    /// assignment pattern with "_" at the swept coordinate, e.g. 1,_,1; repeatable
    #[arg(long)]
    pattern: Vec<String>,
}

#[derive(Subcommand)]
enum OracleKind {
    /// Grid search over two-queue assignments
    Grid {
        instance: PathBuf,
        /// fixed share of the first queue; omit to search it too
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 0.05)]
        coarse_step: f64,
    },
    /// Plain enumeration of deterministic two-queue assignments
    Binary {
        instance: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Equal-sum partition by dynamic programming and by the DAP encoding
    Partition {
        #[arg(long)]
        weights: String,
    },
}

enum Failure {
    Usage(String),
    Infeasible(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(m) => Failure::Infeasible(m),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Gen { kind } => cmd_gen(kind),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle { kind } => cmd_oracle(kind),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(EXIT_INFEASIBLE)
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_instance(path: &Path) -> CliResult<Instance> {
    Ok(InstanceFile::parse(&read_text(path)?)?.to_instance()?)
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("bad number '{p}' in '{s}'")))
        })
        .collect()
}

fn status_code(res: &SolveResult) -> ExitCode {
    match res.status {
        Status::Optimal => ExitCode::SUCCESS,
        Status::Infeasible => ExitCode::from(EXIT_INFEASIBLE),
    }
}

fn cmd_solve(args: SolveArgs) -> CliResult<ExitCode> {
    let problem: Problem = args.problem.parse()?;
    let inst = read_instance(&args.instance)?;
    let params = Params {
        alpha: args.alpha,
        alphas: args.alphas.as_deref().map(parse_list).transpose()?.map(PartitionVector::new).transpose()?,
        k: args.k,
        merge: !args.no_merge,
    };
    let res = solve(problem, &inst, &params)?;
    let note = problem.equivalent().map(|p| p.name());
    let file = ResultFile::from_result(problem.name(), &res, note);
    emit(&file.to_json(), args.out.as_deref())?;
    Ok(status_code(&res))
}

fn parse_assignment(spec: &str) -> CliResult<(AssignmentMatrix, Option<PartitionVector>)> {
    let path = Path::new(spec);
    if path.exists() {
        let text = read_text(path)?;
        if let Ok(file) = ResultFile::parse(&text) {
            return Ok((file.assignment_matrix()?, Some(file.partition()?)));
        }
        let rows: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|_| {
            Failure::Usage(format!("{spec} is neither a result file nor a JSON matrix"))
        })?;
        return Ok((AssignmentMatrix::new(rows)?, None));
    }
    let rows = spec.split(';').map(parse_list).collect::<CliResult<Vec<_>>>()?;
    Ok((AssignmentMatrix::new(rows)?, None))
}

fn cmd_simulate(args: SimulateArgs) -> CliResult<ExitCode> {
    let inst = read_instance(&args.instance)?;
    let (x, from_file) = parse_assignment(&args.assignment)?;
    let alphas = match (&args.alphas, from_file) {
        (Some(s), _) => PartitionVector::new(parse_list(s)?)?,
        (None, Some(a)) => a,
        (None, None) => return Err(Failure::Usage("--alphas is required with an inline assignment".into())),
    };
    let cfg = SimConfig {
        horizon: args.horizon,
        warmup: args.warmup.unwrap_or(args.horizon / 10),
        batches: args.batches,
        seed: args.seed,
    };
    let report = simulate(&inst, &x, &alphas, &cfg)?;
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    emit(&text, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(kind: GenKind) -> CliResult<ExitCode> {
    let (inst, name, out) = match kind {
        GenKind::Random { n, max_load, seed, out } => {
            (random_instance(n, max_load, seed)?, format!("random-n{n}-seed{seed}"), out)
        }
        GenKind::Prop1 { t, out } => (prop1_instance(t)?, format!("prop1-t{t}"), out),
        GenKind::Setpartition { weights, out } => {
            (setpartition_instance(&parse_list(&weights)?)?, format!("setpartition-{weights}"), out)
        }
    };
    emit(&InstanceFile::from_instance(&inst, Some(name)).to_json(), out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> CliResult<ExitCode> {
    let range: Range = args.range.parse()?;
    let instance = || match &args.instance {
        Some(p) => read_instance(p),
        None => Err(Failure::Usage(format!("--param {} needs an instance file", args.param))),
    };
    let table = if args.param == "t" {
        if args.problem != "prop1" {
            return Err(Failure::Usage("--param t applies to the prop1 family only".into()));
        }
        sweep_prop1(&range)?
    } else if args.param == "alpha" {
        sweep_alpha(&instance()?, args.problem.parse()?, &range)?
    } else if let Some(index) = args.param.strip_prefix('x') {
        let index: usize = index
            .parse()
            .map_err(|_| Failure::Usage(format!("bad coordinate in --param {}", args.param)))?;
        let alpha = args
            .alpha
            .ok_or_else(|| Failure::Usage("coordinate sweeps need --alpha".into()))?;
        if args.pattern.is_empty() {
            return Err(Failure::Usage("coordinate sweeps need at least one --pattern".into()));
        }
        let patterns = args.pattern.iter().map(|p| parse_pattern(p)).collect::<Result<Vec<_>, _>>()?;
        for (p, text) in patterns.iter().zip(&args.pattern) {
            if index == 0 || p.get(index - 1) != Some(&Slot::Swept) {
                return Err(Failure::Usage(format!("pattern {text} does not leave x{index} free")));
            }
        }
        let inst = instance()?;
        let sorted = inst.normalize();
        if sorted.instance != inst {
            log::warn!("coordinate sweeps use the instance as given, without sorting or merging");
        }
        sweep_coordinate(&inst, alpha, &patterns, &range)?
    } else {
        return Err(Failure::Usage(format!("unknown sweep parameter '{}'", args.param)));
    };
    write_csv(&table)?;
    Ok(ExitCode::SUCCESS)
}

fn write_csv(table: &Table) -> CliResult<()> {
    let io_err = |e: csv::Error| Failure::Usage(format!("cannot write CSV: {e}"));
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    w.write_record(&table.header).map_err(io_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io_err)?;
    }
    w.flush().map_err(|e| Failure::Usage(format!("cannot write CSV: {e}")))
}

fn cmd_oracle(kind: OracleKind) -> CliResult<ExitCode> {
    match kind {
        OracleKind::Grid {
            instance,
            alpha,
            step,
            coarse_step,
        } => {
            let inst = read_instance(&instance)?;
            let spec = alpha.map_or(AlphaSpec::Free, AlphaSpec::Fixed);
            let grid = GridSpec {
                step,
                coarse_step,
                include_endpoints: true,
            };
            let res = grid_search_two_queue(&inst, spec, &grid)?;
            println!("{}", ResultFile::from_result("grid", &res, None).to_json());
            Ok(status_code(&res))
        }
        OracleKind::Binary { instance, alpha } => {
            let res = enumerate_binary(&read_instance(&instance)?, alpha)?;
            println!("{}", ResultFile::from_result("binary", &res, None).to_json());
            Ok(status_code(&res))
        }
        OracleKind::Partition { weights } => {
            let w = parse_list(&weights)?;
            let dp = subset_sum_partition(&w)?;
            let dap = decide_set_partition(&w)?;
            let mut out = std::io::stdout().lock();
            let _ = writeln!(
                out,
                "{}",
                serde_json::json!({ "weights": w, "dynamic_program": dp, "dap": dap })
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
