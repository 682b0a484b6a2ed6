//! `tripart` command-line verbs.
//!
//! Exit codes: 0 success, 1 infeasible / not converged / check failed,
//! 2 usage or IO error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use tripart_core::case::{synth_case, PlanningCase, Scale};
use tripart_core::coordinator::{
    admm_run_with, build_joint_model, solve_joint, default_rho_grid, AdmmConfig, CoordinatorError, SweepRow,
};
use tripart_core::milp::{solve_mip, SolverConfig, Status};
use tripart_core::oracle::{compare_solutions, enumerate_mip, DEFAULT_INTEGER_LIMIT};

use crate::exec::Threaded;
use crate::io::{load_case, read_case, write_case, write_text, IoError};
use crate::plot::write_convergence_svg;
use crate::report::{sweep_csv, write_solution, write_trace_csv, SolutionDocument, SweepLine};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tripart", version, about = "Gas, electricity and RIES expansion planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect or generate case files.
    #[command(subcommand)]
    Case(CaseCommand),
    /// Solve a case.
    #[command(subcommand)]
    Plan(PlanCommand),
}

#[derive(Debug, Subcommand)]
enum CaseCommand {
    /// Parse and check a case file.
    Validate { file: PathBuf },
    /// Write a deterministic synthetic case.
    Synth {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "tiny")]
        scale: Scale,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum PlanCommand {
    /// Centralised planning of all three agents in one model.
    Joint {
        #[arg(long)]
        case: PathBuf,
        #[arg(long, default_value = "tripart-out")]
        out: PathBuf,
    },
    /// Distributed planning coordinated by ADMM.
    Admm(AdmmArgs),
    /// ADMM once per penalty setting.
    Sweep {
        #[arg(long)]
        case: PathBuf,
        /// Comma-separated settings; each is one ρ for all four families or
        /// four values joined by `:` (gn:en:ehg:ehe). Defaults to the
        /// uniform settings 0.1,1,10,100,200 plus four mixed ones.
        #[arg(long)]
        rho_grid: Option<String>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-check branch and bound against enumeration on a small case.
    Oracle {
        #[arg(long)]
        case: PathBuf,
    },
}

#[derive(Debug, Args)]
struct AdmmArgs {
    #[arg(long)]
    case: PathBuf,
    #[arg(long)]
    rho_gn: Option<f64>,
    #[arg(long)]
    rho_en: Option<f64>,
    #[arg(long)]
    rho_ehg: Option<f64>,
    #[arg(long)]
    rho_ehe: Option<f64>,
    #[arg(long)]
    eps_g: Option<f64>,
    #[arg(long)]
    eps_e: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, default_value = "tripart-out")]
    out: PathBuf,
}

impl AdmmArgs {
    /// Flags over case settings over built-in defaults.
    fn config(&self, case: &PlanningCase) -> AdmmConfig {
        let mut c = AdmmConfig::for_case(case);
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut c.rho_gn, self.rho_gn);
        set(&mut c.rho_en, self.rho_en);
        set(&mut c.rho_ehg, self.rho_ehg);
        set(&mut c.rho_ehe, self.rho_ehe);
        set(&mut c.eps_gas, self.eps_g);
        set(&mut c.eps_elec, self.eps_e);
        if let Some(n) = self.max_iters {
            c.max_iters = n;
        }
        c
    }
}

/// Parses `0.1,1,10:10:100:100` into penalty rows.
pub fn parse_rho_grid(text: &str) -> Result<Vec<[f64; 4]>, String> {
    text.split(',')
        .map(|item| {
            let vals = item
                .split(':')
                .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad ρ value `{v}`: {e}")))
                .collect::<Result<Vec<_>, _>>()?;
            match vals.as_slice() {
                [r] => Ok([*r; 4]),
                [a, b, c, d] => Ok([*a, *b, *c, *d]),
                _ => Err(format!("`{item}` must hold one or four values")),
            }
        })
        .collect()
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

macro_rules! say {
    ($w:expr, $($arg:tt)*) => {
        let _ = writeln!($w, $($arg)*);
    };
}

/// Runs the CLI with the given arguments (program name first).
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let mut io = Io { out, err };
    match cli.command {
        Command::Case(CaseCommand::Validate { file }) => validate(&file, &mut io),
        Command::Case(CaseCommand::Synth { seed, scale, out }) => {
            let case = synth_case(seed, scale);
            match write_case(&out, &case) {
                Ok(()) => EXIT_OK,
                Err(e) => io_failure(&e, &mut io),
            }
        }
        Command::Plan(PlanCommand::Joint { case, out }) => joint(&case, &out, &mut io),
        Command::Plan(PlanCommand::Admm(args)) => admm(&args, &mut io),
        Command::Plan(PlanCommand::Sweep {
            case,
            rho_grid,
            max_iters,
            out,
        }) => sweep(&case, rho_grid.as_deref(), max_iters, &out, &mut io),
        Command::Plan(PlanCommand::Oracle { case }) => oracle(&case, &mut io),
    }
}

fn io_failure(e: &IoError, io: &mut Io) -> i32 {
    say!(io.err, "error: {e}");
    EXIT_USAGE
}

fn load(path: &Path, io: &mut Io) -> Result<PlanningCase, i32> {
    match load_case(path) {
        Ok((case, report)) => {
            for w in report.warnings() {
                say!(io.err, "{w}");
            }
            Ok(case)
        }
        Err(e) => Err(io_failure(&e, io)),
    }
}

fn validate(file: &Path, io: &mut Io) -> i32 {
    let case = match read_case(file) {
        Ok(c) => c,
        Err(e) => return io_failure(&e, io),
    };
    let report = tripart_core::case::validate_case(&case);
    let _ = write!(io.out, "{report}");
    if report.is_ok() {
        say!(io.out, "{}: ok", file.display());
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn write_timing(dir: &Path, seconds: f64) -> Result<(), IoError> {
    write_text(&dir.join("timing.json"), &format!("{{\"wall_time_s\": {seconds}}}\n"))
}

fn coordinator_failure(e: &CoordinatorError, io: &mut Io) -> i32 {
    say!(io.err, "error: {e}");
    match e {
        CoordinatorError::Config(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn joint(path: &Path, out: &Path, io: &mut Io) -> i32 {
    let case = match load(path, io) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let start = Instant::now();
    let outcome = match solve_joint(&case, &SolverConfig::default()) {
        Ok(o) => o,
        Err(e) => return coordinator_failure(&e, io),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let Some(plan) = outcome.plan else {
        say!(io.err, "joint model has no feasible point ({:?})", outcome.status);
        return EXIT_FAIL;
    };
    let status = match outcome.status {
        Status::Optimal => "optimal",
        _ => "node_limit",
    };
    let doc = SolutionDocument::new(&case.name, status, plan);
    if let Err(e) = write_solution(&out.join("solution.json"), &doc).and_then(|_| write_timing(out, elapsed)) {
        return io_failure(&e, io);
    }
    let _ = write!(io.out, "{}", doc.cost_table());
    say!(io.out, "status {status}, {elapsed:.2} s, written to {}", out.display());
    if outcome.status == Status::Optimal {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn admm(args: &AdmmArgs, io: &mut Io) -> i32 {
    let case = match load(&args.case, io) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let config = args.config(&case);
    let start = Instant::now();
    let err = &mut *io.err;
    let result = admm_run_with(&case, &config, &Threaded, &mut |r| {
        let _ = writeln!(err, "iter {:>4}  res_gas {:.3e}  res_elec {:.3e}", r.iter, r.res_gas, r.res_elec);
    });
    let (outcome, trace) = match result {
        Ok(r) => r,
        Err(e) => return coordinator_failure(&e, io),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let doc = SolutionDocument::from_admm(&case.name, &outcome, &config);
    let out = &args.out;
    let written = write_solution(&out.join("solution.json"), &doc)
        .and_then(|_| write_trace_csv(&trace, &out.join("trace.csv")))
        .and_then(|_| write_timing(out, elapsed));
    if let Err(e) = written {
        return io_failure(&e, io);
    }
    if let Err(e) = write_convergence_svg(&trace, config.eps_gas, config.eps_elec, &out.join("convergence.svg")) {
        say!(io.err, "error: {e}");
        return EXIT_USAGE;
    }
    let _ = write!(io.out, "{}", doc.cost_table());
    say!(
        io.out,
        "status {}, {} iterations, {elapsed:.2} s, written to {}",
        doc.status,
        outcome.iterations,
        out.display()
    );
    if outcome.converged() {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn sweep(path: &Path, grid: Option<&str>, max_iters: Option<usize>, out: &Path, io: &mut Io) -> i32 {
    let case = match load(path, io) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let grid = match grid.map(parse_rho_grid).unwrap_or_else(|| Ok(default_rho_grid())) {
        Ok(g) => g,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut base = AdmmConfig::for_case(&case);
    if let Some(n) = max_iters {
        base.max_iters = n;
    }
    let mut lines = Vec::with_capacity(grid.len());
    for rho in grid {
        let start = Instant::now();
        let (outcome, trace) = match admm_run_with(&case, &base.with_rho(rho), &Threaded, &mut |_| {}) {
            Ok(r) => r,
            Err(e) => return coordinator_failure(&e, io),
        };
        let last = trace.records.last().copied();
        let row = SweepRow {
            rho,
            status: outcome.status,
            iterations: outcome.iterations,
            objective: outcome.plan.total_cost,
            final_res_gas: last.map_or(f64::NAN, |r| r.res_gas),
            final_res_elec: last.map_or(f64::NAN, |r| r.res_elec),
        };
        let line = SweepLine::new(&row, start.elapsed().as_secs_f64());
        say!(
            io.out,
            "rho {:?}  {}  iterations {:>4}  objective {:.6}",
            rho,
            if line.converged { "converged" } else { "no convergence" },
            line.iterations,
            line.objective
        );
        lines.push(line);
    }
    match write_text(&out.join("sweep.csv"), &sweep_csv(&lines)) {
        Ok(()) => EXIT_OK,
        Err(e) => io_failure(&e, io),
    }
}

fn oracle(path: &Path, io: &mut Io) -> i32 {
    let case = match load(path, io) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let joint = match build_joint_model(&case) {
        Ok(j) => j,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_FAIL;
        }
    };
    let free = joint.model.free_integer_vars().len();
    let reference = match enumerate_mip(&joint.model, DEFAULT_INTEGER_LIMIT) {
        Ok(r) => r,
        Err(e) => {
            say!(io.err, "error: {e} ({free} free integer variables)");
            return EXIT_USAGE;
        }
    };
    let bb = match solve_mip(&joint.model, &SolverConfig::default()) {
        Ok(s) => s,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_FAIL;
        }
    };
    let verdict = compare_solutions(&joint.model, &bb, &reference, 1e-6);
    say!(io.out, "branch and bound {:?} objective {}", bb.status, bb.objective);
    say!(
        io.out,
        "enumeration over {} assignments objective {:?}",
        reference.inner.len(),
        reference.objective
    );
    say!(io.out, "{verdict}");
    if verdict.pass {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}
