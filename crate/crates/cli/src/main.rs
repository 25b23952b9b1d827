//! Command-line front end: `solve` runs the full driver, `border-risk`
//! prints the risk threshold below which part of the budget stays
//! uninvested.
//!
//! Exit codes: 0 success, 1 input error, 2 structured solver failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use portopt::oracle::{brute_force_optimum, EnumerationBudget};
use portopt::search::SolveError;
use portopt::testset::TestSetError;
use portopt::{convex, io, ApproxHeuristic, Instance, SolverConfig};

#[derive(Parser)]
#[command(name = "portopt", version, about = "Integer mean-variance portfolio solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Maximize expected return under the budget and risk constraints
    Solve(SolveArgs),
    /// Print the border risk and its supporting asset set
    BorderRisk(BorderArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Heuristic {
    Repair,
    Concentrate,
}

#[derive(Args)]
struct SolveArgs {
    /// Asset CSV: header `ticker,price,return`, one asset per row
    #[arg(short = 'i', long)]
    instance: PathBuf,
    /// Covariance CSV: n rows of n comma-separated reals, no header
    #[arg(short = 'c', long)]
    cov: PathBuf,
    /// Total budget (same monetary unit as the prices)
    #[arg(long)]
    budget: i64,
    /// Admissible risk r0^2 (variance units)
    #[arg(long)]
    risk: f64,
    #[arg(long, default_value_t = 4)]
    max_cuts: usize,
    #[arg(long, default_value_t = 10_000)]
    max_nodes: usize,
    /// Cut-loop stop threshold on the relative excess r_max^2 / r0^2 - 1
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Digits kept when rounding tangent normals
    #[arg(long, default_value_t = 3)]
    prec: u32,
    /// Fictitious-bound step fraction
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Multiply prices, returns and budget by 10^k before solving
    #[arg(long, default_value_t = 0)]
    scale_pow10: u32,
    #[arg(long, value_enum, default_value_t = Heuristic::Repair)]
    approx_heuristic: Heuristic,
    /// Write per-node trace lines to this file
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the report as JSON to this file
    #[arg(long)]
    json: Option<PathBuf>,
    /// Verify the optimum against brute-force enumeration (small instances)
    #[arg(long)]
    oracle_check: bool,
    /// Seed for the multi-start risk-maximization ascent
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BorderArgs {
    #[arg(short = 'i', long)]
    instance: PathBuf,
    #[arg(short = 'c', long)]
    cov: PathBuf,
    /// Budget (the border risk itself does not depend on it)
    #[arg(long, default_value_t = 1)]
    budget: i64,
    #[arg(long, default_value_t = 1.0)]
    risk: f64,
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::BorderRisk(args) => cmd_border_risk(args),
    }
}

fn load(path: &PathBuf, cov: &PathBuf, budget: i64, risk: f64) -> Result<Instance, ExitCode> {
    io::load_instance(path, cov, budget, risk).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}

fn cmd_solve(args: SolveArgs) -> ExitCode {
    let inst = match load(&args.instance, &args.cov, args.budget, args.risk) {
        Ok(inst) => inst,
        Err(code) => return code,
    };
    let inst = match inst.scale(args.scale_pow10) {
        Ok(inst) => inst,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cfg = SolverConfig {
        max_cuts: args.max_cuts,
        max_nodes: args.max_nodes,
        tol: args.tol,
        prec: args.prec,
        alpha: args.alpha,
        seed: args.seed,
        heuristic: match args.approx_heuristic {
            Heuristic::Repair => ApproxHeuristic::Repair,
            Heuristic::Concentrate => ApproxHeuristic::Concentrate,
        },
        trace: args.trace.is_some(),
        ..SolverConfig::default()
    };
    let outcome = match portopt::discrete_optimum(&inst, &cfg) {
        Ok(outcome) => outcome,
        Err(e @ SolveError::TestSet(TestSetError::ResourceExhausted { .. })) => {
            eprintln!("error: {e}");
            eprintln!("hint: allow more cuts (--max-cuts) or a better start point to shrink the polytope");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = &outcome.report;

    let b_sq = (inst.budget as f64) * (inst.budget as f64);
    println!("r0^2       {:.6e}", inst.r0_sq);
    match report.r_max_sq {
        Some(r) => println!("r_max^2    {r:.6e}"),
        None => println!("r_max^2    -"),
    }
    let last = report.phases.last();
    println!("cuts       {}", last.map_or(0, |p| p.cuts));
    println!("basis      {}", last.map_or(0, |p| p.basis));
    let nodes: usize = report.phases.iter().map(|p| p.nodes).sum();
    println!("nodes      {nodes}");
    println!("optimum    {}", format_portfolio(&report.optimum, &report.labels));
    println!("return     {}", report.return_value);
    println!("risk       {:.6e} (relative {:.6e})", report.risk_value, report.risk_value / b_sq);
    println!("invested   {}", report.invested);
    println!("uninvested {}", report.uninvested);
    println!("proven     {}", report.proven);
    if let Some(rb) = report.r_b_sq {
        println!("border     {rb:.6e}");
    }

    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(report).expect("report serializes");
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if let Some(path) = &args.trace {
        let mut text = outcome.trace.join("\n");
        text.push('\n');
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if args.oracle_check {
        let q = inst.quadratic_form();
        match brute_force_optimum(&inst, &q, EnumerationBudget::default()) {
            Ok((_, best_return, count)) => {
                let agree = best_return == report.return_value;
                println!(
                    "oracle     {} (enumerated {count} points, oracle return {best_return})",
                    if agree { "agree" } else { "DISAGREE" }
                );
                if !agree {
                    return ExitCode::from(2);
                }
            }
            Err(e) => println!("oracle     skipped ({e})"),
        }
    }
    ExitCode::SUCCESS
}

fn format_portfolio(x: &[i64], labels: &Option<Vec<String>>) -> String {
    let parts: Vec<String> = x
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(j, &v)| match labels {
            Some(l) => format!("{}={v}", l[j]),
            None => format!("x{}={v}", j + 1),
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" ")
    }
}

fn cmd_border_risk(args: BorderArgs) -> ExitCode {
    let inst = match load(&args.instance, &args.cov, args.budget, args.risk) {
        Ok(inst) => inst,
        Err(code) => return code,
    };
    match convex::border_risk(&inst) {
        Ok(border) => {
            println!("r_b^2      {:.6e}", border.r_b_sq);
            let labels: Vec<String> = border
                .indices
                .iter()
                .map(|&j| match &inst.labels {
                    Some(l) => l[j].clone(),
                    None => format!("x{}", j + 1),
                })
                .collect();
            println!("assets     {}", labels.join(" "));
            if border.warning {
                println!("warning    restricted direction has non-positive components; value is indicative");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
