use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elrkfv_harness::golden::{golden_compare, read_golden, Norm, Tolerance};
use elrkfv_harness::output::{write_report, write_run, write_sweep_csv};
use elrkfv_harness::study::{cfl_sweep, convergence_study, final_error, reference_solution};
use elrkfv_harness::{configure_threads, HarnessError, RunConfig, State};

#[derive(Parser)]
#[command(name = "elrkfv", version, about = "EL-RK-FV convection-diffusion solver driver")]
struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem to its final time.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Mesh-refinement study, or a CFL sweep at fixed mesh.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Mesh sizes of the ladder.
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        ns: Vec<usize>,
        #[arg(long, value_enum)]
        sweep: Option<SweepKind>,
        /// CFL numbers of a sweep.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4,8,12,16,20")]
        cfls: Vec<f64>,
        #[command(flatten)]
        reference: ReferenceArgs,
    },
    /// Rerun a stored table and compare against it.
    Golden {
        /// Golden CSV with `# key=value` run settings on top.
        table: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Errors pass within this multiplicative factor.
        #[arg(long, default_value_t = 3.0)]
        error_factor: f64,
        /// Orders pass within this additive tolerance.
        #[arg(long, default_value_t = 0.35)]
        order_tol: f64,
        /// Norms to compare.
        #[arg(long, value_delimiter = ',', default_value = "l1,l2,linf")]
        norms: Vec<NormArg>,
        /// Only compare orders.
        #[arg(long)]
        orders_only: bool,
        #[command(flatten)]
        reference: ReferenceArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Cfl,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L1,
    L2,
    Linf,
}

#[derive(Args)]
struct ReferenceArgs {
    /// Mesh of the reference solution for problems without an exact one.
    #[arg(long)]
    reference_n: Option<usize>,
    #[arg(long)]
    reference_cfl: Option<f64>,
}

#[derive(Args)]
struct Common {
    /// `key=value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    tfinal: Option<f64>,
    /// forward-euler, ssp-rk3, rk4 or IMEX(s,sigma,p).
    #[arg(long)]
    scheme: Option<String>,
    /// strang, fourth-order or none.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    gauss_order: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated snapshot times.
    #[arg(long)]
    snapshots: Option<String>,
    /// L2 scaling: root or displayed.
    #[arg(long)]
    l2: Option<String>,
}

impl Common {
    fn build(&self, mut cfg: RunConfig) -> Result<RunConfig, HarnessError> {
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags: [(&str, Option<String>); 10] = [
            ("problem", self.problem.clone()),
            ("n", self.n.map(|v| v.to_string())),
            ("cfl", self.cfl.map(|v| v.to_string())),
            ("tfinal", self.tfinal.map(|v| v.to_string())),
            ("scheme", self.scheme.clone()),
            ("split", self.split.clone()),
            ("gauss-order", self.gauss_order.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("snapshots", self.snapshots.clone()),
            ("l2", self.l2.clone()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        Ok(cfg)
    }
}

fn reference(cfg: &RunConfig, args: &ReferenceArgs, n: Option<usize>, cfl: Option<f64>) -> Result<Option<State>, HarnessError> {
    let n = args.reference_n.or(n);
    let cfl = args.reference_cfl.or(cfl);
    match n {
        Some(n) => {
            log::info!("computing reference solution on N = {n}");
            Ok(Some(reference_solution(cfg, n, cfl.unwrap_or(cfg.cfl))?))
        }
        None => Ok(None),
    }
}

fn print_rows(rows: &[elrkfv_harness::ConvergenceRow]) {
    let o = |v: Option<f64>| v.map(|x| format!("{x:6.2}")).unwrap_or_else(|| "     -".into());
    println!("{:>6} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6}", "N", "L1", "order", "L2", "order", "Linf", "order");
    for r in rows {
        println!(
            "{:>6} {:>12.3e} {} {:>12.3e} {} {:>12.3e} {}",
            r.n,
            r.l1,
            o(r.l1_order),
            r.l2,
            o(r.l2_order),
            r.linf,
            o(r.linf_order)
        );
    }
}

enum Outcome {
    Pass,
    GoldenFailure,
}

fn execute(cli: Cli) -> Result<Outcome, HarnessError> {
    match cli.command {
        Command::Run { common } => {
            let cfg = common.build(RunConfig::default())?;
            let res = cfg.resolve()?;
            let out = elrkfv_harness::run::run_resolved(&cfg, &res)?;
            let err = final_error(&cfg, &res, &out, None).ok();
            println!(
                "{}: N = {}, dt = {:.6e}, {} steps, t = {}, {:.2} s",
                cfg.problem,
                cfg.n,
                out.dt,
                out.steps,
                out.final_state.time(),
                out.wall_time
            );
            println!(
                "mass {:.15e} -> {:.15e}, range [{:.6e}, {:.6e}]",
                out.initial_state.mass(),
                out.final_state.mass(),
                out.min_value,
                out.max_value
            );
            if let Some(e) = err {
                println!("L1 = {:.6e}, L2 = {:.6e}, Linf = {:.6e}", e.l1, e.l2, e.linf);
            }
            if let Some(dir) = &cfg.out {
                write_run(dir, &cfg, &out, err)?;
            }
            Ok(Outcome::Pass)
        }
        Command::Converge {
            common,
            ns,
            sweep,
            cfls,
            reference: rargs,
        } => {
            let cfg = common.build(RunConfig::default())?;
            cfg.resolve()?;
            let refsol = reference(&cfg, &rargs, None, None)?;
            match sweep {
                Some(SweepKind::Cfl) => {
                    let rows = cfl_sweep(&cfg, &cfls, refsol.as_ref())?;
                    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "CFL", "dt", "L1", "L2", "Linf");
                    for r in &rows {
                        println!("{:>8} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}", r.cfl, r.dt, r.l1, r.l2, r.linf);
                    }
                    if let Some(dir) = &cfg.out {
                        write_sweep_csv(&dir.join("sweep.csv"), &rows)?;
                    }
                }
                None => {
                    let report = convergence_study(&cfg, &ns, refsol.as_ref())?;
                    print_rows(&report.rows);
                    if let Some(dir) = &cfg.out {
                        write_report(dir, &cfg, &report, None)?;
                    }
                }
            }
            Ok(Outcome::Pass)
        }
        Command::Golden {
            table,
            common,
            error_factor,
            order_tol,
            norms,
            orders_only,
            reference: rargs,
        } => {
            let golden = read_golden(&table)?;
            let cfg = common.build(golden.run_config()?)?;
            cfg.resolve()?;
            let setting = |k: &str| golden.setting(k).and_then(|v| v.parse().ok());
            let refsol = reference(
                &cfg,
                &rargs,
                setting("reference-n").map(|v: f64| v as usize),
                setting("reference-cfl"),
            )?;
            let report = convergence_study(&cfg, &golden.mesh_sizes(), refsol.as_ref())?;
            let tol = Tolerance {
                error_factor,
                order_abs: order_tol,
                norms: norms
                    .iter()
                    .map(|n| match n {
                        NormArg::L1 => Norm::L1,
                        NormArg::L2 => Norm::L2,
                        NormArg::Linf => Norm::Linf,
                    })
                    .collect(),
                exempt_orders: Vec::new(),
                check_errors: !orders_only,
            };
            let outcome = golden_compare(&report.rows, &golden.rows, &tol);
            print_rows(&report.rows);
            for c in outcome.failures() {
                println!(
                    "MISMATCH N = {} {}: golden {:.3e}, got {}",
                    c.n,
                    c.column,
                    c.golden,
                    c.got.map_or("nothing".to_string(), |v| format!("{v:.3e}"))
                );
            }
            println!("{}: {}", table.display(), if outcome.pass { "PASS" } else { "FAIL" });
            if let Some(dir) = &cfg.out {
                write_report(dir, &cfg, &report, Some(&outcome))?;
            }
            Ok(if outcome.pass {
                Outcome::Pass
            } else {
                Outcome::GoldenFailure
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match execute(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::GoldenFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

