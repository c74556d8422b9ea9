use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use popcrit::certificate::certify;
use popcrit::generate::{generate_random_instance, GenParams};
use popcrit::matching::{blocking_pairs, deficiency, is_feasible};
use popcrit::oracle::{oracle_solve, OracleConfig, DEFAULT_EDGE_BUDGET};
use popcrit::popularity::max_delta;
use popcrit::solver::{parse_trace_csv, solve};
use popcrit::{Instance, Matching, VertexId};

/// Popular critical matchings with two-sided lower quotas.
#[derive(Parser, Debug)]
#[command(name = "popcrit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance and print the matching.
    Solve {
        instance: PathBuf,
        /// Write the proposal trace as CSV.
        #[arg(long, value_name = "PATH")]
        emit_trace: Option<PathBuf>,
        /// Write the certificate report; exits 2 if it does not verify.
        #[arg(long, value_name = "PATH")]
        emit_certificate: Option<PathBuf>,
    },
    /// Report deficiency, feasibility and blocking pairs of a matching.
    Verify {
        instance: PathBuf,
        matching: PathBuf,
    },
    /// Enumerate the instance exhaustively and compare with the solver.
    Oracle {
        instance: PathBuf,
        /// Largest edge count to enumerate.
        #[arg(long, default_value_t = DEFAULT_EDGE_BUDGET)]
        budget: usize,
        /// Also list the critical and popular critical matchings.
        #[arg(long)]
        list: bool,
        /// Worker threads for the popularity checks.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write a seeded random instance.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        n_a: usize,
        #[arg(long, default_value_t = 4)]
        n_b: usize,
        #[arg(long, default_value_t = 2)]
        max_upper: usize,
        /// Probability that a vertex gets a positive lower quota.
        #[arg(long, default_value_t = 0.5)]
        lq_fraction: f64,
        /// Probability that a pair is mutually acceptable.
        #[arg(long, default_value_t = 0.6)]
        density: f64,
        /// Output file (stdout by default).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Replay a trace CSV against the solver.
    Trace { instance: PathBuf, trace: PathBuf },
}

enum Failure {
    /// Unreadable or invalid input; exit code 1.
    Input(String),
    /// Certificate or oracle disagreement; exit code 2.
    Disagree(String),
}

type Outcome = Result<String, Failure>;

fn input<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(input(path))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(input(path))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    Instance::parse(&read(path)?).map_err(input(path))
}

fn run_solve(
    instance: &Path,
    emit_trace: Option<&Path>,
    emit_certificate: Option<&Path>,
) -> Outcome {
    let inst = load_instance(instance)?;
    let (m, trace) = solve(&inst);
    let def = deficiency(&inst, &m.base).map_err(|e| Failure::Input(e.to_string()))?;
    let mut out = m.base.serialize(&inst);
    let _ = writeln!(out, "# deficiency {}", def.total);
    let _ = writeln!(out, "# size {}", m.base.len());
    if let Some(path) = emit_trace {
        write(path, &trace.to_csv(&inst))?;
    }
    if let Some(path) = emit_certificate {
        let (g, cert, report) = certify(&inst, &m).map_err(|e| Failure::Disagree(e.to_string()))?;
        write(path, &report.serialize(&g, &cert))?;
        if !report.passed() {
            let names: Vec<&str> = report.failed.iter().map(|c| c.name()).collect();
            return Err(Failure::Disagree(format!(
                "certificate fails: {}",
                names.join(",")
            )));
        }
        out.push_str("# certificate PASS\n");
    }
    Ok(out)
}

fn run_verify(instance: &Path, matching: &Path) -> Outcome {
    let inst = load_instance(instance)?;
    let m = Matching::parse(&inst, &read(matching)?).map_err(input(matching))?;
    let def = deficiency(&inst, &m).map_err(|e| Failure::Input(e.to_string()))?;
    let blocking = blocking_pairs(&inst, &m);
    let mut out = String::new();
    let _ = writeln!(out, "size {}", m.len());
    let _ = writeln!(
        out,
        "deficiency {} (A {}, B {})",
        def.total, def.def_a, def.def_b
    );
    let _ = writeln!(
        out,
        "feasible {}",
        if is_feasible(&inst, &m) { "yes" } else { "no" }
    );
    let _ = writeln!(out, "blocking_pairs {}", blocking.len());
    for e in blocking {
        let _ = writeln!(
            out,
            "{} {}",
            inst.name(VertexId::a(e.a)),
            inst.name(VertexId::b(e.b))
        );
    }
    Ok(out)
}

fn run_oracle(instance: &Path, budget: usize, list: bool, jobs: Option<usize>) -> Outcome {
    let inst = load_instance(instance)?;
    let cfg = OracleConfig {
        edge_budget: budget,
        threads: jobs,
    };
    let r = oracle_solve(&inst, &cfg).map_err(input(instance))?;
    let (m, _) = solve(&inst);
    let def = deficiency(&inst, &m.base).map_err(|e| Failure::Input(e.to_string()))?;
    let mut out = r.report(&inst, list);
    let _ = writeln!(out, "solver_deficiency {}", def.total);
    let _ = writeln!(out, "solver_size {}", m.base.len());
    let mut problems = Vec::new();
    if def.total != r.min_deficiency {
        problems.push("deficiency");
    }
    if r.critical.iter().any(|n| max_delta(&inst, &m.base, n) > 0) {
        problems.push("popularity");
    }
    if m.base.len() != r.max_popular_size {
        problems.push("size");
    }
    if !r.side_minima_agree {
        problems.push("side-minima");
    }
    if problems.is_empty() {
        out.push_str("PASS\n");
        Ok(out)
    } else {
        let _ = writeln!(out, "FAIL {}", problems.join(","));
        print!("{out}");
        Err(Failure::Disagree("solver and oracle disagree".into()))
    }
}

fn run_trace(instance: &Path, trace: &Path) -> Outcome {
    let inst = load_instance(instance)?;
    let want = parse_trace_csv(&read(trace)?).map_err(input(trace))?;
    let (_, got) = solve(&inst);
    let got = got.rows(&inst);
    if let Some(k) = (0..want.len().max(got.len())).find(|&k| want.get(k) != got.get(k)) {
        let show = |r: Option<&popcrit::solver::TraceRow>| {
            r.map_or("none".to_string(), |r| format!("{r:?}"))
        };
        return Err(Failure::Disagree(format!(
            "row {}: expected {}, solver gave {}",
            k + 1,
            show(want.get(k)),
            show(got.get(k))
        )));
    }
    Ok(format!("trace matches ({} proposals)\n", got.len()))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Solve {
            instance,
            emit_trace,
            emit_certificate,
        } => run_solve(
            &instance,
            emit_trace.as_deref(),
            emit_certificate.as_deref(),
        ),
        Command::Verify { instance, matching } => run_verify(&instance, &matching),
        Command::Oracle {
            instance,
            budget,
            list,
            jobs,
        } => run_oracle(&instance, budget, list, jobs),
        Command::Gen {
            seed,
            n_a,
            n_b,
            max_upper,
            lq_fraction,
            density,
            output,
        } => {
            let p = GenParams {
                n_a,
                n_b,
                max_upper,
                lq_fraction,
                edge_density: density,
                seed,
            };
            let text = generate_random_instance(&p)
                .map_err(|e| Failure::Input(e.to_string()))?
                .serialize();
            match output {
                Some(path) => write(&path, &text).map(|_| String::new()),
                None => Ok(text),
            }
        }
        Command::Trace { instance, trace } => run_trace(&instance, &trace),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Disagree(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
