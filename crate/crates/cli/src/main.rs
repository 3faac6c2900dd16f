//! `ftmem`: generate codes, certify expansion, simulate memories, tabulate bounds.
//!
//! Exit status is 0 on success, 2 when the input is rejected before any work
//! starts, and 1 when a run fails. Outputs default to `$FTMEM_OUT_DIR`, or the
//! working directory when it is unset.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ftmem::decoders::DecoderKind;
use ftmem::expansion::{check_expansion_exhaustive_with_budget, probe_expansion_randomized, EpsilonGrid, DEFAULT_EXHAUSTIVE_BUDGET};
use ftmem::memsim::{monte_carlo, write_trace_csv, MonteCarloOptions, MonteCarloSummary, SimReport};
use ftmem::metrics::{bounds_table, chernoff_tail, GateCostModel};
use ftmem::tanner::{build_random_regular_with, read_alist, write_alist, BuildOptions, CodeParams, TannerGraph};
use serde::Serialize;

use config::{ExperimentConfig, Prepared, ProfileSpec};

const OUT_DIR_VAR: &str = "FTMEM_OUT_DIR";

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "ftmem", version, about = "Fault-tolerant memories built from LDPC expander codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Randomized,
}

#[derive(Subcommand)]
enum Command {
    /// Build a random (gamma, rho)-regular Tanner graph and write it as alist.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        gamma: usize,
        #[arg(long)]
        rho: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Require girth at least 6.
        #[arg(long)]
        girth6: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a graph for (gamma, rho, alpha, (3/4 + epsilon) gamma) expansion.
    Certify {
        #[arg(long)]
        alist: PathBuf,
        #[arg(long, conflicts_with = "alpha_n", required_unless_present = "alpha_n")]
        alpha: Option<f64>,
        /// Largest subset size, in variables; alpha = alpha_n / n.
        #[arg(long)]
        alpha_n: Option<f64>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        /// Subset budget for exhaustive mode.
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_BUDGET)]
        budget: u64,
        /// Random subsets for randomized mode.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Monte Carlo memory experiment described by a config file.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        cycles: Option<u64>,
        #[arg(long)]
        root_seed: Option<u64>,
    },
    /// Tabulate redundancy, alpha_total bounds and Chernoff tails.
    Bounds {
        /// Comma-separated values or `lo..hi` ranges (inclusive).
        #[arg(long, default_value = "3..10")]
        gammas: String,
        #[arg(long, default_value = "4..40")]
        rhos: String,
        /// `affine:SLOPE:OFFSET` or `constant:C`.
        #[arg(long, default_value = "affine:2:-1")]
        cost: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a Chernoff table over the `--p`, `--delta` and `--sizes` grid.
        #[arg(long)]
        chernoff_out: Option<PathBuf>,
        #[arg(long, default_value = "0.01,0.05")]
        p: String,
        #[arg(long, default_value = "0.01,0.02")]
        delta: String,
        #[arg(long, default_value = "1000,10000")]
        sizes: String,
    },
    /// Run Algorithm A and the bit-copy scheme on the same seeds and pair their traces.
    ///
    /// Writes `<summary stem>_compare_tk.json` and `.csv` next to the configured summary.
    CompareTk {
        config: PathBuf,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        cycles: Option<u64>,
        #[arg(long)]
        root_seed: Option<u64>,
    },
}

fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("creating {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut s = serde_json::to_vec_pretty(value).map_err(|e| Failure::Runtime(format!("serialising: {e}")))?;
    s.push(b'\n');
    Ok(s)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::Invalid(format!("bad {what} value `{s}`"))))
        .collect()
}

fn parse_usizes(text: &str, what: &str) -> Result<Vec<usize>, Failure> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Failure::Invalid(format!("bad {what} entry `{part}`"));
        match part.split_once("..") {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi.trim().parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(Failure::Invalid(format!("{what} list is empty")));
    }
    Ok(out)
}

fn parse_cost(text: &str) -> Result<GateCostModel, Failure> {
    let bad = || Failure::Invalid(format!("bad cost model `{text}` (want affine:SLOPE:OFFSET or constant:C)"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["affine", slope, offset] => Ok(GateCostModel::Affine {
            slope: slope.parse().map_err(|_| bad())?,
            offset: offset.parse().map_err(|_| bad())?,
        }),
        ["constant", c] => Ok(GateCostModel::Constant(c.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn load_graph(path: &Path) -> Result<TannerGraph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("reading {}: {e}", path.display())))?;
    read_alist(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn generate(n: usize, gamma: usize, rho: usize, seed: u64, girth6: bool, out: Option<PathBuf>) -> Result<(), Failure> {
    let params = CodeParams::new(n, gamma, rho).map_err(|e| Failure::Invalid(e.to_string()))?;
    let opts = BuildOptions {
        reject_four_cycles: girth6,
        ..BuildOptions::default()
    };
    let g = build_random_regular_with(params, seed, opts).map_err(|e| Failure::Runtime(e.to_string()))?;
    let path = out.unwrap_or_else(|| out_dir().join(format!("code_{n}_{gamma}_{rho}_s{seed}.alist")));
    write_file(&path, write_alist(&g).as_bytes())?;
    println!("{}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn certify(
    alist: &Path,
    alpha: Option<f64>,
    alpha_n: Option<f64>,
    epsilon: f64,
    mode: Mode,
    budget: u64,
    trials: u64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let g = load_graph(alist)?;
    let spec = ProfileSpec {
        alpha,
        alpha_n,
        epsilon,
        certify: false,
    };
    let profile = spec.resolve(g.gamma(), g.n())?;
    if matches!(mode, Mode::Randomized) && trials == 0 {
        return Err(Failure::Invalid("--trials must be at least 1".into()));
    }
    let cert = match mode {
        Mode::Exhaustive => check_expansion_exhaustive_with_budget(&g, &profile, budget),
        Mode::Randomized => {
            probe_expansion_randomized(&g, &profile, trials, seed).map_err(|e| Failure::Runtime(e.to_string()))?
        }
    };
    let path = out.unwrap_or_else(|| out_dir().join("certificate.json"));
    write_file(&path, &to_json(&cert)?)?;
    println!("{} {:?}", path.display(), cert.verdict);
    Ok(())
}

fn load_experiment(
    config: &Path,
    trials: Option<u64>,
    cycles: Option<u64>,
    root_seed: Option<u64>,
    stem: &str,
) -> Result<Prepared, Failure> {
    let (mut cfg, base) = ExperimentConfig::load(config)?;
    cfg.trials = trials.unwrap_or(cfg.trials);
    cfg.cycles = cycles.unwrap_or(cfg.cycles);
    cfg.root_seed = root_seed.unwrap_or(cfg.root_seed);
    cfg.prepare(&base, &out_dir(), stem)
}

fn run_trials(p: &Prepared, decoder: DecoderKind, keep: bool) -> Result<MonteCarloSummary, Failure> {
    let mut sim = p.sim.clone();
    sim.decoder = decoder;
    sim.validate(&p.graph).map_err(|e| Failure::Invalid(e.to_string()))?;
    let opts = MonteCarloOptions {
        keep_reports: keep,
        threads: p.threads,
        ..MonteCarloOptions::default()
    };
    monte_carlo(&p.graph, &sim, p.trials, p.root_seed, &opts).map_err(|e| Failure::Runtime(e.to_string()))
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    graph_hash: String,
    n: usize,
    gamma: usize,
    rho: usize,
    config: &'a ftmem::memsim::SimConfig,
    certificate: &'a Option<ftmem::expansion::ExpansionCertificate>,
    summary: &'a MonteCarloSummary,
}

fn simulate(config: &Path, trials: Option<u64>, cycles: Option<u64>, root_seed: Option<u64>) -> Result<(), Failure> {
    let p = load_experiment(config, trials, cycles, root_seed, "simulation")?;
    let mut summary = run_trials(&p, p.sim.decoder, p.trace_path.is_some())?;
    let reports = summary.reports.take();
    if let (Some(path), Some(reports)) = (&p.trace_path, &reports) {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, reports).map_err(|e| Failure::Runtime(e.to_string()))?;
        write_file(path, &buf)?;
    }
    let out = SimulateOutput {
        graph_hash: p.graph.identity_hash(),
        n: p.graph.n(),
        gamma: p.graph.gamma(),
        rho: p.graph.rho(),
        config: &p.sim,
        certificate: &p.certificate,
        summary: &summary,
    };
    write_file(&p.summary_path, &to_json(&out)?)?;
    println!(
        "{} failures {}/{} ({:.4}, {:.0}% CI [{:.4}, {:.4}])",
        p.summary_path.display(),
        summary.failures,
        summary.trials,
        summary.failure_rate,
        summary.confidence * 100.0,
        summary.ci_low,
        summary.ci_high
    );
    Ok(())
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    graph_hash: String,
    algorithm_a: &'a MonteCarloSummary,
    tk: &'a MonteCarloSummary,
}

fn compare_tk(config: &Path, trials: Option<u64>, cycles: Option<u64>, root_seed: Option<u64>) -> Result<(), Failure> {
    let p = load_experiment(config, trials, cycles, root_seed, "experiment")?;
    let mut ours = run_trials(&p, DecoderKind::AlgorithmA, true)?;
    let mut tk = run_trials(&p, DecoderKind::Tk, true)?;
    let (ra, rt) = (ours.reports.take().unwrap_or_default(), tk.reports.take().unwrap_or_default());
    // Next to the configured summary, so a `simulate` run of the same config is not overwritten.
    let stem = p.summary_path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    let summary_path = p.summary_path.with_file_name(format!("{stem}_compare_tk.json"));
    let trace_path = p.summary_path.with_file_name(format!("{stem}_compare_tk.csv"));
    write_file(&trace_path, &paired_trace(&ra, &rt))?;
    let out = CompareOutput {
        graph_hash: p.graph.identity_hash(),
        algorithm_a: &ours,
        tk: &tk,
    };
    write_file(&summary_path, &to_json(&out)?)?;
    println!(
        "{} algorithm_a failures {}/{}, tk failures {}/{}",
        summary_path.display(),
        ours.failures,
        ours.trials,
        tk.failures,
        tk.trials
    );
    Ok(())
}

/// One row per trial and cycle; a side that stopped early leaves its columns empty.
fn paired_trace(a: &[SimReport], b: &[SimReport]) -> Vec<u8> {
    let mut out = Vec::new();
    writeln!(out, "trial,cycle,a_alpha_v_pre,a_alpha_v_post,a_failed,tk_alpha_v_pre,tk_alpha_v_post,tk_failed").unwrap();
    for (t, (ra, rb)) in a.iter().zip(b).enumerate() {
        let len = ra.trace.len().max(rb.trace.len());
        for i in 0..len {
            let cell = |r: &SimReport| match r.trace.get(i) {
                Some(rec) => format!(
                    "{},{},{}",
                    rec.alpha_v_pre,
                    rec.alpha_v_post,
                    r.failure_cycle.is_some_and(|c| c <= rec.cycle) as u8
                ),
                None => ",,".to_string(),
            };
            writeln!(out, "{t},{},{},{}", i + 1, cell(ra), cell(rb)).unwrap();
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn bounds(
    gammas: &str,
    rhos: &str,
    cost: &str,
    out: Option<PathBuf>,
    chernoff_out: Option<PathBuf>,
    p: &str,
    delta: &str,
    sizes: &str,
) -> Result<(), Failure> {
    let gammas = parse_usizes(gammas, "gamma")?;
    let rhos = parse_usizes(rhos, "rho")?;
    let cost = parse_cost(cost)?;
    for &g in &gammas {
        cost.majority_cost(g).map_err(|e| Failure::Invalid(e.to_string()))?;
        if g < 2 {
            return Err(Failure::Invalid(format!("gamma must be at least 2 (got {g})")));
        }
    }
    let chernoff_grid = match &chernoff_out {
        Some(_) => {
            let ps: Vec<f64> = parse_list(p, "p")?;
            let ds: Vec<f64> = parse_list(delta, "delta")?;
            let ns = parse_usizes(sizes, "size")?;
            let mut grid = Vec::new();
            for &p in &ps {
                for &d in &ds {
                    for &n in &ns {
                        let t = chernoff_tail(p, d, n).map_err(|e| Failure::Invalid(e.to_string()))?;
                        grid.push((p, d, n, t));
                    }
                }
            }
            grid
        }
        None => Vec::new(),
    };
    let rows = bounds_table(&gammas, &rhos, &cost, &EpsilonGrid::default()).map_err(|e| Failure::Runtime(e.to_string()))?;
    let mut csv = String::from("gamma,rho,redundancy,redundancy_tk,alpha_total_lower,alpha_total_upper\n");
    for r in &rows {
        let lower = r.alpha_total_lower.map(|x| x.to_string()).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.gamma, r.rho, r.redundancy, r.redundancy_tk, lower, r.alpha_total_upper
        ));
    }
    let path = out.unwrap_or_else(|| out_dir().join("bounds.csv"));
    write_file(&path, csv.as_bytes())?;
    println!("{} ({} rows)", path.display(), rows.len());
    if let Some(path) = chernoff_out {
        let mut csv = String::from("p,delta,n,kl_bound,hoeffding_bound\n");
        for (p, d, n, t) in chernoff_grid {
            csv.push_str(&format!("{p},{d},{n},{},{}\n", t.exact_exp, t.loose));
        }
        write_file(&path, csv.as_bytes())?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate {
            n,
            gamma,
            rho,
            seed,
            girth6,
            out,
        } => generate(n, gamma, rho, seed, girth6, out),
        Command::Certify {
            alist,
            alpha,
            alpha_n,
            epsilon,
            mode,
            budget,
            trials,
            seed,
            out,
        } => certify(&alist, alpha, alpha_n, epsilon, mode, budget, trials, seed, out),
        Command::Simulate {
            config,
            trials,
            cycles,
            root_seed,
        } => simulate(&config, trials, cycles, root_seed),
        Command::Bounds {
            gammas,
            rhos,
            cost,
            out,
            chernoff_out,
            p,
            delta,
            sizes,
        } => bounds(&gammas, &rhos, &cost, out, chernoff_out, &p, &delta, &sizes),
        Command::CompareTk {
            config,
            trials,
            cycles,
            root_seed,
        } => compare_tk(&config, trials, cycles, root_seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Invalid(msg) | Failure::Runtime(msg)) = &f;
            eprintln!("ftmem: {msg}");
            ExitCode::from(f.code())
        }
    }
}
