use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};
use vbal::bench::{self, BenchConfig, Family};
use vbal::formats::{self, matrix_rows, InstanceFile};
use vbal::generate::{gen_beck_fiala, gen_cube_body, gen_komlos, trial_seed};
use vbal::report::{coloring_outputs, mode_str, RunReport};
use vbal::CliError;
use vbal_core::body::DEFAULT_PAOURIS_BETA;
use vbal_core::{
    color_asymmetric, color_body_centric, recenter, sample_coloring, solve_komlos, walk_params, AsymPipelineConfig,
    BodyCentricConfig, RecenterParams, SubgaussConfig, WalkMode, WalkStrategy,
};

#[derive(Parser)]
#[command(name = "vbal", version, about = "Vector balancing against convex bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Paper,
    Practical,
}

impl From<Mode> for WalkMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Paper => WalkMode::Paper,
            Mode::Practical => WalkMode::Practical,
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BodyRun {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    body: PathBuf,
    /// Samples for Gaussian measure estimates (0 skips them).
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Sample-count constant of the barycenter estimator.
    #[arg(long, default_value_t = DEFAULT_PAOURIS_BETA)]
    beta: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Sample colorings with the subgaussian walk.
    Walk {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "practical")]
        mode: Mode,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Write every residual `Vχ − t` as a CSV row ("-" for stdout).
        #[arg(long)]
        emit_samples: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Recenter a body against the parallelepiped of an instance.
    Recenter {
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[command(flatten)]
        run: BodyRun,
    },
    /// Color through recentering and the walk on the symmetrized slice.
    ColorAsym {
        #[arg(long, value_enum, default_value = "practical")]
        mode: Mode,
        #[command(flatten)]
        run: BodyRun,
    },
    /// Color by recentering and nearest-facet descent.
    ColorBodyCentric {
        #[command(flatten)]
        run: BodyRun,
    },
    /// Build a vector-Komlós matrix for an instance.
    SolveKomlos {
        #[arg(long)]
        instance: PathBuf,
        /// Diagonal target, the same for every vector.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate subgaussian constants of a sample CSV ("-" for stdin).
    VerifySubgaussian {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 256)]
        directions: usize,
        #[arg(long, default_value_t = 32)]
        thresholds: usize,
        /// Symmetric body for the coverage test.
        #[arg(long)]
        body: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Walk against random colorings over instance families.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "beck-fiala,komlos")]
        families: Vec<Family>,
        #[arg(long, value_delimiter = ',', default_value = "8,16")]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, value_enum, default_value = "practical")]
        mode: Mode,
        /// CSV path; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    GenBeckFiala {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        t: usize,
        #[command(flatten)]
        common: Common,
    },
    GenKomlos {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        norm_bound: f64,
        #[command(flatten)]
        common: Common,
    },
    GenCubeBody {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        measure: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit_json<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    match out {
        Some(path) => formats::write_json(path, value),
        None => {
            let text = serde_json::to_string_pretty(value).expect("values serialize");
            writeln!(io::stdout(), "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            Ok(Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)))
        }
        _ => Ok(Box::new(io::stdout().lock())),
    }
}

fn finish(mut report: RunReport, started: Instant, out: Option<&Path>) -> Result<(), CliError> {
    report.statistics["wall_time_ms"] = json!(started.elapsed().as_secs_f64() * 1e3);
    emit_json(out, &report)
}

fn measure_json(m: &Option<vbal_core::MeasureEstimate>) -> Value {
    m.map_or(Value::Null, |m| json!({"p_hat": m.p_hat, "samples": m.samples, "ci_halfwidth": m.ci_halfwidth, "seed": m.seed}))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    match cli.command {
        Command::Walk { instance, mode, trials, emit_samples, common } => {
            let (file, sys) = formats::read_instance(&instance)?;
            let mode = WalkMode::from(mode);
            let params = walk_params(sys.len(), mode);
            let traces = (0..trials.max(1))
                .into_par_iter()
                .map(|k| sample_coloring(&sys, &params.with_seed(trial_seed(common.seed, k as u64))))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(path) = &emit_samples {
                let rows: Vec<Vec<f64>> = traces.iter().map(|t| t.residual.iter().copied().collect()).collect();
                formats::write_samples(open_output(Some(path))?, &rows)?;
            }
            let config = json!({"mode": mode_str(mode), "trials": trials, "gamma": params.gamma,
                "delta": params.delta, "steps": params.steps, "max_restarts": params.max_restarts});
            let mut report = RunReport::new("walk", common.seed, Some(file.hash()), config);
            report.outputs = coloring_outputs(&sys, &traces[0].chi);
            let restarts: Vec<usize> = traces.iter().map(|t| t.restarts).collect();
            report.statistics = json!({"restarts": restarts, "steps_taken": traces[0].steps_taken,
                "sigma_recomputes": traces[0].sigma_recomputes});
            // Samples on stdout leave no room for the report there.
            let to_stdout = emit_samples.as_deref() == Some(Path::new("-"));
            if to_stdout && common.out.is_none() {
                return Ok(());
            }
            finish(report, started, common.out.as_deref())
        }
        Command::Recenter { delta, epsilon, run } => {
            let (file, sys) = formats::read_instance(&run.instance)?;
            let body = formats::read_body(&run.body)?;
            let params = RecenterParams::new(delta, epsilon, run.common.seed)
                .with_beta(run.beta)
                .with_measure_samples(run.samples);
            let r = recenter(&body, &sys, &params)?;
            let config = json!({"delta": delta, "epsilon": epsilon, "beta": run.beta, "samples": run.samples});
            let mut report = RunReport::new("recenter", run.common.seed, Some(file.hash()), config);
            report.outputs = json!({
                "status": format!("{:?}", r.status),
                "q": r.q.as_slice(),
                "face_dim": r.face.dim(),
                "coefficients": r.face.coefficients(),
                "barycenter_norm": r.barycenter_norm,
                "measure_before": measure_json(&r.measure_before),
                "measure_after": measure_json(&r.measure_after),
            });
            report.statistics = json!({"iterations": r.iterations, "descents": r.descents});
            finish(report, started, run.common.out.as_deref())
        }
        Command::ColorAsym { mode, run } => {
            let (file, sys) = formats::read_instance(&run.instance)?;
            let body = formats::read_body(&run.body)?;
            let mut cfg = AsymPipelineConfig::new(run.common.seed);
            cfg.paouris_beta = run.beta;
            cfg.measure_samples = run.samples;
            let strategy = WalkStrategy { mode: mode.into(), ..WalkStrategy::default() };
            let out = color_asymmetric(&body, &sys, &strategy, &cfg)?;
            let config = json!({"alpha": cfg.alpha, "delta_rc": cfg.delta_rc, "epsilon_rc": cfg.epsilon_rc,
                "max_outer_restarts": cfg.max_outer_restarts, "beta": run.beta, "samples": run.samples,
                "walk_mode": mode_str(strategy.mode), "walk_c": strategy.c});
            let mut report = RunReport::new("color-asym", run.common.seed, Some(file.hash()), config);
            report.outputs = coloring_outputs(&sys, &out.chi);
            report.outputs["recentered_q"] = json!(out.recenter.q.as_slice());
            report.outputs["face_dim"] = json!(out.recenter.face.dim());
            report.outputs["measure"] = measure_json(&out.measure);
            report.statistics = json!({"attempts": out.attempts, "failures": failures_json(&out.failures),
                "recenter_iterations": out.recenter.iterations});
            finish(report, started, run.common.out.as_deref())
        }
        Command::ColorBodyCentric { run } => {
            let (file, sys) = formats::read_instance(&run.instance)?;
            let body = formats::read_body(&run.body)?;
            let mut cfg = BodyCentricConfig::new(sys.len(), run.common.seed);
            cfg.paouris_beta = run.beta;
            cfg.measure_samples = run.samples;
            let out = color_body_centric(&body, &sys, &cfg)?;
            let config = json!({"beta": cfg.beta, "alpha_n": cfg.alpha_n, "eta_n": cfg.eta_n, "c0": cfg.c0,
                "v0": cfg.v0, "eta0": cfg.eta0, "epsilon_rc": cfg.epsilon_rc, "max_restarts": cfg.max_restarts,
                "paouris_beta": run.beta, "samples": run.samples});
            let mut report = RunReport::new("color-body-centric", run.common.seed, Some(file.hash()), config);
            report.outputs = coloring_outputs(&sys, &out.chi);
            report.outputs["measure"] = measure_json(&out.measure);
            let trace: Vec<String> = out.trace.iter().map(|s| format!("{s:?}")).collect();
            report.statistics = json!({"attempts": out.attempts, "descents": out.descents,
                "failures": failures_json(&out.failures), "trace": trace});
            finish(report, started, run.common.out.as_deref())
        }
        Command::SolveKomlos { instance, alpha, common } => {
            let (file, sys) = formats::read_instance(&instance)?;
            let sol = solve_komlos(sys.vectors(), &vec![alpha; sys.len()])?;
            let mut report = RunReport::new("solve-komlos", common.seed, Some(file.hash()), json!({"alpha": alpha}));
            report.outputs = json!({"x": matrix_rows(&sol.x), "eig_max_VXVt": sol.eig_max});
            report.statistics = json!({"steps": sol.steps});
            finish(report, started, common.out.as_deref())
        }
        Command::VerifySubgaussian { input, directions, thresholds, body, scale, common } => {
            let samples = if input == Path::new("-") {
                formats::read_samples(io::stdin().lock())?
            } else {
                formats::read_samples(File::open(&input).map_err(|e| CliError::io(&input, e))?)?
            };
            let cfg = SubgaussConfig { directions, thresholds, seed: common.seed, ..SubgaussConfig::default() };
            let rep = vbal_core::estimate_subgaussian(&samples, &cfg)?;
            let config = json!({"directions": directions, "thresholds": thresholds,
                "min_exceedances": cfg.min_exceedances, "scale": scale});
            let mut report = RunReport::new("verify-subgaussian", common.seed, None, config);
            report.outputs = json!({"s_hat": rep.s_hat, "worst_direction": rep.worst_direction,
                "worst_threshold": rep.worst_threshold, "laplace_beta": rep.laplace_beta});
            if let Some(path) = body {
                let k = formats::read_body(&path)?;
                report.outputs["coverage"] = json!(vbal_core::coverage_test(&samples, &k, scale)?);
                report.outputs["coverage_crossing_scale"] = json!(vbal_core::coverage_crossing_scale(&samples, &k)?);
            }
            report.statistics = json!({"samples": rep.samples});
            finish(report, started, common.out.as_deref())
        }
        Command::Bench { families, ns, trials, mode, csv, common } => {
            let cfg = BenchConfig { families, ns, trials, mode: mode.into(), seed: common.seed };
            let rows = bench::run_bench(&cfg)?;
            bench::write_csv(open_output(csv.as_deref())?, &rows)?;
            let mut report = RunReport::new("bench", common.seed, None, serde_json::to_value(&cfg).expect("serializes"));
            report.outputs = json!({"rows": rows});
            if csv.is_none() && common.out.is_none() {
                return Ok(());
            }
            finish(report, started, common.out.as_deref())
        }
        Command::GenBeckFiala { n, m, t, common } => {
            let sys = gen_beck_fiala(n, m, t, common.seed)?;
            emit_json(common.out.as_deref(), &InstanceFile::from_system(&sys))
        }
        Command::GenKomlos { n, m, norm_bound, common } => {
            let sys = gen_komlos(n, m, norm_bound, common.seed)?;
            emit_json(common.out.as_deref(), &InstanceFile::from_system(&sys))
        }
        Command::GenCubeBody { dim, measure, out } => emit_json(out.as_deref(), &gen_cube_body(dim, measure)?),
    }
}

fn failures_json(f: &vbal_core::FailureCounts) -> Value {
    json!({"recenter_fail": f.recenter_fail, "rejection_exhausted": f.rejection_exhausted,
        "strategy_exhausted": f.strategy_exhausted, "rejected_vertex": f.rejected_vertex})
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let err = json!({"error": e.kind(), "message": e.to_string(), "exit_code": code});
            eprintln!("{err}");
            ExitCode::from(code as u8)
        }
    }
}
