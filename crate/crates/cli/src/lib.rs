//! Command-line front end: argument parsing, config loading and CSV output.

use std::fs::File;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use sns_core::config::{ExperimentConfig, SolverConfig};
use sns_core::estimates::{run_inequality_suite, InequalityId, SuiteParams};
use sns_core::experiments::{
    resolve_c_bar, run_convergence_in_n, run_tightness_tables, run_uniqueness_experiment,
    summarize_uniqueness,
};
use sns_core::io::{write_field, write_wiener};
use sns_core::meta::RunMeta;
use sns_core::noise::{sample_wiener, NoiseModel};
use sns_core::nse::{resolve_energy_constant, simulate_with, DiagnosticsRow, RunOptions};
use sns_core::ou::ou_moment_study;
use sns_core::spectral::TorusGrid;
use sns_core::{Result, SnsError};

#[derive(Parser, Debug)]
#[command(name = "sns", version, about = "Stochastic Navier-Stokes solver and estimate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one trajectory and write diagnostics.csv plus optional SNSF dumps.
    Simulate(SimulateArgs),
    /// Calibrate the functional inequalities on random fields.
    Verify(VerifyArgs),
    /// Moments of the stochastic convolution across the Yosida ladder.
    OuMoments(ExperimentArgs),
    /// Coupled perturbed trajectories in H^{-g}.
    Uniqueness(ExperimentArgs),
    /// Coupled Yosida levels: distances and path statistics.
    Convergence(ExperimentArgs),
    /// Tail probabilities of the path statistics.
    Tightness(ExperimentArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "out-dir", visible_alias = "out", default_value = ".")]
    out_dir: PathBuf,
    /// Also export the Wiener increments as wiener.snsf.
    #[arg(long)]
    export_wiener: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// `all` or one inequality id.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0.5)]
    g: f64,
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report file; run-meta.json goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "out-dir", visible_alias = "out", default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long = "n-ladder", value_delimiter = ',')]
    n_ladder: Option<Vec<u64>>,
}

pub fn cli_main(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::OuMoments(a) => ou_moments(a),
        Command::Uniqueness(a) => uniqueness(a),
        Command::Convergence(a) => convergence(a),
        Command::Tightness(a) => tightness(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SnsError::NumericalAbort { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| SnsError::InvalidConfig(format!("cannot read config {}: {e}", path.display())))
}

fn parse_error(path: &Path, e: serde_json::Error) -> SnsError {
    SnsError::InvalidConfig(format!("{}: {e}", path.display()))
}

fn load_solver(path: &Path) -> Result<SolverConfig> {
    serde_json::from_str(&read_config(path)?).map_err(|e| parse_error(path, e))
}

/// Experiment config, or a bare solver config wrapped with the defaults.
fn load_experiment(a: &ExperimentArgs) -> Result<ExperimentConfig> {
    let text = read_config(&a.config)?;
    let mut cfg = match serde_json::from_str::<ExperimentConfig>(&text) {
        Ok(c) => c,
        Err(e) => match serde_json::from_str::<SolverConfig>(&text) {
            Ok(base) => ExperimentConfig::new(base),
            Err(_) => return Err(parse_error(&a.config, e)),
        },
    };
    if let Some(s) = a.seed {
        cfg.base.seed = s;
    }
    if let Some(p) = a.paths {
        cfg.paths = p;
    }
    if let Some(l) = &a.n_ladder {
        cfg.n_ladder = l.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_writer(File::create(path)?))
}

fn csv_error(e: csv::Error) -> SnsError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SnsError::Io(io),
        other => SnsError::Format(format!("{other:?}")),
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn experiment_meta(command: &str, cfg: &ExperimentConfig, config_path: &Path, resolved: serde_json::Value) -> Result<RunMeta> {
    let exponents = cfg.statistics.resolve(cfg.base.noise.g, cfg.base.dim)?;
    let mut files = vec![config_path.to_path_buf()];
    files.extend(cfg.base.referenced_files());
    let mut resolved = resolved;
    resolved["exponents"] = serde_json::to_value(&exponents)?;
    resolved["wiener_seed"] = json!(cfg.base.wiener_seed());
    RunMeta::new(command, cfg, resolved, &files)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = load_solver(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    prepare_dir(&a.out_dir)?;
    let grid = cfg.grid()?;
    let c = resolve_energy_constant(&cfg, &grid)?;
    let mut files = vec![a.config.clone()];
    files.extend(cfg.referenced_files());
    let resolved = json!({
        "energy_constant": c,
        "wiener_seed": cfg.wiener_seed(),
        "steps": cfg.steps()?,
    });
    RunMeta::new("simulate", &cfg, resolved, &files)?.write(&a.out_dir)?;

    if a.export_wiener {
        let model = NoiseModel::new(&cfg.noise, &grid)?;
        let w = sample_wiener(model.modes(), cfg.dt, cfg.steps()?, cfg.wiener_seed())?;
        write_wiener(&a.out_dir.join("wiener.snsf"), &w)?;
    }

    let mut diag = csv_writer(&a.out_dir.join("diagnostics.csv"))?;
    let mut write_err: Option<csv::Error> = None;
    let mut observe = |row: &DiagnosticsRow| {
        if write_err.is_none() {
            if let Err(e) = diag.serialize(row) {
                write_err = Some(e);
            }
        }
    };
    let opts = RunOptions {
        energy_constant: Some(c),
        ..Default::default()
    };
    let run = simulate_with(&cfg, opts, &mut observe);
    diag.flush()?;
    if let Some(e) = write_err {
        return Err(csv_error(e));
    }
    let traj = run?;
    if cfg.record_stride > 0 {
        for (i, (v, t)) in traj.v.iter().zip(&traj.times).enumerate() {
            write_field(&a.out_dir.join(format!("v_{i:05}.snsf")), v, *t)?;
        }
    }
    let summary = json!({
        "energy": traj.summary,
        "increments_hash": traj.increments_hash,
    });
    std::fs::write(a.out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    println!(
        "simulate: {} steps, sup |u|^2 = {:.6e}, majorant {}",
        cfg.steps()?,
        traj.summary.sup_energy,
        if traj.summary.majorant_holds() { "holds" } else { "violated" }
    );
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<()> {
    let ids: Vec<InequalityId> = if a.suite.eq_ignore_ascii_case("all") {
        InequalityId::ALL.to_vec()
    } else {
        vec![a.suite.parse()?]
    };
    let grid = TorusGrid::new(a.dim, a.resolution)?;
    let params = SuiteParams { g: a.g, alpha: a.alpha };
    let out = a.out.clone().unwrap_or_else(|| a.out_dir.join("report.csv"));
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    prepare_dir(dir)?;
    let settings = json!({
        "suite": a.suite, "samples": a.samples, "resolution": a.resolution, "dim": a.dim,
        "g": a.g, "alpha": a.alpha, "seed": a.seed,
    });
    RunMeta::new("verify", &settings, json!({"band": sns_core::estimates::suite_band(&grid)}), &[])?.write(dir)?;
    let reports = ids
        .iter()
        .map(|&id| run_inequality_suite(id, a.samples, &grid, a.seed, params))
        .collect::<Result<Vec<_>>>()?;
    write_rows(&out, &reports)?;
    for r in &reports {
        println!("{:<10} max_ratio = {:.6e}", r.inequality_id, r.max_ratio);
    }
    Ok(())
}

fn ou_moments(a: ExperimentArgs) -> Result<()> {
    let cfg = load_experiment(&a)?;
    prepare_dir(&a.out_dir)?;
    experiment_meta("ou-moments", &cfg, &a.config, json!({}))?.write(&a.out_dir)?;
    let rows = ou_moment_study(&cfg)?;
    write_rows(&a.out_dir.join("ou_moments.csv"), &rows)?;
    println!("ou-moments: {} rows", rows.len());
    Ok(())
}

#[derive(Serialize)]
struct UniquenessCsvRow {
    path: usize,
    delta0: f64,
    t: f64,
    #[serde(rename = "V_H_minus_g")]
    v_norm: f64,
    psi_integral: f64,
    #[serde(rename = "Q")]
    weighted: f64,
    stopped: bool,
    coupled: bool,
}

fn uniqueness(a: ExperimentArgs) -> Result<()> {
    let cfg = load_experiment(&a)?;
    prepare_dir(&a.out_dir)?;
    let c_bar = resolve_c_bar(&cfg)?;
    let grid = cfg.base.grid()?;
    let lipschitz = NoiseModel::new(&cfg.base.noise, &grid)?.lipschitz_constant();
    experiment_meta("uniqueness", &cfg, &a.config, json!({"c_bar": c_bar, "lipschitz": lipschitz}))?
        .write(&a.out_dir)?;
    let mut cfg = cfg;
    cfg.uniqueness.c_bar = Some(c_bar);
    let run = run_uniqueness_experiment(&cfg)?;
    let mut rows = Vec::new();
    for r in &run.records {
        for (k, &t) in r.times.iter().enumerate() {
            rows.push(UniquenessCsvRow {
                path: r.path,
                delta0: r.delta0,
                t,
                v_norm: r.v_norm[k],
                psi_integral: r.psi_integral[k],
                weighted: r.weighted[k],
                stopped: r.stop_time.is_some_and(|s| s <= t),
                coupled: r.coupled,
            });
        }
    }
    write_rows(&a.out_dir.join("uniqueness.csv"), &rows)?;
    let summary = summarize_uniqueness(&run);
    write_rows(&a.out_dir.join("uniqueness_summary.csv"), &summary)?;
    if run.records.iter().any(|r| !r.coupled) {
        return Err(SnsError::InvalidConfig("coupled solvers consumed different increments".into()));
    }
    println!("uniqueness: {} records, C_bar = {c_bar:.6e}", run.records.len());
    Ok(())
}

fn convergence(a: ExperimentArgs) -> Result<()> {
    let cfg = load_experiment(&a)?;
    prepare_dir(&a.out_dir)?;
    experiment_meta("convergence", &cfg, &a.config, json!({}))?.write(&a.out_dir)?;
    let study = run_convergence_in_n(&cfg)?;
    write_rows(&a.out_dir.join("convergence_distances.csv"), &study.distance_rows())?;
    write_rows(&a.out_dir.join("convergence_statistics.csv"), &study.statistic_rows())?;
    println!(
        "convergence: monotone distances on {:.1}% of paths",
        100.0 * study.monotone_fraction()
    );
    Ok(())
}

fn tightness(a: ExperimentArgs) -> Result<()> {
    let cfg = load_experiment(&a)?;
    prepare_dir(&a.out_dir)?;
    experiment_meta("tightness", &cfg, &a.config, json!({}))?.write(&a.out_dir)?;
    let (_, rows) = run_tightness_tables(&cfg)?;
    write_rows(&a.out_dir.join("tightness.csv"), &rows)?;
    let worst = rows.iter().filter(|r| !r.within_majorant(3.0)).count();
    println!("tightness: {} rows, {worst} above the majorant band", rows.len());
    Ok(())
}
