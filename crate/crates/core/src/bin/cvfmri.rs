use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cvfmri::fit::{apply_settings, fit, trace_voxel, write_fit_outputs, DesignConfig, FitConfig};
use cvfmri::io;
use cvfmri::metrics::{metrics_table, MetricsRow};
use cvfmri::sampler::PriorMode;
use cvfmri::signal_model::HrfParams;
use cvfmri::simulation::{RealisticSpec, TrueMaps};
use cvfmri::study::{realistic_fit_config, replicate_seed, reproduce, simulate_replicate, study_fit_config, Regime, Study};
use cvfmri::{Error, Field, Result};

#[derive(Parser)]
#[command(name = "cvfmri", version, about = "Bayesian activation mapping for complex-valued fMRI")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimStudy {
    Iid,
    Ar1,
    Realistic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReproStudy {
    Iid,
    Ar1,
    Params,
    Realistic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Spatial,
    Nonspatial,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate datasets with known truth.
    Simulate {
        #[arg(long, value_enum)]
        study: SimStudy,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Number of replicates (iid/ar1); more than one writes replicate_N subdirectories.
        #[arg(long, default_value_t = 1)]
        replicates: usize,
        /// Series length (iid/ar1); the last 40-point epoch may be partial.
        #[arg(long = "T", default_value_t = 200)]
        t_len: usize,
    },
    /// Fit a CVF1 dataset and write maps.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "G")]
        g: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        psi: Option<f64>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        burn: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also dump the trajectory of this voxel (row-major index) to trace.csv.
        #[arg(long)]
        trace_voxel: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score result maps against truth maps.
    Evaluate {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a whole simulation study end to end.
    Reproduce {
        #[arg(long, value_enum)]
        study: ReproStudy,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_truth(dir: &Path, truth: &TrueMaps) -> Result<()> {
    io::write_field_csv(&dir.join("truth_activation.csv"), &truth.active)?;
    io::write_field_csv(&dir.join("truth_magnitude.csv"), &truth.magnitude)
}

fn write_fit_conf(dir: &Path, cfg: &FitConfig, design: &DesignConfig) -> Result<()> {
    let mut entries = cvfmri::fit::manifest_entries(cfg, design);
    entries.retain(|(k, _)| k != "prior_probability");
    io::write_key_values(&dir.join("fit.conf"), &entries)
}

fn simulate(study: SimStudy, seed: u64, out: &Path, replicates: usize, t_len: usize) -> Result<()> {
    create_dir(out)?;
    match study {
        SimStudy::Iid | SimStudy::Ar1 => {
            let regime = if matches!(study, SimStudy::Iid) { Regime::Iid } else { Regime::Ar1 };
            for r in 0..replicates {
                let dir = if replicates == 1 { out.to_path_buf() } else { out.join(format!("replicate_{r}")) };
                create_dir(&dir)?;
                let rep_seed = if replicates == 1 { seed } else { replicate_seed(seed, r) };
                let rep = simulate_replicate(regime, t_len, rep_seed)?;
                io::write_dataset(&dir.join("data.cvf"), &rep.data)?;
                write_truth(&dir, &rep.truth)?;
                let mut cfg = study_fit_config(1);
                cfg.sampler.seed = rep_seed;
                write_fit_conf(&dir, &cfg, &DesignConfig::default())?;
            }
        }
        SimStudy::Realistic => {
            let spec = RealisticSpec::default();
            let hrf = HrfParams::default();
            let design = DesignConfig {
                warmup: spec.warmup,
                stimulus: Some(spec.stimulus),
                hrf,
            };
            for z in 0..spec.slices {
                let dir = out.join(format!("slice_{}", z + 1));
                create_dir(&dir)?;
                let (data, truth) = spec.simulate_slice(z, &hrf, seed)?;
                io::write_dataset(&dir.join("data.cvf"), &data)?;
                write_truth(&dir, &truth)?;
                let mut cfg = realistic_fit_config(1);
                cfg.sampler.seed = cvfmri::random::stream_seed(seed, z as u64);
                write_fit_conf(&dir, &cfg, &design)?;
            }
        }
    }
    Ok(())
}

struct FitArgs {
    data: PathBuf,
    config: Option<PathBuf>,
    g: Option<usize>,
    psi: Option<f64>,
    iters: Option<usize>,
    burn: Option<usize>,
    threshold: Option<f64>,
    mode: Option<Mode>,
    workers: Option<usize>,
    seed: Option<u64>,
    trace_voxel: Option<usize>,
    out: PathBuf,
}

fn run_fit(a: FitArgs) -> Result<()> {
    let mut cfg = FitConfig::default();
    let mut design = DesignConfig::default();
    if let Some(path) = &a.config {
        apply_settings(&io::read_key_values(path)?, &mut cfg, &mut design)?;
    }
    if let Some(v) = a.g {
        cfg.n_parcels = v;
    }
    if let Some(v) = a.psi {
        cfg.sampler.psi = v;
    }
    if let Some(v) = a.iters {
        cfg.sampler.n_iter = v;
        if a.burn.is_none() {
            cfg.sampler.n_burn = v / 2;
        }
    }
    if let Some(v) = a.burn {
        cfg.sampler.n_burn = v;
    }
    if let Some(m) = a.mode {
        cfg.sampler.mode = match m {
            Mode::Spatial => PriorMode::Spatial,
            Mode::Nonspatial => PriorMode::NonSpatial,
        };
        if a.threshold.is_none() && a.config.is_none() {
            cfg.sampler.threshold = match m {
                Mode::Spatial => cvfmri::sampler::SPATIAL_THRESHOLD,
                Mode::Nonspatial => cvfmri::sampler::NONSPATIAL_THRESHOLD,
            };
        }
    }
    if let Some(v) = a.threshold {
        cfg.sampler.threshold = v;
    }
    if let Some(v) = a.workers {
        cfg.workers = v;
    }
    if let Some(v) = a.seed {
        cfg.sampler.seed = v;
    }
    let data = io::read_dataset(&a.data)?;
    let x = design.design(data.t_len())?;
    let out = fit(&data, &x, &cfg)?;
    write_fit_outputs(&a.out, &out, &cfg, &design)?;
    if let Some(v) = a.trace_voxel {
        io::write_trace_csv(&a.out.join("trace.csv"), &trace_voxel(&data, &x, &cfg, v)?)?;
    }
    eprintln!(
        "{} of {} voxels active, {:.2} s",
        out.maps.active_count(),
        data.voxel_count(),
        out.seconds
    );
    Ok(())
}

fn evaluate_dir(truth: &Path, result: &Path) -> Result<MetricsRow> {
    let t_act: Field<u8> = io::read_field_csv(&truth.join("truth_activation.csv"))?;
    let t_mag: Field<f64> = io::read_field_csv(&truth.join("truth_magnitude.csv"))?;
    let act: Field<u8> = io::read_field_csv(&result.join("activation.csv"))?;
    let prob: Field<f64> = io::read_field_csv(&result.join("incl_prob.csv"))?;
    let mag: Field<f64> = io::read_field_csv(&result.join("magnitude.csv"))?;
    if t_act.dims() != act.dims() {
        return Err(Error::DimensionMismatch(format!(
            "truth on {}, result on {}",
            t_act.dims(),
            act.dims()
        )));
    }
    let seconds = io::read_key_values(&result.join("timing.txt"))
        .ok()
        .and_then(|kv| kv.get("seconds").and_then(|s| s.parse().ok()));
    MetricsRow::evaluate(t_act.values(), t_mag.values(), act.values(), prob.values(), mag.values(), seconds)
}

fn evaluate(truth: &Path, result: &Path, out: &Path) -> Result<()> {
    let mut rows = Vec::new();
    if truth.join("truth_activation.csv").exists() {
        rows.push(("dataset".to_string(), evaluate_dir(truth, result)?));
    } else {
        let mut names: Vec<String> = std::fs::read_dir(truth)
            .map_err(|e| Error::Io {
                path: truth.to_path_buf(),
                source: e,
            })?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().join("truth_activation.csv").exists())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        names.sort_by_key(|n| (n.len(), n.clone()));
        if names.is_empty() {
            return Err(Error::InvalidSpec(format!("no truth maps under {}", truth.display())));
        }
        for n in names {
            rows.push((n.clone(), evaluate_dir(&truth.join(&n), &result.join(&n))?));
        }
    }
    let table = metrics_table(&rows);
    std::fs::write(out, &table).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    print!("{table}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            study,
            seed,
            out,
            replicates,
            t_len,
        } => simulate(study, seed, &out, replicates, t_len),
        Command::Fit {
            data,
            config,
            g,
            psi,
            iters,
            burn,
            threshold,
            mode,
            workers,
            seed,
            trace_voxel,
            out,
        } => run_fit(FitArgs {
            data,
            config,
            g,
            psi,
            iters,
            burn,
            threshold,
            mode,
            workers,
            seed,
            trace_voxel,
            out,
        }),
        Command::Evaluate { truth, result, out } => evaluate(&truth, &result, &out),
        Command::Reproduce {
            study,
            replicates,
            seed,
            workers,
            out,
        } => {
            let study = match study {
                ReproStudy::Iid => Study::Iid,
                ReproStudy::Ar1 => Study::Ar1,
                ReproStudy::Params => Study::Params,
                ReproStudy::Realistic => Study::Realistic,
            };
            let workers = workers.unwrap_or_else(|| FitConfig::default().workers);
            create_dir(&out)?;
            let table = reproduce(study, replicates, seed, workers)?;
            let name = match study {
                Study::Iid => "iid.csv",
                Study::Ar1 => "ar1.csv",
                Study::Params => "params.csv",
                Study::Realistic => "realistic.csv",
            };
            let path = out.join(name);
            std::fs::write(&path, &table).map_err(|e| Error::Io { path, source: e })?;
            print!("{table}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
