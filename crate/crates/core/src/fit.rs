//! Whole-image fitting: parcellate, sample every parcel on a worker pool and
//! stitch the results. Output never depends on the number of workers.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::dataset::ComplexDataset;
use crate::error::{Error, Result};
use crate::io;
use crate::parcellation::{build_adjacency, build_spatial_basis, partition_grid, Neighborhood, Partition};
use crate::random::{norm_cdf, stream_seed};
use crate::sampler::{
    run_parcel_chain, summarize, ChainSummary, ParcelChain, ParcelData, PriorMode, ResultMaps, SamplerConfig, TraceRow,
};
use crate::signal_model::{boxcar_stimulus, standard_stimulus, DesignVector, HrfParams, StimulusSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub sampler: SamplerConfig,
    /// Number of parcels `G`.
    pub n_parcels: usize,
    pub neighborhood: Neighborhood,
    /// Worker threads; capped at the number of parcels.
    pub workers: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            sampler: SamplerConfig::default(),
            n_parcels: 9,
            neighborhood: Neighborhood::EdgeCorner,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// Block design description as read from a configuration file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignConfig {
    pub warmup: usize,
    /// `None` repeats the standard 20/20 epochs over the whole series.
    pub stimulus: Option<StimulusSpec>,
    pub hrf: HrfParams,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            warmup: 0,
            stimulus: None,
            hrf: HrfParams::default(),
        }
    }
}

impl DesignConfig {
    pub fn design(&self, t_len: usize) -> Result<DesignVector> {
        let mut stimulus = vec![0u8; self.warmup];
        stimulus.extend(match self.stimulus {
            Some(s) => boxcar_stimulus(&s)?,
            None => standard_stimulus(t_len.saturating_sub(self.warmup))?,
        });
        if stimulus.len() != t_len {
            return Err(Error::DimensionMismatch(format!(
                "design has {} points, data has {t_len}",
                stimulus.len()
            )));
        }
        DesignVector::new(stimulus, &self.hrf)
    }

    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = vec![("design.warmup".to_string(), self.warmup.to_string())];
        if let Some(s) = self.stimulus {
            out.push(("design.epochs".into(), s.n_epochs.to_string()));
            out.push(("design.on".into(), s.on_len.to_string()));
            out.push(("design.off".into(), s.off_len.to_string()));
            out.push(("design.on_first".into(), s.on_first.to_string()));
        }
        out
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("bad value '{value}' for '{key}'")))
}

/// Applies `key = value` settings on top of `cfg` and `design`. Unknown keys
/// are rejected so typos do not pass silently.
pub fn apply_settings(
    settings: &BTreeMap<String, String>,
    cfg: &mut FitConfig,
    design: &mut DesignConfig,
) -> Result<()> {
    let mut stim = design.stimulus.unwrap_or_else(StimulusSpec::standard);
    let mut stim_set = design.stimulus.is_some();
    for (k, v) in settings {
        let s = &mut cfg.sampler;
        match k.as_str() {
            "psi" => s.psi = parse_value(k, v)?,
            "prior_probability" => *s = s.clone().with_prior_probability(parse_value(k, v)?),
            "q" => s.q = parse_value(k, v)?,
            "a_kappa" => s.a_kappa = parse_value(k, v)?,
            "b_kappa" => s.b_kappa = parse_value(k, v)?,
            "iters" | "n_iter" => s.n_iter = parse_value(k, v)?,
            "burn" | "n_burn" => s.n_burn = parse_value(k, v)?,
            "threshold" => s.threshold = parse_value(k, v)?,
            "mode" => s.mode = v.parse()?,
            "mcse_tol" => s.mcse_tol = parse_value(k, v)?,
            "seed" => s.seed = parse_value(k, v)?,
            "random_scan" => s.random_scan = parse_value(k, v)?,
            "G" | "parcels" => cfg.n_parcels = parse_value(k, v)?,
            "neighborhood" => cfg.neighborhood = v.parse()?,
            "workers" => cfg.workers = parse_value(k, v)?,
            "design.warmup" => design.warmup = parse_value(k, v)?,
            "design.epochs" => (stim.n_epochs, stim_set) = (parse_value(k, v)?, true),
            "design.on" => (stim.on_len, stim_set) = (parse_value(k, v)?, true),
            "design.off" => (stim.off_len, stim_set) = (parse_value(k, v)?, true),
            "design.on_first" => (stim.on_first, stim_set) = (parse_value(k, v)?, true),
            other => return Err(Error::InvalidSpec(format!("unknown setting '{other}'"))),
        }
    }
    if stim_set {
        design.stimulus = Some(stim);
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    pub maps: ResultMaps,
    pub chains: Vec<ChainSummary>,
    pub partition: Partition,
    pub seconds: f64,
}

fn fit_parcel(
    data: &ComplexDataset,
    x: &[f64],
    cfg: &FitConfig,
    partition: &Partition,
    g: usize,
) -> Result<ChainSummary> {
    let voxels = &partition.parcels[g];
    let parcel = ParcelData::new(voxels.clone(), voxels.iter().map(|&v| data.series(v)), x)?;
    let basis = match cfg.sampler.mode {
        PriorMode::Spatial => {
            let a = build_adjacency(voxels, &partition.dims, cfg.neighborhood);
            Some(build_spatial_basis(&a, cfg.sampler.q)?)
        }
        PriorMode::NonSpatial => None,
    };
    let seed = stream_seed(cfg.sampler.seed, g as u64);
    run_parcel_chain(&parcel, basis.as_ref(), &cfg.sampler, g, seed)
}

/// Re-runs the chain of the parcel holding `voxel` and records that voxel's
/// trajectory. The chain is the same one [`fit`] runs.
pub fn trace_voxel(data: &ComplexDataset, x: &DesignVector, cfg: &FitConfig, voxel: usize) -> Result<Vec<TraceRow>> {
    cfg.sampler.validate()?;
    if voxel >= data.voxel_count() {
        return Err(Error::InvalidSpec(format!("voxel {voxel} outside the image")));
    }
    let partition = partition_grid(data.dims(), cfg.n_parcels)?;
    let g = partition.assignment[voxel];
    let voxels = &partition.parcels[g];
    let local = voxels.iter().position(|&v| v == voxel).expect("voxel in its parcel");
    let parcel = ParcelData::new(voxels.clone(), voxels.iter().map(|&v| data.series(v)), &x.bold)?;
    let basis = match cfg.sampler.mode {
        PriorMode::Spatial => Some(build_spatial_basis(
            &build_adjacency(voxels, &partition.dims, cfg.neighborhood),
            cfg.sampler.q,
        )?),
        PriorMode::NonSpatial => None,
    };
    let seed = stream_seed(cfg.sampler.seed, g as u64);
    let chain = ParcelChain::new(&parcel, basis.as_ref(), &cfg.sampler, g, seed)?;
    Ok(chain.run_with_trace(Some(local))?.1)
}

/// Fits the model to every voxel of `data` with design `x` (uncentered).
pub fn fit(data: &ComplexDataset, x: &DesignVector, cfg: &FitConfig) -> Result<FitOutput> {
    let start = Instant::now();
    cfg.sampler.validate()?;
    if cfg.workers == 0 {
        return Err(Error::InvalidSpec("workers must be positive".into()));
    }
    if x.len() != data.t_len() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} points, data has {}",
            x.len(),
            data.t_len()
        )));
    }
    let partition = partition_grid(data.dims(), cfg.n_parcels)?;
    let workers = cfg.workers.min(partition.n_parcels());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidSpec(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<ChainSummary>> = pool.install(|| {
        (0..partition.n_parcels())
            .into_par_iter()
            .map(|g| fit_parcel(data, &x.bold, cfg, &partition, g))
            .collect()
    });
    // The first failure in parcel order, whatever finished first.
    let chains = results.into_iter().collect::<Result<Vec<_>>>()?;
    let maps = summarize(&chains, &partition, cfg.sampler.threshold)?;
    Ok(FitOutput {
        maps,
        chains,
        partition,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Settings that determine the fitted output, for the manifest. The worker
/// count is deliberately absent.
pub fn manifest_entries(cfg: &FitConfig, design: &DesignConfig) -> Vec<(String, String)> {
    let s = &cfg.sampler;
    let mut out: Vec<(String, String)> = vec![
        ("mode".into(), s.mode.to_string()),
        ("psi".into(), format!("{}", s.psi)),
        ("prior_probability".into(), format!("{}", norm_cdf(s.psi))),
        ("q".into(), s.q.to_string()),
        ("a_kappa".into(), format!("{}", s.a_kappa)),
        ("b_kappa".into(), format!("{}", s.b_kappa)),
        ("n_iter".into(), s.n_iter.to_string()),
        ("n_burn".into(), s.n_burn.to_string()),
        ("threshold".into(), format!("{}", s.threshold)),
        ("mcse_tol".into(), format!("{}", s.mcse_tol)),
        ("seed".into(), s.seed.to_string()),
        ("random_scan".into(), s.random_scan.to_string()),
        ("G".into(), cfg.n_parcels.to_string()),
        (
            "neighborhood".into(),
            match cfg.neighborhood {
                Neighborhood::Edge => "edge".into(),
                Neighborhood::EdgeCorner => "edge+corner".into(),
            },
        ),
    ];
    out.extend(design.entries());
    out
}

/// Writes maps, images, chain summaries and the manifest into `dir`. All
/// files except `timing.txt` are a pure function of data, config and seed.
pub fn write_fit_outputs(dir: &Path, out: &FitOutput, cfg: &FitConfig, design: &DesignConfig) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let m = &out.maps;
    io::write_field_csv(&dir.join("activation.csv"), &m.activation)?;
    io::write_field_csv(&dir.join("magnitude.csv"), &m.magnitude)?;
    io::write_field_csv(&dir.join("phase.csv"), &m.phase)?;
    io::write_field_csv(&dir.join("incl_prob.csv"), &m.incl_prob)?;
    io::write_field_csv(&dir.join("mcse.csv"), &m.mcse)?;
    io::write_pgm(&dir.join("activation.pgm"), &m.activation.map(|&a| f64::from(a)), 1.0)?;
    let mag_scale = m.magnitude.values().iter().cloned().fold(0.0, f64::max);
    io::write_pgm(&dir.join("magnitude.pgm"), &m.magnitude, mag_scale)?;

    let mut summary = String::from("parcel,voxels,n_kept,converged,max_mcse,mean_incl_prob\n");
    for c in &out.chains {
        let max_mcse = c.mcse.iter().cloned().fold(0.0, f64::max);
        let mean_incl = c.incl_prob.iter().sum::<f64>() / c.incl_prob.len() as f64;
        summary.push_str(&format!(
            "{},{},{},{},{max_mcse},{mean_incl}\n",
            c.parcel,
            c.incl_prob.len(),
            c.n_kept,
            c.converged
        ));
    }
    let path = dir.join("summary.csv");
    std::fs::write(&path, summary).map_err(|e| Error::io(&path, e))?;

    let mut manifest = manifest_entries(cfg, design);
    manifest.push(("dims".into(), m.activation.dims().to_string()));
    manifest.push(("active_voxels".into(), m.active_count().to_string()));
    manifest.push(("all_converged".into(), out.chains.iter().all(|c| c.converged).to_string()));
    manifest.push(("magnitude_pgm_scale".into(), format!("{mag_scale}")));
    io::write_key_values(&dir.join("manifest.txt"), &manifest)?;
    io::write_key_values(
        &dir.join("timing.txt"),
        &[
            ("seconds".into(), format!("{:.3}", out.seconds)),
            ("workers".into(), cfg.workers.to_string()),
        ],
    )
}
