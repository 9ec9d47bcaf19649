//! End-to-end reproduction of the simulation studies: simulate, fit and score
//! replicated datasets, and collect the tables.

use std::fmt::Write as _;

use crate::dataset::ComplexDataset;
use crate::error::{Error, Result};
use crate::fit::{fit, FitConfig, FitOutput};
use crate::metrics::{classification_metrics, metrics_table, MetricsRow};
use crate::random::{norm_quantile, stream_seed};
use crate::sampler::SamplerConfig;
use crate::signal_model::{standard_stimulus, DesignVector, HrfParams};
use crate::simulation::{
    simulate_ar1, simulate_iid, study_true_maps, NoiseSpec, RealisticSpec, SignalSpec, TrueMaps, STUDY_SIGMA,
};

/// Noise regime of the 50x50 studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Iid,
    Ar1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Iid,
    Ar1,
    /// Sweeps over `psi`, `G` and `T` on AR(1) data.
    Params,
    Realistic,
}

impl std::str::FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(Study::Iid),
            "ar1" => Ok(Study::Ar1),
            "params" => Ok(Study::Params),
            "realistic" => Ok(Study::Realistic),
            other => Err(Error::InvalidSpec(format!("unknown study '{other}'"))),
        }
    }
}

/// One simulated 50x50 replicate.
#[derive(Debug, Clone)]
pub struct Replicate {
    pub truth: TrueMaps,
    pub design: DesignVector,
    pub data: ComplexDataset,
}

/// Seed of replicate `r` under a study master seed.
pub fn replicate_seed(master: u64, r: usize) -> u64 {
    stream_seed(master, r as u64)
}

pub fn simulate_replicate(regime: Regime, t_len: usize, seed: u64) -> Result<Replicate> {
    let truth = study_true_maps(seed)?;
    let design = DesignVector::new(standard_stimulus(t_len)?, &HrfParams::default())?;
    let sig = SignalSpec::study();
    let data = match regime {
        Regime::Iid => simulate_iid(&truth, &design, &sig, &NoiseSpec::iid(STUDY_SIGMA), seed)?,
        Regime::Ar1 => simulate_ar1(&truth, &design, &sig, &NoiseSpec::study_ar1(), seed)?,
    };
    Ok(Replicate { truth, design, data })
}

pub fn score(truth: &TrueMaps, out: &FitOutput) -> Result<MetricsRow> {
    MetricsRow::evaluate(
        truth.active.values(),
        truth.magnitude.values(),
        out.maps.activation.values(),
        out.maps.incl_prob.values(),
        out.maps.magnitude.values(),
        Some(out.seconds),
    )
}

/// Fit configuration of the 50x50 studies: G = 9, `psi = Phi^-1(0.47)`.
pub fn study_fit_config(workers: usize) -> FitConfig {
    FitConfig {
        sampler: SamplerConfig::default(),
        n_parcels: 9,
        workers,
        ..FitConfig::default()
    }
}

/// Simulates, fits and scores `replicates` datasets; the fit seed of each
/// replicate equals its simulation seed.
pub fn run_replicates(
    regime: Regime,
    t_len: usize,
    cfg: &FitConfig,
    replicates: usize,
    master: u64,
) -> Result<Vec<(String, MetricsRow)>> {
    (0..replicates)
        .map(|r| {
            let seed = replicate_seed(master, r);
            let rep = simulate_replicate(regime, t_len, seed)?;
            let mut cfg = cfg.clone();
            cfg.sampler.seed = seed;
            let out = fit(&rep.data, &rep.design, &cfg)?;
            Ok((format!("replicate_{r}"), score(&rep.truth, &out)?))
        })
        .collect()
}

/// Parameter sweeps on AR(1) data. Each entry is `(label, mean row)`.
pub fn parameter_sweeps(replicates: usize, master: u64, workers: usize) -> Result<Vec<(String, MetricsRow)>> {
    let mut rows = Vec::new();
    let mean = |rows: Vec<(String, MetricsRow)>| {
        MetricsRow::mean(&rows.into_iter().map(|(_, r)| r).collect::<Vec<_>>())
    };
    for p in [0.02, 0.20, 0.35, 0.47] {
        let mut cfg = study_fit_config(workers);
        cfg.sampler.psi = norm_quantile(p);
        rows.push((format!("psi=Phi^-1({p:.2})"), mean(run_replicates(Regime::Ar1, 200, &cfg, replicates, master)?)));
    }
    for g in [1, 4, 9, 16] {
        let mut cfg = study_fit_config(workers);
        cfg.n_parcels = g;
        rows.push((format!("G={g}"), mean(run_replicates(Regime::Ar1, 200, &cfg, replicates, master)?)));
    }
    for t in [80, 200, 500, 1000] {
        let mut cfg = study_fit_config(workers);
        if t == 1000 {
            cfg.sampler.psi = norm_quantile(0.02);
        }
        rows.push((format!("T={t}"), mean(run_replicates(Regime::Ar1, t, &cfg, replicates, master)?)));
    }
    Ok(rows)
}

/// Per-slice result of the realistic study.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceResult {
    /// 1-based slice number.
    pub slice: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub row: MetricsRow,
}

/// Fit configuration of the realistic study: G = 49, `psi = Phi^-1(0.11)`.
pub fn realistic_fit_config(workers: usize) -> FitConfig {
    let mut cfg = FitConfig {
        n_parcels: 49,
        workers,
        ..FitConfig::default()
    };
    cfg.sampler.psi = norm_quantile(0.11);
    cfg
}

/// Fits every slice of the realistic volume as its own 2-D image.
pub fn realistic_study(spec: &RealisticSpec, cfg: &FitConfig, seed: u64) -> Result<Vec<SliceResult>> {
    let hrf = HrfParams::default();
    let design = spec.design(&hrf)?;
    (0..spec.slices)
        .map(|z| {
            let (data, truth) = spec.simulate_slice(z, &hrf, seed)?;
            let mut cfg = cfg.clone();
            cfg.sampler.seed = stream_seed(seed, z as u64);
            let out = fit(&data, &design, &cfg)?;
            let c = classification_metrics(truth.active.values(), out.maps.activation.values())?;
            Ok(SliceResult {
                slice: z + 1,
                tp: c.tp,
                fp: c.fp,
                fn_: c.fn_,
                tn: c.tn,
                row: score(&truth, &out)?,
            })
        })
        .collect()
}

pub fn slice_table(results: &[SliceResult]) -> String {
    let mut out = format!("slice,tp,fp,fn,tn,{}\n", MetricsRow::HEADER);
    for r in results {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.slice, r.tp, r.fp, r.fn_, r.tn, r.row.csv());
    }
    out
}

/// Runs a whole study and renders its table as CSV.
pub fn reproduce(study: Study, replicates: usize, seed: u64, workers: usize) -> Result<String> {
    if replicates == 0 && study != Study::Realistic {
        return Err(Error::InvalidSpec("need at least one replicate".into()));
    }
    let cfg = study_fit_config(workers);
    Ok(match study {
        Study::Iid => metrics_table(&run_replicates(Regime::Iid, 200, &cfg, replicates, seed)?),
        Study::Ar1 => metrics_table(&run_replicates(Regime::Ar1, 200, &cfg, replicates, seed)?),
        Study::Params => {
            let rows = parameter_sweeps(replicates, seed, workers)?;
            let mut out = format!("setting,{}\n", MetricsRow::HEADER);
            for (label, row) in rows {
                let _ = writeln!(out, "{label},{}", row.csv());
            }
            out
        }
        Study::Realistic => {
            let spec = RealisticSpec::default();
            slice_table(&realistic_study(&spec, &realistic_fit_config(workers), seed)?)
        }
    })
}
