//! Runs one Gibbs chain on a single parcel and prints the trajectory of a
//! chosen voxel alongside the posterior summary.
//!
//! cargo run --release --example parcel_chain -- [voxel] [seed]

use cvfmri::parcellation::{build_adjacency, build_spatial_basis, partition_grid, Neighborhood};
use cvfmri::sampler::{ParcelChain, ParcelData, SamplerConfig};
use cvfmri::signal_model::{DesignVector, HrfParams, StimulusSpec};
use cvfmri::simulation::{simulate_ar1, study_true_maps, NoiseSpec, SignalSpec};

fn main() -> cvfmri::Result<()> {
    let mut args = std::env::args().skip(1);
    let voxel: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);

    let truth = study_true_maps(seed)?;
    let x = DesignVector::from_spec(&StimulusSpec::standard(), &HrfParams::default())?;
    let data = simulate_ar1(&truth, &x, &SignalSpec::study(), &NoiseSpec::study_ar1(), seed)?;

    // The parcel holding the most active voxels.
    let part = partition_grid(data.dims(), 9)?;
    let (g, voxels) = part
        .parcels
        .iter()
        .enumerate()
        .max_by_key(|(_, v)| v.iter().filter(|&&i| truth.active.values()[i] == 1).count())
        .unwrap();
    let pd = ParcelData::new(voxels.clone(), voxels.iter().map(|&v| data.series(v)), &x.bold)?;
    let basis = build_spatial_basis(&build_adjacency(voxels, &part.dims, Neighborhood::EdgeCorner), 5)?;
    let cfg = SamplerConfig { seed, ..SamplerConfig::default() };
    let target = voxels
        .iter()
        .position(|&v| v == voxel)
        .unwrap_or_else(|| voxels.iter().position(|&v| truth.active.values()[v] == 1).unwrap_or(0));

    let chain = ParcelChain::new(&pd, Some(&basis), &cfg, g, seed)?;
    let (summary, trace) = chain.run_with_trace(Some(target))?;
    let v = voxels[target];
    println!("parcel {g}, voxel {v} (truly active: {}, true magnitude {:.4})", truth.active.values()[v] == 1, truth.magnitude.values()[v]);
    println!("iter  gamma  |beta|     rho            sigma2");
    for row in trace.iter().step_by(50) {
        println!("{:4}  {}      {:.5}  {:+.3}{:+.3}i  {:.2e}", row.iteration, row.gamma, row.beta.norm(), row.rho.re, row.rho.im, row.sigma2);
    }
    println!(
        "posterior inclusion {:.3} (MCSE {:.3}), posterior mean |beta| {:.4}, converged {}",
        summary.incl_prob[target],
        summary.mcse[target],
        summary.beta_mean[target].norm(),
        summary.converged
    );
    let active = summary.incl_prob.iter().filter(|&&p| p > cfg.threshold).count();
    println!("{active} of {} parcel voxels above {}", voxels.len(), cfg.threshold);
    Ok(())
}
