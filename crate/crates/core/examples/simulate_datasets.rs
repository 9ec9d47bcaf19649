//! Builds the 50x50 study truth maps and simulates iid and AR(1) data on them,
//! then writes both datasets in the CVF1 format.
//!
//! cargo run --release --example simulate_datasets -- [seed] [out_dir]

use std::path::PathBuf;

use cvfmri::io::{read_dataset, write_dataset, write_field_csv};
use cvfmri::signal_model::{DesignVector, HrfParams, StimulusSpec};
use cvfmri::simulation::{simulate_ar1, simulate_iid, study_true_maps, NoiseSpec, SignalSpec, STUDY_SIGMA};

fn main() -> cvfmri::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/sim_example".into()));
    std::fs::create_dir_all(&out).map_err(|e| cvfmri::Error::Io { path: out.clone(), source: e })?;

    let truth = study_true_maps(seed)?;
    let peak = truth.magnitude.values().iter().cloned().fold(0.0, f64::max);
    println!("{} active voxels, peak CNR {:.2}", truth.active_count(), peak / STUDY_SIGMA);

    let x = DesignVector::from_spec(&StimulusSpec::standard(), &HrfParams::default())?;
    let sig = SignalSpec::study();
    println!("SNR of the baseline: {:.1}", sig.snr(STUDY_SIGMA));

    let iid = simulate_iid(&truth, &x, &sig, &NoiseSpec::iid(STUDY_SIGMA), seed)?;
    let ar1 = simulate_ar1(&truth, &x, &sig, &NoiseSpec::study_ar1(), seed)?;
    for (name, ds) in [("iid.cvf", &iid), ("ar1.cvf", &ar1)] {
        let path = out.join(name);
        write_dataset(&path, ds)?;
        assert_eq!(&read_dataset(&path)?, ds);
        // Lag-one autocorrelation of an inactive voxel shows the noise regime.
        let y = ds.series(0);
        let m = y.iter().sum::<num_complex::Complex64>() / y.len() as f64;
        let num: num_complex::Complex64 = y.windows(2).map(|w| (w[1] - m) * (w[0] - m).conj()).sum();
        let den: f64 = y.iter().map(|v| (v - m).norm_sqr()).sum();
        println!("{name}: {} voxels x T={}, voxel 0 lag-1 autocorrelation {:.2}", ds.voxel_count(), ds.t_len(), num / den);
    }
    write_field_csv(&out.join("truth_activation.csv"), &truth.active)?;
    write_field_csv(&out.join("truth_magnitude.csv"), &truth.magnitude)?;
    println!("wrote {}", out.display());
    Ok(())
}
