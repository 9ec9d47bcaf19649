//! Simulates one AR(1) dataset, fits it and scores the maps.
//!
//! cargo run --release --example ar1_replicate -- [seed] [G]

use cvfmri::fit::{fit, FitConfig};
use cvfmri::metrics::{MetricsRow, metrics_table};
use cvfmri::signal_model::{DesignVector, HrfParams, StimulusSpec};
use cvfmri::simulation::{simulate_ar1, study_true_maps, NoiseSpec, SignalSpec};

fn main() -> cvfmri::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let g: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(9);

    let truth = study_true_maps(seed)?;
    let x = DesignVector::from_spec(&StimulusSpec::standard(), &HrfParams::default())?;
    let data = simulate_ar1(&truth, &x, &SignalSpec::study(), &NoiseSpec::study_ar1(), seed)?;

    let cfg = FitConfig {
        n_parcels: g,
        ..FitConfig::default()
    };
    let out = fit(&data, &x, &cfg)?;
    let row = MetricsRow::evaluate(
        truth.active.values(),
        truth.magnitude.values(),
        out.maps.activation.values(),
        out.maps.incl_prob.values(),
        out.maps.magnitude.values(),
        Some(out.seconds),
    )?;
    println!("{} true active, {} detected", truth.active_count(), out.maps.active_count());
    print!("{}", metrics_table(&[(format!("seed{seed}"), row)]));
    Ok(())
}
