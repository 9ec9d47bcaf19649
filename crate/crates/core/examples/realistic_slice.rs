//! Simulates one slice of the 96x96x7 dynamic-phase volume and fits it with
//! 49 parcels.
//!
//! cargo run --release --example realistic_slice -- [slice 1..7] [seed]

use cvfmri::fit::fit;
use cvfmri::metrics::classification_metrics;
use cvfmri::random::stream_seed;
use cvfmri::signal_model::HrfParams;
use cvfmri::simulation::RealisticSpec;
use cvfmri::study::realistic_fit_config;

fn main() -> cvfmri::Result<()> {
    let mut args = std::env::args().skip(1);
    let slice: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let z = slice.clamp(1, 7) - 1;

    let spec = RealisticSpec::default();
    let hrf = HrfParams::default();
    let (data, truth) = spec.simulate_slice(z, &hrf, seed)?;
    let mut cfg = realistic_fit_config(std::thread::available_parallelism().map_or(1, |n| n.get()));
    cfg.sampler.seed = stream_seed(seed, z as u64);
    let out = fit(&data, &spec.design(&hrf)?, &cfg)?;

    let c = classification_metrics(truth.active.values(), out.maps.activation.values())?;
    println!("slice {}: strength {:.2}, TP {} FP {} FN {} TN {} in {:.1} s", z + 1, spec.taper[z], c.tp, c.fp, c.fn_, c.tn, out.seconds);
    let phases: Vec<f64> = out.maps.phase.values().iter().cloned().filter(|p| !p.is_nan()).collect();
    if !phases.is_empty() {
        println!("mean detected phase {:.4} rad", phases.iter().sum::<f64>() / phases.len() as f64);
    }
    Ok(())
}
