//! The block design and its expected BOLD response.
//!
//! cargo run --example design_hrf

use cvfmri::signal_model::{boxcar_stimulus, double_gamma_hrf, DesignVector, HrfParams, StimulusSpec};

fn main() -> cvfmri::Result<()> {
    let hrf = HrfParams::default();
    let spec = StimulusSpec::standard();
    let stim = boxcar_stimulus(&spec)?;
    println!("stimulus: {} points, {} on", stim.len(), stim.iter().filter(|&&s| s == 1).count());

    let grid: Vec<f64> = (0..=3000).map(|k| k as f64 * 0.01).collect();
    let peak = grid.iter().cloned().max_by(|a, b| double_gamma_hrf(*a, &hrf).total_cmp(&double_gamma_hrf(*b, &hrf))).unwrap();
    let trough = grid.iter().cloned().min_by(|a, b| double_gamma_hrf(*a, &hrf).total_cmp(&double_gamma_hrf(*b, &hrf))).unwrap();
    println!("HRF peaks at t={peak:.2}, undershoot minimum at t={trough:.2}");

    let x = DesignVector::from_spec(&spec, &hrf)?;
    let xc = x.centered();
    println!("t  stim  bold  centered");
    for t in (0..x.len()).step_by(5).take(16) {
        println!("{t:3}  {}  {:.3}  {:+.3}", x.stimulus[t], x.bold[t], xc.bold[t]);
    }
    Ok(())
}
