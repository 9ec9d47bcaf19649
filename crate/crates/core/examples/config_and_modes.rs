//! Reads a key = value fit configuration, then fits the same dataset with the
//! spatial and the non-spatial prior.
//!
//! cargo run --release --example config_and_modes

use cvfmri::fit::{apply_settings, fit, DesignConfig, FitConfig};
use cvfmri::io::parse_key_values;
use cvfmri::metrics::{metrics_table, MetricsRow};
use cvfmri::simulation::{simulate_iid, study_true_maps, NoiseSpec, SignalSpec, STUDY_SIGMA};

const CONFIG: &str = "
# prior inclusion probability 0.47
prior_probability = 0.47
G = 9
iters = 1000
burn = 500
seed = 11
";

fn main() -> cvfmri::Result<()> {
    let mut cfg = FitConfig::default();
    let mut design = DesignConfig::default();
    apply_settings(&parse_key_values(CONFIG, "inline".as_ref())?, &mut cfg, &mut design)?;

    let truth = study_true_maps(11)?;
    let x = design.design(200)?;
    let data = simulate_iid(&truth, &x, &SignalSpec::study(), &NoiseSpec::iid(STUDY_SIGMA), 11)?;

    let mut rows = Vec::new();
    for mode in ["spatial", "nonspatial"] {
        let mut c = cfg.clone();
        let mut d = design;
        let mut kv = parse_key_values(&format!("mode = {mode}"), "inline".as_ref())?;
        if mode == "nonspatial" {
            kv.insert("threshold".into(), "0.5".into());
        }
        apply_settings(&kv, &mut c, &mut d)?;
        let out = fit(&data, &x, &c)?;
        let row = MetricsRow::evaluate(
            truth.active.values(),
            truth.magnitude.values(),
            out.maps.activation.values(),
            out.maps.incl_prob.values(),
            out.maps.magnitude.values(),
            Some(out.seconds),
        )?;
        rows.push((mode.to_string(), row));
    }
    print!("{}", metrics_table(&rows));
    Ok(())
}
