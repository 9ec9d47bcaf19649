//! Classification, ROC and magnitude-fidelity metrics on a toy map.
//!
//! cargo run --example metrics_report

use cvfmri::metrics::{classification_metrics, magnitude_fidelity, metrics_table, roc_auc, roc_curve, trapezoid_area, MetricsRow};

fn main() -> cvfmri::Result<()> {
    let truth = [1, 1, 1, 0, 0, 0, 0, 0, 1, 0];
    let prob = [0.95, 0.90, 0.40, 0.30, 0.05, 0.10, 0.88, 0.02, 0.99, 0.20];
    let called: Vec<u8> = prob.iter().map(|&p| u8::from(p > 0.8722)).collect();
    let true_mag = [0.05, 0.04, 0.02, 0.0, 0.0, 0.0, 0.0, 0.0, 0.05, 0.0];
    let est_mag = [0.048, 0.041, 0.0, 0.0, 0.0, 0.0, 0.006, 0.0, 0.052, 0.0];

    let c = classification_metrics(&truth, &called)?;
    println!("TP {} FP {} FN {} TN {}  accuracy {:.2} precision {:?} recall {:?}", c.tp, c.fp, c.fn_, c.tn, c.accuracy, c.precision, c.recall);

    let auc = roc_auc(&truth, &prob)?;
    let curve = roc_curve(&truth, &prob)?;
    println!("AUC {auc:.4} (trapezoid over {} ROC points: {:.4})", curve.len(), trapezoid_area(&curve));

    let f = magnitude_fidelity(&true_mag, &est_mag)?;
    let na = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| format!("{v:.3}"));
    println!("slope {}, CCC {:.3}, Pearson {}, X-Y MSE {:.2e}", na(f.slope), f.ccc, na(f.pearson), f.xy_mse);

    let row = MetricsRow::evaluate(&truth, &true_mag, &called, &prob, &est_mag, Some(0.5))?;
    let perfect = MetricsRow::evaluate(&truth, &true_mag, &truth, &truth.map(f64::from), &true_mag, Some(0.1))?;
    print!("{}", metrics_table(&[("toy".into(), row), ("oracle".into(), perfect)]));
    Ok(())
}
