//! Classification and estimation-fidelity metrics for activation maps.
//!
//! Undefined quantities (precision with no positive predictions, AUC on a
//! single-class truth, ...) are reported as `None`, never coerced to zero.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationReport {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("fields of {a} and {b} voxels")));
    }
    Ok(())
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Confusion-matrix metrics; any nonzero entry counts as positive.
pub fn classification_metrics(truth: &[u8], predicted: &[u8]) -> Result<ClassificationReport> {
    same_len(truth.len(), predicted.len())?;
    if truth.is_empty() {
        return Err(Error::UndefinedMetric("no voxels to classify".into()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t != 0, p != 0) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Ok(ClassificationReport {
        tp,
        fp,
        fn_,
        tn,
        accuracy: (tp + tn) as f64 / truth.len() as f64,
        precision,
        recall,
        f1,
    })
}

/// Sorted order of `scores` with ties grouped; yields `(start, end)` runs.
fn tie_runs(order: &[usize], scores: &[f64]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=order.len() {
        if i == order.len() || scores[order[i]] != scores[order[start]] {
            runs.push((start, i));
            start = i;
        }
    }
    runs
}

fn sorted_order(scores: &[f64]) -> Result<Vec<usize>> {
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::UndefinedMetric("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    Ok(order)
}

/// Area under the ROC curve, `P(s+ > s-) + P(s+ = s-) / 2`, from midranks.
pub fn roc_auc(truth: &[u8], scores: &[f64]) -> Result<f64> {
    same_len(truth.len(), scores.len())?;
    let n_pos = truth.iter().filter(|&&t| t != 0).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("ROC-AUC needs both classes in the truth".into()));
    }
    let order = sorted_order(scores)?;
    let mut rank_sum = 0.0;
    for (start, end) in tie_runs(&order, scores) {
        let midrank = (start + end + 1) as f64 / 2.0;
        let pos = order[start..end].iter().filter(|&&i| truth[i] != 0).count();
        rank_sum += midrank * pos as f64;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// `(FPR, TPR)` points from the highest threshold down, starting at `(0, 0)`.
pub fn roc_curve(truth: &[u8], scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    same_len(truth.len(), scores.len())?;
    let n_pos = truth.iter().filter(|&&t| t != 0).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("ROC curve needs both classes in the truth".into()));
    }
    let order = sorted_order(scores)?;
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0, 0);
    for &(start, end) in tie_runs(&order, scores).iter().rev() {
        for &i in &order[start..end] {
            if truth[i] != 0 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    Ok(points)
}

/// Trapezoidal area under a piecewise-linear curve.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    /// Least-squares slope of estimate on truth through the origin.
    pub slope: Option<f64>,
    /// Least-squares slope with a free intercept.
    pub slope_intercept: Option<f64>,
    pub ccc: f64,
    pub pearson: Option<f64>,
    pub xy_mse: f64,
}

/// Agreement between true and estimated magnitude fields over all voxels.
pub fn magnitude_fidelity(truth: &[f64], estimate: &[f64]) -> Result<FidelityReport> {
    same_len(truth.len(), estimate.len())?;
    if truth.is_empty() {
        return Err(Error::UndefinedMetric("empty fields".into()));
    }
    let n = truth.len() as f64;
    let mx = truth.iter().sum::<f64>() / n;
    let my = estimate.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy, mut xx, mut xy, mut se) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in truth.iter().zip(estimate) {
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
        sxy += (x - mx) * (y - my);
        xx += x * x;
        xy += x * y;
        se += (y - x).powi(2);
    }
    let (sxx, syy, sxy) = (sxx / n, syy / n, sxy / n);
    let denom = sxx + syy + (mx - my).powi(2);
    // A zero denominator means both fields are the same constant.
    let ccc = if denom > 0.0 { 2.0 * sxy / denom } else { 1.0 };
    Ok(FidelityReport {
        slope: (xx > 0.0).then(|| xy / xx),
        slope_intercept: (sxx > 0.0).then(|| sxy / sxx),
        ccc,
        pearson: (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt()),
        xy_mse: se / n,
    })
}

/// One row of an evaluation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub auc: Option<f64>,
    pub slope: Option<f64>,
    pub ccc: Option<f64>,
    pub xy_mse: Option<f64>,
    pub time_seconds: Option<f64>,
}

impl MetricsRow {
    pub const HEADER: &'static str = "accuracy,precision,recall,f1,auc,slope,ccc,xy_mse,time_seconds";

    /// Scores `predicted`/`incl_prob`/`est_mag` against the truth.
    pub fn evaluate(
        true_active: &[u8],
        true_mag: &[f64],
        predicted: &[u8],
        incl_prob: &[f64],
        est_mag: &[f64],
        time_seconds: Option<f64>,
    ) -> Result<Self> {
        let c = classification_metrics(true_active, predicted)?;
        let auc = match roc_auc(true_active, incl_prob) {
            Ok(a) => Some(a),
            Err(Error::UndefinedMetric(_)) => None,
            Err(e) => return Err(e),
        };
        let f = magnitude_fidelity(true_mag, est_mag)?;
        Ok(MetricsRow {
            accuracy: Some(c.accuracy),
            precision: c.precision,
            recall: c.recall,
            f1: c.f1,
            auc,
            slope: f.slope,
            ccc: Some(f.ccc),
            xy_mse: Some(f.xy_mse),
            time_seconds,
        })
    }

    pub fn fields(&self) -> [Option<f64>; 9] {
        [
            self.accuracy,
            self.precision,
            self.recall,
            self.f1,
            self.auc,
            self.slope,
            self.ccc,
            self.xy_mse,
            self.time_seconds,
        ]
    }

    fn from_fields(f: [Option<f64>; 9]) -> Self {
        MetricsRow {
            accuracy: f[0],
            precision: f[1],
            recall: f[2],
            f1: f[3],
            auc: f[4],
            slope: f[5],
            ccc: f[6],
            xy_mse: f[7],
            time_seconds: f[8],
        }
    }

    /// Column-wise mean over the rows where each column is defined.
    pub fn mean(rows: &[MetricsRow]) -> MetricsRow {
        let mut out = [None; 9];
        for (k, slot) in out.iter_mut().enumerate() {
            let vals: Vec<f64> = rows.iter().filter_map(|r| r.fields()[k]).collect();
            if !vals.is_empty() {
                *slot = Some(vals.iter().sum::<f64>() / vals.len() as f64);
            }
        }
        MetricsRow::from_fields(out)
    }

    /// Comma-separated values with `NA` for undefined entries.
    pub fn csv(&self) -> String {
        let cells: Vec<String> = self
            .fields()
            .iter()
            .map(|v| v.map_or_else(|| "NA".to_string(), |x| format!("{x}")))
            .collect();
        cells.join(",")
    }

    pub fn parse_csv(line: &str) -> Result<Self> {
        let cells: Vec<&str> = line.trim().split(',').collect();
        if cells.len() != 9 {
            return Err(Error::InvalidSpec(format!("metrics row needs 9 columns: '{line}'")));
        }
        let mut f = [None; 9];
        for (slot, cell) in f.iter_mut().zip(&cells) {
            *slot = match cell.trim() {
                "NA" => None,
                s => Some(
                    s.parse()
                        .map_err(|_| Error::InvalidSpec(format!("bad metric value '{s}'")))?,
                ),
            };
        }
        Ok(MetricsRow::from_fields(f))
    }
}

/// A labelled table: one row per dataset followed by a `mean` row.
pub fn metrics_table(rows: &[(String, MetricsRow)]) -> String {
    let mut out = format!("label,{}\n", MetricsRow::HEADER);
    for (label, row) in rows {
        let _ = writeln!(out, "{label},{}", row.csv());
    }
    if !rows.is_empty() {
        let plain: Vec<MetricsRow> = rows.iter().map(|(_, r)| *r).collect();
        let _ = writeln!(out, "mean,{}", MetricsRow::mean(&plain).csv());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_prediction() {
        let t = [1, 0, 1, 0, 0];
        let r = classification_metrics(&t, &t).unwrap();
        assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (1.0, Some(1.0), Some(1.0), Some(1.0)));
    }

    #[test]
    fn single_hit_slice_counts() {
        // 50 positives, 9166 negatives, one detection.
        let mut truth = vec![0u8; 9216];
        truth[..50].iter_mut().for_each(|t| *t = 1);
        let mut pred = vec![0u8; 9216];
        pred[0] = 1;
        let r = classification_metrics(&truth, &pred).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_, r.tn), (1, 0, 49, 9166));
        assert_eq!(r.precision, Some(1.0));
        assert!((r.recall.unwrap() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn no_detections_leave_precision_undefined() {
        let r = classification_metrics(&[1, 0, 1, 0], &[0, 0, 0, 0]).unwrap();
        assert_eq!(r.precision, None);
        assert_eq!(r.recall, Some(0.0));
        assert_eq!(r.f1, None);
    }

    #[test]
    fn mismatched_shapes_fail() {
        assert!(classification_metrics(&[1, 0], &[1]).is_err());
        assert!(roc_auc(&[1, 0], &[0.5]).is_err());
        assert!(magnitude_fidelity(&[1.0], &[]).is_err());
    }

    #[test]
    fn auc_extremes() {
        assert_eq!(roc_auc(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0, 1, 0, 1], &[0.3; 4]).unwrap(), 0.5);
        assert!(matches!(roc_auc(&[1, 1], &[0.1, 0.2]), Err(Error::UndefinedMetric(_))));
    }

    fn brute_force_auc(truth: &[u8], scores: &[f64]) -> f64 {
        let (mut num, mut pairs) = (0.0, 0.0);
        for (i, &ti) in truth.iter().enumerate() {
            for (j, &tj) in truth.iter().enumerate() {
                if ti == 1 && tj == 0 {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / pairs
    }

    #[test]
    fn auc_six_points_matches_pair_count() {
        let truth = [1, 0, 1, 0, 1, 0];
        let scores = [0.9, 0.4, 0.4, 0.1, 0.35, 0.8];
        let a = roc_auc(&truth, &scores).unwrap();
        assert!((a - brute_force_auc(&truth, &scores)).abs() < 1e-15);
        // 9 pairs: wins 0.9>all(3), 0.4 vs {0.4 tie, 0.1, 0.8 loss} = 1.5, 0.35 vs {0.1} = 1.
        assert!((a - 5.5 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn auc_matches_external_reference_value() {
        let truth = [1, 1, 0, 1, 0, 1, 0, 0, 1, 1, 1, 0];
        let scores = [
            0.07954696030457338,
            2.1039526613830346,
            -0.1201952328812757,
            0.28145785314481458,
            -0.020528698670943726,
            -0.6625965461217288,
            0.51824957300747021,
            1.7345342477086778,
            -0.059994608245898924,
            0.74399695009589939,
            -0.83144275519695576,
            -1.6866803544338151,
        ];
        assert!((roc_auc(&truth, &scores).unwrap() - 0.542857142857).abs() < 1e-12);
    }

    #[test]
    fn fidelity_identity_and_constant() {
        let t = [0.0, 0.1, 0.3, 0.0, 0.2];
        let f = magnitude_fidelity(&t, &t).unwrap();
        assert_eq!((f.slope, f.ccc, f.xy_mse), (Some(1.0), 1.0, 0.0));
        let c = magnitude_fidelity(&t, &[0.4; 5]).unwrap();
        assert_eq!(c.ccc, 0.0);
        assert_eq!(magnitude_fidelity(&[0.0; 3], &[1.0; 3]).unwrap().slope, None);
    }

    #[test]
    fn fidelity_doubled_estimate() {
        let t = [1.0, 2.0, 3.0, 4.0, 5.0];
        let e: Vec<f64> = t.iter().map(|x| 2.0 * x).collect();
        let f = magnitude_fidelity(&t, &e).unwrap();
        assert!((f.slope.unwrap() - 2.0).abs() < 1e-15);
        // Means 3 and 6; population variances 2 and 8; covariance 4.
        let ccc = 2.0 * 4.0 / (2.0 + 8.0 + 9.0);
        assert!((f.ccc - ccc).abs() < 1e-15);
        assert!((f.xy_mse - 11.0).abs() < 1e-12);
    }

    #[test]
    fn roc_curve_area_equals_auc() {
        let truth = [1, 0, 1, 0, 1, 0, 0, 1];
        let scores = [0.9, 0.4, 0.4, 0.1, 0.35, 0.8, 0.35, 0.2];
        let pts = roc_curve(&truth, &scores).unwrap();
        assert_eq!(*pts.last().unwrap(), (1.0, 1.0));
        assert!((trapezoid_area(&pts) - roc_auc(&truth, &scores).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn csv_rows_round_trip_with_na() {
        let r = MetricsRow {
            accuracy: Some(0.5),
            precision: None,
            recall: Some(0.0),
            f1: None,
            auc: Some(0.75),
            slope: Some(1.25),
            ccc: Some(0.1),
            xy_mse: Some(1.6e-5),
            time_seconds: None,
        };
        assert_eq!(MetricsRow::parse_csv(&r.csv()).unwrap(), r);
        assert!(r.csv().starts_with("0.5,NA,0,NA"));
    }

    #[test]
    fn mean_row_is_arithmetic_mean() {
        let mk = |a: f64| MetricsRow::parse_csv(&format!("{a},{a},{a},{a},{a},{a},{a},{a},{a}")).unwrap();
        let rows = [mk(0.1), mk(0.25), mk(0.7)];
        let m = MetricsRow::mean(&rows);
        for v in m.fields() {
            assert!((v.unwrap() - 1.05 / 3.0).abs() < 1e-12);
        }
        let table = metrics_table(&[("a".into(), rows[0]), ("b".into(), rows[1]), ("c".into(), rows[2])]);
        assert_eq!(table.lines().count(), 5);
        assert!(table.lines().last().unwrap().starts_with("mean,"));
    }

    proptest! {
        #[test]
        fn auc_invariant_under_monotone_transform(
            data in proptest::collection::vec((0u8..2, -5.0f64..5.0), 2..40)
        ) {
            let truth: Vec<u8> = data.iter().map(|d| d.0).collect();
            let scores: Vec<f64> = data.iter().map(|d| d.1).collect();
            prop_assume!(truth.contains(&0) && truth.contains(&1));
            let warped: Vec<f64> = scores.iter().map(|s| s.exp() * 3.0 + 1.0).collect();
            let a = roc_auc(&truth, &scores).unwrap();
            prop_assert!((a - roc_auc(&truth, &warped).unwrap()).abs() < 1e-12);
            prop_assert!((a - brute_force_auc(&truth, &scores)).abs() < 1e-12);
        }

        #[test]
        fn confusion_counts_permutation_invariant(
            data in proptest::collection::vec((0u8..2, 0u8..2), 1..60),
            rot in 0usize..60
        ) {
            let t: Vec<u8> = data.iter().map(|d| d.0).collect();
            let p: Vec<u8> = data.iter().map(|d| d.1).collect();
            let k = rot % t.len();
            let (mut t2, mut p2) = (t.clone(), p.clone());
            t2.rotate_left(k);
            p2.rotate_left(k);
            t2.reverse();
            p2.reverse();
            let a = classification_metrics(&t, &p).unwrap();
            let b = classification_metrics(&t2, &p2).unwrap();
            prop_assert_eq!((a.tp, a.fp, a.fn_, a.tn), (b.tp, b.fp, b.fn_, b.tn));
            prop_assert_eq!(a.tp + a.fp + a.fn_ + a.tn, t.len());
        }

        #[test]
        fn ccc_bounded_by_pearson(
            data in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 3..40)
        ) {
            let x: Vec<f64> = data.iter().map(|d| d.0).collect();
            let y: Vec<f64> = data.iter().map(|d| d.1).collect();
            let f = magnitude_fidelity(&x, &y).unwrap();
            if let Some(r) = f.pearson {
                prop_assert!(f.ccc.abs() <= r.abs() + 1e-12);
            }
            prop_assert_eq!(f.xy_mse == 0.0, x == y);
        }
    }
}
