use crate::error::{Error, Result};

/// Batch-means Monte Carlo standard error of the mean of `draws`.
///
/// Uses `b = floor(sqrt(n))` batches of `floor(n / b)` draws each; trailing
/// draws that do not fill a batch are dropped.
pub fn mcse(draws: &[f64]) -> Result<f64> {
    let n = draws.len();
    if n < 16 {
        return Err(Error::InsufficientData {
            what: "draws for MCSE",
            needed: 16,
            got: n,
        });
    }
    let b = (n as f64).sqrt().floor() as usize;
    let len = n / b;
    let means: Vec<f64> = draws
        .chunks_exact(len)
        .take(b)
        .map(|c| c.iter().sum::<f64>() / len as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (b - 1) as f64;
    Ok(var.sqrt() / (b as f64).sqrt())
}
