use std::f64::consts::PI;

use super::ChainSummary;
use crate::dataset::Field;
use crate::error::{Error, Result};
use crate::parcellation::Partition;

/// Whole-image posterior summaries stitched from the parcel chains.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultMaps {
    pub activation: Field<u8>,
    pub magnitude: Field<f64>,
    /// `atan2(Im, Re)` of the posterior mean where active, NaN elsewhere.
    pub phase: Field<f64>,
    pub incl_prob: Field<f64>,
    pub mcse: Field<f64>,
}

impl ResultMaps {
    pub fn active_count(&self) -> usize {
        self.activation.values().iter().filter(|&&a| a == 1).count()
    }
}

/// Maps `atan2` output `-pi` onto `pi` so phases lie in `(-pi, pi]`.
fn principal_phase(im: f64, re: f64) -> f64 {
    let p = im.atan2(re);
    if p <= -PI {
        PI
    } else {
        p
    }
}

pub fn summarize(chains: &[ChainSummary], partition: &Partition, threshold: f64) -> Result<ResultMaps> {
    let dims = partition.dims.clone();
    let n = dims.voxel_count();
    let mut by_parcel: Vec<Option<&ChainSummary>> = vec![None; partition.n_parcels()];
    for c in chains {
        let slot = by_parcel
            .get_mut(c.parcel)
            .ok_or_else(|| Error::InvalidSpec(format!("chain for unknown parcel {}", c.parcel)))?;
        *slot = Some(c);
    }
    let mut activation = vec![0u8; n];
    let mut magnitude = vec![0.0; n];
    let mut phase = vec![f64::NAN; n];
    let mut incl = vec![0.0; n];
    let mut mc = vec![0.0; n];
    for (g, voxels) in partition.parcels.iter().enumerate() {
        let c = by_parcel[g].ok_or_else(|| Error::InvalidSpec(format!("no result for parcel {g}")))?;
        if c.incl_prob.len() != voxels.len() || c.beta_mean.len() != voxels.len() {
            return Err(Error::DimensionMismatch(format!(
                "parcel {g} has {} voxels, result has {}",
                voxels.len(),
                c.incl_prob.len()
            )));
        }
        for (k, &v) in voxels.iter().enumerate() {
            let b = c.beta_mean[k];
            incl[v] = c.incl_prob[k];
            mc[v] = c.mcse[k];
            magnitude[v] = b.norm();
            if c.incl_prob[k] > threshold {
                activation[v] = 1;
                phase[v] = principal_phase(b.im, b.re);
            }
        }
    }
    Ok(ResultMaps {
        activation: Field::new(dims.clone(), activation)?,
        magnitude: Field::new(dims.clone(), magnitude)?,
        phase: Field::new(dims.clone(), phase)?,
        incl_prob: Field::new(dims.clone(), incl)?,
        mcse: Field::new(dims, mc)?,
    })
}
