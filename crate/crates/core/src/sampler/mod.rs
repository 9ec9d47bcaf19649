//! Gibbs sampler for the complex-valued spike-and-slab model with AR(1)
//! errors and the sparse spatial probit prior on the inclusion indicators.
//!
//! Per voxel `v` in a parcel the latent state is `(gamma, beta, rho, sigma2,
//! eta)`; the parcel carries `(tau2, delta, kappa)`. One sweep visits every
//! voxel (gamma, beta, rho, sigma2) and then the parcel-level quantities
//! (tau2, eta, delta, kappa). The non-spatial baseline replaces the probit
//! prior with a single Beta(1, 1) inclusion probability shared by the parcel.

mod chain;
pub mod conditionals;
mod diagnostics;
mod summary;

pub use chain::{run_parcel_chain, ParcelChain, ParcelData, TraceRow};
pub use conditionals::{
    backward_transform, inclusion_probability, inclusion_probability_naive, log_likelihood_ratio,
    real_pair_matrix, residual_stats, sample_beta, sample_delta, sample_eta, sample_eta_nonspatial,
    sample_gamma, sample_kappa, sample_rho, sample_rho_from_stats, sample_sigma2,
    sample_sigma2_from_rss, sample_tau2, BackwardTransform, InclusionPrior, ProjectedData,
    ResidualStats, RhoDraw,
};
pub use diagnostics::mcse;
pub use summary::{summarize, ResultMaps};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::random::norm_quantile;

/// Prior placed on the inclusion indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorMode {
    /// Probit link with the low-rank spatial random effect.
    Spatial,
    /// One Beta(1, 1) inclusion probability per parcel, no spatial term.
    NonSpatial,
}

impl std::str::FromStr for PriorMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "spatial" => Ok(PriorMode::Spatial),
            "nonspatial" | "non-spatial" => Ok(PriorMode::NonSpatial),
            other => Err(crate::Error::InvalidSpec(format!("unknown mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for PriorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PriorMode::Spatial => "spatial",
            PriorMode::NonSpatial => "nonspatial",
        })
    }
}

/// Default activation threshold on posterior inclusion probabilities for the
/// spatial prior.
pub const SPATIAL_THRESHOLD: f64 = 0.8722;
/// Default activation threshold for the non-spatial prior.
pub const NONSPATIAL_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Probit offset; the prior inclusion probability at `eta = 0` is `Phi(psi)`.
    pub psi: f64,
    /// Number of eigenvectors in the spatial basis.
    pub q: usize,
    pub a_kappa: f64,
    /// Scale of the Gamma prior on `kappa`.
    pub b_kappa: f64,
    pub n_iter: usize,
    pub n_burn: usize,
    pub threshold: f64,
    pub mode: PriorMode,
    pub mcse_tol: f64,
    pub seed: u64,
    /// Visit voxels in a fresh random order every sweep.
    pub random_scan: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            psi: norm_quantile(0.47),
            q: 5,
            a_kappa: 0.5,
            b_kappa: 2000.0,
            n_iter: 1000,
            n_burn: 500,
            threshold: SPATIAL_THRESHOLD,
            mode: PriorMode::Spatial,
            mcse_tol: 0.05,
            seed: 0,
            random_scan: false,
        }
    }
}

impl SamplerConfig {
    pub fn nonspatial() -> Self {
        SamplerConfig {
            mode: PriorMode::NonSpatial,
            threshold: NONSPATIAL_THRESHOLD,
            ..SamplerConfig::default()
        }
    }

    /// Sets the prior inclusion probability, `psi = Phi^-1(p)`.
    pub fn with_prior_probability(mut self, p: f64) -> Self {
        self.psi = norm_quantile(p);
        self
    }

    pub fn n_kept(&self) -> usize {
        self.n_iter - self.n_burn
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::Error::InvalidSpec(m.to_string()));
        if self.n_iter == 0 || self.n_burn >= self.n_iter {
            return bad("need 0 <= n_burn < n_iter");
        }
        if self.n_kept() < 16 {
            return Err(crate::Error::InsufficientData {
                what: "kept draws",
                needed: 16,
                got: self.n_kept(),
            });
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad("threshold must lie in (0, 1)");
        }
        if self.q == 0 {
            return bad("q must be positive");
        }
        if !(self.a_kappa > 0.0 && self.b_kappa > 0.0 && self.mcse_tol > 0.0) {
            return bad("a_kappa, b_kappa and mcse_tol must be positive");
        }
        if !self.psi.is_finite() {
            return bad("psi must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelState {
    pub gamma: u8,
    /// `(beta_Re, beta_Im)`.
    pub beta: Complex64,
    /// `(rho_Re, rho_Im)`.
    pub rho: Complex64,
    pub sigma2: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParcelState {
    pub tau2: f64,
    pub delta: DVector<f64>,
    pub kappa: f64,
    /// Shared inclusion probability of the non-spatial prior.
    pub inclusion: f64,
    pub voxels: Vec<VoxelState>,
}

/// Posterior summaries of one parcel chain, in parcel voxel order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    pub parcel: usize,
    pub incl_prob: Vec<f64>,
    pub beta_mean: Vec<Complex64>,
    pub mcse: Vec<f64>,
    pub converged: bool,
    pub n_kept: usize,
}
