//! Full conditional draws of the Gibbs sweep.
//!
//! Complex pairs stand for the real two-vectors `(Re, Im)`. With the real
//! design `Xr* = [[x*_Re, -x*_Im], [x*_Im, x*_Re]]` one has
//! `Xr*' Xr* = |x*|^2 I2` and `Xr*' yr* = (Re c, Im c)` with
//! `c = sum conj(x*_t) y*_t`, so every 2x2 solve reduces to a scalar division.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::random::{gamma, inverse_gamma, norm_cdf, standard_normal, truncated_normal};

/// Lag-one quasi-differenced series `y* = y_now - rho y_lag1` and
/// `x* = x_now - rho x_lag1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardTransform {
    pub y_star: Vec<Complex64>,
    pub x_star: Vec<Complex64>,
}

impl BackwardTransform {
    /// The stacked real design `Xr*`, `2(T-1) x 2`.
    pub fn xr_star(&self) -> DMatrix<f64> {
        real_pair_matrix(&self.x_star)
    }

    /// The stacked real response `(y*_Re, y*_Im)`.
    pub fn yr_star(&self) -> DVector<f64> {
        stack_real(&self.y_star)
    }

    pub fn projected(&self) -> ProjectedData {
        ProjectedData {
            x_norm2: self.x_star.iter().map(|x| x.norm_sqr()).sum(),
            cross: self
                .x_star
                .iter()
                .zip(&self.y_star)
                .map(|(x, y)| x.conj() * y)
                .sum(),
        }
    }
}

/// `[[v_Re, -v_Im], [v_Im, v_Re]]` stacked as a `2n x 2` real matrix.
pub fn real_pair_matrix(v: &[Complex64]) -> DMatrix<f64> {
    let n = v.len();
    DMatrix::from_fn(2 * n, 2, |r, c| {
        let z = v[r % n];
        match (r < n, c) {
            (true, 0) => z.re,
            (true, _) => -z.im,
            (false, 0) => z.im,
            (false, _) => z.re,
        }
    })
}

fn stack_real(v: &[Complex64]) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |r, _| if r < n { v[r].re } else { v[r - n].im })
}

pub fn backward_transform(y: &[Complex64], x: &[f64], rho: Complex64) -> Result<BackwardTransform> {
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "series of length {} against design of length {}",
            y.len(),
            x.len()
        )));
    }
    if y.len() < 3 {
        return Err(Error::InsufficientData {
            what: "time points",
            needed: 3,
            got: y.len(),
        });
    }
    let y_star = y.windows(2).map(|w| w[1] - rho * w[0]).collect();
    let x_star = x
        .windows(2)
        .map(|w| Complex64::new(w[1], 0.0) - rho * w[0])
        .collect();
    Ok(BackwardTransform { y_star, x_star })
}

/// The two sufficient statistics of the whitened regression:
/// `Xr*' Xr* = x_norm2 I2` and `Xr*' yr* = (cross.re, cross.im)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedData {
    pub x_norm2: f64,
    pub cross: Complex64,
}

/// `log(L1* / L0)`: the marginal likelihood of the slab (beta integrated out)
/// against the spike.
pub fn log_likelihood_ratio(p: &ProjectedData, sigma2: f64, tau2: f64) -> f64 {
    let ridge = sigma2 / tau2;
    let a = p.x_norm2 + ridge;
    ridge.ln() - a.ln() + p.cross.norm_sqr() / (2.0 * sigma2 * a)
}

/// Prior probability that a voxel is active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InclusionPrior {
    /// `Phi(psi + eta)`.
    Probit { psi: f64, eta: f64 },
    /// A probability given directly.
    Probability(f64),
}

impl InclusionPrior {
    /// `(P(gamma = 1), P(gamma = 0))`, each computed without cancellation.
    fn masses(&self) -> (f64, f64) {
        match *self {
            InclusionPrior::Probit { psi, eta } => (norm_cdf(psi + eta), norm_cdf(-(psi + eta))),
            InclusionPrior::Probability(p) => (p, 1.0 - p),
        }
    }
}

/// `P = pi / (pi + (L0/L1*) (1 - pi))`, assembled in log space.
pub fn inclusion_probability(log_lr: f64, prior: InclusionPrior) -> f64 {
    let (p1, p0) = prior.masses();
    if p1 <= 0.0 {
        return 0.0;
    }
    if p0 <= 0.0 {
        return 1.0;
    }
    let log_odds = p1.ln() - p0.ln() + log_lr;
    if log_odds >= 0.0 {
        1.0 / (1.0 + (-log_odds).exp())
    } else {
        let e = log_odds.exp();
        e / (1.0 + e)
    }
}

/// The same probability evaluated directly; overflows for strong signals.
pub fn inclusion_probability_naive(log_lr: f64, prior: InclusionPrior) -> f64 {
    let (p1, p0) = prior.masses();
    let ratio = (-log_lr).exp();
    p1 / (p1 + ratio * p0)
}

pub fn sample_gamma<R: Rng + ?Sized>(
    p: &ProjectedData,
    sigma2: f64,
    tau2: f64,
    prior: InclusionPrior,
    rng: &mut R,
) -> u8 {
    let prob = inclusion_probability(log_likelihood_ratio(p, sigma2, tau2), prior);
    let u: f64 = rng.random();
    u8::from(u < prob)
}

/// Slab draw `N2(c / A, sigma2 / A I2)` with `A = |x*|^2 + sigma2/tau2`, or 0
/// under the spike.
pub fn sample_beta<R: Rng + ?Sized>(
    p: &ProjectedData,
    sigma2: f64,
    tau2: f64,
    gamma: u8,
    rng: &mut R,
) -> Complex64 {
    if gamma == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let a = p.x_norm2 + sigma2 / tau2;
    let mean = p.cross / a;
    let sd = (sigma2 / a).sqrt();
    let re = standard_normal(rng);
    let im = standard_normal(rng);
    mean + Complex64::new(re, im) * sd
}

/// Lag statistics of the residual `w = y - x beta`:
/// `|w_lag1|^2`, `sum conj(w_lag1) w_now` and `|w_now|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub lag_norm2: f64,
    pub lag_cross: Complex64,
    pub now_norm2: f64,
}

impl ResidualStats {
    /// `|w_now - rho w_lag1|^2`.
    pub fn rss(&self, rho: Complex64) -> f64 {
        self.now_norm2 - 2.0 * (rho.conj() * self.lag_cross).re + rho.norm_sqr() * self.lag_norm2
    }
}

pub fn residual_stats(y: &[Complex64], x: &[f64], beta: Complex64) -> ResidualStats {
    let mut stats = ResidualStats {
        lag_norm2: 0.0,
        lag_cross: Complex64::new(0.0, 0.0),
        now_norm2: 0.0,
    };
    let mut prev = y[0] - beta * x[0];
    for (yt, &xt) in y.iter().zip(x).skip(1) {
        let w = yt - beta * xt;
        stats.lag_norm2 += prev.norm_sqr();
        stats.lag_cross += prev.conj() * w;
        stats.now_norm2 += w.norm_sqr();
        prev = w;
    }
    stats
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoDraw {
    pub rho: Complex64,
    /// Set when the lagged residuals vanish and no draw was possible.
    pub degenerate: bool,
}

/// Below this lagged-residual energy the AR coefficient is unidentified.
pub const DEGENERATE_RESIDUAL: f64 = 1e-300;

/// `N2(mu, sigma2 (W'W)^-1)` with `W'W = |w_lag1|^2 I2`, flat prior.
pub fn sample_rho_from_stats<R: Rng + ?Sized>(stats: &ResidualStats, sigma2: f64, rng: &mut R) -> RhoDraw {
    if !(stats.lag_norm2 >= DEGENERATE_RESIDUAL) {
        return RhoDraw {
            rho: Complex64::new(0.0, 0.0),
            degenerate: true,
        };
    }
    let mean = stats.lag_cross / stats.lag_norm2;
    let sd = (sigma2 / stats.lag_norm2).sqrt();
    let re = standard_normal(rng);
    let im = standard_normal(rng);
    RhoDraw {
        rho: mean + Complex64::new(re, im) * sd,
        degenerate: false,
    }
}

pub fn sample_rho<R: Rng + ?Sized>(
    y: &[Complex64],
    x: &[f64],
    beta: Complex64,
    sigma2: f64,
    rng: &mut R,
) -> Result<RhoDraw> {
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch("series and design differ in length".into()));
    }
    if y.len() < 3 {
        return Err(Error::InsufficientData {
            what: "time points",
            needed: 3,
            got: y.len(),
        });
    }
    Ok(sample_rho_from_stats(&residual_stats(y, x, beta), sigma2, rng))
}

/// `IG(n_pairs, rss / 2)` under the Jeffreys prior, where `n_pairs = T - 1`.
pub fn sample_sigma2_from_rss<R: Rng + ?Sized>(rss: f64, n_pairs: usize, rng: &mut R) -> Result<f64> {
    if !(rss > 0.0 && rss.is_finite()) {
        return Err(Error::DegeneratePosterior(format!(
            "residual sum of squares {rss} leaves sigma2 without a proper posterior"
        )));
    }
    Ok(inverse_gamma(rng, n_pairs as f64, 0.5 * rss))
}

pub fn sample_sigma2<R: Rng + ?Sized>(
    w_now: &[Complex64],
    w_lag: &[Complex64],
    rho: Complex64,
    rng: &mut R,
) -> Result<f64> {
    if w_now.len() != w_lag.len() || w_now.len() < 2 {
        return Err(Error::InsufficientData {
            what: "residual pairs",
            needed: 2,
            got: w_now.len().min(w_lag.len()),
        });
    }
    let rss = w_now.iter().zip(w_lag).map(|(n, l)| (n - rho * l).norm_sqr()).sum();
    sample_sigma2_from_rss(rss, w_now.len(), rng)
}

/// `IG(k, |beta_active|^2 / 2)` over the `k` active voxels; keeps `current`
/// when no voxel is active.
pub fn sample_tau2<R: Rng + ?Sized>(gammas: &[u8], betas: &[Complex64], current: f64, rng: &mut R) -> f64 {
    let (k, ss) = gammas
        .iter()
        .zip(betas)
        .filter(|(&g, _)| g == 1)
        .fold((0usize, 0.0), |(k, ss), (_, b)| (k + 1, ss + b.norm_sqr()));
    if k == 0 || !(ss > 0.0) {
        return current;
    }
    inverse_gamma(rng, k as f64, 0.5 * ss)
}

/// Probit latent with the spatial effect integrated out:
/// `TN(0, nu2 / kappa)` on `(0, inf)` if active, `(-inf, 0)` otherwise.
pub fn sample_eta<R: Rng + ?Sized>(gamma: u8, nu2: f64, kappa: f64, rng: &mut R) -> f64 {
    let sd = (nu2 / kappa).sqrt();
    loop {
        let draw = if gamma == 1 {
            truncated_normal(rng, 0.0, sd, 0.0, f64::INFINITY)
        } else {
            truncated_normal(rng, 0.0, sd, f64::NEG_INFINITY, 0.0)
        };
        // An exact zero can only come from underflow; redraw to keep the sign strict.
        if draw != 0.0 {
            return draw;
        }
    }
}

/// `N_q(Qhat^-1 M' eta / kappa, Qhat^-1 / kappa)`; `qhat_inv_chol` is the
/// lower Cholesky factor of `Qhat^-1`.
pub fn sample_delta<R: Rng + ?Sized>(
    eta: &DVector<f64>,
    m: &DMatrix<f64>,
    qhat_inv: &DMatrix<f64>,
    qhat_inv_chol: &DMatrix<f64>,
    kappa: f64,
    rng: &mut R,
) -> DVector<f64> {
    let mean = qhat_inv * (m.transpose() * eta) / kappa;
    let z = DVector::from_fn(mean.len(), |_, _| standard_normal(rng));
    mean + qhat_inv_chol * z / kappa.sqrt()
}

/// `Gamma(V/2 + a_kappa, scale = [sum eta^2/nu2 / 2 + 1/b_kappa]^-1)`.
pub fn sample_kappa<R: Rng + ?Sized>(eta: &[f64], nu2: &[f64], a_kappa: f64, b_kappa: f64, rng: &mut R) -> f64 {
    let quad: f64 = eta.iter().zip(nu2).map(|(e, n)| e * e / n).sum();
    let shape = eta.len() as f64 / 2.0 + a_kappa;
    let rate = 0.5 * quad + 1.0 / b_kappa;
    gamma(rng, shape, 1.0 / rate)
}

/// Shared inclusion probability of the non-spatial prior,
/// `Beta(1 + k, 1 + V - k)`.
pub fn sample_eta_nonspatial<R: Rng + ?Sized>(gammas: &[u8], rng: &mut R) -> f64 {
    let k = gammas.iter().filter(|&&g| g == 1).count() as f64;
    let v = gammas.len() as f64;
    Beta::new(1.0 + k, 1.0 + v - k)
        .expect("beta parameters are at least 1")
        .sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::stream_rng;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_series(n: usize, seed: u64) -> (Vec<Complex64>, Vec<f64>) {
        let mut rng = stream_rng(seed, 0);
        let y = (0..n).map(|_| c(standard_normal(&mut rng), standard_normal(&mut rng))).collect();
        let x = (0..n).map(|_| standard_normal(&mut rng)).collect();
        (y, x)
    }

    #[test]
    fn zero_rho_drops_first_sample() {
        let (y, x) = random_series(6, 1);
        let t = backward_transform(&y, &x, c(0.0, 0.0)).unwrap();
        assert_eq!(t.y_star, y[1..].to_vec());
        let xr = t.xr_star();
        for r in 0..5 {
            assert_eq!(xr[(r, 0)], x[r + 1]);
            assert_eq!(xr[(r, 1)], 0.0);
            assert_eq!(xr[(r + 5, 0)], 0.0);
            assert_eq!(xr[(r + 5, 1)], x[r + 1]);
        }
    }

    #[test]
    fn unit_rho_gives_first_differences() {
        let x = vec![1.0, 4.0, 9.0, 16.0];
        let y: Vec<Complex64> = x.iter().map(|&v| c(v, 0.0)).collect();
        let t = backward_transform(&y, &x, c(1.0, 0.0)).unwrap();
        assert_eq!(t.y_star, vec![c(3.0, 0.0), c(5.0, 0.0), c(7.0, 0.0)]);
        assert!(backward_transform(&y[..2], &x[..2], c(0.0, 0.0)).is_err());
    }

    #[test]
    fn projected_data_matches_dense_products() {
        for seed in 0..20 {
            let (y, x) = random_series(9, seed);
            let t = backward_transform(&y, &x, c(0.3, -0.7)).unwrap();
            let (xr, yr) = (t.xr_star(), t.yr_star());
            let p = t.projected();
            let xtx = xr.transpose() * &xr;
            let xty = xr.transpose() * &yr;
            assert!((xtx[(0, 0)] - p.x_norm2).abs() < 1e-12 && (xtx[(1, 1)] - p.x_norm2).abs() < 1e-12);
            assert!(xtx[(0, 1)].abs() < 1e-12 && xtx[(1, 0)].abs() < 1e-12);
            assert!((xty[0] - p.cross.re).abs() < 1e-12 && (xty[1] - p.cross.im).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_prior_underflow_and_balance() {
        let p = ProjectedData { x_norm2: 5.0, cross: c(100.0, 100.0) };
        let prior = InclusionPrior::Probit { psi: -40.0, eta: 0.0 };
        let mut rng = stream_rng(0, 0);
        assert_eq!(inclusion_probability(log_likelihood_ratio(&p, 1.0, 1.0), prior), 0.0);
        for _ in 0..100 {
            assert_eq!(sample_gamma(&p, 1.0, 1.0, prior, &mut rng), 0);
        }
        let even = InclusionPrior::Probit { psi: 0.0, eta: 0.0 };
        assert!((inclusion_probability(0.0, even) - 0.5).abs() < 1e-15);
        assert!((inclusion_probability(0.0, InclusionPrior::Probability(0.5)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn beta_spike_and_vanishing_ridge() {
        let p = ProjectedData { x_norm2: 4.0, cross: c(2.0, -6.0) };
        let mut rng = stream_rng(0, 1);
        assert_eq!(sample_beta(&p, 1.0, 1.0, 0, &mut rng), c(0.0, 0.0));
        // With tau2 huge and sigma2 tiny the draw collapses onto least squares.
        let b = sample_beta(&p, 1e-20, 1e30, 1, &mut rng);
        assert!((b - c(0.5, -1.5)).norm() < 1e-8);
    }

    #[test]
    fn rho_recovers_exact_ar_relation() {
        let lag: Vec<Complex64> = (0..20).map(|t| c((t as f64).sin(), (0.3 * t as f64).cos())).collect();
        let rho = c(0.2, 0.9);
        // Build w with w_t = rho w_{t-1} for t >= 1, i.e. noise-free.
        let mut w = vec![lag[0]];
        for t in 1..20 {
            let next = rho * w[t - 1];
            w.push(next);
        }
        let x = vec![0.0; 20];
        let stats = residual_stats(&w, &x, c(0.0, 0.0));
        let mean = stats.lag_cross / stats.lag_norm2;
        assert!((mean - rho).norm() < 1e-10);
        let mut rng = stream_rng(0, 2);
        let zero = vec![c(0.0, 0.0); 10];
        let draw = sample_rho(&zero, &[0.0; 10], c(0.0, 0.0), 1.0, &mut rng).unwrap();
        assert!(draw.degenerate);
        assert_eq!(draw.rho, c(0.0, 0.0));
    }

    #[test]
    fn residual_gram_is_scalar_identity() {
        for seed in 0..20 {
            let (y, x) = random_series(12, seed + 100);
            let beta = c(0.4, -1.1);
            let w: Vec<Complex64> = y.iter().zip(&x).map(|(y, &x)| y - beta * x).collect();
            let wl = real_pair_matrix(&w[..11]);
            let gram = wl.transpose() * &wl;
            assert!(gram[(0, 1)].abs() < 1e-12 && gram[(1, 0)].abs() < 1e-12);
            assert!((gram[(0, 0)] - gram[(1, 1)]).abs() < 1e-12);
            let stats = residual_stats(&y, &x, beta);
            assert!((gram[(0, 0)] - stats.lag_norm2).abs() < 1e-10);
            let rhs = wl.transpose() * stack_real(&w[1..]);
            assert!((rhs[0] - stats.lag_cross.re).abs() < 1e-10);
            assert!((rhs[1] - stats.lag_cross.im).abs() < 1e-10);
        }
    }

    #[test]
    fn sigma2_shape_and_degenerate_case() {
        let mut rng = stream_rng(0, 3);
        let now = vec![c(1.0, 1.0), c(1.0, 1.0)];
        let lag = vec![c(0.0, 0.0), c(0.0, 0.0)];
        // T = 3: IG(shape 2, scale 2), mean 2.
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| sample_sigma2(&now, &lag, c(0.0, 0.0), &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 0.05, "{mean}");
        assert!(sample_sigma2(&lag, &lag, c(0.0, 0.0), &mut rng).is_err());
    }

    #[test]
    fn inverse_gamma_mean_oracle() {
        // IG(5, 3): mean 3/4, sd = 3 / (4 sqrt(3)).
        let mut rng = stream_rng(0, 4);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| inverse_gamma(&mut rng, 5.0, 3.0)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let se = 0.75 / 3f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 0.75).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn tau2_fallback_and_shapes() {
        let mut rng = stream_rng(0, 5);
        assert_eq!(sample_tau2(&[0, 0], &[c(0.0, 0.0); 2], 3.5, &mut rng), 3.5);
        // k = 1, beta = (3, 4): IG(1, 12.5) has median 12.5 / ln 2.
        let n = 100_001;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_tau2(&[1], &[c(3.0, 4.0)], 1.0, &mut rng)).collect();
        draws.sort_by(f64::total_cmp);
        let median = draws[n / 2];
        assert!((median / (12.5 / std::f64::consts::LN_2) - 1.0).abs() < 0.02, "{median}");
    }

    #[test]
    fn eta_signs_and_half_normal_mean() {
        let mut rng = stream_rng(0, 6);
        for _ in 0..1000 {
            assert!(sample_eta(1, 1.0, 3.0, &mut rng) > 0.0);
            assert!(sample_eta(0, 1.0, 3.0, &mut rng) < 0.0);
        }
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_eta(1, 2.0, 4.0, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let s: f64 = (2.0f64 / 4.0).sqrt();
        let expected = s * (2.0 / std::f64::consts::PI).sqrt();
        let sd = s * (1.0 - 2.0 / std::f64::consts::PI).sqrt();
        assert!((mean - expected).abs() < 3.0 * sd / (n as f64).sqrt(), "{mean} vs {expected}");
    }

    #[test]
    fn delta_mean_and_scaling() {
        let m = DMatrix::from_row_slice(3, 2, &[0.6, 0.0, 0.8, 0.0, 0.0, 1.0]);
        let qhat_inv = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.4]);
        let chol = qhat_inv.clone().cholesky().unwrap().l();
        let mut rng = stream_rng(0, 7);
        let zero = DVector::zeros(3);
        let n = 50_000;
        for kappa in [1.0, 2.0] {
            let mut mean = DVector::zeros(2);
            let mut cov = DMatrix::zeros(2, 2);
            let draws: Vec<DVector<f64>> = (0..n).map(|_| sample_delta(&zero, &m, &qhat_inv, &chol, kappa, &mut rng)).collect();
            for d in &draws {
                mean += d;
            }
            mean /= n as f64;
            for d in &draws {
                cov += (d - &mean) * (d - &mean).transpose();
            }
            cov /= n as f64;
            assert!(mean.norm() < 0.02);
            let target = &qhat_inv / kappa;
            assert!((cov - target).abs().max() < 0.02 / kappa);
        }
    }

    #[test]
    fn kappa_parameters() {
        let mut rng = stream_rng(0, 8);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| sample_kappa(&[0.0], &[1.0], 0.5, 2000.0, &mut rng)).sum::<f64>() / n as f64;
        // Gamma(1, 2000): mean 2000, sd 2000.
        assert!((mean - 2000.0).abs() < 3.0 * 2000.0 / (n as f64).sqrt(), "{mean}");
        let mean: f64 = (0..n).map(|_| sample_kappa(&[1.0, 1.0, 1.0], &[1.0; 3], 0.5, 2000.0, &mut rng)).sum::<f64>() / n as f64;
        let expected = 2.0 / 1.5005;
        assert!((mean - expected).abs() < 3.0 * expected / (2f64.sqrt() * (n as f64).sqrt()));
    }

    #[test]
    fn nonspatial_beta_conjugacy() {
        let mut rng = stream_rng(0, 9);
        let n = 100_000;
        let mean = |g: &[u8], rng: &mut crate::random::SamplerRng| (0..n).map(|_| sample_eta_nonspatial(g, rng)).sum::<f64>() / n as f64;
        assert!((mean(&[1; 10], &mut rng) - 11.0 / 12.0).abs() < 0.002);
        assert!((mean(&[0; 10], &mut rng) - 1.0 / 12.0).abs() < 0.002);
        assert!((mean(&[1, 0, 1, 0, 1, 0, 1, 0, 1, 0], &mut rng) - 0.5).abs() < 0.003);
    }

    proptest! {
        #[test]
        fn log_space_matches_naive(
            x_norm2 in 0.0f64..50.0,
            cr in -5.0f64..5.0,
            ci in -5.0f64..5.0,
            sigma2 in 0.1f64..5.0,
            tau2 in 0.01f64..10.0,
            z in -6.0f64..6.0,
        ) {
            let p = ProjectedData { x_norm2, cross: Complex64::new(cr, ci) };
            let llr = log_likelihood_ratio(&p, sigma2, tau2);
            let prior = InclusionPrior::Probit { psi: z, eta: 0.0 };
            let naive = inclusion_probability_naive(llr, prior);
            prop_assume!(naive.is_finite());
            prop_assert!((inclusion_probability(llr, prior) - naive).abs() < 1e-10);
        }

        #[test]
        fn rss_expansion_matches_direct(re in -1.0f64..1.0, im in -1.0f64..1.0, seed in 0u64..1000) {
            let (y, x) = random_series(15, seed);
            let beta = Complex64::new(0.3, 0.2);
            let rho = Complex64::new(re, im);
            let stats = residual_stats(&y, &x, beta);
            let w: Vec<Complex64> = y.iter().zip(&x).map(|(y, &x)| y - beta * x).collect();
            let direct: f64 = w.windows(2).map(|p| (p[1] - rho * p[0]).norm_sqr()).sum();
            prop_assert!((stats.rss(rho) - direct).abs() < 1e-9 * direct.max(1.0));
        }
    }
}
