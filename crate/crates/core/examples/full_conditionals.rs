//! Draws from each full conditional of the sampler on a tiny hand-made voxel
//! and compares the sample moments with their closed forms.
//!
//! cargo run --release --example full_conditionals

use num_complex::Complex64;

use cvfmri::random::stream_rng;
use cvfmri::sampler::{
    backward_transform, inclusion_probability, log_likelihood_ratio, sample_beta, sample_gamma, sample_rho,
    sample_sigma2, InclusionPrior,
};
use cvfmri::signal_model::center_series;

const N: usize = 50_000;

fn main() -> cvfmri::Result<()> {
    let c = Complex64::new;
    let x = center_series(&[0.0, 0.2, 1.0, 1.0, 0.8, 0.1, 0.0, 0.0]);
    let y = center_series(&[c(0.1, 0.0), c(0.3, 0.2), c(1.0, 0.9), c(1.2, 0.8), c(0.7, 0.9), c(0.0, 0.2), c(0.1, -0.1), c(-0.1, 0.0)]);
    let (rho, sigma2, tau2) = (c(0.2, 0.1), 0.05, 1.0);
    let mut rng = stream_rng(1, 0);

    let p = backward_transform(&y, &x, rho)?.projected();
    let prior = InclusionPrior::Probit { psi: -0.5, eta: 0.0 };
    let prob = inclusion_probability(log_likelihood_ratio(&p, sigma2, tau2), prior);
    let freq = (0..N).map(|_| f64::from(sample_gamma(&p, sigma2, tau2, prior, &mut rng))).sum::<f64>() / N as f64;
    println!("gamma:  P(gamma=1) = {prob:.4}, sampled frequency {freq:.4}");

    let a = p.x_norm2 + sigma2 / tau2;
    let mean_beta = (0..N).map(|_| sample_beta(&p, sigma2, tau2, 1, &mut rng)).sum::<Complex64>() / N as f64;
    println!("beta:   closed-form mean {:.4}, sampled {:.4}", p.cross / a, mean_beta);

    let beta = p.cross / a;
    let mean_rho = (0..N).map(|_| sample_rho(&y, &x, beta, sigma2, &mut rng).map(|d| d.rho)).sum::<cvfmri::Result<Complex64>>()? / N as f64;
    println!("rho:    sampled mean {mean_rho:.4}");

    let w: Vec<Complex64> = y.iter().zip(&x).map(|(y, &x)| y - beta * x).collect();
    let rss: f64 = w.windows(2).map(|p| (p[1] - rho * p[0]).norm_sqr()).sum();
    let t = y.len() as f64;
    let s2 = (0..N).map(|_| sample_sigma2(&w[1..], &w[..w.len() - 1], rho, &mut rng)).sum::<cvfmri::Result<f64>>()? / N as f64;
    println!("sigma2: closed-form mean {:.5}, sampled {s2:.5}", rss / 2.0 / (t - 2.0));
    Ok(())
}
