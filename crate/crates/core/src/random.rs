//! Seeding, normal-CDF helpers and the few non-standard variate generators
//! the sampler needs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};
use statrs::function::erf::{erfc, erfc_inv};

pub type SamplerRng = ChaCha8Rng;

/// One round of the splitmix64 output function.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the independent stream owned by unit `index` (a parcel or a voxel).
pub fn stream_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ index)
}

pub fn stream_rng(master: u64, index: u64) -> SamplerRng {
    SamplerRng::seed_from_u64(stream_seed(master, index))
}

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Gamma draw with the given shape and scale.
pub fn gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> f64 {
    Gamma::new(shape, scale)
        .expect("gamma parameters must be positive and finite")
        .sample(rng)
}

/// Inverse-gamma draw: if `X ~ Gamma(shape, 1/scale)` then `1/X ~ IG(shape, scale)`.
pub fn inverse_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> f64 {
    1.0 / gamma(rng, shape, 1.0 / scale)
}

/// Standard normal restricted to `[a, inf)` for `a` far in the upper tail,
/// by rejection from a translated exponential proposal.
fn upper_tail_normal<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
    let proposal = Exp::new(alpha).expect("positive rate");
    loop {
        let z = a + proposal.sample(rng);
        let u: f64 = rng.random();
        if u <= (-0.5 * (z - alpha) * (z - alpha)).exp() {
            return z;
        }
    }
}

/// Standard normal restricted to `[a, inf)`.
fn lower_bounded_standard<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    if a > TAIL_SWITCH {
        return upper_tail_normal(rng, a);
    }
    // Upper-tail mass Phi(-a) is at least ~6e-16 here; invert inside it.
    let tail = norm_cdf(-a);
    loop {
        let u: f64 = rng.random();
        let z = -norm_quantile(u * tail);
        if z.is_finite() && z >= a {
            return z;
        }
    }
}

/// Standardized bound beyond which inverse-CDF sampling switches to the
/// exponential rejection step.
pub const TAIL_SWITCH: f64 = 8.0;

/// Normal `N(mean, sd^2)` truncated to `[lower, upper]`; either bound may be
/// infinite.
pub fn truncated_normal<R: Rng + ?Sized>(
    rng: &mut R,
    mean: f64,
    sd: f64,
    lower: f64,
    upper: f64,
) -> f64 {
    assert!(sd > 0.0 && lower < upper, "empty truncation interval");
    let a = (lower - mean) / sd;
    let b = (upper - mean) / sd;
    let z = match (a.is_finite(), b.is_finite()) {
        (false, false) => standard_normal(rng),
        (true, false) => lower_bounded_standard(rng, a),
        (false, true) => -lower_bounded_standard(rng, -b),
        (true, true) => {
            // Work on the side whose tail masses are not both ~1.
            let (lo, hi, flip) = if a > 0.0 { (a, b, false) } else if b < 0.0 { (-b, -a, true) } else { (a, b, false) };
            let p_lo = norm_cdf(-lo);
            let p_hi = norm_cdf(-hi);
            let z = if p_lo - p_hi > 1e-12 {
                loop {
                    let u: f64 = rng.random();
                    let z = -norm_quantile(p_hi + u * (p_lo - p_hi));
                    if z >= lo && z <= hi {
                        break z;
                    }
                }
            } else {
                loop {
                    let z = lower_bounded_standard(rng, lo);
                    if z <= hi {
                        break z;
                    }
                }
            };
            if flip {
                -z
            } else {
                z
            }
        }
    };
    mean + sd * z
}
