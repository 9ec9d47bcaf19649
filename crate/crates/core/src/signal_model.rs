//! Experimental design: block stimulus, double-gamma HRF and the expected
//! BOLD response that enters the regression as `x`.

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Block design made of repeated on/off epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StimulusSpec {
    pub n_epochs: usize,
    pub on_len: usize,
    pub off_len: usize,
    pub on_first: bool,
}

impl StimulusSpec {
    /// Five 40-point epochs, 20 on then 20 off (T = 200).
    pub fn standard() -> Self {
        StimulusSpec {
            n_epochs: 5,
            on_len: 20,
            off_len: 20,
            on_first: true,
        }
    }

    pub fn total_len(&self) -> usize {
        self.n_epochs * (self.on_len + self.off_len)
    }
}

/// Double-gamma HRF: a peak gamma kernel minus a scaled undershoot kernel.
/// Rates are per time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrfParams {
    pub peak_shape: f64,
    pub undershoot_shape: f64,
    pub peak_rate: f64,
    pub undershoot_rate: f64,
    pub undershoot_ratio: f64,
}

impl Default for HrfParams {
    fn default() -> Self {
        HrfParams {
            peak_shape: 6.0,
            undershoot_shape: 16.0,
            peak_rate: 1.0,
            undershoot_rate: 1.0,
            undershoot_ratio: 1.0 / 6.0,
        }
    }
}

impl HrfParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.peak_shape,
            self.undershoot_shape,
            self.peak_rate,
            self.undershoot_rate,
        ];
        if positive.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidSpec(format!(
                "HRF shapes and rates must be positive: {self:?}"
            )));
        }
        if !(self.undershoot_ratio >= 0.0) {
            return Err(Error::InvalidSpec("HRF undershoot ratio must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Regressor shared by every voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignVector {
    pub stimulus: Vec<u8>,
    pub bold: Vec<f64>,
    pub centered: bool,
}

impl DesignVector {
    /// Stimulus convolved with the HRF, rescaled to unit maximum, not centered.
    pub fn new(stimulus: Vec<u8>, hrf: &HrfParams) -> Result<Self> {
        let bold = expected_bold(&stimulus, hrf)?;
        Ok(DesignVector {
            stimulus,
            bold,
            centered: false,
        })
    }

    pub fn from_spec(spec: &StimulusSpec, hrf: &HrfParams) -> Result<Self> {
        DesignVector::new(boxcar_stimulus(spec)?, hrf)
    }

    pub fn len(&self) -> usize {
        self.bold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bold.is_empty()
    }

    pub fn centered(&self) -> DesignVector {
        DesignVector {
            stimulus: self.stimulus.clone(),
            bold: center_series(&self.bold),
            centered: true,
        }
    }
}

pub fn boxcar_stimulus(spec: &StimulusSpec) -> Result<Vec<u8>> {
    if spec.n_epochs == 0 || spec.on_len + spec.off_len == 0 || spec.on_len == 0 {
        return Err(Error::InvalidSpec(format!("empty stimulus epochs: {spec:?}")));
    }
    let on = std::iter::repeat(1u8).take(spec.on_len);
    let off = std::iter::repeat(0u8).take(spec.off_len);
    let epoch: Vec<u8> = if spec.on_first {
        on.chain(off).collect()
    } else {
        off.chain(on).collect()
    };
    Ok(epoch.repeat(spec.n_epochs))
}

/// The standard 20/20 epochs repeated over `t_len` points. A length that is
/// not a multiple of 40 cuts the last epoch short (T = 500 is 12.5 epochs).
pub fn standard_stimulus(t_len: usize) -> Result<Vec<u8>> {
    if t_len == 0 {
        return Err(Error::InvalidSpec("series length must be positive".into()));
    }
    let spec = StimulusSpec::standard();
    let period = spec.on_len + spec.off_len;
    let mut s = boxcar_stimulus(&StimulusSpec {
        n_epochs: t_len.div_ceil(period),
        ..spec
    })?;
    s.truncate(t_len);
    Ok(s)
}

fn gamma_kernel(t: f64, shape: f64, rate: f64) -> f64 {
    if t <= 0.0 {
        return if shape == 1.0 {
            rate
        } else if shape > 1.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    ((shape - 1.0) * t.ln() + shape * rate.ln() - rate * t - ln_gamma(shape)).exp()
}

pub fn double_gamma_hrf(t: f64, p: &HrfParams) -> f64 {
    gamma_kernel(t, p.peak_shape, p.peak_rate)
        - p.undershoot_ratio * gamma_kernel(t, p.undershoot_shape, p.undershoot_rate)
}

/// Causal discrete convolution of the stimulus with the sampled HRF,
/// truncated to the stimulus length and rescaled so the maximum is 1.
pub fn expected_bold(stimulus: &[u8], hrf: &HrfParams) -> Result<Vec<f64>> {
    hrf.validate()?;
    if stimulus.is_empty() {
        return Err(Error::DegenerateDesign("empty stimulus".into()));
    }
    if stimulus.iter().all(|&s| s == 0) {
        return Err(Error::DegenerateDesign("stimulus is never on".into()));
    }
    let t_len = stimulus.len();
    let kernel: Vec<f64> = (0..t_len).map(|k| double_gamma_hrf(k as f64, hrf)).collect();
    let raw: Vec<f64> = (0..t_len)
        .map(|t| {
            (0..=t)
                .filter(|&k| stimulus[t - k] != 0)
                .map(|k| f64::from(stimulus[t - k]) * kernel[k])
                .sum()
        })
        .collect();
    let peak = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::DegenerateDesign(format!(
            "response maximum {peak} cannot be rescaled to 1"
        )));
    }
    Ok(raw.into_iter().map(|v| v / peak).collect())
}

/// Values that can be mean-centered.
pub trait Centerable: Copy {
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, factor: f64) -> Self;
    fn zero() -> Self;
}

impl Centerable for f64 {
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
    fn zero() -> Self {
        0.0
    }
}

impl Centerable for Complex64 {
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

pub fn center_series<T: Centerable>(values: &[T]) -> Vec<T> {
    if values.is_empty() {
        return Vec::new();
    }
    let mean = values
        .iter()
        .fold(T::zero(), |acc, &v| acc.add(v))
        .scale(1.0 / values.len() as f64);
    values.iter().map(|&v| v.sub(mean)).collect()
}
