//! Ground-truth maps and the three synthetic complex-valued regimes:
//! constant-phase signal with iid noise, the same signal with complex AR(1)
//! noise, and a multi-slice dynamic-phase volume.
//!
//! Every voxel draws its noise from its own stream seeded by
//! `(seed, global voxel index)`, so output does not depend on how voxels are
//! scheduled and a slice can be generated without materializing the volume.

use num_complex::Complex64;
use rand::Rng;

use crate::dataset::{ComplexDataset, Dims, Field};
use crate::error::{Error, Result};
use crate::random::{standard_normal, stream_rng};
use crate::signal_model::{boxcar_stimulus, DesignVector, HrfParams, StimulusSpec};

/// Magnitude of the centre voxel of every region in the 50x50 studies.
pub const STUDY_MULTIPLIER: f64 = 0.04909;
/// Noise standard deviation of the 50x50 studies.
pub const STUDY_SIGMA: f64 = 0.04909;
/// Baseline magnitude giving SNR 10 in the 50x50 studies.
pub const STUDY_BETA0: f64 = 0.4909;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionShape {
    Sphere,
    Cube,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub center: Vec<usize>,
    pub radius: f64,
    pub shape: RegionShape,
    pub decay: f64,
}

impl RegionSpec {
    fn distance(&self, coords: &[usize]) -> f64 {
        let diffs = coords
            .iter()
            .zip(&self.center)
            .map(|(&c, &m)| (c as f64 - m as f64).abs());
        match self.shape {
            RegionShape::Sphere => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            RegionShape::Cube => diffs.fold(0.0, f64::max),
        }
    }

    /// Relative magnitude at `coords`, or `None` outside the active set.
    fn weight(&self, coords: &[usize]) -> Option<f64> {
        let d = self.distance(coords);
        if d > self.radius {
            return None;
        }
        let w = (1.0 - self.decay * d).max(0.0);
        (w > 0.0).then_some(w)
    }

    fn validate(&self, dims: &Dims) -> Result<()> {
        if self.center.len() != dims.ndim() {
            return Err(Error::InvalidSpec(format!(
                "region centre {:?} does not match a {}-D grid",
                self.center,
                dims.ndim()
            )));
        }
        if !(self.radius > 0.0) || !(0.0..=0.3).contains(&self.decay) {
            return Err(Error::InvalidSpec(format!(
                "region radius must be positive and decay in [0, 0.3]: {self:?}"
            )));
        }
        let reach = self.radius.floor() as isize;
        for (&c, &extent) in self.center.iter().zip(dims.extents()) {
            let c = c as isize;
            if c - reach < 0 || c + reach >= extent as isize {
                return Err(Error::InvalidSpec(format!(
                    "region {self:?} extends outside the {dims} grid"
                )));
            }
        }
        Ok(())
    }

    /// Voxels within the radius, regardless of decay.
    fn support(&self, dims: &Dims) -> Vec<usize> {
        (0..dims.voxel_count())
            .filter(|&v| self.distance(&dims.coords(v)) <= self.radius)
            .collect()
    }
}

/// Ground-truth activation and magnitude fields.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueMaps {
    pub active: Field<u8>,
    pub magnitude: Field<f64>,
}

impl TrueMaps {
    pub fn dims(&self) -> &Dims {
        self.active.dims()
    }

    pub fn active_count(&self) -> usize {
        self.active.values().iter().filter(|&&a| a == 1).count()
    }

    pub fn slice(&self, z: usize) -> Result<TrueMaps> {
        Ok(TrueMaps {
            active: self.active.slice(z)?,
            magnitude: self.magnitude.slice(z)?,
        })
    }
}

/// Builds truth maps from explicit regions. Each region's centre voxel gets
/// `multiplier`; the rest fades as `multiplier * max(0, 1 - decay * d)`.
pub fn generate_true_maps(dims: &Dims, regions: &[RegionSpec], multiplier: f64) -> Result<TrueMaps> {
    if !(multiplier > 0.0) {
        return Err(Error::InvalidSpec("magnitude multiplier must be positive".into()));
    }
    let mut owner: Vec<Option<usize>> = vec![None; dims.voxel_count()];
    for (r, region) in regions.iter().enumerate() {
        region.validate(dims)?;
        for v in region.support(dims) {
            if let Some(other) = owner[v] {
                return Err(Error::InvalidSpec(format!(
                    "regions {other} and {r} overlap at voxel {:?}",
                    dims.coords(v)
                )));
            }
            owner[v] = Some(r);
        }
    }
    let mut active = vec![0u8; dims.voxel_count()];
    let mut magnitude = vec![0.0; dims.voxel_count()];
    for (v, o) in owner.iter().enumerate() {
        if let Some(r) = *o {
            if let Some(w) = regions[r].weight(&dims.coords(v)) {
                active[v] = 1;
                magnitude[v] = multiplier * w;
            }
        }
    }
    Ok(TrueMaps {
        active: Field::new(dims.clone(), active)?,
        magnitude: Field::new(dims.clone(), magnitude)?,
    })
}

/// Draws `count` non-overlapping regions with integer radius in 2..=6,
/// random sphere/cube shape and decay uniform on [0, 0.3].
pub fn random_regions(dims: &Dims, count: usize, seed: u64) -> Result<Vec<RegionSpec>> {
    let mut rng = stream_rng(seed, u64::MAX);
    let mut regions: Vec<RegionSpec> = Vec::with_capacity(count);
    let mut taken = vec![false; dims.voxel_count()];
    let mut attempts = 0;
    while regions.len() < count {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::InvalidSpec(format!(
                "could not place {count} non-overlapping regions on {dims}"
            )));
        }
        let radius = rng.random_range(2..=6usize);
        let mut center = Vec::with_capacity(dims.ndim());
        let mut fits = true;
        for &extent in dims.extents() {
            if extent < 2 * radius + 1 {
                fits = false;
                break;
            }
            center.push(rng.random_range(radius..extent - radius));
        }
        let shape = if rng.random_bool(0.5) {
            RegionShape::Sphere
        } else {
            RegionShape::Cube
        };
        let decay = rng.random_range(0.0..=0.3);
        if !fits {
            continue;
        }
        let region = RegionSpec {
            center,
            radius: radius as f64,
            shape,
            decay,
        };
        let support = region.support(dims);
        if support.iter().any(|&v| taken[v]) {
            continue;
        }
        for v in support {
            taken[v] = true;
        }
        regions.push(region);
    }
    Ok(regions)
}

/// Truth maps for one replicate of the 50x50 studies.
pub fn study_true_maps(seed: u64) -> Result<TrueMaps> {
    let dims = Dims::grid2(50, 50)?;
    let regions = random_regions(&dims, 3, seed)?;
    generate_true_maps(&dims, &regions, STUDY_MULTIPLIER)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Iid,
    Ar1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub ar_coeff: Complex64,
}

impl NoiseSpec {
    pub fn iid(sigma: f64) -> Self {
        NoiseSpec {
            kind: NoiseKind::Iid,
            sigma,
            ar_coeff: Complex64::new(0.0, 0.0),
        }
    }

    pub fn ar1(sigma: f64, ar_coeff: Complex64) -> Self {
        NoiseSpec {
            kind: NoiseKind::Ar1,
            sigma,
            ar_coeff,
        }
    }

    /// AR(1) noise of the 50x50 study, coefficient 0.2 + 0.9i.
    pub fn study_ar1() -> Self {
        NoiseSpec::ar1(STUDY_SIGMA, Complex64::new(0.2, 0.9))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub beta0: f64,
    pub theta0: f64,
    pub theta1_max: f64,
}

impl SignalSpec {
    pub fn study() -> Self {
        SignalSpec {
            beta0: STUDY_BETA0,
            theta0: std::f64::consts::FRAC_PI_4,
            theta1_max: 0.0,
        }
    }

    pub fn snr(&self, sigma: f64) -> f64 {
        self.beta0 / sigma
    }
}

/// Fills the noise of one voxel. `epsilon_0 = xi_0`, then
/// `epsilon_t = rho * epsilon_{t-1} + xi_t` with `xi` components iid `N(0, sigma^2)`.
fn noise_path<R: Rng>(rng: &mut R, t_len: usize, noise: &NoiseSpec, out: &mut [Complex64]) {
    let mut prev = Complex64::new(0.0, 0.0);
    for (t, slot) in out.iter_mut().enumerate().take(t_len) {
        let re = noise.sigma * standard_normal(rng);
        let im = noise.sigma * standard_normal(rng);
        let xi = Complex64::new(re, im);
        let eps = match noise.kind {
            NoiseKind::Ar1 if t > 0 => noise.ar_coeff * prev + xi,
            _ => xi,
        };
        *slot = eps;
        prev = eps;
    }
}

fn check_noise(noise: &NoiseSpec) -> Result<()> {
    if !(noise.sigma >= 0.0 && noise.sigma.is_finite()) {
        return Err(Error::InvalidSpec(format!("noise sigma {} must be >= 0", noise.sigma)));
    }
    if noise.kind == NoiseKind::Ar1 && !(noise.ar_coeff.norm() < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "AR(1) coefficient {} is not stationary (|rho| >= 1)",
            noise.ar_coeff
        )));
    }
    Ok(())
}

/// Signal model shared by all regimes:
/// `y_t = (beta0 + beta1 x_t) exp(i (theta0 + theta1 x_t)) + epsilon_t`.
/// `voxel_offset` is the global index of the first voxel, used for seeding.
fn synthesize(
    magnitude: &Field<f64>,
    phase_slope: Option<&Field<f64>>,
    x: &DesignVector,
    sig: &SignalSpec,
    noise: &NoiseSpec,
    seed: u64,
    voxel_offset: usize,
) -> Result<ComplexDataset> {
    check_noise(noise)?;
    let t_len = x.len();
    if t_len == 0 {
        return Err(Error::DimensionMismatch("empty design vector".into()));
    }
    let n_vox = magnitude.len();
    let mut data = vec![Complex64::new(0.0, 0.0); n_vox * t_len];
    for (v, chunk) in data.chunks_mut(t_len).enumerate() {
        let mut rng = stream_rng(seed, (voxel_offset + v) as u64);
        noise_path(&mut rng, t_len, noise, chunk);
        let beta1 = magnitude.values()[v];
        let theta1 = phase_slope.map_or(0.0, |p| p.values()[v]);
        for (slot, &xt) in chunk.iter_mut().zip(&x.bold) {
            let modulus = sig.beta0 + beta1 * xt;
            let phase = sig.theta0 + theta1 * xt;
            *slot += Complex64::new(modulus * phase.cos(), modulus * phase.sin());
        }
    }
    ComplexDataset::new(magnitude.dims().clone(), t_len, data)
}

pub fn simulate_iid(
    maps: &TrueMaps,
    x: &DesignVector,
    sig: &SignalSpec,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<ComplexDataset> {
    if noise.kind != NoiseKind::Iid {
        return Err(Error::InvalidSpec("simulate_iid needs iid noise".into()));
    }
    if sig.theta1_max != 0.0 {
        return Err(Error::InvalidSpec("simulate_iid has constant phase; theta1_max must be 0".into()));
    }
    synthesize(&maps.magnitude, None, x, sig, noise, seed, 0)
}

pub fn simulate_ar1(
    maps: &TrueMaps,
    x: &DesignVector,
    sig: &SignalSpec,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<ComplexDataset> {
    if noise.kind != NoiseKind::Ar1 {
        return Err(Error::InvalidSpec("simulate_ar1 needs AR(1) noise".into()));
    }
    if sig.theta1_max != 0.0 {
        return Err(Error::InvalidSpec("simulate_ar1 has constant phase; theta1_max must be 0".into()));
    }
    synthesize(&maps.magnitude, None, x, sig, noise, seed, 0)
}

/// Multi-slice dynamic-phase volume with two cubes of activation.
#[derive(Debug, Clone, PartialEq)]
pub struct RealisticSpec {
    pub slices: usize,
    pub rows: usize,
    pub cols: usize,
    /// Top-left corners `(row, col)` of the active squares in every active slice.
    pub squares: Vec<(usize, usize)>,
    pub square_side: usize,
    /// Fraction of the maximum strength per slice; zero means inactive.
    pub taper: Vec<f64>,
    pub beta1_max: f64,
    pub theta1_max: f64,
    pub theta0: f64,
    pub beta0: f64,
    pub sigma: f64,
    pub warmup: usize,
    pub stimulus: StimulusSpec,
}

impl Default for RealisticSpec {
    fn default() -> Self {
        RealisticSpec {
            slices: 7,
            rows: 96,
            cols: 96,
            squares: vec![(30, 30), (58, 55)],
            square_side: 5,
            taper: vec![0.0, 0.5, 0.75, 1.0, 0.75, 0.5, 0.0],
            beta1_max: 0.5,
            theta1_max: std::f64::consts::PI / 120.0,
            theta0: std::f64::consts::FRAC_PI_4,
            beta0: 25.0,
            sigma: 1.0,
            warmup: 10,
            stimulus: StimulusSpec {
                n_epochs: 16,
                on_len: 15,
                off_len: 15,
                on_first: true,
            },
        }
    }
}

impl RealisticSpec {
    fn validate(&self) -> Result<()> {
        if self.taper.len() != self.slices {
            return Err(Error::InvalidSpec(format!(
                "taper has {} entries for {} slices",
                self.taper.len(),
                self.slices
            )));
        }
        for &(r, c) in &self.squares {
            if r + self.square_side > self.rows || c + self.square_side > self.cols {
                return Err(Error::InvalidSpec(format!("square at ({r}, {c}) leaves the slice")));
            }
        }
        Ok(())
    }

    /// Off-period warm-up followed by the block design.
    pub fn design(&self, hrf: &HrfParams) -> Result<DesignVector> {
        let mut stimulus = vec![0u8; self.warmup];
        stimulus.extend(boxcar_stimulus(&self.stimulus)?);
        DesignVector::new(stimulus, hrf)
    }

    pub fn dims(&self) -> Result<Dims> {
        Dims::new(vec![self.slices, self.rows, self.cols])
    }

    fn in_square(&self, row: usize, col: usize) -> bool {
        self.squares.iter().any(|&(r, c)| {
            (r..r + self.square_side).contains(&row) && (c..c + self.square_side).contains(&col)
        })
    }

    /// Truth maps of slice `z` (0-based): magnitude `beta1` and phase slope `theta1`.
    fn slice_fields(&self, z: usize) -> Result<(TrueMaps, Field<f64>)> {
        let dims = Dims::grid2(self.rows, self.cols)?;
        let n = dims.voxel_count();
        let (mut active, mut mag, mut phase) = (vec![0u8; n], vec![0.0; n], vec![0.0; n]);
        let strength = self.taper[z];
        if strength > 0.0 {
            for v in 0..n {
                let (row, col) = (v / self.cols, v % self.cols);
                if self.in_square(row, col) {
                    active[v] = 1;
                    mag[v] = strength * self.beta1_max;
                    phase[v] = strength * self.theta1_max;
                }
            }
        }
        Ok((
            TrueMaps {
                active: Field::new(dims.clone(), active)?,
                magnitude: Field::new(dims.clone(), mag)?,
            },
            Field::new(dims, phase)?,
        ))
    }

    /// One slice of the volume; identical to slicing [`simulate_realistic`].
    pub fn simulate_slice(&self, z: usize, hrf: &HrfParams, seed: u64) -> Result<(ComplexDataset, TrueMaps)> {
        self.validate()?;
        if z >= self.slices {
            return Err(Error::InvalidSpec(format!("slice {z} out of range")));
        }
        let x = self.design(hrf)?;
        let (maps, phase) = self.slice_fields(z)?;
        let sig = SignalSpec {
            beta0: self.beta0,
            theta0: self.theta0,
            theta1_max: self.theta1_max,
        };
        let offset = z * self.rows * self.cols;
        let data = synthesize(&maps.magnitude, Some(&phase), &x, &sig, &NoiseSpec::iid(self.sigma), seed, offset)?;
        Ok((data, maps))
    }

    /// Truth maps of the whole volume.
    pub fn true_maps(&self) -> Result<TrueMaps> {
        self.validate()?;
        let dims = self.dims()?;
        let mut active = Vec::with_capacity(dims.voxel_count());
        let mut magnitude = Vec::with_capacity(dims.voxel_count());
        for z in 0..self.slices {
            let (m, _) = self.slice_fields(z)?;
            active.extend_from_slice(m.active.values());
            magnitude.extend_from_slice(m.magnitude.values());
        }
        Ok(TrueMaps {
            active: Field::new(dims.clone(), active)?,
            magnitude: Field::new(dims, magnitude)?,
        })
    }
}

/// Full dynamic-phase volume. The default spec holds about 0.5 GB of samples;
/// prefer [`RealisticSpec::simulate_slice`] when slices are fitted separately.
pub fn simulate_realistic(spec: &RealisticSpec, hrf: &HrfParams, seed: u64) -> Result<(ComplexDataset, TrueMaps)> {
    let dims = spec.dims()?;
    let mut data = Vec::new();
    let mut t_len = 0;
    for z in 0..spec.slices {
        let (slice, _) = spec.simulate_slice(z, hrf, seed)?;
        t_len = slice.t_len();
        data.extend_from_slice(slice.data());
    }
    Ok((ComplexDataset::new(dims, t_len, data)?, spec.true_maps()?))
}
