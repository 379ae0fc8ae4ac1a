//! Genome representation, spectral-mask decoding, and the frequency/time field pair.
//!
//! Unit convention: time is carried in picoseconds and frequency in terahertz,
//! so conjugate grids satisfy `dt * dnu * len == 1` exactly. Fields hold the
//! complex envelope; the carrier frequency is bookkeeping on `SpectralField`.

use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One phase gene: a phase value pinned at a spectral component (anchor).
/// Phases between anchors are obtained by linear interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGene {
    pub anchor: usize,
    pub phase: f64,
}

/// One amplitude gene: a discrete transmission level for a block of components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmplitudeGene {
    pub block: usize,
    pub level: u32,
}

/// The evolvable genome: sparse phase anchors plus discrete amplitude levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneString {
    pub phase_genes: Vec<PhaseGene>,
    pub amplitude_genes: Vec<AmplitudeGene>,
    /// Number of spectral components the genome decodes onto (M).
    pub num_components: usize,
    /// Number of discrete amplitude levels (L); transmission = level / (L - 1).
    pub num_levels: u32,
}

impl GeneString {
    pub fn num_phase_genes(&self) -> usize {
        self.phase_genes.len()
    }

    pub fn num_amplitude_genes(&self) -> usize {
        self.amplitude_genes.len()
    }

    /// Total gene count; unified indexing places phase genes first.
    pub fn gene_count(&self) -> usize {
        self.phase_genes.len() + self.amplitude_genes.len()
    }

    /// Component range `[start, end)` covered by amplitude block `block`.
    pub fn block_bounds(&self, block: usize) -> (usize, usize) {
        let m = self.num_components;
        let a = self.amplitude_genes.len();
        (block * m / a, (block + 1) * m / a)
    }

    /// Check the structural invariants: anchors strictly increasing and spanning
    /// `[0, M-1]`, phases in `[0, 2pi)`, levels below `L`, blocks `0..A` in order.
    pub fn validate(&self) -> Result<()> {
        let m = self.num_components;
        if m < 2 {
            return Err(Error::InvalidGenome(format!("need at least 2 components, got {m}")));
        }
        if self.num_levels < 2 {
            return Err(Error::InvalidGenome(format!(
                "need at least 2 amplitude levels, got {}",
                self.num_levels
            )));
        }
        if self.phase_genes.is_empty() {
            return Err(Error::InvalidGenome("no phase genes".into()));
        }
        if self.phase_genes.len() > m {
            return Err(Error::InvalidGenome(format!(
                "{} phase genes exceed {m} components",
                self.phase_genes.len()
            )));
        }
        if self.phase_genes[0].anchor != 0 {
            return Err(Error::InvalidGenome("first anchor must be component 0".into()));
        }
        if self.phase_genes[self.phase_genes.len() - 1].anchor != m - 1 {
            return Err(Error::InvalidGenome(format!("last anchor must be component {}", m - 1)));
        }
        for pair in self.phase_genes.windows(2) {
            if pair[1].anchor <= pair[0].anchor {
                return Err(Error::InvalidGenome(format!(
                    "anchors not strictly increasing: {} then {}",
                    pair[0].anchor, pair[1].anchor
                )));
            }
        }
        for g in &self.phase_genes {
            if g.anchor >= m {
                return Err(Error::InvalidGenome(format!("anchor {} out of range", g.anchor)));
            }
            if !(0.0..TAU).contains(&g.phase) {
                return Err(Error::InvalidGenome(format!("phase {} outside [0, 2pi)", g.phase)));
            }
        }
        let a = self.amplitude_genes.len();
        if a == 0 || a > m {
            return Err(Error::InvalidGenome(format!("{a} amplitude blocks cannot partition {m} components")));
        }
        for (i, g) in self.amplitude_genes.iter().enumerate() {
            if g.block != i {
                return Err(Error::InvalidGenome(format!("amplitude block {} at position {i}", g.block)));
            }
            if g.level >= self.num_levels {
                return Err(Error::InvalidGenome(format!(
                    "level {} outside [0, {})",
                    g.level, self.num_levels
                )));
            }
        }
        Ok(())
    }

    /// True when `other` shares this genome's layout (component count, level
    /// count, anchor positions, block structure); gene values may differ.
    pub fn layout_matches(&self, other: &GeneString) -> bool {
        self.num_components == other.num_components
            && self.num_levels == other.num_levels
            && self.phase_genes.len() == other.phase_genes.len()
            && self.amplitude_genes.len() == other.amplitude_genes.len()
            && self
                .phase_genes
                .iter()
                .zip(&other.phase_genes)
                .all(|(a, b)| a.anchor == b.anchor)
    }
}

/// Shared genome layout: where the anchors sit and how blocks partition the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeLayout {
    pub num_components: usize,
    pub num_levels: u32,
    pub phase_anchors: Vec<usize>,
    pub num_amplitude_blocks: usize,
    /// Optional cap on the decoded phase change between adjacent components
    /// (hardware-style constraint). `None` disables the check.
    #[serde(default)]
    pub max_adjacent_phase_step: Option<f64>,
}

impl GenomeLayout {
    /// Layout with `n_phase` anchors spread evenly over `[0, m-1]`.
    pub fn evenly_spaced(m: usize, levels: u32, n_phase: usize, n_blocks: usize) -> Result<Self> {
        if n_phase < 2 || n_phase > m {
            return Err(Error::InvalidConfig(format!(
                "phase gene count {n_phase} must lie in [2, {m}]"
            )));
        }
        let span = (m - 1) as f64;
        let anchors = (0..n_phase)
            .map(|i| (i as f64 * span / (n_phase - 1) as f64).round() as usize)
            .collect();
        let layout = Self {
            num_components: m,
            num_levels: levels,
            phase_anchors: anchors,
            num_amplitude_blocks: n_blocks,
            max_adjacent_phase_step: None,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        self.flat_genome().validate().map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// The identity genome: zero phase everywhere, full transmission.
    pub fn flat_genome(&self) -> GeneString {
        GeneString {
            phase_genes: self.phase_anchors.iter().map(|&a| PhaseGene { anchor: a, phase: 0.0 }).collect(),
            amplitude_genes: (0..self.num_amplitude_blocks)
                .map(|b| AmplitudeGene { block: b, level: self.num_levels - 1 })
                .collect(),
            num_components: self.num_components,
            num_levels: self.num_levels,
        }
    }

    /// A genome with uniformly random phases and levels.
    pub fn random_genome<R: Rng>(&self, rng: &mut R) -> GeneString {
        GeneString {
            phase_genes: self
                .phase_anchors
                .iter()
                .map(|&a| PhaseGene { anchor: a, phase: rng.gen_range(0.0..TAU) })
                .collect(),
            amplitude_genes: (0..self.num_amplitude_blocks)
                .map(|b| AmplitudeGene { block: b, level: rng.gen_range(0..self.num_levels) })
                .collect(),
            num_components: self.num_components,
            num_levels: self.num_levels,
        }
    }
}

/// Decoded shaper programming: per-component phase and transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct ShaperMask {
    pub phase: Vec<f64>,
    pub transmission: Vec<f64>,
}

impl ShaperMask {
    pub fn len(&self) -> usize {
        self.phase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase.is_empty()
    }

    /// Same phases with unit transmission (phase-only shaping).
    pub fn phase_only(&self) -> ShaperMask {
        ShaperMask { phase: self.phase.clone(), transmission: vec![1.0; self.transmission.len()] }
    }
}

/// Decode a genome into a shaper mask: phases linearly interpolated between
/// anchors, transmission piecewise constant per amplitude block.
pub fn decode(genes: &GeneString) -> Result<ShaperMask> {
    genes.validate()?;
    let m = genes.num_components;
    let mut phase = vec![0.0; m];
    for pair in genes.phase_genes.windows(2) {
        let (a0, p0) = (pair[0].anchor, pair[0].phase);
        let (a1, p1) = (pair[1].anchor, pair[1].phase);
        let span = (a1 - a0) as f64;
        for i in a0..=a1 {
            let t = (i - a0) as f64 / span;
            phase[i] = p0 + (p1 - p0) * t;
        }
    }
    let denom = (genes.num_levels - 1) as f64;
    let mut transmission = vec![0.0; m];
    for g in &genes.amplitude_genes {
        let (start, end) = genes.block_bounds(g.block);
        let t = g.level as f64 / denom;
        for slot in transmission.iter_mut().take(end).skip(start) {
            *slot = t;
        }
    }
    Ok(ShaperMask { phase, transmission })
}

/// Decode, then reject masks whose adjacent-component phase step exceeds `max_step`.
pub fn decode_limited(genes: &GeneString, max_step: f64) -> Result<ShaperMask> {
    let mask = decode(genes)?;
    for (i, pair) in mask.phase.windows(2).enumerate() {
        let step = (pair[1] - pair[0]).abs();
        if step > max_step {
            return Err(Error::InvalidGenome(format!(
                "phase step {step:.4} between components {i} and {} exceeds limit {max_step:.4}",
                i + 1
            )));
        }
    }
    Ok(mask)
}

/// Complex spectral envelope on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    /// Carrier frequency in THz; bin k sits at `center + (k - len/2) * grid_spacing`.
    pub center_frequency: f64,
    /// Frequency step in THz.
    pub grid_spacing: f64,
    pub amplitudes: Vec<Complex64>,
}

/// Complex temporal envelope on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalField {
    /// Time step in ps; sample n sits at `(n - len/2) * grid_spacing`.
    pub grid_spacing: f64,
    pub amplitudes: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(center_frequency: f64, grid_spacing: f64, amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() || amplitudes.len() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "spectral grid length {} is not a power of two",
                amplitudes.len()
            )));
        }
        if grid_spacing <= 0.0 {
            return Err(Error::DimensionMismatch("grid spacing must be positive".into()));
        }
        Ok(Self { center_frequency, grid_spacing, amplitudes })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Frequency of bin `k` in THz.
    pub fn frequency_at(&self, k: usize) -> f64 {
        self.center_frequency + (k as f64 - self.len() as f64 / 2.0) * self.grid_spacing
    }

    /// Total energy `sum |E|^2 dnu`.
    pub fn energy(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid_spacing
    }
}

impl TemporalField {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Time of sample `n` in ps.
    pub fn time_at(&self, n: usize) -> f64 {
        (n as f64 - self.len() as f64 / 2.0) * self.grid_spacing
    }

    /// Total energy `sum |E|^2 dt`.
    pub fn energy(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid_spacing
    }

    /// Instantaneous intensity `|E(t_n)|^2`.
    pub fn intensity(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Apply a shaper mask: `E_out = E_in * transmission * exp(i * phase)`.
pub fn apply_mask(input: &SpectralField, mask: &ShaperMask) -> Result<SpectralField> {
    if input.len() != mask.len() {
        return Err(Error::DimensionMismatch(format!(
            "field has {} components, mask has {}",
            input.len(),
            mask.len()
        )));
    }
    let amplitudes = input
        .amplitudes
        .iter()
        .zip(mask.phase.iter().zip(&mask.transmission))
        .map(|(e, (&phi, &t))| e * t * Complex64::from_polar(1.0, phi))
        .collect();
    Ok(SpectralField { center_frequency: input.center_frequency, grid_spacing: input.grid_spacing, amplitudes })
}

static FFT_CACHE: Lazy<Mutex<std::collections::HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(std::collections::HashMap::new()));

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = FFT_CACHE.lock().unwrap();
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

// Both grids are centered; the transform kernel is
//   e(t_n) = dnu * sum_k E_k exp(-2*pi*i (k - M/2)(n - M/2) / M),
// realized as a plain FFT with (-1)^k / (-1)^n twiddles and the constant
// phase c = exp(-i*pi*M/2) (+1 for M = 0 mod 4, -1 for M = 2 mod 4).
fn centered_transform(input: &[Complex64], forward: bool, scale: f64) -> Vec<Complex64> {
    let m = input.len();
    let mut buf: Vec<Complex64> = input
        .iter()
        .enumerate()
        .map(|(k, &v)| if k % 2 == 0 { v } else { -v })
        .collect();
    plan(m, forward).process(&mut buf);
    let c = if m % 4 == 0 { 1.0 } else { -1.0 };
    for (n, v) in buf.iter_mut().enumerate() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        *v *= c * sign * scale;
    }
    buf
}

/// Transform a spectral envelope to the time domain.
///
/// Mutually inverse with [`to_frequency`]; energy is conserved (Parseval).
pub fn to_time(f: &SpectralField) -> Result<TemporalField> {
    let m = f.len();
    if !m.is_power_of_two() || m < 2 {
        return Err(Error::DimensionMismatch(format!("length {m} is not a power of two")));
    }
    let dt = 1.0 / (m as f64 * f.grid_spacing);
    Ok(TemporalField { grid_spacing: dt, amplitudes: centered_transform(&f.amplitudes, true, f.grid_spacing) })
}

/// Transform a temporal envelope back to the frequency domain.
///
/// The caller supplies the carrier frequency to restore on the result.
pub fn to_frequency(t: &TemporalField, center_frequency: f64) -> Result<SpectralField> {
    let m = t.len();
    if !m.is_power_of_two() || m < 2 {
        return Err(Error::DimensionMismatch(format!("length {m} is not a power of two")));
    }
    let dnu = 1.0 / (m as f64 * t.grid_spacing);
    Ok(SpectralField {
        center_frequency,
        grid_spacing: dnu,
        amplitudes: centered_transform(&t.amplitudes, false, t.grid_spacing),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_layout() -> GenomeLayout {
        GenomeLayout::evenly_spaced(128, 8, 40, 12).unwrap()
    }

    fn gaussian_spectrum(m: usize, dnu: f64, sigma_nu: f64) -> SpectralField {
        let amps = (0..m)
            .map(|k| {
                let nu = (k as f64 - m as f64 / 2.0) * dnu;
                Complex64::new((-nu * nu / (4.0 * sigma_nu * sigma_nu)).exp(), 0.0)
            })
            .collect();
        SpectralField::new(375.0, dnu, amps).unwrap()
    }

    #[test]
    fn decode_flat_genome_is_identity_mask() {
        let mask = decode(&test_layout().flat_genome()).unwrap();
        assert!(mask.phase.iter().all(|&p| p == 0.0));
        assert!(mask.transmission.iter().all(|&t| t == 1.0));
    }

    #[test]
    fn decode_interpolates_linearly_between_two_anchors() {
        let m = 128;
        let genes = GeneString {
            phase_genes: vec![
                PhaseGene { anchor: 0, phase: 0.0 },
                PhaseGene { anchor: m - 1, phase: std::f64::consts::PI },
            ],
            amplitude_genes: vec![AmplitudeGene { block: 0, level: 3 }],
            num_components: m,
            num_levels: 4,
        };
        let mask = decode(&genes).unwrap();
        let expected_mid = std::f64::consts::PI * (m / 2) as f64 / (m - 1) as f64;
        assert_relative_eq!(mask.phase[m / 2], expected_mid, max_relative = 1e-12);
        assert_eq!(mask.phase[0], 0.0);
        assert_relative_eq!(mask.phase[m - 1], std::f64::consts::PI);
    }

    #[test]
    fn decode_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let genes = test_layout().random_genome(&mut rng);
        assert_eq!(decode(&genes).unwrap(), decode(&genes).unwrap());
    }

    #[test]
    fn decode_rejects_out_of_range_anchor() {
        let mut genes = test_layout().flat_genome();
        genes.phase_genes.last_mut().unwrap().anchor = 500;
        assert!(matches!(decode(&genes), Err(Error::InvalidGenome(_))));
    }

    #[test]
    fn decode_limited_respects_phase_step_cap() {
        let m = 16;
        let genes = GeneString {
            phase_genes: vec![
                PhaseGene { anchor: 0, phase: 0.0 },
                PhaseGene { anchor: 1, phase: 3.0 },
                PhaseGene { anchor: m - 1, phase: 3.0 },
            ],
            amplitude_genes: vec![AmplitudeGene { block: 0, level: 2 }],
            num_components: m,
            num_levels: 3,
        };
        assert!(decode_limited(&genes, 4.0).is_ok());
        assert!(matches!(decode_limited(&genes, 1.0), Err(Error::InvalidGenome(_))));
    }

    #[test]
    fn amplitude_blocks_partition_grid() {
        let genes = test_layout().flat_genome();
        let mut covered = vec![0usize; genes.num_components];
        for g in &genes.amplitude_genes {
            let (s, e) = genes.block_bounds(g.block);
            for c in covered.iter_mut().take(e).skip(s) {
                *c += 1;
            }
        }
        assert!(covered.iter().all(|&c| c == 1));
    }

    #[test]
    fn apply_mask_identity_and_sign_flip() {
        let f = gaussian_spectrum(64, 0.25, 1.0);
        let ident = ShaperMask { phase: vec![0.0; 64], transmission: vec![1.0; 64] };
        assert_eq!(apply_mask(&f, &ident).unwrap().amplitudes, f.amplitudes);

        let pi_mask = ShaperMask { phase: vec![std::f64::consts::PI; 64], transmission: vec![1.0; 64] };
        let flipped = apply_mask(&f, &pi_mask).unwrap();
        for (a, b) in flipped.amplitudes.iter().zip(&f.amplitudes) {
            assert_relative_eq!(a.re, -b.re, epsilon = 1e-12);
            assert_relative_eq!(a.norm(), b.norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn apply_mask_zero_transmission_kills_energy() {
        let f = gaussian_spectrum(64, 0.25, 1.0);
        let dark = ShaperMask { phase: vec![0.0; 64], transmission: vec![0.0; 64] };
        assert_eq!(apply_mask(&f, &dark).unwrap().energy(), 0.0);
    }

    #[test]
    fn apply_mask_rejects_length_mismatch() {
        let f = gaussian_spectrum(64, 0.25, 1.0);
        let short = ShaperMask { phase: vec![0.0; 32], transmission: vec![1.0; 32] };
        assert!(matches!(apply_mask(&f, &short), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn round_trip_recovers_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let amps: Vec<Complex64> = (0..128).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let f = SpectralField::new(375.0, 0.2, amps).unwrap();
        let back = to_frequency(&to_time(&f).unwrap(), f.center_frequency).unwrap();
        let max_err = f
            .amplitudes
            .iter()
            .zip(&back.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-10, "round trip error {max_err}");
        assert_relative_eq!(back.grid_spacing, f.grid_spacing, max_relative = 1e-14);
    }

    // Oracle: for a Gaussian spectral envelope with intensity rms width
    // sigma_nu, the flat-phase temporal intensity is Gaussian with rms width
    // 1 / (4 pi sigma_nu) (minimum time-bandwidth product).
    #[test]
    fn gaussian_flat_phase_meets_time_bandwidth_relation() {
        let m = 128;
        let dnu = 0.25;
        let sigma_nu = m as f64 * dnu / 20.0;
        let f = gaussian_spectrum(m, dnu, sigma_nu);
        let t = to_time(&f).unwrap();
        let intensity = t.intensity();
        let total: f64 = intensity.iter().sum();
        let mean: f64 = intensity.iter().enumerate().map(|(n, i)| t.time_at(n) * i).sum::<f64>() / total;
        let var: f64 = intensity
            .iter()
            .enumerate()
            .map(|(n, i)| (t.time_at(n) - mean).powi(2) * i)
            .sum::<f64>()
            / total;
        let expected_sigma_t = 1.0 / (4.0 * std::f64::consts::PI * sigma_nu);
        assert_relative_eq!(var.sqrt(), expected_sigma_t, max_relative = 1e-6);
        assert!(mean.abs() < 1e-9);
    }

    #[test]
    fn linear_spectral_phase_shifts_envelope() {
        let m = 128;
        let f = gaussian_spectrum(m, 0.25, 1.2);
        let base = to_time(&f).unwrap();
        let shift_samples = 9usize;
        let tau = shift_samples as f64 * base.grid_spacing;
        let shifted_spec = SpectralField {
            center_frequency: f.center_frequency,
            grid_spacing: f.grid_spacing,
            amplitudes: f
                .amplitudes
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let nu = (k as f64 - m as f64 / 2.0) * f.grid_spacing;
                    a * Complex64::from_polar(1.0, TAU * nu * tau)
                })
                .collect(),
        };
        let shifted = to_time(&shifted_spec).unwrap();
        for n in 0..m {
            let src = (n + m - shift_samples) % m;
            assert!((shifted.amplitudes[n] - base.amplitudes[src]).norm() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn energy_is_conserved_and_masks_never_gain(seed in 0u64..512) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let layout = GenomeLayout::evenly_spaced(64, 6, 12, 4).unwrap();
            let genes = layout.random_genome(&mut rng);
            let carrier = gaussian_spectrum(64, 0.25, 64.0 * 0.25 / 16.0);
            let masked = apply_mask(&carrier, &decode(&genes).unwrap()).unwrap();
            prop_assert!(masked.energy() <= carrier.energy() + 1e-12);
            let t = to_time(&masked).unwrap();
            if masked.energy() > 0.0 {
                let rel = (t.energy() - masked.energy()).abs() / masked.energy();
                prop_assert!(rel < 1e-9, "Parseval violated: {rel}");
            }
            prop_assert!((t.grid_spacing * masked.grid_spacing * 64.0 - 1.0).abs() < 1e-12);
        }
    }
}
