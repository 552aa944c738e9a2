//! Pump envelopes, Schmidt decomposition, eigenmode filtering and the
//! dispersive multi-band comb.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cmt::{
    jsa_grid, nonlinear_rate, pump_steady_state, uniform_axis, CmtSystem, GridSpec, JsaMatrix, ModeChain, SolverMode,
};
use crate::error::{Error, Result};
use crate::linalg::hopping_spectrum_width;
use crate::model::{derive_rates, DeviceSpec};

/// Intensity time-bandwidth product of a transform-limited Gaussian.
pub const GAUSSIAN_TBP: f64 = 0.441;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PumpMode {
    Cw,
    Gaussian {
        /// Intensity FWHM of the pulse, s.
        fwhm_duration: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub mode: PumpMode,
    /// Continuous-wave or peak power, W.
    pub power: f64,
    /// Pump offset from the pump carrier, rad/s.
    pub detuning: f64,
}

impl PumpSpec {
    pub fn cw(power: f64) -> Self {
        Self { mode: PumpMode::Cw, power, detuning: 0.0 }
    }

    pub fn gaussian(power: f64, fwhm_duration: f64) -> Result<Self> {
        if !(fwhm_duration > 0.0 && fwhm_duration.is_finite()) {
            return Err(Error::invalid("fwhm_ps", format!("pulse duration must be > 0, got {fwhm_duration}")));
        }
        Ok(Self { mode: PumpMode::Gaussian { fwhm_duration }, power, detuning: 0.0 })
    }

    /// Intensity FWHM of the pump spectrum, Hz (0 for cw).
    pub fn spectral_fwhm(&self) -> f64 {
        match self.mode {
            PumpMode::Cw => 0.0,
            PumpMode::Gaussian { fwhm_duration } => GAUSSIAN_TBP / fwhm_duration,
        }
    }

    pub fn describe(&self) -> String {
        match self.mode {
            PumpMode::Cw => format!("cw {:e} W", self.power),
            PumpMode::Gaussian { fwhm_duration } => {
                format!("gaussian {:e} W peak, {:e} s FWHM", self.power, fwhm_duration)
            }
        }
    }

    /// Envelope applied on a JSA grid. A cw pump weights every grid point by
    /// one: its delta function is applied when the JSI is integrated along
    /// the energy-conservation line.
    pub fn grid_envelope(&self) -> impl Fn(f64) -> f64 + Sync + '_ {
        move |nu| match self.mode {
            PumpMode::Cw => 1.0,
            PumpMode::Gaussian { .. } => pump_envelope(self, nu, 0.0),
        }
    }
}

/// Peak-normalized amplitude weight of the pump at sum-frequency offset
/// `nu` (Hz). A Gaussian pulse gives exp(-nu^2 / (2 sigma^2)) with the
/// intensity FWHM 0.441/duration. A cw pump is a grid-resolved delta: weight
/// one inside the bin |nu| <= resolution/2, zero outside.
pub fn pump_envelope(pump: &PumpSpec, nu: f64, resolution: f64) -> f64 {
    match pump.mode {
        PumpMode::Cw => {
            if nu.abs() <= 0.5 * resolution {
                1.0
            } else {
                0.0
            }
        }
        PumpMode::Gaussian { .. } => {
            let sigma = pump.spectral_fwhm() / (2.0 * 2f64.ln().sqrt());
            (-nu * nu / (2.0 * sigma * sigma)).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtResult {
    /// Descending, summing to one.
    pub eigenvalues: Vec<f64>,
    pub k: f64,
    /// Eigenvalues above 1e-12.
    pub n_modes: usize,
}

pub fn schmidt_matrix(m: DMatrix<C64>) -> Result<SchmidtResult> {
    if m.iter().all(|v| *v == C64::new(0.0, 0.0)) {
        return Err(Error::NoAmplitude);
    }
    // scale first so tiny amplitudes do not underflow in the SVD
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let sv = (m / C64::new(scale, 0.0)).singular_values();
    let mut lambda: Vec<f64> = sv.iter().map(|s| s * s).collect();
    let total: f64 = lambda.iter().sum();
    lambda.iter_mut().for_each(|l| *l /= total);
    lambda.sort_by(|a, b| b.total_cmp(a));
    let purity: f64 = lambda.iter().map(|l| l * l).sum();
    let n_modes = lambda.iter().filter(|&&l| l > 1e-12).count();
    Ok(SchmidtResult { eigenvalues: lambda, k: 1.0 / purity, n_modes })
}

/// Schmidt decomposition of the complex amplitude.
pub fn schmidt(jsa: &JsaMatrix) -> Result<SchmidtResult> {
    schmidt_matrix(jsa.to_dmatrix())
}

/// Schmidt number of sqrt(JSI), i.e. the amplitude with its phase dropped.
pub fn schmidt_flat_phase(jsa: &JsaMatrix) -> Result<SchmidtResult> {
    let m = jsa.to_dmatrix().map(|v| C64::new(v.norm(), 0.0));
    schmidt_matrix(m)
}

/// Rectangular pass bands on the signal and idler axes (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectFilter {
    pub center_s: f64,
    pub center_i: f64,
    pub width: f64,
}

/// Zero the amplitude outside the pass bands and decompose what is left.
pub fn filtered_schmidt(jsa: &JsaMatrix, filter: RectFilter) -> Result<SchmidtResult> {
    let inside = |axis: &[f64], c: f64| -> Result<Vec<bool>> {
        if c < axis[0] || c > axis[axis.len() - 1] {
            return Err(Error::invalid("filter", format!("center {c:e} rad/s outside the grid")));
        }
        Ok(axis.iter().map(|&w| (w - c).abs() <= 0.5 * filter.width).collect())
    };
    let ks = inside(&jsa.signal_axis, filter.center_s)?;
    let ki = inside(&jsa.idler_axis, filter.center_i)?;
    let rows: Vec<usize> = (0..ks.len()).filter(|&j| ks[j]).collect();
    let cols: Vec<usize> = (0..ki.len()).filter(|&k| ki[k]).collect();
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::EmptyPassband);
    }
    let m = DMatrix::from_fn(rows.len(), cols.len(), |r, c| jsa.at(rows[r], cols[c]));
    schmidt_matrix(m).map_err(|e| match e {
        Error::NoAmplitude => Error::EmptyPassband,
        other => other,
    })
}

/// FNV-1a over the bit patterns of every device parameter.
pub fn device_hash(device: &DeviceSpec) -> String {
    let wg = &device.waveguide;
    let p = &device.profile;
    let off = p.offsets();
    let mut values = vec![
        wg.group_index,
        wg.linear_loss,
        wg.gamma0,
        wg.tpa_beta0,
        wg.effective_area,
        wg.wavelength,
        device.geometry.radius,
    ];
    values.extend(p.all_couplings());
    values.extend(off.signal.iter().chain(&off.idler).chain(&off.pump));
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub points: usize,
    pub span_factor: f64,
    pub solver: SolverMode,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { points: 256, span_factor: 1.5, solver: SolverMode::Full }
    }
}

/// JSA of a pumped device on the default band-spanning grid.
pub fn device_jsa(device: &DeviceSpec, pump: &PumpSpec, opts: GridOptions) -> Result<JsaMatrix> {
    let (sys, _) = CmtSystem::pumped(device, pump.detuning, pump.power)?;
    let grid = GridSpec::around_band(&sys, opts.points, opts.span_factor);
    let env = pump.grid_envelope();
    let mut jsa = jsa_grid(&sys, &grid, pump.detuning, &env, opts.solver)?;
    jsa.metadata.device_hash = device_hash(device);
    jsa.metadata.pump = pump.describe();
    Ok(jsa)
}

/// Band-dependent resonance shift and coupler dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionModel {
    /// Resonance shift of band b is this times b^2, Hz.
    pub shift_hz_per_band_sq: f64,
    /// Relative growth of every |kappa| per band. Equivalent to a coupler
    /// slope d|kappa|/dw = this x |kappa| / (2 pi FSR).
    pub kappa_growth_per_band: f64,
}

impl Default for DispersionModel {
    fn default() -> Self {
        Self { shift_hz_per_band_sq: -2e9, kappa_growth_per_band: 0.1 }
    }
}

impl DispersionModel {
    pub fn none() -> Self {
        Self { shift_hz_per_band_sq: 0.0, kappa_growth_per_band: 0.0 }
    }

    /// Mode chain of band `b` for `device`, and whether couplings were clamped.
    pub fn band_chain(&self, device: &DeviceSpec, b: i32, resonances: &[f64]) -> (ModeChain, bool) {
        let (profile, clamped) = device.profile.scaled(1.0 + self.kappa_growth_per_band * b as f64);
        let rates = derive_rates(&device.waveguide, &device.geometry, &profile);
        let shift = 2.0 * PI * self.shift_hz_per_band_sq * (b * b) as f64;
        (ModeChain::new(rates, resonances.iter().map(|r| r + shift).collect()), clamped)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandSpectrum {
    pub band: i32,
    /// rad/s offsets from the band's nominal carrier.
    pub axis: Vec<f64>,
    pub power: Vec<f64>,
    /// Distance between the outermost half-maximum points, Hz.
    pub width_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonSpectrum {
    /// Signal band +b, idler band -b.
    pub band: i32,
    /// Signal offsets, rad/s.
    pub axis: Vec<f64>,
    /// cw JSI along w_s + w_i = 2 w_p.
    pub intensity: Vec<f64>,
    /// Highest edge-mode peak over the center-mode peak.
    pub edge_to_center: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombResult {
    pub bands: Vec<BandSpectrum>,
    pub two_photon: Vec<TwoPhotonSpectrum>,
    /// (b, JSA) for the +-b band pairs with b >= 1.
    pub jsa: Vec<(i32, JsaMatrix)>,
    pub warnings: Vec<String>,
}

fn outer_half_width(axis: &[f64], power: &[f64]) -> f64 {
    let max = power.iter().cloned().fold(0.0, f64::max);
    let half = 0.5 * max;
    let first = power.iter().position(|&p| p >= half);
    let last = power.iter().rposition(|&p| p >= half);
    match (first, last) {
        (Some(a), Some(b)) => {
            // linear interpolation of the crossings
            let cross = |i: usize, j: usize| {
                let t = (half - power[i]) / (power[j] - power[i]);
                axis[i] + t * (axis[j] - axis[i])
            };
            let lo = if a > 0 { cross(a - 1, a) } else { axis[0] };
            let hi = if b + 1 < axis.len() { cross(b + 1, b) } else { axis[axis.len() - 1] };
            hi - lo
        }
        _ => 0.0,
    }
}

/// Split the band of `chain` into N equal cells centred on its Bloch modes
/// and compare the strongest end cell with the center cell.
fn edge_to_center(chain: &ModeChain, axis: &[f64], values: &[f64]) -> f64 {
    let n = chain.n_rings();
    if n < 3 {
        return f64::NAN;
    }
    let spread = hopping_spectrum_width(&chain.rates.inter_ring);
    let width = spread * n as f64 / (n - 1) as f64;
    let lo = chain.center() - 0.5 * width;
    let mut cells = vec![0.0f64; n];
    for (&w, &v) in axis.iter().zip(values) {
        let c = ((w - lo) / width * n as f64).floor();
        if c >= 0.0 && (c as usize) < n {
            let c = c as usize;
            cells[c] = cells[c].max(v);
        }
    }
    cells[0].max(cells[n - 1]) / cells[n / 2]
}

pub struct CombRequest<'a> {
    pub device: &'a DeviceSpec,
    pub dispersion: DispersionModel,
    pub pump: PumpSpec,
    /// Must contain -b for every b.
    pub bands: Vec<i32>,
    pub grid: GridOptions,
    /// Samples per transmission / two-photon spectrum.
    pub samples: usize,
}

/// Per-band transmission, two-photon spectra of the +-b pairs, and JSAs of
/// the +-1 and +-2 pairs. The pump sits in band 0.
pub fn comb(req: &CombRequest) -> Result<CombResult> {
    let mut bands = req.bands.clone();
    bands.sort_unstable();
    bands.dedup();
    if bands.iter().any(|b| !bands.contains(&-b)) {
        return Err(Error::invalid("bands", "band list must be symmetric around the pump"));
    }
    let device = req.device;
    let off = device.profile.offsets();
    let disp = req.dispersion;
    let mut warnings = Vec::new();

    let (pump_chain, _) = disp.band_chain(device, 0, &off.pump);
    let pump = pump_steady_state(&pump_chain, nonlinear_rate(device), req.pump.detuning, req.pump.power)?;
    let omega_p = req.pump.detuning;

    let chains: Vec<(i32, ModeChain, ModeChain)> = bands
        .iter()
        .map(|&b| {
            let (s, clamped) = disp.band_chain(device, b, &off.signal);
            let (i, _) = disp.band_chain(device, b, &off.idler);
            if clamped {
                warnings.push(format!("band {b}: coupling clamped to (0, 1]"));
            }
            (b, s, i)
        })
        .collect();
    let signal_of = |b: i32| chains.iter().find(|c| c.0 == b).map(|c| c.1.clone()).unwrap();
    let idler_of = |b: i32| chains.iter().find(|c| c.0 == b).map(|c| c.2.clone()).unwrap();

    let widest = chains.iter().map(|c| c.1.rates.band_full_width()).fold(0.0, f64::max);
    let half_span = 0.5 * req.grid.span_factor * widest;

    let spectra: Vec<BandSpectrum> = chains
        .par_iter()
        .map(|(b, s, _)| {
            let axis = uniform_axis(s.center(), half_span, req.samples);
            let power = axis.iter().map(|&w| s.transmission(w).map(|t| t.norm_sqr())).collect::<Result<Vec<_>>>()?;
            let width_hz = outer_half_width(&axis, &power) / (2.0 * PI);
            Ok(BandSpectrum { band: *b, axis, power, width_hz })
        })
        .collect::<Result<_>>()?;

    let positive: Vec<i32> = bands.iter().cloned().filter(|&b| b >= 0).collect();
    let two_photon: Vec<TwoPhotonSpectrum> = positive
        .par_iter()
        .map(|&b| {
            let sys = CmtSystem::new(signal_of(b), idler_of(-b), pump.chi.clone());
            let axis = uniform_axis(sys.signal.center(), half_span, req.samples);
            let intensity = axis
                .iter()
                .map(|&ws| sys.jsi(ws, 2.0 * omega_p - ws, req.grid.solver))
                .collect::<Result<Vec<_>>>()?;
            let edge = edge_to_center(&sys.signal, &axis, &intensity);
            Ok(TwoPhotonSpectrum { band: b, axis, intensity, edge_to_center: edge })
        })
        .collect::<Result<_>>()?;

    let env = req.pump.grid_envelope();
    let mut jsa = Vec::new();
    for &b in positive.iter().filter(|&&b| b == 1 || b == 2) {
        let sys = CmtSystem::new(signal_of(b), idler_of(-b), pump.chi.clone());
        let grid = GridSpec {
            signal_axis: uniform_axis(sys.signal.center(), half_span, req.grid.points),
            idler_axis: uniform_axis(sys.idler.center(), half_span, req.grid.points),
        };
        let mut m = jsa_grid(&sys, &grid, omega_p, &env, req.grid.solver)?;
        m.metadata.device_hash = device_hash(device);
        m.metadata.pump = req.pump.describe();
        jsa.push((b, m));
    }
    Ok(CombResult { bands: spectra, two_photon, jsa, warnings })
}
