//! TOML run configuration. Every section and key is optional; missing values
//! take the silicon-wire defaults. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cm_per_gw_to_m_per_w, db_per_cm_to_per_m, CouplingProfile, DeviceSpec, WaveguideParams};
use crate::pair_flux::{log_space, SweepSpec};
use crate::spectral::{DispersionModel, GridOptions, PumpSpec};
use crate::synth::{generate, ExplicitCouplings, ProfileKind, ProfileRequest};
use crate::cmt::SolverMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveguideSection {
    pub ng: f64,
    pub alpha_db_per_cm: f64,
    pub gamma0_w_m: f64,
    pub beta0_cm_gw: f64,
    pub aeff_um2: f64,
    pub lambda_nm: f64,
}

impl Default for WaveguideSection {
    fn default() -> Self {
        Self { ng: 4.1, alpha_db_per_cm: 1.0, gamma0_w_m: 200.0, beta0_cm_gw: 0.75, aeff_um2: 0.1, lambda_nm: 1550.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RingSection {
    pub radius_um: f64,
    pub n_rings: usize,
}

impl Default for RingSection {
    fn default() -> Self {
        Self { radius_um: 5.0, n_rings: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSection {
    pub kind: ProfileKind,
    pub kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inter_ring: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_in: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_out: Option<f64>,
}

impl Default for CouplingSection {
    fn default() -> Self {
        Self {
            kind: ProfileKind::Uniform,
            kappa: 0.3,
            bandwidth_fraction: None,
            inter_ring: None,
            boundary_in: None,
            boundary_out: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpModeName {
    Cw,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpSection {
    pub mode: PumpModeName,
    pub power_mw: f64,
    pub fwhm_ps: f64,
    pub detuning_hz: f64,
}

impl Default for PumpSection {
    fn default() -> Self {
        Self { mode: PumpModeName::Gaussian, power_mw: 1.0, fwhm_ps: 10.0, detuning_hz: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub points: usize,
    pub span_factor: f64,
    /// Samples of one-dimensional spectra.
    pub spectrum_samples: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { points: 256, span_factor: 1.5, spectrum_samples: 2001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub s_min: f64,
    pub s_max: f64,
    pub s_steps: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub with_cmt: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { s_min: 2.0, s_max: 100.0, s_steps: 60, n_min: 1, n_max: 50, with_cmt: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub samples: usize,
}

impl Default for McSection {
    fn default() -> Self {
        Self { samples: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionSection {
    pub shift_ghz_per_band_sq: f64,
    pub kappa_growth_per_band: f64,
    /// Bands -max_band..=max_band.
    pub max_band: u32,
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self { shift_ghz_per_band_sq: -2.0, kappa_growth_per_band: 0.1, max_band: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub waveguide: WaveguideSection,
    pub ring: RingSection,
    pub coupling: CouplingSection,
    pub pump: PumpSection,
    pub grid: GridSection,
    pub sweep: SweepSection,
    pub mc: McSection,
    pub dispersion: DispersionSection,
}

fn bad(key: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {reason}"))
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(key, format!("must be > 0, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(bad(key, format!("must be >= 0, got {v}")))
    }
}

fn coupling(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(bad(key, format!("must lie in (0, 1], got {v}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.waveguide;
        positive("waveguide.ng", w.ng)?;
        non_negative("waveguide.alpha_db_per_cm", w.alpha_db_per_cm)?;
        positive("waveguide.gamma0_w_m", w.gamma0_w_m)?;
        non_negative("waveguide.beta0_cm_gw", w.beta0_cm_gw)?;
        positive("waveguide.aeff_um2", w.aeff_um2)?;
        positive("waveguide.lambda_nm", w.lambda_nm)?;
        positive("ring.radius_um", self.ring.radius_um)?;
        if self.ring.n_rings == 0 {
            return Err(bad("ring.n_rings", "must be >= 1"));
        }
        let c = &self.coupling;
        coupling("coupling.kappa", c.kappa)?;
        if let Some(f) = c.bandwidth_fraction {
            positive("coupling.bandwidth_fraction", f)?;
        }
        if let Some(v) = &c.inter_ring {
            for &k in v {
                coupling("coupling.inter_ring", k)?;
            }
        }
        for (key, v) in [("coupling.boundary_in", c.boundary_in), ("coupling.boundary_out", c.boundary_out)] {
            if let Some(v) = v {
                coupling(key, v)?;
            }
        }
        if c.kind == ProfileKind::Explicit {
            let n = c.inter_ring.as_ref().map(|v| v.len() + 1);
            if n != Some(self.ring.n_rings) {
                return Err(bad(
                    "coupling.inter_ring",
                    format!("explicit profile needs {} values for {} rings", self.ring.n_rings - 1, self.ring.n_rings),
                ));
            }
            if c.boundary_in.is_none() || c.boundary_out.is_none() {
                return Err(bad("coupling.boundary_in", "explicit profile needs boundary_in and boundary_out"));
            }
        }
        let p = &self.pump;
        non_negative("pump.power_mw", p.power_mw)?;
        if p.mode == PumpModeName::Gaussian {
            positive("pump.fwhm_ps", p.fwhm_ps)?;
        }
        if !p.detuning_hz.is_finite() {
            return Err(bad("pump.detuning_hz", "must be finite"));
        }
        if self.grid.points < 2 {
            return Err(bad("grid.points", "must be >= 2"));
        }
        positive("grid.span_factor", self.grid.span_factor)?;
        if self.grid.spectrum_samples < 3 {
            return Err(bad("grid.spectrum_samples", "must be >= 3"));
        }
        let s = &self.sweep;
        if !(s.s_min >= 1.0) {
            return Err(bad("sweep.s_min", format!("must be >= 1, got {}", s.s_min)));
        }
        if !(s.s_max >= s.s_min && s.s_max.is_finite()) {
            return Err(bad("sweep.s_max", "must be finite and >= s_min"));
        }
        if s.s_steps == 0 {
            return Err(bad("sweep.s_steps", "must be >= 1"));
        }
        if s.n_min == 0 {
            return Err(bad("sweep.n_min", "must be >= 1"));
        }
        if s.n_max < s.n_min {
            return Err(bad("sweep.n_max", "must be >= n_min"));
        }
        if self.mc.samples == 0 {
            return Err(bad("mc.samples", "must be >= 1"));
        }
        if !self.dispersion.shift_ghz_per_band_sq.is_finite() {
            return Err(bad("dispersion.shift_ghz_per_band_sq", "must be finite"));
        }
        if !(self.dispersion.kappa_growth_per_band.is_finite()) {
            return Err(bad("dispersion.kappa_growth_per_band", "must be finite"));
        }
        Ok(())
    }

    pub fn waveguide(&self) -> Result<WaveguideParams> {
        let w = &self.waveguide;
        WaveguideParams::new(
            w.ng,
            db_per_cm_to_per_m(w.alpha_db_per_cm),
            w.gamma0_w_m,
            cm_per_gw_to_m_per_w(w.beta0_cm_gw),
            w.aeff_um2 * 1e-12,
            w.lambda_nm * 1e-9,
        )
    }

    pub fn radius(&self) -> f64 {
        self.ring.radius_um * 1e-6
    }

    pub fn profile_request(&self, n_rings: usize, seed: u64) -> ProfileRequest {
        let c = &self.coupling;
        let mut req = ProfileRequest::new(c.kind, n_rings, c.kappa);
        req.bandwidth_fraction = c.bandwidth_fraction;
        req.seed = seed;
        if c.kind == ProfileKind::Explicit {
            req.explicit = Some(ExplicitCouplings {
                inter_ring: c.inter_ring.clone().unwrap_or_default(),
                boundary_in: c.boundary_in.unwrap_or(c.kappa),
                boundary_out: c.boundary_out.unwrap_or(c.kappa),
            });
        }
        req
    }

    pub fn profile(&self, seed: u64) -> Result<CouplingProfile> {
        generate(&self.profile_request(self.ring.n_rings, seed))
    }

    pub fn device(&self, seed: u64) -> Result<DeviceSpec> {
        DeviceSpec::new(self.waveguide()?, self.radius(), self.profile(seed)?)
    }

    pub fn pump(&self) -> Result<PumpSpec> {
        let p = &self.pump;
        let power = p.power_mw * 1e-3;
        let mut spec = match p.mode {
            PumpModeName::Cw => PumpSpec::cw(power),
            PumpModeName::Gaussian => PumpSpec::gaussian(power, p.fwhm_ps * 1e-12)?,
        };
        spec.detuning = 2.0 * std::f64::consts::PI * p.detuning_hz;
        Ok(spec)
    }

    pub fn grid_options(&self, solver: SolverMode) -> GridOptions {
        GridOptions { points: self.grid.points, span_factor: self.grid.span_factor, solver }
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        let s = &self.sweep;
        SweepSpec {
            slowing: log_space(s.s_min, s.s_max, s.s_steps),
            n_rings: (s.n_min..=s.n_max).collect(),
            pump_power: self.pump.power_mw * 1e-3,
            with_cmt: s.with_cmt,
        }
    }

    pub fn dispersion(&self) -> DispersionModel {
        DispersionModel {
            shift_hz_per_band_sq: self.dispersion.shift_ghz_per_band_sq * 1e9,
            kappa_growth_per_band: self.dispersion.kappa_growth_per_band,
        }
    }
}
