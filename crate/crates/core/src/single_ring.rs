//! Closed-form pair generation in one add-drop ring.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::cmt::{nonlinear_rate, pump_steady_state, CmtSystem};
use crate::error::{Error, Result};
use crate::model::{q_loaded_raw, DeviceSpec};
use crate::quad::{integrate_real_line, Tolerance};

/// Single ring under continuous-wave pumping.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleRingModel {
    /// Total amplitude damping 1/tau, rad/s.
    pub damping: f64,
    pub mu_in: f64,
    pub mu_out: f64,
    pub chi: C64,
    pub signal_resonance: f64,
    pub idler_resonance: f64,
    pub omega_p: f64,
}

impl SingleRingModel {
    pub fn from_device(device: &DeviceSpec, omega_p: f64, pump_power: f64) -> Result<Self> {
        if device.n_rings() != 1 {
            return Err(Error::invalid("n_rings", format!("single-ring model needs 1 ring, got {}", device.n_rings())));
        }
        let (s, _, p) = CmtSystem::chains(device);
        let state = pump_steady_state(&p, nonlinear_rate(device), omega_p, pump_power)?;
        let r = &s.rates;
        let off = device.profile.offsets();
        Ok(Self {
            damping: r.total_damping(),
            mu_in: r.mu_in,
            mu_out: r.mu_out,
            chi: state.chi[0],
            signal_resonance: off.signal[0],
            idler_resonance: off.idler[0],
            omega_p,
        })
    }

    fn denominators(&self, ws: f64, wi: f64) -> (C64, C64) {
        let a = C64::new(self.damping, -(ws - self.signal_resonance));
        let b = C64::new(self.damping, wi - self.idler_resonance);
        (a, b)
    }

    fn prefactor(&self) -> f64 {
        (self.mu_in * self.mu_out).powi(2)
    }

    /// Joint spectral intensity to first order in the pump:
    /// mu^4 |chi|^2 / (|a|^2 |b|^2).
    pub fn psd(&self, ws: f64, wi: f64) -> f64 {
        let (a, b) = self.denominators(ws, wi);
        self.prefactor() * self.chi.norm_sqr() / (a.norm_sqr() * b.norm_sqr())
    }

    /// Joint spectral intensity from the exact 2x2 inverse, which adds the
    /// |chi|^2 parametric term to the denominator.
    pub fn psd_exact(&self, ws: f64, wi: f64) -> f64 {
        let (a, b) = self.denominators(ws, wi);
        let t = C64::new(0.0, 1.0) * self.chi / (a * b - self.chi.norm_sqr());
        self.prefactor() * t.norm_sqr()
    }

    /// Pair flux (pairs/s): the first-order JSI integrated along
    /// w_s + w_i = 2 w_p, divided by 2 pi.
    pub fn flux(&self, tol: Tolerance) -> Result<f64> {
        let center = 0.5 * (self.signal_resonance + 2.0 * self.omega_p - self.idler_resonance);
        let est = integrate_real_line(|ws| self.psd(ws, 2.0 * self.omega_p - ws), center, self.damping, tol)?;
        Ok(est.value / (2.0 * PI))
    }

    /// Pair flux for a resonant pump with the signal and idler modes on
    /// resonance: mu^4 |chi|^2 / (4 gamma^3).
    pub fn flux_resonant(&self) -> f64 {
        self.prefactor() * self.chi.norm_sqr() / (4.0 * self.damping.powi(3))
    }

    /// Full width at half maximum of the single-photon line, Hz.
    pub fn linewidth_hz(&self) -> f64 {
        2.0 * self.damping / (2.0 * PI)
    }
}

/// Loaded Q of the ring of `device` from its coupler and loss, with both
/// couplers folded into one through-amplitude.
pub fn loaded_q(device: &DeviceSpec) -> Result<f64> {
    let g = &device.geometry;
    let wg = &device.waveguide;
    let a_rt = (-wg.linear_loss * g.round_trip_length / 2.0).exp();
    let p = &device.profile;
    let tau = ((1.0 - p.boundary_in().powi(2)) * (1.0 - p.boundary_out().powi(2))).sqrt();
    q_loaded_raw(a_rt, tau, g, wg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CouplingProfile, ResonanceOffsets, WaveguideParams};
    use approx::assert_relative_eq;

    fn ring(k: f64) -> DeviceSpec {
        DeviceSpec::new(WaveguideParams::silicon_wire(), 5e-6, CouplingProfile::new(vec![], k, k).unwrap()).unwrap()
    }

    #[test]
    fn flux_matches_closed_form() {
        let m = SingleRingModel::from_device(&ring(0.1), 0.0, 1e-3).unwrap();
        let f = m.flux(Tolerance::default()).unwrap();
        assert_relative_eq!(f, m.flux_resonant(), max_relative = 1e-6);
    }

    #[test]
    fn flux_scales_with_pump_squared() {
        let a = SingleRingModel::from_device(&ring(0.1), 0.0, 1e-3).unwrap().flux_resonant();
        let b = SingleRingModel::from_device(&ring(0.1), 0.0, 2e-3).unwrap().flux_resonant();
        assert_relative_eq!(b / a, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn exchange_symmetric_on_resonance() {
        let m = SingleRingModel::from_device(&ring(0.2), 0.0, 1e-3).unwrap();
        for &(x, y) in &[(1e10, -3e10), (5e11, 2e9), (-7e10, 4e10)] {
            assert_relative_eq!(m.psd(x, y), m.psd(y, x), max_relative = 1e-14);
        }
    }

    #[test]
    fn agrees_with_chain_engine() {
        let d = ring(0.15);
        let m = SingleRingModel::from_device(&d, 0.0, 1e-3).unwrap();
        let (sys, _) = CmtSystem::pumped(&d, 0.0, 1e-3).unwrap();
        for &(ws, wi) in &[(0.0, 0.0), (2e10, -1e10)] {
            let exact = sys.jsi(ws, wi, crate::cmt::SolverMode::Full).unwrap();
            let fast = sys.jsi(ws, wi, crate::cmt::SolverMode::Fast).unwrap();
            assert_relative_eq!(m.psd_exact(ws, wi), exact, max_relative = 1e-10);
            assert_relative_eq!(m.psd(ws, wi), fast, max_relative = 1e-10);
        }
    }

    #[test]
    fn detuned_pump_generates_less() {
        let d = ring(0.1);
        let on = SingleRingModel::from_device(&d, 0.0, 1e-3).unwrap();
        let gamma = on.damping;
        let off = SingleRingModel::from_device(&d, gamma, 1e-3).unwrap();
        // |a_p|^4 drops by (1 + 1)^2
        assert_relative_eq!(off.chi.norm_sqr() / on.chi.norm_sqr(), 0.25, max_relative = 1e-12);
        assert!(off.flux(Tolerance::default()).unwrap() < on.flux_resonant());
    }

    #[test]
    fn rejects_chains() {
        let d = DeviceSpec::new(WaveguideParams::silicon_wire(), 5e-6, CouplingProfile::new(vec![0.1], 0.1, 0.1).unwrap())
            .unwrap();
        assert!(SingleRingModel::from_device(&d, 0.0, 1e-3).is_err());
    }

    #[test]
    fn offsets_shift_the_line() {
        let p = CouplingProfile::new(vec![], 0.1, 0.1)
            .unwrap()
            .with_offsets(ResonanceOffsets::uniform(1, 1e10, -1e10, 0.0))
            .unwrap();
        let d = ring(0.1).with_profile(p);
        let m = SingleRingModel::from_device(&d, 0.0, 1e-3).unwrap();
        assert!(m.psd(1e10, -1e10) > m.psd(0.0, 0.0));
        assert!(loaded_q(&d).unwrap() > 0.0);
    }
}
