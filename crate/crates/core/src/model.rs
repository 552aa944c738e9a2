//! Physical parameters, unit conversions, coupled-mode rates and the
//! closed-form quality-factor and single-ring scaling laws.
//!
//! Lengths are meters, powers watts, rates angular (rad/s). Frequencies
//! reported to users are in Hz.

use std::f64::consts::{LN_10, PI};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;

pub fn db_per_cm_to_per_m(db_per_cm: f64) -> f64 {
    db_per_cm * LN_10 / 10.0 * 100.0
}

pub fn per_m_to_db_per_cm(per_m: f64) -> f64 {
    per_m / 100.0 * 10.0 / LN_10
}

/// cm/GW to m/W.
pub fn cm_per_gw_to_m_per_w(beta: f64) -> f64 {
    beta * 1e-2 / 1e9
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {value}")))
    }
}

/// Constants of the silicon wire the rings are made of.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideParams {
    pub group_index: f64,
    /// Field-power loss coefficient, 1/m.
    pub linear_loss: f64,
    /// Kerr nonlinear parameter, 1/(W m).
    pub gamma0: f64,
    /// Two-photon absorption coefficient, m/W.
    pub tpa_beta0: f64,
    /// m^2
    pub effective_area: f64,
    /// m
    pub wavelength: f64,
}

impl WaveguideParams {
    /// Loss and TPA may be zero (lossless / TPA-free studies); everything else
    /// must be strictly positive.
    pub fn new(
        group_index: f64,
        linear_loss: f64,
        gamma0: f64,
        tpa_beta0: f64,
        effective_area: f64,
        wavelength: f64,
    ) -> Result<Self> {
        require_positive("group_index", group_index)?;
        require_non_negative("linear_loss", linear_loss)?;
        require_positive("gamma0", gamma0)?;
        require_non_negative("tpa_beta0", tpa_beta0)?;
        require_positive("effective_area", effective_area)?;
        require_positive("wavelength", wavelength)?;
        Ok(Self { group_index, linear_loss, gamma0, tpa_beta0, effective_area, wavelength })
    }

    /// 1 dB/cm, 200 /W/m, 0.75 cm/GW at 1550 nm with n_g = 4.1 and
    /// A_eff = 0.1 um^2.
    pub fn silicon_wire() -> Self {
        Self {
            group_index: 4.1,
            linear_loss: db_per_cm_to_per_m(1.0),
            gamma0: 200.0,
            tpa_beta0: cm_per_gw_to_m_per_w(0.75),
            effective_area: 0.1e-12,
            wavelength: 1550e-9,
        }
    }

    pub fn lossless(self) -> Self {
        Self { linear_loss: 0.0, ..self }
    }

    pub fn group_velocity(&self) -> f64 {
        SPEED_OF_LIGHT / self.group_index
    }

    /// Optical carrier angular frequency 2 pi c / lambda.
    pub fn carrier(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingGeometry {
    pub radius: f64,
    pub round_trip_length: f64,
    pub round_trip_time: f64,
    pub fsr: f64,
}

impl RingGeometry {
    pub fn new(radius: f64, wg: &WaveguideParams) -> Result<Self> {
        require_positive("radius", radius)?;
        let round_trip_length = 2.0 * PI * radius;
        let round_trip_time = round_trip_length * wg.group_index / SPEED_OF_LIGHT;
        Ok(Self { radius, round_trip_length, round_trip_time, fsr: 1.0 / round_trip_time })
    }
}

/// Per-ring resonance offsets (rad/s) of the signal, idler and pump modes
/// relative to their nominal carriers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResonanceOffsets {
    pub signal: Vec<f64>,
    pub idler: Vec<f64>,
    pub pump: Vec<f64>,
}

impl ResonanceOffsets {
    pub fn zeros(n_rings: usize) -> Self {
        Self { signal: vec![0.0; n_rings], idler: vec![0.0; n_rings], pump: vec![0.0; n_rings] }
    }

    pub fn uniform(n_rings: usize, signal: f64, idler: f64, pump: f64) -> Self {
        Self { signal: vec![signal; n_rings], idler: vec![idler; n_rings], pump: vec![pump; n_rings] }
    }
}

/// Transfer-matrix field coupling amplitudes of a ring chain.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile {
    inter_ring: Vec<f64>,
    boundary_in: f64,
    boundary_out: f64,
    offsets: ResonanceOffsets,
}

fn require_coupling(name: &'static str, k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 && k <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("coupling magnitude must lie in (0, 1], got {k}")))
    }
}

impl CouplingProfile {
    pub fn new(inter_ring: Vec<f64>, boundary_in: f64, boundary_out: f64) -> Result<Self> {
        for &k in &inter_ring {
            require_coupling("inter_ring", k)?;
        }
        require_coupling("boundary_in", boundary_in)?;
        require_coupling("boundary_out", boundary_out)?;
        let n = inter_ring.len() + 1;
        Ok(Self { inter_ring, boundary_in, boundary_out, offsets: ResonanceOffsets::zeros(n) })
    }

    pub fn with_offsets(mut self, offsets: ResonanceOffsets) -> Result<Self> {
        let n = self.n_rings();
        if offsets.signal.len() != n || offsets.idler.len() != n || offsets.pump.len() != n {
            return Err(Error::invalid("resonance_offsets", format!("expected {n} entries per mode")));
        }
        self.offsets = offsets;
        Ok(self)
    }

    pub fn n_rings(&self) -> usize {
        self.inter_ring.len() + 1
    }

    pub fn inter_ring(&self) -> &[f64] {
        &self.inter_ring
    }

    pub fn boundary_in(&self) -> f64 {
        self.boundary_in
    }

    pub fn boundary_out(&self) -> f64 {
        self.boundary_out
    }

    pub fn offsets(&self) -> &ResonanceOffsets {
        &self.offsets
    }

    /// Every coefficient, input boundary first.
    pub fn all_couplings(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.inter_ring.len() + 2);
        v.push(self.boundary_in);
        v.extend_from_slice(&self.inter_ring);
        v.push(self.boundary_out);
        v
    }

    /// Multiply every coupling by `factor`, clamping into (0, 1]. Returns the
    /// profile and whether any value was clamped.
    pub fn scaled(&self, factor: f64) -> (Self, bool) {
        let mut clamped = false;
        let mut f = |k: f64| {
            let v = k * factor;
            if v > 1.0 {
                clamped = true;
                1.0
            } else if v <= 0.0 {
                clamped = true;
                f64::MIN_POSITIVE
            } else {
                v
            }
        };
        let inter_ring = self.inter_ring.iter().map(|&k| f(k)).collect();
        let boundary_in = f(self.boundary_in);
        let boundary_out = f(self.boundary_out);
        (Self { inter_ring, boundary_in, boundary_out, offsets: self.offsets.clone() }, clamped)
    }

    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let all = self.all_couplings();
        all.iter().zip(all.iter().rev()).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Coupled-mode rates in rad/s. `mu_*` are in sqrt(rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct RateSet {
    pub loss_rate: f64,
    pub external_in: f64,
    pub external_out: f64,
    pub inter_ring: Vec<f64>,
    pub mu_in: f64,
    pub mu_out: f64,
}

impl RateSet {
    pub fn n_rings(&self) -> usize {
        self.inter_ring.len() + 1
    }

    /// Total amplitude damping of a single ring (only meaningful for N = 1).
    pub fn total_damping(&self) -> f64 {
        self.loss_rate + self.external_in + self.external_out
    }

    /// Hermitian spectral extent of the chain plus twice the damping: the
    /// full width the transmission band occupies, rad/s.
    pub fn band_full_width(&self) -> f64 {
        let spread = crate::linalg::hopping_spectrum_width(&self.inter_ring);
        spread + 2.0 * (self.loss_rate + self.external_in + self.external_out)
    }
}

/// Geometry, waveguide and couplings of one device.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSpec {
    pub waveguide: WaveguideParams,
    pub geometry: RingGeometry,
    pub profile: CouplingProfile,
}

impl DeviceSpec {
    pub fn new(waveguide: WaveguideParams, radius: f64, profile: CouplingProfile) -> Result<Self> {
        let geometry = RingGeometry::new(radius, &waveguide)?;
        Ok(Self { waveguide, geometry, profile })
    }

    pub fn n_rings(&self) -> usize {
        self.profile.n_rings()
    }

    pub fn rates(&self) -> RateSet {
        derive_rates(&self.waveguide, &self.geometry, &self.profile)
    }

    pub fn with_profile(&self, profile: CouplingProfile) -> Self {
        Self { profile, ..self.clone() }
    }
}

/// Loss 1/tau_l = alpha v_g / 2, external 1/tau_e = |kappa_e|^2 / (2 T_c),
/// inter-ring |kappa| / T_c, and mu^2 = 2/tau_e.
///
/// With the inter-ring rate at |kappa|/T_c the tight-binding band (4 kappa
/// rate) equals the transfer-matrix band 4 asin|kappa| / T_c to first order,
/// and the group delay per ring at band center is S T_c / 2 with S = 1/|kappa|.
pub fn derive_rates(wg: &WaveguideParams, geom: &RingGeometry, prof: &CouplingProfile) -> RateSet {
    let tc = geom.round_trip_time;
    let external_in = prof.boundary_in * prof.boundary_in / (2.0 * tc);
    let external_out = prof.boundary_out * prof.boundary_out / (2.0 * tc);
    RateSet {
        loss_rate: wg.linear_loss * wg.group_velocity() / 2.0,
        external_in,
        external_out,
        inter_ring: prof.inter_ring.iter().map(|k| k / tc).collect(),
        mu_in: (2.0 * external_in).sqrt(),
        mu_out: (2.0 * external_out).sqrt(),
    }
}

/// Loaded Q of a side-coupled ring from its round-trip amplitude `a_rt` and
/// coupler through-amplitude `tau`.
pub fn q_loaded_raw(a_rt: f64, tau: f64, geom: &RingGeometry, wg: &WaveguideParams) -> Result<f64> {
    let x = a_rt * tau;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::UndefinedQ(x));
    }
    Ok(PI * x.sqrt() / (1.0 - x) * wg.group_index * geom.round_trip_length / wg.wavelength)
}

/// Loaded Q with a_rt = exp(-alpha L / 2) taken from the waveguide loss.
pub fn q_loaded(tau: f64, geom: &RingGeometry, wg: &WaveguideParams) -> Result<f64> {
    let a_rt = (-wg.linear_loss * geom.round_trip_length / 2.0).exp();
    q_loaded_raw(a_rt, tau, geom, wg)
}

/// Loss-limited Q = 2 pi n_g / (lambda alpha).
pub fn q_intrinsic(wg: &WaveguideParams) -> Result<f64> {
    if wg.linear_loss == 0.0 {
        return Err(Error::InfiniteQ("linear loss"));
    }
    Ok(2.0 * PI * wg.group_index / (wg.wavelength * wg.linear_loss))
}

/// Coupling-limited Q = 2 pi n_g L / (lambda |kappa|^2).
pub fn q_coupling_limited(wg: &WaveguideParams, geom: &RingGeometry, kappa: f64) -> Result<f64> {
    if kappa == 0.0 {
        return Err(Error::InfiniteQ("coupling"));
    }
    Ok(2.0 * PI * wg.group_index * geom.round_trip_length / (wg.wavelength * kappa * kappa))
}

/// Spontaneously generated idler power of a single ring, W.
pub fn idler_power_single_ring(wg: &WaveguideParams, geom: &RingGeometry, q: f64, pump_power: f64) -> Result<f64> {
    require_positive("q", q)?;
    require_non_negative("pump_power", pump_power)?;
    let r = geom.radius;
    let vg = wg.group_velocity();
    let wp = wg.carrier();
    let gl = wg.gamma0 * 2.0 * PI * r;
    let build_up = q * vg / (wp * PI * r);
    Ok(gl * gl * build_up.powi(3) * (HBAR * wp * vg / (4.0 * PI * r)) * pump_power * pump_power)
}

/// S = 1/|kappa| at resonance for an apodized chain.
pub fn slowing_factor(kappa: f64) -> Result<f64> {
    require_coupling("kappa", kappa)?;
    Ok(1.0 / kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_device() -> (WaveguideParams, RingGeometry) {
        let wg = WaveguideParams::silicon_wire();
        let geom = RingGeometry::new(5e-6, &wg).unwrap();
        (wg, geom)
    }

    #[test]
    fn round_trip_time_and_fsr() {
        let (_, geom) = reference_device();
        assert_relative_eq!(geom.round_trip_time, 4.294e-13, max_relative = 1e-3);
        assert_relative_eq!(geom.fsr, 2.329e12, max_relative = 1e-3);
        assert_relative_eq!(geom.fsr * geom.round_trip_time, 1.0, max_relative = 1e-15);
        assert_eq!(geom.round_trip_length, 2.0 * PI * 5e-6);
    }

    #[test]
    fn lossless_has_no_damping() {
        let (wg, geom) = reference_device();
        let prof = CouplingProfile::new(vec![0.1, 0.2], 0.3, 0.4).unwrap();
        let rates = derive_rates(&wg.lossless(), &geom, &prof);
        assert_eq!(rates.loss_rate, 0.0);
    }

    #[test]
    fn inter_ring_rate() {
        let (wg, geom) = reference_device();
        let prof = CouplingProfile::new(vec![0.02], 0.2, 0.2).unwrap();
        let rates = derive_rates(&wg, &geom, &prof);
        assert_relative_eq!(rates.inter_ring[0], 0.02 / 4.2965e-13, max_relative = 1e-3);
        assert_relative_eq!(rates.mu_in.powi(2) / rates.external_in, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_couplings() {
        assert!(CouplingProfile::new(vec![0.0], 0.1, 0.1).is_err());
        assert!(CouplingProfile::new(vec![0.5], 1.1, 0.1).is_err());
        assert!(CouplingProfile::new(vec![], 0.1, f64::NAN).is_err());
        assert!(WaveguideParams::new(4.1, -1.0, 200.0, 0.0, 1e-13, 1.55e-6).is_err());
    }

    #[test]
    fn intrinsic_q_value() {
        let (wg, _) = reference_device();
        assert_relative_eq!(q_intrinsic(&wg).unwrap(), 7.22e5, max_relative = 2e-3);
        let doubled = WaveguideParams { linear_loss: 2.0 * wg.linear_loss, ..wg };
        assert_relative_eq!(q_intrinsic(&doubled).unwrap(), q_intrinsic(&wg).unwrap() / 2.0, max_relative = 1e-15);
        assert!(matches!(q_intrinsic(&wg.lossless()), Err(Error::InfiniteQ(_))));
    }

    #[test]
    fn loaded_q_limits() {
        let (wg, geom) = reference_device();
        // Weak loss, no coupling: loaded -> intrinsic.
        let small = WaveguideParams { linear_loss: 1e-4 / geom.round_trip_length, ..wg };
        let q = q_loaded(1.0, &geom, &small).unwrap();
        assert_relative_eq!(q, q_intrinsic(&small).unwrap(), max_relative = 1e-3);
        // Coupling dominated.
        let kappa: f64 = 0.1;
        let tau = (1.0 - kappa * kappa).sqrt();
        let tiny_loss = WaveguideParams { linear_loss: 1e-6 / geom.round_trip_length, ..wg };
        let q = q_loaded(tau, &geom, &tiny_loss).unwrap();
        assert_relative_eq!(q, q_coupling_limited(&wg, &geom, kappa).unwrap(), max_relative = 0.05);
        assert!(matches!(q_loaded(1.0, &geom, &wg.lossless()), Err(Error::UndefinedQ(_))));
        assert!(q_loaded_raw(1.0, 1.01, &geom, &wg).is_err());
    }

    #[test]
    fn coupling_limited_q_scales_with_radius() {
        let wg = WaveguideParams::silicon_wire();
        let g1 = RingGeometry::new(5e-6, &wg).unwrap();
        let g2 = RingGeometry::new(10e-6, &wg).unwrap();
        let r = q_coupling_limited(&wg, &g2, 0.1).unwrap() / q_coupling_limited(&wg, &g1, 0.1).unwrap();
        assert_relative_eq!(r, 2.0, max_relative = 1e-14);
        assert!(q_coupling_limited(&wg, &g1, 0.0).is_err());
    }

    #[test]
    fn idler_power_scaling() {
        let (wg, g1) = reference_device();
        let g2 = RingGeometry::new(10e-6, &wg).unwrap();
        assert_eq!(idler_power_single_ring(&wg, &g1, 1e5, 0.0).unwrap(), 0.0);
        let p1 = idler_power_single_ring(&wg, &g1, 1e5, 1e-3).unwrap();
        let p2 = idler_power_single_ring(&wg, &g2, 1e5, 1e-3).unwrap();
        assert_relative_eq!(p2 / p1, 0.25, max_relative = 1e-12);
        let q1 = q_coupling_limited(&wg, &g1, 0.1).unwrap();
        let q2 = q_coupling_limited(&wg, &g2, 0.1).unwrap();
        let p1 = idler_power_single_ring(&wg, &g1, q1, 1e-3).unwrap();
        let p2 = idler_power_single_ring(&wg, &g2, q2, 1e-3).unwrap();
        assert_relative_eq!(p2 / p1, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn slowing() {
        assert_eq!(slowing_factor(1.0).unwrap(), 1.0);
        assert_relative_eq!(slowing_factor(0.02).unwrap(), 50.0, max_relative = 1e-14);
        assert_relative_eq!(slowing_factor(0.1).unwrap(), 10.0, max_relative = 1e-14);
        assert!(slowing_factor(0.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn loss_unit_round_trip(db in 1e-6f64..100.0) {
            let back = per_m_to_db_per_cm(db_per_cm_to_per_m(db));
            proptest::prop_assert!(((back - db) / db).abs() < 1e-12);
        }

        #[test]
        fn mu_squared_times_tau_is_two(k1 in 0.001f64..1.0, k2 in 0.001f64..1.0, k in 0.001f64..1.0) {
            let (wg, geom) = reference_device();
            let prof = CouplingProfile::new(vec![k], k1, k2).unwrap();
            let r = derive_rates(&wg, &geom, &prof);
            proptest::prop_assert!((r.mu_in * r.mu_in / r.external_in - 2.0).abs() < 1e-12);
            proptest::prop_assert!((r.mu_out * r.mu_out / r.external_out - 2.0).abs() < 1e-12);
        }
    }
}
