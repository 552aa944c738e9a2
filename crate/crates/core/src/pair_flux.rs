//! Closed-form pair flux of a slow-light chain, the (S, N) design sweep and
//! its cross-check against the coupled-mode engine.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::cmt::CmtSystem;
use crate::cmt::SolverMode;
use crate::error::{Error, Result};
use crate::model::{CouplingProfile, DeviceSpec, RingGeometry, WaveguideParams};
use crate::quad::Tolerance;
use crate::synth::matched_boundary;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignPoint {
    pub slowing: f64,
    pub n_rings: usize,
    /// W
    pub pump_power: f64,
}

impl DesignPoint {
    pub fn new(slowing: f64, n_rings: usize, pump_power: f64) -> Result<Self> {
        if !(slowing >= 1.0 && slowing.is_finite()) {
            return Err(Error::invalid("slowing", format!("must be >= 1, got {slowing}")));
        }
        if n_rings == 0 {
            return Err(Error::invalid("n_rings", "must be >= 1"));
        }
        if !(pump_power >= 0.0 && pump_power.is_finite()) {
            return Err(Error::invalid("pump_power", format!("must be >= 0, got {pump_power}")));
        }
        Ok(Self { slowing, n_rings, pump_power })
    }

    /// Inter-ring coupling of the apodized chain with this slowing.
    pub fn kappa(&self) -> f64 {
        1.0 / self.slowing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxReport {
    pub point: DesignPoint,
    pub kappa: f64,
    /// pairs/s
    pub flux_closed_form: f64,
    pub flux_cmt: Option<f64>,
    pub bandwidth_hz: f64,
    pub gamma_eff: f64,
    pub multiphoton_metric: f64,
    pub effective_power: f64,
    pub geometric_length: f64,
    pub effective_length: f64,
    /// Linear plus TPA loss used in the exponent, 1/m.
    pub alpha_used: f64,
}

impl FluxReport {
    /// Stimulated processes negligible.
    pub fn multiphoton_ok(&self) -> bool {
        self.multiphoton_metric < 0.1
    }
}

/// Bloch eigenmode linewidth (1/N)(2 FSR/pi) asin|kappa|, Hz.
pub fn bandwidth(geom: &RingGeometry, kappa: f64, n_rings: usize) -> Result<f64> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::invalid("kappa", format!("must lie in (0, 1], got {kappa}")));
    }
    if n_rings == 0 {
        return Err(Error::invalid("n_rings", "must be >= 1"));
    }
    Ok(2.0 * geom.fsr / PI * kappa.asin() / n_rings as f64)
}

/// sqrt(S_s S_i) (S_p + 1)/2 gamma0.
pub fn gamma_eff(s_s: f64, s_i: f64, s_p: f64, gamma0: f64) -> f64 {
    (s_s * s_i).sqrt() * (s_p + 1.0) / 2.0 * gamma0
}

/// (1 - exp(-alpha L)) / alpha, equal to L when alpha = 0.
pub fn effective_length(alpha: f64, length: f64) -> f64 {
    if alpha * length < 1e-300 {
        length
    } else {
        -(-alpha * length).exp_m1() / alpha
    }
}

/// Mean power over the chain with two-photon absorption, and the extra loss
/// it causes. TPA grows as S^2.
pub fn tpa_correction(wg: &WaveguideParams, slowing: f64, power: f64, length: f64, l_eff: f64) -> (f64, f64) {
    let b = slowing * slowing * wg.tpa_beta0 / wg.effective_area;
    let x = b * power * l_eff;
    // ln(1 + x)/x -> 1 as x -> 0
    let ratio = if x == 0.0 { 1.0 } else { x.ln_1p() / x };
    let pbar = power * l_eff / length * ratio;
    (pbar, 2.0 * pbar * slowing * slowing * wg.tpa_beta0 / wg.effective_area)
}

/// dnu (gamma_eff P L)^2 exp(-alpha L).
pub fn flux_from_parts(bandwidth_hz: f64, gamma_eff: f64, power: f64, length: f64, alpha: f64) -> f64 {
    bandwidth_hz * (gamma_eff * power * length).powi(2) * (-alpha * length).exp()
}

pub fn flux_closed_form(point: &DesignPoint, wg: &WaveguideParams, geom: &RingGeometry) -> Result<FluxReport> {
    let s = point.slowing;
    let kappa = point.kappa();
    let dnu = bandwidth(geom, kappa, point.n_rings)?;
    let g = gamma_eff(s, s, s, wg.gamma0);
    let length = point.n_rings as f64 * PI * geom.radius;
    let alpha_lin = s * wg.linear_loss;
    let l_eff = effective_length(alpha_lin, length);
    let (pbar, alpha_nl) = tpa_correction(wg, s, point.pump_power, length, l_eff);
    let alpha = alpha_lin + alpha_nl;
    Ok(FluxReport {
        point: *point,
        kappa,
        flux_closed_form: flux_from_parts(dnu, g, pbar, length, alpha),
        flux_cmt: None,
        bandwidth_hz: dnu,
        gamma_eff: g,
        multiphoton_metric: g * pbar * length,
        effective_power: pbar,
        geometric_length: length,
        effective_length: l_eff,
        alpha_used: alpha,
    })
}

/// gamma_eff P-bar L and whether it is below 0.1.
pub fn multiphoton_metric(point: &DesignPoint, wg: &WaveguideParams, geom: &RingGeometry) -> Result<(f64, bool)> {
    let r = flux_closed_form(point, wg, geom)?;
    Ok((r.multiphoton_metric, r.multiphoton_ok()))
}

/// Apodized uniform chain with |kappa| = 1/S and matched boundaries.
pub fn apodized_device(point: &DesignPoint, wg: &WaveguideParams, radius: f64) -> Result<DeviceSpec> {
    let k = point.kappa();
    let ke = matched_boundary(k);
    DeviceSpec::new(*wg, radius, CouplingProfile::new(vec![k; point.n_rings - 1], ke, ke)?)
}

/// cw pair flux of the apodized chain from the coupled-mode engine, counted
/// over one Bloch-mode bandwidth around the pump (signal offsets within
/// +-dnu/2, idler mirrored).
pub fn flux_cmt(point: &DesignPoint, wg: &WaveguideParams, geom: &RingGeometry) -> Result<f64> {
    let device = apodized_device(point, wg, geom.radius)?;
    let (sys, _) = CmtSystem::pumped(&device, 0.0, point.pump_power)?;
    let half = PI * bandwidth(geom, point.kappa(), point.n_rings)?;
    let tol = Tolerance { abs: 0.0, rel: 1e-6, max_evals: 400_000 };
    sys.cw_flux(0.0, -half, half, SolverMode::Fast, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub slowing: Vec<f64>,
    pub n_rings: Vec<usize>,
    pub pump_power: f64,
    pub with_cmt: bool,
}

/// `steps` log-spaced values from `lo` to `hi`.
pub fn log_space(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|k| {
            if k == steps - 1 {
                hi
            } else {
                lo * (hi / lo).powf(k as f64 / (steps - 1) as f64)
            }
        })
        .collect()
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { slowing: log_space(2.0, 100.0, 60), n_rings: (1..=50).collect(), pump_power: 1e-3, with_cmt: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub slowing: f64,
    pub n_rings: usize,
    pub report: std::result::Result<FluxReport, String>,
    pub is_nopt: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Row-major: slowing outer, ring count inner.
    pub points: Vec<SweepPoint>,
    /// (S, N_opt) for each slowing with at least one successful point.
    pub n_opt: Vec<(f64, usize)>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.report.is_err()).count()
    }

    pub fn max_flux(&self) -> Option<&FluxReport> {
        self.points
            .iter()
            .filter_map(|p| p.report.as_ref().ok())
            .max_by(|a, b| a.flux_closed_form.total_cmp(&b.flux_closed_form))
    }
}

pub fn sweep(spec: &SweepSpec, wg: &WaveguideParams, geom: &RingGeometry) -> Result<SweepResult> {
    if spec.slowing.is_empty() || spec.n_rings.is_empty() {
        return Err(Error::invalid("sweep", "S and N ranges must be non-empty"));
    }
    let pairs: Vec<(f64, usize)> =
        spec.slowing.iter().flat_map(|&s| spec.n_rings.iter().map(move |&n| (s, n))).collect();
    let mut points: Vec<SweepPoint> = pairs
        .par_iter()
        .map(|&(s, n)| {
            let report = DesignPoint::new(s, n, spec.pump_power)
                .and_then(|p| {
                    let mut r = flux_closed_form(&p, wg, geom)?;
                    if spec.with_cmt {
                        r.flux_cmt = Some(flux_cmt(&p, wg, geom)?);
                    }
                    Ok(r)
                })
                .map_err(|e| e.to_string());
            SweepPoint { slowing: s, n_rings: n, report, is_nopt: false }
        })
        .collect();
    let mut n_opt = Vec::new();
    for row in points.chunks_mut(spec.n_rings.len()) {
        let best = row
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.report.as_ref().ok().map(|r| (i, r.flux_closed_form)))
            .fold(None::<(usize, f64)>, |acc, (i, f)| match acc {
                Some((_, bf)) if bf >= f => acc,
                _ => Some((i, f)),
            });
        if let Some((i, _)) = best {
            row[i].is_nopt = true;
            n_opt.push((row[i].slowing, row[i].n_rings));
        }
    }
    Ok(SweepResult { points, n_opt })
}
