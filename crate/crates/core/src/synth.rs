//! Coupling-profile generators.
//!
//! Filter profiles come from low-pass ladder prototypes g_0..g_{N+1}. A
//! prototype maps onto a tight-binding chain of bandwidth B (rad/s) as
//!
//! ```text
//! gamma_in  = B / (2 g_0 g_1)
//! J_k       = B / (2 sqrt(g_k g_{k+1}))
//! gamma_out = B / (2 g_N g_{N+1})
//! ```
//!
//! and the chain rates map back to transfer-matrix couplings through
//! |kappa| = J T_c and |kappa_e| = sqrt(2 gamma T_c).

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::model::CouplingProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Uniform,
    Apodized,
    Butterworth,
    Bessel,
    Random,
    Explicit,
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Uniform => "uniform",
            ProfileKind::Apodized => "apodized",
            ProfileKind::Butterworth => "butterworth",
            ProfileKind::Bessel => "bessel",
            ProfileKind::Random => "random",
            ProfileKind::Explicit => "explicit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitCouplings {
    pub inter_ring: Vec<f64>,
    pub boundary_in: f64,
    pub boundary_out: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRequest {
    pub kind: ProfileKind,
    pub n_rings: usize,
    /// Base inter-ring |kappa| (uniform, apodized; sets the default filter
    /// bandwidth).
    pub kappa: f64,
    /// Filter 3-dB bandwidth as a fraction of the FSR. When absent, filter
    /// prototypes are scaled so their largest inter-ring coupling is `kappa`.
    pub bandwidth_fraction: Option<f64>,
    pub seed: u64,
    /// Substream of the random generator.
    pub stream: u64,
    pub explicit: Option<ExplicitCouplings>,
}

impl ProfileRequest {
    pub fn new(kind: ProfileKind, n_rings: usize, kappa: f64) -> Self {
        Self { kind, n_rings, kappa, bandwidth_fraction: None, seed: 0, stream: 0, explicit: None }
    }

    pub fn random(n_rings: usize, seed: u64, stream: u64) -> Self {
        Self { seed, stream, ..Self::new(ProfileKind::Random, n_rings, 0.5) }
    }

    pub fn explicit(c: ExplicitCouplings) -> Self {
        Self { explicit: Some(c.clone()), ..Self::new(ProfileKind::Explicit, c.inter_ring.len() + 1, 0.5) }
    }
}

/// Butterworth prototype g_1..g_N; g_0 = g_{N+1} = 1.
pub fn butterworth_g(n: usize) -> Vec<f64> {
    (1..=n).map(|k| 2.0 * ((2 * k - 1) as f64 * PI / (2 * n) as f64).sin()).collect()
}

/// Delay-normalized Bessel (maximally flat group delay) prototype
/// g_1..g_N for N = 2..10, g_0 = g_{N+1} = 1. Element values of the
/// doubly terminated ladder whose transfer function is theta_N(0)/theta_N(s)
/// with theta_N the reverse Bessel polynomial (the classic tabulated values).
const BESSEL_G: [&[f64]; 9] = [
    &[1.577_350_269_19, 0.422_649_730_81],
    &[1.255_024_271_9, 0.552_786_404_5, 0.192_189_323_599],
    &[1.059_823_034_51, 0.511_616_939_772, 0.318_141_438_502, 0.110_418_587_219],
    &[0.930_298_712_544, 0.457_703_004_075, 0.331_221_729_563, 0.208_963_662_591, 0.071_812_891_225_7],
    &[
        0.837_659_160_694,
        0.411_572_474_329,
        0.315_819_865_691,
        0.236_426_932_761,
        0.148_032_318_194,
        0.050_489_248_332_4,
    ],
    &[
        0.767_653_742_158,
        0.374_413_437_62,
        0.294_413_498_251,
        0.237_830_364_312,
        0.177_825_927_577,
        0.110_406_099_955,
        0.037_456_930_126_8,
    ],
    &[
        0.712_540_839_991,
        0.344_556_961_69,
        0.273_460_705_385,
        0.229_668_101_306,
        0.186_680_544_03,
        0.138_671_449_151,
        0.085_516_800_341_4,
        0.028_904_598_105_6,
    ],
    &[
        0.667_772_357_639,
        0.320_277_748_192,
        0.254_702_713_774,
        0.218_396_229_49,
        0.185_923_413_154,
        0.150_596_966_098,
        0.111_149_947_204,
        0.068_193_431_183_5,
        0.022_987_193_265_4,
    ],
    &[
        0.630_503_590_971,
        0.300_222_962_657,
        0.238_395_156_977,
        0.206_633_628_401,
        0.180_823_993_865,
        0.153_945_341_245,
        0.124_042_389_334,
        0.091_060_638_528,
        0.055_650_602_723_6,
        0.018_721_695_297_2,
    ],
];

pub fn bessel_g(n: usize) -> Result<Vec<f64>> {
    if !(2..=10).contains(&n) {
        return Err(Error::invalid("n_rings", format!("Bessel prototypes are tabulated for N = 2..10, got {n}")));
    }
    Ok(BESSEL_G[n - 2].to_vec())
}

/// Tight-binding rates (gamma_in, J_1..J_{N-1}, gamma_out) of a prototype
/// for unit bandwidth.
fn prototype_rates(g: &[f64]) -> (f64, Vec<f64>, f64) {
    let n = g.len();
    let gamma_in = 0.5 / g[0];
    let hops = (0..n - 1).map(|k| 0.5 / (g[k] * g[k + 1]).sqrt()).collect();
    let gamma_out = 0.5 / g[n - 1];
    (gamma_in, hops, gamma_out)
}

/// |t(w)|^2 of a lossless tight-binding chain.
fn chain_power(gamma_in: f64, hops: &[f64], gamma_out: f64, w: f64) -> f64 {
    let n = hops.len() + 1;
    let mut diag = vec![C64::new(0.0, -w); n];
    diag[0] += gamma_in;
    diag[n - 1] += gamma_out;
    let off: Vec<C64> = hops.iter().map(|&j| C64::new(0.0, -j)).collect();
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    rhs[0] = C64::new(1.0, 0.0);
    let x = solve_tridiagonal(&off, &diag, &off, &rhs).expect("damped chain is non-singular");
    4.0 * gamma_in * gamma_out * x[n - 1].norm_sqr()
}

/// Half-power angular half-width of the unit-bandwidth chain.
fn half_power_half_width(gamma_in: f64, hops: &[f64], gamma_out: f64) -> f64 {
    let p0 = chain_power(gamma_in, hops, gamma_out, 0.0);
    let mut hi = 0.5;
    while chain_power(gamma_in, hops, gamma_out, hi) > 0.5 * p0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if chain_power(gamma_in, hops, gamma_out, m) > 0.5 * p0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

fn check_coupling(name: &'static str, k: f64) -> Result<f64> {
    if k > 1.0 {
        Err(Error::invalid(name, format!("synthesized coupling {k} exceeds 1; reduce the bandwidth")))
    } else {
        Ok(k)
    }
}

/// Couplings realizing prototype `g` with a 3-dB bandwidth of
/// `fraction` x FSR.
pub fn from_prototype(g: &[f64], fraction: f64) -> Result<CouplingProfile> {
    if !(fraction > 0.0 && fraction.is_finite()) {
        return Err(Error::invalid("bandwidth_fraction", format!("must be > 0, got {fraction}")));
    }
    let (gi, hops, go) = prototype_rates(g);
    let w3 = half_power_half_width(gi, &hops, go);
    // rates times T_c
    let scale = 2.0 * PI * fraction / (2.0 * w3);
    let inter = hops
        .iter()
        .map(|j| check_coupling("inter_ring", j * scale))
        .collect::<Result<Vec<_>>>()?;
    let kin = check_coupling("boundary_in", (2.0 * gi * scale).sqrt())?;
    let kout = check_coupling("boundary_out", (2.0 * go * scale).sqrt())?;
    CouplingProfile::new(inter, kin, kout)
}

/// Couplings realizing prototype `g` scaled so that its strongest inter-ring
/// coupling equals `kappa`, or less if a boundary coupling would otherwise
/// exceed 1.
pub fn from_prototype_matched(g: &[f64], kappa: f64) -> Result<CouplingProfile> {
    let (gi, hops, go) = prototype_rates(g);
    let j_max = hops.iter().cloned().fold(0.0, f64::max);
    let scale = (kappa / j_max).min(1.0 / (2.0 * gi.max(go)));
    let inter = hops.iter().map(|j| (j * scale).min(1.0)).collect();
    let kin = (2.0 * gi * scale).sqrt().min(1.0);
    let kout = (2.0 * go * scale).sqrt().min(1.0);
    CouplingProfile::new(inter, kin, kout)
}

/// Fraction of the FSR covered by a uniform chain's band.
pub fn band_fraction(kappa: f64) -> f64 {
    2.0 / PI * kappa.asin()
}

/// Matched boundary coupling of an apodized chain, sqrt(2|kappa|) capped at 1.
pub fn matched_boundary(kappa: f64) -> f64 {
    (2.0 * kappa).sqrt().min(1.0)
}

fn random_couplings(n_rings: usize, seed: u64, stream: u64) -> Result<CouplingProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    // uniform on (0, 1]
    let mut draw = || 1.0 - rng.random::<f64>();
    let boundary_in = draw();
    let inter: Vec<f64> = (0..n_rings - 1).map(|_| draw()).collect();
    let boundary_out = draw();
    CouplingProfile::new(inter, boundary_in, boundary_out)
}

pub fn generate(req: &ProfileRequest) -> Result<CouplingProfile> {
    let n = req.n_rings;
    if n == 0 {
        return Err(Error::invalid("n_rings", "must be >= 1"));
    }
    let need_kappa = matches!(req.kind, ProfileKind::Uniform | ProfileKind::Apodized)
        || (matches!(req.kind, ProfileKind::Butterworth | ProfileKind::Bessel) && req.bandwidth_fraction.is_none());
    if need_kappa && !(req.kappa > 0.0 && req.kappa <= 1.0) {
        return Err(Error::invalid("kappa", format!("must lie in (0, 1], got {}", req.kappa)));
    }
    match req.kind {
        ProfileKind::Uniform => CouplingProfile::new(vec![req.kappa; n - 1], req.kappa, req.kappa),
        ProfileKind::Apodized => {
            let ke = matched_boundary(req.kappa);
            CouplingProfile::new(vec![req.kappa; n - 1], ke, ke)
        }
        ProfileKind::Butterworth | ProfileKind::Bessel => {
            if n < 2 {
                return Err(Error::TooFewRings { kind: req.kind.name(), min: 2, got: n });
            }
            let g = if req.kind == ProfileKind::Butterworth { butterworth_g(n) } else { bessel_g(n)? };
            match req.bandwidth_fraction {
                Some(f) => from_prototype(&g, f),
                None => from_prototype_matched(&g, req.kappa),
            }
        }
        ProfileKind::Random => random_couplings(n, req.seed, req.stream),
        ProfileKind::Explicit => {
            let e = req
                .explicit
                .as_ref()
                .ok_or_else(|| Error::invalid("explicit", "explicit profile needs coupling values"))?;
            if e.inter_ring.len() + 1 != n {
                return Err(Error::invalid("inter_ring", format!("expected {} values for {n} rings", n - 1)));
            }
            CouplingProfile::new(e.inter_ring.clone(), e.boundary_in, e.boundary_out)
        }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSample {
    pub index: usize,
    pub profile: CouplingProfile,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub samples: Vec<McSample>,
    pub failures: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub min_profile: CouplingProfile,
    pub max_profile: CouplingProfile,
}

/// Random profiles through `pipeline` (profile -> K). Sample i draws from
/// substream i, so the result does not depend on scheduling.
pub fn mc_ensemble(
    n_samples: usize,
    n_rings: usize,
    seed: u64,
    pipeline: &(dyn Fn(&CouplingProfile) -> Result<f64> + Sync),
) -> Result<McSummary> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be >= 1"));
    }
    let samples: Vec<McSample> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let profile = generate(&ProfileRequest::random(n_rings, seed, i as u64))?;
            let k = pipeline(&profile).ok();
            Ok(McSample { index: i, profile, k })
        })
        .collect::<Result<_>>()?;
    let ok: Vec<&McSample> = samples.iter().filter(|s| s.k.is_some()).collect();
    let failures = samples.len() - ok.len();
    if ok.is_empty() {
        return Err(Error::invalid("mc", format!("all {failures} samples failed")));
    }
    let mut ks: Vec<f64> = ok.iter().map(|s| s.k.unwrap()).collect();
    ks.sort_by(f64::total_cmp);
    // first sample attaining each extreme
    let arg = |better: fn(f64, f64) -> bool| {
        ok.iter()
            .fold(None::<&McSample>, |best, s| match best {
                Some(b) if !better(s.k.unwrap(), b.k.unwrap()) => Some(b),
                _ => Some(s),
            })
            .unwrap()
            .profile
            .clone()
    };
    Ok(McSummary {
        min: ks[0],
        q1: quantile(&ks, 0.25),
        median: quantile(&ks, 0.5),
        q3: quantile(&ks, 0.75),
        max: ks[ks.len() - 1],
        min_profile: arg(|a, b| a < b),
        max_profile: arg(|a, b| a > b),
        samples,
        failures,
    })
}
