//! Frequency-domain coupled-mode theory of a ring chain.
//!
//! The signal amplitudes `a_s` and the conjugated idler amplitudes `a_i^+`
//! of all N rings obey
//!
//! ```text
//! [ M_s   C  ] [ a_s   ]          [ a_s,in   e_1 ]
//! [ C^+  M_i ] [ a_i^+ ]  = -i mu [ a_i,in^+ e_1 ]
//! ```
//!
//! with tridiagonal `M_s` (diagonal `-i(w_s - W_s,m) + 1/tau_l`, plus the
//! external rates on the end rings, off-diagonal `-i kappa_m`), `M_i` its
//! conjugate structure evaluated at the idler frequency, and diagonal
//! `C = -i chi_m`. `T` is the inverse of the 2N x 2N matrix; the pair
//! amplitude is `T_{N,N+1}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{solve_block_tridiagonal, solve_tridiagonal, Block2};
use crate::model::{DeviceSpec, RateSet};
use crate::quad::{self, Tolerance};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    /// Reference dense LU of the 2N x 2N matrix.
    Dense,
    /// Exact block-tridiagonal elimination, O(N).
    #[default]
    Full,
    /// First order in C: two tridiagonal solves.
    Fast,
}

impl SolverMode {
    pub fn name(&self) -> &'static str {
        match self {
            SolverMode::Dense => "dense",
            SolverMode::Full => "full",
            SolverMode::Fast => "fast",
        }
    }
}

impl std::str::FromStr for SolverMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dense" => Ok(SolverMode::Dense),
            "full" => Ok(SolverMode::Full),
            "fast" => Ok(SolverMode::Fast),
            other => Err(format!("unknown solver `{other}` (expected full, fast or dense)")),
        }
    }
}

/// One polarization of the chain: its rates and per-ring resonances.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeChain {
    pub rates: RateSet,
    pub resonances: Vec<f64>,
}

impl ModeChain {
    pub fn new(rates: RateSet, resonances: Vec<f64>) -> Self {
        assert_eq!(rates.n_rings(), resonances.len(), "one resonance per ring");
        Self { rates, resonances }
    }

    pub fn n_rings(&self) -> usize {
        self.resonances.len()
    }

    /// `(sub, diag, sup)` of M_s(w), or of M_i(w) when `conjugate`.
    fn tridiagonal(&self, omega: f64, conjugate: bool) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
        let n = self.n_rings();
        let r = &self.rates;
        let sign = if conjugate { 1.0 } else { -1.0 };
        let mut diag: Vec<C64> = self
            .resonances
            .iter()
            .map(|&res| C64::new(r.loss_rate, sign * (omega - res)))
            .collect();
        diag[0] += r.external_in;
        diag[n - 1] += r.external_out;
        let off: Vec<C64> = r.inter_ring.iter().map(|&k| C64::new(0.0, sign * k)).collect();
        (off.clone(), diag, off)
    }

    fn solve(&self, omega: f64, conjugate: bool, rhs: &[C64]) -> Result<Vec<C64>> {
        let (sub, diag, sup) = self.tridiagonal(omega, conjugate);
        solve_tridiagonal(&sub, &diag, &sup, rhs).ok_or(Error::Singular { omega })
    }

    fn unit(&self, idx: usize) -> Vec<C64> {
        let mut e = vec![ZERO; self.n_rings()];
        e[idx] = ONE;
        e
    }

    /// Column 1 of M^{-1}.
    pub fn green_from_input(&self, omega: f64, conjugate: bool) -> Result<Vec<C64>> {
        self.solve(omega, conjugate, &self.unit(0))
    }

    /// Row N of M^{-1} (M is symmetric, so this is column N).
    pub fn green_to_output(&self, omega: f64, conjugate: bool) -> Result<Vec<C64>> {
        self.solve(omega, conjugate, &self.unit(self.n_rings() - 1))
    }

    /// Amplitude transmission t = -mu_1 mu_2 [M_s^{-1}]_{N,1}.
    pub fn transmission(&self, omega: f64) -> Result<C64> {
        let g = self.green_from_input(omega, false)?;
        Ok(-self.rates.mu_in * self.rates.mu_out * g[self.n_rings() - 1])
    }

    /// Reflection into the input waveguide, r = 1 - mu_1^2 [M_s^{-1}]_{1,1}
    /// (input-output relation a_r = a_in - i mu_1 a_1).
    pub fn reflection(&self, omega: f64) -> Result<C64> {
        let g = self.green_from_input(omega, false)?;
        Ok(ONE - self.rates.mu_in * self.rates.mu_in * g[0])
    }

    /// Group delay d(arg t)/dw, s.
    pub fn group_delay(&self, omega: f64) -> Result<f64> {
        let x = self.green_from_input(omega, false)?;
        let y = self.green_to_output(omega, false)?;
        let n = self.n_rings();
        // dM/dw = -i  =>  d(M^-1)/dw = i M^-1 M^-1
        let dg: C64 = y.iter().zip(&x).map(|(a, b)| a * b).sum::<C64>() * I;
        Ok((dg / x[n - 1]).im)
    }

    pub fn center(&self) -> f64 {
        self.resonances.iter().sum::<f64>() / self.n_rings() as f64
    }
}

/// Pump field in each ring and the resulting nonlinear rates.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpState {
    /// sqrt(J); |a|^2 is the stored energy.
    pub amplitudes: Vec<C64>,
    /// chi_m = (gamma0 v_g / T_c) a_m^2, rad/s.
    pub chi: Vec<C64>,
}

impl PumpState {
    pub fn energies(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Linear steady state of the pump chain driven by `power` watts at
/// `omega_p`. The nonlinear rate carries the pump phase (square of the
/// complex amplitude), which is what phase-matches the generated pairs
/// along the chain.
pub fn pump_steady_state(pump: &ModeChain, nonlinear_rate: f64, omega_p: f64, power: f64) -> Result<PumpState> {
    if !(power >= 0.0) {
        return Err(Error::invalid("pump_power", format!("must be >= 0, got {power}")));
    }
    let mut rhs = vec![ZERO; pump.n_rings()];
    rhs[0] = -I * pump.rates.mu_in * power.sqrt();
    let amplitudes = pump.solve(omega_p, false, &rhs)?;
    let chi = amplitudes.iter().map(|a| nonlinear_rate * a * a).collect();
    Ok(PumpState { amplitudes, chi })
}

/// gamma0 v_g / T_c: converts stored pump energy into a nonlinear rate.
pub fn nonlinear_rate(device: &DeviceSpec) -> f64 {
    device.waveguide.gamma0 * device.waveguide.group_velocity() / device.geometry.round_trip_time
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TElements {
    pub t_n_1: C64,
    pub t_n_np1: C64,
    pub t_2n_1: C64,
    pub t_2n_np1: C64,
}

/// Signal and idler chains coupled by the pump-induced rates `chi`.
#[derive(Debug, Clone, PartialEq)]
pub struct CmtSystem {
    pub signal: ModeChain,
    pub idler: ModeChain,
    pub chi: Vec<C64>,
}

impl CmtSystem {
    pub fn new(signal: ModeChain, idler: ModeChain, chi: Vec<C64>) -> Self {
        assert_eq!(signal.n_rings(), idler.n_rings());
        assert_eq!(signal.n_rings(), chi.len());
        Self { signal, idler, chi }
    }

    /// Signal, idler and pump chains of a device with identical rates.
    pub fn chains(device: &DeviceSpec) -> (ModeChain, ModeChain, ModeChain) {
        let rates = device.rates();
        let off = device.profile.offsets();
        (
            ModeChain::new(rates.clone(), off.signal.clone()),
            ModeChain::new(rates.clone(), off.idler.clone()),
            ModeChain::new(rates, off.pump.clone()),
        )
    }

    /// The device with no pump (C = 0).
    pub fn linear(device: &DeviceSpec) -> Self {
        let (s, i, _) = Self::chains(device);
        let n = s.n_rings();
        Self::new(s, i, vec![ZERO; n])
    }

    /// The device pumped in continuous wave at `omega_p` with `power` watts.
    pub fn pumped(device: &DeviceSpec, omega_p: f64, power: f64) -> Result<(Self, PumpState)> {
        let (s, i, p) = Self::chains(device);
        let state = pump_steady_state(&p, nonlinear_rate(device), omega_p, power)?;
        Ok((Self::new(s, i, state.chi.clone()), state))
    }

    pub fn n_rings(&self) -> usize {
        self.chi.len()
    }

    pub fn with_chi(&self, chi: Vec<C64>) -> Self {
        Self::new(self.signal.clone(), self.idler.clone(), chi)
    }

    /// mu_out of the signal port times mu_in of the idler port.
    pub fn pair_prefactor(&self) -> f64 {
        self.signal.rates.mu_out * self.idler.rates.mu_in
    }

    pub fn t_elements(&self, ws: f64, wi: f64, mode: SolverMode) -> Result<TElements> {
        match mode {
            SolverMode::Fast => self.t_fast(ws, wi),
            SolverMode::Full => self.t_block(ws, wi),
            SolverMode::Dense => self.t_dense(ws, wi),
        }
    }

    fn t_fast(&self, ws: f64, wi: f64) -> Result<TElements> {
        let n = self.n_rings();
        let xs = self.signal.green_from_input(ws, false)?;
        let xi = self.idler.green_from_input(wi, true)?;
        let ys = self.signal.green_to_output(ws, false)?;
        let yi = self.idler.green_to_output(wi, true)?;
        let mut t_n_np1 = ZERO;
        let mut t_2n_1 = ZERO;
        for m in 0..n {
            let c = -I * self.chi[m];
            t_n_np1 -= ys[m] * c * xi[m];
            t_2n_1 -= yi[m] * c.conj() * xs[m];
        }
        Ok(TElements { t_n_1: xs[n - 1], t_n_np1, t_2n_1, t_2n_np1: xi[n - 1] })
    }

    fn blocks(&self, ws: f64, wi: f64) -> (Vec<Block2>, Vec<Block2>, Vec<Block2>) {
        let (s_sub, s_diag, s_sup) = self.signal.tridiagonal(ws, false);
        let (i_sub, i_diag, i_sup) = self.idler.tridiagonal(wi, true);
        let diag = (0..self.n_rings())
            .map(|m| {
                let c = -I * self.chi[m];
                Block2 { a: s_diag[m], b: c, c: c.conj(), d: i_diag[m] }
            })
            .collect();
        let lower = s_sub.iter().zip(&i_sub).map(|(&a, &d)| Block2::diag(a, d)).collect();
        let upper = s_sup.iter().zip(&i_sup).map(|(&a, &d)| Block2::diag(a, d)).collect();
        (lower, diag, upper)
    }

    fn t_block(&self, ws: f64, wi: f64) -> Result<TElements> {
        let n = self.n_rings();
        let (lower, diag, upper) = self.blocks(ws, wi);
        let mut rhs = vec![[ZERO, ZERO]; n];
        rhs[0] = [ONE, ZERO];
        let col1 = solve_block_tridiagonal(&lower, &diag, &upper, &rhs).ok_or(Error::Singular { omega: ws })?;
        rhs[0] = [ZERO, ONE];
        let coln = solve_block_tridiagonal(&lower, &diag, &upper, &rhs).ok_or(Error::Singular { omega: ws })?;
        Ok(TElements {
            t_n_1: col1[n - 1][0],
            t_2n_1: col1[n - 1][1],
            t_n_np1: coln[n - 1][0],
            t_2n_np1: coln[n - 1][1],
        })
    }

    /// The 2N x 2N matrix in the natural ordering (all signal rings, then
    /// all idler rings).
    pub fn dense_matrix(&self, ws: f64, wi: f64) -> DMatrix<C64> {
        let n = self.n_rings();
        let (s_sub, s_diag, s_sup) = self.signal.tridiagonal(ws, false);
        let (i_sub, i_diag, i_sup) = self.idler.tridiagonal(wi, true);
        let mut m = DMatrix::<C64>::zeros(2 * n, 2 * n);
        for k in 0..n {
            m[(k, k)] = s_diag[k];
            m[(n + k, n + k)] = i_diag[k];
            let c = -I * self.chi[k];
            m[(k, n + k)] = c;
            m[(n + k, k)] = c.conj();
            if k + 1 < n {
                m[(k + 1, k)] = s_sub[k];
                m[(k, k + 1)] = s_sup[k];
                m[(n + k + 1, n + k)] = i_sub[k];
                m[(n + k, n + k + 1)] = i_sup[k];
            }
        }
        m
    }

    fn t_dense(&self, ws: f64, wi: f64) -> Result<TElements> {
        let n = self.n_rings();
        let lu = self.dense_matrix(ws, wi).lu();
        let mut e = DVector::<C64>::zeros(2 * n);
        e[0] = ONE;
        let c1 = lu.solve(&e).ok_or(Error::Singular { omega: ws })?;
        e[0] = ZERO;
        e[n] = ONE;
        let cn = lu.solve(&e).ok_or(Error::Singular { omega: ws })?;
        Ok(TElements { t_n_1: c1[n - 1], t_2n_1: c1[2 * n - 1], t_n_np1: cn[n - 1], t_2n_np1: cn[2 * n - 1] })
    }

    /// Joint spectral intensity mu_1^2 mu_2^2 |T_{N,N+1}|^2 at one point.
    pub fn jsi(&self, ws: f64, wi: f64, mode: SolverMode) -> Result<f64> {
        let t = self.t_elements(ws, wi, mode)?;
        Ok(self.pair_prefactor().powi(2) * t.t_n_np1.norm_sqr())
    }

    /// Continuous-wave signal flux (pairs/s) collected over the signal window
    /// `[lo, hi]` (rad/s), with the idler at 2 w_p - w_s.
    pub fn cw_flux(&self, omega_p: f64, lo: f64, hi: f64, mode: SolverMode, tol: Tolerance) -> Result<f64> {
        let mut err = None;
        let mut f = |ws: f64| match self.jsi(ws, 2.0 * omega_p - ws, mode) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        };
        // break the window at the chain's mode spacing so narrow peaks are seen
        let pieces = (4 * self.n_rings()).max(8);
        let pts: Vec<f64> = (0..=pieces).map(|k| lo + (hi - lo) * k as f64 / pieces as f64).collect();
        let est = quad::integrate_breakpoints(&mut f, &pts, tol)?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(est.value / (2.0 * PI))
    }
}

/// Uniform axis of `points` samples over `[center - half_span, center + half_span]`.
pub fn uniform_axis(center: f64, half_span: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![center];
    }
    (0..points)
        .map(|k| center - half_span + 2.0 * half_span * k as f64 / (points - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub signal_axis: Vec<f64>,
    pub idler_axis: Vec<f64>,
}

impl GridSpec {
    /// Square grid covering `span_factor` times the band full width of the
    /// signal chain, centered on the signal and idler resonances.
    pub fn around_band(sys: &CmtSystem, points: usize, span_factor: f64) -> Self {
        let half = 0.5 * span_factor * sys.signal.rates.band_full_width();
        Self {
            signal_axis: uniform_axis(sys.signal.center(), half, points),
            idler_axis: uniform_axis(sys.idler.center(), half, points),
        }
    }

    pub fn step(&self) -> f64 {
        let a = &self.signal_axis;
        if a.len() < 2 {
            return 0.0;
        }
        (a[a.len() - 1] - a[0]) / (a.len() - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize)]
pub struct JsaMetadata {
    pub device_hash: String,
    pub pump: String,
    pub solver: String,
    pub warnings: Vec<String>,
}

/// Complex joint spectral amplitude sampled on a signal x idler grid,
/// row-major (row = signal frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct JsaMatrix {
    pub signal_axis: Vec<f64>,
    pub idler_axis: Vec<f64>,
    pub values: Vec<C64>,
    pub metadata: JsaMetadata,
}

impl JsaMatrix {
    pub fn new(signal_axis: Vec<f64>, idler_axis: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if values.len() != signal_axis.len() * idler_axis.len() {
            return Err(Error::invalid("values", "dimensions do not match the axes"));
        }
        for axis in [&signal_axis, &idler_axis] {
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::invalid("axis", "must be strictly increasing"));
            }
        }
        Ok(Self { signal_axis, idler_axis, values, metadata: JsaMetadata::default() })
    }

    pub fn rows(&self) -> usize {
        self.signal_axis.len()
    }

    pub fn cols(&self) -> usize {
        self.idler_axis.len()
    }

    pub fn at(&self, j: usize, k: usize) -> C64 {
        self.values[j * self.cols() + k]
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows(), self.cols(), &self.values)
    }

    /// Sum of the JSI along the energy-conservation line w_s + w_i = 2 w_p,
    /// times the signal step, over 2 pi: the cw flux seen by the grid. The
    /// idler value is linearly interpolated between grid columns.
    pub fn cw_flux_along_line(&self, omega_p: f64) -> f64 {
        let jsi = self.intensity();
        let ai = &self.idler_axis;
        let n = self.rows();
        if n < 2 {
            return 0.0;
        }
        let step = (self.signal_axis[n - 1] - self.signal_axis[0]) / (n - 1) as f64;
        let samples: Vec<f64> = self
            .signal_axis
            .iter()
            .enumerate()
            .map(|(j, &ws)| {
                let wi = 2.0 * omega_p - ws;
                if wi < ai[0] || wi > ai[ai.len() - 1] {
                    return 0.0;
                }
                let k = ai.partition_point(|&x| x <= wi).clamp(1, ai.len() - 1);
                let t = (wi - ai[k - 1]) / (ai[k] - ai[k - 1]);
                let row = &jsi[j * self.cols()..(j + 1) * self.cols()];
                row[k - 1] * (1.0 - t) + row[k] * t
            })
            .collect();
        // trapezoid
        let inner: f64 = samples[1..n - 1].iter().sum();
        (inner + 0.5 * (samples[0] + samples[n - 1])) * step / (2.0 * PI)
    }
}

/// A[j, k] = mu_1 mu_2 T_{N,N+1}(w_s[j], w_i[k]) E_p(nu), where E_p is a
/// real pump envelope of the sum-frequency offset nu = (w_s + w_i - 2 w_p)/2pi
/// in Hz. Rows are evaluated in parallel; the result does not depend on the
/// thread count.
pub fn jsa_grid(
    sys: &CmtSystem,
    grid: &GridSpec,
    omega_p: f64,
    envelope: &(dyn Fn(f64) -> f64 + Sync),
    mode: SolverMode,
) -> Result<JsaMatrix> {
    let ns = grid.signal_axis.len();
    let ni = grid.idler_axis.len();
    let pref = sys.pair_prefactor();
    let rows: Vec<Result<Vec<C64>>> = match mode {
        SolverMode::Fast => {
            let n = sys.n_rings();
            let xi: Vec<Vec<C64>> = grid
                .idler_axis
                .par_iter()
                .map(|&wi| sys.idler.green_from_input(wi, true))
                .collect::<Result<_>>()?;
            grid.signal_axis
                .par_iter()
                .map(|&ws| {
                    let ys = sys.signal.green_to_output(ws, false)?;
                    let weighted: Vec<C64> = (0..n).map(|m| ys[m] * (-I * sys.chi[m])).collect();
                    Ok(grid
                        .idler_axis
                        .iter()
                        .zip(&xi)
                        .map(|(&wi, x)| {
                            let t: C64 = -weighted.iter().zip(x).map(|(a, b)| a * b).sum::<C64>();
                            t * pref * envelope((ws + wi - 2.0 * omega_p) / (2.0 * PI))
                        })
                        .collect())
                })
                .collect()
        }
        _ => grid
            .signal_axis
            .par_iter()
            .map(|&ws| {
                grid.idler_axis
                    .iter()
                    .map(|&wi| {
                        let t = sys.t_elements(ws, wi, mode)?.t_n_np1;
                        Ok(t * pref * envelope((ws + wi - 2.0 * omega_p) / (2.0 * PI)))
                    })
                    .collect()
            })
            .collect(),
    };
    let mut values = Vec::with_capacity(ns * ni);
    for r in rows {
        values.extend(r?);
    }
    let mut jsa = JsaMatrix::new(grid.signal_axis.clone(), grid.idler_axis.clone(), values)?;
    jsa.metadata.solver = mode.name().to_string();
    let narrowest = eigenmode_linewidths(&sys.signal)?
        .iter()
        .map(|l| l.fwhm)
        .fold(f64::INFINITY, f64::min);
    let step = grid.step();
    if step > 0.0 && narrowest.is_finite() && narrowest / step < 8.0 {
        jsa.metadata.warnings.push(format!(
            "grid too coarse: {:.2} points per narrowest eigenmode linewidth (< 8)",
            narrowest / step
        ));
    }
    Ok(jsa)
}

/// Complex transmission and power transmission at each frequency.
pub fn transmission(chain: &ModeChain, omegas: &[f64]) -> Result<Vec<(C64, f64)>> {
    omegas
        .iter()
        .map(|&w| chain.transmission(w).map(|t| (t, t.norm_sqr())))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EigenmodeLine {
    /// rad/s
    pub center: f64,
    /// Full width at half maximum, rad/s.
    pub fwhm: f64,
    /// False when the neighbouring dips do not fall below half of the peak;
    /// `fwhm` is then the equivalent Lorentzian width 2 / group delay.
    pub resolved: bool,
    pub peak: f64,
}

impl EigenmodeLine {
    pub fn fwhm_hz(&self) -> f64 {
        self.fwhm / (2.0 * PI)
    }
}

fn refine_peak(chain: &ModeChain, mut a: f64, mut b: f64) -> Result<f64> {
    // golden-section maximization of |t|^2
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let p = |w: f64| chain.transmission(w).map(|t| t.norm_sqr());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (p(c)?, p(d)?);
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = p(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = p(d)?;
        }
        if (b - a).abs() <= 1e-13 * (a.abs() + b.abs()).max(1.0) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

fn bisect_half(chain: &ModeChain, inside: f64, outside: f64, half: f64) -> Result<f64> {
    let (mut a, mut b) = (inside, outside);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if chain.transmission(m)?.norm_sqr() >= half {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bloch-mode peaks of the linear transmission and their widths.
pub fn eigenmode_linewidths(chain: &ModeChain) -> Result<Vec<EigenmodeLine>> {
    let n = chain.n_rings();
    let band = chain.rates.band_full_width();
    let center = chain.center();
    let lo = center - 0.75 * band - chain.resonances.iter().map(|r| (r - center).abs()).fold(0.0, f64::max);
    let hi = 2.0 * center - lo;
    let samples = (400 * n).max(4000);
    let ws = uniform_axis(center, 0.5 * (hi - lo), samples);
    let power: Vec<f64> = ws
        .iter()
        .map(|&w| chain.transmission(w).map(|t| t.norm_sqr()))
        .collect::<Result<_>>()?;
    let max = power.iter().cloned().fold(0.0, f64::max);
    let mut lines = Vec::new();
    for k in 1..samples - 1 {
        if !(power[k] > power[k - 1] && power[k] >= power[k + 1]) || power[k] < 1e-6 * max {
            continue;
        }
        let w0 = refine_peak(chain, ws[k - 1], ws[k + 1])?;
        let peak = chain.transmission(w0)?.norm_sqr().max(power[k]);
        let half = 0.5 * peak;
        // walk outwards until below half (resolved) or until a dip turns back up
        let walk = |dir: isize| -> Option<usize> {
            let mut j = k as isize;
            loop {
                let next = j + dir;
                if next < 0 || next as usize >= samples {
                    return None;
                }
                if power[next as usize] < half {
                    return Some(next as usize);
                }
                if power[next as usize] > power[j as usize] && j != k as isize {
                    return None;
                }
                j = next;
            }
        };
        let line = match (walk(-1), walk(1)) {
            (Some(l), Some(r)) => {
                let left = bisect_half(chain, w0, ws[l], half)?;
                let right = bisect_half(chain, w0, ws[r], half)?;
                EigenmodeLine { center: w0, fwhm: right - left, resolved: true, peak }
            }
            _ => {
                let tau = chain.group_delay(w0)?;
                EigenmodeLine { center: w0, fwhm: 2.0 / tau, resolved: false, peak }
            }
        };
        lines.push(line);
    }
    lines.truncate(n.max(lines.len().min(n)));
    Ok(lines)
}

/// The line closest to `omega`.
pub fn nearest_line(lines: &[EigenmodeLine], omega: f64) -> Option<EigenmodeLine> {
    lines
        .iter()
        .min_by(|a, b| (a.center - omega).abs().total_cmp(&(b.center - omega).abs()))
        .copied()
}
