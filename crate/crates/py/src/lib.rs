//! Python bindings: devices, spectra and the design-rule sweep.

use crowpair::cli::config::RunConfig;
use crowpair::cmt::{self, CmtSystem, JsaMatrix, SolverMode};
use crowpair::error::Error;
use crowpair::model::{CouplingProfile, DeviceSpec, WaveguideParams};
use crowpair::pair_flux::{self, DesignPoint, FluxReport, SweepSpec};
use crowpair::quad::Tolerance;
use crowpair::single_ring::SingleRingModel;
use crowpair::spectral::{self, GridOptions, PumpSpec, RectFilter, SchmidtResult};
use crowpair::synth::{self, ProfileKind, ProfileRequest};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(crowpair, CrowpairError, PyException);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::InvalidParameter { .. } | Error::TooFewRings { .. } | Error::Config(_) => {
            PyValueError::new_err(err.to_string())
        }
        Error::Io { .. } => PyOSError::new_err(err.to_string()),
        other => CrowpairError::new_err(other.to_string()),
    }
}

fn solver(name: &str) -> PyResult<SolverMode> {
    name.parse().map_err(PyValueError::new_err)
}

fn profile_kind(name: &str) -> PyResult<ProfileKind> {
    Ok(match name {
        "uniform" => ProfileKind::Uniform,
        "apodized" => ProfileKind::Apodized,
        "butterworth" => ProfileKind::Butterworth,
        "bessel" => ProfileKind::Bessel,
        "random" => ProfileKind::Random,
        _ => return Err(PyValueError::new_err(format!("unknown profile kind `{name}`"))),
    })
}

/// Silicon-wire waveguide constants in SI units.
#[pyclass(name = "Waveguide", module = "crowpair", from_py_object)]
#[derive(Clone)]
struct PyWaveguide {
    inner: WaveguideParams,
}

#[pymethods]
impl PyWaveguide {
    /// Defaults: n_g 4.1, 1 dB/cm, 200 /W/m, 0.75 cm/GW, 0.1 um^2, 1550 nm.
    #[new]
    #[pyo3(signature = (group_index=None, loss_db_per_cm=None, gamma0=None, tpa_cm_per_gw=None, effective_area=None, wavelength=None))]
    fn new(
        group_index: Option<f64>,
        loss_db_per_cm: Option<f64>,
        gamma0: Option<f64>,
        tpa_cm_per_gw: Option<f64>,
        effective_area: Option<f64>,
        wavelength: Option<f64>,
    ) -> PyResult<Self> {
        let d = WaveguideParams::silicon_wire();
        let inner = WaveguideParams::new(
            group_index.unwrap_or(d.group_index),
            loss_db_per_cm.map(crowpair::model::db_per_cm_to_per_m).unwrap_or(d.linear_loss),
            gamma0.unwrap_or(d.gamma0),
            tpa_cm_per_gw.map(crowpair::model::cm_per_gw_to_m_per_w).unwrap_or(d.tpa_beta0),
            effective_area.unwrap_or(d.effective_area),
            wavelength.unwrap_or(d.wavelength),
        )
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn group_index(&self) -> f64 {
        self.inner.group_index
    }

    /// 1/m
    #[getter]
    fn linear_loss(&self) -> f64 {
        self.inner.linear_loss
    }

    #[getter]
    fn gamma0(&self) -> f64 {
        self.inner.gamma0
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

fn waveguide_or_default(wg: Option<PyWaveguide>) -> WaveguideParams {
    wg.map(|w| w.inner).unwrap_or_else(WaveguideParams::silicon_wire)
}

/// A coupled chain of identical rings.
#[pyclass(name = "Device", module = "crowpair", from_py_object)]
#[derive(Clone)]
struct PyDevice {
    inner: DeviceSpec,
}

#[pymethods]
impl PyDevice {
    /// Explicit field couplings: inter-ring list plus the two bus couplers.
    #[new]
    #[pyo3(signature = (inter_ring, boundary_in, boundary_out, radius=5e-6, waveguide=None))]
    fn new(
        inter_ring: Vec<f64>,
        boundary_in: f64,
        boundary_out: f64,
        radius: f64,
        waveguide: Option<PyWaveguide>,
    ) -> PyResult<Self> {
        let profile = CouplingProfile::new(inter_ring, boundary_in, boundary_out).map_err(to_py)?;
        let inner = DeviceSpec::new(waveguide_or_default(waveguide), radius, profile).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Synthesized profile: uniform, apodized, butterworth, bessel or random.
    #[staticmethod]
    #[pyo3(signature = (kind, n_rings, kappa=0.3, bandwidth_fraction=None, seed=0, radius=5e-6, waveguide=None))]
    fn from_profile(
        kind: &str,
        n_rings: usize,
        kappa: f64,
        bandwidth_fraction: Option<f64>,
        seed: u64,
        radius: f64,
        waveguide: Option<PyWaveguide>,
    ) -> PyResult<Self> {
        let req = ProfileRequest { bandwidth_fraction, seed, ..ProfileRequest::new(profile_kind(kind)?, n_rings, kappa) };
        let profile = synth::generate(&req).map_err(to_py)?;
        let inner = DeviceSpec::new(waveguide_or_default(waveguide), radius, profile).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Device described by a TOML run configuration.
    #[staticmethod]
    #[pyo3(signature = (toml_text, seed=0))]
    fn from_config(toml_text: &str, seed: u64) -> PyResult<Self> {
        let cfg = RunConfig::parse(toml_text).map_err(to_py)?;
        Ok(Self { inner: cfg.device(seed).map_err(to_py)? })
    }

    #[getter]
    fn n_rings(&self) -> usize {
        self.inner.n_rings()
    }

    /// [boundary_in, inter_ring..., boundary_out]
    #[getter]
    fn couplings(&self) -> Vec<f64> {
        self.inner.profile.all_couplings()
    }

    #[getter]
    fn hash(&self) -> String {
        spectral::device_hash(&self.inner)
    }

    /// Free spectral range, Hz.
    #[getter]
    fn fsr(&self) -> f64 {
        self.inner.geometry.fsr
    }

    /// Complex through-port transmission of the signal chain at detunings
    /// `omegas` (rad/s).
    fn transmission(&self, omegas: Vec<f64>) -> PyResult<Vec<Complex64>> {
        let chain = CmtSystem::linear(&self.inner).signal;
        let t = cmt::transmission(&chain, &omegas).map_err(to_py)?;
        Ok(t.into_iter().map(|(t, _)| t).collect())
    }

    /// (center rad/s, fwhm rad/s, resolved) for each supermode.
    fn eigenmodes(&self) -> PyResult<Vec<(f64, f64, bool)>> {
        let chain = CmtSystem::linear(&self.inner).signal;
        let lines = cmt::eigenmode_linewidths(&chain).map_err(to_py)?;
        Ok(lines.into_iter().map(|l| (l.center, l.fwhm, l.resolved)).collect())
    }

    /// Joint spectral amplitude. `pulse_fwhm` (s) selects a Gaussian pump,
    /// otherwise continuous-wave.
    #[pyo3(signature = (power=1e-3, pulse_fwhm=None, points=256, span_factor=1.5, solver="full"))]
    fn jsa(&self, power: f64, pulse_fwhm: Option<f64>, points: usize, span_factor: f64, solver: &str) -> PyResult<PyJsa> {
        let pump = match pulse_fwhm {
            Some(t) => PumpSpec::gaussian(power, t).map_err(to_py)?,
            None => PumpSpec::cw(power),
        };
        let opts = GridOptions { points, span_factor, solver: self::solver(solver)? };
        Ok(PyJsa { inner: spectral::device_jsa(&self.inner, &pump, opts).map_err(to_py)? })
    }

    /// Continuous-wave pair flux (pairs/s) through the signal band
    /// [lo, hi] in rad/s.
    #[pyo3(signature = (power, lo, hi, solver="fast"))]
    fn cw_flux(&self, power: f64, lo: f64, hi: f64, solver: &str) -> PyResult<f64> {
        let (sys, _) = CmtSystem::pumped(&self.inner, 0.0, power).map_err(to_py)?;
        sys.cw_flux(0.0, lo, hi, self::solver(solver)?, Tolerance::default()).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Device(n_rings={}, couplings={:?})", self.inner.n_rings(), self.inner.profile.all_couplings())
    }
}

/// Sampled joint spectral amplitude on a rectangular grid.
#[pyclass(name = "Jsa", module = "crowpair")]
struct PyJsa {
    inner: JsaMatrix,
}

fn schmidt_dict<'py>(py: Python<'py>, r: SchmidtResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("k", r.k)?;
    d.set_item("n_modes", r.n_modes)?;
    d.set_item("eigenvalues", r.eigenvalues)?;
    Ok(d)
}

#[pymethods]
impl PyJsa {
    /// rad/s
    #[getter]
    fn signal_axis(&self) -> Vec<f64> {
        self.inner.signal_axis.clone()
    }

    /// rad/s
    #[getter]
    fn idler_axis(&self) -> Vec<f64> {
        self.inner.idler_axis.clone()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.rows(), self.inner.cols())
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.metadata.warnings.clone()
    }

    /// Rows of complex amplitudes, signal index first.
    fn amplitude(&self) -> Vec<Vec<Complex64>> {
        self.inner.values.chunks(self.inner.cols()).map(|r| r.to_vec()).collect()
    }

    fn intensity(&self) -> Vec<Vec<f64>> {
        let cols = self.inner.cols();
        self.inner.intensity().chunks(cols).map(|r| r.to_vec()).collect()
    }

    /// Schmidt decomposition; `flat_phase` drops the phase (sqrt of the JSI).
    #[pyo3(signature = (flat_phase=false))]
    fn schmidt<'py>(&self, py: Python<'py>, flat_phase: bool) -> PyResult<Bound<'py, PyDict>> {
        let r = if flat_phase { spectral::schmidt_flat_phase(&self.inner) } else { spectral::schmidt(&self.inner) };
        schmidt_dict(py, r.map_err(to_py)?)
    }

    /// Schmidt decomposition after square pass bands of `width` rad/s.
    fn filtered_schmidt<'py>(
        &self,
        py: Python<'py>,
        center_s: f64,
        center_i: f64,
        width: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let r = spectral::filtered_schmidt(&self.inner, RectFilter { center_s, center_i, width }).map_err(to_py)?;
        schmidt_dict(py, r)
    }
}

fn report_dict<'py>(py: Python<'py>, r: &FluxReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("slowing", r.point.slowing)?;
    d.set_item("n_rings", r.point.n_rings)?;
    d.set_item("pump_power", r.point.pump_power)?;
    d.set_item("kappa", r.kappa)?;
    d.set_item("flux", r.flux_closed_form)?;
    d.set_item("flux_cmt", r.flux_cmt)?;
    d.set_item("bandwidth_hz", r.bandwidth_hz)?;
    d.set_item("gamma_eff", r.gamma_eff)?;
    d.set_item("multiphoton_metric", r.multiphoton_metric)?;
    d.set_item("multiphoton_ok", r.multiphoton_ok())?;
    d.set_item("effective_power", r.effective_power)?;
    d.set_item("length", r.geometric_length)?;
    d.set_item("effective_length", r.effective_length)?;
    Ok(d)
}

/// Closed-form pair flux of an apodized chain with slowing `slowing`.
#[pyfunction]
#[pyo3(signature = (slowing, n_rings, pump_power=1e-3, radius=5e-6, waveguide=None))]
fn flux<'py>(
    py: Python<'py>,
    slowing: f64,
    n_rings: usize,
    pump_power: f64,
    radius: f64,
    waveguide: Option<PyWaveguide>,
) -> PyResult<Bound<'py, PyDict>> {
    let wg = waveguide_or_default(waveguide);
    let geom = crowpair::model::RingGeometry::new(radius, &wg).map_err(to_py)?;
    let point = DesignPoint::new(slowing, n_rings, pump_power).map_err(to_py)?;
    let r = pair_flux::flux_closed_form(&point, &wg, &geom).map_err(to_py)?;
    report_dict(py, &r)
}

type SweepRows<'py> = (Vec<Bound<'py, PyDict>>, Vec<(f64, usize)>);

/// Sweep over slowing factors and ring counts. Returns (rows, n_opt) where
/// failed points carry an `error` entry instead of results.
#[pyfunction]
#[pyo3(signature = (slowing, n_rings, pump_power=1e-3, with_cmt=false, radius=5e-6, waveguide=None))]
fn sweep<'py>(
    py: Python<'py>,
    slowing: Vec<f64>,
    n_rings: Vec<usize>,
    pump_power: f64,
    with_cmt: bool,
    radius: f64,
    waveguide: Option<PyWaveguide>,
) -> PyResult<SweepRows<'py>> {
    let wg = waveguide_or_default(waveguide);
    let geom = crowpair::model::RingGeometry::new(radius, &wg).map_err(to_py)?;
    let spec = SweepSpec { slowing, n_rings, pump_power, with_cmt };
    let res = py.detach(|| pair_flux::sweep(&spec, &wg, &geom)).map_err(to_py)?;
    let mut rows = Vec::with_capacity(res.points.len());
    for p in &res.points {
        let d = match &p.report {
            Ok(r) => report_dict(py, r)?,
            Err(e) => {
                let d = PyDict::new(py);
                d.set_item("slowing", p.slowing)?;
                d.set_item("n_rings", p.n_rings)?;
                d.set_item("error", e)?;
                d
            }
        };
        d.set_item("is_nopt", p.is_nopt)?;
        rows.push(d);
    }
    Ok((rows, res.n_opt))
}

/// Single-ring pair flux: numerical integral and the resonant closed form.
#[pyfunction]
#[pyo3(signature = (kappa, pump_power=1e-3, radius=5e-6, waveguide=None))]
fn single_ring<'py>(
    py: Python<'py>,
    kappa: f64,
    pump_power: f64,
    radius: f64,
    waveguide: Option<PyWaveguide>,
) -> PyResult<Bound<'py, PyDict>> {
    let profile = CouplingProfile::new(vec![], kappa, kappa).map_err(to_py)?;
    let device = DeviceSpec::new(waveguide_or_default(waveguide), radius, profile).map_err(to_py)?;
    let m = SingleRingModel::from_device(&device, 0.0, pump_power).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("flux", m.flux(Tolerance::default()).map_err(to_py)?)?;
    d.set_item("flux_resonant", m.flux_resonant())?;
    d.set_item("linewidth_hz", m.linewidth_hz())?;
    d.set_item("loaded_q", crowpair::single_ring::loaded_q(&device).map_err(to_py)?)?;
    Ok(d)
}

/// Coupling list [boundary_in, inter_ring..., boundary_out] of a synthesized
/// profile.
#[pyfunction]
#[pyo3(signature = (kind, n_rings, kappa=0.3, bandwidth_fraction=None, seed=0))]
fn synthesize(
    kind: &str,
    n_rings: usize,
    kappa: f64,
    bandwidth_fraction: Option<f64>,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let req = ProfileRequest { bandwidth_fraction, seed, ..ProfileRequest::new(profile_kind(kind)?, n_rings, kappa) };
    Ok(synth::generate(&req).map_err(to_py)?.all_couplings())
}

#[pymodule]
#[pyo3(name = "crowpair")]
pub fn crowpair_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWaveguide>()?;
    m.add_class::<PyDevice>()?;
    m.add_class::<PyJsa>()?;
    m.add_function(wrap_pyfunction!(flux, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(single_ring, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add("CrowpairError", m.py().get_type::<CrowpairError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
