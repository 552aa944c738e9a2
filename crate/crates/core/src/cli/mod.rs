//! Command-line front end: subcommands, run metadata and exit codes.

pub mod config;
pub mod output;

use clap::{Parser, Subcommand};
use serde_json::json;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use crate::cmt::{eigenmode_linewidths, nearest_line, transmission, uniform_axis, CmtSystem, SolverMode};
use crate::error::{Error, Result};
use crate::model::{idler_power_single_ring, q_intrinsic, CouplingProfile, DeviceSpec};
use crate::pair_flux::{bandwidth, sweep};
use crate::quad::Tolerance;
use crate::single_ring::{loaded_q, SingleRingModel};
use crate::spectral::{comb, device_jsa, filtered_schmidt, schmidt, schmidt_flat_phase, CombRequest, PumpSpec, RectFilter};
use crate::synth::mc_ensemble;

pub use config::RunConfig;
use output::{columns_file, matrix_file, plot_file, Cell, Format, OutputDir, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "crowpair", version, about = "Photon-pair generation in microring and CROW devices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: RunOptions,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunOptions {
    /// TOML configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (falls back to CROWPAIR_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write gnuplot-ready data files.
    #[arg(long, global = true)]
    pub plot_data: bool,
    /// full (block-tridiagonal), fast (first order in chi) or dense (LU reference).
    #[arg(long, global = true, default_value = "full")]
    pub solver: SolverMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form single-ring Q, linewidth and pair flux.
    SingleRing,
    /// Linear transmission and Bloch eigenmode linewidths.
    Transmission,
    /// Joint spectral amplitude and intensity on a grid.
    Jsi,
    /// Schmidt numbers of the joint spectral amplitude.
    Schmidt,
    /// Closed-form flux over the (S, N) design space.
    FluxSweep,
    /// Dispersive multi-band comb.
    Comb,
    /// Schmidt numbers of random coupling profiles.
    Mc,
    /// Write the configured coupling profile.
    Synth,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SingleRing => "single-ring",
            Command::Transmission => "transmission",
            Command::Jsi => "jsi",
            Command::Schmidt => "schmidt",
            Command::FluxSweep => "flux-sweep",
            Command::Comb => "comb",
            Command::Mc => "mc",
            Command::Synth => "synth",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::TooFewRings { .. } => EXIT_CONFIG,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

pub const SWEEP_HEADER: [&str; 12] = [
    "S", "N", "kappa", "L_m", "Leff_m", "dnu_hz", "gamma_eff", "pbar_w", "flux_eq6_hz", "flux_cmt_hz", "metric_gPL",
    "is_nopt",
];

fn hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

fn load_config(opts: &RunOptions) -> Result<RunConfig> {
    match &opts.config {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io { path: p.display().to_string(), source })?;
            RunConfig::parse(&text)
        }
    }
}

fn thread_count(opts: &RunOptions) -> Result<Option<usize>> {
    if let Some(n) = opts.threads {
        return Ok(Some(n));
    }
    match std::env::var("CROWPAIR_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("CROWPAIR_THREADS: not a thread count: `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn profile_table(p: &CouplingProfile) -> Table {
    let mut t = Table::new(&["index", "position", "kappa"]);
    let all = p.all_couplings();
    let last = all.len() - 1;
    for (i, k) in all.into_iter().enumerate() {
        let pos = if i == 0 {
            "boundary_in"
        } else if i == last {
            "boundary_out"
        } else {
            "inter_ring"
        };
        t.push(vec![i.into(), pos.into(), k.into()]);
    }
    t
}

fn single_ring(cfg: &RunConfig, opts: &RunOptions, out: &mut OutputDir) -> Result<()> {
    let wg = cfg.waveguide()?;
    let k = cfg.coupling.kappa;
    let device = DeviceSpec::new(wg, cfg.radius(), CouplingProfile::new(vec![], k, k)?)?;
    let pump = cfg.pump()?;
    let model = SingleRingModel::from_device(&device, pump.detuning, pump.power)?;
    let q = loaded_q(&device)?;
    let mut t = Table::new(&["quantity", "value"]);
    let mut row = |name: &str, v: f64| t.push(vec![name.into(), v.into()]);
    row("q_loaded", q);
    row("q_intrinsic", q_intrinsic(&wg).unwrap_or(f64::INFINITY));
    row("linewidth_hz", model.linewidth_hz());
    row("chi_abs_rad_s", model.chi.norm());
    row("flux_hz", model.flux(Tolerance::default())?);
    row("flux_resonant_hz", model.flux_resonant());
    row("idler_power_w", idler_power_single_ring(&wg, &device.geometry, q, pump.power)?);
    out.table("single_ring", opts.format, &t)?;
    if opts.plot_data {
        let axis = uniform_axis(model.signal_resonance, 4.0 * model.damping, cfg.grid.spectrum_samples);
        let f: Vec<f64> = axis.iter().map(|&w| hz(w)).collect();
        let psd: Vec<f64> = axis.iter().map(|&w| model.psd(w, 2.0 * pump.detuning - w)).collect();
        out.write("single_ring_psd.dat", &columns_file(&["ws_hz", "psd"], &[&f, &psd]))?;
    }
    Ok(())
}

fn transmission_cmd(cfg: &RunConfig, opts: &RunOptions, out: &mut OutputDir, seed: u64) -> Result<()> {
    let device = cfg.device(seed)?;
    let sys = CmtSystem::linear(&device);
    let half = 0.5 * cfg.grid.span_factor * sys.signal.rates.band_full_width();
    let axis = uniform_axis(sys.signal.center(), half, cfg.grid.spectrum_samples);
    let t = transmission(&sys.signal, &axis)?;
    let mut tab = Table::new(&["freq_hz", "re_t", "im_t", "power_t"]);
    for (&w, (c, p)) in axis.iter().zip(&t) {
        tab.push(vec![hz(w).into(), c.re.into(), c.im.into(), (*p).into()]);
    }
    out.table("transmission", opts.format, &tab)?;
    let mut lines = Table::new(&["center_hz", "fwhm_hz", "resolved", "peak_power"]);
    for l in eigenmode_linewidths(&sys.signal)? {
        lines.push(vec![hz(l.center).into(), l.fwhm_hz().into(), l.resolved.into(), l.peak.into()]);
    }
    out.table("eigenmodes", opts.format, &lines)?;
    if opts.plot_data {
        let f: Vec<f64> = axis.iter().map(|&w| hz(w)).collect();
        let p: Vec<f64> = t.iter().map(|x| x.1).collect();
        out.write("transmission.dat", &columns_file(&["freq_hz", "power_t"], &[&f, &p]))?;
    }
    Ok(())
}

fn jsi_cmd(cfg: &RunConfig, opts: &RunOptions, out: &mut OutputDir, seed: u64) -> Result<Vec<String>> {
    let device = cfg.device(seed)?;
    let jsa = device_jsa(&device, &cfg.pump()?, cfg.grid_options(opts.solver))?;
    out.write("jsa.dat", &matrix_file(&jsa, true))?;
    out.write("jsi.dat", &matrix_file(&jsa, false))?;
    if opts.plot_data {
        out.write("jsi_plot.dat", &plot_file(&jsa))?;
    }
    Ok(jsa.metadata.warnings.clone())
}

fn schmidt_cmd(cfg: &RunConfig, opts: &RunOptions, out: &mut OutputDir, seed: u64) -> Result<Vec<String>> {
    let device = cfg.device(seed)?;
    let pump = cfg.pump()?;
    let grid = cfg.grid_options(opts.solver);
    let jsa = device_jsa(&device, &pump, grid)?;
    let full = schmidt(&jsa)?;
    let flat = schmidt_flat_phase(&jsa)?;
    let broad = schmidt(&device_jsa(&device, &PumpSpec { mode: crate::spectral::PumpMode::Cw, ..pump }, grid)?)?;
    // one Bloch-mode pair at band center, closed-form eigenmode width from the mean coupling
    let sys = CmtSystem::linear(&device);
    let lines = eigenmode_linewidths(&sys.signal)?;
    let inter = device.profile.inter_ring();
    let mean_kappa = if inter.is_empty() { device.profile.boundary_in() } else { inter.iter().sum::<f64>() / inter.len() as f64 };
    let width = 2.0 * PI * bandwidth(&device.geometry, mean_kappa, device.n_rings())?;
    let cs = nearest_line(&lines, sys.signal.center()).map_or(sys.signal.center(), |l| l.center);
    let ci = 2.0 * pump.detuning - cs;
    let filtered = filtered_schmidt(&jsa, RectFilter { center_s: cs, center_i: ci, width })?;

    let mut t = Table::new(&["variant", "K", "n_modes", "lambda_max"]);
    for (name, r) in [("amplitude", &full), ("flat_phase", &flat), ("broad_pump", &broad), ("filtered_center", &filtered)] {
        t.push(vec![name.into(), r.k.into(), r.n_modes.into(), r.eigenvalues[0].into()]);
    }
    out.table("schmidt", opts.format, &t)?;
    let mut ev = Table::new(&["n", "lambda"]);
    for (i, l) in full.eigenvalues.iter().take(32).enumerate() {
        ev.push(vec![i.into(), (*l).into()]);
    }
    out.table("schmidt_eigenvalues", opts.format, &ev)?;
    Ok(jsa.metadata.warnings.clone())
}

fn sweep_cmd(cfg: &RunConfig, opts: &RunOptions, out: &mut OutputDir) -> Result<Vec<String>> {
    let wg = cfg.waveguide()?;
    let geom = crate::model::RingGeometry::new(cfg.radius(), &wg)?;
    let res = sweep(&cfg.sweep_spec(), &wg, &geom)?;
    let mut t = Table::new(&SWEEP_HEADER);
    let mut warnings = Vec::new();
    for p in &res.points {
        match &p.report {
            Ok(r) => t.push(vec![
                r.point.slowing.into(),
                r.point.n_rings.into(),
                r.kappa.into(),
                r.geometric_length.into(),
                r.effective_length.into(),
                r.bandwidth_hz.into(),
                r.gamma_eff.into(),
                r.effective_power.into(),
                r.flux_closed_form.into(),
                r.flux_cmt.into(),
                r.multiphoton_metric.into(),
                p.is_nopt.into(),
            ]),
            Err(e) => warnings.push(format!("S={} N={}: {e}", p.slowing, p.n_rings)),
        }
    }
    out.table("flux_sweep", opts.format, &t)?;
    let mut nopt = Table::new(&["S", "N_opt"]);
    for &(s, n) in &res.n_opt {
        nopt.push(vec![s.into(), n.into()]);
    }
    out.table("nopt", opts.format, &nopt)?;
    Ok(warnings)
}

fn comb_cmd(cfg: &RunConfig, opts: &RunOptions, out: &mut OutputDir, seed: u64) -> Result<Vec<String>> {
    let device = cfg.device(seed)?;
    let m = cfg.dispersion.max_band as i32;
    let req = CombRequest {
        device: &device,
        dispersion: cfg.dispersion(),
        pump: cfg.pump()?,
        bands: (-m..=m).collect(),
        grid: cfg.grid_options(opts.solver),
        samples: cfg.grid.spectrum_samples,
    };
    let r = comb(&req)?;
    let mut bands = Table::new(&["band", "freq_hz", "power_t"]);
    let mut widths = Table::new(&["band", "width_hz"]);
    for b in &r.bands {
        widths.push(vec![b.band.into(), b.width_hz.into()]);
        for (&w, &p) in b.axis.iter().zip(&b.power) {
            bands.push(vec![b.band.into(), hz(w).into(), p.into()]);
        }
    }
    out.table("comb_transmission", opts.format, &bands)?;
    out.table("comb_widths", opts.format, &widths)?;
    let mut tp = Table::new(&["band", "signal_hz", "jsi"]);
    let mut edge = Table::new(&["band", "edge_to_center"]);
    for s in &r.two_photon {
        edge.push(vec![s.band.into(), s.edge_to_center.into()]);
        for (&w, &v) in s.axis.iter().zip(&s.intensity) {
            tp.push(vec![s.band.into(), hz(w).into(), v.into()]);
        }
    }
    out.table("comb_two_photon", opts.format, &tp)?;
    out.table("comb_edge_ratio", opts.format, &edge)?;
    for (b, jsa) in &r.jsa {
        out.write(&format!("jsi_pm{b}.dat"), &matrix_file(jsa, false))?;
        if opts.plot_data {
            out.write(&format!("jsi_pm{b}_plot.dat"), &plot_file(jsa))?;
        }
    }
    Ok(r.warnings)
}

fn mc_cmd(cfg: &RunConfig, opts: &RunOptions, out: &mut OutputDir, seed: u64) -> Result<Vec<String>> {
    let wg = cfg.waveguide()?;
    let pump = cfg.pump()?;
    let grid = cfg.grid_options(opts.solver);
    let radius = cfg.radius();
    let pipeline = |p: &CouplingProfile| {
        let d = DeviceSpec::new(wg, radius, p.clone())?;
        Ok(schmidt(&device_jsa(&d, &pump, grid)?)?.k)
    };
    let s = mc_ensemble(cfg.mc.samples, cfg.ring.n_rings, seed, &pipeline)?;
    let mut samples = Table::new(&["sample", "K", "couplings"]);
    for smp in &s.samples {
        let ks: Vec<String> = smp.profile.all_couplings().iter().map(|&k| output::num(k)).collect();
        samples.push(vec![smp.index.into(), smp.k.into(), Cell::Text(ks.join(" "))]);
    }
    out.table("mc_samples", opts.format, &samples)?;
    let mut sum = Table::new(&["statistic", "value"]);
    for (name, v) in [("min", s.min), ("q1", s.q1), ("median", s.median), ("q3", s.q3), ("max", s.max)] {
        sum.push(vec![name.into(), v.into()]);
    }
    sum.push(vec!["failures".into(), s.failures.into()]);
    out.table("mc_summary", opts.format, &sum)?;
    out.table("mc_min_profile", opts.format, &profile_table(&s.min_profile))?;
    out.table("mc_max_profile", opts.format, &profile_table(&s.max_profile))?;
    let mut w = Vec::new();
    if s.failures > 0 {
        w.push(format!("{} samples failed and were excluded", s.failures));
    }
    Ok(w)
}

fn synth_cmd(cfg: &RunConfig, opts: &RunOptions, out: &mut OutputDir, seed: u64) -> Result<()> {
    let p = cfg.profile(seed)?;
    out.table("profile", opts.format, &profile_table(&p))?;
    // the same profile in the config file's explicit form
    let mut explicit = cfg.clone();
    explicit.coupling = config::CouplingSection {
        kind: crate::synth::ProfileKind::Explicit,
        inter_ring: Some(p.inter_ring().to_vec()),
        boundary_in: Some(p.boundary_in()),
        boundary_out: Some(p.boundary_out()),
        ..cfg.coupling.clone()
    };
    out.write("profile.toml", &explicit.to_toml())?;
    Ok(())
}

/// Run one subcommand and write its files plus `run_metadata.json`.
pub fn run(command: Command, opts: &RunOptions) -> Result<Vec<String>> {
    let started = Instant::now();
    let cfg = load_config(opts)?;
    let threads = thread_count(opts)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut out = OutputDir::create(&opts.out)?;
    let seed = opts.seed;
    let warnings = pool.install(|| -> Result<Vec<String>> {
        match command {
            Command::SingleRing => single_ring(&cfg, opts, &mut out).map(|_| vec![]),
            Command::Transmission => transmission_cmd(&cfg, opts, &mut out, seed).map(|_| vec![]),
            Command::Jsi => jsi_cmd(&cfg, opts, &mut out, seed),
            Command::Schmidt => schmidt_cmd(&cfg, opts, &mut out, seed),
            Command::FluxSweep => sweep_cmd(&cfg, opts, &mut out),
            Command::Comb => comb_cmd(&cfg, opts, &mut out, seed),
            Command::Mc => mc_cmd(&cfg, opts, &mut out, seed),
            Command::Synth => synth_cmd(&cfg, opts, &mut out, seed).map(|_| vec![]),
        }
    })?;
    let meta = json!({
        "subcommand": command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "solver": opts.solver.name(),
        "threads": threads,
        "config": serde_json::to_value(&cfg).expect("config is serializable"),
        "outputs": out.written.clone(),
        "warnings": warnings.clone(),
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    let mut text = serde_json::to_string_pretty(&meta).expect("json");
    text.push('\n');
    out.write("run_metadata.json", &text)?;
    Ok(warnings)
}

/// Parse arguments, run, and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command, &cli.opts) {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
