use crowpair::cmt::{self, CmtSystem};
use crowpair::model::{DeviceSpec, WaveguideParams};
use crowpair::spectral::{self, GridOptions, PumpSpec};
use crowpair::synth::{self, ProfileKind, ProfileRequest};

fn device(kind: ProfileKind, n: usize, kappa: f64, wg: WaveguideParams) -> DeviceSpec {
    let prof = synth::generate(&ProfileRequest::new(kind, n, kappa)).unwrap();
    DeviceSpec::new(wg, 5e-6, prof).unwrap()
}

fn ripple_db(dev: &DeviceSpec, fraction: f64) -> f64 {
    let chain = CmtSystem::linear(dev).signal;
    // half-width of the Bloch band is twice the hopping rate
    let half = 2.0 * chain.rates.inter_ring[0] * fraction;
    let ts: Vec<f64> = (0..=2000)
        .map(|k| -half + 2.0 * half * k as f64 / 2000.0)
        .map(|w| chain.transmission(w).unwrap().norm_sqr())
        .collect();
    let max = ts.iter().cloned().fold(0.0, f64::max);
    let min = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    10.0 * (max / min).log10()
}

#[test]
fn apodized_band_is_flat_in_the_middle() {
    for kappa in [0.05, 0.3] {
        let dev = device(ProfileKind::Apodized, 5, kappa, WaveguideParams::silicon_wire().lossless());
        assert!(ripple_db(&dev, 0.5) < 1.0, "kappa {kappa}");
    }
    // without the matched boundaries the same window is far from flat
    let dev = device(ProfileKind::Uniform, 5, 0.3, WaveguideParams::silicon_wire().lossless());
    assert!(ripple_db(&dev, 0.5) > 3.0);
}

#[test]
fn edge_supermodes_are_narrowest() {
    let dev = device(ProfileKind::Uniform, 5, 0.3, WaveguideParams::silicon_wire());
    let lines = cmt::eigenmode_linewidths(&CmtSystem::linear(&dev).signal).unwrap();
    assert_eq!(lines.len(), 5);
    let w: Vec<f64> = lines.iter().map(|l| l.fwhm).collect();
    assert!(w[0] < w[1] && w[1] < w[2] && w[4] < w[3] && w[3] < w[2], "{w:?}");
}

#[test]
fn matched_chain_stores_pump_evenly() {
    let dev = device(ProfileKind::Apodized, 5, 0.1, WaveguideParams::silicon_wire().lossless());
    let (_, state) = CmtSystem::pumped(&dev, 0.0, 1e-3).unwrap();
    let e = state.energies();
    for u in &e {
        assert!((u / e[0] - 1.0).abs() < 1e-9, "{e:?}");
    }
}

fn exchange_asymmetry(kind: ProfileKind, wg: WaveguideParams) -> f64 {
    let dev = device(kind, 4, 0.3, wg);
    let pump = PumpSpec::gaussian(1e-3, 10e-12).unwrap();
    let jsa = spectral::device_jsa(&dev, &pump, GridOptions { points: 40, ..Default::default() }).unwrap();
    assert_eq!(jsa.signal_axis, jsa.idler_axis);
    let peak = jsa.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for j in 0..jsa.rows() {
        for k in 0..jsa.cols() {
            worst = worst.max((jsa.at(j, k).norm() - jsa.at(k, j).norm()).abs() / peak);
        }
    }
    worst
}

// Signal leaves through the output bus and idler through the input bus, so
// swapping them needs a mirror-symmetric chain whose pump-induced rates
// satisfy chi[N-1-m] = conj(chi[m]) up to a global phase. A lossless matched
// chain carries the pump as a pure travelling wave and qualifies.
#[test]
fn lossless_matched_chain_has_exchange_symmetric_jsa() {
    assert!(exchange_asymmetry(ProfileKind::Apodized, WaveguideParams::silicon_wire().lossless()) < 1e-12);
    // standing-wave pump in the unmatched chain breaks it
    assert!(exchange_asymmetry(ProfileKind::Uniform, WaveguideParams::silicon_wire().lossless()) > 1e-2);
}
