mod common;

use common::*;
use num_complex::Complex64;
use oqam_chest::channel::*;
use oqam_chest::fbcore::{BasebandSignal, CellRole, FilterBank, FrameGrid, PrototypeFilter};
use oqam_chest::linalg::CMatrix;
use rand::Rng;

#[test]
fn profiles_are_normalised_and_increasing() {
    for name in ["veh-a", "veh-b"] {
        let pdp = PowerDelayProfile::builtin(name, None).unwrap();
        assert!((pdp.powers().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(pdp.delays()[0], 0);
        assert!(pdp.delays().windows(2).all(|w| w[0] < w[1]));
        assert!(pdp.powers().iter().all(|&p| p >= 0.0));
    }
    assert_eq!(
        PowerDelayProfile::builtin("veh-a", None)
            .unwrap()
            .channel_len(),
        26
    );
    assert_eq!(
        PowerDelayProfile::builtin("veh-b", None)
            .unwrap()
            .channel_len(),
        201
    );
    assert!(PowerDelayProfile::builtin("veh-z", None).is_err());
}

#[test]
fn per_tap_variance_follows_the_profile() {
    let pdp = PowerDelayProfile::builtin("veh-a", None).unwrap();
    let draws = 10_000;
    let mut acc = vec![0.0; pdp.channel_len()];
    for s in 0..draws {
        let ch = realize(&pdp, AntennaConfig::siso(), 64, s).unwrap();
        for (l, t) in ch.taps().iter().enumerate() {
            acc[l] += t[(0, 0)].norm_sqr();
        }
    }
    for (&d, &p) in pdp.delays().iter().zip(pdp.powers()) {
        let v = acc[d] / draws as f64;
        assert!((v / p - 1.0).abs() < 0.05, "delay {d}: {v} vs {p}");
    }
}

fn correlation(rho_t: f64, rho_r: f64, draws: u64) -> (Complex64, Complex64, f64) {
    let pdp = PowerDelayProfile::single_tap().unwrap();
    let ant = AntennaConfig {
        transmit: 2,
        receive: 2,
        rho_t,
        rho_r,
    };
    let (mut rx, mut tx, mut pw) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
    for s in 0..draws {
        let ch = realize(&pdp, ant, 8, s).unwrap();
        let h = &ch.taps()[0];
        rx += h[(0, 0)] * h[(1, 0)].conj();
        tx += h[(0, 0)] * h[(0, 1)].conj();
        pw += h.norm_squared();
    }
    let n = draws as f64;
    (rx / n, tx / n, pw / n)
}

#[test]
fn uncorrelated_antennas() {
    let (rx, tx, pw) = correlation(0.0, 0.0, 10_000);
    // Standard error of a product of unit complex Gaussians is 1/sqrt(n).
    let three_sigma = 3.0 / 100.0;
    assert!(rx.norm() < three_sigma, "{rx}");
    assert!(tx.norm() < three_sigma, "{tx}");
    assert!((pw / 4.0 - 1.0).abs() < 0.05, "{pw}");
}

#[test]
fn kronecker_correlation() {
    let (rx, tx, pw) = correlation(0.5, 0.3, 10_000);
    assert!((rx - Complex64::new(0.3, 0.0)).norm() < 0.04, "{rx}");
    assert!((tx - Complex64::new(0.5, 0.0)).norm() < 0.04, "{tx}");
    assert!((pw / 4.0 - 1.0).abs() < 0.05);
    let r = exponential_correlation(3, 0.5);
    assert_eq!(r[(0, 2)], 0.25);
    assert!(realize(
        &PowerDelayProfile::single_tap().unwrap(),
        AntennaConfig {
            rho_t: 1.0,
            ..AntennaConfig::siso()
        },
        8,
        0
    )
    .is_err());
}

#[test]
fn single_tap_gives_a_flat_response() {
    let ch = realize(
        &PowerDelayProfile::single_tap().unwrap(),
        AntennaConfig::siso(),
        16,
        3,
    )
    .unwrap();
    let h0 = ch.cfr()[0][(0, 0)];
    assert!(ch.cfr().iter().all(|h| (h[(0, 0)] - h0).norm() < 1e-14));
}

#[test]
fn cfr_is_the_dft_of_the_taps() {
    let pdp = PowerDelayProfile::builtin("veh-a", None).unwrap();
    let ant = AntennaConfig {
        transmit: 2,
        receive: 3,
        rho_t: 0.2,
        rho_r: 0.2,
    };
    let m = 64;
    let ch = realize(&pdp, ant, m, 5).unwrap();
    for p in 0..m {
        let mut want = CMatrix::zeros(3, 2);
        for (l, t) in ch.taps().iter().enumerate() {
            want += t * Complex64::from_polar(
                1.0,
                -2.0 * std::f64::consts::PI * (p * l) as f64 / m as f64,
            );
        }
        assert!((&ch.cfr()[p] - want).camax() < 1e-10);
    }
}

#[test]
fn analysed_noise_has_unit_variance_per_subcarrier() {
    let m = 32;
    let bank = FilterBank::new(PrototypeFilter::design(m, 3).unwrap());
    let n = 3;
    let len = (n - 1) * m / 2 + bank.filter().len();
    let trials = 10_000;
    let mut acc = vec![0.0; m];
    for t in 0..trials {
        let w = &unit_noise(1, len, t)[0];
        let y = bank.analyze(w, n).unwrap();
        for (p, a) in acc.iter_mut().enumerate() {
            *a += y.get(p, 1).norm_sqr();
        }
    }
    let mean = acc.iter().sum::<f64>() / (m as f64 * trials as f64);
    assert!((mean - 1.0).abs() < 0.05, "{mean}");
    for (p, a) in acc.iter().enumerate() {
        assert!((a / trials as f64 - 1.0).abs() < 0.05, "p={p}");
    }
}

#[test]
fn channel_application_is_linear_and_transparent() {
    let mut r = rng(3);
    let a = BasebandSignal::new((0..40).map(|_| cgauss(&mut r, 1.0)).collect());
    let b = BasebandSignal::new((0..40).map(|_| cgauss(&mut r, 1.0)).collect());
    let ch =
        ChannelRealization::from_taps((0..4).map(|_| random_matrix(&mut r, 1, 1)).collect(), 16)
            .unwrap();
    let s: f64 = r.random_range(-2.0..2.0);
    let mut combo = a.clone();
    combo.scale(s);
    combo.add_scaled(&b, Complex64::new(1.0, 0.0));
    let ya = &ch.convolve(&[a.clone()]).unwrap()[0];
    let yb = &ch.convolve(&[b]).unwrap()[0];
    let yc = &ch.convolve(&[combo]).unwrap()[0];
    for l in 0..yc.len() {
        assert!((yc.samples()[l] - (ya.samples()[l] * s + yb.samples()[l])).norm() < 1e-12);
    }
    let identity = flat_channel(CMatrix::identity(1, 1), 16);
    let out = &apply(&[a.clone()], &identity, 400.0, 1).unwrap()[0];
    for (x, y) in a.samples().iter().zip(out.samples()) {
        assert!((x - y).norm() < 1e-12);
    }
    assert!(apply(&[BasebandSignal::zeros(10)], &identity, 10.0, 1).is_err());
}

#[test]
fn apply_sets_noise_from_measured_power() {
    let mut r = rng(4);
    let len = 200_000;
    let s = BasebandSignal::new((0..len).map(|_| cgauss(&mut r, 4.0)).collect());
    let identity = flat_channel(CMatrix::identity(1, 1), 16);
    let out = &apply(&[s.clone()], &identity, 10.0, 2).unwrap()[0];
    let noise: f64 = out
        .samples()
        .iter()
        .zip(s.samples())
        .map(|(y, x)| (y - x).norm_sqr())
        .sum::<f64>()
        / len as f64;
    let want = transmit_power(&[s]) / 10.0;
    assert!((noise / want - 1.0).abs() < 0.02, "{noise} vs {want}");
}

#[test]
fn flat_gain_scales_the_analysis_output() {
    let m = 32;
    let bank = FilterBank::new(PrototypeFilter::design(m, 3).unwrap());
    let mut frame = FrameGrid::new(m, 4);
    let mut r = rng(5);
    for p in 0..m {
        for q in 0..4 {
            frame.set(p, q, r.random_range(-1.0..1.0), CellRole::Data);
        }
    }
    let h0 = Complex64::new(0.6, -0.9);
    let ch = flat_channel(CMatrix::from_element(1, 1, h0), m);
    let clean = bank.analyze(&bank.synthesize(&frame).unwrap(), 4).unwrap();
    let y = &receive(&bank, &[frame], &ch, 4)[0];
    for p in 0..m {
        for q in 0..4 {
            assert!((y.get(p, q) - clean.get(p, q) * h0).norm() < 1e-12);
        }
    }
}

#[test]
fn dispersion_breaks_the_flat_model() {
    // Residual of y = H c grows with the delay spread.
    let m = 512;
    let f = PrototypeFilter::design(m, 3).unwrap();
    let bank = FilterBank::new(f.clone());
    let kernel = oqam_chest::interference::InterferenceKernel::extended(&f);
    let frame = oqam_chest::preamble::generate(&oqam_chest::preamble::PreambleSpec::new(
        oqam_chest::preamble::Family::Iam(oqam_chest::preamble::IamVariant::Complex),
        m,
    ))
    .unwrap()
    .remove(0);
    let c: Vec<Complex64> = (0..m)
        .map(|p| kernel.pseudo_pilot(&frame, p, 1).unwrap())
        .collect();
    let residual = |name: &str| {
        let pdp = PowerDelayProfile::builtin(name, None).unwrap();
        let mut acc = 0.0;
        for s in 0..20 {
            let ch = realize(&pdp, AntennaConfig::siso(), m, s).unwrap();
            let y = &receive(&bank, &[frame.clone()], &ch, 3)[0];
            let e: f64 = (0..m)
                .map(|p| (y.get(p, 1) - ch.cfr()[p][(0, 0)] * c[p]).norm_sqr())
                .sum();
            let h: f64 = ch.cfr().iter().map(|h| h.norm_squared()).sum();
            acc += e / h;
        }
        acc / 20.0
    };
    let a = residual("veh-a");
    let b = residual("veh-b");
    assert!(a > 0.0 && b > 2.0 * a, "veh-a {a}, veh-b {b}");
}
