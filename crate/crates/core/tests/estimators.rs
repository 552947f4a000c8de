mod common;

use common::*;
use num_complex::Complex64;
use oqam_chest::channel::{unit_noise, ChannelRealization};
use oqam_chest::cpofdm::{ofdm_ls_estimate, OfdmPreamble};
use oqam_chest::estimator::*;
use oqam_chest::fbcore::{ComplexGrid, FilterBank, FrameGrid, PrototypeFilter};
use oqam_chest::interference::{InterferenceKernel, InterferenceTable};
use oqam_chest::linalg::{CMatrix, CVector};
use oqam_chest::preamble::*;

fn setup(m: usize) -> (FilterBank, InterferenceKernel, InterferenceTable) {
    let f = PrototypeFilter::design(m, 3).unwrap();
    let t = InterferenceTable::from_filter(&f).unwrap();
    (
        FilterBank::new(f.clone()),
        InterferenceKernel::extended(&f),
        t,
    )
}

fn siso_h(v: Complex64) -> CMatrix {
    CMatrix::from_element(1, 1, v)
}

#[test]
fn iam_recovers_a_flat_channel() {
    let m = 64;
    let (bank, kernel, table) = setup(m);
    let h = Complex64::from_polar(0.8, 0.7);
    let ch = flat_channel(siso_h(h), m);
    for variant in [
        IamVariant::Real,
        IamVariant::Imaginary(SymbolSource::Seeded(4)),
        IamVariant::Complex,
        IamVariant::Extended(ExtendedLayout::for_table(&table)),
    ] {
        let frames = generate(&PreambleSpec::new(Family::Iam(variant.clone()), m)).unwrap();
        let y = receive(&bank, &frames, &ch, 3);
        let c = pseudo_pilots(&kernel, &frames[0], 1).unwrap();
        let est = iam_estimate(&y, 1, &c).unwrap();
        assert_eq!(est.excluded(), 0);
        let err = max_error(&ch, &est);
        assert!(err < 2e-3, "{variant:?}: {err}");
    }
}

#[test]
fn iam_error_is_noise_over_pilot() {
    let mut r = rng(1);
    let m = 16;
    let c: Vec<Complex64> = (0..m).map(|_| cgauss(&mut r, 1.0) + 0.5).collect();
    let h: Vec<Complex64> = (0..m).map(|_| cgauss(&mut r, 1.0)).collect();
    let eta: Vec<Complex64> = (0..m).map(|_| cgauss(&mut r, 0.1)).collect();
    let y = ComplexGrid::from_fn(m, 2, |p, q| {
        if q == 1 {
            h[p] * c[p] + eta[p]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let est = iam_estimate(&[y], 1, &c).unwrap();
    for p in 0..m {
        let e = est.get(p).unwrap()[(0, 0)] - h[p];
        assert!((e - eta[p] / c[p]).norm() < 1e-12);
    }
}

#[test]
fn pop_recovers_a_flat_phase() {
    let m = 64;
    let (bank, _, _) = setup(m);
    for theta in [0.3, 1.2, 2.9] {
        let ch = flat_channel(siso_h(Complex64::from_polar(1.0, theta)), m);
        let frames = generate(&PreambleSpec::new(Family::Pop, m)).unwrap();
        let y = receive(&bank, &frames, &ch, 2);
        let est = pop_estimate(&y, &frames[0]).unwrap();
        assert_eq!(est.excluded(), 0);
        let err = max_error(&ch, &est);
        assert!(err < 5e-3, "theta={theta}: {err}");
    }
}

#[test]
fn mimo_pop_is_exact_on_an_ideal_system() {
    // y = H c with Re(c) = d exactly and arbitrary imaginary interference.
    let m = 16;
    let mut r = rng(7);
    let spec = PreambleSpec::new(
        Family::MimoPop {
            receive_antennas: 2,
            seed: 3,
        },
        m,
    )
    .with_antennas(2);
    let frames = generate(&spec).unwrap();
    let h: Vec<CMatrix> = (0..m).map(|_| random_matrix(&mut r, 2, 2)).collect();
    let u: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|_| {
            (0..m)
                .map(|_| (0..4).map(|_| cgauss(&mut r, 1.0).re).collect())
                .collect()
        })
        .collect();
    let y: Vec<ComplexGrid> = (0..2)
        .map(|j| {
            ComplexGrid::from_fn(m, 4, |p, q| {
                (0..2)
                    .map(|i| h[p][(j, i)] * Complex64::new(frames[i].value(p, q), u[i][p][q]))
                    .sum()
            })
        })
        .collect();
    let est = mimo_pop_estimate(&y, &frames).unwrap();
    for p in 0..m {
        assert!((est.get(p).unwrap() - &h[p]).camax() < 1e-9, "p={p}");
    }
    assert!(mimo_pop_estimate(&y[..1], &frames).is_err());
}

#[test]
fn mimo_pop_through_the_filter_bank() {
    // The near-PR residual is amplified by the conditioning of Y_p.
    let m = 32;
    let (bank, _, _) = setup(m);
    let ch = flat_channel(random_matrix(&mut rng(7), 2, 2), m);
    let spec = PreambleSpec::new(
        Family::MimoPop {
            receive_antennas: 2,
            seed: 3,
        },
        m,
    )
    .with_antennas(2);
    let frames = generate(&spec).unwrap();
    let y = receive(&bank, &frames, &ch, 4);
    let est = mimo_pop_estimate(&y, &frames).unwrap();
    assert_eq!(est.excluded(), 0);
    let v = nmse(&ch, &est).unwrap().value;
    assert!(v < 1e-2, "{v}");
}

#[test]
fn mimo_iam_recovers_a_flat_2x2_channel() {
    let m = 64;
    let (bank, kernel, table) = setup(m);
    let h = random_matrix(&mut rng(8), 2, 2);
    let ch = flat_channel(h, m);
    for variant in [
        IamVariant::Complex,
        IamVariant::Extended(ExtendedLayout::for_table(&table)),
    ] {
        let spec = PreambleSpec::new(Family::MimoIam(variant.clone()), m).with_antennas(2);
        let frames = generate(&spec).unwrap();
        let instants = spec.pilot_symbols();
        let c = mimo_pseudo_pilot_matrices(&kernel, &frames, &instants).unwrap();
        let y = receive(&bank, &frames, &ch, spec.symbol_count());
        let est = mimo_iam_estimate(&y, &instants, &c).unwrap();
        let err = max_error(&ch, &est);
        assert!(err < 5e-3, "{variant:?}: {err}");
    }
}

#[test]
fn icm_estimates_a_flat_channel() {
    let m = 64;
    let (bank, kernel, _) = setup(m);
    let h = Complex64::from_polar(1.1, -0.4);
    let ch = flat_channel(siso_h(h), m);
    for family in [
        Family::IcmA,
        Family::IcmB,
        Family::IcmC(StructuredSource::Seeded(5)),
        Family::IcmD,
    ] {
        let spec = PreambleSpec::new(family.clone(), m);
        let frames = generate(&spec).unwrap();
        let q = spec.pilot_symbols()[0];
        let y = receive(&bank, &frames, &ch, spec.symbol_count());
        let est = icm_estimate(&y, &frames[0], q, &kernel).unwrap();
        // ICM-C only cancels exactly away from the band edge.
        let skip = if matches!(family, Family::IcmC(_)) {
            3
        } else {
            0
        };
        let err = (skip..m - skip)
            .map(|p| (est.get(p).unwrap()[(0, 0)] - h).norm())
            .fold(0.0, f64::max);
        assert!(err < 2e-2, "{family:?}: {err}");
    }
}

#[test]
fn interpolation_error_for_a_delayed_tap() {
    // CFR of a single tap at delay 1; pilots on even subcarriers.
    let nmse_at = |m: usize| {
        let h: Vec<Complex64> = (0..m)
            .map(|p| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * p as f64 / m as f64))
            .collect();
        let sparse: Vec<_> = (0..m).map(|p| (p % 2 == 0).then_some(h[p])).collect();
        let est = interpolate_circular(&sparse).unwrap();
        est.iter()
            .zip(&h)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / m as f64
    };
    for m in [64, 128, 512] {
        let c = 1.0 - (2.0 * std::f64::consts::PI / m as f64).cos();
        assert!((nmse_at(m) - c * c / 2.0).abs() < 1e-15, "M={m}");
    }
    assert!((nmse_at(64) - 1.1588e-5).abs() < 1e-8);
    assert!(nmse_at(128) < nmse_at(64));
}

fn sparse_case(m: usize, lh: usize, nt: usize) -> (Vec<FrameGrid>, SparseLayout) {
    let layout = SparseLayout::hadamard(lh, nt).unwrap();
    let frames =
        generate(&PreambleSpec::new(Family::MimoSparse(layout.clone()), m).with_antennas(nt))
            .unwrap();
    (frames, layout)
}

#[test]
fn sparse_system_matrix_is_scaled_unitary() {
    for (m, lh, nt) in [(16, 4, 2), (64, 8, 4), (512, 32, 2), (16, 8, 1)] {
        let (frames, layout) = sparse_case(m, lh, nt);
        let c = sparse_system_matrix(&frames, &layout, 1).unwrap();
        let g = c.adjoint() * &c / Complex64::new(lh as f64, 0.0);
        let dev = (g - CMatrix::identity(nt * lh, nt * lh)).camax();
        assert!(dev < 1e-10, "M={m} L_h={lh} N_t={nt}: {dev}");
    }
}

/// `y_j` at the pilot tones for impulse responses `h[j][i]` (length `L_h`),
/// with optional noise.
fn sparse_observation(
    frames: &[FrameGrid],
    h: &[Vec<Vec<Complex64>>],
    noise: &[Vec<Complex64>],
) -> Vec<ComplexGrid> {
    let m = frames[0].subcarriers();
    h.iter()
        .enumerate()
        .map(|(j, hj)| {
            ComplexGrid::from_fn(m, 2, |p, q| {
                if q != 1 {
                    return Complex64::new(0.0, 0.0);
                }
                let mut acc = noise[j][p];
                for (i, hi) in hj.iter().enumerate() {
                    let cfr: Complex64 = hi
                        .iter()
                        .enumerate()
                        .map(|(l, v)| {
                            v * Complex64::from_polar(
                                1.0,
                                -2.0 * std::f64::consts::PI * (p * l) as f64 / m as f64,
                            )
                        })
                        .sum();
                    acc += cfr * frames[i].value(p, 1);
                }
                acc
            })
        })
        .collect()
}

fn random_taps(
    r: &mut rand_chacha::ChaCha8Rng,
    nr: usize,
    nt: usize,
    lh: usize,
) -> Vec<Vec<Vec<Complex64>>> {
    (0..nr)
        .map(|_| {
            (0..nt)
                .map(|_| (0..lh).map(|_| cgauss(r, 1.0)).collect())
                .collect()
        })
        .collect()
}

#[test]
fn sparse_ls_is_exact_without_noise() {
    let (m, lh, nt, nr) = (16, 4, 2, 2);
    let (frames, layout) = sparse_case(m, lh, nt);
    let mut r = rng(11);
    let mut h = random_taps(&mut r, nr, nt, lh);
    // Shorter true channel than L_h.
    for hj in h.iter_mut() {
        for hi in hj.iter_mut() {
            hi[3] = Complex64::new(0.0, 0.0);
        }
    }
    let zeros = vec![vec![Complex64::new(0.0, 0.0); m]; nr];
    let y = sparse_observation(&frames, &h, &zeros);
    let taps = sparse_impulse_response(&y, &frames, &layout, 1).unwrap();
    for l in 0..lh {
        for j in 0..nr {
            for i in 0..nt {
                assert!((taps[l][(j, i)] - h[j][i][l]).norm() < 1e-8);
            }
        }
    }
    // CFR agrees with the DFT of the true taps.
    let truth = ChannelRealization::from_taps(
        (0..lh)
            .map(|l| CMatrix::from_fn(nr, nt, |j, i| h[j][i][l]))
            .collect(),
        m,
    )
    .unwrap();
    let est = sparse_ls_estimate(&y, &frames, &layout, 1).unwrap();
    assert!(max_error(&truth, &est) < 1e-8);
}

#[test]
fn sparse_ls_matches_a_pseudo_inverse_oracle() {
    let (m, lh, nt, nr) = (16, 4, 2, 2);
    let (frames, layout) = sparse_case(m, lh, nt);
    let c = sparse_system_matrix(&frames, &layout, 1).unwrap();
    // Normal equations, solved independently of the library's SVD path.
    let oracle = (c.adjoint() * &c).try_inverse().unwrap() * c.adjoint();
    let spacing = layout.spacing(m);
    let mut r = rng(12);
    for _ in 0..5 {
        let h = random_taps(&mut r, nr, nt, lh);
        let noise: Vec<Vec<Complex64>> = (0..nr)
            .map(|_| (0..m).map(|_| cgauss(&mut r, 0.3)).collect())
            .collect();
        let y = sparse_observation(&frames, &h, &noise);
        let taps = sparse_impulse_response(&y, &frames, &layout, 1).unwrap();
        for j in 0..nr {
            let rhs = CVector::from_fn(nt * lh, |row, _| {
                y[j].get(layout.starts[row / lh] + (row % lh) * spacing, 1)
            });
            let want = &oracle * rhs;
            for (idx, v) in want.iter().enumerate() {
                assert!((taps[idx % lh][(j, idx / lh)] - v).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn sparse_ls_noise_variance() {
    // With C^H C = L_h I each coefficient error has variance sigma^2 / L_h.
    let (m, lh, nt, nr) = (16, 4, 2, 1);
    let (frames, layout) = sparse_case(m, lh, nt);
    let solver = SparseSolver::new(&frames, &layout, 1).unwrap();
    let mut r = rng(13);
    let (var, trials) = (0.5, 4000);
    let mut acc = 0.0;
    for _ in 0..trials {
        let h = random_taps(&mut r, nr, nt, lh);
        let noise: Vec<Vec<Complex64>> = (0..nr)
            .map(|_| (0..m).map(|_| cgauss(&mut r, var)).collect())
            .collect();
        let taps = solver
            .impulse_response(&sparse_observation(&frames, &h, &noise))
            .unwrap();
        for l in 0..lh {
            for i in 0..nt {
                acc += (taps[l][(0, i)] - h[0][i][l]).norm_sqr();
            }
        }
    }
    let mse = acc / (trials * lh * nt) as f64;
    let want = var / lh as f64;
    assert!((mse / want - 1.0).abs() < 0.05, "{mse} vs {want}");
}

#[test]
fn sparse_ls_reduces_to_siso() {
    let (m, lh) = (16, 4);
    let (frames, layout) = sparse_case(m, lh, 1);
    assert_eq!(frames.len(), 1);
    let h = random_taps(&mut rng(14), 1, 1, lh);
    let y = sparse_observation(&frames, &h, &[vec![Complex64::new(0.0, 0.0); m]]);
    let taps = sparse_impulse_response(&y, &frames, &layout, 1).unwrap();
    for l in 0..lh {
        assert!((taps[l][(0, 0)] - h[0][0][l]).norm() < 1e-10);
    }
}

fn ofdm_receive(
    pre: &OfdmPreamble,
    ch: &ChannelRealization,
    noise: Option<(f64, u64)>,
) -> Vec<Vec<Vec<Complex64>>> {
    let mut rx = ch.convolve(&pre.modulate().unwrap()).unwrap();
    if let Some((sigma, seed)) = noise {
        let w = unit_noise(rx.len(), rx[0].len(), seed);
        for (r, w) in rx.iter_mut().zip(&w) {
            r.add_scaled(w, Complex64::new(sigma, 0.0));
        }
    }
    pre.demodulate(&rx).unwrap()
}

#[test]
fn cp_ofdm_is_exact_without_noise() {
    let m = 64;
    let mut r = rng(15);
    for (nt, nr) in [(1, 1), (2, 2)] {
        let taps: Vec<CMatrix> = (0..5).map(|_| random_matrix(&mut r, nr, nt)).collect();
        let ch = ChannelRealization::from_taps(taps, m).unwrap();
        let pre = OfdmPreamble::new(m, nt, 4, 3).unwrap();
        assert!(pre.covers(5));
        let est = ofdm_ls_estimate(&ofdm_receive(&pre, &ch, None), &pre).unwrap();
        assert!(max_error(&ch, &est) < 1e-10, "{nt}x{nr}");
    }
}

#[test]
fn cp_ofdm_ls_error_variance_is_sigma_squared() {
    let m = 16;
    let pre = OfdmPreamble::new(m, 1, 2, 9).unwrap();
    let mut r = rng(16);
    let sigma: f64 = 0.3;
    let trials = 10_000;
    let mut acc = 0.0;
    for t in 0..trials {
        let taps: Vec<CMatrix> = (0..3).map(|_| random_matrix(&mut r, 1, 1)).collect();
        let ch = ChannelRealization::from_taps(taps, m).unwrap();
        let est = ofdm_ls_estimate(&ofdm_receive(&pre, &ch, Some((sigma, t))), &pre).unwrap();
        acc += ch
            .cfr()
            .iter()
            .zip(est.values())
            .map(|(h, e)| (h - e.as_ref().unwrap()).norm_squared())
            .sum::<f64>();
    }
    let mse = acc / (trials * m as u64) as f64;
    assert!((mse / (sigma * sigma) - 1.0).abs() < 0.05, "{mse}");
}

#[test]
fn nmse_reference_cases() {
    let mut r = rng(17);
    let m = 8;
    let ch = ChannelRealization::from_taps(
        vec![random_matrix(&mut r, 2, 2), random_matrix(&mut r, 2, 2)],
        m,
    )
    .unwrap();
    let exact = CfrEstimate::new("t", ch.cfr().iter().cloned().map(Some).collect());
    assert_eq!(nmse(&ch, &exact).unwrap().value, 0.0);
    let zero = CfrEstimate::new("t", vec![Some(CMatrix::zeros(2, 2)); m]);
    assert!((nmse(&ch, &zero).unwrap().value - 1.0).abs() < 1e-12);
    let e: Vec<CMatrix> = (0..m)
        .map(|_| random_matrix(&mut r, 2, 2) * Complex64::new(0.1, 0.0))
        .collect();
    let shifted = CfrEstimate::new(
        "t",
        ch.cfr().iter().zip(&e).map(|(h, e)| Some(h + e)).collect(),
    );
    let want = e.iter().map(|x| x.norm_squared()).sum::<f64>()
        / ch.cfr().iter().map(|h| h.norm_squared()).sum::<f64>();
    assert!((nmse(&ch, &shifted).unwrap().value - want).abs() < 1e-12);
    let silent = ChannelRealization::from_taps(vec![CMatrix::zeros(1, 1)], m).unwrap();
    assert!(nmse(
        &silent,
        &CfrEstimate::new("t", vec![Some(CMatrix::zeros(1, 1)); m])
    )
    .is_err());
}

#[test]
fn degenerate_pilots_are_reported() {
    let y = vec![ComplexGrid::zeros(8, 2)];
    let mut c = vec![Complex64::new(1.0, 0.0); 8];
    c[5] = Complex64::new(0.0, 0.0);
    match iam_estimate(&y, 1, &c) {
        Err(oqam_chest::Error::DegeneratePilot { subcarrier, .. }) => assert_eq!(subcarrier, 5),
        other => panic!("{other:?}"),
    }
}
