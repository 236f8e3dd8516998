mod common;

use common::{dims, rng};
use isac_waveform::channel::{
    add_estimation_error, draw_taps, empirical_sensing_correlation, make_exponential_correlation,
    sensing_correlation_matrix, ChannelRealization, SystemDims, Tap, TapSet,
};
use isac_waveform::linalg::{self, CMatrix, C64};
use isac_waveform::IsacError;
use proptest::prelude::*;

fn table_ii() -> (TapSet, SystemDims) {
    let d = SystemDims::default();
    (TapSet::uniform(4, d.n_tx, 0.5).unwrap(), d)
}

/// Sample covariance of the columns of `H_0` over `n` draws.
fn column_covariance(taps: &TapSet, d: &SystemDims, n: usize, seed: u64) -> CMatrix {
    let mut r = rng(seed);
    let mut acc = linalg::zeros(d.n_tx, d.n_tx);
    for _ in 0..n {
        let chan = draw_taps(taps, d, &mut r).unwrap();
        let h = &chan.tap_matrices()[0];
        acc += h * h.adjoint();
    }
    acc.unscale((n * d.n_rx) as f64)
}

#[test]
fn exponential_correlation_examples() {
    assert_eq!(
        make_exponential_correlation(4, 0.0).unwrap(),
        linalg::identity(4)
    );
    let r = make_exponential_correlation(2, 0.5).unwrap();
    assert_eq!(r[(0, 1)], C64::new(0.5, 0.0));
    assert_eq!(r[(1, 1)], C64::new(1.0, 0.0));
    let (values, _) =
        linalg::hermitian_eigen(&make_exponential_correlation(4, 0.5).unwrap()).unwrap();
    assert!(values[3] > 0.0);
    for bad in [-0.1, 1.0, f64::NAN] {
        assert!(matches!(
            make_exponential_correlation(3, bad),
            Err(IsacError::InvalidParameter { .. })
        ));
    }
}

#[test]
fn white_tap_covariance_is_identity() {
    let d = SystemDims {
        n_paths_comm: 1,
        ..dims(1, 4, 4, 4)
    };
    let taps = TapSet::uniform(1, 4, 0.0).unwrap();
    let cov = column_covariance(&taps, &d, 100_000, 1);
    let err = linalg::frobenius_rel_error(&cov, &linalg::identity(4));
    assert!(err < 0.02, "relative error {err}");
}

#[test]
fn correlated_tap_covariance_matches_r() {
    let d = SystemDims {
        n_paths_comm: 1,
        ..dims(1, 4, 4, 4)
    };
    let taps = TapSet::uniform(1, 4, 0.5).unwrap();
    let cov = column_covariance(&taps, &d, 100_000, 2);
    let r = make_exponential_correlation(4, 0.5).unwrap();
    let err = linalg::frobenius_rel_error(&cov, &r);
    assert!(err < 0.02, "relative error {err}");
}

#[test]
fn zero_power_gives_zero_channel() {
    let d = dims(8, 2, 2, 4);
    let corr = make_exponential_correlation(2, 0.3).unwrap();
    let taps = TapSet::new(
        (0..4)
            .map(|l| Tap::new(l, corr.clone(), 0.0).unwrap())
            .collect(),
    )
    .unwrap();
    let chan = draw_taps(&taps, &d, &mut rng(3)).unwrap();
    assert!(chan
        .freq_response()
        .iter()
        .all(|h| h.iter().all(|z| *z == C64::new(0.0, 0.0))));
}

#[test]
fn non_psd_correlation_is_rejected() {
    let mut bad = linalg::identity(2);
    bad[(0, 1)] = C64::new(2.0, 0.0);
    bad[(1, 0)] = C64::new(2.0, 0.0);
    assert!(matches!(
        Tap::new(0, bad, 1.0),
        Err(IsacError::InvalidInput(_))
    ));
}

#[test]
fn single_tap_blocks_are_identity() {
    let d = SystemDims {
        n_paths_sense: 1,
        ..dims(6, 3, 2, 4)
    };
    let sigma = sensing_correlation_matrix(&TapSet::uniform(1, 3, 0.0).unwrap(), &d).unwrap();
    for p1 in 0..6 {
        for p2 in 0..6 {
            assert!(
                linalg::frobenius_rel_error(&sigma.block(p1, p2), &linalg::identity(3)) < 1e-15
            );
        }
    }
}

#[test]
fn half_band_block_vanishes() {
    let (taps, d) = table_ii();
    let sigma = sensing_correlation_matrix(&taps, &d).unwrap();
    let half = d.n_subcarriers / 2;
    for p in 0..half {
        assert!(linalg::frobenius(&sigma.block(p, p + half)) < 1e-12);
    }
}

#[test]
fn diagonal_blocks_are_common_with_trace_nt() {
    let (taps, d) = table_ii();
    let sigma = sensing_correlation_matrix(&taps, &d).unwrap();
    let b0 = sigma.block(0, 0);
    assert!((b0.trace().re - d.n_tx as f64).abs() < 1e-12);
    for p in 1..d.n_subcarriers {
        assert_eq!(sigma.block(p, p), b0);
    }
    let blockdiag = sigma.blockdiag();
    assert_eq!(blockdiag.view((0, 0), (4, 4)).into_owned(), b0);
    assert!(linalg::frobenius(&blockdiag.view((0, 4), (4, 4)).into_owned()) == 0.0);
}

#[test]
fn sensing_correlation_is_hermitian_psd() {
    let (taps, d) = table_ii();
    let sigma = sensing_correlation_matrix(&taps, &d).unwrap();
    assert_eq!(linalg::hermitian_defect(sigma.full()), 0.0);
    let (values, _) = linalg::hermitian_eigen(sigma.full()).unwrap();
    assert!(*values.last().unwrap() >= -1e-10 * values[0]);
}

/// For `L` equal taps the block norm follows a Dirichlet kernel: it decays
/// over the main lobe up to the first null at `N_c/L`, and no later offset
/// exceeds the zero-offset block.
#[test]
fn subcarrier_correlation_decays_with_spacing() {
    let (taps, d) = table_ii();
    let sigma = sensing_correlation_matrix(&taps, &d).unwrap();
    let norms: Vec<f64> = (0..=d.n_subcarriers / 2)
        .map(|k| linalg::frobenius(&sigma.block(0, k)))
        .collect();
    let first_null = d.n_subcarriers / taps.taps().len();
    for w in norms[..=first_null].windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{norms:?}");
    }
    assert!(norms[first_null] < 1e-12);
    assert!(norms.iter().all(|&n| n <= norms[0] + 1e-12));
}

#[test]
fn empirical_matches_analytic() {
    let (taps, d) = table_ii();
    let analytic = sensing_correlation_matrix(&taps, &d).unwrap();
    let empirical = empirical_sensing_correlation(&taps, &d, 10_000, &mut rng(4)).unwrap();
    let err = linalg::frobenius_rel_error(&empirical, analytic.full());
    assert!(err < 0.03, "relative error {err}");
}

#[test]
fn estimation_error_variance() {
    let zero = ChannelRealization::from_frequency(vec![linalg::zeros(2, 2); 2]).unwrap();
    let mut r = rng(5);
    let (mut sum, mut count) = (0.0, 0usize);
    for _ in 0..100_000 {
        let noisy = add_estimation_error(&zero, 0.01, &mut r).unwrap();
        for h in noisy.freq_response() {
            sum += h.iter().map(|z| z.norm_sqr()).sum::<f64>();
            count += h.len();
        }
    }
    let var = sum / count as f64;
    assert!((var - 0.01).abs() < 0.03 * 0.01, "variance {var}");
    assert!(zero
        .freq_response()
        .iter()
        .all(|h| linalg::frobenius(h) == 0.0));
}

#[test]
fn estimation_error_edge_cases() {
    let d = dims(4, 2, 2, 4);
    let chan = common::random_channel(&d, &mut rng(6));
    let same = add_estimation_error(&chan, 0.0, &mut rng(7)).unwrap();
    assert_eq!(same.freq_response(), chan.freq_response());
    assert_eq!(same.tap_matrices(), chan.tap_matrices());
    assert!(matches!(
        add_estimation_error(&chan, -0.01, &mut rng(7)),
        Err(IsacError::InvalidParameter { .. })
    ));
}

#[test]
fn powers_are_renormalized() {
    let mut taps = TapSet::exponential(&[1.0, 1.0], 2, 0.2).unwrap();
    assert!(taps.normalize_powers());
    assert!((taps.total_power() - 1.0).abs() < 1e-15);
    assert!(!taps.normalize_powers());
}

#[test]
fn taps_must_fit_in_the_symbol() {
    let d = dims(2, 2, 2, 4);
    let taps = TapSet::uniform(4, 2, 0.0).unwrap();
    assert!(draw_taps(&taps, &d, &mut rng(8)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_consistency(seed in any::<u64>(), nc in 4usize..24, nt in 1usize..5, nr in 1usize..4) {
        let d = dims(nc, nt, nr, 4);
        let chan = common::random_channel(&d, &mut rng(seed));
        prop_assert!(chan.dft_consistency_error().unwrap() < 1e-12);
    }

    #[test]
    fn analytic_blocks_follow_the_formula(
        seed in any::<u64>(), nc in 4usize..16, p1 in 0usize..16, p2 in 0usize..16,
    ) {
        let (p1, p2) = (p1 % nc, p2 % nc);
        let d = dims(nc, 3, 2, 4);
        let mut r = rng(seed);
        let powers: Vec<f64> = (0..4).map(|_| rand::Rng::random_range(&mut r, 0.05..1.0)).collect();
        let taps = TapSet::exponential(&powers, 3, 0.4).unwrap();
        let sigma = sensing_correlation_matrix(&taps, &d).unwrap();
        let mut want = linalg::zeros(3, 3);
        for tap in taps.taps() {
            let angle = -2.0 * std::f64::consts::PI * (tap.delay() as f64) * (p1 as f64 - p2 as f64)
                / nc as f64;
            want += tap.spatial_corr() * (C64::from_polar(1.0, angle) * tap.power());
        }
        prop_assert!(linalg::frobenius(&(sigma.block(p1, p2) - want)) < 1e-12);
    }
}
