use triad_bell::correlations::{ghz_tensor, singlet_tensor, NoiseLevel, TransverseWeight};
use triad_bell::experiments::{oracle_crosscheck, oracle_crosscheck_weighted, sample_stream};
use triad_bell::geometry::haar_random_triad;
use triad_bell::oracle::{
    build_ghz, build_singlet, estimate_correlations, exact_tensor, sample_records,
};

#[test]
fn closed_forms_match_the_simulator() {
    for n in 2..=5 {
        let r = oracle_crosscheck(n, 20, 1e-10, 11).unwrap();
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn halved_transverse_weight_is_rejected() {
    let r = oracle_crosscheck_weighted(3, 5, 1e-10, 0, TransverseWeight::Half).unwrap();
    assert!(!r.passed);
    assert!(r.max_discrepancy > 0.1);
}

#[test]
fn ghz_sampling_converges() {
    let n = 3;
    let mut rng = sample_stream(5, 0);
    let triads: Vec<_> = (0..n).map(|_| haar_random_triad(&mut rng)).collect();
    let noise = NoiseLevel::new(0.9).unwrap();
    let state = build_ghz(n).unwrap();
    let records = sample_records(&state, &triads, noise, 200_000, &mut rng).unwrap();
    let est = estimate_correlations(&records, n).unwrap();
    assert!(est.missing().is_empty());
    let exact = ghz_tensor(&triads, noise).unwrap();
    for i in 0..exact.values().len() {
        let settings: Vec<u8> = (0..n)
            .map(|k| ((i / 3usize.pow(k as u32)) % 3) as u8)
            .collect();
        let shots = est.shots(&settings) as f64;
        let dev = (est.correlation_at(i).unwrap() - exact.at(i)).abs();
        assert!(dev <= 5.0 / shots.sqrt(), "setting {settings:?}: {dev}");
    }
    let dense = exact_tensor(&state, &triads, noise).unwrap();
    for (a, b) in exact.values().iter().zip(dense.values()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn singlet_sampling_converges() {
    let mut rng = sample_stream(6, 0);
    let (a, b) = (haar_random_triad(&mut rng), haar_random_triad(&mut rng));
    let noise = NoiseLevel::new(0.95).unwrap();
    let records = sample_records(&build_singlet(), &[a, b], noise, 100_000, &mut rng).unwrap();
    let est = estimate_correlations(&records, 2).unwrap();
    let exact = singlet_tensor(&a, &b, noise);
    let dev = est.max_deviation(&exact).unwrap();
    let fewest = (0..9u8).map(|i| est.shots(&[i % 3, i / 3])).min().unwrap();
    assert!(dev <= 5.0 / (fewest as f64).sqrt(), "{dev}");
}
