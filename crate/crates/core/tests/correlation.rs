use proptest::prelude::*;
use qvort_core::correlation::{point_correlation_2d, Bins, CorrelationFunction};
use qvort_core::vortex::PointVortex;
use qvort_core::GridSpec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn grid() -> GridSpec {
    GridSpec::new(2, 256, 1.0).unwrap()
}

fn points(seed: u64, n: usize) -> Vec<PointVortex> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|i| PointVortex::new([rng.random::<f64>(), rng.random::<f64>()], if i % 2 == 0 { 1 } else { -1 })).collect()
}

fn both(v: &[PointVortex], bins: &Bins) -> (CorrelationFunction, CorrelationFunction) {
    let g = grid();
    (point_correlation_2d(v, &g, bins, false).unwrap(), point_correlation_2d(v, &g, bins, true).unwrap())
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn invariant_under_translation_relabeling_and_conjugation(seed in any::<u64>(), sx in 0.0f64..1.0, sy in 0.0f64..1.0) {
        let g = grid();
        let bins = Bins::logarithmic(g.spacing(), 0.5, 16).unwrap();
        let v = points(seed, 120);
        let (xi, eta) = both(&v, &bins);

        let moved: Vec<_> = v
            .iter()
            .map(|p| PointVortex::new([(p.position[0] + sx).rem_euclid(1.0), (p.position[1] + sy).rem_euclid(1.0)], p.charge))
            .collect();
        let (xi_t, eta_t) = both(&moved, &bins);
        prop_assert_eq!(&xi.pair_counts, &xi_t.pair_counts);
        prop_assert!(close(&xi.values, &xi_t.values) && close(&eta.values, &eta_t.values));

        let mut shuffled = v.clone();
        shuffled.shuffle(&mut ChaCha20Rng::seed_from_u64(seed ^ 1));
        let (xi_s, eta_s) = both(&shuffled, &bins);
        prop_assert!(close(&xi.values, &xi_s.values) && close(&eta.values, &eta_s.values));

        let flipped: Vec<_> = v.iter().map(|p| PointVortex::new(p.position, -p.charge)).collect();
        prop_assert!(close(&eta.values, &both(&flipped, &bins).1.values));

        for b in 0..bins.len() {
            prop_assert!(eta.raw[b].abs() <= xi.raw[b] + 1e-12);
        }
    }
}

#[test]
fn uniform_points_sit_on_the_null() {
    let g = grid();
    let bins = Bins::logarithmic(0.01, 0.5, 12).unwrap();
    let parts: Vec<_> = (0..8).map(|s| both(&points(100 + s, 400), &bins)).collect();
    let xi = CorrelationFunction::pool(&parts.iter().map(|p| p.0.clone()).collect::<Vec<_>>()).unwrap();
    let eta = CorrelationFunction::pool(&parts.iter().map(|p| p.1.clone()).collect::<Vec<_>>()).unwrap();
    for c in [&xi, &eta] {
        let z: Vec<f64> = c.values.iter().zip(&c.std_errors).map(|(v, s)| v / s).collect();
        assert!(z.iter().all(|z| z.abs() < 4.0), "{z:?}");
    }
    assert!(point_correlation_2d(&points(1, 1), &g, &bins, false).is_err());
    assert!(point_correlation_2d(&points(1, 10), &g, &Bins::new(vec![0.1, 0.6]).unwrap(), false).is_err());
}

#[test]
fn pooling_copies_is_idempotent() {
    let bins = Bins::logarithmic(0.01, 0.5, 10).unwrap();
    let (xi, _) = both(&points(3, 200), &bins);
    let p = CorrelationFunction::pool(&[xi.clone(), xi.clone(), xi.clone()]).unwrap();
    assert!(close(&p.values, &xi.values));
    assert!(p.std_errors.iter().zip(&xi.std_errors).all(|(a, b)| (a - b / 3f64.sqrt()).abs() < 1e-12 * b));
    assert!(CorrelationFunction::pool(&[]).is_err());
}
