use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seakeep_core::seaway::{build_bimodal_field, Discretization};
use seakeep_core::voyage::{
    ape, cross_correlation_peak, gaussian_kde, great_circle_route, Bandwidth, LatLon,
    KDE_GRID_POINTS,
};
use seakeep_core::{BimodalSeaState, SpectrumParams, Standardizer};

fn sea() -> impl Strategy<Value = BimodalSeaState> {
    (0.5..8.0f64, 4.0..16.0f64, 0.0..360.0f64, 0.0..3.0f64, 8.0..18.0f64, 0.0..360.0f64).prop_map(
        |(h1, t1, d1, h2, t2, d2)| {
            BimodalSeaState::new(
                SpectrumParams::new(h1, t1, d1).unwrap(),
                SpectrumParams::new(h2, t2, d2).unwrap(),
            )
            .unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equal_energy_field_carries_total_m0(s in sea(), n in 5usize..120, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = build_bimodal_field(&s, n, Discretization::EqualEnergy, 0.0, &mut rng).unwrap();
        prop_assert!((f.variance() / s.total_m0() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kde_integrates_to_one(xs in prop::collection::vec(-50.0..50.0f64, 2..300)) {
        prop_assume!(xs.iter().any(|v| *v != xs[0]));
        let k = gaussian_kde(&xs, Bandwidth::Silverman, KDE_GRID_POINTS).unwrap();
        prop_assert!((k.mass() - 1.0).abs() < 1e-9);
        prop_assert!(k.pdf.iter().all(|p| *p >= 0.0));
    }

    #[test]
    fn standardizer_round_trips(rows in prop::collection::vec((-1e3..1e3f64, 0.1..5.0f64), 4..40)) {
        let mut input = Vec::new();
        for (i, (a, b)) in rows.iter().enumerate() {
            input.extend([*a, *b * (i as f64 + 1.0)]);
        }
        let target: Vec<f64> = input.iter().map(|v| v * 0.5 + 1.0).collect();
        prop_assume!(input.chunks(2).any(|r| r[0] != input[0]));
        let st = Standardizer::fit(&[&input], &[&target], 2, 2).unwrap();
        let back = st.invert_input(&st.apply_input(&input).unwrap()).unwrap();
        for (a, b) in input.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn snapped_route_is_never_shorter(
        lat1 in -60.0..60.0f64, lon1 in -170.0..170.0f64,
        lat2 in -60.0..60.0f64, lon2 in -170.0..170.0f64,
    ) {
        let a = LatLon::new(lat1, lon1).unwrap();
        let b = LatLon::new(lat2, lon2).unwrap();
        prop_assume!((lat1 - lat2).abs() + (lon1 - lon2).abs() > 1.0);
        let r = great_circle_route(a, b).unwrap();
        let back = great_circle_route(b, a).unwrap();
        prop_assert!((r.distance_km - back.distance_km).abs() < 1e-6);
        prop_assert!(r.snapped_length_km >= r.distance_km - 1e-9);
        prop_assert!(!r.waypoints.is_empty());
    }

    #[test]
    fn percentage_error_is_symmetric_in_sign(x in -1e3..1e3f64, r in 0.01..1e3f64) {
        let e = ape(x, r).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert!((ape(-x, -r).unwrap() - e).abs() < 1e-9 * (1.0 + e));
    }

    #[test]
    fn shifted_copy_peaks_at_its_shift(shift in 0usize..20, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base: Vec<f64> = (0..400).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = base[shift..shift + 300].to_vec();
        let b = base[..300].to_vec();
        let (r, lag) = cross_correlation_peak(&a, &b, 30).unwrap();
        prop_assert_eq!(lag, -(shift as i64));
        prop_assert!(r > 0.8);
    }
}
