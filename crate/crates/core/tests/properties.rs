use std::collections::HashSet;

use proptest::prelude::*;
use proptest::sample::subsequence;

use shoebox::ann::{NetShape, SurrogateNet};
use shoebox::dataset::{ConfigTable, LabelFile, LabeledDataset};
use shoebox::scene::{
    build_grid, DesignSpace, Divisions, GridSpec, Orientation, RoomConfig, Shading, FEATURE_COUNT, IDX_ORIENTATION,
    IDX_REFLECTANCE,
};
use shoebox::shap::{exact_shap, FeatureGrouping, FnPredictor};
use shoebox::train::split;
use shoebox::views::{assess, glazing_solid_angle, ViewSettings};
use shoebox::geometry::Vec3;

fn nonempty<T: Clone + std::fmt::Debug + 'static>(items: Vec<T>) -> impl Strategy<Value = Vec<T>> {
    let n = items.len();
    subsequence(items, 1..=n)
}

prop_compose! {
    fn small_space()(
        orientations in nonempty(Orientation::ALL.to_vec()),
        dimensions in nonempty(vec![(3.0, 4.0), (5.0, 6.0), (7.0, 8.0), (8.0, 10.0)]),
        reflectances in nonempty(vec![0.2, 0.45, 0.7]),
        shadings in nonempty(vec![Shading::None, Shading::HorizontalLouvre15cm]),
        sill_heights in nonempty(vec![0.5, 0.8, 1.1]),
        window_heights in nonempty(vec![1.2, 1.8, 2.4]),
        divisions in nonempty(vec![Divisions::OneFullWidth, Divisions::ThreeEqual]),
    ) -> DesignSpace {
        DesignSpace { orientations, dimensions, reflectances, shadings, sill_heights, window_heights, divisions, ..DesignSpace::table1() }
    }
}

prop_compose! {
    fn table1_room()(
        o in 0usize..4,
        width in 3.0f64..8.0,
        depth in 4.0f64..10.0,
        reflectance in 0.2f64..0.7,
        louvre in any::<bool>(),
        sill in 0.5f64..1.1,
        window in 1.2f64..2.4,
        three in any::<bool>(),
    ) -> RoomConfig {
        RoomConfig {
            width,
            depth,
            height: 3.5,
            orientation: Orientation::ALL[o],
            reflectance,
            shading: if louvre { Shading::HorizontalLouvre15cm } else { Shading::None },
            sill_height: sill,
            window_height: window,
            divisions: if three { Divisions::ThreeEqual } else { Divisions::OneFullWidth },
            glazing_transmittance: 0.85,
        }
    }
}

fn unit_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_matches_cardinality(space in small_space()) {
        let configs = space.enumerate().unwrap();
        prop_assert_eq!(configs.len(), space.cardinality());
        let product = space.orientations.len() * space.dimensions.len() * space.reflectances.len()
            * space.shadings.len() * space.sill_heights.len() * space.window_heights.len() * space.divisions.len();
        prop_assert_eq!(configs.len(), product);
        let keys: HashSet<String> = configs.iter().map(|c| format!("{c:?}")).collect();
        prop_assert_eq!(keys.len(), configs.len());
    }

    #[test]
    fn space_text_round_trip(space in small_space()) {
        prop_assert_eq!(DesignSpace::parse(&space.to_text()).unwrap(), space);
    }

    #[test]
    fn encoding_is_one_hot_and_bounded(c in table1_room()) {
        let x = DesignSpace::table1().norm_bounds().encode(&c).features;
        let hot: Vec<f64> = IDX_ORIENTATION.iter().map(|&i| x.0[i]).collect();
        prop_assert_eq!(hot.iter().sum::<f64>(), 1.0);
        prop_assert_eq!(hot[c.orientation.index()], 1.0);
        prop_assert!(x.0.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn split_is_deterministic_partition(n in 2usize..500, fraction in 0.05f64..0.95, seed in any::<u64>()) {
        let (a, b) = split(n, fraction, seed).unwrap();
        prop_assert_eq!(a.len(), (n as f64 * fraction).floor() as usize);
        prop_assert_eq!(split(n, fraction, seed).unwrap(), (a.clone(), b.clone()));
        let mut all: Vec<usize> = a.into_iter().chain(b).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn views_ignore_reflectance_shading_orientation(c in table1_room(), o in 0usize..4, r in 0.2f64..0.7) {
        let grid = build_grid(&c, &GridSpec::default()).unwrap();
        let base = assess(&c, &grid, &ViewSettings::default()).unwrap();
        let other = RoomConfig {
            orientation: Orientation::ALL[o],
            reflectance: r,
            shading: match c.shading { Shading::None => Shading::HorizontalLouvre15cm, _ => Shading::None },
            ..c
        };
        let grid2 = build_grid(&other, &GridSpec::default()).unwrap();
        let moved = assess(&other, &grid2, &ViewSettings::default()).unwrap();
        prop_assert_eq!(base.fractions().map(f64::to_bits), moved.fractions().map(f64::to_bits));
    }

    #[test]
    fn taller_windows_never_reduce_view_fractions(c in table1_room(), extra in 0.0f64..0.6) {
        let taller = RoomConfig { window_height: (c.window_height + extra).min(c.height - c.sill_height), ..c };
        let grid = build_grid(&c, &GridSpec::default()).unwrap();
        let a = assess(&c, &grid, &ViewSettings::default()).unwrap();
        let b = assess(&taller, &grid, &ViewSettings::default()).unwrap();
        prop_assert!(b.view_depth_fraction >= a.view_depth_fraction);
        prop_assert!(b.view_factor_fraction >= a.view_factor_fraction);
        prop_assert_eq!(b.view_range_fraction, a.view_range_fraction);
    }

    #[test]
    fn solid_angle_shrinks_with_distance(c in table1_room(), x in 0.0f64..1.0, y in 0.3f64..3.0, step in 0.1f64..2.0) {
        let rects = c.window_rects();
        let px = x * c.width;
        let near = glazing_solid_angle(Vec3::new(px, y, 1.2), &rects).unwrap();
        let far = glazing_solid_angle(Vec3::new(px, y + step, 1.2), &rects).unwrap();
        prop_assert!(far <= near + 1e-12);
        prop_assert!(near <= 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn shap_efficiency_on_random_nets(seed in any::<u64>(), x in unit_vec(FEATURE_COUNT), bg in prop::collection::vec(unit_vec(FEATURE_COUNT), 1..12)) {
        let net = SurrogateNet::seeded(NetShape::default(), DesignSpace::table1().norm_bounds(), seed);
        let e = exact_shap(&net, &x, &bg, &FeatureGrouping::design_variables()).unwrap();
        prop_assert!(e.efficiency_gap() < 1e-6, "gap {}", e.efficiency_gap());
    }

    #[test]
    fn shap_null_player_is_exactly_zero(seed in any::<u64>(), x in unit_vec(FEATURE_COUNT), bg in prop::collection::vec(unit_vec(FEATURE_COUNT), 1..8)) {
        let mut net = SurrogateNet::seeded(NetShape::default(), DesignSpace::table1().norm_bounds(), seed);
        for h in 0..net.hidden {
            net.w1[h * net.inputs + IDX_REFLECTANCE] = 0.0;
        }
        let grouping = FeatureGrouping::design_variables();
        let e = exact_shap(&net, &x, &bg, &grouping).unwrap();
        let g = grouping.names().iter().position(|n| *n == "reflectance").unwrap();
        prop_assert!(e.phi.iter().all(|row| row[g] == 0.0));
    }

    #[test]
    fn shap_linear_closed_form(w in prop::collection::vec(-3.0f64..3.0, 6), x in unit_vec(6), bg in prop::collection::vec(unit_vec(6), 1..10)) {
        let weights = w.clone();
        let p = FnPredictor { outputs: 1, f: move |z: &[f64]| vec![weights.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()] };
        let g = FeatureGrouping::per_index(&["a", "b", "c", "d", "e", "f"]);
        let e = exact_shap(&p, &x, &bg, &g).unwrap();
        for i in 0..6 {
            let mean = bg.iter().map(|b| b[i]).sum::<f64>() / bg.len() as f64;
            prop_assert!((e.phi[0][i] - w[i] * (x[i] - mean)).abs() < 1e-9);
        }
    }

    #[test]
    fn shap_symmetry(a in 0.0f64..1.0, rest in unit_vec(3), bg_pairs in prop::collection::vec((0.0f64..1.0, unit_vec(3)), 1..8)) {
        // predictor symmetric in features 0 and 1; x and background agree on both
        let p = FnPredictor { outputs: 1, f: |z: &[f64]| vec![(z[0] * z[1]).sqrt() + z[0] + z[1] + z[2] * z[3] - z[4]] };
        let x: Vec<f64> = [a, a].iter().chain(&rest).copied().collect();
        let bg: Vec<Vec<f64>> = bg_pairs.iter().map(|(v, r)| [*v, *v].iter().chain(r).copied().collect()).collect();
        let e = exact_shap(&p, &x, &bg, &FeatureGrouping::per_index(&["a", "b", "c", "d", "e"])).unwrap();
        prop_assert!((e.phi[0][0] - e.phi[0][1]).abs() < 1e-9);
    }

    #[test]
    fn parsers_never_panic(text in "\\PC{0,400}") {
        let _ = DesignSpace::parse(&text);
        let _ = ConfigTable::parse(&text);
        let _ = LabelFile::parse(&text);
        let _ = LabeledDataset::parse(&text);
        let _ = SurrogateNet::parse(&text);
    }

    #[test]
    fn model_text_round_trip(seed in any::<u64>()) {
        let net = SurrogateNet::seeded(NetShape::default(), DesignSpace::table1().norm_bounds(), seed);
        let back = SurrogateNet::parse(&net.to_text()).unwrap();
        prop_assert_eq!(back.digest(), net.digest());
        prop_assert_eq!(back, net);
    }
}

#[test]
fn encoding_is_injective_on_table1() {
    let norm = DesignSpace::table1().norm_bounds();
    let configs = DesignSpace::table1().enumerate().unwrap();
    let keys: HashSet<Vec<u64>> = configs
        .iter()
        .map(|c| norm.encode(c).features.0.iter().map(|v| v.to_bits()).collect())
        .collect();
    assert_eq!(keys.len(), 2880);
}
