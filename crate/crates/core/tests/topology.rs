use proptest::prelude::*;

use topofeat::complex::{build_alpha, build_cech, Convention};
use topofeat::metrics::bottleneck;
use topofeat::persistence::diagram;
use topofeat::pointcloud::{sample_annulus, PointCloud};

// Alpha and Čech filtrations have the same persistent homology.
fn alpha_matches_cech(pc: &PointCloud) {
    let alpha = diagram(&build_alpha(pc).unwrap());
    let cech = diagram(&build_cech(pc, 2, f64::INFINITY).unwrap())
        .rescaled(Convention::AlphaSquaredRadius)
        .unwrap();
    for dim in 0..=1 {
        let d = bottleneck(&alpha, &cech, dim);
        assert!(d < 1e-9, "dim {dim}: {d}");
    }
}

#[test]
fn annulus_alpha_equals_cech() {
    for seed in 0..3 {
        alpha_matches_cech(&sample_annulus(40, 0.5, 1.0, seed).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn random_clouds_alpha_equals_cech(coords in prop::collection::vec((-5f64..5.0, -5f64..5.0), 3..14)) {
        let pc = PointCloud::from_xy(&coords).unwrap();
        prop_assume!(build_alpha(&pc).is_ok());
        alpha_matches_cech(&pc);
    }
}

fn dominant_h1(pc: &PointCloud) -> (f64, f64) {
    diagram(&build_alpha(pc).unwrap())
        .in_dim(1)
        .filter(|p| p.death.is_finite())
        .map(|p| (p.death - p.birth, p.death))
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
}

#[test]
fn disc_and_annulus_fixtures() {
    let (disc, _) = dominant_h1(&topofeat::pointcloud::sample_disc(200, 42));
    let (annulus, death) = dominant_h1(&sample_annulus(200, 0.5, 1.0, 42).unwrap());
    assert!(disc < 0.05, "{disc}");
    assert!((death - 0.25).abs() <= 0.1, "{death}");
    assert!(annulus >= 5.0 * disc);
}
