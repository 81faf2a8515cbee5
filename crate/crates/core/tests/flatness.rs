use std::f64::consts::PI;

use nalgebra::DVector;
use proptest::prelude::*;
use willmore_core::flatness::{
    best_fit_plane, cone_violations, flatness_report, lipschitz_decompose, sample_surface, tilt_excess,
};
use willmore_core::geom::catalog::graph_chart;
use willmore_core::geom::{EdgeKind, GraphFn, Plane2, Surface};

fn linear(slope: f64) -> Surface {
    Surface::new(
        "linear",
        vec![graph_chart(GraphFn::Linear { slope }, 3.0, EdgeKind::Cutoff)],
    )
}

#[test]
fn tilt_excess_of_a_slanted_plane() {
    // |p_S - p_T|^2 = 2 sin^2 for planes sharing a line, over a unit disk of area pi
    let zero = DVector::zeros(3);
    for s in [0.1, 0.5, 1.0] {
        let smp = sample_surface(&linear(s), &zero, 1.0, 0.01).unwrap();
        let e = tilt_excess(&smp, &zero, 1.0, &Plane2::horizontal(zero.clone())).unwrap();
        let want = 2.0 * PI * s * s / (1.0 + s * s);
        assert!((e.value - want).abs() < 0.01 * want, "slope {s}: {} vs {want}", e.value);
    }
}

#[test]
fn a_plane_fits_itself() {
    let zero = DVector::zeros(3);
    let smp = sample_surface(&linear(0.7), &zero, 1.0, 0.02).unwrap();
    let fit = best_fit_plane(&smp, &zero, 1.0).unwrap();
    let n = DVector::from_vec(vec![-0.7, 0.0, 1.0]).normalize();
    for f in &fit.plane.frame {
        assert!(f.dot(&n).abs() < 1e-9);
    }
    assert!(!fit.ambiguous);
    let r = flatness_report(&smp, &zero, 1.0).unwrap();
    assert!(r.semi_reifenberg < 1e-9);
    assert!(r.reifenberg_two_sided <= r.hausdorff_error_bound);
    assert!(r.tilt_excess.unwrap() < 1e-12);
}

#[test]
fn coarse_samples_are_refused() {
    let zero = DVector::zeros(3);
    let smp = sample_surface(&linear(0.0), &zero, 1.0, 0.2).unwrap();
    assert!(flatness_report(&smp, &zero, 0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shallow_graphs_are_entirely_good(l in 0.2f64..0.9, frac in 0.0f64..0.95) {
        let slope = frac * l / (1.0 - l * l).sqrt();
        let zero = DVector::zeros(3);
        let smp = sample_surface(&linear(slope), &zero, 1.0, 0.08).unwrap();
        let d = lipschitz_decompose(&smp, &zero, 1.0, &Plane2::horizontal(zero.clone()), l).unwrap();
        prop_assert!(d.bad.is_empty());
        prop_assert_eq!(cone_violations(&smp, &d), 0);
        prop_assert!(d.measured_lip <= d.lip_bound * (1.0 + 1e-9));
    }
}
