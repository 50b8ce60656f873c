use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix3;
use proptest::prelude::*;
use stressuq::perturb::{
    build_perturbed_stress, perturb_point_corner, project_to_triangle, PerturbationSpec,
};
use stressuq::rotation::{
    angles_from_matrix, apply_rotation, extract_angles, rotation_matrix, TaitBryanAngles,
};
use stressuq::tensor::{
    decompose, from_barycentric, is_realizable, reconstruct, to_barycentric, BarycentricPoint,
    Corner, ReynoldsStress, K_FLOOR,
};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

fn angles() -> impl Strategy<Value = TaitBryanAngles> {
    (-PI..PI, -FRAC_PI_2 + 1e-3..FRAC_PI_2 - 1e-3, -PI..PI)
        .prop_map(|(a, b, g)| TaitBryanAngles::new(a, b, g))
}

/// `Q diag(mu) Q^T` with principal stresses `mu`.
fn tensor(mu: [f64; 3], q: &Matrix3<f64>) -> ReynoldsStress {
    ReynoldsStress::from_matrix(&(q * Matrix3::from_diagonal(&mu.into()) * q.transpose()))
}

fn realizable() -> impl Strategy<Value = ReynoldsStress> {
    ([0.0..2.0, 0.0..2.0, 0.01..2.0], angles()).prop_map(|(mu, a)| tensor(mu, &rotation_matrix(&a)))
}

/// Realizable tensor with well separated principal stresses.
fn distinct() -> impl Strategy<Value = ReynoldsStress> {
    (0.0..0.5, 0.1..0.5, 0.1..0.5, angles())
        .prop_map(|(a, b, c, ang)| tensor([a, a + b, a + b + c], &rotation_matrix(&ang)))
}

/// Roots of `x^3 - (tr a^2 / 2) x - det a` for traceless symmetric `a`,
/// descending, by the trigonometric form of Cardano's formula.
fn cubic_roots(a: &Matrix3<f64>) -> [f64; 3] {
    let p = 0.5 * (a * a).trace();
    let q = a.determinant();
    if p < 1e-300 {
        return [0.0; 3];
    }
    let m = 2.0 * (p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let t = arg.acos() / 3.0;
    let mut r = [0, 1, 2].map(|k| m * (t - 2.0 * PI * k as f64 / 3.0).cos());
    r.sort_by(|x, y| y.total_cmp(x));
    r
}

/// Anisotropy built by hand from the six components.
fn anisotropy(t: &ReynoldsStress) -> Matrix3<f64> {
    let k = 0.5 * (t.uu + t.vv + t.ww);
    Matrix3::new(
        t.uu / k - 2.0 / 3.0,
        t.uv / k,
        t.uw / k,
        t.uv / k,
        t.vv / k - 2.0 / 3.0,
        t.vw / k,
        t.uw / k,
        t.vw / k,
        t.ww / k - 2.0 / 3.0,
    )
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn eigenvalues_match_the_characteristic_polynomial(t in realizable()) {
        let eig = decompose(&t, K_FLOOR);
        let roots = cubic_roots(&anisotropy(&t));
        for i in 0..3 {
            prop_assert!((eig.lambda[i] - roots[i]).abs() <= 1e-9, "{:?} vs {:?}", eig.lambda, roots);
        }
        prop_assert!(eig.lambda.iter().sum::<f64>().abs() <= 1e-12);
        prop_assert!(eig.lambda[2] >= -2.0 / 3.0 - 1e-12 && eig.lambda[0] <= 4.0 / 3.0 + 1e-12);
    }

    #[test]
    fn frames_are_orthonormal_and_right_handed(t in realizable()) {
        let f = decompose(&t, K_FLOOR).frame;
        prop_assert!((f.transpose() * f - Matrix3::identity()).norm() <= 1e-12);
        prop_assert!((f.determinant() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn decompose_then_reconstruct_is_identity(t in realizable()) {
        let back = reconstruct(&decompose(&t, K_FLOOR));
        prop_assert!(back.max_abs_diff(&t) <= 1e-10 * t.norm().max(1.0));
    }

    #[test]
    fn barycentric_round_trip(t in realizable()) {
        let eig = decompose(&t, K_FLOOR);
        let x = to_barycentric(&eig);
        prop_assert!((x.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(x.is_inside(1e-10));
        let lambda = from_barycentric(&x);
        for i in 0..3 {
            prop_assert!((lambda[i] - eig.lambda[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn angle_round_trip(a in angles()) {
        let r = rotation_matrix(&a);
        prop_assert!((r.transpose() * r - Matrix3::identity()).norm() <= 1e-12);
        prop_assert!((r.determinant() - 1.0).abs() <= 1e-12);
        let b = angles_from_matrix(&r);
        for (x, y) in a.to_array().iter().zip(b.to_array()) {
            prop_assert!((x - y).abs() <= 1e-9, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn extracted_rotation_carries_one_frame_onto_the_other(a in angles(), b in angles()) {
        let from = rotation_matrix(&a);
        let to = rotation_matrix(&b);
        let ang = extract_angles(&from, &to).unwrap();
        prop_assert!((apply_rotation(&from, &ang) - to).norm() <= 1e-9);
    }

    #[test]
    fn realizable_iff_inside_the_triangle(
        mu in [-0.5..1.0f64, -0.5..1.0, 0.05..1.0],
        a in angles(),
    ) {
        // stay clear of the boundary, where both tests are tolerance-limited
        prop_assume!(mu.iter().all(|m| m.abs() > 1e-6));
        let t = tensor(mu, &rotation_matrix(&a));
        prop_assume!(t.tke() > 0.05);
        let inside = to_barycentric(&decompose(&t, K_FLOOR)).is_inside(1e-10);
        prop_assert_eq!(is_realizable(&t, 1e-10), inside);
    }

    #[test]
    fn every_mode_keeps_trace_and_realizability(
        t in realizable(),
        d in 0.0..=1.0f64,
        p in 0.0..2.0f64,
        c in [-1.5..1.5f64, -1.5..1.5],
        ang in angles(),
        corner in 0usize..3,
    ) {
        let corner = Corner::ALL[corner];
        let eig = decompose(&t, K_FLOOR);
        let specs = [
            PerturbationSpec::DataFreeCorner { corner, delta_b: d },
            PerturbationSpec::DataDrivenMagnitude { corner, p },
            PerturbationSpec::ComponentwiseCorrection { p_corr: c },
            PerturbationSpec::FullAnisotropyCorrection { p_corr: c, angles: ang },
        ];
        for s in specs {
            let star = build_perturbed_stress(&eig, &s).unwrap();
            prop_assert!((star.trace() - t.trace()).abs() <= 1e-10 * t.trace().max(1.0));
            prop_assert!(is_realizable(&star, 1e-10), "{s:?}");
        }
    }

    #[test]
    fn corner_shift_is_idempotent_and_monotone(t in realizable(), corner in 0usize..3) {
        let corner = Corner::ALL[corner];
        let x = to_barycentric(&decompose(&t, K_FLOOR));
        let once = perturb_point_corner(&x, corner, 1.0).unwrap();
        prop_assert_eq!(perturb_point_corner(&once, corner, 1.0).unwrap(), once);
        let mut last = f64::INFINITY;
        for i in 0..=20 {
            let d = perturb_point_corner(&x, corner, i as f64 / 20.0).unwrap().distance(&corner.point());
            prop_assert!(d <= last + 1e-15);
            last = d;
        }
    }

    #[test]
    fn projection_is_the_nearest_triangle_point(x in -1.0..2.0f64, y in -1.0..2.0f64) {
        let q = project_to_triangle(x, y);
        prop_assert!(q.is_inside(1e-12));
        let p = BarycentricPoint::from_xy(x, y);
        if p.is_inside(0.0) {
            prop_assert!(q.distance(&p) <= 1e-15);
        } else {
            // brute force over the boundary
            let c = Corner::ALL.map(Corner::position);
            let mut best = f64::INFINITY;
            for e in 0..3 {
                let (a, b) = (c[e], c[(e + 1) % 3]);
                for s in 0..=2000 {
                    let t = s as f64 / 2000.0;
                    let bx = a[0] + t * (b[0] - a[0]);
                    let by = a[1] + t * (b[1] - a[1]);
                    best = best.min((bx - x).hypot(by - y));
                }
            }
            let d = q.distance(&p);
            prop_assert!(d <= best + 1e-12 && d >= best - 1e-3);
        }
    }

    #[test]
    fn full_correction_reaches_a_target_of_equal_energy(r in distinct(), target in distinct()) {
        let k = r.tke();
        let s = 0.5 * (target.uu + target.vv + target.ww);
        let target = ReynoldsStress::from_matrix(&(target.to_matrix() * (k / s)));
        let er = decompose(&r, K_FLOOR);
        let ed = decompose(&target, K_FLOOR);
        let xr = to_barycentric(&er);
        let xd = to_barycentric(&ed);
        let spec = PerturbationSpec::FullAnisotropyCorrection {
            p_corr: [xd.x - xr.x, xd.y - xr.y],
            angles: extract_angles(&er.frame, &ed.frame).unwrap(),
        };
        let star = build_perturbed_stress(&er, &spec).unwrap();
        prop_assert!(star.max_abs_diff(&target) <= 1e-9 * target.norm().max(1.0));
    }
}

#[test]
fn limiting_states_map_to_the_corners() {
    let cases = [
        ([4.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0], Corner::OneComponent),
        ([1.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0], Corner::TwoComponent),
        ([0.0, 0.0, 0.0], Corner::ThreeComponent),
    ];
    for (lambda, corner) in cases {
        let w = stressuq::tensor::barycentric_weights(&lambda);
        let target = corner.point().weights;
        for i in 0..3 {
            assert!((w[i] - target[i]).abs() <= 1e-12, "{corner:?}: {w:?}");
        }
    }
}
