use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::Matrix3;
use stressuq::channel::{solve_baseline, ChannelConfig, ChannelState};
use stressuq::dns::surrogate::surrogate_profile;
use stressuq::dns::{build_targets, load_profile, ColumnMap, DnsProfile};
use stressuq::features::{FeatureKind, FeatureSet};
use stressuq::forest::TargetKind;
use stressuq::tensor::{decompose, is_realizable, to_barycentric, ReynoldsStress, K_FLOOR};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn baseline(re: f64) -> ChannelState {
    solve_baseline(&ChannelConfig::with_re_tau(re)).unwrap()
}

fn on_grid(state: &ChannelState) -> DnsProfile {
    surrogate_profile(state.re_tau, 512)
        .onto_grid(&state.y_plus, state.re_tau)
        .unwrap()
}

#[test]
fn fixture_parses_sorted_with_known_values() {
    let p = load_profile(fixture("tiny_channel.dat"), &ColumnMap::combined(), None).unwrap();
    assert_eq!(p.y_plus, [0.0, 5.0, 50.0, 100.0]);
    assert_eq!(p.u_plus, [0.0, 4.9, 15.0, 18.0]);
    assert_eq!(p.uu[2], 2.5);
    assert_eq!(p.uv[1], -0.08);
    assert_eq!(p.re_tau, 100.0);
    assert_eq!(p.uw, [0.0; 4]);
    for i in 0..p.len() {
        assert!(is_realizable(&p.stress(i), 1e-10));
    }
}

#[test]
fn features_ignore_a_uniform_velocity_shift() {
    let s = baseline(550.0);
    let mut shifted = s.clone();
    shifted.u_plus.iter_mut().for_each(|u| *u += 10.0);
    let set = FeatureSet::default();
    let a = set.matrix(&s).unwrap();
    let b = set.matrix(&shifted).unwrap();
    for (j, kind) in set.kinds().iter().enumerate() {
        if *kind == FeatureKind::Ti {
            continue;
        }
        assert_eq!(a.column(j), b.column(j), "{}", kind.name());
    }
}

#[test]
fn features_are_bounded_smooth_and_pure() {
    let set = FeatureSet::default();
    for re in [180.0, 1000.0] {
        let s = baseline(re);
        let m = set.matrix(&s).unwrap();
        assert!(m.is_finite());
        assert_eq!(m.as_slice(), set.matrix(&s).unwrap().as_slice());
        for (j, kind) in set.kinds().iter().enumerate() {
            let col = m.column(j);
            if kind.is_normalized() {
                assert!(
                    col.iter().all(|q| (-1.0..=1.0).contains(q)),
                    "{}",
                    kind.name()
                );
            }
            if *kind == FeatureKind::ReD {
                assert!(col.iter().all(|q| (0.0..=2.0).contains(q)));
            }
            if *kind != FeatureKind::YPlus {
                let jump = col
                    .windows(2)
                    .map(|w| (w[1] - w[0]).abs())
                    .fold(0.0, f64::max);
                assert!(jump < 0.5, "Re {re} {}: jump {jump}", kind.name());
            }
        }
    }
}

#[test]
fn interpolated_shear_stress_does_not_overshoot() {
    let src = surrogate_profile(1000.0, 512);
    let s = baseline(1000.0);
    let p = on_grid(&s);
    for (i, y) in s.y_plus.iter().enumerate() {
        let j = src.y_plus.partition_point(|v| v < y);
        let (lo, hi) = if j == 0 || src.y_plus[j] == *y {
            (src.uv[j], src.uv[j])
        } else {
            (src.uv[j - 1], src.uv[j])
        };
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        assert!(p.uv[i] >= lo - 1e-14 && p.uv[i] <= hi + 1e-14, "node {i}");
    }
}

#[test]
fn reference_tensors_are_realizable_and_isotropic_toward_the_center() {
    let s = baseline(1000.0);
    let p = on_grid(&s);
    for i in 0..p.len() {
        assert!(is_realizable(&p.stress(i), 1e-10), "node {i}");
    }
    let x = to_barycentric(&decompose(&p.stress(p.len() - 1), K_FLOOR));
    assert!(
        x.weights[2] > x.weights[0] && x.weights[2] > x.weights[1],
        "{x:?}"
    );
}

#[test]
fn identical_stresses_give_zero_targets() {
    let s = baseline(180.0);
    let mut p = on_grid(&s);
    for (i, t) in s.tau.iter().enumerate() {
        p.uu[i] = t.uu;
        p.vv[i] = t.vv;
        p.ww[i] = t.ww;
        p.uv[i] = t.uv;
    }
    for kind in [TargetKind::P, TargetKind::Pcorr] {
        let set = build_targets(&s, &p, kind, &FeatureSet::default()).unwrap();
        assert!(!set.is_empty());
        assert!(set.y.as_slice().iter().all(|v| *v == 0.0), "{kind:?}");
    }
}

#[test]
fn magnitude_targets_match_the_correction_vectors() {
    let s = baseline(1000.0);
    let p = on_grid(&s);
    let f = FeatureSet::default();
    let mag = build_targets(&s, &p, TargetKind::P, &f).unwrap();
    let vec = build_targets(&s, &p, TargetKind::Pcorr, &f).unwrap();
    assert_eq!(mag.provenance, vec.provenance);
    for r in 0..mag.len() {
        let v = vec.y.row(r);
        let d = mag.y.row(r)[0];
        assert!((d - v[0].hypot(v[1])).abs() < 1e-15);
        assert!((0.0..=1.0).contains(&d));
    }
    // every model point sits on the plane-strain line
    for &(_, i) in &mag.provenance {
        assert!(decompose(&s.tau[i], K_FLOOR).lambda[1].abs() < 1e-10);
    }
    let angles = build_targets(&s, &p, TargetKind::PcorrAngles, &f).unwrap();
    assert_eq!(angles.len() + angles.excluded_frame, mag.len());
}

/// Barycentric point of a stress by a separate route: closed-form cubic
/// roots of the anisotropy and corner weights written out longhand.
fn brute_force_point(t: &ReynoldsStress) -> [f64; 2] {
    let k = 0.5 * (t.uu + t.vv + t.ww);
    let a = Matrix3::new(
        t.uu / k - 2.0 / 3.0,
        t.uv / k,
        t.uw / k,
        t.uv / k,
        t.vv / k - 2.0 / 3.0,
        t.vw / k,
        t.uw / k,
        t.vw / k,
        t.ww / k - 2.0 / 3.0,
    );
    let p = 0.5 * (a * a).trace();
    let mut l = [0.0; 3];
    if p > 1e-300 {
        let m = 2.0 * (p / 3.0).sqrt();
        let t3 = (3.0 * a.determinant() / (p * m)).clamp(-1.0, 1.0).acos() / 3.0;
        l = [0, 1, 2].map(|j| m * (t3 - 2.0 * PI * j as f64 / 3.0).cos());
        l.sort_by(|x, y| y.total_cmp(x));
    }
    let c1 = l[0] - l[1];
    let c2 = 2.0 * (l[1] - l[2]);
    let c3 = 3.0 * l[2] + 1.0;
    // the weights above are twice the corner weights; halve and place
    let (c1, c2, c3) = (0.5 * c1, 0.5 * c2, 0.5 * c3 + 0.5);
    let corners = [[1.0, 0.0], [0.0, 0.0], [0.5, 3f64.sqrt() / 2.0]];
    [
        c1 * corners[0][0] + c2 * corners[1][0] + c3 * corners[2][0],
        c1 * corners[0][1] + c2 * corners[1][1] + c3 * corners[2][1],
    ]
}

#[test]
fn centerline_magnitude_target_matches_an_independent_mapping() {
    let s = baseline(1000.0);
    let p = on_grid(&s);
    let set = build_targets(&s, &p, TargetKind::P, &FeatureSet::default()).unwrap();
    let last = s.len() - 1;
    let row = set.provenance.iter().position(|&(_, i)| i == last).unwrap();
    let xr = brute_force_point(&s.tau[last]);
    let xd = brute_force_point(&p.stress(last));
    let expected = (xd[0] - xr[0]).hypot(xd[1] - xr[1]);
    assert!(
        (set.y.row(row)[0] - expected).abs() < 1e-10,
        "{} vs {expected}",
        set.y.row(row)[0]
    );
}
