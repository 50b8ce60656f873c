use stressuq::channel::{
    solve_baseline, solve_from_baseline, ChannelConfig, Injection, StressInjector,
};
use stressuq::dns::surrogate::surrogate_profile;
use stressuq::tensor::{decompose, Corner, K_FLOOR};
use stressuq::ErrorKind;

fn cfg(re_tau: f64) -> ChannelConfig {
    ChannelConfig::with_re_tau(re_tau)
}

#[test]
fn laminar_flow_is_the_parabola() {
    let c = ChannelConfig {
        n_cells: 384,
        laminar: true,
        ..cfg(180.0)
    };
    let s = solve_baseline(&c).unwrap();
    assert_eq!(s.len(), 384);
    let uc = 180.0 / 2.0;
    let worst = s
        .y_plus
        .iter()
        .zip(&s.u_plus)
        .map(|(y, u)| (u - (y - y * y / 360.0)).abs() / uc)
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn boundary_conditions_hold() {
    let s = solve_baseline(&cfg(550.0)).unwrap();
    assert_eq!(s.u_plus[0], 0.0);
    assert_eq!(s.k_plus[0], 0.0);
    assert_eq!(*s.du_dy.last().unwrap(), 0.0);
    assert!(s.is_finite());
    assert!(s.y_plus[1] < 1.0);
}

#[test]
fn baseline_total_shear_is_linear() {
    for re in [180.0, 1000.0] {
        let s = solve_baseline(&cfg(re)).unwrap();
        let err = s.momentum_balance_error();
        assert!(err < 0.01, "Re {re}: {err}");
    }
}

#[test]
fn baseline_stress_lies_on_the_plane_strain_line() {
    for re in [180.0, 550.0, 1000.0, 2000.0, 5200.0] {
        let s = solve_baseline(&cfg(re)).unwrap();
        for (i, t) in s.tau.iter().enumerate() {
            let e = decompose(t, K_FLOOR);
            if !e.degenerate {
                assert!(
                    e.lambda[1].abs() < 1e-10,
                    "Re {re} node {i}: {:?}",
                    e.lambda
                );
            }
        }
    }
}

#[test]
fn doubling_the_grid_barely_moves_the_centerline() {
    let coarse = solve_baseline(&cfg(180.0)).unwrap();
    let fine = solve_baseline(&ChannelConfig {
        n_cells: 384,
        ..cfg(180.0)
    })
    .unwrap();
    let a = coarse.centerline_velocity();
    let b = fine.centerline_velocity();
    assert!((a - b).abs() / b < 5e-3, "{a} vs {b}");
}

#[test]
fn runs_are_bit_identical() {
    let a = solve_baseline(&cfg(1000.0)).unwrap();
    let b = solve_baseline(&cfg(1000.0)).unwrap();
    assert_eq!(a.residual_history, b.residual_history);
    assert_eq!(a.u_plus, b.u_plus);
}

#[test]
fn centerline_velocity_is_close_to_the_reference() {
    let s = solve_baseline(&cfg(1000.0)).unwrap();
    let reference = surrogate_profile(1000.0, 512).centerline_velocity();
    let uc = s.centerline_velocity();
    assert!(
        (uc - reference).abs() / reference < 0.05,
        "{uc} vs {reference}"
    );
}

#[test]
fn zero_shift_reproduces_the_baseline() {
    let c = ChannelConfig {
        residual_tol: 1e-12,
        ..cfg(180.0)
    };
    let base = solve_baseline(&c).unwrap();
    for corner in Corner::ALL {
        let inj = Injection::DataFreeCorner {
            corner,
            delta_b: 0.0,
        };
        let s = solve_from_baseline(&c, &inj, &base).unwrap();
        let d = s
            .u_plus
            .iter()
            .zip(&base.u_plus)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-9, "{corner}: {d}");
    }
}

#[test]
fn full_shift_to_isotropy_puts_every_node_on_the_corner() {
    let c = cfg(180.0);
    let base = solve_baseline(&c).unwrap();
    let inj = Injection::DataFreeCorner {
        corner: Corner::ThreeComponent,
        delta_b: 1.0,
    };
    let s = solve_from_baseline(&c, &inj, &base).unwrap();
    for t in &s.tau {
        let e = decompose(t, K_FLOOR);
        if !e.degenerate {
            assert!(e.lambda.iter().all(|l| l.abs() < 1e-12), "{:?}", e.lambda);
        }
    }
}

#[test]
fn frozen_profile_of_the_wrong_length_is_rejected() {
    let c = cfg(180.0);
    let inj = Injection::FrozenStress {
        profile: vec![Default::default(); 10],
    };
    let err = inj.check(&c).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Configuration);
}

#[test]
fn tiny_iteration_budget_reports_non_convergence() {
    let c = ChannelConfig {
        max_iters: 3,
        ..cfg(180.0)
    };
    let err = solve_baseline(&c).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Numerical);
}
