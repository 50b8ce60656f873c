//! Analytic stand-in for channel DNS statistics.
//!
//! The mean flow follows the Cess eddy-viscosity profile, for which the
//! total shear balance `(1 + nu_t) dU/dy = 1 - y/delta` holds exactly. The
//! normal stresses are smooth fits with the qualitative shape of DNS data
//! (near-wall `uu` peak, `ww > vv`, approach to isotropy at the centerline)
//! and are built so that every tensor is realizable. Useful for tests and for
//! running the pipeline when the public data files are not at hand.

use std::io::Write;

use super::DnsProfile;
use crate::Result;

const KAPPA: f64 = 0.426;
const A_PLUS: f64 = 25.4;

/// Cess eddy viscosity at wall distance `y` (wall units).
pub fn cess_nu_t(y: f64, re_tau: f64) -> f64 {
    let eta = y / re_tau;
    let damp = 1.0 - (-y / A_PLUS).exp();
    let shape = (2.0 * eta - eta * eta) * (3.0 - 4.0 * eta + 2.0 * eta * eta);
    0.5 * (1.0 + KAPPA * KAPPA * re_tau * re_tau / 9.0 * shape * shape * damp * damp).sqrt() - 0.5
}

fn du_dy(y: f64, re_tau: f64) -> f64 {
    (1.0 - y / re_tau) / (1.0 + cess_nu_t(y, re_tau))
}

/// Five-point Gauss-Legendre integral of `dU/dy` over `[a, b]`.
fn integrate_gradient(a: f64, b: f64, re_tau: f64) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683,
        0.538_469_310_105_683,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
        0.236_926_885_056_189,
    ];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    X.iter()
        .zip(&W)
        .map(|(x, w)| w * du_dy(mid + half * x, re_tau))
        .sum::<f64>()
        * half
}

/// Stresses `(uu, vv, ww, uv)` at `y`.
fn stresses(y: f64, re_tau: f64) -> (f64, f64, f64, f64) {
    let eta = y / re_tau;
    let uv = -cess_nu_t(y, re_tau) * du_dy(y, re_tau);
    let outer = 0.8 + 2.5 * (1.0 - eta).powi(3);
    let near = (y / 12.0).powi(2);
    let k = outer * (1.0 - (-(y / 10.0).powi(2)).exp()) + 2.0 * near * (1.0 - near).exp();
    let w_share = 0.3 + 0.25 * (1.0 - (-y / 20.0).exp()) + 0.05 * eta;
    let theta = 0.25 + 0.35 * (1.0 - eta).powi(2) + 0.38 * (-y / 30.0).exp();
    let ww = w_share * k;
    let s = 2.0 * k - ww;
    let d = theta * (s * s - 4.0 * uv * uv).max(0.0).sqrt();
    (0.5 * (s + d), 0.5 * (s - d), ww, uv)
}

/// Profile on `n` points clustered toward the wall, `y+` from 0 to `re_tau`.
pub fn surrogate_profile(re_tau: f64, n: usize) -> DnsProfile {
    let n = n.max(2);
    let y_delta: Vec<f64> = (0..n)
        .map(|i| {
            if i == n - 1 {
                1.0
            } else {
                1.0 - (std::f64::consts::FRAC_PI_2 * i as f64 / (n - 1) as f64).cos()
            }
        })
        .collect();
    let y_plus: Vec<f64> = y_delta.iter().map(|e| e * re_tau).collect();
    let mut u_plus = vec![0.0; n];
    for i in 1..n {
        u_plus[i] = u_plus[i - 1] + integrate_gradient(y_plus[i - 1], y_plus[i], re_tau);
    }
    let mut p = DnsProfile {
        re_tau,
        y_delta,
        y_plus,
        u_plus,
        uu: Vec::with_capacity(n),
        vv: Vec::with_capacity(n),
        ww: Vec::with_capacity(n),
        uv: Vec::with_capacity(n),
        uw: vec![0.0; n],
        vw: vec![0.0; n],
    };
    for &y in &p.y_plus {
        let (uu, vv, ww, uv) = stresses(y, re_tau);
        p.uu.push(uu);
        p.vv.push(vv);
        p.ww.push(ww);
        p.uv.push(uv);
    }
    p
}

/// Writes the mean (`y/delta y+ U dU/dy W P`) and fluctuation
/// (`y/delta y+ uu vv ww uv uw vw k`) tables.
pub fn write_tables<W1: Write, W2: Write>(
    p: &DnsProfile,
    mut mean: W1,
    mut fluct: W2,
) -> Result<()> {
    writeln!(
        mean,
        "% Synthetic channel statistics, Re_tau = {}",
        p.re_tau
    )?;
    writeln!(mean, "% y/delta y^+ U dU/dy W P")?;
    writeln!(
        fluct,
        "% Synthetic channel statistics, Re_tau = {}",
        p.re_tau
    )?;
    writeln!(fluct, "% y/delta y^+ u'u' v'v' w'w' u'v' u'w' v'w' k")?;
    let k = p.k_plus();
    for i in 0..p.len() {
        let y = p.y_plus[i];
        writeln!(
            mean,
            "{:23.15e}{:23.15e}{:23.15e}{:23.15e}{:23.15e}{:23.15e}",
            p.y_delta[i],
            y,
            p.u_plus[i],
            du_dy(y, p.re_tau),
            0.0,
            0.0
        )?;
        writeln!(
            fluct,
            "{:23.15e}{:23.15e}{:23.15e}{:23.15e}{:23.15e}{:23.15e}{:23.15e}{:23.15e}{:23.15e}",
            p.y_delta[i], y, p.uu[i], p.vv[i], p.ww[i], p.uv[i], p.uw[i], p.vw[i], k[i]
        )?;
    }
    Ok(())
}

/// File names `LM_Channel_<Re>_mean_prof.dat` and
/// `LM_Channel_<Re>_vel_fluc_prof.dat`, matching the public database.
pub fn table_names(re_tau: f64) -> (String, String) {
    let re = re_tau.round() as i64;
    (
        format!("LM_Channel_{re:04}_mean_prof.dat"),
        format!("LM_Channel_{re:04}_vel_fluc_prof.dat"),
    )
}
