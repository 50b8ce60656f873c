use crate::{Error, Result};

/// Geometrically stretched half-channel grid from the wall (`y+ = 0`) to the
/// centerline (`y+ = re_tau`), `n` nodes inclusive.
pub fn stretched_grid(re_tau: f64, n: usize, ratio: f64) -> Vec<f64> {
    let intervals = n - 1;
    let first = if (ratio - 1.0).abs() < 1e-14 {
        re_tau / intervals as f64
    } else {
        re_tau * (ratio - 1.0) / (ratio.powi(intervals as i32) - 1.0)
    };
    let mut y = Vec::with_capacity(n);
    let mut acc = 0.0;
    let mut dy = first;
    y.push(0.0);
    for _ in 1..intervals {
        acc += dy;
        y.push(acc);
        dy *= ratio;
    }
    y.push(re_tau);
    y
}

/// Stretch ratio that places the first off-wall node at `first_y_plus`.
///
/// Returns 1 (uniform) when the uniform spacing is already that fine.
pub fn ratio_for_first_node(re_tau: f64, n: usize, first_y_plus: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Config(format!(
            "n_cells must be at least 3, got {n}"
        )));
    }
    let intervals = (n - 1) as i32;
    if re_tau / intervals as f64 <= first_y_plus {
        return Ok(1.0);
    }
    let span = |r: f64| first_y_plus * (r.powi(intervals) - 1.0) / (r - 1.0);
    let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
    while span(hi) < re_tau {
        hi *= 1.5;
        if hi > 100.0 {
            return Err(Error::Config(
                "cannot reach the centerline with the requested first spacing".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if span(mid) < re_tau {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Second-order first derivative on a non-uniform grid. The last node is a
/// symmetry plane (zero gradient); the wall uses a one-sided three-point
/// stencil.
pub fn derivative(y: &[f64], f: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let hm = y[i] - y[i - 1];
        let hp = y[i + 1] - y[i];
        d[i] = (hm * hm * (f[i + 1] - f[i]) + hp * hp * (f[i] - f[i - 1])) / (hm * hp * (hm + hp));
    }
    let h1 = y[1] - y[0];
    let h2 = y[2] - y[1];
    d[0] = (-(2.0 * h1 + h2) * h2 * f[0] + (h1 + h2).powi(2) * f[1] - h1 * h1 * f[2])
        / (h1 * h2 * (h1 + h2));
    d[n - 1] = 0.0;
    d
}
