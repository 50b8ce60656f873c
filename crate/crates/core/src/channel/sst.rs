//! Menter SST k-omega closure in wall units (`nu = 1`).

pub const BETA_STAR: f64 = 0.09;
pub const SIGMA_K1: f64 = 0.85;
pub const SIGMA_W1: f64 = 0.5;
pub const BETA1: f64 = 0.075;
pub const SIGMA_K2: f64 = 1.0;
pub const SIGMA_W2: f64 = 0.856;
pub const BETA2: f64 = 0.0828;
pub const A1: f64 = 0.31;
pub const KAPPA: f64 = 0.41;

pub fn gamma1() -> f64 {
    BETA1 / BETA_STAR - SIGMA_W1 * KAPPA * KAPPA / BETA_STAR.sqrt()
}

pub fn gamma2() -> f64 {
    BETA2 / BETA_STAR - SIGMA_W2 * KAPPA * KAPPA / BETA_STAR.sqrt()
}

/// Specific dissipation at the wall for a first node at `y1`.
pub fn omega_wall(y1: f64) -> f64 {
    60.0 / (BETA1 * y1 * y1)
}

/// Pointwise closure quantities.
#[derive(Clone, Copy, Debug, Default)]
pub struct Closure {
    pub f1: f64,
    pub f2: f64,
    pub nu_t: f64,
    pub sigma_k: f64,
    pub sigma_w: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `2 (1 - F1) sigma_w2 / omega * dk/dy * domega/dy`.
    pub cross_diffusion: f64,
    /// `max(a1 omega, S F2) / a1`, so that `nu_t = k / limiter`.
    pub limiter: f64,
}

/// Evaluates blending functions and eddy viscosity at one node.
///
/// `d` is the wall distance, `strain` the magnitude of dU/dy.
pub fn closure(k: f64, omega: f64, strain: f64, d: f64, dk: f64, dw: f64) -> Closure {
    let k = k.max(0.0);
    let sqrt_k = k.sqrt();
    let cd_kw = (2.0 * SIGMA_W2 / omega * dk * dw).max(1e-20);
    let (f1, f2) = if d > 0.0 {
        let a = sqrt_k / (BETA_STAR * omega * d);
        let b = 500.0 / (d * d * omega);
        let arg1 = a.max(b).min(4.0 * SIGMA_W2 * k / (cd_kw * d * d));
        let arg2 = (2.0 * a).max(b);
        ((arg1.powi(4)).tanh(), (arg2 * arg2).tanh())
    } else {
        (1.0, 1.0)
    };
    let blend = |inner: f64, outer: f64| f1 * inner + (1.0 - f1) * outer;
    let limiter = (A1 * omega).max(strain * f2) / A1;
    Closure {
        f1,
        f2,
        nu_t: if limiter > 0.0 { k / limiter } else { 0.0 },
        sigma_k: blend(SIGMA_K1, SIGMA_K2),
        sigma_w: blend(SIGMA_W1, SIGMA_W2),
        beta: blend(BETA1, BETA2),
        gamma: blend(gamma1(), gamma2()),
        cross_diffusion: 2.0 * (1.0 - f1) * SIGMA_W2 / omega * dk * dw,
        limiter,
    }
}
