use super::grid::derivative;
use super::injection::StressInjector;
use super::sst::{self, closure, Closure, BETA_STAR};
use super::{tridiag, ChannelConfig, ChannelState};
use crate::tensor::{is_realizable, ReynoldsStress};
use crate::{Error, Result};

const REALIZABILITY_TOL: f64 = 1e-10;

/// Cap on the equivalent viscosity of an injected shear stress.
const MAX_IMPLICIT_NU: f64 = 1e8;

/// Finite-volume geometry: node coordinates, face positions and volumes.
struct Mesh {
    y: Vec<f64>,
    /// `dy[i] = y[i+1] - y[i]`.
    dy: Vec<f64>,
    vol: Vec<f64>,
}

impl Mesh {
    fn new(y: Vec<f64>) -> Self {
        let n = y.len();
        let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
        let mut vol = vec![0.0; n];
        for i in 1..n {
            let west = 0.5 * (y[i - 1] + y[i]);
            let east = if i + 1 < n {
                0.5 * (y[i] + y[i + 1])
            } else {
                y[i]
            };
            vol[i] = east - west;
        }
        Self { y, dy, vol }
    }

    fn n(&self) -> usize {
        self.y.len()
    }

    /// Solves `-d/dy(G dphi/dy) = sc + sp phi` with `phi[0] = wall` and a
    /// symmetry condition at the last node, then blends the solution with
    /// `old` by the relaxation factor `alpha`.
    fn diffusion_solve(
        &self,
        gamma: &[f64],
        sc: &[f64],
        sp: &[f64],
        wall: f64,
        alpha: f64,
        old: &[f64],
    ) -> Vec<f64> {
        let n = self.n();
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        rhs[0] = wall;
        for i in 1..n {
            let aw = 0.5 * (gamma[i - 1] + gamma[i]) / self.dy[i - 1];
            let ae = if i + 1 < n {
                0.5 * (gamma[i] + gamma[i + 1]) / self.dy[i]
            } else {
                0.0
            };
            lower[i] = -aw;
            upper[i] = -ae;
            diag[i] = aw + ae - sp[i] * self.vol[i];
            rhs[i] = sc[i] * self.vol[i];
        }
        let mut phi = tridiag::solve(&lower, &diag, &upper, &rhs);
        for (p, o) in phi.iter_mut().zip(old) {
            *p = o + alpha * (*p - o);
        }
        phi
    }
}

struct Fields {
    u: Vec<f64>,
    k: Vec<f64>,
    w: Vec<f64>,
    /// Injected stress currently applied to the momentum equation.
    tau_inj: Option<Vec<ReynoldsStress>>,
    /// Momentum shear split as `-nu dU/dy + uv`: implicit viscosity and
    /// explicit remainder used in the last solve.
    mom_nu: Vec<f64>,
    mom_uv: Vec<f64>,
}

/// Baseline SST solution (no injection).
pub fn solve_baseline(cfg: &ChannelConfig) -> Result<ChannelState> {
    cfg.validate()?;
    let mesh = Mesh::new(cfg.grid()?);
    let fields = initial_fields(&mesh, cfg);
    iterate(cfg, &mesh, fields, None, None)
}

/// Runs the baseline, then the injected solve started from it.
pub fn solve_with_injection(
    cfg: &ChannelConfig,
    injector: &dyn StressInjector,
) -> Result<ChannelState> {
    cfg.validate()?;
    injector.check(cfg)?;
    let baseline = solve_baseline(cfg)?;
    solve_from_baseline(cfg, injector, &baseline)
}

/// Injected solve initialised from an already converged baseline on the same
/// grid.
pub fn solve_from_baseline(
    cfg: &ChannelConfig,
    injector: &dyn StressInjector,
    baseline: &ChannelState,
) -> Result<ChannelState> {
    cfg.validate()?;
    injector.check(cfg)?;
    let mesh = Mesh::new(cfg.grid()?);
    if baseline.len() != mesh.n() {
        return Err(Error::Dimension {
            context: "baseline grid",
            expected: mesh.n(),
            got: baseline.len(),
        });
    }
    let fields = Fields {
        u: baseline.u_plus.clone(),
        k: baseline.k_plus.clone(),
        w: baseline.omega_plus.clone(),
        tau_inj: Some(
            (0..mesh.n())
                .map(|i| baseline.boussinesq_stress(i))
                .collect(),
        ),
        mom_nu: baseline.momentum_nu_t.clone(),
        mom_uv: baseline.momentum_uv.clone(),
    };
    iterate(cfg, &mesh, fields, Some(injector), Some(baseline))
}

/// Dispatches on an optional injector.
pub fn solve(cfg: &ChannelConfig, injector: Option<&dyn StressInjector>) -> Result<ChannelState> {
    match injector {
        None => solve_baseline(cfg),
        Some(inj) => solve_with_injection(cfg, inj),
    }
}

fn initial_fields(mesh: &Mesh, cfg: &ChannelConfig) -> Fields {
    let re = cfg.re_tau;
    let n = mesh.n();
    let kappa = sst::KAPPA;
    let mut u = vec![0.0; n];
    let mut k = vec![0.0; n];
    let mut w = vec![0.0; n];
    let w_wall = sst::omega_wall(mesh.y[1]);
    for i in 0..n {
        let y = mesh.y[i];
        let eta = y / re;
        if cfg.laminar {
            u[i] = y - 0.5 * y * y / re;
            continue;
        }
        // Reichardt's law as a starting guess
        u[i] = (1.0 + kappa * y).ln() / kappa
            + 7.8 * (1.0 - (-y / 11.0).exp() - y / 11.0 * (-y / 3.0).exp());
        k[i] = 3.3 * (1.0 - (-y / 8.0).exp()).powi(2) * (1.0 - 0.75 * eta);
        if i == 0 {
            w[i] = w_wall;
        } else {
            let near = 6.0 / (sst::BETA1 * y * y);
            let log = 1.0 / (BETA_STAR.sqrt() * kappa * y);
            w[i] = near.hypot(log).min(w_wall);
        }
    }
    Fields {
        u,
        k,
        w,
        tau_inj: None,
        mom_nu: vec![0.0; n],
        mom_uv: vec![0.0; n],
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn change(new: &[f64], old: &[f64]) -> f64 {
    let diff = new
        .iter()
        .zip(old)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    diff / max_abs(new).max(1.0)
}

fn stress_change(new: &[ReynoldsStress], old: &[ReynoldsStress]) -> f64 {
    let diff = new
        .iter()
        .zip(old)
        .fold(0.0_f64, |m, (a, b)| m.max(a.max_abs_diff(b)));
    let scale = new.iter().fold(1.0_f64, |m, t| m.max(t.to_matrix().amax()));
    diff / scale
}

fn closures(mesh: &Mesh, f: &Fields, du: &[f64], laminar: bool) -> Vec<Closure> {
    let n = mesh.n();
    if laminar {
        return vec![Closure::default(); n];
    }
    let dk = derivative(&mesh.y, &f.k);
    let dw = derivative(&mesh.y, &f.w);
    (0..n)
        .map(|i| {
            if i == 0 {
                Closure {
                    f1: 1.0,
                    f2: 1.0,
                    ..closure(0.0, f.w[0], du[0].abs(), 0.0, 0.0, 0.0)
                }
            } else {
                closure(f.k[i], f.w[i], du[i].abs(), mesh.y[i], dk[i], dw[i])
            }
        })
        .collect()
}

fn snapshot(
    cfg: &ChannelConfig,
    mesh: &Mesh,
    f: &Fields,
    du: &[f64],
    cl: &[Closure],
    history: &[f64],
    violations: usize,
) -> ChannelState {
    let nu_t: Vec<f64> = cl.iter().map(|c| c.nu_t).collect();
    let tau = match &f.tau_inj {
        Some(t) => t.clone(),
        None => (0..mesh.n())
            .map(|i| {
                let mut t = ReynoldsStress::isotropic(f.k[i]);
                t.uv = -nu_t[i] * du[i];
                t
            })
            .collect(),
    };
    ChannelState {
        re_tau: cfg.re_tau,
        y_plus: mesh.y.clone(),
        u_plus: f.u.clone(),
        k_plus: f.k.clone(),
        omega_plus: f.w.clone(),
        nu_t_plus: nu_t,
        du_dy: du.to_vec(),
        tau,
        residual_history: history.to_vec(),
        realizability_violations: violations,
        injected: f.tau_inj.is_some(),
        momentum_nu_t: f.mom_nu.clone(),
        momentum_uv: f.mom_uv.clone(),
    }
}

fn check_finite(v: &[f64], field: &'static str, iteration: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NotANumber { field, iteration })
    }
}

fn iterate(
    cfg: &ChannelConfig,
    mesh: &Mesh,
    mut f: Fields,
    injector: Option<&dyn StressInjector>,
    baseline: Option<&ChannelState>,
) -> Result<ChannelState> {
    let n = mesh.n();
    let re = cfg.re_tau;
    let alpha = cfg.relaxation(injector.is_some());
    let implicit = injector.is_some_and(|i| i.follows_state());
    let w_wall = sst::omega_wall(mesh.y[1]);
    let mut history = Vec::new();
    let mut violations = 0usize;

    for iter in 1..=cfg.max_iters {
        let du = derivative(&mesh.y, &f.u);
        let cl = closures(mesh, &f, &du, cfg.laminar);
        let mut res: f64 = 0.0;

        // injected stress, relaxed toward the injector's target
        if let (Some(inj), Some(base)) = (injector, baseline) {
            let current = snapshot(cfg, mesh, &f, &du, &cl, &history, violations);
            let target = inj.target_stress(&current, base)?;
            if target.len() != n {
                return Err(Error::Dimension {
                    context: "injected stress",
                    expected: n,
                    got: target.len(),
                });
            }
            let old = f.tau_inj.take().unwrap_or(current.tau);
            let new: Vec<ReynoldsStress> = old
                .iter()
                .zip(&target)
                .map(|(o, t)| o.lerp(t, alpha))
                .collect();
            violations += target
                .iter()
                .chain(&new)
                .filter(|t| !is_realizable(t, REALIZABILITY_TOL))
                .count();
            res = res.max(stress_change(&new, &old));
            f.tau_inj = Some(new);
        }

        // momentum
        let (nu, uv) = match &f.tau_inj {
            None => (cl.iter().map(|c| c.nu_t).collect(), vec![0.0; n]),
            Some(tau) if implicit => split_shear(tau, &du, &cl),
            Some(tau) => (vec![0.0; n], tau.iter().map(|t| t.uv).collect()),
        };
        let gamma: Vec<f64> = nu.iter().map(|v| 1.0 + v).collect();
        let sc: Vec<f64> = (0..n)
            .map(|i| {
                if i == 0 {
                    return 0.0;
                }
                let west = 0.5 * (uv[i - 1] + uv[i]);
                let east = if i + 1 < n {
                    0.5 * (uv[i] + uv[i + 1])
                } else {
                    0.0
                };
                1.0 / re - (east - west) / mesh.vol[i]
            })
            .collect();
        let u_new = mesh.diffusion_solve(&gamma, &sc, &vec![0.0; n], 0.0, alpha, &f.u);
        f.mom_nu = nu;
        f.mom_uv = uv;
        check_finite(&u_new, "U", iter)?;
        res = res.max(change(&u_new, &f.u));
        f.u = u_new;

        if !cfg.laminar {
            let du = derivative(&mesh.y, &f.u);
            let (k_new, w_new) = turbulence_update(mesh, &f, &du, &cl, alpha, w_wall);
            check_finite(&k_new, "k", iter)?;
            check_finite(&w_new, "omega", iter)?;
            res = res.max(change(&k_new, &f.k)).max(change(&w_new, &f.w));
            f.k = k_new;
            f.w = w_new;
        }

        history.push(res);
        if res.is_nan() {
            return Err(Error::NotANumber {
                field: "residual",
                iteration: iter,
            });
        }
        if res < cfg.residual_tol {
            let du = derivative(&mesh.y, &f.u);
            let cl = closures(mesh, &f, &du, cfg.laminar);
            return Ok(snapshot(cfg, mesh, &f, &du, &cl, &history, violations));
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iters,
        last_residual: history.last().copied().unwrap_or(f64::NAN),
        residual_history: history,
    })
}

/// Momentum split of an injected shear stress. A gradient-aligned stress
/// becomes an equivalent viscosity `-uv / (dU/dy)`, capped, so the
/// velocity gradient keeps its sign; where the injected stress exceeds the
/// total shear the gradient relaxes to zero and the viscous term carries the
/// available stress. Counter-gradient stresses stay explicit. Where both the
/// stress and the gradient vanish (the centerline) the ratio is undefined and
/// the closure viscosity is kept, so an unperturbed stress reproduces the
/// baseline discretisation exactly.
fn split_shear(tau: &[ReynoldsStress], du: &[f64], cl: &[Closure]) -> (Vec<f64>, Vec<f64>) {
    tau.iter()
        .zip(du)
        .zip(cl)
        .map(|((t, &d), c)| {
            if d == 0.0 && t.uv == 0.0 {
                (c.nu_t, 0.0)
            } else if t.uv * d < 0.0 {
                ((-t.uv / d).min(MAX_IMPLICIT_NU), 0.0)
            } else if d == 0.0 && t.uv != 0.0 {
                (MAX_IMPLICIT_NU, 0.0)
            } else {
                (0.0, t.uv)
            }
        })
        .unzip()
}

/// One relaxed update of k and omega. Production uses the injected shear
/// stress when present, the eddy-viscosity one otherwise.
fn turbulence_update(
    mesh: &Mesh,
    f: &Fields,
    du: &[f64],
    cl: &[Closure],
    alpha: f64,
    w_wall: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = mesh.n();
    let mut k_sc = vec![0.0; n];
    let mut k_sp = vec![0.0; n];
    let mut w_sc = vec![0.0; n];
    let mut w_sp = vec![0.0; n];
    let mut k_gamma = vec![1.0; n];
    let mut w_gamma = vec![1.0; n];

    for i in 0..n {
        let c = &cl[i];
        k_gamma[i] = 1.0 + c.sigma_k * c.nu_t;
        w_gamma[i] = 1.0 + c.sigma_w * c.nu_t;
        if i == 0 {
            continue;
        }
        let k = f.k[i].max(0.0);
        let w = f.w[i];
        let uv = match &f.tau_inj {
            Some(tau) => tau[i].uv,
            None => -c.nu_t * du[i],
        };
        let cap = 10.0 * BETA_STAR * k * w;
        let prod = (-uv * du[i]).min(cap);
        if prod >= 0.0 {
            k_sc[i] = prod;
        } else if k > 0.0 {
            k_sp[i] += prod / k;
        }
        k_sp[i] -= BETA_STAR * w;

        // gamma * P / nu_t with nu_t = k / limiter
        let p_over_nut = if k > 0.0 { prod * c.limiter / k } else { 0.0 };
        if p_over_nut >= 0.0 {
            w_sc[i] += c.gamma * p_over_nut;
        } else {
            w_sp[i] += c.gamma * p_over_nut / w;
        }
        // Newton linearisation of -beta omega^2
        w_sp[i] -= 2.0 * c.beta * w;
        w_sc[i] += c.beta * w * w;
        if c.cross_diffusion >= 0.0 {
            w_sc[i] += c.cross_diffusion;
        } else {
            w_sp[i] += c.cross_diffusion / w;
        }
    }
    let k_new: Vec<f64> = mesh
        .diffusion_solve(&k_gamma, &k_sc, &k_sp, 0.0, alpha, &f.k)
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    let w_new = mesh.diffusion_solve(&w_gamma, &w_sc, &w_sp, w_wall, alpha, &f.w);
    (k_new, w_new)
}
