//! Fully developed turbulent channel flow in wall units.
//!
//! The half channel `0 <= y+ <= Re_tau` is discretised with a stretched,
//! vertex-centred finite-volume grid. Momentum reads
//! `d/dy+ [dU+/dy+ - <u'v'>+] = -1/Re_tau` with no slip at the wall and
//! symmetry at the centerline; the Reynolds shear stress comes either from
//! the SST eddy viscosity or from an injected (perturbed, learned or frozen)
//! stress field.

mod envelope;
pub mod grid;
mod injection;
mod solver;
pub mod sst;
mod tridiag;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::tensor::{decompose, to_barycentric, ReynoldsStress, K_FLOOR};
use crate::{Error, Result};

pub use envelope::{
    barycentric_trace, run_members, uq_envelope, write_trace_csv, Envelope, EnvelopeMember,
    EnvelopeMode, TracePoint,
};
pub use injection::{DataDrivenInjection, Injection, StressInjector};
pub use solver::{solve, solve_baseline, solve_from_baseline, solve_with_injection};

/// Solver settings. `n_cells` counts grid nodes from the wall to the
/// centerline, both included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub re_tau: f64,
    pub n_cells: usize,
    /// Geometric growth ratio of the spacing; derived from
    /// `first_node_y_plus` when absent.
    pub stretch: Option<f64>,
    pub first_node_y_plus: f64,
    pub max_iters: usize,
    pub residual_tol: f64,
    /// Defaults to 0.8 for the baseline and 0.5 with injected stresses.
    pub under_relaxation: Option<f64>,
    /// Forces `nu_t = 0` (laminar flow).
    pub laminar: bool,
    pub k_floor: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            re_tau: 1000.0,
            n_cells: 192,
            stretch: None,
            first_node_y_plus: 0.5,
            max_iters: 100_000,
            residual_tol: 1e-8,
            under_relaxation: None,
            laminar: false,
            k_floor: K_FLOOR,
        }
    }
}

impl ChannelConfig {
    pub fn with_re_tau(re_tau: f64) -> Self {
        Self {
            re_tau,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.re_tau > 0.0 && self.re_tau.is_finite()) {
            return Err(Error::Config(format!(
                "re_tau must be positive, got {}",
                self.re_tau
            )));
        }
        if self.n_cells < 3 {
            return Err(Error::Config(format!(
                "n_cells must be at least 3, got {}",
                self.n_cells
            )));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::Config("residual_tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        if let Some(a) = self.under_relaxation {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Config(format!(
                    "under_relaxation must lie in (0, 1], got {a}"
                )));
            }
        }
        if let Some(r) = self.stretch {
            if !(r >= 1.0 && r.is_finite()) {
                return Err(Error::Config(format!("stretch must be >= 1, got {r}")));
            }
        }
        if !(self.first_node_y_plus > 0.0) {
            return Err(Error::Config("first_node_y_plus must be positive".into()));
        }
        if !(self.k_floor > 0.0) {
            return Err(Error::Config("k_floor must be positive".into()));
        }
        let y = self.grid()?;
        if y[1] >= 1.0 {
            return Err(Error::Config(format!(
                "first off-wall node sits at y+ = {:.3}; it must be below 1",
                y[1]
            )));
        }
        Ok(())
    }

    pub fn stretch_ratio(&self) -> Result<f64> {
        match self.stretch {
            Some(r) => Ok(r),
            None => grid::ratio_for_first_node(self.re_tau, self.n_cells, self.first_node_y_plus),
        }
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        Ok(grid::stretched_grid(
            self.re_tau,
            self.n_cells,
            self.stretch_ratio()?,
        ))
    }

    fn relaxation(&self, injected: bool) -> f64 {
        self.under_relaxation
            .unwrap_or(if injected { 0.5 } else { 0.8 })
    }
}

/// Converged (or intermediate) channel solution in wall units.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelState {
    pub re_tau: f64,
    pub y_plus: Vec<f64>,
    pub u_plus: Vec<f64>,
    pub k_plus: Vec<f64>,
    pub omega_plus: Vec<f64>,
    pub nu_t_plus: Vec<f64>,
    pub du_dy: Vec<f64>,
    /// Reynolds stress seen by the momentum equation at every node.
    pub tau: Vec<ReynoldsStress>,
    pub residual_history: Vec<f64>,
    /// Number of injected stress tensors that failed the realizability test.
    pub realizability_violations: usize,
    /// Whether `tau` is an injected stress rather than the eddy-viscosity one.
    pub injected: bool,
    /// The momentum equation sees the shear stress `-nu dU/dy + uv` with
    /// these two node fields (`nu_t` and zero for the baseline).
    pub momentum_nu_t: Vec<f64>,
    pub momentum_uv: Vec<f64>,
}

impl ChannelState {
    pub fn len(&self) -> usize {
        self.y_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_plus.is_empty()
    }

    pub fn iterations(&self) -> usize {
        self.residual_history.len()
    }

    pub fn centerline_velocity(&self) -> f64 {
        *self.u_plus.last().unwrap_or(&0.0)
    }

    /// Linear eddy-viscosity stress `2/3 k I - nu_t (dU/dy)(e_x e_y + e_y e_x)`.
    pub fn boussinesq_stress(&self, i: usize) -> ReynoldsStress {
        let mut tau = ReynoldsStress::isotropic(self.k_plus[i]);
        tau.uv = -self.nu_t_plus[i] * self.du_dy[i];
        tau
    }

    /// Total shear stress `(1 + nu) dU/dy - uv` at the cell faces, in the
    /// split used by the momentum equation, paired with the face coordinate.
    pub fn total_shear(&self) -> Vec<(f64, f64)> {
        let y = &self.y_plus;
        let nu = &self.momentum_nu_t;
        let uv = &self.momentum_uv;
        (0..self.len() - 1)
            .map(|i| {
                let grad = (self.u_plus[i + 1] - self.u_plus[i]) / (y[i + 1] - y[i]);
                let stress = (1.0 + 0.5 * (nu[i] + nu[i + 1])) * grad - 0.5 * (uv[i] + uv[i + 1]);
                (0.5 * (y[i] + y[i + 1]), stress)
            })
            .collect()
    }

    /// Largest deviation of the total shear from `1 - y+/Re_tau`.
    pub fn momentum_balance_error(&self) -> f64 {
        self.total_shear()
            .iter()
            .map(|(yf, s)| (s - (1.0 - yf / self.re_tau)).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        [
            &self.u_plus,
            &self.k_plus,
            &self.omega_plus,
            &self.nu_t_plus,
            &self.du_dy,
        ]
        .iter()
        .all(|v| v.iter().all(|x| x.is_finite()))
            && self.tau.iter().all(ReynoldsStress::is_finite)
    }

    /// Writes the solution table: profiles, stress components and corner
    /// weights (empty for degenerate nodes).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "y_plus",
            "U_plus",
            "k_plus",
            "omega_plus",
            "nu_t_plus",
            "uu",
            "vv",
            "ww",
            "uv",
            "C1",
            "C2",
            "C3",
        ])?;
        for i in 0..self.len() {
            let t = &self.tau[i];
            let eig = decompose(t, K_FLOOR);
            let weights = if eig.degenerate {
                [String::new(), String::new(), String::new()]
            } else {
                to_barycentric(&eig).weights.map(|c| c.to_string())
            };
            let mut rec = vec![
                self.y_plus[i].to_string(),
                self.u_plus[i].to_string(),
                self.k_plus[i].to_string(),
                self.omega_plus[i].to_string(),
                self.nu_t_plus[i].to_string(),
                t.uu.to_string(),
                t.vv.to_string(),
                t.ww.to_string(),
                t.uv.to_string(),
            ];
            rec.extend(weights);
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Relative L2 distance `||a - b|| / ||b||`.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Trapezoidal integral of `f` over `y`.
pub fn integrate(y: &[f64], f: &[f64]) -> f64 {
    y.windows(2)
        .zip(f.windows(2))
        .map(|(yy, ff)| 0.5 * (ff[0] + ff[1]) * (yy[1] - yy[0]))
        .sum()
}
