//! Reynolds stress tensors, anisotropy eigensystems and the barycentric map.
//!
//! A stress `tau` is split as `tau = k (a + 2/3 I)` with the traceless
//! anisotropy `a = v diag(lambda) v^T`. The sorted eigenvalues of `a` map
//! linearly onto a point of the realizability triangle whose corners are the
//! one-, two- and three-component limiting states.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Kinetic energy below which the anisotropy is treated as undefined.
pub const K_FLOOR: f64 = 1e-12;

/// Tolerance used by [`BarycentricPoint::is_inside`].
pub const INSIDE_TOL: f64 = 1e-10;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Symmetric second-moment tensor `<u_i' u_j'>`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReynoldsStress {
    pub uu: f64,
    pub vv: f64,
    pub ww: f64,
    pub uv: f64,
    pub uw: f64,
    pub vw: f64,
}

impl ReynoldsStress {
    pub const fn new(uu: f64, vv: f64, ww: f64, uv: f64, uw: f64, vw: f64) -> Self {
        Self {
            uu,
            vv,
            ww,
            uv,
            uw,
            vw,
        }
    }

    pub const fn diagonal(uu: f64, vv: f64, ww: f64) -> Self {
        Self::new(uu, vv, ww, 0.0, 0.0, 0.0)
    }

    /// `(2/3) k I`.
    pub fn isotropic(k: f64) -> Self {
        let d = 2.0 * k / 3.0;
        Self::diagonal(d, d, d)
    }

    /// Uses the upper triangle of `m`.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        Self::new(
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 2)],
        )
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.uu, self.uv, self.uw, //
            self.uv, self.vv, self.vw, //
            self.uw, self.vw, self.ww,
        )
    }

    pub fn trace(&self) -> f64 {
        self.uu + self.vv + self.ww
    }

    /// Turbulent kinetic energy `k = tr(tau) / 2`.
    pub fn tke(&self) -> f64 {
        0.5 * self.trace()
    }

    pub fn norm(&self) -> f64 {
        self.to_matrix().norm()
    }

    pub fn is_finite(&self) -> bool {
        [self.uu, self.vv, self.ww, self.uv, self.uw, self.vw]
            .iter()
            .all(|c| c.is_finite())
    }

    /// Eigenvalues of the stress itself, sorted descending.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let ev = self.to_matrix().symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2]];
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    /// Componentwise linear blend `self + w (other - self)`.
    pub fn lerp(&self, other: &Self, w: f64) -> Self {
        let f = |a: f64, b: f64| a + w * (b - a);
        Self::new(
            f(self.uu, other.uu),
            f(self.vv, other.vv),
            f(self.ww, other.ww),
            f(self.uv, other.uv),
            f(self.uw, other.uw),
            f(self.vw, other.vw),
        )
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.to_matrix() - other.to_matrix()).amax()
    }
}

/// Sorted anisotropy eigenvalues, eigenvector frame and kinetic energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnisotropyEigenSystem {
    pub k: f64,
    /// Descending: `lambda[0] >= lambda[1] >= lambda[2]`.
    pub lambda: [f64; 3],
    /// Column `i` is the unit eigenvector of `lambda[i]`.
    pub frame: Matrix3<f64>,
    /// Set when `k` fell below the floor and the anisotropy is undefined.
    pub degenerate: bool,
}

impl AnisotropyEigenSystem {
    pub fn isotropic(k: f64) -> Self {
        Self {
            k,
            lambda: [0.0; 3],
            frame: Matrix3::identity(),
            degenerate: false,
        }
    }

    /// Smallest gap between distinct eigenvalue pairs; frames are only
    /// meaningful when this is bounded away from zero.
    pub fn min_eigen_gap(&self) -> f64 {
        (self.lambda[0] - self.lambda[1]).min(self.lambda[1] - self.lambda[2])
    }

    pub fn anisotropy(&self) -> Matrix3<f64> {
        let d = Matrix3::from_diagonal(&self.lambda.into());
        self.frame * d * self.frame.transpose()
    }
}

/// Spectral decomposition of the anisotropy of `tau`.
///
/// Points with `k < k_floor` return the isotropic frame with `degenerate` set.
pub fn decompose(tau: &ReynoldsStress, k_floor: f64) -> AnisotropyEigenSystem {
    let k = tau.tke();
    if !(k >= k_floor) {
        return AnisotropyEigenSystem {
            k,
            lambda: [0.0; 3],
            frame: Matrix3::identity(),
            degenerate: true,
        };
    }
    let a = tau.to_matrix() / k - Matrix3::identity() * (2.0 / 3.0);
    let eig = SymmetricEigen::new(a);

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let lambda = order.map(|i| eig.eigenvalues[i]);
    let mut frame = Matrix3::zeros();
    for (col, &src) in order.iter().enumerate() {
        frame.set_column(col, &eig.eigenvectors.column(src));
    }
    AnisotropyEigenSystem {
        k,
        lambda,
        frame: normalize_frame(&frame),
        degenerate: false,
    }
}

/// Applies the eigenvector sign convention.
///
/// Each column is flipped so that its largest-magnitude component is
/// positive; near-ties (within 1e-9) resolve to the lowest index. If the
/// result is left-handed the third column is negated.
pub fn normalize_frame(frame: &Matrix3<f64>) -> Matrix3<f64> {
    let mut out = *frame;
    for c in 0..3 {
        let mut col = out.column_mut(c);
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
        let max = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let lead = col.iter().position(|v| v.abs() >= max - 1e-9).unwrap_or(0);
        if col[lead] < 0.0 {
            col.neg_mut();
        }
    }
    if out.determinant() < 0.0 {
        out.column_mut(2).neg_mut();
    }
    out
}

/// `tau = k (v diag(lambda) v^T + 2/3 I)`.
pub fn reconstruct(eig: &AnisotropyEigenSystem) -> ReynoldsStress {
    let tau = (eig.anisotropy() + Matrix3::identity() * (2.0 / 3.0)) * eig.k;
    // symmetrize to absorb round-off from the frame products
    ReynoldsStress::from_matrix(&((tau + tau.transpose()) * 0.5))
}

/// True iff the smallest eigenvalue is at least `-tol * max(1, 2k)`.
pub fn is_realizable(tau: &ReynoldsStress, tol: f64) -> bool {
    if !tau.is_finite() {
        return false;
    }
    let min = tau.eigenvalues()[2];
    min >= -tol * (2.0 * tau.tke()).max(1.0)
}

/// Limiting states of turbulence at the triangle corners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    #[serde(rename = "1C")]
    OneComponent,
    #[serde(rename = "2C")]
    TwoComponent,
    #[serde(rename = "3C")]
    ThreeComponent,
}

impl Corner {
    pub const ALL: [Corner; 3] = [
        Corner::OneComponent,
        Corner::TwoComponent,
        Corner::ThreeComponent,
    ];

    pub fn position(self) -> [f64; 2] {
        match self {
            Corner::OneComponent => [1.0, 0.0],
            Corner::TwoComponent => [0.0, 0.0],
            Corner::ThreeComponent => [0.5, SQRT3_2],
        }
    }

    pub fn point(self) -> BarycentricPoint {
        let mut w = [0.0; 3];
        w[self.index()] = 1.0;
        let [x, y] = self.position();
        BarycentricPoint { x, y, weights: w }
    }

    pub fn index(self) -> usize {
        match self {
            Corner::OneComponent => 0,
            Corner::TwoComponent => 1,
            Corner::ThreeComponent => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Corner::OneComponent => "1C",
            Corner::TwoComponent => "2C",
            Corner::ThreeComponent => "3C",
        }
    }
}

impl std::str::FromStr for Corner {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "1C" => Ok(Corner::OneComponent),
            "2C" => Ok(Corner::TwoComponent),
            "3C" => Ok(Corner::ThreeComponent),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown corner `{other}` (expected 1C, 2C or 3C)"
            ))),
        }
    }
}

impl std::fmt::Display for Corner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Point of the barycentric plane together with its corner weights
/// `(C1, C2, C3)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarycentricPoint {
    pub x: f64,
    pub y: f64,
    pub weights: [f64; 3],
}

impl BarycentricPoint {
    pub fn from_weights(weights: [f64; 3]) -> Self {
        let mut x = 0.0;
        let mut y = 0.0;
        for (w, c) in weights.iter().zip(Corner::ALL) {
            let [cx, cy] = c.position();
            x += w * cx;
            y += w * cy;
        }
        Self { x, y, weights }
    }

    pub fn from_xy(x: f64, y: f64) -> Self {
        let c3 = y / SQRT3_2;
        let c1 = x - 0.5 * c3;
        let c2 = 1.0 - c1 - c3;
        Self {
            x,
            y,
            weights: [c1, c2, c3],
        }
    }

    pub fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn is_inside(&self, tol: f64) -> bool {
        self.weights.iter().all(|&w| w >= -tol)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Corner weights of a sorted, traceless eigenvalue triple.
pub fn barycentric_weights(lambda: &[f64; 3]) -> [f64; 3] {
    let [l1, l2, l3] = *lambda;
    [0.5 * (l1 - l2), l2 - l3, 0.5 * (3.0 * l3 + 2.0)]
}

pub fn to_barycentric(eig: &AnisotropyEigenSystem) -> BarycentricPoint {
    BarycentricPoint::from_weights(barycentric_weights(&eig.lambda))
}

/// Inverse of [`to_barycentric`]; returns the eigenvalue triple.
pub fn from_barycentric(pt: &BarycentricPoint) -> [f64; 3] {
    let [c1, c2, c3] = pt.weights;
    let l3 = (2.0 * c3 - 2.0) / 3.0;
    let l2 = c2 + l3;
    let l1 = 2.0 * c1 + l2;
    [l1, l2, l3]
}
