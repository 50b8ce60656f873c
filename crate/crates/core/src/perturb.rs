//! Perturbed Reynolds stresses.
//!
//! Every mode works on the barycentric point of the anisotropy: the point is
//! moved, mapped back to eigenvalues and the stress is reassembled with the
//! unchanged kinetic energy. Only the full correction also rotates the
//! eigenvector frame.

use serde::{Deserialize, Serialize};

use crate::rotation::{apply_rotation, TaitBryanAngles};
use crate::tensor::{
    from_barycentric, reconstruct, to_barycentric, AnisotropyEigenSystem, BarycentricPoint, Corner,
    ReynoldsStress, INSIDE_TOL,
};
use crate::{Error, Result};

/// Below this distance a point is considered to sit on the target corner.
const AT_CORNER_EPS: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PerturbationSpec {
    /// Relative shift `delta_b` in [0, 1] toward `corner`.
    DataFreeCorner { corner: Corner, delta_b: f64 },
    /// Euclidean shift of length `p` toward `corner`.
    DataDrivenMagnitude { corner: Corner, p: f64 },
    /// Translation by `p_corr` in the barycentric plane.
    ComponentwiseCorrection { p_corr: [f64; 2] },
    /// Translation by `p_corr` plus a rotation of the eigenvector frame.
    FullAnisotropyCorrection {
        p_corr: [f64; 2],
        angles: TaitBryanAngles,
    },
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PerturbationSpec::DataFreeCorner { delta_b, .. } => check_delta_b(delta_b),
            PerturbationSpec::DataDrivenMagnitude { p, .. } => check_magnitude(p),
            PerturbationSpec::ComponentwiseCorrection { p_corr } => check_vector(p_corr),
            PerturbationSpec::FullAnisotropyCorrection { p_corr, angles } => {
                check_vector(p_corr)?;
                if angles.to_array().iter().all(|a| a.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument("non-finite rotation angle".into()))
                }
            }
        }
    }

    /// Moves `x` according to the mode.
    pub fn apply_to_point(&self, x: &BarycentricPoint) -> Result<BarycentricPoint> {
        match *self {
            PerturbationSpec::DataFreeCorner { corner, delta_b } => {
                perturb_point_corner(x, corner, delta_b)
            }
            PerturbationSpec::DataDrivenMagnitude { corner, p } => {
                perturb_point_magnitude(x, corner, p)
            }
            PerturbationSpec::ComponentwiseCorrection { p_corr }
            | PerturbationSpec::FullAnisotropyCorrection { p_corr, .. } => {
                check_vector(p_corr)?;
                Ok(perturb_point_componentwise(x, p_corr))
            }
        }
    }
}

fn check_delta_b(delta_b: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta_b) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "delta_b must lie in [0, 1], got {delta_b}"
        )))
    }
}

fn check_magnitude(p: f64) -> Result<()> {
    if p.is_finite() && p >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "perturbation magnitude must be finite and non-negative, got {p}"
        )))
    }
}

fn check_vector(v: [f64; 2]) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "non-finite correction vector".into(),
        ))
    }
}

/// `x* = x + delta_b (x_t - x)`.
pub fn perturb_point_corner(
    x: &BarycentricPoint,
    corner: Corner,
    delta_b: f64,
) -> Result<BarycentricPoint> {
    check_delta_b(delta_b)?;
    if delta_b == 1.0 {
        return Ok(corner.point());
    }
    let weights = std::array::from_fn(|i| {
        let target = if i == corner.index() { 1.0 } else { 0.0 };
        x.weights[i] + delta_b * (target - x.weights[i])
    });
    Ok(BarycentricPoint::from_weights(weights))
}

/// Moves `x` a Euclidean distance `p` toward the corner, stopping at it.
pub fn perturb_point_magnitude(
    x: &BarycentricPoint,
    corner: Corner,
    p: f64,
) -> Result<BarycentricPoint> {
    check_magnitude(p)?;
    let [tx, ty] = corner.position();
    let dist = (tx - x.x).hypot(ty - x.y);
    if dist < AT_CORNER_EPS || p == 0.0 {
        return Ok(*x);
    }
    if p >= dist {
        return Ok(corner.point());
    }
    perturb_point_corner(x, corner, p / dist)
}

/// `x + p_corr`, projected back onto the closed triangle when it leaves it.
pub fn perturb_point_componentwise(x: &BarycentricPoint, p_corr: [f64; 2]) -> BarycentricPoint {
    if p_corr == [0.0, 0.0] {
        return *x;
    }
    project_to_triangle(x.x + p_corr[0], x.y + p_corr[1])
}

/// Euclidean projection of `(x, y)` onto the closed realizability triangle.
pub fn project_to_triangle(x: f64, y: f64) -> BarycentricPoint {
    let p = BarycentricPoint::from_xy(x, y);
    if p.is_inside(0.0) {
        return p;
    }
    let corners = Corner::ALL.map(Corner::position);
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..3 {
        let a = corners[i];
        let b = corners[(i + 1) % 3];
        let q = closest_on_segment([x, y], a, b);
        let d = (q[0] - x).hypot(q[1] - y);
        if d < best.0 {
            best = (d, q);
        }
    }
    // snap exact corner hits so that weights come out as clean 0/1
    for c in Corner::ALL {
        if c.position() == best.1 {
            return c.point();
        }
    }
    BarycentricPoint::from_xy(best.1[0], best.1[1])
}

fn closest_on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1])).clamp(0.0, 1.0);
    if t == 0.0 {
        a
    } else if t == 1.0 {
        b
    } else {
        [a[0] + t * ab[0], a[1] + t * ab[1]]
    }
}

/// Perturbed point and eigensystem for `spec`, before reassembly.
pub fn perturb_eigensystem(
    eig: &AnisotropyEigenSystem,
    spec: &PerturbationSpec,
) -> Result<AnisotropyEigenSystem> {
    spec.validate()?;
    let x = to_barycentric(eig);
    let x_star = spec.apply_to_point(&x)?;
    let lambda = from_barycentric(&x_star);
    let frame = match spec {
        PerturbationSpec::FullAnisotropyCorrection { angles, .. } => {
            apply_rotation(&eig.frame, angles)
        }
        _ => eig.frame,
    };
    Ok(AnisotropyEigenSystem {
        k: eig.k,
        lambda,
        frame,
        degenerate: eig.degenerate,
    })
}

/// `tau* = k (v* diag(lambda*) v*^T + 2/3 I)`.
///
/// Degenerate inputs (kinetic energy below the floor) come back isotropic.
pub fn build_perturbed_stress(
    eig: &AnisotropyEigenSystem,
    spec: &PerturbationSpec,
) -> Result<ReynoldsStress> {
    if eig.degenerate {
        spec.validate()?;
        return Ok(ReynoldsStress::isotropic(eig.k.max(0.0)));
    }
    let star = perturb_eigensystem(eig, spec)?;
    Ok(reconstruct(&star))
}

/// True when the point is inside the triangle up to the library tolerance.
pub fn point_is_admissible(x: &BarycentricPoint) -> bool {
    x.is_inside(INSIDE_TOL)
}
