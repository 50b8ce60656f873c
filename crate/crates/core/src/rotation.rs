//! Intrinsic Tait-Bryan angles in the z-y'-x'' convention.
//!
//! `R(alpha, beta, gamma) = Rz(alpha) Ry(beta) Rx(gamma)`. The relative
//! rotation between two eigenvector frames is `R = to * from^T`, so that
//! `R * from == to`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Below this `|cos(beta)|` the decomposition is treated as gimbal locked.
const GIMBAL_EPS: f64 = 1e-8;

/// Tolerance on `||F^T F - I||` accepted for input frames.
pub const ORTHONORMAL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaitBryanAngles {
    /// About z, in (-pi, pi].
    pub alpha: f64,
    /// About y', in [-pi/2, pi/2].
    pub beta: f64,
    /// About x'', in (-pi, pi].
    pub gamma: f64,
}

impl TaitBryanAngles {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);

    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }
}

pub fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn rotation_matrix(angles: &TaitBryanAngles) -> Matrix3<f64> {
    rot_z(angles.alpha) * rot_y(angles.beta) * rot_x(angles.gamma)
}

/// Decomposes a proper rotation matrix into z-y'-x'' angles.
pub fn angles_from_matrix(r: &Matrix3<f64>) -> TaitBryanAngles {
    let sb = -r[(2, 0)];
    let cb = (r[(0, 0)].powi(2) + r[(1, 0)].powi(2)).sqrt();
    if cb < GIMBAL_EPS {
        // only alpha -/+ gamma is observable; put all of it in alpha
        let alpha = (-r[(0, 1)]).atan2(r[(1, 1)]);
        let beta = std::f64::consts::FRAC_PI_2.copysign(sb);
        return TaitBryanAngles::new(wrap_pi(alpha), beta, 0.0);
    }
    let beta = sb.atan2(cb);
    let alpha = r[(1, 0)].atan2(r[(0, 0)]);
    let gamma = r[(2, 1)].atan2(r[(2, 2)]);
    TaitBryanAngles::new(wrap_pi(alpha), beta, wrap_pi(gamma))
}

/// Maps an angle into (-pi, pi].
fn wrap_pi(a: f64) -> f64 {
    use std::f64::consts::PI;
    if a <= -PI {
        a + 2.0 * PI
    } else if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

fn check_orthonormal(frame: &Matrix3<f64>, which: &str) -> Result<()> {
    let err = (frame.transpose() * frame - Matrix3::identity()).norm();
    if !(err <= ORTHONORMAL_TOL) {
        return Err(Error::InvalidArgument(format!(
            "{which} frame is not orthonormal (||F^T F - I|| = {err:e})"
        )));
    }
    Ok(())
}

/// Angles of the rotation carrying `frame_from` onto `frame_to`.
pub fn extract_angles(
    frame_from: &Matrix3<f64>,
    frame_to: &Matrix3<f64>,
) -> Result<TaitBryanAngles> {
    check_orthonormal(frame_from, "source")?;
    check_orthonormal(frame_to, "target")?;
    let r = frame_to * frame_from.transpose();
    Ok(angles_from_matrix(&r))
}

/// `R(angles) * frame`.
pub fn apply_rotation(frame: &Matrix3<f64>, angles: &TaitBryanAngles) -> Matrix3<f64> {
    rotation_matrix(angles) * frame
}
