//! Planar three-link arm in the vertical plane through the lever.
//!
//! Angles are measured from the vertical (+z) toward the lever (+x); link `k`
//! points along `q1 + … + qk`.

use crate::error::{Error, Result};

/// Shoulder, elbow and wrist link lengths (m).
pub const LINK_LENGTHS: [f64; 3] = [0.13, 0.124, 0.126];

/// Base rotation that points the arm's plane at the lever.
pub fn base_yaw(x: f64, y: f64) -> Result<f64> {
    if x == 0.0 && y == 0.0 {
        return Err(Error::Domain("base yaw is undefined for a lever at the origin".into()));
    }
    Ok(y.atan2(x))
}

fn link_angles(q: [f64; 3]) -> [f64; 3] {
    [q[0], q[0] + q[1], q[0] + q[1] + q[2]]
}

/// End-effector position `(x, z)` relative to the shoulder.
pub fn forward(q: [f64; 3]) -> (f64, f64) {
    let a = link_angles(q);
    let mut x = 0.0;
    let mut z = 0.0;
    for k in 0..3 {
        x += LINK_LENGTHS[k] * a[k].sin();
        z += LINK_LENGTHS[k] * a[k].cos();
    }
    (x, z)
}

/// `∂(x, z) / ∂q`, rows `[dx/dq, dz/dq]`.
pub fn jacobian(q: [f64; 3]) -> [[f64; 3]; 2] {
    let a = link_angles(q);
    let mut jac = [[0.0; 3]; 2];
    for j in 0..3 {
        for k in j..3 {
            jac[0][j] += LINK_LENGTHS[k] * a[k].cos();
            jac[1][j] -= LINK_LENGTHS[k] * a[k].sin();
        }
    }
    jac
}

/// Damped least-squares joint step `Jᵀ (J Jᵀ + λ² I)⁻¹ d` for a desired
/// end-effector displacement `d`.
pub fn dls_step(q: [f64; 3], d: (f64, f64), damping: f64) -> [f64; 3] {
    let j = jacobian(q);
    let l2 = damping * damping;
    let a = j[0].iter().map(|v| v * v).sum::<f64>() + l2;
    let b = j[0].iter().zip(&j[1]).map(|(u, v)| u * v).sum::<f64>();
    let c = j[1].iter().map(|v| v * v).sum::<f64>() + l2;
    let det = a * c - b * b;
    let y0 = (c * d.0 - b * d.1) / det;
    let y1 = (a * d.1 - b * d.0) / det;
    [
        j[0][0] * y0 + j[1][0] * y1,
        j[0][1] * y0 + j[1][1] * y1,
        j[0][2] * y0 + j[1][2] * y1,
    ]
}
