//! Real 3D rotation utilities: axis-angle construction and extraction, and
//! Euler-style decompositions about a restricted pair of axes.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};

use crate::error::{Error, Result};

/// Proper rotation about `axis` (need not be normalized) by `angle` (radians,
/// right-hand rule).
pub fn rotation_about(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle).into_inner()
}

/// `max(|R^T R - I|_max, |det R - 1|)`: how far `m` is from a proper rotation.
pub fn orthonormality_defect(m: &Matrix3<f64>) -> f64 {
    let gram = m.transpose() * m;
    let mut defect = 0.0_f64;
    for i in 0..3 {
        for k in 0..3 {
            let expected = if i == k { 1.0 } else { 0.0 };
            defect = defect.max((gram[(i, k)] - expected).abs());
        }
    }
    defect.max((m.determinant() - 1.0).abs())
}

/// Axis (unit) and angle in `[0, pi]` of a proper rotation.  The identity
/// returns `(e3, 0)`.
pub fn axis_angle(m: &Matrix3<f64>) -> (Vector3<f64>, f64) {
    let rot = Rotation3::from_matrix_unchecked(*m);
    match rot.axis_angle() {
        Some((axis, angle)) => (axis.into_inner(), angle),
        None => (Vector3::z(), 0.0),
    }
}

/// Decompose a proper rotation as `R = R_a(alpha) * R_b(beta) * R_a(gamma)`
/// for an orthonormal axis pair `(a, b)`.
///
/// This is the standard two-axis Euler decomposition expressed in the frame
/// `(b x a, b, a)`; it exists for every proper rotation.  Angles are returned
/// as `(alpha, beta, gamma)`.
pub fn euler_two_axis(r: &Matrix3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> Result<(f64, f64, f64)> {
    if (a.norm() - 1.0).abs() > 1e-9 || (b.norm() - 1.0).abs() > 1e-9 || a.dot(b).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "euler_two_axis requires orthonormal axes".into(),
        ));
    }
    // Frame with f3 = a, f2 = b, f1 = f2 x f3 (right-handed).
    let f3 = *a;
    let f2 = *b;
    let f1 = f2.cross(&f3);
    let basis = Matrix3::from_columns(&[f1, f2, f3]);
    let m = basis.transpose() * r * basis;

    // In frame coordinates the problem is the classical Z-Y-Z decomposition.
    let sin_beta = m[(0, 2)].hypot(m[(1, 2)]);
    let beta = sin_beta.atan2(m[(2, 2)]);
    if sin_beta > 1e-12 {
        let alpha = m[(1, 2)].atan2(m[(0, 2)]);
        let gamma = m[(2, 1)].atan2(-m[(2, 0)]);
        Ok((alpha, beta, gamma))
    } else if m[(2, 2)] > 0.0 {
        // beta ~ 0: rotation about a alone; put the whole angle in alpha.
        Ok((m[(1, 0)].atan2(m[(0, 0)]), 0.0, 0.0))
    } else {
        // beta ~ pi: R = R_a(alpha) R_b(pi); with gamma = 0,
        // M = Rz(alpha) Ry(pi) so M11 = -cos(alpha), M21 = -sin(alpha).
        Ok(((-m[(1, 0)]).atan2(-m[(0, 0)]), std::f64::consts::PI, 0.0))
    }
}
