//! Element matrices of the lineal + torsional spring network.

use nalgebra::{Matrix3, Matrix4, Matrix6, SMatrix};

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Truss stiffness of a unit-modulus, unit-section bar between `p` and `q`, dofs
/// ordered `[xp, yp, xq, yq]`. Stiffness is inversely proportional to length.
pub fn lineal_stiffness(p: &Point, q: &Point) -> Result<Matrix4<f64>> {
    let d = q - p;
    let len = d.norm();
    if len == 0.0 {
        return Err(Error::DegenerateEdge);
    }
    let (c, s) = (d.x / len, d.y / len);
    let (cc, cs, ss) = (c * c, c * s, s * s);
    Ok(Matrix4::new(
        cc, cs, -cc, -cs, //
        cs, ss, -cs, -ss, //
        -cc, -cs, cc, cs, //
        -cs, -ss, cs, ss,
    ) / len)
}

fn area(tri: &[Point; 3]) -> f64 {
    let u = tri[1] - tri[0];
    let v = tri[2] - tri[0];
    0.5 * (u.x * v.y - u.y * v.x)
}

/// Vertex torsional stiffnesses `L_ij^2 L_ik^2 / (4 A^2)` for the three corners.
pub fn torsional_coefficients(tri: &[Point; 3]) -> Result<[f64; 3]> {
    let a = area(tri);
    if a == 0.0 || !a.is_finite() {
        return Err(Error::DegenerateTriangle);
    }
    let a2 = 4.0 * a * a;
    Ok(std::array::from_fn(|i| {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        (tri[j] - tri[i]).norm_squared() * (tri[k] - tri[i]).norm_squared() / a2
    }))
}

/// Linearized map from the six nodal displacements to the three corner-angle
/// changes. Each row annihilates rigid translations and infinitesimal rotations.
pub fn angle_rotation_matrix(tri: &[Point; 3]) -> Result<SMatrix<f64, 3, 6>> {
    let mut r = SMatrix::<f64, 3, 6>::zeros();
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        let ab = |from: usize, to: usize| -> Result<(f64, f64)> {
            let d = tri[to] - tri[from];
            let l2 = d.norm_squared();
            if l2 == 0.0 {
                return Err(Error::DegenerateEdge);
            }
            Ok((d.x / l2, d.y / l2))
        };
        let (a_ij, b_ij) = ab(i, j)?;
        let (a_ik, b_ik) = ab(i, k)?;
        r[(i, 2 * i)] = b_ik - b_ij;
        r[(i, 2 * i + 1)] = a_ij - a_ik;
        r[(i, 2 * j)] = b_ij;
        r[(i, 2 * j + 1)] = -a_ij;
        r[(i, 2 * k)] = -b_ik;
        r[(i, 2 * k + 1)] = a_ik;
    }
    Ok(r)
}

/// `Rᵀ C R` with the vertex stiffnesses scaled by `torsional_scale`.
pub fn torsional_stiffness(tri: &[Point; 3], torsional_scale: f64) -> Result<Matrix6<f64>> {
    let c = torsional_coefficients(tri)?;
    let r = angle_rotation_matrix(tri)?;
    let cm = Matrix3::from_diagonal(&nalgebra::Vector3::from(c)) * torsional_scale;
    Ok(r.transpose() * cm * r)
}

/// Three edge springs plus the torsional block of one triangle, dofs
/// `[x0, y0, x1, y1, x2, y2]`.
pub fn triangle_stiffness(tri: &[Point; 3], torsional_scale: f64) -> Result<Matrix6<f64>> {
    let mut k = torsional_stiffness(tri, torsional_scale)?;
    for a in 0..3 {
        let b = (a + 1) % 3;
        let kl = lineal_stiffness(&tri[a], &tri[b])?;
        let idx = [2 * a, 2 * a + 1, 2 * b, 2 * b + 1];
        for (r, &gr) in idx.iter().enumerate() {
            for (c, &gc) in idx.iter().enumerate() {
                k[(gr, gc)] += kl[(r, c)];
            }
        }
    }
    Ok(k)
}
