//! Bilinear quadrilateral (Q4) shape functions and 2x2 Gauss quadrature.

use nalgebra::{Matrix2, Vector2};

use crate::mesh::Point;

const G: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

/// 2x2 Gauss points in the reference square; all weights are one.
pub const GAUSS_2X2: [(f64, f64); 4] = [(-G, -G), (G, -G), (G, G), (-G, G)];

const XI: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
const ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

pub fn shape(xi: f64, eta: f64) -> [f64; 4] {
    std::array::from_fn(|a| 0.25 * (1.0 + XI[a] * xi) * (1.0 + ETA[a] * eta))
}

/// Derivatives `[dN/dxi, dN/deta]` per node.
pub fn shape_derivatives(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    std::array::from_fn(|a| {
        [
            0.25 * XI[a] * (1.0 + ETA[a] * eta),
            0.25 * ETA[a] * (1.0 + XI[a] * xi),
        ]
    })
}

/// Shape function gradients with respect to physical coordinates at a point.
#[derive(Clone, Copy, Debug)]
pub struct GradientsAt {
    pub grads: [Vector2<f64>; 4],
    pub det_j: f64,
}

/// Maps reference derivatives through the Jacobian of `corners`.
pub fn physical_gradients(corners: &[Point; 4], xi: f64, eta: f64) -> GradientsAt {
    let dn = shape_derivatives(xi, eta);
    // J[i][k] = d x_i / d xi_k
    let mut jac = Matrix2::zeros();
    for a in 0..4 {
        jac[(0, 0)] += dn[a][0] * corners[a].x;
        jac[(0, 1)] += dn[a][1] * corners[a].x;
        jac[(1, 0)] += dn[a][0] * corners[a].y;
        jac[(1, 1)] += dn[a][1] * corners[a].y;
    }
    let det_j = jac.determinant();
    let inv = jac
        .try_inverse()
        .unwrap_or_else(|| Matrix2::from_element(f64::NAN));
    let grads = std::array::from_fn(|a| {
        let d = Vector2::new(dn[a][0], dn[a][1]);
        // dN/dx = J^-T dN/dxi
        inv.transpose() * d
    });
    GradientsAt { grads, det_j }
}

/// Global dofs of a quad, node-major x then y.
pub fn quad_dofs(quad: &[usize; 4]) -> [usize; 8] {
    std::array::from_fn(|k| 2 * quad[k / 2] + k % 2)
}
