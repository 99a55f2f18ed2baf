//! Fictitious linear-elastic medium on Q4 elements, plane strain.

use nalgebra::{Matrix3, SMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fe::{physical_gradients, quad_dofs, GAUSS_2X2};
use crate::mesh::{Point, QuadMesh};
use crate::problem::PrescribedMotion;
use crate::sparse::{solve_spd, Assembler, Constraints, DEFAULT_SOLVE_TOL};
use crate::stiffening::element_multipliers;

pub type Matrix8 = SMatrix<f64, 8, 8>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearElasticConfig {
    pub modulus: f64,
    pub poisson: f64,
    /// Number of solves on updated geometry, each taking an equal share of the motion.
    pub iterations: usize,
    pub layer_factors: Vec<f64>,
}

impl Default for LinearElasticConfig {
    fn default() -> Self {
        LinearElasticConfig {
            modulus: 1.0,
            poisson: 0.3,
            iterations: 1,
            layer_factors: Vec::new(),
        }
    }
}

impl LinearElasticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.modulus > 0.0 && self.modulus.is_finite()) {
            return bad(format!("modulus must be positive, got {}", self.modulus));
        }
        if !(0.0..0.5).contains(&self.poisson) {
            return bad(format!("poisson must be in [0, 0.5), got {}", self.poisson));
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if let Some(f) = self.layer_factors.iter().find(|f| !(**f > 0.0)) {
            return bad(format!("layer factor must be positive, got {f}"));
        }
        Ok(())
    }
}

/// Plane-strain constitutive matrix in `[xx, yy, xy]` with engineering shear.
pub fn plane_strain_matrix(modulus: f64, poisson: f64) -> Matrix3<f64> {
    let c = modulus / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    Matrix3::new(
        1.0 - poisson,
        poisson,
        0.0, //
        poisson,
        1.0 - poisson,
        0.0, //
        0.0,
        0.0,
        0.5 - poisson,
    ) * c
}

/// 8x8 stiffness of one quad, dofs `[x1, y1, .., x4, y4]`, already multiplied by
/// `factor`. The element index is only used in the error.
pub fn element_stiffness_q4(
    corners: &[Point; 4],
    modulus: f64,
    poisson: f64,
    factor: f64,
    element: usize,
) -> Result<Matrix8> {
    let d = plane_strain_matrix(modulus, poisson) * factor;
    let mut k = Matrix8::zeros();
    for &(xi, eta) in &GAUSS_2X2 {
        let g = physical_gradients(corners, xi, eta);
        if !(g.det_j > 0.0) {
            return Err(Error::NonPositiveJacobian {
                element,
                det: g.det_j,
            });
        }
        let mut b = SMatrix::<f64, 3, 8>::zeros();
        for (a, n) in g.grads.iter().enumerate() {
            b[(0, 2 * a)] = n.x;
            b[(1, 2 * a + 1)] = n.y;
            b[(2, 2 * a)] = n.y;
            b[(2, 2 * a + 1)] = n.x;
        }
        k += b.transpose() * d * b * g.det_j;
    }
    Ok(k)
}

fn solve_once(
    nodes: &[Point],
    mesh: &QuadMesh,
    config: &LinearElasticConfig,
    factors: &[f64],
    constraints: &Constraints,
) -> Result<Vec<f64>> {
    let mut asm = Assembler::new(2 * nodes.len());
    for (e, q) in mesh.quads().iter().enumerate() {
        let corners = q.map(|n| nodes[n]);
        let k = element_stiffness_q4(&corners, config.modulus, config.poisson, factors[e], e)?;
        asm.add_block(&quad_dofs(q), k.transpose().as_slice())?;
    }
    let (k, rhs) = asm.finish(constraints)?;
    solve_spd(&k, &rhs, DEFAULT_SOLVE_TOL)
}

/// Deformed mesh from the linear-elastic model. With the default single iteration
/// this is one solve on the reference geometry.
pub fn deform_linear_elastic(
    mesh: &QuadMesh,
    motion: &PrescribedMotion,
    config: &LinearElasticConfig,
) -> Result<QuadMesh> {
    config.validate()?;
    let factors = element_multipliers(mesh, &config.layer_factors)?;
    let share = 1.0 / config.iterations as f64;
    let increment = motion.constraints(mesh, share);
    let mut nodes = mesh.nodes().to_vec();
    for it in 1..=config.iterations {
        let du = solve_once(&nodes, mesh, config, &factors, &increment).map_err(|e| {
            if config.iterations > 1 {
                e.at_step(it)
            } else {
                e
            }
        })?;
        for (p, d) in nodes.iter_mut().zip(du.chunks_exact(2)) {
            p.x += d[0];
            p.y += d[1];
        }
    }
    Ok(mesh.with_coordinates(nodes))
}
