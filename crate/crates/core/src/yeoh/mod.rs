//! Yeoh hyperelastic mesh model: total Lagrangian Q4 elements and an
//! incremental Newton solve.

mod material;

pub use material::{
    evaluate, material_tangent, pk2_stress, reduced_invariants, yeoh_energy, YeohMaterial,
};

use nalgebra::{Matrix2, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fe::{physical_gradients, quad_dofs, GAUSS_2X2};
use crate::mesh::{Point, QuadMesh};
use crate::problem::PrescribedMotion;
use crate::sparse::{solve_symmetric, Assembler, Constraints, SparseSymmetric, DEFAULT_SOLVE_TOL};
use crate::stiffening::element_multipliers;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YeohConfig {
    pub a10: f64,
    pub a20: f64,
    pub a30: f64,
    pub kappa: f64,
    pub increments: usize,
    pub newton_tol: f64,
    pub max_iters: usize,
    /// Per-layer multipliers of `a20`, innermost first.
    pub layer_factors: Vec<f64>,
}

impl Default for YeohConfig {
    fn default() -> Self {
        YeohConfig {
            a10: 1.0,
            a20: 1e3,
            a30: 0.0,
            kappa: 1.0,
            increments: 10,
            newton_tol: 1e-8,
            max_iters: 25,
            layer_factors: Vec::new(),
        }
    }
}

impl YeohConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.a10 > 0.0) {
            return bad(format!("a10 must be positive, got {}", self.a10));
        }
        if !(self.kappa > 0.0) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if !(self.a20 >= 0.0 && self.a30 >= 0.0) {
            return bad("a20 and a30 must be non-negative".into());
        }
        if self.increments == 0 || self.max_iters == 0 {
            return bad("increments and max_iters must be at least 1".into());
        }
        if !(self.newton_tol > 0.0) {
            return bad(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            ));
        }
        if let Some(f) = self.layer_factors.iter().find(|f| !(**f > 0.0)) {
            return bad(format!("layer factor must be positive, got {f}"));
        }
        Ok(())
    }

    pub fn material(&self) -> YeohMaterial {
        YeohMaterial {
            a10: self.a10,
            a20: self.a20,
            a30: self.a30,
            kappa: self.kappa,
        }
    }

    /// Material of each element with `a20` scaled by its layer factor.
    pub fn element_materials(&self, mesh: &QuadMesh) -> Result<Vec<YeohMaterial>> {
        let base = self.material();
        Ok(element_multipliers(mesh, &self.layer_factors)?
            .into_iter()
            .map(|f| YeohMaterial {
                a20: base.a20 * f,
                ..base
            })
            .collect())
    }
}

type Vector8 = SVector<f64, 8>;
type Matrix8 = SMatrix<f64, 8, 8>;

/// Strain energy, internal force and tangent of one element in the total
/// Lagrangian setting. `u` holds the corner displacements.
pub fn element_response(
    reference: &[Point; 4],
    u: &Vector8,
    material: &YeohMaterial,
    element: usize,
) -> Result<(f64, Vector8, Matrix8)> {
    let mut energy = 0.0;
    let mut force = Vector8::zeros();
    let mut k = Matrix8::zeros();
    for &(xi, eta) in &GAUSS_2X2 {
        let g = physical_gradients(reference, xi, eta);
        if !(g.det_j > 0.0) {
            return Err(Error::NonPositiveJacobian {
                element,
                det: g.det_j,
            });
        }
        let mut f = Matrix2::identity();
        for (a, n) in g.grads.iter().enumerate() {
            f[(0, 0)] += u[2 * a] * n.x;
            f[(0, 1)] += u[2 * a] * n.y;
            f[(1, 0)] += u[2 * a + 1] * n.x;
            f[(1, 1)] += u[2 * a + 1] * n.y;
        }
        let (w, s, d, s_tensor) = evaluate(&f, material).map_err(|e| match e {
            Error::Inadmissible { det, .. } => Error::Inadmissible { element, det },
            other => other,
        })?;
        let mut b = SMatrix::<f64, 3, 8>::zeros();
        for (a, n) in g.grads.iter().enumerate() {
            b[(0, 2 * a)] = f[(0, 0)] * n.x;
            b[(0, 2 * a + 1)] = f[(1, 0)] * n.x;
            b[(1, 2 * a)] = f[(0, 1)] * n.y;
            b[(1, 2 * a + 1)] = f[(1, 1)] * n.y;
            b[(2, 2 * a)] = f[(0, 0)] * n.y + f[(0, 1)] * n.x;
            b[(2, 2 * a + 1)] = f[(1, 0)] * n.y + f[(1, 1)] * n.x;
        }
        let dv = g.det_j;
        energy += w * dv;
        force += b.transpose() * s * dv;
        k += b.transpose() * d * b * dv;
        for a in 0..4 {
            for c in 0..4 {
                let gab = g.grads[a].dot(&(s_tensor * g.grads[c])) * dv;
                k[(2 * a, 2 * c)] += gab;
                k[(2 * a + 1, 2 * c + 1)] += gab;
            }
        }
    }
    Ok((energy, force, k))
}

fn gather(q: &[usize; 4], u: &[f64]) -> Vector8 {
    let dofs = quad_dofs(q);
    Vector8::from_fn(|i, _| u[dofs[i]])
}

/// Total strain energy of the displaced reference mesh.
pub fn total_energy(mesh: &QuadMesh, u: &[f64], materials: &[YeohMaterial]) -> Result<f64> {
    let mut total = 0.0;
    for (e, q) in mesh.quads().iter().enumerate() {
        let corners = q.map(|n| mesh.nodes()[n]);
        total += element_response(&corners, &gather(q, u), &materials[e], e)?.0;
    }
    Ok(total)
}

/// Internal nodal forces and tangent stiffness at displacement `u` of the
/// reference mesh, without any boundary treatment.
pub fn internal_forces_and_tangent(
    mesh: &QuadMesh,
    u: &[f64],
    materials: &[YeohMaterial],
) -> Result<(Vec<f64>, SparseSymmetric)> {
    if u.len() != mesh.n_dofs() || materials.len() != mesh.n_elements() {
        return Err(Error::InvalidConfig(format!(
            "{} displacements and {} materials for {} dofs and {} elements",
            u.len(),
            materials.len(),
            mesh.n_dofs(),
            mesh.n_elements()
        )));
    }
    let mut asm = Assembler::new(mesh.n_dofs());
    for (e, q) in mesh.quads().iter().enumerate() {
        let corners = q.map(|n| mesh.nodes()[n]);
        let (_, f, k) = element_response(&corners, &gather(q, u), &materials[e], e)?;
        let dofs = quad_dofs(q);
        asm.add_block(&dofs, k.transpose().as_slice())?;
        asm.add_vector(&dofs, f.as_slice())?;
    }
    let (k, f) = asm.finish_raw()?;
    Ok((f, k))
}

fn free_norm(v: &[f64], mask: &[bool]) -> f64 {
    v.iter()
        .zip(mask)
        .filter(|(_, &m)| !m)
        .map(|(x, _)| x * x)
        .sum::<f64>()
        .sqrt()
}

/// Converged displacement field of a hyperelastic mesh solve, kept for the
/// sensitivity blocks.
#[derive(Clone, Debug)]
pub struct EquilibriumState {
    pub reference: QuadMesh,
    pub displacement: Vec<f64>,
    /// Target value of every prescribed dof (interface and walls).
    pub prescribed: Constraints,
    pub materials: Vec<YeohMaterial>,
    /// Free-dof residual norm at the last Newton check.
    pub residual_norm: f64,
    /// Internal forces at the last Newton check.
    pub internal_forces: Vec<f64>,
    pub tolerance: f64,
    pub newton_iterations: usize,
}

impl EquilibriumState {
    pub fn is_converged(&self) -> bool {
        self.residual_norm <= self.tolerance
    }

    pub fn deformed(&self) -> QuadMesh {
        let nodes = self
            .reference
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Point::new(
                    p.x + self.displacement[2 * i],
                    p.y + self.displacement[2 * i + 1],
                )
            })
            .collect();
        self.reference.with_coordinates(nodes)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonSettings {
    pub increments: usize,
    pub tol: f64,
    pub max_iters: usize,
}

struct Solver<'a> {
    mesh: &'a QuadMesh,
    materials: &'a [YeohMaterial],
    mask: Vec<bool>,
    settings: NewtonSettings,
    iterations: usize,
}

struct Checked {
    forces: Vec<f64>,
    norm: f64,
}

impl Solver<'_> {
    /// Newton iterations on `u` toward `target` on the prescribed dofs. The first
    /// iteration moves the prescribed dofs to the target; later ones keep them.
    fn increment(&mut self, u: &mut [f64], target: &Constraints, index: usize) -> Result<Checked> {
        let mut step = Constraints::new();
        for (d, v) in target.iter() {
            step.set(d, v - u[d]);
        }
        let mut first = true;
        let mut last = f64::INFINITY;
        for _ in 0..=self.settings.max_iters {
            let (forces, k) = internal_forces_and_tangent(self.mesh, u, self.materials)?;
            let norm = free_norm(&forces, &self.mask);
            if !first || step.iter().all(|(_, v)| v == 0.0) {
                if norm <= self.settings.tol {
                    return Ok(Checked { forces, norm });
                }
                if !norm.is_finite() {
                    break;
                }
            }
            last = norm;
            let mut rhs: Vec<f64> = forces
                .iter()
                .zip(&self.mask)
                .map(|(f, &m)| if m { 0.0 } else { -f })
                .collect();
            let mut k = k;
            let prescribed = if first {
                step.clone()
            } else {
                let mut z = Constraints::new();
                for (d, _) in step.iter() {
                    z.set(d, 0.0);
                }
                z
            };
            crate::sparse::apply_constraints(&mut k, &mut rhs, &prescribed)?;
            let du = solve_symmetric(&k, &rhs, DEFAULT_SOLVE_TOL)?;
            for (x, d) in u.iter_mut().zip(&du) {
                *x += d;
            }
            if first {
                for (d, v) in target.iter() {
                    u[d] = v;
                }
            }
            first = false;
            self.iterations += 1;
        }
        Err(Error::NewtonDiverged {
            increment: index,
            residual: last,
        })
    }
}

/// Quasi-static solve that raises the prescribed values in `settings.increments`
/// equal load steps. A failed increment is retried once as two half steps.
pub fn solve_equilibrium(
    mesh: &QuadMesh,
    materials: &[YeohMaterial],
    prescribed: &Constraints,
    initial: Option<&[f64]>,
    settings: NewtonSettings,
) -> Result<EquilibriumState> {
    let n = mesh.n_dofs();
    let mut u = initial.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    if u.len() != n {
        return Err(Error::InvalidConfig(
            "initial guess has wrong length".into(),
        ));
    }
    let mut solver = Solver {
        mesh,
        materials,
        mask: prescribed.mask(n),
        settings,
        iterations: 0,
    };
    let start: Vec<(usize, f64)> = prescribed.iter().map(|(d, _)| (d, u[d])).collect();
    let at = |lf: f64| {
        let mut c = Constraints::new();
        for (&(d, u0), (_, v)) in start.iter().zip(prescribed.iter()) {
            c.set(d, if lf == 1.0 { v } else { u0 + lf * (v - u0) });
        }
        c
    };
    let inc = settings.increments;
    let mut checked = None;
    for i in 1..=inc {
        let before = u.clone();
        let result = solver.increment(&mut u, &at(i as f64 / inc as f64), i);
        let done = match result {
            Ok(c) => c,
            Err(Error::SolveTolerance { .. } | Error::NotPositiveDefinite { .. })
            | Err(Error::NewtonDiverged { .. })
            | Err(Error::Inadmissible { .. }) => {
                u = before;
                let mid = (2 * i - 1) as f64 / (2 * inc) as f64;
                solver.increment(&mut u, &at(mid), i)?;
                solver.increment(&mut u, &at(i as f64 / inc as f64), i)?
            }
            Err(e) => return Err(e),
        };
        checked = Some(done);
    }
    let Checked { forces, norm } = checked.expect("at least one increment");
    Ok(EquilibriumState {
        reference: mesh.clone(),
        displacement: u,
        prescribed: prescribed.clone(),
        materials: materials.to_vec(),
        residual_norm: norm,
        internal_forces: forces,
        tolerance: settings.tol,
        newton_iterations: solver.iterations,
    })
}

/// Deforms the mesh with the Yeoh model; returns the deformed mesh and the
/// equilibrium state.
pub fn deform_hyperelastic(
    mesh: &QuadMesh,
    motion: &PrescribedMotion,
    config: &YeohConfig,
) -> Result<(QuadMesh, EquilibriumState)> {
    config.validate()?;
    mesh.check_admissible()?;
    let materials = config.element_materials(mesh)?;
    let state = solve_equilibrium(
        mesh,
        &materials,
        &motion.constraints(mesh, 1.0),
        None,
        NewtonSettings {
            increments: config.increments,
            tol: config.newton_tol,
            max_iters: config.max_iters,
        },
    )?;
    Ok((state.deformed(), state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Vec2;
    use crate::problem::{build_patch, MotionMode};

    fn patch_state(m: &QuadMesh, amp: f64) -> Vec<f64> {
        m.nodes()
            .iter()
            .flat_map(|p| {
                [
                    amp * (0.3 * p.y + 0.2 * p.x * p.y),
                    amp * (-0.1 * p.x + 0.25 * p.y * p.y),
                ]
            })
            .collect()
    }

    #[test]
    fn zero_displacement_has_no_forces() {
        let m = build_patch(2, 2, 0.5).unwrap();
        let mats = vec![YeohMaterial::default(); 4];
        let (f, k) = internal_forces_and_tangent(&m, &vec![0.0; m.n_dofs()], &mats).unwrap();
        assert!(f.iter().all(|&x| x == 0.0));
        assert!(k.asymmetry() < 1e-12);
    }

    #[test]
    fn forces_and_tangent_are_energy_derivatives() {
        let m = build_patch(2, 2, 0.5).unwrap();
        let mat = YeohMaterial {
            a20: 10.0,
            a30: 1.0,
            ..Default::default()
        };
        let mats = vec![mat; 4];
        let u = patch_state(&m, 0.4);
        let (f, k) = internal_forces_and_tangent(&m, &u, &mats).unwrap();
        assert!(k.asymmetry() < 1e-10 * f.iter().map(|x| x.abs()).fold(1.0, f64::max));
        let h = 1e-6;
        let kd = k.to_dense();
        let (mut num, mut den) = (0.0, 0.0);
        let (mut fnum, mut fden) = (0.0, 0.0);
        for j in 0..m.n_dofs() {
            let mut up = u.clone();
            let mut um = u.clone();
            up[j] += h;
            um[j] -= h;
            let (fp, _) = internal_forces_and_tangent(&m, &up, &mats).unwrap();
            let (fm, _) = internal_forces_and_tangent(&m, &um, &mats).unwrap();
            for i in 0..m.n_dofs() {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                num += (fd - kd[i][j]).powi(2);
                den += kd[i][j].powi(2);
            }
            let ep = total_energy(&m, &up, &mats).unwrap();
            let em = total_energy(&m, &um, &mats).unwrap();
            fnum += ((ep - em) / (2.0 * h) - f[j]).powi(2);
            fden += f[j] * f[j];
        }
        assert!((num / den).sqrt() < 1e-6, "tangent {}", (num / den).sqrt());
        assert!(
            (fnum / fden).sqrt() < 1e-6,
            "forces {}",
            (fnum / fden).sqrt()
        );
    }

    fn ring_motion(m: &QuadMesh, f: impl Fn(&Point) -> Vec2) -> PrescribedMotion {
        let nodes = m.interface().to_vec();
        let disp = nodes.iter().map(|&n| f(&m.nodes()[n])).collect();
        PrescribedMotion::new(m, nodes, disp, MotionMode::FromFile).unwrap()
    }

    #[test]
    fn zero_motion_needs_no_iterations() {
        let m = build_patch(3, 3, 1.0).unwrap();
        let (out, state) =
            deform_hyperelastic(&m, &ring_motion(&m, |_| Vec2::zeros()), &Default::default())
                .unwrap();
        assert_eq!(out.nodes(), m.nodes());
        assert_eq!(state.newton_iterations, 0);
        assert_eq!(state.residual_norm, 0.0);
    }

    #[test]
    fn boundary_translation_is_exact() {
        let m = build_patch(3, 3, 1.0).unwrap();
        let d = Vec2::new(0.3, -0.2);
        let (out, state) =
            deform_hyperelastic(&m, &ring_motion(&m, |_| d), &Default::default()).unwrap();
        for (p, q) in out.nodes().iter().zip(m.nodes()) {
            assert!((p - q - d).norm() < 1e-12);
        }
        assert!(state.is_converged());
    }

    #[test]
    fn converges_on_large_shear() {
        let m = build_patch(4, 4, 0.25).unwrap();
        let (out, state) = deform_hyperelastic(
            &m,
            &ring_motion(&m, |p| Vec2::new(0.3 * p.y, 0.0)),
            &Default::default(),
        )
        .unwrap();
        assert!(state.is_converged());
        out.check_admissible().unwrap();
        // Affine boundary data on a homogeneous material: affine interior.
        for (p, q) in out.nodes().iter().zip(m.nodes()) {
            assert!((p.x - q.x - 0.3 * q.y).abs() < 1e-8);
        }
    }

    #[test]
    fn divergence_reports_increment() {
        let m = build_patch(4, 4, 0.25).unwrap();
        let cfg = YeohConfig {
            max_iters: 1,
            increments: 1,
            ..Default::default()
        };
        let bump = |p: &Point| Vec2::new(0.0, 0.2 * (std::f64::consts::PI * p.x).sin() * p.y);
        let err = deform_hyperelastic(&m, &ring_motion(&m, bump), &cfg).unwrap_err();
        assert!(matches!(err, Error::NewtonDiverged { increment: 1, .. }));
    }
}
