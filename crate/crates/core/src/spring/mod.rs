//! Lineal + torsional spring analogy on triangulated quads.

mod stiffness;
mod triangulation;

pub use stiffness::{
    angle_rotation_matrix, lineal_stiffness, torsional_coefficients, torsional_stiffness,
    triangle_stiffness,
};
pub use triangulation::{triangulate, Diagonal, DiagonalStrategy, Triangulation};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{signed_area, Point, QuadMesh};
use crate::problem::{FarhatProblem, PrescribedMotion};
use crate::quality::element_skewness;
use crate::sparse::{solve_spd, Assembler, Constraints, DEFAULT_SOLVE_TOL};
use crate::stiffening::element_multipliers;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpringConfig {
    pub n_steps: usize,
    pub strategy: DiagonalStrategy,
    /// Multiplier per layer around the interface, innermost first.
    pub layer_factors: Vec<f64>,
    #[serde(rename = "gsc")]
    pub geometric_scale: f64,
    #[serde(rename = "tsc")]
    pub torsional_scale: f64,
    /// Share of the motion used by the two selective-diagonal trials.
    pub trial_fraction: f64,
}

impl Default for SpringConfig {
    fn default() -> Self {
        SpringConfig {
            n_steps: 30,
            strategy: DiagonalStrategy::Selective,
            layer_factors: Vec::new(),
            geometric_scale: 1.0,
            torsional_scale: 1.0,
            trial_fraction: 0.2,
        }
    }
}

impl SpringConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_steps == 0 {
            return bad("n_steps must be at least 1".into());
        }
        if !(self.geometric_scale > 0.0 && self.geometric_scale.is_finite()) {
            return bad(format!(
                "gsc must be positive, got {}",
                self.geometric_scale
            ));
        }
        if !(self.torsional_scale > 0.0 && self.torsional_scale.is_finite()) {
            return bad(format!(
                "tsc must be positive, got {}",
                self.torsional_scale
            ));
        }
        if !(self.trial_fraction > 0.0 && self.trial_fraction <= 1.0) {
            return bad(format!(
                "trial_fraction must be in (0, 1], got {}",
                self.trial_fraction
            ));
        }
        if let Some(f) = self.layer_factors.iter().find(|f| !(**f > 0.0)) {
            return bad(format!("layer factor must be positive, got {f}"));
        }
        Ok(())
    }
}

/// Global stiffness of a spring network at the given geometry.
fn assemble(
    nodes: &[Point],
    tris: &[[usize; 3]],
    tri_factor: &[f64],
    torsional_scale: f64,
) -> Result<Assembler> {
    let mut asm = Assembler::new(2 * nodes.len());
    let mut block = [0.0; 36];
    for (t, &f) in tris.iter().zip(tri_factor) {
        let k = triangle_stiffness(&t.map(|n| nodes[n]), torsional_scale)?;
        for a in 0..6 {
            for b in 0..6 {
                block[a * 6 + b] = f * k[(a, b)];
            }
        }
        let dofs = [
            2 * t[0],
            2 * t[0] + 1,
            2 * t[1],
            2 * t[1] + 1,
            2 * t[2],
            2 * t[2] + 1,
        ];
        asm.add_block(&dofs, &block)?;
    }
    Ok(asm)
}

/// Moves `nodes` so that every constrained dof reaches its total displacement,
/// in `n_steps` equal increments with the stiffness rebuilt on the current
/// geometry each time. Failures carry the 1-based step index.
pub fn solve_spring_network(
    nodes: &[Point],
    tris: &[[usize; 3]],
    tri_factor: &[f64],
    total: &Constraints,
    n_steps: usize,
    torsional_scale: f64,
) -> Result<Vec<Point>> {
    if n_steps == 0 {
        return Err(Error::InvalidConfig("n_steps must be at least 1".into()));
    }
    if tri_factor.len() != tris.len() {
        return Err(Error::InvalidConfig(format!(
            "{} factors for {} triangles",
            tri_factor.len(),
            tris.len()
        )));
    }
    let mut increment = Constraints::new();
    for (d, v) in total.iter() {
        increment.set(d, v / n_steps as f64);
    }
    let mut current = nodes.to_vec();
    for step in 1..=n_steps {
        let run = || -> Result<Vec<f64>> {
            let (k, rhs) =
                assemble(&current, tris, tri_factor, torsional_scale)?.finish(&increment)?;
            solve_spd(&k, &rhs, DEFAULT_SOLVE_TOL)
        };
        let du = run().map_err(|e| e.at_step(step))?;
        for (p, d) in current.iter_mut().zip(du.chunks_exact(2)) {
            p.x += d[0];
            p.y += d[1];
        }
    }
    Ok(current)
}

fn triangle_factors(tri: &Triangulation, quad_factor: &[f64]) -> Vec<f64> {
    tri.parent_quad.iter().map(|&q| quad_factor[q]).collect()
}

fn run_fixed(
    mesh: &QuadMesh,
    motion: &PrescribedMotion,
    config: &SpringConfig,
    tri: &Triangulation,
    fraction: f64,
    n_steps: usize,
) -> Result<QuadMesh> {
    let quad_factor = element_multipliers(mesh, &config.layer_factors)?;
    let factors = triangle_factors(tri, &quad_factor);
    let s = config.geometric_scale;
    let nodes: Vec<Point> = mesh.nodes().iter().map(|p| p * s).collect();
    let total = motion.constraints(mesh, fraction * s);
    let moved = solve_spring_network(
        &nodes,
        &tri.tris,
        &factors,
        &total,
        n_steps,
        config.torsional_scale,
    )?;
    Ok(mesh.with_coordinates(moved.into_iter().map(|p| p / s).collect()))
}

/// Per-quad diagonal from two one-step trials with all-13 and all-24 splits at
/// `trial_fraction` of the motion. Higher quad skewness wins; ties go to 1-3.
pub fn select_diagonals(
    mesh: &QuadMesh,
    motion: &PrescribedMotion,
    config: &SpringConfig,
) -> Result<Vec<Diagonal>> {
    config.validate()?;
    let trial = |strategy| -> Result<Vec<f64>> {
        let tri = triangulate(mesh, strategy, None)?;
        let out = run_fixed(mesh, motion, config, &tri, config.trial_fraction, 1)?;
        Ok((0..out.n_elements())
            .map(|e| element_skewness(&out.corners(e)).unwrap_or(f64::NEG_INFINITY))
            .collect())
    };
    let s13 = trial(DiagonalStrategy::Diag13)?;
    let s24 = trial(DiagonalStrategy::Diag24)?;
    Ok(s13
        .iter()
        .zip(&s24)
        .map(|(a, b)| if b > a { Diagonal::D24 } else { Diagonal::D13 })
        .collect())
}

/// Deformed mesh from the spring analogy. The full motion is applied on the
/// interface, every other boundary node stays put.
pub fn deform_spring(
    mesh: &QuadMesh,
    motion: &PrescribedMotion,
    config: &SpringConfig,
) -> Result<QuadMesh> {
    config.validate()?;
    let choice = match config.strategy {
        DiagonalStrategy::Selective => Some(select_diagonals(mesh, motion, config)?),
        _ => None,
    };
    let tri = triangulate(mesh, config.strategy, choice.as_deref())?;
    run_fixed(mesh, motion, config, &tri, 1.0, config.n_steps)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FarhatOutcome {
    pub nodes: Vec<Point>,
    /// Triangles with non-positive signed area after the solve.
    pub inverted: usize,
}

/// Runs the nine-triangle example with unit lineal stiffness and torsional
/// stiffness times `torsional_scale`.
pub fn deform_farhat(
    problem: &FarhatProblem,
    n_steps: usize,
    torsional_scale: f64,
) -> Result<FarhatOutcome> {
    let mut total = Constraints::new();
    for &n in &problem.fixed {
        total.add(2 * n, 0.0)?;
        total.add(2 * n + 1, 0.0)?;
    }
    for &(n, d) in &problem.prescribed {
        total.add(2 * n, d.x)?;
        total.add(2 * n + 1, d.y)?;
    }
    let ones = vec![1.0; problem.tris.len()];
    let nodes = solve_spring_network(
        &problem.nodes,
        &problem.tris,
        &ones,
        &total,
        n_steps,
        torsional_scale,
    )?;
    let inverted = problem
        .tris
        .iter()
        .filter(|t| signed_area(&t.map(|n| nodes[n])) <= 0.0)
        .count();
    Ok(FarhatOutcome { nodes, inverted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Vec2;
    use crate::problem::{
        build_farhat_triangle, build_patch, MotionMode, FARHAT_DEFAULT_COMPRESSION,
        FARHAT_DEFAULT_STEPS,
    };
    use crate::quality::quality_report;

    fn ring_translation(mesh: &QuadMesh, d: Vec2) -> PrescribedMotion {
        let nodes = mesh.interface().to_vec();
        let disp = vec![d; nodes.len()];
        PrescribedMotion::new(mesh, nodes, disp, MotionMode::Translation).unwrap()
    }

    #[test]
    fn zero_motion_is_identity() {
        let m = build_patch(4, 3, 0.5).unwrap();
        let motion = ring_translation(&m, Vec2::zeros());
        for s in DiagonalStrategy::ALL {
            let cfg = SpringConfig {
                strategy: s,
                n_steps: 3,
                ..Default::default()
            };
            let out = deform_spring(&m, &motion, &cfg).unwrap();
            assert_eq!(out.nodes(), m.nodes());
        }
        let choice = select_diagonals(&m, &motion, &SpringConfig::default()).unwrap();
        assert!(choice.iter().all(|&c| c == Diagonal::D13));
    }

    #[test]
    fn boundary_translation_moves_interior_rigidly() {
        let m = build_patch(5, 4, 0.25).unwrap();
        let d = Vec2::new(0.07, -0.03);
        let out = deform_spring(&m, &ring_translation(&m, d), &SpringConfig::default()).unwrap();
        for (p, q) in out.nodes().iter().zip(m.nodes()) {
            assert!((p - q - d).norm() < 1e-10);
        }
    }

    #[test]
    fn geometric_and_torsional_scales_are_dual() {
        let tri_nodes = |gsc: f64, tsc: f64| {
            let p = build_farhat_triangle(gsc, FARHAT_DEFAULT_COMPRESSION).unwrap();
            let out = deform_farhat(&p, FARHAT_DEFAULT_STEPS, tsc).unwrap();
            (
                out.nodes.iter().map(|q| q / gsc).collect::<Vec<_>>(),
                out.inverted,
            )
        };
        for s in [1.0, 100.0, 1000.0] {
            let (a, ia) = tri_nodes(s, 1.0);
            let (b, ib) = tri_nodes(1.0, 1.0 / s);
            assert_eq!(ia, ib);
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).norm() < 1e-9, "s = {s}");
            }
        }
    }

    #[test]
    fn weak_torsion_lets_triangles_invert() {
        let run = |gsc: f64, tsc: f64| {
            let p = build_farhat_triangle(gsc, FARHAT_DEFAULT_COMPRESSION).unwrap();
            deform_farhat(&p, FARHAT_DEFAULT_STEPS, tsc)
                .unwrap()
                .inverted
        };
        assert_eq!(run(1.0, 1.0), 0);
        assert!(run(1000.0, 1.0) >= 1);
        assert!(run(1.0, 1e-3) >= 1);
    }

    #[test]
    fn torsional_springs_resist_shear() {
        // Bottom row fixed, top row pushed sideways, sides free.
        let m = build_patch(4, 4, 0.25).unwrap();
        let nodes = m.nodes();
        let tri = triangulate(&m, DiagonalStrategy::Both, None).unwrap();
        let mut total = Constraints::new();
        for (i, p) in nodes.iter().enumerate() {
            if p.y == 0.0 {
                total.set(2 * i, 0.0);
                total.set(2 * i + 1, 0.0);
            } else if p.y == 1.0 {
                total.set(2 * i, 0.4);
                total.set(2 * i + 1, 0.0);
            }
        }
        let ones = vec![1.0; tri.tris.len()];
        let mut last = f64::NEG_INFINITY;
        for tsc in [0.01, 0.1, 1.0, 10.0] {
            let out = solve_spring_network(nodes, &tri.tris, &ones, &total, 5, tsc).unwrap();
            let q = quality_report(&m.with_coordinates(out), &m, None).unwrap();
            assert!(q.min_skewness >= last - 1e-12, "tsc = {tsc}");
            last = q.min_skewness;
        }
    }

    #[test]
    fn step_index_is_reported() {
        let p = build_farhat_triangle(1.0, 0.5).unwrap();
        let mut nodes = p.nodes.clone();
        nodes[1] = nodes[0];
        let mut total = Constraints::new();
        total.set(0, 0.0);
        let err = solve_spring_network(&nodes, &p.tris, &[1.0; 9], &total, 2, 1.0).unwrap_err();
        assert!(matches!(err, Error::StepFailed { step: 1, .. }));
    }

    #[test]
    fn config_validation() {
        assert!(SpringConfig::default().validate().is_ok());
        for bad in [
            SpringConfig {
                n_steps: 0,
                ..Default::default()
            },
            SpringConfig {
                geometric_scale: 0.0,
                ..Default::default()
            },
            SpringConfig {
                trial_fraction: 1.5,
                ..Default::default()
            },
            SpringConfig {
                layer_factors: vec![2.0, -1.0],
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
