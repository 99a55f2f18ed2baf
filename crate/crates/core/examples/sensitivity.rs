//! Sensitivity blocks of a converged hyperelastic mesh solve, checked against
//! finite differences.

use std::f64::consts::PI;

use meshmorph::problem::{build_patch_left_interface, MotionMode, PrescribedMotion};
use meshmorph::sensitivity::{verify_fd, SensitivityBlocks, DEFAULT_H_SCHEDULE};
use meshmorph::yeoh::{deform_hyperelastic, YeohConfig};
use meshmorph::Vec2;

fn main() -> meshmorph::Result<()> {
    let mesh = build_patch_left_interface(4, 4, 0.25)?;
    let nodes = mesh.interface().to_vec();
    let disp = nodes
        .iter()
        .map(|&n| {
            let y = mesh.nodes()[n].y;
            Vec2::new(0.05 * (PI * y).sin(), 0.02 * y)
        })
        .collect();
    let motion = PrescribedMotion::new(&mesh, nodes, disp, MotionMode::FromFile)?;
    let (_, state) = deform_hyperelastic(&mesh, &motion, &YeohConfig::default())?;
    println!(
        "converged in {} Newton iterations, residual {:.2e}",
        state.newton_iterations, state.residual_norm
    );

    let blocks = SensitivityBlocks::compute(&state)?;
    println!(
        "{} dofs, {} interface dofs, tangent nnz {}",
        blocks.tangent.dim(),
        blocks.mapping.dofs().len(),
        blocks.tangent.nnz()
    );
    let report = verify_fd(&blocks, &state, &DEFAULT_H_SCHEDULE)?;
    report.write_csv(std::io::stdout())?;
    println!("all checks passed: {}", report.passed());
    Ok(())
}
