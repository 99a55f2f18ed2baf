//! Linear elasticity on the beam: single solve, repeated solves on the updated
//! geometry, and one-layer stiffening.

use meshmorph::elastic::{deform_linear_elastic, LinearElasticConfig};
use meshmorph::problem::TestCase;
use meshmorph::quality::quality_report;

fn main() -> meshmorph::Result<()> {
    let (mesh, motion) = TestCase::Beam.build()?;
    let runs = [
        ("single solve", LinearElasticConfig::default()),
        (
            "10 iterations",
            LinearElasticConfig {
                iterations: 10,
                ..Default::default()
            },
        ),
        (
            "layer 1 x 3",
            LinearElasticConfig {
                layer_factors: vec![3.0],
                ..Default::default()
            },
        ),
        (
            "nu = 0.45",
            LinearElasticConfig {
                poisson: 0.45,
                ..Default::default()
            },
        ),
    ];
    for (name, cfg) in runs {
        let deformed = deform_linear_elastic(&mesh, &motion, &cfg)?;
        let r = quality_report(&deformed, &mesh, None)?;
        println!(
            "{name:<14} min skewness {:.4}  area ratio [{:.4}, {:.4}]",
            r.min_skewness, r.min_area_ratio, r.max_area_ratio
        );
    }
    Ok(())
}
