//! Skewness and area ratio of a few hand-made quads, then a report over a
//! deformed mesh.

use meshmorph::problem::TestCase;
use meshmorph::quality::{element_area_ratio, element_skewness, quality_report};
use meshmorph::spring::{deform_spring, SpringConfig};
use meshmorph::Point;

fn main() -> meshmorph::Result<()> {
    let p = Point::new;
    let square = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
    let r = 0.5f64.sqrt();
    let shapes = [
        ("unit square", square),
        (
            "45 degree rhombus",
            [p(0.0, 0.0), p(1.0, 0.0), p(1.0 + r, r), p(r, r)],
        ),
        (
            "stretched",
            [p(0.0, 0.0), p(3.0, 0.0), p(3.0, 1.0), p(0.0, 1.0)],
        ),
        (
            "folded",
            [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(1.5, 0.2)],
        ),
    ];
    println!("{:<20} {:>10} {:>10}", "quad", "skewness", "area_ratio");
    for (name, q) in &shapes {
        println!(
            "{name:<20} {:>10.4} {:>10.4}",
            element_skewness(q)?,
            element_area_ratio(q, &square)?
        );
    }

    let (mesh, motion) = TestCase::FoilRotation.build()?;
    let deformed = deform_spring(&mesh, &motion, &SpringConfig::default())?;
    let report = quality_report(&deformed, &mesh, None)?;
    println!(
        "\nfoil rotation, springs: min skewness {:.4}, area ratio [{:.4}, {:.4}], {} inverted of {}",
        report.min_skewness,
        report.min_area_ratio,
        report.max_area_ratio,
        report.inverted_count(),
        mesh.n_elements()
    );
    Ok(())
}
