//! Yeoh material study on the rotating foil: min skewness and area-ratio
//! extremes over a grid of A20 and kappa.

use meshmorph::harness::{evaluate, Model, ModelSettings, Prepared};
use meshmorph::problem::TestCase;
use meshmorph::yeoh::YeohConfig;

fn main() -> meshmorph::Result<()> {
    let prep = Prepared::from_case(TestCase::FoilRotation)?;
    println!(
        "{:>8} {:>8} {:>12} {:>10} {:>10}",
        "kappa", "a20", "min_skew", "min_ratio", "max_ratio"
    );
    for kappa in [0.1, 1.0, 1e3] {
        for a20 in [0.1, 1.0, 10.0, 1e2, 1e3, 1e4, 1e5] {
            let settings = ModelSettings {
                yeoh: YeohConfig {
                    a20,
                    kappa,
                    ..Default::default()
                },
                ..Default::default()
            };
            let e = evaluate(&prep, Model::Yeoh, &settings);
            match e.report() {
                Some(r) => println!(
                    "{kappa:>8} {a20:>8} {:>12.4} {:>10.4} {:>10.4}",
                    r.min_skewness, r.min_area_ratio, r.max_area_ratio
                ),
                None => println!("{kappa:>8} {a20:>8} {}", e.status()),
            }
        }
    }
    Ok(())
}
