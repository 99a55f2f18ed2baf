//! One- and two-layer stiffening of the spring network on the beam, written as a
//! long-form CSV.
//!
//! `cargo run --release --example stiffening_sweep -- out.csv`

use std::fs::File;

use meshmorph::harness::{run_sweep, Axis, Config, Model, ParamKey, SweepSection};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or("stiffening_sweep.csv".into());
    let mut config = Config::from_toml("[problem]\ncase = \"beam\"\n[spring]\nn_steps = 5\n")?;
    config.stiffening.report_layers = Some(2);
    config.sweep = Some(SweepSection::new(
        Model::Spring,
        vec![
            Axis::range(ParamKey::Layer(1), 1.0, 6.0, 0.5),
            Axis::range(ParamKey::Layer(2), 1.0, 6.0, 0.5),
        ],
    ));
    let prepared = config.prepare()?;
    let result = run_sweep(&config, &prepared)?;
    result.write_csv(File::create(&path)?)?;

    let baseline = result.points[0].evaluation.min_skewness();
    let one_layer = result
        .points
        .iter()
        .filter(|p| p.values[1].to_string() == "1")
        .filter_map(|p| p.evaluation.min_skewness())
        .fold(f64::NEG_INFINITY, f64::max);
    let best = result.best().expect("some point succeeded");
    println!("no stiffening   {:.4}", baseline.unwrap_or(f64::NAN));
    println!("best one layer  {one_layer:.4}");
    println!(
        "best two layers {:.4} at layer1={} layer2={}",
        best.evaluation.min_skewness().unwrap_or(f64::NAN),
        best.values[0],
        best.values[1]
    );
    println!("wrote {path}");
    Ok(())
}
