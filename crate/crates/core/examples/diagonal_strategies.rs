//! Compares the four triangulation strategies of the spring analogy on every
//! default problem.

use meshmorph::harness::{evaluate, Model, ModelSettings, Prepared};
use meshmorph::problem::TestCase;
use meshmorph::spring::{DiagonalStrategy, SpringConfig};

fn main() -> meshmorph::Result<()> {
    let strategies = [
        DiagonalStrategy::Diag13,
        DiagonalStrategy::Diag24,
        DiagonalStrategy::Both,
        DiagonalStrategy::Selective,
    ];
    print!("{:<10}", "strategy");
    for case in TestCase::ALL {
        print!(" {:>17}", case.name());
    }
    println!();
    let prepared = TestCase::ALL
        .iter()
        .map(|&c| Prepared::from_case(c))
        .collect::<meshmorph::Result<Vec<_>>>()?;
    for strategy in strategies {
        let settings = ModelSettings {
            spring: SpringConfig {
                strategy,
                ..Default::default()
            },
            ..Default::default()
        };
        print!("{:<10}", strategy.name());
        for prep in &prepared {
            let e = evaluate(prep, Model::Spring, &settings);
            match e.min_skewness() {
                Some(s) => print!(" {s:>17.4}"),
                None => print!(" {:>17}", "failed"),
            }
        }
        println!();
    }
    Ok(())
}
