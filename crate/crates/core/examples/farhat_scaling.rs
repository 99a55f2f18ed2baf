//! Nine-triangle example: how geometric and torsional scaling change the number
//! of inverted triangles.

use meshmorph::problem::{build_farhat_triangle, FARHAT_DEFAULT_COMPRESSION, FARHAT_DEFAULT_STEPS};
use meshmorph::spring::deform_farhat;

fn main() -> meshmorph::Result<()> {
    println!("{:>8} {:>8} {:>10}", "gsc", "tsc", "inverted");
    for (gsc, tsc) in [
        (1.0, 1.0),
        (100.0, 1.0),
        (1000.0, 1.0),
        (1.0, 1e-2),
        (1.0, 1e-3),
    ] {
        let problem = build_farhat_triangle(gsc, FARHAT_DEFAULT_COMPRESSION)?;
        let out = deform_farhat(&problem, FARHAT_DEFAULT_STEPS, tsc)?;
        println!("{gsc:>8} {tsc:>8} {:>10}", out.inverted);
    }
    Ok(())
}
