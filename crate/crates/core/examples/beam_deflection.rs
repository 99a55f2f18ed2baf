//! Writes the synthetic beam deflection as a `node_id,dx,dy` CSV, the format
//! read by `mode = "from_file"` motions.
//!
//! `cargo run --example beam_deflection -- beam_motion.csv 0.07`

use std::path::PathBuf;

use meshmorph::problem::{
    build_problem, synthetic_beam_deflection, write_motion_csv, ProblemSpec, BEAM_TIP,
};

fn main() -> meshmorph::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or("beam_motion.csv".into()));
    let tip = args.next().and_then(|t| t.parse().ok()).unwrap_or(BEAM_TIP);
    let spec = ProblemSpec::beam();
    let mesh = build_problem(&spec)?;
    let motion = synthetic_beam_deflection(&mesh, &spec, tip)?;
    write_motion_csv(&motion, &path)?;
    println!(
        "{} interface nodes, largest displacement {:.4}, wrote {}",
        motion.node_indices.len(),
        motion.max_magnitude(),
        path.display()
    );
    Ok(())
}
