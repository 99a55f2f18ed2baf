//! Runs a TOML config through the harness, as `meshmorph run` does, and prints
//! the metrics table.
//!
//! `cargo run --release --example run_config -- configs/beam_all_models.toml`

use std::path::PathBuf;

use meshmorph::harness::{run_case, Config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or("configs/beam_all_models.toml".into()),
    );
    let config = Config::load(&path)?;
    let result = run_case(&config)?;
    result.write_csv(std::io::stdout())?;
    Ok(())
}
