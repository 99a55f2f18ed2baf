//! Deforms the beam with every model and writes legacy VTK files with skewness,
//! area ratio and layer index per cell.
//!
//! `cargo run --release --example vtk_export -- out_dir`

use std::path::PathBuf;

use meshmorph::harness::Prepared;
use meshmorph::harness::{element_fields, evaluate, Model, ModelSettings};
use meshmorph::io::{export_vtk, read_vtk};
use meshmorph::problem::TestCase;
use meshmorph::stiffening::identify_layers;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or("vtk_out".into()));
    std::fs::create_dir_all(&dir)?;
    let mut prep = Prepared::from_case(TestCase::Beam)?;
    prep.layers = identify_layers(&prep.mesh, prep.mesh.interface(), 3)?;
    export_vtk(&dir.join("beam_reference.vtk"), &prep.mesh, &[])?;
    for model in Model::ALL {
        let e = evaluate(&prep, model, &ModelSettings::default());
        let Ok((mesh, report)) = &e.outcome else {
            println!("{model}: {}", e.status());
            continue;
        };
        let path = dir.join(format!("beam_{model}.vtk"));
        export_vtk(&path, mesh, &element_fields(report, &prep.layers))?;
        let (back, fields) = read_vtk(&path)?;
        println!(
            "{} ({} cells, fields: {})",
            path.display(),
            back.n_elements(),
            fields
                .iter()
                .map(|f| f.name.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    Ok(())
}
