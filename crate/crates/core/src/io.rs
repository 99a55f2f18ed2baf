//! Legacy VTK (ASCII unstructured grid) and per-element CSV output.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{Point, QuadMesh};
use crate::quality::QualityReport;

/// Named per-element scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    pub name: String,
    pub values: Vec<f64>,
}

impl CellField {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        CellField {
            name: name.to_string(),
            values,
        }
    }
}

const VTK_QUAD: u32 = 9;

pub fn write_vtk<W: Write>(mut out: W, mesh: &QuadMesh, fields: &[CellField]) -> Result<()> {
    for f in fields {
        if f.values.len() != mesh.n_elements() {
            return Err(Error::InvalidConfig(format!(
                "field {} has {} values for {} elements",
                f.name,
                f.values.len(),
                mesh.n_elements()
            )));
        }
        if f.name.is_empty() || f.name.contains(char::is_whitespace) {
            return Err(Error::InvalidConfig(format!("bad field name {:?}", f.name)));
        }
    }
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "meshmorph")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.n_nodes())?;
    for p in mesh.nodes() {
        writeln!(out, "{:?} {:?} 0", p.x, p.y)?;
    }
    let m = mesh.n_elements();
    writeln!(out, "CELLS {} {}", m, 5 * m)?;
    for q in mesh.quads() {
        writeln!(out, "4 {} {} {} {}", q[0], q[1], q[2], q[3])?;
    }
    writeln!(out, "CELL_TYPES {m}")?;
    for _ in 0..m {
        writeln!(out, "{VTK_QUAD}")?;
    }
    if !fields.is_empty() {
        writeln!(out, "CELL_DATA {m}")?;
        for f in fields {
            writeln!(out, "SCALARS {} double 1", f.name)?;
            writeln!(out, "LOOKUP_TABLE default")?;
            for v in &f.values {
                writeln!(out, "{v:?}")?;
            }
        }
    }
    Ok(())
}

/// Writes `mesh` and its cell fields to a legacy VTK file.
pub fn export_vtk(path: &Path, mesh: &QuadMesh, fields: &[CellField]) -> Result<()> {
    let mut buf = Vec::new();
    write_vtk(&mut buf, mesh, fields)?;
    fs::write(path, buf)?;
    Ok(())
}

/// Reads a file written by [`export_vtk`] (or any ASCII unstructured grid of
/// quads with scalar cell data).
pub fn read_vtk(path: &Path) -> Result<(QuadMesh, Vec<CellField>)> {
    let text = fs::read_to_string(path)?;
    parse_vtk(&text).map_err(|msg| Error::Parse {
        path: path.to_path_buf(),
        msg,
    })
}

fn parse_vtk(text: &str) -> std::result::Result<(QuadMesh, Vec<CellField>), String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or("empty file")?;
    if !header.starts_with("# vtk DataFile") {
        return Err("missing vtk header".into());
    }
    lines.next().ok_or("missing title")?;
    if lines.next() != Some("ASCII") {
        return Err("only ASCII files are supported".into());
    }
    if lines.next() != Some("DATASET UNSTRUCTURED_GRID") {
        return Err("expected DATASET UNSTRUCTURED_GRID".into());
    }
    let mut tokens = lines.flat_map(str::split_whitespace);
    let mut next = || {
        tokens
            .next()
            .ok_or_else(|| "unexpected end of file".to_string())
    };
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("{s}: {e}"));
    let int = |s: &str| s.parse::<usize>().map_err(|e| format!("{s}: {e}"));

    let mut nodes = Vec::new();
    let mut quads = Vec::new();
    let mut fields = Vec::new();
    let mut n_cells = 0;
    while let Ok(key) = next() {
        match key {
            "POINTS" => {
                let n = int(next()?)?;
                next()?;
                for _ in 0..n {
                    let x = num(next()?)?;
                    let y = num(next()?)?;
                    next()?;
                    nodes.push(Point::new(x, y));
                }
            }
            "CELLS" => {
                n_cells = int(next()?)?;
                next()?;
                for _ in 0..n_cells {
                    if int(next()?)? != 4 {
                        return Err("only quad cells are supported".into());
                    }
                    let mut q = [0; 4];
                    for v in &mut q {
                        *v = int(next()?)?;
                    }
                    quads.push(q);
                }
            }
            "CELL_TYPES" => {
                let n = int(next()?)?;
                for _ in 0..n {
                    if int(next()?)? != VTK_QUAD as usize {
                        return Err("only quad cells are supported".into());
                    }
                }
            }
            "CELL_DATA" => {
                if int(next()?)? != n_cells {
                    return Err("CELL_DATA count does not match CELLS".into());
                }
            }
            "SCALARS" => {
                let name = next()?;
                next()?;
                // Optional component count before LOOKUP_TABLE.
                let mut t = next()?;
                if t != "LOOKUP_TABLE" {
                    if int(t)? != 1 {
                        return Err("only single-component scalars are supported".into());
                    }
                    t = next()?;
                }
                if t != "LOOKUP_TABLE" {
                    return Err("expected LOOKUP_TABLE".into());
                }
                next()?;
                let values = (0..n_cells)
                    .map(|_| num(next()?))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                fields.push(CellField {
                    name: name.to_string(),
                    values,
                });
            }
            other => return Err(format!("unexpected token {other}")),
        }
    }
    let mesh = QuadMesh::new(nodes, quads).map_err(|e| e.to_string())?;
    Ok((mesh, fields))
}

/// `element_id,skewness,area_ratio,layer_index`, one row per element of the
/// report. Unlayered elements get layer 0.
pub fn write_element_metrics<W: Write>(
    out: W,
    report: &QualityReport,
    layer_of_element: Option<&[usize]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["element_id", "skewness", "area_ratio", "layer_index"])?;
    for (k, &e) in report.elements.iter().enumerate() {
        let layer = layer_of_element.map_or(0, |l| l[e]);
        w.write_record([
            e.to_string(),
            format!("{:?}", report.per_element_skewness[k]),
            format!("{:?}", report.per_element_area_ratio[k]),
            layer.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
