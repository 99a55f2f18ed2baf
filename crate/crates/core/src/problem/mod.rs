//! Benchmark geometries: a cantilever beam across a channel, a foil aligned with the
//! channel, small patches for verification, and the nine-triangle scaling example.
//!
//! All geometry is parametric. Structure edges must fall on grid lines of the
//! structured channel grid, which keeps every reference element a rectangle.

mod cases;
mod farhat;
mod motion;

pub use cases::{TestCase, BEAM_TIP, FOIL_ANGLE_DEG, FOIL_BEND, FOIL_DROP};

pub use farhat::{
    build_farhat_triangle, FarhatProblem, FARHAT_DEFAULT_COMPRESSION, FARHAT_DEFAULT_STEPS,
};
pub use motion::{
    motion_for_problem, prescribe_motion, read_motion_csv, synthetic_beam_deflection,
    write_motion_csv, MotionMode, MotionSpec, PrescribedMotion,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Point, QuadMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// Cantilever standing on the bottom wall, perpendicular to the flow.
    Beam,
    /// Rectangular foil in mid-channel, parallel to the flow.
    Foil,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Beam => "beam",
            ProblemKind::Foil => "foil",
        }
    }
}

/// Geometry of a channel test problem. Lengths in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub channel_width: f64,
    pub channel_height: f64,
    /// Cells along the channel width.
    pub nx: usize,
    /// Cells along the channel height.
    pub ny: usize,
    /// Beam height or foil length.
    pub structure_length: f64,
    pub structure_thickness: f64,
    /// Centre of the structure along x.
    pub structure_x: f64,
    /// Centre of the foil along y; ignored for the beam, which stands on the wall.
    pub structure_y: f64,
    /// Hollow in the beam base (width, height), used by the synthetic deflection.
    pub hole_width: f64,
    pub hole_height: f64,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec::foil()
    }
}

impl ProblemSpec {
    pub fn beam() -> Self {
        ProblemSpec {
            kind: ProblemKind::Beam,
            channel_width: 3.0,
            channel_height: 1.0,
            nx: 60,
            ny: 20,
            structure_length: 0.8,
            structure_thickness: 0.2,
            structure_x: 1.1,
            structure_y: 0.5,
            hole_width: 0.1,
            hole_height: 0.2,
        }
    }

    pub fn foil() -> Self {
        ProblemSpec {
            kind: ProblemKind::Foil,
            channel_width: 3.0,
            channel_height: 1.0,
            nx: 60,
            ny: 20,
            structure_length: 1.0,
            structure_thickness: 0.2,
            structure_x: 1.5,
            structure_y: 0.5,
            hole_width: 0.0,
            hole_height: 0.0,
        }
    }

    pub fn for_kind(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Beam => Self::beam(),
            ProblemKind::Foil => Self::foil(),
        }
    }

    /// Same geometry with every cell count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        ProblemSpec {
            nx: self.nx * factor,
            ny: self.ny * factor,
            ..self.clone()
        }
    }

    /// Structure rectangle as (x0, y0, x1, y1).
    pub fn structure_rect(&self) -> (f64, f64, f64, f64) {
        match self.kind {
            ProblemKind::Beam => {
                let half = 0.5 * self.structure_thickness;
                (
                    self.structure_x - half,
                    0.0,
                    self.structure_x + half,
                    self.structure_length,
                )
            }
            ProblemKind::Foil => {
                let hl = 0.5 * self.structure_length;
                let ht = 0.5 * self.structure_thickness;
                (
                    self.structure_x - hl,
                    self.structure_y - ht,
                    self.structure_x + hl,
                    self.structure_y + ht,
                )
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("channel_width", self.channel_width),
            ("channel_height", self.channel_height),
            ("structure_length", self.structure_length),
            ("structure_thickness", self.structure_thickness),
        ];
        for (name, v) in lengths {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidSpec("resolutions must be at least 2".into()));
        }
        let (x0, y0, x1, y1) = self.structure_rect();
        let eps = 1e-9;
        let inside_x = x0 > eps && x1 < self.channel_width - eps;
        let inside_y = match self.kind {
            // The beam is clamped to the bottom wall and must leave a gap above it.
            ProblemKind::Beam => y1 < self.channel_height - eps,
            ProblemKind::Foil => y0 > eps && y1 < self.channel_height - eps,
        };
        if !inside_x || !inside_y {
            return Err(Error::InvalidSpec(
                "structure does not fit inside the channel".into(),
            ));
        }
        if self.kind == ProblemKind::Beam {
            if self.hole_width < 0.0 || self.hole_height < 0.0 {
                return Err(Error::InvalidSpec("hole size must be non-negative".into()));
            }
            if self.hole_width >= self.structure_thickness
                || self.hole_height >= self.structure_length
            {
                return Err(Error::InvalidSpec(
                    "hole does not fit inside the beam base".into(),
                ));
            }
        }
        let (hx, hy) = self.cell_size();
        for (v, h, what) in [
            (x0, hx, "x0"),
            (x1, hx, "x1"),
            (y0, hy, "y0"),
            (y1, hy, "y1"),
        ] {
            let k = v / h;
            if (k - k.round()).abs() > 1e-6 {
                return Err(Error::InvalidSpec(format!(
                    "structure edge {what} = {v} is not on a grid line (cell size {h})"
                )));
            }
        }
        let (i0, j0, i1, j1) = self.structure_cells();
        if (i1 - i0).min(j1 - j0) < 1 {
            return Err(Error::InvalidSpec("structure spans no cells".into()));
        }
        Ok(())
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (
            self.channel_width / self.nx as f64,
            self.channel_height / self.ny as f64,
        )
    }

    /// Structure cell range as (i0, j0, i1, j1), half-open.
    fn structure_cells(&self) -> (usize, usize, usize, usize) {
        let (x0, y0, x1, y1) = self.structure_rect();
        let (hx, hy) = self.cell_size();
        (
            (x0 / hx).round() as usize,
            (y0 / hy).round() as usize,
            (x1 / hx).round() as usize,
            (y1 / hy).round() as usize,
        )
    }
}

/// Builds the fluid mesh around a structure rectangle of grid cells. Nodes are
/// numbered column by column (x outer, y inner), which keeps the matrix profile small.
fn channel_with_obstacle(spec: &ProblemSpec) -> Result<QuadMesh> {
    spec.validate()?;
    let (nx, ny) = (spec.nx, spec.ny);
    let (hx, hy) = spec.cell_size();
    let (i0, j0, i1, j1) = spec.structure_cells();
    let solid = |i: usize, j: usize| i >= i0 && i < i1 && j >= j0 && j < j1;

    let mut used = vec![false; (nx + 1) * (ny + 1)];
    let grid_id = |i: usize, j: usize| i * (ny + 1) + j;
    for i in 0..nx {
        for j in 0..ny {
            if !solid(i, j) {
                for (a, b) in [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)] {
                    used[grid_id(a, b)] = true;
                }
            }
        }
    }
    let mut id = vec![usize::MAX; used.len()];
    let mut nodes = Vec::new();
    for i in 0..=nx {
        for j in 0..=ny {
            if used[grid_id(i, j)] {
                id[grid_id(i, j)] = nodes.len();
                nodes.push(Point::new(i as f64 * hx, j as f64 * hy));
            }
        }
    }
    let mut quads = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if !solid(i, j) {
                quads.push([
                    id[grid_id(i, j)],
                    id[grid_id(i + 1, j)],
                    id[grid_id(i + 1, j + 1)],
                    id[grid_id(i, j + 1)],
                ]);
            }
        }
    }
    let node = |i: usize, j: usize| id[grid_id(i, j)];

    // Interface polyline around the structure.
    let mut interface = Vec::new();
    match spec.kind {
        ProblemKind::Beam => {
            // Up the upstream face, across the tip, down the downstream face.
            interface.extend((j0..=j1).map(|j| node(i0, j)));
            interface.extend((i0 + 1..=i1).map(|i| node(i, j1)));
            interface.extend((j0..j1).rev().map(|j| node(i1, j)));
        }
        ProblemKind::Foil => {
            // Counterclockwise loop from the bottom-left corner.
            interface.extend((i0..i1).map(|i| node(i, j0)));
            interface.extend((j0..j1).map(|j| node(i1, j)));
            interface.extend((i0 + 1..=i1).rev().map(|i| node(i, j1)));
            interface.extend((j0 + 1..=j1).rev().map(|j| node(i0, j)));
        }
    }

    let exists = |i: usize, j: usize| used[grid_id(i, j)];
    let bottom: Vec<usize> = (0..=nx)
        .filter(|&i| exists(i, 0))
        .map(|i| node(i, 0))
        .collect();
    let top: Vec<usize> = (0..=nx).map(|i| node(i, ny)).collect();
    let left: Vec<usize> = (0..=ny).map(|j| node(0, j)).collect();
    let right: Vec<usize> = (0..=ny).map(|j| node(nx, j)).collect();

    QuadMesh::new(nodes, quads)?
        .with_boundary_set("bottom", bottom)?
        .with_boundary_set("top", top)?
        .with_boundary_set("left", left)?
        .with_boundary_set("right", right)?
        .with_interface(interface)
}

/// Fluid mesh around a cantilever beam standing on the bottom wall.
pub fn build_beam_in_channel(spec: &ProblemSpec) -> Result<QuadMesh> {
    if spec.kind != ProblemKind::Beam {
        return Err(Error::InvalidSpec("expected a beam specification".into()));
    }
    channel_with_obstacle(spec)
}

/// Fluid mesh around a foil in mid-channel.
pub fn build_foil_in_channel(spec: &ProblemSpec) -> Result<QuadMesh> {
    if spec.kind != ProblemKind::Foil {
        return Err(Error::InvalidSpec("expected a foil specification".into()));
    }
    channel_with_obstacle(spec)
}

pub fn build_problem(spec: &ProblemSpec) -> Result<QuadMesh> {
    channel_with_obstacle(spec)
}

/// `nx x ny` grid of cells of size `h` with the interface on the whole outer
/// boundary, counterclockwise from the origin. Useful for verification patches.
pub fn build_patch(nx: usize, ny: usize, h: f64) -> Result<QuadMesh> {
    let (mesh, _) = patch_grid(nx, ny, h)?;
    let node = |i: usize, j: usize| i * (ny + 1) + j;
    let mut ring = Vec::new();
    ring.extend((0..nx).map(|i| node(i, 0)));
    ring.extend((0..ny).map(|j| node(nx, j)));
    ring.extend((1..=nx).rev().map(|i| node(i, ny)));
    ring.extend((1..=ny).rev().map(|j| node(0, j)));
    mesh.with_interface(ring)
}

/// Patch whose left edge is the interface and whose other edges are fixed walls.
pub fn build_patch_left_interface(nx: usize, ny: usize, h: f64) -> Result<QuadMesh> {
    let (mesh, walls) = patch_grid(nx, ny, h)?;
    let node = |i: usize, j: usize| i * (ny + 1) + j;
    let left: Vec<usize> = (0..=ny).map(|j| node(0, j)).collect();
    let walls: Vec<usize> = walls.into_iter().filter(|n| !left.contains(n)).collect();
    mesh.with_boundary_set("walls", walls)?.with_interface(left)
}

fn patch_grid(nx: usize, ny: usize, h: f64) -> Result<(QuadMesh, Vec<usize>)> {
    if nx == 0 || ny == 0 || !(h > 0.0) {
        return Err(Error::InvalidSpec("patch needs positive size".into()));
    }
    let node = |i: usize, j: usize| i * (ny + 1) + j;
    let mut nodes = Vec::new();
    for i in 0..=nx {
        for j in 0..=ny {
            nodes.push(Point::new(i as f64 * h, j as f64 * h));
        }
    }
    let mut quads = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            quads.push([
                node(i, j),
                node(i + 1, j),
                node(i + 1, j + 1),
                node(i, j + 1),
            ]);
        }
    }
    let mut boundary = Vec::new();
    for i in 0..=nx {
        for j in 0..=ny {
            if i == 0 || j == 0 || i == nx || j == ny {
                boundary.push(node(i, j));
            }
        }
    }
    Ok((QuadMesh::new(nodes, quads)?, boundary))
}
