use std::path::{Path, PathBuf};

use nalgebra::Rotation2;
use serde::{Deserialize, Serialize};

use super::{ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::mesh::{Point, QuadMesh, Vec2};
use crate::sparse::Constraints;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionMode {
    Translation,
    Rotation,
    Bending,
    Cantilever,
    FromFile,
}

impl MotionMode {
    pub fn name(self) -> &'static str {
        match self {
            MotionMode::Translation => "translation",
            MotionMode::Rotation => "rotation",
            MotionMode::Bending => "bending",
            MotionMode::Cantilever => "cantilever",
            MotionMode::FromFile => "from_file",
        }
    }
}

/// How to move the interface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum MotionSpec {
    Translation {
        dx: f64,
        dy: f64,
    },
    /// Rigid rotation in degrees, counterclockwise positive. The centre defaults to
    /// the centroid of the region enclosed by the interface.
    Rotation {
        angle_deg: f64,
        #[serde(default)]
        center: Option<[f64; 2]>,
    },
    /// Parabolic droop along the structure's long axis: the middle stays put and both
    /// ends move down by `amplitude` (toward -x for a vertical structure).
    Bending {
        amplitude: f64,
    },
    /// Synthetic deflection of the channel beam with the given tip displacement
    /// along +x. See [`synthetic_beam_deflection`].
    Cantilever {
        tip: f64,
    },
    FromFile {
        path: PathBuf,
    },
}

impl MotionSpec {
    pub fn mode(&self) -> MotionMode {
        match self {
            MotionSpec::Translation { .. } => MotionMode::Translation,
            MotionSpec::Rotation { .. } => MotionMode::Rotation,
            MotionSpec::Bending { .. } => MotionMode::Bending,
            MotionSpec::Cantilever { .. } => MotionMode::Cantilever,
            MotionSpec::FromFile { .. } => MotionMode::FromFile,
        }
    }
}

/// Target displacement of each listed interface node.
#[derive(Clone, Debug, PartialEq)]
pub struct PrescribedMotion {
    pub node_indices: Vec<usize>,
    pub displacements: Vec<Vec2>,
    pub mode: MotionMode,
}

impl PrescribedMotion {
    pub fn new(
        mesh: &QuadMesh,
        node_indices: Vec<usize>,
        displacements: Vec<Vec2>,
        mode: MotionMode,
    ) -> Result<Self> {
        if node_indices.len() != displacements.len() {
            return Err(Error::InvalidMotion(format!(
                "{} nodes but {} displacements",
                node_indices.len(),
                displacements.len()
            )));
        }
        if let Some(n) = node_indices.iter().find(|n| !mesh.interface().contains(n)) {
            return Err(Error::InvalidMotion(format!(
                "node {n} is not on the interface"
            )));
        }
        if displacements
            .iter()
            .any(|d| !d.x.is_finite() || !d.y.is_finite())
        {
            return Err(Error::InvalidMotion("displacement is not finite".into()));
        }
        Ok(PrescribedMotion {
            node_indices,
            displacements,
            mode,
        })
    }

    /// Motion with every displacement multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> PrescribedMotion {
        PrescribedMotion {
            node_indices: self.node_indices.clone(),
            displacements: self.displacements.iter().map(|d| d * factor).collect(),
            mode: self.mode,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.displacements.iter().all(|d| d.x == 0.0 && d.y == 0.0)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.displacements
            .iter()
            .map(|d| d.norm())
            .fold(0.0, f64::max)
    }

    /// Dirichlet data for a mesh solve: every wall and interface node held at zero,
    /// then the motion nodes set to `scale` times their displacement.
    pub fn constraints(&self, mesh: &QuadMesh, scale: f64) -> Constraints {
        let mut c = Constraints::new();
        for n in mesh.constrained_nodes() {
            c.set(2 * n, 0.0);
            c.set(2 * n + 1, 0.0);
        }
        for (&n, d) in self.node_indices.iter().zip(&self.displacements) {
            c.set(2 * n, scale * d.x);
            c.set(2 * n + 1, scale * d.y);
        }
        c
    }
}

/// Centroid of the polygon traced by the interface (closed back to its start).
fn interface_centroid(mesh: &QuadMesh) -> Point {
    let pts: Vec<Point> = mesh.interface().iter().map(|&n| mesh.nodes()[n]).collect();
    let mut a = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..pts.len() {
        let p = pts[i];
        let q = pts[(i + 1) % pts.len()];
        let w = p.x * q.y - q.x * p.y;
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if a.abs() < f64::EPSILON {
        let n = pts.len() as f64;
        return Point::new(
            pts.iter().map(|p| p.x).sum::<f64>() / n,
            pts.iter().map(|p| p.y).sum::<f64>() / n,
        );
    }
    Point::new(cx / (3.0 * a), cy / (3.0 * a))
}

pub fn prescribe_motion(mesh: &QuadMesh, spec: &MotionSpec) -> Result<PrescribedMotion> {
    let nodes = mesh.interface().to_vec();
    if nodes.is_empty() {
        return Err(Error::InvalidMotion("mesh has no interface".into()));
    }
    let coords: Vec<Point> = nodes.iter().map(|&n| mesh.nodes()[n]).collect();
    let disp: Vec<Vec2> = match spec {
        MotionSpec::Translation { dx, dy } => vec![Vec2::new(*dx, *dy); nodes.len()],
        MotionSpec::Rotation { angle_deg, center } => {
            let c = center
                .map(|[x, y]| Point::new(x, y))
                .unwrap_or_else(|| interface_centroid(mesh));
            let rot = Rotation2::new(angle_deg.to_radians());
            coords
                .iter()
                .map(|p| {
                    let r = p - c;
                    rot * r - r
                })
                .collect()
        }
        MotionSpec::Bending { amplitude } => {
            let (lo, hi) = coords.iter().fold(
                (
                    Point::new(f64::MAX, f64::MAX),
                    Point::new(f64::MIN, f64::MIN),
                ),
                |(lo, hi), p| {
                    (
                        Point::new(lo.x.min(p.x), lo.y.min(p.y)),
                        Point::new(hi.x.max(p.x), hi.y.max(p.y)),
                    )
                },
            );
            let horizontal = hi.x - lo.x >= hi.y - lo.y;
            coords
                .iter()
                .map(|p| {
                    let (s, a, b) = if horizontal {
                        (p.x, lo.x, hi.x)
                    } else {
                        (p.y, lo.y, hi.y)
                    };
                    let xi = (2.0 * s - a - b) / (b - a);
                    let w = -amplitude * xi * xi;
                    if horizontal {
                        Vec2::new(0.0, w)
                    } else {
                        Vec2::new(w, 0.0)
                    }
                })
                .collect()
        }
        MotionSpec::FromFile { path } => return read_motion_csv(mesh, path),
        MotionSpec::Cantilever { .. } => {
            return Err(Error::InvalidMotion(
                "cantilever motion needs the problem geometry, use motion_for_problem".into(),
            ))
        }
    };
    PrescribedMotion::new(mesh, nodes, disp, spec.mode())
}

/// Like [`prescribe_motion`], with access to the problem geometry.
pub fn motion_for_problem(
    problem: &ProblemSpec,
    mesh: &QuadMesh,
    spec: &MotionSpec,
) -> Result<PrescribedMotion> {
    match spec {
        MotionSpec::Cantilever { tip } => synthetic_beam_deflection(mesh, problem, *tip),
        other => prescribe_motion(mesh, other),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MotionRow {
    node_id: usize,
    dx: f64,
    dy: f64,
}

/// Reads `node_id,dx,dy` rows; one row per interface node.
pub fn read_motion_csv(mesh: &QuadMesh, path: &Path) -> Result<PrescribedMotion> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut nodes = Vec::new();
    let mut disp = Vec::new();
    for row in reader.deserialize() {
        let row: MotionRow = row?;
        if nodes.contains(&row.node_id) {
            return Err(Error::InvalidMotion(format!(
                "node {} listed twice in {}",
                row.node_id,
                path.display()
            )));
        }
        nodes.push(row.node_id);
        disp.push(Vec2::new(row.dx, row.dy));
    }
    if nodes.len() != mesh.interface().len() {
        return Err(Error::InvalidMotion(format!(
            "{} rows in {} for {} interface nodes",
            nodes.len(),
            path.display(),
            mesh.interface().len()
        )));
    }
    PrescribedMotion::new(mesh, nodes, disp, MotionMode::FromFile)
}

pub fn write_motion_csv(motion: &PrescribedMotion, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (&node_id, d) in motion.node_indices.iter().zip(&motion.displacements) {
        w.serialize(MotionRow {
            node_id,
            dx: d.x,
            dy: d.y,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Synthetic cantilever deflection standing in for a coupled flow-structure result.
///
/// The beam axis deflects along +x with a cubic tip-load shape blended with a
/// linear base rotation whose share grows with the hollow in the base. Cross
/// sections stay normal to the axis, so faces off the axis also move vertically.
pub fn synthetic_beam_deflection(
    mesh: &QuadMesh,
    spec: &ProblemSpec,
    tip: f64,
) -> Result<PrescribedMotion> {
    if spec.kind != ProblemKind::Beam {
        return Err(Error::InvalidSpec("beam deflection needs a beam".into()));
    }
    let length = spec.structure_length;
    let axis_x = spec.structure_x;
    let base_share = 0.5 * spec.hole_width / spec.structure_thickness;
    let deflection = |s: f64| tip * ((1.0 - base_share) * 0.5 * s * s * (3.0 - s) + base_share * s);
    let slope = |s: f64| tip * ((1.0 - base_share) * 1.5 * s * (2.0 - s) + base_share) / length;
    let nodes = mesh.interface().to_vec();
    let disp = nodes
        .iter()
        .map(|&n| {
            let p = mesh.nodes()[n];
            let s = (p.y / length).clamp(0.0, 1.0);
            Vec2::new(deflection(s), -(p.x - axis_x) * slope(s))
        })
        .collect();
    PrescribedMotion::new(mesh, nodes, disp, MotionMode::Cantilever)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_beam_in_channel, build_foil_in_channel, build_patch};

    fn foil() -> QuadMesh {
        build_foil_in_channel(&ProblemSpec::foil()).unwrap()
    }

    #[test]
    fn translation_is_constant() {
        let m = foil();
        let mo = prescribe_motion(&m, &MotionSpec::Translation { dx: 0.0, dy: -0.1 }).unwrap();
        assert_eq!(mo.node_indices, m.interface());
        assert!(mo.displacements.iter().all(|d| *d == Vec2::new(0.0, -0.1)));
    }

    #[test]
    fn zero_magnitude_is_zero() {
        let m = foil();
        for spec in [
            MotionSpec::Translation { dx: 0.0, dy: 0.0 },
            MotionSpec::Rotation {
                angle_deg: 0.0,
                center: None,
            },
            MotionSpec::Bending { amplitude: 0.0 },
        ] {
            assert!(prescribe_motion(&m, &spec).unwrap().is_zero(), "{spec:?}");
        }
    }

    #[test]
    fn rotation_matches_closed_form() {
        let m = foil();
        let c = interface_centroid(&m);
        assert!((c - Point::new(1.5, 0.5)).norm() < 1e-12);
        let mo = prescribe_motion(
            &m,
            &MotionSpec::Rotation {
                angle_deg: -90.0,
                center: None,
            },
        )
        .unwrap();
        for (&n, d) in mo.node_indices.iter().zip(&mo.displacements) {
            let r = m.nodes()[n] - c;
            // Clockwise quarter turn: (x, y) -> (y, -x).
            let expected = Vec2::new(r.y - r.x, -r.x - r.y);
            assert!((d - expected).norm() < 1e-12);
        }
        // Node at centroid + (r, 0): right end of the foil mid-plane.
        let right = m
            .interface()
            .iter()
            .position(|&n| (m.nodes()[n] - Point::new(2.0, 0.5)).norm() < 1e-12)
            .unwrap();
        let d = mo.displacements[right];
        assert!((d - Vec2::new(-0.5, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn bending_droops_both_ends() {
        let m = foil();
        let mo = prescribe_motion(&m, &MotionSpec::Bending { amplitude: 0.1 }).unwrap();
        for (&n, d) in mo.node_indices.iter().zip(&mo.displacements) {
            let p = m.nodes()[n];
            assert_eq!(d.x, 0.0);
            assert!(d.y <= 0.0);
            if (p.x - 1.0).abs() < 1e-12 || (p.x - 2.0).abs() < 1e-12 {
                assert!((d.y + 0.1).abs() < 1e-12);
            }
            if (p.x - 1.5).abs() < 1e-12 {
                assert!(d.y.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn motion_outside_interface_rejected() {
        let m = build_patch(2, 2, 1.0).unwrap();
        assert!(
            PrescribedMotion::new(&m, vec![4], vec![Vec2::zeros()], MotionMode::Translation)
                .is_err()
        );
    }

    #[test]
    fn csv_round_trip_and_row_count() {
        let spec = ProblemSpec::beam();
        let m = build_beam_in_channel(&spec).unwrap();
        let mo = synthetic_beam_deflection(&m, &spec, 0.15).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_motion_csv(&mo, &path).unwrap();
        let back = read_motion_csv(&m, &path).unwrap();
        assert_eq!(back.node_indices, mo.node_indices);
        assert_eq!(back.displacements, mo.displacements);
        assert_eq!(back.mode, MotionMode::FromFile);

        let short = PrescribedMotion {
            node_indices: mo.node_indices[1..].to_vec(),
            displacements: mo.displacements[1..].to_vec(),
            mode: MotionMode::FromFile,
        };
        write_motion_csv(&short, &path).unwrap();
        assert!(matches!(
            read_motion_csv(&m, &path),
            Err(Error::InvalidMotion(_))
        ));
    }

    #[test]
    fn beam_deflection_shape() {
        let spec = ProblemSpec::beam();
        let m = build_beam_in_channel(&spec).unwrap();
        let mo = synthetic_beam_deflection(&m, &spec, 0.15).unwrap();
        for (&n, d) in mo.node_indices.iter().zip(&mo.displacements) {
            let p = m.nodes()[n];
            if p.y == 0.0 {
                assert_eq!(d.x, 0.0);
            }
            if (p.y - spec.structure_length).abs() < 1e-12 {
                assert!((d.x - 0.15).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unknown_mode_is_rejected() {
        let bad: std::result::Result<MotionSpec, _> = toml::from_str("mode = \"twist\"\n");
        assert!(bad.is_err());
        let ok: MotionSpec = toml::from_str("mode = \"bending\"\namplitude = 0.1\n").unwrap();
        assert_eq!(ok.mode(), MotionMode::Bending);
    }
}
