//! Structured quadrilateral mesh representation.
//!
//! Quads are stored counterclockwise starting at the bottom-left corner, which the
//! spring analogy relies on when it picks diagonals from local node numbers.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::{Point2, Vector2};

use crate::error::{Error, Result};

pub type Point = Point2<f64>;
pub type Vec2 = Vector2<f64>;

/// Signed area of a polygon given counterclockwise corners (shoelace).
pub fn signed_area(corners: &[Point]) -> f64 {
    let n = corners.len();
    let mut twice = 0.0;
    for i in 0..n {
        let a = corners[i];
        let b = corners[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    0.5 * twice
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadMesh {
    nodes: Vec<Point>,
    quads: Vec<[usize; 4]>,
    boundary_sets: BTreeMap<String, Vec<usize>>,
    interface: Vec<usize>,
}

impl QuadMesh {
    /// Builds a mesh from coordinates and connectivity. Every quad must reference four
    /// distinct, valid node indices.
    pub fn new(nodes: Vec<Point>, quads: Vec<[usize; 4]>) -> Result<Self> {
        for (e, q) in quads.iter().enumerate() {
            for (a, &n) in q.iter().enumerate() {
                if n >= nodes.len() {
                    return Err(Error::InvalidMesh(format!(
                        "quad {e} references node {n} but the mesh has {} nodes",
                        nodes.len()
                    )));
                }
                if q[..a].contains(&n) {
                    return Err(Error::InvalidMesh(format!("quad {e} repeats node {n}")));
                }
            }
        }
        if let Some(i) = nodes
            .iter()
            .position(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::InvalidMesh(format!("node {i} is not finite")));
        }
        Ok(QuadMesh {
            nodes,
            quads,
            boundary_sets: BTreeMap::new(),
            interface: Vec::new(),
        })
    }

    /// Registers a named set of boundary nodes (held at zero displacement by the solvers).
    pub fn with_boundary_set(mut self, name: &str, nodes: Vec<usize>) -> Result<Self> {
        self.check_indices(&nodes)?;
        self.boundary_sets.insert(name.to_string(), nodes);
        Ok(self)
    }

    /// Tags the ordered fluid-structure interface. The nodes must lie on the
    /// topological boundary of the mesh (outer wall or the rim of an interior hole).
    pub fn with_interface(mut self, nodes: Vec<usize>) -> Result<Self> {
        self.check_indices(&nodes)?;
        let rim = self.topological_boundary_nodes();
        if let Some(n) = nodes.iter().find(|n| !rim.contains(n)) {
            return Err(Error::InvalidMesh(format!(
                "interface node {n} is not on the mesh boundary"
            )));
        }
        self.interface = nodes;
        Ok(self)
    }

    fn check_indices(&self, nodes: &[usize]) -> Result<()> {
        match nodes.iter().find(|&&n| n >= self.nodes.len()) {
            Some(&n) => Err(Error::InvalidMesh(format!("node {n} does not exist"))),
            None => Ok(()),
        }
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn quads(&self) -> &[[usize; 4]] {
        &self.quads
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.quads.len()
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn interface(&self) -> &[usize] {
        &self.interface
    }

    pub fn boundary_sets(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.boundary_sets
    }

    pub fn corners(&self, element: usize) -> [Point; 4] {
        self.quads[element].map(|n| self.nodes[n])
    }

    /// Union of all named boundary sets and the interface.
    pub fn constrained_nodes(&self) -> BTreeSet<usize> {
        self.boundary_sets
            .values()
            .flatten()
            .chain(self.interface.iter())
            .copied()
            .collect()
    }

    /// Nodes on edges that belong to exactly one quad.
    pub fn topological_boundary_nodes(&self) -> BTreeSet<usize> {
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for q in &self.quads {
            for a in 0..4 {
                let (i, j) = (q[a], q[(a + 1) % 4]);
                *edge_count.entry((i.min(j), i.max(j))).or_default() += 1;
            }
        }
        edge_count
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .flat_map(|((i, j), _)| [i, j])
            .collect()
    }

    /// Elements attached to each node.
    pub fn node_to_elements(&self) -> Vec<Vec<usize>> {
        let mut map = vec![Vec::new(); self.nodes.len()];
        for (e, q) in self.quads.iter().enumerate() {
            for &n in q {
                map[n].push(e);
            }
        }
        map
    }

    /// Copy of this mesh with every node moved by the matching displacement.
    pub fn displaced(&self, displacement: &[Vec2]) -> Result<QuadMesh> {
        if displacement.len() != self.nodes.len() {
            return Err(Error::ConnectivityMismatch(format!(
                "{} displacements for {} nodes",
                displacement.len(),
                self.nodes.len()
            )));
        }
        let nodes = self
            .nodes
            .iter()
            .zip(displacement)
            .map(|(p, d)| p + d)
            .collect();
        Ok(self.with_coordinates(nodes))
    }

    /// Same topology and tags with new coordinates.
    pub fn with_coordinates(&self, nodes: Vec<Point>) -> QuadMesh {
        assert_eq!(nodes.len(), self.nodes.len(), "coordinate count changed");
        QuadMesh {
            nodes,
            quads: self.quads.clone(),
            boundary_sets: self.boundary_sets.clone(),
            interface: self.interface.clone(),
        }
    }

    /// Nodal displacement of `self` relative to `reference`, node by node.
    pub fn displacement_from(&self, reference: &QuadMesh) -> Vec<Vec2> {
        self.nodes
            .iter()
            .zip(reference.nodes())
            .map(|(p, q)| p - q)
            .collect()
    }

    pub fn same_connectivity(&self, other: &QuadMesh) -> bool {
        self.nodes.len() == other.nodes.len() && self.quads == other.quads
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.nodes {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Checks that every quad has positive area and positive skewness.
    pub fn check_admissible(&self) -> Result<()> {
        for e in 0..self.quads.len() {
            let c = self.corners(e);
            let area = signed_area(&c);
            let skew = crate::quality::element_skewness(&c)?;
            if area <= 0.0 || skew <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "element {e} is not admissible (area {area:e}, skewness {skew})"
                )));
            }
        }
        Ok(())
    }
}
