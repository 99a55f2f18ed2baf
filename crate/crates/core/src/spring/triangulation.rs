use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::QuadMesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalStrategy {
    /// Split every quad along local nodes 1-3.
    Diag13,
    /// Split every quad along local nodes 2-4.
    Diag24,
    /// Overlay both splits (four triangles per quad).
    Both,
    /// Per-quad choice from two trial solves.
    Selective,
}

impl DiagonalStrategy {
    pub const ALL: [DiagonalStrategy; 4] = [
        DiagonalStrategy::Diag13,
        DiagonalStrategy::Diag24,
        DiagonalStrategy::Both,
        DiagonalStrategy::Selective,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DiagonalStrategy::Diag13 => "diag13",
            DiagonalStrategy::Diag24 => "diag24",
            DiagonalStrategy::Both => "both",
            DiagonalStrategy::Selective => "selective",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Diagonal {
    D13,
    D24,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triangulation {
    pub tris: Vec<[usize; 3]>,
    pub parent_quad: Vec<usize>,
    pub strategy: DiagonalStrategy,
    pub per_quad_choice: Option<Vec<Diagonal>>,
}

fn split(q: &[usize; 4], d: Diagonal) -> [[usize; 3]; 2] {
    let [n1, n2, n3, n4] = *q;
    match d {
        Diagonal::D13 => [[n1, n2, n3], [n1, n3, n4]],
        Diagonal::D24 => [[n1, n2, n4], [n2, n3, n4]],
    }
}

/// Splits each quad into triangles. `Selective` needs the per-quad choice from
/// [`super::select_diagonals`].
pub fn triangulate(
    mesh: &QuadMesh,
    strategy: DiagonalStrategy,
    choice: Option<&[Diagonal]>,
) -> Result<Triangulation> {
    let mut tris = Vec::new();
    let mut parent = Vec::new();
    let mut push = |e: usize, pair: [[usize; 3]; 2]| {
        for t in pair {
            tris.push(t);
            parent.push(e);
        }
    };
    let per_quad_choice = match strategy {
        DiagonalStrategy::Selective => {
            let choice = choice.ok_or(Error::MissingDiagonalChoice)?;
            if choice.len() != mesh.n_elements() {
                return Err(Error::InvalidConfig(format!(
                    "{} diagonal choices for {} quads",
                    choice.len(),
                    mesh.n_elements()
                )));
            }
            Some(choice.to_vec())
        }
        _ => None,
    };
    for (e, q) in mesh.quads().iter().enumerate() {
        match strategy {
            DiagonalStrategy::Diag13 => push(e, split(q, Diagonal::D13)),
            DiagonalStrategy::Diag24 => push(e, split(q, Diagonal::D24)),
            DiagonalStrategy::Both => {
                push(e, split(q, Diagonal::D13));
                push(e, split(q, Diagonal::D24));
            }
            DiagonalStrategy::Selective => {
                push(e, split(q, per_quad_choice.as_ref().unwrap()[e]));
            }
        }
    }
    Ok(Triangulation {
        tris,
        parent_quad: parent,
        strategy,
        per_quad_choice,
    })
}
