//! Layers of elements around the fluid-structure interface and per-layer stiffening.
//!
//! Layer 1 holds every element sharing a node with the interface, layer `k` every
//! not-yet-assigned element sharing a node with layer `k - 1`. Where the interface
//! touches an outer wall the rings simply run into the wall and may merge.

use crate::error::{Error, Result};
use crate::mesh::QuadMesh;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerAssignment {
    /// Layer index per element; 0 means outside every requested layer.
    pub layer_of_element: Vec<usize>,
}

impl LayerAssignment {
    pub fn unlayered(n_elements: usize) -> Self {
        LayerAssignment {
            layer_of_element: vec![0; n_elements],
        }
    }

    pub fn max_layer(&self) -> usize {
        self.layer_of_element.iter().copied().max().unwrap_or(0)
    }

    /// Elements in layers `1..=k`.
    pub fn elements_up_to(&self, k: usize) -> Vec<usize> {
        self.layer_of_element
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l >= 1 && l <= k)
            .map(|(e, _)| e)
            .collect()
    }
}

pub fn identify_layers(
    mesh: &QuadMesh,
    interface: &[usize],
    n_layers: usize,
) -> Result<LayerAssignment> {
    if interface.is_empty() {
        return Err(Error::InvalidMesh("interface node set is empty".into()));
    }
    let mut layers = LayerAssignment::unlayered(mesh.n_elements());
    if n_layers == 0 {
        return Ok(layers);
    }
    let mut front = vec![false; mesh.n_nodes()];
    for &n in interface {
        front[n] = true;
    }
    for layer in 1..=n_layers {
        let mut found = Vec::new();
        for (e, q) in mesh.quads().iter().enumerate() {
            if layers.layer_of_element[e] == 0 && q.iter().any(|&n| front[n]) {
                found.push(e);
            }
        }
        if found.is_empty() {
            break;
        }
        // Every element touching an older layer is already assigned.
        front.iter_mut().for_each(|f| *f = false);
        for &e in &found {
            layers.layer_of_element[e] = layer;
            for &n in &mesh.quads()[e] {
                front[n] = true;
            }
        }
    }
    Ok(layers)
}

/// Per-element multiplier: `factors[k - 1]` for layer `k`, 1 for unlayered elements.
pub fn apply_stiffening(layers: &LayerAssignment, factors: &[f64]) -> Result<Vec<f64>> {
    if let Some(f) = factors.iter().find(|&&f| !(f > 0.0) || !f.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "stiffening factor {f} must be positive"
        )));
    }
    let needed = layers.max_layer();
    if factors.len() < needed {
        return Err(Error::InvalidConfig(format!(
            "{} stiffening factors given for {needed} layers",
            factors.len()
        )));
    }
    Ok(layers
        .layer_of_element
        .iter()
        .map(|&l| if l == 0 { 1.0 } else { factors[l - 1] })
        .collect())
}

/// Layers and multipliers in one call; no factors means no stiffening.
pub fn element_multipliers(mesh: &QuadMesh, factors: &[f64]) -> Result<Vec<f64>> {
    if factors.is_empty() {
        return Ok(vec![1.0; mesh.n_elements()]);
    }
    let layers = identify_layers(mesh, mesh.interface(), factors.len())?;
    apply_stiffening(&layers, factors)
}
