//! Element quality metrics: angular skewness and area change.

use crate::error::{Error, Result};
use crate::mesh::{signed_area, Point, QuadMesh};

/// Interior corner angles in degrees, measured counterclockwise from the edge to the
/// next corner to the edge to the previous corner and wrapped into `[0, 360)`.
///
/// A convex counterclockwise quad has all angles in `(0, 180)`; a reflex or inverted
/// corner reports an angle above 180.
pub fn corner_angles(corners: &[Point; 4]) -> Result<[f64; 4]> {
    let mut angles = [0.0; 4];
    for i in 0..4 {
        let next = corners[(i + 1) % 4] - corners[i];
        let prev = corners[(i + 3) % 4] - corners[i];
        if next.norm_squared() == 0.0 {
            return Err(Error::DegenerateElement(i, (i + 1) % 4));
        }
        if prev.norm_squared() == 0.0 {
            return Err(Error::DegenerateElement((i + 3) % 4, i));
        }
        let cross = next.x * prev.y - next.y * prev.x;
        let dot = next.dot(&prev);
        angles[i] = cross.atan2(dot).to_degrees().rem_euclid(360.0);
    }
    Ok(angles)
}

/// Skewness score of a single corner angle given in degrees.
pub fn angle_score(theta: f64) -> f64 {
    1.0 - ((theta - 90.0) / 90.0).max((90.0 - theta) / 90.0)
}

/// Minimum corner score of a quad: 1 for a rectangle, negative once a corner folds.
pub fn element_skewness(corners: &[Point; 4]) -> Result<f64> {
    Ok(corner_angles(corners)?
        .into_iter()
        .map(angle_score)
        .fold(f64::INFINITY, f64::min))
}

/// Current signed area over reference area.
pub fn element_area_ratio(current: &[Point; 4], reference: &[Point; 4]) -> Result<f64> {
    let a0 = signed_area(reference);
    if a0 <= 0.0 {
        return Err(Error::InvalidReference(a0));
    }
    Ok(signed_area(current) / a0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QualityReport {
    /// Element ids covered by the report, in the order the per-element vectors use.
    pub elements: Vec<usize>,
    pub per_element_skewness: Vec<f64>,
    pub per_element_area_ratio: Vec<f64>,
    pub min_skewness: f64,
    pub min_area_ratio: f64,
    pub max_area_ratio: f64,
    pub inverted_elements: Vec<usize>,
}

impl QualityReport {
    pub fn inverted_count(&self) -> usize {
        self.inverted_elements.len()
    }
}

/// Aggregates skewness and area change of `deformed` against `reference` over `region`
/// (all elements when `None`).
pub fn quality_report(
    deformed: &QuadMesh,
    reference: &QuadMesh,
    region: Option<&[usize]>,
) -> Result<QualityReport> {
    if !deformed.same_connectivity(reference) {
        return Err(Error::ConnectivityMismatch(
            "deformed and reference meshes differ in topology".into(),
        ));
    }
    let elements: Vec<usize> = match region {
        Some(r) => {
            if let Some(&e) = r.iter().find(|&&e| e >= deformed.n_elements()) {
                return Err(Error::ConnectivityMismatch(format!(
                    "region element {e} does not exist"
                )));
            }
            r.to_vec()
        }
        None => (0..deformed.n_elements()).collect(),
    };

    let mut skew = Vec::with_capacity(elements.len());
    let mut ratio = Vec::with_capacity(elements.len());
    let mut inverted = Vec::new();
    for &e in &elements {
        let cur = deformed.corners(e);
        let s = element_skewness(&cur)?;
        let r = element_area_ratio(&cur, &reference.corners(e))?;
        if s <= 0.0 || signed_area(&cur) <= 0.0 {
            inverted.push(e);
        }
        skew.push(s);
        ratio.push(r);
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(QualityReport {
        min_skewness: min(&skew),
        min_area_ratio: min(&ratio),
        max_area_ratio: max(&ratio),
        elements,
        per_element_skewness: skew,
        per_element_area_ratio: ratio,
        inverted_elements: inverted,
    })
}
