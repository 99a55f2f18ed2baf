use crate::error::{Error, Result};
use crate::mesh::{Point, Vec2};

/// Downward displacement of the apex at unit scale, as a fraction of the side length.
pub const FARHAT_DEFAULT_COMPRESSION: f64 = 0.75;
/// Spring steps used for the example.
pub const FARHAT_DEFAULT_STEPS: usize = 5;

/// Equilateral triangle split into nine congruent triangles, bottom corners fixed
/// and the apex pushed down.
#[derive(Clone, Debug, PartialEq)]
pub struct FarhatProblem {
    pub nodes: Vec<Point>,
    pub tris: Vec<[usize; 3]>,
    pub fixed: Vec<usize>,
    pub prescribed: Vec<(usize, Vec2)>,
    pub geometric_scale: f64,
}

/// Builds the example at `geometric_scale` with an apex displacement of
/// `compression * geometric_scale` in -y.
pub fn build_farhat_triangle(geometric_scale: f64, compression: f64) -> Result<FarhatProblem> {
    if !(geometric_scale > 0.0) || !geometric_scale.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "geometric scale must be positive, got {geometric_scale}"
        )));
    }
    const N: usize = 3;
    let e1 = Vec2::new(1.0, 0.0) / N as f64;
    let e2 = Vec2::new(0.5, 3f64.sqrt() / 2.0) / N as f64;
    let mut index = [[usize::MAX; N + 1]; N + 1];
    let mut nodes = Vec::new();
    for j in 0..=N {
        for i in 0..=N - j {
            index[i][j] = nodes.len();
            nodes.push(Point::from(
                (e1 * i as f64 + e2 * j as f64) * geometric_scale,
            ));
        }
    }
    let mut tris = Vec::new();
    for j in 0..N {
        for i in 0..N - j {
            tris.push([index[i][j], index[i + 1][j], index[i][j + 1]]);
            if i + j + 1 < N {
                tris.push([index[i + 1][j], index[i + 1][j + 1], index[i][j + 1]]);
            }
        }
    }
    Ok(FarhatProblem {
        nodes,
        tris,
        fixed: vec![index[0][0], index[N][0]],
        prescribed: vec![(index[0][N], Vec2::new(0.0, -compression * geometric_scale))],
        geometric_scale,
    })
}
