//! Yeoh strain energy under plane strain (F33 = 1).

use nalgebra::{Matrix2, Matrix3, Vector3};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YeohMaterial {
    pub a10: f64,
    pub a20: f64,
    pub a30: f64,
    pub kappa: f64,
}

impl Default for YeohMaterial {
    fn default() -> Self {
        YeohMaterial {
            a10: 1.0,
            a20: 1e3,
            a30: 0.0,
            kappa: 1.0,
        }
    }
}

/// Invariants and derivative factors shared by energy, stress and tangent.
struct State {
    c_inv: Matrix2<f64>,
    i1: f64,
    j: f64,
    g: f64,
    dw: f64,
    ddw: f64,
    x: f64,
}

impl State {
    fn new(f: &Matrix2<f64>, m: &YeohMaterial) -> Result<Self> {
        let j = f.determinant();
        if !(j > 0.0) {
            return Err(Error::Inadmissible {
                element: usize::MAX,
                det: j,
            });
        }
        let c = f.transpose() * f;
        let i1 = c.trace() + 1.0;
        let g = j.powf(-2.0 / 3.0);
        let x = i1 * g - 3.0;
        Ok(State {
            c_inv: c.try_inverse().expect("det F > 0"),
            i1,
            j,
            g,
            dw: m.a10 + 2.0 * m.a20 * x + 3.0 * m.a30 * x * x,
            ddw: 2.0 * m.a20 + 6.0 * m.a30 * x,
            x,
        })
    }
}

/// Reduced first invariant `I1 J^(-2/3)` and `J = det F`.
pub fn reduced_invariants(f: &Matrix2<f64>) -> Result<(f64, f64)> {
    let s = State::new(f, &YeohMaterial::default())?;
    Ok((s.x + 3.0, s.j))
}

pub fn yeoh_energy(f: &Matrix2<f64>, m: &YeohMaterial) -> Result<f64> {
    let s = State::new(f, m)?;
    let x = s.x;
    Ok(m.a10 * x + m.a20 * x * x + m.a30 * x * x * x + m.kappa * (s.j - 1.0).powi(2))
}

/// Second Piola-Kirchhoff stress, in-plane block.
pub fn pk2_stress(f: &Matrix2<f64>, m: &YeohMaterial) -> Result<Matrix2<f64>> {
    let s = State::new(f, m)?;
    Ok(pk2_from(&s, m))
}

fn pk2_from(s: &State, m: &YeohMaterial) -> Matrix2<f64> {
    let p = Matrix2::identity() - s.c_inv * (s.i1 / 3.0);
    p * (2.0 * s.dw * s.g) + s.c_inv * (2.0 * m.kappa * (s.j * s.j - s.j))
}

const VOIGT: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

/// `dS/dE` in Voigt order `[11, 22, 12]`, acting on engineering shear strain.
pub fn material_tangent(f: &Matrix2<f64>, m: &YeohMaterial) -> Result<Matrix3<f64>> {
    let s = State::new(f, m)?;
    Ok(tangent_from(&s, m))
}

fn tangent_from(s: &State, m: &YeohMaterial) -> Matrix3<f64> {
    let ci = &s.c_inv;
    let id = Matrix2::<f64>::identity();
    let p = id - ci * (s.i1 / 3.0);
    let (j, g) = (s.j, s.g);
    let mut d = Matrix3::zeros();
    for (a, &(i, jj)) in VOIGT.iter().enumerate() {
        for (b, &(k, l)) in VOIGT.iter().enumerate().skip(a) {
            let sym = 0.5 * (ci[(i, k)] * ci[(jj, l)] + ci[(i, l)] * ci[(jj, k)]);
            let dev = 2.0 * s.ddw * g * g * p[(i, jj)] * p[(k, l)]
                + 2.0
                    * s.dw
                    * g
                    * (-(id[(i, jj)] * ci[(k, l)] + ci[(i, jj)] * id[(k, l)]) / 3.0
                        + s.i1 / 9.0 * ci[(i, jj)] * ci[(k, l)]
                        + s.i1 / 3.0 * sym);
            let vol =
                2.0 * m.kappa * ((j * j - 0.5 * j) * ci[(i, jj)] * ci[(k, l)] - (j * j - j) * sym);
            d[(a, b)] = 2.0 * (dev + vol);
            d[(b, a)] = d[(a, b)];
        }
    }
    d
}

/// Energy, stress (Voigt) and tangent in one evaluation.
pub fn evaluate(
    f: &Matrix2<f64>,
    m: &YeohMaterial,
) -> Result<(f64, Vector3<f64>, Matrix3<f64>, Matrix2<f64>)> {
    let s = State::new(f, m)?;
    let x = s.x;
    let w = m.a10 * x + m.a20 * x * x + m.a30 * x * x * x + m.kappa * (s.j - 1.0).powi(2);
    let stress = pk2_from(&s, m);
    let voigt = Vector3::new(stress[(0, 0)], stress[(1, 1)], stress[(0, 1)]);
    Ok((w, voigt, tangent_from(&s, m), stress))
}
