//! Mesh-deformation blocks of a coupled adjoint: the interface mapping and the
//! derivatives of the mesh residual with respect to mesh and structural
//! displacements, plus finite-difference checks.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::QuadMesh;
use crate::sparse::{Constraints, SparseSymmetric};
use crate::yeoh::{
    internal_forces_and_tangent, solve_equilibrium, EquilibriumState, NewtonSettings,
};

/// Square 0/1 selector with unit diagonal at the interface dofs, so that
/// `x = N u` on the interface and zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceMapping {
    dim: usize,
    dofs: Vec<usize>,
}

impl InterfaceMapping {
    pub fn from_dofs(dim: usize, mut dofs: Vec<usize>) -> Result<Self> {
        dofs.sort_unstable();
        dofs.dedup();
        if let Some(&d) = dofs.iter().find(|&&d| d >= dim) {
            return Err(Error::IndexOutOfRange { index: d, dim });
        }
        Ok(InterfaceMapping { dim, dofs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn contains(&self, dof: usize) -> bool {
        self.dofs.binary_search(&dof).is_ok()
    }

    pub fn matrix(&self) -> SparseSymmetric {
        let t: Vec<_> = self.dofs.iter().map(|&d| (d, d, 1.0)).collect();
        SparseSymmetric::from_triplets(self.dim, &t).expect("indices checked")
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for &d in &self.dofs {
            x[d] = u[d];
        }
        x
    }
}

/// Mapping for the x and y dofs of every node in `interface`.
pub fn build_interface_mapping(mesh: &QuadMesh, interface: &[usize]) -> Result<InterfaceMapping> {
    if interface.is_empty() {
        return Err(Error::InvalidMesh("interface is empty".into()));
    }
    if let Some(&n) = interface.iter().find(|&&n| n >= mesh.n_nodes()) {
        return Err(Error::IndexOutOfRange {
            index: n,
            dim: mesh.n_nodes(),
        });
    }
    InterfaceMapping::from_dofs(
        mesh.n_dofs(),
        interface.iter().flat_map(|&n| [2 * n, 2 * n + 1]).collect(),
    )
}

fn require_converged(state: &EquilibriumState) -> Result<()> {
    if state.is_converged() {
        Ok(())
    } else {
        Err(Error::Unconverged {
            residual: state.residual_norm,
            tol: state.tolerance,
        })
    }
}

/// Mesh residual at displacement `u`: minus the internal forces on free dofs and
/// minus the gap to the prescribed value on prescribed dofs.
pub fn residual_at(state: &EquilibriumState, u: &[f64]) -> Result<Vec<f64>> {
    let (forces, _) = internal_forces_and_tangent(&state.reference, u, &state.materials)?;
    let mut d: Vec<f64> = forces.iter().map(|f| -f).collect();
    for (dof, target) in state.prescribed.iter() {
        d[dof] = -(u[dof] - target);
    }
    Ok(d)
}

/// Residual of a converged state, recomputed from its displacements.
#[allow(non_snake_case)]
pub fn residual_D(state: &EquilibriumState) -> Result<Vec<f64>> {
    require_converged(state)?;
    residual_at(state, &state.displacement)
}

/// Tangent at the state with every prescribed row replaced by an identity row.
pub fn treated_tangent(state: &EquilibriumState) -> Result<SparseSymmetric> {
    let (_, mut k) =
        internal_forces_and_tangent(&state.reference, &state.displacement, &state.materials)?;
    k.constrain_rows(&state.prescribed.dofs(), false);
    Ok(k)
}

fn negated(k: &SparseSymmetric) -> SparseSymmetric {
    k.scaled(-1.0)
}

/// The product `a N` for a 0/1 diagonal selector `N`.
fn select_columns(a: &SparseSymmetric, n: &InterfaceMapping) -> Result<SparseSymmetric> {
    let mut t = Vec::new();
    for i in 0..a.dim() {
        for (j, v) in a.row(i) {
            if n.contains(j) {
                t.push((i, j, v));
            }
        }
    }
    SparseSymmetric::from_triplets(a.dim(), &t)
}

/// Zero block standing in for the dependence on a fluid state of `cols` unknowns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZeroBlock {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Debug)]
pub struct SensitivityBlocks {
    pub tangent: SparseSymmetric,
    pub mapping: InterfaceMapping,
    pub d_dx: SparseSymmetric,
    pub d_du: SparseSymmetric,
}

impl SensitivityBlocks {
    /// Blocks derived from a given treated tangent.
    pub fn from_tangent(tangent: SparseSymmetric, mapping: InterfaceMapping) -> Result<Self> {
        let d_dx = negated(&tangent);
        let d_du = select_columns(&d_dx, &mapping)?;
        Ok(SensitivityBlocks {
            tangent,
            mapping,
            d_dx,
            d_du,
        })
    }

    pub fn compute(state: &EquilibriumState) -> Result<Self> {
        require_converged(state)?;
        let mapping = build_interface_mapping(&state.reference, state.reference.interface())?;
        Self::from_tangent(treated_tangent(state)?, mapping)
    }

    /// The residual does not depend on the fluid state.
    pub fn d_dw(&self, fluid_unknowns: usize) -> ZeroBlock {
        ZeroBlock {
            rows: self.tangent.dim(),
            cols: fluid_unknowns,
        }
    }
}

#[allow(non_snake_case)]
pub fn dD_dx(state: &EquilibriumState) -> Result<SparseSymmetric> {
    require_converged(state)?;
    Ok(negated(&treated_tangent(state)?))
}

#[allow(non_snake_case)]
pub fn dD_du(state: &EquilibriumState, mapping: &InterfaceMapping) -> Result<SparseSymmetric> {
    select_columns(&dD_dx(state)?, mapping)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdEntry {
    pub block: &'static str,
    pub h: f64,
    pub relative_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdReport {
    pub entries: Vec<FdEntry>,
}

pub const DX_THRESHOLD: f64 = 1e-6;
pub const DU_THRESHOLD: f64 = 1e-5;
pub const DEFAULT_H_SCHEDULE: [f64; 4] = [1e-4, 1e-5, 1e-6, 1e-7];

impl FdReport {
    /// Smallest error for `block` and the step that achieved it.
    pub fn best(&self, block: &str) -> Option<&FdEntry> {
        self.entries
            .iter()
            .filter(|e| e.block == block)
            .min_by(|a, b| a.relative_error.total_cmp(&b.relative_error))
    }

    pub fn passed(&self) -> bool {
        ["dD_dx", "dD_du"]
            .iter()
            .all(|b| self.best(b).is_some_and(|e| e.pass))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["block", "h", "relative_error", "pass"])?;
        for e in &self.entries {
            w.write_record([
                e.block.to_string(),
                format!("{:e}", e.h),
                format!("{:e}", e.relative_error),
                e.pass.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn dense_error(fd: &[Vec<f64>], exact: &[Vec<f64>]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in fd.iter().zip(exact) {
        for (x, y) in a.iter().zip(b) {
            num += (x - y) * (x - y);
            den += y * y;
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Compares `blocks` against central differences for each step in `h_schedule`.
///
/// The mesh block perturbs one displacement at a time and re-evaluates the
/// residual. The structural block moves one interface value, solves back to
/// equilibrium, and checks that the free rows of the tangent applied to the
/// response reproduce the corresponding column.
pub fn verify_fd(
    blocks: &SensitivityBlocks,
    state: &EquilibriumState,
    h_schedule: &[f64],
) -> Result<FdReport> {
    require_converged(state)?;
    let n = state.reference.n_dofs();
    let u0 = &state.displacement;
    let exact_dx = blocks.d_dx.to_dense();
    let exact_du = blocks.d_du.to_dense();
    let (_, raw) = internal_forces_and_tangent(&state.reference, u0, &state.materials)?;
    let mask = state.prescribed.mask(n);
    let mut entries = Vec::new();

    for &h in h_schedule {
        let columns = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut up = u0.clone();
                let mut um = u0.clone();
                up[j] += h;
                um[j] -= h;
                let dp = residual_at(state, &up)?;
                let dm = residual_at(state, &um)?;
                Ok(dp
                    .iter()
                    .zip(&dm)
                    .map(|(p, m)| (p - m) / (2.0 * h))
                    .collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        // Row-major, to match the dense blocks.
        let fd: Vec<Vec<f64>> = (0..n)
            .map(|i| columns.iter().map(|c| c[i]).collect())
            .collect();
        let err = dense_error(&fd, &exact_dx);
        entries.push(FdEntry {
            block: "dD_dx",
            h,
            relative_error: err,
            pass: err < DX_THRESHOLD,
        });
    }

    let tight = NewtonSettings {
        increments: 1,
        tol: 1e-12,
        max_iters: 50,
    };
    let resolve = |dof: usize, delta: f64| -> Result<Vec<f64>> {
        let mut target = Constraints::new();
        for (d, v) in state.prescribed.iter() {
            target.set(d, if d == dof { v + delta } else { v });
        }
        let s = solve_equilibrium(&state.reference, &state.materials, &target, Some(u0), tight)?;
        Ok(s.displacement)
    };
    for &h in h_schedule {
        let pairs = blocks
            .mapping
            .dofs()
            .par_iter()
            .map(|&c| {
                let (xp, xm) = (resolve(c, h).ok()?, resolve(c, -h).ok()?);
                let mut dx = vec![0.0; n];
                for i in 0..n {
                    if !mask[i] {
                        dx[i] = (xp[i] - xm[i]) / (2.0 * h);
                    }
                }
                let kdx = raw.mul_vec(&dx);
                let free = (0..n).filter(|&i| !mask[i]);
                Some((
                    free.clone().map(|i| kdx[i]).collect::<Vec<_>>(),
                    free.map(|i| exact_du[i][c]).collect::<Vec<_>>(),
                ))
            })
            .collect::<Option<Vec<_>>>();
        let failed = pairs.is_none();
        let (predicted, expected): (Vec<_>, Vec<_>) = pairs.unwrap_or_default().into_iter().unzip();
        let err = if failed {
            f64::INFINITY
        } else {
            dense_error(&predicted, &expected)
        };
        entries.push(FdEntry {
            block: "dD_du",
            h,
            relative_error: err,
            pass: err < DU_THRESHOLD,
        });
    }
    Ok(FdReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Point, Vec2};
    use crate::problem::{build_patch, build_patch_left_interface, MotionMode, PrescribedMotion};
    use crate::yeoh::{deform_hyperelastic, YeohConfig};

    fn patch_state(a20: f64, amp: f64) -> EquilibriumState {
        let m = build_patch_left_interface(3, 3, 1.0 / 3.0).unwrap();
        let nodes = m.interface().to_vec();
        let disp = nodes
            .iter()
            .map(|&n| {
                let p: Point = m.nodes()[n];
                Vec2::new(amp * (std::f64::consts::PI * p.y).sin(), 0.5 * amp * p.y)
            })
            .collect();
        let motion = PrescribedMotion::new(&m, nodes, disp, MotionMode::FromFile).unwrap();
        let cfg = YeohConfig {
            a20,
            ..Default::default()
        };
        deform_hyperelastic(&m, &motion, &cfg).unwrap().1
    }

    #[test]
    fn mapping_structure() {
        let m = build_patch(1, 1, 1.0).unwrap();
        let n = build_interface_mapping(&m, &[2]).unwrap();
        let dense = n.matrix().to_dense();
        let ones: usize = dense.iter().flatten().filter(|&&v| v == 1.0).count();
        assert_eq!(ones, 2);
        assert_eq!(dense[4][4], 1.0);
        assert_eq!(dense[5][5], 1.0);
        let nn = n
            .matrix()
            .mul_vec(&n.apply(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]));
        assert_eq!(nn, n.apply(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]));
        assert!(build_interface_mapping(&m, &[]).is_err());
    }

    #[test]
    fn residual_recomputation_is_bit_identical() {
        let s = patch_state(1e3, 0.05);
        let d = residual_D(&s).unwrap();
        let mask = s.prescribed.mask(d.len());
        for (i, (&r, &f)) in d.iter().zip(&s.internal_forces).enumerate() {
            if mask[i] {
                assert_eq!(r, 0.0);
            } else {
                assert_eq!(r.to_bits(), (-f).to_bits());
            }
        }
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm <= 1e-8);
    }

    #[test]
    fn blocks_have_documented_structure() {
        let s = patch_state(1e3, 0.05);
        let b = SensitivityBlocks::compute(&s).unwrap();
        let k = treated_tangent(&s).unwrap().to_dense();
        let dx = b.d_dx.to_dense();
        for i in 0..k.len() {
            for j in 0..k.len() {
                assert_eq!(dx[i][j], -k[i][j]);
            }
        }
        let mask = s.prescribed.mask(k.len());
        for i in (0..k.len()).filter(|&i| mask[i]) {
            for j in 0..k.len() {
                assert_eq!(dx[i][j], if i == j { -1.0 } else { 0.0 });
            }
        }
        // Chain rule against an explicit product with N.
        let nm = b.mapping.matrix().to_dense();
        let du = b.d_du.to_dense();
        for i in 0..k.len() {
            for j in 0..k.len() {
                let prod: f64 = (0..k.len()).map(|l| dx[i][l] * nm[l][j]).sum();
                assert_eq!(du[i][j], prod);
                if !b.mapping.contains(j) {
                    assert_eq!(du[i][j], 0.0);
                }
            }
        }
        assert_eq!(
            b.d_dw(7),
            ZeroBlock {
                rows: k.len(),
                cols: 7
            }
        );
    }

    #[test]
    fn empty_selector_gives_zero_block() {
        let s = patch_state(1e3, 0.05);
        let none = InterfaceMapping::from_dofs(s.reference.n_dofs(), vec![]).unwrap();
        let du = dD_du(&s, &none).unwrap();
        assert!(du.to_dense().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn finite_differences_agree() {
        let s = patch_state(1e3, 0.05);
        let b = SensitivityBlocks::compute(&s).unwrap();
        let report = verify_fd(&b, &s, &DEFAULT_H_SCHEDULE).unwrap();
        assert!(report.passed(), "{report:?}");
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("block,h,relative_error,pass\n"));
        assert_eq!(text.lines().count(), 1 + 2 * DEFAULT_H_SCHEDULE.len());
    }

    #[test]
    fn nearly_linear_patch_is_at_noise_floor() {
        let s = patch_state(0.0, 1e-4);
        let b = SensitivityBlocks::compute(&s).unwrap();
        let report = verify_fd(&b, &s, &[1e-5]).unwrap();
        assert!(report.best("dD_dx").unwrap().relative_error < 1e-8);
    }

    #[test]
    fn corrupted_tangent_is_flagged() {
        let s = patch_state(1e3, 0.05);
        let good = treated_tangent(&s).unwrap();
        let mask = s.prescribed.mask(good.dim());
        let free = (0..good.dim()).find(|&i| !mask[i]).unwrap();
        let mut t = Vec::new();
        for i in 0..good.dim() {
            for (j, v) in good.row(i) {
                t.push((i, j, if i == free && j == free { v * 1.01 } else { v }));
            }
        }
        let bad = SparseSymmetric::from_triplets(good.dim(), &t).unwrap();
        let mapping = build_interface_mapping(&s.reference, s.reference.interface()).unwrap();
        let blocks = SensitivityBlocks::from_tangent(bad, mapping).unwrap();
        let report = verify_fd(&blocks, &s, &DEFAULT_H_SCHEDULE).unwrap();
        assert!(!report.best("dD_dx").unwrap().pass);
        assert!(!report.passed());
    }

    #[test]
    fn unconverged_state_is_rejected() {
        let mut s = patch_state(1e3, 0.05);
        s.residual_norm = 1.0;
        assert!(matches!(residual_D(&s), Err(Error::Unconverged { .. })));
    }
}
