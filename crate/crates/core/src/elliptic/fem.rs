//! Linear-triangle Galerkin discretization of `-div(a grad u) = f`, `u = 0` on the boundary.

use crate::elliptic::mesh::StructuredMesh;
use crate::elliptic::sparse::{conjugate_gradient, CsrMatrix};
use crate::error::{Error, Result};

/// Per-quad coefficient values with optional admissible bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSpec {
    values: Vec<f64>,
    lower: Option<f64>,
    upper: Option<f64>,
}

impl CoefficientSpec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((e, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::CoefficientBound(format!(
                "element {e} has non-positive coefficient {v}"
            )));
        }
        Ok(Self { values, lower: None, upper: None })
    }

    /// Uniform coefficient on every quad of the mesh.
    pub fn constant(mesh: &StructuredMesh, value: f64) -> Result<Self> {
        Self::new(vec![value; mesh.quads().len()])
    }

    /// Requires `lower <= a_e <= upper` for every element.
    pub fn with_bounds(mut self, lower: Option<f64>, upper: Option<f64>) -> Result<Self> {
        for (e, &v) in self.values.iter().enumerate() {
            if lower.is_some_and(|lo| v < lo) || upper.is_some_and(|hi| v > hi) {
                return Err(Error::CoefficientBound(format!(
                    "element {e} coefficient {v} outside [{:?}, {:?}]",
                    lower, upper
                )));
            }
        }
        self.lower = lower;
        self.upper = upper;
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> (Option<f64>, Option<f64>) {
        (self.lower, self.upper)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }
}

/// Averages a nodal coefficient over each quad's four corners.
pub fn element_coefficients(mesh: &StructuredMesh, field: impl Fn(f64, f64) -> f64) -> Result<CoefficientSpec> {
    let nodal: Vec<f64> = mesh.nodes().iter().map(|p| field(p[0], p[1])).collect();
    element_coefficients_from_nodal(mesh, &nodal)
}

/// Same as [`element_coefficients`] for precomputed nodal values.
pub fn element_coefficients_from_nodal(mesh: &StructuredMesh, nodal: &[f64]) -> Result<CoefficientSpec> {
    if nodal.len() != mesh.node_count() {
        return Err(Error::InvalidInput(format!(
            "{} nodal values for {} nodes",
            nodal.len(),
            mesh.node_count()
        )));
    }
    let values = mesh
        .quads()
        .iter()
        .map(|q| q.iter().map(|&n| nodal[n]).sum::<f64>() / 4.0)
        .collect();
    CoefficientSpec::new(values)
}

/// Reduced system over interior nodes after eliminating the Dirichlet nodes.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Mesh node of each unknown.
    pub dof_nodes: Vec<usize>,
    pub node_count: usize,
}

fn triangle_gradients(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let area = 0.5 * det.abs();
    let mut grads = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        grads[i] = [(p[j][1] - p[k][1]) / det, (p[k][0] - p[j][0]) / det];
    }
    (grads, area)
}

/// Stiffness matrix and load vector over all mesh nodes, before boundary elimination.
pub fn assemble_full(
    mesh: &StructuredMesh,
    coeffs: &CoefficientSpec,
    load: impl Fn(f64, f64) -> f64,
) -> Result<(CsrMatrix, Vec<f64>)> {
    if coeffs.values().len() != mesh.quads().len() {
        return Err(Error::InvalidInput(format!(
            "{} coefficients for {} elements",
            coeffs.values().len(),
            mesh.quads().len()
        )));
    }
    let nodes = mesh.nodes();
    let mut triplets = Vec::with_capacity(9 * mesh.triangles().len());
    let mut rhs = vec![0.0; mesh.node_count()];
    for &(tri, quad) in mesh.triangles() {
        let pts = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
        let (grads, area) = triangle_gradients(pts);
        let a = coeffs.values()[quad];
        for i in 0..3 {
            for j in 0..3 {
                let k = a * area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                triplets.push((tri[i], tri[j], k));
            }
        }
        let cx = (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0;
        let cy = (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0;
        let fl = load(cx, cy) * area / 3.0;
        for &n in &tri {
            rhs[n] += fl;
        }
    }
    Ok((CsrMatrix::from_triplets(mesh.node_count(), triplets), rhs))
}

/// Assembles and eliminates boundary rows and columns (homogeneous Dirichlet data).
pub fn assemble(mesh: &StructuredMesh, coeffs: &CoefficientSpec, load: impl Fn(f64, f64) -> f64) -> Result<LinearSystem> {
    let (full, full_rhs) = assemble_full(mesh, coeffs, load)?;
    let mut dof_of = vec![usize::MAX; mesh.node_count()];
    let mut dof_nodes = Vec::new();
    for n in 0..mesh.node_count() {
        if !mesh.is_boundary(n) {
            dof_of[n] = dof_nodes.len();
            dof_nodes.push(n);
        }
    }
    let mut triplets = Vec::with_capacity(full.nnz());
    for (d, &n) in dof_nodes.iter().enumerate() {
        for (c, v) in full.row(n) {
            if dof_of[c] != usize::MAX {
                triplets.push((d, dof_of[c], v));
            }
        }
    }
    let rhs = dof_nodes.iter().map(|&n| full_rhs[n]).collect();
    Ok(LinearSystem {
        matrix: CsrMatrix::from_triplets(dof_nodes.len(), triplets),
        rhs,
        dof_nodes,
        node_count: mesh.node_count(),
    })
}

/// Nodal displacement field with zeros on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalSolution {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Conjugate-gradient solve; `max_iter` defaults to ten times the number of unknowns.
pub fn solve_cg(system: &LinearSystem, rel_tol: f64, max_iter: Option<usize>) -> Result<NodalSolution> {
    let max_iter = max_iter.unwrap_or(10 * system.dof_nodes.len().max(1));
    let out = conjugate_gradient(&system.matrix, &system.rhs, rel_tol, max_iter)?;
    let mut values = vec![0.0; system.node_count];
    for (d, &n) in system.dof_nodes.iter().enumerate() {
        values[n] = out.solution[d];
    }
    Ok(NodalSolution {
        values,
        iterations: out.iterations,
        relative_residual: out.relative_residual,
    })
}

/// Assembles and solves with default tolerances.
pub fn solve_elliptic(
    mesh: &StructuredMesh,
    coeffs: &CoefficientSpec,
    load: impl Fn(f64, f64) -> f64,
) -> Result<NodalSolution> {
    solve_cg(&assemble(mesh, coeffs, load)?, DEFAULT_REL_TOL, None)
}

/// Nodal values along one grid row.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceCurve {
    pub x2: f64,
    pub row: usize,
    pub x1: Vec<f64>,
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
}

/// Mesh row nearest to `x2`, with the node ids of the row in increasing `x1`.
pub fn slice_nodes(mesh: &StructuredMesh, x2: f64) -> Result<(usize, Vec<usize>)> {
    if !(0.0..=1.0).contains(&x2) {
        return Err(Error::Domain(format!("slice ordinate {x2} outside [0, 1]")));
    }
    let row = (x2 * mesh.ny() as f64).round() as usize;
    let nodes: Vec<usize> = (0..=mesh.nx()).filter_map(|i| mesh.node_at(i, row)).collect();
    Ok((row, nodes))
}

/// Snaps `x2` to the nearest grid row and returns the solution along it.
pub fn extract_slice(mesh: &StructuredMesh, sol: &NodalSolution, x2: f64) -> Result<SliceCurve> {
    let (row, nodes) = slice_nodes(mesh, x2)?;
    Ok(SliceCurve {
        x2: row as f64 / mesh.ny() as f64,
        row,
        x1: nodes.iter().map(|&n| mesh.nodes()[n][0]).collect(),
        values: nodes.iter().map(|&n| sol.values[n]).collect(),
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::mesh::{build_mesh, DomainShape};
    use std::f64::consts::PI;

    // Double sine series for -Δu = 1 on the unit square.
    fn poisson_center_oracle() -> f64 {
        let mut sum = 0.0;
        for m in (1..400).step_by(2) {
            for n in (1..400).step_by(2) {
                let (mf, nf) = (m as f64, n as f64);
                let coeff = 16.0 / (PI.powi(2) * mf * nf * PI.powi(2) * (mf * mf + nf * nf));
                sum += coeff * (mf * PI * 0.5).sin() * (nf * PI * 0.5).sin();
            }
        }
        sum
    }

    #[test]
    fn fourier_oracle_value() {
        assert!((poisson_center_oracle() - 0.073_671_3).abs() < 1e-6);
    }

    #[test]
    fn poisson_center_value() {
        let mesh = build_mesh(DomainShape::Rectangle, 64, 64).unwrap();
        let sol = solve_elliptic(&mesh, &CoefficientSpec::constant(&mesh, 1.0).unwrap(), |_, _| 1.0).unwrap();
        let c = mesh.node_at(32, 32).unwrap();
        assert!((sol.values[c] - 0.073_671_3).abs() < 1e-3);
        assert!(sol.iterations < 5 * (63 * 63));
    }

    #[test]
    fn zero_load_gives_zero_solution() {
        let mesh = build_mesh(DomainShape::LShape, 8, 8).unwrap();
        let sol = solve_elliptic(&mesh, &CoefficientSpec::constant(&mesh, 1.0).unwrap(), |_, _| 0.0).unwrap();
        assert!(sol.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn unit_coefficient_gives_five_point_stencil() {
        let mesh = build_mesh(DomainShape::Rectangle, 6, 6).unwrap();
        let (k, _) = assemble_full(&mesh, &CoefficientSpec::constant(&mesh, 1.0).unwrap(), |_, _| 1.0).unwrap();
        assert!(k.asymmetry() < 1e-14);
        for n in 0..mesh.node_count() {
            let sum: f64 = k.row(n).map(|(_, v)| v).sum();
            assert!(sum.abs() < 1e-12);
            if !mesh.is_boundary(n) {
                let (i, j) = mesh.node_ij(n);
                assert!((k.get(n, n) - 4.0).abs() < 1e-12);
                for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                    let m = mesh.node_at((i as i64 + di) as usize, (j as i64 + dj) as usize).unwrap();
                    assert!((k.get(n, m) + 1.0).abs() < 1e-12);
                }
                let diag = mesh.node_at(i + 1, j + 1).unwrap();
                assert!(k.get(n, diag).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coefficient_scaling() {
        let mesh = build_mesh(DomainShape::LShape, 10, 10).unwrap();
        let c1 = element_coefficients(&mesh, |x, y| 1.0 + x * y).unwrap();
        let u1 = solve_elliptic(&mesh, &c1, |_, _| 1.0).unwrap();
        let u2 = solve_elliptic(&mesh, &c1.scaled(2.0).unwrap(), |_, _| 1.0).unwrap();
        for (a, b) in u1.values.iter().zip(&u2.values) {
            assert!((a - 2.0 * b).abs() < 1e-8 * a.abs().max(1e-3));
        }
    }

    #[test]
    fn element_averaging() {
        let mesh = build_mesh(DomainShape::Rectangle, 2, 2).unwrap();
        let c = element_coefficients(&mesh, |_, _| 3.5).unwrap();
        assert!(c.values().iter().all(|v| *v == 3.5));
        // corners of quad 0 get 1, 2, 3, 4
        let q = mesh.quads()[0];
        let mut nodal = vec![1.0; mesh.node_count()];
        for (k, &n) in q.iter().enumerate() {
            nodal[n] = (k + 1) as f64;
        }
        let c = element_coefficients_from_nodal(&mesh, &nodal).unwrap();
        assert_eq!(c.values()[0], 2.5);
        assert!(matches!(
            element_coefficients(&mesh, |x, _| x - 0.9),
            Err(Error::CoefficientBound(_))
        ));
    }

    #[test]
    fn coefficient_bounds_are_checked() {
        let spec = CoefficientSpec::new(vec![0.5, 2.0]).unwrap();
        assert!(spec.clone().with_bounds(Some(0.1), Some(3.0)).is_ok());
        assert!(spec.with_bounds(Some(0.6), None).is_err());
    }

    #[test]
    fn slices() {
        let mesh = build_mesh(DomainShape::LShape, 18, 18).unwrap();
        let sol = solve_elliptic(&mesh, &CoefficientSpec::constant(&mesh, 1.0).unwrap(), |_, _| 1.0).unwrap();
        let s = extract_slice(&mesh, &sol, 0.4444).unwrap();
        assert_eq!(s.row, 8);
        assert_eq!(s.x1.len(), 19);
        let b = extract_slice(&mesh, &sol, 0.0).unwrap();
        assert!(b.values.iter().all(|v| *v == 0.0));
        assert!(extract_slice(&mesh, &sol, 1.2).is_err());

        let sq = build_mesh(DomainShape::Rectangle, 16, 16).unwrap();
        let sol = solve_cg(
            &assemble(&sq, &CoefficientSpec::constant(&sq, 1.0).unwrap(), |_, _| 1.0).unwrap(),
            1e-14,
            None,
        )
        .unwrap();
        let s = extract_slice(&sq, &sol, 0.5).unwrap();
        let n = s.values.len();
        for i in 0..n {
            assert!((s.values[i] - s.values[n - 1 - i]).abs() < 1e-12);
        }
        assert!(s.x1.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn maximum_principle() {
        let mesh = build_mesh(DomainShape::LShape, 12, 12).unwrap();
        let c = element_coefficients(&mesh, |x, y| 0.1 + 5.0 * (7.0 * x).sin().powi(2) * y).unwrap();
        let sol = solve_elliptic(&mesh, &c, |x, _| 1.0 + x).unwrap();
        assert!(sol.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn continuous_dependence_on_coefficient() {
        let mesh = build_mesh(DomainShape::LShape, 12, 12).unwrap();
        let base = element_coefficients(&mesh, |x, y| 1.0 + 0.5 * x * y).unwrap();
        let u0 = solve_cg(&assemble(&mesh, &base, |_, _| 1.0).unwrap(), 1e-13, None).unwrap();
        let sup = u0.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut last = f64::INFINITY;
        for delta in [1e-2, 1e-3, 1e-4] {
            let c = element_coefficients(&mesh, |x, y| 1.0 + 0.5 * x * y + delta * (3.0 * x).cos()).unwrap();
            let u = solve_cg(&assemble(&mesh, &c, |_, _| 1.0).unwrap(), 1e-13, None).unwrap();
            let diff = u.values.iter().zip(&u0.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / sup;
            assert!(diff < last);
            last = diff;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn center_error_is_second_order() {
        let mut errors = Vec::new();
        for n in [8, 16, 32] {
            let mesh = build_mesh(DomainShape::Rectangle, n, n).unwrap();
            let sol = solve_cg(
                &assemble(&mesh, &CoefficientSpec::constant(&mesh, 1.0).unwrap(), |_, _| 1.0).unwrap(),
                1e-13,
                None,
            )
            .unwrap();
            let c = mesh.node_at(n / 2, n / 2).unwrap();
            errors.push((sol.values[c] - poisson_center_oracle()).abs());
        }
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.0 && ratio < 5.0, "{errors:?}");
        }
    }
}
