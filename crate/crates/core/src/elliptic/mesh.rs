use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainShape {
    /// Unit square `[0, 1]^2`.
    Rectangle,
    /// Unit square minus the closed upper-right quadrant `[1/2, 1] x [1/2, 1]`.
    LShape,
}

/// Uniform grid of quads on the unit square, each split into two right triangles.
#[derive(Debug, Clone)]
pub struct StructuredMesh {
    shape: DomainShape,
    nx: usize,
    ny: usize,
    nodes: Vec<[f64; 2]>,
    node_ij: Vec<(usize, usize)>,
    // (nx+1)*(ny+1) lattice -> node id
    lattice: Vec<Option<usize>>,
    quads: Vec<[usize; 4]>,
    triangles: Vec<([usize; 3], usize)>,
    boundary: Vec<bool>,
}

impl StructuredMesh {
    pub fn shape(&self) -> DomainShape {
        self.shape
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Lattice indices `(i, j)` of a node.
    pub fn node_ij(&self, node: usize) -> (usize, usize) {
        self.node_ij[node]
    }

    /// Node at lattice position `(i, j)`, if it belongs to the domain.
    pub fn node_at(&self, i: usize, j: usize) -> Option<usize> {
        if i > self.nx || j > self.ny {
            return None;
        }
        self.lattice[j * (self.nx + 1) + i]
    }

    /// Corner nodes of each quad, counter-clockwise from the lower left.
    pub fn quads(&self) -> &[[usize; 4]] {
        &self.quads
    }

    /// Triangles with the index of the quad they were cut from.
    pub fn triangles(&self) -> &[([usize; 3], usize)] {
        &self.triangles
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.iter().filter(|b| **b).count()
    }

    /// Grid coordinates along each axis.
    pub fn axis_coordinates(&self) -> (Vec<f64>, Vec<f64>) {
        let xs = (0..=self.nx).map(|i| i as f64 / self.nx as f64).collect();
        let ys = (0..=self.ny).map(|j| j as f64 / self.ny as f64).collect();
        (xs, ys)
    }

    /// Node nearest to `(x1, x2)` among the mesh nodes.
    pub fn nearest_node(&self, x1: f64, x2: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (n, p) in self.nodes.iter().enumerate() {
            let d = (p[0] - x1).powi(2) + (p[1] - x2).powi(2);
            if d < dist {
                dist = d;
                best = n;
            }
        }
        best
    }
}

fn cell_present(shape: DomainShape, nx: usize, ny: usize, i: usize, j: usize) -> bool {
    match shape {
        DomainShape::Rectangle => true,
        DomainShape::LShape => !(2 * i >= nx && 2 * j >= ny),
    }
}

/// Builds the structured mesh; L-shapes need even cell counts so the notch falls on grid lines.
pub fn build_mesh(shape: DomainShape, nx: usize, ny: usize) -> Result<StructuredMesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::Config(vec![format!(
            "mesh needs at least 2 cells per direction, got {nx} x {ny}"
        )]));
    }
    if shape == DomainShape::LShape && (nx % 2 != 0 || ny % 2 != 0) {
        return Err(Error::Config(vec![format!(
            "L-shaped mesh needs even cell counts, got {nx} x {ny}"
        )]));
    }
    let present = |i: isize, j: isize| {
        i >= 0
            && j >= 0
            && (i as usize) < nx
            && (j as usize) < ny
            && cell_present(shape, nx, ny, i as usize, j as usize)
    };

    let mut lattice = vec![None; (nx + 1) * (ny + 1)];
    let mut nodes = Vec::new();
    let mut node_ij = Vec::new();
    let mut boundary = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let (ii, jj) = (i as isize, j as isize);
            let around = [(ii - 1, jj - 1), (ii, jj - 1), (ii - 1, jj), (ii, jj)];
            let count = around.iter().filter(|&&(a, b)| present(a, b)).count();
            if count == 0 {
                continue;
            }
            lattice[j * (nx + 1) + i] = Some(nodes.len());
            nodes.push([i as f64 / nx as f64, j as f64 / ny as f64]);
            node_ij.push((i, j));
            boundary.push(count < 4);
        }
    }

    let mut quads = Vec::new();
    let mut triangles = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if !cell_present(shape, nx, ny, i, j) {
                continue;
            }
            let id = |a: usize, b: usize| lattice[b * (nx + 1) + a].expect("corner of a present cell");
            let q = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            let e = quads.len();
            quads.push(q);
            triangles.push(([q[0], q[1], q[2]], e));
            triangles.push(([q[0], q[2], q[3]], e));
        }
    }

    Ok(StructuredMesh {
        shape,
        nx,
        ny,
        nodes,
        node_ij,
        lattice,
        quads,
        triangles,
        boundary,
    })
}
