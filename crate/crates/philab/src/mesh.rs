//! Interval meshes, structured triangulations, and P1 primitives.
//!
//! Node ordering is lexicographic and every element loop runs in ascending
//! element index, so assembly and reductions are bit-reproducible.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Hard cap on node counts accepted by the builders.
pub const MAX_NODES: usize = 4_000_000;

const GAUSS_1D: [(f64, f64); 2] = [
    // (barycentric coordinate of the second node, weight fraction)
    (0.211324865405187117745425609748, 0.5),
    (0.788675134594812882254574390252, 0.5),
];

/// A 1D interval mesh or a structured right-triangle mesh of a rectangle.
#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    nodes: Vec<[f64; 2]>,
    segs: Vec<[usize; 2]>,
    tris: Vec<[usize; 3]>,
    boundary: Vec<usize>,
    is_boundary: Vec<bool>,
    diameter: f64,
}

impl Mesh {
    /// Uniform partition of `(a, b)` into `n` segments.
    pub fn interval(a: f64, b: f64, n: usize) -> Result<Mesh> {
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("interval ({a}, {b}) is empty or not finite")));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!("interval mesh needs n >= 2 segments, got {n}")));
        }
        if n + 1 > MAX_NODES {
            return Err(Error::Resource(format!("node count {} exceeds cap {MAX_NODES}", n + 1)));
        }
        let h = (b - a) / n as f64;
        let nodes: Vec<[f64; 2]> = (0..=n).map(|i| [a + h * i as f64, 0.0]).collect();
        let segs: Vec<[usize; 2]> = (0..n).map(|i| [i, i + 1]).collect();
        let mut is_boundary = vec![false; n + 1];
        is_boundary[0] = true;
        is_boundary[n] = true;
        Ok(Mesh {
            dim: 1,
            nodes,
            segs,
            tris: Vec::new(),
            boundary: vec![0, n],
            is_boundary,
            diameter: b - a,
        })
    }

    /// Structured triangulation of the rectangle `(0, lx) x (0, ly)` with
    /// `nx * ny` cells, each split into two right triangles.
    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Mesh> {
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidArgument(format!("rectangle sides ({lx}, {ly}) must be positive")));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument(format!("rectangle mesh needs nx, ny >= 2, got ({nx}, {ny})")));
        }
        let n_nodes = (nx + 1).checked_mul(ny + 1).unwrap_or(usize::MAX);
        if n_nodes > MAX_NODES {
            return Err(Error::Resource(format!("node count {n_nodes} exceeds cap {MAX_NODES}")));
        }
        let hx = lx / nx as f64;
        let hy = ly / ny as f64;
        let mut nodes = Vec::with_capacity(n_nodes);
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([hx * i as f64, hy * j as f64]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut tris = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (v00, v10) = (id(i, j), id(i + 1, j));
                let (v01, v11) = (id(i, j + 1), id(i + 1, j + 1));
                tris.push([v00, v10, v11]);
                tris.push([v00, v11, v01]);
            }
        }
        let mut is_boundary = vec![false; n_nodes];
        let mut boundary = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                if i == 0 || j == 0 || i == nx || j == ny {
                    is_boundary[id(i, j)] = true;
                    boundary.push(id(i, j));
                }
            }
        }
        Ok(Mesh {
            dim: 2,
            nodes,
            segs: Vec::new(),
            tris,
            boundary,
            is_boundary,
            diameter: lx.hypot(ly),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        if self.dim == 1 {
            self.segs.len()
        } else {
            self.tris.len()
        }
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        self.nodes[i]
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.is_boundary[i]
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&i| !self.is_boundary[i]).collect()
    }

    /// Domain diameter `d_Omega`.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Total measure of the domain (sum of element measures).
    pub fn measure(&self) -> f64 {
        (0..self.n_elements()).map(|k| self.element_measure(k)).sum()
    }

    pub fn element_nodes(&self, k: usize) -> &[usize] {
        if self.dim == 1 {
            &self.segs[k]
        } else {
            &self.tris[k]
        }
    }

    pub fn element_measure(&self, k: usize) -> f64 {
        if self.dim == 1 {
            let [a, b] = self.segs[k];
            self.nodes[b][0] - self.nodes[a][0]
        } else {
            let [a, b, c] = self.tris[k];
            let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
            0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])).abs()
        }
    }

    /// Constant P1 gradient of nodal `values` on element `k`.
    pub fn element_gradient(&self, k: usize, values: &[f64]) -> [f64; 2] {
        if self.dim == 1 {
            let [a, b] = self.segs[k];
            [(values[b] - values[a]) / (self.nodes[b][0] - self.nodes[a][0]), 0.0]
        } else {
            let [a, b, c] = self.tris[k];
            let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
            let (ux, uy) = (values[b] - values[a], values[c] - values[a]);
            let j11 = pb[0] - pa[0];
            let j12 = pb[1] - pa[1];
            let j21 = pc[0] - pa[0];
            let j22 = pc[1] - pa[1];
            let det = j11 * j22 - j12 * j21;
            [(j22 * ux - j12 * uy) / det, (-j21 * ux + j11 * uy) / det]
        }
    }

    /// Gradients of the local P1 basis functions on element `k`.
    pub fn basis_gradients(&self, k: usize) -> Vec<[f64; 2]> {
        if self.dim == 1 {
            let [a, b] = self.segs[k];
            let h = self.nodes[b][0] - self.nodes[a][0];
            vec![[-1.0 / h, 0.0], [1.0 / h, 0.0]]
        } else {
            let [a, b, c] = self.tris[k];
            let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
            let j11 = pb[0] - pa[0];
            let j12 = pb[1] - pa[1];
            let j21 = pc[0] - pa[0];
            let j22 = pc[1] - pa[1];
            let det = j11 * j22 - j12 * j21;
            let gb = [j22 / det, -j21 / det];
            let gc = [-j12 / det, j11 / det];
            vec![[-gb[0] - gc[0], -gb[1] - gc[1]], gb, gc]
        }
    }

    /// Visit the quadrature points of element `k` with their barycentric
    /// coordinates and weights (2-point Gauss on segments, edge midpoints on
    /// triangles; both exact for quadratics).
    pub fn for_each_quad_point(&self, k: usize, mut f: impl FnMut(&[f64], f64)) {
        let measure = self.element_measure(k);
        if self.dim == 1 {
            for &(xi, w) in &GAUSS_1D {
                f(&[1.0 - xi, xi], w * measure);
            }
        } else {
            let w = measure / 3.0;
            f(&[0.5, 0.5, 0.0], w);
            f(&[0.0, 0.5, 0.5], w);
            f(&[0.5, 0.0, 0.5], w);
        }
    }

    /// Physical coordinates of the barycentric point `bary` on element `k`.
    pub fn point_at(&self, k: usize, bary: &[f64]) -> [f64; 2] {
        let nodes = self.element_nodes(k);
        let mut x = [0.0, 0.0];
        for (lam, &n) in bary.iter().zip(nodes.iter()) {
            x[0] += lam * self.nodes[n][0];
            x[1] += lam * self.nodes[n][1];
        }
        x
    }

    /// Dump the mesh as a node/element CSV pair for external plotting.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut nf = std::fs::File::create(dir.join("nodes.csv"))?;
        writeln!(nf, "id,x,y,boundary")?;
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(nf, "{i},{},{},{}", p[0], p[1], u8::from(self.is_boundary[i]))?;
        }
        let mut ef = std::fs::File::create(dir.join("elements.csv"))?;
        if self.dim == 1 {
            writeln!(ef, "id,n0,n1")?;
            for (k, e) in self.segs.iter().enumerate() {
                writeln!(ef, "{k},{},{}", e[0], e[1])?;
            }
        } else {
            writeln!(ef, "id,n0,n1,n2")?;
            for (k, e) in self.tris.iter().enumerate() {
                writeln!(ef, "{k},{},{},{}", e[0], e[1], e[2])?;
            }
        }
        Ok(())
    }
}

/// Nodal scalar field on a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Field> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for a mesh with {} nodes",
                values.len(),
                mesh.n_nodes()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("field contains non-finite value {bad}")));
        }
        Ok(Field { values })
    }

    pub fn zeros(mesh: &Mesh) -> Field {
        Field { values: vec![0.0; mesh.n_nodes()] }
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Result<Field> {
        Field::new(mesh, (0..mesh.n_nodes()).map(|i| f(mesh.node(i))).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn matches(&self, mesh: &Mesh) -> Result<()> {
        if self.values.len() != mesh.n_nodes() {
            return Err(Error::InvalidArgument(format!(
                "field length {} does not match mesh node count {}",
                self.values.len(),
                mesh.n_nodes()
            )));
        }
        Ok(())
    }

    pub fn is_boundary_zero(&self, mesh: &Mesh) -> bool {
        mesh.boundary_nodes().iter().all(|&i| self.values[i] == 0.0)
    }

    /// Value of the P1 interpolant at barycentric point `bary` of element `k`.
    pub fn at(&self, mesh: &Mesh, k: usize, bary: &[f64]) -> f64 {
        mesh.element_nodes(k)
            .iter()
            .zip(bary.iter())
            .map(|(&n, &lam)| lam * self.values[n])
            .sum()
    }

    /// Persist as `id,x,y,value` CSV.
    pub fn write_csv(&self, mesh: &Mesh, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "id,x,y,value")?;
        for (i, v) in self.values.iter().enumerate() {
            let p = mesh.node(i);
            writeln!(f, "{i},{},{},{v:.17e}", p[0], p[1])?;
        }
        Ok(())
    }
}
