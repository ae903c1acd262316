//! Uniform 1D meshes and P1 finite element primitives.
//!
//! Nodes are `x_j = a + j h` for `j = 0..J`, elements are `[x_j, x_{j+1}]`.
//! Nodal fields hold P1 coefficient vectors, cell fields hold one value per
//! element (discrete derivatives and other piecewise-constant quantities).
//!
//! Two inner products are provided: the mass-lumped one
//! `(f, g)_h = sum_j w_j f_j g_j` with trapezoidal weights `(h/2, h, ..., h, h/2)`,
//! and the consistent (exact) L2 product of the P1 interpolants.

use crate::error::{Error, Result};

/// Uniform partition of `[a, b]` into `nodes - 1` elements of length `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh1D {
    a: f64,
    b: f64,
    nodes: usize,
    h: f64,
}

impl Mesh1D {
    /// Mesh with `nodes` equally spaced nodes.
    pub fn new(a: f64, b: f64, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidMesh(format!("need at least 2 nodes, got {nodes}")));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidMesh(format!("invalid interval [{a}, {b}]")));
        }
        Ok(Self {
            a,
            b,
            nodes,
            h: (b - a) / (nodes - 1) as f64,
        })
    }

    /// Mesh with element length as close as possible to `h`. The length must
    /// divide `b - a` into an integer number of elements (up to 1e-9 relative).
    pub fn with_spacing(a: f64, b: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidMesh(format!("invalid spacing {h}")));
        }
        let cells = (b - a) / h;
        let rounded = cells.round();
        if rounded < 1.0 || (cells - rounded).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::InvalidMesh(format!(
                "spacing {h} does not divide [{a}, {b}]"
            )));
        }
        Self::new(a, b, rounded as usize + 1)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn elements(&self) -> usize {
        self.nodes - 1
    }

    pub fn x(&self, j: usize) -> f64 {
        // j/(J-1) is correctly rounded, so coinciding nodes of nested meshes
        // get bit-identical coordinates.
        self.a + (self.b - self.a) * (j as f64 / (self.nodes - 1) as f64)
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.nodes).map(|j| self.x(j)).collect()
    }

    /// Lumped quadrature weight of node `j` (the length of its control volume).
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.nodes {
            0.5 * self.h
        } else {
            self.h
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.nodes).map(|j| self.weight(j)).collect()
    }

    fn same_as(&self, other: &Mesh1D) -> bool {
        self.nodes == other.nodes && self.a == other.a && self.b == other.b
    }

    pub(crate) fn ensure_same(&self, other: &Mesh1D) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::MeshMismatch(format!(
                "[{}, {}] with {} nodes vs [{}, {}] with {} nodes",
                self.a, self.b, self.nodes, other.a, other.b, other.nodes
            )))
        }
    }

    /// Stride `s` such that fine node `s * j` coincides with coarse node `j`.
    pub fn nesting_stride(fine: &Mesh1D, coarse: &Mesh1D) -> Result<usize> {
        let non_nested = || Error::NonNested {
            fine_h: fine.h,
            coarse_h: coarse.h,
        };
        if fine.a != coarse.a || fine.b != coarse.b {
            return Err(non_nested());
        }
        let fine_cells = fine.elements();
        let coarse_cells = coarse.elements();
        if !fine_cells.is_multiple_of(coarse_cells) {
            return Err(non_nested());
        }
        Ok(fine_cells / coarse_cells)
    }
}

/// P1 degrees of freedom, one value per mesh node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField {
    mesh: Mesh1D,
    values: Vec<f64>,
}

impl NodalField {
    pub fn new(mesh: Mesh1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.nodes() {
            return Err(Error::MeshMismatch(format!(
                "nodal field has {} values for {} nodes",
                values.len(),
                mesh.nodes()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn constant(mesh: Mesh1D, c: f64) -> Self {
        Self {
            mesh,
            values: vec![c; mesh.nodes()],
        }
    }

    pub fn zeros(mesh: Mesh1D) -> Self {
        Self::constant(mesh, 0.0)
    }

    /// Nodal P1 interpolant `I_h f`.
    pub fn interpolate(mesh: Mesh1D, f: impl Fn(f64) -> f64) -> Self {
        Self {
            mesh,
            values: (0..mesh.nodes()).map(|j| f(mesh.x(j))).collect(),
        }
    }

    /// Nodal interpolant of `f` applied to each value of `self`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            mesh: self.mesh,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the first non-finite value, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    /// `self - other` on a shared mesh.
    pub fn sub(&self, other: &NodalField) -> Result<NodalField> {
        self.mesh.ensure_same(&other.mesh)?;
        Ok(Self {
            mesh: self.mesh,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Lumped integral `int I_h f = sum_j w_j f_j`.
    pub fn lumped_integral(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| self.mesh.weight(j) * v)
            .sum()
    }
}

impl std::ops::Index<usize> for NodalField {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.values[j]
    }
}

/// Piecewise-constant values, one per element.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    mesh: Mesh1D,
    values: Vec<f64>,
}

impl CellField {
    pub fn new(mesh: Mesh1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.elements() {
            return Err(Error::MeshMismatch(format!(
                "cell field has {} values for {} elements",
                values.len(),
                mesh.elements()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &CellField) -> Result<CellField> {
        self.mesh.ensure_same(&other.mesh)?;
        Ok(Self {
            mesh: self.mesh,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

impl std::ops::Index<usize> for CellField {
    type Output = f64;
    fn index(&self, e: usize) -> &f64 {
        &self.values[e]
    }
}

/// Nodal interpolation of a function.
pub fn interpolate(f: impl Fn(f64) -> f64, mesh: Mesh1D) -> NodalField {
    NodalField::interpolate(mesh, f)
}

/// Mass-lumped inner product `(f, g)_h = int I_h(f g)`.
pub fn lumped_inner(f: &NodalField, g: &NodalField) -> Result<f64> {
    f.mesh.ensure_same(&g.mesh)?;
    let m = f.mesh;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .enumerate()
        .map(|(j, (a, b))| m.weight(j) * a * b)
        .sum())
}

/// Element-wise derivative `(f_{j+1} - f_j) / h`.
pub fn gradient(f: &NodalField) -> CellField {
    let h = f.mesh.h();
    CellField {
        mesh: f.mesh,
        values: f.values.windows(2).map(|p| (p[1] - p[0]) / h).collect(),
    }
}

/// Exact L2 norm of the P1 interpolant (consistent mass matrix).
pub fn l2_norm(f: &NodalField) -> f64 {
    let h = f.mesh.h();
    f.values
        .windows(2)
        .map(|p| h / 3.0 * (p[0] * p[0] + p[0] * p[1] + p[1] * p[1]))
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// `sqrt(sum_e h g_e^2)`.
pub fn cell_l2_norm(g: &CellField) -> f64 {
    let h = g.mesh.h();
    g.values.iter().map(|v| h * v * v).sum::<f64>().sqrt()
}

/// `sqrt((f, f)_h)`.
pub fn lumped_norm(f: &NodalField) -> f64 {
    let m = f.mesh;
    f.values
        .iter()
        .enumerate()
        .map(|(j, v)| m.weight(j) * v * v)
        .sum::<f64>()
        .sqrt()
}

/// H1 norm `sqrt(||f||^2 + ||f'||^2)` of the P1 interpolant.
pub fn h1_norm(f: &NodalField) -> f64 {
    let l2 = l2_norm(f);
    let d = cell_l2_norm(&gradient(f));
    (l2 * l2 + d * d).sqrt()
}

/// Copies the values at the fine nodes coinciding with the coarse nodes.
pub fn restrict(fine: &NodalField, coarse: &Mesh1D) -> Result<NodalField> {
    let stride = Mesh1D::nesting_stride(&fine.mesh, coarse)?;
    Ok(NodalField {
        mesh: *coarse,
        values: fine.values.iter().step_by(stride).copied().collect(),
    })
}
