//! Tridiagonal operators of P1 elements on a 1D mesh and their direct solve.

use crate::error::{Error, Result};
use crate::mesh::{CellField, Mesh1D, NodalField};

/// Square tridiagonal matrix. Row `i` is `lower[i-1], diag[i], upper[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriDiagMatrix {
    mesh: Mesh1D,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl TriDiagMatrix {
    pub fn zeros(mesh: Mesh1D) -> Self {
        let n = mesh.nodes();
        Self {
            mesh,
            lower: vec![0.0; n - 1],
            diag: vec![0.0; n],
            upper: vec![0.0; n - 1],
        }
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Entry `(i, k)`; zero outside the band.
    pub fn get(&self, i: usize, k: usize) -> f64 {
        if i == k {
            self.diag[i]
        } else if k == i + 1 {
            self.upper[i]
        } else if i == k + 1 {
            self.lower[k]
        } else {
            0.0
        }
    }

    /// Sets entry `(i, k)`, which must lie inside the band.
    pub fn set(&mut self, i: usize, k: usize, value: f64) {
        if i == k {
            self.diag[i] = value;
        } else if k == i + 1 {
            self.upper[i] = value;
        } else if i == k + 1 {
            self.lower[k] = value;
        } else {
            panic!("entry ({i}, {k}) is outside the tridiagonal band");
        }
    }

    /// Adds the 2x2 element block `[[m00, m01], [m10, m11]]` acting on nodes
    /// `e` and `e + 1`.
    fn add_element(&mut self, e: usize, m00: f64, m01: f64, m10: f64, m11: f64) {
        self.diag[e] += m00;
        self.upper[e] += m01;
        self.lower[e] += m10;
        self.diag[e + 1] += m11;
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &TriDiagMatrix, s: f64) -> Result<()> {
        self.mesh.ensure_same(&other.mesh)?;
        for (a, b) in self.lower.iter_mut().zip(&other.lower) {
            *a += s * b;
        }
        for (a, b) in self.diag.iter_mut().zip(&other.diag) {
            *a += s * b;
        }
        for (a, b) in self.upper.iter_mut().zip(&other.upper) {
            *a += s * b;
        }
        Ok(())
    }

    /// Replaces row `i` by the identity row.
    pub fn set_identity_row(&mut self, i: usize) {
        self.diag[i] = 1.0;
        if i > 0 {
            self.lower[i - 1] = 0.0;
        }
        if i + 1 < self.diag.len() {
            self.upper[i] = 0.0;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        assert_eq!(x.len(), n, "vector length does not match matrix size");
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|k| {
                let mut s = self.diag[k];
                if k > 0 {
                    s += self.upper[k - 1];
                }
                if k + 1 < n {
                    s += self.lower[k];
                }
                s
            })
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.lower[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.upper[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.diag.len();
        (0..n).map(|i| (0..n).map(|k| self.get(i, k)).collect()).collect()
    }

    /// LU factorization without pivoting (Thomas algorithm).
    pub fn factorize(&self) -> Result<TriDiagLu> {
        let n = self.diag.len();
        let tiny = 1e-14 * self.norm_inf();
        let mut upper = vec![0.0; n.saturating_sub(1)];
        let mut pivots = vec![0.0; n];
        pivots[0] = self.diag[0];
        for i in 0..n {
            if i > 0 {
                pivots[i] = self.diag[i] - self.lower[i - 1] * upper[i - 1];
            }
            if !(pivots[i].abs() >= tiny) || pivots[i] == 0.0 {
                return Err(Error::Singular {
                    row: i,
                    pivot: pivots[i],
                });
            }
            if i + 1 < n {
                upper[i] = self.upper[i] / pivots[i];
            }
        }
        Ok(TriDiagLu {
            lower: self.lower.clone(),
            pivots,
            upper,
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.factorize()?.solve(rhs))
    }
}

/// Factored tridiagonal matrix, reusable across right-hand sides.
#[derive(Clone, Debug)]
pub struct TriDiagLu {
    lower: Vec<f64>,
    pivots: Vec<f64>,
    upper: Vec<f64>,
}

impl TriDiagLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        assert_eq!(rhs.len(), n, "rhs length does not match matrix size");
        let mut x = vec![0.0; n];
        x[0] = rhs[0] / self.pivots[0];
        for i in 1..n {
            x[i] = (rhs[i] - self.lower[i - 1] * x[i - 1]) / self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.upper[i] * x[i + 1];
        }
        x
    }
}

/// P1 stiffness matrix `(f', g')`.
pub fn assemble_stiffness(mesh: Mesh1D) -> TriDiagMatrix {
    let mut k = TriDiagMatrix::zeros(mesh);
    let s = 1.0 / mesh.h();
    for e in 0..mesh.elements() {
        k.add_element(e, s, -s, -s, s);
    }
    k
}

/// Lumped mass matrix `diag(h/2, h, ..., h, h/2)`.
pub fn assemble_lumped_mass(mesh: Mesh1D) -> TriDiagMatrix {
    let mut m = TriDiagMatrix::zeros(mesh);
    for (j, d) in m.diag.iter_mut().enumerate() {
        *d = mesh.weight(j);
    }
    m
}

/// Consistent P1 mass matrix `(f, g)`.
pub fn assemble_consistent_mass(mesh: Mesh1D) -> TriDiagMatrix {
    let mut m = TriDiagMatrix::zeros(mesh);
    let h = mesh.h();
    for e in 0..mesh.elements() {
        m.add_element(e, h / 3.0, h / 6.0, h / 6.0, h / 3.0);
    }
    m
}

/// Convection form `(u b, g')` for a cell-constant field `b` (typically the
/// gradient of `v`), with `u` the P1 trial function. Row `i` is the test
/// function. Every column sums to zero.
pub fn assemble_convection(b: &CellField) -> TriDiagMatrix {
    let mesh = *b.mesh();
    let mut c = TriDiagMatrix::zeros(mesh);
    for (e, &g) in b.values().iter().enumerate() {
        // int_e phi_k = h/2 and the test derivative is -1/h (left) or 1/h (right)
        let half = 0.5 * g;
        c.add_element(e, -half, -half, half, half);
    }
    c
}

/// Lumped reaction form `(c u, g)_h = sum_j w_j c_j u_j g_j`.
pub fn assemble_lumped_reaction(c: &NodalField) -> TriDiagMatrix {
    let mesh = *c.mesh();
    let mut m = TriDiagMatrix::zeros(mesh);
    for (j, d) in m.diag.iter_mut().enumerate() {
        *d = mesh.weight(j) * c[j];
    }
    m
}

/// Element stiffness contributions scaled by a cell weight: `(k f', g')`.
pub fn assemble_weighted_stiffness(k: &CellField) -> TriDiagMatrix {
    let mesh = *k.mesh();
    let mut m = TriDiagMatrix::zeros(mesh);
    let inv_h = 1.0 / mesh.h();
    for (e, &w) in k.values().iter().enumerate() {
        let s = w * inv_h;
        m.add_element(e, s, -s, -s, s);
    }
    m
}

/// Consistent reaction form `(c f, g)` with `c` in P1, integrated exactly.
pub fn assemble_weighted_mass(c: &NodalField) -> TriDiagMatrix {
    let mesh = *c.mesh();
    let mut m = TriDiagMatrix::zeros(mesh);
    let h = mesh.h();
    for (e, p) in c.values().windows(2).enumerate() {
        let (c0, c1) = (p[0], p[1]);
        let off = h / 12.0 * (c0 + c1);
        m.add_element(
            e,
            h / 12.0 * (3.0 * c0 + c1),
            off,
            off,
            h / 12.0 * (c0 + 3.0 * c1),
        );
    }
    m
}
