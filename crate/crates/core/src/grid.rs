//! Grids, quadrature, difference operators and norms.
//!
//! Radial grids discretize ∫_{ℝ^N} · dx with exact shell volumes around each
//! node (finite-volume weights, faces at arithmetic midpoints).  The
//! Dirichlet energy is an edge sum
//!
//! ```text
//! D(v) = Σ_edges c_e (v_i − v_j)²,   c_e = |S^{N−1}| r_face^{N−1} / h_e
//! ```
//!
//! and the weak Laplacian is its exact variation, (−Δ_h v)_i =
//! (∂(D/2)/∂v_i)/w_i, so the discrete Green identity ⟨−Δ_h v, v⟩_w = D(v)
//! holds to machine precision.  That identity is what keeps the energy and
//! its gradient consistent downstream.
//!
//! Small uniform tensor grids (N = 2, 3, Dirichlet boundary) serve as the
//! qualitative concentration lab; full grids in N ≥ 4 are rejected.

use std::sync::Arc;

use thiserror::Error;

use crate::closed_form::sphere_area;
use crate::exec;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("radial grid needs r_min < r_max and at least 8 nodes")]
    BadRadialSpec,
    #[error("tensor grids support N = 2 or 3 only; N = {0} full grids are rejected (desk-scale build)")]
    TensorDimension(usize),
    #[error("tensor resolution capped at 64 per axis for N = 3, got {0}")]
    TensorResolution(usize),
    #[error("tensor grid needs at least 8 nodes per axis and positive half-width")]
    BadTensorSpec,
    #[error("field length {got} does not match grid size {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("non-finite field value at node {0}")]
    NonFinite(usize),
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Radial line 0 = r₀ < r₁ < … < r_max carrying the weight r^{N−1}.
#[derive(Debug)]
pub struct RadialGrid {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    edge_coeff: Vec<f64>,
    sphere: f64,
}

impl RadialGrid {
    /// Geometric spacing from `r_min` to `r_max` with node 0 prepended —
    /// the default: algebraic tails need decades of range.
    pub fn geometric(dim: usize, r_min: f64, r_max: f64, n_nodes: usize) -> Result<Self, GridError> {
        if !(r_min > 0.0 && r_max > r_min) || n_nodes < 8 {
            return Err(GridError::BadRadialSpec);
        }
        let m = n_nodes - 1; // geometric part
        let ratio = (r_max / r_min).powf(1.0 / (m as f64 - 1.0));
        let mut nodes = Vec::with_capacity(n_nodes);
        nodes.push(0.0);
        let mut r = r_min;
        for _ in 0..m - 1 {
            nodes.push(r);
            r *= ratio;
        }
        nodes.push(r_max);
        Self::from_nodes(dim, nodes)
    }

    pub fn uniform(dim: usize, r_max: f64, n_nodes: usize) -> Result<Self, GridError> {
        if !(r_max > 0.0) || n_nodes < 8 {
            return Err(GridError::BadRadialSpec);
        }
        let h = r_max / (n_nodes - 1) as f64;
        let nodes = (0..n_nodes).map(|i| i as f64 * h).collect();
        Self::from_nodes(dim, nodes)
    }

    fn from_nodes(dim: usize, nodes: Vec<f64>) -> Result<Self, GridError> {
        if dim < 2 {
            return Err(GridError::BadRadialSpec);
        }
        let sphere = sphere_area(dim).map_err(|_| GridError::BadRadialSpec)?;
        let n = nodes.len();
        let nf = dim as f64;
        // Cell faces at arithmetic midpoints; first face at 0, last at r_max.
        let mut faces = Vec::with_capacity(n + 1);
        faces.push(0.0);
        for i in 0..n - 1 {
            faces.push(0.5 * (nodes[i] + nodes[i + 1]));
        }
        faces.push(nodes[n - 1]);
        let weights: Vec<f64> = (0..n)
            .map(|i| sphere * (faces[i + 1].powf(nf) - faces[i].powf(nf)) / nf)
            .collect();
        let edge_coeff: Vec<f64> = (0..n - 1)
            .map(|i| {
                let h = nodes[i + 1] - nodes[i];
                sphere * faces[i + 1].powf(nf - 1.0) / h
            })
            .collect();
        Ok(Self { dim, nodes, weights, edge_coeff, sphere })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn sphere_area(&self) -> f64 {
        self.sphere
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn edge_coeffs(&self) -> &[f64] {
        &self.edge_coeff
    }
}

/// Uniform box [−L, L]^dim with Dirichlet boundary, dim ∈ {2, 3}.
#[derive(Debug)]
pub struct TensorGrid {
    dim: usize,
    half_width: f64,
    n_axis: usize,
    spacing: f64,
}

impl TensorGrid {
    pub fn new(dim: usize, half_width: f64, n_axis: usize) -> Result<Self, GridError> {
        if dim < 2 || dim > 3 {
            return Err(GridError::TensorDimension(dim));
        }
        if dim == 3 && n_axis > 64 {
            return Err(GridError::TensorResolution(n_axis));
        }
        if n_axis < 8 || !(half_width > 0.0) {
            return Err(GridError::BadTensorSpec);
        }
        let spacing = 2.0 * half_width / (n_axis - 1) as f64;
        Ok(Self { dim, half_width, n_axis, spacing })
    }

    pub fn n_axis(&self) -> usize {
        self.n_axis
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    fn decode(&self, idx: usize) -> [usize; 3] {
        let n = self.n_axis;
        if self.dim == 2 {
            [idx % n, idx / n, 0]
        } else {
            [idx % n, (idx / n) % n, idx / (n * n)]
        }
    }

    #[inline]
    fn encode(&self, ix: [usize; 3]) -> usize {
        let n = self.n_axis;
        if self.dim == 2 {
            ix[0] + n * ix[1]
        } else {
            ix[0] + n * (ix[1] + n * ix[2])
        }
    }

    #[inline]
    fn coord(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let ix = self.decode(idx);
        (0..self.dim).any(|a| ix[a] == 0 || ix[a] == self.n_axis - 1)
    }
}

/// A computational grid: radial line or small tensor box.
#[derive(Debug)]
pub enum Grid {
    Radial(RadialGrid),
    Tensor(TensorGrid),
}

impl Grid {
    pub fn radial_geometric(dim: usize, r_min: f64, r_max: f64, n: usize) -> Result<Arc<Self>, GridError> {
        Ok(Arc::new(Grid::Radial(RadialGrid::geometric(dim, r_min, r_max, n)?)))
    }

    pub fn radial_uniform(dim: usize, r_max: f64, n: usize) -> Result<Arc<Self>, GridError> {
        Ok(Arc::new(Grid::Radial(RadialGrid::uniform(dim, r_max, n)?)))
    }

    pub fn tensor(dim: usize, half_width: f64, n_axis: usize) -> Result<Arc<Self>, GridError> {
        Ok(Arc::new(Grid::Tensor(TensorGrid::new(dim, half_width, n_axis)?)))
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::Radial(g) => g.nodes.len(),
            Grid::Tensor(g) => g.n_axis.pow(g.dim as u32),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Grid::Radial(g) => g.dim,
            Grid::Tensor(g) => g.dim,
        }
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        match self {
            Grid::Radial(g) => g.weights[i],
            Grid::Tensor(g) => {
                let ix = g.decode(i);
                let mut w = g.spacing.powi(g.dim as i32);
                for a in 0..g.dim {
                    if ix[a] == 0 || ix[a] == g.n_axis - 1 {
                        w *= 0.5;
                    }
                }
                w
            }
        }
    }

    /// Position of node i, padded to three coordinates.
    #[inline]
    pub fn position(&self, i: usize) -> [f64; 3] {
        match self {
            Grid::Radial(g) => [g.nodes[i], 0.0, 0.0],
            Grid::Tensor(g) => {
                let ix = g.decode(i);
                let mut p = [0.0; 3];
                for a in 0..g.dim {
                    p[a] = g.coord(ix[a]);
                }
                p
            }
        }
    }

    #[inline]
    pub fn node_radius(&self, i: usize) -> f64 {
        match self {
            Grid::Radial(g) => g.nodes[i],
            Grid::Tensor(_) => {
                let p = self.position(i);
                (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
            }
        }
    }

    /// Largest radius guaranteed to be covered by the grid.
    pub fn extent(&self) -> f64 {
        match self {
            Grid::Radial(g) => g.r_max(),
            Grid::Tensor(g) => g.half_width,
        }
    }

    /// Quadrature: Σ wᵢ f(i).
    pub fn integrate(&self, f: impl Fn(usize) -> f64 + Sync) -> f64 {
        exec::sum_by(self.len(), |i| self.weight(i) * f(i))
    }

    /// Edge-sum Dirichlet energy ≈ ∫|∇v|².
    pub fn dirichlet_energy(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.len());
        match self {
            Grid::Radial(g) => exec::sum_by(g.nodes.len() - 1, |i| {
                let d = v[i + 1] - v[i];
                g.edge_coeff[i] * d * d
            }),
            Grid::Tensor(g) => {
                let c = g.spacing.powi(g.dim as i32 - 2);
                exec::sum_by(self.len(), |i| {
                    let ix = g.decode(i);
                    let mut acc = 0.0;
                    for a in 0..g.dim {
                        if ix[a] + 1 < g.n_axis {
                            let mut jx = ix;
                            jx[a] += 1;
                            let d = v[g.encode(jx)] - v[i];
                            acc += d * d;
                        } else {
                            acc += v[i] * v[i]; // ghost beyond the right face
                        }
                        if ix[a] == 0 {
                            acc += v[i] * v[i]; // ghost beyond the left face
                        }
                    }
                    c * acc
                })
            }
        }
    }

    /// (−Δ_h v)_i = (1/wᵢ)·Σ_edges c_e (vᵢ − v_j): the exact variation of
    /// D(v)/2 in the weighted inner product.
    pub fn weak_neg_laplacian(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.len());
        match self {
            Grid::Radial(g) => {
                let n = g.nodes.len();
                exec::map_by(n, |i| {
                    let mut acc = 0.0;
                    if i > 0 {
                        acc += g.edge_coeff[i - 1] * (v[i] - v[i - 1]);
                    }
                    if i + 1 < n {
                        acc += g.edge_coeff[i] * (v[i] - v[i + 1]);
                    }
                    acc / g.weights[i]
                })
            }
            Grid::Tensor(g) => {
                let c = g.spacing.powi(g.dim as i32 - 2);
                exec::map_by(self.len(), |i| {
                    let ix = g.decode(i);
                    let mut acc = 0.0;
                    for a in 0..g.dim {
                        if ix[a] + 1 < g.n_axis {
                            let mut jx = ix;
                            jx[a] += 1;
                            acc += v[i] - v[g.encode(jx)];
                        } else {
                            acc += v[i];
                        }
                        if ix[a] > 0 {
                            let mut jx = ix;
                            jx[a] -= 1;
                            acc += v[i] - v[g.encode(jx)];
                        } else {
                            acc += v[i];
                        }
                    }
                    c * acc / self.weight(i)
                })
            }
        }
    }

    /// Pointwise stencil Laplacian for diagnostics: second-order divided
    /// differences (exact on quadratics), Neumann reflection at r = 0,
    /// one-sided at the outer node; 5/7-point stencil with Dirichlet ghosts
    /// on tensor grids.
    pub fn pointwise_laplacian(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.len());
        match self {
            Grid::Radial(g) => {
                let r = &g.nodes;
                let n = r.len();
                let nf = g.dim as f64;
                exec::map_by(n, |i| {
                    if i == 0 {
                        // Even reflection through 0: Δv(0) = N·v″(0).
                        return 2.0 * nf * (v[1] - v[0]) / (r[1] * r[1]);
                    }
                    let (i0, i1, i2) = if i + 1 < n { (i - 1, i, i + 1) } else { (n - 3, n - 2, n - 1) };
                    let d01 = (v[i1] - v[i0]) / (r[i1] - r[i0]);
                    let d12 = (v[i2] - v[i1]) / (r[i2] - r[i1]);
                    let dd = (d12 - d01) / (r[i2] - r[i0]);
                    let first = d01 + dd * (2.0 * r[i] - r[i0] - r[i1]);
                    let second = 2.0 * dd;
                    second + (nf - 1.0) / r[i] * first
                })
            }
            Grid::Tensor(g) => {
                let h2 = g.spacing * g.spacing;
                exec::map_by(self.len(), |i| {
                    let ix = g.decode(i);
                    let mut acc = 0.0;
                    for a in 0..g.dim {
                        let left = if ix[a] > 0 {
                            let mut jx = ix;
                            jx[a] -= 1;
                            v[g.encode(jx)]
                        } else {
                            0.0
                        };
                        let right = if ix[a] + 1 < g.n_axis {
                            let mut jx = ix;
                            jx[a] += 1;
                            v[g.encode(jx)]
                        } else {
                            0.0
                        };
                        acc += left + right - 2.0 * v[i];
                    }
                    acc / h2
                })
            }
        }
    }
}

/// Discrete field: immutable values bound to a shared grid.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch { got: values.len(), want: grid.len() });
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64; 3]) -> f64 + Sync) -> Result<Self, GridError> {
        let values = exec::map_by(grid.len(), |i| f(&grid.position(i)));
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
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

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
    }

    pub fn norm_l2(&self) -> f64 {
        self.grid.integrate(|i| self.values[i] * self.values[i]).sqrt()
    }

    pub fn norm_lp(&self, p: f64) -> f64 {
        self.grid.integrate(|i| self.values[i].abs().powf(p)).powf(1.0 / p)
    }

    pub fn dirichlet_energy(&self) -> f64 {
        self.grid.dirichlet_energy(&self.values)
    }

    /// D^{1,2} norm, (∫|∇v|²)^{1/2}.
    pub fn norm_d12(&self) -> f64 {
        self.dirichlet_energy().sqrt()
    }

    pub fn laplacian(&self) -> Result<Field, GridError> {
        Field::new(self.grid.clone(), self.grid.pointwise_laplacian(&self.values))
    }

    /// ⟨u, w⟩ in the weighted L² inner product; errors on grid mismatch.
    pub fn inner_l2(&self, other: &Field) -> Result<f64, GridError> {
        if !self.same_grid(other) {
            return Err(GridError::GridMismatch);
        }
        Ok(self.grid.integrate(|i| self.values[i] * other.values[i]))
    }

    /// D^{1,2} distance to another field on the same grid.
    pub fn d12_distance(&self, other: &Field) -> Result<f64, GridError> {
        if !self.same_grid(other) {
            return Err(GridError::GridMismatch);
        }
        let diff: Vec<f64> =
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(self.grid.dirichlet_energy(&diff).sqrt())
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the maximum value; plateaus break toward the smallest radius,
    /// then the smallest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0usize;
        for i in 1..self.values.len() {
            let (vi, vb) = (self.values[i], self.values[best]);
            if vi > vb
                || (vi == vb && self.grid.node_radius(i) < self.grid.node_radius(best))
            {
                best = i;
            }
        }
        best
    }
}
