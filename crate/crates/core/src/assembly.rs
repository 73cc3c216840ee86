//! P1 finite-element matrices and load vectors.
//!
//! All matrices follow the convention `A_ij = a(φ_j, φ_i)`, so that the
//! sesquilinear form (conjugate-linear in its second slot) evaluates as
//! `a(u, v) = v̂ᴴ A û`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{SparseMatrixC, Symmetry};
use crate::mesh::{BoundaryEdge, EdgeTag, FeFunction, TriMesh};
use crate::C64;

/// Scalar coefficient: a complex constant or a function of position.
#[derive(Clone)]
pub enum Coefficient {
    Constant(C64),
    Field(Arc<dyn Fn([f64; 2]) -> C64 + Send + Sync>),
}

impl Coefficient {
    pub fn real(v: f64) -> Self {
        Coefficient::Constant(C64::new(v, 0.0))
    }

    pub fn at(&self, p: [f64; 2]) -> C64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f(p),
        }
    }

    /// `alpha·self + beta`, kept constant when possible.
    pub fn affine(&self, alpha: C64, beta: C64) -> Coefficient {
        match self {
            Coefficient::Constant(c) => Coefficient::Constant(alpha * c + beta),
            Coefficient::Field(f) => {
                let f = Arc::clone(f);
                Coefficient::Field(Arc::new(move |p| alpha * f(p) + beta))
            }
        }
    }

    /// Pointwise complex conjugate.
    pub fn conjugate(&self) -> Coefficient {
        match self {
            Coefficient::Constant(c) => Coefficient::Constant(c.conj()),
            Coefficient::Field(f) => {
                let f = Arc::clone(f);
                Coefficient::Field(Arc::new(move |p| f(p).conj()))
            }
        }
    }

    fn is_real_constant(&self) -> bool {
        matches!(self, Coefficient::Constant(c) if c.im == 0.0)
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Field(_) => f.write_str("Field(..)"),
        }
    }
}

/// Wavenumber `k` and index of refraction `n = n₁ + i n₂ / k`.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    k: f64,
    n: Coefficient,
}

impl CoefficientField {
    pub fn new(k: f64, n: Coefficient) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::invalid(format!("wavenumber must be positive, got {k}")));
        }
        if let Coefficient::Constant(c) = n {
            check_index(c, None)?;
        }
        Ok(Self { k, n })
    }

    pub fn constant(k: f64, n: C64) -> Result<Self> {
        Self::new(k, Coefficient::Constant(n))
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n(&self) -> &Coefficient {
        &self.n
    }

    /// `true` when `n` is a real constant, so the whole pencil is real.
    pub fn is_real(&self) -> bool {
        self.n.is_real_constant()
    }

    /// Weight `k² n` of the mass term in the operator.
    pub fn mass_weight(&self) -> Coefficient {
        self.n.affine(C64::new(self.k * self.k, 0.0), C64::new(0.0, 0.0))
    }

    /// Weight `k² n + 1` of the shifted mass term.
    pub fn shifted_mass_weight(&self) -> Coefficient {
        self.n.affine(C64::new(self.k * self.k, 0.0), C64::new(1.0, 0.0))
    }

    fn check_at(&self, p: [f64; 2]) -> Result<()> {
        check_index(self.n.at(p), Some(p))
    }
}

fn check_index(n: C64, at: Option<[f64; 2]>) -> Result<()> {
    if n.re > 0.0 && n.im >= 0.0 && n.is_finite() {
        return Ok(());
    }
    let place = at.map(|p| format!(" at ({}, {})", p[0], p[1])).unwrap_or_default();
    Err(Error::invalid(format!(
        "index of refraction {n}{place} needs a positive real part and a nonnegative imaginary part"
    )))
}

/// Which pairing a load vector represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadKind {
    /// `v ↦ weight·⟨g, v⟩` over the physical boundary.
    BoundaryPairing,
    /// `v ↦ (weight·g, v)` over the domain.
    DomainPairing,
}

/// Element selection used by the filtered assemblies.
pub type ElementFilter<'a> = &'a dyn Fn(usize) -> bool;

// Node-to-node adjacency of the triangulation in CSR form.
fn mesh_pattern(mesh: &TriMesh) -> (Vec<usize>, Vec<usize>) {
    let n = mesh.node_count();
    let mut incident_ptr = vec![0usize; n + 1];
    for el in mesh.elements() {
        for &v in el {
            incident_ptr[v + 1] += 1;
        }
    }
    for i in 0..n {
        incident_ptr[i + 1] += incident_ptr[i];
    }
    let mut next = incident_ptr.clone();
    let mut incident = vec![0usize; incident_ptr[n]];
    for (e, el) in mesh.elements().iter().enumerate() {
        for &v in el {
            incident[next[v]] = e;
            next[v] += 1;
        }
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::with_capacity(7 * n);
    let mut buf = Vec::new();
    for r in 0..n {
        buf.clear();
        buf.push(r);
        for &e in &incident[incident_ptr[r]..incident_ptr[r + 1]] {
            buf.extend_from_slice(&mesh.elements()[e]);
        }
        buf.sort_unstable();
        buf.dedup();
        col_idx.extend_from_slice(&buf);
        row_ptr.push(col_idx.len());
    }
    (row_ptr, col_idx)
}

// Accumulates element contributions into a fixed pattern, in element order.
struct Accumulator {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl Accumulator {
    fn new(mesh: &TriMesh) -> Self {
        let (row_ptr, col_idx) = mesh_pattern(mesh);
        let values = vec![C64::new(0.0, 0.0); col_idx.len()];
        Self {
            row_ptr,
            col_idx,
            values,
        }
    }

    fn add(&mut self, r: usize, c: usize, v: C64) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        let k = self.col_idx[span.clone()]
            .binary_search(&c)
            .expect("entry outside the mesh pattern");
        self.values[span.start + k] += v;
    }

    fn finish(self, symmetry: Symmetry) -> SparseMatrixC {
        let dim = self.row_ptr.len() - 1;
        SparseMatrixC::from_csr(dim, self.row_ptr, self.col_idx, self.values, symmetry)
            .expect("mesh pattern is a valid CSR layout")
    }
}

fn element_geometry(mesh: &TriMesh, e: usize) -> Result<([[f64; 2]; 3], f64)> {
    let el = mesh.elements()[e];
    let p = el.map(|v| mesh.nodes()[v]);
    let area = mesh.element_area(e);
    if !(area > 0.0) {
        return Err(Error::Assembly(format!("element {e} has nonpositive area {area:e}")));
    }
    Ok((p, area))
}

/// Exact P1 element stiffness matrix.
pub fn local_stiffness(p: &[[f64; 2]; 3], area: f64) -> [[f64; 3]; 3] {
    // edge opposite vertex i
    let edge = |i: usize| {
        let a = p[(i + 1) % 3];
        let b = p[(i + 2) % 3];
        [b[0] - a[0], b[1] - a[1]]
    };
    let e = [edge(0), edge(1), edge(2)];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (e[i][0] * e[j][0] + e[i][1] * e[j][1]) / (4.0 * area);
        }
    }
    k
}

/// P1 element mass matrix with weight `c`: closed form for constants, three
/// mid-edge points otherwise.
pub fn local_mass(p: &[[f64; 2]; 3], area: f64, c: &Coefficient) -> [[C64; 3]; 3] {
    let zero = C64::new(0.0, 0.0);
    let mut m = [[zero; 3]; 3];
    match c {
        Coefficient::Constant(c) => {
            for (i, row) in m.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    let w = if i == j { 2.0 } else { 1.0 };
                    *v = c * (w * area / 12.0);
                }
            }
        }
        Coefficient::Field(f) => {
            // midpoint of the edge opposite vertex q; φ_q vanishes there and
            // the two other basis functions equal 1/2
            for q in 0..3 {
                let a = p[(q + 1) % 3];
                let b = p[(q + 2) % 3];
                let cq = f([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]) * (area / 3.0);
                let phi = |i: usize| if i == q { 0.0 } else { 0.5 };
                for (i, row) in m.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v += cq * (phi(i) * phi(j));
                    }
                }
            }
        }
    }
    m
}

fn local_edge_mass(a: [f64; 2], b: [f64; 2], len: f64, c: &Coefficient) -> [[C64; 2]; 2] {
    match c {
        Coefficient::Constant(c) => {
            let d = c * (len / 3.0);
            let o = c * (len / 6.0);
            [[d, o], [o, d]]
        }
        Coefficient::Field(f) => {
            // Simpson's rule, exact for quadratic integrands
            let ca = f(a);
            let cb = f(b);
            let cm = f([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]);
            let o = cm * (len / 6.0);
            [[(ca + cm) * (len / 6.0), o], [o, (cb + cm) * (len / 6.0)]]
        }
    }
}

/// `K_ij = ∫ ∇φ_j·∇φ_i`.
pub fn assemble_stiffness(mesh: &TriMesh) -> Result<SparseMatrixC> {
    assemble_stiffness_on(mesh, &|_| true)
}

pub fn assemble_stiffness_on(mesh: &TriMesh, filter: ElementFilter<'_>) -> Result<SparseMatrixC> {
    let mut acc = Accumulator::new(mesh);
    for e in 0..mesh.element_count() {
        if !filter(e) {
            continue;
        }
        let (p, area) = element_geometry(mesh, e)?;
        let k = local_stiffness(&p, area);
        let el = mesh.elements()[e];
        for i in 0..3 {
            for j in 0..3 {
                acc.add(el[i], el[j], C64::new(k[i][j], 0.0));
            }
        }
    }
    Ok(acc.finish(Symmetry::RealSymmetric))
}

/// `(M_c)_ij = ∫ c φ_j φ_i`.
pub fn assemble_mass(mesh: &TriMesh, c: &Coefficient) -> Result<SparseMatrixC> {
    assemble_mass_on(mesh, c, &|_| true)
}

pub fn assemble_mass_on(mesh: &TriMesh, c: &Coefficient, filter: ElementFilter<'_>) -> Result<SparseMatrixC> {
    let mut acc = Accumulator::new(mesh);
    for e in 0..mesh.element_count() {
        if !filter(e) {
            continue;
        }
        let (p, area) = element_geometry(mesh, e)?;
        let m = local_mass(&p, area, c);
        let el = mesh.elements()[e];
        for i in 0..3 {
            for j in 0..3 {
                acc.add(el[i], el[j], m[i][j]);
            }
        }
    }
    let symmetry = if c.is_real_constant() {
        Symmetry::RealSymmetric
    } else {
        Symmetry::ComplexSymmetric
    };
    Ok(acc.finish(symmetry))
}

/// `B_ij = ∫ φ_j φ_i ds` over the edges carrying one of `tags`.
pub fn assemble_boundary_mass(mesh: &TriMesh, tags: &[EdgeTag]) -> Result<SparseMatrixC> {
    assemble_boundary_mass_on(mesh, tags, &|_| true)
}

/// Boundary mass restricted to edges whose owning element passes `filter`.
pub fn assemble_boundary_mass_on(mesh: &TriMesh, tags: &[EdgeTag], filter: ElementFilter<'_>) -> Result<SparseMatrixC> {
    if tags.is_empty() {
        return Err(Error::invalid("boundary mass needs at least one edge tag"));
    }
    boundary_pairing_matrix(mesh, tags, &Coefficient::real(1.0), filter)
}

fn boundary_pairing_matrix(
    mesh: &TriMesh,
    tags: &[EdgeTag],
    c: &Coefficient,
    filter: ElementFilter<'_>,
) -> Result<SparseMatrixC> {
    let mut triplets = Vec::with_capacity(4 * mesh.boundary_edges().len());
    for edge in selected_edges(mesh, tags, filter) {
        let [a, b] = edge.nodes;
        let len = mesh.edge_length(edge);
        if !(len > 0.0) {
            return Err(Error::Assembly(format!("boundary edge ({a}, {b}) has zero length")));
        }
        let m = local_edge_mass(mesh.nodes()[a], mesh.nodes()[b], len, c);
        for (i, &r) in [a, b].iter().enumerate() {
            for (j, &s) in [a, b].iter().enumerate() {
                triplets.push((r, s, m[i][j]));
            }
        }
    }
    let symmetry = if c.is_real_constant() {
        Symmetry::RealSymmetric
    } else {
        Symmetry::ComplexSymmetric
    };
    SparseMatrixC::from_triplets(mesh.node_count(), &triplets, symmetry)
}

fn selected_edges<'m>(
    mesh: &'m TriMesh,
    tags: &'m [EdgeTag],
    filter: ElementFilter<'m>,
) -> impl Iterator<Item = &'m BoundaryEdge> + 'm {
    mesh.boundary_edges()
        .iter()
        .filter(move |e| tags.contains(&e.tag) && filter(e.element))
}

/// `A = K − k² M_n`, complex symmetric.
pub fn assemble_operator(mesh: &TriMesh, coeff: &CoefficientField) -> Result<SparseMatrixC> {
    assemble_operator_on(mesh, coeff, &|_| true)
}

pub fn assemble_operator_on(
    mesh: &TriMesh,
    coeff: &CoefficientField,
    filter: ElementFilter<'_>,
) -> Result<SparseMatrixC> {
    if let Coefficient::Field(_) = coeff.n() {
        check_field(mesh, coeff, filter)?;
    }
    let k = assemble_stiffness_on(mesh, filter)?;
    let m = assemble_mass_on(mesh, &coeff.mass_weight(), filter)?;
    let symmetry = if coeff.is_real() {
        Symmetry::RealSymmetric
    } else {
        Symmetry::ComplexSymmetric
    };
    k.lin_comb(C64::new(1.0, 0.0), &m, C64::new(-1.0, 0.0), symmetry)
}

// validates n at the quadrature points actually used
fn check_field(mesh: &TriMesh, coeff: &CoefficientField, filter: ElementFilter<'_>) -> Result<()> {
    for e in (0..mesh.element_count()).filter(|&e| filter(e)) {
        let el = mesh.elements()[e];
        for q in 0..3 {
            let a = mesh.nodes()[el[(q + 1) % 3]];
            let b = mesh.nodes()[el[(q + 2) % 3]];
            coeff.check_at([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0])?;
        }
    }
    Ok(())
}

/// Stiffness plus unit mass, the real SPD operator of the shifted source
/// problem.
pub fn assemble_shifted_laplacian(mesh: &TriMesh) -> Result<SparseMatrixC> {
    let k = assemble_stiffness(mesh)?;
    let m = assemble_mass(mesh, &Coefficient::real(1.0))?;
    k.lin_comb(C64::new(1.0, 0.0), &m, C64::new(1.0, 0.0), Symmetry::RealSymmetric)
}

/// Right-hand side vector of a pairing functional against `g`.
pub fn assemble_load(mesh: &Arc<TriMesh>, kind: LoadKind, weight: &Coefficient, g: &FeFunction) -> Result<Vec<C64>> {
    if g.mesh().id() != mesh.id() {
        return Err(Error::invalid("load data lives on a different mesh"));
    }
    let matrix = match kind {
        LoadKind::BoundaryPairing => boundary_pairing_matrix(mesh, &EdgeTag::PHYSICAL, weight, &|_| true)?,
        LoadKind::DomainPairing => assemble_mass(mesh, weight)?,
    };
    Ok(matrix.matvec(g.values()))
}
