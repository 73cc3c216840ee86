//! Structured triangulations of the test domains.
//!
//! Meshes are immutable once built. Refinement and submesh extraction produce
//! new meshes that keep a reference to their parent together with the origin
//! of every node, so coarse functions can be interpolated onto any descendant.

mod build;
mod domain;
mod function;
mod io;
mod refine;
mod submesh;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use build::build_structured_mesh;
pub use domain::{DomainKind, DomainSpec, RegionRole, RegionSpec};
pub use function::{prolongate, FeFunction};
pub use io::{read_mesh, write_mesh};
pub use refine::{refine_levels, refine_red};
pub use submesh::extract_submesh;

use crate::error::{Error, Result};

/// Geometric tolerance relative to the mesh spacing.
pub(crate) const GEOM_TOL: f64 = 1e-9;

/// Tag carried by every boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeTag {
    Outer,
    SlitTop,
    SlitBottom,
    /// Artificial boundary `∂Ω₀ \ ∂Ω` of a local submesh.
    Gamma,
}

impl EdgeTag {
    /// Tags that belong to the physical boundary `∂Ω`.
    pub const PHYSICAL: [EdgeTag; 3] = [EdgeTag::Outer, EdgeTag::SlitTop, EdgeTag::SlitBottom];

    pub fn is_physical(self) -> bool {
        self != EdgeTag::Gamma
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeTag::Outer => "outer",
            EdgeTag::SlitTop => "slit_top",
            EdgeTag::SlitBottom => "slit_bottom",
            EdgeTag::Gamma => "gamma",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "outer" => Some(EdgeTag::Outer),
            "slit_top" => Some(EdgeTag::SlitTop),
            "slit_bottom" => Some(EdgeTag::SlitBottom),
            "gamma" => Some(EdgeTag::Gamma),
            _ => None,
        }
    }
}

/// A boundary edge, oriented as it appears in its (unique) owning element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: EdgeTag,
    pub element: usize,
}

/// Where a node of a derived mesh comes from in its parent mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOrigin {
    /// Copy of a parent node.
    Node(usize),
    /// Midpoint of the parent edge `(a, b)`.
    Midpoint(usize, usize),
}

/// Link from a derived mesh back to the mesh it was derived from.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub parent: Arc<TriMesh>,
    pub origin: Vec<NodeOrigin>,
}

/// Per-element membership in the default local regions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ElementFlags {
    pub in_omega0: bool,
    pub in_d: bool,
}

/// Conforming P1 triangulation.
#[derive(Debug, Clone)]
pub struct TriMesh {
    id: u64,
    domain: Option<DomainSpec>,
    nodes: Vec<[f64; 2]>,
    elements: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    spacing: f64,
    provenance: Option<Provenance>,
    element_flags: Vec<ElementFlags>,
    free_dofs: Vec<bool>,
}

/// Summary counts of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub node_count: usize,
    pub element_count: usize,
    pub boundary_length: f64,
    pub area: f64,
    pub constrained_dof_count: usize,
}

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

impl TriMesh {
    /// Assembles a mesh from its parts and derives the element flags and the
    /// free-dof mask. No validation is performed here; see [`TriMesh::validate`].
    pub(crate) fn from_parts(
        domain: Option<DomainSpec>,
        nodes: Vec<[f64; 2]>,
        elements: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        spacing: f64,
        provenance: Option<Provenance>,
    ) -> Self {
        let regions = domain.map(|d| (d.default_local_region(), d.default_inner_region()));
        let tol = GEOM_TOL * spacing;
        let element_flags = elements
            .iter()
            .map(|el| {
                let c = centroid(&nodes, el);
                match regions {
                    Some((omega0, d)) => ElementFlags {
                        in_omega0: omega0.is_some_and(|r| r.contains(c, tol)),
                        in_d: d.is_some_and(|r| r.contains(c, tol)),
                    },
                    None => ElementFlags::default(),
                }
            })
            .collect();
        let mut free_dofs = vec![true; nodes.len()];
        for edge in boundary_edges.iter().filter(|e| e.tag == EdgeTag::Gamma) {
            free_dofs[edge.nodes[0]] = false;
            free_dofs[edge.nodes[1]] = false;
        }
        Self {
            id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
            domain,
            nodes,
            elements,
            boundary_edges,
            spacing,
            provenance,
            element_flags,
            free_dofs,
        }
    }

    /// Process-unique identifier, used to match functions to meshes.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn domain(&self) -> Option<&DomainSpec> {
        self.domain.as_ref()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Nominal leg length of the right triangles.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn element_flags(&self) -> &[ElementFlags] {
        &self.element_flags
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    /// `true` for nodes that are degrees of freedom of `V_h^0`, `false` for
    /// nodes on Gamma edges.
    pub fn free_dof_mask(&self) -> &[bool] {
        &self.free_dofs
    }

    pub fn free_dof_count(&self) -> usize {
        self.free_dofs.iter().filter(|&&f| f).count()
    }

    /// Signed area of element `e` (positive for counter-clockwise vertices).
    pub fn element_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.elements[e];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn element_centroid(&self, e: usize) -> [f64; 2] {
        centroid(&self.nodes, &self.elements[e])
    }

    pub fn edge_length(&self, edge: &BoundaryEdge) -> f64 {
        let [a, b] = edge.nodes;
        dist(self.nodes[a], self.nodes[b])
    }

    /// Indices of the nodes touched by boundary edges with one of `tags`.
    pub fn nodes_on(&self, tags: &[EdgeTag]) -> Vec<usize> {
        let mut marked = vec![false; self.nodes.len()];
        for e in self.boundary_edges.iter().filter(|e| tags.contains(&e.tag)) {
            marked[e.nodes[0]] = true;
            marked[e.nodes[1]] = true;
        }
        (0..self.nodes.len()).filter(|&i| marked[i]).collect()
    }

    /// Checks the structural invariants: positive areas, every edge shared by
    /// at most two elements, boundary edges exactly the edges used once.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        for (e, el) in self.elements.iter().enumerate() {
            if el.iter().any(|&v| v >= n) {
                return Err(Error::invalid(format!("element {e} references a missing node")));
            }
            if self.element_area(e) <= 0.0 {
                return Err(Error::invalid(format!("element {e} has non-positive area")));
            }
        }
        let mut uses: HashMap<(usize, usize), u32> = HashMap::with_capacity(3 * self.elements.len());
        for el in &self.elements {
            for k in 0..3 {
                *uses.entry(edge_key(el[k], el[(k + 1) % 3])).or_default() += 1;
            }
        }
        if let Some((&(a, b), _)) = uses.iter().find(|(_, &c)| c > 2) {
            return Err(Error::invalid(format!(
                "edge ({a}, {b}) shared by more than two elements"
            )));
        }
        let single = uses.values().filter(|&&c| c == 1).count();
        if single != self.boundary_edges.len() {
            return Err(Error::invalid(format!(
                "{} boundary edges recorded but {} edges are used once",
                self.boundary_edges.len(),
                single
            )));
        }
        for edge in &self.boundary_edges {
            if uses.get(&edge_key(edge.nodes[0], edge.nodes[1])) != Some(&1) {
                return Err(Error::invalid(format!("boundary edge {:?} is interior", edge.nodes)));
            }
        }
        Ok(())
    }

    /// Summary counts.
    pub fn stats(&self) -> MeshStats {
        mesh_stats(self)
    }
}

/// Node/element counts, boundary length (slit sides counted separately),
/// area and number of constrained nodes.
pub fn mesh_stats(mesh: &TriMesh) -> MeshStats {
    let area = (0..mesh.element_count()).map(|e| mesh.element_area(e)).sum();
    let boundary_length = mesh.boundary_edges.iter().map(|e| mesh.edge_length(e)).sum();
    MeshStats {
        node_count: mesh.node_count(),
        element_count: mesh.element_count(),
        boundary_length,
        area,
        constrained_dof_count: mesh.node_count() - mesh.free_dof_count(),
    }
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub(crate) fn centroid(nodes: &[[f64; 2]], el: &[usize; 3]) -> [f64; 2] {
    let [a, b, c] = el.map(|i| nodes[i]);
    [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Edges used by exactly one element, oriented as in that element, in
/// element order.
pub(crate) fn single_edges(elements: &[[usize; 3]]) -> Vec<([usize; 2], usize)> {
    let mut uses: HashMap<(usize, usize), u32> = HashMap::with_capacity(3 * elements.len());
    for el in elements {
        for k in 0..3 {
            *uses.entry(edge_key(el[k], el[(k + 1) % 3])).or_default() += 1;
        }
    }
    let mut out = Vec::new();
    for (e, el) in elements.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (el[k], el[(k + 1) % 3]);
            if uses[&edge_key(a, b)] == 1 {
                out.push(([a, b], e));
            }
        }
    }
    out
}
