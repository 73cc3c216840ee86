use std::collections::HashMap;
use std::sync::Arc;

use super::{edge_key, single_edges, BoundaryEdge, EdgeTag, NodeOrigin, Provenance, RegionSpec, TriMesh, GEOM_TOL};
use crate::error::{Error, Result};

/// Mesh of the elements of `mesh` lying in `region`.
///
/// Edges on the physical boundary keep their tags; the remaining new boundary
/// edges are tagged [`EdgeTag::Gamma`] and their nodes are excluded from the
/// free-dof mask. The provenance of the result maps every node to its parent.
pub fn extract_submesh(mesh: &Arc<TriMesh>, region: &RegionSpec) -> Result<TriMesh> {
    let parent = mesh.as_ref();
    let tol = GEOM_TOL * parent.spacing();
    let mut selected = Vec::new();
    for (e, el) in parent.elements().iter().enumerate() {
        let inside = region.contains(parent.element_centroid(e), tol);
        let verts = el.map(|v| parent.nodes()[v]);
        let aligned = if inside {
            verts.iter().all(|&p| region.contains(p, tol))
        } else {
            verts.iter().all(|&p| !region.contains_strictly(p, tol))
        };
        if !aligned {
            return Err(Error::invalid(format!(
                "region {:?} ± {} is not aligned with the mesh lines (element {e})",
                region.center, region.half_side
            )));
        }
        if inside {
            selected.push(e);
        }
    }
    if selected.is_empty() {
        return Err(Error::invalid("region contains no elements"));
    }

    let mut local = vec![usize::MAX; parent.node_count()];
    for &e in &selected {
        for v in parent.elements()[e] {
            local[v] = 0;
        }
    }
    let mut origin = Vec::new();
    let mut nodes = Vec::new();
    for (v, slot) in local.iter_mut().enumerate() {
        if *slot == 0 {
            *slot = nodes.len();
            nodes.push(parent.nodes()[v]);
            origin.push(NodeOrigin::Node(v));
        }
    }
    let elements: Vec<[usize; 3]> = selected
        .iter()
        .map(|&e| parent.elements()[e].map(|v| local[v]))
        .collect();

    let parent_tags: HashMap<(usize, usize), EdgeTag> = parent
        .boundary_edges()
        .iter()
        .map(|e| (edge_key(local[e.nodes[0]], local[e.nodes[1]]), e.tag))
        .filter(|((a, b), _)| *a != usize::MAX && *b != usize::MAX)
        .collect();
    let boundary_edges = single_edges(&elements)
        .into_iter()
        .map(|(pair, element)| BoundaryEdge {
            nodes: pair,
            tag: parent_tags
                .get(&edge_key(pair[0], pair[1]))
                .copied()
                .unwrap_or(EdgeTag::Gamma),
            element,
        })
        .collect();

    Ok(TriMesh::from_parts(
        parent.domain().copied(),
        nodes,
        elements,
        boundary_edges,
        parent.spacing(),
        Some(Provenance {
            parent: Arc::clone(mesh),
            origin,
        }),
    ))
}
