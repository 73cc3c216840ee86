use std::collections::HashMap;
use std::sync::Arc;

use super::{edge_key, BoundaryEdge, NodeOrigin, Provenance, TriMesh};
use crate::error::{Error, Result};

/// Splits every triangle into four congruent children through its edge
/// midpoints.
///
/// Parent nodes keep their indices; midpoints follow in order of first use
/// while scanning elements. Boundary tags are inherited, and because the two
/// sides of a slit are distinct edges their midpoints are distinct nodes.
pub fn refine_red(mesh: &Arc<TriMesh>) -> Result<TriMesh> {
    let parent = mesh.as_ref();
    let n_edges_est = parent.node_count() + parent.element_count() + 1;
    let total = parent
        .node_count()
        .checked_add(n_edges_est)
        .filter(|&c| c <= u32::MAX as usize)
        .ok_or_else(|| Error::Capacity("refined node count overflows the node index".into()))?;

    let mut nodes = Vec::with_capacity(total);
    nodes.extend_from_slice(parent.nodes());
    let mut origin: Vec<NodeOrigin> = (0..parent.node_count()).map(NodeOrigin::Node).collect();
    origin.reserve(n_edges_est);
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::with_capacity(n_edges_est);

    let mut mid = |a: usize, b: usize, nodes: &mut Vec<[f64; 2]>, origin: &mut Vec<NodeOrigin>| {
        *midpoint.entry(edge_key(a, b)).or_insert_with(|| {
            let (pa, pb) = (nodes[a], nodes[b]);
            nodes.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            origin.push(NodeOrigin::Midpoint(a, b));
            nodes.len() - 1
        })
    };

    let mut elements = Vec::with_capacity(4 * parent.element_count());
    let mut child_of = Vec::with_capacity(parent.element_count());
    for &[a, b, c] in parent.elements() {
        let ab = mid(a, b, &mut nodes, &mut origin);
        let bc = mid(b, c, &mut nodes, &mut origin);
        let ca = mid(c, a, &mut nodes, &mut origin);
        child_of.push(elements.len());
        elements.push([a, ab, ca]);
        elements.push([ab, b, bc]);
        elements.push([ca, bc, c]);
        elements.push([ab, bc, ca]);
    }

    let mut boundary_edges = Vec::with_capacity(2 * parent.boundary_edges().len());
    for edge in parent.boundary_edges() {
        let [a, b] = edge.nodes;
        let m = mid(a, b, &mut nodes, &mut origin);
        let el = parent.elements()[edge.element];
        // children are ordered (corner a, corner b, corner c, centre), so the
        // local index of an edge endpoint selects the child holding that half
        let k = el.iter().position(|&v| v == a).expect("edge vertex in owner");
        let base = child_of[edge.element];
        boundary_edges.push(BoundaryEdge {
            nodes: [a, m],
            tag: edge.tag,
            element: base + k,
        });
        let kb = el.iter().position(|&v| v == b).expect("edge vertex in owner");
        boundary_edges.push(BoundaryEdge {
            nodes: [m, b],
            tag: edge.tag,
            element: base + kb,
        });
    }

    Ok(TriMesh::from_parts(
        parent.domain().copied(),
        nodes,
        elements,
        boundary_edges,
        0.5 * parent.spacing(),
        Some(Provenance {
            parent: Arc::clone(mesh),
            origin,
        }),
    ))
}

/// Refines `levels` times, returning every intermediate mesh (finest last).
pub fn refine_levels(mesh: &Arc<TriMesh>, levels: usize) -> Result<Vec<Arc<TriMesh>>> {
    let mut out: Vec<Arc<TriMesh>> = Vec::with_capacity(levels);
    let mut current = Arc::clone(mesh);
    for _ in 0..levels {
        current = Arc::new(refine_red(&current)?);
        out.push(Arc::clone(&current));
    }
    Ok(out)
}
