use super::{single_edges, BoundaryEdge, DomainKind, DomainSpec, EdgeTag, TriMesh, GEOM_TOL};
use crate::error::{Error, Result};

/// Uniform `n_intervals × n_intervals` grid over the bounding box, every cell
/// split along its lower-right to upper-left diagonal.
///
/// Nodes are numbered lexicographically by `(y, x)`. On the slit domain the
/// nodes on `{0 < x ≤ √2/2, y = 0}` are duplicated: the primary copy belongs
/// to the upper side and the lower-side copies are appended after the primary
/// block. The slit tip is shared.
///
/// The L-shape and slit domains need `n_intervals` divisible by 4 so that the
/// re-entrant corner, the slit and the local regions fall on mesh lines.
pub fn build_structured_mesh(domain: DomainSpec, n_intervals: usize) -> Result<TriMesh> {
    let needs_alignment = domain.kind != DomainKind::Square;
    if n_intervals == 0 || (needs_alignment && !n_intervals.is_multiple_of(4)) {
        return Err(Error::invalid(format!(
            "n_intervals must be a positive multiple of 4 on the {} domain, got {n_intervals}",
            domain.kind
        )));
    }
    let n = n_intervals;
    let per_side = n
        .checked_add(1)
        .and_then(|m| m.checked_mul(m))
        .filter(|&c| c <= u32::MAX as usize)
        .ok_or_else(|| Error::Capacity(format!("{n} intervals per side overflow the node index")))?;
    let half = n / 2;
    let (x0, x1) = domain.x_range;
    let (y0, y1) = domain.y_range;
    let coord = |lo: f64, hi: f64, i: usize| {
        if i == n {
            hi
        } else {
            lo + (hi - lo) * (i as f64) / (n as f64)
        }
    };
    let keep = |i: usize, j: usize| match domain.kind {
        DomainKind::LShape => !(i > half && j < half),
        _ => true,
    };

    let mut grid = vec![usize::MAX; per_side];
    let mut nodes = Vec::with_capacity(per_side + half);
    for j in 0..=n {
        for i in 0..=n {
            if keep(i, j) {
                grid[j * (n + 1) + i] = nodes.len();
                nodes.push([coord(x0, x1, i), coord(y0, y1, j)]);
            }
        }
    }
    // lower-side copies of the slit nodes, indexed by i - half - 1
    let mut slit_bottom = Vec::new();
    if domain.kind == DomainKind::Slit {
        for i in half + 1..=n {
            slit_bottom.push(nodes.len());
            nodes.push([coord(x0, x1, i), coord(y0, y1, half)]);
        }
    }

    let node_at = |i: usize, j: usize, below_slit: bool| -> usize {
        if below_slit && j == half && i > half {
            slit_bottom[i - half - 1]
        } else {
            grid[j * (n + 1) + i]
        }
    };

    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            if domain.kind == DomainKind::LShape && i >= half && j < half {
                continue;
            }
            let below = domain.kind == DomainKind::Slit && j + 1 == half && i >= half;
            let ll = node_at(i, j, below);
            let lr = node_at(i + 1, j, below);
            let ur = node_at(i + 1, j + 1, below);
            let ul = node_at(i, j + 1, below);
            elements.push([ll, lr, ul]);
            elements.push([lr, ur, ul]);
        }
    }

    let spacing = domain.side() / n as f64;
    let tol = GEOM_TOL * spacing;
    let boundary_edges = single_edges(&elements)
        .into_iter()
        .map(|(pair, e)| {
            let [a, b] = pair.map(|v| nodes[v]);
            let on_slit =
                domain.kind == DomainKind::Slit && a[1].abs() < tol && b[1].abs() < tol && a[0] > -tol && b[0] > -tol;
            let tag = if on_slit {
                let c = super::centroid(&nodes, &elements[e]);
                if c[1] > 0.0 {
                    EdgeTag::SlitTop
                } else {
                    EdgeTag::SlitBottom
                }
            } else {
                EdgeTag::Outer
            };
            BoundaryEdge {
                nodes: pair,
                tag,
                element: e,
            }
        })
        .collect();

    Ok(TriMesh::from_parts(
        Some(domain),
        nodes,
        elements,
        boundary_edges,
        spacing,
        None,
    ))
}
