use std::io::{BufRead, Write};

use super::{single_edges, BoundaryEdge, EdgeTag, TriMesh};
use crate::error::{Error, Result};

/// Writes the plain-text mesh format: a header `V T B` with the node,
/// element and boundary-edge counts, then `x y` per node, `i j k` per element
/// and `i j tag` per boundary edge.
pub fn write_mesh<W: Write>(mesh: &TriMesh, mut out: W) -> Result<()> {
    writeln!(
        out,
        "{} {} {}",
        mesh.node_count(),
        mesh.element_count(),
        mesh.boundary_edges().len()
    )?;
    for p in mesh.nodes() {
        writeln!(out, "{:e} {:e}", p[0], p[1])?;
    }
    for el in mesh.elements() {
        writeln!(out, "{} {} {}", el[0], el[1], el[2])?;
    }
    for e in mesh.boundary_edges() {
        writeln!(out, "{} {} {}", e.nodes[0], e.nodes[1], e.tag.name())?;
    }
    Ok(())
}

/// Reads a mesh written by [`write_mesh`]. The result has no domain or
/// provenance; its spacing is the shortest element leg.
pub fn read_mesh<R: BufRead>(input: R) -> Result<TriMesh> {
    let mut lines = input.lines();
    let mut next = || -> Result<Vec<String>> {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse("unexpected end of mesh file".into()))??;
        Ok(line.split_whitespace().map(str::to_owned).collect())
    };
    let parse = |s: &str| -> Result<usize> { s.parse().map_err(|_| Error::Parse(format!("bad integer '{s}'"))) };
    let header = next()?;
    if header.len() != 3 {
        return Err(Error::Parse("header must hold three counts".into()));
    }
    let (nv, nt, nb) = (parse(&header[0])?, parse(&header[1])?, parse(&header[2])?);

    let mut nodes = Vec::with_capacity(nv);
    for _ in 0..nv {
        let t = next()?;
        if t.len() != 2 {
            return Err(Error::Parse("node line must hold two coordinates".into()));
        }
        let c = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad coordinate '{s}'")))
        };
        nodes.push([c(&t[0])?, c(&t[1])?]);
    }
    let mut elements = Vec::with_capacity(nt);
    for _ in 0..nt {
        let t = next()?;
        if t.len() != 3 {
            return Err(Error::Parse("element line must hold three indices".into()));
        }
        let el = [parse(&t[0])?, parse(&t[1])?, parse(&t[2])?];
        if el.iter().any(|&v| v >= nv) {
            return Err(Error::Parse(format!("element {el:?} references a missing node")));
        }
        elements.push(el);
    }
    let owners: std::collections::HashMap<(usize, usize), usize> = single_edges(&elements)
        .into_iter()
        .map(|(p, e)| (super::edge_key(p[0], p[1]), e))
        .collect();
    let mut boundary_edges = Vec::with_capacity(nb);
    for _ in 0..nb {
        let t = next()?;
        if t.len() != 3 {
            return Err(Error::Parse("boundary line must hold two indices and a tag".into()));
        }
        let nodes_pair = [parse(&t[0])?, parse(&t[1])?];
        let tag = EdgeTag::from_name(&t[2]).ok_or_else(|| Error::Parse(format!("unknown tag '{}'", t[2])))?;
        let element = *owners
            .get(&super::edge_key(nodes_pair[0], nodes_pair[1]))
            .ok_or_else(|| Error::Parse(format!("edge {nodes_pair:?} is not on the boundary")))?;
        boundary_edges.push(BoundaryEdge {
            nodes: nodes_pair,
            tag,
            element,
        });
    }
    let spacing = elements
        .iter()
        .flat_map(|el| (0..3).map(move |k| (el[k], el[(k + 1) % 3])))
        .map(|(a, b)| (nodes[a][0] - nodes[b][0]).hypot(nodes[a][1] - nodes[b][1]))
        .fold(f64::INFINITY, f64::min);
    let mesh = TriMesh::from_parts(None, nodes, elements, boundary_edges, spacing, None);
    mesh.validate()?;
    Ok(mesh)
}
