use std::collections::HashMap;

use super::{key, BoundaryLabel, Mesh, Point};

fn midpoint(p: Point, q: Point) -> Point {
    [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
}

/// Boundary labels for the refined mesh: split edges hand their label to both halves.
fn split_labels(mesh: &Mesh, mid: &HashMap<usize, usize>) -> HashMap<(usize, usize), BoundaryLabel> {
    let mut labels = HashMap::new();
    for (id, e) in mesh.edges().iter().enumerate() {
        let Some(l) = e.boundary else { continue };
        let [a, b] = e.vertices;
        match mid.get(&id) {
            Some(&m) => {
                labels.insert(key(a, m), l);
                labels.insert(key(m, b), l);
            }
            None => {
                labels.insert(key(a, b), l);
            }
        }
    }
    labels
}

/// Red refinement. Midpoint of edge `e` becomes vertex `nv + e`; children of
/// triangle `k` are `4k .. 4k+3`, the last one being the middle triangle.
pub(super) fn red(mesh: &Mesh) -> Mesh {
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices().to_vec();
    let mut mid = HashMap::with_capacity(mesh.num_edges());
    for e in 0..mesh.num_edges() {
        let (a, b) = mesh.edge_points(e);
        vertices.push(midpoint(a, b));
        mid.insert(e, nv + e);
    }
    let mut triangles = Vec::with_capacity(4 * mesh.num_triangles());
    for (k, t) in mesh.triangles().iter().enumerate() {
        let te = mesh.triangle_edges(k);
        let (m12, m02, m01) = (nv + te[0], nv + te[1], nv + te[2]);
        triangles.push([t[0], m01, m02]);
        triangles.push([m01, t[1], m12]);
        triangles.push([m02, m12, t[2]]);
        triangles.push([m12, m02, m01]);
    }
    let labels = split_labels(mesh, &mid);
    Mesh::new(vertices, triangles, &labels, mesh.level() + 1).expect("red refinement keeps validity")
}

/// Newest-vertex bisection. The refinement edge of `[a, b, c]` is `bc`; the
/// children are `[m, a, b]` and `[m, c, a]`, each bisected again when its own
/// refinement edge was marked during closure.
pub(super) fn bisect_marked(mesh: &Mesh, marked: &[usize]) -> Mesh {
    if marked.is_empty() {
        return mesh.clone();
    }
    let mut edge_marked = vec![false; mesh.num_edges()];
    for &k in marked {
        edge_marked[mesh.triangle_edges(k)[0]] = true;
    }
    // closure: a triangle with any marked edge must also split its refinement edge
    loop {
        let mut changed = false;
        for k in 0..mesh.num_triangles() {
            let te = mesh.triangle_edges(k);
            if !edge_marked[te[0]] && (edge_marked[te[1]] || edge_marked[te[2]]) {
                edge_marked[te[0]] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut vertices = mesh.vertices().to_vec();
    let mut mid = HashMap::new();
    let mut by_pair = HashMap::new();
    for (e, &m) in edge_marked.iter().enumerate() {
        if m {
            let (a, b) = mesh.edge_points(e);
            vertices.push(midpoint(a, b));
            mid.insert(e, vertices.len() - 1);
            let [va, vb] = mesh.edges()[e].vertices;
            by_pair.insert(key(va, vb), vertices.len() - 1);
        }
    }

    fn split(t: [usize; 3], by_pair: &HashMap<(usize, usize), usize>, out: &mut Vec<[usize; 3]>) {
        match by_pair.get(&key(t[1], t[2])) {
            Some(&m) => {
                split([m, t[0], t[1]], by_pair, out);
                split([m, t[2], t[0]], by_pair, out);
            }
            None => out.push(t),
        }
    }

    let mut triangles = Vec::with_capacity(mesh.num_triangles() + 2 * mid.len());
    for t in mesh.triangles() {
        split(*t, &by_pair, &mut triangles);
    }
    let labels = split_labels(mesh, &mid);
    Mesh::new(vertices, triangles, &labels, mesh.level() + 1).expect("bisection keeps validity")
}
