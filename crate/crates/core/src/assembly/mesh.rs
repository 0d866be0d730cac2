//! Polygon mesh of the slice `x3 = .. = x_n = 0` of one period, and the
//! combinatorial topology of its quotient by `d_eps`.

use std::collections::HashMap;

use super::GluedHypersurface;

#[derive(Debug, Clone)]
pub struct SliceMesh {
    /// `(x1, x2, x^(n+1))`.
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Vec<usize>>,
    /// Strip closing the period: upper neck ring to the plane ring at `-x*`.
    pub wrap_faces: Vec<Vec<usize>>,
}

/// Both sides of the axis: column `c < m` is node `c` at `x2 = +r`, column
/// `c >= m` is node `2m - 1 - c` at `x2 = -r`.
fn mirrored(c: usize, m: usize) -> (usize, f64) {
    if c < m {
        (c, 1.0)
    } else {
        (2 * m - 1 - c, -1.0)
    }
}

/// Triangulated annulus between two closed polygons, each given with the
/// polar angle of its vertices about its own centre.
fn stitch(a: &[(usize, f64)], b: &[(usize, f64)]) -> Vec<Vec<usize>> {
    let sort = |v: &[(usize, f64)]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| x.1.total_cmp(&y.1));
        v
    };
    let (a, b) = (sort(a), sort(b));
    let (na, nb) = (a.len(), b.len());
    let next = |v: &[(usize, f64)], i: usize| if i + 1 < v.len() { v[i + 1].1 } else { v[0].1 + std::f64::consts::TAU };
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(na + nb);
    while i < na || j < nb {
        if j == nb || (i < na && next(&a, i) <= next(&b, j)) {
            out.push(vec![a[i].0, a[(i + 1) % na].0, b[j % nb].0]);
            i += 1;
        } else {
            out.push(vec![a[i % na].0, b[(j + 1) % nb].0, b[j].0]);
            j += 1;
        }
    }
    out
}

pub fn slice_mesh(s: &GluedHypersurface) -> SliceMesh {
    let n = s.n;
    let (ntau, ns) = s.plane_shape;
    let (nt, m) = s.neck_shape;
    let mut vertices = Vec::with_capacity(2 * (ntau * ns + nt * m));
    let mut push = |p: &[f64], sign: f64| vertices.push([p[0], sign * p[1], p[n]]);
    for i in 0..ntau {
        for c in 0..2 * ns {
            let (k, sg) = mirrored(c, ns);
            push(&s.plane_samples[i * ns + k].point.0, sg);
        }
    }
    let off = ntau * 2 * ns;
    for i in 0..nt {
        for c in 0..2 * m {
            let (k, sg) = mirrored(c, m);
            push(&s.neck_samples[i * m + k].point.0, sg);
        }
    }
    let pv = |i: usize, c: usize| i * 2 * ns + c % (2 * ns);
    let nv = |i: usize, c: usize| off + i * 2 * m + c % (2 * m);
    let mut faces = Vec::new();
    for i in 0..ntau - 1 {
        for c in 0..2 * ns {
            faces.push(vec![pv(i, c), pv(i + 1, c), pv(i + 1, c + 1), pv(i, c + 1)]);
        }
    }
    for i in 0..nt - 1 {
        for c in 0..2 * m {
            faces.push(vec![nv(i, c), nv(i + 1, c), nv(i + 1, c + 1), nv(i, c + 1)]);
        }
    }
    // rings, with angles taken in the unplaced frame about +-x*
    let plane_ring = |centre: f64| -> Vec<(usize, f64)> {
        let g = &s.planar.ubar.grid;
        let i = if g.node(0, 0).0 * centre > 0.0 { 0 } else { ntau - 1 };
        (0..2 * ns)
            .map(|c| {
                let (k, sg) = mirrored(c, ns);
                let (x1, r) = g.node(i, k);
                (pv(i, c), (sg * r).atan2(x1 - centre))
            })
            .collect()
    };
    let neck_ring = |i: usize| -> Vec<(usize, f64)> {
        let th = &s.neck.w_total.grid.theta.nodes;
        (0..2 * m)
            .map(|c| {
                let (k, sg) = mirrored(c, m);
                (nv(i, c), sg * th[k])
            })
            .collect()
    };
    faces.extend(stitch(&plane_ring(1.0), &neck_ring(0)));
    let wrap_faces = stitch(&plane_ring(-1.0), &neck_ring(nt - 1));
    SliceMesh { vertices, faces, wrap_faces }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler: i64,
    pub components: usize,
    pub boundary_edges: usize,
    /// Edges with more than two faces.
    pub singular_edges: usize,
}

impl Topology {
    /// Genus of a closed connected surface, `None` otherwise.
    pub fn tunnels(&self) -> Option<i64> {
        (self.components == 1 && self.boundary_edges == 0 && self.singular_edges == 0 && self.euler % 2 == 0)
            .then_some((2 - self.euler) / 2)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

pub fn topology(nv: usize, faces: &[Vec<usize>]) -> Topology {
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let mut parent: Vec<usize> = (0..nv).collect();
    for f in faces {
        for q in 0..f.len() {
            let (a, b) = (f[q], f[(q + 1) % f.len()]);
            *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let components = (0..nv).filter(|&v| find(&mut parent, v) == v).count();
    Topology {
        vertices: nv,
        edges: edges.len(),
        faces: faces.len(),
        euler: nv as i64 - edges.len() as i64 + faces.len() as i64,
        components,
        boundary_edges: edges.values().filter(|&&c| c == 1).count(),
        singular_edges: edges.values().filter(|&&c| c > 2).count(),
    }
}

impl SliceMesh {
    /// Topology of the period with the wrap strip identifying its two ends.
    pub fn quotient_topology(&self) -> Topology {
        let all: Vec<Vec<usize>> = self.faces.iter().chain(&self.wrap_faces).cloned().collect();
        topology(self.vertices.len(), &all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(start: usize, len: usize, phase: f64) -> Vec<(usize, f64)> {
        (0..len).map(|c| (start + c, -3.0 + phase + 6.0 * c as f64 / len as f64)).collect()
    }

    #[test]
    fn stitched_tube_is_an_annulus() {
        let faces = stitch(&ring(0, 7, 0.1), &ring(7, 5, 0.0));
        assert_eq!(faces.len(), 12);
        let t = topology(12, &faces);
        assert_eq!((t.euler, t.components, t.boundary_edges, t.singular_edges), (0, 1, 12, 0));
    }

    #[test]
    fn torus_from_a_grid_has_one_tunnel() {
        let (a, b) = (6, 5);
        let v = |i: usize, j: usize| (i % a) * b + j % b;
        let faces: Vec<Vec<usize>> =
            (0..a).flat_map(|i| (0..b).map(move |j| vec![v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)])).collect();
        assert_eq!(topology(a * b, &faces).tunnels(), Some(1));
        // cutting it open leaves a cylinder
        let open: Vec<Vec<usize>> = faces.into_iter().filter(|f| f[0] / b != a - 1).collect();
        assert_eq!(topology(a * b, &open).tunnels(), None);
    }
}
