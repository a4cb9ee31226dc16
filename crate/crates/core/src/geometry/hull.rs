//! 3-D convex hull via quickhull with conflict lists and face adjacency.
//!
//! Visibility culling flips a few thousand points per chirp and asks which of
//! them land on the hull, so this implementation keeps per-apex work local:
//! the visible set is grown by DFS over face adjacency instead of scanning
//! every face.

use glam::DVec3;
use std::collections::HashMap;

#[derive(Debug, Clone)]
struct Face {
    verts: [u32; 3],
    normal: DVec3,
    offset: f64,
    /// Neighbor face across edge k = (verts[k], verts[k+1 mod 3]).
    adjacent: [u32; 3],
    /// Conflict list: input points strictly outside this face.
    outside: Vec<u32>,
    furthest: u32,
    furthest_dist: f64,
    alive: bool,
}

impl Face {
    fn distance(&self, p: DVec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

const NO_FACE: u32 = u32::MAX;

/// Indices of the input points that are vertices of the convex hull, sorted
/// ascending. Returns `None` for degenerate input: fewer than 4 points, or
/// all points collinear/coplanar within tolerance.
pub fn convex_hull_indices(points: &[DVec3]) -> Option<Vec<usize>> {
    if points.len() < 4 {
        return None;
    }

    // Tolerance scaled by the data extents (qhull-style).
    let mut max_abs = DVec3::ZERO;
    for p in points {
        max_abs = max_abs.max(p.abs());
    }
    let eps = 3.0 * (max_abs.x + max_abs.y + max_abs.z).max(1e-300) * f64::EPSILON;

    let simplex = initial_simplex(points, eps)?;
    let mut hull = HullBuilder::new(points, eps, simplex);
    hull.run();
    Some(hull.vertex_indices())
}

/// Pick four non-coplanar points spanning the cloud: the two most separated
/// axis extremes, the point furthest from their line, and the point furthest
/// from that plane.
fn initial_simplex(points: &[DVec3], eps: f64) -> Option<[u32; 4]> {
    let mut min_idx = [0usize; 3];
    let mut max_idx = [0usize; 3];
    for (i, p) in points.iter().enumerate() {
        let arr = p.to_array();
        for axis in 0..3 {
            if arr[axis] < points[min_idx[axis]].to_array()[axis] {
                min_idx[axis] = i;
            }
            if arr[axis] > points[max_idx[axis]].to_array()[axis] {
                max_idx[axis] = i;
            }
        }
    }
    let (mut p0, mut p1, mut best) = (min_idx[0], max_idx[0], -1.0);
    for axis in 0..3 {
        let d = (points[max_idx[axis]] - points[min_idx[axis]]).length_squared();
        if d > best {
            best = d;
            p0 = min_idx[axis];
            p1 = max_idx[axis];
        }
    }
    if best.sqrt() <= eps {
        return None; // all points coincident
    }

    let dir = (points[p1] - points[p0]).normalize();
    let (mut p2, mut best) = (usize::MAX, eps);
    for (i, p) in points.iter().enumerate() {
        let v = *p - points[p0];
        let d = (v - dir * v.dot(dir)).length();
        if d > best {
            best = d;
            p2 = i;
        }
    }
    if p2 == usize::MAX {
        return None; // collinear
    }

    let normal = (points[p1] - points[p0])
        .cross(points[p2] - points[p0])
        .normalize();
    let (mut p3, mut best) = (usize::MAX, eps);
    for (i, p) in points.iter().enumerate() {
        let d = (normal.dot(*p - points[p0])).abs();
        if d > best {
            best = d;
            p3 = i;
        }
    }
    if p3 == usize::MAX {
        return None; // coplanar
    }
    Some([p0 as u32, p1 as u32, p2 as u32, p3 as u32])
}

struct HullBuilder<'a> {
    points: &'a [DVec3],
    eps: f64,
    faces: Vec<Face>,
    work: Vec<u32>,
    interior: DVec3,
}

impl<'a> HullBuilder<'a> {
    fn new(points: &'a [DVec3], eps: f64, simplex: [u32; 4]) -> Self {
        let [a, b, c, d] = simplex;
        let interior = (points[a as usize]
            + points[b as usize]
            + points[c as usize]
            + points[d as usize])
            / 4.0;
        let mut builder = Self {
            points,
            eps,
            faces: Vec::with_capacity(points.len()),
            work: Vec::new(),
            interior,
        };
        // Tetrahedron faces, each wound so the normal points away from the
        // interior; adjacency filled by scanning shared edges.
        for tri in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
            builder.push_face(tri);
        }
        for i in 0..4 {
            for k in 0..3 {
                if builder.faces[i].adjacent[k] == NO_FACE {
                    let (va, vb) = builder.edge(i, k);
                    for j in 0..4 {
                        if i == j {
                            continue;
                        }
                        for m in 0..3 {
                            let (wa, wb) = builder.edge(j, m);
                            if (va, vb) == (wb, wa) {
                                builder.faces[i].adjacent[k] = j as u32;
                                builder.faces[j].adjacent[m] = i as u32;
                            }
                        }
                    }
                }
            }
        }

        // Initial conflict assignment.
        let simplex_set = simplex;
        for (i, p) in points.iter().enumerate() {
            if simplex_set.contains(&(i as u32)) {
                continue;
            }
            builder.assign_point(i as u32, *p, 0..4);
        }
        for f in 0..4u32 {
            if !builder.faces[f as usize].outside.is_empty() {
                builder.work.push(f);
            }
        }
        builder
    }

    fn edge(&self, face: usize, k: usize) -> (u32, u32) {
        let v = self.faces[face].verts;
        (v[k], v[(k + 1) % 3])
    }

    fn push_face(&mut self, mut verts: [u32; 3]) -> u32 {
        let a = self.points[verts[0] as usize];
        let b = self.points[verts[1] as usize];
        let c = self.points[verts[2] as usize];
        let mut normal = (b - a).cross(c - a);
        let len = normal.length();
        if len > 0.0 {
            normal /= len;
        }
        // Orient away from the hull interior.
        if normal.dot(a - self.interior) < 0.0 {
            verts.swap(1, 2);
            normal = -normal;
        }
        let offset = normal.dot(self.points[verts[0] as usize]);
        self.faces.push(Face {
            verts,
            normal,
            offset,
            adjacent: [NO_FACE; 3],
            outside: Vec::new(),
            furthest: 0,
            furthest_dist: 0.0,
            alive: true,
        });
        (self.faces.len() - 1) as u32
    }

    fn assign_point(&mut self, idx: u32, p: DVec3, faces: std::ops::Range<usize>) {
        for f in faces {
            if !self.faces[f].alive {
                continue;
            }
            let d = self.faces[f].distance(p);
            if d > self.eps {
                let face = &mut self.faces[f];
                face.outside.push(idx);
                if d > face.furthest_dist {
                    face.furthest_dist = d;
                    face.furthest = idx;
                }
                return;
            }
        }
        // Inside every candidate face: interior point, dropped.
    }

    fn run(&mut self) {
        while let Some(face_idx) = self.work.pop() {
            let face = &self.faces[face_idx as usize];
            if !face.alive || face.outside.is_empty() {
                continue;
            }
            let apex_idx = face.furthest;
            let apex = self.points[apex_idx as usize];

            // Grow the visible region by DFS over adjacency.
            let mut visible: Vec<u32> = vec![face_idx];
            let mut stack = vec![face_idx];
            self.faces[face_idx as usize].alive = false;
            // Horizon edges as (from_vertex, to_vertex, hidden_neighbor).
            let mut horizon: Vec<(u32, u32, u32)> = Vec::new();
            while let Some(f) = stack.pop() {
                for k in 0..3 {
                    let n = self.faces[f as usize].adjacent[k];
                    debug_assert_ne!(n, NO_FACE);
                    if !self.faces[n as usize].alive {
                        continue;
                    }
                    if self.faces[n as usize].distance(apex) > self.eps {
                        self.faces[n as usize].alive = false;
                        visible.push(n);
                        stack.push(n);
                    } else {
                        let (va, vb) = self.edge(f as usize, k);
                        horizon.push((va, vb, n));
                    }
                }
            }

            // New cone of faces from the horizon to the apex.
            let first_new = self.faces.len();
            let mut cone: Vec<(u32, u32, u32, u32)> = Vec::with_capacity(horizon.len());
            // Each horizon vertex belongs to exactly two horizon edges, so
            // collecting (vertex -> cone faces) resolves apex-edge twins
            // regardless of how push_face wound the triangle.
            let mut vertex_faces: HashMap<u32, [u32; 2]> = HashMap::new();
            for &(va, vb, hidden) in &horizon {
                let nf = self.push_face([va, vb, apex_idx]);
                cone.push((va, vb, hidden, nf));
                for x in [va, vb] {
                    let slot = vertex_faces.entry(x).or_insert([NO_FACE; 2]);
                    if slot[0] == NO_FACE {
                        slot[0] = nf;
                    } else {
                        debug_assert_eq!(slot[1], NO_FACE, "pinched horizon vertex");
                        slot[1] = nf;
                    }
                }
            }
            for &(va, vb, hidden, nf) in &cone {
                for m in 0..3 {
                    let (wa, wb) = self.edge(nf as usize, m);
                    let is_horizon_edge =
                        (wa == va && wb == vb) || (wa == vb && wb == va);
                    if is_horizon_edge {
                        self.faces[nf as usize].adjacent[m] = hidden;
                        // Fix the hidden neighbor's slot (it held the deleted
                        // visible face).
                        for hm in 0..3 {
                            let (ha, hb) = self.edge(hidden as usize, hm);
                            if (ha == vb && hb == va) || (ha == va && hb == vb) {
                                self.faces[hidden as usize].adjacent[hm] = nf;
                            }
                        }
                    } else {
                        let x = if wa == apex_idx { wb } else { wa };
                        let pair = vertex_faces[&x];
                        let twin = if pair[0] == nf { pair[1] } else { pair[0] };
                        debug_assert_ne!(twin, NO_FACE, "open horizon loop");
                        self.faces[nf as usize].adjacent[m] = twin;
                    }
                }
            }

            // Redistribute conflict points of the deleted faces.
            let mut orphans: Vec<u32> = Vec::new();
            for &f in &visible {
                orphans.append(&mut self.faces[f as usize].outside);
            }
            orphans.sort_unstable();
            orphans.dedup();
            let new_range = first_new..self.faces.len();
            for idx in orphans {
                if idx == apex_idx {
                    continue;
                }
                self.assign_point(idx, self.points[idx as usize], new_range.clone());
            }
            for f in new_range {
                if !self.faces[f].outside.is_empty() {
                    self.work.push(f as u32);
                }
            }
        }
    }

    fn vertex_indices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .faces
            .iter()
            .filter(|f| f.alive)
            .flat_map(|f| f.verts.iter().map(|&v| v as usize))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}
