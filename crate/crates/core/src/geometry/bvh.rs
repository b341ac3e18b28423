//! Bounding volume hierarchy over a mesh's triangles.

use nalgebra::Vector3;

use super::intersect::{closer, intersect_triangle, to_hit, TriangleHit};
use super::{Hit, Mesh, Ray};

const MAX_LEAF_TRIANGLES: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Vector3<f64>,
    max: Vector3<f64>,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            min: Vector3::repeat(f64::INFINITY),
            max: Vector3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vector3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn merge(&mut self, other: &Aabb) {
        self.min = self.min.inf(&other.min);
        self.max = self.max.sup(&other.max);
    }

    /// Widens the box so rounding in the slab test never culls a boundary hit.
    fn padded(mut self) -> Self {
        let pad = (self.max - self.min).amax() * 1e-9 + 1e-12;
        self.min.add_scalar_mut(-pad);
        self.max.add_scalar_mut(pad);
        self
    }

    /// Entry distance along the ray, or `None` when the box lies outside `(0, t_max]`.
    #[inline]
    fn entry(&self, origin: &Vector3<f64>, inv_dir: &Vector3<f64>, t_max: f64) -> Option<f64> {
        let mut lo = 0.0f64;
        let mut hi = t_max;
        for axis in 0..3 {
            let t1 = (self.min[axis] - origin[axis]) * inv_dir[axis];
            let t2 = (self.max[axis] - origin[axis]) * inv_dir[axis];
            // f64::min/max drop NaN, which leaves an on-plane axis unconstrained.
            lo = lo.max(t1.min(t2));
            hi = hi.min(t1.max(t2));
        }
        (lo <= hi).then_some(lo)
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    /// Leaf: first slot in `order`. Interior: index of the right child (left is `self + 1`).
    offset: u32,
    /// Triangle count for leaves, zero for interior nodes.
    count: u32,
}

/// Spatial index over a mesh's triangles.
///
/// Immutable once built; queries may run concurrently.
#[derive(Debug, Clone)]
pub struct AccelIndex {
    nodes: Vec<Node>,
    order: Vec<u32>,
    triangle_count: usize,
}

struct BuildRef {
    bounds: Aabb,
    centroid: Vector3<f64>,
    index: u32,
}

impl AccelIndex {
    /// Median-split build. Deterministic for a given mesh.
    pub fn build(mesh: &Mesh) -> Self {
        let mut refs: Vec<BuildRef> = (0..mesh.triangle_count())
            .map(|i| {
                let tri = mesh.triangle_positions(i);
                let mut bounds = Aabb::empty();
                tri.iter().for_each(|p| bounds.grow(p));
                BuildRef {
                    bounds,
                    centroid: (tri[0] + tri[1] + tri[2]) / 3.0,
                    index: i as u32,
                }
            })
            .collect();
        let mut index = AccelIndex {
            nodes: Vec::with_capacity(2 * refs.len() / MAX_LEAF_TRIANGLES + 1),
            order: Vec::with_capacity(refs.len()),
            triangle_count: refs.len(),
        };
        index.build_node(&mut refs);
        index
    }

    fn build_node(&mut self, refs: &mut [BuildRef]) -> usize {
        let mut bounds = Aabb::empty();
        let mut centroids = Aabb::empty();
        for r in refs.iter() {
            bounds.merge(&r.bounds);
            centroids.grow(&r.centroid);
        }
        let node_index = self.nodes.len();
        let extent = centroids.max - centroids.min;
        let axis = extent.imax();
        if refs.len() <= MAX_LEAF_TRIANGLES || extent[axis] <= 0.0 {
            self.nodes.push(Node {
                bounds: bounds.padded(),
                offset: self.order.len() as u32,
                count: refs.len() as u32,
            });
            self.order.extend(refs.iter().map(|r| r.index));
            return node_index;
        }
        refs.sort_by(|a, b| {
            a.centroid[axis]
                .total_cmp(&b.centroid[axis])
                .then(a.index.cmp(&b.index))
        });
        self.nodes.push(Node {
            bounds: bounds.padded(),
            offset: 0,
            count: 0,
        });
        let (left, right) = refs.split_at_mut(refs.len() / 2);
        self.build_node(left);
        let right_index = self.build_node(right);
        self.nodes[node_index].offset = right_index as u32;
        node_index
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.count > 0).count()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangle_count
    }

    /// Nearest hit with `t` in `(0, max_t]`; both faces count. Equal `t` goes
    /// to the lower triangle index, so results match [`super::intersect_exhaustive`].
    pub fn intersect(&self, mesh: &Mesh, ray: &Ray, max_t: f64) -> Option<Hit> {
        debug_assert_eq!(mesh.triangle_count(), self.triangle_count, "index built for another mesh");
        let inv_dir = ray.direction().map(|d| 1.0 / d);
        let mut best: Option<(TriangleHit, usize)> = None;
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            let limit = best.map_or(max_t, |(b, _)| b.t);
            if node.bounds.entry(&ray.origin, &inv_dir, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                let start = node.offset as usize;
                for &tri in &self.order[start..start + node.count as usize] {
                    let i = tri as usize;
                    if let Some(th) = intersect_triangle(ray, &mesh.triangle_positions(i)) {
                        if th.t <= max_t && closer(th.t, i, best.map(|(b, bi)| (b.t, bi))) {
                            best = Some((th, i));
                        }
                    }
                }
            } else {
                stack.push(node.offset as usize);
                stack.push(ni + 1);
            }
        }
        best.map(|(th, i)| to_hit(mesh, i, th))
    }

    /// Intersects every ray, in parallel when the `parallel` feature is on.
    pub fn intersect_batch(&self, mesh: &Mesh, rays: &[Ray], max_t: f64) -> Vec<Option<Hit>> {
        crate::par::map_slice(rays, |ray| self.intersect(mesh, ray, max_t))
    }

    /// Single-threaded [`Self::intersect_batch`].
    pub fn intersect_batch_seq(&self, mesh: &Mesh, rays: &[Ray], max_t: f64) -> Vec<Option<Hit>> {
        rays.iter().map(|ray| self.intersect(mesh, ray, max_t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{intersect_exhaustive, lat_long_sphere};
    use nalgebra::Vector2;

    #[test]
    fn single_triangle_is_one_leaf() {
        let mesh = Mesh::new(
            vec![Vector3::zeros(), Vector3::x(), Vector3::y()],
            vec![Vector2::zeros(); 3],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let index = AccelIndex::build(&mesh);
        assert_eq!(index.leaf_count(), 1);
        assert_eq!(index.node_count(), 1);
    }

    #[test]
    fn every_sphere_triangle_reachable_from_center() {
        let mesh = lat_long_sphere(32, 16, 1.0);
        let index = AccelIndex::build(&mesh);
        for i in 0..mesh.triangle_count() {
            let [a, b, c] = mesh.triangle_positions(i);
            let ray = Ray::new(Vector3::zeros(), (a + b + c) / 3.0).unwrap();
            let hit = index.intersect(&mesh, &ray, 200.0).expect("centroid ray hits");
            assert_eq!(hit.triangle_index, i);
        }
    }

    #[test]
    fn build_is_deterministic() {
        let mesh = lat_long_sphere(32, 16, 1.0);
        let a = AccelIndex::build(&mesh);
        let b = AccelIndex::build(&mesh);
        assert_eq!(a.order, b.order);
        assert_eq!(a.node_count(), b.node_count());
    }

    #[test]
    fn axis_aligned_ray_through_box_face_plane() {
        // Origin lies exactly on the mesh's bounding plane z = 0.
        let mesh = lat_long_sphere(8, 4, 1.0);
        let index = AccelIndex::build(&mesh);
        let ray = Ray::new(Vector3::new(-5.0, 0.0, 0.0), Vector3::x()).unwrap();
        assert_eq!(
            index.intersect(&mesh, &ray, 200.0).map(|h| h.triangle_index),
            intersect_exhaustive(&mesh, &ray, 200.0).map(|h| h.triangle_index)
        );
    }
}
