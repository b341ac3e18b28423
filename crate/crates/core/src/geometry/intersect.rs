use nalgebra::Vector3;

use super::{Hit, Mesh, Ray};

/// Raw Möller–Trumbore result: `u` weights vertex B and `v` weights vertex C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleHit {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

impl TriangleHit {
    pub fn barycentric(&self) -> [f64; 3] {
        [1.0 - self.u - self.v, self.u, self.v]
    }
}

/// Two-sided Möller–Trumbore test. Returns hits with `t > 0` only.
#[inline]
pub fn intersect_triangle(ray: &Ray, tri: &[Vector3<f64>; 3]) -> Option<TriangleHit> {
    let [a, b, c] = tri;
    let e1 = b - a;
    let e2 = c - a;
    let dir = ray.direction();
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    // Also rejects NaN.
    let parallel = det.abs().partial_cmp(&(1e-12 * e1.norm() * e2.norm())) != Some(std::cmp::Ordering::Greater);
    if parallel {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - a;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > 0.0).then_some(TriangleHit { t, u, v })
}

/// Orders candidate hits by `t`, then by triangle index.
#[inline]
pub(crate) fn closer(t: f64, index: usize, best: Option<(f64, usize)>) -> bool {
    match best {
        None => true,
        Some((bt, bi)) => t < bt || (t == bt && index < bi),
    }
}

pub(crate) fn to_hit(mesh: &Mesh, index: usize, th: TriangleHit) -> Hit {
    let barycentric = th.barycentric();
    let uv = mesh
        .interpolate_uv(index, barycentric)
        .expect("triangle index comes from the mesh");
    Hit {
        triangle_index: index,
        t: th.t,
        barycentric,
        uv,
    }
}

/// Nearest hit over every triangle, without acceleration.
pub fn intersect_exhaustive(mesh: &Mesh, ray: &Ray, max_t: f64) -> Option<Hit> {
    let mut best: Option<(TriangleHit, usize)> = None;
    for i in 0..mesh.triangle_count() {
        if let Some(th) = intersect_triangle(ray, &mesh.triangle_positions(i)) {
            if th.t <= max_t && closer(th.t, i, best.map(|(b, bi)| (b.t, bi))) {
                best = Some((th, i));
            }
        }
    }
    best.map(|(th, i)| to_hit(mesh, i, th))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    fn tri_mesh() -> Mesh {
        Mesh::new(
            vec![
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(0.0, 1.0, 0.0),
            ],
            vec![Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn planar_hit_interpolates_uv() {
        let mesh = tri_mesh();
        let ray = Ray::new(Vector3::new(0.25, 0.25, -1.0), Vector3::z()).unwrap();
        let hit = intersect_exhaustive(&mesh, &ray, 200.0).unwrap();
        assert_eq!(hit.triangle_index, 0);
        assert!((hit.t - 1.0).abs() < 1e-12);
        let expected = [0.5, 0.25, 0.25];
        for (w, e) in hit.barycentric.iter().zip(expected) {
            assert!((w - e).abs() < 1e-12);
        }
        assert!((hit.uv - Vector2::new(0.25, 0.25)).norm() < 1e-12);
    }

    #[test]
    fn miss_outside_and_beyond_range() {
        let mesh = tri_mesh();
        let outside = Ray::new(Vector3::new(2.0, 2.0, -1.0), Vector3::z()).unwrap();
        assert!(intersect_exhaustive(&mesh, &outside, 200.0).is_none());
        let far = Ray::new(Vector3::new(0.25, 0.25, -300.0), Vector3::z()).unwrap();
        assert!(intersect_exhaustive(&mesh, &far, 200.0).is_none());
        let behind = Ray::new(Vector3::new(0.25, 0.25, 1.0), Vector3::z()).unwrap();
        assert!(intersect_exhaustive(&mesh, &behind, 200.0).is_none());
    }

    #[test]
    fn back_face_is_hit() {
        let mesh = tri_mesh();
        let ray = Ray::new(Vector3::new(0.25, 0.25, 1.0), -Vector3::z()).unwrap();
        assert!(intersect_exhaustive(&mesh, &ray, 200.0).is_some());
    }

    #[test]
    fn shared_edge_tie_goes_to_lowest_index() {
        // Two triangles sharing the diagonal of a unit quad.
        let mesh = Mesh::new(
            vec![
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(1.0, 1.0, 0.0),
                Vector3::new(0.0, 1.0, 0.0),
            ],
            vec![Vector2::zeros(); 4],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let ray = Ray::new(Vector3::new(0.5, 0.5, -1.0), Vector3::z()).unwrap();
        assert_eq!(intersect_exhaustive(&mesh, &ray, 200.0).unwrap().triangle_index, 0);
    }
}
