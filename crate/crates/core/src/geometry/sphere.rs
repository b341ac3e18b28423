use std::f64::consts::PI;

use nalgebra::{Vector2, Vector3};

use super::Mesh;

/// UV sphere centered at the origin with +Y as the pole axis.
///
/// `u` runs with longitude and `v = 1` at the north pole. Each pole row is a
/// fan of single triangles (the zero-area half of every pole quad is dropped),
/// so the mesh has `2 * segments * (rings - 1)` triangles and every vertex is
/// referenced. Seam and pole vertices are duplicated to carry distinct UVs.
///
/// # Panics
///
/// Panics if `segments < 3`, `rings < 2` or `radius` is not positive.
pub fn lat_long_sphere(segments: u32, rings: u32, radius: f64) -> Mesh {
    assert!(segments >= 3 && rings >= 2 && radius > 0.0);
    let mut positions = Vec::new();
    let mut uvs = Vec::new();
    let point = |ring: u32, seg: f64| {
        let theta = PI * ring as f64 / rings as f64;
        let phi = 2.0 * PI * seg / segments as f64;
        Vector3::new(theta.sin() * phi.cos(), theta.cos(), -theta.sin() * phi.sin()) * radius
    };

    // North pole: one vertex per segment, u at the segment's middle.
    for j in 0..segments {
        let u = (j as f64 + 0.5) / segments as f64;
        positions.push(Vector3::new(0.0, radius, 0.0));
        uvs.push(Vector2::new(u, 1.0));
    }
    let ring_start = positions.len() as u32;
    for i in 1..rings {
        for j in 0..=segments {
            positions.push(point(i, j as f64));
            uvs.push(Vector2::new(
                j as f64 / segments as f64,
                1.0 - i as f64 / rings as f64,
            ));
        }
    }
    let south_start = positions.len() as u32;
    for j in 0..segments {
        let u = (j as f64 + 0.5) / segments as f64;
        positions.push(Vector3::new(0.0, -radius, 0.0));
        uvs.push(Vector2::new(u, 0.0));
    }

    let ring_vertex = |i: u32, j: u32| ring_start + (i - 1) * (segments + 1) + j;
    let mut triangles = Vec::new();
    for j in 0..segments {
        triangles.push([j, ring_vertex(1, j), ring_vertex(1, j + 1)]);
    }
    for i in 1..rings - 1 {
        for j in 0..segments {
            let a = ring_vertex(i, j);
            let b = ring_vertex(i + 1, j);
            let c = ring_vertex(i + 1, j + 1);
            let d = ring_vertex(i, j + 1);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    for j in 0..segments {
        triangles.push([ring_vertex(rings - 1, j), south_start + j, ring_vertex(rings - 1, j + 1)]);
    }

    Mesh::new(positions, uvs, triangles).expect("generated sphere is a valid mesh")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_closed_form() {
        let mesh = lat_long_sphere(32, 16, 1.0);
        assert_eq!(mesh.triangle_count(), 960);
        assert_eq!(mesh.vertex_count(), 2 * 32 + 15 * 33);
        let mut used = vec![false; mesh.vertex_count()];
        for t in mesh.triangles() {
            t.iter().for_each(|&v| used[v as usize] = true);
        }
        assert!(used.iter().all(|&u| u));
    }

    #[test]
    fn vertices_on_sphere_and_uvs_in_unit_square() {
        let mesh = lat_long_sphere(12, 6, 2.5);
        for p in mesh.positions() {
            assert!((p.norm() - 2.5).abs() < 1e-12);
        }
        let (lo, hi) = mesh.uv_bounds();
        assert!(lo.x >= 0.0 && lo.y >= 0.0 && hi.x <= 1.0 && hi.y <= 1.0);
    }
}
