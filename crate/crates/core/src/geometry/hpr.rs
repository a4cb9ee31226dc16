//! Hidden-point-removal visibility: spherical flipping plus a convex hull.

use crate::geometry::hull::convex_hull_indices;
use glam::DVec3;

/// Indices of the points visible from `viewpoint`, sorted ascending.
///
/// Each point is flipped through a sphere of radius
/// `R = 10^gamma * max ||p - viewpoint||`; points whose flipped image lands on
/// the convex hull of the flipped cloud plus the viewpoint are visible.
/// Deterministic for a fixed input order.
///
/// Fallback: with fewer than 4 points, or a cloud too degenerate for a 3-D
/// hull (coincident/collinear/coplanar), every point is reported visible.
pub fn hpr_visible(points: &[DVec3], viewpoint: DVec3, gamma: f64) -> Vec<usize> {
    let n = points.len();
    if n < 4 {
        return (0..n).collect();
    }

    let translated: Vec<DVec3> = points.iter().map(|p| *p - viewpoint).collect();
    let max_norm = translated
        .iter()
        .map(|q| q.length())
        .fold(0.0f64, f64::max);
    if max_norm == 0.0 {
        return (0..n).collect();
    }
    let radius = 10f64.powf(gamma) * max_norm;

    // Points essentially at the viewpoint cannot be flipped (no direction)
    // and cannot be occluded; report them visible directly.
    let mut at_viewpoint: Vec<usize> = Vec::new();
    let mut flipped: Vec<DVec3> = Vec::with_capacity(n + 1);
    for (i, q) in translated.iter().enumerate() {
        let norm = q.length();
        if norm < 1e-12 * max_norm {
            at_viewpoint.push(i);
            flipped.push(DVec3::ZERO);
        } else {
            flipped.push(*q + *q * (2.0 * (radius - norm) / norm));
        }
    }
    flipped.push(DVec3::ZERO); // the viewpoint itself

    let Some(hull) = convex_hull_indices(&flipped) else {
        return (0..n).collect();
    };
    let mut visible: Vec<usize> = hull.into_iter().filter(|&i| i < n).collect();
    visible.extend(at_viewpoint);
    visible.sort_unstable();
    visible.dedup();
    visible
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_is_visible() {
        let points = [DVec3::new(3.0, -2.0, 1.0)];
        assert_eq!(hpr_visible(&points, DVec3::ZERO, 2.0), vec![0]);
    }

    #[test]
    fn fewer_than_four_points_all_visible() {
        let points = [DVec3::X, DVec3::Y, DVec3::Z];
        assert_eq!(hpr_visible(&points, DVec3::ZERO, 2.0), vec![0, 1, 2]);
    }

    #[test]
    fn occluded_collinear_point_is_removed() {
        // Near and far points on the same ray from the viewpoint, inside a
        // spread of background points that keeps the flipped hull
        // non-degenerate.
        let mut points = vec![DVec3::new(0.0, 1.0, 0.0), DVec3::new(0.0, 2.0, 0.0)];
        points.extend([
            DVec3::new(5.0, 3.0, 0.0),
            DVec3::new(-5.0, 3.0, 0.0),
            DVec3::new(0.0, 3.0, 5.0),
            DVec3::new(0.0, 3.0, -5.0),
            DVec3::new(3.0, 4.0, 3.0),
        ]);
        let visible = hpr_visible(&points, DVec3::ZERO, 2.0);
        assert!(visible.contains(&0), "near point must stay visible");
        assert!(!visible.contains(&1), "far collinear point must be culled");
    }

    #[test]
    fn visible_set_is_a_subset_and_deterministic() {
        let points: Vec<DVec3> = (0..100)
            .map(|i| {
                let a = i as f64 * 0.37;
                DVec3::new(a.cos() * 2.0, 3.0 + a.sin(), (i % 7) as f64 * 0.1)
            })
            .collect();
        let v1 = hpr_visible(&points, DVec3::ZERO, 2.0);
        let v2 = hpr_visible(&points, DVec3::ZERO, 2.0);
        assert_eq!(v1, v2);
        assert!(v1.iter().all(|&i| i < points.len()));
        assert!(v1.windows(2).all(|w| w[0] < w[1]));
    }
}
