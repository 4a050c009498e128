//! Smallest enclosing circles of one to three points.

use crate::pointcloud::Point2;

/// Squared circumradius of a triangle, `a²b²c² / (4 · cross²)`. Infinite for
/// collinear input.
pub fn circumradius_sq(a: Point2, b: Point2, c: Point2) -> f64 {
    let ab = a.dist_sq(&b);
    let bc = b.dist_sq(&c);
    let ca = c.dist_sq(&a);
    let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if cross == 0.0 {
        return f64::INFINITY;
    }
    ab * bc * ca / (4.0 * cross * cross)
}

/// Squared radius of the smallest disc containing all of `pts` (1 to 3 points).
///
/// For three points this is the squared circumradius when the triangle is
/// acute and a quarter of the longest squared side otherwise.
pub fn min_enclosing_ball_radius_sq(pts: &[Point2]) -> f64 {
    match *pts {
        [] | [_] => 0.0,
        [a, b] => a.dist_sq(&b) / 4.0,
        [a, b, c] => {
            let mut sides = [a.dist_sq(&b), b.dist_sq(&c), c.dist_sq(&a)];
            sides.sort_by(f64::total_cmp);
            let [s0, s1, longest] = sides;
            if longest >= s0 + s1 {
                longest / 4.0
            } else {
                circumradius_sq(a, b, c)
            }
        }
        _ => panic!("min_enclosing_ball_radius_sq takes at most 3 points"),
    }
}

pub fn min_enclosing_ball_radius(pts: &[Point2]) -> f64 {
    match *pts {
        [a, b] => a.dist(&b) / 2.0,
        _ => min_enclosing_ball_radius_sq(pts).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    /// Smallest candidate circle containing every point. Candidates are the
    /// diametral circles of all pairs and the circumcircles of all triples.
    fn candidate_circle_radius(pts: &[Point2]) -> f64 {
        let covers = |c: Point2, r: f64| pts.iter().all(|q| q.dist(&c) <= r * (1.0 + 1e-12) + 1e-12);
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let c = p((pts[i].x + pts[j].x) / 2.0, (pts[i].y + pts[j].y) / 2.0);
                let r = c.dist(&pts[i]);
                if covers(c, r) {
                    best = best.min(r);
                }
                for k in j + 1..pts.len() {
                    let (a, b, cc) = (pts[i], pts[j], pts[k]);
                    let d = 2.0 * (a.x * (b.y - cc.y) + b.x * (cc.y - a.y) + cc.x * (a.y - b.y));
                    if d == 0.0 {
                        continue;
                    }
                    let (a2, b2, c2) = (a.norm().powi(2), b.norm().powi(2), cc.norm().powi(2));
                    let centre = p(
                        (a2 * (b.y - cc.y) + b2 * (cc.y - a.y) + c2 * (a.y - b.y)) / d,
                        (a2 * (cc.x - b.x) + b2 * (a.x - cc.x) + c2 * (b.x - a.x)) / d,
                    );
                    let r = centre.dist(&a);
                    if covers(centre, r) {
                        best = best.min(r);
                    }
                }
            }
        }
        if pts.len() == 1 {
            0.0
        } else {
            best
        }
    }

    #[test]
    fn three_point_triangle_is_acute() {
        let r2 = min_enclosing_ball_radius_sq(&[p(0.0, 0.0), p(1.0, 2.0), p(3.0, 0.0)]);
        assert!((r2 - 2.5).abs() < 1e-12);
        let r = min_enclosing_ball_radius(&[p(0.0, 0.0), p(1.0, 2.0), p(3.0, 0.0)]);
        assert!((r - 10f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn obtuse_uses_longest_side() {
        let pts = [p(0.0, 0.0), p(4.0, 0.0), p(1.0, 1.0)];
        assert_eq!(min_enclosing_ball_radius(&pts), 2.0);
        assert!((candidate_circle_radius(&pts) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn small_cases() {
        assert_eq!(min_enclosing_ball_radius(&[p(3.0, 4.0)]), 0.0);
        assert_eq!(min_enclosing_ball_radius(&[p(0.0, 0.0), p(3.0, 4.0)]), 2.5);
        // collinear triple falls under the longest-side rule
        assert_eq!(
            min_enclosing_ball_radius(&[p(0.0, 0.0), p(1.0, 0.0), p(4.0, 0.0)]),
            2.0
        );
        assert!(circumradius_sq(p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)).is_infinite());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_candidate_circles(coords in prop::collection::vec((-3f64..3.0, -3f64..3.0), 3)) {
            let pts: Vec<Point2> = coords.iter().map(|&(x, y)| p(x, y)).collect();
            let r = min_enclosing_ball_radius(&pts);
            let brute = candidate_circle_radius(&pts);
            prop_assert!((r - brute).abs() < 1e-9 * (1.0 + brute), "{} vs {}", r, brute);
        }
    }
}
