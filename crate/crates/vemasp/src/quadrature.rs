//! Gauss rules on segments and triangles, and polygon quadrature by
//! fan triangulation from the centroid.

use crate::mesh::Point;

/// Gauss-Legendre nodes/weights on [0, 1] exact for polynomials of the
/// given degree (1, 3, or 5).
pub fn gauss_segment(degree: usize) -> Vec<(f64, f64)> {
    match degree {
        0 | 1 => vec![(0.5, 1.0)],
        2 | 3 => {
            let d = 0.5 / 3f64.sqrt();
            vec![(0.5 - d, 0.5), (0.5 + d, 0.5)]
        }
        4 | 5 => {
            let d = 0.5 * (3.0f64 / 5.0).sqrt();
            vec![
                (0.5 - d, 5.0 / 18.0),
                (0.5, 8.0 / 18.0),
                (0.5 + d, 5.0 / 18.0),
            ]
        }
        6 | 7 => {
            let a = 0.5 - 0.5 * ((3.0 - 2.0 * (6.0f64 / 5.0).sqrt()) / 7.0).sqrt();
            let b = 0.5 - 0.5 * ((3.0 + 2.0 * (6.0f64 / 5.0).sqrt()) / 7.0).sqrt();
            let wa = (18.0 + 30.0f64.sqrt()) / 72.0;
            let wb = (18.0 - 30.0f64.sqrt()) / 72.0;
            vec![(b, wb), (a, wa), (1.0 - a, wa), (1.0 - b, wb)]
        }
        8..=11 => {
            let a = 0.5 - 0.5 * ((5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0);
            let b = 0.5 - 0.5 * ((5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0);
            let wa = (322.0 + 13.0 * 70.0f64.sqrt()) / 1800.0;
            let wb = (322.0 - 13.0 * 70.0f64.sqrt()) / 1800.0;
            vec![
                (b, wb),
                (a, wa),
                (0.5, 128.0 / 450.0),
                (1.0 - a, wa),
                (1.0 - b, wb),
            ]
        }
        _ => panic!("unsupported segment quadrature degree {degree}"),
    }
}

/// Integrates `f` along the segment from `a` to `b` with the given degree.
pub fn integrate_segment(a: Point, b: Point, degree: usize, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    gauss_segment(degree)
        .iter()
        .map(|&(t, w)| w * f(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
        .sum::<f64>()
        * len
}

/// Barycentric rule on the reference triangle, exact for the given degree.
/// Weights sum to 1; multiply by the triangle area.
fn triangle_rule(degree: usize) -> Vec<([f64; 3], f64)> {
    match degree {
        0 | 1 => vec![([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0)],
        2 => vec![
            ([0.5, 0.5, 0.0], 1.0 / 3.0),
            ([0.0, 0.5, 0.5], 1.0 / 3.0),
            ([0.5, 0.0, 0.5], 1.0 / 3.0),
        ],
        // 7-point rule, degree 5
        3 | 4 | 5 => {
            let a1 = 0.059_715_871_789_77;
            let b1 = 0.470_142_064_105_115;
            let w1 = 0.132_394_152_788_506;
            let a2 = 0.797_426_985_353_087;
            let b2 = 0.101_286_507_323_456;
            let w2 = 0.125_939_180_544_827;
            vec![
                ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
                ([a1, b1, b1], w1),
                ([b1, a1, b1], w1),
                ([b1, b1, a1], w1),
                ([a2, b2, b2], w2),
                ([b2, a2, b2], w2),
                ([b2, b2, a2], w2),
            ]
        }
        _ => panic!("unsupported triangle quadrature degree {degree}"),
    }
}

fn triangle_area(p: Point, q: Point, r: Point) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
}

/// Integrates `f` over the polygon by fanning triangles out of `center`
/// (the centroid for convex cells) with the given quadrature degree.
pub fn integrate_polygon(
    points: &[Point],
    center: Point,
    degree: usize,
    mut f: impl FnMut(f64, f64) -> f64,
) -> f64 {
    let rule = triangle_rule(degree);
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let (p, q) = (points[i], points[(i + 1) % n]);
        let area = triangle_area(center, p, q);
        for &(bary, w) in &rule {
            let x = bary[0] * center[0] + bary[1] * p[0] + bary[2] * q[0];
            let y = bary[0] * center[1] + bary[1] * p[1] + bary[2] * q[1];
            total += w * area * f(x, y);
        }
    }
    total
}
