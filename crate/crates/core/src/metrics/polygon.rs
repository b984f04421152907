//! Convex polygons in the image plane.

use crate::geom::Vec2;

fn cross(o: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull by monotone chain, counter-clockwise (in x-right, y-up terms),
/// without collinear points.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    for p in &pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

/// Shoelace area; positive for counter-clockwise polygons.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    0.5 * poly
        .iter()
        .zip(poly.iter().cycle().skip(1))
        .map(|(a, b)| a.x * b.y - a.y * b.x)
        .sum::<f64>()
}

/// Sutherland–Hodgman clip of `subject` by the convex counter-clockwise polygon `clip`.
pub fn clip_convex(subject: &[Vec2], clip: &[Vec2]) -> Vec<Vec2> {
    let mut output = subject.to_vec();
    if clip.len() < 3 {
        return Vec::new();
    }
    for (e0, e1) in clip.iter().zip(clip.iter().cycle().skip(1)) {
        if output.is_empty() {
            break;
        }
        let input = std::mem::take(&mut output);
        let inside = |p: &Vec2| cross(e0, e1, p) >= 0.0;
        let intersect = |a: &Vec2, b: &Vec2| {
            let da = cross(e0, e1, a);
            let db = cross(e0, e1, b);
            a + (b - a) * (da / (da - db))
        };
        for (i, cur) in input.iter().enumerate() {
            let prev = &input[(i + input.len() - 1) % input.len()];
            match (inside(prev), inside(cur)) {
                (true, true) => output.push(*cur),
                (true, false) => output.push(intersect(prev, cur)),
                (false, true) => {
                    output.push(intersect(prev, cur));
                    output.push(*cur);
                }
                (false, false) => {}
            }
        }
    }
    output
}

/// IoU of the convex hulls of two point sets.
pub fn convex_iou(a: &[Vec2], b: &[Vec2]) -> f64 {
    let ha = convex_hull(a);
    let hb = convex_hull(b);
    let area_a = signed_area(&ha);
    let area_b = signed_area(&hb);
    if area_a <= 0.0 || area_b <= 0.0 {
        return 0.0;
    }
    let inter = signed_area(&clip_convex(&ha, &hb)).max(0.0);
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}
