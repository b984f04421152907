//! Volume of the convex hull of a small 3D point set.
//!
//! Incremental hull with a distance tolerance: points within `tol` of the
//! current hull are treated as inside. The volume is summed as signed
//! tetrahedra from an interior point over the outward-oriented facets.

use crate::geom::Vec3;

#[derive(Debug, Clone, Copy)]
struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
}

impl Face {
    fn new(pts: &[Vec3], v: [usize; 3], interior: &Vec3) -> Face {
        let (a, b, c) = (pts[v[0]], pts[v[1]], pts[v[2]]);
        let mut n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len > 0.0 {
            n /= len;
        }
        let mut f = Face {
            v,
            normal: n,
            offset: n.dot(&a),
        };
        if f.distance(interior) > 0.0 {
            f.v.swap(1, 2);
            f.normal = -f.normal;
            f.offset = -f.offset;
        }
        f
    }

    fn distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Points closer than `tol` to an earlier point are dropped.
fn dedup(points: &[Vec3], tol: f64) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| (p - q).norm() <= tol) {
            out.push(*p);
        }
    }
    out
}

fn farthest<F: Fn(&Vec3) -> f64>(pts: &[Vec3], score: F) -> (usize, f64) {
    pts.iter()
        .enumerate()
        .map(|(i, p)| (i, score(p)))
        .fold(
            (0, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        )
}

/// Volume of the convex hull of `points`; 0 when they do not span 3D at
/// tolerance `tol` (absolute, in length units).
pub fn convex_hull_volume(points: &[Vec3], tol: f64) -> f64 {
    let pts = dedup(points, tol);
    if pts.len() < 4 {
        return 0.0;
    }

    // Initial simplex from extreme points.
    let p0 = 0;
    let (p1, d1) = farthest(&pts, |p| (p - pts[p0]).norm());
    if d1 <= tol {
        return 0.0;
    }
    let dir = (pts[p1] - pts[p0]) / d1;
    let (p2, d2) = farthest(&pts, |p| {
        let w = p - pts[p0];
        (w - dir * w.dot(&dir)).norm()
    });
    if d2 <= tol {
        return 0.0;
    }
    let n = (pts[p1] - pts[p0]).cross(&(pts[p2] - pts[p0])).normalize();
    let (p3, d3) = farthest(&pts, |p| n.dot(&(p - pts[p0])).abs());
    if d3 <= tol {
        return 0.0;
    }

    let interior = (pts[p0] + pts[p1] + pts[p2] + pts[p3]) / 4.0;
    let mut faces = vec![
        Face::new(&pts, [p0, p1, p2], &interior),
        Face::new(&pts, [p0, p1, p3], &interior),
        Face::new(&pts, [p0, p2, p3], &interior),
        Face::new(&pts, [p1, p2, p3], &interior),
    ];

    for (i, p) in pts.iter().enumerate() {
        if [p0, p1, p2, p3].contains(&i) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| f.distance(p) > tol).collect();
        if !visible.iter().any(|v| *v) {
            continue;
        }
        // Directed edges of visible faces whose reverse is not also visible.
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, v)| **v) {
            for k in 0..3 {
                edges.push((f.v[k], f.v[(k + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(a, b)| !edges.contains(&(*b, *a)))
            .copied()
            .collect();
        let mut kept: Vec<Face> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, v)| !**v)
            .map(|(f, _)| *f)
            .collect();
        for (a, b) in horizon {
            kept.push(Face::new(&pts, [a, b, i], &interior));
        }
        faces = kept;
    }

    faces
        .iter()
        .map(|f| {
            let (a, b, c) = (pts[f.v[0]] - interior, pts[f.v[1]] - interior, pts[f.v[2]] - interior);
            a.dot(&b.cross(&c)) / 6.0
        })
        .sum::<f64>()
        .abs()
}
