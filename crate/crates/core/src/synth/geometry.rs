//! Exact areas of shapes clipped to pixel squares.

use crate::Vec2;

#[inline]
fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed area of `disc(0, r) ∩ triangle(0, a, b)`: the chord pieces inside the
/// disc contribute triangles, the pieces outside contribute circular sectors.
fn disc_triangle_area(a: Vec2, b: Vec2, r: f64) -> f64 {
    let d = b - a;
    let qa = d.dot(&d);
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * a.dot(&d);
    let qc = a.dot(&a) - r * r;
    let mut ts = [0.0, 1.0, 1.0, 1.0];
    let mut n = 1;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc > 0.0 {
        let sq = disc.sqrt();
        for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
            if t > 0.0 && t < 1.0 {
                ts[n] = t;
                n += 1;
            }
        }
    }
    ts[n] = 1.0;
    let mut area = 0.0;
    for k in 0..n {
        let p = a + ts[k] * d;
        let q = a + ts[k + 1] * d;
        let m = 0.5 * (p + q);
        if m.dot(&m) <= r * r {
            area += 0.5 * cross(p, q);
        } else {
            area += 0.5 * r * r * cross(p, q).atan2(p.dot(&q));
        }
    }
    area
}

/// Area of `disc(center, r) ∩ convex polygon`, vertices counterclockwise.
pub fn disc_polygon_area(center: Vec2, r: f64, polygon: &[Vec2]) -> f64 {
    let n = polygon.len();
    (0..n)
        .map(|k| disc_triangle_area(polygon[k] - center, polygon[(k + 1) % n] - center, r))
        .sum()
}

/// Area of the unit pixel square centered at `(i, j)` inside the disc.
pub fn disc_pixel_area(center: Vec2, r: f64, i: f64, j: f64) -> f64 {
    // nearest and farthest points of the square from the center
    let dx = (center.x - i).abs();
    let dy = (center.y - j).abs();
    let near = Vec2::new((dx - 0.5).max(0.0), (dy - 0.5).max(0.0));
    if near.norm_squared() >= r * r {
        return 0.0;
    }
    let far = Vec2::new(dx + 0.5, dy + 0.5);
    if far.norm_squared() <= r * r {
        return 1.0;
    }
    disc_polygon_area(center, r, &pixel_square(i, j))
}

pub fn pixel_square(i: f64, j: f64) -> [Vec2; 4] {
    [
        Vec2::new(i - 0.5, j - 0.5),
        Vec2::new(i + 0.5, j - 0.5),
        Vec2::new(i + 0.5, j + 0.5),
        Vec2::new(i - 0.5, j + 0.5),
    ]
}

/// Shoelace area, positive for counterclockwise vertices.
pub fn polygon_area(polygon: &[Vec2]) -> f64 {
    let n = polygon.len();
    0.5 * (0..n).map(|k| cross(polygon[k], polygon[(k + 1) % n])).sum::<f64>()
}

/// Keeps the part of `subject` where `normal·(X - origin) <= 0`.
pub fn clip_half_plane(subject: &[Vec2], origin: Vec2, normal: Vec2) -> Vec<Vec2> {
    let n = subject.len();
    let mut out = Vec::with_capacity(n + 2);
    for k in 0..n {
        let p = subject[k];
        let q = subject[(k + 1) % n];
        let dp = normal.dot(&(p - origin));
        let dq = normal.dot(&(q - origin));
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            out.push(p + (dp / (dp - dq)) * (q - p));
        }
    }
    out
}

/// Sutherland-Hodgman clip of an arbitrary simple polygon by the pixel square.
pub fn polygon_pixel_area(polygon: &[Vec2], i: f64, j: f64) -> f64 {
    let mut poly = polygon.to_vec();
    let clips = [
        (Vec2::new(i - 0.5, j), Vec2::new(-1.0, 0.0)),
        (Vec2::new(i + 0.5, j), Vec2::new(1.0, 0.0)),
        (Vec2::new(i, j - 0.5), Vec2::new(0.0, -1.0)),
        (Vec2::new(i, j + 0.5), Vec2::new(0.0, 1.0)),
    ];
    for (origin, normal) in clips {
        poly = clip_half_plane(&poly, origin, normal);
        if poly.len() < 3 {
            return 0.0;
        }
    }
    polygon_area(&poly).abs()
}

fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = cross(b - a, c - a);
    let o2 = cross(b - a, d - a);
    let o3 = cross(d - c, a - c);
    let o4 = cross(d - c, b - c);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// No two non-adjacent edges intersect and no vertex repeats.
pub fn is_simple(polygon: &[Vec2]) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if polygon[a] == polygon[b] {
                return false;
            }
        }
    }
    for a in 0..n {
        for b in (a + 2)..n {
            if a == 0 && b == n - 1 {
                continue;
            }
            if segments_cross(polygon[a], polygon[(a + 1) % n], polygon[b], polygon[(b + 1) % n]) {
                return false;
            }
        }
    }
    true
}
