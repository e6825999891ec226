//! Linking numbers of disjoint closed polygonal curves in 3-space,
//! computed two independent ways: signed crossings in a generic projection
//! and the Gauss integral evaluated exactly per segment pair.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n < 1e-300 {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }
}

fn segments(curve: &[Vec3]) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
    (0..curve.len()).map(|i| (curve[i], curve[(i + 1) % curve.len()]))
}

/// Minimum distance between two segments.
fn segment_distance(p1: Vec3, p2: Vec3, q1: Vec3, q2: Vec3) -> f64 {
    // standard closest-point parameterization with clamping
    let d1 = p2.sub(p1);
    let d2 = q2.sub(q1);
    let r = p1.sub(q1);
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let f = d2.dot(r);
    let (s, t);
    if a < 1e-30 && e < 1e-30 {
        return r.norm();
    }
    if a < 1e-30 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e < 1e-30 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let s0 = if denom.abs() > 1e-30 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let t0 = ((b * s0 + f) / e).clamp(0.0, 1.0);
            let s1 = ((b * t0 - c) / a).clamp(0.0, 1.0);
            s = s1;
            t = t0;
        }
    }
    p1.add(d1.scale(s)).sub(q1.add(d2.scale(t))).norm()
}

/// Minimum distance between two closed polylines.
pub fn min_distance(c1: &[Vec3], c2: &[Vec3]) -> f64 {
    let mut best = f64::INFINITY;
    for (p1, p2) in segments(c1) {
        for (q1, q2) in segments(c2) {
            best = best.min(segment_distance(p1, p2, q1, q2));
        }
    }
    best
}

/// Gauss linking integral, evaluated exactly for each pair of segments via
/// the solid-angle formula, summed and divided by 4 pi.
pub fn gauss_linking(c1: &[Vec3], c2: &[Vec3]) -> f64 {
    let mut total = 0.0;
    for (a0, a1) in segments(c1) {
        for (b0, b1) in segments(c2) {
            total += segment_pair_solid_angle(a0, a1, b0, b1);
        }
    }
    total / (4.0 * std::f64::consts::PI)
}

fn segment_pair_solid_angle(a0: Vec3, a1: Vec3, b0: Vec3, b1: Vec3) -> f64 {
    let r13 = b0.sub(a0);
    let r14 = b1.sub(a0);
    let r23 = b0.sub(a1);
    let r24 = b1.sub(a1);
    let n1 = r13.cross(r14).normalized();
    let n2 = r14.cross(r24).normalized();
    let n3 = r24.cross(r23).normalized();
    let n4 = r23.cross(r13).normalized();
    let (n1, n2, n3, n4) = match (n1, n2, n3, n4) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        // degenerate (coplanar through an endpoint): zero contribution
        _ => return 0.0,
    };
    let omega = n1.dot(n2).clamp(-1.0, 1.0).asin()
        + n2.dot(n3).clamp(-1.0, 1.0).asin()
        + n3.dot(n4).clamp(-1.0, 1.0).asin()
        + n4.dot(n1).clamp(-1.0, 1.0).asin();
    let sign = a1.sub(a0).cross(b1.sub(b0)).dot(a0.sub(b0));
    omega * sign.signum()
}

/// Count signed crossings between the two curves in the projection along
/// `dir`; returns `None` when the projection is degenerate (near-parallel
/// crossing, crossing at a vertex, or ambiguous depth).
fn signed_crossings(c1: &[Vec3], c2: &[Vec3], dir: Vec3) -> Option<i64> {
    let d = dir.normalized()?;
    // orthonormal frame (u, v, d)
    let seed = if d.x.abs() < 0.8 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let u = seed.sub(d.scale(seed.dot(d))).normalized()?;
    let v = d.cross(u);
    let project = |p: Vec3| (p.dot(u), p.dot(v), p.dot(d));
    let eps = 1e-9;

    let mut total: i64 = 0;
    for (a0, a1) in segments(c1) {
        let (ax0, ay0, ah0) = project(a0);
        let (ax1, ay1, ah1) = project(a1);
        for (b0, b1) in segments(c2) {
            let (bx0, by0, bh0) = project(b0);
            let (bx1, by1, bh1) = project(b1);
            let det = (ax1 - ax0) * (by1 - by0) - (ay1 - ay0) * (bx1 - bx0);
            if det.abs() < eps {
                // parallel in projection: either miss (fine) or degenerate
                let miss = {
                    // bounding-box quick reject
                    let (alo, ahi) = (ax0.min(ax1), ax0.max(ax1));
                    let (blo, bhi) = (bx0.min(bx1), bx0.max(bx1));
                    ahi < blo - eps || bhi < alo - eps
                };
                if miss {
                    continue;
                }
                // possibly collinear overlap: give up on this direction
                let cross0 = (bx0 - ax0) * (ay1 - ay0) - (by0 - ay0) * (ax1 - ax0);
                if cross0.abs() < eps {
                    return None;
                }
                continue;
            }
            let s = ((bx0 - ax0) * (by1 - by0) - (by0 - ay0) * (bx1 - bx0)) / det;
            let t = ((bx0 - ax0) * (ay1 - ay0) - (by0 - ay0) * (ax1 - ax0)) / det;
            if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) {
                continue;
            }
            if s < eps || s > 1.0 - eps || t < eps || t > 1.0 - eps {
                return None; // crossing at a vertex: ambiguous
            }
            let ha = ah0 + s * (ah1 - ah0);
            let hb = bh0 + t * (bh1 - bh0);
            if (ha - hb).abs() < eps {
                return None; // curves touch in 3-space along dir
            }
            // sign of det[tangent of the over strand, tangent of the under]
            let sign = if ha > hb { det.signum() } else { -det.signum() };
            total += sign as i64;
        }
    }
    Some(total)
}

const PROJECTION_RETRIES: usize = 24;

/// Linking number from signed crossings in a generic projection; retries
/// deterministically perturbed directions on degeneracy.
pub fn crossing_linking(c1: &[Vec3], c2: &[Vec3]) -> Result<i64> {
    // deterministic direction sequence spiraling away from a fixed start
    for k in 0..PROJECTION_RETRIES {
        let t = k as f64;
        let dir = Vec3::new(
            0.237 + 0.41 * (1.7 * t).sin(),
            0.531 + 0.37 * (2.3 * t + 0.5).cos(),
            0.811 + 0.29 * (1.1 * t + 1.2).sin(),
        );
        if let Some(total) = signed_crossings(c1, c2, dir) {
            if total.rem_euclid(2) == 0 {
                return Ok(total / 2);
            }
            // odd crossing sum means a missed or double-counted crossing
        }
    }
    Err(Error::DegenerateProjection {
        retries: PROJECTION_RETRIES,
    })
}

/// Linking number of two disjoint closed polylines, cross-validated: the
/// crossing count and the rounded Gauss integral must agree.
pub fn linking_number(c1: &[Vec3], c2: &[Vec3], resolution: f64) -> Result<i64> {
    if c1.len() < 3 || c2.len() < 3 {
        return Err(Error::InvalidInput("curves need at least 3 vertices".into()));
    }
    let dist = min_distance(c1, c2);
    if dist < resolution {
        return Err(Error::CurvesTooClose { min_dist: dist });
    }
    let gauss = gauss_linking(c1, c2);
    let rounded = gauss.round();
    if (gauss - rounded).abs() > 0.2 {
        return Err(Error::InvalidInput(format!(
            "Gauss integral {gauss} is not near an integer"
        )));
    }
    let crossings = crossing_linking(c1, c2)?;
    if crossings != rounded as i64 {
        return Err(Error::InvalidInput(format!(
            "linking algorithms disagree: crossings {crossings}, Gauss {gauss}"
        )));
    }
    Ok(crossings)
}
