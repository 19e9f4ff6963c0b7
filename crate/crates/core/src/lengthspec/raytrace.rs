//! Specular billiard in the unit-radius sector `0 ≤ φ ≤ α`, `ρ ≤ 1`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::{atan2, cos, floor, sin, sqrt};

fn wrap(x: f64, period: f64) -> f64 {
    x - period * floor(x / period)
}

/// Hits closer than this to the apex are singular.
pub const APEX_TOL: f64 = 1e-9;
const HIT_EPS: f64 = 1e-12;

/// What happens when a trajectory runs into the apex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApexRule {
    /// Stop and flag the trajectory as singular.
    Stop,
    /// Continue straight through the apex in the unfolded plane. Only
    /// meaningful for `α = π/n`, where mirror copies of the sector tile the
    /// plane.
    Unfold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Start point followed by every wall hit.
    pub points: Vec<[f64; 2]>,
    pub length: f64,
    /// Position and direction after the last segment.
    pub end: [f64; 2],
    pub end_direction: [f64; 2],
    /// Phase-space distance `|Δx| + |Δv|` between end and start.
    pub closure: f64,
    pub singular: bool,
    pub bounces: usize,
}

#[derive(Debug, Clone, Copy)]
struct Sector {
    alpha: f64,
    /// inward normals of the edges at φ = 0 and φ = α
    normals: [[f64; 2]; 2],
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn reflect(d: [f64; 2], n: [f64; 2]) -> [f64; 2] {
    let k = 2.0 * dot(d, n);
    [d[0] - k * n[0], d[1] - k * n[1]]
}

impl Sector {
    fn new(alpha: f64) -> Sector {
        Sector { alpha, normals: [[0.0, 1.0], [sin(alpha), -cos(alpha)]] }
    }

    /// Distance to the next wall and the normals of every wall hit there.
    fn next_hit(&self, p: [f64; 2], d: [f64; 2]) -> (f64, Vec<[f64; 2]>) {
        let mut hits: Vec<(f64, [f64; 2])> = Vec::with_capacity(3);
        for n in self.normals {
            let nd = dot(n, d);
            if nd < 0.0 {
                let t = -dot(n, p) / nd;
                if t > HIT_EPS {
                    hits.push((t, n));
                }
            }
        }
        let pd = dot(p, d);
        let t = -pd + sqrt((pd * pd - dot(p, p) + 1.0).max(0.0));
        if t > HIT_EPS {
            let q = [p[0] + t * d[0], p[1] + t * d[1]];
            hits.push((t, [-q[0], -q[1]]));
        }
        let t_min = hits.iter().map(|h| h.0).fold(f64::INFINITY, f64::min);
        let mut normals: Vec<[f64; 2]> = Vec::with_capacity(hits.len());
        // at α = π both straight edges lie on one line and must reflect once
        for h in hits.iter().filter(|h| h.0 <= t_min + 1e-11) {
            if normals.iter().all(|n| dot(*n, h.1) < 1.0 - 1e-12) {
                normals.push(h.1);
            }
        }
        (t_min, normals)
    }

    /// Direction leaving the apex after arriving along `d`.
    fn through_apex(&self, d: [f64; 2]) -> [f64; 2] {
        let period = 2.0 * self.alpha;
        let mut th = wrap(atan2(d[1], d[0]), period);
        if th > self.alpha {
            th = period - th;
        }
        [cos(th), sin(th)]
    }
}

fn advance(sector: &Sector, p: &mut [f64; 2], d: &mut [f64; 2], budget: f64, apex: ApexRule) -> (f64, bool, bool) {
    let (t, normals) = sector.next_hit(*p, *d);
    if t >= budget {
        *p = [p[0] + budget * d[0], p[1] + budget * d[1]];
        return (budget, false, false);
    }
    let q = [p[0] + t * d[0], p[1] + t * d[1]];
    if dot(q, q) < APEX_TOL * APEX_TOL {
        *p = [0.0, 0.0];
        return match apex {
            ApexRule::Stop => (t, true, true),
            ApexRule::Unfold => {
                *d = sector.through_apex(*d);
                (t, true, false)
            }
        };
    }
    let mut nd = *d;
    for n in &normals {
        nd = reflect(nd, *n);
    }
    let norm = sqrt(dot(nd, nd));
    *d = [nd[0] / norm, nd[1] / norm];
    // keep the hit point on the wall
    let r = sqrt(dot(q, q));
    *p = if r > 1.0 { [q[0] / r, q[1] / r] } else { q };
    (t, true, false)
}

fn finish(start: [f64; 2], dir: [f64; 2], points: Vec<[f64; 2]>, p: [f64; 2], d: [f64; 2], length: f64, singular: bool, bounces: usize) -> Trajectory {
    let dx = distance(p, start);
    let dv = distance(d, dir);
    Trajectory { points, length, end: p, end_direction: d, closure: dx + dv, singular, bounces }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]))
}

fn normalized(d: [f64; 2]) -> [f64; 2] {
    let n = sqrt(dot(d, d));
    [d[0] / n, d[1] / n]
}

/// Traces `max_bounces` wall reflections, stopping at the apex.
pub fn ray_trace(alpha: f64, start: [f64; 2], direction: [f64; 2], max_bounces: usize) -> Trajectory {
    let sector = Sector::new(alpha);
    let (mut p, mut d) = (start, normalized(direction));
    let dir0 = d;
    let mut points = alloc::vec![p];
    let mut length = 0.0;
    let mut bounces = 0;
    while bounces < max_bounces {
        let (t, _, singular) = advance(&sector, &mut p, &mut d, f64::INFINITY, ApexRule::Stop);
        length += t;
        points.push(p);
        if singular {
            return finish(start, dir0, points, p, d, length, true, bounces);
        }
        bounces += 1;
    }
    finish(start, dir0, points, p, d, length, false, bounces)
}

/// Traces exactly `length` of path.
pub fn trace_length(alpha: f64, start: [f64; 2], direction: [f64; 2], length: f64, apex: ApexRule) -> Trajectory {
    let sector = Sector::new(alpha);
    let (mut p, mut d) = (start, normalized(direction));
    let dir0 = d;
    let mut points = alloc::vec![p];
    let mut left = length;
    let mut bounces = 0;
    let mut through_apex = false;
    while left > 0.0 {
        let (t, hit, singular) = advance(&sector, &mut p, &mut d, left, apex);
        left -= t;
        points.push(p);
        if singular {
            return finish(start, dir0, points, p, d, length - left, true, bounces);
        }
        if hit {
            bounces += 1;
            through_apex |= dot(p, p) == 0.0;
        }
        if !hit {
            break;
        }
    }
    let mut out = finish(start, dir0, points, p, d, length, false, bounces);
    out.singular = through_apex;
    out
}

/// Maps a point and direction of the unit disk into the sector by the
/// mirror group of `α = π/n`.
pub fn fold_into_sector(alpha: f64, p: [f64; 2], d: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let period = 2.0 * alpha;
    let phi = atan2(p[1], p[0]);
    let k = floor(phi / period);
    let rot = -k * period;
    let (c, s) = (cos(rot), sin(rot));
    let rotate = |v: [f64; 2]| [c * v[0] - s * v[1], s * v[0] + c * v[1]];
    let (mut p, mut d) = (rotate(p), rotate(d));
    if wrap(atan2(p[1], p[0]), 2.0 * PI) > alpha + 1e-15 {
        // mirror across the edge at φ = α
        let (c2, s2) = (cos(2.0 * alpha), sin(2.0 * alpha));
        let m = |v: [f64; 2]| [c2 * v[0] + s2 * v[1], s2 * v[0] - c2 * v[1]];
        p = m(p);
        d = m(d);
    }
    (p, d)
}
