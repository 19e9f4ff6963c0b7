//! Periodic-orbit lengths of the sector `α = π/n` from polygon orbits of
//! the unfolded disk.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::raytrace::{fold_into_sector, trace_length, ApexRule};
use crate::error::{Error, Result};
use crate::math::{cos, round, sin};

pub const MAX_ORBIT_LENGTH: f64 = 50.0;
/// Default cap on polygon vertices; lengths accumulate at `2πw/g` for
/// large `p` so some cap is needed.
pub const DEFAULT_MAX_VERTICES: u32 = 200;
pub const CLOSURE_TOL: f64 = 1e-6;
const DEDUP_TOL: f64 = 1e-9;

/// Orbits with length `repetition · bounces · 2 sin(πw/p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitFamily {
    pub length: f64,
    /// Arc reflections along the whole orbit.
    pub order: u32,
    /// Disk polygon: `p` vertices, winding `w`.
    pub p: u32,
    pub w: u32,
    pub repetition: u32,
    /// Diameters run through the apex; they are traced by continuing
    /// straight through it.
    pub through_apex: bool,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Closure distance of a generic member of the `(p, w)` family after
/// `length`.
pub fn family_closure(alpha: f64, p: u32, w: u32, length: f64) -> f64 {
    // vertex phase chosen away from mirror lines and corners
    let a = 0.381_966_011_250_105 * 2.0 * PI / f64::from(p) + 0.0123;
    let b = a + 2.0 * PI * f64::from(w) / f64::from(p);
    let (va, vb) = ([cos(a), sin(a)], [cos(b), sin(b)]);
    let start = [va[0] + 0.3 * (vb[0] - va[0]), va[1] + 0.3 * (vb[1] - va[1])];
    let chord = [vb[0] - va[0], vb[1] - va[1]];
    let (s, d) = fold_into_sector(alpha, start, chord);
    let rule = if 2 * w == p { ApexRule::Unfold } else { ApexRule::Stop };
    let out = trace_length(alpha, s, d, length, rule);
    if out.singular && rule == ApexRule::Stop {
        f64::INFINITY
    } else {
        out.closure
    }
}

/// Orbit lengths up to `l_max`, each primitive family confirmed by the ray
/// tracer, sorted and deduplicated.
pub fn enumerate_orbits(alpha: f64, l_max: f64) -> Result<Vec<OrbitFamily>> {
    enumerate_orbits_with(alpha, l_max, DEFAULT_MAX_VERTICES)
}

pub fn enumerate_orbits_with(alpha: f64, l_max: f64, max_vertices: u32) -> Result<Vec<OrbitFamily>> {
    let n = round(PI / alpha);
    if !(alpha > 0.0) || n < 1.0 || (PI / n - alpha).abs() > 1e-12 {
        return Err(Error::InvalidSpec(alloc::format!("sector angle must be pi/n, got {alpha}")));
    }
    if !(l_max > 0.0 && l_max <= MAX_ORBIT_LENGTH) {
        return Err(Error::OutOfRange(alloc::format!("orbit lengths up to {l_max} (max {MAX_ORBIT_LENGTH})")));
    }
    let n = n as u32;
    let mut out = Vec::new();
    for p in 2..=max_vertices {
        for w in 1..=p / 2 {
            if gcd(p, w) != 1 {
                continue;
            }
            let bounces = p / gcd(p, n);
            let primitive = f64::from(bounces) * 2.0 * sin(PI * f64::from(w) / f64::from(p));
            if primitive > l_max {
                continue;
            }
            if family_closure(alpha, p, w, primitive) > CLOSURE_TOL {
                continue;
            }
            let mut r = 1;
            while f64::from(r) * primitive <= l_max + DEDUP_TOL {
                out.push(OrbitFamily {
                    length: f64::from(r) * primitive,
                    order: r * bounces,
                    p,
                    w,
                    repetition: r,
                    through_apex: 2 * w == p,
                });
                r += 1;
            }
        }
    }
    out.sort_by(|a, b| a.length.total_cmp(&b.length));
    // coincident lengths: keep the lowest repetition, then the fewest vertices
    let mut kept: Vec<OrbitFamily> = Vec::with_capacity(out.len());
    for o in out {
        match kept.last_mut() {
            Some(last) if (o.length - last.length).abs() < DEDUP_TOL => {
                if (o.repetition, o.p) < (last.repetition, last.p) {
                    *last = o;
                }
            }
            _ => kept.push(o),
        }
    }
    Ok(kept)
}
