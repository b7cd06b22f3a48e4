//! Distinguished bases of loops: straight spokes from a basepoint to small circles.

use rug::Complex;
use serde::{Deserialize, Serialize};

/// A point of the base, in double precision. Path vertices only need to be exact
/// as binary numbers, not close to anything in particular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pt {
    pub re: f64,
    pub im: f64,
}

impl Pt {
    pub fn new(re: f64, im: f64) -> Self {
        Pt { re, im }
    }

    pub fn from_complex(z: &Complex) -> Self {
        Pt { re: z.real().to_f64(), im: z.imag().to_f64() }
    }

    pub fn to_complex(self, prec: u32) -> Complex {
        Complex::with_val(prec, (self.re, self.im))
    }

    pub fn sub(self, o: Pt) -> Pt {
        Pt::new(self.re - o.re, self.im - o.im)
    }

    pub fn add(self, o: Pt) -> Pt {
        Pt::new(self.re + o.re, self.im + o.im)
    }

    pub fn scale(self, s: f64) -> Pt {
        Pt::new(self.re * s, self.im * s)
    }

    pub fn norm(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn dist(self, o: Pt) -> f64 {
        self.sub(o).norm()
    }

    pub fn arg(self) -> f64 {
        self.im.atan2(self.re)
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Pt, a: Pt, b: Pt) -> f64 {
    let ab = b.sub(a);
    let l2 = ab.re * ab.re + ab.im * ab.im;
    if l2 == 0.0 {
        return p.dist(a);
    }
    let s = ((p.re - a.re) * ab.re + (p.im - a.im) * ab.im) / l2;
    let s = s.clamp(0.0, 1.0);
    p.dist(a.add(ab.scale(s)))
}

/// Closed polygonal loops from a common basepoint, one per critical value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPlan {
    pub basepoint: Pt,
    /// Critical values in loop order.
    pub points: Vec<Pt>,
    /// Position of each loop's critical value in the caller's list.
    pub order: Vec<usize>,
    /// Loop `i` as a vertex list starting and ending at the basepoint.
    pub loops: Vec<Vec<Pt>>,
    /// Every point the paths must avoid (critical values, apparent singularities, poles of forms).
    pub obstacles: Vec<Pt>,
    /// Smallest distance between two obstacles.
    pub min_gap: f64,
}

const CIRCLE_VERTICES: usize = 8;

/// Build the loops. `obstacles` must contain the critical values.
pub fn build_distinguished_loops(critical: &[Pt], obstacles: &[Pt], basepoint: Option<Pt>, rho: f64) -> PathPlan {
    // Critical values usually reappear among the obstacles, computed separately.
    let same = |a: Pt, b: Pt| a.dist(b) <= 1e-12 * a.norm().max(b.norm()).max(1.0);
    let mut all: Vec<Pt> = critical.to_vec();
    for o in obstacles {
        if !all.iter().any(|c| same(*c, *o)) {
            all.push(*o);
        }
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            min_gap = min_gap.min(all[i].dist(all[j]));
        }
    }
    if !min_gap.is_finite() {
        min_gap = 1.0f64.max(all.first().map_or(1.0, |p| p.norm()));
    }
    let radius: Vec<f64> = critical
        .iter()
        .map(|c| {
            let g = all.iter().filter(|o| o.dist(*c) > 0.0).map(|o| o.dist(*c)).fold(f64::INFINITY, f64::min);
            if g.is_finite() { g / 3.0 } else { min_gap / 3.0 }
        })
        .collect();
    let b = basepoint.unwrap_or_else(|| choose_basepoint(critical, &radius, &all, rho * min_gap));
    let mut order: Vec<usize> = (0..critical.len()).collect();
    order.sort_by(|&i, &j| {
        let (di, dj) = (critical[i].sub(b), critical[j].sub(b));
        // Angles from a lower-left basepoint lie in (-pi/2, pi]; compare directly.
        di.arg().partial_cmp(&dj.arg()).unwrap().then(di.norm().partial_cmp(&dj.norm()).unwrap())
    });
    let loops = order.iter().map(|&i| lasso(b, critical[i], radius[i])).collect();
    PathPlan { basepoint: b, points: order.iter().map(|&i| critical[i]).collect(), order, loops, obstacles: all, min_gap }
}

fn lasso(b: Pt, c: Pt, r: f64) -> Vec<Pt> {
    let u = c.sub(b).scale(1.0 / c.dist(b));
    let start = c.sub(u.scale(r));
    let th0 = start.sub(c).arg();
    let mut v = vec![b, start];
    for k in 1..CIRCLE_VERTICES {
        let th = th0 + 2.0 * std::f64::consts::PI * k as f64 / CIRCLE_VERTICES as f64;
        v.push(Pt::new(c.re + r * th.cos(), c.im + r * th.sin()));
    }
    v.push(start);
    v.push(b);
    v
}

/// Smallest distance from an obstacle to a spoke it does not end at.
fn clearance(b: Pt, critical: &[Pt], radius: &[f64], all: &[Pt]) -> f64 {
    let mut best = f64::INFINITY;
    for (c, r) in critical.iter().zip(radius) {
        let d = c.dist(b);
        if d <= *r {
            return 0.0;
        }
        let end = c.sub(c.sub(b).scale(r / d));
        for o in all {
            if o.dist(*c) == 0.0 {
                continue;
            }
            best = best.min(segment_distance(*o, b, end));
        }
        best = best.min(d - r);
    }
    best
}

/// Prefer a real basepoint to the left of everything; otherwise search the lower-left
/// region for the point whose spokes stay furthest from the other singular points.
fn choose_basepoint(critical: &[Pt], radius: &[f64], all: &[Pt], wanted: f64) -> Pt {
    let xmin = all.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
    let xmax = all.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
    let ymin = all.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
    let ymax = all.iter().map(|p| p.im).fold(f64::NEG_INFINITY, f64::max);
    let diam = (xmax - xmin).max(ymax - ymin).max(1.0);
    let round = |x: f64| (x * 64.0).round() / 64.0;
    let real_candidates = [1.0, 2.0].map(|s| Pt::new(round(xmin - s * diam), 0.0));
    for b in real_candidates {
        if ymin >= 0.0 && clearance(b, critical, radius, all) >= wanted {
            return b;
        }
    }
    let corner = Pt::new(xmin, ymin);
    let mut best = (f64::NEG_INFINITY, corner);
    for s in [0.5, 1.0, 2.0] {
        for k in 0..=32 {
            let phi = std::f64::consts::PI * (1.0 + 0.5 * k as f64 / 32.0);
            let b = Pt::new(round(corner.re + s * diam * phi.cos()), round(corner.im + s * diam * phi.sin()));
            let c = clearance(b, critical, radius, all);
            if c > best.0 {
                best = (c, b);
            }
        }
    }
    best.1
}

/// Winding number of a closed polyline around `p`.
pub fn winding_number(path: &[Pt], p: Pt) -> i64 {
    let mut total = 0.0;
    for w in path.windows(2) {
        let a = w[0].sub(p).arg();
        let b = w[1].sub(p).arg();
        let mut d = b - a;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        total += d;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loops_wind_once_around_their_point_only() {
        let crit = [Pt::new(0.0, 0.0), Pt::new(1.0, 0.0), Pt::new(0.5, 0.7)];
        let plan = build_distinguished_loops(&crit, &crit, None, 0.25);
        for (l, p) in plan.loops.iter().zip(&plan.points) {
            for q in &crit {
                let w = winding_number(l, *q);
                assert_eq!(w, if q == p { 1 } else { 0 });
            }
        }
        let all: Vec<Pt> = plan.loops.concat();
        for q in &crit {
            assert_eq!(winding_number(&all, *q), 1);
        }
    }

    #[test]
    fn collinear_points_get_separated_spokes() {
        let crit = [Pt::new(0.0, 0.0), Pt::new(1.0, 0.0)];
        let plan = build_distinguished_loops(&crit, &crit, None, 0.25);
        let c = clearance(plan.basepoint, &plan.points, &[1.0 / 3.0; 2], &crit);
        assert!(c >= 0.25, "clearance {c}");
    }
}
