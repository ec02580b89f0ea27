use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::effective::m_prime;

/// A contour traced through the periodic (k_y, k_z) zone. Coordinates are
/// unwrapped along the curve, so a loop around the zone corner stays
/// continuous and may leave [−π, π).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NodalLoci {
    /// Band touchings in the k_x = +π/2 plane, where m' = −2t'0.
    pub plus: Vec<Polyline>,
    /// Band touchings in the k_x = −π/2 plane, where m' = +2t'0.
    pub minus: Vec<Polyline>,
}

impl NodalLoci {
    pub fn is_empty(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }
}

pub fn nodal_loci(big_m: f64, d: f64, t0: f64, resolution: usize) -> NodalLoci {
    let n = resolution.max(4);
    NodalLoci { plus: contour(big_m, d, -2.0 * t0, n), minus: contour(big_m, d, 2.0 * t0, n) }
}

// Edge ids: 2·(i·n + j) for the edge from node (i, j) to (i+1, j),
// 2·(i·n + j) + 1 for the edge from (i, j) to (i, j+1).
fn contour(big_m: f64, d: f64, level: f64, n: usize) -> Vec<Polyline> {
    let h = 2.0 * PI / n as f64;
    let x = |i: usize| -PI + h * i as f64;
    let f = |ky: f64, kz: f64| m_prime(big_m, d, ky, kz) - level;
    let vals: Vec<f64> = (0..n * n).map(|k| f(x(k / n), x(k % n))).collect();
    let pos = |i: usize, j: usize| vals[(i % n) * n + (j % n)] >= 0.0;

    let mut links: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut join = |a: usize, b: usize| {
        links.entry(a).or_default().push(b);
        links.entry(b).or_default().push(a);
    };
    for i in 0..n {
        for j in 0..n {
            let s = [pos(i, j), pos(i + 1, j), pos(i + 1, j + 1), pos(i, j + 1)];
            let e = [
                2 * (i * n + j),
                2 * (((i + 1) % n) * n + j) + 1,
                2 * (i * n + (j + 1) % n),
                2 * (i * n + j) + 1,
            ];
            let cut: Vec<usize> = (0..4).filter(|&k| s[k] != s[(k + 1) % 4]).collect();
            match cut.len() {
                2 => join(e[cut[0]], e[cut[1]]),
                4 => {
                    let centre = f(x(i) + h / 2.0, x(j) + h / 2.0) >= 0.0;
                    if centre == s[0] {
                        join(e[0], e[1]);
                        join(e[2], e[3]);
                    } else {
                        join(e[3], e[0]);
                        join(e[1], e[2]);
                    }
                }
                _ => {}
            }
        }
    }

    let crossing = |id: usize| -> [f64; 2] {
        let node = id / 2;
        let (i, j) = (node / n, node % n);
        let (a, b) = if id % 2 == 0 { ([x(i), x(j)], [x(i) + h, x(j)]) } else { ([x(i), x(j)], [x(i), x(j) + h]) };
        bisect(&f, a, b)
    };

    let mut keys: Vec<usize> = links.keys().copied().collect();
    keys.sort_unstable();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for start in keys {
        if !seen.insert(start) {
            continue;
        }
        let mut chain = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        let closed;
        loop {
            let next = links[&cur].iter().copied().find(|&e| e != prev && !seen.contains(&e));
            match next {
                Some(e) => {
                    seen.insert(e);
                    chain.push(e);
                    prev = cur;
                    cur = e;
                }
                None => {
                    closed = links[&cur].contains(&start) && chain.len() > 2;
                    break;
                }
            }
        }
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(chain.len());
        for id in chain {
            let mut p = crossing(id);
            if let Some(last) = pts.last() {
                for c in 0..2 {
                    p[c] += 2.0 * PI * ((last[c] - p[c]) / (2.0 * PI)).round();
                }
            }
            pts.push(p);
        }
        out.push(Polyline { points: pts, closed });
    }
    out
}

fn bisect(f: &impl Fn(f64, f64) -> f64, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let at = |s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
    let val = |s: f64| {
        let p = at(s);
        f(p[0], p[1])
    };
    let f_lo = val(lo);
    if f_lo == 0.0 {
        return at(lo);
    }
    if val(hi) == 0.0 {
        return at(hi);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let v = val(mid);
        if v == 0.0 {
            return at(mid);
        }
        if (v >= 0.0) == (f_lo >= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}
