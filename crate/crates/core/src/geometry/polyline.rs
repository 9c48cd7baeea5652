use super::{cis, dot, Point};

const LEAF: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Node {
    lo: Point,
    hi: Point,
    // Segment range [first, first + count); inner nodes also carry child indices.
    first: u32,
    count: u32,
    left: u32,
    right: u32,
}

/// Inscribed polyline of a polar graph with a bounding-volume hierarchy for
/// nearest-point queries.
#[derive(Debug, Clone)]
pub struct Polyline {
    vertices: Vec<Point>,
    nodes: Vec<Node>,
    hausdorff: f64,
}

fn segment_nearest(p: Point, a: Point, b: Point) -> (f64, Point) {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let t = if len2 > 0.0 {
        (dot(p - a, ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = a + ab * t;
    ((p - q).norm_sqr().sqrt(), q)
}

impl Polyline {
    /// Samples `t ↦ radius(t) e^{it}` on `[t0, t1]` adaptively until every
    /// segment deviates from the curve by at most `tol`. `breaks` are extra
    /// parameters that must be vertices (kinks of the radius function).
    pub fn from_polar<F: Fn(f64) -> f64>(radius: F, t0: f64, t1: f64, breaks: &[f64], tol: f64) -> Self {
        let point = |t: f64| cis(t) * radius(t);
        let mut knots = vec![t0];
        knots.extend(breaks.iter().copied().filter(|&b| b > t0 && b < t1));
        knots.push(t1);
        // Seed with a uniform grid so no feature hides between samples.
        let mut params = Vec::new();
        for w in knots.windows(2) {
            let m = 16;
            for i in 0..m {
                params.push(w[0] + (w[1] - w[0]) * i as f64 / m as f64);
            }
        }
        params.push(t1);

        let deviation = |ta: f64, tb: f64| -> f64 {
            let (a, b) = (point(ta), point(tb));
            (1..8)
                .map(|i| {
                    let t = ta + (tb - ta) * i as f64 / 8.0;
                    segment_nearest(point(t), a, b).0
                })
                .fold(0.0, f64::max)
        };

        let mut out = vec![t0];
        let mut stack: Vec<(f64, f64)> = Vec::new();
        for w in params.windows(2).rev() {
            stack.push((w[0], w[1]));
        }
        let mut worst: f64 = 0.0;
        while let Some((ta, tb)) = stack.pop() {
            let dev = deviation(ta, tb);
            if dev > 0.8 * tol && tb - ta > 1e-12 {
                let tm = 0.5 * (ta + tb);
                stack.push((tm, tb));
                stack.push((ta, tm));
            } else {
                worst = worst.max(dev);
                out.push(tb);
            }
        }
        let vertices: Vec<Point> = out.iter().map(|&t| point(t)).collect();
        let mut pl = Self {
            vertices,
            nodes: Vec::new(),
            hausdorff: worst * 1.1,
        };
        pl.build();
        pl
    }

    fn build(&mut self) {
        let nseg = self.vertices.len().saturating_sub(1);
        if nseg == 0 {
            return;
        }
        self.nodes.clear();
        self.build_node(0, nseg);
    }

    fn build_node(&mut self, first: usize, end: usize) -> u32 {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices[first..=end] {
            lo.re = lo.re.min(v.re);
            lo.im = lo.im.min(v.im);
            hi.re = hi.re.max(v.re);
            hi.im = hi.im.max(v.im);
        }
        let idx = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            first: first as u32,
            count: (end - first) as u32,
            left: u32::MAX,
            right: u32::MAX,
        });
        if end - first > LEAF {
            let mid = (first + end) / 2;
            let l = self.build_node(first, mid);
            let r = self.build_node(mid, end);
            self.nodes[idx].left = l;
            self.nodes[idx].right = r;
        }
        idx as u32
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Upper bound on the distance between the curve and the polyline.
    pub fn hausdorff(&self) -> f64 {
        self.hausdorff
    }

    /// Distance from `p` to the polyline and the nearest polyline point.
    pub fn nearest(&self, p: Point) -> (f64, Point) {
        let mut best = (f64::INFINITY, self.vertices[0]);
        if self.nodes.is_empty() {
            return ((p - self.vertices[0]).norm(), self.vertices[0]);
        }
        let mut stack = [0u32; 64];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            let dx = (node.lo.re - p.re).max(p.re - node.hi.re).max(0.0);
            let dy = (node.lo.im - p.im).max(p.im - node.hi.im).max(0.0);
            if dx * dx + dy * dy >= best.0 * best.0 {
                continue;
            }
            if node.left == u32::MAX {
                let f = node.first as usize;
                for s in f..f + node.count as usize {
                    let cand = segment_nearest(p, self.vertices[s], self.vertices[s + 1]);
                    if cand.0 < best.0 {
                        best = cand;
                    }
                }
            } else {
                stack[sp] = node.left;
                stack[sp + 1] = node.right;
                sp += 2;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_polyline_within_tolerance() {
        let pl = Polyline::from_polar(|_| 0.7, -PI, PI, &[], 1e-5);
        assert!(pl.hausdorff() <= 1e-5 * 1.1);
        // Sagitta of a chord of angle Δ is r(1 - cos(Δ/2)).
        for w in pl.vertices().windows(2) {
            let d = (w[1].arg() - w[0].arg()).rem_euclid(2.0 * PI);
            assert!(0.7 * (1.0 - (d / 2.0).cos()) <= 1e-5);
        }
    }

    #[test]
    fn nearest_matches_brute_force() {
        let pl = Polyline::from_polar(|t: f64| 0.5 + 0.3 * t.abs(), -1.0, 1.0, &[0.0], 1e-5);
        for i in 0..200 {
            let p = cis(i as f64 * 0.37) * (0.1 + 0.004 * i as f64);
            let brute = pl
                .vertices()
                .windows(2)
                .map(|w| segment_nearest(p, w[0], w[1]).0)
                .fold(f64::INFINITY, f64::min);
            assert!((pl.nearest(p).0 - brute).abs() < 1e-15);
        }
    }
}
