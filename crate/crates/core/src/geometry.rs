//! Metric geometry on the unit cube: distances, neighbor search, minimum
//! enclosing balls, and greedy epsilon-nets.

use alloc::vec::Vec;

use crate::sampling::PointCloud;
use crate::{invalid, math, unsupported, Result};

/// Distance convention on the unit cube.
///
/// `CubeEuclidean` is the restriction of Euclidean distance to `[0,1]^d`.
/// `FlatTorus` identifies opposite faces: each coordinate difference is
/// reduced to `min(|a-b|, 1-|a-b|)` before the Euclidean sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    CubeEuclidean,
    FlatTorus,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::CubeEuclidean => "cube",
            Metric::FlatTorus => "torus",
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() || a.is_empty() {
            return Err(invalid("distance arguments must share a positive dimension"));
        }
        Ok(self.distance_unchecked(a, b))
    }

    #[inline]
    pub(crate) fn distance_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        math::sqrt(self.distance_sq(a, b))
    }

    #[inline]
    pub(crate) fn distance_sq(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut sum = 0.0;
        match self {
            Metric::CubeEuclidean => {
                for (x, y) in a.iter().zip(b) {
                    let d = x - y;
                    sum += d * d;
                }
            }
            Metric::FlatTorus => {
                for (x, y) in a.iter().zip(b) {
                    let mut d = math::abs(x - y);
                    if d > 0.5 {
                        d = 1.0 - d;
                    }
                    sum += d * d;
                }
            }
        }
        sum
    }
}

/// All unordered point pairs at distance at most `2 * r_max`, as
/// `(i, j, distance)` with `i < j`, sorted by `(i, j)`.
///
/// This is the edge set of the geometric graph underlying both filtration
/// flavors at radius cap `r_max` (an edge enters a radius filtration at half
/// its length, hence the factor two).
pub fn neighbor_pairs(cloud: &PointCloud, r_max: f64) -> Result<Vec<(u32, u32, f64)>> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(invalid("r_max must be positive and finite"));
    }
    let n = cloud.len();
    if n > u32::MAX as usize {
        return Err(invalid("too many points"));
    }
    let threshold = 2.0 * r_max;
    let metric = cloud.metric();
    let dim = cloud.dim();

    let cells_per_axis = if threshold >= 1.0 {
        1
    } else {
        math::floor(1.0 / threshold) as usize
    };
    let mut pairs = if cells_per_axis < 4 || dim > 6 {
        brute_force_pairs(cloud, threshold)
    } else {
        grid_pairs(cloud, threshold, cells_per_axis)
    };
    pairs.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let _ = (metric, dim);
    Ok(pairs)
}

fn brute_force_pairs(cloud: &PointCloud, threshold: f64) -> Vec<(u32, u32, f64)> {
    let metric = cloud.metric();
    let t2 = threshold * threshold;
    let mut out = Vec::new();
    for i in 0..cloud.len() {
        for j in i + 1..cloud.len() {
            let d2 = metric.distance_sq(cloud.point(i), cloud.point(j));
            if d2 <= t2 {
                out.push((i as u32, j as u32, math::sqrt(d2)));
            }
        }
    }
    out
}

/// Uniform-grid bucketing: cell side >= threshold, so all partners of a point
/// lie in its 3^d cell neighborhood (wrapping on the torus).
fn grid_pairs(cloud: &PointCloud, threshold: f64, g: usize) -> Vec<(u32, u32, f64)> {
    let n = cloud.len();
    let dim = cloud.dim();
    let metric = cloud.metric();
    let torus = metric == Metric::FlatTorus;
    let t2 = threshold * threshold;

    let cell_of = |p: &[f64]| -> u64 {
        let mut id = 0u64;
        for &x in p {
            let c = (math::floor(x * g as f64) as usize).min(g - 1);
            id = id * g as u64 + c as u64;
        }
        id
    };

    // bucket points by cell id
    let mut order: Vec<u32> = (0..n as u32).collect();
    let ids: Vec<u64> = (0..n).map(|i| cell_of(cloud.point(i))).collect();
    order.sort_unstable_by_key(|&i| ids[i as usize]);
    let mut starts: Vec<(u64, usize, usize)> = Vec::new(); // (cell, begin, end) in order
    let mut begin = 0;
    while begin < n {
        let id = ids[order[begin] as usize];
        let mut end = begin + 1;
        while end < n && ids[order[end] as usize] == id {
            end += 1;
        }
        starts.push((id, begin, end));
        begin = end;
    }
    let find_cell = |id: u64| -> Option<(usize, usize)> {
        starts
            .binary_search_by_key(&id, |s| s.0)
            .ok()
            .map(|k| (starts[k].1, starts[k].2))
    };

    let mut out = Vec::new();
    let mut coord = alloc::vec![0i64; dim];
    let mut offset = alloc::vec![-1i64; dim];
    for i in 0..n {
        let p = cloud.point(i);
        for (a, &x) in p.iter().enumerate() {
            coord[a] = (math::floor(x * g as f64) as i64).min(g as i64 - 1);
        }
        for o in offset.iter_mut() {
            *o = -1;
        }
        'cells: loop {
            // neighbor cell id for this offset, if valid
            let mut id = Some(0u64);
            for a in 0..dim {
                let mut c = coord[a] + offset[a];
                if torus {
                    c = c.rem_euclid(g as i64);
                } else if c < 0 || c >= g as i64 {
                    id = None;
                    break;
                }
                id = id.map(|v| v * g as u64 + c as u64);
            }
            if let Some(id) = id {
                if let Some((b, e)) = find_cell(id) {
                    for &j in &order[b..e] {
                        if j as usize > i {
                            let d2 = metric.distance_sq(p, cloud.point(j as usize));
                            if d2 <= t2 {
                                out.push((i as u32, j, math::sqrt(d2)));
                            }
                        }
                    }
                }
            }
            // advance offset through {-1,0,1}^d
            for a in (0..dim).rev() {
                offset[a] += 1;
                if offset[a] <= 1 {
                    continue 'cells;
                }
                offset[a] = -1;
            }
            break;
        }
    }
    out
}

/// A closed ball. The center may lie outside the unit cube (for flat-torus
/// input it is expressed in the fundamental domain around the first point).
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

const MEB_REL_TOL: f64 = 1e-12;

/// Minimum enclosing ball of `coords` (row-major, `len = k * dim`).
///
/// Euclidean input runs Welzl's move-to-front recursion with support sets of
/// at most `dim + 1` points. Flat-torus input is first translated into the
/// fundamental domain centered on the first point, which is a valid chart
/// only while the point set has diameter below 1/4; wider sets are rejected
/// as unsupported.
pub fn min_enclosing_ball(coords: &[f64], dim: usize, metric: Metric) -> Result<Ball> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if coords.is_empty() {
        return Err(invalid("enclosing ball of an empty point set"));
    }
    if coords.len() % dim != 0 {
        return Err(invalid("coordinate count is not a multiple of the dimension"));
    }
    let k = coords.len() / dim;
    match metric {
        Metric::CubeEuclidean => Ok(welzl(coords, dim)),
        Metric::FlatTorus => {
            for i in 0..k {
                let a = &coords[i * dim..(i + 1) * dim];
                for j in i + 1..k {
                    let b = &coords[j * dim..(j + 1) * dim];
                    if Metric::FlatTorus.distance_sq(a, b) >= 0.0625 {
                        return Err(unsupported(
                            "flat-torus point set has diameter >= 1/4",
                        ));
                    }
                }
            }
            let anchor = &coords[..dim];
            let mut translated = Vec::with_capacity(coords.len());
            for i in 0..k {
                for a in 0..dim {
                    let mut rel = coords[i * dim + a] - anchor[a];
                    rel -= math::floor(rel + 0.5);
                    translated.push(anchor[a] + rel);
                }
            }
            Ok(welzl(&translated, dim))
        }
    }
}

fn welzl(coords: &[f64], dim: usize) -> Ball {
    let k = coords.len() / dim;
    let mut idx: Vec<usize> = (0..k).collect();
    let mut support: Vec<usize> = Vec::with_capacity(dim + 1);
    let mut ball = welzl_rec(coords, dim, &mut idx, k, &mut support);
    // Guarantee containment outright; this is a no-op up to rounding.
    let mut max_d2 = 0.0f64;
    for i in 0..k {
        let d2 = Metric::CubeEuclidean.distance_sq(&ball.center, &coords[i * dim..(i + 1) * dim]);
        if d2 > max_d2 {
            max_d2 = d2;
        }
    }
    let max_d = math::sqrt(max_d2);
    if max_d > ball.radius {
        ball.radius = max_d;
    }
    ball
}

fn welzl_rec(
    coords: &[f64],
    dim: usize,
    idx: &mut Vec<usize>,
    n: usize,
    support: &mut Vec<usize>,
) -> Ball {
    if n == 0 || support.len() == dim + 1 {
        return ball_from_support(coords, dim, support);
    }
    let p = idx[n - 1];
    let ball = welzl_rec(coords, dim, idx, n - 1, support);
    if contains(&ball, &coords[p * dim..(p + 1) * dim]) {
        return ball;
    }
    support.push(p);
    let ball = welzl_rec(coords, dim, idx, n - 1, support);
    support.pop();
    // move-to-front: points that forced a support extension are tried early
    idx.copy_within(0..n - 1, 1);
    idx[0] = p;
    ball
}

#[inline]
fn contains(ball: &Ball, p: &[f64]) -> bool {
    if ball.radius < 0.0 {
        return false;
    }
    let d2 = Metric::CubeEuclidean.distance_sq(&ball.center, p);
    d2 <= ball.radius * ball.radius * (1.0 + MEB_REL_TOL) + 1e-30
}

/// Smallest ball with all support points on its boundary: the circumsphere
/// within the affine hull of the support.
fn ball_from_support(coords: &[f64], dim: usize, support: &[usize]) -> Ball {
    match support.len() {
        0 => Ball {
            center: alloc::vec![0.0; dim],
            radius: -1.0,
        },
        1 => Ball {
            center: coords[support[0] * dim..(support[0] + 1) * dim].to_vec(),
            radius: 0.0,
        },
        m => {
            let p0 = &coords[support[0] * dim..(support[0] + 1) * dim];
            // Gram system: (v_i . v_j) lambda_j = |v_i|^2 / 2
            let mut gram = alloc::vec![0.0f64; (m - 1) * (m - 1)];
            let mut rhs = alloc::vec![0.0f64; m - 1];
            let v = |i: usize, a: usize| coords[support[i + 1] * dim + a] - p0[a];
            for i in 0..m - 1 {
                for j in 0..m - 1 {
                    let mut dot = 0.0;
                    for a in 0..dim {
                        dot += v(i, a) * v(j, a);
                    }
                    gram[i * (m - 1) + j] = dot;
                }
                rhs[i] = gram[i * (m - 1) + i] / 2.0;
            }
            match solve_spd(&mut gram, &mut rhs, m - 1) {
                Some(lambda) => {
                    let mut center = p0.to_vec();
                    for (i, &l) in lambda.iter().enumerate() {
                        for a in 0..dim {
                            center[a] += l * v(i, a);
                        }
                    }
                    let radius = Metric::CubeEuclidean.distance_unchecked(&center, p0);
                    Ball { center, radius }
                }
                // Affinely dependent support (duplicate or degenerate input):
                // fall back to the ball of the reduced support.
                None => ball_from_support(coords, dim, &support[1..]),
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` on (near-)singularity.
fn solve_spd(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let mut scale = 0.0f64;
    for v in a.iter() {
        scale = scale.max(math::abs(*v));
    }
    let tiny = scale * 1e-14 + 1e-300;
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if math::abs(a[row * n + col]) > math::abs(a[piv * n + col]) {
                piv = row;
            }
        }
        if math::abs(a[piv * n + col]) <= tiny {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            b.swap(piv, col);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            for c in col..n {
                a[row * n + c] -= f * a[col * n + c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = alloc::vec![0.0f64; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in col + 1..n {
            s -= a[col * n + c] * x[c];
        }
        x[col] = s / a[col * n + col];
    }
    Some(x)
}

/// Greedy epsilon-net in ascending index order: a point joins the net when no
/// earlier net point lies within `eps` of it. The result is both an
/// `eps`-cover (every cloud point within `eps` of the net) and an
/// `eps`-packing (net points pairwise at least `eps` apart).
pub fn epsilon_net(cloud: &PointCloud, eps: f64) -> Result<Vec<u32>> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid("eps must be positive and finite"));
    }
    let metric = cloud.metric();
    let eps2 = eps * eps;
    let mut net: Vec<u32> = Vec::new();
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        let covered = net
            .iter()
            .any(|&s| metric.distance_sq(cloud.point(s as usize), p) < eps2);
        if !covered {
            net.push(i as u32);
        }
    }
    Ok(net)
}
