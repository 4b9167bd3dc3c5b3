//! Radius-capped Čech and Vietoris–Rips filtrations.
//!
//! Both flavors use the radius convention: a simplex enters the Čech
//! filtration at the radius of the minimum enclosing ball of its vertices,
//! and the Rips filtration at half its vertex diameter. Edges therefore
//! carry identical values in both flavors, and at every cap the Čech complex
//! is a subcomplex of the Rips complex with `rips <= cech <= 2 * rips`
//! simplexwise.
//!
//! Simplices are stored in one flat, immutable array sorted by
//! `(value, dimension, lexicographic vertex list)`, which is the insertion
//! order the persistence module consumes.

use alloc::vec::Vec;

use crate::geometry::{neighbor_pairs, Metric};
use crate::sampling::PointCloud;
use crate::{invalid, math, unsupported, Result};

/// Largest radius cap a flat-torus filtration accepts: beyond 1/8 an
/// enclosing ball could wrap around the torus and stop being unique.
pub const TORUS_RMAX_CAP: f64 = 0.125;

/// Filtration flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Cech,
    Rips,
}

impl Flavor {
    pub fn name(&self) -> &'static str {
        match self {
            Flavor::Cech => "cech",
            Flavor::Rips => "rips",
        }
    }
}

/// An abstract simplex: strictly ascending vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Simplex {
    vertices: Vec<u32>,
}

impl Simplex {
    pub fn new(vertices: Vec<u32>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(invalid("a simplex needs at least one vertex"));
        }
        if !vertices.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("simplex vertices must be strictly ascending"));
        }
        Ok(Simplex { vertices })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// A finite filtered simplicial complex in its insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex {
    flavor: Flavor,
    r_max: f64,
    max_dim: usize,
    n_points: usize,
    values: Vec<f64>,
    dims: Vec<u8>,
    verts: Vec<u32>,
    offsets: Vec<usize>,
}

impl FilteredComplex {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    #[inline]
    pub fn dim(&self, i: usize) -> usize {
        self.dims[i] as usize
    }

    #[inline]
    pub fn vertices(&self, i: usize) -> &[u32] {
        &self.verts[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[u32])> + '_ {
        (0..self.len()).map(move |i| (self.values[i], self.vertices(i)))
    }

    /// Assemble a complex verbatim, bypassing construction and ordering.
    /// Exists so tests can feed malformed filtrations to the validators.
    #[cfg(test)]
    pub(crate) fn from_raw_parts(
        flavor: Flavor,
        r_max: f64,
        max_dim: usize,
        n_points: usize,
        entries: &[(f64, &[u32])],
    ) -> FilteredComplex {
        let mut values = Vec::new();
        let mut dims = Vec::new();
        let mut verts = Vec::new();
        let mut offsets = alloc::vec![0];
        for (v, vs) in entries {
            values.push(*v);
            dims.push((vs.len() - 1) as u8);
            verts.extend_from_slice(vs);
            offsets.push(verts.len());
        }
        FilteredComplex {
            flavor,
            r_max,
            max_dim,
            n_points,
            values,
            dims,
            verts,
            offsets,
        }
    }
}

/// Default radius cap `c * (log n / n)^(1/d)` (natural log), clamped to 1/8
/// on the flat torus where larger caps would leave enclosing balls ambiguous.
pub fn default_rmax(n: f64, dim: usize, c: f64, metric: Metric) -> Result<f64> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(n > core::f64::consts::E) || !n.is_finite() {
        return Err(invalid("intensity must exceed e for a meaningful cap"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid("multiplier c must be positive"));
    }
    let r = c * math::powf(math::ln(n) / n, 1.0 / dim as f64);
    Ok(match metric {
        Metric::CubeEuclidean => r,
        Metric::FlatTorus => r.min(TORUS_RMAX_CAP),
    })
}

pub fn build_rips(cloud: &PointCloud, r_max: f64, max_dim: usize) -> Result<FilteredComplex> {
    build(cloud, r_max, max_dim, Flavor::Rips)
}

pub fn build_cech(cloud: &PointCloud, r_max: f64, max_dim: usize) -> Result<FilteredComplex> {
    build(cloud, r_max, max_dim, Flavor::Cech)
}

fn build(cloud: &PointCloud, r_max: f64, max_dim: usize, flavor: Flavor) -> Result<FilteredComplex> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(invalid("r_max must be positive and finite"));
    }
    if max_dim == 0 {
        return Err(invalid("max_dim must be at least 1"));
    }
    if cloud.metric() == Metric::FlatTorus && r_max > TORUS_RMAX_CAP {
        return Err(unsupported(
            "flat-torus filtrations require r_max <= 1/8",
        ));
    }

    let n = cloud.len();
    let dim = cloud.dim();
    let metric = cloud.metric();
    let pairs = neighbor_pairs(cloud, r_max)?;

    // neighbor lists above each vertex, ascending, with pair distances
    let mut adj: Vec<Vec<(u32, f64)>> = alloc::vec![Vec::new(); n];
    for &(i, j, d) in &pairs {
        adj[i as usize].push((j, d));
    }

    // per-dimension simplex bins; emission below keeps each bin lex-sorted
    let mut bin_values: Vec<Vec<f64>> = alloc::vec![Vec::new(); max_dim + 1];
    let mut bin_verts: Vec<Vec<u32>> = alloc::vec![Vec::new(); max_dim + 1];
    bin_values[0] = alloc::vec![0.0; n];
    bin_verts[0] = (0..n as u32).collect();
    for &(i, j, d) in &pairs {
        bin_values[1].push(d / 2.0);
        bin_verts[1].push(i);
        bin_verts[1].push(j);
    }

    if max_dim >= 2 {
        let mut expander = Expander {
            cloud,
            metric,
            dim,
            r_max,
            flavor,
            adj: &adj,
            cand: alloc::vec![Vec::new(); max_dim + 1],
            simplex: Vec::with_capacity(max_dim + 1),
            coords: Vec::with_capacity((max_dim + 1) * dim),
            meb: MebScratch::default(),
            bin_values: &mut bin_values,
            bin_verts: &mut bin_verts,
        };
        expander.run(max_dim);
    }

    // Čech values are clamped to each simplex's facet maximum so that
    // monotonicity holds exactly despite enclosing-ball rounding.
    if flavor == Flavor::Cech {
        for q in 2..=max_dim {
            let facet_verts = &bin_verts[q - 1];
            let verts = &bin_verts[q];
            let (vals_lower, vals_upper) = bin_values.split_at_mut(q);
            let facet_values = &vals_lower[q - 1];
            let values = &mut vals_upper[0];
            let mut facet = alloc::vec![0u32; q];
            for (s, v) in values.iter_mut().enumerate() {
                let vs = &verts[s * (q + 1)..(s + 1) * (q + 1)];
                for drop in 0..=q {
                    let mut t = 0;
                    for (a, &x) in vs.iter().enumerate() {
                        if a != drop {
                            facet[t] = x;
                            t += 1;
                        }
                    }
                    let pos = lex_search(facet_verts, q, &facet)
                        .expect("expansion emits closed complexes");
                    if facet_values[pos] > *v {
                        *v = facet_values[pos];
                    }
                }
            }
        }
    }

    // merge bins into the global (value, dim, lex) order
    let total: usize = bin_values.iter().map(|b| b.len()).sum();
    if total >= u32::MAX as usize {
        return Err(invalid("complex exceeds the supported simplex count"));
    }
    let mut handles: Vec<u64> = Vec::with_capacity(total);
    for (q, b) in bin_values.iter().enumerate() {
        for s in 0..b.len() {
            handles.push(((q as u64) << 40) | s as u64);
        }
    }
    let key = |h: u64| -> (f64, usize, usize) {
        let q = (h >> 40) as usize;
        let s = (h & ((1u64 << 40) - 1)) as usize;
        (bin_values[q][s], q, s)
    };
    handles.sort_unstable_by(|&a, &b| {
        let (va, qa, sa) = key(a);
        let (vb, qb, sb) = key(b);
        va.total_cmp(&vb).then_with(|| qa.cmp(&qb)).then_with(|| {
            let xs = &bin_verts[qa][sa * (qa + 1)..(sa + 1) * (qa + 1)];
            let ys = &bin_verts[qb][sb * (qb + 1)..(sb + 1) * (qb + 1)];
            xs.cmp(ys)
        })
    });

    let mut values = Vec::with_capacity(total);
    let mut dims = Vec::with_capacity(total);
    let mut verts = Vec::new();
    let mut offsets = Vec::with_capacity(total + 1);
    offsets.push(0);
    for &h in &handles {
        let (v, q, s) = key(h);
        values.push(v);
        dims.push(q as u8);
        verts.extend_from_slice(&bin_verts[q][s * (q + 1)..(s + 1) * (q + 1)]);
        offsets.push(verts.len());
    }

    Ok(FilteredComplex {
        flavor,
        r_max,
        max_dim,
        n_points: n,
        values,
        dims,
        verts,
        offsets,
    })
}

/// Binary search for a vertex tuple in a lex-sorted flat bin of `q`-tuples.
pub(crate) fn lex_search(flat: &[u32], q: usize, target: &[u32]) -> Option<usize> {
    debug_assert_eq!(target.len(), q);
    let count = flat.len() / q;
    let mut lo = 0;
    let mut hi = count;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match flat[mid * q..(mid + 1) * q].cmp(target) {
            core::cmp::Ordering::Less => lo = mid + 1,
            core::cmp::Ordering::Greater => hi = mid,
            core::cmp::Ordering::Equal => return Some(mid),
        }
    }
    None
}

/// Depth-first clique expansion over the neighbor graph. Candidate lists are
/// ordered intersections of neighbor lists; each candidate entry carries the
/// max distance to the current simplex so Rips values need no recomputation.
struct Expander<'a> {
    cloud: &'a PointCloud,
    metric: Metric,
    dim: usize,
    r_max: f64,
    flavor: Flavor,
    adj: &'a [Vec<(u32, f64)>],
    cand: Vec<Vec<(u32, f64)>>,
    simplex: Vec<u32>,
    coords: Vec<f64>,
    meb: MebScratch,
    bin_values: &'a mut Vec<Vec<f64>>,
    bin_verts: &'a mut Vec<Vec<u32>>,
}

impl<'a> Expander<'a> {
    fn run(&mut self, max_dim: usize) {
        let adj = self.adj;
        let cloud = self.cloud;
        for i in 0..cloud.len() {
            for e in 0..adj[i].len() {
                let (j, d) = adj[i][e];
                self.simplex.clear();
                self.simplex.push(i as u32);
                self.simplex.push(j);
                self.coords.clear();
                self.coords.extend_from_slice(cloud.point(i));
                self.coords.extend_from_slice(cloud.point(j as usize));
                // candidates of the edge: common upper neighbors of i and j
                merge_candidates(&adj[i][e + 1..], &adj[j as usize], &mut self.cand[2]);
                self.extend(2, d / 2.0, max_dim);
            }
        }
    }

    /// Extend the current simplex (size `size`, value `value`) by every
    /// candidate in scratch slot `size`.
    fn extend(&mut self, size: usize, value: f64, max_dim: usize) {
        let adj = self.adj;
        let cloud = self.cloud;
        for k in 0..self.cand[size].len() {
            let (w, maxd) = self.cand[size][k];
            let child_value = match self.flavor {
                Flavor::Rips => value.max(maxd / 2.0),
                Flavor::Cech => {
                    self.coords.extend_from_slice(cloud.point(w as usize));
                    let r = self.meb.radius(&self.coords, self.dim, self.metric);
                    self.coords.truncate(size * self.dim);
                    if r > self.r_max {
                        continue; // enclosing balls grow with the simplex
                    }
                    r.max(value)
                }
            };
            self.bin_values[size].push(child_value);
            self.bin_verts[size].extend_from_slice(&self.simplex);
            self.bin_verts[size].push(w);
            if size < max_dim {
                let (cur, rest) = self.cand.split_at_mut(size + 1);
                merge_candidates(&cur[size][k + 1..], &adj[w as usize], &mut rest[0]);
                if !rest[0].is_empty() {
                    self.simplex.push(w);
                    self.coords.extend_from_slice(cloud.point(w as usize));
                    self.extend(size + 1, child_value, max_dim);
                    self.coords.truncate(size * self.dim);
                    self.simplex.pop();
                }
            }
        }
    }
}

/// Ordered intersection; the surviving max-distance is the entrywise max of
/// the carried value and the new vertex's pair distance.
fn merge_candidates(a: &[(u32, f64)], b: &[(u32, f64)], out: &mut Vec<(u32, f64)>) {
    out.clear();
    let mut x = 0;
    let mut y = 0;
    while x < a.len() && y < b.len() {
        match a[x].0.cmp(&b[y].0) {
            core::cmp::Ordering::Less => x += 1,
            core::cmp::Ordering::Greater => y += 1,
            core::cmp::Ordering::Equal => {
                out.push((a[x].0, a[x].1.max(b[y].1)));
                x += 1;
                y += 1;
            }
        }
    }
}

/// Reusable scratch for minimum-enclosing-ball radii during expansion.
/// Sizes two and three take closed forms; larger supports run Welzl through
/// the geometry module's public entry point semantics (translated chart on
/// the torus, Euclidean recursion).
#[derive(Default)]
struct MebScratch {
    chart: Vec<f64>,
}

impl MebScratch {
    fn radius(&mut self, coords: &[f64], dim: usize, metric: Metric) -> f64 {
        let pts = match metric {
            Metric::CubeEuclidean => coords,
            Metric::FlatTorus => {
                self.chart.clear();
                let anchor = &coords[..dim];
                for i in 0..coords.len() / dim {
                    for a in 0..dim {
                        let mut rel = coords[i * dim + a] - anchor[a];
                        rel -= math::floor(rel + 0.5);
                        self.chart.push(anchor[a] + rel);
                    }
                }
                &self.chart
            }
        };
        let k = pts.len() / dim;
        match k {
            2 => Metric::CubeEuclidean.distance_unchecked(&pts[..dim], &pts[dim..]) / 2.0,
            3 => triangle_meb_radius(pts, dim),
            _ => crate::geometry::min_enclosing_ball(pts, dim, Metric::CubeEuclidean)
                .expect("nonempty euclidean input")
                .radius,
        }
    }
}

/// Enclosing-ball radius of three points: half the longest side when the
/// triangle is obtuse (the opposite vertex falls inside that diametral
/// ball), otherwise the circumradius.
fn triangle_meb_radius(pts: &[f64], dim: usize) -> f64 {
    let (p, q, r) = (&pts[..dim], &pts[dim..2 * dim], &pts[2 * dim..]);
    let d2 = |a: &[f64], b: &[f64]| Metric::CubeEuclidean.distance_sq(a, b);
    let (ab, ac, bc) = (d2(p, q), d2(p, r), d2(q, r));
    let longest = ab.max(ac).max(bc);
    if 2.0 * longest >= ab + ac + bc {
        // obtuse or right: longest^2 >= sum of the other two squares
        return math::sqrt(longest) / 2.0;
    }
    // circumradius via R = abc / (4K), K from the cross-term identity
    let mut uu = 0.0;
    let mut vv = 0.0;
    let mut uv = 0.0;
    for a in 0..dim {
        let u = q[a] - p[a];
        let v = r[a] - p[a];
        uu += u * u;
        vv += v * v;
        uv += u * v;
    }
    let cross2 = uu * vv - uv * uv; // (2K)^2
    math::sqrt(uu * vv * bc / (4.0 * cross2))
}
