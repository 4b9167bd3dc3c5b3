//! Persistent homology of a filtered complex over Z/2.
//!
//! Two engines compute the same diagram; the pairing of a fixed filtration
//! order is unique, so they must agree exactly.
//!
//! `compute_persistence` is the optimized kernel. Degree 0 is a union-find
//! pass over edges (elder rule). Each higher degree k reduces the matrix
//! from the coboundary side: columns are the (k+1)-cofacet lists of the
//! k-simplices, processed in reverse filtration order, which is standard
//! column reduction of the anti-transposed boundary matrix and yields the
//! same pairs. This orientation is what makes clearing effective here: each
//! stage skips exactly the simplices the previous stage paired, so the huge
//! population of never-paired top-dimensional simplices is classified by
//! set subtraction instead of being reduced to zero one by one.
//!
//! `compute_persistence_naive` is the textbook left-to-right boundary
//! reduction kept as an oracle.
//!
//! Columns are sparse sorted index lists added by symmetric difference;
//! the pivot is the largest index.

use alloc::vec::Vec;

use crate::filtration::{FilteredComplex, Flavor};
use crate::geometry::Metric;
use crate::{invalid, Result};

/// One persistence class: born when `birth_simplex` enters, killed by
/// `death_simplex` (absent and `death = +inf` for essential classes).
#[derive(Debug, Clone, PartialEq)]
pub struct PersistencePair {
    pub degree: usize,
    pub birth: f64,
    pub death: f64,
    pub birth_simplex: usize,
    pub death_simplex: Option<usize>,
}

impl PersistencePair {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    /// Simplex-ordering artifact: born and killed at the same value.
    pub fn is_zero_length(&self) -> bool {
        self.birth == self.death
    }
}

/// Per-degree persistence pairs of one filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pairs: Vec<Vec<PersistencePair>>,
    n_simplices: usize,
    r_max: f64,
    flavor: Flavor,
}

impl PersistenceDiagram {
    /// Rebuild a diagram from bare pairs (e.g. parsed back from CSV). The
    /// simplex count is recovered from the pairing identity.
    pub fn from_pairs(all: Vec<PersistencePair>, r_max: f64, flavor: Flavor) -> Result<Self> {
        let mut max_degree = 0;
        let mut n_simplices = 0;
        for p in &all {
            if !(p.birth >= 0.0) {
                return Err(invalid("pair birth must be nonnegative"));
            }
            if !(p.death >= p.birth) {
                return Err(invalid("pair death must be at least its birth"));
            }
            if p.degree >= 1 && p.birth == 0.0 {
                return Err(invalid("positive-degree classes are born after 0"));
            }
            if p.is_essential() != p.death_simplex.is_none() {
                return Err(invalid("death simplex present iff the pair is finite"));
            }
            max_degree = max_degree.max(p.degree);
            n_simplices += if p.is_essential() { 1 } else { 2 };
        }
        let mut pairs = alloc::vec![Vec::new(); max_degree + 1];
        for p in all {
            pairs[p.degree].push(p);
        }
        for list in pairs.iter_mut() {
            canonical_sort(list);
        }
        Ok(PersistenceDiagram {
            pairs,
            n_simplices,
            r_max,
            flavor,
        })
    }

    pub fn pairs(&self, degree: usize) -> &[PersistencePair] {
        self.pairs.get(degree).map_or(&[], |v| v)
    }

    pub fn all_pairs(&self) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().flatten()
    }

    pub fn max_degree(&self) -> usize {
        self.pairs.len().saturating_sub(1)
    }

    pub fn essential_count(&self, degree: usize) -> usize {
        self.pairs(degree).iter().filter(|p| p.is_essential()).count()
    }

    pub fn n_simplices(&self) -> usize {
        self.n_simplices
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }
}

/// True when the radius cap cut a degree-`k` bar short: some degree-`k`
/// class is still alive at r_max. The flat torus genuinely has two
/// degree-1 classes that never die, so up to two torus essentials are
/// expected rather than a truncation signal.
pub fn truncation_check(diag: &PersistenceDiagram, k: usize, metric: Metric) -> bool {
    let essentials = diag.essential_count(k);
    match (metric, k) {
        (Metric::FlatTorus, 1) => essentials > 2,
        _ => essentials > 0,
    }
}

/// Optimized reduction: union-find for degree 0, then one coboundary stage
/// per higher degree with clearing between stages.
pub fn compute_persistence(fc: &FilteredComplex) -> Result<PersistenceDiagram> {
    let prep = Prep::for_reduction(fc)?;
    let n = fc.len() as u32;
    let top = fc.max_dim();
    let np = fc.n_points();
    let mut cleared = alloc::vec![false; n as usize];
    let mut finite: Vec<(u32, u32)> = Vec::new();
    let mut essential: Vec<u32> = Vec::new();

    // Degree 0, Kruskal-style: an edge joining two components kills the
    // younger one (elder rule: components are identified by their minimum
    // vertex) and is marked paired so stage 1 skips it; an edge closing a
    // cycle starts a degree-1 class whose fate stage 1 decides.
    let mut parent: Vec<u32> = (0..np as u32).collect();
    if top >= 1 {
        for &e in &prep.asc[1] {
            let vs = fc.vertices(e as usize);
            let ra = find(&mut parent, vs[0]);
            let rb = find(&mut parent, vs[1]);
            if ra != rb {
                let (old, young) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent[young as usize] = old;
                finite.push((young, e));
                cleared[e as usize] = true;
            }
        }
    }
    for v in 0..np as u32 {
        if find(&mut parent, v) == v {
            essential.push(v);
        }
    }

    // Stage k pairs the k-simplices the previous stage left unpaired with
    // their (k+1)-cofacets: reduce the cofacet columns latest-first, so the
    // pivot under reversed indices is the earliest surviving cofacet, which
    // is the killer. A column that empties is an essential class. Pivot
    // slots written at stage k live on (k+1)-simplex indices, which stage
    // k+1 columns never contain; no reset is needed.
    let mut pivot_slot: Vec<u32> = alloc::vec![u32::MAX; n as usize];
    let mut col: Vec<u32> = Vec::new();
    let mut scratch: Vec<u32> = Vec::new();
    for k in 1..top {
        let mut store: Vec<Vec<u32>> = Vec::new();
        for &s in prep.asc[k].iter().rev() {
            if cleared[s as usize] {
                continue;
            }
            let list = &prep.cofacets[k][prep.local_rank[s as usize] as usize];
            col.clear();
            col.extend(list.iter().rev().map(|&c| n - 1 - c));
            loop {
                match col.last().copied() {
                    None => {
                        essential.push(s);
                        break;
                    }
                    Some(rp) => {
                        let slot = pivot_slot[rp as usize];
                        if slot == u32::MAX {
                            let death = n - 1 - rp;
                            finite.push((s, death));
                            cleared[death as usize] = true;
                            pivot_slot[rp as usize] = store.len() as u32;
                            store.push(col.as_slice().to_vec());
                            break;
                        }
                        add_into(&mut col, &store[slot as usize], &mut scratch);
                    }
                }
            }
        }
    }

    // Top dimension: nothing above exists, so every unpaired simplex is the
    // birth of an essential class. This is where clearing pays off; these
    // columns vastly outnumber the paired ones and are never reduced.
    if top >= 1 {
        for &t in &prep.asc[top] {
            if !cleared[t as usize] {
                essential.push(t);
            }
        }
    }

    Ok(assemble(fc, finite, essential))
}

/// Textbook single-pass left-to-right reduction, no optimizations.
pub fn compute_persistence_naive(fc: &FilteredComplex) -> Result<PersistenceDiagram> {
    let prep = Prep::for_naive(fc)?;
    let n = fc.len();
    let mut pivot_slot: Vec<u32> = alloc::vec![u32::MAX; n];
    let mut store: Vec<Vec<u32>> = Vec::new();
    let mut killed = alloc::vec![false; n];
    let mut positive: Vec<u32> = Vec::new();
    let mut finite: Vec<(u32, u32)> = Vec::new();

    let mut col: Vec<u32> = Vec::new();
    let mut facet: Vec<u32> = Vec::new();
    let mut scratch: Vec<u32> = Vec::new();

    for c in 0..n as u32 {
        let q = fc.dim(c as usize);
        if q == 0 {
            positive.push(c);
            continue;
        }
        boundary_into(fc, &prep.lex[q - 1], c, &mut col, &mut facet);
        loop {
            match col.last().copied() {
                None => {
                    positive.push(c);
                    break;
                }
                Some(p) => {
                    let slot = pivot_slot[p as usize];
                    if slot == u32::MAX {
                        finite.push((p, c));
                        killed[p as usize] = true;
                        pivot_slot[p as usize] = store.len() as u32;
                        store.push(core::mem::take(&mut col));
                        break;
                    }
                    add_into(&mut col, &store[slot as usize], &mut scratch);
                }
            }
        }
    }

    let essential: Vec<u32> = positive.into_iter().filter(|&c| !killed[c as usize]).collect();
    Ok(assemble(fc, finite, essential))
}

struct Prep {
    /// positions of each dimension in filtration order
    asc: Vec<Vec<u32>>,
    /// position -> rank within its own dimension list
    local_rank: Vec<u32>,
    /// positions sorted by vertex tuple, for facet lookup in dimension >= 2
    lex: Vec<Vec<u32>>,
    /// ascending cofacet positions per simplex, for dimensions 1..top
    cofacets: Vec<Vec<Vec<u32>>>,
}

impl Prep {
    fn for_reduction(fc: &FilteredComplex) -> Result<Self> {
        Self::build(fc, false)
    }

    fn for_naive(fc: &FilteredComplex) -> Result<Self> {
        Self::build(fc, true)
    }

    /// Indexes the complex and validates that it is a filtration: strictly
    /// sorted by (value, dimension, vertex tuple), vertex i at position i,
    /// and every facet present before its coface.
    ///
    /// Facets of dimension 0 and 1 resolve through direct indexing and the
    /// per-vertex edge rows; both stay cache-resident, unlike searches over
    /// the full complex. The naive engine instead asks for the sorted tuple
    /// index of every dimension and skips the cofacet lists.
    fn build(fc: &FilteredComplex, naive: bool) -> Result<Self> {
        let top = fc.max_dim();
        let n = fc.len();
        let np = fc.n_points();

        let mut asc: Vec<Vec<u32>> = alloc::vec![Vec::new(); top + 1];
        let mut local_rank: Vec<u32> = alloc::vec![0; n];
        for i in 0..n {
            let q = fc.dim(i);
            if q > top {
                return Err(invalid("simplex dimension exceeds the complex dimension"));
            }
            local_rank[i] = asc[q].len() as u32;
            asc[q].push(i as u32);
        }

        for i in 1..n {
            let order = fc
                .value(i - 1)
                .total_cmp(&fc.value(i))
                .then(fc.dim(i - 1).cmp(&fc.dim(i)))
                .then(fc.vertices(i - 1).cmp(fc.vertices(i)));
            if order != core::cmp::Ordering::Less {
                return Err(invalid(
                    "filtration is not sorted by (value, dimension, vertex tuple)",
                ));
            }
        }

        if asc[0].len() != np {
            return Err(invalid("every point must appear as a vertex"));
        }
        for (i, &p) in asc[0].iter().enumerate() {
            if p as usize != i || fc.vertices(i)[0] != i as u32 {
                return Err(invalid("vertex i must sit at position i"));
            }
        }

        let mut edge_rows: Vec<Vec<(u32, u32)>> = alloc::vec![Vec::new(); np];
        if top >= 1 {
            for &e in &asc[1] {
                let vs = fc.vertices(e as usize);
                if vs[0] as usize >= np || vs[1] as usize >= np {
                    return Err(invalid(
                        "filtration is not closed: a simplex is missing a facet",
                    ));
                }
                edge_rows[vs[0] as usize].push((vs[1], e));
            }
            for row in edge_rows.iter_mut() {
                row.sort_unstable();
            }
        }

        let mut lex: Vec<Vec<u32>> = alloc::vec![Vec::new(); top + 1];
        for q in 0..top {
            if asc[q + 1].is_empty() || (!naive && q < 2) {
                continue; // nothing looks this dimension up
            }
            let mut s = asc[q].clone();
            s.sort_unstable_by(|&a, &b| fc.vertices(a as usize).cmp(fc.vertices(b as usize)));
            lex[q] = s;
        }

        let mut cofacets: Vec<Vec<Vec<u32>>> = alloc::vec![Vec::new(); top + 1];
        if !naive {
            for q in 1..top {
                cofacets[q] = alloc::vec![Vec::new(); asc[q].len()];
            }
        }

        let mut facet: Vec<u32> = Vec::new();
        for c in 0..n {
            let vs = fc.vertices(c);
            if !vs.windows(2).all(|w| w[0] < w[1]) {
                return Err(invalid("simplex vertices must be strictly ascending"));
            }
            let q = fc.dim(c);
            if q == 0 {
                continue;
            }
            for drop in 0..vs.len() {
                facet.clear();
                for (a, &v) in vs.iter().enumerate() {
                    if a != drop {
                        facet.push(v);
                    }
                }
                let p = match resolve_facet(fc, &lex, &edge_rows, q - 1, &facet) {
                    Some(p) => p,
                    None => {
                        return Err(invalid(
                            "filtration is not closed: a simplex is missing a facet",
                        ))
                    }
                };
                if p as usize >= c {
                    return Err(invalid(
                        "filtration is not monotone: a facet enters after its coface",
                    ));
                }
                if !naive && q >= 2 {
                    // pushed in position order, so each list ends up ascending
                    cofacets[q - 1][local_rank[p as usize] as usize].push(c as u32);
                }
            }
        }

        Ok(Prep {
            asc,
            local_rank,
            lex,
            cofacets,
        })
    }
}

fn resolve_facet(
    fc: &FilteredComplex,
    lex: &[Vec<u32>],
    edge_rows: &[Vec<(u32, u32)>],
    q: usize,
    verts: &[u32],
) -> Option<u32> {
    match q {
        0 => {
            // prepare() has pinned vertex v to position v
            let v = verts[0];
            if (v as usize) < edge_rows.len() {
                Some(v)
            } else {
                None
            }
        }
        1 => {
            let row = edge_rows.get(verts[0] as usize)?;
            row.binary_search_by(|probe| probe.0.cmp(&verts[1]))
                .ok()
                .map(|i| row[i].1)
        }
        _ => lex_lookup(fc, &lex[q], verts),
    }
}

fn lex_lookup(fc: &FilteredComplex, lex: &[u32], target: &[u32]) -> Option<u32> {
    let mut lo = 0;
    let mut hi = lex.len();
    while lo < hi {
        let mid = (lo + hi) / 2;
        match fc.vertices(lex[mid] as usize).cmp(target) {
            core::cmp::Ordering::Less => lo = mid + 1,
            core::cmp::Ordering::Greater => hi = mid,
            core::cmp::Ordering::Equal => return Some(lex[mid]),
        }
    }
    None
}

fn boundary_into(
    fc: &FilteredComplex,
    lex: &[u32],
    c: u32,
    col: &mut Vec<u32>,
    facet: &mut Vec<u32>,
) {
    let vs = fc.vertices(c as usize);
    col.clear();
    for drop in 0..vs.len() {
        facet.clear();
        for (a, &v) in vs.iter().enumerate() {
            if a != drop {
                facet.push(v);
            }
        }
        col.push(lex_lookup(fc, lex, facet).expect("validated closure"));
    }
    col.sort_unstable();
}

/// Z/2 column addition: symmetric difference of sorted position lists.
fn add_into(col: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let mut x = 0;
    let mut y = 0;
    while x < col.len() && y < other.len() {
        match col[x].cmp(&other[y]) {
            core::cmp::Ordering::Less => {
                scratch.push(col[x]);
                x += 1;
            }
            core::cmp::Ordering::Greater => {
                scratch.push(other[y]);
                y += 1;
            }
            core::cmp::Ordering::Equal => {
                x += 1;
                y += 1;
            }
        }
    }
    scratch.extend_from_slice(&col[x..]);
    scratch.extend_from_slice(&other[y..]);
    core::mem::swap(col, scratch);
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let grand = parent[parent[x as usize] as usize];
        parent[x as usize] = grand;
        x = grand;
    }
    x
}

fn assemble(fc: &FilteredComplex, finite: Vec<(u32, u32)>, essential: Vec<u32>) -> PersistenceDiagram {
    let mut pairs: Vec<Vec<PersistencePair>> = alloc::vec![Vec::new(); fc.max_dim() + 1];
    for (b, d) in finite {
        let degree = fc.dim(b as usize);
        pairs[degree].push(PersistencePair {
            degree,
            birth: fc.value(b as usize),
            death: fc.value(d as usize),
            birth_simplex: b as usize,
            death_simplex: Some(d as usize),
        });
    }
    for b in essential {
        let degree = fc.dim(b as usize);
        pairs[degree].push(PersistencePair {
            degree,
            birth: fc.value(b as usize),
            death: f64::INFINITY,
            birth_simplex: b as usize,
            death_simplex: None,
        });
    }
    for list in pairs.iter_mut() {
        canonical_sort(list);
    }
    PersistenceDiagram {
        pairs,
        n_simplices: fc.len(),
        r_max: fc.r_max(),
        flavor: fc.flavor(),
    }
}

fn canonical_sort(list: &mut [PersistencePair]) {
    list.sort_by(|a, b| {
        a.birth
            .total_cmp(&b.birth)
            .then(a.death.total_cmp(&b.death))
            .then(a.birth_simplex.cmp(&b.birth_simplex))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{build_cech, build_rips};
    use crate::math;
    use crate::sampling::{sample_fixed, PointCloud, Provenance, RngStream};
    use alloc::string::String;
    use alloc::vec;

    fn cloud_from(coords: Vec<f64>, dim: usize, metric: Metric) -> PointCloud {
        PointCloud::from_coords(
            coords,
            dim,
            metric,
            Provenance {
                seed: 0,
                label: String::from("manual"),
            },
        )
        .unwrap()
    }

    fn square() -> PointCloud {
        cloud_from(vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2, Metric::CubeEuclidean)
    }

    fn circle12(radius: f64) -> PointCloud {
        let mut coords = Vec::new();
        for i in 0..12 {
            let theta = 2.0 * core::f64::consts::PI * i as f64 / 12.0;
            coords.push(0.5 + radius * math::cos(theta));
            coords.push(0.5 + radius * math::sin(theta));
        }
        cloud_from(coords, 2, Metric::CubeEuclidean)
    }

    fn euler_ok(diag: &PersistenceDiagram) -> bool {
        let finite = diag.all_pairs().filter(|p| !p.is_essential()).count();
        let essential = diag.all_pairs().filter(|p| p.is_essential()).count();
        2 * finite + essential == diag.n_simplices()
    }

    #[test]
    fn square_rips_diagram_by_hand() {
        let fc = build_rips(&square(), 1.0, 2).unwrap();
        assert_eq!(fc.len(), 14);
        let diag = compute_persistence(&fc).unwrap();
        let half_diag = core::f64::consts::SQRT_2 / 2.0;

        let h0 = diag.pairs(0);
        assert_eq!(h0.len(), 4);
        assert_eq!(diag.essential_count(0), 1);
        for p in h0.iter().filter(|p| !p.is_essential()) {
            assert_eq!(p.birth, 0.0);
            assert!((p.death - 0.5).abs() < 1e-12);
        }

        let h1 = diag.pairs(1);
        let nonzero: Vec<_> = h1.iter().filter(|p| !p.is_zero_length()).collect();
        assert_eq!(nonzero.len(), 1);
        assert!((nonzero[0].birth - 0.5).abs() < 1e-12);
        assert!((nonzero[0].death - half_diag).abs() < 1e-12);
        for p in h1.iter().filter(|p| p.is_zero_length()) {
            assert!((p.birth - half_diag).abs() < 1e-12);
        }
        assert_eq!(h1.len(), 3);

        assert_eq!(diag.essential_count(2), 1);
        assert!(euler_ok(&diag));
        assert_eq!(diag, compute_persistence_naive(&fc).unwrap());
    }

    #[test]
    fn circle_cech_birth_at_half_chord_death_at_circumradius() {
        let radius = 0.4;
        let fc = build_cech(&circle12(radius), 0.45, 2).unwrap();
        let diag = compute_persistence(&fc).unwrap();

        let nonzero: Vec<_> = diag
            .pairs(1)
            .iter()
            .filter(|p| !p.is_zero_length() && !p.is_essential())
            .collect();
        assert_eq!(nonzero.len(), 1);
        let birth = radius * math::sin(core::f64::consts::PI / 12.0);
        assert!((nonzero[0].birth - birth).abs() < 1e-9, "{}", nonzero[0].birth);
        assert!((nonzero[0].death - radius).abs() < 1e-9, "{}", nonzero[0].death);

        // twelve vertices: eleven merge along adjacent chords, one lives on
        assert_eq!(diag.pairs(0).len(), 12);
        assert_eq!(diag.essential_count(0), 1);
        for p in diag.pairs(0).iter().filter(|p| !p.is_essential()) {
            assert!((p.death - birth).abs() < 1e-9);
        }
        assert!(euler_ok(&diag));
        assert_eq!(diag, compute_persistence_naive(&fc).unwrap());
    }

    #[test]
    fn single_vertex_and_empty_complexes() {
        let one = cloud_from(vec![0.3, 0.3], 2, Metric::CubeEuclidean);
        let diag = compute_persistence(&build_rips(&one, 0.2, 1).unwrap()).unwrap();
        assert_eq!(diag.pairs(0).len(), 1);
        assert!(diag.pairs(0)[0].is_essential());
        assert_eq!(diag.pairs(0)[0].birth, 0.0);

        let empty = cloud_from(vec![], 2, Metric::CubeEuclidean);
        let diag = compute_persistence_naive(&build_rips(&empty, 0.2, 1).unwrap()).unwrap();
        assert_eq!(diag.all_pairs().count(), 0);
        assert!(euler_ok(&diag));
    }

    #[test]
    fn engines_agree_on_random_clouds() {
        let mut rng = RngStream::new(71, 0);
        for trial in 0..200 {
            let d = 2 + trial % 2;
            let metric = if (trial / 2) % 2 == 0 {
                Metric::CubeEuclidean
            } else {
                Metric::FlatTorus
            };
            let n = 3 + (rng.next_u64() % 13) as usize;
            let cloud = sample_fixed(n, d, metric, &mut rng).unwrap();
            let r_max = match metric {
                Metric::CubeEuclidean => 0.15 + 0.45 * rng.next_f64(),
                Metric::FlatTorus => 0.04 + 0.08 * rng.next_f64(),
            };
            for build in [build_cech, build_rips] {
                let fc = build(&cloud, r_max, d).unwrap();
                let fast = compute_persistence(&fc).unwrap();
                let slow = compute_persistence_naive(&fc).unwrap();
                assert_eq!(fast, slow, "trial {trial}");
                assert!(euler_ok(&fast), "trial {trial}");
                for p in fast.all_pairs() {
                    assert!(p.birth >= 0.0 && p.death >= p.birth);
                    if p.degree >= 1 {
                        assert!(p.birth > 0.0);
                    }
                    assert_eq!(fc.dim(p.birth_simplex), p.degree);
                    assert_eq!(fc.value(p.birth_simplex), p.birth);
                    if let Some(ds) = p.death_simplex {
                        assert_eq!(fc.dim(ds), p.degree + 1);
                        assert_eq!(fc.value(ds), p.death);
                    }
                }
            }
        }
    }

    #[test]
    fn essential_h0_counts_connected_components() {
        let mut rng = RngStream::new(73, 0);
        for _ in 0..20 {
            let n = 2 + (rng.next_u64() % 30) as usize;
            let cloud = sample_fixed(n, 2, Metric::CubeEuclidean, &mut rng).unwrap();
            let r_max = 0.02 + 0.2 * rng.next_f64();
            let fc = build_rips(&cloud, r_max, 2).unwrap();
            let diag = compute_persistence(&fc).unwrap();

            // breadth-first component count over the complex's edges
            let mut adj = vec![Vec::new(); n];
            for i in 0..fc.len() {
                if fc.dim(i) == 1 {
                    let vs = fc.vertices(i);
                    adj[vs[0] as usize].push(vs[1] as usize);
                    adj[vs[1] as usize].push(vs[0] as usize);
                }
            }
            let mut seen = vec![false; n];
            let mut components = 0;
            for s in 0..n {
                if seen[s] {
                    continue;
                }
                components += 1;
                let mut queue = vec![s];
                seen[s] = true;
                while let Some(v) = queue.pop() {
                    for &w in &adj[v] {
                        if !seen[w] {
                            seen[w] = true;
                            queue.push(w);
                        }
                    }
                }
            }
            assert_eq!(diag.essential_count(0), components);
        }
    }

    #[test]
    fn h0_pair_count_grows_with_the_cloud() {
        let mut rng = RngStream::new(79, 0);
        let full = sample_fixed(25, 2, Metric::CubeEuclidean, &mut rng).unwrap();
        let mut prev = 0;
        for n in 1..=25 {
            let cloud = cloud_from(full.coords()[..2 * n].to_vec(), 2, Metric::CubeEuclidean);
            let fc = build_rips(&cloud, 0.25, 2).unwrap();
            let count = compute_persistence(&fc).unwrap().pairs(0).len();
            assert!(count >= prev, "H_0 pairs dropped from {prev} to {count} at n={n}");
            assert_eq!(count, n, "every vertex births one H_0 class");
            prev = count;
        }
    }

    #[test]
    fn coincident_points_make_zero_length_pairs() {
        let cloud = cloud_from(vec![0.2, 0.2, 0.2, 0.2, 0.7, 0.7], 2, Metric::CubeEuclidean);
        let fc = build_rips(&cloud, 0.1, 2).unwrap();
        let diag = compute_persistence(&fc).unwrap();
        let zero: Vec<_> = diag.pairs(0).iter().filter(|p| p.is_zero_length()).collect();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].birth, 0.0);
        assert_eq!(zero[0].death, 0.0);
        assert!(euler_ok(&diag));
        assert_eq!(diag, compute_persistence_naive(&fc).unwrap());
    }

    #[test]
    fn rips_ratio_dominates_half_the_cech_ratio() {
        let mut rng = RngStream::new(83, 0);
        let mut tested = 0;
        for _ in 0..50 {
            let n = 10 + (rng.next_u64() % 31) as usize;
            let cloud = sample_fixed(n, 2, Metric::CubeEuclidean, &mut rng).unwrap();
            let cech = compute_persistence(&build_cech(&cloud, 0.5, 2).unwrap()).unwrap();
            let rips = compute_persistence(&build_rips(&cloud, 0.5, 2).unwrap()).unwrap();
            // zero-length pairs count with ratio 1, essentials with ratio inf
            let best_rips = rips
                .pairs(1)
                .iter()
                .map(|p| p.death / p.birth)
                .fold(f64::NAN, f64::max);
            for p in cech.pairs(1).iter().filter(|p| !p.is_essential() && !p.is_zero_length()) {
                let ratio = p.death / p.birth;
                assert!(
                    best_rips >= ratio / 2.0 - 1e-9,
                    "cech ratio {ratio} unmatched: best rips {best_rips}"
                );
                tested += 1;
            }
        }
        assert!(tested > 20, "too few nonzero cech pairs exercised: {tested}");
    }

    #[test]
    fn truncation_rules() {
        let essential_pair = |degree: usize, birth: f64| PersistencePair {
            degree,
            birth,
            death: f64::INFINITY,
            birth_simplex: 0,
            death_simplex: None,
        };
        let diag = |ess: usize, degree: usize| {
            PersistenceDiagram::from_pairs(
                (0..ess).map(|_| essential_pair(degree, 0.1)).collect(),
                0.5,
                Flavor::Cech,
            )
            .unwrap()
        };
        assert!(!truncation_check(&diag(0, 1), 1, Metric::CubeEuclidean));
        assert!(truncation_check(&diag(1, 1), 1, Metric::CubeEuclidean));
        assert!(!truncation_check(&diag(1, 1), 1, Metric::FlatTorus));
        assert!(!truncation_check(&diag(2, 1), 1, Metric::FlatTorus));
        assert!(truncation_check(&diag(3, 1), 1, Metric::FlatTorus));
        assert!(truncation_check(&diag(1, 2), 2, Metric::FlatTorus));

        // a capped circle leaves its loop alive
        let fc = build_cech(&circle12(0.4), 0.2, 2).unwrap();
        let diag = compute_persistence(&fc).unwrap();
        assert!(truncation_check(&diag, 1, Metric::CubeEuclidean));
        let fc = build_cech(&circle12(0.4), 0.45, 2).unwrap();
        let diag = compute_persistence(&fc).unwrap();
        assert!(!truncation_check(&diag, 1, Metric::CubeEuclidean));
    }

    #[test]
    fn identical_complexes_give_identical_diagrams() {
        let mut rng = RngStream::new(89, 0);
        let cloud = sample_fixed(40, 2, Metric::CubeEuclidean, &mut rng).unwrap();
        let fc = build_cech(&cloud, 0.3, 2).unwrap();
        assert_eq!(
            compute_persistence(&fc).unwrap(),
            compute_persistence(&fc).unwrap()
        );
    }

    #[test]
    fn rejects_broken_filtrations() {
        let broken = FilteredComplex::from_raw_parts(
            Flavor::Rips,
            1.0,
            1,
            2,
            &[(0.5, &[0, 1]), (0.0, &[0]), (0.0, &[1])],
        );
        assert!(matches!(
            compute_persistence(&broken),
            Err(crate::Error::InvalidInput(_))
        ));

        let missing = FilteredComplex::from_raw_parts(
            Flavor::Rips,
            1.0,
            1,
            2,
            &[(0.0, &[0]), (0.0, &[1]), (0.5, &[0, 2])],
        );
        assert!(matches!(
            compute_persistence_naive(&missing),
            Err(crate::Error::InvalidInput(_))
        ));
    }

    #[test]
    fn from_pairs_round_trip_and_validation() {
        let fc = build_rips(&square(), 1.0, 2).unwrap();
        let diag = compute_persistence(&fc).unwrap();
        let rebuilt = PersistenceDiagram::from_pairs(
            diag.all_pairs().cloned().collect(),
            diag.r_max(),
            diag.flavor(),
        )
        .unwrap();
        assert_eq!(rebuilt, diag);
        assert_eq!(rebuilt.n_simplices(), 14);

        let bad = PersistencePair {
            degree: 1,
            birth: 0.0,
            death: 0.5,
            birth_simplex: 0,
            death_simplex: Some(1),
        };
        assert!(PersistenceDiagram::from_pairs(vec![bad], 1.0, Flavor::Rips).is_err());
        let upside_down = PersistencePair {
            degree: 1,
            birth: 0.7,
            death: 0.5,
            birth_simplex: 0,
            death_simplex: Some(1),
        };
        assert!(PersistenceDiagram::from_pairs(vec![upside_down], 1.0, Flavor::Rips).is_err());
    }
}
