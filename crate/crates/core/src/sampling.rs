//! Seeded point-cloud samplers on the unit cube.
//!
//! All randomness flows through [`RngStream`], a SplitMix64 generator
//! addressed by a root seed plus a substream index. Substream k of root r
//! starts from the SplitMix64 mix of `r ^ k`, so any (root, substream) pair
//! names a reproducible sequence without coordination between substreams.

use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::Metric;
use crate::{invalid, math, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. Also used wherever a cheap stable hash is needed.
#[inline]
pub fn splitmix64_mix(z: u64) -> u64 {
    let mut z = z;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random stream: root seed plus substream index.
///
/// The stream state starts at `splitmix64_mix(root_seed ^ substream)` and
/// advances by the SplitMix64 recurrence, so reruns are bit-reproducible.
#[derive(Debug, Clone)]
pub struct RngStream {
    root_seed: u64,
    substream: u64,
    state: u64,
}

impl RngStream {
    pub fn new(root_seed: u64, substream: u64) -> Self {
        RngStream {
            root_seed,
            substream,
            state: splitmix64_mix(root_seed ^ substream),
        }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn substream(&self) -> u64 {
        self.substream
    }

    /// The state the stream was initialized with; identifies the stream.
    pub fn stream_seed(&self) -> u64 {
        splitmix64_mix(self.root_seed ^ self.substream)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        splitmix64_mix(self.state)
    }

    /// Uniform draw from [0, 1) with 53 random mantissa bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Poisson draw. Inversion for small means; larger means are split into
    /// blocks of mean at most 30 and summed, which is exact by Poisson
    /// additivity and avoids normal approximations.
    pub fn poisson(&mut self, mean: f64) -> Result<u64> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(invalid("poisson mean must be positive and finite"));
        }
        if mean <= 30.0 {
            return Ok(self.poisson_inversion(mean));
        }
        let blocks = math::floor(mean / 30.0) as u64 + 1;
        let per_block = mean / blocks as f64;
        let mut total = 0u64;
        for _ in 0..blocks {
            total += self.poisson_inversion(per_block);
        }
        Ok(total)
    }

    fn poisson_inversion(&mut self, mean: f64) -> u64 {
        debug_assert!(mean > 0.0 && mean <= 30.0);
        let u = self.next_f64();
        let mut p = math::exp(-mean);
        let mut cumulative = p;
        let mut k = 0u64;
        // The tail beyond k = 200 is far below f64 resolution for mean <= 30;
        // the bound guards against stalls once p underflows.
        while u > cumulative && k < 200 {
            k += 1;
            p *= mean / k as f64;
            cumulative += p;
            if p == 0.0 {
                break;
            }
        }
        k
    }
}

/// Where a cloud came from: the stream seed that generated it and a label
/// naming the generator ("poisson", "fixed", "lowerbound", ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    pub label: String,
}

/// A finite point set in the unit cube with its distance convention.
#[derive(Debug, Clone)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
    metric: Metric,
    provenance: Provenance,
}

impl PointCloud {
    /// Wrap raw coordinates (row-major, `len = n * dim`) as a cloud.
    /// Every coordinate must lie in the closed unit interval.
    pub fn from_coords(
        coords: Vec<f64>,
        dim: usize,
        metric: Metric,
        provenance: Provenance,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(invalid("coordinate count is not a multiple of the dimension"));
        }
        if !coords.iter().all(|c| c.is_finite() && (0.0..=1.0).contains(c)) {
            return Err(invalid("coordinates must lie in [0, 1]"));
        }
        Ok(PointCloud {
            coords,
            dim,
            metric,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Same coordinates, reinterpreted under another metric.
    pub fn with_metric(&self, metric: Metric) -> PointCloud {
        let mut cloud = self.clone();
        cloud.metric = metric;
        cloud
    }
}

/// Exactly `count` i.i.d. uniform points on the unit cube.
pub fn sample_fixed(
    count: usize,
    dim: usize,
    metric: Metric,
    rng: &mut RngStream,
) -> Result<PointCloud> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let seed = rng.stream_seed();
    let mut coords = Vec::with_capacity(count * dim);
    for _ in 0..count * dim {
        coords.push(rng.next_f64());
    }
    PointCloud::from_coords(
        coords,
        dim,
        metric,
        Provenance {
            seed,
            label: String::from("fixed"),
        },
    )
}

/// Poisson process of the given intensity on the unit cube: the point count
/// is Poisson(intensity), each point i.i.d. uniform.
pub fn sample_poisson(
    intensity: f64,
    dim: usize,
    metric: Metric,
    rng: &mut RngStream,
) -> Result<PointCloud> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(invalid("intensity must be positive and finite"));
    }
    let seed = rng.stream_seed();
    let count = rng.poisson(intensity)? as usize;
    let mut coords = Vec::with_capacity(count * dim);
    for _ in 0..count * dim {
        coords.push(rng.next_f64());
    }
    PointCloud::from_coords(
        coords,
        dim,
        metric,
        Provenance {
            seed,
            label: String::from("poisson"),
        },
    )
}

/// Deterministic shell configuration witnessing a large degree-k cycle.
///
/// Inside a box of half-side `cap` centered at `offset`, a hollow shell is
/// built from the axis-aligned box `[-l_hat/2, l_hat/2]^(k+1) x
/// [-ell/2, ell/2]^(d-k-1)` (with `l_hat = floor(cap / ell) * ell`) minus its
/// inset by `ell` in the first k+1 axes. The shell is tiled by cubes of side
/// `ell` and one point is placed at the center of each, in lexicographic
/// order of the cell indices. The resulting degree-k cycle is born by radius
/// `sqrt(d) * ell` and survives to radius `cap / 4`, so its ratio grows like
/// `cap / ell`.
pub fn lower_bound_configuration(
    dim: usize,
    k: usize,
    ell: f64,
    cap: f64,
    offset: Option<&[f64]>,
) -> Result<PointCloud> {
    if dim < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    if k == 0 || k > dim - 1 {
        return Err(invalid("degree k must satisfy 1 <= k <= dim - 1"));
    }
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(invalid("cell side ell must be positive"));
    }
    if !(cap > 4.0 * ell) {
        return Err(invalid("half-side cap must exceed 4 * ell"));
    }
    let default_offset = alloc::vec![0.5; dim];
    let offset = match offset {
        Some(o) => {
            if o.len() != dim {
                return Err(invalid("offset dimension mismatch"));
            }
            o
        }
        None => &default_offset,
    };
    for &c in offset {
        if !(c - cap >= 0.0 && c + cap <= 1.0) {
            return Err(invalid("enclosing box does not fit in the unit cube"));
        }
    }

    let q = math::floor(cap / ell) as u64; // cells per shell axis; q >= 4
    let faces = k + 1;
    let expected = checked_shell_count(q, faces)
        .ok_or_else(|| invalid("shell has too many cells"))?;
    if expected > 2_000_000 {
        return Err(invalid("shell has too many cells"));
    }
    let l_hat = q as f64 * ell;

    let mut coords = Vec::with_capacity(expected as usize * dim);
    let mut idx = alloc::vec![0u64; faces];
    loop {
        if idx.iter().any(|&i| i == 0 || i == q - 1) {
            for (axis, &i) in idx.iter().enumerate() {
                coords.push(offset[axis] - l_hat / 2.0 + (i as f64 + 0.5) * ell);
            }
            for axis in faces..dim {
                coords.push(offset[axis]);
            }
        }
        // lexicographic increment
        let mut axis = faces;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < q {
                break;
            }
            idx[axis] = 0;
        }
        if idx.iter().all(|&i| i == 0) {
            break;
        }
    }
    debug_assert_eq!(coords.len(), expected as usize * dim);

    PointCloud::from_coords(
        coords,
        dim,
        Metric::CubeEuclidean,
        Provenance {
            seed: 0,
            label: String::from("lowerbound"),
        },
    )
}

fn checked_shell_count(q: u64, faces: usize) -> Option<u64> {
    let outer = q.checked_pow(faces as u32)?;
    let inner = (q - 2).checked_pow(faces as u32)?;
    Some(outer - inner)
}
