//! Exhaustive and sampled evaluation of the three point classifiers over
//! 26-neighborhood configurations.

use std::ops::{AddAssign, Range};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{boolean_simple_mask, euler_delta_mask};
use crate::error::{Error, Result};
use crate::lattice::{NeighborhoodConfig, SubfieldId, PATCH_OFFSETS};
use crate::local::{is_simple_exact, LocalTables};
use crate::volume::{BinaryVolume, Point, Shape};

/// Configurations drawn per independently seeded chunk in sampled mode.
pub const SAMPLE_CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CensusMode {
    Full,
    Sampled { n: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusCounts {
    pub total: u64,
    pub exact_simple: u64,
    pub euler_flagged: u64,
    pub boolean_flagged: u64,
    pub mismatches_boolean_vs_exact: u64,
    /// Exact-simple configurations the Euler detector misses.
    pub necessity_violations: u64,
}

impl AddAssign for CensusCounts {
    fn add_assign(&mut self, o: Self) {
        self.total += o.total;
        self.exact_simple += o.exact_simple;
        self.euler_flagged += o.euler_flagged;
        self.boolean_flagged += o.boolean_flagged;
        self.mismatches_boolean_vs_exact += o.mismatches_boolean_vs_exact;
        self.necessity_violations += o.necessity_violations;
    }
}

impl CensusCounts {
    #[inline]
    fn record(&mut self, tables: &LocalTables, cfg: NeighborhoodConfig) {
        let exact = tables.simple(cfg);
        let euler = tables.euler_flag(cfg);
        let boolean = tables.boolean_simple(cfg);
        self.total += 1;
        self.exact_simple += exact as u64;
        self.euler_flagged += euler as u64;
        self.boolean_flagged += boolean as u64;
        self.mismatches_boolean_vs_exact += (boolean != exact) as u64;
        self.necessity_violations += (exact && !euler) as u64;
    }

    pub fn exact_rate(&self) -> f64 {
        ratio(self.exact_simple, self.total)
    }

    pub fn euler_rate(&self) -> f64 {
        ratio(self.euler_flagged, self.total)
    }

    pub fn boolean_rate(&self) -> f64 {
        ratio(self.boolean_flagged, self.total)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusResult {
    pub mode: CensusMode,
    pub range: Range<u32>,
    pub counts: CensusCounts,
    pub elapsed: Duration,
}

fn count_range(tables: &LocalTables, range: Range<u32>) -> CensusCounts {
    let mut c = CensusCounts::default();
    for bits in range {
        c.record(tables, NeighborhoodConfig::from_bits_truncate(bits));
    }
    c
}

/// Splits `range` into `shards` contiguous pieces of near-equal length.
pub fn shard_ranges(range: Range<u32>, shards: usize) -> Vec<Range<u32>> {
    let len = (range.end - range.start) as u64;
    let k = shards.max(1) as u64;
    (0..k)
        .map(|i| {
            let lo = range.start as u64 + len * i / k;
            let hi = range.start as u64 + len * (i + 1) / k;
            lo as u32..hi as u32
        })
        .filter(|r| !r.is_empty())
        .collect()
}

/// Evaluates the exact oracle, the Euler detector and the Boolean detector
/// on every configuration of `range` (default: all 2^26), or on `n` uniform
/// draws from it. Shards and sample chunks are evaluated in parallel and
/// merged by summation, so the counts do not depend on the thread count.
pub fn run_census(
    mode: CensusMode,
    range: Option<Range<u32>>,
    shards: usize,
) -> Result<CensusResult> {
    let range = range.unwrap_or(0..NeighborhoodConfig::COUNT);
    if range.start >= range.end || range.end > NeighborhoodConfig::COUNT {
        return Err(Error::domain(format!(
            "census range {}..{} must be non-empty and inside 0..{}",
            range.start,
            range.end,
            NeighborhoodConfig::COUNT
        )));
    }
    let tables = LocalTables::get();
    let start = Instant::now();
    let counts = match mode {
        CensusMode::Full => shard_ranges(range.clone(), shards)
            .into_par_iter()
            .map(|r| count_range(tables, r))
            .reduce(CensusCounts::default, |mut a, b| {
                a += b;
                a
            }),
        CensusMode::Sampled { n, seed } => {
            if n == 0 {
                return Err(Error::domain("sampled census needs n >= 1"));
            }
            let chunks = n.div_ceil(SAMPLE_CHUNK);
            let r = range.clone();
            (0..chunks)
                .into_par_iter()
                .map(|chunk| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(chunk);
                    let len = SAMPLE_CHUNK.min(n - chunk * SAMPLE_CHUNK);
                    let mut c = CensusCounts::default();
                    for _ in 0..len {
                        let bits = rng.gen_range(r.clone());
                        c.record(tables, NeighborhoodConfig::from_bits_truncate(bits));
                    }
                    c
                })
                .reduce(CensusCounts::default, |mut a, b| {
                    a += b;
                    a
                })
        }
    };
    Ok(CensusResult {
        mode,
        range,
        counts,
        elapsed: start.elapsed(),
    })
}

/// Patches per axis of one tiled batch in [`kernel_census`].
const TILE: usize = 24;

/// Counts the same quantities as [`run_census`] for an explicit list of
/// configurations, but classifies with the convolution detectors: each
/// configuration is written into a large volume as an isolated 3x3x3 patch
/// (patches 4 voxels apart, all centers in subfield (1,1,1)) and the
/// detector masks are read back at the centers. The exact column uses
/// [`is_simple_exact`].
pub fn kernel_census(configs: &[NeighborhoodConfig]) -> CensusCounts {
    let sf = SubfieldId::new(1, 1, 1).expect("valid subfield");
    let shape = Shape::new(4 * TILE, 4 * TILE, 4 * TILE);
    let mut c = CensusCounts::default();
    for batch in configs.chunks(TILE * TILE * TILE) {
        let centers: Vec<Point> = (0..batch.len())
            .map(|i| {
                [
                    4 * (i % TILE) + 1,
                    4 * (i / TILE % TILE) + 1,
                    4 * (i / (TILE * TILE)) + 1,
                ]
            })
            .collect();
        let mut v = BinaryVolume::zeros(shape);
        for (cfg, &[x, y, z]) in batch.iter().zip(&centers) {
            let word = cfg.patch_word();
            for (k, d) in PATCH_OFFSETS.iter().enumerate() {
                if word >> k & 1 == 1 {
                    let q = [
                        (x as isize + d[0]) as usize,
                        (y as isize + d[1]) as usize,
                        (z as isize + d[2]) as usize,
                    ];
                    v.set(q, true);
                }
            }
        }
        let euler = euler_delta_mask(&v, sf);
        let boolean = boolean_simple_mask(&v);
        for (&cfg, &p) in batch.iter().zip(&centers) {
            let exact = is_simple_exact(cfg);
            let (e, b) = (euler.get(p), boolean.get(p));
            c.total += 1;
            c.exact_simple += exact as u64;
            c.euler_flagged += e as u64;
            c.boolean_flagged += b as u64;
            c.mismatches_boolean_vs_exact += (b != exact) as u64;
            c.necessity_violations += (exact && !e) as u64;
        }
    }
    c
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// JSON form of a census result; `elapsed_seconds` is the only field that
/// varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub mode: String,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub range: [u32; 2],
    pub total: u64,
    pub exact_simple: u64,
    pub euler_flagged: u64,
    pub boolean_flagged: u64,
    pub mismatches_boolean_vs_exact: u64,
    pub necessity_violations: u64,
    pub exact_rate: f64,
    pub euler_rate: f64,
    pub boolean_rate: f64,
    pub elapsed_seconds: f64,
}

impl From<&CensusResult> for CensusReport {
    fn from(r: &CensusResult) -> Self {
        let c = &r.counts;
        let (mode, seed, samples) = match r.mode {
            CensusMode::Full => ("full", None, None),
            CensusMode::Sampled { n, seed } => ("sampled", Some(seed), Some(n)),
        };
        CensusReport {
            mode: mode.to_string(),
            seed,
            samples,
            range: [r.range.start, r.range.end],
            total: c.total,
            exact_simple: c.exact_simple,
            euler_flagged: c.euler_flagged,
            boolean_flagged: c.boolean_flagged,
            mismatches_boolean_vs_exact: c.mismatches_boolean_vs_exact,
            necessity_violations: c.necessity_violations,
            exact_rate: round4(c.exact_rate()),
            euler_rate: round4(c.euler_rate()),
            boolean_rate: round4(c.boolean_rate()),
            elapsed_seconds: r.elapsed.as_secs_f64(),
        }
    }
}

pub fn census_report(r: &CensusResult, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&CensusReport::from(r)).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
