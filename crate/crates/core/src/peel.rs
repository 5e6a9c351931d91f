//! Subfield-wise boundary peeling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{endpoint_field, simple_candidates, Detector};
use crate::error::{Error, Result};
use crate::field::{gates, FieldOps};
use crate::lattice::{NeighborhoodConfig, SubfieldId};
use crate::local::LocalTables;
use crate::volume::BinaryVolume;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Iterations {
    /// Exactly this many outer iterations.
    Fixed(usize),
    /// Stop after the first outer iteration that deletes nothing.
    UntilStable,
}

impl Iterations {
    /// Parses `auto` or a non-negative integer.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Iterations::UntilStable);
        }
        s.parse().map(Iterations::Fixed).map_err(|_| {
            Error::domain(format!(
                "iterations must be `auto` or a non-negative integer, got `{s}`"
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelConfig {
    pub detector: Detector,
    pub iterations: Iterations,
    pub preserve_endpoints: bool,
}

impl Default for PeelConfig {
    fn default() -> Self {
        PeelConfig {
            detector: Detector::Boolean,
            iterations: Iterations::UntilStable,
            preserve_endpoints: true,
        }
    }
}

impl PeelConfig {
    pub fn new(detector: Detector, iterations: Iterations) -> Self {
        PeelConfig {
            detector,
            iterations,
            ..Default::default()
        }
    }

    pub fn with_endpoints(mut self, preserve: bool) -> Self {
        self.preserve_endpoints = preserve;
        self
    }
}

#[inline]
fn deletable(tables: &LocalTables, cfg: &PeelConfig, n: NeighborhoodConfig) -> bool {
    if cfg.preserve_endpoints && n.count() <= 1 {
        return false;
    }
    match cfg.detector {
        Detector::Euler => tables.euler_flag(n),
        Detector::Boolean => tables.boolean_simple(n),
    }
}

/// Linear indices of the points of `sf` that would be deleted from `v`.
fn deletions(v: &BinaryVolume, sf: SubfieldId, cfg: &PeelConfig) -> Vec<usize> {
    let tables = LocalTables::get();
    let shape = v.shape();
    let (i, j, k) = sf.parts();
    let planes: Vec<usize> = (k as usize..shape.nz).step_by(2).collect();
    planes
        .par_iter()
        .flat_map_iter(|&z| {
            let mut out = Vec::new();
            for y in (j as usize..shape.ny).step_by(2) {
                for x in (i as usize..shape.nx).step_by(2) {
                    let p = [x, y, z];
                    if v.get(p) && deletable(tables, cfg, NeighborhoodConfig::from_volume(v, p)) {
                        out.push(shape.index(p));
                    }
                }
            }
            out
        })
        .collect()
}

/// Deletes, simultaneously, every foreground point of `sf` that the detector
/// flags as simple and that is not a protected endpoint.
pub fn peel_subiteration(
    v: &BinaryVolume,
    sf: SubfieldId,
    cfg: &PeelConfig,
) -> (BinaryVolume, usize) {
    let del = deletions(v, sf, cfg);
    let mut data = v.data().to_vec();
    for &i in &del {
        data[i] = 0;
    }
    let out = BinaryVolume::from_vec(v.shape(), data).expect("deletion keeps values binary");
    (out, del.len())
}

/// Deletions per subiteration of a skeletonization run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PeelTrace {
    pub outer_iterations: usize,
    pub deletions: Vec<usize>,
}

pub fn skeletonize(v: &BinaryVolume, cfg: &PeelConfig) -> BinaryVolume {
    skeletonize_traced(v, cfg).0
}

pub fn skeletonize_traced(v: &BinaryVolume, cfg: &PeelConfig) -> (BinaryVolume, PeelTrace) {
    let mut cur = v.clone();
    let mut trace = PeelTrace::default();
    loop {
        if let Iterations::Fixed(n) = cfg.iterations {
            if trace.outer_iterations >= n {
                break;
            }
        }
        let mut deleted = 0;
        for sf in SubfieldId::ALL {
            let (next, d) = peel_subiteration(&cur, sf, cfg);
            cur = next;
            deleted += d;
            trace.deletions.push(d);
        }
        trace.outer_iterations += 1;
        if cfg.iterations == Iterations::UntilStable && deleted == 0 {
            break;
        }
    }
    (cur, trace)
}

/// One subiteration as field operations: `x - x * simple * (1 - endpoint) * sf`.
/// `x` must carry at least one layer of background padding.
pub fn peel_step_field<O: FieldOps>(
    ops: &mut O,
    x: &O::Field,
    sf_mask: &O::Field,
    detector: Detector,
    preserve_endpoints: bool,
) -> O::Field {
    let mut del = simple_candidates(ops, detector, x, sf_mask);
    if preserve_endpoints {
        let ends = endpoint_field(ops, x);
        let keep = gates::not(ops, &ends);
        del = ops.mul(&del, &keep);
    }
    ops.sub(x, &del)
}

/// `n` outer iterations over the eight subfield masks, in [`SubfieldId::ALL`] order.
pub fn peel_field<O: FieldOps>(
    ops: &mut O,
    x: &O::Field,
    sf_masks: &[O::Field; 8],
    detector: Detector,
    preserve_endpoints: bool,
    n: usize,
) -> O::Field {
    let mut cur = x.clone();
    for _ in 0..n {
        for sf in sf_masks {
            cur = peel_step_field(ops, &cur, sf, detector, preserve_endpoints);
        }
    }
    cur
}
