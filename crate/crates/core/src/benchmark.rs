//! Topological accuracy comparison of skeletonization algorithms over a
//! corpus of binary volumes.

use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detectors::Detector;
use crate::error::{Error, Result};
use crate::io::{read_volume, volume_paths, Volume};
use crate::morph::morphological_skeleton_baseline;
use crate::peel::{skeletonize, Iterations, PeelConfig};
use crate::shapes::{make_shape, ShapeKind, ShapeSpec};
use crate::topology::betti_numbers;
use crate::volume::BinaryVolume;

/// Erosion steps used by the morphological baseline.
pub const MORPH_ITERATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Boolean,
    Euler,
    MorphologicalBaseline,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::Boolean,
        Algorithm::Euler,
        Algorithm::MorphologicalBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Boolean => "boolean",
            Algorithm::Euler => "euler",
            Algorithm::MorphologicalBaseline => "morphological_baseline",
        }
    }

    pub fn run(self, v: &BinaryVolume) -> BinaryVolume {
        match self {
            Algorithm::Boolean => skeletonize(
                v,
                &PeelConfig::new(Detector::Boolean, Iterations::UntilStable),
            ),
            Algorithm::Euler => skeletonize(
                v,
                &PeelConfig::new(Detector::Euler, Iterations::UntilStable),
            ),
            Algorithm::MorphologicalBaseline => {
                morphological_skeleton_baseline(v, MORPH_ITERATIONS)
                    .expect("iteration count is positive")
            }
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub shape_id: String,
    pub algorithm: Algorithm,
    pub points: usize,
    pub beta0_err: u64,
    pub beta1_err: u64,
    pub beta2_err: u64,
    pub elapsed_ms: u64,
}

pub const CSV_HEADER: &str = "shape_id,algorithm,points,beta0_err,beta1_err,beta2_err,elapsed_ms";

impl BenchmarkRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.shape_id,
            self.algorithm.name(),
            self.points,
            self.beta0_err,
            self.beta1_err,
            self.beta2_err,
            self.elapsed_ms
        )
    }
}

/// Skeletonizes every volume with every algorithm; only the skeletonization
/// call is timed.
pub fn run_benchmark(
    corpus: &[(String, BinaryVolume)],
    algorithms: &[Algorithm],
) -> Result<Vec<BenchmarkRow>> {
    if corpus.is_empty() {
        return Err(Error::domain("benchmark corpus is empty"));
    }
    if algorithms.is_empty() {
        return Err(Error::domain("no algorithms selected"));
    }
    let mut rows = Vec::with_capacity(corpus.len() * algorithms.len());
    for (id, v) in corpus {
        let reference = betti_numbers(v);
        for &algorithm in algorithms {
            let start = Instant::now();
            let skeleton = algorithm.run(v);
            let elapsed_ms = start.elapsed().as_millis() as u64;
            let (beta0_err, beta1_err, beta2_err) =
                betti_numbers(&skeleton).errors_against(&reference);
            rows.push(BenchmarkRow {
                shape_id: id.clone(),
                algorithm,
                points: skeleton.count(),
                beta0_err,
                beta1_err,
                beta2_err,
                elapsed_ms,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv(rows: &[BenchmarkRow], path: &Path) -> Result<()> {
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(&r.csv_line());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Every volume in `dir` (one per `.json` header), sorted by file name; the
/// shape id is the file stem.
pub fn read_corpus(dir: &Path) -> Result<Vec<(String, BinaryVolume)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut headers = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            headers.push(path);
        }
    }
    headers.sort();
    headers
        .into_iter()
        .map(|path| {
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            if id.contains(',') {
                return Err(Error::format(&path, "shape ids may not contain commas"));
            }
            let v = match read_volume(&path)? {
                Volume::Binary(b) => b,
                Volume::Probability(p) => BinaryVolume::from_real(&p.to_real()),
            };
            Ok((id, v))
        })
        .collect()
}

/// Blob sizes are drawn from this inclusive range.
pub const BLOB_SIZES: (usize, usize) = (8, 48);

/// Line, solid box, thick torus and hollow shell with default parameters,
/// followed by `blobs` random blobs with seeded sizes, smoothing and fill.
pub fn synthetic_corpus(blobs: usize, seed: u64) -> Vec<(String, BinaryVolume)> {
    let mut out: Vec<(String, BinaryVolume)> = [
        ShapeKind::Line,
        ShapeKind::SolidBox,
        ShapeKind::ThickTorus,
        ShapeKind::HollowShell,
    ]
    .into_iter()
    .map(|k| {
        let v = make_shape(&ShapeSpec::default_for(k), seed).expect("default parameters are valid");
        (k.name().to_string(), v)
    })
    .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..blobs {
        let spec = ShapeSpec::RandomBlob {
            size: rng.gen_range(BLOB_SIZES.0..=BLOB_SIZES.1),
            smoothing: rng.gen_range(1..=3),
            fill: rng.gen_range(0.3..0.6),
        };
        let blob_seed = rng.gen();
        let v = make_shape(&spec, blob_seed).expect("sampled parameters are valid");
        out.push((format!("random_blob_{i:03}"), v));
    }
    out
}

/// Writes [`synthetic_corpus`] to `dir` as volume files.
pub fn write_corpus(corpus: &[(String, BinaryVolume)], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (id, v) in corpus {
        let (json, _) = volume_paths(&dir.join(id));
        crate::io::write_binary(v, &json)?;
    }
    Ok(())
}
