//! Volume files: a JSON header `<name>.json`
//! (`{"shape": [nx, ny, nz], "dtype": "u8" | "f32", "order": "x-fastest"}`)
//! next to a raw little-endian payload `<name>.raw` of exactly
//! `nx * ny * nz` elements.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{BinaryVolume, ProbabilityVolume, Shape};

pub const ORDER: &str = "x-fastest";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    U8,
    F32,
}

impl Dtype {
    fn element_size(self) -> usize {
        match self {
            Dtype::U8 => 1,
            Dtype::F32 => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub shape: [usize; 3],
    pub dtype: Dtype,
    pub order: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Volume {
    Binary(BinaryVolume),
    Probability(ProbabilityVolume),
}

impl Volume {
    pub fn shape(&self) -> Shape {
        match self {
            Volume::Binary(v) => v.shape(),
            Volume::Probability(p) => p.shape(),
        }
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            Volume::Binary(_) => Dtype::U8,
            Volume::Probability(_) => Dtype::F32,
        }
    }

    /// The binary volume, or an error naming `path` for probability data.
    pub fn into_binary(self, path: &Path) -> Result<BinaryVolume> {
        match self {
            Volume::Binary(v) => Ok(v),
            Volume::Probability(_) => Err(Error::format(
                path,
                "expected a binary (u8) volume, found f32",
            )),
        }
    }
}

impl From<BinaryVolume> for Volume {
    fn from(v: BinaryVolume) -> Self {
        Volume::Binary(v)
    }
}

impl From<ProbabilityVolume> for Volume {
    fn from(p: ProbabilityVolume) -> Self {
        Volume::Probability(p)
    }
}

/// Header and payload paths for `path`, which may name either file or the
/// common stem.
pub fn volume_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("raw") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let with = |ext: &str| {
        let mut s = stem.clone().into_os_string();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    (with("json"), with("raw"))
}

pub fn write_volume(v: &Volume, path: &Path) -> Result<()> {
    let (json, raw) = volume_paths(path);
    let shape = v.shape();
    let header = Header {
        shape: shape.dims(),
        dtype: v.dtype(),
        order: ORDER.to_string(),
    };
    let mut text = serde_json::to_string_pretty(&header).expect("header serializes");
    text.push('\n');
    let bytes: Vec<u8> = match v {
        Volume::Binary(b) => b.data().to_vec(),
        Volume::Probability(p) => p.data().iter().flat_map(|x| x.to_le_bytes()).collect(),
    };
    fs::write(&json, text).map_err(|e| Error::io(&json, e))?;
    fs::write(&raw, bytes).map_err(|e| Error::io(&raw, e))?;
    Ok(())
}

pub fn read_volume(path: &Path) -> Result<Volume> {
    let (json, raw) = volume_paths(path);
    let text = fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
    let header: Header = serde_json::from_str(&text)
        .map_err(|e| Error::format(&json, format!("bad header: {e}")))?;
    if header.order != ORDER {
        return Err(Error::format(
            &json,
            format!("unsupported order `{}`, expected `{ORDER}`", header.order),
        ));
    }
    let [nx, ny, nz] = header.shape;
    let shape = Shape::new(nx, ny, nz)
        .validate()
        .map_err(|e| Error::format(&json, e.to_string()))?;
    let bytes = fs::read(&raw).map_err(|e| Error::io(&raw, e))?;
    let expected = shape.len() * header.dtype.element_size();
    if bytes.len() != expected {
        return Err(Error::format(
            &raw,
            format!(
                "expected {expected} bytes for shape {shape} dtype {:?}, found {}",
                header.dtype,
                bytes.len()
            ),
        ));
    }
    match header.dtype {
        Dtype::U8 => {
            if let Some(i) = bytes.iter().position(|&b| b > 1) {
                return Err(Error::format(
                    &raw,
                    format!("value {} at element {i} is not 0 or 1", bytes[i]),
                ));
            }
            Ok(Volume::Binary(BinaryVolume::from_vec(shape, bytes)?))
        }
        Dtype::F32 => {
            let data: Vec<f32> = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            if let Some(i) = data.iter().position(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::format(
                    &raw,
                    format!("value {} at element {i} is outside [0, 1]", data[i]),
                ));
            }
            Ok(Volume::Probability(ProbabilityVolume::from_vec(
                shape, data,
            )?))
        }
    }
}

pub fn write_binary(v: &BinaryVolume, path: &Path) -> Result<()> {
    write_volume(&Volume::Binary(v.clone()), path)
}

pub fn read_binary(path: &Path) -> Result<BinaryVolume> {
    read_volume(path)?.into_binary(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_from_any_name() {
        for p in ["a/vol", "a/vol.json", "a/vol.raw"] {
            let (j, r) = volume_paths(Path::new(p));
            assert_eq!(j, Path::new("a/vol.json"));
            assert_eq!(r, Path::new("a/vol.raw"));
        }
        let (j, _) = volume_paths(Path::new("x.v1"));
        assert_eq!(j, Path::new("x.v1.json"));
    }

    #[test]
    fn header_format() {
        let h = Header {
            shape: [2, 3, 4],
            dtype: Dtype::F32,
            order: ORDER.into(),
        };
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"shape":[2,3,4],"dtype":"f32","order":"x-fastest"}"#);
    }
}
