//! Simple-point detectors expressed as fixed-kernel convolutions, elementwise
//! arithmetic and gates, generic over [`FieldOps`] so the same code runs
//! eagerly and on the gradient tape.
//!
//! The field functions expect a volume surrounded by at least one layer of
//! background; the volume-level wrappers pad internally.

use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{gates, Eager, FieldOps};
use crate::kernels::{
    patch_aggregation, Cell, Kernel, KernelBank, KernelInput, KernelSpec, Reduction,
};
use crate::lattice::{subfield_mask, SubfieldId, PATCH_CENTER};
use crate::volume::{pad_background, BinaryVolume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    /// Local Euler-characteristic test; flags a superset of the simple points.
    Euler,
    /// Exact Boolean characterization.
    #[default]
    Boolean,
}

impl Detector {
    pub fn name(self) -> &'static str {
        match self {
            Detector::Euler => "euler",
            Detector::Boolean => "boolean",
        }
    }

    pub fn bank(self) -> &'static KernelBank {
        static EULER: OnceLock<KernelBank> = OnceLock::new();
        static BOOLEAN: OnceLock<KernelBank> = OnceLock::new();
        match self {
            Detector::Euler => EULER.get_or_init(KernelBank::euler),
            Detector::Boolean => BOOLEAN.get_or_init(KernelBank::boolean),
        }
    }
}

impl std::fmt::Display for Detector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Detector::Euler),
            "boolean" => Ok(Detector::Boolean),
            other => Err(Error::domain(format!(
                "unknown detector `{other}` (expected euler or boolean)"
            ))),
        }
    }
}

fn neighbors26_kernel() -> Kernel {
    let mut w = [1i8; 27];
    w[PATCH_CENTER] = 0;
    Kernel::patch(w)
}

/// Convolution response of one bank entry followed by its reduction.
fn respond<O: FieldOps>(ops: &mut O, spec: &KernelSpec, x: &O::Field, inv: &O::Field) -> O::Field {
    let input = match spec.input {
        KernelInput::Foreground => x,
        KernelInput::Background => inv,
    };
    let s = ops.conv(input, &spec.kernel);
    match spec.reduction {
        Reduction::Count => s,
        Reduction::AllPresent { required } => ops.gate(&s, required as f64 - 1.0),
    }
}

/// Number of foreground 26-neighbors.
pub fn neighbor_count_field<O: FieldOps>(ops: &mut O, x: &O::Field) -> O::Field {
    ops.conv(x, &neighbors26_kernel())
}

/// Foreground voxels with at most one foreground 26-neighbor.
pub fn endpoint_field<O: FieldOps>(ops: &mut O, x: &O::Field) -> O::Field {
    let n = neighbor_count_field(ops, x);
    let e = gates::at_most(ops, &n, 1.0);
    ops.mul(&e, x)
}

/// Per-voxel count of all-background cells of the cubical complex inside the
/// 3x3x3 patch, as the alternating sum vertices - edges + faces - octants.
fn local_background_genus<O: FieldOps>(ops: &mut O, inv: &O::Field) -> O::Field {
    let bank = Detector::Euler.bank();
    let mut total: Option<O::Field> = None;
    for spec in &bank.kernels {
        let present = respond(ops, spec, inv, inv);
        let count = ops.conv(&present, &patch_aggregation(&spec.kernel));
        let dim = spec.kernel.shape.iter().filter(|&&e| e == 2).count();
        total = Some(match total {
            None => count,
            Some(t) if dim % 2 == 0 => ops.add(&t, &count),
            Some(t) => ops.sub(&t, &count),
        });
    }
    total.expect("euler bank is not empty")
}

/// Euler detector restricted to one subfield: foreground points of `sf_mask`
/// whose deletion leaves the local background genus of their patch unchanged.
///
/// Every subfield point is cleared at once for the "after" count; no two of
/// them share a 3x3x3 patch, so each patch sees only its own center removed.
pub fn euler_flag_field<O: FieldOps>(ops: &mut O, x: &O::Field, sf_mask: &O::Field) -> O::Field {
    let inv = gates::not(ops, x);
    let before = local_background_genus(ops, &inv);
    let removed = ops.mul(sf_mask, x);
    let inv_after = ops.add(&inv, &removed);
    let after = local_background_genus(ops, &inv_after);
    let delta = ops.sub(&after, &before);
    let unchanged = gates::equals(ops, &delta, 0.0);
    ops.mul(&unchanged, &removed)
}

/// Boolean characterization, evaluated at every foreground voxel:
/// `X6bar = 1`, or `X26 = 1`, or `B26 = 0 and X18 = 1`, or
/// `A6bar = 0 and B26 = 0 and B18 = 0 and X6bar - A18bar + A26bar = 1`,
/// where `B*` and `A*bar` count occurrences of the cell configurations.
pub fn boolean_simple_field<O: FieldOps>(ops: &mut O, x: &O::Field) -> O::Field {
    let bank = Detector::Boolean.bank();
    let inv = gates::not(ops, x);
    let count = |ops: &mut O, name: &str| {
        let spec = bank.get(name).expect("count kernel present");
        respond(ops, spec, x, &inv)
    };
    let x6_bar = count(ops, "x6_bar");
    let x26 = count(ops, "x26");
    let x18 = count(ops, "x18");
    let mut cells = Vec::with_capacity(Cell::ALL.len());
    for cell in Cell::ALL {
        let present: Vec<O::Field> = bank
            .cell_kernels(cell)
            .map(|spec| respond(ops, spec, x, &inv))
            .collect();
        cells.push(gates::sum(ops, &present));
    }
    let [a6_bar, b26, b18, a18_bar, a26_bar] =
        <[O::Field; 5]>::try_from(cells).ok().expect("five cells");

    let c1 = gates::equals(ops, &x6_bar, 1.0);
    let c2 = gates::equals(ops, &x26, 1.0);
    let no_b26 = gates::is_zero(ops, &b26);
    let one18 = gates::equals(ops, &x18, 1.0);
    let c3 = ops.mul(&no_b26, &one18);
    let no_a6 = gates::is_zero(ops, &a6_bar);
    let no_b18 = gates::is_zero(ops, &b18);
    let t = ops.sub(&x6_bar, &a18_bar);
    let t = ops.add(&t, &a26_bar);
    let genus_one = gates::equals(ops, &t, 1.0);
    let c4 = gates::all(ops, &[no_a6, no_b26, no_b18, genus_one]);
    let simple = gates::any(ops, &[c1, c2, c3, c4]);
    ops.mul(&simple, x)
}

/// Points of `sf_mask` the detector flags as simple.
pub fn simple_candidates<O: FieldOps>(
    ops: &mut O,
    detector: Detector,
    x: &O::Field,
    sf_mask: &O::Field,
) -> O::Field {
    match detector {
        Detector::Euler => euler_flag_field(ops, x, sf_mask),
        Detector::Boolean => {
            let simple = boolean_simple_field(ops, x);
            ops.mul(&simple, sf_mask)
        }
    }
}

fn eager_padded(v: &BinaryVolume) -> (Eager, Vec<f64>) {
    let padded = pad_background(v, 1);
    let x = padded.data().iter().map(|&b| b as f64).collect();
    (Eager::new(padded.shape()), x)
}

fn crop_mask(v: &BinaryVolume, field: &[f64]) -> BinaryVolume {
    let padded = v.shape().padded(1);
    BinaryVolume::from_fn(v.shape(), |p| {
        field[padded.index([p[0] + 1, p[1] + 1, p[2] + 1])] >= 0.5
    })
}

/// Euler detector on a whole volume, restricted to subfield `sf`.
pub fn euler_delta_mask(v: &BinaryVolume, sf: SubfieldId) -> BinaryVolume {
    let (mut ops, x) = eager_padded(v);
    let sf = pad_background(&subfield_mask(sf, v.shape()), 1);
    let sf: Vec<f64> = sf.data().iter().map(|&b| b as f64).collect();
    let flags = euler_flag_field(&mut ops, &x, &sf);
    crop_mask(v, &flags)
}

/// Boolean detector on a whole volume.
pub fn boolean_simple_mask(v: &BinaryVolume) -> BinaryVolume {
    let (mut ops, x) = eager_padded(v);
    let flags = boolean_simple_field(&mut ops, &x);
    crop_mask(v, &flags)
}

/// Per-voxel number of foreground 26-neighbors, in volume order.
pub fn neighbor_count_26(v: &BinaryVolume) -> Vec<u8> {
    let mut ops = Eager::new(v.shape());
    let x: Vec<f64> = v.data().iter().map(|&b| b as f64).collect();
    neighbor_count_field(&mut ops, &x)
        .iter()
        .map(|&c| c as u8)
        .collect()
}

/// Foreground voxels with at most one foreground 26-neighbor.
pub fn endpoint_mask(v: &BinaryVolume) -> BinaryVolume {
    let counts = neighbor_count_26(v);
    let data = v
        .data()
        .iter()
        .zip(&counts)
        .map(|(&b, &c)| (b == 1 && c <= 1) as u8)
        .collect();
    BinaryVolume::from_vec(v.shape(), data).expect("mask is binary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Shape;

    fn line(len: usize) -> BinaryVolume {
        BinaryVolume::from_fn(Shape::new(len + 2, 3, 3), |p| {
            p[1] == 1 && p[2] == 1 && p[0] >= 1 && p[0] <= len
        })
    }

    #[test]
    fn neighbor_counts() {
        let one = BinaryVolume::ones(Shape::new(1, 1, 1));
        assert_eq!(neighbor_count_26(&one), vec![0]);
        let cube = BinaryVolume::ones(Shape::new(3, 3, 3));
        assert_eq!(neighbor_count_26(&cube)[13], 26);
        let l = line(3);
        let s = l.shape();
        assert_eq!(neighbor_count_26(&l)[s.index([2, 1, 1])], 2);
    }

    #[test]
    fn endpoints_of_a_line() {
        let l = line(5);
        let e = endpoint_mask(&l);
        assert!(e.get([1, 1, 1]) && e.get([5, 1, 1]));
        assert_eq!(e.count(), 2);
        let one = BinaryVolume::ones(Shape::new(1, 1, 1));
        assert_eq!(endpoint_mask(&one).count(), 1);
        let cube = BinaryVolume::ones(Shape::new(3, 3, 3));
        assert!(!endpoint_mask(&cube).get([1, 1, 1]));
    }

    #[test]
    fn euler_flags_tip_not_isolated() {
        let one = BinaryVolume::ones(Shape::new(1, 1, 1));
        let sf = SubfieldId::new(0, 0, 0).unwrap();
        assert_eq!(euler_delta_mask(&one, sf).count(), 0);
        let l = line(4);
        // tip at x = 1 lies in subfield (1, 1, 1)
        let m = euler_delta_mask(&l, SubfieldId::new(1, 1, 1).unwrap());
        assert!(m.get([1, 1, 1]));
        assert!(!m.get([3, 1, 1]));
    }

    #[test]
    fn boolean_first_two_clauses() {
        let slab = BinaryVolume::from_fn(Shape::new(7, 7, 4), |p| p[2] < 3);
        let m = boolean_simple_mask(&slab);
        assert!(m.get([3, 3, 2]));
        assert!(!m.get([3, 3, 1]));
        let l = line(4);
        let m = boolean_simple_mask(&l);
        assert!(m.get([1, 1, 1]) && m.get([4, 1, 1]));
        assert!(!m.get([2, 1, 1]));
    }

    #[test]
    fn detector_names_round_trip() {
        for d in [Detector::Euler, Detector::Boolean] {
            assert_eq!(d.name().parse::<Detector>().unwrap(), d);
        }
        assert_eq!("lee".parse::<Detector>().unwrap_err().kind(), "domain");
    }
}
