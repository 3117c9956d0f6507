//! Aggregate vertex matrix: per-device extreme actions (corrected toward the
//! final-energy requirement) summed over a shared set of sign vectors.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::correction::FinalEnergy;
use crate::extreme::{battery_vertex_into, SignVector};
use crate::num::{pairwise_sum, powi};
use crate::polytope::{battery_nonempty, StorageSpec};
use crate::{Error, Result};

/// Dimensions up to which every sign vector is always used.
pub const FULL_ENUMERATION_MAX_D: usize = 8;
/// Largest `d` for which sampling may enumerate and shuffle all `2^d` indices.
const SHUFFLE_MAX_D: usize = 20;

/// A list of `dim`-dimensional profiles stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Profiles {
    dim: usize,
    data: Vec<f64>,
}

impl Profiles {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            data: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, count: usize) -> Self {
        Self {
            dim,
            data: Vec::with_capacity(dim * count),
        }
    }

    /// Wraps column-major data; `data.len()` must be a multiple of `dim`.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, c: usize) -> &[f64] {
        &self.data[c * self.dim..(c + 1) * self.dim]
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn push(&mut self, column: &[f64]) {
        assert_eq!(column.len(), self.dim, "profile length mismatch");
        self.data.extend_from_slice(column);
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Per-device vertex matrices kept for disaggregation.
#[derive(Debug, Clone, PartialEq)]
pub enum DeviceVertices {
    /// One matrix per device, columns aligned with the sign vectors.
    Individual(Vec<Profiles>),
    /// `multiplicity` identical devices sharing one matrix.
    Shared {
        profiles: Profiles,
        multiplicity: usize,
    },
}

impl DeviceVertices {
    pub fn num_devices(&self) -> usize {
        match self {
            Self::Individual(v) => v.len(),
            Self::Shared { multiplicity, .. } => *multiplicity,
        }
    }

    /// Column `c` of device `i`.
    pub fn profile(&self, i: usize, c: usize) -> &[f64] {
        match self {
            Self::Individual(v) => v[i].get(c),
            Self::Shared { profiles, .. } => profiles.get(c),
        }
    }
}

/// V-representation of the inner approximation.
///
/// Column `c < sign_vectors.len()` is the sum of the devices' corrected
/// extreme actions for `sign_vectors[c]`. When `has_zero_column` is set the
/// final column is the zero profile (no use of flexibility).
#[derive(Debug, Clone, PartialEq)]
pub struct VertexMatrix {
    columns: Profiles,
    sign_vectors: Vec<SignVector>,
    has_zero_column: bool,
    per_device: Option<DeviceVertices>,
}

impl VertexMatrix {
    /// Assembles a matrix from already computed parts, checking shapes.
    pub fn from_parts(
        columns: Profiles,
        sign_vectors: Vec<SignVector>,
        has_zero_column: bool,
        per_device: Option<DeviceVertices>,
    ) -> Result<Self> {
        let expected = sign_vectors.len() + usize::from(has_zero_column);
        if columns.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: columns.len(),
            });
        }
        if let Some(j) = sign_vectors.iter().find(|j| j.len() != columns.dim()) {
            return Err(Error::DimensionMismatch {
                expected: columns.dim(),
                found: j.len(),
            });
        }
        if has_zero_column && columns.get(expected - 1).iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidParameter("last column must be zero".into()));
        }
        match &per_device {
            Some(DeviceVertices::Individual(v)) => {
                if let Some(p) = v
                    .iter()
                    .find(|p| p.dim() != columns.dim() || p.len() != sign_vectors.len())
                {
                    return Err(Error::DimensionMismatch {
                        expected: sign_vectors.len(),
                        found: p.len(),
                    });
                }
            }
            Some(DeviceVertices::Shared { profiles, .. })
                if profiles.dim() != columns.dim() || profiles.len() != sign_vectors.len() =>
            {
                return Err(Error::DimensionMismatch {
                    expected: sign_vectors.len(),
                    found: profiles.len(),
                });
            }
            _ => {}
        }
        Ok(Self {
            columns,
            sign_vectors,
            has_zero_column,
            per_device,
        })
    }

    pub fn dim(&self) -> usize {
        self.columns.dim()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, c: usize) -> &[f64] {
        self.columns.get(c)
    }

    pub fn columns(&self) -> &Profiles {
        &self.columns
    }

    pub fn sign_vectors(&self) -> &[SignVector] {
        &self.sign_vectors
    }

    pub fn has_zero_column(&self) -> bool {
        self.has_zero_column
    }

    pub fn per_device(&self) -> Option<&DeviceVertices> {
        self.per_device.as_ref()
    }

    /// Drops the per-device matrices.
    pub fn without_per_device(mut self) -> Self {
        self.per_device = None;
        self
    }

    /// `V alpha` for a weight vector over all columns.
    pub fn combine(&self, weights: &[f64]) -> Result<Vec<f64>> {
        if weights.len() != self.num_columns() {
            return Err(Error::DimensionMismatch {
                expected: self.num_columns(),
                found: weights.len(),
            });
        }
        let mut out = vec![0.0; self.dim()];
        for (col, &w) in self.columns.iter().zip(weights) {
            if w != 0.0 {
                for (o, v) in out.iter_mut().zip(col) {
                    *o += w * v;
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregateOptions {
    pub retain_per_device: bool,
    /// Append the zero column when every device admits the zero profile.
    pub zero_column: bool,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        Self {
            retain_per_device: true,
            zero_column: true,
        }
    }
}

/// A validated set of devices on a common time grid, ready for vertex
/// generation.
#[derive(Debug, Clone)]
pub struct Fleet {
    specs: Vec<StorageSpec>,
    final_energy: Vec<FinalEnergy>,
    d: usize,
}

impl Fleet {
    pub fn new(specs: &[StorageSpec]) -> Result<Self> {
        let first = specs
            .first()
            .ok_or_else(|| Error::InvalidParameter("fleet needs at least one device".into()))?;
        for (i, s) in specs.iter().enumerate() {
            s.validate()
                .map_err(|e| Error::InvalidParameter(format!("device {i}: {e}")))?;
            if s.d != first.d {
                return Err(Error::DimensionMismatch {
                    expected: first.d,
                    found: s.d,
                });
            }
            if s.dt != first.dt {
                return Err(Error::InvalidParameter(format!(
                    "device {i}: time step {} differs from {}",
                    s.dt, first.dt
                )));
            }
            if !battery_nonempty(s) {
                return Err(Error::InvalidParameter(format!(
                    "device {i}: flexibility set is empty"
                )));
            }
        }
        Ok(Self {
            specs: specs.to_vec(),
            final_energy: specs.iter().map(FinalEnergy::new).collect(),
            d: first.d,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn specs(&self) -> &[StorageSpec] {
        &self.specs
    }

    /// Whether the zero profile lies in every device set.
    pub fn zero_feasible(&self) -> bool {
        self.specs
            .iter()
            .all(|s| powi(s.alpha, s.d) * s.s0 >= s.s_f)
    }

    /// Corrected extreme action of device `i` for `j`, written into `out`.
    pub fn device_action_into(&self, i: usize, j: &SignVector, out: &mut [f64]) -> Result<()> {
        let spec = &self.specs[i];
        battery_vertex_into(spec, j.entries(), out);
        self.final_energy[i].apply(spec, out).map(|_| ())
    }

    /// Corrected extreme actions of every device for `j`.
    pub fn device_actions(&self, j: &SignVector) -> Result<Profiles> {
        if j.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: j.len(),
            });
        }
        let mut data = vec![0.0; self.d * self.len()];
        for (i, out) in data.chunks_exact_mut(self.d).enumerate() {
            self.device_action_into(i, j, out)?;
        }
        Profiles::from_flat(self.d, data)
    }

    /// Aggregate column for `j` (pairwise sum over devices).
    pub fn column(&self, j: &SignVector) -> Result<Vec<f64>> {
        let actions = self.device_actions(j)?;
        Ok(sum_profiles(&actions))
    }
}

pub(crate) fn sum_profiles(p: &Profiles) -> Vec<f64> {
    pairwise_sum(p.len(), p.dim(), &|i| p.get(i))
}

/// Selects the sign vectors used for aggregation.
///
/// All `2^d` vectors (in lexicographic order, `-1 < +1`) when `d <= 8` or
/// `g >= 2^d`; otherwise `g` distinct vectors drawn uniformly without
/// replacement, reproducible from `seed`.
pub fn sample_sign_vectors(d: usize, g: usize, seed: u64) -> Vec<SignVector> {
    let g = g.max(1);
    let total = if d < 64 { Some(1u64 << d) } else { None };
    if let Some(total) = total {
        if d <= FULL_ENUMERATION_MAX_D || g as u64 >= total {
            return (0..total).map(|k| SignVector::from_index(k, d)).collect();
        }
        if d <= SHUFFLE_MAX_D && total <= 4 * g as u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut indices: Vec<u64> = (0..total).collect();
            indices.shuffle(&mut rng);
            indices.truncate(g);
            return indices
                .into_iter()
                .map(|k| SignVector::from_index(k, d))
                .collect();
        }
    }
    let words = d.div_ceil(64);
    let tail_bits = d - 64 * (words - 1);
    let tail_mask = if tail_bits == 64 {
        u64::MAX
    } else {
        (1u64 << tail_bits) - 1
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(g);
    while out.len() < g {
        let mut packed: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
        packed[words - 1] &= tail_mask;
        if seen.insert(packed.clone()) {
            out.push(SignVector::from_words(&packed, d));
        }
    }
    out
}

/// Builds the vertex matrix for an explicit list of sign vectors.
pub fn aggregate_with(
    specs: &[StorageSpec],
    signs: Vec<SignVector>,
    options: AggregateOptions,
) -> Result<VertexMatrix> {
    let fleet = Fleet::new(specs)?;
    let d = fleet.dim();
    if let Some(j) = signs.iter().find(|j| j.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: j.len(),
        });
    }
    let distinct: BTreeSet<&SignVector> = signs.iter().collect();
    if distinct.len() != signs.len() {
        return Err(Error::InvalidParameter(
            "sign vectors must be distinct".into(),
        ));
    }
    let zero = options.zero_column && fleet.zero_feasible();
    let mut columns = Profiles::with_capacity(d, signs.len() + usize::from(zero));
    let mut devices: Vec<Profiles> = if options.retain_per_device {
        (0..fleet.len())
            .map(|_| Profiles::with_capacity(d, signs.len()))
            .collect()
    } else {
        Vec::new()
    };
    for j in &signs {
        let actions = fleet.device_actions(j)?;
        columns.push(&sum_profiles(&actions));
        for (dev, action) in devices.iter_mut().zip(actions.iter()) {
            dev.push(action);
        }
    }
    if zero {
        columns.push(&vec![0.0; d]);
    }
    let per_device = options
        .retain_per_device
        .then_some(DeviceVertices::Individual(devices));
    VertexMatrix::from_parts(columns, signs, zero, per_device)
}

/// Vertex matrix of a heterogeneous fleet with `g` sampled sign vectors.
pub fn aggregate(specs: &[StorageSpec], g: usize, seed: u64) -> Result<VertexMatrix> {
    let d = specs
        .first()
        .ok_or_else(|| Error::InvalidParameter("fleet needs at least one device".into()))?
        .d;
    aggregate_with(
        specs,
        sample_sign_vectors(d, g, seed),
        AggregateOptions::default(),
    )
}

/// Fast path for `n` devices with identical parameters: the single-device
/// matrix is computed once and scaled by `n`.
///
/// Matches [`aggregate`] on `n` copies up to the rounding of `n * y` versus
/// the pairwise sum (bit-identical for `n <= 4` and powers of two).
pub fn aggregate_identical(
    spec: &StorageSpec,
    n: usize,
    g: usize,
    seed: u64,
    options: AggregateOptions,
) -> Result<VertexMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let fleet = Fleet::new(core::slice::from_ref(spec))?;
    let d = fleet.dim();
    let signs = sample_sign_vectors(d, g, seed);
    let mut single = Profiles::with_capacity(d, signs.len());
    let mut buf = vec![0.0; d];
    for j in &signs {
        fleet.device_action_into(0, j, &mut buf)?;
        single.push(&buf);
    }
    let mut columns = single.scaled(n as f64);
    let zero = options.zero_column && fleet.zero_feasible();
    if zero {
        columns.push(&vec![0.0; d]);
    }
    let per_device = options.retain_per_device.then_some(DeviceVertices::Shared {
        profiles: single,
        multiplicity: n,
    });
    VertexMatrix::from_parts(columns, signs, zero, per_device)
}
