//! Directed spatial permutations and their arrow-field representation.
//!
//! A field assigns each vertex a step `phi in {-1, 0, 1}`; the map is
//! `(x1, x2) -> (x1 + 1, x2 + phi + 1)`. Without global shifts, a bijective
//! field is the image of one independent set per dual column: `phi = +1` at
//! `(j, k)` iff dual `(j, k)` is occupied and `phi = -1` iff dual `(j, k - 1)`
//! is occupied.
//!
//! The hard-core activity matching the step law is `a^2 / (1 - 2a)^2`: a
//! column with `s` swaps carries `2s` nonzero steps of mass `a` and `m - 2s`
//! zero steps of mass `1 - 2a`. The value `a^2 / (1 - a)^2` is available as
//! [`ActivityConvention::Literal`] for comparison only; it does not reproduce
//! the conditioned law.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hardcore::{Activity, ColumnSampler, HardCoreColumn};
use crate::rng::derive_stream;
use crate::scalar::Real;
use crate::torus::{DualVertex, TorusDims, Vertex};

/// Step law parameter: `P[phi = 1] = P[phi = -1] = a`, `0 < a < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParam<T>(T);

impl<T: Real> StepParam<T> {
    pub fn new(a: T) -> Result<Self> {
        if a > T::zero() && a < T::lit(0.5) {
            Ok(Self(a))
        } else {
            Err(invalid("a", format!("need 0 < a < 1/2, got {a}")))
        }
    }

    pub fn a(&self) -> T {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityConvention {
    /// `a^2 / (1 - 2a)^2`, the activity of the conditioned model.
    #[default]
    Corrected,
    /// `a^2 / (1 - a)^2`.
    Literal,
}

pub fn activity_from_step<T: Real>(p: StepParam<T>) -> Activity<T> {
    activity_with_convention(p, ActivityConvention::Corrected)
}

pub fn activity_with_convention<T: Real>(p: StepParam<T>, conv: ActivityConvention) -> Activity<T> {
    let a = p.a();
    let zero_mass = match conv {
        ActivityConvention::Corrected => T::one() - T::lit(2.0) * a,
        ActivityConvention::Literal => T::one() - a,
    };
    let r = a / zero_mass;
    Activity::new(r * r).expect("0 < a < 1/2 gives a positive activity")
}

/// Steps of a single column, not necessarily bijective.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColumnConfig {
    pub steps: Vec<i8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlobalShift {
    None,
    Up,
    Down,
}

/// Whether `k -> k + steps[k] + 1 (mod m)` is injective.
pub fn is_column_bijection(col: &ColumnConfig) -> bool {
    let m = col.steps.len();
    let mut seen = vec![false; m];
    for (k, &s) in col.steps.iter().enumerate() {
        let img = (k as i64 + s as i64 + 1).rem_euclid(m as i64) as usize;
        if std::mem::replace(&mut seen[img], true) {
            return false;
        }
    }
    true
}

pub fn detect_global_shift(col: &ColumnConfig) -> GlobalShift {
    detect_shift_slice(&col.steps)
}

fn detect_shift_slice(steps: &[i8]) -> GlobalShift {
    if !steps.is_empty() && steps.iter().all(|&s| s == 1) {
        GlobalShift::Up
    } else if !steps.is_empty() && steps.iter().all(|&s| s == -1) {
        GlobalShift::Down
    } else {
        GlobalShift::None
    }
}

/// Arrow steps of one column induced by an independent set of its dual column.
pub fn column_arrows(occ: &[bool], out: &mut [i8]) {
    let m = occ.len();
    for k in 0..m {
        out[k] = if occ[k] {
            1
        } else if occ[(k + m - 1) % m] {
            -1
        } else {
            0
        };
    }
}

/// Per-vertex steps on the torus, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrowField {
    dims: TorusDims,
    arrows: Vec<i8>,
}

const MAGIC: u64 = u64::from_le_bytes(*b"DSPARROW");
const FORMAT_VERSION: u64 = 1;
const HEADER_LEN: usize = 32;

#[derive(Serialize, Deserialize)]
struct FieldDump {
    n: usize,
    m: usize,
    arrows: Vec<Vec<i8>>,
}

impl ArrowField {
    pub fn zeros(dims: TorusDims) -> Self {
        Self {
            dims,
            arrows: vec![0; dims.vertex_count()],
        }
    }

    /// Wraps raw column-major steps, checking range and bijectivity.
    pub fn from_arrows(dims: TorusDims, arrows: Vec<i8>) -> Result<Self> {
        if arrows.len() != dims.vertex_count() {
            return Err(Error::Decode(format!(
                "expected {} arrows, got {}",
                dims.vertex_count(),
                arrows.len()
            )));
        }
        if arrows.iter().any(|s| !(-1..=1).contains(s)) {
            return Err(Error::Decode("arrow outside {-1, 0, 1}".into()));
        }
        let field = Self { dims, arrows };
        if !field.is_bijective() {
            return Err(Error::Decode("field is not a bijection".into()));
        }
        Ok(field)
    }

    pub fn dims(&self) -> &TorusDims {
        &self.dims
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.arrows
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> i8 {
        self.arrows[self.dims.index(v)]
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[i8] {
        let m = self.dims.m;
        &self.arrows[j * m..(j + 1) * m]
    }

    pub(crate) fn column_mut(&mut self, j: usize) -> &mut [i8] {
        let m = self.dims.m;
        &mut self.arrows[j * m..(j + 1) * m]
    }

    /// `Phi(v) = (x1 + 1, x2 + phi_v + 1)`.
    #[inline]
    pub fn apply(&self, v: Vertex) -> Vertex {
        let m = self.dims.m;
        let s = self.get(v) as isize;
        Vertex::new(
            (v.x1 + 1) % self.dims.n,
            ((v.x2 as isize + s + 1).rem_euclid(m as isize)) as usize,
        )
    }

    pub fn is_bijective(&self) -> bool {
        (0..self.dims.n).all(|j| {
            is_column_bijection(&ColumnConfig {
                steps: self.column(j).to_vec(),
            })
        })
    }

    pub fn column_shift(&self, j: usize) -> GlobalShift {
        detect_shift_slice(self.column(j))
    }

    pub fn has_global_shift(&self) -> bool {
        (0..self.dims.n).any(|j| self.column_shift(j) != GlobalShift::None)
    }

    /// Occupied dual sites of column `j` (swap locations).
    pub fn column_occupancy(&self, j: usize) -> HardCoreColumn {
        HardCoreColumn::from_bits_unchecked(self.column(j).iter().map(|&s| s == 1).collect())
    }

    /// Whether dual vertex `v` carries a swap, i.e. arrows `(+1, -1)`.
    pub fn is_swap(&self, v: DualVertex) -> bool {
        let (lo, hi) = self.dims.endpoints(v);
        self.get(lo) == 1 && self.get(hi) == -1
    }

    pub fn swap_count(&self) -> usize {
        self.arrows.iter().filter(|&&s| s == 1).count()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.arrows.len());
        for word in [MAGIC, FORMAT_VERSION, self.dims.n as u64, self.dims.m as u64] {
            out.extend_from_slice(&word.to_le_bytes());
        }
        out.extend(self.arrows.iter().map(|&s| s as u8));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Decode("truncated header".into()));
        }
        let word = |i: usize| u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().unwrap());
        if word(0) != MAGIC {
            return Err(Error::Decode("bad magic".into()));
        }
        if word(1) != FORMAT_VERSION {
            return Err(Error::Decode(format!("unsupported version {}", word(1))));
        }
        let (n, m) = (word(2) as usize, word(3) as usize);
        let dims = TorusDims::from_sizes(n, m).map_err(|e| Error::Decode(e.to_string()))?;
        let body = &bytes[HEADER_LEN..];
        if body.len() != n * m {
            return Err(Error::Decode(format!("expected {} arrow bytes, got {}", n * m, body.len())));
        }
        Self::from_arrows(dims, body.iter().map(|&b| b as i8).collect())
    }

    pub fn to_json(&self) -> String {
        let dump = FieldDump {
            n: self.dims.n,
            m: self.dims.m,
            arrows: self.arrows.chunks(self.dims.m).map(<[i8]>::to_vec).collect(),
        };
        serde_json::to_string(&dump).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let dump: FieldDump = serde_json::from_str(s)?;
        let dims = TorusDims::from_sizes(dump.n, dump.m).map_err(|e| Error::Decode(e.to_string()))?;
        if dump.arrows.len() != dump.n || dump.arrows.iter().any(|c| c.len() != dump.m) {
            return Err(Error::Decode("ragged arrow array".into()));
        }
        Self::from_arrows(dims, dump.arrows.concat())
    }
}

/// Applies the hard-core/arrow coupling column by column.
pub fn arrows_from_columns(cols: &[HardCoreColumn], dims: TorusDims) -> Result<ArrowField> {
    if cols.len() != dims.n {
        return Err(invalid("cols", format!("need {} columns, got {}", dims.n, cols.len())));
    }
    let mut field = ArrowField::zeros(dims);
    for (j, c) in cols.iter().enumerate() {
        if c.len() != dims.m {
            return Err(invalid("cols", format!("column {j} has length {}", c.len())));
        }
        column_arrows(c.as_slice(), field.column_mut(j));
    }
    Ok(field)
}

pub const DEFAULT_ATTEMPT_CAP: u64 = 10_000_000;

/// Draws IID columns from the step law and keeps the first bijective one.
///
/// The draw of a column stops at its first image collision, which leaves the
/// accepted law unchanged.
#[derive(Debug, Clone)]
pub struct RejectionSampler {
    m: usize,
    up: u64,
    down: u64,
    exclude_shifts: bool,
    pub max_attempts: u64,
}

impl RejectionSampler {
    pub fn new<T: Real>(m: usize, p: StepParam<T>, exclude_shifts: bool) -> Result<Self> {
        if !(3..=64).contains(&m) {
            return Err(invalid("m", format!("rejection oracle supports 3 <= m <= 64, got {m}")));
        }
        let a = p.a().to_f64().unwrap();
        let scale = 18446744073709551616.0;
        Ok(Self {
            m,
            up: (a * scale) as u64,
            down: (2.0 * a * scale) as u64,
            exclude_shifts,
            max_attempts: DEFAULT_ATTEMPT_CAP,
        })
    }

    /// An accepted column and the number of attempts it took.
    pub fn sample_counted<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<(ColumnConfig, u64)> {
        let m = self.m;
        let mut steps = vec![0i8; m];
        'attempt: for attempt in 1..=self.max_attempts {
            let mut taken = 0u64;
            for (k, slot) in steps.iter_mut().enumerate() {
                let u = rng.next_u64();
                let s: i8 = if u < self.up {
                    1
                } else if u < self.down {
                    -1
                } else {
                    0
                };
                let img = (k as i64 + s as i64 + 1).rem_euclid(m as i64) as u32;
                if taken >> img & 1 == 1 {
                    continue 'attempt;
                }
                taken |= 1 << img;
                *slot = s;
            }
            if self.exclude_shifts && detect_shift_slice(&steps) != GlobalShift::None {
                continue;
            }
            return Ok((ColumnConfig { steps }, attempt));
        }
        Err(Error::AttemptCap {
            attempts: self.max_attempts,
            m,
        })
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<ColumnConfig> {
        self.sample_counted(rng).map(|(c, _)| c)
    }
}

pub fn rejection_sample_column<T: Real, R: Rng + ?Sized>(
    m: usize,
    p: StepParam<T>,
    exclude_shifts: bool,
    rng: &mut R,
) -> Result<ColumnConfig> {
    RejectionSampler::new(m, p, exclude_shifts)?.sample(rng)
}

/// Exact sampler of the shift-free directed spatial permutation.
#[derive(Debug, Clone)]
pub struct EquilibriumSampler {
    dims: TorusDims,
    columns: ColumnSampler,
}

impl EquilibriumSampler {
    pub fn new<T: Real>(dims: TorusDims, p: StepParam<T>) -> Result<Self> {
        Self::with_activity(dims, activity_from_step(p))
    }

    pub fn with_activity<T: Real>(dims: TorusDims, act: Activity<T>) -> Result<Self> {
        Ok(Self {
            dims,
            columns: ColumnSampler::new(dims.m, act)?,
        })
    }

    pub fn dims(&self) -> &TorusDims {
        &self.dims
    }

    pub fn column_sampler(&self) -> &ColumnSampler {
        &self.columns
    }

    /// All columns from one generator, in column order.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> ArrowField {
        let mut field = ArrowField::zeros(self.dims);
        let mut occ = vec![false; self.dims.m];
        for j in 0..self.dims.n {
            self.columns.sample_into(rng, &mut occ);
            column_arrows(&occ, field.column_mut(j));
        }
        field
    }

    /// Column `j` drawn from stream `"{label}/col/{j}"`, so the result does not
    /// depend on how columns are scheduled across threads.
    pub fn sample_streams(&self, seed: u64, label: &str) -> ArrowField {
        let m = self.dims.m;
        let mut field = ArrowField::zeros(self.dims);
        field
            .arrows
            .par_chunks_mut(m)
            .enumerate()
            .for_each_init(
                || vec![false; m],
                |occ, (j, col)| {
                    let mut rng = derive_stream(seed, &format!("{label}/col/{j}"));
                    self.columns.sample_into(&mut rng, occ);
                    column_arrows(occ, col);
                },
            );
        field
    }
}

pub fn sample_equilibrium<T: Real, R: Rng + ?Sized>(
    dims: TorusDims,
    p: StepParam<T>,
    rng: &mut R,
) -> Result<ArrowField> {
    Ok(EquilibriumSampler::new(dims, p)?.sample(rng))
}
