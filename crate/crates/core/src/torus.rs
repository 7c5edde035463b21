//! Geometry of the `n x m` torus and its dual lattice.
//!
//! Vertices are `(x1, x2)` with `x1` the column (horizontal, length `n`) and
//! `x2` the row (vertical, length `m`). Dual vertex `(x1, k)` is the vertical
//! edge between rows `k` and `k + 1` of column `x1`; it is the midpoint
//! `(x1, k) + 1/2`. Dense arrays are column-major: index `x1 * m + x2`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Model dimensions derived from `(m, C')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusDims {
    /// Vertical size.
    pub m: usize,
    /// The constant `C'`; `None` when the dims were built from explicit sizes.
    pub cprime: Option<f64>,
    /// Horizontal excess `C(m) = ceil(C' sqrt(m ln m))`.
    pub cm: usize,
    /// Horizontal size `m + C(m)`.
    pub n: usize,
    /// Strands per global traversal, `floor(m / C(m) - 2 m^(1/4))`. May be `< 1`.
    pub gamma: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub x1: usize,
    pub x2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualVertex {
    pub x1: usize,
    pub k: usize,
}

impl Vertex {
    pub fn new(x1: usize, x2: usize) -> Self {
        Self { x1, x2 }
    }
}

impl DualVertex {
    pub fn new(x1: usize, k: usize) -> Self {
        Self { x1, k }
    }
}

/// Builds the dims for vertical size `m` and constant `cprime`.
///
/// Degenerate `gamma < 1` is reported through [`TorusDims::is_degenerate`]
/// rather than rejected.
pub fn make_dims(m: usize, cprime: f64) -> Result<TorusDims> {
    if m < 2 {
        return Err(invalid("m", format!("need m >= 2, got {m}")));
    }
    if !(cprime > 0.0 && cprime.is_finite()) {
        return Err(invalid("cprime", format!("need a positive constant, got {cprime}")));
    }
    let mf = m as f64;
    let cm = (cprime * (mf * mf.ln()).sqrt()).ceil() as usize;
    let mut dims = TorusDims::from_offset(m, cm.max(1))?;
    dims.cprime = Some(cprime);
    Ok(dims)
}

/// `m^(1/4)`, exact when `m` is a perfect fourth power.
fn fourth_root(m: usize) -> f64 {
    let r = (m as f64).powf(0.25).round() as usize;
    if r.pow(4) == m {
        r as f64
    } else {
        (m as f64).powf(0.25)
    }
}

impl TorusDims {
    /// Dims with an explicit horizontal excess `cm = n - m`.
    pub fn from_offset(m: usize, cm: usize) -> Result<Self> {
        if m < 2 {
            return Err(invalid("m", format!("need m >= 2, got {m}")));
        }
        if cm == 0 {
            return Err(invalid("cm", "horizontal excess must be positive"));
        }
        let gamma = (m as f64 / cm as f64 - 2.0 * fourth_root(m)).floor() as i64;
        Ok(Self {
            m,
            cprime: None,
            cm,
            n: m + cm,
            gamma,
        })
    }

    /// Dims for an explicit `n x m` torus with `n > m`.
    pub fn from_sizes(n: usize, m: usize) -> Result<Self> {
        if n <= m {
            return Err(invalid("n", format!("need n > m, got n = {n}, m = {m}")));
        }
        Self::from_offset(m, n - m)
    }

    pub fn is_degenerate(&self) -> bool {
        self.gamma < 1
    }

    /// `gamma` as a count, failing if it is below `required`.
    pub fn require_gamma(&self, required: i64) -> Result<usize> {
        if self.gamma < required {
            Err(Error::DegenerateGamma {
                gamma: self.gamma,
                required,
            })
        } else {
            Ok(self.gamma as usize)
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n * self.m
    }

    #[inline]
    pub fn index(&self, v: Vertex) -> usize {
        v.x1 * self.m + v.x2
    }

    #[inline]
    pub fn vertex(&self, idx: usize) -> Vertex {
        Vertex::new(idx / self.m, idx % self.m)
    }

    /// Reduces arbitrary integer coordinates onto the torus.
    pub fn wrap(&self, x1: i64, x2: i64) -> Vertex {
        Vertex::new(
            x1.rem_euclid(self.n as i64) as usize,
            x2.rem_euclid(self.m as i64) as usize,
        )
    }

    /// The two vertices joined by the dual vertex: `(v - 1/2, v + 1/2)`.
    pub fn endpoints(&self, v: DualVertex) -> (Vertex, Vertex) {
        (
            Vertex::new(v.x1, v.k),
            Vertex::new(v.x1, (v.k + 1) % self.m),
        )
    }
}

/// Cyclic graph distance between rows `a` and `b` of `C_m`.
#[inline]
pub fn vertical_dist(a: usize, b: usize, m: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(m - d)
}
