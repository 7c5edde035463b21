//! Cycles, strands, global traversals and contacts of a directed spatial
//! permutation.
//!
//! Every orbit advances one column per step, so it meets column 0 and its
//! length is `K n` where `K` is the number of its strands. The fast path
//! composes the `n` column maps into the return map `R` on column 0; cycles
//! of the permutation are the cycles of `R`. Explicit orbits are only built
//! by [`extract_cycles`].

use std::collections::HashSet;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::permutation::ArrowField;
use crate::torus::{vertical_dist, DualVertex, TorusDims, Vertex};

/// Advances the rows of all strands through column `col`.
#[inline]
pub(crate) fn advance(col: &[i8], pos: &mut [u32]) {
    let m = col.len() as u32;
    for p in pos.iter_mut() {
        let mut r = *p + (col[*p as usize] + 1) as u32;
        if r >= m {
            r -= m;
        }
        *p = r;
    }
}

/// Column-0 return map: `R[r]` is the row at which the strand leaving
/// `(0, r)` re-enters column 0.
pub fn return_map(field: &ArrowField) -> Vec<u32> {
    let dims = field.dims();
    let mut pos: Vec<u32> = (0..dims.m as u32).collect();
    for j in 0..dims.n {
        advance(field.column(j), &mut pos);
    }
    pos
}

#[derive(Debug, Clone, PartialEq)]
struct Orbits {
    vertices: Vec<u32>,
    offsets: Vec<usize>,
    membership: Vec<u32>,
}

/// Cycle structure of a field.
///
/// Cycles are ordered by their anchor, the minimal vertex in column-major
/// order, which always lies in column 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleDecomposition {
    dims: TorusDims,
    anchors: Vec<u32>,
    strands: Vec<usize>,
    row_cycle: Vec<u32>,
    return_map: Vec<u32>,
    orbits: Option<Orbits>,
}

impl CycleDecomposition {
    fn from_return_map(dims: TorusDims, map: Vec<u32>) -> Self {
        let m = dims.m;
        let mut row_cycle = vec![u32::MAX; m];
        let mut anchors = Vec::new();
        let mut strands = Vec::new();
        for r in 0..m {
            if row_cycle[r] != u32::MAX {
                continue;
            }
            let id = anchors.len() as u32;
            anchors.push(r as u32);
            let mut x = r;
            let mut k = 0;
            while row_cycle[x] == u32::MAX {
                row_cycle[x] = id;
                k += 1;
                x = map[x] as usize;
            }
            strands.push(k);
        }
        Self {
            dims,
            anchors,
            strands,
            row_cycle,
            return_map: map,
            orbits: None,
        }
    }

    pub fn dims(&self) -> &TorusDims {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Vertex counts `K n` per cycle.
    pub fn lengths(&self) -> Vec<usize> {
        self.strands.iter().map(|k| k * self.dims.n).collect()
    }

    /// Strand counts `K` per cycle.
    pub fn strand_counts(&self) -> &[usize] {
        &self.strands
    }

    pub fn anchor(&self, cycle: usize) -> Vertex {
        Vertex::new(0, self.anchors[cycle] as usize)
    }

    /// Normalized lengths `|c| / (n m)`, non-increasing.
    pub fn structure(&self) -> Vec<f64> {
        let mut ks = self.strands.clone();
        ks.sort_unstable_by(|a, b| b.cmp(a));
        ks.into_iter().map(|k| k as f64 / self.dims.m as f64).collect()
    }

    pub fn largest(&self) -> f64 {
        self.strands.iter().copied().max().unwrap_or(0) as f64 / self.dims.m as f64
    }

    pub fn return_map(&self) -> &[u32] {
        &self.return_map
    }

    /// Cycle id of the strand starting at `(0, row)`.
    pub fn row_cycle(&self, row: usize) -> usize {
        self.row_cycle[row] as usize
    }

    /// Column-0 rows of a cycle in traversal order from its anchor.
    pub fn strand_rows(&self, cycle: usize) -> Vec<u32> {
        let start = self.anchors[cycle];
        let mut out = Vec::with_capacity(self.strands[cycle]);
        let mut r = start;
        loop {
            out.push(r);
            r = self.return_map[r as usize];
            if r == start {
                return out;
            }
        }
    }

    /// Explicit orbit of a cycle as column-major vertex indices, when built
    /// by [`extract_cycles`].
    pub fn orbit(&self, cycle: usize) -> Option<&[u32]> {
        self.orbits
            .as_ref()
            .map(|o| &o.vertices[o.offsets[cycle]..o.offsets[cycle + 1]])
    }

    /// Cycle containing `v`.
    pub fn cycle_of(&self, field: &ArrowField, v: Vertex) -> usize {
        if let Some(o) = &self.orbits {
            return o.membership[self.dims.index(v)] as usize;
        }
        self.row_cycle[row_at_column0(field, v)] as usize
    }
}

/// Row in column 0 of the strand passing through `v`, found by walking
/// backward to column 0.
pub fn row_at_column0(field: &ArrowField, v: Vertex) -> usize {
    let m = field.dims().m;
    let mut r = v.x2;
    for j in (0..v.x1).rev() {
        r = preimage_row(field.column(j), r, m);
    }
    r
}

/// The unique row of `col` mapped to row `r`.
#[inline]
pub(crate) fn preimage_row(col: &[i8], r: usize, m: usize) -> usize {
    // candidates r - 2 (step +1), r - 1 (step 0), r (step -1)
    for back in 0..3usize {
        let cand = (r + 3 * m - 2 + back) % m;
        if col[cand] as isize == 1 - back as isize {
            return cand;
        }
    }
    unreachable!("column is not a bijection")
}

/// Cycle structure through the return map, without materializing orbits.
pub fn decompose(field: &ArrowField) -> CycleDecomposition {
    CycleDecomposition::from_return_map(*field.dims(), return_map(field))
}

/// Full orbit partition by a column-major scan with a visited bitmap.
pub fn extract_cycles(field: &ArrowField) -> CycleDecomposition {
    let dims = *field.dims();
    let total = dims.vertex_count();
    let mut membership = vec![u32::MAX; total];
    let mut vertices = Vec::with_capacity(total);
    let mut offsets = vec![0usize];
    let mut map = vec![0u32; dims.m];
    for s in 0..total {
        if membership[s] != u32::MAX {
            continue;
        }
        let id = (offsets.len() - 1) as u32;
        let mut v = dims.vertex(s);
        loop {
            let idx = dims.index(v);
            if membership[idx] != u32::MAX {
                break;
            }
            membership[idx] = id;
            vertices.push(idx as u32);
            let w = field.apply(v);
            if w.x1 == 0 {
                map[row_at_column0(field, v)] = w.x2 as u32;
            }
            v = w;
        }
        offsets.push(vertices.len());
    }
    let mut dec = CycleDecomposition::from_return_map(dims, map);
    debug_assert_eq!(dec.len(), offsets.len() - 1);
    dec.orbits = Some(Orbits {
        vertices,
        offsets,
        membership,
    });
    dec
}

/// Cycle id of every vertex, column-major.
pub fn vertex_cycle_labels(field: &ArrowField, dec: &CycleDecomposition) -> Vec<u32> {
    let dims = field.dims();
    let m = dims.m;
    let mut out = vec![0u32; dims.vertex_count()];
    let mut pos: Vec<u32> = (0..m as u32).collect();
    for j in 0..dims.n {
        let col_labels = &mut out[j * m..(j + 1) * m];
        for (r, &p) in pos.iter().enumerate() {
            col_labels[p as usize] = dec.row_cycle[r];
        }
        advance(field.column(j), &mut pos);
    }
    out
}

/// The `n`-vertex forward orbit segment from a vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strand {
    pub start: Vertex,
    pub path: Vec<Vertex>,
    /// Vertical steps between consecutive path entries.
    pub increments: Vec<i8>,
    /// Image of the last path vertex, the start of the next strand.
    pub end: Vertex,
    pub m: usize,
}

impl Strand {
    /// Row of the strand in column `j`.
    pub fn row_in(&self, j: usize) -> usize {
        let n = self.path.len();
        self.path[(j + n - self.start.x1) % n].x2
    }
}

pub fn strand_at(field: &ArrowField, v: Vertex) -> Strand {
    let n = field.dims().n;
    let mut path = Vec::with_capacity(n);
    let mut increments = Vec::with_capacity(n - 1);
    let mut x = v;
    for k in 0..n {
        path.push(x);
        if k + 1 < n {
            increments.push(field.get(x));
        }
        x = field.apply(x);
    }
    Strand {
        start: v,
        path,
        increments,
        end: x,
        m: field.dims().m,
    }
}

fn column_dists<'a>(a: &'a Strand, b: &'a Strand) -> impl Iterator<Item = usize> + 'a {
    (0..a.path.len()).map(move |j| vertical_dist(a.row_in(j), b.row_in(j), a.m))
}

/// Minimum over columns of the vertical distance between two strands.
pub fn dist_minus(a: &Strand, b: &Strand) -> usize {
    column_dists(a, b).min().unwrap_or(0)
}

/// Maximum over columns of the vertical distance between two strands.
pub fn dist_plus(a: &Strand, b: &Strand) -> usize {
    column_dists(a, b).max().unwrap_or(0)
}

/// Outcome of the separation check for all consecutive strand pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationRecord {
    pub holds: bool,
    /// Smallest `dist-` over consecutive pairs.
    pub min_gap: usize,
    /// Largest `dist+` over consecutive pairs.
    pub max_gap: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Checks `dist- >= D s` and `dist+ <= (4 + 3D/2) s` for every strand from
/// column 0 and the strand starting at its endpoint, `s = sqrt(m ln m)`.
pub fn check_separation_event(field: &ArrowField, d: f64) -> SeparationRecord {
    let dims = field.dims();
    let m = dims.m;
    let map = return_map(field);
    let mut pos: Vec<u32> = (0..m as u32).collect();
    let (mut lo, mut hi) = (usize::MAX, 0usize);
    for j in 0..dims.n {
        for r in 0..m {
            let g = vertical_dist(pos[r] as usize, pos[map[r] as usize] as usize, m);
            lo = lo.min(g);
            hi = hi.max(g);
        }
        advance(field.column(j), &mut pos);
    }
    let s = ((m as f64) * (m as f64).ln()).sqrt();
    let lower = d * s;
    let upper = (4.0 + 1.5 * d) * s;
    SeparationRecord {
        holds: lo as f64 >= lower && hi as f64 <= upper,
        min_gap: lo,
        max_gap: hi,
        lower,
        upper,
    }
}

/// Contact rule on the arrows at the two endpoints of a dual vertex.
#[inline]
pub fn is_contact_pair(lo: i8, hi: i8) -> bool {
    (lo == 1 && hi == -1) || (lo == 0 && hi == 0)
}

pub fn is_contact(field: &ArrowField, v: DualVertex) -> bool {
    let (a, b) = field.dims().endpoints(v);
    is_contact_pair(field.get(a), field.get(b))
}

/// Dual vertices whose arrows swap or are parallel, in column-major order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactSet {
    pub sites: Vec<DualVertex>,
}

impl ContactSet {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, v: DualVertex) -> bool {
        self.sites.binary_search(&v).is_ok()
    }
}

pub fn contacts(field: &ArrowField) -> ContactSet {
    let dims = field.dims();
    let mut sites = Vec::new();
    for j in 0..dims.n {
        let col = field.column(j);
        for k in 0..dims.m {
            if is_contact_pair(col[k], col[(k + 1) % dims.m]) {
                sites.push(DualVertex::new(j, k));
            }
        }
    }
    ContactSet { sites }
}

pub fn contact_count(field: &ArrowField) -> usize {
    let dims = field.dims();
    (0..dims.n)
        .map(|j| {
            let col = field.column(j);
            (0..dims.m)
                .filter(|&k| is_contact_pair(col[k], col[(k + 1) % dims.m]))
                .count()
        })
        .sum()
}

/// Contacts with one endpoint in `a` and the other in `b`.
///
/// Each dual site counts once even when `a` and `b` overlap, so
/// `contacts_between(f, V, V)` is the number of contacts of `f`.
pub fn contacts_between(field: &ArrowField, a: &HashSet<Vertex>, b: &HashSet<Vertex>) -> usize {
    let dims = field.dims();
    let mut seen = HashSet::new();
    for &x in a {
        // x as lower endpoint, and x as upper endpoint
        let down = DualVertex::new(x.x1, (x.x2 + dims.m - 1) % dims.m);
        for v in [DualVertex::new(x.x1, x.x2), down] {
            let (lo, hi) = dims.endpoints(v);
            let other = if lo == x { hi } else { lo };
            if b.contains(&other) && is_contact(field, v) {
                seen.insert(v);
            }
        }
    }
    seen.len()
}

/// Complete and fractional global traversals of a cycle with `strands`
/// strands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraversalCount {
    pub whole: usize,
    /// `K mod gamma`; the fractional part is `rem / gamma`.
    pub rem: usize,
    pub gamma: usize,
}

impl TraversalCount {
    pub fn new(strands: usize, gamma: usize) -> Self {
        assert!(gamma >= 1);
        Self {
            whole: strands / gamma,
            rem: strands % gamma,
            gamma,
        }
    }

    pub fn frac(&self) -> Ratio<usize> {
        Ratio::new(self.rem, self.gamma)
    }

    pub fn strands(&self) -> usize {
        self.whole * self.gamma + self.rem
    }
}

pub fn traversal_counts(dec: &CycleDecomposition) -> Result<Vec<TraversalCount>> {
    let gamma = dec.dims().require_gamma(1)?;
    Ok(dec
        .strand_counts()
        .iter()
        .map(|&k| TraversalCount::new(k, gamma))
        .collect())
}

pub const NO_TRAVERSAL: u32 = u32::MAX;

/// Traversal id of every column-0 strand. Cycle `c` is cut into
/// `floor(K / gamma)` traversals of `gamma` strands starting at its anchor;
/// the remaining strands carry [`NO_TRAVERSAL`].
pub fn traversal_labels(dec: &CycleDecomposition) -> Result<(Vec<u32>, usize)> {
    let gamma = dec.dims().require_gamma(1)?;
    let mut labels = vec![NO_TRAVERSAL; dec.dims().m];
    let mut next = 0u32;
    for c in 0..dec.len() {
        let rows = dec.strand_rows(c);
        let whole = rows.len() / gamma;
        for (i, &r) in rows.iter().enumerate().take(whole * gamma) {
            labels[r as usize] = next + (i / gamma) as u32;
        }
        next += whole as u32;
    }
    Ok((labels, next as usize))
}

#[inline]
pub fn pair_index(a: usize, b: usize, count: usize) -> usize {
    let (i, j) = if a < b { (a, b) } else { (b, a) };
    i * count - i * (i + 1) / 2 + (j - i - 1)
}

/// Contact counts for every unordered pair of distinct traversals, indexed by
/// [`pair_index`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairContacts {
    pub traversals: usize,
    pub counts: Vec<u32>,
}

pub fn traversal_pair_contacts(field: &ArrowField, dec: &CycleDecomposition) -> Result<PairContacts> {
    let dims = field.dims();
    dims.require_gamma(2)?;
    let (labels, t) = traversal_labels(dec)?;
    let m = dims.m;
    let mut counts = vec![0u32; t * t.saturating_sub(1) / 2];
    let mut pos: Vec<u32> = (0..m as u32).collect();
    let mut row_label = vec![NO_TRAVERSAL; m];
    for j in 0..dims.n {
        for (r, &p) in pos.iter().enumerate() {
            row_label[p as usize] = labels[r];
        }
        let col = field.column(j);
        for k in 0..m {
            let k1 = if k + 1 == m { 0 } else { k + 1 };
            let (la, lb) = (row_label[k], row_label[k1]);
            if la != lb && la != NO_TRAVERSAL && lb != NO_TRAVERSAL && is_contact_pair(col[k], col[k1]) {
                counts[pair_index(la as usize, lb as usize, t)] += 1;
            }
        }
        advance(col, &mut pos);
    }
    Ok(PairContacts { traversals: t, counts })
}

/// Summary of traversal-pair contact counts; the moments are `None` when
/// there is no pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairContactStats {
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub cv: Option<f64>,
    pub pair_count: usize,
}

pub fn pair_contact_summary(counts: &[u32]) -> PairContactStats {
    let n = counts.len();
    if n == 0 {
        return PairContactStats {
            mean: None,
            variance: None,
            cv: None,
            pair_count: 0,
        };
    }
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n as f64;
    let variance = if n > 1 {
        counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    PairContactStats {
        mean: Some(mean),
        variance: Some(variance),
        cv: Some(variance.sqrt() / mean),
        pair_count: n,
    }
}

pub fn traversal_pair_contact_stats(field: &ArrowField) -> Result<PairContactStats> {
    let dec = decompose(field);
    Ok(pair_contact_summary(&traversal_pair_contacts(field, &dec)?.counts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureRow {
    pub sample_id: u64,
    pub rank: usize,
    pub normalized_length: f64,
}

pub fn structure_rows(sample_id: u64, structure: &[f64]) -> Vec<StructureRow> {
    structure
        .iter()
        .enumerate()
        .map(|(rank, &normalized_length)| StructureRow {
            sample_id,
            rank,
            normalized_length,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairContactRow {
    pub sample_id: u64,
    pub pair_id: usize,
    pub count: u32,
}

pub fn pair_contact_rows(sample_id: u64, pc: &PairContacts) -> Vec<PairContactRow> {
    pc.counts
        .iter()
        .enumerate()
        .map(|(pair_id, &count)| PairContactRow {
            sample_id,
            pair_id,
            count,
        })
        .collect()
}
