//! Incremental cycle bookkeeping for a permutation under right
//! multiplication by transpositions.

/// Cycle-level effect of composing with a transposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Effect {
    None,
    Split,
    Merge,
}

/// A permutation of `0..len` with per-element cycle labels.
///
/// `swap_images(x, y)` replaces `pi` by `pi o (x y)`. Relabelling always
/// touches the smaller of the two pieces, so a split or merge costs the
/// length of the smaller cycle.
#[derive(Debug, Clone)]
pub struct CycleTracker {
    perm: Vec<u32>,
    inv: Vec<u32>,
    label: Vec<u32>,
    size: Vec<u32>,
    free: Vec<u32>,
    count: usize,
}

impl CycleTracker {
    pub fn new(perm: Vec<u32>) -> Self {
        let len = perm.len();
        let mut inv = vec![0u32; len];
        for (i, &p) in perm.iter().enumerate() {
            inv[p as usize] = i as u32;
        }
        let mut label = vec![u32::MAX; len];
        let mut size = Vec::new();
        for s in 0..len {
            if label[s] != u32::MAX {
                continue;
            }
            let id = size.len() as u32;
            let mut x = s;
            let mut n = 0;
            while label[x] == u32::MAX {
                label[x] = id;
                n += 1;
                x = perm[x] as usize;
            }
            size.push(n);
        }
        let count = size.len();
        Self {
            perm,
            inv,
            label,
            size,
            free: Vec::new(),
            count,
        }
    }

    pub fn identity(len: usize) -> Self {
        Self::new((0..len as u32).collect())
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    #[inline]
    pub fn image(&self, x: usize) -> usize {
        self.perm[x] as usize
    }

    #[inline]
    pub fn preimage(&self, y: usize) -> usize {
        self.inv[y] as usize
    }

    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    pub fn cycle_count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn cycle_id(&self, x: usize) -> u32 {
        self.label[x]
    }

    pub fn cycle_size(&self, x: usize) -> usize {
        self.size[self.label[x] as usize] as usize
    }

    pub fn same_cycle(&self, x: usize, y: usize) -> bool {
        self.label[x] == self.label[y]
    }

    /// Cycle lengths in non-increasing order.
    pub fn sizes(&self) -> Vec<usize> {
        let mut live = vec![false; self.size.len()];
        for &l in &self.label {
            live[l as usize] = true;
        }
        let mut out: Vec<usize> = self
            .size
            .iter()
            .zip(&live)
            .filter(|(_, &alive)| alive)
            .map(|(&s, _)| s as usize)
            .collect();
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    /// Labels `start, pi(start), ...` up to and including `end`.
    fn relabel(&mut self, start: usize, end: usize, id: u32) -> u32 {
        let mut x = start;
        let mut n = 1;
        self.label[x] = id;
        while x != end {
            x = self.perm[x] as usize;
            self.label[x] = id;
            n += 1;
        }
        n
    }

    fn fresh_label(&mut self) -> u32 {
        self.free.pop().unwrap_or_else(|| {
            self.size.push(0);
            (self.size.len() - 1) as u32
        })
    }

    /// `pi <- pi o (x y)`.
    pub fn swap_images(&mut self, x: usize, y: usize) -> Effect {
        if x == y {
            return Effect::None;
        }
        let (px, py) = (self.perm[x], self.perm[y]);
        self.perm[x] = py;
        self.perm[y] = px;
        self.inv[py as usize] = x as u32;
        self.inv[px as usize] = y as u32;
        let (lx, ly) = (self.label[x], self.label[y]);
        if lx == ly {
            // the new cycles contain x and y; walk both until one closes
            let (mut a, mut b) = (self.perm[x] as usize, self.perm[y] as usize);
            let small = loop {
                if a == x {
                    break x;
                }
                if b == y {
                    break y;
                }
                a = self.perm[a] as usize;
                b = self.perm[b] as usize;
            };
            let id = self.fresh_label();
            let n = self.relabel(self.perm[small] as usize, small, id);
            self.size[id as usize] = n;
            self.size[lx as usize] -= n;
            self.count += 1;
            Effect::Split
        } else {
            // the merged cycle runs x -> old y-part -> y -> old x-part -> x
            let n = if self.size[lx as usize] >= self.size[ly as usize] {
                self.relabel(self.perm[x] as usize, y, lx)
            } else {
                self.relabel(self.perm[y] as usize, x, ly)
            };
            let (keep, gone) = if self.label[x] == lx { (lx, ly) } else { (ly, lx) };
            debug_assert_eq!(n, self.size[gone as usize]);
            self.size[keep as usize] += n;
            self.size[gone as usize] = 0;
            self.free.push(gone);
            self.count -= 1;
            Effect::Merge
        }
    }
}
