//! Index bookkeeping for the auxiliary density operators (ADOs).

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Sentinel for a missing neighbor in [`HierarchyIndex`] tables.
pub const NO_NEIGHBOR: u32 = u32::MAX;

/// Default limit on the number of ADOs a hierarchy may hold.
pub const DEFAULT_ADO_BUDGET: usize = 400_000;

/// Multi-index of one ADO: one exponent per (site, decay mode) pair, laid out
/// as `site * (K + 1) + k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdoIndex(Vec<u8>);

impl AdoIndex {
    pub fn zero(n_modes: usize) -> Self {
        AdoIndex(vec![0; n_modes])
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn raised(&self, mode: usize) -> AdoIndex {
        let mut v = self.0.clone();
        v[mode] += 1;
        AdoIndex(v)
    }

    pub fn lowered(&self, mode: usize) -> Option<AdoIndex> {
        let mut v = self.0.clone();
        v[mode] = v[mode].checked_sub(1)?;
        Some(AdoIndex(v))
    }
}

/// C(m + l, l) without overflow, saturating at `usize::MAX`.
pub fn ado_count(n_modes: usize, level: usize) -> usize {
    let mut acc: u128 = 1;
    for i in 1..=level as u128 {
        acc = acc * (n_modes as u128 + i) / i;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Canonically ordered ADO indices with raise/lower neighbor tables.
#[derive(Debug, Clone)]
pub struct HierarchyIndex {
    n_sites: usize,
    n_terms: usize,
    level: usize,
    indices: Vec<AdoIndex>,
    /// `up[i * n_modes + m]` is the index reached by raising mode m of ADO i.
    up: Vec<u32>,
    down: Vec<u32>,
}

impl HierarchyIndex {
    /// Enumerates every ADO of depth ≤ `level` for `n_sites` sites with
    /// `n_matsubara + 1` decay modes each. Ordering: by depth, then
    /// lexicographically ascending on the exponent vector.
    pub fn build(n_sites: usize, n_matsubara: usize, level: usize, budget: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidParameter(
                "hierarchy needs at least one site".into(),
            ));
        }
        if level == 0 || level > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "truncation level must be in 1..=255, got {level}"
            )));
        }
        let n_terms = n_matsubara + 1;
        let n_modes = n_sites * n_terms;
        let count = ado_count(n_modes, level);
        if count > budget || count >= NO_NEIGHBOR as usize {
            return Err(Error::Capacity { count, budget });
        }

        let mut indices = Vec::with_capacity(count);
        let mut scratch = vec![0u8; n_modes];
        for depth in 0..=level {
            compositions(&mut scratch, 0, depth, &mut indices);
        }
        debug_assert_eq!(indices.len(), count);

        let lookup: HashMap<&AdoIndex, u32> = indices
            .iter()
            .enumerate()
            .map(|(i, idx)| (idx, i as u32))
            .collect();
        let mut up = vec![NO_NEIGHBOR; count * n_modes];
        let mut down = vec![NO_NEIGHBOR; count * n_modes];
        for (i, idx) in indices.iter().enumerate() {
            for m in 0..n_modes {
                if idx.depth() < level {
                    up[i * n_modes + m] = lookup[&idx.raised(m)];
                }
                if let Some(lower) = idx.lowered(m) {
                    down[i * n_modes + m] = lookup[&lower];
                }
            }
        }

        Ok(HierarchyIndex {
            n_sites,
            n_terms,
            level,
            indices,
            up,
            down,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Decay modes per site (K + 1).
    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn n_modes(&self) -> usize {
        self.n_sites * self.n_terms
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn indices(&self) -> &[AdoIndex] {
        &self.indices
    }

    pub fn raise(&self, ado: usize, mode: usize) -> Option<usize> {
        let v = self.up[ado * self.n_modes() + mode];
        (v != NO_NEIGHBOR).then_some(v as usize)
    }

    pub fn lower(&self, ado: usize, mode: usize) -> Option<usize> {
        let v = self.down[ado * self.n_modes() + mode];
        (v != NO_NEIGHBOR).then_some(v as usize)
    }

    pub(crate) fn up_row(&self, ado: usize) -> &[u32] {
        let m = self.n_modes();
        &self.up[ado * m..(ado + 1) * m]
    }

    pub(crate) fn down_row(&self, ado: usize) -> &[u32] {
        let m = self.n_modes();
        &self.down[ado * m..(ado + 1) * m]
    }
}

/// Appends all vectors with `slot..` summing to `remaining`, ascending
/// lexicographic order.
fn compositions(scratch: &mut [u8], slot: usize, remaining: usize, out: &mut Vec<AdoIndex>) {
    if slot + 1 == scratch.len() {
        scratch[slot] = remaining as u8;
        out.push(AdoIndex(scratch.to_vec()));
        scratch[slot] = 0;
        return;
    }
    for first in 0..=remaining {
        scratch[slot] = first as u8;
        compositions(scratch, slot + 1, remaining - first, out);
    }
    scratch[slot] = 0;
}
