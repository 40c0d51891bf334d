/// Fixed-width bitset over word positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct PosSet(Vec<u64>);

impl PosSet {
    pub(crate) fn new(n: usize) -> Self {
        PosSet(vec![0; n.div_ceil(64)])
    }

    pub(crate) fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub(crate) fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub(crate) fn unset(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    pub(crate) fn is_subset(&self, other: &PosSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub(crate) fn count(&self) -> usize {
        self.0.iter().map(|x| x.count_ones() as usize).sum()
    }
}

use crate::graph::DefiningGraph;
use crate::word::Letter;

/// For each position, the earlier positions it can never be shuffled past.
pub(crate) fn dependency_preds(g: &DefiningGraph, letters: &[Letter]) -> Vec<PosSet> {
    let n = letters.len();
    (0..n)
        .map(|i| {
            let mut p = PosSet::new(n);
            for j in 0..i {
                if !g.adjacent(letters[j].vertex, letters[i].vertex) {
                    p.set(j);
                }
            }
            p
        })
        .collect()
}
