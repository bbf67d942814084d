//! Partitions of a finite index set `{0, …, n−1}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::Result;

/// A partition stored as a block index per element, canonicalised so block
/// ids appear in first-occurrence order (block of element 0 is 0, the next
/// new block is 1, and so on).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    block: Vec<usize>,
    n_blocks: usize,
}

impl Partition {
    /// The discrete partition: every element in its own block.
    pub fn discrete(n: usize) -> Self {
        Partition { block: (0..n).collect(), n_blocks: n }
    }

    /// The trivial partition: one block.
    pub fn trivial(n: usize) -> Self {
        Partition { block: vec![0; n], n_blocks: if n == 0 { 0 } else { 1 } }
    }

    /// Build from an arbitrary block-id assignment.
    pub fn from_assignment(assign: &[usize]) -> Self {
        let ids = assign.iter().copied().max().map_or(0, |m| m + 1);
        let mut relabel: Vec<usize> = vec![usize::MAX; ids];
        let mut block = Vec::with_capacity(assign.len());
        let mut next = 0;
        for &a in assign {
            if relabel[a] == usize::MAX {
                relabel[a] = next;
                next += 1;
            }
            block.push(relabel[a]);
        }
        Partition { block, n_blocks: next }
    }

    /// Build from explicit blocks; they must cover `{0, …, n−1}` exactly once.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut assign = vec![usize::MAX; n];
        for (b, members) in blocks.iter().enumerate() {
            for &i in members {
                if i >= n {
                    return Err(Error::validation("partition block element out of range"));
                }
                if assign[i] != usize::MAX {
                    return Err(Error::validation("partition blocks overlap"));
                }
                assign[i] = b;
            }
        }
        if assign.iter().any(|&a| a == usize::MAX) {
            return Err(Error::validation("partition blocks do not cover the set"));
        }
        Ok(Partition::from_assignment(&assign))
    }

    pub fn len(&self) -> usize {
        self.block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block.is_empty()
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block[i]
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.block[i] == self.block[j]
    }

    /// Blocks as element lists, in block-id order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_blocks];
        for (i, &b) in self.block.iter().enumerate() {
            out[b].push(i);
        }
        out
    }

    /// Does `self` refine `other` (every block of `self` sits inside a block
    /// of `other`)?
    pub fn refines(&self, other: &Partition) -> bool {
        debug_assert_eq!(self.len(), other.len());
        // Each self-block must map to a single other-block.
        let mut image = vec![usize::MAX; self.n_blocks];
        for i in 0..self.len() {
            let b = self.block[i];
            if image[b] == usize::MAX {
                image[b] = other.block[i];
            } else if image[b] != other.block[i] {
                return false;
            }
        }
        true
    }

    /// Join (coarsest common refinement of none — i.e. the finest partition
    /// coarser than both): transitive closure of "same block in either".
    pub fn join(&self, other: &Partition) -> Partition {
        debug_assert_eq!(self.len(), other.len());
        let n = self.len();
        let mut uf = UnionFind::new(n);
        let mut rep_self = vec![usize::MAX; self.n_blocks];
        let mut rep_other = vec![usize::MAX; other.n_blocks];
        for i in 0..n {
            let bs = self.block[i];
            if rep_self[bs] == usize::MAX {
                rep_self[bs] = i;
            } else {
                uf.union(rep_self[bs], i);
            }
            let bo = other.block[i];
            if rep_other[bo] == usize::MAX {
                rep_other[bo] = i;
            } else {
                uf.union(rep_other[bo], i);
            }
        }
        uf.to_partition()
    }

    /// Meet: common refinement (same block iff same block in both).
    pub fn meet(&self, other: &Partition) -> Partition {
        debug_assert_eq!(self.len(), other.len());
        let mut key: Vec<(usize, usize)> = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            key.push((self.block[i], other.block[i]));
        }
        let mut assign = vec![0usize; self.len()];
        let mut seen: Vec<(usize, usize)> = Vec::new();
        for (i, k) in key.iter().enumerate() {
            match seen.iter().position(|s| s == k) {
                Some(p) => assign[i] = p,
                None => {
                    assign[i] = seen.len();
                    seen.push(*k);
                }
            }
        }
        Partition::from_assignment(&assign)
    }
}

/// Union-find over `{0, …, n−1}`, used for joins and pushout gluing.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = i;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, i: usize, j: usize) {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri != rj {
            // Attach the larger root under the smaller so representatives
            // are stable (smallest element of each class).
            if ri < rj {
                self.parent[rj] = ri;
            } else {
                self.parent[ri] = rj;
            }
        }
    }

    pub fn to_partition(&mut self) -> Partition {
        let n = self.parent.len();
        let assign: Vec<usize> = (0..n).map(|i| self.find(i)).collect();
        Partition::from_assignment(&assign)
    }
}

/// Enumerate every partition of `{0, …, n−1}` via restricted growth strings.
/// Bell(6) = 203, so this stays tiny for the sizes we use it at.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    if n == 0 {
        out.push(Partition::discrete(0));
        return out;
    }
    let mut rgs = vec![0usize; n];
    loop {
        out.push(Partition::from_assignment(&rgs));
        // Next restricted growth string: rgs[i] ≤ 1 + max(rgs[..i]).
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let p = Partition::from_assignment(&[7, 7, 2, 7, 2]);
        assert_eq!(p.n_blocks(), 2);
        assert_eq!(p.block_of(0), 0);
        assert_eq!(p.block_of(2), 1);
        assert!(p.same_block(0, 3));
        assert!(!p.same_block(0, 2));
    }

    #[test]
    fn from_blocks_validates() {
        assert!(Partition::from_blocks(3, &[vec![0, 1], vec![2]]).is_ok());
        assert!(Partition::from_blocks(3, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::from_blocks(3, &[vec![0, 1]]).is_err());
        assert!(Partition::from_blocks(3, &[vec![0, 1], vec![5]]).is_err());
    }

    #[test]
    fn refines_join_meet() {
        let fine = Partition::from_assignment(&[0, 0, 1, 2]);
        let coarse = Partition::from_assignment(&[0, 0, 0, 1]);
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(fine.refines(&fine));

        let a = Partition::from_assignment(&[0, 0, 1, 1]);
        let b = Partition::from_assignment(&[0, 1, 1, 2]);
        let j = a.join(&b);
        // 0~1 (a), 1~2 (b), 2~3 (a) chains everything together.
        assert_eq!(j.n_blocks(), 1);
        let m = a.meet(&b);
        // Keys (0,0), (0,1), (1,1), (1,2) are all distinct.
        assert_eq!(m.n_blocks(), 4);
        assert!(m.refines(&a) && m.refines(&b));
        assert!(a.refines(&j) && b.refines(&j));
    }

    #[test]
    fn bell_numbers() {
        // Oracle: Bell numbers 1, 1, 2, 5, 15, 52, 203.
        assert_eq!(all_partitions(0).len(), 1);
        assert_eq!(all_partitions(1).len(), 1);
        assert_eq!(all_partitions(2).len(), 2);
        assert_eq!(all_partitions(3).len(), 5);
        assert_eq!(all_partitions(4).len(), 15);
        assert_eq!(all_partitions(5).len(), 52);
        assert_eq!(all_partitions(6).len(), 203);
    }

    #[test]
    fn all_partitions_distinct_and_bounded() {
        let ps = all_partitions(4);
        for (i, p) in ps.iter().enumerate() {
            for q in &ps[i + 1..] {
                assert_ne!(p, q);
            }
            assert!(p.refines(&Partition::trivial(4)));
            assert!(Partition::discrete(4).refines(p));
        }
    }
}
