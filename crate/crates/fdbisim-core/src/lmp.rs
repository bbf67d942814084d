//! Finite labelled Markov processes: sub-stochastic kernels, probabilistic
//! bisimulation via partition refinement, and a brute-force oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::partition::{all_partitions, Partition};
use crate::space::Obs;
use crate::Result;

/// Mass comparisons and row-sum validation run at this absolute tolerance;
/// refinement signatures quantise masses to the same grid.
pub const MASS_TOL: f64 = 1e-9;

/// A finite labelled Markov process: states `0..n`, an observation bitmask
/// per state, and a sub-stochastic transition kernel (row sums ≤ 1, the
/// deficit being the one-step death mass).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLmp {
    n: usize,
    labels: Vec<u32>,
    tau: Vec<f64>, // row-major n×n
}

impl FiniteLmp {
    pub fn new(labels: Vec<u32>, tau: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::validation("LMP needs at least one state"));
        }
        if tau.len() != n * n {
            return Err(Error::validation("kernel must be n×n"));
        }
        for x in 0..n {
            let mut sum = 0.0;
            for y in 0..n {
                let m = tau[x * n + y];
                if !(m >= -MASS_TOL) || !m.is_finite() {
                    return Err(Error::validation("kernel entries must be nonnegative"));
                }
                sum += m;
            }
            if sum > 1.0 + MASS_TOL {
                return Err(Error::validation("kernel row sums must be ≤ 1"));
            }
        }
        Ok(FiniteLmp { n, labels, tau })
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn label(&self, x: usize) -> u32 {
        self.labels[x]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn tau(&self, x: usize, y: usize) -> f64 {
        self.tau[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.tau[x * self.n..(x + 1) * self.n]
    }

    /// One-step death mass `1 − τ(x, X)`.
    pub fn death_mass(&self, x: usize) -> f64 {
        (1.0 - self.row(x).iter().sum::<f64>()).max(0.0)
    }

    /// Mass from `x` into a state set given as a membership mask.
    pub fn mass_to(&self, x: usize, set: &[bool]) -> f64 {
        self.row(x).iter().zip(set).filter(|(_, &m)| m).map(|(v, _)| v).sum()
    }

    /// Mass from `x` into one block of a partition.
    pub fn mass_to_block(&self, x: usize, p: &Partition, block: usize) -> f64 {
        self.row(x)
            .iter()
            .enumerate()
            .filter(|(y, _)| p.block_of(*y) == block)
            .map(|(_, v)| v)
            .sum()
    }

    /// `τ^k` as a dense matrix (`τ^0` = identity).
    pub fn tau_power(&self, k: usize) -> Vec<f64> {
        let n = self.n;
        let mut acc: Vec<f64> = vec![0.0; n * n];
        for i in 0..n {
            acc[i * n + i] = 1.0;
        }
        for _ in 0..k {
            let mut next = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let a = acc[i * n + j];
                    if a == 0.0 {
                        continue;
                    }
                    for (y, &t) in self.row(j).iter().enumerate() {
                        next[i * n + y] += a * t;
                    }
                }
            }
            acc = next;
        }
        acc
    }

    /// The observation symbol of a state (or of the cemetery).
    fn obs_sym(&self, x: Option<usize>) -> Obs {
        match x {
            Some(x) => Obs::Bits(self.labels[x]),
            None => Obs::Dead,
        }
    }

    /// Probability that the observation word at steps `1..=word.len()` is
    /// exactly `word`, starting from `x`. Death is observable: a path that
    /// has died reads `∂` at every later step.
    pub fn obs_word_prob(&self, x: usize, word: &[Obs]) -> f64 {
        let n = self.n;
        // v[0..n] live masses, v[n] cemetery mass.
        let mut v = vec![0.0; n + 1];
        v[x] = 1.0;
        for sym in word {
            let mut next = vec![0.0; n + 1];
            for i in 0..n {
                if v[i] == 0.0 {
                    continue;
                }
                for (y, &t) in self.row(i).iter().enumerate() {
                    next[y] += v[i] * t;
                }
                next[n] += v[i] * self.death_mass(i);
            }
            next[n] += v[n];
            for y in 0..n {
                if self.obs_sym(Some(y)) != *sym {
                    next[y] = 0.0;
                }
            }
            if *sym != Obs::Dead {
                next[n] = 0.0;
            }
            v = next;
        }
        v.iter().sum()
    }

    /// `ℙ^x(X_1 ∈ A_1, …, X_k ∈ A_k)` by restrict-then-multiply: masses
    /// thread through the kernel and are zeroed outside each `A_i` in turn.
    pub fn n_step_product(&self, x: usize, sets: &[Vec<bool>]) -> f64 {
        let n = self.n;
        let mut v = vec![0.0; n];
        v[x] = 1.0;
        for set in sets {
            debug_assert_eq!(set.len(), n);
            let mut next = vec![0.0; n];
            for i in 0..n {
                if v[i] == 0.0 {
                    continue;
                }
                for (y, &t) in self.row(i).iter().enumerate() {
                    next[y] += v[i] * t;
                }
            }
            for y in 0..n {
                if !set[y] {
                    next[y] = 0.0;
                }
            }
            v = next;
        }
        v.iter().sum()
    }

    /// Greatest probabilistic bisimulation, by partition refinement: start
    /// from the label partition and split any block whose members disagree
    /// (beyond the mass tolerance) on the mass sent into some current block.
    pub fn refine(&self) -> Partition {
        let mut part = Partition::from_assignment(
            &self.labels.iter().map(|&l| l as usize).collect::<Vec<_>>(),
        );
        loop {
            // Signature: current block, then quantised masses into every
            // current block (death mass is implied by the complement).
            let sigs: Vec<Vec<i64>> = (0..self.n)
                .map(|x| {
                    let mut sig = vec![part.block_of(x) as i64];
                    for b in 0..part.n_blocks() {
                        sig.push(quantize(self.mass_to_block(x, &part, b)));
                    }
                    sig
                })
                .collect();
            let mut seen: Vec<&Vec<i64>> = Vec::new();
            let mut assign = vec![0usize; self.n];
            for x in 0..self.n {
                match seen.iter().position(|s| **s == sigs[x]) {
                    Some(i) => assign[x] = i,
                    None => {
                        assign[x] = seen.len();
                        seen.push(&sigs[x]);
                    }
                }
            }
            let next = Partition::from_assignment(&assign);
            if next == part {
                return part;
            }
            part = next;
        }
    }

    /// Check that a partition is a probabilistic bisimulation: blocks are
    /// label-constant and block masses agree within each block.
    pub fn verify_partition(&self, p: &Partition) -> core::result::Result<(), DtCounterexample> {
        assert_eq!(p.len(), self.n);
        for block in p.blocks() {
            let x0 = block[0];
            for &x in &block[1..] {
                if self.labels[x] != self.labels[x0] {
                    return Err(DtCounterexample {
                        x: x0,
                        y: x,
                        kind: DtCounterexampleKind::LabelMismatch {
                            label_x: self.labels[x0],
                            label_y: self.labels[x],
                        },
                    });
                }
                for b in 0..p.n_blocks() {
                    let mx = self.mass_to_block(x0, p, b);
                    let my = self.mass_to_block(x, p, b);
                    if (mx - my).abs() > MASS_TOL {
                        return Err(DtCounterexample {
                            x: x0,
                            y: x,
                            kind: DtCounterexampleKind::BlockMass { block: b, mass_x: mx, mass_y: my },
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Oracle: enumerate every partition of the state set, keep those that
    /// verify, and return the coarsest. Exponential — callers keep `n ≤ 6`.
    pub fn brute_force_max_bisim(&self) -> Partition {
        let good: Vec<Partition> = all_partitions(self.n)
            .into_iter()
            .filter(|p| self.verify_partition(p).is_ok())
            .collect();
        // The greatest bisimulation exists, so exactly one survivor is
        // coarsest and every other survivor refines it.
        let coarsest = good
            .iter()
            .min_by_key(|p| p.n_blocks())
            .expect("discrete partition always verifies")
            .clone();
        for p in &good {
            assert!(
                p.refines(&coarsest),
                "bisimulation lattice violated: some bisimulation does not refine the coarsest"
            );
        }
        coarsest
    }
}

fn quantize(mass: f64) -> i64 {
    libm::round(mass / MASS_TOL) as i64
}

/// Why a partition failed to be a probabilistic bisimulation.
#[derive(Debug, Clone, PartialEq)]
pub struct DtCounterexample {
    pub x: usize,
    pub y: usize,
    pub kind: DtCounterexampleKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DtCounterexampleKind {
    LabelMismatch { label_x: u32, label_y: u32 },
    BlockMass { block: usize, mass_x: f64, mass_y: f64 },
}

/// Random LMP with a planted bisimulation: states are grouped into `q`
/// blocks, a random quotient kernel is drawn over the blocks, and each
/// state's row spreads its block-to-block mass randomly inside the target
/// blocks. The planted partition is a bisimulation by construction, so
/// refinement must return it or something coarser.
pub fn random_structured_lmp<R: rand::Rng>(
    rng: &mut R,
    n: usize,
    q: usize,
    n_labels: u32,
) -> (FiniteLmp, Partition) {
    assert!(q >= 1 && q <= n && n_labels >= 1);
    // Surjective block assignment.
    let mut assign: Vec<usize> = (0..n).map(|i| i % q).collect();
    for i in 0..n {
        let j = rng.gen_range(0..=i);
        assign.swap(i, j);
    }
    let planted = Partition::from_assignment(&assign);
    let q = planted.n_blocks();

    let block_label: Vec<u32> = (0..q).map(|_| rng.gen_range(0..n_labels)).collect();
    let labels: Vec<u32> = (0..n).map(|x| block_label[planted.block_of(x)]).collect();

    // Quotient kernel: random sub-stochastic rows over blocks.
    let mut qkernel = vec![0.0; q * q];
    for b in 0..q {
        let mut w: Vec<f64> = (0..q).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = w.iter().sum();
        let survive = 0.6 + 0.4 * rng.gen::<f64>();
        for v in &mut w {
            *v = *v / total * survive;
        }
        qkernel[b * q..(b + 1) * q].copy_from_slice(&w);
    }

    let blocks = planted.blocks();
    let mut tau = vec![0.0; n * n];
    for x in 0..n {
        let bx = planted.block_of(x);
        for (c, members) in blocks.iter().enumerate() {
            let mass = qkernel[bx * q + c];
            let w: Vec<f64> = members.iter().map(|_| rng.gen::<f64>()).collect();
            let total: f64 = w.iter().sum();
            for (i, &y) in members.iter().enumerate() {
                tau[x * n + y] = mass * w[i] / total;
            }
        }
    }
    (FiniteLmp::new(labels, tau).expect("structured construction is valid"), planted)
}

/// Fully random sub-stochastic LMP (no planted structure).
pub fn random_lmp<R: rand::Rng>(rng: &mut R, n: usize, n_labels: u32) -> FiniteLmp {
    let labels: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n_labels)).collect();
    let mut tau = vec![0.0; n * n];
    for x in 0..n {
        let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = w.iter().sum();
        let survive = 0.6 + 0.4 * rng.gen::<f64>();
        for (y, v) in w.iter().enumerate() {
            tau[x * n + y] = v / total * survive;
        }
    }
    FiniteLmp::new(labels, tau).expect("random construction is valid")
}
