//! Embedding a finite LMP as a continuous-time process on `X × [0, 1)`,
//! and moving relations between the two views.
//!
//! The embedded process advances its clock at speed 1 and jumps per `τ`
//! each time the clock crosses an integer, so its kernel is exactly
//! `P_t((x,s), A × {s'}) = τ^{⌊t+s⌋}(x, A)` with `s' = t+s mod 1`. All
//! checks here are kernel-exact (matrix powers), not statistical.
//!
//! A continuous-time witness is a [`TimedPartition`]: a partition of the
//! base per clock segment. Verification reduces to three finite checks:
//!
//! 1. labels are constant on every block (initiation);
//! 2. segments coarsen monotonically in the clock — a pure clock advance
//!    (no jump) is a deterministic transition, so states related now must
//!    stay related at every later clock value;
//! 3. related states send equal `τ^k` mass into every block of every
//!    segment partition, for `k = 1..=n`. Powers beyond the state count
//!    add nothing: by Cayley–Hamilton each later power is a fixed linear
//!    combination of the previous `n`, so equality propagates.

use alloc::vec::Vec;

use crate::lmp::{FiniteLmp, MASS_TOL};
use crate::partition::Partition;
use crate::relation::TimedPartition;

/// Why a timed partition fails to be a bisimulation of the embedded
/// process.
#[derive(Debug, Clone, PartialEq)]
pub enum CtViolation {
    /// Two related states disagree on their observation.
    LabelMismatch { seg: usize, x: usize, y: usize },
    /// Related at an earlier clock value but separated at a later one
    /// (the clock advance alone distinguishes them).
    NotMonotone { seg_early: usize, seg_late: usize, x: usize, y: usize },
    /// Related states send different `k`-jump mass into a closed block.
    KernelMass {
        seg: usize,
        x: usize,
        y: usize,
        jumps: usize,
        target_seg: usize,
        block: usize,
        mass_x: f64,
        mass_y: f64,
    },
}

/// Exact check that `tp` is a bisimulation of the embedding of `lmp`.
pub fn verify_ct_witness(lmp: &FiniteLmp, tp: &TimedPartition) -> Result<(), CtViolation> {
    let n = lmp.n_states();
    assert_eq!(tp.n_base_states(), n);
    let segs: Vec<&Partition> = tp.segments().map(|(_, p)| p).collect();

    // 1. Initiation: labels constant per block, in every segment.
    for (si, part) in segs.iter().enumerate() {
        for block in part.blocks() {
            for pair in block.windows(2) {
                if lmp.label(pair[0]) != lmp.label(pair[1]) {
                    return Err(CtViolation::LabelMismatch { seg: si, x: pair[0], y: pair[1] });
                }
            }
        }
    }

    // 2. Monotone coarsening along the clock.
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if !segs[i].refines(segs[j]) {
                // Find a concrete pair related at i but split at j.
                for block in segs[i].blocks() {
                    for w in block.windows(2) {
                        if !segs[j].same_block(w[0], w[1]) {
                            return Err(CtViolation::NotMonotone {
                                seg_early: i,
                                seg_late: j,
                                x: w[0],
                                y: w[1],
                            });
                        }
                    }
                }
            }
        }
    }

    // 3. Jump-kernel masses: related states agree on every closed block,
    //    for every jump count that can matter.
    let powers: Vec<Vec<f64>> = (1..=n).map(|k| lmp.tau_power(k)).collect();
    for (si, part) in segs.iter().enumerate() {
        for block in part.blocks() {
            let x0 = block[0];
            for &x in &block[1..] {
                for (k, tk) in powers.iter().enumerate() {
                    for (tj, target) in segs.iter().enumerate() {
                        for (b, members) in target.blocks().iter().enumerate() {
                            let mass = |s: usize| -> f64 {
                                members.iter().map(|&y| tk[s * n + y]).sum()
                            };
                            let (mx, my) = (mass(x0), mass(x));
                            if (mx - my).abs() > MASS_TOL {
                                return Err(CtViolation::KernelMass {
                                    seg: si,
                                    x: x0,
                                    y: x,
                                    jumps: k + 1,
                                    target_seg: tj,
                                    block: b,
                                    mass_x: mx,
                                    mass_y: my,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Lift a discrete-time bisimulation to the embedding: the same partition
/// at every clock value.
pub fn lift_dt_partition(p: &Partition) -> TimedPartition {
    TimedPartition::uniform(p.clone())
}

/// Project a continuous-time witness back to the base: `x` and `y` are
/// related when they are related at some clock value.
pub fn project_ct_witness(tp: &TimedPartition) -> Partition {
    tp.join_all()
}

/// The time-coherent closure: the smallest clock-uniform relation
/// containing the witness.
pub fn time_coherent_closure(tp: &TimedPartition) -> TimedPartition {
    TimedPartition::uniform(tp.join_all())
}

/// The greatest bisimulation of the embedded process, as a clock-uniform
/// witness over the greatest discrete-time bisimulation.
pub fn ct_greatest(lmp: &FiniteLmp) -> TimedPartition {
    lift_dt_partition(&lmp.refine())
}

/// How two non-bisimilar base states can be told apart.
#[derive(Debug, Clone, PartialEq)]
pub enum DtDistinguisher {
    Labels { label_x: u32, label_y: u32 },
    /// One step sends different mass into this block of the greatest
    /// bisimulation (blocks are closed sets, so this is a legal event).
    BlockMass { block: usize, mass_x: f64, mass_y: f64 },
}

/// Find a distinguisher for `(x, y)`, or `None` if they are bisimilar.
/// One-step masses into greatest-bisimulation blocks always suffice: the
/// refinement that separated the pair did so on a block union, so some
/// single block already disagrees.
pub fn distinguish_dt(lmp: &FiniteLmp, x: usize, y: usize) -> Option<DtDistinguisher> {
    let p = lmp.refine();
    if p.same_block(x, y) {
        return None;
    }
    if lmp.label(x) != lmp.label(y) {
        return Some(DtDistinguisher::Labels { label_x: lmp.label(x), label_y: lmp.label(y) });
    }
    for b in 0..p.n_blocks() {
        let mx = lmp.mass_to_block(x, &p, b);
        let my = lmp.mass_to_block(y, &p, b);
        if (mx - my).abs() > MASS_TOL {
            return Some(DtDistinguisher::BlockMass { block: b, mass_x: mx, mass_y: my });
        }
    }
    unreachable!("separated states must disagree on labels or some block mass");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmp::random_structured_lmp;
    use alloc::vec;

    fn chain() -> FiniteLmp {
        // 0,1 are twins into {2,3} with equal block masses; 4 is labelled.
        FiniteLmp::new(
            vec![0, 0, 0, 0, 1],
            vec![
                0.0, 0.0, 0.4, 0.4, 0.0, //
                0.0, 0.0, 0.6, 0.2, 0.0, //
                0.0, 0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 0.0, 0.0, 0.0,
            ],
        )
        .unwrap()
    }

    #[test]
    fn lift_of_greatest_bisimulation_verifies() {
        let m = chain();
        let p = m.refine();
        // 2 ~ 3 (identical rows, same label), hence 0 ~ 1 (same mass 0.8
        // into the merged block).
        assert!(p.same_block(2, 3));
        assert!(p.same_block(0, 1));
        let tp = lift_dt_partition(&p);
        assert_eq!(verify_ct_witness(&m, &tp), Ok(()));
        assert_eq!(project_ct_witness(&tp), p);
    }

    #[test]
    fn verify_rejects_label_and_mass_violations() {
        let m = chain();
        // Trivial partition mixes label 1 with label 0.
        let tp = TimedPartition::uniform(Partition::trivial(5));
        assert!(matches!(
            verify_ct_witness(&m, &tp),
            Err(CtViolation::LabelMismatch { .. })
        ));
        // Relating 0 with 2 fails on kernel mass (0 sends 0.8 into {2,3},
        // 2 sends 0).
        let bad = Partition::from_blocks(5, &[vec![0, 2], vec![1, 3], vec![4]]).unwrap();
        let e = verify_ct_witness(&m, &TimedPartition::uniform(bad)).unwrap_err();
        assert!(matches!(e, CtViolation::KernelMass { .. }));
    }

    #[test]
    fn monotone_coarsening_is_enforced() {
        let m = chain();
        let fine = m.refine();
        let coarse = Partition::trivial(5);
        // Coarse early, fine late: a pure clock advance would separate
        // related states — rejected.
        let bad = TimedPartition::new(vec![0.0, 0.5], vec![coarse, fine.clone()]).unwrap();
        match verify_ct_witness(&m, &bad) {
            Err(CtViolation::NotMonotone { .. }) | Err(CtViolation::LabelMismatch { .. }) => {}
            other => panic!("expected monotonicity/label failure, got {other:?}"),
        }
        // Fine early, coarser late: 0 ~ 1 merged only from clock 0.5 on.
        // Valid because {2,3} is a block in *every* segment, so the pair's
        // one-jump masses agree on all closed blocks.
        let early = Partition::from_blocks(5, &[vec![0], vec![1], vec![2, 3], vec![4]]).unwrap();
        let late = fine;
        let tp = TimedPartition::new(vec![0.0, 0.5], vec![early, late]).unwrap();
        assert_eq!(verify_ct_witness(&m, &tp), Ok(()));
        // Its closure is uniform and still verifies; projection is a
        // discrete-time bisimulation.
        let closed = time_coherent_closure(&tp);
        assert!(closed.is_uniform());
        assert_eq!(verify_ct_witness(&m, &closed), Ok(()));
        assert!(m.verify_partition(&project_ct_witness(&tp)).is_ok());
    }

    #[test]
    fn distinguishers_exist_exactly_for_non_bisimilar_pairs() {
        let mut rng = crate::rng::rng_from_seed(23);
        for _ in 0..20 {
            let (m, _) = random_structured_lmp(&mut rng, 5, 3, 2);
            let p = m.refine();
            for x in 0..5 {
                for y in x + 1..5 {
                    let d = distinguish_dt(&m, x, y);
                    assert_eq!(d.is_none(), p.same_block(x, y));
                }
            }
        }
    }

    #[test]
    fn greatest_ct_witness_round_trips() {
        let mut rng = crate::rng::rng_from_seed(29);
        for _ in 0..20 {
            let (m, _) = random_structured_lmp(&mut rng, 5, 2, 2);
            let tp = ct_greatest(&m);
            assert_eq!(verify_ct_witness(&m, &tp), Ok(()));
            assert_eq!(project_ct_witness(&tp), m.refine());
        }
    }
}
