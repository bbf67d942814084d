//! Process morphisms and the cospan view of bisimilarity.
//!
//! A morphism between process models is a map of state spaces that
//! commutes with the observations and pushes the transition law of the
//! source forward onto that of the target. On the continuous side the
//! maps of interest are concrete ([`SpaceMap`]) and verified exactly on
//! observations plus statistically on checkpoint marginals; on the finite
//! side everything is exact: pushforward rows, quotients by bisimulations,
//! pushouts of spans, and their universal property.
//!
//! The bridge both directions rest on: the fibre relation `f(x) = f(y)`
//! of a morphism is a bisimulation, and conversely two states are
//! bisimilar exactly when some cospan of morphisms equalises them.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bisim::LawCheck;
use crate::lmp::{FiniteLmp, MASS_TOL};
use crate::mc;
use crate::partition::{Partition, UnionFind};
use crate::process::ProcessModel;
use crate::rng::derive_seed;
use crate::space::{wrap_angle, Obs, State};
use crate::stats;
use crate::{math, Error, Result};

// --- continuous morphisms -----------------------------------------------------

/// A concrete continuous state-space map, total on live real states and
/// fixing the cemetery.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceMap {
    /// Circle angle to arc distance from the marked point: `θ ↦ |θ|/2π`.
    AngleToArc,
    /// Fold `[0,1]` onto `[0,1/2]` about the midpoint: `x ↦ min(x, 1−x)`.
    FoldHalf,
    /// Wrap the line onto the circle: `x ↦ 2π(x − round(x)) ∈ (−π, π]`.
    WrapToCircle,
    /// Tent-fold the line into `[0,1]` (period 2).
    FoldUnit,
    /// `x ↦ cx` (a morphism only when `c = 1`; used as the broken probe).
    Scale { c: f64 },
    /// `f ∘ g` (apply `g` first).
    Compose(Box<SpaceMap>, Box<SpaceMap>),
}

impl SpaceMap {
    /// Apply the map. `∂ ↦ ∂`; live non-real states are out of scope for
    /// the continuous morphisms and panic by design.
    pub fn apply(&self, s: &State) -> State {
        let State::Real(x) = s else {
            if s.is_dead() {
                return State::Dead;
            }
            panic!("space maps act on real-coordinate states");
        };
        let x = *x;
        State::Real(match self {
            SpaceMap::AngleToArc => math::abs(x) / (2.0 * math::PI),
            SpaceMap::FoldHalf => 0.5 - math::abs(x - 0.5),
            SpaceMap::WrapToCircle => wrap_angle(2.0 * math::PI * x),
            SpaceMap::FoldUnit => math::fold(0.0, 1.0, x),
            SpaceMap::Scale { c } => c * x,
            SpaceMap::Compose(f, g) => {
                let State::Real(y) = f.apply(&g.apply(s)) else { unreachable!() };
                return State::Real(y);
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            SpaceMap::AngleToArc => String::from("angle to arc"),
            SpaceMap::FoldHalf => String::from("fold about 1/2"),
            SpaceMap::WrapToCircle => String::from("wrap to circle"),
            SpaceMap::FoldUnit => String::from("tent fold into [0,1]"),
            SpaceMap::Scale { c } => format!("scale by {c}"),
            SpaceMap::Compose(f, g) => format!("{} ∘ {}", f.name(), g.name()),
        }
    }
}

/// Result of checking one continuous morphism candidate.
#[derive(Debug, Clone)]
pub struct HomReport {
    /// First state whose observation fails to commute, if any.
    pub obs_failure: Option<(State, Obs, Obs)>,
    /// Pushforward-law comparisons, one per start.
    pub checks: Vec<LawCheck>,
}

impl HomReport {
    pub fn max_z(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| if c.z > m { c.z } else { m })
    }

    pub fn pass(&self) -> bool {
        self.obs_failure.is_none() && !self.checks.is_empty() && self.max_z() < stats::Z_CRIT
    }
}

/// Options for the statistical part of [`verify_fd_hom`].
#[derive(Debug, Clone)]
pub struct HomCheckOpts {
    pub times: Vec<f64>,
    pub dt: f64,
    pub n_paths: u64,
    pub seed: u64,
}

impl Default for HomCheckOpts {
    fn default() -> Self {
        HomCheckOpts { times: vec![0.05, 0.2, 0.5], dt: 0.01, n_paths: 20_000, seed: 11 }
    }
}

/// Check that `map` is a morphism from `src` to `tgt`: observations
/// commute exactly over `obs_states`, and for each start the pushforward
/// of the source law through `map` matches the target law from the mapped
/// start on checkpoint marginals. Continuity is by construction — every
/// [`SpaceMap`] is continuous into its target space.
pub fn verify_fd_hom(
    src: &ProcessModel,
    tgt: &ProcessModel,
    map: &SpaceMap,
    obs_states: &[State],
    law_starts: &[State],
    opts: &HomCheckOpts,
) -> Result<HomReport> {
    let mut report = HomReport { obs_failure: None, checks: Vec::new() };
    for x in obs_states {
        let (ox, oy) = (src.obs_of(x), tgt.obs_of(&map.apply(x)));
        if ox != oy {
            report.obs_failure = Some((*x, ox, oy));
            break;
        }
    }
    let push = |s: &State| map.apply(s);
    for (i, x) in law_starts.iter().enumerate() {
        let fx = map.apply(x);
        let pushed = mc::sample_checkpoints(
            src,
            x,
            &opts.times,
            opts.dt,
            Some(&push),
            opts.n_paths,
            derive_seed(opts.seed, 2 * i as u64),
        )?;
        let direct = mc::sample_checkpoints(
            tgt,
            &fx,
            &opts.times,
            opts.dt,
            None,
            opts.n_paths,
            derive_seed(opts.seed, 2 * i as u64 + 1),
        )?;
        let r = stats::two_sample_marginal(&pushed, &direct);
        report.checks.push(LawCheck { generator: map.name(), start: *x, z: r.z, exact: false });
    }
    Ok(report)
}

// --- finite morphisms ---------------------------------------------------------

/// A map of finite state spaces: source state `x` goes to `map[x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmpHom {
    pub map: Vec<usize>,
}

impl LmpHom {
    pub fn identity(n: usize) -> Self {
        LmpHom { map: (0..n).collect() }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LmpHom) -> LmpHom {
        LmpHom { map: other.map.iter().map(|&x| self.map[x]).collect() }
    }
}

/// Why a finite map fails to be a morphism.
#[derive(Debug, Clone, PartialEq)]
pub enum LmpHomViolation {
    /// Map length differs from the source, or an image is out of range.
    Range { x: usize },
    /// Labels fail to commute at `x`.
    Label { x: usize, src: u32, tgt: u32 },
    /// The pushforward of row `x` misses the target row at state `c`.
    Mass { x: usize, target_state: usize, pushed: f64, direct: f64 },
}

/// Exact morphism check: labels commute and
/// `τ_tgt(f(x), c) = τ_src(x, f⁻¹(c))` for every `x` and `c`.
pub fn verify_lmp_hom(
    src: &FiniteLmp,
    tgt: &FiniteLmp,
    hom: &LmpHom,
) -> core::result::Result<(), LmpHomViolation> {
    let (n, m) = (src.n_states(), tgt.n_states());
    if hom.map.len() != n {
        return Err(LmpHomViolation::Range { x: hom.map.len().min(n) });
    }
    for x in 0..n {
        if hom.map[x] >= m {
            return Err(LmpHomViolation::Range { x });
        }
        let (ls, lt) = (src.label(x), tgt.label(hom.map[x]));
        if ls != lt {
            return Err(LmpHomViolation::Label { x, src: ls, tgt: lt });
        }
    }
    for x in 0..n {
        for c in 0..m {
            let pushed: f64 =
                (0..n).filter(|&y| hom.map[y] == c).map(|y| src.tau(x, y)).sum();
            let direct = tgt.tau(hom.map[x], c);
            if (pushed - direct).abs() > MASS_TOL {
                return Err(LmpHomViolation::Mass { x, target_state: c, pushed, direct });
            }
        }
    }
    Ok(())
}

/// The fibre partition of a map on `n` source states: blocks are the
/// non-empty preimages. For a morphism this partition is a bisimulation.
pub fn fibre_partition(n: usize, hom: &LmpHom) -> Partition {
    assert_eq!(hom.map.len(), n);
    Partition::from_assignment(&hom.map)
}

/// Disjoint union of two finite processes (left states first).
pub fn disjoint_union(a: &FiniteLmp, b: &FiniteLmp) -> FiniteLmp {
    let (na, nb) = (a.n_states(), b.n_states());
    let n = na + nb;
    let mut labels = Vec::with_capacity(n);
    labels.extend_from_slice(a.labels());
    labels.extend_from_slice(b.labels());
    let mut tau = vec![0.0; n * n];
    for x in 0..na {
        tau[x * n..x * n + na].copy_from_slice(a.row(x));
    }
    for x in 0..nb {
        tau[(na + x) * n + na..(na + x) * n + n].copy_from_slice(b.row(x));
    }
    FiniteLmp::new(labels, tau).expect("disjoint union of valid processes is valid")
}

/// Quotient a finite process by a bisimulation partition. Fails when the
/// partition is not one (ill-defined labels or rows). Returns the quotient
/// and the canonical surjection, which is a morphism by construction.
pub fn quotient_lmp(lmp: &FiniteLmp, p: &Partition) -> Result<(FiniteLmp, LmpHom)> {
    if p.len() != lmp.n_states() {
        return Err(Error::precondition("partition size mismatch"));
    }
    if let Err(ce) = lmp.verify_partition(p) {
        return Err(Error::precondition(format!("not a bisimulation: {ce:?}")));
    }
    let q = p.n_blocks();
    let blocks = p.blocks();
    let labels: Vec<u32> = blocks.iter().map(|b| lmp.label(b[0])).collect();
    let mut tau = vec![0.0; q * q];
    for (bi, b) in blocks.iter().enumerate() {
        for cj in 0..q {
            tau[bi * q + cj] = lmp.mass_to_block(b[0], p, cj);
        }
    }
    let lmp_q = FiniteLmp::new(labels, tau)?;
    let hom = LmpHom { map: (0..lmp.n_states()).map(|x| p.block_of(x)).collect() };
    Ok((lmp_q, hom))
}

/// A cospan of morphisms out of two processes into a common target.
#[derive(Debug, Clone)]
pub struct Cospan {
    pub target: FiniteLmp,
    pub left: LmpHom,
    pub right: LmpHom,
}

/// Two states of two processes are bisimilar exactly when a cospan
/// equalises them. This constructs one from the greatest bisimulation of
/// the disjoint union (quotient plus the two injections), or returns
/// `None` when the states are not bisimilar and no cospan can exist.
pub fn bisimilar_via_cospan(
    a: &FiniteLmp,
    x: usize,
    b: &FiniteLmp,
    y: usize,
) -> Result<Option<Cospan>> {
    let (na, nb) = (a.n_states(), b.n_states());
    if x >= na || y >= nb {
        return Err(Error::precondition("state index out of range"));
    }
    let u = disjoint_union(a, b);
    let p = u.refine();
    if !p.same_block(x, na + y) {
        return Ok(None);
    }
    let (target, q) = quotient_lmp(&u, &p)?;
    let left = LmpHom { map: (0..na).map(|s| q.apply(s)).collect() };
    let right = LmpHom { map: (0..nb).map(|s| q.apply(na + s)).collect() };
    Ok(Some(Cospan { target, left, right }))
}

/// The relation a cospan induces on the disjoint union: `u ~ v` iff both
/// legs map them to the same target state (as a partition of the union,
/// left states first).
pub fn cospan_relation(a: &FiniteLmp, b: &FiniteLmp, cospan: &Cospan) -> Partition {
    let mut assign = Vec::with_capacity(a.n_states() + b.n_states());
    assign.extend(cospan.left.map.iter().copied());
    assign.extend(cospan.right.map.iter().copied());
    Partition::from_assignment(&assign)
}

// --- pushouts -----------------------------------------------------------------

/// A pushout of a span `b ←f− a −g→ c`: the amalgam plus its two legs.
#[derive(Debug, Clone)]
pub struct Pushout {
    pub lmp: FiniteLmp,
    /// Leg from the left process (`b`).
    pub left: LmpHom,
    /// Leg from the right process (`c`).
    pub right: LmpHom,
}

/// Glue `b` and `c` along the span through `a`: quotient the disjoint
/// union `b ⊎ c` by the equivalence generated by `f(x) ∼ g(x)`. The glue
/// must produce well-defined labels and rows — guaranteed when `f` and
/// `g` are morphisms onto their images in the cases we build, and checked
/// exhaustively here regardless.
pub fn pushout_lmp(
    a: &FiniteLmp,
    b: &FiniteLmp,
    c: &FiniteLmp,
    f: &LmpHom,
    g: &LmpHom,
) -> Result<Pushout> {
    if let Err(v) = verify_lmp_hom(a, b, f) {
        return Err(Error::precondition(format!("left leg is not a morphism: {v:?}")));
    }
    if let Err(v) = verify_lmp_hom(a, c, g) {
        return Err(Error::precondition(format!("right leg is not a morphism: {v:?}")));
    }
    let (nb, nc) = (b.n_states(), c.n_states());
    let mut uf = UnionFind::new(nb + nc);
    for x in 0..a.n_states() {
        uf.union(f.apply(x), nb + g.apply(x));
    }
    let glue = uf.to_partition();
    let union = disjoint_union(b, c);
    // The glue must be a bisimulation of the union for the quotient rows
    // to be well defined; surface a structured error if it is not.
    let (lmp, q) = quotient_lmp(&union, &glue)
        .map_err(|e| Error::construction(format!("glued rows are ill-defined: {e}")))?;
    let left = LmpHom { map: (0..nb).map(|s| q.apply(s)).collect() };
    let right = LmpHom { map: (0..nc).map(|s| q.apply(nb + s)).collect() };
    Ok(Pushout { lmp, left, right })
}

/// Verify the universal property of `po` against one test target: every
/// commuting cocone of morphisms `(h_b: b → t, h_c: c → t)` over the span
/// `f, g` factors through the pushout by a unique mediating morphism. All
/// `|t|^|b| · |t|^|c|` set-map pairs are enumerated; returns the number
/// of cocones checked.
pub fn check_universal_property(
    b: &FiniteLmp,
    c: &FiniteLmp,
    f: &LmpHom,
    g: &LmpHom,
    po: &Pushout,
    target: &FiniteLmp,
) -> Result<usize> {
    let (nb, nc, nt, np) = (b.n_states(), c.n_states(), target.n_states(), po.lmp.n_states());
    let total = nt.checked_pow((nb + nc) as u32).ok_or_else(|| {
        Error::precondition("target too large for exhaustive cocone enumeration")
    })?;
    if total > 2_000_000 {
        return Err(Error::precondition("target too large for exhaustive cocone enumeration"));
    }
    let mut checked = 0usize;
    let mut maps = vec![0usize; nb + nc];
    for code in 0..total {
        let mut rem = code;
        for slot in maps.iter_mut() {
            *slot = rem % nt;
            rem /= nt;
        }
        let hb = LmpHom { map: maps[..nb].to_vec() };
        let hc = LmpHom { map: maps[nb..].to_vec() };
        // Cocone: both legs morphisms, square over the span commutes.
        if hb.compose(f) != hc.compose(g)
            || verify_lmp_hom(b, target, &hb).is_err()
            || verify_lmp_hom(c, target, &hc).is_err()
        {
            continue;
        }
        checked += 1;
        // The mediating map is forced on every class (the pushout carrier
        // is jointly covered by its legs); it must be well defined, a
        // morphism, and unique — uniqueness is exactly well-definedness
        // under joint surjectivity.
        let mut mediating = vec![usize::MAX; np];
        let mut consistent = true;
        for (s, &cls) in po.left.map.iter().enumerate() {
            if mediating[cls] == usize::MAX {
                mediating[cls] = hb.apply(s);
            } else if mediating[cls] != hb.apply(s) {
                consistent = false;
            }
        }
        for (s, &cls) in po.right.map.iter().enumerate() {
            if mediating[cls] == usize::MAX {
                mediating[cls] = hc.apply(s);
            } else if mediating[cls] != hc.apply(s) {
                consistent = false;
            }
        }
        if !consistent || mediating.iter().any(|&v| v == usize::MAX) {
            return Err(Error::validation("cocone does not factor through the pushout"));
        }
        let u = LmpHom { map: mediating };
        if verify_lmp_hom(&po.lmp, target, &u).is_err() {
            return Err(Error::validation("mediating map is not a morphism"));
        }
        if u.compose(&po.left) != hb || u.compose(&po.right) != hc {
            return Err(Error::validation("mediating map fails to commute"));
        }
    }
    Ok(checked)
}
