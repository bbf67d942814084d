//! Line-oriented model and relation-witness grammar.
//!
//! A model file declares either a continuous process or a finite labelled
//! Markov process, with optional observation, horizon, and grid lines, and
//! may embed relation-witness declarations:
//!
//! ```text
//! # continuous processes
//! process bm
//! process drift a=1
//! process drifted_bm a=1
//! process absorbed_bm lo=0 hi=4 mark=1     # hi omitted = half line
//! process reflected_bm lo=0 hi=1
//! process circle_bm radius=0.159
//! process fork fork=95 end=100
//! horizon 10
//! grid_step 0.001
//! obs point 0 | obs pointset 0 1 | obs integers | obs interval -1 1 | obs none
//!
//! # finite labelled Markov processes
//! lmp 3
//! row 0: 0.5 0.5 0
//! label 0 P
//!
//! # relation witnesses (inline, or in a stand-alone .rel file)
//! relation reflect 0
//! relation translate 1
//! relation translate_halfline 0.7 pos
//! relation fork_glue 95
//! invariant abs | abs_about 1 | frac | dist_to_int | coordinate
//!           | fold 0 1 | halfline pos | nonzero | fork_class
//! partition {0,1}{2}
//! ```
//!
//! Unknown directives and keys are rejected. Errors carry the line and
//! column of the offending token and are classed as syntax (malformed
//! text) or semantic (well-formed text with an invalid meaning).

use std::fmt;

use fdbisim_core::lmp::FiniteLmp;
use fdbisim_core::partition::Partition;
use fdbisim_core::process::{ProcessKind, ProcessModel};
use fdbisim_core::relation::{FeatureMap, SymmetryGroup, SymmetryMap};
use fdbisim_core::space::{ObsKind, ObservationMap};

pub const DEFAULT_HORIZON: f64 = 10.0;
pub const DEFAULT_GRID_STEP: f64 = 1e-3;

/// How a parse failed: malformed text vs. well-formed text that breaks a
/// model invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Semantic,
}

#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let class = match self.kind {
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::Semantic => "semantic",
        };
        write!(f, "{} error at line {}, column {}: {}", class, self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// A finite LMP plus the proposition names its labels refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct LmpFile {
    pub lmp: FiniteLmp,
    pub ap_names: Vec<String>,
}

/// Everything a model file can declare.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Process(ProcessModel),
    Lmp(LmpFile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDoc {
    pub model: ModelKind,
    /// Witness declarations embedded in the model file, if any.
    pub witness: Option<WitnessSpec>,
}

/// A relation witness: a symmetry group with an invariant feature, or an
/// explicit state partition for finite systems.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessSpec {
    Symmetry(SymmetryGroup),
    Partition(Partition),
}

// --- tokenizing ---------------------------------------------------------------

struct Tok<'a> {
    text: &'a str,
    col: usize,
}

struct Line<'a> {
    no: usize,
    toks: Vec<Tok<'a>>,
}

impl<'a> Line<'a> {
    fn err(&self, col: usize, kind: ParseErrorKind, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.no, col, kind, msg: msg.into() }
    }

    fn syntax(&self, idx: usize, msg: impl Into<String>) -> ParseError {
        let col = self.toks.get(idx).map(|t| t.col).unwrap_or_else(|| {
            self.toks.last().map(|t| t.col + t.text.len()).unwrap_or(1)
        });
        self.err(col, ParseErrorKind::Syntax, msg)
    }

    fn semantic(&self, idx: usize, msg: impl Into<String>) -> ParseError {
        let col = self.toks.get(idx).map(|t| t.col).unwrap_or(1);
        self.err(col, ParseErrorKind::Semantic, msg)
    }

    fn word(&self, idx: usize) -> Option<&'a str> {
        self.toks.get(idx).map(|t| t.text)
    }

    fn number(&self, idx: usize) -> Result<f64, ParseError> {
        let t = self
            .word(idx)
            .ok_or_else(|| self.syntax(idx, "expected a number"))?;
        let v: f64 = t
            .parse()
            .map_err(|_| self.syntax(idx, format!("`{t}` is not a number")))?;
        if !v.is_finite() {
            return Err(self.semantic(idx, format!("`{t}` is not finite")));
        }
        Ok(v)
    }

    fn index(&self, idx: usize) -> Result<usize, ParseError> {
        let t = self
            .word(idx)
            .ok_or_else(|| self.syntax(idx, "expected a state index"))?;
        t.parse()
            .map_err(|_| self.syntax(idx, format!("`{t}` is not a state index")))
    }

    fn done_after(&self, idx: usize) -> Result<(), ParseError> {
        if self.toks.len() > idx {
            return Err(self.syntax(idx, format!("unexpected `{}`", self.toks[idx].text)));
        }
        Ok(())
    }
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = Vec::new();
        let mut offset = 0;
        for piece in body.split_whitespace() {
            let col = body[offset..].find(piece).map(|p| offset + p).unwrap_or(offset);
            toks.push(Tok { text: piece, col: col + 1 });
            offset = col + piece.len();
        }
        if !toks.is_empty() {
            lines.push(Line { no: i + 1, toks });
        }
    }
    lines
}

/// Parse `key=value` pairs with a fixed set of known keys.
fn parse_kv(line: &Line<'_>, start: usize, known: &[&str]) -> Result<Vec<(String, f64, usize)>, ParseError> {
    let mut out = Vec::new();
    for idx in start..line.toks.len() {
        let t = line.toks[idx].text;
        let (key, value) = t
            .split_once('=')
            .ok_or_else(|| line.syntax(idx, format!("expected key=value, got `{t}`")))?;
        if !known.contains(&key) {
            return Err(line.syntax(idx, format!("unknown key `{key}`")));
        }
        let v: f64 = value
            .parse()
            .map_err(|_| line.syntax(idx, format!("`{value}` is not a number")))?;
        if !v.is_finite() {
            return Err(line.semantic(idx, format!("`{value}` is not finite")));
        }
        if out.iter().any(|(k, _, _)| k == key) {
            return Err(line.semantic(idx, format!("duplicate key `{key}`")));
        }
        out.push((key.to_string(), v, idx));
    }
    Ok(out)
}

fn get_kv(kv: &[(String, f64, usize)], key: &str) -> Option<f64> {
    kv.iter().find(|(k, _, _)| k == key).map(|(_, v, _)| *v)
}

// --- model parsing ------------------------------------------------------------

struct PendingProcess {
    kind: ProcessKind,
    obs: Option<ObsKind>,
    obs_fixed: bool,
    decl_line: usize,
}

struct PendingLmp {
    n: usize,
    rows: Vec<Option<Vec<f64>>>,
    labels: Vec<Vec<String>>,
    ap_names: Vec<String>,
    decl_line: usize,
}

#[derive(Default)]
struct PendingWitness {
    generators: Vec<SymmetryMap>,
    invariant: Option<FeatureMap>,
    partition: Option<Partition>,
    any: bool,
}

/// Parse a model file (process or LMP, plus optional embedded witness).
pub fn parse_model(text: &str) -> Result<ModelDoc, ParseError> {
    let lines = tokenize(text);
    let mut process: Option<PendingProcess> = None;
    let mut lmp: Option<PendingLmp> = None;
    let mut horizon: Option<f64> = None;
    let mut grid_step: Option<f64> = None;
    let mut witness = PendingWitness::default();

    let fallback = Line { no: lines.last().map(|l| l.no).unwrap_or(1), toks: Vec::new() };

    for line in &lines {
        let head = line.word(0).unwrap();
        match head {
            "process" => {
                if process.is_some() || lmp.is_some() {
                    return Err(line.semantic(0, "more than one model declaration"));
                }
                process = Some(parse_process_line(line)?);
            }
            "obs" => {
                let p = process
                    .as_mut()
                    .ok_or_else(|| line.semantic(0, "obs before process declaration"))?;
                if p.obs_fixed {
                    return Err(line.semantic(0, "observation already fixed by the process"));
                }
                if p.obs.is_some() {
                    return Err(line.semantic(0, "duplicate obs declaration"));
                }
                p.obs = Some(parse_obs_line(line)?);
            }
            "horizon" => {
                if horizon.is_some() {
                    return Err(line.semantic(0, "duplicate horizon"));
                }
                let v = line.number(1)?;
                line.done_after(2)?;
                if v <= 0.0 {
                    return Err(line.semantic(1, "horizon must be positive"));
                }
                horizon = Some(v);
            }
            "grid_step" => {
                if grid_step.is_some() {
                    return Err(line.semantic(0, "duplicate grid_step"));
                }
                let v = line.number(1)?;
                line.done_after(2)?;
                if v <= 0.0 {
                    return Err(line.semantic(1, "grid_step must be positive"));
                }
                grid_step = Some(v);
            }
            "lmp" => {
                if process.is_some() || lmp.is_some() {
                    return Err(line.semantic(0, "more than one model declaration"));
                }
                let n = line.index(1)?;
                line.done_after(2)?;
                if n == 0 {
                    return Err(line.semantic(1, "an LMP needs at least one state"));
                }
                lmp = Some(PendingLmp {
                    n,
                    rows: vec![None; n],
                    labels: vec![Vec::new(); n],
                    ap_names: Vec::new(),
                    decl_line: line.no,
                });
            }
            "row" => {
                let l = lmp
                    .as_mut()
                    .ok_or_else(|| line.semantic(0, "row before lmp declaration"))?;
                parse_row_line(line, l)?;
            }
            "label" => {
                let l = lmp
                    .as_mut()
                    .ok_or_else(|| line.semantic(0, "label before lmp declaration"))?;
                parse_label_line(line, l)?;
            }
            "relation" => {
                witness.any = true;
                witness.generators.push(parse_relation_line(line)?);
            }
            "invariant" => {
                if witness.invariant.is_some() {
                    return Err(line.semantic(0, "duplicate invariant"));
                }
                witness.any = true;
                witness.invariant = Some(parse_invariant_line(line)?);
            }
            "partition" => {
                if witness.partition.is_some() {
                    return Err(line.semantic(0, "duplicate partition"));
                }
                witness.any = true;
                witness.partition = Some(parse_partition_line(line)?);
            }
            other => {
                return Err(line.syntax(0, format!("unknown directive `{other}`")));
            }
        }
    }

    let model = match (process, lmp) {
        (Some(p), None) => {
            let h = horizon.unwrap_or(DEFAULT_HORIZON);
            let dt = grid_step.unwrap_or_else(|| DEFAULT_GRID_STEP.min(h / 100.0));
            let obs = ObservationMap::from_kind(p.obs.unwrap_or(ObsKind::None));
            let m = ProcessModel::new(p.kind, obs, h, dt).map_err(|e| ParseError {
                line: p.decl_line,
                col: 1,
                kind: ParseErrorKind::Semantic,
                msg: e.to_string(),
            })?;
            ModelKind::Process(m)
        }
        (None, Some(l)) => {
            if horizon.is_some() || grid_step.is_some() {
                return Err(fallback.err(
                    1,
                    ParseErrorKind::Semantic,
                    "horizon/grid_step apply to continuous processes only",
                ));
            }
            ModelKind::Lmp(finish_lmp(l, &fallback)?)
        }
        (None, None) => {
            return Err(fallback.err(1, ParseErrorKind::Syntax, "no model declaration"));
        }
        (Some(_), Some(_)) => unreachable!("guarded at declaration"),
    };

    let witness = finish_witness(witness, &model, &fallback)?;
    Ok(ModelDoc { model, witness })
}

/// Parse a stand-alone relation-witness file.
pub fn parse_witness(text: &str, model: &ModelKind) -> Result<WitnessSpec, ParseError> {
    let lines = tokenize(text);
    let mut witness = PendingWitness::default();
    let fallback = Line { no: lines.last().map(|l| l.no).unwrap_or(1), toks: Vec::new() };
    for line in &lines {
        match line.word(0).unwrap() {
            "relation" => {
                witness.any = true;
                witness.generators.push(parse_relation_line(line)?);
            }
            "invariant" => {
                if witness.invariant.is_some() {
                    return Err(line.semantic(0, "duplicate invariant"));
                }
                witness.any = true;
                witness.invariant = Some(parse_invariant_line(line)?);
            }
            "partition" => {
                if witness.partition.is_some() {
                    return Err(line.semantic(0, "duplicate partition"));
                }
                witness.any = true;
                witness.partition = Some(parse_partition_line(line)?);
            }
            other => return Err(line.syntax(0, format!("unknown directive `{other}`"))),
        }
    }
    finish_witness(witness, model, &fallback)?
        .ok_or_else(|| fallback.err(1, ParseErrorKind::Syntax, "no witness declaration"))
}

fn parse_process_line(line: &Line<'_>) -> Result<PendingProcess, ParseError> {
    let name = line
        .word(1)
        .ok_or_else(|| line.syntax(1, "expected a process kind"))?;
    let decl_line = line.no;
    let pending = |kind: ProcessKind, obs: Option<ObsKind>, obs_fixed: bool| PendingProcess {
        kind,
        obs,
        obs_fixed,
        decl_line,
    };
    match name {
        "bm" => {
            line.done_after(2)?;
            Ok(pending(ProcessKind::BrownianMotion, None, false))
        }
        "drift" => {
            let kv = parse_kv(line, 2, &["a"])?;
            let a = get_kv(&kv, "a")
                .ok_or_else(|| line.syntax(2, "drift needs a=<slope>"))?;
            Ok(pending(ProcessKind::Drift { a }, None, false))
        }
        "drifted_bm" => {
            let kv = parse_kv(line, 2, &["a"])?;
            let a = get_kv(&kv, "a")
                .ok_or_else(|| line.syntax(2, "drifted_bm needs a=<drift>"))?;
            Ok(pending(ProcessKind::DriftedBm { a }, None, false))
        }
        "absorbed_bm" => {
            let kv = parse_kv(line, 2, &["lo", "hi", "mark"])?;
            let lo = get_kv(&kv, "lo")
                .ok_or_else(|| line.syntax(2, "absorbed_bm needs lo=<barrier>"))?;
            let hi = get_kv(&kv, "hi").unwrap_or(f64::INFINITY);
            let obs = get_kv(&kv, "mark").map(ObsKind::Point);
            let fixed = obs.is_some();
            Ok(pending(ProcessKind::AbsorbedBm { lo, hi }, obs, fixed))
        }
        "reflected_bm" => {
            let kv = parse_kv(line, 2, &["lo", "hi"])?;
            let lo = get_kv(&kv, "lo")
                .ok_or_else(|| line.syntax(2, "reflected_bm needs lo=<barrier>"))?;
            let hi = get_kv(&kv, "hi")
                .ok_or_else(|| line.syntax(2, "reflected_bm needs hi=<barrier>"))?;
            Ok(pending(ProcessKind::ReflectedBm { lo, hi }, None, false))
        }
        "circle_bm" => {
            let kv = parse_kv(line, 2, &["radius"])?;
            let radius = get_kv(&kv, "radius")
                .ok_or_else(|| line.syntax(2, "circle_bm needs radius=<r>"))?;
            Ok(pending(ProcessKind::CircleBm { radius }, None, false))
        }
        "fork" => {
            let kv = parse_kv(line, 2, &["fork", "end"])?;
            let fork_pos = get_kv(&kv, "fork")
                .ok_or_else(|| line.syntax(2, "fork needs fork=<position>"))?;
            let end_pos = get_kv(&kv, "end")
                .ok_or_else(|| line.syntax(2, "fork needs end=<position>"))?;
            Ok(pending(
                ProcessKind::Fork { fork_pos, end_pos },
                Some(ObsKind::ForkTips),
                true,
            ))
        }
        other => Err(line.syntax(1, format!("unknown process kind `{other}`"))),
    }
}

fn parse_obs_line(line: &Line<'_>) -> Result<ObsKind, ParseError> {
    let kind = line
        .word(1)
        .ok_or_else(|| line.syntax(1, "expected an observation kind"))?;
    match kind {
        "point" => {
            let c = line.number(2)?;
            line.done_after(3)?;
            Ok(ObsKind::Point(c))
        }
        "pointset" | "points" => {
            let mut pts = Vec::new();
            for idx in 2..line.toks.len() {
                pts.push(line.number(idx)?);
            }
            if pts.is_empty() {
                return Err(line.syntax(2, format!("{kind} needs at least one point")));
            }
            if kind == "pointset" {
                Ok(ObsKind::PointSet(pts))
            } else {
                Ok(ObsKind::Points(pts))
            }
        }
        "integers" => {
            line.done_after(2)?;
            Ok(ObsKind::Integers)
        }
        "interval" => {
            let lo = line.number(2)?;
            let hi = line.number(3)?;
            line.done_after(4)?;
            if lo >= hi {
                return Err(line.semantic(2, "interval needs lo < hi"));
            }
            Ok(ObsKind::Interval(lo, hi))
        }
        "none" => {
            line.done_after(2)?;
            Ok(ObsKind::None)
        }
        other => Err(line.syntax(1, format!("unknown observation kind `{other}`"))),
    }
}

fn parse_row_line(line: &Line<'_>, l: &mut PendingLmp) -> Result<(), ParseError> {
    // `row <i>: w0 w1 … w_{n-1}` (the colon may attach to the index).
    let raw = line
        .word(1)
        .ok_or_else(|| line.syntax(1, "expected a state index"))?;
    let (i_txt, first_weight_idx) = match raw.strip_suffix(':') {
        Some(t) => (t, 2),
        None => {
            let colon = line
                .word(2)
                .ok_or_else(|| line.syntax(2, "expected `:`"))?;
            if colon != ":" {
                return Err(line.syntax(2, format!("expected `:`, got `{colon}`")));
            }
            (raw, 3)
        }
    };
    let i: usize = i_txt
        .parse()
        .map_err(|_| line.syntax(1, format!("`{i_txt}` is not a state index")))?;
    if i >= l.n {
        return Err(line.semantic(1, format!("row for missing state {i} (n = {})", l.n)));
    }
    if l.rows[i].is_some() {
        return Err(line.semantic(1, format!("duplicate row for state {i}")));
    }
    let mut weights = Vec::with_capacity(l.n);
    for idx in first_weight_idx..first_weight_idx + l.n {
        let w = line.number(idx)?;
        if !(0.0..=1.0).contains(&w) {
            return Err(line.semantic(idx, format!("weight {w} outside [0, 1]")));
        }
        weights.push(w);
    }
    line.done_after(first_weight_idx + l.n)?;
    let mass: f64 = weights.iter().sum();
    if mass > 1.0 + 1e-9 {
        return Err(line.semantic(first_weight_idx, format!("row mass {mass} > 1")));
    }
    l.rows[i] = Some(weights);
    Ok(())
}

fn parse_label_line(line: &Line<'_>, l: &mut PendingLmp) -> Result<(), ParseError> {
    let i = line.index(1)?;
    if i >= l.n {
        return Err(line.semantic(1, format!("label for missing state {i} (n = {})", l.n)));
    }
    if line.toks.len() < 3 {
        return Err(line.syntax(2, "expected at least one proposition name"));
    }
    for idx in 2..line.toks.len() {
        let name = line.toks[idx].text;
        if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(line.syntax(idx, format!("invalid proposition name `{name}`")));
        }
        if l.labels[i].iter().any(|x| x == name) {
            return Err(line.semantic(idx, format!("duplicate proposition `{name}` on state {i}")));
        }
        if !l.ap_names.iter().any(|x| x == name) {
            if l.ap_names.len() == 32 {
                return Err(line.semantic(idx, "at most 32 distinct propositions"));
            }
            l.ap_names.push(name.to_string());
        }
        l.labels[i].push(name.to_string());
    }
    Ok(())
}

fn finish_lmp(mut l: PendingLmp, fallback: &Line<'_>) -> Result<LmpFile, ParseError> {
    // Canonical bit order is alphabetical, so the assignment does not
    // depend on which state's labels were declared first.
    l.ap_names.sort();
    let mut tau = Vec::with_capacity(l.n * l.n);
    for (i, row) in l.rows.iter().enumerate() {
        match row {
            Some(w) => tau.extend_from_slice(w),
            None => {
                return Err(ParseError {
                    line: l.decl_line,
                    col: 1,
                    kind: ParseErrorKind::Semantic,
                    msg: format!("missing row for state {i}"),
                })
            }
        }
    }
    let labels: Vec<u32> = l
        .labels
        .iter()
        .map(|names| {
            names
                .iter()
                .map(|name| {
                    let bit = l.ap_names.iter().position(|x| x == name).unwrap();
                    1u32 << bit
                })
                .sum()
        })
        .collect();
    let lmp = FiniteLmp::new(labels, tau).map_err(|e| {
        fallback.err(1, ParseErrorKind::Semantic, e.to_string())
    })?;
    Ok(LmpFile { lmp, ap_names: l.ap_names })
}

fn parse_relation_line(line: &Line<'_>) -> Result<SymmetryMap, ParseError> {
    let name = line
        .word(1)
        .ok_or_else(|| line.syntax(1, "expected a relation generator"))?;
    match name {
        "reflect" => {
            let c = line.number(2)?;
            line.done_after(3)?;
            Ok(SymmetryMap::ReflectAbout { c })
        }
        "translate" => {
            let k = line.number(2)?;
            line.done_after(3)?;
            Ok(SymmetryMap::Translate { k })
        }
        "translate_halfline" => {
            let k = line.number(2)?;
            let side = parse_side(line, 3)?;
            line.done_after(4)?;
            Ok(SymmetryMap::TranslateHalfLine { k, positive: side })
        }
        "fork_glue" => {
            let fork_pos = line.number(2)?;
            line.done_after(3)?;
            Ok(SymmetryMap::ForkGlue { fork_pos })
        }
        "negate_angle" => {
            line.done_after(2)?;
            Ok(SymmetryMap::NegateAngle)
        }
        other => Err(line.syntax(1, format!("unknown relation generator `{other}`"))),
    }
}

fn parse_side(line: &Line<'_>, idx: usize) -> Result<bool, ParseError> {
    match line.word(idx) {
        Some("pos") => Ok(true),
        Some("neg") => Ok(false),
        Some(other) => Err(line.syntax(idx, format!("expected pos|neg, got `{other}`"))),
        None => Err(line.syntax(idx, "expected pos|neg")),
    }
}

fn parse_invariant_line(line: &Line<'_>) -> Result<FeatureMap, ParseError> {
    let name = line
        .word(1)
        .ok_or_else(|| line.syntax(1, "expected an invariant feature"))?;
    match name {
        "abs" => {
            line.done_after(2)?;
            Ok(FeatureMap::Abs)
        }
        "abs_about" => {
            let c = line.number(2)?;
            line.done_after(3)?;
            Ok(FeatureMap::AbsAbout { c })
        }
        "frac" => {
            line.done_after(2)?;
            Ok(FeatureMap::Frac)
        }
        "dist_to_int" => {
            line.done_after(2)?;
            Ok(FeatureMap::DistToInt)
        }
        "coordinate" => {
            line.done_after(2)?;
            Ok(FeatureMap::Coordinate)
        }
        "fold" => {
            let lo = line.number(2)?;
            let hi = line.number(3)?;
            line.done_after(4)?;
            if lo >= hi {
                return Err(line.semantic(2, "fold needs lo < hi"));
            }
            Ok(FeatureMap::Fold { lo, hi })
        }
        "halfline" => {
            let side = parse_side(line, 2)?;
            line.done_after(3)?;
            Ok(FeatureMap::HalfLineClass { positive: side })
        }
        "nonzero" => {
            line.done_after(2)?;
            Ok(FeatureMap::NonzeroClass)
        }
        "fork_class" => {
            line.done_after(2)?;
            Ok(FeatureMap::ForkClass)
        }
        other => Err(line.syntax(1, format!("unknown invariant feature `{other}`"))),
    }
}

fn parse_partition_line(line: &Line<'_>) -> Result<Partition, ParseError> {
    // `partition {0,1}{2}` — blocks of state indices covering 0..n.
    let mut body = String::new();
    for t in &line.toks[1..] {
        body.push_str(t.text);
    }
    if body.is_empty() {
        return Err(line.syntax(1, "expected partition blocks"));
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut rest = body.as_str();
    while !rest.is_empty() {
        let Some(stripped) = rest.strip_prefix('{') else {
            return Err(line.semantic(1, format!("expected `{{` at `{rest}`")));
        };
        let Some(end) = stripped.find('}') else {
            return Err(line.semantic(1, "unclosed `{`"));
        };
        let inner = &stripped[..end];
        let mut block = Vec::new();
        for piece in inner.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                return Err(line.semantic(1, "empty state index in block"));
            }
            let i: usize = piece
                .parse()
                .map_err(|_| line.semantic(1, format!("`{piece}` is not a state index")))?;
            block.push(i);
        }
        blocks.push(block);
        rest = &stripped[end + 1..];
    }
    let n = blocks.iter().map(|b| b.len()).sum();
    Partition::from_blocks(n, &blocks).map_err(|e| line.semantic(1, e.to_string()))
}

fn finish_witness(
    w: PendingWitness,
    model: &ModelKind,
    fallback: &Line<'_>,
) -> Result<Option<WitnessSpec>, ParseError> {
    if !w.any {
        return Ok(None);
    }
    match (w.partition, w.invariant) {
        (Some(p), None) => {
            if !w.generators.is_empty() {
                return Err(fallback.err(
                    1,
                    ParseErrorKind::Semantic,
                    "partition witnesses take no relation generators",
                ));
            }
            if let ModelKind::Lmp(l) = model {
                if p.len() != l.lmp.n_states() {
                    return Err(fallback.err(
                        1,
                        ParseErrorKind::Semantic,
                        format!(
                            "partition covers {} states but the model has {}",
                            p.len(),
                            l.lmp.n_states()
                        ),
                    ));
                }
            } else {
                return Err(fallback.err(
                    1,
                    ParseErrorKind::Semantic,
                    "partition witnesses apply to finite models",
                ));
            }
            Ok(Some(WitnessSpec::Partition(p)))
        }
        (None, Some(invariant)) => {
            if matches!(model, ModelKind::Lmp(_)) {
                return Err(fallback.err(
                    1,
                    ParseErrorKind::Semantic,
                    "symmetry witnesses apply to continuous models",
                ));
            }
            Ok(Some(WitnessSpec::Symmetry(SymmetryGroup {
                generators: w.generators,
                invariant,
            })))
        }
        (None, None) => Err(fallback.err(
            1,
            ParseErrorKind::Semantic,
            "relation generators need an invariant declaration",
        )),
        (Some(_), Some(_)) => Err(fallback.err(
            1,
            ParseErrorKind::Semantic,
            "a witness is either a partition or a symmetry group, not both",
        )),
    }
}

// --- serializing --------------------------------------------------------------

fn push_obs(out: &mut String, kind: &ObsKind) {
    match kind {
        ObsKind::None => out.push_str("obs none\n"),
        ObsKind::Point(c) => out.push_str(&format!("obs point {c}\n")),
        ObsKind::PointSet(pts) => {
            out.push_str("obs pointset");
            for p in pts {
                out.push_str(&format!(" {p}"));
            }
            out.push('\n');
        }
        ObsKind::Points(pts) => {
            out.push_str("obs points");
            for p in pts {
                out.push_str(&format!(" {p}"));
            }
            out.push('\n');
        }
        ObsKind::Integers => out.push_str("obs integers\n"),
        ObsKind::Interval(lo, hi) => out.push_str(&format!("obs interval {lo} {hi}\n")),
        ObsKind::ForkTips | ObsKind::FiniteLabels(_) => {}
    }
}

/// Render a parsed document back to canonical text; parsing the output
/// reproduces the same structures.
pub fn serialize_model(doc: &ModelDoc) -> String {
    let mut out = String::new();
    match &doc.model {
        ModelKind::Process(m) => {
            match &m.kind {
                ProcessKind::BrownianMotion => out.push_str("process bm\n"),
                ProcessKind::Drift { a } => out.push_str(&format!("process drift a={a}\n")),
                ProcessKind::DriftedBm { a } => {
                    out.push_str(&format!("process drifted_bm a={a}\n"))
                }
                ProcessKind::AbsorbedBm { lo, hi } => {
                    out.push_str(&format!("process absorbed_bm lo={lo}"));
                    if hi.is_finite() {
                        out.push_str(&format!(" hi={hi}"));
                    }
                    if let ObsKind::Point(mark) = &m.obs.kind {
                        out.push_str(&format!(" mark={mark}"));
                    }
                    out.push('\n');
                }
                ProcessKind::ReflectedBm { lo, hi } => {
                    out.push_str(&format!("process reflected_bm lo={lo} hi={hi}\n"))
                }
                ProcessKind::CircleBm { radius } => {
                    out.push_str(&format!("process circle_bm radius={radius}\n"))
                }
                ProcessKind::Fork { fork_pos, end_pos } => {
                    out.push_str(&format!("process fork fork={fork_pos} end={end_pos}\n"))
                }
                ProcessKind::Embedded { .. } => {
                    unreachable!("embedded processes have no file form")
                }
            }
            out.push_str(&format!("horizon {}\n", m.horizon));
            out.push_str(&format!("grid_step {}\n", m.grid_step));
            let emit_obs = !matches!(
                (&m.kind, &m.obs.kind),
                (ProcessKind::Fork { .. }, _) | (ProcessKind::AbsorbedBm { .. }, ObsKind::Point(_))
            );
            if emit_obs {
                push_obs(&mut out, &m.obs.kind);
            }
        }
        ModelKind::Lmp(l) => {
            let n = l.lmp.n_states();
            out.push_str(&format!("lmp {n}\n"));
            for i in 0..n {
                out.push_str(&format!("row {i}:"));
                for j in 0..n {
                    out.push_str(&format!(" {}", l.lmp.tau(i, j)));
                }
                out.push('\n');
            }
            for i in 0..n {
                let bits = l.lmp.label(i);
                if bits == 0 {
                    continue;
                }
                out.push_str(&format!("label {i}"));
                for (b, name) in l.ap_names.iter().enumerate() {
                    if bits >> b & 1 == 1 {
                        out.push_str(&format!(" {name}"));
                    }
                }
                out.push('\n');
            }
        }
    }
    if let Some(w) = &doc.witness {
        out.push_str(&serialize_witness(w));
    }
    out
}

pub fn serialize_witness(w: &WitnessSpec) -> String {
    let mut out = String::new();
    match w {
        WitnessSpec::Partition(p) => {
            out.push_str("partition ");
            for block in p.blocks() {
                out.push('{');
                let mut first = true;
                for i in block {
                    if !first {
                        out.push(',');
                    }
                    out.push_str(&i.to_string());
                    first = false;
                }
                out.push('}');
            }
            out.push('\n');
        }
        WitnessSpec::Symmetry(g) => {
            for gen in &g.generators {
                match gen {
                    SymmetryMap::Identity => {}
                    SymmetryMap::ReflectAbout { c } => {
                        out.push_str(&format!("relation reflect {c}\n"))
                    }
                    SymmetryMap::Translate { k } => {
                        out.push_str(&format!("relation translate {k}\n"))
                    }
                    SymmetryMap::TranslateHalfLine { k, positive } => out.push_str(&format!(
                        "relation translate_halfline {k} {}\n",
                        if *positive { "pos" } else { "neg" }
                    )),
                    SymmetryMap::NegateAngle => out.push_str("relation negate_angle\n"),
                    SymmetryMap::ForkGlue { fork_pos } => {
                        out.push_str(&format!("relation fork_glue {fork_pos}\n"))
                    }
                }
            }
            let inv = match &g.invariant {
                FeatureMap::Coordinate => "coordinate".to_string(),
                FeatureMap::Abs => "abs".to_string(),
                FeatureMap::AbsAbout { c } => format!("abs_about {c}"),
                FeatureMap::Frac => "frac".to_string(),
                FeatureMap::DistToInt => "dist_to_int".to_string(),
                FeatureMap::Fold { lo, hi } => format!("fold {lo} {hi}"),
                FeatureMap::HalfLineClass { positive } => {
                    format!("halfline {}", if *positive { "pos" } else { "neg" })
                }
                FeatureMap::NonzeroClass => "nonzero".to_string(),
                FeatureMap::ForkClass => "fork_class".to_string(),
                FeatureMap::BlockOf(_) => unreachable!("block features have no file form"),
            };
            out.push_str(&format!("invariant {inv}\n"));
        }
    }
    out
}
