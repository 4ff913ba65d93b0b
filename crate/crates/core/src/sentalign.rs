//! Length-based monotone sentence alignment.
//!
//! Each bead links `m` source sentences to `n` target sentences. Its cost
//! is `-ln prior(m, n) - ln(2 * (1 - Phi(|delta|)))` with
//! `delta = (tgt_len - c * src_len) / sqrt(src_len * s2)`, lengths counted
//! in characters. The aligner finds the bead tiling of both sentence lists
//! with minimum total cost.
//!
//! Ties are resolved from the end of the alignment backwards: at each step
//! the bead ranked lowest wins, with `1-1` ranked first and the remaining
//! shapes in lexicographic order.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::split::SentenceList;

/// Bead shape: number of source and target sentences covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BeadShape {
    pub src: usize,
    pub tgt: usize,
}

impl BeadShape {
    pub const fn new(src: usize, tgt: usize) -> Self {
        BeadShape { src, tgt }
    }

    pub const ONE_ONE: BeadShape = BeadShape::new(1, 1);

    /// Tie-break rank: `1-1` first, then lexicographic.
    fn rank(self) -> (bool, BeadShape) {
        (self != Self::ONE_ONE, self)
    }
}

impl fmt::Display for BeadShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.src, self.tgt)
    }
}

impl FromStr for BeadShape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| format!("bead shape {s:?} is not of the form m-n"))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad bead shape {s:?}"))
        };
        let shape = BeadShape::new(parse(a)?, parse(b)?);
        if shape.src + shape.tgt == 0 {
            return Err("bead shape 0-0 covers nothing".into());
        }
        Ok(shape)
    }
}

impl TryFrom<String> for BeadShape {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<BeadShape> for String {
    fn from(s: BeadShape) -> String {
        s.to_string()
    }
}

/// One bead of an alignment: half-open sentence index ranges on each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentLink {
    pub src: Range<usize>,
    pub tgt: Range<usize>,
    pub cost: f64,
}

impl AlignmentLink {
    pub fn new(src: Range<usize>, tgt: Range<usize>, cost: f64) -> Self {
        AlignmentLink { src, tgt, cost }
    }

    pub fn one_to_one(i: usize) -> Self {
        AlignmentLink::new(i..i + 1, i..i + 1, 0.0)
    }

    pub fn shape(&self) -> BeadShape {
        BeadShape::new(self.src.len(), self.tgt.len())
    }

    /// `srcStart-srcEnd<TAB>tgtStart-tgtEnd<TAB>cost`, ends exclusive.
    pub fn dump_line(&self) -> String {
        format!(
            "{}-{}\t{}-{}\t{}",
            self.src.start, self.src.end, self.tgt.start, self.tgt.end, self.cost
        )
    }

    pub fn parse_dump_line(line: &str) -> std::result::Result<Self, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [src, tgt, cost] = fields[..] else {
            return Err(format!(
                "expected 3 tab-separated fields, got {}",
                fields.len()
            ));
        };
        let range = |s: &str| -> std::result::Result<Range<usize>, String> {
            let (a, b) = s
                .split_once('-')
                .ok_or_else(|| format!("bad range {s:?}"))?;
            let a: usize = a.parse().map_err(|_| format!("bad range {s:?}"))?;
            let b: usize = b.parse().map_err(|_| format!("bad range {s:?}"))?;
            if b < a {
                return Err(format!("bad range {s:?}"));
            }
            Ok(a..b)
        };
        let cost: f64 = cost.parse().map_err(|_| format!("bad cost {cost:?}"))?;
        Ok(AlignmentLink::new(range(src)?, range(tgt)?, cost))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeadCostModel {
    log_priors: BTreeMap<BeadShape, f64>,
    /// Expected target length per source character.
    pub mean_ratio: f64,
    /// Variance of the length difference per source character.
    pub variance: f64,
}

pub const DEFAULT_MEAN_RATIO: f64 = 1.0;
pub const DEFAULT_VARIANCE: f64 = 6.8;
pub const DEFAULT_PRIORS: [(BeadShape, f64); 5] = [
    (BeadShape::new(1, 1), 0.89),
    (BeadShape::new(1, 0), 0.0099),
    (BeadShape::new(0, 1), 0.0099),
    (BeadShape::new(2, 1), 0.0445),
    (BeadShape::new(1, 2), 0.0445),
];
/// Prior used for `2-2` beads when they are switched on.
pub const TWO_TO_TWO_PRIOR: f64 = 0.011;

impl Default for BeadCostModel {
    fn default() -> Self {
        BeadCostModel::new(
            DEFAULT_PRIORS.iter().copied().collect(),
            DEFAULT_MEAN_RATIO,
            DEFAULT_VARIANCE,
        )
        .expect("default model is valid")
    }
}

impl BeadCostModel {
    /// `priors` are probabilities; they must be positive and sum to at most 1.
    pub fn new(priors: BTreeMap<BeadShape, f64>, mean_ratio: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::Config(format!(
                "length variance must be positive, got {variance}"
            )));
        }
        if !(mean_ratio > 0.0 && mean_ratio.is_finite()) {
            return Err(Error::Config(format!(
                "mean length ratio must be positive, got {mean_ratio}"
            )));
        }
        if priors.is_empty() {
            return Err(Error::Config("bead model has no shapes".into()));
        }
        if let Some((s, p)) = priors.iter().find(|(_, &p)| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::Config(format!(
                "prior for bead {s} must be in (0, 1], got {p}"
            )));
        }
        let total: f64 = priors.values().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::Config(format!(
                "bead priors sum to {total}, more than 1"
            )));
        }
        Ok(BeadCostModel {
            log_priors: priors.into_iter().map(|(s, p)| (s, p.ln())).collect(),
            mean_ratio,
            variance,
        })
    }

    /// Default model plus `2-2` beads, with all priors rescaled to sum to 1.
    pub fn with_two_to_two() -> Self {
        let mut priors: BTreeMap<BeadShape, f64> = DEFAULT_PRIORS.iter().copied().collect();
        priors.insert(BeadShape::new(2, 2), TWO_TO_TWO_PRIOR);
        let total: f64 = priors.values().sum();
        priors.values_mut().for_each(|p| *p /= total);
        BeadCostModel::new(priors, DEFAULT_MEAN_RATIO, DEFAULT_VARIANCE).expect("valid model")
    }

    pub fn log_prior(&self, shape: BeadShape) -> Option<f64> {
        self.log_priors.get(&shape).copied()
    }

    pub fn shapes(&self) -> impl Iterator<Item = BeadShape> + '_ {
        self.log_priors.keys().copied()
    }

    /// Shapes in tie-break order.
    fn ranked_shapes(&self) -> Vec<(BeadShape, f64)> {
        let mut v: Vec<_> = self.log_priors.iter().map(|(&s, &lp)| (s, lp)).collect();
        v.sort_by_key(|(s, _)| s.rank());
        v
    }

    fn length_cost(&self, src_len: usize, tgt_len: usize) -> f64 {
        // delta = 0 for an empty source side, and -ln(2 * (1 - Phi(0))) = 0
        if src_len == 0 {
            return 0.0;
        }
        let src = src_len as f64;
        let delta = (tgt_len as f64 - self.mean_ratio * src) / (src * self.variance).sqrt();
        -ln_erfc(delta.abs() / std::f64::consts::SQRT_2)
    }
}

/// `ln(erfc(x))` for `x >= 0`, switching to the asymptotic series where
/// `erfc` underflows.
fn ln_erfc(x: f64) -> f64 {
    if x < 25.0 {
        return erfc(x).ln();
    }
    let x2 = x * x;
    let inv = 1.0 / (2.0 * x2);
    // 1 - 1/(2x^2) + 3/(2x^2)^2 - 15/(2x^2)^3 + 105/(2x^2)^4
    let series = 1.0 - inv + 3.0 * inv.powi(2) - 15.0 * inv.powi(3) + 105.0 * inv.powi(4);
    -x2 - (x * std::f64::consts::PI.sqrt()).ln() + series.ln()
}

/// Cost of one bead of `shape` covering `src_len` and `tgt_len` characters.
pub fn bead_cost(
    src_len: usize,
    tgt_len: usize,
    shape: BeadShape,
    model: &BeadCostModel,
) -> Result<f64> {
    let lp = model
        .log_prior(shape)
        .ok_or(Error::UnsupportedShape(shape.src, shape.tgt))?;
    Ok(-lp + model.length_cost(src_len, tgt_len))
}

pub fn total_cost(links: &[AlignmentLink]) -> f64 {
    links.iter().fold(0.0, |acc, l| acc + l.cost)
}

fn prefix_sums(lens: &[usize]) -> Vec<usize> {
    let mut p = Vec::with_capacity(lens.len() + 1);
    p.push(0);
    for &l in lens {
        p.push(p.last().unwrap() + l);
    }
    p
}

/// Minimum-cost alignment of two lists of sentence lengths.
pub fn align_lengths(
    src: &[usize],
    tgt: &[usize],
    model: &BeadCostModel,
) -> Result<Vec<AlignmentLink>> {
    if src.is_empty() || tgt.is_empty() {
        return Err(Error::EmptyInput(
            "sentence alignment needs sentences on both sides",
        ));
    }
    let shapes = model.ranked_shapes();
    let (n, m) = (src.len(), tgt.len());
    let (ps, pt) = (prefix_sums(src), prefix_sums(tgt));
    let max_back = shapes.iter().map(|(s, _)| s.src).max().unwrap_or(1);
    let width = m + 1;
    const NONE: u8 = u8::MAX;
    let mut back = vec![NONE; (n + 1) * width];
    // rolling window of the last `max_back + 1` rows of costs
    let rows = max_back + 1;
    let mut cost = vec![f64::INFINITY; rows * width];
    for i in 0..=n {
        let row = i % rows;
        cost[row * width..(row + 1) * width].fill(f64::INFINITY);
        for j in 0..=m {
            if i == 0 && j == 0 {
                cost[row * width] = 0.0;
                continue;
            }
            let mut best = f64::INFINITY;
            let mut best_k = NONE;
            for (k, &(shape, lp)) in shapes.iter().enumerate() {
                if shape.src > i || shape.tgt > j {
                    continue;
                }
                let prev = cost[((i - shape.src) % rows) * width + (j - shape.tgt)];
                if prev == f64::INFINITY {
                    continue;
                }
                let bead =
                    -lp + model.length_cost(ps[i] - ps[i - shape.src], pt[j] - pt[j - shape.tgt]);
                let c = prev + bead;
                if c < best {
                    best = c;
                    best_k = k as u8;
                }
            }
            cost[row * width + j] = best;
            back[i * width + j] = best_k;
        }
    }

    let mut links = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let k = back[i * width + j];
        if k == NONE {
            return Err(Error::Config(
                "bead model cannot tile these sentence lists".into(),
            ));
        }
        let (shape, lp) = shapes[k as usize];
        let (si, sj) = (i - shape.src, j - shape.tgt);
        let c = -lp + model.length_cost(ps[i] - ps[si], pt[j] - pt[sj]);
        links.push(AlignmentLink::new(si..i, sj..j, c));
        i = si;
        j = sj;
    }
    links.reverse();
    Ok(links)
}

fn char_lens(list: &SentenceList) -> Vec<usize> {
    list.sentences.iter().map(|s| s.chars().count()).collect()
}

pub fn align_sentences(
    src: &SentenceList,
    tgt: &SentenceList,
    model: &BeadCostModel,
) -> Result<Vec<AlignmentLink>> {
    align_lengths(&char_lens(src), &char_lens(tgt), model)
}

pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Exhaustive search over every bead tiling; the reference for
/// [`align_lengths`] on small inputs.
pub fn brute_force_lengths(
    src: &[usize],
    tgt: &[usize],
    model: &BeadCostModel,
) -> Result<Vec<AlignmentLink>> {
    if src.len() > BRUTE_FORCE_LIMIT || tgt.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeBound(src.len(), tgt.len()));
    }
    if src.is_empty() || tgt.is_empty() {
        return Err(Error::EmptyInput(
            "sentence alignment needs sentences on both sides",
        ));
    }

    struct Search<'a> {
        src: &'a [usize],
        tgt: &'a [usize],
        model: &'a BeadCostModel,
        shapes: Vec<BeadShape>,
        path: Vec<AlignmentLink>,
        best: Option<(f64, Vec<AlignmentLink>)>,
    }

    // Same ordering the DP realizes: cost, then bead ranks compared from
    // the last bead backwards.
    fn better(cost: f64, path: &[AlignmentLink], best: &Option<(f64, Vec<AlignmentLink>)>) -> bool {
        let Some((bc, bp)) = best else { return true };
        if cost != *bc {
            return cost < *bc;
        }
        let a = path.iter().rev().map(|l| l.shape().rank());
        let b = bp.iter().rev().map(|l| l.shape().rank());
        a.lt(b)
    }

    impl Search<'_> {
        fn go(&mut self, i: usize, j: usize, acc: f64) {
            if i == self.src.len() && j == self.tgt.len() {
                if better(acc, &self.path, &self.best) {
                    self.best = Some((acc, self.path.clone()));
                }
                return;
            }
            for k in 0..self.shapes.len() {
                let shape = self.shapes[k];
                let (ni, nj) = (i + shape.src, j + shape.tgt);
                if ni > self.src.len() || nj > self.tgt.len() {
                    continue;
                }
                let s: usize = self.src[i..ni].iter().sum();
                let t: usize = self.tgt[j..nj].iter().sum();
                let c = bead_cost(s, t, shape, self.model).expect("shape from model");
                self.path.push(AlignmentLink::new(i..ni, j..nj, c));
                self.go(ni, nj, acc + c);
                self.path.pop();
            }
        }
    }

    let mut search = Search {
        src,
        tgt,
        model,
        shapes: model.shapes().collect(),
        path: Vec::new(),
        best: None,
    };
    search.go(0, 0, 0.0);
    Ok(search.best.expect("at least one tiling exists").1)
}

pub fn brute_force_align(
    src: &SentenceList,
    tgt: &SentenceList,
    model: &BeadCostModel,
) -> Result<Vec<AlignmentLink>> {
    brute_force_lengths(&char_lens(src), &char_lens(tgt), model)
}

/// Checks that `links` tile `0..n` and `0..m` exactly, in order.
pub fn is_exact_tiling(links: &[AlignmentLink], n: usize, m: usize) -> bool {
    let (mut i, mut j) = (0, 0);
    for l in links {
        if l.src.start != i || l.tgt.start != j || l.src.len() + l.tgt.len() == 0 {
            return false;
        }
        i = l.src.end;
        j = l.tgt.end;
    }
    i == n && j == m
}
