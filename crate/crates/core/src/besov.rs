//! Besov quasi-norms with dominating mixed smoothness, assembled from Haar
//! coefficients:
//!
//! ```text
//! ‖f‖ ≍ ( Σ_j 2^{(j1+j2)(r - 1/p + 1) q} ( Σ_m |μ_{j,m}|^p )^{q/p} )^{1/q}
//! ```
//!
//! with the sup convention for `p = ∞` or `q = ∞`. Levels are evaluated from
//! exact dyadic coefficients; floats enter only at `|μ|^p`. Sums run in
//! lexicographic `(j1, j2)` order with compensated summation, so results do
//! not depend on the number of threads.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::haar::{mu_all_at_level, LevelCoefficients, MAX_LEVEL};
use crate::pointsets::PointMultiset;

/// An integrability or summability exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    /// `1/p`, zero at infinity.
    pub fn reciprocal(&self) -> f64 {
        match *self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .map(|v| {
                    if v.is_infinite() {
                        Exponent::Infinite
                    } else {
                        Exponent::Finite(v)
                    }
                })
                .ok_or_else(|| Error::Parse(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovParams {
    pub p: Exponent,
    pub q: Exponent,
    pub r: f64,
}

impl BesovParams {
    pub fn new(p: Exponent, q: Exponent, r: f64) -> Self {
        BesovParams { p, q, r }
    }

    /// Shorthand for finite `p`, `q`.
    pub fn finite(p: f64, q: f64, r: f64) -> Self {
        BesovParams::new(Exponent::Finite(p), Exponent::Finite(q), r)
    }

    /// `r - 1/p + 1`, the per-level weight exponent.
    fn weight(&self) -> f64 {
        self.r - self.p.reciprocal() + 1.0
    }
}

impl fmt::Display for BesovParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, q={}, r={})", self.p, self.q, self.r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Admissibility {
    Admissible,
    Inadmissible(String),
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible)
    }
}

/// Checks the window of the Haar characterization:
/// `1/p - 1 < r < min(1/p, 1)`, and `q > 1` when `p = ∞`.
pub fn validate(params: &BesovParams) -> Admissibility {
    let bad = |why: String| Admissibility::Inadmissible(why);
    for (name, e) in [("p", params.p), ("q", params.q)] {
        if let Exponent::Finite(v) = e {
            if !v.is_finite() || v < 1.0 {
                return bad(format!("{name} = {v} must lie in [1, inf]"));
            }
        }
    }
    if !params.r.is_finite() {
        return bad(format!("r = {} must be finite", params.r));
    }
    let inv_p = params.p.reciprocal();
    if params.p.is_infinite() && params.q == Exponent::Finite(1.0) {
        return bad("q > 1 required when p = inf".into());
    }
    if params.r <= inv_p - 1.0 {
        return bad(format!(
            "r = {} must exceed 1/p - 1 = {}",
            params.r,
            inv_p - 1.0
        ));
    }
    if params.r >= inv_p.min(1.0) {
        return bad(format!(
            "r = {} must be below min(1/p, 1) = {}",
            params.r,
            inv_p.min(1.0)
        ));
    }
    Admissibility::Admissible
}

fn require_admissible(params: &BesovParams) -> Result<()> {
    match validate(params) {
        Admissibility::Admissible => Ok(()),
        Admissibility::Inadmissible(why) => Err(Error::Inadmissible(why)),
    }
}

/// Neumaier's compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Magnitude histogram of one level: everything a norm needs from it.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelProfile {
    pub j1: i32,
    pub j2: i32,
    /// `(log2 |μ|, multiplicity)` over occupied boxes, ascending in `|μ|`.
    pub occupied: Vec<(f64, u64)>,
    /// `log2 |μ|` shared by the empty boxes.
    pub empty_log2: f64,
    /// `log2` of the number of empty boxes (`-inf` if none).
    pub empty_count_log2: f64,
}

impl LevelProfile {
    pub fn from_coefficients(level: &LevelCoefficients) -> Self {
        let mut hist: BTreeMap<Dyadic, u64> = BTreeMap::new();
        for (_, _, mu) in &level.occupied {
            *hist.entry(mu.abs()).or_default() += 1;
        }
        let log2_boxes = level.log2_boxes() as i32;
        let occupied = level.occupied.len() as f64;
        // exact in f64 up to 2^53 boxes; beyond that the occupied share is negligible
        let empty = 2f64.powi(log2_boxes) - occupied;
        LevelProfile {
            j1: level.j1,
            j2: level.j2,
            occupied: hist.into_iter().map(|(v, c)| (v.log2_abs(), c)).collect(),
            empty_log2: level.empty_value.log2_abs(),
            empty_count_log2: if empty > 0.0 {
                empty.log2()
            } else {
                f64::NEG_INFINITY
            },
        }
    }

    /// `log2 (Σ_m |μ|^p)^{1/p}`, the max for `p = ∞`.
    pub fn log2_lp(&self, p: Exponent) -> f64 {
        let terms = self
            .occupied
            .iter()
            .map(|&(v, c)| (v, (c as f64).log2()))
            .chain(std::iter::once((self.empty_log2, self.empty_count_log2)))
            .filter(|(v, c)| v.is_finite() && c.is_finite());
        match p {
            Exponent::Infinite => terms.map(|(v, _)| v).fold(f64::NEG_INFINITY, f64::max),
            Exponent::Finite(p) => {
                let logs: Vec<f64> = terms.map(|(v, c)| p * v + c).collect();
                let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if top == f64::NEG_INFINITY {
                    return top;
                }
                let mut acc = CompensatedSum::default();
                for l in &logs {
                    acc.add((l - top).exp2());
                }
                (top + acc.value().log2()) / p
            }
        }
    }

    /// `log2` of `2^{(j1+j2)(r-1/p+1)} (Σ_m |μ|^p)^{1/p}`.
    pub fn log2_weighted(&self, params: &BesovParams) -> f64 {
        f64::from(self.j1 + self.j2) * params.weight() + self.log2_lp(params.p)
    }

    /// The level's summand: its weighted value to the power `q`, or the value
    /// itself when `q = ∞`.
    pub fn term(&self, params: &BesovParams) -> f64 {
        let l = self.log2_weighted(params);
        match params.q {
            Exponent::Finite(q) => (q * l).exp2(),
            Exponent::Infinite => l.exp2(),
        }
    }
}

/// Result of a norm evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct NormBreakdown {
    pub total: f64,
    /// Levels `-1 <= j1, j2 <= J` computed from coefficients.
    pub core_part: f64,
    /// Closed-form remainder (zero in truncated mode).
    pub tail_part: f64,
    /// `(j1, j2, level term)` in evaluation order.
    pub per_level: Vec<(i32, i32, f64)>,
}

/// Level profiles of one point set for `-1 <= j1, j2 <= j_max`.
#[derive(Clone, Debug)]
pub struct HaarSpectrum {
    resolution: u32,
    j_max: i32,
    levels: Vec<LevelProfile>,
}

impl HaarSpectrum {
    /// Computes all levels up to `j_max` (in parallel; results are in
    /// lexicographic order regardless).
    pub fn compute(set: &PointMultiset, j_max: i32) -> Result<Self> {
        if !(-1..=MAX_LEVEL).contains(&j_max) {
            return Err(Error::InvalidIndex(format!("j_max = {j_max}")));
        }
        set.log2_cardinality()?;
        let grid: Vec<(i32, i32)> = (-1..=j_max)
            .flat_map(|j1| (-1..=j_max).map(move |j2| (j1, j2)))
            .collect();
        let levels = grid
            .par_iter()
            .map(|&(j1, j2)| {
                mu_all_at_level(set, j1, j2).map(|lvl| LevelProfile::from_coefficients(&lvl))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HaarSpectrum {
            resolution: set.resolution(),
            j_max,
            levels,
        })
    }

    /// Levels needed by [`exact_norm`](Self::exact_norm).
    pub fn for_exact(set: &PointMultiset) -> Result<Self> {
        Self::compute(set, set.resolution() as i32 - 1)
    }

    pub fn levels(&self) -> &[LevelProfile] {
        &self.levels
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    fn core(
        &self,
        params: &BesovParams,
        limit: i32,
    ) -> (CompensatedSum, f64, Vec<(i32, i32, f64)>) {
        let mut acc = CompensatedSum::default();
        let mut sup = 0f64;
        let mut per_level = Vec::new();
        for lvl in self
            .levels
            .iter()
            .filter(|l| l.j1 <= limit && l.j2 <= limit)
        {
            let t = lvl.term(params);
            acc.add(t);
            sup = sup.max(t);
            per_level.push((lvl.j1, lvl.j2, t));
        }
        (acc, sup, per_level)
    }

    /// Sum over all levels up to `j_max`, no tail.
    pub fn truncated_norm(&self, params: &BesovParams) -> Result<NormBreakdown> {
        require_admissible(params)?;
        let (acc, sup, per_level) = self.core(params, self.j_max);
        let core = match params.q {
            Exponent::Finite(q) => acc.value().powf(1.0 / q),
            Exponent::Infinite => sup,
        };
        Ok(NormBreakdown {
            total: core,
            core_part: core,
            tail_part: 0.0,
            per_level,
        })
    }

    /// Core levels `-1 ..= resolution - 1` plus the closed-form tail over every
    /// finer level, where all boxes are empty.
    pub fn exact_norm(&self, params: &BesovParams) -> Result<NormBreakdown> {
        require_admissible(params)?;
        let limit = self.resolution as i32 - 1;
        if self.j_max < limit {
            return Err(Error::Domain(format!(
                "spectrum stops at level {} but resolution {} needs {limit}",
                self.j_max, self.resolution
            )));
        }
        let (acc, sup, per_level) = self.core(params, limit);
        let tail = tail(self.resolution, params);
        let (core, total) = match params.q {
            Exponent::Finite(q) => {
                let mut all = acc;
                all.add(tail.powf(q));
                (acc.value().powf(1.0 / q), all.value().powf(1.0 / q))
            }
            Exponent::Infinite => (sup, sup.max(tail)),
        };
        Ok(NormBreakdown {
            total,
            core_part: core,
            tail_part: tail,
            per_level,
        })
    }
}

/// Closed-form contribution of all levels with some `j_i >= resolution`,
/// returned as a norm (the `q`-th root of the tail sum, or its sup).
///
/// Every box there is empty, so `|μ| = |mu_volume|`. With `x = 2^{q(r-1)}`:
/// levels with both `j_i >= 0` contribute `2^{-4q} x^{j1+j2}`, and the rows
/// `(-1, k)`, `(k, -1)` contribute `2^{q(1/p - r - 4)} x^k` each.
pub fn tail(resolution: u32, params: &BesovParams) -> f64 {
    let r = params.r;
    let inv_p = params.p.reciprocal();
    let res = f64::from(resolution);
    match params.q {
        Exponent::Finite(q) => {
            let x = (q * (r - 1.0)).exp2();
            let xr = x.powf(res);
            let one_minus = 1.0 - x;
            let square = (1.0 - (1.0 - xr) * (1.0 - xr)) / (one_minus * one_minus);
            let interior = (-4.0 * q).exp2() * square;
            let edges = 2.0 * (q * (inv_p - r - 4.0)).exp2() * xr / one_minus;
            (interior + edges).powf(1.0 / q)
        }
        Exponent::Infinite => {
            let decay = ((r - 1.0) * res).exp2();
            let interior = (-4f64).exp2() * decay;
            let edges = (inv_p - r - 4.0).exp2() * decay;
            interior.max(edges)
        }
    }
}

/// The `(j1, j2)` summand of the norm for `set`.
pub fn level_term(set: &PointMultiset, j1: i32, j2: i32, params: &BesovParams) -> Result<f64> {
    require_admissible(params)?;
    let level = mu_all_at_level(set, j1, j2)?;
    Ok(LevelProfile::from_coefficients(&level).term(params))
}

/// Norm with the exact tail; `set` must sit on its declared dyadic grid.
pub fn besov_norm_exact(set: &PointMultiset, params: &BesovParams) -> Result<NormBreakdown> {
    require_admissible(params)?;
    HaarSpectrum::for_exact(set)?.exact_norm(params)
}

/// Norm over levels `-1 ..= j_max` only.
pub fn besov_norm_truncated(
    set: &PointMultiset,
    params: &BesovParams,
    j_max: i32,
) -> Result<NormBreakdown> {
    require_admissible(params)?;
    HaarSpectrum::compute(set, j_max)?.truncated_norm(params)
}

/// `N^{r-1} (log2 N)^{1/q}`, the optimal order for the Besov discrepancy.
pub fn optimal_order(n_points: f64, params: &BesovParams) -> f64 {
    n_points.powf(params.r - 1.0) * n_points.log2().powf(params.q.reciprocal())
}

/// `N^{-1} (log2 N)^{1/2}`, the optimal order of the `L_p` discrepancy.
pub fn lp_optimal_order(n_points: f64) -> f64 {
    n_points.log2().sqrt() / n_points
}

/// Divides each norm by [`optimal_order`].
pub fn scaling_ratio(family: &[(f64, f64)], params: &BesovParams) -> Result<Vec<(f64, f64)>> {
    family
        .iter()
        .map(|&(n, norm)| {
            if n.is_nan() || n < 2.0 {
                return Err(Error::Domain(format!(
                    "scaling ratio needs N >= 2, got {n}"
                )));
            }
            Ok((n, norm / optimal_order(n, params)))
        })
        .collect()
}
