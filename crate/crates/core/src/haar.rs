//! Haar coefficients of local discrepancies, computed exactly.
//!
//! Three independent routes produce the same numbers:
//!
//! * [`mu_discrepancy`] evaluates the closed-form per-point coefficient
//!   `axis_factor(j1, m1, z1) · axis_factor(j2, m2, z2)` in dyadic arithmetic;
//! * [`mu_all_at_level`] sweeps a whole level at once with integer
//!   numerators on the point grid, touching only the box that contains each
//!   point;
//! * [`oracle_mu`] integrates the Haar function through its explicit
//!   piecewise-linear antiderivative.
//!
//! The L∞-normalized Haar system is used throughout: `h_{j,m}` is `+1` on the
//! left half of `[m 2^-j, (m+1) 2^-j)`, `-1` on the right half, and
//! `h_{-1,0}` is the indicator of `[0, 1)`.

use std::fmt;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::pointsets::{Point, PointMultiset, SignPattern};

/// Deepest supported level; keeps `m` and `2^j` inside `u64`.
pub const MAX_LEVEL: i32 = 62;

/// Names one tensor Haar function `h_{(j1,j2),(m1,m2)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HaarIndex {
    pub j1: i32,
    pub j2: i32,
    pub m1: u64,
    pub m2: u64,
}

fn check_axis(j: i32, m: u64) -> Result<()> {
    if !(-1..=MAX_LEVEL).contains(&j) {
        return Err(Error::InvalidIndex(format!(
            "level {j} outside [-1, {MAX_LEVEL}]"
        )));
    }
    if m >= positions(j) {
        return Err(Error::InvalidIndex(format!(
            "m = {m} out of range for j = {j}"
        )));
    }
    Ok(())
}

/// `|D_j|`: `2^j` positions for `j >= 0`, one for `j = -1`.
pub fn positions(j: i32) -> u64 {
    1u64 << j.max(0)
}

impl HaarIndex {
    pub fn new(j1: i32, j2: i32, m1: u64, m2: u64) -> Result<Self> {
        check_axis(j1, m1)?;
        check_axis(j2, m2)?;
        Ok(HaarIndex { j1, j2, m1, m2 })
    }
}

impl fmt::Display for HaarIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(({}, {}), ({}, {}))",
            self.j1, self.j2, self.m1, self.m2
        )
    }
}

fn eval_axis(j: i32, m: u64, t: &Dyadic) -> i32 {
    if j == -1 {
        return 1;
    }
    let scaled = t.mul_pow2(i64::from(j) + 1);
    let lo = Dyadic::from_int(2 * i128::from(m));
    let mid = &lo + &Dyadic::one();
    let hi = &mid + &Dyadic::one();
    if scaled < lo || scaled >= hi {
        0
    } else if scaled < mid {
        1
    } else {
        -1
    }
}

/// `h_{j,m}(t)`, defined on `[0, 1)^2`.
pub fn haar_eval(idx: &HaarIndex, t: &Point) -> Result<i32> {
    let inside = |v: &Dyadic| *v >= Dyadic::zero() && *v < Dyadic::one();
    if !inside(&t.x) || !inside(&t.y) {
        return Err(Error::OutsideHaarDomain(t.x.to_string(), t.y.to_string()));
    }
    Ok(eval_axis(idx.j1, idx.m1, &t.x) * eval_axis(idx.j2, idx.m2, &t.y))
}

/// Haar coefficient of the volume `t1 · t2`.
pub fn mu_volume(idx: &HaarIndex) -> Dyadic {
    volume_at_level(idx.j1, idx.j2)
}

/// The volume coefficient depends only on the level.
pub fn volume_at_level(j1: i32, j2: i32) -> Dyadic {
    match (j1, j2) {
        (-1, -1) => Dyadic::new(1, 2),
        (-1, k) | (k, -1) => -Dyadic::pow2(-(2 * i64::from(k) + 3)),
        (a, b) => Dyadic::pow2(-2 * (i64::from(a) + i64::from(b) + 2)),
    }
}

fn strictly_inside(j: i32, m: u64, z: &Dyadic) -> bool {
    let scaled = z.mul_pow2(i64::from(j));
    scaled > Dyadic::from_int(i128::from(m)) && scaled < Dyadic::from_int(i128::from(m) + 1)
}

/// `∫_z^1 h_{j,m}(t) dt`.
///
/// For `j = -1` this is `1 - z` for every `z`, boundary included; for
/// `j >= 0` it vanishes unless `z` is strictly inside `I_{j,m}`.
pub fn axis_factor(j: i32, m: u64, z: &Dyadic) -> Dyadic {
    if j == -1 {
        return Dyadic::one() - z;
    }
    if !strictly_inside(j, m, z) {
        return Dyadic::zero();
    }
    let j = i64::from(j);
    let centre = Dyadic::from_int(2 * i128::from(m) + 1);
    let tent = Dyadic::one() - (centre - z.mul_pow2(j + 1)).abs();
    -tent.div_pow2(j + 1)
}

/// Haar coefficient of `t ↦ 1_{[0,t)}(z)`.
pub fn mu_point(idx: &HaarIndex, z: &Point) -> Dyadic {
    let a = axis_factor(idx.j1, idx.m1, &z.x);
    if a.is_zero() {
        return a;
    }
    a * axis_factor(idx.j2, idx.m2, &z.y)
}

/// Whether grid coordinate `k / 2^res` is strictly inside `I_{j,m}`.
fn grid_inside(k: u64, res: u32, j: i32, m: u64) -> bool {
    if j < 0 {
        return true;
    }
    let t = u128::from(k) << j;
    let lo = u128::from(m) << res;
    let hi = (u128::from(m) + 1) << res;
    t > lo && t < hi
}

/// Haar coefficient of the local discrepancy
/// `D_P(t) = (1/N) Σ_z 1_{[0,t)}(z) - t1 t2`.
pub fn mu_discrepancy(set: &PointMultiset, idx: &HaarIndex) -> Result<Dyadic> {
    let inv_n = set.inv_cardinality()?;
    let res = set.resolution();
    let mut sum = Dyadic::zero();
    for (i, &(a, b)) in set.grid().iter().enumerate() {
        // axis_factor is zero off the interior; skip those points cheaply
        if !grid_inside(a, res, idx.j1, idx.m1) || !grid_inside(b, res, idx.j2, idx.m2) {
            continue;
        }
        sum += mu_point(idx, &set.point(i));
    }
    Ok(sum * inv_n - mu_volume(idx))
}

/// All coefficients of one level `(j1, j2)`.
///
/// Boxes listed in `occupied` are those receiving a nonzero counting
/// contribution; every other box has the common value `empty_value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelCoefficients {
    pub j1: i32,
    pub j2: i32,
    /// `(m1, m2, μ)` sorted by `(m1, m2)`.
    pub occupied: Vec<(u64, u64, Dyadic)>,
    /// `-mu_volume(j)`.
    pub empty_value: Dyadic,
}

impl LevelCoefficients {
    pub fn get(&self, m1: u64, m2: u64) -> Dyadic {
        match self
            .occupied
            .binary_search_by(|(a, b, _)| (*a, *b).cmp(&(m1, m2)))
        {
            Ok(i) => self.occupied[i].2.clone(),
            Err(_) => self.empty_value.clone(),
        }
    }

    /// `log2 |D_j|`.
    pub fn log2_boxes(&self) -> u32 {
        (self.j1.max(0) + self.j2.max(0)) as u32
    }

    /// Number of boxes carrying `empty_value`, as a float (may be huge).
    pub fn empty_count(&self) -> f64 {
        2f64.powi(self.log2_boxes() as i32) - self.occupied.len() as f64
    }
}

/// Per-axis integer counting factor: `(box index, numerator)` where the
/// factor is `numerator · 2^-(res + j + 1)` (or `2^-res` for `j = -1`).
fn axis_numerator(k: u64, res: u32, j: i32) -> Option<(u64, i128)> {
    let one = 1u64 << res;
    if j < 0 {
        return (k < one).then(|| (0, i128::from(one - k)));
    }
    if j as u32 >= res {
        return None;
    }
    let t = u128::from(k) << j;
    let m = (t >> res) as u64;
    let r = (t & u128::from(one - 1)) as u64;
    if r == 0 || m >= 1u64 << j {
        return None;
    }
    let dist = (2 * r).abs_diff(one);
    Some((m, -i128::from(one - dist)))
}

fn axis_exponent(res: u32, j: i32) -> i64 {
    i64::from(res) + if j < 0 { 0 } else { i64::from(j) + 1 }
}

/// Every coefficient at level `(j1, j2)`, touching each point once.
pub fn mu_all_at_level(set: &PointMultiset, j1: i32, j2: i32) -> Result<LevelCoefficients> {
    check_axis(j1, 0)?;
    check_axis(j2, 0)?;
    let log2_n = set.log2_cardinality()?;
    let res = set.resolution();
    let mut hits: Vec<(u64, u64, i128)> = set
        .grid()
        .iter()
        .filter_map(|&(a, b)| {
            let (m1, f1) = axis_numerator(a, res, j1)?;
            let (m2, f2) = axis_numerator(b, res, j2)?;
            Some((m1, m2, f1 * f2))
        })
        .collect();
    hits.sort_unstable_by_key(|&(m1, m2, _)| (m1, m2));
    let exponent = axis_exponent(res, j1) + axis_exponent(res, j2) + i64::from(log2_n);
    let volume = volume_at_level(j1, j2);
    let mut occupied: Vec<(u64, u64, Dyadic)> = Vec::new();
    let mut i = 0;
    while i < hits.len() {
        let (m1, m2, _) = hits[i];
        let mut sum = 0i128;
        while i < hits.len() && (hits[i].0, hits[i].1) == (m1, m2) {
            sum += hits[i].2;
            i += 1;
        }
        occupied.push((m1, m2, Dyadic::new(sum, exponent) - &volume));
    }
    Ok(LevelCoefficients {
        j1,
        j2,
        occupied,
        empty_value: -volume,
    })
}

/// What the symmetrized-set closed form says about one coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoefficientPrediction {
    ExactValue(Dyadic),
    ExactAbs(Dyadic),
    AbsUpperBound(Dyadic),
}

impl CoefficientPrediction {
    pub fn admits(&self, value: &Dyadic) -> bool {
        match self {
            CoefficientPrediction::ExactValue(v) => value == v,
            CoefficientPrediction::ExactAbs(v) => value.abs() == *v,
            CoefficientPrediction::AbsUpperBound(v) => value.abs() <= *v,
        }
    }
}

/// The six level regimes of the symmetrized-set coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymmetrizedCase {
    /// both levels >= 0, `j1 + j2 < n - 1`
    Coarse,
    /// both levels in `[0, n]`, `j1 + j2 >= n - 1`, neither equal to `n`
    Transitional,
    /// some level >= n, both >= 0
    Fine,
    /// one level -1, the other `k < n`
    EdgeCoarse,
    /// one level -1, the other `k >= n`
    EdgeFine,
    /// `(-1, -1)`
    Mean,
}

impl SymmetrizedCase {
    pub fn of(n: u32, j1: i32, j2: i32) -> Self {
        let n = n as i32;
        match (j1, j2) {
            (-1, -1) => SymmetrizedCase::Mean,
            (-1, k) | (k, -1) => {
                if k < n {
                    SymmetrizedCase::EdgeCoarse
                } else {
                    SymmetrizedCase::EdgeFine
                }
            }
            _ if j1 >= n || j2 >= n => SymmetrizedCase::Fine,
            _ if j1 + j2 < n - 1 => SymmetrizedCase::Coarse,
            _ => SymmetrizedCase::Transitional,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SymmetrizedCase::Coarse => "i",
            SymmetrizedCase::Transitional => "ii",
            SymmetrizedCase::Fine => "iii",
            SymmetrizedCase::EdgeCoarse => "iv",
            SymmetrizedCase::EdgeFine => "v",
            SymmetrizedCase::Mean => "vi",
        }
    }
}

/// Predicted coefficient of the local discrepancy of the symmetrized set
/// built from any `R_n`. At `j_i = n` the exact fine-level value is used.
pub fn predict_symmetrized(n: u32, idx: &HaarIndex) -> CoefficientPrediction {
    let (j1, j2) = (i64::from(idx.j1), i64::from(idx.j2));
    let n64 = i64::from(n);
    match SymmetrizedCase::of(n, idx.j1, idx.j2) {
        SymmetrizedCase::Coarse => CoefficientPrediction::ExactAbs(Dyadic::pow2(-2 * (n64 + 1))),
        SymmetrizedCase::Transitional => {
            CoefficientPrediction::AbsUpperBound(Dyadic::pow2(-(n64 + j1 + j2)))
        }
        SymmetrizedCase::Fine => CoefficientPrediction::ExactAbs(Dyadic::pow2(-2 * (j1 + j2 + 2))),
        SymmetrizedCase::EdgeCoarse | SymmetrizedCase::Mean => {
            CoefficientPrediction::ExactValue(Dyadic::zero())
        }
        SymmetrizedCase::EdgeFine => {
            let k = j1.max(j2);
            CoefficientPrediction::ExactAbs(Dyadic::pow2(-(2 * k + 3)))
        }
    }
}

/// Closed-form coefficients of the Davenport set `R_n ∪ R_{n,1}` at levels
/// `(-1, -1)` and `(-1, k)` with `k < n`.
pub fn predict_davenport(sigma: &SignPattern, idx: &HaarIndex) -> Result<CoefficientPrediction> {
    let n = sigma.n() as i64;
    match (idx.j1, idx.j2) {
        (-1, -1) => Ok(CoefficientPrediction::ExactValue(Dyadic::pow2(-(n + 2)))),
        (-1, k) if k >= 0 && i64::from(k) < n => {
            let k = i64::from(k);
            let t_k = if sigma.is_flipped(k as usize + 1) {
                -1
            } else {
                1
            };
            let value = -Dyadic::pow2(-(n + 2 * k + 3)) + Dyadic::new(t_k, 2 * n + 2);
            Ok(CoefficientPrediction::ExactValue(value))
        }
        _ => Err(Error::UncoveredShape(idx.to_string())),
    }
}

/// `T_{j2} T_{n-j1-1}` with `T_k = -1` iff digit `k + 1` is flipped.
///
/// This is the sign of the second term of the product counting sum
/// `2^{n-j1-j2-2} ± 2^{j1+j2-n}` of `R_n` (for `j1 + j2 < n - 1`), and the
/// sign of the symmetrized-set coefficient at the same coarse level.
pub fn coarse_sign(sigma: &SignPattern, j1: i32, j2: i32) -> Result<i32> {
    let n = sigma.n() as i32;
    if j1 < 0 || j2 < 0 || j1 + j2 >= n - 1 {
        return Err(Error::InvalidIndex(format!(
            "coarse levels need 0 <= j1, j2 and j1 + j2 < n - 1, got ({j1}, {j2}) at n = {n}"
        )));
    }
    let t = |k: i32| {
        if sigma.is_flipped(k as usize + 1) {
            -1
        } else {
            1
        }
    };
    Ok(t(j2) * t(n - j1 - 1))
}

/// The three counting sums over the dyadic box `I_{j,m}` used for `R_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingSums {
    pub single_x: Dyadic,
    pub single_y: Dyadic,
    pub product: Dyadic,
}

fn in_half_open(j: i32, m: u64, z: &Dyadic) -> bool {
    let scaled = z.mul_pow2(i64::from(j));
    scaled >= Dyadic::from_int(i128::from(m)) && scaled < Dyadic::from_int(i128::from(m) + 1)
}

fn tent(j: i32, m: u64, z: &Dyadic) -> Dyadic {
    let centre = Dyadic::from_int(2 * i128::from(m) + 1);
    Dyadic::one() - (centre - z.mul_pow2(i64::from(j) + 1)).abs()
}

/// `Σ (1 - |2m1 + 1 - 2^(j1+1) z1|)`, the same in `z2`, and the sum of their
/// products, over the points of the half-open box `I_{(j1,j2),(m1,m2)}`.
///
/// Each tent vanishes on the boundary of its own interval, so the product
/// sum is the same over the open box. The single sums are not: a point on
/// the lower edge of the other axis still carries its tent value.
pub fn lemma34_sums(set: &PointMultiset, idx: &HaarIndex) -> Result<CountingSums> {
    if idx.j1 < 0 || idx.j2 < 0 {
        return Err(Error::InvalidIndex(format!(
            "{idx}: counting sums need j >= 0"
        )));
    }
    let mut sums = CountingSums {
        single_x: Dyadic::zero(),
        single_y: Dyadic::zero(),
        product: Dyadic::zero(),
    };
    for z in set.points() {
        if !in_half_open(idx.j1, idx.m1, &z.x) || !in_half_open(idx.j2, idx.m2, &z.y) {
            continue;
        }
        let a = tent(idx.j1, idx.m1, &z.x);
        let b = tent(idx.j2, idx.m2, &z.y);
        sums.product += &a * &b;
        sums.single_x += a;
        sums.single_y += b;
    }
    Ok(sums)
}

/// Half-open box index and tent numerator (over `2^res`) of one coordinate.
fn axis_tent(k: u64, res: u32, j: i32) -> Option<(u64, i128)> {
    let one = 1u64 << res;
    if k >= one {
        return None;
    }
    let t = u128::from(k) << j;
    let m = (t >> res) as u64;
    let r = (t & u128::from(one - 1)) as u64;
    let dist = (2 * r).abs_diff(one);
    Some((m, i128::from(one - dist)))
}

/// [`lemma34_sums`] for every box of a level, as a dense row-major vector
/// indexed by `m1 · 2^j2 + m2`.
pub fn lemma34_level(set: &PointMultiset, j1: i32, j2: i32) -> Result<Vec<CountingSums>> {
    if j1 < 0 || j2 < 0 || j1 + j2 > 30 {
        return Err(Error::InvalidIndex(format!(
            "dense counting sums need 0 <= j1, j2 and j1 + j2 <= 30, got ({j1}, {j2})"
        )));
    }
    let res = set.resolution();
    let mut acc = vec![(0i128, 0i128, 0i128); 1usize << (j1 + j2)];
    for &(a, b) in set.grid() {
        let (Some((m1, f1)), Some((m2, f2))) = (axis_tent(a, res, j1), axis_tent(b, res, j2))
        else {
            continue;
        };
        let slot = &mut acc[((m1 << j2) | m2) as usize];
        slot.0 += f1;
        slot.1 += f2;
        slot.2 += f1 * f2;
    }
    let e = i64::from(res);
    Ok(acc
        .into_iter()
        .map(|(x, y, p)| CountingSums {
            single_x: Dyadic::new(x, e),
            single_y: Dyadic::new(y, e),
            product: Dyadic::new(p, 2 * e),
        })
        .collect())
}

/// `H(u) = ∫_0^u h_{j,m}(t) dt` as an explicit piecewise-linear function.
fn antiderivative(j: i32, m: u64, u: &Dyadic) -> Dyadic {
    if j == -1 {
        return u.clone();
    }
    let j = i64::from(j);
    let m = i128::from(m);
    let left = Dyadic::new(m, j);
    let middle = Dyadic::new(2 * m + 1, j + 1);
    let right = Dyadic::new(m + 1, j);
    if *u <= left || *u >= right {
        Dyadic::zero()
    } else if *u <= middle {
        u - &left
    } else {
        &right - u
    }
}

/// Independent recomputation of [`mu_discrepancy`]: each axis factor is
/// `H(1) - H(z)` from the piecewise antiderivative, with no interior test.
pub fn oracle_mu(set: &PointMultiset, idx: &HaarIndex) -> Result<Dyadic> {
    let inv_n = set.inv_cardinality()?;
    let one = Dyadic::one();
    let h1_end = antiderivative(idx.j1, idx.m1, &one);
    let h2_end = antiderivative(idx.j2, idx.m2, &one);
    let mut sum = Dyadic::zero();
    for z in set.points() {
        let f1 = &h1_end - antiderivative(idx.j1, idx.m1, &z.x);
        if f1.is_zero() {
            continue;
        }
        let f2 = &h2_end - antiderivative(idx.j2, idx.m2, &z.y);
        sum += f1 * f2;
    }
    Ok(sum * inv_n - mu_volume(idx))
}
