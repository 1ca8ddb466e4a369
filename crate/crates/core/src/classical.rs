//! The local discrepancy `D_P(t) = #{z in P : z < t}/N - t1 t2` and its
//! classical norms: exact `L_2` (Warnock), exact even `L_p`, exact star
//! discrepancy, and a midpoint estimate for other `p`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::besov::CompensatedSum;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::pointsets::{Point, PointMultiset};

/// Exact `D_P(t)` with the half-open box `[0, t)`.
pub fn local_discrepancy(set: &PointMultiset, t: &Point) -> Result<Dyadic> {
    let inv_n = set.inv_cardinality()?;
    for c in [&t.x, &t.y] {
        if *c < Dyadic::zero() || *c > Dyadic::one() {
            return Err(Error::CoordinateOutOfRange(c.to_string()));
        }
    }
    let count = set.points().filter(|z| z.x < t.x && z.y < t.y).count();
    Ok(Dyadic::from_int(count as i128) * inv_n - &t.x * &t.y)
}

/// Cell decomposition of `[0,1]^2` by every point coordinate.
///
/// Breaks are grid numerators at the set's resolution and always include
/// `0` and `2^resolution`. On the open cell `(x_k, x_{k+1}) × (y_l, y_{l+1})`
/// the counting function equals `#{z1 <= x_k, z2 <= y_l}`.
#[derive(Clone, Debug)]
pub struct CellGrid {
    pub resolution: u32,
    pub x_breaks: Vec<u64>,
    pub y_breaks: Vec<u64>,
    /// Point indices into `y_breaks`, grouped by the `x_breaks` column.
    columns: Vec<Vec<usize>>,
    pub n_points: usize,
}

impl CellGrid {
    pub fn new(set: &PointMultiset) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let one = 1u64 << set.resolution();
        let breaks = |coord: fn(&(u64, u64)) -> u64| {
            let mut b: Vec<u64> = set.grid().iter().map(coord).chain([0, one]).collect();
            b.sort_unstable();
            b.dedup();
            b
        };
        let x_breaks = breaks(|p| p.0);
        let y_breaks = breaks(|p| p.1);
        let mut columns = vec![Vec::new(); x_breaks.len()];
        for &(a, b) in set.grid() {
            let k = x_breaks.binary_search(&a).expect("break present");
            let l = y_breaks.binary_search(&b).expect("break present");
            columns[k].push(l);
        }
        Ok(CellGrid {
            resolution: set.resolution(),
            x_breaks,
            y_breaks,
            columns,
            n_points: set.len(),
        })
    }

    pub fn cell_count(&self) -> usize {
        (self.x_breaks.len() - 1) * (self.y_breaks.len() - 1)
    }

    /// Calls `f(k, counts)` for each column `k` in order, where `counts[l]`
    /// is the counting function on cell `(k, l)`.
    pub fn for_each_column(&self, mut f: impl FnMut(usize, &[u64])) {
        let mut hist = vec![0u64; self.y_breaks.len()];
        let mut counts = vec![0u64; self.y_breaks.len() - 1];
        for k in 0..self.x_breaks.len() - 1 {
            for &l in &self.columns[k] {
                hist[l] += 1;
            }
            let mut run = 0;
            for (l, c) in counts.iter_mut().enumerate() {
                run += hist[l];
                *c = run;
            }
            f(k, &counts);
        }
    }
}

/// Integer accumulator that spills to `BigInt` on overflow.
#[derive(Clone, Debug, Default)]
struct ExactSum {
    small: i128,
    big: Option<BigInt>,
}

impl ExactSum {
    fn add_small(&mut self, v: i128) {
        match self.small.checked_add(v) {
            Some(s) => self.small = s,
            None => self.add_big(BigInt::from(v)),
        }
    }

    fn add_big(&mut self, v: BigInt) {
        let big = self.big.get_or_insert_with(BigInt::zero);
        *big += v;
    }

    /// Adds `c * a * b`.
    fn add_product(&mut self, c: i128, a: i128, b: i128) {
        match c.checked_mul(a).and_then(|ca| ca.checked_mul(b)) {
            Some(v) => self.add_small(v),
            None => self.add_big(BigInt::from(c) * a * b),
        }
    }

    fn value(self) -> BigInt {
        self.big.unwrap_or_default() + self.small
    }
}

/// Fenwick tree of `(count, sum)` over value ranks.
struct Fenwick {
    count: Vec<u64>,
    sum: Vec<u128>,
}

impl Fenwick {
    fn new(len: usize) -> Self {
        Fenwick {
            count: vec![0; len + 1],
            sum: vec![0; len + 1],
        }
    }

    fn insert(&mut self, rank: usize, v: u64) {
        let mut i = rank + 1;
        while i < self.count.len() {
            self.count[i] += 1;
            self.sum[i] += u128::from(v);
            i += i & i.wrapping_neg();
        }
    }

    /// `(count, sum)` over ranks `0..=rank`.
    fn prefix(&self, rank: usize) -> (u64, u128) {
        let (mut c, mut s) = (0, 0);
        let mut i = rank + 1;
        while i > 0 {
            c += self.count[i];
            s += self.sum[i];
            i &= i - 1;
        }
        (c, s)
    }
}

/// `Σ_{z,z'} min(u, u') min(v, v')` over ordered pairs, in `O(N log N)`.
fn pair_min_sum(mut uv: Vec<(u64, u64)>) -> BigInt {
    uv.sort_unstable();
    let mut vs: Vec<u64> = uv.iter().map(|p| p.1).collect();
    vs.sort_unstable();
    vs.dedup();
    let mut tree = Fenwick::new(vs.len());
    let mut off_diagonal = BigInt::zero();
    let mut diagonal = BigInt::zero();
    for (inserted, &(u, v)) in (0u64..).zip(uv.iter().rev()) {
        let rank = vs.binary_search(&v).expect("value ranked");
        let (below, below_sum) = tree.prefix(rank);
        let inner = below_sum + u128::from(v) * u128::from(inserted - below);
        off_diagonal += BigInt::from(u) * inner;
        diagonal += BigInt::from(u) * v;
        tree.insert(rank, v);
    }
    diagonal + off_diagonal * 2
}

/// Exact `∫ D_P^2` via Warnock's formula
/// `1/9 - (2/N) Σ Π (1 - z_i^2)/2 + (1/N^2) Σ Σ Π (1 - max(z_i, z'_i))`.
pub fn l2_warnock(set: &PointMultiset) -> Result<BigRational> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let g = BigInt::one() << set.resolution();
    let g2 = &g * &g;
    let single: BigInt = set
        .grid()
        .iter()
        .map(|&(a, b)| {
            let a = BigInt::from(a);
            let b = BigInt::from(b);
            (&g2 - &a * &a) * (&g2 - &b * &b)
        })
        .sum();
    let one = 1u64 << set.resolution();
    let pairs = pair_min_sum(
        set.grid()
            .iter()
            .map(|&(a, b)| (one - a, one - b))
            .collect(),
    );
    let n = BigInt::from(set.len());
    let g4 = &g2 * &g2;
    let ninth = BigRational::new(BigInt::one(), BigInt::from(9));
    Ok(ninth - BigRational::new(single, &n * g4 * 2) + BigRational::new(pairs, &n * &n * g2))
}

fn binomial(n: u32, k: u32) -> i128 {
    (0..k).fold(1i128, |acc, i| acc * i128::from(n - i) / i128::from(i + 1))
}

/// Exact `∫ |D_P|^p` for even `p`.
///
/// On each cell `D = c - t1 t2` with constant `c`, so `(c - t1 t2)^p` expands
/// into monomials `t1^k t2^k` that integrate exactly.
pub fn lp_exact_even(set: &PointMultiset, p: u32) -> Result<BigRational> {
    if p == 0 || p % 2 == 1 {
        return Err(Error::OddExponent(p));
    }
    let cells = CellGrid::new(set)?;
    let powers = |breaks: &[u64]| -> Vec<Vec<i128>> {
        breaks
            .iter()
            .map(|&b| {
                let mut row = vec![1i128];
                for _ in 0..=p {
                    let last = *row.last().expect("nonempty");
                    row.push(last.checked_mul(i128::from(b)).unwrap_or(0));
                }
                row
            })
            .collect()
    };
    // fall back to big integers whenever b^{p+1} does not fit
    let fits = |breaks: &[u64]| {
        breaks.iter().all(|&b| {
            (u128::from(b).max(1))
                .checked_pow(p + 1)
                .is_some_and(|v| v < i128::MAX as u128 / 2)
        })
    };
    let small = fits(&cells.x_breaks) && fits(&cells.y_breaks);
    let xp = powers(&cells.x_breaks);
    let yp = powers(&cells.y_breaks);
    let diff = |tab: &[Vec<i128>], raw: &[u64], k: usize, e: usize| -> BigInt {
        if small {
            BigInt::from(tab[k + 1][e] - tab[k][e])
        } else {
            num_traits::pow(BigInt::from(raw[k + 1]), e) - num_traits::pow(BigInt::from(raw[k]), e)
        }
    };
    let c_pows = |c: u64| -> Vec<i128> {
        let mut v = vec![1i128];
        for _ in 0..p {
            let last = *v.last().expect("nonempty");
            v.push(last.saturating_mul(i128::from(c)));
        }
        v
    };
    let c_fits = u128::from(cells.n_points as u64)
        .checked_pow(p)
        .is_some_and(|v| v < i128::MAX as u128);

    // S_k = Σ_cells c^{p-k} X_k Y_k with X_k = x_{k+1}^{k+1} - x_k^{k+1}
    let mut sums: Vec<ExactSum> = vec![ExactSum::default(); p as usize + 1];
    let ydiffs: Vec<Vec<(BigInt, Option<i128>)>> = (0..cells.y_breaks.len() - 1)
        .map(|ly| {
            (0..=p as usize)
                .map(|k| {
                    let d = diff(&yp, &cells.y_breaks, ly, k + 1);
                    let small = d.to_i128();
                    (d, small)
                })
                .collect()
        })
        .collect();
    cells.for_each_column(|kx, counts| {
        let xd: Vec<BigInt> = (0..=p as usize)
            .map(|e| diff(&xp, &cells.x_breaks, kx, e + 1))
            .collect();
        let xs: Vec<Option<i128>> = xd.iter().map(|v| v.to_i128()).collect();
        for (ly, &c) in counts.iter().enumerate() {
            let cp = c_pows(c);
            for k in 0..=p as usize {
                let (y, y_small) = &ydiffs[ly][k];
                match (c_fits, xs[k], *y_small) {
                    (true, Some(x), Some(yv)) => sums[k].add_product(cp[p as usize - k], x, yv),
                    _ => sums[k]
                        .add_big(num_traits::pow(BigInt::from(c), p as usize - k) * &xd[k] * y),
                }
            }
        }
    });

    let n = BigInt::from(cells.n_points);
    let g = BigInt::one() << cells.resolution;
    let mut total = BigRational::zero();
    for (k, s) in sums.into_iter().enumerate() {
        let k32 = k as u32;
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let num = s.value() * binomial(p, k32) * sign;
        let den = num_traits::pow(n.clone(), (p - k32) as usize)
            * BigInt::from((k + 1) * (k + 1))
            * num_traits::pow(g.clone(), 2 * k + 2);
        total += BigRational::new(num, den);
    }
    Ok(total)
}

/// Exact `sup |D_P|` over the closed unit square.
///
/// On the closure of each cell `|c - t1 t2|` peaks at the lower-left or
/// upper-right corner; lines between cells take values of a neighbouring
/// cell, so the cell corners cover every one-sided limit.
pub fn star_discrepancy(set: &PointMultiset) -> Result<Dyadic> {
    let log2_n = set.log2_cardinality()?;
    let cells = CellGrid::new(set)?;
    let r = cells.resolution;
    // work in units of 2^{-(2r + log2 N)}
    let shift = 2 * r;
    if shift + log2_n > 125 {
        return Err(Error::ResolutionTooFine(r));
    }
    let mut best: i128 = 0;
    cells.for_each_column(|kx, counts| {
        let x0 = i128::from(cells.x_breaks[kx]);
        let x1 = i128::from(cells.x_breaks[kx + 1]);
        for (ly, &c) in counts.iter().enumerate() {
            let y0 = i128::from(cells.y_breaks[ly]);
            let y1 = i128::from(cells.y_breaks[ly + 1]);
            let counted = i128::from(c) << shift;
            let over = counted - ((x0 * y0) << log2_n);
            let under = ((x1 * y1) << log2_n) - counted;
            best = best.max(over).max(under);
        }
    });
    Ok(Dyadic::new(best, i64::from(shift + log2_n)))
}

/// A midpoint-rule value of `∫ |D_P|^p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpEstimate {
    pub value: f64,
    /// The rule uses `2^grid_log2` nodes per axis.
    pub grid_log2: u32,
}

/// Midpoint estimate of `∫ |D_P|^p` on the grid of mesh `2^{-(resolution+4)}`.
pub fn lp_estimate(set: &PointMultiset, p: f64) -> Result<LpEstimate> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::Domain(format!(
            "p = {p} must be positive and finite"
        )));
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let r = set.resolution();
    let grid_log2 = r + 4;
    if grid_log2 > 16 {
        return Err(Error::ResolutionTooFine(r));
    }
    let coarse = 1usize << r;
    let n = set.len() as f64;
    let h = (-f64::from(grid_log2)).exp2();
    // coarse column X holds nodes whose counting function is #{a <= X, b <= Y}
    let per_column: Vec<f64> = (0..coarse)
        .into_par_iter()
        .map(|col| {
            let mut hist = vec![0u64; coarse + 1];
            for &(a, b) in set.grid() {
                if a as usize <= col {
                    hist[b as usize] += 1;
                }
            }
            let mut acc = CompensatedSum::default();
            for sub_x in 0..16 {
                let t1 = ((col * 16 + sub_x) as f64 + 0.5) * h;
                let mut run = 0u64;
                for (row, &h_row) in hist.iter().enumerate().take(coarse) {
                    run += h_row;
                    let c = run as f64 / n;
                    for sub_y in 0..16 {
                        let t2 = ((row * 16 + sub_y) as f64 + 0.5) * h;
                        acc.add((c - t1 * t2).abs().powf(p));
                    }
                }
            }
            acc.value()
        })
        .collect();
    let mut total = CompensatedSum::default();
    for v in per_column {
        total.add(v);
    }
    Ok(LpEstimate {
        value: total.value() * h * h,
        grid_log2,
    })
}

/// `∫ |D_P|^p`: exact for even integer `p`, estimated otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum LpValue {
    Exact(BigRational),
    Estimate(LpEstimate),
}

impl LpValue {
    /// The `p`-th power integral as a float.
    pub fn integral(&self) -> f64 {
        match self {
            LpValue::Exact(v) => v.to_f64().unwrap_or(f64::NAN),
            LpValue::Estimate(e) => e.value,
        }
    }
}

pub fn lp_discrepancy(set: &PointMultiset, p: f64) -> Result<LpValue> {
    if p >= 2.0 && p.fract() == 0.0 && p % 2.0 == 0.0 && p <= 64.0 {
        lp_exact_even(set, p as u32).map(LpValue::Exact)
    } else {
        lp_estimate(set, p).map(LpValue::Estimate)
    }
}
