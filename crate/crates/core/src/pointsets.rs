//! Hammersley-type point sets `R_n`, their reflections and symmetrizations.
//!
//! Points live on the dyadic grid `2^-resolution · Z`, so a multiset is
//! stored as integer numerators together with the grid resolution. The
//! ordering of entries is part of the contract: digit vectors in increasing
//! binary value, then the reflections in the order `R_n`, `R_{n,1}` (y),
//! `R_{n,2}` (x), `R_{n,3}` (both).

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Finest supported grid. Keeps products of two axis numerators summed over
/// a whole set inside `i128`.
pub const MAX_RESOLUTION: u32 = 40;

/// Per-digit choice between `s_i = t_i` and `s_i = 1 - t_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignPattern {
    flips: Vec<bool>,
}

impl SignPattern {
    /// `flips[i]` is true when digit `i + 1` uses `s = 1 - t`.
    pub fn new(flips: Vec<bool>) -> Result<Self> {
        if flips.is_empty() {
            return Err(Error::Domain("sign pattern needs n >= 1".into()));
        }
        if flips.len() > MAX_RESOLUTION as usize {
            return Err(Error::ResolutionTooFine(flips.len() as u32));
        }
        Ok(SignPattern { flips })
    }

    /// The classical Hammersley set.
    pub fn identity(n: usize) -> Self {
        SignPattern {
            flips: vec![false; n],
        }
    }

    pub fn all_flip(n: usize) -> Self {
        SignPattern {
            flips: vec![true; n],
        }
    }

    /// Flips every even digit position `i = 2, 4, ...`.
    pub fn alternating(n: usize) -> Self {
        SignPattern {
            flips: (0..n).map(|i| i % 2 == 1).collect(),
        }
    }

    pub fn seeded_random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SignPattern {
            flips: (0..n).map(|_| rng.gen::<bool>()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.flips.len()
    }

    pub fn flips(&self) -> &[bool] {
        &self.flips
    }

    /// Whether digit `i` (1-based) is flipped.
    pub fn is_flipped(&self, i: usize) -> bool {
        self.flips[i - 1]
    }
}

/// Named sign-pattern families used by sweeps and verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SigmaPreset {
    Identity,
    AllFlip,
    Alternating,
    Random(u64),
}

impl SigmaPreset {
    /// The four presets every verification suite ranges over.
    pub const STANDARD: [SigmaPreset; 4] = [
        SigmaPreset::Identity,
        SigmaPreset::AllFlip,
        SigmaPreset::Alternating,
        SigmaPreset::Random(7),
    ];

    pub fn pattern(&self, n: usize) -> SignPattern {
        match *self {
            SigmaPreset::Identity => SignPattern::identity(n),
            SigmaPreset::AllFlip => SignPattern::all_flip(n),
            SigmaPreset::Alternating => SignPattern::alternating(n),
            SigmaPreset::Random(seed) => SignPattern::seeded_random(n, seed),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SigmaPreset::Identity => "identity",
            SigmaPreset::AllFlip => "all-flip",
            SigmaPreset::Alternating => "alternating",
            SigmaPreset::Random(_) => "random",
        }
    }
}

impl fmt::Display for SigmaPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaPreset::Random(seed) => write!(f, "random({seed})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: Dyadic,
    pub y: Dyadic,
}

impl Point {
    pub fn new(x: Dyadic, y: Dyadic) -> Self {
        Point { x, y }
    }

    /// `(mx / 2^e, my / 2^e)`.
    pub fn dyadic(mx: i128, my: i128, e: i64) -> Self {
        Point {
            x: Dyadic::new(mx, e),
            y: Dyadic::new(my, e),
        }
    }
}

/// A finite multiset of points in `[0,1]^2` on a dyadic grid.
///
/// Entry `(a, b)` of [`grid`](Self::grid) is the point `(a, b) / 2^resolution`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointMultiset {
    resolution: u32,
    grid: Vec<(u64, u64)>,
}

impl PointMultiset {
    pub fn empty(resolution: u32) -> Self {
        PointMultiset {
            resolution,
            grid: Vec::new(),
        }
    }

    pub fn from_grid(resolution: u32, grid: Vec<(u64, u64)>) -> Result<Self> {
        if resolution > MAX_RESOLUTION {
            return Err(Error::ResolutionTooFine(resolution));
        }
        let one = 1u64 << resolution;
        if let Some(&(a, b)) = grid.iter().find(|&&(a, b)| a > one || b > one) {
            let bad = if a > one { a } else { b };
            return Err(Error::CoordinateOutOfRange(
                Dyadic::new(i128::from(bad), i64::from(resolution)).to_string(),
            ));
        }
        Ok(PointMultiset { resolution, grid })
    }

    /// Builds a multiset at the coarsest grid holding every coordinate.
    pub fn from_points<I: IntoIterator<Item = Point>>(points: I) -> Result<Self> {
        let points: Vec<Point> = points.into_iter().collect();
        let resolution = points
            .iter()
            .flat_map(|p| [p.x.exponent(), p.y.exponent()])
            .max()
            .unwrap_or(0)
            .max(0);
        if resolution > i64::from(MAX_RESOLUTION) {
            return Err(Error::ResolutionTooFine(resolution as u32));
        }
        Self::with_resolution(points, resolution as u32)
    }

    /// Builds a multiset on the grid of the given resolution.
    pub fn with_resolution<I: IntoIterator<Item = Point>>(
        points: I,
        resolution: u32,
    ) -> Result<Self> {
        if resolution > MAX_RESOLUTION {
            return Err(Error::ResolutionTooFine(resolution));
        }
        let mut grid = Vec::new();
        for p in points {
            let a = grid_coordinate(&p.x, resolution)?;
            let b = grid_coordinate(&p.y, resolution)?;
            grid.push((a, b));
        }
        Ok(PointMultiset { resolution, grid })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn grid(&self) -> &[(u64, u64)] {
        &self.grid
    }

    pub fn point(&self, i: usize) -> Point {
        let (a, b) = self.grid[i];
        Point::dyadic(i128::from(a), i128::from(b), i64::from(self.resolution))
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.grid.len()).map(|i| self.point(i))
    }

    /// `1/N` exactly; needs `N` to be a power of two.
    pub fn inv_cardinality(&self) -> Result<Dyadic> {
        let n = self.len();
        if n == 0 {
            return Err(Error::EmptySet);
        }
        if !n.is_power_of_two() {
            return Err(Error::NonDyadicCardinality(n));
        }
        Ok(Dyadic::pow2(-i64::from(n.trailing_zeros())))
    }

    /// `log2 N` for a power-of-two cardinality.
    pub fn log2_cardinality(&self) -> Result<u32> {
        self.inv_cardinality()?;
        Ok(self.len().trailing_zeros())
    }

    /// Re-expresses the multiset on a finer grid.
    pub fn refine(&self, resolution: u32) -> Result<Self> {
        if resolution < self.resolution {
            return Err(Error::NotOnGrid(format!(
                "cannot coarsen resolution {} to {resolution}",
                self.resolution
            )));
        }
        if resolution > MAX_RESOLUTION {
            return Err(Error::ResolutionTooFine(resolution));
        }
        let s = resolution - self.resolution;
        Ok(PointMultiset {
            resolution,
            grid: self.grid.iter().map(|&(a, b)| (a << s, b << s)).collect(),
        })
    }

    /// Multiset union, keeping `self`'s entries first.
    pub fn union(&self, other: &PointMultiset) -> PointMultiset {
        let res = self.resolution.max(other.resolution);
        let mut left = self.refine(res).expect("within range");
        let right = other.refine(res).expect("within range");
        left.grid.extend(right.grid);
        left
    }

    /// Equality as multisets, ignoring entry order and grid resolution.
    pub fn same_multiset(&self, other: &PointMultiset) -> bool {
        let res = self.resolution.max(other.resolution);
        let mut a = self.refine(res).expect("within range").grid;
        let mut b = other.refine(res).expect("within range").grid;
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

fn grid_coordinate(v: &Dyadic, resolution: u32) -> Result<u64> {
    if *v < Dyadic::zero() || *v > Dyadic::one() {
        return Err(Error::CoordinateOutOfRange(v.to_string()));
    }
    let k = v
        .scaled_integer(i64::from(resolution))
        .ok_or_else(|| Error::NotOnGrid(format!("{v} at resolution {resolution}")))?;
    Ok(u64::try_from(k).expect("coordinate in [0, 1]"))
}

/// The `2^n` points `(t_n/2 + ... + t_1/2^n, s_1/2 + ... + s_n/2^n)`.
pub fn hammersley_type(n: usize, sigma: &SignPattern) -> Result<PointMultiset> {
    if sigma.n() != n {
        return Err(Error::PatternLength {
            expected: n,
            got: sigma.n(),
        });
    }
    if n == 0 || n > MAX_RESOLUTION as usize {
        return Err(Error::Domain(format!("n = {n} out of range")));
    }
    // digit t_i is bit i-1 of the counter; s_i carries weight 2^(n-i) in y
    let mask: u64 = sigma
        .flips()
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(i, _)| 1u64 << (n - 1 - i))
        .sum();
    let grid = (0..1u64 << n)
        .map(|counter| {
            let y = counter.reverse_bits() >> (64 - n);
            (counter, y ^ mask)
        })
        .collect();
    Ok(PointMultiset {
        resolution: n as u32,
        grid,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    /// `(x, y) -> (1 - x, y)`
    X,
    /// `(x, y) -> (x, 1 - y)`
    Y,
    /// `(x, y) -> (1 - x, 1 - y)`
    XY,
}

pub fn reflect(set: &PointMultiset, axis: Axis) -> PointMultiset {
    let one = 1u64 << set.resolution;
    let grid = set
        .grid
        .iter()
        .map(|&(a, b)| match axis {
            Axis::X => (one - a, b),
            Axis::Y => (a, one - b),
            Axis::XY => (one - a, one - b),
        })
        .collect();
    PointMultiset {
        resolution: set.resolution,
        grid,
    }
}

/// `P ∪ P_y ∪ P_x ∪ P_xy`, with multiplicity.
pub fn symmetrize_full(set: &PointMultiset) -> PointMultiset {
    let mut out = set.clone();
    for axis in [Axis::Y, Axis::X, Axis::XY] {
        out.grid.extend(reflect(set, axis).grid);
    }
    out
}

/// Davenport's symmetrization `P ∪ P_y`.
pub fn symmetrize_davenport(set: &PointMultiset) -> PointMultiset {
    let mut out = set.clone();
    out.grid.extend(reflect(set, Axis::Y).grid);
    out
}

/// Whether every dyadic box of area `2^-n` holds exactly one point.
///
/// Boxes are half-open, so a coordinate equal to 1 lies in no box.
pub fn is_net(set: &PointMultiset, n: u32) -> Result<bool> {
    let expected = 1usize
        .checked_shl(n)
        .filter(|_| n < usize::BITS)
        .ok_or_else(|| Error::Domain(format!("n = {n} too large")))?;
    if set.len() != expected {
        return Err(Error::Cardinality {
            expected,
            got: set.len(),
        });
    }
    let res = set.resolution;
    let one = 1u64 << res;
    let cell = |k: u64, j: u32| -> u64 {
        if j <= res {
            k >> (res - j)
        } else {
            k << (j - res)
        }
    };
    for j1 in 0..=n {
        let j2 = n - j1;
        let mut seen = vec![false; expected];
        for &(a, b) in &set.grid {
            if a >= one || b >= one {
                return Ok(false);
            }
            let idx = ((cell(a, j1) << j2) | cell(b, j2)) as usize;
            if std::mem::replace(&mut seen[idx], true) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The three point-set families studied here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `R_n` itself, `2^n` points.
    Hammersley,
    /// `R_n ∪ R_{n,1}`, `2^(n+1)` points.
    Davenport,
    /// `R_n` with all three reflections, `2^(n+2)` points.
    Symmetrized,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Hammersley, Family::Davenport, Family::Symmetrized];

    pub fn build(&self, sigma: &SignPattern) -> PointMultiset {
        let base = hammersley_type(sigma.n(), sigma).expect("pattern length matches n");
        match self {
            Family::Hammersley => base,
            Family::Davenport => symmetrize_davenport(&base),
            Family::Symmetrized => symmetrize_full(&base),
        }
    }

    /// `log2` of the cardinality for parameter `n`.
    pub fn log2_cardinality(&self, n: usize) -> usize {
        match self {
            Family::Hammersley => n,
            Family::Davenport => n + 1,
            Family::Symmetrized => n + 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Hammersley => "hammersley",
            Family::Davenport => "davenport",
            Family::Symmetrized => "symmetrized",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
