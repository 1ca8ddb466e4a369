//! Equal-weight cubature `Q_N(P, f) = (1/N) Σ f(z)` and error-rate tables.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::pointsets::{Family, PointMultiset, SigmaPreset};

/// Largest exponent of the built-in polynomial integrands.
pub const MAX_DEGREE: u32 = 8;

#[derive(Clone)]
enum Kind {
    /// `(1-x)^a (1-y)^b`
    ZeroBoundary(u32, u32),
    /// `x^a y^b`
    Monomial(u32, u32),
    Custom {
        f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        integral: f64,
    },
}

/// A function on `[0,1]^2` with a known integral.
#[derive(Clone)]
pub struct Integrand {
    name: String,
    kind: Kind,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .finish()
    }
}

impl Integrand {
    /// `(1-x)^a (1-y)^b`, which vanishes on the upper and right edges.
    pub fn zero_boundary(a: u32, b: u32) -> Result<Self> {
        check_degree(a, b)?;
        Ok(Integrand {
            name: format!("(1-x)^{a}(1-y)^{b}"),
            kind: Kind::ZeroBoundary(a, b),
        })
    }

    /// `x^a y^b`.
    pub fn monomial(a: u32, b: u32) -> Result<Self> {
        check_degree(a, b)?;
        Ok(Integrand {
            name: format!("x^{a}y^{b}"),
            kind: Kind::Monomial(a, b),
        })
    }

    /// Any float function; its integral must be supplied.
    pub fn custom(
        name: impl Into<String>,
        integral: f64,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Integrand {
            name: name.into(),
            kind: Kind::Custom {
                f: Arc::new(f),
                integral,
            },
        }
    }

    /// Parses `zb:a,b` or `mono:a,b`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("integrand '{spec}' (expected zb:a,b or mono:a,b)"));
        let (kind, degrees) = spec.split_once(':').ok_or_else(bad)?;
        let (a, b) = degrees.split_once(',').ok_or_else(bad)?;
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "zb" => Self::zero_boundary(a, b),
            "mono" => Self::monomial(a, b),
            _ => Err(bad()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            Kind::ZeroBoundary(a, b) => (1.0 - x).powi(*a as i32) * (1.0 - y).powi(*b as i32),
            Kind::Monomial(a, b) => x.powi(*a as i32) * y.powi(*b as i32),
            Kind::Custom { f, .. } => f(x, y),
        }
    }

    /// `1/((a+1)(b+1))` for the polynomial family.
    pub fn exact_integral(&self) -> Option<BigRational> {
        match self.kind {
            Kind::ZeroBoundary(a, b) | Kind::Monomial(a, b) => Some(BigRational::new(
                BigInt::from(1),
                BigInt::from((a + 1) * (b + 1)),
            )),
            Kind::Custom { .. } => None,
        }
    }

    pub fn integral(&self) -> f64 {
        match &self.kind {
            Kind::Custom { integral, .. } => *integral,
            _ => self
                .exact_integral()
                .and_then(|v| v.to_f64())
                .expect("rational integral"),
        }
    }
}

fn check_degree(a: u32, b: u32) -> Result<()> {
    if a > MAX_DEGREE || b > MAX_DEGREE {
        return Err(Error::Domain(format!(
            "degrees ({a}, {b}) exceed {MAX_DEGREE}"
        )));
    }
    Ok(())
}

/// A cubature value or error: exact for polynomial integrands.
#[derive(Clone, Debug, PartialEq)]
pub enum Value<T> {
    Exact(T),
    Approx(f64),
}

impl Value<Dyadic> {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(v) => v.to_f64().unwrap_or(f64::NAN),
            Value::Approx(v) => *v,
        }
    }
}

impl Value<BigRational> {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(v) => v.to_f64().unwrap_or(f64::NAN),
            Value::Approx(v) => *v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(v) => v.is_zero(),
            Value::Approx(v) => *v == 0.0,
        }
    }
}

fn pow(base: &Dyadic, e: u32) -> Dyadic {
    (0..e).fold(Dyadic::one(), |acc, _| acc * base)
}

/// `Q_N(P, f)`; exact dyadic for the polynomial family.
pub fn qmc_integrate(set: &PointMultiset, f: &Integrand) -> Result<Value<Dyadic>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    match f.kind {
        Kind::ZeroBoundary(a, b) | Kind::Monomial(a, b) => {
            let inv_n = set.inv_cardinality()?;
            let flip = matches!(f.kind, Kind::ZeroBoundary(..));
            let one = 1u64 << set.resolution();
            let e = i64::from(set.resolution());
            let sum: Dyadic = set
                .grid()
                .iter()
                .map(|&(gx, gy)| {
                    let (u, v) = if flip { (one - gx, one - gy) } else { (gx, gy) };
                    let u = Dyadic::new(i128::from(u), e);
                    let v = Dyadic::new(i128::from(v), e);
                    pow(&u, a) * pow(&v, b)
                })
                .sum();
            Ok(Value::Exact(sum * inv_n))
        }
        Kind::Custom { .. } => {
            let mut acc = crate::besov::CompensatedSum::default();
            for p in set.points() {
                let x = p.x.to_f64()?;
                let y = p.y.to_f64()?;
                acc.add(f.evaluate(x, y));
            }
            Ok(Value::Approx(acc.value() / set.len() as f64))
        }
    }
}

/// `|Q_N(P, f) - I(f)|`.
pub fn qmc_error(set: &PointMultiset, f: &Integrand) -> Result<Value<BigRational>> {
    let q = qmc_integrate(set, f)?;
    Ok(match (q, f.exact_integral()) {
        (Value::Exact(q), Some(i)) => Value::Exact((q.to_rational() - i).abs()),
        (q, _) => Value::Approx((q.to_f64() - f.integral()).abs()),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub n: usize,
    pub n_points: usize,
    pub error: Value<BigRational>,
}

/// One row per `n`, computed in parallel and returned in input order.
pub fn error_table(
    family: Family,
    preset: SigmaPreset,
    f: &Integrand,
    n_range: &[usize],
) -> Result<Vec<ErrorRow>> {
    if n_range.is_empty() {
        return Err(Error::Domain("empty n range".into()));
    }
    n_range
        .par_iter()
        .map(|&n| {
            let set = family.build(&preset.pattern(n));
            Ok(ErrorRow {
                n,
                n_points: set.len(),
                error: qmc_error(&set, f)?,
            })
        })
        .collect()
}

/// Outcome of fitting `log2 error ≈ slope · log2 N + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateFit {
    /// Every error is zero.
    Exact,
    /// Least-squares slope and root-mean-square residual.
    Fitted { slope: f64, residual: f64 },
}

/// Least-squares rate from `(N, error)` pairs; zero errors are skipped.
pub fn fit_rate(rows: &[(f64, f64)]) -> Result<RateFit> {
    if !rows.is_empty() && rows.iter().all(|&(_, e)| e == 0.0) {
        return Ok(RateFit::Exact);
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|&&(n, e)| e > 0.0 && n > 0.0)
        .map(|&(n, e)| (n.log2(), e.log2()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::TooFewRows(pts.len()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all rows share one N".into()));
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    Ok(RateFit::Fitted {
        slope,
        residual: (sse / m).sqrt(),
    })
}

/// `fit_rate` over an error table.
pub fn fit_table(rows: &[ErrorRow]) -> Result<RateFit> {
    let pairs: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.n_points as f64, r.error.to_f64()))
        .collect();
    fit_rate(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointsets::{Point, SignPattern};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn exactness_identities() {
        let f = Integrand::zero_boundary(1, 1).unwrap();
        for preset in SigmaPreset::STANDARD {
            for n in 1..=8 {
                let sym = Family::Symmetrized.build(&preset.pattern(n));
                assert_eq!(
                    qmc_integrate(&sym, &f).unwrap(),
                    Value::Exact(Dyadic::new(1, 2))
                );
                let dav = Family::Davenport.build(&preset.pattern(n));
                let q = match qmc_integrate(&dav, &f).unwrap() {
                    Value::Exact(v) => v,
                    other => panic!("{other:?}"),
                };
                assert_eq!(q - Dyadic::new(1, 2), Dyadic::pow2(-(n as i64 + 2)));
            }
        }
    }

    #[test]
    fn single_origin_monomial() {
        let set = PointMultiset::from_points([Point::dyadic(0, 0, 0)]).unwrap();
        let f = Integrand::monomial(1, 1).unwrap();
        assert_eq!(
            qmc_integrate(&set, &f).unwrap(),
            Value::Exact(Dyadic::zero())
        );
        assert_eq!(qmc_error(&set, &f).unwrap(), Value::Exact(rat(1, 4)));
    }

    #[test]
    fn integrals_and_parsing() {
        assert_eq!(
            Integrand::monomial(2, 3).unwrap().exact_integral().unwrap(),
            rat(1, 12)
        );
        assert!(Integrand::monomial(9, 0).is_err());
        assert_eq!(Integrand::parse("zb:2,2").unwrap().name(), "(1-x)^2(1-y)^2");
        assert!(Integrand::parse("zb:2").is_err());
        assert!(Integrand::parse("sin:1,1").is_err());
    }

    #[test]
    fn exact_sum_matches_float_sum() {
        let set = Family::Symmetrized.build(&SignPattern::alternating(5));
        let f = Integrand::monomial(8, 7).unwrap();
        let exact = qmc_integrate(&set, &f).unwrap().to_f64();
        let g = Integrand::custom("x8y7", 1.0 / 72.0, |x, y| x.powi(8) * y.powi(7));
        let approx = qmc_integrate(&set, &g).unwrap().to_f64();
        assert!((exact - approx).abs() < 1e-14);
        let err = qmc_error(&set, &g).unwrap().to_f64();
        let exact_err = qmc_error(&set, &f).unwrap().to_f64();
        assert!((err - exact_err).abs() < 1e-14);
    }

    #[test]
    fn error_tables() {
        let f = Integrand::zero_boundary(1, 1).unwrap();
        let ns: Vec<usize> = (1..=6).collect();
        let sym = error_table(Family::Symmetrized, SigmaPreset::Alternating, &f, &ns).unwrap();
        assert!(sym.iter().all(|r| r.error.is_zero()));
        assert_eq!(fit_table(&sym).unwrap(), RateFit::Exact);
        let dav = error_table(Family::Davenport, SigmaPreset::Identity, &f, &ns).unwrap();
        for row in &dav {
            assert_eq!(row.n_points, 1 << (row.n + 1));
            assert_eq!(row.error, Value::Exact(rat(1, 2 * row.n_points as i64)));
        }
        assert!(error_table(Family::Davenport, SigmaPreset::Identity, &f, &[]).is_err());
    }

    #[test]
    fn rate_fits() {
        let inv_square: Vec<(f64, f64)> = (6..=16)
            .map(|k| (2f64.powi(k), 2f64.powi(-2 * k)))
            .collect();
        match fit_rate(&inv_square).unwrap() {
            RateFit::Fitted { slope, residual } => {
                assert!((slope + 2.0).abs() <= 1e-9);
                assert!(residual < 1e-9);
            }
            RateFit::Exact => panic!(),
        }
        let log_model: Vec<(f64, f64)> = (6..=16)
            .map(|k| (2f64.powi(k), f64::from(k) / 2f64.powi(k)))
            .collect();
        match fit_rate(&log_model).unwrap() {
            RateFit::Fitted { slope, .. } => assert!(-1.0 < slope && slope < -0.8),
            RateFit::Exact => panic!(),
        }
        assert_eq!(fit_rate(&[(4.0, 0.0), (8.0, 0.0)]).unwrap(), RateFit::Exact);
        assert!(matches!(
            fit_rate(&[(4.0, 1.0), (8.0, 0.5)]),
            Err(Error::TooFewRows(2))
        ));
    }

    #[test]
    fn smooth_zero_boundary_order() {
        let f = Integrand::zero_boundary(2, 2).unwrap();
        let ns: Vec<usize> = (8..=14).collect();
        let rows = error_table(Family::Symmetrized, SigmaPreset::Identity, &f, &ns).unwrap();
        let errs: Vec<f64> = rows.iter().map(|r| r.error.to_f64()).collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.5, "{errs:?}");
        }
    }
}
