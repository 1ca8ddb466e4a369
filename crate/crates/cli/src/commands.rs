use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use num_traits::ToPrimitive;

use dyadisc::besov::{
    optimal_order, validate, Admissibility, BesovParams, Exponent, HaarSpectrum, NormBreakdown,
};
use dyadisc::classical::{lp_discrepancy, star_discrepancy, LpValue};
use dyadisc::haar::{mu_all_at_level, positions};
use dyadisc::pointsets::{Family, PointMultiset, SigmaPreset};
use dyadisc::qmc::{error_table, fit_table, Integrand, RateFit, Value};
use dyadisc::verify::{run_all, VerifyConfig};
use dyadisc::Dyadic;

use crate::output::{Cell, Table};
use crate::{FamilyArg, OutOpts, SigmaArg, SigmaOpts};

/// Largest number of rows `coeffs` will print.
const MAX_COEFF_ROWS: u64 = 1 << 24;

#[derive(Args, Debug)]
pub struct SetOpts {
    #[arg(long, value_enum, default_value = "symmetrized")]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[command(flatten)]
    pub sigma: SigmaOpts,
}

impl SetOpts {
    fn build(&self) -> Result<PointMultiset> {
        ensure!(self.n >= 1, "--n must be at least 1");
        ensure!(self.n <= 30, "--n must be at most 30");
        Ok(Family::from(self.family).build(&self.sigma.pattern(self.n)))
    }

    fn family_name(&self) -> &'static str {
        Family::from(self.family).name()
    }

    fn sigma_name(&self) -> String {
        self.sigma.preset().to_string()
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub set: SetOpts,
    #[command(flatten)]
    pub out: OutOpts,
}

pub fn gen(a: &GenArgs) -> Result<()> {
    let set = a.set.build()?;
    let den = 1u64 << set.resolution();
    let mut t = Table::new(&["num_x", "num_y", "den"]);
    for &(x, y) in set.grid() {
        t.push(vec![x.into(), y.into(), den.into()]);
    }
    t.write(a.out.format, &mut a.out.open()?)
}

fn dyadic_cells(v: &Dyadic) -> Result<[Cell; 3]> {
    Ok([
        Cell::text(v.mantissa().to_string()),
        Cell::from(v.exponent()),
        Cell::from(v.to_f64()?),
    ])
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub set: SetOpts,
    /// Highest level in each coordinate (default: n).
    #[arg(long)]
    pub jmax: Option<i32>,
    /// Lowest level in each coordinate.
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    pub jmin: i32,
    #[command(flatten)]
    pub out: OutOpts,
}

pub fn coeffs(a: &CoeffsArgs) -> Result<()> {
    let set = a.set.build()?;
    let jmax = a.jmax.unwrap_or(a.set.n as i32);
    ensure!(a.jmin >= -1 && a.jmin <= jmax, "need -1 <= jmin <= jmax");
    let per_axis: u64 = (a.jmin..=jmax).map(positions).sum();
    ensure!(
        per_axis.saturating_mul(per_axis) <= MAX_COEFF_ROWS,
        "levels {}..={jmax} hold more than {MAX_COEFF_ROWS} coefficients; lower --jmax",
        a.jmin
    );
    let mut t = Table::new(&["j1", "j2", "m1", "m2", "mantissa", "exponent", "value"]);
    for j1 in a.jmin..=jmax {
        for j2 in a.jmin..=jmax {
            let level = mu_all_at_level(&set, j1, j2)?;
            for m1 in 0..positions(j1) {
                for m2 in 0..positions(j2) {
                    let [m, e, v] = dyadic_cells(&level.get(m1, m2))?;
                    t.push(vec![j1.into(), j2.into(), m1.into(), m2.into(), m, e, v]);
                }
            }
        }
    }
    t.write(a.out.format, &mut a.out.open()?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Truncated,
}

impl Mode {
    fn name(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Truncated => "truncated",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ParamOpts {
    /// Integrability exponent(s) in [1, inf]; comma-separated for grids.
    #[arg(long, default_value = "2", value_delimiter = ',')]
    pub p: Vec<String>,
    /// Summability exponent(s) in [1, inf].
    #[arg(long, default_value = "2", value_delimiter = ',')]
    pub q: Vec<String>,
    /// Smoothness value(s).
    #[arg(
        long,
        default_value = "-0.3",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub r: Vec<f64>,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    /// Top level for truncated mode (default: n + 40).
    #[arg(long)]
    pub jmax: Option<i32>,
}

impl ParamOpts {
    /// Every `(p, q, r)` combination, in argument order.
    fn grid(&self) -> Result<Vec<BesovParams>> {
        let ps = parse_exponents(&self.p)?;
        let qs = parse_exponents(&self.q)?;
        let mut out = Vec::new();
        for &p in &ps {
            for &q in &qs {
                for &r in &self.r {
                    out.push(BesovParams::new(p, q, r));
                }
            }
        }
        Ok(out)
    }

    fn evaluate(&self, spectrum: &HaarSpectrum, params: &BesovParams) -> Result<NormBreakdown> {
        Ok(match self.mode {
            Mode::Exact => spectrum.exact_norm(params)?,
            Mode::Truncated => spectrum.truncated_norm(params)?,
        })
    }

    fn spectrum(&self, set: &PointMultiset, n: usize) -> Result<HaarSpectrum> {
        Ok(match self.mode {
            Mode::Exact => HaarSpectrum::for_exact(set)?,
            Mode::Truncated => HaarSpectrum::compute(set, self.jmax.unwrap_or(n as i32 + 40))?,
        })
    }
}

fn parse_exponents(raw: &[String]) -> Result<Vec<Exponent>> {
    raw.iter()
        .map(|s| {
            s.parse::<Exponent>()
                .with_context(|| format!("bad exponent '{s}'"))
        })
        .collect()
}

fn jmax_cell(mode: Mode, spectrum: &HaarSpectrum) -> Cell {
    match mode {
        Mode::Exact => Cell::Empty,
        Mode::Truncated => Cell::from(spectrum.j_max()),
    }
}

#[derive(Args, Debug)]
pub struct NormArgs {
    #[command(flatten)]
    pub set: SetOpts,
    #[command(flatten)]
    pub params: ParamOpts,
    #[command(flatten)]
    pub out: OutOpts,
}

pub fn norm(a: &NormArgs) -> Result<()> {
    let grid = a.params.grid()?;
    for params in &grid {
        if let Admissibility::Inadmissible(why) = validate(params) {
            bail!("parameters {params} are outside the admissible window: {why}");
        }
    }
    let set = a.set.build()?;
    let spectrum = a.params.spectrum(&set, a.set.n)?;
    let mut t = Table::new(&[
        "family", "sigma", "n", "N", "p", "q", "r", "mode", "jmax", "norm", "core", "tail", "ratio",
    ]);
    for params in &grid {
        let b = a.params.evaluate(&spectrum, params)?;
        let n_points = set.len() as f64;
        t.push(vec![
            a.set.family_name().into(),
            a.set.sigma_name().into(),
            a.set.n.into(),
            set.len().into(),
            params.p.to_string().into(),
            params.q.to_string().into(),
            params.r.into(),
            a.params.mode.name().into(),
            jmax_cell(a.params.mode, &spectrum),
            b.total.into(),
            b.core_part.into(),
            b.tail_part.into(),
            (b.total / optimal_order(n_points, params)).into(),
        ]);
    }
    t.write(a.out.format, &mut a.out.open()?)
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "symmetrized")]
    pub family: FamilyArg,
    /// First n of the range.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Last n of the range.
    #[arg(long, default_value_t = 14)]
    pub n_max: usize,
    #[command(flatten)]
    pub sigma: SigmaOpts,
    #[command(flatten)]
    pub params: ParamOpts,
    #[command(flatten)]
    pub out: OutOpts,
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    ensure!(a.n >= 1 && a.n <= a.n_max, "need 1 <= n <= n-max");
    ensure!(a.n_max <= 30, "--n-max must be at most 30");
    let mut grid = Vec::new();
    for params in a.params.grid()? {
        match validate(&params) {
            Admissibility::Admissible => grid.push(params),
            Admissibility::Inadmissible(why) => eprintln!("skipping {params}: {why}"),
        }
    }
    ensure!(!grid.is_empty(), "no admissible (p, q, r) combination");
    let family = Family::from(a.family);
    let mut t = Table::new(&[
        "family", "sigma", "p", "q", "r", "n", "N", "norm", "optimal", "ratio",
    ]);
    let mut rows = Vec::new();
    for n in a.n..=a.n_max {
        let set = family.build(&a.sigma.pattern(n));
        let spectrum = a.params.spectrum(&set, n)?;
        for (i, params) in grid.iter().enumerate() {
            let b = a.params.evaluate(&spectrum, params)?;
            rows.push((i, n, set.len(), b.total));
        }
    }
    // group by parameter combination, then n
    rows.sort_by_key(|&(i, n, _, _)| (i, n));
    for (i, n, n_points, norm) in rows {
        let params = &grid[i];
        let optimal = optimal_order(n_points as f64, params);
        t.push(vec![
            family.name().into(),
            a.sigma.preset().to_string().into(),
            params.p.to_string().into(),
            params.q.to_string().into(),
            params.r.into(),
            n.into(),
            n_points.into(),
            norm.into(),
            optimal.into(),
            (norm / optimal).into(),
        ]);
    }
    t.write(a.out.format, &mut a.out.open()?)
}

#[derive(Args, Debug)]
pub struct ClassicArgs {
    #[command(flatten)]
    pub set: SetOpts,
    /// Exponent(s) of the Lp discrepancy; even integers are exact.
    #[arg(long, default_value = "2", value_delimiter = ',')]
    pub p: Vec<f64>,
    #[command(flatten)]
    pub out: OutOpts,
}

pub fn classic(a: &ClassicArgs) -> Result<()> {
    let set = a.set.build()?;
    let mut t = Table::new(&[
        "quantity",
        "p",
        "numerator",
        "denominator",
        "mantissa",
        "exponent",
        "integral",
        "norm",
        "grid_log2",
    ]);
    for &p in &a.p {
        let value = lp_discrepancy(&set, p)?;
        let integral = value.integral();
        let norm = integral.powf(1.0 / p);
        let row = match &value {
            LpValue::Exact(v) => vec![
                "lp".into(),
                p.into(),
                v.numer().to_string().into(),
                v.denom().to_string().into(),
                Cell::Empty,
                Cell::Empty,
                v.to_f64().unwrap_or(f64::NAN).into(),
                norm.into(),
                Cell::Empty,
            ],
            LpValue::Estimate(e) => vec![
                "lp".into(),
                p.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                e.value.into(),
                norm.into(),
                e.grid_log2.into(),
            ],
        };
        t.push(row);
    }
    let star = star_discrepancy(&set)?;
    let rational = star.to_rational();
    let [m, e, v] = dyadic_cells(&star)?;
    t.push(vec![
        "star".into(),
        "inf".into(),
        rational.numer().to_string().into(),
        rational.denom().to_string().into(),
        m,
        e,
        v.clone(),
        v,
        Cell::Empty,
    ]);
    t.write(a.out.format, &mut a.out.open()?)
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// First n of the range.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Last n of the range.
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    /// Restrict to one preset (default: identity, all-flip, alternating, random).
    #[arg(long, value_enum)]
    pub sigma: Option<SigmaArg>,
    /// Seed for the random preset.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Largest n for the oracle suite (default: min(n-max, 4)).
    #[arg(long)]
    pub oracle_n_max: Option<usize>,
    /// Top level for the oracle suite.
    #[arg(long, default_value_t = 4)]
    pub oracle_jmax: i32,
    #[command(flatten)]
    pub out: OutOpts,
}

pub fn verify(a: &VerifyArgs) -> Result<bool> {
    ensure!(a.n >= 1 && a.n <= a.n_max, "need 1 <= n <= n-max");
    ensure!(a.n_max <= 16, "--n-max must be at most 16");
    let presets = match a.sigma {
        Some(s) => vec![SigmaOpts {
            sigma: s,
            seed: a.seed,
        }
        .preset()],
        None => vec![
            SigmaPreset::Identity,
            SigmaPreset::AllFlip,
            SigmaPreset::Alternating,
            SigmaPreset::Random(a.seed),
        ],
    };
    let mut config = VerifyConfig::new(a.n, a.n_max, presets);
    if let Some(m) = a.oracle_n_max {
        config.oracle_n_max = m;
    }
    config.oracle_j_max = a.oracle_jmax;
    let report = run_all(&config)?;
    let mut t = Table::new(&["suite", "checks", "failed", "status", "signs"]);
    for s in &report.suites {
        let signs: Vec<String> = s
            .signs
            .iter()
            .map(|(case, [neg, zero, pos])| format!("{case}:-{neg}/0{zero}/+{pos}"))
            .collect();
        t.push(vec![
            s.name.clone().into(),
            s.checks.into(),
            s.failed.into(),
            if s.passed() { "pass" } else { "fail" }.into(),
            signs.join(" ").into(),
        ]);
        for f in &s.failures {
            eprintln!("{}: {f}", s.name);
        }
    }
    t.write(a.out.format, &mut a.out.open()?)?;
    Ok(report.passed())
}

#[derive(Args, Debug)]
pub struct QmcArgs {
    #[arg(long, value_enum, default_value = "symmetrized")]
    pub family: FamilyArg,
    /// First n of the range.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Last n of the range.
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    #[command(flatten)]
    pub sigma: SigmaOpts,
    /// `zb:a,b` for (1-x)^a (1-y)^b or `mono:a,b` for x^a y^b.
    #[arg(long, default_value = "zb:1,1")]
    pub integrand: String,
    #[command(flatten)]
    pub out: OutOpts,
}

pub fn qmc(a: &QmcArgs) -> Result<()> {
    ensure!(a.n >= 1 && a.n <= a.n_max, "need 1 <= n <= n-max");
    ensure!(a.n_max <= 24, "--n-max must be at most 24");
    let f = Integrand::parse(&a.integrand)?;
    let family = Family::from(a.family);
    let ns: Vec<usize> = (a.n..=a.n_max).collect();
    let rows = error_table(family, a.sigma.preset(), &f, &ns)?;
    let mut t = Table::new(&[
        "family",
        "sigma",
        "integrand",
        "n",
        "N",
        "error",
        "error_exact",
        "slope",
    ]);
    for (i, row) in rows.iter().enumerate() {
        let slope = match fit_table(&rows[..=i]) {
            Ok(RateFit::Exact) => Cell::text("exact"),
            Ok(RateFit::Fitted { slope, .. }) => Cell::from(slope),
            Err(_) => Cell::Empty,
        };
        let exact = match &row.error {
            Value::Exact(v) => Cell::text(v.to_string()),
            Value::Approx(_) => Cell::Empty,
        };
        t.push(vec![
            family.name().into(),
            a.sigma.preset().to_string().into(),
            f.name().into(),
            row.n.into(),
            row.n_points.into(),
            row.error.to_f64().into(),
            exact,
            slope,
        ]);
    }
    t.write(a.out.format, &mut a.out.open()?)
}
