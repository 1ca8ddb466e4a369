//! Exhaustive checks of the closed forms against computed coefficients.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::haar::{
    coarse_sign, lemma34_level, mu_all_at_level, mu_discrepancy, oracle_mu, positions,
    predict_davenport, predict_symmetrized, CoefficientPrediction, HaarIndex, SymmetrizedCase,
};
use crate::pointsets::{hammersley_type, is_net, Family, SigmaPreset};

/// Failures kept verbatim per suite; the rest are only counted.
const KEPT_FAILURES: usize = 20;

/// Signs seen for one case: negative, zero, positive.
pub type SignTally = [u64; 3];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub checks: u64,
    pub failed: u64,
    pub failures: Vec<String>,
    /// Observed signs of coefficients only known up to absolute value.
    pub signs: BTreeMap<String, SignTally>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport {
            name: name.to_string(),
            ..Default::default()
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(detail());
            }
        }
    }

    fn record_sign(&mut self, case: &str, v: &Dyadic, weight: u64) {
        let slot = (v.signum() + 1) as usize;
        self.signs.entry(case.to_string()).or_insert([0; 3])[slot] += weight;
    }

    fn merge(&mut self, other: SuiteReport) {
        self.checks += other.checks;
        self.failed += other.failed;
        for f in other.failures {
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(f);
            }
        }
        for (case, t) in other.signs {
            let slot = self.signs.entry(case).or_insert([0; 3]);
            for i in 0..3 {
                slot[i] += t[i];
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {}: {} checks, {} failed",
            self.name, self.checks, self.failed
        )?;
        for (case, [neg, zero, pos]) in &self.signs {
            write!(f, "; case {case} signs -:{neg} 0:{zero} +:{pos}")?;
        }
        Ok(())
    }
}

/// Runs `body` for each `(n, preset)` in parallel and merges in order.
fn sweep(
    name: &str,
    ns: &[usize],
    presets: &[SigmaPreset],
    body: impl Fn(usize, SigmaPreset, &mut SuiteReport) -> Result<()> + Sync,
) -> Result<SuiteReport> {
    let jobs: Vec<(usize, SigmaPreset)> = ns
        .iter()
        .flat_map(|&n| presets.iter().map(move |&p| (n, p)))
        .collect();
    let parts = jobs
        .par_iter()
        .map(|&(n, preset)| {
            let mut part = SuiteReport::new(name);
            body(n, preset, &mut part)?;
            Ok(part)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = SuiteReport::new(name);
    for part in parts {
        report.merge(part);
    }
    Ok(report)
}

/// Every `R_n` is a `(0, n, 2)`-net.
pub fn verify_net(ns: &[usize], presets: &[SigmaPreset]) -> Result<SuiteReport> {
    sweep("net", ns, presets, |n, preset, rep| {
        let set = hammersley_type(n, &preset.pattern(n))?;
        let ok = is_net(&set, n as u32)?;
        rep.check(ok, || format!("n={n} {preset}: not a net"));
        Ok(())
    })
}

/// Counting sums of `R_n` over every box of every level with `j1 + j2 < n`.
///
/// The product sum is `2^{n-j1-j2-2} + τ 2^{j1+j2-n}` with `τ` from
/// [`coarse_sign`]; the tally under `product` records how often `τ = -1`.
pub fn verify_lemma34(ns: &[usize], presets: &[SigmaPreset]) -> Result<SuiteReport> {
    sweep("lemma34", ns, presets, |n, preset, rep| {
        let sigma = preset.pattern(n);
        let set = hammersley_type(n, &sigma)?;
        let n = n as i32;
        for j1 in 0..n {
            for j2 in 0..n - j1 {
                let single = Dyadic::pow2(i64::from(n - j1 - j2 - 1));
                let tau = if j1 + j2 < n - 1 {
                    coarse_sign(&sigma, j1, j2)?
                } else {
                    1
                };
                let product = Dyadic::pow2(i64::from(n - j1 - j2 - 2))
                    + Dyadic::new(i128::from(tau), i64::from(n - j1 - j2));
                for (slot, sums) in lemma34_level(&set, j1, j2)?.into_iter().enumerate() {
                    let (m1, m2) = (slot >> j2, slot & ((1 << j2) - 1));
                    let here = || format!("n={n} {preset} j=({j1},{j2}) m=({m1},{m2})");
                    rep.check(sums.single_x == single, || {
                        format!("{}: x-sum {} != {single}", here(), sums.single_x)
                    });
                    rep.check(sums.single_y == single, || {
                        format!("{}: y-sum {} != {single}", here(), sums.single_y)
                    });
                    if j1 + j2 < n - 1 {
                        rep.check(sums.product == product, || {
                            format!("{}: product {} != {product}", here(), sums.product)
                        });
                        rep.record_sign("product", &Dyadic::from_int(i128::from(tau)), 1);
                    }
                }
            }
        }
        Ok(())
    })
}

/// All coefficients of the symmetrized set at levels `-1 ..= n + 2`.
///
/// Empty boxes share one value, so each level is checked through its
/// occupied boxes plus that common value. The transitional case also bounds
/// the number of boxes deviating from the volume term, and every level with
/// `j1 >= 0` must be symmetric under `m1 -> 2^j1 - 1 - m1`.
pub fn verify_prop34(ns: &[usize], presets: &[SigmaPreset]) -> Result<SuiteReport> {
    sweep("prop34", ns, presets, |n, preset, rep| {
        let set = Family::Symmetrized.build(&preset.pattern(n));
        let top = n as i32 + 2;
        for j1 in -1..=top {
            for j2 in -1..=top {
                let level = mu_all_at_level(&set, j1, j2)?;
                let case = SymmetrizedCase::of(n as u32, j1, j2);
                let label = case.label();
                let empty_boxes = positions(j1) * positions(j2) - level.occupied.len() as u64;
                let probe = HaarIndex::new(j1, j2, 0, 0)?;
                let prediction = predict_symmetrized(n as u32, &probe);
                let here = |m1: u64, m2: u64| {
                    format!("n={n} {preset} case {label} j=({j1},{j2}) m=({m1},{m2})")
                };
                let mut deviating = 0u64;
                for (m1, m2, mu) in &level.occupied {
                    rep.check(prediction.admits(mu), || {
                        format!("{}: {mu} vs {prediction:?}", here(*m1, *m2))
                    });
                    if *mu != level.empty_value {
                        deviating += 1;
                    }
                    if matches!(prediction, CoefficientPrediction::ExactAbs(_)) {
                        rep.record_sign(label, mu, 1);
                    }
                    if j1 >= 0 {
                        let mirror = positions(j1) - 1 - m1;
                        let other = level.get(mirror, *m2);
                        rep.check(other == *mu, || {
                            format!(
                                "{}: mirror {mirror} holds {other}, not {mu}",
                                here(*m1, *m2)
                            )
                        });
                    }
                }
                if empty_boxes > 0 {
                    rep.check(prediction.admits(&level.empty_value), || {
                        format!(
                            "{} (empty boxes): {} vs {prediction:?}",
                            here(0, 0),
                            level.empty_value
                        )
                    });
                    if matches!(prediction, CoefficientPrediction::ExactAbs(_)) {
                        rep.record_sign(label, &level.empty_value, empty_boxes);
                    }
                }
                if case == SymmetrizedCase::Transitional {
                    let cap = 1u64 << (n + 2);
                    rep.check(deviating <= cap, || {
                        format!("{}: {deviating} deviating boxes > {cap}", here(0, 0))
                    });
                }
            }
        }
        Ok(())
    })
}

/// Davenport coefficients at `(-1, -1)` and `(-1, k)`, `k < n`.
pub fn verify_remark(ns: &[usize], presets: &[SigmaPreset]) -> Result<SuiteReport> {
    sweep("remark", ns, presets, |n, preset, rep| {
        let sigma = preset.pattern(n);
        let set = Family::Davenport.build(&sigma);
        for k in -1..n as i32 {
            let level = mu_all_at_level(&set, -1, k)?;
            for m2 in 0..positions(k) {
                let idx = HaarIndex::new(-1, k, 0, m2)?;
                let prediction = predict_davenport(&sigma, &idx)?;
                let mu = level.get(0, m2);
                rep.check(prediction.admits(&mu), || {
                    format!("n={n} {preset} {idx}: {mu} vs {prediction:?}")
                });
            }
        }
        Ok(())
    })
}

/// Per-index agreement of the closed form with the antiderivative oracle on
/// all three families, levels `-1 ..= j_max`.
pub fn verify_oracle(ns: &[usize], presets: &[SigmaPreset], j_max: i32) -> Result<SuiteReport> {
    sweep("oracle", ns, presets, |n, preset, rep| {
        let sigma = preset.pattern(n);
        for family in Family::ALL {
            let set = family.build(&sigma);
            for j1 in -1..=j_max {
                for j2 in -1..=j_max {
                    for m1 in 0..positions(j1) {
                        for m2 in 0..positions(j2) {
                            let idx = HaarIndex::new(j1, j2, m1, m2)?;
                            let a = mu_discrepancy(&set, &idx)?;
                            let b = oracle_mu(&set, &idx)?;
                            rep.check(a == b, || {
                                format!("n={n} {preset} {family} {idx}: {a} != {b}")
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    })
}

/// Which suites to run and over what range.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub ns: Vec<usize>,
    pub presets: Vec<SigmaPreset>,
    /// Largest `n` for the oracle suite, which is quadratic in the level count.
    pub oracle_n_max: usize,
    pub oracle_j_max: i32,
}

impl VerifyConfig {
    pub fn new(n_min: usize, n_max: usize, presets: Vec<SigmaPreset>) -> Self {
        VerifyConfig {
            ns: (n_min.max(1)..=n_max).collect(),
            presets,
            oracle_n_max: n_max.min(4),
            oracle_j_max: 4,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }

    pub fn checks(&self) -> u64 {
        self.suites.iter().map(|s| s.checks).sum()
    }

    pub fn failed(&self) -> u64 {
        self.suites.iter().map(|s| s.failed).sum()
    }
}

pub fn run_all(config: &VerifyConfig) -> Result<VerifyReport> {
    let oracle_ns: Vec<usize> = config
        .ns
        .iter()
        .copied()
        .filter(|&n| n <= config.oracle_n_max)
        .collect();
    Ok(VerifyReport {
        suites: vec![
            verify_net(&config.ns, &config.presets)?,
            verify_lemma34(&config.ns, &config.presets)?,
            verify_prop34(&config.ns, &config.presets)?,
            verify_remark(&config.ns, &config.presets)?,
            verify_oracle(&oracle_ns, &config.presets, config.oracle_j_max)?,
        ],
    })
}
