//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::time::Instant;

use num_traits::ToPrimitive;
use rayon::prelude::*;

use dyadisc::besov::{optimal_order, validate, BesovParams, Exponent, HaarSpectrum};
use dyadisc::classical::{l2_warnock, lp_exact_even};
use dyadisc::haar::lemma34_level;
use dyadisc::pointsets::{hammersley_type, Family, SigmaPreset};
use dyadisc::qmc::{qmc_integrate, Integrand, Value};
use dyadisc::verify::{verify_net, verify_oracle, verify_prop34, verify_remark, SuiteReport};
use dyadisc::Dyadic;

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_suite(s: &SuiteReport) -> Outcome {
    let mut detail = format!("{} checks, {} failed", s.checks, s.failed);
    for (case, [neg, zero, pos]) in &s.signs {
        detail.push_str(&format!(
            "; case {case} observed signs -:{neg} 0:{zero} +:{pos}"
        ));
    }
    if let Some(first) = s.failures.first() {
        detail.push_str(&format!("; first failure: {first}"));
    }
    Outcome {
        pass: s.passed(),
        detail,
    }
}

fn presets() -> Vec<SigmaPreset> {
    SigmaPreset::STANDARD.to_vec()
}

fn range(lo: usize, hi: usize) -> Vec<usize> {
    (lo..=hi).collect()
}

fn max_over_min(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    max / min
}

fn criterion_5_grid() -> Vec<BesovParams> {
    let pq = [
        (Exponent::Finite(1.0), Exponent::Finite(2.0)),
        (Exponent::Finite(2.0), Exponent::Finite(2.0)),
        (Exponent::Finite(2.0), Exponent::Infinite),
        (Exponent::Infinite, Exponent::Finite(2.0)),
    ];
    let mut grid = Vec::new();
    for (p, q) in pq {
        for r in [-0.4, -0.2, 0.0, 0.2] {
            let params = BesovParams::new(p, q, r);
            if validate(&params).is_admissible() {
                grid.push(params);
            }
        }
    }
    grid
}

/// Exact norms of one family for every `n` and parameter set:
/// `norms[n - n_lo][k]` belongs to `grid[k]`.
fn norm_table(
    family: Family,
    preset: SigmaPreset,
    ns: &[usize],
    grid: &[BesovParams],
) -> Vec<Vec<f64>> {
    ns.par_iter()
        .map(|&n| {
            let set = family.build(&preset.pattern(n));
            let spectrum = HaarSpectrum::for_exact(&set).expect("spectrum");
            grid.iter()
                .map(|p| spectrum.exact_norm(p).expect("norm").total)
                .collect()
        })
        .collect()
}

fn c1_symmetrized() -> Outcome {
    from_suite(&verify_prop34(&range(1, 12), &presets()).expect("suite runs"))
}

fn c2_davenport() -> Outcome {
    from_suite(&verify_remark(&range(1, 12), &presets()).expect("suite runs"))
}

/// The counting-sum identities exactly as stated, including the `+` in the
/// product sum, on every box of every level.
fn c3_counting_sums() -> Outcome {
    let jobs: Vec<(usize, SigmaPreset)> = range(1, 12)
        .into_iter()
        .flat_map(|n| presets().into_iter().map(move |p| (n, p)))
        .collect();
    let results: Vec<(u64, u64, u64, Vec<String>)> = jobs
        .par_iter()
        .map(|&(n, preset)| {
            let set = hammersley_type(n, &preset.pattern(n)).expect("R_n");
            let n = n as i32;
            let (mut checks, mut single_bad, mut product_bad) = (0, 0, 0);
            let mut bad_levels = Vec::new();
            for j1 in 0..n {
                for j2 in 0..n - j1 {
                    let single = Dyadic::pow2(i64::from(n - j1 - j2 - 1));
                    let product = Dyadic::pow2(i64::from(n - j1 - j2 - 2))
                        + Dyadic::pow2(i64::from(j1 + j2 - n));
                    let mut level_bad = false;
                    for sums in lemma34_level(&set, j1, j2).expect("level") {
                        checks += 2;
                        single_bad += u64::from(sums.single_x != single);
                        single_bad += u64::from(sums.single_y != single);
                        if j1 + j2 < n - 1 {
                            checks += 1;
                            if sums.product != product {
                                product_bad += 1;
                                level_bad = true;
                            }
                        }
                    }
                    if level_bad && bad_levels.len() < 2 {
                        bad_levels.push(format!("n={n} {preset} j=({j1},{j2})"));
                    }
                }
            }
            (checks, single_bad, product_bad, bad_levels)
        })
        .collect();
    let checks: u64 = results.iter().map(|r| r.0).sum();
    let single_bad: u64 = results.iter().map(|r| r.1).sum();
    let product_bad: u64 = results.iter().map(|r| r.2).sum();
    let mut failing_presets: Vec<String> = jobs
        .iter()
        .zip(&results)
        .filter(|(_, r)| r.1 + r.2 > 0)
        .map(|((_, p), _)| p.to_string())
        .collect();
    failing_presets.sort();
    failing_presets.dedup();
    let examples: Vec<String> = results.iter().flat_map(|r| r.3.clone()).take(3).collect();
    Outcome {
        pass: single_bad + product_bad == 0,
        detail: format!(
            "{checks} checks; single sums wrong: {single_bad}; product sums wrong: {product_bad} \
             (presets: {}; e.g. {})",
            if failing_presets.is_empty() {
                "none".into()
            } else {
                failing_presets.join(", ")
            },
            if examples.is_empty() {
                "-".into()
            } else {
                examples.join(", ")
            }
        ),
    }
}

fn c4_oracle() -> Outcome {
    from_suite(&verify_oracle(&range(1, 6), &presets(), 6).expect("suite runs"))
}

fn c5_ratios() -> Outcome {
    let grid = criterion_5_grid();
    let ns = range(4, 14);
    let mut worst = (0.0f64, String::new());
    let mut pass = true;
    for preset in presets() {
        let norms = norm_table(Family::Symmetrized, preset, &ns, &grid);
        for (k, params) in grid.iter().enumerate() {
            let ratios: Vec<f64> = ns
                .iter()
                .zip(&norms)
                .map(|(&n, row)| row[k] / optimal_order(2f64.powi(n as i32 + 2), params))
                .collect();
            let spread = max_over_min(&ratios);
            pass &= spread <= 4.0;
            if spread > worst.0 {
                worst = (spread, format!("{params} {preset}"));
            }
        }
    }
    Outcome {
        pass,
        detail: format!(
            "{} parameter sets x {} presets, n=4..14; worst max/min {:.3} at {}",
            grid.len(),
            presets().len(),
            worst.0,
            worst.1
        ),
    }
}

fn c6_separation() -> Outcome {
    let params = BesovParams::finite(2.0, 2.0, -0.3);
    let ratio = |family: Family, preset: SigmaPreset, n: usize| {
        let set = family.build(&preset.pattern(n));
        let norm = HaarSpectrum::for_exact(&set)
            .and_then(|s| s.exact_norm(&params))
            .expect("norm")
            .total;
        norm / optimal_order(set.len() as f64, &params)
    };
    let mut pass = true;
    let mut growth = Vec::new();
    for preset in presets() {
        let g = ratio(Family::Davenport, preset, 14) / ratio(Family::Davenport, preset, 6);
        pass &= g >= 4.0;
        growth.push(format!("{preset}: {g:.3}"));
    }
    let ns = range(4, 14);
    let mut sym_spread = 0f64;
    for preset in presets() {
        let norms = norm_table(Family::Symmetrized, preset, &ns, &[params]);
        let ratios: Vec<f64> = ns
            .iter()
            .zip(&norms)
            .map(|(&n, row)| row[0] / optimal_order(2f64.powi(n as i32 + 2), &params))
            .collect();
        sym_spread = sym_spread.max(max_over_min(&ratios));
    }
    pass &= sym_spread <= 4.0;
    Outcome {
        pass,
        detail: format!(
            "Davenport ratio growth n=6 -> 14 (need >= 4): {}; symmetrized max/min {sym_spread:.3}",
            growth.join(", ")
        ),
    }
}

fn c7_qmc() -> Outcome {
    let f = Integrand::zero_boundary(1, 1).expect("integrand");
    let quarter = Dyadic::new(1, 2);
    let jobs: Vec<(usize, SigmaPreset)> = range(1, 16)
        .into_iter()
        .flat_map(|n| presets().into_iter().map(move |p| (n, p)))
        .collect();
    let bad: Vec<String> = jobs
        .par_iter()
        .filter_map(|&(n, preset)| {
            let sigma = preset.pattern(n);
            let sym = qmc_integrate(&Family::Symmetrized.build(&sigma), &f).expect("qmc");
            let dav = qmc_integrate(&Family::Davenport.build(&sigma), &f).expect("qmc");
            let dav_ok = matches!(&dav, Value::Exact(v) if v.clone() - quarter.clone() == Dyadic::pow2(-(n as i64 + 2)));
            let sym_ok = sym == Value::Exact(quarter.clone());
            (!(sym_ok && dav_ok)).then(|| format!("n={n} {preset}"))
        })
        .collect();
    Outcome {
        pass: bad.is_empty(),
        detail: format!(
            "{} (n, preset) pairs, {} mismatches {:?}",
            jobs.len(),
            bad.len(),
            bad
        ),
    }
}

fn c8_l2() -> Outcome {
    let jobs: Vec<(usize, SigmaPreset, Family)> = range(1, 10)
        .into_iter()
        .flat_map(|n| {
            presets()
                .into_iter()
                .flat_map(move |p| Family::ALL.into_iter().map(move |f| (n, p, f)))
        })
        .collect();
    let mismatches: Vec<String> = jobs
        .par_iter()
        .filter_map(|&(n, preset, family)| {
            let set = family.build(&preset.pattern(n));
            let a = l2_warnock(&set).expect("warnock");
            let b = lp_exact_even(&set, 2).expect("cells");
            (a != b).then(|| format!("n={n} {preset} {family}"))
        })
        .collect();
    let ns = range(4, 16);
    let mut spread = 0f64;
    for preset in presets() {
        let ratios: Vec<f64> = ns
            .par_iter()
            .map(|&n| {
                let set = Family::Symmetrized.build(&preset.pattern(n));
                let l2 = l2_warnock(&set)
                    .expect("warnock")
                    .to_f64()
                    .expect("finite")
                    .sqrt();
                let big_n = set.len() as f64;
                l2 * big_n / big_n.log2().sqrt()
            })
            .collect();
        spread = spread.max(max_over_min(&ratios));
    }
    Outcome {
        pass: mismatches.is_empty() && spread <= 4.0,
        detail: format!(
            "{} sets compared, {} mismatches; sqrt(L2) N / sqrt(log2 N) worst max/min {spread:.3} over n=4..16",
            jobs.len(),
            mismatches.len()
        ),
    }
}

fn c9_tail() -> Outcome {
    let grid = criterion_5_grid();
    let jobs: Vec<(usize, SigmaPreset)> = range(1, 10)
        .into_iter()
        .flat_map(|n| presets().into_iter().map(move |p| (n, p)))
        .collect();
    let worst = jobs
        .par_iter()
        .map(|&(n, preset)| {
            let set = Family::Symmetrized.build(&preset.pattern(n));
            let exact = HaarSpectrum::for_exact(&set).expect("spectrum");
            let long = HaarSpectrum::compute(&set, n as i32 + 40).expect("spectrum");
            grid.iter()
                .map(|p| {
                    let e = exact.exact_norm(p).expect("exact").total;
                    let t = long.truncated_norm(p).expect("truncated").total;
                    (e - t).abs() / e
                })
                .fold(0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Outcome {
        pass: worst <= 1e-9,
        detail: format!(
            "worst relative difference {worst:.3e} over {} parameter sets, n=1..10",
            grid.len()
        ),
    }
}

fn c10_net() -> Outcome {
    from_suite(&verify_net(&range(1, 12), &presets()).expect("suite runs"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 symmetrized coefficients", c1_symmetrized),
        ("2 Davenport coefficients", c2_davenport),
        ("3 counting sums", c3_counting_sums),
        ("4 oracle equivalence", c4_oracle),
        ("5 Besov ratio boundedness", c5_ratios),
        ("6 negative-smoothness separation", c6_separation),
        ("7 QMC exactness", c7_qmc),
        ("8 L2 agreement and rate", c8_l2),
        ("9 Besov tail", c9_tail),
        ("10 net property", c10_net),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {name}: {status} ({:.1}s) {}",
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        failed += usize::from(!outcome.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
