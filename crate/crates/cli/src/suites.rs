//! Seeded verification suites.
//!
//! Instance `i` of a suite draws from its own ChaCha8 stream, so records are
//! independent of thread count and of each other. Each record carries named
//! checks; the summary counts outcomes and tabulates measured constants.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use spandoubler_core::additive::{
    additive_energy, has_nondegenerate_solution, lambda_bruteforce, lambda_fourier, solution_count,
    spectrum_of_set, EquationSpec, PointSet, DEFAULT_BRUTE_BUDGET,
};
use spandoubler_core::generate::{random_set, solution_free, FreeMethod};
use spandoubler_core::group::mod_inverse;
use spandoubler_core::harmonic::{
    convolve, fourier_forward, fourier_invert, lp_norm, GroupFunction, Measure, Norm, Side,
};
use spandoubler_core::increment::{l2_increment, linf_increment, spectral_mass, Subspace};
use spandoubler_core::spanstruct::{
    chang_spectrum_cover, correlated_span, energy_bound_check, shkredov_asym_cover, span_enumerate,
    symset_cover,
};
use spandoubler_core::{Error, Group, Threshold};

use crate::commands::{
    check_l2, check_linf, cover_constants, driver_limits, elem, elems, energy_oracle,
    measured_constant, ratio, recheck_certificate, run_driver_on,
};
use crate::report::{num, Record, Status};
use crate::{par_map, Settings};

/// Suite names with their default instance counts.
pub const SUITES: &[(&str, usize)] = &[
    ("harmonic", 1000),
    ("lambda", 200),
    ("energy", 500),
    ("covers", 1000),
    ("energy-bound", 1000),
    ("increment", 1000),
    ("driver", 50),
];

/// Canonical suite name, resolving the module aliases.
pub fn resolve(name: &str) -> Option<&'static str> {
    let name = match name {
        "additive" => "lambda",
        "spanstruct" => "covers",
        other => other,
    };
    SUITES.iter().find(|(n, _)| *n == name).map(|(n, _)| *n)
}

pub fn default_count(suite: &str) -> usize {
    SUITES.iter().find(|(n, _)| *n == suite).map_or(0, |&(_, c)| c)
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub records: Vec<Record>,
    pub summary: Record,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.status == Status::Pass)
    }

    /// Records followed by the summary.
    pub fn lines(&self) -> Vec<Record> {
        let mut out = self.records.clone();
        out.push(self.summary.clone());
        out
    }

    /// Finite measured constants from the summary, keyed `name.max` / `name.min`.
    pub fn constants(&self) -> Vec<(String, Value)> {
        let mut out = Vec::new();
        if let Some(Value::Object(m)) = self.summary.fields.get("constants") {
            for (k, v) in m {
                if let Value::Object(stats) = v {
                    for (s, x) in stats {
                        out.push((format!("{k}.{s}"), x.clone()));
                    }
                }
            }
        }
        out
    }
}

type Samples = Vec<(&'static str, f64)>;

fn stream(suite: &str, seed: u64, index: usize) -> ChaCha8Rng {
    // FNV-1a of the suite name keeps suites on distinct keys for one seed.
    let salt = suite
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
    rng.set_stream(index as u64);
    rng
}

/// Runs `count` instances of `suite` (its default count when `None`).
pub fn verify_suite(name: &str, seed: u64, count: Option<usize>, settings: &Settings) -> Result<SuiteReport, String> {
    let suite = resolve(name).ok_or_else(|| {
        let known: Vec<&str> = SUITES.iter().map(|s| s.0).collect();
        format!("unknown suite '{name}' (known: {}, additive, spanstruct)", known.join(", "))
    })?;
    let count = count.unwrap_or_else(|| default_count(suite));
    let start = Instant::now();
    let results = par_map(settings.threads, (0..count).collect(), |i| {
        let t = Instant::now();
        let mut rng = stream(suite, seed, i);
        let mut rec = Record::new(i, "verify");
        rec.set("suite", suite);
        let mut samples = Samples::new();
        let res = match suite {
            "harmonic" => harmonic_instance(&mut rec, &mut rng, &mut samples),
            "lambda" => lambda_instance(&mut rec, &mut rng, settings, &mut samples),
            "energy" => energy_instance(&mut rec, &mut rng, i, &mut samples),
            "covers" => covers_instance(&mut rec, &mut rng, settings, &mut samples),
            "energy-bound" => energy_bound_instance(&mut rec, &mut rng, i, &mut samples),
            "increment" => increment_instance(&mut rec, &mut rng, i, &mut samples),
            "driver" => driver_instance(&mut rec, &mut rng, i, settings, &mut samples),
            _ => unreachable!("resolved suite"),
        };
        if let Err(e) = res {
            rec.error(e);
        }
        rec.timing_ms = Some(t.elapsed().as_secs_f64() * 1e3);
        (rec, samples)
    });

    let mut table: BTreeMap<&'static str, (f64, f64, usize)> = BTreeMap::new();
    let mut records = Vec::with_capacity(results.len());
    for (rec, samples) in results {
        for (k, v) in samples.into_iter().filter(|(_, v)| v.is_finite()) {
            let e = table.entry(k).or_insert((f64::NEG_INFINITY, f64::INFINITY, 0));
            e.0 = e.0.max(v);
            e.1 = e.1.min(v);
            e.2 += 1;
        }
        records.push(rec);
    }
    let mut summary = Record::new(count, "summary");
    let tally = |s: Status| records.iter().filter(|r| r.status == s).count();
    summary.set("suite", suite);
    summary.set("seed", seed);
    summary.set("count", count);
    summary.set("passed", tally(Status::Pass));
    summary.set("failed", tally(Status::Fail));
    summary.set("errors", tally(Status::Error));
    let mut constants = Map::new();
    for name in suite_constants(suite) {
        let (max, min, n) = table.get(name).copied().unwrap_or((0.0, 0.0, 0));
        constants.insert(
            name.to_string(),
            json!({ "max": num(max), "min": num(min), "samples": n }),
        );
    }
    summary.set("constants", Value::Object(constants));
    if tally(Status::Pass) != count {
        summary.status = Status::Fail;
    }
    summary.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    Ok(SuiteReport {
        suite,
        records,
        summary,
    })
}

/// Constant names reported by each suite; a name with no samples reports 0.
fn suite_constants(suite: &str) -> &'static [&'static str] {
    match suite {
        "harmonic" => &["hausdorff_young_l4_ratio", "parseval_relative_error"],
        "lambda" => &["fourier_abs_error"],
        "energy" => &["energy_over_cube"],
        "covers" => &["chang", "shkredov", "symset", "correlated_size"],
        "energy-bound" => &["energy_over_bound"],
        "increment" => &["linf_gain_over_promise", "l2_density_over_eps"],
        "driver" => &["steps_over_max_iters", "final_density"],
        _ => &[],
    }
}

fn pick<'a, T, R: Rng>(rng: &mut R, xs: &'a [T]) -> &'a T {
    &xs[rng.random_range(0..xs.len())]
}

fn random_group<R: Rng>(rng: &mut R, max_order: usize) -> Group {
    const FACTORS: &[u64] = &[2, 3, 4, 5, 7, 8, 9, 11, 13, 16];
    loop {
        let rank = rng.random_range(1..=3);
        let f: Vec<u64> = (0..rank).map(|_| *pick(rng, FACTORS)).collect();
        if f.iter().product::<u64>() as usize <= max_order {
            return Group::with_default_cap(&f).expect("small group");
        }
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * scale.max(1.0)
}

fn max_abs_diff(a: &GroupFunction, b: &GroupFunction) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn harmonic_instance(rec: &mut Record, rng: &mut ChaCha8Rng, samples: &mut Samples) -> Result<(), Error> {
    let g = random_group(rng, 4096);
    let n = g.order();
    let (side, measure) = if rng.random_bool(0.5) {
        (Side::Primal, Measure::Probability)
    } else {
        (Side::Dual, Measure::Counting)
    };
    let value = |rng: &mut ChaCha8Rng| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let f = GroupFunction::new(g.clone(), side, measure, (0..n).map(|_| value(rng)).collect())?;
    let mut sparse = vec![Complex64::new(0.0, 0.0); n];
    for x in sample(rng, n, n.min(16)) {
        sparse[x] = value(rng);
    }
    let h = GroupFunction::new(g.clone(), side, measure, sparse)?;
    rec.set("group", g.to_string());
    rec.set("side", format!("{side:?}").to_lowercase());

    let ft = fourier_forward(&f);
    let (l2, l2_hat) = (lp_norm(&f, Norm::L2), lp_norm(&ft, Norm::L2));
    rec.check("parseval", close(l2, l2_hat, l2));
    samples.push(("parseval_relative_error", (l2 - l2_hat).abs() / l2.max(1e-300)));

    let back = fourier_invert(&ft);
    rec.check("inversion", max_abs_diff(&back, &f) <= 1e-9 * lp_norm(&f, Norm::LInf).max(1.0));

    let lhs = fourier_forward(&convolve(&h, &f)?);
    let rhs = fourier_forward(&h).pointwise_mul(&ft)?;
    rec.check("convolution", max_abs_diff(&lhs, &rhs) <= 1e-9 * lp_norm(&rhs, Norm::LInf).max(1.0));

    // Hausdorff-Young at p = 1 and p = 4/3.
    let l1 = lp_norm(&f, Norm::L1);
    let linf_hat = lp_norm(&ft, Norm::LInf);
    let l43 = (f.values().iter().map(|v| v.norm().powf(4.0 / 3.0)).sum::<f64>() * f.point_mass()).powf(0.75);
    let l4_hat = lp_norm(&ft, Norm::L4);
    rec.check("hausdorff_young_1", linf_hat <= l1 + 1e-9 * l1.max(1.0));
    rec.check("hausdorff_young_4_3", l4_hat <= l43 + 1e-9 * l43.max(1.0));
    samples.push(("hausdorff_young_l4_ratio", l4_hat / l43));
    Ok(())
}

/// Random coefficients in `F_p^*` summing to zero.
fn balanced_coefficients<R: Rng>(rng: &mut R, p: u64, r: usize) -> Vec<i64> {
    loop {
        let mut c: Vec<i64> = (0..r - 1).map(|_| rng.random_range(1..p) as i64).collect();
        let last = (-c.iter().sum::<i64>()).rem_euclid(p as i64);
        if last != 0 {
            c.push(last);
            return c;
        }
    }
}

/// Solutions counted by looping over the first `r-1` variables and solving for the last.
fn naive_count(a: &PointSet, c: &[i64], p: u64) -> u128 {
    let g = a.group();
    let xs = a.indices();
    let r = c.len();
    let inv = mod_inverse(c[r - 1].rem_euclid(p as i64) as u64, p).expect("unit");
    let mut count = 0u128;
    let mut pos = vec![0usize; r - 1];
    if xs.is_empty() {
        return 0;
    }
    loop {
        let mut sum = 0;
        for (k, &i) in pos.iter().enumerate() {
            sum = g.add_idx(sum, g.mul_idx(c[k].rem_euclid(p as i64) as u64, xs[i]));
        }
        let last = g.mul_idx(inv, g.neg_idx(sum));
        count += a.contains(last) as u128;
        let mut k = 0;
        while k < r - 1 {
            pos[k] += 1;
            if pos[k] < xs.len() {
                break;
            }
            pos[k] = 0;
            k += 1;
        }
        if k == r - 1 {
            return count;
        }
    }
}

fn lambda_instance(rec: &mut Record, rng: &mut ChaCha8Rng, settings: &Settings, samples: &mut Samples) -> Result<(), Error> {
    let (p, n) = *pick(rng, &[(3u64, 3usize), (5, 2), (7, 1)]);
    let g = Group::prime_power(p, n)?;
    let r = rng.random_range(3..=5);
    let coeffs = balanced_coefficients(rng, p, r);
    let a = random_set(&g, rng.random_range(0.1..0.7), rng)?;
    let c = EquationSpec::for_group(&coeffs, &g)?;
    rec.set("group", g.to_string());
    rec.set("equation", coeffs.clone());
    rec.set("set", elems(&a));
    let fourier = lambda_fourier(&a, &c)?;
    let exact = lambda_bruteforce(&a, &c, settings.brute_budget)?;
    let e = *exact.numer() as f64 / *exact.denom() as f64;
    rec.set("lambda_exact", ratio(&exact));
    rec.set("lambda_fourier", num(fourier));
    rec.check("fourier_matches_exact", (fourier - e).abs() <= 1e-9);
    samples.push(("fourier_abs_error", (fourier - e).abs()));
    rec.check("count_matches_naive", solution_count(&a, &c, settings.brute_budget)? == naive_count(&a, &coeffs, p));
    Ok(())
}

fn energy_instance(rec: &mut Record, rng: &mut ChaCha8Rng, index: usize, samples: &mut Samples) -> Result<(), Error> {
    let s = if index == 0 {
        let g = Group::with_default_cap(&[7])?;
        PointSet::from_indices(&g, [0, 1, 3])
    } else {
        let g = random_group(rng, 4096);
        let size = rng.random_range(0..=64usize.min(g.order()));
        let pts = sample(rng, g.order(), size);
        PointSet::from_indices(&g, pts)
    };
    let e = additive_energy(&s);
    rec.set("group", s.group().to_string());
    rec.set("size", s.len());
    rec.set("energy", e);
    rec.check("quadruple_loop", energy_oracle(&s) == e);
    if index == 0 {
        rec.check("fixed_value_15", e == 15);
    }
    if !s.is_empty() {
        samples.push(("energy_over_cube", e as f64 / (s.len() as f64).powi(3)));
    }
    Ok(())
}

fn nonempty_random<R: Rng>(g: &Group, lo: f64, hi: f64, rng: &mut R) -> Result<PointSet, Error> {
    loop {
        let a = random_set(g, rng.random_range(lo..hi), rng)?;
        if !a.is_empty() {
            return Ok(a);
        }
    }
}

const THRESHOLDS: &[(u64, u64)] = &[(1, 4), (1, 3), (1, 2), (3, 4), (1, 1)];

fn covers_instance(rec: &mut Record, rng: &mut ChaCha8Rng, settings: &Settings, samples: &mut Samples) -> Result<(), Error> {
    let shapes: &[&[u64]] = &[&[3, 3, 3], &[5, 5], &[7, 7], &[2, 2, 2, 2, 2], &[3, 3, 3, 3], &[13], &[4, 4], &[2, 2, 2, 2, 2, 2]];
    let g = Group::with_default_cap(pick(rng, shapes))?;
    let a = nonempty_random(&g, 0.05, 0.5, rng)?;
    let b = nonempty_random(&g, 0.05, 0.5, rng)?;
    let (dn, dd) = *pick(rng, THRESHOLDS);
    let (en, ed) = *pick(rng, THRESHOLDS);
    let delta = Threshold::ratio(dn, dd);
    let eta = Threshold::ratio(en, ed);
    let consts = cover_constants(settings);
    rec.set("group", g.to_string());
    rec.set("a", elems(&a));
    rec.set("b", elems(&b));
    rec.set("delta", delta.to_string());
    rec.set("eta", eta.to_string());

    let chang = chang_spectrum_cover(&a.indicator(Measure::Probability), delta.value(), &consts)?;
    recheck_certificate(rec, "chang", &chang.certificate, consts.span_limit, true)?;
    rec.set("chang_basis_size", chang.certificate.basis().len());
    samples.extend(measured_constant(&chang.certificate, consts.chang).map(|v| ("chang", v)));

    let shk = shkredov_asym_cover(&a, &b, &consts)?;
    recheck_certificate(rec, "shkredov", &shk.certificate, consts.span_limit, true)?;
    rec.set("shkredov_basis_size", shk.certificate.basis().len());
    samples.extend(measured_constant(&shk.certificate, consts.shkredov).map(|v| ("shkredov", v)));

    let sym = symset_cover(&a, eta, &consts)?;
    recheck_certificate(rec, "symset", &sym.certificate, consts.span_limit, true)?;
    rec.set("symset_basis_size", sym.certificate.basis().len());
    samples.extend(measured_constant(&sym.certificate, consts.symset).map(|v| ("symset", v)));

    // The correlated span runs a subset search; a small set keeps it exhaustive.
    let members = a.indices();
    let keep = members.len().min(8);
    let small = PointSet::from_indices(&g, sample(rng, members.len(), keep).into_iter().map(|i| members[i]));
    let eta_c = *pick(rng, &[0.5, 1.0]);
    let cs = correlated_span(&small, eta_c, &consts)?;
    recheck_certificate(rec, "correlated", &cs.certificate, consts.span_limit, false)?;
    let ext = span_enumerate(&cs.extended_basis, consts.span_limit)?;
    rec.check("correlated_extended_overlap", small.intersection_len(&ext) == cs.extended_overlap);
    rec.set("correlated_set", elems(&small));
    rec.set("correlated_overlap", cs.certificate.overlap());
    rec.set(
        "correlated_translate",
        cs.certificate.translate_index().map_or(Value::Null, |x| elem(&g, x)),
    );
    samples.extend(measured_constant(&cs.certificate, consts.correlated_size).map(|v| ("correlated_size", v)));
    Ok(())
}

fn energy_bound_instance(rec: &mut Record, rng: &mut ChaCha8Rng, index: usize, samples: &mut Samples) -> Result<(), Error> {
    let shapes: &[&[u64]] = &[
        &[3, 3],
        &[3, 3, 3],
        &[3, 3, 3, 3],
        &[3, 3, 3, 3, 3],
        &[3, 3, 3, 3, 3, 3],
        &[5, 5],
        &[5, 5, 5],
        &[7, 7],
        &[7, 7, 7],
        &[2, 2, 2, 2, 2, 2],
        &[2, 2, 2, 2, 2, 2, 2, 2, 2],
        &[9, 9, 9],
        &[27, 27],
        &[11, 11],
    ];
    let g = Group::with_default_cap(pick(rng, shapes))?;
    let delta = [Threshold::ratio(1, 4), Threshold::ratio(1, 2), Threshold::one()][index % 3];
    let a = nonempty_random(&g, 0.02, 0.5, rng)?;
    let mut s = spectrum_of_set(&a, delta.value())?;
    s.remove(0);
    let report = energy_bound_check(&a, delta, &s)?;
    rec.set("group", g.to_string());
    rec.set("delta", delta.to_string());
    rec.set("density", ratio(&a.density()));
    rec.set("spectrum_size", report.size);
    rec.set("energy", report.energy);
    rec.set("bound", num(report.bound));
    rec.check("energy_bound", report.holds);
    if report.bound > 0.0 {
        samples.push(("energy_over_bound", report.energy as f64 / report.bound));
    }
    Ok(())
}

fn increment_instance(rec: &mut Record, rng: &mut ChaCha8Rng, index: usize, samples: &mut Samples) -> Result<(), Error> {
    if index == 0 {
        let g = Group::prime_power(3, 2)?;
        let a = PointSet::from_indices(&g, [&[0, 0], &[0, 1], &[0, 2], &[1, 0]].map(|c| g.index_of(c)));
        let gamma = g.index_of(&[1, 0]);
        let eps = a.indicator(Measure::Probability);
        let coef = fourier_forward(&eps).value(gamma).norm();
        let eps = coef / a.density_f64();
        let inc = linf_increment(&a, gamma, eps)?;
        let d = check_linf(rec, &a, &inc, eps);
        rec.set("worked_example", true);
        rec.set("new_density", ratio(&inc.new_density));
        rec.check("worked_density_one", d == 1.0);
        return Ok(());
    }
    let (p, n) = *pick(rng, &[(3u64, 2usize), (3, 3), (3, 4), (5, 2), (5, 3)]);
    let g = Group::prime_power(p, n)?;
    let a = loop {
        let a = nonempty_random(&g, 0.05, 0.7, rng)?;
        if a.len() < g.order() {
            break a;
        }
    };
    let alpha = a.density_f64();
    let ft = fourier_forward(&a.indicator(Measure::Probability));
    let (gamma, coef) = (1..g.order())
        .map(|gm| (gm, ft.value(gm).norm()))
        .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
    rec.set("group", g.to_string());
    rec.set("set", elems(&a));
    rec.set("character", elem(&g, gamma));
    if coef > 1e-9 {
        let eps = coef / alpha * rng.random_range(0.25..=1.0);
        let inc = linf_increment(&a, gamma, eps)?;
        let d = check_linf(rec, &a, &inc, eps);
        rec.set("linf_epsilon", num(eps));
        rec.set("linf_density", ratio(&inc.new_density));
        samples.push(("linf_gain_over_promise", (d / alpha - 1.0) / (eps / 2.0)));
    }
    let extra = rng.random_range(0..=2);
    let mut gens = vec![gamma];
    gens.extend((0..extra).map(|_| rng.random_range(0..g.order())));
    let w = Subspace::span(&g, &gens)?;
    let mass = spectral_mass(&a, &w)?;
    let eps2 = mass / alpha * rng.random_range(0.25..=1.0);
    let inc = l2_increment(&a, &w, eps2)?;
    let d = check_l2(rec, &a, &inc, eps2);
    rec.set("w_dim", w.dim());
    rec.set("l2_epsilon", num(eps2));
    rec.set("l2_density", ratio(&inc.new_density));
    samples.push(("l2_density_over_eps", d / eps2));
    Ok(())
}

fn driver_instance(
    rec: &mut Record,
    rng: &mut ChaCha8Rng,
    index: usize,
    settings: &Settings,
    samples: &mut Samples,
) -> Result<(), Error> {
    let (g, coeffs) = if index.is_multiple_of(2) {
        (Group::prime_power(3, 4)?, vec![1i64, 1, 1])
    } else {
        (Group::prime_power(5, 3)?, vec![1i64, 1, 3])
    };
    let c = EquationSpec::for_group(&coeffs, &g)?;
    let a = solution_free(&g, &c, FreeMethod::GreedyRandom, DEFAULT_BRUTE_BUDGET, rng)?;
    rec.set("group", g.to_string());
    rec.set("equation", coeffs);
    rec.set("set", elems(&a));
    rec.check("solution_free", has_nondegenerate_solution(&a, &c, DEFAULT_BRUTE_BUDGET)?.is_none());
    let limits = driver_limits(&a, &c, None, settings);
    run_driver_on(rec, &a, &c, &limits)?;
    if let (Some(steps), true) = (rec.fields.get("step_count").and_then(Value::as_u64), limits.max_iters > 0) {
        samples.push(("steps_over_max_iters", steps as f64 / limits.max_iters as f64));
    }
    if let Some(Value::String(d)) = rec.fields.get("final_density") {
        if let Some((n, m)) = d.split_once('/') {
            if let (Ok(n), Ok(m)) = (n.parse::<f64>(), m.parse::<f64>()) {
                samples.push(("final_density", n / m));
            }
        }
    }
    Ok(())
}
