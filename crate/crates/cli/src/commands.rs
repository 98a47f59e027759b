//! One report record per instance for each command.
//!
//! Every command recomputes the invariant it claims (containment, overlap,
//! postcondition densities, oracle agreement) and records it as a check.

use std::time::Instant;

use num_rational::Ratio;
use serde_json::{json, Value};
use spandoubler_core::additive::{
    additive_energy, correlation, lambda_bruteforce, lambda_fourier, spectrum_of_set, sumset,
    EquationSpec, PointSet,
};
use spandoubler_core::harmonic::Measure;
use spandoubler_core::increment::{
    fourier_coefficient, iteration_step, l2_increment, linf_increment, roth_driver, spectral_mass,
    DriverLimits, Increment, StepCase, StepKnobs, StepOutcome, Subspace, Termination,
};
use spandoubler_core::spanstruct::{
    bsg_extract, chang_spectrum_cover, correlated_span, energy_bound_check, shkredov_asym_cover,
    shkredov_audit, span_enumerate, symset_cover, BsgConfig, CoverCertificate, CoverConstants,
};
use spandoubler_core::{Error, Group, Threshold, INCLUSION_SLACK};

use crate::instance::Instance;
use crate::report::{num, Record, Status};
use crate::Settings;

pub const COMMANDS: &[&str] = &[
    "spectrum",
    "symset",
    "chang",
    "span-asym",
    "correlated-span",
    "energy",
    "bsg",
    "lambda",
    "increment",
    "driver",
];

pub fn elem(g: &Group, idx: usize) -> Value {
    Value::String(g.element_at(idx).to_string())
}

pub fn elems(s: &PointSet) -> Value {
    Value::Array(s.iter().map(|x| elem(s.group(), x)).collect())
}

pub fn idx_list(g: &Group, xs: &[usize]) -> Value {
    Value::Array(xs.iter().map(|&x| elem(g, x)).collect())
}

pub fn ratio<T: std::fmt::Display>(r: &Ratio<T>) -> Value {
    Value::String(format!("{}/{}", r.numer(), r.denom()))
}

pub fn cover_constants(settings: &Settings) -> CoverConstants {
    CoverConstants {
        span_limit: settings.span_limit,
        ..CoverConstants::default()
    }
}

pub fn knobs(settings: &Settings, boost: Option<f64>) -> StepKnobs {
    StepKnobs {
        boost: boost.unwrap_or(0.0),
        brute_budget: settings.brute_budget,
        cover: cover_constants(settings),
        ..StepKnobs::default()
    }
}

fn need<'a, T>(v: Option<&'a T>, what: &str) -> Result<&'a T, Error> {
    v.ok_or_else(|| Error::Hypothesis(format!("instance has no {what}")))
}

/// `C |L| / budget`: the constant a cover actually needed.
pub fn measured_constant(cert: &CoverCertificate, c: f64) -> Option<f64> {
    let b = cert.bound_budget();
    (b > 0.0 && b.is_finite()).then(|| c * cert.basis().len() as f64 / b)
}

/// Rebuilds `translate + Span(basis)` and checks the recorded containment and overlap.
///
/// Covers must contain their target; overlap-only certificates (the correlated
/// span) only need the recorded flag to match.
pub fn recheck_certificate(
    rec: &mut Record,
    name: &str,
    cert: &CoverCertificate,
    span_limit: usize,
    must_contain: bool,
) -> Result<(), Error> {
    let mut span = span_enumerate(cert.basis(), span_limit)?;
    if let Some(x) = cert.translate_index() {
        span = span.translate(x);
    }
    let contained = cert.target().is_subset(&span);
    if must_contain {
        rec.check(&format!("{name}_contained"), contained && cert.contained());
    } else {
        rec.check(&format!("{name}_containment_flag"), contained == cert.contained());
    }
    rec.check(
        &format!("{name}_overlap_recount"),
        cert.target().intersection_len(&span) == cert.overlap() && span.len() == cert.span_size(),
    );
    Ok(())
}

fn cert_json(cert: &CoverCertificate) -> Value {
    let g = cert.target().group();
    json!({
        "basis": idx_list(g, cert.basis().indices()),
        "basis_size": cert.basis().len(),
        "bound_budget": num(cert.bound_budget()),
        "contained": cert.contained(),
        "dissociated": cert.basis().is_dissociated(),
        "overlap": cert.overlap(),
        "span_size": cert.span_size(),
        "target_size": cert.target().len(),
        "translate": cert.translate_index().map_or(Value::Null, |x| elem(g, x)),
    })
}

/// `E(S)` by the quadruple loop over a table of differences.
pub fn energy_oracle(s: &PointSet) -> u64 {
    let g = s.group();
    let xs = s.indices();
    let diffs: Vec<usize> = xs
        .iter()
        .flat_map(|&a| xs.iter().map(move |&b| g.sub_idx(a, b)))
        .collect();
    let n = xs.len();
    let mut count = 0u64;
    for a in 0..n {
        for b in 0..n {
            let d = diffs[a * n + b];
            for c in 0..n {
                for e in 0..n {
                    count += (diffs[c * n + e] == d) as u64;
                }
            }
        }
    }
    count
}

/// `|A n (x + V)|` by walking the coset.
pub fn coset_count(a: &PointSet, inc: &Increment) -> usize {
    inc.subspace
        .elements()
        .translate(inc.translate)
        .intersection_len(a)
}

fn increment_json(inc: &Increment) -> Value {
    let g = inc.subspace.group();
    json!({
        "codimension": inc.subspace.codimension(),
        "count": inc.count,
        "dim": inc.subspace.dim(),
        "new_density": ratio(&inc.new_density),
        "subspace_basis": idx_list(g, &inc.subspace.basis_indices()),
        "translate": elem(g, inc.translate),
    })
}

fn density_f(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Checks the l-infinity postcondition by recount; returns the recounted density.
pub fn check_linf(rec: &mut Record, a: &PointSet, inc: &Increment, eps: f64) -> f64 {
    let recount = coset_count(a, inc);
    let d = recount as f64 / inc.subspace.order() as f64;
    rec.check("linf_recount", recount == inc.count);
    rec.check("linf_density", d >= a.density_f64() * (1.0 + eps / 2.0) - 1e-9);
    d
}

pub fn check_l2(rec: &mut Record, a: &PointSet, inc: &Increment, eps: f64) -> f64 {
    let recount = coset_count(a, inc);
    let d = recount as f64 / inc.subspace.order() as f64;
    rec.check("l2_recount", recount == inc.count);
    rec.check("l2_density", d >= eps - 1e-9);
    d
}

fn threshold_json(t: &Threshold) -> Value {
    Value::String(t.to_string())
}

fn run_spectrum(rec: &mut Record, inst: &Instance, _: &Settings) -> Result<(), Error> {
    let a = need(inst.set.as_ref(), "set")?;
    let delta = inst.spec.delta.unwrap_or(Threshold::ratio(1, 2));
    let spec = spectrum_of_set(a, delta.value())?;
    rec.set("delta", threshold_json(&delta));
    rec.set("size", spec.len());
    rec.set("spectrum", elems(&spec));
    let cut = delta.value() * a.density_f64() - INCLUSION_SLACK;
    let agrees = a
        .group()
        .indices()
        .all(|gm| (fourier_coefficient(a, gm).norm() >= cut) == spec.contains(gm));
    rec.check("direct_sum_agrees", agrees);
    Ok(())
}

fn run_symset(rec: &mut Record, inst: &Instance, settings: &Settings) -> Result<(), Error> {
    let a = need(inst.set.as_ref(), "set")?;
    let eta = inst.spec.eta.unwrap_or(Threshold::ratio(1, 2));
    let cover = symset_cover(a, eta, &cover_constants(settings))?;
    let counts = correlation(a, a)?;
    let agrees = a
        .group()
        .indices()
        .all(|x| eta.admits(counts[x], a.len() as u64) == cover.symmetry_set.contains(x));
    rec.set("eta", threshold_json(&eta));
    rec.set("size", cover.symmetry_set.len());
    rec.set("symmetry_set", elems(&cover.symmetry_set));
    rec.set("cover", cert_json(&cover.certificate));
    rec.check("membership_recount", agrees);
    recheck_certificate(rec, "cover", &cover.certificate, settings.span_limit, true)?;
    Ok(())
}

fn run_chang(rec: &mut Record, inst: &Instance, settings: &Settings) -> Result<(), Error> {
    let a = need(inst.set.as_ref(), "set")?;
    let delta = inst.spec.delta.unwrap_or(Threshold::ratio(1, 2));
    let consts = cover_constants(settings);
    let cover = chang_spectrum_cover(&a.indicator(Measure::Probability), delta.value(), &consts)?;
    rec.set("delta", threshold_json(&delta));
    rec.set("log_ratio", num(cover.log_ratio));
    rec.set("cover", cert_json(&cover.certificate));
    rec.set(
        "measured_constant",
        measured_constant(&cover.certificate, consts.chang).map_or(Value::Null, num),
    );
    recheck_certificate(rec, "cover", &cover.certificate, consts.span_limit, true)?;
    Ok(())
}

fn run_span_asym(rec: &mut Record, inst: &Instance, settings: &Settings) -> Result<(), Error> {
    let a = need(inst.set.as_ref(), "set")?;
    let b = inst.bset.as_ref().unwrap_or(a);
    let consts = cover_constants(settings);
    let cover = shkredov_asym_cover(a, b, &consts)?;
    let audit = shkredov_audit(a, b)?;
    rec.set("threshold_set_size", cover.threshold_set.len());
    rec.set("sumset_size", cover.sumset_size);
    rec.set("doubling", ratio(&cover.doubling));
    rec.set("cover", cert_json(&cover.certificate));
    rec.set(
        "measured_constant",
        measured_constant(&cover.certificate, consts.shkredov).map_or(Value::Null, num),
    );
    rec.set(
        "audit",
        json!({
            "g_l1": num(audit.g_l1),
            "l1_bound": num(audit.l1_bound),
            "g_l2_squared": num(audit.g_l2_squared),
            "l2_bound": num(audit.l2_bound),
            "inversion_error": num(audit.inversion_error),
        }),
    );
    rec.check("b_in_threshold_set", b.is_subset(&cover.threshold_set));
    rec.check("audit_inversion", audit.inversion_error <= 1e-6);
    recheck_certificate(rec, "cover", &cover.certificate, consts.span_limit, true)?;
    Ok(())
}

fn run_correlated(rec: &mut Record, inst: &Instance, settings: &Settings) -> Result<(), Error> {
    let a = need(inst.set.as_ref(), "set")?;
    let eta = inst.spec.eta.map_or(1.0, |t| t.value());
    let consts = cover_constants(settings);
    let cs = correlated_span(a, eta, &consts)?;
    let g = a.group();
    rec.set("eta", num(eta));
    rec.set("doubling", ratio(&cs.doubling));
    rec.set("level", threshold_json(&cs.level));
    rec.set(
        "core",
        json!({
            "mode": format!("{:?}", cs.core.mode).to_lowercase(),
            "size": cs.core.subset.len(),
            "sym_size": cs.core.sym_size,
            "evaluated": cs.core.evaluated,
            "lower_bound": num(cs.core.lower_bound),
        }),
    );
    rec.set("symmetry_set_size", cs.symmetry_set.len());
    rec.set("cover", cert_json(&cs.certificate));
    rec.set("extended_basis", idx_list(g, cs.extended_basis.indices()));
    rec.set("extended_overlap", cs.extended_overlap);
    rec.set("translate_contained", cs.translate_contained);
    rec.set("size_budget", num(cs.size_budget));
    rec.set("overlap_shape", num(cs.overlap_shape));
    recheck_certificate(rec, "cover", &cs.certificate, consts.span_limit, false)?;
    let ext = span_enumerate(&cs.extended_basis, consts.span_limit)?;
    rec.check("extended_overlap_recount", a.intersection_len(&ext) == cs.extended_overlap);
    Ok(())
}

fn run_energy(rec: &mut Record, inst: &Instance, _: &Settings) -> Result<(), Error> {
    let a = need(inst.set.as_ref(), "set")?;
    let e = additive_energy(a);
    rec.set("size", a.len());
    rec.set("energy", e);
    if a.len() <= 64 {
        rec.check("quadruple_loop", energy_oracle(a) == e);
    }
    if let Some(delta) = inst.spec.delta {
        let mut s = spectrum_of_set(a, delta.value())?;
        s.remove(0);
        let report = energy_bound_check(a, delta, &s)?;
        rec.set(
            "bound",
            json!({
                "delta": threshold_json(&delta),
                "spectrum_size": report.size,
                "spectrum_energy": report.energy,
                "bound": num(report.bound),
            }),
        );
        rec.check("energy_bound", report.holds);
    }
    Ok(())
}

fn run_bsg(rec: &mut Record, inst: &Instance, _: &Settings) -> Result<(), Error> {
    let s = need(inst.set.as_ref(), "set")?;
    let n = s.len() as u64;
    let c = match inst.spec.c {
        Some(c) => c,
        None if n > 0 => Threshold::Exact(Ratio::new(additive_energy(s), n * n * n)),
        None => return Err(Error::EmptySet),
    };
    let r = bsg_extract(s, c, &BsgConfig::default())?;
    rec.set("c", threshold_json(&c));
    rec.set("subset", elems(&r.subset));
    rec.set("subset_size", r.subset.len());
    rec.set("energy", r.energy);
    rec.set("fraction", num(r.fraction));
    rec.set("doubling", ratio(&r.doubling));
    rec.set("size_shape", num(r.size_shape));
    rec.set("doubling_shape", num(r.doubling_shape));
    rec.set("candidates", r.candidates);
    let recount = Ratio::new(sumset(&r.subset, &r.subset)?.len() as u64, r.subset.len().max(1) as u64);
    rec.check("subset_of_s", r.subset.is_subset(s));
    rec.check("doubling_recount", recount == r.doubling);
    Ok(())
}

fn equation(inst: &Instance) -> Result<&EquationSpec, Error> {
    need(inst.equation.as_ref(), "equation (eq clause)")
}

fn run_lambda(rec: &mut Record, inst: &Instance, settings: &Settings) -> Result<(), Error> {
    let a = need(inst.set.as_ref(), "set")?;
    let c = equation(inst)?;
    let f = lambda_fourier(a, c)?;
    rec.set("lambda_fourier", num(f));
    match lambda_bruteforce(a, c, settings.brute_budget) {
        Ok(exact) => {
            let e = *exact.numer() as f64 / *exact.denom() as f64;
            rec.set("lambda_exact", ratio(&exact));
            rec.check("fourier_matches_exact", (f - e).abs() <= 1e-9);
        }
        Err(Error::BudgetExceeded { .. }) => rec.set("lambda_exact", Value::Null),
        Err(e) => return Err(e),
    }
    Ok(())
}

fn run_increment(rec: &mut Record, inst: &Instance, settings: &Settings) -> Result<(), Error> {
    let a = need(inst.set.as_ref(), "set")?;
    let g = a.group();
    let alpha = a.density_f64();
    rec.set("density", ratio(&a.density()));
    if let Some(gamma) = &inst.spec.gamma {
        let gm = g.index_of(&gamma.iter().map(|&v| v as u32).collect::<Vec<_>>());
        let coef = fourier_coefficient(a, gm).norm();
        let eps = match inst.spec.eps {
            Some(t) => t.value(),
            None if alpha > 0.0 => coef / alpha,
            None => return Err(Error::EmptySet),
        };
        let inc = linf_increment(a, gm, eps)?;
        rec.set("lemma", "linf");
        rec.set("coefficient", num(coef));
        rec.set("epsilon", num(eps));
        rec.set("increment", increment_json(&inc));
        check_linf(rec, a, &inc, eps);
    } else if let Some(w) = &inst.spec.w {
        let gens: Vec<usize> = w
            .iter()
            .map(|c| g.index_of(&c.iter().map(|&v| v as u32).collect::<Vec<_>>()))
            .collect();
        let w = Subspace::span(g, &gens)?;
        let mass = spectral_mass(a, &w)?;
        let eps = match inst.spec.eps {
            Some(t) => t.value(),
            None if alpha > 0.0 => mass / alpha,
            None => return Err(Error::EmptySet),
        };
        let inc = l2_increment(a, &w, eps)?;
        rec.set("lemma", "l2");
        rec.set("mass", num(mass));
        rec.set("epsilon", num(eps));
        rec.set("increment", increment_json(&inc));
        check_l2(rec, a, &inc, eps);
    } else {
        let c = equation(inst)?;
        match iteration_step(a, c, &knobs(settings, inst.spec.boost))? {
            StepOutcome::ManySolutions { lambda } => {
                rec.set("case", "many_solutions");
                rec.set("lambda_fourier", num(lambda.fourier));
                rec.set("lambda_exact", lambda.exact.as_ref().map_or(Value::Null, ratio));
            }
            StepOutcome::LinfStep {
                increment,
                character,
                coefficient,
                epsilon,
                fallback,
            } => {
                rec.set("case", "linf_step");
                rec.set("character", elem(g, character));
                rec.set("coefficient", num(coefficient));
                rec.set("epsilon", num(epsilon));
                rec.set("fallback", fallback.map_or(Value::Null, Value::String));
                rec.set("increment", increment_json(&increment));
                check_linf(rec, a, &increment, epsilon);
            }
            StepOutcome::L2Finish {
                increment,
                epsilon,
                pipeline,
            } => {
                rec.set("case", "l2_finish");
                rec.set("epsilon", num(epsilon));
                rec.set("dim_w", pipeline.dim_w);
                rec.set("spectrum_size", pipeline.spectrum_size);
                rec.set("extracted_size", pipeline.extracted_size);
                rec.set("mass", num(pipeline.mass));
                rec.set("increment", increment_json(&increment));
                check_l2(rec, a, &increment, epsilon);
            }
        }
    }
    Ok(())
}

/// Runs the driver and records its transcript and soundness checks.
pub fn run_driver_on(
    rec: &mut Record,
    a: &PointSet,
    c: &EquationSpec,
    limits: &DriverLimits,
) -> Result<(), Error> {
    let t = roth_driver(a, c, limits)?;
    let steps: Vec<Value> = t
        .steps
        .iter()
        .map(|s| {
            json!({
                "case": match s.case { StepCase::LinfStep => "linf_step", StepCase::L2Finish => "l2_finish" },
                "dim": s.subspace.dim(),
                "codimension": s.subspace.codimension(),
                "translate": s.translate.to_string(),
                "density_before": ratio(&s.density_before),
                "density_after": ratio(&s.density_after),
                "epsilon": num(s.epsilon),
                "index": s.index_product.to_string(),
                "fallback": s.fallback.clone(),
                "itpos": s.itpos.as_ref().map(|i| json!({
                    "root_count": i.root_count.to_string(),
                    "step_count": i.step_count.to_string(),
                    "holds": i.holds,
                })),
            })
        })
        .collect();
    rec.set("initial_density", ratio(&t.initial_density));
    rec.set("max_iters", limits.max_iters);
    rec.set("steps", Value::Array(steps));
    rec.set("step_count", t.steps.len());
    rec.set("termination", t.termination.as_str());
    rec.set("final_density", ratio(&t.final_density));
    rec.set("final_order", t.final_order);
    rec.set("final_lambda", num(t.final_lambda.fourier));
    rec.set("index_product", t.index_product.to_string());

    rec.check("terminated_within_max_iters", t.termination != Termination::MaxIters && t.steps.len() <= limits.max_iters);
    let increasing = t
        .steps
        .iter()
        .all(|s| density_f(&s.density_after) > density_f(&s.density_before) && s.density_after > s.density_before);
    rec.check("densities_increasing", increasing);
    let audited = t
        .steps
        .iter()
        .enumerate()
        .filter(|(i, _)| limits.audit_every > 0 && (i + 1) % limits.audit_every == 0);
    let mut all_hold = true;
    for (_, s) in audited {
        all_hold &= s.itpos.as_ref().is_some_and(|i| i.holds);
    }
    rec.check("itpos_audited", all_hold);
    Ok(())
}

pub fn driver_limits(a: &PointSet, c: &EquationSpec, inst: Option<&Instance>, settings: &Settings) -> DriverLimits {
    let mut limits = DriverLimits::for_instance(a, c);
    limits.audit_every = settings.audit_every;
    limits.knobs = knobs(settings, inst.and_then(|i| i.spec.boost));
    if let Some(i) = inst {
        if let Some(m) = i.spec.max_iters {
            limits.max_iters = m;
        }
        if let Some(m) = i.spec.min_order {
            limits.min_order = m;
        }
    }
    limits
}

fn run_driver(rec: &mut Record, inst: &Instance, settings: &Settings) -> Result<(), Error> {
    let a = need(inst.set.as_ref(), "set")?;
    let c = equation(inst)?;
    let limits = driver_limits(a, c, Some(inst), settings);
    run_driver_on(rec, a, c, &limits)
}

/// Runs `command` on one materialized instance.
pub fn run_command(command: &str, index: usize, inst: &Instance, settings: &Settings) -> Record {
    let mut rec = Record::new(index, command);
    rec.set("input", inst.spec.text.clone());
    rec.set("group", inst.group.to_string());
    if let Some(a) = &inst.set {
        rec.set("set_size", a.len());
    }
    if !inst.spec.warnings.is_empty() {
        rec.set("warnings", inst.spec.warnings.clone());
    }
    let start = Instant::now();
    let result = match command {
        "spectrum" => run_spectrum(&mut rec, inst, settings),
        "symset" => run_symset(&mut rec, inst, settings),
        "chang" => run_chang(&mut rec, inst, settings),
        "span-asym" => run_span_asym(&mut rec, inst, settings),
        "correlated-span" => run_correlated(&mut rec, inst, settings),
        "energy" => run_energy(&mut rec, inst, settings),
        "bsg" => run_bsg(&mut rec, inst, settings),
        "lambda" => run_lambda(&mut rec, inst, settings),
        "increment" => run_increment(&mut rec, inst, settings),
        "driver" => run_driver(&mut rec, inst, settings),
        other => Err(Error::Hypothesis(format!("unknown command '{other}'"))),
    };
    if let Err(e) = result {
        rec.error(e);
    }
    rec.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    debug_assert!(rec.status != Status::Error || rec.fields.contains_key("error"));
    rec
}
