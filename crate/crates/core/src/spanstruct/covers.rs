use num_rational::Ratio;
use num_traits::ToPrimitive;

use super::{maximal_dissociated_cover, CoverCertificate, SpanBasis, DEFAULT_SPAN_LIMIT};
use crate::additive::{correlation, spectrum_with_transform, sumset, symmetry_set_with_counts, PointSet};
use crate::error::{Error, Result};
use crate::harmonic::{fourier_forward, fourier_invert, lp_norm, support_convolution, GroupFunction, Measure, Norm};
use crate::threshold::Threshold;

/// Constants for the size-bound budgets and search limits of the cover procedures.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverConstants {
    pub chang: f64,
    pub shkredov: f64,
    pub symset: f64,
    /// `C` in `C K^eta log|A|` for the correlated span.
    pub correlated_size: f64,
    /// `C` in `K^{-exp(C/eta)} |A|` for the correlated-span overlap.
    pub correlated_overlap: f64,
    /// `C` in the core-subset lower bound `exp(-K^{C/log(1/(1-eps))} log K) |A|`.
    pub core: f64,
    /// Largest `|A|` searched exhaustively by the correlated span.
    pub exhaustive_max: usize,
    /// Maximum number of subsets evaluated by a core search.
    pub core_budget: u64,
    /// Maximum `|L|` for span enumeration.
    pub span_limit: usize,
}

impl Default for CoverConstants {
    fn default() -> Self {
        CoverConstants {
            chang: 8.0,
            shkredov: 8.0,
            symset: 8.0,
            correlated_size: 8.0,
            correlated_overlap: 1.0,
            core: 1.0,
            exhaustive_max: 14,
            core_budget: 1 << 16,
            span_limit: DEFAULT_SPAN_LIMIT,
        }
    }
}

fn counts_as_weights(counts: &[u64]) -> Vec<f64> {
    counts.iter().map(|&c| c as f64).collect()
}

/// Cover of a large spectrum.
#[derive(Clone, Debug)]
pub struct ChangCover {
    pub spectrum: PointSet,
    /// `log(||f||_2^2 / ||f||_1^2)`.
    pub log_ratio: f64,
    pub certificate: CoverCertificate,
}

/// Covers `Spec_delta(f)` by the span of a greedy dissociated subset, heaviest `|f^|` first.
///
/// Budget: `C delta^-2 log(||f||_2^2 / ||f||_1^2)`.
pub fn chang_spectrum_cover(f: &GroupFunction, delta: f64, consts: &CoverConstants) -> Result<ChangCover> {
    let (spec, mags) = spectrum_with_transform(f, delta)?;
    let l1 = lp_norm(f, Norm::L1);
    if l1 == 0.0 {
        return Err(Error::Hypothesis("function vanishes identically".into()));
    }
    let l2 = lp_norm(f, Norm::L2);
    let log_ratio = (l2 * l2 / (l1 * l1)).ln().max(0.0);
    let basis = maximal_dissociated_cover(&spec, Some(&mags));
    let budget = consts.chang * log_ratio / (delta * delta);
    let certificate = CoverCertificate::certify(spec.clone(), basis, None, budget, consts.span_limit)?;
    Ok(ChangCover {
        spectrum: spec,
        log_ratio,
        certificate,
    })
}

/// Cover of `B` through the threshold set `T = {x : 1_{B+A} * 1_{-A}(x) >= |A|}`.
#[derive(Clone, Debug)]
pub struct ShkredovCover {
    pub threshold_set: PointSet,
    pub sumset_size: usize,
    /// `|B + A| / |A|`.
    pub doubling: Ratio<u64>,
    /// Certificate with target `B`.
    pub certificate: CoverCertificate,
}

/// Covers `B` by a dissociated subset of `T`; every `b` in `B` lies in `T` since `b + A` sits in `B + A`.
///
/// Budget: `C K log|A|` with `K = |B+A|/|A|`.
pub fn shkredov_asym_cover(a: &PointSet, b: &PointSet, consts: &CoverConstants) -> Result<ShkredovCover> {
    a.check_same_group(b)?;
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let ba = sumset(b, a)?;
    let counts = correlation(&ba, a)?;
    let size = a.len() as u64;
    let t = PointSet::from_indices(
        a.group(),
        counts.iter().enumerate().filter(|(_, &c)| c >= size).map(|(i, _)| i),
    );
    if !b.is_subset(&t) {
        return Err(Error::Postcondition("B not contained in the threshold set".into()));
    }
    let basis = maximal_dissociated_cover(&t, Some(&counts_as_weights(&counts)));
    let doubling = Ratio::new(ba.len() as u64, size);
    let k = ba.len() as f64 / size as f64;
    let budget = consts.shkredov * k * (size as f64).ln();
    let certificate = CoverCertificate::certify(b.clone(), basis, None, budget, consts.span_limit)?;
    Ok(ShkredovCover {
        threshold_set: t,
        sumset_size: ba.len(),
        doubling,
        certificate,
    })
}

/// Dual-side norms of `g = 1^_{B+A} conj(1^_A)` (transforms taken from counting measure).
#[derive(Clone, Debug, PartialEq)]
pub struct ShkredovAudit {
    pub g_l1: f64,
    /// `sqrt(K) |A|`.
    pub l1_bound: f64,
    pub g_l2_squared: f64,
    /// `K |A|^3`.
    pub l2_bound: f64,
    /// `max_x |g^vee(x) - 1_{B+A} * 1_{-A}(x)|`.
    pub inversion_error: f64,
}

pub fn shkredov_audit(a: &PointSet, b: &PointSet) -> Result<ShkredovAudit> {
    a.check_same_group(b)?;
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let ba = sumset(b, a)?;
    let fx = fourier_forward(&ba.indicator(Measure::Counting));
    let fa = fourier_forward(&a.indicator(Measure::Counting));
    let g = fx.pointwise_mul(&fa.map(|v| v.conj()))?;
    let inv = fourier_invert(&g);
    let counts = correlation(&ba, a)?;
    let inversion_error = inv
        .values()
        .iter()
        .zip(&counts)
        .map(|(v, &c)| (v - c as f64).norm())
        .fold(0.0, f64::max);
    let size = a.len() as f64;
    let k = ba.len() as f64 / size;
    let l2 = lp_norm(&g, Norm::L2);
    Ok(ShkredovAudit {
        g_l1: lp_norm(&g, Norm::L1),
        l1_bound: k.sqrt() * size,
        g_l2_squared: l2 * l2,
        l2_bound: k * size.powi(3),
        inversion_error,
    })
}

/// Cover of a symmetry set.
#[derive(Clone, Debug)]
pub struct SymsetCover {
    pub symmetry_set: PointSet,
    pub certificate: CoverCertificate,
}

/// Covers `Sym_eta(A)`, heaviest correlation first. Budget: `C eta^-2 log|A|`.
pub fn symset_cover(a: &PointSet, eta: Threshold, consts: &CoverConstants) -> Result<SymsetCover> {
    let (sym, counts) = symmetry_set_with_counts(a, eta)?;
    let basis = maximal_dissociated_cover(&sym, Some(&counts_as_weights(&counts)));
    let e = eta.value();
    let budget = consts.symset * (a.len() as f64).ln() / (e * e);
    let certificate = CoverCertificate::certify(sym.clone(), basis, None, budget, consts.span_limit)?;
    Ok(SymsetCover {
        symmetry_set: sym,
        certificate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoreMode {
    Exhaustive,
    Greedy,
}

/// Result of searching `A' <= A` for a large `Sym_{1-eps}(A' + A)`.
#[derive(Clone, Debug)]
pub struct CoreSubset {
    pub subset: PointSet,
    pub sym_size: usize,
    pub evaluated: u64,
    /// `exp(-K^{C/log(1/(1-eps))} log K) |A|`.
    pub lower_bound: f64,
    pub mode: CoreMode,
}

/// Maximum `|A|` accepted by exhaustive core search.
pub const EXHAUSTIVE_CORE_MAX: usize = 14;

/// `core_subset_search_at_level` with level `1 - eps`.
pub fn core_subset_search(
    a: &PointSet,
    eps: Threshold,
    mode: CoreMode,
    budget: u64,
    consts: &CoverConstants,
) -> Result<CoreSubset> {
    eps.check_unit_interval("eps")?;
    core_subset_search_at_level(a, eps.complement(), mode, budget, consts)
}

/// Searches nonempty `A' <= A` maximizing `|Sym_level(A' + A)|`.
///
/// Exhaustive mode visits subsets in increasing bitmask order and keeps the
/// first strict maximum. Greedy mode repeatedly deletes the element whose
/// removal most increases the count, stopping at a local optimum.
pub fn core_subset_search_at_level(
    a: &PointSet,
    level: Threshold,
    mode: CoreMode,
    budget: u64,
    consts: &CoverConstants,
) -> Result<CoreSubset> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let members = a.indices();
    let n = members.len();
    let eval = |sub: &PointSet| -> Result<usize> {
        let x = sumset(sub, a)?;
        let counts = correlation(&x, &x)?;
        let size = x.len() as u64;
        Ok(counts.iter().filter(|&&c| level.admits(c, size)).count())
    };
    let (subset, sym_size, evaluated) = match mode {
        CoreMode::Exhaustive => {
            if n > EXHAUSTIVE_CORE_MAX {
                return Err(Error::BudgetExceeded {
                    what: "exhaustive core search size",
                    needed: n as u128,
                    budget: EXHAUSTIVE_CORE_MAX as u128,
                });
            }
            let total = (1u64 << n) - 1;
            if total > budget {
                return Err(Error::BudgetExceeded {
                    what: "core search evaluations",
                    needed: total as u128,
                    budget: budget as u128,
                });
            }
            let mut best: Option<(PointSet, usize)> = None;
            for mask in 1..=total {
                let sub = PointSet::from_indices(
                    a.group(),
                    (0..n).filter(|i| mask >> i & 1 == 1).map(|i| members[i]),
                );
                let v = eval(&sub)?;
                if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                    best = Some((sub, v));
                }
            }
            let (s, v) = best.expect("at least one subset");
            (s, v, total)
        }
        CoreMode::Greedy => {
            let mut current = a.clone();
            let mut value = eval(&current)?;
            let mut evaluated = 1u64;
            loop {
                let mut best: Option<(usize, usize)> = None;
                if current.len() > 1 {
                    for e in current.indices() {
                        if evaluated >= budget {
                            return Err(Error::BudgetExceeded {
                                what: "core search evaluations",
                                needed: evaluated as u128 + 1,
                                budget: budget as u128,
                            });
                        }
                        let mut cand = current.clone();
                        cand.remove(e);
                        let v = eval(&cand)?;
                        evaluated += 1;
                        if v > best.map_or(value, |(_, bv)| bv) {
                            best = Some((e, v));
                        }
                    }
                }
                match best {
                    Some((e, v)) => {
                        current.remove(e);
                        value = v;
                    }
                    None => break,
                }
            }
            (current, value, evaluated)
        }
    };
    let eps = 1.0 - level.value();
    let k = sumset(a, a)?.len() as f64 / n as f64;
    let d = -(1.0 - eps).ln();
    let exponent = if d > 0.0 { consts.core / d } else { f64::INFINITY };
    let lower_bound = (-(k.powf(exponent)) * k.ln()).exp() * n as f64;
    Ok(CoreSubset {
        subset,
        sym_size,
        evaluated,
        lower_bound,
        mode,
    })
}

/// Output of the correlated-span pipeline.
#[derive(Clone, Debug)]
pub struct CorrelatedSpan {
    pub doubling: Ratio<u64>,
    /// `K^{-eta/2}`.
    pub level: Threshold,
    pub core: CoreSubset,
    /// `Sym_level(A' + A)`.
    pub symmetry_set: PointSet,
    /// Target `A`, basis `L`, translate `x`.
    pub certificate: CoverCertificate,
    /// `L u {x}` (just `L` when `x` is 0 or already in `L`).
    pub extended_basis: SpanBasis,
    /// `|A n Span(L')|`.
    pub extended_overlap: usize,
    /// `x + S` lies in `Span(L')`.
    pub translate_contained: bool,
    /// `C K^eta log|A|`.
    pub size_budget: f64,
    /// `K^{-exp(C/eta)} |A|`.
    pub overlap_shape: f64,
}

/// Finds a small basis whose span meets `A` in a large set.
///
/// `A'` comes from core search at level `K^{-eta/2}`, `S = Sym(A' + A)` is
/// covered greedily by `L`, and `x` is the first maximizer of `1_A * 1_S`.
pub fn correlated_span(a: &PointSet, eta: f64, consts: &CoverConstants) -> Result<CorrelatedSpan> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "eta",
            value: eta,
            range: "(0, 1]",
        });
    }
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let group = a.group();
    let doubling = Ratio::new(sumset(a, a)?.len() as u64, a.len() as u64);
    let k = doubling.to_f64().expect("finite ratio");
    let level = if doubling == Ratio::from_integer(1) {
        Threshold::one()
    } else {
        Threshold::Real(k.powf(-eta / 2.0))
    };
    let mode = if a.len() <= consts.exhaustive_max.min(EXHAUSTIVE_CORE_MAX) {
        CoreMode::Exhaustive
    } else {
        CoreMode::Greedy
    };
    let core = core_subset_search_at_level(a, level, mode, consts.core_budget, consts)?;
    let x_set = sumset(&core.subset, a)?;
    let (sym, counts) = symmetry_set_with_counts(&x_set, level)?;
    let basis = maximal_dissociated_cover(&sym, Some(&counts_as_weights(&counts)));

    let hits = support_convolution(group, &a.indices(), &sym.indices());
    let best = hits.iter().copied().max().unwrap_or(0);
    let x = hits.iter().position(|&h| h == best).unwrap_or(0);

    let mut extended = basis.indices().to_vec();
    if x != 0 && !extended.contains(&x) {
        extended.push(x);
    }
    let extended_basis = SpanBasis::new(group, extended)?;
    let ext_span = super::span_enumerate(&extended_basis, consts.span_limit)?;
    let extended_overlap = a.intersection_len(&ext_span);
    let translate_contained = sym.translate(x).is_subset(&ext_span);

    let n = a.len() as f64;
    let size_budget = consts.correlated_size * k.powf(eta) * n.ln();
    let overlap_shape = k.powf(-(consts.correlated_overlap / eta).exp()) * n;
    let certificate = CoverCertificate::certify(a.clone(), basis, Some(x), size_budget, consts.span_limit)?;
    Ok(CorrelatedSpan {
        doubling,
        level,
        core,
        symmetry_set: sym,
        certificate,
        extended_basis,
        extended_overlap,
        translate_contained,
        size_budget,
        overlap_shape,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;
    use crate::spanstruct::span_enumerate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z(f: &[u64]) -> Group {
        Group::with_default_cap(f).unwrap()
    }

    fn consts() -> CoverConstants {
        CoverConstants::default()
    }

    #[test]
    fn chang_examples() {
        let g = z(&[2, 2, 2, 2]);
        let h = PointSet::subgroup(&g, &[g.index_of(&[1, 0, 0, 0]), g.index_of(&[0, 1, 0, 0])]);
        let c = chang_spectrum_cover(&h.indicator(Measure::Probability), 1.0, &consts()).unwrap();
        assert_eq!(c.spectrum.len(), 4);
        assert_eq!(c.certificate.basis().len(), 2);
        assert!(c.certificate.contained());

        let z3 = z(&[3]);
        let point = PointSet::from_indices(&z3, [0]);
        let c = chang_spectrum_cover(&point.indicator(Measure::Probability), 1.0, &consts()).unwrap();
        assert_eq!(c.spectrum.len(), 3);
        assert_eq!(c.certificate.basis().len(), 1);
        assert!(c.certificate.contained());

        let full = PointSet::full(&g);
        let c = chang_spectrum_cover(&full.indicator(Measure::Probability), 1.0, &consts()).unwrap();
        assert_eq!(c.spectrum.indices(), vec![0]);
        assert!(c.certificate.basis().is_empty());
        assert_eq!(c.log_ratio, 0.0);
    }

    #[test]
    fn shkredov_examples() {
        let g = z(&[3, 3]);
        let h = PointSet::subgroup(&g, &[g.index_of(&[0, 1])]);
        let b = PointSet::from_indices(&g, [g.index_of(&[1, 2])]);
        let c = shkredov_asym_cover(&h, &b, &consts()).unwrap();
        assert!(c.threshold_set.contains(b.indices()[0]));
        assert!(c.certificate.contained());

        let c = shkredov_asym_cover(&h, &h, &consts()).unwrap();
        assert_eq!(c.threshold_set, h);
        assert_eq!(c.certificate.basis().len(), 1);

        let z7 = z(&[7]);
        let a = PointSet::from_indices(&z7, [0, 1, 3]);
        let b = PointSet::from_indices(&z7, [0]);
        let c = shkredov_asym_cover(&a, &b, &consts()).unwrap();
        assert_eq!(c.threshold_set.indices(), vec![0]);
        assert!(c.certificate.basis().is_empty());
        assert!(c.certificate.contained());

        assert!(matches!(
            shkredov_asym_cover(&PointSet::empty(&z7), &b, &consts()),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn shkredov_audit_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = z(&[3, 3, 3]);
        for _ in 0..20 {
            let a = PointSet::from_indices(&g, g.indices().filter(|_| rng.random_bool(0.3)));
            let b = PointSet::from_indices(&g, g.indices().filter(|_| rng.random_bool(0.2)));
            if a.is_empty() {
                continue;
            }
            let audit = shkredov_audit(&a, &b).unwrap();
            assert!(audit.g_l1 <= audit.l1_bound * (1.0 + 1e-9) + 1e-9);
            assert!(audit.g_l2_squared <= audit.l2_bound * (1.0 + 1e-9) + 1e-9);
            assert!(audit.inversion_error < 1e-9);
        }
    }

    #[test]
    fn symset_examples() {
        let g = z(&[3, 3]);
        let h = PointSet::subgroup(&g, &[g.index_of(&[1, 1])]);
        let c = symset_cover(&h, Threshold::one(), &consts()).unwrap();
        assert_eq!(c.symmetry_set, h);
        assert_eq!(c.certificate.basis().len(), 1);

        let z7 = z(&[7]);
        let a = PointSet::from_indices(&z7, [0, 1, 3]);
        let c = symset_cover(&a, Threshold::ratio(2, 3), &consts()).unwrap();
        assert_eq!(c.symmetry_set.indices(), vec![0]);
        assert!(c.certificate.basis().is_empty());

        let c = symset_cover(&a, Threshold::ratio(1, 7), &consts()).unwrap();
        assert_eq!(c.symmetry_set.len(), 7);
        assert_eq!(c.certificate.basis().len(), 2);
        assert!(c.certificate.contained());
    }

    /// Evaluates every nonempty subset directly.
    fn core_oracle(a: &PointSet, level: Threshold) -> usize {
        let m = a.indices();
        (1u32..1 << m.len())
            .map(|mask| {
                let sub = PointSet::from_indices(
                    a.group(),
                    (0..m.len()).filter(|i| mask >> i & 1 == 1).map(|i| m[i]),
                );
                let mut x = PointSet::empty(a.group());
                for s in sub.iter() {
                    for t in a.iter() {
                        x.insert(a.group().add_idx(s, t));
                    }
                }
                let xs = x.indices();
                a.group()
                    .indices()
                    .filter(|&d| {
                        let c = xs.iter().filter(|&&p| x.contains(a.group().sub_idx(p, d))).count() as u64;
                        level.admits(c, x.len() as u64)
                    })
                    .count()
            })
            .max()
            .unwrap()
    }

    #[test]
    fn core_search_examples() {
        let g = z(&[3, 3]);
        let h = PointSet::subgroup(&g, &[g.index_of(&[1, 1])]);
        let r = core_subset_search(&h, Threshold::ratio(1, 2), CoreMode::Exhaustive, 1 << 20, &consts()).unwrap();
        assert_eq!(r.sym_size, 3);
        assert_eq!(r.evaluated, 7);

        let z7 = z(&[7]);
        let one = PointSet::from_indices(&z7, [4]);
        let r = core_subset_search(&one, Threshold::ratio(1, 2), CoreMode::Exhaustive, 1 << 20, &consts()).unwrap();
        assert_eq!(r.subset, one);
        assert_eq!(r.sym_size, 1);

        let a = PointSet::from_indices(&z7, [0, 1, 3]);
        let r = core_subset_search(&a, Threshold::ratio(1, 2), CoreMode::Exhaustive, 1 << 20, &consts()).unwrap();
        assert_eq!(r.evaluated, 7);
        assert_eq!(r.sym_size, core_oracle(&a, Threshold::ratio(1, 2)));

        let greedy = core_subset_search(&a, Threshold::ratio(1, 2), CoreMode::Greedy, 1 << 20, &consts()).unwrap();
        assert!(greedy.sym_size <= r.sym_size);
        assert!(!greedy.subset.is_empty() && greedy.subset.is_subset(&a));

        assert!(matches!(
            core_subset_search(&a, Threshold::ratio(1, 2), CoreMode::Exhaustive, 3, &consts()),
            Err(Error::BudgetExceeded { .. })
        ));
        let big = PointSet::from_indices(&z(&[31]), 0..15);
        assert!(matches!(
            core_subset_search(&big, Threshold::ratio(1, 2), CoreMode::Exhaustive, u64::MAX, &consts()),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn core_search_matches_oracle_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = z(&[11]);
        for _ in 0..15 {
            let a = PointSet::from_indices(&g, g.indices().filter(|_| rng.random_bool(0.4)));
            if a.is_empty() {
                continue;
            }
            let level = Threshold::ratio(rng.random_range(1..=4), 4);
            let r = core_subset_search_at_level(&a, level, CoreMode::Exhaustive, 1 << 20, &consts()).unwrap();
            assert_eq!(r.sym_size, core_oracle(&a, level));
        }
    }

    #[test]
    fn correlated_span_examples() {
        let g = z(&[3, 3, 3]);
        let h = PointSet::subgroup(&g, &[g.index_of(&[1, 0, 0]), g.index_of(&[0, 1, 0])]);
        let r = correlated_span(&h, 1.0, &consts()).unwrap();
        assert_eq!(r.symmetry_set, h);
        assert_eq!(span_enumerate(r.certificate.basis(), 20).unwrap(), h);
        assert_eq!(r.certificate.translate_index(), Some(0));
        assert_eq!(r.certificate.overlap(), 9);

        let one = PointSet::from_indices(&g, [g.index_of(&[2, 1, 0])]);
        let r = correlated_span(&one, 1.0, &consts()).unwrap();
        assert_eq!(r.extended_basis.indices(), &[g.index_of(&[2, 1, 0])]);
        assert_eq!(r.certificate.overlap(), 1);
        assert_eq!(r.extended_overlap, 1);

        let mut hg = h.clone();
        hg.insert(g.index_of(&[1, 1, 1]));
        let r = correlated_span(&hg, 1.0, &consts()).unwrap();
        let span = span_enumerate(r.certificate.basis(), 20).unwrap();
        let x = r.certificate.translate_index().unwrap();
        assert_eq!(r.certificate.overlap(), hg.intersection_len(&span.translate(x)));
        assert!(r.certificate.overlap() >= 9);
        assert!(r.translate_contained);
    }
}
