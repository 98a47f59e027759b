use num_complex::Complex64;
use num_rational::Ratio;

use super::Subspace;
use crate::additive::PointSet;
use crate::error::{Error, Result};
use crate::group::{unit_root, Group};
use crate::harmonic::{fourier_forward, Measure};
use crate::INCLUSION_SLACK;

/// A coset `x + V` on which `A` is denser than on `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct Increment {
    pub subspace: Subspace,
    /// First element, in canonical order, of a densest coset.
    pub translate: usize,
    /// `|A n (x + V)|`.
    pub count: usize,
    /// `|A n (x + V)| / |V|`.
    pub new_density: Ratio<u64>,
}

/// `1^_A(gamma)` under probability measure, by direct summation over `A`.
pub fn fourier_coefficient(a: &PointSet, gamma: usize) -> Complex64 {
    let g = a.group();
    let sum: Complex64 = a
        .iter()
        .map(|x| {
            let (num, den) = g.phase_idx(gamma, x);
            unit_root((den - num) % den, den)
        })
        .sum();
    sum / g.order() as f64
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name,
            value: v,
            range: "(0, inf)",
        })
    }
}

/// Densest coset of `v`, ties to the first element in canonical order.
fn densest_coset(a: &PointSet, v: Subspace) -> Increment {
    let g = a.group();
    let mut counts = vec![0usize; v.index()];
    for x in a.iter() {
        counts[v.coset_key(x)] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    let translate = g
        .indices()
        .find(|&x| counts[v.coset_key(x)] == best)
        .expect("nonempty group");
    Increment {
        new_density: Ratio::new(best as u64, v.order() as u64),
        count: best,
        translate,
        subspace: v,
    }
}

fn recount(a: &PointSet, inc: &Increment) -> usize {
    let g = a.group();
    a.iter()
        .filter(|&y| inc.subspace.contains(g.sub_idx(y, inc.translate)))
        .count()
}

fn prime_group(a: &PointSet) -> Result<&Group> {
    let g = a.group();
    g.prime_field().ok_or(Error::NotPrimeField)?;
    Ok(g)
}

/// Passes to a coset of `gamma^perp` where `A` has density at least `alpha (1 + eps/2)`.
///
/// Requires `gamma != 0` and `|1^_A(gamma)| >= eps alpha`.
pub fn linf_increment(a: &PointSet, gamma: usize, eps: f64) -> Result<Increment> {
    let g = prime_group(a)?;
    check_positive("eps", eps)?;
    if gamma == 0 {
        return Err(Error::Hypothesis("character must be nontrivial".into()));
    }
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let alpha = a.density_f64();
    let coef = fourier_coefficient(a, gamma).norm();
    if coef < eps * alpha - INCLUSION_SLACK {
        return Err(Error::Hypothesis(format!(
            "|1^_A({})| = {coef} below eps alpha = {}",
            g.character_at(gamma),
            eps * alpha
        )));
    }
    let inc = densest_coset(a, Subspace::annihilator_of(g, &[gamma])?);
    let achieved = inc.count as f64 / inc.subspace.order() as f64;
    if recount(a, &inc) != inc.count || achieved < alpha * (1.0 + eps / 2.0) - INCLUSION_SLACK {
        return Err(Error::Postcondition(format!(
            "coset density {achieved} below alpha (1 + eps/2) = {}",
            alpha * (1.0 + eps / 2.0)
        )));
    }
    Ok(inc)
}

/// `sum_{gamma in W} |1^_A(gamma)|^2`.
pub fn spectral_mass(a: &PointSet, w: &Subspace) -> Result<f64> {
    a.check_same_group(&PointSet::empty(w.group()))?;
    let ft = fourier_forward(&a.indicator(Measure::Probability));
    Ok(w.elements().iter().map(|gm| ft.value(gm).norm_sqr()).sum())
}

/// Passes to a coset of `W^perp` where `A` has density at least `eps`.
///
/// Requires `sum_{gamma in W} |1^_A(gamma)|^2 >= eps alpha`.
pub fn l2_increment(a: &PointSet, w: &Subspace, eps: f64) -> Result<Increment> {
    prime_group(a)?;
    check_positive("eps", eps)?;
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let alpha = a.density_f64();
    let mass = spectral_mass(a, w)?;
    if mass < eps * alpha - INCLUSION_SLACK {
        return Err(Error::Hypothesis(format!(
            "spectral mass {mass} on W below eps alpha = {}",
            eps * alpha
        )));
    }
    let inc = densest_coset(a, w.annihilator());
    let achieved = inc.count as f64 / inc.subspace.order() as f64;
    if recount(a, &inc) != inc.count || achieved < eps - INCLUSION_SLACK {
        return Err(Error::Postcondition(format!(
            "coset density {achieved} below eps = {eps}"
        )));
    }
    Ok(inc)
}

/// `(x + A) n V`, re-expressed in the coordinates of `V`'s row-reduced basis.
pub fn restrict(a: &PointSet, v: &Subspace, x: usize) -> Result<PointSet> {
    a.check_same_group(&PointSet::empty(v.group()))?;
    let target = v.coordinate_group()?;
    let g = a.group();
    let mut out = PointSet::empty(&target);
    for y in a.iter() {
        if let Some(c) = v.coordinates(g.add_idx(x, y)) {
            out.insert(target.index_of(&c));
        }
    }
    Ok(out)
}
