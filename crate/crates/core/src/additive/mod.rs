//! Exact set statistics: sumsets, correlations, spectra, symmetry sets,
//! additive energy and solution counts.

mod equation;
mod pointset;

pub use equation::{
    completes_solution, find_nondegenerate_solution, has_nondegenerate_solution, lambda_bruteforce,
    lambda_fourier, solution_count, EquationSpec, DEFAULT_BRUTE_BUDGET,
};
pub use pointset::PointSet;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::harmonic::{fourier_forward, lp_norm, GroupFunction, Measure, Norm, Side};
use crate::threshold::Threshold;
use crate::INCLUSION_SLACK;

/// `A + B`.
pub fn sumset(a: &PointSet, b: &PointSet) -> Result<PointSet> {
    a.check_same_group(b)?;
    let g = a.group();
    let mut out = PointSet::empty(g);
    let bs = b.indices();
    for x in a.iter() {
        for &y in &bs {
            out.insert(g.add_idx(x, y));
        }
    }
    Ok(out)
}

/// `|A + A| / |A|`.
pub fn doubling_constant(a: &PointSet) -> Result<Ratio<u64>> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let aa = sumset(a, a)?;
    Ok(Ratio::new(aa.len() as u64, a.len() as u64))
}

/// `out[x] = #{(a, b) in A x B : a - b = x}`, i.e. `1_A * 1_{-B}` under counting measure.
pub fn correlation(a: &PointSet, b: &PointSet) -> Result<Vec<u64>> {
    a.check_same_group(b)?;
    let g = a.group();
    let mut out = vec![0u64; g.order()];
    let bs = b.indices();
    for x in a.iter() {
        for &y in &bs {
            out[g.sub_idx(x, y)] += 1;
        }
    }
    Ok(out)
}

/// The correlation as a counting-measure function on `G`.
pub fn correlation_function(a: &PointSet, b: &PointSet) -> Result<GroupFunction> {
    let counts = correlation(a, b)?;
    let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    GroupFunction::from_real(a.group().clone(), Side::Primal, Measure::Counting, &values)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name: "delta",
            value: delta,
            range: "(0, 1]",
        })
    }
}

/// `Spec_delta(f) = {gamma : |f^(gamma)| >= delta ||f||_1}`, returned as a set of characters.
///
/// `f` must be primal with probability measure. Comparisons include
/// characters within `INCLUSION_SLACK` of the threshold.
pub fn spectrum(f: &GroupFunction, delta: f64) -> Result<PointSet> {
    Ok(spectrum_with_transform(f, delta)?.0)
}

/// The spectrum together with `|f^|` on the dual, for callers that weight by it.
pub fn spectrum_with_transform(f: &GroupFunction, delta: f64) -> Result<(PointSet, Vec<f64>)> {
    check_delta(delta)?;
    if f.side() != Side::Primal || f.measure() != Measure::Probability {
        return Err(Error::ConventionMismatch);
    }
    let l1 = lp_norm(f, Norm::L1);
    let ft = fourier_forward(f);
    let mags: Vec<f64> = ft.values().iter().map(|v| v.norm()).collect();
    let cut = delta * l1 - INCLUSION_SLACK;
    let spec = PointSet::from_indices(
        f.group(),
        mags.iter().enumerate().filter(|(_, &m)| m >= cut).map(|(i, _)| i),
    );
    Ok((spec, mags))
}

/// `Spec_delta(1_A)`, checked against the Parseval size bound `delta^-2 alpha^-1`.
pub fn spectrum_of_set(a: &PointSet, delta: f64) -> Result<PointSet> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let spec = spectrum(&a.indicator(Measure::Probability), delta)?;
    let bound = 1.0 / (delta * delta * a.density_f64());
    if spec.len() as f64 > bound * (1.0 + 1e-9) + 1e-9 {
        return Err(Error::Postcondition(format!(
            "spectrum size {} exceeds Parseval bound {bound}",
            spec.len()
        )));
    }
    Ok(spec)
}

/// `Sym_eta(A) = {x : 1_A * 1_{-A}(x) >= eta |A|}`, on the exact integer path.
pub fn symmetry_set(a: &PointSet, eta: Threshold) -> Result<PointSet> {
    Ok(symmetry_set_with_counts(a, eta)?.0)
}

/// The symmetry set together with the correlation counts it was cut from.
pub fn symmetry_set_with_counts(a: &PointSet, eta: Threshold) -> Result<(PointSet, Vec<u64>)> {
    eta.check_unit_interval("eta")?;
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let counts = correlation(a, a)?;
    let size = a.len() as u64;
    let sym = PointSet::from_indices(
        a.group(),
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| eta.admits(c, size))
            .map(|(i, _)| i),
    );
    Ok((sym, counts))
}

/// `E(S) = sum_x (1_S * 1_{-S}(x))^2 = #{(a,b,c,d) in S^4 : a - b = c - d}`.
pub fn additive_energy(s: &PointSet) -> u64 {
    correlation(s, s)
        .expect("same group")
        .iter()
        .map(|&r| r * r)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn z(factors: &[u64]) -> Group {
        Group::with_default_cap(factors).unwrap()
    }

    fn set(g: &Group, idx: &[usize]) -> PointSet {
        PointSet::from_indices(g, idx.iter().copied())
    }

    #[test]
    fn sumset_examples() {
        let z5 = z(&[5]);
        let a = set(&z5, &[0, 1]);
        assert_eq!(sumset(&a, &a).unwrap().indices(), vec![0, 1, 2]);
        assert_eq!(doubling_constant(&a).unwrap(), Ratio::new(3, 2));

        let g = z(&[2, 2, 2]);
        let h = PointSet::subgroup(&g, &[1, 2]);
        assert_eq!(doubling_constant(&h).unwrap(), Ratio::from_integer(1));

        let z7 = z(&[7]);
        let a = set(&z7, &[0, 1, 3]);
        assert_eq!(sumset(&a, &a).unwrap().indices(), vec![0, 1, 2, 3, 4, 6]);
        assert_eq!(doubling_constant(&a).unwrap(), Ratio::from_integer(2));

        assert_eq!(doubling_constant(&PointSet::empty(&z7)), Err(Error::EmptySet));
        assert_eq!(sumset(&a, &PointSet::empty(&z5)), Err(Error::GroupMismatch));
    }

    #[test]
    fn correlation_examples() {
        let g = z(&[3, 3]);
        let h = PointSet::subgroup(&g, &[g.index_of(&[1, 1])]);
        let c = correlation(&h, &h).unwrap();
        for x in g.indices() {
            assert_eq!(c[x], if h.contains(x) { 3 } else { 0 });
        }
        let z7 = z(&[7]);
        let a = set(&z7, &[0, 1, 3]);
        assert_eq!(correlation(&a, &a).unwrap(), vec![3, 1, 1, 1, 1, 1, 1]);
        let empty = PointSet::empty(&z7);
        assert!(correlation(&a, &empty).unwrap().iter().all(|&c| c == 0));
    }

    #[test]
    fn spectrum_examples() {
        let g = z(&[2, 2]);
        let a = set(&g, &[0, 1]);
        let spec = spectrum(&a.indicator(Measure::Probability), 1.0).unwrap();
        assert_eq!(spec.indices(), vec![0, 2]); // (0,0), (1,0)

        let z3 = z(&[3]);
        let point = set(&z3, &[0]);
        for delta in [0.1, 0.5, 1.0] {
            assert_eq!(spectrum_of_set(&point, delta).unwrap().len(), 3);
        }
        let full = PointSet::full(&g);
        assert_eq!(spectrum_of_set(&full, 1.0).unwrap().indices(), vec![0]);

        assert!(matches!(
            spectrum_of_set(&a, 0.0),
            Err(Error::ParameterOutOfRange { .. })
        ));
        assert!(matches!(
            spectrum_of_set(&a, 1.5),
            Err(Error::ParameterOutOfRange { .. })
        ));
        let counting = a.indicator(Measure::Counting);
        assert_eq!(spectrum(&counting, 0.5), Err(Error::ConventionMismatch));
    }

    #[test]
    fn symmetry_set_examples() {
        let g = z(&[3, 3]);
        let h = PointSet::subgroup(&g, &[g.index_of(&[0, 1])]);
        assert_eq!(symmetry_set(&h, Threshold::one()).unwrap(), h);

        let z7 = z(&[7]);
        let a = set(&z7, &[0, 1, 3]);
        assert_eq!(symmetry_set(&a, Threshold::ratio(2, 3)).unwrap().indices(), vec![0]);
        assert_eq!(symmetry_set(&a, Threshold::ratio(1, 3)).unwrap().len(), 7);
        assert!(symmetry_set(&a, Threshold::ratio(0, 1)).is_err());
        assert!(symmetry_set(&a, Threshold::ratio(4, 3)).is_err());
        assert_eq!(
            symmetry_set(&PointSet::empty(&z7), Threshold::one()),
            Err(Error::EmptySet)
        );
    }

    #[test]
    fn energy_examples() {
        let g = z(&[2, 2, 2]);
        let h = PointSet::subgroup(&g, &[1, 2]);
        assert_eq!(additive_energy(&h), 64);
        let z7 = z(&[7]);
        assert_eq!(additive_energy(&set(&z7, &[0, 1, 3])), 15);
        assert_eq!(additive_energy(&set(&z7, &[4])), 1);
    }
}
