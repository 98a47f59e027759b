//! Seeded generators for test and experiment instances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::additive::{completes_solution, EquationSpec, PointSet};
use crate::error::{Error, Result};
use crate::group::Group;

/// Each element joins independently with probability `density`.
pub fn random_set<R: Rng + ?Sized>(group: &Group, density: f64, rng: &mut R) -> Result<PointSet> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::ParameterOutOfRange {
            name: "density",
            value: density,
            range: "[0, 1]",
        });
    }
    Ok(PointSet::from_indices(
        group,
        group.indices().filter(|_| rng.random_bool(density)),
    ))
}

/// The subgroup generated by `gens` together with `k` distinct points outside it.
pub fn subgroup_plus_noise<R: Rng + ?Sized>(
    group: &Group,
    gens: &[usize],
    k: usize,
    rng: &mut R,
) -> Result<PointSet> {
    let mut s = PointSet::subgroup(group, gens);
    let mut outside: Vec<usize> = group.indices().filter(|&x| !s.contains(x)).collect();
    if k > outside.len() {
        return Err(Error::ParameterOutOfRange {
            name: "noise points",
            value: k as f64,
            range: "at most the subgroup's complement",
        });
    }
    outside.shuffle(rng);
    for &x in &outside[..k] {
        s.insert(x);
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreeMethod {
    /// Visit elements in a random order.
    GreedyRandom,
    /// Visit elements in canonical order.
    GreedyLex,
}

/// A maximal set with no solution in pairwise-distinct elements, built greedily.
pub fn solution_free<R: Rng + ?Sized>(
    group: &Group,
    c: &EquationSpec,
    method: FreeMethod,
    budget: u128,
    rng: &mut R,
) -> Result<PointSet> {
    let mut order: Vec<usize> = group.indices().collect();
    if method == FreeMethod::GreedyRandom {
        order.shuffle(rng);
    }
    let mut a = PointSet::empty(group);
    for x in order {
        if !completes_solution(&a, x, c, budget)? {
            a.insert(x);
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::additive::{find_nondegenerate_solution, DEFAULT_BRUTE_BUDGET};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_set_is_seeded() {
        let g = Group::prime_power(3, 3).unwrap();
        let a = random_set(&g, 0.3, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = random_set(&g, 0.3, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert!(random_set(&g, 1.5, &mut ChaCha8Rng::seed_from_u64(7)).is_err());
        assert_eq!(random_set(&g, 1.0, &mut ChaCha8Rng::seed_from_u64(7)).unwrap().len(), 27);
    }

    #[test]
    fn noise_lands_outside() {
        let g = Group::prime_power(2, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = subgroup_plus_noise(&g, &[1, 2], 4, &mut rng).unwrap();
        assert_eq!(s.len(), 8);
        assert!(subgroup_plus_noise(&g, &[1, 2], 29, &mut rng).is_err());
    }

    #[test]
    fn greedy_sets_are_free_and_maximal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (p, n, coeffs) in [(3u64, 3usize, vec![1i64, 1, 1]), (5, 2, vec![1, 1, 3]), (3, 2, vec![1, 1, 2, 2])] {
            let g = Group::prime_power(p, n).unwrap();
            let c = EquationSpec::new(&coeffs, p as u32).unwrap();
            for method in [FreeMethod::GreedyLex, FreeMethod::GreedyRandom] {
                let a = solution_free(&g, &c, method, DEFAULT_BRUTE_BUDGET, &mut rng).unwrap();
                assert!(find_nondegenerate_solution(&a, &c, DEFAULT_BRUTE_BUDGET).unwrap().is_none());
                for x in g.indices().filter(|&x| !a.contains(x)) {
                    let mut b = a.clone();
                    b.insert(x);
                    assert!(find_nondegenerate_solution(&b, &c, DEFAULT_BRUTE_BUDGET).unwrap().is_some());
                }
            }
        }
    }
}
