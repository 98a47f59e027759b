use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

use crate::additive::{additive_energy, correlation, spectrum_of_set, sumset, PointSet};
use crate::error::{Error, Result};
use crate::threshold::Threshold;
use crate::INCLUSION_SLACK;

/// Outcome of checking `E(S) >= delta^8 alpha |S|^4`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub energy: u64,
    pub size: usize,
    /// `delta^8 alpha |S|^4`, rounded for display.
    pub bound: f64,
    /// Decided exactly in rational arithmetic.
    pub holds: bool,
}

fn big(n: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Checks the spectral energy bound for `S` inside `Spec_delta(1_A)`.
pub fn energy_bound_check(a: &PointSet, delta: Threshold, s: &PointSet) -> Result<EnergyReport> {
    delta.check_unit_interval("delta")?;
    a.check_same_group(s)?;
    let spec = spectrum_of_set(a, delta.value())?;
    if !s.is_subset(&spec) {
        return Err(Error::Hypothesis("S is not contained in the spectrum".into()));
    }
    let energy = additive_energy(s);
    let d = delta.to_big_rational();
    let alpha = BigRational::new(BigInt::from(a.len()), BigInt::from(a.group().order()));
    let size = big(s.len() as u128);
    let rhs = num_traits::pow(d, 8) * alpha * num_traits::pow(size, 4);
    let holds = big(energy as u128) >= rhs;
    Ok(EnergyReport {
        energy,
        size: s.len(),
        bound: num_traits::ToPrimitive::to_f64(&rhs).unwrap_or(f64::INFINITY),
        holds,
    })
}

/// Exponents of the reported shapes `c^k1 |S|` and `c^-k2`, and the candidate cap.
#[derive(Clone, Debug, PartialEq)]
pub struct BsgConfig {
    pub k1: i32,
    pub k2: i32,
    /// Only the highest-degree vertices (ties by index) seed candidates.
    pub max_candidates: usize,
}

impl Default for BsgConfig {
    fn default() -> Self {
        BsgConfig {
            k1: 3,
            k2: 4,
            max_candidates: 256,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BsgResult {
    pub subset: PointSet,
    pub energy: u64,
    /// `|S'| / |S|`.
    pub fraction: f64,
    /// `|S' + S'| / |S'|`.
    pub doubling: Ratio<u64>,
    /// `c^k1 |S|`.
    pub size_shape: f64,
    /// `c^-k2`.
    pub doubling_shape: f64,
    pub candidates: usize,
}

type Bits = Vec<u64>;

fn popcount_and(a: &Bits, b: &Bits) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

fn bit(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

/// Extracts a subset of small doubling from a set of large energy.
///
/// Vertices of `S` are joined when their difference has at least `(c/2)|S|`
/// representations (loops included). Candidates are neighbourhoods `N(v)` and
/// their refinements keeping `a` with at least `|N(v)|/2` partners `b` in
/// `N(v)` sharing `c^2 |S| / 16` common neighbours. The candidate maximizing
/// `|S'|^2 / (|S| |S'+S'|)` wins, ties to the lowest vertex.
pub fn bsg_extract(s: &PointSet, c: Threshold, cfg: &BsgConfig) -> Result<BsgResult> {
    c.check_unit_interval("c")?;
    let n = s.len();
    if n < 2 {
        return Err(Error::Hypothesis("need |S| >= 2".into()));
    }
    let energy = additive_energy(s);
    if big(energy as u128) < c.to_big_rational() * num_traits::pow(big(n as u128), 3) {
        return Err(Error::Hypothesis(format!("E(S) = {energy} < c |S|^3")));
    }
    let g = s.group();
    let members = s.indices();
    let r = correlation(s, s)?;
    let words = n.div_ceil(64);
    let mut adj: Vec<Bits> = vec![vec![0; words]; n];
    for i in 0..n {
        for j in 0..n {
            if c.admits(2 * r[g.sub_idx(members[i], members[j])], n as u64) {
                adj[i][j / 64] |= 1 << (j % 64);
            }
        }
    }
    let cv = c.value();
    let tau = cv * cv * n as f64 / 16.0 - INCLUSION_SLACK;
    let popular: Vec<Bits> = (0..n)
        .map(|i| {
            let mut row = vec![0u64; words];
            for j in 0..n {
                if popcount_and(&adj[i], &adj[j]) as f64 >= tau {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        })
        .collect();

    let mut seeds: Vec<usize> = (0..n).collect();
    let degree = |v: usize| adj[v].iter().map(|w| w.count_ones()).sum::<u32>();
    seeds.sort_by_key(|&v| (std::cmp::Reverse(degree(v)), v));
    seeds.truncate(cfg.max_candidates.max(1));
    seeds.sort_unstable();

    let mut seen: HashSet<Bits> = HashSet::new();
    let mut best: Option<(PointSet, usize, usize)> = None; // (set, size, sumset size)
    for v in seeds {
        let nv = &adj[v];
        let deg = degree(v) as usize;
        let mut refined = vec![0u64; words];
        for i in (0..n).filter(|&i| bit(nv, i)) {
            if 2 * popcount_and(&popular[i], nv) >= deg {
                refined[i / 64] |= 1 << (i % 64);
            }
        }
        for cand in [nv.clone(), refined] {
            if cand.iter().all(|&w| w == 0) || !seen.insert(cand.clone()) {
                continue;
            }
            let set = PointSet::from_indices(g, (0..n).filter(|&i| bit(&cand, i)).map(|i| members[i]));
            let size = set.len();
            let dsize = sumset(&set, &set)?.len();
            let better = match &best {
                None => true,
                Some((_, bs, bd)) => (size * size * bd) as u128 > (bs * bs * dsize) as u128,
            };
            if better {
                best = Some((set, size, dsize));
            }
        }
    }
    let candidates = seen.len();
    let (subset, size, dsize) = best.expect("every vertex has a loop");
    Ok(BsgResult {
        energy,
        fraction: size as f64 / n as f64,
        doubling: Ratio::new(dsize as u64, size as u64),
        size_shape: cv.powi(cfg.k1) * n as f64,
        doubling_shape: cv.powi(-cfg.k2),
        candidates,
        subset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z(f: &[u64]) -> Group {
        Group::with_default_cap(f).unwrap()
    }

    /// Quadruple count by four nested loops.
    fn energy_oracle(s: &PointSet) -> u64 {
        let g = s.group();
        let m = s.indices();
        let mut count = 0;
        for &a in &m {
            for &b in &m {
                for &c in &m {
                    for &d in &m {
                        if g.sub_idx(a, b) == g.sub_idx(c, d) {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn energy_bound_examples() {
        let g = z(&[3, 3, 3]);
        let h = PointSet::subgroup(&g, &[g.index_of(&[1, 0, 0])]);
        let spec = spectrum_of_set(&h, 1.0).unwrap();
        let r = energy_bound_check(&h, Threshold::one(), &spec).unwrap();
        assert_eq!(r.energy, (spec.len() as u64).pow(3));
        assert!(r.holds);

        let single = PointSet::from_indices(&g, [0]);
        let r = energy_bound_check(&h, Threshold::one(), &single).unwrap();
        assert_eq!(r.energy, 1);
        assert!(r.holds);

        let outside = PointSet::from_indices(&g, [g.index_of(&[1, 0, 0])]);
        assert!(matches!(
            energy_bound_check(&h, Threshold::one(), &outside),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn energy_bound_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = z(&[3, 3, 3]);
        for _ in 0..30 {
            let a = PointSet::from_indices(&g, g.indices().filter(|_| rng.random_bool(1.0 / 3.0)));
            if a.is_empty() {
                continue;
            }
            let spec = spectrum_of_set(&a, 0.5).unwrap();
            let r = energy_bound_check(&a, Threshold::ratio(1, 2), &spec).unwrap();
            assert_eq!(r.energy, energy_oracle(&spec));
            assert!(r.holds);
        }
    }

    #[test]
    fn bsg_examples() {
        let g = z(&[2, 2, 2, 2]);
        let h = PointSet::subgroup(&g, &[1, 2, 4]);
        let r = bsg_extract(&h, Threshold::one(), &BsgConfig::default()).unwrap();
        assert_eq!(r.subset, h);
        assert_eq!(r.doubling, Ratio::from_integer(1));

        let z7 = z(&[7]);
        let pair = PointSet::from_indices(&z7, [2, 5]);
        let r = bsg_extract(&pair, Threshold::ratio(1, 4), &BsgConfig::default()).unwrap();
        assert_eq!(r.subset, pair);
        assert_eq!(r.doubling, Ratio::new(3, 2));

        let spread = PointSet::from_indices(&z(&[101]), [0, 1, 5, 17, 40]);
        assert!(matches!(
            bsg_extract(&spread, Threshold::one(), &BsgConfig::default()),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn bsg_recovers_subgroup_under_noise() {
        let g = z(&[2, 2, 2, 2, 2, 2]);
        let h = PointSet::subgroup(&g, &[1, 2, 4, 8]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = h.clone();
        while s.len() < 20 {
            s.insert(rng.random_range(16..64));
        }
        let r = bsg_extract(&s, Threshold::ratio(1, 8), &BsgConfig::default()).unwrap();
        let dd = sumset(&r.subset, &r.subset).unwrap().len();
        assert_eq!(r.doubling, Ratio::new(dd as u64, r.subset.len() as u64));
        assert!(r.subset.intersection_len(&h) >= 12);
    }
}
