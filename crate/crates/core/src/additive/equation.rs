use num_rational::Ratio;

use super::PointSet;
use crate::error::{Error, Result};
use crate::group::{is_prime, mod_inverse, Group, GroupElement};
use crate::harmonic::{fourier_forward, Measure};

/// Default cap on enumeration work for exact solution counting and search.
pub const DEFAULT_BRUTE_BUDGET: u128 = 1 << 32;

/// A linear equation `c_1 x_1 + ... + c_r x_r = 0` over `F_p`, all `c_i` units, `r >= 3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSpec {
    coefficients: Vec<u32>,
    modulus: u32,
    balanced: bool,
}

impl EquationSpec {
    /// Reduces `coefficients` mod `p`; negative inputs are allowed.
    pub fn new(coefficients: &[i64], p: u32) -> Result<Self> {
        if coefficients.len() < 3 {
            return Err(Error::Equation(format!(
                "need at least 3 coefficients, got {}",
                coefficients.len()
            )));
        }
        if !is_prime(p as u64) {
            return Err(Error::Equation(format!("modulus {p} is not prime")));
        }
        let reduced: Vec<u32> = coefficients
            .iter()
            .map(|&c| c.rem_euclid(p as i64) as u32)
            .collect();
        if let Some(pos) = reduced.iter().position(|&c| c == 0) {
            return Err(Error::Equation(format!(
                "coefficient c_{} = {} is not a unit mod {p}",
                pos + 1,
                coefficients[pos]
            )));
        }
        let balanced = reduced.iter().map(|&c| c as u64).sum::<u64>() % p as u64 == 0;
        Ok(EquationSpec {
            coefficients: reduced,
            modulus: p,
            balanced,
        })
    }

    /// Builds the equation over the prime field of `group`.
    pub fn for_group(coefficients: &[i64], group: &Group) -> Result<Self> {
        let p = group.prime_field().ok_or(Error::NotPrimeField)?;
        Self::new(coefficients, p)
    }

    pub fn coefficients(&self) -> &[u32] {
        &self.coefficients
    }

    pub fn arity(&self) -> usize {
        self.coefficients.len()
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// `c_1 + ... + c_r = 0` mod `p`.
    pub fn is_balanced(&self) -> bool {
        self.balanced
    }

    fn check_group(&self, group: &Group) -> Result<()> {
        match group.prime_field() {
            None => Err(Error::NotPrimeField),
            Some(p) if p != self.modulus => Err(Error::Equation(format!(
                "equation is over F_{} but the group is over F_{p}",
                self.modulus
            ))),
            Some(_) => Ok(()),
        }
    }
}

/// Number of ordered `(x_1..x_r) in A^r` with `sum c_i x_i = 0`, counted exactly.
///
/// Distributes `c_1 A + ... + c_{r-1} A` over the group one coefficient at a
/// time, then reads off the completions in `A`. Work is
/// `(r - 2) |G| |A|` and must fit `budget`.
pub fn solution_count(a: &PointSet, c: &EquationSpec, budget: u128) -> Result<u128> {
    let g = a.group();
    c.check_group(g)?;
    let r = c.arity();
    let work = (r as u128 - 2) * g.order() as u128 * a.len() as u128;
    if work > budget {
        return Err(Error::BudgetExceeded {
            what: "exact solution count",
            needed: work,
            budget,
        });
    }
    if a.is_empty() {
        return Ok(0);
    }
    let members = a.indices();
    let scaled = |ci: u32| -> Vec<usize> { members.iter().map(|&x| g.mul_idx(ci as u64, x)).collect() };
    let mut dist = vec![0u128; g.order()];
    for y in scaled(c.coefficients[0]) {
        dist[y] += 1;
    }
    for &ci in &c.coefficients[1..r - 1] {
        let shifts = scaled(ci);
        let mut next = vec![0u128; g.order()];
        for (y, &count) in dist.iter().enumerate() {
            if count == 0 {
                continue;
            }
            for &s in &shifts {
                next[g.add_idx(y, s)] += count;
            }
        }
        dist = next;
    }
    // x_r completes y iff c_r x_r = -y.
    let last = c.coefficients[r - 1] as u64;
    Ok(members
        .iter()
        .map(|&x| dist[g.neg_idx(g.mul_idx(last, x))])
        .sum())
}

/// `Lambda_c(A)` as an exact rational: solutions over `|G|^(r-1)`.
pub fn lambda_bruteforce(a: &PointSet, c: &EquationSpec, budget: u128) -> Result<Ratio<u128>> {
    let count = solution_count(a, c, budget)?;
    let order = a.group().order() as u128;
    let den = order
        .checked_pow(c.arity() as u32 - 1)
        .ok_or(Error::BudgetExceeded {
            what: "normalising denominator |G|^(r-1)",
            needed: u128::MAX,
            budget: u128::MAX,
        })?;
    Ok(Ratio::new(count, den))
}

/// `Lambda_c(A) = sum_gamma prod_i 1_A^(c_i . gamma)`, with the probability-normalised transform.
///
/// Orthogonality forces the character on `x_i` to be `c_i . gamma`.
pub fn lambda_fourier(a: &PointSet, c: &EquationSpec) -> Result<f64> {
    let g = a.group();
    c.check_group(g)?;
    let ft = fourier_forward(&a.indicator(Measure::Probability));
    let total: num_complex::Complex64 = g
        .indices()
        .map(|gamma| {
            c.coefficients
                .iter()
                .map(|&ci| ft.value(g.mul_idx(ci as u64, gamma)))
                .product::<num_complex::Complex64>()
        })
        .sum();
    Ok(total.re)
}

struct Search<'a> {
    group: &'a Group,
    members: &'a [usize],
    set: &'a PointSet,
    coefficients: &'a [u32],
    forced: Option<(usize, usize)>,
    solve_pos: usize,
    solve_scale: u64,
    budget: u128,
    work: u128,
}

impl Search<'_> {
    fn run(&mut self, pos: usize, sum: usize, chosen: &mut Vec<usize>) -> Result<Option<Vec<usize>>> {
        let r = self.coefficients.len();
        if pos == r {
            let x = self.group.mul_idx(self.solve_scale, self.group.neg_idx(sum));
            if self.set.contains(x) && !chosen.contains(&x) {
                let mut tuple = chosen.clone();
                tuple.insert(self.solve_pos, x);
                return Ok(Some(tuple));
            }
            return Ok(None);
        }
        if pos == self.solve_pos {
            return self.run(pos + 1, sum, chosen);
        }
        let ci = self.coefficients[pos] as u64;
        let candidates: Vec<usize> = match self.forced {
            Some((fp, fx)) if fp == pos => vec![fx],
            _ => self.members.to_vec(),
        };
        for x in candidates {
            self.work += 1;
            if self.work > self.budget {
                return Err(Error::BudgetExceeded {
                    what: "solution search",
                    needed: self.work,
                    budget: self.budget,
                });
            }
            if chosen.contains(&x) {
                continue;
            }
            chosen.push(x);
            let next = self.group.add_idx(sum, self.group.mul_idx(ci, x));
            let found = self.run(pos + 1, next, chosen)?;
            chosen.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

fn search_with(
    a: &PointSet,
    c: &EquationSpec,
    forced: Option<(usize, usize)>,
    budget: u128,
) -> Result<Option<Vec<usize>>> {
    let g = a.group();
    let r = c.arity();
    let solve_pos = match forced {
        Some((fp, _)) if fp == r - 1 => r - 2,
        _ => r - 1,
    };
    let solve_scale = mod_inverse(c.coefficients[solve_pos] as u64, c.modulus as u64)
        .expect("units checked at construction");
    let members = a.indices();
    let mut search = Search {
        group: g,
        members: &members,
        set: a,
        coefficients: &c.coefficients,
        forced,
        solve_pos,
        solve_scale,
        budget,
        work: 0,
    };
    search.run(0, 0, &mut Vec::with_capacity(r))
}

/// First (lexicographic over `A`'s canonical order) solution with pairwise-distinct coordinates.
pub fn find_nondegenerate_solution(
    a: &PointSet,
    c: &EquationSpec,
    budget: u128,
) -> Result<Option<Vec<usize>>> {
    c.check_group(a.group())?;
    if a.len() < c.arity() {
        return Ok(None);
    }
    search_with(a, c, None, budget)
}

/// Whether `A` contains a solution with pairwise-distinct `x_i`, with a witness when it does.
pub fn has_nondegenerate_solution(
    a: &PointSet,
    c: &EquationSpec,
    budget: u128,
) -> Result<Option<Vec<GroupElement>>> {
    Ok(find_nondegenerate_solution(a, c, budget)?
        .map(|t| t.into_iter().map(|i| a.group().element_at(i)).collect()))
}

/// Whether adding `x` (not in `A`) to `A` creates a nondegenerate solution through `x`.
pub fn completes_solution(a: &PointSet, x: usize, c: &EquationSpec, budget: u128) -> Result<bool> {
    c.check_group(a.group())?;
    if a.contains(x) {
        return Err(Error::Hypothesis(format!("{} is already in the set", a.group().element_at(x))));
    }
    if a.len() + 1 < c.arity() {
        return Ok(false);
    }
    for pos in 0..c.arity() {
        if search_with(a, c, Some((pos, x)), budget)?.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(p: u64, n: usize) -> Group {
        Group::prime_power(p, n).unwrap()
    }

    /// Ordered r-tuple enumeration over A^r.
    fn naive_count(a: &PointSet, c: &EquationSpec) -> u128 {
        let g = a.group();
        let m = a.indices();
        let r = c.arity();
        let mut count = 0;
        let mut idx = vec![0usize; r];
        loop {
            let s = (0..r).fold(0, |acc, i| g.add_idx(acc, g.mul_idx(c.coefficients()[i] as u64, m[idx[i]])));
            if s == 0 {
                count += 1;
            }
            let mut i = r;
            loop {
                if i == 0 {
                    return count;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < m.len() {
                    break;
                }
                idx[i] = 0;
            }
        }
    }

    #[test]
    fn equation_validation() {
        let e = EquationSpec::new(&[1, 1, 2], 3).unwrap();
        assert!(!e.is_balanced());
        assert!(EquationSpec::new(&[1, 1, 1], 3).unwrap().is_balanced());
        assert!(EquationSpec::new(&[1, -2, 1], 5).unwrap().is_balanced());
        assert!(EquationSpec::new(&[1, 1], 3).is_err());
        assert!(EquationSpec::new(&[1, 3, 1], 3).is_err());
        assert!(EquationSpec::new(&[1, 1, 1], 4).is_err());
        let g4 = Group::with_default_cap(&[4]).unwrap();
        assert_eq!(EquationSpec::for_group(&[1, 1, 1], &g4), Err(Error::NotPrimeField));
    }

    #[test]
    fn lambda_examples() {
        let g = zp(3, 1);
        let c = EquationSpec::new(&[1, 1, 1], 3).unwrap();
        let a = PointSet::from_indices(&g, [0, 1]);
        assert_eq!(naive_count(&a, &c), 2);
        assert_eq!(lambda_bruteforce(&a, &c, DEFAULT_BRUTE_BUDGET).unwrap(), Ratio::new(2, 9));
        assert!((lambda_fourier(&a, &c).unwrap() - 2.0 / 9.0).abs() < 1e-9);

        let g = zp(5, 2);
        let c = EquationSpec::new(&[1, 2, 2], 5).unwrap();
        let full = PointSet::full(&g);
        assert_eq!(lambda_bruteforce(&full, &c, DEFAULT_BRUTE_BUDGET).unwrap(), Ratio::from_integer(1));
        assert!((lambda_fourier(&full, &c).unwrap() - 1.0).abs() < 1e-9);

        let empty = PointSet::empty(&g);
        assert_eq!(lambda_bruteforce(&empty, &c, DEFAULT_BRUTE_BUDGET).unwrap(), Ratio::from_integer(0));

        let g7 = zp(7, 1);
        let c = EquationSpec::new(&[1, 2, 3, 1], 7).unwrap();
        let zero = PointSet::from_indices(&g7, [0]);
        assert_eq!(lambda_bruteforce(&zero, &c, DEFAULT_BRUTE_BUDGET).unwrap(), Ratio::new(1, 343));
        assert!((lambda_fourier(&zero, &c).unwrap() - 1.0 / 343.0).abs() < 1e-12);
    }

    #[test]
    fn fourier_scales_by_coefficients() {
        let g = zp(7, 1);
        let c = EquationSpec::new(&[4, 4, 1, 5], 7).unwrap();
        let a = PointSet::from_indices(&g, [1, 5]);
        assert_eq!(naive_count(&a, &c), 2);
        assert!((lambda_fourier(&a, &c).unwrap() - 2.0 / 343.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn fourier_matches_enumeration(
            p in proptest::sample::select(vec![5u32, 7]),
            mask in proptest::collection::vec(proptest::bool::ANY, 25),
            raw in proptest::collection::vec(1i64..7, 2..4),
        ) {
            let g = zp(p as u64, if p == 5 { 2 } else { 1 });
            let a = PointSet::from_indices(&g, g.indices().filter(|&x| mask[x % 25]));
            let mut coeffs: Vec<i64> = raw.iter().map(|&v| (v % p as i64).max(1)).collect();
            let last = (-coeffs.iter().sum::<i64>()).rem_euclid(p as i64);
            proptest::prop_assume!(last != 0 && !a.is_empty());
            coeffs.push(last);
            let c = EquationSpec::new(&coeffs, p).unwrap();
            let n = naive_count(&a, &c) as f64;
            let expect = n / (g.order() as f64).powi(coeffs.len() as i32 - 1);
            proptest::prop_assert!((lambda_fourier(&a, &c).unwrap() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_count_matches_enumeration() {
        let g = zp(3, 2);
        let c = EquationSpec::new(&[1, 2, 1, 2], 3).unwrap();
        let a = PointSet::from_indices(&g, [0, 2, 4, 7]);
        assert_eq!(solution_count(&a, &c, DEFAULT_BRUTE_BUDGET).unwrap(), naive_count(&a, &c));
    }

    #[test]
    fn budgets_are_enforced() {
        let g = zp(3, 3);
        let c = EquationSpec::new(&[1, 1, 1], 3).unwrap();
        let a = PointSet::full(&g);
        assert!(matches!(lambda_bruteforce(&a, &c, 10), Err(Error::BudgetExceeded { .. })));
        let sparse = PointSet::from_indices(&g, [1, 2, 4, 8, 16]);
        assert!(matches!(
            has_nondegenerate_solution(&sparse, &c, 3),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn wrong_field_is_rejected() {
        let g = zp(5, 1);
        let c = EquationSpec::new(&[1, 1, 1], 3).unwrap();
        assert!(matches!(lambda_fourier(&PointSet::full(&g), &c), Err(Error::Equation(_))));
    }

    #[test]
    fn nondegenerate_examples() {
        let g = zp(3, 1);
        let c = EquationSpec::new(&[1, 1, 1], 3).unwrap();
        let all = PointSet::full(&g);
        let w = has_nondegenerate_solution(&all, &c, DEFAULT_BRUTE_BUDGET).unwrap().unwrap();
        let coords: Vec<u32> = w.iter().map(|e| e.coords[0]).collect();
        assert_eq!(coords, vec![0, 1, 2]);

        let two = PointSet::from_indices(&g, [0, 1]);
        assert_eq!(has_nondegenerate_solution(&two, &c, DEFAULT_BRUTE_BUDGET).unwrap(), None);

        let g = zp(3, 3);
        let line = PointSet::from_indices(&g, [0, 1, 2]); // (0,0,0),(0,0,1),(0,0,2)
        assert!(has_nondegenerate_solution(&line, &c, DEFAULT_BRUTE_BUDGET).unwrap().is_some());
    }

    #[test]
    fn completion_agrees_with_full_search() {
        let g = zp(3, 2);
        let c = EquationSpec::new(&[1, 1, 1], 3).unwrap();
        let a = PointSet::from_indices(&g, [0, 1]);
        for x in 2..9 {
            let mut with = a.clone();
            with.insert(x);
            let full = find_nondegenerate_solution(&with, &c, DEFAULT_BRUTE_BUDGET).unwrap().is_some();
            assert_eq!(completes_solution(&a, x, &c, DEFAULT_BRUTE_BUDGET).unwrap(), full);
        }
    }
}
