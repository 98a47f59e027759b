//! Finite abelian groups `Z_{m1} x ... x Z_{mk}`.
//!
//! Elements and characters share one coordinate shape (the dual of a
//! finite abelian group is isomorphic to it) and one canonical index: the
//! mixed-radix lexicographic order with the first coordinate most
//! significant. Every tie-break in the crate defaults to this order.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on group order; all functions on a group are dense arrays.
pub const DEFAULT_MAX_ORDER: usize = 1 << 20;

/// A finite abelian group given as a product of cyclic factors.
///
/// Cheap to clone; equality compares the factor lists.
#[derive(Clone)]
pub struct Group(Arc<GroupData>);

struct GroupData {
    factors: Vec<u32>,
    strides: Vec<usize>,
    order: usize,
    prime: Option<u32>,
    lcm: u64,
}

/// An element of a group, as reduced residues per cyclic factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub coords: Vec<u32>,
}

/// A character of the group, identified with `x -> exp(2 pi i sum coords_i x_i / m_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Character {
    pub coords: Vec<u32>,
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

impl Group {
    /// Builds `Z_{f1} x ... x Z_{fk}`, rejecting factors below 2 and orders above `max_order`.
    pub fn new(factors: &[u64], max_order: usize) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::FactorTooSmall(1));
        }
        let mut order: u128 = 1;
        for &m in factors {
            if m < 2 {
                return Err(Error::FactorTooSmall(m));
            }
            order = order.saturating_mul(m as u128);
            if order > max_order as u128 {
                return Err(Error::OrderExceeded {
                    order,
                    max: max_order,
                });
            }
        }
        let factors: Vec<u32> = factors.iter().map(|&m| m as u32).collect();
        let mut strides = vec![1usize; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1] as usize;
        }
        let first = factors[0];
        let prime = (factors.iter().all(|&m| m == first) && is_prime(first as u64)).then_some(first);
        let lcm = factors
            .iter()
            .fold(1u64, |acc, &m| acc / gcd(acc, m as u64) * m as u64);
        Ok(Group(Arc::new(GroupData {
            factors,
            strides,
            order: order as usize,
            prime,
            lcm,
        })))
    }

    /// Builds a group with the default order cap.
    pub fn with_default_cap(factors: &[u64]) -> Result<Self> {
        Self::new(factors, DEFAULT_MAX_ORDER)
    }

    /// `F_p^n` as `Z_p^n`.
    pub fn prime_power(p: u64, n: usize) -> Result<Self> {
        Self::with_default_cap(&vec![p; n])
    }

    pub fn factors(&self) -> &[u32] {
        &self.0.factors
    }

    pub fn rank(&self) -> usize {
        self.0.factors.len()
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    /// The prime `p` when the group is `F_p^n`.
    pub fn prime_field(&self) -> Option<u32> {
        self.0.prime
    }

    pub fn strides(&self) -> &[usize] {
        &self.0.strides
    }

    fn require_prime(&self) -> Result<u32> {
        self.0.prime.ok_or(Error::NotPrimeField)
    }

    /// Canonical index of already-reduced coordinates.
    pub fn index_of(&self, coords: &[u32]) -> usize {
        coords
            .iter()
            .zip(&self.0.strides)
            .map(|(&c, &s)| c as usize * s)
            .sum()
    }

    pub fn coords_of(&self, mut idx: usize) -> Vec<u32> {
        let mut out = vec![0u32; self.rank()];
        for (i, &s) in self.0.strides.iter().enumerate() {
            out[i] = (idx / s) as u32;
            idx %= s;
        }
        out
    }

    /// Validates raw residues against the factor shape.
    pub fn element(&self, coords: &[u64]) -> Result<GroupElement> {
        Ok(GroupElement {
            coords: self.checked_coords(coords)?,
        })
    }

    pub fn character(&self, coords: &[u64]) -> Result<Character> {
        Ok(Character {
            coords: self.checked_coords(coords)?,
        })
    }

    fn checked_coords(&self, coords: &[u64]) -> Result<Vec<u32>> {
        if coords.len() != self.rank() {
            return Err(Error::ShapeMismatch {
                expected: self.rank(),
                got: coords.len(),
            });
        }
        coords
            .iter()
            .zip(self.factors())
            .map(|(&c, &m)| {
                if c < m as u64 {
                    Ok(c as u32)
                } else {
                    Err(Error::ResidueOutOfRange { value: c, modulus: m })
                }
            })
            .collect()
    }

    fn check_shape(&self, coords: &[u32]) -> Result<()> {
        if coords.len() != self.rank() {
            return Err(Error::ShapeMismatch {
                expected: self.rank(),
                got: coords.len(),
            });
        }
        for (&c, &m) in coords.iter().zip(self.factors()) {
            if c >= m {
                return Err(Error::ResidueOutOfRange {
                    value: c as u64,
                    modulus: m,
                });
            }
        }
        Ok(())
    }

    pub fn element_at(&self, idx: usize) -> GroupElement {
        GroupElement {
            coords: self.coords_of(idx),
        }
    }

    pub fn character_at(&self, idx: usize) -> Character {
        Character {
            coords: self.coords_of(idx),
        }
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.rank()],
        }
    }

    pub fn element_index(&self, x: &GroupElement) -> Result<usize> {
        self.check_shape(&x.coords)?;
        Ok(self.index_of(&x.coords))
    }

    pub fn character_index(&self, g: &Character) -> Result<usize> {
        self.check_shape(&g.coords)?;
        Ok(self.index_of(&g.coords))
    }

    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        let (mut ra, mut rb) = (a, b);
        for (&s, &m) in self.0.strides.iter().zip(&self.0.factors) {
            let (da, db) = (ra / s, rb / s);
            ra %= s;
            rb %= s;
            let mut d = da + db;
            if d >= m as usize {
                d -= m as usize;
            }
            out += d * s;
        }
        out
    }

    pub fn neg_idx(&self, a: usize) -> usize {
        let mut out = 0;
        let mut ra = a;
        for (&s, &m) in self.0.strides.iter().zip(&self.0.factors) {
            let d = ra / s;
            ra %= s;
            out += if d == 0 { 0 } else { (m as usize - d) * s };
        }
        out
    }

    /// Index of `a - b`.
    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        let (mut ra, mut rb) = (a, b);
        for (&s, &m) in self.0.strides.iter().zip(&self.0.factors) {
            let (da, db) = (ra / s, rb / s);
            ra %= s;
            rb %= s;
            let d = if da >= db { da - db } else { da + m as usize - db };
            out += d * s;
        }
        out
    }

    /// Index of `c.a`, coordinatewise multiplication by an integer.
    pub fn mul_idx(&self, c: u64, a: usize) -> usize {
        let mut out = 0;
        let mut ra = a;
        for (&s, &m) in self.0.strides.iter().zip(&self.0.factors) {
            let d = (ra / s) as u64;
            ra %= s;
            out += ((d * (c % m as u64)) % m as u64) as usize * s;
        }
        out
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check_shape(&x.coords)?;
        self.check_shape(&y.coords)?;
        let coords = x
            .coords
            .iter()
            .zip(&y.coords)
            .zip(self.factors())
            .map(|((&a, &b), &m)| (a + b) % m)
            .collect();
        Ok(GroupElement { coords })
    }

    pub fn negate(&self, x: &GroupElement) -> Result<GroupElement> {
        self.check_shape(&x.coords)?;
        let coords = x
            .coords
            .iter()
            .zip(self.factors())
            .map(|(&a, &m)| (m - a) % m)
            .collect();
        Ok(GroupElement { coords })
    }

    /// Scalar action `c.x` on `F_p^n`; `c` must be a unit mod `p`.
    pub fn scalar_mul(&self, c: u64, x: &GroupElement) -> Result<GroupElement> {
        let p = self.require_prime()?;
        if c.is_multiple_of(p as u64) {
            return Err(Error::ScalarNotUnit {
                scalar: c,
                modulus: p,
            });
        }
        self.check_shape(&x.coords)?;
        let coords = x
            .coords
            .iter()
            .map(|&a| ((a as u64 * (c % p as u64)) % p as u64) as u32)
            .collect();
        Ok(GroupElement { coords })
    }

    /// Exact phase of `gamma(x)` as `(numerator, denominator)` with
    /// `gamma(x) = exp(2 pi i numerator / denominator)`.
    pub fn phase_idx(&self, gamma: usize, x: usize) -> (u64, u64) {
        let lcm = self.0.lcm;
        let (mut rg, mut rx) = (gamma, x);
        let mut num = 0u64;
        for (&s, &m) in self.0.strides.iter().zip(&self.0.factors) {
            let (dg, dx) = ((rg / s) as u64, (rx / s) as u64);
            rg %= s;
            rx %= s;
            num = (num + (dg * dx % m as u64) * (lcm / m as u64)) % lcm;
        }
        (num, lcm)
    }

    /// `gamma(x)`, with the rational phase reduced before exponentiation.
    pub fn character_eval(&self, gamma: &Character, x: &GroupElement) -> Result<Complex64> {
        let g = self.character_index(gamma)?;
        let e = self.element_index(x)?;
        let (num, den) = self.phase_idx(g, e);
        Ok(unit_root(num, den))
    }

    /// For every `z` in canonical order, the index of `y + z`.
    pub fn translation(&self, y: usize) -> Vec<usize> {
        let k = self.rank();
        let n = self.order();
        let factors = &self.0.factors;
        let strides = &self.0.strides;
        let mut out = Vec::with_capacity(n);
        let mut z = vec![0u32; k];
        let mut s = self.coords_of(y);
        let mut idx = y;
        for _ in 0..n {
            out.push(idx);
            for i in (0..k).rev() {
                z[i] += 1;
                s[i] += 1;
                idx += strides[i];
                if s[i] == factors[i] {
                    s[i] = 0;
                    idx -= factors[i] as usize * strides[i];
                }
                if z[i] < factors[i] {
                    break;
                }
                z[i] = 0;
            }
        }
        out
    }

    /// Canonical indices `0..order`.
    pub fn indices(&self) -> std::ops::Range<usize> {
        0..self.order()
    }
}

/// `exp(2 pi i num / den)`, exact at the quarter turns.
pub fn unit_root(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    if num == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * num == den {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * num == den {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * num == 3 * den {
        return Complex64::new(0.0, -1.0);
    }
    Complex64::from_polar(1.0, TAU * num as f64 / den as f64)
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.factors == other.0.factors
    }
}

impl Eq for Group {}

impl std::hash::Hash for Group {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.factors.hash(state);
    }
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({self})")
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors().iter().map(|m| format!("Z_{m}")).collect();
        f.write_str(&parts.join(" x "))
    }
}

fn fmt_coords(coords: &[u32], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let parts: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
    write!(f, "({})", parts.join(","))
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_coords(&self.coords, f)
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_coords(&self.coords, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(factors: &[u64]) -> Group {
        Group::with_default_cap(factors).unwrap()
    }

    #[test]
    fn construction_detects_prime_field() {
        let g = z(&[3, 3]);
        assert_eq!(g.order(), 9);
        assert_eq!(g.prime_field(), Some(3));
        let g = z(&[2, 2, 2]);
        assert_eq!(g.order(), 8);
        assert_eq!(g.prime_field(), Some(2));
        assert_eq!(z(&[4, 4]).prime_field(), None);
        assert_eq!(z(&[3, 5]).prime_field(), None);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            Group::new(&[6], 4),
            Err(Error::OrderExceeded { order: 6, max: 4 })
        ));
        assert_eq!(Group::new(&[3, 1], 100), Err(Error::FactorTooSmall(1)));
        assert!(Group::new(&[1 << 11, 1 << 11], DEFAULT_MAX_ORDER).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let g = z(&[3, 3]);
        let a = g.element(&[1, 2]).unwrap();
        let b = g.element(&[2, 2]).unwrap();
        assert_eq!(g.add(&a, &b).unwrap().coords, vec![0, 1]);
        let c = g.element(&[1, 0]).unwrap();
        assert_eq!(g.negate(&c).unwrap().coords, vec![2, 0]);

        let g5 = z(&[5, 5]);
        let x = g5.element(&[1, 2]).unwrap();
        assert_eq!(g5.scalar_mul(2, &x).unwrap().coords, vec![2, 4]);
        assert!(matches!(
            g5.scalar_mul(10, &x),
            Err(Error::ScalarNotUnit { .. })
        ));
        let g4 = z(&[4]);
        assert_eq!(
            g4.scalar_mul(1, &g4.element(&[1]).unwrap()),
            Err(Error::NotPrimeField)
        );
    }

    #[test]
    fn shape_errors() {
        let g = z(&[3, 3]);
        assert!(matches!(g.element(&[1]), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(
            g.element(&[1, 3]),
            Err(Error::ResidueOutOfRange { .. })
        ));
        let bad = GroupElement { coords: vec![0] };
        assert!(g.character_eval(&g.character_at(0), &bad).is_err());
    }

    #[test]
    fn character_examples() {
        let g = z(&[3, 4]);
        let zero = g.character_at(0);
        for x in g.indices() {
            let v = g.character_eval(&zero, &g.element_at(x)).unwrap();
            assert_eq!(v, Complex64::new(1.0, 0.0));
        }
        let z2 = z(&[2]);
        let v = z2
            .character_eval(&z2.character(&[1]).unwrap(), &z2.element(&[1]).unwrap())
            .unwrap();
        assert_eq!(v, Complex64::new(-1.0, 0.0));
        let z3 = z(&[3]);
        let v = z3
            .character_eval(&z3.character(&[1]).unwrap(), &z3.element(&[2]).unwrap())
            .unwrap();
        let expect = Complex64::from_polar(1.0, 4.0 * std::f64::consts::PI / 3.0);
        assert!((v - expect).norm() < 1e-15);
    }

    #[test]
    fn characters_are_homomorphisms() {
        for factors in [vec![2u64, 2, 2, 2, 2, 2], vec![4, 4, 4], vec![3, 5], vec![64], vec![2, 3, 8]] {
            let g = z(&factors);
            assert!(g.order() <= 64);
            for gamma in g.indices() {
                for x in g.indices() {
                    for y in g.indices() {
                        let (a, d) = g.phase_idx(gamma, g.add_idx(x, y));
                        let (b, _) = g.phase_idx(gamma, x);
                        let (c, _) = g.phase_idx(gamma, y);
                        assert_eq!(a, (b + c) % d);
                    }
                }
            }
        }
    }

    #[test]
    fn scalar_action_inverts() {
        for (p, n) in [(3u64, 3usize), (5, 2), (7, 2)] {
            let g = Group::prime_power(p, n).unwrap();
            for c in 1..p {
                let inv = mod_inverse(c, p).unwrap();
                for x in g.indices() {
                    let e = g.element_at(x);
                    let back = g.scalar_mul(c, &g.scalar_mul(inv, &e).unwrap()).unwrap();
                    assert_eq!(back, e);
                    assert_eq!(g.mul_idx(c, g.mul_idx(inv, x)), x);
                }
            }
        }
    }

    #[test]
    fn index_round_trip_and_arithmetic_consistency() {
        let g = z(&[3, 4, 5]);
        for i in g.indices() {
            assert_eq!(g.index_of(&g.coords_of(i)), i);
            for j in g.indices() {
                let s = g.add(&g.element_at(i), &g.element_at(j)).unwrap();
                assert_eq!(g.add_idx(i, j), g.index_of(&s.coords));
                assert_eq!(g.add_idx(g.sub_idx(i, j), j), i);
            }
            assert_eq!(g.add_idx(i, g.neg_idx(i)), 0);
        }
    }

    #[test]
    fn translation_matches_add() {
        let g = z(&[2, 3, 4]);
        for y in g.indices() {
            let t = g.translation(y);
            for (zi, &s) in t.iter().enumerate() {
                assert_eq!(s, g.add_idx(y, zi));
            }
        }
    }

    #[test]
    fn modular_inverse() {
        assert_eq!(mod_inverse(2, 5), Some(3));
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(2, 4), None);
    }
}
