use std::fmt;

use crate::additive::PointSet;
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};
use crate::linalg::{dot, rref, Echelon};

/// A linear subspace `V` of `F_p^n`, kept with a row-reduced basis and a basis of `V^perp`.
///
/// The same type describes subspaces of `G` and of its dual, which share one
/// coordinate shape; `annihilator` switches between the two.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    group: Group,
    basis: Echelon,
    annihilator: Echelon,
}

impl Subspace {
    /// The subspace generated by the given elements.
    pub fn span(group: &Group, generators: &[usize]) -> Result<Self> {
        let p = group.prime_field().ok_or(Error::NotPrimeField)?;
        let rows: Vec<Vec<u32>> = generators.iter().map(|&g| group.coords_of(g)).collect();
        let basis = rref(&rows, group.rank(), p);
        let annihilator = basis.null_space();
        Ok(Subspace {
            group: group.clone(),
            basis,
            annihilator,
        })
    }

    /// `{x : gamma(x) = 1 for every listed character}`.
    pub fn annihilator_of(group: &Group, characters: &[usize]) -> Result<Self> {
        Ok(Self::span(group, characters)?.annihilator())
    }

    pub fn whole(group: &Group) -> Result<Self> {
        let n = group.rank();
        let gens: Vec<usize> = (0..n)
            .map(|i| {
                let mut c = vec![0u32; n];
                c[i] = 1;
                group.index_of(&c)
            })
            .collect();
        Self::span(group, &gens)
    }

    /// `V^perp`, on the other side.
    pub fn annihilator(&self) -> Self {
        Subspace {
            group: self.group.clone(),
            basis: self.annihilator.clone(),
            annihilator: self.basis.clone(),
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn modulus(&self) -> u32 {
        self.basis.modulus
    }

    pub fn dim(&self) -> usize {
        self.basis.rank()
    }

    pub fn codimension(&self) -> usize {
        self.group.rank() - self.dim()
    }

    /// `|V| = p^dim`.
    pub fn order(&self) -> usize {
        (self.modulus() as usize).pow(self.dim() as u32)
    }

    /// Row-reduced basis vectors.
    pub fn basis(&self) -> Vec<GroupElement> {
        self.basis.rows.iter().map(|r| self.group.element_at(self.group.index_of(r))).collect()
    }

    pub fn basis_indices(&self) -> Vec<usize> {
        self.basis.rows.iter().map(|r| self.group.index_of(r)).collect()
    }

    /// Membership by the annihilating characters.
    pub fn contains(&self, x: usize) -> bool {
        let c = self.group.coords_of(x);
        self.annihilator.rows.iter().all(|a| dot(a, &c, self.modulus()) == 0)
    }

    /// Coordinates of `x` in the row-reduced basis (the values at the pivot columns).
    pub fn coordinates(&self, x: usize) -> Option<Vec<u32>> {
        self.basis.coordinates(&self.group.coords_of(x))
    }

    /// Index of the coset `x + V` in `G / V`, read off from the annihilator.
    pub fn coset_key(&self, x: usize) -> usize {
        let c = self.group.coords_of(x);
        let p = self.modulus() as usize;
        self.annihilator
            .rows
            .iter()
            .fold(0, |acc, a| acc * p + dot(a, &c, self.modulus()) as usize)
    }

    /// Number of cosets, `p^codim`.
    pub fn index(&self) -> usize {
        (self.modulus() as usize).pow(self.codimension() as u32)
    }

    pub fn elements(&self) -> PointSet {
        let p = self.modulus();
        let d = self.dim();
        let mut out = PointSet::empty(&self.group);
        let mut coeffs = vec![0u32; d];
        loop {
            out.insert(self.group.index_of(&self.basis.combine(&coeffs)));
            let mut i = 0;
            while i < d && coeffs[i] == p - 1 {
                coeffs[i] = 0;
                i += 1;
            }
            if i == d {
                return out;
            }
            coeffs[i] += 1;
        }
    }

    /// `F_p^dim`, the group that coordinates land in.
    pub fn coordinate_group(&self) -> Result<Group> {
        if self.dim() == 0 {
            return Err(Error::DegenerateBasis("subspace has dimension 0".into()));
        }
        Group::new(
            &vec![self.modulus() as u64; self.dim()],
            self.group.order().max(2),
        )
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in {})", self.dim(), self.group)
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.basis().iter().map(|e| e.to_string()).collect();
        write!(f, "<{}>", parts.join(","))
    }
}
