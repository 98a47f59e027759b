//! Spans, dissociated sets and constructive span covers with recomputed certificates.
//!
//! A maximal dissociated subset `L` of `T` spans `T`: if `t` in `T` were outside
//! `Span(L)`, appending it would keep `L` dissociated. Every cover below is that
//! greedy construction applied to a different target set.

mod bsg;
mod covers;

pub use bsg::{bsg_extract, energy_bound_check, BsgConfig, BsgResult, EnergyReport};
pub use covers::{
    chang_spectrum_cover, core_subset_search, core_subset_search_at_level, correlated_span,
    shkredov_asym_cover, shkredov_audit, symset_cover, ChangCover, CoreMode, CoreSubset,
    CorrelatedSpan, CoverConstants, ShkredovAudit, ShkredovCover, SymsetCover,
};

use std::fmt;

use crate::additive::PointSet;
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};

/// Default cap on `|L|` for span enumeration.
pub const DEFAULT_SPAN_LIMIT: usize = 20;

/// An ordered list of distinct group elements (or characters) with dissociativity recorded.
#[derive(Clone, PartialEq, Eq)]
pub struct SpanBasis {
    group: Group,
    elements: Vec<usize>,
    dissociated: bool,
}

impl SpanBasis {
    /// Builds a basis, computing the dissociated flag.
    pub fn new(group: &Group, elements: Vec<usize>) -> Result<Self> {
        let mut seen = PointSet::empty(group);
        for &e in &elements {
            if e >= group.order() {
                return Err(Error::Hypothesis(format!("index {e} outside {group}")));
            }
            if !seen.insert(e) {
                return Err(Error::Hypothesis(format!(
                    "repeated basis element {}",
                    group.element_at(e)
                )));
            }
        }
        let dissociated = is_dissociated(group, &elements);
        Ok(SpanBasis {
            group: group.clone(),
            elements,
            dissociated,
        })
    }

    pub fn empty(group: &Group) -> Self {
        SpanBasis {
            group: group.clone(),
            elements: Vec::new(),
            dissociated: true,
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn indices(&self) -> &[usize] {
        &self.elements
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.elements.iter().map(|&i| self.group.element_at(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_dissociated(&self) -> bool {
        self.dissociated
    }
}

impl fmt::Debug for SpanBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements().iter().map(|e| e.to_string()).collect();
        write!(f, "SpanBasis[{}]", parts.join(","))
    }
}

/// Extends a span bitset by one generator: `S u (S + t) u (S - t)`.
fn extend_span(span: &PointSet, t: usize) -> PointSet {
    let g = span.group();
    let nt = g.neg_idx(t);
    let mut out = span.clone();
    for s in span.iter() {
        out.insert(g.add_idx(s, t));
        out.insert(g.add_idx(s, nt));
    }
    out
}

/// `Span(L) = {sum sigma_x x : sigma in {-1,0,1}^L}`, deduplicated as it grows.
pub fn span_enumerate(basis: &SpanBasis, limit: usize) -> Result<PointSet> {
    if basis.len() > limit {
        return Err(Error::BudgetExceeded {
            what: "span enumeration size",
            needed: basis.len() as u128,
            budget: limit as u128,
        });
    }
    let mut span = PointSet::from_indices(&basis.group, [0]);
    for &t in &basis.elements {
        span = extend_span(&span, t);
    }
    Ok(span)
}

/// True iff no nontrivial `sigma in {-1,0,1}^L` has `sum sigma_x x = 0`.
///
/// Tracks the set of sums reachable by a nontrivial partial pattern, which costs
/// `O(|L| |G|)` instead of `3^|L|`.
pub fn is_dissociated(group: &Group, elements: &[usize]) -> bool {
    let mut nontrivial = PointSet::empty(group);
    for &x in elements {
        let nx = group.neg_idx(x);
        let mut next = nontrivial.clone();
        for s in nontrivial.iter() {
            next.insert(group.add_idx(s, x));
            next.insert(group.add_idx(s, nx));
        }
        next.insert(x);
        next.insert(nx);
        nontrivial = next;
    }
    !nontrivial.contains(0)
}

/// Greedy maximal dissociated subset of `T \ {0}`; its span contains `T`.
///
/// Candidates are visited by descending weight (ties by canonical index) when
/// weights indexed by group element are given, else in canonical order.
pub fn maximal_dissociated_cover(target: &PointSet, weights: Option<&[f64]>) -> SpanBasis {
    let group = target.group();
    let mut order: Vec<usize> = target.iter().filter(|&t| t != 0).collect();
    if let Some(w) = weights {
        order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    }
    let mut span = PointSet::from_indices(group, [0]);
    let mut elements = Vec::new();
    for t in order {
        if !span.contains(t) {
            span = extend_span(&span, t);
            elements.push(t);
        }
    }
    SpanBasis {
        group: group.clone(),
        elements,
        dissociated: true,
    }
}

/// A span cover claim whose containment and overlap are recomputed at construction.
#[derive(Clone, Debug)]
pub struct CoverCertificate {
    target: PointSet,
    basis: SpanBasis,
    translate: Option<usize>,
    contained: bool,
    overlap: usize,
    span_size: usize,
    bound_budget: f64,
}

impl CoverCertificate {
    /// Recomputes `target` against `translate + Span(basis)`.
    pub fn certify(
        target: PointSet,
        basis: SpanBasis,
        translate: Option<usize>,
        bound_budget: f64,
        span_limit: usize,
    ) -> Result<Self> {
        target.check_same_group(&PointSet::empty(basis.group()))?;
        let mut span = span_enumerate(&basis, span_limit)?;
        if let Some(x) = translate {
            span = span.translate(x);
        }
        Ok(CoverCertificate {
            contained: target.is_subset(&span),
            overlap: target.intersection_len(&span),
            span_size: span.len(),
            target,
            basis,
            translate,
            bound_budget,
        })
    }

    pub fn target(&self) -> &PointSet {
        &self.target
    }

    pub fn basis(&self) -> &SpanBasis {
        &self.basis
    }

    pub fn translate(&self) -> Option<GroupElement> {
        self.translate.map(|x| self.basis.group.element_at(x))
    }

    pub fn translate_index(&self) -> Option<usize> {
        self.translate
    }

    /// `target` is contained in `translate + Span(basis)`.
    pub fn contained(&self) -> bool {
        self.contained
    }

    /// `|target n (translate + Span(basis))|`.
    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn span_size(&self) -> usize {
        self.span_size
    }

    /// The asymptotic size bound evaluated with the configured constant.
    pub fn bound_budget(&self) -> f64 {
        self.bound_budget
    }
}
