use num_bigint::BigUint;
use num_rational::Ratio;

use super::{l2_increment, linf_increment, restrict, spectral_mass, Increment, Subspace};
use crate::additive::{
    additive_energy, lambda_fourier, solution_count, spectrum, EquationSpec, PointSet,
    DEFAULT_BRUTE_BUDGET,
};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::harmonic::{fourier_forward, Measure};
use crate::spanstruct::{bsg_extract, correlated_span, BsgConfig, CoverConstants};
use crate::threshold::Threshold;
use crate::INCLUSION_SLACK;

/// Thresholds and budgets for one iteration step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepKnobs {
    /// `M`: the l-infinity threshold becomes `alpha^{-M/((r-2) r)} eps alpha`. Zero by default.
    pub boost: f64,
    /// `eps = epsilon_scale * alpha^{1/(r-2)}`.
    pub epsilon_scale: f64,
    /// Work budget for exact solution counts.
    pub brute_budget: u128,
    /// `eta` for the correlated span in the l2 pipeline.
    pub correlated_eta: f64,
    pub cover: CoverConstants,
    pub bsg: BsgConfig,
}

impl Default for StepKnobs {
    fn default() -> Self {
        StepKnobs {
            boost: 0.0,
            epsilon_scale: 0.25,
            brute_budget: DEFAULT_BRUTE_BUDGET,
            correlated_eta: 1.0,
            cover: CoverConstants::default(),
            bsg: BsgConfig::default(),
        }
    }
}

/// `Lambda_c(A)` from the character sum, and exactly when the count fits the budget.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaValue {
    pub fourier: f64,
    pub exact: Option<Ratio<u128>>,
    pub count: Option<u128>,
}

fn lambda_value(a: &PointSet, c: &EquationSpec, budget: u128) -> Result<LambdaValue> {
    let fourier = lambda_fourier(a, c)?;
    let count = match solution_count(a, c, budget) {
        Ok(n) => Some(n),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let exact = count.and_then(|n| {
        let den = (a.group().order() as u128).checked_pow(c.arity() as u32 - 1)?;
        Some(Ratio::new(n, den))
    });
    Ok(LambdaValue {
        fourier,
        exact,
        count,
    })
}

/// Details of the spectrum, extraction and span stages behind an l2 finish.
#[derive(Clone, Debug, PartialEq)]
pub struct L2Pipeline {
    pub spectrum_size: usize,
    pub extracted_size: usize,
    pub basis_size: usize,
    pub dim_w: usize,
    pub mass: f64,
}

/// Which of the three cases an iteration step landed in.
#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    /// `Lambda_c(A) >= alpha^r / 2`.
    ManySolutions { lambda: LambdaValue },
    /// Codimension-one increment from a single large Fourier coefficient.
    LinfStep {
        increment: Increment,
        character: usize,
        coefficient: f64,
        epsilon: f64,
        /// Set when the l2 pipeline was attempted and abandoned.
        fallback: Option<String>,
    },
    /// Increment onto the annihilator of a spanned subspace `W`.
    L2Finish {
        increment: Increment,
        epsilon: f64,
        pipeline: L2Pipeline,
    },
}

fn check_instance(a: &PointSet, c: &EquationSpec) -> Result<()> {
    let p = a.group().prime_field().ok_or(Error::NotPrimeField)?;
    if p != c.modulus() {
        return Err(Error::Equation(format!(
            "equation is over F_{} but the group is over F_{p}",
            c.modulus()
        )));
    }
    if !c.is_balanced() {
        return Err(Error::Equation("coefficients must sum to zero".into()));
    }
    Ok(())
}

fn many_solutions(a: &PointSet, c: &EquationSpec, lambda: &LambdaValue) -> bool {
    let r = c.arity() as u32;
    match lambda.count {
        // Lambda >= alpha^r / 2  <=>  2 |G| count >= |A|^r
        Some(n) => {
            BigUint::from(n) * BigUint::from(2 * a.group().order() as u64)
                >= BigUint::from(a.len() as u64).pow(r)
        }
        None => lambda.fourier >= a.density_f64().powi(r as i32) / 2.0 - INCLUSION_SLACK,
    }
}

fn l2_pipeline(
    a: &PointSet,
    eps: f64,
    knobs: &StepKnobs,
) -> Result<(Increment, f64, L2Pipeline)> {
    let g = a.group();
    let mut s = spectrum(&a.indicator(Measure::Probability), eps)?;
    s.remove(0);
    if s.len() < 2 {
        return Err(Error::Hypothesis("fewer than two nontrivial spectral characters".into()));
    }
    let n = s.len() as u64;
    let c = Threshold::Exact(Ratio::new(additive_energy(&s), n * n * n));
    let extracted = bsg_extract(&s, c, &knobs.bsg)?;
    let span = correlated_span(&extracted.subset, knobs.correlated_eta, &knobs.cover)?;
    let w = Subspace::span(g, span.extended_basis.indices())?;
    let mass = spectral_mass(a, &w)?;
    let eps2 = mass / a.density_f64();
    let increment = l2_increment(a, &w, eps2)?;
    Ok((
        increment,
        eps2,
        L2Pipeline {
            spectrum_size: s.len(),
            extracted_size: extracted.subset.len(),
            basis_size: span.extended_basis.len(),
            dim_w: w.dim(),
            mass,
        },
    ))
}

/// One step of the density-increment trichotomy for a balanced equation.
///
/// Case 1 is decided on the exact count when it fits the budget. Otherwise the
/// largest nontrivial coefficient is compared with the l-infinity threshold;
/// below it, the spectrum is passed through extraction and the correlated span
/// to an l2 increment, falling back to the l-infinity lemma at level `eps`
/// when a stage exceeds its budget or hypothesis.
pub fn iteration_step(a: &PointSet, c: &EquationSpec, knobs: &StepKnobs) -> Result<StepOutcome> {
    check_instance(a, c)?;
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let lambda = lambda_value(a, c, knobs.brute_budget)?;
    if many_solutions(a, c, &lambda) {
        return Ok(StepOutcome::ManySolutions { lambda });
    }
    let r = c.arity() as f64;
    let alpha = a.density_f64();
    let eps = knobs.epsilon_scale * alpha.powf(1.0 / (r - 2.0));
    let theta = alpha.powf(-knobs.boost / ((r - 2.0) * r)) * eps * alpha;

    let ft = fourier_forward(&a.indicator(Measure::Probability));
    let (character, coefficient) = ft
        .values()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, v)| (i, v.norm()))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });

    if coefficient >= theta - INCLUSION_SLACK {
        let epsilon = theta / alpha;
        return Ok(StepOutcome::LinfStep {
            increment: linf_increment(a, character, epsilon)?,
            character,
            coefficient,
            epsilon,
            fallback: None,
        });
    }
    if coefficient < eps * alpha - INCLUSION_SLACK {
        return Err(Error::Postcondition(format!(
            "no solutions surplus yet the spectrum at level {eps} is trivial"
        )));
    }
    match l2_pipeline(a, eps, knobs) {
        Ok((increment, epsilon, pipeline)) => Ok(StepOutcome::L2Finish {
            increment,
            epsilon,
            pipeline,
        }),
        Err(e @ (Error::BudgetExceeded { .. } | Error::Hypothesis(_))) => Ok(StepOutcome::LinfStep {
            increment: linf_increment(a, character, eps)?,
            character,
            coefficient,
            epsilon: eps,
            fallback: Some(e.to_string()),
        }),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepCase {
    LinfStep,
    L2Finish,
}

/// `Lambda(A) >= |G:V_i|^{-(r-1)} Lambda(A_i)`, which reduces to comparing raw counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ItposAudit {
    pub root_count: u128,
    pub step_count: u128,
    pub root_lambda: Ratio<u128>,
    pub step_lambda: Ratio<u128>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranscriptStep {
    pub case: StepCase,
    /// `V_{i+1}`, inside the coordinate group of `A_i`.
    pub subspace: Subspace,
    /// `t` with `A_{i+1} = (t + A_i) n V_{i+1}`.
    pub translate: GroupElement,
    pub density_before: Ratio<u64>,
    pub density_after: Ratio<u64>,
    pub epsilon: f64,
    /// `|G : V_{i+1}|`.
    pub index_product: u128,
    pub fallback: Option<String>,
    pub l2: Option<L2Pipeline>,
    pub itpos: Option<ItposAudit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    ManySolutions,
    L2Finish,
    MaxIters,
    BelowMinOrder,
    EmptySet,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ManySolutions => "many_solutions",
            Termination::L2Finish => "l2_finish",
            Termination::MaxIters => "max_iters",
            Termination::BelowMinOrder => "below_min_order",
            Termination::EmptySet => "empty_set",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriverLimits {
    pub max_iters: usize,
    pub min_order: usize,
    /// Audit the counting inequality every this many steps (0 disables).
    pub audit_every: usize,
    pub knobs: StepKnobs,
}

impl DriverLimits {
    /// `max_iters = 4 ceil(alpha^{-1/(r-2)} (r-2))`.
    pub fn for_instance(a: &PointSet, c: &EquationSpec) -> Self {
        let r = c.arity() as f64;
        let alpha = a.density_f64();
        let max_iters = if alpha > 0.0 {
            4 * (alpha.powf(-1.0 / (r - 2.0)) * (r - 2.0)).ceil() as usize
        } else {
            0
        };
        DriverLimits {
            max_iters,
            min_order: 2,
            audit_every: 1,
            knobs: StepKnobs::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IncrementTranscript {
    pub initial_density: Ratio<u64>,
    pub steps: Vec<TranscriptStep>,
    pub termination: Termination,
    pub final_density: Ratio<u64>,
    pub final_order: usize,
    pub final_lambda: LambdaValue,
    pub index_product: u128,
}

/// Iterates the trichotomy, restricting to the dense coset after each l-infinity step.
///
/// Every step recomputes the restricted set, checks that its density is exactly
/// the promised one and strictly larger, and (on audited steps) that the exact
/// solution count of `A_i` does not exceed that of `A`.
pub fn roth_driver(a: &PointSet, c: &EquationSpec, limits: &DriverLimits) -> Result<IncrementTranscript> {
    check_instance(a, c)?;
    let knobs = &limits.knobs;
    let root_count = if a.is_empty() {
        Some(0)
    } else {
        lambda_value(a, c, knobs.brute_budget)?.count
    };
    let mut current = a.clone();
    let mut steps = Vec::new();
    let mut index_product: u128 = 1;
    let termination = loop {
        if current.is_empty() {
            break Termination::EmptySet;
        }
        if current.group().order() < limits.min_order {
            break Termination::BelowMinOrder;
        }
        if steps.len() >= limits.max_iters {
            break Termination::MaxIters;
        }
        let outcome = iteration_step(&current, c, knobs)?;
        let (case, increment, epsilon, fallback, l2) = match outcome {
            StepOutcome::ManySolutions { .. } => break Termination::ManySolutions,
            StepOutcome::LinfStep {
                increment,
                epsilon,
                fallback,
                ..
            } => (StepCase::LinfStep, increment, epsilon, fallback, None),
            StepOutcome::L2Finish {
                increment,
                epsilon,
                pipeline,
            } => (StepCase::L2Finish, increment, epsilon, None, Some(pipeline)),
        };
        let g = current.group().clone();
        let shift = g.neg_idx(increment.translate);
        let density_before = current.density();
        if case == StepCase::L2Finish {
            // terminal: recount the coset directly, since V may be trivial
            let count = current
                .iter()
                .filter(|&y| increment.subspace.contains(g.add_idx(y, shift)))
                .count();
            let density_after = Ratio::new(count as u64, increment.subspace.order() as u64);
            if density_after != increment.new_density {
                return Err(Error::Postcondition(format!(
                    "recounted density {density_after} differs from promised {}",
                    increment.new_density
                )));
            }
            index_product *= increment.subspace.index() as u128;
            steps.push(TranscriptStep {
                case,
                translate: g.element_at(shift),
                subspace: increment.subspace,
                density_before,
                density_after,
                epsilon,
                index_product,
                fallback,
                l2,
                itpos: None,
            });
            break Termination::L2Finish;
        }
        if increment.subspace.dim() == 0 {
            break Termination::BelowMinOrder;
        }
        let next = restrict(&current, &increment.subspace, shift)?;
        let density_after = next.density();
        if density_after != increment.new_density {
            return Err(Error::Postcondition(format!(
                "restricted density {density_after} differs from promised {}",
                increment.new_density
            )));
        }
        if density_after <= density_before {
            return Err(Error::Postcondition(format!(
                "density did not increase: {density_before} -> {density_after}"
            )));
        }
        index_product *= increment.subspace.index() as u128;
        let step_no = steps.len() + 1;
        let audit = limits.audit_every > 0 && step_no % limits.audit_every == 0;
        let itpos = match (audit, root_count) {
            (true, Some(root)) => match solution_count(&next, c, knobs.brute_budget) {
                Ok(count) => {
                    let n0 = a.group().order() as u128;
                    let ni = next.group().order() as u128;
                    let e = c.arity() as u32 - 1;
                    let holds = root >= count;
                    if !holds {
                        return Err(Error::Postcondition(format!(
                            "solution count grew from {root} to {count} after restriction"
                        )));
                    }
                    Some(ItposAudit {
                        root_count: root,
                        step_count: count,
                        root_lambda: Ratio::new(root, n0.pow(e)),
                        step_lambda: Ratio::new(count, ni.pow(e)),
                        holds,
                    })
                }
                Err(Error::BudgetExceeded { .. }) => None,
                Err(e) => return Err(e),
            },
            _ => None,
        };
        steps.push(TranscriptStep {
            case,
            translate: g.element_at(shift),
            subspace: increment.subspace,
            density_before,
            density_after,
            epsilon,
            index_product,
            fallback,
            l2,
            itpos,
        });
        current = next;
    };
    let final_lambda = if current.is_empty() {
        LambdaValue {
            fourier: 0.0,
            exact: Some(Ratio::from_integer(0)),
            count: Some(0),
        }
    } else {
        lambda_value(&current, c, knobs.brute_budget)?
    };
    Ok(IncrementTranscript {
        initial_density: a.density(),
        final_density: current.density(),
        final_order: current.group().order(),
        steps,
        termination,
        final_lambda,
        index_product,
    })
}
