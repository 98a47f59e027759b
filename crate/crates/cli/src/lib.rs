//! Experiment runner and verification suites for `spandoubler-core`.
//!
//! Instances are read one per line (see [`instance`]), each command produces
//! one [`report::Record`] per instance, and [`suites`] generates seeded
//! instances for the built-in verification suites.

pub mod commands;
pub mod instance;
pub mod report;
pub mod suites;

use rayon::prelude::*;
use spandoubler_core::additive::DEFAULT_BRUTE_BUDGET;
use spandoubler_core::group::DEFAULT_MAX_ORDER;
use spandoubler_core::spanstruct::DEFAULT_SPAN_LIMIT;

pub const MAX_ORDER_ENV: &str = "SPANDOUBLER_MAX_ORDER";

/// Run-wide settings shared by commands and suites.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub span_limit: usize,
    pub brute_budget: u128,
    /// Audit the driver's counting inequality every this many steps.
    pub audit_every: usize,
    pub max_order: usize,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 0,
            span_limit: DEFAULT_SPAN_LIMIT,
            brute_budget: DEFAULT_BRUTE_BUDGET,
            audit_every: 1,
            max_order: DEFAULT_MAX_ORDER,
            threads: 0,
        }
    }
}

/// The group-order cap from the environment, if set and valid.
pub fn max_order_from_env() -> Result<Option<usize>, String> {
    match std::env::var(MAX_ORDER_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{MAX_ORDER_ENV}={v:?} is not a positive integer")),
        Err(_) => Ok(None),
    }
}

/// Maps `f` over `items` on a pool of `threads` workers, keeping input order.
pub fn par_map<T, R, F>(threads: usize, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(|| items.into_par_iter().map(&f).collect())
}
