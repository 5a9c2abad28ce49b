//! Solver results and the deterministic comparison used to pick optima.

use crate::fbl::ErrorProb;

/// Relative tolerance on `ln ε` below which two candidates count as tied.
pub const TIE_REL_TOL: f64 = 1e-12;

/// Result of one scheme solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<A> {
    /// `None` when the constraint set is empty.
    pub allocation: Option<A>,
    /// Error of the device being optimised (the actuator, or device K).
    /// Certain failure when infeasible.
    pub eps_target: ErrorProb,
    /// Error of the constrained device(s) at the returned allocation.
    pub eps_robot: Option<ErrorProb>,
}

impl<A> Outcome<A> {
    pub fn infeasible() -> Self {
        Outcome {
            allocation: None,
            eps_target: ErrorProb::ONE,
            eps_robot: None,
        }
    }

    pub fn feasible(&self) -> bool {
        self.allocation.is_some()
    }
}

/// `ln a` and `ln b` agree to [`TIE_REL_TOL`].
pub(crate) fn ties(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_REL_TOL * a.abs().max(b.abs())
}

/// Whether a candidate with log-error `ln_new` and ordering key `key_new`
/// replaces the incumbent: strictly lower error, or tied error and smaller key.
pub(crate) fn replaces<K: PartialOrd>(ln_new: f64, key_new: K, ln_old: f64, key_old: K) -> bool {
    if ties(ln_new, ln_old) {
        key_new < key_old
    } else {
        ln_new < ln_old
    }
}
