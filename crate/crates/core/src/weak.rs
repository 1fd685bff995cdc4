//! Weak values and first-order pointer/probability contracts.
//!
//! Units: ħ = 1 throughout, so `exp(-i g O P)` is the coupling unitary and
//! the first-order probability disturbance reads
//! `P_ε/P - 1 ≈ 2g (Re O_w · Im P_w + Im O_w · Re P_w)`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{inner, sandwich, HilbertError, Operator, StateVector};
use crate::pointer::{conditional_state, GaussianPointer, PointerError, Readout};

/// Smallest `|⟨ψ_f|ψ_i⟩|` (relative to the state norms) for which a weak
/// value is considered defined.
pub const DEFAULT_OVERLAP_EPSILON: f64 = 1e-12;

/// Default ratio `g/σ` above which a coupling is flagged as not weak.
pub const DEFAULT_WEAK_REGIME_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeakError {
    #[error("pre- and post-selected states are orthogonal (|⟨ψ_f|ψ_i⟩| = {overlap:e}); weak value undefined")]
    OrthogonalSelection { overlap: f64 },
    #[error("{which}-selected state is not normalised")]
    NotNormalised { which: &'static str },
    #[error("weak value is not finite: {0}")]
    NonFinite(C64),
    #[error("coupling strength must be finite and non-negative, got {0}")]
    InvalidCoupling(f64),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Pointer(#[from] PointerError),
}

/// A pre-selected state `|ψ_i⟩` with its post-selected partner `|ψ_f⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrePostPair {
    pre: StateVector,
    post: StateVector,
    overlap: C64,
}

impl PrePostPair {
    pub fn new(pre: StateVector, post: StateVector) -> Result<Self, WeakError> {
        if !pre.is_normalised() {
            return Err(WeakError::NotNormalised { which: "pre" });
        }
        if !post.is_normalised() {
            return Err(WeakError::NotNormalised { which: "post" });
        }
        let overlap = inner(&post, &pre)?;
        Ok(Self { pre, post, overlap })
    }

    pub fn pre(&self) -> &StateVector {
        &self.pre
    }

    pub fn post(&self) -> &StateVector {
        &self.post
    }

    /// `⟨ψ_f|ψ_i⟩`.
    pub fn overlap(&self) -> C64 {
        self.overlap
    }

    pub fn overlap_magnitude(&self) -> f64 {
        self.overlap.norm()
    }
}

/// A finite complex weak value `⟨O⟩_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakValue(C64);

impl WeakValue {
    pub fn new(value: C64) -> Result<Self, WeakError> {
        if value.re.is_finite() && value.im.is_finite() {
            Ok(Self(value))
        } else {
            Err(WeakError::NonFinite(value))
        }
    }

    pub fn value(&self) -> C64 {
        self.0
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }
}

/// Pointer coupling and readout choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub g: f64,
    pub readout: Readout,
    /// Pointer coordinate at which probabilities are evaluated.
    pub readout_value: f64,
    /// Couplings with `g > weak_regime_fraction · σ` are flagged.
    pub weak_regime_fraction: f64,
}

impl CouplingConfig {
    pub fn new(g: f64, readout: Readout, readout_value: f64) -> Result<Self, WeakError> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(WeakError::InvalidCoupling(g));
        }
        Ok(Self {
            g,
            readout,
            readout_value,
            weak_regime_fraction: DEFAULT_WEAK_REGIME_FRACTION,
        })
    }

    pub fn with_weak_regime_fraction(mut self, fraction: f64) -> Self {
        self.weak_regime_fraction = fraction;
        self
    }

    pub fn weak_regime_exceeded(&self, pointer: &GaussianPointer) -> bool {
        self.g > self.weak_regime_fraction * pointer.sigma()
    }

    /// Advisory message when the coupling is too strong to count as weak.
    pub fn weak_regime_warning(&self, pointer: &GaussianPointer) -> Option<String> {
        self.weak_regime_exceeded(pointer).then(|| {
            format!(
                "coupling g = {} exceeds {} of the pointer width σ = {}; first-order weak-value formulas may not apply",
                self.g,
                self.weak_regime_fraction,
                pointer.sigma()
            )
        })
    }
}

/// `⟨ψ_f|O|ψ_i⟩ / ⟨ψ_f|ψ_i⟩`.
pub fn weak_value(op: &Operator, pair: &PrePostPair) -> Result<WeakValue, WeakError> {
    weak_value_with_epsilon(op, pair, DEFAULT_OVERLAP_EPSILON)
}

pub fn weak_value_with_epsilon(op: &Operator, pair: &PrePostPair, epsilon: f64) -> Result<WeakValue, WeakError> {
    let scale = pair.pre.norm() * pair.post.norm();
    let overlap = pair.overlap_magnitude();
    if overlap <= epsilon * scale {
        return Err(WeakError::OrthogonalSelection { overlap });
    }
    let numerator = sandwich(&pair.post, op, &pair.pre)?;
    WeakValue::new(numerator / pair.overlap)
}

/// First-order conditional mean displacement `g · Re⟨O⟩_w` of a
/// position-basis pointer.
pub fn pointer_shift_first_order(w: WeakValue, cfg: &CouplingConfig) -> f64 {
    cfg.g * w.re()
}

/// `|⟨ψ_f|ψ_i⟩|² · |⟨q|m_i⟩|²`.
pub fn detection_probability_no_interaction(pair: &PrePostPair, pointer_amplitude: C64) -> f64 {
    pair.overlap.norm_sqr() * pointer_amplitude.norm_sqr()
}

/// Momentum weak value `⟨q|P|m_i⟩ / ⟨q|m_i⟩` of a Gaussian pointer.
///
/// Position readout gives `i (q - x0) / 2σ²`, momentum readout gives `q`.
pub fn pointer_momentum_weak_value(pointer: &GaussianPointer, readout: Readout, q: f64) -> C64 {
    match readout {
        Readout::Position => {
            let s2 = pointer.sigma() * pointer.sigma();
            C64::new(0.0, (q - pointer.x0()) / (2.0 * s2))
        }
        Readout::Momentum => C64::new(q, 0.0),
    }
}

/// First-order relative change of the detection probability,
/// `2g (Re O_w Im P_w + Im O_w Re P_w)`.
pub fn disturbance_ratio_first_order(ow: WeakValue, pw: C64, g: f64) -> f64 {
    2.0 * g * (ow.re() * pw.im + ow.im() * pw.re)
}

/// `|⟨q|⟨ψ_f| exp(-i g O P) |ψ_i⟩|m_i⟩|²` evaluated through the spectral
/// decomposition of `O`, with no small-`g` expansion.
pub fn exact_detection_probability(
    op: &Operator,
    pair: &PrePostPair,
    pointer: &GaussianPointer,
    cfg: &CouplingConfig,
) -> Result<f64, WeakError> {
    let state = conditional_state(op, pair, pointer, cfg.g)?.in_basis(cfg.readout);
    Ok(state.density(cfg.readout_value))
}
