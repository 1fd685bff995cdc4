//! Analytic Gaussian pointer.
//!
//! The pointer is a real Gaussian transverse profile
//!
//! ```text
//! φ(x) = (2πσ²)^(-1/4) · exp(-(x - x0)² / 4σ²)
//! ```
//!
//! with momentum-space amplitude given by the unitary Fourier transform
//! (ħ = 1, `φ̃(k) = (2π)^(-1/2) ∫ e^{-ikx} φ(x) dx`):
//!
//! ```text
//! φ̃(k) = (2σ²/π)^(1/4) · exp(-σ²k²) · e^{-ik·x0}
//! ```
//!
//! Coupling a hermitian observable `O = Σ_k λ_k Π_k` to the pointer momentum
//! through `exp(-i g O P)` and post-selecting leaves the pointer in
//!
//! ```text
//! ⟨x|m_f⟩ = Σ_k c_k φ(x - g λ_k),    c_k = ⟨ψ_f|Π_k|ψ_i⟩
//! ```
//!
//! which is exact for any `g`. All moments of such a sum of shifted Gaussians
//! follow from two pairwise integrals (with `a`, `b` shifts):
//!
//! ```text
//! ∫ φ(x-a) φ(x-b) dx   = exp(-(a-b)² / 8σ²)                 =: S(a, b)
//! ∫ x φ(x-a) φ(x-b) dx = (x0 + (a+b)/2) · S(a, b)
//! ```
//!
//! The product of the two Gaussians is `S(a,b)` times a unit-mass Gaussian
//! of variance σ² centred on `x0 + (a+b)/2`, which gives both lines. In the
//! momentum basis each term carries a phase `e^{-i a k}` and
//! `|φ̃(k)|²` is a Gaussian of variance `s² = 1/4σ²`, so
//!
//! ```text
//! ∫ e^{i(a-b)k} |φ̃(k)|² dk   = exp(-(a-b)² s² / 2)  = S(a, b)
//! ∫ k e^{i(a-b)k} |φ̃(k)|² dk = i (a-b) s² · S(a, b)
//! ```

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{eigendecompose, sandwich, HilbertError, Operator};
use crate::weak::PrePostPair;

/// Coefficients below this modulus are dropped from a conditional state.
const TERM_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointerError {
    #[error("pointer width must be positive and finite, got {0}")]
    InvalidWidth(f64),
    #[error("pointer centre must be finite, got {0}")]
    InvalidCentre(f64),
    #[error("coupling strength must be finite, got {0}")]
    InvalidCoupling(f64),
    #[error("post-selection probability is zero; conditional moments are undefined")]
    ZeroProbability,
    #[error("operation needs a {expected:?}-basis state, got {actual:?}")]
    WrongBasis { expected: Readout, actual: Readout },
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Which pointer observable the detector resolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    /// Transverse displacement (camera without a Fourier lens).
    Position,
    /// Transverse momentum (camera behind a Fourier lens).
    Momentum,
}

/// Gaussian beam profile of width `sigma` centred on `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPointer {
    sigma: f64,
    x0: f64,
}

impl GaussianPointer {
    pub fn new(sigma: f64, x0: f64) -> Result<Self, PointerError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(PointerError::InvalidWidth(sigma));
        }
        if !x0.is_finite() {
            return Err(PointerError::InvalidCentre(x0));
        }
        Ok(Self { sigma, x0 })
    }

    pub fn centred(sigma: f64) -> Result<Self, PointerError> {
        Self::new(sigma, 0.0)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Standard deviation of `|φ̃(k)|²`.
    pub fn momentum_width(&self) -> f64 {
        1.0 / (2.0 * self.sigma)
    }

    /// `φ(x)`.
    pub fn amplitude_position(&self, x: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let d = x - self.x0;
        (2.0 * PI * s2).powf(-0.25) * (-d * d / (4.0 * s2)).exp()
    }

    /// `φ̃(k)`.
    pub fn amplitude_momentum(&self, k: f64) -> C64 {
        let s2 = self.sigma * self.sigma;
        let envelope = (2.0 * s2 / PI).powf(0.25) * (-s2 * k * k).exp();
        C64::from_polar(envelope, -k * self.x0)
    }

    pub fn amplitude(&self, readout: Readout, q: f64) -> C64 {
        match readout {
            Readout::Position => C64::new(self.amplitude_position(q), 0.0),
            Readout::Momentum => self.amplitude_momentum(q),
        }
    }

    /// `S(a, b)`: overlap of the profile translated by `a` with the profile
    /// translated by `b`. Identical in both bases.
    pub fn overlap(&self, a: f64, b: f64) -> f64 {
        let d = a - b;
        (-d * d / (8.0 * self.sigma * self.sigma)).exp()
    }

    /// Norm of the position profile, in closed form.
    pub fn norm_squared(&self) -> f64 {
        1.0
    }
}

/// One branch `c · φ(x - shift)` of a conditional pointer state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerTerm {
    pub coefficient: C64,
    pub shift: f64,
}

/// Unnormalised post-selected pointer state `Σ_k c_k φ(x - a_k)`.
///
/// Its squared norm is the post-selection probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPointerState {
    terms: Vec<PointerTerm>,
    pointer: GaussianPointer,
    basis: Readout,
}

/// Exact post-selected pointer state after `exp(-i g O P)`.
///
/// Branches with equal shifts are merged and branches with negligible
/// coefficient dropped; at least one term is always kept. The result is in
/// the position basis; use [`ConditionalPointerState::in_basis`] to read it
/// out in momentum.
pub fn conditional_state(
    op: &Operator,
    pair: &PrePostPair,
    pointer: &GaussianPointer,
    g: f64,
) -> Result<ConditionalPointerState, PointerError> {
    if !g.is_finite() {
        return Err(PointerError::InvalidCoupling(g));
    }
    let spectrum = eigendecompose(op)?;
    let mut terms: Vec<PointerTerm> = Vec::with_capacity(spectrum.len());
    for (lambda, projector) in spectrum.iter() {
        let coefficient = sandwich(pair.post(), projector, pair.pre())?;
        let shift = g * lambda;
        match terms
            .iter_mut()
            .find(|t| (t.shift - shift).abs() <= 1e-15 * shift.abs().max(1.0))
        {
            Some(existing) => existing.coefficient += coefficient,
            None => terms.push(PointerTerm { coefficient, shift }),
        }
    }
    terms.retain(|t| t.coefficient.norm() > TERM_CUTOFF);
    if terms.is_empty() {
        terms.push(PointerTerm {
            coefficient: C64::new(0.0, 0.0),
            shift: 0.0,
        });
    }
    Ok(ConditionalPointerState {
        terms,
        pointer: *pointer,
        basis: Readout::Position,
    })
}

impl ConditionalPointerState {
    /// Builds a state from explicit branches.
    pub fn from_terms(terms: Vec<PointerTerm>, pointer: GaussianPointer, basis: Readout) -> Self {
        let terms = if terms.is_empty() {
            vec![PointerTerm {
                coefficient: C64::new(0.0, 0.0),
                shift: 0.0,
            }]
        } else {
            terms
        };
        Self { terms, pointer, basis }
    }

    pub fn terms(&self) -> &[PointerTerm] {
        &self.terms
    }

    pub fn pointer(&self) -> &GaussianPointer {
        &self.pointer
    }

    pub fn basis(&self) -> Readout {
        self.basis
    }

    pub fn in_basis(mut self, basis: Readout) -> Self {
        self.basis = basis;
        self
    }

    pub fn max_abs_shift(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.shift.abs()))
    }

    /// `⟨q|m_f⟩` in the state's basis.
    pub fn amplitude(&self, q: f64) -> C64 {
        match self.basis {
            Readout::Position => self
                .terms
                .iter()
                .map(|t| t.coefficient * self.pointer.amplitude_position(q - t.shift))
                .sum(),
            Readout::Momentum => {
                let phases: C64 = self
                    .terms
                    .iter()
                    .map(|t| t.coefficient * C64::from_polar(1.0, -t.shift * q))
                    .sum();
                phases * self.pointer.amplitude_momentum(q)
            }
        }
    }

    /// Joint density `|⟨q|m_f⟩|²` of post-selection and reading `q`.
    pub fn density(&self, q: f64) -> f64 {
        self.amplitude(q).norm_sqr()
    }

    fn pairwise<F>(&self, f: F) -> C64
    where
        F: Fn(f64, f64) -> C64,
    {
        let mut acc = C64::new(0.0, 0.0);
        for tj in &self.terms {
            for tk in &self.terms {
                acc += tj.coefficient.conj() * tk.coefficient * f(tj.shift, tk.shift);
            }
        }
        acc
    }

    /// `Σ_jk conj(c_j) c_k S(a_j, a_k)`. Basis independent.
    pub fn postselection_probability(&self) -> f64 {
        self.pairwise(|a, b| C64::new(self.pointer.overlap(a, b), 0.0))
            .re
            .max(0.0)
    }

    fn nonzero_probability(&self) -> Result<f64, PointerError> {
        let p = self.postselection_probability();
        if p <= f64::MIN_POSITIVE {
            Err(PointerError::ZeroProbability)
        } else {
            Ok(p)
        }
    }

    /// Mean pointer position conditioned on post-selection (includes `x0`).
    pub fn conditional_mean_position(&self) -> Result<f64, PointerError> {
        if self.basis != Readout::Position {
            return Err(PointerError::WrongBasis {
                expected: Readout::Position,
                actual: self.basis,
            });
        }
        let p = self.nonzero_probability()?;
        let first = self.pairwise(|a, b| C64::new(0.5 * (a + b) * self.pointer.overlap(a, b), 0.0));
        Ok(self.pointer.x0 + first.re / p)
    }

    /// Mean pointer momentum conditioned on post-selection.
    pub fn conditional_mean_momentum(&self) -> Result<f64, PointerError> {
        if self.basis != Readout::Momentum {
            return Err(PointerError::WrongBasis {
                expected: Readout::Momentum,
                actual: self.basis,
            });
        }
        let p = self.nonzero_probability()?;
        let s2 = self.pointer.momentum_width().powi(2);
        let first = self.pairwise(|a, b| C64::new(0.0, (a - b) * s2 * self.pointer.overlap(a, b)));
        Ok(first.re / p)
    }

    /// Conditional mean in whichever basis the state is read out.
    pub fn conditional_mean(&self) -> Result<f64, PointerError> {
        match self.basis {
            Readout::Position => self.conditional_mean_position(),
            Readout::Momentum => self.conditional_mean_momentum(),
        }
    }
}
