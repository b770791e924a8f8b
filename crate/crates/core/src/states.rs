//! Constructors for the simulated optical states: coherent, squeezed vacuum,
//! coherent-state superpositions (even cat states), entangled coherent states
//! (ECS), and NOON states, plus photon-number moments.
//!
//! Constructors return the true analytic Fock coefficients up to the cutoff,
//! unnormalized by truncation; callers needing strict unit norm renormalize
//! explicitly. This keeps closed-form overlaps exactly comparable to their
//! numeric counterparts.

use num_complex::Complex64;

use crate::error::SimError;
use crate::fock::{log_factorial, ModeAmplitudes, TwoModeAmplitudes, DEFAULT_CUTOFF};

/// Hard ceiling for adaptive cutoff growth.
pub const MAX_ADAPTIVE_CUTOFF: usize = 960;

/// Coherent state parameters β = |β|e^{iφ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    pub magnitude: f64,
    pub phase: f64,
}

impl CoherentParams {
    pub fn from_complex(beta: Complex64) -> Self {
        Self { magnitude: beta.norm(), phase: beta.arg() }
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }
}

/// Squeezed vacuum parameters: squeezing r ≥ 0 and phase θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    pub r: f64,
    pub theta: f64,
}

/// Entangled coherent state parameter α. The normalization constant
/// 1/√(2(1+e^{−|α|²})) is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcsParams {
    pub alpha: Complex64,
}

impl EcsParams {
    /// N_α = 1/√(2(1+e^{−|α|²})).
    pub fn normalization(&self) -> f64 {
        1.0 / (2.0 * (1.0 + (-self.alpha.norm_sqr()).exp())).sqrt()
    }
}

/// Coherent state |β⟩: a_n = e^{−|β|²/2} β^n/√(n!).
pub fn coherent(p: &CoherentParams, cutoff: usize) -> ModeAmplitudes {
    let mut out = ModeAmplitudes::zero(cutoff);
    let b = p.magnitude;
    if b == 0.0 {
        out.set_amp(0, Complex64::new(1.0, 0.0));
        return out;
    }
    let ln_b = b.ln();
    let prefactor = -0.5 * b * b;
    for n in 0..=cutoff {
        let ln_mag = prefactor + n as f64 * ln_b - 0.5 * log_factorial(n);
        out.set_amp(n, Complex64::from_polar(ln_mag.exp(), n as f64 * p.phase));
    }
    out
}

/// Squeezed vacuum |ξ⟩: a_{2m} = (1/√cosh r)(−1)^m (√((2m)!)/(2^m m!))·
/// (e^{iθ} tanh r)^m, with odd entries exactly zero.
pub fn squeezed_vacuum(p: &SqueezeParams, cutoff: usize) -> ModeAmplitudes {
    let mut out = ModeAmplitudes::zero(cutoff);
    if p.r == 0.0 {
        out.set_amp(0, Complex64::new(1.0, 0.0));
        return out;
    }
    let ln_cosh = p.r.cosh().ln();
    let ln_tanh = p.r.tanh().ln();
    let ln2 = std::f64::consts::LN_2;
    for m in 0..=(cutoff / 2) {
        let mf = m as f64;
        let ln_mag = -0.5 * ln_cosh + 0.5 * log_factorial(2 * m) - mf * ln2
            - log_factorial(m)
            + mf * ln_tanh;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let amp = Complex64::from_polar(ln_mag.exp(), mf * p.theta) * sign;
        out.set_amp(2 * m, amp);
    }
    out
}

/// Even coherent-state superposition Ñ_β(|β⟩ + |−β⟩) with
/// Ñ_β = 1/√(2(1+e^{−2|β|²})). Built directly on even photon numbers so odd
/// entries are exactly zero.
pub fn css(p: &CoherentParams, cutoff: usize) -> ModeAmplitudes {
    let mut out = ModeAmplitudes::zero(cutoff);
    let b = p.magnitude;
    if b == 0.0 {
        out.set_amp(0, Complex64::new(1.0, 0.0));
        return out;
    }
    let ln_norm = (1.0 / (2.0 * (1.0 + (-2.0 * b * b).exp())).sqrt()).ln();
    let ln_b = b.ln();
    let prefactor = std::f64::consts::LN_2 + ln_norm - 0.5 * b * b;
    for n in (0..=cutoff).step_by(2) {
        let ln_mag = prefactor + n as f64 * ln_b - 0.5 * log_factorial(n);
        out.set_amp(n, Complex64::from_polar(ln_mag.exp(), n as f64 * p.phase));
    }
    out
}

/// Entangled coherent state N_α(|α,0⟩ + |0,α⟩). Entries with both indices
/// nonzero are exactly zero (corner structure).
pub fn ecs(p: &EcsParams, cutoff: usize) -> TwoModeAmplitudes {
    let norm = p.normalization();
    let coh = coherent(&CoherentParams::from_complex(p.alpha), cutoff);
    let mut out = TwoModeAmplitudes::zero(cutoff);
    for n in 1..=cutoff {
        out.set_amp(n, 0, norm * coh.amp(n));
        out.set_amp(0, n, norm * coh.amp(n));
    }
    out.set_amp(0, 0, 2.0 * norm * coh.amp(0));
    out
}

/// NOON state (|N,0⟩ + |0,N⟩)/√2.
pub fn noon(n: usize, cutoff: usize) -> Result<TwoModeAmplitudes, SimError> {
    noon_with_phase(n, 0.0, cutoff)
}

/// NOON state with a relative phase: (|N,0⟩ + e^{iφ}|0,N⟩)/√2.
pub fn noon_with_phase(
    n: usize,
    rel_phase: f64,
    cutoff: usize,
) -> Result<TwoModeAmplitudes, SimError> {
    if n > cutoff {
        return Err(SimError::ExceedsCutoff { n, cutoff });
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = TwoModeAmplitudes::zero(cutoff);
    if n == 0 {
        out.set_amp(0, 0, (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, rel_phase)) * inv_sqrt2);
        return Ok(out);
    }
    out.set_amp(n, 0, Complex64::new(inv_sqrt2, 0.0));
    out.set_amp(0, n, Complex64::from_polar(inv_sqrt2, rel_phase));
    Ok(out)
}

/// Mean photon number of an ECS: |α|²/(1+e^{−|α|²}).
pub fn ecs_mean_photons(alpha: Complex64) -> f64 {
    let a2 = alpha.norm_sqr();
    a2 / (1.0 + (-a2).exp())
}

/// Inverts [`ecs_mean_photons`]: finds |α|² giving the requested mean photon
/// number. Bisection on the monotone map a ↦ a/(1+e^{−a}).
pub fn alpha_sq_for_mean_photons(n_bar: f64) -> f64 {
    assert!(n_bar >= 0.0 && n_bar.is_finite());
    if n_bar == 0.0 {
        return 0.0;
    }
    // a/(1+e^{-a}) lies between a/2 and a, so [n_bar, 2 n_bar] brackets the root.
    let mut lo = n_bar;
    let mut hi = 2.0 * n_bar;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = mid / (1.0 + (-mid).exp());
        if f < n_bar {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Grows the cutoff (doubling from `DEFAULT_CUTOFF`) until the constructed
/// state's tail mass drops below `tail_tol`.
pub fn adaptive_single_mode<F>(build: F, tail_tol: f64) -> Result<ModeAmplitudes, SimError>
where
    F: Fn(usize) -> ModeAmplitudes,
{
    let mut cutoff = DEFAULT_CUTOFF;
    loop {
        let state = build(cutoff);
        let tail = state.tail_mass();
        if tail <= tail_tol {
            return Ok(state);
        }
        if cutoff >= MAX_ADAPTIVE_CUTOFF {
            return Err(SimError::Truncation { tail, tol: tail_tol, cutoff });
        }
        cutoff = (cutoff * 2).min(MAX_ADAPTIVE_CUTOFF);
    }
}

/// Smallest doubling-ladder cutoff at which `build` truncates below `tail_tol`.
pub fn adaptive_cutoff_for<F>(build: F, tail_tol: f64) -> Result<usize, SimError>
where
    F: Fn(usize) -> ModeAmplitudes,
{
    adaptive_single_mode(&build, tail_tol).map(|s| s.cutoff())
}
