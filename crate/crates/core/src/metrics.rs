//! Fidelity between the mixed output and an ideal entangled coherent state,
//! in closed form and numerically, plus the optimal-squeezing relation and
//! the squared-Bhattacharyya similarity for measured distributions.

use num_complex::Complex64;

use crate::error::SimError;
use crate::fock::{ModeAmplitudes, TwoModeAmplitudes};
use crate::optics::{mix_cs_sv, CutoffSpec};
use crate::states::{alpha_sq_for_mean_photons, css, ecs, CoherentParams, EcsParams, SqueezeParams};

/// Discrepancy between the closed-form and numeric fidelity routes above
/// which a [`FidelityReport`] flags itself; signals a convention or
/// truncation bug rather than a physics result.
pub const FIDELITY_DISCREPANCY_WARN: f64 = 1e-6;

/// Closed-form fidelity between the ECS of amplitude α and the state obtained
/// by mixing |β = α/√2⟩ with squeezed vacuum (r, θ):
///
/// ```text
/// F = e^{−(|α|²/2)·cos(θ−2φ)·tanh r} / (cosh r · cosh(|α|²/2))
/// ```
pub fn fidelity_closed_form(alpha: Complex64, sv: &SqueezeParams) -> f64 {
    let a2 = alpha.norm_sqr();
    let phi = alpha.arg();
    let exponent = -(a2 / 2.0) * (sv.theta - 2.0 * phi).cos() * sv.r.tanh();
    exponent.exp() / (sv.r.cosh() * (a2 / 2.0).cosh())
}

/// Squeezing parameters maximizing [`fidelity_closed_form`] at fixed α:
/// r = arcsinh(|α|²)/2 and θ = 2φ + π (mod 2π).
pub fn optimal_squeezing(alpha: Complex64) -> SqueezeParams {
    let a2 = alpha.norm_sqr();
    let theta = (2.0 * alpha.arg() + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU);
    SqueezeParams { r: a2.asinh() / 2.0, theta }
}

/// |⟨A|B⟩|² after renormalizing both states.
pub fn two_mode_fidelity(
    a: &TwoModeAmplitudes,
    b: &TwoModeAmplitudes,
) -> Result<f64, SimError> {
    let a = a.normalized()?;
    let b = b.normalized()?;
    Ok(a.inner_product(&b)?.norm_sqr())
}

/// Fidelity between the even cat state of amplitude α/√2 and the vacuum,
/// evaluated numerically as a single-mode overlap. The classical baseline
/// curve: it stays strictly below the optimal-squeezing fidelity.
pub fn vacuum_baseline_fidelity(alpha: Complex64, cutoff: usize) -> f64 {
    let beta = alpha / std::f64::consts::SQRT_2;
    let cat = css(&CoherentParams::from_complex(beta), cutoff);
    let vac = ModeAmplitudes::fock(0, cutoff).expect("vacuum fits any cutoff");
    cat.inner_product(&vac).expect("equal cutoffs").norm_sqr()
}

/// Squared Bhattacharyya coefficient (Σ √(p·q))² between two nonnegative
/// tables on the same grid, each renormalized to unit sum first.
pub fn similarity(p: &[f64], q: &[f64]) -> Result<f64, SimError> {
    if p.len() != q.len() {
        return Err(SimError::ShapeMismatch { left: p.len(), right: q.len() });
    }
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    if sp <= 0.0 || sq <= 0.0 {
        return Err(SimError::EmptySupport);
    }
    let bc: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| ((a / sp) * (b / sq)).max(0.0).sqrt())
        .sum();
    Ok(bc * bc)
}

/// Both fidelity routes for one (α, r, θ) point, with their discrepancy.
#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub closed_form: f64,
    pub numeric: f64,
    pub cutoff: usize,
    pub discrepancy: f64,
}

impl FidelityReport {
    /// True when the two routes disagree beyond [`FIDELITY_DISCREPANCY_WARN`].
    pub fn discrepancy_warning(&self) -> bool {
        self.discrepancy > FIDELITY_DISCREPANCY_WARN
    }
}

/// Evaluates the fidelity both ways: the closed form above, and the numeric
/// overlap of the ECS with the actually-mixed state.
pub fn fidelity_report(
    alpha: Complex64,
    sv: &SqueezeParams,
    cutoff: CutoffSpec,
) -> Result<FidelityReport, SimError> {
    let closed_form = fidelity_closed_form(alpha, sv);
    let beta = alpha / std::f64::consts::SQRT_2;
    let mixed = mix_cs_sv(&CoherentParams::from_complex(beta), sv, cutoff)?;
    let target = ecs(&EcsParams { alpha }, mixed.cutoff);
    let numeric = two_mode_fidelity(&target, &mixed.state)?;
    Ok(FidelityReport {
        closed_form,
        numeric,
        cutoff: mixed.cutoff,
        discrepancy: (closed_form - numeric).abs(),
    })
}

/// One row of the fidelity-versus-mean-photon-number curve.
#[derive(Debug, Clone, Copy)]
pub struct FidelityCurvePoint {
    pub n_bar: f64,
    pub f_opt: f64,
    pub f_vacuum: f64,
}

/// Optimal-squeezing fidelity and the vacuum baseline over a mean-photon
/// grid. `phi` is the coherent-state phase carried by α.
pub fn fidelity_curve(n_bar_grid: &[f64], phi: f64, cutoff: usize) -> Vec<FidelityCurvePoint> {
    crate::map_collect(n_bar_grid.to_vec(), |n_bar| {
        let alpha = Complex64::from_polar(alpha_sq_for_mean_photons(n_bar).sqrt(), phi);
        let sv = optimal_squeezing(alpha);
        FidelityCurvePoint {
            n_bar,
            f_opt: fidelity_closed_form(alpha, &sv),
            f_vacuum: vacuum_baseline_fidelity(alpha, cutoff),
        }
    })
}
