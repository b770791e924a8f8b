//! Linear-optical transformations: beam splitter, phase shifter, the
//! coherent-plus-squeezed-vacuum mixing pipeline, and joint photon-number
//! statistics.
//!
//! The beam splitter uses the real orthogonal convention
//!
//! ```text
//! a† → √T c† + √(1−T) d†
//! b† → √(1−T) c† − √T d†
//! ```
//!
//! which at T = 1/2 maps |β⟩_a|γ⟩_b to |(β+γ)/√2⟩_c|(β−γ)/√2⟩_d. Under this
//! convention mixing |β⟩ with the even cat state of the same β yields the
//! exact entangled coherent state of amplitude √2β, and applying the balanced
//! splitter twice is the identity.

use num_complex::Complex64;

use crate::error::SimError;
use crate::fock::{log_binomial, log_factorial, JointPND, TwoModeAmplitudes};
use crate::states::{
    adaptive_cutoff_for, coherent, squeezed_vacuum, CoherentParams, SqueezeParams,
};

/// Probability floor below which an anti-diagonal of a joint distribution is
/// treated as absent rather than renormalized (suppresses division noise).
pub const PER_N_FLOOR_TOL: f64 = 1e-15;

/// Input tail mass beyond which [`mix_cs_sv`] refuses to proceed at a fixed
/// cutoff.
pub const MAX_INPUT_TAIL: f64 = 1e-6;

/// Beam splitter with transmissivity T ∈ [0, 1]; the mode convention is fixed
/// (see module docs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterSpec {
    pub transmissivity: f64,
}

impl BeamSplitterSpec {
    /// The 50/50 splitter.
    pub fn balanced() -> Self {
        Self { transmissivity: 0.5 }
    }
}

impl Default for BeamSplitterSpec {
    fn default() -> Self {
        Self::balanced()
    }
}

/// One of the two output modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    C,
    D,
}

/// How a pipeline chooses its Fock cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffSpec {
    /// Use exactly this per-mode cutoff.
    Fixed(usize),
    /// Double the cutoff until each input's tail mass is below `tail_tol`.
    Adaptive { tail_tol: f64 },
}

/// √x^e in log space; `None` marks a term that is exactly zero.
#[inline]
fn ln_pow_half(base: f64, exponent: i64) -> Option<f64> {
    if exponent == 0 {
        Some(0.0)
    } else if base <= 0.0 {
        None
    } else {
        Some(0.5 * exponent as f64 * base.ln())
    }
}

/// Matrix element ⟨p, q| BS |n_a, n_b⟩ for the fixed convention, computed as a
/// binomial sum in log space. Requires p + q = n_a + n_b.
fn bs_element(n_a: usize, n_b: usize, p: usize, t: f64) -> f64 {
    let u = 1.0 - t;
    let q = n_a + n_b - p;
    let j_min = p.saturating_sub(n_b);
    let j_max = p.min(n_a);
    if j_min > j_max {
        return 0.0;
    }
    let ln_fact =
        0.5 * (log_factorial(p) + log_factorial(q) - log_factorial(n_a) - log_factorial(n_b));
    let mut acc = 0.0;
    for j in j_min..=j_max {
        let k = p - j;
        // powers of √T and √(1−T) carried by this term
        let t_exp = (2 * j + n_b) as i64 - p as i64;
        let u_exp = (n_a + p) as i64 - 2 * j as i64;
        let (Some(lt), Some(lu)) = (ln_pow_half(t, t_exp), ln_pow_half(u, u_exp)) else {
            continue;
        };
        let ln_term = log_binomial(n_a, j) + log_binomial(n_b, k) + lt + lu + ln_fact;
        let sign = if (n_b - k) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * ln_term.exp();
    }
    acc
}

/// Applies the beam splitter to all Fock components. Photon number is
/// conserved per component; amplitude on anti-diagonals with total photon
/// number above the cutoff spills past the stored grid and shows up as tail
/// mass. On the subspace with total photons ≤ cutoff the map is exactly
/// unitary.
pub fn beam_splitter(input: &TwoModeAmplitudes, spec: &BeamSplitterSpec) -> TwoModeAmplitudes {
    let cutoff = input.cutoff();
    let dim = cutoff + 1;
    let t = spec.transmissivity;
    // warm the factorial table before fanning out
    let _ = log_factorial(2 * cutoff);

    let rows = crate::map_collect((0..dim).collect(), |p| {
        let mut row = vec![Complex64::new(0.0, 0.0); dim];
        for (q, cell) in row.iter_mut().enumerate() {
            let total = p + q;
            if total > 2 * cutoff {
                continue;
            }
            // fixed summation order over input components keeps the result
            // independent of scheduling
            let mut acc = Complex64::new(0.0, 0.0);
            let na_min = total.saturating_sub(cutoff);
            let na_max = total.min(cutoff);
            for n_a in na_min..=na_max {
                let n_b = total - n_a;
                let a = input.amp(n_a, n_b);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                acc += a * bs_element(n_a, n_b, p, t);
            }
            *cell = acc;
        }
        row
    });

    let mut amps = Vec::with_capacity(dim * dim);
    for row in rows {
        amps.extend(row);
    }
    TwoModeAmplitudes::from_flat(cutoff, amps)
}

/// Multiplies the amplitude at (m, n) by e^{i·angle·k}, where k is the photon
/// number in the selected mode.
pub fn phase_shift(input: &TwoModeAmplitudes, mode: Mode, angle: f64) -> TwoModeAmplitudes {
    let cutoff = input.cutoff();
    let mut out = input.clone();
    for m in 0..=cutoff {
        for n in 0..=cutoff {
            let k = match mode {
                Mode::C => m,
                Mode::D => n,
            };
            let rot = Complex64::from_polar(1.0, angle * k as f64);
            out.set_amp(m, n, input.amp(m, n) * rot);
        }
    }
    out
}

/// Result of the mixing pipeline: the renormalized output state plus
/// bookkeeping for truncation quality.
#[derive(Debug, Clone)]
pub struct MixOutput {
    pub state: TwoModeAmplitudes,
    /// Mean photon number fed in: |β|² + sinh²r.
    pub input_mean_photons: f64,
    /// Tail mass of the beam-splitter output before renormalization.
    pub tail_mass: f64,
    pub cutoff: usize,
}

/// Mixes a coherent state with squeezed vacuum on the balanced beam splitter
/// and renormalizes the output.
pub fn mix_cs_sv(
    cs: &CoherentParams,
    sv: &SqueezeParams,
    cutoff: CutoffSpec,
) -> Result<MixOutput, SimError> {
    let resolved = match cutoff {
        CutoffSpec::Fixed(c) => c,
        CutoffSpec::Adaptive { tail_tol } => {
            let c_coh = adaptive_cutoff_for(|c| coherent(cs, c), tail_tol)?;
            let c_sv = adaptive_cutoff_for(|c| squeezed_vacuum(sv, c), tail_tol)?;
            c_coh.max(c_sv)
        }
    };
    let coh = coherent(cs, resolved);
    let xi = squeezed_vacuum(sv, resolved);
    let input_tail = 1.0 - coh.norm_sqr() * xi.norm_sqr();
    if input_tail > MAX_INPUT_TAIL {
        return Err(SimError::Truncation { tail: input_tail, tol: MAX_INPUT_TAIL, cutoff: resolved });
    }
    let mixed = beam_splitter(&coh.tensor(&xi)?, &BeamSplitterSpec::balanced());
    let tail_mass = mixed.tail_mass();
    let state = mixed.normalized()?;
    Ok(MixOutput {
        state,
        input_mean_photons: cs.magnitude * cs.magnitude + sv.r.sinh().powi(2),
        tail_mass,
        cutoff: resolved,
    })
}

/// Joint photon-number distribution P_{m,n} = |C_{m,n}|².
pub fn joint_pnd(state: &TwoModeAmplitudes) -> JointPND {
    let cutoff = state.cutoff();
    let probs = state.amps().iter().map(|a| a.norm_sqr()).collect();
    JointPND::from_flat(cutoff, probs)
}

/// A joint distribution with each anti-diagonal N = m + n rescaled to unit
/// sum. Anti-diagonals whose raw mass fell below the floor are absent.
#[derive(Debug, Clone)]
pub struct PerNNormalized {
    cutoff: usize,
    probs: Vec<f64>,
    present: Vec<bool>, // indexed by N = m + n
}

impl PerNNormalized {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Normalized probability at (m, n), or `None` when the whole
    /// anti-diagonal was absent.
    pub fn prob(&self, m: usize, n: usize) -> Option<f64> {
        if self.present[m + n] {
            Some(self.probs[m * (self.cutoff + 1) + n])
        } else {
            None
        }
    }

    pub fn diagonal_present(&self, total: usize) -> bool {
        self.present[total]
    }
}

/// Rescales every anti-diagonal of `pnd` to sum to one:
/// P̃_{m,n} = P_{m,n} / Σ_k P_{k,N−k} with N = m + n.
pub fn per_n_normalized(pnd: &JointPND) -> PerNNormalized {
    let cutoff = pnd.cutoff();
    let dim = cutoff + 1;
    let mut probs = vec![0.0; dim * dim];
    let mut present = vec![false; 2 * cutoff + 1];
    for total in 0..=(2 * cutoff) {
        let m_lo = total.saturating_sub(cutoff);
        let m_hi = total.min(cutoff);
        let mass: f64 = (m_lo..=m_hi).map(|m| pnd.prob(m, total - m)).sum();
        if mass < PER_N_FLOOR_TOL {
            continue;
        }
        present[total] = true;
        for m in m_lo..=m_hi {
            probs[m * dim + (total - m)] = pnd.prob(m, total - m) / mass;
        }
    }
    PerNNormalized { cutoff, probs, present }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{css, ecs, noon, EcsParams};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn vacuum_is_invariant() {
        let vac = TwoModeAmplitudes::fock(0, 0, 6).unwrap();
        let out = beam_splitter(&vac, &BeamSplitterSpec::balanced());
        assert_eq!(out.amp(0, 0), Complex64::new(1.0, 0.0));
        assert_relative_eq!(out.norm_sqr(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn hong_ou_mandel_cancellation() {
        // |1,1⟩ → (|2,0⟩ − |0,2⟩)/√2 under the fixed convention
        let input = TwoModeAmplitudes::fock(1, 1, 6).unwrap();
        let out = beam_splitter(&input, &BeamSplitterSpec::balanced());
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(out.amp(2, 0).re, inv_sqrt2, max_relative = 1e-13);
        assert_relative_eq!(out.amp(0, 2).re, -inv_sqrt2, max_relative = 1e-13);
        assert!(out.amp(1, 1).norm() < 1e-14);
    }

    #[test]
    fn single_photon_splits_evenly() {
        let input = TwoModeAmplitudes::fock(1, 0, 4).unwrap();
        let out = beam_splitter(&input, &BeamSplitterSpec::balanced());
        let pnd = joint_pnd(&out);
        assert_relative_eq!(pnd.prob(1, 0), 0.5, max_relative = 1e-13);
        assert_relative_eq!(pnd.prob(0, 1), 0.5, max_relative = 1e-13);
    }

    #[test]
    fn unbalanced_splitter_transmits() {
        // T = 1: a† → c†, b† → −d†
        let input = TwoModeAmplitudes::fock(2, 1, 5).unwrap();
        let out = beam_splitter(&input, &BeamSplitterSpec { transmissivity: 1.0 });
        assert_relative_eq!(out.amp(2, 1).re, -1.0, max_relative = 1e-13);
        // T = 0: a† → d†, b† → c†
        let out0 = beam_splitter(&input, &BeamSplitterSpec { transmissivity: 0.0 });
        assert_relative_eq!(out0.amp(1, 2).re, 1.0, max_relative = 1e-13);
    }

    #[test]
    fn balanced_splitter_is_involutive() {
        // the fixed convention is a real symmetric orthogonal map, so applying
        // it twice restores the input
        let state = ecs(&EcsParams { alpha: Complex64::new(0.7, 0.2) }, 12)
            .normalized()
            .unwrap();
        let twice = beam_splitter(
            &beam_splitter(&state, &BeamSplitterSpec::balanced()),
            &BeamSplitterSpec::balanced(),
        );
        for m in 0..=12 {
            for n in 0..=12 {
                assert!((twice.amp(m, n) - state.amp(m, n)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn phase_shift_identity_and_magnitudes() {
        let state = noon(2, 6).unwrap();
        let same = phase_shift(&state, Mode::D, 0.0);
        assert_eq!(state, same);

        let rotated = phase_shift(&state, Mode::D, 1.234);
        let p0 = joint_pnd(&state);
        let p1 = joint_pnd(&rotated);
        for m in 0..=6 {
            for n in 0..=6 {
                assert_relative_eq!(p0.prob(m, n), p1.prob(m, n), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn phase_shift_half_turn_flips_two_photon_component() {
        // e^{iπ/2·2} = −1 on the (0,2) cell
        let state = noon(2, 6).unwrap();
        let rotated = phase_shift(&state, Mode::D, FRAC_PI_2);
        assert_relative_eq!(rotated.amp(0, 2).re, -state.amp(0, 2).re, max_relative = 1e-13);
        // a full π shift leaves the even component unchanged
        let full = phase_shift(&state, Mode::D, PI);
        assert!((full.amp(0, 2) - state.amp(0, 2)).norm() < 1e-13);
    }

    #[test]
    fn mix_vacuum_inputs_give_vacuum() {
        let out = mix_cs_sv(
            &CoherentParams { magnitude: 0.0, phase: 0.0 },
            &SqueezeParams { r: 0.0, theta: 0.0 },
            CutoffSpec::Fixed(8),
        )
        .unwrap();
        assert_relative_eq!(out.state.amp(0, 0).re, 1.0, max_relative = 1e-14);
        assert_eq!(out.input_mean_photons, 0.0);
    }

    #[test]
    fn mix_without_squeezing_is_poisson_product() {
        // a coherent state splits into two coherent states of amplitude β/√2
        let beta = 0.75;
        let out = mix_cs_sv(
            &CoherentParams { magnitude: beta, phase: 0.0 },
            &SqueezeParams { r: 0.0, theta: 0.0 },
            CutoffSpec::Fixed(30),
        )
        .unwrap();
        let pnd = joint_pnd(&out.state);
        assert_relative_eq!(pnd.prob(0, 0), 0.5697828247309230, max_relative = 1e-9);
        let mean = beta * beta / 2.0;
        for m in 0..=4 {
            for n in 0..=4 {
                let poisson = |k: usize| {
                    ((-mean).exp() * mean.powi(k as i32)) / (1..=k).product::<usize>() as f64
                };
                assert_relative_eq!(pnd.prob(m, n), poisson(m) * poisson(n), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn mix_pure_squeezing_preserves_even_parity() {
        let out = mix_cs_sv(
            &CoherentParams { magnitude: 0.0, phase: 0.0 },
            &SqueezeParams { r: 0.6, theta: 0.9 },
            CutoffSpec::Fixed(24),
        )
        .unwrap();
        let pnd = joint_pnd(&out.state);
        for m in 0..=24usize {
            for n in 0..=24usize {
                if (m + n) % 2 == 1 {
                    assert_eq!(pnd.prob(m, n), 0.0);
                }
            }
        }
    }

    #[test]
    fn mix_rejects_inadequate_cutoff() {
        let err = mix_cs_sv(
            &CoherentParams { magnitude: 2.0, phase: 0.0 },
            &SqueezeParams { r: 0.0, theta: 0.0 },
            CutoffSpec::Fixed(3),
        );
        assert!(matches!(err, Err(SimError::Truncation { .. })));
    }

    #[test]
    fn css_mixing_yields_exact_ecs() {
        // |β⟩ ⊗ CSS(β) → ECS(√2 β), up to numerical precision
        for &beta in &[0.1, 0.5, 1.0] {
            let p = CoherentParams { magnitude: beta, phase: 0.0 };
            let input = coherent(&p, 30).tensor(&css(&p, 30)).unwrap();
            let out = beam_splitter(&input, &BeamSplitterSpec::balanced());
            let target = ecs(
                &EcsParams { alpha: Complex64::new(beta * std::f64::consts::SQRT_2, 0.0) },
                30,
            );
            let overlap = out
                .normalized()
                .unwrap()
                .inner_product(&target.normalized().unwrap())
                .unwrap();
            assert!(overlap.norm_sqr() >= 1.0 - 1e-9, "beta = {beta}: {}", overlap.norm_sqr());
        }
    }

    #[test]
    fn joint_pnd_examples() {
        let state = noon(2, 8).unwrap();
        let pnd = joint_pnd(&state);
        assert_relative_eq!(pnd.prob(2, 0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(pnd.prob(0, 2), 0.5, max_relative = 1e-15);
        assert_relative_eq!(pnd.total(), 1.0, max_relative = 1e-15);

        let corner = joint_pnd(&ecs(&EcsParams { alpha: Complex64::new(1.2, 0.0) }, 16));
        for m in 1..=16 {
            for n in 1..=16 {
                assert_eq!(corner.prob(m, n), 0.0);
            }
        }
    }

    #[test]
    fn per_n_normalization_arithmetic() {
        let mut pnd = JointPND::zero(2);
        pnd.set_prob(2, 0, 0.02);
        pnd.set_prob(1, 1, 0.01);
        pnd.set_prob(0, 2, 0.02);
        let tilde = per_n_normalized(&pnd);
        assert_relative_eq!(tilde.prob(2, 0).unwrap(), 0.4, max_relative = 1e-12);
        assert_relative_eq!(tilde.prob(1, 1).unwrap(), 0.2, max_relative = 1e-12);
        assert_relative_eq!(tilde.prob(0, 2).unwrap(), 0.4, max_relative = 1e-12);
        // anti-diagonals with no mass are absent, not NaN
        assert!(!tilde.diagonal_present(1));
        assert_eq!(tilde.prob(1, 0), None);
    }

    #[test]
    fn per_n_normalization_of_ecs_is_half_half() {
        let pnd = joint_pnd(&ecs(&EcsParams { alpha: Complex64::new(0.9, 0.0) }, 12));
        let tilde = per_n_normalized(&pnd);
        for total in 1..=8usize {
            assert_relative_eq!(tilde.prob(total, 0).unwrap(), 0.5, max_relative = 1e-9);
            assert_relative_eq!(tilde.prob(0, total).unwrap(), 0.5, max_relative = 1e-9);
        }
    }
}
