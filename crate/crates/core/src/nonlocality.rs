//! Bell-type nonlocality analysis via coherent-state projector expectations.
//!
//! The functional extremized here combines single- and two-mode expectations
//! of the projector |μ⟩⟨μ| over four complex phase-space points:
//!
//! ```text
//! J3 = Q(α) − Q(α,β) − Q(α,γ) − Q(α,δ) + Q(β,γ) + Q(β,δ) + Q(γ,δ)
//! ```
//!
//! with the single-mode term taken in mode c and every joint term between
//! modes c and d. The classical inequality reads J3 ≤ 0; we evaluate the
//! functional verbatim and report both the minimum and the maximum over the
//! eight real parameters, extremized by a seeded multi-start simplex search.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SimError;
use crate::fock::TwoModeAmplitudes;
use crate::optics::{mix_cs_sv, phase_shift, CutoffSpec, Mode};
use crate::states::{alpha_sq_for_mean_photons, ecs, CoherentParams, EcsParams};

/// A point μ in single-mode phase space.
pub type PhaseSpacePoint = Complex64;

/// The four complex phase-space points the functional ranges over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct J3Params {
    pub alpha: PhaseSpacePoint,
    pub beta: PhaseSpacePoint,
    pub gamma: PhaseSpacePoint,
    pub delta: PhaseSpacePoint,
}

impl J3Params {
    fn from_coords(x: &[f64; 8]) -> Self {
        Self {
            alpha: Complex64::new(x[0], x[1]),
            beta: Complex64::new(x[2], x[3]),
            gamma: Complex64::new(x[4], x[5]),
            delta: Complex64::new(x[6], x[7]),
        }
    }

    fn clamped(&self, bound: f64) -> Self {
        let clamp = |z: Complex64| {
            let r = z.norm();
            if r > bound {
                z * (bound / r)
            } else {
                z
            }
        };
        Self {
            alpha: clamp(self.alpha),
            beta: clamp(self.beta),
            gamma: clamp(self.gamma),
            delta: clamp(self.delta),
        }
    }
}

/// Which extremum to search for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// Multi-start simplex search controls.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iters: usize,
    /// Start points are drawn uniformly per parameter in this disk.
    pub start_radius: f64,
    /// Hard modulus bound on every phase-space parameter.
    pub bound: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 1729,
            tol: 1e-9,
            max_iters: 1500,
            start_radius: 1.5,
            bound: 3.0,
        }
    }
}

/// Outcome of one extremization: the best value over all restarts and the
/// provenance needed to reproduce it.
#[derive(Debug, Clone)]
pub struct J3Result {
    pub value: f64,
    pub params: J3Params,
    pub direction: Direction,
    pub restarts: usize,
    pub seed: u64,
    pub converged: bool,
    pub iterations: usize,
}

/// Coherent bra row ⟨μ|j⟩ = e^{−|μ|²/2}(μ*)^j/√(j!) for j up to the cutoff.
fn coherent_bra(mu: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut bra = Vec::with_capacity(cutoff + 1);
    let mut cur = Complex64::new((-0.5 * mu.norm_sqr()).exp(), 0.0);
    bra.push(cur);
    let conj = mu.conj();
    for j in 1..=cutoff {
        cur = cur * conj / (j as f64).sqrt();
        bra.push(cur);
    }
    bra
}

/// ⟨ψ|(|μ⟩⟨μ| on `mode`) ⊗ I|ψ⟩ = Σ_k |Σ_j ⟨μ|j⟩·C(j,k)|² for a pure state.
pub fn q_single(state: &TwoModeAmplitudes, mode: Mode, mu: PhaseSpacePoint) -> f64 {
    let cutoff = state.cutoff();
    let bra = coherent_bra(mu, cutoff);
    let mut total = 0.0;
    match mode {
        Mode::C => {
            for k in 0..=cutoff {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, b) in bra.iter().enumerate() {
                    acc += b * state.amp(j, k);
                }
                total += acc.norm_sqr();
            }
        }
        Mode::D => {
            for j in 0..=cutoff {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, b) in bra.iter().enumerate() {
                    acc += b * state.amp(j, k);
                }
                total += acc.norm_sqr();
            }
        }
    }
    total
}

/// ⟨ψ|(|μ⟩⟨μ|)_c ⊗ (|ν⟩⟨ν|)_d|ψ⟩ = |Σ_{j,k} ⟨μ|j⟩⟨ν|k⟩·C(j,k)|² for a pure
/// state.
pub fn q_joint(state: &TwoModeAmplitudes, mu: PhaseSpacePoint, nu: PhaseSpacePoint) -> f64 {
    let cutoff = state.cutoff();
    let bra_mu = coherent_bra(mu, cutoff);
    let bra_nu = coherent_bra(nu, cutoff);
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, bm) in bra_mu.iter().enumerate() {
        let mut inner = Complex64::new(0.0, 0.0);
        for (k, bn) in bra_nu.iter().enumerate() {
            inner += bn * state.amp(j, k);
        }
        acc += bm * inner;
    }
    acc.norm_sqr()
}

/// Evaluates the J3 functional at the given parameters. The single-mode term
/// is taken in mode c; joint terms put their first argument in c and second
/// in d.
pub fn j3(state: &TwoModeAmplitudes, p: &J3Params) -> f64 {
    let cutoff = state.cutoff();
    let dim = cutoff + 1;
    let bra_a = coherent_bra(p.alpha, cutoff);
    let bra_b = coherent_bra(p.beta, cutoff);
    let bra_g = coherent_bra(p.gamma, cutoff);
    let bra_d = coherent_bra(p.delta, cutoff);

    // w_ν[j] = Σ_k ⟨ν|k⟩ C(j,k): one pass per second-slot parameter
    let contract = |bra: &[Complex64]| -> Vec<Complex64> {
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        for (j, wj) in w.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, b) in bra.iter().enumerate() {
                acc += b * state.amp(j, k);
            }
            *wj = acc;
        }
        w
    };
    let w_b = contract(&bra_b);
    let w_g = contract(&bra_g);
    let w_d = contract(&bra_d);

    let dot = |bra: &[Complex64], w: &[Complex64]| -> f64 {
        bra.iter()
            .zip(w)
            .map(|(b, v)| b * v)
            .sum::<Complex64>()
            .norm_sqr()
    };

    let q_a = {
        // single-mode term in mode c
        let mut total = 0.0;
        for k in 0..=cutoff {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, b) in bra_a.iter().enumerate() {
                acc += b * state.amp(j, k);
            }
            total += acc.norm_sqr();
        }
        total
    };

    q_a - dot(&bra_a, &w_b) - dot(&bra_a, &w_g) - dot(&bra_a, &w_d)
        + dot(&bra_b, &w_g)
        + dot(&bra_b, &w_d)
        + dot(&bra_g, &w_d)
}

struct SimplexOutcome {
    value: f64,
    point: [f64; 8],
    converged: bool,
    iterations: usize,
}

/// Nelder–Mead on the 8 real coordinates. Standard reflection/expansion/
/// contraction/shrink coefficients; converges when the simplex value spread
/// falls below `tol`.
fn nelder_mead<F>(f: &F, start: [f64; 8], tol: f64, max_iters: usize) -> SimplexOutcome
where
    F: Fn(&[f64; 8]) -> f64,
{
    const DIM: usize = 8;
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    const INIT_STEP: f64 = 0.4;

    let mut simplex: Vec<[f64; 8]> = Vec::with_capacity(DIM + 1);
    simplex.push(start);
    for i in 0..DIM {
        let mut v = start;
        v[i] += INIT_STEP;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        // order ascending by value; stable sort keeps ties deterministic
        let mut order: Vec<usize> = (0..=DIM).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[DIM];
        let second_worst = order[DIM - 1];

        if (values[worst] - values[best]).abs() <= tol * (1.0 + values[best].abs()) {
            converged = true;
            break;
        }

        let mut centroid = [0.0; 8];
        for &i in order.iter().take(DIM) {
            for (c, s) in centroid.iter_mut().zip(simplex[i].iter()) {
                *c += s;
            }
        }
        for c in centroid.iter_mut() {
            *c /= DIM as f64;
        }

        let mut reflected = [0.0; 8];
        for i in 0..DIM {
            reflected[i] = centroid[i] + ALPHA * (centroid[i] - simplex[worst][i]);
        }
        let f_reflected = f(&reflected);

        if f_reflected < values[best] {
            let mut expanded = [0.0; 8];
            for i in 0..DIM {
                expanded[i] = centroid[i] + GAMMA * (centroid[i] - simplex[worst][i]);
            }
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            let mut contracted = [0.0; 8];
            for i in 0..DIM {
                contracted[i] = centroid[i] + RHO * (simplex[worst][i] - centroid[i]);
            }
            let f_contracted = f(&contracted);
            if f_contracted < values[worst] {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // shrink toward the best vertex
                let best_point = simplex[best];
                for i in 0..=DIM {
                    if i == best {
                        continue;
                    }
                    for d in 0..DIM {
                        simplex[i][d] = best_point[d] + SIGMA * (simplex[i][d] - best_point[d]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let (best_idx, _) = values
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
        .unwrap();
    SimplexOutcome {
        value: values[best_idx],
        point: simplex[best_idx],
        converged,
        iterations,
    }
}

/// Uniform draw from the disk |z| ≤ radius.
fn sample_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = radius * rng.gen_range(0.0f64..=1.0).sqrt();
    Complex64::from_polar(r, angle)
}

/// Extremizes J3 over the four complex parameters with seeded multi-start
/// simplex searches. Each restart draws its start point from an indexed
/// substream of the seed, so results are reproducible and independent of
/// scheduling; the best restart wins, ties broken by restart index.
pub fn j3_extremize(
    state: &TwoModeAmplitudes,
    direction: Direction,
    settings: &OptimizerSettings,
) -> J3Result {
    assert!(settings.restarts >= 1, "at least one restart required");
    let bound = settings.bound;
    let sign = match direction {
        Direction::Min => 1.0,
        Direction::Max => -1.0,
    };
    let objective = move |x: &[f64; 8]| {
        let p = J3Params::from_coords(x).clamped(bound);
        sign * j3(state, &p)
    };

    let outcomes = crate::map_collect((0..settings.restarts).collect(), |restart| {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        rng.set_stream(restart as u64);
        let mut start = [0.0; 8];
        for pair in 0..4 {
            let z = sample_disk(&mut rng, settings.start_radius);
            start[2 * pair] = z.re;
            start[2 * pair + 1] = z.im;
        }
        nelder_mead(&objective, start, settings.tol, settings.max_iters)
    });

    let mut best_idx = 0;
    for i in 1..outcomes.len() {
        if outcomes[i].value < outcomes[best_idx].value {
            best_idx = i;
        }
    }
    let best = &outcomes[best_idx];
    J3Result {
        value: sign * best.value,
        params: J3Params::from_coords(&best.point).clamped(bound),
        direction,
        restarts: settings.restarts,
        seed: settings.seed,
        converged: best.converged,
        iterations: best.iterations,
    }
}

/// Which family of states a J3 curve is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSource {
    /// Ideal entangled coherent states.
    Ecs,
    /// Coherent light mixed with optimally squeezed vacuum.
    Mixed,
}

/// One curve point: both extremization directions at a given mean photon
/// number.
#[derive(Debug, Clone)]
pub struct J3CurvePoint {
    pub n_bar: f64,
    pub minimum: J3Result,
    pub maximum: J3Result,
}

/// Builds the requested state at each mean photon number, applies the π/2
/// phase shift in mode d, and extremizes J3 in both directions.
pub fn j3_curve(
    n_bar_grid: &[f64],
    source: CurveSource,
    settings: &OptimizerSettings,
    cutoff: CutoffSpec,
) -> Result<Vec<J3CurvePoint>, SimError> {
    let mut points = Vec::with_capacity(n_bar_grid.len());
    for &n_bar in n_bar_grid {
        let state = j3_curve_state(n_bar, source, cutoff)?;
        let minimum = j3_extremize(&state, Direction::Min, settings);
        let maximum = j3_extremize(&state, Direction::Max, settings);
        points.push(J3CurvePoint { n_bar, minimum, maximum });
    }
    Ok(points)
}

/// The phase-shifted, normalized state a J3 curve point extremizes over.
pub fn j3_curve_state(
    n_bar: f64,
    source: CurveSource,
    cutoff: CutoffSpec,
) -> Result<TwoModeAmplitudes, SimError> {
    let alpha_sq = alpha_sq_for_mean_photons(n_bar);
    let alpha = Complex64::new(alpha_sq.sqrt(), 0.0);
    let state = match source {
        CurveSource::Ecs => {
            let resolved = match cutoff {
                CutoffSpec::Fixed(c) => c,
                CutoffSpec::Adaptive { tail_tol } => crate::states::adaptive_cutoff_for(
                    |c| crate::states::coherent(&CoherentParams::from_complex(alpha), c),
                    tail_tol,
                )?,
            };
            ecs(&EcsParams { alpha }, resolved).normalized()?
        }
        CurveSource::Mixed => {
            let beta = alpha / std::f64::consts::SQRT_2;
            let sv = crate::metrics::optimal_squeezing(alpha);
            mix_cs_sv(&CoherentParams::from_complex(beta), &sv, cutoff)?.state
        }
    };
    Ok(phase_shift(&state, Mode::D, std::f64::consts::FRAC_PI_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::noon;
    use approx::assert_relative_eq;

    fn vacuum(cutoff: usize) -> TwoModeAmplitudes {
        TwoModeAmplitudes::fock(0, 0, cutoff).unwrap()
    }

    #[test]
    fn q_single_on_vacuum() {
        let v = vacuum(12);
        let q = q_single(&v, Mode::C, Complex64::new(1.0, 0.0));
        assert_relative_eq!(q, 0.3678794411714423, max_relative = 1e-12);
    }

    #[test]
    fn q_single_orthogonal_projector() {
        // vacuum projector against a pure one-photon state
        let s = TwoModeAmplitudes::fock(1, 0, 6).unwrap();
        assert_eq!(q_single(&s, Mode::C, Complex64::new(0.0, 0.0)), 0.0);
        // but mode d of |1,0⟩ is vacuum
        assert_relative_eq!(
            q_single(&s, Mode::D, Complex64::new(0.0, 0.0)),
            1.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn q_joint_on_vacuum_factorizes() {
        let v = vacuum(10);
        let mu = Complex64::new(0.8, -0.3);
        let nu = Complex64::new(-0.2, 0.5);
        let q = q_joint(&v, mu, nu);
        assert_relative_eq!(
            q,
            (-mu.norm_sqr() - nu.norm_sqr()).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn q_joint_factorizes_on_product_states() {
        let coh = crate::states::coherent(&CoherentParams { magnitude: 0.6, phase: 0.4 }, 14);
        let sv = crate::states::squeezed_vacuum(
            &crate::states::SqueezeParams { r: 0.4, theta: 1.0 },
            14,
        );
        let prod = coh.tensor(&sv).unwrap().normalized().unwrap();
        let mu = Complex64::new(0.5, 0.2);
        let nu = Complex64::new(-0.3, 0.7);
        let joint = q_joint(&prod, mu, nu);
        let qc = q_single(&prod, Mode::C, mu);
        let qd = q_single(&prod, Mode::D, nu);
        assert_relative_eq!(joint, qc * qd, epsilon = 1e-10);
        assert!(joint <= qc.min(qd) + 1e-12);
    }

    #[test]
    fn j3_degenerate_parameters_collapse_to_q_single() {
        let state = noon(2, 10).unwrap();
        let mu = Complex64::new(0.7, 0.1);
        let p = J3Params { alpha: mu, beta: mu, gamma: mu, delta: mu };
        assert_relative_eq!(j3(&state, &p), q_single(&state, Mode::C, mu), epsilon = 1e-12);
    }

    #[test]
    fn j3_vacuum_closed_form() {
        let v = vacuum(8);
        for &m in &[0.3, 1.0, 1.7] {
            let mu = Complex64::new(m, 0.0);
            let zero = Complex64::new(0.0, 0.0);
            let p = J3Params { alpha: mu, beta: zero, gamma: zero, delta: zero };
            assert_relative_eq!(
                j3(&v, &p),
                3.0 - 2.0 * (-mu.norm_sqr()).exp(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn extremizer_is_deterministic_and_dominates_starts() {
        let state = j3_curve_state(0.15, CurveSource::Ecs, CutoffSpec::Fixed(16)).unwrap();
        let settings = OptimizerSettings { restarts: 8, max_iters: 400, ..Default::default() };
        let a = j3_extremize(&state, Direction::Max, &settings);
        let b = j3_extremize(&state, Direction::Max, &settings);
        assert_eq!(a.value, b.value);
        assert_eq!(a.params, b.params);
        assert_eq!(a.converged, b.converged);

        // the reported extremum dominates the value at every sampled start
        for restart in 0..settings.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            rng.set_stream(restart as u64);
            let mut start = [0.0; 8];
            for pair in 0..4 {
                let z = sample_disk(&mut rng, settings.start_radius);
                start[2 * pair] = z.re;
                start[2 * pair + 1] = z.im;
            }
            let at_start = j3(&state, &J3Params::from_coords(&start));
            assert!(a.value >= at_start - 1e-12);
        }
    }

    #[test]
    fn doubling_restarts_never_worsens() {
        let state = j3_curve_state(0.3, CurveSource::Ecs, CutoffSpec::Fixed(16)).unwrap();
        let base = OptimizerSettings { restarts: 4, max_iters: 400, ..Default::default() };
        let doubled = OptimizerSettings { restarts: 8, ..base };
        let small = j3_extremize(&state, Direction::Min, &base);
        let large = j3_extremize(&state, Direction::Min, &doubled);
        assert!(large.value <= small.value + 1e-15);
    }

    #[test]
    fn parameters_respect_bound() {
        let state = j3_curve_state(0.5, CurveSource::Ecs, CutoffSpec::Fixed(14)).unwrap();
        let settings = OptimizerSettings { restarts: 6, max_iters: 300, ..Default::default() };
        let res = j3_extremize(&state, Direction::Max, &settings);
        for z in [res.params.alpha, res.params.beta, res.params.gamma, res.params.delta] {
            assert!(z.norm() <= settings.bound + 1e-12);
        }
        assert_relative_eq!(res.value, j3(&state, &res.params), epsilon = 1e-6);
    }

    #[test]
    fn curve_at_zero_photons_matches_for_both_sources() {
        let settings = OptimizerSettings { restarts: 6, max_iters: 300, ..Default::default() };
        let cutoff = CutoffSpec::Fixed(12);
        let ecs_pts = j3_curve(&[0.0], CurveSource::Ecs, &settings, cutoff).unwrap();
        let mix_pts = j3_curve(&[0.0], CurveSource::Mixed, &settings, cutoff).unwrap();
        assert_relative_eq!(
            ecs_pts[0].minimum.value,
            mix_pts[0].minimum.value,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            ecs_pts[0].maximum.value,
            mix_pts[0].maximum.value,
            epsilon = 1e-9
        );
    }
}
