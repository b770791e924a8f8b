//! The measurement chain: binomial loss, multiplexed click statistics (a 1:D
//! fiber splitter feeding D on/off detectors per mode), the detected-ECS
//! reference, and the similarity sweep over the squeezed-vacuum fraction.
//!
//! Loss acts on photon-number distributions rather than amplitudes. Every
//! observable downstream is a photon or click count, for which independent
//! binomial thinning per mode is exact, so density matrices never appear.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SimError;
use crate::fock::{log_binomial, JointPND};
use crate::metrics::{optimal_squeezing, similarity};
use crate::optics::{joint_pnd, mix_cs_sv, CutoffSpec, Mode};
use crate::states::{alpha_sq_for_mean_photons, ecs, CoherentParams, EcsParams};
use crate::Complex64;

/// Samples per Monte Carlo substream; the chunked reduction keeps results
/// identical across thread schedules.
const MC_CHUNK: u64 = 65_536;

/// Multiplexed detector bank for both output modes.
#[derive(Debug, Clone)]
pub struct DetectorConfig {
    detectors: usize,
    weights_c: Vec<f64>,
    weights_d: Vec<f64>,
    pub eta_c: f64,
    pub eta_d: f64,
}

impl DetectorConfig {
    /// Uniform splitter weights with per-mode transmission η.
    pub fn new(detectors: usize, eta_c: f64, eta_d: f64) -> Result<Self, SimError> {
        let w = vec![1.0 / detectors as f64; detectors];
        Self::with_weights(w.clone(), w, eta_c, eta_d)
    }

    /// Explicit per-detector splitter weights (each mode's weights must be
    /// nonnegative and sum to one).
    pub fn with_weights(
        weights_c: Vec<f64>,
        weights_d: Vec<f64>,
        eta_c: f64,
        eta_d: f64,
    ) -> Result<Self, SimError> {
        if weights_c.is_empty() || weights_c.len() != weights_d.len() {
            return Err(SimError::InvalidParameter(format!(
                "weight vectors must be nonempty and equal length ({} vs {})",
                weights_c.len(),
                weights_d.len()
            )));
        }
        for (label, w) in [("c", &weights_c), ("d", &weights_d)] {
            if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                return Err(SimError::InvalidParameter(format!(
                    "mode {label} weights must be nonnegative"
                )));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(SimError::InvalidParameter(format!(
                    "mode {label} weights sum to {sum}, expected 1"
                )));
            }
        }
        for (label, eta) in [("eta_c", eta_c), ("eta_d", eta_d)] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(SimError::InvalidParameter(format!("{label} = {eta} outside [0,1]")));
            }
        }
        Ok(Self { detectors: weights_c.len(), weights_c, weights_d, eta_c, eta_d })
    }

    pub fn detectors(&self) -> usize {
        self.detectors
    }

    pub fn weights(&self, mode: Mode) -> &[f64] {
        match mode {
            Mode::C => &self.weights_c,
            Mode::D => &self.weights_d,
        }
    }

    fn uniform(&self, mode: Mode) -> bool {
        let target = 1.0 / self.detectors as f64;
        self.weights(mode).iter().all(|&w| (w - target).abs() <= 1e-12)
    }
}

impl Default for DetectorConfig {
    /// Eight detectors per mode behind uniform 1:8 splitters, 10% per-mode
    /// transmission (the experimental operating point).
    fn default() -> Self {
        Self::new(8, 0.1, 0.1).expect("default config is valid")
    }
}

/// Joint click-count distribution over pairs (k_c, k_d), 0 ≤ k ≤ D.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickPND {
    detectors: usize,
    probs: Vec<f64>, // row-major (k_c, k_d)
}

impl ClickPND {
    pub fn detectors(&self) -> usize {
        self.detectors
    }

    pub fn prob(&self, k_c: usize, k_d: usize) -> f64 {
        self.probs[k_c * (self.detectors + 1) + k_d]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Binomial pmf with the 0⁰ = 1 edge cases handled explicitly.
fn binom_pmf(k: usize, n: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (log_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

/// Independent binomial thinning per mode:
/// P'_{m,n} = Σ_{m'≥m, n'≥n} B(m|m',η_c)·B(n|n',η_d)·P_{m',n'}.
pub fn loss_thinning(pnd: &JointPND, eta_c: f64, eta_d: f64) -> JointPND {
    let cutoff = pnd.cutoff();
    let dim = cutoff + 1;
    // per-mode thinning matrices L[kept][incident]
    let thin = |eta: f64| -> Vec<f64> {
        let mut l = vec![0.0; dim * dim];
        for incident in 0..dim {
            for kept in 0..=incident {
                l[kept * dim + incident] = binom_pmf(kept, incident, eta);
            }
        }
        l
    };
    let l_c = thin(eta_c);
    let l_d = thin(eta_d);

    // contract mode d first: t[m'][n] = Σ_{n'} L_d[n][n'] P[m'][n']
    let mut t = vec![0.0; dim * dim];
    for m_in in 0..dim {
        for n_out in 0..dim {
            let mut acc = 0.0;
            for n_in in n_out..dim {
                acc += l_d[n_out * dim + n_in] * pnd.prob(m_in, n_in);
            }
            t[m_in * dim + n_out] = acc;
        }
    }
    let mut out = JointPND::zero(cutoff);
    for m_out in 0..dim {
        for n_out in 0..dim {
            let mut acc = 0.0;
            for m_in in m_out..dim {
                acc += l_c[m_out * dim + m_in] * t[m_in * dim + n_out];
            }
            out.set_prob(m_out, n_out, acc);
        }
    }
    out
}

/// Click distribution for n photons across D uniformly weighted detectors,
/// by inclusion-exclusion: P(k|n,D) = C(D,k) Σ_j (−1)^j C(k,j)((k−j)/D)^n.
pub fn click_distribution_uniform(n: usize, detectors: usize) -> Vec<f64> {
    let d = detectors as f64;
    let mut dist = vec![0.0; detectors + 1];
    if n == 0 {
        dist[0] = 1.0;
        return dist;
    }
    for k in 1..=detectors.min(n) {
        let mut acc = 0.0;
        for j in 0..=k {
            let frac = (k - j) as f64 / d;
            let term = log_binomial(k, j).exp() * frac.powi(n as i32);
            acc += if j % 2 == 0 { term } else { -term };
        }
        dist[k] = log_binomial(detectors, k).exp() * acc;
    }
    dist
}

/// Click distribution for n photons across arbitrarily weighted detectors,
/// by dynamic programming over detectors. State: (photons remaining, clicks
/// so far); detector i receives Binomial(remaining, w_i / W_i) photons where
/// W_i is the weight not yet consumed.
pub fn click_distribution_weighted(n: usize, weights: &[f64]) -> Vec<f64> {
    let detectors = weights.len();
    let mut dist = vec![0.0; detectors + 1];
    if n == 0 {
        dist[0] = 1.0;
        return dist;
    }
    // f[remaining][clicks]
    let mut f = vec![vec![0.0; detectors + 1]; n + 1];
    f[n][0] = 1.0;
    let mut remaining_weight: f64 = weights.iter().sum();
    for &w in weights {
        let p = if remaining_weight > 0.0 { (w / remaining_weight).min(1.0) } else { 0.0 };
        let mut next = vec![vec![0.0; detectors + 1]; n + 1];
        for rem in 0..=n {
            for clicks in 0..=detectors {
                let mass = f[rem][clicks];
                if mass == 0.0 {
                    continue;
                }
                for landed in 0..=rem {
                    let step = binom_pmf(landed, rem, p);
                    if step == 0.0 {
                        continue;
                    }
                    let clicked = if landed > 0 { clicks + 1 } else { clicks };
                    next[rem - landed][clicked.min(detectors)] += mass * step;
                }
            }
        }
        f = next;
        remaining_weight -= w;
    }
    // all photons must land somewhere
    for clicks in 0..=detectors {
        dist[clicks] = f[0][clicks];
    }
    dist
}

/// Click distribution for one mode of the detector bank: closed form for
/// uniform weights, dynamic programming otherwise.
pub fn click_distribution_mode(n: usize, cfg: &DetectorConfig, mode: Mode) -> Vec<f64> {
    if cfg.uniform(mode) {
        click_distribution_uniform(n, cfg.detectors)
    } else {
        click_distribution_weighted(n, cfg.weights(mode))
    }
}

/// Pushes a joint photon-number distribution through the full measurement
/// chain: binomial loss first (when η < 1), then per-mode multiplexed
/// clicks: Click(k_c,k_d) = Σ_{m,n} P_{m,n}·P(k_c|m)·P(k_d|n).
pub fn apply_click_model(pnd: &JointPND, cfg: &DetectorConfig) -> ClickPND {
    let lossy;
    let pnd = if cfg.eta_c < 1.0 || cfg.eta_d < 1.0 {
        lossy = loss_thinning(pnd, cfg.eta_c, cfg.eta_d);
        &lossy
    } else {
        pnd
    };
    let cutoff = pnd.cutoff();
    let d1 = cfg.detectors + 1;
    // click matrices per incident photon number
    let table = |mode: Mode| -> Vec<Vec<f64>> {
        (0..=cutoff).map(|n| click_distribution_mode(n, cfg, mode)).collect()
    };
    let clicks_c = table(Mode::C);
    let clicks_d = table(Mode::D);

    let mut probs = vec![0.0; d1 * d1];
    for m in 0..=cutoff {
        for n in 0..=cutoff {
            let p = pnd.prob(m, n);
            if p == 0.0 {
                continue;
            }
            for (k_c, pc) in clicks_c[m].iter().enumerate() {
                if *pc == 0.0 {
                    continue;
                }
                for (k_d, pd) in clicks_d[n].iter().enumerate() {
                    probs[k_c * d1 + k_d] += p * pc * pd;
                }
            }
        }
    }
    ClickPND { detectors: cfg.detectors, probs }
}

/// The click distribution an ideal entangled coherent state of amplitude α
/// would produce in the same detector bank. No fit parameters: everything
/// follows from α and the config.
pub fn detected_ecs_reference(
    alpha: Complex64,
    cfg: &DetectorConfig,
    cutoff: usize,
) -> Result<ClickPND, SimError> {
    let state = ecs(&EcsParams { alpha }, cutoff).normalized()?;
    Ok(apply_click_model(&joint_pnd(&state), cfg))
}

/// Monte Carlo estimate of [`click_distribution_mode`]: throws each photon of
/// every sample onto a detector drawn from `weights` and counts distinct
/// detectors hit. Chunked substreams make the result deterministic for a
/// fixed seed regardless of thread scheduling.
pub fn monte_carlo_clicks(n: usize, weights: &[f64], samples: u64, seed: u64) -> Vec<f64> {
    let detectors = weights.len();
    assert!(detectors <= 64, "bitmask click counting supports up to 64 detectors");
    let mut cum = Vec::with_capacity(detectors);
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cum.push(acc);
    }

    let chunks: Vec<(u64, u64)> = (0..samples.div_ceil(MC_CHUNK))
        .map(|i| (i, MC_CHUNK.min(samples - i * MC_CHUNK)))
        .collect();
    let counts = crate::map_collect(chunks, |(stream, count)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut hist = vec![0u64; detectors + 1];
        for _ in 0..count {
            let mut mask: u64 = 0;
            for _ in 0..n {
                let u: f64 = rng.gen();
                let idx = cum.partition_point(|&c| c < u).min(detectors - 1);
                mask |= 1 << idx;
            }
            hist[mask.count_ones() as usize] += 1;
        }
        hist
    });

    let mut hist = vec![0u64; detectors + 1];
    for chunk in counts {
        for (h, c) in hist.iter_mut().zip(chunk) {
            *h += c;
        }
    }
    hist.into_iter().map(|c| c as f64 / samples as f64).collect()
}

/// How the coherent amplitude varies along the similarity sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSchedule {
    /// β decreases linearly in the squeezed-vacuum fraction x, matching the
    /// experimental run: β(0) = `beta_start` down to β(`x_end`) = `beta_end`.
    Linear { beta_start: f64, beta_end: f64, x_end: f64 },
    /// Hold the target ECS mean photon number fixed across the sweep.
    FixedMeanPhotons(f64),
}

impl Default for BetaSchedule {
    fn default() -> Self {
        BetaSchedule::Linear { beta_start: 0.75, beta_end: 0.45, x_end: 2.0 }
    }
}

/// One similarity-sweep evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    /// Squeezed-vacuum fraction x = sinh(2r)/|α|².
    pub x: f64,
    /// Squared Bhattacharyya similarity of the detected distributions.
    pub similarity: f64,
    /// Mean photon number fed into the beam splitter.
    pub n_bar: f64,
    pub beta: f64,
    pub r: f64,
}

/// Sweeps the squeezed-vacuum fraction x = sinh(2r)/|α|², pushing the mixed
/// state and the ideal-ECS reference through the identical detection chain
/// and comparing their click distributions. The optimum sits at x = 1 where
/// the squeezing matches the optimal-fidelity relation.
pub fn similarity_sweep(
    x_grid: &[f64],
    schedule: BetaSchedule,
    cfg: &DetectorConfig,
    cutoff: CutoffSpec,
) -> Result<Vec<SweepPoint>, SimError> {
    let points: Vec<Result<SweepPoint, SimError>> =
        crate::map_collect(x_grid.to_vec(), |x| sweep_point(x, schedule, cfg, cutoff));
    points.into_iter().collect()
}

fn sweep_point(
    x: f64,
    schedule: BetaSchedule,
    cfg: &DetectorConfig,
    cutoff: CutoffSpec,
) -> Result<SweepPoint, SimError> {
    if x < 0.0 {
        return Err(SimError::InvalidParameter(format!("SV fraction x = {x} must be ≥ 0")));
    }
    let beta = match schedule {
        BetaSchedule::Linear { beta_start, beta_end, x_end } => {
            beta_start + (beta_end - beta_start) * (x / x_end)
        }
        BetaSchedule::FixedMeanPhotons(n_bar) => (alpha_sq_for_mean_photons(n_bar) / 2.0).sqrt(),
    };
    let alpha_sq = 2.0 * beta * beta;
    // sinh(2r) = x·|α|² pins r; θ stays at the optimal-fidelity phase
    let r = (x * alpha_sq).asinh() / 2.0;
    let theta = optimal_squeezing(Complex64::new(alpha_sq.sqrt(), 0.0)).theta;

    let mixed = mix_cs_sv(
        &CoherentParams { magnitude: beta, phase: 0.0 },
        &crate::states::SqueezeParams { r, theta },
        cutoff,
    )?;
    let candidate = apply_click_model(&joint_pnd(&mixed.state), cfg);
    let reference = detected_ecs_reference(
        Complex64::new(alpha_sq.sqrt(), 0.0),
        cfg,
        mixed.cutoff,
    )?;
    let sim = similarity(candidate.probs(), reference.probs())?;
    Ok(SweepPoint { x, similarity: sim, n_bar: mixed.input_mean_photons, beta, r })
}
