//! Numerically stable primitives for truncated Fock-space amplitudes.
//!
//! Single- and two-mode states are stored as dense complex amplitude grids up
//! to a photon-number cutoff. Everything factorial-bearing goes through
//! [`log_factorial`] so coefficients stay finite well past n = 170, where
//! naive `n!` overflows an `f64`.

use std::fmt::Write as _;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::SimError;

/// Default per-mode photon-number cutoff. Ample for the amplitude ranges this
/// simulator targets (|α| ≤ 1.5, r ≤ 0.8).
pub const DEFAULT_CUTOFF: usize = 30;

/// Default truncation tolerance: states are considered adequately truncated
/// when their tail mass is below this.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

const LOG_FACTORIAL_TABLE_LEN: usize = 4096;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LOG_FACTORIAL_TABLE_LEN);
        t.push(0.0);
        for n in 1..LOG_FACTORIAL_TABLE_LEN {
            t.push(t[n - 1] + (n as f64).ln());
        }
        t
    })
}

/// Natural log of `n!`, exact at n = 0 and accurate to ~1e-15 relative error
/// over the tabulated range.
pub fn log_factorial(n: usize) -> f64 {
    let table = log_factorial_table();
    if n < table.len() {
        return table[n];
    }
    let mut acc = table[table.len() - 1];
    for k in table.len()..=n {
        acc += (k as f64).ln();
    }
    acc
}

/// Natural log of the binomial coefficient C(n, k).
pub fn log_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    log_factorial(n) - log_factorial(k) - log_factorial(n - k)
}

/// A single optical mode as complex amplitudes over photon numbers
/// `0..=cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudes {
    cutoff: usize,
    amps: Vec<Complex64>,
}

impl ModeAmplitudes {
    /// All-zero amplitudes (not a physical state until filled).
    pub fn zero(cutoff: usize) -> Self {
        Self { cutoff, amps: vec![Complex64::new(0.0, 0.0); cutoff + 1] }
    }

    /// Fock basis state |n⟩.
    pub fn fock(n: usize, cutoff: usize) -> Result<Self, SimError> {
        if n > cutoff {
            return Err(SimError::ExceedsCutoff { n, cutoff });
        }
        let mut s = Self::zero(cutoff);
        s.amps[n] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amps(amps: Vec<Complex64>) -> Self {
        assert!(!amps.is_empty());
        Self { cutoff: amps.len() - 1, amps }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amp(&self, n: usize) -> Complex64 {
        self.amps[n]
    }

    pub fn set_amp(&mut self, n: usize, value: Complex64) {
        self.amps[n] = value;
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    /// Total squared magnitude Σ|a_n|².
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability mass lost to truncation: 1 − Σ|a_n|². Can be a few ulp
    /// negative for a state normalized in floating point.
    pub fn tail_mass(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    /// Rescaled copy with unit norm.
    pub fn normalized(&self) -> Result<Self, SimError> {
        let n2 = self.norm_sqr();
        if n2 <= 0.0 || !n2.is_finite() {
            return Err(SimError::ZeroNorm);
        }
        let inv = 1.0 / n2.sqrt();
        let amps = self.amps.iter().map(|a| a * inv).collect();
        Ok(Self { cutoff: self.cutoff, amps })
    }

    /// ⟨n̂⟩ = Σ n·|a_n|². Meaningful for (approximately) normalized states.
    pub fn mean_photon_number(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }

    /// ⟨self|other⟩ = Σ_n conj(self_n)·other_n.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64, SimError> {
        if self.cutoff != other.cutoff {
            return Err(SimError::CutoffMismatch { left: self.cutoff, right: other.cutoff });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Product state out[m][n] = self[m]·other[n].
    pub fn tensor(&self, other: &Self) -> Result<TwoModeAmplitudes, SimError> {
        if self.cutoff != other.cutoff {
            return Err(SimError::CutoffMismatch { left: self.cutoff, right: other.cutoff });
        }
        let dim = self.cutoff + 1;
        let mut amps = Vec::with_capacity(dim * dim);
        for m in 0..dim {
            for n in 0..dim {
                amps.push(self.amps[m] * other.amps[n]);
            }
        }
        Ok(TwoModeAmplitudes { cutoff: self.cutoff, amps })
    }

    /// Plain-text dump: header with cutoff, one `n re im` line per index.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "modes=1 cutoff={}", self.cutoff);
        for (n, a) in self.amps.iter().enumerate() {
            let _ = writeln!(out, "{} {:.16e} {:.16e}", n, a.re, a.im);
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self, SimError> {
        let (modes, cutoff, rest) = parse_dump_header(text)?;
        if modes != 1 {
            return Err(SimError::Parse(format!("expected modes=1, found modes={modes}")));
        }
        let mut state = Self::zero(cutoff);
        let mut seen = 0usize;
        for line in rest {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(SimError::Parse(format!("expected 'n re im', got: {line}")));
            }
            let n = parse_index(fields[0], cutoff)?;
            state.amps[n] = Complex64::new(parse_float(fields[1])?, parse_float(fields[2])?);
            seen += 1;
        }
        if seen != cutoff + 1 {
            return Err(SimError::Parse(format!("expected {} rows, found {seen}", cutoff + 1)));
        }
        Ok(state)
    }
}

/// A two-mode pure state C_{m,n} on a dense (cutoff+1)×(cutoff+1) grid.
/// The indices correspond to the two beam-splitter output modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeAmplitudes {
    cutoff: usize,
    amps: Vec<Complex64>, // row-major: index m*(cutoff+1)+n
}

impl TwoModeAmplitudes {
    pub fn zero(cutoff: usize) -> Self {
        let dim = cutoff + 1;
        Self { cutoff, amps: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    /// Two-mode Fock basis state |m,n⟩.
    pub fn fock(m: usize, n: usize, cutoff: usize) -> Result<Self, SimError> {
        if m > cutoff {
            return Err(SimError::ExceedsCutoff { n: m, cutoff });
        }
        if n > cutoff {
            return Err(SimError::ExceedsCutoff { n, cutoff });
        }
        let mut s = Self::zero(cutoff);
        let idx = m * (cutoff + 1) + n;
        s.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    #[inline]
    fn idx(&self, m: usize, n: usize) -> usize {
        m * (self.cutoff + 1) + n
    }

    pub fn amp(&self, m: usize, n: usize) -> Complex64 {
        self.amps[self.idx(m, n)]
    }

    pub fn set_amp(&mut self, m: usize, n: usize, value: Complex64) {
        let i = self.idx(m, n);
        self.amps[i] = value;
    }

    /// Row-major flat amplitude slice.
    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn from_flat(cutoff: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), (cutoff + 1) * (cutoff + 1));
        Self { cutoff, amps }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn tail_mass(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    pub fn normalized(&self) -> Result<Self, SimError> {
        let n2 = self.norm_sqr();
        if n2 <= 0.0 || !n2.is_finite() {
            return Err(SimError::ZeroNorm);
        }
        let inv = 1.0 / n2.sqrt();
        let amps = self.amps.iter().map(|a| a * inv).collect();
        Ok(Self { cutoff: self.cutoff, amps })
    }

    /// ⟨n̂_c + n̂_d⟩ = Σ (m+n)·|C_{m,n}|².
    pub fn mean_photon_number(&self) -> f64 {
        let dim = self.cutoff + 1;
        let mut acc = 0.0;
        for m in 0..dim {
            for n in 0..dim {
                acc += (m + n) as f64 * self.amps[m * dim + n].norm_sqr();
            }
        }
        acc
    }

    /// ⟨self|other⟩ = Σ_{m,n} conj(self_{m,n})·other_{m,n}.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64, SimError> {
        if self.cutoff != other.cutoff {
            return Err(SimError::CutoffMismatch { left: self.cutoff, right: other.cutoff });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Plain-text dump: header with cutoff, one `m n re im` line per index.
    pub fn to_dump(&self) -> String {
        let dim = self.cutoff + 1;
        let mut out = String::new();
        let _ = writeln!(out, "modes=2 cutoff={}", self.cutoff);
        for m in 0..dim {
            for n in 0..dim {
                let a = self.amps[m * dim + n];
                let _ = writeln!(out, "{} {} {:.16e} {:.16e}", m, n, a.re, a.im);
            }
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self, SimError> {
        let (modes, cutoff, rest) = parse_dump_header(text)?;
        if modes != 2 {
            return Err(SimError::Parse(format!("expected modes=2, found modes={modes}")));
        }
        let mut state = Self::zero(cutoff);
        let mut seen = 0usize;
        for line in rest {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(SimError::Parse(format!("expected 'm n re im', got: {line}")));
            }
            let m = parse_index(fields[0], cutoff)?;
            let n = parse_index(fields[1], cutoff)?;
            let i = m * (cutoff + 1) + n;
            state.amps[i] = Complex64::new(parse_float(fields[2])?, parse_float(fields[3])?);
            seen += 1;
        }
        if seen != (cutoff + 1) * (cutoff + 1) {
            return Err(SimError::Parse(format!(
                "expected {} rows, found {seen}",
                (cutoff + 1) * (cutoff + 1)
            )));
        }
        Ok(state)
    }
}

/// Nonnegative joint photon-number probability table P_{m,n}.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPND {
    cutoff: usize,
    probs: Vec<f64>, // row-major, same layout as TwoModeAmplitudes
}

impl JointPND {
    pub fn zero(cutoff: usize) -> Self {
        let dim = cutoff + 1;
        Self { cutoff, probs: vec![0.0; dim * dim] }
    }

    pub(crate) fn from_flat(cutoff: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), (cutoff + 1) * (cutoff + 1));
        Self { cutoff, probs }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn prob(&self, m: usize, n: usize) -> f64 {
        self.probs[m * (self.cutoff + 1) + n]
    }

    pub fn set_prob(&mut self, m: usize, n: usize, p: f64) {
        let i = m * (self.cutoff + 1) + n;
        self.probs[i] = p;
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

fn parse_dump_header(text: &str) -> Result<(usize, usize, std::str::Lines<'_>), SimError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| SimError::Parse("empty dump".into()))?;
    let mut modes = None;
    let mut cutoff = None;
    for token in header.split_whitespace() {
        if let Some(v) = token.strip_prefix("modes=") {
            modes = v.parse::<usize>().ok();
        } else if let Some(v) = token.strip_prefix("cutoff=") {
            cutoff = v.parse::<usize>().ok();
        }
    }
    match (modes, cutoff) {
        (Some(m), Some(c)) => Ok((m, c, lines)),
        _ => Err(SimError::Parse(format!("bad header: {header}"))),
    }
}

fn parse_index(s: &str, cutoff: usize) -> Result<usize, SimError> {
    let n = s
        .parse::<usize>()
        .map_err(|_| SimError::Parse(format!("bad index: {s}")))?;
    if n > cutoff {
        return Err(SimError::Parse(format!("index {n} exceeds cutoff {cutoff}")));
    }
    Ok(n)
}

fn parse_float(s: &str) -> Result<f64, SimError> {
    s.parse::<f64>()
        .map_err(|_| SimError::Parse(format!("bad float: {s}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_factorial_small_values() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        // ln(120), big-integer oracle frozen below to full precision
        assert_relative_eq!(log_factorial(5), 4.787491742782046, max_relative = 1e-12);
    }

    #[test]
    fn log_factorial_170_against_bigint_product() {
        // 170! is the largest factorial representable in f64; the exact
        // big-integer product is an independent route to its logarithm.
        let mut exact = num_bigint::BigUint::from(1u32);
        for k in 2u32..=170 {
            exact *= k;
        }
        let exact_f64: f64 = exact.to_string().parse::<f64>().unwrap();
        let oracle = exact_f64.ln();
        let got = log_factorial(170);
        assert!(
            ((got - oracle) / oracle).abs() <= 1e-12,
            "log_factorial(170) = {got}, oracle = {oracle}"
        );
    }

    #[test]
    fn log_factorial_ratio_property() {
        for n in 1..=300usize {
            let diff = log_factorial(n) - log_factorial(n - 1);
            assert_relative_eq!(diff, (n as f64).ln(), max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn fock_inner_products_are_orthonormal() {
        let f3 = ModeAmplitudes::fock(3, 10).unwrap();
        assert_eq!(f3.inner_product(&f3).unwrap(), Complex64::new(1.0, 0.0));
        let f1 = ModeAmplitudes::fock(1, 10).unwrap();
        let f2 = ModeAmplitudes::fock(2, 10).unwrap();
        assert_eq!(f1.inner_product(&f2).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn inner_product_vacuum_with_coherent() {
        // ⟨0|β=1⟩ = e^{-1/2}
        let vac = ModeAmplitudes::fock(0, 20).unwrap();
        let coh = crate::states::coherent(
            &crate::states::CoherentParams { magnitude: 1.0, phase: 0.0 },
            20,
        );
        let ip = vac.inner_product(&coh).unwrap();
        assert_relative_eq!(ip.re, 0.6065306597126334, max_relative = 1e-12);
        assert_relative_eq!(ip.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn inner_product_cutoff_mismatch_errors() {
        let a = ModeAmplitudes::fock(0, 5).unwrap();
        let b = ModeAmplitudes::fock(0, 6).unwrap();
        assert!(matches!(
            a.inner_product(&b),
            Err(SimError::CutoffMismatch { left: 5, right: 6 })
        ));
    }

    #[test]
    fn two_mode_inner_product_examples() {
        let a = TwoModeAmplitudes::fock(1, 0, 8).unwrap();
        let b = TwoModeAmplitudes::fock(0, 1, 8).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), Complex64::new(0.0, 0.0));

        // ⟨0,0|ECS(α=1)⟩ = 2·N_α·e^{-1/2}
        let ecs = crate::states::ecs(
            &crate::states::EcsParams { alpha: Complex64::new(1.0, 0.0) },
            20,
        );
        let vac2 = TwoModeAmplitudes::fock(0, 0, 20).unwrap();
        let ip = vac2.inner_product(&ecs).unwrap();
        assert_relative_eq!(ip.re, 0.7334049650363640, max_relative = 1e-12);
    }

    #[test]
    fn tensor_product_structure() {
        let vac = ModeAmplitudes::fock(0, 4).unwrap();
        let prod = vac.tensor(&vac).unwrap();
        assert_eq!(prod.amp(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(prod.amp(1, 0), Complex64::new(0.0, 0.0));

        // entry (1,2) of coherent ⊗ squeezed is the product of the series terms
        let coh = crate::states::coherent(
            &crate::states::CoherentParams { magnitude: 0.7, phase: 0.3 },
            12,
        );
        let sv = crate::states::squeezed_vacuum(
            &crate::states::SqueezeParams { r: 0.4, theta: 1.1 },
            12,
        );
        let t = coh.tensor(&sv).unwrap();
        let expect = coh.amp(1) * sv.amp(2);
        assert_relative_eq!(t.amp(1, 2).re, expect.re, max_relative = 1e-14);
        assert_relative_eq!(t.amp(1, 2).im, expect.im, max_relative = 1e-14);
    }

    #[test]
    fn tensor_norm_is_product_of_norms() {
        let coh = crate::states::coherent(
            &crate::states::CoherentParams { magnitude: 0.9, phase: 0.0 },
            16,
        );
        let sv = crate::states::squeezed_vacuum(
            &crate::states::SqueezeParams { r: 0.5, theta: 0.2 },
            16,
        );
        let t = coh.tensor(&sv).unwrap();
        assert_relative_eq!(
            t.norm_sqr(),
            coh.norm_sqr() * sv.norm_sqr(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn tail_mass_examples() {
        let vac = ModeAmplitudes::fock(0, 5).unwrap();
        assert_eq!(vac.tail_mass(), 0.0);

        // Poisson(0.25) tail beyond n = 10 is ~4.75e-15
        let coh = crate::states::coherent(
            &crate::states::CoherentParams { magnitude: 0.5, phase: 0.0 },
            10,
        );
        assert!(coh.tail_mass().abs() <= 1e-10);

        // Poisson(4) truncated at n = 3 discards most of the distribution
        let hot = crate::states::coherent(
            &crate::states::CoherentParams { magnitude: 2.0, phase: 0.0 },
            3,
        );
        assert!(hot.tail_mass() > 0.1);
        assert_relative_eq!(hot.tail_mass(), 0.5665298796332911, max_relative = 1e-10);
    }

    #[test]
    fn dump_round_trip_single_mode() {
        let coh = crate::states::coherent(
            &crate::states::CoherentParams { magnitude: 1.2, phase: 0.7 },
            9,
        );
        let text = coh.to_dump();
        assert!(text.starts_with("modes=1 cutoff=9\n"));
        let back = ModeAmplitudes::from_dump(&text).unwrap();
        for n in 0..=9 {
            assert_eq!(coh.amp(n), back.amp(n));
        }
    }

    #[test]
    fn dump_round_trip_two_mode() {
        let ecs = crate::states::ecs(
            &crate::states::EcsParams { alpha: Complex64::new(0.8, 0.3) },
            6,
        );
        let text = ecs.to_dump();
        let back = TwoModeAmplitudes::from_dump(&text).unwrap();
        assert_eq!(ecs, back);
    }

    #[test]
    fn dump_rejects_malformed_input() {
        assert!(ModeAmplitudes::from_dump("").is_err());
        assert!(ModeAmplitudes::from_dump("modes=1\n0 1 0\n").is_err());
        assert!(ModeAmplitudes::from_dump("modes=1 cutoff=1\n0 1 0\n").is_err());
        assert!(TwoModeAmplitudes::from_dump("modes=1 cutoff=1\n0 1 0\n1 0 0\n").is_err());
    }
}
