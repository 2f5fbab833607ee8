//! Overlap sums at the receiving site and the averaged transfer fidelity.
//!
//! The two branches of the sender qubit evolve into Slater-determinant
//! superpositions
//!
//! ```text
//! |Ψ_a(t)⟩ = Σ_{l_1<…<l_M} det A_a[l] c†_{l_1}…c†_{l_M} |0⟩,   a ∈ {0, 1},
//! ```
//!
//! where `A_a[l]` is the submatrix of `F(t)` with rows on the branch's
//! initial sites and columns `l`. The reduced state of site `N` is fixed by
//!
//! - `Γ1 = Σ_{l ∋ N} |det A_0|²`, `Γ3 = Σ_{l ∌ N} |det A_0|²`,
//! - `Γ2 = Σ_{l ∋ N} |det A_1|²`, `Γ4 = Σ_{l ∌ N} |det A_1|²`,
//! - `Γ5 = Σ_{l ∌ N} conj(det A_1[l ∪ {N}]) det A_0[l]`, so that
//!   `⟨σ⁺_N⟩ = α β* Γ5`.
//!
//! The amplitudes of ascending-ordered fermion products equal the spin
//! basis amplitudes, and `σ⁺_N` acts on the spin basis without a string
//! factor, so `Γ5` carries no extra sign. The exact-diagonalization oracle
//! confirms this convention.

use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

use crate::combinatorics::{binomial, for_each_combination};
use crate::error::{Error, Result};
use crate::linalg::{det_in_place, det_of_gram};
use crate::model::{BranchPair, ChainSpec, ExcitationPattern};
use crate::propagator::{AmplitudeMatrix, Propagator};

/// Largest number of column subsets [`gamma_direct`] will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u64 = 5_000_000;

/// The five overlap sums determining the receiver's reduced state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSet {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: Complex64,
}

impl GammaSet {
    /// `γ = arg Γ5` in radians.
    pub fn phase_gamma(&self) -> f64 {
        self.gamma5.arg()
    }

    /// Largest componentwise absolute difference.
    pub fn max_deviation(&self, other: &GammaSet) -> f64 {
        [
            (self.gamma1 - other.gamma1).abs(),
            (self.gamma2 - other.gamma2).abs(),
            (self.gamma3 - other.gamma3).abs(),
            (self.gamma4 - other.gamma4).abs(),
            (self.gamma5 - other.gamma5).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// The set at field `h + delta_h`, given this set at field `h` and time `t`.
    ///
    /// The field multiplies `F(t)` by `exp(-2iht)`, so the populations are
    /// unchanged and `Γ5`, which pairs branches differing by one excitation,
    /// picks up `exp(2i Δh t)`.
    pub fn with_field_shift(&self, delta_h: f64, t: f64) -> GammaSet {
        GammaSet { gamma5: self.gamma5 * Complex64::from_polar(1.0, 2.0 * delta_h * t), ..*self }
    }
}

/// How the relative phase between sent and received qubit is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FidelityMode {
    /// Received state must equal the sent one: third term `Re Γ5`.
    #[default]
    Strict,
    /// A fixed phase rotation at the receiver is free: third term `|Γ5|`.
    PhaseOptimized,
}

impl FidelityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FidelityMode::Strict => "strict",
            FidelityMode::PhaseOptimized => "phase-optimized",
        }
    }
}

impl fmt::Display for FidelityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FidelityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "strict" => Ok(FidelityMode::Strict),
            "phase-optimized" | "phase" | "optimized" => Ok(FidelityMode::PhaseOptimized),
            other => Err(Error::invalid(format!("unknown fidelity mode '{other}'"))),
        }
    }
}

fn check_pair(spec: &ChainSpec, pair: &BranchPair) -> Result<()> {
    if pair.n_sites() != spec.n_sites() {
        return Err(Error::invalid(format!(
            "branch pair built for N={} used with N={}",
            pair.n_sites(),
            spec.n_sites()
        )));
    }
    Ok(())
}

fn zero_indexed(pattern: &ExcitationPattern) -> Vec<usize> {
    pattern.sites().iter().map(|s| s - 1).collect()
}

/// Γ by explicit enumeration of column subsets, capped at
/// [`DEFAULT_ENUMERATION_CAP`] subsets.
pub fn gamma_direct(spec: &ChainSpec, pair: &BranchPair, t: f64) -> Result<GammaSet> {
    gamma_direct_with_cap(spec, pair, t, DEFAULT_ENUMERATION_CAP)
}

pub fn gamma_direct_with_cap(spec: &ChainSpec, pair: &BranchPair, t: f64, cap: u64) -> Result<GammaSet> {
    check_pair(spec, pair)?;
    let n = spec.n_sites();
    let subsets = binomial(n, pair.m1()).max(binomial(n, pair.m2()));
    if subsets > cap {
        return Err(Error::resource(format!(
            "direct enumeration needs {subsets} subsets (cap {cap}); use gamma_fast for N={n}, M2={}",
            pair.m2()
        )));
    }
    let f = Propagator::new(spec).amplitude_matrix(t)?;
    Ok(direct_from_amplitudes(&f, pair))
}

/// `Σ |det A[cols]|²` split by whether the last site is among the columns.
fn split_population(f: &AmplitudeMatrix, rows: &[usize]) -> (f64, f64) {
    let n = f.n_sites();
    let m = rows.len();
    let entries = f.entries();
    let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
    let (mut with_last, mut without_last) = (0.0, 0.0);
    for_each_combination(n, m, |cols| {
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                buf[i * m + j] = entries[(r, c)];
            }
        }
        let weight = det_in_place(&mut buf, m).norm_sqr();
        if cols.last() == Some(&(n - 1)) {
            with_last += weight;
        } else {
            without_last += weight;
        }
    });
    (with_last, without_last)
}

fn direct_from_amplitudes(f: &AmplitudeMatrix, pair: &BranchPair) -> GammaSet {
    let n = f.n_sites();
    let entries = f.entries();
    let rows0 = zero_indexed(pair.branch0());
    let rows1 = zero_indexed(pair.branch1());
    let (gamma1, gamma3) = split_population(f, &rows0);
    let (gamma2, gamma4) = split_population(f, &rows1);

    let (m1, m2) = (rows0.len(), rows1.len());
    let mut buf0 = vec![Complex64::new(0.0, 0.0); m1 * m1];
    let mut buf1 = vec![Complex64::new(0.0, 0.0); m2 * m2];
    let mut gamma5 = Complex64::new(0.0, 0.0);
    for_each_combination(n - 1, m1, |cols| {
        for (i, &r) in rows0.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                buf0[i * m1 + j] = entries[(r, c)];
            }
        }
        for (i, &r) in rows1.iter().enumerate() {
            for (j, &c) in cols.iter().chain(std::iter::once(&(n - 1))).enumerate() {
                buf1[i * m2 + j] = entries[(r, c)];
            }
        }
        let d0 = det_in_place(&mut buf0, m1);
        let d1 = det_in_place(&mut buf1, m2);
        gamma5 += d1.conj() * d0;
    });
    GammaSet { gamma1, gamma2, gamma3, gamma4, gamma5 }
}

/// Γ in polynomial time through Cauchy-Binet.
///
/// With `G` the branch rows of `F` restricted to columns `1..N-1`,
/// `Γ3 = det(G_0 G_0†)` and `Γ4 = det(G_1 G_1†)`; unitarity of `F` makes the
/// full subset sums equal to one, which gives `Γ1` and `Γ2`. Expanding
/// `det A_1[l ∪ {N}]` along its last column turns `Γ5` into `M2` Gram
/// determinants of `M1 × M1` matrices.
pub fn gamma_fast(spec: &ChainSpec, pair: &BranchPair, t: f64) -> Result<GammaSet> {
    check_pair(spec, pair)?;
    let f = Propagator::new(spec).amplitude_matrix(t)?;
    Ok(fast_from_amplitudes(&f, pair))
}

/// [`gamma_fast`] on an already evaluated amplitude matrix.
pub fn fast_from_amplitudes(f: &AmplitudeMatrix, pair: &BranchPair) -> GammaSet {
    let n = f.n_sites();
    let cols = n - 1;
    let entries = f.entries();
    let rows0 = zero_indexed(pair.branch0());
    let rows1 = zero_indexed(pair.branch1());
    let (m1, m2) = (rows0.len(), rows1.len());

    let gather = |rows: &[usize]| -> Vec<Complex64> {
        rows.iter().flat_map(|&r| (0..cols).map(move |c| entries[(r, c)])).collect()
    };
    let g0 = gather(&rows0);
    let g1 = gather(&rows1);
    let mut work = Vec::new();

    let gamma3 = det_of_gram(&g0, &g0, m1, cols, &mut work).re;
    // M2 rows in N-1 columns cannot be independent when M2 = N
    let gamma4 = if m2 > cols { 0.0 } else { det_of_gram(&g1, &g1, m2, cols, &mut work).re };

    let mut minor = Vec::with_capacity(m1 * cols);
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..m2 {
        minor.clear();
        for (i, _) in rows1.iter().enumerate().filter(|&(i, _)| i != r) {
            minor.extend_from_slice(&g1[i * cols..(i + 1) * cols]);
        }
        let cofactor_sign = if (r + m2 + 1) % 2 == 0 { 1.0 } else { -1.0 };
        acc += entries[(rows1[r], n - 1)] * cofactor_sign * det_of_gram(&minor, &g0, m1, cols, &mut work);
    }

    GammaSet { gamma1: 1.0 - gamma3, gamma2: 1.0 - gamma4, gamma3, gamma4, gamma5: acc.conj() }
}

/// Bloch-sphere average of `⟨φ|ρ_N|φ⟩` without clamping.
///
/// Averaging `|α|⁴`, `|β|⁴` and `|α|²|β|²` over the sphere gives weights
/// `1/3`, `1/3` and `1/6`.
pub fn raw_average_fidelity(gammas: &GammaSet, mode: FidelityMode) -> f64 {
    let coherence = match mode {
        FidelityMode::Strict => gammas.gamma5.re,
        FidelityMode::PhaseOptimized => gammas.gamma5.norm(),
    };
    (gammas.gamma2 + gammas.gamma3 + coherence) / 3.0 + (gammas.gamma1 + gammas.gamma4) / 6.0
}

/// Average fidelity clamped to `[0, 1]`.
pub fn average_fidelity(gammas: &GammaSet, mode: FidelityMode) -> f64 {
    raw_average_fidelity(gammas, mode).clamp(0.0, 1.0)
}

/// Closed form for the fully polarized channel:
/// `F = 1/2 + |f_{1N}| cos γ / 3 + |f_{1N}|² / 6` with `γ = arg f_{1N}`.
pub fn single_excitation_fidelity(spec: &ChainSpec, t: f64, mode: FidelityMode) -> Result<f64> {
    let n = spec.n_sites();
    if n < 2 {
        return Err(Error::invalid("single-excitation transfer needs N >= 2"));
    }
    let f = Propagator::new(spec).single_amplitude(1, n, t)?;
    let amplitude = f.norm();
    let cos_gamma = match mode {
        FidelityMode::Strict if amplitude > 0.0 => f.re / amplitude,
        FidelityMode::Strict => 0.0,
        FidelityMode::PhaseOptimized => 1.0,
    };
    Ok(0.5 + amplitude * cos_gamma / 3.0 + amplitude * amplitude / 6.0)
}

/// Excitation probability on every site: `⟨n_l⟩ = Σ_{k∈S} |f_{k,l}(t)|²`.
pub fn occupation_profile(spec: &ChainSpec, pattern: &ExcitationPattern, t: f64) -> Result<Vec<f64>> {
    if pattern.n_sites() != spec.n_sites() {
        return Err(Error::invalid("pattern and chain disagree on N"));
    }
    let f = Propagator::new(spec).amplitude_matrix(t)?;
    Ok((1..=spec.n_sites()).map(|l| pattern.sites().iter().map(|&k| f.get(k, l).norm_sqr()).sum()).collect())
}
