//! Exact diagonalization of the spin Hamiltonian on the full `2^N` space.
//!
//! This is the reference against which the fermionic formulas are checked,
//! so it works purely with spin operators and never uses the sine
//! transform or determinants.
//!
//! # Conventions
//!
//! Basis state index `x` has site `k` in `|1⟩` (spin up, one excitation)
//! when bit `N - k` of `x` is set, i.e. site 1 is the most significant bit.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = (J/2) Σ_l (X_l X_{l+1} + Y_l Y_{l+1}) - h Σ_l Z_l
//! ```
//!
//! with `Z` the computational-basis Pauli matrix, `Z|0⟩ = |0⟩` and
//! `Z|1⟩ = -|1⟩`. Each excitation therefore costs `+2h`, which is the
//! field sign of the single-particle energies `E_m = 2h + 2J cos q_m`. In
//! the sector with `M` excitations the spin energies are the sums of `M`
//! values `E_m` minus the constant `hN` (the energy of `|00…0⟩`, which is
//! `-hN`); the constant is a global phase and drops out of every overlap.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::fidelity::GammaSet;
use crate::model::{BranchPair, ChainSpec, ExcitationPattern};

/// Largest chain the oracle accepts.
pub const ORACLE_SIZE_CAP: usize = 14;

/// Below this dimension the whole space is diagonalized at once; above it
/// each excitation-number sector is diagonalized separately.
pub const FULL_DIAGONALIZATION_LIMIT: usize = 1 << 10;

/// Largest dimension for which a dense full-space matrix is materialized.
const DENSE_LIMIT: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionMethod {
    /// Full space below [`FULL_DIAGONALIZATION_LIMIT`], sectors above.
    Auto,
    Full,
    Sectors,
}

#[derive(Debug)]
struct Eigensystem {
    basis: Vec<usize>,
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl Eigensystem {
    fn new(basis: Vec<usize>, matrix: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(matrix);
        Self { basis, values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    /// `V exp(-iΛt) Vᵀ ψ` restricted to this eigensystem's basis.
    fn propagate(&self, amplitudes: &[Complex64], t: f64) -> Vec<Complex64> {
        let dim = self.basis.len();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let column = self.vectors.column(j);
            let overlap: Complex64 = column.iter().zip(amplitudes).map(|(v, a)| a * *v).sum();
            *c = overlap * Complex64::from_polar(1.0, -self.values[j] * t);
        }
        (0..dim).map(|i| coeffs.iter().enumerate().map(|(j, c)| c * self.vectors[(i, j)]).sum()).collect()
    }
}

/// The spin Hamiltonian of an open chain, with lazily cached
/// eigendecompositions.
#[derive(Debug)]
pub struct SpinHamiltonian {
    spec: ChainSpec,
    full: OnceLock<Eigensystem>,
    sectors: Vec<OnceLock<Eigensystem>>,
}

pub fn build_hamiltonian(spec: &ChainSpec) -> Result<SpinHamiltonian> {
    SpinHamiltonian::new(spec)
}

impl SpinHamiltonian {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        let n = spec.n_sites();
        if n > ORACLE_SIZE_CAP {
            return Err(Error::resource(format!("oracle limited to N <= {ORACLE_SIZE_CAP}, got N={n}")));
        }
        Ok(Self { spec: *spec, full: OnceLock::new(), sectors: (0..=n).map(|_| OnceLock::new()).collect() })
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn n_sites(&self) -> usize {
        self.spec.n_sites()
    }

    pub fn dimension(&self) -> usize {
        1 << self.n_sites()
    }

    /// Diagonal entry `⟨x|H|x⟩ = -h Σ_l z_l(x)`.
    pub fn diagonal(&self, state: usize) -> f64 {
        let n = self.n_sites() as i64;
        let ups = state.count_ones() as i64;
        -self.spec.field() * (n - 2 * ups) as f64
    }

    /// Basis states reached from `state` by one nearest-neighbour flip-flop,
    /// each with matrix element `J`.
    fn hops(&self, state: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.n_sites();
        (0..n.saturating_sub(1)).filter_map(move |b| {
            let pair = 0b11 << b;
            let bits = state & pair;
            (bits != 0 && bits != pair).then_some(state ^ pair)
        })
    }

    pub fn matrix_element(&self, row: usize, col: usize) -> f64 {
        if row == col {
            self.diagonal(row)
        } else if self.hops(col).any(|s| s == row) {
            self.spec.coupling()
        } else {
            0.0
        }
    }

    /// `H|ψ⟩` without forming a matrix.
    pub fn apply(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        if amplitudes.len() != self.dimension() {
            return Err(Error::invalid("state dimension does not match Hamiltonian"));
        }
        let j = self.spec.coupling();
        let mut out: Vec<Complex64> = amplitudes.iter().enumerate().map(|(x, a)| a * self.diagonal(x)).collect();
        for (x, a) in amplitudes.iter().enumerate() {
            for y in self.hops(x) {
                out[y] += a * j;
            }
        }
        Ok(out)
    }

    /// Dense full-space matrix; refused for very large chains.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let dim = self.dimension();
        if dim > DENSE_LIMIT {
            return Err(Error::resource(format!("dense matrix of dimension {dim} refused")));
        }
        let mut m = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            m[(x, x)] = self.diagonal(x);
            for y in self.hops(x) {
                m[(y, x)] = self.spec.coupling();
            }
        }
        Ok(m)
    }

    /// Ascending basis states with exactly `excitations` up spins.
    pub fn sector_basis(&self, excitations: usize) -> Vec<usize> {
        (0..self.dimension()).filter(|x| x.count_ones() as usize == excitations).collect()
    }

    /// The Hamiltonian restricted to one excitation-number sector.
    pub fn sector_block(&self, excitations: usize) -> DMatrix<f64> {
        let basis = self.sector_basis(excitations);
        let dim = basis.len();
        let mut m = DMatrix::zeros(dim, dim);
        for (i, &x) in basis.iter().enumerate() {
            m[(i, i)] = self.diagonal(x);
            for y in self.hops(x) {
                let k = basis.binary_search(&y).expect("hopping conserves excitation number");
                m[(k, i)] = self.spec.coupling();
            }
        }
        m
    }

    /// Eigenvalues of one sector, ascending.
    pub fn sector_energies(&self, excitations: usize) -> Vec<f64> {
        let mut values: Vec<f64> = self.sector(excitations).values.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    fn sector(&self, excitations: usize) -> &Eigensystem {
        self.sectors[excitations]
            .get_or_init(|| Eigensystem::new(self.sector_basis(excitations), self.sector_block(excitations)))
    }

    fn full(&self) -> Result<&Eigensystem> {
        if let Some(eig) = self.full.get() {
            return Ok(eig);
        }
        let dense = self.to_dense()?;
        Ok(self.full.get_or_init(|| Eigensystem::new((0..self.dimension()).collect(), dense)))
    }

    pub fn evolve(&self, state: &FullState, t: f64) -> Result<FullState> {
        self.evolve_with(state, t, EvolutionMethod::Auto)
    }

    pub fn evolve_with(&self, state: &FullState, t: f64, method: EvolutionMethod) -> Result<FullState> {
        if state.n_sites != self.n_sites() {
            return Err(Error::invalid(format!(
                "state has N={} but Hamiltonian has N={}",
                state.n_sites,
                self.n_sites()
            )));
        }
        if !t.is_finite() {
            return Err(Error::invalid(format!("time must be finite, got {t}")));
        }
        let method = match method {
            EvolutionMethod::Auto if self.dimension() < FULL_DIAGONALIZATION_LIMIT => EvolutionMethod::Full,
            EvolutionMethod::Auto => EvolutionMethod::Sectors,
            m => m,
        };
        let amplitudes = match method {
            EvolutionMethod::Full => self.full()?.propagate(&state.amplitudes, t),
            _ => {
                let mut out = vec![Complex64::new(0.0, 0.0); self.dimension()];
                for m in 0..=self.n_sites() {
                    let sector_idx: Vec<usize> =
                        (0..self.dimension()).filter(|x| x.count_ones() as usize == m).collect();
                    if sector_idx.iter().all(|&x| state.amplitudes[x].norm_sqr() == 0.0) {
                        continue;
                    }
                    let local: Vec<Complex64> = sector_idx.iter().map(|&x| state.amplitudes[x]).collect();
                    let evolved = self.sector(m).propagate(&local, t);
                    for (&x, a) in sector_idx.iter().zip(evolved) {
                        out[x] = a;
                    }
                }
                out
            }
        };
        Ok(FullState { n_sites: state.n_sites, amplitudes })
    }
}

/// Pure state on the full `2^N` space.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    n_sites: usize,
    amplitudes: Vec<Complex64>,
}

impl FullState {
    pub fn new(n_sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::invalid(format!(
                "expected {} amplitudes for N={n_sites}, got {}",
                1usize << n_sites,
                amplitudes.len()
            )));
        }
        let state = Self { n_sites, amplitudes };
        if (state.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("state norm {} is not 1", state.norm())));
        }
        Ok(state)
    }

    /// The product state with the pattern's sites up and all others down.
    pub fn from_pattern(pattern: &ExcitationPattern) -> Self {
        let n = pattern.n_sites();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[basis_index(pattern)] = Complex64::new(1.0, 0.0);
        Self { n_sites: n, amplitudes }
    }

    /// `(|a⟩ + |b⟩)/√2` for two states of the same chain.
    pub fn equal_superposition(a: &FullState, b: &FullState) -> Result<Self> {
        if a.n_sites != b.n_sites {
            return Err(Error::invalid("superposed states live on different chains"));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amplitudes = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| (x + y) * s).collect();
        Self::new(a.n_sites, amplitudes)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, pattern: &ExcitationPattern) -> Complex64 {
        self.amplitudes[basis_index(pattern)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &FullState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `⟨n_k⟩` for every site `k = 1..=N`.
    pub fn site_occupations(&self) -> Vec<f64> {
        let n = self.n_sites;
        (1..=n)
            .map(|k| {
                let mask = site_mask(n, k);
                self.amplitudes.iter().enumerate().filter(|(x, _)| x & mask != 0).map(|(_, a)| a.norm_sqr()).sum()
            })
            .collect()
    }
}

fn site_mask(n_sites: usize, site: usize) -> usize {
    1 << (n_sites - site)
}

fn basis_index(pattern: &ExcitationPattern) -> usize {
    pattern.sites().iter().fold(0, |acc, &k| acc | site_mask(pattern.n_sites(), k))
}

pub fn evolve_full(hamiltonian: &SpinHamiltonian, state: &FullState, t: f64) -> Result<FullState> {
    hamiltonian.evolve(state, t)
}

/// Reduced density matrix of site `N` in the (up, down) ordering:
///
/// ```text
/// [ ⟨σ⁺σ⁻⟩  ⟨σ⁻⟩   ]
/// [ ⟨σ⁺⟩    ⟨σ⁻σ⁺⟩ ]
/// ```
pub fn reduced_density_site_n(state: &FullState) -> Matrix2<Complex64> {
    let mask = 1usize; // site N is the least significant bit
    let zero = Complex64::new(0.0, 0.0);
    let (mut up, mut down, mut raise) = (0.0, 0.0, zero);
    for (x, a) in state.amplitudes.iter().enumerate() {
        if x & mask != 0 {
            up += a.norm_sqr();
        } else {
            down += a.norm_sqr();
            // σ⁺_N maps |x⟩ to |x with site N up⟩
            raise += state.amplitudes[x | mask].conj() * a;
        }
    }
    Matrix2::new(Complex64::new(up, 0.0), raise.conj(), raise, Complex64::new(down, 0.0))
}

/// Γ from explicit evolution of the two sender branches.
///
/// `Γ1, Γ3` (and `Γ2, Γ4`) are the up and down populations of site `N` in
/// the evolved branch-0 (branch-1) state. With equal weights
/// `α = β = 1/√2`, `⟨σ⁺_N⟩ = αβ*Γ5 = Γ5/2` in the superposed state.
pub fn gamma_oracle(spec: &ChainSpec, pair: &BranchPair, t: f64) -> Result<GammaSet> {
    gamma_oracle_with(&SpinHamiltonian::new(spec)?, pair, t)
}

/// [`gamma_oracle`] reusing the decompositions cached in `hamiltonian`.
pub fn gamma_oracle_with(hamiltonian: &SpinHamiltonian, pair: &BranchPair, t: f64) -> Result<GammaSet> {
    if pair.n_sites() != hamiltonian.n_sites() {
        return Err(Error::invalid("branch pair and Hamiltonian disagree on N"));
    }
    let psi0 = hamiltonian.evolve(&FullState::from_pattern(pair.branch0()), t)?;
    let psi1 = hamiltonian.evolve(&FullState::from_pattern(pair.branch1()), t)?;
    let rho0 = reduced_density_site_n(&psi0);
    let rho1 = reduced_density_site_n(&psi1);
    let mixed = reduced_density_site_n(&FullState::equal_superposition(&psi0, &psi1)?);
    Ok(GammaSet {
        gamma1: rho0[(0, 0)].re,
        gamma2: rho1[(0, 0)].re,
        gamma3: rho0[(1, 1)].re,
        gamma4: rho1[(1, 1)].re,
        gamma5: mixed[(1, 0)] * 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::neel_channel;
    use crate::propagator::spectrum;

    fn ham(n: usize, j: f64, h: f64) -> SpinHamiltonian {
        SpinHamiltonian::new(&ChainSpec::new(n, j, h).unwrap()).unwrap()
    }

    fn pattern(n: usize, sites: &[usize]) -> ExcitationPattern {
        ExcitationPattern::new(n, sites.iter().copied()).unwrap()
    }

    #[test]
    fn single_site_is_pure_zeeman() {
        let h = ham(1, 1.0, 0.5);
        let m = h.to_dense().unwrap();
        // index 1 is |1⟩ (up), index 0 is |0⟩ (down)
        assert!((m[(1, 1)] - 0.5).abs() < 1e-15);
        assert!((m[(0, 0)] + 0.5).abs() < 1e-15);
        assert_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn two_site_spectrum() {
        // the |10⟩,|01⟩ block is [[0, J], [J, 0]]
        let h = ham(2, 1.0, 0.0);
        let mut values: Vec<f64> = SymmetricEigen::new(h.to_dense().unwrap()).eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        for (v, want) in values.iter().zip([-1.0, 0.0, 0.0, 1.0]) {
            assert!((v - want).abs() < 1e-13);
        }
        assert_eq!(h.matrix_element(0b10, 0b01), 1.0);
    }

    #[test]
    fn hermitian_and_number_conserving() {
        for n in 1..=10 {
            let h = ham(n, 0.8, 0.37);
            let m = h.to_dense().unwrap();
            assert!((&m - m.transpose()).amax() < 1e-13);
            // total Z is diagonal, so [H, Z] vanishes iff H never links sectors
            let z = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
                if r == c {
                    n as f64 - 2.0 * r.count_ones() as f64
                } else {
                    0.0
                }
            });
            assert!((&m * &z - &z * &m).amax() < 1e-13, "N={n}");
        }
    }

    #[test]
    fn apply_matches_dense() {
        let h = ham(5, -1.3, 0.2);
        let m = h.to_dense().unwrap();
        let psi: Vec<Complex64> = (0..32).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let applied = h.apply(&psi).unwrap();
        for r in 0..32 {
            let want: Complex64 = (0..32).map(|c| psi[c] * m[(r, c)]).sum();
            assert!((applied[r] - want).norm() < 1e-12);
        }
        assert!(h.apply(&psi[..4]).is_err());
    }

    #[test]
    fn single_excitation_spectrum_offset() {
        for n in 1..=10 {
            let spec = ChainSpec::new(n, 1.0, 0.45).unwrap();
            let h = SpinHamiltonian::new(&spec).unwrap();
            let mut want: Vec<f64> = spectrum(&spec).energies.iter().map(|e| e - spec.field() * n as f64).collect();
            want.sort_by(f64::total_cmp);
            for (got, want) in h.sector_energies(1).iter().zip(&want) {
                assert!((got - want).abs() < 1e-12, "N={n}");
            }
            let vacuum = h.sector_energies(0);
            assert!((vacuum[0] + spec.field() * n as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn evolution_basics() {
        let h = ham(6, 1.0, 0.3);
        let psi = FullState::from_pattern(&pattern(6, &[2, 4, 6]));
        assert!(h.evolve(&psi, 0.0).unwrap().inner(&psi).norm() > 1.0 - 1e-12);
        let later = h.evolve(&psi, 17.0).unwrap();
        assert!((later.norm() - 1.0).abs() < 1e-11);

        // the polarized state is an eigenstate
        let vac = FullState::from_pattern(&ExcitationPattern::empty(6));
        let evolved = h.evolve(&vac, 3.3).unwrap();
        assert!((evolved.inner(&vac).norm() - 1.0).abs() < 1e-11);

        let other = FullState::from_pattern(&ExcitationPattern::empty(5));
        assert!(matches!(h.evolve(&other, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn full_and_sector_paths_agree() {
        for n in [3, 6, 9] {
            let h = ham(n, 1.0, 0.7);
            let pair = neel_channel(n).unwrap();
            let a = FullState::from_pattern(pair.branch0());
            let b = FullState::from_pattern(pair.branch1());
            let psi = FullState::equal_superposition(&a, &b).unwrap();
            let full = h.evolve_with(&psi, 5.5, EvolutionMethod::Full).unwrap();
            let sectors = h.evolve_with(&psi, 5.5, EvolutionMethod::Sectors).unwrap();
            let dev =
                full.amplitudes().iter().zip(sectors.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(dev < 1e-11, "N={n} dev={dev}");
        }
    }

    #[test]
    fn reduced_density_examples() {
        let n = 4;
        let down = FullState::from_pattern(&ExcitationPattern::empty(n));
        let rho = reduced_density_site_n(&down);
        assert_eq!(rho[(0, 0)].re, 0.0);
        assert_eq!(rho[(1, 1)].re, 1.0);

        let up = FullState::from_pattern(&pattern(n, &[4]));
        let rho = reduced_density_site_n(&up);
        assert_eq!(rho[(0, 0)].re, 1.0);
        assert_eq!(rho[(1, 1)].re, 0.0);

        let plus = FullState::equal_superposition(&down, &up).unwrap();
        let rho = reduced_density_site_n(&plus);
        assert!((rho[(0, 1)].norm() - 0.5).abs() < 1e-15);
        assert!((rho[(1, 0)].norm() - 0.5).abs() < 1e-15);
        assert!((rho[(0, 0)].re + rho[(1, 1)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn size_cap() {
        let spec = ChainSpec::afm(15, 0.0).unwrap();
        assert!(matches!(SpinHamiltonian::new(&spec), Err(Error::ResourceLimit(_))));
        assert!(matches!(gamma_oracle(&spec, &neel_channel(15).unwrap(), 1.0), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn state_validation() {
        assert!(FullState::new(2, vec![Complex64::new(1.0, 0.0); 3]).is_err());
        assert!(FullState::new(1, vec![Complex64::new(1.0, 0.0); 2]).is_err());
        assert!(FullState::new(1, vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]).is_ok());
    }
}
