//! Single-particle transition amplitudes of the free-fermion chain.
//!
//! With open boundaries the hopping matrix is diagonalized by the sine
//! transform, so
//!
//! ```text
//! f_{k,l}(t) = 2/(N+1) Σ_m sin(q_m k) sin(q_m l) exp(-i E_m t),
//! q_m = π m / (N+1),   E_m = 2h + 2J cos q_m.
//! ```
//!
//! `f_{k,l}(t)` is the amplitude for an excitation created on site `k` to be
//! found on site `l` after time `t`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::ChainSpec;

/// Momenta and single-particle energies of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub momenta: Vec<f64>,
    pub energies: Vec<f64>,
}

pub fn spectrum(spec: &ChainSpec) -> SpectralData {
    let n = spec.n_sites();
    let momenta: Vec<f64> = (1..=n).map(|m| PI * m as f64 / (n + 1) as f64).collect();
    let energies = momenta.iter().map(|q| 2.0 * spec.field() + 2.0 * spec.coupling() * q.cos()).collect();
    SpectralData { momenta, energies }
}

/// The matrix `F(t)` with entries `f_{k,l}(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeMatrix {
    time: f64,
    entries: DMatrix<Complex64>,
}

impl AmplitudeMatrix {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn n_sites(&self) -> usize {
        self.entries.nrows()
    }

    /// `f_{k,l}` with 1-indexed sites.
    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.entries[(k - 1, l - 1)]
    }

    /// Zero-indexed view of the full matrix.
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }
}

/// Sine transform and spectrum cached for one chain; evaluating a time point
/// only recomputes the `N` phase factors.
#[derive(Debug, Clone)]
pub struct Propagator {
    spec: ChainSpec,
    spectral: SpectralData,
    /// `modes[(k, m)] = sqrt(2/(N+1)) sin(q_m k)`, zero-indexed.
    modes: DMatrix<f64>,
}

impl Propagator {
    pub fn new(spec: &ChainSpec) -> Self {
        let n = spec.n_sites();
        let spectral = spectrum(spec);
        let norm = (2.0 / (n + 1) as f64).sqrt();
        let modes = DMatrix::from_fn(n, n, |k, m| norm * (spectral.momenta[m] * (k + 1) as f64).sin());
        Self { spec: *spec, spectral, modes }
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    fn phases(&self, t: f64) -> Vec<Complex64> {
        self.spectral.energies.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect()
    }

    pub fn amplitude_matrix(&self, t: f64) -> Result<AmplitudeMatrix> {
        check_time(t)?;
        let n = self.spec.n_sites();
        let phases = self.phases(t);
        let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        // symmetric in (k, l): fill the upper triangle and mirror
        for k in 0..n {
            for l in k..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, phase) in phases.iter().enumerate() {
                    acc += phase * (self.modes[(k, m)] * self.modes[(l, m)]);
                }
                entries[(k, l)] = acc;
                entries[(l, k)] = acc;
            }
        }
        Ok(AmplitudeMatrix { time: t, entries })
    }

    /// One entry `f_{k,l}(t)` in `O(N)`.
    pub fn single_amplitude(&self, k: usize, l: usize, t: f64) -> Result<Complex64> {
        check_time(t)?;
        let n = self.spec.n_sites();
        for site in [k, l] {
            if site == 0 || site > n {
                return Err(Error::invalid(format!("site {site} outside 1..={n}")));
            }
        }
        Ok(self
            .spectral
            .energies
            .iter()
            .enumerate()
            .map(|(m, &e)| Complex64::from_polar(self.modes[(k - 1, m)] * self.modes[(l - 1, m)], -e * t))
            .sum())
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("time must be finite, got {t}")))
    }
}

pub fn amplitude_matrix(spec: &ChainSpec, t: f64) -> Result<AmplitudeMatrix> {
    Propagator::new(spec).amplitude_matrix(t)
}

pub fn single_amplitude(spec: &ChainSpec, k: usize, l: usize, t: f64) -> Result<Complex64> {
    Propagator::new(spec).single_amplitude(k, l, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(n: usize, j: f64, h: f64) -> ChainSpec {
        ChainSpec::new(n, j, h).unwrap()
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn spectrum_examples() {
        let s = spectrum(&spec(1, 1.0, 0.0));
        assert!((s.momenta[0] - PI / 2.0).abs() < 1e-15);
        assert!(s.energies[0].abs() < 1e-15);

        let s = spectrum(&spec(2, 1.0, 0.0));
        assert!((s.energies[0] - 1.0).abs() < 1e-14);
        assert!((s.energies[1] + 1.0).abs() < 1e-14);

        let s = spectrum(&spec(3, 1.0, 0.5));
        let r2 = 2f64.sqrt();
        for (e, want) in s.energies.iter().zip([1.0 + r2, 1.0, 1.0 - r2]) {
            assert!((e - want).abs() < 1e-14);
        }
        assert!(s.momenta.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn identity_at_time_zero() {
        for n in 1..=12 {
            let f = amplitude_matrix(&spec(n, 1.0, 0.3), 0.0).unwrap();
            let dev = max_abs(&(f.entries() - DMatrix::identity(n, n)));
            assert!(dev < 1e-14, "N={n} dev={dev}");
        }
    }

    #[test]
    fn two_site_closed_form() {
        // direct 2x2 diagonalization: hopping J between |10> and |01>, so
        // f_{1,2}(t) = -i sin(Jt), f_{1,1}(t) = cos(Jt) at h = 0
        let s = spec(2, 1.0, 0.0);
        for &t in &[0.3, 1.1, PI / 2.0, 4.0] {
            let f = amplitude_matrix(&s, t).unwrap();
            assert!((f.get(1, 2) - Complex64::new(0.0, -t.sin())).norm() < 1e-14);
            assert!((f.get(1, 1) - Complex64::new(t.cos(), 0.0)).norm() < 1e-14);
        }
        let f = amplitude_matrix(&s, PI / 2.0).unwrap();
        assert!((f.get(1, 2).norm() - 1.0).abs() < 1e-14);
        assert!(f.get(1, 1).norm() < 1e-14);
    }

    #[test]
    fn single_amplitude_agrees_with_matrix() {
        let s = spec(7, -1.0, 0.4);
        let p = Propagator::new(&s);
        let f = p.amplitude_matrix(3.3).unwrap();
        for k in 1..=7 {
            for l in 1..=7 {
                assert!((p.single_amplitude(k, l, 3.3).unwrap() - f.get(k, l)).norm() < 1e-14);
            }
        }
        assert!((p.single_amplitude(2, 2, 0.0).unwrap() - 1.0).norm() < 1e-14);
        assert!(p.single_amplitude(1, 3, 0.0).unwrap().norm() < 1e-15);
        assert!(matches!(p.single_amplitude(0, 3, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(p.single_amplitude(1, 8, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(p.amplitude_matrix(f64::INFINITY), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn five_site_end_to_end_transfer_reaches_unity() {
        let p = Propagator::new(&spec(5, 1.0, 0.0));
        let best = (0..=50_000).map(|i| p.single_amplitude(1, 5, i as f64 * 0.01).unwrap().norm()).fold(0.0, f64::max);
        assert!(best > 0.99, "best |f_15| = {best}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn unitary_and_symmetric(n in 1usize..=40, t in 0.0f64..100.0, h in 0.0f64..2.0) {
            let f = amplitude_matrix(&spec(n, 1.0, h), t).unwrap().into_entries();
            let dev = max_abs(&(&f * f.adjoint() - DMatrix::identity(n, n)));
            prop_assert!(dev < 1e-11, "unitarity dev {}", dev);
            prop_assert!(max_abs(&(&f - f.transpose())) < 1e-14);
        }

        #[test]
        fn one_parameter_group(n in 1usize..=30, t1 in 0.0f64..50.0, t2 in 0.0f64..50.0, h in -2.0f64..2.0) {
            let p = Propagator::new(&spec(n, 1.0, h));
            let lhs = p.amplitude_matrix(t1 + t2).unwrap().into_entries();
            let rhs = p.amplitude_matrix(t1).unwrap().into_entries() * p.amplitude_matrix(t2).unwrap().into_entries();
            prop_assert!(max_abs(&(lhs - rhs)) < 1e-11);
        }

        #[test]
        fn field_enters_as_global_phase(n in 1usize..=30, t in 0.0f64..100.0, h in 0.0f64..2.0, j in prop_oneof![Just(1.0), Just(-1.0), 0.2f64..3.0]) {
            let with_field = amplitude_matrix(&spec(n, j, h), t).unwrap().into_entries();
            let bare = amplitude_matrix(&spec(n, j, 0.0), t).unwrap().into_entries();
            let phase = Complex64::from_polar(1.0, -2.0 * h * t);
            prop_assert!(max_abs(&(with_field - bare * phase)) < 1e-12);
        }

        #[test]
        fn mirror_symmetry(n in 1usize..=30, t in 0.0f64..100.0, h in 0.0f64..2.0) {
            let f = amplitude_matrix(&spec(n, 1.0, h), t).unwrap();
            for k in 1..=n {
                for l in 1..=n {
                    prop_assert!((f.get(k, l) - f.get(n + 1 - k, n + 1 - l)).norm() < 1e-12);
                }
            }
        }
    }
}
