//! Chain parameters, excitation patterns and channel preparations.
//!
//! Conventions used throughout the crate:
//! - sites are numbered `1..=N`;
//! - `J > 0` is antiferromagnetic, `J < 0` ferromagnetic;
//! - time is measured in units of `1/|J|` when reported as `Jt`, with ħ = 1.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Open XY chain of `n_sites` spins with uniform coupling and field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    n_sites: usize,
    coupling: f64,
    field: f64,
}

impl ChainSpec {
    pub fn new(n_sites: usize, coupling: f64, field: f64) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::invalid("chain needs at least one site"));
        }
        if !coupling.is_finite() || coupling == 0.0 {
            return Err(Error::invalid(format!("coupling must be finite and nonzero, got {coupling}")));
        }
        if !field.is_finite() {
            return Err(Error::invalid(format!("field must be finite, got {field}")));
        }
        Ok(Self { n_sites, coupling, field })
    }

    /// Antiferromagnetic chain with `J = 1`.
    pub fn afm(n_sites: usize, field: f64) -> Result<Self> {
        Self::new(n_sites, 1.0, field)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn is_ferromagnetic(&self) -> bool {
        self.coupling < 0.0
    }

    /// Same chain with a different field strength.
    pub fn with_field(&self, field: f64) -> Result<Self> {
        Self::new(self.n_sites, self.coupling, field)
    }

    /// Field in the dimensionless ratio `2h/J` used for plotting.
    pub fn reduced_field(&self) -> f64 {
        2.0 * self.field / self.coupling
    }

    /// Converts a scaled time `|J| t` into the physical time `t`.
    pub fn time_from_scaled(&self, scaled: f64) -> f64 {
        scaled / self.coupling.abs()
    }

    pub fn scaled_time(&self, t: f64) -> f64 {
        t * self.coupling.abs()
    }
}

/// Sorted set of initially excited (spin-up) sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExcitationPattern {
    n_sites: usize,
    sites: Vec<usize>,
}

impl ExcitationPattern {
    /// Builds a pattern from sites in any order; duplicates or sites outside
    /// `1..=n_sites` are rejected.
    pub fn new(n_sites: usize, sites: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut sites: Vec<usize> = sites.into_iter().collect();
        sites.sort_unstable();
        if let Some(w) = sites.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("site {} listed more than once", w[0])));
        }
        if let Some(&bad) = sites.iter().find(|&&s| s == 0 || s > n_sites) {
            return Err(Error::invalid(format!("site {bad} outside 1..={n_sites}")));
        }
        Ok(Self { n_sites, sites })
    }

    pub fn empty(n_sites: usize) -> Self {
        Self { n_sites, sites: Vec::new() }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// Number of excitations `M`.
    pub fn count(&self) -> usize {
        self.sites.len()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    fn with_site(&self, site: usize) -> Result<Self> {
        Self::new(self.n_sites, self.sites.iter().copied().chain(std::iter::once(site)))
    }
}

impl fmt::Display for ExcitationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sites.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The two branches of a sender qubit `α|0⟩ + β|1⟩` on site 1 in front of
/// a channel prepared on sites `2..=N`.
///
/// `branch0` is the channel alone (sender down, `M1` excitations) and
/// `branch1` additionally has site 1 up (`M2 = M1 + 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchPair {
    branch0: ExcitationPattern,
    branch1: ExcitationPattern,
}

impl BranchPair {
    fn from_channel(channel: ExcitationPattern) -> Result<Self> {
        if channel.contains(1) {
            return Err(Error::invalid("channel sites must lie in 2..=N"));
        }
        let branch1 = channel.with_site(1)?;
        Ok(Self { branch0: channel, branch1 })
    }

    pub fn branch0(&self) -> &ExcitationPattern {
        &self.branch0
    }

    pub fn branch1(&self) -> &ExcitationPattern {
        &self.branch1
    }

    pub fn m1(&self) -> usize {
        self.branch0.count()
    }

    pub fn m2(&self) -> usize {
        self.branch1.count()
    }

    pub fn n_sites(&self) -> usize {
        self.branch0.n_sites()
    }
}

fn require_channel_length(n_sites: usize) -> Result<()> {
    if n_sites < 2 {
        return Err(Error::invalid(format!("a sender plus channel needs N >= 2, got {n_sites}")));
    }
    Ok(())
}

/// Néel-ordered channel on sites `2..=N`, starting with an up spin on site 2.
///
/// Odd `N` reads `1010…10` (site `N` down, `M1 = (N-1)/2`); even `N` reads
/// `1010…01` (site `N` up, `M1 = N/2`).
pub fn neel_channel(n_sites: usize) -> Result<BranchPair> {
    require_channel_length(n_sites)?;
    let channel = ExcitationPattern::new(n_sites, (2..=n_sites).step_by(2))?;
    BranchPair::from_channel(channel)
}

/// Fully polarized channel: the ferromagnetic ground state `|00…0⟩`.
pub fn fm_ground_channel(n_sites: usize) -> Result<BranchPair> {
    require_channel_length(n_sites)?;
    BranchPair::from_channel(ExcitationPattern::empty(n_sites))
}

/// Channel with excitations on arbitrary sites of `2..=N`.
pub fn custom_channel(n_sites: usize, channel_sites: &[usize]) -> Result<BranchPair> {
    require_channel_length(n_sites)?;
    if let Some(&bad) = channel_sites.iter().find(|&&s| s < 2 || s > n_sites) {
        return Err(Error::invalid(format!("channel site {bad} outside 2..={n_sites}")));
    }
    BranchPair::from_channel(ExcitationPattern::new(n_sites, channel_sites.iter().copied())?)
}

/// Channel descriptor as written on the command line: `neel`, `fm`, or a
/// comma-separated site list such as `2,4,6`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Channel {
    Neel,
    FmGround,
    Custom(Vec<usize>),
}

impl Channel {
    pub fn branch_pair(&self, n_sites: usize) -> Result<BranchPair> {
        match self {
            Channel::Neel => neel_channel(n_sites),
            Channel::FmGround => fm_ground_channel(n_sites),
            Channel::Custom(sites) => custom_channel(n_sites, sites),
        }
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neel" => Ok(Channel::Neel),
            "fm" => Ok(Channel::FmGround),
            "" => Err(Error::invalid("empty channel descriptor")),
            list => list
                .split(',')
                .map(|part| {
                    part.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::invalid(format!("bad site '{}' in channel '{s}'", part.trim())))
                })
                .collect::<Result<Vec<_>>>()
                .map(Channel::Custom),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Neel => f.write_str("neel"),
            Channel::FmGround => f.write_str("fm"),
            Channel::Custom(sites) => {
                let parts: Vec<String> = sites.iter().map(|s| s.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}
