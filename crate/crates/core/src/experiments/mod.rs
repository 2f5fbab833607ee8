//! Numerical studies: time/field sweeps, maximum-fidelity searches, channel
//! comparisons across chain lengths and excitation-ordering checks.
//!
//! Times on this interface are the scaled time `|J| t`. Fields are raw `h`.
//! All parallel work is collected in index order and reduced sequentially,
//! so results do not depend on the worker count.

mod grid;
mod search;

pub use grid::Grid1D;
pub use search::golden_section_max;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fidelity::{fast_from_amplitudes, raw_average_fidelity, FidelityMode, GammaSet};
use crate::model::{custom_channel, BranchPair, ChainSpec, Channel};
use crate::propagator::Propagator;

/// Largest sweep (time points × field points) accepted.
pub const MAX_SWEEP_CELLS: usize = 50_000_000;

/// Default time window `[0, 500]` in units of `1/|J|`, step 0.01.
pub fn default_time_window() -> Grid1D {
    Grid1D::new(0.0, 500.0, 0.01).expect("static grid")
}

/// Default field scan `[0, 2]`, step 0.01.
pub fn default_field_grid() -> Grid1D {
    Grid1D::new(0.0, 2.0, 0.01).expect("static grid")
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldPolicy {
    Fixed(f64),
    /// Scan the grid, then refine the best field by golden section.
    Optimize(Grid1D),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Final bracket width of the golden-section refinement in `|J| t`.
    pub refine_tol: f64,
    /// Local maxima within this of the global maximum count as ties; the
    /// earliest one is reported.
    pub tie_tol: f64,
    /// Coarse local maxima further than this below the coarse maximum are
    /// not refined.
    pub candidate_margin: f64,
    pub max_candidates: usize,
    pub workers: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            refine_tol: 1e-6,
            tie_tol: 1e-9,
            candidate_margin: 0.02,
            max_candidates: 512,
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
    }
}

impl SearchOptions {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Best fidelity found in a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumResult {
    pub f_max: f64,
    /// Scaled time `|J| t` of the (earliest) maximum.
    pub t_max: f64,
    pub h_star: f64,
    pub mode: FidelityMode,
    pub refinement_tol: f64,
}

/// Fidelity on a time × field grid; `values[i][j]` is at `times[i]`, `fields[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub times: Vec<f64>,
    pub fields: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub channel: String,
    pub mode: FidelityMode,
}

impl SweepResult {
    /// `(value, time, field)` of the largest cell; ties go to the earliest
    /// time, then the smallest field.
    pub fn max_cell(&self) -> (f64, f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.0 {
                    best = (v, self.times[i], self.fields[j]);
                }
            }
        }
        best
    }
}

fn parallel_map<T: Send>(workers: usize, len: usize, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::resource(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..len).into_par_iter().map(&f).collect()))
}

fn check_pair(spec: &ChainSpec, pair: &BranchPair) -> Result<()> {
    if spec.n_sites() != pair.n_sites() {
        return Err(Error::invalid(format!(
            "channel built for N={} but chain has N={}",
            pair.n_sites(),
            spec.n_sites()
        )));
    }
    Ok(())
}

/// Γ and fidelity at scaled time `scaled_t` through the Cauchy-Binet path.
pub fn fidelity_at(spec: &ChainSpec, pair: &BranchPair, scaled_t: f64, mode: FidelityMode) -> Result<(GammaSet, f64)> {
    check_pair(spec, pair)?;
    let f = Propagator::new(spec).amplitude_matrix(spec.time_from_scaled(scaled_t))?;
    let gammas = fast_from_amplitudes(&f, pair);
    Ok((gammas, raw_average_fidelity(&gammas, mode)))
}

/// Dense fidelity map over scaled time and field. The field of `template`
/// is ignored; each grid field is applied in turn.
pub fn sweep_time_field(
    template: &ChainSpec,
    pair: &BranchPair,
    times: &Grid1D,
    fields: &Grid1D,
    mode: FidelityMode,
    workers: usize,
) -> Result<SweepResult> {
    check_pair(template, pair)?;
    let cells = times.len().saturating_mul(fields.len());
    if cells > MAX_SWEEP_CELLS {
        return Err(Error::resource(format!("sweep of {cells} cells exceeds {MAX_SWEEP_CELLS}")));
    }
    let propagators = fields
        .points()
        .into_iter()
        .map(|h| template.with_field(h).map(|s| Propagator::new(&s)))
        .collect::<Result<Vec<_>>>()?;
    let time_points = times.points();
    let rows = parallel_map(workers, time_points.len(), |i| {
        let t = template.time_from_scaled(time_points[i]);
        propagators
            .iter()
            .map(|p| {
                let f = p.amplitude_matrix(t)?;
                Ok(raw_average_fidelity(&fast_from_amplitudes(&f, pair), mode))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(SweepResult {
        times: time_points,
        fields: fields.points(),
        values: rows.into_iter().collect::<Result<Vec<_>>>()?,
        channel: pair.branch0().to_string(),
        mode,
    })
}

/// Evaluates the best fidelity over the field policy at one time.
struct FieldScan<'a> {
    propagator: Propagator,
    pair: &'a BranchPair,
    mode: FidelityMode,
    policy: &'a FieldPolicy,
    tol: f64,
}

impl<'a> FieldScan<'a> {
    fn new(
        spec: &ChainSpec,
        pair: &'a BranchPair,
        mode: FidelityMode,
        policy: &'a FieldPolicy,
        tol: f64,
    ) -> Result<Self> {
        let base_field = match policy {
            FieldPolicy::Fixed(h) => *h,
            FieldPolicy::Optimize(_) => 0.0,
        };
        Ok(Self { propagator: Propagator::new(&spec.with_field(base_field)?), pair, mode, policy, tol })
    }

    /// `(h, F)` maximizing the fidelity at scaled time `tau`.
    fn best_at(&self, tau: f64) -> (f64, f64) {
        let t = self.propagator.spec().time_from_scaled(tau);
        let f = self.propagator.amplitude_matrix(t).expect("window times are finite");
        let gammas = fast_from_amplitudes(&f, self.pair);
        match self.policy {
            FieldPolicy::Fixed(h) => (*h, raw_average_fidelity(&gammas, self.mode)),
            FieldPolicy::Optimize(grid) => {
                // the base propagator has h = 0, so a field h is a pure phase on Γ5
                let at = |h: f64| raw_average_fidelity(&gammas.with_field_shift(h, t), self.mode);
                let mut best = (grid.start(), at(grid.start()));
                let mut best_idx = 0;
                for j in 1..grid.len() {
                    let v = at(grid.point(j));
                    if v > best.1 {
                        best = (grid.point(j), v);
                        best_idx = j;
                    }
                }
                if grid.len() > 1 {
                    let lo = grid.point(best_idx.saturating_sub(1));
                    let hi = grid.point((best_idx + 1).min(grid.len() - 1));
                    let refined = golden_section_max(at, lo, hi, self.tol * 1e-3);
                    if refined.1 > best.1 {
                        best = refined;
                    }
                }
                best
            }
        }
    }
}

/// Maximum fidelity over a window of scaled times.
///
/// A coarse scan over `window` is followed by golden-section refinement of
/// every coarse local maximum within `candidate_margin` of the coarse
/// maximum. The reported time is the earliest refined maximum within
/// `tie_tol` of the best one. The field of `spec` is ignored in favour of
/// `policy`.
pub fn find_fmax(
    spec: &ChainSpec,
    pair: &BranchPair,
    window: &Grid1D,
    mode: FidelityMode,
    policy: &FieldPolicy,
    options: &SearchOptions,
) -> Result<OptimumResult> {
    check_pair(spec, pair)?;
    if window.is_empty() {
        return Err(Error::invalid("empty time window"));
    }
    if window.start() < 0.0 {
        return Err(Error::invalid("time window must start at or after 0"));
    }
    if let FieldPolicy::Fixed(h) = policy {
        if !h.is_finite() {
            return Err(Error::invalid("fixed field must be finite"));
        }
    }
    let scan = FieldScan::new(spec, pair, mode, policy, options.refine_tol)?;
    let coarse = parallel_map(options.workers, window.len(), |i| scan.best_at(window.point(i)))?;

    let values: Vec<f64> = coarse.iter().map(|c| c.1).collect();
    let coarse_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let last = values.len() - 1;
    let mut candidates: Vec<usize> = (0..values.len())
        .filter(|&i| {
            let left = i == 0 || values[i] >= values[i - 1];
            let right = i == last || values[i] >= values[i + 1];
            left && right && values[i] >= coarse_max - options.candidate_margin
        })
        .collect();
    // highest first, earliest among equals
    candidates.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    candidates.truncate(options.max_candidates.max(1));

    let refined = parallel_map(options.workers, candidates.len(), |c| {
        let i = candidates[c];
        let (tau_i, (h_i, f_i)) = (window.point(i), coarse[i]);
        if window.len() == 1 {
            return (tau_i, h_i, f_i);
        }
        let lo = window.point(i.saturating_sub(1));
        let hi = window.point((i + 1).min(last));
        let (tau, f) = golden_section_max(|tau| scan.best_at(tau).1, lo, hi, options.refine_tol);
        if f > f_i {
            (tau, scan.best_at(tau).0, f)
        } else {
            (tau_i, h_i, f_i)
        }
    })?;

    let f_best = refined.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let (t_max, h_star, f_max) = refined
        .iter()
        .copied()
        .filter(|r| r.2 >= f_best - options.tie_tol)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one candidate");
    Ok(OptimumResult { f_max, t_max, h_star, mode, refinement_tol: options.refine_tol })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRow {
    pub n_sites: usize,
    pub channel: Channel,
    pub optimum: OptimumResult,
}

/// Maximum fidelity and arrival time of the FM-ground and Néel channels for
/// every chain length in `n_values`.
pub fn compare_channels(
    n_values: &[usize],
    coupling: f64,
    window: &Grid1D,
    policy: &FieldPolicy,
    mode: FidelityMode,
    options: &SearchOptions,
) -> Result<Vec<ChannelRow>> {
    let mut rows = Vec::with_capacity(2 * n_values.len());
    for &n in n_values {
        let spec = ChainSpec::new(n, coupling, 0.0)?;
        for channel in [Channel::FmGround, Channel::Neel] {
            let pair = channel.branch_pair(n)?;
            let optimum = find_fmax(&spec, &pair, window, mode, policy, options)?;
            rows.push(ChannelRow { n_sites: n, channel, optimum });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingRow {
    pub sites: Vec<usize>,
    pub fidelity: f64,
    /// Fidelity minus the reference channel's fidelity at the same time.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingStudy {
    pub reference: OptimumResult,
    pub rows: Vec<OrderingRow>,
    /// `pairwise[a][b] = F_a - F_b`.
    pub pairwise: Vec<Vec<f64>>,
}

impl OrderingStudy {
    pub fn max_abs_pairwise(&self) -> f64 {
        self.pairwise.iter().flatten().map(|d| d.abs()).fold(0.0, f64::max)
    }
}

/// Fidelity of channels with the same excitation count but different
/// positions, all evaluated at the reference channel's arrival time.
pub fn ordering_study(
    spec: &ChainSpec,
    patterns: &[Vec<usize>],
    reference: &BranchPair,
    mode: FidelityMode,
    window: &Grid1D,
    options: &SearchOptions,
) -> Result<OrderingStudy> {
    let pairs = patterns.iter().map(|sites| custom_channel(spec.n_sites(), sites)).collect::<Result<Vec<_>>>()?;
    if let Some(p) = pairs.iter().find(|p| p.m1() != reference.m1()) {
        return Err(Error::invalid(format!(
            "pattern {} has {} excitations, reference has {}",
            p.branch0(),
            p.m1(),
            reference.m1()
        )));
    }
    let optimum = find_fmax(spec, reference, window, mode, &FieldPolicy::Fixed(spec.field()), options)?;
    let (_, f_ref) = fidelity_at(spec, reference, optimum.t_max, mode)?;
    let fidelities =
        pairs.iter().map(|p| fidelity_at(spec, p, optimum.t_max, mode).map(|r| r.1)).collect::<Result<Vec<f64>>>()?;
    let rows = pairs
        .iter()
        .zip(&fidelities)
        .map(|(p, &f)| OrderingRow { sites: p.branch0().sites().to_vec(), fidelity: f, delta: f - f_ref })
        .collect();
    let pairwise = fidelities.iter().map(|a| fidelities.iter().map(|b| a - b).collect()).collect();
    Ok(OrderingStudy { reference: optimum, rows, pairwise })
}
