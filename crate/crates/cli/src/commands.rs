use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use xychain::experiments::{
    compare_channels, fidelity_at, ordering_study, sweep_time_field, FieldPolicy, Grid1D, SearchOptions,
};
use xychain::fidelity::{average_fidelity, gamma_direct, gamma_fast};
use xychain::model::Channel;
use xychain::oracle::{gamma_oracle_with, SpinHamiltonian, ORACLE_SIZE_CAP};
use xychain::{ChainSpec, Error};

use crate::args::{Common, CompareArgs, FidelityArgs, HPolicy, OracleCheckArgs, OrderingArgs, SweepArgs, WindowArgs};
use crate::output::{emit, Meta, Table};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Resource(String),
    Verification(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Resource(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Resource(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            Error::ResourceLimit(_) => Failure::Resource(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn workers(common: &Common) -> usize {
    common.workers.unwrap_or_else(|| SearchOptions::default().workers).max(1)
}

fn write(table: &Table, meta: Meta<'_>, common: &Common) -> Outcome {
    emit(table, &meta, common.format, common.output.as_deref())
        .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
}

fn window(w: &WindowArgs) -> Result<Grid1D, Failure> {
    Ok(Grid1D::new(w.jt_min, w.jt_max, w.jt_step)?)
}

pub fn fidelity(a: &FidelityArgs, argv: &[String]) -> Outcome {
    let spec = ChainSpec::new(a.n, a.physics.j, a.h)?;
    let pair = a.channel.branch_pair(a.n)?;
    let mode = a.physics.mode;
    let (g, _) = fidelity_at(&spec, &pair, a.jt, mode)?;
    let mut table = Table::new(vec![
        "n",
        "channel",
        "h",
        "jt",
        "mode",
        "fidelity",
        "gamma1",
        "gamma2",
        "gamma3",
        "gamma4",
        "gamma5_re",
        "gamma5_im",
    ]);
    table.push(vec![
        a.n.into(),
        a.channel.to_string().into(),
        a.h.into(),
        a.jt.into(),
        mode.as_str().into(),
        average_fidelity(&g, mode).into(),
        g.gamma1.into(),
        g.gamma2.into(),
        g.gamma3.into(),
        g.gamma4.into(),
        g.gamma5.re.into(),
        g.gamma5.im.into(),
    ]);
    write(&table, Meta { command: "fidelity", args: argv, mode: Some(mode.as_str()), extra: vec![] }, &a.common)
}

pub fn sweep(a: &SweepArgs, argv: &[String]) -> Outcome {
    let template = ChainSpec::new(a.n, a.physics.j, 0.0)?;
    let pair = a.channel.branch_pair(a.n)?;
    let times = Grid1D::new(a.jt_min, a.jt_max, a.jt_step)?;
    let fields = Grid1D::new(a.h_min, a.h_max, a.h_step)?;
    let mode = a.physics.mode;
    let result = sweep_time_field(&template, &pair, &times, &fields, mode, workers(&a.common))?;
    let mut table = Table::new(vec!["jt", "h", "fidelity"]);
    for (jt, row) in result.times.iter().zip(&result.values) {
        for (h, f) in result.fields.iter().zip(row) {
            table.push(vec![(*jt).into(), (*h).into(), f.clamp(0.0, 1.0).into()]);
        }
    }
    let meta = Meta {
        command: "sweep",
        args: argv,
        mode: Some(mode.as_str()),
        extra: vec![("n", a.n.into()), ("channel", a.channel.to_string().into())],
    };
    write(&table, meta, &a.common)
}

pub fn compare(a: &CompareArgs, argv: &[String], tmax_first: bool) -> Outcome {
    let policy = match a.h_policy {
        HPolicy::Fixed(h) => FieldPolicy::Fixed(h),
        HPolicy::Optimal => FieldPolicy::Optimize(Grid1D::new(0.0, a.h_max, a.h_step)?),
    };
    let mode = a.physics.mode;
    let options = SearchOptions::default().with_workers(workers(&a.common));
    let rows = compare_channels(&a.n.0, a.physics.j, &window(&a.window)?, &policy, mode, &options)?;
    let columns = if tmax_first {
        vec!["n", "channel", "mode", "t_max", "f_max", "h_star"]
    } else {
        vec!["n", "channel", "mode", "f_max", "t_max", "h_star"]
    };
    let mut table = Table::new(columns);
    for row in rows {
        let (f, t) = (row.optimum.f_max.into(), row.optimum.t_max.into());
        let (first, second) = if tmax_first { (t, f) } else { (f, t) };
        table.push(vec![
            row.n_sites.into(),
            row.channel.to_string().into(),
            mode.as_str().into(),
            first,
            second,
            row.optimum.h_star.into(),
        ]);
    }
    let command = if tmax_first { "tmax" } else { "compare" };
    write(&table, Meta { command, args: argv, mode: Some(mode.as_str()), extra: vec![] }, &a.common)
}

pub fn ordering(a: &OrderingArgs, argv: &[String]) -> Outcome {
    let spec = ChainSpec::new(a.n, a.physics.j, a.h)?;
    let reference = a.reference.branch_pair(a.n)?;
    let mode = a.physics.mode;
    let options = SearchOptions::default().with_workers(workers(&a.common));
    let study = ordering_study(&spec, &a.patterns, &reference, mode, &window(&a.window)?, &options)?;
    let mut table = Table::new(vec!["pattern", "jt", "fidelity", "delta"]);
    for row in &study.rows {
        let pattern = Channel::Custom(row.sites.clone()).to_string();
        table.push(vec![pattern.into(), study.reference.t_max.into(), row.fidelity.into(), row.delta.into()]);
    }
    let meta = Meta {
        command: "ordering",
        args: argv,
        mode: Some(mode.as_str()),
        extra: vec![
            ("reference_f_max", study.reference.f_max.into()),
            ("max_abs_difference", study.max_abs_pairwise().into()),
        ],
    };
    write(&table, meta, &a.common)
}

pub fn oracle_check(a: &OracleCheckArgs, argv: &[String]) -> Outcome {
    if let Some(&n) = a.n.0.iter().find(|&&n| n > ORACLE_SIZE_CAP) {
        return Err(Failure::Resource(format!("oracle limited to N <= {ORACLE_SIZE_CAP}, got N={n}")));
    }
    if !(a.jt_max >= 0.0 && a.h_max >= 0.0 && a.tol.is_finite()) {
        return Err(Failure::Usage("jt-max and h-max must be non-negative, tol finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut jobs = Vec::new();
    for &n in &a.n.0 {
        let mut channels = vec![Channel::FmGround, Channel::Neel];
        for _ in 0..a.customs {
            let m = rng.random_range(1..n.max(2));
            let mut sites: Vec<usize> = sample(&mut rng, n - 1, m.min(n - 1)).into_iter().map(|i| i + 2).collect();
            sites.sort_unstable();
            channels.push(Channel::Custom(sites));
        }
        for _ in 0..a.draws {
            let jt = rng.random_range(0.0..=a.jt_max);
            let h = rng.random_range(0.0..=a.h_max);
            jobs.push((n, channels.clone(), jt, h));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers(&a.common))
        .build()
        .map_err(|e| Failure::Resource(e.to_string()))?;
    let results: Vec<Result<Vec<[f64; 3]>, Error>> = pool.install(|| {
        jobs.par_iter()
            .map(|(n, channels, jt, h)| {
                let spec = ChainSpec::new(*n, a.j, *h)?;
                let hamiltonian = SpinHamiltonian::new(&spec)?;
                let t = spec.time_from_scaled(*jt);
                channels
                    .iter()
                    .map(|c| {
                        let pair = c.branch_pair(*n)?;
                        let direct = gamma_direct(&spec, &pair, t)?;
                        let fast = gamma_fast(&spec, &pair, t)?;
                        let oracle = gamma_oracle_with(&hamiltonian, &pair, t)?;
                        Ok([direct.max_deviation(&fast), direct.max_deviation(&oracle), fast.max_deviation(&oracle)])
                    })
                    .collect()
            })
            .collect()
    });

    let mut table =
        Table::new(vec!["n", "channel", "jt", "h", "direct_vs_fast", "direct_vs_oracle", "fast_vs_oracle", "pass"]);
    let (mut failures, mut worst) = (0usize, 0.0f64);
    for ((n, channels, jt, h), result) in jobs.iter().zip(results) {
        for (channel, devs) in channels.iter().zip(result?) {
            let max = devs.iter().copied().fold(0.0, f64::max);
            worst = worst.max(max);
            let pass = max < a.tol;
            failures += usize::from(!pass);
            table.push(vec![
                (*n).into(),
                channel.to_string().into(),
                (*jt).into(),
                (*h).into(),
                devs[0].into(),
                devs[1].into(),
                devs[2].into(),
                pass.into(),
            ]);
        }
    }
    let meta = Meta {
        command: "oracle-check",
        args: argv,
        mode: None,
        extra: vec![("tolerance", a.tol.into()), ("max_deviation", worst.into()), ("failures", failures.into())],
    };
    write(&table, meta, &a.common)?;
    let summary = format!("{} comparisons, max deviation {worst:.3e}, tolerance {:e}", table.rows.len(), a.tol);
    if failures > 0 {
        Err(Failure::Verification(format!("{failures} of {summary}")))
    } else {
        eprintln!("oracle check passed: {summary}");
        Ok(())
    }
}
