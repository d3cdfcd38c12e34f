use std::time::Instant;

use serde_json::json;
use triwalk_core::analysis::{compare_distribution, MAX_REPORT_MOMENT};
use triwalk_core::limit::LimitLaw;
use triwalk_core::walk::{
    distribution, empirical_moment, evolve, step, InitialSpin, WalkState,
};
use triwalk_core::Error;

use crate::args::{CompareArgs, DensityArgs, Format, SimulateArgs, SweepArgs, ThreeCoinArgs};
use crate::config::{parse_floats, parse_spin, parse_sweep, spin_json, CoinSetup};
use crate::output::{emit, Cell, Table};
use crate::CliError;

/// Environment variable capping the number of sweep threads.
pub const THREADS_ENV: &str = "TRIWALK_THREADS";

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let spin = parse_spin(&args.spin)?;
    let setup = match &args.three_coin {
        Some(text) => CoinSetup::three_coin(text)?,
        None => CoinSetup::from_coin_args(&args.coin)?,
    };
    if let Some(sweep) = &args.theta_sweep {
        if args.every.is_some() {
            return Err(CliError::Config("--every cannot be combined with --theta-sweep".into()));
        }
        if matches!(setup, CoinSetup::ThreeCoin(_)) {
            return Err(CliError::Config("--theta-sweep needs --theta or --general".into()));
        }
        return run_sweep(&setup, parse_sweep(sweep)?, spin, args.steps, args.out.format, args.out.output.as_deref());
    }
    run_walk(&setup, spin, args.steps, args.every, args.out.format, args.out.output.as_deref())
}

pub fn three_coin(args: ThreeCoinArgs) -> Result<(), CliError> {
    let spin = parse_spin(&args.spin)?;
    let setup = CoinSetup::three_coin(&args.three_coin)?;
    run_walk(&setup, spin, args.steps, args.every, args.out.format, args.out.output.as_deref())
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let spin = parse_spin(&args.spin)?;
    let thetas = parse_sweep(&args.theta_sweep)?;
    let setup = match &args.phases {
        Some(text) => {
            let [gamma, delta, xi] = parse_floats::<3>(text, ',', "--phases")?;
            CoinSetup::General { gamma, delta, xi, theta: thetas[0] }
        }
        None => CoinSetup::Rotation { theta: thetas[0] },
    };
    run_sweep(&setup, thetas, spin, args.steps, args.out.format, args.out.output.as_deref())
}

fn run_walk(
    setup: &CoinSetup,
    spin: InitialSpin,
    steps: usize,
    every: Option<usize>,
    format: Format,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let protocol = setup.protocol()?;
    let mut config = json!({
        "command": "simulate",
        "protocol": setup.to_json(),
        "spin": spin_json(&spin),
        "steps": steps,
    });
    let table = match every {
        None => {
            let mut table = Table::new(&["x", "p"]);
            for &(x, p) in distribution(&evolve(&spin, &protocol, steps)).entries() {
                table.push(vec![Cell::Int(x), Cell::Float(p)]);
            }
            table
        }
        Some(0) => return Err(CliError::Config("--every must be at least 1".into())),
        Some(n) => {
            config["every"] = json!(n);
            let mut table = Table::new(&["t", "x", "p"]);
            let mut state = WalkState::at_origin(&spin, 0);
            for t in 0..=steps {
                if t % n == 0 || t == steps {
                    for &(x, p) in distribution(&state).entries() {
                        table.push(vec![Cell::Int(t as i64), Cell::Int(x), Cell::Float(p)]);
                    }
                }
                if t < steps {
                    state = step(&state, protocol.coin_at(t));
                }
            }
            table
        }
    };
    emit(output, format, &config, &table, None)?;
    Ok(())
}

fn run_sweep(
    setup: &CoinSetup,
    thetas: Vec<f64>,
    spin: InitialSpin,
    steps: usize,
    format: Format,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let setups: Vec<CoinSetup> = thetas.iter().map(|&t| setup.with_theta(t)).collect();
    // Validate every angle before spending time on the walks.
    let protocols = setups.iter().map(|s| s.protocol()).collect::<Result<Vec<_>, _>>()?;
    let dists = parallel_map(&protocols, |p| distribution(&evolve(&spin, p, steps)));
    let mut protocol_json = setup.to_json();
    protocol_json.as_object_mut().unwrap().remove("theta");
    let config = json!({
        "command": "sweep",
        "protocol": protocol_json,
        "theta_sweep": thetas,
        "spin": spin_json(&spin),
        "steps": steps,
    });
    let mut table = Table::new(&["theta", "x", "p"]);
    for (theta, dist) in thetas.iter().zip(&dists) {
        for &(x, p) in dist.entries() {
            table.push(vec![Cell::Float(*theta), Cell::Int(x), Cell::Float(p)]);
        }
    }
    emit(output, format, &config, &table, None)?;
    Ok(())
}

fn thread_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => cap.min(available),
        _ => available,
    }
}

/// Order-preserving map over contiguous chunks on scoped threads.
fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = thread_count().min(items.len()).max(1);
    if threads == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| scope.spawn(move || c.iter().map(f).collect::<Vec<R>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    })
}

pub fn density(args: DensityArgs) -> Result<(), CliError> {
    if args.grid < 2 {
        return Err(CliError::Config("--grid must be at least 2".into()));
    }
    let spin = parse_spin(&args.spin)?;
    let setup = CoinSetup::from_coin_args(&args.coin)?;
    let model = setup.limit_model(spin)?;
    let support = model.support_intervals();
    let n = args.grid;
    let config = json!({
        "command": "density",
        "protocol": setup.to_json(),
        "spin": spin_json(&spin),
        "grid": n,
    });
    let mut table = Table::new(&["x", "f"]);
    table.meta.push(("support", json!(support.endpoints())));
    for i in 0..n {
        // Midpoints of n equal cells on (-1, 1), exactly antisymmetric in i.
        let x = ((2 * i + 1) as f64 - n as f64) / n as f64;
        let f = if support.contains(x) {
            match model.limit_density(x) {
                Ok(v) => v,
                Err(Error::EndpointSingularity { .. }) => continue,
                Err(e) => return Err(e.into()),
            }
        } else {
            0.0
        };
        table.push(vec![Cell::Float(x), Cell::Float(f)]);
    }
    emit(args.out.output.as_deref(), args.out.format, &config, &table, None)?;
    Ok(())
}

pub fn compare(args: CompareArgs) -> Result<(), CliError> {
    if args.steps < 3 {
        return Err(CliError::Config("compare needs --steps of at least 3".into()));
    }
    let spin = parse_spin(&args.spin)?;
    let setup = CoinSetup::from_coin_args(&args.coin)?;
    let model = setup.limit_model(spin)?;
    let protocol = setup.protocol()?;
    let t = args.steps;

    let started = Instant::now();
    let law = LimitLaw::new(model);
    let limits = (0..=MAX_REPORT_MOMENT)
        .map(|r| model.kspace_moment(r))
        .collect::<Result<Vec<f64>, _>>()?;
    let limit_secs = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let dist = distribution(&evolve(&spin, &protocol, t));
    let walk_secs = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let report = compare_distribution(&law, &dist, &limits)?;
    let analysis_secs = started.elapsed().as_secs_f64();

    let mut table = Table::new(&["r", "empirical", "limit"]);
    for (r, limit) in limits.iter().enumerate() {
        let emp = empirical_moment(&dist, r as u32, t as f64)?;
        table.push(vec![Cell::Int(r as i64), Cell::Float(emp), Cell::Float(*limit)]);
    }
    let config = json!({
        "command": "compare",
        "protocol": setup.to_json(),
        "spin": spin_json(&spin),
        "steps": t,
    });
    let report = json!({
        "t": report.t,
        "ks_distance": report.ks_distance,
        "moment_errors": report
            .moment_errors
            .iter()
            .map(|(r, e)| json!({ "r": r, "error": e }))
            .collect::<Vec<_>>(),
        "gap_mass": report.gap_mass.map_or(json!("no-gap"), |m| json!(m)),
        "mirror_asymmetry": report.mirror_asymmetry,
        "support": model.support_intervals().endpoints(),
        "timings_seconds": {
            "limit_law": limit_secs,
            "walk": walk_secs,
            "analysis": analysis_secs,
        },
    });
    emit(args.output.as_deref(), Format::Json, &config, &table, Some(&report))?;
    Ok(())
}
