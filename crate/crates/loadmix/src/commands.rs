//! The subcommands. Each is a pure function of (config, input files, seed)
//! apart from the optional timing column.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use loadmix_core::ev::{mean_profile, simulate_ev_day, EvDay, DAY_HOURS};
use loadmix_core::ggmm::{fit_order, sample as draw, selection_histogram, summarize_orders, DEFAULT_PLATEAU_THRESHOLD};
use loadmix_core::load::{combine, LoadSeries};
use loadmix_core::nhpp::{simulate_nhpp, ArrivalSchedule, IntensityFunction};
use loadmix_core::numerics::stats::{ks_critical_value, ks_statistic};
use loadmix_core::RngStream;
use rayon::prelude::*;

use crate::config::{IntensitySpec, RunConfig, TimeUnit};
use crate::error::{CliError, CliResult};
use crate::formats::{ingest_csv, num, parse_timestamp, write_csv, write_json, write_series, ModelFile};
use crate::provenance::Provenance;

/// Root stream ids, one per pipeline stage. EV days use the same root in
/// `ev-profile` and `fit --with-ev`, so day `d` of one is replication `d` of the other.
const ARRIVALS_STREAM: u64 = 0;
const EV_STREAM: u64 = 1;
const FIT_STREAM: u64 = 2;
const SAMPLE_STREAM: u64 = 3;

/// Fork tag of a replication stream that draws its daily rate schedule; forks 0
/// and 1 feed the arrivals and the mileage.
const SCHEDULE_TAG: u64 = 2;

const KS_ALPHA: f64 = 0.01;

fn out_dir(config: &RunConfig) -> CliResult<&Path> {
    let dir = config.io.out_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir)
}

pub fn simulate_arrivals(config: &RunConfig, seed: u64) -> CliResult<()> {
    let replications = config.arrivals.replications;
    if replications == 0 {
        return Err(CliError::Config("replications must be at least 1".into()));
    }
    let root = RngStream::new(seed, ARRIVALS_STREAM);
    // one intensity for all replications so the analytic mean is well defined
    let (intensity, schedule) = config.intensity.build(TimeUnit::Minutes, &mut root.fork(0))?;
    let reps = root.fork(1);
    let first = simulate_nhpp(&intensity, &reps.fork(0))?;
    let mut counts = vec![first.count() as u64];
    counts.par_extend(
        (1..replications)
            .into_par_iter()
            .map(|r| simulate_nhpp(&intensity, &reps.fork(u64::from(r))).map(|a| a.count() as u64))
            .collect::<loadmix_core::Result<Vec<_>>>()?,
    );

    let horizon = intensity.horizon();
    let analytic = intensity.mean_value(horizon)?;
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var =
        if counts.len() > 1 { counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let relative = (mean - analytic) / analytic;

    let dir = out_dir(config)?;
    let prov = Provenance::new(config, seed, None);
    write_csv(&dir.join("arrivals.csv"), &prov, &["time"], first.epochs().iter().map(|&t| vec![num(t)]))?;
    let mut path = vec![vec![num(0.0), "0".to_string()]];
    path.extend(first.epochs().iter().enumerate().map(|(i, &t)| vec![num(t), (i + 1).to_string()]));
    path.push(vec![num(horizon), first.count().to_string()]);
    write_csv(&dir.join("counting_path.csv"), &prov, &["time", "count"], path)?;
    let grid = intensity.sample_grid(config.arrivals.grid_points);
    write_csv(&dir.join("intensity.csv"), &prov, &["time", "rate"], grid.iter().map(|&(t, r)| vec![num(t), num(r)]))?;
    if let Some(s) = &schedule {
        write_schedule(&dir.join("schedule.csv"), &prov, s)?;
    }
    write_csv(
        &dir.join("summary.csv"),
        &prov,
        &["replications", "horizon", "simulated_mean", "simulated_variance", "analytic_mean", "relative_error"],
        [vec![replications.to_string(), num(horizon), num(mean), num(var), num(analytic), num(relative)]],
    )?;
    println!(
        "mean count over {replications} replications: simulated {mean:.3}, analytic {analytic:.3} (relative error {:+.3}%)",
        100.0 * relative
    );
    Ok(())
}

fn write_schedule(path: &Path, prov: &Provenance, schedule: &ArrivalSchedule) -> CliResult<()> {
    let rows = schedule.hourly_rates().iter().enumerate().map(|(i, &r)| {
        let start = i as u32 * schedule.segment_minutes();
        vec![start.to_string(), (start + schedule.segment_minutes()).to_string(), r.to_string()]
    });
    write_csv(path, prov, &["start_minute", "end_minute", "evs_per_hour"], rows)
}

/// Hour-based intensity for EV days. `None` for `table2`, which is redrawn per day.
fn ev_intensity(config: &RunConfig) -> CliResult<Option<IntensityFunction>> {
    if config.intensity == IntensitySpec::Table2 {
        return Ok(None);
    }
    let (f, _) = config.intensity.build(TimeUnit::Hours, &mut RngStream::new(0, 0))?;
    if f.horizon() > DAY_HOURS {
        return Err(CliError::Config(format!(
            "EV intensities are in hours over one day; horizon {} exceeds {DAY_HOURS}",
            f.horizon()
        )));
    }
    Ok(Some(f))
}

/// Simulates EV day `d` on stream `root.fork(d)`.
fn ev_day(
    config: &RunConfig,
    fixed: Option<&IntensityFunction>,
    root: &RngStream,
    d: u64,
    step: u32,
) -> CliResult<(EvDay, Option<ArrivalSchedule>)> {
    let battery = config.battery.spec()?;
    let mileage = config.mileage.model(&battery)?;
    let day = root.fork(d);
    let (intensity, schedule) = match fixed {
        Some(f) => (f.clone(), None),
        None => {
            let (f, s) = IntensitySpec::Table2.build(TimeUnit::Hours, &mut day.fork(SCHEDULE_TAG))?;
            (f, s)
        }
    };
    Ok((simulate_ev_day(&intensity, &battery, &mileage, step, &day)?, schedule))
}

fn check_step(step: u32) -> CliResult<()> {
    if step == 0 || 1440 % step != 0 {
        return Err(CliError::Config(format!("step of {step} min must divide a day")));
    }
    Ok(())
}

pub fn ev_profile(config: &RunConfig, seed: u64) -> CliResult<()> {
    let replications = config.ev.replications;
    if replications == 0 {
        return Err(CliError::Config("replications must be at least 1".into()));
    }
    let step = config.ev.step_minutes;
    check_step(step)?;
    let start = parse_timestamp(&config.ev.start).map_err(|e| CliError::Config(format!("ev.start: {e}")))?;
    let fixed = ev_intensity(config)?;
    let root = RngStream::new(seed, EV_STREAM);
    let days: Vec<(EvDay, Option<ArrivalSchedule>)> = (0..replications)
        .into_par_iter()
        .map(|r| ev_day(config, fixed.as_ref(), &root, u64::from(r), step))
        .collect::<CliResult<_>>()?;

    let dir = out_dir(config)?;
    let prov = Provenance::new(config, seed, None);
    let (day, schedule) = &days[0];
    let rows = day.sessions.iter().map(|s| {
        vec![
            num(s.arrival_time_h),
            num(s.daily_miles),
            num(s.soc_arrival_percent),
            num(s.energy_required_kwh),
            num(s.charge_duration_h),
            num(s.power_kw),
        ]
    });
    write_csv(
        &dir.join("sessions.csv"),
        &prov,
        &["arrival_time_h", "miles", "soc_pct", "e_req_kwh", "t_ch_h", "p_kw"],
        rows,
    )?;
    write_series(&dir.join("demand.csv"), &prov, &day.demand.series.clone().with_start(start))?;
    if let Some(s) = schedule {
        write_schedule(&dir.join("schedule.csv"), &prov, s)?;
    }
    if replications > 1 {
        let profiles: Vec<LoadSeries> = days.iter().map(|(d, _)| d.demand.series.clone()).collect();
        write_series(&dir.join("mean_demand.csv"), &prov, &mean_profile(&profiles)?.with_start(start))?;
    }

    let requested: f64 = day.sessions.iter().map(|s| s.energy_required_kwh).sum();
    let delivered = day.demand.delivered_kwh;
    let truncated = day.demand.truncated_kwh;
    println!(
        "{} sessions; energy: requested {requested:.6} kWh - truncated tail {truncated:.6} kWh = {:.6} kWh, profile {delivered:.6} kWh (residual {:.3e} kWh); peak {:.3} kW",
        day.sessions.len(),
        requested - truncated,
        delivered - (requested - truncated),
        day.demand.series.peak_kw(),
    );
    Ok(())
}

/// EV demand on the base load's grid: consecutive simulated days starting at
/// the first base timestamp, cut to the base length.
fn ev_overlay(config: &RunConfig, seed: u64, base: &LoadSeries) -> CliResult<LoadSeries> {
    let step = base.step_minutes();
    if step == 0 || 1440 % step != 0 {
        return Err(CliError::Config(format!("--with-ev needs a load step that divides a day, got {step} min")));
    }
    let fixed = ev_intensity(config)?;
    let root = RngStream::new(seed, EV_STREAM);
    let per_day = (1440 / step) as usize;
    let days = base.len().div_ceil(per_day) as u64;
    let parts: Vec<LoadSeries> = (0..days)
        .into_par_iter()
        .map(|d| ev_day(config, fixed.as_ref(), &root, d, step).map(|(day, _)| day.demand.series))
        .collect::<CliResult<_>>()?;
    Ok(LoadSeries::concat(&parts)?.with_start(base.start()).truncated(base.len()))
}

pub fn fit(config: &RunConfig, seed: u64, range_only: bool, timing: bool) -> CliResult<()> {
    config.em.validate()?;
    let load_path: PathBuf = config
        .io
        .load_csv
        .clone()
        .ok_or_else(|| CliError::Config("no load file: pass --load or set io.load_csv".into()))?;
    let (dataset, bytes) = ingest_csv(&load_path)?;
    let mut series = dataset.series;
    if config.with_ev {
        series = combine(&series, &ev_overlay(config, seed, &series)?)?;
    }
    let data = series.values_kw();

    let orders: Vec<usize> = match config.em.m {
        Some(m) if !range_only => vec![m],
        _ => (config.em.m_range[0]..=config.em.m_range[1]).collect(),
    };
    let options = config.em.options(orders[0]);
    let histogram = selection_histogram(data, &options)?;
    let bins = histogram.counts.len();
    let stream = RngStream::new(seed, FIT_STREAM);
    let fits: Vec<_> = orders
        .par_iter()
        .map(|&m| {
            let clock = Instant::now();
            let f = fit_order(data, m, &options, bins, &stream);
            (f, clock.elapsed().as_secs_f64())
        })
        .collect();
    let seconds: Vec<f64> = fits.iter().map(|(_, s)| *s).collect();
    let fits = fits.into_iter().map(|(f, _)| f).collect::<Vec<_>>();
    for f in &fits {
        if let Err(e) = &f.outcome {
            eprintln!("warning: M = {} failed: {e}", f.components);
        }
    }
    let selection = summarize_orders(fits, histogram, DEFAULT_PLATEAU_THRESHOLD)?;
    let best = selection.best_fit();

    let dir = out_dir(config)?;
    let prov = Provenance::new(config, seed, Some(&bytes));
    write_json(&dir.join("model.json"), &ModelFile::from_report(best, prov.clone()))?;
    if config.with_ev {
        write_series(&dir.join("combined_load.csv"), &prov, &series)?;
    }

    let ok = || selection.fits.iter().filter_map(|f| f.outcome.as_ref().ok().map(|r| (f.components, r)));
    let trace = ok().flat_map(|(m, r)| {
        r.log_likelihood_trace.iter().enumerate().map(move |(k, &l)| vec![m.to_string(), k.to_string(), num(l)])
    });
    write_csv(&dir.join("likelihood_trace.csv"), &prov, &["M", "iteration", "log_likelihood"], trace)?;

    let model = &best.model;
    let h = &selection.histogram;
    let width = h.bin_width();
    let density = h.edges.windows(2).zip(&h.densities).map(|(e, &d)| {
        let averaged = (model.cdf(e[1]) - model.cdf(e[0])) / width;
        vec![num(e[0]), num(e[1]), num(d), num(averaged), num(model.pdf(0.5 * (e[0] + e[1])))]
    });
    write_csv(
        &dir.join("density.csv"),
        &prov,
        &["bin_lo", "bin_hi", "empirical_density", "model_bin_density", "model_pdf_center"],
        density,
    )?;

    let mut header = vec!["M", "iterations", "converged", "restarts", "log_likelihood"];
    if timing {
        header.push("seconds");
    }
    let rows = selection.fits.iter().zip(&seconds).filter_map(|(f, &s)| {
        let r = f.outcome.as_ref().ok()?;
        let mut row = vec![
            f.components.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
            r.restarts.to_string(),
            num(r.log_likelihood()),
        ];
        if timing {
            row.push(format!("{s:.6}"));
        }
        Some(row)
    });
    write_csv(&dir.join("iterations.csv"), &prov, &header, rows)?;

    let rows = selection.fits.iter().map(|f| match &f.outcome {
        Ok(r) => vec![f.components.to_string(), num(r.mse_vs_histogram), "ok".into()],
        Err(e) => vec![f.components.to_string(), String::new(), e.to_string()],
    });
    write_csv(&dir.join("mse.csv"), &prov, &["M", "mse", "status"], rows)?;

    for (m, r) in ok() {
        println!(
            "M = {m}: log-likelihood {:.6}, {} iterations{}, MSE {:.6e}",
            r.log_likelihood(),
            r.iterations,
            if r.converged { "" } else { " (not converged)" },
            r.mse_vs_histogram
        );
    }
    println!(
        "selected M = {} ({} samples, {bins} bins, noise-level MSE {:.6e})",
        selection.best,
        data.len(),
        selection.adequate_mse
    );
    Ok(())
}

pub fn sample(config: &RunConfig, seed: u64) -> CliResult<()> {
    let path = config
        .io
        .model
        .clone()
        .ok_or_else(|| CliError::Config("no model file: pass --model or set io.model".into()))?;
    let (file, bytes) = ModelFile::read(&path)?;
    let model = file.model(&path)?;
    let n = config.sample.n;
    let values = draw(&model, n, &mut RngStream::new(seed, SAMPLE_STREAM))?;

    let dir = out_dir(config)?;
    let prov = Provenance::new(config, seed, Some(&bytes));
    write_csv(&dir.join("samples.csv"), &prov, &["kw"], values.iter().map(|&v| vec![num(v)]))?;
    if n == 0 {
        println!("wrote 0 samples");
        return Ok(());
    }
    let d = ks_statistic(&values, |y| model.cdf(y));
    let critical = ks_critical_value(n, KS_ALPHA);
    println!(
        "wrote {n} samples; KS statistic {d:.6} vs 1% critical value {critical:.6}: {}",
        if d < critical { "consistent with the model" } else { "REJECTED" }
    );
    Ok(())
}
