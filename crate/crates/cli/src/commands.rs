//! Subcommand implementations. Every file-driven command writes its
//! artifacts plus `manifest.json` into the configured output directory.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use larche_core::approx::{build, rate_fit, residuals, BuildInputs};
use larche_core::geometry::{extract_zero_contour, sdf, Shape};
use larche_core::grid::DctPlan;
use larche_core::io;
use larche_core::phasefield::{init_glued, PFConfig, PFState, Stepper};
use larche_core::potential::DoubleWell;
use larche_core::spectral::{uniformity_report, SpectralProblem};
use larche_core::{Error, Grid2D, Result};

use crate::config::{PhiSource, RatesConfig, ResidualConfig, SimulateConfig, SpectralConfig};
use crate::setup;

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn config_value<T: serde::Serialize>(cfg: &T) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config round-trips through serde_json")
}

// ---------------------------------------------------------------------------
// profile

pub fn profile(potential: DoubleWell, out: &Path) -> Result<()> {
    let p = setup::profiles(potential)?;
    let mut buf = Vec::new();
    writeln!(buf, "sigma,{}", p.sigma)?;
    writeln!(buf, "z,theta0,theta0_prime,theta1")?;
    for i in 0..p.theta0.len() {
        writeln!(
            buf,
            "{},{},{},{}",
            p.theta0.z(i),
            p.theta0.values[i],
            p.theta0.derivative[i],
            p.theta1.values[i]
        )?;
    }
    std::fs::write(out, buf)?;
    println!("wrote {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// validate-potential

/// Prints one line per structural assumption; returns whether all passed.
pub fn validate_potential(potential: DoubleWell, samples: usize) -> Result<bool> {
    let report = potential.validate(samples);
    println!("check,passed,worst_sample,worst_value");
    for c in &report.checks {
        println!("{},{},{},{}", c.name, c.passed, c.worst_sample, c.worst_value);
    }
    Ok(report.all_passed())
}

// ---------------------------------------------------------------------------
// simulate

pub fn simulate(cfg: &SimulateConfig) -> Result<()> {
    let started = Instant::now();
    let threads = setup::thread_count(cfg.thread_count)?;
    ensure_dir(&cfg.output_dir)?;
    if cfg.order > 1 {
        return Err(Error::Precondition(format!("order must be 0 or 1, got {}", cfg.order)));
    }

    let grid = Grid2D::new(cfg.grid_n, cfg.length)?;
    let map = setup::shape_map(&cfg.shape)?;
    let p = setup::profiles(DoubleWell::quartic())?;
    let c0 = init_glued(
        &grid,
        &map,
        cfg.epsilon,
        cfg.delta,
        &p.theta0,
        Some(&p.theta1),
        cfg.order >= 1,
    )?;
    let state = PFState::from_concentration(&grid, c0)?;

    let mut pf = PFConfig::cahn_hilliard(cfg.epsilon);
    if let Some(tau) = cfg.tau {
        pf.tau = tau;
    }
    pf.end_time = cfg.end_time;
    pf.elasticity = match &cfg.elasticity {
        Some(e) => Some(setup::coupling(e)?),
        None => None,
    };
    let stepper = Stepper::new(grid.clone(), &pf, &p.potential)?;
    let traj = stepper.run(state, cfg.sample_every)?;

    let mut outputs = Vec::new();
    let series = cfg.output_dir.join("series.csv");
    let mut buf = Vec::new();
    io::write_time_series(&mut buf, &traj.records)?;
    std::fs::write(&series, buf)?;
    outputs.push("series.csv".to_string());

    let last = traj.final_state();
    for (name, field) in [("c_final.raw", &last.c), ("mu_final.raw", &last.mu)] {
        io::write_field(&cfg.output_dir.join(name), &grid, field, name.trim_end_matches("_final.raw"), last.time)?;
        outputs.push(name.to_string());
    }
    match extract_zero_contour(&grid, &last.c) {
        Ok(poly) => {
            let mut buf = Vec::new();
            io::write_polyline(&mut buf, &poly)?;
            std::fs::write(cfg.output_dir.join("interface.csv"), buf)?;
            outputs.push("interface.csv".to_string());
        }
        Err(Error::NoInterface(_)) => {}
        Err(e) => return Err(e),
    }

    setup::write_manifest(&cfg.output_dir, "simulate", &config_value(cfg), threads, started, &outputs)?;
    println!("wrote {} artifacts to {}", outputs.len() + 1, cfg.output_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// residual

/// Per-ε worker: build the radial approximate solution, meter its residuals,
/// and (optionally) run the PDE to measure μ/c errors against the sharp
/// limit.
fn sweep_point(cfg: &ResidualConfig, epsilon: f64) -> Result<io::SweepRow> {
    let grid = Grid2D::new(cfg.grid_n, cfg.length)?;
    let center = cfg.center.unwrap_or((cfg.length / 2.0, cfg.length / 2.0));
    let map = sdf(Shape::Circle { center, r: cfg.radius })?;
    let p = setup::profiles(DoubleWell::quartic())?;
    let sharp = setup::sharp_radial(cfg.radius, cfg.length, p.sigma, cfg.elasticity.as_ref())?;
    let coupling = match &cfg.elasticity {
        Some(e) => Some(setup::coupling(e)?),
        None => None,
    };

    let a = build(
        &grid,
        &BuildInputs {
            map: &map,
            epsilon,
            delta: cfg.delta,
            order: cfg.order,
            theta0: &p.theta0,
            theta1: Some(&p.theta1),
            eta: &p.eta,
            mu_plus: sharp.mu_value,
            mu_minus: sharp.mu_value,
            radial_u: sharp.radial_u.as_ref(),
            potential: &p.potential,
        },
    )?;
    let plan = DctPlan::new(grid.clone());
    let report = residuals(&plan, &a, &p.potential, coupling.as_ref())?;

    let (err_mu, err_c) = if cfg.end_time > 0.0 {
        let mut pf = PFConfig::cahn_hilliard(epsilon);
        pf.end_time = cfg.end_time;
        pf.elasticity = coupling;
        let stepper = Stepper::new(grid.clone(), &pf, &p.potential)?;
        let c0 = init_glued(&grid, &map, epsilon, cfg.delta, &p.theta0, Some(&p.theta1), true)?;
        let n_steps = (cfg.end_time / pf.tau).round() as usize;
        let traj = stepper.run(PFState::from_concentration(&grid, c0)?, (n_steps / 10).max(1))?;
        let mut err_mu = 0.0_f64;
        let mut err_c = 0.0_f64;
        for frame in &traj.frames {
            for i in 0..grid.n {
                for j in 0..grid.n {
                    let (x, y) = (grid.x(i), grid.x(j));
                    let (d, _) = map.eval(x, y)?;
                    err_mu = err_mu.max((frame.mu[[i, j]] - sharp.mu_value).abs());
                    if d.abs() <= cfg.delta {
                        err_c = err_c.max((frame.c[[i, j]] - p.theta0.eval(d / epsilon)).abs());
                    }
                }
            }
        }
        (err_mu, err_c)
    } else {
        (f64::NAN, f64::NAN)
    };

    Ok(io::SweepRow {
        epsilon,
        norm_r_a: report.norms.r_l2,
        norm_s_a: report.norms.s_l2,
        norm_mass: report.norms.mass_l2,
        err_mu,
        err_c,
    })
}

pub fn residual(cfg: &ResidualConfig) -> Result<()> {
    let started = Instant::now();
    let threads = setup::thread_count(cfg.thread_count)?;
    ensure_dir(&cfg.output_dir)?;
    if cfg.epsilons.len() < 3 {
        return Err(Error::Precondition("sweep needs at least 3 epsilons".into()));
    }
    if !cfg.epsilons.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::Precondition("epsilons must be strictly decreasing".into()));
    }

    // The sweep parallelizes over ε with plain scoped threads; results keep
    // the configured order regardless of completion order.
    let mut rows: Vec<Option<Result<io::SweepRow>>> = (0..cfg.epsilons.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut pending: Vec<(usize, f64)> = cfg.epsilons.iter().copied().enumerate().collect();
        while !pending.is_empty() {
            let batch: Vec<_> = pending.drain(..pending.len().min(threads)).collect();
            let handles: Vec<_> = batch
                .into_iter()
                .map(|(idx, eps)| (idx, scope.spawn(move || sweep_point(cfg, eps))))
                .collect();
            for (idx, handle) in handles {
                rows[idx] = Some(handle.join().expect("sweep worker panicked"));
            }
        }
    });
    let rows: Vec<io::SweepRow> = rows
        .into_iter()
        .map(|r| r.expect("all workers scheduled"))
        .collect::<Result<_>>()?;

    let sweep = cfg.output_dir.join("sweep.csv");
    let mut buf = Vec::new();
    io::write_sweep(&mut buf, &rows)?;
    std::fs::write(&sweep, buf)?;

    let fits = fit_rows(&cfg.epsilons, &rows);
    let report = serde_json::json!({
        "order": fits.get("norm_rA").or_else(|| fits.get("err_mu")).map(|f| f["order"].clone()),
        "fits": fits,
    });
    std::fs::write(
        cfg.output_dir.join("rates.json"),
        serde_json::to_string_pretty(&report).expect("json"),
    )?;

    setup::write_manifest(
        &cfg.output_dir,
        "residual",
        &config_value(cfg),
        threads,
        started,
        &["sweep.csv".to_string(), "rates.json".to_string()],
    )?;
    println!("wrote sweep.csv and rates.json to {}", cfg.output_dir.display());
    Ok(())
}

fn fit_rows(epsilons: &[f64], rows: &[io::SweepRow]) -> serde_json::Map<String, serde_json::Value> {
    let columns: [(&str, fn(&io::SweepRow) -> f64); 5] = [
        ("norm_rA", |r| r.norm_r_a),
        ("norm_sA", |r| r.norm_s_a),
        ("norm_mass", |r| r.norm_mass),
        ("err_mu", |r| r.err_mu),
        ("err_c", |r| r.err_c),
    ];
    let mut fits = serde_json::Map::new();
    for (name, get) in columns {
        let errors: Vec<f64> = rows.iter().map(get).collect();
        if let Ok((order, constant)) = rate_fit(epsilons, &errors) {
            fits.insert(
                name.to_string(),
                serde_json::json!({ "order": order, "constant": constant }),
            );
        }
    }
    fits
}

// ---------------------------------------------------------------------------
// spectral

pub fn spectral(cfg: &SpectralConfig) -> Result<()> {
    let started = Instant::now();
    let threads = setup::thread_count(cfg.thread_count)?;
    ensure_dir(&cfg.output_dir)?;
    let p = setup::profiles(DoubleWell::quartic())?;

    let mut problems = Vec::with_capacity(cfg.rows.len());
    for row in &cfg.rows {
        let grid = Grid2D::new(row.grid_n, cfg.length)?;
        let phi = match &cfg.phi {
            PhiSource::Profile1d => {
                let mid = cfg.length / 2.0;
                grid.from_fn(|x, _| p.theta0.eval((x - mid) / row.epsilon))
            }
            PhiSource::Build { r, delta } => {
                let map = sdf(Shape::Circle { center: (cfg.length / 2.0, cfg.length / 2.0), r: *r })?;
                let sharp = setup::sharp_radial(*r, cfg.length, p.sigma, None)?;
                build(
                    &grid,
                    &BuildInputs {
                        map: &map,
                        epsilon: row.epsilon,
                        delta: *delta,
                        order: 1,
                        theta0: &p.theta0,
                        theta1: Some(&p.theta1),
                        eta: &p.eta,
                        mu_plus: sharp.mu_value,
                        mu_minus: sharp.mu_value,
                        radial_u: None,
                        potential: &p.potential,
                    },
                )?
                .c_a
            }
            PhiSource::Spinodal => grid.zeros(),
        };
        problems.push(SpectralProblem { grid, phi, epsilon: row.epsilon, gamma1: cfg.gamma1 });
    }

    let report = uniformity_report(&problems, &p.potential)?;
    let mut buf = Vec::new();
    io::write_spectral(&mut buf, &report.rows)?;
    std::fs::write(cfg.output_dir.join("spectral.csv"), buf)?;
    std::fs::write(
        cfg.output_dir.join("report.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "pass": report.pass,
            "rows": report.rows.iter().map(|r| serde_json::json!({
                "epsilon": r.epsilon, "lambda_min": r.lambda_min, "C": r.c,
            })).collect::<Vec<_>>(),
        }))
        .expect("json"),
    )?;

    setup::write_manifest(
        &cfg.output_dir,
        "spectral",
        &config_value(cfg),
        threads,
        started,
        &["spectral.csv".to_string(), "report.json".to_string()],
    )?;
    println!(
        "uniformity {}: wrote spectral.csv to {}",
        if report.pass { "pass" } else { "FAIL" },
        cfg.output_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// compare

pub fn compare(a: &Path, b: &Path) -> Result<()> {
    let (meta_a, field_a) = io::read_field(a)?;
    let (meta_b, field_b) = io::read_field(b)?;
    if meta_a.nx != meta_b.nx || meta_a.lx != meta_b.lx {
        return Err(Error::GridMismatch(format!(
            "{}: {}x{} on {}, {}: {}x{} on {}",
            a.display(),
            meta_a.nx,
            meta_a.ny,
            meta_a.lx,
            b.display(),
            meta_b.nx,
            meta_b.ny,
            meta_b.lx
        )));
    }
    let grid = Grid2D::new(meta_a.nx, meta_a.lx)?;
    let diff = &field_a - &field_b;
    println!("norm,value");
    println!("l2,{}", grid.norm_l2(&diff));
    println!("l3,{}", grid.norm_lp(&diff, 3.0));
    println!("max,{}", grid.norm_max(&diff));
    Ok(())
}

// ---------------------------------------------------------------------------
// rates

pub fn rates(cfg: &RatesConfig) -> Result<()> {
    let started = Instant::now();
    let threads = setup::thread_count(cfg.thread_count)?;
    ensure_dir(&cfg.output_dir)?;
    let text = std::fs::read_to_string(&cfg.sweep_csv)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Config("empty sweep CSV".into()))?
        .split(',')
        .collect();
    if header.first() != Some(&"epsilon") {
        return Err(Error::Config("sweep CSV must start with an `epsilon` column".into()));
    }
    let mut table: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(Error::Config(format!("ragged sweep CSV row: {line:?}")));
        }
        for (col, cell) in cells.iter().enumerate() {
            table[col].push(
                cell.parse::<f64>()
                    .map_err(|_| Error::Config(format!("non-numeric cell {cell:?}")))?,
            );
        }
    }
    let epsilons = &table[0];
    let wanted: Vec<String> = if cfg.columns.is_empty() {
        header[1..].iter().map(|s| s.to_string()).collect()
    } else {
        cfg.columns.clone()
    };

    let mut fits = serde_json::Map::new();
    for name in &wanted {
        let col = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("no column {name:?} in sweep CSV")))?;
        if let Ok((order, constant)) = rate_fit(epsilons, &table[col]) {
            fits.insert(
                name.clone(),
                serde_json::json!({ "order": order, "constant": constant }),
            );
        }
    }
    let first_order = wanted
        .first()
        .and_then(|n| fits.get(n))
        .map(|f| f["order"].clone())
        .unwrap_or(serde_json::Value::Null);
    let report = serde_json::json!({ "order": first_order, "fits": fits });
    let pretty = serde_json::to_string_pretty(&report).expect("json");
    std::fs::write(cfg.output_dir.join("rates.json"), &pretty)?;
    println!("{pretty}");

    setup::write_manifest(
        &cfg.output_dir,
        "rates",
        &config_value(cfg),
        threads,
        started,
        &["rates.json".to_string()],
    )?;
    Ok(())
}
