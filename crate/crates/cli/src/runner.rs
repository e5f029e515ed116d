//! Subcommand implementations: compute through the library, emit CSV
//! tables, and render figures from those tables.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use workmoments::mcwf;
use workmoments::moments::{self, moments_full_detailed, moments_rwa_detailed, MomentsReport};
use workmoments::tpm::{
    generating_function_commuting, moments_by_finite_difference, moments_from_distribution,
    third_moment_gap_prediction, tpm_distribution, ExactGeneratingFunction,
};

use crate::config::{ConfigError, RunConfig};
use crate::svg::{self, Series};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(workmoments::Error),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Numerical(_) => 2,
            RunError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e}"),
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<workmoments::Error> for RunError {
    fn from(e: workmoments::Error) -> Self {
        RunError::Numerical(e)
    }
}

type RunResult = Result<(), RunError>;

fn io_err<T>(context: &str, e: impl std::fmt::Display) -> Result<T, RunError> {
    Err(RunError::Io(format!("{context}: {e}")))
}

fn write_file(path: &Path, contents: &str) -> RunResult {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            if let Err(e) = fs::create_dir_all(parent) {
                return io_err(&format!("creating {}", parent.display()), e);
            }
        }
    }
    let mut file = match fs::File::create(path) {
        Ok(f) => f,
        Err(e) => return io_err(&format!("creating {}", path.display()), e),
    };
    if let Err(e) = file.write_all(contents.as_bytes()) {
        return io_err(&format!("writing {}", path.display()), e);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

/// Moments table row in the documented column order.
fn moments_row(r: &MomentsReport) -> String {
    let stderr = match r.stderr {
        Some([a, b, c]) => format!("{},{},{}", num(a), num(b), num(c)),
        None => ",,".to_string(),
    };
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.method.as_str(),
        num(r.w1),
        num(r.w2),
        num(r.w3_0),
        num(r.corr_c3_system),
        num(r.corr_cross),
        num(r.corr_sb),
        num(r.w3),
        stderr
    )
}

const MOMENTS_HEADER: &str =
    "method,W1,W2,W3_0,corr_C3_sys,corr_cross,corr_SB,W3,stderr1,stderr2,stderr3";

fn mcwf_report(stats: &mcwf::WorkStatistics) -> MomentsReport {
    let m3 = stats.moment(3);
    MomentsReport {
        method: moments::Method::Mcwf,
        w1: stats.moment(1),
        w2: stats.moment(2),
        w3_0: m3,
        corr_c3_system: 0.0,
        corr_cross: 0.0,
        corr_sb: 0.0,
        w3: m3,
        stderr: Some([
            stats.standard_error(1),
            stats.standard_error(2),
            stats.standard_error(3),
        ]),
    }
}

pub fn moments(cfg: &RunConfig, out: &Path) -> RunResult {
    let p = cfg.system_params()?;
    let (full, full_co) = moments_full_detailed(&p)?;

    let rwa = if (p.drive_omega - p.omega0).abs() <= 1e-12 * p.omega0 {
        Some(moments_rwa_detailed(&p)?)
    } else {
        println!("drive is off resonance; skipping the rotating-frame track");
        None
    };

    let mut table = format!("{MOMENTS_HEADER}\n{}\n", moments_row(&full));
    if let Some((r, _)) = &rwa {
        table.push_str(&moments_row(r));
        table.push('\n');
    }
    write_file(&out.join("moments.csv"), &table)?;

    // Running moments, downsampled to at most ~2000 rows.
    let stride = (p.steps / 2000).max(1);
    let mut ts = String::from("omega0_t,W1_full,W2_full,W3_0_full,W1_rwa,W2_rwa,W3_0_rwa\n");
    for k in (0..=p.steps).step_by(stride) {
        let rwa_cols = match &rwa {
            Some((_, co)) => format!(
                "{},{},{}",
                num(co.running_w1[k]),
                num(co.running_w2[k]),
                num(co.running_w3_0[k])
            ),
            None => ",,".to_string(),
        };
        ts.push_str(&format!(
            "{},{},{},{},{}\n",
            num(full_co.times[k]),
            num(full_co.running_w1[k]),
            num(full_co.running_w2[k]),
            num(full_co.running_w3_0[k]),
            rwa_cols
        ));
    }
    write_file(&out.join("timeseries.csv"), &ts)
}

pub fn qjump(cfg: &RunConfig, out: &Path) -> RunResult {
    let p = cfg.system_params()?;
    let stats = if cfg.dump_records {
        let records = mcwf::run_ensemble_records(&p, cfg.n_traj, cfg.master_seed)?;
        let mut dump =
            String::from("initial_level,final_level,n_emission,n_absorption,work_over_hw0\n");
        for r in &records {
            let level = |l: mcwf::Level| match l {
                mcwf::Level::Ground => "g",
                mcwf::Level::Excited => "e",
            };
            dump.push_str(&format!(
                "{},{},{},{},{}\n",
                level(r.initial_level),
                level(r.final_level),
                r.emissions(),
                r.absorptions(),
                r.work_quanta
            ));
        }
        write_file(&out.join("qjump_records.csv"), &dump)?;
        mcwf::statistics_from_records(&records)
    } else {
        mcwf::run_ensemble(&p, cfg.n_traj, cfg.master_seed)?
    };

    let table = format!("{MOMENTS_HEADER}\n{}\n", moments_row(&mcwf_report(&stats)));
    write_file(&out.join("moments.csv"), &table)?;

    let mut hist = String::from("work_over_hw0,probability,count\n");
    for (k, &c) in &stats.histogram {
        hist.push_str(&format!(
            "{k},{},{c}\n",
            num(c as f64 / stats.n_traj as f64)
        ));
    }
    write_file(&out.join("qjump_histogram.csv"), &hist)
}

pub fn oracle(cfg: &RunConfig, out: &Path) -> RunResult {
    let model = cfg.total_model()?;
    let steps = cfg.oracle_steps;

    let d = tpm_distribution(&model, steps)?;
    let mut dist = String::from("E0_hw0,Etau_hw0,probability\n");
    for &(e0, etau, prob) in &d.entries {
        dist.push_str(&format!("{e0:.11e},{etau:.11e},{prob:.11e}\n"));
    }
    write_file(&out.join("oracle_distribution.csv"), &dist)?;

    let g = ExactGeneratingFunction::new(&model, steps)?;
    let g0 = |u: f64| generating_function_commuting(&model, steps, u);
    let mut table = String::from("order,from_distribution,from_G,from_G0\n");
    let mut m3_pair = (f64::NAN, f64::NAN);
    for order in 1..=3u32 {
        let h = if order == 3 { 0.05 } else { 0.02 };
        let mg = moments_by_finite_difference(|u| g.eval(u), order, h)?;
        let mg0 = moments_by_finite_difference(&g0, order, h)?;
        if order == 3 {
            m3_pair = (mg.value, mg0.value);
        }
        table.push_str(&format!(
            "{order},{},{},{}\n",
            num(moments_from_distribution(&d, order)),
            num(mg.value),
            num(mg0.value)
        ));
    }
    write_file(&out.join("oracle_moments.csv"), &table)?;

    let predicted = third_moment_gap_prediction(&model, steps)?;
    let gap = m3_pair.0 - m3_pair.1;
    let summary = format!("m3_gap,predicted_gap\n{},{}\n", num(gap), num(predicted));
    write_file(&out.join("oracle_gap.csv"), &summary)?;
    println!(
        "third-moment gap {:.6e} vs commutator-integral prediction {:.6e}",
        gap, predicted
    );
    Ok(())
}

pub fn fdt_scan(cfg: &RunConfig, out: &Path) -> RunResult {
    let base = cfg.system_params()?;
    let lambdas = cfg.fdt_lambdas();
    let gammas = cfg.fdt_gammas();
    let grid = moments::fdt_scan(&base, &lambdas, &gammas);

    let mut table = String::from("lambda0,gamma_down,ratio,taylor\n");
    for pt in &grid {
        let ratio = pt.ratio.map(num).unwrap_or_default();
        table.push_str(&format!(
            "{},{},{},{}\n",
            num(pt.lambda0),
            num(pt.gamma_down),
            ratio,
            num(pt.taylor)
        ));
    }
    write_file(&out.join("fdt.csv"), &table)
}

pub fn compare(cfg: &RunConfig, out: &Path) -> RunResult {
    let p = cfg.system_params()?;
    let (me, _) = moments_full_detailed(&p)?;
    let stats = mcwf::run_ensemble(&p, cfg.n_traj, cfg.master_seed)?;
    let mc = mcwf_report(&stats);

    let discrepancy = [
        (mc.w1 - me.w1).abs(),
        (mc.w2 - me.w2).abs(),
        (mc.w3 - me.w3).abs(),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    let pass = discrepancy <= cfg.tolerance;

    let table = format!(
        "{MOMENTS_HEADER}\n{}\n{}\n",
        moments_row(&me),
        moments_row(&mc)
    );
    write_file(&out.join("compare.csv"), &table)?;

    let verdict = format!(
        "{} max normalized moment discrepancy {} (tolerance {}, {} trajectories, seed {})\n",
        if pass { "PASS" } else { "FAIL" },
        num(discrepancy),
        num(cfg.tolerance),
        cfg.n_traj,
        cfg.master_seed
    );
    write_file(&out.join("compare.txt"), &verdict)?;
    print!("{verdict}");
    Ok(())
}

/// Parse one of this tool's own CSV files: header plus float-or-empty cells.
fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<Option<f64>>>), RunError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return io_err(&format!("reading {}", path.display()), e),
    };
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        rows.push(
            line.split(',')
                .map(|cell| cell.trim().parse::<f64>().ok())
                .collect(),
        );
    }
    Ok((header, rows))
}

pub fn figures(_cfg: &RunConfig, out: &Path) -> RunResult {
    let mut rendered = 0;

    let timeseries = out.join("timeseries.csv");
    if timeseries.exists() {
        let (_, rows) = read_csv(&timeseries)?;
        let take = |col: usize| -> Vec<(f64, f64)> {
            rows.iter()
                .filter_map(|r| match (r.first().copied().flatten(), r.get(col)) {
                    (Some(t), Some(Some(v))) => Some((t, *v)),
                    _ => None,
                })
                .collect()
        };
        let mut series = vec![Series {
            name: "numeric".into(),
            points: take(2),
        }];
        let rwa = take(5);
        if !rwa.is_empty() {
            series.push(Series {
                name: "analytic (RWA)".into(),
                points: rwa,
            });
        }
        let chart = svg::line_chart(
            "Second moment of work vs time",
            "omega0 t",
            "<W^2> / (hw0)^2",
            &series,
        );
        write_file(&out.join("fig1.svg"), &chart)?;
        rendered += 1;
    }

    // Moment comparison across methods, from whichever tables exist.
    let mut method_series: Vec<Series> = Vec::new();
    for file in ["compare.csv", "moments.csv"] {
        let path = out.join(file);
        if !path.exists() {
            continue;
        }
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => return io_err(&format!("reading {}", path.display()), e),
        };
        for line in text.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() < 8 {
                continue;
            }
            let name = cells[0].to_string();
            if method_series.iter().any(|s| s.name == name) {
                continue;
            }
            let w1: f64 = cells[1].parse().unwrap_or(f64::NAN);
            let w2: f64 = cells[2].parse().unwrap_or(f64::NAN);
            let w3: f64 = cells[7].parse().unwrap_or(f64::NAN);
            method_series.push(Series {
                name,
                points: vec![(1.0, w1), (2.0, w2), (3.0, w3)],
            });
        }
    }
    if !method_series.is_empty() {
        let chart = svg::line_chart(
            "Work moments by method",
            "moment order n",
            "<W^n> / (hw0)^n",
            &method_series,
        );
        write_file(&out.join("fig2.svg"), &chart)?;
        rendered += 1;
    }

    let fdt = out.join("fdt.csv");
    if fdt.exists() {
        let (_, rows) = read_csv(&fdt)?;
        let mut lambdas: Vec<f64> = Vec::new();
        let mut gammas: Vec<f64> = Vec::new();
        for r in &rows {
            if let (Some(Some(l)), Some(Some(g))) = (r.first(), r.get(1)) {
                if !lambdas.iter().any(|x| (x - l).abs() < 1e-15) {
                    lambdas.push(*l);
                }
                if !gammas.iter().any(|x| (x - g).abs() < 1e-15) {
                    gammas.push(*g);
                }
            }
        }
        let mut values = vec![vec![None; lambdas.len()]; gammas.len()];
        for r in &rows {
            if let (Some(Some(l)), Some(Some(g)), Some(ratio)) = (r.first(), r.get(1), r.get(2)) {
                let i = lambdas.iter().position(|x| (x - l).abs() < 1e-15).unwrap();
                let j = gammas.iter().position(|x| (x - g).abs() < 1e-15).unwrap();
                values[j][i] = *ratio;
            }
        }
        let chart = svg::heat_grid(
            "Fluctuation-dissipation ratio <W^2>/<W>",
            "lambda0 / hw0",
            "gamma_down / omega0",
            &lambdas,
            &gammas,
            &values,
        );
        write_file(&out.join("fig3.svg"), &chart)?;
        rendered += 1;
    }

    if rendered == 0 {
        return io_err(
            "figures",
            format!(
                "no input tables found in {}; run `moments`, `compare` or `fdt-scan` first",
                out.display()
            ),
        );
    }
    Ok(())
}

pub fn dispatch(name: &str, cfg: &RunConfig, out: &Path) -> RunResult {
    match name {
        "moments" => moments(cfg, out),
        "qjump" => qjump(cfg, out),
        "oracle" => oracle(cfg, out),
        "fdt-scan" => fdt_scan(cfg, out),
        "compare" => compare(cfg, out),
        "figures" => figures(cfg, out),
        other => io_err("dispatch", format!("unknown subcommand {other}")),
    }
}
