//! Command implementations behind the `fsoirs` binary.
//!
//! Every command is a pure function of the scenario text and the flags: it
//! returns a table (written as CSV with a `#` provenance header) and a JSON
//! summary. Floats are printed in shortest round-trip form, and all parallel
//! work reduces in a fixed order, so outputs are byte-identical for any
//! worker count.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::channel::{self, SnrConvention};
use crate::error::{Error, Result};
use crate::irs2d::{self, EquivalentMirror2D, GmlApproxParams2D};
use crate::montecarlo::{self, Histogram, L1_BINS};
use crate::scenario::{self, Scenario, Sweep};
use crate::wave_oracle::Oracle;

#[derive(Debug, Parser)]
#[command(name = "fsoirs", version, about = "Channel models for IRS-assisted FSO links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Gml,
    Pdf,
    Outage,
    Oracle,
    Mc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditional GML vs. normalized misalignment (exact and approximate).
    Gml(RunArgs),
    /// Analytic GML density next to a Monte Carlo histogram.
    Pdf(RunArgs),
    /// Outage probability over an SNR grid (dB) or an IRS placement sweep.
    Outage(RunArgs),
    /// Huygens–Fresnel cross-check of the planar GML.
    Oracle(RunArgs),
    /// Empirical GML histogram on the fixed comparison grid.
    Mc(RunArgs),
}

impl Command {
    pub fn split(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Gml(a) => ("gml", a),
            Command::Pdf(a) => ("pdf", a),
            Command::Outage(a) => ("outage", a),
            Command::Oracle(a) => ("oracle", a),
            Command::Mc(a) => ("mc", a),
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory for `<command>.csv` and `<command>.json`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Override the scenario's RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the oracle's phase quantization bits.
    #[arg(long)]
    pub bits: Option<u8>,
    /// Sweep grid `start:stop:count` (inclusive).
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    /// Override the scenario's Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Interpretation of the SNR axis.
    #[arg(long, value_enum)]
    pub snr_convention: Option<ConventionArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Transmit,
    AverageReceived,
}

impl From<ConventionArg> for SnrConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Transmit => SnrConvention::Transmit,
            ConventionArg::AverageReceived => SnrConvention::AverageReceived,
        }
    }
}

/// Inclusive uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }
}

pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("grid '{s}' is not of the form start:stop:count"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad grid bound '{x}': {e}"));
    let (start, stop) = (num(a)?, num(b)?);
    let count: usize = n.trim().parse().map_err(|e| format!("bad grid count '{n}': {e}"))?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(format!("grid '{s}' needs finite bounds and a positive count"));
    }
    Ok(Grid { start, stop, count })
}

/// A command's tabular output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub table: Table,
    pub summary: Value,
}

/// Resolved inputs of one run.
pub struct Run<'a> {
    pub scenario: Scenario,
    pub hash: &'a str,
    pub args: &'a RunArgs,
}

impl Run<'_> {
    fn seeded(&self) -> montecarlo::RngSpec {
        let mut r = self.scenario.rng;
        if let Some(s) = self.args.seed {
            r.seed = s;
        }
        r
    }

    fn samples(&self) -> u64 {
        self.args.samples.unwrap_or(self.scenario.samples)
    }

    fn grid(&self, default: Grid) -> Vec<f64> {
        self.args.grid.unwrap_or(default).points()
    }
}

pub fn cmd_gml(run: &Run) -> Result<Output> {
    let sc = &run.scenario;
    let geom = sc.geometry_2d()?;
    let w0 = sc.w0()?;
    let mirror = EquivalentMirror2D::new(&geom, w0, sc.wavelength, sc.branch)?;
    let params = GmlApproxParams2D::from_mirror(&geom, &mirror);
    let two_al = 2.0 * geom.a_l;
    let rows = run
        .grid(Grid::new(0.0, 6.0, 121))
        .into_iter()
        .map(|un| {
            let u = un * two_al;
            let exact = irs2d::conditional_gml_2d(&geom.with_lens_offset(u), &mirror).h_g;
            vec![un, exact, irs2d::conditional_gml_2d_approx(u, &params)]
        })
        .collect();
    let (lo, hi) = irs2d::truncation_onset(&geom, &mirror);
    Ok(Output {
        table: Table {
            columns: vec!["u_n", "h_g_exact", "h_g_approx"],
            rows,
        },
        summary: json!({
            "w0": w0,
            "w0_hat": mirror.w0_hat,
            "w_e2e": mirror.w_e2e,
            "a0": params.a0,
            "knee_u_n": [lo / two_al, hi / two_al],
        }),
    })
}

pub fn cmd_pdf(run: &Run) -> Result<Output> {
    let model = run.scenario.gml_model()?;
    let law = model.law;
    let a0 = law.a0();
    let n = run.samples();
    let mut summary = json!({ "a0": a0, "law": law, "mean_analytic": law.moment(1.0) });
    let (columns, rows) = if n == 0 {
        let grid = Histogram::from_counts(0.0, a0, &[0; L1_BINS], 1);
        let dens = analytic_bin_density(&law, &grid.edges)?;
        let rows = grid.edges.windows(2).zip(dens).map(|(e, d)| vec![e[0], e[1], d]).collect();
        (vec!["h_lo", "h_hi", "pdf_analytic"], rows)
    } else {
        let samples = montecarlo::sample_gml(&model.sampler, &run.scenario.sway, n, run.seeded());
        let fixed = Histogram::uniform(&samples, 0.0, a0, L1_BINS);
        let hist = Histogram::freedman_diaconis(&samples);
        let dens = analytic_bin_density(&law, &hist.edges)?;
        let mean = samples.iter().sum::<f64>() / n as f64;
        summary["n"] = json!(n);
        summary["mean_mc"] = json!(mean);
        summary["l1_fixed_grid"] = json!(montecarlo::l1_distance(&fixed, &law)?);
        let rows = hist
            .edges
            .windows(2)
            .zip(hist.densities())
            .zip(dens)
            .map(|((e, m), d)| vec![e[0], e[1], m, d])
            .collect();
        (vec!["h_lo", "h_hi", "pdf_mc", "pdf_analytic"], rows)
    };
    Ok(Output {
        table: Table { columns, rows },
        summary,
    })
}

/// Bin-averaged law density on `edges`.
fn analytic_bin_density(law: &crate::pointing::GmlLaw, edges: &[f64]) -> Result<Vec<f64>> {
    let m = montecarlo::law_masses(law, edges)?;
    Ok(m.iter().zip(edges.windows(2)).map(|(p, e)| p / (e[1] - e[0])).collect())
}

pub fn cmd_outage(run: &Run) -> Result<Output> {
    let sc = &run.scenario;
    let convention = run.args.snr_convention.map(SnrConvention::from);
    let budget = scenario::with_convention(sc.budget()?, convention);
    if let Some(Sweep::Ellipse { semi_major, semi_minor }) = sc.sweep {
        return outage_sweep(run, budget, semi_major, semi_minor);
    }
    let model = sc.gml_model()?;
    let (d_sr, d_rl) = match sc.link {
        scenario::Link::Planar { d_sr, d_rl, .. } => (d_sr, d_rl),
        scenario::Link::Spatial(g) => (g.d_sr, g.d_rl),
    };
    let turb = sc.turbulence_at(d_sr + d_rl)?;
    let h_p = budget.h_p(d_sr, d_rl);
    let snr_db = run.grid(Grid::new(0.0, 40.0, 41));
    let budgets: Vec<_> = snr_db
        .iter()
        .map(|db| channel::LinkBudget {
            snr: 10f64.powf(db / 10.0),
            ..budget
        })
        .collect();
    let analytic: Vec<f64> = budgets
        .iter()
        .map(|b| channel::outage(b, h_p, &model.law, &turb))
        .collect::<Result<_>>()?;
    let n = run.samples();
    let mut summary = json!({ "a0": model.law.a0(), "h_p": h_p, "turbulence": turb, "convention": budget.convention });
    let (columns, rows) = if n == 0 {
        let rows = snr_db.iter().zip(&analytic).map(|(&g, &p)| vec![g, p]).collect();
        (vec!["snr_db", "p_out"], rows)
    } else {
        let thresholds: Vec<f64> = budgets.iter().map(|b| b.gain_threshold(h_p, &model.law, &turb)).collect();
        let mc = montecarlo::empirical_outage(
            &model.sampler,
            &sc.sway,
            &turb,
            budget.eta * h_p,
            &thresholds,
            n,
            run.seeded(),
        )?;
        summary["n"] = json!(n);
        let rows = snr_db
            .iter()
            .zip(&analytic)
            .zip(&mc)
            .map(|((&g, &p), m)| vec![g, p, m.p, m.se])
            .collect();
        (vec!["snr_db", "p_out", "p_out_mc", "p_out_mc_se"], rows)
    };
    Ok(Output {
        table: Table { columns, rows },
        summary,
    })
}

fn outage_sweep(run: &Run, budget: channel::LinkBudget, semi_major: f64, semi_minor: f64) -> Result<Output> {
    let sc = &run.scenario;
    let g = sc.geometry_3d()?;
    let w0 = sc.w0()?;
    let edge = 0.8 * semi_major;
    let mut rows = Vec::new();
    for x_r in run.grid(Grid::new(-edge, edge, 161)) {
        let p = scenario::ellipse_placement(semi_major, semi_minor, x_r)?;
        let geom = scenario::placement_geometry(&p, g.a_l, g.irs_half);
        let model = scenario::spatial_model(geom, w0, sc.wavelength, sc.branch, &sc.sway)?;
        let turb = sc.turbulence_at(p.d_sr + p.d_rl)?;
        let h_p = budget.h_p(p.d_sr, p.d_rl);
        let p_out = channel::outage(&budget, h_p, &model.law, &turb)?;
        rows.push(vec![x_r, p.theta_i, p.theta_r, model.law.a0(), p_out]);
    }
    let best = rows
        .iter()
        .min_by(|a, b| a[4].total_cmp(&b[4]))
        .ok_or_else(|| Error::Scenario("empty placement grid".into()))?;
    let summary = json!({ "w0": w0, "x_r_min": best[0], "p_out_min": best[4], "convention": budget.convention });
    Ok(Output {
        table: Table {
            columns: vec!["x_r", "theta_i", "theta_r", "a0", "p_out"],
            rows,
        },
        summary,
    })
}

pub fn cmd_oracle(run: &Run) -> Result<Output> {
    let mut setup = run.scenario.oracle_setup()?;
    if let Some(b) = run.args.bits {
        setup.bits = b;
    }
    let oracle = Oracle::new(setup)?;
    let f = oracle.compare_models();
    let s = run.grid(Grid::new(-0.3, 0.3, 601));
    let rows = oracle
        .density_profile(&s)
        .into_iter()
        .map(|r| vec![r.y_m, r.geometric, r.huygens, r.discrete, r.quantized])
        .collect();
    Ok(Output {
        table: Table {
            columns: vec!["y_m", "geometric", "huygens", "discrete", "quantized"],
            rows,
        },
        summary: json!({
            "fractions": f,
            "bits": setup.bits,
            "w0_hat": oracle.mirror().w0_hat,
            "surface_samples": oracle.surface_samples(),
            "lens_samples": setup.lens_samples,
        }),
    })
}

pub fn cmd_mc(run: &Run) -> Result<Output> {
    let model = run.scenario.gml_model()?;
    let n = run.samples();
    if n == 0 {
        return Err(Error::Scenario("mc needs a positive sample count (scenario samples or --samples)".into()));
    }
    let r = montecarlo::empirical_gml(&model.sampler, &run.scenario.sway, n, run.seeded())?;
    let rows = r
        .histogram
        .edges
        .windows(2)
        .zip(&r.histogram.masses)
        .map(|(e, &m)| vec![e[0], e[1], m])
        .collect();
    Ok(Output {
        table: Table {
            columns: vec!["h_lo", "h_hi", "mass"],
            rows,
        },
        summary: json!({
            "n": r.n,
            "mean": r.mean,
            "mean_se": r.mean_se,
            "a0": model.law.a0(),
            "l1_vs_law": montecarlo::l1_distance(&r.histogram, &model.law)?,
        }),
    })
}

/// Run a command on scenario text and return the CSV and JSON bytes.
pub fn render(kind: CommandKind, text: &str, args: &RunArgs) -> Result<(Vec<u8>, Vec<u8>)> {
    let scenario = Scenario::from_json(text)?;
    let hash = scenario::sha256_hex(text.as_bytes());
    let run = Run {
        scenario,
        hash: &hash,
        args,
    };
    let out = match kind {
        CommandKind::Gml => cmd_gml(&run),
        CommandKind::Pdf => cmd_pdf(&run),
        CommandKind::Outage => cmd_outage(&run),
        CommandKind::Oracle => cmd_oracle(&run),
        CommandKind::Mc => cmd_mc(&run),
    }?;
    let name = kind_name(kind);
    let csv = csv_bytes(name, &run, &out.table)?;
    let mut summary = out.summary;
    summary["command"] = json!(name);
    summary["scenario_sha256"] = json!(hash);
    summary["scenario_name"] = json!(run.scenario.name);
    summary["seed"] = json!(run.seeded().seed);
    summary["version"] = json!(env!("CARGO_PKG_VERSION"));
    let mut js = serde_json::to_vec_pretty(&summary)?;
    js.push(b'\n');
    Ok((csv, js))
}

fn kind_name(kind: CommandKind) -> &'static str {
    match kind {
        CommandKind::Gml => "gml",
        CommandKind::Pdf => "pdf",
        CommandKind::Outage => "outage",
        CommandKind::Oracle => "oracle",
        CommandKind::Mc => "mc",
    }
}

fn csv_bytes(name: &str, run: &Run, table: &Table) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(
        buf,
        "# fsoirs {} {name} scenario_sha256={} seed={}",
        env!("CARGO_PKG_VERSION"),
        run.hash,
        run.seeded().seed
    )?;
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Run `command` and write `<out>/<name>.csv` and `<out>/<name>.json`.
pub fn execute(command: &Command) -> Result<(PathBuf, PathBuf)> {
    let (name, args) = command.split();
    let kind = match command {
        Command::Gml(_) => CommandKind::Gml,
        Command::Pdf(_) => CommandKind::Pdf,
        Command::Outage(_) => CommandKind::Outage,
        Command::Oracle(_) => CommandKind::Oracle,
        Command::Mc(_) => CommandKind::Mc,
    };
    let text = std::fs::read_to_string(&args.scenario)?;
    let (csv, js) = render(kind, &text, args)?;
    std::fs::create_dir_all(&args.out)?;
    let csv_path = args.out.join(format!("{name}.csv"));
    let json_path = args.out.join(format!("{name}.json"));
    std::fs::write(&csv_path, csv)?;
    std::fs::write(&json_path, js)?;
    Ok((csv_path, json_path))
}

/// Worker cap from `FSOIRS_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("FSOIRS_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::invalid(format!("FSOIRS_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}
