//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use protomn::bounds::{low_weight_search, tub_code, ImpulseSearch, SpectrumList};
use protomn::channel::{omega_for_rate, shannon_limit_inverse, ChannelParams};
use protomn::density::{de_threshold_seeded, threshold_search, Method, QuantGrid, ThresholdOptions};
use protomn::designer::{design_search, DesignCandidate, DesignSpec};
use protomn::exec::{map_range, Exec};
use protomn::lift::{lift_circulant_peg_with, lift_protograph_peg_with, lift_uniform_random_with, LiftOptions, LiftedCode};
use protomn::matcher::DmConfig;
use protomn::spectrum::{classify_ensemble, grid_axis, growth_row, GrowthOptions};
use protomn::{Error, Result};

use crate::campaign::run_fer_campaign;
use crate::config::{load_base, lift_base, CampaignConfig, LiftKind, SnrGrid};
use crate::report::{emit_reports, fer_csv, growth_csv, thresholds_csv, tub_csv, GrowthRow, ReportInputs, ThresholdRow, ThresholdTable, TubRow};

#[derive(Debug, Parser)]
#[command(name = "protomn", version, about = "Protograph MacKay-Neal code workbench")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "PROTOMN_WORKERS")]
    pub workers: Option<usize>,
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lift a base matrix into a parity-check matrix.
    Lift(LiftArgs),
    /// Decoding thresholds over a list of rates.
    Threshold(ThresholdArgs),
    /// Growth-rate grid near the origin.
    Growth(GrowthArgs),
    /// Good/bad classification from the sign of the growth rate.
    Classify(ClassifyArgs),
    /// Truncated union bound of a lifted code.
    Tub(TubArgs),
    /// Differential-evolution base-matrix search.
    Design(DesignArgs),
    /// Monte Carlo FER campaign.
    Simulate(SimulateArgs),
    /// Campaign plus thresholds and bound, written as a report directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    /// Base matrix JSON file or catalog name.
    #[arg(long)]
    pub base_matrix: String,
    #[arg(long)]
    pub lift: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "peg")]
    pub method: LiftMethodArg,
    /// Refuse codes whose H2 is singular instead of keeping them without an
    /// encoder.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub alist: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum LiftMethodArg {
    Peg,
    ProtographPeg,
    Random,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = protomn::density::quantized::DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, default_value_t = protomn::density::quantized::DEFAULT_RANGE)]
    pub range: f64,
    #[arg(long, default_value_t = protomn::density::quantized::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

impl GridArgs {
    fn options(&self) -> Result<ThresholdOptions> {
        if self.bins % 2 == 0 || self.bins < 3 || !(self.range > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidArgument("grid needs an odd bin count >= 3, range > 0, max_iter >= 1".into()));
        }
        Ok(ThresholdOptions {
            grid: QuantGrid::new(self.bins, self.range),
            max_iter: self.max_iter,
            ..Default::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub base_matrix: String,
    /// Comma-separated target rates.
    #[arg(long, value_delimiter = ',', required = true)]
    pub rates: Vec<f64>,
    #[arg(long, default_value = "de")]
    pub method: Method,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    #[arg(long)]
    pub base_matrix: String,
    #[arg(long, default_value_t = 0.02)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 0.02)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub base_matrix: String,
    #[arg(long, default_value_t = 0.02)]
    pub xi: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TubArgs {
    /// Lifted code file written by `lift`.
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long)]
    pub omega: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub snrs: SnrGrid,
    /// Precomputed spectrum (JSON triples); searched for when absent.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    /// Writes the searched spectrum here.
    #[arg(long)]
    pub spectrum_out: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub effort: usize,
    /// Largest impulse pattern.
    #[arg(long, default_value_t = 3)]
    pub max_subset: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub h0: usize,
    #[arg(long)]
    pub n0: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub rates: Vec<f64>,
    #[arg(long)]
    pub require_good: bool,
    #[arg(long, default_value_t = 3)]
    pub cap: u32,
    #[arg(long, default_value_t = 40)]
    pub population: usize,
    #[arg(long, default_value_t = 200)]
    pub generations: usize,
    #[arg(long, default_value_t = 0.9)]
    pub crossover: f64,
    #[arg(long, default_value_t = 0.8)]
    pub mutation: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub keep: usize,
    /// Skip the quantized-DE rescoring of the final candidates.
    #[arg(long)]
    pub no_refine: bool,
    /// Base matrices (JSON files or catalog names) seeded into the
    /// population.
    #[arg(long, value_delimiter = ',')]
    pub initial: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Campaign file, TOML or JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Also write wall-clock times (breaks byte-for-byte reproducibility).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Threshold methods to tabulate for the campaign rates.
    #[arg(long, value_delimiter = ',', default_value = "pexit")]
    pub thresholds: Vec<Method>,
    /// Impulse-search effort for the bound overlay; no bound when absent.
    #[arg(long)]
    pub tub_effort: Option<usize>,
    #[arg(long)]
    pub timing: bool,
}

/// What the caller should turn into an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    /// Some campaign cells did not complete.
    Incomplete,
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p.display().to_string(), e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("stdout", e)),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

pub fn threshold_rows(base_spec: &str, rates: &[f64], method: Method, opts: &ThresholdOptions, exec: Exec) -> Result<Vec<ThresholdRow>> {
    let base = load_base(base_spec)?;
    let proto = base.protograph();
    let rows = map_range(exec, 0..rates.len(), |i| -> Result<ThresholdRow> {
        let rate = rates[i];
        let omega = omega_for_rate(rate, base.inner_rate())?;
        let gamma = match method {
            Method::Pexit => threshold_search(&proto, omega, Method::Pexit, opts)?,
            Method::QuantizedDe => de_threshold_seeded(&proto, omega, opts)?,
        };
        let shannon = shannon_limit_inverse(rate)?;
        Ok(ThresholdRow {
            rate,
            omega,
            gamma_star_db: gamma,
            shannon_db: shannon,
            gap_db: gamma - shannon,
        })
    });
    rows.into_iter().collect()
}

fn tub_rows(code: &LiftedCode, list: &SpectrumList, omega: f64, snrs: &SnrGrid) -> Result<Vec<TubRow>> {
    let dm = DmConfig::from_omega(code.h(), omega)?;
    Ok(snrs
        .points()
        .into_iter()
        .map(|snr_db| TubRow {
            snr_db,
            tub: tub_code(list, &ChannelParams::from_db(snr_db), &dm),
        })
        .collect())
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<Outcome> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::InvalidArgument("worker count must be positive".into()));
        }
        protomn::exec::init_workers(n);
    }
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    match &cli.command {
        Command::Lift(a) => {
            let base = load_base(&a.base_matrix)?;
            let opts = if a.strict { LiftOptions::default() } else { LiftOptions::lenient() };
            let code = match a.method {
                LiftMethodArg::Peg => lift_circulant_peg_with(&base, a.lift, a.seed, opts)?,
                LiftMethodArg::ProtographPeg => lift_protograph_peg_with(&base, a.lift, a.seed, opts)?,
                LiftMethodArg::Random => lift_uniform_random_with(&base, a.lift, a.seed, opts)?,
            };
            emit(Some(&a.out), &(code.to_json() + "\n"), stdout)?;
            if let Some(p) = &a.alist {
                emit(Some(p), &code.to_alist(), stdout)?;
            }
            let girth = code.girth().map_or("inf".to_string(), |g| g.to_string());
            emit(
                None,
                &format!(
                    "n={} h={} edges={} girth={} encodable={}\n",
                    code.n(),
                    code.h(),
                    code.edge_count(),
                    girth,
                    code.is_encodable()
                ),
                stdout,
            )?;
        }
        Command::Threshold(a) => {
            let opts = a.grid.options()?;
            let rows = threshold_rows(&a.base_matrix, &a.rates, a.method, &opts, exec)?;
            emit(a.out.as_deref(), &thresholds_csv(&rows), stdout)?;
        }
        Command::Growth(a) => {
            let proto = load_base(&a.base_matrix)?.protograph();
            if !(a.step > 0.0) || a.alpha_max < a.step || a.beta_max < a.step {
                return Err(Error::InvalidArgument("growth grid needs 0 < step <= max".into()));
            }
            let amax = proto.h0() as f64 / proto.n0() as f64;
            let alphas: Vec<f64> = grid_axis(a.alpha_max, a.step).into_iter().filter(|&x| x < amax).collect();
            let betas: Vec<f64> = grid_axis(a.beta_max, a.step).into_iter().filter(|&x| x < 1.0).collect();
            let opts = GrowthOptions::default();
            let solved = map_range(exec, 0..alphas.len(), |i| growth_row(&proto, alphas[i], &betas, &opts));
            let mut rows = Vec::new();
            for (alpha, line) in alphas.iter().zip(solved) {
                for (beta, r) in betas.iter().zip(line) {
                    rows.push(GrowthRow {
                        alpha: *alpha,
                        beta: *beta,
                        g: r.map_or(f64::NAN, |s| s.g),
                    });
                }
            }
            emit(a.out.as_deref(), &growth_csv(&rows), stdout)?;
        }
        Command::Classify(a) => {
            if !(a.xi > a.step && a.step > 0.0) {
                return Err(Error::InvalidArgument("classification needs xi > step > 0".into()));
            }
            let proto = load_base(&a.base_matrix)?.protograph();
            let rep = classify_ensemble(&proto, a.xi, a.step, exec);
            emit(a.out.as_deref(), &to_json(&rep), stdout)?;
        }
        Command::Tub(a) => {
            let code = LiftedCode::load(&a.code)?;
            if !(a.omega > 0.0 && a.omega <= 0.5) {
                return Err(Error::InvalidArgument("omega must lie in (0, 0.5]".into()));
            }
            let list = match &a.spectrum {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p.display().to_string(), e))?;
                    SpectrumList::from_json(&text)?
                }
                None => {
                    let opts = ImpulseSearch {
                        effort: a.effort,
                        max_subset: a.max_subset,
                        exec,
                        ..Default::default()
                    };
                    low_weight_search(&code, &opts)
                }
            };
            if let Some(p) = &a.spectrum_out {
                emit(Some(p), &(list.to_json() + "\n"), stdout)?;
            }
            let rows = tub_rows(&code, &list, a.omega, &a.snrs)?;
            emit(a.out.as_deref(), &tub_csv(&rows), stdout)?;
        }
        Command::Design(a) => {
            let initial = a
                .initial
                .iter()
                .map(|s| load_base(s).map(|b| b.rows().to_vec()))
                .collect::<Result<Vec<_>>>()?;
            let spec = DesignSpec {
                h0: a.h0,
                n0: a.n0,
                rates: a.rates.clone(),
                entry_cap: a.cap,
                de_refine: !a.no_refine,
                require_good: a.require_good,
                population: a.population,
                generations: a.generations,
                crossover: a.crossover,
                mutation: a.mutation,
                seed: a.seed,
                keep: a.keep,
                initial,
                ..Default::default()
            };
            let found = design_search(&spec, &ThresholdOptions::default(), exec)?;
            #[derive(Serialize)]
            struct Report<'a> {
                spec: &'a DesignSpec,
                candidates: &'a [DesignCandidate],
            }
            emit(a.out.as_deref(), &to_json(&Report { spec: &spec, candidates: &found }), stdout)?;
        }
        Command::Simulate(a) => {
            let cfg = CampaignConfig::load(&a.config)?;
            let res = run_fer_campaign(&cfg, exec)?;
            emit(a.out.as_deref(), &fer_csv(&res.rows, a.timing), stdout)?;
            for r in res.rows.iter().filter(|r| !r.completed) {
                eprintln!(
                    "cell rate={} snr={} failed: {}",
                    r.rate,
                    r.snr_db,
                    r.note.as_deref().unwrap_or("unknown")
                );
            }
            if !res.all_completed() {
                return Ok(Outcome::Incomplete);
            }
        }
        Command::Report(a) => {
            let cfg = CampaignConfig::load(&a.config)?;
            let res = run_fer_campaign(&cfg, exec)?;
            let opts = ThresholdOptions::default();
            let mut tables = Vec::new();
            for &m in &a.thresholds {
                tables.push(ThresholdTable {
                    method: m,
                    rows: threshold_rows(&cfg.base_matrix, &cfg.rates, m, &opts, exec)?,
                });
            }
            let mut tub = Vec::new();
            if let Some(effort) = a.tub_effort {
                let base = load_base(&cfg.base_matrix)?;
                let code = lift_base(&base, cfg.lift, cfg.lift_seed, cfg.lift_method)?;
                let list = low_weight_search(
                    &code,
                    &ImpulseSearch {
                        effort,
                        exec,
                        ..Default::default()
                    },
                );
                let omega = omega_for_rate(cfg.rates[0], base.inner_rate())?;
                tub = tub_rows(&code, &list, omega, &cfg.snr_db)?;
            }
            let inputs = serde_json::json!({
                "config": cfg,
                "thresholds": a.thresholds.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                "tub_effort": a.tub_effort,
                "lift_method": match cfg.lift_method { LiftKind::Peg => "peg", LiftKind::ProtographPeg => "protograph_peg", LiftKind::Random => "random" },
                "code": { "n": res.n, "h": res.h, "encodable": res.encodable, "equivalent_channel": res.epc },
            });
            let data = ReportInputs {
                results: Some(&res.rows),
                thresholds: tables,
                tub: Some(&tub),
                growth: None,
                timing: a.timing,
            };
            let summary = emit_reports(&a.out, &data, &inputs)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            if !res.all_completed() {
                return Ok(Outcome::Incomplete);
            }
        }
    }
    Ok(Outcome::Done)
}
