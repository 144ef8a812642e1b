//! Frame-error-rate campaigns over a grid of rates and SNRs.
//!
//! Frame `f` of cell `(r, s)` draws from its own stream derived from the
//! campaign seed, and counts are accumulated in frame order, so the table
//! does not depend on the number of workers.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use protomn::channel::{omega_for_rate, ChannelParams};
use protomn::decoder::{epc_frame, mn_transmit_decode, BpDecoder, FrameReport, FrameStatus};
use protomn::exec::{map_slice, Exec};
use protomn::lift::LiftedCode;
use protomn::matcher::{index_from_bits, DmConfig};
use protomn::rng::{derive_seed, stream_rng};
use protomn::{Error, Result};

use crate::config::{lift_base, load_base, CampaignConfig, SimMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Target rate from the configuration.
    pub rate: f64,
    /// Rate of the finite-length matcher actually used.
    pub realized_rate: f64,
    pub omega: f64,
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub avg_iterations: f64,
    pub undetected_errors: u64,
    pub composition_failures: u64,
    pub wall_time: f64,
    pub completed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub rows: Vec<ResultRow>,
    pub n: usize,
    pub h: usize,
    pub encodable: bool,
    pub epc: bool,
    pub workers: usize,
}

impl CampaignResult {
    pub fn all_completed(&self) -> bool {
        self.rows.iter().all(|r| r.completed)
    }
}

/// Frames in flight between stopping-rule checks.
const ROUND_BATCHES: usize = 8;

fn one_frame(
    code: &LiftedCode,
    dm: &DmConfig,
    decoder: &mut BpDecoder<'_>,
    params: &ChannelParams,
    epc: bool,
    seed: u64,
) -> Result<FrameReport> {
    let mut rng = stream_rng(seed, 0);
    if epc {
        return epc_frame(dm, decoder, params, &mut rng);
    }
    let bits: Vec<u8> = (0..dm.message_bits()).map(|_| rng.random::<bool>() as u8).collect();
    let m = index_from_bits(&bits, dm)?;
    debug_assert_eq!(code.h(), dm.h());
    mn_transmit_decode(&m, dm, decoder, params, &mut rng)
}

/// Simulates one `(rate, SNR)` cell on a prepared code.
#[allow(clippy::too_many_arguments)]
pub fn run_cell(
    code: &LiftedCode,
    dm: &DmConfig,
    cfg: &CampaignConfig,
    snr_db: f64,
    epc: bool,
    cell: (u64, u64),
    exec: Exec,
) -> Result<(u64, u64, u64, u64, u64)> {
    let params = ChannelParams::from_db(snr_db);
    let (mut frames, mut errors, mut iters, mut undetected, mut composition) = (0u64, 0u64, 0u64, 0u64, 0u64);
    let mut next = 0u64;
    let round = (cfg.batch * ROUND_BATCHES) as u64;
    while frames < cfg.max_frames && errors < cfg.max_errors {
        let count = round.min(cfg.max_frames - next);
        let starts: Vec<u64> = (0..count).step_by(cfg.batch).map(|o| next + o).collect();
        let end = next + count;
        let chunks = map_slice(exec, &starts, |&s| {
            let mut dec = BpDecoder::new(code, cfg.decoder);
            (s..(s + cfg.batch as u64).min(end))
                .map(|f| {
                    let seed = derive_seed(cfg.seed, &[cell.0, cell.1, f]);
                    one_frame(code, dm, &mut dec, &params, epc, seed)
                })
                .collect::<Vec<_>>()
        });
        for r in chunks.into_iter().flatten() {
            if frames >= cfg.max_frames || errors >= cfg.max_errors {
                break;
            }
            let r = r?;
            frames += 1;
            iters += r.iterations as u64;
            if r.status.is_error() {
                errors += 1;
            }
            match r.status {
                FrameStatus::Undetected => undetected += 1,
                FrameStatus::CompositionFailure => composition += 1,
                _ => {}
            }
        }
        next = end;
    }
    Ok((frames, errors, iters, undetected, composition))
}

/// Lifts the configured code and runs every cell. Cells that fail are
/// reported with `completed = false`; the rest still run.
pub fn run_fer_campaign(cfg: &CampaignConfig, exec: Exec) -> Result<CampaignResult> {
    cfg.validate()?;
    let base = load_base(&cfg.base_matrix)?;
    let code = lift_base(&base, cfg.lift, cfg.lift_seed, cfg.lift_method)?;
    let epc = match cfg.mode {
        SimMode::Auto => !code.is_encodable(),
        SimMode::Epc => true,
        SimMode::Transmit => {
            if !code.is_encodable() {
                return Err(Error::NotEncodable);
            }
            false
        }
    };
    let mut rows = Vec::new();
    for (ri, &rate) in cfg.rates.iter().enumerate() {
        let dm = omega_for_rate(rate, base.inner_rate()).and_then(|w| DmConfig::from_omega(code.h(), w));
        for (si, snr) in cfg.snr_db.points().into_iter().enumerate() {
            let t0 = Instant::now();
            let outcome = dm
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|dm| run_cell(&code, dm, cfg, snr, epc, (ri as u64, si as u64), exec));
            let (realized_rate, omega) = match &dm {
                Ok(d) => (d.rate() * base.inner_rate(), d.omega()),
                Err(_) => (f64::NAN, f64::NAN),
            };
            let mut row = ResultRow {
                rate,
                realized_rate,
                omega,
                snr_db: snr,
                frames: 0,
                frame_errors: 0,
                fer: 0.0,
                avg_iterations: 0.0,
                undetected_errors: 0,
                composition_failures: 0,
                wall_time: 0.0,
                completed: false,
                note: None,
            };
            match outcome {
                Ok((frames, errors, iters, undetected, composition)) => {
                    row.frames = frames;
                    row.frame_errors = errors;
                    row.fer = errors as f64 / frames as f64;
                    row.avg_iterations = iters as f64 / frames as f64;
                    row.undetected_errors = undetected;
                    row.composition_failures = composition;
                    row.completed = true;
                }
                Err(e) => row.note = Some(e.to_string()),
            }
            row.wall_time = t0.elapsed().as_secs_f64();
            rows.push(row);
        }
    }
    Ok(CampaignResult {
        rows,
        n: code.n(),
        h: code.h(),
        encodable: code.is_encodable(),
        epc,
        workers: protomn::exec::worker_count(),
    })
}
