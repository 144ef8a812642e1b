//! Flooding belief propagation over the mother-code Tanner graph, and the
//! end-to-end MN transmit/decode chain.

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{apriori_sample, biawgn_sample, channel_llrs, ChannelParams};
use crate::error::{Error, Result};
use crate::lift::LiftedCode;
use crate::matcher::{cc_decode, cc_encode, DmConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    pub max_iterations: usize,
    pub llr_clip: f64,
    pub early_stop: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            max_iterations: 100,
            llr_clip: 25.0,
            early_stop: true,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || !(self.llr_clip > 0.0) {
            return Err(Error::InvalidArgument(
                "decoder needs max_iterations >= 1 and llr_clip > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub v_hat: Vec<u8>,
    pub c_hat: Vec<u8>,
    pub iterations_used: usize,
    pub syndrome_ok: bool,
    /// Weight of `v_hat` equals the expected composition (always true when
    /// none was given).
    pub composition_ok: bool,
}

/// Prior L-value of the punctured bits, `ln((1 - omega) / omega)`.
pub fn prior_llr(omega: f64) -> f64 {
    ((1.0 - omega) / omega).ln()
}

/// Decoder input: `Delta` on the `h` punctured positions followed by the
/// channel L-values of `y`.
pub fn init_llrs(y: &[f64], h: usize, omega: f64, params: &ChannelParams) -> Vec<f64> {
    let delta = prior_llr(omega);
    let mut l = vec![delta; h];
    l.extend(channel_llrs(y, params));
    l
}

/// Reusable decoder state for one code; keeps message buffers between
/// frames.
pub struct BpDecoder<'a> {
    code: &'a LiftedCode,
    cfg: DecoderConfig,
    /// Column of each edge, edges grouped by check.
    edge_var: Vec<u32>,
    check_start: Vec<usize>,
    /// Edge ids per column.
    var_edges: Vec<Vec<u32>>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    scratch: Vec<f64>,
    total: Vec<f64>,
    hard: Vec<u8>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(code: &'a LiftedCode, cfg: DecoderConfig) -> Self {
        let mut edge_var = Vec::with_capacity(code.edge_count());
        let mut check_start = vec![0];
        let mut var_edges = vec![Vec::new(); code.num_vars()];
        for c in code.checks() {
            for &v in c {
                var_edges[v].push(edge_var.len() as u32);
                edge_var.push(v as u32);
            }
            check_start.push(edge_var.len());
        }
        let e = edge_var.len();
        let nv = code.num_vars();
        BpDecoder {
            code,
            cfg,
            edge_var,
            check_start,
            var_edges,
            v2c: vec![0.0; e],
            c2v: vec![0.0; e],
            scratch: Vec::new(),
            total: vec![0.0; nv],
            hard: vec![0; nv],
        }
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    fn syndrome_ok(&self) -> bool {
        (0..self.check_start.len() - 1).all(|r| {
            self.edge_var[self.check_start[r]..self.check_start[r + 1]]
                .iter()
                .fold(0u8, |a, &v| a ^ self.hard[v as usize])
                == 0
        })
    }

    fn check_update(&mut self) {
        let clip = self.cfg.llr_clip;
        for r in 0..self.check_start.len() - 1 {
            let (s, e) = (self.check_start[r], self.check_start[r + 1]);
            // Leave-one-out tanh products by prefix/suffix, so zero inputs
            // need no special care.
            self.scratch.clear();
            self.scratch.extend(self.v2c[s..e].iter().map(|&l| (0.5 * l).tanh()));
            let out = &mut self.c2v[s..e];
            let mut prefix = 1.0;
            for (o, &t) in out.iter_mut().zip(&self.scratch) {
                *o = prefix;
                prefix *= t;
            }
            let mut suffix = 1.0;
            for (o, &t) in out.iter_mut().zip(&self.scratch).rev() {
                let p = *o * suffix;
                suffix *= t;
                *o = ((1.0 + p) / (1.0 - p)).ln().clamp(-clip, clip);
            }
        }
    }

    fn var_update(&mut self, llr: &[f64]) {
        let clip = self.cfg.llr_clip;
        for (v, edges) in self.var_edges.iter().enumerate() {
            let tot = llr[v] + edges.iter().map(|&e| self.c2v[e as usize]).sum::<f64>();
            self.total[v] = tot;
            self.hard[v] = u8::from(tot < 0.0);
            for &e in edges {
                self.v2c[e as usize] = (tot - self.c2v[e as usize]).clamp(-clip, clip);
            }
        }
    }

    /// Decodes one frame. `expected_weight` is the matcher composition used
    /// for `composition_ok`.
    pub fn decode(&mut self, llr: &[f64], expected_weight: Option<usize>) -> DecodeResult {
        assert_eq!(llr.len(), self.code.num_vars(), "LLR length must be h + n");
        let clip = self.cfg.llr_clip;
        for (v, edges) in self.var_edges.iter().enumerate() {
            let l = llr[v].clamp(-clip, clip);
            for &e in edges {
                self.v2c[e as usize] = l;
            }
        }
        let mut used = 0;
        let mut ok = false;
        for it in 1..=self.cfg.max_iterations {
            self.check_update();
            self.var_update(llr);
            used = it;
            if self.cfg.early_stop || it == self.cfg.max_iterations {
                ok = self.syndrome_ok();
                if ok && self.cfg.early_stop {
                    break;
                }
            }
        }
        let h = self.code.h();
        let v_hat = self.hard[..h].to_vec();
        let c_hat = self.hard[h..].to_vec();
        let weight = v_hat.iter().filter(|&&b| b == 1).count();
        DecodeResult {
            composition_ok: expected_weight.is_none_or(|k| k == weight),
            v_hat,
            c_hat,
            iterations_used: used,
            syndrome_ok: ok,
        }
    }
}

/// One-shot decode; allocates a fresh decoder.
pub fn bp_decode(llr: &[f64], code: &LiftedCode, cfg: &DecoderConfig, expected_weight: Option<usize>) -> DecodeResult {
    BpDecoder::new(code, *cfg).decode(llr, expected_weight)
}

/// How a frame ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameStatus {
    Correct,
    /// Valid codeword of the right composition, wrong message.
    Undetected,
    /// Decoded word has the wrong weight.
    CompositionFailure,
    /// Right weight but the message differs and the syndrome is nonzero.
    DecodingFailure,
}

impl FrameStatus {
    pub fn is_error(self) -> bool {
        self != FrameStatus::Correct
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub status: FrameStatus,
    pub iterations: usize,
    pub m_hat: Option<BigUint>,
}

fn classify(res: &DecodeResult, correct: bool) -> FrameStatus {
    if correct {
        FrameStatus::Correct
    } else if !res.composition_ok {
        FrameStatus::CompositionFailure
    } else if res.syndrome_ok {
        FrameStatus::Undetected
    } else {
        FrameStatus::DecodingFailure
    }
}

/// Full chain: matcher, inner encoder, BPSK, channel, BP, de-matcher.
pub fn mn_transmit_decode<R: Rng + ?Sized>(
    m: &BigUint,
    cfg: &DmConfig,
    decoder: &mut BpDecoder<'_>,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<FrameReport> {
    let code = decoder.code;
    if cfg.h() != code.h() {
        return Err(Error::LengthMismatch {
            expected: code.h(),
            found: cfg.h(),
        });
    }
    let v = cc_encode(m, cfg)?;
    let c = code.encode(&v)?;
    let x: Vec<f64> = c.iter().map(|&b| 1.0 - 2.0 * b as f64).collect();
    let y = biawgn_sample(&x, params, rng);
    let llr = init_llrs(&y, code.h(), cfg.omega(), params);
    let res = decoder.decode(&llr, Some(cfg.k()));
    let m_hat = if res.composition_ok {
        cc_decode(&res.v_hat, cfg).ok()
    } else {
        None
    };
    let correct = m_hat.as_ref() == Some(m);
    Ok(FrameReport {
        status: classify(&res, correct),
        iterations: res.iterations_used,
        m_hat,
    })
}

/// Equivalent-channel frame relative to the all-zero codeword: the punctured
/// priors carry exactly `k` sign flips at uniform positions and the
/// transmitted part is all `+1`. Works for codes without an encoder.
pub fn epc_frame<R: Rng + ?Sized>(
    cfg: &DmConfig,
    decoder: &mut BpDecoder<'_>,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<FrameReport> {
    let code = decoder.code;
    if cfg.h() != code.h() {
        return Err(Error::LengthMismatch {
            expected: code.h(),
            found: cfg.h(),
        });
    }
    let delta = prior_llr(cfg.omega());
    let z = apriori_sample(&vec![0u8; cfg.h()], cfg.k(), rng);
    let x = vec![1.0; code.n()];
    let y = biawgn_sample(&x, params, rng);
    let mut llr: Vec<f64> = z.iter().map(|&b| if b == 1 { -delta } else { delta }).collect();
    llr.extend(channel_llrs(&y, params));
    let mut res = decoder.decode(&llr, None);
    // composition of the word the real decoder would have produced
    let weight = res.v_hat.iter().zip(&z).filter(|(a, b)| *a != *b).count();
    res.composition_ok = weight == cfg.k();
    let correct = res.v_hat.iter().all(|&b| b == 0);
    Ok(FrameReport {
        status: classify(&res, correct),
        iterations: res.iterations_used,
        m_hat: None,
    })
}
