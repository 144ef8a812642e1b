//! Base-matrix design: worst-case loss to the Shannon limit over a set of
//! target rates, minimized by integer differential evolution.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::base::BaseMatrix;
use crate::channel::{omega_for_rate, shannon_limit_inverse};
use crate::density::{de_threshold_seeded, threshold_search, Method, ThresholdOptions};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Exec};
use crate::rng::stream_rng;
use crate::spectrum::{classify_ensemble, EnsembleClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateGap {
    pub rate: f64,
    pub omega: f64,
    pub threshold_db: f64,
    pub shannon_db: f64,
    pub gap_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WclReport {
    pub method: Method,
    pub wcl_db: f64,
    pub gaps: Vec<RateGap>,
}

fn rate_gap(base: &BaseMatrix, rate: f64, method: Method, opts: &ThresholdOptions) -> Result<RateGap> {
    let proto = base.protograph();
    let omega = omega_for_rate(rate, base.inner_rate())?;
    let threshold_db = match method {
        Method::Pexit => threshold_search(&proto, omega, Method::Pexit, opts)?,
        Method::QuantizedDe => de_threshold_seeded(&proto, omega, opts)?,
    };
    let shannon_db = shannon_limit_inverse(rate)?;
    Ok(RateGap {
        rate,
        omega,
        threshold_db,
        shannon_db,
        gap_db: threshold_db - shannon_db,
    })
}

/// Largest threshold-to-capacity gap over `rates`.
pub fn wcl(base: &BaseMatrix, rates: &[f64], method: Method, opts: &ThresholdOptions) -> Result<WclReport> {
    if rates.is_empty() {
        return Err(Error::InvalidArgument("empty rate set".into()));
    }
    let gaps = rates
        .iter()
        .map(|&r| rate_gap(base, r, method, opts))
        .collect::<Result<Vec<_>>>()?;
    let wcl_db = gaps.iter().map(|g| g.gap_db).fold(f64::NEG_INFINITY, f64::max);
    Ok(WclReport { method, wcl_db, gaps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub h0: usize,
    pub n0: usize,
    pub rates: Vec<f64>,
    pub entry_cap: u32,
    /// Re-score the final candidates with quantized DE at the lowest rate.
    pub de_refine: bool,
    pub require_good: bool,
    pub population: usize,
    pub generations: usize,
    pub crossover: f64,
    pub mutation: f64,
    pub seed: u64,
    /// Number of ranked candidates returned.
    pub keep: usize,
    /// Classification window and step.
    pub classify_xi: f64,
    pub classify_step: f64,
    /// Matrices placed in the initial population before random members.
    #[serde(default)]
    pub initial: Vec<Vec<Vec<u32>>>,
}

impl Default for DesignSpec {
    fn default() -> Self {
        DesignSpec {
            h0: 2,
            n0: 4,
            rates: vec![0.1, 0.3, 0.5],
            entry_cap: 3,
            de_refine: true,
            require_good: false,
            population: 40,
            generations: 200,
            crossover: 0.9,
            mutation: 0.8,
            seed: 1,
            keep: 5,
            classify_xi: 0.02,
            classify_step: 1e-3,
            initial: Vec::new(),
        }
    }
}

impl DesignSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.h0 == 0 || self.n0 == 0 {
            return bad("protograph dimensions must be positive".into());
        }
        if self.rates.is_empty() {
            return bad("empty rate set".into());
        }
        let top = self.h0 as f64 / self.n0 as f64;
        // the inner rate itself is reachable with a balanced matcher
        if let Some(r) = self.rates.iter().find(|&&r| !(r > 0.0 && r <= top)) {
            return bad(format!("rate {r} outside (0, {top}]"));
        }
        if self.entry_cap == 0 {
            return bad("entry cap must be positive".into());
        }
        // mutation draws three members besides the target
        if self.generations > 0 && self.population < 4 {
            return bad("population below 4 cannot evolve".into());
        }
        if self.population == 0 || self.keep == 0 {
            return bad("population and keep must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.crossover) || self.mutation <= 0.0 {
            return bad("crossover must lie in [0, 1] and mutation be positive".into());
        }
        for m in &self.initial {
            if m.len() != self.n0 || m.iter().any(|r| r.len() != self.h0 + self.n0) {
                return bad("initial matrix has the wrong shape".into());
            }
        }
        Ok(())
    }

    fn genes(&self) -> usize {
        self.n0 * (self.h0 + self.n0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCandidate {
    pub rows: Vec<Vec<u32>>,
    pub h0: usize,
    /// WCL used for ranking (PEXIT, with the lowest-rate gap from quantized
    /// DE when refinement is on).
    pub wcl_db: f64,
    pub pexit: WclReport,
    pub refined_lowest: Option<RateGap>,
    pub class: Option<EnsembleClass>,
}

/// Rounds, clips to `[0, cap]` and patches empty rows and columns.
fn repair(genome: &[f64], spec: &DesignSpec) -> Vec<u32> {
    let cols = spec.h0 + spec.n0;
    let cap = spec.entry_cap as f64;
    let mut g: Vec<u32> = genome.iter().map(|&v| v.round().clamp(0.0, cap) as u32).collect();
    for r in 0..spec.n0 {
        if g[r * cols..(r + 1) * cols].iter().all(|&v| v == 0) {
            // the diagonal of the square part keeps H2 full
            g[r * cols + spec.h0 + r] = 1;
        }
    }
    for c in 0..cols {
        if (0..spec.n0).all(|r| g[r * cols + c] == 0) {
            g[(c % spec.n0) * cols + c] = 1;
        }
    }
    g
}

fn to_rows(g: &[u32], spec: &DesignSpec) -> Vec<Vec<u32>> {
    g.chunks(spec.h0 + spec.n0).map(|r| r.to_vec()).collect()
}

#[derive(Clone)]
struct Scored {
    fitness: f64,
    pexit: Option<WclReport>,
    class: Option<EnsembleClass>,
}

fn score(g: &[u32], spec: &DesignSpec, opts: &ThresholdOptions) -> Scored {
    let invalid = Scored {
        fitness: f64::INFINITY,
        pexit: None,
        class: None,
    };
    let Ok(base) = BaseMatrix::with_cap(to_rows(g, spec), spec.h0, spec.entry_cap) else {
        return invalid;
    };
    let Ok(report) = wcl(&base, &spec.rates, Method::Pexit, opts) else {
        return invalid;
    };
    let mut class = None;
    if spec.require_good {
        let c = classify_ensemble(&base.protograph(), spec.classify_xi, spec.classify_step, Exec::Sequential).class;
        class = Some(c);
        if c != EnsembleClass::Good {
            return Scored {
                fitness: f64::INFINITY,
                pexit: Some(report),
                class,
            };
        }
    }
    Scored {
        fitness: report.wcl_db,
        pexit: Some(report),
        class,
    }
}

/// Differential-evolution search; returns up to `spec.keep` candidates,
/// best first. Deterministic for a given seed regardless of `exec`.
pub fn design_search(spec: &DesignSpec, opts: &ThresholdOptions, exec: Exec) -> Result<Vec<DesignCandidate>> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed, 0);
    let genes = spec.genes();
    let cap = spec.entry_cap;
    let mut pop: Vec<Vec<u32>> = spec
        .initial
        .iter()
        .map(|m| {
            let flat: Vec<f64> = m.iter().flatten().map(|&v| v as f64).collect();
            repair(&flat, spec)
        })
        .collect();
    pop.truncate(spec.population.max(spec.initial.len()));
    while pop.len() < spec.population {
        let flat: Vec<f64> = (0..genes).map(|_| rng.random_range(0..=cap) as f64).collect();
        pop.push(repair(&flat, spec));
    }
    let mut cache: HashMap<Vec<u32>, Scored> = HashMap::new();
    let evaluate = |cache: &mut HashMap<Vec<u32>, Scored>, batch: &[Vec<u32>]| {
        let mut fresh: Vec<Vec<u32>> = batch.iter().filter(|g| !cache.contains_key(*g)).cloned().collect();
        fresh.sort();
        fresh.dedup();
        let scores = map_slice(exec, &fresh, |g| score(g, spec, opts));
        for (g, s) in fresh.into_iter().zip(scores) {
            cache.insert(g, s);
        }
    };
    evaluate(&mut cache, &pop);
    let np = pop.len();
    for _ in 0..spec.generations {
        let trials: Vec<Vec<u32>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let r = rng.random_range(0..np);
                    if r != i {
                        break r;
                    }
                };
                let r1 = pick();
                let r2 = loop {
                    let r = pick();
                    if r != r1 {
                        break r;
                    }
                };
                let r3 = loop {
                    let r = pick();
                    if r != r1 && r != r2 {
                        break r;
                    }
                };
                let forced = rng.random_range(0..genes);
                let trial: Vec<f64> = (0..genes)
                    .map(|j| {
                        if j == forced || rng.random::<f64>() < spec.crossover {
                            pop[r1][j] as f64 + spec.mutation * (pop[r2][j] as f64 - pop[r3][j] as f64)
                        } else {
                            pop[i][j] as f64
                        }
                    })
                    .collect();
                repair(&trial, spec)
            })
            .collect();
        evaluate(&mut cache, &trials);
        for (i, t) in trials.into_iter().enumerate() {
            if cache[&t].fitness <= cache[&pop[i]].fitness {
                pop[i] = t;
            }
        }
    }
    let mut finals: Vec<Vec<u32>> = pop.clone();
    finals.sort();
    finals.dedup();
    finals.retain(|g| cache[g].fitness.is_finite());
    finals.sort_by(|a, b| cache[a].fitness.total_cmp(&cache[b].fitness).then_with(|| a.cmp(b)));
    finals.truncate(spec.keep);
    let lowest = spec.rates.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out: Vec<DesignCandidate> = map_slice(exec, &finals, |g| {
        let s = &cache[g];
        let pexit = s.pexit.clone().expect("finite fitness has a report");
        let rows = to_rows(g, spec);
        let mut refined = None;
        let mut wcl_db = s.fitness;
        if spec.de_refine {
            let base = BaseMatrix::with_cap(rows.clone(), spec.h0, spec.entry_cap).expect("scored matrix is valid");
            if let Ok(gap) = rate_gap(&base, lowest, Method::QuantizedDe, opts) {
                wcl_db = pexit
                    .gaps
                    .iter()
                    .filter(|x| x.rate != lowest)
                    .map(|x| x.gap_db)
                    .fold(gap.gap_db, f64::max);
                refined = Some(gap);
            }
        }
        DesignCandidate {
            rows,
            h0: spec.h0,
            wcl_db,
            pexit,
            refined_lowest: refined,
            class: s.class,
        }
    });
    out.sort_by(|a, b| a.wcl_db.total_cmp(&b.wcl_db).then_with(|| a.rows.cmp(&b.rows)));
    Ok(out)
}
