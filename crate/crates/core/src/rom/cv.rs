use std::cmp::Ordering;
use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cae_gpr::{cae_gpr_offline, CaeTrainConfig};
use super::metrics::rom_error;
use super::pod_gpr::pod_gpr_offline;
use super::surrogate::Method;
use crate::error::{Result, RomError};
use crate::gpr::GprConfig;
use crate::linalg::SnapshotMatrix;

pub const N_FOLDS: usize = 5;

/// Sample indices of one fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Indices sorted by parameter vector (lexicographic, total order), ties by
/// position. This makes fold assignment independent of the storage order.
pub fn canonical_order(params: &[Vec<f64>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..params.len()).collect();
    idx.sort_by(|&a, &b| {
        params[a]
            .iter()
            .zip(&params[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx
}

/// Five disjoint holdouts covering every sample. Each holdout of size `h`
/// gives `h/2` validation and `h - h/2` test samples; the rest train.
pub fn fold_splits(params: &[Vec<f64>], seed: u64) -> Result<Vec<FoldSplit>> {
    let n = params.len();
    if n == 0 || !n.is_multiple_of(N_FOLDS) {
        return Err(RomError::arg(format!(
            "five-fold cross-validation needs a sample count divisible by 5, got {n}"
        )));
    }
    let canon = canonical_order(params);
    let mut rank = vec![0; n];
    for (r, &i) in canon.iter().enumerate() {
        rank[i] = r;
    }
    let mut perm = canon.clone();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let h = n / N_FOLDS;
    let by_rank = |mut v: Vec<usize>| {
        v.sort_by_key(|&i| rank[i]);
        v
    };
    Ok((0..N_FOLDS)
        .map(|f| {
            let hold = &perm[f * h..(f + 1) * h];
            let validation = by_rank(hold[..h / 2].to_vec());
            let test = by_rank(hold[h / 2..].to_vec());
            let train = canon
                .iter()
                .copied()
                .filter(|i| !hold.contains(i))
                .collect();
            FoldSplit {
                train,
                validation,
                test,
            }
        })
        .collect())
}

/// What to run inside each fold.
#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub pod_ks: Vec<usize>,
    pub cae_ks: Vec<usize>,
    pub gpr: GprConfig,
    pub cae: CaeTrainConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            pod_ks: (1..=35).collect(),
            cae_ks: (5..=35).step_by(5).collect(),
            gpr: GprConfig::default(),
            cae: CaeTrainConfig::default(),
        }
    }
}

/// Mean errors on one fold's test set (or across folds when `fold` is
/// `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct CvRow {
    pub method: Method,
    pub fold: Option<usize>,
    pub k: usize,
    pub channel: String,
    /// Mean squared relative prediction error.
    pub eps_rom: f64,
    /// Mean squared relative projection error.
    pub eps_proj: f64,
    /// Mean of `sqrt(eps)` per test point, i.e. the unsquared relative error.
    pub rel_l2_rom: f64,
    pub rel_l2_proj: f64,
    pub epochs: f64,
}

/// Offline cost of one (method, fold, k) build.
#[derive(Debug, Clone, PartialEq)]
pub struct CvTiming {
    pub method: Method,
    pub fold: usize,
    pub k: usize,
    pub wall_time_s: f64,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub splits: Vec<FoldSplit>,
    pub rows: Vec<CvRow>,
    pub timings: Vec<CvTiming>,
}

pub const CSV_HEADER: &str = "method,fold,k,channel,eps_rom,eps_proj,rel_l2_rom,rel_l2_proj,epochs";
pub const TIMING_HEADER: &str = "method,fold,k,wall_time_s,epochs";

impl CvReport {
    pub fn mean_row(&self, method: Method, k: usize, channel: &str) -> Option<&CvRow> {
        self.rows
            .iter()
            .find(|r| r.fold.is_none() && r.method == method && r.k == k && r.channel == channel)
    }

    /// Deterministic error table. Floats use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let fold = r.fold.map_or("mean".to_string(), |f| f.to_string());
            let _ = writeln!(
                s,
                "{},{},{},{},{:e},{:e},{:e},{:e},{}",
                r.method,
                fold,
                r.k,
                r.channel,
                r.eps_rom,
                r.eps_proj,
                r.rel_l2_rom,
                r.rel_l2_proj,
                r.epochs
            );
        }
        s
    }

    /// Wall times, kept apart from [`CvReport::to_csv`] so the error table
    /// is reproducible bit for bit.
    pub fn timing_csv(&self) -> String {
        let mut s = String::from(TIMING_HEADER);
        s.push('\n');
        for t in &self.timings {
            let _ = writeln!(
                s,
                "{},{},{},{:.3},{}",
                t.method, t.fold, t.k, t.wall_time_s, t.epochs
            );
        }
        s
    }
}

struct PointErrors {
    rom: Vec<f64>,
    proj: Vec<f64>,
}

fn fold_rows(
    method: Method,
    fold: usize,
    k: usize,
    names: &[String],
    errs: &[PointErrors],
    epochs: usize,
) -> Vec<CvRow> {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mean_sqrt = |v: &[f64]| v.iter().map(|e| e.sqrt()).sum::<f64>() / v.len() as f64;
    names
        .iter()
        .zip(errs)
        .map(|(name, e)| CvRow {
            method,
            fold: Some(fold),
            k,
            channel: name.clone(),
            eps_rom: mean(&e.rom),
            eps_proj: mean(&e.proj),
            rel_l2_rom: mean_sqrt(&e.rom),
            rel_l2_proj: mean_sqrt(&e.proj),
            epochs: epochs as f64,
        })
        .collect()
}

struct FoldOutput {
    rows: Vec<CvRow>,
    timings: Vec<CvTiming>,
}

fn run_fold(
    channels: &[SnapshotMatrix],
    names: &[String],
    grid: (usize, usize),
    split: &FoldSplit,
    fold: usize,
    config: &CvConfig,
    seed: u64,
) -> Result<FoldOutput> {
    let fold_seed = seed ^ fold as u64;
    let train: Vec<SnapshotMatrix> = channels
        .iter()
        .map(|s| s.select(&split.train))
        .collect::<Result<_>>()?;
    let test_params: Vec<&Vec<f64>> = split
        .test
        .iter()
        .map(|&i| &channels[0].params()[i])
        .collect();
    let test_states: Vec<Vec<Vec<f64>>> = split
        .test
        .iter()
        .map(|&i| channels.iter().map(|s| s.column(i)).collect())
        .collect();
    let mut out = FoldOutput {
        rows: Vec::new(),
        timings: Vec::new(),
    };

    if let Some(&k_max) = config.pod_ks.iter().max() {
        let start = Instant::now();
        let full: Vec<_> = train
            .iter()
            .map(|s| pod_gpr_offline(s, k_max, &config.gpr, fold_seed))
            .collect::<Result<_>>()?;
        let elapsed = start.elapsed().as_secs_f64();
        for &k in &config.pod_ks {
            let models: Vec<_> = full.iter().map(|m| m.truncated(k)).collect::<Result<_>>()?;
            let mut errs: Vec<PointErrors> = (0..channels.len())
                .map(|_| PointErrors {
                    rom: Vec::new(),
                    proj: Vec::new(),
                })
                .collect();
            for (mu, x) in test_params.iter().zip(&test_states) {
                for (c, m) in models.iter().enumerate() {
                    errs[c].rom.push(rom_error(&x[c], &m.predict(mu)?)?);
                    errs[c].proj.push(rom_error(&x[c], &m.project(&x[c])?)?);
                }
            }
            out.rows
                .extend(fold_rows(Method::PodGpr, fold, k, names, &errs, 0));
            out.timings.push(CvTiming {
                method: Method::PodGpr,
                fold,
                k,
                wall_time_s: elapsed,
                epochs: 0,
            });
        }
    }

    if !config.cae_ks.is_empty() {
        let (ny, nx) = grid;
        let val: Vec<SnapshotMatrix> = channels
            .iter()
            .map(|s| s.select(&split.validation))
            .collect::<Result<_>>()?;
        let train_refs: Vec<&SnapshotMatrix> = train.iter().collect();
        let val_refs: Vec<&SnapshotMatrix> = val.iter().collect();
        for &k in &config.cae_ks {
            let start = Instant::now();
            let (model, history) = cae_gpr_offline(
                &train_refs,
                &val_refs,
                ny,
                nx,
                k,
                &config.cae,
                &config.gpr,
                fold_seed,
            )?;
            let elapsed = start.elapsed().as_secs_f64();
            log::info!(
                "fold {fold} cae-gpr k={k}: {} epochs (best {}), {elapsed:.1} s",
                history.epochs(),
                history.best_epoch
            );
            let mut errs: Vec<PointErrors> = (0..channels.len())
                .map(|_| PointErrors {
                    rom: Vec::new(),
                    proj: Vec::new(),
                })
                .collect();
            for (mu, x) in test_params.iter().zip(&test_states) {
                let pred = model.predict(mu)?;
                let refs: Vec<&[f64]> = x.iter().map(|v| v.as_slice()).collect();
                let proj = model.project(&refs)?;
                for c in 0..channels.len() {
                    errs[c].rom.push(rom_error(&x[c], &pred[c])?);
                    errs[c].proj.push(rom_error(&x[c], &proj[c])?);
                }
            }
            out.rows.extend(fold_rows(
                Method::CaeGpr,
                fold,
                k,
                names,
                &errs,
                history.epochs(),
            ));
            out.timings.push(CvTiming {
                method: Method::CaeGpr,
                fold,
                k,
                wall_time_s: elapsed,
                epochs: history.epochs(),
            });
        }
    }
    Ok(out)
}

/// Five-fold cross-validation of the configured methods. Fold `f` uses seed
/// `seed ^ f`, so results do not depend on how folds are scheduled. POD-GPR
/// builds an independent surrogate per channel and ignores the validation
/// samples; CAE-GPR trains one network over all channels.
pub fn five_fold_cv(
    channels: &[SnapshotMatrix],
    names: &[String],
    grid: (usize, usize),
    config: &CvConfig,
    seed: u64,
) -> Result<CvReport> {
    if channels.is_empty() || names.len() != channels.len() {
        return Err(RomError::arg("need one name per state channel"));
    }
    let params = channels[0].params();
    if channels.iter().any(|s| s.params() != params) {
        return Err(RomError::arg("channels must share one design table"));
    }
    let splits = fold_splits(params, seed)?;
    if !config.cae_ks.is_empty() && splits[0].validation.is_empty() {
        return Err(RomError::arg(
            "holdout too small to leave validation samples for early stopping",
        ));
    }
    if let Some(&k) = config
        .pod_ks
        .iter()
        .chain(&config.cae_ks)
        .find(|&&k| k == 0)
    {
        return Err(RomError::arg(format!(
            "ROM dimension must be positive, got {k}"
        )));
    }

    let outputs: Vec<FoldOutput> = splits
        .par_iter()
        .enumerate()
        .map(|(f, split)| run_fold(channels, names, grid, split, f, config, seed))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for o in &outputs {
        rows.extend(o.rows.iter().cloned());
        timings.extend(o.timings.iter().cloned());
    }
    let mut means = Vec::new();
    for (method, ks) in [
        (Method::PodGpr, &config.pod_ks),
        (Method::CaeGpr, &config.cae_ks),
    ] {
        for &k in ks.iter() {
            for name in names {
                let per: Vec<&CvRow> = rows
                    .iter()
                    .filter(|r| r.method == method && r.k == k && &r.channel == name)
                    .collect();
                let avg =
                    |f: fn(&CvRow) -> f64| per.iter().map(|r| f(r)).sum::<f64>() / per.len() as f64;
                means.push(CvRow {
                    method,
                    fold: None,
                    k,
                    channel: name.clone(),
                    eps_rom: avg(|r| r.eps_rom),
                    eps_proj: avg(|r| r.eps_proj),
                    rel_l2_rom: avg(|r| r.rel_l2_rom),
                    rel_l2_proj: avg(|r| r.rel_l2_proj),
                    epochs: avg(|r| r.epochs),
                });
            }
        }
    }
    rows.extend(means);
    Ok(CvReport {
        splits,
        rows,
        timings,
    })
}
