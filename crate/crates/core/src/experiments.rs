//! Desk-scale measurement campaigns for the tunneling asymptotics.
//!
//! A campaign sweeps β over a grid of values, draws hitting-time samples
//! per β, and summarizes three finite-β signatures of the e^{βΓ} law:
//!
//! - the least-squares slope of log(mean τ) against β, which approaches
//!   Γ = min{K,2L}+1 (up to an intercept; the fit is on log-mean vs β, so
//!   finite-β prefactors shift the intercept, not the slope);
//! - the one-sample KS distance of τ/mean(τ) from the unit-mean
//!   exponential at the largest β, where the limit law applies;
//! - the ratio E τ_a→b / E τ_a→{b,c}, equal to 2 at every β by the
//!   geometric-sum representation of the single-target tunneling time.
//!
//! Campaigns are deterministic: per-sample seeds derive from
//! (seed, β index, sample index), so re-running a spec reproduces the raw
//! sample files byte for byte.

use crate::config::stable_config;
use crate::dynamics::{
    run_batch, sample_nested_hitting, derive_rng, DynamicsParams, SampleOutcome, RNG_ID,
};
use crate::lattice::{Component, Grid, GridSpec, COMPONENTS};
use crate::stats;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("betas must be a strictly increasing nonempty list")]
    BadBetas,
    #[error("campaigns need at least 100 samples per beta, got {0}")]
    TooFewSamples(usize),
    #[error("target set must not contain the start state")]
    TargetContainsStart,
    #[error("window checks need a two-state target set")]
    WindowNeedsPair,
    #[error("eps must be positive")]
    BadEps,
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Target selector mirroring the CLI grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetSpec {
    /// One named stable configuration.
    Single(Component),
    /// The pair {b, c}.
    PairBC,
    /// Both stable configurations other than the start.
    OthersOfStart,
}

impl TargetSpec {
    pub fn resolve(self, start: Component) -> Vec<Component> {
        match self {
            TargetSpec::Single(c) => vec![c],
            TargetSpec::PairBC => vec![Component::B, Component::C],
            TargetSpec::OthersOfStart => {
                COMPONENTS.into_iter().filter(|&c| c != start).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub grid: GridSpec,
    pub betas: Vec<f64>,
    pub samples_per_beta: usize,
    pub start: Component,
    pub target: TargetSpec,
    pub seed: u64,
    pub cap: u64,
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<(), CampaignError> {
        GridSpec::new(self.grid.k, self.grid.l)?;
        if self.betas.is_empty() || self.betas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CampaignError::BadBetas);
        }
        if self.samples_per_beta < 100 {
            return Err(CampaignError::TooFewSamples(self.samples_per_beta));
        }
        if self.target.resolve(self.start).contains(&self.start) {
            return Err(CampaignError::TargetContainsStart);
        }
        Ok(())
    }
}

/// Per-β sample summary; raw samples ride along for emission and tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaSummary {
    pub beta: f64,
    pub n_samples: usize,
    pub n_truncated: usize,
    pub mean: f64,
    pub variance: f64,
    /// (steps, hit-state letter) per completed sample, in sample order.
    pub raw: Vec<(u64, char)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignResult {
    pub schema_version: u32,
    pub spec: CampaignSpec,
    pub gamma: i64,
    pub per_beta: Vec<BetaSummary>,
    /// Least-squares slope of log(mean τ) vs β, with standard error
    /// (standard error needs at least three β points).
    pub slope: f64,
    pub slope_se: Option<f64>,
    /// False when any β lost more than 5% of samples to truncation.
    pub slope_reliable: bool,
    /// KS distance of τ/mean from Exp(1) at the largest β.
    pub ks_stat_max_beta: f64,
    /// Asymptotic α=0.01 critical value for that sample size.
    pub ks_critical_001: f64,
    /// Mean single-target over pair-target hitting time at the largest β
    /// (only when the campaign target is a pair).
    pub ratio_single_over_pair: Option<f64>,
    pub rng_id: String,
    pub version: String,
}

fn summarize(beta: f64, outcomes: &[SampleOutcome], target_letters: &[char]) -> BetaSummary {
    let mut raw = Vec::with_capacity(outcomes.len());
    let mut n_truncated = 0usize;
    for o in outcomes {
        match o.sample() {
            Some(s) => raw.push((s.steps, target_letters[s.hit])),
            None => n_truncated += 1,
        }
    }
    let times: Vec<f64> = raw.iter().map(|&(t, _)| t as f64).collect();
    BetaSummary {
        beta,
        n_samples: outcomes.len(),
        n_truncated,
        mean: stats::mean(&times),
        variance: stats::variance(&times),
        raw,
    }
}

/// Runs the full β sweep. Deterministic under the spec's seed.
pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignResult, CampaignError> {
    spec.validate()?;
    let grid = Grid::new(spec.grid)?;
    let start = stable_config(&grid, spec.start);
    let target_components = spec.target.resolve(spec.start);
    let targets: Vec<_> = target_components
        .iter()
        .map(|&c| stable_config(&grid, c))
        .collect();
    let target_letters: Vec<char> = target_components.iter().map(|c| c.letter()).collect();

    let mut per_beta = Vec::with_capacity(spec.betas.len());
    for (bi, &beta) in spec.betas.iter().enumerate() {
        let params = DynamicsParams::new(beta, spec.seed)?;
        let outcomes = run_batch(
            &grid,
            &start,
            &targets,
            params,
            bi as u64,
            spec.samples_per_beta,
            spec.cap,
        )?;
        per_beta.push(summarize(beta, &outcomes, &target_letters));
    }

    // Slope of log(mean) vs β over the reliable points.
    let slope_reliable = per_beta
        .iter()
        .all(|s| (s.n_truncated as f64) <= 0.05 * s.n_samples as f64);
    let xs: Vec<f64> = per_beta.iter().map(|s| s.beta).collect();
    let ys: Vec<f64> = per_beta.iter().map(|s| s.mean.ln()).collect();
    let (slope, _, slope_se_raw) = stats::linear_fit(&xs, &ys);
    let slope_se = slope_se_raw.is_finite().then_some(slope_se_raw);

    // Exponentiality at the largest β.
    let last = per_beta.last().expect("betas nonempty");
    let rescaled: Vec<f64> = last
        .raw
        .iter()
        .map(|&(t, _)| t as f64 / last.mean)
        .collect();
    let ks_stat_max_beta = stats::ks_statistic_exp1(&rescaled);
    let ks_critical_001 = stats::ks_critical_value(rescaled.len(), 0.01);

    // Geometric-sum ratio at the largest β, for pair targets.
    let ratio_single_over_pair = if targets.len() == 2 {
        let beta = *spec.betas.last().unwrap();
        let params = DynamicsParams::new(beta, spec.seed)?;
        let single = run_batch(
            &grid,
            &start,
            &targets[..1],
            params,
            1_000 + spec.betas.len() as u64,
            spec.samples_per_beta,
            spec.cap,
        )?;
        let s = summarize(beta, &single, &target_letters[..1]);
        Some(s.mean / last.mean)
    } else {
        None
    };

    Ok(CampaignResult {
        schema_version: 1,
        spec: spec.clone(),
        gamma: spec.grid.gamma(),
        per_beta,
        slope,
        slope_se,
        slope_reliable,
        ks_stat_max_beta,
        ks_critical_001,
        ratio_single_over_pair,
        rng_id: RNG_ID.to_string(),
        version: crate::VERSION.to_string(),
    })
}

/// Per-β fraction of coupled samples inside the probability window
/// [e^{β(Γ−ε)}, e^{β(Γ+ε)}]: the wide-target time must clear the lower
/// edge and the single-target time stay under the upper one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowReport {
    pub schema_version: u32,
    pub eps: f64,
    pub gamma: i64,
    pub betas: Vec<f64>,
    pub fractions: Vec<f64>,
    /// Fraction at the largest β exceeds the fraction at the smallest.
    pub increasing_trend: bool,
    /// Coupled samples with τ_single < τ_pair (must be zero).
    pub ordering_violations: usize,
}

pub fn probability_window_check(
    spec: &CampaignSpec,
    eps: f64,
) -> Result<WindowReport, CampaignError> {
    spec.validate()?;
    if eps <= 0.0 {
        return Err(CampaignError::BadEps);
    }
    let target_components = spec.target.resolve(spec.start);
    if target_components.len() != 2 {
        return Err(CampaignError::WindowNeedsPair);
    }
    let grid = Grid::new(spec.grid)?;
    let start = stable_config(&grid, spec.start);
    let wide: Vec<_> = target_components
        .iter()
        .map(|&c| stable_config(&grid, c))
        .collect();
    let narrow = vec![wide[0].clone()];
    let gamma = spec.grid.gamma() as f64;

    let mut fractions = Vec::with_capacity(spec.betas.len());
    let mut ordering_violations = 0usize;
    for (bi, &beta) in spec.betas.iter().enumerate() {
        use rayon::prelude::*;
        let results: Vec<Option<(u64, u64)>> = (0..spec.samples_per_beta as u64)
            .into_par_iter()
            .map(|i| {
                let rng = derive_rng(spec.seed, 2_000 + bi as u64, i);
                sample_nested_hitting(&grid, &start, &wide, &narrow, beta, rng, spec.cap)
                    .expect("validated inputs")
            })
            .collect();
        let lo = (beta * (gamma - eps)).exp();
        let hi = (beta * (gamma + eps)).exp();
        let mut inside = 0usize;
        let mut total = 0usize;
        for r in results.into_iter().flatten() {
            let (tau_pair, tau_single) = r;
            if tau_single < tau_pair {
                ordering_violations += 1;
            }
            total += 1;
            if tau_pair as f64 >= lo && tau_single as f64 <= hi {
                inside += 1;
            }
        }
        fractions.push(inside as f64 / total.max(1) as f64);
    }
    let increasing_trend = fractions.last() > fractions.first();
    Ok(WindowReport {
        schema_version: 1,
        eps,
        gamma: spec.grid.gamma(),
        betas: spec.betas.clone(),
        fractions,
        increasing_trend,
        ordering_violations,
    })
}

/// Emission formats for campaign summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    MarkdownTable,
}

/// Writes the raw samples CSV (reproducible byte-for-byte under the same
/// spec) plus the summary in the requested formats; returns the files
/// written.
pub fn emit_report(
    result: &CampaignResult,
    dir: &Path,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>, CampaignError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    // Raw samples: a '#' metadata line, then one row per sample.
    let raw_path = dir.join("raw_samples.csv");
    {
        let meta = serde_json::json!({
            "grid": format!("{}", result.spec.grid),
            "K": result.spec.grid.k,
            "L": result.spec.grid.l,
            "seed": result.spec.seed,
            "rng": result.rng_id,
            "version": result.version,
            "start": result.spec.start.letter().to_string(),
        });
        let mut f = std::fs::File::create(&raw_path)?;
        writeln!(f, "# {meta}")?;
        writeln!(f, "beta,sample_id,steps,hit_state")?;
        for s in &result.per_beta {
            for (i, &(steps, hit)) in s.raw.iter().enumerate() {
                writeln!(f, "{},{},{},{}", s.beta, i, steps, hit)?;
            }
        }
    }
    written.push(raw_path);

    for fmt in formats {
        match fmt {
            ReportFormat::Json => {
                let path = dir.join("summary.json");
                let mut trimmed = result.clone();
                for s in &mut trimmed.per_beta {
                    s.raw.clear();
                }
                std::fs::write(&path, serde_json::to_string_pretty(&trimmed)?.as_bytes())?;
                written.push(path);
            }
            ReportFormat::Csv => {
                let path = dir.join("summary.csv");
                let mut f = std::fs::File::create(&path)?;
                writeln!(f, "beta,n_samples,n_truncated,mean,variance")?;
                for s in &result.per_beta {
                    writeln!(
                        f,
                        "{},{},{},{},{}",
                        s.beta, s.n_samples, s.n_truncated, s.mean, s.variance
                    )?;
                }
                written.push(path);
            }
            ReportFormat::MarkdownTable => {
                let path = dir.join("summary.md");
                let mut f = std::fs::File::create(&path)?;
                writeln!(f, "| quantity | value |")?;
                writeln!(f, "|---|---|")?;
                writeln!(f, "| grid | {} |", result.spec.grid)?;
                writeln!(f, "| gamma | {} |", result.gamma)?;
                match result.slope_se {
                    Some(se) => writeln!(
                        f,
                        "| slope of log mean tau vs beta | {:.4} ± {:.4} |",
                        result.slope, se
                    )?,
                    None => writeln!(
                        f,
                        "| slope of log mean tau vs beta | {:.4} |",
                        result.slope
                    )?,
                }
                writeln!(
                    f,
                    "| KS(tau/mean, Exp(1)) at beta={} | {:.4} (crit {:.4}) |",
                    result.spec.betas.last().unwrap(),
                    result.ks_stat_max_beta,
                    result.ks_critical_001
                )?;
                if let Some(r) = result.ratio_single_over_pair {
                    writeln!(f, "| mean ratio single/pair target | {r:.4} |")?;
                }
                for s in &result.per_beta {
                    writeln!(
                        f,
                        "| mean tau at beta={} | {:.2} ({} samples, {} truncated) |",
                        s.beta, s.mean, s.n_samples, s.n_truncated
                    )?;
                }
                written.push(path);
            }
        }
    }
    Ok(written)
}

impl From<serde_json::Error> for CampaignError {
    fn from(e: serde_json::Error) -> Self {
        CampaignError::Io(std::io::Error::other(e))
    }
}
