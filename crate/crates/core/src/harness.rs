//! Experiment orchestration: scenario grids over variants, interventions
//! and transmission probabilities, Monte Carlo replication with bootstrap
//! parameter uncertainty, and tabular outputs.
//!
//! Uncertainty intervals are nested percentile bootstrap: the outer level
//! resamples bootstrap blocks (one survey resample each), the inner level
//! resamples outbreak outcomes within each drawn block, and the 2.5/97.5
//! percentiles of the resampled statistic are reported.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::epidemic::{
    run_outbreak, InterventionConfig, InterventionKind, NaturalHistoryParams, OutcomeSummary,
    ViralLoadCurves,
};
use crate::ergm::{simulate_friendship, ErgmCoefficients};
use crate::error::{Error, Result};
use crate::friendship::FriendshipNetwork;
use crate::population::{Roster, SurveySample};
use crate::rng::{derive_seed, stream_rng};
use crate::season::{make_season_plan, SeasonPlan, Variant};

const TAG_FRIENDSHIP: u64 = 0xF6;
const TAG_PLAN: u64 = 0x70;
const TAG_OUTBREAK: u64 = 0x6F;
const TAG_CI: u64 = 0xC1;
const TAG_DELTA: u64 = 0xD1;

/// Resample iterations for the percentile intervals.
const CI_RESAMPLES: usize = 2000;
const CI_LO: f64 = 0.025;
const CI_HI: f64 = 0.975;

fn default_reporting_fraction() -> f64 {
    1.0
}

fn default_cutoff() -> u32 {
    30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub variant: Variant,
    pub intervention: InterventionKind,
    pub p_bar_grid: Vec<f64>,
    /// Total outbreaks per grid point, distributed evenly over blocks.
    pub replicates: usize,
    /// Outer survey resamples; 1 means fixed parameters (no resampling).
    pub bootstrap_replicates: usize,
    pub season_length: u32,
    pub seed: u64,
    /// Fraction of contacts reported under TAP.
    #[serde(default = "default_reporting_fraction")]
    pub reporting_fraction: f64,
    /// Lunch-report censoring cutoff used when refitting.
    #[serde(default = "default_cutoff")]
    pub cutoff: u32,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if self.bootstrap_replicates < 1 {
            return Err(Error::invalid("bootstrap_replicates must be at least 1"));
        }
        if self.p_bar_grid.iter().any(|&p| !(0.0..1.0).contains(&p)) {
            return Err(Error::invalid("grid values must be in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.reporting_fraction) {
            return Err(Error::invalid("reporting fraction must be in [0, 1]"));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let spec: ScenarioSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    fn intervention_config(&self) -> InterventionConfig {
        let mut config = match self.intervention {
            InterventionKind::None => InterventionConfig::none(),
            InterventionKind::Tap => InterventionConfig::tap(),
            InterventionKind::GradeClosure => InterventionConfig::grade_closure(),
        };
        config.reporting_fraction = self.reporting_fraction;
        config
    }
}

/// Immutable inputs shared by every replicate.
pub struct ExperimentInputs {
    pub roster: Roster,
    /// Preprocessed survey driving the degree-model fits.
    pub survey: SurveySample,
    pub coefficients: ErgmCoefficients,
    pub curves: ViralLoadCurves,
    /// Supplied friendship network; simulated from the coefficients when
    /// absent.
    pub friendship: Option<Arc<FriendshipNetwork>>,
}

/// One outbreak's outcome within a bootstrap block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDraw {
    pub block: u32,
    pub epidemic: bool,
    pub final_size: u32,
    pub peak_date: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPointResult {
    pub p_bar: f64,
    pub p_epidemic: f64,
    pub p_epidemic_interval: Interval,
    pub final_size_mean: f64,
    pub final_size_interval: Interval,
    /// Conditional on epidemic occurrence; absent when no epidemics.
    pub peak_date_mean: Option<f64>,
    pub peak_date_interval: Option<Interval>,
    pub draws: Vec<OutcomeDraw>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub spec: ScenarioSpec,
    /// How the intervals were computed.
    pub uncertainty: String,
    pub points: Vec<GridPointResult>,
}

impl ScenarioResult {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = (sorted.len() - 1) as f64 * q;
    sorted[pos.round() as usize]
}

struct Stats {
    p_epidemic: f64,
    final_size_mean: f64,
    peak_date_mean: Option<f64>,
}

fn stats_of(draws: &[&OutcomeDraw]) -> Stats {
    let n = draws.len() as f64;
    let epidemics = draws.iter().filter(|d| d.epidemic).count();
    let final_total: f64 = draws.iter().map(|d| d.final_size as f64).sum();
    let peaks: Vec<f64> = draws
        .iter()
        .filter(|d| d.epidemic)
        .filter_map(|d| d.peak_date.map(|p| p as f64))
        .collect();
    Stats {
        p_epidemic: epidemics as f64 / n,
        final_size_mean: final_total / n,
        peak_date_mean: (!peaks.is_empty())
            .then(|| peaks.iter().sum::<f64>() / peaks.len() as f64),
    }
}

/// One nested resample: blocks with replacement, then outcomes with
/// replacement within each drawn block.
fn resample_draws<'a>(
    blocks: &'a [Vec<&'a OutcomeDraw>],
    rng: &mut impl Rng,
) -> Vec<&'a OutcomeDraw> {
    let mut out = Vec::new();
    for _ in 0..blocks.len() {
        let block = &blocks[rng.gen_range(0..blocks.len())];
        for _ in 0..block.len() {
            out.push(block[rng.gen_range(0..block.len())]);
        }
    }
    out
}

fn group_blocks(draws: &[OutcomeDraw], n_blocks: usize) -> Vec<Vec<&OutcomeDraw>> {
    let mut blocks: Vec<Vec<&OutcomeDraw>> = vec![Vec::new(); n_blocks];
    for d in draws {
        blocks[d.block as usize].push(d);
    }
    blocks.retain(|b| !b.is_empty());
    blocks
}

fn summarize_point(
    p_bar: f64,
    draws: Vec<OutcomeDraw>,
    n_blocks: usize,
    ci_seed: u64,
) -> GridPointResult {
    let all: Vec<&OutcomeDraw> = draws.iter().collect();
    let point = stats_of(&all);
    let blocks = group_blocks(&draws, n_blocks);
    let mut rng = stream_rng(ci_seed, &[]);
    let mut p_epi = Vec::with_capacity(CI_RESAMPLES);
    let mut size = Vec::with_capacity(CI_RESAMPLES);
    let mut peak = Vec::new();
    for _ in 0..CI_RESAMPLES {
        let sample = resample_draws(&blocks, &mut rng);
        let s = stats_of(&sample);
        p_epi.push(s.p_epidemic);
        size.push(s.final_size_mean);
        if let Some(p) = s.peak_date_mean {
            peak.push(p);
        }
    }
    p_epi.sort_unstable_by(f64::total_cmp);
    size.sort_unstable_by(f64::total_cmp);
    peak.sort_unstable_by(f64::total_cmp);
    GridPointResult {
        p_bar,
        p_epidemic: point.p_epidemic,
        p_epidemic_interval: Interval {
            lo: quantile(&p_epi, CI_LO),
            hi: quantile(&p_epi, CI_HI),
        },
        final_size_mean: point.final_size_mean,
        final_size_interval: Interval {
            lo: quantile(&size, CI_LO),
            hi: quantile(&size, CI_HI),
        },
        peak_date_mean: point.peak_date_mean,
        peak_date_interval: (point.peak_date_mean.is_some() && !peak.is_empty()).then(|| {
            Interval {
                lo: quantile(&peak, CI_LO),
                hi: quantile(&peak, CI_HI),
            }
        }),
        draws,
    }
}

/// Run the full scenario grid. For each bootstrap block the survey is
/// resampled and the degree models refit (skipped when
/// bootstrap_replicates = 1, giving fixed parameters); outbreak replicates
/// are distributed evenly over blocks. Deterministic in (spec, inputs)
/// regardless of worker count.
pub fn run_experiment(spec: &ScenarioSpec, inputs: &ExperimentInputs) -> Result<ScenarioResult> {
    spec.validate()?;
    let friendship = match &inputs.friendship {
        Some(net) => Arc::clone(net),
        None => {
            let mut rng = stream_rng(spec.seed, &[TAG_FRIENDSHIP]);
            Arc::new(simulate_friendship(
                &inputs.roster,
                &inputs.coefficients,
                &mut rng,
            ))
        }
    };
    if friendship.n() != inputs.roster.len() {
        return Err(Error::invalid("friendship network and roster sizes differ"));
    }
    let n_blocks = spec.bootstrap_replicates;
    let resample = n_blocks > 1;
    let plans: Vec<SeasonPlan> = (0..n_blocks)
        .map(|b| {
            make_season_plan(
                &inputs.roster,
                &friendship,
                &inputs.survey,
                spec.variant,
                spec.season_length,
                resample,
                spec.cutoff,
                derive_seed(spec.seed, &[TAG_PLAN, b as u64]),
            )
            .map_err(|e| Error::invalid(format!("season plan for block {b} failed: {e}")))
        })
        .collect::<Result<_>>()?;
    let intervention = spec.intervention_config();

    let mut points = Vec::with_capacity(spec.p_bar_grid.len());
    for (g, &p_bar) in spec.p_bar_grid.iter().enumerate() {
        let params = NaturalHistoryParams::with_p_bar(p_bar);
        let draws: Vec<OutcomeDraw> = (0..spec.replicates)
            .into_par_iter()
            .map(|r| {
                let block = r % n_blocks;
                let outbreak_seed =
                    derive_seed(spec.seed, &[TAG_OUTBREAK, g as u64, r as u64]);
                run_outbreak(
                    &inputs.roster,
                    &plans[block],
                    &params,
                    &inputs.curves,
                    &intervention,
                    outbreak_seed,
                )
                .map(|(_, outcome)| OutcomeDraw {
                    block: block as u32,
                    epidemic: outcome.epidemic,
                    final_size: outcome.final_size,
                    peak_date: outcome.peak_date,
                })
            })
            .collect::<Result<_>>()?;
        let ci_seed = derive_seed(spec.seed, &[TAG_CI, g as u64]);
        points.push(summarize_point(p_bar, draws, n_blocks, ci_seed));
    }
    Ok(ScenarioResult {
        spec: spec.clone(),
        uncertainty: format!(
            "nested percentile bootstrap: {CI_RESAMPLES} resamples of {} block(s), outcomes resampled within blocks, 2.5/97.5 percentiles",
            n_blocks
        ),
        points,
    })
}

/// Aggregate one outbreak outcome into a degenerate single-draw result,
/// used by the single-run CLI path.
pub fn single_outcome_result(spec: &ScenarioSpec, outcome: &OutcomeSummary) -> ScenarioResult {
    let draw = OutcomeDraw {
        block: 0,
        epidemic: outcome.epidemic,
        final_size: outcome.final_size,
        peak_date: outcome.peak_date,
    };
    ScenarioResult {
        spec: spec.clone(),
        uncertainty: "single outbreak; degenerate intervals".into(),
        points: vec![summarize_point(
            spec.p_bar_grid.first().copied().unwrap_or(0.0),
            vec![draw],
            1,
            derive_seed(spec.seed, &[TAG_CI, 0]),
        )],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub p_bar: f64,
    /// baseline minus comparison.
    pub p_epidemic_reduction: f64,
    pub p_epidemic_interval: Interval,
    pub final_size_reduction: f64,
    pub final_size_interval: Interval,
    /// Absent when either scenario had no epidemics.
    pub peak_date_shift: Option<f64>,
    pub peak_date_interval: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaTable {
    /// Reduction convention: baseline statistic minus comparison statistic.
    pub convention: String,
    pub rows: Vec<DeltaRow>,
}

/// Per-grid-point deltas of `comparison` against `baseline` with paired
/// nested-bootstrap intervals. Reductions are baseline minus comparison.
pub fn compare_scenarios(
    baseline: &ScenarioResult,
    comparison: &ScenarioResult,
) -> Result<DeltaTable> {
    if baseline.spec.p_bar_grid != comparison.spec.p_bar_grid {
        return Err(Error::invalid("scenario grids differ"));
    }
    let mut rows = Vec::with_capacity(baseline.points.len());
    for (g, (a, b)) in baseline.points.iter().zip(&comparison.points).enumerate() {
        let blocks_a = group_blocks(&a.draws, baseline.spec.bootstrap_replicates);
        let blocks_b = group_blocks(&b.draws, comparison.spec.bootstrap_replicates);
        let ci_seed = derive_seed(
            baseline.spec.seed ^ comparison.spec.seed.rotate_left(17),
            &[TAG_DELTA, g as u64],
        );
        let mut rng = stream_rng(ci_seed, &[]);
        let mut d_p = Vec::with_capacity(CI_RESAMPLES);
        let mut d_size = Vec::with_capacity(CI_RESAMPLES);
        let mut d_peak = Vec::new();
        for _ in 0..CI_RESAMPLES {
            let sa = stats_of(&resample_draws(&blocks_a, &mut rng));
            let sb = stats_of(&resample_draws(&blocks_b, &mut rng));
            d_p.push(sa.p_epidemic - sb.p_epidemic);
            d_size.push(sa.final_size_mean - sb.final_size_mean);
            if let (Some(pa), Some(pb)) = (sa.peak_date_mean, sb.peak_date_mean) {
                d_peak.push(pa - pb);
            }
        }
        d_p.sort_unstable_by(f64::total_cmp);
        d_size.sort_unstable_by(f64::total_cmp);
        d_peak.sort_unstable_by(f64::total_cmp);
        let peak_shift = match (a.peak_date_mean, b.peak_date_mean) {
            (Some(pa), Some(pb)) => Some(pa - pb),
            _ => None,
        };
        rows.push(DeltaRow {
            p_bar: a.p_bar,
            p_epidemic_reduction: a.p_epidemic - b.p_epidemic,
            p_epidemic_interval: Interval {
                lo: quantile(&d_p, CI_LO),
                hi: quantile(&d_p, CI_HI),
            },
            final_size_reduction: a.final_size_mean - b.final_size_mean,
            final_size_interval: Interval {
                lo: quantile(&d_size, CI_LO),
                hi: quantile(&d_size, CI_HI),
            },
            peak_date_shift: peak_shift,
            peak_date_interval: (peak_shift.is_some() && !d_peak.is_empty()).then(|| Interval {
                lo: quantile(&d_peak, CI_LO),
                hi: quantile(&d_peak, CI_HI),
            }),
        });
    }
    Ok(DeltaTable {
        convention: "reduction = baseline - comparison".into(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid(format!("unknown format {other:?}"))),
        }
    }
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Write a scenario result as CSV (summary table) or JSON (full result,
/// loadable with [`ScenarioResult::load`]).
pub fn emit_results(
    result: &ScenarioResult,
    format: OutputFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
            writeln!(
                f,
                "p_bar,variant,intervention,p_epidemic,p_epidemic_lo,p_epidemic_hi,final_size_mean,final_size_lo,final_size_hi,peak_date_mean,peak_date_lo,peak_date_hi"
            )?;
            for p in &result.points {
                writeln!(
                    f,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    p.p_bar,
                    result.spec.variant,
                    result.spec.intervention,
                    p.p_epidemic,
                    p.p_epidemic_interval.lo,
                    p.p_epidemic_interval.hi,
                    p.final_size_mean,
                    p.final_size_interval.lo,
                    p.final_size_interval.hi,
                    fmt_opt(p.peak_date_mean),
                    fmt_opt(p.peak_date_interval.map(|i| i.lo)),
                    fmt_opt(p.peak_date_interval.map(|i| i.hi)),
                )?;
            }
            f.flush()?;
        }
        OutputFormat::Json => {
            std::fs::write(path.as_ref(), serde_json::to_string_pretty(result)? + "\n")?;
        }
    }
    Ok(())
}
