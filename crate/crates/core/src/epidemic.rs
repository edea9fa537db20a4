//! Stochastic influenza transmission over a season plan: natural history,
//! viral-load-proportional infectiousness, escape-probability transmission,
//! symptomatic withdrawal, and the targeted-antiviral-prophylaxis and
//! grade-closure interventions.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contact_network::ContactNetwork;
use crate::error::{Error, Result};
use crate::population::{Roster, GRADE_COUNT};
use crate::rng::stream_rng;
use crate::season::SeasonPlan;

/// An outbreak is an epidemic when more than this many students become
/// infected.
pub const EPIDEMIC_THRESHOLD: u32 = 200;
/// Infected students stay infectious exactly this many days.
pub const INFECTIOUS_DAYS: u32 = 6;
/// Number of bundled viral-load curves.
pub const CURVE_COUNT: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalHistoryParams {
    /// P(incubation = 1, 2, 3 days).
    pub incubation_pmf: [f64; 3],
    pub symptomatic_prob: f64,
    /// Symptomatic cases are this many times as infectious.
    pub symptomatic_multiplier: f64,
    /// P(withdraw on symptom day 1, 2, 3, never), applied to symptomatic
    /// students as stated; asymptomatic students never withdraw.
    pub withdrawal_pmf: [f64; 4],
    /// Mean per-10-minute transmission probability (p-bar).
    pub mean_unit_transmission: f64,
}

impl NaturalHistoryParams {
    pub fn with_p_bar(mean_unit_transmission: f64) -> Self {
        NaturalHistoryParams {
            mean_unit_transmission,
            ..Default::default()
        }
    }
}

impl Default for NaturalHistoryParams {
    fn default() -> Self {
        NaturalHistoryParams {
            incubation_pmf: [0.30, 0.50, 0.20],
            symptomatic_prob: 0.67,
            symptomatic_multiplier: 2.0,
            withdrawal_pmf: [0.203, 0.397, 0.15, 0.25],
            mean_unit_transmission: 0.003,
        }
    }
}

/// Per-day relative viral loads over the six infectious days, one curve per
/// challenge-study patient. Curves are normalized to mean 1 on load.
#[derive(Debug, Clone, PartialEq)]
pub struct ViralLoadCurves {
    curves: Vec<[f64; INFECTIOUS_DAYS as usize]>,
}

impl ViralLoadCurves {
    pub fn new(curves: Vec<[f64; INFECTIOUS_DAYS as usize]>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::invalid("need at least one viral-load curve"));
        }
        for (i, c) in curves.iter().enumerate() {
            if c.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::validation(format!("curve {i} has a negative load")));
            }
            if c.iter().all(|&v| v == 0.0) {
                return Err(Error::validation(format!("curve {i} is all zero")));
            }
        }
        Ok(ViralLoadCurves { curves })
    }

    /// The bundled six-patient stand-in curves.
    pub fn bundled() -> Self {
        Self::parse(include_str!("../data/viral_load_curves.txt")).expect("bundled curves parse")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn parse(text: &str) -> Result<Self> {
        let mut curves = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("bad load value in {line:?}"),
                })?;
            if values.len() != INFECTIOUS_DAYS as usize {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {INFECTIOUS_DAYS} loads, got {}", values.len()),
                });
            }
            let mut curve = [0.0; INFECTIOUS_DAYS as usize];
            curve.copy_from_slice(&values);
            curves.push(curve);
        }
        Self::new(curves)
    }

    pub fn count(&self) -> usize {
        self.curves.len()
    }

    pub fn load_on(&self, curve_index: u8, infectious_day: u32) -> f64 {
        self.curves[curve_index as usize][infectious_day as usize]
    }

    pub fn mean_load(&self) -> f64 {
        let total: f64 = self.curves.iter().flat_map(|c| c.iter()).sum();
        total / (self.curves.len() * INFECTIOUS_DAYS as usize) as f64
    }
}

/// One infected student's disease timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PersonCourse {
    pub infection_day: u32,
    /// Days from infection to symptom onset / infectiousness (1..=3).
    pub incubation: u8,
    pub symptomatic: bool,
    pub curve_index: u8,
    /// Home from symptom day k (1..=3); None means never withdraws.
    pub withdrawal_symptom_day: Option<u8>,
}

impl PersonCourse {
    /// First infectious day; symptoms appear the same day when symptomatic.
    pub fn onset_day(&self) -> u32 {
        self.infection_day + self.incubation as u32
    }

    pub fn immune_day(&self) -> u32 {
        self.onset_day() + INFECTIOUS_DAYS
    }

    pub fn withdrawal_day(&self) -> Option<u32> {
        self.withdrawal_symptom_day
            .map(|k| self.onset_day() + k as u32 - 1)
    }
}

fn sample_pmf(pmf: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = pmf.iter().sum();
    let mut target = rng.gen::<f64>() * total;
    for (i, &p) in pmf.iter().enumerate() {
        if target < p {
            return i;
        }
        target -= p;
    }
    pmf.len() - 1
}

/// Draw a natural-history course. `symptomatic_prob` is passed explicitly
/// so antiviral pathogenicity reduction can scale it for students infected
/// while on prophylaxis.
pub fn sample_course(
    params: &NaturalHistoryParams,
    curves: &ViralLoadCurves,
    infection_day: u32,
    symptomatic_prob: f64,
    rng: &mut impl Rng,
) -> PersonCourse {
    let incubation = sample_pmf(&params.incubation_pmf, rng) as u8 + 1;
    let symptomatic = rng.gen::<f64>() < symptomatic_prob;
    let curve_index = rng.gen_range(0..curves.count()) as u8;
    let withdrawal_symptom_day = if symptomatic {
        match sample_pmf(&params.withdrawal_pmf, rng) {
            3 => None,
            k => Some(k as u8 + 1),
        }
    } else {
        None
    };
    PersonCourse {
        infection_day,
        incubation,
        symptomatic,
        curve_index,
        withdrawal_symptom_day,
    }
}

/// Per-10-minute transmission probability of an infectious person on a
/// given day: scale * load * symptomatic multiplier * treatment factor,
/// clamped to [0, 1]. Zero outside the infectious window.
pub fn infectiousness(
    course: &PersonCourse,
    params: &NaturalHistoryParams,
    curves: &ViralLoadCurves,
    day: u32,
    scale: f64,
    treated: bool,
    ave_i: f64,
) -> f64 {
    let onset = course.onset_day();
    if day < onset || day >= course.immune_day() {
        return 0.0;
    }
    let mut p = scale * curves.load_on(course.curve_index, day - onset);
    if course.symptomatic {
        p *= params.symptomatic_multiplier;
    }
    if treated {
        p *= 1.0 - ave_i;
    }
    p.clamp(0.0, 1.0)
}

/// Calibration constant making the expectation of the per-unit probability
/// over curve choice, symptomatic status and infectious day equal p-bar:
/// scale = p_bar / (mean load * E[symptomatic multiplier]).
pub fn calibrate_scale(params: &NaturalHistoryParams, curves: &ViralLoadCurves) -> Result<f64> {
    let mean_load = curves.mean_load();
    if mean_load <= 0.0 {
        return Err(Error::invalid("viral-load curves have zero mean load"));
    }
    let mean_multiplier = params.symptomatic_prob * params.symptomatic_multiplier
        + (1.0 - params.symptomatic_prob);
    Ok(params.mean_unit_transmission / (mean_load * mean_multiplier))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterventionKind {
    None,
    Tap,
    GradeClosure,
}

impl std::fmt::Display for InterventionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InterventionKind::None => "none",
            InterventionKind::Tap => "tap",
            InterventionKind::GradeClosure => "grade_closure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterventionConfig {
    pub kind: InterventionKind,
    /// Antiviral efficacy against susceptibility.
    pub ave_s: f64,
    /// Antiviral efficacy against infectiousness.
    pub ave_i: f64,
    /// Antiviral efficacy against pathogenicity.
    pub ave_p: f64,
    pub treatment_days: u8,
    pub prophylaxis_days: u8,
    /// Fraction of contacts an index case reports for prophylaxis.
    pub reporting_fraction: f64,
}

impl InterventionConfig {
    pub fn none() -> Self {
        InterventionConfig {
            kind: InterventionKind::None,
            ..Self::tap()
        }
    }

    pub fn tap() -> Self {
        InterventionConfig {
            kind: InterventionKind::Tap,
            ave_s: 0.63,
            ave_i: 0.15,
            ave_p: 0.56,
            treatment_days: 5,
            prophylaxis_days: 10,
            reporting_fraction: 1.0,
        }
    }

    pub fn grade_closure() -> Self {
        InterventionConfig {
            kind: InterventionKind::GradeClosure,
            ..Self::tap()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Susceptible,
    Latent,
    Infectious,
    Immune,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DayRecord {
    pub day: u32,
    pub susceptible: u32,
    pub latent: u32,
    pub infectious: u32,
    pub immune: u32,
    pub withdrawn: u32,
    pub new_infections: u32,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub records: Vec<DayRecord>,
}

impl Trajectory {
    /// Earliest day attaining the maximum daily infectious count; None when
    /// no one was ever infectious.
    pub fn peak_date(&self) -> Option<u32> {
        let max = self.records.iter().map(|r| r.infectious).max()?;
        if max == 0 {
            return None;
        }
        self.records
            .iter()
            .find(|r| r.infectious == max)
            .map(|r| r.day)
    }

    pub fn final_size(&self) -> u32 {
        self.records.iter().map(|r| r.new_infections).sum()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(
            f,
            "day,susceptible,latent,infectious,immune,withdrawn,new_infections"
        )?;
        for r in &self.records {
            writeln!(
                f,
                "{},{},{},{},{},{},{}",
                r.day, r.susceptible, r.latent, r.infectious, r.immune, r.withdrawn, r.new_infections
            )?;
        }
        f.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub epidemic: bool,
    pub final_size: u32,
    pub peak_date: Option<u32>,
}

impl OutcomeSummary {
    pub fn new(final_size: u32, peak_date: Option<u32>) -> Self {
        OutcomeSummary {
            epidemic: final_size > EPIDEMIC_THRESHOLD,
            final_size,
            peak_date,
        }
    }
}

/// Full epidemic state, advanced one school day at a time.
pub struct EpidemicState {
    pub day: u32,
    status: Vec<Status>,
    courses: Vec<Option<PersonCourse>>,
    withdrawn: Vec<bool>,
    closed_grades: [bool; GRADE_COUNT],
    treatment_days_left: Vec<u8>,
    prophylaxis_days_left: Vec<u8>,
    grade_index: Vec<u8>,
    cumulative_infections: u32,
    /// Students whose symptoms appeared on the current day; interventions
    /// fire the following day.
    today_onsets: Vec<u32>,
    yesterday_onsets: Vec<u32>,
    trajectory: Trajectory,
    escape_scratch: Vec<f64>,
}

impl EpidemicState {
    /// State at day 0 with a single latent index case.
    pub fn seeded(roster: &Roster, index_case: u32, course: PersonCourse) -> Self {
        let n = roster.len();
        let mut status = vec![Status::Susceptible; n];
        let mut courses = vec![None; n];
        status[index_case as usize] = Status::Latent;
        courses[index_case as usize] = Some(course);
        let mut state = EpidemicState {
            day: 0,
            status,
            courses,
            withdrawn: vec![false; n],
            closed_grades: [false; GRADE_COUNT],
            treatment_days_left: vec![0; n],
            prophylaxis_days_left: vec![0; n],
            grade_index: roster
                .students()
                .iter()
                .map(|s| s.grade_index() as u8)
                .collect(),
            cumulative_infections: 1,
            today_onsets: Vec::new(),
            yesterday_onsets: Vec::new(),
            trajectory: Trajectory::default(),
            escape_scratch: vec![1.0; n],
        };
        state.record_day(1);
        state
    }

    pub fn n(&self) -> usize {
        self.status.len()
    }

    pub fn status(&self, i: usize) -> Status {
        self.status[i]
    }

    pub fn counts(&self) -> (u32, u32, u32, u32) {
        let mut c = (0, 0, 0, 0);
        for s in &self.status {
            match s {
                Status::Susceptible => c.0 += 1,
                Status::Latent => c.1 += 1,
                Status::Infectious => c.2 += 1,
                Status::Immune => c.3 += 1,
            }
        }
        c
    }

    pub fn active_infections(&self) -> u32 {
        let (_, latent, infectious, _) = self.counts();
        latent + infectious
    }

    pub fn cumulative_infections(&self) -> u32 {
        self.cumulative_infections
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.trajectory
    }

    pub fn prophylaxis_days_left(&self, i: usize) -> u8 {
        self.prophylaxis_days_left[i]
    }

    pub fn is_withdrawn(&self, i: usize) -> bool {
        self.withdrawn[i]
    }

    pub fn close_all_grades(&mut self) {
        self.closed_grades = [true; GRADE_COUNT];
    }

    fn record_day(&mut self, new_infections: u32) {
        let (s, l, i, r) = self.counts();
        let withdrawn = self.withdrawn.iter().filter(|&&w| w).count() as u32;
        self.trajectory.records.push(DayRecord {
            day: self.day,
            susceptible: s,
            latent: l,
            infectious: i,
            immune: r,
            withdrawn,
            new_infections,
        });
    }
}

/// Escape probability of one susceptible from one infectious partner:
/// (1 - p)^units.
pub fn escape_probability(unit_probability: f64, units: u8) -> f64 {
    (1.0 - unit_probability).powi(units as i32)
}

/// One day's transmission over the network. Returns the newly infected,
/// already entered into the state as latent.
pub fn transmission_step(
    state: &mut EpidemicState,
    network: &ContactNetwork,
    params: &NaturalHistoryParams,
    curves: &ViralLoadCurves,
    scale: f64,
    intervention: &InterventionConfig,
    rng: &mut impl Rng,
) -> Vec<u32> {
    let day = state.day;
    let mut touched: Vec<u32> = Vec::new();
    for i in 0..state.n() {
        if state.status[i] != Status::Infectious
            || state.withdrawn[i]
            || state.closed_grades[state.grade_index[i] as usize]
        {
            continue;
        }
        let course = state.courses[i].expect("infectious student has a course");
        let p_i = infectiousness(
            &course,
            params,
            curves,
            day,
            scale,
            state.treatment_days_left[i] > 0,
            intervention.ave_i,
        );
        if p_i <= 0.0 {
            continue;
        }
        for &(j, units) in network.partners(i) {
            let j_idx = j as usize;
            if state.status[j_idx] != Status::Susceptible
                || state.closed_grades[state.grade_index[j_idx] as usize]
            {
                continue;
            }
            // prophylaxis scales the per-unit acquisition probability
            let p_eff = if state.prophylaxis_days_left[j_idx] > 0 {
                (p_i * (1.0 - intervention.ave_s)).clamp(0.0, 1.0)
            } else {
                p_i
            };
            if state.escape_scratch[j_idx] == 1.0 {
                touched.push(j);
            }
            state.escape_scratch[j_idx] *= escape_probability(p_eff, units);
        }
    }
    touched.sort_unstable();
    // escape factors of exactly 1.0 (underflowed p) can enqueue twice
    touched.dedup();
    let mut newly_infected = Vec::new();
    for &j in &touched {
        let j_idx = j as usize;
        let escape = state.escape_scratch[j_idx];
        state.escape_scratch[j_idx] = 1.0;
        if rng.gen::<f64>() < 1.0 - escape {
            let on_antivirals =
                state.prophylaxis_days_left[j_idx] > 0 || state.treatment_days_left[j_idx] > 0;
            let symptomatic_prob = if on_antivirals {
                params.symptomatic_prob * (1.0 - intervention.ave_p)
            } else {
                params.symptomatic_prob
            };
            let course = sample_course(params, curves, day, symptomatic_prob, rng);
            state.status[j_idx] = Status::Latent;
            state.courses[j_idx] = Some(course);
            state.cumulative_infections += 1;
            newly_infected.push(j);
        }
    }
    newly_infected
}

/// Treat yesterday's symptom onsets and prophylax their reported contacts
/// from the onset day's network. Antiviral courses reset rather than stack.
pub fn apply_tap(
    state: &mut EpidemicState,
    onset_network: &ContactNetwork,
    intervention: &InterventionConfig,
    rng: &mut impl Rng,
) {
    let onsets = std::mem::take(&mut state.yesterday_onsets);
    for &s in &onsets {
        state.treatment_days_left[s as usize] = intervention.treatment_days;
        for &(j, _) in onset_network.partners(s as usize) {
            if intervention.reporting_fraction < 1.0
                && rng.gen::<f64>() >= intervention.reporting_fraction
            {
                continue;
            }
            let j_idx = j as usize;
            state.prophylaxis_days_left[j_idx] = intervention.prophylaxis_days;
            // pathogenicity reduction for already-infected contacts whose
            // symptoms have not yet appeared; no retroactive effect
            if state.status[j_idx] == Status::Latent {
                if let Some(course) = &mut state.courses[j_idx] {
                    if course.symptomatic && rng.gen::<f64>() >= 1.0 - intervention.ave_p {
                        course.symptomatic = false;
                        course.withdrawal_symptom_day = None;
                    }
                }
            }
        }
    }
    state.yesterday_onsets = onsets;
}

/// Close the grades of yesterday's symptom onsets for the rest of the
/// season.
pub fn apply_grade_closure(state: &mut EpidemicState) {
    let onsets = std::mem::take(&mut state.yesterday_onsets);
    for &s in &onsets {
        state.closed_grades[state.grade_index[s as usize] as usize] = true;
    }
    state.yesterday_onsets = onsets;
}

/// Advance one school day: status transitions, withdrawal, interventions
/// triggered by yesterday's onsets, transmission, antiviral decrements,
/// daily bookkeeping.
pub fn advance_day(
    state: &mut EpidemicState,
    today_network: &ContactNetwork,
    yesterday_network: Option<&ContactNetwork>,
    params: &NaturalHistoryParams,
    curves: &ViralLoadCurves,
    scale: f64,
    intervention: &InterventionConfig,
    rng: &mut impl Rng,
) {
    state.day += 1;
    let day = state.day;
    state.yesterday_onsets = std::mem::take(&mut state.today_onsets);

    // (1) status transitions
    for i in 0..state.n() {
        if let Some(course) = state.courses[i] {
            match state.status[i] {
                Status::Latent if course.onset_day() == day => {
                    state.status[i] = Status::Infectious;
                    if course.symptomatic {
                        state.today_onsets.push(i as u32);
                    }
                }
                Status::Infectious if course.immune_day() == day => {
                    state.status[i] = Status::Immune;
                    state.withdrawn[i] = false;
                }
                _ => {}
            }
        }
    }

    // (2) withdrawal updates
    for i in 0..state.n() {
        if state.status[i] == Status::Infectious {
            if let Some(course) = state.courses[i] {
                if course.withdrawal_day() == Some(day) {
                    state.withdrawn[i] = true;
                }
            }
        }
    }

    // (3) interventions triggered by yesterday's symptom onsets
    match intervention.kind {
        InterventionKind::Tap => {
            if let Some(net) = yesterday_network {
                apply_tap(state, net, intervention, rng);
            }
        }
        InterventionKind::GradeClosure => apply_grade_closure(state),
        InterventionKind::None => {}
    }

    // (4) transmission on today's network
    let newly_infected = transmission_step(
        state,
        today_network,
        params,
        curves,
        scale,
        intervention,
        rng,
    );

    // (5) antiviral day counters
    for d in state
        .treatment_days_left
        .iter_mut()
        .chain(state.prophylaxis_days_left.iter_mut())
    {
        *d = d.saturating_sub(1);
    }

    // (6) daily bookkeeping
    state.record_day(newly_infected.len() as u32);
}

/// Run one outbreak from a uniformly random index case until no infected
/// students remain (bounded by the plan's season length). Pure function of
/// (plan, params, curves, intervention, seed).
pub fn run_outbreak(
    roster: &Roster,
    plan: &SeasonPlan,
    params: &NaturalHistoryParams,
    curves: &ViralLoadCurves,
    intervention: &InterventionConfig,
    seed: u64,
) -> Result<(Trajectory, OutcomeSummary)> {
    let scale = calibrate_scale(params, curves)?;
    let mut rng = stream_rng(seed, &[0x4f55]); // outbreak stream
    let index_case = rng.gen_range(0..roster.len() as u32);
    let course = sample_course(params, curves, 0, params.symptomatic_prob, &mut rng);
    let mut state = EpidemicState::seeded(roster, index_case, course);

    let mut yesterday: Option<Arc<ContactNetwork>> = None;
    while state.active_infections() > 0 && state.day < plan.season_length() {
        let today = plan.network(state.day + 1);
        advance_day(
            &mut state,
            &today,
            yesterday.as_deref(),
            params,
            curves,
            scale,
            intervention,
            &mut rng,
        );
        yesterday = Some(today);
    }
    let final_size = state.cumulative_infections();
    let trajectory = state.into_trajectory();
    let peak = trajectory.peak_date();
    Ok((trajectory, OutcomeSummary::new(final_size, peak)))
}
