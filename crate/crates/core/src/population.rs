//! Rosters, contact surveys, synthetic-data generators and survey
//! preprocessing/resampling.

use std::fmt;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::Beta;
use serde::{Deserialize, Serialize};

use crate::degree_model::sample_neg_binomial;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub const GRADE_MIN: u8 = 7;
pub const GRADE_MAX: u8 = 12;
pub const GRADE_COUNT: usize = 6;

/// Reports of break contacts above this are recoded down to it.
pub const BREAK_CONTACT_CAP: u32 = 20;
/// Records reporting more close friends than this are dropped.
pub const CLOSE_FRIEND_DROP_THRESHOLD: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Race {
    White,
    Black,
    Hispanic,
    Asian,
    Mixed,
    Missing,
}

impl Race {
    pub const ALL: [Race; 6] = [
        Race::White,
        Race::Black,
        Race::Hispanic,
        Race::Asian,
        Race::Mixed,
        Race::Missing,
    ];

    pub fn index(self) -> usize {
        Race::ALL.iter().position(|&r| r == self).unwrap()
    }
}

impl fmt::Display for Race {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Race::White => "white",
            Race::Black => "black",
            Race::Hispanic => "hispanic",
            Race::Asian => "asian",
            Race::Mixed => "mixed",
            Race::Missing => "missing",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum School {
    Main,
    Sister,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Student {
    pub id: u32,
    pub grade: u8,
    pub sex: Sex,
    pub race: Race,
    pub school: School,
}

impl Student {
    pub fn grade_index(&self) -> usize {
        (self.grade - GRADE_MIN) as usize
    }
}

/// School population. Ids are dense 0..n-1 after construction.
#[derive(Debug, Clone)]
pub struct Roster {
    students: Vec<Student>,
}

impl Roster {
    pub fn new(students: Vec<Student>) -> Result<Self> {
        if students.len() < 2 {
            return Err(Error::validation("roster needs at least 2 students"));
        }
        for (i, s) in students.iter().enumerate() {
            if s.id as usize != i {
                return Err(Error::validation(format!(
                    "student ids must be dense 0..n-1; found id {} at position {i}",
                    s.id
                )));
            }
            if !(GRADE_MIN..=GRADE_MAX).contains(&s.grade) {
                return Err(Error::validation(format!(
                    "student {} has grade {} outside {GRADE_MIN}..{GRADE_MAX}",
                    s.id, s.grade
                )));
            }
        }
        Ok(Roster { students })
    }

    pub fn len(&self) -> usize {
        self.students.len()
    }

    pub fn is_empty(&self) -> bool {
        self.students.is_empty()
    }

    pub fn students(&self) -> &[Student] {
        &self.students
    }

    pub fn student(&self, id: usize) -> &Student {
        &self.students[id]
    }

    /// Student ids for each grade, indexed by grade - 7.
    pub fn by_grade(&self) -> [Vec<u32>; GRADE_COUNT] {
        let mut grades: [Vec<u32>; GRADE_COUNT] = Default::default();
        for s in &self.students {
            grades[s.grade_index()].push(s.id);
        }
        grades
    }
}

fn parse_sex(s: &str) -> Option<Sex> {
    match s.trim().to_ascii_lowercase().as_str() {
        "male" | "m" => Some(Sex::Male),
        "female" | "f" => Some(Sex::Female),
        _ => None,
    }
}

fn parse_race(s: &str) -> Race {
    match s.trim().to_ascii_lowercase().as_str() {
        "white" => Race::White,
        "black" => Race::Black,
        "hispanic" => Race::Hispanic,
        "asian" => Race::Asian,
        "mixed" => Race::Mixed,
        // unknown strings fold into the missing category
        _ => Race::Missing,
    }
}

fn parse_school(s: &str) -> Option<School> {
    match s.trim().to_ascii_lowercase().as_str() {
        "main" => Some(School::Main),
        "sister" => Some(School::Sister),
        _ => None,
    }
}

/// Load a roster from CSV with header `id,grade,sex,race,school`.
///
/// Ids in the file must be unique; students are renumbered densely 0..n-1
/// in file order.
pub fn load_roster(path: impl AsRef<Path>) -> Result<Roster> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;

    let mut seen_ids = std::collections::HashSet::new();
    let mut students = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2; // header is line 1
        let record = record.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if record.len() != 5 {
            return Err(Error::Parse {
                line,
                message: format!("expected 5 columns, found {}", record.len()),
            });
        }
        let file_id: i64 = record[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad id {:?}", &record[0]),
        })?;
        if !seen_ids.insert(file_id) {
            return Err(Error::Validation(format!(
                "duplicate id {file_id} at line {line}"
            )));
        }
        let grade: i64 = record[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad grade {:?}", &record[1]),
        })?;
        if !(GRADE_MIN as i64..=GRADE_MAX as i64).contains(&grade) {
            return Err(Error::Validation(format!(
                "line {line}: grade {grade} outside {GRADE_MIN}..{GRADE_MAX}"
            )));
        }
        let sex = parse_sex(&record[2]).ok_or_else(|| Error::Parse {
            line,
            message: format!("bad sex {:?}", &record[2]),
        })?;
        let race = parse_race(&record[3]);
        let school = parse_school(&record[4]).ok_or_else(|| Error::Parse {
            line,
            message: format!("bad school {:?}", &record[4]),
        })?;
        students.push(Student {
            id: students.len() as u32,
            grade: grade as u8,
            sex,
            race,
            school,
        });
    }
    if students.is_empty() {
        return Err(Error::EmptyRoster);
    }
    Roster::new(students)
}

/// Write a roster as CSV (inverse of [`load_roster`]).
pub fn write_roster(roster: &Roster, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["id", "grade", "sex", "race", "school"])?;
    for s in roster.students() {
        let sex = match s.sex {
            Sex::Male => "male",
            Sex::Female => "female",
        };
        let school = match s.school {
            School::Main => "main",
            School::Sister => "sister",
        };
        w.write_record([
            s.id.to_string(),
            s.grade.to_string(),
            sex.to_string(),
            s.race.to_string(),
            school.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Composition weights for the synthetic roster generator.
#[derive(Debug, Clone)]
pub struct RosterConfig {
    pub n: usize,
    /// Weights over grades 7..12; need not be normalized.
    pub grade_weights: [f64; GRADE_COUNT],
    /// Fraction male.
    pub sex_split: f64,
    /// Weights over {white, black, hispanic, asian, mixed, missing}.
    pub race_weights: [f64; 6],
    /// Fraction in the main school (the rest in the sister school).
    pub school_split: f64,
}

impl Default for RosterConfig {
    fn default() -> Self {
        RosterConfig {
            n: 1074,
            grade_weights: [1.0; GRADE_COUNT],
            sex_split: 0.5,
            race_weights: [0.55, 0.15, 0.15, 0.05, 0.09, 0.01],
            school_split: 1.0,
        }
    }
}

/// Sample a roster with independent per-student attributes. Deterministic
/// given the seed.
pub fn generate_synthetic_roster(config: &RosterConfig, seed: u64) -> Result<Roster> {
    if config.n < 2 {
        return Err(Error::validation("roster needs at least 2 students"));
    }
    let check_weights = |w: &[f64], name: &str| -> Result<()> {
        if w.iter().any(|&x| x < 0.0) || w.iter().all(|&x| x == 0.0) {
            return Err(Error::validation(format!(
                "{name} weights must be nonnegative and not all zero"
            )));
        }
        Ok(())
    };
    check_weights(&config.grade_weights, "grade")?;
    check_weights(&config.race_weights, "race")?;
    if !(0.0..=1.0).contains(&config.sex_split) || !(0.0..=1.0).contains(&config.school_split) {
        return Err(Error::validation("splits must be in [0,1]"));
    }

    let mut rng = stream_rng(seed, &[0x5253]); // roster stream
    let grade_dist = WeightedIndex::new(config.grade_weights).map_err(|e| Error::invalid(e.to_string()))?;
    let race_dist = WeightedIndex::new(config.race_weights).map_err(|e| Error::invalid(e.to_string()))?;

    let students = (0..config.n)
        .map(|i| Student {
            id: i as u32,
            grade: GRADE_MIN + grade_dist.sample(&mut rng) as u8,
            sex: if rng.gen::<f64>() < config.sex_split {
                Sex::Male
            } else {
                Sex::Female
            },
            race: Race::ALL[race_dist.sample(&mut rng)],
            school: if rng.gen::<f64>() < config.school_split {
                School::Main
            } else {
                School::Sister
            },
        })
        .collect();
    Roster::new(students)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborMix {
    MostlyFriends,
    MostlyNonfriends,
    Mix,
}

impl fmt::Display for NeighborMix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NeighborMix::MostlyFriends => "mostly_friends",
            NeighborMix::MostlyNonfriends => "mostly_nonfriends",
            NeighborMix::Mix => "mix",
        };
        f.write_str(s)
    }
}

fn parse_neighbor_mix(s: &str) -> Option<NeighborMix> {
    match s.trim().to_ascii_lowercase().as_str() {
        "mostly_friends" => Some(NeighborMix::MostlyFriends),
        "mostly_nonfriends" => Some(NeighborMix::MostlyNonfriends),
        "mix" => Some(NeighborMix::Mix),
        _ => None,
    }
}

/// One respondent's contact-behavior report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurveyRecord {
    /// People contacted per class break.
    pub break_contacts: u32,
    /// People contacted during the lunch break.
    pub lunch_contacts: u32,
    pub n_close_friends: u32,
    /// Fraction of contacts made to friends, in [0,1].
    pub pct_to_friends: f64,
    pub neighbor_mix: NeighborMix,
}

#[derive(Debug, Clone, Default)]
pub struct SurveySample {
    records: Vec<SurveyRecord>,
}

impl SurveySample {
    pub fn new(records: Vec<SurveyRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if !(0.0..=1.0).contains(&r.pct_to_friends) {
                return Err(Error::validation(format!(
                    "record {i}: pct_to_friends {} outside [0,1]",
                    r.pct_to_friends
                )));
            }
        }
        Ok(SurveySample { records })
    }

    pub fn records(&self) -> &[SurveyRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Mean fraction of contacts to friends (X). None for an empty sample.
    pub fn mean_pct_to_friends(&self) -> Option<f64> {
        if self.records.is_empty() {
            return None;
        }
        Some(self.records.iter().map(|r| r.pct_to_friends).sum::<f64>() / self.records.len() as f64)
    }
}

/// Load a survey from CSV with header
/// `break_contacts,lunch_contacts,n_close_friends,pct_to_friends,neighbor_mix`.
pub fn load_survey(path: impl AsRef<Path>) -> Result<SurveySample> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let mut records = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2;
        let record = record.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if record.len() != 5 {
            return Err(Error::Parse {
                line,
                message: format!("expected 5 columns, found {}", record.len()),
            });
        }
        let parse_count = |field: &str, name: &str| -> Result<u32> {
            field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad {name} {field:?}"),
            })
        };
        let break_contacts = parse_count(&record[0], "break_contacts")?;
        let lunch_contacts = parse_count(&record[1], "lunch_contacts")?;
        let n_close_friends = parse_count(&record[2], "n_close_friends")?;
        let pct_to_friends: f64 = record[3].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad pct_to_friends {:?}", &record[3]),
        })?;
        if !(0.0..=1.0).contains(&pct_to_friends) {
            return Err(Error::Validation(format!(
                "line {line}: pct_to_friends {pct_to_friends} outside [0,1]"
            )));
        }
        let neighbor_mix = parse_neighbor_mix(&record[4]).ok_or_else(|| Error::Parse {
            line,
            message: format!("bad neighbor_mix {:?}", &record[4]),
        })?;
        records.push(SurveyRecord {
            break_contacts,
            lunch_contacts,
            n_close_friends,
            pct_to_friends,
            neighbor_mix,
        });
    }
    SurveySample::new(records)
}

pub fn write_survey(survey: &SurveySample, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record([
        "break_contacts",
        "lunch_contacts",
        "n_close_friends",
        "pct_to_friends",
        "neighbor_mix",
    ])?;
    for r in survey.records() {
        w.write_record([
            r.break_contacts.to_string(),
            r.lunch_contacts.to_string(),
            r.n_close_friends.to_string(),
            r.pct_to_friends.to_string(),
            r.neighbor_mix.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Outlier handling applied before fitting: break contacts above 20 are
/// recoded to 20, and records reporting more than 40 close friends are
/// removed.
pub fn preprocess_survey(raw: &SurveySample) -> Result<SurveySample> {
    let records: Vec<SurveyRecord> = raw
        .records()
        .iter()
        .filter(|r| r.n_close_friends <= CLOSE_FRIEND_DROP_THRESHOLD)
        .map(|r| SurveyRecord {
            break_contacts: r.break_contacts.min(BREAK_CONTACT_CAP),
            ..*r
        })
        .collect();
    if records.is_empty() {
        return Err(Error::EmptySurvey);
    }
    SurveySample::new(records)
}

/// Resample records with replacement, preserving the sample size.
pub fn bootstrap_resample(survey: &SurveySample, rng: &mut impl Rng) -> Result<SurveySample> {
    if survey.is_empty() {
        return Err(Error::validation("cannot resample an empty survey"));
    }
    let n = survey.len();
    let records = (0..n)
        .map(|_| survey.records()[rng.gen_range(0..n)])
        .collect();
    SurveySample::new(records)
}

/// Parameters for the synthetic survey generator. Defaults reproduce the
/// bundled degree-model parameters.
#[derive(Debug, Clone)]
pub struct SurveyConfig {
    /// Mean break contacts for a student with zero friends.
    pub break_mean0: f64,
    /// Multiplicative increase in mean break contacts per friend.
    pub break_ratio: f64,
    pub break_dispersion: f64,
    pub lunch_mean: f64,
    pub lunch_dispersion: f64,
    pub pct_to_friends_mean: f64,
    /// Mean of the close-friend count distribution.
    pub friend_mean: f64,
    pub friend_dispersion: f64,
    pub n: usize,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        SurveyConfig {
            break_mean0: 4.5,
            break_ratio: 1.03,
            break_dispersion: 2.0,
            lunch_mean: 8.0,
            lunch_dispersion: 1.5,
            pct_to_friends_mean: 0.68,
            friend_mean: 8.0,
            friend_dispersion: 2.0,
            n: 246,
        }
    }
}

/// Draw survey records from the parametric degree model. Deterministic given
/// the seed.
pub fn generate_synthetic_survey(config: &SurveyConfig, seed: u64) -> Result<SurveySample> {
    if config.break_mean0 <= 0.0 || config.lunch_mean <= 0.0 {
        return Err(Error::validation("means must be positive"));
    }
    if config.break_dispersion <= 0.0 || config.lunch_dispersion <= 0.0 {
        return Err(Error::validation("dispersions must be positive"));
    }
    let mut rng = stream_rng(seed, &[0x5356]); // survey stream

    let concentration = 10.0;
    let m = config.pct_to_friends_mean.clamp(1e-6, 1.0 - 1e-6);
    let beta = Beta::new(concentration * m, concentration * (1.0 - m))
        .map_err(|e| Error::invalid(e.to_string()))?;
    // class-neighbor mix report frequencies observed in the survey
    let mix_dist = WeightedIndex::new([0.13, 0.13, 0.74]).unwrap();
    let mix_levels = [
        NeighborMix::MostlyFriends,
        NeighborMix::MostlyNonfriends,
        NeighborMix::Mix,
    ];

    let mut records = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let n_close_friends = loop {
            let f = sample_neg_binomial(config.friend_mean, config.friend_dispersion, &mut rng);
            if f <= CLOSE_FRIEND_DROP_THRESHOLD as u64 {
                break f as u32;
            }
        };
        let break_mean = config.break_mean0 * config.break_ratio.powi(n_close_friends as i32);
        let break_contacts =
            sample_neg_binomial(break_mean, config.break_dispersion, &mut rng) as u32;
        let lunch_contacts =
            sample_neg_binomial(config.lunch_mean, config.lunch_dispersion, &mut rng) as u32;
        records.push(SurveyRecord {
            break_contacts,
            lunch_contacts,
            n_close_friends,
            pct_to_friends: beta.sample(&mut rng),
            neighbor_mix: mix_levels[mix_dist.sample(&mut rng)],
        });
    }
    SurveySample::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::io::Write;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_roster_basic() {
        let f = write_temp(
            "id,grade,sex,race,school\n0,7,male,white,main\n1,9,female,black,main\n2,12,male,hispanic,main\n",
        );
        let roster = load_roster(f.path()).unwrap();
        assert_eq!(roster.len(), 3);
        assert_eq!(roster.student(1).grade, 9);
        assert_eq!(roster.student(2).grade, 12);
    }

    #[test]
    fn load_roster_empty_errors() {
        let f = write_temp("id,grade,sex,race,school\n");
        match load_roster(f.path()) {
            Err(Error::EmptyRoster) => {}
            other => panic!("expected EmptyRoster, got {other:?}"),
        }
    }

    #[test]
    fn load_roster_grade_out_of_range() {
        let f = write_temp("id,grade,sex,race,school\n0,7,male,white,main\n1,13,male,white,main\n");
        let err = load_roster(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("13"), "error should name the bad grade: {msg}");
        assert!(msg.contains("line 3"), "error should name the row: {msg}");
    }

    #[test]
    fn unknown_race_maps_to_missing() {
        let f = write_temp(
            "id,grade,sex,race,school\n0,7,male,purple,main\n1,8,female,white,main\n",
        );
        let roster = load_roster(f.path()).unwrap();
        assert_eq!(roster.student(0).race, Race::Missing);
    }

    #[test]
    fn roster_roundtrip() {
        let roster = generate_synthetic_roster(
            &RosterConfig {
                n: 50,
                school_split: 0.7,
                ..Default::default()
            },
            3,
        )
        .unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_roster(&roster, f.path()).unwrap();
        let back = load_roster(f.path()).unwrap();
        assert_eq!(roster.students(), back.students());
    }

    #[test]
    fn synthetic_roster_deterministic() {
        let cfg = RosterConfig {
            n: 100,
            ..Default::default()
        };
        let a = generate_synthetic_roster(&cfg, 11).unwrap();
        let b = generate_synthetic_roster(&cfg, 11).unwrap();
        assert_eq!(a.students(), b.students());
        let c = generate_synthetic_roster(&cfg, 12).unwrap();
        assert_ne!(a.students(), c.students());
    }

    #[test]
    fn synthetic_roster_point_mass_grade() {
        let cfg = RosterConfig {
            n: 10,
            grade_weights: [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            ..Default::default()
        };
        let roster = generate_synthetic_roster(&cfg, 1).unwrap();
        assert!(roster.students().iter().all(|s| s.grade == 9));
    }

    #[test]
    fn synthetic_roster_size_and_bounds() {
        let roster = generate_synthetic_roster(&RosterConfig::default(), 5).unwrap();
        assert_eq!(roster.len(), 1074);
        assert!(generate_synthetic_roster(
            &RosterConfig {
                n: 1,
                ..Default::default()
            },
            0
        )
        .is_err());
    }

    #[test]
    fn synthetic_roster_frequencies_match_weights() {
        // chi-square goodness of fit on grade composition at n=10,000
        let cfg = RosterConfig {
            n: 10_000,
            grade_weights: [2.0, 1.0, 1.0, 1.0, 1.0, 2.0],
            ..Default::default()
        };
        let roster = generate_synthetic_roster(&cfg, 17).unwrap();
        let mut counts = [0usize; GRADE_COUNT];
        for s in roster.students() {
            counts[s.grade_index()] += 1;
        }
        let total_w: f64 = cfg.grade_weights.iter().sum();
        let mut chi2 = 0.0;
        for (i, &c) in counts.iter().enumerate() {
            let expected = cfg.n as f64 * cfg.grade_weights[i] / total_w;
            chi2 += (c as f64 - expected).powi(2) / expected;
        }
        let dist = ChiSquared::new((GRADE_COUNT - 1) as f64).unwrap();
        let p = 1.0 - dist.cdf(chi2);
        assert!(p > 0.001, "chi2 {chi2:.2}, p {p:.5}");
    }

    #[test]
    fn preprocess_caps_and_drops() {
        let survey = SurveySample::new(vec![
            SurveyRecord {
                break_contacts: 35,
                lunch_contacts: 5,
                n_close_friends: 3,
                pct_to_friends: 0.5,
                neighbor_mix: NeighborMix::Mix,
            },
            SurveyRecord {
                break_contacts: 4,
                lunch_contacts: 5,
                n_close_friends: 41,
                pct_to_friends: 0.5,
                neighbor_mix: NeighborMix::Mix,
            },
            SurveyRecord {
                break_contacts: 20,
                lunch_contacts: 5,
                n_close_friends: 40,
                pct_to_friends: 0.5,
                neighbor_mix: NeighborMix::Mix,
            },
        ])
        .unwrap();
        let clean = preprocess_survey(&survey).unwrap();
        assert_eq!(clean.len(), 2);
        assert_eq!(clean.records()[0].break_contacts, 20);
        // boundary record unchanged
        assert_eq!(clean.records()[1].break_contacts, 20);
        assert_eq!(clean.records()[1].n_close_friends, 40);
    }

    #[test]
    fn preprocess_all_dropped_errors() {
        let survey = SurveySample::new(vec![SurveyRecord {
            break_contacts: 4,
            lunch_contacts: 5,
            n_close_friends: 50,
            pct_to_friends: 0.5,
            neighbor_mix: NeighborMix::Mix,
        }])
        .unwrap();
        match preprocess_survey(&survey) {
            Err(Error::EmptySurvey) => {}
            other => panic!("expected EmptySurvey, got {other:?}"),
        }
    }

    #[test]
    fn bootstrap_preserves_size_and_single_record_identity() {
        let one = SurveySample::new(vec![SurveyRecord {
            break_contacts: 4,
            lunch_contacts: 5,
            n_close_friends: 2,
            pct_to_friends: 0.7,
            neighbor_mix: NeighborMix::Mix,
        }])
        .unwrap();
        let mut rng = stream_rng(0, &[1]);
        let resampled = bootstrap_resample(&one, &mut rng).unwrap();
        assert_eq!(resampled.records(), one.records());

        let survey = generate_synthetic_survey(
            &SurveyConfig {
                n: 37,
                ..Default::default()
            },
            2,
        )
        .unwrap();
        let resampled = bootstrap_resample(&survey, &mut rng).unwrap();
        assert_eq!(resampled.len(), 37);
    }

    #[test]
    fn bootstrap_multiplicity_law_of_large_numbers() {
        // 2-record survey: each record's multiplicity per resample is
        // Binomial(2, 1/2), mean 1. Average over 1,000 resamples within 0.1.
        let survey = SurveySample::new(vec![
            SurveyRecord {
                break_contacts: 1,
                lunch_contacts: 0,
                n_close_friends: 0,
                pct_to_friends: 0.1,
                neighbor_mix: NeighborMix::Mix,
            },
            SurveyRecord {
                break_contacts: 2,
                lunch_contacts: 0,
                n_close_friends: 0,
                pct_to_friends: 0.9,
                neighbor_mix: NeighborMix::Mix,
            },
        ])
        .unwrap();
        let mut rng = stream_rng(9, &[]);
        let mut count_first = 0usize;
        let reps = 1000;
        for _ in 0..reps {
            let r = bootstrap_resample(&survey, &mut rng).unwrap();
            count_first += r
                .records()
                .iter()
                .filter(|rec| rec.break_contacts == 1)
                .count();
        }
        let mean_multiplicity = count_first as f64 / reps as f64;
        assert!(
            (mean_multiplicity - 1.0).abs() < 0.1,
            "mean multiplicity {mean_multiplicity}"
        );
    }

    #[test]
    fn x_recomputed_on_resample() {
        let survey = generate_synthetic_survey(
            &SurveyConfig {
                n: 25,
                ..Default::default()
            },
            4,
        )
        .unwrap();
        let mut rng = stream_rng(5, &[]);
        let resampled = bootstrap_resample(&survey, &mut rng).unwrap();
        let x = resampled.mean_pct_to_friends().unwrap();
        let manual: f64 = resampled
            .records()
            .iter()
            .map(|r| r.pct_to_friends)
            .sum::<f64>()
            / 25.0;
        assert_eq!(x, manual);
    }

    #[test]
    fn synthetic_survey_zero_friend_break_mean() {
        // sample mean of break contacts among zero-friend records near 4.5
        let survey = generate_synthetic_survey(
            &SurveyConfig {
                n: 10_000,
                ..Default::default()
            },
            6,
        )
        .unwrap();
        let zero: Vec<&SurveyRecord> = survey
            .records()
            .iter()
            .filter(|r| r.n_close_friends == 0)
            .collect();
        assert!(zero.len() > 200, "want enough zero-friend records");
        let mean =
            zero.iter().map(|r| r.break_contacts as f64).sum::<f64>() / zero.len() as f64;
        assert!((4.2..=4.8).contains(&mean), "zero-friend break mean {mean}");
    }

    #[test]
    fn synthetic_survey_empty_and_deterministic() {
        let empty = generate_synthetic_survey(
            &SurveyConfig {
                n: 0,
                ..Default::default()
            },
            0,
        )
        .unwrap();
        assert!(empty.mean_pct_to_friends().is_none());

        let cfg = SurveyConfig {
            n: 40,
            ..Default::default()
        };
        let a = generate_synthetic_survey(&cfg, 8).unwrap();
        let b = generate_synthetic_survey(&cfg, 8).unwrap();
        assert_eq!(a.records(), b.records());
    }

    #[test]
    fn survey_csv_roundtrip() {
        let survey = generate_synthetic_survey(
            &SurveyConfig {
                n: 20,
                ..Default::default()
            },
            3,
        )
        .unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_survey(&survey, f.path()).unwrap();
        let back = load_survey(f.path()).unwrap();
        assert_eq!(survey.records(), back.records());
    }

    proptest::proptest! {
        #[test]
        fn preprocess_is_idempotent(
            breaks in proptest::collection::vec(0u32..60, 1..40),
            friends in proptest::collection::vec(0u32..60, 1..40),
        ) {
            let n = breaks.len().min(friends.len());
            let records: Vec<SurveyRecord> = (0..n).map(|i| SurveyRecord {
                break_contacts: breaks[i],
                lunch_contacts: 5,
                n_close_friends: friends[i],
                pct_to_friends: 0.5,
                neighbor_mix: NeighborMix::Mix,
            }).collect();
            let survey = SurveySample::new(records).unwrap();
            if let Ok(once) = preprocess_survey(&survey) {
                let twice = preprocess_survey(&once).unwrap();
                proptest::prop_assert_eq!(once.records(), twice.records());
            }
        }
    }
}
