//! Dyad-independent exponential-family random graph model for the
//! friendship network: per-attribute sociality terms plus selective mixing
//! on school, sex, grade and race. Dyads are independent Bernoulli draws,
//! so estimation is logistic regression on the dyad change statistics
//! rather than MCMC.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::friendship::FriendshipNetwork;
use crate::population::{Race, Roster, School, Sex, Student, GRADE_COUNT, GRADE_MIN};

/// Coefficients on the reference-level parameterization: grade 7, race
/// white and sex female sociality are fixed at zero. Mixing terms may be
/// negative infinity (probability zero for matched dyads).
#[derive(Debug, Clone, PartialEq)]
pub struct ErgmCoefficients {
    pub edges: f64,
    /// Sociality by grade, indexed grade - 7; entry 0 is the reference.
    pub sociality_grade: [f64; GRADE_COUNT],
    /// Sociality by race in [`Race::ALL`] order; white is the reference.
    pub sociality_race: [f64; 6],
    pub sociality_male: f64,
    pub mix_school: f64,
    pub mix_sex_male: f64,
    pub mix_sex_female: f64,
    /// Same-grade mixing, indexed grade - 7.
    pub mix_grade: [f64; GRADE_COUNT],
    /// Same-race mixing in [`Race::ALL`] order.
    pub mix_race: [f64; 6],
}

impl ErgmCoefficients {
    /// The published friendship-model fit used as the bundled fixture.
    pub fn bundled() -> Self {
        serde_json::from_str(include_str!("../data/ergm_coefficients.json"))
            .expect("bundled coefficients parse")
    }

    pub fn zeros() -> Self {
        ErgmCoefficients {
            edges: 0.0,
            sociality_grade: [0.0; GRADE_COUNT],
            sociality_race: [0.0; 6],
            sociality_male: 0.0,
            mix_school: 0.0,
            mix_sex_male: 0.0,
            mix_sex_female: 0.0,
            mix_grade: [0.0; GRADE_COUNT],
            mix_race: [0.0; 6],
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: f64, name: &str| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(format!("{name} must be finite, got {v}")))
            }
        };
        finite(self.edges, "edges")?;
        if self.sociality_grade[0] != 0.0 {
            return Err(Error::validation("grade 7 sociality is the reference level"));
        }
        if self.sociality_race[0] != 0.0 {
            return Err(Error::validation("white sociality is the reference level"));
        }
        for (i, &v) in self.sociality_grade.iter().enumerate() {
            finite(v, &format!("sociality grade_{}", i as u8 + GRADE_MIN))?;
        }
        for (i, &v) in self.sociality_race.iter().enumerate() {
            finite(v, &format!("sociality {}", Race::ALL[i]))?;
        }
        finite(self.sociality_male, "sociality male")?;
        let mixing_ok = |v: f64| v.is_finite() || v == f64::NEG_INFINITY;
        let all_mixing = self
            .mix_grade
            .iter()
            .chain(self.mix_race.iter())
            .chain([&self.mix_school, &self.mix_sex_male, &self.mix_sex_female]);
        for &v in all_mixing {
            if !mixing_ok(v) {
                return Err(Error::validation(format!(
                    "mixing terms must be finite or -inf, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let coef: ErgmCoefficients = serde_json::from_str(&text)?;
        Ok(coef)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

// JSON form keyed by row names, with "-inf" encoding for impossible levels.

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoefJson {
    Num(f64),
    Word(String),
}

impl CoefJson {
    fn from_f64(v: f64) -> Self {
        if v == f64::NEG_INFINITY {
            CoefJson::Word("-inf".into())
        } else {
            CoefJson::Num(v)
        }
    }

    fn to_f64(&self) -> Result<f64> {
        match self {
            CoefJson::Num(v) => Ok(*v),
            CoefJson::Word(w) if w == "-inf" || w == "-Infinity" => Ok(f64::NEG_INFINITY),
            CoefJson::Word(w) => Err(Error::invalid(format!("bad coefficient {w:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ErgmFile {
    edges: f64,
    sociality: BTreeMap<String, f64>,
    mixing: BTreeMap<String, CoefJson>,
}

impl Serialize for ErgmCoefficients {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut sociality = BTreeMap::new();
        for g in 1..GRADE_COUNT {
            sociality.insert(
                format!("grade_{}", g as u8 + GRADE_MIN),
                self.sociality_grade[g],
            );
        }
        for (i, race) in Race::ALL.iter().enumerate().skip(1) {
            sociality.insert(race.to_string(), self.sociality_race[i]);
        }
        sociality.insert("male".into(), self.sociality_male);
        let mut mixing = BTreeMap::new();
        mixing.insert("school".into(), CoefJson::from_f64(self.mix_school));
        mixing.insert("sex_male".into(), CoefJson::from_f64(self.mix_sex_male));
        mixing.insert("sex_female".into(), CoefJson::from_f64(self.mix_sex_female));
        for g in 0..GRADE_COUNT {
            mixing.insert(
                format!("grade_{}", g as u8 + GRADE_MIN),
                CoefJson::from_f64(self.mix_grade[g]),
            );
        }
        for (i, race) in Race::ALL.iter().enumerate() {
            mixing.insert(format!("race_{race}"), CoefJson::from_f64(self.mix_race[i]));
        }
        ErgmFile {
            edges: self.edges,
            sociality,
            mixing,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ErgmCoefficients {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let file = ErgmFile::deserialize(deserializer)?;
        let mut coef = ErgmCoefficients::zeros();
        coef.edges = file.edges;
        for (key, value) in &file.sociality {
            match key.as_str() {
                "male" => coef.sociality_male = *value,
                k if k.starts_with("grade_") => {
                    let g: u8 = k[6..].parse().map_err(D::Error::custom)?;
                    coef.sociality_grade[(g - GRADE_MIN) as usize] = *value;
                }
                k => {
                    let race = Race::ALL
                        .iter()
                        .find(|r| r.to_string() == k)
                        .ok_or_else(|| D::Error::custom(format!("unknown sociality term {k}")))?;
                    coef.sociality_race[race.index()] = *value;
                }
            }
        }
        for (key, value) in &file.mixing {
            let v = value.to_f64().map_err(D::Error::custom)?;
            match key.as_str() {
                "school" => coef.mix_school = v,
                "sex_male" => coef.mix_sex_male = v,
                "sex_female" => coef.mix_sex_female = v,
                k if k.starts_with("grade_") => {
                    let g: u8 = k[6..].parse().map_err(D::Error::custom)?;
                    coef.mix_grade[(g - GRADE_MIN) as usize] = v;
                }
                k if k.starts_with("race_") => {
                    let race = Race::ALL
                        .iter()
                        .find(|r| r.to_string() == &k[5..])
                        .ok_or_else(|| D::Error::custom(format!("unknown mixing term {k}")))?;
                    coef.mix_race[race.index()] = v;
                }
                k => return Err(D::Error::custom(format!("unknown mixing term {k}"))),
            }
        }
        coef.validate().map_err(D::Error::custom)?;
        Ok(coef)
    }
}

fn sociality(s: &Student, coef: &ErgmCoefficients) -> f64 {
    let mut v = coef.sociality_grade[s.grade_index()] + coef.sociality_race[s.race.index()];
    if s.sex == Sex::Male {
        v += coef.sociality_male;
    }
    v
}

/// Log-odds of friendship between two students: edges + both sociality
/// terms + mixing terms for each shared attribute level.
pub fn dyad_logit(a: &Student, b: &Student, coef: &ErgmCoefficients) -> f64 {
    // the sociality pair is summed first so the result is exactly symmetric
    let mut logit = coef.edges + (sociality(a, coef) + sociality(b, coef));
    if a.school == b.school {
        logit += coef.mix_school;
    }
    if a.sex == b.sex {
        logit += match a.sex {
            Sex::Male => coef.mix_sex_male,
            Sex::Female => coef.mix_sex_female,
        };
    }
    if a.grade == b.grade {
        logit += coef.mix_grade[a.grade_index()];
    }
    if a.race == b.race {
        logit += coef.mix_race[a.race.index()];
    }
    logit
}

pub fn logistic(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    1.0 / (1.0 + (-x).exp())
}

pub fn dyad_probability(a: &Student, b: &Student, coef: &ErgmCoefficients) -> f64 {
    logistic(dyad_logit(a, b, coef))
}

// Attribute profile compression: dyad probabilities depend only on the
// (grade, sex, race, school) profiles of the endpoints, so both simulation
// and estimation work on profile pairs instead of raw dyads.

pub(crate) const PROFILE_COUNT: usize = GRADE_COUNT * 2 * 6 * 2;

pub(crate) fn profile_id(s: &Student) -> usize {
    let sex = (s.sex == Sex::Male) as usize;
    let school = (s.school == School::Sister) as usize;
    ((s.grade_index() * 2 + sex) * 6 + s.race.index()) * 2 + school
}

pub(crate) fn profile_student(id: usize) -> Student {
    let school = if id % 2 == 0 { School::Main } else { School::Sister };
    let rest = id / 2;
    let race = Race::ALL[rest % 6];
    let rest = rest / 6;
    let sex = if rest % 2 == 1 { Sex::Male } else { Sex::Female };
    let grade = GRADE_MIN + (rest / 2) as u8;
    Student {
        id: 0,
        grade,
        sex,
        race,
        school,
    }
}

/// Draw each of the n(n-1)/2 dyads independently.
pub fn simulate_friendship(
    roster: &Roster,
    coef: &ErgmCoefficients,
    rng: &mut impl Rng,
) -> FriendshipNetwork {
    let n = roster.len();
    let profiles: Vec<usize> = roster.students().iter().map(profile_id).collect();
    // probability lookup per profile pair
    let mut table = vec![0.0f64; PROFILE_COUNT * PROFILE_COUNT];
    let used: std::collections::BTreeSet<usize> = profiles.iter().copied().collect();
    for &p in &used {
        for &q in &used {
            let a = profile_student(p);
            let b = profile_student(q);
            table[p * PROFILE_COUNT + q] = dyad_probability(&a, &b, coef);
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        let pi = profiles[i] * PROFILE_COUNT;
        for j in (i + 1)..n {
            if rng.gen::<f64>() < table[pi + profiles[j]] {
                edges.push((i as u32, j as u32));
            }
        }
    }
    FriendshipNetwork::new(n, edges).expect("simulated edges are valid")
}

/// Expected mean friend degree under the model, from the analytic dyad
/// probabilities.
pub fn expected_mean_degree(roster: &Roster, coef: &ErgmCoefficients) -> f64 {
    let students = roster.students();
    let n = students.len();
    let mut counts = vec![0u32; PROFILE_COUNT];
    for s in students {
        counts[profile_id(s)] += 1;
    }
    let mut total = 0.0;
    for p in 0..PROFILE_COUNT {
        if counts[p] == 0 {
            continue;
        }
        for q in p..PROFILE_COUNT {
            if counts[q] == 0 {
                continue;
            }
            let prob = dyad_probability(&profile_student(p), &profile_student(q), coef);
            let dyads = if p == q {
                counts[p] as f64 * (counts[p] as f64 - 1.0) / 2.0
            } else {
                counts[p] as f64 * counts[q] as f64
            };
            total += dyads * prob;
        }
    }
    2.0 * total / n as f64
}

/// One fitted model term.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedTerm {
    pub name: String,
    /// Estimate; negative infinity for mixing levels with no matched edges,
    /// NaN for terms the design could not identify.
    pub estimate: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ErgmFit {
    pub coefficients: ErgmCoefficients,
    pub terms: Vec<FittedTerm>,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Term {
    Edges,
    SocGrade(usize),
    SocRace(usize),
    SocMale,
    MixSchool,
    MixSexMale,
    MixSexFemale,
    MixGrade(usize),
    MixRace(usize),
}

impl Term {
    fn all() -> Vec<Term> {
        let mut terms = vec![Term::Edges];
        terms.extend((1..GRADE_COUNT).map(Term::SocGrade));
        terms.extend((1..6).map(Term::SocRace));
        terms.push(Term::SocMale);
        terms.push(Term::MixSchool);
        terms.push(Term::MixSexMale);
        terms.push(Term::MixSexFemale);
        terms.extend((0..GRADE_COUNT).map(Term::MixGrade));
        terms.extend((0..6).map(Term::MixRace));
        terms
    }

    fn name(&self) -> String {
        match self {
            Term::Edges => "edges".into(),
            Term::SocGrade(g) => format!("sociality_grade_{}", *g as u8 + GRADE_MIN),
            Term::SocRace(r) => format!("sociality_{}", Race::ALL[*r]),
            Term::SocMale => "sociality_male".into(),
            Term::MixSchool => "mix_school".into(),
            Term::MixSexMale => "mix_sex_male".into(),
            Term::MixSexFemale => "mix_sex_female".into(),
            Term::MixGrade(g) => format!("mix_grade_{}", *g as u8 + GRADE_MIN),
            Term::MixRace(r) => format!("mix_race_{}", Race::ALL[*r]),
        }
    }

    fn is_mixing(&self) -> bool {
        matches!(
            self,
            Term::MixSchool | Term::MixSexMale | Term::MixSexFemale | Term::MixGrade(_) | Term::MixRace(_)
        )
    }

    /// Change statistic for a dyad between profile representatives.
    fn value(&self, a: &Student, b: &Student) -> f64 {
        match self {
            Term::Edges => 1.0,
            Term::SocGrade(g) => {
                (a.grade_index() == *g) as u32 as f64 + (b.grade_index() == *g) as u32 as f64
            }
            Term::SocRace(r) => {
                (a.race.index() == *r) as u32 as f64 + (b.race.index() == *r) as u32 as f64
            }
            Term::SocMale => {
                (a.sex == Sex::Male) as u32 as f64 + (b.sex == Sex::Male) as u32 as f64
            }
            Term::MixSchool => (a.school == b.school) as u32 as f64,
            Term::MixSexMale => (a.sex == Sex::Male && b.sex == Sex::Male) as u32 as f64,
            Term::MixSexFemale => (a.sex == Sex::Female && b.sex == Sex::Female) as u32 as f64,
            Term::MixGrade(g) => {
                (a.grade == b.grade && a.grade_index() == *g) as u32 as f64
            }
            Term::MixRace(r) => (a.race == b.race && a.race.index() == *r) as u32 as f64,
        }
    }
}

struct Cell {
    x: Vec<f64>,
    dyads: f64,
    edges: f64,
}

/// Maximum-likelihood logistic regression of the dyad indicator on the
/// change statistics, aggregated over attribute-profile pairs. Mixing
/// levels with no matched edges are reported as -inf and their dyads are
/// excluded; columns without variation are dropped (estimate NaN).
pub fn fit_ergm(network: &FriendshipNetwork, roster: &Roster) -> Result<ErgmFit> {
    let n = roster.len();
    if network.n() != n {
        return Err(Error::invalid("network and roster sizes differ"));
    }
    let edge_total = network.edge_count() as f64;
    let dyad_total = n as f64 * (n as f64 - 1.0) / 2.0;
    if edge_total == 0.0 || edge_total == dyad_total {
        return Err(Error::invalid(
            "need at least one edge and one non-edge to fit",
        ));
    }

    let profiles: Vec<usize> = roster.students().iter().map(profile_id).collect();
    let mut profile_counts = vec![0u64; PROFILE_COUNT];
    for &p in &profiles {
        profile_counts[p] += 1;
    }

    let terms = Term::all();
    let mut cells: BTreeMap<(usize, usize), Cell> = BTreeMap::new();
    for p in 0..PROFILE_COUNT {
        if profile_counts[p] == 0 {
            continue;
        }
        for q in p..PROFILE_COUNT {
            if profile_counts[q] == 0 {
                continue;
            }
            let dyads = if p == q {
                profile_counts[p] as f64 * (profile_counts[p] as f64 - 1.0) / 2.0
            } else {
                profile_counts[p] as f64 * profile_counts[q] as f64
            };
            if dyads == 0.0 {
                continue;
            }
            let a = profile_student(p);
            let b = profile_student(q);
            let x = terms.iter().map(|t| t.value(&a, &b)).collect();
            cells.insert((p, q), Cell { x, dyads, edges: 0.0 });
        }
    }
    for (i, j) in network.edges() {
        let (p, q) = (profiles[i as usize], profiles[j as usize]);
        let key = (p.min(q), p.max(q));
        cells.get_mut(&key).expect("edge cell exists").edges += 1.0;
    }
    let mut cells: Vec<Cell> = cells.into_values().collect();

    // mixing levels with zero matched edges: -inf estimate, dyads excluded
    let mut estimates = vec![f64::NAN; terms.len()];
    let mut std_errors: Vec<Option<f64>> = vec![None; terms.len()];
    let mut neg_inf = vec![false; terms.len()];
    for (t_idx, term) in terms.iter().enumerate() {
        if !term.is_mixing() {
            continue;
        }
        let matched_edges: f64 = cells
            .iter()
            .filter(|c| c.x[t_idx] > 0.0)
            .map(|c| c.edges)
            .sum();
        if matched_edges == 0.0 {
            neg_inf[t_idx] = true;
            estimates[t_idx] = f64::NEG_INFINITY;
        }
    }
    cells.retain(|c| !neg_inf.iter().enumerate().any(|(t, &ni)| ni && c.x[t] > 0.0));

    // active columns: keep edges, drop anything constant across the
    // remaining cells (absorbed by the edges term). Male sociality is never
    // estimable: for every dyad #males - [both male] + [both female] = 1,
    // so that column is an exact combination of edges and the sex-mixing
    // columns. It is excluded a priori; the sex-mixing estimates then carry
    // the male-sociality effect (male += soc, female -= soc, edges += soc).
    let mut active: Vec<usize> = Vec::new();
    for (t_idx, term) in terms.iter().enumerate() {
        if neg_inf[t_idx] || matches!(term, Term::SocMale) {
            continue;
        }
        if matches!(term, Term::Edges) {
            active.push(t_idx);
            continue;
        }
        let first = cells.first().map(|c| c.x[t_idx]).unwrap_or(0.0);
        if cells.iter().any(|c| c.x[t_idx] != first) {
            active.push(t_idx);
        }
    }

    // IRLS with pivot-based column dropping for exact collinearity
    let mut beta;
    let mut info;
    let mut ll;
    'outer: loop {
        let k = active.len();
        beta = vec![0.0f64; k];
        // start the intercept at the observed density logit
        let dens: f64 = {
            let e: f64 = cells.iter().map(|c| c.edges).sum();
            let d: f64 = cells.iter().map(|c| c.dyads).sum();
            (e / d).clamp(1e-12, 1.0 - 1e-12)
        };
        beta[0] = (dens / (1.0 - dens)).ln();
        let mut ll_prev = f64::NEG_INFINITY;
        info = vec![0.0f64; k * k];
        ll = 0.0;
        for iteration in 0..200 {
            let mut grad = vec![0.0f64; k];
            info.iter_mut().for_each(|v| *v = 0.0);
            ll = 0.0;
            for cell in &cells {
                let eta: f64 = active
                    .iter()
                    .enumerate()
                    .map(|(c, &t)| beta[c] * cell.x[t])
                    .sum();
                let p = logistic(eta).clamp(1e-14, 1.0 - 1e-14);
                ll += cell.edges * p.ln() + (cell.dyads - cell.edges) * (1.0 - p).ln();
                let w = cell.dyads * p * (1.0 - p);
                let r = cell.edges - cell.dyads * p;
                for (ci, &ti) in active.iter().enumerate() {
                    grad[ci] += r * cell.x[ti];
                    for (cj, &tj) in active.iter().enumerate() {
                        info[ci * k + cj] += w * cell.x[ti] * cell.x[tj];
                    }
                }
            }
            let mut a = info.clone();
            let mut delta = grad.clone();
            if let Some(bad) = solve_in_place(&mut a, &mut delta) {
                // drop the collinear column and refit
                active.remove(bad);
                continue 'outer;
            }
            for (b, d) in beta.iter_mut().zip(&delta) {
                *b += d;
            }
            if (ll - ll_prev).abs() < 1e-10 && iteration > 0 {
                break;
            }
            ll_prev = ll;
            if iteration == 199 {
                return Err(Error::NonConvergence {
                    iterations: 200,
                    gradient_norm: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
                });
            }
        }
        break;
    }

    // separation check on the estimable terms
    for (c, &t) in active.iter().enumerate() {
        if beta[c].abs() > 30.0 {
            return Err(Error::Separation(terms[t].name()));
        }
    }

    // standard errors from the inverse information
    let k = active.len();
    let mut inv = vec![0.0f64; k * k];
    for col in 0..k {
        let mut a = info.clone();
        let mut e = vec![0.0f64; k];
        e[col] = 1.0;
        if solve_in_place(&mut a, &mut e).is_some() {
            return Err(Error::DegenerateDesign("singular information matrix".into()));
        }
        for row in 0..k {
            inv[row * k + col] = e[row];
        }
    }
    for (c, &t) in active.iter().enumerate() {
        estimates[t] = beta[c];
        let var = inv[c * k + c];
        std_errors[t] = (var > 0.0).then(|| var.sqrt());
    }

    let mut coef = ErgmCoefficients::zeros();
    for (t_idx, term) in terms.iter().enumerate() {
        let est = estimates[t_idx];
        let value = if est.is_nan() { 0.0 } else { est };
        match term {
            Term::Edges => coef.edges = value,
            Term::SocGrade(g) => coef.sociality_grade[*g] = value,
            Term::SocRace(r) => coef.sociality_race[*r] = value,
            Term::SocMale => coef.sociality_male = value,
            Term::MixSchool => coef.mix_school = value,
            Term::MixSexMale => coef.mix_sex_male = value,
            Term::MixSexFemale => coef.mix_sex_female = value,
            Term::MixGrade(g) => coef.mix_grade[*g] = value,
            Term::MixRace(r) => coef.mix_race[*r] = value,
        }
    }
    let fitted_terms = terms
        .iter()
        .enumerate()
        .map(|(t_idx, term)| FittedTerm {
            name: term.name(),
            estimate: estimates[t_idx],
            std_error: std_errors[t_idx],
        })
        .collect();
    Ok(ErgmFit {
        coefficients: coef,
        terms: fitted_terms,
        log_likelihood: ll,
    })
}

/// Gaussian elimination with partial pivoting. Returns the index of a
/// column whose pivot collapses (collinearity) or None on success, leaving
/// the solution in `b`.
fn solve_in_place(a: &mut [f64], b: &mut [f64]) -> Option<usize> {
    let k = b.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let scale: f64 = (0..k)
        .map(|i| a[i * k + i].abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    for col in 0..k {
        let (mut pivot_row, mut pivot_val) = (col, 0.0);
        for row in col..k {
            let v = a[row * k + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val < 1e-12 * scale {
            return Some(perm[col]);
        }
        if pivot_row != col {
            for c in 0..k {
                a.swap(pivot_row * k + c, col * k + c);
            }
            b.swap(pivot_row, col);
            perm.swap(pivot_row, col);
        }
        for row in (col + 1)..k {
            let f = a[row * k + col] / a[col * k + col];
            if f == 0.0 {
                continue;
            }
            for c in col..k {
                a[row * k + c] -= f * a[col * k + c];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..k).rev() {
        let mut v = b[col];
        for c in (col + 1)..k {
            v -= a[col * k + c] * b[c];
        }
        b[col] = v / a[col * k + col];
    }
    None
}
