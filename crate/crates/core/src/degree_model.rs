//! Contact-degree distributions: break contacts (negative-binomial
//! regression on friend count), lunch contacts (censored negative binomial
//! with a 1-5 unit duration multiplier), and class neighbors (fixed
//! categorical model).
//!
//! The negative binomial is parameterized by mean mu and dispersion k with
//! variance mu + mu^2/k, so k -> infinity recovers the Poisson.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::population::SurveySample;

pub const CLASSES_PER_DAY: usize = 7;
/// 10-minute units of contact per shared class (40 minutes).
pub const UNITS_PER_CLASS: u32 = 4;
/// Number of non-lunch breaks per day.
pub const BREAKS_PER_DAY: u32 = 5;

const LN_K_LO: f64 = -9.0; // dispersion search bounds, log scale
const LN_K_HI: f64 = 18.5;
const LL_TOL: f64 = 1e-8;
const MAX_OUTER_ITERS: usize = 200;

/// Draw from a negative binomial via the gamma-Poisson mixture.
/// A zero mean returns 0 deterministically.
pub fn sample_neg_binomial(mean: f64, dispersion: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    assert!(dispersion > 0.0, "dispersion must be positive");
    let gamma = Gamma::new(dispersion, mean / dispersion).expect("valid gamma");
    let lambda = gamma.sample(rng);
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("valid poisson").sample(rng) as u64
}

fn nb_ln_pmf(y: f64, mu: f64, k: f64) -> f64 {
    let mu = mu.max(1e-12);
    ln_gamma(y + k) - ln_gamma(k) - ln_gamma(y + 1.0) + k * (k / (k + mu)).ln()
        + y * (mu / (k + mu)).ln()
}

/// Maximize a 1-d unimodal function by golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..100 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        if (hi - lo).abs() < 1e-10 {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Break-contact model: per-break partner count is negative binomial with
/// log-linear mean in the number of close friends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegBinRegressionFit {
    /// Log mean count at zero friends.
    pub intercept: f64,
    /// Log rate ratio per additional friend.
    pub log_ratio: f64,
    pub dispersion: f64,
    /// 95% Wald interval for `log_ratio`.
    pub ci_log_ratio: (f64, f64),
}

impl NegBinRegressionFit {
    pub fn mean_at(&self, n_friends: u32) -> f64 {
        (self.intercept + self.log_ratio * n_friends as f64).exp()
    }

    /// Published break-contact fit: mean 4.5 at zero friends, rate ratio
    /// 1.03 per friend with 95% CI [1.01, 1.04]. The dispersion was not
    /// published; 2.0 is the bundled stand-in.
    pub fn reference_fixture() -> Self {
        NegBinRegressionFit {
            intercept: 4.5f64.ln(),
            log_ratio: 1.03f64.ln(),
            dispersion: 2.0,
            ci_log_ratio: (1.01f64.ln(), 1.04f64.ln()),
        }
    }
}

/// Log-likelihood of the break-contact regression plus its analytic gradient
/// in (intercept, log_ratio, dispersion).
pub fn break_model_loglik_grad(
    data: &[(u32, u32)], // (n_close_friends, break_contacts)
    intercept: f64,
    log_ratio: f64,
    dispersion: f64,
) -> (f64, [f64; 3]) {
    let k = dispersion;
    let mut ll = 0.0;
    let mut g = [0.0f64; 3];
    for &(x, y) in data {
        let x = x as f64;
        let y = y as f64;
        let mu = (intercept + log_ratio * x).exp();
        ll += nb_ln_pmf(y, mu, k);
        let d_eta = k * (y - mu) / (k + mu);
        g[0] += d_eta;
        g[1] += d_eta * x;
        g[2] += digamma(y + k) - digamma(k) + (k / (k + mu)).ln() + 1.0 - (k + y) / (k + mu);
    }
    (ll, g)
}

fn irls_step(data: &[(u32, u32)], beta: &mut [f64; 2], k: f64) -> f64 {
    // Fisher scoring for the log-link NB with fixed dispersion.
    let (mut s_w, mut s_wx, mut s_wxx) = (0.0, 0.0, 0.0);
    let (mut g0, mut g1) = (0.0, 0.0);
    for &(x, y) in data {
        let x = x as f64;
        let y = y as f64;
        let mu = (beta[0] + beta[1] * x).exp();
        let w = mu * k / (k + mu);
        let u = k * (y - mu) / (k + mu);
        s_w += w;
        s_wx += w * x;
        s_wxx += w * x * x;
        g0 += u;
        g1 += u * x;
    }
    let det = s_w * s_wxx - s_wx * s_wx;
    if det.abs() < 1e-300 {
        return 0.0;
    }
    let d0 = (s_wxx * g0 - s_wx * g1) / det;
    let d1 = (s_w * g1 - s_wx * g0) / det;

    let ll_at = |b0: f64, b1: f64| {
        data.iter()
            .map(|&(x, y)| nb_ln_pmf(y as f64, (b0 + b1 * x as f64).exp(), k))
            .sum::<f64>()
    };
    let ll_old = ll_at(beta[0], beta[1]);
    let mut step = 1.0;
    for _ in 0..30 {
        let ll_new = ll_at(beta[0] + step * d0, beta[1] + step * d1);
        if ll_new >= ll_old || (d0.abs() + d1.abs()) * step < 1e-14 {
            beta[0] += step * d0;
            beta[1] += step * d1;
            return ll_new - ll_old;
        }
        step *= 0.5;
    }
    0.0
}

/// Fit the break-contact regression by alternating Fisher-scoring steps for
/// the coefficients with profile maximization of the dispersion.
pub fn fit_break_model(survey: &SurveySample) -> Result<NegBinRegressionFit> {
    if survey.len() < 10 {
        return Err(Error::invalid(format!(
            "break model needs at least 10 records, got {}",
            survey.len()
        )));
    }
    let data: Vec<(u32, u32)> = survey
        .records()
        .iter()
        .map(|r| (r.n_close_friends, r.break_contacts))
        .collect();
    let first = data[0].0;
    if data.iter().all(|&(x, _)| x == first) {
        return Err(Error::DegenerateDesign(
            "friend counts are all identical".into(),
        ));
    }

    let mean_y = data.iter().map(|&(_, y)| y as f64).sum::<f64>() / data.len() as f64;
    let mut beta = [mean_y.max(0.1).ln(), 0.0];
    let mut k = 1.0;
    let mut ll_prev = f64::NEG_INFINITY;
    let mut converged = false;
    for _ in 0..MAX_OUTER_ITERS {
        for _ in 0..50 {
            if irls_step(&data, &mut beta, k).abs() < 1e-12 {
                break;
            }
        }
        let profile = |ln_k: f64| {
            let kk = ln_k.exp();
            data.iter()
                .map(|&(x, y)| nb_ln_pmf(y as f64, (beta[0] + beta[1] * x as f64).exp(), kk))
                .sum::<f64>()
        };
        let (ln_k, ll) = golden_max(profile, LN_K_LO, LN_K_HI);
        k = ln_k.exp();
        if (ll - ll_prev).abs() < LL_TOL {
            converged = true;
            break;
        }
        ll_prev = ll;
    }
    let (_, grad) = break_model_loglik_grad(&data, beta[0], beta[1], k);
    let coef_grad_norm = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
    if !converged || !coef_grad_norm.is_finite() {
        return Err(Error::NonConvergence {
            iterations: MAX_OUTER_ITERS,
            gradient_norm: coef_grad_norm,
        });
    }

    // Wald interval from the coefficient Fisher information at the optimum,
    // dispersion treated as fixed.
    let (mut s_w, mut s_wx, mut s_wxx) = (0.0, 0.0, 0.0);
    for &(x, _) in &data {
        let x = x as f64;
        let mu = (beta[0] + beta[1] * x).exp();
        let w = mu * k / (k + mu);
        s_w += w;
        s_wx += w * x;
        s_wxx += w * x * x;
    }
    let det = s_w * s_wxx - s_wx * s_wx;
    if det <= 0.0 {
        return Err(Error::DegenerateDesign("singular information matrix".into()));
    }
    let var_b1 = s_w / det;
    let z = 1.959_963_984_540_054;
    let half = z * var_b1.sqrt();

    Ok(NegBinRegressionFit {
        intercept: beta[0],
        log_ratio: beta[1],
        dispersion: k,
        ci_log_ratio: (beta[1] - half, beta[1] + half),
    })
}

/// Lunch-contact model: negative binomial with no predictor, fitted with
/// reports above `cutoff` contributing only the upper-tail probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoredNegBinFit {
    pub mean: f64,
    pub dispersion: f64,
    pub cutoff: u32,
}

/// Log upper tail P(Y > cutoff) and log density table via the pmf recurrence.
fn censored_loglik(counts: &[(u32, usize)], n_censored: usize, cutoff: u32, mu: f64, k: f64) -> f64 {
    let mut ll = 0.0;
    for &(y, c) in counts {
        ll += c as f64 * nb_ln_pmf(y as f64, mu, k);
    }
    if n_censored > 0 {
        // f(0) and the ratio recurrence keep the CDF sum stable
        let mut pmf = (k / (k + mu)).powf(k);
        let mut cdf = pmf;
        for y in 0..cutoff {
            pmf *= (y as f64 + k) / (y as f64 + 1.0) * (mu / (k + mu));
            cdf += pmf;
        }
        let tail = (1.0 - cdf).max(1e-300);
        ll += n_censored as f64 * tail.ln();
    }
    ll
}

pub fn fit_lunch_model(survey: &SurveySample, cutoff: u32) -> Result<CensoredNegBinFit> {
    if survey.len() < 10 {
        return Err(Error::invalid(format!(
            "lunch model needs at least 10 records, got {}",
            survey.len()
        )));
    }
    if cutoff < 1 {
        return Err(Error::invalid("cutoff must be at least 1"));
    }
    let mut counts: std::collections::BTreeMap<u32, usize> = std::collections::BTreeMap::new();
    let mut n_censored = 0usize;
    for r in survey.records() {
        if r.lunch_contacts > cutoff {
            n_censored += 1;
        } else {
            *counts.entry(r.lunch_contacts).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::invalid("all lunch observations are censored"));
    }
    let counts: Vec<(u32, usize)> = counts.into_iter().collect();

    let mut ln_mu;
    let mut ln_k: f64 = 0.0;
    let mut ll_prev = f64::NEG_INFINITY;
    for iter in 0..MAX_OUTER_ITERS {
        let (new_mu, _) = golden_max(
            |lm| censored_loglik(&counts, n_censored, cutoff, lm.exp(), ln_k.exp()),
            -7.0,
            9.5,
        );
        ln_mu = new_mu;
        let (new_k, ll) = golden_max(
            |lk| censored_loglik(&counts, n_censored, cutoff, ln_mu.exp(), lk.exp()),
            LN_K_LO,
            LN_K_HI,
        );
        ln_k = new_k;
        if (ll - ll_prev).abs() < LL_TOL {
            return Ok(CensoredNegBinFit {
                mean: ln_mu.exp(),
                dispersion: ln_k.exp(),
                cutoff,
            });
        }
        ll_prev = ll;
        if iter + 1 == MAX_OUTER_ITERS {
            return Err(Error::NonConvergence {
                iterations: MAX_OUTER_ITERS,
                gradient_norm: f64::NAN,
            });
        }
    }
    unreachable!()
}

/// Per-break partner count for a student with `n_friends` close friends.
/// One break partner is one 10-minute unit; a day has five breaks.
pub fn sample_break_degree(fit: &NegBinRegressionFit, n_friends: u32, rng: &mut impl Rng) -> u32 {
    sample_neg_binomial(fit.mean_at(n_friends), fit.dispersion, rng) as u32
}

/// Lunch partners and their total 10-minute units. Each partner contributes
/// a uniform 1-5 units (10 to 50 minutes).
pub fn sample_lunch_units(fit: &CensoredNegBinFit, rng: &mut impl Rng) -> (u32, u32) {
    let partners = sample_neg_binomial(fit.mean, fit.dispersion, rng) as u32;
    let mut units = 0u32;
    for _ in 0..partners {
        units += rng.gen_range(1..=5u32);
    }
    (partners, units)
}

/// Fixed class-neighbor model: in each class a student has 2, 3 or 4
/// neighbors with probabilities 1/9, 4/9, 4/9.
#[derive(Debug, Clone, Copy)]
pub struct ClassNeighborModel {
    pub support: [u8; 3],
    pub probabilities: [f64; 3],
    pub classes_per_day: usize,
}

impl Default for ClassNeighborModel {
    fn default() -> Self {
        ClassNeighborModel {
            support: [2, 3, 4],
            probabilities: [1.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0],
            classes_per_day: CLASSES_PER_DAY,
        }
    }
}

impl ClassNeighborModel {
    pub fn sample_one(&self, rng: &mut impl Rng) -> u8 {
        // exact ninths
        match rng.gen_range(0..9u32) {
            0 => self.support[0],
            1..=4 => self.support[1],
            _ => self.support[2],
        }
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(&s, &p)| s as f64 * p)
            .sum()
    }
}

/// Per-student, per-class neighbor counts.
pub fn sample_class_neighbor_degrees(
    model: &ClassNeighborModel,
    n: usize,
    rng: &mut impl Rng,
) -> Vec<[u8; CLASSES_PER_DAY]> {
    assert!(n >= 1);
    (0..n)
        .map(|_| {
            let mut per_class = [0u8; CLASSES_PER_DAY];
            for c in per_class.iter_mut() {
                *c = model.sample_one(rng);
            }
            per_class
        })
        .collect()
}

/// One day's degree draws for every student.
#[derive(Debug, Clone)]
pub struct DegreeRealization {
    /// Break partners summed over the five breaks; one partner = one unit.
    pub break_units: Vec<u32>,
    pub lunch_partners: Vec<u32>,
    /// Total lunch 10-minute units (1-5 per partner).
    pub lunch_units: Vec<u32>,
    pub class_neighbors: Vec<[u8; CLASSES_PER_DAY]>,
}

impl DegreeRealization {
    /// Combined break + lunch unit degree, the stub count for matching.
    pub fn break_lunch_degree(&self, i: usize) -> u64 {
        self.break_units[i] as u64 + self.lunch_units[i] as u64
    }
}

pub fn sample_degree_realization(
    params: &DegreeModelParams,
    friend_counts: &[u32],
    rng: &mut impl Rng,
) -> DegreeRealization {
    let break_fit = params.break_fit();
    let lunch_fit = params.lunch_fit();
    let n = friend_counts.len();
    let mut break_units = Vec::with_capacity(n);
    let mut lunch_partners = Vec::with_capacity(n);
    let mut lunch_units = Vec::with_capacity(n);
    for &f in friend_counts {
        let mut units = 0u32;
        for _ in 0..BREAKS_PER_DAY {
            units += sample_break_degree(&break_fit, f, rng);
        }
        break_units.push(units);
        let (partners, units) = sample_lunch_units(&lunch_fit, rng);
        lunch_partners.push(partners);
        lunch_units.push(units);
    }
    let class_neighbors = sample_class_neighbor_degrees(&ClassNeighborModel::default(), n, rng);
    DegreeRealization {
        break_units,
        lunch_partners,
        lunch_units,
        class_neighbors,
    }
}

/// Closed-form expected 10-minute units per student per day, averaged over
/// the supplied friend counts.
pub fn expected_daily_units(params: &DegreeModelParams, friend_counts: &[u32]) -> f64 {
    let break_fit = params.break_fit();
    let mean_break = friend_counts
        .iter()
        .map(|&f| break_fit.mean_at(f))
        .sum::<f64>()
        / friend_counts.len() as f64;
    let class = ClassNeighborModel::default();
    BREAKS_PER_DAY as f64 * mean_break
        + 3.0 * params.lunch_mean
        + class.classes_per_day as f64 * class.mean() * UNITS_PER_CLASS as f64
}

/// Fitted degree-model parameters, the JSON handoff between the `fit` and
/// `simulate` stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeModelParams {
    pub intercept: f64,
    pub log_ratio: f64,
    pub dispersion: f64,
    pub lunch_mean: f64,
    pub lunch_dispersion: f64,
    pub cutoff: u32,
}

impl Default for DegreeModelParams {
    /// Bundled defaults: the published break-contact fit plus stand-in lunch
    /// parameters calibrated so the expected daily total is ~148 units.
    /// The lunch mean also has to leave the friend-fraction constraint
    /// feasible: 68% of break/lunch units must fit on friend dyads at 10
    /// units each, which a mean much above ~9 makes structurally impossible
    /// for students with few friends.
    fn default() -> Self {
        DegreeModelParams {
            intercept: 4.5f64.ln(),
            log_ratio: 1.03f64.ln(),
            dispersion: 2.0,
            lunch_mean: 8.0,
            lunch_dispersion: 1.5,
            cutoff: 30,
        }
    }
}

impl DegreeModelParams {
    pub fn from_fits(break_fit: &NegBinRegressionFit, lunch_fit: &CensoredNegBinFit) -> Self {
        DegreeModelParams {
            intercept: break_fit.intercept,
            log_ratio: break_fit.log_ratio,
            dispersion: break_fit.dispersion,
            lunch_mean: lunch_fit.mean,
            lunch_dispersion: lunch_fit.dispersion,
            cutoff: lunch_fit.cutoff,
        }
    }

    pub fn break_fit(&self) -> NegBinRegressionFit {
        NegBinRegressionFit {
            intercept: self.intercept,
            log_ratio: self.log_ratio,
            dispersion: self.dispersion,
            ci_log_ratio: (f64::NAN, f64::NAN),
        }
    }

    pub fn lunch_fit(&self) -> CensoredNegBinFit {
        CensoredNegBinFit {
            mean: self.lunch_mean,
            dispersion: self.lunch_dispersion,
            cutoff: self.cutoff,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// Fit both degree models from a preprocessed survey.
    pub fn fit(survey: &SurveySample, cutoff: u32) -> Result<Self> {
        let break_fit = fit_break_model(survey)?;
        let lunch_survey = survey.clone();
        let lunch_fit = fit_lunch_model(&lunch_survey, cutoff)?;
        Ok(Self::from_fits(&break_fit, &lunch_fit))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::{generate_synthetic_survey, NeighborMix, SurveyConfig, SurveyRecord};
    use crate::rng::stream_rng;

    fn record(friends: u32, breaks: u32, lunch: u32) -> SurveyRecord {
        SurveyRecord {
            break_contacts: breaks,
            lunch_contacts: lunch,
            n_close_friends: friends,
            pct_to_friends: 0.68,
            neighbor_mix: NeighborMix::Mix,
        }
    }

    #[test]
    fn break_fit_recovers_generating_parameters() {
        let survey = generate_synthetic_survey(
            &SurveyConfig {
                n: 5000,
                ..Default::default()
            },
            101,
        )
        .unwrap();
        let fit = fit_break_model(&survey).unwrap();
        let mean0 = fit.intercept.exp();
        let ratio = fit.log_ratio.exp();
        assert!((4.2..=4.8).contains(&mean0), "mean at zero friends {mean0}");
        assert!((1.02..=1.04).contains(&ratio), "rate ratio {ratio}");
        assert!(
            fit.ci_log_ratio.0 < fit.log_ratio && fit.log_ratio < fit.ci_log_ratio.1,
            "interval must contain the estimate"
        );
        assert!((1.0..=4.0).contains(&fit.dispersion), "dispersion {}", fit.dispersion);
    }

    #[test]
    fn break_fit_constant_response() {
        let survey = SurveySample::new(
            (0..200).map(|i| record(i % 17, 5, 5)).collect::<Vec<_>>(),
        )
        .unwrap();
        let fit = fit_break_model(&survey).unwrap();
        assert!((fit.intercept.exp() - 5.0).abs() < 0.02, "intercept {}", fit.intercept.exp());
        assert!((fit.log_ratio.exp() - 1.0).abs() < 0.005, "ratio {}", fit.log_ratio.exp());
    }

    #[test]
    fn break_fit_degenerate_design() {
        let survey =
            SurveySample::new((0..30).map(|i| record(5, i % 9, 5)).collect::<Vec<_>>()).unwrap();
        match fit_break_model(&survey) {
            Err(Error::DegenerateDesign(_)) => {}
            other => panic!("expected degenerate design, got {other:?}"),
        }
    }

    #[test]
    fn break_fit_gradient_small_and_matches_finite_differences() {
        let survey = generate_synthetic_survey(
            &SurveyConfig {
                n: 2000,
                ..Default::default()
            },
            7,
        )
        .unwrap();
        let data: Vec<(u32, u32)> = survey
            .records()
            .iter()
            .map(|r| (r.n_close_friends, r.break_contacts))
            .collect();
        let fit = fit_break_model(&survey).unwrap();
        let (_, grad) = break_model_loglik_grad(&data, fit.intercept, fit.log_ratio, fit.dispersion);
        let coef_norm = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
        assert!(coef_norm < 1e-4, "gradient norm at optimum {coef_norm}");

        // finite-difference agreement at a non-optimal point
        let theta = [fit.intercept + 0.05, fit.log_ratio - 0.002, fit.dispersion * 1.1];
        let (_, g) = break_model_loglik_grad(&data, theta[0], theta[1], theta[2]);
        let f = |t: [f64; 3]| break_model_loglik_grad(&data, t[0], t[1], t[2]).0;
        for dim in 0..3 {
            let h = 1e-6 * theta[dim].abs().max(1.0);
            let mut up = theta;
            up[dim] += h;
            let mut dn = theta;
            dn[dim] -= h;
            let fd = (f(up) - f(dn)) / (2.0 * h);
            let rel = (fd - g[dim]).abs() / g[dim].abs().max(1.0);
            assert!(rel < 1e-5, "dim {dim}: analytic {} vs fd {fd}", g[dim]);
        }
    }

    #[test]
    fn lunch_fit_recovery() {
        let mut rng = stream_rng(21, &[]);
        let records: Vec<SurveyRecord> = (0..5000)
            .map(|_| record(3, 4, sample_neg_binomial(8.0, 1.5, &mut rng) as u32))
            .collect();
        let survey = SurveySample::new(records).unwrap();
        let fit = fit_lunch_model(&survey, 30).unwrap();
        assert!(
            (fit.mean - 8.0).abs() / 8.0 < 0.10,
            "recovered mean {} vs 8.0",
            fit.mean
        );
    }

    #[test]
    fn lunch_fit_censoring_inactive_equals_uncensored() {
        let mut rng = stream_rng(22, &[]);
        let records: Vec<SurveyRecord> = (0..500)
            .map(|_| {
                record(
                    3,
                    4,
                    (sample_neg_binomial(6.0, 2.0, &mut rng) as u32).min(30),
                )
            })
            .collect();
        let survey = SurveySample::new(records).unwrap();
        let censored = fit_lunch_model(&survey, 30).unwrap();
        let effectively_uncensored = fit_lunch_model(&survey, 1_000_000).unwrap();
        assert_eq!(censored.mean, effectively_uncensored.mean);
        assert_eq!(censored.dispersion, effectively_uncensored.dispersion);
    }

    #[test]
    fn lunch_fit_censoring_discards_magnitude() {
        let base: Vec<SurveyRecord> = (0..100)
            .map(|i| record(3, 4, [2u32, 5, 8, 12, 20][i % 5]))
            .collect();
        let mut with_200 = base.clone();
        with_200.push(record(3, 4, 200));
        let mut with_31 = base;
        with_31.push(record(3, 4, 31));
        let fit_a = fit_lunch_model(&SurveySample::new(with_200).unwrap(), 30).unwrap();
        let fit_b = fit_lunch_model(&SurveySample::new(with_31).unwrap(), 30).unwrap();
        assert_eq!(fit_a, fit_b);
    }

    #[test]
    fn lunch_fit_all_censored_errors() {
        let records: Vec<SurveyRecord> = (0..20).map(|_| record(3, 4, 50)).collect();
        let survey = SurveySample::new(records).unwrap();
        assert!(fit_lunch_model(&survey, 30).is_err());
    }

    #[test]
    fn break_sampler_mean_at_zero_friends() {
        let fit = NegBinRegressionFit::reference_fixture();
        let mut rng = stream_rng(31, &[]);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| sample_break_degree(&fit, 0, &mut rng) as f64)
            .sum::<f64>()
            / n as f64;
        assert!((4.3..=4.7).contains(&mean), "mean {mean}");
    }

    #[test]
    fn break_sampler_mean_at_ten_friends() {
        // closed form: 4.5 * 1.03^10
        let expected = 4.5 * 1.03f64.powi(10);
        let fit = NegBinRegressionFit::reference_fixture();
        let mut rng = stream_rng(32, &[]);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| sample_break_degree(&fit, 10, &mut rng) as f64)
            .sum::<f64>()
            / n as f64;
        assert!(
            (mean - expected).abs() / expected < 0.05,
            "mean {mean} vs {expected}"
        );
    }

    #[test]
    fn nb_poisson_limit_variance_ratio() {
        let mut rng = stream_rng(33, &[]);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_neg_binomial(4.5, 1e7, &mut rng) as f64)
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let ratio = var / mean;
        assert!((ratio - 1.0).abs() < 0.03, "variance/mean {ratio}");

        // finite dispersion matches the analytic variance mu + mu^2/k
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_neg_binomial(4.5, 2.0, &mut rng) as f64)
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let expected_var = 4.5 + 4.5 * 4.5 / 2.0;
        assert!(
            (var - expected_var).abs() / expected_var < 0.05,
            "variance {var} vs {expected_var}"
        );
    }

    #[test]
    fn zero_mean_draw_is_zero() {
        let mut rng = stream_rng(34, &[]);
        assert_eq!(sample_neg_binomial(0.0, 2.0, &mut rng), 0);
    }

    #[test]
    fn lunch_units_zero_partners() {
        let fit = CensoredNegBinFit {
            mean: 1e-12,
            dispersion: 1.5,
            cutoff: 30,
        };
        let mut rng = stream_rng(35, &[]);
        assert_eq!(sample_lunch_units(&fit, &mut rng), (0, 0));
    }

    #[test]
    fn lunch_duration_uniform_over_five() {
        // lunch mean 0.9 makes single-partner draws common; condition on them
        let fit = CensoredNegBinFit {
            mean: 0.9,
            dispersion: 5.0,
            cutoff: 30,
        };
        let mut rng = stream_rng(36, &[]);
        let mut counts = [0usize; 6];
        let mut total = 0usize;
        while total < 50_000 {
            let (partners, units) = sample_lunch_units(&fit, &mut rng);
            if partners == 1 {
                counts[units as usize] += 1;
                total += 1;
            }
        }
        for d in 1..=5 {
            let freq = counts[d] as f64 / total as f64;
            assert!(
                (freq - 0.2).abs() < 0.01,
                "duration {d} frequency {freq}"
            );
        }
    }

    #[test]
    fn lunch_units_mean_is_three_times_partners() {
        let fit = CensoredNegBinFit {
            mean: 10.8,
            dispersion: 1.5,
            cutoff: 30,
        };
        let mut rng = stream_rng(37, &[]);
        let n = 100_000;
        let (mut sum_partners, mut sum_units) = (0u64, 0u64);
        for _ in 0..n {
            let (p, u) = sample_lunch_units(&fit, &mut rng);
            sum_partners += p as u64;
            sum_units += u as u64;
        }
        let ratio = sum_units as f64 / sum_partners as f64;
        assert!((ratio - 3.0).abs() / 3.0 < 0.03, "units/partners {ratio}");
    }

    #[test]
    fn class_neighbor_support_and_mean() {
        let model = ClassNeighborModel::default();
        let mut rng = stream_rng(38, &[]);
        let draws = sample_class_neighbor_degrees(&model, 100_000 / CLASSES_PER_DAY, &mut rng);
        let mut sum = 0u64;
        let mut count = 0u64;
        for per_class in &draws {
            for &d in per_class {
                assert!((2..=4).contains(&d));
                sum += d as u64;
                count += 1;
            }
        }
        let mean = sum as f64 / count as f64;
        let expected = 30.0 / 9.0;
        assert!(
            (mean - expected).abs() / expected < 0.01,
            "mean {mean} vs {expected}"
        );
        // expected class-contact units per day: 7 classes x mean neighbors x 4 units
        let daily = model.classes_per_day as f64 * model.mean() * UNITS_PER_CLASS as f64;
        assert!((daily - 93.333).abs() < 0.01, "daily class units {daily}");
    }

    #[test]
    fn expected_units_near_148() {
        // over the default friend-count marginal NB(8, 2) the daily total
        // sits at the published 148-unit mean; the zero-friend total is
        // within the +-10% band
        let params = DegreeModelParams::default();
        let mut rng = stream_rng(40, &[]);
        let friends: Vec<u32> = (0..200_000)
            .map(|_| sample_neg_binomial(8.0, 2.0, &mut rng) as u32)
            .collect();
        let total = expected_daily_units(&params, &friends);
        assert!((total - 148.0).abs() < 2.0, "expected units {total}");
        let zero = expected_daily_units(&params, &[0]);
        assert!((zero - 148.0).abs() / 148.0 < 0.10, "zero-friend units {zero}");
    }

    #[test]
    fn params_json_roundtrip() {
        let params = DegreeModelParams::default();
        let f = tempfile::NamedTempFile::new().unwrap();
        params.store(f.path()).unwrap();
        let back = DegreeModelParams::load(f.path()).unwrap();
        assert_eq!(params, back);
    }

    #[test]
    fn reference_fixture_matches_published_values() {
        let fixture = NegBinRegressionFit::reference_fixture();
        assert!((fixture.intercept.exp() - 4.5).abs() < 1e-12);
        assert!((fixture.log_ratio.exp() - 1.03).abs() < 1e-12);
        assert!((fixture.ci_log_ratio.0.exp() - 1.01).abs() < 1e-12);
        assert!((fixture.ci_log_ratio.1.exp() - 1.04).abs() < 1e-12);
    }
}
