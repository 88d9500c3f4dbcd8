//! Driving-primitive decoding.
//!
//! Lateral vehicle motion is modeled as a four-state hidden Markov model
//! over the primitives Idle, Approach, Cross and Change with Gaussian
//! emissions on the observation `(d_c, kappa)`. The transition structure
//! is nearly diagonal and contains hard zeros: a lane change cannot jump
//! from Idle straight to Change, nor fall from Change back to Idle
//! without passing a transient state. Decoding maximizes the joint path
//! probability (Viterbi) in log space, where forbidden transitions are
//! exactly `-inf`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureSeries, Observation};
use crate::ingest::ObjectId;

pub const N_STATES: usize = 4;
const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Primitive {
    /// Following the reference lane.
    Idle = 0,
    /// Drifting toward a lane border.
    Approach = 1,
    /// Footprint on the border, center still near the source side.
    Cross = 2,
    /// Transitioning onto the target lane.
    Change = 3,
}

impl Primitive {
    pub const ALL: [Primitive; N_STATES] =
        [Primitive::Idle, Primitive::Approach, Primitive::Cross, Primitive::Change];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl TryFrom<usize> for Primitive {
    type Error = Error;
    fn try_from(v: usize) -> Result<Self> {
        Primitive::ALL
            .get(v)
            .copied()
            .ok_or_else(|| Error::Model(format!("primitive index {v} out of range")))
    }
}

impl std::fmt::Display for Primitive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Primitive::Idle => "idle",
            Primitive::Approach => "approach",
            Primitive::Cross => "cross",
            Primitive::Change => "change",
        };
        f.write_str(name)
    }
}

/// One weighted Gaussian over the two observation dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    #[serde(default = "one")]
    pub weight: f64,
    pub mean: [f64; 2],
    pub std: [f64; 2],
}

fn one() -> f64 {
    1.0
}

impl GaussianComponent {
    fn logpdf(&self, obs: Observation) -> f64 {
        let x = [obs.d_c, obs.kappa];
        let mut lp = 0.0;
        for ((&x, &m), &s) in x.iter().zip(&self.mean).zip(&self.std) {
            let z = (x - m) / s;
            lp += -s.ln() - 0.5 * LN_2PI - 0.5 * z * z;
        }
        lp
    }
}

/// Emission distribution of one state: a mixture with any number of
/// components, so externally trained multi-component models load without
/// code changes. The built-in parameters use a single component per
/// state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateEmission {
    Single { mean: [f64; 2], std: [f64; 2] },
    Mixture { components: Vec<GaussianComponent> },
}

impl StateEmission {
    pub fn single(mean: [f64; 2], std: [f64; 2]) -> Self {
        StateEmission::Single { mean, std }
    }

    pub fn components(&self) -> Vec<GaussianComponent> {
        match self {
            StateEmission::Single { mean, std } => {
                vec![GaussianComponent { weight: 1.0, mean: *mean, std: *std }]
            }
            StateEmission::Mixture { components } => components.clone(),
        }
    }

    fn logpdf(&self, obs: Observation) -> f64 {
        match self {
            StateEmission::Single { mean, std } => {
                GaussianComponent { weight: 1.0, mean: *mean, std: *std }.logpdf(obs)
            }
            StateEmission::Mixture { components } => {
                // logsumexp over weighted components
                let terms: Vec<f64> = components
                    .iter()
                    .map(|c| c.weight.ln() + c.logpdf(obs))
                    .collect();
                let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if m.is_infinite() {
                    return m;
                }
                m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmParams {
    /// Row-stochastic transition matrix, `a[i][j] = P(j | i)`.
    #[serde(rename = "A")]
    pub transition: [[f64; N_STATES]; N_STATES],
    pub pi: [f64; N_STATES],
    pub emissions: [StateEmission; N_STATES],
}

/// Transition frequencies in percent, as trained on naturalistic highway
/// data. Zeros are structural: those transitions never occur.
const TRANSITION_PERCENT: [[f64; N_STATES]; N_STATES] = [
    [98.94, 1.03, 0.03, 0.00],
    [1.46, 97.53, 1.01, 0.00],
    [0.47, 8.28, 86.17, 5.08],
    [0.00, 0.33, 5.98, 93.69],
];

const EMISSION_DC_MEAN: [f64; N_STATES] = [0.09, 0.33, 0.53, 0.89];
const EMISSION_DC_STD: [f64; N_STATES] = [0.06, 0.08, 0.09, 0.11];
const EMISSION_KAPPA_MEAN: [f64; N_STATES] = [0.0, 0.0, 1.0, 1.0];
/// The binary marker has no trained spread; it gets a floor std so the
/// Gaussian stays proper.
const EMISSION_KAPPA_STD: f64 = 0.1;

impl HmmParams {
    /// Built-in parameters: percent transition frequencies converted to
    /// probabilities with each row renormalized to sum to one, uniform
    /// initial distribution, single-Gaussian emissions per state.
    pub fn default_params() -> Self {
        let mut transition = [[0.0; N_STATES]; N_STATES];
        for (i, row) in TRANSITION_PERCENT.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            for (j, &v) in row.iter().enumerate() {
                transition[i][j] = v / sum;
            }
        }
        let emissions = std::array::from_fn(|i| {
            StateEmission::single(
                [EMISSION_DC_MEAN[i], EMISSION_KAPPA_MEAN[i]],
                [EMISSION_DC_STD[i], EMISSION_KAPPA_STD],
            )
        });
        HmmParams {
            transition,
            pi: [1.0 / N_STATES as f64; N_STATES],
            emissions,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.transition.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Model(format!(
                    "transition row {i} sums to {sum}, expected 1"
                )));
            }
            if row.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::Model(format!("transition row {i} out of [0, 1]")));
            }
        }
        let pi_sum: f64 = self.pi.iter().sum();
        if (pi_sum - 1.0).abs() > 1e-9 || self.pi.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::Model("initial distribution is not stochastic".into()));
        }
        for (i, em) in self.emissions.iter().enumerate() {
            let comps = em.components();
            if comps.is_empty() {
                return Err(Error::Model(format!("state {i} has no emission component")));
            }
            let wsum: f64 = comps.iter().map(|c| c.weight).sum();
            if (wsum - 1.0).abs() > 1e-9 {
                return Err(Error::Model(format!(
                    "state {i} component weights sum to {wsum}"
                )));
            }
            for c in &comps {
                if c.std.iter().any(|&s| !s.is_finite() || s <= 0.0) {
                    return Err(Error::Model(format!("state {i} has non-positive std")));
                }
                if c.mean.iter().any(|m| !m.is_finite()) {
                    return Err(Error::Model(format!("state {i} has non-finite mean")));
                }
            }
        }
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let params: HmmParams =
            serde_json::from_str(&raw).map_err(|e| Error::json(path, e))?;
        params.validate()?;
        Ok(params)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let raw = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, raw).map_err(|e| Error::io(path, e))
    }
}

impl Default for HmmParams {
    fn default() -> Self {
        HmmParams::default_params()
    }
}

/// Log emission density of `obs` under `state`.
pub fn emission_logpdf(params: &HmmParams, state: Primitive, obs: Observation) -> f64 {
    params.emissions[state.index()].logpdf(obs)
}

#[derive(Debug, Clone)]
pub struct PrimitiveSeries {
    pub object_id: ObjectId,
    pub labels: Vec<Primitive>,
    /// Joint log probability of the decoded path and the observations.
    pub log_likelihood: f64,
}

/// Viterbi decoding of an observation series.
///
/// Works in log space; zero transition probabilities are `-inf` and can
/// never be bridged. Ties are broken toward the lower state index, both
/// in the per-step argmax and in the final state selection.
pub fn viterbi(series: &FeatureSeries, params: &HmmParams) -> Result<PrimitiveSeries> {
    for (frame, obs) in series.observations.iter().enumerate() {
        if !obs.d_c.is_finite() || !obs.kappa.is_finite() {
            return Err(Error::NonFiniteObservation { frame });
        }
    }
    let n = series.observations.len();
    if n == 0 {
        return Ok(PrimitiveSeries {
            object_id: series.object_id.clone(),
            labels: Vec::new(),
            log_likelihood: 0.0,
        });
    }

    let ln_a: [[f64; N_STATES]; N_STATES] =
        std::array::from_fn(|i| std::array::from_fn(|j| params.transition[i][j].ln()));

    let mut delta = [0.0f64; N_STATES];
    for (j, d) in delta.iter_mut().enumerate() {
        *d = params.pi[j].ln() + params.emissions[j].logpdf(series.observations[0]);
    }
    let mut backptr = vec![[0usize; N_STATES]; n];

    // Indexed on purpose: t addresses observations and backptr in step,
    // mirroring the recurrence.
    #[allow(clippy::needless_range_loop)]
    for t in 1..n {
        let mut next = [f64::NEG_INFINITY; N_STATES];
        for j in 0..N_STATES {
            let mut best = f64::NEG_INFINITY;
            let mut best_i = 0;
            for i in 0..N_STATES {
                let score = delta[i] + ln_a[i][j];
                if score > best {
                    best = score;
                    best_i = i;
                }
            }
            next[j] = best + params.emissions[j].logpdf(series.observations[t]);
            backptr[t][j] = best_i;
        }
        delta = next;
    }

    let mut last = 0;
    for j in 1..N_STATES {
        if delta[j] > delta[last] {
            last = j;
        }
    }
    let log_likelihood = delta[last];

    let mut path = vec![0usize; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = backptr[t][path[t]];
    }

    Ok(PrimitiveSeries {
        object_id: series.object_id.clone(),
        labels: path
            .into_iter()
            .map(|i| Primitive::try_from(i).expect("state index in range"))
            .collect(),
        log_likelihood,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn obs_series(pairs: &[(f64, f64)]) -> FeatureSeries {
        FeatureSeries {
            object_id: ObjectId::new("t"),
            observations: pairs
                .iter()
                .map(|&(d_c, kappa)| Observation { d_c, kappa })
                .collect(),
            raw: Vec::new(),
            reference_lane: Vec::new(),
        }
    }

    /// Exhaustive maximum over all state paths, summing in the same
    /// left-to-right order as the decoder so scores match bitwise. Ties
    /// resolve like the decoder's backward reconstruction: the path that
    /// is smallest when compared from its last element backward wins.
    fn brute_force(series: &FeatureSeries, params: &HmmParams) -> (Vec<usize>, f64) {
        let n = series.observations.len();
        let emit: Vec<[f64; N_STATES]> = series
            .observations
            .iter()
            .map(|&o| std::array::from_fn(|j| params.emissions[j].logpdf(o)))
            .collect();
        let mut best: Option<(Vec<usize>, f64)> = None;
        let total = (N_STATES as u64).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let path: Vec<usize> = (0..n)
                .map(|_| {
                    let s = (c % N_STATES as u64) as usize;
                    c /= N_STATES as u64;
                    s
                })
                .collect();
            let mut lp = params.pi[path[0]].ln() + emit[0][path[0]];
            for t in 1..n {
                // Same association order as the decoder's recurrence, so
                // equal paths produce bitwise equal scores.
                lp += params.transition[path[t - 1]][path[t]].ln();
                lp += emit[t][path[t]];
            }
            let better = match &best {
                None => true,
                Some((bp, bv)) => {
                    lp > *bv
                        || (lp == *bv
                            && path.iter().rev().lt(bp.iter().rev()))
                }
            };
            if better {
                best = Some((path, lp));
            }
        }
        best.unwrap()
    }

    #[test]
    fn default_transition_matches_reference_percentages() {
        let params = HmmParams::default_params();
        params.validate().unwrap();
        for (i, row) in TRANSITION_PERCENT.iter().enumerate() {
            let row_sum: f64 = params.transition[i].iter().sum();
            assert!((row_sum - 1.0).abs() < 1e-12, "row {i} sums to {row_sum}");
            for (j, &pct) in row.iter().enumerate() {
                let expected = pct / 100.0;
                assert!(
                    (params.transition[i][j] - expected).abs() <= 1e-12,
                    "a[{i}][{j}]"
                );
            }
        }
        assert_eq!(params.transition[0][3], 0.0);
        assert_eq!(params.transition[1][3], 0.0);
        assert_eq!(params.transition[3][0], 0.0);
    }

    #[test]
    fn default_emissions_match_reference_table() {
        let params = HmmParams::default_params();
        for (i, em) in params.emissions.iter().enumerate() {
            let c = &em.components()[0];
            assert_relative_eq!(c.mean[0], EMISSION_DC_MEAN[i]);
            assert_relative_eq!(c.std[0], EMISSION_DC_STD[i]);
            assert_relative_eq!(c.mean[1], EMISSION_KAPPA_MEAN[i]);
            assert_relative_eq!(c.std[1], 0.1);
        }
        assert_relative_eq!(params.pi[0], 0.25);
    }

    #[test]
    fn emission_logpdf_peaks_at_the_mean() {
        let params = HmmParams::default_params();
        let peak = emission_logpdf(
            &params,
            Primitive::Idle,
            Observation { d_c: 0.09, kappa: 0.0 },
        );
        // ln(1/(2 pi * 0.06 * 0.1)), high-precision reference value.
        assert_relative_eq!(peak, 3.2781187433447366, epsilon = 1e-12);
        let one_sigma = emission_logpdf(
            &params,
            Primitive::Idle,
            Observation { d_c: 0.15, kappa: 0.0 },
        );
        assert_relative_eq!(peak - one_sigma, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn emission_logpdf_reference_point() {
        // Cross state at (0.61, 1.0), checked against a 40-digit
        // evaluation of the closed form.
        let params = HmmParams::default_params();
        let v = emission_logpdf(
            &params,
            Primitive::Cross,
            Observation { d_c: 0.61, kappa: 1.0 },
        );
        assert_relative_eq!(v, 2.4775919068415105, epsilon = 1e-12);
    }

    #[test]
    fn mixture_emission_reduces_to_single_component() {
        let single = StateEmission::single([0.5, 1.0], [0.1, 0.2]);
        let mixture = StateEmission::Mixture {
            components: vec![GaussianComponent {
                weight: 1.0,
                mean: [0.5, 1.0],
                std: [0.1, 0.2],
            }],
        };
        let obs = Observation { d_c: 0.61, kappa: 0.7 };
        assert_relative_eq!(single.logpdf(obs), mixture.logpdf(obs), epsilon = 1e-12);
    }

    #[test]
    fn decodes_constant_idle_observation_run() {
        let params = HmmParams::default_params();
        let series = obs_series(&[(0.09, 0.0); 50]);
        let decoded = viterbi(&series, &params).unwrap();
        assert!(decoded.labels.iter().all(|&l| l == Primitive::Idle));
    }

    #[test]
    fn single_change_like_observation_decodes_change() {
        let params = HmmParams::default_params();
        let series = obs_series(&[(0.89, 1.0)]);
        let decoded = viterbi(&series, &params).unwrap();
        assert_eq!(decoded.labels, vec![Primitive::Change]);
    }

    #[test]
    fn clean_lane_change_profile_decodes_in_phase_order() {
        // d_c ramps from the lane center to the neighbor center while the
        // crossing marker is set; expected labels were frozen from an
        // exhaustive path enumeration.
        let params = HmmParams::default_params();
        let d_c = [0.02, 0.03, 0.05, 0.30, 0.38, 0.45, 0.52, 0.60, 0.78, 0.88, 0.93, 0.95];
        let kappa = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let pairs: Vec<(f64, f64)> =
            d_c.iter().zip(&kappa).map(|(&d, &k)| (d, k)).collect();
        let series = obs_series(&pairs);
        let decoded = viterbi(&series, &params).unwrap();
        let expected = [0, 0, 0, 1, 1, 2, 2, 2, 3, 3, 3, 3];
        let got: Vec<usize> = decoded.labels.iter().map(|l| l.index()).collect();
        assert_eq!(got, expected);

        let (brute_path, brute_lp) = brute_force(&series, &params);
        assert_eq!(got, brute_path);
        assert_eq!(decoded.log_likelihood, brute_lp);
    }

    #[test]
    fn viterbi_matches_brute_force_on_idle_prefix() {
        let params = HmmParams::default_params();
        let series = obs_series(&[(0.09, 0.0); 8]);
        let decoded = viterbi(&series, &params).unwrap();
        let (brute_path, brute_lp) = brute_force(&series, &params);
        let got: Vec<usize> = decoded.labels.iter().map(|l| l.index()).collect();
        assert_eq!(got, brute_path);
        assert_eq!(decoded.log_likelihood, brute_lp);
    }

    #[test]
    fn forbidden_transitions_never_appear() {
        // Observations engineered to tempt an Idle -> Change jump.
        let params = HmmParams::default_params();
        let mut pairs = vec![(0.09, 0.0); 5];
        pairs.push((0.89, 1.0));
        pairs.extend([(0.89, 1.0); 4]);
        let decoded = viterbi(&obs_series(&pairs), &params).unwrap();
        for w in decoded.labels.windows(2) {
            let a = params.transition[w[0].index()][w[1].index()];
            assert!(a > 0.0, "forbidden transition {:?} -> {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn path_log_likelihood_is_consistent() {
        let params = HmmParams::default_params();
        let pairs = [(0.05, 0.0), (0.3, 0.0), (0.5, 1.0), (0.9, 1.0), (0.95, 1.0)];
        let series = obs_series(&pairs);
        let decoded = viterbi(&series, &params).unwrap();
        let mut lp = params.pi[decoded.labels[0].index()].ln()
            + emission_logpdf(&params, decoded.labels[0], series.observations[0]);
        for t in 1..pairs.len() {
            lp += params.transition[decoded.labels[t - 1].index()][decoded.labels[t].index()]
                .ln()
                + emission_logpdf(&params, decoded.labels[t], series.observations[t]);
        }
        assert_relative_eq!(lp, decoded.log_likelihood, epsilon = 1e-9);
    }

    #[test]
    fn non_finite_observation_is_rejected_with_frame() {
        let params = HmmParams::default_params();
        let series = obs_series(&[(0.09, 0.0), (f64::NAN, 0.0)]);
        match viterbi(&series, &params) {
            Err(Error::NonFiniteObservation { frame }) => assert_eq!(frame, 1),
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }

    #[test]
    fn empty_series_decodes_empty() {
        let params = HmmParams::default_params();
        let decoded = viterbi(&obs_series(&[]), &params).unwrap();
        assert!(decoded.labels.is_empty());
    }

    #[test]
    fn params_json_round_trip() {
        let params = HmmParams::default_params();
        let dir = std::env::temp_dir().join("rampmine-hmm-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("params.json");
        params.save_json(&path).unwrap();
        let loaded = HmmParams::load_json(&path).unwrap();
        assert_eq!(loaded, params);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut params = HmmParams::default_params();
        params.transition[0][0] += 0.1;
        assert!(params.validate().is_err());

        let mut params = HmmParams::default_params();
        params.emissions[2] = StateEmission::single([0.5, 1.0], [0.0, 0.1]);
        assert!(params.validate().is_err());
    }

    #[test]
    fn decoding_is_deterministic() {
        let params = HmmParams::default_params();
        let pairs: Vec<(f64, f64)> = (0..40)
            .map(|i| (0.02 * i as f64, if i % 3 == 0 { 1.0 } else { 0.0 }))
            .collect();
        let series = obs_series(&pairs);
        let a = viterbi(&series, &params).unwrap();
        let b = viterbi(&series, &params).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.log_likelihood, b.log_likelihood);
    }
}
