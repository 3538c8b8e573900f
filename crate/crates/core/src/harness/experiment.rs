use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instance::{derive_seed, gen_instance_prepared, RadiusPolicy};
use crate::decode::{cvp_enumerate, decode_prepared, DEFAULT_CVP_CAP};
use crate::error::{LatticeError, Result};
use crate::numerics::rational::{opt_rational_str, rational_str, to_f64};
use crate::numerics::{rat, Rational};
use crate::qary::{bound_report_prepared, PreparedLattice, QaryLatticeSpec};
use crate::reduction::{LllParams, DEFAULT_SVP_CAP};

fn default_svp_cap() -> usize {
    DEFAULT_SVP_CAP
}

fn default_cvp_cap() -> usize {
    DEFAULT_CVP_CAP
}

fn default_specs_per_shape() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    pub qs: Vec<u64>,
    /// Random matrices `A` drawn for every admissible `(n, k, q)`.
    #[serde(default = "default_specs_per_shape")]
    pub specs_per_shape: usize,
    #[serde(with = "rational_str")]
    pub delta: Rational,
    pub radius_policy: RadiusPolicy,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_svp_cap")]
    pub svp_cap: usize,
    #[serde(default = "default_cvp_cap")]
    pub cvp_cap: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<LllParams> {
        if self.trials == 0 {
            return Err(LatticeError::InvalidParameter("trials must be at least 1".into()));
        }
        if self.ns.is_empty() || self.ks.is_empty() || self.qs.is_empty() || self.specs_per_shape == 0 {
            return Err(LatticeError::InvalidParameter("n, k and q lists must be nonempty".into()));
        }
        self.radius_policy.validate()?;
        LllParams::new(self.delta.clone())
    }

    /// The specs of the experiment in a fixed order.
    pub fn specs(&self) -> Vec<QaryLatticeSpec> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &k in &self.ks {
                for &q in &self.qs {
                    if k == 0 || k > n {
                        continue;
                    }
                    for _ in 0..self.specs_per_shape {
                        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, out.len() as u64, 0));
                        let a = (0..n).map(|_| (0..k).map(|_| rng.random_range(0..q) as i64).collect()).collect();
                        out.push(QaryLatticeSpec::new(n, q, k, a));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecSummary {
    pub spec_index: usize,
    pub spec: QaryLatticeSpec,
    /// Set when the lattice could not be prepared; no trials ran.
    pub spec_error: Option<String>,
    #[serde(with = "opt_rational_str")]
    pub lambda1_sq: Option<Rational>,
    pub trials: u64,
    pub rejected: u64,
    pub errors: u64,
    pub first_error: Option<String>,
    pub decoded: u64,
    pub recovered: u64,
    pub recovery_rate: Option<f64>,
    pub within_guarantee: u64,
    #[serde(with = "opt_rational_str")]
    pub mean_residual_sq: Option<Rational>,
    pub fact24_min_log_margin: Option<f64>,
    /// `min_i ell_i` minus the profile floor.
    pub prop25_slack: Option<f64>,
    pub babai_factor_checked: u64,
    pub babai_factor_violations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub specs: Vec<SpecSummary>,
    pub total_trials: u64,
    pub total_rejected: u64,
    pub total_errors: u64,
    pub total_decoded: u64,
    pub total_recovered: u64,
    pub recovery_rate: Option<f64>,
    /// Not serialized, so that summaries of one config are byte-identical.
    #[serde(skip)]
    pub wall_clock: Duration,
}

enum Outcome {
    Rejected,
    Failed(String),
    Decoded { recovered: bool, within: bool, residual_sq: Rational, factor_ok: Option<bool> },
}

fn run_trial(prep: &PreparedLattice, cfg: &ExperimentConfig, spec_index: usize, trial: u64) -> Outcome {
    let attempt = || -> Result<Outcome> {
        let inst = gen_instance_prepared(prep, &cfg.radius_policy, derive_seed(cfg.seed, spec_index as u64, trial + 1))?;
        let planted = inst.planted.as_ref().expect("generated instances are planted");
        let truth = prep.lattice_vector(&planted.v_coefficients)?;
        let report = decode_prepared(prep, &inst.target)?;
        let factor_ok = if prep.spec.n <= cfg.cvp_cap {
            let c = cvp_enumerate(&prep.reduced, &inst.target, cfg.cvp_cap)?;
            let opt = (&inst.target - &c).norm_sq();
            let factor = Rational::from_integer(BigInt::one() << prep.spec.n);
            Some(report.residual_sq <= factor * opt)
        } else {
            None
        };
        Ok(Outcome::Decoded {
            recovered: report.decoded_vector == truth,
            within: report.within_guarantee,
            residual_sq: report.residual_sq,
            factor_ok,
        })
    };
    match attempt() {
        Ok(o) => o,
        Err(LatticeError::RadiusTooLarge { .. }) => Outcome::Rejected,
        Err(e) => Outcome::Failed(e.to_string()),
    }
}

fn rate(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn summarize_spec(cfg: &ExperimentConfig, params: &LllParams, spec_index: usize, spec: QaryLatticeSpec) -> SpecSummary {
    let mut s = SpecSummary {
        spec_index,
        spec,
        spec_error: None,
        lambda1_sq: None,
        trials: cfg.trials,
        rejected: 0,
        errors: 0,
        first_error: None,
        decoded: 0,
        recovered: 0,
        recovery_rate: None,
        within_guarantee: 0,
        mean_residual_sq: None,
        fact24_min_log_margin: None,
        prop25_slack: None,
        babai_factor_checked: 0,
        babai_factor_violations: 0,
    };
    let prep = match PreparedLattice::new(&s.spec, params, cfg.svp_cap) {
        Ok(p) => p,
        Err(e) => {
            s.spec_error = Some(e.to_string());
            return s;
        }
    };
    let bounds = bound_report_prepared(&prep);
    s.lambda1_sq = prep.lambda1_sq.clone();
    s.fact24_min_log_margin = Some(bounds.fact24_min_log_margin);
    s.prop25_slack = Some(bounds.min_ell - bounds.prop25_floor);

    let outcomes: Vec<Outcome> = (0..cfg.trials).into_par_iter().map(|t| run_trial(&prep, cfg, spec_index, t)).collect();
    let mut residual_total = Rational::zero();
    for o in outcomes {
        match o {
            Outcome::Rejected => s.rejected += 1,
            Outcome::Failed(msg) => {
                s.errors += 1;
                s.first_error.get_or_insert(msg);
            }
            Outcome::Decoded { recovered, within, residual_sq, factor_ok } => {
                s.decoded += 1;
                s.recovered += u64::from(recovered);
                s.within_guarantee += u64::from(within);
                residual_total += residual_sq;
                if let Some(ok) = factor_ok {
                    s.babai_factor_checked += 1;
                    s.babai_factor_violations += u64::from(!ok);
                }
            }
        }
    }
    s.recovery_rate = rate(s.recovered, s.decoded);
    if s.decoded > 0 {
        s.mean_residual_sq = Some(residual_total * rat(1, s.decoded as i64));
    }
    s
}

/// Generates, decodes and checks every spec and trial of `cfg`. Trials run in
/// parallel; all aggregates are exact counts or exact sums, so the summary
/// does not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let start = Instant::now();
    let params = cfg.validate()?;
    let specs: Vec<SpecSummary> = cfg
        .specs()
        .into_par_iter()
        .enumerate()
        .map(|(i, spec)| summarize_spec(cfg, &params, i, spec))
        .collect();
    let total = |f: fn(&SpecSummary) -> u64| specs.iter().map(f).sum::<u64>();
    let total_trials = total(|s| if s.spec_error.is_some() { 0 } else { s.trials });
    let total_decoded = total(|s| s.decoded);
    let total_recovered = total(|s| s.recovered);
    Ok(ExperimentSummary {
        config: cfg.clone(),
        total_trials,
        total_rejected: total(|s| s.rejected),
        total_errors: total(|s| s.errors),
        total_decoded,
        total_recovered,
        recovery_rate: rate(total_recovered, total_decoded),
        specs,
        wall_clock: start.elapsed(),
    })
}

impl ExperimentSummary {
    /// Plain-text table, one line per spec.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:>4} {:>3} {:>3} {:>6} {:>7} {:>8} {:>9} {:>8} {:>12} {:>10} {:>10}\n",
            "spec", "n", "k", "q", "trials", "rejected", "recovered", "rate", "mean_res_sq", "fact24", "prop25"
        ));
        for s in &self.specs {
            let fmt_opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
            out.push_str(&format!(
                "{:>4} {:>3} {:>3} {:>6} {:>7} {:>8} {:>9} {:>8} {:>12} {:>10} {:>10}\n",
                s.spec_index,
                s.spec.n,
                s.spec.k,
                s.spec.q,
                s.trials,
                s.rejected,
                s.recovered,
                fmt_opt(s.recovery_rate),
                fmt_opt(s.mean_residual_sq.as_ref().map(to_f64)),
                fmt_opt(s.fact24_min_log_margin),
                fmt_opt(s.prop25_slack),
            ));
            if let Some(e) = s.spec_error.as_ref().or(s.first_error.as_ref()) {
                out.push_str(&format!("     error: {e}\n"));
            }
        }
        out.push_str(&format!(
            "total: {} trials, {} rejected, {} errors, {} recovered of {} decoded, {:.3} s\n",
            self.total_trials,
            self.total_rejected,
            self.total_errors,
            self.total_recovered,
            self.total_decoded,
            self.wall_clock.as_secs_f64()
        ));
        out
    }
}
