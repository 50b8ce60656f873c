//! End-to-end workflows: training discrepancy forests on reference data and
//! propagating reference stresses through the channel solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    relative_l2, solve_baseline, solve_from_baseline, ChannelConfig, ChannelState, Injection,
};
use crate::dns::{build_targets, DnsProfile, TrainingSet};
use crate::features::FeatureSet;
use crate::forest::{ForestHyperparams, RegressionForest, TargetKind};
use crate::{Error, Matrix, Result};

/// Baseline solution at `re_tau` with the reference profile on its grid.
#[derive(Clone, Debug)]
pub struct Case {
    pub baseline: ChannelState,
    pub reference: DnsProfile,
}

/// Solves the baseline at each nominal `Re_tau` (in parallel) and
/// interpolates the paired reference data onto its grid.
pub fn prepare_cases(cfg: &ChannelConfig, profiles: &[(f64, DnsProfile)]) -> Result<Vec<Case>> {
    profiles
        .par_iter()
        .map(|(re_tau, p)| {
            let c = ChannelConfig {
                re_tau: *re_tau,
                ..cfg.clone()
            };
            let baseline = solve_baseline(&c)?;
            let reference = p.onto_grid(&baseline.y_plus, c.re_tau)?;
            Ok(Case {
                baseline,
                reference,
            })
        })
        .collect()
}

pub fn training_set(
    cases: &[Case],
    kind: TargetKind,
    features: &FeatureSet,
) -> Result<TrainingSet> {
    let sets = cases
        .iter()
        .map(|c| build_targets(&c.baseline, &c.reference, kind, features))
        .collect::<Result<Vec<_>>>()?;
    TrainingSet::concat(&sets)
}

/// Mean squared deviation from the per-column mean: the error of the best
/// constant predictor.
pub fn mean_predictor_mse(y: &Matrix) -> f64 {
    let n = y.n_rows() as f64;
    let mut acc = 0.0;
    for j in 0..y.n_cols() {
        let col = y.column(j);
        let mean = col.iter().sum::<f64>() / n;
        acc += col.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    }
    acc / (n * y.n_cols() as f64)
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub forest: RegressionForest,
    pub train: TrainingSet,
    pub test: Option<TrainingSet>,
    pub train_mse: f64,
    pub test_mse: Option<f64>,
    /// Error of the constant-mean predictor on the held-out targets.
    pub test_baseline_mse: Option<f64>,
}

/// Fits a forest on the training cases and scores it on the held-out ones.
pub fn train(
    train_cases: &[Case],
    test_cases: &[Case],
    kind: TargetKind,
    hp: &ForestHyperparams,
    features: &FeatureSet,
) -> Result<TrainOutcome> {
    let train = training_set(train_cases, kind, features)?;
    if train.is_empty() {
        return Err(Error::Data("no usable training rows".into()));
    }
    let forest = RegressionForest::fit_named(
        &train.x,
        &train.y,
        hp,
        train.feature_names.clone(),
        train.target_names.clone(),
    )?;
    let train_mse = forest.mse(&train.x, &train.y)?;
    let (test, test_mse, test_baseline_mse) = if test_cases.is_empty() {
        (None, None, None)
    } else {
        let t = training_set(test_cases, kind, features)?;
        let mse = forest.mse(&t.x, &t.y)?;
        let base = mean_predictor_mse(&t.y);
        (Some(t), Some(mse), Some(base))
    };
    Ok(TrainOutcome {
        forest,
        train,
        test,
        train_mse,
        test_mse,
        test_baseline_mse,
    })
}

/// Result of a frozen reference-stress run.
#[derive(Clone, Debug)]
pub struct Propagation {
    pub state: ChannelState,
    pub reference: DnsProfile,
    /// Relative L2 distance of `U+` to the reference mean profile.
    pub l2_vs_reference: f64,
}

/// Reference stresses on the solver grid, `uv` scaled node by node by
/// `1 + noise * r` with `r` uniform in `[-1, 1]`.
pub fn noisy_stresses(
    reference: &DnsProfile,
    noise: f64,
    seed: u64,
) -> Result<Vec<crate::tensor::ReynoldsStress>> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::Config(format!(
            "noise amplitude must be non-negative, got {noise}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..reference.len())
        .map(|i| {
            let mut t = reference.stress(i);
            if noise > 0.0 {
                t.uv *= 1.0 + noise * rng.random_range(-1.0..=1.0);
            }
            t
        })
        .collect())
}

/// Frozen-stress propagation of `profile` at the configured `Re_tau`.
pub fn propagate_dns(
    cfg: &ChannelConfig,
    profile: &DnsProfile,
    noise: f64,
    seed: u64,
    baseline: Option<&ChannelState>,
) -> Result<Propagation> {
    cfg.validate()?;
    let owned;
    let baseline = match baseline {
        Some(b) => b,
        None => {
            owned = solve_baseline(cfg)?;
            &owned
        }
    };
    let reference = profile.onto_grid(&baseline.y_plus, cfg.re_tau)?;
    let inj = Injection::FrozenStress {
        profile: noisy_stresses(&reference, noise, seed)?,
    };
    let state = solve_from_baseline(cfg, &inj, baseline)?;
    let l2_vs_reference = relative_l2(&state.u_plus, &reference.u_plus);
    Ok(Propagation {
        state,
        reference,
        l2_vs_reference,
    })
}
