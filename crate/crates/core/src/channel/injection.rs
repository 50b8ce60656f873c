use std::sync::Arc;

use super::{ChannelConfig, ChannelState};
use crate::features::FeatureSet;
use crate::forest::{RegressionForest, TargetKind};
use crate::perturb::{build_perturbed_stress, PerturbationSpec};
use crate::rotation::TaitBryanAngles;
use crate::tensor::{decompose, Corner, ReynoldsStress};
use crate::{Error, Result};

/// Source of the Reynolds stress that replaces the eddy-viscosity closure in
/// the momentum and production terms.
pub trait StressInjector: Sync {
    /// Rejects settings that cannot work on the configured grid.
    fn check(&self, cfg: &ChannelConfig) -> Result<()>;

    /// Target stress at every node for the current iterate.
    fn target_stress(
        &self,
        current: &ChannelState,
        baseline: &ChannelState,
    ) -> Result<Vec<ReynoldsStress>>;

    fn describe(&self) -> String;

    /// Whether the target depends on the iterate. A state-dependent shear
    /// stress is treated semi-implicitly in the momentum equation.
    fn follows_state(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug)]
pub enum Injection {
    /// Fixed relative shift toward a corner.
    DataFreeCorner {
        corner: Corner,
        delta_b: f64,
    },
    DataDriven(DataDrivenInjection),
    /// Prescribed stress profile on the solver grid.
    FrozenStress {
        profile: Vec<ReynoldsStress>,
    },
}

/// Forest-predicted perturbation.
#[derive(Clone, Debug)]
pub struct DataDrivenInjection {
    pub forest: Arc<RegressionForest>,
    pub kind: TargetKind,
    /// Required for the scalar magnitude target, ignored otherwise.
    pub corner: Option<Corner>,
    pub features: FeatureSet,
    /// Evaluate the features on the baseline instead of on each iterate. On
    /// by default: the forest is piecewise constant, and re-evaluating it on
    /// a moving iterate tends to toggle between leaves without converging.
    pub freeze_features: bool,
}

impl DataDrivenInjection {
    pub fn new(forest: Arc<RegressionForest>, kind: TargetKind, corner: Option<Corner>) -> Self {
        Self {
            forest,
            kind,
            corner,
            features: FeatureSet::default(),
            freeze_features: true,
        }
    }

    pub fn with_corner(&self, corner: Corner) -> Self {
        Self {
            corner: Some(corner),
            ..self.clone()
        }
    }

    fn spec(&self, prediction: &[f64]) -> Result<PerturbationSpec> {
        Ok(match self.kind {
            TargetKind::P => PerturbationSpec::DataDrivenMagnitude {
                corner: self.corner.ok_or_else(|| {
                    Error::Config("magnitude forest needs a target corner".into())
                })?,
                p: prediction[0].max(0.0),
            },
            TargetKind::Pcorr => PerturbationSpec::ComponentwiseCorrection {
                p_corr: [prediction[0], prediction[1]],
            },
            TargetKind::PcorrAngles => PerturbationSpec::FullAnisotropyCorrection {
                p_corr: [prediction[0], prediction[1]],
                angles: TaitBryanAngles::new(prediction[2], prediction[3], prediction[4]),
            },
        })
    }

    fn check(&self) -> Result<()> {
        let f = &self.forest;
        if f.n_features() != self.features.len() {
            return Err(Error::Config(format!(
                "forest expects {} features, the feature set has {}",
                f.n_features(),
                self.features.len()
            )));
        }
        if !f.feature_names().is_empty() && f.feature_names() != self.features.names() {
            return Err(Error::Config(format!(
                "forest was trained on features [{}], not [{}]",
                f.feature_names().join(", "),
                self.features.names().join(", ")
            )));
        }
        if f.n_targets() != self.kind.n_targets() {
            return Err(Error::Config(format!(
                "forest predicts {} targets, mode '{}' needs {}",
                f.n_targets(),
                self.kind.label(),
                self.kind.n_targets()
            )));
        }
        if self.kind == TargetKind::P && self.corner.is_none() {
            return Err(Error::Config(
                "magnitude forest needs a target corner".into(),
            ));
        }
        Ok(())
    }
}

fn perturb_all(
    state: &ChannelState,
    cfg_floor: f64,
    spec_at: impl Fn(usize) -> Result<PerturbationSpec>,
) -> Result<Vec<ReynoldsStress>> {
    (0..state.len())
        .map(|i| {
            let eig = decompose(&state.boussinesq_stress(i), cfg_floor);
            build_perturbed_stress(&eig, &spec_at(i)?)
        })
        .collect()
}

impl StressInjector for Injection {
    fn check(&self, cfg: &ChannelConfig) -> Result<()> {
        match self {
            Injection::DataFreeCorner { corner, delta_b } => PerturbationSpec::DataFreeCorner {
                corner: *corner,
                delta_b: *delta_b,
            }
            .validate()
            .map_err(|e| Error::Config(e.to_string())),
            Injection::DataDriven(d) => d.check(),
            Injection::FrozenStress { profile } => {
                if profile.len() != cfg.n_cells {
                    return Err(Error::Dimension {
                        context: "frozen stress profile",
                        expected: cfg.n_cells,
                        got: profile.len(),
                    });
                }
                if !profile.iter().all(ReynoldsStress::is_finite) {
                    return Err(Error::Data("frozen stress profile is not finite".into()));
                }
                Ok(())
            }
        }
    }

    fn target_stress(
        &self,
        current: &ChannelState,
        baseline: &ChannelState,
    ) -> Result<Vec<ReynoldsStress>> {
        let floor = crate::tensor::K_FLOOR;
        match self {
            Injection::DataFreeCorner { corner, delta_b } => {
                let spec = PerturbationSpec::DataFreeCorner {
                    corner: *corner,
                    delta_b: *delta_b,
                };
                perturb_all(current, floor, |_| Ok(spec))
            }
            Injection::DataDriven(d) => {
                let source = if d.freeze_features { baseline } else { current };
                let x = d.features.matrix(source)?;
                let y = d.forest.predict_matrix(&x)?;
                perturb_all(current, floor, |i| d.spec(y.row(i)))
            }
            Injection::FrozenStress { profile } => Ok(profile.clone()),
        }
    }

    fn describe(&self) -> String {
        match self {
            Injection::DataFreeCorner { corner, delta_b } => {
                format!("data-free {corner} delta_b={delta_b}")
            }
            Injection::DataDriven(d) => match d.corner {
                Some(c) if d.kind == TargetKind::P => format!("data-driven {} {c}", d.kind.label()),
                _ => format!("data-driven {}", d.kind.label()),
            },
            Injection::FrozenStress { .. } => "frozen stress".into(),
        }
    }

    fn follows_state(&self) -> bool {
        !matches!(self, Injection::FrozenStress { .. })
    }
}
