//! Pointwise flow features for the discrepancy forests.
//!
//! Bounded features use `q = a / (|a| + |a*|)` with a per-feature reference
//! `a*`; the wall-distance Reynolds number is capped and `y+` is passed
//! through unnormalised. A `0 / 0` ratio is defined as zero.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::sst::BETA_STAR;
use crate::channel::ChannelState;
use crate::{Error, Matrix, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// `min(sqrt(k) d / 50, 2)`.
    ReD,
    /// `k / (k + U^2 / 2)`.
    Ti,
    /// Mean strain time scale against the turbulence time scale, `S k / eps`.
    StrainRatio,
    /// Production over dissipation, `P_k / eps`.
    ProdDissRatio,
    /// `nu_t / (100 nu)`.
    ViscRatio,
    /// Raw `y+`, capped at `Re_tau`.
    YPlus,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 6] = [
        FeatureKind::ReD,
        FeatureKind::Ti,
        FeatureKind::StrainRatio,
        FeatureKind::ProdDissRatio,
        FeatureKind::ViscRatio,
        FeatureKind::YPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::ReD => "re_d",
            FeatureKind::Ti => "ti",
            FeatureKind::StrainRatio => "strain_ratio",
            FeatureKind::ProdDissRatio => "prod_diss_ratio",
            FeatureKind::ViscRatio => "visc_ratio",
            FeatureKind::YPlus => "y_plus",
        }
    }

    /// False for features passed through without the `a / (|a| + |a*|)` map.
    pub fn is_normalized(self) -> bool {
        !matches!(self, FeatureKind::ReD | FeatureKind::YPlus)
    }

    fn evaluate(self, s: &ChannelState, i: usize) -> f64 {
        let k = s.k_plus[i];
        let y = s.y_plus[i];
        let dudy = s.du_dy[i];
        let eps = BETA_STAR * k * s.omega_plus[i];
        match self {
            FeatureKind::ReD => (k.max(0.0).sqrt() * y / 50.0).min(2.0),
            FeatureKind::Ti => ratio(k, 0.5 * s.u_plus[i] * s.u_plus[i]),
            FeatureKind::StrainRatio => ratio(dudy.abs() * k, eps),
            FeatureKind::ProdDissRatio => ratio(-s.tau[i].uv * dudy, eps),
            FeatureKind::ViscRatio => ratio(s.nu_t_plus[i], 100.0),
            FeatureKind::YPlus => y.min(s.re_tau),
        }
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureKind::ALL
            .into_iter()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown feature '{s}'")))
    }
}

fn ratio(a: f64, reference: f64) -> f64 {
    let den = a.abs() + reference.abs();
    if den == 0.0 {
        0.0
    } else {
        a / den
    }
}

/// Feature values at one node with their names.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub q: Vec<f64>,
    pub names: Vec<String>,
}

/// Ordered list of features to extract.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    kinds: Vec<FeatureKind>,
}

impl Default for FeatureSet {
    fn default() -> Self {
        Self {
            kinds: FeatureKind::ALL.to_vec(),
        }
    }
}

impl FeatureSet {
    pub fn new(kinds: Vec<FeatureKind>) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::Config("feature set is empty".into()));
        }
        for (i, k) in kinds.iter().enumerate() {
            if kinds[..i].contains(k) {
                return Err(Error::Config(format!(
                    "feature '{}' listed twice",
                    k.name()
                )));
            }
        }
        Ok(Self { kinds })
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        Self::new(
            names
                .iter()
                .map(|n| n.as_ref().parse())
                .collect::<Result<_>>()?,
        )
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.kinds.iter().map(|k| k.name().to_string()).collect()
    }

    /// Features at node `index`; fails on the first non-finite value.
    pub fn extract(&self, state: &ChannelState, index: usize) -> Result<FeatureVector> {
        if index >= state.len() {
            return Err(Error::InvalidArgument(format!(
                "node {index} out of range for a grid of {}",
                state.len()
            )));
        }
        let mut q = Vec::with_capacity(self.len());
        for kind in &self.kinds {
            let v = kind.evaluate(state, index);
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature {
                    feature: kind.name().to_string(),
                    index,
                });
            }
            q.push(v);
        }
        Ok(FeatureVector {
            q,
            names: self.names(),
        })
    }

    /// One row per grid node.
    pub fn matrix(&self, state: &ChannelState) -> Result<Matrix> {
        let mut m = Matrix::with_cols(self.len());
        for i in 0..state.len() {
            m.push_row(&self.extract(state, i)?.q)?;
        }
        Ok(m)
    }

    pub fn write_csv<W: Write>(&self, state: &ChannelState, w: W) -> Result<()> {
        let m = self.matrix(state)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.names())?;
        for row in m.rows() {
            out.write_record(row.iter().map(|v| v.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Default features at one node.
pub fn extract_features(state: &ChannelState, index: usize) -> Result<FeatureVector> {
    FeatureSet::default().extract(state, index)
}

/// Default feature matrix.
pub fn feature_matrix(state: &ChannelState) -> Result<Matrix> {
    FeatureSet::default().matrix(state)
}
