use std::io::Write;

use super::DnsProfile;
use crate::channel::ChannelState;
use crate::features::FeatureSet;
use crate::forest::TargetKind;
use crate::rotation::extract_angles;
use crate::tensor::{decompose, to_barycentric, K_FLOOR};
use crate::{Error, Matrix, Result};

/// Frames whose smallest eigenvalue gap falls below this are not used for
/// angle targets: the eigenvectors are not determined there.
pub const ANGLE_GAP_MIN: f64 = 1e-8;

/// Features of the baseline solution paired with discrepancy targets.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub kind: TargetKind,
    pub x: Matrix,
    pub y: Matrix,
    pub feature_names: Vec<String>,
    pub target_names: Vec<String>,
    /// `(Re_tau, grid node)` of every row.
    pub provenance: Vec<(f64, usize)>,
    /// Nodes dropped for kinetic energy below the floor.
    pub excluded_degenerate: usize,
    /// Nodes dropped for an undetermined eigenvector frame.
    pub excluded_frame: usize,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.x.n_rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.n_rows() == 0
    }

    /// Stacks sets built with the same features and targets.
    pub fn concat(sets: &[TrainingSet]) -> Result<TrainingSet> {
        let first = sets
            .first()
            .ok_or_else(|| Error::InvalidArgument("no training sets to join".into()))?;
        let mut out = TrainingSet {
            kind: first.kind,
            x: Matrix::with_cols(first.x.n_cols()),
            y: Matrix::with_cols(first.y.n_cols()),
            feature_names: first.feature_names.clone(),
            target_names: first.target_names.clone(),
            provenance: Vec::new(),
            excluded_degenerate: 0,
            excluded_frame: 0,
        };
        for s in sets {
            if s.kind != first.kind || s.feature_names != first.feature_names {
                return Err(Error::InvalidArgument(
                    "training sets differ in features or targets".into(),
                ));
            }
            for r in 0..s.len() {
                out.x.push_row(s.x.row(r))?;
                out.y.push_row(s.y.row(r))?;
            }
            out.provenance.extend_from_slice(&s.provenance);
            out.excluded_degenerate += s.excluded_degenerate;
            out.excluded_frame += s.excluded_frame;
        }
        Ok(out)
    }

    /// Features, targets and provenance columns.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = self.feature_names.clone();
        header.extend(self.target_names.iter().cloned());
        header.extend(["re_tau".to_string(), "node".to_string()]);
        out.write_record(&header)?;
        for r in 0..self.len() {
            let mut rec: Vec<String> = self.x.row(r).iter().map(|v| v.to_string()).collect();
            rec.extend(self.y.row(r).iter().map(|v| v.to_string()));
            rec.push(self.provenance[r].0.to_string());
            rec.push(self.provenance[r].1.to_string());
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Targets at every usable node of `rans`, with `dns` already on the same
/// grid.
pub fn build_targets(
    rans: &ChannelState,
    dns: &DnsProfile,
    kind: TargetKind,
    features: &FeatureSet,
) -> Result<TrainingSet> {
    let n = rans.len();
    if dns.len() != n {
        return Err(Error::Dimension {
            context: "reference profile on the solver grid",
            expected: n,
            got: dns.len(),
        });
    }
    let tol = 1e-9 * rans.re_tau.max(1.0);
    if let Some(i) = (0..n).find(|&i| (dns.y_plus[i] - rans.y_plus[i]).abs() > tol) {
        return Err(Error::Data(format!(
            "reference profile is not on the solver grid (node {i}: {} vs {})",
            dns.y_plus[i], rans.y_plus[i]
        )));
    }
    let xs = features.matrix(rans)?;
    let mut set = TrainingSet {
        kind,
        x: Matrix::with_cols(features.len()),
        y: Matrix::with_cols(kind.n_targets()),
        feature_names: features.names(),
        target_names: kind.target_names(),
        provenance: Vec::new(),
        excluded_degenerate: 0,
        excluded_frame: 0,
    };
    for i in 0..n {
        let er = decompose(&rans.tau[i], K_FLOOR);
        let ed = decompose(&dns.stress(i), K_FLOOR);
        if er.degenerate || ed.degenerate {
            set.excluded_degenerate += 1;
            continue;
        }
        let xr = to_barycentric(&er);
        let xd = to_barycentric(&ed);
        let target = match kind {
            TargetKind::P => vec![xr.distance(&xd)],
            TargetKind::Pcorr => vec![xd.x - xr.x, xd.y - xr.y],
            TargetKind::PcorrAngles => {
                if er.min_eigen_gap() < ANGLE_GAP_MIN || ed.min_eigen_gap() < ANGLE_GAP_MIN {
                    set.excluded_frame += 1;
                    continue;
                }
                let a = extract_angles(&er.frame, &ed.frame)?;
                vec![xd.x - xr.x, xd.y - xr.y, a.alpha, a.beta, a.gamma]
            }
        };
        set.x.push_row(xs.row(i))?;
        set.y.push_row(&target)?;
        set.provenance.push((rans.re_tau, i));
    }
    Ok(set)
}
