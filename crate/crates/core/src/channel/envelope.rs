use rayon::prelude::*;

use super::injection::{DataDrivenInjection, Injection, StressInjector};
use super::{integrate, solve_baseline, solve_from_baseline, ChannelConfig, ChannelState};
use crate::forest::TargetKind;
use crate::tensor::{decompose, to_barycentric, BarycentricPoint, Corner, K_FLOOR};
use crate::{Error, Result};

/// How the envelope members are perturbed.
#[derive(Clone, Debug)]
pub enum EnvelopeMode {
    DataFree {
        delta_b: f64,
    },
    /// One run per corner for magnitude forests; a single corrected run for
    /// the componentwise and full corrections.
    DataDriven(DataDrivenInjection),
}

#[derive(Clone, Debug)]
pub struct EnvelopeMember {
    /// Corner label, or `corrected` for the correction forests.
    pub label: String,
    pub state: ChannelState,
}

/// Per-node bounds of `U+` over the baseline and the perturbed runs.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub baseline: ChannelState,
    pub members: Vec<EnvelopeMember>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Envelope {
    pub fn new(baseline: ChannelState, members: Vec<EnvelopeMember>) -> Self {
        let mut lower = baseline.u_plus.clone();
        let mut upper = baseline.u_plus.clone();
        for m in &members {
            for (i, u) in m.state.u_plus.iter().enumerate() {
                lower[i] = lower[i].min(*u);
                upper[i] = upper[i].max(*u);
            }
        }
        Self {
            baseline,
            members,
            lower,
            upper,
        }
    }

    pub fn y_plus(&self) -> &[f64] {
        &self.baseline.y_plus
    }

    pub fn width(&self) -> Vec<f64> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| u - l)
            .collect()
    }

    /// Integral of the width over the half channel.
    pub fn integrated_width(&self) -> f64 {
        integrate(self.y_plus(), &self.width())
    }

    pub fn realizability_violations(&self) -> usize {
        self.members
            .iter()
            .map(|m| m.state.realizability_violations)
            .sum()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["y_plus".to_string(), "U_baseline".into()];
        header.extend(self.members.iter().map(|m| format!("U_{}", m.label)));
        header.extend(["U_lower".into(), "U_upper".into(), "width".into()]);
        out.write_record(&header)?;
        let width = self.width();
        for i in 0..self.baseline.len() {
            let mut rec = vec![
                self.baseline.y_plus[i].to_string(),
                self.baseline.u_plus[i].to_string(),
            ];
            rec.extend(self.members.iter().map(|m| m.state.u_plus[i].to_string()));
            rec.extend([
                self.lower[i].to_string(),
                self.upper[i].to_string(),
                width[i].to_string(),
            ]);
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Perturbed runs of an envelope: labels with their injections.
fn member_runs(mode: &EnvelopeMode) -> Vec<(String, Injection)> {
    match mode {
        EnvelopeMode::DataFree { delta_b } => Corner::ALL
            .iter()
            .map(|&corner| {
                (
                    corner.label().to_string(),
                    Injection::DataFreeCorner {
                        corner,
                        delta_b: *delta_b,
                    },
                )
            })
            .collect(),
        EnvelopeMode::DataDriven(d) if d.kind == TargetKind::P => Corner::ALL
            .iter()
            .map(|&c| {
                (
                    c.label().to_string(),
                    Injection::DataDriven(d.with_corner(c)),
                )
            })
            .collect(),
        EnvelopeMode::DataDriven(d) => {
            vec![("corrected".to_string(), Injection::DataDriven(d.clone()))]
        }
    }
}

/// Baseline plus every member outcome, members solved in parallel. Only a
/// failing baseline or invalid settings abort the whole call.
pub fn run_members(
    cfg: &ChannelConfig,
    mode: &EnvelopeMode,
) -> Result<(ChannelState, Vec<(String, Result<ChannelState>)>)> {
    cfg.validate()?;
    let runs = member_runs(mode);
    for (_, inj) in &runs {
        inj.check(cfg)?;
    }
    let baseline = solve_baseline(cfg)?;
    let outcomes = runs
        .into_par_iter()
        .map(|(label, inj)| {
            let r = solve_from_baseline(cfg, &inj, &baseline);
            (label, r)
        })
        .collect();
    Ok((baseline, outcomes))
}

/// Baseline plus the perturbed runs; the first failing member is reported
/// by name.
pub fn uq_envelope(cfg: &ChannelConfig, mode: &EnvelopeMode) -> Result<Envelope> {
    let (baseline, outcomes) = run_members(cfg, mode)?;
    let members = outcomes
        .into_iter()
        .map(|(label, r)| match r {
            Ok(state) => Ok(EnvelopeMember { label, state }),
            Err(e) => Err(Error::Member {
                corner: label,
                source: Box::new(e),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Envelope::new(baseline, members))
}

/// Barycentric position of one node's stress; `None` below the kinetic
/// energy floor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub index: usize,
    pub y_plus: f64,
    pub point: Option<BarycentricPoint>,
    pub lambda: [f64; 3],
}

pub fn barycentric_trace(state: &ChannelState) -> Vec<TracePoint> {
    state
        .tau
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let eig = decompose(t, K_FLOOR);
            TracePoint {
                index: i,
                y_plus: state.y_plus[i],
                point: (!eig.degenerate).then(|| to_barycentric(&eig)),
                lambda: eig.lambda,
            }
        })
        .collect()
}

/// CSV of a trace: `y_plus, x, y, C1, C2, C3, lambda1..3`, coordinates
/// empty at degenerate nodes.
pub fn write_trace_csv<W: std::io::Write>(trace: &[TracePoint], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "y_plus", "x", "y", "C1", "C2", "C3", "lambda1", "lambda2", "lambda3",
    ])?;
    for t in trace {
        let mut rec = vec![t.y_plus.to_string()];
        match &t.point {
            Some(p) => {
                rec.push(p.x.to_string());
                rec.push(p.y.to_string());
                rec.extend(p.weights.iter().map(|c| c.to_string()));
            }
            None => rec.extend(std::iter::repeat_n(String::new(), 5)),
        }
        rec.extend(t.lambda.iter().map(|l| l.to_string()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
