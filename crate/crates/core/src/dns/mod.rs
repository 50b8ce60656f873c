//! Reference channel statistics: parsing, interpolation and training targets.
//!
//! Profiles are whitespace-delimited text tables with `%` or `#` comment
//! lines, in wall units. Mean and fluctuation statistics may live in one
//! file or in two (the usual layout of public channel databases), in which
//! case the fluctuations are interpolated onto the mean-profile coordinates.

mod pchip;
pub mod surrogate;
mod targets;

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::tensor::ReynoldsStress;
use crate::{Error, Result};

pub use pchip::Pchip;
pub use targets::{build_targets, TrainingSet, ANGLE_GAP_MIN};

/// Slack allowed in the realizability test `uv^2 <= uu vv`.
pub const REALIZABILITY_SLACK: f64 = 1e-8;

/// Zero-based column indices. Missing optional columns are read as zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMap {
    pub y_delta: Option<usize>,
    pub y_plus: usize,
    pub u_plus: Option<usize>,
    pub uu: Option<usize>,
    pub vv: Option<usize>,
    pub ww: Option<usize>,
    pub uv: Option<usize>,
    pub uw: Option<usize>,
    pub vw: Option<usize>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self::lee_moser_mean()
    }
}

impl ColumnMap {
    /// `y/delta, y+, U+, dU/dy, W, P`.
    pub fn lee_moser_mean() -> Self {
        Self {
            y_delta: Some(0),
            y_plus: 1,
            u_plus: Some(2),
            uu: None,
            vv: None,
            ww: None,
            uv: None,
            uw: None,
            vw: None,
        }
    }

    /// `y/delta, y+, u'u', v'v', w'w', u'v', u'w', v'w', k`.
    pub fn lee_moser_fluct() -> Self {
        Self {
            y_delta: Some(0),
            y_plus: 1,
            u_plus: None,
            uu: Some(2),
            vv: Some(3),
            ww: Some(4),
            uv: Some(5),
            uw: Some(6),
            vw: Some(7),
        }
    }

    /// `y/delta, y+, U+, uu, vv, ww, uv` in one table.
    pub fn combined() -> Self {
        Self {
            y_delta: Some(0),
            y_plus: 1,
            u_plus: Some(2),
            uu: Some(3),
            vv: Some(4),
            ww: Some(5),
            uv: Some(6),
            uw: None,
            vw: None,
        }
    }

    fn has_stresses(&self) -> bool {
        self.uu.is_some() && self.vv.is_some() && self.ww.is_some() && self.uv.is_some()
    }

    fn max_index(&self) -> usize {
        [
            self.y_delta,
            Some(self.y_plus),
            self.u_plus,
            self.uu,
            self.vv,
            self.ww,
            self.uv,
            self.uw,
            self.vw,
        ]
        .into_iter()
        .flatten()
        .max()
        .unwrap_or(0)
    }
}

/// Reference profile in wall units, sorted by `y+`.
#[derive(Clone, Debug, PartialEq)]
pub struct DnsProfile {
    pub re_tau: f64,
    pub y_delta: Vec<f64>,
    pub y_plus: Vec<f64>,
    pub u_plus: Vec<f64>,
    pub uu: Vec<f64>,
    pub vv: Vec<f64>,
    pub ww: Vec<f64>,
    pub uv: Vec<f64>,
    pub uw: Vec<f64>,
    pub vw: Vec<f64>,
}

impl DnsProfile {
    pub fn len(&self) -> usize {
        self.y_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_plus.is_empty()
    }

    pub fn stress(&self, i: usize) -> ReynoldsStress {
        ReynoldsStress::new(
            self.uu[i], self.vv[i], self.ww[i], self.uv[i], self.uw[i], self.vw[i],
        )
    }

    pub fn stresses(&self) -> Vec<ReynoldsStress> {
        (0..self.len()).map(|i| self.stress(i)).collect()
    }

    pub fn k_plus(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| 0.5 * (self.uu[i] + self.vv[i] + self.ww[i]))
            .collect()
    }

    pub fn centerline_velocity(&self) -> f64 {
        *self.u_plus.last().unwrap_or(&0.0)
    }

    /// Checks ordering, non-negative normal stresses and `uv^2 <= uu vv`.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n < 2 {
            return Err(Error::Data("profile needs at least two rows".into()));
        }
        for col in [
            &self.y_delta,
            &self.u_plus,
            &self.uu,
            &self.vv,
            &self.ww,
            &self.uv,
            &self.uw,
            &self.vw,
        ] {
            if col.len() != n {
                return Err(Error::Dimension {
                    context: "profile column",
                    expected: n,
                    got: col.len(),
                });
            }
        }
        if self.y_plus[0] < 0.0 || self.y_plus.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Data(
                "y+ must start at or above zero and increase strictly".into(),
            ));
        }
        if !(self.re_tau > 0.0 && self.re_tau.is_finite()) {
            return Err(Error::Data(format!("invalid Re_tau {}", self.re_tau)));
        }
        for i in 0..n {
            let t = self.stress(i);
            if !t.is_finite() || !self.u_plus[i].is_finite() {
                return Err(Error::Data(format!(
                    "non-finite value at y+ = {}",
                    self.y_plus[i]
                )));
            }
            if t.uu < 0.0 || t.vv < 0.0 || t.ww < 0.0 {
                return Err(Error::Data(format!(
                    "negative normal stress at y+ = {}",
                    self.y_plus[i]
                )));
            }
            if t.uv * t.uv > t.uu * t.vv + REALIZABILITY_SLACK {
                return Err(Error::Data(format!(
                    "uv^2 > uu vv at y+ = {}",
                    self.y_plus[i]
                )));
            }
        }
        Ok(())
    }

    /// Monotone cubic interpolation of every column onto `y_plus` targets,
    /// which must lie in the covered range.
    pub fn interpolate(&self, targets: &[f64]) -> Result<DnsProfile> {
        let lo = self.y_plus[0];
        let hi = *self.y_plus.last().unwrap();
        let tol = 1e-9 * hi.max(1.0);
        for &t in targets {
            if !(t >= lo - tol && t <= hi + tol) {
                return Err(Error::Data(format!(
                    "y+ = {t} lies outside the reference data range [{lo}, {hi}]"
                )));
            }
        }
        let column = |v: &[f64]| -> Result<Vec<f64>> {
            let p = Pchip::new(&self.y_plus, v)?;
            Ok(targets.iter().map(|&t| p.eval(t)).collect())
        };
        Ok(DnsProfile {
            re_tau: self.re_tau,
            y_delta: targets.iter().map(|t| t / self.re_tau).collect(),
            y_plus: targets.to_vec(),
            u_plus: column(&self.u_plus)?,
            uu: column(&self.uu)?,
            vv: column(&self.vv)?,
            ww: column(&self.ww)?,
            uv: column(&self.uv)?,
            uw: column(&self.uw)?,
            vw: column(&self.vw)?,
        })
    }

    /// Interpolation onto a solver grid for a case at `re_tau`. Coordinates
    /// are matched in outer units `y / delta`, so data whose friction
    /// Reynolds number differs slightly from the nominal case still covers
    /// the whole half channel; values stay in the reference wall units.
    pub fn onto_grid(&self, y_plus: &[f64], re_tau: f64) -> Result<DnsProfile> {
        let scale = self.re_tau / re_tau;
        let targets: Vec<f64> = y_plus.iter().map(|y| y * scale).collect();
        let mut out = self.interpolate(&targets)?;
        out.y_plus = y_plus.to_vec();
        out.y_delta = y_plus.iter().map(|y| y / re_tau).collect();
        Ok(out)
    }
}

struct Table {
    /// `(source line, values)` sorted by `y+`.
    rows: Vec<(usize, Vec<f64>)>,
}

fn read_table<R: Read>(reader: R, map: &ColumnMap) -> Result<Table> {
    let need = map.max_index() + 1;
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        let values = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("non-numeric token '{tok}'"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() < need {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected at least {need} columns, found {}", values.len()),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("non-finite value {v}"),
            });
        }
        rows.push((lineno, values));
    }
    if rows.len() < 2 {
        return Err(Error::Parse {
            line: 0,
            message: "fewer than two data rows".into(),
        });
    }
    rows.sort_by(|a, b| a.1[map.y_plus].total_cmp(&b.1[map.y_plus]));
    for w in rows.windows(2) {
        if !(w[1].1[map.y_plus] > w[0].1[map.y_plus]) {
            return Err(Error::Parse {
                line: w[1].0.max(w[0].0),
                message: format!("repeated y+ value {}", w[1].1[map.y_plus]),
            });
        }
    }
    Ok(Table { rows })
}

impl Table {
    fn column(&self, idx: Option<usize>) -> Vec<f64> {
        match idx {
            Some(c) => self.rows.iter().map(|r| r.1[c]).collect(),
            None => vec![0.0; self.rows.len()],
        }
    }

    fn re_tau(&self, map: &ColumnMap) -> f64 {
        let last = &self.rows.last().unwrap().1;
        match map.y_delta {
            Some(c) if last[c] > 0.0 => last[map.y_plus] / last[c],
            _ => last[map.y_plus],
        }
    }

    fn y_delta(&self, map: &ColumnMap, re_tau: f64) -> Vec<f64> {
        match map.y_delta {
            Some(c) => self.rows.iter().map(|r| r.1[c]).collect(),
            None => self.rows.iter().map(|r| r.1[map.y_plus] / re_tau).collect(),
        }
    }
}

/// Parses a single table holding both the mean velocity and the stresses.
pub fn parse_profile<R: Read>(reader: R, map: &ColumnMap) -> Result<DnsProfile> {
    if map.u_plus.is_none() || !map.has_stresses() {
        return Err(Error::Config(
            "column map must name U+, uu, vv, ww and uv for a single-file profile".into(),
        ));
    }
    let t = read_table(reader, map)?;
    let re_tau = t.re_tau(map);
    let p = DnsProfile {
        re_tau,
        y_delta: t.y_delta(map, re_tau),
        y_plus: t.column(Some(map.y_plus)),
        u_plus: t.column(map.u_plus),
        uu: t.column(map.uu),
        vv: t.column(map.vv),
        ww: t.column(map.ww),
        uv: t.column(map.uv),
        uw: t.column(map.uw),
        vw: t.column(map.vw),
    };
    p.validate()?;
    Ok(p)
}

/// Merges a mean-velocity table and a fluctuation table. The result lives
/// on the mean-table coordinates.
pub fn parse_profile_pair<R1: Read, R2: Read>(
    mean: R1,
    mean_map: &ColumnMap,
    fluct: R2,
    fluct_map: &ColumnMap,
) -> Result<DnsProfile> {
    if mean_map.u_plus.is_none() {
        return Err(Error::Config("mean column map must name U+".into()));
    }
    if !fluct_map.has_stresses() {
        return Err(Error::Config(
            "fluctuation column map must name uu, vv, ww and uv".into(),
        ));
    }
    let m = read_table(mean, mean_map)?;
    let f = read_table(fluct, fluct_map)?;
    let re_tau = m.re_tau(mean_map);
    let y_plus = m.column(Some(mean_map.y_plus));
    let fy = f.column(Some(fluct_map.y_plus));
    let tol = 1e-9 * fy.last().unwrap().max(1.0);
    if y_plus[0] < fy[0] - tol || *y_plus.last().unwrap() > fy.last().unwrap() + tol {
        return Err(Error::Data(
            "fluctuation table does not cover the mean-profile range".into(),
        ));
    }
    let onto = |idx: Option<usize>| -> Result<Vec<f64>> {
        let v = f.column(idx);
        if fy == y_plus {
            return Ok(v);
        }
        let p = Pchip::new(&fy, &v)?;
        Ok(y_plus.iter().map(|&y| p.eval(y)).collect())
    };
    let p = DnsProfile {
        re_tau,
        y_delta: m.y_delta(mean_map, re_tau),
        u_plus: m.column(mean_map.u_plus),
        uu: onto(fluct_map.uu)?,
        vv: onto(fluct_map.vv)?,
        ww: onto(fluct_map.ww)?,
        uv: onto(fluct_map.uv)?,
        uw: onto(fluct_map.uw)?,
        vw: onto(fluct_map.vw)?,
        y_plus,
    };
    p.validate()?;
    Ok(p)
}

/// Reads a profile from one file or a mean/fluctuation pair.
pub fn load_profile(
    mean: impl AsRef<Path>,
    mean_map: &ColumnMap,
    fluct: Option<(&Path, &ColumnMap)>,
) -> Result<DnsProfile> {
    let open = |p: &Path| {
        std::fs::File::open(p).map_err(|e| Error::Data(format!("cannot open {}: {e}", p.display())))
    };
    let mean_file = open(mean.as_ref())?;
    match fluct {
        None => parse_profile(mean_file, mean_map),
        Some((path, map)) => parse_profile_pair(mean_file, mean_map, open(path)?, map),
    }
}
