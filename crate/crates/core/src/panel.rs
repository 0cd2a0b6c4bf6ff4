//! Panel tensors: `n × Z × L` arrays of hourly values indexed by issue time,
//! variable, and forecast lag.
//!
//! Layout is row-major `[t][z][l]`, so one issue time's `Z × L` block is
//! contiguous. The `DeviationPanel` / `RemainderPanel` / `GaussianPanel`
//! newtypes mark pipeline stages (raw deviations, deseasonalized remainders,
//! gaussianized scores) so stages cannot be swapped by accident.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Load,
    Wind,
}

impl fmt::Display for VariableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableKind::Load => write!(f, "load"),
            VariableKind::Wind => write!(f, "wind"),
        }
    }
}

impl FromStr for VariableKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "load" => Ok(VariableKind::Load),
            "wind" => Ok(VariableKind::Wind),
            other => Err(format!("unknown variable kind {other:?}")),
        }
    }
}

/// One modeled series: a variable kind paired with a zone name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariableId {
    pub kind: VariableKind,
    pub zone: String,
}

impl VariableId {
    pub fn new(kind: VariableKind, zone: impl Into<String>) -> Self {
        VariableId {
            kind,
            zone: zone.into(),
        }
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.kind, self.zone)
    }
}

/// Dense `n × Z × L` tensor with issue-time and variable metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct PanelData {
    variables: Vec<VariableId>,
    issue_times: Vec<DateTime<Utc>>,
    lags: usize,
    data: Vec<f64>,
}

impl PanelData {
    /// `data` is row-major `[t][z][l]`; every entry must be finite.
    pub fn new(
        variables: Vec<VariableId>,
        issue_times: Vec<DateTime<Utc>>,
        lags: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::EmptyPanel("no variables".into()));
        }
        if issue_times.is_empty() {
            return Err(Error::EmptyPanel("no issue times".into()));
        }
        if lags == 0 {
            return Err(Error::Config("lags must be at least 1".into()));
        }
        let expected = issue_times.len() * variables.len() * lags;
        if data.len() != expected {
            return Err(Error::Mismatch(format!(
                "panel data length {} does not match {} issue times x {} variables x {} lags",
                data.len(),
                issue_times.len(),
                variables.len(),
                lags
            )));
        }
        if issue_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Data(
                "panel issue times must be strictly increasing".into(),
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let l = pos % lags;
            let z = (pos / lags) % variables.len();
            let t = pos / (lags * variables.len());
            return Err(Error::Data(format!(
                "non-finite panel value at issue {} variable {} lag {}",
                issue_times[t], variables[z], l
            )));
        }
        Ok(PanelData {
            variables,
            issue_times,
            lags,
            data,
        })
    }

    pub fn n(&self) -> usize {
        self.issue_times.len()
    }

    pub fn z(&self) -> usize {
        self.variables.len()
    }

    pub fn l(&self) -> usize {
        self.lags
    }

    /// Number of coordinates per observation: `Z * L`.
    pub fn flat_dim(&self) -> usize {
        self.variables.len() * self.lags
    }

    pub fn variables(&self) -> &[VariableId] {
        &self.variables
    }

    pub fn issue_times(&self) -> &[DateTime<Utc>] {
        &self.issue_times
    }

    pub fn get(&self, t: usize, z: usize, l: usize) -> f64 {
        self.data[(t * self.variables.len() + z) * self.lags + l]
    }

    /// One issue time's `Z × L` block, row-major by variable.
    pub fn observation(&self, t: usize) -> &[f64] {
        let w = self.flat_dim();
        &self.data[t * w..(t + 1) * w]
    }

    /// The length-`n` series for one (variable, lag) coordinate.
    pub fn series(&self, z: usize, l: usize) -> Vec<f64> {
        let w = self.flat_dim();
        let off = z * self.lags + l;
        (0..self.n()).map(|t| self.data[t * w + off]).collect()
    }

    /// Applies `f(t, z, l, value)` to every entry, producing a new panel with
    /// the same shape. Errors if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(usize, usize, usize, f64) -> f64) -> Result<PanelData> {
        let z_n = self.variables.len();
        let mut out = Vec::with_capacity(self.data.len());
        for t in 0..self.n() {
            for z in 0..z_n {
                for l in 0..self.lags {
                    out.push(f(t, z, l, self.get(t, z, l)));
                }
            }
        }
        PanelData::new(
            self.variables.clone(),
            self.issue_times.clone(),
            self.lags,
            out,
        )
    }

    pub fn same_shape(&self, other: &PanelData) -> bool {
        self.variables == other.variables
            && self.lags == other.lags
            && self.issue_times == other.issue_times
    }
}

macro_rules! panel_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name(PanelData);

        impl $name {
            pub fn new(panel: PanelData) -> Self {
                $name(panel)
            }

            pub fn into_inner(self) -> PanelData {
                self.0
            }
        }

        impl Deref for $name {
            type Target = PanelData;

            fn deref(&self) -> &PanelData {
                &self.0
            }
        }
    };
}

panel_newtype!(
    /// Raw forecast deviations: actual minus forecast, in MW.
    DeviationPanel
);
panel_newtype!(
    /// Deviations with the deterministic seasonal component removed.
    RemainderPanel
);
panel_newtype!(
    /// Remainders mapped through marginal CDFs onto the standard normal scale.
    GaussianPanel
);

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn times(n: usize) -> Vec<DateTime<Utc>> {
        (0..n)
            .map(|i| Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap() + chrono::Duration::hours(i as i64))
            .collect()
    }

    fn vars() -> Vec<VariableId> {
        vec![
            VariableId::new(VariableKind::Load, "WEST"),
            VariableId::new(VariableKind::Wind, "WEST"),
        ]
    }

    #[test]
    fn indexing_is_row_major() {
        let data: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let p = PanelData::new(vars(), times(2), 3, data).unwrap();
        assert_eq!(p.get(0, 0, 0), 0.0);
        assert_eq!(p.get(0, 0, 2), 2.0);
        assert_eq!(p.get(0, 1, 0), 3.0);
        assert_eq!(p.get(1, 0, 0), 6.0);
        assert_eq!(p.get(1, 1, 2), 11.0);
        assert_eq!(p.observation(1), &[6.0, 7.0, 8.0, 9.0, 10.0, 11.0]);
        assert_eq!(p.series(1, 2), vec![5.0, 11.0]);
    }

    #[test]
    fn rejects_shape_mismatch_and_nonfinite() {
        assert!(matches!(
            PanelData::new(vars(), times(2), 3, vec![0.0; 11]),
            Err(Error::Mismatch(_))
        ));
        let mut data = vec![0.0; 12];
        data[5] = f64::NAN;
        assert!(matches!(
            PanelData::new(vars(), times(2), 3, data),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn rejects_unsorted_issue_times() {
        let mut ts = times(2);
        ts.swap(0, 1);
        assert!(PanelData::new(vars(), ts, 3, vec![0.0; 12]).is_err());
    }

    #[test]
    fn variable_id_display() {
        assert_eq!(
            VariableId::new(VariableKind::Load, "HOUSTON").to_string(),
            "load/HOUSTON"
        );
        assert_eq!("wind".parse::<VariableKind>().unwrap(), VariableKind::Wind);
        assert!("solar".parse::<VariableKind>().is_err());
    }
}
