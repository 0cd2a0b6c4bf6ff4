//! CSV ingestion: hourly actuals, rolling forecast panels, and assembly of
//! aligned deviation panels.
//!
//! Actuals files carry `timestamp,zone,value` rows; forecast files carry
//! `issue_timestamp,lag,zone,value` rows. Column names are remappable through
//! [`CsvSchema`]. Timestamps are either RFC 3339 (offset or `Z` suffix) or
//! naive local times interpreted in the schema's IANA timezone, with DST-fold
//! ambiguity resolved by the schema's policy.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDateTime, TimeZone, Utc};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{DeviationPanel, PanelData, VariableId, VariableKind};

/// Disambiguation policy for local timestamps that occur twice at a
/// daylight-saving fold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DstPolicy {
    #[default]
    Earliest,
    Latest,
}

/// Column mapping and timestamp interpretation for one CSV layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvSchema {
    pub timestamp: String,
    pub issue_timestamp: String,
    pub lag: String,
    pub zone: String,
    pub value: String,
    /// IANA timezone name applied to naive timestamps.
    pub timezone: String,
    pub dst: DstPolicy,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            timestamp: "timestamp".into(),
            issue_timestamp: "issue_timestamp".into(),
            lag: "lag".into(),
            zone: "zone".into(),
            value: "value".into(),
            timezone: "UTC".into(),
            dst: DstPolicy::Earliest,
        }
    }
}

impl CsvSchema {
    fn tz(&self) -> Result<Tz> {
        self.timezone
            .parse::<Tz>()
            .map_err(|_| Error::Config(format!("unknown timezone {:?}", self.timezone)))
    }
}

/// One zone's hourly actual series, sorted by time.
#[derive(Clone, Debug)]
pub struct ActualsSeries {
    pub id: VariableId,
    pub timestamps: Vec<DateTime<Utc>>,
    pub values: Vec<f64>,
    /// Number of missing interior hours (gaps in the hourly grid).
    pub gap_hours: i64,
}

/// One zone's rolling forecasts: `n_issues × lags`, `NaN` marking missing
/// (issue, lag) cells.
#[derive(Clone, Debug)]
pub struct ForecastPanel {
    pub id: VariableId,
    pub issue_times: Vec<DateTime<Utc>>,
    pub lags: usize,
    values: Vec<f64>,
}

impl ForecastPanel {
    pub fn n_issues(&self) -> usize {
        self.issue_times.len()
    }

    pub fn value(&self, issue_index: usize, lag: usize) -> Option<f64> {
        let v = self.values[issue_index * self.lags + lag];
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    pub fn row(&self, issue_index: usize) -> &[f64] {
        &self.values[issue_index * self.lags..(issue_index + 1) * self.lags]
    }
}

fn parse_timestamp(s: &str, tz: &Tz, dst: DstPolicy) -> std::result::Result<DateTime<Utc>, String> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.with_timezone(&Utc));
    }
    let naive = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S"))
        .map_err(|_| format!("unparseable timestamp {s:?}"))?;
    match tz.from_local_datetime(&naive) {
        chrono::LocalResult::Single(dt) => Ok(dt.with_timezone(&Utc)),
        chrono::LocalResult::Ambiguous(a, b) => Ok(match dst {
            DstPolicy::Earliest => a.with_timezone(&Utc),
            DstPolicy::Latest => b.with_timezone(&Utc),
        }),
        chrono::LocalResult::None => Err(format!(
            "timestamp {s:?} does not exist in timezone {tz} (DST gap)"
        )),
    }
}

fn parse_value(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("non-numeric value {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value {s:?}"));
    }
    Ok(v)
}

struct CsvFile {
    reader: csv::Reader<std::fs::File>,
    header_index: HashMap<String, usize>,
    path: String,
}

impl CsvFile {
    fn open(path: &Path) -> Result<Self> {
        let display = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: display.clone(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let headers = reader.headers().map_err(|source| Error::Csv {
            path: display.clone(),
            source: Box::new(source),
        })?;
        let header_index = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        Ok(CsvFile {
            reader,
            header_index,
            path: display,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.header_index.get(name).copied().ok_or_else(|| {
            Error::Parse {
                path: self.path.clone(),
                row: 1,
                message: format!("missing column {name:?}"),
            }
        })
    }
}

/// Loads every zone series found in an actuals CSV.
pub fn load_actuals(
    path: &Path,
    kind: VariableKind,
    schema: &CsvSchema,
) -> Result<Vec<ActualsSeries>> {
    let tz = schema.tz()?;
    let mut file = CsvFile::open(path)?;
    let c_ts = file.column(&schema.timestamp)?;
    let c_zone = file.column(&schema.zone)?;
    let c_value = file.column(&schema.value)?;
    let fpath = file.path.clone();

    let mut by_zone: BTreeMap<String, Vec<(DateTime<Utc>, f64)>> = BTreeMap::new();
    let mut seen: HashMap<(String, DateTime<Utc>), u64> = HashMap::new();

    for record in file.reader.records() {
        let record = record.map_err(|source| Error::Csv {
            path: fpath.clone(),
            source: Box::new(source),
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse {
            path: fpath.clone(),
            row,
            message,
        };
        let ts = parse_timestamp(&record[c_ts], &tz, schema.dst).map_err(parse_err)?;
        let zone = record[c_zone].to_string();
        let value = parse_value(&record[c_value]).map_err(|m| Error::Parse {
            path: fpath.clone(),
            row,
            message: m,
        })?;
        if let Some(first) = seen.insert((zone.clone(), ts), row) {
            return Err(Error::DuplicateKey {
                path: fpath,
                row,
                key: format!("({zone}, {ts}) first seen on line {first}"),
            });
        }
        by_zone.entry(zone).or_default().push((ts, value));
    }

    let mut out = Vec::new();
    for (zone, mut rows) in by_zone {
        rows.sort_by_key(|(ts, _)| *ts);
        let mut gap_hours = 0i64;
        for w in rows.windows(2) {
            let delta = w[1].0 - w[0].0;
            let minutes = delta.num_minutes();
            if minutes % 60 != 0 {
                return Err(Error::Data(format!(
                    "{fpath}: zone {zone} actuals at {} and {} are not on an hourly grid",
                    w[0].0, w[1].0
                )));
            }
            gap_hours += delta.num_hours() - 1;
        }
        out.push(ActualsSeries {
            id: VariableId::new(kind, zone),
            timestamps: rows.iter().map(|(ts, _)| *ts).collect(),
            values: rows.iter().map(|(_, v)| *v).collect(),
            gap_hours,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyPanel(format!("{fpath}: no actuals rows")));
    }
    Ok(out)
}

/// Loads every zone's forecast panel found in a forecasts CSV. Lags must lie
/// in `0..lags`; cells never observed stay missing.
pub fn load_forecasts(
    path: &Path,
    kind: VariableKind,
    schema: &CsvSchema,
    lags: usize,
) -> Result<Vec<ForecastPanel>> {
    let tz = schema.tz()?;
    let mut file = CsvFile::open(path)?;
    let c_issue = file.column(&schema.issue_timestamp)?;
    let c_lag = file.column(&schema.lag)?;
    let c_zone = file.column(&schema.zone)?;
    let c_value = file.column(&schema.value)?;
    let fpath = file.path.clone();

    type Cells = BTreeMap<DateTime<Utc>, Vec<f64>>;
    let mut by_zone: BTreeMap<String, Cells> = BTreeMap::new();
    let mut seen: HashSet<(String, DateTime<Utc>, usize)> = HashSet::new();

    for record in file.reader.records() {
        let record = record.map_err(|source| Error::Csv {
            path: fpath.clone(),
            source: Box::new(source),
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse {
            path: fpath.clone(),
            row,
            message,
        };
        let issue = parse_timestamp(&record[c_issue], &tz, schema.dst).map_err(parse_err)?;
        let lag: usize = record[c_lag].trim().parse().map_err(|_| Error::Parse {
            path: fpath.clone(),
            row,
            message: format!("bad lag {:?}", &record[c_lag]),
        })?;
        if lag >= lags {
            return Err(Error::Parse {
                path: fpath,
                row,
                message: format!("lag {lag} outside 0..{lags}"),
            });
        }
        let zone = record[c_zone].to_string();
        let value = parse_value(&record[c_value]).map_err(|m| Error::Parse {
            path: fpath.clone(),
            row,
            message: m,
        })?;
        if !seen.insert((zone.clone(), issue, lag)) {
            return Err(Error::DuplicateKey {
                path: fpath,
                row,
                key: format!("({zone}, {issue}, lag {lag})"),
            });
        }
        by_zone
            .entry(zone)
            .or_default()
            .entry(issue)
            .or_insert_with(|| vec![f64::NAN; lags])[lag] = value;
    }

    let mut out = Vec::new();
    for (zone, cells) in by_zone {
        let issue_times: Vec<_> = cells.keys().copied().collect();
        let mut values = Vec::with_capacity(issue_times.len() * lags);
        for row in cells.values() {
            values.extend_from_slice(row);
        }
        out.push(ForecastPanel {
            id: VariableId::new(kind, zone),
            issue_times,
            lags,
            values,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyPanel(format!("{fpath}: no forecast rows")));
    }
    Ok(out)
}

/// Ingest bookkeeping reported alongside a built panel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelBuildReport {
    pub rows_used: usize,
    /// Issue times present in every forecast panel but dropped because some
    /// forecast cell or matching actual was missing.
    pub rows_dropped: usize,
}

/// Aligns forecasts with actuals into a deviation panel (actual minus
/// forecast), keeping only issue times with complete data for every requested
/// variable and lag. Variable order follows `variables`.
pub fn build_deviation_panel(
    actuals: &[ActualsSeries],
    forecasts: &[ForecastPanel],
    variables: &[VariableId],
    lags: usize,
) -> Result<(DeviationPanel, PanelBuildReport)> {
    if variables.is_empty() {
        return Err(Error::Config("no variables requested".into()));
    }
    let mut actual_maps: HashMap<&VariableId, HashMap<DateTime<Utc>, f64>> = HashMap::new();
    for s in actuals {
        actual_maps
            .entry(&s.id)
            .or_default()
            .extend(s.timestamps.iter().copied().zip(s.values.iter().copied()));
    }
    let mut panels: HashMap<&VariableId, &ForecastPanel> = HashMap::new();
    for p in forecasts {
        panels.insert(&p.id, p);
    }

    let mut chosen = Vec::with_capacity(variables.len());
    for v in variables {
        let panel = panels
            .get(v)
            .ok_or_else(|| Error::MissingVariable(format!("{v} (forecasts)")))?;
        if !actual_maps.contains_key(v) {
            return Err(Error::MissingVariable(format!("{v} (actuals)")));
        }
        if panel.lags != lags {
            return Err(Error::Mismatch(format!(
                "forecast panel for {v} has {} lags, expected {lags}",
                panel.lags
            )));
        }
        chosen.push(*panel);
    }

    // Issue times present in every variable's forecast panel.
    let mut candidates: Vec<DateTime<Utc>> = chosen[0].issue_times.clone();
    for p in &chosen[1..] {
        let set: HashSet<_> = p.issue_times.iter().copied().collect();
        candidates.retain(|t| set.contains(t));
    }
    if candidates.is_empty() {
        return Err(Error::EmptyPanel(
            "no issue time is shared by every variable's forecasts".into(),
        ));
    }

    let issue_index: Vec<HashMap<DateTime<Utc>, usize>> = chosen
        .iter()
        .map(|p| {
            p.issue_times
                .iter()
                .enumerate()
                .map(|(i, t)| (*t, i))
                .collect()
        })
        .collect();

    let mut data = Vec::new();
    let mut kept_times = Vec::new();
    let mut dropped = 0usize;
    let mut row_buf = vec![0.0f64; variables.len() * lags];
    'issue: for t in &candidates {
        for (zi, (v, p)) in variables.iter().zip(&chosen).enumerate() {
            let actual_map = &actual_maps[v];
            let ii = issue_index[zi][t];
            for l in 0..lags {
                let Some(f) = p.value(ii, l) else {
                    dropped += 1;
                    continue 'issue;
                };
                let Some(a) = actual_map.get(&(*t + Duration::hours(l as i64))) else {
                    dropped += 1;
                    continue 'issue;
                };
                row_buf[zi * lags + l] = a - f;
            }
        }
        kept_times.push(*t);
        data.extend_from_slice(&row_buf);
    }

    if kept_times.is_empty() {
        return Err(Error::EmptyPanel(format!(
            "all {} shared issue times were dropped for missing forecasts or actuals",
            candidates.len()
        )));
    }
    let report = PanelBuildReport {
        rows_used: kept_times.len(),
        rows_dropped: dropped,
    };
    let panel = PanelData::new(variables.to_vec(), kept_times, lags, data)?;
    Ok((DeviationPanel::new(panel), report))
}
