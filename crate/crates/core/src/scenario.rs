//! Weather and demand time series, and their reduction to weighted scenarios.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::domain::HOURS_PER_YEAR;
use crate::error::ScenarioError;

const YEAR_HOURS: usize = 8760;
const WEEK_HOURS: usize = 168;
const SEASON_MONTHS: [u32; 4] = [1, 4, 7, 10];
const TIMESTAMP_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];

/// One calendar year of hourly weather, starting Jan 1 00:00.
#[derive(Clone, Debug, PartialEq)]
pub struct WeatherYear {
    pub year: i32,
    /// Global horizontal irradiance, W/m².
    pub ghi: Vec<f64>,
    /// Ambient temperature, °C.
    pub temp: Vec<f64>,
}

impl WeatherYear {
    /// GHI and temperature for the first 8760 hours (drops the last day of leap years).
    pub fn common_year(&self) -> (&[f64], &[f64]) {
        (&self.ghi[..YEAR_HOURS], &self.temp[..YEAR_HOURS])
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s.trim(), f).ok())
}

fn column(headers: &csv::StringRecord, name: &'static str) -> Result<usize, ScenarioError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or(ScenarioError::MissingColumn(name))
}

fn field_f64(record: &csv::StringRecord, idx: usize, line: usize, name: &str) -> Result<f64, ScenarioError> {
    let raw = record.get(idx).ok_or_else(|| ScenarioError::Malformed {
        line,
        message: format!("missing {name}"),
    })?;
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ScenarioError::Malformed {
            line,
            message: format!("cannot parse {name} `{raw}`"),
        }),
    }
}

/// Parses an hourly weather CSV with columns `timestamp`, `ghi_w_m2`, `temp_c`.
pub fn parse_weather_csv(path: &Path) -> Result<Vec<WeatherYear>, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_weather_str(&text)
}

pub fn parse_weather_str(text: &str) -> Result<Vec<WeatherYear>, ScenarioError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ScenarioError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let ts_col = column(&headers, "timestamp")?;
    let ghi_col = column(&headers, "ghi_w_m2")?;
    let temp_col = column(&headers, "temp_c")?;

    let mut years: Vec<WeatherYear> = Vec::new();
    let mut prev: Option<NaiveDateTime> = None;
    for record in reader.records() {
        let record = record.map_err(|e| ScenarioError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let raw_ts = record.get(ts_col).unwrap_or("");
        let ts = parse_timestamp(raw_ts).ok_or_else(|| ScenarioError::Malformed {
            line,
            message: format!("cannot parse timestamp `{raw_ts}`"),
        })?;
        let ghi = field_f64(&record, ghi_col, line, "ghi_w_m2")?;
        let temp = field_f64(&record, temp_col, line, "temp_c")?;
        if ghi < 0.0 {
            return Err(ScenarioError::NegativeGhi { line, value: ghi });
        }
        match prev {
            Some(p) if ts <= p => return Err(ScenarioError::NonMonotonic { line }),
            Some(p) if ts != p + Duration::hours(1) => return Err(ScenarioError::Gap { line }),
            None if ts.ordinal0() != 0 || ts.time() != chrono::NaiveTime::MIN => {
                return Err(ScenarioError::Malformed {
                    line,
                    message: "data must start at Jan 1 00:00".into(),
                })
            }
            _ => {}
        }
        prev = Some(ts);
        if years.last().is_none_or(|y| y.year != ts.year()) {
            years.push(WeatherYear {
                year: ts.year(),
                ghi: Vec::with_capacity(8784),
                temp: Vec::with_capacity(8784),
            });
        }
        let y = years.last_mut().expect("pushed above");
        y.ghi.push(ghi);
        y.temp.push(temp);
    }
    for y in &years {
        if y.ghi.len() != 8760 && y.ghi.len() != 8784 {
            return Err(ScenarioError::IncompleteYear {
                year: y.year,
                rows: y.ghi.len(),
            });
        }
    }
    if years.is_empty() {
        return Err(ScenarioError::NoWeather);
    }
    Ok(years)
}

/// Reads the `load` column of a demand-shape CSV.
pub fn parse_demand_shape_csv(path: &Path) -> Result<Vec<f64>, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ScenarioError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = column(&headers, "load")?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ScenarioError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        out.push(field_f64(&record, col, line, "load")?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandKind {
    Constant,
    Variable,
    /// Flat demand paired with flat renewable supply.
    Ideal,
}

impl DemandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DemandKind::Constant => "constant",
            DemandKind::Variable => "variable",
            DemandKind::Ideal => "ideal",
        }
    }
}

/// Hourly hydrogen demand over one common year, t H2/h.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandProfile {
    pub kind: DemandKind,
    /// t H2/yr.
    pub annual_total: f64,
    pub shape: Vec<f64>,
}

impl DemandProfile {
    /// Rebuilds the profile from its own shape; a no-op on valid profiles.
    pub fn regenerate(&self) -> Result<DemandProfile, ScenarioError> {
        make_demand(self.kind, self.annual_total, Some(&self.shape))
    }
}

/// Neumaier summation; keeps rescaled profiles idempotent over 8760 entries.
fn compensated_sum(values: &[f64]) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + carry
}

pub fn make_demand(kind: DemandKind, annual_total: f64, shape: Option<&[f64]>) -> Result<DemandProfile, ScenarioError> {
    if !(annual_total > 0.0 && annual_total.is_finite()) {
        return Err(ScenarioError::BadAnnualTotal(annual_total));
    }
    let shape = match kind {
        DemandKind::Constant | DemandKind::Ideal => vec![annual_total / HOURS_PER_YEAR; YEAR_HOURS],
        DemandKind::Variable => {
            let raw = shape.ok_or(ScenarioError::MissingShape)?;
            if raw.len() < YEAR_HOURS {
                return Err(ScenarioError::ShortShape(raw.len()));
            }
            let raw = &raw[..YEAR_HOURS];
            if let Some((index, &value)) = raw.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
                return Err(ScenarioError::BadShapeEntry { index, value });
            }
            let sum = compensated_sum(raw);
            if sum <= 0.0 {
                return Err(ScenarioError::ZeroShape);
            }
            let factor = annual_total / sum;
            raw.iter().map(|v| v * factor).collect()
        }
    };
    Ok(DemandProfile {
        kind,
        annual_total,
        shape,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReductionPolicy {
    FullYear,
    /// `k` consecutive calendar weeks per season, from the first Monday of
    /// January, April, July and October.
    SeasonalWeeks(usize),
    FirstHours(usize),
}

impl fmt::Display for ReductionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionPolicy::FullYear => write!(f, "full_year"),
            ReductionPolicy::SeasonalWeeks(k) => write!(f, "seasonal_weeks:{k}"),
            ReductionPolicy::FirstHours(n) => write!(f, "first_hours:{n}"),
        }
    }
}

impl FromStr for ReductionPolicy {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScenarioError::BadPolicy(s.to_string());
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a.parse::<usize>().map_err(|_| bad())?)),
            None => (s, None),
        };
        match (name, arg) {
            ("full_year", None) => Ok(ReductionPolicy::FullYear),
            ("seasonal_weeks", Some(k)) if k > 0 => Ok(ReductionPolicy::SeasonalWeeks(k)),
            ("first_hours", Some(n)) if n > 0 => Ok(ReductionPolicy::FirstHours(n)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for ReductionPolicy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReductionPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl ReductionPolicy {
    /// Hour-of-year indices kept by the policy for calendar `year`.
    pub fn hours(&self, year: i32) -> Result<Vec<usize>, ScenarioError> {
        let too_long = |needed: usize| ScenarioError::NotEnoughData {
            policy: self.to_string(),
            needed,
            available: YEAR_HOURS,
        };
        match *self {
            ReductionPolicy::FullYear => Ok((0..YEAR_HOURS).collect()),
            ReductionPolicy::FirstHours(n) => {
                if n > YEAR_HOURS {
                    return Err(too_long(n));
                }
                Ok((0..n).collect())
            }
            ReductionPolicy::SeasonalWeeks(k) => {
                // A season spans 13 weeks; more than that would overlap the next one.
                if k > 13 {
                    return Err(too_long(4 * k * WEEK_HOURS));
                }
                let mut out = Vec::with_capacity(4 * k * WEEK_HOURS);
                for month in SEASON_MONTHS {
                    let first = NaiveDate::from_ymd_opt(year, month, 1).ok_or_else(|| too_long(0))?;
                    let to_monday = (7 - first.weekday().num_days_from_monday() as usize) % 7;
                    let start = (first.ordinal0() as usize + to_monday) * 24;
                    let end = start + k * WEEK_HOURS;
                    if end > YEAR_HOURS {
                        return Err(too_long(end));
                    }
                    out.extend(start..end);
                }
                Ok(out)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    pub weight: f64,
    pub ghi: Vec<f64>,
    pub temp: Vec<f64>,
    /// t H2/h per step.
    pub demand: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSet {
    pub policy: ReductionPolicy,
    pub demand_kind: DemandKind,
    /// t H2/yr the demand profile was built for.
    pub annual_total: f64,
    /// Step length, h.
    pub dt: f64,
    /// Hours of the year represented by one step.
    pub annualization: f64,
    pub scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn horizon(&self) -> usize {
        self.scenarios.first().map_or(0, |s| s.demand.len())
    }

    /// Expected annual hydrogen demand implied by the reduced series.
    pub fn annual_demand(&self) -> f64 {
        self.scenarios
            .iter()
            .map(|s| s.weight * self.annualization * self.dt * s.demand.iter().sum::<f64>())
            .sum()
    }

    /// Copy with every demand series multiplied by `factor`.
    pub fn scaled_demand(&self, factor: f64) -> ScenarioSet {
        let mut out = self.clone();
        out.annual_total *= factor;
        for s in &mut out.scenarios {
            s.demand.iter_mut().for_each(|d| *d *= factor);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("scenario set serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<ScenarioSet, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// One scenario per weather year, uniformly weighted, each cut to the hours
/// chosen by `policy`. With `ideal_weather`, GHI and temperature are replaced
/// by their annual means so that PV output is constant.
pub fn reduce_periods(
    weather: &[WeatherYear],
    demand: &DemandProfile,
    policy: ReductionPolicy,
    ideal_weather: bool,
) -> Result<ScenarioSet, ScenarioError> {
    if weather.is_empty() {
        return Err(ScenarioError::NoWeather);
    }
    let weight = 1.0 / weather.len() as f64;
    let mut scenarios = Vec::with_capacity(weather.len());
    let mut horizon = 0;
    for w in weather {
        let idx = policy.hours(w.year)?;
        horizon = idx.len();
        let (ghi, temp) = w.common_year();
        let (ghi_sel, temp_sel) = if ideal_weather {
            (vec![mean(ghi); idx.len()], vec![mean(temp); idx.len()])
        } else {
            (
                idx.iter().map(|&h| ghi[h]).collect(),
                idx.iter().map(|&h| temp[h]).collect(),
            )
        };
        scenarios.push(Scenario {
            label: w.year.to_string(),
            weight,
            ghi: ghi_sel,
            temp: temp_sel,
            demand: idx.iter().map(|&h| demand.shape[h]).collect(),
        });
    }
    Ok(ScenarioSet {
        policy,
        demand_kind: demand.kind,
        annual_total: demand.annual_total,
        dt: 1.0,
        annualization: HOURS_PER_YEAR / horizon as f64,
        scenarios,
    })
}

/// Deterministic stand-ins for measured weather and load data.
pub mod synthetic {
    use std::f64::consts::PI;

    use chrono::{Datelike, Duration, NaiveDate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::WeatherYear;

    /// Latitude of the synthetic site (southern California), degrees.
    const LATITUDE_DEG: f64 = 34.0;

    fn hours_in(year: i32) -> usize {
        if NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
            8784
        } else {
            8760
        }
    }

    /// Clear-sky irradiance (Haurwitz model) scaled by a daily clearness
    /// index, with seasonal and diurnal temperature swings.
    pub fn weather_year(year: i32) -> WeatherYear {
        let mut rng = ChaCha8Rng::seed_from_u64(year as u64);
        let n = hours_in(year);
        let lat = LATITUDE_DEG.to_radians();
        let mut ghi = Vec::with_capacity(n);
        let mut temp = Vec::with_capacity(n);
        let mut clearness = 1.0;
        let mut day_offset = 0.0;
        for h in 0..n {
            let day = (h / 24) as f64;
            let hour = (h % 24) as f64 + 0.5;
            if h % 24 == 0 {
                let season = (2.0 * PI * (day - 172.0) / 365.0).cos();
                let cloudy_chance = 0.25 - 0.18 * season;
                clearness = if rng.gen_bool(cloudy_chance) {
                    rng.gen_range(0.25..0.7)
                } else {
                    rng.gen_range(0.88..1.0)
                };
                day_offset = rng.gen_range(-2.5..2.5);
            }
            let decl = 23.45f64.to_radians() * (2.0 * PI * (284.0 + day + 1.0) / 365.0).sin();
            let hour_angle = (15.0 * (hour - 12.0)).to_radians();
            let cos_z = lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos();
            let clear = if cos_z > 0.0 {
                1098.0 * cos_z * (-0.057 / cos_z).exp()
            } else {
                0.0
            };
            ghi.push(((clear * clearness) * 10.0).round() / 10.0);
            let seasonal = -6.0 * (2.0 * PI * (day - 15.0) / 365.0).cos();
            let diurnal = 5.0 * (2.0 * PI * (hour - 9.0) / 24.0).sin();
            let t = 18.0 + seasonal + diurnal + day_offset - 3.0 * (1.0 - clearness);
            temp.push((t * 10.0).round() / 10.0);
        }
        WeatherYear { year, ghi, temp }
    }

    /// Commercial-building load shape: weekday daytime peak, lower weekends,
    /// mild summer cooling bump. Relative units.
    pub fn commercial_load(year: i32) -> Vec<f64> {
        let start = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
        (0..hours_in(year))
            .map(|h| {
                let date = start + Duration::days((h / 24) as i64);
                let hour = (h % 24) as f64;
                let weekend = date.weekday().number_from_monday() >= 6;
                let day_peak = if (6.0..20.0).contains(&hour) {
                    (PI * (hour - 6.0) / 14.0).sin()
                } else {
                    0.0
                };
                let summer = 0.15 * (1.0 - (2.0 * PI * (date.ordinal0() as f64 - 15.0) / 365.0).cos()) / 2.0;
                let base = 0.55 + summer + 0.45 * day_peak * if weekend { 0.45 } else { 1.0 };
                (base * 1e4).round() / 1e4
            })
            .collect()
    }

    pub fn weather_csv(years: &[WeatherYear]) -> String {
        let mut out = String::from("timestamp,ghi_w_m2,temp_c\n");
        for y in years {
            let start = NaiveDate::from_ymd_opt(y.year, 1, 1)
                .expect("valid year")
                .and_hms_opt(0, 0, 0)
                .expect("midnight");
            for (h, (g, t)) in y.ghi.iter().zip(&y.temp).enumerate() {
                let ts = start + Duration::hours(h as i64);
                out.push_str(&format!("{},{g},{t}\n", ts.format("%Y-%m-%dT%H:%M:%S")));
            }
        }
        out
    }

    pub fn load_csv(load: &[f64]) -> String {
        let mut out = String::from("hour,load\n");
        for (h, v) in load.iter().enumerate() {
            out.push_str(&format!("{h},{v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_demand_per_hour() {
        let d = make_demand(DemandKind::Constant, 2000.0, None).unwrap();
        assert_eq!(d.shape.len(), 8760);
        assert!((d.shape[0] - 0.228310502).abs() < 1e-8);
        assert!(make_demand(DemandKind::Constant, 0.0, None).is_err());
    }

    #[test]
    fn policies_parse_and_print() {
        for s in ["full_year", "seasonal_weeks:2", "first_hours:72"] {
            assert_eq!(s.parse::<ReductionPolicy>().unwrap().to_string(), s);
        }
        assert!("first_hours:0".parse::<ReductionPolicy>().is_err());
        assert!("weekly".parse::<ReductionPolicy>().is_err());
    }

    #[test]
    fn seasonal_weeks_start_on_mondays() {
        // 2019-01-07, 2019-04-01, 2019-07-01 and 2019-10-07 are the first Mondays.
        let h = ReductionPolicy::SeasonalWeeks(1).hours(2019).unwrap();
        assert_eq!(h.len(), 672);
        let starts: Vec<usize> = (0..4).map(|k| h[k * 168] / 24).collect();
        assert_eq!(starts, vec![6, 90, 181, 279]);
    }

    #[test]
    fn synthetic_year_round_trips_through_csv() {
        let y = synthetic::weather_year(2020);
        assert_eq!(y.ghi.len(), 8784);
        let parsed = parse_weather_str(&synthetic::weather_csv(std::slice::from_ref(&y))).unwrap();
        assert_eq!(parsed, vec![y]);
    }
}
