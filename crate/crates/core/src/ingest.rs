//! Monthly precipitation records: CSV parsing, validation and summary
//! statistics.
//!
//! Two layouts are accepted, both UTF-8 with a mandatory header row:
//!
//! * long: `station,year,month,precip_mm`, one observation per row;
//! * wide: `station,year,jan,feb,...,dec`, one station-year per row.
//!
//! Values are millimeters and must be plain decimals (`12.5`, `0`, `1e2`);
//! thousands separators and decimal commas are rejected.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MONTHS: [&str; 12] = [
    "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsvFormat {
    Long,
    Wide,
}

impl FromStr for CsvFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "long" => Ok(CsvFormat::Long),
            "wide" => Ok(CsvFormat::Wide),
            other => Err(format!("unknown format `{other}` (expected long or wide)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub year: i32,
    pub month: u8,
    pub precip: f64,
}

/// One station's monthly record, sorted by (year, month).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationSeries {
    pub station: String,
    pub observations: Vec<Observation>,
}

impl StationSeries {
    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.precip).collect()
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
    pub cv: f64,
    /// Adjusted Fisher-Pearson skewness; needs n >= 3.
    pub skewness: Option<f64>,
    /// Bias-corrected excess kurtosis; needs n >= 4.
    pub kurtosis: Option<f64>,
}

pub fn parse_station_csv(path: impl AsRef<Path>, format: CsvFormat) -> Result<Vec<StationSeries>> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_station_str(&text, format)
}

/// Parse CSV text. Stations are returned in order of first appearance.
pub fn parse_station_str(text: &str, format: CsvFormat) -> Result<Vec<StationSeries>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    check_header(&headers, format)?;

    let mut order: Vec<String> = Vec::new();
    let mut by_station: BTreeMap<String, Vec<(u64, Observation)>> = BTreeMap::new();

    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let expected = headers.len();
        if record.len() != expected {
            return Err(malformed(
                line,
                format!("expected {expected} fields, found {}", record.len()),
            ));
        }
        let station = record[0].to_string();
        if station.is_empty() {
            return Err(malformed(line, "empty station name".into()));
        }
        let year: i32 = record[1]
            .parse()
            .map_err(|_| malformed(line, format!("bad year `{}`", &record[1])))?;

        let mut push = |month: u8, raw: &str| -> Result<()> {
            let precip = parse_precip(raw, line)?;
            if !by_station.contains_key(&station) {
                order.push(station.clone());
            }
            by_station
                .entry(station.clone())
                .or_default()
                .push((line, Observation { year, month, precip }));
            Ok(())
        };

        match format {
            CsvFormat::Long => {
                let month: u8 = record[2]
                    .parse()
                    .ok()
                    .filter(|m| (1..=12).contains(m))
                    .ok_or_else(|| malformed(line, format!("bad month `{}`", &record[2])))?;
                push(month, &record[3])?;
            }
            CsvFormat::Wide => {
                for m in 0..12 {
                    push(m as u8 + 1, &record[2 + m])?;
                }
            }
        }
    }

    if order.is_empty() {
        return Err(Error::EmptyInput);
    }

    order
        .into_iter()
        .map(|station| {
            let mut rows = by_station.remove(&station).unwrap_or_default();
            rows.sort_by_key(|(_, o)| (o.year, o.month));
            for pair in rows.windows(2) {
                let (a, b) = (pair[0].1, pair[1].1);
                if (a.year, a.month) == (b.year, b.month) {
                    return Err(Error::DuplicateMonth {
                        station,
                        year: b.year,
                        month: b.month,
                    });
                }
                let (ny, nm) = next_month(a.year, a.month);
                if (ny, nm) != (b.year, b.month) {
                    return Err(Error::MissingMonth {
                        station,
                        year: ny,
                        month: nm,
                    });
                }
            }
            Ok(StationSeries {
                station,
                observations: rows.into_iter().map(|(_, o)| o).collect(),
            })
        })
        .collect()
}

fn check_header(headers: &[String], format: CsvFormat) -> Result<()> {
    let expected: Vec<&str> = match format {
        CsvFormat::Long => vec!["station", "year", "month", "precip_mm"],
        CsvFormat::Wide => ["station", "year"].into_iter().chain(MONTHS).collect(),
    };
    if headers.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(malformed(
            1,
            format!("header must be `{}`", expected.join(",")),
        ));
    }
    Ok(())
}

fn parse_precip(raw: &str, line: u64) -> Result<f64> {
    let plain = !raw.is_empty()
        && raw
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    let value = if plain { raw.parse::<f64>().ok() } else { None };
    let value = value
        .filter(|v| v.is_finite())
        .ok_or_else(|| malformed(line, format!("bad precipitation value `{raw}`")))?;
    if value < 0.0 {
        return Err(Error::NegativePrecip { line, value });
    }
    Ok(value)
}

fn malformed(line: u64, reason: String) -> Error {
    Error::MalformedRow { line, reason }
}

fn next_month(year: i32, month: u8) -> (i32, u8) {
    if month == 12 {
        (year + 1, 1)
    } else {
        (year, month + 1)
    }
}

pub fn summarize(series: &StationSeries) -> Result<SummaryStats> {
    summarize_values(&series.values())
}

pub fn summarize_values(data: &[f64]) -> Result<SummaryStats> {
    let n = data.len();
    if n < 2 {
        return Err(Error::SampleTooSmall { n, required: 2 });
    }
    let nf = n as f64;
    let mean = data.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in data {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if m2 == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let sd = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);

    let skewness = (n >= 3).then(|| {
        let g1 = m3 / m2.powf(1.5);
        (nf * (nf - 1.0)).sqrt() / (nf - 2.0) * g1
    });
    let kurtosis = (n >= 4).then(|| {
        let g2 = m4 / (m2 * m2) - 3.0;
        (nf - 1.0) / ((nf - 2.0) * (nf - 3.0)) * ((nf + 1.0) * g2 + 6.0)
    });

    let min = data.iter().copied().fold(f64::INFINITY, f64::min);
    let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SummaryStats {
        n,
        min,
        max,
        mean,
        sd,
        cv: sd / mean,
        skewness,
        kurtosis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_rows_parse_into_one_series() {
        let text = "station,year,month,precip_mm\nK,1901,1,12.5\nK,1901,2,0\n";
        let s = parse_station_str(text, CsvFormat::Long).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].station, "K");
        assert_eq!(s[0].values(), vec![12.5, 0.0]);
    }

    #[test]
    fn wide_row_expands_to_twelve() {
        let text = "station,year,jan,feb,mar,apr,may,jun,jul,aug,sep,oct,nov,dec\r\n\
                    K,1901,5,0,0,0,0,0,0,0,0,0,0,0\r\n";
        let s = parse_station_str(text, CsvFormat::Wide).unwrap();
        assert_eq!(s[0].len(), 12);
        assert_eq!(s[0].observations[0].precip, 5.0);
        assert_eq!(s[0].observations[0].month, 1);
        assert_eq!(s[0].observations[11].month, 12);
    }

    #[test]
    fn month_thirteen_is_malformed() {
        let text = "station,year,month,precip_mm\nK,1901,13,1.0\n";
        match parse_station_str(text, CsvFormat::Long) {
            Err(Error::MalformedRow { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_and_duplicate_and_gap() {
        let neg = "station,year,month,precip_mm\nK,1901,1,-1\n";
        assert!(matches!(
            parse_station_str(neg, CsvFormat::Long),
            Err(Error::NegativePrecip { .. })
        ));
        let dup = "station,year,month,precip_mm\nK,1901,1,1\nK,1901,1,2\n";
        assert!(matches!(
            parse_station_str(dup, CsvFormat::Long),
            Err(Error::DuplicateMonth { .. })
        ));
        let gap = "station,year,month,precip_mm\nK,1901,1,1\nK,1901,3,2\n";
        assert!(matches!(
            parse_station_str(gap, CsvFormat::Long),
            Err(Error::MissingMonth { month: 2, .. })
        ));
    }

    #[test]
    fn locale_numbers_rejected() {
        for bad in ["1,5", "\"1,000\"", "12.5mm", "nan", "inf", ""] {
            let text = format!("station,year,month,precip_mm\nK,1901,1,{bad}\n");
            assert!(
                parse_station_str(&text, CsvFormat::Long).is_err(),
                "accepted `{bad}`"
            );
        }
    }

    #[test]
    fn bad_header_rejected() {
        let text = "name,year,month,precip\nK,1901,1,1\n";
        assert!(matches!(
            parse_station_str(text, CsvFormat::Long),
            Err(Error::MalformedRow { line: 1, .. })
        ));
    }

    #[test]
    fn rows_are_sorted_and_stations_keep_first_seen_order() {
        let text = "station,year,month,precip_mm\nB,1901,2,2\nA,1901,1,1\nB,1901,1,1\n";
        let s = parse_station_str(text, CsvFormat::Long).unwrap();
        assert_eq!(s[0].station, "B");
        assert_eq!(s[0].values(), vec![1.0, 2.0]);
        assert_eq!(s[1].station, "A");
    }

    #[test]
    fn summary_of_two_points() {
        let s = summarize_values(&[0.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.5);
        assert!((s.sd - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s.cv - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(s.skewness, None);
        assert_eq!(s.kurtosis, None);
    }

    #[test]
    fn summary_degenerate_and_small() {
        assert!(matches!(
            summarize_values(&[5.0, 5.0, 5.0]),
            Err(Error::DegenerateSample)
        ));
        assert!(matches!(
            summarize_values(&[5.0]),
            Err(Error::SampleTooSmall { .. })
        ));
    }

    #[test]
    fn skewness_and_kurtosis_reference_values() {
        // {1,2,3,4,10}: mean 4, m2 = 10, m3 = 36, m4 = 194.8 (population);
        // G1 = sqrt(20)/3 * 36/10^1.5, G2 = 4/6 * (6 * (1.948 - 3) + 6).
        let s = summarize_values(&[1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
        assert!((s.skewness.unwrap() - 1.697_056_274_847_714_3).abs() < 1e-12);
        assert!((s.kurtosis.unwrap() - 3.152).abs() < 1e-12);
    }
}
