//! CSV job logs and restore samples.
//!
//! Job logs carry the header `day,data_mb,duration_s`; logs exported in
//! minutes may use `duration_min` instead, which is converted to seconds
//! here. Restore samples carry `tier,data_mb,duration_s`.

use std::fmt::Write as _;

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::error::{Error, Result};
use crate::metrics::{JobSample, RestoreSample, SourceTier, SECONDS_PER_MINUTE};

fn reader(text: &str) -> csv::Reader<&[u8]> {
    ReaderBuilder::new()
        .has_headers(true)
        .trim(Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes())
}

fn line_of(record: &StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::parse(line, e.to_string())
}

fn column(headers: &StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

fn number(record: &StringRecord, idx: usize, what: &str) -> Result<f64> {
    let cell = record.get(idx).unwrap_or("");
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line_of(record), format!("{what}: '{cell}' is not a number")))
}

pub fn parse_job_log(text: &str) -> Result<Vec<JobSample>> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let day = column(&headers, "day").ok_or_else(|| Error::parse(1, "missing column 'day'"))?;
    let data =
        column(&headers, "data_mb").ok_or_else(|| Error::parse(1, "missing column 'data_mb'"))?;
    let (duration, scale) = match (
        column(&headers, "duration_s"),
        column(&headers, "duration_min"),
    ) {
        (Some(i), None) => (i, 1.0),
        (None, Some(i)) => (i, SECONDS_PER_MINUTE),
        (Some(_), Some(_)) => {
            return Err(Error::parse(
                1,
                "give either 'duration_s' or 'duration_min', not both",
            ))
        }
        (None, None) => return Err(Error::parse(1, "missing column 'duration_s'")),
    };
    if let Some(extra) = headers
        .iter()
        .find(|h| !["day", "data_mb", "duration_s", "duration_min"].contains(h))
    {
        return Err(Error::parse(1, format!("unexpected column '{extra}'")));
    }

    let mut samples: Vec<JobSample> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        let day_cell = record.get(day).unwrap_or("");
        let day_value: u32 = day_cell.parse().map_err(|_| {
            Error::parse(line, format!("day: '{day_cell}' is not a positive integer"))
        })?;
        let data_mb = number(&record, data, "data_mb")?;
        let duration_s = number(&record, duration, "duration")? * scale;
        if let Some(prev) = samples.last() {
            if day_value == prev.day {
                return Err(Error::parse(line, format!("duplicate day {day_value}")));
            }
            if day_value < prev.day {
                return Err(Error::parse(
                    line,
                    format!(
                        "day {day_value} follows day {}; days must increase",
                        prev.day
                    ),
                ));
            }
        }
        let sample = JobSample::new(day_value, data_mb, duration_s)
            .map_err(|e| Error::parse(line, e.to_string()))?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::parse(1, "no samples"));
    }
    Ok(samples)
}

/// Writes a log in seconds. Values use the shortest exact representation,
/// so parsing the output gives back the same samples.
pub fn render_job_log(samples: &[JobSample]) -> String {
    let mut out = String::from("day,data_mb,duration_s\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{}", s.day, s.data_mb, s.duration_s);
    }
    out
}

pub fn parse_restore_samples(text: &str) -> Result<Vec<RestoreSample>> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let tier = column(&headers, "tier").ok_or_else(|| Error::parse(1, "missing column 'tier'"))?;
    let data =
        column(&headers, "data_mb").ok_or_else(|| Error::parse(1, "missing column 'data_mb'"))?;
    let duration = column(&headers, "duration_s")
        .ok_or_else(|| Error::parse(1, "missing column 'duration_s'"))?;
    if let Some(extra) = headers
        .iter()
        .find(|h| !["tier", "data_mb", "duration_s"].contains(h))
    {
        return Err(Error::parse(1, format!("unexpected column '{extra}'")));
    }
    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        let tier: SourceTier = record
            .get(tier)
            .unwrap_or("")
            .parse()
            .map_err(|e: Error| Error::parse(line, e.to_string()))?;
        let sample = RestoreSample::new(
            tier,
            number(&record, data, "data_mb")?,
            number(&record, duration, "duration_s")?,
        )
        .map_err(|e| Error::parse(line, e.to_string()))?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::parse(1, "no samples"));
    }
    Ok(samples)
}

pub fn render_restore_samples(samples: &[RestoreSample]) -> String {
    let mut out = String::from("tier,data_mb,duration_s\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{}", s.source_tier, s.data_mb, s.duration_s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minutes_are_converted() {
        let log = parse_job_log("day,data_mb,duration_min\n1,26956,8.75").unwrap();
        assert_eq!(log, vec![JobSample::new(1, 26956.0, 525.0).unwrap()]);
    }

    #[test]
    fn seconds_pass_through() {
        let log = parse_job_log("day,data_mb,duration_s\n1,8362,3270\n").unwrap();
        assert_eq!(log, vec![JobSample::new(1, 8362.0, 3270.0).unwrap()]);
    }

    #[test]
    fn crlf_and_column_order() {
        let log = parse_job_log("duration_s,day,data_mb\r\n10,1,5\r\n20,2,6\r\n").unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log[1], JobSample::new(2, 6.0, 20.0).unwrap());
    }

    #[test]
    fn empty_body_is_an_error() {
        let err = parse_job_log("day,data_mb,duration_s\n").unwrap_err();
        assert!(err.to_string().contains("no samples"), "{err}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_job_log("day,data_mb,duration_s\n1,5,10\n2,abc,10\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        let err = parse_job_log("day,data_mb,duration_s\n1,5,10\n1,6,10\n").unwrap_err();
        assert!(
            matches!(err, Error::Parse { line: 3, ref message } if message.contains("duplicate"))
        );

        let err = parse_job_log("day,data_mb,duration_s\n1,5,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let err = parse_job_log("day,data_mb\n1,5\n").unwrap_err();
        assert!(
            matches!(err, Error::Parse { line: 1, ref message } if message.contains("duration_s"))
        );

        assert!(parse_job_log("day,data_mb,duration_s\n2,5,1\n1,5,1\n").is_err());
        assert!(parse_job_log("day,data_mb,duration_s,extra\n1,5,1,x\n").is_err());
        assert!(parse_job_log("day,data_mb,duration_s\n0,5,1\n").is_err());
    }

    #[test]
    fn restore_samples() {
        let s = parse_restore_samples(
            "tier,data_mb,duration_s\nlocal,1824.01,38.24\narchive,1824,470.1\n",
        )
        .unwrap();
        assert_eq!(s[0].source_tier, SourceTier::Local);
        assert_eq!(s[1].duration_s, 470.1);
        assert!(parse_restore_samples("tier,data_mb,duration_s\ntape,1,1\n").is_err());
        assert!(parse_restore_samples("tier,data_mb,duration_s\nlocal,0,1\n").is_err());
        let back = parse_restore_samples(&render_restore_samples(&s)).unwrap();
        assert_eq!(back, s);
    }

    proptest! {
        #[test]
        fn job_log_round_trip(rows in prop::collection::vec((1u32..5, 0.0f64..1e7, 1e-3f64..1e6), 1..20)) {
            let mut day = 0;
            let samples: Vec<_> = rows
                .into_iter()
                .map(|(step, d, t)| {
                    day += step;
                    JobSample::new(day, d, t).unwrap()
                })
                .collect();
            prop_assert_eq!(parse_job_log(&render_job_log(&samples)).unwrap(), samples);
        }
    }
}
