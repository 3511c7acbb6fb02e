//! Provenance-stamped CSV I/O.
//!
//! Every file this crate writes starts with a comment header recording the
//! tool version, the command that produced it, the config hash and the seed,
//! so any output can be reproduced from its own header. Trace files carry a
//! `# unit:` line and a `time_s,value` column header; values round-trip at
//! full double precision (shortest round-trip float formatting).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::polariton::{Branch, CrossingObservation};
use crate::timeseries::{SignalUnit, TimeSeries};

/// Reproducibility header carried by every output file.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub tool: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(command: impl Into<String>, config_hash: impl Into<String>, seed: u64) -> Self {
        Provenance {
            tool: format!("cavlab {}", env!("CARGO_PKG_VERSION")),
            command: command.into(),
            config_hash: config_hash.into(),
            seed,
        }
    }

    fn write_header(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# tool: {}", self.tool)?;
        writeln!(w, "# command: {}", self.command)?;
        writeln!(w, "# config: {}", self.config_hash)?;
        writeln!(w, "# seed: {}", self.seed)
    }
}

fn csv_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Csv {
        path: path.display().to_string(),
        row,
        message: message.into(),
    }
}

/// Writes a trace as `time_s,value` rows under the provenance and unit
/// header.
pub fn write_timeseries(path: &Path, trace: &TimeSeries, prov: &Provenance) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    prov.write_header(&mut w)?;
    writeln!(w, "# unit: {}", trace.unit())?;
    writeln!(w, "time_s,value")?;
    let dt = trace.dt_s();
    for (i, v) in trace.values().iter().enumerate() {
        writeln!(w, "{},{}", i as f64 * dt, v)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace written by [`write_timeseries`] (or compatible): comment
/// lines first (the `# unit:` line is mandatory), a `time_s,value` header,
/// then uniformly sampled rows (1 ppm step tolerance).
pub fn read_timeseries(path: &Path) -> Result<TimeSeries> {
    let reader = BufReader::new(File::open(path)?);
    let mut unit: Option<SignalUnit> = None;
    let mut header_seen = false;
    let mut times: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(u) = comment.trim().strip_prefix("unit:") {
                unit = Some(u.trim().parse()?);
            }
            continue;
        }
        if !header_seen {
            if trimmed != "time_s,value" {
                return Err(csv_err(
                    path,
                    line_no,
                    format!("expected header 'time_s,value', got '{trimmed}'"),
                ));
            }
            header_seen = true;
            continue;
        }
        let mut fields = trimmed.split(',');
        let (Some(ts), Some(vs), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(csv_err(path, line_no, "expected exactly 2 fields"));
        };
        let t: f64 = ts
            .trim()
            .parse()
            .map_err(|_| csv_err(path, line_no, format!("bad time value '{ts}'")))?;
        let v: f64 = vs
            .trim()
            .parse()
            .map_err(|_| csv_err(path, line_no, format!("bad sample value '{vs}'")))?;
        times.push(t);
        values.push(v);
    }

    let Some(unit) = unit else {
        return Err(csv_err(path, 1, "missing '# unit: meter|transmission' line"));
    };
    if !header_seen {
        return Err(csv_err(path, 1, "missing 'time_s,value' header"));
    }
    if times.len() < 2 {
        return Err(csv_err(path, 1, "need at least 2 data rows"));
    }

    let dt = times[1] - times[0];
    if !(dt.is_finite() && dt > 0.0) {
        return Err(csv_err(path, 2, format!("non-increasing time step {dt}")));
    }
    for i in 1..times.len() {
        let step = times[i] - times[i - 1];
        if ((step - dt) / dt).abs() > 1e-6 {
            // Row numbers are 1-based over data rows; comments and the
            // header push the file line further down, so report both.
            return Err(csv_err(
                path,
                i + 1,
                format!(
                    "non-uniform sampling at data row {}: step {} s vs {} s (tolerance 1 ppm)",
                    i + 1,
                    step,
                    dt
                ),
            ));
        }
    }

    TimeSeries::new(dt, values, unit)
}

/// Writes a generic two-column CSV (curves, spectra, histograms).
pub fn write_xy(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = (f64, f64)>,
    prov: &Provenance,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    prov.write_header(&mut w)?;
    writeln!(w, "{header}")?;
    for (x, y) in rows {
        writeln!(w, "{x},{y}")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a `key = value` metrics report.
pub fn write_metrics(path: &Path, entries: &[(String, String)], prov: &Provenance) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    prov.write_header(&mut w)?;
    for (k, v) in entries {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a fringe scan as `position_m,transmission`.
pub fn write_resonance_scan(
    path: &Path,
    samples: &[(f64, f64)],
    prov: &Provenance,
) -> Result<()> {
    write_xy(
        path,
        "position_m,transmission",
        samples.iter().copied(),
        prov,
    )
}

/// Reads a fringe scan written by [`write_resonance_scan`].
pub fn read_resonance_scan(path: &Path) -> Result<Vec<(f64, f64)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    let mut header_seen = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            if trimmed != "position_m,transmission" {
                return Err(csv_err(
                    path,
                    line_no,
                    format!("expected header 'position_m,transmission', got '{trimmed}'"),
                ));
            }
            header_seen = true;
            continue;
        }
        let mut fields = trimmed.split(',');
        let (Some(zs), Some(ts), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(csv_err(path, line_no, "expected exactly 2 fields"));
        };
        let z: f64 = zs
            .trim()
            .parse()
            .map_err(|_| csv_err(path, line_no, format!("bad position '{zs}'")))?;
        let t: f64 = ts
            .trim()
            .parse()
            .map_err(|_| csv_err(path, line_no, format!("bad transmission '{ts}'")))?;
        out.push((z, t));
    }
    if out.is_empty() {
        return Err(csv_err(path, 1, "no data rows"));
    }
    Ok(out)
}

/// Writes polariton peak observations as `voltage_v,energy_mev,branch`.
pub fn write_crossing_observations(
    path: &Path,
    observations: &[CrossingObservation],
    prov: &Provenance,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    prov.write_header(&mut w)?;
    writeln!(w, "voltage_v,energy_mev,branch")?;
    for o in observations {
        writeln!(w, "{},{},{}", o.voltage_v, o.energy_mev, o.branch)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads polariton peak observations written by
/// [`write_crossing_observations`].
pub fn read_crossing_observations(path: &Path) -> Result<Vec<CrossingObservation>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    let mut header_seen = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            if trimmed != "voltage_v,energy_mev,branch" {
                return Err(csv_err(
                    path,
                    line_no,
                    format!("expected header 'voltage_v,energy_mev,branch', got '{trimmed}'"),
                ));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(csv_err(path, line_no, "expected exactly 3 fields"));
        }
        let voltage_v: f64 = fields[0]
            .parse()
            .map_err(|_| csv_err(path, line_no, format!("bad voltage '{}'", fields[0])))?;
        let energy_mev: f64 = fields[1]
            .parse()
            .map_err(|_| csv_err(path, line_no, format!("bad energy '{}'", fields[1])))?;
        let branch: Branch = fields[2]
            .parse()
            .map_err(|_| csv_err(path, line_no, format!("bad branch '{}'", fields[2])))?;
        out.push(CrossingObservation {
            voltage_v,
            energy_mev,
            branch,
        });
    }
    if out.is_empty() {
        return Err(csv_err(path, 1, "no data rows"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::SignalUnit;

    fn prov() -> Provenance {
        Provenance::new("test", "deadbeef", 7)
    }

    #[test]
    fn timeseries_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let values = vec![0.0, 1.2345678901234567e-12, -3.3e-9, 7.1e-10, 0.25e-12];
        let ts = TimeSeries::new(1e-5, values.clone(), SignalUnit::Meter).unwrap();
        write_timeseries(&path, &ts, &prov()).unwrap();
        let back = read_timeseries(&path).unwrap();
        assert_eq!(back.values(), values.as_slice());
        assert_eq!(back.unit(), SignalUnit::Meter);
        assert!((back.dt_s() - 1e-5).abs() < 1e-18);
    }

    #[test]
    fn provenance_header_is_present() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let ts = TimeSeries::new(1e-5, vec![0.0, 1.0], SignalUnit::Transmission).unwrap();
        write_timeseries(&path, &ts, &prov()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# tool: cavlab"));
        assert!(text.contains("# command: test"));
        assert!(text.contains("# config: deadbeef"));
        assert!(text.contains("# seed: 7"));
        assert!(text.contains("# unit: transmission"));
    }

    #[test]
    fn jittered_timestamps_are_rejected_with_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(
            &path,
            "# unit: meter\ntime_s,value\n0,0\n1e-5,1\n2.1e-5,2\n3e-5,3\n",
        )
        .unwrap();
        let err = read_timeseries(&path).unwrap_err();
        match err {
            Error::Csv { row, .. } => assert_eq!(row, 3),
            other => panic!("expected Csv error, got {other:?}"),
        }
    }

    #[test]
    fn missing_unit_or_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let no_unit = dir.path().join("no_unit.csv");
        std::fs::write(&no_unit, "time_s,value\n0,0\n1e-5,1\n").unwrap();
        assert!(read_timeseries(&no_unit).is_err());

        let bad_header = dir.path().join("bad_header.csv");
        std::fs::write(&bad_header, "# unit: meter\nt,v\n0,0\n1e-5,1\n").unwrap();
        assert!(read_timeseries(&bad_header).is_err());
    }

    #[test]
    fn observation_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.csv");
        let obs = vec![
            CrossingObservation {
                voltage_v: 30.0,
                energy_mev: 1720.5,
                branch: Branch::Lower,
            },
            CrossingObservation {
                voltage_v: 30.0,
                energy_mev: 1727.25,
                branch: Branch::Upper,
            },
        ];
        write_crossing_observations(&path, &obs, &prov()).unwrap();
        assert_eq!(read_crossing_observations(&path).unwrap(), obs);
    }

    #[test]
    fn resonance_scan_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        let samples = vec![(5.06e-6, 0.2), (5.07e-6, 1.0), (5.08e-6, 0.21)];
        write_resonance_scan(&path, &samples, &prov()).unwrap();
        assert_eq!(read_resonance_scan(&path).unwrap(), samples);
    }
}
