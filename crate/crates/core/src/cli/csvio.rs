//! Orbit CSV files. Numbers are written with Rust's shortest round-trip
//! decimal formatting, so reading a file back reproduces every state bit for
//! bit.

use std::io::{Read, Write};

use crate::orbits::{divergence, CoupledOrbitPair, PseudoOrbit};

use super::CliError;

pub const TRADITIONAL_HEADER: [&str; 5] = ["step", "t", "x", "y", "z"];
pub const FILTERED_HEADER: [&str; 12] = [
    "step", "t", "x_lo", "y_lo", "z_lo", "x_hi", "y_hi", "z_hi", "x_avg", "y_avg", "z_avg", "delta",
];

fn csv_err(e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Io(io),
            _ => unreachable!(),
        }
    } else {
        CliError::Data(e.to_string())
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn require_3d(orbit: &PseudoOrbit) -> Result<(), CliError> {
    if orbit.dim() != 3 {
        return Err(CliError::Data(format!(
            "CSV layout needs three state components, orbit has {}",
            orbit.dim()
        )));
    }
    Ok(())
}

/// `step,t,x,y,z`, one row per state.
pub fn write_traditional<W: Write>(out: W, orbit: &PseudoOrbit) -> Result<(), CliError> {
    require_3d(orbit)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRADITIONAL_HEADER).map_err(csv_err)?;
    for (k, s) in orbit.states().enumerate() {
        w.write_record([k.to_string(), num(orbit.time(k)), num(s[0]), num(s[1]), num(s[2])])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Lower, upper and averaged states plus the max-norm spread, one row per
/// step.
pub fn write_filtered<W: Write>(out: W, pair: &CoupledOrbitPair) -> Result<(), CliError> {
    require_3d(&pair.averaged)?;
    let delta = divergence(pair);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FILTERED_HEADER).map_err(csv_err)?;
    let mut row: Vec<String> = Vec::with_capacity(FILTERED_HEADER.len());
    for k in 0..pair.len() {
        row.clear();
        row.push(k.to_string());
        row.push(num(pair.averaged.time(k)));
        for orbit in [&pair.lower, &pair.upper, &pair.averaged] {
            row.extend(orbit.state(k).iter().map(|&v| num(v)));
        }
        row.push(num(delta.values[k]));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Column-oriented view of a numeric CSV file with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl SeriesTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// Sample interval from the `t` column, when present and uniform enough
    /// to be meaningful.
    pub fn sample_interval(&self) -> Option<f64> {
        let t = self.column("t")?;
        if t.len() < 2 {
            return None;
        }
        let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        (h.is_finite() && h > 0.0).then_some(h)
    }
}

pub fn read_table<R: Read>(input: R) -> Result<SeriesTable, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let headers: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if headers.is_empty() {
        return Err(CliError::Data("CSV file has no header row".into()));
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::Data(format!(
                    "row {}: column `{}` is not a number: `{field}`",
                    line + 1,
                    headers[c]
                ))
            })?;
            columns[c].push(v);
        }
    }
    Ok(SeriesTable { headers, columns })
}
