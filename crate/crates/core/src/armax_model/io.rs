//! Trajectory CSV: header `k,u_1..u_l,y_1..y_n[,w_1..w_n]`, one row per time step.

use std::io::{Read, Write};

use nalgebra::DVector;

use super::{Observation, Trajectory};
use crate::error::{Error, Result};

/// Column layout recovered from a trajectory CSV header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrajectoryHeader {
    pub n: usize,
    pub l: usize,
    pub has_noise: bool,
}

impl TrajectoryHeader {
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["k".to_string()];
        cols.extend((1..=self.l).map(|i| format!("u_{i}")));
        cols.extend((1..=self.n).map(|i| format!("y_{i}")));
        if self.has_noise {
            cols.extend((1..=self.n).map(|i| format!("w_{i}")));
        }
        cols
    }

    pub fn parse(fields: &[&str]) -> Result<Self> {
        let count = |prefix: &str| fields.iter().filter(|f| f.starts_with(prefix)).count();
        let (l, n, nw) = (count("u_"), count("y_"), count("w_"));
        let header = Self { n, l, has_noise: nw > 0 };
        let expected = header.columns();
        if fields.len() != expected.len() || fields.iter().zip(&expected).any(|(a, b)| a.trim() != b) {
            return Err(Error::Data(format!(
                "unexpected trajectory header {:?}; expected k,u_1..u_l,y_1..y_n[,w_1..w_n]",
                fields.join(",")
            )));
        }
        if n == 0 || l == 0 || (header.has_noise && nw != n) {
            return Err(Error::Data("trajectory header must declare at least one u and one y column".into()));
        }
        Ok(header)
    }
}

pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory, include_noise: bool) -> Result<()> {
    let Some(first) = traj.observations.first() else {
        return Err(Error::invalid("cannot write an empty trajectory"));
    };
    let noise = if include_noise { traj.true_noise.as_ref() } else { None };
    let header = TrajectoryHeader { n: first.y.len(), l: first.u.len(), has_noise: noise.is_some() };
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header.columns())?;
    let mut row = Vec::with_capacity(header.columns().len());
    for (i, obs) in traj.observations.iter().enumerate() {
        row.clear();
        row.push(obs.k.to_string());
        row.extend(obs.u.iter().map(f64::to_string));
        row.extend(obs.y.iter().map(f64::to_string));
        if let Some(w) = noise {
            row.extend(w[i].iter().map(f64::to_string));
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Row-by-row trajectory reader for streaming consumers.
pub struct TrajectoryCsvReader<R: Read> {
    header: TrajectoryHeader,
    records: csv::StringRecordsIntoIter<R>,
    row: usize,
}

impl<R: Read> TrajectoryCsvReader<R> {
    pub fn new(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
        let fields: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let refs: Vec<&str> = fields.iter().map(String::as_str).collect();
        let header = TrajectoryHeader::parse(&refs)?;
        Ok(Self { header, records: reader.into_records(), row: 0 })
    }

    pub fn header(&self) -> TrajectoryHeader {
        self.header
    }

    /// Next `(observation, noise)` pair; errors carry the 1-based data row number.
    pub fn next_row(&mut self) -> Option<Result<(Observation, Option<DVector<f64>>)>> {
        let record = self.records.next()?;
        self.row += 1;
        let row = self.row;
        Some(record.map_err(Error::from).and_then(|rec| {
            let h = self.header;
            let width = h.columns().len();
            if rec.len() != width {
                return Err(Error::Data(format!("row {row}: expected {width} fields, found {}", rec.len())));
            }
            let k: usize = rec[0]
                .parse()
                .map_err(|_| Error::Data(format!("row {row}: bad time index {:?}", &rec[0])))?;
            if k != row - 1 {
                return Err(Error::Data(format!("row {row}: time index {k} is not contiguous")));
            }
            let mut values = Vec::with_capacity(width - 1);
            for (col, field) in rec.iter().enumerate().skip(1) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Data(format!("row {row}, column {}: bad number {field:?}", col + 1)))?;
                if !v.is_finite() {
                    return Err(Error::Data(format!("row {row}, column {}: non-finite value", col + 1)));
                }
                values.push(v);
            }
            let u = DVector::from_column_slice(&values[..h.l]);
            let y = DVector::from_column_slice(&values[h.l..h.l + h.n]);
            let w = h.has_noise.then(|| DVector::from_column_slice(&values[h.l + h.n..]));
            Ok((Observation { k, u, y }, w))
        }))
    }
}

pub fn read_trajectory_csv<R: Read>(input: R) -> Result<(Trajectory, TrajectoryHeader)> {
    let mut reader = TrajectoryCsvReader::new(input)?;
    let header = reader.header();
    let mut observations = Vec::new();
    let mut noise = Vec::new();
    while let Some(row) = reader.next_row() {
        let (obs, w) = row?;
        observations.push(obs);
        if let Some(w) = w {
            noise.push(w);
        }
    }
    let true_noise = header.has_noise.then_some(noise);
    Ok((Trajectory { observations, true_noise }, header))
}
