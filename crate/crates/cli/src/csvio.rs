//! Trajectory CSV: header `t,x1,y1,…,xn,yn`, one row per sample, every value
//! written with 17 significant digits so that reading it back is exact.

use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header must be t,x1,y1,…; got `{0}`")]
    Header(String),
    #[error("row {row}: `{text}` is not a number")]
    Value { row: usize, text: String },
}

/// Samples read back from a trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

pub fn header(agents: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for i in 1..=agents {
        h.push(format!("x{i}"));
        h.push(format!("y{i}"));
    }
    h
}

fn number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write<W: Write>(out: W, times: &[f64], states: &[&[f64]]) -> Result<(), CsvError> {
    let agents = states.first().map_or(0, |s| s.len() / 2);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(agents))?;
    for (t, s) in times.iter().zip(states) {
        w.write_record(std::iter::once(*t).chain(s.iter().copied()).map(number))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read<R: Read>(input: R) -> Result<Samples, CsvError> {
    let mut r = csv::Reader::from_reader(input);
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found.is_empty() || found.len() % 2 == 0 || found != header(found.len() / 2) {
        return Err(CsvError::Header(found.join(",")));
    }
    let mut samples = Samples {
        times: Vec::new(),
        states: Vec::new(),
    };
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .map(|text| {
                text.trim().parse::<f64>().map_err(|_| CsvError::Value {
                    row: row + 1,
                    text: text.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        samples.times.push(values[0]);
        samples.states.push(values[1..].to_vec());
    }
    Ok(samples)
}
