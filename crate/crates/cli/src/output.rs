//! CSV output to a file or stdout.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::CliError;

pub type CsvOut = csv::Writer<Box<dyn Write>>;

pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// A CSV writer that has already written `header`.
pub fn csv_out(path: Option<&Path>, header: &[&str]) -> Result<CsvOut, CliError> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    w.write_record(header)?;
    Ok(w)
}

/// Fixed-precision float formatting for CSV cells.
pub fn f(x: f64, digits: usize) -> String {
    format!("{x:.digits$}")
}
