//! CSV rows `step,family,index,value,flag`.

use std::io::Write;

use spectral_bounds::lanczos::shift_labels;
use spectral_bounds::{EdgeLabeledValues, ShiftedBounds};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flag {
    None,
    Inclusion,
    Wrapped,
    NotGuaranteed,
}

impl Flag {
    fn as_str(self) -> &'static str {
        match self {
            Flag::None => "-",
            Flag::Inclusion => "incl",
            Flag::Wrapped => "wrapped",
            Flag::NotGuaranteed => "not_guaranteed",
        }
    }
}

pub struct Rows<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> Rows<W> {
    pub fn new(writer: W) -> Result<Self, CliError> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["step", "family", "index", "value", "flag"])?;
        Ok(Self { out })
    }

    pub fn row(&mut self, step: usize, family: &str, index: isize, value: f64, flag: Flag) -> Result<(), CliError> {
        self.out.write_record([
            step.to_string(),
            family.to_string(),
            index.to_string(),
            format!("{value:.16e}"),
            flag.as_str().to_string(),
        ])?;
        Ok(())
    }

    /// Values labeled from the nearer end of the spectrum.
    pub fn edge(&mut self, step: usize, family: &str, values: &EdgeLabeledValues, flag: Flag) -> Result<(), CliError> {
        for (i, &v) in values.as_slice().iter().enumerate() {
            self.row(step, family, values.edge_label(i), v, flag)?;
        }
        Ok(())
    }

    /// Lehmann bounds labeled about the shift.
    pub fn shifted(&mut self, step: usize, family: &str, bounds: &ShiftedBounds) -> Result<(), CliError> {
        let flag = |wrapped: bool| if wrapped { Flag::Wrapped } else { Flag::Inclusion };
        for (i, b) in bounds.lower.iter().enumerate() {
            self.row(step, family, -(i as isize) - 1, b.value, flag(b.wrapped))?;
        }
        for (i, b) in bounds.upper.iter().enumerate() {
            self.row(step, family, i as isize + 1, b.value, flag(b.wrapped))?;
        }
        Ok(())
    }

    /// Estimates labeled about the shift.
    pub fn around(&mut self, step: usize, family: &str, values: &[f64], rho: f64) -> Result<(), CliError> {
        for (label, v) in shift_labels(values, rho) {
            self.row(step, family, label, v, Flag::None)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush()?;
        Ok(())
    }
}
