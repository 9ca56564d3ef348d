//! Dataset loading and writing: Mulan-style ARFF + label XML, and paired
//! feature/label CSV files.

mod arff;
mod csv_io;

pub use arff::load_mulan;
pub use csv_io::{load_csv, write_csv};
