//! The CSV row format shared by every experiment.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

pub const CSV_HEADER: [&str; 7] = ["experiment", "method", "n_or_k", "rep", "seed", "value", "value_kind"];

macro_rules! string_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn as_str(&self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!("unknown {} {other:?}", stringify!($name))),
                }
            }
        }
    };
}

string_enum!(
    Experiment {
        ConvergenceTriangles => "convergence-triangles",
        ConvergenceTorus => "convergence-torus",
        Quantization => "quantization",
    }
);

string_enum!(
    ValueKind {
        OtPowP => "ot_p_pow_p",
        DistortionP => "distortion_p",
        DistortionInf => "distortion_inf",
        RuntimeMs => "runtime_ms",
    }
);

/// One measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: Experiment,
    pub method: String,
    pub n_or_k: u64,
    pub rep: u64,
    pub seed: u64,
    pub value: f64,
    pub value_kind: ValueKind,
}

impl ExperimentRecord {
    fn key(&self) -> (Experiment, &str, u64, u64, ValueKind) {
        (self.experiment, &self.method, self.n_or_k, self.rep, self.value_kind)
    }
}

/// 17 significant digits: enough for an exact round trip of any `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Checks finiteness, nonnegativity and key uniqueness.
pub fn validate(records: &[ExperimentRecord]) -> Result<(), String> {
    let mut seen = std::collections::HashSet::new();
    for r in records {
        if !r.value.is_finite() || r.value < 0.0 {
            return Err(format!("invalid value {} in {r:?}", r.value));
        }
        if r.method.contains([',', '"', '\n', '\r']) {
            return Err(format!("method name {:?} is not a plain CSV field", r.method));
        }
        if !seen.insert(r.key()) {
            return Err(format!("duplicate record key {:?}", r.key()));
        }
    }
    Ok(())
}

pub fn write_records<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<(), String> {
    validate(records)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(|e| e.to_string())?;
    for r in records {
        w.write_record([
            r.experiment.as_str(),
            &r.method,
            &r.n_or_k.to_string(),
            &r.rep.to_string(),
            &r.seed.to_string(),
            &format_value(r.value),
            r.value_kind.as_str(),
        ])
        .map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

pub fn records_to_string(records: &[ExperimentRecord]) -> Result<String, String> {
    let mut buf = Vec::new();
    write_records(&mut buf, records)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<ExperimentRecord>, String> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(CSV_HEADER) {
        return Err(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()));
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(|e| e.to_string())?;
        let line = i + 2;
        let field = |j: usize| row.get(j).ok_or_else(|| format!("line {line}: missing column {}", CSV_HEADER[j]));
        let num = |j: usize| -> Result<u64, String> {
            field(j)?.parse().map_err(|e| format!("line {line}: {}: {e}", CSV_HEADER[j]))
        };
        out.push(ExperimentRecord {
            experiment: field(0)?.parse().map_err(|e| format!("line {line}: {e}"))?,
            method: field(1)?.to_string(),
            n_or_k: num(2)?,
            rep: num(3)?,
            seed: num(4)?,
            value: field(5)?.parse().map_err(|e| format!("line {line}: value: {e}"))?,
            value_kind: field(6)?.parse().map_err(|e| format!("line {line}: {e}"))?,
        });
    }
    validate(&out)?;
    Ok(out)
}

pub fn write_csv_file(path: &Path, records: &[ExperimentRecord]) -> CliResult<()> {
    let text = records_to_string(records).map_err(|message| CliError::Csv {
        path: path.to_path_buf(),
        message,
    })?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_csv_file(path: &Path) -> CliResult<Vec<ExperimentRecord>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_records(file).map_err(|message| CliError::Csv {
        path: path.to_path_buf(),
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: u64, value: f64) -> ExperimentRecord {
        ExperimentRecord {
            experiment: Experiment::ConvergenceTorus,
            method: "ot".into(),
            n_or_k: n,
            rep: 0,
            seed: u64::MAX,
            value,
            value_kind: ValueKind::OtPowP,
        }
    }

    #[test]
    fn header_is_fixed() {
        let text = records_to_string(&[]).unwrap();
        assert_eq!(text, "experiment,method,n_or_k,rep,seed,value,value_kind\n");
    }

    #[test]
    fn round_trip_is_exact() {
        let rs = vec![rec(1, 0.1), rec(2, 1.0 / 3.0), rec(3, 5e-324), rec(4, f64::MAX)];
        let text = records_to_string(&rs).unwrap();
        assert_eq!(read_records(text.as_bytes()).unwrap(), rs);
    }

    #[test]
    fn rejects_duplicates_and_bad_values() {
        assert!(validate(&[rec(1, 0.0), rec(1, 2.0)]).is_err());
        assert!(validate(&[rec(1, -1.0)]).is_err());
        assert!(validate(&[rec(1, f64::NAN)]).is_err());
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(read_records("a,b\n1,2\n".as_bytes()).is_err());
    }
}
