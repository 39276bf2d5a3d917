//! Trajectory samples and their CSV serialization.
//!
//! One row per integration step plus the initial state. Floats are
//! written as `{:.16e}` (17 significant digits), which round-trips f64
//! exactly, so a written log re-read from disk is value-identical and
//! re-written logs are byte-identical.

use std::io::{BufRead, Write};

use crate::error::Error;
use crate::lyapunov::Branch;
use crate::{Vec3, Vec4, Vec6};

/// Everything the simulator knows at one time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub eta: Vec3,
    pub eta_dot: Vec3,
    pub eta_ref: Vec3,
    pub e: Vec3,
    pub e_dot: Vec3,
    pub e_vec: Vec6,
    pub tau: Vec3,
    pub omega: Vec4,
    pub d: Vec3,
    pub v: Vec3,
    pub gamma: Vec3,
    pub v_lyap: f64,
    pub v_dot: f64,
    pub branch: Branch,
    pub saturated: bool,
}

pub const CSV_HEADER: &str = "t,phi,theta,psi,phi_dot,theta_dot,psi_dot,\
phi_ref,theta_ref,psi_ref,e1,e2,e3,e1_dot,e2_dot,e3_dot,\
E1,E2,E3,E4,E5,E6,tau_phi,tau_theta,tau_psi,omega1,omega2,omega3,omega4,\
d_phi,d_theta,d_psi,v1,v2,v3,gamma1,gamma2,gamma3,V,V_dot,branch,saturated";

const FLOAT_COLUMNS: usize = 40;
const COLUMNS: usize = 42;

/// Ordered samples of one run; t strictly increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub samples: Vec<Sample>,
}

fn write_float(out: &mut String, x: f64) {
    use std::fmt::Write as _;
    write!(out, "{x:.16e}").expect("writing to String cannot fail");
}

impl Sample {
    fn float_fields(&self) -> [f64; FLOAT_COLUMNS] {
        let mut f = [0.0; FLOAT_COLUMNS];
        f[0] = self.t;
        f[1..4].copy_from_slice(self.eta.as_slice());
        f[4..7].copy_from_slice(self.eta_dot.as_slice());
        f[7..10].copy_from_slice(self.eta_ref.as_slice());
        f[10..13].copy_from_slice(self.e.as_slice());
        f[13..16].copy_from_slice(self.e_dot.as_slice());
        f[16..22].copy_from_slice(self.e_vec.as_slice());
        f[22..25].copy_from_slice(self.tau.as_slice());
        f[25..29].copy_from_slice(self.omega.as_slice());
        f[29..32].copy_from_slice(self.d.as_slice());
        f[32..35].copy_from_slice(self.v.as_slice());
        f[35..38].copy_from_slice(self.gamma.as_slice());
        f[38] = self.v_lyap;
        f[39] = self.v_dot;
        f
    }

    pub fn to_csv_row(&self) -> String {
        let mut row = String::with_capacity(COLUMNS * 24);
        for (i, x) in self.float_fields().iter().enumerate() {
            if i > 0 {
                row.push(',');
            }
            write_float(&mut row, *x);
        }
        row.push(',');
        row.push_str(&self.branch.to_string());
        row.push(',');
        row.push_str(if self.saturated { "true" } else { "false" });
        row
    }

    /// Parse one data row. `line_no` is 1-based and names the physical
    /// line in error messages (the header is line 1).
    pub fn from_csv_row(row: &str, line_no: usize) -> Result<Sample, Error> {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != COLUMNS {
            return Err(Error::MalformedCsv {
                line: line_no,
                msg: format!("expected {COLUMNS} columns, found {}", fields.len()),
            });
        }
        let mut f = [0.0f64; FLOAT_COLUMNS];
        for (i, field) in fields[..FLOAT_COLUMNS].iter().enumerate() {
            f[i] = field.trim().parse::<f64>().map_err(|_| Error::MalformedCsv {
                line: line_no,
                msg: format!("column {} is not a number: {field:?}", i + 1),
            })?;
        }
        let branch: Branch = fields[40].trim().parse().map_err(|e| Error::MalformedCsv {
            line: line_no,
            msg: e,
        })?;
        let saturated = match fields[41].trim() {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::MalformedCsv {
                    line: line_no,
                    msg: format!("saturated must be true or false, got {other:?}"),
                })
            }
        };
        Ok(Sample {
            t: f[0],
            eta: Vec3::from_row_slice(&f[1..4]),
            eta_dot: Vec3::from_row_slice(&f[4..7]),
            eta_ref: Vec3::from_row_slice(&f[7..10]),
            e: Vec3::from_row_slice(&f[10..13]),
            e_dot: Vec3::from_row_slice(&f[13..16]),
            e_vec: Vec6::from_row_slice(&f[16..22]),
            tau: Vec3::from_row_slice(&f[22..25]),
            omega: Vec4::from_row_slice(&f[25..29]),
            d: Vec3::from_row_slice(&f[29..32]),
            v: Vec3::from_row_slice(&f[32..35]),
            gamma: Vec3::from_row_slice(&f[35..38]),
            v_lyap: f[38],
            v_dot: f[39],
            branch,
            saturated,
        })
    }
}

/// Streaming CSV reader: header checked eagerly, one sample per `next`.
/// Works identically over a file or a pipe.
pub struct CsvSampleReader<R: BufRead> {
    lines: std::io::Lines<R>,
    line_no: usize,
    header_done: bool,
}

impl<R: BufRead> CsvSampleReader<R> {
    pub fn new(reader: R) -> Self {
        CsvSampleReader {
            lines: reader.lines(),
            line_no: 0,
            header_done: false,
        }
    }
}

impl<R: BufRead> Iterator for CsvSampleReader<R> {
    type Item = Result<Sample, Error>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => {
                    return Some(Err(Error::MalformedCsv {
                        line: self.line_no + 1,
                        msg: format!("read failed: {e}"),
                    }))
                }
            };
            self.line_no += 1;
            if !self.header_done {
                self.header_done = true;
                if line.trim_end() != CSV_HEADER {
                    return Some(Err(Error::MalformedCsv {
                        line: self.line_no,
                        msg: "unrecognized header".into(),
                    }));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            return Some(Sample::from_csv_row(&line, self.line_no));
        }
    }
}

impl TrajectoryLog {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for s in &self.samples {
            writeln!(out, "{}", s.to_csv_row())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Read a complete log, enforcing strictly increasing t.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<TrajectoryLog, Error> {
        let mut samples = Vec::new();
        let mut prev_t = f64::NEG_INFINITY;
        let mut line_no = 1usize;
        for item in CsvSampleReader::new(reader) {
            let s = item?;
            line_no += 1;
            if s.t <= prev_t {
                return Err(Error::MalformedCsv {
                    line: line_no,
                    msg: format!("t must be strictly increasing, got {} after {prev_t}", s.t),
                });
            }
            prev_t = s.t;
            samples.push(s);
        }
        Ok(TrajectoryLog { samples })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64) -> Sample {
        Sample {
            t,
            eta: Vec3::new(0.1, -0.2, 0.3),
            eta_dot: Vec3::new(1.0 / 3.0, 0.0, -0.7),
            eta_ref: Vec3::new(0.1, 0.0, 0.25),
            e: Vec3::new(0.0, 0.2, -0.05),
            e_dot: Vec3::new(-1.0 / 3.0, 0.0, 0.7),
            e_vec: Vec6::new(0.0, 0.2, -0.05, -1.0 / 3.0, 0.0, 0.7),
            tau: Vec3::new(0.01, -0.002, 3e-17),
            omega: Vec4::new(600.0, 601.5, 599.2, 600.1),
            d: Vec3::new(0.0005, 0.0, 0.0),
            v: Vec3::new(0.02, -0.01, 0.0),
            gamma: Vec3::new(0.001, 0.001, -0.0005),
            v_lyap: 0.0123,
            v_dot: -0.0456,
            branch: Branch::Outside,
            saturated: false,
        }
    }

    #[test]
    fn row_round_trips_exactly() {
        let s = sample(0.123);
        let row = s.to_csv_row();
        let back = Sample::from_csv_row(&row, 2).unwrap();
        // Bit-exact equality, including the awkward 1/3 and 3e-17 values.
        assert_eq!(s, back);
    }

    #[test]
    fn log_round_trips_and_is_stable() {
        let log = TrajectoryLog {
            samples: (0..5).map(|k| sample(k as f64 * 1e-3)).collect(),
        };
        let text = log.to_csv_string();
        let back = TrajectoryLog::read_csv(text.as_bytes()).unwrap();
        assert_eq!(log, back);
        // Re-serialization is byte-identical.
        assert_eq!(text, back.to_csv_string());
    }

    #[test]
    fn header_has_expected_shape() {
        assert_eq!(CSV_HEADER.split(',').count(), 42);
        assert!(CSV_HEADER.starts_with("t,phi,"));
        assert!(CSV_HEADER.ends_with("branch,saturated"));
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let text = format!("{CSV_HEADER}\n1,2,3\n");
        let err = TrajectoryLog::read_csv(text.as_bytes()).unwrap_err();
        match err {
            Error::MalformedCsv { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }

        let good = sample(0.0).to_csv_row();
        let bad = good.replace("outside", "inside_out");
        let text = format!("{CSV_HEADER}\n{bad}\n");
        assert!(matches!(
            TrajectoryLog::read_csv(text.as_bytes()),
            Err(Error::MalformedCsv { line: 2, .. })
        ));
    }

    #[test]
    fn non_increasing_t_rejected() {
        let a = sample(0.002).to_csv_row();
        let b = sample(0.001).to_csv_row();
        let text = format!("{CSV_HEADER}\n{a}\n{b}\n");
        assert!(matches!(
            TrajectoryLog::read_csv(text.as_bytes()),
            Err(Error::MalformedCsv { line: 3, .. })
        ));
    }

    #[test]
    fn wrong_header_rejected() {
        let text = "time,stuff\n";
        assert!(matches!(
            TrajectoryLog::read_csv(text.as_bytes()),
            Err(Error::MalformedCsv { line: 1, .. })
        ));
    }
}
