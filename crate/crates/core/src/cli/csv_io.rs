use std::io::{Read, Write};

use super::CliError;
use crate::integrator::{Trajectory, TrajectoryMeta};

const STATE_HEADER: [&str; 6] = ["t", "S_h", "I_h", "R_h", "S_m", "I_m"];

fn csv_err(e: csv::Error) -> CliError {
    if e.is_io_error() {
        CliError::Io(e.to_string())
    } else {
        CliError::Config(format!("malformed CSV: {e}"))
    }
}

/// Writes `t,S_h,I_h,R_h,S_m,I_m` (plus `,u` when the trajectory carries a
/// control) with shortest round-trip decimal formatting and LF endings.
pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header: Vec<&str> = STATE_HEADER.to_vec();
    if traj.controls.is_some() {
        header.push("u");
    }
    w.write_record(&header).map_err(csv_err)?;
    for (k, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row: Vec<String> = Vec::with_capacity(7);
        row.push(t.to_string());
        row.extend(s.iter().map(f64::to_string));
        if let Some(u) = &traj.controls {
            row.push(u[k].to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Reads a CSV produced by [`write_trajectory_csv`].
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Trajectory, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    let with_control = match header.len() {
        6 => false,
        7 if &header[6] == "u" => true,
        _ => {
            return Err(CliError::Config(format!(
                "unexpected CSV header {header:?}"
            )))
        }
    };
    if header.iter().take(6).ne(STATE_HEADER) {
        return Err(CliError::Config(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut controls = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let values = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| CliError::Config(format!("bad number `{f}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        times.push(values[0]);
        states.push([values[1], values[2], values[3], values[4], values[5]]);
        if with_control {
            controls.push(values[6]);
        }
    }
    Ok(Trajectory {
        times,
        states,
        controls: with_control.then_some(controls),
        meta: TrajectoryMeta::default(),
    })
}
