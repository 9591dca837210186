use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::io::{ensure_dir, read_field, read_json, write_field, write_json};
use crate::spectral::RealField;

/// Time-ordered snapshots of a scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<RealField>,
}

#[derive(Serialize, Deserialize)]
struct Index {
    times: Vec<f64>,
    files: Vec<String>,
    config: serde_json::Value,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, snapshots: Vec<RealField>) -> Result<Trajectory> {
        if times.is_empty() || times.len() != snapshots.len() {
            return Err(Error::config(format!(
                "trajectory needs matching nonempty times ({}) and snapshots ({})",
                times.len(),
                snapshots.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("trajectory times must increase strictly"));
        }
        Ok(Trajectory { times, snapshots })
    }

    /// A constant-in-time trajectory.
    pub fn stationary(f: RealField, t0: f64, t1: f64) -> Trajectory {
        if t1 > t0 {
            Trajectory {
                times: vec![t0, t1],
                snapshots: vec![f.clone(), f],
            }
        } else {
            Trajectory {
                times: vec![t0],
                snapshots: vec![f],
            }
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> &RealField {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &RealField {
        self.snapshots.last().expect("nonempty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    /// Linear interpolation in time; exact at stored times.
    pub fn at(&self, t: f64) -> Result<RealField> {
        let t0 = self.times[0];
        let t1 = self.final_time();
        let slack = 1e-12 * t1.abs().max(1.0);
        if t < t0 - slack || t > t1 + slack {
            return Err(Error::config(format!(
                "time {t} outside trajectory range [{t0}, {t1}]"
            )));
        }
        if self.times.len() == 1 {
            return Ok(self.snapshots[0].clone());
        }
        let j = match self.times.binary_search_by(|x| x.partial_cmp(&t).expect("finite")) {
            Ok(j) => return Ok(self.snapshots[j].clone()),
            Err(j) => j.clamp(1, self.times.len() - 1),
        };
        let (ta, tb) = (self.times[j - 1], self.times[j]);
        let w = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
        let mut out = &self.snapshots[j - 1] * (1.0 - w);
        out.axpy(w, &self.snapshots[j]);
        Ok(out)
    }

    /// Directory of FLD1 snapshots plus index.json.
    pub fn save(&self, dir: impl AsRef<Path>, name: &str, config: serde_json::Value) -> Result<()> {
        let dir = dir.as_ref();
        ensure_dir(dir)?;
        let mut files = Vec::with_capacity(self.len());
        for (i, f) in self.snapshots.iter().enumerate() {
            let file = format!("{name}_{i:05}.fld");
            write_field(dir.join(&file), f, name)?;
            files.push(file);
        }
        write_json(
            dir.join("index.json"),
            &Index {
                times: self.times.clone(),
                files,
                config,
            },
        )
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<(Trajectory, serde_json::Value)> {
        let dir = dir.as_ref();
        let index: Index = read_json(dir.join("index.json"))?;
        if index.times.len() != index.files.len() {
            return Err(Error::Format("index times and files differ in length".into()));
        }
        let mut snapshots: Vec<RealField> = Vec::with_capacity(index.files.len());
        for file in &index.files {
            let grid = snapshots.first().map(|f| f.grid().clone());
            snapshots.push(read_field(dir.join(file), grid.as_ref())?.0);
        }
        Ok((Trajectory::new(index.times, snapshots)?, index.config))
    }
}
