use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time series of the monitored quantities of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    /// `E(t) = 1/2 int |du|^2`
    pub dirichlet: Vec<f64>,
    /// `int |tau(u)|^2`
    pub tension_sq: Vec<f64>,
    /// `max ||u| - 1|`
    pub unit_drift: Vec<f64>,
    /// Sobolev order -> norm per sample.
    pub sobolev: BTreeMap<usize, Vec<f64>>,
}

impl EnergyTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Times strictly increasing and every entry finite.
    pub fn validate(&self) -> Result<()> {
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("trace times not increasing".into()));
        }
        let n = self.times.len();
        let columns = [&self.times, &self.dirichlet, &self.tension_sq, &self.unit_drift]
            .into_iter()
            .chain(self.sobolev.values());
        for col in columns {
            if col.len() != n || col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("trace column malformed".into()));
            }
        }
        Ok(())
    }

    /// Columns `t,E,tension_sq,unit_drift,H<k>...`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut head = vec!["t".to_string(), "E".into(), "tension_sq".into(), "unit_drift".into()];
        head.extend(self.sobolev.keys().map(|k| format!("H{k}")));
        writeln!(w, "{}", head.join(","))?;
        for i in 0..self.times.len() {
            let mut row = vec![
                self.times[i].to_string(),
                self.dirichlet[i].to_string(),
                self.tension_sq[i].to_string(),
                self.unit_drift[i].to_string(),
            ];
            row.extend(self.sobolev.values().map(|c| c[i].to_string()));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_columns_and_validation() {
        let mut t = EnergyTrace::default();
        for i in 0..3 {
            t.times.push(i as f64 * 0.5);
            t.dirichlet.push(1.0);
            t.tension_sq.push(2.0);
            t.unit_drift.push(0.0);
            t.sobolev.entry(2).or_default().push(3.0);
        }
        t.validate().unwrap();
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,E,tension_sq,unit_drift,H2");
        assert_eq!(text.lines().nth(2).unwrap(), "0.5,1,2,0,3");

        t.times[2] = 0.5;
        assert!(t.validate().is_err());
    }
}
