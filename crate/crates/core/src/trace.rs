//! Per-iteration trajectory records and their CSV serialization.

use serde::{Deserialize, Serialize};

/// One recorded step. `lyapunov` and `dist` are absent when the iterate is
/// outside the principal-log domain of the reference minimizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: u64,
    pub u: f64,
    pub subopt: f64,
    pub xi_norm: f64,
    pub energy: f64,
    pub lyapunov: Option<f64>,
    pub dist: Option<f64>,
}

/// A (possibly strided) trajectory record. Row 0 is always the initial state
/// and the final state is always present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunTrace {
    pub stride: u64,
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    /// CSV with one line per stored row. The ratio column is the Lyapunov
    /// ratio between consecutive stored rows (per-step when stride = 1).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,u,xi_norm,energy,lyapunov,ratio,dist\n");
        let mut prev_lyap: Option<f64> = None;
        for row in &self.rows {
            let lyap = row
                .lyapunov
                .map(|v| format!("{v}"))
                .unwrap_or_default();
            let ratio = match (prev_lyap, row.lyapunov) {
                (Some(p), Some(l)) if p > 0.0 => format!("{}", l / p),
                _ => String::new(),
            };
            let dist = row.dist.map(|v| format!("{v}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.k, row.u, row.xi_norm, row.energy, lyap, ratio, dist
            ));
            prev_lyap = row.lyapunov;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrips_floats_exactly() {
        let trace = RunTrace {
            stride: 1,
            rows: vec![
                TraceRow {
                    k: 0,
                    u: 1.0 / 3.0,
                    subopt: 0.1,
                    xi_norm: 2.0f64.sqrt(),
                    energy: 0.333333333333333314829616256247,
                    lyapunov: Some(0.7),
                    dist: None,
                },
                TraceRow {
                    k: 1,
                    u: 0.25,
                    subopt: 0.05,
                    xi_norm: 0.0,
                    energy: 0.25,
                    lyapunov: Some(0.35),
                    dist: Some(1e-300),
                },
            ],
        };
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "k,u,xi_norm,energy,lyapunov,ratio,dist");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        // Display output of f64 round-trips bit-exactly through parse.
        assert_eq!(first[1].parse::<f64>().unwrap().to_bits(), (1.0f64 / 3.0).to_bits());
        let second: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(second[5].parse::<f64>().unwrap(), 0.5);
        assert_eq!(second[6].parse::<f64>().unwrap(), 1e-300);
    }
}
