//! Artifact writers: history/trajectory/sweep CSV and certification /
//! verdict JSON.
//!
//! Every artifact embeds the SHA-256 of the config that produced it (a
//! `# config_sha256=...` comment line in CSV, a field in JSON), and float
//! formatting is shortest-roundtrip, so identical config + seed yields
//! byte-identical files.

use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::diagnostics::LyapunovReport;
use crate::dynamics::{EnergySeries, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{dist, norm};
use crate::solver::{RunHistory, SolverParams};

/// Hex SHA-256 of raw config bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn io_err(e: std::io::Error) -> Error {
    Error::usage(format!("cannot write artifact: {e}"))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// History CSV: k, theta, theta_gap, step_norm, momentum, perturb_norm,
/// z_dist. The gap and z_dist columns are blank without a reference.
pub fn write_history_csv<W: Write>(
    mut w: W,
    history: &RunHistory,
    reference: Option<(&[f64], f64)>,
    hash: Option<&str>,
) -> Result<()> {
    if let Some(h) = hash {
        writeln!(w, "# config_sha256={h}").map_err(io_err)?;
    }
    writeln!(w, "k,theta,theta_gap,step_norm,momentum,perturb_norm,z_dist").map_err(io_err)?;
    for r in &history.records {
        let (gap, z_dist) = match reference {
            Some((xs, ts)) => (
                (r.theta - ts).to_string(),
                dist(&r.z, xs).to_string(),
            ),
            None => (String::new(), String::new()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.k, r.theta, gap, r.step_norm, r.momentum, r.perturb_norm, z_dist
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// Trajectory CSV: t, x (flattened), v_norm, W, E_lyap, t2_gap. The E_lyap
/// column is blank when no minimizer is known.
pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    traj: &Trajectory,
    series: &EnergySeries,
    hash: Option<&str>,
) -> Result<()> {
    if let Some(h) = hash {
        writeln!(w, "# config_sha256={h}").map_err(io_err)?;
    }
    let dim = traj.positions.first().map_or(0, Vec::len);
    let xcols: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    writeln!(w, "t,{},v_norm,W,E_lyap,t2_gap", xcols.join(",")).map_err(io_err)?;
    for i in 0..traj.len() {
        let xs: Vec<String> = traj.positions[i].iter().map(|v| v.to_string()).collect();
        let e = fmt_opt(series.lyapunov.as_ref().map(|l| l[i]));
        writeln!(
            w,
            "{},{},{},{},{},{}",
            traj.times[i],
            xs.join(","),
            norm(&traj.velocities[i]),
            series.total_energy[i],
            e,
            series.scaled_gap[i]
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// Machine-readable certification verdict for one run.
#[derive(Clone, Debug, Serialize)]
pub struct CertificationDoc {
    pub problem: String,
    pub params: SolverParams,
    pub config_sha256: Option<String>,
    pub constants: ConstantsDoc,
    pub violations: Vec<crate::diagnostics::LedgerEntry>,
    pub slope: Option<f64>,
    pub guarantee_regime: bool,
    pub verdict: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsDoc {
    /// None encodes the infinite sentinel.
    pub c: Option<f64>,
    pub m: Option<f64>,
    pub note: Option<String>,
}

impl CertificationDoc {
    pub fn from_report(
        history: &RunHistory,
        report: &LyapunovReport,
        slope: Option<f64>,
        hash: Option<String>,
    ) -> Self {
        let mut verdict = if report.violations.is_empty() {
            "certified".to_string()
        } else {
            "violations".to_string()
        };
        if !report.guarantee_regime {
            verdict.push_str(" (outside guarantee regime)");
        }
        CertificationDoc {
            problem: history.problem.clone(),
            params: history.params.clone(),
            config_sha256: hash,
            constants: ConstantsDoc {
                c: report.constant_c,
                m: report.constant_m,
                note: report.constants_note.clone(),
            },
            violations: report.violations.clone(),
            slope,
            guarantee_regime: report.guarantee_regime,
            verdict,
        }
    }
}

pub fn write_json<W: Write, T: Serialize>(w: W, doc: &T) -> Result<()> {
    serde_json::to_writer_pretty(w, doc)
        .map_err(|e| Error::usage(format!("cannot serialize artifact: {e}")))
}

/// One sweep-summary row.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub cell: usize,
    pub alpha: f64,
    pub p: f64,
    pub s: f64,
    pub final_gap: Option<f64>,
    pub slope: Option<f64>,
    /// None encodes the infinite sentinel, printed as `inf`.
    pub constant_c: Option<f64>,
    pub violations: usize,
    pub failed: bool,
}

/// Sweep CSV: one row per cell, ordered by cell index.
pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow], hash: Option<&str>) -> Result<()> {
    if let Some(h) = hash {
        writeln!(w, "# config_sha256={h}").map_err(io_err)?;
    }
    writeln!(w, "cell,alpha,p,s,final_gap,slope,C,violations,failed").map_err(io_err)?;
    for r in rows {
        let c = r
            .constant_c
            .map(|v| v.to_string())
            .unwrap_or_else(|| "inf".to_string());
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.cell,
            r.alpha,
            r.p,
            r.s,
            fmt_opt(r.final_gap),
            fmt_opt(r.slope),
            c,
            r.violations,
            r.failed
        )
        .map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::PerturbationSchedule;
    use crate::solver::{run_basic, SolverParams};

    #[test]
    fn config_hash_is_stable() {
        let h = config_hash(b"{}");
        assert_eq!(h.len(), 64);
        assert_eq!(h, config_hash(b"{}"));
        assert_ne!(h, config_hash(b"{ }"));
    }

    #[test]
    fn history_csv_shape() {
        let inst = crate::problems::by_name("quadratic", Some(2), 0, None).unwrap();
        let sched = PerturbationSchedule::zero(2);
        let params = SolverParams::new(3.0, 1.0 / inst.objective.lipschitz(), 5);
        let history = run_basic(&inst.objective, &sched, &params, &inst.default_x0).unwrap();

        let mut buf = Vec::new();
        write_history_csv(&mut buf, &history, inst.reference(), Some("abc")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# config_sha256=abc");
        assert_eq!(
            lines.next().unwrap(),
            "k,theta,theta_gap,step_norm,momentum,perturb_norm,z_dist"
        );
        assert_eq!(lines.count(), 5);

        // Without a reference the gap and z_dist columns are blank.
        let mut buf = Vec::new();
        write_history_csv(&mut buf, &history, None, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first_row = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = first_row.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert!(fields[2].is_empty() && fields[6].is_empty(), "{first_row}");
    }

    #[test]
    fn determinism_byte_level() {
        let inst = crate::problems::by_name("quadratic", Some(2), 0, None).unwrap();
        let sched = PerturbationSchedule::zero(2);
        let params = SolverParams::new(3.0, 1.0 / inst.objective.lipschitz(), 50);
        let mut bufs = Vec::new();
        for _ in 0..2 {
            let history = run_basic(&inst.objective, &sched, &params, &inst.default_x0).unwrap();
            let mut buf = Vec::new();
            write_history_csv(&mut buf, &history, inst.reference(), Some("h")).unwrap();
            bufs.push(buf);
        }
        assert_eq!(bufs[0], bufs[1]);
    }
}
