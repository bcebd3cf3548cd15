//! CSV tables for the `spectrum` and `tq` commands.

use csv::WriterBuilder;
use tau2_core::spectrum::{eigen_functional_checks, eigencurves};
use tau2_core::tensorkit::rel_diff_scalar;
use tau2_core::tq_solver::{degenerate_constraints, q_degree, TqContext};
use tau2_core::transfer::transfer_matrix;
use tau2_core::{ModelConfig, C64};

use crate::error::CliError;
use crate::suites::{corrupted_context, solve_all, SPECTRUM_ANCHOR};

/// Point at which the sum of the curves is compared with `tr t(u)`.
pub const TRACE_PROBE: C64 = C64::new(0.29, 0.53);

/// A residual above this marks a `tq` row as failed.
pub const TQ_ROW_TOL: f64 = 1e-6;

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    String::from_utf8(w.into_inner().map_err(io)?).map_err(io)
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Clone, Debug)]
pub struct SpectrumTable {
    pub csv: String,
    pub rows: usize,
    /// `|Σ Λ_k(u) − tr t(u)| / |tr t(u)|` at [`TRACE_PROBE`].
    pub trace_residual: f64,
}

/// Spectrum header: `index`, then `c{k}_re, c{k}_im` for the coefficients of
/// `e^{2ku}`, `k = −(N+2)..=N+2`, then `fit_residual` and the functional
/// checks of each curve.
pub fn spectrum_header(n_sites: usize) -> Vec<String> {
    let d = n_sites as i32 + 2;
    let mut h = vec!["index".to_string()];
    for k in -d..=d {
        h.push(format!("c{k}_re"));
        h.push(format!("c{k}_im"));
    }
    h.extend(
        [
            "fit_residual",
            "periodicity",
            "crossing",
            "value_at_zero",
            "value_at_i_pi_2",
            "asymptotic_plus",
            "asymptotic_minus",
            "degree_excess",
        ]
        .map(String::from),
    );
    h
}

pub fn spectrum_table(cfg: &ModelConfig) -> Result<SpectrumTable, CliError> {
    let spec = eigencurves(cfg, SPECTRUM_ANCHOR)?;
    let d = cfg.n_sites() as i32 + 2;
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(spectrum_header(cfg.n_sites())).map_err(io)?;
    for c in &spec.curves {
        let ch = eigen_functional_checks(c, cfg);
        let mut row = vec![c.index.to_string()];
        for k in -d..=d {
            let z = c.curve.coeff(k);
            row.push(num(z.re));
            row.push(num(z.im));
        }
        for x in [
            c.fit_residual,
            ch.periodicity,
            ch.crossing,
            ch.value_at_zero,
            ch.value_at_i_pi_2,
            ch.asymptotic_plus,
            ch.asymptotic_minus,
            ch.degree_excess,
        ] {
            row.push(num(x));
        }
        w.write_record(&row).map_err(io)?;
    }
    let sum: C64 = spec.curves.iter().map(|c| c.eval(TRACE_PROBE)).sum();
    let trace = transfer_matrix(cfg, TRACE_PROBE)?.trace();
    Ok(SpectrumTable { csv: finish(w)?, rows: spec.curves.len(), trace_residual: rel_diff_scalar(sum, trace) })
}

#[derive(Clone, Debug)]
pub struct TqTable {
    pub csv: String,
    pub rows: usize,
    /// Rows whose solve failed or whose residuals exceed [`TQ_ROW_TOL`].
    pub failed: Vec<usize>,
    pub median_tq_residual: f64,
}

/// Bethe header: `index`, `root{j}_re, root{j}_im` for `j = 1..=M′`,
/// `tq_residual`, `max_bae_residual`, `branch_flags` (one `0`/`1` per
/// root), `error`.
pub fn tq_header(m_prime: usize) -> Vec<String> {
    let mut h = vec!["index".to_string()];
    for j in 1..=m_prime {
        h.push(format!("root{j}_re"));
        h.push(format!("root{j}_im"));
    }
    h.extend(["tq_residual", "max_bae_residual", "branch_flags", "error"].map(String::from));
    h
}

/// The Bethe table followed by a blank line and the degenerate-constraint
/// block: `constraint,residual` rows for the bracket, each `F_k`
/// (`k = N+1..0`), the two top coefficients and the `M` residues.
pub fn tq_table(cfg: &ModelConfig, corrupt_c: bool) -> Result<TqTable, CliError> {
    let spec = eigencurves(cfg, SPECTRUM_ANCHOR)?;
    let ctx = if corrupt_c { corrupted_context(cfg)? } else { TqContext::new(cfg)? };
    let m_prime = q_degree(cfg);
    let width = 2 * m_prime + 5;
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(tq_header(m_prime)).map_err(io)?;
    let mut failed = Vec::new();
    let mut tq_res = Vec::new();
    for (c, sol) in spec.curves.iter().zip(solve_all(&spec, cfg, &ctx)) {
        let mut row = vec![c.index.to_string()];
        match sol {
            Ok(s) => {
                for r in &s.roots {
                    row.push(num(r.lambda.re));
                    row.push(num(r.lambda.im));
                }
                row.resize(2 * m_prime + 1, String::new());
                row.push(num(s.tq_residual));
                row.push(num(s.max_bae_residual()));
                row.push(s.roots.iter().map(|r| if r.branch_flipped { '1' } else { '0' }).collect());
                let ok = s.roots.len() == m_prime && s.tq_residual <= TQ_ROW_TOL && s.max_bae_residual() <= TQ_ROW_TOL;
                row.push(if ok { String::new() } else { "residual above tolerance".into() });
                if !ok {
                    failed.push(c.index);
                }
                tq_res.push(s.tq_residual);
            }
            Err(e) => {
                row.resize(width - 1, String::new());
                row.push(e.to_string());
                failed.push(c.index);
                tq_res.push(f64::INFINITY);
            }
        }
        w.write_record(&row).map_err(io)?;
    }
    let table = finish(w)?;
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["constraint", "residual"]).map_err(io)?;
    match degenerate_constraints(cfg) {
        Ok(rep) => {
            let n = cfg.n_sites();
            w.write_record(["bracket".to_string(), num(rep.residuals[0])]).map_err(io)?;
            for (i, r) in rep.residuals[1..].iter().enumerate() {
                w.write_record([format!("F_{}", n + 1 - i), num(*r)]).map_err(io)?;
            }
            w.write_record(["F_top_plus".to_string(), num(rep.top_coefficients[0])]).map_err(io)?;
            w.write_record(["F_top_minus".to_string(), num(rep.top_coefficients[1])]).map_err(io)?;
            for (y, r) in rep.m.distance.iter().zip(&rep.m.residue) {
                let res = r.map_or("none".to_string(), |r| format!("M = {r} mod {}", cfg.p()));
                w.write_record([format!("M_condition ({res})"), num(*y)]).map_err(io)?;
            }
        }
        Err(e) => w.write_record(["error".to_string(), e.to_string()]).map_err(io)?,
    }
    Ok(TqTable {
        csv: format!("{table}\n{}", finish(w)?),
        rows: spec.curves.len(),
        failed,
        median_tq_residual: crate::suites::median(tq_res),
    })
}
