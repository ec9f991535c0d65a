//! Refinement tables with observed orders.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub h: f64,
    pub l1: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<Row>,
    /// `pairwise[k]` compares rows k and k+1.
    pub pairwise: Vec<(Option<f64>, Option<f64>)>,
    pub ls_fit: (Option<f64>, Option<f64>),
}

impl ConvergenceTable {
    pub fn new(rows: Vec<Row>) -> Self {
        ConvergenceTable { rows, ..Default::default() }
    }

    pub fn push(&mut self, h: f64, l1: f64, linf: f64) {
        self.rows.push(Row { h, l1, linf });
    }

    /// CSV with columns `h,l1,l1_order,linf,linf_order`; orders blank on the first row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,l1,l1_order,linf,linf_order\n");
        for (k, r) in self.rows.iter().enumerate() {
            let (o1, oi) = if k == 0 { (None, None) } else { self.pairwise.get(k - 1).copied().unwrap_or((None, None)) };
            let _ = writeln!(s, "{:.12e},{:.6e},{},{:.6e},{}", r.h, r.l1, fmt_opt(o1), r.linf, fmt_opt(oi));
        }
        s
    }

    /// Markdown table in the usual h / error / order layout, with the fitted orders last.
    pub fn to_markdown(&self, title: &str) -> String {
        let mut s = String::new();
        if !title.is_empty() {
            let _ = writeln!(s, "### {title}\n");
        }
        s.push_str("| h | L1 error | order | Linf error | order |\n|---|---|---|---|---|\n");
        for (k, r) in self.rows.iter().enumerate() {
            let (o1, oi) = if k == 0 { (None, None) } else { self.pairwise.get(k - 1).copied().unwrap_or((None, None)) };
            let _ = writeln!(
                s,
                "| {} | {:.2e} | {} | {:.2e} | {} |",
                h_label(r.h),
                r.l1,
                fmt_md(o1),
                r.linf,
                fmt_md(oi)
            );
        }
        let _ = writeln!(s, "| LS fit | | {} | | {} |", fmt_md(self.ls_fit.0), fmt_md(self.ls_fit.1));
        s
    }
}

fn fmt_opt(o: Option<f64>) -> String {
    o.map(|v| format!("{v:.4}")).unwrap_or_default()
}

fn fmt_md(o: Option<f64>) -> String {
    o.map(|v| format!("{v:.2}")).unwrap_or_else(|| "--".into())
}

fn h_label(h: f64) -> String {
    let inv = 1.0 / h;
    if (inv - inv.round()).abs() < 1e-6 * inv {
        format!("1/{}", inv.round() as u64)
    } else {
        format!("{h:.4e}")
    }
}

fn pair_order(a: f64, b: f64, ha: f64, hb: f64) -> Option<f64> {
    (a > 0.0 && b > 0.0).then(|| (a / b).ln() / (ha / hb).ln())
}

fn ls_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Pairwise orders log(e_k/e_{k+1})/log(h_k/h_{k+1}) and the least-squares slope of
/// log e against log h over all rows. Non-positive errors leave the order undefined.
pub fn fit_orders(table: &ConvergenceTable) -> Result<ConvergenceTable> {
    let rows = &table.rows;
    if rows.len() < 2 {
        return Err(Error::param("at least two refinement levels are needed"));
    }
    if rows.iter().any(|r| !(r.h > 0.0)) {
        return Err(Error::param("mesh widths must be positive"));
    }
    let pairwise = rows
        .windows(2)
        .map(|w| (pair_order(w[0].l1, w[1].l1, w[0].h, w[1].h), pair_order(w[0].linf, w[1].linf, w[0].h, w[1].h)))
        .collect();
    let fit = |f: fn(&Row) -> f64| {
        let pts: Vec<_> = rows.iter().filter(|r| f(r) > 0.0).map(|r| (r.h.ln(), f(r).ln())).collect();
        ls_slope(&pts)
    };
    Ok(ConvergenceTable { rows: rows.clone(), pairwise, ls_fit: (fit(|r| r.l1), fit(|r| r.linf)) })
}
