//! CSV files, JSON documents and human-readable tables.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use quadint_core::grid::VectorGridFunction;
use quadint_core::problem::Certificate;
use quadint_core::solver::IterationTrace;
use serde::Serialize;

/// Columns `x, u1, ..., uN`.
pub fn solution_csv(u: &VectorGridFunction) -> String {
    let mut out = String::from("x");
    for m in 1..=u.len() {
        write!(out, ",u{m}").unwrap();
    }
    out.push('\n');
    let mut row = vec![0.0; u.len()];
    for (i, x) in u.grid().nodes().enumerate() {
        u.node_values(i, &mut row);
        write!(out, "{x:e}").unwrap();
        for v in &row {
            write!(out, ",{v:e}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Columns `k, delta, ratio, norm`; `ratio` is empty where undefined.
pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::from("k,delta,ratio,norm\n");
    for s in &trace.steps {
        let ratio = s.ratio.map(|r| format!("{r:e}")).unwrap_or_default();
        writeln!(out, "{},{:e},{ratio},{:e}", s.k, s.delta, s.norm).unwrap();
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

pub fn write(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)
}

/// Two aligned columns.
#[derive(Default)]
pub struct Table {
    rows: Vec<(String, String)>,
}

impl Table {
    pub fn row(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.rows.push((key.into(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.rows {
            writeln!(out, "{k:<width$}  {v}").unwrap();
        }
        out
    }
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(", ")
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

pub fn certificate_table(c: &Certificate) -> Table {
    let mut t = Table::default();
    t.row("T_m bound (sup|V| + sup|V'|)", list(&c.t_norms))
        .row("T_m probe lower bound", list(&c.t_lower))
        .row("K_m W11 norm", list(&c.k_w11))
        .row("Q", format!("{:.6e}", c.q))
        .row("u0 H1 norm", format!("{:.6e}", c.u0_h1))
        .row("ball radius", format!("{:.6e}", c.ball_radius))
        .row(
            "g C1 norm on ball",
            format!("{:.6e}{}", c.g_c1, if c.g_c1_sampled { " (sampled)" } else { "" }),
        )
        .row("M", format!("{:.6e}", c.m))
        .row("c_a", format!("{:.6e}", c.c_a))
        .row("sigma", format!("{:.6e}", c.sigma))
        .row("rub: c_a M (|u0|+1)^2 Q", format!("{:.6e} <= {:.6e}", c.rub_lhs, c.rub_rhs))
        .row("Assumption 1.1", verdict(c.assumption1_ok))
        .row("Assumption 1.2", verdict(c.assumption2_ok))
        .row("condition (rub)", verdict(c.rub_ok))
        .row("certificate", if c.passed() { "PASSED" } else { "FAILED" });
    for note in &c.notes {
        t.row("note", note);
    }
    t
}
