//! CSV tables. Every real number is written with [`fixed`], so the text in a
//! cell is exactly the reported value rounded to nine decimals.

use std::io::Write;

use rach_core::simulator::{SimStats, SweepTable};
use rach_core::ClassMetrics;

use crate::error::CliError;

pub const DECIMALS: usize = 9;

pub const CLASS_HEADER: [&str; 11] = [
    "class_id",
    "L_i",
    "gamma",
    "p_analytic",
    "p_empirical",
    "density_hz",
    "stderr",
    "delay_s",
    "p_stderr",
    "density_analytic_hz",
    "delay_analytic_s",
];

pub const SWEEP_HEADER: [&str; 12] = [
    "L_swept",
    "L_other",
    "density_swept_hz",
    "stderr_swept",
    "density_other_hz",
    "stderr_other",
    "density_total_hz",
    "stderr_total",
    "analytic_swept_hz",
    "analytic_other_hz",
    "analytic_total_hz",
    "collision_events_hz",
];

pub fn fixed(v: f64) -> String {
    format!("{v:.DECIMALS$}")
}

/// One simulated layout, paired with its closed-form metrics in the same class order.
pub struct Evaluated<'a> {
    pub raos: &'a [u64],
    pub total_raos: u64,
    pub analytic: &'a [ClassMetrics],
    pub stats: &'a SimStats,
}

/// Rows of the class table: one per class, then a `cell` row.
pub fn class_rows(e: &Evaluated<'_>) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(e.analytic.len() + 1);
    for ((m, s), l) in e.analytic.iter().zip(&e.stats.per_class).zip(e.raos) {
        let delay = s.delay.as_ref().map(|d| fixed(d.inclusive.mean)).unwrap_or_default();
        rows.push(vec![
            m.class_id.to_string(),
            l.to_string(),
            fixed(m.ra_density),
            fixed(m.collision_rate),
            fixed(s.collision_rate.mean),
            fixed(s.collision_density.mean),
            fixed(s.collision_density.std_error),
            delay,
            fixed(s.collision_rate.std_error),
            fixed(m.collision_density),
            fixed(m.mean_delay),
        ]);
    }
    let gamma: f64 = e.analytic.iter().map(|m| m.ra_density).sum();
    let density: f64 = e.analytic.iter().map(|m| m.collision_density).sum();
    let cell = &e.stats.cell;
    rows.push(vec![
        "cell".into(),
        e.total_raos.to_string(),
        fixed(gamma),
        fixed(density / gamma),
        fixed(cell.collision_rate.mean),
        fixed(cell.collision_density.mean),
        fixed(cell.collision_density.std_error),
        String::new(),
        fixed(cell.collision_rate.std_error),
        fixed(density),
        String::new(),
    ]);
    rows
}

pub fn sweep_rows(table: &SweepTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| {
            let (a, b) = (&r.stats.per_class[0], &r.stats.per_class[1]);
            let cell = &r.stats.cell;
            vec![
                r.swept_raos.to_string(),
                r.other_raos.to_string(),
                fixed(a.collision_density.mean),
                fixed(a.collision_density.std_error),
                fixed(b.collision_density.mean),
                fixed(b.collision_density.std_error),
                fixed(cell.collision_density.mean),
                fixed(cell.collision_density.std_error),
                fixed(r.analytic_density[0]),
                fixed(r.analytic_density[1]),
                fixed(r.analytic_total),
                fixed(cell.collision_event_density.mean),
            ]
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &std::path::Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    write_csv(file, header, rows)
}

/// Left-aligned text table with two spaces between columns.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        cells
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(&mut header.iter().copied());
    for row in rows {
        out.push('\n');
        out.push_str(&line(&mut row.iter().map(String::as_str)));
    }
    out
}
