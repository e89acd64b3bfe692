//! Serialization of run results and sweep tables.
//!
//! CSV floats are written with 17 significant digits so a reader recovers
//! the exact bit pattern; JSON goes through serde_json, whose float
//! rendering is already round-trip exact.

use std::io::Write;

use serde_json::{json, Value};

use crate::error::Result;
use crate::estimators::RunResult;
use crate::metrics::MetricsReport;

/// 17 significant digits: enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Per-game matrix as CSV: header `game,player_0,..,player_{n-1}`, one row
/// per game.
pub fn write_run_csv<W: Write>(run: &RunResult, writer: &mut W) -> Result<()> {
    write!(writer, "game")?;
    for i in 0..run.n_players {
        write!(writer, ",player_{i}")?;
    }
    writeln!(writer)?;
    for (g, means) in run.per_game_means.iter().enumerate() {
        write!(writer, "{g}")?;
        for v in means {
            write!(writer, ",{}", format_float(*v))?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// JSON summary of one run: configuration echo, seed provenance, draw
/// accounting, and the two aggregate vectors. The allocation appears only
/// for stratified runs.
pub fn run_summary_json(run: &RunResult, tool_version: &str) -> Value {
    let mut summary = json!({
        "tool_version": tool_version,
        "config": run.method_config,
        "master_seed": run.master_seed,
        "replication": run.replication,
        "n_players": run.n_players,
        "draw_count": run.draw_count,
        "overall_mean": run.overall_mean,
        "across_game_variance": run.across_game_variance,
    });
    if let Some(allocation) = &run.allocation {
        summary["allocation"] = json!(allocation);
    }
    summary
}

/// One cell of a parameter sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub n_games: usize,
    pub n_iter: usize,
    pub outcome: SweepOutcome,
}

#[derive(Debug, Clone)]
pub enum SweepOutcome {
    Metrics(MetricsReport),
    /// The cell failed; the sweep continues and the failure is recorded.
    Failed(String),
}

impl SweepCell {
    fn metric(&self, which: SweepMetric) -> Option<f64> {
        match &self.outcome {
            SweepOutcome::Metrics(m) => Some(match which {
                SweepMetric::VarOfMean => m.avg_var_of_mean,
                SweepMetric::VarOfVar => m.avg_var_of_var,
            }),
            SweepOutcome::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMetric {
    VarOfMean,
    VarOfVar,
}

impl SweepMetric {
    pub fn label(self) -> &'static str {
        match self {
            SweepMetric::VarOfMean => "avg_var_of_mean",
            SweepMetric::VarOfVar => "avg_var_of_var",
        }
    }
}

fn axes(cells: &[SweepCell]) -> (Vec<usize>, Vec<usize>) {
    let mut games: Vec<usize> = cells.iter().map(|c| c.n_games).collect();
    games.sort_unstable();
    games.dedup();
    let mut iters: Vec<usize> = cells.iter().map(|c| c.n_iter).collect();
    iters.sort_unstable();
    iters.dedup();
    (games, iters)
}

fn cell_at(cells: &[SweepCell], n_games: usize, n_iter: usize) -> Option<&SweepCell> {
    cells
        .iter()
        .find(|c| c.n_games == n_games && c.n_iter == n_iter)
}

/// Grid CSV in the table layout of the experiment write-ups: one row per
/// `n_games`, one column per `n_iter`. Failed or missing cells render as
/// `failed` / empty.
pub fn write_sweep_grid_csv<W: Write>(
    cells: &[SweepCell],
    metric: SweepMetric,
    writer: &mut W,
) -> Result<()> {
    let (games, iters) = axes(cells);
    write!(writer, "n_games")?;
    for it in &iters {
        write!(writer, ",n_iter_{it}")?;
    }
    writeln!(writer)?;
    for g in &games {
        write!(writer, "{g}")?;
        for it in &iters {
            match cell_at(cells, *g, *it) {
                Some(cell) => match cell.metric(metric) {
                    Some(v) => write!(writer, ",{}", format_float(v))?,
                    None => write!(writer, ",failed")?,
                },
                None => write!(writer, ",")?,
            }
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// Long-format CSV for plotting: one row per cell with both metrics and a
/// status column.
pub fn write_sweep_long_csv<W: Write>(cells: &[SweepCell], writer: &mut W) -> Result<()> {
    writeln!(
        writer,
        "n_games,n_iter,replications,status,avg_var_of_mean,avg_var_of_var"
    )?;
    for cell in cells {
        match &cell.outcome {
            SweepOutcome::Metrics(m) => writeln!(
                writer,
                "{},{},{},ok,{},{}",
                cell.n_games,
                cell.n_iter,
                m.replications,
                format_float(m.avg_var_of_mean),
                format_float(m.avg_var_of_var)
            )?,
            SweepOutcome::Failed(reason) => writeln!(
                writer,
                "{},{},,failed:{},,",
                cell.n_games,
                cell.n_iter,
                reason.replace(',', ";")
            )?,
        }
    }
    Ok(())
}

/// Human-readable rendering of a sweep: one aligned block per metric.
pub fn render_sweep_table(cells: &[SweepCell]) -> String {
    let (games, iters) = axes(cells);
    let mut out = String::new();
    for metric in [SweepMetric::VarOfMean, SweepMetric::VarOfVar] {
        out.push_str(metric.label());
        out.push('\n');
        out.push_str(&format!("{:>10}", "n_games"));
        for it in &iters {
            out.push_str(&format!("{:>14}", format!("n_iter={it}")));
        }
        out.push('\n');
        for g in &games {
            out.push_str(&format!("{g:>10}"));
            for it in &iters {
                let rendered = match cell_at(cells, *g, *it).and_then(|c| c.metric(metric)) {
                    Some(v) => format!("{v:.3e}"),
                    None => "failed".to_string(),
                };
                out.push_str(&format!("{rendered:>14}"));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
