//! Markdown tables and per-trial convergence traces from aggregated results.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

use super::{BenchTable, TrialResult};

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn slugify(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Writes one markdown table per (target, mode) under `out_dir/tables/` and
/// one `iteration,objective,true_infidelity` CSV per recorded trace under
/// `out_dir/traces/`.
pub fn emit_report(table: &BenchTable, trials: &[TrialResult], out_dir: &Path) -> Result<()> {
    let tables_dir = out_dir.join("tables");
    let mkdir = |p: &Path| {
        std::fs::create_dir_all(p).map_err(|e| Error::io(format!("creating {}", p.display()), e))
    };
    mkdir(&tables_dir)?;

    let groups: BTreeSet<(String, String)> = table
        .rows
        .iter()
        .map(|r| (r.target.clone(), r.mode.to_string()))
        .collect();
    for (target, mode) in &groups {
        let mut md = format!("# {target} ({mode})\n\n");
        md.push_str(
            "| layers | method | infidelity_mean | infidelity_std | nfev_mean | nfev_std | shots | fd_step | objective_mean | nonconverged_% |\n",
        );
        md.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
        let mut rows: Vec<_> = table
            .rows
            .iter()
            .filter(|r| &r.target == target && &r.mode.to_string() == mode)
            .collect();
        rows.sort_by(|a, b| {
            a.layers
                .cmp(&b.layers)
                .then_with(|| a.optimizer.cmp(&b.optimizer))
                .then_with(|| a.shots.cmp(&b.shots))
                .then_with(|| a.fd_step.total_cmp(&b.fd_step))
        });
        for r in rows {
            md.push_str(&format!(
                "| {} | {} | {:.5} | {:.5} | {:.1} | {:.1} | {} | {} | {:.5} | {:.1} |\n",
                r.layers,
                r.optimizer,
                r.infidelity_mean,
                r.infidelity_std,
                r.nfev_mean,
                r.nfev_std,
                r.shots,
                r.fd_step,
                r.objective_mean,
                r.nonconverged_pct
            ));
        }
        md.push_str(
            "\ninfidelity_* is the ideal re-evaluation of the returned parameters; objective_mean is what the optimizer itself saw (shot-noisy in sampled mode).\n",
        );
        write_file(&tables_dir.join(format!("{}_{}.md", slugify(target), mode)), &md)?;
    }

    let traced: Vec<&TrialResult> = trials.iter().filter(|t| t.trace.is_some()).collect();
    if !traced.is_empty() {
        let traces_dir = out_dir.join("traces");
        mkdir(&traces_dir)?;
        for t in traced {
            let mut csv = String::from("iteration,objective,true_infidelity\n");
            for p in t.trace.as_ref().unwrap() {
                csv.push_str(&format!(
                    "{},{:.17e},{:.17e}\n",
                    p.iteration, p.objective, p.true_infidelity
                ));
            }
            let name = format!("{}_trial{}.csv", slugify(&t.cell), t.trial_index);
            write_file(&traces_dir.join(name), &csv)?;
        }
    }
    Ok(())
}
