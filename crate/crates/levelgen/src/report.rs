//! Report writers: CSV tables, text renders, raw JSON and group folders.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{IoContext, Result};
use crate::harness::{
    BehaviourTable, ContentTable, ExperimentResults, GroupResult, ValidationTable, BEHAVIOUR_COLUMNS, CONTENT_COLUMNS,
};
use crate::io;

fn csv_string(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn num(v: f64) -> String {
    format!("{v:.4}")
}

fn owned(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

const VALIDATION_HEADER: [&str; 10] = [
    "level",
    "persona",
    "completion",
    "kill",
    "collect",
    "time",
    "plays",
    "identical",
    "vacuous_kill",
    "vacuous_collect",
];

fn validation_rows(table: &ValidationTable) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.level.clone(),
                r.persona.to_string(),
                num(r.completion),
                num(r.kill),
                num(r.collect),
                num(r.time),
                r.plays.to_string(),
                r.identical.to_string(),
                r.vacuous_kill.to_string(),
                r.vacuous_collect.to_string(),
            ]
        })
        .collect();
    for a in &table.averages {
        rows.push(vec![
            "AVG".into(),
            a.persona.to_string(),
            num(a.completion),
            num(a.kill),
            num(a.collect),
            num(a.time),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    rows
}

pub fn validation_csv(table: Option<&ValidationTable>) -> String {
    csv_string(&owned(&VALIDATION_HEADER), &table.map(validation_rows).unwrap_or_default())
}

fn content_header() -> Vec<String> {
    let mut h = owned(&["metric", "persona", "levels", "degenerate"]);
    for c in CONTENT_COLUMNS {
        h.extend([format!("{c}_mean"), format!("{c}_std"), format!("{c}_mark")]);
    }
    h
}

fn content_rows(table: &ContentTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![
                r.metric.to_string(),
                r.persona.to_string(),
                r.levels.to_string(),
                r.degenerate.to_string(),
            ];
            for c in CONTENT_COLUMNS {
                let col = r.column(c);
                row.extend([num(col.mean), num(col.std), col.mark().to_string()]);
            }
            row
        })
        .collect()
}

pub fn content_table_csv(table: Option<&ContentTable>) -> String {
    csv_string(&content_header(), &table.map(content_rows).unwrap_or_default())
}

fn behaviour_header() -> Vec<String> {
    let mut h = owned(&["metric", "eval_persona", "test_persona", "baseline"]);
    for c in BEHAVIOUR_COLUMNS {
        h.extend([c.to_string(), format!("{c}_mark")]);
    }
    h
}

fn behaviour_rows(table: &BehaviourTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![
                r.metric.to_string(),
                r.eval_persona.to_string(),
                r.test_persona.to_string(),
                r.baseline.to_string(),
            ];
            for c in BEHAVIOUR_COLUMNS {
                let col = r.column(c);
                // Time over no completed levels reads -1, as in the corpus table.
                let mean = if col.n == 0 { -1.0 } else { col.mean };
                row.extend([num(mean), col.mark().to_string()]);
            }
            row
        })
        .collect()
}

pub fn behaviour_csv(table: Option<&BehaviourTable>) -> String {
    csv_string(&behaviour_header(), &table.map(behaviour_rows).unwrap_or_default())
}

/// Space-aligned columns for terminal output.
pub fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

pub fn validation_text(table: &ValidationTable) -> String {
    let mut out = aligned(&owned(&VALIDATION_HEADER[..6]), &validation_rows(table).into_iter().map(|r| r[..6].to_vec()).collect::<Vec<_>>());
    if let Some(t) = &table.killer_vs_runner_kill {
        out.push_str(&format!("killer vs runner kill ratio: U={} p={:.4}\n", t.statistic, t.p_value));
    }
    for n in &table.notes {
        out.push_str(&format!("note: {n}\n"));
    }
    out
}

/// Means with their significance marks, the way the paper's tables print.
pub fn content_text(table: &ContentTable) -> String {
    let mut header = owned(&["group", "levels"]);
    header.extend(CONTENT_COLUMNS.iter().map(|c| c.to_string()));
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![format!("{}-{}", r.metric, r.persona), r.levels.to_string()];
            row.extend(CONTENT_COLUMNS.iter().map(|c| {
                let col = r.column(c);
                format!("{:.2}±{:.2}{}", col.mean, col.std, col.mark())
            }));
            row
        })
        .collect();
    aligned(&header, &rows)
}

pub fn behaviour_text(table: &BehaviourTable) -> String {
    let mut header = owned(&["group", "test"]);
    header.extend(BEHAVIOUR_COLUMNS.iter().map(|c| c.to_string()));
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let tag = if r.baseline { "*" } else { "" };
            let mut row = vec![format!("{}-{}", r.metric, r.eval_persona), format!("{}{tag}", r.test_persona)];
            row.extend(BEHAVIOUR_COLUMNS.iter().map(|c| {
                let col = r.column(c);
                if col.n == 0 {
                    "-1".to_string()
                } else {
                    format!("{:.2}{}", col.mean, col.mark())
                }
            }));
            row
        })
        .collect();
    aligned(&header, &rows)
}

pub const GROUP_FILE: &str = "group.json";

/// Writes `root/<metric>-<persona>/` with the group JSON, one level file and
/// one convergence CSV per run.
pub fn write_group(root: &Path, group: &GroupResult) -> Result<PathBuf> {
    let dir = root.join(group.name());
    fs::create_dir_all(&dir).at(&dir)?;
    io::write_json(&dir.join(GROUP_FILE), group)?;
    for run in &group.runs {
        let n = run.run + 1;
        io::write_level(&dir.join(format!("level_{n:02}.txt")), &run.level)?;
        io::write_text(&dir.join(format!("history_{n:02}.csv")), &io::history_csv(&run.history))?;
    }
    Ok(dir)
}

/// Reads one group folder, or every group folder directly below `root`.
pub fn read_groups(root: &Path) -> Result<Vec<GroupResult>> {
    if root.join(GROUP_FILE).is_file() {
        return Ok(vec![io::read_json(&root.join(GROUP_FILE))?]);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .at(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(GROUP_FILE).is_file())
        .collect();
    dirs.sort();
    dirs.iter().map(|d| io::read_json(&d.join(GROUP_FILE))).collect()
}

/// Writes every table (header-only when absent), the raw JSON and one folder
/// per group under `dir`.
pub fn emit_reports(results: &ExperimentResults, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).at(dir)?;
    io::write_text(&dir.join("validation.csv"), &validation_csv(results.validation.as_ref()))?;
    io::write_text(&dir.join("content.csv"), &content_table_csv(results.content.as_ref()))?;
    io::write_text(&dir.join("behaviour.csv"), &behaviour_csv(results.behaviour.as_ref()))?;
    io::write_json(&dir.join("results.json"), results)?;
    for g in &results.groups {
        write_group(&dir.join("groups"), g)?;
    }
    Ok(())
}
