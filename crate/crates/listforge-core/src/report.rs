//! One-shot summary report over a warehouse snapshot: a validation
//! digest, the headline query tables, and monthly traffic charts. Output
//! is a deterministic set of files under one directory.

use std::fs;
use std::path::{Path, PathBuf};

use crate::chart::{render_bar_chart, ChartSeries};
use crate::config::Config;
use crate::error::ExportError;
use crate::export::{export_table, institutions_table, posts_table, months_table, TableFormat};
use crate::model::Warehouse;
use crate::queries::{
    q1_posts_per_actor, q2_multi_list_posters, q3_posts_per_month, q6_posts_per_institution,
};
use crate::validate::validate;

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    /// Q1 cut-off for the "top posters" table.
    pub threshold: u64,
    pub count_recovered: bool,
    /// Q2 minimum distinct lists.
    pub min_lists: usize,
    /// Q6 institution rows to keep.
    pub top_institutions: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            threshold: 20,
            count_recovered: false,
            min_lists: 2,
            top_institutions: 20,
        }
    }
}

/// Writes the report into `out_dir` (created if needed) and returns the
/// files written, sorted. Equal inputs produce byte-identical files.
pub fn write_report(
    warehouse: &Warehouse,
    config: &Config,
    out_dir: &Path,
    options: ReportOptions,
) -> Result<Vec<PathBuf>, ExportError> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, bytes: &[u8]| -> Result<(), ExportError> {
        let path = out_dir.join(name);
        fs::write(&path, bytes)?;
        written.push(path);
        Ok(())
    };

    let report = validate(warehouse);
    let mut digest = format!(
        "actors: {}\ninstitutions: {}\nfunctions: {}\nlists: {}\nmessages: {}\nviolations: {}\n",
        warehouse.actors.len(),
        warehouse.institutions.len(),
        warehouse.functions.len(),
        warehouse.lists.len(),
        warehouse.message_count(),
        report.violations.len(),
    );
    for violation in &report.violations {
        digest.push_str(&format!(
            "  {} {} {}\n",
            violation.rule, violation.entity, violation.detail
        ));
    }
    emit("validation.txt", digest.as_bytes())?;

    let table_bytes = |table: &crate::export::TableData| -> Result<Vec<u8>, ExportError> {
        let mut buf = Vec::new();
        export_table(table, TableFormat::Csv, &mut buf)?;
        Ok(buf)
    };

    let q1 = q1_posts_per_actor(warehouse, options.threshold, options.count_recovered);
    emit("q1_top_posters.csv", &table_bytes(&posts_table(&q1))?)?;

    let q2 = q2_multi_list_posters(warehouse, options.min_lists);
    emit("q2_multi_list_posters.csv", &table_bytes(&posts_table(&q2))?)?;

    let list_ids: Vec<&String> = warehouse.lists.keys().collect();
    for list_id in &list_ids {
        let buckets = q3_posts_per_month(warehouse, list_id);
        emit(
            &format!("q3_{list_id}.csv"),
            &table_bytes(&months_table(&buckets))?,
        )?;
    }
    let traffic: Vec<ChartSeries> = list_ids
        .iter()
        .map(|list_id| ChartSeries {
            label: list_id.to_string(),
            buckets: q3_posts_per_month(warehouse, list_id),
        })
        .collect();
    emit(
        "q3_traffic.svg",
        render_bar_chart("posts per month", &traffic, true).as_bytes(),
    )?;

    let q6 = q6_posts_per_institution(
        warehouse,
        options.top_institutions,
        &config.domain_map,
        &config.suffixes,
    );
    emit("q6_institutions.csv", &table_bytes(&institutions_table(&q6))?)?;

    written.sort();
    Ok(written)
}
