//! Tabular exports. Every query result flattens into a `TableData`, which
//! serializes to CSV, TSV, or JSON lines.

use std::collections::BTreeSet;
use std::io::Write;
use std::str::FromStr;

use crate::error::ExportError;
use crate::institutions::Affiliation;
use crate::integrate::{JoinedRow, NameLink, RecommendationAuthorship};
use crate::model::{MessageNode, Warehouse, YearMonth};
use crate::queries::{ActorPostCount, EmailTimeline, MonthBucket};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableData {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Tsv,
    JsonLines,
}

impl FromStr for TableFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "tsv" => Ok(TableFormat::Tsv),
            "json-lines" => Ok(TableFormat::JsonLines),
            other => Err(ExportError::UnknownFormat(other.to_string())),
        }
    }
}

/// Serializes a table; CSV and TSV quote per RFC 4180, JSON lines emits one
/// object per row keyed by the header.
pub fn export_table<W: Write>(
    table: &TableData,
    format: TableFormat,
    writer: W,
) -> Result<(), ExportError> {
    match format {
        TableFormat::Csv => write_delimited(table, b',', writer),
        TableFormat::Tsv => write_delimited(table, b'\t', writer),
        TableFormat::JsonLines => write_json_lines(table, writer),
    }
}

fn write_delimited<W: Write>(
    table: &TableData,
    delimiter: u8,
    writer: W,
) -> Result<(), ExportError> {
    let mut out = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(writer);
    out.write_record(&table.header)?;
    for row in &table.rows {
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

fn write_json_lines<W: Write>(table: &TableData, mut writer: W) -> Result<(), ExportError> {
    for row in &table.rows {
        let object: serde_json::Map<String, serde_json::Value> = table
            .header
            .iter()
            .zip(row)
            .map(|(key, value)| (key.clone(), serde_json::Value::String(value.clone())))
            .collect();
        serde_json::to_writer(&mut writer, &object)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Q1/Q2 rows. Per-list columns are the sorted union of lists seen.
pub fn posts_table(rows: &[ActorPostCount]) -> TableData {
    let lists: BTreeSet<&str> = rows
        .iter()
        .flat_map(|r| r.per_list.keys().map(String::as_str))
        .collect();
    let mut header = vec!["actorId".to_string(), "name".to_string(), "total".to_string()];
    header.extend(lists.iter().map(|l| l.to_string()));
    let rows = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.actor_id.clone(), r.name.clone(), r.total.to_string()];
            row.extend(
                lists
                    .iter()
                    .map(|l| r.per_list.get(*l).copied().unwrap_or(0).to_string()),
            );
            row
        })
        .collect();
    TableData { header, rows }
}

/// Q3 rows.
pub fn months_table(buckets: &[MonthBucket]) -> TableData {
    TableData {
        header: vec!["month".to_string(), "count".to_string()],
        rows: buckets
            .iter()
            .map(|b| vec![b.month.to_string(), b.count.to_string()])
            .collect(),
    }
}

/// Q4 rows.
pub fn messages_table(messages: &[&MessageNode]) -> TableData {
    TableData {
        header: vec![
            "messageId".to_string(),
            "date".to_string(),
            "sender".to_string(),
            "subject".to_string(),
        ],
        rows: messages
            .iter()
            .map(|m| {
                vec![
                    m.message_id.clone(),
                    m.date.format(crate::store::DATE_FMT).to_string(),
                    m.sender.as_str().to_string(),
                    m.subject.clone(),
                ]
            })
            .collect(),
    }
}

/// Q5 rows: one per (address, series, month), zero months included.
pub fn timeline_table(timeline: &EmailTimeline) -> TableData {
    let mut rows = Vec::new();
    for ((address, kind), buckets) in &timeline.series {
        for bucket in buckets {
            rows.push(vec![
                timeline.actor_id.clone(),
                address.as_str().to_string(),
                kind.label().to_string(),
                bucket.month.to_string(),
                bucket.count.to_string(),
            ]);
        }
    }
    TableData {
        header: vec![
            "actorId".to_string(),
            "email".to_string(),
            "series".to_string(),
            "month".to_string(),
            "count".to_string(),
        ],
        rows,
    }
}

/// Q6 rows.
pub fn institutions_table(rows: &[(String, u64)]) -> TableData {
    TableData {
        header: vec!["institution".to_string(), "posts".to_string()],
        rows: rows
            .iter()
            .map(|(label, count)| vec![label.clone(), count.to_string()])
            .collect(),
    }
}

/// Q7 rows: matched actors first, then absent authors with an empty actorId.
pub fn recommendations_table(result: &RecommendationAuthorship) -> TableData {
    let mut rows = Vec::new();
    for (actor_id, recs) in &result.authored {
        rows.push(vec![actor_id.clone(), String::new(), recs.join(" ")]);
    }
    for (name, recs) in &result.absent {
        rows.push(vec![String::new(), name.clone(), recs.join(" ")]);
    }
    TableData {
        header: vec![
            "actorId".to_string(),
            "absentAuthor".to_string(),
            "recommendations".to_string(),
        ],
        rows,
    }
}

/// Q8 rows.
pub fn publications_table(rows: &[JoinedRow]) -> TableData {
    TableData {
        header: vec![
            "actorId".to_string(),
            "name".to_string(),
            "posts".to_string(),
            "publications".to_string(),
        ],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.actor_id.clone(),
                    r.name.clone(),
                    r.posts.to_string(),
                    r.publications.to_string(),
                ]
            })
            .collect(),
    }
}

pub fn links_table(links: &[NameLink]) -> TableData {
    TableData {
        header: vec![
            "actorId".to_string(),
            "externalName".to_string(),
            "match".to_string(),
        ],
        rows: links
            .iter()
            .map(|l| {
                vec![
                    l.actor_id.clone(),
                    l.external_name.clone().unwrap_or_default(),
                    l.kind.as_str().to_string(),
                ]
            })
            .collect(),
    }
}

/// Actor-by-month affiliation matrix over the corpus month range. Each cell
/// is the single covering affiliation's label, `*` when fuzzy or covered by
/// more than one, `-` when uncovered.
pub fn export_sequence_matrix(warehouse: &Warehouse, affiliations: &[Affiliation]) -> TableData {
    let months = match warehouse.month_range() {
        Some((lo, hi)) => YearMonth::range_inclusive(lo, hi),
        None => Vec::new(),
    };
    let mut header = vec!["actorId".to_string()];
    header.extend(months.iter().map(|m| m.to_string()));
    let rows = warehouse
        .actors
        .iter()
        .map(|actor| {
            let mut row = vec![actor.id.clone()];
            for month in &months {
                let covering: Vec<&Affiliation> = affiliations
                    .iter()
                    .filter(|a| a.actor == actor.id && a.start <= *month && *month <= a.end)
                    .collect();
                row.push(match covering.as_slice() {
                    [] => "-".to_string(),
                    [single] if !single.fuzzy => single.target.label().to_string(),
                    _ => "*".to_string(),
                });
            }
            row
        })
        .collect();
    TableData { header, rows }
}
