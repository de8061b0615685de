//! Command-line front end over the warehouse library. Exit codes: 0 on
//! success, 1 on data errors, 2 on usage errors (clap's default).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use listforge_core::chart::{render_bar_chart, ChartSeries};
use listforge_core::config::{resolve_config_dir, Config};
use listforge_core::export::{
    export_sequence_matrix, export_table, institutions_table, links_table, messages_table,
    months_table, posts_table, publications_table, recommendations_table, timeline_table,
    TableData, TableFormat,
};
use listforge_core::identity::{apply_merge, propose_merges, recover_into_warehouse};
use listforge_core::ingest::ingest_path;
use listforge_core::institutions::build_affiliation_timeline;
use listforge_core::integrate::{
    load_bibliography, load_tech_reports_csv, q7_recommendation_authors,
    q8_posts_vs_publications,
};
use listforge_core::model::Warehouse;
use listforge_core::queries::{
    q1_posts_per_actor, q2_multi_list_posters, q3_posts_per_month, q4_fulltext,
    q5_email_timeline, q6_posts_per_institution, TextField,
};
use listforge_core::report::{write_report, ReportOptions};
use listforge_core::store::{deserialize, serialize, LoadOptions};

#[derive(Parser)]
#[command(name = "listforge", version, about = "Mailing-list content warehouse toolkit")]
struct Cli {
    /// Warehouse directory.
    #[arg(long, global = true, default_value = "./warehouse")]
    warehouse: PathBuf,
    /// Configuration directory (merges.csv, gateways.txt, aliases.csv,
    /// domain_map.csv, suffixes.txt). Falls back to $LISTFORGE_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write tabular output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for --out.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Keep unknown optional actor elements across load/save.
    #[arg(long, global = true)]
    preserve_extensions: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Tsv,
    #[value(name = "json-lines")]
    JsonLines,
}

impl From<Format> for TableFormat {
    fn from(f: Format) -> TableFormat {
        match f {
            Format::Csv => TableFormat::Csv,
            Format::Tsv => TableFormat::Tsv,
            Format::JsonLines => TableFormat::JsonLines,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a raw archive (mbox file or maildir directory) into the
    /// warehouse; rejects land in quarantine/<listId>.log.
    Ingest {
        /// Mailing-list identifier, e.g. public-qt-comments.
        #[arg(long)]
        list: String,
        path: PathBuf,
        /// Never attach a new address to an existing actor by name alone.
        #[arg(long)]
        strict_homonym: bool,
    },
    /// Actor merge workflow.
    Resolve {
        #[command(subcommand)]
        action: ResolveAction,
    },
    /// Scan gateway-sent bodies for hidden original senders.
    RecoverHidden,
    /// Institution mapping reports.
    Institutions {
        #[command(subcommand)]
        action: InstitutionsAction,
    },
    /// Check warehouse invariants and print violations.
    Validate,
    /// Run one of the standing queries.
    Query {
        #[command(subcommand)]
        which: QueryCommand,
    },
    /// Bulk exports beyond single query tables.
    Export {
        #[command(subcommand)]
        what: ExportCommand,
    },
    /// Validate + Q1/Q2/Q3/Q6 with charts into a summary directory.
    Report {
        /// Q1 cut-off.
        #[arg(long, default_value_t = 20)]
        threshold: u64,
    },
}

#[derive(Subcommand)]
enum ResolveAction {
    /// List merge candidates (never applied automatically).
    Propose,
    /// Apply the approved merges from config merges.csv.
    Apply,
}

#[derive(Subcommand)]
enum InstitutionsAction {
    /// Posts per institution (Q6 over the whole warehouse).
    Report {
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Per-address affiliation intervals for one actor.
    Timeline { actor_id: String },
}

#[derive(Subcommand)]
enum QueryCommand {
    /// Posts per actor, descending.
    Q1 {
        #[arg(long, default_value_t = 0)]
        threshold: u64,
        /// Attribute gateway messages to their recovered senders.
        #[arg(long)]
        count_recovered: bool,
    },
    /// Actors posting on at least N lists.
    Q2 {
        #[arg(long, default_value_t = 2)]
        min_lists: usize,
    },
    /// Posts per month for one list.
    Q3 {
        #[arg(long)]
        list: String,
    },
    /// Substring search over subjects or bodies.
    Q4 {
        #[arg(long)]
        list: String,
        #[arg(long, value_enum, default_value_t = Field::Subject)]
        field: Field,
        needle: String,
    },
    /// Monthly posting series per address for one actor.
    Q5 { actor_id: String },
    /// Posts per institution (domain-mapped).
    Q6 {
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Recommendation authorship joined against a tech-reports CSV.
    Q7 {
        /// CSV of recommendationId,authorFullName lines.
        tech_reports: PathBuf,
    },
    /// Posting vs publication counts joined against a bibliography.
    Q8 {
        /// DBLP-shaped XML file.
        bibliography: PathBuf,
        #[arg(long, default_value_t = 40)]
        threshold: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Field {
    Subject,
    Body,
}

#[derive(Subcommand)]
enum ExportCommand {
    /// Actor-by-month affiliation matrix for sequence analysis.
    SequenceMatrix,
    /// Actor/bibliography name links for audit.
    Links {
        bibliography: PathBuf,
    },
    /// Stacked monthly chart of one actor's addresses (SVG).
    TimelineChart {
        actor_id: String,
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config_dir = resolve_config_dir(cli.config.as_deref());
    let config = Config::load(config_dir.as_deref())?;
    let load_options = LoadOptions {
        preserve_extensions: cli.preserve_extensions,
    };
    let sink = Sink {
        out: cli.out.clone(),
        format: cli.format.into(),
    };

    match cli.command {
        Command::Ingest {
            list,
            path,
            strict_homonym,
        } => {
            let mut warehouse = if cli.warehouse.is_dir() {
                load(&cli.warehouse, load_options)?
            } else {
                Warehouse::default()
            };
            let outcome = ingest_path(&path, &list)?;
            listforge_core::identity::enroll_senders(
                &mut warehouse,
                &outcome.messages,
                strict_homonym,
            );
            warehouse.lists.insert(list.clone(), outcome.threads);
            serialize(&warehouse, &cli.warehouse)?;

            fs::create_dir_all("quarantine")?;
            let log: String = outcome
                .quarantine
                .iter()
                .map(|q| format!("{}\t{}\t{}\n", q.source_list, q.byte_offset, q.reason))
                .collect();
            let log_path = Path::new("quarantine").join(format!("{list}.log"));
            fs::write(&log_path, log)?;

            println!(
                "{}: {} raw, {} parsed, {} quarantined ({}), {} threads",
                list,
                outcome.raw_count,
                outcome.messages.len() - outcome
                    .quarantine
                    .iter()
                    .filter(|q| q.reason == "duplicate-message-id")
                    .count(),
                outcome.quarantine.len(),
                log_path.display(),
                warehouse.lists[&list].len(),
            );
            Ok(())
        }

        Command::Resolve { action } => match action {
            ResolveAction::Propose => {
                let warehouse = load(&cli.warehouse, load_options)?;
                let proposals = propose_merges(&warehouse);
                let table = TableData {
                    header: vec![
                        "actorA".into(),
                        "actorB".into(),
                        "evidence".into(),
                        "score".into(),
                    ],
                    rows: proposals
                        .iter()
                        .map(|p| {
                            vec![
                                p.actor_a.clone(),
                                p.actor_b.clone(),
                                p.evidence.as_str().to_string(),
                                format!("{:.1}", p.score),
                            ]
                        })
                        .collect(),
                };
                output(&table, &sink)
            }
            ResolveAction::Apply => {
                if config.merges.is_empty() {
                    bail!("no approved merges: config merges.csv is empty or absent");
                }
                let mut warehouse = load(&cli.warehouse, load_options)?;
                for (keep, drop) in &config.merges {
                    warehouse = apply_merge(&warehouse, keep, drop)?;
                    println!("merged {drop} into {keep}");
                }
                serialize(&warehouse, &cli.warehouse)?;
                Ok(())
            }
        },

        Command::RecoverHidden => {
            if config.gateways.is_empty() {
                bail!("no gateway addresses: config gateways.txt is empty or absent");
            }
            let mut warehouse = load(&cli.warehouse, load_options)?;
            let gateways: BTreeSet<_> = config.gateways.iter().cloned().collect();
            let stats = recover_into_warehouse(&mut warehouse, &gateways);
            serialize(&warehouse, &cli.warehouse)?;
            println!(
                "{} gateway messages scanned, {} senders recovered",
                stats.gateway_messages, stats.recovered
            );
            for address in &stats.unknown_addresses {
                println!("unknown recovered address: {}", address.as_str());
            }
            Ok(())
        }

        Command::Institutions { action } => {
            let warehouse = load(&cli.warehouse, load_options)?;
            match action {
                InstitutionsAction::Report { top } => {
                    let rows = q6_posts_per_institution(
                        &warehouse,
                        top,
                        &config.domain_map,
                        &config.suffixes,
                    );
                    output(&institutions_table(&rows), &sink)
                }
                InstitutionsAction::Timeline { actor_id } => {
                    if warehouse.actor(&actor_id).is_none() {
                        bail!("unknown actor id: {actor_id}");
                    }
                    let affiliations = build_affiliation_timeline(
                        &warehouse,
                        &actor_id,
                        &config.domain_map,
                        &config.suffixes,
                    );
                    let table = TableData {
                        header: vec![
                            "address".into(),
                            "institution".into(),
                            "start".into(),
                            "end".into(),
                            "fuzzy".into(),
                        ],
                        rows: affiliations
                            .iter()
                            .map(|a| {
                                vec![
                                    a.address.as_str().to_string(),
                                    a.target.label().to_string(),
                                    a.start.to_string(),
                                    a.end.to_string(),
                                    a.fuzzy.to_string(),
                                ]
                            })
                            .collect(),
                    };
                    output(&table, &sink)
                }
            }
        }

        Command::Validate => {
            let loaded = deserialize(&cli.warehouse, load_options)?;
            for warning in &loaded.warnings {
                eprintln!("warning: {warning}");
            }
            if loaded.report.is_valid() {
                println!(
                    "valid: {} actors, {} messages",
                    loaded.warehouse.actors.len(),
                    loaded.warehouse.message_count()
                );
                Ok(())
            } else {
                for violation in &loaded.report.violations {
                    println!("{violation}");
                }
                bail!("{} violation(s)", loaded.report.violations.len());
            }
        }

        Command::Query { which } => {
            let warehouse = load(&cli.warehouse, load_options)?;
            let table = match which {
                QueryCommand::Q1 {
                    threshold,
                    count_recovered,
                } => posts_table(&q1_posts_per_actor(&warehouse, threshold, count_recovered)),
                QueryCommand::Q2 { min_lists } => {
                    posts_table(&q2_multi_list_posters(&warehouse, min_lists))
                }
                QueryCommand::Q3 { list } => {
                    require_list(&warehouse, &list)?;
                    months_table(&q3_posts_per_month(&warehouse, &list))
                }
                QueryCommand::Q4 { list, field, needle } => {
                    require_list(&warehouse, &list)?;
                    let field = match field {
                        Field::Subject => TextField::Subject,
                        Field::Body => TextField::Body,
                    };
                    messages_table(&q4_fulltext(&warehouse, &list, &needle, field))
                }
                QueryCommand::Q5 { actor_id } => {
                    if warehouse.actor(&actor_id).is_none() {
                        bail!("unknown actor id: {actor_id}");
                    }
                    timeline_table(&q5_email_timeline(&warehouse, &actor_id))
                }
                QueryCommand::Q6 { top } => institutions_table(&q6_posts_per_institution(
                    &warehouse,
                    top,
                    &config.domain_map,
                    &config.suffixes,
                )),
                QueryCommand::Q7 { tech_reports } => {
                    let text = fs::read_to_string(&tech_reports)
                        .with_context(|| tech_reports.display().to_string())?;
                    let rows = load_tech_reports_csv(&text);
                    recommendations_table(&q7_recommendation_authors(&warehouse, &rows))
                }
                QueryCommand::Q8 {
                    bibliography,
                    threshold,
                } => {
                    let text = fs::read_to_string(&bibliography)
                        .with_context(|| bibliography.display().to_string())?;
                    let records = load_bibliography(&text)?;
                    let result = q8_posts_vs_publications(&warehouse, &records, threshold);
                    for name in &result.ambiguous_names {
                        eprintln!("warning: ambiguous author name refused: {name}");
                    }
                    eprintln!(
                        "top {}: {}/{} published ({:.0}%), mean {:.2} publications",
                        result.top_summary.members,
                        result.top_summary.published,
                        result.top_summary.members,
                        result.top_summary.published_fraction * 100.0,
                        result.top_summary.mean_publications,
                    );
                    eprintln!(
                        "rest {}: {}/{} published ({:.0}%), mean {:.2} publications",
                        result.rest_summary.members,
                        result.rest_summary.published,
                        result.rest_summary.members,
                        result.rest_summary.published_fraction * 100.0,
                        result.rest_summary.mean_publications,
                    );
                    publications_table(&result.top)
                }
            };
            output(&table, &sink)
        }

        Command::Export { what } => {
            let warehouse = load(&cli.warehouse, load_options)?;
            match what {
                ExportCommand::SequenceMatrix => {
                    let mut affiliations = Vec::new();
                    for actor in &warehouse.actors {
                        affiliations.extend(build_affiliation_timeline(
                            &warehouse,
                            &actor.id,
                            &config.domain_map,
                            &config.suffixes,
                        ));
                    }
                    output(&export_sequence_matrix(&warehouse, &affiliations), &sink)
                }
                ExportCommand::Links { bibliography } => {
                    let text = fs::read_to_string(&bibliography)
                        .with_context(|| bibliography.display().to_string())?;
                    let records = load_bibliography(&text)?;
                    let names: Vec<String> =
                        records.into_iter().map(|r| r.full_name).collect();
                    let (links, ambiguous) =
                        listforge_core::integrate::link_actors(&warehouse, &names);
                    for name in &ambiguous {
                        eprintln!("warning: ambiguous author name refused: {name}");
                    }
                    output(&links_table(&links), &sink)
                }
                ExportCommand::TimelineChart { actor_id, out } => {
                    if warehouse.actor(&actor_id).is_none() {
                        bail!("unknown actor id: {actor_id}");
                    }
                    let timeline = q5_email_timeline(&warehouse, &actor_id);
                    let series: Vec<ChartSeries> = timeline
                        .series
                        .iter()
                        .map(|((address, kind), buckets)| ChartSeries {
                            label: format!("{} ({})", address.as_str(), kind.label()),
                            buckets: buckets.clone(),
                        })
                        .collect();
                    fs::write(&out, render_bar_chart(&actor_id, &series, true))
                        .with_context(|| out.display().to_string())?;
                    println!("wrote {}", out.display());
                    Ok(())
                }
            }
        }

        Command::Report { threshold } => {
            let warehouse = load(&cli.warehouse, load_options)?;
            let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("./report"));
            let files = write_report(
                &warehouse,
                &config,
                &out_dir,
                ReportOptions {
                    threshold,
                    ..ReportOptions::default()
                },
            )?;
            for file in files {
                println!("wrote {}", file.display());
            }
            Ok(())
        }
    }
}

fn load(dir: &Path, options: LoadOptions) -> Result<Warehouse> {
    let loaded = deserialize(dir, options)?;
    for warning in &loaded.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(loaded.warehouse)
}

fn require_list(warehouse: &Warehouse, list: &str) -> Result<()> {
    if !warehouse.lists.contains_key(list) {
        bail!("unknown list: {list}");
    }
    Ok(())
}

struct Sink {
    out: Option<PathBuf>,
    format: TableFormat,
}

/// Writes the table to --out in the chosen format, or to stdout as an
/// aligned text table.
fn output(table: &TableData, sink: &Sink) -> Result<()> {
    if let Some(path) = &sink.out {
        let file = fs::File::create(path).with_context(|| path.display().to_string())?;
        export_table(table, sink.format, file)?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    let mut widths: Vec<usize> = table.header.iter().map(String::len).collect();
    for row in &table.rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let print_row = |row: &[String]| {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, cell)| format!("{:<width$}", cell, width = widths[i]))
            .collect();
        println!("{}", line.join("  ").trim_end());
    };
    print_row(&table.header);
    for row in &table.rows {
        print_row(row);
    }
    Ok(())
}
