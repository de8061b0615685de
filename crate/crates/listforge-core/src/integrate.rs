//! Joining the warehouse with external authorship sources by person name:
//! a DBLP-shaped bibliography for publication counts, and a flattened
//! tech-reports author list for recommendation authorship.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::IntegrateError;
use crate::model::Warehouse;
use crate::queries::{q1_posts_per_actor, UNRESOLVED_ID};
use crate::xml::parse_document;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalAuthorRecord {
    pub full_name: String,
    pub publication_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    Exact,
    Normalized,
    Unmatched,
}

impl MatchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchKind::Exact => "exact",
            MatchKind::Normalized => "normalized",
            MatchKind::Unmatched => "unmatched",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameLink {
    pub actor_id: String,
    pub external_name: Option<String>,
    pub kind: MatchKind,
}

/// Parses a DBLP-shaped XML subset: any root whose children are
/// publication elements carrying `<author>` children. Returns one record
/// per distinct author name with the total publication count.
pub fn load_bibliography(document: &str) -> Result<Vec<ExternalAuthorRecord>, IntegrateError> {
    let root =
        parse_document(document).map_err(|(line, message)| IntegrateError::Parse(line, message))?;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for publication in root.elements() {
        for author in publication.find_all("author") {
            let name = author.text_content().trim().to_string();
            if !name.is_empty() {
                *counts.entry(name).or_insert(0) += 1;
            }
        }
    }
    Ok(counts
        .into_iter()
        .map(|(full_name, publication_count)| ExternalAuthorRecord {
            full_name,
            publication_count,
        })
        .collect())
}

/// Strips diacritics from the common Latin accented range and lowercases.
pub fn fold_name(name: &str) -> String {
    name.chars()
        .flat_map(|c| {
            let folded: &str = match c {
                'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'À' | 'Á' | 'Â' | 'Ã' | 'Ä' | 'Å' => "a",
                'è' | 'é' | 'ê' | 'ë' | 'È' | 'É' | 'Ê' | 'Ë' => "e",
                'ì' | 'í' | 'î' | 'ï' | 'Ì' | 'Í' | 'Î' | 'Ï' => "i",
                'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' | 'Ò' | 'Ó' | 'Ô' | 'Õ' | 'Ö' | 'Ø' => "o",
                'ù' | 'ú' | 'û' | 'ü' | 'Ù' | 'Ú' | 'Û' | 'Ü' => "u",
                'ý' | 'ÿ' | 'Ý' => "y",
                'ç' | 'Ç' => "c",
                'ñ' | 'Ñ' => "n",
                'ß' => "ss",
                'æ' | 'Æ' => "ae",
                'œ' | 'Œ' => "oe",
                _ => return itertools_free_lower(c),
            };
            folded.chars().collect::<Vec<char>>()
        })
        .collect()
}

fn itertools_free_lower(c: char) -> Vec<char> {
    c.to_lowercase().collect()
}

/// Links external author names to actors: exact match on the rendered
/// "Firstname Lastname" first, then a diacritics-stripped, case-folded
/// match. Each external name links to at most one actor; ambiguous names
/// are refused and reported. Unmatched actors are listed as such.
pub fn link_actors(
    warehouse: &Warehouse,
    external_names: &[String],
) -> (Vec<NameLink>, Vec<String>) {
    let mut by_display: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    let mut by_folded: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for actor in &warehouse.actors {
        let display = actor.name.display();
        by_folded
            .entry(fold_name(&display))
            .or_default()
            .push(&actor.id);
        by_display.entry(display).or_default().push(&actor.id);
    }

    let mut link_by_actor: BTreeMap<&str, (String, MatchKind)> = BTreeMap::new();
    let mut ambiguous: Vec<String> = Vec::new();
    let mut names: Vec<&String> = external_names.iter().collect();
    names.sort();
    names.dedup();
    for name in names {
        let (candidates, kind) = match by_display.get(name.as_str()) {
            Some(ids) => (ids, MatchKind::Exact),
            None => match by_folded.get(&fold_name(name)) {
                Some(ids) => (ids, MatchKind::Normalized),
                None => continue,
            },
        };
        if candidates.len() != 1 {
            ambiguous.push(name.clone());
            continue;
        }
        let actor_id = candidates[0];
        // keep the strongest (exact over normalized) link per actor
        match link_by_actor.get(actor_id) {
            Some((_, MatchKind::Exact)) => {}
            _ => {
                link_by_actor.insert(actor_id, (name.clone(), kind));
            }
        }
    }

    let links = warehouse
        .actors
        .iter()
        .map(|actor| match link_by_actor.get(actor.id.as_str()) {
            Some((name, kind)) => NameLink {
                actor_id: actor.id.clone(),
                external_name: Some(name.clone()),
                kind: *kind,
            },
            None => NameLink {
                actor_id: actor.id.clone(),
                external_name: None,
                kind: MatchKind::Unmatched,
            },
        })
        .collect();
    (links, ambiguous)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinedRow {
    pub actor_id: String,
    pub name: String,
    pub posts: u64,
    pub publications: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSummary {
    pub members: usize,
    pub published: usize,
    /// Fraction of the group with at least one publication, in [0, 1].
    pub published_fraction: f64,
    pub mean_publications: f64,
}

fn summarize(rows: &[JoinedRow]) -> GroupSummary {
    let members = rows.len();
    let published = rows.iter().filter(|r| r.publications >= 1).count();
    let total_publications: u64 = rows.iter().map(|r| r.publications).sum();
    GroupSummary {
        members,
        published,
        published_fraction: if members == 0 {
            0.0
        } else {
            published as f64 / members as f64
        },
        mean_publications: if members == 0 {
            0.0
        } else {
            total_publications as f64 / members as f64
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostsVsPublications {
    /// Top posters (>= threshold), joined with publication counts.
    pub top: Vec<JoinedRow>,
    pub top_summary: GroupSummary,
    /// Everyone else on the lists (the Q9 complement).
    pub rest_summary: GroupSummary,
    pub ambiguous_names: Vec<String>,
}

/// Q8/Q9: joins posting counts with publication counts; summaries are
/// computed for the top group and for its complement.
pub fn q8_posts_vs_publications(
    warehouse: &Warehouse,
    records: &[ExternalAuthorRecord],
    threshold: u64,
) -> PostsVsPublications {
    let names: Vec<String> = records.iter().map(|r| r.full_name.clone()).collect();
    let (links, ambiguous_names) = link_actors(warehouse, &names);
    let publications_by_name: BTreeMap<&str, u64> = records
        .iter()
        .map(|r| (r.full_name.as_str(), r.publication_count))
        .collect();
    let publications_by_actor: BTreeMap<&str, u64> = links
        .iter()
        .filter_map(|l| {
            l.external_name.as_deref().map(|name| {
                (
                    l.actor_id.as_str(),
                    publications_by_name.get(name).copied().unwrap_or(0),
                )
            })
        })
        .collect();

    let join = |rows: Vec<crate::queries::ActorPostCount>| -> Vec<JoinedRow> {
        rows.into_iter()
            .filter(|r| r.actor_id != UNRESOLVED_ID)
            .map(|r| JoinedRow {
                publications: publications_by_actor
                    .get(r.actor_id.as_str())
                    .copied()
                    .unwrap_or(0),
                actor_id: r.actor_id,
                name: r.name,
                posts: r.total,
            })
            .collect()
    };

    let top = join(q1_posts_per_actor(warehouse, threshold, false));
    let top_ids: BTreeSet<&str> = top.iter().map(|r| r.actor_id.as_str()).collect();
    let rest: Vec<JoinedRow> = join(q1_posts_per_actor(warehouse, 0, false))
        .into_iter()
        .filter(|r| !top_ids.contains(r.actor_id.as_str()))
        .collect();

    PostsVsPublications {
        top_summary: summarize(&top),
        rest_summary: summarize(&rest),
        top,
        ambiguous_names,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecommendationAuthorship {
    /// Actors who authored recommendations, with the recommendation ids.
    pub authored: Vec<(String, Vec<String>)>,
    /// Recommendation authors with no mailing-list presence.
    pub absent: Vec<(String, Vec<String>)>,
}

/// Loads the flattened tech-reports feed: `recommendationId,authorFullName`
/// lines.
pub fn load_tech_reports_csv(text: &str) -> Vec<(String, String)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records().flatten() {
        if record.len() >= 2 {
            let rec_id = record[0].trim().to_string();
            let author = record[1].trim().to_string();
            if !rec_id.is_empty() && !author.is_empty() {
                out.push((rec_id, author));
            }
        }
    }
    out
}

/// Q7: per-actor recommendation authorship, plus the authors absent
/// from the warehouse entirely.
pub fn q7_recommendation_authors(
    warehouse: &Warehouse,
    tech_reports: &[(String, String)],
) -> RecommendationAuthorship {
    let mut recs_by_author: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (rec_id, author) in tech_reports {
        let recs = recs_by_author.entry(author).or_default();
        if !recs.contains(rec_id) {
            recs.push(rec_id.clone());
        }
    }
    let names: Vec<String> = recs_by_author.keys().map(|s| s.to_string()).collect();
    let (links, _) = link_actors(warehouse, &names);

    let mut matched_names: BTreeSet<&str> = BTreeSet::new();
    let mut authored = Vec::new();
    for link in &links {
        if let Some(name) = link.external_name.as_deref() {
            if let Some(recs) = recs_by_author.get(name) {
                matched_names.insert(name);
                authored.push((link.actor_id.clone(), recs.clone()));
            }
        }
    }
    let absent = recs_by_author
        .iter()
        .filter(|(name, _)| !matched_names.contains(*name))
        .map(|(name, recs)| (name.to_string(), recs.clone()))
        .collect();
    RecommendationAuthorship { authored, absent }
}
