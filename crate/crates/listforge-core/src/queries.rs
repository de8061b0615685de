//! The analytic query suite over an immutable warehouse snapshot:
//! activity counts, multi-list posters, monthly timelines, full-text
//! filtering, per-address timelines, and institution leaderboards.
//!
//! All queries are pure; identical snapshots yield identical results.
//! Ranking ties break by actor id / domain in lexicographic order.

use std::collections::BTreeMap;

use crate::institutions::{DomainMap, SuffixList};
use crate::model::{
    EmailAddress, HiddenMarker, MessageNode, Warehouse, YearMonth,
};

/// Pseudo-actor id collecting messages whose sender resolves to no actor.
pub const UNRESOLVED_ID: &str = "unresolved";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActorPostCount {
    pub actor_id: String,
    pub name: String,
    pub total: u64,
    pub per_list: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonthBucket {
    pub month: YearMonth,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeriesKind {
    Direct,
    Recovered(HiddenMarker),
}

impl SeriesKind {
    pub fn label(self) -> &'static str {
        match self {
            SeriesKind::Direct => "direct",
            SeriesKind::Recovered(marker) => marker.as_str(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmailTimeline {
    pub actor_id: String,
    pub series: BTreeMap<(EmailAddress, SeriesKind), Vec<MonthBucket>>,
}

impl EmailTimeline {
    pub fn total(&self) -> u64 {
        self.series
            .values()
            .flat_map(|buckets| buckets.iter().map(|b| b.count))
            .sum()
    }
}

/// Which actor a message counts for. With recovered counting on, gateway
/// messages carrying hidden senders are attributed to the first recovered
/// address instead of the gateway.
fn attributed_email<'a>(msg: &'a MessageNode, count_recovered: bool) -> &'a EmailAddress {
    if count_recovered {
        if let Some(first) = msg.recovered.first() {
            return &first.email;
        }
    }
    &msg.sender
}

/// Q1: names and post counts of the actors having posted at least
/// `threshold` messages, descending. Unresolved senders aggregate into the
/// `unresolved` pseudo-row.
pub fn q1_posts_per_actor(
    warehouse: &Warehouse,
    threshold: u64,
    count_recovered: bool,
) -> Vec<ActorPostCount> {
    let mut counts: BTreeMap<&str, ActorPostCount> = BTreeMap::new();
    for (list_id, threads) in &warehouse.lists {
        for msg in threads.iter().flat_map(|t| t.root.walk()) {
            let email = attributed_email(msg, count_recovered);
            let (id, name) = match warehouse.actor_by_email(email) {
                Some(actor) => (actor.id.as_str(), actor.name.display()),
                None => (UNRESOLVED_ID, "(unresolved)".to_string()),
            };
            let entry = counts.entry(id).or_insert_with(|| ActorPostCount {
                actor_id: id.to_string(),
                name,
                total: 0,
                per_list: BTreeMap::new(),
            });
            entry.total += 1;
            *entry.per_list.entry(list_id.clone()).or_insert(0) += 1;
        }
    }
    let mut rows: Vec<ActorPostCount> = counts
        .into_values()
        .filter(|row| row.total >= threshold)
        .collect();
    rows.sort_by(|a, b| b.total.cmp(&a.total).then(a.actor_id.cmp(&b.actor_id)));
    rows
}

/// Q2: posters active on at least `min_lists` different lists.
pub fn q2_multi_list_posters(warehouse: &Warehouse, min_lists: usize) -> Vec<ActorPostCount> {
    q1_posts_per_actor(warehouse, 0, false)
        .into_iter()
        .filter(|row| row.actor_id != UNRESOLVED_ID)
        .filter(|row| row.per_list.values().filter(|&&c| c > 0).count() >= min_lists)
        .collect()
}

/// Q3: posts per UTC month for one list, zero-filled over the whole
/// corpus month range.
pub fn q3_posts_per_month(warehouse: &Warehouse, list_id: &str) -> Vec<MonthBucket> {
    let Some((lo, hi)) = warehouse.month_range() else {
        return Vec::new();
    };
    let mut histogram: BTreeMap<YearMonth, u64> = YearMonth::range_inclusive(lo, hi)
        .into_iter()
        .map(|m| (m, 0))
        .collect();
    let mut any = false;
    for msg in warehouse.list_messages(list_id) {
        any = true;
        *histogram
            .entry(YearMonth::from_datetime(&msg.date))
            .or_insert(0) += 1;
    }
    if !any {
        return Vec::new();
    }
    histogram
        .into_iter()
        .map(|(month, count)| MonthBucket { month, count })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextField {
    Subject,
    Body,
}

/// Q4: case-insensitive substring filter over subjects or bodies of
/// one list, ordered by date.
pub fn q4_fulltext<'a>(
    warehouse: &'a Warehouse,
    list_id: &str,
    needle: &str,
    field: TextField,
) -> Vec<&'a MessageNode> {
    let needle = needle.to_lowercase();
    let mut hits: Vec<&MessageNode> = warehouse
        .list_messages(list_id)
        .filter(|msg| {
            let haystack = match field {
                TextField::Subject => &msg.subject,
                TextField::Body => &msg.body,
            };
            haystack.to_lowercase().contains(&needle)
        })
        .collect();
    hits.sort_by(|a, b| (a.date, &a.message_id).cmp(&(b.date, &b.message_id)));
    hits
}

/// Q5: monthly posting series per address of one actor. Direct posts
/// key (address, direct); gateway-recovered posts key (gateway address,
/// marker). Series sums equal the actor's Q1 total with recovered
/// counting on.
pub fn q5_email_timeline(warehouse: &Warehouse, actor_id: &str) -> EmailTimeline {
    let mut timeline = EmailTimeline {
        actor_id: actor_id.to_string(),
        series: BTreeMap::new(),
    };
    let Some(actor) = warehouse.actor(actor_id) else {
        return timeline;
    };
    let Some((lo, hi)) = warehouse.month_range() else {
        return timeline;
    };

    let mut raw: BTreeMap<(EmailAddress, SeriesKind), BTreeMap<YearMonth, u64>> = BTreeMap::new();
    for msg in warehouse.messages() {
        let month = YearMonth::from_datetime(&msg.date);
        let key = if let Some(first) = msg.recovered.first() {
            if actor.emails.contains(&first.email) {
                Some((msg.sender.clone(), SeriesKind::Recovered(first.marker)))
            } else {
                None
            }
        } else if actor.emails.contains(&msg.sender) {
            Some((msg.sender.clone(), SeriesKind::Direct))
        } else {
            None
        };
        if let Some(key) = key {
            *raw.entry(key).or_default().entry(month).or_insert(0) += 1;
        }
    }

    for (key, histogram) in raw {
        let buckets = YearMonth::range_inclusive(lo, hi)
            .into_iter()
            .map(|month| MonthBucket {
                month,
                count: histogram.get(&month).copied().unwrap_or(0),
            })
            .collect();
        timeline.series.insert(key, buckets);
    }
    timeline
}

/// Q6: top-N posting institutions, counted by registrable sender
/// domain with the manual domain map as an overlay.
pub fn q6_posts_per_institution(
    warehouse: &Warehouse,
    top_n: usize,
    domain_map: &DomainMap,
    suffixes: &SuffixList,
) -> Vec<(String, u64)> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for msg in warehouse.messages() {
        let domain = suffixes.registrable(msg.sender.domain());
        let label = domain_map.resolve(domain).label().to_string();
        *counts.entry(label).or_insert(0) += 1;
    }
    let mut rows: Vec<(String, u64)> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    rows.truncate(top_n);
    rows
}
