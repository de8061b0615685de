//! Mapping email domains and free-text institution names to canonical
//! institutions, and deriving dated affiliations from posting history.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{EmailAddress, Function, Warehouse, YearMonth};

/// Public-suffix set used to collapse a full domain to its registrable
/// part. Configurable; the default covers the common generic TLDs plus
/// frequent two-level suffixes.
#[derive(Debug, Clone)]
pub struct SuffixList {
    suffixes: BTreeSet<String>,
}

const DEFAULT_SUFFIXES: &[&str] = &[
    "biz", "com", "edu", "gov", "info", "int", "mil", "name", "net", "org",
    "ac.uk", "co.uk", "gov.uk", "me.uk", "org.uk",
    "ac.jp", "co.jp", "ne.jp", "or.jp",
    "com.au", "edu.au", "org.au",
    "ac.nz", "co.nz",
    "co.in", "com.br", "com.cn",
];

impl Default for SuffixList {
    fn default() -> Self {
        SuffixList {
            suffixes: DEFAULT_SUFFIXES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SuffixList {
    /// One suffix per line; blank lines and `#` comments ignored.
    pub fn from_lines(text: &str) -> Self {
        let suffixes = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.trim_start_matches('.').to_lowercase())
            .collect();
        SuffixList { suffixes }
    }

    /// Collapses to the registrable domain: the longest matching public
    /// suffix plus one label. Unmatched domains are returned whole.
    pub fn registrable<'a>(&self, domain: &'a str) -> &'a str {
        let labels: Vec<&str> = domain.split('.').collect();
        // longest suffix first
        for take in (1..labels.len()).rev() {
            let suffix = labels[labels.len() - take..].join(".");
            if self.suffixes.contains(&suffix) {
                let from = labels.len() - take - 1;
                let offset: usize = labels[..from].iter().map(|l| l.len() + 1).sum();
                return &domain[offset..];
            }
        }
        domain
    }
}

/// Full domain after '@', lowercased (addresses are already canonical).
pub fn email_domain(email: &EmailAddress) -> &str {
    email.domain()
}

/// Registrable domain of the sender address.
pub fn registrable_email_domain<'a>(email: &'a EmailAddress, suffixes: &SuffixList) -> &'a str {
    suffixes.registrable(email.domain())
}

fn name_key(name: &str) -> String {
    name.to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric())
        .collect()
}

/// Case- and punctuation-insensitive lookup from spelled variants to
/// canonical institution names.
#[derive(Debug, Clone, Default)]
pub struct AliasTable {
    canonical_by_key: BTreeMap<String, String>,
}

impl AliasTable {
    /// Loads `variant,canonical` lines. Canonical names map to themselves
    /// so normalization is idempotent.
    pub fn from_csv(text: &str) -> Self {
        let mut table = AliasTable::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((variant, canonical)) = line.split_once(',') {
                table.insert(variant.trim(), canonical.trim());
            }
        }
        table
    }

    pub fn insert(&mut self, variant: &str, canonical: &str) {
        self.canonical_by_key
            .insert(name_key(variant), canonical.to_string());
        self.canonical_by_key
            .entry(name_key(canonical))
            .or_insert_with(|| canonical.to_string());
    }

    /// Canonical name for a spelled variant; unmatched names come back
    /// unchanged.
    pub fn normalize<'a>(&'a self, name: &'a str) -> &'a str {
        match self.canonical_by_key.get(&name_key(name)) {
            Some(canonical) => canonical,
            None => name,
        }
    }

    /// Like `normalize`, recording unmatched names for the caller's log.
    pub fn normalize_logged<'a>(
        &'a self,
        name: &'a str,
        unmatched: &mut BTreeSet<String>,
    ) -> &'a str {
        if !self.canonical_by_key.contains_key(&name_key(name)) {
            unmatched.insert(name.to_string());
        }
        self.normalize(name)
    }
}

/// Where a domain resolved: a mapped institution id, or a synthetic bucket
/// named by the domain itself.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DomainResolution {
    Institution(String),
    Bucket(String),
}

impl DomainResolution {
    pub fn label(&self) -> &str {
        match self {
            DomainResolution::Institution(id) => id,
            DomainResolution::Bucket(domain) => domain,
        }
    }
}

/// Manual `domain -> institution id` overlay.
#[derive(Debug, Clone, Default)]
pub struct DomainMap {
    institution_by_domain: BTreeMap<String, String>,
}

impl DomainMap {
    /// Loads `domain,institutionId` lines.
    pub fn from_csv(text: &str) -> Self {
        let mut map = DomainMap::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((domain, id)) = line.split_once(',') {
                map.institution_by_domain
                    .insert(domain.trim().to_lowercase(), id.trim().to_string());
            }
        }
        map
    }

    pub fn insert(&mut self, domain: &str, institution_id: &str) {
        self.institution_by_domain
            .insert(domain.to_lowercase(), institution_id.to_string());
    }

    /// Total: every domain yields an institution or its own bucket.
    pub fn resolve(&self, domain: &str) -> DomainResolution {
        let domain = domain.to_lowercase();
        match self.institution_by_domain.get(&domain) {
            Some(id) => DomainResolution::Institution(id.clone()),
            None => DomainResolution::Bucket(domain),
        }
    }
}

/// One dated affiliation derived from an address's posting history.
/// Overlapping intervals are kept and flagged fuzzy rather than resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affiliation {
    pub actor: String,
    pub address: EmailAddress,
    pub target: DomainResolution,
    pub start: YearMonth,
    pub end: YearMonth,
    pub fuzzy: bool,
}

impl Affiliation {
    pub fn to_function(&self, role: &str) -> Function {
        Function {
            actor: self.actor.clone(),
            institution: self.target.label().to_string(),
            role: role.to_string(),
            interval: Some(crate::model::DateInterval {
                start: self.start.first_day(),
                end: Some(self.end.first_day()),
            }),
        }
    }
}

/// Computes first/last posting month per address of the actor and emits
/// one dated affiliation per domain. An actor with zero posts yields an
/// empty list.
pub fn build_affiliation_timeline(
    warehouse: &Warehouse,
    actor_id: &str,
    domain_map: &DomainMap,
    suffixes: &SuffixList,
) -> Vec<Affiliation> {
    let Some(actor) = warehouse.actor(actor_id) else {
        return Vec::new();
    };
    let mut span_by_address: BTreeMap<&EmailAddress, (YearMonth, YearMonth)> = BTreeMap::new();
    for msg in warehouse.messages() {
        if actor.emails.contains(&msg.sender) {
            let month = YearMonth::from_datetime(&msg.date);
            let owned = actor.emails.get(&msg.sender).expect("contained");
            span_by_address
                .entry(owned)
                .and_modify(|(lo, hi)| {
                    *lo = (*lo).min(month);
                    *hi = (*hi).max(month);
                })
                .or_insert((month, month));
        }
    }

    let mut affiliations: Vec<Affiliation> = span_by_address
        .into_iter()
        .map(|(address, (start, end))| Affiliation {
            actor: actor_id.to_string(),
            address: address.clone(),
            target: domain_map.resolve(suffixes.registrable(address.domain())),
            start,
            end,
            fuzzy: false,
        })
        .collect();

    // genuine multi-positioning vs. transition is not auto-resolved
    let spans: Vec<(YearMonth, YearMonth)> =
        affiliations.iter().map(|a| (a.start, a.end)).collect();
    for (i, affiliation) in affiliations.iter_mut().enumerate() {
        affiliation.fuzzy = spans
            .iter()
            .enumerate()
            .any(|(j, (lo, hi))| j != i && *lo < affiliation.end && affiliation.start < *hi);
    }
    affiliations.sort_by(|a, b| (a.start, &a.address).cmp(&(b.start, &b.address)));
    affiliations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Actor, MessageNode, PersonName, Thread};
    use chrono::{TimeZone, Utc};

    #[test]
    fn full_and_registrable_domain() {
        let email = EmailAddress::parse("don@us.ibm.com").unwrap();
        assert_eq!(email_domain(&email), "us.ibm.com");
        assert_eq!(
            registrable_email_domain(&email, &SuffixList::default()),
            "ibm.com"
        );
    }

    #[test]
    fn minimal_domain_kept() {
        let email = EmailAddress::parse("a@b").unwrap();
        assert_eq!(email_domain(&email), "b");
        assert_eq!(SuffixList::default().registrable("b"), "b");
    }

    #[test]
    fn two_level_suffix_collapse() {
        let suffixes = SuffixList::default();
        assert_eq!(suffixes.registrable("cogsci.ed.ac.uk"), "ed.ac.uk");
        assert_eq!(suffixes.registrable("mhk.me.uk"), "mhk.me.uk");
        assert_eq!(suffixes.registrable("w3.org"), "w3.org");
    }

    #[test]
    fn random_addresses_domain_is_suffix_after_at() {
        // oracle: plain string split
        for i in 0..100 {
            let raw = format!("user{i}@host{i}.sub{i}.example{i}.com");
            let email = EmailAddress::parse(&raw).unwrap();
            let oracle = raw.split('@').nth(1).unwrap().to_lowercase();
            assert_eq!(email_domain(&email), oracle);
            assert!(oracle.ends_with(email_domain(&email)));
        }
    }

    #[test]
    fn alias_lookup_is_punctuation_insensitive() {
        let table = AliasTable::from_csv("Sun Microsystems Inc.,Sun\nMassachusetts Institute of Technology,MIT\n");
        assert_eq!(table.normalize("Sun Microsystems Inc."), "Sun");
        assert_eq!(table.normalize("sun microsystems, inc"), "Sun");
        assert_eq!(table.normalize("MIT"), "MIT");
        assert_eq!(table.normalize("Unknown Corp"), "Unknown Corp");
    }

    #[test]
    fn normalize_is_idempotent_over_table_walk() {
        // 10 canonicals, 50 spelled variants
        let mut csv = String::new();
        let canonicals: Vec<String> = (0..10).map(|i| format!("Canonical{i}")).collect();
        let mut variants = Vec::new();
        for (i, canonical) in canonicals.iter().enumerate() {
            for v in 0..5 {
                let variant = format!("The canonical-{i} Corp. v{v}");
                csv.push_str(&format!("{variant},{canonical}\n"));
                variants.push(variant);
            }
        }
        let table = AliasTable::from_csv(&csv);
        for variant in &variants {
            let once = table.normalize(variant).to_string();
            assert!(canonicals.contains(&once), "variant {variant:?} missed");
            assert_eq!(table.normalize(&once), once);
        }
    }

    #[test]
    fn mapped_and_unmapped_domains() {
        let mut map = DomainMap::default();
        map.insert("cerisent.com", "mark-logic");
        assert_eq!(
            map.resolve("cerisent.com"),
            DomainResolution::Institution("mark-logic".into())
        );
        assert_eq!(
            map.resolve("hotmail.com"),
            DomainResolution::Bucket("hotmail.com".into())
        );
        assert_eq!(
            DomainMap::default().resolve("anything.net"),
            DomainResolution::Bucket("anything.net".into())
        );
    }

    fn month_msg(id: &str, email: &str, year: i32, month: u32) -> MessageNode {
        MessageNode::new(
            id,
            "l",
            EmailAddress::parse(email).unwrap(),
            Utc.with_ymd_and_hms(year, month, 10, 12, 0, 0).unwrap(),
            "s",
            "",
        )
    }

    fn timeline_warehouse(posts: &[(&str, &str, i32, u32)]) -> Warehouse {
        let mut w = Warehouse::default();
        let mut actor = Actor::new(
            "kay-michael",
            PersonName::new(Some("Michael"), "Kay"),
            EmailAddress::parse(posts[0].1).unwrap(),
        );
        for (_, email, _, _) in posts {
            actor.emails.insert(EmailAddress::parse(email).unwrap());
        }
        w.actors.push(actor);
        let threads = posts
            .iter()
            .map(|(id, email, y, m)| Thread {
                list_id: "l".into(),
                root: month_msg(id, email, *y, *m),
            })
            .collect();
        w.lists.insert("l".into(), threads);
        w
    }

    #[test]
    fn abutting_switchover_recovered() {
        let w = timeline_warehouse(&[
            ("m1", "michael.kay@softwareag.com", 2003, 6),
            ("m2", "michael.kay@softwareag.com", 2004, 2),
            ("m3", "mhk@mhk.me.uk", 2004, 2),
            ("m4", "mhk@mhk.me.uk", 2005, 4),
        ]);
        let timeline = build_affiliation_timeline(
            &w,
            "kay-michael",
            &DomainMap::default(),
            &SuffixList::default(),
        );
        assert_eq!(timeline.len(), 2);
        assert_eq!(timeline[0].target.label(), "softwareag.com");
        assert_eq!(timeline[0].end, YearMonth::new(2004, 2));
        assert_eq!(timeline[1].target.label(), "mhk.me.uk");
        assert_eq!(timeline[1].start, YearMonth::new(2004, 2));
    }

    #[test]
    fn single_address_single_month() {
        let w = timeline_warehouse(&[("m1", "a@x.com", 2004, 2)]);
        let timeline = build_affiliation_timeline(
            &w,
            "kay-michael",
            &DomainMap::default(),
            &SuffixList::default(),
        );
        assert_eq!(timeline.len(), 1);
        assert_eq!(timeline[0].start, timeline[0].end);
        assert!(!timeline[0].fuzzy);
    }

    #[test]
    fn planted_intervals_recovered_exactly() {
        // three addresses with known planted month spans
        let posts = [
            ("m1", "a@one.com", 2002, 3),
            ("m2", "a@one.com", 2002, 11),
            ("m3", "b@two.com", 2003, 1),
            ("m4", "b@two.com", 2003, 9),
            ("m5", "c@three.com", 2003, 5),
            ("m6", "c@three.com", 2004, 6),
        ];
        let w = timeline_warehouse(&posts);
        let timeline = build_affiliation_timeline(
            &w,
            "kay-michael",
            &DomainMap::default(),
            &SuffixList::default(),
        );
        // oracle: min/max of planted dates per address
        let expect = |domain: &str| {
            let months: Vec<YearMonth> = posts
                .iter()
                .filter(|(_, e, _, _)| e.ends_with(domain))
                .map(|(_, _, y, m)| YearMonth::new(*y, *m))
                .collect();
            (
                *months.iter().min().unwrap(),
                *months.iter().max().unwrap(),
            )
        };
        assert_eq!(timeline.len(), 3);
        for affiliation in &timeline {
            let (lo, hi) = expect(affiliation.target.label());
            assert_eq!((affiliation.start, affiliation.end), (lo, hi));
        }
        // two/three overlap in 2003-05..2003-09: both fuzzy, one.com not
        assert!(!timeline[0].fuzzy);
        assert!(timeline[1].fuzzy);
        assert!(timeline[2].fuzzy);
    }

    #[test]
    fn zero_post_actor_yields_empty_timeline() {
        let mut w = Warehouse::default();
        w.actors.push(Actor::new(
            "quiet",
            PersonName::new(None, "Quiet"),
            EmailAddress::parse("q@x.com").unwrap(),
        ));
        assert!(build_affiliation_timeline(
            &w,
            "quiet",
            &DomainMap::default(),
            &SuffixList::default()
        )
        .is_empty());
    }
}
