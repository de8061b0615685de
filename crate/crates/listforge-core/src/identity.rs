//! Resolving email addresses to physical actors: name parsing, actor key
//! assignment, merge proposals (never auto-applied), and recovery of
//! sender identities hidden in gateway message bodies.

use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use regex::Regex;

use crate::error::{IdentityError, ModelError};
use crate::ingest::ParsedMessage;
use crate::model::{
    Actor, EmailAddress, HiddenMarker, HiddenSender, MessageNode, PersonName, Warehouse,
};

/// Parses a display name into its structured parts.
///
/// Two-token names resolve as "FirstName LastName" unless the first token
/// is all-uppercase or the comma form ("LastName, FirstName") is used,
/// which flips the order. With three or more tokens the first becomes the
/// firstname, the last the lastname, and the rest middlenames.
pub fn parse_person_name(display: &str) -> Result<PersonName, ModelError> {
    let display = display.trim();
    if display.is_empty() {
        return Err(ModelError::EmptyName);
    }

    if let Some((last, rest)) = display.split_once(',') {
        let mut tokens = rest.split_whitespace();
        let firstname = tokens.next().map(|s| s.to_string());
        let middlenames = tokens.map(|s| s.to_string()).collect();
        return Ok(PersonName {
            lastname: last.trim().to_string(),
            firstname,
            middlenames,
        });
    }

    let tokens: Vec<&str> = display.split_whitespace().collect();
    Ok(match tokens.as_slice() {
        [only] => PersonName {
            lastname: only.to_string(),
            firstname: None,
            middlenames: Vec::new(),
        },
        [first, last] => {
            let flipped = first.len() > 1 && first.chars().all(|c| c.is_uppercase());
            if flipped {
                PersonName::new(Some(last), first)
            } else {
                PersonName::new(Some(first), last)
            }
        }
        [first, middle @ .., last] => PersonName {
            lastname: last.to_string(),
            firstname: Some(first.to_string()),
            middlenames: middle.iter().map(|s| s.to_string()).collect(),
        },
        [] => unreachable!("display is non-empty"),
    })
}

/// Name guessed from an email address, with a confidence flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameCandidate {
    pub name: PersonName,
    pub low_confidence: bool,
}

/// Local-part tokens that denote roles or software, not people.
const NON_PERSON_TOKENS: &[&str] = &[
    "admin", "bounce", "bugzilla", "contact", "daemon", "help", "info", "list", "mail",
    "mailer", "news", "noreply", "no-reply", "office", "owner", "postmaster", "request",
    "support", "webmaster", "www", "xquery", "xsl", "xml",
];

/// Splits the local part on '.', '_' and '-', title-cases the tokens, and
/// runs the result through the name parser. Low confidence when there are
/// fewer than two tokens or a token is a known non-person word.
pub fn derive_name_from_email(email: &EmailAddress) -> NameCandidate {
    let tokens: Vec<String> = email
        .local_part()
        .split(['.', '_', '-'])
        .filter(|t| !t.is_empty())
        .map(title_case)
        .collect();
    let low_confidence = tokens.len() < 2
        || tokens
            .iter()
            .any(|t| NON_PERSON_TOKENS.contains(&t.to_lowercase().as_str()));
    let display = tokens.join(" ");
    let name = parse_person_name(&display).unwrap_or_else(|_| PersonName {
        lastname: email.local_part().to_string(),
        firstname: None,
        middlenames: Vec::new(),
    });
    NameCandidate {
        name,
        low_confidence,
    }
}

fn title_case(token: &str) -> String {
    let mut chars = token.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars.flat_map(|c| c.to_lowercase())).collect(),
        None => String::new(),
    }
}

/// Canonical actor key: lowercase `lastname-firstname` with
/// non-alphanumerics stripped.
pub fn actor_key(name: &PersonName) -> String {
    let clean = |s: &str| -> String {
        s.to_lowercase()
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect()
    };
    let last = clean(&name.lastname);
    match &name.firstname {
        Some(first) if !clean(first).is_empty() => format!("{last}-{}", clean(first)),
        _ => last,
    }
}

/// Assigns a fresh actor id, suffixing -2, -3, ... on collision.
pub fn assign_actor_id(name: &PersonName, taken: &HashSet<String>) -> String {
    let base = actor_key(name);
    if !taken.contains(&base) {
        return base;
    }
    let mut n = 2;
    loop {
        let candidate = format!("{base}-{n}");
        if !taken.contains(&candidate) {
            return candidate;
        }
        n += 1;
    }
}

/// Creates actors for every sender address not yet owned. With homonym
/// keying enabled (the default), an address whose parsed name matches an
/// existing actor's full name is attached to that actor; strict mode
/// always creates a new actor instead.
pub fn enroll_senders(warehouse: &mut Warehouse, messages: &[ParsedMessage], strict_homonym: bool) {
    let mut ordered: Vec<&ParsedMessage> = messages.iter().collect();
    ordered.sort_by(|a, b| {
        (a.node.date, &a.node.message_id).cmp(&(b.node.date, &b.node.message_id))
    });
    let mut taken: HashSet<String> = warehouse.actors.iter().map(|a| a.id.clone()).collect();
    for msg in ordered {
        let email = &msg.node.sender;
        if warehouse.actor_by_email(email).is_some() {
            continue;
        }
        let name = msg
            .sender_display
            .as_deref()
            .and_then(|d| parse_person_name(d).ok())
            .unwrap_or_else(|| derive_name_from_email(email).name);
        if !strict_homonym && name.firstname.is_some() {
            if let Some(existing) = warehouse
                .actors
                .iter_mut()
                .find(|a| a.name.key() == name.key())
            {
                existing.emails.insert(email.clone());
                continue;
            }
        }
        let id = assign_actor_id(&name, &taken);
        taken.insert(id.clone());
        warehouse.actors.push(Actor::new(&id, name, email.clone()));
    }
    warehouse.canonicalize();
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeEvidence {
    SameName,
    BodyAnalysis,
    Manual,
}

impl MergeEvidence {
    pub fn as_str(self) -> &'static str {
        match self {
            MergeEvidence::SameName => "same-name",
            MergeEvidence::BodyAnalysis => "body-analysis",
            MergeEvidence::Manual => "manual",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeProposal {
    pub actor_a: String,
    pub actor_b: String,
    pub evidence: MergeEvidence,
    pub score: f64,
}

/// Proposes actor pairs that look like the same person: equal
/// (firstname, lastname) scores 1.0; equal lastname with a compatible
/// initial scores 0.5. Proposals are never applied automatically.
pub fn propose_merges(warehouse: &Warehouse) -> Vec<MergeProposal> {
    let mut actors: Vec<&Actor> = warehouse.actors.iter().collect();
    actors.sort_by(|a, b| a.id.cmp(&b.id));

    let mut proposals = Vec::new();
    for i in 0..actors.len() {
        for j in (i + 1)..actors.len() {
            let (a, b) = (actors[i], actors[j]);
            let score = if a.name.key() == b.name.key() {
                Some(1.0)
            } else if a.name.lastname == b.name.lastname
                && compatible_initial(a.name.firstname.as_deref(), b.name.firstname.as_deref())
            {
                Some(0.5)
            } else {
                None
            };
            if let Some(score) = score {
                proposals.push(MergeProposal {
                    actor_a: a.id.clone(),
                    actor_b: b.id.clone(),
                    evidence: MergeEvidence::SameName,
                    score,
                });
            }
        }
    }
    proposals
}

/// True when one firstname is an initial (one letter, optional dot) that
/// matches the other's first letter.
fn compatible_initial(a: Option<&str>, b: Option<&str>) -> bool {
    let (Some(a), Some(b)) = (a, b) else {
        return false;
    };
    let initial = |s: &str| s.chars().next().map(|c| c.to_lowercase().next().unwrap());
    let is_initial = |s: &str| s.trim_end_matches('.').chars().count() == 1;
    (is_initial(a) || is_initial(b)) && initial(a) == initial(b) && initial(a).is_some()
}

/// Merges `drop_id` into `keep_id`: emails become the union, functions are
/// re-pointed, and the dropped actor disappears. Thread documents are
/// never touched.
pub fn apply_merge(
    warehouse: &Warehouse,
    keep_id: &str,
    drop_id: &str,
) -> Result<Warehouse, IdentityError> {
    if keep_id == drop_id {
        return Err(IdentityError::SelfMerge(keep_id.to_string()));
    }
    if warehouse.actor(keep_id).is_none() {
        return Err(IdentityError::UnknownActor(keep_id.to_string()));
    }
    let dropped = warehouse
        .actor(drop_id)
        .ok_or_else(|| IdentityError::UnknownActor(drop_id.to_string()))?
        .clone();

    let mut merged = warehouse.clone();
    merged.actors.retain(|a| a.id != drop_id);
    let keeper = merged
        .actors
        .iter_mut()
        .find(|a| a.id == keep_id)
        .expect("keep actor present");
    keeper.emails.extend(dropped.emails);
    for function in &mut merged.functions {
        if function.actor == drop_id {
            function.actor = keep_id.to_string();
        }
    }
    merged.canonicalize();
    Ok(merged)
}

fn marker_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)\b(reported\s+by|comments?\s+from)\b[\s:]*<?([A-Za-z0-9._%+!#$&'*/=?^`{|}~-]+@[A-Za-z0-9.-]+)>?(?:[\s,;]*[\[(]?(\d{4}-\d{2}-\d{2}(?:[T ]\d{2}:\d{2}(?::\d{2})?Z?)?)[\])]?)?",
        )
        .expect("valid marker regex")
    })
}

fn parse_marker_date(text: &str) -> Option<DateTime<Utc>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(text.trim_end_matches('Z'), fmt) {
            return Some(dt.and_utc());
        }
    }
    text.parse::<NaiveDate>()
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc())
}

/// Scans a gateway message body for `reported by <email> [date]` and
/// `comment(s) from <email> [date]` markers. Read-only: the body is never
/// modified. Calling this on a non-gateway message is an error.
pub fn recover_hidden_senders(
    message: &MessageNode,
    gateway_addresses: &BTreeSet<EmailAddress>,
) -> Result<Vec<HiddenSender>, IdentityError> {
    if !gateway_addresses.contains(&message.sender) {
        return Err(IdentityError::NotGateway(message.message_id.clone()));
    }
    let mut found = Vec::new();
    for capture in marker_regex().captures_iter(&message.body) {
        let marker = if capture[1].to_lowercase().starts_with("reported") {
            HiddenMarker::ReportedBy
        } else {
            HiddenMarker::CommentsFrom
        };
        let Ok(email) = EmailAddress::parse(&capture[2]) else {
            continue;
        };
        let date = capture.get(3).and_then(|m| parse_marker_date(m.as_str()));
        found.push(HiddenSender {
            marker,
            email,
            date,
        });
    }
    Ok(found)
}

#[derive(Debug, Default)]
pub struct RecoveryStats {
    pub gateway_messages: usize,
    pub recovered: usize,
    /// Recovered addresses not owned by any actor; reported, never
    /// auto-created.
    pub unknown_addresses: BTreeSet<EmailAddress>,
}

/// Runs recovery over every gateway message in the warehouse, storing the
/// hits on the messages themselves. Bodies stay untouched.
pub fn recover_into_warehouse(
    warehouse: &mut Warehouse,
    gateway_addresses: &BTreeSet<EmailAddress>,
) -> RecoveryStats {
    let owned: BTreeSet<EmailAddress> = warehouse
        .actors
        .iter()
        .flat_map(|a| a.emails.iter().cloned())
        .collect();
    let mut stats = RecoveryStats::default();

    fn visit(
        node: &mut MessageNode,
        gateways: &BTreeSet<EmailAddress>,
        owned: &BTreeSet<EmailAddress>,
        stats: &mut RecoveryStats,
    ) {
        if gateways.contains(&node.sender) {
            stats.gateway_messages += 1;
            let found = recover_hidden_senders(node, gateways).expect("sender checked");
            for hit in &found {
                if !owned.contains(&hit.email) {
                    stats.unknown_addresses.insert(hit.email.clone());
                }
            }
            stats.recovered += found.len();
            node.recovered = found;
        }
        for child in &mut node.children {
            visit(child, gateways, owned, stats);
        }
    }

    for threads in warehouse.lists.values_mut() {
        for thread in threads {
            visit(&mut thread.root, gateway_addresses, &owned, &mut stats);
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn name(s: &str) -> PersonName {
        parse_person_name(s).unwrap()
    }

    #[test]
    fn two_token_default_order() {
        assert_eq!(name("Michael Kay"), PersonName::new(Some("Michael"), "Kay"));
    }

    #[test]
    fn comma_form_flips() {
        assert_eq!(name("Kay, Michael"), PersonName::new(Some("Michael"), "Kay"));
    }

    #[test]
    fn uppercase_first_token_flips() {
        assert_eq!(name("KAY Michael"), PersonName::new(Some("Michael"), "KAY"));
    }

    #[test]
    fn middle_names_collected() {
        let parsed = name("Ashok K Malhotra");
        assert_eq!(parsed.firstname.as_deref(), Some("Ashok"));
        assert_eq!(parsed.middlenames, vec!["K"]);
        assert_eq!(parsed.lastname, "Malhotra");
    }

    #[test]
    fn single_token_is_lastname() {
        let parsed = name("Bugzilla");
        assert_eq!(parsed.lastname, "Bugzilla");
        assert!(parsed.firstname.is_none());
    }

    #[test]
    fn empty_name_is_error() {
        assert!(parse_person_name("   ").is_err());
    }

    #[test]
    fn parse_is_idempotent_on_rendered_output() {
        for input in ["Michael Kay", "Kay, Michael", "KAY Michael", "Ashok K Malhotra", "Bugzilla"] {
            let once = name(input);
            let twice = name(&once.display());
            assert_eq!(once, twice, "not idempotent for {input:?}");
        }
    }

    #[test]
    fn derive_from_dotted_local_part() {
        let email = EmailAddress::parse("michael.kay@softwareag.com").unwrap();
        let candidate = derive_name_from_email(&email);
        assert_eq!(candidate.name, PersonName::new(Some("Michael"), "Kay"));
        assert!(!candidate.low_confidence);
    }

    #[test]
    fn derive_single_token_is_low_confidence() {
        let email = EmailAddress::parse("don@us.ibm.com").unwrap();
        let candidate = derive_name_from_email(&email);
        assert_eq!(candidate.name.lastname, "Don");
        assert!(candidate.low_confidence);
    }

    #[test]
    fn derive_non_person_token_is_low_confidence() {
        let email = EmailAddress::parse("xquery@us.ibm.com").unwrap();
        let candidate = derive_name_from_email(&email);
        // oracle: token is in the non-person dictionary
        assert!(NON_PERSON_TOKENS.contains(&"xquery"));
        assert!(candidate.low_confidence);
    }

    #[test]
    fn actor_keys_strip_and_suffix() {
        let kay = PersonName::new(Some("Michael"), "Kay");
        assert_eq!(actor_key(&kay), "kay-michael");
        let mut taken = HashSet::new();
        taken.insert("kay-michael".to_string());
        assert_eq!(assign_actor_id(&kay, &taken), "kay-michael-2");
        let odd = PersonName::new(Some("Jean-Luc"), "O'Brien");
        assert_eq!(actor_key(&odd), "obrien-jeanluc");
    }

    fn warehouse_with(names: &[(&str, &str, &str)]) -> Warehouse {
        // (id, display name, email)
        let mut w = Warehouse::default();
        for (id, display, email) in names {
            w.actors.push(Actor::new(
                id,
                parse_person_name(display).unwrap(),
                EmailAddress::parse(email).unwrap(),
            ));
        }
        w
    }

    #[test]
    fn same_name_pair_proposed_once() {
        let w = warehouse_with(&[
            ("chamberlin-don", "Don Chamberlin", "don@us.ibm.com"),
            ("chamberlin-don-2", "Don Chamberlin", "xquery@us.ibm.com"),
        ]);
        let proposals = propose_merges(&w);
        assert_eq!(proposals.len(), 1);
        assert_eq!(proposals[0].score, 1.0);
        assert_eq!(proposals[0].evidence, MergeEvidence::SameName);
    }

    #[test]
    fn single_actor_no_proposals() {
        let w = warehouse_with(&[("kay-michael", "Michael Kay", "mhk@mhk.me.uk")]);
        assert!(propose_merges(&w).is_empty());
    }

    #[test]
    fn proposal_count_matches_pairwise_oracle_and_is_order_independent() {
        let mut w = warehouse_with(&[
            ("a", "Don Chamberlin", "a@x.com"),
            ("b", "Don Chamberlin", "b@x.com"),
            ("c", "Michael Kay", "c@x.com"),
            ("d", "Michael Kay", "d@x.com"),
            ("e", "Dana Florescu", "e@x.com"),
            ("f", "D. Florescu", "f@x.com"),
        ]);
        // oracle: brute-force pairwise name comparison
        let mut exact = 0;
        for i in 0..w.actors.len() {
            for j in (i + 1)..w.actors.len() {
                if w.actors[i].name.key() == w.actors[j].name.key() {
                    exact += 1;
                }
            }
        }
        assert_eq!(exact, 2);

        let forward = propose_merges(&w);
        assert_eq!(forward.iter().filter(|p| p.score == 1.0).count(), exact);
        assert_eq!(forward.iter().filter(|p| p.score == 0.5).count(), 1);
        assert!(forward.iter().all(|p| p.actor_a != p.actor_b));

        w.actors.reverse();
        let backward = propose_merges(&w);
        assert_eq!(forward, backward);
    }

    #[test]
    fn merge_unions_emails_and_repoints_functions() {
        let mut w = warehouse_with(&[
            ("chamberlin-don", "Don Chamberlin", "don@us.ibm.com"),
            ("chamberlin-don-2", "Don Chamberlin", "xquery@us.ibm.com"),
        ]);
        w.institutions.push(crate::model::Institution::new("ibm", "IBM"));
        w.functions.push(crate::model::Function {
            actor: "chamberlin-don-2".into(),
            institution: "ibm".into(),
            role: "researcher".into(),
            interval: None,
        });
        let merged = apply_merge(&w, "chamberlin-don", "chamberlin-don-2").unwrap();
        assert_eq!(merged.actors.len(), 1);
        assert_eq!(merged.actors[0].emails.len(), 2);
        assert_eq!(merged.functions[0].actor, "chamberlin-don");

        // total email-address count is conserved
        let before: usize = w.actors.iter().map(|a| a.emails.len()).sum();
        let after: usize = merged.actors.iter().map(|a| a.emails.len()).sum();
        assert_eq!(before, after);
    }

    #[test]
    fn merge_with_self_rejected() {
        let w = warehouse_with(&[("a", "Don Chamberlin", "a@x.com")]);
        assert!(matches!(
            apply_merge(&w, "a", "a"),
            Err(IdentityError::SelfMerge(_))
        ));
    }

    #[test]
    fn merge_unknown_id_rejected() {
        let w = warehouse_with(&[("a", "Don Chamberlin", "a@x.com")]);
        assert!(matches!(
            apply_merge(&w, "a", "ghost"),
            Err(IdentityError::UnknownActor(_))
        ));
    }

    fn gateway_set() -> BTreeSet<EmailAddress> {
        [EmailAddress::parse("bugzilla@w3.org").unwrap()]
            .into_iter()
            .collect()
    }

    fn gateway_message(body: &str) -> MessageNode {
        MessageNode::new(
            "m1",
            "l",
            EmailAddress::parse("bugzilla@w3.org").unwrap(),
            Utc.with_ymd_and_hms(2005, 4, 1, 0, 0, 0).unwrap(),
            "bug 42",
            body,
        )
    }

    #[test]
    fn reported_by_marker_recovered() {
        let msg = gateway_message("Some text\nReported by mhk@mhk.me.uk\nmore");
        let found = recover_hidden_senders(&msg, &gateway_set()).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].marker, HiddenMarker::ReportedBy);
        assert_eq!(found[0].email.as_str(), "mhk@mhk.me.uk");
    }

    #[test]
    fn non_gateway_message_is_precondition_violation() {
        let mut msg = gateway_message("Reported by a@b.com");
        msg.sender = EmailAddress::parse("human@example.com").unwrap();
        assert!(matches!(
            recover_hidden_senders(&msg, &gateway_set()),
            Err(IdentityError::NotGateway(_))
        ));
    }

    #[test]
    fn planted_markers_all_recovered_in_order() {
        let body = "Reported by one@x.com 2005-04-02\nblah\nreported by: <two@x.com>\nComment from three@x.com [2005-04-03]\n";
        let msg = gateway_message(body);
        let found = recover_hidden_senders(&msg, &gateway_set()).unwrap();
        // oracle: hand-count of planted markers
        assert_eq!(found.len(), 3);
        assert_eq!(found[0].email.as_str(), "one@x.com");
        assert_eq!(found[0].marker, HiddenMarker::ReportedBy);
        assert_eq!(
            found[0].date,
            Some(Utc.with_ymd_and_hms(2005, 4, 2, 0, 0, 0).unwrap())
        );
        assert_eq!(found[1].email.as_str(), "two@x.com");
        assert_eq!(found[2].marker, HiddenMarker::CommentsFrom);
        assert_eq!(
            found[2].date,
            Some(Utc.with_ymd_and_hms(2005, 4, 3, 0, 0, 0).unwrap())
        );
        // body untouched
        assert_eq!(msg.body, body);
    }

    #[test]
    fn zero_hits_is_valid() {
        let msg = gateway_message("nothing of interest here");
        let found = recover_hidden_senders(&msg, &gateway_set()).unwrap();
        assert!(found.is_empty());
    }
}
