//! Domain types for the warehouse: actors, institutions, functions, and
//! the recursive message/thread structure.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, Utc};

use crate::error::ModelError;

/// A canonical (lowercase) email address of the form `local@domain`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EmailAddress(String);

impl EmailAddress {
    /// Parses and canonicalizes an address. Both the local part and the
    /// domain are lowercased so that addresses compare as identifiers.
    pub fn parse(raw: &str) -> Result<Self, ModelError> {
        let trimmed = raw.trim();
        let mut parts = trimmed.splitn(2, '@');
        let local = parts.next().unwrap_or("");
        let domain = parts.next().unwrap_or("");
        if local.is_empty() || domain.is_empty() || domain.contains('@') {
            return Err(ModelError::InvalidEmail(raw.to_string()));
        }
        Ok(EmailAddress(trimmed.to_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn local_part(&self) -> &str {
        self.0.split('@').next().unwrap_or("")
    }

    pub fn domain(&self) -> &str {
        self.0.split('@').nth(1).unwrap_or("")
    }
}

impl fmt::Display for EmailAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for EmailAddress {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EmailAddress::parse(s)
    }
}

/// Structured person name; only the last name is compulsory.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct PersonName {
    pub lastname: String,
    pub firstname: Option<String>,
    pub middlenames: Vec<String>,
}

impl PersonName {
    pub fn new(firstname: Option<&str>, lastname: &str) -> Self {
        PersonName {
            lastname: lastname.to_string(),
            firstname: firstname.map(|s| s.to_string()),
            middlenames: Vec::new(),
        }
    }

    /// Renders as "Firstname Middlenames Lastname".
    pub fn display(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        if let Some(first) = &self.firstname {
            parts.push(first);
        }
        for middle in &self.middlenames {
            parts.push(middle);
        }
        parts.push(&self.lastname);
        parts.join(" ")
    }

    /// (firstname, lastname) pair used for same-name comparisons.
    pub fn key(&self) -> (Option<&str>, &str) {
        (self.firstname.as_deref(), &self.lastname)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sex {
    Female,
    Male,
}

impl Sex {
    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Female => "female",
            Sex::Male => "male",
        }
    }

    pub fn parse(s: &str) -> Option<Sex> {
        match s.trim().to_lowercase().as_str() {
            "female" | "f" => Some(Sex::Female),
            "male" | "m" => Some(Sex::Male),
            _ => None,
        }
    }
}

/// A physical person. The two primary characteristics are a non-empty
/// email set and a name with a non-empty last name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Actor {
    pub id: String,
    pub name: PersonName,
    pub emails: BTreeSet<EmailAddress>,
    pub sex: Option<Sex>,
    pub birth_date: Option<NaiveDate>,
    pub diplomas: Vec<String>,
    pub skills: Vec<String>,
    /// Raw XML of unknown optional elements, kept only when the store is
    /// read in preserve-extensions mode.
    pub extensions: Vec<String>,
}

impl Actor {
    pub fn new(id: &str, name: PersonName, email: EmailAddress) -> Self {
        let mut emails = BTreeSet::new();
        emails.insert(email);
        Actor {
            id: id.to_string(),
            name,
            emails,
            sex: None,
            birth_date: None,
            diplomas: Vec::new(),
            skills: Vec::new(),
            extensions: Vec::new(),
        }
    }
}

/// Canonical organization with spelling aliases and associated email domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Institution {
    pub id: String,
    pub canonical_name: String,
    pub aliases: BTreeSet<String>,
    pub domains: BTreeSet<String>,
}

impl Institution {
    pub fn new(id: &str, canonical_name: &str) -> Self {
        Institution {
            id: id.to_string(),
            canonical_name: canonical_name.to_string(),
            aliases: BTreeSet::new(),
            domains: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DateInterval {
    pub start: NaiveDate,
    pub end: Option<NaiveDate>,
}

/// The relationship entity: a dated (actor, institution, role) link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub actor: String,
    pub institution: String,
    pub role: String,
    pub interval: Option<DateInterval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HiddenMarker {
    ReportedBy,
    CommentsFrom,
}

impl HiddenMarker {
    pub fn as_str(self) -> &'static str {
        match self {
            HiddenMarker::ReportedBy => "reported-by",
            HiddenMarker::CommentsFrom => "comments-from",
        }
    }

    pub fn parse(s: &str) -> Option<HiddenMarker> {
        match s {
            "reported-by" => Some(HiddenMarker::ReportedBy),
            "comments-from" => Some(HiddenMarker::CommentsFrom),
            _ => None,
        }
    }
}

/// A sender identity recovered from the body of a gateway-relayed message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiddenSender {
    pub marker: HiddenMarker,
    pub email: EmailAddress,
    pub date: Option<DateTime<Utc>>,
}

/// One email with its replies nested as children. The body is raw text and
/// is never modified after ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageNode {
    pub message_id: String,
    pub list_id: String,
    pub sender: EmailAddress,
    pub date: DateTime<Utc>,
    pub subject: String,
    pub body: String,
    pub topics: Vec<String>,
    pub recovered: Vec<HiddenSender>,
    pub children: Vec<MessageNode>,
}

impl MessageNode {
    pub fn new(
        message_id: &str,
        list_id: &str,
        sender: EmailAddress,
        date: DateTime<Utc>,
        subject: &str,
        body: &str,
    ) -> Self {
        MessageNode {
            message_id: message_id.to_string(),
            list_id: list_id.to_string(),
            sender,
            date,
            subject: subject.to_string(),
            body: body.to_string(),
            topics: Vec::new(),
            recovered: Vec::new(),
            children: Vec::new(),
        }
    }

    /// Depth-first walk over this message and all its descendants.
    pub fn walk(&self) -> MessageWalk<'_> {
        MessageWalk { stack: vec![self] }
    }

    /// Total number of messages in this subtree, including self.
    pub fn count(&self) -> usize {
        self.walk().count()
    }

    /// Sorts children (recursively) by (date, messageId).
    pub fn sort_children(&mut self) {
        self.children
            .sort_by(|a, b| (a.date, &a.message_id).cmp(&(b.date, &b.message_id)));
        for child in &mut self.children {
            child.sort_children();
        }
    }
}

pub struct MessageWalk<'a> {
    stack: Vec<&'a MessageNode>,
}

impl<'a> Iterator for MessageWalk<'a> {
    type Item = &'a MessageNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        // push in reverse so children come out in order
        for child in node.children.iter().rev() {
            self.stack.push(child);
        }
        Some(node)
    }
}

/// A message tree rooted at a thread initiator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thread {
    pub list_id: String,
    pub root: MessageNode,
}

/// The validated aggregate over which every query runs. Immutable after
/// construction; enrichment replaces the whole value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Warehouse {
    pub actors: Vec<Actor>,
    pub institutions: Vec<Institution>,
    pub functions: Vec<Function>,
    pub lists: BTreeMap<String, Vec<Thread>>,
}

impl Warehouse {
    pub fn actor(&self, id: &str) -> Option<&Actor> {
        self.actors.iter().find(|a| a.id == id)
    }

    pub fn institution(&self, id: &str) -> Option<&Institution> {
        self.institutions.iter().find(|i| i.id == id)
    }

    pub fn actor_by_email(&self, email: &EmailAddress) -> Option<&Actor> {
        self.actors.iter().find(|a| a.emails.contains(email))
    }

    /// All messages of one list, in thread order.
    pub fn list_messages(&self, list_id: &str) -> impl Iterator<Item = &MessageNode> {
        self.lists
            .get(list_id)
            .into_iter()
            .flatten()
            .flat_map(|t| t.root.walk())
    }

    /// All messages of all lists.
    pub fn messages(&self) -> impl Iterator<Item = &MessageNode> {
        self.lists
            .values()
            .flatten()
            .flat_map(|t| t.root.walk())
    }

    pub fn message_count(&self) -> usize {
        self.messages().count()
    }

    /// Puts every collection into its canonical order: actors and
    /// institutions by id, functions by (actor, institution, role, start),
    /// threads by (root date, root id), children by (date, id).
    pub fn canonicalize(&mut self) {
        self.actors.sort_by(|a, b| a.id.cmp(&b.id));
        self.institutions.sort_by(|a, b| a.id.cmp(&b.id));
        self.functions.sort_by(|a, b| {
            (&a.actor, &a.institution, &a.role, a.interval.map(|i| i.start)).cmp(&(
                &b.actor,
                &b.institution,
                &b.role,
                b.interval.map(|i| i.start),
            ))
        });
        for threads in self.lists.values_mut() {
            for thread in threads.iter_mut() {
                thread.root.sort_children();
            }
            threads.sort_by(|a, b| {
                (a.root.date, &a.root.message_id).cmp(&(b.root.date, &b.root.message_id))
            });
        }
    }

    /// Earliest and latest message months over the whole corpus.
    pub fn month_range(&self) -> Option<(YearMonth, YearMonth)> {
        let mut range: Option<(YearMonth, YearMonth)> = None;
        for msg in self.messages() {
            let ym = YearMonth::from_datetime(&msg.date);
            range = Some(match range {
                None => (ym, ym),
                Some((lo, hi)) => (lo.min(ym), hi.max(ym)),
            });
        }
        range
    }
}

/// Calendar year-month bucket, rendered as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        YearMonth { year, month }
    }

    pub fn from_datetime(dt: &DateTime<Utc>) -> Self {
        YearMonth::new(dt.year(), dt.month())
    }

    pub fn from_date(d: &NaiveDate) -> Self {
        YearMonth::new(d.year(), d.month())
    }

    pub fn succ(self) -> Self {
        if self.month == 12 {
            YearMonth::new(self.year + 1, 1)
        } else {
            YearMonth::new(self.year, self.month + 1)
        }
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid year-month")
    }

    /// Inclusive range of months.
    pub fn range_inclusive(lo: YearMonth, hi: YearMonth) -> Vec<YearMonth> {
        let mut out = Vec::new();
        let mut cur = lo;
        while cur <= hi {
            out.push(cur);
            cur = cur.succ();
        }
        out
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InvalidYearMonth(s.to_string());
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        if !(1..=12).contains(&month) {
            return Err(bad());
        }
        Ok(YearMonth { year, month })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn email_canonicalizes_to_lowercase() {
        let e = EmailAddress::parse("Michael.Kay@SoftwareAG.com").unwrap();
        assert_eq!(e.as_str(), "michael.kay@softwareag.com");
        assert_eq!(e.domain(), "softwareag.com");
        assert_eq!(e.local_part(), "michael.kay");
    }

    #[test]
    fn email_rejects_malformed() {
        assert!(EmailAddress::parse("no-at-sign").is_err());
        assert!(EmailAddress::parse("a@").is_err());
        assert!(EmailAddress::parse("@b").is_err());
        assert!(EmailAddress::parse("a@b@c").is_err());
    }

    #[test]
    fn email_minimal_domain() {
        let e = EmailAddress::parse("a@b").unwrap();
        assert_eq!(e.domain(), "b");
    }

    #[test]
    fn person_name_display_round_trips_parts() {
        let name = PersonName {
            lastname: "Malhotra".into(),
            firstname: Some("Ashok".into()),
            middlenames: vec!["K".into()],
        };
        assert_eq!(name.display(), "Ashok K Malhotra");
    }

    #[test]
    fn year_month_formatting_and_parse() {
        let ym = YearMonth::new(2004, 2);
        assert_eq!(ym.to_string(), "2004-02");
        assert_eq!("2004-02".parse::<YearMonth>().unwrap(), ym);
        assert!("2004-13".parse::<YearMonth>().is_err());
        assert_eq!(ym.succ(), YearMonth::new(2004, 3));
        assert_eq!(YearMonth::new(2004, 12).succ(), YearMonth::new(2005, 1));
    }

    #[test]
    fn year_month_range() {
        let r = YearMonth::range_inclusive(YearMonth::new(2003, 11), YearMonth::new(2004, 2));
        let rendered: Vec<String> = r.iter().map(|m| m.to_string()).collect();
        assert_eq!(rendered, vec!["2003-11", "2003-12", "2004-01", "2004-02"]);
    }

    #[test]
    fn message_walk_visits_all_descendants() {
        let mut root = MessageNode::new(
            "m1",
            "l",
            EmailAddress::parse("a@b.com").unwrap(),
            Utc::now(),
            "s",
            "b",
        );
        let child = MessageNode::new(
            "m2",
            "l",
            EmailAddress::parse("c@d.com").unwrap(),
            Utc::now(),
            "s",
            "b",
        );
        root.children.push(child);
        assert_eq!(root.count(), 2);
        let ids: Vec<&str> = root.walk().map(|m| m.message_id.as_str()).collect();
        assert_eq!(ids, vec!["m1", "m2"]);
    }
}
