//! Archive ingestion: mbox / maildir parsing into raw messages, header
//! extraction, and reconstruction of the recursive thread forest.
//!
//! Every input message ends up either as a parsed message or in the
//! quarantine list; counts always sum to the input message count.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};

use crate::error::IngestError;
use crate::model::{EmailAddress, MessageNode, Thread};

/// One email as found in the archive, headers and body untouched apart
/// from charset decoding.
#[derive(Debug, Clone)]
pub struct RawMessage {
    pub headers: Vec<(String, String)>,
    pub body: String,
    pub source_list: String,
    pub byte_offset: usize,
}

impl RawMessage {
    /// Case-insensitive lookup of the first header with this name.
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuarantineRecord {
    pub source_list: String,
    pub byte_offset: usize,
    pub reason: String,
}

impl QuarantineRecord {
    fn new(source_list: &str, byte_offset: usize, reason: &str) -> Self {
        QuarantineRecord {
            source_list: source_list.to_string(),
            byte_offset,
            reason: reason.to_string(),
        }
    }
}

/// A childless message plus the reply metadata threading needs.
#[derive(Debug, Clone)]
pub struct ParsedMessage {
    pub node: MessageNode,
    pub in_reply_to: Option<String>,
    pub references: Vec<String>,
    pub sender_display: Option<String>,
    pub byte_offset: usize,
}

/// Splits an mbox-style stream ("From " separators) into raw messages.
/// Messages without a Message-ID header are quarantined, never dropped.
pub fn parse_archive(
    stream: &[u8],
    list_id: &str,
) -> Result<(Vec<RawMessage>, Vec<QuarantineRecord>), IngestError> {
    if stream.contains(&0) {
        return Err(IngestError::Undecodable(
            "stream contains NUL bytes".into(),
        ));
    }
    let text = decode(stream);

    let mut messages = Vec::new();
    let mut quarantine = Vec::new();
    for (offset, chunk) in split_mbox(&text) {
        match parse_single(chunk, list_id, offset) {
            Ok(raw) => messages.push(raw),
            Err(reason) => quarantine.push(QuarantineRecord::new(list_id, offset, &reason)),
        }
    }
    Ok((messages, quarantine))
}

/// Parses either an mbox file or a maildir-style directory of
/// one-message-per-file.
pub fn parse_archive_path(
    path: &Path,
    list_id: &str,
) -> Result<(Vec<RawMessage>, Vec<QuarantineRecord>), IngestError> {
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)
            .map_err(|e| IngestError::Io {
                path: path.to_path_buf(),
                source: e,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let mut messages = Vec::new();
        let mut quarantine = Vec::new();
        for (index, file) in files.iter().enumerate() {
            let bytes = fs::read(file).map_err(|e| IngestError::Io {
                path: file.clone(),
                source: e,
            })?;
            if bytes.contains(&0) {
                return Err(IngestError::Undecodable(format!(
                    "{} contains NUL bytes",
                    file.display()
                )));
            }
            let text = decode(&bytes);
            match parse_single(&text, list_id, index) {
                Ok(raw) => messages.push(raw),
                Err(reason) => quarantine.push(QuarantineRecord::new(list_id, index, &reason)),
            }
        }
        Ok((messages, quarantine))
    } else if path.is_file() {
        let bytes = fs::read(path).map_err(|e| IngestError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        parse_archive(&bytes, list_id)
    } else {
        Err(IngestError::MissingArchive(path.to_path_buf()))
    }
}

fn decode(bytes: &[u8]) -> String {
    let text = String::from_utf8_lossy(bytes);
    // drop control characters XML cannot carry; tab and line endings stay
    text.chars()
        .filter(|c| !c.is_control() || matches!(c, '\t' | '\n' | '\r'))
        .collect()
}

/// Yields (byte offset, message text) per "From " separator. A leading
/// chunk without a separator is treated as a single message.
fn split_mbox(text: &str) -> Vec<(usize, &str)> {
    let mut starts: Vec<usize> = Vec::new();
    if text.starts_with("From ") {
        starts.push(0);
    }
    let mut search = 0;
    while let Some(found) = text[search..].find("\nFrom ") {
        starts.push(search + found + 1);
        search += found + 1;
    }
    if starts.is_empty() {
        if text.trim().is_empty() {
            return Vec::new();
        }
        return vec![(0, text)];
    }
    let mut out = Vec::new();
    for (i, &start) in starts.iter().enumerate() {
        let end = starts.get(i + 1).copied().unwrap_or(text.len());
        out.push((start, &text[start..end]));
    }
    out
}

fn parse_single(chunk: &str, list_id: &str, offset: usize) -> Result<RawMessage, String> {
    let mut lines = chunk.lines().peekable();
    // skip the mbox "From " envelope line
    if lines.peek().is_some_and(|l| l.starts_with("From ")) {
        lines.next();
    }

    let mut headers: Vec<(String, String)> = Vec::new();
    for line in lines.by_ref() {
        if line.is_empty() {
            break;
        }
        if line.starts_with(' ') || line.starts_with('\t') {
            match headers.last_mut() {
                Some((_, value)) => {
                    value.push(' ');
                    value.push_str(line.trim());
                }
                None => return Err("malformed-header".into()),
            }
        } else {
            match line.split_once(':') {
                Some((name, value)) if !name.trim().is_empty() => {
                    headers.push((name.trim().to_string(), value.trim().to_string()));
                }
                _ => return Err("malformed-header".into()),
            }
        }
    }

    let mut body = String::new();
    for line in lines {
        // undo mboxrd-style quoting of body lines starting with "From "
        let line = line.strip_prefix('>').filter(|r| r.starts_with("From ")).unwrap_or(line);
        body.push_str(line);
        body.push('\n');
    }

    let raw = RawMessage {
        headers,
        body,
        source_list: list_id.to_string(),
        byte_offset: offset,
    };
    if raw.header("Message-ID").is_none() {
        return Err("missing-message-id".into());
    }
    Ok(raw)
}

/// Maps one raw message to a childless node. The body is stored verbatim;
/// the date is normalized to UTC. Failure reasons match the quarantine
/// vocabulary ("bad-date", "missing-from", ...).
pub fn to_message(raw: &RawMessage) -> Result<ParsedMessage, String> {
    let message_id = raw
        .header("Message-ID")
        .map(strip_angle_brackets)
        .ok_or("missing-message-id")?;
    let from = raw.header("From").ok_or("missing-from")?;
    let (sender, display) = parse_from(from).ok_or("bad-from")?;
    let date_header = raw.header("Date").ok_or("missing-date")?;
    let date = parse_rfc2822_utc(date_header).ok_or("bad-date")?;

    let node = MessageNode::new(
        &message_id,
        &raw.source_list,
        sender,
        date,
        raw.header("Subject").unwrap_or(""),
        &raw.body,
    );
    let in_reply_to = raw
        .header("In-Reply-To")
        .and_then(first_message_id);
    let references = raw
        .header("References")
        .map(|v| {
            v.split_whitespace()
                .map(strip_angle_brackets)
                .filter(|s| !s.is_empty())
                .collect()
        })
        .unwrap_or_default();
    Ok(ParsedMessage {
        node,
        in_reply_to,
        references,
        sender_display: display,
        byte_offset: raw.byte_offset,
    })
}

/// Converts a batch, splitting failures into quarantine records.
pub fn to_messages(
    raws: &[RawMessage],
) -> (Vec<ParsedMessage>, Vec<QuarantineRecord>) {
    let mut parsed = Vec::new();
    let mut quarantine = Vec::new();
    for raw in raws {
        match to_message(raw) {
            Ok(msg) => parsed.push(msg),
            Err(reason) => {
                quarantine.push(QuarantineRecord::new(&raw.source_list, raw.byte_offset, &reason))
            }
        }
    }
    (parsed, quarantine)
}

fn strip_angle_brackets(s: &str) -> String {
    s.trim().trim_start_matches('<').trim_end_matches('>').to_string()
}

fn first_message_id(value: &str) -> Option<String> {
    let open = value.find('<')?;
    let close = value[open..].find('>')? + open;
    Some(value[open + 1..close].to_string())
}

/// Extracts (address, display name) from a From header value. Accepts the
/// angle-bracket form, the comment form `a@b (Name)`, and a bare address.
pub fn parse_from(value: &str) -> Option<(EmailAddress, Option<String>)> {
    let value = value.trim();
    if let (Some(open), Some(close)) = (value.rfind('<'), value.rfind('>')) {
        if open < close {
            let email = EmailAddress::parse(&value[open + 1..close]).ok()?;
            let display = value[..open].trim().trim_matches('"').trim().to_string();
            let display = if display.is_empty() { None } else { Some(display) };
            return Some((email, display));
        }
    }
    if let (Some(open), Some(close)) = (value.find('('), value.rfind(')')) {
        if open < close {
            let email = EmailAddress::parse(value[..open].trim()).ok()?;
            let display = value[open + 1..close].trim().to_string();
            let display = if display.is_empty() { None } else { Some(display) };
            return Some((email, display));
        }
    }
    let bare = value
        .split_whitespace()
        .find(|token| token.contains('@'))?;
    let email = EmailAddress::parse(bare.trim_matches(|c: char| "<>,;\"'".contains(c))).ok()?;
    Some((email, None))
}

/// Parses an RFC 2822 date header into UTC, tolerating a trailing
/// parenthesized zone comment.
pub fn parse_rfc2822_utc(value: &str) -> Option<DateTime<Utc>> {
    let mut cleaned = value.trim().to_string();
    if let Some(open) = cleaned.find('(') {
        cleaned.truncate(open);
        cleaned = cleaned.trim().to_string();
    }
    DateTime::parse_from_rfc2822(&cleaned)
        .ok()
        .map(|dt| dt.with_timezone(&Utc))
}

/// Strips repeated reply/forward prefixes ("Re:", "RE:", "Fwd:", "Fw:",
/// optionally numbered like "Re[2]:"). Returns the bare subject and
/// whether any prefix was removed.
pub fn strip_reply_prefixes(subject: &str) -> (String, bool) {
    let mut rest = subject.trim();
    let mut stripped = false;
    loop {
        let lower = rest.to_lowercase();
        let prefix_len = ["re", "fwd", "fw"].iter().find_map(|p| {
            if !lower.starts_with(*p) {
                return None;
            }
            let mut idx = p.len();
            let bytes = lower.as_bytes();
            if idx < bytes.len() && bytes[idx] == b'[' {
                let close = lower[idx..].find(']')?;
                idx += close + 1;
            }
            if bytes.get(idx) == Some(&b':') {
                Some(idx + 1)
            } else {
                None
            }
        });
        match prefix_len {
            Some(len) => {
                rest = rest[len..].trim_start();
                stripped = true;
            }
            None => break,
        }
    }
    (rest.to_string(), stripped)
}

const SUBJECT_FALLBACK_WINDOW_DAYS: i64 = 90;

/// Reconstructs the thread forest of one list.
///
/// Parent resolution order: In-Reply-To, then the last resolvable entry of
/// References, then (for subjects carrying a reply prefix) the earliest
/// prior message with the same stripped subject within a 90-day window.
/// Unresolvable parents make the message a thread root. Cycle edges are
/// dropped; the later message of a cycle becomes a root. Duplicate message
/// ids keep the first by date, the rest are quarantined.
pub fn build_threads(
    messages: &[ParsedMessage],
    list_id: &str,
) -> (Vec<Thread>, Vec<QuarantineRecord>) {
    let mut sorted: Vec<&ParsedMessage> = messages.iter().collect();
    sorted.sort_by(|a, b| {
        (a.node.date, &a.node.message_id).cmp(&(b.node.date, &b.node.message_id))
    });

    let mut quarantine = Vec::new();
    let mut unique: Vec<&ParsedMessage> = Vec::new();
    let mut index_of: HashMap<&str, usize> = HashMap::new();
    for msg in sorted {
        if index_of.contains_key(msg.node.message_id.as_str()) {
            quarantine.push(QuarantineRecord::new(
                list_id,
                msg.byte_offset,
                "duplicate-message-id",
            ));
            continue;
        }
        index_of.insert(&msg.node.message_id, unique.len());
        unique.push(msg);
    }

    // candidate parent per message (index into `unique`)
    let mut parent: Vec<Option<usize>> = Vec::with_capacity(unique.len());
    for (i, msg) in unique.iter().enumerate() {
        let by_reply = msg
            .in_reply_to
            .as_deref()
            .and_then(|id| index_of.get(id).copied())
            .or_else(|| {
                msg.references
                    .iter()
                    .rev()
                    .find_map(|id| index_of.get(id.as_str()).copied())
            });
        let candidate = by_reply.or_else(|| {
            let (bare, had_prefix) = strip_reply_prefixes(&msg.node.subject);
            if !had_prefix || bare.is_empty() {
                return None;
            }
            unique[..i].iter().position(|earlier| {
                let (other, _) = strip_reply_prefixes(&earlier.node.subject);
                other == bare
                    && msg.node.date - earlier.node.date
                        <= Duration::days(SUBJECT_FALLBACK_WINDOW_DAYS)
            })
        });
        parent.push(candidate.filter(|&p| p != i));
    }

    drop_cycle_edges(&mut parent);

    // children lists in (date, id) order follow from `unique` being sorted
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); unique.len()];
    let mut roots: Vec<usize> = Vec::new();
    for (i, p) in parent.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(i),
            None => roots.push(i),
        }
    }

    fn assemble(i: usize, unique: &[&ParsedMessage], children: &[Vec<usize>]) -> MessageNode {
        let mut node = unique[i].node.clone();
        node.children = children[i]
            .iter()
            .map(|&c| assemble(c, unique, children))
            .collect();
        node
    }

    let threads = roots
        .into_iter()
        .map(|i| Thread {
            list_id: list_id.to_string(),
            root: assemble(i, &unique, &children),
        })
        .collect();
    (threads, quarantine)
}

/// In the functional parent graph, every cycle loses exactly one edge: the
/// one leaving its latest (date, id) member.
fn drop_cycle_edges(parent: &mut [Option<usize>]) {
    let n = parent.len();
    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; n];
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            if state[cur] == 1 {
                // found a cycle: the suffix of `path` from `cur`
                let from = path.iter().position(|&x| x == cur).unwrap();
                let cycle = &path[from..];
                // `unique` is sorted by (date, id), so max index = latest
                let latest = *cycle.iter().max().unwrap();
                parent[latest] = None;
                break;
            }
            if state[cur] == 2 {
                break;
            }
            state[cur] = 1;
            path.push(cur);
            match parent[cur] {
                Some(next) => cur = next,
                None => break,
            }
        }
        for &i in &path {
            state[i] = 2;
        }
    }
}

/// Everything produced by ingesting one archive.
#[derive(Debug)]
pub struct IngestOutcome {
    pub raw_count: usize,
    pub messages: Vec<ParsedMessage>,
    pub threads: Vec<Thread>,
    pub quarantine: Vec<QuarantineRecord>,
}

/// Full pipeline for one archive path: parse, convert, thread.
pub fn ingest_path(path: &Path, list_id: &str) -> Result<IngestOutcome, IngestError> {
    let (raws, mut quarantine) = parse_archive_path(path, list_id)?;
    let raw_count = raws.len() + quarantine.len();
    let (messages, more) = to_messages(&raws);
    quarantine.extend(more);
    let (threads, dup) = build_threads(&messages, list_id);
    quarantine.extend(dup);
    Ok(IngestOutcome {
        raw_count,
        messages,
        threads,
        quarantine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn mbox_message(id: &str, from: &str, date: &str, subject: &str, body: &str) -> String {
        format!(
            "From dummy {date}\nFrom: {from}\nDate: {date}\nMessage-ID: <{id}>\nSubject: {subject}\n\n{body}\n"
        )
    }

    #[test]
    fn empty_stream_yields_nothing() {
        let (msgs, quarantined) = parse_archive(b"", "l").unwrap();
        assert!(msgs.is_empty());
        assert!(quarantined.is_empty());
    }

    #[test]
    fn three_messages_match_separator_count() {
        let text = [
            mbox_message("a@x", "a@a.com", "Tue, 3 Feb 2004 10:00:00 +0100", "s1", "b1"),
            mbox_message("b@x", "b@b.com", "Tue, 3 Feb 2004 11:00:00 +0100", "s2", "b2"),
            mbox_message("c@x", "c@c.com", "Tue, 3 Feb 2004 12:00:00 +0100", "s3", "b3"),
        ]
        .join("");
        // oracle: count "From " separators at line starts
        let expected = text
            .lines()
            .filter(|l| l.starts_with("From dummy"))
            .count();
        assert_eq!(expected, 3);
        let (msgs, quarantined) = parse_archive(text.as_bytes(), "l").unwrap();
        assert_eq!(msgs.len(), expected);
        assert!(quarantined.is_empty());
    }

    #[test]
    fn missing_message_id_is_quarantined() {
        let text = "From dummy\nFrom: a@a.com\nDate: Tue, 3 Feb 2004 10:00:00 +0100\nSubject: s\n\nbody\n";
        let (msgs, quarantined) = parse_archive(text.as_bytes(), "l").unwrap();
        assert!(msgs.is_empty());
        assert_eq!(quarantined.len(), 1);
        assert_eq!(quarantined[0].reason, "missing-message-id");
    }

    #[test]
    fn folded_headers_unfold() {
        let text = "From dummy\nFrom: a@a.com\nDate: Tue, 3 Feb 2004 10:00:00 +0100\nMessage-ID: <m@x>\nSubject: part one\n part two\n\nbody\n";
        let (msgs, _) = parse_archive(text.as_bytes(), "l").unwrap();
        assert_eq!(msgs[0].header("subject").unwrap(), "part one part two");
    }

    #[test]
    fn from_header_angle_bracket_form() {
        let (email, display) = parse_from("Michael Kay <mhk@mhk.me.uk>").unwrap();
        assert_eq!(email.as_str(), "mhk@mhk.me.uk");
        assert_eq!(display.as_deref(), Some("Michael Kay"));
    }

    #[test]
    fn from_header_bare_address() {
        let (email, display) = parse_from("a@b.com").unwrap();
        assert_eq!(email.as_str(), "a@b.com");
        assert!(display.is_none());
    }

    #[test]
    fn from_header_comment_form() {
        let (email, display) = parse_from("don@us.ibm.com (Don Chamberlin)").unwrap();
        assert_eq!(email.as_str(), "don@us.ibm.com");
        assert_eq!(display.as_deref(), Some("Don Chamberlin"));
    }

    /// Independent day arithmetic (days-from-civil) so the date check does
    /// not go through chrono.
    fn epoch_seconds(y: i64, m: i64, d: i64, hh: i64, mm: i64, ss: i64, tz_offset_min: i64) -> i64 {
        let y = if m <= 2 { y - 1 } else { y };
        let era = if y >= 0 { y } else { y - 399 } / 400;
        let yoe = y - era * 400;
        let mp = (m + 9) % 12;
        let doy = (153 * mp + 2) / 5 + d - 1;
        let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        let days = era * 146097 + doe - 719468;
        days * 86400 + hh * 3600 + mm * 60 + ss - tz_offset_min * 60
    }

    #[test]
    fn date_normalizes_to_utc_against_independent_calculator() {
        let dt = parse_rfc2822_utc("Tue, 3 Feb 2004 10:00:00 +0100").unwrap();
        let expected = epoch_seconds(2004, 2, 3, 10, 0, 0, 60);
        assert_eq!(dt.timestamp(), expected);
        assert_eq!(dt.to_rfc3339(), "2004-02-03T09:00:00+00:00");
    }

    #[test]
    fn date_with_zone_comment() {
        let dt = parse_rfc2822_utc("Mon, 2 Feb 2004 18:30:00 -0500 (EST)").unwrap();
        assert_eq!(dt.timestamp(), epoch_seconds(2004, 2, 2, 18, 30, 0, -300));
    }

    #[test]
    fn bad_date_quarantines() {
        let raw = RawMessage {
            headers: vec![
                ("Message-ID".into(), "<m@x>".into()),
                ("From".into(), "a@b.com".into()),
                ("Date".into(), "not a date".into()),
            ],
            body: String::new(),
            source_list: "l".into(),
            byte_offset: 0,
        };
        assert_eq!(to_message(&raw).unwrap_err(), "bad-date");
    }

    #[test]
    fn reply_prefixes_strip_repeatedly() {
        assert_eq!(strip_reply_prefixes("Re: RE: Fwd: hello"), ("hello".into(), true));
        assert_eq!(strip_reply_prefixes("Re[2]: hello"), ("hello".into(), true));
        assert_eq!(strip_reply_prefixes("Retro: hello"), ("Retro: hello".into(), false));
        assert_eq!(strip_reply_prefixes("hello"), ("hello".into(), false));
    }

    fn msg(id: &str, minute: u32, reply_to: Option<&str>, subject: &str) -> ParsedMessage {
        let date = Utc.with_ymd_and_hms(2004, 2, 3, 10, minute, 0).unwrap();
        ParsedMessage {
            node: MessageNode::new(
                id,
                "l",
                EmailAddress::parse("a@b.com").unwrap(),
                date,
                subject,
                "",
            ),
            in_reply_to: reply_to.map(|s| s.to_string()),
            references: Vec::new(),
            sender_display: None,
            byte_offset: 0,
        }
    }

    #[test]
    fn branching_forest_is_rebuilt() {
        // M2 and M4 answer M1; M3 stands alone
        let messages = vec![
            msg("m1", 0, None, "topic"),
            msg("m2", 1, Some("m1"), "Re: topic"),
            msg("m3", 2, None, "other"),
            msg("m4", 3, Some("m1"), "Re: topic"),
        ];
        let (threads, quarantined) = build_threads(&messages, "l");
        assert!(quarantined.is_empty());
        assert_eq!(threads.len(), 2);
        assert_eq!(threads[0].root.message_id, "m1");
        let children: Vec<&str> = threads[0]
            .root
            .children
            .iter()
            .map(|c| c.message_id.as_str())
            .collect();
        assert_eq!(children, vec!["m2", "m4"]);
        assert_eq!(threads[1].root.message_id, "m3");
    }

    #[test]
    fn no_messages_no_threads() {
        let (threads, quarantined) = build_threads(&[], "l");
        assert!(threads.is_empty());
        assert!(quarantined.is_empty());
    }

    #[test]
    fn orphan_reply_becomes_root() {
        let messages = vec![msg("m1", 0, Some("gone"), "Re: x")];
        let (threads, _) = build_threads(&messages, "l");
        assert_eq!(threads.len(), 1);
        assert_eq!(threads[0].root.message_id, "m1");
    }

    #[test]
    fn subject_fallback_links_prefixed_replies() {
        let messages = vec![
            msg("m1", 0, None, "topic"),
            msg("m2", 1, None, "Re: topic"),
        ];
        let (threads, _) = build_threads(&messages, "l");
        assert_eq!(threads.len(), 1);
        assert_eq!(threads[0].root.children[0].message_id, "m2");
    }

    #[test]
    fn equal_subjects_without_prefix_stay_separate() {
        let messages = vec![msg("m1", 0, None, "topic"), msg("m2", 1, None, "topic")];
        let (threads, _) = build_threads(&messages, "l");
        assert_eq!(threads.len(), 2);
    }

    #[test]
    fn cycle_edges_drop_later_message_to_root() {
        let messages = vec![
            msg("m1", 0, Some("m2"), "a"),
            msg("m2", 1, Some("m1"), "b"),
        ];
        let (threads, _) = build_threads(&messages, "l");
        assert_eq!(threads.len(), 1);
        // later message m2 became a root holding m1
        assert_eq!(threads[0].root.message_id, "m2");
        assert_eq!(threads[0].root.children[0].message_id, "m1");
    }

    #[test]
    fn duplicate_ids_keep_first_by_date() {
        let messages = vec![msg("m1", 5, None, "a"), msg("m1", 0, None, "b")];
        let (threads, quarantined) = build_threads(&messages, "l");
        assert_eq!(threads.len(), 1);
        assert_eq!(threads[0].root.subject, "b");
        assert_eq!(quarantined.len(), 1);
        assert_eq!(quarantined[0].reason, "duplicate-message-id");
    }

    #[test]
    fn references_used_when_in_reply_to_unresolvable() {
        let mut reply = msg("m2", 1, Some("gone"), "x");
        reply.references = vec!["also-gone".into(), "m1".into()];
        let messages = vec![msg("m1", 0, None, "x"), reply];
        let (threads, _) = build_threads(&messages, "l");
        assert_eq!(threads.len(), 1);
        assert_eq!(threads[0].root.children[0].message_id, "m2");
    }

    #[test]
    fn pipeline_conserves_counts() {
        let good =
            mbox_message("a@x", "a@a.com", "Tue, 3 Feb 2004 10:00:00 +0100", "s", "b");
        let no_id = "From dummy\nFrom: x@x.com\nDate: Tue, 3 Feb 2004 10:00:00 +0100\n\nbody\n";
        let bad_date =
            "From dummy\nFrom: y@y.com\nDate: whenever\nMessage-ID: <bd@x>\nSubject: s\n\nbody\n";
        let text = format!("{good}{no_id}{bad_date}");
        let (raws, q1) = parse_archive(text.as_bytes(), "l").unwrap();
        let (parsed, q2) = to_messages(&raws);
        assert_eq!(raws.len() + q1.len(), 3);
        assert_eq!(parsed.len() + q1.len() + q2.len(), 3);
    }
}
