//! On-disk layout of the warehouse:
//!
//! ```text
//! warehouse/
//!   actors_info.xml        actors, institutions, functions (one namespace)
//!   threads/<listId>.xml   one recursive thread document per mailing list
//! ```
//!
//! Output ordering is canonical (actors by id, messages by date then id) so
//! that serializing the same warehouse twice is byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};

use crate::error::StoreError;
use crate::model::{
    Actor, DateInterval, EmailAddress, Function, HiddenMarker, HiddenSender, Institution,
    MessageNode, PersonName, Sex, Thread, Warehouse,
};
use crate::validate::{validate, ValidationReport};
use crate::xml::{parse_document, render_document, XmlElement};

const ACTORS_NS: &str = "http://listforge.dev/schemas/actors_info";
const THREADS_NS: &str = "http://listforge.dev/schemas/threads";
pub const DATE_FMT: &str = "%Y-%m-%dT%H:%M:%SZ";

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Keep unknown optional elements found on actors instead of dropping
    /// them (they are re-emitted verbatim on the next serialize).
    pub preserve_extensions: bool,
}

/// A warehouse read back from disk, with its validation report and any
/// unknown-element warnings.
#[derive(Debug)]
pub struct Loaded {
    pub warehouse: Warehouse,
    pub report: ValidationReport,
    pub warnings: Vec<String>,
}

/// Writes the warehouse under `dir`. Refuses to write an invalid one.
pub fn serialize(warehouse: &Warehouse, dir: &Path) -> Result<(), StoreError> {
    let report = validate(warehouse);
    if !report.is_valid() {
        return Err(StoreError::Invalid(
            report.violations.len(),
            report.violations[0].to_string(),
        ));
    }

    let mut canonical = warehouse.clone();
    canonical.canonicalize();

    fs::create_dir_all(dir).map_err(|e| StoreError::io(dir, e))?;
    let actors_path = dir.join("actors_info.xml");
    fs::write(&actors_path, actors_info_document(&canonical))
        .map_err(|e| StoreError::io(&actors_path, e))?;

    let threads_dir = dir.join("threads");
    fs::create_dir_all(&threads_dir).map_err(|e| StoreError::io(&threads_dir, e))?;
    // remove thread documents for lists no longer present
    if let Ok(entries) = fs::read_dir(&threads_dir) {
        for entry in entries.flatten() {
            let name = entry.file_name();
            let stem = Path::new(&name)
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_default();
            if !canonical.lists.contains_key(&stem) {
                let _ = fs::remove_file(entry.path());
            }
        }
    }
    for (list_id, threads) in &canonical.lists {
        let path = threads_dir.join(format!("{list_id}.xml"));
        fs::write(&path, threads_document(list_id, threads))
            .map_err(|e| StoreError::io(&path, e))?;
    }
    Ok(())
}

/// Reads a warehouse from `dir`, validating it on the way in.
pub fn deserialize(dir: &Path, options: LoadOptions) -> Result<Loaded, StoreError> {
    if !dir.is_dir() {
        return Err(StoreError::MissingDirectory(dir.to_path_buf()));
    }
    let mut warnings = Vec::new();

    let actors_path = dir.join("actors_info.xml");
    let text = fs::read_to_string(&actors_path).map_err(|e| StoreError::io(&actors_path, e))?;
    let root = parse_at(&text, &actors_path)?;
    let mut warehouse = read_actors_info(&root, &actors_path, options, &mut warnings)?;

    let threads_dir = dir.join("threads");
    let mut thread_files: Vec<PathBuf> = Vec::new();
    if threads_dir.is_dir() {
        for entry in fs::read_dir(&threads_dir).map_err(|e| StoreError::io(&threads_dir, e))? {
            let entry = entry.map_err(|e| StoreError::io(&threads_dir, e))?;
            if entry.path().extension().is_some_and(|e| e == "xml") {
                thread_files.push(entry.path());
            }
        }
    }
    thread_files.sort();
    for path in thread_files {
        let text = fs::read_to_string(&path).map_err(|e| StoreError::io(&path, e))?;
        let root = parse_at(&text, &path)?;
        let (list_id, threads) = read_threads(&root, &path, &mut warnings)?;
        warehouse.lists.insert(list_id, threads);
    }

    warehouse.canonicalize();
    let report = validate(&warehouse);
    Ok(Loaded {
        warehouse,
        report,
        warnings,
    })
}

fn parse_at(text: &str, path: &Path) -> Result<XmlElement, StoreError> {
    parse_document(text).map_err(|(line, message)| StoreError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    })
}

// --- writing ---------------------------------------------------------------

fn actors_info_document(warehouse: &Warehouse) -> String {
    let mut actors = XmlElement::new("ai:actors");
    for actor in &warehouse.actors {
        actors = actors.child(actor_element(actor));
    }
    let mut institutions = XmlElement::new("ai:institutions");
    for institution in &warehouse.institutions {
        institutions = institutions.child(institution_element(institution));
    }
    let mut functions = XmlElement::new("ai:functions");
    for function in &warehouse.functions {
        functions = functions.child(function_element(function));
    }
    let root = XmlElement::new("ai:database")
        .attr("xmlns:ai", ACTORS_NS)
        .child(actors)
        .child(institutions)
        .child(functions);
    render_document(&root)
}

fn actor_element(actor: &Actor) -> XmlElement {
    let mut name = XmlElement::new("ai:name").child(XmlElement::leaf(
        "ai:lastname",
        &actor.name.lastname,
    ));
    if let Some(first) = &actor.name.firstname {
        name = name.child(XmlElement::leaf("ai:firstname", first));
    }
    for middle in &actor.name.middlenames {
        name = name.child(XmlElement::leaf("ai:middlename", middle));
    }
    let mut emails = XmlElement::new("ai:emails");
    for email in &actor.emails {
        emails = emails.child(XmlElement::leaf("ai:email", email.as_str()));
    }
    let mut element = XmlElement::new("ai:actor")
        .attr("id", &actor.id)
        .child(name)
        .child(emails);
    if let Some(sex) = actor.sex {
        element = element.child(XmlElement::leaf("ai:sex", sex.as_str()));
    }
    if let Some(birth) = actor.birth_date {
        element = element.child(XmlElement::leaf("ai:birthDate", &birth.to_string()));
    }
    for diploma in &actor.diplomas {
        element = element.child(XmlElement::leaf("ai:diploma", diploma));
    }
    for skill in &actor.skills {
        element = element.child(XmlElement::leaf("ai:skill", skill));
    }
    for extension in &actor.extensions {
        if let Ok(parsed) = parse_document(extension) {
            element = element.child(parsed);
        }
    }
    element
}

fn institution_element(institution: &Institution) -> XmlElement {
    let mut element = XmlElement::new("ai:institution")
        .attr("id", &institution.id)
        .child(XmlElement::leaf("ai:name", &institution.canonical_name));
    for alias in &institution.aliases {
        element = element.child(XmlElement::leaf("ai:alias", alias));
    }
    for domain in &institution.domains {
        element = element.child(XmlElement::leaf("ai:domain", domain));
    }
    element
}

fn function_element(function: &Function) -> XmlElement {
    let mut element = XmlElement::new("ai:function")
        .attr("actor", &function.actor)
        .attr("institution", &function.institution)
        .child(XmlElement::leaf("ai:name", &function.role));
    if let Some(interval) = &function.interval {
        element = element.child(XmlElement::leaf("ai:start", &interval.start.to_string()));
        if let Some(end) = interval.end {
            element = element.child(XmlElement::leaf("ai:end", &end.to_string()));
        }
    }
    element
}

fn threads_document(list_id: &str, threads: &[Thread]) -> String {
    let mut root = XmlElement::new("th:threads")
        .attr("xmlns:th", THREADS_NS)
        .attr("list", list_id);
    for thread in threads {
        root = root.child(XmlElement::new("th:thread").child(message_element(&thread.root)));
    }
    render_document(&root)
}

fn message_element(message: &MessageNode) -> XmlElement {
    let mut element = XmlElement::new("th:message")
        .attr("id", &message.message_id)
        .child(XmlElement::leaf("th:email", message.sender.as_str()))
        .child(XmlElement::leaf(
            "th:date",
            &message.date.format(DATE_FMT).to_string(),
        ))
        .child(XmlElement::leaf("th:subject", &message.subject))
        .child(XmlElement::leaf("th:body", &message.body));
    for topic in &message.topics {
        element = element.child(XmlElement::leaf("th:topic", topic));
    }
    for recovered in &message.recovered {
        let mut rec = XmlElement::new("th:recovered")
            .attr("marker", recovered.marker.as_str())
            .attr("email", recovered.email.as_str());
        if let Some(date) = recovered.date {
            rec = rec.attr("date", &date.format(DATE_FMT).to_string());
        }
        element = element.child(rec);
    }
    for child in &message.children {
        element = element.child(message_element(child));
    }
    element
}

// --- reading ---------------------------------------------------------------

fn bad(path: &Path, message: String) -> StoreError {
    StoreError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message,
    }
}

fn warn_unknown(warnings: &mut Vec<String>, path: &Path, parent: &str, name: &str) {
    warnings.push(format!(
        "{}: unknown element <{name}> under <{parent}> (dropped)",
        path.display()
    ));
}

fn read_actors_info(
    root: &XmlElement,
    path: &Path,
    options: LoadOptions,
    warnings: &mut Vec<String>,
) -> Result<Warehouse, StoreError> {
    if root.local_name() != "database" {
        return Err(bad(path, format!("expected <database> root, found <{}>", root.name)));
    }
    let mut warehouse = Warehouse::default();
    for section in root.elements() {
        match section.local_name() {
            "actors" => {
                for element in section.elements() {
                    if element.local_name() != "actor" {
                        warn_unknown(warnings, path, "actors", element.local_name());
                        continue;
                    }
                    warehouse
                        .actors
                        .push(read_actor(element, path, options, warnings)?);
                }
            }
            "institutions" => {
                for element in section.elements() {
                    if element.local_name() != "institution" {
                        warn_unknown(warnings, path, "institutions", element.local_name());
                        continue;
                    }
                    warehouse.institutions.push(read_institution(element, warnings, path));
                }
            }
            "functions" => {
                for element in section.elements() {
                    if element.local_name() != "function" {
                        warn_unknown(warnings, path, "functions", element.local_name());
                        continue;
                    }
                    warehouse.functions.push(read_function(element, path)?);
                }
            }
            other => warn_unknown(warnings, path, "database", other),
        }
    }
    Ok(warehouse)
}

fn read_actor(
    element: &XmlElement,
    path: &Path,
    options: LoadOptions,
    warnings: &mut Vec<String>,
) -> Result<Actor, StoreError> {
    let id = element
        .get_attr("id")
        .ok_or_else(|| bad(path, "<actor> missing id attribute".into()))?
        .to_string();
    let mut actor = Actor {
        id,
        name: PersonName::default(),
        emails: Default::default(),
        sex: None,
        birth_date: None,
        diplomas: Vec::new(),
        skills: Vec::new(),
        extensions: Vec::new(),
    };
    for child in element.elements() {
        match child.local_name() {
            "name" => {
                for part in child.elements() {
                    match part.local_name() {
                        "lastname" => actor.name.lastname = part.text_content(),
                        "firstname" => actor.name.firstname = Some(part.text_content()),
                        "middlename" => actor.name.middlenames.push(part.text_content()),
                        other => warn_unknown(warnings, path, "name", other),
                    }
                }
            }
            "emails" => {
                for part in child.find_all("email") {
                    let email = EmailAddress::parse(&part.text_content())
                        .map_err(|e| bad(path, e.to_string()))?;
                    actor.emails.insert(email);
                }
            }
            "sex" => actor.sex = Sex::parse(&child.text_content()),
            "birthDate" => {
                actor.birth_date = child.text_content().parse::<NaiveDate>().ok();
            }
            "diploma" => actor.diplomas.push(child.text_content()),
            "skill" => actor.skills.push(child.text_content()),
            other => {
                if options.preserve_extensions {
                    actor.extensions.push(child.render_fragment());
                    warnings.push(format!(
                        "{}: unknown element <{other}> under <actor id={}> (preserved)",
                        path.display(),
                        actor.id
                    ));
                } else {
                    warn_unknown(warnings, path, "actor", other);
                }
            }
        }
    }
    Ok(actor)
}

fn read_institution(element: &XmlElement, warnings: &mut Vec<String>, path: &Path) -> Institution {
    let mut institution = Institution::new(element.get_attr("id").unwrap_or(""), "");
    for child in element.elements() {
        match child.local_name() {
            "name" => institution.canonical_name = child.text_content(),
            "alias" => {
                institution.aliases.insert(child.text_content());
            }
            "domain" => {
                institution.domains.insert(child.text_content());
            }
            other => warn_unknown(warnings, path, "institution", other),
        }
    }
    institution
}

fn read_function(element: &XmlElement, path: &Path) -> Result<Function, StoreError> {
    let actor = element
        .get_attr("actor")
        .ok_or_else(|| bad(path, "<function> missing actor attribute".into()))?
        .to_string();
    let institution = element
        .get_attr("institution")
        .ok_or_else(|| bad(path, "<function> missing institution attribute".into()))?
        .to_string();
    let role = element
        .find("name")
        .map(|n| n.text_content())
        .unwrap_or_default();
    let start = element
        .find("start")
        .and_then(|e| e.text_content().parse::<NaiveDate>().ok());
    let end = element
        .find("end")
        .and_then(|e| e.text_content().parse::<NaiveDate>().ok());
    let interval = start.map(|start| DateInterval { start, end });
    Ok(Function {
        actor,
        institution,
        role,
        interval,
    })
}

fn read_threads(
    root: &XmlElement,
    path: &Path,
    warnings: &mut Vec<String>,
) -> Result<(String, Vec<Thread>), StoreError> {
    if root.local_name() != "threads" {
        return Err(bad(path, format!("expected <threads> root, found <{}>", root.name)));
    }
    let list_id = root
        .get_attr("list")
        .map(|s| s.to_string())
        .or_else(|| {
            path.file_stem().map(|s| s.to_string_lossy().to_string())
        })
        .unwrap_or_default();
    let mut threads = Vec::new();
    for element in root.elements() {
        if element.local_name() != "thread" {
            warn_unknown(warnings, path, "threads", element.local_name());
            continue;
        }
        let message = element
            .find("message")
            .ok_or_else(|| bad(path, "<thread> without <message> root".into()))?;
        threads.push(Thread {
            list_id: list_id.clone(),
            root: read_message(message, &list_id, path, warnings)?,
        });
    }
    Ok((list_id, threads))
}

fn read_message(
    element: &XmlElement,
    list_id: &str,
    path: &Path,
    warnings: &mut Vec<String>,
) -> Result<MessageNode, StoreError> {
    let message_id = element
        .get_attr("id")
        .ok_or_else(|| bad(path, "<message> missing id attribute".into()))?
        .to_string();
    let sender = element
        .find("email")
        .map(|e| e.text_content())
        .ok_or_else(|| bad(path, format!("message {message_id} missing <email>")))?;
    let sender = EmailAddress::parse(&sender).map_err(|e| bad(path, e.to_string()))?;
    let date = element
        .find("date")
        .map(|e| e.text_content())
        .ok_or_else(|| bad(path, format!("message {message_id} missing <date>")))?;
    let date = parse_utc(&date).ok_or_else(|| {
        bad(path, format!("message {message_id}: bad date {date:?}"))
    })?;

    let mut message = MessageNode::new(
        &message_id,
        list_id,
        sender,
        date,
        &element.find("subject").map(|e| e.text_content()).unwrap_or_default(),
        &element.find("body").map(|e| e.text_content()).unwrap_or_default(),
    );
    for child in element.elements() {
        match child.local_name() {
            "email" | "date" | "subject" | "body" => {}
            "topic" => message.topics.push(child.text_content()),
            "recovered" => {
                let marker = child
                    .get_attr("marker")
                    .and_then(HiddenMarker::parse)
                    .ok_or_else(|| bad(path, "bad <recovered> marker".into()))?;
                let email = child
                    .get_attr("email")
                    .ok_or_else(|| bad(path, "<recovered> missing email".into()))?;
                let email = EmailAddress::parse(email).map_err(|e| bad(path, e.to_string()))?;
                let date = child.get_attr("date").and_then(parse_utc_ref);
                message.recovered.push(HiddenSender {
                    marker,
                    email,
                    date,
                });
            }
            "message" => message
                .children
                .push(read_message(child, list_id, path, warnings)?),
            other => warn_unknown(warnings, path, "message", other),
        }
    }
    Ok(message)
}

fn parse_utc(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s)
        .ok()
        .map(|dt| dt.with_timezone(&Utc))
}

fn parse_utc_ref(s: &str) -> Option<DateTime<Utc>> {
    parse_utc(s)
}
