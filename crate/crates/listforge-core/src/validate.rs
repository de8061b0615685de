//! Whole-warehouse validation. Violations are data, not failures: the
//! report lists every broken invariant with the offending entity id and a
//! stable rule name.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::model::Warehouse;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub entity: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.rule, self.entity, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, rule: &'static str, entity: &str, detail: String) {
        self.violations.push(Violation {
            rule,
            entity: entity.to_string(),
            detail,
        });
    }
}

/// Checks every cross-document invariant: key uniqueness, IDREF integrity,
/// the functional email-to-actor mapping, name shape, and per-list message
/// id uniqueness.
pub fn validate(warehouse: &Warehouse) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut actor_ids: HashSet<&str> = HashSet::new();
    for actor in &warehouse.actors {
        if !actor_ids.insert(&actor.id) {
            report.push("actor-id-unique", &actor.id, "duplicate actor id".into());
        }
        if actor.emails.is_empty() {
            report.push(
                "actor-emails-nonempty",
                &actor.id,
                "actor has no email address".into(),
            );
        }
        if actor.name.lastname.is_empty() {
            report.push(
                "actor-lastname-nonempty",
                &actor.id,
                "actor name has no lastname".into(),
            );
        }
        let mut parts: Vec<&str> = vec![&actor.name.lastname];
        parts.extend(actor.name.firstname.as_deref());
        parts.extend(actor.name.middlenames.iter().map(String::as_str));
        for part in parts {
            if part != part.trim() {
                report.push(
                    "name-whitespace",
                    &actor.id,
                    format!("name part {part:?} has surrounding whitespace"),
                );
            }
        }
    }

    // email -> actor must be a partial function
    let mut owners: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for actor in &warehouse.actors {
        for email in &actor.emails {
            owners.entry(email.as_str()).or_default().push(&actor.id);
        }
    }
    for (email, ids) in owners {
        if ids.len() > 1 {
            report.push(
                "email-uniqueness",
                ids[0],
                format!("email {email} shared by actors {}", ids.join(", ")),
            );
        }
    }

    let mut institution_ids: HashSet<&str> = HashSet::new();
    for inst in &warehouse.institutions {
        if !institution_ids.insert(&inst.id) {
            report.push(
                "institution-id-unique",
                &inst.id,
                "duplicate institution id".into(),
            );
        }
    }
    for inst in &warehouse.institutions {
        for other in &warehouse.institutions {
            if other.id != inst.id && other.aliases.contains(&inst.canonical_name) {
                report.push(
                    "institution-name-aliased",
                    &inst.id,
                    format!(
                        "canonical name {:?} is an alias of institution {}",
                        inst.canonical_name, other.id
                    ),
                );
            }
        }
    }

    for (idx, function) in warehouse.functions.iter().enumerate() {
        let entity = format!("function#{idx}");
        if !actor_ids.contains(function.actor.as_str()) {
            report.push(
                "function-actor-idref",
                &entity,
                format!("actor reference {:?} does not resolve", function.actor),
            );
        }
        if !institution_ids.contains(function.institution.as_str()) {
            report.push(
                "function-institution-idref",
                &entity,
                format!(
                    "institution reference {:?} does not resolve",
                    function.institution
                ),
            );
        }
        if let Some(interval) = &function.interval {
            if let Some(end) = interval.end {
                if interval.start > end {
                    report.push(
                        "function-interval-order",
                        &entity,
                        format!("start {} is after end {}", interval.start, end),
                    );
                }
            }
        }
    }

    for (list_id, threads) in &warehouse.lists {
        let mut seen: HashMap<&str, u32> = HashMap::new();
        for thread in threads {
            if thread.list_id != *list_id {
                report.push(
                    "thread-list-id",
                    &thread.root.message_id,
                    format!(
                        "thread stored under list {list_id} but tagged {}",
                        thread.list_id
                    ),
                );
            }
            for msg in thread.root.walk() {
                *seen.entry(&msg.message_id).or_insert(0) += 1;
            }
        }
        for (id, count) in seen {
            if count > 1 {
                report.push(
                    "message-id-unique",
                    id,
                    format!("message id appears {count} times in list {list_id}"),
                );
            }
        }
    }

    report
}
