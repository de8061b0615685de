//! Operator-maintained configuration, loaded from a directory of small
//! plain-text files. Every file is optional; a missing file means the
//! built-in default.
//!
//! Layout:
//!   merges.csv      keepId,dropId           approved actor merges
//!   gateways.txt    one address per line    gateway senders for recovery
//!   aliases.csv     variant,canonical       institution name aliases
//!   domain_map.csv  domain,institutionId    domain-to-institution overrides
//!   suffixes.txt    one suffix per line     public-suffix override

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::StoreError;
use crate::institutions::{AliasTable, DomainMap, SuffixList};
use crate::model::EmailAddress;

pub const CONFIG_ENV: &str = "LISTFORGE_CONFIG";

#[derive(Debug, Clone, Default)]
pub struct Config {
    /// Approved merges, applied in file order.
    pub merges: Vec<(String, String)>,
    pub gateways: Vec<EmailAddress>,
    pub aliases: AliasTable,
    pub domain_map: DomainMap,
    pub suffixes: SuffixList,
}

/// Resolves the configuration directory: an explicit flag wins, then the
/// environment, then no directory (all defaults).
pub fn resolve_config_dir(flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from))
}

impl Config {
    pub fn load(dir: Option<&Path>) -> Result<Config, StoreError> {
        let Some(dir) = dir else {
            return Ok(Config::default());
        };
        if !dir.is_dir() {
            return Err(StoreError::MissingDirectory(dir.to_path_buf()));
        }
        let read = |name: &str| -> Result<Option<String>, StoreError> {
            let path = dir.join(name);
            if !path.is_file() {
                return Ok(None);
            }
            fs::read_to_string(&path)
                .map(Some)
                .map_err(|e| StoreError::io(path, e))
        };

        let mut config = Config::default();
        if let Some(text) = read("merges.csv")? {
            for (number, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((keep, drop)) = line.split_once(',') else {
                    return Err(StoreError::Parse {
                        path: dir.join("merges.csv"),
                        line: number + 1,
                        message: format!("expected keepId,dropId: {line:?}"),
                    });
                };
                config
                    .merges
                    .push((keep.trim().to_string(), drop.trim().to_string()));
            }
        }
        if let Some(text) = read("gateways.txt")? {
            for (number, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let address = EmailAddress::parse(line).map_err(|e| StoreError::Parse {
                    path: dir.join("gateways.txt"),
                    line: number + 1,
                    message: e.to_string(),
                })?;
                config.gateways.push(address);
            }
        }
        if let Some(text) = read("aliases.csv")? {
            config.aliases = AliasTable::from_csv(&text);
        }
        if let Some(text) = read("domain_map.csv")? {
            config.domain_map = DomainMap::from_csv(&text);
        }
        if let Some(text) = read("suffixes.txt")? {
            config.suffixes = SuffixList::from_lines(&text);
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_directory_means_defaults() {
        let config = Config::load(None).unwrap();
        assert!(config.merges.is_empty());
        assert!(config.gateways.is_empty());
        // default suffix list is live, not empty
        assert_eq!(config.suffixes.registrable("us.ibm.com"), "ibm.com");
    }

    #[test]
    fn missing_directory_is_an_error() {
        assert!(Config::load(Some(Path::new("/nonexistent/config"))).is_err());
    }

    #[test]
    fn loads_all_files() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("merges.csv"), "# approved\nkeep-a,drop-b\n").unwrap();
        fs::write(dir.path().join("gateways.txt"), "bugzilla@w3.org\n").unwrap();
        fs::write(dir.path().join("aliases.csv"), "I.B.M.,ibm\n").unwrap();
        fs::write(dir.path().join("domain_map.csv"), "cerisent.com,mark-logic\n").unwrap();
        fs::write(dir.path().join("suffixes.txt"), "com\nme.uk\n").unwrap();
        let config = Config::load(Some(dir.path())).unwrap();
        assert_eq!(config.merges, vec![("keep-a".to_string(), "drop-b".to_string())]);
        assert_eq!(config.gateways[0].as_str(), "bugzilla@w3.org");
        assert_eq!(config.aliases.normalize("I.B.M."), "ibm");
        assert_eq!(
            config.domain_map.resolve("cerisent.com").label(),
            "mark-logic"
        );
        assert_eq!(config.suffixes.registrable("mhk.me.uk"), "mhk.me.uk");
    }

    #[test]
    fn malformed_merge_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("merges.csv"), "only-one-column\n").unwrap();
        let err = Config::load(Some(dir.path())).unwrap_err();
        assert!(matches!(err, StoreError::Parse { line: 1, .. }));
    }

    #[test]
    fn flag_beats_environment() {
        let explicit = PathBuf::from("/tmp/explicit");
        assert_eq!(
            resolve_config_dir(Some(&explicit)),
            Some(explicit.clone())
        );
    }
}
