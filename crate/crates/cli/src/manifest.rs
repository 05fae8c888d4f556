//! The run manifest: one structured-text file per run directory recording,
//! for each command that ran, its configuration echo, the input
//! fingerprint, and every file it wrote.
//!
//! Commands rewrite only their own section; sections are kept in a fixed
//! canonical order so re-running a pipeline in any command order yields
//! byte-identical manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub const MANIFEST_FILE: &str = "manifest.txt";

/// FNV-1a 64-bit content hash, used to fingerprint input data.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

/// One command's manifest section: ordered key/value pairs plus the list of
/// files (relative to the run directory) the command wrote.
#[derive(Debug, Clone, Default)]
pub struct Section {
    pub entries: Vec<(String, String)>,
    pub outputs: Vec<String>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    sections: BTreeMap<String, Section>,
}

fn section_order(name: &str) -> (u8, u64, String) {
    let command = name.split_whitespace().next().unwrap_or("");
    let rank = match command {
        "simulate" => 1,
        "backtest" => 2,
        "frontier" => 3,
        "report" => 4,
        _ => 9,
    };
    let horizon = name
        .split("h=")
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    (rank, horizon, name.to_string())
}

impl Manifest {
    pub fn path(run_dir: &Path) -> PathBuf {
        run_dir.join(MANIFEST_FILE)
    }

    /// Load the manifest from a run directory, or an empty one if the file
    /// does not exist yet.
    pub fn load_or_default(run_dir: &Path) -> Result<Self> {
        let path = Self::path(run_dir);
        if !path.exists() {
            return Ok(Self::default());
        }
        Self::load(run_dir)
    }

    pub fn load(run_dir: &Path) -> Result<Self> {
        let path = Self::path(run_dir);
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut sections = BTreeMap::new();
        let mut current: Option<(String, Section)> = None;
        for line in text.lines() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if let Some((name, section)) = current.take() {
                    sections.insert(name, section);
                }
                current = Some((name.to_string(), Section::default()));
            } else if let Some((key, value)) = line.split_once(" = ") {
                if let Some((_, section)) = current.as_mut() {
                    if key == "output" {
                        section.outputs.push(value.to_string());
                    } else {
                        section.push(key, value);
                    }
                }
            }
        }
        if let Some((name, section)) = current.take() {
            sections.insert(name, section);
        }
        Ok(Self { sections })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    /// Replace one command's section and rewrite the whole file in
    /// canonical section order. Output lists are sorted before writing.
    pub fn record(&mut self, run_dir: &Path, name: &str, mut section: Section) -> Result<()> {
        section.outputs.sort();
        self.sections.insert(name.to_string(), section);

        let mut names: Vec<&String> = self.sections.keys().collect();
        names.sort_by_key(|n| section_order(n));

        let mut text = String::new();
        for name in names {
            let section = &self.sections[name];
            text.push_str(&format!("[{name}]\n"));
            for (key, value) in &section.entries {
                text.push_str(&format!("{key} = {value}\n"));
            }
            for output in &section.outputs {
                text.push_str(&format!("output = {output}\n"));
            }
            text.push('\n');
        }
        fs::create_dir_all(run_dir)
            .with_context(|| format!("creating {}", run_dir.display()))?;
        let path = Self::path(run_dir);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
