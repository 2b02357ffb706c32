//! Artifact files: atomic writes, the hash manifest and plot scripts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Usage(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub files: Vec<ManifestEntry>,
}

/// Collects the files one scenario writes into its output directory.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self {
            dir,
            entries: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, contents)?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            sha256: sha256_hex(contents),
            bytes: contents.len() as u64,
        });
        Ok(path)
    }

    /// Adds an entry for a file written elsewhere (e.g. by a worker thread).
    pub fn register(&mut self, entry: ManifestEntry) {
        self.entries.retain(|e| e.path != entry.path);
        self.entries.push(entry);
    }

    pub fn files(&self) -> Vec<PathBuf> {
        self.entries
            .iter()
            .map(|e| self.dir.join(&e.path))
            .collect()
    }

    /// Writes `manifest.json` (which does not list itself) and returns all paths.
    pub fn finish(self, scenario: &str) -> Result<Vec<PathBuf>> {
        let mut files = self.entries;
        files.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            scenario: scenario.to_string(),
            files,
        };
        let json = serde_json::to_string_pretty(&manifest)?;
        let path = self.dir.join("manifest.json");
        write_atomic(&path, json.as_bytes())?;
        let mut out: Vec<PathBuf> = manifest
            .files
            .iter()
            .map(|e| self.dir.join(&e.path))
            .collect();
        out.push(path);
        Ok(out)
    }
}

/// Kinds of data a plot script can render.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArtifactKind {
    /// `t,g1,…,burden` CSV: populations against time.
    Trajectory,
    /// `member,t,a,b,c` CSV: 3-D projection of an ensemble.
    Portrait,
    /// `value,t,burden` long-format CSV: burden against time per sweep value.
    SweepTable,
}

impl FromStr for ArtifactKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trajectory" => Ok(ArtifactKind::Trajectory),
            "portrait" => Ok(ArtifactKind::Portrait),
            "sweep-table" => Ok(ArtifactKind::SweepTable),
            other => Err(Error::UnknownArtifact(other.to_string())),
        }
    }
}

/// Text of a matplotlib script that reads `csv_name` from its own directory.
pub fn plotscript_source(kind: ArtifactKind, csv_name: &str, title: &str) -> String {
    let png = format!("{}.png", csv_name.trim_end_matches(".csv"));
    let header = [
        "import csv".to_string(),
        "import os".into(),
        String::new(),
        "import matplotlib".into(),
        "matplotlib.use(\"Agg\")".into(),
        "import matplotlib.pyplot as plt".into(),
        String::new(),
        "HERE = os.path.dirname(os.path.abspath(__file__))".into(),
        format!("CSV = os.path.join(HERE, {csv_name:?})"),
        String::new(),
        "with open(CSV, newline=\"\") as fh:".into(),
        "    rows = list(csv.DictReader(fh))".into(),
        String::new(),
    ];
    let body: Vec<String> = match kind {
        ArtifactKind::Trajectory => vec![
            "t = [float(r[\"t\"]) for r in rows]".into(),
            "fig, ax = plt.subplots(figsize=(8, 5))".into(),
            "for name in (\"g1\", \"g2\", \"g3\", \"g4\", \"g5\"):".into(),
            "    ax.plot(t, [float(r[name]) for r in rows], label=name)".into(),
            "ax.set_xlabel(\"t (days)\")".into(),
            "ax.set_ylabel(\"concentration\")".into(),
            format!("ax.set_title({title:?})"),
            "ax.legend()".into(),
        ],
        ArtifactKind::Portrait => vec![
            "cols = [c for c in rows[0].keys() if c not in (\"member\", \"t\")]".into(),
            "members = {}".into(),
            "for r in rows:".into(),
            "    members.setdefault(r[\"member\"], []).append(r)".into(),
            "fig = plt.figure(figsize=(7, 6))".into(),
            "ax = fig.add_subplot(projection=\"3d\")".into(),
            "for pts in members.values():".into(),
            "    ax.plot(*[[float(p[c]) for p in pts] for c in cols])".into(),
            "    ax.scatter(*[[float(pts[-1][c])] for c in cols], color=\"k\", s=8)".into(),
            "ax.set_xlabel(cols[0])".into(),
            "ax.set_ylabel(cols[1])".into(),
            "ax.set_zlabel(cols[2])".into(),
            format!("ax.set_title({title:?})"),
        ],
        ArtifactKind::SweepTable => vec![
            "series = {}".into(),
            "for r in rows:".into(),
            "    t, b = series.setdefault(r[\"value\"], ([], []))".into(),
            "    t.append(float(r[\"t\"]))".into(),
            "    b.append(float(r[\"burden\"]))".into(),
            "fig, ax = plt.subplots(figsize=(8, 5))".into(),
            "for value, (t, b) in series.items():".into(),
            "    ax.plot(t, b, label=value)".into(),
            "ax.set_xlabel(\"t (days)\")".into(),
            "ax.set_ylabel(\"g2 + g3\")".into(),
            format!("ax.set_title({title:?})"),
            "ax.legend()".into(),
        ],
    };
    let footer = [
        "fig.tight_layout()".to_string(),
        format!("fig.savefig(os.path.join(HERE, {png:?}), dpi=150)"),
    ];
    let mut out = header
        .into_iter()
        .chain(body)
        .chain(footer)
        .collect::<Vec<_>>()
        .join("\n");
    out.push('\n');
    out
}

/// Writes a plot script next to an existing CSV artifact.
pub fn emit_plotscript(
    writer: &mut ArtifactWriter,
    kind: ArtifactKind,
    csv_name: &str,
    title: &str,
) -> Result<PathBuf> {
    let csv = writer.dir().join(csv_name);
    if !csv.is_file() {
        return Err(Error::Usage(format!(
            "plot script needs an existing CSV, {} not found",
            csv.display()
        )));
    }
    let script = plotscript_source(kind, csv_name, title);
    let name = format!("{}.py", csv_name.trim_end_matches(".csv"));
    writer.write(&name, script.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        let names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn manifest_hashes_match_contents() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path()).unwrap();
        w.write("b.csv", b"x\n1\n").unwrap();
        w.write("a.json", b"{}").unwrap();
        let files = w.finish("demo").unwrap();
        assert_eq!(files.len(), 3);
        let m: Manifest =
            serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m.files[0].path, "a.json");
        for e in &m.files {
            let bytes = fs::read(dir.path().join(&e.path)).unwrap();
            assert_eq!(sha256_hex(&bytes), e.sha256);
        }
    }

    #[test]
    fn artifact_kinds_parse() {
        assert_eq!(
            "portrait".parse::<ArtifactKind>().unwrap(),
            ArtifactKind::Portrait
        );
        assert!(matches!(
            "histogram".parse::<ArtifactKind>(),
            Err(Error::UnknownArtifact(_))
        ));
    }

    #[test]
    fn plot_script_blocks_are_indented() {
        for kind in [
            ArtifactKind::Trajectory,
            ArtifactKind::Portrait,
            ArtifactKind::SweepTable,
        ] {
            let src = plotscript_source(kind, "data.csv", "title");
            let lines: Vec<&str> = src.lines().collect();
            for pair in lines.windows(2) {
                if pair[0].ends_with(':') {
                    assert!(pair[1].starts_with("    "), "{kind:?}: {:?}", pair);
                }
            }
        }
    }

    #[test]
    fn plot_script_requires_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path()).unwrap();
        assert!(emit_plotscript(&mut w, ArtifactKind::Trajectory, "missing.csv", "x").is_err());
        w.write("run.csv", b"t,g1,g2,g3,g4,g5,q,y,burden\n")
            .unwrap();
        let path = emit_plotscript(&mut w, ArtifactKind::Trajectory, "run.csv", "x").unwrap();
        let src = fs::read_to_string(path).unwrap();
        assert!(src.contains("\"run.csv\""));
        assert!(src.contains("savefig"));
    }
}
