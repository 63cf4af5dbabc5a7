//! Artifacts are assembled in memory and written only once a run has
//! finished, so a failed run leaves the output directory untouched.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

#[derive(Serialize)]
struct Entry<'a> {
    name: &'a str,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Versions {
    roughstep: &'static str,
    #[serde(rename = "roughstep-cli")]
    cli: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    status: &'a str,
    seed: Option<u64>,
    versions: Versions,
    config: &'a C,
    artifacts: Vec<Entry<'a>>,
}

impl Artifacts {
    pub fn text(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body.into_bytes()));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut body = serde_json::to_string_pretty(value).expect("artifact serializes");
        body.push('\n');
        self.text(name, body);
    }

    /// Writes every artifact and then `manifest.json` with their digests.
    pub fn write<C: Serialize>(
        mut self,
        dir: &Path,
        command: &str,
        status: &str,
        seed: Option<u64>,
        config: &C,
    ) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, body) in &self.files {
            fs::write(dir.join(name), body)?;
        }
        let manifest = Manifest {
            command,
            status,
            seed,
            versions: Versions {
                roughstep: roughstep::VERSION,
                cli: env!("CARGO_PKG_VERSION"),
            },
            config,
            artifacts: self
                .files
                .iter()
                .map(|(name, body)| Entry {
                    name,
                    bytes: body.len(),
                    sha256: hex::encode(Sha256::digest(body)),
                })
                .collect(),
        };
        let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        body.push('\n');
        self.files.clear();
        fs::write(dir.join("manifest.json"), body)
    }
}
