use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{data_err, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects everything a rerun needs: resolved settings, the seed, input
/// digests, output names. Holds no clock or host state, so two identical
/// runs write identical manifests.
pub struct RunContext {
    out_dir: PathBuf,
    command: String,
    settings: BTreeMap<String, String>,
    seed: Option<u64>,
    inputs: Vec<(String, String)>,
    outputs: Vec<String>,
}

impl RunContext {
    pub fn new(command: &str, out_dir: &Path) -> CliResult<RunContext> {
        fs::create_dir_all(out_dir).map_err(|e| data_err(format!("{}: {e}", out_dir.display())))?;
        Ok(RunContext {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            settings: BTreeMap::new(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn setting(&mut self, key: &str, value: impl std::fmt::Display) {
        self.settings.insert(key.to_string(), value.to_string());
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.setting("seed", seed);
    }

    /// Read one input file, recording its digest.
    pub fn input_text(&mut self, path: &Path) -> CliResult<String> {
        let bytes = fs::read(path).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        self.inputs.push((path.display().to_string(), sha256_hex(&bytes)));
        String::from_utf8(bytes).map_err(|_| data_err(format!("{}: not UTF-8", path.display())))
    }

    /// Record every regular file directly under a directory input.
    pub fn input_dir(&mut self, dir: &Path) -> CliResult<()> {
        let entries = fs::read_dir(dir).map_err(|e| data_err(format!("{}: {e}", dir.display())))?;
        let mut files: Vec<PathBuf> =
            entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_file()).collect();
        files.sort();
        for f in files {
            let bytes = fs::read(&f)?;
            self.inputs.push((f.display().to_string(), sha256_hex(&bytes)));
        }
        Ok(())
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    /// Write the manifest last so it lists every output.
    pub fn finish(self) -> CliResult<PathBuf> {
        let mut settings_line = String::new();
        for (k, v) in &self.settings {
            settings_line.push_str(k);
            settings_line.push('=');
            settings_line.push_str(v);
            settings_line.push('\n');
        }
        let inputs: Vec<serde_json::Value> = self
            .inputs
            .iter()
            .map(|(p, d)| serde_json::json!({"path": p, "sha256": d}))
            .collect();
        let manifest = serde_json::json!({
            "command": self.command,
            "settings": self.settings,
            "settings_sha256": sha256_hex(settings_line.as_bytes()),
            "seed": self.seed,
            "inputs": inputs,
            "outputs": self.outputs,
        });
        let path = self.out_dir.join("manifest.json");
        fs::write(&path, format!("{manifest:#}\n"))
            .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}
