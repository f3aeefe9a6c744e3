//! Effective run configuration. Flags override the TOML config file, which
//! overrides the defaults; environment variables count as flags.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use loopscan::evaluation::{Granularity, MatchPolicy};
use loopscan::extractor::DEFAULT_CONTEXT_LINES;
use loopscan::llm_client::ModelEndpoint;
use loopscan::prompt::{DEFAULT_MAX_FINDINGS, DEFAULT_PYTHON_VERSION};
use loopscan::{Category, DetectorConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    RuleScan,
    LlmScan,
    Eval,
    GenCorpus,
    Report,
}

/// Endpoint settings as they appear in the config file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointFile {
    pub url: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    pub timeout_ms: Option<u64>,
    pub retries: Option<u32>,
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyFile {
    pub line_tolerance: Option<usize>,
    pub granularity: Option<Granularity>,
}

/// The TOML config file. Relative paths resolve against the file's directory.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    pub categories: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub context_lines: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub python_version: Option<String>,
    pub max_findings: Option<usize>,
    pub whole_file: Option<bool>,
    pub record: Option<PathBuf>,
    pub replay: Option<PathBuf>,
    pub endpoint: EndpointFile,
    pub policy: PolicyFile,
    pub detectors: Option<DetectorConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.corpus, &mut cfg.out, &mut cfg.record, &mut cfg.replay].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

pub fn parse_categories(items: &[String]) -> Result<BTreeSet<Category>> {
    let mut out = BTreeSet::new();
    for item in items.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        if item == "all" {
            out.extend(Category::ALL);
        } else {
            out.insert(item.parse::<Category>()?);
        }
    }
    if out.is_empty() {
        bail!("no categories selected");
    }
    Ok(out)
}

/// Everything one command needs, after merging all sources.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub corpus_path: Option<PathBuf>,
    pub categories: BTreeSet<Category>,
    pub endpoint: Option<ModelEndpoint>,
    pub policy: MatchPolicy,
    pub context_lines: usize,
    pub output_dir: PathBuf,
    pub record_path: Option<PathBuf>,
    pub replay_path: Option<PathBuf>,
    pub seed: u64,
    /// Worker threads; `None` picks the per-mode default.
    pub jobs: Option<usize>,
    pub detectors: DetectorConfig,
    pub python_version: String,
    pub max_findings: usize,
    pub whole_file: bool,
    pub dump_prompts: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        RunConfig {
            mode,
            corpus_path: None,
            categories: Category::ALL.into_iter().collect(),
            endpoint: None,
            policy: MatchPolicy::default(),
            context_lines: DEFAULT_CONTEXT_LINES,
            output_dir: PathBuf::from("loopscan-out"),
            record_path: None,
            replay_path: None,
            seed: 1,
            jobs: None,
            detectors: DetectorConfig::default(),
            python_version: DEFAULT_PYTHON_VERSION.to_string(),
            max_findings: DEFAULT_MAX_FINDINGS,
            whole_file: false,
            dump_prompts: None,
        }
    }

    /// Applies the config file on top of the defaults.
    pub fn with_file(mut self, file: FileConfig) -> Result<Self> {
        if let Some(v) = file.corpus {
            self.corpus_path = Some(v);
        }
        if let Some(v) = file.categories {
            self.categories = parse_categories(&v)?;
        }
        if let Some(v) = file.out {
            self.output_dir = v;
        }
        if let Some(v) = file.context_lines {
            self.context_lines = v;
        }
        if let Some(v) = file.seed {
            self.seed = v;
        }
        if let Some(v) = file.jobs {
            self.jobs = Some(v);
        }
        if let Some(v) = file.python_version {
            self.python_version = v;
        }
        if let Some(v) = file.max_findings {
            self.max_findings = v;
        }
        if let Some(v) = file.whole_file {
            self.whole_file = v;
        }
        if let Some(v) = file.record {
            self.record_path = Some(v);
        }
        if let Some(v) = file.replay {
            self.replay_path = Some(v);
        }
        if let Some(v) = file.detectors {
            self.detectors = v;
        }
        self.apply_policy(file.policy.line_tolerance, file.policy.granularity)?;
        self.apply_endpoint(&file.endpoint);
        Ok(self)
    }

    pub fn apply_policy(&mut self, tolerance: Option<usize>, granularity: Option<Granularity>) -> Result<()> {
        self.policy = MatchPolicy::new(
            tolerance.unwrap_or(self.policy.line_tolerance()),
            granularity.unwrap_or(self.policy.granularity()),
        )?;
        Ok(())
    }

    /// Merges endpoint fields. An endpoint exists once a URL or model is known.
    pub fn apply_endpoint(&mut self, e: &EndpointFile) {
        if self.endpoint.is_none() && (e.url.is_some() || e.model.is_some()) {
            self.endpoint = Some(ModelEndpoint::new("", ""));
        }
        let Some(ep) = self.endpoint.as_mut() else { return };
        if let Some(v) = &e.url {
            ep.base_url = v.clone();
        }
        if let Some(v) = &e.model {
            ep.model_name = v.clone();
        }
        if let Some(v) = e.temperature {
            ep.temperature = v;
        }
        if let Some(v) = e.max_tokens {
            ep.max_tokens = v;
        }
        if let Some(v) = e.timeout_ms {
            ep.timeout_ms = v;
        }
        if let Some(v) = e.retries {
            ep.retries = v;
        }
        if let Some(v) = e.max_in_flight {
            ep.max_in_flight = v;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == Mode::LlmScan {
            match (&self.endpoint, &self.replay_path) {
                (None, None) => bail!("llm-scan needs an endpoint (--endpoint-url and --model) or --replay"),
                (Some(ep), None) => {
                    if ep.base_url.is_empty() {
                        bail!("llm-scan needs --endpoint-url (or LOOPSCAN_ENDPOINT_URL)");
                    }
                    if ep.model_name.is_empty() {
                        bail!("llm-scan needs --model (or LOOPSCAN_MODEL)");
                    }
                    ep.validate()?;
                }
                _ => {}
            }
            if self.max_findings == 0 {
                bail!("max_findings must be positive");
            }
        }
        if matches!(self.mode, Mode::RuleScan | Mode::LlmScan | Mode::Eval) && self.corpus_path.is_none() {
            bail!("--corpus is required");
        }
        Ok(())
    }

    /// Hex SHA-256 over the settings that shape output content. File
    /// locations and transport settings are excluded.
    /// `endpoint` is the one actually queried (for model scans).
    pub fn fingerprint(&self, endpoint: Option<&ModelEndpoint>) -> String {
        let view = FingerprintView {
            mode: self.mode,
            categories: self.categories.iter().map(|c| c.id()).collect(),
            detectors: matches!(self.mode, Mode::RuleScan).then_some(&self.detectors),
            llm: matches!(self.mode, Mode::LlmScan).then(|| LlmView {
                model: endpoint.map_or("", |e| e.model_name.as_str()),
                temperature: endpoint.map_or(0.0, |e| e.temperature),
                max_tokens: endpoint.map_or(0, |e| e.max_tokens),
                context_lines: self.context_lines,
                whole_file: self.whole_file,
                python_version: &self.python_version,
                max_findings: self.max_findings,
            }),
            policy: matches!(self.mode, Mode::Eval).then_some(&self.policy),
        };
        let bytes = serde_json::to_vec(&view).expect("fingerprint view serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Serialize)]
struct LlmView<'a> {
    model: &'a str,
    temperature: f64,
    max_tokens: u32,
    context_lines: usize,
    whole_file: bool,
    python_version: &'a str,
    max_findings: usize,
}

#[derive(Serialize)]
struct FingerprintView<'a> {
    mode: Mode,
    categories: Vec<&'static str>,
    detectors: Option<&'a DetectorConfig>,
    llm: Option<LlmView<'a>>,
    policy: Option<&'a MatchPolicy>,
}

/// Combines fingerprints of chained steps (for example eval over a scan).
pub fn chain_fingerprint(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories_parse() {
        assert_eq!(parse_categories(&["all".into()]).unwrap().len(), 3);
        let two = parse_categories(&["loop_control_logic, resource_efficiency".into()]).unwrap();
        assert_eq!(two.len(), 2);
        assert!(parse_categories(&["bogus".into()]).is_err());
        assert!(parse_categories(&[]).is_err());
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("loopscan.toml");
        fs::write(
            &path,
            "corpus = \"c.json\"\ncategories = [\"security_in_loop\"]\n[endpoint]\nurl = \"http://h:1\"\nmodel = \"m\"\n[policy]\nline_tolerance = 0\n",
        )
        .unwrap();
        let cfg = RunConfig::new(Mode::LlmScan).with_file(FileConfig::load(&path).unwrap()).unwrap();
        assert_eq!(cfg.corpus_path.as_deref(), Some(dir.path().join("c.json").as_path()));
        assert_eq!(cfg.categories, BTreeSet::from([Category::SecurityInLoop]));
        assert_eq!(cfg.policy.line_tolerance(), 0);
        cfg.validate().unwrap();

        let mut overridden = cfg.clone();
        overridden.apply_endpoint(&EndpointFile { model: Some("other".into()), ..Default::default() });
        assert_eq!(overridden.endpoint.as_ref().unwrap().model_name, "other");
        assert_ne!(cfg.fingerprint(cfg.endpoint.as_ref()), overridden.fingerprint(overridden.endpoint.as_ref()));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        fs::write(&path, "corpse = \"x\"\n").unwrap();
        assert!(FileConfig::load(&path).is_err());
    }

    #[test]
    fn llm_scan_requires_a_source() {
        let mut cfg = RunConfig::new(Mode::LlmScan);
        cfg.corpus_path = Some("c.json".into());
        assert!(cfg.validate().is_err());
        cfg.replay_path = Some("run.jsonl".into());
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn fingerprint_ignores_paths() {
        let mut a = RunConfig::new(Mode::RuleScan);
        let mut b = a.clone();
        a.output_dir = "x".into();
        b.output_dir = "y".into();
        assert_eq!(a.fingerprint(None), b.fingerprint(None));
    }
}
