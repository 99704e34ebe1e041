use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::multiscale::{Method, MsConfig, SigmaRule};
use crate::tld::TldConfig;
use crate::wavelets::SubbandKind;

/// Where the test images come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    /// `<data_dir>/classic`.
    Classic,
    /// `<data_dir>/csr`.
    Csr,
    /// Any directory of grayscale images.
    Dir(PathBuf),
}

impl Dataset {
    pub fn label(&self) -> String {
        match self {
            Dataset::Classic => "classic".into(),
            Dataset::Csr => "csr".into(),
            Dataset::Dir(p) => format!("custom:{}", p.display()),
        }
    }
}

/// Everything a `bench run` needs, read from a `key = value` text file.
///
/// ```text
/// # comments start with '#'
/// dataset = classic          # classic | csr | <directory>
/// data_dir = data
/// images = barbara, lena     # optional subset, by file stem
/// sigmas = 15, 25, 50
/// methods = tld, mtld, mmtld, fmmtld
/// scales = 1
/// mix_scales = 1
/// seed = 2024
/// output = reports/classic
/// ```
///
/// Optional keys: `patch`, `c`, `lambda0`, `lambda_scale`, `mu`, `iters`,
/// `l0`, `sigma_factor`, `mix_bank` (`iuwt` | `dwt`), `literal_fmmtld`,
/// `share_calls`, `deterministic`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub dataset: Dataset,
    pub data_dir: PathBuf,
    pub images: Option<Vec<String>>,
    pub sigmas: Vec<f64>,
    pub methods: Vec<Method>,
    pub ms: MsConfig,
    pub tld: TldConfig,
    pub seed: u64,
    pub output: PathBuf,
    /// Reuse single-scale results shared between methods of one cell.
    /// Outputs are unchanged; per-method runtimes then exclude reused calls.
    pub share_calls: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            dataset: Dataset::Classic,
            data_dir: PathBuf::from("data"),
            images: None,
            sigmas: vec![15.0, 25.0, 50.0],
            methods: vec![Method::Single, Method::Mtld, Method::Mmtld, Method::Fmmtld],
            ms: MsConfig::default(),
            tld: TldConfig::default(),
            seed: 2024,
            output: PathBuf::from("reports"),
            share_calls: false,
        }
    }
}

fn list<T>(value: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect()
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected true or false, got `{value}`"))),
    }
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dataset" => {
                    spec.dataset = match value {
                        "classic" => Dataset::Classic,
                        "csr" => Dataset::Csr,
                        dir => Dataset::Dir(PathBuf::from(dir)),
                    }
                }
                "data_dir" => spec.data_dir = PathBuf::from(value),
                "images" => spec.images = Some(list(value, |s| Ok(s.to_string()))?),
                "sigmas" => spec.sigmas = list(value, |s| number(key, s))?,
                "methods" => spec.methods = list(value, str::parse)?,
                "scales" => spec.ms.scales = number(key, value)?,
                "mix_scales" => spec.ms.mix_scales = number(key, value)?,
                "mix_bank" => spec.ms.mix_bank = value.parse::<SubbandKind>()?,
                "sigma_factor" => spec.ms.sigma_rule = SigmaRule::Scaled(number(key, value)?),
                "literal_fmmtld" => spec.ms.literal_fmmtld = boolean(key, value)?,
                "deterministic" => {
                    let d = boolean(key, value)?;
                    spec.ms.deterministic = d;
                    spec.tld.deterministic = d;
                }
                "patch" => spec.tld.p = number(key, value)?,
                "c" => spec.tld.c = number(key, value)?,
                "lambda0" => spec.tld.lambda0 = number(key, value)?,
                "lambda_scale" => spec.tld.lambda_scale = value.parse()?,
                "mu" => spec.tld.mu = number(key, value)?,
                "iters" => spec.tld.iters = number(key, value)?,
                "l0" => spec.tld.l0 = Some(number(key, value)?),
                "seed" => spec.seed = number(key, value)?,
                "output" => spec.output = PathBuf::from(value),
                "share_calls" => spec.share_calls = boolean(key, value)?,
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigmas.is_empty() {
            return Err(Error::Config("`sigmas` must not be empty".into()));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::Config(format!("sigmas must be positive, got {s}")));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("`methods` must not be empty".into()));
        }
        if matches!(&self.images, Some(v) if v.is_empty()) {
            return Err(Error::Config("`images` must not be empty when given".into()));
        }
        self.ms.validate()?;
        self.tld.validate()
    }

    pub fn dataset_dir(&self) -> PathBuf {
        match &self.dataset {
            Dataset::Classic => self.data_dir.join("classic"),
            Dataset::Csr => self.data_dir.join("csr"),
            Dataset::Dir(p) => p.clone(),
        }
    }

    /// Canonical text of every setting that influences the results.
    pub fn canonical(&self) -> String {
        let sigmas: Vec<String> = self.sigmas.iter().map(|s| s.to_string()).collect();
        let methods: Vec<&str> = self.methods.iter().map(|m| m.id()).collect();
        format!(
            "dataset={} images={} sigmas={} methods={} seed={} {} {}",
            self.dataset.label(),
            self.images.as_ref().map(|v| v.join(",")).unwrap_or_else(|| "*".into()),
            sigmas.join(","),
            methods.join(","),
            self.seed,
            self.ms.describe(),
            self.tld.describe()
        )
    }
}
