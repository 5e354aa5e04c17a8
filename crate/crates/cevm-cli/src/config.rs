//! Run configuration: defaults, JSON file layer, flag overrides, validation
//! and the config hash stamped into every output file.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cevm::ExampleId;

use crate::CommonArgs;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl From<cevm::CevmError> for CliError {
    fn from(e: cevm::CevmError) -> Self {
        match e {
            cevm::CevmError::InvalidArgument(_) => CliError::Config(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZGridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// File layer of the configuration; every field optional so flags can fill
/// the gaps.
#[derive(Debug, Default, Deserialize)]
struct FileConfig {
    example: Option<String>,
    n: Option<usize>,
    seed: Option<u64>,
    thresholds: Option<Vec<f64>>,
    z_grid: Option<ZGridSpec>,
    output_dir: Option<String>,
}

/// Effective configuration of one CLI run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub example: Option<ExampleId>,
    pub n: usize,
    pub seed: u64,
    pub thresholds: Vec<f64>,
    /// Whether thresholds were given explicitly (flag or file) rather than
    /// defaulted; commands with their own natural grid honor this.
    #[serde(skip)]
    pub thresholds_explicit: bool,
    pub z_grid: ZGridSpec,
    pub output_dir: String,
}

impl RunConfig {
    pub fn build(command: &str, args: &CommonArgs) -> Result<RunConfig, CliError> {
        let file: FileConfig = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("config: cannot read {path}: {e}"))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("config: invalid JSON in {path}: {e}")))?
            }
            None => FileConfig::default(),
        };

        let example_text = args.example.clone().or(file.example);
        let example = match &example_text {
            Some(s) => Some(ExampleId::parse(s).ok_or_else(|| {
                CliError::Config(format!(
                    "example: unknown id {s:?} (expected ex2_3, ex3_1, ex3_2, ex4_2 or ex4_4)"
                ))
            })?),
            None => None,
        };

        let mut thresholds_explicit = true;
        let thresholds = match args.thresholds.as_deref() {
            Some(text) => parse_thresholds(text)?,
            None => file.thresholds.unwrap_or_else(|| {
                thresholds_explicit = false;
                vec![4.0, 6.0, 8.0]
            }),
        };
        if thresholds.is_empty() {
            return Err(CliError::Config("thresholds: must not be empty".into()));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(format!(
                "thresholds: must be strictly increasing, got {thresholds:?}"
            )));
        }

        let z_grid = match args.zgrid.as_deref() {
            Some(text) => parse_zgrid(text)?,
            None => file.z_grid.unwrap_or(ZGridSpec {
                min: -10.0,
                max: 10.0,
                points: 512,
            }),
        };
        if z_grid.points < 2 {
            return Err(CliError::Config(format!(
                "zgrid: needs at least 2 points, got {}",
                z_grid.points
            )));
        }
        if !(z_grid.min < z_grid.max) {
            return Err(CliError::Config(format!(
                "zgrid: min must be below max, got {},{}",
                z_grid.min, z_grid.max
            )));
        }

        let n = args.n.or(file.n).unwrap_or(2000);
        if n == 0 {
            return Err(CliError::Config("n: must be at least 1".into()));
        }

        Ok(RunConfig {
            command: command.to_string(),
            example,
            n,
            seed: args.seed.or(file.seed).unwrap_or(1),
            thresholds,
            z_grid,
            output_dir: args
                .out
                .clone()
                .or(file.output_dir)
                .unwrap_or_else(|| "cevm_out".to_string()),
        })
    }

    pub fn require_example(&self) -> Result<ExampleId, CliError> {
        self.example.ok_or_else(|| {
            CliError::Config(format!(
                "example: required for the {} command",
                self.command
            ))
        })
    }

    /// Hex prefix of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Comment line placed at the top of every output file.
    pub fn header_line(&self) -> String {
        format!(
            "# cevm command={} config_hash={} seed={}",
            self.command,
            self.hash(),
            self.seed
        )
    }

    pub fn z_grid_points(&self) -> Vec<f64> {
        let k = self.z_grid.points;
        (0..k)
            .map(|i| {
                self.z_grid.min
                    + (self.z_grid.max - self.z_grid.min) * i as f64 / (k - 1) as f64
            })
            .collect()
    }
}

fn parse_thresholds(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("thresholds: bad number {tok:?}")))
        })
        .collect()
}

fn parse_zgrid(text: &str) -> Result<ZGridSpec, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "zgrid: expected min,max,points, got {text:?}"
        )));
    }
    let min = parts[0]
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("zgrid: bad min {:?}", parts[0])))?;
    let max = parts[1]
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("zgrid: bad max {:?}", parts[1])))?;
    let points = parts[2]
        .parse::<usize>()
        .map_err(|_| CliError::Config(format!("zgrid: bad point count {:?}", parts[2])))?;
    Ok(ZGridSpec { min, max, points })
}
