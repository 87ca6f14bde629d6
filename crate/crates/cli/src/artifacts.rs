//! On-disk artifact formats: oracle documents, front documents, run
//! manifests, and the small text parsers for CLI flags.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mergefront::moop::{Direction, FrontPoint, ParetoFront, Provenance};
use mergefront::oracle::{MetricRange, SyntheticLandscape, TaskLandscape};
use mergefront::{Error, Result};

/// Reproducible oracle description: the landscape plus the noise stream it
/// evaluates under.
#[derive(Debug, Serialize, Deserialize)]
pub struct OracleDocument {
    pub landscape: SyntheticLandscape,
    pub noise_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl OracleDocument {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let doc: OracleDocument = serde_json::from_reader(BufReader::new(file))?;
        doc.landscape.validate()?;
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

/// Input accepted by `gen-oracle`: either explicit per-task quadratics or a
/// request for a seeded random trade-off landscape.
#[derive(Debug, Serialize, Deserialize)]
pub struct OracleSpec {
    pub n_tasks: usize,
    #[serde(default)]
    pub tasks: Option<Vec<TaskLandscape>>,
    #[serde(default)]
    pub random: Option<RandomLandscape>,
    #[serde(default)]
    pub cubic_gamma: Option<f64>,
    #[serde(default)]
    pub noise_sigma: Option<f64>,
    #[serde(default)]
    pub noise_seed: Option<u64>,
    #[serde(default)]
    pub description: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RandomLandscape {
    pub seed: u64,
    pub link: MetricRange,
}

impl OracleSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    /// Builds and validates the landscape this spec describes.
    pub fn realize(&self, fallback_seed: u64) -> Result<OracleDocument> {
        let cubic_gamma = self.cubic_gamma.unwrap_or(0.0);
        let noise_sigma = self.noise_sigma.unwrap_or(0.0);
        let landscape = match (&self.tasks, &self.random) {
            (Some(tasks), None) => {
                if tasks.len() != self.n_tasks {
                    return Err(Error::LengthMismatch {
                        expected: self.n_tasks,
                        got: tasks.len(),
                    });
                }
                let landscape = SyntheticLandscape {
                    tasks: tasks.clone(),
                    cubic_gamma,
                    noise_sigma,
                };
                landscape.validate()?;
                landscape
            }
            (None, Some(random)) => mergefront::oracle::generate_tradeoff_landscape(
                self.n_tasks,
                random.link,
                cubic_gamma,
                noise_sigma,
                random.seed,
            )?,
            _ => {
                return Err(Error::InvalidParameter(
                    "oracle spec needs exactly one of `tasks` or `random`".into(),
                ))
            }
        };
        Ok(OracleDocument {
            landscape,
            noise_seed: self.noise_seed.unwrap_or(fallback_seed),
            description: self.description.clone(),
        })
    }
}

/// Serialized Pareto front with its generating-configuration digest.
#[derive(Debug, Serialize, Deserialize)]
pub struct FrontDocument {
    pub points: Vec<FrontPoint>,
    pub provenance: Provenance,
    pub spec_digest: String,
}

impl FrontDocument {
    pub fn from_front(front: &ParetoFront, spec_digest: &str) -> Self {
        Self {
            points: front.points.clone(),
            provenance: front.provenance,
            spec_digest: spec_digest.to_string(),
        }
    }

    pub fn into_front(self) -> ParetoFront {
        ParetoFront {
            points: self.points,
            provenance: self.provenance,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

/// Audit record of one run, written beside its artifacts. Timestamps are
/// excluded from all digests so reruns stay byte-comparable elsewhere.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub eval_count: u64,
}

/// SHA-256 hex digest of a configuration's canonical JSON encoding; stable
/// across platforms for identical configs.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// Parses a box flag: one `lo:hi` pair applied to every coordinate, or a
/// comma-separated pair per coordinate.
pub fn parse_box(text: &str, dim: usize) -> Result<Vec<(f64, f64)>> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse_pair = |pair: &str| -> Result<(f64, f64)> {
        let mut it = pair.split(':');
        let (lo, hi) = (it.next(), it.next());
        match (lo, hi, it.next()) {
            (Some(lo), Some(hi), None) => {
                let lo: f64 = lo.trim().parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad box bound `{lo}`"))
                })?;
                let hi: f64 = hi.trim().parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad box bound `{hi}`"))
                })?;
                Ok((lo, hi))
            }
            _ => Err(Error::InvalidParameter(format!(
                "box segment `{pair}` must look like lo:hi"
            ))),
        }
    };
    if parts.len() == 1 {
        let pair = parse_pair(parts[0])?;
        Ok(vec![pair; dim])
    } else if parts.len() == dim {
        parts.iter().map(|p| parse_pair(p)).collect()
    } else {
        Err(Error::InvalidParameter(format!(
            "box has {} segments but the problem has {dim} coordinates",
            parts.len()
        )))
    }
}

/// Parses a links flag: comma-separated `unbounded`, `bounded:l:u`, or
/// `lower:l`.
pub fn parse_links(text: &str, n_tasks: usize) -> Result<Vec<MetricRange>> {
    let parse_one = |part: &str| -> Result<MetricRange> {
        let fields: Vec<&str> = part.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad link number `{s}`")))
        };
        match fields.as_slice() {
            ["unbounded"] => Ok(MetricRange::Unbounded),
            ["bounded", l, u] => Ok(MetricRange::Bounded {
                lower: num(l)?,
                upper: num(u)?,
            }),
            ["lower", l] => Ok(MetricRange::LowerBounded { lower: num(l)? }),
            _ => Err(Error::InvalidParameter(format!(
                "link `{part}` must be unbounded, bounded:l:u, or lower:l"
            ))),
        }
    };
    let parts: Vec<&str> = text.split(',').collect();
    let links: Vec<MetricRange> = if parts.len() == 1 {
        vec![parse_one(parts[0])?; n_tasks]
    } else {
        parts.iter().map(|p| parse_one(p)).collect::<Result<_>>()?
    };
    if links.len() != n_tasks {
        return Err(Error::LengthMismatch {
            expected: n_tasks,
            got: links.len(),
        });
    }
    for link in &links {
        link.validate()?;
    }
    Ok(links)
}

/// Parses a directions flag: comma-separated `min` / `max`.
pub fn parse_directions(text: &str, n_tasks: usize) -> Result<Vec<Direction>> {
    let parse_one = |part: &str| -> Result<Direction> {
        match part.trim() {
            "min" | "minimize" => Ok(Direction::Minimize),
            "max" | "maximize" => Ok(Direction::Maximize),
            other => Err(Error::InvalidParameter(format!(
                "direction `{other}` must be min or max"
            ))),
        }
    };
    let parts: Vec<&str> = text.split(',').collect();
    let dirs: Vec<Direction> = if parts.len() == 1 {
        vec![parse_one(parts[0])?; n_tasks]
    } else {
        parts.iter().map(|p| parse_one(p)).collect::<Result<_>>()?
    };
    if dirs.len() != n_tasks {
        return Err(Error::LengthMismatch {
            expected: n_tasks,
            got: dirs.len(),
        });
    }
    Ok(dirs)
}

/// Parses a comma-separated list of reals.
pub fn parse_weights(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad weight `{s}`")))
        })
        .collect()
}

/// Default per-task direction: bounded metrics read as accuracies to
/// maximize, everything else as losses to minimize.
pub fn default_directions(links: &[MetricRange]) -> Vec<Direction> {
    links
        .iter()
        .map(|link| match link {
            MetricRange::Bounded { .. } => Direction::Maximize,
            _ => Direction::Minimize,
        })
        .collect()
}

/// Writes a coefficient-only CSV (`c_1,...,c_N`) at 17 significant digits.
pub fn save_samples_csv(path: &Path, samples: &[Vec<f64>], dim: usize) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    let header: Vec<String> = (1..=dim).map(|i| format!("c_{i}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for c in samples {
        let fields: Vec<String> = c.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a coefficient-only CSV written by [`save_samples_csv`].
pub fn load_samples_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    use std::io::BufRead;
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let header = header?;
    let columns: Vec<&str> = header.trim().split(',').collect();
    let dim = columns.len();
    for (i, column) in columns.iter().enumerate() {
        if *column != format!("c_{}", i + 1) {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected column `{column}`"),
            });
        }
    }
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != dim {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {dim} fields, got {}", fields.len()),
            });
        }
        let c: Vec<f64> = fields
            .iter()
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("bad number `{s}`: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        samples.push(c);
    }
    Ok(samples)
}
