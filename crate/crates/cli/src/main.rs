use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use crldc::adversary::AttackKind;
use crldc::crldc::{EncodeDebug, Encoding};
use crldc::distance::DistanceReport;
use crldc::harness::{self, CodeKind, Experiment, ExperimentConfig, IndexCount};
use crldc::util::derive_seed;
use crldc::{BitString, ReceivedWordOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "crldc", version, about = "Relaxed locally decodable codes with signed blocks")]
struct Cli {
    /// TOML file with experiment settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Code to use when no config file is given.
    #[arg(long, global = true)]
    code: Option<CodeArg>,
    /// Master seed; for `decode`, the decoder seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    instances: Option<usize>,
    /// Attack name, e.g. `rotation-insdel`.
    #[arg(long, global = true)]
    attack: Option<String>,
    /// Attack budget as a rational, e.g. `1/8`.
    #[arg(long, global = true)]
    rho: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum CodeArg {
    Hamming,
    Insdel,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode a message into a codeword file plus a public sidecar.
    Encode {
        /// Text file of 0/1 characters; a seeded random message when absent.
        #[arg(long)]
        message: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply an attack to a codeword file.
    Corrupt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode one message bit from a word file.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        index: usize,
    },
    /// Estimate the Fool predicate.
    Fool {
        /// Per-index counts as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Estimate the Good set and compare it with δ·k.
    Limit {
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare per-run query counts with the declared bound.
    AuditLocality,
    /// Print every derived parameter.
    Worksheet {
        #[arg(long)]
        json: bool,
    },
    /// Optimal block decomposition and γ-good classification of one instance.
    Blockmap {
        #[arg(long, default_value_t = 0)]
        instance: usize,
    },
}

/// Public metadata stored next to a codeword or word file.
#[derive(Serialize, Deserialize)]
struct Sidecar {
    config: ExperimentConfig,
    public: EncodeDebug,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    corruption: Option<CorruptionInfo>,
}

#[derive(Serialize, Deserialize)]
struct CorruptionInfo {
    attack: AttackKind,
    seed: u64,
    distance: DistanceReport,
}

fn sidecar_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

fn read_sidecar(p: &Path) -> Result<Option<Sidecar>> {
    let path = sidecar_path(p);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?))
}

fn read_word(p: &Path) -> Result<BitString> {
    let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
    BitString::from_framed(&bytes).with_context(|| format!("decoding {}", p.display()))
}

fn write_word(p: &Path, w: &BitString, side: &Sidecar) -> Result<()> {
    fs::write(p, w.to_framed()).with_context(|| format!("writing {}", p.display()))?;
    let path = sidecar_path(p);
    fs::write(&path, serde_json::to_string_pretty(side)?).with_context(|| format!("writing {}", path.display()))
}

impl Cli {
    fn base_config(&self) -> Result<ExperimentConfig> {
        match (&self.config, self.code) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
            }
            (None, Some(CodeArg::Hamming)) => Ok(ExperimentConfig::new(CodeKind::Hamming)),
            (None, Some(CodeArg::Insdel)) => Ok(ExperimentConfig::new(CodeKind::Insdel)),
            (None, None) => bail!("pass --config <file> or --code <hamming|insdel>"),
        }
    }

    fn apply(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(n) = self.instances {
            cfg.instances = n;
        }
        if let Some(a) = &self.attack {
            cfg.attack = AttackKind::parse(a).with_context(|| format!("unknown attack {a:?}"))?;
        }
        if let Some(r) = &self.rho {
            cfg.budget = Some(r.clone());
        }
        Ok(cfg)
    }

    fn config(&self) -> Result<ExperimentConfig> {
        self.apply(self.base_config()?)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes())?;
                if !text.ends_with('\n') {
                    out.write_all(b"\n")?;
                }
                Ok(())
            }
        }
    }

    fn report<T: Serialize>(&self, value: &T) -> Result<()> {
        self.emit(&serde_json::to_string_pretty(value)?)
    }
}

fn write_csv<'a>(path: &Path, rows: impl Iterator<Item = (usize, &'a [IndexCount])>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["instance", "index", "correct", "bot", "wrong", "trials"])?;
    for row in harness::counts_csv_rows(rows) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_message(path: &Path) -> Result<BitString> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let bits: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    BitString::parse(&bits).with_context(|| format!("parsing {}", path.display()))
}

/// Runs one subcommand; `Ok(false)` is a failed verdict.
fn run(cli: &Cli) -> Result<bool> {
    match &cli.cmd {
        Cmd::Encode { message, out } => {
            let cfg = cli.config()?;
            let exp = Experiment::new(cfg.clone())?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0));
            let x = match message {
                Some(p) => read_message(p)?,
                None => (0..exp.k()).map(|_| rng.gen()).collect(),
            };
            let Encoding { codeword, debug } = exp.encode(&x, &mut rng)?;
            write_word(out, &codeword, &Sidecar { config: cfg, public: debug, corruption: None })?;
            cli.report(&serde_json::json!({ "codeword_bits": codeword.len(), "message_bits": x.len() }))?;
            Ok(true)
        }
        Cmd::Corrupt { input, out } => {
            let Some(side) = read_sidecar(input)? else {
                bail!("{} has no sidecar; corrupt needs the public parameters", input.display());
            };
            let cfg = cli.apply(side.config)?;
            let exp = Experiment::new(cfg.clone())?;
            let codeword = read_word(input)?;
            let seed = derive_seed(cfg.seed, 1);
            let enc = Encoding { codeword, debug: side.public };
            let corruption = exp.corrupt(&enc, seed)?;
            let info = CorruptionInfo { attack: cfg.attack, seed, distance: corruption.distance };
            cli.report(&info)?;
            write_word(out, &corruption.word, &Sidecar { config: cfg, public: enc.debug, corruption: Some(info) })?;
            Ok(true)
        }
        Cmd::Decode { input, index } => {
            let cfg = match read_sidecar(input)? {
                Some(side) => side.config,
                None => cli.base_config()?,
            };
            let exp = Experiment::new(cfg)?;
            let word = read_word(input)?;
            let mut oracle = ReceivedWordOracle::new(&word);
            let outcome = exp.decoder().decode(&mut oracle, *index, cli.seed.unwrap_or(0))?;
            cli.report(&outcome)?;
            Ok(true)
        }
        Cmd::Fool { csv } => {
            let rep = harness::estimate_fool(&Experiment::new(cli.config()?)?)?;
            if let Some(p) = csv {
                write_csv(p, rep.instances.iter().map(|i| (i.instance, i.counts.as_slice())))?;
            }
            cli.report(&rep)?;
            Ok(!rep.fooled)
        }
        Cmd::Limit { csv } => {
            let rep = harness::estimate_limit(&Experiment::new(cli.config()?)?)?;
            if let Some(p) = csv {
                write_csv(p, rep.instances.iter().map(|i| (i.instance, i.counts.as_slice())))?;
            }
            cli.report(&rep)?;
            Ok(!rep.limited)
        }
        Cmd::AuditLocality => {
            let rep = harness::audit_locality(&Experiment::new(cli.config()?)?)?;
            cli.report(&rep)?;
            Ok(rep.check().is_ok())
        }
        Cmd::Worksheet { json } => {
            let ws = harness::param_worksheet(&Experiment::new(cli.config()?)?);
            if *json {
                cli.report(&ws)?;
            } else {
                cli.emit(&ws.render())?;
            }
            Ok(true)
        }
        Cmd::Blockmap { instance } => {
            let rep = harness::blockmap(&Experiment::new(cli.config()?)?, *instance)?;
            cli.report(&rep)?;
            Ok(rep.bounds.holds())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
