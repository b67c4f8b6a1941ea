//! Plain-text configuration snapshots and checkpoints.
//!
//! Snapshot layout: line 1 holds `N`, line 2 the box lengths `L1 L2 L3`,
//! then `N` lines of `x y z`. All floats carry 17 significant digits so the
//! files round-trip doubles exactly. A checkpoint is a snapshot followed by
//! an `RNG v1` block with the integrator step, time stamp and the state of
//! every noise stream.

use crate::dynamics::{RngState, GENERATOR_ID};
use crate::error::{Error, Result};
use crate::system::{Configuration, SimBox, Vec3};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

const RNG_BLOCK_VERSION: &str = "v1";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_snapshot_to(config: &Configuration, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{}", config.len())?;
    let l = config.sim_box.lengths();
    writeln!(out, "{} {} {}", fmt(l[0]), fmt(l[1]), fmt(l[2]))?;
    for p in &config.positions {
        writeln!(out, "{} {} {}", fmt(p[0]), fmt(p[1]), fmt(p[2]))?;
    }
    Ok(())
}

pub fn write_snapshot(config: &Configuration, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_snapshot_to(config, &mut out)?;
    out.flush()?;
    Ok(())
}

struct Lines {
    inner: std::io::Lines<BufReader<File>>,
    path: String,
    line_no: usize,
}

impl Lines {
    fn next_line(&mut self) -> Result<Option<String>> {
        match self.inner.next() {
            None => Ok(None),
            Some(line) => {
                self.line_no += 1;
                Ok(Some(line?))
            }
        }
    }

    fn require_line(&mut self, what: &str) -> Result<String> {
        self.next_line()?.ok_or_else(|| Error::Integrity {
            path: self.path.to_string(),
            reason: format!("truncated before {what} (line {})", self.line_no + 1),
        })
    }

    fn corrupt(&self, reason: impl Into<String>) -> Error {
        Error::Integrity {
            path: self.path.clone(),
            reason: format!("{} (line {})", reason.into(), self.line_no),
        }
    }
}

fn parse_triplet(lines: &Lines, line: &str, what: &str) -> Result<Vec3> {
    let mut fields = line.split_whitespace();
    let mut out = [0.0; 3];
    for slot in out.iter_mut() {
        let field = fields
            .next()
            .ok_or_else(|| lines.corrupt(format!("{what}: expected 3 fields")))?;
        *slot = field
            .parse::<f64>()
            .map_err(|_| lines.corrupt(format!("{what}: bad float {field:?}")))?;
    }
    if fields.next().is_some() {
        return Err(lines.corrupt(format!("{what}: more than 3 fields")));
    }
    Ok(out)
}

fn read_snapshot_body(lines: &mut Lines) -> Result<Configuration> {
    let n_line = lines.require_line("particle count")?;
    let n: usize = n_line
        .trim()
        .parse()
        .map_err(|_| lines.corrupt(format!("bad particle count {n_line:?}")))?;
    if n == 0 {
        return Err(lines.corrupt("particle count must be positive"));
    }
    let box_line = lines.require_line("box lengths")?;
    let lengths = parse_triplet(lines, &box_line, "box lengths")?;
    let sim_box = SimBox::new(lengths)?;
    let mut positions = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lines.require_line("particle position")?;
        positions.push(parse_triplet(lines, &line, "position")?);
    }
    Configuration::new(sim_box, positions)
}

fn open(path: &Path) -> Result<(Lines, String)> {
    let shown = path.display().to_string();
    let file = File::open(path)?;
    let lines = Lines {
        inner: BufReader::new(file).lines(),
        path: shown.clone(),
        line_no: 0,
    };
    Ok((lines, shown))
}

pub fn read_snapshot(path: &Path) -> Result<Configuration> {
    let (mut lines, _) = open(path)?;
    let config = read_snapshot_body(&mut lines)?;
    if let Some(extra) = lines.next_line()? {
        if !extra.trim().is_empty() {
            return Err(lines.corrupt("trailing content after positions"));
        }
    }
    Ok(config)
}

/// Full integration state: configuration plus noise-stream states.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: Configuration,
    pub rng_states: Vec<RngState>,
    pub step: u64,
}

pub fn write_checkpoint(cp: &Checkpoint, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_snapshot_to(&cp.config, &mut out)?;
    writeln!(out, "RNG {RNG_BLOCK_VERSION}")?;
    writeln!(out, "generator {GENERATOR_ID}")?;
    writeln!(out, "step {}", cp.step)?;
    writeln!(out, "time {}", fmt(cp.config.time))?;
    writeln!(out, "streams {}", cp.rng_states.len())?;
    for state in &cp.rng_states {
        writeln!(out, "stream {} seed {} pos {:032x}", state.stream, state.seed, state.word_pos)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let (mut lines, shown) = open(path)?;
    let mut config = read_snapshot_body(&mut lines)?;

    let header = lines.require_line("RNG block")?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("RNG") {
        return Err(lines.corrupt("expected RNG block header"));
    }
    let version = fields.next().unwrap_or("").to_string();
    if version != RNG_BLOCK_VERSION {
        return Err(Error::UnsupportedVersion {
            path: shown,
            found: version,
            expected: RNG_BLOCK_VERSION.to_string(),
        });
    }

    let gen_line = lines.require_line("generator id")?;
    let generator = gen_line
        .strip_prefix("generator ")
        .ok_or_else(|| lines.corrupt("expected generator line"))?
        .trim()
        .to_string();

    let step_line = lines.require_line("step")?;
    let step: u64 = step_line
        .strip_prefix("step ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| lines.corrupt("expected step line"))?;

    let time_line = lines.require_line("time")?;
    let time: f64 = time_line
        .strip_prefix("time ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| lines.corrupt("expected time line"))?;

    let count_line = lines.require_line("stream count")?;
    let n_streams: usize = count_line
        .strip_prefix("streams ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| lines.corrupt("expected streams line"))?;

    let mut rng_states = Vec::with_capacity(n_streams);
    for _ in 0..n_streams {
        let line = lines.require_line("stream state")?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 6 || parts[0] != "stream" || parts[2] != "seed" || parts[4] != "pos" {
            return Err(lines.corrupt(format!("malformed stream line {line:?}")));
        }
        let stream: u64 = parts[1]
            .parse()
            .map_err(|_| lines.corrupt("bad stream index"))?;
        let seed: u64 = parts[3].parse().map_err(|_| lines.corrupt("bad seed"))?;
        let word_pos = u128::from_str_radix(parts[5], 16)
            .map_err(|_| lines.corrupt("bad hex word position"))?;
        rng_states.push(RngState {
            generator: generator.clone(),
            seed,
            stream,
            word_pos,
        });
    }
    if rng_states.is_empty() {
        return Err(lines.corrupt("checkpoint carries no noise streams"));
    }
    config.time = time;
    Ok(Checkpoint {
        config,
        rng_states,
        step,
    })
}
