//! Sweep configuration and its flat `key = value` text form.
//!
//! Every key in [`CONFIG_KEYS`] can appear in a config file and, spelled
//! with dashes, as a command-line flag. Later assignments override earlier
//! ones, so flags applied after the file take precedence.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::channel::{ArrayConfig, ChannelParams, MeanAngleRange, PowerProfile};
use crate::error::{Error, Result};
use crate::metrics::RateUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Joint,
    GreedyNoDeflation,
    FullDigital,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Joint, Algorithm::GreedyNoDeflation, Algorithm::FullDigital];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Joint => "joint",
            Algorithm::GreedyNoDeflation => "greedy_no_deflation",
            Algorithm::FullDigital => "full_digital",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SnrDb,
    NumAntennas,
    NumStreams,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::NumAntennas => "num_antennas",
            SweepAxis::NumStreams => "num_streams",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepAxis::SnrDb => (0..=8).map(|i| -20.0 + 5.0 * i as f64).collect(),
            SweepAxis::NumAntennas => vec![16.0, 32.0, 64.0, 128.0, 256.0],
            SweepAxis::NumStreams => vec![1.0, 2.0, 4.0, 8.0],
        }
    }

    /// Integer-valued axes.
    pub fn is_discrete(self) -> bool {
        !matches!(self, SweepAxis::SnrDb)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepAxis::SnrDb, SweepAxis::NumAntennas, SweepAxis::NumStreams]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep axis '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub channel: ChannelParams,
    pub codebook_bits_tx: u32,
    pub codebook_bits_rx: u32,
    pub dedupe_codebook: bool,
    pub n_streams: usize,
    pub algorithms: Vec<Algorithm>,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    /// Operating SNR for sweeps over antennas or streams.
    pub snr_db: f64,
    pub trials: usize,
    pub base_seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// Record wall-clock time per evaluation. Off by default because the
    /// timing column would make outputs differ between runs.
    pub timing: bool,
    pub rate_unit: RateUnit,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::from_pairs(Vec::<(String, String)>::new()).expect("built-in defaults are valid")
    }
}

/// A configuration key, its default and a one-line description.
#[derive(Debug, Clone, Copy)]
pub struct ConfigKey {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
    /// Boolean switch: a bare flag sets it to true.
    pub switch: bool,
}

const fn key(name: &'static str, default: &'static str, help: &'static str) -> ConfigKey {
    ConfigKey { name, default, help, switch: false }
}

pub const CONFIG_KEYS: &[ConfigKey] = &[
    key("antennas", "128", "antennas at each end (sets both N_t and N_r)"),
    key("tx_antennas", "antennas", "transmit antennas N_t"),
    key("rx_antennas", "antennas", "receive antennas N_r"),
    key("spacing", "0.5", "element spacing in wavelengths"),
    key("clusters", "10", "scattering clusters N_cl"),
    key("rays", "10", "rays per cluster N_ray"),
    key("angle_spread_deg", "2.5", "per-ray angle standard deviation in degrees"),
    key("aod_range_deg", "0,360", "interval for mean cluster AoDs, degrees"),
    key("aoa_range_deg", "random", "interval for mean cluster AoAs, or 'random' for a uniformly placed sector"),
    key("aoa_sector_deg", "60", "width of the random AoA sector, degrees"),
    key("power_profile", "exp07", "cluster power profile: exp07 or uniform"),
    key("bits", "6", "codebook bits at each end"),
    key("tx_bits", "bits", "transmit codebook bits"),
    key("rx_bits", "bits", "receive codebook bits"),
    ConfigKey { name: "dedupe_codebook", default: "false", help: "drop duplicate beams from the codebooks", switch: true },
    key("streams", "4", "data streams N_s"),
    key("rf_chains", "streams", "RF chains per end; must equal the stream count"),
    key("algorithms", "joint,greedy_no_deflation,full_digital", "algorithms to evaluate"),
    key("sweep", "snr_db", "sweep axis: snr_db, num_antennas or num_streams"),
    key("sweep_values", "axis default", "sweep grid (snr_db: -20:5:20, num_antennas: 16,32,64,128,256, num_streams: 1,2,4,8)"),
    key("snr_db", "20", "SNR in dB; a list here is the grid when sweeping snr_db"),
    key("trials", "500", "channel realizations per sweep point"),
    key("seed", "1", "base seed for the per-trial random streams"),
    key("workers", "0", "worker threads (0 = all cores)"),
    ConfigKey { name: "timing", default: "false", help: "record wall-clock time per evaluation", switch: true },
    key("rate_unit", "bits", "sum-rate log base: bits or nats"),
];

pub fn config_key(name: &str) -> Option<&'static ConfigKey> {
    CONFIG_KEYS.iter().find(|k| k.name == name)
}

/// Parses `key = value` lines. Blank lines and `#` comments are ignored.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let k = k.trim();
        if config_key(k).is_none() {
            return Err(Error::Config(format!("line {}: unknown key '{k}'", lineno + 1)));
        }
        pairs.push((k.to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Parses a comma-separated list whose items are numbers or `start:step:stop`
/// ranges (inclusive of `stop`).
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(parse_num(x)?),
            [a, s, b] => {
                let (start, step, stop) = (parse_num(a)?, parse_num(s)?, parse_num(b)?);
                if step.is_nan() || step <= 0.0 {
                    return Err(Error::Config(format!("range step must be positive in '{item}'")));
                }
                let n = ((stop - start) / step + 1e-9).floor();
                if n < 0.0 {
                    return Err(Error::Config(format!("empty range '{item}'")));
                }
                out.extend((0..=n as usize).map(|i| start + step * i as f64));
            }
            _ => return Err(Error::Config(format!("cannot parse list item '{item}'"))),
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!("empty list '{text}'")));
    }
    Ok(out)
}

fn parse_num(s: &str) -> Result<f64> {
    let x: f64 = s.trim().parse().map_err(|_| Error::Config(format!("'{s}' is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("'{s}' is not finite")));
    }
    Ok(x)
}

fn parse_int<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Config(format!("{key}: '{s}' is not a valid integer")))
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: '{s}' is not a boolean"))),
    }
}

fn parse_interval_deg(key: &str, s: &str) -> Result<(f64, f64)> {
    let v = parse_list(s)?;
    match v.as_slice() {
        [lo, hi] if lo <= hi => Ok((lo.to_radians(), hi.to_radians())),
        _ => Err(Error::Config(format!("{key}: expected 'low,high' with low <= high"))),
    }
}

impl ExperimentConfig {
    /// Resolves key/value assignments on top of the built-in defaults.
    pub fn from_pairs<K: AsRef<str>, V: AsRef<str>>(pairs: impl IntoIterator<Item = (K, V)>) -> Result<Self> {
        let mut set: Vec<(&'static str, String)> = Vec::new();
        for (k, v) in pairs {
            let k = k.as_ref();
            let spec = config_key(k).ok_or_else(|| Error::Config(format!("unknown key '{k}'")))?;
            set.retain(|(name, _)| *name != spec.name);
            set.push((spec.name, v.as_ref().trim().to_string()));
        }
        let get = |name: &str| set.iter().find(|(k, _)| *k == name).map(|(_, v)| v.as_str());
        let value = |name: &str| get(name).unwrap_or_else(|| config_key(name).expect("known key").default);

        let antennas: usize = parse_int("antennas", value("antennas"))?;
        let tx_antennas = get("tx_antennas").map(|s| parse_int("tx_antennas", s)).transpose()?.unwrap_or(antennas);
        let rx_antennas = get("rx_antennas").map(|s| parse_int("rx_antennas", s)).transpose()?.unwrap_or(antennas);
        let spacing = parse_num(value("spacing"))?;
        let (aod_lo, aod_hi) = parse_interval_deg("aod_range_deg", value("aod_range_deg"))?;
        let aoa_mean_range = match value("aoa_range_deg") {
            "random" => MeanAngleRange::RandomSector { width: parse_num(value("aoa_sector_deg"))?.to_radians() },
            s => {
                let (low, high) = parse_interval_deg("aoa_range_deg", s)?;
                MeanAngleRange::Interval { low, high }
            }
        };
        let aod_mean_range = if aod_lo == 0.0 && (aod_hi - TAU).abs() < 1e-15 {
            MeanAngleRange::full_circle()
        } else {
            MeanAngleRange::Interval { low: aod_lo, high: aod_hi }
        };
        let power_profile = match value("power_profile") {
            "exp07" => PowerProfile::Exponential07,
            "uniform" => PowerProfile::Uniform,
            s => return Err(Error::Config(format!("power_profile: unknown profile '{s}'"))),
        };
        let channel = ChannelParams {
            tx: ArrayConfig { n_elements: tx_antennas, spacing },
            rx: ArrayConfig { n_elements: rx_antennas, spacing },
            n_clusters: parse_int("clusters", value("clusters"))?,
            n_rays: parse_int("rays", value("rays"))?,
            angle_spread: parse_num(value("angle_spread_deg"))?.to_radians(),
            aod_mean_range,
            aoa_mean_range,
            power_profile,
        };

        let bits: u32 = parse_int("bits", value("bits"))?;
        let codebook_bits_tx = get("tx_bits").map(|s| parse_int("tx_bits", s)).transpose()?.unwrap_or(bits);
        let codebook_bits_rx = get("rx_bits").map(|s| parse_int("rx_bits", s)).transpose()?.unwrap_or(bits);

        let n_streams: usize = parse_int("streams", value("streams"))?;
        if let Some(rf) = get("rf_chains") {
            let rf: usize = parse_int("rf_chains", rf)?;
            if rf != n_streams {
                return Err(Error::Config(format!(
                    "rf_chains ({rf}) must equal streams ({n_streams}); the design uses one RF chain per stream"
                )));
            }
        }

        let mut algorithms = value("algorithms")
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Algorithm::from_str)
            .collect::<Result<Vec<_>>>()?;
        algorithms.sort();
        algorithms.dedup();

        let sweep_axis: SweepAxis = value("sweep").parse()?;
        let snr_list = get("snr_db").map(parse_list).transpose()?;
        let explicit_grid = get("sweep_values").map(parse_list).transpose()?;
        let (sweep_values, snr_db) = match sweep_axis {
            SweepAxis::SnrDb => {
                let grid = explicit_grid.or(snr_list).unwrap_or_else(|| sweep_axis.default_values());
                (grid, 20.0)
            }
            _ => {
                let snr = match snr_list.as_deref() {
                    None => 20.0,
                    Some([x]) => *x,
                    Some(_) => {
                        return Err(Error::Config(
                            "snr_db takes a single value unless sweeping snr_db".into(),
                        ))
                    }
                };
                (explicit_grid.unwrap_or_else(|| sweep_axis.default_values()), snr)
            }
        };

        let rate_unit = match value("rate_unit") {
            "bits" => RateUnit::Bits,
            "nats" => RateUnit::Nats,
            s => return Err(Error::Config(format!("rate_unit: expected bits or nats, got '{s}'"))),
        };

        let cfg = ExperimentConfig {
            channel,
            codebook_bits_tx,
            codebook_bits_rx,
            dedupe_codebook: parse_bool("dedupe_codebook", value("dedupe_codebook"))?,
            n_streams,
            algorithms,
            sweep_axis,
            sweep_values,
            snr_db,
            trials: parse_int("trials", value("trials"))?,
            base_seed: parse_int("seed", value("seed"))?,
            workers: parse_int("workers", value("workers"))?,
            timing: parse_bool("timing", value("timing"))?,
            rate_unit,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_pairs(parse_config_text(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.channel.validate().map_err(|e| Error::Config(e.to_string()))?;
        for b in [self.codebook_bits_tx, self.codebook_bits_rx] {
            if !(1..=16).contains(&b) {
                return bad(format!("codebook bits must be in 1..=16, got {b}"));
            }
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.sweep_values.is_empty() {
            return bad("sweep values must not be empty".into());
        }
        if self.sweep_values.windows(2).any(|w| w[1] <= w[0]) {
            return bad("sweep values must be strictly increasing".into());
        }
        if self.sweep_axis.is_discrete() && self.sweep_values.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
            return bad(format!("{} values must be positive integers", self.sweep_axis));
        }
        for p in 0..self.sweep_values.len() {
            let point = self.point(p);
            let max_streams = point.channel.tx.n_elements.min(point.channel.rx.n_elements);
            if point.n_streams == 0 || point.n_streams > max_streams {
                return bad(format!(
                    "stream count {} must be in 1..={max_streams} at sweep value {}",
                    point.n_streams, self.sweep_values[p]
                ));
            }
        }
        Ok(())
    }

    /// Parameters in effect at sweep index `idx`.
    pub fn point(&self, idx: usize) -> SweepPoint {
        let value = self.sweep_values[idx];
        let mut point = SweepPoint {
            value,
            channel: self.channel.clone(),
            n_streams: self.n_streams,
            snr_db: self.snr_db,
        };
        match self.sweep_axis {
            SweepAxis::SnrDb => point.snr_db = value,
            SweepAxis::NumAntennas => {
                point.channel.tx.n_elements = value as usize;
                point.channel.rx.n_elements = value as usize;
            }
            SweepAxis::NumStreams => point.n_streams = value as usize,
        }
        point
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub channel: ChannelParams,
    pub n_streams: usize,
    pub snr_db: f64,
}
