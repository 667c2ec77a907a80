//! The `hybeam` command line. [`run`] holds all logic so tests can drive it
//! in-process.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};
use hybeam::experiment::config::parse_config_text;
use hybeam::experiment::{self, evaluate, point_codebooks, trial_channel, SweepPoint, CONFIG_KEYS};
use hybeam::{ArrayConfig, ChannelRealization, Codebook, Error, ExperimentConfig, LinkBudget, RateUnit};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Converts a config key to its flag name, e.g. `angle_spread_deg` to
/// `angle-spread-deg`.
pub fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

fn config_args() -> Vec<Arg> {
    let mut args = vec![Arg::new("config")
        .long("config")
        .value_name("FILE")
        .value_parser(clap::value_parser!(PathBuf))
        .help("key = value config file; flags override its entries")];
    for key in CONFIG_KEYS {
        let help = format!("{} [default: {}]", key.help, key.default);
        let arg = Arg::new(key.name).long(flag_name(key.name)).help(help);
        args.push(if key.switch {
            arg.action(ArgAction::SetTrue)
        } else {
            arg.value_name("VALUE").allow_hyphen_values(true)
        });
    }
    args
}

fn trial_args() -> [Arg; 2] {
    [
        Arg::new("point")
            .long("point")
            .value_name("INDEX")
            .value_parser(clap::value_parser!(usize))
            .default_value("0")
            .help("sweep point index (0-based) whose settings are used"),
        Arg::new("trial")
            .long("trial")
            .value_name("INDEX")
            .value_parser(clap::value_parser!(usize))
            .default_value("0")
            .help("trial index; the channel is the one the sweep draws for this point and trial"),
    ]
}

/// Resolves `--point`/`--trial` and samples the matching sweep channel.
fn selected_channel(
    cfg: &ExperimentConfig,
    m: &ArgMatches,
) -> hybeam::Result<(SweepPoint, usize, ChannelRealization)> {
    let idx = *m.get_one::<usize>("point").expect("has default");
    let trial = *m.get_one::<usize>("trial").expect("has default");
    if idx >= cfg.sweep_values.len() {
        return Err(Error::Config(format!(
            "--point {idx} is out of range for {} sweep values",
            cfg.sweep_values.len()
        )));
    }
    let point = cfg.point(idx);
    let channel = trial_channel(&point, cfg.base_seed, idx, trial)?;
    Ok((point, trial, channel))
}

pub fn command() -> Command {
    Command::new("hybeam")
        .about("Joint hybrid precoder/combiner design for mmWave MIMO: simulation and parameter sweeps")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("sweep")
                .about("Run a Monte-Carlo sweep and write records.csv and summary.csv")
                .args(config_args())
                .arg(
                    Arg::new("out_dir")
                        .long("out-dir")
                        .value_name("DIR")
                        .required(true)
                        .value_parser(clap::value_parser!(PathBuf))
                        .help("output directory, created if missing"),
                ),
        )
        .subcommand(
            Command::new("simulate")
                .about("Design every requested algorithm on one channel and print its metrics")
                .args(config_args())
                .args(trial_args()),
        )
        .subcommand(
            Command::new("codebook").subcommand_required(true).about("Codebook utilities").subcommand(
                Command::new("inspect")
                    .about("Print the size and number of distinct beams of a beamsteering codebook")
                    .arg(Arg::new("bits").long("bits").value_name("B").required(true).value_parser(clap::value_parser!(u32)))
                    .arg(
                        Arg::new("antennas")
                            .long("antennas")
                            .value_name("N")
                            .required(true)
                            .value_parser(clap::value_parser!(usize)),
                    )
                    .arg(
                        Arg::new("spacing")
                            .long("spacing")
                            .value_name("D")
                            .default_value("0.5")
                            .value_parser(clap::value_parser!(f64))
                            .help("element spacing in wavelengths"),
                    )
                    .arg(Arg::new("dedupe").long("dedupe").action(ArgAction::SetTrue).help("drop duplicate beams"))
                    .arg(Arg::new("angles").long("angles").action(ArgAction::SetTrue).help("list every codebook angle")),
            ),
        )
        .subcommand(
            Command::new("channel").subcommand_required(true).about("Channel utilities").subcommand(
                Command::new("sample")
                    .about("Dump one channel realization (rays, then matrix entries) as CSV")
                    .args(config_args())
                    .args(trial_args())
                    .arg(
                        Arg::new("out")
                            .long("out")
                            .value_name("FILE")
                            .value_parser(clap::value_parser!(PathBuf))
                            .help("write to FILE instead of stdout"),
                    ),
            ),
        )
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                EXIT_CONFIG
            } else {
                let _ = write!(stdout, "{rendered}");
                EXIT_OK
            };
        }
    };
    let result = match matches.subcommand() {
        Some(("sweep", m)) => cmd_sweep(m, stdout),
        Some(("simulate", m)) => cmd_simulate(m, stdout),
        Some(("codebook", m)) => match m.subcommand() {
            Some(("inspect", m)) => cmd_codebook_inspect(m, stdout),
            _ => unreachable!("subcommand required"),
        },
        Some(("channel", m)) => match m.subcommand() {
            Some(("sample", m)) => cmd_channel_sample(m, stdout),
            _ => unreachable!("subcommand required"),
        },
        _ => unreachable!("subcommand required"),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::BitsOutOfRange(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Builds the configuration from the optional config file and flag overrides.
pub fn resolve_config(m: &ArgMatches) -> hybeam::Result<ExperimentConfig> {
    let mut pairs = match m.get_one::<PathBuf>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config '{}': {e}", path.display())))?;
            parse_config_text(&text)?
        }
        None => Vec::new(),
    };
    for key in CONFIG_KEYS {
        if key.switch {
            if m.get_flag(key.name) {
                pairs.push((key.name.to_string(), "true".to_string()));
            }
        } else if let Some(v) = m.get_one::<String>(key.name) {
            pairs.push((key.name.to_string(), v.clone()));
        }
    }
    ExperimentConfig::from_pairs(pairs)
}

fn cmd_sweep(m: &ArgMatches, stdout: &mut dyn Write) -> hybeam::Result<()> {
    let cfg = resolve_config(m)?;
    let dir = m.get_one::<PathBuf>("out_dir").expect("required");
    std::fs::create_dir_all(dir)?;
    let out = experiment::run_sweep(&cfg)?;
    let records = dir.join("records.csv");
    let summary = dir.join("summary.csv");
    experiment::write_records_csv(out.axis, &out.records, &records)?;
    experiment::write_summary_csv(out.axis, &out.summary, &summary)?;
    writeln!(
        stdout,
        "{} records ({} skipped) -> {}\n{} summary rows -> {}",
        out.records.len(),
        out.skipped_count(),
        records.display(),
        out.summary.len(),
        summary.display()
    )?;
    Ok(())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn cmd_simulate(m: &ArgMatches, stdout: &mut dyn Write) -> hybeam::Result<()> {
    let cfg = resolve_config(m)?;
    let (point, trial, channel) = selected_channel(&cfg, m)?;
    let (f_cb, w_cb) = point_codebooks(&cfg, &point)?;
    let budget = LinkBudget::from_snr_db(point.snr_db, point.n_streams)?;
    let unit = match cfg.rate_unit {
        RateUnit::Bits => "bits/s/Hz",
        RateUnit::Nats => "nats/s/Hz",
    };
    writeln!(
        stdout,
        "Nt={} Nr={} streams={} snr_db={} seed={} trial={}",
        point.channel.tx.n_elements, point.channel.rx.n_elements, point.n_streams, point.snr_db, cfg.base_seed, trial
    )?;
    for &alg in &cfg.algorithms {
        writeln!(stdout, "[{alg}]")?;
        match evaluate(alg, &channel.h, &f_cb, &w_cb, &budget, cfg.rate_unit) {
            Ok(ev) => {
                let sinr_db: Vec<String> = ev.sinr.iter().map(|s| format!("{:.4}", 10.0 * s.max(1e-30).log10())).collect();
                writeln!(stdout, "  sinr_db: {}", sinr_db.join(" "))?;
                writeln!(stdout, "  sum_rate: {:.6} {unit}", ev.sum_rate)?;
                writeln!(stdout, "  spectral_efficiency: {:.6} bits/s/Hz", ev.spectral_efficiency)?;
                match (&ev.tx_indices, &ev.rx_indices) {
                    (Some(tx), Some(rx)) => {
                        writeln!(stdout, "  tx_beams: {}", join(tx))?;
                        writeln!(stdout, "  rx_beams: {}", join(rx))?;
                    }
                    _ => writeln!(stdout, "  beams: none (unconstrained digital)")?,
                }
            }
            Err(e) if experiment::is_trial_failure(&e) => writeln!(stdout, "  skipped: {e}")?,
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn cmd_codebook_inspect(m: &ArgMatches, stdout: &mut dyn Write) -> hybeam::Result<()> {
    let bits = *m.get_one::<u32>("bits").expect("required");
    let n = *m.get_one::<usize>("antennas").expect("required");
    let spacing = *m.get_one::<f64>("spacing").expect("has default");
    let mut cb = Codebook::beamsteering(bits, ArrayConfig::new(n, spacing)?)?;
    if m.get_flag("dedupe") {
        cb = cb.deduplicated();
    }
    writeln!(stdout, "bits: {bits}")?;
    writeln!(stdout, "antennas: {n}")?;
    writeln!(stdout, "spacing: {spacing}")?;
    writeln!(stdout, "deduplicated: {}", cb.is_deduplicated())?;
    writeln!(stdout, "vectors: {}", cb.len())?;
    writeln!(stdout, "distinct_beams: {}", cb.distinct_beam_count())?;
    if m.get_flag("angles") {
        writeln!(stdout, "index,angle_deg")?;
        for (i, a) in cb.angles().iter().enumerate() {
            writeln!(stdout, "{i},{}", a.to_degrees())?;
        }
    }
    Ok(())
}

fn cmd_channel_sample(m: &ArgMatches, stdout: &mut dyn Write) -> hybeam::Result<()> {
    let cfg = resolve_config(m)?;
    let (_, _, channel) = selected_channel(&cfg, m)?;
    match m.get_one::<PathBuf>("out") {
        Some(path) => write_file(path, |w| channel.write_csv(w)),
        None => Ok(channel.write_csv(stdout)?),
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>) -> hybeam::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
