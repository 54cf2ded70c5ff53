use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use polycode::config::load_config;
use polycode::experiments::{
    classify_with, run_benchmark, run_selectivity, run_shuffled_control, run_stability, train,
    ExperimentConfig, Labels, SelectivityHistogram,
};
use polycode::network::{write_spike_log, Simulation};
use polycode::polycode::{compute_capacity, CodeWidth, Mode, PolycodeRegistry};
use polycode::stimulus::{render_frame, run_presentation, DirectionId, PresentationSchedule};
use polycode::{Error, Result};

#[derive(Parser)]
#[command(name = "polycode", version, about = "Polychronous code detection in a spiking network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file with [network], [stimulus], [detector] and [experiment] sections.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Simulated seconds (per direction for training runs).
    #[arg(long, global = true, value_name = "SECONDS")]
    duration: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    /// Code width in bits.
    #[arg(long, global = true, value_parser = ["32", "64"])]
    width: Option<String>,
    /// Worker threads for independent trials.
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    jobs: usize,
    /// Parent directory for run directories.
    #[arg(long, global = true, default_value = "runs", value_name = "DIR")]
    out: PathBuf,
    /// Registry file (.csv for text, anything else for binary).
    #[arg(long, global = true, value_name = "PATH")]
    registry: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Present one direction and write the spike log and registry.
    Simulate {
        /// Direction index 0..7 (multiples of 45 degrees).
        #[arg(long, default_value_t = 0)]
        direction: usize,
        /// Also dump one bar cycle as PGM frames.
        #[arg(long)]
        frames: bool,
    },
    /// Novel vs repeating registrations per second.
    Stability,
    /// Histogram of codes by number of active directions.
    Selectivity,
    /// Train a registry on all eight directions.
    Train {
        /// Also run the shuffled-label control.
        #[arg(long)]
        control: bool,
    },
    /// Evaluate a trained registry (--registry) on all eight directions.
    Classify,
    /// Paired wall-clock timing with and without detection.
    Benchmark,
    /// Theoretical code capacity.
    Capacity {
        #[arg(long, default_value_t = 320)]
        neurons: u64,
        #[arg(long, default_value_t = 10)]
        synapses: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Stability => "stability",
            Command::Selectivity => "selectivity",
            Command::Train { .. } => "train",
            Command::Classify => "classify",
            Command::Benchmark => "benchmark",
            Command::Capacity { .. } => "capacity",
        }
    }
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    seed: u64,
    version: String,
    started: String,
    finished: String,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    files: Vec<String>,
    config: ExperimentConfig,
}

struct Run {
    dir: PathBuf,
    files: Vec<String>,
}

impl Run {
    fn create(parent: &Path, stamp: &str, seed: u64) -> Result<Run> {
        fs::create_dir_all(parent)?;
        let base = format!("{stamp}-seed{seed}");
        for n in 0.. {
            let name = if n == 0 { base.clone() } else { format!("{base}-{n}") };
            let dir = parent.join(name);
            match fs::create_dir(&dir) {
                Ok(()) => return Ok(Run { dir, files: Vec::new() }),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e.into()),
            }
        }
        unreachable!()
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(path)
    }

    fn text(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        self.write(name, |w| Ok(w.write_all(body.as_bytes())?))
    }
}

fn resolve_config(common: &Common, command: &Command) -> Result<ExperimentConfig> {
    let mut c = match &common.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        c.network.seed = seed;
    }
    if let Some(w) = &common.width {
        c.detector.width = CodeWidth::new(w.parse().expect("validated by clap"))?;
    }
    if let Some(t) = common.trials {
        match command {
            Command::Benchmark => c.experiment.benchmark_trials = t,
            Command::Train { .. } => c.experiment.shuffle_trials = t,
            _ => c.experiment.trials = t,
        }
    }
    if let Some(s) = common.duration {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Input(format!("--duration must be positive, got {s}")));
        }
        let ms = (s * 1000.0).round() as u64;
        match command {
            Command::Classify => c.experiment.eval_ms = Some(ms),
            Command::Benchmark => c.experiment.benchmark_ms = ms,
            _ => c.experiment.direction_ms = ms,
        }
    }
    if common.jobs == 0 {
        return Err(Error::Input("--jobs must be at least 1".into()));
    }
    c.validate()?;
    Ok(c)
}

fn read_registry(path: &Path, width: CodeWidth) -> Result<(CodeWidth, PolycodeRegistry)> {
    let file = File::open(path).map_err(|e| Error::Input(format!("cannot open registry {}: {e}", path.display())))?;
    let r = BufReader::new(file);
    if path.extension().is_some_and(|e| e == "csv") {
        Ok((width, PolycodeRegistry::read_csv(width, r)?))
    } else {
        PolycodeRegistry::read_binary(r)
    }
}

fn write_registry(path: &Path, registry: &PolycodeRegistry, width: CodeWidth) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e == "csv") {
        registry.write_csv(width, &mut w)?;
    } else {
        registry.write_binary(width, &mut w)?;
    }
    w.flush()?;
    Ok(())
}

fn group_digits(s: &str) -> String {
    let n = s.len();
    s.chars()
        .enumerate()
        .flat_map(|(i, ch)| ((i > 0 && (n - i).is_multiple_of(3)).then_some(',')).into_iter().chain([ch]))
        .collect()
}

fn execute(cli: &Cli, config: &ExperimentConfig, run: &mut Run) -> Result<()> {
    let common = &cli.common;
    match &cli.command {
        Command::Simulate { direction, frames } => {
            let d = DirectionId::new(*direction).ok_or_else(|| Error::Input(format!("direction {direction} is not in 0..8")))?;
            let net = config.build_network()?;
            let mut det = config.detector_for(&net)?;
            det.set_mode(Mode::Train(d));
            let mut sim = Simulation::new(&net);
            sim.enable_spike_log();
            let schedule = PresentationSchedule::new(d, config.experiment.direction_ms, config.stimulus);
            let stats = run_presentation(&mut sim, &mut det, &schedule)?;
            let log = sim.spike_log().expect("enabled");
            let mut bytes = Vec::new();
            write_spike_log(log, &mut bytes)?;
            run.text("spikes.csv", std::str::from_utf8(&bytes).expect("ascii"))?;
            run.write("registry.csv", |w| det.registry().write_csv(config.detector.width, w))?;
            let totals = stats.totals();
            let checksum = format!("{:x}", Sha256::digest(&bytes));
            let summary = format!(
                "direction = {d}\nsimulated_ms = {}\nspikes = {}\nspiking_fraction = {:.5}\nnovel = {}\nrepeating = {}\nspike_log_sha256 = {checksum}\n",
                stats.steps,
                stats.spikes,
                sim.spiking_fraction(),
                totals.novel,
                totals.repeating
            );
            run.text("summary.txt", &summary)?;
            if *frames {
                for p in 0..config.stimulus.geometry.period_frames() {
                    let f = render_frame(d, p, &config.stimulus.geometry);
                    run.write(&format!("frames/{}_{p:02}.pgm", d.angle_deg()), |w| f.write_pgm(w))?;
                }
            }
            print!("{summary}");
        }
        Command::Stability => {
            let s = run_stability(config, common.jobs)?;
            run.write("stability.csv", |w| s.write_csv(w))?;
            run.text("stability.svg", &s.to_svg())?;
            for p in &s.points {
                println!(
                    "{:>3}s  novel {:>9.1} ± {:<7.1} repeating {:>9.1} ± {:.1}",
                    p.second, p.novel_mean, p.novel_sd, p.repeating_mean, p.repeating_sd
                );
            }
            match s.crossover_second() {
                Some(k) => println!("repeating exceeds novel from second {k}"),
                None => println!("repeating never exceeds novel"),
            }
        }
        Command::Selectivity => {
            let h = run_selectivity(config)?;
            run.write("selectivity.csv", |w| h.write_csv(w))?;
            run.text("selectivity.svg", &h.to_svg())?;
            for (k, c) in h.bins.iter().enumerate() {
                println!("{} direction(s): {c}", k + 1);
            }
            println!("mode k = {}, opposite pairs = {}", h.mode(), h.opposite_pairs);
        }
        Command::Train { control } => {
            let net = config.build_network()?;
            let trained = train(config, &net, Labels::True)?;
            let width = config.detector.width;
            run.write("registry.bin", |w| trained.registry.write_binary(width, w))?;
            let h = SelectivityHistogram::from(&trained);
            run.write("selectivity.csv", |w| h.write_csv(w))?;
            if let Some(path) = &common.registry {
                write_registry(path, &trained.registry, width)?;
            }
            println!(
                "registry: {} codes, spiking fraction {:.4}",
                trained.registry.len(),
                trained.spiking_fraction
            );
            if *control {
                let c = run_shuffled_control(config, common.jobs)?;
                let body: String = c.accuracies.iter().map(|a| format!("{a}\n")).collect();
                run.text("shuffled_control.csv", &format!("accuracy\n{body}"))?;
                println!("shuffled-label accuracy: mean {:.3} over {} trials", c.mean(), c.accuracies.len());
            }
        }
        Command::Classify => {
            let path = common
                .registry
                .as_ref()
                .ok_or_else(|| Error::Input("classify needs --registry PATH".into()))?;
            let (width, registry) = read_registry(path, config.detector.width)?;
            let mut c = *config;
            c.detector.width = width;
            let net = c.build_network()?;
            let report = classify_with(&c, &net, &registry)?;
            run.write("prediction.csv", |w| report.write_csv(w))?;
            run.text("prediction.svg", &report.to_svg())?;
            for (i, row) in report.rows.iter().enumerate() {
                let scores: Vec<String> = row.scores.0.iter().map(|s| format!("{s:8.1}")).collect();
                let flag = if row.no_evidence { " (no evidence)" } else if row.tie { " (tie)" } else { "" };
                println!("{:>4}: {} -> {}{flag}", DirectionId::new(i).expect("8 rows").to_string(), scores.join(""), row.predicted);
            }
            println!("accuracy {}/{}", report.correct(), report.rows.len());
        }
        Command::Benchmark => {
            let r = run_benchmark(config, config.experiment.benchmark_ms, config.experiment.benchmark_trials)?;
            run.write("benchmark.csv", |w| r.write_csv(w))?;
            run.text("benchmark.svg", &r.to_svg())?;
            let (m, sd) = r.overhead_mean_sd();
            println!(
                "plain {:.1} ms, overhead {:.2} ± {:.2} ms ({:.1}% of plain, median), {} spikes, {} registrations",
                r.median_base_s() * 1e3,
                m * 1e3,
                sd * 1e3,
                r.overhead_fraction() * 100.0,
                r.spikes,
                r.registrations
            );
            println!("absolute timings are machine dependent");
            if let Some(w) = &r.warning {
                println!("warning: {w}");
            }
        }
        Command::Capacity { neurons, synapses } => {
            let rep = compute_capacity(*neurons, *synapses, config.detector.width)?;
            let cap = rep.theoretical_capacity.to_string();
            let space = rep.bit_space.to_string();
            let body = format!(
                "neurons = {neurons}\nsynapses_per_neuron = {synapses}\ncapacity = {cap}\nwidth = {}\nbit_space = {space}\nwidth_limited = {}\n",
                config.detector.width,
                rep.width_limited()
            );
            run.text("capacity.txt", &body)?;
            println!("capacity: {}", group_digits(&cap));
            println!("2^{} = {}", config.detector.width.bits(), group_digits(&space));
            if rep.width_limited() {
                println!("the code width, not the network, limits capacity");
            }
        }
    }
    Ok(())
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let config = match resolve_config(&cli.common, &cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let started = now();
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let mut run = match Run::create(&cli.common.out, &stamp, config.seed()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: cannot create run directory: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = execute(&cli, &config, &mut run);
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        seed: config.seed(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: now(),
        status: if outcome.is_ok() { "ok" } else { "error" }.to_string(),
        error: outcome.as_ref().err().map(|e| e.to_string()),
        files: run.files.clone(),
        config,
    };
    let text = toml::to_string(&manifest).expect("manifest serialises");
    if let Err(e) = fs::write(run.dir.join("manifest.toml"), text) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(2);
    }
    println!("run directory: {}", run.dir.display());
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
