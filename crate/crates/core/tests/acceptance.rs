//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --release --test acceptance -- 7 9`.

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polycode::experiments::{
    run_benchmark, run_recognition, run_scaling, run_selectivity, run_shuffled_control, run_stability, ExperimentConfig,
};
use polycode::network::{write_spike_log, Network, NetworkConfig, Simulation, SynapseTable};
use polycode::neuron::{Integrator, NeuronParams, NeuronState};
use polycode::polycode::{apply_tag, compute_capacity, CodeWidth, DetectorConfig, Mode, PolycodeDetector};
use polycode::stimulus::{drive, run_presentation, DirectionId, PresentationSchedule, StimulusFrame};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------- oracles

/// XOR and rotate on an explicit list of bits, least significant first.
fn bit_list_apply(code: &[bool], tag: &[bool]) -> Vec<bool> {
    let x: Vec<bool> = code.iter().zip(tag).map(|(a, b)| a != b).collect();
    let w = x.len();
    (0..w).map(|i| x[(i + w - 1) % w]).collect()
}

fn to_bits(v: u64, width: u32) -> Vec<bool> {
    (0..width).map(|i| (v >> i) & 1 == 1).collect()
}

fn from_bits(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
}

fn oracle_code(tag: u64, arrivals: &[u64], width: u32) -> u64 {
    let mut bits = to_bits(tag, width);
    for &t in arrivals {
        bits = bit_list_apply(&bits, &to_bits(t, width));
    }
    from_bits(&bits)
}

/// Decimal schoolbook product, digits least significant first.
fn decimal_mul(digits: &[u32], k: u64) -> Vec<u32> {
    let mut out = Vec::with_capacity(digits.len() + 20);
    let mut carry = 0u64;
    for &d in digits {
        let p = u64::from(d) * k + carry;
        out.push((p % 10) as u32);
        carry = p / 10;
    }
    while carry > 0 {
        out.push((carry % 10) as u32);
        carry /= 10;
    }
    out
}

fn decimal_string(digits: &[u32]) -> String {
    digits.iter().rev().map(|d| char::from(b'0' + *d as u8)).collect()
}

/// Spike count of a dt = 0.01 ms forward-Euler reference.
fn fine_euler_spikes(p: &NeuronParams, current: f64, duration_ms: u32) -> u32 {
    let (mut v, mut u) = (p.c, p.b * p.c);
    let dt = 0.01;
    let mut spikes = 0;
    for _ in 0..duration_ms * 100 {
        let dv = 0.04 * v * v + 5.0 * v + 140.0 - u + current;
        let du = p.a * (p.b * v - u);
        v += dt * dv;
        u += dt * du;
        if v > 30.0 {
            v = p.c;
            u += p.d;
            spikes += 1;
        }
    }
    spikes
}

// --------------------------------------------------------------- criteria

fn c01_bit_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb175);
    let mut checked = 0;
    for width in [CodeWidth::W32, CodeWidth::W64] {
        for _ in 0..10_000 {
            let start = rng.random::<u64>() & width.mask();
            let len = rng.random_range(1..=20);
            let tags: Vec<u64> = (0..len).map(|_| rng.random::<u64>() & width.mask()).collect();
            let online = tags.iter().fold(start, |c, &t| apply_tag(c, t, width));
            if online != oracle_code(start, &tags, width.bits()) {
                return outcome(false, format!("mismatch at width {width} for start {start:#x}"));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} sequences identical at widths 32 and 64"))
}

fn c02_order_sensitivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bde);
    let w = CodeWidth::W64;
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let trials = 1000;
    let mut distinct = 0;
    for _ in 0..trials {
        let post: u64 = rng.random();
        let mut t = [0u64; 3];
        while t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            t = [rng.random(), rng.random(), rng.random()];
        }
        let codes: HashSet<u64> = perms
            .iter()
            .map(|p| p.iter().fold(post, |c, &i| apply_tag(c, t[i], w)))
            .collect();
        if codes.len() == 6 {
            distinct += 1;
        }
    }
    let frac = distinct as f64 / trials as f64;
    outcome(frac >= 0.99, format!("{distinct}/{trials} triples give 6 distinct codes"))
}

/// Replays the spike and voltage log with per-neuron arrival lists and
/// recomputes every registration from scratch.
fn replay_matches(config: NetworkConfig, duration_ms: u64) -> Result<(usize, usize), String> {
    let net = Network::build(config).map_err(|e| e.to_string())?;
    let det_cfg = DetectorConfig {
        record_events: true,
        ..Default::default()
    };
    let mut det = PolycodeDetector::for_network(&net, config.seed, det_cfg).map_err(|e| e.to_string())?;
    let tags: Vec<u64> = det.tags().as_slice().to_vec();
    det.set_mode(Mode::Train(DirectionId::new(2).unwrap()));
    let mut sim = Simulation::new(&net);
    let n = net.n_neurons();
    let mut spikes_log: Vec<Vec<usize>> = Vec::new();
    let mut volts_log: Vec<Vec<f64>> = Vec::new();
    let schedule = PresentationSchedule::new(DirectionId::new(2).unwrap(), duration_ms, Default::default());
    let frames: Vec<StimulusFrame> = (0..16)
        .map(|p| polycode::stimulus::render_frame(schedule.direction, p, &schedule.stimulus.geometry))
        .collect();
    for t in 0..duration_ms {
        sim.inject_input(&frames[schedule.phase_at(t) % 16]).map_err(|e| e.to_string())?;
        let s = sim.step(&mut det).map_err(|e| e.to_string())?.to_vec();
        spikes_log.push(s);
        volts_log.push(sim.neurons().iter().map(|x| x.v).collect());
    }

    let width = 64;
    let mut lists: Vec<Vec<u64>> = vec![Vec::new(); n];
    let mut queue: BTreeMap<u64, Vec<(usize, usize)>> = BTreeMap::new();
    let mut expected = Vec::new();
    for t in 0..duration_ms as usize {
        let spiking: HashSet<usize> = spikes_log[t].iter().copied().collect();
        for i in 0..n {
            if !spiking.contains(&i) && volts_log[t][i] < 0.0 {
                lists[i].clear();
            }
        }
        let mut sorted: Vec<usize> = spiking.iter().copied().collect();
        sorted.sort_unstable();
        for &i in &sorted {
            let code = oracle_code(tags[i], &lists[i], width);
            if code != tags[i] {
                expected.push((t as u64, i as u32, code));
            }
            lists[i].clear();
        }
        for &i in &sorted {
            for s in net.synapses().iter().filter(|s| s.pre as usize == i) {
                queue
                    .entry(t as u64 + u64::from(s.delay))
                    .or_default()
                    .push((s.post as usize, i));
            }
        }
        if let Some(due) = queue.remove(&(t as u64 + 1)) {
            for (post, pre) in due {
                lists[post].push(tags[pre]);
            }
        }
    }
    let actual: Vec<(u64, u32, u64)> = det.events().iter().map(|e| (e.t, e.neuron, e.code)).collect();
    if actual != expected {
        let first = actual.iter().zip(&expected).position(|(a, b)| a != b);
        return Err(format!(
            "{} online vs {} replayed registrations, first difference at {:?}",
            actual.len(),
            expected.len(),
            first
        ));
    }
    Ok((actual.len(), spikes_log.iter().map(Vec::len).sum()))
}

fn c03_replay() -> Outcome {
    let mut details = Vec::new();
    let variants = [
        ("unit delays", NetworkConfig::default()),
        (
            "delays 1..4",
            NetworkConfig {
                delay_max: 4,
                connection_prob: 0.1,
                ..Default::default()
            },
        ),
    ];
    for (name, cfg) in variants {
        match replay_matches(cfg, 10_000) {
            Ok((regs, spikes)) if regs > 0 => details.push(format!("{name}: {regs}/{regs} codes from {spikes} spikes")),
            Ok(_) => return outcome(false, format!("{name}: no registrations to compare")),
            Err(e) => return outcome(false, format!("{name}: {e}")),
        }
    }
    outcome(true, details.join("; "))
}

fn c04_external_input() -> Outcome {
    let cfg = NetworkConfig::default();
    let net = Network::with_synapses(cfg, SynapseTable::default()).unwrap();
    let mut det = PolycodeDetector::for_network(&net, 1, DetectorConfig::default()).unwrap();
    det.set_mode(Mode::Train(DirectionId::default()));
    let mut sim = Simulation::new(&net);
    let full = StimulusFrame::filled(1.0).unwrap();
    for _ in 0..10_000 {
        sim.inject_input(&full).unwrap();
        sim.step(&mut det).unwrap();
    }
    let regs = det.counts().total();
    outcome(
        regs == 0 && det.registry().is_empty() && sim.total_spikes() > 0,
        format!("{} spikes, {regs} registrations", sim.total_spikes()),
    )
}

fn training_artifacts(config: &ExperimentConfig) -> (Vec<u8>, Vec<u8>) {
    let net = config.build_network().unwrap();
    let mut det = config.detector_for(&net).unwrap();
    let mut sim = Simulation::new(&net);
    sim.enable_spike_log();
    for d in DirectionId::all() {
        sim.reset_dynamics();
        det.reset_dynamics();
        det.set_mode(Mode::Train(d));
        run_presentation(&mut sim, &mut det, &PresentationSchedule::new(d, config.experiment.direction_ms, config.stimulus)).unwrap();
    }
    let mut spikes = Vec::new();
    write_spike_log(sim.spike_log().unwrap(), &mut spikes).unwrap();
    let mut reg = Vec::new();
    det.registry().write_binary(config.detector.width, &mut reg).unwrap();
    (spikes, reg)
}

fn c05_determinism() -> Outcome {
    let config = ExperimentConfig::default();
    let a = training_artifacts(&config);
    let b = training_artifacts(&config);
    let other = training_artifacts(&config.for_trial(1));
    let same = a == b;
    outcome(
        same && a.0 != other.0,
        format!(
            "spike log {} bytes, registry {} bytes, identical = {same}, other seed differs = {}",
            a.0.len(),
            a.1.len(),
            a.0 != other.0
        ),
    )
}

fn activity(c: f64) -> f64 {
    let config = ExperimentConfig {
        network: NetworkConfig {
            connection_prob: c,
            ..Default::default()
        },
        ..Default::default()
    };
    let net = config.build_network().unwrap();
    let mut sim = Simulation::new(&net);
    let schedule = PresentationSchedule::new(DirectionId::default(), 10_000, config.stimulus);
    drive(&mut sim, &mut polycode::polycode::NoDetector, &schedule, |_, _| {}).unwrap();
    sim.spiking_fraction()
}

fn c06_activity_band() -> Outcome {
    let band = 0.02..=0.08;
    let at_c01 = activity(0.1);
    let sweep: Vec<String> = [0.05, 0.06, 0.07, 0.08, 0.09, 0.1, 0.12, 0.15]
        .iter()
        .map(|&c| {
            let a = activity(c);
            format!("C={c}: {:.2}%{}", a * 100.0, if band.contains(&a) { "*" } else { "" })
        })
        .collect();
    let default_c = NetworkConfig::default().connection_prob;
    println!("      sweep (* in band): {}", sweep.join(", "));
    outcome(
        band.contains(&at_c01),
        format!(
            "C=0.1: {:.2}% (library default C={default_c}: {:.2}%)",
            at_c01 * 100.0,
            activity(default_c) * 100.0
        ),
    )
}

fn c07_stability() -> Outcome {
    let s = run_stability(&ExperimentConfig::default(), 1).unwrap();
    let last = s.points.len();
    let crossover = s.crossover_second();
    let trend = s.repeating_trend();
    let curve: Vec<String> = s
        .points
        .iter()
        .map(|p| format!("{:.0}/{:.0}", p.novel_mean, p.repeating_mean))
        .collect();
    println!("      novel/repeating per s: {}", curve.join(" "));
    outcome(
        crossover.is_some_and(|k| k < last) && trend >= 0.0,
        format!("{} trials, crossover at second {crossover:?} of {last}, repeating trend {trend:+.1}/s", s.trials()),
    )
}

fn c08_selectivity() -> Outcome {
    let h = run_selectivity(&ExperimentConfig::default()).unwrap();
    outcome(
        h.mode() == 2 && h.count(1) > 0,
        format!("bins {:?}, mode k = {}, opposite pairs {}", h.bins, h.mode(), h.opposite_pairs),
    )
}

fn c09_classification() -> Outcome {
    let config = ExperimentConfig::default();
    let (report, _) = run_recognition(&config).unwrap();
    let control = run_shuffled_control(&config, 1).unwrap();
    let chance = control.mean();
    let predicted: Vec<u32> = report.rows.iter().map(|r| r.predicted.angle_deg()).collect();
    outcome(
        report.correct() == 8 && (0.0..=0.375).contains(&chance),
        format!(
            "{}/8 correct (predicted {predicted:?}), shuffled-label mean accuracy {chance:.3} over {} trials",
            report.correct(),
            control.accuracies.len()
        ),
    )
}

fn c10_overhead() -> Outcome {
    let config = ExperimentConfig::default();
    let r = run_benchmark(&config, 10_000, 10).unwrap();
    let frac = r.overhead_fraction();
    let scaling = run_scaling(&config, &[5_000, 10_000, 20_000], 10).unwrap();
    let ratio = scaling.doubling_ratio();
    let per: Vec<String> = scaling
        .reports
        .iter()
        .map(|r| format!("{}s: {:.2} ms", r.simulated_ms / 1000, r.median_overhead_s() * 1e3))
        .collect();
    let mut detail = format!(
        "overhead {:.2} ms on {:.1} ms plain ({:.1}%), doubling ratio {ratio:.2} [{}]",
        r.median_overhead_s() * 1e3,
        r.median_base_s() * 1e3,
        frac * 100.0,
        per.join(", ")
    );
    if let Some(w) = &r.warning {
        detail.push_str(&format!(", {w}"));
    }
    outcome(frac < 0.10 && (1.6..=2.4).contains(&ratio), detail)
}

fn c11_capacity() -> Outcome {
    let mut notes = Vec::new();
    for (n, s) in [(1u64, 1u64), (320, 10), (320, 12)] {
        let mut digits = vec![1u32];
        for k in 2..=s {
            digits = decimal_mul(&digits, k);
        }
        digits = decimal_mul(&digits, n);
        let want = decimal_string(&digits);
        let got = compute_capacity(n, s, CodeWidth::W64).unwrap().theoretical_capacity.to_string();
        if got != want {
            return outcome(false, format!("({n},{s}): {got} != {want}"));
        }
        notes.push(format!("({n},{s}) = {got}"));
    }
    let space = compute_capacity(1, 1, CodeWidth::W32).unwrap().bit_space;
    let ok = space == BigUint::from(4_294_967_296u64);
    notes.push(format!("2^32 = {space}"));
    outcome(ok, notes.join(", "))
}

fn c12_neuron_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x12);
    let p = NeuronParams::regular_spiking();
    let mut worst = 0i64;
    let mut failures = 0;
    for _ in 0..100 {
        let current = rng.random_range(0.0..=30.0);
        let duration: u32 = rng.random_range(10..=100);
        let mut n = NeuronState::at_rest(p);
        let coarse = (0..duration)
            .filter(|_| n.step(current, Integrator::default()).unwrap())
            .count() as i64;
        let fine = i64::from(fine_euler_spikes(&p, current, duration));
        let diff = (coarse - fine).abs();
        worst = worst.max(diff);
        if diff > 1 {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("100 RS scenarios, worst difference {worst} spike(s)"))
}

type Criterion = (u32, &'static str, fn() -> Outcome, Duration);

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mins = |m: u64| Duration::from_secs(60 * m);
    let criteria: [Criterion; 12] = [
        (1, "bit-operation oracle equivalence", c01_bit_oracle, Duration::from_secs(5)),
        (2, "order sensitivity", c02_order_sensitivity, Duration::from_secs(5)),
        (3, "causal-code replay", c03_replay, mins(2)),
        (4, "external-input exclusion", c04_external_input, Duration::from_secs(10)),
        (5, "determinism", c05_determinism, mins(2)),
        (6, "activity band", c06_activity_band, mins(10)),
        (7, "stability crossover", c07_stability, mins(10)),
        (8, "selectivity shape", c08_selectivity, mins(10)),
        (9, "classification", c09_classification, mins(15)),
        (10, "detection overhead", c10_overhead, mins(10)),
        (11, "capacity arithmetic", c11_capacity, Duration::from_secs(10)),
        (12, "neuron oracle", c12_neuron_oracle, Duration::from_secs(30)),
    ];
    let mut failed = Vec::new();
    for (id, name, f, limit) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = o.pass && in_time;
        let timing = if in_time { String::new() } else { " TIME LIMIT EXCEEDED".to_string() };
        println!(
            "[{}] {id:>2}. {name}: {} ({:.2}s, limit {}s){timing}",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
