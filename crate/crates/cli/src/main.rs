//! `muoam` batch runner: named presets or scenario files in, CSV artifacts out.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use muoam::experiment::{estimation_trial, Downlink, ModeCase};
use muoam::link::complexity_estimates;
use muoam::preset::{preset, presets, Pipeline, SweepSpec};
use muoam::scenario::{load_scenario, ReferenceScenario, ScenarioFile};
use muoam::{assemble_channel, build_mode_transform, effective_oam_channel, verify_decoupling};
use muoam::{ChannelMode, EstimatorOptions, PrecodingSet, SystemConfig};

use output::{num, write_matrices, write_records, Staging, MATRIX_HEADER, RECORD_HEADER};

#[derive(Parser)]
#[command(name = "muoam", version, about = "Multi-user OAM backhaul simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Position estimation from uplink training.
    Estimate(RunArgs),
    /// Decoupling residuals and precoder matrices.
    PrecoderDump(RunArgs),
    /// Monte-Carlo QPSK BER vs SNR.
    Ber(RunArgs),
    /// Spectral efficiency vs SNR.
    Se(RunArgs),
    /// Energy efficiency vs transmit power.
    Ee(RunArgs),
    /// Per-subcarrier physical and OAM-domain channel matrices.
    ChannelDump(RunArgs),
    /// Operation-count table.
    Complexity(RunArgs),
    /// Print the built-in presets.
    ListPresets,
}

#[derive(Args, Clone, Debug)]
struct RunArgs {
    /// Scenario TOML file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset (see list-presets).
    #[arg(long)]
    preset: Option<String>,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Monte-Carlo trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Use exact element distances instead of the far-field expansion.
    #[arg(long)]
    exact_channel: bool,
    /// Run on one worker thread.
    #[arg(long)]
    single_thread: bool,
    /// Worker thread cap.
    #[arg(long, conflicts_with = "single_thread")]
    threads: Option<usize>,
    /// Override the SNR sweep (comma separated, dB).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Option<Vec<f64>>,
}

/// Everything a pipeline needs, resolved from the flags.
struct Plan {
    pipeline: Pipeline,
    stem: String,
    source: String,
    config: SystemConfig,
    sweep: SweepSpec,
    channel: ChannelMode,
    seed: u64,
}

enum Failure {
    Usage(anyhow::Error),
    Pipeline(anyhow::Error),
}

fn resolve(pipeline: Pipeline, args: &RunArgs) -> anyhow::Result<Plan> {
    let (stem, source, config, mut sweep) = match (&args.preset, &args.config) {
        (Some(name), _) => {
            let p = preset(name)?;
            let config = p.config()?;
            (p.name.to_string(), format!("preset {}", p.name), config, p.sweep)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let config = load_scenario(&text).with_context(|| format!("parsing {}", path.display()))?;
            let sweep = default_sweep(&config);
            (pipeline.name().replace('-', "_"), format!("config {}", path.display()), config, sweep)
        }
        (None, None) => {
            let config = ReferenceScenario::default().build()?;
            let sweep = default_sweep(&config);
            (pipeline.name().replace('-', "_"), "built-in default scenario".to_string(), config, sweep)
        }
    };
    if let Some(t) = args.trials {
        sweep.trials = t;
    }
    if let Some(s) = &args.snr {
        sweep.snr_db = s.clone();
    }
    sweep.validate()?;
    let channel = if args.exact_channel { ChannelMode::Exact } else { ChannelMode::Farfield };
    Ok(Plan { pipeline, stem, source, config, sweep, channel, seed: args.seed })
}

fn default_sweep(config: &SystemConfig) -> SweepSpec {
    SweepSpec {
        snr_db: vec![config.noise.snr_db],
        elements: vec![config.rx_elements()],
        rings: vec![config.ring_count()],
        ..SweepSpec::default()
    }
}

fn list<T: ToString>(v: &[T]) -> String {
    format!("[{}]", v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
}

fn provenance(plan: &Plan) -> anyhow::Result<Vec<String>> {
    let canonical = ScenarioFile::from_config(&plan.config).to_toml()?;
    let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
    let s = &plan.sweep;
    let cases: Vec<String> = s.cases.iter().map(ModeCase::label).collect();
    Ok(vec![
        format!("muoam-cli {}", env!("CARGO_PKG_VERSION")),
        format!("pipeline: {}", plan.pipeline.name()),
        format!("source: {}", plan.source),
        format!("config_sha256: {hash}"),
        format!("seed: {}", plan.seed),
        format!("trials: {}", s.trials),
        format!(
            "channel: {}",
            match plan.channel {
                ChannelMode::Exact => "exact",
                ChannelMode::Farfield => "farfield",
            }
        ),
        format!(
            "sweep: snr_db={} training_modes={} training_subcarriers={} cases={} transmit_power_w={} ofdm_symbols={} baseline={}",
            list(&s.snr_db),
            list(&s.training_modes),
            list(&s.training_subcarriers),
            list(&cases),
            list(&s.transmit_power),
            s.ofdm_symbols,
            s.baseline
        ),
        "conventions: phase e^{-ikd}; zero-based user/mode/subcarrier indices; angles in degrees; \
         SNR per receive element relative to the in-span power U/M^2 at unit symbol power"
            .to_string(),
    ])
}

fn run(plan: &Plan, out: &PathBuf) -> anyhow::Result<Vec<PathBuf>> {
    let mut stage = Staging::new(out, provenance(plan)?)?;
    let (cfg, s, seed, ch) = (&plan.config, &plan.sweep, plan.seed, plan.channel);
    let stem = &plan.stem;
    match plan.pipeline {
        Pipeline::Estimate => {
            let sweep = s.estimation(seed, ch);
            let points = sweep.run(cfg)?;
            let truth = cfg.placements();
            let mut w = stage.create(
                &format!("{stem}.csv"),
                &[
                    "user", "r_true", "r_hat", "theta_true", "theta_hat", "phi_true", "phi_hat", "nmse_r", "nmse_theta", "nmse_phi",
                    "seed", "snr_db", "trial", "training_modes", "training_subcarriers",
                ],
            )?;
            for pt in &points {
                for (t, (est, nmse)) in pt.estimates.iter().zip(&pt.nmse).enumerate() {
                    for (p, (e, n)) in est.iter().zip(nmse).enumerate() {
                        let tp = &truth[p];
                        w.write_record([
                            p.to_string(),
                            num(tp.range),
                            num(e.range),
                            num(tp.elevation.to_degrees()),
                            num(e.elevation.to_degrees()),
                            num(tp.azimuth.to_degrees()),
                            num(e.azimuth.to_degrees()),
                            num(n[0]),
                            num(n[1]),
                            num(n[2]),
                            seed.to_string(),
                            num(pt.snr_db),
                            t.to_string(),
                            pt.training_modes.to_string(),
                            pt.training_subcarriers.to_string(),
                        ])?;
                    }
                }
            }
            w.flush()?;
            let mut summary = stage.create(&format!("{stem}_summary.csv"), &RECORD_HEADER)?;
            write_records(&mut summary, &sweep.records(cfg, &points))?;
        }
        Pipeline::Ber => {
            let sweep = s.ber(seed, ch);
            let points = sweep.run(cfg)?;
            let mut w = stage.create(&format!("{stem}.csv"), &RECORD_HEADER)?;
            write_records(&mut w, &sweep.records(&points))?;
        }
        Pipeline::Se => {
            let sweep = s.se(seed, ch);
            let points = sweep.run(cfg)?;
            let mut w = stage.create(&format!("{stem}.csv"), &RECORD_HEADER)?;
            write_records(&mut w, &sweep.records(&points))?;
        }
        Pipeline::Ee => {
            let sweep = s.ee(seed, ch);
            let points = sweep.run(cfg)?;
            let mut w = stage.create(&format!("{stem}.csv"), &RECORD_HEADER)?;
            write_records(&mut w, &sweep.records(&points))?;
        }
        Pipeline::ChannelDump => {
            let h = assemble_channel(cfg, &cfg.placements(), ch)?;
            let t = build_mode_transform(&cfg.modes.data_modes, cfg.rx_elements(), cfg.user_count(), cfg.ring_count())?;
            let oam = effective_oam_channel(&h, &t)?;
            let mut w = stage.create(&format!("{stem}.csv"), &MATRIX_HEADER)?;
            write_matrices(&mut w, &h.matrices)?;
            let mut w = stage.create(&format!("{stem}_oam.csv"), &MATRIX_HEADER)?;
            write_matrices(&mut w, &oam.matrices)?;
        }
        Pipeline::PrecoderDump => {
            let link = Downlink::new(cfg, ch)?;
            let snr = s.snr_db[0];
            let report = estimation_trial(cfg, Some(snr), ch, &EstimatorOptions::default(), seed, 0)?;
            let estimated = link.precoder_from(&report.estimates)?;
            let mut w = stage.create(
                &format!("{stem}.csv"),
                &["precoder", "w", "user", "inter_mode", "co_mode_max", "normalized_total", "condition"],
            )?;
            let sets: [(&str, &PrecodingSet); 2] = [("true", &link.ideal), ("estimated", &estimated)];
            for (label, set) in sets {
                for (k, r) in verify_decoupling(&link.effective, set).iter().enumerate() {
                    for p in 0..set.users {
                        let co = r.co_mode[p].iter().copied().fold(0.0, f64::max);
                        w.write_record([
                            label.to_string(),
                            k.to_string(),
                            p.to_string(),
                            num(r.inter_mode[p]),
                            num(co),
                            num(r.normalized_total),
                            num(set.condition[k][p]),
                        ])?;
                    }
                }
            }
            w.flush()?;
            let mut w = stage.create(&format!("{stem}_matrices.csv"), &MATRIX_HEADER)?;
            write_matrices(&mut w, &link.ideal.p)?;
        }
        Pipeline::Complexity => {
            let case = s.cases.first().copied().unwrap_or_else(|| ModeCase::of(cfg));
            let (wd, wt, users) = (cfg.carriers.data_count, cfg.carriers.training_count, cfg.user_count());
            let mut w = stage.create(
                &format!("{stem}.csv"),
                &[
                    "elements", "rings", "subcarriers", "training_subcarriers", "data_modes", "training_modes", "users",
                    "oam_estimation", "oam_precoding", "oam_total", "mimo_estimation", "mimo_precoding", "mimo_total",
                ],
            )?;
            for &m in &s.elements {
                for &rings in &s.rings {
                    let c = complexity_estimates(wd, wt, case.data_modes, case.training_modes, users, rings, m);
                    w.write_record([
                        m.to_string(),
                        rings.to_string(),
                        wd.to_string(),
                        wt.to_string(),
                        case.data_modes.to_string(),
                        case.training_modes.to_string(),
                        users.to_string(),
                        num(c.oam_estimation),
                        num(c.oam_precoding),
                        num(c.oam_total()),
                        num(c.mimo_estimation),
                        num(c.mimo_precoding),
                        num(c.mimo_total()),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    stage.commit()
}

fn execute(pipeline: Pipeline, args: &RunArgs) -> Result<Vec<PathBuf>, Failure> {
    let threads = if args.single_thread { Some(1) } else { args.threads };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Usage(anyhow!("--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Usage(e.into()))?;
    }
    let plan = resolve(pipeline, args).map_err(Failure::Usage)?;
    run(&plan, &args.out).map_err(Failure::Pipeline)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (pipeline, args) = match cli.command {
        Command::ListPresets => {
            for p in presets() {
                println!("{:<8} {:<10} {}", p.name, p.pipeline.name(), p.description);
            }
            return ExitCode::SUCCESS;
        }
        Command::Estimate(a) => (Pipeline::Estimate, a),
        Command::PrecoderDump(a) => (Pipeline::PrecoderDump, a),
        Command::Ber(a) => (Pipeline::Ber, a),
        Command::Se(a) => (Pipeline::Se, a),
        Command::Ee(a) => (Pipeline::Ee, a),
        Command::ChannelDump(a) => (Pipeline::ChannelDump, a),
        Command::Complexity(a) => (Pipeline::Complexity, a),
    };
    match execute(pipeline, &args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Pipeline(e)) => {
            eprintln!("pipeline failed: {e:#}");
            ExitCode::from(1)
        }
    }
}
