//! `stpef` command-line front end.
//!
//! Exit codes: 0 success, 2 bad arguments or config, 3 I/O or format error,
//! 4 numeric failure.

mod inputs;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stpef::config::Config;
use stpef::engine::BlockLayout;
use stpef::io::{
    self, read_json, write_bytes, write_dataset_set, write_field, write_json, write_metrics_csv, write_sequence,
};
use stpef::metrics::{dataset_metrics, gain_curve, MetricsReport, SignalModel, Sweep};
use stpef::repro::{run_tables, ReproOptions};
use stpef::scenesim::{generate_set, Scenario, SimOptions};
use stpef::velocity::lkd_flow;
use stpef::{Error, Mode, Velocity, VelocitySource, Whitener};

use inputs::{resolve_inputs, Input};

const RUN_LOG: &str = "run.json";
const RESIDUAL_FILE: &str = "residual.iseq";
const FIELD_FILE: &str = "field.vfld";

#[derive(Parser)]
#[command(
    name = "stpef",
    version,
    about = "Velocity-tuned prediction-error filtering of image sequences"
)]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "STPEF_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded synthetic datasets with ground truth.
    Sim {
        #[arg(long)]
        scenario: Scenario,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Frame width and height.
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 64)]
        frames: usize,
        /// Overrides the calibrated target amplitude.
        #[arg(long)]
        amplitude: Option<f64>,
        /// Snap texture frequencies and velocity to the analysis lattice.
        #[arg(long)]
        on_bin: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Whiten sequences with a velocity-tuned filter bank.
    Whiten {
        /// Config file or bundled preset name.
        #[arg(long)]
        config: String,
        #[arg(long)]
        mode: Option<Mode>,
        /// A `.iseq` file, a dataset directory or a directory of datasets.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate background velocity fields only.
    Flow {
        #[arg(long)]
        method: FlowMethod,
        /// Config for the block estimators; defaults to 3D_SAT or 2D_LAT.
        #[arg(long)]
        config: Option<String>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score whiten or flow outputs against ground truth.
    Metrics {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Label stored with the report; defaults to the run's config name.
        #[arg(long)]
        label: Option<String>,
    },
    /// Gain of the prediction-error filter against velocity mismatch.
    Response {
        #[arg(long)]
        config: String,
        /// Filter velocity `VX,VY`.
        #[arg(long, value_parser = parse_velocity, allow_hyphen_values = true)]
        v: Velocity,
        #[arg(long)]
        sweep: SweepArg,
        /// Spatial synthesis indices to evaluate, e.g. `8,9,11,13`.
        #[arg(long, value_delimiter = ',', required = true)]
        msyn: Vec<f64>,
        /// Temporal synthesis index; defaults to half the window length.
        #[arg(long)]
        msyn_z: Option<f64>,
        /// Largest mismatch (degrees or pixels per frame).
        #[arg(long)]
        max: Option<f64>,
        /// Mismatch samples on each side of zero.
        #[arg(long, default_value_t = 36)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reproduce the aggregate result tables.
    Repro {
        #[command(subcommand)]
        what: ReproCommand,
    },
}

#[derive(Subcommand)]
enum ReproCommand {
    /// Velocity-error and SCR tables with reference columns.
    Tables {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 64)]
        size: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FlowMethod {
    Lkd,
    Ac3d,
    Xcorr2d,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Angle,
    Speed,
}

fn parse_velocity(s: &str) -> Result<Velocity, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [x, y] => {
            let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
            Ok(Velocity::new(p(x)?, p(y)?))
        }
        _ => Err(format!("expected VX,VY, got '{s}'")),
    }
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) | Error::Config { .. } => 2,
            Error::Numeric(_) => 4,
            _ => 3,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        msg: msg.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Serialize, serde::Deserialize)]
struct RunLog {
    config: String,
    mode: Option<Mode>,
    method: String,
    dims: [usize; 3],
    layout: Option<BlockLayout>,
    blocks: usize,
    seconds: f64,
    seconds_per_frame: f64,
    threads: usize,
}

fn load_config(spec: &str) -> CliResult<Config> {
    Ok(Config::load(spec)?)
}

fn whitener(cfg: &Config, mode: Mode) -> CliResult<Whitener> {
    Ok(Whitener::new(
        &cfg.filter_params()?,
        cfg.grid(),
        mode,
        cfg.apply_path(),
    )?)
}

fn out_dir(out: &Path, input: &Input) -> PathBuf {
    if input.nested {
        out.join(&input.name)
    } else {
        out.to_path_buf()
    }
}

fn run_whiten(cfg: &Config, mode: Mode, inputs: &[Input], out: &Path, write_residual: bool) -> CliResult<()> {
    let w = whitener(cfg, mode)?;
    for input in inputs {
        let seq = input.sequence()?;
        let start = Instant::now();
        let o = w.run(&seq, VelocitySource::Estimate)?;
        let seconds = start.elapsed().as_secs_f64();
        let dir = out_dir(out, input);
        std::fs::create_dir_all(&dir).map_err(Error::from)?;
        if write_residual {
            write_sequence(dir.join(RESIDUAL_FILE), &o.residual)?;
        }
        write_field(dir.join(FIELD_FILE), &o.field)?;
        let dims = seq.dims();
        let log = RunLog {
            config: cfg.name.clone(),
            mode: Some(mode),
            method: if write_residual {
                "whiten".into()
            } else {
                format!("flow-{mode}")
            },
            dims,
            blocks: o.layout.block_count(),
            layout: Some(o.layout),
            seconds,
            seconds_per_frame: seconds / dims[2] as f64,
            threads: rayon::current_num_threads(),
        };
        write_json(&dir.join(RUN_LOG), &log)?;
        eprintln!(
            "{}: {} blocks, {:.4} s/frame",
            input.name, log.blocks, log.seconds_per_frame
        );
    }
    Ok(())
}

fn run_lkd(inputs: &[Input], out: &Path) -> CliResult<()> {
    for input in inputs {
        let seq = input.sequence()?;
        let start = Instant::now();
        let field = lkd_flow(&seq)?;
        let seconds = start.elapsed().as_secs_f64();
        let dir = out_dir(out, input);
        std::fs::create_dir_all(&dir).map_err(Error::from)?;
        write_field(dir.join(FIELD_FILE), &field)?;
        let dims = seq.dims();
        let log = RunLog {
            config: "LKD".into(),
            mode: None,
            method: "flow-lkd".into(),
            dims,
            layout: None,
            blocks: 0,
            seconds,
            seconds_per_frame: seconds / dims[2] as f64,
            threads: rayon::current_num_threads(),
        };
        write_json(&dir.join(RUN_LOG), &log)?;
    }
    Ok(())
}

fn run_metrics(pred: &Path, truth: &Path, out: &Path, label: Option<String>) -> CliResult<()> {
    let truths = io::dataset_dirs(truth)?;
    let many = truths.len() > 1 || truth.join(io::MANIFEST_FILE).exists();
    let mut report: Option<MetricsReport> = label.map(MetricsReport::new);
    for (name, tdir) in truths {
        let d = io::read_dataset(&tdir)?;
        let pdir = if many { pred.join(&name) } else { pred.to_path_buf() };
        let field = io::read_field(pdir.join(FIELD_FILE))?;
        let log_path = pdir.join(RUN_LOG);
        let log: Option<RunLog> = if log_path.exists() {
            Some(read_json(&log_path)?)
        } else {
            None
        };
        // Flow-only runs have no residual and therefore no SCR.
        let residual_path = pdir.join(RESIDUAL_FILE);
        let (output, covered, target) = if residual_path.exists() {
            let covered = log.as_ref().and_then(|l| l.layout.as_ref()).map(|l| l.coverage_mask());
            (io::read_sequence(&residual_path)?, covered, d.target())
        } else {
            (d.seq.clone(), None, None)
        };
        let r = report.get_or_insert_with(|| {
            MetricsReport::new(
                log.as_ref()
                    .map(|l| l.config.clone())
                    .unwrap_or_else(|| "unnamed".into()),
            )
        });
        r.push(dataset_metrics(
            name,
            &output,
            covered.as_deref(),
            &field,
            &d.truth_field,
            target,
        )?);
    }
    let report = report.ok_or_else(|| usage("no datasets found under the truth directory"))?;
    write_bytes(out, write_metrics_csv(&report)?.as_bytes())?;
    if let Some(db) = report.aggregate_scr_db {
        eprintln!("aggregate SCR {db:.2} dB");
    }
    if let Some(rms) = report.aggregate_rms {
        eprintln!("aggregate RMS velocity error {rms:.4}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_response(
    config: &str,
    v: Velocity,
    sweep: SweepArg,
    msyn: &[f64],
    msyn_z: Option<f64>,
    max: Option<f64>,
    steps: usize,
    out: &Path,
) -> CliResult<()> {
    let cfg = load_config(config)?;
    let params = cfg.filter_params()?;
    let (sweep, default_max) = match sweep {
        SweepArg::Angle => (Sweep::Angle, 180.0),
        SweepArg::Speed => (Sweep::Speed, 1.0),
    };
    let max = max.unwrap_or(default_max);
    if steps == 0 || !max.is_finite() || max <= 0.0 {
        return Err(usage("--max must be positive and --steps at least 1"));
    }
    let mismatches: Vec<f64> = (-(steps as i64)..=steps as i64)
        .map(|i| max * i as f64 / steps as f64)
        .collect();
    let mz = msyn_z.unwrap_or(params.window()[2] as f64 / 2.0);
    let mut csv = String::from("msyn_xy,msyn_z,model,mismatch,gain_db\n");
    for &m in msyn {
        for (model, name) in [(SignalModel::Clutter, "clutter"), (SignalModel::Target, "target")] {
            for p in gain_curve(&params, [m, m, mz], v, model, sweep, &mismatches) {
                let _ = writeln!(csv, "{m},{mz},{name},{},{}", p.mismatch, p.gain_db);
            }
        }
    }
    write_bytes(out, csv.as_bytes())?;
    Ok(())
}

fn run_repro(out: &Path, seed: u64, count: usize, size: usize) -> CliResult<()> {
    let opts = ReproOptions {
        base_seed: seed,
        count,
        dims: [size, size, size],
    };
    let tables = run_tables(&opts)?;
    std::fs::create_dir_all(out).map_err(Error::from)?;
    write_bytes(out.join("table2.csv"), tables.rms_csv().as_bytes())?;
    write_bytes(out.join("table3.csv"), tables.scr_csv().as_bytes())?;
    write_bytes(out.join("timing.log"), tables.timing_log().as_bytes())?;
    print!("{}\n{}", tables.rms_csv(), tables.scr_csv());
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sim {
            scenario,
            seed,
            count,
            size,
            frames,
            amplitude,
            on_bin,
            out,
        } => {
            if count == 0 || size == 0 || frames == 0 {
                return Err(usage("--count, --size and --frames must be positive"));
            }
            let opts = SimOptions {
                target_amplitude: amplitude,
                on_bin,
            };
            let sets = generate_set(seed, scenario, count, [size, size, frames], &opts)?;
            let manifest = write_dataset_set(&out, seed, &sets)?;
            eprintln!(
                "wrote {} {} datasets to {}",
                manifest.datasets.len(),
                scenario,
                out.display()
            );
            Ok(())
        }
        Command::Whiten {
            config,
            mode,
            input,
            out,
        } => {
            let cfg = load_config(&config)?;
            let inputs = resolve_inputs(&input)?;
            run_whiten(&cfg, mode.unwrap_or(cfg.mode), &inputs, &out, true)
        }
        Command::Flow {
            method,
            config,
            input,
            out,
        } => {
            let inputs = resolve_inputs(&input)?;
            match method {
                FlowMethod::Lkd => run_lkd(&inputs, &out),
                FlowMethod::Ac3d => {
                    let cfg = load_config(config.as_deref().unwrap_or("3D_SAT"))?;
                    run_whiten(&cfg, Mode::ThreeD, &inputs, &out, false)
                }
                FlowMethod::Xcorr2d => {
                    let cfg = load_config(config.as_deref().unwrap_or("2D_LAT"))?;
                    run_whiten(&cfg, Mode::TwoD, &inputs, &out, false)
                }
            }
        }
        Command::Metrics {
            pred,
            truth,
            out,
            label,
        } => run_metrics(&pred, &truth, &out, label),
        Command::Response {
            config,
            v,
            sweep,
            msyn,
            msyn_z,
            max,
            steps,
            out,
        } => run_response(&config, v, sweep, &msyn, msyn_z, max, steps, &out),
        Command::Repro {
            what: ReproCommand::Tables { out, seed, count, size },
        } => run_repro(&out, seed, count, size),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
