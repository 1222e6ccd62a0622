//! `leadnav` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or runtime error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use leadnav::io::{load_scenario, render_svg, Scenario};
use leadnav::visibility::{build_visible_region, Disc};
use leadnav::{run, run_batch, summarize, FrameworkConfig, MetricsReport, Mode, RecordMeta, RunRecord, Vec2};

#[derive(Parser)]
#[command(name = "leadnav", version, about = "Leader-following crowd navigation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one seeded run; writes record.csv and metrics.json.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario's mode.
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write the per-tick leader score table.
        #[arg(long)]
        scores: bool,
    },
    /// Simulate many trials; writes an aggregate metrics.json.
    Batch {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        mode: Option<Mode>,
        /// Overrides the scenario's trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Overrides the scenario's base seed.
        #[arg(long)]
        base_seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write record_<k>.csv for every trial.
        #[arg(long)]
        records: bool,
    },
    /// Recompute metrics from record CSVs.
    Metrics {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        /// Scenario the records came from (goal, walls, radii, time step).
        #[arg(long)]
        scenario: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a record CSV as SVG.
    Plot {
        record: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Scenario for walls and goal; defaults apply without one.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Draw the robot's visible region at this tick.
        #[arg(long)]
        region_tick: Option<u64>,
    },
    /// Check a scenario file and its trajectory source.
    Validate { scenario: PathBuf },
}

/// Files are staged in memory and written together; on any failure the
/// ones already written are removed.
#[derive(Default)]
struct Outputs(Vec<(PathBuf, Vec<u8>)>);

impl Outputs {
    fn add(&mut self, path: PathBuf, bytes: impl Into<Vec<u8>>) {
        self.0.push((path, bytes.into()));
    }

    fn commit(self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (path, bytes) in self.0 {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                if let Err(e) = fs::create_dir_all(dir) {
                    cleanup(&written);
                    return Err(e).with_context(|| format!("creating {}", dir.display()));
                }
            }
            if let Err(e) = fs::write(&path, bytes) {
                cleanup(&written);
                return Err(e).with_context(|| format!("writing {}", path.display()));
            }
            written.push(path);
        }
        Ok(written)
    }
}

fn cleanup(paths: &[PathBuf]) {
    for p in paths {
        let _ = fs::remove_file(p);
    }
}

fn scenario(path: &Path) -> Result<Scenario> {
    load_scenario(path).with_context(|| format!("loading scenario {}", path.display()))
}

fn record_meta(s: &Scenario, mode: Mode, seed: u64) -> RecordMeta {
    let max_ticks = s
        .config
        .max_ticks
        .unwrap_or_else(|| leadnav::sim::default_max_ticks(&s.scene, &s.config));
    RecordMeta {
        seed,
        mode,
        dt: s.config.dt,
        goal: s.scene.goal,
        robot_radius: s.config.robot_radius,
        agent_radius: s.config.agent_radius,
        arrival_radius: s.config.arrival_radius,
        max_ticks,
    }
}

fn read_record(path: &Path, meta: &RecordMeta) -> Result<RunRecord> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(RunRecord::read_csv(file, &path.display().to_string(), meta)?)
}

fn json(value: &MetricsReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run {
            scenario: path,
            mode,
            seed,
            out_dir,
            scores,
        } => {
            let s = scenario(&path)?;
            let mode = mode.unwrap_or(s.mode);
            let rec = run(&s.scene, &s.log, &s.config, mode, seed)?;
            let report = summarize(std::slice::from_ref(&rec), &s.scene.obstacles)?;
            let mut out = Outputs::default();
            out.add(out_dir.join("record.csv"), rec.to_csv_string()?);
            out.add(out_dir.join("metrics.json"), json(&report)?);
            if scores {
                let mut buf = Vec::new();
                rec.write_scores_csv(&mut buf)?;
                out.add(out_dir.join("scores.csv"), buf);
            }
            for p in out.commit()? {
                println!("wrote {}", p.display());
            }
            println!("status {:?} after {} ticks", rec.status, rec.final_tick());
        }
        Command::Batch {
            scenario: path,
            mode,
            trials,
            base_seed,
            out_dir,
            records,
        } => {
            let s = scenario(&path)?;
            let mode = mode.unwrap_or(s.mode);
            let trials = trials.unwrap_or(s.trials);
            let base = base_seed.unwrap_or(s.base_seed);
            let recs = run_batch(&s.scene, &s.log, &s.config, mode, trials, base)?;
            let report = summarize(&recs, &s.scene.obstacles)?;
            let mut out = Outputs::default();
            if records {
                for (k, r) in recs.iter().enumerate() {
                    out.add(out_dir.join(format!("record_{k}.csv")), r.to_csv_string()?);
                }
            }
            out.add(out_dir.join("metrics.json"), json(&report)?);
            out.commit()?;
            println!(
                "{trials} trials ({mode}): TCC uniform {:.3}, realistic {:.3}, T_avg {:.3} s, D_avg {:.3} m, timeouts {}",
                report.tcc_uniform, report.tcc_realistic, report.t_avg, report.d_avg, report.timeouts
            );
        }
        Command::Metrics {
            records,
            scenario: path,
            output,
        } => {
            let s = scenario(&path)?;
            let recs = records
                .iter()
                .enumerate()
                .map(|(k, p)| read_record(p, &record_meta(&s, s.mode, s.base_seed.wrapping_add(k as u64))))
                .collect::<Result<Vec<_>>>()?;
            let text = json(&summarize(&recs, &s.scene.obstacles)?)?;
            match output {
                Some(p) => {
                    let mut out = Outputs::default();
                    out.add(p, text);
                    out.commit()?;
                }
                None => print!("{text}"),
            }
        }
        Command::Plot {
            record,
            output,
            scenario: path,
            region_tick,
        } => {
            let s = path.as_deref().map(scenario).transpose()?;
            let meta = match &s {
                Some(s) => record_meta(s, s.mode, s.base_seed),
                None => {
                    let cfg = FrameworkConfig::default();
                    RecordMeta {
                        seed: 0,
                        mode: Mode::Framework,
                        dt: cfg.dt,
                        goal: Vec2::ZERO,
                        robot_radius: cfg.robot_radius,
                        agent_radius: cfg.agent_radius,
                        arrival_radius: cfg.arrival_radius,
                        max_ticks: 0,
                    }
                }
            };
            let mut rec = read_record(&record, &meta)?;
            if s.is_none() {
                // no scenario: mark the end of the robot's path as the goal
                rec.goal = rec.ticks.last().map_or(Vec2::ZERO, |t| t.robot.position);
            }
            let obstacles = s.as_ref().map(|s| s.scene.obstacles.clone()).unwrap_or_default();
            let region = match region_tick {
                Some(tick) => {
                    let t = rec
                        .ticks
                        .iter()
                        .find(|t| t.tick == tick)
                        .with_context(|| format!("record has no tick {tick}"))?;
                    let cfg = s.as_ref().map(|s| s.config.clone()).unwrap_or_default();
                    let discs: Vec<Disc> = t
                        .humans
                        .iter()
                        .map(|(_, h)| Disc::new(h.position, cfg.agent_radius))
                        .filter(|d| !d.contains(t.robot.position))
                        .collect();
                    Some(build_visible_region(
                        t.robot.position,
                        &discs,
                        &obstacles,
                        cfg.observable_range,
                        cfg.ray_count,
                    )?)
                }
                None => None,
            };
            let mut out = Outputs::default();
            out.add(output, render_svg(&rec, &obstacles, region.as_ref()));
            for p in out.commit()? {
                println!("wrote {}", p.display());
            }
        }
        Command::Validate { scenario: path } => {
            let s = scenario(&path)?;
            println!(
                "ok: mode {}, {} trials from seed {}, {} agents, {} walls, goal ({}, {})",
                s.mode,
                s.trials,
                s.base_seed,
                s.log.len(),
                s.scene.obstacles.len(),
                s.scene.goal.x,
                s.scene.goal.y
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
