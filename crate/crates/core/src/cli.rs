//! The `ufl` command line.
//!
//! Every report is a JSON document that echoes the parsed arguments and the
//! tool version next to the results, so a report alone is enough to rerun
//! it. Exit codes: 0 on success, 1 for bad input (arguments, files, formats),
//! 2 for numerical failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::charfn::{self, Profile};
use crate::error::{Error, Result};
use crate::game::{self, GameGrid, JMS_CONNECTION, JMS_FACILITY, GAMMA_0};
use crate::instance::{self, Format, GeneratorConfig, UflInstance};
use crate::jms::jms_solve;
use crate::relaxation::solve_relaxation;
use crate::rounding::{self, BackupCheck};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser, Serialize)]
#[command(name = "ufl", version, about = "Facility location LP rounding and frontier analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Solve the LP relaxation and write the fractional solution as JSON.
    Solve {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filter, cluster and round; report Monte Carlo costs against the bounds.
    Round {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the approachability frontier of the discretized game.
    Analyze(AnalyzeArgs),
    /// Pick the best rounding parameter for one instance's profile.
    BestGamma {
        #[command(flatten)]
        input: InstanceArgs,
        /// Size of the gamma grid on [1, gamma-max].
        #[arg(long, default_value_t = 201)]
        grid_gamma: usize,
        #[arg(long, default_value_t = 3.0)]
        gamma_max: f64,
    },
    /// Write a random Euclidean instance in the native format.
    Gen {
        #[arg(long)]
        facilities: usize,
        #[arg(long)]
        clients: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        min_cost: f64,
        #[arg(long, default_value_t = 2.0)]
        max_cost: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the JMS greedy.
    Jms {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the hardness curve 1 + 2 exp(-gamma_f).
    Hardness {
        #[arg(long)]
        gamma_f: f64,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct InstanceArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Native)]
    pub format: InputFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Native,
    Orlib,
}

impl From<InputFormat> for Format {
    fn from(f: InputFormat) -> Self {
        match f {
            InputFormat::Native => Format::Native,
            InputFormat::Orlib => Format::Orlib,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long, default_value_t = 200)]
    pub grid_gamma: usize,
    #[arg(long, default_value_t = 200)]
    pub grid_p: usize,
    #[arg(long, default_value_t = 200)]
    pub grid_phi: usize,
    #[arg(long, default_value_t = 3.0)]
    pub gamma_max: f64,
    /// Leave the JMS row out of A's strategy set.
    #[arg(long)]
    pub no_jms: bool,
    /// Also test whether the corner {x <= B, y <= B} is approachable.
    #[arg(long)]
    pub check_beta: Option<f64>,
    /// Worker threads for the per-phi solves; output does not depend on it.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Directory for frontier.csv, witness.csv and summary.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command, and returns the
/// exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let _ = writeln!(out, "{report}");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_NUMERIC
            }
        }
    }
}

fn report(cli: &Cli, result: Value) -> String {
    let doc = json!({
        "tool": "ufl",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cli,
        "result": result,
    });
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load(input: &InstanceArgs) -> Result<UflInstance> {
    let inst = instance::read_instance(&input.instance, input.format.into())?;
    let check = instance::validate(&inst);
    if !check.is_valid {
        return Err(Error::InvalidArgument(format!(
            "{} is not a metric instance: {} violation(s), first {:?}",
            input.instance.display(),
            check.violations.len(),
            check.violations[0]
        )));
    }
    Ok(inst)
}

fn execute(cli: &Cli) -> Result<String> {
    let result = match &cli.command {
        Command::Solve { input, out } => {
            let frac = solve_relaxation(&load(input)?)?;
            let export = frac.to_export();
            if let Some(path) = out {
                write_file(path, &export.to_json())?;
            }
            json!({
                "objective": frac.objective(),
                "facility_cost": frac.facility_cost(),
                "connection_cost": frac.connection_cost(),
                "written": out,
            })
        }
        Command::Round {
            input,
            gamma,
            trials,
            seed,
            out,
        } => cmd_round(input, *gamma, *trials, *seed, out.as_deref())?,
        Command::Analyze(args) => cmd_analyze(args)?,
        Command::BestGamma {
            input,
            grid_gamma,
            gamma_max,
        } => cmd_best_gamma(input, *grid_gamma, *gamma_max)?,
        Command::Gen {
            facilities,
            clients,
            seed,
            min_cost,
            max_cost,
            out,
        } => {
            let config = GeneratorConfig {
                min_opening_cost: *min_cost,
                max_opening_cost: *max_cost,
            };
            let inst = instance::generate_euclidean_with(*facilities, *clients, *seed, config)?;
            match out {
                Some(path) => {
                    instance::write_instance(&inst, path)?;
                    json!({ "written": path })
                }
                None => json!({ "instance": instance::to_native_string(&inst) }),
            }
        }
        Command::Jms { input, out } => {
            let sol = jms_solve(&load(input)?)?;
            if let Some(path) = out {
                write_file(path, &sol.to_json())?;
            }
            serde_json::to_value(&sol)?
        }
        Command::Hardness { gamma_f } => json!({
            "gamma_f": gamma_f,
            "gamma_c": game::hardness_curve(*gamma_f)?,
        }),
    };
    Ok(report(cli, result))
}

fn cmd_round(input: &InstanceArgs, gamma: f64, trials: usize, seed: u64, out: Option<&Path>) -> Result<Value> {
    let inst = load(input)?;
    let frac = solve_relaxation(&inst)?;
    let fs = rounding::filter(&frac, gamma)?;
    let cs = rounding::cluster(&fs)?;
    let est = rounding::estimate_cost(&fs, &cs, trials, seed)?;
    let bound = charfn::bound_lemma20(gamma, &charfn::characteristic_of_instance(&frac)?)?;
    let expected_facility = gamma * frac.facility_cost();
    let se = |s: &rounding::Statistic| s.std_error.unwrap_or(0.0);
    let backup: Vec<Value> = (0..inst.client_count())
        .filter(|&j| !cs.is_center(j))
        .map(|j| rounding::backup_distance_check(&fs, &cs, j).map(|c| (j, c)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter_map(|(j, c)| match c {
            BackupCheck::NotApplicable => None,
            BackupCheck::Checked { lhs, rhs_simple, rhs_refined, holds, in_range } => Some(json!({
                "client": j, "lhs": lhs, "rhs_simple": rhs_simple,
                "rhs_refined": rhs_refined, "holds": holds, "in_range": in_range,
            })),
        })
        .collect();
    let sample = rounding::round_once(&fs, &cs, seed)?;
    if let Some(path) = out {
        write_file(path, &sample.to_json())?;
    }
    Ok(json!({
        "lp": {
            "objective": frac.objective(),
            "facility_cost": frac.facility_cost(),
            "connection_cost": frac.connection_cost(),
        },
        "centers": cs.centers.len(),
        "split_facilities": fs.piece_count(),
        "trials": trials,
        "facility_cost": est.facility_cost,
        "split_facility_cost": est.split_facility_cost,
        "expected_split_facility_cost": expected_facility,
        "facility_within_3se": (est.split_facility_cost.mean - expected_facility).abs()
            <= 3.0 * se(&est.split_facility_cost) + 1e-9 * expected_facility.max(1.0),
        "connection_cost": est.connection_cost,
        "connection_bound": bound,
        "connection_below_bound": est.connection_cost.mean <= bound + 3.0 * se(&est.connection_cost) + 1e-9,
        "backup_distance": backup,
        "sample": sample,
    }))
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<Value> {
    if args.grid_gamma < 2 || args.grid_p < 2 || args.grid_phi < 2 {
        return Err(Error::InvalidArgument("grid sizes must be at least 2".into()));
    }
    let grid = GameGrid::uniform(args.grid_gamma, args.grid_p, args.grid_phi, args.gamma_max, !args.no_jms)?;
    let result = game::frontier(&grid, args.jobs)?;
    let witness = game::witness_profile(&result);
    let witness_h = witness.characteristic()?;
    let response = game::best_response(&witness_h.normalize(), &grid.gamma_grid)?;
    let check = match args.check_beta {
        None => Value::Null,
        Some(beta) => match game::check_beta(beta, &grid, args.jobs)? {
            game::BetaCheck::Approachable => json!({ "beta": beta, "approachable": true }),
            game::BetaCheck::Blocked { phi, margin, .. } => json!({
                "beta": beta, "approachable": false, "blocking_phi": phi, "margin": margin,
            }),
        },
    };
    let summary = json!({
        "beta_star": result.beta_star,
        "phi_star": result.phi_star,
        "a_theta": result.witness.a_mix.theta,
        "a_mix": result.witness.a_mix.mu.iter().filter(|m| m.1 > 1e-12).collect::<Vec<_>>(),
        "witness_mass_at_smallest_q": witness.mass_at_smallest_q,
        "witness_max_other_weight": witness.max_other_weight,
        "witness_support": witness.entries.iter().filter(|e| e.1 > 1e-9).count(),
        "best_response_to_witness": response,
        "check_beta": check,
    });
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        write_file(&dir.join("frontier.csv"), &result.curve_csv())?;
        write_file(&dir.join("witness.csv"), &result.witness_csv())?;
        let doc = json!({
            "tool": "ufl",
            "version": env!("CARGO_PKG_VERSION"),
            "config": args,
            "result": summary,
        });
        write_file(&dir.join("summary.json"), &serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(summary)
}

fn cmd_best_gamma(input: &InstanceArgs, grid_gamma: usize, gamma_max: f64) -> Result<Value> {
    if grid_gamma < 2 {
        return Err(Error::InvalidArgument("gamma grid needs at least 2 points".into()));
    }
    let frac = solve_relaxation(&load(input)?)?;
    let profile = charfn::characteristic_of_instance(&frac)?.normalize();
    let grid = GameGrid::uniform(grid_gamma, 2, 2, gamma_max, true)?;
    let best = game::best_response(&profile, &grid.gamma_grid)?;
    let fixed = game::best_response(&profile, &[GAMMA_0])?;
    Ok(json!({
        "degenerate_profile": matches!(profile, Profile::Degenerate),
        "best": best,
        "fixed_gamma_0": fixed,
        "jms_only": { "facility": JMS_FACILITY, "connection": JMS_CONNECTION, "ratio": JMS_CONNECTION },
    }))
}
