use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use duopoly_core::single_stage::closed_form_equilibrium;
use duopoly_core::{Execution, LoyaltyModel, MarketParams};
use duopoly_experiments::scenario::Setting;
use duopoly_experiments::{emit_outputs, run_sweep, verify, Error, Scenario};

#[derive(Parser)]
#[command(
    name = "duopoly",
    version,
    about = "Price competition with loyal customers: sweeps, checks and region maps"
)]
struct Cli {
    /// Evaluate sweep points one at a time.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario sweep and write its CSV and charts.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replace the scenario's setting.
        #[arg(long, value_enum)]
        setting: Option<SettingArg>,
        /// Horizon for `--setting myopic-horizon`.
        #[arg(long, default_value_t = 20)]
        horizon: usize,
        /// Replace the number of sweep points.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Check the equilibrium certificates of every point of a scenario.
    Verify { scenario: PathBuf },
    /// Classify the one-shot region of a market and print its prices.
    Regions {
        #[arg(long, value_enum, default_value_t = FamilyArg::Linear)]
        family: FamilyArg,
        #[arg(long)]
        c_a: f64,
        #[arg(long)]
        c_b: f64,
        #[arg(long)]
        l_alpha: Option<f64>,
        #[arg(long)]
        s_alpha: Option<f64>,
        #[arg(long)]
        l_beta: Option<f64>,
        #[arg(long)]
        s_beta: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    SingleStage,
    MyopicHorizon,
    MarkovUnconstrained,
    MarkovQre,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Linear,
    Multiplicative,
    Additive,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Auto
    };
    match run(cli.command, exec) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command, exec: Execution) -> Result<u8, Error> {
    match command {
        Command::Sweep {
            scenario,
            out,
            setting,
            horizon,
            steps,
        } => {
            let mut s = Scenario::load(&scenario)?;
            if let Some(setting) = setting {
                s.setting = match setting {
                    SettingArg::SingleStage => Setting::SingleStage,
                    SettingArg::MyopicHorizon => Setting::MyopicHorizon { horizon },
                    SettingArg::MarkovUnconstrained => Setting::MarkovUnconstrained,
                    SettingArg::MarkovQre => Setting::MarkovQre,
                };
            }
            if let Some(n) = steps {
                s.sweep.steps = n;
            }
            s.validate()?;
            let table = run_sweep(&s, exec);
            let failed = table.failures();
            for path in emit_outputs(&table, &out)? {
                println!("wrote {}", path.display());
            }
            if failed == table.rows.len() {
                return Err(Error::Solver(format!("all {failed} sweep points failed")));
            }
            if failed > 0 {
                eprintln!(
                    "warning: {failed} of {} sweep points failed; see the error column",
                    table.rows.len()
                );
            }
            Ok(0)
        }
        Command::Verify { scenario } => {
            let s = Scenario::load(&scenario)?;
            let checks = verify::verify(&s, exec);
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().all(|c| c.passed) {
                Ok(0)
            } else {
                Err(Error::Solver(format!("{} failed verification", s.name)))
            }
        }
        Command::Regions {
            family,
            c_a,
            c_b,
            l_alpha,
            s_alpha,
            l_beta,
            s_beta,
        } => {
            let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Invalid(format!("--{name} is required")));
            let refuse = |v: Option<f64>, name: &str| match v {
                Some(_) => Err(Error::Invalid(format!("--{name} does not apply to this family"))),
                None => Ok(()),
            };
            let model = match family {
                FamilyArg::Linear => LoyaltyModel::linear(
                    need(l_alpha, "l-alpha")?,
                    need(s_alpha, "s-alpha")?,
                    need(l_beta, "l-beta")?,
                    need(s_beta, "s-beta")?,
                )?,
                FamilyArg::Multiplicative => {
                    refuse(s_alpha, "s-alpha")?;
                    refuse(s_beta, "s-beta")?;
                    LoyaltyModel::multiplicative(need(l_alpha, "l-alpha")?, need(l_beta, "l-beta")?)?
                }
                FamilyArg::Additive => {
                    refuse(l_alpha, "l-alpha")?;
                    refuse(l_beta, "l-beta")?;
                    LoyaltyModel::additive(need(s_alpha, "s-alpha")?, need(s_beta, "s-beta")?)?
                }
            };
            let params = MarketParams::new(c_a, c_b, model)?;
            let out = closed_form_equilibrium(&params)?;
            let region = out.region.expect("closed form always classifies");
            let p = out.prices;
            println!("region {region}");
            println!("p_A_alpha {}", p.a_alpha);
            println!("p_A_beta {}", p.a_beta);
            println!("p_B_beta {}", p.b_beta);
            println!("p_B_alpha {}", p.b_alpha);
            Ok(0)
        }
    }
}
