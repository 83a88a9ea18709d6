use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use uav_relay_sim::beamforming::{optimal_relay_power, wmmse_precoder_with_trace, zf_construct};
use uav_relay_sim::harness::{
    emit_results, run_benchmarks, run_mobility, run_proposed, run_scheme, Config, RunArtifacts,
    Scheme,
};
use uav_relay_sim::numerics::{complex_gaussian, svd, ComplexMatrix, SeededRng};
use uav_relay_sim::rl::grid_search;
use uav_relay_sim::rl::toy::ChainEnv;
use uav_relay_sim::{Result, SimError};

#[derive(Parser)]
#[command(
    name = "uav-relay-sim",
    about = "Secure UAV-relay communication simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for summary.json, series_*.csv, run_meta.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the number of training episodes.
    #[arg(long)]
    episodes: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scheme end to end.
    Run {
        #[command(flatten)]
        common: Common,
        /// proposed, uav-nobf, nouav-bf or nouav-nobf.
        #[arg(long, default_value = "proposed")]
        scheme: String,
    },
    /// Run all four benchmark schemes on identical channels.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Optional comma-separated user counts for a secrecy-vs-users sweep.
        #[arg(long)]
        users: Option<String>,
    },
    /// Hyperparameter grid search over gamma and learning rate.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "0.8,0.9,0.95")]
        gammas: String,
        #[arg(long, default_value = "1e-2,1e-3,1e-4")]
        learning_rates: String,
    },
    /// Sweep the user-cluster center and rerun the pipeline per step.
    Mobility {
        #[command(flatten)]
        common: Common,
        /// Center shift per step, meters.
        #[arg(long, default_value_t = 5.0)]
        dx: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Run the numerical invariant suites and report pass/fail.
    Selftest,
}

fn load_config(common: &Common) -> Result<Config> {
    let mut config = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(ep) = common.episodes {
        config.rl.episodes = ep;
    }
    Ok(config)
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| SimError::Config(format!("bad number '{x}': {e}")))
        })
        .collect()
}

fn cmd_run(common: &Common, scheme: &str) -> Result<()> {
    let config = load_config(common)?;
    let scenario = config.scenario(common.seed)?;
    let scheme = Scheme::from_str(scheme)?;
    let output = run_scheme(&scenario, scheme)?;
    println!(
        "{}: total secrecy {:.6} bits/s/Hz (direct {:.6}, relay {:.6}), clusters {:?}",
        scheme.name(),
        output.result.total_secrecy,
        output.result.c_sec_b,
        output.result.c_sec_r,
        output.result.cluster_sizes
    );
    let artifacts = RunArtifacts {
        schemes: vec![output.result],
        episodes: output.episodes,
        ..Default::default()
    };
    emit_results(&artifacts, &scenario, &common.out)?;
    Ok(())
}

fn cmd_bench(common: &Common, users: &Option<String>) -> Result<()> {
    let config = load_config(common)?;
    let scenario = config.scenario(common.seed)?;
    let results = run_benchmarks(&scenario)?;
    for r in &results {
        println!("{:<12} total secrecy {:.6}", r.scheme.name(), r.total_secrecy);
    }
    let secrecy_vs_users = match users {
        None => None,
        Some(list) => {
            let mut points = Vec::new();
            for part in list.split(',') {
                let k: usize = part.trim().parse().map_err(|e| {
                    SimError::Config(format!("bad user count '{part}': {e}"))
                })?;
                let mut c = config.clone();
                c.users.count = k;
                let s = c.scenario(common.seed)?;
                points.push((k, run_proposed(&s)?.result.total_secrecy));
            }
            Some(points)
        }
    };
    let artifacts = RunArtifacts {
        schemes: results,
        secrecy_vs_users,
        ..Default::default()
    };
    emit_results(&artifacts, &scenario, &common.out)?;
    Ok(())
}

fn cmd_sweep(common: &Common, gammas: &str, lrs: &str) -> Result<()> {
    let config = load_config(common)?;
    let scenario = config.scenario(common.seed)?;
    let env = uav_relay_sim::harness::build_relay_env(&scenario)?;
    let gammas = parse_f64_list(gammas)?;
    let lrs = parse_f64_list(lrs)?;
    let base = scenario.rl.hyperparams();
    let rng = SeededRng::new(scenario.seed).derive(0x5EED);
    let entries = grid_search(&env, &gammas, &lrs, &base, &rng)?;
    for e in &entries {
        println!(
            "gamma {:<6} lr {:<8e} score {:.6}",
            e.gamma, e.learning_rate, e.score
        );
    }
    let artifacts = RunArtifacts {
        grid: Some(entries),
        ..Default::default()
    };
    emit_results(&artifacts, &scenario, &common.out)?;
    Ok(())
}

fn cmd_mobility(common: &Common, dx: f64, steps: usize) -> Result<()> {
    let config = load_config(common)?;
    let scenario = config.scenario(common.seed)?;
    let run = run_mobility(&scenario, dx, steps)?;
    for s in &run.steps {
        println!("center_x {:>8.2}  total secrecy {:.6}", s.center_x, s.total_secrecy);
    }
    if run.partial {
        println!("stopped early: user center reached the area boundary");
    }
    let artifacts = RunArtifacts {
        mobility: Some(run),
        ..Default::default()
    };
    emit_results(&artifacts, &scenario, &common.out)?;
    Ok(())
}

fn check(name: &str, ok: bool, failures: &mut usize) {
    println!("selftest {name:<40} {}", if ok { "ok" } else { "FAILED" });
    if !ok {
        *failures += 1;
    }
}

fn cmd_selftest() -> Result<()> {
    let mut failures = 0usize;
    let mut rng = SeededRng::new(0xC0FFEE);

    let mut ok = true;
    for _ in 0..50 {
        let a = complex_gaussian(4, 3, 1.0, &mut rng);
        let d = svd(&a).unwrap();
        ok &= (&d.reconstruct() - &a).frobenius_norm() < 1e-9;
    }
    check("svd reconstruction", ok, &mut failures);

    let mut ok = true;
    for _ in 0..50 {
        let h1 = complex_gaussian(3, 5, 1.0, &mut rng);
        let h2 = complex_gaussian(2, 3, 1.0, &mut rng);
        let lam = [1.0, 2.0];
        let zf = zf_construct(&h1, &h2, &lam).unwrap();
        let end = &(&h2 * &zf.w_r) * &(&h1 * &zf.w_br);
        ok &= (&end - &ComplexMatrix::diag(&lam)).frobenius_norm() < 1e-9;
    }
    check("zero-forcing identities", ok, &mut failures);

    let mut ok = true;
    for _ in 0..20 {
        let k = 2 + rng.gen_index(3);
        let u2 = complex_gaussian(k, k, 1.0, &mut rng);
        let d = svd(&u2).unwrap();
        let sigma: Vec<f64> = (0..k).map(|_| rng.uniform_range(0.5, 2.0)).collect();
        let alloc = optimal_relay_power(&d.u, &sigma, 5.0, 3.0).unwrap();
        ok &= alloc.total_power <= 5.0 * (1.0 + 1e-9);
    }
    check("relay power allocation feasibility", ok, &mut failures);

    let mut ok = true;
    for _ in 0..10 {
        let h = complex_gaussian(3, 5, 1.0, &mut rng);
        let (_, rates) = wmmse_precoder_with_trace(&h, 10.0, 40, 1e-10).unwrap();
        ok &= rates.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    }
    check("wmmse monotonicity", ok, &mut failures);

    let ok = {
        let mut env = ChainEnv::new(4);
        let hp = uav_relay_sim::rl::Hyperparams {
            episodes: 40,
            ..uav_relay_sim::rl::Hyperparams::toy()
        };
        let mut r = SeededRng::new(7);
        uav_relay_sim::rl::dqn_train(&mut env, &hp, &mut r).is_ok()
    };
    check("dqn training smoke", ok, &mut failures);

    if failures > 0 {
        return Err(SimError::Numerical(format!("{failures} selftest suites failed")));
    }
    println!("selftest: all suites passed");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run { common, scheme } => cmd_run(common, scheme),
        Cmd::Bench { common, users } => cmd_bench(common, users),
        Cmd::Sweep {
            common,
            gammas,
            learning_rates,
        } => cmd_sweep(common, gammas, learning_rates),
        Cmd::Mobility { common, dx, steps } => cmd_mobility(common, *dx, *steps),
        Cmd::Selftest => cmd_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                SimError::Config(_) => 2,
                SimError::Io { .. } => 4,
                _ => 3,
            })
        }
    }
}
