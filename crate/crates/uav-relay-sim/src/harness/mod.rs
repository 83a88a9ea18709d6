//! Experiment orchestration: scenario configuration, the proposed pipeline,
//! benchmark schemes, mobility sweeps, and result emission.
//!
//! A run is fully determined by (config, master seed): every random stream
//! is derived from the seed, so repeated runs are byte-identical.

mod config;
mod emit;

pub use config::{generate_users, Config, RlSection, Scenario};
pub use emit::{emit_results, RunArtifacts};

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::{optimal_relay_power, wmmse_precoder, zf_construct};
use crate::capacity::{direct_link_rates, relay_link_rates, secrecy_summary, LinkRates};
use crate::channel::{realize_channels, ChannelSet, LinkGeometry, Position3D};
use crate::clustering::{cluster_users, extract_features, ClusterAssignment};
use crate::error::{Result, SimError};
use crate::numerics::{ComplexMatrix, SeededRng};
use crate::rl::{argmax, dqn_train, ActionSet, Environment, EpisodeLog, RelayEnv};

/// The four compared deployment schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Relay with DQN trajectory + WMMSE direct beamforming.
    Proposed,
    /// Relay with DQN trajectory, matched (non-optimized) direct beams.
    UavNoBf,
    /// No relay; WMMSE serves every user directly.
    NoUavBf,
    /// No relay; matched beams serve every user directly.
    NoUavNoBf,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Proposed,
        Scheme::UavNoBf,
        Scheme::NoUavBf,
        Scheme::NoUavNoBf,
    ];

    pub fn uses_relay(&self) -> bool {
        matches!(self, Scheme::Proposed | Scheme::UavNoBf)
    }

    pub fn optimized_beams(&self) -> bool {
        matches!(self, Scheme::Proposed | Scheme::NoUavBf)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::UavNoBf => "uav-nobf",
            Scheme::NoUavBf => "nouav-bf",
            Scheme::NoUavNoBf => "nouav-nobf",
        }
    }
}

impl FromStr for Scheme {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Scheme> {
        match s.to_ascii_lowercase().as_str() {
            "proposed" => Ok(Scheme::Proposed),
            "uav-nobf" | "uav+nobf" => Ok(Scheme::UavNoBf),
            "nouav-bf" | "nouav+bf" => Ok(Scheme::NoUavBf),
            "nouav-nobf" | "nouav+nobf" => Ok(Scheme::NoUavNoBf),
            other => Err(SimError::Config(format!(
                "unknown scheme '{other}' (expected proposed, uav-nobf, nouav-bf, nouav-nobf)"
            ))),
        }
    }
}

/// Outcome of one scheme on one scenario.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: Scheme,
    /// Time-averaged total secrecy capacity, bits/s/Hz.
    pub total_secrecy: f64,
    /// Direct-link share of the total.
    pub c_sec_b: f64,
    /// Relay-link share of the total.
    pub c_sec_r: f64,
    /// Time-averaged secrecy per user, global user indexing.
    pub per_user: Vec<f64>,
    /// (GBS cluster size, relay cluster size).
    pub cluster_sizes: (usize, usize),
    /// UAV path over the rollout, present for relay schemes.
    pub trajectory: Option<Vec<[f64; 3]>>,
    /// Per-slot hash of the shared channel draw, for fairness audits.
    pub channel_hashes: Vec<u64>,
    /// Per-slot total secrecy trace.
    pub per_slot: Vec<(usize, f64)>,
}

// Derived-stream ids; distinct per purpose so streams never collide.
const STREAM_CLUSTER_CHANNELS: u64 = 11;
const STREAM_CLUSTER_KMEANS: u64 = 12;
const STREAM_ENV_CHANNELS: u64 = 13;
const STREAM_TRAINING: u64 = 14;
const STREAM_SLOT_BASE: u64 = 1_000;
const STREAM_MOBILITY: u64 = 31;

/// FNV-style hash over the GBS-side channel entries, which are drawn
/// identically for every scheme in a benchmark run.
fn channel_hash(ch: &ChannelSet) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |m: &ComplexMatrix| {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let z = m[(i, j)];
                for bits in [z.re.to_bits(), z.im.to_bits()] {
                    h ^= bits;
                    h = h.wrapping_mul(0x0000_0100_0000_01b3);
                }
            }
        }
    };
    eat(&ch.h0);
    eat(&ch.h0e);
    h
}

fn gather_rows(src: &ComplexMatrix, rows: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows.len(), src.cols(), |i, j| src[(rows[i], j)])
}

/// Equal-power matched single-user beams, one column per served user.
fn matched_precoder(h: &ComplexMatrix, p_total: f64) -> ComplexMatrix {
    let k = h.rows();
    let m = h.cols();
    let per_user = (p_total / k as f64).sqrt();
    ComplexMatrix::from_fn(m, k, |i, j| {
        let g = h.row(j).frobenius_norm();
        if g > 0.0 {
            h[(j, i)].conj() * (per_user / g)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn cluster_scenario(scenario: &Scenario, base: &SeededRng) -> Result<ClusterAssignment> {
    let geom = LinkGeometry {
        gbs: scenario.gbs,
        uav: scenario.uav_start,
        direct_users: scenario.users.clone(),
        relay_users: vec![],
        eavesdroppers: vec![],
        gbs_antennas: scenario.gbs_antennas,
        relay_antennas: scenario.relay_antennas,
        a2g: scenario.a2g,
        g2g: scenario.g2g,
    };
    let mut rng = base.derive(STREAM_CLUSTER_CHANNELS);
    let ch = realize_channels(&geom, &mut rng)?;
    let features = extract_features(
        &scenario.users,
        &scenario.gbs,
        &ch.h0,
        scenario.p_b_max,
        scenario.metric,
    )?;
    let mut assignment = cluster_users(&features, 2, &mut base.derive(STREAM_CLUSTER_KMEANS))?;

    // The zero-forcing relay serves at most N users. When k-means puts more
    // than N users in the relay cluster, the strongest of them move back to
    // direct service: they lose the least by going without the relay.
    let mut ar = assignment.ar_users();
    if ar.len() > scenario.relay_antennas {
        ar.sort_by(|&a, &b| features.quality[b].total_cmp(&features.quality[a]));
        for &u in &ar[..ar.len() - scenario.relay_antennas] {
            assignment.labels[u] = assignment.gbs_cluster;
        }
    }
    Ok(assignment)
}

fn relay_env(scenario: &Scenario, ar_users: &[usize], base: &SeededRng) -> RelayEnv {
    let geom = LinkGeometry {
        gbs: scenario.gbs,
        uav: scenario.uav_start,
        direct_users: vec![],
        relay_users: ar_users.iter().map(|&i| scenario.users[i]).collect(),
        eavesdroppers: scenario.eavesdroppers.clone(),
        gbs_antennas: scenario.gbs_antennas,
        relay_antennas: scenario.relay_antennas,
        a2g: scenario.a2g,
        g2g: scenario.g2g,
    };
    RelayEnv::new(
        geom,
        scenario.flight_bounds(),
        ActionSet::new(scenario.rl.allow_z, scenario.rl.allow_power),
        scenario.rl.reward_mode,
        scenario.rl.step_meters,
        scenario.p_r_max,
        scenario.rl.power_step_fraction * scenario.p_r_max,
        scenario.lambda_r_max,
        base.derive(STREAM_ENV_CHANNELS).seed(),
    )
}

/// Trained trajectory shared by the relay schemes of one benchmark run.
struct Trajectory {
    positions: Vec<Position3D>,
    episodes: Vec<EpisodeLog>,
}

fn train_trajectory(
    scenario: &Scenario,
    ar_users: &[usize],
    base: &SeededRng,
) -> Result<Trajectory> {
    let mut env = relay_env(scenario, ar_users, base);
    let hp = scenario.rl.hyperparams();
    let mut rng = base.derive(STREAM_TRAINING);
    let (net, episodes) = dqn_train(&mut env, &hp, &mut rng)?;

    let mut positions = Vec::with_capacity(scenario.slots);
    let mut s = env.reset(&mut rng);
    for _ in 0..scenario.slots {
        let a = env.actions().get(argmax(&net.forward(&s.deltas)));
        let (s2, _, _) = env.step(a, &mut rng);
        s = s2;
        positions.push(env.uav_position());
    }
    Ok(Trajectory { positions, episodes })
}

/// Full per-scheme rollout over the scenario's time horizon.
pub struct SchemeOutput {
    pub result: SchemeResult,
    /// DQN episode log, present for relay schemes.
    pub episodes: Option<Vec<EpisodeLog>>,
}

fn run_scheme_inner(
    scenario: &Scenario,
    scheme: Scheme,
    cached_trajectory: Option<&Trajectory>,
) -> Result<SchemeOutput> {
    scenario.validate()?;
    let base = SeededRng::new(scenario.seed);
    let assignment = cluster_scenario(scenario, &base)?;
    let gbs_users = assignment.gbs_users();
    let ar_users = assignment.ar_users();
    let k = scenario.users.len();
    let served_direct: Vec<usize> = if scheme.uses_relay() {
        gbs_users.clone()
    } else {
        (0..k).collect()
    };

    if scheme.optimized_beams() && served_direct.len() > scenario.gbs_antennas {
        return Err(SimError::Config(format!(
            "{}: {} directly served users exceed the {} GBS antennas required for WMMSE",
            scheme.name(),
            served_direct.len(),
            scenario.gbs_antennas
        )));
    }
    if scheme.uses_relay() && ar_users.len() > scenario.relay_antennas {
        return Err(SimError::Config(format!(
            "{}: relay cluster of {} exceeds {} relay antennas",
            scheme.name(),
            ar_users.len(),
            scenario.relay_antennas
        )));
    }

    let trained;
    let trajectory: Option<&Trajectory> = if scheme.uses_relay() {
        match cached_trajectory {
            Some(t) => Some(t),
            None => {
                trained = train_trajectory(scenario, &ar_users, &base)?;
                Some(&trained)
            }
        }
    } else {
        None
    };

    let mut direct_slots = Vec::with_capacity(scenario.slots);
    let mut relay_slots = Vec::with_capacity(scenario.slots);
    let mut hashes = Vec::with_capacity(scenario.slots);
    let mut per_user = vec![0.0; k];

    for t in 0..scenario.slots {
        let uav = trajectory
            .map(|tr| tr.positions[t])
            .unwrap_or(scenario.uav_start);
        let geom = LinkGeometry {
            gbs: scenario.gbs,
            uav,
            direct_users: scenario.users.clone(),
            relay_users: ar_users.iter().map(|&i| scenario.users[i]).collect(),
            eavesdroppers: scenario.eavesdroppers.clone(),
            gbs_antennas: scenario.gbs_antennas,
            relay_antennas: scenario.relay_antennas,
            a2g: scenario.a2g,
            g2g: scenario.g2g,
        };
        let mut rng = base.derive(STREAM_SLOT_BASE + t as u64);
        let ch = realize_channels(&geom, &mut rng)?;
        hashes.push(channel_hash(&ch));

        let h0_served = gather_rows(&ch.h0, &served_direct);
        let w = if scheme.optimized_beams() {
            wmmse_precoder(&h0_served, scenario.p_b_max, 100, 1e-8)?
        } else {
            matched_precoder(&h0_served, scenario.p_b_max)
        };
        let direct = direct_link_rates(&h0_served, &ch.h0e, &w)?;
        for (j, &u) in served_direct.iter().enumerate() {
            per_user[u] += direct.secrecy_per_user[j];
        }
        direct_slots.push(direct);

        let relay = if scheme.uses_relay() {
            let probe = zf_construct(&ch.h1, &ch.h2, &vec![1.0; ar_users.len()]).map_err(
                |e| tag_slot(e, t),
            )?;
            let alloc = optimal_relay_power(
                &probe.u2,
                &probe.sigma2,
                scenario.p_r_max,
                scenario.lambda_r_max,
            )?;
            let zf = zf_construct(&ch.h1, &ch.h2, &alloc.lambda_r_opt)
                .map_err(|e| tag_slot(e, t))?;
            relay_link_rates(&ch.h2, &ch.h2e, &zf.w_r, &ch.h1, &zf.w_br)?
        } else {
            LinkRates::default()
        };
        for (j, &u) in ar_users.iter().enumerate() {
            if scheme.uses_relay() {
                per_user[u] += relay.secrecy_per_user[j];
            }
        }
        relay_slots.push(relay);
    }

    let summary = secrecy_summary(&direct_slots, &relay_slots)?;
    for v in &mut per_user {
        *v /= scenario.slots as f64;
    }

    let (episodes, traj_points) = match trajectory {
        Some(tr) => (
            Some(tr.episodes.clone()),
            Some(tr.positions.iter().map(|p| [p.x, p.y, p.z]).collect()),
        ),
        None => (None, None),
    };
    Ok(SchemeOutput {
        result: SchemeResult {
            scheme,
            total_secrecy: summary.c_total,
            c_sec_b: summary.c_sec_b,
            c_sec_r: summary.c_sec_r,
            per_user,
            cluster_sizes: (gbs_users.len(), ar_users.len()),
            trajectory: traj_points,
            channel_hashes: hashes,
            per_slot: summary.per_slot_trace,
        },
        episodes,
    })
}

fn tag_slot(e: SimError, slot: usize) -> SimError {
    match e {
        SimError::Infeasible { channel, sigma_min } => SimError::Infeasible {
            channel: format!("slot {slot}: {channel}"),
            sigma_min,
        },
        other => other,
    }
}

/// Run one scheme on the scenario.
pub fn run_scheme(scenario: &Scenario, scheme: Scheme) -> Result<SchemeOutput> {
    run_scheme_inner(scenario, scheme, None)
}

/// The full proposed pipeline: clustering, WMMSE, DQN trajectory, ZF relay.
pub fn run_proposed(scenario: &Scenario) -> Result<SchemeOutput> {
    run_scheme(scenario, Scheme::Proposed)
}

/// All four schemes under identical channel draws. The shared GBS-side
/// channel realizations are verified by hash before returning.
pub fn run_benchmarks(scenario: &Scenario) -> Result<Vec<SchemeResult>> {
    scenario.validate()?;
    let base = SeededRng::new(scenario.seed);
    let assignment = cluster_scenario(scenario, &base)?;
    let ar_users = assignment.ar_users();
    let trajectory = train_trajectory(scenario, &ar_users, &base)?;

    let mut results = Vec::with_capacity(Scheme::ALL.len());
    for scheme in Scheme::ALL {
        let cached = scheme.uses_relay().then_some(&trajectory);
        results.push(run_scheme_inner(scenario, scheme, cached)?.result);
    }
    let reference = results[0].channel_hashes.clone();
    for r in &results[1..] {
        if r.channel_hashes != reference {
            return Err(SimError::Numerical(format!(
                "benchmark fairness violated: {} saw different channel draws",
                r.scheme.name()
            )));
        }
    }
    Ok(results)
}

/// Relay flight environment for the scenario's AR cluster, as used by the
/// trajectory trainer; exposed for hyperparameter sweeps.
pub fn build_relay_env(scenario: &Scenario) -> Result<RelayEnv> {
    scenario.validate()?;
    let base = SeededRng::new(scenario.seed);
    let assignment = cluster_scenario(scenario, &base)?;
    Ok(relay_env(scenario, &assignment.ar_users(), &base))
}

/// One step of the user-mobility sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MobilityStep {
    pub center_x: f64,
    pub total_secrecy: f64,
    pub result: SchemeResult,
}

/// Mobility sweep outcome; `partial` is set when the user center left the
/// area before all steps completed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MobilityRun {
    pub steps: Vec<MobilityStep>,
    pub partial: bool,
}

/// Shift the user-cluster center by `dx` per step, re-randomize the users
/// around it, and rerun the whole proposed pipeline each time.
pub fn run_mobility(scenario: &Scenario, dx: f64, steps: usize) -> Result<MobilityRun> {
    if dx <= 0.0 {
        return Err(SimError::Config("mobility dx must be positive".into()));
    }
    if steps == 0 {
        return Err(SimError::Config("mobility needs at least one step".into()));
    }
    let n = scenario.users.len() as f64;
    let center_y = scenario.users.iter().map(|u| u.y).sum::<f64>() / n;
    let center_x0 = scenario.users.iter().map(|u| u.x).sum::<f64>() / n;
    let base = SeededRng::new(scenario.seed).derive(STREAM_MOBILITY);

    let mut out = MobilityRun {
        steps: Vec::new(),
        partial: false,
    };
    for i in 0..steps {
        let center_x = center_x0 + dx * i as f64;
        if center_x < scenario.bounds_min.x || center_x > scenario.bounds_max.x {
            out.partial = true;
            break;
        }
        let mut rng = base.derive(i as u64);
        let users: Vec<Position3D> = (0..scenario.users.len())
            .map(|_| {
                Position3D::new(
                    rng.normal(center_x, scenario.user_spread),
                    rng.normal(center_y, scenario.user_spread),
                    0.0,
                )
            })
            .collect();
        let mut step_scenario = scenario.clone();
        step_scenario.users = users;
        // The UAV tracks the moving users: each step it is redeployed above
        // the current center at its configured altitude.
        step_scenario.uav_start =
            Position3D::new(center_x, center_y, scenario.uav_start.z);
        let result = run_proposed(&step_scenario)?.result;
        out.steps.push(MobilityStep {
            center_x,
            total_secrecy: result.total_secrecy,
            result,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> Config {
        let mut c = Config::default();
        c.users.count = 4;
        c.radio.gbs_antennas = 4;
        c.radio.relay_antennas = 2;
        c.sim.slots = 3;
        c.rl.episodes = 4;
        c.rl.steps_per_episode = 5;
        c.rl.hidden_layers = vec![8];
        c
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(Scheme::from_str(s.name()).unwrap(), s);
        }
        assert!(Scheme::from_str("nonsense").is_err());
    }

    #[test]
    fn proposed_is_deterministic() {
        let s = small_config().scenario(Some(3)).unwrap();
        let a = run_proposed(&s).unwrap().result;
        let b = run_proposed(&s).unwrap().result;
        assert_eq!(a.total_secrecy, b.total_secrecy);
        assert_eq!(a.per_user, b.per_user);
        assert_eq!(a.trajectory, b.trajectory);
    }

    #[test]
    fn proposed_records_cluster_sizes() {
        let s = small_config().scenario(Some(4)).unwrap();
        let r = run_proposed(&s).unwrap().result;
        assert_eq!(r.cluster_sizes.0 + r.cluster_sizes.1, 4);
        assert!(r.cluster_sizes.0 > 0 && r.cluster_sizes.1 > 0);
    }

    #[test]
    fn no_eavesdroppers_secrecy_equals_capacity() {
        let mut c = small_config();
        c.eavesdroppers.positions = vec![];
        let s = c.scenario(Some(5)).unwrap();
        let r = run_proposed(&s).unwrap().result;
        // With no eavesdropper the clamp is inactive: every per-user secrecy
        // is the plain capacity, so the total is strictly positive.
        assert!(r.total_secrecy > 0.0);
        assert!(r.per_user.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn benchmarks_return_four_schemes_with_shared_channels() {
        let s = small_config().scenario(Some(6)).unwrap();
        let rs = run_benchmarks(&s).unwrap();
        assert_eq!(rs.len(), 4);
        for r in &rs[1..] {
            assert_eq!(r.channel_hashes, rs[0].channel_hashes);
        }
    }

    #[test]
    fn mobility_rejects_zero_dx() {
        let s = small_config().scenario(Some(7)).unwrap();
        assert!(run_mobility(&s, 0.0, 3).is_err());
    }

    #[test]
    fn mobility_stops_at_bounds_with_partial_flag() {
        let s = small_config().scenario(Some(8)).unwrap();
        let run = run_mobility(&s, 60.0, 10).unwrap();
        assert!(run.partial);
        assert!(run.steps.len() < 10);
    }
}
