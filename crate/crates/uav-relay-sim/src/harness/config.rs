use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{A2GParams, G2GParams, Position3D};
use crate::clustering::ClusterMetric;
use crate::error::{Result, SimError};
use crate::numerics::SeededRng;
use crate::rl::{Hyperparams, RewardMode};

fn pos(a: [f64; 3]) -> Position3D {
    Position3D::new(a[0], a[1], a[2])
}

/// On-disk experiment configuration. Every field has a documented default;
/// a config file only needs the keys it wants to override.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub sim: SimSection,
    pub geometry: GeometrySection,
    pub users: UsersSection,
    pub eavesdroppers: EveSection,
    pub radio: RadioSection,
    pub power: PowerSection,
    pub clustering: ClusteringSection,
    pub rl: RlSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    /// Master seed; every random stream in a run derives from it.
    pub seed: u64,
    /// Time slots rolled out per evaluation.
    pub slots: usize,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { seed: 1, slots: 10 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub gbs: [f64; 3],
    pub uav_start: [f64; 3],
    /// Flight box corners for the UAV.
    pub bounds_min: [f64; 3],
    pub bounds_max: [f64; 3],
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            gbs: [0.0, 0.0, 25.0],
            uav_start: [80.0, 80.0, 40.0],
            bounds_min: [0.0, 0.0, 20.0],
            bounds_max: [120.0, 120.0, 60.0],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsersSection {
    /// Number of ground users when positions are generated.
    pub count: usize,
    /// Center of the GBS-side user blob (x, y), meters.
    pub near_center: [f64; 2],
    /// Center of the remote user blob (x, y), meters.
    pub far_center: [f64; 2],
    /// Standard deviation of user placement around each center.
    pub spread: f64,
    /// Explicit positions; overrides the generated blobs when present.
    pub positions: Option<Vec<[f64; 3]>>,
}

impl Default for UsersSection {
    fn default() -> Self {
        Self {
            count: 8,
            near_center: [15.0, 15.0],
            far_center: [90.0, 90.0],
            spread: 5.0,
            positions: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EveSection {
    pub positions: Vec<[f64; 3]>,
}

impl Default for EveSection {
    fn default() -> Self {
        Self {
            positions: vec![[70.0, 52.5, 0.0]],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSection {
    /// GBS array size M.
    pub gbs_antennas: usize,
    /// Relay array size N.
    pub relay_antennas: usize,
    pub a2g: A2GParams,
    pub g2g: G2GParams,
}

impl Default for RadioSection {
    fn default() -> Self {
        Self {
            gbs_antennas: 8,
            relay_antennas: 4,
            a2g: A2GParams::default(),
            g2g: G2GParams::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    /// GBS transmit budget over unit noise (linear).
    pub p_b_max: f64,
    /// Relay transmit budget over unit noise (linear).
    pub p_r_max: f64,
    /// Per-antenna amplification cap.
    pub lambda_r_max: f64,
}

impl Default for PowerSection {
    fn default() -> Self {
        Self {
            p_b_max: 1e6,
            p_r_max: 1e5,
            lambda_r_max: 10.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringSection {
    pub metric: ClusterMetric,
}

impl Default for ClusteringSection {
    fn default() -> Self {
        Self {
            metric: ClusterMetric::Channel,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RlSection {
    pub gamma: f64,
    pub learning_rate: f64,
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub batch_size: usize,
    pub target_update_every: usize,
    pub memory_capacity: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay: f64,
    pub hidden_layers: Vec<usize>,
    /// Cap on the global gradient norm per SGD step.
    pub grad_clip: f64,
    pub reward_mode: RewardMode,
    /// Allow vertical moves (the 21-action set); off restricts to the plane.
    pub allow_z: bool,
    /// Allow power-step actions; off delegates power purely to the
    /// closed-form allocator.
    pub allow_power: bool,
    /// Relay budget change per power action, as a fraction of p_r_max.
    pub power_step_fraction: f64,
    /// Meters flown per move action.
    pub step_meters: f64,
}

impl Default for RlSection {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            learning_rate: 1e-2,
            episodes: 150,
            steps_per_episode: 25,
            batch_size: 16,
            target_update_every: 50,
            memory_capacity: 2_000,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay: 0.95,
            hidden_layers: vec![32, 32],
            grad_clip: 10.0,
            reward_mode: RewardMode::SumCapacity,
            allow_z: true,
            allow_power: true,
            power_step_fraction: 0.1,
            step_meters: 5.0,
        }
    }
}

impl RlSection {
    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            gamma: self.gamma,
            learning_rate: self.learning_rate,
            episodes: self.episodes,
            steps_per_episode: self.steps_per_episode,
            batch_size: self.batch_size,
            target_update_every: self.target_update_every,
            memory_capacity: self.memory_capacity,
            epsilon_start: self.epsilon_start,
            epsilon_end: self.epsilon_end,
            epsilon_decay: self.epsilon_decay,
            hidden_layers: self.hidden_layers.clone(),
            grad_clip: self.grad_clip,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        toml::from_str(&text).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))
    }

    /// Concrete scenario with user positions materialized from the seed.
    pub fn scenario(&self, seed_override: Option<u64>) -> Result<Scenario> {
        let seed = seed_override.unwrap_or(self.sim.seed);
        let users = match &self.users.positions {
            Some(explicit) => explicit.iter().map(|&p| pos(p)).collect(),
            None => {
                let mut rng = SeededRng::new(seed).derive(0xA11C_E5);
                generate_users(
                    self.users.count,
                    self.users.near_center,
                    self.users.far_center,
                    self.users.spread,
                    &mut rng,
                )
            }
        };
        let s = Scenario {
            gbs: pos(self.geometry.gbs),
            uav_start: pos(self.geometry.uav_start),
            bounds_min: pos(self.geometry.bounds_min),
            bounds_max: pos(self.geometry.bounds_max),
            users,
            eavesdroppers: self.eavesdroppers.positions.iter().map(|&p| pos(p)).collect(),
            gbs_antennas: self.radio.gbs_antennas,
            relay_antennas: self.radio.relay_antennas,
            a2g: self.radio.a2g,
            g2g: self.radio.g2g,
            p_b_max: self.power.p_b_max,
            p_r_max: self.power.p_r_max,
            lambda_r_max: self.power.lambda_r_max,
            slots: self.sim.slots,
            seed,
            metric: self.clustering.metric,
            user_spread: self.users.spread,
            rl: self.rl.clone(),
        };
        s.validate()?;
        Ok(s)
    }
}

/// Half the users around each blob center, on the ground plane.
pub fn generate_users(
    count: usize,
    near: [f64; 2],
    far: [f64; 2],
    spread: f64,
    rng: &mut SeededRng,
) -> Vec<Position3D> {
    (0..count)
        .map(|i| {
            let c = if i < count / 2 { near } else { far };
            Position3D::new(
                rng.normal(c[0], spread),
                rng.normal(c[1], spread),
                0.0,
            )
        })
        .collect()
}

/// Fully materialized experiment setup.
#[derive(Clone, Debug, Serialize)]
pub struct Scenario {
    pub gbs: Position3D,
    pub uav_start: Position3D,
    pub bounds_min: Position3D,
    pub bounds_max: Position3D,
    pub users: Vec<Position3D>,
    pub eavesdroppers: Vec<Position3D>,
    pub gbs_antennas: usize,
    pub relay_antennas: usize,
    pub a2g: A2GParams,
    pub g2g: G2GParams,
    pub p_b_max: f64,
    pub p_r_max: f64,
    pub lambda_r_max: f64,
    pub slots: usize,
    pub seed: u64,
    pub metric: ClusterMetric,
    /// Placement spread, reused when mobility re-randomizes users.
    pub user_spread: f64,
    pub rl: RlSection,
}

impl Scenario {
    pub fn flight_bounds(&self) -> crate::rl::Bounds {
        crate::rl::Bounds {
            x: (self.bounds_min.x, self.bounds_max.x),
            y: (self.bounds_min.y, self.bounds_max.y),
            z: (self.bounds_min.z, self.bounds_max.z),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.len() < 2 {
            return Err(SimError::Config("need at least 2 users".into()));
        }
        if self.gbs_antennas == 0 || self.relay_antennas == 0 {
            return Err(SimError::Config("antenna counts must be positive".into()));
        }
        if self.p_b_max <= 0.0 || self.p_r_max <= 0.0 || self.lambda_r_max <= 0.0 {
            return Err(SimError::Config("power budgets must be positive".into()));
        }
        if self.slots == 0 {
            return Err(SimError::Config("slots must be positive".into()));
        }
        for (lo, hi) in [
            (self.bounds_min.x, self.bounds_max.x),
            (self.bounds_min.y, self.bounds_max.y),
            (self.bounds_min.z, self.bounds_max.z),
        ] {
            if lo >= hi {
                return Err(SimError::Config("degenerate flight bounds".into()));
            }
        }
        if !self.flight_bounds().contains(&self.uav_start) {
            return Err(SimError::Config("uav_start outside flight bounds".into()));
        }
        if self.rl.power_step_fraction < 0.0 || self.rl.step_meters <= 0.0 {
            return Err(SimError::Config("invalid rl step sizes".into()));
        }
        self.rl.hyperparams().validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_produce_valid_scenario() {
        let s = Config::default().scenario(None).unwrap();
        assert_eq!(s.users.len(), 8);
        assert!(s.users.iter().all(|u| u.z == 0.0));
    }

    #[test]
    fn seed_override_changes_users() {
        let c = Config::default();
        let a = c.scenario(Some(1)).unwrap();
        let b = c.scenario(Some(2)).unwrap();
        assert_ne!(a.users[0].x, b.users[0].x);
        let a2 = c.scenario(Some(1)).unwrap();
        assert_eq!(a.users[0].x, a2.users[0].x);
    }

    #[test]
    fn toml_round_trip_and_partial_override() {
        let text = "[sim]\nseed = 7\n[power]\np_b_max = 123.0\n";
        let c: Config = toml::from_str(text).unwrap();
        assert_eq!(c.sim.seed, 7);
        assert_eq!(c.power.p_b_max, 123.0);
        // Untouched sections keep their defaults.
        assert_eq!(c.radio.gbs_antennas, 8);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "[sim]\nseeed = 7\n";
        assert!(toml::from_str::<Config>(text).is_err());
    }

    #[test]
    fn explicit_positions_win() {
        let mut c = Config::default();
        c.users.positions = Some(vec![[1.0, 2.0, 0.0], [3.0, 4.0, 0.0]]);
        let s = c.scenario(None).unwrap();
        assert_eq!(s.users.len(), 2);
        assert_eq!(s.users[1].y, 4.0);
    }
}
