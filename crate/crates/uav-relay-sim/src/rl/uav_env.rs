use serde::{Deserialize, Serialize};

use super::env::{ActionSet, Environment, MdpAction, MdpState};
use crate::beamforming::{optimal_relay_power, zf_construct};
use crate::capacity::relay_link_rates;
use crate::channel::{realize_channels, LinkGeometry, Position3D};
use crate::error::SimError;
use crate::numerics::SeededRng;

/// What the agent is paid for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Unknown eavesdropper CSI: sum capacity of the relay-served users.
    SumCapacity,
    /// Known CSI: clamped sum secrecy of the relay-served users.
    Secrecy,
}

/// Axis-aligned flight box.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Bounds {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub z: (f64, f64),
}

impl Bounds {
    pub fn clamp(&self, p: Position3D) -> Position3D {
        Position3D::new(
            p.x.clamp(self.x.0, self.x.1),
            p.y.clamp(self.y.0, self.y.1),
            p.z.clamp(self.z.0, self.z.1),
        )
    }

    pub fn contains(&self, p: &Position3D) -> bool {
        (self.x.0..=self.x.1).contains(&p.x)
            && (self.y.0..=self.y.1).contains(&p.y)
            && (self.z.0..=self.z.1).contains(&p.z)
    }
}

/// The relay flight MDP: each step moves the UAV one grid unit, nudges the
/// relay power budget, re-realizes the channels at the new position and
/// pays the resulting rate or secrecy.
///
/// Channels are a deterministic function of (position, power budget):
/// the fading draw is seeded from the quantized position, so revisiting a
/// state reproduces the same reward. Infeasible beamforming (rank-deficient
/// channels) pays zero rather than failing.
#[derive(Clone, Debug)]
pub struct RelayEnv {
    geom: LinkGeometry,
    start: Position3D,
    bounds: Bounds,
    actions: ActionSet,
    reward_mode: RewardMode,
    /// Meters per move.
    step_meters: f64,
    p_r_max: f64,
    /// Power step p1 applied per action.
    power_step: f64,
    lambda_r_max: f64,
    p_r: f64,
    channel_seed: u64,
}

impl RelayEnv {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        geom: LinkGeometry,
        bounds: Bounds,
        actions: ActionSet,
        reward_mode: RewardMode,
        step_meters: f64,
        p_r_max: f64,
        power_step: f64,
        lambda_r_max: f64,
        channel_seed: u64,
    ) -> Self {
        let start = bounds.clamp(geom.uav);
        let mut geom = geom;
        geom.uav = start;
        Self {
            geom,
            start,
            bounds,
            actions,
            reward_mode,
            step_meters,
            p_r_max,
            power_step,
            lambda_r_max,
            p_r: p_r_max,
            channel_seed,
        }
    }

    pub fn uav_position(&self) -> Position3D {
        self.geom.uav
    }

    pub fn power_budget(&self) -> f64 {
        self.p_r
    }

    /// Centroid of the relay-served users.
    pub fn centroid(&self) -> Position3D {
        let n = self.geom.relay_users.len() as f64;
        let mut c = Position3D::new(0.0, 0.0, 0.0);
        for u in &self.geom.relay_users {
            c.x += u.x / n;
            c.y += u.y / n;
            c.z += u.z / n;
        }
        c
    }

    /// State as the UAV offset from the served-user centroid, in grid units
    /// so the network inputs stay well scaled regardless of step size.
    fn state(&self) -> MdpState {
        let c = self.centroid();
        MdpState::new(
            (self.geom.uav.x - c.x) / self.step_meters,
            (self.geom.uav.y - c.y) / self.step_meters,
            (self.geom.uav.z - c.z) / self.step_meters,
        )
    }

    /// Seed for the fading draw at the current (position, budget) pair.
    fn slot_seed(&self) -> u64 {
        let q = |v: f64| (v / self.step_meters * 4.0).round() as i64 as u64;
        let mut h: u64 = self.channel_seed ^ 0x9e37_79b9_7f4a_7c15;
        for part in [q(self.geom.uav.x), q(self.geom.uav.y), q(self.geom.uav.z), self.p_r.to_bits()]
        {
            h ^= part;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
            h ^= h >> 29;
        }
        h
    }

    /// Reward at the current position and budget.
    pub fn evaluate(&self) -> f64 {
        if self.p_r <= 0.0 {
            return 0.0;
        }
        let mut rng = SeededRng::new(self.slot_seed());
        let result = (|| -> crate::error::Result<f64> {
            let ch = realize_channels(&self.geom, &mut rng)?;
            let k_r = self.geom.relay_users.len();
            let probe = zf_construct(&ch.h1, &ch.h2, &vec![1.0; k_r])?;
            let alloc =
                optimal_relay_power(&probe.u2, &probe.sigma2, self.p_r, self.lambda_r_max)?;
            if alloc.all_zero {
                return Ok(0.0);
            }
            let zf = zf_construct(&ch.h1, &ch.h2, &alloc.lambda_r_opt)?;
            let rates = relay_link_rates(&ch.h2, &ch.h2e, &zf.w_r, &ch.h1, &zf.w_br)?;
            Ok(match self.reward_mode {
                RewardMode::SumCapacity => rates.sum_capacity(),
                RewardMode::Secrecy => rates.sum_secrecy(),
            })
        })();
        match result {
            Ok(r) => r,
            Err(SimError::Infeasible { .. }) => 0.0,
            Err(_) => 0.0,
        }
    }
}

impl Environment for RelayEnv {
    fn reset(&mut self, _rng: &mut SeededRng) -> MdpState {
        self.geom.uav = self.start;
        self.p_r = self.p_r_max;
        self.state()
    }

    fn step(&mut self, action: MdpAction, _rng: &mut SeededRng) -> (MdpState, f64, bool) {
        let d = action.mv.delta();
        let p = self.geom.uav;
        self.geom.uav = self.bounds.clamp(Position3D::new(
            p.x + d[0] * self.step_meters,
            p.y + d[1] * self.step_meters,
            p.z + d[2] * self.step_meters,
        ));
        self.p_r = (self.p_r + action.power.signum() * self.power_step).clamp(0.0, self.p_r_max);
        let reward = self.evaluate();
        (self.state(), reward, false)
    }

    fn actions(&self) -> &ActionSet {
        &self.actions
    }

    fn grid_step(&self) -> f64 {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{A2GParams, G2GParams};
    use crate::rl::env::{Move, PowerDelta};

    fn test_env() -> RelayEnv {
        let geom = LinkGeometry {
            gbs: Position3D::new(0.0, 0.0, 10.0),
            uav: Position3D::new(20.0, 20.0, 30.0),
            direct_users: vec![],
            relay_users: vec![
                Position3D::new(40.0, 38.0, 0.0),
                Position3D::new(42.0, 44.0, 0.0),
            ],
            eavesdroppers: vec![Position3D::new(60.0, 40.0, 0.0)],
            gbs_antennas: 4,
            relay_antennas: 2,
            a2g: A2GParams::default(),
            g2g: G2GParams::default(),
        };
        RelayEnv::new(
            geom,
            Bounds {
                x: (0.0, 100.0),
                y: (0.0, 100.0),
                z: (10.0, 50.0),
            },
            ActionSet::new(true, true),
            RewardMode::SumCapacity,
            1.0,
            10.0,
            1.0,
            100.0,
            1234,
        )
    }

    #[test]
    fn hold_is_a_fixed_point() {
        let mut env = test_env();
        let mut rng = SeededRng::new(1);
        let s0 = env.reset(&mut rng);
        let hold = MdpAction::new(Move::Hold, PowerDelta::Zero);
        let (s1, r1, t) = env.step(hold, &mut rng);
        assert_eq!(s0, s1);
        assert!(!t);
        let (s2, r2, _) = env.step(hold, &mut rng);
        assert_eq!(s1, s2);
        assert_eq!(r1, r2);
        assert!(r1 > 0.0);
    }

    #[test]
    fn boundary_moves_clamp() {
        let mut env = test_env();
        let mut rng = SeededRng::new(2);
        env.reset(&mut rng);
        let up = MdpAction::new(Move::PlusZ, PowerDelta::Zero);
        for _ in 0..100 {
            env.step(up, &mut rng);
        }
        assert_eq!(env.uav_position().z, 50.0);
        let (s, _, _) = env.step(up, &mut rng);
        assert_eq!(s.deltas[2], 50.0 - env.centroid().z);
    }

    #[test]
    fn power_budget_clamped_to_range() {
        let mut env = test_env();
        let mut rng = SeededRng::new(3);
        env.reset(&mut rng);
        let down = MdpAction::new(Move::Hold, PowerDelta::Down);
        for _ in 0..50 {
            env.step(down, &mut rng);
        }
        assert_eq!(env.power_budget(), 0.0);
        let (_, r, _) = env.step(down, &mut rng);
        assert_eq!(r, 0.0);
        let up = MdpAction::new(Move::Hold, PowerDelta::Up);
        for _ in 0..50 {
            env.step(up, &mut rng);
        }
        assert_eq!(env.power_budget(), 10.0);
    }

    #[test]
    fn reward_matches_independent_recomputation() {
        let mut env = test_env();
        let mut rng = SeededRng::new(4);
        env.reset(&mut rng);
        let mv = MdpAction::new(Move::PlusX, PowerDelta::Zero);
        let (_, reward, _) = env.step(mv, &mut rng);

        // Recompute through the capacity module at the new position with the
        // same slot seed.
        let mut ch_rng = SeededRng::new(env.slot_seed());
        let ch = realize_channels(&env.geom, &mut ch_rng).unwrap();
        let probe = zf_construct(&ch.h1, &ch.h2, &[1.0, 1.0]).unwrap();
        let alloc =
            optimal_relay_power(&probe.u2, &probe.sigma2, env.power_budget(), 100.0).unwrap();
        let zf = zf_construct(&ch.h1, &ch.h2, &alloc.lambda_r_opt).unwrap();
        let rates = relay_link_rates(&ch.h2, &ch.h2e, &zf.w_r, &ch.h1, &zf.w_br).unwrap();
        assert!((reward - rates.sum_capacity()).abs() < 1e-12);
    }

    #[test]
    fn state_is_centroid_delta() {
        let mut env = test_env();
        let mut rng = SeededRng::new(5);
        let s = env.reset(&mut rng);
        let c = env.centroid();
        assert_eq!(s.deltas[0], 20.0 - c.x);
        assert_eq!(s.deltas[1], 20.0 - c.y);
        assert_eq!(s.deltas[2], 30.0 - c.z);
    }
}
