use serde::{Deserialize, Serialize};

use crate::numerics::SeededRng;

/// MDP state: the 3D offset from the UAV to the relay-cluster centroid, in
/// meters. Toy environments reuse the same shape with unused components
/// fixed at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdpState {
    pub deltas: [f64; 3],
}

impl MdpState {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Self {
        Self { deltas: [dx, dy, dz] }
    }

    /// Grid key for the tabular agent (unit-step discretization).
    pub fn discretize(&self, step: f64) -> [i64; 3] {
        [
            (self.deltas[0] / step).round() as i64,
            (self.deltas[1] / step).round() as i64,
            (self.deltas[2] / step).round() as i64,
        ]
    }
}

/// One unit move along an axis, or hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
    PlusZ,
    MinusZ,
    Hold,
}

impl Move {
    pub fn delta(&self) -> [f64; 3] {
        match self {
            Move::PlusX => [1.0, 0.0, 0.0],
            Move::MinusX => [-1.0, 0.0, 0.0],
            Move::PlusY => [0.0, 1.0, 0.0],
            Move::MinusY => [0.0, -1.0, 0.0],
            Move::PlusZ => [0.0, 0.0, 1.0],
            Move::MinusZ => [0.0, 0.0, -1.0],
            Move::Hold => [0.0, 0.0, 0.0],
        }
    }
}

/// Relay power budget adjustment accompanying a move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PowerDelta {
    Up,
    Zero,
    Down,
}

impl PowerDelta {
    pub fn signum(&self) -> f64 {
        match self {
            PowerDelta::Up => 1.0,
            PowerDelta::Zero => 0.0,
            PowerDelta::Down => -1.0,
        }
    }
}

/// One action: a move plus a power step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MdpAction {
    pub mv: Move,
    pub power: PowerDelta,
}

impl MdpAction {
    pub fn new(mv: Move, power: PowerDelta) -> Self {
        Self { mv, power }
    }
}

/// Enumerable action set. With z-moves and power steps enabled this is the
/// full 7 x 3 = 21 combination set; either axis can be switched off.
#[derive(Clone, Debug)]
pub struct ActionSet {
    actions: Vec<MdpAction>,
}

impl ActionSet {
    pub fn new(allow_z: bool, allow_power: bool) -> Self {
        let moves: &[Move] = if allow_z {
            &[
                Move::PlusX,
                Move::MinusX,
                Move::PlusY,
                Move::MinusY,
                Move::PlusZ,
                Move::MinusZ,
                Move::Hold,
            ]
        } else {
            &[Move::PlusX, Move::MinusX, Move::PlusY, Move::MinusY, Move::Hold]
        };
        let powers: &[PowerDelta] = if allow_power {
            &[PowerDelta::Up, PowerDelta::Zero, PowerDelta::Down]
        } else {
            &[PowerDelta::Zero]
        };
        let actions = moves
            .iter()
            .flat_map(|&m| powers.iter().map(move |&p| MdpAction::new(m, p)))
            .collect();
        Self { actions }
    }

    pub fn from_actions(actions: Vec<MdpAction>) -> Self {
        Self { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, idx: usize) -> MdpAction {
        self.actions[idx]
    }

    pub fn as_slice(&self) -> &[MdpAction] {
        &self.actions
    }
}

/// A Markov decision process the agents can train on. Implementations must
/// be deterministic given the RNG stream they are handed.
pub trait Environment {
    /// Reset to the start state for a new episode.
    fn reset(&mut self, rng: &mut SeededRng) -> MdpState;

    /// Apply one action; returns (next state, reward, terminal).
    fn step(&mut self, action: MdpAction, rng: &mut SeededRng) -> (MdpState, f64, bool);

    fn actions(&self) -> &ActionSet;

    /// Discretization step for the tabular agent's state grid.
    fn grid_step(&self) -> f64 {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_action_set_has_21_entries() {
        assert_eq!(ActionSet::new(true, true).len(), 21);
    }

    #[test]
    fn reduced_action_sets() {
        assert_eq!(ActionSet::new(false, true).len(), 15);
        assert_eq!(ActionSet::new(true, false).len(), 7);
        assert_eq!(ActionSet::new(false, false).len(), 5);
    }

    #[test]
    fn discretize_rounds_to_grid() {
        let s = MdpState::new(1.4, -2.6, 0.0);
        assert_eq!(s.discretize(1.0), [1, -3, 0]);
    }
}
