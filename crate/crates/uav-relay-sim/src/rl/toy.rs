//! Small deterministic environments used to validate the agents against
//! exact dynamic-programming oracles.

use super::env::{ActionSet, Environment, MdpAction, MdpState, Move, PowerDelta};
use crate::numerics::SeededRng;

/// Deterministic line of `n` states. Start at 0; reaching state `n - 1`
/// pays reward 1 and ends the episode. Actions: step left or right.
#[derive(Clone, Debug)]
pub struct ChainEnv {
    n: usize,
    pos: usize,
    actions: ActionSet,
}

impl ChainEnv {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        Self {
            n,
            pos: 0,
            actions: ActionSet::from_actions(vec![
                MdpAction::new(Move::MinusX, PowerDelta::Zero),
                MdpAction::new(Move::PlusX, PowerDelta::Zero),
            ]),
        }
    }

    pub fn state_of(pos: usize) -> MdpState {
        MdpState::new(pos as f64, 0.0, 0.0)
    }
}

impl Environment for ChainEnv {
    fn reset(&mut self, _rng: &mut SeededRng) -> MdpState {
        self.pos = 0;
        Self::state_of(self.pos)
    }

    fn step(&mut self, action: MdpAction, _rng: &mut SeededRng) -> (MdpState, f64, bool) {
        match action.mv {
            Move::MinusX => self.pos = self.pos.saturating_sub(1),
            Move::PlusX => self.pos = (self.pos + 1).min(self.n - 1),
            _ => {}
        }
        let terminal = self.pos == self.n - 1;
        let reward = if terminal { 1.0 } else { 0.0 };
        (Self::state_of(self.pos), reward, terminal)
    }

    fn actions(&self) -> &ActionSet {
        &self.actions
    }
}

/// Deterministic square gridworld. Start at the origin corner; the opposite
/// corner pays reward 1 and terminates. Moves off the grid clamp in place.
#[derive(Clone, Debug)]
pub struct GridworldEnv {
    side: usize,
    pos: (usize, usize),
    actions: ActionSet,
}

impl GridworldEnv {
    pub fn new(side: usize) -> Self {
        assert!(side >= 2);
        Self {
            side,
            pos: (0, 0),
            actions: ActionSet::from_actions(vec![
                MdpAction::new(Move::PlusX, PowerDelta::Zero),
                MdpAction::new(Move::MinusX, PowerDelta::Zero),
                MdpAction::new(Move::PlusY, PowerDelta::Zero),
                MdpAction::new(Move::MinusY, PowerDelta::Zero),
            ]),
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Optimal episode length from the start corner: the Manhattan distance.
    pub fn optimal_steps(&self) -> usize {
        2 * (self.side - 1)
    }

    fn state(&self) -> MdpState {
        MdpState::new(self.pos.0 as f64, self.pos.1 as f64, 0.0)
    }
}

impl Environment for GridworldEnv {
    fn reset(&mut self, _rng: &mut SeededRng) -> MdpState {
        self.pos = (0, 0);
        self.state()
    }

    fn step(&mut self, action: MdpAction, _rng: &mut SeededRng) -> (MdpState, f64, bool) {
        let (x, y) = self.pos;
        self.pos = match action.mv {
            Move::PlusX => ((x + 1).min(self.side - 1), y),
            Move::MinusX => (x.saturating_sub(1), y),
            Move::PlusY => (x, (y + 1).min(self.side - 1)),
            Move::MinusY => (x, y.saturating_sub(1)),
            _ => (x, y),
        };
        let terminal = self.pos == (self.side - 1, self.side - 1);
        let reward = if terminal { 1.0 } else { 0.0 };
        (self.state(), reward, terminal)
    }

    fn actions(&self) -> &ActionSet {
        &self.actions
    }
}
