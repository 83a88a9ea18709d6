//! Reinforcement learning for relay trajectory optimization.
//!
//! Contains the MDP vocabulary (states, actions, experiences), a bounded
//! FIFO replay memory, a small fully connected Q-network trained with plain
//! stochastic gradient descent and a target network, a tabular Q-learning
//! baseline, and the relay flight environment that couples actions back
//! into channel realization and beamforming.
//!
//! ```
//! use uav_relay_sim::rl::q_update;
//!
//! // One Bellman backup: Q = 0, reward 1, no future value, step size 0.5.
//! assert_eq!(q_update(0.0, 1.0, 0.0, 0.5, 0.9), 0.5);
//! ```

mod dqn;
mod env;
mod network;
mod replay;
mod tabular;
pub mod toy;
mod uav_env;

pub use dqn::{
    argmax, dqn_loss, dqn_train, epsilon_greedy, grid_search, EpisodeLog, GridSearchEntry,
    Hyperparams,
};
pub use env::{ActionSet, Environment, MdpAction, MdpState, Move, PowerDelta};
pub use network::QNetwork;
pub use replay::{Experience, ReplayMemory};
pub use tabular::{q_learning_train, q_update, QTable};
pub use uav_env::{Bounds, RelayEnv, RewardMode};
