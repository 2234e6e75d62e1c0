//! Deterministic, seedable 2D lunar-lander environment.
//!
//! Point mass with a scalar attitude over a flat pad centered at x = 0.
//! State is 8-dimensional (`x, y, vx, vy, angle, w, left_leg, right_leg`),
//! actions are the 4 discrete engine commands, and the per-step reward is a
//! potential-based shaping delta minus engine cost, plus a terminal bonus
//! (+100 landed, -100 crashed). An episode with cumulative reward >= 200
//! counts as a success.

mod config;
mod env;

pub use config::{ConfigKeyError, SimConfig};
pub use env::{EpisodeFailure, StepError, reset, run_episode, step};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// The 8 scalar components of the environment state, in DSL variable order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanderState {
    /// Horizontal position, pad-centered units.
    pub x: f64,
    /// Altitude, 0 = pad surface.
    pub y: f64,
    pub vx: f64,
    /// Vertical velocity, negative = descending.
    pub vy: f64,
    /// Attitude in radians, 0 = upright, positive = tilt right.
    pub angle: f64,
    pub angular_velocity: f64,
    /// 0.0 or 1.0.
    pub left_leg_contact: f64,
    /// 0.0 or 1.0.
    pub right_leg_contact: f64,
}

impl LanderState {
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.x,
            self.y,
            self.vx,
            self.vy,
            self.angle,
            self.angular_velocity,
            self.left_leg_contact,
            self.right_leg_contact,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// One of the 4 discrete engine commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Nothing,
    FireLeft,
    FireMain,
    FireRight,
}

/// Raised when an integer action index is outside {0,1,2,3}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InvalidAction(pub i64);

impl core::fmt::Display for InvalidAction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "invalid action {} (expected 0..=3)", self.0)
    }
}

impl Action {
    /// Strict conversion: out-of-range values are an error, never clamped.
    pub fn from_index(value: i64) -> Result<Action, InvalidAction> {
        match value {
            0 => Ok(Action::Nothing),
            1 => Ok(Action::FireLeft),
            2 => Ok(Action::FireMain),
            3 => Ok(Action::FireRight),
            other => Err(InvalidAction(other)),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Action::Nothing => 0,
            Action::FireLeft => 1,
            Action::FireMain => 2,
            Action::FireRight => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminationKind {
    Running,
    Landed,
    Crashed,
    OutOfBounds,
    TimeLimit,
}

impl TerminationKind {
    pub fn label(self) -> &'static str {
        match self {
            TerminationKind::Running => "Running",
            TerminationKind::Landed => "Landed",
            TerminationKind::Crashed => "Crashed",
            TerminationKind::OutOfBounds => "OutOfBounds",
            TerminationKind::TimeLimit => "TimeLimit",
        }
    }
}

/// Result of a single `step`.
#[derive(Clone, Copy, Debug)]
pub struct StepOutcome {
    pub next_state: LanderState,
    pub reward: f64,
    pub terminated: bool,
    pub termination_kind: TerminationKind,
}

/// Full record of one episode.
#[derive(Clone, Debug)]
pub struct EpisodeTrace {
    /// Initial state plus one state per step: `states.len() == steps + 1`.
    pub states: Vec<LanderState>,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    /// Exact sequential sum of `rewards`.
    pub total_reward: f64,
    /// `total_reward >= success threshold`.
    pub success: bool,
    pub termination_kind: TerminationKind,
    /// Sum of engine cost magnitudes.
    pub fuel_used: f64,
    pub steps: usize,
}

impl EpisodeTrace {
    /// Line-delimited export: one step per line with 11 columns
    /// (`step x y vx vy angle w left_leg right_leg action reward`),
    /// then a trailer line carrying the termination marker.
    pub fn to_line_records(&self) -> String {
        let mut out = String::new();
        for (i, action) in self.actions.iter().enumerate() {
            let s = &self.states[i];
            out.push_str(&format!(
                "{} {} {} {} {} {} {} {} {} {} {}\n",
                i,
                s.x,
                s.y,
                s.vx,
                s.vy,
                s.angle,
                s.angular_velocity,
                s.left_leg_contact,
                s.right_leg_contact,
                action.index(),
                self.rewards[i],
            ));
        }
        out.push_str(&format!(
            "end termination={} success={} total_reward={} fuel_used={} steps={}\n",
            self.termination_kind.label(),
            self.success,
            self.total_reward,
            self.fuel_used,
            self.steps,
        ));
        out
    }
}
