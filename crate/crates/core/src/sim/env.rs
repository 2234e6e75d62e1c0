//! State transitions and episode rollout.

use alloc::vec::Vec;

use super::{Action, EpisodeTrace, LanderState, SimConfig, StepOutcome, TerminationKind};
use crate::rng::DetRng;

/// Altitude above which an episode terminates as OutOfBounds, keeping the
/// reachable state space (and therefore episode totals) bounded.
pub const WORLD_CEILING: f64 = 2.5;

/// The caller passed a non-finite state into `step`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepError {
    NonFiniteState,
}

impl core::fmt::Display for StepError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StepError::NonFiniteState => write!(f, "non-finite state passed to step"),
        }
    }
}

/// Why `run_episode` aborted without producing a trace.
#[derive(Clone, Debug, PartialEq)]
pub enum EpisodeFailure<E> {
    /// The policy callback returned an error.
    Policy { step: usize, cause: E },
    /// The policy callback returned an integer outside {0,1,2,3}.
    InvalidAction { step: usize, value: i64 },
}

fn wrap_angle(a: f64) -> f64 {
    if a.abs() <= core::f64::consts::PI {
        return a;
    }
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut r = libm::fmod(a + core::f64::consts::PI, two_pi);
    if r < 0.0 {
        r += two_pi;
    }
    r - core::f64::consts::PI
}

/// Initial state for an episode. Identical seed, identical state.
pub fn reset(config: &SimConfig, seed: u64) -> LanderState {
    let mut rng = DetRng::new(seed);
    draw_initial(config, &mut rng)
}

/// Draw order is part of the determinism contract: x, y, vx, vy, angle, w.
fn draw_initial(config: &SimConfig, rng: &mut DetRng) -> LanderState {
    LanderState {
        x: rng.uniform(config.spawn_x_min, config.spawn_x_max),
        y: rng.uniform(config.spawn_y_min, config.spawn_y_max),
        vx: rng.uniform(config.spawn_vx_min, config.spawn_vx_max),
        vy: rng.uniform(config.spawn_vy_min, config.spawn_vy_max),
        angle: rng.uniform(config.spawn_angle_min, config.spawn_angle_max),
        angular_velocity: rng
            .uniform(config.spawn_angular_velocity_min, config.spawn_angular_velocity_max),
        left_leg_contact: 0.0,
        right_leg_contact: 0.0,
    }
}

fn leg_contacts(config: &SimConfig, on_ground: bool, angle: f64) -> (f64, f64) {
    if !on_ground {
        return (0.0, 0.0);
    }
    if angle > config.leg_contact_angle {
        (0.0, 1.0)
    } else if angle < -config.leg_contact_angle {
        (1.0, 0.0)
    } else {
        (1.0, 1.0)
    }
}

/// One fixed-timestep transition. Firing an engine consumes one or two draws
/// from `rng` (thrust dispersion); action 0 consumes none, so free fall is
/// exact: `vy' = vy - g*dt`.
pub fn step(
    config: &SimConfig,
    state: &LanderState,
    action: Action,
    rng: &mut DetRng,
) -> Result<StepOutcome, StepError> {
    if !state.is_finite() {
        return Err(StepError::NonFiniteState);
    }

    let dt = config.dt;
    let mut vx = state.vx;
    let mut vy = state.vy;
    let mut w = state.angular_velocity;
    let mut fuel_cost = 0.0;

    match action {
        Action::Nothing => {}
        Action::FireMain => {
            let thrust = config.main_engine_accel
                * (1.0 + rng.uniform(-config.engine_dispersion, config.engine_dispersion));
            vx += -libm::sin(state.angle) * thrust * dt;
            vy += libm::cos(state.angle) * thrust * dt;
            fuel_cost = config.main_engine_cost;
        }
        Action::FireLeft | Action::FireRight => {
            // Left engine pushes the lander right (+x) and torques it
            // counter-clockwise (+w); the right engine mirrors it.
            let dir = if action == Action::FireLeft { 1.0 } else { -1.0 };
            let jitter = 1.0 + rng.uniform(-config.engine_dispersion, config.engine_dispersion);
            vx += dir * config.side_engine_accel * jitter * dt;
            w += dir * config.side_engine_torque * jitter * dt;
            fuel_cost = config.side_engine_cost;
        }
    }
    vy -= config.gravity * dt;

    let x = state.x + vx * dt;
    let mut y = state.y + vy * dt;
    let angle = wrap_angle(state.angle + w * dt);

    let on_ground = y <= 0.0;
    if on_ground {
        y = 0.0;
    }
    let (left_leg, right_leg) = leg_contacts(config, on_ground, angle);

    let mut next = LanderState {
        x,
        y,
        vx,
        vy,
        angle,
        angular_velocity: w,
        left_leg_contact: left_leg,
        right_leg_contact: right_leg,
    };

    if !next.is_finite() {
        // Defensive: integration blew up. The episode ends as a crash
        // instead of propagating NaN to the policy.
        next = LanderState {
            x: 0.0,
            y: 0.0,
            vx: 0.0,
            vy: 0.0,
            angle: 0.0,
            angular_velocity: 0.0,
            left_leg_contact: 0.0,
            right_leg_contact: 0.0,
        };
        return Ok(StepOutcome {
            next_state: next,
            reward: -config.crashed_penalty,
            terminated: true,
            termination_kind: TerminationKind::Crashed,
        });
    }

    let termination_kind = if on_ground {
        let clean = left_leg == 1.0
            && right_leg == 1.0
            && vx.abs() <= config.landing_speed_limit
            && vy.abs() <= config.landing_speed_limit
            && angle.abs() <= config.landing_angle_limit;
        if clean { TerminationKind::Landed } else { TerminationKind::Crashed }
    } else if x.abs() > config.world_half_width || y > WORLD_CEILING {
        TerminationKind::OutOfBounds
    } else {
        TerminationKind::Running
    };

    let mut reward = config.potential(&next) - config.potential(state) - fuel_cost;
    match termination_kind {
        TerminationKind::Landed => reward += config.landed_bonus,
        TerminationKind::Crashed => reward -= config.crashed_penalty,
        _ => {}
    }

    Ok(StepOutcome {
        next_state: next,
        reward,
        terminated: termination_kind != TerminationKind::Running,
        termination_kind,
    })
}

/// Rolls one episode from `reset`-equivalent initial conditions.
///
/// The policy callback returns a raw action index; any callback error or
/// out-of-range index aborts the episode as an `EpisodeFailure` (the fitness
/// layer maps that to the minimum-fitness sentinel). A `max_steps` cap turns
/// a still-running episode into `TimeLimit`.
pub fn run_episode<E, F>(
    config: &SimConfig,
    mut policy: F,
    seed: u64,
    max_steps: usize,
) -> Result<EpisodeTrace, EpisodeFailure<E>>
where
    F: FnMut(&LanderState) -> Result<i64, E>,
{
    assert!(max_steps >= 1, "max_steps must be >= 1");
    let mut rng = DetRng::new(seed);
    let mut state = draw_initial(config, &mut rng);

    let mut states = Vec::with_capacity(64);
    let mut actions = Vec::with_capacity(64);
    let mut rewards = Vec::with_capacity(64);
    states.push(state);

    let mut total_reward = 0.0;
    let mut fuel_used = 0.0;
    let mut termination_kind = TerminationKind::Running;

    for step_index in 0..max_steps {
        let raw = policy(&state).map_err(|cause| EpisodeFailure::Policy { step: step_index, cause })?;
        let action = Action::from_index(raw)
            .map_err(|e| EpisodeFailure::InvalidAction { step: step_index, value: e.0 })?;

        let outcome = match step(config, &state, action, &mut rng) {
            Ok(o) => o,
            // Unreachable for states this loop produces; treated as a crash
            // so evolved programs can never kill the engine.
            Err(StepError::NonFiniteState) => StepOutcome {
                next_state: state,
                reward: -config.crashed_penalty,
                terminated: true,
                termination_kind: TerminationKind::Crashed,
            },
        };

        match action {
            Action::Nothing => {}
            Action::FireMain => fuel_used += config.main_engine_cost,
            Action::FireLeft | Action::FireRight => fuel_used += config.side_engine_cost,
        }

        state = outcome.next_state;
        states.push(state);
        actions.push(action);
        rewards.push(outcome.reward);
        total_reward += outcome.reward;

        if outcome.terminated {
            termination_kind = outcome.termination_kind;
            break;
        }
    }

    if termination_kind == TerminationKind::Running {
        termination_kind = TerminationKind::TimeLimit;
    }

    let steps = actions.len();
    Ok(EpisodeTrace {
        states,
        actions,
        rewards,
        total_reward,
        success: total_reward >= config.success_threshold,
        termination_kind,
        fuel_used,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SimConfig {
        SimConfig::default()
    }

    #[test]
    fn reset_is_deterministic() {
        let c = cfg();
        assert_eq!(reset(&c, 42), reset(&c, 42));
        assert_ne!(reset(&c, 42), reset(&c, 43));
    }

    #[test]
    fn reset_spawns_airborne_inside_band() {
        let c = cfg();
        for seed in 0..200 {
            let s = reset(&c, seed);
            assert!(s.y >= c.spawn_y_min && s.y <= c.spawn_y_max, "seed {seed}: y={}", s.y);
            assert_eq!(s.left_leg_contact, 0.0);
            assert_eq!(s.right_leg_contact, 0.0);
            assert!(s.is_finite());
        }
    }

    #[test]
    fn free_fall_is_exact() {
        let c = cfg();
        let s = reset(&c, 7);
        let mut rng = DetRng::new(99);
        let out = step(&c, &s, Action::Nothing, &mut rng).unwrap();
        assert_eq!(out.next_state.vy, s.vy - c.gravity * c.dt);
        assert_eq!(out.next_state.vx, s.vx);
    }

    #[test]
    fn free_fall_episode_crashes() {
        let c = cfg();
        let trace = run_episode::<(), _>(&c, |_| Ok(0), 0, 1000).unwrap();
        assert_eq!(trace.termination_kind, TerminationKind::Crashed);
        assert!(!trace.success);
        // Terminal step reward is the shaping delta minus the crash penalty.
        let shaping = c.potential(&trace.states[trace.steps]) - c.potential(&trace.states[trace.steps - 1]);
        assert_eq!(*trace.rewards.last().unwrap(), shaping - c.crashed_penalty);
    }

    #[test]
    fn trace_bookkeeping_holds() {
        let c = cfg();
        let trace = run_episode::<(), _>(&c, |s| Ok(if s.vy < -0.4 { 2 } else { 0 }), 5, 1000).unwrap();
        assert_eq!(trace.actions.len(), trace.rewards.len());
        assert_eq!(trace.states.len(), trace.actions.len() + 1);
        let sum: f64 = trace.rewards.iter().sum();
        assert_eq!(sum, trace.total_reward);
        assert_eq!(trace.steps, trace.actions.len());
    }

    #[test]
    fn identical_runs_produce_identical_traces() {
        let c = cfg();
        let p = |s: &LanderState| Ok::<i64, ()>(if s.vy < -0.5 { 2 } else { 0 });
        let a = run_episode(&c, p, 11, 1000).unwrap();
        let b = run_episode(&c, p, 11, 1000).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.rewards, b.rewards);
        assert_eq!(a.total_reward, b.total_reward);
    }

    #[test]
    fn landed_terminal_step_adds_exact_bonus() {
        let c = cfg();
        // Hovering just above the pad, descending gently and upright.
        let s = LanderState {
            x: 0.01,
            y: 0.003,
            vx: 0.0,
            vy: -0.2,
            angle: 0.0,
            angular_velocity: 0.0,
            left_leg_contact: 0.0,
            right_leg_contact: 0.0,
        };
        let mut rng = DetRng::new(1);
        let out = step(&c, &s, Action::Nothing, &mut rng).unwrap();
        assert_eq!(out.termination_kind, TerminationKind::Landed);
        let shaping = c.potential(&out.next_state) - c.potential(&s);
        assert_eq!(out.reward, shaping + c.landed_bonus);
        assert_eq!(out.next_state.left_leg_contact, 1.0);
        assert_eq!(out.next_state.right_leg_contact, 1.0);
    }

    #[test]
    fn hard_impact_is_a_crash_with_exact_penalty() {
        let c = cfg();
        let s = LanderState {
            x: 0.0,
            y: 0.01,
            vx: 0.0,
            vy: -1.5,
            angle: 0.0,
            angular_velocity: 0.0,
            left_leg_contact: 0.0,
            right_leg_contact: 0.0,
        };
        let mut rng = DetRng::new(1);
        let out = step(&c, &s, Action::Nothing, &mut rng).unwrap();
        assert_eq!(out.termination_kind, TerminationKind::Crashed);
        let shaping = c.potential(&out.next_state) - c.potential(&s);
        assert_eq!(out.reward, shaping - c.crashed_penalty);
    }

    #[test]
    fn tilted_touchdown_contacts_one_leg() {
        let c = cfg();
        let s = LanderState {
            x: 0.0,
            y: 0.001,
            vx: 0.0,
            vy: -0.1,
            angle: 0.5,
            angular_velocity: 0.0,
            left_leg_contact: 0.0,
            right_leg_contact: 0.0,
        };
        let mut rng = DetRng::new(1);
        let out = step(&c, &s, Action::Nothing, &mut rng).unwrap();
        assert_eq!(out.next_state.left_leg_contact, 0.0);
        assert_eq!(out.next_state.right_leg_contact, 1.0);
        assert_eq!(out.termination_kind, TerminationKind::Crashed);
    }

    #[test]
    fn drifting_out_of_bounds_terminates() {
        let c = cfg();
        let s = LanderState {
            x: 1.49,
            y: 1.0,
            vx: 2.0,
            vy: 0.0,
            angle: 0.0,
            angular_velocity: 0.0,
            left_leg_contact: 0.0,
            right_leg_contact: 0.0,
        };
        let mut rng = DetRng::new(1);
        let out = step(&c, &s, Action::Nothing, &mut rng).unwrap();
        assert_eq!(out.termination_kind, TerminationKind::OutOfBounds);
        assert!(out.terminated);
    }

    #[test]
    fn time_limit_reported_when_never_terminating() {
        let c = cfg();
        // Five free-fall steps from the spawn band cannot reach the ground.
        let trace = run_episode::<(), _>(&c, |_| Ok(0), 3, 5).unwrap();
        assert_eq!(trace.termination_kind, TerminationKind::TimeLimit);
        assert_eq!(trace.steps, 5);
        assert!(!trace.success);
    }

    #[test]
    fn ceiling_bounds_endless_climbs() {
        let c = cfg();
        let trace = run_episode::<(), _>(&c, |_| Ok(2), 3, 1000).unwrap();
        assert_eq!(trace.termination_kind, TerminationKind::OutOfBounds);
        assert!(trace.states[trace.steps].y > WORLD_CEILING);
    }

    #[test]
    fn invalid_action_aborts_episode() {
        let c = cfg();
        let err = run_episode::<(), _>(&c, |_| Ok(9), 0, 100).unwrap_err();
        assert_eq!(err, EpisodeFailure::InvalidAction { step: 0, value: 9 });
    }

    #[test]
    fn policy_error_aborts_episode() {
        let c = cfg();
        let err = run_episode(&c, |_| Err("boom"), 0, 100).unwrap_err();
        assert_eq!(err, EpisodeFailure::Policy { step: 0, cause: "boom" });
    }

    #[test]
    fn non_finite_input_rejected() {
        let c = cfg();
        let mut s = reset(&c, 0);
        s.vy = f64::NAN;
        let mut rng = DetRng::new(1);
        assert_eq!(step(&c, &s, Action::Nothing, &mut rng).unwrap_err(), StepError::NonFiniteState);
    }

    #[test]
    fn fuel_accumulates_per_engine_action() {
        let c = cfg();
        let trace = run_episode::<(), _>(&c, |_| Ok(2), 3, 50).unwrap();
        let mains = trace.actions.iter().filter(|a| **a == Action::FireMain).count();
        assert!((trace.fuel_used - mains as f64 * c.main_engine_cost).abs() < 1e-12);
        assert_eq!(mains, trace.steps);
    }

    #[test]
    fn angle_wraps_into_principal_range() {
        assert!((wrap_angle(3.0 * core::f64::consts::PI).abs() - core::f64::consts::PI).abs() < 1e-12);
        assert!(wrap_angle(-7.0).abs() <= core::f64::consts::PI);
        assert_eq!(wrap_angle(0.1), 0.1);
    }
}
