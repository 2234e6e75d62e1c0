//! All physics and reward constants in one flat record.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::LanderState;

/// Environment constants. Serializes to / from flat `key=value` pairs with a
/// `sim.` prefix so a run directory records the exact physics it used.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Integration timestep in seconds (50 Hz).
    pub dt: f64,
    /// Downward acceleration, state-units/s^2.
    pub gravity: f64,
    /// Main-engine acceleration along the body axis.
    pub main_engine_accel: f64,
    /// Side-engine lateral acceleration.
    pub side_engine_accel: f64,
    /// Side-engine angular acceleration, rad/s^2. One burst (`dt`) changes
    /// angular velocity by `side_engine_torque * dt`.
    pub side_engine_torque: f64,
    /// Relative thrust jitter per burn, drawn from the episode stream.
    pub engine_dispersion: f64,
    /// Reward cost per main-engine step.
    pub main_engine_cost: f64,
    /// Reward cost per side-engine step.
    pub side_engine_cost: f64,
    /// Shaping potential weights: phi(s) = -(dist_w*dist + speed_w*speed +
    /// angle_w*|angle|) + leg_w*(left+right).
    pub shaping_distance: f64,
    pub shaping_speed: f64,
    pub shaping_angle: f64,
    pub shaping_leg: f64,
    /// Touchdown tolerances for a clean landing.
    pub landing_speed_limit: f64,
    pub landing_angle_limit: f64,
    /// Tilt beyond which only one leg reaches the ground.
    pub leg_contact_angle: f64,
    /// |x| beyond this is out of bounds.
    pub world_half_width: f64,
    pub spawn_x_min: f64,
    pub spawn_x_max: f64,
    pub spawn_y_min: f64,
    pub spawn_y_max: f64,
    pub spawn_vx_min: f64,
    pub spawn_vx_max: f64,
    pub spawn_vy_min: f64,
    pub spawn_vy_max: f64,
    pub spawn_angle_min: f64,
    pub spawn_angle_max: f64,
    pub spawn_angular_velocity_min: f64,
    pub spawn_angular_velocity_max: f64,
    /// Terminal bonus on Landed.
    pub landed_bonus: f64,
    /// Terminal penalty magnitude on Crashed.
    pub crashed_penalty: f64,
    /// An episode is a success when total reward reaches this.
    pub success_threshold: f64,
    /// Episode step cap (TimeLimit).
    pub max_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.02,
            gravity: 1.0,
            main_engine_accel: 2.0,
            side_engine_accel: 0.2,
            side_engine_torque: 2.5,
            engine_dispersion: 0.02,
            main_engine_cost: 0.30,
            side_engine_cost: 0.03,
            shaping_distance: 100.0,
            shaping_speed: 100.0,
            shaping_angle: 100.0,
            shaping_leg: 10.0,
            landing_speed_limit: 0.25,
            landing_angle_limit: 0.15,
            leg_contact_angle: 0.35,
            world_half_width: 1.5,
            spawn_x_min: -0.03,
            spawn_x_max: 0.03,
            spawn_y_min: 1.2,
            spawn_y_max: 1.4,
            spawn_vx_min: -0.03,
            spawn_vx_max: 0.03,
            spawn_vy_min: -0.2,
            spawn_vy_max: 0.0,
            spawn_angle_min: -0.05,
            spawn_angle_max: 0.05,
            spawn_angular_velocity_min: -0.02,
            spawn_angular_velocity_max: 0.02,
            landed_bonus: 100.0,
            crashed_penalty: 100.0,
            success_threshold: 200.0,
            max_steps: 1000,
        }
    }
}

/// Unknown key or unparseable value when applying a `sim.*` override.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigKeyError {
    pub key: String,
    pub detail: String,
}

impl core::fmt::Display for ConfigKeyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "sim config key `{}`: {}", self.key, self.detail)
    }
}

macro_rules! sim_keys {
    ($($key:literal => $field:ident : $ty:ty),+ $(,)?) => {
        impl SimConfig {
            /// Flat key/value view, stable order, for config files.
            pub fn to_key_values(&self) -> Vec<(String, String)> {
                alloc::vec![
                    $(($key.to_string(), self.$field.to_string())),+
                ]
            }

            /// Applies one `key=value` override.
            pub fn set_key(&mut self, key: &str, value: &str) -> Result<(), ConfigKeyError> {
                match key {
                    $($key => {
                        self.$field = value.trim().parse::<$ty>().map_err(|_| ConfigKeyError {
                            key: key.to_string(),
                            detail: alloc::format!("cannot parse `{value}`"),
                        })?;
                        Ok(())
                    })+
                    _ => Err(ConfigKeyError {
                        key: key.to_string(),
                        detail: "unknown key".to_string(),
                    }),
                }
            }
        }
    };
}

sim_keys! {
    "sim.dt" => dt: f64,
    "sim.gravity" => gravity: f64,
    "sim.main_engine_accel" => main_engine_accel: f64,
    "sim.side_engine_accel" => side_engine_accel: f64,
    "sim.side_engine_torque" => side_engine_torque: f64,
    "sim.engine_dispersion" => engine_dispersion: f64,
    "sim.main_engine_cost" => main_engine_cost: f64,
    "sim.side_engine_cost" => side_engine_cost: f64,
    "sim.shaping_distance" => shaping_distance: f64,
    "sim.shaping_speed" => shaping_speed: f64,
    "sim.shaping_angle" => shaping_angle: f64,
    "sim.shaping_leg" => shaping_leg: f64,
    "sim.landing_speed_limit" => landing_speed_limit: f64,
    "sim.landing_angle_limit" => landing_angle_limit: f64,
    "sim.leg_contact_angle" => leg_contact_angle: f64,
    "sim.world_half_width" => world_half_width: f64,
    "sim.spawn_x_min" => spawn_x_min: f64,
    "sim.spawn_x_max" => spawn_x_max: f64,
    "sim.spawn_y_min" => spawn_y_min: f64,
    "sim.spawn_y_max" => spawn_y_max: f64,
    "sim.spawn_vx_min" => spawn_vx_min: f64,
    "sim.spawn_vx_max" => spawn_vx_max: f64,
    "sim.spawn_vy_min" => spawn_vy_min: f64,
    "sim.spawn_vy_max" => spawn_vy_max: f64,
    "sim.spawn_angle_min" => spawn_angle_min: f64,
    "sim.spawn_angle_max" => spawn_angle_max: f64,
    "sim.spawn_angular_velocity_min" => spawn_angular_velocity_min: f64,
    "sim.spawn_angular_velocity_max" => spawn_angular_velocity_max: f64,
    "sim.landed_bonus" => landed_bonus: f64,
    "sim.crashed_penalty" => crashed_penalty: f64,
    "sim.success_threshold" => success_threshold: f64,
    "sim.max_steps" => max_steps: usize,
}

impl SimConfig {
    /// Shaping potential phi(s). Per-step shaping reward is
    /// `phi(next) - phi(current)`, so episode totals telescope to
    /// `phi(terminal) - phi(initial)` plus terminal bonus minus fuel.
    pub fn potential(&self, s: &LanderState) -> f64 {
        let dist = libm::sqrt(s.x * s.x + s.y * s.y);
        let speed = libm::sqrt(s.vx * s.vx + s.vy * s.vy);
        -(self.shaping_distance * dist + self.shaping_speed * speed
            + self.shaping_angle * s.angle.abs())
            + self.shaping_leg * (s.left_leg_contact + s.right_leg_contact)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_round_trip() {
        let cfg = SimConfig { gravity: 1.25, max_steps: 750, ..SimConfig::default() };
        let mut rebuilt = SimConfig::default();
        for (k, v) in cfg.to_key_values() {
            rebuilt.set_key(&k, &v).unwrap();
        }
        assert_eq!(rebuilt, cfg);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut cfg = SimConfig::default();
        let err = cfg.set_key("sim.wind", "1.0").unwrap_err();
        assert_eq!(err.key, "sim.wind");
    }

    #[test]
    fn bad_value_rejected() {
        let mut cfg = SimConfig::default();
        assert!(cfg.set_key("sim.gravity", "strong").is_err());
    }
}
