//! Planar point mass steered by bounded accelerations, with an obstacle disk
//! between the start and a goal disk.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Action, EnvConfig, EnvError, Environment};
use crate::trace::StateSample;

const POS_LIMIT: f64 = 1.2;
const VEL_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PointMassConfig {
    pub dt: f64,
    pub horizon: usize,
    pub start: (f64, f64),
    /// Half-width of the uniform offset added to the start `x`.
    pub start_jitter: f64,
    pub goal: (f64, f64),
    pub goal_radius: f64,
    pub obstacle: (f64, f64),
    pub obstacle_radius: f64,
}

impl Default for PointMassConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            horizon: 200,
            start: (0.0, -0.8),
            start_jitter: 0.1,
            goal: (0.0, 0.8),
            goal_radius: 0.15,
            obstacle: (0.0, 0.0),
            obstacle_radius: 0.25,
        }
    }
}

impl PointMassConfig {
    pub fn from_config(cfg: &EnvConfig) -> Result<Self, EnvError> {
        cfg.check_keys(&[
            "dt",
            "horizon",
            "start_x",
            "start_y",
            "start_jitter",
            "goal_x",
            "goal_y",
            "goal_radius",
            "obstacle_x",
            "obstacle_y",
            "obstacle_radius",
        ])?;
        if cfg.layout().is_some() {
            return Err(EnvError::Layout("the point mass takes no layout".into()));
        }
        let d = Self::default();
        let c = Self {
            dt: cfg.get_or("dt", d.dt)?,
            horizon: cfg.get_or("horizon", d.horizon)?,
            start: (cfg.get_or("start_x", d.start.0)?, cfg.get_or("start_y", d.start.1)?),
            start_jitter: cfg.get_or("start_jitter", d.start_jitter)?,
            goal: (cfg.get_or("goal_x", d.goal.0)?, cfg.get_or("goal_y", d.goal.1)?),
            goal_radius: cfg.get_or("goal_radius", d.goal_radius)?,
            obstacle: (
                cfg.get_or("obstacle_x", d.obstacle.0)?,
                cfg.get_or("obstacle_y", d.obstacle.1)?,
            ),
            obstacle_radius: cfg.get_or("obstacle_radius", d.obstacle_radius)?,
        };
        if !(c.dt > 0.0) || c.horizon == 0 {
            return Err(EnvError::Layout("dt and horizon must be positive".into()));
        }
        Ok(c)
    }
}

#[derive(Debug, Clone)]
pub struct PointMassEnv {
    config: PointMassConfig,
    /// x, y, vx, vy
    state: Option<[f64; 4]>,
}

impl PointMassEnv {
    pub fn new(config: PointMassConfig) -> Self {
        Self {
            config,
            state: None,
        }
    }

    pub fn config(&self) -> &PointMassConfig {
        &self.config
    }

    fn sample(&self, s: [f64; 4]) -> StateSample {
        let c = &self.config;
        let dist = |(px, py): (f64, f64)| ((s[0] - px).powi(2) + (s[1] - py).powi(2)).sqrt();
        StateSample::from_pairs([
            ("x", s[0]),
            ("y", s[1]),
            ("vx", s[2]),
            ("vy", s[3]),
            ("d_goal", dist(c.goal)),
            ("d_obstacle", dist(c.obstacle) - c.obstacle_radius),
        ])
    }
}

impl Environment for PointMassEnv {
    fn name(&self) -> &str {
        "pointmass"
    }

    fn reset(&mut self, seed: u64) -> StateSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = &self.config;
        let jitter = if c.start_jitter > 0.0 {
            rng.gen_range(-c.start_jitter..=c.start_jitter)
        } else {
            0.0
        };
        let s = [
            (c.start.0 + jitter).clamp(-POS_LIMIT, POS_LIMIT),
            c.start.1.clamp(-POS_LIMIT, POS_LIMIT),
            0.0,
            0.0,
        ];
        self.state = Some(s);
        self.sample(s)
    }

    /// Semi-implicit Euler step with accelerations clamped to `[-1, 1]`.
    fn step(&mut self, action: &Action) -> Result<StateSample, EnvError> {
        let Action::Continuous(u) = action else {
            return Err(EnvError::InvalidAction(
                "point mass takes a continuous 2-vector".into(),
            ));
        };
        if u.len() != 2 || u.iter().any(|x| !x.is_finite()) {
            return Err(EnvError::InvalidAction(format!(
                "expected two finite accelerations, got {u:?}"
            )));
        }
        let [x, y, vx, vy] = self.state.ok_or(EnvError::NotReset)?;
        let dt = self.config.dt;
        let vx = (vx + u[0].clamp(-1.0, 1.0) * dt).clamp(-VEL_LIMIT, VEL_LIMIT);
        let vy = (vy + u[1].clamp(-1.0, 1.0) * dt).clamp(-VEL_LIMIT, VEL_LIMIT);
        let s = [
            (x + vx * dt).clamp(-POS_LIMIT, POS_LIMIT),
            (y + vy * dt).clamp(-POS_LIMIT, POS_LIMIT),
            vx,
            vy,
        ];
        self.state = Some(s);
        Ok(self.sample(s))
    }

    fn horizon(&self) -> usize {
        self.config.horizon
    }

    fn random_action(&self, rng: &mut dyn RngCore) -> Action {
        Action::Continuous(vec![rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_action_at_rest_is_a_fixed_point() {
        let mut env = PointMassEnv::new(PointMassConfig::default());
        let s0 = env.reset(5);
        let s1 = env.step(&Action::Continuous(vec![0.0, 0.0])).unwrap();
        assert_eq!(s0, s1);
    }

    #[test]
    fn reset_is_deterministic_and_jittered() {
        let mut env = PointMassEnv::new(PointMassConfig::default());
        assert_eq!(env.reset(1), env.reset(1));
        let xs: Vec<f64> = (0..20).map(|s| env.reset(s).get("x").unwrap()).collect();
        assert!(xs.iter().all(|x| x.abs() <= 0.1));
        assert!(xs.iter().any(|&x| x != xs[0]));
    }

    #[test]
    fn rejects_discrete_and_malformed_actions() {
        let mut env = PointMassEnv::new(PointMassConfig::default());
        env.reset(0);
        assert!(env.step(&Action::Discrete(0)).is_err());
        assert!(env.step(&Action::Continuous(vec![0.0])).is_err());
        assert!(env.step(&Action::Continuous(vec![f64::NAN, 0.0])).is_err());
    }
}
