//! Requirement files, environment configurations and traces shipped with the
//! crate.

pub const SAFE_DRIVING: &str = include_str!("../assets/specs/safe_driving.req");
pub const FOLLOW_LEADER: &str = include_str!("../assets/specs/follow_leader.req");
pub const LUNAR_LANDER: &str = include_str!("../assets/specs/lunar_lander.req");
pub const BIPEDAL_WALKER: &str = include_str!("../assets/specs/bipedal_walker.req");
pub const BIPEDAL_WALKER_HARDCORE: &str =
    include_str!("../assets/specs/bipedal_walker_hardcore.req");
pub const GRIDDRIVE: &str = include_str!("../assets/specs/griddrive.req");
pub const POINTMASS: &str = include_str!("../assets/specs/pointmass.req");

pub const GRID_CORNER: &str = include_str!("../assets/envs/corner.grid");
pub const GRID_STRAIGHT: &str = include_str!("../assets/envs/straight.grid");
pub const GRID_WIDE: &str = include_str!("../assets/envs/wide.grid");
pub const GRID_TRACK: &str = include_str!("../assets/envs/track.grid");
pub const POINTMASS_ENV: &str = include_str!("../assets/envs/pointmass.env");

pub const SAFE_DRIVING_CRASH_TRACE: &str =
    include_str!("../assets/traces/safe_driving_crash.jsonl");
pub const GRID_TRACE: &str = include_str!("../assets/traces/griddrive_corner.jsonl");

/// The five task files transcribed from published requirement tables, by name.
pub const CORPUS: [(&str, &str); 5] = [
    ("safe_driving", SAFE_DRIVING),
    ("follow_leader", FOLLOW_LEADER),
    ("lunar_lander", LUNAR_LANDER),
    ("bipedal_walker", BIPEDAL_WALKER),
    ("bipedal_walker_hardcore", BIPEDAL_WALKER_HARDCORE),
];

/// Gridworld layouts small enough for exact dynamic programming.
pub const SMALL_GRIDS: [(&str, &str); 3] = [
    ("corner", GRID_CORNER),
    ("straight", GRID_STRAIGHT),
    ("wide", GRID_WIDE),
];
