use crate::contacts::ContactSet;
use crate::trajectory::TrajectorySet;
use crate::workload::{gen_rwp, RwpParams};

/// Small, fairly dense random-waypoint instance.
pub fn rwp_set(seed: u64, n: u32, ticks: u32) -> TrajectorySet<f64> {
    let p = RwpParams {
        n_objects: n,
        width: 150.0,
        height: 150.0,
        mean_speed: 2.0,
        tick_seconds: 3.0,
        duration_ticks: ticks,
        d_t: 12.0,
        seed,
    };
    gen_rwp(&p).unwrap()
}

pub fn rwp_contacts(seed: u64, n: u32, ticks: u32) -> ContactSet {
    ContactSet::from_trajectories(&rwp_set(seed, n, ticks))
}
