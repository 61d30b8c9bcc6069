//! The four-object, four-tick contact network used throughout the docs and
//! tests.
//!
//! With `d_T = 1` in a 10 x 10 environment it yields exactly four contacts:
//! `{o1,o2}[0,0]`, `{o2,o4}[1,1]`, `{o3,o4}[1,2]` and `{o1,o2}[2,3]`.
//! Object `oN` has id `N - 1`.

use crate::model::{Config, EnvironmentBounds, ObjectId, Point, TimeInterval};
use crate::trajectory::TrajectorySet;

pub const O1: ObjectId = ObjectId(0);
pub const O2: ObjectId = ObjectId(1);
pub const O3: ObjectId = ObjectId(2);
pub const O4: ObjectId = ObjectId(3);

const POSITIONS: [[(f64, f64); 4]; 4] = [
    [(0.0, 0.0), (0.5, 0.0), (5.0, 5.0), (7.0, 7.0)],
    [(0.0, 3.0), (4.2, 5.0), (5.8, 5.0), (5.0, 5.0)],
    [(0.0, 3.0), (0.5, 3.0), (5.8, 5.0), (5.0, 5.0)],
    [(0.0, 3.0), (0.5, 3.0), (9.0, 9.0), (5.0, 5.0)],
];

pub fn figure_one() -> TrajectorySet<f64> {
    let config = Config::new(1.0, EnvironmentBounds::new(10.0, 10.0), TimeInterval::horizon(4));
    let positions = POSITIONS.iter().flatten().map(|&(x, y)| Point::new(x, y)).collect();
    TrajectorySet::from_tick_major(config, 4, positions).expect("fixture is well formed")
}
