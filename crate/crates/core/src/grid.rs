//! Block-grid geometry.
//!
//! Locations are integer blocks on a `width x height` grid. Distances are
//! Manhattan (rectilinear street grid) and travel times are the distance
//! divided by the vehicle speed, rounded up to whole time units.

use std::fmt;

use serde::{Deserialize, Serialize};

/// One block of the city grid, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridCoord {
    pub x: u32,
    pub y: u32,
}

impl GridCoord {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// Row-major position of this block on a grid of the given width.
    pub fn row_major(self, width: u32) -> usize {
        self.y as usize * width as usize + self.x as usize
    }

    pub fn from_row_major(index: usize, width: u32) -> Self {
        let w = width as usize;
        Self::new((index % w) as u32, (index / w) as u32)
    }

    /// Ordering key used for every deterministic tie-break: row first, then column.
    pub fn row_major_key(self) -> (u32, u32) {
        (self.y, self.x)
    }
}

impl fmt::Display for GridCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

pub fn manhattan_distance(a: GridCoord, b: GridCoord) -> u32 {
    a.x.abs_diff(b.x) + a.y.abs_diff(b.y)
}

/// Whole time units needed to cover the distance from `a` to `b` at `speed`
/// blocks per time unit.
pub fn travel_time(a: GridCoord, b: GridCoord, speed: u32) -> u32 {
    debug_assert!(speed >= 1, "speed must be at least one block per time unit");
    manhattan_distance(a, b).div_ceil(speed)
}

/// All blocks of a grid in row-major order.
pub fn blocks(width: u32, height: u32) -> impl Iterator<Item = GridCoord> {
    (0..height).flat_map(move |y| (0..width).map(move |x| GridCoord::new(x, y)))
}
