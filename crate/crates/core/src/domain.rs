use serde::Serialize;

/// Open region of the (x, y)-plane: a rectangle, optionally intersected with
/// the disk `x² + y² < max_radius²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Domain {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub max_radius: Option<f64>,
}

impl Domain {
    pub const fn rect(x: (f64, f64), y: (f64, f64)) -> Self {
        Self {
            x,
            y,
            max_radius: None,
        }
    }

    pub const fn square(half: f64) -> Self {
        Self::rect((-half, half), (-half, half))
    }

    pub fn disk(radius: f64) -> Self {
        Self {
            x: (-radius, radius),
            y: (-radius, radius),
            max_radius: Some(radius),
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.max_radius = Some(self.max_radius.map_or(radius, |r| r.min(radius)));
        self
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let in_rect = self.x.0 < x && x < self.x.1 && self.y.0 < y && y < self.y.1;
        in_rect && self.max_radius.is_none_or(|r| x * x + y * y < r * r)
    }

    /// Scale the region by `factor` about the center of its rectangle (the
    /// disk, if any, about the origin).
    pub fn shrunk(&self, factor: f64) -> Self {
        let scale = |(lo, hi): (f64, f64)| {
            let c = 0.5 * (lo + hi);
            let h = 0.5 * (hi - lo) * factor;
            (c - h, c + h)
        };
        Self {
            x: scale(self.x),
            y: scale(self.y),
            max_radius: self.max_radius.map(|r| r * factor),
        }
    }

    /// Axis-aligned box fully inside the region, used to lay out grids.
    pub fn grid_box(&self) -> ((f64, f64), (f64, f64)) {
        let (mut x, mut y) = (self.x, self.y);
        if let Some(r) = self.max_radius {
            let h = r / std::f64::consts::SQRT_2;
            x = (x.0.max(-h), x.1.min(h));
            y = (y.0.max(-h), y.1.min(h));
        }
        (x, y)
    }

    /// Intersect the rectangle with `[-half, half]²`.
    pub fn clipped(&self, half: f64) -> Self {
        Self {
            x: (self.x.0.max(-half), self.x.1.min(half)),
            y: (self.y.0.max(-half), self.y.1.min(half)),
            max_radius: self.max_radius,
        }
    }

    /// `n × n` grid (row-major in y then x) spanning [`grid_box`](Self::grid_box).
    pub fn grid(&self, n: usize) -> Vec<[f64; 2]> {
        let ((x0, x1), (y0, y1)) = self.grid_box();
        let pts = |lo: f64, hi: f64| -> Vec<f64> {
            if n == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..n)
                    .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                    .collect()
            }
        };
        let xs = pts(x0, x1);
        let ys = pts(y0, y1);
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| [x, y]))
            .collect()
    }

    /// Default verification grid: 90% of the region, clipped to a window
    /// around the origin so unbounded domains still give local samples.
    pub fn verification_grid(&self, n: usize, window: f64) -> Vec<[f64; 2]> {
        self.shrunk(0.9).clipped(window).grid(n)
    }
}

/// `n` equally spaced unit directions, starting at angle `offset`.
pub fn fiber_directions(n: usize, offset: f64) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let t = offset + std::f64::consts::TAU * i as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_grid_stays_inside() {
        let d = Domain::disk(1.0);
        for [x, y] in d.verification_grid(5, 10.0) {
            assert!(d.contains(x, y));
        }
    }

    #[test]
    fn shrunk_rectangle_about_center() {
        let d = Domain::rect((0.0, 2.0), (-1.0, 1.0)).shrunk(0.5);
        assert_eq!(d.x, (0.5, 1.5));
        assert_eq!(d.y, (-0.5, 0.5));
    }

    #[test]
    fn grid_counts_and_corners() {
        let g = Domain::square(1.0).grid(3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], [-1.0, -1.0]);
        assert_eq!(g[8], [1.0, 1.0]);
    }
}
