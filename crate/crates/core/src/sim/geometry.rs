use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{PfaxError, Result};

pub type Point = Vector2<f64>;

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let finite = [x0, y0, x1, y1].iter().all(|v| v.is_finite());
        if !finite || x1 <= x0 || y1 <= y0 {
            return Err(PfaxError::Config(format!(
                "rectangle [{x0}, {x1}] x [{y0}, {y1}] is empty or not finite"
            )));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    /// Closed-set membership.
    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// Bottom, right, top, left.
    pub fn edges(&self) -> [Segment; 4] {
        let c = [
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x1, self.y1),
            Point::new(self.x0, self.y1),
        ];
        [
            Segment::new(c[0], c[1]),
            Segment::new(c[1], c[2]),
            Segment::new(c[2], c[3]),
            Segment::new(c[3], c[0]),
        ]
    }

    /// Whether the closed segment `a -> b` touches the closed rectangle
    /// (Liang-Barsky clipping).
    pub fn intersects_segment(&self, a: &Point, b: &Point) -> bool {
        let d = b - a;
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        for (p, q) in [
            (-d.x, a.x - self.x0),
            (d.x, self.x1 - a.x),
            (-d.y, a.y - self.y0),
            (d.y, self.y1 - a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let t = q / p;
                if p < 0.0 {
                    lo = lo.max(t);
                } else {
                    hi = hi.min(t);
                }
                if lo > hi {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    /// Distance along the ray `origin + t dir` to this segment, if hit at
    /// `t > 0`.
    pub fn ray_hit(&self, origin: &Point, dir: &Point) -> Option<f64> {
        let e = self.b - self.a;
        let denom = dir.perp(&e);
        if denom.abs() < 1e-15 {
            return None;
        }
        let w = self.a - origin;
        let t = w.perp(&e) / denom;
        let s = w.perp(dir) / denom;
        (t > 1e-12 && (0.0..=1.0).contains(&s)).then_some(t)
    }
}

/// Table `[0, width] x [0, height]` with an optional obstacle strictly
/// inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub width: f64,
    pub height: f64,
    pub obstacle: Option<Rect>,
}

impl Environment {
    pub fn new(width: f64, height: f64, obstacle: Option<Rect>) -> Result<Self> {
        let table = Rect::new(0.0, 0.0, width, height)?;
        if let Some(o) = obstacle {
            if !(o.x0 > table.x0 && o.y0 > table.y0 && o.x1 < table.x1 && o.y1 < table.y1) {
                return Err(PfaxError::Config(format!(
                    "obstacle {o:?} must lie strictly inside the {width} x {height} table"
                )));
            }
        }
        Ok(Self { width, height, obstacle })
    }

    pub fn unit_square() -> Self {
        Self {
            width: 1.0,
            height: 1.0,
            obstacle: None,
        }
    }

    /// Unit square with the centred default block.
    pub fn unit_square_with_obstacle() -> Self {
        Self {
            width: 1.0,
            height: 1.0,
            obstacle: Some(Rect {
                x0: 0.4,
                y0: 0.35,
                x1: 0.6,
                y1: 0.65,
            }),
        }
    }

    pub fn table(&self) -> Rect {
        Rect {
            x0: 0.0,
            y0: 0.0,
            x1: self.width,
            y1: self.height,
        }
    }

    /// Table edges followed by obstacle edges, each bottom, right, top,
    /// left.
    pub fn walls(&self) -> Vec<Segment> {
        let mut walls = self.table().edges().to_vec();
        if let Some(o) = &self.obstacle {
            walls.extend(o.edges());
        }
        walls
    }

    pub fn on_table(&self, p: &Point) -> bool {
        self.table().contains(p)
    }

    pub fn in_obstacle(&self, p: &Point) -> bool {
        self.obstacle.is_some_and(|o| o.contains(p))
    }

    pub fn is_free(&self, p: &Point) -> bool {
        self.on_table(p) && !self.in_obstacle(p)
    }

    /// Whether moving in a straight line from `a` to `b` would touch the
    /// obstacle.
    pub fn move_hits_obstacle(&self, a: &Point, b: &Point) -> bool {
        self.obstacle.is_some_and(|o| o.intersects_segment(a, b))
    }

    pub fn shorter_side(&self) -> f64 {
        self.width.min(self.height)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_counts() {
        assert_eq!(Environment::unit_square().walls().len(), 4);
        assert_eq!(Environment::unit_square_with_obstacle().walls().len(), 8);
    }

    #[test]
    fn obstacle_must_be_strictly_inside() {
        let touching = Rect::new(0.0, 0.2, 0.5, 0.5).unwrap();
        assert!(Environment::new(1.0, 1.0, Some(touching)).is_err());
        assert!(Rect::new(0.5, 0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn segment_rectangle_crossing() {
        let env = Environment::unit_square_with_obstacle();
        let a = Point::new(0.3, 0.5);
        assert!(env.move_hits_obstacle(&a, &Point::new(0.7, 0.5)));
        assert!(env.move_hits_obstacle(&a, &Point::new(0.4, 0.5)));
        assert!(!env.move_hits_obstacle(&a, &Point::new(0.39, 0.5)));
        // passes diagonally just below the corner
        assert!(!env.move_hits_obstacle(&Point::new(0.35, 0.3), &Point::new(0.45, 0.34)));
        // vertical move through the block
        assert!(env.move_hits_obstacle(&Point::new(0.5, 0.2), &Point::new(0.5, 0.8)));
    }

    #[test]
    fn ray_hits() {
        let s = Segment::new(Point::new(1.0, -1.0), Point::new(1.0, 1.0));
        let o = Point::new(0.0, 0.0);
        assert_eq!(s.ray_hit(&o, &Point::new(1.0, 0.0)), Some(1.0));
        assert_eq!(s.ray_hit(&o, &Point::new(-1.0, 0.0)), None);
        assert_eq!(s.ray_hit(&o, &Point::new(0.0, 1.0)), None);
        let t = s.ray_hit(&o, &Point::new(1.0, 1.0).normalize()).unwrap();
        assert!((t - 2f64.sqrt()).abs() < 1e-12);
    }
}
