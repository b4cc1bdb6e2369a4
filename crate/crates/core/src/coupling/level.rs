use core::cmp::Ordering;
use core::fmt;

/// A multi-index: spatial level `l1` and temporal level `l2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LevelPair {
    pub l1: u32,
    pub l2: u32,
}

impl LevelPair {
    pub const fn new(l1: u32, l2: u32) -> Self {
        Self { l1, l2 }
    }

    pub const fn total(&self) -> u32 {
        self.l1 + self.l2
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.l2, self.l1)
    }

    /// One level coarser along `direction`, if that is not below zero.
    pub fn coarser(&self, direction: Direction) -> Option<Self> {
        match direction {
            Direction::Space => self.l1.checked_sub(1).map(|l1| Self::new(l1, self.l2)),
            Direction::Time => self.l2.checked_sub(1).map(|l2| Self::new(self.l1, l2)),
        }
    }

    pub fn finer(&self, direction: Direction) -> Self {
        match direction {
            Direction::Space => Self::new(self.l1 + 1, self.l2),
            Direction::Time => Self::new(self.l1, self.l2 + 1),
        }
    }

    /// Component-wise `<=`.
    pub fn le_componentwise(&self, other: &Self) -> bool {
        self.l1 <= other.l1 && self.l2 <= other.l2
    }
}

impl Ord for LevelPair {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.total(), self.l1).cmp(&(other.total(), other.l1))
    }
}

impl PartialOrd for LevelPair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LevelPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.l1, self.l2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Space,
    Time,
}

/// The quantity sampled at a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Increment {
    /// Mixed difference over both directions, degrading at the axes.
    Mixed(LevelPair),
    /// Difference along one direction only; the plain value at level zero of that direction.
    First(LevelPair, Direction),
    /// Single-index difference `L(l, l) - L(l-1, l-1)`.
    Diagonal(u32),
    /// The undifferenced loss.
    Plain(LevelPair),
}

/// One evaluated grid of an increment and the sign it enters with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corner {
    pub pair: LevelPair,
    pub positive: bool,
}

impl Increment {
    /// The finest level involved; it fixes the driving time resolution.
    pub fn finest(&self) -> LevelPair {
        match *self {
            Increment::Mixed(p) | Increment::First(p, _) | Increment::Plain(p) => p,
            Increment::Diagonal(l) => LevelPair::new(l, l),
        }
    }

    /// Corners in combination order: 1, 2 or 4 entries.
    pub fn corners(&self) -> ([Corner; 4], usize) {
        let plus = |pair| Corner { pair, positive: true };
        let minus = |pair| Corner { pair, positive: false };
        let mut out = [plus(self.finest()); 4];
        let len = match *self {
            Increment::Plain(_) => 1,
            Increment::Mixed(p) => match (p.coarser(Direction::Time), p.coarser(Direction::Space)) {
                (Some(t), Some(s)) => {
                    out[1] = minus(t);
                    out[2] = minus(s);
                    out[3] = plus(LevelPair::new(p.l1 - 1, p.l2 - 1));
                    4
                }
                (Some(c), None) | (None, Some(c)) => {
                    out[1] = minus(c);
                    2
                }
                (None, None) => 1,
            },
            Increment::First(p, dir) => match p.coarser(dir) {
                Some(c) => {
                    out[1] = minus(c);
                    2
                }
                None => 1,
            },
            Increment::Diagonal(l) => {
                if l == 0 {
                    1
                } else {
                    out[1] = minus(LevelPair::new(l - 1, l - 1));
                    2
                }
            }
        };
        (out, len)
    }

    /// Combines corner losses (in [`Increment::corners`] order) into the increment.
    pub fn combine(losses: &[f64]) -> f64 {
        match *losses {
            [a] => a,
            [a, b] => a - b,
            [a, b, c, d] => (a - b) - (c - d),
            _ => panic!("an increment has 1, 2 or 4 corners"),
        }
    }

    /// Stable 64-bit code used to key random streams.
    pub(crate) fn stream_code(&self) -> u64 {
        let (tag, a, b) = match *self {
            Increment::Mixed(p) => (1u64, p.l1, p.l2),
            Increment::First(p, Direction::Space) => (2, p.l1, p.l2),
            Increment::First(p, Direction::Time) => (3, p.l1, p.l2),
            Increment::Diagonal(l) => (4, l, l),
            Increment::Plain(p) => (5, p.l1, p.l2),
        };
        (tag << 56) | ((a as u64) << 28) | b as u64
    }
}
