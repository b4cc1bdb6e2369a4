use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::coupling::LevelPair;
use crate::error::{Error, Result};

/// Slack used when testing `delta . l <= l_star` so that exact boundary points are kept.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Half-plane `delta1 * l1 + delta2 * l2 <= l_star` with `delta1 + delta2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub delta1: f64,
    pub delta2: f64,
    pub l_star: f64,
}

impl Triangle {
    /// Normalises the profit weights `(w1, w2)`; their sum must be positive.
    pub fn from_weights(w1: f64, w2: f64, l_star: f64) -> Result<Self> {
        let sum = w1 + w2;
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::InvalidArgument("profit weights must have a positive sum"));
        }
        Ok(Self { delta1: w1 / sum, delta2: w2 / sum, l_star })
    }

    pub fn level(&self, pair: LevelPair) -> f64 {
        self.delta1 * pair.l1 as f64 + self.delta2 * pair.l2 as f64
    }

    pub fn admits(&self, pair: LevelPair) -> bool {
        self.level(pair) <= self.l_star + BOUNDARY_SLACK
    }
}

/// How an index set was built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexShape {
    Triangular(Triangle),
    /// `lower` governs `l1 <= l2`, `upper` governs `l1 > l2`.
    Union {
        lower: Triangle,
        upper: Triangle,
    },
    Rectangle,
    /// Diagonal levels `(l, l)` of a single-index hierarchy.
    Diagonal,
}

/// A finite set of levels, always containing `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    members: BTreeSet<LevelPair>,
    pub shape: IndexShape,
    pub caps: LevelPair,
}

fn within(pair: LevelPair, caps: LevelPair) -> bool {
    pair.le_componentwise(&caps)
}

fn box_pairs(caps: LevelPair) -> impl Iterator<Item = LevelPair> {
    (0..=caps.l1).flat_map(move |l1| (0..=caps.l2).map(move |l2| LevelPair::new(l1, l2)))
}

impl IndexSet {
    pub fn members(&self) -> impl Iterator<Item = LevelPair> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, pair: LevelPair) -> bool {
        self.members.contains(&pair)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Every member's component-wise predecessors are members too.
    pub fn is_downward_closed(&self) -> bool {
        self.members.iter().all(|p| {
            (p.l1 == 0 || self.contains(LevelPair::new(p.l1 - 1, p.l2)))
                && (p.l2 == 0 || self.contains(LevelPair::new(p.l1, p.l2 - 1)))
        })
    }

    /// Non-members one step outside the set in either direction.
    pub fn margin(&self) -> Vec<LevelPair> {
        let mut out = BTreeSet::new();
        for p in &self.members {
            for q in [LevelPair::new(p.l1 + 1, p.l2), LevelPair::new(p.l1, p.l2 + 1)] {
                if !self.contains(q) {
                    out.insert(q);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Pairs inside the caps box that are not members.
    pub fn excluded(&self) -> impl Iterator<Item = LevelPair> + '_ {
        box_pairs(self.caps).filter(|p| !self.contains(*p))
    }

    pub fn rectangle(caps: LevelPair) -> Self {
        Self { members: box_pairs(caps).collect(), shape: IndexShape::Rectangle, caps }
    }

    pub fn diagonal(max_level: u32) -> Self {
        Self {
            members: (0..=max_level).map(|l| LevelPair::new(l, l)).collect(),
            shape: IndexShape::Diagonal,
            caps: LevelPair::new(max_level, max_level),
        }
    }

    fn with_closure(members: BTreeSet<LevelPair>, shape: IndexShape, caps: LevelPair) -> Self {
        // Highest l2 per column, then a running maximum from the right.
        let width = members.iter().map(|p| p.l1).max().unwrap_or(0) as usize + 1;
        let mut tops = alloc::vec![0u32; width];
        for p in &members {
            tops[p.l1 as usize] = tops[p.l1 as usize].max(p.l2);
        }
        for i in (0..width - 1).rev() {
            tops[i] = tops[i].max(tops[i + 1]);
        }
        let members = tops
            .iter()
            .enumerate()
            .flat_map(|(l1, &top)| (0..=top).map(move |l2| LevelPair::new(l1 as u32, l2)))
            .collect();
        Self { members, shape, caps }
    }
}

/// `{ l : delta . l <= l_star } ∩ [0, caps]` for positive profit weights.
pub fn build_triangular_index_set(w1: f64, w2: f64, l_star: f64, caps: LevelPair) -> Result<IndexSet> {
    if !(w1 > 0.0 && w2 > 0.0) {
        return Err(Error::InvalidArgument("triangular index sets need positive weights"));
    }
    let tri = Triangle::from_weights(w1, w2, l_star)?;
    let members = box_pairs(caps).filter(|p| tri.admits(*p)).collect();
    Ok(IndexSet::with_closure(members, IndexShape::Triangular(tri), caps))
}

/// Union of one triangle on `l1 <= l2` and another on `l1 > l2`, closed downwards, within the caps.
pub fn build_union_index_set(lower: Triangle, upper: Triangle, caps: LevelPair) -> IndexSet {
    let members = box_pairs(caps).filter(|p| if p.l1 <= p.l2 { lower.admits(*p) } else { upper.admits(*p) }).collect();
    let mut set = IndexSet::with_closure(members, IndexShape::Union { lower, upper }, caps);
    set.members.retain(|p| within(*p, caps));
    set
}
