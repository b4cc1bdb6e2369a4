use alloc::collections::BTreeMap;

use crate::coupling::LevelPair;
use crate::estimators::RateModel;

/// Modeled profit `E / sqrt(V W)` over the box `[0, caps]`.
pub fn profit_surface(model: &RateModel, caps: LevelPair) -> BTreeMap<LevelPair, f64> {
    (0..=caps.l1)
        .flat_map(|l1| (0..=caps.l2).map(move |l2| LevelPair::new(l1, l2)))
        .map(|p| (p, libm::exp2(model.log2_profit(p))))
        .collect()
}
