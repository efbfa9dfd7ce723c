//! Finite cut-point encoding of a one-dimensional expansion tree.
//!
//! Every endpoint appearing at any step up to the tree depth cuts the real
//! line into elementary open cells. A stretched interval is encoded as the
//! finite space of the cells it contains, with all unions of cells open.
//! Because the same cell objects are shared across levels, the inclusion
//! relations between levels survive the encoding, and embeddings reduce to
//! identity on shared cell names.

use std::collections::BTreeMap;

use crate::index_algebra;
use crate::stretching::ExpansionTree;
use crate::{Error, Result};

use super::{FamilyPresentation, FiniteSpace};

const CELL_CAP: usize = 20;

/// Encodes the tree's interval family as a level-indexed family presentation.
pub fn interval_tree_encoding(tree: &ExpansionTree) -> Result<FamilyPresentation> {
    if tree.base().dim() != 1 {
        return Err(Error::domain("cut-point encoding requires a one-dimensional tree".to_string()));
    }
    if tree.depth() < 1 {
        return Err(Error::domain("cut-point encoding requires depth >= 1".to_string()));
    }

    // Endpoint sums are computed identically for equal index sets, so exact
    // float comparison dedups them correctly.
    let mut cuts: Vec<f64> = Vec::new();
    for (_, node) in tree.nodes() {
        let side = node.sides()[0];
        cuts.push(side.lo());
        cuts.push(side.hi());
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let cells: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
    let cell_name = |c: &(f64, f64)| format!("]{},{}[", c.0, c.1);

    let mut levels: Vec<BTreeMap<String, FiniteSpace>> = Vec::new();
    for n in 0..=tree.depth() {
        let mut level = BTreeMap::new();
        for (j, node) in tree.level(n) {
            let side = node.sides()[0];
            let members: Vec<String> = cells
                .iter()
                .filter(|(lo, hi)| side.lo() <= *lo && *hi <= side.hi())
                .map(|c| cell_name(c))
                .collect();
            if members.len() > CELL_CAP {
                return Err(Error::SizeLimit {
                    what: "cut-point cell encoding",
                    requested: members.len() as u128,
                    cap: CELL_CAP as u128,
                });
            }
            level.insert(j.to_string(), FiniteSpace::discrete(members)?);
        }
        levels.push(level);
    }

    let mut parent_maps = Vec::new();
    for n in 1..=tree.depth() {
        let mut pm = BTreeMap::new();
        for (j, _) in tree.level(n) {
            pm.insert(j.to_string(), index_algebra::parent(j)?.to_string());
        }
        parent_maps.push(pm);
    }

    let pres = FamilyPresentation {
        levels,
        parent_maps,
        embeddings: Vec::new(),
    };
    pres.validate()?;
    Ok(pres)
}
