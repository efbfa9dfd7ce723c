//! Exhaustive finite-topology engine.
//!
//! Topologies are stored extensionally: a space is a finite point list plus
//! the explicit family of its open sets, encoded as bitmasks over point
//! indices. Everything the verification checks quantify over — opens,
//! bijections, coproduct components — is enumerated, so exhaustiveness is
//! the oracle.

mod encoding;
mod random;

pub use encoding::interval_tree_encoding;
pub use random::random_presentation;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, DEFAULT_COPRODUCT_CAP};

/// Hard limit from the bitmask encoding.
const MAX_POINTS: usize = 64;

/// Point count above which the exhaustive homeomorphism search refuses to run.
pub const HOMEOMORPHISM_POINT_CAP: usize = 7;

/// A finite point set together with an explicit family of subsets. The
/// family is not required to be a topology at construction; `is_topology`
/// decides that and produces a counterexample when it is not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    points: Vec<String>,
    opens: BTreeSet<u64>,
}

impl FiniteSpace {
    pub fn new(points: Vec<String>, opens: Vec<BTreeSet<String>>) -> Result<Self> {
        if points.len() > MAX_POINTS {
            return Err(Error::SizeLimit {
                what: "encoding a finite space",
                requested: points.len() as u128,
                cap: MAX_POINTS as u128,
            });
        }
        let index: BTreeMap<&str, usize> = points.iter().map(|p| p.as_str()).zip(0..).collect();
        if index.len() != points.len() {
            return Err(Error::invalid("finite space", "point names must be distinct"));
        }
        let mut masks = BTreeSet::new();
        for open in opens {
            let mut mask = 0u64;
            for p in &open {
                let Some(&i) = index.get(p.as_str()) else {
                    return Err(Error::invalid("finite space", format!("open set mentions unknown point {p:?}")));
                };
                mask |= 1 << i;
            }
            masks.insert(mask);
        }
        Ok(FiniteSpace { points, opens: masks })
    }

    /// Space with the given points and all subsets open.
    pub fn discrete(points: Vec<String>) -> Result<Self> {
        if points.len() > 20 {
            return Err(Error::SizeLimit {
                what: "materializing a discrete topology",
                requested: 1u128 << points.len(),
                cap: 1 << 20,
            });
        }
        let opens = (0u64..1 << points.len()).collect();
        let space = FiniteSpace::new(points, vec![])?;
        Ok(FiniteSpace { opens, ..space })
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn opens_masks(&self) -> &BTreeSet<u64> {
        &self.opens
    }

    pub fn open_count(&self) -> usize {
        self.opens.len()
    }

    pub fn full_mask(&self) -> u64 {
        if self.points.is_empty() {
            0
        } else {
            u64::MAX >> (64 - self.points.len())
        }
    }

    pub fn point_index(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p == name)
    }

    pub fn mask_of(&self, names: &BTreeSet<String>) -> Result<u64> {
        let mut mask = 0u64;
        for n in names {
            let i = self
                .point_index(n)
                .ok_or_else(|| Error::invalid("subset", format!("unknown point {n:?}")))?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    pub fn names_of(&self, mask: u64) -> BTreeSet<String> {
        self.points
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| p.clone())
            .collect()
    }

    pub fn is_open(&self, mask: u64) -> bool {
        self.opens.contains(&mask)
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    points: Vec<String>,
    opens: Vec<Vec<String>>,
}

impl Serialize for FiniteSpace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceRepr {
            points: self.points.clone(),
            opens: self.opens.iter().map(|&m| self.names_of(m).into_iter().collect()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FiniteSpace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SpaceRepr::deserialize(deserializer)?;
        FiniteSpace::new(repr.points, repr.opens.into_iter().map(|o| o.into_iter().collect()).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Why a candidate family fails to be a topology.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TopologyViolation {
    MissingEmpty,
    MissingFull,
    UnionNotOpen { a: BTreeSet<String>, b: BTreeSet<String> },
    IntersectionNotOpen { a: BTreeSet<String>, b: BTreeSet<String> },
}

impl fmt::Display for TopologyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyViolation::MissingEmpty => write!(f, "empty set is not open"),
            TopologyViolation::MissingFull => write!(f, "full point set is not open"),
            TopologyViolation::UnionNotOpen { a, b } => write!(f, "union of {a:?} and {b:?} is not open"),
            TopologyViolation::IntersectionNotOpen { a, b } => {
                write!(f, "intersection of {a:?} and {b:?} is not open")
            }
        }
    }
}

/// Decides whether the candidate family is a topology; in the finite case
/// closure under pairwise union and intersection suffices.
pub fn is_topology(candidate: &FiniteSpace) -> std::result::Result<(), TopologyViolation> {
    if !candidate.is_open(0) {
        return Err(TopologyViolation::MissingEmpty);
    }
    if !candidate.is_open(candidate.full_mask()) {
        return Err(TopologyViolation::MissingFull);
    }
    let opens: Vec<u64> = candidate.opens.iter().copied().collect();
    for (i, &a) in opens.iter().enumerate() {
        for &b in &opens[i + 1..] {
            if !candidate.is_open(a | b) {
                return Err(TopologyViolation::UnionNotOpen {
                    a: candidate.names_of(a),
                    b: candidate.names_of(b),
                });
            }
            if !candidate.is_open(a & b) {
                return Err(TopologyViolation::IntersectionNotOpen {
                    a: candidate.names_of(a),
                    b: candidate.names_of(b),
                });
            }
        }
    }
    Ok(())
}

/// Restricts the space to a subset of its points; opens become traces.
pub fn subspace(space: &FiniteSpace, subset: &BTreeSet<String>) -> Result<FiniteSpace> {
    let sub_mask = space.mask_of(subset)?;
    let points: Vec<String> = space.points.iter().filter(|p| subset.contains(*p)).cloned().collect();
    // Re-index the trace masks into the restricted point order.
    let mut new_index = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        new_index.insert(space.point_index(p).unwrap(), i);
    }
    let mut opens = BTreeSet::new();
    for &open in &space.opens {
        let trace = open & sub_mask;
        let mut mask = 0u64;
        for (&old, &new) in &new_index {
            if trace >> old & 1 == 1 {
                mask |= 1 << new;
            }
        }
        opens.insert(mask);
    }
    Ok(FiniteSpace { points, opens })
}

/// All topologies on the given points, by brute force over subset families.
/// Feasible only for very few points (the filter runs over 2^(2^n) families).
pub fn all_topologies(points: &[String]) -> Result<Vec<FiniteSpace>> {
    if points.len() > 4 {
        return Err(Error::SizeLimit {
            what: "enumerating all topologies",
            requested: points.len() as u128,
            cap: 4,
        });
    }
    let n_subsets = 1usize << points.len();
    let mut out = Vec::new();
    for family in 0u64..1 << n_subsets {
        let opens: BTreeSet<u64> = (0..n_subsets as u64).filter(|&s| family >> s & 1 == 1).collect();
        let space = FiniteSpace {
            points: points.to_vec(),
            opens,
        };
        if is_topology(&space).is_ok() {
            out.push(space);
        }
    }
    Ok(out)
}

/// Ordered family of tagged constituent spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaggedSpace {
    pub constituents: BTreeMap<String, FiniteSpace>,
}

impl TaggedSpace {
    pub fn new(constituents: BTreeMap<String, FiniteSpace>) -> Result<Self> {
        if constituents.is_empty() {
            return Err(Error::invalid("tagged space", "needs at least one constituent"));
        }
        Ok(TaggedSpace { constituents })
    }
}

/// A coproduct open: one component mask per constituent, in tag order.
pub type CoproductComponents = Vec<u64>;

/// Disjoint union of tagged spaces with the fully materialized coproduct
/// topology: every open is a union of one open per constituent.
#[derive(Debug, Clone)]
pub struct CoproductSpace {
    tags: Vec<String>,
    constituents: Vec<FiniteSpace>,
    opens: Vec<CoproductComponents>,
}

impl CoproductSpace {
    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn constituents(&self) -> &[FiniteSpace] {
        &self.constituents
    }

    pub fn opens(&self) -> &[CoproductComponents] {
        &self.opens
    }

    /// Membership characterization: a subset is open iff its trace on each
    /// tagged constituent is open there.
    pub fn is_open_by_trace(&self, components: &[u64]) -> bool {
        components.len() == self.constituents.len()
            && components.iter().zip(&self.constituents).all(|(&m, c)| c.is_open(m))
    }

    /// Total number of points of the disjoint union.
    pub fn point_count(&self) -> usize {
        self.constituents.iter().map(|c| c.points().len()).sum()
    }

    /// Splits a subset of the disjoint union (as a bitmask over the
    /// concatenated point list) into per-constituent component masks.
    pub fn split_mask(&self, mut global: u128) -> CoproductComponents {
        let mut out = Vec::with_capacity(self.constituents.len());
        for c in &self.constituents {
            let width = c.points().len();
            out.push((global & ((1u128 << width) - 1)) as u64);
            global >>= width;
        }
        out
    }
}

/// Builds the coproduct: opens are enumerated exactly as the product of the
/// constituent open families.
pub fn coproduct(family: &TaggedSpace) -> Result<CoproductSpace> {
    coproduct_with_cap(family, DEFAULT_COPRODUCT_CAP)
}

pub fn coproduct_with_cap(family: &TaggedSpace, cap: usize) -> Result<CoproductSpace> {
    let tags: Vec<String> = family.constituents.keys().cloned().collect();
    let constituents: Vec<FiniteSpace> = family.constituents.values().cloned().collect();
    let mut total: u128 = 1;
    for c in &constituents {
        total = total.saturating_mul(c.open_count() as u128);
    }
    if total > cap as u128 {
        return Err(Error::SizeLimit {
            what: "materializing a coproduct topology",
            requested: total,
            cap: cap as u128,
        });
    }
    let per_space: Vec<Vec<u64>> = constituents.iter().map(|c| c.opens.iter().copied().collect()).collect();
    let mut opens = Vec::with_capacity(total as usize);
    let mut odometer = vec![0usize; constituents.len()];
    loop {
        opens.push(odometer.iter().zip(&per_space).map(|(&i, o)| o[i]).collect::<Vec<u64>>());
        let mut pos = constituents.len();
        loop {
            if pos == 0 {
                return Ok(CoproductSpace {
                    tags,
                    constituents,
                    opens,
                });
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < per_space[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

/// True iff the image of every open of `smaller` under the embedding is an
/// open of `larger`: the topology-inclusion half of the "finer" relation on
/// encodings (the point-set half is the embedding itself).
pub fn is_finer(
    smaller: &FiniteSpace,
    larger: &FiniteSpace,
    embedding: &BTreeMap<String, String>,
) -> Result<bool> {
    let map = embedding_indices(smaller, larger, embedding)?;
    Ok(smaller.opens.iter().all(|&open| larger.is_open(map_mask(open, &map))))
}

fn embedding_indices(
    from: &FiniteSpace,
    to: &FiniteSpace,
    embedding: &BTreeMap<String, String>,
) -> Result<Vec<usize>> {
    let mut map = Vec::with_capacity(from.points.len());
    let mut seen = BTreeSet::new();
    for p in &from.points {
        let target = embedding
            .get(p)
            .ok_or_else(|| Error::invalid("embedding", format!("no image for point {p:?}")))?;
        let i = to
            .point_index(target)
            .ok_or_else(|| Error::invalid("embedding", format!("image point {target:?} not in target space")))?;
        if !seen.insert(i) {
            return Err(Error::invalid("embedding", format!("not injective at {target:?}")));
        }
        map.push(i);
    }
    Ok(map)
}

fn map_mask(mask: u64, map: &[usize]) -> u64 {
    let mut out = 0u64;
    for (i, &target) in map.iter().enumerate() {
        if mask >> i & 1 == 1 {
            out |= 1 << target;
        }
    }
    out
}

/// Exhaustive homeomorphism test by bijection search. Errors above the point
/// cap; cheap invariants prune most mismatches first.
pub fn homeomorphic(a: &FiniteSpace, b: &FiniteSpace) -> Result<bool> {
    if a.points.len() != b.points.len() {
        return Ok(false);
    }
    if a.points.len() > HOMEOMORPHISM_POINT_CAP {
        return Err(Error::SizeLimit {
            what: "exhaustive homeomorphism search",
            requested: a.points.len() as u128,
            cap: HOMEOMORPHISM_POINT_CAP as u128,
        });
    }
    if a.opens.len() != b.opens.len() {
        return Ok(false);
    }
    let mut sizes_a: Vec<u32> = a.opens.iter().map(|m| m.count_ones()).collect();
    let mut sizes_b: Vec<u32> = b.opens.iter().map(|m| m.count_ones()).collect();
    sizes_a.sort_unstable();
    sizes_b.sort_unstable();
    if sizes_a != sizes_b {
        return Ok(false);
    }
    let n = a.points.len();
    let mut perm: Vec<usize> = (0..n).collect();
    Ok(search_bijection(a, b, &mut perm, 0))
}

fn search_bijection(a: &FiniteSpace, b: &FiniteSpace, perm: &mut Vec<usize>, depth: usize) -> bool {
    if depth == perm.len() {
        return a.opens.iter().all(|&m| b.is_open(map_mask(m, perm)));
    }
    for i in depth..perm.len() {
        perm.swap(depth, i);
        if search_bijection(a, b, perm, depth + 1) {
            perm.swap(depth, i);
            return true;
        }
        perm.swap(depth, i);
    }
    false
}

/// Level-indexed presentation of a fractal family: tagged spaces per level,
/// the parent map between consecutive levels, and optional explicit point
/// embeddings (identity-by-name is assumed where omitted).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyPresentation {
    pub levels: Vec<BTreeMap<String, FiniteSpace>>,
    pub parent_maps: Vec<BTreeMap<String, String>>,
    #[serde(default)]
    pub embeddings: Vec<BTreeMap<String, BTreeMap<String, String>>>,
}

impl FamilyPresentation {
    pub fn validate(&self) -> Result<()> {
        if self.levels.len() < 2 {
            return Err(Error::domain("family presentation needs at least two levels".to_string()));
        }
        if self.parent_maps.len() != self.levels.len() - 1 {
            return Err(Error::invalid("parent_maps", "must have one entry per consecutive level pair"));
        }
        if !self.embeddings.is_empty() && self.embeddings.len() != self.parent_maps.len() {
            return Err(Error::invalid("embeddings", "must be empty or match parent_maps in length"));
        }
        for (i, pm) in self.parent_maps.iter().enumerate() {
            for (child, parent) in pm {
                if !self.levels[i + 1].contains_key(child) {
                    return Err(Error::invalid("parent_maps", format!("unknown child tag {child:?}")));
                }
                if !self.levels[i].contains_key(parent) {
                    return Err(Error::invalid("parent_maps", format!("unknown parent tag {parent:?}")));
                }
            }
            for child in self.levels[i + 1].keys() {
                if !pm.contains_key(child) {
                    return Err(Error::invalid("parent_maps", format!("missing parent for {child:?}")));
                }
            }
        }
        Ok(())
    }

    /// Point embedding from the level-`n` space `parent` into the level-`n+1`
    /// space `child`: the explicit one when the presentation declares it for
    /// this pair, otherwise identity on shared point names.
    pub fn embedding(&self, n: usize, parent: &str, child: &str) -> Option<BTreeMap<String, String>> {
        if let Some(per_child) = self.embeddings.get(n).and_then(|e| e.get(child)) {
            if self.parent_maps[n].get(child).map(String::as_str) == Some(parent) && !per_child.is_empty() {
                return Some(per_child.clone());
            }
        }
        let parent_space = self.levels[n].get(parent)?;
        let child_space = self.levels[n + 1].get(child)?;
        let identity: BTreeMap<String, String> = parent_space
            .points()
            .iter()
            .filter(|p| child_space.point_index(p).is_some())
            .map(|p| (p.clone(), p.clone()))
            .collect();
        if identity.len() == parent_space.points().len() {
            Some(identity)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyReport {
    pub axioms: Vec<AxiomCheck>,
}

impl FamilyReport {
    pub fn all_pass(&self) -> bool {
        self.axioms.iter().all(|a| a.pass)
    }
}

/// True iff, under the embedding, the image of the parent space carries the
/// topology induced from the child: traces of child opens on the image equal
/// exactly the embedded parent opens.
fn induced_matches(
    parent: &FiniteSpace,
    child: &FiniteSpace,
    embedding: &BTreeMap<String, String>,
) -> Result<bool> {
    let map = embedding_indices(parent, child, embedding)?;
    let image_mask: u64 = map.iter().map(|&i| 1u64 << i).sum();
    let embedded: BTreeSet<u64> = parent.opens.iter().map(|&m| map_mask(m, &map)).collect();
    let traces: BTreeSet<u64> = child.opens.iter().map(|&m| m & image_mask).collect();
    Ok(embedded == traces)
}

/// Candidate parents of `child` at level `n`: tags whose space embeds into the
/// child with matching induced topology (plus, when `require_finer`, whose
/// embedded opens are all open in the child).
fn qualifying_parents(
    pres: &FamilyPresentation,
    n: usize,
    child: &str,
    require_finer: bool,
) -> Result<Vec<String>> {
    let child_space = &pres.levels[n + 1][child];
    let mut found = Vec::new();
    for (tag, parent_space) in &pres.levels[n] {
        let Some(embedding) = pres.embedding(n, tag, child) else {
            continue;
        };
        if embedding_indices(parent_space, child_space, &embedding).is_err() {
            continue;
        }
        if !induced_matches(parent_space, child_space, &embedding)? {
            continue;
        }
        if require_finer && !is_finer(parent_space, child_space, &embedding)? {
            continue;
        }
        found.push(tag.clone());
    }
    Ok(found)
}

/// Checks the five fractal-family axioms on a presentation and reports
/// pass/fail with witnesses.
pub fn verify_fractal_family(pres: &FamilyPresentation) -> Result<FamilyReport> {
    pres.validate()?;
    let mut axioms = Vec::new();

    // (i) strict cardinality growth of the index sets.
    {
        let bad = (0..pres.levels.len() - 1).find(|&i| pres.levels[i].len() >= pres.levels[i + 1].len());
        axioms.push(AxiomCheck {
            axiom: "i".into(),
            pass: bad.is_none(),
            witness: bad.map(|i| format!("levels {i} and {} have sizes {} and {}", i + 1, pres.levels[i].len(), pres.levels[i + 1].len())),
        });
    }

    // (ii) every constituent is a topological space.
    {
        let mut witness = None;
        'outer: for (n, level) in pres.levels.iter().enumerate() {
            for (tag, space) in level {
                if let Err(v) = is_topology(space) {
                    witness = Some(format!("level {n} tag {tag}: {v}"));
                    break 'outer;
                }
            }
        }
        axioms.push(AxiomCheck {
            axiom: "ii".into(),
            pass: witness.is_none(),
            witness,
        });
    }

    // (iii) all spaces of a level are pairwise homeomorphic.
    {
        let mut witness = None;
        'outer3: for (n, level) in pres.levels.iter().enumerate() {
            let spaces: Vec<(&String, &FiniteSpace)> = level.iter().collect();
            for i in 0..spaces.len() {
                for k in i + 1..spaces.len() {
                    if !homeomorphic(spaces[i].1, spaces[k].1)? {
                        witness = Some(format!("level {n}: {} vs {}", spaces[i].0, spaces[k].0));
                        break 'outer3;
                    }
                }
            }
        }
        axioms.push(AxiomCheck {
            axiom: "iii".into(),
            pass: witness.is_none(),
            witness,
        });
    }

    // (iv) each child has a unique embedded parent with matching induced
    // topology, and it is the declared one. Ties are reported, not resolved.
    {
        let mut witness = None;
        'outer4: for n in 0..pres.levels.len() - 1 {
            for child in pres.levels[n + 1].keys() {
                let found = qualifying_parents(pres, n, child, false)?;
                let declared = &pres.parent_maps[n][child];
                if found.len() != 1 {
                    witness = Some(format!("child {child} at level {}: candidate parents {found:?}", n + 1));
                    break 'outer4;
                }
                if &found[0] != declared {
                    witness = Some(format!(
                        "child {child} at level {}: qualifying parent {} differs from declared {declared}",
                        n + 1,
                        found[0]
                    ));
                    break 'outer4;
                }
            }
        }
        axioms.push(AxiomCheck {
            axiom: "iv".into(),
            pass: witness.is_none(),
            witness,
        });
    }

    // (v) each parent has some child whose topology extends it (opens
    // preserved) with matching induced topology.
    {
        let mut witness = None;
        'outer5: for n in 0..pres.levels.len() - 1 {
            for parent in pres.levels[n].keys() {
                let mut ok = false;
                for child in pres.levels[n + 1].keys() {
                    if let Some(embedding) = pres.embedding(n, parent, child) {
                        let parent_space = &pres.levels[n][parent];
                        let child_space = &pres.levels[n + 1][child];
                        if embedding_indices(parent_space, child_space, &embedding).is_ok()
                            && is_finer(parent_space, child_space, &embedding)?
                            && induced_matches(parent_space, child_space, &embedding)?
                        {
                            ok = true;
                            break;
                        }
                    }
                }
                if !ok {
                    witness = Some(format!("parent {parent} at level {n} has no extending child"));
                    break 'outer5;
                }
            }
        }
        axioms.push(AxiomCheck {
            axiom: "v".into(),
            pass: witness.is_none(),
            witness,
        });
    }

    Ok(FamilyReport { axioms })
}

/// An open of the level-n coproduct, given by its per-tag components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LevelOpen {
    pub components: BTreeMap<String, BTreeSet<String>>,
}

impl FamilyPresentation {
    fn level_open_masks(&self, n: usize, open: &LevelOpen) -> Result<BTreeMap<String, u64>> {
        let level = self
            .levels
            .get(n)
            .ok_or_else(|| Error::domain(format!("no level {n} in presentation")))?;
        let mut masks = BTreeMap::new();
        for (tag, space) in level {
            let empty = BTreeSet::new();
            let names = open.components.get(tag).unwrap_or(&empty);
            masks.insert(tag.clone(), space.mask_of(names)?);
        }
        Ok(masks)
    }

    /// Membership test for the level-n coproduct topology: every per-tag
    /// component must be open in its constituent.
    pub fn is_level_open(&self, n: usize, open: &LevelOpen) -> Result<bool> {
        let masks = self.level_open_masks(n, open)?;
        Ok(masks.iter().all(|(tag, &m)| self.levels[n][tag].is_open(m)))
    }
}

/// Pushes a level-n coproduct open one step up: each level-(n+1) component is
/// the embedded image of the component of its parent.
pub fn expand_open(pres: &FamilyPresentation, n: usize, open: &LevelOpen) -> Result<LevelOpen> {
    if n + 1 >= pres.levels.len() {
        return Err(Error::domain(format!("cannot expand from level {n}: no level {}", n + 1)));
    }
    if !pres.is_level_open(n, open)? {
        return Err(Error::domain("input is not an open of the level-n coproduct".to_string()));
    }
    let mut components = BTreeMap::new();
    for child in pres.levels[n + 1].keys() {
        let parent = &pres.parent_maps[n][child];
        let embedding = pres
            .embedding(n, parent, child)
            .ok_or_else(|| Error::domain(format!("no embedding from {parent} into {child}")))?;
        let empty = BTreeSet::new();
        let parent_component = open.components.get(parent).unwrap_or(&empty);
        let image: BTreeSet<String> = parent_component
            .iter()
            .map(|p| {
                embedding
                    .get(p)
                    .cloned()
                    .ok_or_else(|| Error::invalid("embedding", format!("no image for point {p:?}")))
            })
            .collect::<Result<_>>()?;
        components.insert(child.clone(), image);
    }
    Ok(LevelOpen { components })
}

/// Result of sweeping every open of a level coproduct through `expand_open`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpandSweep {
    pub total: u128,
    pub pass: bool,
    pub witness: Option<String>,
}

/// Exhaustively enumerates the level-n coproduct opens (as the product of
/// constituent open families, their exact characterization) and checks that
/// each expands to an open of level n+1.
pub fn check_expand_all_opens(pres: &FamilyPresentation, n: usize, limit: u128) -> Result<ExpandSweep> {
    pres.validate()?;
    if n + 1 >= pres.levels.len() {
        return Err(Error::domain(format!("no level {} in presentation", n + 1)));
    }
    let tags: Vec<&String> = pres.levels[n].keys().collect();
    let opens_per_tag: Vec<Vec<u64>> = tags
        .iter()
        .map(|t| pres.levels[n][*t].opens.iter().copied().collect())
        .collect();
    let total: u128 = opens_per_tag.iter().map(|o| o.len() as u128).product();
    if total > limit {
        return Err(Error::SizeLimit {
            what: "sweeping all coproduct opens",
            requested: total,
            cap: limit,
        });
    }

    // For each child, precompute whether the embedded image of each parent
    // open is open in the child; a coproduct open expands to an open iff all
    // of its components do, so the sweep reduces to these table lookups.
    let children: Vec<&String> = pres.levels[n + 1].keys().collect();
    let mut child_tables: Vec<(usize, Vec<bool>)> = Vec::new();
    for child in &children {
        let parent = &pres.parent_maps[n][*child];
        let parent_pos = tags.iter().position(|t| *t == parent).unwrap();
        let parent_space = &pres.levels[n][parent];
        let child_space = &pres.levels[n + 1][*child];
        let embedding = pres
            .embedding(n, parent, child)
            .ok_or_else(|| Error::domain(format!("no embedding from {parent} into {child}")))?;
        let map = embedding_indices(parent_space, child_space, &embedding)?;
        let table: Vec<bool> = opens_per_tag[parent_pos]
            .iter()
            .map(|&m| child_space.is_open(map_mask(m, &map)))
            .collect();
        child_tables.push((parent_pos, table));
    }

    let mut odometer = vec![0usize; tags.len()];
    let mut checked: u128 = 0;
    loop {
        for (parent_pos, table) in &child_tables {
            if !table[odometer[*parent_pos]] {
                let tag = tags[*parent_pos];
                let mask = opens_per_tag[*parent_pos][odometer[*parent_pos]];
                let names = pres.levels[n][tag].names_of(mask);
                return Ok(ExpandSweep {
                    total,
                    pass: false,
                    witness: Some(format!("component {names:?} of constituent {tag} does not expand to an open")),
                });
            }
        }
        checked += 1;
        let mut pos = tags.len();
        loop {
            if pos == 0 {
                debug_assert_eq!(checked, total);
                return Ok(ExpandSweep {
                    total,
                    pass: true,
                    witness: None,
                });
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < opens_per_tag[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

/// Report of the expanding-family conditions on the constructed coproducts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpandingReport {
    pub clauses: Vec<AxiomCheck>,
}

impl ExpandingReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }
}

/// Asserts the expanding-family definition on the presentation's coproducts:
/// index growth, unique parent with topology inclusion, and the coproduct
/// form of every level topology (membership and product characterizations
/// agree).
pub fn check_expanding(pres: &FamilyPresentation) -> Result<ExpandingReport> {
    check_expanding_with_cap(pres, DEFAULT_COPRODUCT_CAP)
}

pub fn check_expanding_with_cap(pres: &FamilyPresentation, cap: usize) -> Result<ExpandingReport> {
    pres.validate()?;
    let mut clauses = Vec::new();

    // (i) cardinality growth.
    {
        let bad = (0..pres.levels.len() - 1).find(|&i| pres.levels[i].len() >= pres.levels[i + 1].len());
        clauses.push(AxiomCheck {
            axiom: "expanding-i (index growth)".into(),
            pass: bad.is_none(),
            witness: bad.map(|i| format!("levels {i} and {}", i + 1)),
        });
    }

    // (ii) unique parent with topology inclusion and induced form.
    {
        let mut witness = None;
        'outer: for n in 0..pres.levels.len() - 1 {
            for child in pres.levels[n + 1].keys() {
                let found = qualifying_parents(pres, n, child, true)?;
                if found.len() != 1 {
                    witness = Some(format!("child {child} at level {}: candidates {found:?}", n + 1));
                    break 'outer;
                }
            }
        }
        clauses.push(AxiomCheck {
            axiom: "expanding-ii (unique finer parent)".into(),
            pass: witness.is_none(),
            witness,
        });
    }

    // (iii) each level topology is the coproduct topology: the materialized
    // product-form opens all pass the membership test, and every subset
    // passing the membership test is product-form.
    {
        let mut witness = None;
        'outer3: for (n, level) in pres.levels.iter().enumerate() {
            let tagged = TaggedSpace::new(level.clone())?;
            let cop = coproduct_with_cap(&tagged, cap)?;
            let materialized: BTreeSet<&CoproductComponents> = cop.opens().iter().collect();
            for open in cop.opens() {
                if !cop.is_open_by_trace(open) {
                    witness = Some(format!("level {n}: product-form open fails the trace test"));
                    break 'outer3;
                }
            }
            // Trace-open subsets are exactly the per-constituent open picks,
            // so the two characterizations agree iff the counts do.
            let trace_count: u128 = cop.constituents().iter().map(|c| c.open_count() as u128).product();
            if trace_count != materialized.len() as u128 {
                witness = Some(format!("level {n}: trace-open count {trace_count} != materialized {}", materialized.len()));
                break 'outer3;
            }
        }
        clauses.push(AxiomCheck {
            axiom: "expanding-iii (coproduct topology form)".into(),
            pass: witness.is_none(),
            witness,
        });
    }

    Ok(ExpandingReport { clauses })
}
