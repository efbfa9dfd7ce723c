//! Random generation of valid family presentations, used by metamorphic
//! tests: every presentation produced here satisfies the five fractal-family
//! axioms by construction.

use std::collections::BTreeMap;

use rand::Rng;

use super::{FamilyPresentation, FiniteSpace};

/// A level template: a point count and an open family over point indices.
/// Every space of a level is a relabeled copy, so level members are
/// homeomorphic by construction.
#[derive(Clone)]
struct Template {
    n_points: usize,
    opens: Vec<u64>,
}

fn close_under_ops(mut opens: Vec<u64>) -> Vec<u64> {
    loop {
        let mut added = false;
        let snapshot = opens.clone();
        for (i, &a) in snapshot.iter().enumerate() {
            for &b in &snapshot[i + 1..] {
                for m in [a | b, a & b] {
                    if !opens.contains(&m) {
                        opens.push(m);
                        added = true;
                    }
                }
            }
        }
        if !added {
            opens.sort_unstable();
            return opens;
        }
    }
}

fn random_template(rng: &mut impl Rng) -> Template {
    let n_points = rng.gen_range(2..=3);
    let full = (1u64 << n_points) - 1;
    let mut opens = vec![0, full];
    for _ in 0..rng.gen_range(0..=2) {
        let m = rng.gen_range(0..=full);
        if !opens.contains(&m) {
            opens.push(m);
        }
    }
    Template {
        n_points,
        opens: close_under_ops(opens),
    }
}

/// Extends a template by `extra` fresh points. The child topology keeps all
/// parent opens, so the parent topology is both induced and included, and
/// optionally adds the fresh points to every open.
fn extend_template(rng: &mut impl Rng, parent: &Template, extra: usize) -> Template {
    let new_mask = ((1u64 << extra) - 1) << parent.n_points;
    let mut opens = parent.opens.clone();
    if rng.gen_bool(0.5) {
        // Every open also appears with the fresh points attached.
        opens.extend(parent.opens.iter().map(|&m| m | new_mask));
    } else {
        // Only the full child set is added.
        let parent_full = (1u64 << parent.n_points) - 1;
        opens.push(parent_full | new_mask);
    }
    opens.sort_unstable();
    opens.dedup();
    Template {
        n_points: parent.n_points + extra,
        opens,
    }
}

fn instantiate(template: &Template, level: usize, idx: usize) -> FiniteSpace {
    let points: Vec<String> = (0..template.n_points).map(|p| format!("n{level}s{idx}p{p}")).collect();
    let space = FiniteSpace::new(points, vec![]).expect("valid points");
    FiniteSpace {
        opens: template.opens.iter().copied().collect(),
        ..space
    }
}

/// Generates a random presentation satisfying all fractal-family axioms:
/// each level is a set of relabeled copies of one template, each child
/// extends its parent's template by fresh points, and every parent has two
/// children.
pub fn random_presentation(rng: &mut impl Rng) -> FamilyPresentation {
    let n_levels = rng.gen_range(2..=3);
    // Deeper families start from a single root so the last level's coproduct
    // (space count doubles per level, open count can too) stays materializable.
    let base_count = if n_levels == 3 { 1 } else { rng.gen_range(1..=2) };
    // Keep total points within the homeomorphism search cap.
    let extras: Vec<usize> = (1..n_levels).map(|_| rng.gen_range(1..=2)).collect();

    let mut templates = vec![random_template(rng)];
    for &extra in &extras {
        let next = extend_template(rng, templates.last().unwrap(), extra);
        templates.push(next);
    }

    let mut levels = Vec::new();
    let mut parent_maps = Vec::new();
    let mut embeddings = Vec::new();

    let level0: BTreeMap<String, FiniteSpace> = (0..base_count)
        .map(|i| (format!("j{i}"), instantiate(&templates[0], 0, i)))
        .collect();
    levels.push(level0);

    for n in 1..n_levels {
        let parent_tags: Vec<String> = levels[n - 1].keys().cloned().collect();
        let mut level = BTreeMap::new();
        let mut pm = BTreeMap::new();
        let mut emb = BTreeMap::new();
        for (slot, parent_tag) in parent_tags.iter().enumerate() {
            for branch in 0..2 {
                let idx = slot * 2 + branch;
                let tag = format!("j{idx}");
                let space = instantiate(&templates[n], n, idx);
                // Structural embedding: template point p of the parent copy
                // maps to template point p of the child copy.
                let parent_space = &levels[n - 1][parent_tag];
                let map: BTreeMap<String, String> = parent_space
                    .points()
                    .iter()
                    .cloned()
                    .zip(space.points().iter().cloned())
                    .collect();
                level.insert(tag.clone(), space);
                pm.insert(tag.clone(), parent_tag.clone());
                emb.insert(tag, map);
            }
        }
        levels.push(level);
        parent_maps.push(pm);
        embeddings.push(emb);
    }

    FamilyPresentation {
        levels,
        parent_maps,
        embeddings,
    }
}
