//! Sign-string combinatorics.
//!
//! A sign string σ_0…σ_n indexes one branch of the expansion tree at step n.
//! The index set Λ_n collects all 2^{n+1} such strings. Dropping the last
//! sign is the parent projection g_n; appending both signs gives the two
//! children. Each string also carries a chart number used to label the
//! expansion diagram: at step n the charts are numbered 2^n..2^{n+1}-1, with
//! a primed variant for branches ending in a minus sign.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, DEFAULT_STEP_CAP};

/// One stretching direction. `Plus` sorts before `Minus`, which fixes the
/// lexicographic enumeration order of Λ_n to the left-to-right layout of the
/// expansion diagrams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// An element j_n of Λ_n: a non-empty word over {+, -} of length n+1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignString {
    signs: Vec<Sign>,
}

impl SignString {
    pub fn new(signs: Vec<Sign>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::invalid("sign string", "must contain at least one sign"));
        }
        Ok(SignString { signs })
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    /// Step index: a string of length n+1 lives at step n.
    pub fn step(&self) -> usize {
        self.signs.len() - 1
    }

    pub fn last_sign(&self) -> Sign {
        *self.signs.last().expect("sign string is non-empty")
    }
}

impl fmt::Display for SignString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.signs {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for SignString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(Sign::Plus),
                '-' | '\u{2212}' => Ok(Sign::Minus),
                other => Err(Error::invalid(
                    "sign string",
                    format!("unexpected character {other:?}, expected '+' or '-'"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        SignString::new(signs)
    }
}

impl Serialize for SignString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SignString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Chart reference at step n: the chart number k in [2^n, 2^{n+1}-1] together
/// with the primed flag marking the translated variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChartRef {
    pub k: u64,
    pub primed: bool,
}

/// A single factor in a chart composition chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapToken {
    /// The local homeomorphism with the given chart number.
    Phi(u64),
    /// The translation paired with the given chart number.
    Translate(u64),
}

impl fmt::Display for MapToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapToken::Phi(k) => write!(f, "phi_{k}"),
            MapToken::Translate(k) => write!(f, "T_{k}"),
        }
    }
}

/// Renders a token chain as `T_3*phi_3*T_1*phi_1` (outermost map first).
pub fn format_composition(tokens: &[MapToken]) -> String {
    let parts: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
    parts.join("*")
}

/// Enumerates Λ_n in lexicographic order with `+` before `-`.
pub fn enumerate_lambda(n: usize) -> Result<Vec<SignString>> {
    enumerate_lambda_with_cap(n, DEFAULT_STEP_CAP)
}

pub fn enumerate_lambda_with_cap(n: usize, cap: usize) -> Result<Vec<SignString>> {
    if n > cap {
        return Err(Error::StepCapExceeded { requested: n, cap });
    }
    let len = n + 1;
    let count = 1usize << len;
    let mut out = Vec::with_capacity(count);
    for code in 0..count {
        // Most significant bit is σ_0; 0 encodes '+'.
        let signs = (0..len)
            .map(|i| {
                if code >> (len - 1 - i) & 1 == 0 {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            })
            .collect();
        out.push(SignString { signs });
    }
    Ok(out)
}

/// Drops the last sign: the parent projection g_n. Step-0 strings have no
/// parent.
pub fn parent(j: &SignString) -> Result<SignString> {
    if j.step() == 0 {
        return Err(Error::domain(format!("sign string {j} is at step 0 and has no parent")));
    }
    let mut signs = j.signs.clone();
    signs.pop();
    Ok(SignString { signs })
}

/// Appends `+` and `-`: the two children of j in the expansion tree.
pub fn children(j: &SignString) -> Result<(SignString, SignString)> {
    children_with_cap(j, DEFAULT_STEP_CAP)
}

pub fn children_with_cap(j: &SignString, cap: usize) -> Result<(SignString, SignString)> {
    let child_step = j.step() + 1;
    if child_step > cap {
        return Err(Error::StepCapExceeded {
            requested: child_step,
            cap,
        });
    }
    let mut plus = j.signs.clone();
    plus.push(Sign::Plus);
    let mut minus = j.signs.clone();
    minus.push(Sign::Minus);
    Ok((SignString { signs: plus }, SignString { signs: minus }))
}

/// Splits {0,…,n} into the positions carrying `+` and those carrying `-`.
pub fn sign_partition(j: &SignString) -> (Vec<usize>, Vec<usize>) {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (i, s) in j.signs.iter().enumerate() {
        match s {
            Sign::Plus => plus.push(i),
            Sign::Minus => minus.push(i),
        }
    }
    (plus, minus)
}

/// Chart number for j = σ_0…σ_n: k = 2^n + offset where the binary digits of
/// offset are σ_0…σ_{n-1} with `+` read as 0, and primed iff σ_n = `-`.
///
/// The chart numbering reproduces the labeled arrows of the expansion
/// diagram; beyond that it is a fixed convention.
pub fn chart_index(j: &SignString) -> ChartRef {
    let n = j.step();
    let mut offset: u64 = 0;
    for s in &j.signs[..n] {
        offset = offset << 1
            | match s {
                Sign::Plus => 0,
                Sign::Minus => 1,
            };
    }
    ChartRef {
        k: (1u64 << n) + offset,
        primed: j.last_sign() == Sign::Minus,
    }
}

/// Symbolic composition chain for j, outermost map first.
///
/// The chain is built by walking the prefix strings: each prefix contributes
/// its chart map, preceded by the matching translation when the prefix ends
/// in a minus sign.
pub fn chart_composition(j: &SignString) -> Vec<MapToken> {
    let mut tokens = Vec::new();
    for end in (1..=j.signs.len()).rev() {
        let prefix = SignString {
            signs: j.signs[..end].to_vec(),
        };
        let chart = chart_index(&prefix);
        if chart.primed {
            tokens.push(MapToken::Translate(chart.k));
        }
        tokens.push(MapToken::Phi(chart.k));
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn js(s: &str) -> SignString {
        s.parse().unwrap()
    }

    #[test]
    fn lambda_small_steps_match_listing() {
        let l0: Vec<String> = enumerate_lambda(0).unwrap().iter().map(|j| j.to_string()).collect();
        assert_eq!(l0, vec!["+", "-"]);

        let l1: Vec<String> = enumerate_lambda(1).unwrap().iter().map(|j| j.to_string()).collect();
        assert_eq!(l1, vec!["++", "+-", "-+", "--"]);

        let l2 = enumerate_lambda(2).unwrap();
        assert_eq!(l2.len(), 8);
        assert_eq!(l2[0].to_string(), "+++");
        assert_eq!(l2[7].to_string(), "---");
    }

    #[test]
    fn lambda_cardinality() {
        for n in 0..=12 {
            assert_eq!(enumerate_lambda(n).unwrap().len(), 1 << (n + 1));
        }
    }

    #[test]
    fn lambda_rejects_above_cap() {
        assert!(matches!(
            enumerate_lambda_with_cap(5, 4),
            Err(Error::StepCapExceeded { requested: 5, cap: 4 })
        ));
    }

    #[test]
    fn parent_drops_last_sign() {
        assert_eq!(parent(&js("+-")).unwrap(), js("+"));
        assert_eq!(parent(&js("--+")).unwrap(), js("--"));
        assert!(parent(&js("+")).is_err());
    }

    #[test]
    fn children_append_signs() {
        let (p, m) = children(&js("+")).unwrap();
        assert_eq!(p, js("++"));
        assert_eq!(m, js("+-"));
        let (p, m) = children(&js("-+")).unwrap();
        assert_eq!(p, js("-++"));
        assert_eq!(m, js("-+-"));
    }

    #[test]
    fn parent_of_children_is_identity() {
        for j in enumerate_lambda(4).unwrap() {
            let (p, m) = children(&j).unwrap();
            assert_eq!(parent(&p).unwrap(), j);
            assert_eq!(parent(&m).unwrap(), j);
        }
    }

    #[test]
    fn parent_is_two_to_one_surjection() {
        for n in 0..6 {
            let level = enumerate_lambda(n).unwrap();
            let next = enumerate_lambda(n + 1).unwrap();
            let mut fibers: std::collections::BTreeMap<SignString, usize> = Default::default();
            for j in &next {
                *fibers.entry(parent(j).unwrap()).or_default() += 1;
            }
            assert_eq!(fibers.len(), level.len());
            assert!(fibers.values().all(|&c| c == 2));
        }
    }

    #[test]
    fn sign_partition_reads_positions() {
        assert_eq!(sign_partition(&js("+-+")), (vec![0, 2], vec![1]));
        assert_eq!(sign_partition(&js("--")), (vec![], vec![0, 1]));
        assert_eq!(sign_partition(&js("+")), (vec![0], vec![]));
    }

    #[test]
    fn chart_index_matches_diagram_labels() {
        assert_eq!(chart_index(&js("+")), ChartRef { k: 1, primed: false });
        assert_eq!(chart_index(&js("-")), ChartRef { k: 1, primed: true });
        assert_eq!(chart_index(&js("+-")), ChartRef { k: 2, primed: true });
        assert_eq!(chart_index(&js("-+")), ChartRef { k: 3, primed: false });
    }

    #[test]
    fn chart_index_is_bijective_per_step() {
        for n in 0..=10 {
            let refs: BTreeSet<ChartRef> = enumerate_lambda(n).unwrap().iter().map(chart_index).collect();
            assert_eq!(refs.len(), 1 << (n + 1));
            for r in &refs {
                assert!(r.k >= 1 << n && r.k < 1 << (n + 1));
            }
        }
    }

    #[test]
    fn compositions_at_small_steps() {
        use MapToken::{Phi, Translate};
        assert_eq!(chart_composition(&js("+")), vec![Phi(1)]);
        assert_eq!(chart_composition(&js("-")), vec![Translate(1), Phi(1)]);
        assert_eq!(chart_composition(&js("++")), vec![Phi(2), Phi(1)]);
        assert_eq!(chart_composition(&js("+-")), vec![Translate(2), Phi(2), Phi(1)]);
        assert_eq!(chart_composition(&js("-+")), vec![Phi(3), Translate(1), Phi(1)]);
        assert_eq!(chart_composition(&js("--")), vec![Translate(3), Phi(3), Translate(1), Phi(1)]);
    }

    #[test]
    fn composition_shape() {
        for n in 0..6 {
            for j in enumerate_lambda(n).unwrap() {
                let tokens = chart_composition(&j);
                let minus_count = j.signs().iter().filter(|s| **s == Sign::Minus).count();
                assert_eq!(tokens.len(), (n + 1) + minus_count);
                // Chain ends with the step-0 composition of σ_0.
                let tail = chart_composition(&js(&j.to_string()[..1]));
                assert_eq!(&tokens[tokens.len() - tail.len()..], &tail[..]);
                // Chart numbers on φ tokens strictly increase right to left.
                let phis: Vec<u64> = tokens
                    .iter()
                    .rev()
                    .filter_map(|t| match t {
                        MapToken::Phi(k) => Some(*k),
                        _ => None,
                    })
                    .collect();
                assert!(phis.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn composition_formatting() {
        assert_eq!(format_composition(&chart_composition(&js("--"))), "T_3*phi_3*T_1*phi_1");
    }

    #[test]
    fn sign_string_round_trips_through_serde() {
        let j = js("+-+");
        let json = serde_json::to_string(&j).unwrap();
        assert_eq!(json, "\"+-+\"");
        let back: SignString = serde_json::from_str(&json).unwrap();
        assert_eq!(back, j);
    }
}
