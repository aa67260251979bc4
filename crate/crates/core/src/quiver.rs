//! Ice quivers: integer exchange matrices with mutable and frozen vertices.
//!
//! A quiver on m mutable and f frozen vertices is stored as the skew
//! matrix b of size (m+f)^2, mutable vertices first. Arrows between two
//! frozen vertices are never tracked: mutation cannot create them and the
//! cluster structure does not see them.
//!
//! `canonical_form` gives a bytewise canonical encoding under isomorphisms
//! that preserve the mutable/frozen partition, via color refinement plus
//! individualization backtracking. Intended sizes are small (at most ~20
//! vertices), which keeps the search cheap.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Quiver {
    pub n_mutable: usize,
    pub n_frozen: usize,
    b: Vec<i64>, // row-major (m+f)^2
}

#[derive(Debug, thiserror::Error)]
pub enum QuiverError {
    #[error("vertex index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("self-arrow at vertex {0}")]
    SelfArrow(usize),
    #[error("arrow between frozen vertices {0} and {1}")]
    FrozenFrozenArrow(usize, usize),
    #[error("mutation index {0} is not a mutable vertex")]
    NotMutable(usize),
}

/// JSON form: 1-based vertices, mutable are 1..=n_mutable, frozen follow.
/// An arrow entry [i, j, w] contributes w arrows from i to j.
#[derive(Serialize, Deserialize)]
pub struct QuiverJson {
    pub n_mutable: usize,
    pub n_frozen: usize,
    pub arrows: Vec<(usize, usize, i64)>,
}

impl Quiver {
    pub fn empty(n_mutable: usize, n_frozen: usize) -> Quiver {
        let n = n_mutable + n_frozen;
        Quiver { n_mutable, n_frozen, b: vec![0; n * n] }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_mutable + self.n_frozen
    }

    pub fn b(&self, i: usize, j: usize) -> i64 {
        self.b[i * self.n_vertices() + j]
    }

    fn is_frozen(&self, i: usize) -> bool {
        i >= self.n_mutable
    }

    /// Add w arrows i -> j (0-based). Panics on self or frozen-frozen arrows.
    pub fn add_arrow(&mut self, i: usize, j: usize, w: i64) {
        assert_ne!(i, j, "self-arrow");
        assert!(
            !(self.is_frozen(i) && self.is_frozen(j)),
            "arrow between frozen vertices"
        );
        let n = self.n_vertices();
        self.b[i * n + j] += w;
        self.b[j * n + i] -= w;
    }

    /// Arrows as (source, target, weight) with weight > 0, 0-based.
    pub fn arrows(&self) -> Vec<(usize, usize, i64)> {
        let n = self.n_vertices();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let w = self.b[i * n + j];
                if w > 0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Fomin-Zelevinsky mutation at a mutable vertex k (0-based).
    pub fn mutate(&self, k: usize) -> Quiver {
        assert!(k < self.n_mutable, "mutation at frozen vertex");
        let n = self.n_vertices();
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if self.is_frozen(i) && self.is_frozen(j) {
                    continue;
                }
                let v = if i == k || j == k {
                    -self.b(i, j)
                } else {
                    let bik = self.b(i, k);
                    let bkj = self.b(k, j);
                    self.b(i, j) + bik.signum() * (bik * bkj).max(0)
                };
                out.b[i * n + j] = v;
            }
        }
        out
    }

    /// The quiver with all arrows reversed.
    pub fn opposite(&self) -> Quiver {
        let mut out = self.clone();
        for v in &mut out.b {
            *v = -*v;
        }
        out
    }

    /// Principal part: drop all frozen vertices.
    pub fn restrict_mutable(&self) -> Quiver {
        let m = self.n_mutable;
        let n = self.n_vertices();
        let mut out = Quiver::empty(m, 0);
        for i in 0..m {
            for j in 0..m {
                out.b[i * m + j] = self.b[i * n + j];
            }
        }
        out
    }

    /// Drop a set of vertices entirely (0-based indices); remaining vertices
    /// keep relative order, mutable before frozen. `freeze` lists mutable
    /// vertices that become frozen in the result.
    pub fn surgery(&self, delete: &[usize], freeze: &[usize]) -> Quiver {
        let n = self.n_vertices();
        let del: std::collections::HashSet<usize> = delete.iter().copied().collect();
        let frz: std::collections::HashSet<usize> = freeze.iter().copied().collect();
        let mut keep_mut = Vec::new();
        let mut keep_frz = Vec::new();
        for v in 0..n {
            if del.contains(&v) {
                continue;
            }
            if self.is_frozen(v) || frz.contains(&v) {
                keep_frz.push(v);
            } else {
                keep_mut.push(v);
            }
        }
        let order: Vec<usize> = keep_mut.iter().chain(keep_frz.iter()).copied().collect();
        let mut out = Quiver::empty(keep_mut.len(), keep_frz.len());
        let nn = order.len();
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                if a >= out.n_mutable && b >= out.n_mutable {
                    continue;
                }
                out.b[a * nn + b] = self.b(i, j);
            }
        }
        out
    }

    pub fn to_json(&self) -> QuiverJson {
        QuiverJson {
            n_mutable: self.n_mutable,
            n_frozen: self.n_frozen,
            arrows: self
                .arrows()
                .into_iter()
                .map(|(i, j, w)| (i + 1, j + 1, w))
                .collect(),
        }
    }

    pub fn from_json(j: &QuiverJson) -> Result<Quiver, QuiverError> {
        let n = j.n_mutable + j.n_frozen;
        let mut q = Quiver::empty(j.n_mutable, j.n_frozen);
        for &(a, b, w) in &j.arrows {
            if a == 0 || a > n {
                return Err(QuiverError::IndexOutOfRange(a, n));
            }
            if b == 0 || b > n {
                return Err(QuiverError::IndexOutOfRange(b, n));
            }
            if a == b {
                return Err(QuiverError::SelfArrow(a));
            }
            let (i, k) = (a - 1, b - 1);
            if q.is_frozen(i) && q.is_frozen(k) {
                return Err(QuiverError::FrozenFrozenArrow(a, b));
            }
            q.b[i * n + k] += w;
            q.b[k * n + i] -= w;
        }
        Ok(q)
    }

    /// Canonical byte encoding under partition-preserving isomorphism.
    /// Two quivers are isomorphic (frozen vertices mapping to frozen, mutable
    /// to mutable, arrow weights preserved) iff their canonical forms agree.
    pub fn canonical_form(&self) -> Vec<u8> {
        let n = self.n_vertices();
        if n == 0 {
            return Vec::new();
        }
        let init: Vec<u64> = (0..n).map(|v| if self.is_frozen(v) { 1 } else { 0 }).collect();
        let mut best: Option<Vec<u8>> = None;
        self.search(init, &mut best);
        best.unwrap()
    }

    fn refine(&self, mut colors: Vec<u64>) -> Vec<u64> {
        let n = self.n_vertices();
        loop {
            // signature: (own color, sorted multiset of (weight, neighbor color))
            let mut sigs: Vec<(u64, Vec<(i64, u64)>)> = Vec::with_capacity(n);
            for i in 0..n {
                let mut nb: Vec<(i64, u64)> = Vec::new();
                for j in 0..n {
                    let w = self.b(i, j);
                    if w != 0 {
                        nb.push((w, colors[j]));
                    }
                }
                nb.sort_unstable();
                sigs.push((colors[i], nb));
            }
            let mut order: BTreeMap<&(u64, Vec<(i64, u64)>), u64> = BTreeMap::new();
            for s in &sigs {
                let next = order.len() as u64;
                order.entry(s).or_insert(next);
            }
            // renumber by sorted signature rank for stability
            let mut keys: Vec<&(u64, Vec<(i64, u64)>)> = order.keys().copied().collect();
            keys.sort();
            let rank: BTreeMap<_, u64> = keys.into_iter().zip(0u64..).collect();
            let new: Vec<u64> = sigs.iter().map(|s| rank[s]).collect();
            if new == colors {
                return colors;
            }
            colors = new;
        }
    }

    fn search(&self, colors: Vec<u64>, best: &mut Option<Vec<u8>>) {
        let colors = self.refine(colors);
        let n = self.n_vertices();
        // find smallest non-singleton color class
        let mut by_color: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (v, &c) in colors.iter().enumerate() {
            by_color.entry(c).or_default().push(v);
        }
        if let Some((_, class)) = by_color
            .iter()
            .filter(|(_, vs)| vs.len() > 1)
            .min_by_key(|(_, vs)| vs.len())
        {
            let class = class.clone();
            for v in class {
                let mut next = colors.clone();
                // individualize: give v a color just below its class
                for c in next.iter_mut() {
                    *c = *c * 2 + 1;
                }
                next[v] -= 1;
                self.search(next, best);
            }
            return;
        }
        // discrete: colors define a permutation; encode b under it
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by_key(|&v| colors[v]);
        let mut enc = Vec::with_capacity(n * n * 8 + 16);
        enc.extend_from_slice(&(self.n_mutable as u64).to_be_bytes());
        enc.extend_from_slice(&(self.n_frozen as u64).to_be_bytes());
        for &i in &perm {
            for &j in &perm {
                enc.extend_from_slice(&self.b(i, j).to_be_bytes());
            }
        }
        match best {
            Some(b) if *b <= enc => {}
            _ => *best = Some(enc),
        }
    }

    pub fn is_isomorphic(&self, other: &Quiver) -> bool {
        self.n_mutable == other.n_mutable
            && self.n_frozen == other.n_frozen
            && self.canonical_form() == other.canonical_form()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a3_path() -> Quiver {
        // 1 -> 2 -> 3
        let mut q = Quiver::empty(3, 0);
        q.add_arrow(0, 1, 1);
        q.add_arrow(1, 2, 1);
        q
    }

    #[test]
    fn mutation_is_involutive() {
        let q = a3_path();
        for k in 0..3 {
            assert_eq!(q.mutate(k).mutate(k), q);
        }
    }

    #[test]
    fn mutation_matches_hand_computation() {
        // mutate 1 -> 2 -> 3 at the middle vertex: both arrows reverse and a
        // composite arrow 1 -> 3 appears
        let q = a3_path().mutate(1);
        assert_eq!(q.b(1, 0), 1);
        assert_eq!(q.b(2, 1), 1);
        assert_eq!(q.b(0, 2), 1);
    }

    #[test]
    fn frozen_frozen_arrows_never_created() {
        // mutable 0 with arrows from frozen 1 and to frozen 2; mutating 0
        // would compose 1 -> 2 but that arrow must be suppressed
        let mut q = Quiver::empty(1, 2);
        q.add_arrow(1, 0, 1);
        q.add_arrow(0, 2, 1);
        let m = q.mutate(0);
        assert_eq!(m.b(1, 2), 0);
        assert_eq!(m.b(0, 1), 1);
        assert_eq!(m.b(2, 0), 1);
        // and mutation is still involutive despite the dropped composite
        assert_eq!(m.mutate(0), q);
    }

    #[test]
    fn canonical_form_detects_isomorphism() {
        // two relabelings of the oriented triangle
        let mut t1 = Quiver::empty(3, 0);
        t1.add_arrow(0, 1, 1);
        t1.add_arrow(1, 2, 1);
        t1.add_arrow(2, 0, 1);
        let mut t2 = Quiver::empty(3, 0);
        t2.add_arrow(2, 1, 1);
        t2.add_arrow(1, 0, 1);
        t2.add_arrow(0, 2, 1);
        assert!(t1.is_isomorphic(&t2));
        // the path is not isomorphic to the triangle
        assert!(!t1.is_isomorphic(&a3_path()));
        // opposite of the path is isomorphic to the path (reverse labels)
        assert!(a3_path().is_isomorphic(&a3_path().opposite()));
        // but an oriented triangle with one doubled arrow is chiral
        let mut d = Quiver::empty(3, 0);
        d.add_arrow(0, 1, 2);
        d.add_arrow(1, 2, 1);
        d.add_arrow(2, 0, 1);
        assert!(d.is_isomorphic(&d));
    }

    #[test]
    fn canonical_form_respects_partition() {
        // same underlying arrows, different frozen marking
        let mut q1 = Quiver::empty(1, 1);
        q1.add_arrow(0, 1, 1);
        let mut q2 = Quiver::empty(2, 0);
        q2.add_arrow(0, 1, 1);
        assert_ne!(q1.canonical_form(), q2.canonical_form());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let mut q = Quiver::empty(2, 1);
        q.add_arrow(0, 1, 2);
        q.add_arrow(2, 0, 1);
        let j = q.to_json();
        let q2 = Quiver::from_json(&j).unwrap();
        assert_eq!(q, q2);
        let bad = QuiverJson { n_mutable: 1, n_frozen: 2, arrows: vec![(2, 3, 1)] };
        assert!(matches!(Quiver::from_json(&bad), Err(QuiverError::FrozenFrozenArrow(2, 3))));
        let bad = QuiverJson { n_mutable: 1, n_frozen: 0, arrows: vec![(1, 2, 1)] };
        assert!(Quiver::from_json(&bad).is_err());
    }
}
