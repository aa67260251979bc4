//! SL3 tensor diagrams in a marked disk: skein reduction to the non-elliptic
//! basis, arborization, evaluation by epsilon-tensor contraction, and
//! compatibility of webs via superimposed products.
//!
//! Diagrams are combinatorial maps: every vertex carries a clockwise cyclic
//! list of darts (edge ends). Boundary vertices 1..n sit clockwise on the
//! disk boundary; their rotation lists are linear, anchored so that the first
//! entry is the edge nearest the next boundary vertex. Planarity of a
//! rotation system is checked with the Euler formula on the map augmented by
//! the boundary arcs.

use crate::exact::{q_int, Monomial, MultiPoly, Q};
use crate::grassmannian::Space;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

/// A dart is one end of an edge: dart `2e` sits at `ends[e][0]`, dart `2e+1`
/// at `ends[e][1]`.
pub type Dart = usize;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Color {
    Boundary,
    Black,
    White,
    Crossing,
}

#[derive(Error, Debug)]
pub enum WebError {
    #[error("invalid diagram: {0}")]
    Invalid(String),
    #[error("web JSON parse error: {0}")]
    Parse(String),
    #[error("reduction exceeded its step budget")]
    Budget,
    #[error("diagram has a component not attached to the boundary")]
    Detached,
}

#[derive(Clone, Debug)]
pub struct Diagram {
    pub n: usize,
    colors: Vec<Color>,
    ends: Vec<[usize; 2]>,
    rot: Vec<Vec<Dart>>,
    pub free_loops: usize,
}

impl Diagram {
    pub fn new(n: usize) -> Diagram {
        Diagram {
            n,
            colors: vec![Color::Boundary; n],
            ends: Vec::new(),
            rot: vec![Vec::new(); n],
            free_loops: 0,
        }
    }

    pub fn add_vertex(&mut self, color: Color) -> usize {
        self.colors.push(color);
        self.rot.push(Vec::new());
        self.colors.len() - 1
    }

    /// Append an edge; its darts are pushed onto the end of both rotation
    /// lists, so the caller controls the embedding by insertion order.
    pub fn add_edge(&mut self, u: usize, v: usize) -> usize {
        let e = self.ends.len();
        self.ends.push([u, v]);
        self.rot[u].push(2 * e);
        self.rot[v].push(2 * e + 1);
        e
    }

    /// Replace the stored clockwise rotation at a vertex. The list must be a
    /// permutation of the darts incident to the vertex.
    pub fn set_rotation(&mut self, v: usize, rot: Vec<Dart>) {
        self.rot[v] = rot;
    }

    pub fn n_vertices(&self) -> usize {
        self.colors.len()
    }

    pub fn n_edges(&self) -> usize {
        self.ends.len()
    }

    pub fn color(&self, v: usize) -> Color {
        self.colors[v]
    }

    pub fn rotation(&self, v: usize) -> &[Dart] {
        &self.rot[v]
    }

    pub fn edge_ends(&self, e: usize) -> [usize; 2] {
        self.ends[e]
    }

    pub fn dart_vertex(&self, d: Dart) -> usize {
        self.ends[d >> 1][d & 1]
    }

    fn n_crossings(&self) -> usize {
        self.colors.iter().filter(|c| **c == Color::Crossing).count()
    }

    pub fn n_interior(&self) -> usize {
        self.colors.len() - self.n
    }

    /// A tripod: one white interior vertex joined to boundary vertices
    /// i < j < k (1-based). Evaluates to the Plucker coordinate Delta_{ijk}.
    pub fn tripod(n: usize, legs: [usize; 3]) -> Diagram {
        assert!(legs[0] < legs[1] && legs[1] < legs[2] && legs[2] <= n && legs[0] >= 1);
        let mut d = Diagram::new(n);
        let u = d.add_vertex(Color::White);
        for &j in &legs {
            d.add_edge(j - 1, u);
        }
        // rotation at u must read (i, j, k) clockwise for a positive sign
        d
    }

    /// The two quadratic cluster variables of Gr(3,6) as webs: a black
    /// center joined to three white forks, each fork grabbing a consecutive
    /// pair of boundary vertices. `shift` moves the pairs from
    /// {12}{34}{56} to {23}{45}{61}; the invariant is
    /// eps((v.wedge.v)*, (v.wedge.v)*, (v.wedge.v)*) on the three pairs.
    pub fn quadratic_gr36(shift: bool) -> Diagram {
        let mut d = Diagram::new(6);
        let center = d.add_vertex(Color::Black);
        let s = if shift { 1 } else { 0 };
        for g in 0..3 {
            let w = d.add_vertex(Color::White);
            let p = (2 * g + s) % 6;
            let q = (2 * g + 1 + s) % 6;
            let lp = d.add_edge(p, w);
            let lq = d.add_edge(q, w);
            let cb = d.add_edge(w, center);
            // clockwise at the fork: earlier boundary vertex, later one, center
            d.rot[w] = vec![2 * lp + 1, 2 * lq + 1, 2 * cb];
        }
        d
    }

    /// The single-cycle web on nine boundary vertices: a hexagonal interior
    /// cycle with three tripod arms. The prototypical non-elliptic web that
    /// is indecomposable yet not arborizable.
    pub fn single_cycle_gr39() -> Diagram {
        let mut d = Diagram::new(9);
        let a = d.add_vertex(Color::Black);
        let b = d.add_vertex(Color::White);
        let c = d.add_vertex(Color::Black);
        let dd = d.add_vertex(Color::White);
        let e = d.add_vertex(Color::Black);
        let f = d.add_vertex(Color::White);
        let g = d.add_vertex(Color::White);
        let h = d.add_vertex(Color::White);
        let i = d.add_vertex(Color::White);
        let hex = [a, b, c, dd, e, f];
        let mut cyc = Vec::new();
        for t in 0..6 {
            cyc.push(d.add_edge(hex[t], hex[(t + 1) % 6]));
        }
        let ag = d.add_edge(a, g);
        let ch = d.add_edge(c, h);
        let ei = d.add_edge(e, i);
        let bv = d.add_edge(b, 0); // v1
        let dv = d.add_edge(dd, 6); // v7
        let fv = d.add_edge(f, 3); // v4
        let g2 = d.add_edge(g, 1); // v2
        let g3 = d.add_edge(g, 2); // v3
        let h8 = d.add_edge(h, 7); // v8
        let h9 = d.add_edge(h, 8); // v9
        let i5 = d.add_edge(i, 4); // v5
        let i6 = d.add_edge(i, 5); // v6
        // clockwise rotations; traversing the hexagon a -> b -> ... -> f runs
        // counterclockwise in the disk, so the clockwise hexagon neighbor of
        // hex[t] is hex[t - 1]
        d.rot[a] = vec![2 * ag, 2 * cyc[5] + 1, 2 * cyc[0]];
        d.rot[c] = vec![2 * ch, 2 * cyc[1] + 1, 2 * cyc[2]];
        d.rot[e] = vec![2 * ei, 2 * cyc[3] + 1, 2 * cyc[4]];
        d.rot[b] = vec![2 * cyc[1], 2 * bv, 2 * cyc[0] + 1];
        d.rot[dd] = vec![2 * cyc[3], 2 * dv, 2 * cyc[2] + 1];
        d.rot[f] = vec![2 * cyc[5], 2 * fv, 2 * cyc[4] + 1];
        d.rot[g] = vec![2 * g3, 2 * ag + 1, 2 * g2];
        d.rot[h] = vec![2 * h9, 2 * ch + 1, 2 * h8];
        d.rot[i] = vec![2 * i6, 2 * ei + 1, 2 * i5];
        d
    }

    /// Faces of the map augmented with the boundary arcs, as dart cycles.
    /// Arc darts are encoded as indices >= 2 * n_edges; callers that match
    /// local patterns must check for them, since a face touching an arc is a
    /// boundary region of the disk, not an internal face.
    fn raw_faces(&self) -> Vec<Vec<Dart>> {
        let _ne = self.ends.len();
        // augmented rotation: arcs j -> j+1 get darts 2(ne+j), 2(ne+j)+1
        let mut rot: Vec<Vec<Dart>> = self.rot.clone();
        let mut ends: Vec<[usize; 2]> = self.ends.clone();
        for j in 0..self.n {
            let e = ends.len();
            ends.push([j, (j + 1) % self.n]);
            rot[j].insert(0, 2 * e);
            rot[(j + 1) % self.n].push(2 * e + 1);
        }
        let _vert = |d: Dart| ends[d >> 1][d & 1];
        let total = 2 * ends.len();
        let mut pos: HashMap<Dart, (usize, usize)> = HashMap::new();
        for (v, r) in rot.iter().enumerate() {
            for (i, &d) in r.iter().enumerate() {
                pos.insert(d, (v, i));
            }
        }
        let mut seen = vec![false; total];
        let mut faces = Vec::new();
        for d0 in 0..total {
            if seen[d0] || !pos.contains_key(&d0) {
                continue;
            }
            let mut cyc = Vec::new();
            let mut d = d0;
            loop {
                seen[d] = true;
                cyc.push(d);
                let o = d ^ 1;
                let (v, i) = pos[&o];
                d = rot[v][(i + 1) % rot[v].len()];
                if d == d0 {
                    break;
                }
            }
            faces.push(cyc);
        }
        faces
    }

    /// Face cycles with the boundary-arc darts filtered out.
    pub fn faces(&self) -> Vec<Vec<Dart>> {
        let ne = self.ends.len();
        self.raw_faces()
            .into_iter()
            .map(|mut f| {
                f.retain(|&d| d < 2 * ne);
                f
            })
            .collect()
    }

    /// Structural validation: color placement, valences, bipartiteness,
    /// rotation completeness, and the Euler planarity check for the rotation
    /// system (V - E + F = 1 + #components on the arc-augmented map).
    pub fn validate(&self) -> Result<(), WebError> {
        let bad = |m: String| Err(WebError::Invalid(m));
        if self.colors.len() < self.n || self.rot.len() != self.colors.len() {
            return bad("vertex bookkeeping out of sync".into());
        }
        for v in 0..self.colors.len() {
            let c = self.colors[v];
            if (v < self.n) != (c == Color::Boundary) {
                return bad(format!("vertex {} has misplaced boundary color", v));
            }
            let deg = self.rot[v].len();
            match c {
                Color::Black | Color::White if deg != 3 => {
                    return bad(format!("interior vertex {} is not trivalent", v))
                }
                Color::Crossing if deg != 4 => {
                    return bad(format!("crossing {} is not 4-valent", v))
                }
                _ => {}
            }
            for &d in &self.rot[v] {
                if d >> 1 >= self.ends.len() || self.dart_vertex(d) != v {
                    return bad(format!("rotation at {} lists a foreign dart", v));
                }
            }
        }
        let mut listed = vec![0usize; 2 * self.ends.len()];
        for r in &self.rot {
            for &d in r {
                listed[d] += 1;
            }
        }
        if listed.iter().any(|&c| c != 1) {
            return bad("every dart must appear exactly once in a rotation".into());
        }
        for e in 0..self.ends.len() {
            let [u, v] = self.ends[e];
            let cu = self.colors[u];
            let cv = self.colors[v];
            // interior edges join opposite colors; boundary vectors always
            // plug into white vertices in this convention (a black-attached
            // boundary leg would contract two epsilon slots of the same
            // variance and the result would not be an invariant)
            if cu == Color::Crossing || cv == Color::Crossing {
                continue;
            }
            let white = |c: Color| c == Color::White;
            let blackish = |c: Color| c == Color::Black || c == Color::Boundary;
            if !(white(cu) && blackish(cv)) && !(white(cv) && blackish(cu)) {
                return bad(format!("edge {} is not bipartite", e));
            }
        }
        // Euler check on the augmented map
        let nv = self.colors.len();
        let ne = self.ends.len() + self.n;
        let nf = self.raw_faces().len();
        // components of the augmented graph
        let mut comp: Vec<usize> = (0..nv).collect();
        fn find(c: &mut Vec<usize>, mut x: usize) -> usize {
            while c[x] != x {
                c[x] = c[c[x]];
                x = c[x];
            }
            x
        }
        for e in 0..self.ends.len() {
            let (a, b) = (find(&mut comp, self.ends[e][0]), find(&mut comp, self.ends[e][1]));
            comp[a] = b;
        }
        for j in 0..self.n {
            let (a, b) = (find(&mut comp, j), find(&mut comp, (j + 1) % self.n));
            comp[a] = b;
        }
        let ncomp = (0..nv).filter(|&v| find(&mut comp, v) == v).count().max(1);
        if nv + nf != ne + 1 + ncomp {
            return bad(format!(
                "rotation system is not planar: V={} E={} F={} C={}",
                nv, ne, nf, ncomp
            ));
        }
        Ok(())
    }

    /// Kuperberg non-ellipticity: planar, no free loops, no 2-cycles based at
    /// a boundary vertex, and every interior face bounded by >= 6 sides.
    pub fn is_non_elliptic(&self) -> bool {
        if self.n_crossings() > 0 || self.free_loops > 0 {
            return false;
        }
        // boundary 2-cycles: two parallel edges from a boundary vertex
        for j in 0..self.n {
            let mut seen = BTreeSet::new();
            for &d in &self.rot[j] {
                if !seen.insert(self.dart_vertex(d ^ 1)) {
                    return false;
                }
            }
        }
        let ne = self.ends.len();
        for f in self.raw_faces() {
            let internal = !f.is_empty()
                && f.iter().all(|&d| d < 2 * ne && self.dart_vertex(d) >= self.n);
            if internal && f.len() < 6 {
                return false;
            }
        }
        true
    }

    /// Canonical boundary-anchored key: interior vertices are relabeled by
    /// first-visit order of a traversal that starts from boundary vertex 1
    /// and respects rotation orders, so two isotopic diagrams agree.
    pub fn canonical_key(&self) -> Result<String, WebError> {
        let mut order: Vec<Option<usize>> = vec![None; self.colors.len()];
        let mut anchor: Vec<Dart> = vec![0; self.colors.len()];
        let mut queue: Vec<Dart> = Vec::new();
        let mut next_id = 0usize;
        let mut head = 0usize;
        for j in 0..self.n {
            queue.extend(self.rot[j].iter().copied());
        }
        while head < queue.len() {
            let d = queue[head];
            head += 1;
            let v = self.dart_vertex(d ^ 1);
            if v < self.n || order[v].is_some() {
                continue;
            }
            order[v] = Some(next_id);
            anchor[v] = d ^ 1;
            next_id += 1;
            let pos = self.rot[v].iter().position(|&x| x == d ^ 1).unwrap();
            let len = self.rot[v].len();
            for i in 1..len {
                queue.push(self.rot[v][(pos + i) % len]);
            }
        }
        if (self.n..self.colors.len()).any(|v| order[v].is_none()) {
            return Err(WebError::Detached);
        }
        let token = |v: usize| -> String {
            if v < self.n {
                format!("b{}", v + 1)
            } else {
                format!("i{}", order[v].unwrap())
            }
        };
        let mut out = format!("n{};L{};", self.n, self.free_loops);
        for j in 0..self.n {
            out.push('[');
            for &d in &self.rot[j] {
                out.push_str(&token(self.dart_vertex(d ^ 1)));
                out.push(',');
            }
            out.push(']');
        }
        let mut interior: Vec<usize> = (self.n..self.colors.len()).collect();
        interior.sort_by_key(|&v| order[v].unwrap());
        for v in interior {
            out.push(match self.colors[v] {
                Color::Black => 'B',
                Color::White => 'W',
                Color::Crossing => 'X',
                Color::Boundary => unreachable!(),
            });
            out.push('[');
            let pos = self.rot[v].iter().position(|&x| x == anchor[v]).unwrap();
            let len = self.rot[v].len();
            for i in 0..len {
                out.push_str(&token(self.dart_vertex(self.rot[v][(pos + i) % len] ^ 1)));
                out.push(',');
            }
            out.push(']');
        }
        Ok(out)
    }

    /// Evaluate the invariant [T] on the generic k=3 configuration of `sp`:
    /// sum over edge labelings in {1,2,3}, epsilon at black vertices, dual
    /// epsilon at white vertices (both read in rotation order), identity
    /// pairings at crossings, column entries at the boundary.
    pub fn evaluate(&self, sp: &Space) -> MultiPoly {
        assert_eq!(sp.k, 3, "webs evaluate on 3-row configurations");
        assert_eq!(sp.n, self.n, "boundary count must match the configuration");
        let ne = self.ends.len();
        // edge processing order: breadth-first so constraints bind early
        let mut edge_order = Vec::new();
        let mut seen_e = vec![false; ne];
        let mut seen_v = vec![false; self.colors.len()];
        let mut stack: Vec<usize> = Vec::new();
        for v0 in 0..self.colors.len() {
            if seen_v[v0] {
                continue;
            }
            stack.push(v0);
            while let Some(v) = stack.pop() {
                if seen_v[v] {
                    continue;
                }
                seen_v[v] = true;
                for &d in &self.rot[v] {
                    let e = d >> 1;
                    if !seen_e[e] {
                        seen_e[e] = true;
                        edge_order.push(e);
                    }
                    stack.push(self.dart_vertex(d ^ 1));
                }
            }
        }
        let mut labels = vec![0u8; ne];
        let mut acc: BTreeMap<Monomial, Q> = BTreeMap::new();
        let nvars = sp.ring.n_vars();
        self.eval_rec(&mut labels, &edge_order, 0, sp, nvars, &mut acc);
        let mut poly = MultiPoly::from_terms(&sp.ring, acc);
        for _ in 0..self.free_loops {
            poly = poly.scale(&q_int(3));
        }
        poly
    }

    fn vertex_ok(&self, v: usize, labels: &[u8]) -> bool {
        match self.colors[v] {
            Color::Boundary => true,
            Color::Black | Color::White => {
                let mut mask = 0u8;
                for &d in &self.rot[v] {
                    let l = labels[d >> 1];
                    if l > 0 {
                        if mask & (1 << l) != 0 {
                            return false;
                        }
                        mask |= 1 << l;
                    }
                }
                true
            }
            Color::Crossing => {
                for s in 0..2 {
                    let a = labels[self.rot[v][s] >> 1];
                    let b = labels[self.rot[v][s + 2] >> 1];
                    if a > 0 && b > 0 && a != b {
                        return false;
                    }
                }
                true
            }
        }
    }

    fn eval_rec(
        &self,
        labels: &mut Vec<u8>,
        order: &[usize],
        i: usize,
        sp: &Space,
        nvars: usize,
        acc: &mut BTreeMap<Monomial, Q>,
    ) {
        if i == order.len() {
            let mut sign = 1i64;
            let mut exps = vec![0u32; nvars];
            for v in 0..self.colors.len() {
                match self.colors[v] {
                    Color::Black | Color::White => {
                        let l: Vec<u8> = self.rot[v].iter().map(|&d| labels[d >> 1]).collect();
                        sign *= eps3(l[0], l[1], l[2]);
                    }
                    Color::Boundary => {
                        for &d in &self.rot[v] {
                            let a = labels[d >> 1] as usize;
                            exps[(a - 1) * self.n + v] += 1;
                        }
                    }
                    Color::Crossing => {}
                }
            }
            debug_assert!(sign != 0);
            let m = Monomial(exps);
            let cur = acc.entry(m).or_insert_with(Q::zero);
            *cur += q_int(sign);
            return;
        }
        let e = order[i];
        for l in 1..=3u8 {
            labels[e] = l;
            if self.vertex_ok(self.ends[e][0], labels) && self.vertex_ok(self.ends[e][1], labels) {
                self.eval_rec(labels, order, i + 1, sp, nvars, acc);
            }
        }
        labels[e] = 0;
    }

    /// Follow the strand entering a crossing at dart `d` (a dart at the
    /// crossing) outward through further crossings. Returns the color of the
    /// colored endpoint, or None if the strand closes up.
    fn strand_end(&self, d: Dart) -> Option<Color> {
        let mut cur = d;
        loop {
            let o = cur ^ 1;
            let v = self.dart_vertex(o);
            if self.colors[v] != Color::Crossing {
                return Some(self.colors[v]);
            }
            let pos = self.rot[v].iter().position(|&x| x == o).unwrap();
            cur = self.rot[v][(pos + 2) % 4];
            if cur == d {
                return None;
            }
        }
    }
}

fn eps3(a: u8, b: u8, c: u8) -> i64 {
    match (a, b, c) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1,
        (3, 2, 1) | (2, 1, 3) | (1, 3, 2) => -1,
        _ => 0,
    }
}

// ---------------------------------------------------------------------------
// Local surgery: patches
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
enum Port {
    /// The surviving half of the edge whose dart at a killed vertex is given.
    E(Dart),
    /// Slot `s` of new vertex `i`.
    S(usize, usize),
}

#[derive(Clone, Debug)]
struct Patch {
    kill: Vec<usize>,
    new_colors: Vec<Color>,
    new_arity: Vec<usize>,
    joins: Vec<(Port, Port)>,
}

impl Diagram {
    fn apply_patch(&self, p: &Patch) -> Result<Diagram, WebError> {
        let killed: BTreeSet<usize> = p.kill.iter().copied().collect();
        let nv_old = self.colors.len();
        let mut vmap: Vec<Option<usize>> = vec![None; nv_old];
        let mut colors = Vec::new();
        let mut next = 0usize;
        for v in 0..nv_old {
            if !killed.contains(&v) {
                vmap[v] = Some(next);
                colors.push(self.colors[v]);
                next += 1;
            }
        }
        let new_base = next;
        colors.extend(p.new_colors.iter().copied());
        // terminal ids: old darts then new-vertex slots
        let nd = 2 * self.ends.len();
        let mut slot_off = Vec::new();
        let mut total = nd;
        for &a in &p.new_arity {
            slot_off.push(total);
            total += a;
        }
        let term = |port: &Port| -> usize {
            match *port {
                Port::E(d) => d,
                Port::S(i, s) => slot_off[i] + s,
            }
        };
        // chain endpoints are first recorded in a provisional numbering (old
        // ids for kept vertices, nv_old + i for new vertex i) and compacted
        // at the end, since the two ranges can otherwise collide
        let term_vertex = |t: usize| -> usize {
            if t < nd {
                self.dart_vertex(t)
            } else {
                let i = slot_off.iter().rposition(|&o| o <= t).unwrap();
                nv_old + i
            }
        };
        let mut join_link: HashMap<usize, usize> = HashMap::new();
        for (a, b) in &p.joins {
            if let Port::E(d) = a {
                assert!(killed.contains(&self.dart_vertex(*d)));
            }
            if let Port::E(d) = b {
                assert!(killed.contains(&self.dart_vertex(*d)));
            }
            let (ta, tb) = (term(a), term(b));
            assert!(join_link.insert(ta, tb).is_none(), "terminal joined twice");
            assert!(join_link.insert(tb, ta).is_none(), "terminal joined twice");
        }
        let is_anchor = |t: usize| -> bool {
            t >= nd || !killed.contains(&self.dart_vertex(t))
        };
        let mut visited = vec![false; total];
        let mut term_dart: HashMap<usize, Dart> = HashMap::new();
        let mut ends: Vec<[usize; 2]> = Vec::new();
        // walk chains from anchors
        for start in 0..total {
            if visited[start] || !is_anchor(start) {
                continue;
            }
            if start >= nd && !join_link.contains_key(&start) {
                return Err(WebError::Invalid("unjoined slot in patch".into()));
            }
            visited[start] = true;
            let mut cur = start;
            let mut via_join = start >= nd; // slots step through their join first
            let end = loop {
                let next_t = if via_join {
                    match join_link.get(&cur) {
                        Some(&t) => t,
                        None => break None, // dead end
                    }
                } else {
                    cur ^ 1 // follow the edge (darts only)
                };
                visited[next_t] = true;
                if is_anchor(next_t) {
                    break Some(next_t);
                }
                // interior terminal: alternate link type
                via_join = !via_join;
                // arriving at a killed dart via an edge means leave via join,
                // and vice versa; slots are never interior
                cur = next_t;
            };
            match end {
                Some(t2) => {
                    let e = ends.len();
                    ends.push([term_vertex(start), term_vertex(t2)]);
                    term_dart.insert(start, 2 * e);
                    term_dart.insert(t2, 2 * e + 1);
                }
                None => {
                    return Err(WebError::Invalid("patch leaves a dangling edge".into()));
                }
            }
        }
        // leftover components: dead chains (deleted) and closed loops
        let mut free_loops = self.free_loops;
        for d0 in 0..nd {
            if visited[d0] || is_anchor(d0) {
                continue;
            }
            // traverse component
            let mut comp = Vec::new();
            let mut stack = vec![d0];
            while let Some(t) = stack.pop() {
                if t >= nd || visited[t] {
                    continue;
                }
                visited[t] = true;
                comp.push(t);
                let o = t ^ 1;
                if !is_anchor(o) && !visited[o] {
                    stack.push(o);
                }
                if let Some(&j) = join_link.get(&t) {
                    if !visited[j] {
                        stack.push(j);
                    }
                }
            }
            // closed iff every terminal in the component has both links
            let closed = comp.iter().all(|&t| {
                join_link.contains_key(&t) && !is_anchor(t ^ 1)
            });
            if closed {
                free_loops += 1;
            }
        }
        // compact the provisional endpoint numbering
        for e in ends.iter_mut() {
            for side in 0..2 {
                let v = e[side];
                e[side] = if v < nv_old {
                    vmap[v].expect("chain anchored at killed vertex")
                } else {
                    new_base + (v - nv_old)
                };
            }
        }
        let mut rot: Vec<Vec<Dart>> = vec![Vec::new(); colors.len()];
        for v in 0..nv_old {
            if let Some(nv) = vmap[v] {
                for &d in &self.rot[v] {
                    let nd2 = *term_dart
                        .get(&d)
                        .ok_or_else(|| WebError::Invalid("kept dart lost by patch".into()))?;
                    rot[nv].push(nd2);
                }
            }
        }
        for (i, &a) in p.new_arity.iter().enumerate() {
            for s in 0..a {
                let t = slot_off[i] + s;
                let nd2 = *term_dart
                    .get(&t)
                    .ok_or_else(|| WebError::Invalid("slot lost by patch".into()))?;
                rot[new_base + i].push(nd2);
            }
        }
        Ok(Diagram { n: self.n, colors, ends, rot, free_loops })
    }
}

// ---------------------------------------------------------------------------
// Skein reduction
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Step {
    /// Degeneracy: the diagram is zero.
    Zero,
    /// A free loop contributes a factor 3.
    Loop,
    /// One or two successor diagrams with coefficients.
    Split(Vec<(Q, Patch)>),
}

impl Diagram {
    /// Third dart at an interior trivalent vertex, given the two face darts.
    fn third_dart(&self, v: usize, a: Dart, b: Dart) -> Dart {
        *self.rot[v].iter().find(|&&d| d != a && d != b).unwrap()
    }

    fn candidate_steps(&self) -> Vec<(usize, Step)> {
        // priority ranks: 0 degeneracy, 1 loop, 2 bigon, 3 square, 4 crossing
        let mut out = Vec::new();
        if self.free_loops > 0 {
            out.push((1, Step::Loop));
        }
        let nreal = 2 * self.ends.len();
        for f in self.raw_faces() {
            if f.iter().any(|&d| d >= nreal) {
                continue; // boundary region, never a reducible face
            }
            if f.len() == 2 {
                let (d0, d1) = (f[0], f[1]);
                if (d0 >> 1) == (d1 >> 1) {
                    continue; // self-loop artifact, not a bigon
                }
                let u = self.dart_vertex(d0);
                let v = self.dart_vertex(d1);
                let cu = self.colors[u];
                let cv = self.colors[v];
                if cu == Color::Crossing || cv == Color::Crossing {
                    continue;
                }
                if cu == Color::Boundary || cv == Color::Boundary {
                    out.push((0, Step::Zero));
                    continue;
                }
                // interior bigon between u and v; the face darts are one dart
                // of each parallel edge. Dangling external darts:
                let eu = self.third_dart(u, d0, d1 ^ 1);
                let ev = self.third_dart(v, d1, d0 ^ 1);
                out.push((
                    2,
                    Step::Split(vec![(
                        q_int(-2),
                        Patch {
                            kill: vec![u, v],
                            new_colors: vec![],
                            new_arity: vec![],
                            joins: vec![(Port::E(eu), Port::E(ev))],
                        },
                    )]),
                ));
            } else if f.len() == 4 {
                let corners: Vec<usize> = f.iter().map(|&d| self.dart_vertex(d)).collect();
                if corners.iter().any(|&v| {
                    self.colors[v] == Color::Crossing || self.colors[v] == Color::Boundary
                }) {
                    continue;
                }
                if corners.iter().collect::<BTreeSet<_>>().len() != 4 {
                    continue;
                }
                // external dart at corner i: not edge(f[i]) and not edge(f[i-1])
                let ext: Vec<Dart> = (0..4)
                    .map(|i| self.third_dart(corners[i], f[i], f[(i + 3) % 4] ^ 1))
                    .collect();
                let patch = |pairs: [(usize, usize); 2]| Patch {
                    kill: corners.clone(),
                    new_colors: vec![],
                    new_arity: vec![],
                    joins: pairs
                        .iter()
                        .map(|&(a, b)| (Port::E(ext[a]), Port::E(ext[b])))
                        .collect(),
                };
                out.push((
                    3,
                    Step::Split(vec![
                        (Q::one(), patch([(0, 1), (2, 3)])),
                        (Q::one(), patch([(1, 2), (3, 0)])),
                    ]),
                ));
            }
        }
        for c in 0..self.colors.len() {
            if self.colors[c] != Color::Crossing {
                continue;
            }
            if let Some(step) = self.crossing_step(c) {
                out.push((4, step));
            }
        }
        out
    }

    /// Resolve crossing `c` with the crossing-removal relation. Strand flow
    /// runs from black toward white endpoints; closed strands get a
    /// consistent arbitrary orientation.
    fn crossing_step(&self, c: usize) -> Option<Step> {
        let g: Vec<Dart> = self.rot[c].clone();
        let mut flow_out = [None::<bool>; 4];
        for i in 0..4 {
            if flow_out[i].is_some() {
                continue;
            }
            match self.strand_end(g[i]) {
                Some(Color::White) => {
                    flow_out[i] = Some(true);
                    flow_out[(i + 2) % 4] = Some(false);
                }
                Some(_) => {
                    flow_out[i] = Some(false);
                    flow_out[(i + 2) % 4] = Some(true);
                }
                None => {
                    // closed strand: orient it by walking and recording every
                    // pass through this crossing
                    let mut cur = g[i];
                    flow_out[i] = Some(true);
                    loop {
                        let o = cur ^ 1;
                        let v = self.dart_vertex(o);
                        debug_assert_eq!(self.colors[v], Color::Crossing);
                        let pos = self.rot[v].iter().position(|&x| x == o).unwrap();
                        let nxt = self.rot[v][(pos + 2) % 4];
                        if v == c {
                            let pi = self.rot[c].iter().position(|&x| x == o).unwrap();
                            flow_out[pi] = Some(false);
                            let po = (pi + 2) % 4;
                            flow_out[po] = Some(true);
                        }
                        cur = nxt;
                        if cur == g[i] {
                            break;
                        }
                    }
                }
            }
        }
        let flow: Vec<bool> = flow_out.iter().map(|f| f.unwrap()).collect();
        let outs: Vec<usize> = (0..4).filter(|&i| flow[i]).collect();
        if outs.len() != 2 || outs[0].abs_diff(outs[1]) == 2 {
            return None; // inconsistent strand coloring; leave for validation
        }
        // term 1: the unique adjacent pairing joining inflow to outflow
        let pairing: [(usize, usize); 2] = if flow[0] != flow[1] {
            [(0, 1), (2, 3)]
        } else {
            [(1, 2), (3, 0)]
        };
        let term1 = Patch {
            kill: vec![c],
            new_colors: vec![],
            new_arity: vec![],
            joins: pairing
                .iter()
                .map(|&(a, b)| (Port::E(g[a]), Port::E(g[b])))
                .collect(),
        };
        // term 2: black vertex on the two outflow germs, white on the two
        // inflow germs, joined by an edge; o2 = cw-successor of o1
        let (o1, o2) = if (outs[0] + 1) % 4 == outs[1] {
            (outs[0], outs[1])
        } else {
            (outs[1], outs[0])
        };
        let ins: Vec<usize> = (0..4).filter(|&i| !flow[i]).collect();
        let (i1, i2) = if (ins[0] + 1) % 4 == ins[1] {
            (ins[0], ins[1])
        } else {
            (ins[1], ins[0])
        };
        let term2 = Patch {
            kill: vec![c],
            new_colors: vec![Color::Black, Color::White],
            new_arity: vec![3, 3],
            joins: vec![
                (Port::E(g[o1]), Port::S(0, 0)),
                (Port::E(g[o2]), Port::S(0, 1)),
                (Port::S(0, 2), Port::S(1, 2)),
                (Port::E(g[i1]), Port::S(1, 0)),
                (Port::E(g[i2]), Port::S(1, 1)),
            ],
        };
        Some(Step::Split(vec![(Q::one(), term1), (Q::one(), term2)]))
    }
}

/// A finite formal sum of non-elliptic webs, keyed canonically.
#[derive(Clone, Debug)]
pub struct WebExpr {
    pub terms: BTreeMap<String, (Q, Diagram)>,
}

impl WebExpr {
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Symbolic evaluation of the sum.
    pub fn evaluate(&self, sp: &Space) -> MultiPoly {
        let mut acc = MultiPoly::zero(&sp.ring);
        for (c, d) in self.terms.values() {
            acc = acc.add(&d.evaluate(sp).scale(c));
        }
        acc
    }
}

/// Reduce a tensor diagram to its unique expansion in the non-elliptic web
/// basis, applying skein relations (degeneracy, loop x3, bigon x(-2), square,
/// crossing removal) until none applies.
pub fn reduce(d: &Diagram) -> Result<WebExpr, WebError> {
    reduce_seeded(d, None)
}

/// Run a seeded random reduction walk on `d` and verify that every single
/// applied skein step preserves the exact symbolic value of the term it
/// rewrites: the evaluation of the diagram before the step must equal the
/// sum of the evaluations of the replacement diagrams, with coefficients.
/// Returns the number of steps verified, or an error naming the failing step.
pub fn verify_step_invariance(
    d: &Diagram,
    sp: &Space,
    seed: u64,
    max_steps: usize,
) -> Result<usize, WebError> {
    d.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work: Vec<Diagram> = vec![d.clone()];
    let mut verified = 0usize;
    while let Some(cur) = work.pop() {
        if verified >= max_steps {
            break;
        }
        let steps = cur.candidate_steps();
        if steps.is_empty() {
            continue;
        }
        let pick = rng.gen_range(0..steps.len());
        let before = cur.evaluate(sp);
        let mut after = MultiPoly::zero(&sp.ring);
        match &steps[pick].1 {
            Step::Zero => {}
            Step::Loop => {
                let mut nxt = cur.clone();
                nxt.free_loops -= 1;
                after = after.add(&nxt.evaluate(sp).scale(&q_int(3)));
                work.push(nxt);
            }
            Step::Split(parts) => {
                for (q, patch) in parts {
                    let nxt = cur.apply_patch(patch)?;
                    after = after.add(&nxt.evaluate(sp).scale(q));
                    work.push(nxt);
                }
            }
        }
        if !before.sub(&after).is_zero() {
            return Err(WebError::Invalid(format!(
                "skein step {} (rank {}) changed the invariant",
                verified, steps[pick].0
            )));
        }
        verified += 1;
    }
    Ok(verified)
}

/// Like `reduce` but choosing uniformly among all applicable skein steps,
/// for confluence testing. `None` picks the best-priority first match.
pub fn reduce_seeded(d: &Diagram, seed: Option<u64>) -> Result<WebExpr, WebError> {
    d.validate()?;
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut work: Vec<(Q, Diagram)> = vec![(Q::one(), d.clone())];
    let mut terms: BTreeMap<String, (Q, Diagram)> = BTreeMap::new();
    let mut budget = 1_000_000usize;
    while let Some((coeff, cur)) = work.pop() {
        if budget == 0 {
            return Err(WebError::Budget);
        }
        budget -= 1;
        let mut steps = cur.candidate_steps();
        if steps.is_empty() {
            if !cur.is_non_elliptic() {
                return Err(WebError::Invalid(
                    "reduction stalled on a diagram that is not a non-elliptic web".into(),
                ));
            }
            let key = cur.canonical_key()?;
            let entry = terms.entry(key).or_insert_with(|| (Q::zero(), cur.clone()));
            entry.0 += coeff;
            continue;
        }
        steps.sort_by_key(|(rank, _)| *rank);
        let pick = match rng.as_mut() {
            Some(r) => r.gen_range(0..steps.len()),
            None => 0,
        };
        match &steps[pick].1 {
            Step::Zero => {}
            Step::Loop => {
                let mut nxt = cur.clone();
                nxt.free_loops -= 1;
                work.push((coeff * q_int(3), nxt));
            }
            Step::Split(parts) => {
                for (q, patch) in parts {
                    work.push((coeff.clone() * q.clone(), cur.apply_patch(patch)?));
                }
            }
        }
    }
    terms.retain(|_, (c, _)| !c.is_zero());
    Ok(WebExpr { terms })
}

// ---------------------------------------------------------------------------
// Superimposition
// ---------------------------------------------------------------------------

impl Diagram {
    /// Superimpose `other` on top of `self`: `other` is shrunk into the face
    /// beside the boundary arc (n, 1) and its legs run clockwise just inside
    /// the boundary circle, crossing the edges of `self` at each boundary
    /// vertex they pass, then attach at clockwise-later angular positions
    /// than the edges of `self`.
    pub fn superimpose(&self, other: &Diagram) -> Result<Diagram, WebError> {
        if self.n != other.n {
            return Err(WebError::Invalid("boundary counts differ".into()));
        }
        if other.n_crossings() > 0 {
            return Err(WebError::Invalid("the superimposed web must be planar".into()));
        }
        self.validate()?;
        other.validate()?;
        let n = self.n;
        let mut out = Diagram::new(n);
        out.free_loops = self.free_loops + other.free_loops;
        // copy self's vertices
        let mut map1 = vec![0usize; self.colors.len()];
        for v in 0..self.colors.len() {
            map1[v] = if v < n { v } else { out.add_vertex(self.colors[v]) };
        }
        // copy other's interior vertices
        let mut map2 = vec![usize::MAX; other.colors.len()];
        for v in n..other.colors.len() {
            map2[v] = out.add_vertex(other.colors[v]);
        }
        // legs of `other` in bundle order: outermost lanes first
        struct Leg {
            target: usize,    // 0-based boundary vertex
            inner_dart: Dart, // dart at the interior end
        }
        let mut legs: Vec<Leg> = Vec::new();
        for j in 0..n {
            // stored rotation position ascending = inner lanes first, so
            // reverse for bundle (outermost-first) order below
            for &d in other.rot[j].iter().rev() {
                legs.push(Leg { target: j, inner_dart: d ^ 1 });
            }
        }
        legs.sort_by_key(|l| l.target); // stable: keeps reversed tie order
        // crossings: legs[i] crosses every self-edge germ at vertices < target
        // crossing list per (self dart at boundary), ordered outermost first
        let mut per_dart: HashMap<Dart, Vec<usize>> = HashMap::new(); // -> crossing vertex
        let mut per_leg: Vec<Vec<usize>> = vec![Vec::new(); legs.len()];
        let lane_crossing_base = out.colors.len();
        for (li, leg) in legs.iter().enumerate() {
            for j in 0..leg.target {
                for &d in self.rot[j].iter().rev() {
                    let c = out.add_vertex(Color::Crossing);
                    per_dart.entry(d).or_default().push(c);
                    per_leg[li].push(c);
                }
            }
        }
        // build edges; record the new dart replacing each old dart
        let mut dart1: HashMap<Dart, Dart> = HashMap::new();
        // crossing rotation slots: [toward boundary vertex, leg forward,
        // away from boundary vertex, leg backward]
        let mut xrot: Vec<[Dart; 4]> = vec![[usize::MAX; 4]; out.colors.len()];
        let push_edge = |out: &mut Diagram, u: usize, v: usize| -> usize {
            let e = out.ends.len();
            out.ends.push([u, v]);
            e
        };
        // self's edges, subdivided at their boundary germ when crossed
        for e in 0..self.ends.len() {
            let [u, v] = self.ends[e];
            let (bd, bdart) = if self.colors[u] == Color::Boundary {
                (Some(u), 2 * e)
            } else if self.colors[v] == Color::Boundary {
                (Some(v), 2 * e + 1)
            } else {
                (None, 0)
            };
            let crossings = bd.and_then(|_| per_dart.get(&bdart)).cloned().unwrap_or_default();
            if crossings.is_empty() {
                let ne = push_edge(&mut out, map1[u], map1[v]);
                dart1.insert(2 * e, 2 * ne);
                dart1.insert(2 * e + 1, 2 * ne + 1);
            } else {
                let b = self.dart_vertex(bdart);
                let w = self.dart_vertex(bdart ^ 1);
                let mut prev = map1[b];
                for (idx, &c) in crossings.iter().enumerate() {
                    let ne = push_edge(&mut out, prev, c);
                    if idx == 0 {
                        dart1.insert(bdart, 2 * ne);
                    } else {
                        xrot[prev][2] = 2 * ne; // away from boundary
                    }
                    xrot[c][0] = 2 * ne + 1; // toward boundary
                    prev = c;
                }
                let ne = push_edge(&mut out, prev, map1[w]);
                xrot[prev][2] = 2 * ne;
                dart1.insert(bdart ^ 1, 2 * ne + 1);
            }
        }
        // other's interior-interior edges
        let mut dart2: HashMap<Dart, Dart> = HashMap::new();
        for e in 0..other.ends.len() {
            let [u, v] = other.ends[e];
            if other.colors[u] != Color::Boundary && other.colors[v] != Color::Boundary {
                let ne = push_edge(&mut out, map2[u], map2[v]);
                dart2.insert(2 * e, 2 * ne);
                dart2.insert(2 * e + 1, 2 * ne + 1);
            }
        }
        // legs, subdivided along their crossing sequence
        for (li, leg) in legs.iter().enumerate() {
            let u2 = other.dart_vertex(leg.inner_dart);
            let mut prev = map2[u2];
            let mut first = true;
            for &c in &per_leg[li] {
                let ne = push_edge(&mut out, prev, c);
                if first {
                    dart2.insert(leg.inner_dart, 2 * ne);
                    first = false;
                } else {
                    xrot[prev][1] = 2 * ne; // leg forward
                }
                xrot[c][3] = 2 * ne + 1; // leg backward
                prev = c;
            }
            let ne = push_edge(&mut out, prev, leg.target);
            if first {
                dart2.insert(leg.inner_dart, 2 * ne);
            } else {
                xrot[prev][1] = 2 * ne;
            }
            // the boundary-end dart of the leg in `other`
            dart2.insert(leg.inner_dart ^ 1, 2 * ne + 1);
        }
        // rotations
        out.rot = vec![Vec::new(); out.colors.len()];
        for j in 0..n {
            for &d in &self.rot[j] {
                out.rot[j].push(dart1[&d]);
            }
            // attach other's legs in other's stored order (innermost lanes,
            // i.e. angular-earlier positions, first)
            for &d in &other.rot[j] {
                out.rot[j].push(dart2[&d]);
            }
        }
        for v in n..self.colors.len() {
            out.rot[map1[v]] = self.rot[v].iter().map(|d| dart1[d]).collect();
        }
        for v in n..other.colors.len() {
            out.rot[map2[v]] = other.rot[v].iter().map(|d| dart2[d]).collect();
        }
        for c in lane_crossing_base..out.colors.len() {
            out.rot[c] = xrot[c].to_vec();
            if out.rot[c].iter().any(|&d| d == usize::MAX) {
                return Err(WebError::Invalid("crossing wiring incomplete".into()));
            }
        }
        out.validate()?;
        Ok(out)
    }
}

/// Two webs are compatible when their superimposed product reduces to a
/// single non-elliptic web with coefficient one.
pub fn compatible(a: &Diagram, b: &Diagram) -> Result<bool, WebError> {
    let e = reduce(&a.superimpose(b)?)?;
    Ok(e.terms.len() == 1 && e.terms.values().next().unwrap().0 == Q::one())
}

// ---------------------------------------------------------------------------
// Arborization
// ---------------------------------------------------------------------------

impl Diagram {
    /// One degenerate arborization step: collapse a 4-cycle based at a
    /// boundary vertex. Returns None when no step applies. For planar
    /// diagrams this is the only arborization step that can occur.
    fn arborize_step(&self) -> Option<Diagram> {
        let nreal = 2 * self.ends.len();
        for f in self.raw_faces() {
            if f.len() != 4 || f.iter().any(|&d| d >= nreal) {
                continue;
            }
            let corners: Vec<usize> = f.iter().map(|&d| self.dart_vertex(d)).collect();
            let bpos = match corners.iter().position(|&v| self.colors[v] == Color::Boundary) {
                Some(p) => p,
                None => continue,
            };
            if corners.iter().filter(|&&v| self.colors[v] == Color::Boundary).count() != 1 {
                continue;
            }
            if corners.iter().any(|&v| self.colors[v] == Color::Crossing) {
                continue;
            }
            if corners.iter().collect::<BTreeSet<_>>().len() != 4 {
                continue;
            }
            // rotate so the orbit starts at the boundary corner
            let d: Vec<Dart> = (0..4).map(|i| f[(bpos + i) % 4]).collect();
            let c: Vec<usize> = (0..4).map(|i| corners[(bpos + i) % 4]).collect();
            let ext1 = self.third_dart(c[1], d[1], d[0] ^ 1);
            let ext2 = self.third_dart(c[2], d[2], d[1] ^ 1);
            let ext3 = self.third_dart(c[3], d[3], d[2] ^ 1);
            let patch = Patch {
                kill: vec![c[1], c[2], c[3]],
                new_colors: vec![self.colors[c[1]]],
                new_arity: vec![3],
                joins: vec![
                    (Port::E(d[0] ^ 1), Port::S(0, 0)),
                    (Port::E(ext3), Port::S(0, 1)),
                    (Port::E(ext1), Port::S(0, 2)),
                    (Port::E(d[3]), Port::E(ext2)),
                ],
            };
            if let Ok(next) = self.apply_patch(&patch) {
                return Some(next);
            }
        }
        None
    }

    /// Arborized form Arb(W): apply arborization steps to a fixed point.
    pub fn arborize(&self) -> Result<Diagram, WebError> {
        if self.n_crossings() > 0 {
            return Err(WebError::Invalid("arborize expects a planar diagram".into()));
        }
        let mut cur = self.clone();
        let mut guard = 10_000usize;
        while let Some(next) = cur.arborize_step() {
            cur = next;
            guard -= 1;
            if guard == 0 {
                return Err(WebError::Budget);
            }
        }
        Ok(cur)
    }

    /// Arborizable: the arborized form has no cycle through interior vertices.
    pub fn is_arborizable(&self) -> Result<bool, WebError> {
        let arb = self.arborize()?;
        let mut comp: Vec<usize> = (0..arb.colors.len()).collect();
        fn find(c: &mut Vec<usize>, mut x: usize) -> usize {
            while c[x] != x {
                c[x] = c[c[x]];
                x = c[x];
            }
            x
        }
        for e in 0..arb.ends.len() {
            let [u, v] = arb.ends[e];
            if u < arb.n || v < arb.n {
                continue;
            }
            let (a, b) = (find(&mut comp, u), find(&mut comp, v));
            if a == b {
                return Ok(false);
            }
            comp[a] = b;
        }
        Ok(true)
    }

    /// Indecomposable: the interior of the arborized form is connected (at
    /// most one component of interior vertices through interior edges).
    pub fn is_indecomposable(&self) -> Result<bool, WebError> {
        let arb = self.arborize()?;
        let mut comp: Vec<usize> = (0..arb.colors.len()).collect();
        fn find(c: &mut Vec<usize>, mut x: usize) -> usize {
            while c[x] != x {
                c[x] = c[c[x]];
                x = c[x];
            }
            x
        }
        for e in 0..arb.ends.len() {
            let [u, v] = arb.ends[e];
            if u < arb.n || v < arb.n {
                continue;
            }
            let (a, b) = (find(&mut comp, u), find(&mut comp, v));
            comp[a] = b;
        }
        let roots: BTreeSet<usize> =
            (arb.n..arb.colors.len()).map(|v| find(&mut comp, v)).collect();
        Ok(roots.len() <= 1)
    }
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

impl Diagram {
    /// Parse the web JSON format:
    /// `{"n": 5, "vertices": [{"id": 1, "color": "boundary", "boundary": true},
    ///   ...], "rotations": {"1": [0, 2]}, "edges": [[1, 7], ...]}`.
    /// Boundary vertices must carry ids 1..n (their clockwise disk order);
    /// edge ids are positions in the `edges` array.
    pub fn from_json(text: &str) -> Result<Diagram, WebError> {
        let err = |m: &str| WebError::Parse(m.to_string());
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| WebError::Parse(e.to_string()))?;
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| err("missing boundary count n"))? as usize;
        if n == 0 || n > 1000 {
            return Err(err("boundary count out of range"));
        }
        let verts = v
            .get("vertices")
            .and_then(|x| x.as_array())
            .ok_or_else(|| err("missing vertices"))?;
        let mut d = Diagram::new(n);
        let mut ids: HashMap<i64, usize> = HashMap::new();
        for j in 0..n {
            ids.insert(j as i64 + 1, j);
        }
        let mut seen_boundary = vec![false; n];
        for vv in verts {
            let id = vv
                .get("id")
                .and_then(|x| x.as_i64())
                .ok_or_else(|| err("vertex without id"))?;
            let color = vv
                .get("color")
                .and_then(|x| x.as_str())
                .ok_or_else(|| err("vertex without color"))?;
            let boundary = vv.get("boundary").and_then(|x| x.as_bool()).unwrap_or(false);
            if boundary || color == "boundary" {
                if !(1..=n as i64).contains(&id) {
                    return Err(err("boundary vertices must have ids 1..n"));
                }
                if seen_boundary[(id - 1) as usize] {
                    return Err(err("duplicate boundary vertex"));
                }
                seen_boundary[(id - 1) as usize] = true;
                continue;
            }
            let c = match color {
                "black" => Color::Black,
                "white" => Color::White,
                "crossing" => Color::Crossing,
                _ => return Err(err("unknown vertex color")),
            };
            let idx = d.add_vertex(c);
            if ids.insert(id, idx).is_some() {
                return Err(err("duplicate vertex id"));
            }
        }
        let edges = v
            .get("edges")
            .and_then(|x| x.as_array())
            .ok_or_else(|| err("missing edges"))?;
        for pair in edges {
            let p = pair.as_array().ok_or_else(|| err("edge must be a pair"))?;
            if p.len() != 2 {
                return Err(err("edge must be a pair"));
            }
            let a = p[0].as_i64().ok_or_else(|| err("edge endpoint"))?;
            let b = p[1].as_i64().ok_or_else(|| err("edge endpoint"))?;
            if a == b {
                return Err(err("self-loop edges are not supported"));
            }
            let ia = *ids.get(&a).ok_or_else(|| err("edge references unknown vertex"))?;
            let ib = *ids.get(&b).ok_or_else(|| err("edge references unknown vertex"))?;
            let e = d.ends.len();
            d.ends.push([ia, ib]);
            let _ = e;
        }
        let rows = v
            .get("rotations")
            .and_then(|x| x.as_object())
            .ok_or_else(|| err("missing rotations"))?;
        for (key, val) in rows {
            let id: i64 = key.parse().map_err(|_| err("rotation key must be a vertex id"))?;
            let &vi = ids.get(&id).ok_or_else(|| err("rotation for unknown vertex"))?;
            let list = val.as_array().ok_or_else(|| err("rotation must be a list"))?;
            for ev in list {
                let e = ev.as_u64().ok_or_else(|| err("rotation entry must be an edge id"))?
                    as usize;
                if e >= d.ends.len() {
                    return Err(err("rotation references unknown edge"));
                }
                let side = if d.ends[e][0] == vi {
                    0
                } else if d.ends[e][1] == vi {
                    1
                } else {
                    return Err(err("rotation lists an edge not incident to the vertex"));
                };
                d.rot[vi].push(2 * e + side);
            }
        }
        d.free_loops = v.get("free_loops").and_then(|x| x.as_u64()).unwrap_or(0) as usize;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        let mut verts = Vec::new();
        for (i, c) in self.colors.iter().enumerate() {
            let color = match c {
                Color::Boundary => "boundary",
                Color::Black => "black",
                Color::White => "white",
                Color::Crossing => "crossing",
            };
            verts.push(serde_json::json!({
                "id": i + 1,
                "color": color,
                "boundary": *c == Color::Boundary,
            }));
        }
        let edges: Vec<_> = self.ends.iter().map(|&[u, v]| vec![u + 1, v + 1]).collect();
        let mut rots = serde_json::Map::new();
        for (v, r) in self.rot.iter().enumerate() {
            let list: Vec<usize> = r.iter().map(|&d| d >> 1).collect();
            rots.insert((v + 1).to_string(), serde_json::json!(list));
        }
        serde_json::json!({
            "n": self.n,
            "vertices": verts,
            "edges": edges,
            "rotations": rots,
            "free_loops": self.free_loops,
        })
        .to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scott;

    fn sp(n: usize) -> Space {
        Space::new(3, n)
    }

    #[test]
    fn tripods_evaluate_to_pluckers() {
        let s = sp(5);
        for t in crate::grassmannian::subsets(5, 3) {
            let w = Diagram::tripod(5, [t[0], t[1], t[2]]);
            w.validate().unwrap();
            assert!(w.is_non_elliptic());
            assert_eq!(w.evaluate(&s), s.plucker(&t), "tripod {:?}", t);
        }
    }

    #[test]
    fn free_loop_reduces_to_three() {
        let mut d = Diagram::new(4);
        d.free_loops = 1;
        let e = reduce(&d).unwrap();
        assert_eq!(e.n_terms(), 1);
        let (c, web) = e.terms.values().next().unwrap();
        assert_eq!(*c, q_int(3));
        assert_eq!(web.n_interior(), 0);
    }

    #[test]
    fn boundary_bigon_is_degenerate() {
        // two parallel edges from boundary vertex 1 to a white vertex whose
        // third edge goes to boundary vertex 2
        let mut d = Diagram::new(4);
        let u = d.add_vertex(Color::White);
        let e1 = d.add_edge(0, u);
        let e2 = d.add_edge(0, u);
        let e3 = d.add_edge(u, 1);
        d.rot[0] = vec![2 * e1, 2 * e2];
        d.rot[u] = vec![2 * e1 + 1, 2 * e3, 2 * e2 + 1];
        d.validate().unwrap();
        let s = sp(4);
        assert!(d.evaluate(&s).is_zero());
        let e = reduce(&d).unwrap();
        assert_eq!(e.n_terms(), 0);
    }

    #[test]
    fn two_tripod_product_expands_into_two_webs() {
        let s = sp(5);
        let w1 = Diagram::tripod(5, [1, 2, 4]);
        let w2 = Diagram::tripod(5, [1, 3, 5]);
        let sup = w1.superimpose(&w2).unwrap();
        let product = s.plucker(&[1, 2, 4]).mul(&s.plucker(&[1, 3, 5]));
        assert_eq!(sup.evaluate(&s), product);
        let e = reduce(&sup).unwrap();
        assert_eq!(e.n_terms(), 2, "the familiar Plucker relation has two webs");
        let mut evals = Vec::new();
        for (c, w) in e.terms.values() {
            assert_eq!(*c, Q::one());
            assert!(w.is_non_elliptic());
            evals.push(w.evaluate(&s));
        }
        let t1 = s.plucker(&[1, 2, 3]).mul(&s.plucker(&[1, 4, 5]));
        let t2 = s.plucker(&[1, 3, 4]).mul(&s.plucker(&[1, 2, 5]));
        assert!(
            (evals[0] == t1 && evals[1] == t2) || (evals[0] == t2 && evals[1] == t1),
            "expansion must be the two products of tripods"
        );
        assert_eq!(e.evaluate(&s), product);
    }

    #[test]
    fn arborization_splits_the_decomposable_web() {
        let s = sp(5);
        let w1 = Diagram::tripod(5, [1, 2, 4]);
        let w2 = Diagram::tripod(5, [1, 3, 5]);
        let e = reduce(&w1.superimpose(&w2).unwrap()).unwrap();
        let t2 = s.plucker(&[1, 3, 4]).mul(&s.plucker(&[1, 2, 5]));
        // the third web of the expansion: a 4-cycle at boundary vertex 1
        let (_, w3) = e
            .terms
            .values()
            .find(|(_, w)| w.evaluate(&s) == t2)
            .expect("expansion contains the boundary-4-cycle web");
        assert!(w3.n_interior() == 4);
        let arb = w3.arborize().unwrap();
        assert_eq!(arb.evaluate(&s), t2, "arborization preserves the invariant");
        assert_eq!(arb.n_interior(), 2, "arborized form is a union of two tripods");
        assert!(w3.is_arborizable().unwrap());
        assert!(!w3.is_indecomposable().unwrap());
        // any tripod is equal to its own arborization
        let t = Diagram::tripod(5, [2, 3, 5]);
        assert_eq!(t.arborize().unwrap().canonical_key().unwrap(), t.canonical_key().unwrap());
        assert!(t.is_arborizable().unwrap());
        assert!(t.is_indecomposable().unwrap());
    }

    #[test]
    fn single_cycle_web_is_non_elliptic_and_not_arborizable() {
        let w = Diagram::single_cycle_gr39();
        w.validate().unwrap();
        assert!(w.is_non_elliptic());
        let arb = w.arborize().unwrap();
        assert_eq!(arb.canonical_key().unwrap(), w.canonical_key().unwrap());
        assert!(!w.is_arborizable().unwrap());
        assert!(w.is_indecomposable().unwrap());
    }

    #[test]
    fn gr36_cluster_variables_are_exactly_webs() {
        let s = sp(6);
        let seed = scott::initial_seed(3, 6);
        let en = crate::explorer::enumerate_clusters(&seed, 200).unwrap();
        assert_eq!(en.variables, 16, "Gr(3,6) has 16 non-frozen variables");
        let expected: BTreeSet<&String> = en.variable_keys.iter().collect();
        // candidate webs: the 14 non-frozen tripods and the two fork webs
        let mut webs: Vec<Diagram> = Vec::new();
        for t in crate::grassmannian::subsets(6, 3) {
            let consecutive = (0..6).any(|r| {
                let rot: BTreeSet<usize> = t.iter().map(|&j| (j + r) % 6).collect();
                rot.iter().zip(rot.iter().skip(1)).all(|(a, b)| b - a == 1)
            });
            if !consecutive {
                webs.push(Diagram::tripod(6, [t[0], t[1], t[2]]));
            }
        }
        webs.push(Diagram::quadratic_gr36(false));
        webs.push(Diagram::quadratic_gr36(true));
        assert_eq!(webs.len(), 16);
        let mut found = BTreeSet::new();
        for w in &webs {
            w.validate().unwrap();
            assert!(w.is_non_elliptic());
            assert!(w.is_arborizable().unwrap());
            assert!(w.is_indecomposable().unwrap());
            found.insert(crate::cluster::Seed::var_key(&w.evaluate(&s)));
        }
        assert_eq!(found.len(), 16, "the sixteen webs are pairwise distinct");
        let found_ref: BTreeSet<&String> = found.iter().collect();
        assert_eq!(found_ref, expected, "web invariants match the cluster variables");
    }

    #[test]
    fn tripod_compatibility_matches_cluster_combinatorics() {
        let t123 = Diagram::tripod(5, [1, 2, 3]);
        let t145 = Diagram::tripod(5, [1, 4, 5]);
        let t124 = Diagram::tripod(5, [1, 2, 4]);
        let t135 = Diagram::tripod(5, [1, 3, 5]);
        assert!(compatible(&t123, &t145).unwrap());
        assert!(!compatible(&t124, &t135).unwrap());
        assert!(compatible(&t124, &t124).unwrap(), "a web is compatible with itself");
    }

    #[test]
    fn reduction_is_confluent_and_preserves_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut tested = 0;
        while tested < 50 {
            let n = rng.gen_range(4..=6);
            let s = sp(n);
            let k = rng.gen_range(2..=3);
            let mut webs = Vec::new();
            for _ in 0..k {
                let mut cols: Vec<usize> = (1..=n).collect();
                for i in (1..cols.len()).rev() {
                    cols.swap(i, rng.gen_range(0..=i));
                }
                let mut t = [cols[0], cols[1], cols[2]];
                t.sort();
                webs.push(Diagram::tripod(n, t));
            }
            let mut sup = webs[0].clone();
            let mut product = webs[0].evaluate(&s);
            for w in &webs[1..] {
                sup = sup.superimpose(w).unwrap();
                product = product.mul(&w.evaluate(&s));
            }
            assert_eq!(sup.evaluate(&s), product);
            let e1 = reduce_seeded(&sup, Some(tested)).unwrap();
            let e2 = reduce_seeded(&sup, Some(tested + 1000)).unwrap();
            let k1: Vec<(&String, &Q)> = e1.terms.iter().map(|(k, (c, _))| (k, c)).collect();
            let k2: Vec<(&String, &Q)> = e2.terms.iter().map(|(k, (c, _))| (k, c)).collect();
            assert_eq!(k1, k2, "independent strategies agree (trial {})", tested);
            assert_eq!(e1.evaluate(&s), product, "reduction preserves the invariant");
            tested += 1;
        }
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let w = Diagram::tripod(5, [1, 3, 5]);
        let text = w.to_json();
        let back = Diagram::from_json(&text).unwrap();
        assert_eq!(back.canonical_key().unwrap(), w.canonical_key().unwrap());
        assert!(Diagram::from_json("{}").is_err());
        assert!(Diagram::from_json("not json").is_err());
        assert!(Diagram::from_json(r#"{"n": 3, "vertices": [], "edges": [[1,1]], "rotations": {}}"#).is_err());
    }
}
