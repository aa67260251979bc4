//! Exact arithmetic substrate: multivariate polynomials over the rationals.
//!
//! Everything downstream (Plucker coordinates, flag invariants, web
//! evaluations) is a `MultiPoly` over a shared variable table, so equality,
//! divisibility and proportionality checks are decidable and exact. No
//! floating point anywhere.
//!
//! Monomials are exponent vectors over a fixed [`Ring`] and are ordered by
//! graded lexicographic order; `normalize` factors a polynomial into a
//! rational unit times a canonical primitive representative, which is what
//! makes "same ray" comparisons well defined.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from(BigInt::from(n))
}

/// A fixed, ordered variable table. Polynomials over different rings never
/// mix; all modules build one ambient ring per space and share it.
#[derive(Debug)]
pub struct Ring {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Ring {
    pub fn new(names: Vec<String>) -> Arc<Ring> {
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            assert!(index.insert(n.clone(), i).is_none(), "duplicate variable {n}");
        }
        Arc::new(Ring { names, index })
    }

    /// Ambient ring of a k x n matrix of indeterminates, row-major `x_{i,j}`.
    pub fn matrix_ring(k: usize, n: usize) -> Arc<Ring> {
        let mut names = Vec::with_capacity(k * n);
        for i in 1..=k {
            for j in 1..=n {
                names.push(format!("x_{{{i},{j}}}"));
            }
        }
        Ring::new(names)
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

fn same_ring(a: &Arc<Ring>, b: &Arc<Ring>) -> bool {
    Arc::ptr_eq(a, b) || a.names == b.names
}

/// Exponent vector, fixed length = ring width. Graded lex: compare total
/// degree first, then exponents left to right.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial with rational coefficients. Terms are kept in a
/// BTreeMap keyed by monomial, so iteration order is the monomial order and
/// representation is canonical (no zero coefficients stored).
#[derive(Clone)]
pub struct MultiPoly {
    pub ring: Arc<Ring>,
    terms: BTreeMap<Monomial, Q>,
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}
impl Eq for MultiPoly {}

impl MultiPoly {
    pub fn zero(ring: &Arc<Ring>) -> MultiPoly {
        MultiPoly { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Arc<Ring>, c: Q) -> MultiPoly {
        let mut p = MultiPoly::zero(ring);
        if !c.is_zero() {
            p.terms.insert(Monomial(vec![0; ring.n_vars()]), c);
        }
        p
    }

    pub fn one(ring: &Arc<Ring>) -> MultiPoly {
        MultiPoly::constant(ring, Q::one())
    }

    pub fn var(ring: &Arc<Ring>, i: usize) -> MultiPoly {
        let mut e = vec![0; ring.n_vars()];
        e[i] = 1;
        let mut p = MultiPoly::zero(ring);
        p.terms.insert(Monomial(e), Q::one());
        p
    }

    pub fn from_terms(ring: &Arc<Ring>, terms: impl IntoIterator<Item = (Monomial, Q)>) -> MultiPoly {
        let mut p = MultiPoly::zero(ring);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one())
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u64 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        debug_assert!(same_ring(&self.ring, &other.ring));
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.ring);
        }
        MultiPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        debug_assert!(same_ring(&self.ring, &other.ring));
        let mut acc: HashMap<Monomial, Q> = HashMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2);
                let c = c1 * c2;
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Vacant(v) => {
                        v.insert(c);
                    }
                    std::collections::hash_map::Entry::Occupied(mut o) => {
                        *o.get_mut() += c;
                    }
                }
            }
        }
        MultiPoly {
            ring: self.ring.clone(),
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> MultiPoly {
        let mut base = self.clone();
        let mut acc = MultiPoly::one(&self.ring);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Evaluate at a full point.
    pub fn eval(&self, point: &[Q]) -> Q {
        assert_eq!(point.len(), self.ring.n_vars());
        let mut total = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &point[i];
                }
            }
            total += t;
        }
        total
    }

    /// Substitute polynomials for the variables: images[i] replaces variable
    /// i. All images must share a ring, which becomes the result's ring.
    pub fn subst(&self, images: &[MultiPoly]) -> MultiPoly {
        assert_eq!(images.len(), self.ring.n_vars());
        let out_ring = images
            .first()
            .map(|p| p.ring.clone())
            .expect("subst needs at least one variable");
        let mut total = MultiPoly::zero(&out_ring);
        // cache powers per variable
        let mut powers: Vec<Vec<MultiPoly>> =
            images.iter().map(|p| vec![MultiPoly::one(&out_ring), p.clone()]).collect();
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(&out_ring, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&images[i]);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][e as usize]);
            }
            total = total.add(&t);
        }
        total
    }

    /// Unit-times-primitive factorization. Returns `(u, p)` with
    /// `self = u * p`, where `p` has integer coprime coefficients and
    /// positive leading coefficient. The zero polynomial returns `(0, 0)`.
    pub fn normalize(&self) -> (Q, MultiPoly) {
        if self.is_zero() {
            return (Q::zero(), self.clone());
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_integer::Integer::gcd(&num_gcd, c.numer());
            den_lcm = num_integer::Integer::lcm(&den_lcm, c.denom());
        }
        let mut unit = Q::new(num_gcd, den_lcm);
        let lead = self.leading().unwrap().1;
        if lead.is_negative() {
            unit = -unit;
        }
        let inv = unit.recip();
        (unit, self.scale(&inv))
    }

    /// Exact division: `Some(q)` with `self = q * d`, or `None` if `d` does
    /// not divide `self`. Division loop on leading terms; sound because the
    /// leading monomial of any product is the product of leading monomials.
    pub fn exact_divide(&self, d: &MultiPoly) -> Option<MultiPoly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        debug_assert!(same_ring(&self.ring, &d.ring));
        let (dm, dc) = {
            let (m, c) = d.leading().unwrap();
            (m.clone(), c.clone())
        };
        let mut r = self.clone();
        let mut q = MultiPoly::zero(&self.ring);
        while let Some((rm, rc)) = r.leading().map(|(m, c)| (m.clone(), c.clone())) {
            if !dm.divides(&rm) {
                return None;
            }
            let tm = rm.div(&dm);
            let tc = rc / &dc;
            let mut t = MultiPoly::zero(&self.ring);
            t.terms.insert(tm, tc);
            q = q.add(&t);
            r = r.sub(&t.mul(d));
        }
        Some(q)
    }

    /// Divide out `f` as many times as possible; returns (cofactor, multiplicity).
    pub fn strip_factor(&self, f: &MultiPoly) -> (MultiPoly, u32) {
        if self.is_zero() || f.is_constant() {
            return (self.clone(), 0);
        }
        let mut cur = self.clone();
        let mut k = 0;
        while let Some(q) = cur.exact_divide(f) {
            cur = q;
            k += 1;
        }
        (cur, k)
    }
}

/// Scalar relating two proportional polynomials: a rational unit times a
/// Laurent monomial in designated frozen polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrozenScalar {
    pub unit: Q,
    /// (frozen index, exponent), exponent may be negative, never zero.
    pub exponents: Vec<(usize, i64)>,
}

impl FrozenScalar {
    pub fn is_trivial(&self) -> bool {
        self.unit.is_one() && self.exponents.is_empty()
    }
}

/// Decide whether `a = unit * (frozen monomial) * b`. Frozen factors are
/// stripped from both sides in list order, then the primitive cores must
/// coincide. Frozens are assumed pairwise non-proportional irreducibles,
/// which holds for the frozen variables used here (Plucker coordinates and
/// boundary flag invariants), so the stripped multiplicities are unambiguous.
pub fn proportional(a: &MultiPoly, b: &MultiPoly, frozens: &[MultiPoly]) -> Option<FrozenScalar> {
    if a.is_zero() || b.is_zero() {
        return if a.is_zero() && b.is_zero() {
            Some(FrozenScalar { unit: Q::one(), exponents: vec![] })
        } else {
            None
        };
    }
    let mut ca = a.clone();
    let mut cb = b.clone();
    let mut exponents = Vec::new();
    for (i, f) in frozens.iter().enumerate() {
        let (ra, ka) = ca.strip_factor(f);
        let (rb, kb) = cb.strip_factor(f);
        ca = ra;
        cb = rb;
        let d = ka as i64 - kb as i64;
        if d != 0 {
            exponents.push((i, d));
        }
    }
    let (ua, pa) = ca.normalize();
    let (ub, pb) = cb.normalize();
    if pa != pb {
        return None;
    }
    Some(FrozenScalar { unit: ua / ub, exponents })
}

/// Determinant of a square symbolic matrix, by Laplace expansion with
/// memoization over column subsets.
pub fn det(rows: &[Vec<MultiPoly>]) -> MultiPoly {
    let n = rows.len();
    assert!(n > 0 && rows.iter().all(|r| r.len() == n));
    let ring = rows[0][0].ring.clone();
    // memo[mask] = det of first popcount(mask) rows restricted to columns in mask
    let mut memo: HashMap<u32, MultiPoly> = HashMap::new();
    memo.insert(0, MultiPoly::one(&ring));
    fn go(rows: &[Vec<MultiPoly>], mask: u32, memo: &mut HashMap<u32, MultiPoly>, ring: &Arc<Ring>) -> MultiPoly {
        if let Some(p) = memo.get(&mask) {
            return p.clone();
        }
        let r = mask.count_ones() as usize - 1;
        let mut acc = MultiPoly::zero(ring);
        // expansion along row r: cofactor sign is (-1)^(r + column position)
        let mut sign = if r % 2 == 0 { Q::one() } else { -Q::one() };
        for j in 0..rows.len() {
            if mask & (1 << j) == 0 {
                continue;
            }
            let sub = go(rows, mask & !(1 << j), memo, ring);
            acc = acc.add(&rows[r][j].mul(&sub).scale(&sign));
            sign = -sign;
        }
        memo.insert(mask, acc.clone());
        acc
    }
    go(rows, (1u32 << n) - 1, &mut memo, &ring)
}

// ---------------------------------------------------------------------------
// Text format
//
// polynomial := term (('+' | '-') term)*
// term       := factor ('*' factor)*
// factor     := rational | variable ('^' integer)?
// variable   := ident ('_{' ... '}')?     e.g.  x_{1,2}   m_{3,1,2}   t
// ---------------------------------------------------------------------------

#[derive(Debug, thiserror::Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos, msg: msg.into() })
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected integer");
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        txt.parse::<BigInt>().map_err(|e| ParseError { pos: start, msg: e.to_string() })
    }

    fn rational(&mut self) -> Result<Q, ParseError> {
        let n = self.integer()?;
        if self.peek() == Some(b'/') {
            self.bump();
            let d = self.integer()?;
            if d.is_zero() {
                return self.err("zero denominator");
            }
            Ok(Q::new(n, d))
        } else {
            Ok(Q::from(n))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
        {
            self.pos += 1;
            // a subscript block is part of the name
            if self.pos < self.s.len() && self.s[self.pos] == b'{' && self.s[self.pos - 1] == b'_' {
                let close = self.s[self.pos..]
                    .iter()
                    .position(|&c| c == b'}')
                    .ok_or(ParseError { pos: self.pos, msg: "unclosed subscript".into() })?;
                self.pos += close + 1;
                break;
            }
        }
        if self.pos == start {
            return self.err("expected identifier");
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos])
            .map_err(|_| ParseError { pos: start, msg: "non-utf8 identifier".into() })?
            .to_string())
    }
}

/// Parse the textual polynomial format over a given ring.
pub fn parse_poly(ring: &Arc<Ring>, text: &str) -> Result<MultiPoly, ParseError> {
    let mut lx = Lexer { s: text.as_bytes(), pos: 0 };
    let mut total = MultiPoly::zero(ring);
    let mut first = true;
    loop {
        let mut sign = Q::one();
        match lx.peek() {
            None if first => return lx.err("empty polynomial"),
            None => break,
            Some(b'+') => {
                lx.bump();
            }
            Some(b'-') => {
                lx.bump();
                sign = -sign;
            }
            Some(_) if first => {}
            Some(_) => return lx.err("expected '+' or '-' between terms"),
        }
        first = false;
        // term: factors joined by '*'
        let mut coeff = sign;
        let mut expo = vec![0u32; ring.n_vars()];
        loop {
            match lx.peek() {
                Some(c) if c.is_ascii_digit() => {
                    coeff *= lx.rational()?;
                }
                Some(c) if c.is_ascii_alphabetic() => {
                    let name = lx.ident()?;
                    let idx = match ring.lookup(&name) {
                        Some(i) => i,
                        None => return lx.err(&format!("unknown variable {name}")),
                    };
                    let mut e: u32 = 1;
                    if lx.peek() == Some(b'^') {
                        lx.bump();
                        let n = lx.integer()?;
                        e = u32::try_from(&n).map_err(|_| ParseError {
                            pos: lx.pos,
                            msg: "exponent out of range".into(),
                        })?;
                    }
                    expo[idx] = expo[idx]
                        .checked_add(e)
                        .ok_or(ParseError { pos: lx.pos, msg: "exponent overflow".into() })?;
                }
                _ => return lx.err("expected coefficient or variable"),
            }
            if lx.peek() == Some(b'*') {
                lx.bump();
            } else {
                break;
            }
        }
        total.add_term(Monomial(expo), coeff);
    }
    Ok(total)
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // highest terms first, matching how people write polynomials
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = if neg { -c } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut wrote = false;
            if !abs.is_one() || m.is_one() {
                write!(f, "{abs}")?;
                wrote = true;
            }
            for (vi, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if wrote {
                    write!(f, " * ")?;
                }
                write!(f, "{}", self.ring.name(vi))?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
                wrote = true;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_xy() -> Arc<Ring> {
        Ring::new(vec!["x".into(), "y".into()])
    }

    fn p(ring: &Arc<Ring>, s: &str) -> MultiPoly {
        parse_poly(ring, s).unwrap()
    }

    #[test]
    fn normalize_extracts_unit_and_sign() {
        let r = ring_xy();
        // 6x^2y - 4xy = 2 * (3x^2y - 2xy)
        let (u, prim) = p(&r, "6*x^2*y - 4*x*y").normalize();
        assert_eq!(u, q_int(2));
        assert_eq!(prim, p(&r, "3*x^2*y - 2*x*y"));
        // -x normalizes to unit -1 times x
        let (u, prim) = p(&r, "-x").normalize();
        assert_eq!(u, q_int(-1));
        assert_eq!(prim, p(&r, "x"));
        // fractions clear out
        let (u, prim) = p(&r, "1/2*x + 1/3*y").normalize();
        assert_eq!(u, Q::new(BigInt::from(1), BigInt::from(6)));
        assert_eq!(prim, p(&r, "3*x + 2*y"));
    }

    #[test]
    fn exact_divide_basics() {
        let r = ring_xy();
        let q = p(&r, "x^2 - y^2").exact_divide(&p(&r, "x - y")).unwrap();
        assert_eq!(q, p(&r, "x + y"));
        assert!(p(&r, "x^2 + 1").exact_divide(&p(&r, "x")).is_none());
        assert!(p(&r, "x^2 - y^2 + 1").exact_divide(&p(&r, "x - y")).is_none());
        let z = MultiPoly::zero(&r);
        assert_eq!(z.exact_divide(&p(&r, "x - y")).unwrap(), z);
    }

    #[test]
    fn det_of_generic_matrix_divides() {
        // 3x3 generic matrix: det is the usual 6-term expansion, and
        // det * (x - y) / det recovers x - y.
        let r = Ring::matrix_ring(3, 3);
        let rows: Vec<Vec<MultiPoly>> = (0..3)
            .map(|i| (0..3).map(|j| MultiPoly::var(&r, 3 * i + j)).collect())
            .collect();
        let d = det(&rows);
        assert_eq!(d.n_terms(), 6);
        assert_eq!(d.total_degree(), 3);
        let f = p(&r, "x_{1,1} - x_{2,2}");
        assert_eq!(d.mul(&f).exact_divide(&d).unwrap(), f);
    }

    #[test]
    fn proportional_with_frozen_factors() {
        let r = ring_xy();
        let fz = vec![p(&r, "x + y"), p(&r, "x - y")];
        let a = p(&r, "x + y").mul(&p(&r, "x + y")).mul(&p(&r, "2*x")).scale(&q_int(3));
        let b = p(&r, "x - y").mul(&p(&r, "x"));
        let s = proportional(&a, &b, &fz).unwrap();
        assert_eq!(s.unit, q_int(6));
        assert_eq!(s.exponents, vec![(0, 2), (1, -1)]);
        // not proportional: cores differ
        assert!(proportional(&p(&r, "x^2 + y"), &p(&r, "x"), &fz).is_none());
        // plain rational proportionality
        let s = proportional(&p(&r, "-2*x + 2*y"), &p(&r, "x - y"), &fz).unwrap();
        assert_eq!(s.unit, q_int(-2));
        // (x - y) is itself frozen index 1, so stripping moves it into the scalar
        assert_eq!(s.exponents, vec![]);
    }

    #[test]
    fn parse_display_round_trip() {
        let r = Ring::matrix_ring(2, 3);
        for s in [
            "x_{1,1}",
            "-3/2 * x_{1,2}^2 * x_{2,3} + x_{1,1}",
            "x_{1,1} * x_{2,2} - x_{1,2} * x_{2,1}",
            "7",
            "-1/3",
        ] {
            let a = p(&r, s);
            let b = p(&r, &a.to_string());
            assert_eq!(a, b, "round trip failed for {s}");
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        let r = ring_xy();
        for s in ["", "x +", "z", "x^", "1/0", "x ** y", "x_{1"] {
            assert!(parse_poly(&r, s).is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn eval_matches_structure() {
        let r = ring_xy();
        let f = p(&r, "x^2*y - 3*y + 1/2");
        let v = f.eval(&[q_int(2), q_int(-1)]);
        assert_eq!(v, Q::new(BigInt::from(-1), BigInt::from(2)));
    }
}
