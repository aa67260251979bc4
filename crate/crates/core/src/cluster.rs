//! Seeds: a quiver together with one polynomial cluster variable per vertex.
//!
//! Geometric seeds (Grassmannians, flag configurations) live in a fixed
//! ambient polynomial ring, so every exchange is required to produce an
//! actual polynomial: the exchange binomial must be exactly divisible by the
//! variable being mutated. A failed division means the seed data is wrong,
//! and is reported as an error rather than papered over.

use crate::exact::{MultiPoly, ParseError};
use crate::quiver::{Quiver, QuiverError, QuiverJson};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, PartialEq, Eq)]
pub struct Seed {
    pub quiver: Quiver,
    /// One variable per quiver vertex, mutable first then frozen.
    pub vars: Vec<MultiPoly>,
}

#[derive(Debug, thiserror::Error)]
pub enum SeedError {
    #[error("quiver: {0}")]
    Quiver(#[from] QuiverError),
    #[error("cluster has {got} entries, quiver has {want} vertices")]
    LengthMismatch { got: usize, want: usize },
    #[error("polynomial {index}: {err}")]
    Poly { index: usize, err: ParseError },
    #[error("exchange at vertex {vertex} is not polynomial: ({binomial}) is not divisible by ({var})")]
    ExchangeNotPolynomial { vertex: usize, binomial: String, var: String },
}

#[derive(Serialize, Deserialize)]
pub struct SeedJson {
    pub n_mutable: usize,
    pub n_frozen: usize,
    pub arrows: Vec<(usize, usize, i64)>,
    pub cluster: Vec<String>,
}

impl Seed {
    pub fn new(quiver: Quiver, vars: Vec<MultiPoly>) -> Seed {
        assert_eq!(quiver.n_vertices(), vars.len());
        Seed { quiver, vars }
    }

    /// The two exchange monomials at vertex k: product over incoming arrows
    /// and product over outgoing arrows (frozen neighbors included).
    pub fn exchange_monomials(&self, k: usize) -> (MultiPoly, MultiPoly) {
        let ring = &self.vars[0].ring;
        let mut inc = MultiPoly::one(ring);
        let mut out = MultiPoly::one(ring);
        for j in 0..self.quiver.n_vertices() {
            let w = self.quiver.b(j, k);
            if w > 0 {
                inc = inc.mul(&self.vars[j].pow(w as u32));
            } else if w < 0 {
                out = out.mul(&self.vars[j].pow((-w) as u32));
            }
        }
        (inc, out)
    }

    /// Mutate at mutable vertex k. The new variable is
    /// (in-product + out-product) / x_k, an exact polynomial division.
    pub fn mutate(&self, k: usize) -> Result<Seed, SeedError> {
        assert!(k < self.quiver.n_mutable, "mutation at frozen vertex");
        let (inc, out) = self.exchange_monomials(k);
        let binomial = inc.add(&out);
        let new_var = binomial.exact_divide(&self.vars[k]).ok_or_else(|| {
            SeedError::ExchangeNotPolynomial {
                vertex: k + 1,
                binomial: binomial.to_string(),
                var: self.vars[k].to_string(),
            }
        })?;
        let mut vars = self.vars.clone();
        vars[k] = new_var;
        Ok(Seed { quiver: self.quiver.mutate(k), vars })
    }

    /// Order-independent key of the mutable cluster: sorted canonical text of
    /// the primitive parts. Two seeds with the same key have the same cluster
    /// up to reordering and rational scaling of each variable.
    pub fn cluster_key(&self) -> Vec<String> {
        let mut key: Vec<String> = self.vars[..self.quiver.n_mutable]
            .iter()
            .map(|v| v.normalize().1.to_string())
            .collect();
        key.sort();
        key
    }

    /// Key of a single variable, used to pool distinct cluster variables.
    pub fn var_key(v: &MultiPoly) -> String {
        v.normalize().1.to_string()
    }

    pub fn to_json(&self) -> SeedJson {
        let qj = self.quiver.to_json();
        SeedJson {
            n_mutable: qj.n_mutable,
            n_frozen: qj.n_frozen,
            arrows: qj.arrows,
            cluster: self.vars.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn from_json(ring: &Arc<crate::exact::Ring>, j: &SeedJson) -> Result<Seed, SeedError> {
        let quiver = Quiver::from_json(&QuiverJson {
            n_mutable: j.n_mutable,
            n_frozen: j.n_frozen,
            arrows: j.arrows.clone(),
        })?;
        if j.cluster.len() != quiver.n_vertices() {
            return Err(SeedError::LengthMismatch {
                got: j.cluster.len(),
                want: quiver.n_vertices(),
            });
        }
        let mut vars = Vec::new();
        for (i, s) in j.cluster.iter().enumerate() {
            vars.push(
                crate::exact::parse_poly(ring, s)
                    .map_err(|err| SeedError::Poly { index: i, err })?,
            );
        }
        Ok(Seed::new(quiver, vars))
    }

    /// Check every mutable vertex admits a polynomial exchange. Cheap
    /// validation that the frozen arrow pattern of a geometric seed is right.
    pub fn validate_exchanges(&self) -> Result<(), SeedError> {
        for k in 0..self.quiver.n_mutable {
            self.mutate(k)?;
        }
        Ok(())
    }
}

/// Abstract seed over formal initial variables, with cluster entries kept as
/// unreduced fractions. Equality is decided by cross-multiplication, so no
/// polynomial gcd is ever needed. Only intended for small-rank sanity tests;
/// entries grow without reduction.
#[derive(Clone)]
pub struct RationalSeed {
    pub quiver: Quiver,
    pub vars: Vec<(MultiPoly, MultiPoly)>, // (numerator, denominator)
}

impl RationalSeed {
    pub fn initial(quiver: Quiver, ring: &Arc<crate::exact::Ring>) -> RationalSeed {
        let vars = (0..quiver.n_vertices())
            .map(|i| (MultiPoly::var(ring, i), MultiPoly::one(ring)))
            .collect();
        RationalSeed { quiver, vars }
    }

    pub fn mutate(&self, k: usize) -> RationalSeed {
        let ring = &self.vars[0].0.ring;
        let mut inc = (MultiPoly::one(ring), MultiPoly::one(ring));
        let mut out = (MultiPoly::one(ring), MultiPoly::one(ring));
        for j in 0..self.quiver.n_vertices() {
            let w = self.quiver.b(j, k);
            let (n, d) = &self.vars[j];
            if w > 0 {
                inc = (inc.0.mul(&n.pow(w as u32)), inc.1.mul(&d.pow(w as u32)));
            } else if w < 0 {
                out = (out.0.mul(&n.pow((-w) as u32)), out.1.mul(&d.pow((-w) as u32)));
            }
        }
        // (inc + out) / x_k as fractions
        let sum_n = inc.0.mul(&out.1).add(&out.0.mul(&inc.1));
        let sum_d = inc.1.mul(&out.1);
        let (xn, xd) = &self.vars[k];
        let mut vars = self.vars.clone();
        vars[k] = (sum_n.mul(xd), sum_d.mul(xn));
        RationalSeed { quiver: self.quiver.mutate(k), vars }
    }

    pub fn vars_equal(&self, other: &RationalSeed) -> bool {
        self.vars.len() == other.vars.len()
            && self.vars.iter().zip(&other.vars).all(|((an, ad), (bn, bd))| {
                let l = an.mul(bd);
                let r = bn.mul(ad);
                // equal up to a common unit would be a bug here; require equality
                l == r
            })
    }

    /// Laurent check: the fraction num/den is a Laurent polynomial iff den
    /// divides num * M for some monomial M. The monomial part of den has
    /// per-variable degree at most deg(den), so one fixed M suffices.
    pub fn is_laurent(&self, k: usize) -> bool {
        let (num, den) = &self.vars[k];
        let ring = &num.ring;
        let e = den.total_degree() as u32;
        let mut m = MultiPoly::one(ring);
        for i in 0..ring.n_vars() {
            m = m.mul(&MultiPoly::var(ring, i).pow(e));
        }
        num.mul(&m).exact_divide(den).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{parse_poly, Ring};

    /// k=2 Plucker ring on 4 vectors: seed x = Delta_13 with frozen
    /// Delta_12, Delta_34, Delta_14, Delta_23. Mutation is the 3-term
    /// Plucker relation: Delta_13 * Delta_24 = Delta_12 Delta_34 + Delta_14 Delta_23.
    #[test]
    fn plucker_exchange_is_polynomial() {
        let ring = Ring::matrix_ring(2, 4);
        let pl = |a: usize, b: usize| {
            parse_poly(
                &ring,
                &format!("x_{{1,{a}}} * x_{{2,{b}}} - x_{{1,{b}}} * x_{{2,{a}}}"),
            )
            .unwrap()
        };
        let mut q = Quiver::empty(1, 4);
        q.add_arrow(1, 0, 1); // Delta_12 -> x
        q.add_arrow(2, 0, 1); // Delta_34 -> x
        q.add_arrow(0, 3, 1); // x -> Delta_14
        q.add_arrow(0, 4, 1); // x -> Delta_23
        let seed = Seed::new(q, vec![pl(1, 3), pl(1, 2), pl(3, 4), pl(1, 4), pl(2, 3)]);
        let m = seed.mutate(0).unwrap();
        assert_eq!(m.vars[0], pl(2, 4));
        // mutating back recovers Delta_13
        assert_eq!(m.mutate(0).unwrap().vars[0], pl(1, 3));
    }

    #[test]
    fn bad_seed_reports_exchange_failure() {
        let ring = Ring::matrix_ring(2, 4);
        let mut q = Quiver::empty(1, 1);
        q.add_arrow(1, 0, 1);
        let x = parse_poly(&ring, "x_{1,1} * x_{2,2} - x_{1,2} * x_{2,1}").unwrap();
        let f = parse_poly(&ring, "x_{1,1}").unwrap();
        let seed = Seed::new(q, vec![x, f]);
        assert!(matches!(
            seed.mutate(0),
            Err(SeedError::ExchangeNotPolynomial { vertex: 1, .. })
        ));
    }

    /// Rank 2, b = [[0,1],[-1,0]]: the A2 pentagon recurrence, period 5.
    #[test]
    fn a2_mutation_has_period_five() {
        let ring = Ring::new(vec!["x1".into(), "x2".into()]);
        let mut q = Quiver::empty(2, 0);
        q.add_arrow(0, 1, 1);
        let init = RationalSeed::initial(q, &ring);
        let mut s = init.clone();
        // alternate mutations 0,1,0,1,... ; after 5 the seed returns
        for step in 0..5 {
            s = s.mutate(step % 2);
            assert!(s.is_laurent(step % 2), "Laurent failure at step {step}");
        }
        // after five alternating mutations the cluster comes back swapped
        let once_more = s.vars.clone();
        assert!(
            {
                let a = &init.vars;
                let b = &once_more;
                let eq = |x: &(MultiPoly, MultiPoly), y: &(MultiPoly, MultiPoly)| {
                    x.0.mul(&y.1) == y.0.mul(&x.1)
                };
                (eq(&a[0], &b[0]) && eq(&a[1], &b[1])) || (eq(&a[0], &b[1]) && eq(&a[1], &b[0]))
            },
            "A2 dynamics did not close up after 5 steps"
        );
    }

    #[test]
    fn seed_json_round_trip() {
        let ring = Ring::matrix_ring(2, 4);
        let mut q = Quiver::empty(1, 1);
        q.add_arrow(1, 0, 1);
        let x = parse_poly(&ring, "x_{1,1} * x_{2,2} - x_{1,2} * x_{2,1}").unwrap();
        let f = parse_poly(&ring, "x_{1,4}").unwrap();
        let seed = Seed::new(q, vec![x, f]);
        let j = serde_json::to_string(&seed.to_json()).unwrap();
        let back = Seed::from_json(&ring, &serde_json::from_str(&j).unwrap()).unwrap();
        assert!(back.quiver == seed.quiver && back.vars == seed.vars);
    }
}
