//! Initial seeds for the Grassmannian cluster structure.
//!
//! For k = 2 this is the fan seed of the polygon. For k >= 3 and n = k r the
//! seed is transported from the fan triangulation of the 2r-gon on flag
//! configurations: the window map sends each triangulation coordinate to a
//! Plucker coordinate, boundary coordinates land on the n cyclic intervals
//! (several per interval), and the frozen part of the quiver is glued
//! accordingly. Every exchange of the resulting seed is a polynomial
//! identity, which `validate_exchanges` checks symbolically.

use crate::cluster::Seed;
use crate::exact::MultiPoly;
use crate::fock_goncharov::{triangulation_skeleton, CoordKey, Triangulation};
use crate::grassmannian::{wedge_all, ExteriorElement, Space};
use crate::quiver::Quiver;

/// Image of a flag-configuration coordinate under the window map: flag
/// 2t-1 has grade-a tensor v_{(t-1)k+1} ^ ... ^ v_{(t-1)k+a}, flag 2t has
/// v_{tk-a+1} ^ ... ^ v_{tk}.
pub fn window_coordinate(space: &Space, key: &CoordKey) -> MultiPoly {
    let k = space.k as i64;
    let mut pieces: Vec<ExteriorElement> = Vec::new();
    for &(j, w) in key {
        let j = j as i64;
        let w = w as i64;
        let range: Vec<i64> = if j % 2 == 1 {
            let t = (j + 1) / 2;
            ((t - 1) * k + 1..=(t - 1) * k + w).collect()
        } else {
            let t = j / 2;
            (t * k - w + 1..=t * k).collect()
        };
        pieces.push(wedge_all(
            &range.iter().map(|&c| space.column(c)).collect::<Vec<_>>(),
        ));
    }
    wedge_all(&pieces).volume(&space.ring)
}

/// The initial seed of Gr(k, n): (k-1)(n-k-1) mutable Plucker variables and
/// the n cyclic intervals frozen. Supported for k = 2 (any n >= 4) and for
/// k >= 3 when k divides n with n >= 2k.
pub fn initial_seed(k: usize, n: usize) -> Seed {
    let space = Space::new(k, n);
    if k == 2 {
        return path_seed(&space);
    }
    assert!(
        n % k == 0 && n >= 2 * k,
        "initial seed implemented for k = 2 or k | n (n >= 2k); got Gr({k},{n})"
    );
    let r = n / k;
    let sk = triangulation_skeleton(k, &Triangulation::fan(2 * r));
    let fg_mut = sk.quiver.n_mutable;
    let fg_frz = sk.quiver.n_frozen;
    let frozens = space.frozen_pluckers();
    // map each FG frozen vertex to the cyclic interval its image equals
    let mut frozen_target: Vec<usize> = Vec::with_capacity(fg_frz);
    for key in &sk.keys[fg_mut..] {
        let img = window_coordinate(&space, key);
        let t = frozens
            .iter()
            .position(|f| *f == img)
            .unwrap_or_else(|| panic!("boundary coordinate {key:?} is not a cyclic Plucker"));
        frozen_target.push(t);
    }
    let mut quiver = Quiver::empty(fg_mut, n);
    for i in 0..fg_mut {
        for j in 0..(fg_mut + fg_frz) {
            let w = sk.quiver.b(i, j);
            if w <= 0 {
                continue;
            }
            let jj = if j < fg_mut { j } else { fg_mut + frozen_target[j - fg_mut] };
            quiver.add_arrow(i, jj, w);
        }
        for j in fg_mut..(fg_mut + fg_frz) {
            let w = sk.quiver.b(j, i);
            if w > 0 {
                quiver.add_arrow(fg_mut + frozen_target[j - fg_mut], i, w);
            }
        }
    }
    let mut vars: Vec<MultiPoly> = sk.keys[..fg_mut]
        .iter()
        .map(|key| window_coordinate(&space, key))
        .collect();
    vars.extend(frozens);
    Seed::new(quiver, vars)
}

/// k = 2 fan seed: mutable Delta_{1b}, b = 3..n-1, in a path, frozen cyclic
/// intervals attached so that each exchange is the quadrilateral Plucker
/// relation on (1, b-1, b, b+1).
fn path_seed(space: &Space) -> Seed {
    let n = space.n;
    assert!(n >= 4);
    let m = n - 3;
    let mut quiver = Quiver::empty(m, n);
    // frozen index f(i) = interval starting at i, 0-based m + (i-1)
    let fz = |i: usize| m + (i - 1);
    for (v, b) in (3..n).enumerate() {
        if b + 1 < n {
            quiver.add_arrow(v, v + 1, 1);
        }
        // in: Delta_{b, b+1}; out: Delta_{b-1, b}
        quiver.add_arrow(fz(b), v, 1);
        quiver.add_arrow(v, fz(b - 1), 1);
        if b == 3 {
            quiver.add_arrow(fz(1), v, 1); // Delta_12 in
        }
        if b == n - 1 {
            quiver.add_arrow(v, fz(n), 1); // Delta_{1n} out
        }
    }
    let mut vars: Vec<MultiPoly> = (3..n).map(|b| space.plucker(&[1, b])).collect();
    vars.extend(space.frozen_pluckers());
    Seed::new(quiver, vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmannian::weakly_separated;

    #[test]
    fn gr25_seed_mutations() {
        let seed = initial_seed(2, 5);
        assert_eq!(seed.quiver.n_mutable, 2);
        assert_eq!(seed.quiver.n_frozen, 5);
        seed.validate_exchanges().unwrap();
        // mutating Delta_13 gives Delta_24
        let sp = Space::new(2, 5);
        let m = seed.mutate(0).unwrap();
        assert_eq!(m.vars[0], sp.plucker(&[2, 4]));
    }

    #[test]
    fn gr36_seed_is_weakly_separated_pluckers() {
        let seed = initial_seed(3, 6);
        assert_eq!(seed.quiver.n_mutable, 4); // (k-1)(n-k-1)
        assert_eq!(seed.quiver.n_frozen, 6);
        seed.validate_exchanges().unwrap();
        let sp = Space::new(3, 6);
        let labels: Vec<Vec<usize>> = seed
            .vars
            .iter()
            .map(|v| {
                let (cols, unit) = sp.plucker_label(v).expect("cluster variable is a Plucker");
                assert!(unit == crate::exact::q_int(1));
                cols
            })
            .collect();
        // the window face coordinate v1 ^ v3 ^ v4 is in the cluster
        assert!(labels.contains(&vec![1, 3, 4]));
        for i in 0..labels.len() {
            for j in (i + 1)..labels.len() {
                assert!(
                    weakly_separated(&labels[i], &labels[j], 6),
                    "{:?} vs {:?}",
                    labels[i],
                    labels[j]
                );
            }
        }
    }

    #[test]
    fn gr48_seed_validates() {
        let seed = initial_seed(4, 8);
        assert_eq!(seed.quiver.n_mutable, 9);
        assert_eq!(seed.quiver.n_frozen, 8);
        seed.validate_exchanges().unwrap();
        let sp = Space::new(4, 8);
        for v in &seed.vars {
            assert!(sp.plucker_label(v).is_some());
        }
    }
}
