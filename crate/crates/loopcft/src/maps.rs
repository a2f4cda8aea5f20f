//! Combinatorial maps of loop configurations on the torus and the sphere.
//!
//! A torus one-point map is a canonical triple `(m, n, p)` of leg numbers
//! between an external puncture and a non-contractible cycle structure; a
//! sphere four-point map carries the same triple plus a parity tag. The
//! module enumerates canonical maps, counts them in closed form, computes
//! signatures and rotation-symmetry constraints, and expands a torus map
//! into its sphere counterparts.

use num::BigRational;
use std::collections::BTreeSet;

/// Canonical torus map `(m, n, p)` with `m >= n`, `m >= p`,
/// `n = 0 => p = 0` and `p = m => n = m`; `r1 = m + n + p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TorusMap {
    /// Legs shared by the two cycle classes.
    pub m: u64,
    /// Second leg number.
    pub n: u64,
    /// Third leg number.
    pub p: u64,
}

/// Parity tag of a sphere map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SphereTag {
    /// One of the two parity partners (all of `m`,`n`,`p` nonzero).
    Plus,
    /// The other parity partner.
    Minus,
    /// Self-paired map (some leg number vanishes).
    Star,
}

/// Sphere four-point map: leg numbers plus a parity tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SphereMap {
    /// Legs between punctures 1 and 2 (equivalently 3 and 4).
    pub m: u64,
    /// Legs between punctures 1 and 4 (equivalently 2 and 3).
    pub n: u64,
    /// Legs between punctures 1 and 3 (equivalently 2 and 4).
    pub p: u64,
    /// Parity tag; `Star` exactly when `m*n*p = 0`.
    pub tag: SphereTag,
}

impl TorusMap {
    /// Builds a map after checking the canonical-form conditions.
    pub fn new(m: u64, n: u64, p: u64) -> Option<Self> {
        let ok = m >= n && m >= p && (n != 0 || p == 0) && (p != m || n == m);
        ok.then_some(Self { m, n, p })
    }

    /// Total leg number `r1 = m + n + p`.
    pub fn r1(&self) -> u64 {
        self.m + self.n + self.p
    }

    /// Signature `sigma = (n + p)/2` as an exact rational.
    pub fn signature(&self) -> BigRational {
        BigRational::new(((self.n + self.p) as i64).into(), 2.into())
    }

    /// Order of the rotation symmetry group acting on the second Kac index:
    /// 2 generically, 4 for `(k,k,0)`, 6 for `(k,k,k)`.
    pub fn symmetry_order(&self) -> u64 {
        if self.m == self.n && self.p == 0 && self.m > 0 {
            4
        } else if self.m == self.n && self.n == self.p && self.m > 0 {
            6
        } else {
            2
        }
    }

    /// True when the external spin constraint `r1*s1 in qZ` holds for this
    /// map's symmetry order `q`.
    pub fn allows_s1(&self, s1: &BigRational) -> bool {
        let q = self.symmetry_order() as i64;
        let rs = BigRational::from(num::BigInt::from(self.r1() as i64)) * s1;
        (rs / BigRational::from(num::BigInt::from(q))).is_integer()
    }

    /// Expands into the sphere maps it corresponds to.
    ///
    /// The case split follows the degeneracy pattern of `(m, n, p)`:
    /// fully distinct nonzero triples give six maps with alternating tags,
    /// partially equal triples give tag pairs on fewer arrangements, triples
    /// containing a zero give `Star` maps only.
    pub fn phi(&self) -> Vec<SphereMap> {
        let (m, n, p) = (self.m, self.n, self.p);
        let sm = |m, n, p, tag| SphereMap { m, n, p, tag };
        use SphereTag::{Minus, Plus, Star};
        if m == 0 {
            return vec![sm(0, 0, 0, Star)];
        }
        if n == 0 && p == 0 {
            return vec![sm(m, 0, 0, Star), sm(0, m, 0, Star), sm(0, 0, m, Star)];
        }
        if p == 0 {
            // m >= n > 0, p = 0.
            if m == n {
                return vec![sm(m, m, 0, Star), sm(m, 0, m, Star), sm(0, m, m, Star)];
            }
            return vec![
                sm(m, n, 0, Star),
                sm(n, m, 0, Star),
                sm(m, 0, n, Star),
                sm(n, 0, m, Star),
                sm(0, m, n, Star),
                sm(0, n, m, Star),
            ];
        }
        // All of m, n, p nonzero.
        if m == n && n == p {
            return vec![sm(m, m, m, Plus), sm(m, m, m, Minus)];
        }
        if m == n {
            // (m, m, p), p distinct.
            return vec![
                sm(m, m, p, Plus),
                sm(m, m, p, Minus),
                sm(m, p, m, Plus),
                sm(m, p, m, Minus),
                sm(p, m, m, Plus),
                sm(p, m, m, Minus),
            ];
        }
        if n == p || m == p {
            // Canonical form has m > n = p (p = m forces n = m, handled above).
            return vec![
                sm(m, n, n, Plus),
                sm(m, n, n, Minus),
                sm(n, m, n, Plus),
                sm(n, m, n, Minus),
                sm(n, n, m, Plus),
                sm(n, n, m, Minus),
            ];
        }
        // m > n > p > 0: six arrangements, alternating parity.
        vec![
            sm(m, n, p, Plus),
            sm(m, p, n, Minus),
            sm(n, p, m, Plus),
            sm(n, m, p, Minus),
            sm(p, m, n, Plus),
            sm(p, n, m, Minus),
        ]
    }
}

impl SphereMap {
    /// Signature triple `(m+n, n+p, m+p)`: minimal leg numbers of the three
    /// channels (s, t, u).
    pub fn signature(&self) -> (u64, u64, u64) {
        (self.m + self.n, self.n + self.p, self.m + self.p)
    }
}

/// Parity class selector for map counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityClass {
    /// Self-conjugate maps (weakly ordered, not strictly ordered).
    Zero,
    /// Weakly ordered representatives `m >= n >= p`.
    Plus,
    /// Strictly ordered representatives `m > n > p > 0`.
    Minus,
}

/// Enumerates all canonical torus maps with `r1` legs, sorted
/// lexicographically.
pub fn enumerate_torus_maps(r1: u64) -> Vec<TorusMap> {
    let mut set = BTreeSet::new();
    for m in 0..=r1 {
        for n in 0..=(r1 - m) {
            let p = r1 - m - n;
            set.extend(canonicalize(m, n, p));
        }
    }
    set.into_iter().collect()
}

/// Reduces an arbitrary ordered triple to its canonical representative.
///
/// Triples are identified under cyclic rotations, and under all permutations
/// when an entry vanishes; the representative is the one satisfying the
/// canonical-form conditions. A strictly ordered triple and its reversal are
/// distinct maps, and both reduce to representatives with `m` maximal.
fn canonicalize(m: u64, n: u64, p: u64) -> Option<TorusMap> {
    let candidates: Vec<(u64, u64, u64)> = if m == 0 || n == 0 || p == 0 {
        let mut v = [m, n, p];
        v.sort_unstable_by(|a, b| b.cmp(a));
        vec![(v[0], v[1], v[2])]
    } else {
        vec![(m, n, p), (n, p, m), (p, m, n)]
    };
    candidates
        .into_iter()
        .find_map(|(a, b, c)| TorusMap::new(a, b, c))
}

/// Closed-form count of canonical torus maps with `r1` legs.
pub fn count_torus_maps(r1: u64) -> u64 {
    let base = (r1 * r1 + 9) / 6;
    let sextic = u64::from(r1 % 6 == 0);
    let trivial = u64::from(r1 == 0);
    base + sextic - trivial
}

/// Closed-form count of a parity class.
///
/// `Plus` and `Minus` use the nearest integer to `(r1 +- 3)^2 / 12`;
/// `Zero` counts `r1` maps. At `r1 = 0` those closed forms overshoot
/// (they would give 1 ordered map where only the empty map exists), so the
/// trivial case is handled directly.
pub fn count_parity(r1: u64, class: ParityClass) -> u64 {
    match class {
        ParityClass::Zero => {
            if r1 == 0 {
                1
            } else {
                r1
            }
        }
        ParityClass::Plus => nearest_div((r1 + 3) * (r1 + 3), 12),
        ParityClass::Minus => {
            if r1 <= 3 {
                0
            } else {
                nearest_div((r1 - 3) * (r1 - 3), 12)
            }
        }
    }
}

fn nearest_div(num: u64, den: u64) -> u64 {
    (num + den / 2) / den
}

/// Enumerates one parity class by brute force.
pub fn enumerate_parity(r1: u64, class: ParityClass) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for m in 0..=r1 {
        for n in 0..=(r1 - m) {
            let p = r1 - m - n;
            let weakly = m >= n && n >= p;
            let strictly = m > n && n > p && p > 0;
            let keep = match class {
                ParityClass::Plus => weakly,
                ParityClass::Minus => strictly,
                ParityClass::Zero => weakly && !strictly,
            };
            if keep {
                out.push((m, n, p));
            }
        }
    }
    out
}

/// First `count + 1` Taylor coefficients of the counting generating function.
///
/// `all = true` expands `(1 + x^6) / ((1-x)(1-x^2)(1-x^3))`, matching
/// `count_torus_maps`; `all = false` expands `1 / ((1-x)(1-x^2)(1-x^3))`,
/// matching the `Plus` parity counts.
pub fn generating_coeffs(all: bool, count: usize) -> Vec<u64> {
    let len = count + 1;
    // Numerator series.
    let mut series = vec![0i64; len];
    series[0] = 1;
    if all && len > 6 {
        series[6] = 1;
    }
    // Divide by (1 - x^k) <=> cumulative sums with stride k.
    for k in [1usize, 2, 3] {
        for i in k..len {
            series[i] += series[i - k];
        }
    }
    series.into_iter().map(|c| c as u64).collect()
}

/// Number of independent torus one-point solutions for external `(r1, s1)`:
/// the map count minus rotation-symmetry losses.
///
/// Returns 0 when the spin `r1*s1` is odd (no solutions at all).
pub fn nonzero_count(r1: u64, s1: &BigRational) -> u64 {
    let spin = BigRational::from(num::BigInt::from(r1 as i64)) * s1;
    if !spin.is_integer() {
        return 0;
    }
    let spin_int = spin.to_integer();
    if (&spin_int % 2i32) != num::BigInt::from(0) {
        return 0;
    }
    let div4 = (&spin_int % 4i32) == num::BigInt::from(0);
    let div6 = (&spin_int % 6i32) == num::BigInt::from(0);
    let mut count = count_torus_maps(r1);
    if r1 % 2 == 0 && !div4 {
        count -= 1;
    }
    if r1 % 3 == 0 && !div6 {
        count -= 1;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[test]
    fn enumerate_small_r1() {
        let maps: Vec<_> = enumerate_torus_maps(2)
            .iter()
            .map(|m| (m.m, m.n, m.p))
            .collect();
        assert_eq!(maps, vec![(1, 1, 0), (2, 0, 0)]);
        let maps3: Vec<_> = enumerate_torus_maps(3)
            .iter()
            .map(|m| (m.m, m.n, m.p))
            .collect();
        assert_eq!(maps3, vec![(1, 1, 1), (2, 1, 0), (3, 0, 0)]);
        let maps0: Vec<_> = enumerate_torus_maps(0)
            .iter()
            .map(|m| (m.m, m.n, m.p))
            .collect();
        assert_eq!(maps0, vec![(0, 0, 0)]);
    }

    #[test]
    fn counts_match_reference_table() {
        let all = [1, 1, 2, 3, 4, 5, 8, 9, 12, 15, 18, 21, 26, 29, 34];
        let minus = [0, 0, 0, 0, 0, 0, 1, 1, 2, 3, 4, 5, 7, 8, 10];
        let plus = [1, 1, 2, 3, 4, 5, 7, 8, 10, 12, 14, 16, 19, 21, 24];
        for r1 in 0..=14u64 {
            assert_eq!(count_torus_maps(r1), all[r1 as usize], "M({r1})");
            assert_eq!(
                count_parity(r1, ParityClass::Minus),
                minus[r1 as usize],
                "M-({r1})"
            );
            assert_eq!(
                count_parity(r1, ParityClass::Plus),
                plus[r1 as usize],
                "M+({r1})"
            );
        }
    }

    #[test]
    fn counts_match_enumeration_up_to_30() {
        for r1 in 0..=30u64 {
            assert_eq!(enumerate_torus_maps(r1).len() as u64, count_torus_maps(r1));
            for class in [ParityClass::Zero, ParityClass::Plus, ParityClass::Minus] {
                assert_eq!(
                    enumerate_parity(r1, class).len() as u64,
                    count_parity(r1, class),
                    "r1={r1}"
                );
            }
            if r1 > 0 {
                assert_eq!(count_parity(r1, ParityClass::Zero), r1);
            }
        }
    }

    #[test]
    fn generating_functions_match_counts() {
        let all = generating_coeffs(true, 30);
        let plus = generating_coeffs(false, 30);
        for r1 in 0..=30u64 {
            assert_eq!(all[r1 as usize], count_torus_maps(r1));
            assert_eq!(plus[r1 as usize], count_parity(r1, ParityClass::Plus));
        }
    }

    #[test]
    fn plus_minus_shift_identity() {
        for r1 in 0..=24u64 {
            assert_eq!(
                count_parity(r1, ParityClass::Plus),
                count_parity(r1 + 6, ParityClass::Minus)
            );
        }
    }

    #[test]
    fn signatures() {
        let m = TorusMap::new(3, 2, 1).unwrap();
        assert_eq!(m.signature(), rat(3, 2));
        assert_eq!(TorusMap::new(3, 0, 0).unwrap().signature(), rat(0, 1));
        let s = SphereMap {
            m: 3,
            n: 2,
            p: 1,
            tag: SphereTag::Plus,
        };
        assert_eq!(s.signature(), (5, 3, 4));
    }

    #[test]
    fn sphere_signature_bound() {
        for r1 in 0..=12u64 {
            for map in enumerate_torus_maps(r1) {
                let sigma2 = map.signature() * rat(2, 1);
                for sm in map.phi() {
                    let (a, b, c) = sm.signature();
                    let min = a.min(b).min(c);
                    assert_eq!(rat(min as i64, 1), sigma2, "map {map:?} -> {sm:?}");
                }
            }
        }
    }

    #[test]
    fn phi_partitions_sphere_maps() {
        for r1 in 0..=30u64 {
            let mut seen = BTreeSet::new();
            let mut total = 0u64;
            for map in enumerate_torus_maps(r1) {
                let img = map.phi();
                assert!(matches!(img.len(), 1 | 2 | 3 | 6), "phi size {}", img.len());
                for sm in img {
                    total += 1;
                    assert_eq!(sm.tag == SphereTag::Star, sm.m * sm.n * sm.p == 0);
                    assert_eq!(sm.m + sm.n + sm.p, r1);
                    assert!(seen.insert(sm), "duplicate sphere map {sm:?}");
                }
            }
            let expect = r1 * r1 + 2 - u64::from(r1 == 0);
            assert_eq!(total, expect, "r1={r1}");
        }
    }

    #[test]
    fn symmetry_constraints() {
        assert_eq!(nonzero_count(2, &rat(1, 1)), 1);
        assert_eq!(nonzero_count(3, &rat(2, 3)), 2);
        assert_eq!(nonzero_count(2, &rat(0, 1)), 2);
        // Odd spin: no solutions.
        assert_eq!(nonzero_count(1, &rat(1, 1)), 0);
        // (k,k,0) map requires 4 | r1 s1.
        let m = TorusMap::new(1, 1, 0).unwrap();
        assert_eq!(m.symmetry_order(), 4);
        assert!(m.allows_s1(&rat(2, 1)));
        assert!(!m.allows_s1(&rat(1, 1)));
        let t = TorusMap::new(1, 1, 1).unwrap();
        assert_eq!(t.symmetry_order(), 6);
        assert!(t.allows_s1(&rat(2, 1)));
        assert!(!t.allows_s1(&rat(4, 3)));
    }
}
