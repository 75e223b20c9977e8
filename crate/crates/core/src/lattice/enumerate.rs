//! Exact law of a primal path and a dual path over a finite window, by closed
//! form and by brute force over every field configuration.

use super::field::ExplicitField;
use super::path::{trace_path, Direction, LatticeSite};
use super::{is_primal, wrap_step, LatticeError};
use crate::Prob;
use std::collections::BTreeMap;

pub const MAX_ENUM_SITES: u64 = 24;

/// One support point. Paths are listed by height `h1..=h2`; the `xi` labels
/// are the field values read on each step, so on `2n = 2` the two parallel
/// edges between the same sites are told apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairEntry {
    pub primal: Vec<u32>,
    pub dual: Vec<u32>,
    pub primal_xi: Vec<i8>,
    pub dual_xi: Vec<i8>,
    pub nb: u32,
    pub prob: Prob,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairLaw {
    pub n: u32,
    pub x1: u32,
    pub x2: u32,
    pub h1: i64,
    pub h2: i64,
    pub entries: Vec<PairEntry>,
}

type Key = (Vec<i8>, Vec<i8>);

/// `#{i : C1(i) = C2(i+1)}` for paths indexed from `h1`.
pub fn contacts(c1: &[u32], c2: &[u32]) -> u32 {
    (0..c1.len().saturating_sub(1)).filter(|&i| c1[i] == c2[i + 1]).count() as u32
}

fn check(n: u32, x1: u32, x2: u32, h1: i64, h2: i64) -> Result<(), LatticeError> {
    if n == 0 {
        return Err(LatticeError::ZeroWidth);
    }
    if h2 <= h1 {
        return Err(LatticeError::EmptyWindow(h1, h2));
    }
    let m = 2 * n;
    for x in [x1, x2] {
        if x >= m {
            return Err(LatticeError::OutOfRange { x, modulus: m });
        }
    }
    if !is_primal(x1, h1) {
        return Err(LatticeError::Parity { x: x1, t: h1 });
    }
    if is_primal(x2, h2) {
        return Err(LatticeError::Parity { x: x2, t: h2 });
    }
    let sites = ExplicitField::sites(n, h1, h2);
    if n > 4 || h2 - h1 > 6 || sites > MAX_ENUM_SITES {
        return Err(LatticeError::EnumerationTooLarge(sites));
    }
    Ok(())
}

fn signs(bits: u64, len: usize) -> Vec<i8> {
    (0..len).map(|k| if bits >> k & 1 == 1 { 1 } else { -1 }).collect()
}

/// Closed form: every consistent pair of edge sequences has probability
/// `2^(-2 dh + Nb)`.
pub fn enumerate_pair_law(n: u32, x1: u32, x2: u32, h1: i64, h2: i64) -> Result<PairLaw, LatticeError> {
    check(n, x1, x2, h1, h2)?;
    let m = 2 * n;
    let dh = (h2 - h1) as usize;
    let mut entries = Vec::new();
    for a in 0..(1u64 << dh) {
        let s = signs(a, dh);
        let mut c1 = vec![x1];
        for &v in &s {
            c1.push(wrap_step(*c1.last().unwrap(), v, m));
        }
        for b in 0..(1u64 << dh) {
            // e[i] is xi(C2(i+1), i), read by the dual on its way from i+1 down to i
            let e = signs(b, dh);
            let mut c2 = vec![0u32; dh + 1];
            c2[dh] = x2;
            for i in (0..dh).rev() {
                c2[i] = wrap_step(c2[i + 1], -e[i], m);
            }
            let consistent = (0..dh).all(|i| c1[i] != c2[i + 1] || s[i] == e[i]);
            if !consistent {
                continue;
            }
            let nb = contacts(&c1, &c2);
            let free = 2 * dh as u32 - nb;
            entries.push(PairEntry {
                primal: c1.clone(),
                dual: c2,
                primal_xi: s.clone(),
                dual_xi: e,
                nb,
                prob: Prob::new(1, 1i64 << free),
            });
        }
    }
    Ok(PairLaw { n, x1, x2, h1, h2, entries })
}

/// Frequencies of the traced pair over all `2^(n dh)` fields on the window.
pub fn brute_force_pair_law(n: u32, x1: u32, x2: u32, h1: i64, h2: i64) -> Result<PairLaw, LatticeError> {
    check(n, x1, x2, h1, h2)?;
    let sites = ExplicitField::sites(n, h1, h2);
    let total = 1u64 << sites;
    let mut counts: BTreeMap<Key, (Vec<u32>, Vec<u32>, u64)> = BTreeMap::new();
    for bits in 0..total {
        let f = ExplicitField { n, h_lo: h1, h_hi: h2, bits };
        let p = trace_path(&f, LatticeSite::new(x1, h1), Direction::Up, h2)?;
        let d = trace_path(&f, LatticeSite::new(x2, h2), Direction::Down, h1)?;
        let mut dual_xi = d.xi.clone();
        dual_xi.reverse();
        let mut dual = d.positions.clone();
        dual.reverse();
        let slot = counts.entry((p.xi.clone(), dual_xi)).or_insert((p.positions.clone(), dual, 0));
        slot.2 += 1;
    }
    let entries = counts
        .into_iter()
        .map(|((primal_xi, dual_xi), (primal, dual, c))| PairEntry {
            nb: contacts(&primal, &dual),
            primal,
            dual,
            primal_xi,
            dual_xi,
            prob: Prob::new(c as i64, total as i64),
        })
        .collect();
    Ok(PairLaw { n, x1, x2, h1, h2, entries })
}

impl PairLaw {
    pub fn total(&self) -> Prob {
        self.entries.iter().map(|e| e.prob).sum()
    }

    fn table(&self) -> BTreeMap<Key, Prob> {
        self.entries
            .iter()
            .map(|e| ((e.primal_xi.clone(), e.dual_xi.clone()), e.prob))
            .collect()
    }

    /// Exact total variation distance between two laws on the same window.
    pub fn total_variation(&self, other: &PairLaw) -> Prob {
        let (a, b) = (self.table(), other.table());
        let mut keys: Vec<&Key> = a.keys().chain(b.keys()).collect();
        keys.sort();
        keys.dedup();
        let zero = Prob::from_integer(0);
        let sum: Prob = keys
            .into_iter()
            .map(|k| {
                let d = *a.get(k).unwrap_or(&zero) - *b.get(k).unwrap_or(&zero);
                if d < zero {
                    -d
                } else {
                    d
                }
            })
            .sum();
        sum / 2
    }

    /// Rows `(path1, path2, nb, prob_num, prob_den)`; paths as space-separated positions.
    pub fn csv_rows(&self) -> Vec<crate::export::PairLawRow> {
        let fmt = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        self.entries
            .iter()
            .map(|e| crate::export::PairLawRow {
                path1: fmt(&e.primal),
                path2: fmt(&e.dual),
                nb: e.nb,
                prob_num: *e.prob.numer(),
                prob_den: *e.prob.denom(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_sums_to_one_and_matches_brute_force() {
        let law = enumerate_pair_law(2, 0, 1, 0, 2).unwrap();
        assert_eq!(law.total(), Prob::from_integer(1));
        let bf = brute_force_pair_law(2, 0, 1, 0, 2).unwrap();
        assert_eq!(law.total_variation(&bf), Prob::from_integer(0));
        for e in &law.entries {
            assert_eq!(e.prob, Prob::new(1, 1 << (4 - e.nb)));
        }
    }

    #[test]
    fn two_site_circle_has_one_contact_per_step() {
        let law = enumerate_pair_law(1, 0, 0, 0, 3).unwrap();
        assert_eq!(law.entries.len(), 8);
        assert!(law.entries.iter().all(|e| e.nb == 3));
        assert_eq!(law.total(), Prob::from_integer(1));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(enumerate_pair_law(2, 1, 1, 0, 2).is_err());
        assert!(enumerate_pair_law(2, 0, 0, 0, 2).is_err());
        assert!(enumerate_pair_law(8, 0, 1, 0, 2).is_err());
        assert!(enumerate_pair_law(2, 0, 1, 0, 9).is_err());
    }
}
