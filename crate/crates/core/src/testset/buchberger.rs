//! Critical-pair completion for lattice ideals.
//!
//! Generators are pure-difference binomials `x^lead - x^trail` stored as
//! exponent pairs.  S-binomials and reductions of pure differences stay pure
//! differences, so the whole computation runs on integer vectors.  The
//! lattice ideal is obtained from a kernel basis by one completion pass per
//! variable under a positively graded revlex order with that variable last
//! (saturation), followed by a final completion under the cost order.

use std::cmp::Ordering;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::order::TermOrder;
use super::TestSetError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binomial {
    pub lead: Vec<i64>,
    pub trail: Vec<i64>,
    mask: u64,
}

fn support_mask(m: &[i64]) -> u64 {
    let mut mask = 0u64;
    for (i, &e) in m.iter().enumerate().take(64) {
        if e != 0 {
            mask |= 1 << i;
        }
    }
    mask
}

fn divides(small: &[i64], small_mask: u64, big: &[i64], big_mask: u64) -> bool {
    if small_mask & !big_mask != 0 {
        return false;
    }
    small.iter().zip(big).all(|(&s, &b)| s <= b)
}

impl Binomial {
    /// Builds an oriented binomial; `None` if the monomials coincide.
    pub fn oriented(m1: Vec<i64>, m2: Vec<i64>, order: &TermOrder) -> Option<Binomial> {
        match order.cmp(&m1, &m2) {
            Ordering::Greater => Some(Binomial::raw(m1, m2)),
            Ordering::Less => Some(Binomial::raw(m2, m1)),
            Ordering::Equal => None,
        }
    }

    fn raw(lead: Vec<i64>, trail: Vec<i64>) -> Binomial {
        let mask = support_mask(&lead);
        Binomial { lead, trail, mask }
    }

    /// Builds from a lattice vector: lead is the larger of positive and
    /// negative part under the order.
    pub fn from_vector(v: &[i64], order: &TermOrder) -> Option<Binomial> {
        let pos: Vec<i64> = v.iter().map(|&x| x.max(0)).collect();
        let neg: Vec<i64> = v.iter().map(|&x| (-x).max(0)).collect();
        Binomial::oriented(pos, neg, order)
    }

    /// The lattice vector `lead - trail`.
    pub fn vector(&self) -> Vec<i64> {
        self.lead
            .iter()
            .zip(&self.trail)
            .map(|(&l, &t)| l - t)
            .collect()
    }

    /// Removes a common monomial factor in variable `var` (saturation step).
    fn strip_variable(&mut self, var: usize) {
        let k = self.lead[var].min(self.trail[var]);
        if k > 0 {
            self.lead[var] -= k;
            self.trail[var] -= k;
            self.mask = support_mask(&self.lead);
        }
    }
}

/// Largest `k` such that `g` can rewrite the monomial `m` by `k` consecutive
/// steps: step `j` needs `m - (j-1)(lead - trail) >= lead` componentwise,
/// which only binds where `lead - trail > 0`.  Divisibility of `m` by the
/// lead must already hold; every monomial order refines divisibility, so at
/// least one coordinate of `lead - trail` is positive and `k` is finite.
fn reduction_multiplicity(g: &Binomial, m: &[i64]) -> i64 {
    let mut k = i64::MAX;
    for i in 0..m.len() {
        let d = g.lead[i] - g.trail[i];
        if d > 0 {
            k = k.min(1 + (m[i] - g.lead[i]) / d);
        }
    }
    k
}

/// Step count `m <= k` at which the batched rewrite of `lead` by `g` lands
/// exactly on `trail`, if any: there the binomial cancels to zero and the
/// batch must not jump over it.
fn cancellation_step(g: &Binomial, lead: &[i64], trail: &[i64], k: i64) -> Option<i64> {
    let mut m: Option<i64> = None;
    for i in 0..lead.len() {
        let d = g.lead[i] - g.trail[i];
        let diff = lead[i] - trail[i];
        if d == 0 {
            if diff != 0 {
                return None;
            }
        } else {
            if diff % d != 0 {
                return None;
            }
            let mi = diff / d;
            if m.replace(mi).is_some_and(|prev| prev != mi) {
                return None;
            }
        }
    }
    m.filter(|&mi| (1..=k).contains(&mi))
}

/// Reduces the top monomial of `b` by `basis` until irreducible.  Returns
/// `None` if the binomial collapses to zero.  Consecutive rewrites by the
/// same element are applied in one batch: reduction chains along a nearly
/// parallel direction would otherwise advance one lattice step at a time.
fn normal_form(mut b: Binomial, basis: &[Binomial], order: &TermOrder) -> Option<Binomial> {
    'outer: loop {
        let b_mask = support_mask(&b.lead);
        for g in basis {
            if divides(&g.lead, g.mask, &b.lead, b_mask) {
                let k = reduction_multiplicity(g, &b.lead);
                if cancellation_step(g, &b.lead, &b.trail, k).is_some() {
                    return None;
                }
                for i in 0..b.lead.len() {
                    b.lead[i] -= k * (g.lead[i] - g.trail[i]);
                }
                match order.cmp(&b.lead, &b.trail) {
                    Ordering::Equal => return None,
                    Ordering::Less => std::mem::swap(&mut b.lead, &mut b.trail),
                    Ordering::Greater => {}
                }
                continue 'outer;
            }
        }
        b.mask = support_mask(&b.lead);
        return Some(b);
    }
}

/// Reduces the trailing monomial; leads are assumed interreduced already so
/// this cannot change the lead.
fn reduce_tail(b: &mut Binomial, basis: &[Binomial], skip: usize) {
    'outer: loop {
        let t_mask = support_mask(&b.trail);
        for (j, g) in basis.iter().enumerate() {
            if j == skip {
                continue;
            }
            if divides(&g.lead, g.mask, &b.trail, t_mask) {
                let k = reduction_multiplicity(g, &b.trail);
                for i in 0..b.trail.len() {
                    b.trail[i] -= k * (g.lead[i] - g.trail[i]);
                }
                continue 'outer;
            }
        }
        return;
    }
}

fn lcm(u: &[i64], v: &[i64]) -> Vec<i64> {
    u.iter().zip(v).map(|(&a, &b)| a.max(b)).collect()
}

fn weight(grading: &[i64], m: &[i64]) -> i64 {
    grading.iter().zip(m).map(|(&g, &e)| g * e).sum()
}

/// Weight ceiling for a truncated completion.  The grading is constant on
/// lattice cosets, so a monomial's weight is an invariant of everything
/// derived from it: an S-binomial inherits the weight of its pair's lcm, and
/// reduction preserves it.  Discarding pairs whose lcm weighs more than the
/// cap therefore loses nothing that could ever rewrite a monomial of weight
/// at most the cap -- the truncated basis is a complete test set for every
/// fiber whose points weigh at most the cap, at a fraction of the work.
pub struct Truncation<'a> {
    pub grading: &'a [i64],
    pub cap: i128,
}

impl Truncation<'_> {
    fn exceeded(&self, m: &[i64]) -> bool {
        let w: i128 = self
            .grading
            .iter()
            .zip(m)
            .map(|(&g, &e)| g as i128 * e as i128)
            .sum();
        w > self.cap
    }
}

/// Buchberger completion with Gebauer-Moeller style pair pruning (multiple
/// and duplicate lcm criteria plus the coprime-lead criterion) and optional
/// weight truncation.
///
/// Pairs are processed in increasing grading weight of the lcm.  The grading
/// is constant on cosets, so everything of weight below the pair currently
/// processed is already complete: an S-binomial meets its full set of
/// reducers the moment it is formed, which keeps transient families of
/// mutually irreducible elements from piling up in the basis.
pub fn buchberger(
    gens: Vec<Binomial>,
    order: &TermOrder,
    grading: &[i64],
    pair_cap: usize,
    trunc: Option<&Truncation>,
) -> Result<Vec<Binomial>, TestSetError> {
    let mut g: Vec<Binomial> = Vec::new();
    for b in gens {
        if trunc.is_some_and(|t| t.exceeded(&b.lead)) {
            continue;
        }
        if let Some(nf) = normal_form(b, &g, order) {
            g.push(nf);
        }
    }

    let mut pairs: BinaryHeap<Reverse<(i64, u32, u32)>> = BinaryHeap::new();
    let mut pairs_created = 0usize;
    for t in 1..g.len() {
        push_pairs(&g, t, grading, &mut pairs, &mut pairs_created, trunc);
    }

    while let Some(Reverse((_, i, j))) = pairs.pop() {
        let (f, h) = (&g[i as usize], &g[j as usize]);
        let l = lcm(&f.lead, &h.lead);
        // coprime leads: S-binomial reduces to zero (mask is a fast path,
        // it only covers the first 64 variables)
        if f.mask & h.mask == 0 && f.lead.iter().zip(&h.lead).all(|(&a, &b)| a.min(b) == 0) {
            continue;
        }
        let m1: Vec<i64> = l
            .iter()
            .zip(&f.lead)
            .zip(&f.trail)
            .map(|((&lc, &le), &tr)| lc - le + tr)
            .collect();
        let m2: Vec<i64> = l
            .iter()
            .zip(&h.lead)
            .zip(&h.trail)
            .map(|((&lc, &le), &tr)| lc - le + tr)
            .collect();
        let Some(s) = Binomial::oriented(m1, m2, order) else {
            continue;
        };
        if let Some(nf) = normal_form(s, &g, order) {
            g.push(nf);
            let t = g.len() - 1;
            push_pairs(&g, t, grading, &mut pairs, &mut pairs_created, trunc);
            if pairs_created > pair_cap {
                return Err(TestSetError::ResourceExhausted {
                    pairs: pairs_created,
                    basis_size: g.len(),
                });
            }
        }
    }
    Ok(interreduce(g, order))
}

fn push_pairs(
    g: &[Binomial],
    t: usize,
    grading: &[i64],
    pairs: &mut BinaryHeap<Reverse<(i64, u32, u32)>>,
    created: &mut usize,
    trunc: Option<&Truncation>,
) {
    let new = &g[t];
    let mut cand: Vec<(usize, Vec<i64>)> = (0..t)
        .map(|i| (i, lcm(&g[i].lead, &new.lead)))
        .filter(|(_, l)| !trunc.is_some_and(|tr| tr.exceeded(l)))
        .collect();
    // multiple criterion: drop a pair whose lcm is a proper multiple of a
    // kept pair's lcm; duplicate lcms keep the lowest partner index.  In
    // weight order a proper divisor precedes its multiples, so one pass
    // against the kept list suffices (and that list stays short).
    cand.sort_by_key(|(i, l)| (weight(grading, l), *i));
    let mut kept: Vec<(usize, Vec<i64>)> = Vec::new();
    'cand: for (i, l) in cand {
        for (_, k) in &kept {
            if k.iter().zip(&l).all(|(&a, &b)| a <= b) {
                continue 'cand; // equal lcms land here too
            }
        }
        kept.push((i, l));
    }
    for (i, l) in kept {
        pairs.push(Reverse((weight(grading, &l), i as u32, t as u32)));
        *created += 1;
    }
}

/// Minimizes the basis and fully reduces tails, yielding the reduced basis.
pub fn interreduce(g: Vec<Binomial>, order: &TermOrder) -> Vec<Binomial> {
    // drop elements whose lead is divisible by another surviving lead
    let mut keep = vec![true; g.len()];
    for i in 0..g.len() {
        if !keep[i] {
            continue;
        }
        for j in 0..g.len() {
            if i == j || !keep[j] {
                continue;
            }
            let (a, b) = (&g[i], &g[j]);
            if divides(&b.lead, b.mask, &a.lead, a.mask) {
                if a.lead == b.lead && i < j {
                    continue; // the twin at j will be dropped instead
                }
                keep[i] = false;
                break;
            }
        }
    }
    let mut minimal: Vec<Binomial> = g
        .into_iter()
        .zip(keep)
        .filter_map(|(b, k)| k.then_some(b))
        .collect();
    let snapshot = minimal.clone();
    for (i, b) in minimal.iter_mut().enumerate() {
        reduce_tail(b, &snapshot, i);
    }
    minimal.sort_by(|x, y| order.cmp(&x.lead, &y.lead));
    minimal
}

/// Saturates the generated ideal with respect to every variable and returns
/// the reduced basis under the cost order, truncated at `weight_cap`.
///
/// Truncation is applied only in the final pass: the saturation passes strip
/// common variable factors afterwards, which lowers weights, so an element
/// above the cap there may still matter.  The final pass strips nothing, so
/// there the weight argument on [`Truncation`] holds exactly.
pub fn lattice_groebner(
    kernel: &[Vec<i64>],
    cost: &[i64],
    assets: usize,
    grading: &[i64],
    weight_cap: i128,
    pair_cap: usize,
) -> Result<Vec<Binomial>, TestSetError> {
    let nvars = grading.len();
    let final_order = TermOrder::CostLex {
        cost: cost.to_vec(),
        assets,
    };
    let mut gens: Vec<Binomial> = kernel
        .iter()
        .filter_map(|v| Binomial::from_vector(v, &final_order))
        .collect();
    for var in 0..nvars {
        let order = TermOrder::GradedRevlex {
            grading: grading.to_vec(),
            last: var,
        };
        for b in &mut gens {
            if order.cmp(&b.lead, &b.trail) == Ordering::Less {
                let m = std::mem::take(&mut b.lead);
                b.lead = std::mem::replace(&mut b.trail, m);
                b.mask = support_mask(&b.lead);
            }
        }
        gens = buchberger(gens, &order, grading, pair_cap, None)?;
        for b in &mut gens {
            b.strip_variable(var);
        }
    }
    for b in &mut gens {
        if final_order.cmp(&b.lead, &b.trail) == Ordering::Less {
            let m = std::mem::take(&mut b.lead);
            b.lead = std::mem::replace(&mut b.trail, m);
            b.mask = support_mask(&b.lead);
        }
    }
    let trunc = Truncation {
        grading,
        cap: weight_cap,
    };
    buchberger(gens, &final_order, grading, pair_cap, Some(&trunc))
}
