//! Exact truncated generating functions by forward dynamic programming over
//! words.
//!
//! Every routine here is generic over the coefficient type, so the same code
//! runs in exact rational arithmetic (`BigRational`) and in `f64`. The state
//! space is the set of words reachable in at most `N` steps, which grows
//! geometrically in `N`; the order is therefore capped (14 by default). For
//! the shipped instances the layer at order `N` holds roughly `4 * 2^(N-1)`
//! words, about 33k at `N = 14`, each costing a few hundred bytes including
//! the hash-map entry.
//!
//! The renewal-increment law additionally has a reduced form
//! ([`reduced_renewal_increment_dist`]) that collapses excursions into deeper
//! cones into first-return series. It reaches orders in the thousands and is
//! cross-checked against the word enumeration up to the cap.

use std::collections::{BTreeMap, HashMap};
use std::hash::BuildHasherDefault;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::genfun::GenFunContext;
use crate::kernel::Walk;
use crate::scalar::Scalar;
use crate::series::TruncatedSeries;
use crate::word::{Factor, Letter, Word};

pub const DEFAULT_ORDER_CAP: usize = 14;
/// Highest order at which the identity suite runs in rational arithmetic.
pub const RATIONAL_ORDER: usize = 10;

type Layer<C> = HashMap<Word, C, BuildHasherDefault<std::collections::hash_map::DefaultHasher>>;

fn add_mass<C: Scalar>(layer: &mut Layer<C>, w: Word, mass: C) {
    match layer.get_mut(&w) {
        Some(m) => *m = m.clone() + mass,
        None => {
            layer.insert(w, mass);
        }
    }
}

/// Kind of first-passage series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FirstPassage {
    /// `L(x, y | z)`: paths from `x` to `y` that do not revisit `x`.
    LastExit { from: Word, to: Word },
    /// `xi_i(z)`: first visit to `V_i^x` (length-one words of factor `i`) from `o`.
    Xi(Factor),
}

#[derive(Clone, Debug)]
pub struct Oracle<'a> {
    walk: &'a Walk,
    cap: usize,
}

impl<'a> Oracle<'a> {
    pub fn new(walk: &'a Walk) -> Oracle<'a> {
        Oracle {
            walk,
            cap: DEFAULT_ORDER_CAP,
        }
    }

    pub fn with_cap(walk: &'a Walk, cap: usize) -> Oracle<'a> {
        Oracle { walk, cap }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Rough count of words reachable from `o` in at most `order` steps.
    pub fn estimated_states(&self, order: usize) -> f64 {
        let b1 = (self.walk.factor_size(Factor::One) - 1) as f64;
        let b2 = (self.walk.factor_size(Factor::Two) - 1) as f64;
        let branching = (b1 * b2).sqrt();
        (b1 + b2) * (0..order).map(|k| branching.powi(k as i32)).sum::<f64>() + 1.0
    }

    /// Rough memory footprint in bytes of one DP layer at `order`.
    pub fn estimated_bytes(&self, order: usize) -> f64 {
        self.estimated_states(order) * (64.0 + 8.0 * order as f64)
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order > self.cap {
            Err(Error::OrderTooLarge {
                requested: order,
                cap: self.cap,
            })
        } else {
            Ok(())
        }
    }

    /// One forward step. `on_edge(from, to, mass)` sees every transition;
    /// words failing `keep` are not carried into the next layer.
    fn step<C: Scalar>(
        &self,
        layer: &Layer<C>,
        mut on_edge: impl FnMut(&Word, &Word, &C),
        keep: impl Fn(&Word) -> bool,
    ) -> Layer<C> {
        let mut next = Layer::<C>::default();
        for (w, m) in layer {
            for (to, p) in self.walk.successors::<C>(w) {
                let mass = m.clone() * p;
                on_edge(w, &to, &mass);
                if keep(&to) {
                    add_mass(&mut next, to, mass);
                }
            }
        }
        next
    }

    /// `G(x, y | z)` up to order `n`.
    pub fn green_series<C: Scalar>(&self, x: &Word, y: &Word, n: usize) -> Result<TruncatedSeries<C>> {
        Ok(self.green_series_many(x, std::slice::from_ref(y), n)?.remove(0))
    }

    /// `G(x, y | z)` for several targets from one forward pass.
    pub fn green_series_many<C: Scalar>(
        &self,
        x: &Word,
        targets: &[Word],
        n: usize,
    ) -> Result<Vec<TruncatedSeries<C>>> {
        self.check_order(n)?;
        self.forward_many(x, targets, n, false)
    }

    fn forward_many<C: Scalar>(
        &self,
        x: &Word,
        targets: &[Word],
        n: usize,
        taboo_start: bool,
    ) -> Result<Vec<TruncatedSeries<C>>> {
        let max_target = targets.iter().map(Word::len).max().unwrap_or(0);
        let mut out = vec![vec![C::zero(); n + 1]; targets.len()];
        let mut layer = Layer::<C>::default();
        layer.insert(x.clone(), C::one());
        for (t, y) in targets.iter().enumerate() {
            if y == x {
                out[t][0] = C::one();
            }
        }
        for step in 1..=n {
            let remaining = n - step;
            layer = self.step(&layer, |_, _, _| {}, |w| w.len() <= max_target + remaining);
            if taboo_start {
                layer.remove(x);
            }
            for (t, y) in targets.iter().enumerate() {
                if let Some(m) = layer.get(y) {
                    out[t][step] = m.clone();
                }
            }
        }
        Ok(out.into_iter().map(TruncatedSeries::new).collect())
    }

    /// `L(x, y | z)` for several targets: the start is taboo after time 0.
    pub fn last_exit_series_many<C: Scalar>(
        &self,
        x: &Word,
        targets: &[Word],
        n: usize,
    ) -> Result<Vec<TruncatedSeries<C>>> {
        self.check_order(n)?;
        self.forward_many(x, targets, n, true)
    }

    pub fn first_passage_series<C: Scalar>(&self, kind: &FirstPassage, n: usize) -> Result<TruncatedSeries<C>> {
        self.check_order(n)?;
        match kind {
            FirstPassage::LastExit { from, to } => {
                Ok(self.forward_many(from, std::slice::from_ref(to), n, true)?.remove(0))
            }
            FirstPassage::Xi(f) => {
                let mut coeffs = vec![C::zero(); n + 1];
                let mut layer = Layer::<C>::default();
                layer.insert(Word::root(), C::one());
                let hits = |w: &Word| w.len() == 1 && w.first().is_some_and(|l| l.factor == *f);
                for (step, coeff) in coeffs.iter_mut().enumerate().skip(1) {
                    let remaining = n - step;
                    layer = self.step(&layer, |_, _, _| {}, |w| w.len() <= 1 + remaining);
                    let absorbed: Vec<Word> = layer.keys().filter(|w| hits(w)).cloned().collect();
                    for w in absorbed {
                        let m = layer.remove(&w).expect("key present");
                        *coeff = coeff.clone() + m;
                    }
                }
                Ok(TruncatedSeries::new(coeffs))
            }
        }
    }

    /// `L_i(x, y | t)` of the factor chain itself, by a taboo DP on `V_i`.
    pub fn factor_last_exit_series<C: Scalar>(&self, f: Factor, x: u16, y: u16, n: usize) -> TruncatedSeries<C> {
        self.factor_series(f, x, y, n, true)
    }

    /// `G_i(x, y | t)` of the factor chain.
    pub fn factor_green_series<C: Scalar>(&self, f: Factor, x: u16, y: u16, n: usize) -> TruncatedSeries<C> {
        self.factor_series(f, x, y, n, false)
    }

    fn factor_series<C: Scalar>(&self, f: Factor, x: u16, y: u16, n: usize, taboo: bool) -> TruncatedSeries<C> {
        let size = self.walk.factor_size(f);
        let mut row = vec![C::zero(); size];
        row[x as usize] = C::one();
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(row[y as usize].clone());
        for _ in 1..=n {
            let mut next = vec![C::zero(); size];
            for (i, m) in row.iter().enumerate() {
                if m.is_zero() {
                    continue;
                }
                for &j in self.walk.factor_targets(f, i as u16) {
                    let p = self.walk.factor_prob_scalar::<C>(f, i as u16, j);
                    next[j as usize] = next[j as usize].clone() + m.clone() * p;
                }
            }
            if taboo {
                next[x as usize] = C::zero();
            }
            coeffs.push(next[y as usize].clone());
            row = next;
        }
        TruncatedSeries::new(coeffs)
    }

    /// Exact truncated joint law of `(T1 - T0, W1)` by word enumeration:
    /// `P[dT = n, W = y x]` is the probability that the walk from `o` enters
    /// `y x` at time `n` from outside the cone `C(y x)` without having
    /// visited `V_1^x` before.
    pub fn renewal_increment_dist<C: Scalar>(&self, n_max: usize) -> Result<RenewalLaw<C>> {
        self.check_order(n_max)?;
        let mut joint: BTreeMap<(usize, Word), C> = BTreeMap::new();
        let mut layer = Layer::<C>::default();
        layer.insert(Word::root(), C::one());
        let taboo = |w: &Word| w.len() == 1 && w.first().is_some_and(|l| l.factor == Factor::One);
        for step in 1..=n_max {
            let remaining = n_max - step;
            let mut hits: Vec<(Word, C)> = Vec::new();
            layer = self.step(
                &layer,
                |from, to, mass| {
                    if is_renewal_word(to) && !from.in_cone(to) {
                        hits.push((to.clone(), mass.clone()));
                    }
                },
                |w| w.len() <= 2 + remaining && !taboo(w),
            );
            for (w, m) in hits {
                let e = joint.entry((step, w)).or_insert_with(C::zero);
                *e = e.clone() + m;
            }
        }
        Ok(RenewalLaw::from_joint(n_max, joint, "word-enumeration"))
    }

    /// `p^(2n)(o,o)^(1/(2n))` for every even `2n <= order`.
    pub fn spectral_radius_proxy(&self, order: usize) -> Result<Vec<(usize, f64)>> {
        let g = self.green_series::<f64>(&Word::root(), &Word::root(), order)?;
        Ok(even_root_proxy(&g))
    }

    /// Exact law `pi_n` of `X_n`.
    pub fn distribution_at(&self, n: usize) -> Result<HashMap<Word, f64>> {
        self.check_order(n)?;
        let mut layer = Layer::<f64>::default();
        layer.insert(Word::root(), 1.0);
        for _ in 0..n {
            layer = self.step(&layer, |_, _, _| {}, |_| true);
        }
        Ok(layer.into_iter().collect())
    }
}

pub(crate) fn even_root_proxy(g: &TruncatedSeries<f64>) -> Vec<(usize, f64)> {
    (1..=g.order() / 2)
        .map(|k| {
            let n = 2 * k;
            (n, g.coeff(n).powf(1.0 / n as f64))
        })
        .collect()
}

/// Two-letter word `y x` with `y` in `V_2^x` and `x` in `V_1^x`.
pub fn is_renewal_word(w: &Word) -> bool {
    w.len() == 2 && w.letters()[0].factor == Factor::Two
}

/// Truncated joint law of the renewal increment `dT = T1 - T0` and the
/// appended word `W1`.
#[derive(Clone, Debug, Serialize)]
pub struct RenewalLaw<C> {
    pub n_max: usize,
    pub method: &'static str,
    #[serde(skip)]
    pub joint: BTreeMap<(usize, Word), C>,
    /// `P[dT = n]` for `n = 0..=n_max`.
    pub marginal: Vec<C>,
}

/// Geometric model of the unassigned tail beyond `n_max`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailModel {
    /// Mass not assigned by the truncated law.
    pub residual_mass: f64,
    /// Fitted ratio `P[dT = n + 1] / P[dT = n]` at the end of the table.
    pub decay: f64,
}

impl<C: Scalar> RenewalLaw<C> {
    fn from_joint(n_max: usize, joint: BTreeMap<(usize, Word), C>, method: &'static str) -> RenewalLaw<C> {
        let mut marginal = vec![C::zero(); n_max + 1];
        for ((n, _), p) in &joint {
            marginal[*n] = marginal[*n].clone() + p.clone();
        }
        RenewalLaw {
            n_max,
            method,
            joint,
            marginal,
        }
    }

    pub fn prob(&self, n: usize) -> &C {
        &self.marginal[n]
    }

    pub fn total_mass(&self) -> C {
        self.marginal.iter().fold(C::zero(), |a, b| a + b.clone())
    }

    pub fn tail_mass(&self) -> f64 {
        (1.0 - self.total_mass().to_f64()).max(0.0)
    }

    pub fn marginal_f64(&self) -> Vec<f64> {
        self.marginal.iter().map(Scalar::to_f64).collect()
    }

    /// Fits the geometric decay over the last quarter of the positive entries.
    pub fn tail_model(&self) -> TailModel {
        let probs = self.marginal_f64();
        let pts: Vec<(f64, f64)> = probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(n, p)| (n as f64, p.ln()))
            .collect();
        let start = pts.len() * 3 / 4;
        let tail = &pts[start.min(pts.len().saturating_sub(2))..];
        let decay = if tail.len() >= 2 {
            crate::stats::least_squares(tail).slope.exp().min(1.0)
        } else {
            1.0
        };
        TailModel {
            residual_mass: self.tail_mass(),
            decay,
        }
    }

    /// Bounds on `E[f(dT)]` for nonnegative, nondecreasing `f`: the
    /// truncated sum, and the sum plus the geometric tail estimate.
    pub fn expectation_bounds(&self, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let probs = self.marginal_f64();
        let lower: f64 = probs.iter().enumerate().map(|(n, p)| f(n as f64) * p).sum();
        let tail = self.tail_model();
        let last = probs.last().copied().unwrap_or(0.0);
        let mut extra = 0.0;
        if tail.decay < 1.0 {
            let mut p = last;
            for k in 1..100_000 {
                p *= tail.decay;
                let term = f((self.n_max + k) as f64) * p;
                extra += term;
                if term < 1e-300 || (k > 10 && term < 1e-18 * extra) {
                    break;
                }
            }
        } else {
            extra = f64::INFINITY;
        }
        (lower, lower + extra)
    }

    /// Law of `D = d(o, W1)`.
    pub fn distance_law(&self, walk: &Walk) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        for ((_, w), p) in &self.joint {
            *out.entry(walk.graph_distance(w)).or_insert(0.0) += p.to_f64();
        }
        out
    }

    /// Law of `D = -log L(o, W1 | 1)`, keyed by the appended word.
    pub fn entropy_law(&self, ctx: &GenFunContext) -> Result<Vec<(Word, f64, f64)>> {
        let mut by_word: BTreeMap<Word, f64> = BTreeMap::new();
        for ((_, w), p) in &self.joint {
            *by_word.entry(w.clone()).or_insert(0.0) += p.to_f64();
        }
        by_word
            .into_iter()
            .map(|(w, p)| Ok((w.clone(), ctx.dl_word(&w)?, p)))
            .collect()
    }
}

/// Power-series view of the first-return functions: for `v` in `V_j^x`,
/// `R_j(v | z)` is the generating function of the first passage from the
/// one-letter word `v` to `o`, and `excursion_j(z)` the generating function
/// of a step into a fresh copy of factor `j` followed by the return.
#[derive(Clone, Debug)]
pub struct ReturnSeries<C> {
    pub order: usize,
    /// `r[j][v][n]`, vertex 0 unused.
    pub r: [Vec<Vec<C>>; 2],
    pub excursion: [Vec<C>; 2],
}

/// Computes the first-return series coefficient by coefficient from the
/// one-step decomposition; every coefficient is a finite sum of path
/// probabilities, so the result is exact in rational arithmetic.
pub fn return_series<C: Scalar>(walk: &Walk, order: usize) -> ReturnSeries<C> {
    let sizes = [walk.factor_size(Factor::One), walk.factor_size(Factor::Two)];
    let mut r: [Vec<Vec<C>>; 2] = [
        vec![vec![C::zero(); order + 1]; sizes[0]],
        vec![vec![C::zero(); order + 1]; sizes[1]],
    ];
    let mut exc: [Vec<C>; 2] = [vec![C::zero(); order + 1], vec![C::zero(); order + 1]];
    let alpha = [walk.alpha_scalar::<C>(Factor::One), walk.alpha_scalar::<C>(Factor::Two)];
    for n in 1..=order {
        for f in Factor::BOTH {
            let j = f.index();
            let other = f.other().index();
            for v in 1..sizes[j] {
                let mut acc = C::zero();
                for &w in walk.factor_targets(f, v as u16) {
                    let p = alpha[j].clone() * walk.factor_prob_scalar::<C>(f, v as u16, w);
                    if w == 0 {
                        if n == 1 {
                            acc = acc + p;
                        }
                    } else {
                        acc = acc + p * r[j][w as usize][n - 1].clone();
                    }
                }
                for m in 2..n {
                    if !exc[other][m].is_zero() {
                        acc = acc + exc[other][m].clone() * r[j][v][n - m].clone();
                    }
                }
                r[j][v][n] = acc;
            }
        }
        if n < order {
            for f in Factor::BOTH {
                let j = f.index();
                let mut acc = C::zero();
                for &y in walk.factor_targets(f, 0) {
                    let p = alpha[j].clone() * walk.factor_prob_scalar::<C>(f, 0, y);
                    acc = acc + p * r[j][y as usize][n].clone();
                }
                exc[j][n + 1] = acc;
            }
        }
    }
    ReturnSeries {
        order,
        r,
        excursion: exc,
    }
}

/// The renewal-increment law through the reduced chain on
/// `{o} + V_2^x + V_2^x V_1^x` with excursions below the two-letter level
/// collapsed into `excursion_2`. Agrees coefficientwise with
/// [`Oracle::renewal_increment_dist`] and has no order cap.
pub fn reduced_renewal_increment_dist<C: Scalar>(walk: &Walk, n_max: usize) -> RenewalLaw<C> {
    let ret = return_series::<C>(walk, n_max);
    let n1 = walk.factor_size(Factor::One);
    let n2 = walk.factor_size(Factor::Two);
    // State 0 is o, 1..n2 are y, then (y, x) pairs.
    let pair = |y: usize, x: usize| n2 + (y - 1) * (n1 - 1) + (x - 1);
    let states = n2 + (n2 - 1) * (n1 - 1);
    let mut edges: Vec<(usize, usize, C)> = Vec::new();
    for &y in walk.factor_targets(Factor::Two, 0) {
        edges.push((0, y as usize, walk.kernel_scalar(Factor::Two, 0, y)));
    }
    for y in 1..n2 {
        for &t in walk.factor_targets(Factor::Two, y as u16) {
            edges.push((y, t as usize, walk.kernel_scalar(Factor::Two, y as u16, t)));
        }
        for x in 1..n1 {
            let p = walk.kernel_scalar::<C>(Factor::One, 0, x as u16);
            if !p.is_zero() {
                edges.push((y, pair(y, x), p));
            }
            for &t in walk.factor_targets(Factor::One, x as u16) {
                let target = if t == 0 { y } else { pair(y, t as usize) };
                edges.push((pair(y, x), target, walk.kernel_scalar(Factor::One, x as u16, t)));
            }
        }
    }
    let exc2 = &ret.excursion[Factor::Two.index()];
    let mut g = vec![vec![C::zero(); n_max + 1]; states];
    g[0][0] = C::one();
    for n in 1..=n_max {
        for (from, to, p) in &edges {
            let add = g[*from][n - 1].clone() * p.clone();
            g[*to][n] = g[*to][n].clone() + add;
        }
        for s in n2..states {
            let mut acc = C::zero();
            for m in 2..=n {
                if !exc2[m].is_zero() {
                    acc = acc + exc2[m].clone() * g[s][n - m].clone();
                }
            }
            g[s][n] = g[s][n].clone() + acc;
        }
    }
    let mut joint = BTreeMap::new();
    for n in 1..=n_max {
        for y in 1..n2 {
            for x in 1..n1 {
                let mut p = g[y][n - 1].clone() * walk.kernel_scalar::<C>(Factor::One, 0, x as u16);
                for xp in 1..n1 {
                    if xp != x {
                        p = p + g[pair(y, xp)][n - 1].clone()
                            * walk.kernel_scalar::<C>(Factor::One, xp as u16, x as u16);
                    }
                }
                if !p.is_zero() {
                    let w = Word::from_letters(vec![
                        Letter::new(Factor::Two, y as u16),
                        Letter::new(Factor::One, x as u16),
                    ])
                    .expect("alternating");
                    joint.insert((n, w), p);
                }
            }
        }
    }
    RenewalLaw::from_joint(n_max, joint, "reduced-chain")
}

/// `G(o, o | z) = 1 / (1 - excursion_1(z) - excursion_2(z))` as a series,
/// reaching far higher orders than word enumeration.
pub fn reduced_root_green_series(walk: &Walk, order: usize) -> TruncatedSeries<f64> {
    let ret = return_series::<f64>(walk, order);
    let mut g = vec![0.0; order + 1];
    g[0] = 1.0;
    for n in 1..=order {
        g[n] = (2..=n)
            .map(|m| (ret.excursion[0][m] + ret.excursion[1][m]) * g[n - m])
            .sum();
    }
    TruncatedSeries::new(g)
}

/// Outcome of one family of coefficientwise identities.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub identity: &'static str,
    pub cases: usize,
    pub max_error: f64,
    /// Cases with nonzero (rational) or above-tolerance (float) error.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub order: usize,
    pub arithmetic: &'static str,
    pub tolerance: f64,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

/// The root, every one-letter word and every two-letter word.
pub fn identity_words(walk: &Walk) -> Vec<Word> {
    let mut out = vec![Word::root()];
    for f in Factor::BOTH {
        out.extend(walk.letters(f).map(Word::single));
    }
    for f in Factor::BOTH {
        for a in walk.letters(f) {
            for b in walk.letters(f.other()) {
                out.push(Word::from_letters(vec![a, b]).expect("alternating"));
            }
        }
    }
    out
}

/// Checks, coefficientwise up to `order`, that
/// `G(x, y) = G(x, x) L(x, y)` for all `x, y` in [`identity_words`],
/// `L(o, u v) = L(o, u) L(u, u v)` for every two-letter word, and
/// `L(x, y | z) = L_i(x, y | xi_i(z))` for `x, y` in `V_i`.
///
/// With `tolerance = 0` the comparison is exact, which is meaningful for
/// rational coefficients.
pub fn identity_suite<C: Scalar>(walk: &Walk, order: usize, tolerance: f64) -> Result<IdentityReport> {
    let oracle = Oracle::with_cap(walk, DEFAULT_ORDER_CAP.max(order));
    let words = identity_words(walk);
    let mut green = Vec::with_capacity(words.len());
    let mut last = Vec::with_capacity(words.len());
    for x in &words {
        green.push(oracle.green_series_many::<C>(x, &words, order)?);
        last.push(oracle.last_exit_series_many::<C>(x, &words, order)?);
    }
    let index = |w: &Word| words.iter().position(|u| u == w).expect("listed word");
    let describe = |w: &Word| walk.format_word(w);
    let record = |check: &mut IdentityCheck, lhs: &TruncatedSeries<C>, rhs: &TruncatedSeries<C>, what: String| {
        check.cases += 1;
        let err = lhs.max_abs_diff(rhs);
        check.max_error = check.max_error.max(err);
        let ok = if tolerance == 0.0 { lhs == rhs } else { err <= tolerance };
        if !ok && check.failures.len() < 10 {
            check.failures.push(what);
        }
    };

    let mut gl = IdentityCheck {
        identity: "G(x,y) = G(x,x) L(x,y)",
        cases: 0,
        max_error: 0.0,
        failures: Vec::new(),
    };
    for (i, x) in words.iter().enumerate() {
        let gxx = &green[i][i];
        for (j, y) in words.iter().enumerate() {
            let rhs = gxx.mul(&last[i][j]);
            record(&mut gl, &green[i][j], &rhs, format!("{} -> {}", describe(x), describe(y)));
        }
    }

    let mut ll = IdentityCheck {
        identity: "L(o,uv) = L(o,u) L(u,uv)",
        cases: 0,
        max_error: 0.0,
        failures: Vec::new(),
    };
    let o = index(&Word::root());
    for w in words.iter().filter(|w| w.len() == 2) {
        let u = w.prefix(1);
        let (iu, iw) = (index(&u), index(w));
        let rhs = last[o][iu].mul(&last[iu][iw]);
        record(&mut ll, &last[o][iw], &rhs, describe(w));
    }

    let mut gx = IdentityCheck {
        identity: "L(x,y|z) = L_i(x,y|xi_i(z))",
        cases: 0,
        max_error: 0.0,
        failures: Vec::new(),
    };
    for f in Factor::BOTH {
        let xi = oracle.first_passage_series::<C>(&FirstPassage::Xi(f), order)?;
        let in_factor: Vec<(u16, Word)> = std::iter::once((0, Word::root()))
            .chain(walk.letters(f).map(|l| (l.vertex, Word::single(l))))
            .collect();
        for (xv, x) in &in_factor {
            for (yv, y) in &in_factor {
                let factor_l = oracle.factor_last_exit_series::<C>(f, *xv, *yv, order);
                let rhs = factor_l.compose(&xi)?;
                record(
                    &mut gx,
                    &last[index(x)][index(y)],
                    &rhs,
                    format!("factor {f}: {} -> {}", describe(x), describe(y)),
                );
            }
        }
    }

    let checks = vec![gl, ll, gx];
    Ok(IdentityReport {
        order,
        arithmetic: if tolerance == 0.0 { "rational" } else { "float" },
        tolerance,
        passed: checks.iter().all(|c| c.failures.is_empty() && c.cases > 0),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::WalkConfig;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn walk_a() -> Walk {
        Walk::new(WalkConfig::k3_x_k3()).unwrap()
    }

    #[test]
    fn green_low_coefficients() {
        let w = walk_a();
        let o = Oracle::new(&w);
        let g = o.green_series::<BigRational>(&Word::root(), &Word::root(), 4).unwrap();
        assert_eq!(g.coeff(0), &q(1, 1));
        assert_eq!(g.coeff(1), &q(0, 1));
        assert_eq!(g.coeff(2), &q(1, 4));
    }

    #[test]
    fn last_exit_to_self_is_one() {
        let w = walk_a();
        let a = w.word(&["a"]).unwrap();
        let l = Oracle::new(&w)
            .first_passage_series::<BigRational>(
                &FirstPassage::LastExit {
                    from: a.clone(),
                    to: a,
                },
                6,
            )
            .unwrap();
        assert_eq!(l.coeff(0), &q(1, 1));
        assert!(l.coeffs()[1..].iter().all(|c| *c == q(0, 1)));
    }

    #[test]
    fn xi_first_coefficient_and_partial_sums() {
        let w = walk_a();
        let o = Oracle::new(&w);
        let xi = o.first_passage_series::<BigRational>(&FirstPassage::Xi(Factor::One), 9).unwrap();
        assert_eq!(xi.coeff(1), &q(1, 2));
        let sums = xi.to_f64().partial_sums();
        assert!(sums.windows(2).all(|p| p[1] >= p[0]));
        assert!(*sums.last().unwrap() < 1.0);
    }

    #[test]
    fn order_cap_enforced() {
        let w = walk_a();
        let o = Oracle::with_cap(&w, 5);
        assert!(matches!(
            o.green_series::<f64>(&Word::root(), &Word::root(), 6),
            Err(Error::OrderTooLarge { requested: 6, cap: 5 })
        ));
        assert!(o.renewal_increment_dist::<f64>(6).is_err());
    }

    #[test]
    fn renewal_law_small_orders() {
        let w = walk_a();
        let law = Oracle::new(&w).renewal_increment_dist::<BigRational>(6).unwrap();
        assert_eq!(law.prob(1), &q(0, 1));
        assert_eq!(law.prob(2), &q(1, 4));
        let masses: Vec<f64> = (2..=6)
            .map(|n| Oracle::new(&w).renewal_increment_dist::<f64>(n).unwrap().total_mass())
            .collect();
        assert!(masses.windows(2).all(|p| p[1] >= p[0]));
        assert!(*masses.last().unwrap() <= 1.0);
    }

    #[test]
    fn reduced_law_matches_enumeration_exactly() {
        for cfg in [WalkConfig::k3_x_k3(), WalkConfig::path_x_k3()] {
            let w = Walk::new(cfg).unwrap();
            let brute = Oracle::new(&w).renewal_increment_dist::<BigRational>(9).unwrap();
            let reduced = reduced_renewal_increment_dist::<BigRational>(&w, 9);
            assert_eq!(brute.marginal, reduced.marginal);
            assert_eq!(brute.joint, reduced.joint);
        }
    }

    #[test]
    fn reduced_green_matches_enumeration() {
        let w = Walk::new(WalkConfig::path_x_k3()).unwrap();
        let brute = Oracle::new(&w).green_series::<f64>(&Word::root(), &Word::root(), 12).unwrap();
        let reduced = reduced_root_green_series(&w, 12);
        assert!(brute.max_abs_diff(&reduced) < 1e-14);
    }

    #[test]
    fn factor_series_match_resolvent_identity() {
        let w = walk_a();
        let o = Oracle::new(&w);
        // For K3, G_1(o,o|t) has coefficients 1, 0, 1/2, 1/4, 3/8, ...
        let g = o.factor_green_series::<BigRational>(Factor::One, 0, 0, 4);
        assert_eq!(g.coeffs(), &[q(1, 1), q(0, 1), q(1, 2), q(1, 4), q(3, 8)]);
        let l = o.factor_last_exit_series::<BigRational>(Factor::One, 0, 1, 3);
        assert_eq!(l.coeffs(), &[q(0, 1), q(1, 2), q(1, 4), q(1, 8)]);
    }

    #[test]
    fn identities_hold_exactly_at_low_order() {
        let w = walk_a();
        let report = identity_suite::<BigRational>(&w, 6, 0.0).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(identity_words(&w).len(), 13);
    }

    #[test]
    fn distribution_is_normalized() {
        let w = walk_a();
        let pi = Oracle::new(&w).distribution_at(6).unwrap();
        let total: f64 = pi.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
