//! The validated walk: transition kernel on words, graph distances and the
//! per-step sampler.

use num_rational::BigRational;

use crate::config::{exact_alpha, WalkConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::word::{Factor, Letter, Word};

#[derive(Clone, Debug)]
struct FactorTables {
    n: usize,
    names: Vec<String>,
    /// Row-major transition probabilities.
    p: Vec<f64>,
    p_exact: Vec<BigRational>,
    /// Per row: the positive targets and their cumulative probabilities.
    targets: Vec<Vec<u16>>,
    cumulative: Vec<Vec<f64>>,
    root_dist: Vec<u64>,
}

impl FactorTables {
    fn build(cfg: &WalkConfig, f: Factor) -> FactorTables {
        let spec = &cfg.factors[f.index()];
        let n = spec.size();
        let mut p = Vec::with_capacity(n * n);
        let mut p_exact = Vec::with_capacity(n * n);
        let mut targets = Vec::with_capacity(n);
        let mut cumulative = Vec::with_capacity(n);
        for row in &spec.transition {
            let mut t = Vec::new();
            let mut c = Vec::new();
            let mut acc = 0.0;
            for (j, prob) in row.iter().enumerate() {
                p.push(prob.value());
                p_exact.push(prob.exact().clone());
                if prob.value() > 0.0 {
                    acc += prob.value();
                    t.push(j as u16);
                    c.push(acc);
                }
            }
            targets.push(t);
            cumulative.push(c);
        }
        let root_dist = spec
            .root_distances()
            .into_iter()
            .map(|d| d.expect("validated factors are reachable"))
            .collect();
        FactorTables {
            n,
            names: spec.vertices.clone(),
            p,
            p_exact,
            targets,
            cumulative,
            root_dist,
        }
    }

    fn sample(&self, from: u16, u: f64) -> u16 {
        let cum = &self.cumulative[from as usize];
        let total = *cum.last().expect("stochastic rows are nonempty");
        let x = u * total;
        let k = cum.partition_point(|&c| c <= x).min(cum.len() - 1);
        self.targets[from as usize][k]
    }
}

/// A configuration that passed validation, with precomputed kernel tables.
#[derive(Clone, Debug)]
pub struct Walk {
    cfg: WalkConfig,
    digest: String,
    alpha: [f64; 2],
    alpha_exact: [BigRational; 2],
    tables: [FactorTables; 2],
}

impl Walk {
    pub fn new(cfg: WalkConfig) -> Result<Walk> {
        let report = cfg.validate();
        if !report.passed() {
            return Err(Error::InvalidConfig(report));
        }
        let tables = [
            FactorTables::build(&cfg, Factor::One),
            FactorTables::build(&cfg, Factor::Two),
        ];
        Ok(Walk {
            digest: cfg.digest(),
            alpha: [cfg.alpha_of(Factor::One), cfg.alpha_of(Factor::Two)],
            alpha_exact: [exact_alpha(&cfg, Factor::One), exact_alpha(&cfg, Factor::Two)],
            tables,
            cfg,
        })
    }

    pub fn config(&self) -> &WalkConfig {
        &self.cfg
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn alpha(&self, f: Factor) -> f64 {
        self.alpha[f.index()]
    }

    pub fn epsilon0(&self) -> Option<f64> {
        self.cfg.epsilon0.as_ref().map(|e| e.value())
    }

    /// Number of vertices of a factor, root included.
    pub fn factor_size(&self, f: Factor) -> usize {
        self.tables[f.index()].n
    }

    /// Non-root vertices of a factor, i.e. the letters `V_i^x`.
    pub fn letters(&self, f: Factor) -> impl Iterator<Item = Letter> + '_ {
        (1..self.factor_size(f) as u16).map(move |v| Letter::new(f, v))
    }

    /// `p_i(x, y)` on the factor graph.
    pub fn factor_prob(&self, f: Factor, x: u16, y: u16) -> f64 {
        let t = &self.tables[f.index()];
        t.p[x as usize * t.n + y as usize]
    }

    pub fn factor_prob_exact(&self, f: Factor, x: u16, y: u16) -> &BigRational {
        let t = &self.tables[f.index()];
        &t.p_exact[x as usize * t.n + y as usize]
    }

    pub(crate) fn factor_prob_scalar<C: Scalar>(&self, f: Factor, x: u16, y: u16) -> C {
        C::from_prob(self.factor_prob_exact(f, x, y), self.factor_prob(f, x, y))
    }

    pub(crate) fn alpha_scalar<C: Scalar>(&self, f: Factor) -> C {
        C::from_prob(&self.alpha_exact[f.index()], self.alpha[f.index()])
    }

    /// Kernel entry `alpha_i * p_i(x, y)` as a coefficient.
    pub(crate) fn kernel_scalar<C: Scalar>(&self, f: Factor, x: u16, y: u16) -> C {
        self.alpha_scalar::<C>(f) * self.factor_prob_scalar::<C>(f, x, y)
    }

    /// Positive successors of `x` in a factor graph.
    pub fn factor_targets(&self, f: Factor, x: u16) -> &[u16] {
        &self.tables[f.index()].targets[x as usize]
    }

    pub fn vertex_name(&self, f: Factor, v: u16) -> &str {
        &self.tables[f.index()].names[v as usize]
    }

    pub fn vertex_index(&self, f: Factor, name: &str) -> Result<u16> {
        self.tables[f.index()]
            .names
            .iter()
            .position(|n| n == name)
            .filter(|&i| i != 0)
            .map(|i| i as u16)
            .ok_or_else(|| Error::UnknownVertex {
                factor: f.id(),
                name: name.to_string(),
            })
    }

    /// Parses a word from vertex names; the factor of each letter is
    /// inferred from the names, which must be unique across factors.
    pub fn word(&self, names: &[&str]) -> Result<Word> {
        let mut letters = Vec::with_capacity(names.len());
        for name in names {
            let hit = Factor::BOTH
                .iter()
                .find_map(|&f| self.vertex_index(f, name).ok().map(|v| Letter::new(f, v)));
            letters.push(hit.ok_or_else(|| Error::UnknownVertex {
                factor: 0,
                name: name.to_string(),
            })?);
        }
        Word::from_letters(letters)
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_root() {
            return "o".to_string();
        }
        w.letters()
            .iter()
            .map(|l| self.vertex_name(l.factor, l.vertex))
            .collect::<Vec<_>>()
            .join(".")
    }

    /// One-step law at `x` with coefficients of type `C`.
    pub(crate) fn successors<C: Scalar>(&self, x: &Word) -> Vec<(Word, C)> {
        let mut out = Vec::new();
        for f in Factor::BOTH {
            let from = x.active_vertex(f);
            for &to in self.factor_targets(f, from) {
                out.push((x.moved(f, to), self.kernel_scalar::<C>(f, from, to)));
            }
        }
        out
    }

    /// Full one-step law of the walk at `x`.
    pub fn step_distribution(&self, x: &Word) -> Vec<(Word, f64)> {
        self.successors::<f64>(x)
    }

    /// `p(x, y)` for arbitrary words.
    pub fn transition_prob(&self, x: &Word, y: &Word) -> f64 {
        self.step_distribution(x)
            .into_iter()
            .find(|(w, _)| w == y)
            .map_or(0.0, |(_, p)| p)
    }

    /// Oriented factor distance `d_i(o_i, v)`.
    pub fn letter_distance(&self, l: Letter) -> u64 {
        self.tables[l.factor.index()].root_dist[l.vertex as usize]
    }

    /// `d(o, u)`: sum over the letters of their factor distances. For a
    /// valid concatenation this also gives `d(x, x w) = d(o, w)`.
    pub fn graph_distance(&self, u: &Word) -> u64 {
        u.letters().iter().map(|&l| self.letter_distance(l)).sum()
    }

    /// Picks the next move from two uniforms in `[0, 1)`: `u_factor` selects
    /// the factor, `u_target` the target vertex inside it.
    pub fn sample_move(&self, x: &Word, u_factor: f64, u_target: f64) -> (Factor, u16) {
        let f = if u_factor < self.alpha[0] {
            Factor::One
        } else {
            Factor::Two
        };
        let from = x.active_vertex(f);
        (f, self.tables[f.index()].sample(from, u_target))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn walk_a() -> Walk {
        Walk::new(WalkConfig::k3_x_k3()).unwrap()
    }

    #[test]
    fn invalid_config_is_refused() {
        let mut cfg = WalkConfig::k3_x_k3();
        cfg.alpha = crate::config::Prob::from_f64(0.0);
        assert!(matches!(Walk::new(cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn step_from_root() {
        let w = walk_a();
        let dist = w.step_distribution(&Word::root());
        assert_eq!(dist.len(), 4);
        for (word, p) in &dist {
            assert_eq!(word.len(), 1);
            assert_eq!(*p, 0.25);
        }
    }

    #[test]
    fn step_from_a() {
        let w = walk_a();
        let a = w.word(&["a"]).unwrap();
        let got: HashSet<(String, u64)> = w
            .step_distribution(&a)
            .into_iter()
            .map(|(x, p)| (w.format_word(&x), (p * 1e6) as u64))
            .collect();
        let want: HashSet<(String, u64)> = ["o", "b", "a.c", "a.d"]
            .into_iter()
            .map(|s| (s.to_string(), 250_000))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn distances() {
        let w = walk_a();
        assert_eq!(w.graph_distance(&w.word(&["a", "c"]).unwrap()), 2);
        assert_eq!(w.graph_distance(&Word::root()), 0);
        let b = Walk::new(WalkConfig::path_x_k3()).unwrap();
        assert_eq!(b.graph_distance(&b.word(&["e"]).unwrap()), 2);
        assert_eq!(b.graph_distance(&b.word(&["e", "c", "m"]).unwrap()), 4);
    }

    #[test]
    fn sampler_respects_law() {
        let w = walk_a();
        let a = w.word(&["a"]).unwrap();
        assert_eq!(w.sample_move(&a, 0.1, 0.1), (Factor::One, 0));
        assert_eq!(w.sample_move(&a, 0.1, 0.9), (Factor::One, 2));
        assert_eq!(w.sample_move(&a, 0.6, 0.9), (Factor::Two, 2));
    }
}
