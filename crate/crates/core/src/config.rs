//! Walk configuration: the two rooted factor graphs, the mixing weight and
//! the optional uniformity floor and parameter bindings.
//!
//! # JSON schema
//!
//! ```json
//! {
//!   "factors": [
//!     { "vertices": ["o1", "a", "b"], "root": "o1",
//!       "transition": [[0, "1/2", "1/2"], ["1/2", 0, "1/2"], ["1/2", "1/2", 0]] },
//!     { "vertices": ["o2", "c", "d"],
//!       "transition": [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]] }
//!   ],
//!   "alpha": "1/2",
//!   "epsilon0": "1/4",
//!   "parameters": {
//!     "names": ["p1"], "values": ["1/4"],
//!     "bindings": [{ "factor": 1, "from": "o1", "to": "a", "param": 0 }]
//!   },
//!   "loop_witness": { "factor": 1, "vertex": "a", "exponent": 2 }
//! }
//! ```
//!
//! Probabilities are JSON numbers or strings holding `"p/q"` fractions or
//! decimals; string forms are kept exact for the rational oracle. `root`
//! defaults to the first vertex. `epsilon0` and `parameters` are optional.
//! A parameter binding `(factor, from, to, param)` states that the kernel
//! entry `alpha_factor * p_factor(from, to)` equals parameter `param`.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, ratio_to_f64};
use crate::word::Factor;

pub const ROW_SUM_TOL: f64 = 1e-12;

/// A probability literal, kept in the form it was written.
#[derive(Clone, Debug)]
pub struct Prob {
    text: Option<String>,
    exact: BigRational,
    value: f64,
}

impl Prob {
    pub fn from_f64(value: f64) -> Prob {
        let exact = BigRational::from_float(value).unwrap_or_else(BigRational::zero);
        Prob { text: None, exact, value }
    }

    pub fn from_ratio(num: i64, den: i64) -> Prob {
        let exact = BigRational::new(num.into(), den.into());
        Prob {
            text: Some(format!("{num}/{den}")),
            value: ratio_to_f64(&exact),
            exact,
        }
    }

    pub fn parse(text: &str) -> Option<Prob> {
        let exact = parse_rational(text)?;
        Some(Prob {
            text: Some(text.trim().to_string()),
            value: ratio_to_f64(&exact),
            exact,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }
}

impl PartialEq for Prob {
    fn eq(&self, other: &Prob) -> bool {
        self.exact == other.exact
    }
}

impl Serialize for Prob {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.text {
            Some(t) => s.serialize_str(t),
            None => s.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Prob {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Prob, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Lit {
            Num(f64),
            Text(String),
        }
        match Lit::deserialize(d)? {
            Lit::Num(v) => Ok(Prob::from_f64(v)),
            Lit::Text(t) => Prob::parse(&t)
                .ok_or_else(|| serde::de::Error::custom(format!("bad probability literal `{t}`"))),
        }
    }
}

/// One finite rooted factor graph with its transition matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub vertices: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    pub transition: Vec<Vec<Prob>>,
}

impl FactorSpec {
    pub fn new(vertices: &[&str], transition: Vec<Vec<Prob>>) -> FactorSpec {
        FactorSpec {
            vertices: vertices.iter().map(|s| s.to_string()).collect(),
            root: None,
            transition,
        }
    }

    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    /// Reorders vertices so that the declared root comes first.
    fn normalize_root(&mut self) -> std::result::Result<(), String> {
        let Some(root) = self.root.clone() else {
            return Ok(());
        };
        let r = self
            .vertex_index(&root)
            .ok_or_else(|| format!("root `{root}` is not a vertex"))?;
        if r != 0 {
            let n = self.size();
            let mut order: Vec<usize> = (0..n).collect();
            order.remove(r);
            order.insert(0, r);
            self.vertices = order.iter().map(|&i| self.vertices[i].clone()).collect();
            if self.transition.len() == n && self.transition.iter().all(|row| row.len() == n) {
                self.transition = order
                    .iter()
                    .map(|&i| order.iter().map(|&j| self.transition[i][j].clone()).collect())
                    .collect();
            }
        }
        self.root = Some(root);
        Ok(())
    }

    /// Oriented graph distances from the root over positive entries; `None`
    /// marks unreachable vertices.
    pub fn root_distances(&self) -> Vec<Option<u64>> {
        let n = self.size();
        let mut dist = vec![None; n];
        if n == 0 {
            return dist;
        }
        dist[0] = Some(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap();
            for w in 0..n {
                let positive = self
                    .transition
                    .get(v)
                    .and_then(|row| row.get(w))
                    .is_some_and(|p| p.value() > 0.0);
                if positive && dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopWitness {
    pub factor: u8,
    pub vertex: String,
    pub exponent: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterBinding {
    pub factor: u8,
    pub from: String,
    pub to: String,
    pub param: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub names: Vec<String>,
    pub values: Vec<Prob>,
    pub bindings: Vec<ParameterBinding>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub factors: [FactorSpec; 2],
    pub alpha: Prob,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon0: Option<Prob>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Parameters>,
    pub loop_witness: LoopWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// True iff some failed check carries `needle` in its name or detail.
    pub fn mentions(&self, needle: &str) -> bool {
        self.failures()
            .any(|c| c.name.contains(needle) || c.detail.contains(needle))
    }

    fn record(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "[{mark}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

fn uniform_off_diagonal(n: usize) -> Vec<Vec<Prob>> {
    let d = (n - 1) as i64;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Prob::from_ratio(0, 1) } else { Prob::from_ratio(1, d) })
                .collect()
        })
        .collect()
}

impl WalkConfig {
    /// Instance A: two triangles `K3` with uniform off-diagonal rows, `alpha = 1/2`.
    pub fn k3_x_k3() -> WalkConfig {
        let f1 = FactorSpec::new(&["o1", "a", "b"], uniform_off_diagonal(3));
        let f2 = FactorSpec::new(&["o2", "c", "d"], uniform_off_diagonal(3));
        let mut bindings = Vec::new();
        for (fid, f) in [(1u8, &f1), (2u8, &f2)] {
            for from in &f.vertices {
                for to in &f.vertices {
                    if from != to {
                        bindings.push(ParameterBinding {
                            factor: fid,
                            from: from.clone(),
                            to: to.clone(),
                            param: 0,
                        });
                    }
                }
            }
        }
        WalkConfig {
            factors: [f1, f2],
            alpha: Prob::from_ratio(1, 2),
            epsilon0: Some(Prob::from_ratio(1, 4)),
            parameters: Some(Parameters {
                names: vec!["p1".into()],
                values: vec![Prob::from_ratio(1, 4)],
                bindings,
            }),
            loop_witness: LoopWitness {
                factor: 1,
                vertex: "a".into(),
                exponent: 2,
            },
        }
    }

    /// Instance B: factor 1 is the reflecting walk on the path `o1 - m - e`,
    /// factor 2 is `K3`, `alpha = 1/2`.
    pub fn path_x_k3() -> WalkConfig {
        let z = || Prob::from_ratio(0, 1);
        let one = || Prob::from_ratio(1, 1);
        let half = || Prob::from_ratio(1, 2);
        let path = FactorSpec::new(
            &["o1", "m", "e"],
            vec![vec![z(), one(), z()], vec![half(), z(), half()], vec![z(), one(), z()]],
        );
        let k3 = FactorSpec::new(&["o2", "c", "d"], uniform_off_diagonal(3));
        let mut cfg = WalkConfig {
            factors: [path, k3],
            alpha: Prob::from_ratio(1, 2),
            epsilon0: Some(Prob::from_ratio(1, 4)),
            parameters: None,
            loop_witness: LoopWitness {
                factor: 1,
                vertex: "m".into(),
                exponent: 2,
            },
        };
        cfg.parameters = Some(cfg.derive_parameters());
        cfg
    }

    pub fn shortcut(name: &str) -> Option<WalkConfig> {
        match name {
            "K3xK3" => Some(WalkConfig::k3_x_k3()),
            "PathxK3" => Some(WalkConfig::path_x_k3()),
            _ => None,
        }
    }

    pub fn shortcut_names() -> &'static [&'static str] {
        &["K3xK3", "PathxK3"]
    }

    pub fn from_json_str(text: &str) -> Result<WalkConfig> {
        let mut cfg: WalkConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        for f in cfg.factors.iter_mut() {
            f.normalize_root().map_err(Error::Parse)?;
        }
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Loads a configuration from a JSON file, or expands a named shortcut.
    pub fn load(path: &str) -> Result<WalkConfig> {
        if let Some(cfg) = WalkConfig::shortcut(path) {
            return Ok(cfg);
        }
        let text = std::fs::read_to_string(Path::new(path))?;
        WalkConfig::from_json_str(&text)
    }

    pub fn alpha_of(&self, f: Factor) -> f64 {
        match f {
            Factor::One => self.alpha.value(),
            Factor::Two => 1.0 - self.alpha.value(),
        }
    }

    /// Same walk with a different mixing weight. An existing uniformity floor
    /// is reset to the smallest positive kernel entry and existing parameter
    /// bindings are re-derived.
    pub fn with_alpha(&self, alpha: f64) -> WalkConfig {
        let mut cfg = self.clone();
        cfg.alpha = Prob::from_f64(alpha);
        if cfg.epsilon0.is_some() {
            cfg.epsilon0 = Some(Prob::from_f64(cfg.min_positive_kernel_entry()));
        }
        if cfg.parameters.is_some() {
            cfg.parameters = Some(cfg.derive_parameters());
        }
        cfg
    }

    fn kernel_entries(&self) -> Vec<(u8, usize, usize, f64)> {
        let mut out = Vec::new();
        for f in Factor::BOTH {
            let spec = &self.factors[f.index()];
            for (i, row) in spec.transition.iter().enumerate() {
                for (j, p) in row.iter().enumerate() {
                    out.push((f.id(), i, j, self.alpha_of(f) * p.value()));
                }
            }
        }
        out
    }

    pub fn min_positive_kernel_entry(&self) -> f64 {
        self.kernel_entries()
            .into_iter()
            .map(|e| e.3)
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Groups the distinct positive kernel entries into parameters `p1..pd`.
    pub fn derive_parameters(&self) -> Parameters {
        let mut values: Vec<f64> = Vec::new();
        let mut bindings = Vec::new();
        for (fid, i, j, v) in self.kernel_entries() {
            if v <= 0.0 {
                continue;
            }
            let k = match values.iter().position(|&u| (u - v).abs() <= 1e-12) {
                Some(k) => k,
                None => {
                    values.push(v);
                    values.len() - 1
                }
            };
            let spec = &self.factors[fid as usize - 1];
            bindings.push(ParameterBinding {
                factor: fid,
                from: spec.vertices[i].clone(),
                to: spec.vertices[j].clone(),
                param: k,
            });
        }
        Parameters {
            names: (1..=values.len()).map(|k| format!("p{k}")).collect(),
            values: values.into_iter().map(Prob::from_f64).collect(),
            bindings,
        }
    }

    /// SHA-256 of the compact JSON form, truncated to 16 hex digits.
    pub fn digest(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serializes");
        let hash = Sha256::digest(compact.as_bytes());
        hex::encode(&hash[..8])
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();

        let alpha = self.alpha.value();
        rep.record(
            "alpha",
            alpha > 0.0 && alpha < 1.0,
            if alpha > 0.0 && alpha < 1.0 {
                format!("alpha = {alpha}")
            } else {
                format!("alpha must lie in (0,1), got {alpha}")
            },
        );

        let mut shapes_ok = true;
        for f in Factor::BOTH {
            let spec = &self.factors[f.index()];
            let n = spec.size();
            let name = |s: &str| format!("factor {f}: {s}");

            rep.record(
                &name("size"),
                n >= 2,
                if n >= 2 {
                    format!("{n} vertices")
                } else {
                    format!("need at least 2 vertices, got {n}")
                },
            );
            let square = spec.transition.len() == n && spec.transition.iter().all(|r| r.len() == n);
            rep.record(
                &name("shape"),
                square,
                if square {
                    format!("{n}x{n} matrix")
                } else {
                    "transition matrix must be square with one row per vertex".to_string()
                },
            );
            let mut seen = std::collections::HashSet::new();
            let unique = spec.vertices.iter().all(|v| seen.insert(v));
            rep.record(&name("vertex names"), unique, if unique { "unique" } else { "duplicate vertex names" });
            if !square || n < 2 || !unique {
                shapes_ok = false;
                continue;
            }

            let mut bad_range = Vec::new();
            let mut bad_rows = Vec::new();
            let mut bad_diag = Vec::new();
            for (i, row) in spec.transition.iter().enumerate() {
                if row.iter().any(|p| !(0.0..=1.0).contains(&p.value()) || !p.value().is_finite()) {
                    bad_range.push(spec.vertices[i].clone());
                }
                let s: f64 = row.iter().map(|p| p.value()).sum();
                if (s - 1.0).abs() > ROW_SUM_TOL {
                    bad_rows.push(format!("row {} sums to {s}", spec.vertices[i]));
                }
                if row[i].value() != 0.0 {
                    bad_diag.push(spec.vertices[i].clone());
                }
            }
            rep.record(
                &name("probability range"),
                bad_range.is_empty(),
                if bad_range.is_empty() {
                    "entries in [0,1]".to_string()
                } else {
                    format!("entries outside [0,1] in rows {}", bad_range.join(", "))
                },
            );
            rep.record(
                &name("row sums"),
                bad_rows.is_empty(),
                if bad_rows.is_empty() {
                    "rows sum to 1".to_string()
                } else {
                    bad_rows.join("; ")
                },
            );
            rep.record(
                &name("zero diagonal"),
                bad_diag.is_empty(),
                if bad_diag.is_empty() {
                    "diagonal is zero".to_string()
                } else {
                    format!("diagonal must be zero (vertices {})", bad_diag.join(", "))
                },
            );
            let dist = spec.root_distances();
            let unreachable: Vec<String> = dist
                .iter()
                .enumerate()
                .filter(|(_, d)| d.is_none())
                .map(|(v, _)| spec.vertices[v].clone())
                .collect();
            rep.record(
                &name("reachability"),
                unreachable.is_empty(),
                if unreachable.is_empty() {
                    "all vertices reachable from the root".to_string()
                } else {
                    format!("unreachable from the root: {}", unreachable.join(", "))
                },
            );
        }

        let both_two = self.factors[0].size() == 2 && self.factors[1].size() == 2;
        rep.record(
            "recurrent-case exclusion",
            !both_two,
            if both_two {
                "two 2-vertex factors give a recurrent walk (recurrent-case exclusion)"
            } else {
                "not the 2x2 case"
            },
        );

        if !shapes_ok {
            return rep;
        }

        if let Some(eps) = &self.epsilon0 {
            let e = eps.value();
            let min = self.min_positive_kernel_entry();
            let ok = e > 0.0 && e <= 1.0 && min >= e - 1e-15;
            rep.record(
                "epsilon0 uniformity",
                ok,
                if ok {
                    format!("smallest positive kernel entry {min} >= epsilon0 = {e}")
                } else {
                    format!("epsilon0 = {e} must lie in (0,1] and bound every positive kernel entry (min {min})")
                },
            );
        }

        let w = &self.loop_witness;
        let witness = Factor::from_id(w.factor).and_then(|f| {
            let spec = &self.factors[f.index()];
            spec.vertex_index(&w.vertex).map(|v| (spec, v))
        });
        match witness {
            Some((spec, v)) if v != 0 && w.exponent >= 1 => {
                let ret = matrix_power_entry(spec, v, w.exponent);
                rep.record(
                    "loop witness",
                    ret > 0.0,
                    format!("P_{}^{}({},{}) = {ret}", w.factor, w.exponent, w.vertex, w.vertex),
                );
            }
            _ => rep.record(
                "loop witness",
                false,
                format!(
                    "loop witness must name a non-root vertex of factor 1 or 2 and exponent >= 1 (got factor {}, vertex `{}`, exponent {})",
                    w.factor, w.vertex, w.exponent
                ),
            ),
        }

        if let Some(params) = &self.parameters {
            rep.record_parameters(self, params);
        }
        rep
    }
}

impl ValidationReport {
    fn record_parameters(&mut self, cfg: &WalkConfig, params: &Parameters) {
        let mut problems = Vec::new();
        if params.names.len() != params.values.len() {
            problems.push("names and values differ in length".to_string());
        }
        for (k, p) in params.values.iter().enumerate() {
            if !(p.value() > 0.0 && p.value() < 1.0) {
                problems.push(format!("parameter {k} = {} outside (0,1)", p.value()));
            }
        }
        let mut bound = std::collections::HashSet::new();
        for b in &params.bindings {
            let Some(f) = Factor::from_id(b.factor) else {
                problems.push(format!("binding names factor {}", b.factor));
                continue;
            };
            let spec = &cfg.factors[f.index()];
            let (Some(i), Some(j)) = (spec.vertex_index(&b.from), spec.vertex_index(&b.to)) else {
                problems.push(format!("binding names unknown vertex {} -> {}", b.from, b.to));
                continue;
            };
            let Some(pk) = params.values.get(b.param) else {
                problems.push(format!("binding refers to parameter {}", b.param));
                continue;
            };
            let entry = cfg.alpha_of(f) * spec.transition[i][j].value();
            if (entry - pk.value()).abs() > 1e-12 {
                problems.push(format!(
                    "kernel entry ({}, {} -> {}) = {entry} differs from p{} = {}",
                    b.factor,
                    b.from,
                    b.to,
                    b.param + 1,
                    pk.value()
                ));
            }
            bound.insert((b.factor, i, j));
        }
        for (fid, i, j, v) in cfg.kernel_entries() {
            // Entries equal to 1 are allowed to stay unbound.
            if v > 0.0 && v < 1.0 && !bound.contains(&(fid, i, j)) {
                let spec = &cfg.factors[fid as usize - 1];
                problems.push(format!(
                    "positive kernel entry ({fid}, {} -> {}) = {v} has no parameter",
                    spec.vertices[i], spec.vertices[j]
                ));
            }
        }
        self.record(
            "parameter bindings",
            problems.is_empty(),
            if problems.is_empty() {
                format!("{} parameters bind every positive kernel entry", params.values.len())
            } else {
                problems.join("; ")
            },
        );
    }
}

fn matrix_power_entry(spec: &FactorSpec, v: usize, exponent: u32) -> f64 {
    let n = spec.size();
    let mut row = vec![0.0; n];
    row[v] = 1.0;
    for _ in 0..exponent {
        let mut next = vec![0.0; n];
        for (i, &mass) in row.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (j, p) in spec.transition[i].iter().enumerate() {
                next[j] += mass * p.value();
            }
        }
        row = next;
    }
    row[v]
}

/// Exact `alpha_i` for the rational oracle.
pub(crate) fn exact_alpha(cfg: &WalkConfig, f: Factor) -> BigRational {
    match f {
        Factor::One => cfg.alpha.exact().clone(),
        Factor::Two => BigRational::one() - cfg.alpha.exact(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_a_passes() {
        let rep = WalkConfig::k3_x_k3().validate();
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn instance_b_passes() {
        let rep = WalkConfig::path_x_k3().validate();
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn two_by_two_is_rejected() {
        let two = || {
            FactorSpec::new(
                &["o", "x"],
                vec![
                    vec![Prob::from_ratio(0, 1), Prob::from_ratio(1, 1)],
                    vec![Prob::from_ratio(1, 1), Prob::from_ratio(0, 1)],
                ],
            )
        };
        let mut cfg = WalkConfig::k3_x_k3();
        cfg.factors = [two(), two()];
        cfg.parameters = None;
        cfg.loop_witness.vertex = "x".into();
        let rep = cfg.validate();
        assert!(!rep.passed());
        assert!(rep.mentions("recurrent-case exclusion"));
    }

    #[test]
    fn nonzero_diagonal_is_rejected() {
        let mut cfg = WalkConfig::k3_x_k3();
        cfg.parameters = None;
        cfg.factors[0].transition[1] =
            vec![Prob::from_ratio(1, 3), Prob::from_ratio(1, 3), Prob::from_ratio(1, 3)];
        let rep = cfg.validate();
        assert!(rep.mentions("diagonal must be zero"));
    }

    #[test]
    fn bad_row_sum_names_row() {
        let mut cfg = WalkConfig::k3_x_k3();
        cfg.factors[1].transition[2][0] = Prob::from_ratio(1, 3);
        let rep = cfg.validate();
        assert!(rep.mentions("row d sums to"), "{rep}");
    }

    #[test]
    fn alpha_bounds() {
        let mut cfg = WalkConfig::k3_x_k3();
        cfg.alpha = Prob::from_f64(1.0);
        cfg.parameters = None;
        cfg.epsilon0 = None;
        assert!(cfg.validate().mentions("alpha must lie in (0,1)"));
    }

    #[test]
    fn epsilon_floor_checked() {
        let mut cfg = WalkConfig::k3_x_k3();
        cfg.epsilon0 = Some(Prob::from_ratio(1, 3));
        assert!(!cfg.validate().passed());
    }

    #[test]
    fn broken_loop_witness() {
        let mut cfg = WalkConfig::k3_x_k3();
        cfg.loop_witness.exponent = 1;
        assert!(cfg.validate().mentions("loop witness"));
        cfg.loop_witness.vertex = "o1".into();
        cfg.loop_witness.exponent = 2;
        assert!(!cfg.validate().passed());
    }

    #[test]
    fn unreachable_vertex_reported() {
        let z = || Prob::from_ratio(0, 1);
        let one = || Prob::from_ratio(1, 1);
        let mut cfg = WalkConfig::k3_x_k3();
        cfg.parameters = None;
        cfg.epsilon0 = None;
        cfg.factors[0] = FactorSpec::new(
            &["o1", "a", "b"],
            vec![vec![z(), one(), z()], vec![one(), z(), z()], vec![one(), z(), z()]],
        );
        assert!(cfg.validate().mentions("unreachable from the root: b"));
    }

    #[test]
    fn parameter_mismatch_detected() {
        let mut cfg = WalkConfig::k3_x_k3();
        cfg.parameters.as_mut().unwrap().values[0] = Prob::from_ratio(1, 5);
        assert!(cfg.validate().mentions("differs from p1"));
    }

    #[test]
    fn json_round_trip() {
        for cfg in [WalkConfig::k3_x_k3(), WalkConfig::path_x_k3()] {
            let text = cfg.to_json_string();
            let back = WalkConfig::from_json_str(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.digest(), cfg.digest());
        }
    }

    #[test]
    fn root_is_moved_first() {
        let text = r#"{
            "factors": [
                {"vertices": ["a", "o1", "b"], "root": "o1",
                 "transition": [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]]},
                {"vertices": ["o2", "c", "d"],
                 "transition": [[0, "1/2", "1/2"], ["1/2", 0, "1/2"], ["1/2", "1/2", 0]]}
            ],
            "alpha": 0.5,
            "loop_witness": {"factor": 1, "vertex": "a", "exponent": 2}
        }"#;
        let cfg = WalkConfig::from_json_str(text).unwrap();
        assert_eq!(cfg.factors[0].vertices[0], "o1");
        assert!(cfg.validate().passed());
    }

    #[test]
    fn with_alpha_keeps_validity() {
        for a in [0.3, 0.45, 0.7] {
            let cfg = WalkConfig::k3_x_k3().with_alpha(a);
            assert!(cfg.validate().passed(), "{}", cfg.validate());
            assert_eq!(cfg.parameters.as_ref().unwrap().values.len(), 2);
        }
    }
}
