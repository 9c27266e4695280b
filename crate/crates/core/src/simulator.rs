//! Trajectory sampling, retrospective exit-time detection and the renewal
//! decomposition of a trajectory.
//!
//! A trajectory is stored as its sequence of moves plus the word length at
//! every time; the words themselves are only materialized on demand. Exit
//! times are recovered from the lengths alone: the step from `X_{n-1}` to
//! `X_n` modifies letter position `max(|X_{n-1}|, |X_n|)`, and `X` stays in
//! the cone of its length-`k` prefix after time `m` iff no later step touches
//! a position `<= k`. Hence `e_k` is the last time a position `<= k` was
//! modified.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::genfun::GenFunContext;
use crate::kernel::Walk;
use crate::report::CsvTable;
use crate::word::{Factor, Letter, Word};

pub const DEFAULT_BUFFER: usize = 500;

/// Generator for trajectory `index` under `master_seed`: ChaCha8 keyed by the
/// master seed, one stream per trajectory.
pub fn stream_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Push(Letter),
    Pop,
    Replace(Letter),
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub seed: u64,
    pub stream: u64,
    pub config_digest: String,
    pub steps: Vec<Step>,
    /// `|X_n|` for `n = 0..=N`.
    pub lengths: Vec<u32>,
    pub final_word: Word,
}

impl Trajectory {
    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Builds a trajectory from explicit states, checking that it starts at
    /// the root and that every transition has positive probability.
    pub fn from_states(walk: &Walk, states: &[Word]) -> Result<Trajectory> {
        match states.first() {
            Some(w) if w.is_root() => {}
            _ => return Err(Error::InvalidTrajectory("X_0 must be the root".into())),
        }
        let mut steps = Vec::with_capacity(states.len() - 1);
        for (n, pair) in states.windows(2).enumerate() {
            let (x, y) = (&pair[0], &pair[1]);
            if walk.transition_prob(x, y) <= 0.0 {
                return Err(Error::InvalidTrajectory(format!(
                    "step {} from {} to {} has probability zero",
                    n + 1,
                    walk.format_word(x),
                    walk.format_word(y)
                )));
            }
            steps.push(classify(x, y));
        }
        Ok(Trajectory {
            seed: 0,
            stream: 0,
            config_digest: walk.digest().to_string(),
            steps,
            lengths: states.iter().map(|w| w.len() as u32).collect(),
            final_word: states.last().expect("nonempty").clone(),
        })
    }

    /// Replays the moves and returns every state `X_0..X_N`.
    pub fn states(&self) -> Vec<Word> {
        let mut w = Word::root();
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(w.clone());
        for step in &self.steps {
            apply(&mut w, *step);
            out.push(w.clone());
        }
        out
    }

    /// Position of the letter touched by step `n >= 1`.
    fn modified_position(&self, n: usize) -> u32 {
        self.lengths[n - 1].max(self.lengths[n])
    }
}

fn classify(x: &Word, y: &Word) -> Step {
    if y.len() > x.len() {
        Step::Push(y.last().expect("longer word"))
    } else if y.len() < x.len() {
        Step::Pop
    } else {
        Step::Replace(y.last().expect("replace keeps the length"))
    }
}

fn apply(w: &mut Word, step: Step) {
    match step {
        Step::Push(l) => w.push(l),
        Step::Pop => {
            w.pop();
        }
        Step::Replace(l) => w.replace_last(l),
    }
}

/// Samples `n` steps of the walk from the root using stream 0 of `seed`.
pub fn sample_trajectory(walk: &Walk, n: usize, seed: u64) -> Trajectory {
    sample_trajectory_stream(walk, n, seed, 0)
}

pub fn sample_trajectory_stream(walk: &Walk, n: usize, master_seed: u64, stream: u64) -> Trajectory {
    let mut traj = sample_trajectory_with(walk, n, &mut stream_rng(master_seed, stream));
    traj.seed = master_seed;
    traj.stream = stream;
    traj
}

/// Samples `n` steps drawing two uniforms per step from `rng`.
pub fn sample_trajectory_with(walk: &Walk, n: usize, rng: &mut impl Rng) -> Trajectory {
    let mut w = Word::root();
    let mut steps = Vec::with_capacity(n);
    let mut lengths = Vec::with_capacity(n + 1);
    lengths.push(0);
    for _ in 0..n {
        let (f, v) = walk.sample_move(&w, rng.random(), rng.random());
        let step = match w.last() {
            Some(l) if l.factor == f && v == 0 => Step::Pop,
            Some(l) if l.factor == f => Step::Replace(Letter::new(f, v)),
            _ => Step::Push(Letter::new(f, v)),
        };
        apply(&mut w, step);
        steps.push(step);
        lengths.push(w.len() as u32);
    }
    Trajectory {
        seed: 0,
        stream: 0,
        config_digest: walk.digest().to_string(),
        steps,
        lengths,
        final_word: w,
    }
}

/// Runs a walk from the root until it enters `V_f^x` or its length reaches
/// `depth_cap`. The return probability from depth `K` decays geometrically
/// in `K`, so a generous cap only loses a negligible amount of hitting mass.
pub fn hits_factor(walk: &Walk, f: Factor, depth_cap: usize, rng: &mut impl Rng) -> bool {
    let mut w = Word::root();
    loop {
        let (g, v) = walk.sample_move(&w, rng.random(), rng.random());
        w = w.moved(g, v);
        if w.len() == 1 && w.delta().ok() == Some(f) {
            return true;
        }
        if w.len() >= depth_cap {
            return false;
        }
    }
}

/// Monte Carlo estimate of `xi_f = P[the walk ever visits V_f^x]` with its
/// standard error.
pub fn hitting_frequency(walk: &Walk, f: Factor, walks: usize, master_seed: u64, depth_cap: usize) -> (f64, f64) {
    use rayon::prelude::*;
    let hits: usize = (0..walks as u64)
        .into_par_iter()
        .map(|i| usize::from(hits_factor(walk, f, depth_cap, &mut stream_rng(master_seed, i))))
        .sum();
    let p = hits as f64 / walks as f64;
    (p, (p * (1.0 - p) / walks as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExitTime {
    pub k: usize,
    pub time: usize,
    pub confirmed: bool,
}

/// Candidate exit times `e_1..e_{|X_N|}` with their confirmation flags.
pub fn detect_exit_times(traj: &Trajectory, buffer: usize) -> Vec<ExitTime> {
    let n = traj.len();
    let top = traj.lengths[n] as usize;
    let mut last_touch = vec![0usize; top + 1];
    for t in 1..=n {
        let pos = traj.modified_position(t) as usize;
        if pos <= top {
            last_touch[pos] = t;
        }
    }
    let mut out = Vec::with_capacity(top);
    let mut e = 0;
    for (k, &t) in last_touch.iter().enumerate().skip(1) {
        e = e.max(t);
        out.push(ExitTime {
            k,
            time: e,
            confirmed: n >= buffer && e <= n - buffer,
        });
    }
    out
}

/// Block between consecutive renewal times.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Block {
    pub dt: usize,
    pub d_dist: u64,
    pub d_block: u64,
    pub d_ent: f64,
    #[serde(serialize_with = "serialize_word")]
    pub w: Word,
}

fn serialize_word<S: serde::Serializer>(w: &Word, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&w.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct RenewalSample {
    pub tau: u8,
    pub exit_times: Vec<ExitTime>,
    pub renewal_times: Vec<usize>,
    pub blocks: Vec<Block>,
    pub buffer: usize,
    pub censored_count: usize,
}

impl RenewalSample {
    pub fn t0(&self) -> Option<usize> {
        self.renewal_times.first().copied()
    }
}

/// Decomposes a trajectory at its confirmed renewal times
/// `T_k = e_{2k + tau}` and checks the structural identities on the way.
pub fn renewal_decompose(traj: &Trajectory, ctx: &GenFunContext, walk: &Walk, buffer: usize) -> Result<RenewalSample> {
    let all = detect_exit_times(traj, buffer);
    let censored_count = all.iter().filter(|e| !e.confirmed).count();
    let exits: Vec<ExitTime> = all.into_iter().filter(|e| e.confirmed).collect();
    let Some(first) = exits.first() else {
        return Err(Error::NoConfirmedExit);
    };
    debug_assert_eq!(first.k, 1);
    for pair in exits.windows(2) {
        if pair[0].time >= pair[1].time {
            return Err(Error::Invariant(format!("exit times not increasing at k = {}", pair[1].k)));
        }
    }
    for e in &exits {
        if traj.lengths[e.time] as usize != e.k {
            return Err(Error::Invariant(format!("|X_(e_{})| != {}", e.k, e.k)));
        }
    }
    let fw = &traj.final_word;
    let tau: u8 = if fw.letters()[0].factor == Factor::One { 1 } else { 2 };
    let tau_us = tau as usize;
    let mut renewal_times = Vec::new();
    let mut k = 0;
    while let Some(e) = exits.get(2 * k + tau_us - 1) {
        debug_assert_eq!(e.k, 2 * k + tau_us);
        if fw.letters()[e.k - 1].factor != Factor::One {
            return Err(Error::Invariant(format!("renewal word {k} does not end in factor 1")));
        }
        renewal_times.push(e.time);
        k += 1;
    }
    let mut blocks = Vec::with_capacity(renewal_times.len().saturating_sub(1));
    let mut dist = renewal_times
        .first()
        .map(|_| walk.graph_distance(&fw.prefix(tau_us)));
    for (k, pair) in renewal_times.windows(2).enumerate() {
        let k = k + 1;
        let w = fw.slice(2 * k + tau_us - 1, 2 * k + tau_us);
        if w.letters()[0].factor != Factor::Two || w.letters()[1].factor != Factor::One {
            return Err(Error::Invariant(format!("W_{k} has the wrong letter pattern")));
        }
        let dt = pair[1] - pair[0];
        let d_dist = walk.graph_distance(&w);
        let d_block = (traj.lengths[pair[1]] - traj.lengths[pair[0]]) as u64;
        if d_block != 2 || d_dist as usize > dt || dt < 2 {
            return Err(Error::Invariant(format!("block {k} violates the block bounds")));
        }
        let total = dist.expect("set with T_0") + d_dist;
        if walk.graph_distance(&fw.prefix(2 * k + tau_us)) != total {
            return Err(Error::Invariant(format!("distance telescoping fails at block {k}")));
        }
        dist = Some(total);
        blocks.push(Block {
            dt,
            d_dist,
            d_block,
            d_ent: ctx.dl_word(&w)?,
            w,
        });
    }
    Ok(RenewalSample {
        tau,
        exit_times: exits,
        renewal_times,
        blocks,
        buffer,
        censored_count,
    })
}

/// `k(n) = sup{m : T_m <= n}`, or `None` when `T_0 > n`.
pub fn k_of_n(renewal_times: &[usize], n: usize) -> Option<usize> {
    renewal_times.partition_point(|&t| t <= n).checked_sub(1)
}

/// One row per block: `trajectory_id,k,dT,D_dist,D_ent`.
pub fn blocks_table<'a>(samples: impl IntoIterator<Item = (usize, &'a RenewalSample)>) -> CsvTable {
    let mut table = CsvTable::new(&["trajectory_id", "k", "dT", "D_dist", "D_ent"]);
    for (id, s) in samples {
        for (k, b) in s.blocks.iter().enumerate() {
            table.push(vec![
                id.to_string(),
                (k + 1).to_string(),
                b.dt.to_string(),
                b.d_dist.to_string(),
                crate::report::fmt_f64(b.d_ent),
            ]);
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::WalkConfig;

    fn walk_a() -> Walk {
        Walk::new(WalkConfig::k3_x_k3()).unwrap()
    }

    fn traj(walk: &Walk, words: &[&[&str]]) -> Trajectory {
        let states: Vec<Word> = words.iter().map(|w| walk.word(w).unwrap()).collect();
        Trajectory::from_states(walk, &states).unwrap()
    }

    fn times(exits: &[ExitTime]) -> Vec<(usize, usize, bool)> {
        exits.iter().map(|e| (e.k, e.time, e.confirmed)).collect()
    }

    #[test]
    fn monotone_growth() {
        let w = walk_a();
        let t = traj(&w, &[&[], &["a"], &["a", "c"], &["a", "c", "a"]]);
        assert_eq!(
            times(&detect_exit_times(&t, 0)),
            vec![(1, 1, true), (2, 2, true), (3, 3, true)]
        );
    }

    #[test]
    fn return_invalidates_earlier_visit() {
        let w = walk_a();
        let t = traj(&w, &[&[], &["a"], &[], &["c"], &["c", "a"]]);
        assert_eq!(times(&detect_exit_times(&t, 0)), vec![(1, 3, true), (2, 4, true)]);
        assert_eq!(times(&detect_exit_times(&t, 2)), vec![(1, 3, false), (2, 4, false)]);
        let ctx = GenFunContext::build(&w).unwrap();
        let s = renewal_decompose(&t, &ctx, &w, 0).unwrap();
        assert_eq!(s.tau, 2);
        assert_eq!(s.renewal_times, vec![4]);
        assert!(s.blocks.is_empty());
        assert!(matches!(renewal_decompose(&t, &ctx, &w, 4), Err(Error::NoConfirmedExit)));
    }

    #[test]
    fn replace_moves_the_exit_time() {
        let w = walk_a();
        let t = traj(&w, &[&[], &["a"], &["b"], &["b", "c"]]);
        assert_eq!(times(&detect_exit_times(&t, 0)), vec![(1, 2, true), (2, 3, true)]);
    }

    #[test]
    fn rejects_impossible_steps() {
        let w = walk_a();
        let bad = vec![Word::root(), w.word(&["a", "c"]).unwrap()];
        assert!(Trajectory::from_states(&w, &bad).is_err());
        let bad = vec![w.word(&["a"]).unwrap()];
        assert!(Trajectory::from_states(&w, &bad).is_err());
    }

    #[test]
    fn k_of_n_cases() {
        assert_eq!(k_of_n(&[4, 9, 15], 10), Some(1));
        assert_eq!(k_of_n(&[4, 9, 15], 3), None);
        assert_eq!(k_of_n(&[4], 4), Some(0));
    }

    #[test]
    fn deterministic_and_replayable() {
        let w = walk_a();
        let a = sample_trajectory(&w, 500, 7);
        let b = sample_trajectory(&w, 500, 7);
        assert_eq!(a.steps, b.steps);
        assert_eq!(sample_trajectory(&w, 0, 1).states(), vec![Word::root()]);
        let states = a.states();
        assert_eq!(states.last().unwrap(), &a.final_word);
        let rebuilt = Trajectory::from_states(&w, &states).unwrap();
        assert_eq!(rebuilt.steps, a.steps);
        assert_eq!(rebuilt.lengths, a.lengths);
    }

    #[test]
    fn exit_times_match_definition_by_brute_force() {
        let w = Walk::new(WalkConfig::path_x_k3()).unwrap();
        for seed in 0..20 {
            let t = sample_trajectory(&w, 300, seed);
            let states = t.states();
            for e in detect_exit_times(&t, 0) {
                let m = (1..states.len())
                    .find(|&m| states[m].len() == e.k && states[m..].iter().all(|x| x.in_cone(&states[m])))
                    .unwrap();
                assert_eq!(m, e.time, "seed {seed}, k {}", e.k);
            }
        }
    }

    #[test]
    fn buffer_only_removes_confirmations() {
        let w = walk_a();
        let t = sample_trajectory(&w, 3000, 3);
        let small = detect_exit_times(&t, 100);
        let large = detect_exit_times(&t, 800);
        for (a, b) in small.iter().zip(&large) {
            assert_eq!(a.time, b.time);
            assert!(a.confirmed || !b.confirmed);
        }
    }

    #[test]
    fn decomposition_invariants_hold() {
        let w = walk_a();
        let ctx = GenFunContext::build(&w).unwrap();
        for seed in 0..10 {
            let t = sample_trajectory(&w, 4000, seed);
            let s = renewal_decompose(&t, &ctx, &w, DEFAULT_BUFFER).unwrap();
            for (k, &tk) in s.renewal_times.iter().enumerate() {
                assert_eq!(t.lengths[tk] as usize, 2 * k + s.tau as usize);
            }
            assert!(s.blocks.iter().all(|b| b.d_block == 2 && b.w.len() == 2));
        }
    }
}
