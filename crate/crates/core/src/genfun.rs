//! Numerical generating functions: factor resolvents, the `xi_i` fixed point,
//! cone-stay probabilities and the entropy distance `d_L`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Walk;
use crate::oracle::{even_root_proxy, reduced_root_green_series, Oracle};
use crate::word::{Factor, Word};

pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 1_000_000;
/// Iterates beyond this bound are treated as divergent.
const DIVERGENCE_BOUND: f64 = 1e8;

/// Resolvent `(I - t P_i)^{-1}`, i.e. `G_i(x, y | t)` for all pairs.
pub fn factor_resolvent(walk: &Walk, f: Factor, t: f64) -> Result<DMatrix<f64>> {
    let singular = Error::SingularSolve { factor: f.id(), t };
    // Stochastic factors have spectral radius 1.
    if !(0.0..1.0).contains(&t) {
        return Err(singular);
    }
    let n = walk.factor_size(f);
    let m = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - t * walk.factor_prob(f, i as u16, j as u16)
    });
    let lu = m.lu();
    let det = lu.determinant();
    if det.abs() < 1e-12 {
        return Err(singular);
    }
    let inv = lu.try_inverse().ok_or(singular)?;
    if inv.iter().any(|v| !v.is_finite() || *v < -1e-12) {
        return Err(Error::SingularSolve { factor: f.id(), t });
    }
    Ok(inv)
}

/// `G_i(x, y | t)`.
pub fn factor_green(walk: &Walk, f: Factor, x: u16, y: u16, t: f64) -> Result<f64> {
    Ok(factor_resolvent(walk, f, t)?[(x as usize, y as usize)])
}

/// `L_i(x, y | t) = G_i(x, y | t) / G_i(x, x | t)`.
pub fn factor_l(walk: &Walk, f: Factor, x: u16, y: u16, t: f64) -> Result<f64> {
    let g = factor_resolvent(walk, f, t)?;
    Ok(g[(x as usize, y as usize)] / g[(x as usize, x as usize)])
}

#[derive(Clone, Debug, Serialize)]
pub struct XiSolution {
    pub z: f64,
    pub xi: [f64; 2],
    /// `R_j(v | z)`: first passage from the one-letter word `v` to `o`; index 0 unused.
    pub returns: [Vec<f64>; 2],
    pub iterations: usize,
}

/// Solves the one-step system for the first-return functions `R_j(v | z)`
/// by monotone iteration from zero, then
/// `xi_1(z) = alpha_1 z / (1 - alpha_2 z sum_y p_2(o_2, y) R_2(y | z))`
/// and symmetrically for `xi_2`. The iteration converges to the minimal
/// nonnegative solution whenever one exists.
pub fn solve_xi(walk: &Walk, z: f64) -> Result<XiSolution> {
    let sizes = [walk.factor_size(Factor::One), walk.factor_size(Factor::Two)];
    let mut r = [vec![0.0; sizes[0]], vec![0.0; sizes[1]]];
    let alpha = [walk.alpha(Factor::One) * z, walk.alpha(Factor::Two) * z];

    let excursion = |r: &[Vec<f64>; 2], f: Factor| -> f64 {
        let j = f.index();
        walk.factor_targets(f, 0)
            .iter()
            .map(|&y| alpha[j] * walk.factor_prob(f, 0, y) * r[j][y as usize])
            .sum()
    };

    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut delta: f64 = 0.0;
        for f in Factor::BOTH {
            let j = f.index();
            let exc_other = excursion(&r, f.other());
            for v in 1..sizes[j] {
                let mut s = 0.0;
                for &w in walk.factor_targets(f, v as u16) {
                    let p = walk.factor_prob(f, v as u16, w);
                    s += if w == 0 { p } else { p * r[j][w as usize] };
                }
                let new = alpha[j] * s + exc_other * r[j][v];
                delta = delta.max((new - r[j][v]).abs());
                r[j][v] = new;
            }
        }
        let blown = r.iter().flatten().any(|v| !v.is_finite() || *v > DIVERGENCE_BOUND);
        if blown || iterations >= FIXED_POINT_MAX_ITER && delta > FIXED_POINT_TOL {
            return Err(Error::NoConvergence { z, iterations });
        }
        if delta <= FIXED_POINT_TOL {
            break;
        }
    }

    let mut xi = [0.0; 2];
    for f in Factor::BOTH {
        let exc = excursion(&r, f.other());
        if exc >= 1.0 {
            return Err(Error::NoConvergence { z, iterations });
        }
        xi[f.index()] = alpha[f.index()] / (1.0 - exc);
    }
    Ok(XiSolution {
        z,
        xi,
        returns: r,
        iterations,
    })
}

/// `C_L = -log((1 - xi_1)(1 - xi_2))`.
pub fn entropy_bound_cl(xi1: f64, xi2: f64) -> f64 {
    -((1.0 - xi1) * (1.0 - xi2)).ln()
}

/// Everything at `z = 1` that the simulator and estimators need.
#[derive(Clone, Debug, Serialize)]
pub struct GenFunContext {
    pub config_digest: String,
    pub xi: [f64; 2],
    pub cone_stay: [f64; 2],
    /// `L_i(o_i, v | xi_i)` for every vertex `v` (root included, value 1).
    pub factor_l: [Vec<f64>; 2],
    pub cl_constant: f64,
    pub returns: [Vec<f64>; 2],
}

impl GenFunContext {
    pub fn build(walk: &Walk) -> Result<GenFunContext> {
        let sol = solve_xi(walk, 1.0)?;
        let mut factor_l = [Vec::new(), Vec::new()];
        for f in Factor::BOTH {
            let t = sol.xi[f.index()];
            let g = factor_resolvent(walk, f, t)?;
            factor_l[f.index()] = (0..walk.factor_size(f)).map(|v| g[(0, v)] / g[(0, 0)]).collect();
        }
        let ctx = GenFunContext {
            config_digest: walk.digest().to_string(),
            xi: sol.xi,
            cone_stay: [1.0 - sol.xi[0], 1.0 - sol.xi[1]],
            cl_constant: entropy_bound_cl(sol.xi[0], sol.xi[1]),
            factor_l,
            returns: sol.returns,
        };
        ctx.check_invariants()?;
        Ok(ctx)
    }

    fn check_invariants(&self) -> Result<()> {
        for j in 0..2 {
            if !(self.xi[j] > 0.0 && self.xi[j] < 1.0) {
                return Err(Error::Invariant(format!("xi_{} = {} outside (0,1)", j + 1, self.xi[j])));
            }
        }
        let upper = 1.0 / (self.cone_stay[0] * self.cone_stay[1]);
        for (j, table) in self.factor_l.iter().enumerate() {
            for (v, &l) in table.iter().enumerate() {
                if l <= 0.0 {
                    return Err(Error::NonpositiveL {
                        factor: j as u8 + 1,
                        vertex: v,
                        value: l,
                    });
                }
                if l > upper * (1.0 + 1e-12) {
                    return Err(Error::Invariant(format!(
                        "L_{}(o, {v}) = {l} exceeds 1/((1-xi_1)(1-xi_2)) = {upper}",
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn entropy_bound_cl(&self) -> f64 {
        self.cl_constant
    }

    /// `L(o, v | 1)` for a one-letter word `v`.
    pub fn letter_l(&self, f: Factor, v: u16) -> f64 {
        self.factor_l[f.index()][v as usize]
    }

    /// `-log L(o, v | 1)` for a single letter.
    pub fn letter_cost(&self, f: Factor, v: u16) -> f64 {
        -self.letter_l(f, v).ln()
    }

    /// `d_L(o, w) = -log L(o, w | 1)`, additive over the letters of `w`.
    pub fn dl_word(&self, w: &Word) -> Result<f64> {
        let mut total = 0.0;
        for l in w.letters() {
            let value = self.letter_l(l.factor, l.vertex);
            if value <= 0.0 {
                return Err(Error::NonpositiveL {
                    factor: l.factor.id(),
                    vertex: l.vertex as usize,
                    value,
                });
            }
            total -= value.ln();
        }
        Ok(total)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridPoint {
    pub z: f64,
    pub converged: bool,
    pub xi: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusReport {
    pub grid: Vec<GridPoint>,
    /// Largest grid point up to which every `solve_xi` converged with `xi_i(z) < 1`.
    pub largest_convergent_z: f64,
    /// `p^(2n)(o,o)^(1/(2n))` from word enumeration.
    pub spectral_proxy: Vec<(usize, f64)>,
    /// Same proxy at a high order from the reduced return series.
    pub spectral_proxy_high_order: (usize, f64),
    pub plausible: bool,
}

/// Probes the assumption that `G(o, o | z)` converges beyond `z = 1`.
pub fn radius_diagnostic(walk: &Walk, proxy_order: usize) -> Result<RadiusReport> {
    let mut grid = Vec::new();
    let mut largest = f64::NAN;
    let mut still_ok = true;
    for k in 0..=10 {
        let z = 1.0 + 0.02 * k as f64;
        let point = match solve_xi(walk, z) {
            Ok(sol) if sol.xi.iter().all(|&x| x < 1.0) => GridPoint {
                z,
                converged: true,
                xi: Some(sol.xi),
            },
            Ok(sol) => GridPoint {
                z,
                converged: false,
                xi: Some(sol.xi),
            },
            Err(Error::NoConvergence { .. }) => GridPoint {
                z,
                converged: false,
                xi: None,
            },
            Err(e) => return Err(e),
        };
        if still_ok && point.converged {
            largest = z;
        } else {
            still_ok = false;
        }
        grid.push(point);
    }
    let spectral_proxy = Oracle::new(walk).spectral_radius_proxy(proxy_order)?;
    let high = even_root_proxy(&reduced_root_green_series(walk, 400));
    let spectral_proxy_high_order = *high.last().expect("nonempty");
    Ok(RadiusReport {
        plausible: largest > 1.0,
        largest_convergent_z: largest,
        grid,
        spectral_proxy,
        spectral_proxy_high_order,
    })
}
