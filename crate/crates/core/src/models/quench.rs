//! XY chain quench with spontaneous emission.
//!
//! `d rho/dt = -i [H, rho] + gamma sum_j (s-_j rho s+_j - 1/2 {n_j, rho})` with
//! nearest-neighbour hopping `H = J sum_j (s+_j s-_{j+1} + h.c.)` on an open
//! chain, started from the Néel state `|01 01 ..>`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{symmetrize_hermitian, Bipartition, CMatrix, DensityOperator, C64};
use crate::symmetry::pt_sector_block;

/// Largest chain integrated densely.
pub const MAX_SITES: usize = 8;

/// Target Frobenius distance between successive step refinements.
pub const STEP_TOL: f64 = 1e-8;

const MAX_STEPS_PER_INTERVAL: usize = 1 << 18;

#[derive(Clone, Debug, PartialEq)]
pub struct QuenchParams {
    pub n_sites: usize,
    pub j_hop: f64,
    pub gamma: f64,
    pub t_grid: Vec<f64>,
    /// A = the first `n_a` sites.
    pub partition: Bipartition,
}

impl QuenchParams {
    /// Half-chain partition.
    pub fn new(n_sites: usize, j_hop: f64, gamma: f64, t_grid: Vec<f64>) -> Result<Self> {
        let partition = Bipartition::new(n_sites / 2, n_sites - n_sites / 2)?;
        let p = Self { n_sites, j_hop, gamma, t_grid, partition };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 || self.n_sites % 2 != 0 {
            return Err(Error::OutOfRange(format!("n_sites must be even and positive, got {}", self.n_sites)));
        }
        if self.n_sites > MAX_SITES {
            return Err(Error::OutOfRange(format!("n_sites {} exceeds the dense cap {MAX_SITES}", self.n_sites)));
        }
        if self.partition.n_qubits() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, got: self.partition.n_qubits() });
        }
        if !(self.gamma >= 0.0) || !self.j_hop.is_finite() {
            return Err(Error::OutOfRange(format!("need gamma >= 0 and finite J, got {} and {}", self.gamma, self.j_hop)));
        }
        if self.t_grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || self.t_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::OutOfRange("times must be finite, non-negative and ascending".into()));
        }
        Ok(())
    }
}

/// Néel state `|01 01 ..>` (site 0 down).
pub fn neel_index(n_sites: usize) -> usize {
    (0..n_sites).filter(|s| s % 2 == 1).map(|s| 1usize << (n_sites - 1 - s)).sum()
}

/// Sparse Lindblad generator. Hops are stored as `(i, j)` pairs with `j = H i / J`.
struct Generator {
    dim: usize,
    n_sites: usize,
    j: f64,
    gamma: f64,
    hops: Vec<Vec<usize>>,
    occupation: Vec<f64>,
}

impl Generator {
    fn new(n_sites: usize, j: f64, gamma: f64) -> Self {
        let dim = 1usize << n_sites;
        let hops = (0..dim)
            .map(|i| {
                (0..n_sites.saturating_sub(1))
                    .filter_map(|s| {
                        let m = (1usize << (n_sites - 1 - s)) | (1usize << (n_sites - 2 - s));
                        let pair = i & m;
                        (pair != 0 && pair != m).then_some(i ^ m)
                    })
                    .collect()
            })
            .collect();
        let occupation = (0..dim).map(|i| i.count_ones() as f64).collect();
        Self { dim, n_sites, j, gamma, hops, occupation }
    }

    /// `L(rho)`, written as `-i (H_eff rho - rho H_eff^†) + gamma sum_j s-_j rho s+_j`
    /// with `H_eff = H - i gamma/2 N`.
    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim;
        let mi = C64::new(0.0, -1.0);
        let cols: Vec<Vec<C64>> = (0..d)
            .into_par_iter()
            .map(|c| {
                let mut out = vec![C64::new(0.0, 0.0); d];
                for (r, o) in out.iter_mut().enumerate() {
                    // (H rho)_{rc} - (rho H)_{rc}; H is real symmetric.
                    let mut h = C64::new(0.0, 0.0);
                    for &k in &self.hops[r] {
                        h += rho[(k, c)];
                    }
                    for &k in &self.hops[c] {
                        h -= rho[(r, k)];
                    }
                    let mut v = mi * h * self.j;
                    v -= rho[(r, c)] * (0.5 * self.gamma * (self.occupation[r] + self.occupation[c]));
                    if self.gamma != 0.0 {
                        for s in 0..self.n_sites {
                            let b = 1usize << (self.n_sites - 1 - s);
                            if r & b == 0 && c & b == 0 {
                                v += rho[(r | b, c | b)] * self.gamma;
                            }
                        }
                    }
                    *o = v;
                }
                out
            })
            .collect();
        CMatrix::from_fn(d, d, |r, c| cols[c][r])
    }

    fn rk4_step(&self, rho: &CMatrix, h: f64) -> CMatrix {
        let hc = C64::new(h, 0.0);
        let half = C64::new(h / 2.0, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * half));
        let k3 = self.apply(&(rho + &k2 * half));
        let k4 = self.apply(&(rho + &k3 * hc));
        rho + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * (hc / 6.0)
    }

    fn integrate(&self, rho: &CMatrix, dt: f64, steps: usize) -> CMatrix {
        let h = dt / steps as f64;
        let mut out = rho.clone();
        for _ in 0..steps {
            out = self.rk4_step(&out, h);
        }
        out
    }
}

/// Evolve the Néel state and return `rho(t)` at every grid time.
///
/// Each interval is integrated with `m` and `2m` RK4 steps, doubling `m`
/// until the two results agree to [`STEP_TOL`] in Frobenius norm.
pub fn lindblad_evolve(params: &QuenchParams) -> Result<Vec<DensityOperator>> {
    params.validate()?;
    let gen = Generator::new(params.n_sites, params.j_hop, params.gamma);
    let d = gen.dim;
    let mut rho = CMatrix::zeros(d, d);
    let neel = neel_index(params.n_sites);
    rho[(neel, neel)] = C64::new(1.0, 0.0);
    let rate = (2.0 * params.j_hop.abs() * (params.n_sites - 1) as f64 + params.gamma * params.n_sites as f64).max(1e-12);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(params.t_grid.len());
    for &target in &params.t_grid {
        let dt = target - t;
        if dt > 0.0 {
            let mut steps = ((dt * rate / 0.5).ceil() as usize).max(1);
            let mut coarse = gen.integrate(&rho, dt, steps);
            loop {
                let fine = gen.integrate(&rho, dt, 2 * steps);
                let diff = (&fine - &coarse).norm();
                if diff <= STEP_TOL {
                    rho = fine;
                    break;
                }
                steps *= 2;
                if steps > MAX_STEPS_PER_INTERVAL {
                    return Err(Error::NoConvergence(format!(
                        "step refinement stalled at t = {target} (difference {diff:e})"
                    )));
                }
                coarse = fine;
            }
            t = target;
        }
        symmetrize_hermitian(&mut rho);
        let tr = rho.trace().re;
        rho /= C64::new(tr, 0.0);
        out.push(DensityOperator::new(params.partition, rho.clone())?);
    }
    Ok(out)
}

/// `(p1^2/p2, p3 p1/p2^2)` of the sector block `P_q rho^Γ P_q`; `None` when `p2` vanishes.
pub fn quench_ratios(states: &[DensityOperator], q: i32) -> Result<Vec<Option<(f64, f64)>>> {
    states
        .iter()
        .map(|rho| {
            let p = pt_sector_block(rho, q)?.moments(3);
            let (p1, p2, p3) = (p.p(1), p.p(2), p.p(3));
            Ok((p2 > 1e-300).then(|| (p1 * p1 / p2, p3 * p1 / (p2 * p2))))
        })
        .collect()
}

/// Leading-order ratios `(gamma^2 N_A^2 / (8 J^2), 3 gamma^2 N_A / (8 J^2))`.
pub fn perturbative_ratios(gamma: f64, j: f64, n_a: usize) -> (f64, f64) {
    let r = gamma * gamma / (8.0 * j * j);
    (r * (n_a * n_a) as f64, 3.0 * r * n_a as f64)
}
