//! Seeded random time-varying channels, base vectors and the diagonal
//! alignment operators built from them.
//!
//! Every entry is drawn independently with magnitude uniform on `[lo, hi]`
//! and phase uniform on `[0, 2pi)`. Draws come from ChaCha20 keyed by the
//! 64-bit seed; channels use stream 0 and base vectors stream 1, always in
//! index order, so a realization is a pure function of its inputs.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::demand::DemandSpec;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

const CHANNEL_STREAM: u64 = 0;
const BASE_STREAM: u64 = 1;

/// Above this many rows the stacked `M tau x M tau` solve is skipped in favour
/// of the per-instant route.
pub const DENSE_SOLVE_LIMIT: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagnitudeBounds {
    pub lo: f64,
    pub hi: f64,
}

impl Default for MagnitudeBounds {
    fn default() -> Self {
        MagnitudeBounds { lo: 0.5, hi: 2.0 }
    }
}

impl MagnitudeBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "magnitude bounds need 0 < lo <= hi < inf, got [{lo}, {hi}]"
            )));
        }
        Ok(MagnitudeBounds { lo, hi })
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> Complex64 {
        let magnitude = if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        };
        Complex64::from_polar(magnitude, rng.random_range(0.0..TAU))
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `H_jk(t)` for every receiver, transmitter and time instant; each one an
/// `M x M` matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    k: usize,
    j: usize,
    m: usize,
    tau: usize,
    pub seed: u64,
    pub bounds: MagnitudeBounds,
    entries: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn antennas(&self) -> usize {
        self.m
    }

    fn offset(&self, j: usize, k: usize, t: usize) -> usize {
        assert!((1..=self.j).contains(&j) && (1..=self.k).contains(&k) && t < self.tau);
        (((j - 1) * self.k + (k - 1)) * self.tau + t) * self.m * self.m
    }

    /// `H_jk(t)`, with `j`, `k` 1-based and `t` 0-based.
    pub fn matrix(&self, j: usize, k: usize, t: usize) -> DMatrix<Complex64> {
        let off = self.offset(j, k, t);
        DMatrix::from_row_slice(self.m, self.m, &self.entries[off..off + self.m * self.m])
    }

    /// Entry `(r, c)` (0-based) of `H_jk(t)`.
    pub fn entry(&self, j: usize, k: usize, t: usize, r: usize, c: usize) -> Complex64 {
        self.entries[self.offset(j, k, t) + r * self.m + c]
    }

    /// Scalar channel `H_jk(t)` for single-antenna networks.
    pub fn scalar(&self, j: usize, k: usize, t: usize) -> Complex64 {
        self.entry(j, k, t, 0, 0)
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Replaces `H_jk(t)` for every `t`; test fixtures only.
    pub fn set_link(&mut self, j: usize, k: usize, value: &DMatrix<Complex64>) {
        for t in 0..self.tau {
            let off = self.offset(j, k, t);
            for r in 0..self.m {
                for c in 0..self.m {
                    self.entries[off + r * self.m + c] = value[(r, c)];
                }
            }
        }
    }

    /// Time-expanded column of transmit antenna `p` (1-based): an
    /// `M tau x tau` matrix, rows ordered receive-antenna-major.
    pub fn expanded_column(&self, j: usize, k: usize, p: usize) -> CMatrix {
        let tau = self.tau;
        let mut out = CMatrix::zeros(self.m * tau, tau);
        for t in 0..tau {
            for r in 0..self.m {
                out[(r * tau + t, t)] = self.entry(j, k, t, r, p - 1);
            }
        }
        out
    }

    /// `[H_jk,1 .. H_jk,M]` time-expanded: `M tau x M tau`.
    pub fn expanded_stack(&self, j: usize, k: usize) -> CMatrix {
        let tau = self.tau;
        let mut out = CMatrix::zeros(self.m * tau, self.m * tau);
        for t in 0..tau {
            for r in 0..self.m {
                for p in 0..self.m {
                    out[(r * tau + t, p * tau + t)] = self.entry(j, k, t, r, p);
                }
            }
        }
        out
    }
}

pub fn generate_channels(spec: &DemandSpec, tau: usize, seed: u64) -> Result<ChannelRealization> {
    generate_channels_with(spec, tau, seed, MagnitudeBounds::default())
}

pub fn generate_channels_with(
    spec: &DemandSpec,
    tau: usize,
    seed: u64,
    bounds: MagnitudeBounds,
) -> Result<ChannelRealization> {
    if tau < 1 {
        return Err(Error::InvalidParameter("tau must be at least 1".into()));
    }
    let count = spec.j() * spec.k() * tau * spec.m() * spec.m();
    let mut rng = rng_for(seed, CHANNEL_STREAM);
    let entries = (0..count).map(|_| bounds.sample(&mut rng)).collect();
    Ok(ChannelRealization {
        k: spec.k(),
        j: spec.j(),
        m: spec.m(),
        tau,
        seed,
        bounds,
        entries,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseVectors {
    pub seed: u64,
    pub vectors: Vec<Vec<Complex64>>,
}

impl BaseVectors {
    /// Base vector `i` (1-based).
    pub fn get(&self, i: usize) -> &[Complex64] {
        &self.vectors[i - 1]
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn generate_base_vectors(tau: usize, count: usize, seed: u64) -> BaseVectors {
    generate_base_vectors_with(tau, count, seed, MagnitudeBounds::default())
}

pub fn generate_base_vectors_with(
    tau: usize,
    count: usize,
    seed: u64,
    bounds: MagnitudeBounds,
) -> BaseVectors {
    let mut rng = rng_for(seed, BASE_STREAM);
    BaseVectors {
        seed,
        vectors: (0..count)
            .map(|_| (0..tau).map(|_| bounds.sample(&mut rng)).collect())
            .collect(),
    }
}

/// Diagonal of an alignment operator `T`, plus (multi-antenna) the largest
/// off-diagonal magnitude seen in the block it was cut from.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentOperator {
    pub diag: Vec<Complex64>,
    pub off_diagonal_residual: f64,
}

/// `T = H_jm^{-1} H_jn` over the time expansion, single antenna:
/// `diag[t] = H_jn(t) / H_jm(t)`.
pub fn assemble_t(
    chan: &ChannelRealization,
    m: usize,
    n: usize,
    j: usize,
) -> Result<AlignmentOperator> {
    if chan.m != 1 {
        return Err(Error::InvalidParameter(
            "scalar alignment operators need M = 1".into(),
        ));
    }
    Ok(AlignmentOperator {
        diag: (0..chan.tau)
            .map(|t| chan.scalar(j, n, t) / chan.scalar(j, m, t))
            .collect(),
        off_diagonal_residual: 0.0,
    })
}

/// All `M` blocks of `[H_jm,1:M]^{-1} H_jn,p`, one per `q`.
///
/// Up to [`DENSE_SOLVE_LIMIT`] rows the full stacked system is solved with an
/// LU factorisation and each block's off-diagonal residual is measured
/// directly. Beyond that the per-instant route is used and the residual is
/// the reconstruction error of the block-diagonal solution, which (the
/// stacked matrix being invertible) pins down the unique solution.
pub fn assemble_t_multi_blocks(
    chan: &ChannelRealization,
    m: usize,
    n: usize,
    p: usize,
    j: usize,
) -> Result<Vec<AlignmentOperator>> {
    if chan.m < 2 {
        return Err(Error::InvalidParameter(
            "stacked alignment operators need M >= 2".into(),
        ));
    }
    if chan.m * chan.tau > DENSE_SOLVE_LIMIT {
        let blocks = per_instant_t_multi(chan, m, n, p, j)?;
        let residual = reconstruction_residual(chan, m, n, p, j, &blocks);
        return Ok(blocks
            .into_iter()
            .map(|diag| AlignmentOperator {
                diag,
                off_diagonal_residual: residual,
            })
            .collect());
    }

    let tau = chan.tau;
    let stacked = chan.expanded_stack(j, m);
    let target = chan.expanded_column(j, n, p);
    let solution = stacked
        .lu()
        .solve(&target)
        .ok_or(Error::SingularChannel { attempts: 1 })?;
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularChannel { attempts: 1 });
    }
    Ok((0..chan.m)
        .map(|q| {
            let block = solution.rows(q * tau, tau);
            let mut off = 0.0f64;
            for r in 0..tau {
                for c in 0..tau {
                    if r != c {
                        off = off.max(block[(r, c)].norm());
                    }
                }
            }
            AlignmentOperator {
                diag: (0..tau).map(|t| block[(t, t)]).collect(),
                off_diagonal_residual: off,
            }
        })
        .collect())
}

/// Block `q` (1-based) of `[H_jm,1:M]^{-1} H_jn,p`.
pub fn assemble_t_multi(
    chan: &ChannelRealization,
    m: usize,
    n: usize,
    p: usize,
    q: usize,
    j: usize,
) -> Result<AlignmentOperator> {
    let mut blocks = assemble_t_multi_blocks(chan, m, n, p, j)?;
    Ok(blocks.swap_remove(q - 1))
}

/// The same blocks from `tau` independent `M x M` solves:
/// `diag_q[t] = (H_jm(t)^{-1} H_jn(t))[q, p]`.
pub fn per_instant_t_multi(
    chan: &ChannelRealization,
    m: usize,
    n: usize,
    p: usize,
    j: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let mut blocks = vec![Vec::with_capacity(chan.tau); chan.m];
    for t in 0..chan.tau {
        let h_m = chan.matrix(j, m, t);
        let h_n = chan.matrix(j, n, t);
        let rhs = h_n.column(p - 1).into_owned();
        let x = h_m
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularChannel { attempts: 1 })?;
        for (q, block) in blocks.iter_mut().enumerate() {
            block.push(x[q]);
        }
    }
    Ok(blocks)
}

/// `max |[H_jm,1:M] * stack(diag blocks) - H_jn,p|`, evaluated per instant.
pub fn reconstruction_residual(
    chan: &ChannelRealization,
    m: usize,
    n: usize,
    p: usize,
    j: usize,
    blocks: &[Vec<Complex64>],
) -> f64 {
    let mut worst = 0.0f64;
    for t in 0..chan.tau {
        for r in 0..chan.m {
            let mut acc = Complex64::new(0.0, 0.0);
            for (q, block) in blocks.iter().enumerate() {
                acc += chan.entry(j, m, t, r, q) * block[t];
            }
            worst = worst.max((acc - chan.entry(j, n, t, r, p - 1)).norm());
        }
    }
    worst
}
