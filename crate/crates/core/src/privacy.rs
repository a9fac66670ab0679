//! Privacy against an adversary observing `Y`, where `S -> X -> Y`, `S` is
//! private and `X` is the data to be disclosed. Joints are passed as
//! `p_{S,X}` with rows indexing `S` and columns indexing `X`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{conditional_entropy_x_given_y, entropy, mutual_information, mutual_information_table, JointPmf};
use crate::error::{Error, Result};
use crate::linalg::{right_singular_basis, Matrix};
use crate::pic::{decompose, q_matrix, DEFAULT_TOL};
use crate::scalar::{binary_entropy, LogBase, Real};

/// Residual singular value below which a null direction is certified.
pub const CERTIFIED_SIGMA: f64 = 1e-9;
/// Residual singular value below which a null direction is still attempted.
pub const BORDERLINE_SIGMA: f64 = 1e-6;
/// Channel entries this close to 0 or 1 are snapped.
pub const SNAP: f64 = 1e-12;
/// Default number of `t` values in a funnel curve.
pub const GRID_POINTS: usize = 64;
/// Default restarts of the funnel search.
pub const FUNNEL_RESTARTS: usize = 16;
/// Floor on `||q_X - p_X||_1` in the `v*` search.
pub const VSTAR_TRUST_FLOOR: f64 = 1e-6;

const PENALTY_ROUNDS: usize = 5;
const PENALTY_GROWTH: f64 = 10.0;
const STEPS_PER_ROUND: usize = 200;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn snap<T: Real>(v: T) -> T {
    let s = T::lit(SNAP);
    if v < s {
        T::zero()
    } else if v > T::one() - s {
        T::one()
    } else {
        v
    }
}

/// Smallest PIC of `(S, X)`, zero when `|X| > |S|`. A singleton `X`
/// reveals nothing and gets 1.
pub fn delta_coefficient<T: Real>(j_sx: &JointPmf<T>) -> Result<T> {
    let (s, x) = (j_sx.m(), j_sx.n());
    if x == 1 {
        return Ok(T::one());
    }
    if x > s {
        return Ok(T::zero());
    }
    let dec = decompose(j_sx, T::lit(DEFAULT_TOL))?;
    Ok(dec.lambdas.last().copied().unwrap_or(T::one()))
}

/// `delta^n` for `n` i.i.d. copies.
pub fn delta_tensor<T: Real>(delta: T, n: usize) -> T {
    delta.powi(n as i32)
}

/// Bounds on the funnel at one `t`.
#[derive(Debug, Clone, Serialize)]
pub struct RegionPoint<T> {
    /// Disclosure level `I(X; Y) >= t`.
    pub t: T,
    /// `max(t - H(X | S), 0)`.
    pub lower: T,
    /// `t I(X; S) / H(X)`.
    pub upper: T,
    /// Achieved leakage of the best channel found, if requested.
    pub estimate: Option<T>,
}

/// Lower and upper envelopes of the minimum leakage for each `t`.
pub fn funnel_region_bounds<T: Real>(j_sx: &JointPmf<T>, t_grid: &[T], base: LogBase) -> Result<Vec<RegionPoint<T>>> {
    let hx = entropy(j_sx.py(), base);
    let hx_s = conditional_entropy_x_given_y(&j_sx.transpose(), base);
    let ixs = mutual_information(j_sx, base);
    let slack = T::lit(1e-12);
    t_grid
        .iter()
        .map(|&t| {
            if t < T::zero() || t > hx + slack {
                return Err(Error::TOutOfRange {
                    t: t.as_f64(),
                    max: hx.as_f64(),
                });
            }
            let t = t.min(hx);
            let upper = if hx > T::zero() { t * ixs / hx } else { T::zero() };
            Ok(RegionPoint {
                t,
                lower: (t - hx_s).max(T::zero()),
                upper,
                estimate: None,
            })
        })
        .collect()
}

/// `points` evenly spaced values in `[0, H(X)]`.
pub fn default_t_grid<T: Real>(j_sx: &JointPmf<T>, base: LogBase, points: usize) -> Vec<T> {
    let hx = entropy(j_sx.py(), base);
    match points {
        0 => Vec::new(),
        1 => vec![hx],
        _ => (0..points)
            .map(|i| hx * T::lit(i as f64 / (points - 1) as f64))
            .collect(),
    }
}

/// Zero-mean, unit-norm functions of `X` spanning the directions of `Q`
/// whose squared singular value is at most `tol`, with those values.
pub fn null_functions<T: Real>(j_sx: &JointPmf<T>, tol: T) -> Result<Vec<(Vec<T>, T)>> {
    let (s, v) = right_singular_basis(&q_matrix(j_sx))?;
    let px = j_sx.py();
    Ok((1..j_sx.n())
        .filter(|&k| s[k] * s[k] <= tol)
        .map(|k| {
            let f: Vec<T> = v.col(k).iter().zip(px).map(|(&u, &p)| u / p.sqrt()).collect();
            (f, s[k] * s[k])
        })
        .collect())
}

fn normalize_function<T: Real>(px: &[T], f: &[T]) -> Result<Vec<T>> {
    let mean: T = px.iter().zip(f).map(|(&p, &v)| p * v).sum();
    let c: Vec<T> = f.iter().map(|&v| v - mean).collect();
    let norm = px.iter().zip(&c).map(|(&p, &v)| p * v * v).sum::<T>().sqrt();
    if norm < T::lit(1e-12) {
        return Err(Error::DegenerateFunction);
    }
    Ok(c.iter().map(|&v| v / norm).collect())
}

/// `||E[f(X) | S]||^2`.
fn leakage_energy<T: Real>(j_sx: &JointPmf<T>, f: &[T]) -> T {
    let e = j_sx.cond_expect_y(f);
    e.iter().zip(j_sx.px()).map(|(&v, &p)| p * v * v).sum()
}

/// How close the chosen direction is to the null space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Certificate {
    /// Residual singular value below [`CERTIFIED_SIGMA`].
    Certified,
    /// Residual between [`CERTIFIED_SIGMA`] and [`BORDERLINE_SIGMA`] or above.
    Borderline,
}

/// A binary release `Y` with `I(S; Y) = 0` and `I(X; Y) = t0`.
#[derive(Debug, Clone, Serialize)]
pub struct PerfectPrivacyMap<T> {
    /// `P_{Y|X}` with outputs `{0, 1}`.
    pub channel: Matrix<T>,
    /// Zero-mean, unit-norm `f` with `E[f(X) | S] = 0`.
    pub f: Vec<T>,
    /// `1 / (2 max |f|)`.
    pub epsilon: T,
    /// Disclosed information in bits.
    pub t0: T,
    /// `||E[f(X) | S]||^2` on recheck.
    pub residual: T,
    /// Certification level.
    pub certificate: Certificate,
}

fn map_from_function<T: Real>(j_sx: &JointPmf<T>, f: &[T], tol: T) -> Result<PerfectPrivacyMap<T>> {
    let px = j_sx.py();
    let f = normalize_function(px, f)?;
    let residual = leakage_energy(j_sx, &f);
    if residual > T::lit(10.0) * tol {
        return Err(Error::NumericalFailure(format!(
            "null direction leaks {residual}, above 10 * tol = {}",
            T::lit(10.0) * tol
        )));
    }
    let max = f.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let epsilon = T::one() / (T::lit(2.0) * max);
    let half = T::lit(0.5);
    let p0: Vec<T> = f.iter().map(|&v| snap(half + epsilon * v)).collect();
    let channel = Matrix::from_fn(f.len(), 2, |x, y| if y == 0 { p0[x] } else { T::one() - p0[x] });
    let t0 = T::one()
        - px.iter()
            .zip(&p0)
            .map(|(&p, &q)| p * binary_entropy(q, LogBase::Two))
            .sum::<T>();
    let certificate = if residual.sqrt() < T::lit(CERTIFIED_SIGMA) {
        Certificate::Certified
    } else {
        Certificate::Borderline
    };
    Ok(PerfectPrivacyMap {
        channel,
        f,
        epsilon,
        t0,
        residual,
        certificate,
    })
}

/// Builds a perfectly private release when `delta <= tol`; `None` otherwise.
pub fn perfect_privacy_map<T: Real>(j_sx: &JointPmf<T>, tol: T) -> Result<Option<PerfectPrivacyMap<T>>> {
    let delta = delta_coefficient(j_sx)?;
    if delta > tol {
        return Ok(None);
    }
    let nulls = null_functions(j_sx, tol.max(delta))?;
    let (f, _) = nulls
        .into_iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or_else(|| Error::NumericalFailure("no null direction despite delta <= tol".into()))?;
    map_from_function(j_sx, &f, tol).map(Some)
}

/// Lower bound on the largest `t` with zero leakage.
#[derive(Debug, Clone, Serialize)]
pub struct TStarLower<T> {
    /// Bound in bits.
    pub value: T,
    /// Maximizing null-space function.
    pub f: Option<Vec<T>>,
    /// Dimension of the null space searched.
    pub null_dimension: usize,
}

fn tstar_objective<T: Real>(px: &[T], f: &[T]) -> T {
    let max = f.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if max <= T::zero() {
        return T::zero();
    }
    let half = T::lit(0.5);
    T::one()
        - px.iter()
            .zip(f)
            .map(|(&p, &v)| p * binary_entropy(snap(half + v / (T::lit(2.0) * max)), LogBase::Two))
            .sum::<T>()
}

/// `1 - min_f E[h_b(1/2 + f / (2 ||f||_inf))]` over the null space, by
/// multi-start local search; 0 when `delta > tol`.
pub fn t_star_lower<T: Real>(j_sx: &JointPmf<T>, tol: T, restarts: usize, seed: u64) -> Result<TStarLower<T>> {
    let delta = delta_coefficient(j_sx)?;
    if delta > tol {
        return Ok(TStarLower {
            value: T::zero(),
            f: None,
            null_dimension: 0,
        });
    }
    let basis: Vec<Vec<T>> = null_functions(j_sx, tol.max(delta))?
        .into_iter()
        .map(|(f, _)| f)
        .collect();
    let r = basis.len();
    if r == 0 {
        return Err(Error::NumericalFailure("no null direction despite delta <= tol".into()));
    }
    let px = j_sx.py();
    let combine = |w: &[T]| -> Vec<T> {
        (0..px.len())
            .map(|x| w.iter().zip(&basis).map(|(&c, b)| c * b[x]).sum())
            .collect()
    };
    let unit = |w: &mut Vec<T>| {
        let n = w.iter().map(|&v| v * v).sum::<T>().sqrt();
        if n > T::zero() {
            w.iter_mut().for_each(|v| *v = *v / n);
        }
    };
    let mut starts: Vec<Vec<T>> = (0..r)
        .map(|k| (0..r).map(|i| if i == k { T::one() } else { T::zero() }).collect())
        .collect();
    if r > 1 {
        let mut rng = rng_for(seed, 0);
        for _ in 0..restarts {
            let mut w: Vec<T> = (0..r).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
            unit(&mut w);
            starts.push(w);
        }
    }
    let results: Vec<(T, Vec<T>)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(k, mut w)| {
            let mut best = tstar_objective(px, &combine(&w));
            if r > 1 {
                let mut rng = rng_for(seed, 1 + k as u64);
                let mut step = 0.5;
                while step > 1e-9 {
                    let mut cand: Vec<T> = w.iter().map(|&v| v + T::lit(step * rng.gen_range(-1.0..1.0))).collect();
                    unit(&mut cand);
                    let val = tstar_objective(px, &combine(&cand));
                    if val > best {
                        best = val;
                        w = cand;
                    } else {
                        step *= 0.9;
                    }
                }
            }
            (best, w)
        })
        .collect();
    let (value, w) = results.into_iter().fold(
        (T::neg_infinity(), Vec::new()),
        |acc, x| if x.0 > acc.0 { x } else { acc },
    );
    Ok(TStarLower {
        value: value.max(T::zero()),
        f: Some(combine(&w)),
        null_dimension: r,
    })
}

/// Numerical upper estimate of `inf D(q_S || p_S) / D(q_X || p_X)`.
#[derive(Debug, Clone, Serialize)]
pub struct VstarEstimate<T> {
    /// Smallest ratio found.
    pub value: T,
    /// Distribution attaining it.
    pub q_x: Vec<T>,
    /// Starting points explored.
    pub starts: usize,
}

fn kl_nats<T: Real>(q: &[T], p: &[T]) -> T {
    q.iter()
        .zip(p)
        .map(|(&a, &b)| if a > T::zero() { a * (a / b).ln() - a + b } else { b })
        .sum::<T>()
        .max(T::zero())
}

fn project_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut css = T::zero();
    let mut theta = T::zero();
    for (i, &ui) in u.iter().enumerate() {
        css = css + ui;
        let t = (css - T::one()) / T::lit((i + 1) as f64);
        if ui - t > T::zero() {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(T::zero())).collect()
}

/// Multi-start projected descent on the divergence ratio; every evaluated
/// point is a valid ratio, so the result bounds the infimum from above.
pub fn vstar_estimate<T: Real>(j_sx: &JointPmf<T>, iters: usize, seed: u64) -> Result<VstarEstimate<T>> {
    let (ns, nx) = (j_sx.m(), j_sx.n());
    if nx < 2 {
        return Err(Error::DomainError("|X| must be at least 2".into()));
    }
    let px = j_sx.py().to_vec();
    let ps = j_sx.px().to_vec();
    // P(s | x) as an |S| x |X| matrix.
    let back = Matrix::from_fn(ns, nx, |s, x| j_sx.get(s, x) / px[x]);
    let floor = T::lit(VSTAR_TRUST_FLOOR);
    let ratio = |q: &[T]| -> Option<T> {
        let den = kl_nats(q, &px);
        if den <= T::zero() {
            return None;
        }
        Some(kl_nats(&back.mul_vec(q), &ps) / den)
    };
    let enforce_floor = |q: Vec<T>| -> Vec<T> {
        let dist: T = q.iter().zip(&px).map(|(&a, &b)| (a - b).abs()).sum();
        if dist >= floor || dist <= T::zero() {
            return q;
        }
        let s = floor / dist;
        q.iter().zip(&px).map(|(&a, &b)| b + (a - b) * s).collect()
    };
    let mut starts: Vec<Vec<T>> = Vec::new();
    let (_, v) = right_singular_basis(&q_matrix(j_sx))?;
    for k in 1..nx {
        let f: Vec<T> = v.col(k).iter().zip(&px).map(|(&u, &p)| u / p.sqrt()).collect();
        let max = f.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
        for &r in &[1e-3, 1e-1] {
            let e = T::lit(r) / max;
            starts.push(px.iter().zip(&f).map(|(&p, &fx)| p * (T::one() + e * fx)).collect());
        }
    }
    let mut rng = rng_for(seed, 0);
    for _ in 0..8 + nx {
        let w: Vec<f64> = (0..nx).map(|_| -rng.gen_range(f64::MIN_POSITIVE..1.0).ln()).collect();
        let tot: f64 = w.iter().sum();
        let r = 10f64.powf(rng.gen_range(-3.0..0.0));
        starts.push(
            px.iter()
                .zip(&w)
                .map(|(&p, &wx)| p * T::lit(1.0 - r) + T::lit(r * wx / tot))
                .collect(),
        );
    }
    let n_starts = starts.len();
    let results: Vec<(T, Vec<T>)> = starts
        .into_par_iter()
        .filter_map(|q0| {
            let mut q = enforce_floor(q0);
            let mut val = ratio(&q)?;
            let mut eta = T::lit(1e-3);
            let tiny = T::lit(1e-300);
            for _ in 0..iters {
                let qs = back.mul_vec(&q);
                let den = kl_nats(&q, &px);
                let gd: Vec<T> = q.iter().zip(&px).map(|(&a, &b)| (a.max(tiny) / b).ln()).collect();
                let gn: Vec<T> = (0..nx)
                    .map(|x| (0..ns).map(|s| back[(s, x)] * (qs[s].max(tiny) / ps[s]).ln()).sum())
                    .collect();
                let grad: Vec<T> = gn.iter().zip(&gd).map(|(&a, &b)| (a - val * b) / den).collect();
                let gnorm = grad.iter().map(|&g| g * g).sum::<T>().sqrt();
                if gnorm.is_nan() || gnorm <= T::zero() || !gnorm.is_finite() {
                    break;
                }
                let cand = enforce_floor(project_simplex(
                    &q.iter()
                        .zip(&grad)
                        .map(|(&a, &g)| a - eta * g / gnorm)
                        .collect::<Vec<T>>(),
                ));
                match ratio(&cand) {
                    Some(c) if c < val => {
                        q = cand;
                        val = c;
                        eta = eta * T::lit(1.5);
                    }
                    _ => {
                        eta = eta * T::lit(0.5);
                        if eta < T::lit(1e-16) {
                            break;
                        }
                    }
                }
            }
            Some((val, q))
        })
        .collect();
    let (value, q_x) = results
        .into_iter()
        .fold((T::infinity(), px.clone()), |acc, x| if x.0 < acc.0 { x } else { acc });
    Ok(VstarEstimate {
        value,
        q_x,
        starts: n_starts,
    })
}

/// Where the funnel channel came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FunnelSource {
    /// `Y = X` with probability `t / H(X)`, erased otherwise.
    Erasure,
    /// Erasure mixture of the perfectly private release.
    PerfectPrivacy,
    /// Penalized mirror descent.
    Search,
}

/// A channel `P_{Y|X}` meeting `I(X; Y) >= t`.
#[derive(Debug, Clone, Serialize)]
pub struct FunnelEstimate<T> {
    /// Disclosure constraint.
    pub t: T,
    /// `I(S; Y)`.
    pub leakage: T,
    /// `I(X; Y)`.
    pub utility: T,
    /// `|X| x (|X| + 1)` channel.
    pub channel: Matrix<T>,
    /// Construction used.
    pub source: FunnelSource,
}

/// `(I(S; Y), I(X; Y))` in nats.
fn infos<T: Real>(j_sx: &JointPmf<T>, w: &Matrix<T>) -> (T, T) {
    let (ns, nx, ny) = (j_sx.m(), j_sx.n(), w.cols());
    let sy = Matrix::from_fn(ns, ny, |s, y| (0..nx).map(|x| j_sx.get(s, x) * w[(x, y)]).sum::<T>());
    let xy = Matrix::from_fn(nx, ny, |x, y| j_sx.py()[x] * w[(x, y)]);
    (
        mutual_information_table(&sy, LogBase::E),
        mutual_information_table(&xy, LogBase::E),
    )
}

fn erasure_mix<T: Real>(w: &Matrix<T>, keep: T) -> Matrix<T> {
    let e = w.cols() - 1;
    Matrix::from_fn(w.rows(), w.cols(), |x, y| {
        keep * w[(x, y)] + if y == e { T::one() - keep } else { T::zero() }
    })
}

fn identity_ext<T: Real>(nx: usize) -> Matrix<T> {
    Matrix::from_fn(nx, nx + 1, |x, y| if x == y { T::one() } else { T::zero() })
}

/// Mixes `w` toward the identity until `I(X; Y) >= t`.
fn repair<T: Real>(j_sx: &JointPmf<T>, w: Matrix<T>, t: T) -> Matrix<T> {
    if infos(j_sx, &w).1 >= t {
        return w;
    }
    let id = identity_ext::<T>(j_sx.n());
    let mix = |th: T| Matrix::from_fn(w.rows(), w.cols(), |x, y| (T::one() - th) * w[(x, y)] + th * id[(x, y)]);
    let (mut lo, mut hi) = (T::zero(), T::one());
    for _ in 0..60 {
        let mid = (lo + hi) / T::lit(2.0);
        if infos(j_sx, &mix(mid)).1 >= t {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    mix(hi)
}

fn penalty_search<T: Real>(j_sx: &JointPmf<T>, t: T, rng: &mut ChaCha8Rng) -> Matrix<T> {
    let (ns, nx) = (j_sx.m(), j_sx.n());
    let ny = nx + 1;
    let px = j_sx.py();
    let tiny = T::lit(1e-300);
    let mut w = Matrix::from_fn(nx, ny, |_, _| T::lit(-rng.gen_range(f64::MIN_POSITIVE..1.0).ln()));
    for x in 0..nx {
        let tot: T = w.row(x).iter().copied().sum();
        for y in 0..ny {
            w[(x, y)] = w[(x, y)] / tot;
        }
    }
    let objective = |w: &Matrix<T>, mu: T| {
        let (isy, ixy) = infos(j_sx, w);
        let gap = (t - ixy).max(T::zero());
        isy + mu * gap * gap
    };
    let mut mu = T::one();
    for _ in 0..PENALTY_ROUNDS {
        let mut eta = T::one();
        let mut cur = objective(&w, mu);
        for _ in 0..STEPS_PER_ROUND {
            let sy = Matrix::from_fn(ns, ny, |s, y| (0..nx).map(|x| j_sx.get(s, x) * w[(x, y)]).sum::<T>());
            let py: Vec<T> = (0..ny).map(|y| (0..nx).map(|x| px[x] * w[(x, y)]).sum()).collect();
            let (_, ixy) = infos(j_sx, &w);
            let gap = (t - ixy).max(T::zero());
            let grad = Matrix::from_fn(nx, ny, |x, y| {
                let d_sy: T = (0..ns)
                    .map(|s| j_sx.get(s, x) * (sy[(s, y)].max(tiny) / py[y].max(tiny)).ln())
                    .sum();
                let d_xy = px[x] * (px[x] * w[(x, y)].max(tiny) / py[y].max(tiny)).ln();
                (d_sy - T::lit(2.0) * mu * gap * d_xy) / px[x]
            });
            let mut cand = Matrix::zeros(nx, ny);
            for x in 0..nx {
                let lo = (0..ny).map(|y| grad[(x, y)]).fold(T::infinity(), T::min);
                let mut tot = T::zero();
                for y in 0..ny {
                    let v = w[(x, y)] * (-eta * (grad[(x, y)] - lo)).exp();
                    cand[(x, y)] = v;
                    tot = tot + v;
                }
                for y in 0..ny {
                    cand[(x, y)] = cand[(x, y)] / tot;
                }
            }
            let val = objective(&cand, mu);
            if val <= cur {
                w = cand;
                cur = val;
                eta = eta * T::lit(1.2);
            } else {
                eta = eta * T::lit(0.5);
                if eta < T::lit(1e-12) {
                    break;
                }
            }
        }
        mu = mu * T::lit(PENALTY_GROWTH);
    }
    w
}

/// Best channel found for `min I(S; Y)` subject to `I(X; Y) >= t` (in
/// `base` units) over `|Y| = |X| + 1`. Every candidate is feasible, so
/// the leakage bounds the funnel from above.
pub fn funnel_estimate<T: Real>(
    j_sx: &JointPmf<T>,
    t: T,
    restarts: usize,
    seed: u64,
    base: LogBase,
) -> Result<FunnelEstimate<T>> {
    let hx = entropy(j_sx.py(), base);
    if t < T::zero() || t > hx + T::lit(1e-12) {
        return Err(Error::TOutOfRange {
            t: t.as_f64(),
            max: hx.as_f64(),
        });
    }
    let t = t.min(hx);
    let nx = j_sx.n();
    let scale = base.ln::<T>();
    let t_nats = t * scale;
    let mut cands: Vec<(Matrix<T>, FunnelSource)> = Vec::new();
    let keep = if hx > T::zero() { t / hx } else { T::zero() };
    cands.push((erasure_mix(&identity_ext(nx), keep), FunnelSource::Erasure));
    if let Some(map) = perfect_privacy_map(j_sx, T::lit(1e-12))? {
        if map.t0 * T::lit(std::f64::consts::LN_2) >= t_nats && map.t0 > T::zero() {
            let padded = Matrix::from_fn(nx, nx + 1, |x, y| if y < 2 { map.channel[(x, y)] } else { T::zero() });
            let keep = (t_nats / (map.t0 * T::lit(std::f64::consts::LN_2))).min(T::one());
            cands.push((erasure_mix(&padded, keep), FunnelSource::PerfectPrivacy));
        }
    }
    let searched: Vec<Matrix<T>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(seed, r as u64);
            repair(j_sx, penalty_search(j_sx, t_nats, &mut rng), t_nats)
        })
        .collect();
    cands.extend(searched.into_iter().map(|w| (w, FunnelSource::Search)));
    let mut best: Option<FunnelEstimate<T>> = None;
    for (w, source) in cands {
        let (isy, ixy) = infos(j_sx, &w);
        // Erasure mixtures hit t up to rounding.
        if ixy < t_nats - T::lit(1e-12) * (T::one() + t_nats) {
            continue;
        }
        let est = FunnelEstimate {
            t,
            leakage: isy / scale,
            utility: ixy / scale,
            channel: w,
            source,
        };
        if best.as_ref().map(|b| est.leakage < b.leakage).unwrap_or(true) {
            best = Some(est);
        }
    }
    best.ok_or_else(|| Error::NumericalFailure("no feasible funnel channel".into()))
}

/// Tunables of [`analyze`].
#[derive(Debug, Clone)]
pub struct PrivacyOptions<T> {
    /// Threshold on `delta` for perfect privacy.
    pub tol: T,
    /// Unit of every information quantity.
    pub base: LogBase,
    /// Explicit `t` values; defaults to [`GRID_POINTS`] evenly spaced.
    pub t_grid: Option<Vec<T>>,
    /// Run [`funnel_estimate`] at every grid point.
    pub estimate_curve: bool,
    /// Restarts per estimate.
    pub restarts: usize,
    /// Iterations of the `v*` search.
    pub vstar_iters: usize,
    /// Master seed.
    pub seed: u64,
}

impl<T: Real> Default for PrivacyOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-9),
            base: LogBase::Two,
            t_grid: None,
            estimate_curve: true,
            restarts: FUNNEL_RESTARTS,
            vstar_iters: 500,
            seed: 0x5EED,
        }
    }
}

/// Full privacy report for one `p_{S,X}`.
#[derive(Debug, Clone, Serialize)]
pub struct PrivacyAnalysis<T> {
    /// Smallest PIC of `(S, X)`.
    pub delta: T,
    /// Upper estimate of the divergence-ratio infimum.
    pub vstar: VstarEstimate<T>,
    /// `delta <= tol`.
    pub perfect_privacy_feasible: bool,
    /// Constructed zero-leakage release.
    pub perfect_privacy_map: Option<PerfectPrivacyMap<T>>,
    /// Lower bound on the zero-leakage disclosure, bits.
    pub t_star_lower: T,
    /// `H(X)`.
    pub entropy_x: T,
    /// `I(S; X)`.
    pub mutual_information_sx: T,
    /// Envelopes and estimates over the grid.
    pub region: Vec<RegionPoint<T>>,
}

/// Runs every privacy routine.
pub fn analyze<T: Real>(j_sx: &JointPmf<T>, opts: &PrivacyOptions<T>) -> Result<PrivacyAnalysis<T>> {
    let delta = delta_coefficient(j_sx)?;
    let grid = opts
        .t_grid
        .clone()
        .unwrap_or_else(|| default_t_grid(j_sx, opts.base, GRID_POINTS));
    let mut region = funnel_region_bounds(j_sx, &grid, opts.base)?;
    if opts.estimate_curve {
        for (k, pt) in region.iter_mut().enumerate() {
            let seed = opts.seed.wrapping_add(k as u64);
            pt.estimate = Some(funnel_estimate(j_sx, pt.t, opts.restarts, seed, opts.base)?.leakage);
        }
    }
    let map = perfect_privacy_map(j_sx, opts.tol)?;
    Ok(PrivacyAnalysis {
        delta,
        vstar: vstar_estimate(j_sx, opts.vstar_iters, opts.seed)?,
        perfect_privacy_feasible: delta <= opts.tol,
        t_star_lower: t_star_lower(j_sx, opts.tol, opts.restarts, opts.seed)?.value,
        perfect_privacy_map: map,
        entropy_x: entropy(j_sx.py(), opts.base),
        mutual_information_sx: mutual_information(j_sx, opts.base),
        region,
    })
}

/// Region as CSV with columns `t,lower,upper,estimate`.
pub fn curves_csv<T: Real>(region: &[RegionPoint<T>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "lower", "upper", "estimate"])?;
    for p in region {
        let est = p.estimate.map(|v| v.as_f64().to_string()).unwrap_or_default();
        w.write_record([
            p.t.as_f64().to_string(),
            p.lower.as_f64().to_string(),
            p.upper.as_f64().to_string(),
            est,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Erasure example: `S` a fair bit, `X = S` or an erasure symbol with
/// probability 1/2 each.
pub fn erasure_fixture<T: Real>() -> JointPmf<T> {
    let q = T::lit(0.25);
    let z = T::zero();
    JointPmf::from_rows(&[vec![q, z, q], vec![z, q, q]]).expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{joint_from_channel, Channel};

    fn release_infos(j: &JointPmf<f64>, ch: &Matrix<f64>) -> (f64, f64) {
        let (a, b) = infos(j, ch);
        (a / std::f64::consts::LN_2, b / std::f64::consts::LN_2)
    }

    #[test]
    fn erasure_fixture_is_perfectly_private() {
        let j = erasure_fixture::<f64>();
        assert_eq!(delta_coefficient(&j).unwrap(), 0.0);
        let map = perfect_privacy_map(&j, 1e-12).unwrap().unwrap();
        assert_eq!(map.certificate, Certificate::Certified);
        assert_eq!(map.t0, 1.0);
        assert!((map.epsilon - 0.5).abs() < 1e-12);
        let (leak, util) = release_infos(&j, &map.channel);
        assert!(leak < 1e-12);
        assert!((util - 1.0).abs() < 1e-12);
        let ts = t_star_lower(&j, 1e-12, 8, 1).unwrap();
        assert_eq!(ts.value, 1.0);
        assert_eq!(ts.null_dimension, 1);
    }

    #[test]
    fn full_rank_square_has_no_map() {
        let j = JointPmf::<f64>::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        assert!((delta_coefficient(&j).unwrap() - 0.36).abs() < 1e-12);
        assert!(perfect_privacy_map(&j, 1e-9).unwrap().is_none());
        assert_eq!(t_star_lower(&j, 1e-9, 4, 1).unwrap().value, 0.0);
        assert_eq!(delta_tensor(0.36, 2), 0.36 * 0.36);
    }

    #[test]
    fn wide_joint_has_map() {
        let j = JointPmf::<f64>::from_rows(&[vec![0.1, 0.2, 0.15], vec![0.25, 0.05, 0.25]]).unwrap();
        assert_eq!(delta_coefficient(&j).unwrap(), 0.0);
        let map = perfect_privacy_map(&j, 1e-9).unwrap().unwrap();
        let (leak, util) = release_infos(&j, &map.channel);
        assert!(leak < 1e-9);
        assert!((util - map.t0).abs() < 1e-9);
        let ts = t_star_lower(&j, 1e-9, 8, 3).unwrap();
        assert!(ts.value >= map.t0 - 1e-12);
    }

    #[test]
    fn region_bounds_identity_and_independent() {
        let id = JointPmf::<f64>::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let r = funnel_region_bounds(&id, &[0.0, 0.5, 1.0], LogBase::Two).unwrap();
        for p in &r {
            assert!((p.lower - p.t).abs() < 1e-12 && (p.upper - p.t).abs() < 1e-12);
        }
        let ind = JointPmf::<f64>::independent(&[0.5, 0.5], &[0.3, 0.7]).unwrap();
        let r = funnel_region_bounds(&ind, &[0.5], LogBase::Two).unwrap();
        assert!(r[0].lower.abs() < 1e-12 && r[0].upper.abs() < 1e-12);
        assert!(matches!(
            funnel_region_bounds(&ind, &[2.0], LogBase::Two),
            Err(Error::TOutOfRange { .. })
        ));
    }

    #[test]
    fn vstar_examples() {
        let id = JointPmf::<f64>::from_rows(&[vec![0.3, 0.0], vec![0.0, 0.7]]).unwrap();
        let v = vstar_estimate(&id, 200, 1).unwrap();
        assert!((v.value - 1.0).abs() < 1e-9, "{}", v.value);
        let ind = JointPmf::<f64>::independent(&[0.5, 0.5], &[0.3, 0.7]).unwrap();
        assert!(vstar_estimate(&ind, 200, 1).unwrap().value < 1e-9);
        let er = erasure_fixture::<f64>();
        assert!(vstar_estimate(&er, 200, 1).unwrap().value < 1e-6);
        let bsc = joint_from_channel(&[0.5, 0.5], &Channel::<f64>::bsc(0.2).unwrap()).unwrap();
        let v = vstar_estimate(&bsc, 500, 2).unwrap();
        assert!(v.value <= 0.36 + 1e-4, "{}", v.value);
        let again = vstar_estimate(&bsc, 500, 2).unwrap();
        assert_eq!(v.value, again.value);
    }

    #[test]
    fn funnel_estimates_respect_region() {
        let j = JointPmf::<f64>::from_rows(&[vec![0.3, 0.1, 0.1], vec![0.05, 0.15, 0.3]]).unwrap();
        let grid = default_t_grid(&j, LogBase::Two, 5);
        let region = funnel_region_bounds(&j, &grid, LogBase::Two).unwrap();
        for p in &region {
            let e = funnel_estimate(&j, p.t, 4, 9, LogBase::Two).unwrap();
            assert!(e.utility >= p.t - 1e-9);
            assert!(e.leakage >= p.lower - 1e-9);
            assert!(e.leakage <= p.upper + 1e-9);
        }
    }

    #[test]
    fn funnel_on_erasure_uses_private_release() {
        let j = erasure_fixture::<f64>();
        let e = funnel_estimate(&j, 0.8, 2, 1, LogBase::Two).unwrap();
        assert!(e.leakage < 1e-6);
        assert_eq!(e.source, FunnelSource::PerfectPrivacy);
    }

    #[test]
    fn funnel_deterministic_mapping() {
        // X = S gives estimate = t.
        let j = JointPmf::<f64>::from_rows(&[vec![0.4, 0.0], vec![0.0, 0.6]]).unwrap();
        let e = funnel_estimate(&j, 0.5, 4, 2, LogBase::Two).unwrap();
        assert!((e.leakage - 0.5).abs() < 1e-9);
    }

    #[test]
    fn analysis_and_csv() {
        let j = erasure_fixture::<f64>();
        let opts = PrivacyOptions {
            t_grid: Some(vec![0.0, 0.5, 1.0, 1.5]),
            restarts: 2,
            ..Default::default()
        };
        let a = analyze(&j, &opts).unwrap();
        assert!(a.perfect_privacy_feasible);
        assert_eq!(a.t_star_lower, 1.0);
        let csv = curves_csv(&a.region).unwrap();
        assert!(csv.starts_with("t,lower,upper,estimate\n"));
        assert_eq!(csv.lines().count(), 5);
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains("\"delta\":0.0"));
    }
}
