//! Brute-force verifiers. Nothing here calls into `pic`, `bounds`,
//! `boolean` or `linalg`; only the distribution type is shared, so a bug in
//! the main numerical paths cannot hide behind the same bug here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dist::JointPmf;
use crate::error::{Error, Result};
use crate::scalar::{LogBase, Real};

/// Master seed of the shared random-instance corpus.
pub const MASTER_SEED: u64 = 0x5EED;
/// Largest table `pe_exhaustive` will scan.
pub const PE_CAP: usize = 1_000_000;
/// Largest input alphabet `one_bit_exhaustive` will enumerate.
pub const ONE_BIT_MAX_INPUTS: usize = 24;

const STARTS: usize = 4;
const RESIDUAL_TOL: f64 = 1e-11;

/// How an oracle value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleMethod {
    /// Scan of every cell.
    ExhaustiveGrid,
    /// Alternating conditional expectations.
    AlternatingCE,
    /// Alternating exact linear programs.
    AlternatingLP,
    /// Enumeration of every function.
    ExhaustiveFunctions,
    /// Interval bisection.
    Bisection,
}

/// Value with provenance and work done.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult<T> {
    /// Computed value.
    pub value: T,
    /// Method.
    pub method: OracleMethod,
    /// Basic evaluations performed; always positive.
    pub evaluations: u64,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct Tables<T> {
    p: Vec<Vec<T>>,
    px: Vec<T>,
    py: Vec<T>,
}

fn tables<T: Real>(j: &JointPmf<T>) -> Tables<T> {
    let (m, n) = (j.m(), j.n());
    let p: Vec<Vec<T>> = (0..m).map(|i| (0..n).map(|k| j.get(i, k)).collect()).collect();
    let px = p.iter().map(|r| r.iter().copied().sum()).collect();
    let py = (0..n).map(|k| p.iter().map(|r| r[k]).sum()).collect();
    Tables { p, px, py }
}

impl<T: Real> Tables<T> {
    /// `E[f(X) | Y = y]` for every `y`.
    fn down(&self, f: &[T]) -> Vec<T> {
        (0..self.py.len())
            .map(|k| self.p.iter().zip(f).map(|(r, &v)| r[k] * v).sum::<T>() / self.py[k])
            .collect()
    }

    /// `E[g(Y) | X = x]` for every `x`.
    fn up(&self, g: &[T]) -> Vec<T> {
        self.p
            .iter()
            .zip(&self.px)
            .map(|(r, &w)| r.iter().zip(g).map(|(&a, &v)| a * v).sum::<T>() / w)
            .collect()
    }
}

fn inner<T: Real>(w: &[T], a: &[T], b: &[T]) -> T {
    w.iter().zip(a).zip(b).map(|((&p, &x), &y)| p * x * y).sum()
}

/// Removes the components along `basis` (orthonormal under `w`) and the
/// mean, then scales to unit norm. `None` if nothing is left.
fn project_out<T: Real>(w: &[T], f: &[T], basis: &[Vec<T>]) -> Option<Vec<T>> {
    let mut v = f.to_vec();
    for _ in 0..2 {
        let mean: T = w.iter().zip(&v).map(|(&p, &x)| p * x).sum();
        v.iter_mut().for_each(|x| *x = *x - mean);
        for b in basis {
            let c = inner(w, &v, b);
            v.iter_mut().zip(b).for_each(|(x, &bb)| *x = *x - c * bb);
        }
    }
    let n = inner(w, &v, &v).sqrt();
    if n.is_nan() || n <= T::lit(1e-13) {
        return None;
    }
    Some(v.iter().map(|&x| x / n).collect())
}

fn random_vec<T: Real>(len: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..len).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect()
}

/// Maximal correlation by power iteration on `f -> E[E[f(X)|Y] | X]`
/// restricted to zero-mean `f`, started from several random points.
pub fn maxcorr_by_ace<T: Real>(j: &JointPmf<T>, iters: usize, seed: u64) -> Result<OracleResult<T>> {
    let t = tables(j);
    if t.px.len() < 2 || t.py.len() < 2 {
        return Ok(OracleResult {
            value: T::zero(),
            method: OracleMethod::AlternatingCE,
            evaluations: 1,
        });
    }
    let mut best = T::zero();
    let mut evaluations = 0u64;
    for s in 0..STARTS {
        let mut rng = rng_for(seed, s as u64);
        let Some(mut f) = project_out(&t.px, &random_vec(t.px.len(), &mut rng), &[]) else {
            continue;
        };
        let mut converged = false;
        let mut rho = T::zero();
        for _ in 0..iters {
            evaluations += 1;
            let tf = t.up(&t.down(&f));
            rho = inner(&t.px, &f, &tf);
            let resid: T =
                t.px.iter()
                    .zip(&tf)
                    .zip(&f)
                    .map(|((&p, &a), &b)| p * (a - rho * b) * (a - rho * b))
                    .sum();
            if resid.sqrt() <= T::lit(RESIDUAL_TOL) {
                converged = true;
                break;
            }
            match project_out(&t.px, &tf, &[]) {
                Some(next) => f = next,
                None => {
                    rho = T::zero();
                    converged = true;
                    break;
                }
            }
        }
        if !converged {
            return Err(Error::NonConvergence(iters));
        }
        best = best.max(rho);
    }
    Ok(OracleResult {
        value: best.max(T::zero()).sqrt(),
        method: OracleMethod::AlternatingCE,
        evaluations: evaluations.max(1),
    })
}

/// Error of the best deterministic guess of `X` from `Y`, one column at a
/// time.
pub fn pe_exhaustive<T: Real>(j: &JointPmf<T>) -> Result<OracleResult<T>> {
    let (m, n) = (j.m(), j.n());
    if m * n > PE_CAP {
        return Err(Error::TooLarge {
            count: (m * n) as f64,
            cap: PE_CAP as f64,
        });
    }
    let mut correct = T::zero();
    for k in 0..n {
        let mut best = T::zero();
        for i in 0..m {
            best = best.max(j.get(i, k));
        }
        correct = correct + best;
    }
    Ok(OracleResult {
        value: (T::one() - correct).max(T::zero()),
        method: OracleMethod::ExhaustiveGrid,
        evaluations: (m * n) as u64,
    })
}

/// Maximizes `sum_i c_i x_i` over `x in [0,1]^m` with `sum_i w_i x_i = a`.
fn knapsack<T: Real>(c: &[T], w: &[T], a: T) -> Vec<T> {
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&i, &k| {
        (c[k] / w[k])
            .partial_cmp(&(c[i] / w[i]))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut x = vec![T::zero(); c.len()];
    let mut left = a;
    for i in order {
        if left <= T::zero() {
            break;
        }
        let take = (left / w[i]).min(T::one());
        x[i] = take;
        left = left - take * w[i];
    }
    x
}

/// Largest `x^T P y` found over `x in [0,1]^m`, `y in [0,1]^n` with
/// `E[x(X)] = a` and `E[y(Y)] = b`, by alternating exact maximization from
/// `starts` random points. A lower witness for the true maximum.
pub fn z_bilinear_max<T: Real>(j: &JointPmf<T>, a: T, b: T, starts: usize, seed: u64) -> Result<OracleResult<T>> {
    for v in [a, b] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::InfeasibleMass(v.as_f64()));
        }
    }
    let t = tables(j);
    let n = t.py.len();
    let pt: Vec<Vec<T>> = (0..n).map(|k| t.p.iter().map(|r| r[k]).collect()).collect();
    let z = |x: &[T], y: &[T]| -> T {
        t.p.iter()
            .zip(x)
            .map(|(r, &xi)| xi * r.iter().zip(y).map(|(&a, &b)| a * b).sum::<T>())
            .sum()
    };
    let mut best = T::neg_infinity();
    let mut evaluations = 0u64;
    for s in 0..starts.max(1) {
        let mut rng = rng_for(seed, s as u64);
        let c: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(0.0..1.0))).collect();
        let mut y = knapsack(&c, &t.py, b);
        let mut cur = T::neg_infinity();
        for _ in 0..100 {
            evaluations += 1;
            let py: Vec<T> =
                t.p.iter()
                    .map(|r| r.iter().zip(&y).map(|(&a, &b)| a * b).sum())
                    .collect();
            let x = knapsack(&py, &t.px, a);
            let ptx: Vec<T> = pt
                .iter()
                .map(|r| r.iter().zip(&x).map(|(&a, &b)| a * b).sum())
                .collect();
            y = knapsack(&ptx, &t.py, b);
            let val = z(&x, &y);
            if val <= cur + T::lit(1e-15) {
                cur = cur.max(val);
                break;
            }
            cur = val;
        }
        best = best.max(cur);
    }
    Ok(OracleResult {
        value: best,
        method: OracleMethod::AlternatingLP,
        evaluations,
    })
}

/// `k`-th PIC by direct maximization of `E[f(X) g(Y)]^2` over unit-variance
/// zero-mean pairs orthogonal to the `k - 1` pairs found before, each step
/// an exact line search along the projected gradient.
pub fn variational_pic<T: Real>(j: &JointPmf<T>, k: usize, samples: usize, seed: u64) -> Result<OracleResult<T>> {
    if k == 0 {
        return Err(Error::IndexOutOfRange { index: 0, len: 0 });
    }
    let t = tables(j);
    let (m, n) = (t.px.len(), t.py.len());
    let d = m.min(n) - 1;
    if k > d {
        return Err(Error::IndexOutOfRange { index: k, len: d });
    }
    let iters = 1_000_000;
    let mut fs: Vec<Vec<T>> = Vec::new();
    let mut gs: Vec<Vec<T>> = Vec::new();
    let mut value = T::zero();
    let mut evaluations = 0u64;
    for level in 0..k {
        let mut best: Option<(T, Vec<T>, Vec<T>)> = None;
        for s in 0..samples.max(1) {
            let mut rng = rng_for(seed, (level * 1000 + s) as u64);
            let Some(mut f) = project_out(&t.px, &random_vec(m, &mut rng), &fs) else {
                continue;
            };
            let Some(mut g) = project_out(&t.py, &random_vec(n, &mut rng), &gs) else {
                continue;
            };
            let mut corr = inner(&t.px, &f, &t.up(&g));
            let mut done = false;
            for _ in 0..iters {
                evaluations += 1;
                // The gradient in f is E[g|X]; the best point on the great
                // circle through f and the tangent direction is its projection.
                if let Some(nf) = project_out(&t.px, &t.up(&g), &fs) {
                    f = nf;
                }
                if let Some(ng) = project_out(&t.py, &t.down(&f), &gs) {
                    g = ng;
                }
                let next = inner(&t.px, &f, &t.up(&g));
                if (next.abs() - corr.abs()).abs() <= T::lit(1e-15) * next.abs().max(T::lit(1e-3)) {
                    corr = next;
                    done = true;
                    break;
                }
                corr = next;
            }
            if !done {
                return Err(Error::NonConvergence(iters));
            }
            let lam = corr * corr;
            if best.as_ref().map(|b| lam > b.0).unwrap_or(true) {
                best = Some((lam, f, g));
            }
        }
        let (lam, f, g) = best.ok_or(Error::NonConvergence(0))?;
        value = lam;
        fs.push(f);
        gs.push(g);
    }
    Ok(OracleResult {
        value,
        method: OracleMethod::AlternatingCE,
        evaluations: evaluations.max(1),
    })
}

/// Metric optimized by [`one_bit_exhaustive`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OneBitMetric {
    /// Largest `I(b(X); Y)`.
    MutualInformation,
    /// Smallest MAP error of `b(X)` from `Y`.
    ErrorProbability,
}

/// Exact extremum of `metric` over every non-constant `b: X -> {0, 1}`.
pub fn one_bit_exhaustive<T: Real>(j: &JointPmf<T>, metric: OneBitMetric, base: LogBase) -> Result<OracleResult<T>> {
    let (m, n) = (j.m(), j.n());
    if m > ONE_BIT_MAX_INPUTS {
        return Err(Error::TooLarge {
            count: 2f64.powi(m as i32),
            cap: 2f64.powi(ONE_BIT_MAX_INPUTS as i32),
        });
    }
    if m < 2 {
        return Err(Error::DomainError(
            "need at least two inputs for a non-constant bit".into(),
        ));
    }
    let t = tables(j);
    let xlogx = |v: T| if v > T::zero() { v * v.ln() } else { T::zero() };
    let mut best = match metric {
        OneBitMetric::MutualInformation => T::neg_infinity(),
        OneBitMetric::ErrorProbability => T::infinity(),
    };
    let mut evaluations = 0u64;
    for mask in 1usize..(1usize << m) - 1 {
        evaluations += 1;
        let mut one = vec![T::zero(); n];
        for (x, row) in t.p.iter().enumerate() {
            if mask >> x & 1 == 1 {
                one.iter_mut().zip(row).for_each(|(a, &v)| *a = *a + v);
            }
        }
        let val = match metric {
            OneBitMetric::MutualInformation => {
                let q1: T = one.iter().copied().sum();
                let q0 = T::one() - q1;
                let mut nats = T::zero();
                for (&hit, &col) in one.iter().zip(&t.py) {
                    nats = nats + xlogx(hit) + xlogx((col - hit).max(T::zero())) - xlogx(col);
                }
                nats = nats - xlogx(q1) - xlogx(q0);
                let v = nats.max(T::zero()) / base.ln::<T>();
                best = best.max(v);
                continue;
            }
            OneBitMetric::ErrorProbability => T::one() - (0..n).map(|k| one[k].max(t.py[k] - one[k])).sum::<T>(),
        };
        best = best.min(val.max(T::zero()));
    }
    Ok(OracleResult {
        value: best,
        method: OracleMethod::ExhaustiveFunctions,
        evaluations,
    })
}

/// Smallest `d in [0, 1 - 1/m]` with `h_b(d) + d log(m - 1) >= theta`, by
/// bisection.
pub fn fano_root_bisection<T: Real>(m: usize, theta: T, base: LogBase) -> Result<OracleResult<T>> {
    if m < 2 {
        return Err(Error::DomainError("m must be at least 2".into()));
    }
    let ln = |v: f64| if v > 0.0 { v.ln() } else { 0.0 };
    let scale = match base {
        LogBase::Two => std::f64::consts::LN_2,
        LogBase::E => 1.0,
        LogBase::Ten => std::f64::consts::LN_10,
    };
    let g = |d: f64| (-d * ln(d) - (1.0 - d) * ln(1.0 - d) + d * ((m - 1) as f64).ln()) / scale;
    let theta = theta.as_f64();
    let top = 1.0 - 1.0 / m as f64;
    if theta <= 0.0 {
        return Ok(OracleResult {
            value: T::zero(),
            method: OracleMethod::Bisection,
            evaluations: 1,
        });
    }
    if theta >= g(top) {
        return Ok(OracleResult {
            value: T::lit(top),
            method: OracleMethod::Bisection,
            evaluations: 1,
        });
    }
    let (mut lo, mut hi) = (0.0, top);
    let mut evaluations = 0;
    while hi - lo > 1e-15 && evaluations < 200 {
        evaluations += 1;
        let mid = 0.5 * (lo + hi);
        if g(mid) < theta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(OracleResult {
        value: T::lit(hi),
        method: OracleMethod::Bisection,
        evaluations,
    })
}

/// Random joint with every cell positive, sized `m x n`.
pub fn random_joint(m: usize, n: usize, rng: &mut impl Rng) -> Result<JointPmf<f64>> {
    let cells: Vec<f64> = (0..m * n)
        .map(|_| -rng.gen_range(f64::MIN_POSITIVE..1.0f64).ln() + 1e-3)
        .collect();
    let total: f64 = cells.iter().sum();
    JointPmf::from_rows(
        &cells
            .chunks(n)
            .map(|r| r.iter().map(|v| v / total).collect())
            .collect::<Vec<_>>(),
    )
}
