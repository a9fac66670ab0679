//! Lower bounds on the error of estimating `X`, or a function of `X`, from
//! `Y`, expressed through PICs, maximal correlation, chi-squared or mutual
//! information, plus exhaustive references to test them against.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dist::{entropy, validate_pmf, JointPmf};
use crate::error::{Error, Result};
use crate::scalar::{binary_entropy, LogBase, Real};

/// Cap on the number of maps enumerated by [`pem_exact`].
pub const PEM_EXACT_CAP: f64 = 1e7;
/// Interval width at which the Fano inversion stops.
pub const FANO_BISECTION_TOL: f64 = 1e-12;

/// Which inequality produced an [`ErrorBound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    /// PIC spectrum bound through `f0*`.
    PicFano,
    /// Chi-squared bound for uniform inputs.
    ChiSqUniform,
    /// Maximal correlation bound.
    MaxCorr,
    /// Fano inversion from mutual information.
    FanoMI,
    /// One-bit bound from maximal correlation.
    Witsenhausen,
}

/// A lower bound on an error probability with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorBound<T> {
    /// Bound value, clamped at zero.
    pub value: T,
    /// Producing inequality.
    pub kind: BoundKind,
    /// Intermediate quantities.
    pub params: BTreeMap<String, Value>,
    /// The unclamped expression was non-positive.
    pub vacuous: bool,
}

impl<T: Real> ErrorBound<T> {
    fn new(raw: T, kind: BoundKind) -> Self {
        Self {
            value: raw.max(T::zero()),
            kind,
            params: BTreeMap::new(),
            vacuous: raw <= T::zero(),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

fn num<T: Real>(x: T) -> Value {
    json!(x.as_f64())
}

fn nums<T: Real>(x: &[T]) -> Value {
    json!(x.iter().map(|v| v.as_f64()).collect::<Vec<_>>())
}

fn is_non_increasing<T: Real>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1])
}

/// Stable descending sort; returns values and the original indices.
fn sort_desc<T: Real>(p: &[T]) -> (Vec<T>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[b].partial_cmp(&p[a]).unwrap_or(std::cmp::Ordering::Equal));
    (idx.iter().map(|&i| p[i]).collect(), idx)
}

fn sum_sq<T: Real>(p: &[T]) -> T {
    p.iter().map(|&v| v * v).sum()
}

/// Minimum probability of error of the MAP estimator of `X` from `Y`.
pub fn map_error<T: Real>(j: &JointPmf<T>) -> T {
    let hit: T = (0..j.n())
        .map(|c| (0..j.m()).map(|r| j.get(r, c)).fold(T::zero(), T::max))
        .sum();
    (T::one() - hit).max(T::zero())
}

/// `1 - P_e - max p_X`, clamped at zero.
pub fn advantage<T: Real>(j: &JointPmf<T>) -> T {
    let top = j.px().iter().copied().fold(T::zero(), T::max);
    (T::one() - map_error(j) - top).max(T::zero())
}

/// Pads or truncates `lambdas` to length `d`.
fn pad<T: Real>(lambdas: &[T], d: usize) -> Vec<T> {
    (0..d).map(|i| lambdas.get(i).copied().unwrap_or(T::zero())).collect()
}

/// Piecewise linear function `f0(alpha)` whose maximum enters the PIC bound.
/// `p` and `lambdas` must be sorted non-increasing; `lambdas` is padded with
/// zeros to length `m - 1`.
pub fn f0<T: Real>(alpha: T, p: &[T], lambdas: &[T]) -> Result<T> {
    if !is_non_increasing(p) || !is_non_increasing(lambdas) {
        return Err(Error::UnsortedInput);
    }
    let m = p.len();
    let d = m.saturating_sub(1);
    let lam = pad(lambdas, d);
    // c[i] is c_{i+1}; c_{d+1} = 0.
    let mut c: Vec<T> = lam.iter().map(|&l| (l - alpha).max(T::zero())).collect();
    c.push(T::zero());
    let mut acc = p[0] * (c[0] + alpha) - alpha * sum_sq(p);
    for i in 1..m {
        acc = acc + p[i] * (lam[i - 1] + c[i] - c[i - 1]);
    }
    Ok(acc)
}

/// `min_alpha f0(alpha)` in closed form and the index `k*` it is attained at.
pub fn f0_star<T: Real>(p: &[T], lambdas: &[T]) -> Result<(T, usize)> {
    if !is_non_increasing(p) || !is_non_increasing(lambdas) {
        return Err(Error::UnsortedInput);
    }
    let m = p.len();
    let lam = pad(lambdas, m);
    let nrm = sum_sq(p);
    // At ties p(k) = ||p||^2 either choice gives the same value.
    let slack = T::lit(1e-12);
    let k_star = (1..=m).filter(|&k| p[k - 1] >= nrm - slack).max().unwrap_or(1);
    let lam_at = |i: usize| if i >= m { T::zero() } else { lam[i - 1] };
    let mut v = T::zero();
    for i in 1..=m {
        v = v + if i <= k_star {
            lam_at(i) * p[i - 1]
        } else {
            lam_at(i - 1) * p[i - 1]
        };
    }
    Ok((v - lam_at(k_star) * nrm, k_star))
}

fn golden_min<T: Real>(f: &impl Fn(T) -> T, mut lo: T, mut hi: T) -> (T, T) {
    let r = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= T::epsilon() * (T::one() + hi.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// PIC bound on the MAP error: `1 - min_beta [beta + sqrt(f0* + sum ([p_i - beta]^+)^2)]`
/// over `beta in [0, p(2)]`.
pub fn pic_fano_bound<T: Real>(px: &[T], lambdas: &[T]) -> Result<ErrorBound<T>> {
    validate_pmf(px)?;
    if !is_non_increasing(lambdas) {
        return Err(Error::UnsortedInput);
    }
    let m = px.len();
    if m == 1 {
        return Ok(ErrorBound::new(T::zero(), BoundKind::PicFano));
    }
    let (p, perm) = sort_desc(px);
    let lam: Vec<T> = pad(lambdas, m - 1)
        .into_iter()
        .map(|l| l.max(T::zero()).min(T::one()))
        .collect();
    let (fstar, k_star) = f0_star(&p, &lam)?;
    let u = |beta: T| {
        let tail: T = p.iter().map(|&pi| (pi - beta).max(T::zero())).map(|v| v * v).sum();
        beta + (fstar + tail).max(T::zero()).sqrt()
    };
    let mut knots: Vec<T> = p.iter().copied().filter(|&v| v <= p[1]).collect();
    knots.push(T::zero());
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    knots.dedup();
    let mut best = (T::zero(), u(T::zero()));
    for &k in &knots {
        let v = u(k);
        if v < best.1 {
            best = (k, v);
        }
    }
    for w in knots.windows(2) {
        let (b, v) = golden_min(&u, w[0], w[1]);
        if v < best.1 {
            best = (b, v);
        }
    }
    let (beta, ustar) = best;
    Ok(ErrorBound::new(T::one() - ustar, BoundKind::PicFano)
        .with("beta_star", num(beta))
        .with("u_star", num(ustar))
        .with("f0_star", num(fstar))
        .with("k_star", json!(k_star))
        .with("lambdas", nums(&lam))
        .with("permutation", json!(perm)))
}

/// Bound for uniform `X` on `m` symbols: `1 - 1/m - sqrt((m - 1) chi^2) / m`.
pub fn chi2_uniform_bound<T: Real>(m: usize, chi2: T) -> Result<ErrorBound<T>> {
    if m == 0 || chi2 < T::zero() {
        return Err(Error::DomainError(format!("m = {m}, chi^2 = {chi2}")));
    }
    let mf = T::lit(m as f64);
    let raw = T::one() - T::one() / mf - ((mf - T::one()) * chi2).sqrt() / mf;
    Ok(ErrorBound::new(raw, BoundKind::ChiSqUniform)
        .with("m", json!(m))
        .with("chi2", num(chi2)))
}

/// `1 - p(1) - rho sqrt(1 - ||p||^2)`; `params.adv_upper` holds the matching
/// advantage bound `rho sqrt(1 - ||p||^2)`.
pub fn maxcorr_bound<T: Real>(px: &[T], rho: T) -> Result<ErrorBound<T>> {
    validate_pmf(px)?;
    if !(T::zero()..=T::one()).contains(&rho) {
        return Err(Error::DomainError(format!("maximal correlation {rho} outside [0, 1]")));
    }
    let top = px.iter().copied().fold(T::zero(), T::max);
    let adv = rho * (T::one() - sum_sq(px)).max(T::zero()).sqrt();
    Ok(ErrorBound::new(T::one() - top - adv, BoundKind::MaxCorr)
        .with("rho", num(rho))
        .with("adv_upper", num(adv)))
}

/// Smallest `d` with `h_b(d) + d log(m - 1) >= H(X) - theta`, i.e. the Fano
/// lower bound on the error for a channel leaking `theta` units.
pub fn fano_mi_error_rate<T: Real>(px: &[T], theta: T, base: LogBase) -> Result<ErrorBound<T>> {
    validate_pmf(px)?;
    fano_inversion(px.len(), entropy(px, base), theta, base)
}

fn fano_inversion<T: Real>(m: usize, h: T, theta: T, base: LogBase) -> Result<ErrorBound<T>> {
    if theta < T::zero() {
        return Err(Error::DomainError(format!("negative information {theta}")));
    }
    if m < 2 {
        return Ok(ErrorBound::new(T::zero(), BoundKind::FanoMI).with("theta", num(theta)));
    }
    let mf = T::lit(m as f64);
    let log_m1 = base.log(mf - T::one());
    let target = (h - theta).min(base.log(mf));
    let phi = |d: T| binary_entropy(d, base) + d * log_m1;
    let value = if target <= T::zero() {
        T::zero()
    } else {
        let (mut lo, mut hi) = (T::zero(), (mf - T::one()) / mf);
        let tol = T::lit(FANO_BISECTION_TOL).max(T::epsilon());
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = (lo + hi) / T::lit(2.0);
            if phi(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let mut b = ErrorBound::new(value, BoundKind::FanoMI)
        .with("theta", num(theta))
        .with("entropy", num(h))
        .with("m", json!(m));
    b.vacuous = value <= T::zero();
    Ok(b)
}

/// Aggregated pmf `p_U`: the `m - M + 1` largest atoms merge into one.
pub fn aggregate_gm<T: Real>(px: &[T], big_m: usize) -> Result<Vec<T>> {
    validate_pmf(px)?;
    let m = px.len();
    if big_m < 1 || big_m > m {
        return Err(Error::DomainError(format!("M = {big_m} outside 1..={m}")));
    }
    let (p, _) = sort_desc(px);
    let head: T = p[..m - big_m + 1].iter().copied().sum();
    let mut out = vec![head];
    out.extend_from_slice(&p[m - big_m + 1..]);
    let (out, _) = sort_desc(&out);
    Ok(out)
}

/// How the Fano right-hand side for functions is clamped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum MiClamp {
    /// `max(H(U) - theta, 0)`, the sound form.
    #[default]
    Max,
    /// `min(H(U) - theta, 0)`, which always yields zero.
    Min,
}

/// Lower bound on `P_e(f(X) | Y)` over every `f` onto `M` symbols from
/// `I(X; Y) <= theta`.
pub fn pem_bound_mi<T: Real>(px: &[T], big_m: usize, theta: T, clamp: MiClamp, base: LogBase) -> Result<ErrorBound<T>> {
    let pu = aggregate_gm(px, big_m)?;
    let h = entropy(&pu, base);
    let h_eff = match clamp {
        MiClamp::Max => h,
        MiClamp::Min => (h - theta).min(T::zero()) + theta,
    };
    let b = fano_inversion(big_m, h_eff, theta, base)?;
    Ok(b.with("M", json!(big_m))
        .with("p_u", nums(&pu))
        .with("clamp", json!(clamp)))
}

/// Lower bound on `P_e(f(X) | Y)` over every `f` onto `M` symbols from
/// `rho_m(X; Y) <= rho`.
pub fn pem_bound_rho<T: Real>(px: &[T], big_m: usize, rho: T) -> Result<ErrorBound<T>> {
    let pu = aggregate_gm(px, big_m)?;
    let b = maxcorr_bound(&pu, rho)?;
    Ok(b.with("M", json!(big_m)).with("p_u", nums(&pu)))
}

/// Upper bound `rho sqrt(1 - 1/M)` on the advantage of estimating any
/// function onto `M` symbols.
pub fn adv_m_bound<T: Real>(rho: T, big_m: usize) -> Result<T> {
    if big_m < 1 {
        return Err(Error::DomainError("M must be positive".into()));
    }
    Ok(rho * (T::one() - T::one() / T::lit(big_m as f64)).sqrt())
}

/// Exhaustive optimum over surjections `f: [m] -> [M]`.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionEstimation<T> {
    /// `min_f P_e(f(X) | Y)`.
    pub pe: T,
    /// Minimizing map.
    pub pe_map: Vec<usize>,
    /// `max_f Adv(f(X) | Y)`.
    pub adv: T,
    /// Maximizing map.
    pub adv_map: Vec<usize>,
    /// Surjections evaluated.
    pub evaluations: u64,
}

fn decode(mut code: u64, m: usize, base: u64, out: &mut [usize]) {
    for slot in out.iter_mut().take(m) {
        *slot = (code % base) as usize;
        code /= base;
    }
}

/// Exhaustive search of every surjection onto `M` symbols.
pub fn pem_exact<T: Real>(j: &JointPmf<T>, big_m: usize) -> Result<FunctionEstimation<T>> {
    let m = j.m();
    if big_m < 1 || big_m > m {
        return Err(Error::DomainError(format!("M = {big_m} outside 1..={m}")));
    }
    let count = (big_m as f64).powi(m as i32);
    if count > PEM_EXACT_CAP {
        return Err(Error::TooLarge {
            count,
            cap: PEM_EXACT_CAP,
        });
    }
    let total = count as u64;
    let n = j.n();
    let full = (1u64 << big_m) - 1;
    let eval = |code: u64| -> Option<(T, T)> {
        let mut f = vec![0usize; m];
        decode(code, m, big_m as u64, &mut f);
        if f.iter().fold(0u64, |acc, &k| acc | (1 << k)) != full {
            return None;
        }
        let mut hit = T::zero();
        let mut cell = vec![T::zero(); big_m];
        for c in 0..n {
            cell.iter_mut().for_each(|v| *v = T::zero());
            for (r, &k) in f.iter().enumerate() {
                cell[k] = cell[k] + j.get(r, c);
            }
            hit = hit + cell.iter().copied().fold(T::zero(), T::max);
        }
        let mut pu = vec![T::zero(); big_m];
        for (r, &k) in f.iter().enumerate() {
            pu[k] = pu[k] + j.px()[r];
        }
        let pe = (T::one() - hit).max(T::zero());
        let top = pu.iter().copied().fold(T::zero(), T::max);
        Some((pe, T::one() - top - pe))
    };
    #[derive(Clone, Copy)]
    struct Acc<T> {
        pe: T,
        pe_code: u64,
        adv: T,
        adv_code: u64,
        evals: u64,
    }
    let start = Acc {
        pe: T::infinity(),
        pe_code: u64::MAX,
        adv: -T::infinity(),
        adv_code: u64::MAX,
        evals: 0,
    };
    // Ties resolve to the smallest code so the result is independent of scheduling.
    let merge = |a: Acc<T>, b: Acc<T>| {
        let (pe, pe_code) = if b.pe < a.pe || (b.pe == a.pe && b.pe_code < a.pe_code) {
            (b.pe, b.pe_code)
        } else {
            (a.pe, a.pe_code)
        };
        let (adv, adv_code) = if b.adv > a.adv || (b.adv == a.adv && b.adv_code < a.adv_code) {
            (b.adv, b.adv_code)
        } else {
            (a.adv, a.adv_code)
        };
        Acc {
            pe,
            pe_code,
            adv,
            adv_code,
            evals: a.evals + b.evals,
        }
    };
    let acc = (0..total)
        .into_par_iter()
        .fold(
            || start,
            |acc, code| match eval(code) {
                Some((pe, adv)) => merge(
                    acc,
                    Acc {
                        pe,
                        pe_code: code,
                        adv,
                        adv_code: code,
                        evals: 1,
                    },
                ),
                None => acc,
            },
        )
        .reduce(|| start, merge);
    let mut pe_map = vec![0; m];
    let mut adv_map = vec![0; m];
    decode(acc.pe_code, m, big_m as u64, &mut pe_map);
    decode(acc.adv_code, m, big_m as u64, &mut adv_map);
    Ok(FunctionEstimation {
        pe: acc.pe,
        pe_map,
        adv: acc.adv,
        adv_map,
        evaluations: acc.evals,
    })
}

/// Minimum one-bit error implied by maximal correlation `rho` when the bit
/// has mass `a`: `(1 - sqrt(1 - 4 a (1 - a)(1 - rho^2))) / 2`.
pub fn witsenhausen_min_error<T: Real>(a: T, rho: T) -> Result<ErrorBound<T>> {
    if !(T::zero()..=T::one()).contains(&a) || !(T::zero()..=T::one()).contains(&rho) {
        return Err(Error::DomainError(format!("a = {a}, rho = {rho}")));
    }
    let four = T::lit(4.0);
    let inner = (T::one() - four * a * (T::one() - a) * (T::one() - rho * rho)).max(T::zero());
    let raw = (T::one() - inner.sqrt()) / T::lit(2.0);
    Ok(ErrorBound::new(raw, BoundKind::Witsenhausen)
        .with("a", num(a))
        .with("rho", num(rho)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{joint_from_channel, mutual_information, Channel};
    use crate::pic::decompose;

    #[test]
    fn bsc_pic_bound_is_exact() {
        let b = pic_fano_bound(&[0.5_f64, 0.5], &[0.64]).unwrap();
        assert!((b.value - 0.1).abs() < 1e-10, "{}", b.value);
        assert!((b.params["beta_star"].as_f64().unwrap() - 0.1).abs() < 1e-8);
        assert!((b.params["f0_star"].as_f64().unwrap() - 0.32).abs() < 1e-15);
        assert!(!b.vacuous);
        // 0.5 - 0.8 sqrt(0.5) < 0.
        let mc = maxcorr_bound(&[0.5, 0.5], 0.8).unwrap();
        assert_eq!(mc.value, 0.0);
        assert!(mc.vacuous);
        assert!((mc.params["adv_upper"].as_f64().unwrap() - 0.8 * 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn map_error_of_bsc() {
        let j = joint_from_channel(&[0.5, 0.5], &Channel::<f64>::bsc(0.1).unwrap()).unwrap();
        assert!((map_error(&j) - 0.1).abs() < 1e-15);
        assert!((advantage(&j) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn chi2_bound_on_identity_is_zero() {
        let b = chi2_uniform_bound(3, 2.0_f64).unwrap();
        assert!(b.value.abs() < 1e-15);
    }

    #[test]
    fn f0_star_is_minimum_over_alpha() {
        let p = [0.4, 0.3, 0.2, 0.1];
        let lam = [0.7, 0.3, 0.05];
        let (v, k) = f0_star(&p, &lam).unwrap();
        assert_eq!(k, 2);
        let mut best = f64::INFINITY;
        for i in 0..=10_000 {
            best = best.min(f0(i as f64 / 10_000.0, &p, &lam).unwrap());
        }
        for &a in &lam {
            best = best.min(f0(a, &p, &lam).unwrap());
        }
        assert!((v - best).abs() < 1e-12, "{v} vs {best}");
        assert!(matches!(f0(0.1, &[0.1, 0.9], &lam), Err(Error::UnsortedInput)));
    }

    #[test]
    fn fano_root_satisfies_equation() {
        let b = fano_mi_error_rate(&[0.25; 4], 1.0, LogBase::Two).unwrap();
        let d = b.value;
        let lhs = binary_entropy(d, LogBase::Two) + d * 3f64.log2();
        assert!((lhs - 1.0).abs() < 1e-10);
        let zero = fano_mi_error_rate(&[0.25; 4], 2.5, LogBase::Two).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(zero.vacuous);
    }

    #[test]
    fn aggregation_examples() {
        let pu = aggregate_gm(&[0.4_f64, 0.3, 0.2, 0.1], 2).unwrap();
        assert!((pu[0] - 0.9).abs() < 1e-15 && (pu[1] - 0.1).abs() < 1e-15);
        let pu = aggregate_gm(&[0.25; 4], 2).unwrap();
        assert_eq!(pu, vec![0.75, 0.25]);
        let pu = aggregate_gm(&[0.1, 0.2, 0.7], 3).unwrap();
        assert_eq!(pu, vec![0.7, 0.2, 0.1]);
    }

    #[test]
    fn pem_bound_examples() {
        let b = pem_bound_rho(&[0.4, 0.3, 0.2, 0.1], 2, 0.5).unwrap();
        assert_eq!(b.value, 0.0);
        assert!(b.vacuous);
        let b = pem_bound_rho(&[0.25; 4], 2, 0.2).unwrap();
        assert!((b.value - (0.25 - 0.2 * 0.375f64.sqrt())).abs() < 1e-12);
        // H(U) = h_b(0.1) exceeds theta, so d solves h_b(d) = h_b(0.1) - 0.2.
        let b = pem_bound_mi(&[0.4, 0.3, 0.2, 0.1], 2, 0.2, MiClamp::Max, LogBase::Two).unwrap();
        let target = binary_entropy(0.1_f64, LogBase::Two) - 0.2;
        assert!((binary_entropy(b.value, LogBase::Two) - target).abs() < 1e-10);
        assert!(b.value < 0.1);
        let b = pem_bound_mi(&[0.4, 0.3, 0.2, 0.1], 2, 0.2, MiClamp::Min, LogBase::Two).unwrap();
        assert_eq!(b.value, 0.0);
        assert!((adv_m_bound(0.5_f64, 2).unwrap() - 0.5 * 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pem_exact_independent_example() {
        let j = JointPmf::<f64>::independent(&[0.4, 0.3, 0.2, 0.1], &[1.0]).unwrap();
        let r = pem_exact(&j, 2).unwrap();
        assert!((r.pe - 0.1).abs() < 1e-15);
        assert_eq!(r.evaluations, 14);
        assert!(r.adv.abs() < 1e-15);
    }

    #[test]
    fn pem_exact_respects_bounds_on_bsc_pair() {
        let ch = Channel::<f64>::bsc(0.2).unwrap();
        let j = joint_from_channel(&[0.5, 0.5], &ch).unwrap();
        let pair = j.product(&j);
        let rho = decompose(&pair, 1e-6).unwrap().lambdas[0].sqrt();
        let exact = pem_exact(&pair, 2).unwrap();
        let b = pem_bound_rho(pair.px(), 2, rho).unwrap();
        assert!(exact.pe >= b.value - 1e-12);
        let theta = mutual_information(&pair, LogBase::Two);
        let b = pem_bound_mi(pair.px(), 2, theta, MiClamp::Max, LogBase::Two).unwrap();
        assert!(exact.pe >= b.value - 1e-12);
        assert!(exact.adv <= adv_m_bound(rho, 2).unwrap() + 1e-12);
    }

    #[test]
    fn pem_exact_too_large() {
        let j = JointPmf::<f64>::independent(&[0.125; 8], &[1.0]).unwrap();
        assert!(matches!(pem_exact(&j, 8), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn witsenhausen_min_error_at_half() {
        let b = witsenhausen_min_error(0.5_f64, 0.8).unwrap();
        assert!((b.value - 0.1).abs() < 1e-15);
    }
}
