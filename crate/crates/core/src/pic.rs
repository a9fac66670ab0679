//! Principal inertia components: the squared non-trivial singular values of
//! `Q = D_X^{-1/2} P D_Y^{-1/2}` and the principal functions attached to them.

use serde::Serialize;

use crate::dist::{joint_from_channel_restricted, Channel, JointPmf};
use crate::error::{Error, Result};
use crate::linalg::{dot, svd, symmetric_eigen, Matrix};
use crate::scalar::Real;

/// Default tolerance on the leading singular value.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Adjacent components closer than this are reported as tied.
pub const TIE_TOL: f64 = 1e-9;
/// Singular values this close to 1 are snapped to 1.
pub const UNIT_SNAP: f64 = 1e-10;
/// Marginal dynamic range above which the decomposition is flagged.
pub const CONDITION_WARN: f64 = 1e8;
/// Slack allowed by [`dpi_check`].
pub const DPI_SLACK: f64 = 1e-8;

/// Result of [`decompose`].
#[derive(Debug, Clone, Serialize)]
pub struct PicDecomposition<T> {
    /// `lambda_1 >= ... >= lambda_d`, `d = min(m, n) - 1`.
    pub lambdas: Vec<T>,
    /// Singular values of `Q`, leading 1 included.
    pub sigmas: Vec<T>,
    /// `m x (d + 1)` principal functions of `X`; column 0 is constant.
    pub f: Matrix<T>,
    /// `n x (d + 1)` principal functions of `Y`.
    pub g: Matrix<T>,
    /// Inclusive 1-based ranges of tied components.
    pub ties: Vec<(usize, usize)>,
    /// Marginal dynamic range exceeds [`CONDITION_WARN`].
    pub ill_conditioned: bool,
}

impl<T: Real> PicDecomposition<T> {
    /// Number of non-trivial components.
    pub fn d(&self) -> usize {
        self.lambdas.len()
    }

    /// `f_k` evaluated on every symbol of `X`; `k = 0` is the constant.
    pub fn f_k(&self, k: usize) -> Vec<T> {
        self.f.col(k)
    }

    /// `g_k` evaluated on every symbol of `Y`.
    pub fn g_k(&self, k: usize) -> Vec<T> {
        self.g.col(k)
    }
}

/// `Q(i, j) = p(i, j) / sqrt(p_X(i) p_Y(j))`.
pub fn q_matrix<T: Real>(j: &JointPmf<T>) -> Matrix<T> {
    Matrix::from_fn(j.m(), j.n(), |a, b| j.get(a, b) / (j.px()[a] * j.py()[b]).sqrt())
}

fn ties_of<T: Real>(lambdas: &[T]) -> Vec<(usize, usize)> {
    let tol = T::lit(TIE_TOL);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=lambdas.len() {
        if i == lambdas.len() || (lambdas[i - 1] - lambdas[i]).abs() >= tol {
            if i - start > 1 {
                out.push((start + 1, i));
            }
            start = i;
        }
    }
    out
}

/// Singular value decomposition of `Q` turned into PICs and principal
/// functions. `tol` bounds `|sigma_0 - 1|`.
pub fn decompose<T: Real>(j: &JointPmf<T>, tol: T) -> Result<PicDecomposition<T>> {
    let (m, n) = (j.m(), j.n());
    let q = q_matrix(j);
    let mut dec = svd(&q)?;
    let top = dec.s[0];
    if !top.is_finite() || (top - T::one()).abs() > tol {
        return Err(Error::InconsistentDecomposition(top.as_f64()));
    }
    let snap = T::lit(UNIT_SNAP);
    for s in dec.s.iter_mut() {
        if (*s - T::one()).abs() <= snap {
            *s = T::one();
        }
        *s = s.max(T::zero()).min(T::one());
    }
    let k = m.min(n);
    let mut f = Matrix::from_fn(m, k, |a, c| dec.u[(a, c)] / j.px()[a].sqrt());
    let mut g = Matrix::from_fn(n, k, |b, c| dec.v[(b, c)] / j.py()[b].sqrt());
    let zero_floor = T::lit(1e-10);
    for c in 0..k {
        let sign = first_significant_sign(&f.col(c), zero_floor);
        if sign < T::zero() {
            for a in 0..m {
                f[(a, c)] = -f[(a, c)];
            }
            for b in 0..n {
                g[(b, c)] = -g[(b, c)];
            }
        }
        if dec.s[c] <= zero_floor && first_significant_sign(&g.col(c), zero_floor) < T::zero() {
            for b in 0..n {
                g[(b, c)] = -g[(b, c)];
            }
        }
    }
    let lambdas: Vec<T> = dec.s[1..k].iter().map(|&s| (s * s).min(T::one())).collect();
    let range = |v: &[T]| {
        let hi = v.iter().copied().fold(T::zero(), T::max);
        let lo = v.iter().copied().fold(T::infinity(), T::min);
        hi / lo
    };
    let warn = T::lit(CONDITION_WARN);
    Ok(PicDecomposition {
        ties: ties_of(&lambdas),
        lambdas,
        sigmas: dec.s[..k].to_vec(),
        f,
        g,
        ill_conditioned: range(j.px()) > warn || range(j.py()) > warn,
    })
}

fn first_significant_sign<T: Real>(v: &[T], floor: T) -> T {
    let scale = v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    v.iter()
        .find(|x| x.abs() > floor * scale)
        .map(|x| x.signum())
        .unwrap_or(T::one())
}

/// `J_k(X; Y) = lambda_1 + ... + lambda_k`.
pub fn k_correlation<T: Real>(j: &JointPmf<T>, k: usize) -> Result<T> {
    let dec = decompose(j, T::lit(DEFAULT_TOL))?;
    if k == 0 || k > dec.d() {
        return Err(Error::IndexOutOfRange { index: k, len: dec.d() });
    }
    Ok(dec.lambdas[..k].iter().copied().sum())
}

/// Maximal correlation `sqrt(lambda_1)`; zero when an alphabet is a singleton.
pub fn maximal_correlation<T: Real>(j: &JointPmf<T>) -> Result<T> {
    let dec = decompose(j, T::lit(DEFAULT_TOL))?;
    Ok(dec.lambdas.first().map(|l| l.sqrt()).unwrap_or(T::zero()))
}

/// Spectral form of `mmse(f(X) | Y)`.
#[derive(Debug, Clone, Serialize)]
pub struct MmseDecomposition<T> {
    /// Minimum mean-squared error.
    pub mmse: T,
    /// `Var f(X)`.
    pub variance: T,
    /// `c_i = E[f f_i] / ||f||` after centering, `i = 1..d`.
    pub coefficients: Vec<T>,
}

fn centered<T: Real>(px: &[T], f: &[T]) -> Result<(Vec<T>, T)> {
    if f.len() != px.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} symbols",
            f.len(),
            px.len()
        )));
    }
    let mean: T = px.iter().zip(f).map(|(&p, &v)| p * v).sum();
    let c: Vec<T> = f.iter().map(|&v| v - mean).collect();
    let var: T = px.iter().zip(&c).map(|(&p, &v)| p * v * v).sum();
    Ok((c, var))
}

/// `mmse(f(X) | Y) = ||f||^2 (1 - sum c_i^2 lambda_i)` for centered `f`.
pub fn mmse_of_function<T: Real>(j: &JointPmf<T>, f: &[T]) -> Result<MmseDecomposition<T>> {
    let (c, var) = centered(j.px(), f)?;
    let norm = var.sqrt();
    if norm < T::lit(1e-12) {
        return Err(Error::DegenerateFunction);
    }
    let dec = decompose(j, T::lit(DEFAULT_TOL))?;
    let weighted: Vec<T> = c.iter().zip(j.px()).map(|(&v, &p)| v * p).collect();
    let coefficients: Vec<T> = (1..=dec.d()).map(|k| dot(&weighted, &dec.f_k(k)) / norm).collect();
    let explained: T = coefficients.iter().zip(&dec.lambdas).map(|(&ci, &l)| ci * ci * l).sum();
    Ok(MmseDecomposition {
        mmse: (var * (T::one() - explained)).max(T::zero()),
        variance: var,
        coefficients,
    })
}

/// `||E[f(X) | Y]||^2` for the centered version of `f`.
pub fn conditional_energy<T: Real>(j: &JointPmf<T>, f: &[T]) -> Result<T> {
    let (c, _) = centered(j.px(), f)?;
    let e = j.cond_expect_x(&c);
    Ok(e.iter().zip(j.py()).map(|(&v, &p)| p * v * v).sum())
}

/// PICs of `((X1, X2), (Y1, Y2))` for independent pairs: every product
/// `lambda_i lambda_j` with the trivial pair removed, non-increasing.
pub fn tensorize<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let with_one = |v: &[T]| std::iter::once(T::one()).chain(v.iter().copied()).collect::<Vec<T>>();
    let (a1, b1) = (with_one(a), with_one(b));
    let mut out: Vec<T> = Vec::with_capacity(a1.len() * b1.len() - 1);
    for (i, &x) in a1.iter().enumerate() {
        for (k, &y) in b1.iter().enumerate() {
            if i + k > 0 {
                out.push(x * y);
            }
        }
    }
    out.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Square, symmetric within `tol` and positive semi-definite within `tol`.
pub fn is_conforming<T: Real>(j: &JointPmf<T>, tol: T) -> Result<bool> {
    if j.m() != j.n() {
        return Ok(false);
    }
    let p = j.table();
    if p.max_abs_diff(&p.transpose()) > tol {
        return Ok(false);
    }
    let (vals, _) = symmetric_eigen(p)?;
    Ok(vals.last().map(|&v| v >= -tol).unwrap_or(true))
}

/// Channel `sigma_1 I + (1 - sigma_1) 1 p_X^T` with `sigma_1` the maximal
/// correlation of a conforming joint.
pub fn flatten_to_max<T: Real>(j: &JointPmf<T>, tol: T) -> Result<Channel<T>> {
    if !is_conforming(j, tol)? {
        return Err(Error::NotConforming);
    }
    let s = maximal_correlation(j)?;
    let m = j.m();
    Channel::new(Matrix::from_fn(m, m, |a, b| {
        let diag = if a == b { s } else { T::zero() };
        diag + (T::one() - s) * j.px()[b]
    }))
}

/// Outcome of [`dpi_check`] for the chain `X -> Y -> Z`.
#[derive(Debug, Clone, Serialize)]
pub struct DpiReport<T> {
    /// PICs of `(X, Z)`.
    pub lambdas_xz: Vec<T>,
    /// PICs of `(X, Y)`.
    pub lambdas_xy: Vec<T>,
    /// `lambda_1(Y; Z)`.
    pub lambda1_yz: T,
    /// `lambda_1(Y; Z) lambda_k(X; Y) - lambda_k(X; Z)`, shorter list padded with zeros.
    pub slack: Vec<T>,
    /// Every slack is at least `-DPI_SLACK`.
    pub holds: bool,
}

fn pics<T: Real>(j: &JointPmf<T>) -> Result<Vec<T>> {
    Ok(decompose(j, T::lit(DEFAULT_TOL))?.lambdas)
}

/// Checks `lambda_k(X; Z) <= lambda_1(Y; Z) lambda_k(X; Y)` for the chain
/// `X ~ p_x`, `Y | X ~ p`, `Z | Y ~ w`. Unreachable symbols are dropped.
pub fn dpi_check<T: Real>(px: &[T], p: &Channel<T>, w: &Channel<T>) -> Result<DpiReport<T>> {
    if p.outputs() != w.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "first channel has {} outputs, second has {} inputs",
            p.outputs(),
            w.inputs()
        )));
    }
    let (j_xy, kept_y) = joint_from_channel_restricted(px, p)?;
    let w_kept = Channel::new(Matrix::from_fn(kept_y.len(), w.outputs(), |a, b| w.get(kept_y[a], b)))?;
    let (j_yz, _) = joint_from_channel_restricted(j_xy.py(), &w_kept)?;
    let (j_xz, _) = joint_from_channel_restricted(px, &p.compose(w)?)?;
    let lambdas_xy = pics(&j_xy)?;
    let lambdas_xz = pics(&j_xz)?;
    let lambda1_yz = pics(&j_yz)?.first().copied().unwrap_or(T::zero());
    let len = lambdas_xy.len().max(lambdas_xz.len());
    let at = |v: &[T], k: usize| v.get(k).copied().unwrap_or(T::zero());
    let slack: Vec<T> = (0..len)
        .map(|k| lambda1_yz * at(&lambdas_xy, k) - at(&lambdas_xz, k))
        .collect();
    let holds = slack.iter().all(|&s| s >= -T::lit(DPI_SLACK));
    Ok(DpiReport {
        lambdas_xz,
        lambdas_xy,
        lambda1_yz,
        slack,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{chi_squared, joint_from_channel};

    fn bsc(delta: f64) -> JointPmf<f64> {
        joint_from_channel(&[0.5, 0.5], &Channel::<f64>::bsc(delta).unwrap()).unwrap()
    }

    #[test]
    fn bsc_single_component() {
        let dec = decompose(&bsc(0.1), 1e-6).unwrap();
        assert_eq!(dec.d(), 1);
        assert!((dec.lambdas[0] - 0.64).abs() < 1e-12);
        let f1 = dec.f_k(1);
        assert!((f1[0] - 1.0).abs() < 1e-12 && (f1[1] + 1.0).abs() < 1e-12);
        assert!((maximal_correlation(&bsc(0.1)).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn identity_and_independent_extremes() {
        let id = JointPmf::<f64>::from_rows(&[
            vec![1.0 / 3.0, 0.0, 0.0],
            vec![0.0, 1.0 / 3.0, 0.0],
            vec![0.0, 0.0, 1.0 / 3.0],
        ])
        .unwrap();
        let dec = decompose(&id, 1e-6).unwrap();
        assert!(dec.lambdas.iter().all(|&l| l == 1.0));
        assert_eq!(dec.ties, vec![(1, 2)]);
        let ind = JointPmf::<f64>::independent(&[0.2, 0.3, 0.5], &[0.6, 0.4]).unwrap();
        let dec = decompose(&ind, 1e-6).unwrap();
        assert_eq!(dec.d(), 1);
        assert!(dec.lambdas[0] < 1e-24);
    }

    #[test]
    fn principal_functions_are_orthonormal_and_coupled() {
        let j = JointPmf::<f64>::from_rows(&[
            vec![0.10, 0.05, 0.05, 0.02],
            vec![0.03, 0.20, 0.02, 0.05],
            vec![0.05, 0.05, 0.30, 0.08],
        ])
        .unwrap();
        let dec = decompose(&j, 1e-6).unwrap();
        let k = dec.d() + 1;
        for a in 0..k {
            for b in 0..k {
                let fa = dec.f_k(a);
                let fb = dec.f_k(b);
                let e: f64 = (0..j.m()).map(|i| j.px()[i] * fa[i] * fb[i]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((e - expect).abs() < 1e-10);
            }
            let cond = j.cond_expect_x(&dec.f_k(a));
            let g = dec.g_k(a);
            for y in 0..j.n() {
                assert!((cond[y] - dec.sigmas[a] * g[y]).abs() < 1e-10);
            }
        }
        let sum: f64 = dec.lambdas.iter().sum();
        assert!((sum - chi_squared(&j)).abs() < 1e-12);
        assert!((k_correlation(&j, dec.d()).unwrap() - chi_squared(&j)).abs() < 1e-12);
        assert!(matches!(k_correlation(&j, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn sign_convention() {
        let j = JointPmf::<f64>::from_rows(&[vec![0.05, 0.45], vec![0.45, 0.05]]).unwrap();
        let dec = decompose(&j, 1e-6).unwrap();
        assert!(dec.f_k(1)[0] > 0.0);
        // E[f_1 | Y] has the sign of g_1.
        let cond = j.cond_expect_x(&dec.f_k(1));
        assert!(cond[0] * dec.g_k(1)[0] > 0.0);
    }

    #[test]
    fn mmse_matches_direct_computation() {
        let j = JointPmf::<f64>::from_rows(&[
            vec![0.10, 0.05, 0.05],
            vec![0.03, 0.20, 0.02],
            vec![0.05, 0.05, 0.20],
            vec![0.10, 0.05, 0.10],
        ])
        .unwrap();
        let f = [1.0, -2.0, 0.5, 3.0];
        let spectral = mmse_of_function(&j, &f).unwrap();
        let energy = conditional_energy(&j, &f).unwrap();
        assert!((spectral.mmse - (spectral.variance - energy)).abs() < 1e-12);
        assert!(matches!(
            mmse_of_function(&j, &[2.0; 4]),
            Err(Error::DegenerateFunction)
        ));
    }

    #[test]
    fn mmse_of_bsc_parity() {
        let m = mmse_of_function(&bsc(0.1), &[1.0, -1.0]).unwrap();
        assert!((m.mmse - 0.36).abs() < 1e-12);
    }

    #[test]
    fn tensorize_products() {
        let t = tensorize(&[0.64_f64], &[0.25]);
        assert_eq!(t.len(), 3);
        assert!((t[0] - 0.64).abs() < 1e-15 && (t[1] - 0.25).abs() < 1e-15 && (t[2] - 0.16).abs() < 1e-15);
    }

    #[test]
    fn conforming_detection_and_flattening() {
        let j = bsc(0.1);
        assert!(is_conforming(&j, 1e-12).unwrap());
        let ch = flatten_to_max(&j, 1e-12).unwrap();
        assert!((ch.get(0, 0) - 0.9).abs() < 1e-12);
        // Non-square and anti-correlated tables do not conform.
        let asym = JointPmf::<f64>::from_rows(&[vec![0.2, 0.3], vec![0.1, 0.4]]).unwrap();
        assert!(!is_conforming(&asym, 1e-12).unwrap());
        let neg = bsc(0.9);
        assert!(!is_conforming(&neg, 1e-12).unwrap());
        assert!(matches!(flatten_to_max(&neg, 1e-12), Err(Error::NotConforming)));
    }

    #[test]
    fn dpi_on_bsc_cascade() {
        let r = dpi_check(
            &[0.5, 0.5],
            &Channel::<f64>::bsc(0.1).unwrap(),
            &Channel::<f64>::bsc(0.2).unwrap(),
        )
        .unwrap();
        assert!(r.holds);
        // Cascade crossover 0.26 gives rho = 0.48 = 0.8 * 0.6.
        assert!((r.lambdas_xz[0] - 0.2304).abs() < 1e-12);
        assert!((r.lambda1_yz - 0.36).abs() < 1e-12);
        assert!(r.slack[0].abs() < 1e-12);
    }

    #[test]
    fn f32_decomposition() {
        let j: JointPmf<f32> = JointPmf::from_rows(&[vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap();
        let dec = decompose(&j, 1e-4).unwrap();
        assert!((dec.lambdas[0] - 0.64).abs() < 1e-5);
    }
}
