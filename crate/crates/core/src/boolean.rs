//! Binary strings, additive noise and one-bit estimation.
//!
//! A string `x in {-1, 1}^n` is stored as the integer whose bit `i` is set
//! iff coordinate `i + 1` equals `-1`; index 0 is the all-ones string.
//! Entrywise product of strings is XOR of indices and the parity
//! `chi_S(x)` is `(-1)^popcount(S & x)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::witsenhausen_min_error;
use crate::dist::{validate_pmf, Channel, FGenerator};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{binary_entropy, LogBase, Real};

/// Violations must exceed the comparison value by more than this.
pub const CONJECTURE_SLACK: f64 = 1e-10;
/// Largest `n` accepted by [`conjecture_search`].
pub const CONJECTURE_MAX_N: usize = 4;

fn log2_exact(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// `chi_S(x)` as `+1` or `-1`.
pub fn parity(s: usize, x: usize) -> i32 {
    if (s & x).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// In-place normalized Walsh-Hadamard transform; an involution.
pub fn hadamard_transform<T: Real>(v: &mut [T]) -> Result<()> {
    log2_exact(v.len())?;
    let scale = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let mut h = 1;
    while h < v.len() {
        for block in (0..v.len()).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = (a + b) * scale;
                v[i + h] = (a - b) * scale;
            }
        }
        h *= 2;
    }
    Ok(())
}

/// Normalized Hadamard matrix of order `2^n` built by Kronecker powers.
pub fn hadamard_matrix<T: Real>(n: usize) -> Matrix<T> {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let h2 = Matrix::from_fn(2, 2, |i, j| if i == 1 && j == 1 { -s } else { s });
    let mut h = Matrix::identity(1);
    for _ in 0..n {
        h = h2.kron(&h);
    }
    h
}

/// Product noise pmf of `n` independent flips with probability `delta`.
pub fn bsc_noise<T: Real>(n: usize, delta: T) -> Vec<T> {
    (0..1usize << n)
        .map(|z| {
            let w = z.count_ones() as i32;
            delta.powi(w) * (T::one() - delta).powi(n as i32 - w)
        })
        .collect()
}

/// Additive noise channel `W(y | x) = p_Z(x XOR y)`.
pub fn additive_channel<T: Real>(p_z: &[T]) -> Result<Channel<T>> {
    log2_exact(p_z.len())?;
    validate_pmf(p_z).map_err(|e| Error::InvalidPmf(e.to_string()))?;
    let q = p_z.len();
    Channel::new(Matrix::from_fn(q, q, |x, y| p_z[x ^ y]))
}

/// Parity coefficients `c_S = E[chi_S(Z)]` of a noise pmf.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseSpectrum<T> {
    /// Number of coordinates.
    pub n: usize,
    /// `c_S` for `S = 0..2^n`, `c_0 = 1`.
    pub c: Vec<T>,
}

/// `c = 2^{n/2} H p_Z`.
pub fn noise_spectrum<T: Real>(p_z: &[T]) -> Result<NoiseSpectrum<T>> {
    let n = log2_exact(p_z.len())?;
    validate_pmf(p_z)?;
    let mut c = p_z.to_vec();
    hadamard_transform(&mut c)?;
    let scale = T::lit(2f64.powf(n as f64 / 2.0));
    c.iter_mut().for_each(|v| *v = *v * scale);
    Ok(NoiseSpectrum { n, c })
}

/// PICs of a uniform-input additive channel: `c_S^2` over non-empty `S`,
/// non-increasing.
pub fn additive_channel_pics<T: Real>(p_z: &[T], uniform_input: bool) -> Result<Vec<T>> {
    if !uniform_input {
        return Err(Error::UniformityRequired);
    }
    let spec = noise_spectrum(p_z)?;
    let mut out: Vec<T> = spec.c[1..].iter().map(|&c| c * c).collect();
    out.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Whether a channel is additive binary noise.
#[derive(Debug, Clone, Serialize)]
pub struct ParityMembership<T> {
    /// `W(y XOR s | x XOR s) = W(y | x)` for all `s` within tolerance.
    pub is_member: bool,
    /// Recovered noise pmf.
    pub p_z: Option<Vec<T>>,
    /// Its parity coefficients.
    pub spectrum: Option<NoiseSpectrum<T>>,
}

/// Tests shift invariance; non-square or non-power-of-two channels are
/// reported as non-members.
pub fn parity_membership_check<T: Real>(ch: &Channel<T>, tol: T) -> ParityMembership<T> {
    let q = ch.inputs();
    let none = ParityMembership {
        is_member: false,
        p_z: None,
        spectrum: None,
    };
    if q != ch.outputs() || log2_exact(q).is_err() {
        return none;
    }
    // Invariance under every shift is equivalent to W(x, y) = W(0, x XOR y).
    for x in 0..q {
        for y in 0..q {
            if (ch.get(x, y) - ch.get(0, x ^ y)).abs() > tol {
                return none;
            }
        }
    }
    let p_z: Vec<T> = (0..q).map(|z| ch.get(0, z)).collect();
    let spectrum = noise_spectrum(&p_z).ok();
    ParityMembership {
        is_member: true,
        p_z: Some(p_z),
        spectrum,
    }
}

/// Posterior `p_{B|Y}(0 | .)` from `x = p_{B|X}(0 | .)` for uniform `X` and
/// additive noise: `y = H diag(c) H x`.
pub fn filter_posterior<T: Real>(p_z: &[T], x: &[T]) -> Result<Vec<T>> {
    if x.len() != p_z.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} posteriors for {} strings",
            x.len(),
            p_z.len()
        )));
    }
    let spec = noise_spectrum(p_z)?;
    let mut v = x.to_vec();
    hadamard_transform(&mut v)?;
    for (a, &c) in v.iter_mut().zip(&spec.c) {
        *a = *a * c;
    }
    hadamard_transform(&mut v)?;
    Ok(v)
}

fn check_unit<T: Real>(name: &str, v: T) -> Result<()> {
    if !(T::zero()..=T::one()).contains(&v) {
        return Err(Error::DomainError(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// `I_f(B; Y~)` for a bit with `P(B = 0) = a` observed through a symmetric
/// channel with non-trivial singular value `sigma1`:
/// `a^2 f(1 + sigma c) + 2a(1 - a) f(1 - sigma) + (1 - a)^2 f(1 + sigma / c)`,
/// `c = (1 - a) / a`.
pub fn qary_f_information<T: Real>(a: T, sigma1: T, f: &FGenerator<T>) -> Result<T> {
    if !(a > T::zero() && a < T::one()) {
        return Err(Error::DomainError(format!("a = {a} must lie in (0, 1)")));
    }
    if !(-T::one()..=T::one()).contains(&sigma1) {
        return Err(Error::DomainError(format!("sigma = {sigma1} outside [-1, 1]")));
    }
    let one = T::one();
    let c = (one - a) / a;
    let args = [one + sigma1 * c, one - sigma1, one + sigma1 / c];
    if args.iter().any(|&v| v < T::zero()) {
        return Err(Error::DomainError(format!("sigma = {sigma1} infeasible for a = {a}")));
    }
    let two = T::lit(2.0);
    Ok(a * a * f.eval(args[0]) + two * a * (one - a) * f.eval(args[1]) + (one - a) * (one - a) * f.eval(args[2]))
}

/// Mutual information form with `sigma1 = 1 - 2 delta`:
/// `h_b(a) - a h_b(2 delta (1 - a)) - (1 - a) h_b(2 delta a)`.
pub fn qary_kl_closed_form<T: Real>(a: T, delta: T, base: LogBase) -> Result<T> {
    check_unit("a", a)?;
    check_unit("delta", delta)?;
    let two = T::lit(2.0);
    let one = T::one();
    Ok(binary_entropy(a, base)
        - a * binary_entropy(two * delta * (one - a), base)
        - (one - a) * binary_entropy(two * delta * a, base))
}

/// True when a bit of mass `a` is realizable on `q` equiprobable symbols.
pub fn qary_mass_attainable<T: Real>(a: T, q: usize) -> bool {
    let aq = a * T::lit(q as f64);
    (aq - aq.round()).abs() <= T::lit(1e-9)
}

/// Upper bound on `z = P(B = 0, B^ = 0)`:
/// `min(ab + rho sqrt(a(1 - a) b(1 - b)), min(a, b))`.
pub fn z_upper<T: Real>(a: T, b: T, rho: T) -> Result<T> {
    check_unit("a", a)?;
    check_unit("b", b)?;
    check_unit("rho", rho)?;
    let s = (a * (T::one() - a) * b * (T::one() - b)).sqrt();
    Ok((a * b + rho * s).min(a.min(b)))
}

/// Lower bound on `P(B != B^)`: `[a + b - 2ab - 2 rho sqrt(a(1 - a) b(1 - b))]^+`.
pub fn witsenhausen_bound<T: Real>(a: T, b: T, rho: T) -> Result<T> {
    check_unit("a", a)?;
    check_unit("b", b)?;
    check_unit("rho", rho)?;
    let two = T::lit(2.0);
    let s = (a * (T::one() - a) * b * (T::one() - b)).sqrt();
    Ok((a + b - two * a * b - two * rho * s).max(T::zero()))
}

/// [`witsenhausen_bound`] minimized over `b`.
pub fn witsenhausen_bound_minb<T: Real>(a: T, rho: T) -> Result<T> {
    Ok(witsenhausen_min_error(a, rho)?.value)
}

/// Bound on `I_f(B; B^)` over estimators with `P(B^ = 0) = P(B = 0) = a`
/// and `z >= a^2`.
pub fn unbiased_estimator_info_bound<T: Real>(a: T, sigma1: T, f: &FGenerator<T>) -> Result<T> {
    qary_f_information(a, sigma1, f)
}

/// Joint table of `(B, B^)` with `P(B=0) = a`, `P(B^=0) = b`,
/// `P(B=0, B^=0) = z`: `[[z, a - z], [b - z, 1 - a - b + z]]`.
pub fn one_bit_table<T: Real>(a: T, b: T, z: T) -> Result<Matrix<T>> {
    let one = T::one();
    let t = Matrix::from_rows(&[vec![z, a - z], vec![b - z, one - a - b + z]])?;
    let floor = -T::lit(1e-15);
    if t.as_slice().iter().any(|&v| v < floor) {
        return Err(Error::InfeasibleMass(z.as_f64()));
    }
    Ok(Matrix::from_fn(2, 2, |i, j| t[(i, j)].max(T::zero())))
}

/// `I_f(B; B^)` from the one-bit table; cells with zero product mass are skipped.
pub fn one_bit_f_information<T: Real>(a: T, b: T, z: T, f: &FGenerator<T>) -> Result<T> {
    let t = one_bit_table(a, b, z)?;
    let pr = [a, T::one() - a];
    let pc = [b, T::one() - b];
    let mut acc = T::zero();
    for i in 0..2 {
        for j in 0..2 {
            let q = pr[i] * pc[j];
            if q > T::zero() {
                acc = acc + q * f.eval(t[(i, j)] / q);
            }
        }
    }
    Ok(acc)
}

/// A Boolean function that beats a conjectured comparison.
#[derive(Debug, Clone, Serialize)]
pub struct Violation<T> {
    /// Truth table, bit `x` is `b(x)`.
    pub mask: u64,
    /// `I(b(X); Y^n)` through the product channel.
    pub info_product: T,
    /// `I(b(X); Y~)` through the matched symmetric channel.
    pub info_symmetric: T,
}

/// Outcome of [`conjecture_search`].
#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport<T> {
    /// Coordinates.
    pub n: usize,
    /// Crossover of each coordinate.
    pub delta: T,
    /// Crossover of the matched `(eps, 2^n)` symmetric channel.
    pub eps: T,
    /// Functions evaluated, one per complement pair.
    pub functions_checked: u64,
    /// `b` with `I(b; Y^n) > I(b; Y~)`, sorted by mask.
    pub violations: Vec<Violation<T>>,
    /// `b` with `I(b; Y^n) > 1 - h_b(delta)`, sorted by mask.
    pub capacity_violations: Vec<Violation<T>>,
    /// Largest `I(b; Y^n)` found.
    pub max_info: T,
    /// Smallest mask attaining it.
    pub argmax_mask: u64,
    /// `1 - h_b(delta)`.
    pub single_letter_capacity: T,
}

/// `I(b(X); Y)` in bits for uniform `X` on `q` symbols and channel `w`.
fn info_of_mask<T: Real>(mask: u64, w: &Matrix<T>, q: usize) -> T {
    let qf = T::lit(q as f64);
    let ones = mask.count_ones() as f64;
    let a = T::lit(ones) / qf;
    let mut cond = T::zero();
    for y in 0..q {
        // Uniform input gives p(x | y) = W(y | x) / sum_x W(y | x).
        let col: T = (0..q).map(|x| w[(x, y)]).sum();
        let hit: T = (0..q).filter(|&x| mask >> x & 1 == 1).map(|x| w[(x, y)]).sum();
        let py = col / qf;
        cond = cond + py * binary_entropy((hit / col).min(T::one()), LogBase::Two);
    }
    (binary_entropy(a, LogBase::Two) - cond).max(T::zero())
}

/// Exhausts every Boolean function of `n <= 4` bits, up to complement, and
/// compares `I(b(X); Y^n)` through a memoryless BSC with the matched
/// symmetric channel and with `1 - h_b(delta)`.
pub fn conjecture_search<T: Real>(n: usize, delta: T) -> Result<ConjectureReport<T>> {
    if n == 0 || n > CONJECTURE_MAX_N {
        return Err(Error::DomainError(format!("n = {n} outside 1..={CONJECTURE_MAX_N}")));
    }
    check_unit("delta", delta)?;
    let q = 1usize << n;
    let product = additive_channel(&bsc_noise(n, delta))?;
    let two = T::lit(2.0);
    let eps = two * delta * (T::one() - T::one() / T::lit(q as f64));
    let symmetric = Channel::symmetric(eps, q)?;
    let cap = T::one() - binary_entropy(delta, LogBase::Two);
    let slack = T::lit(CONJECTURE_SLACK);
    // Fixing b(0) = 0 picks one function from each complement pair.
    let total = 1u64 << (q - 1);
    let rows: Vec<(u64, T, T)> = (0..total)
        .into_par_iter()
        .map(|k| {
            let mask = k << 1;
            (
                mask,
                info_of_mask(mask, product.matrix(), q),
                info_of_mask(mask, symmetric.matrix(), q),
            )
        })
        .collect();
    let mut violations = Vec::new();
    let mut capacity_violations = Vec::new();
    let (mut max_info, mut argmax_mask) = (T::zero(), 0u64);
    for &(mask, ip, is) in &rows {
        let v = Violation {
            mask,
            info_product: ip,
            info_symmetric: is,
        };
        if ip > is + slack {
            violations.push(v.clone());
        }
        if ip > cap + slack {
            capacity_violations.push(v);
        }
        if ip > max_info {
            max_info = ip;
            argmax_mask = mask;
        }
    }
    Ok(ConjectureReport {
        n,
        delta,
        eps,
        functions_checked: total,
        violations,
        capacity_violations,
        max_info,
        argmax_mask,
        single_letter_capacity: cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{joint_from_channel, mutual_information};
    use crate::pic::decompose;

    #[test]
    fn hadamard_matches_kronecker_matrix_and_is_involution() {
        let h = hadamard_matrix::<f64>(3);
        let x: Vec<f64> = (0..8).map(|i| (i as f64).sin()).collect();
        let mut y = x.clone();
        hadamard_transform(&mut y).unwrap();
        let hx = h.mul_vec(&x);
        for (a, b) in y.iter().zip(&hx) {
            assert!((a - b).abs() < 1e-14);
        }
        hadamard_transform(&mut y).unwrap();
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).abs() < 1e-14);
        }
        for r in 0..8 {
            for c in 0..8 {
                assert!((h[(r, c)] * 8f64.sqrt() - parity(r, c) as f64).abs() < 1e-14);
            }
        }
        assert!(matches!(
            hadamard_transform(&mut [1.0, 2.0, 3.0]),
            Err(Error::NotPowerOfTwo(3))
        ));
    }

    #[test]
    fn one_coordinate_spectrum() {
        let s = noise_spectrum(&[0.7_f64, 0.3]).unwrap();
        assert!((s.c[0] - 1.0).abs() < 1e-15 && (s.c[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn spectrum_is_parity_expectation() {
        let p = [0.1_f64, 0.2, 0.3, 0.05, 0.15, 0.05, 0.1, 0.05];
        let s = noise_spectrum(&p).unwrap();
        for (set, &c) in s.c.iter().enumerate() {
            let direct: f64 = p.iter().enumerate().map(|(z, &pz)| pz * parity(set, z) as f64).sum();
            assert!((c - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn additive_pics_match_svd() {
        let p = [0.4_f64, 0.1, 0.3, 0.2];
        let pics = additive_channel_pics(&p, true).unwrap();
        let j = joint_from_channel(&[0.25; 4], &additive_channel(&p).unwrap()).unwrap();
        let dec = decompose(&j, 1e-6).unwrap();
        for (a, b) in pics.iter().zip(&dec.lambdas) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            additive_channel_pics(&p, false),
            Err(Error::UniformityRequired)
        ));
    }

    #[test]
    fn membership_recovers_noise() {
        let p = [0.4_f64, 0.1, 0.3, 0.2];
        let r = parity_membership_check(&additive_channel(&p).unwrap(), 1e-9);
        assert!(r.is_member);
        assert_eq!(r.p_z.unwrap(), p.to_vec());
        let not = Channel::<f64>::from_rows(&[
            vec![0.7, 0.1, 0.1, 0.1],
            vec![0.1, 0.7, 0.1, 0.1],
            vec![0.1, 0.1, 0.6, 0.2],
            vec![0.1, 0.1, 0.1, 0.7],
        ])
        .unwrap();
        assert!(!parity_membership_check(&not, 1e-9).is_member);
        assert!(!parity_membership_check(&Channel::<f64>::identity(3), 1e-9).is_member);
    }

    #[test]
    fn filter_matches_bayes() {
        let p = [0.5_f64, 0.2, 0.2, 0.1];
        let x = [0.9, 0.2, 0.6, 0.3];
        let y = filter_posterior(&p, &x).unwrap();
        for (j, &yj) in y.iter().enumerate() {
            // Uniform prior: p(x | y) = p_Z(x XOR y).
            let bayes: f64 = (0..4).map(|i| p[i ^ j] * x[i]).sum();
            assert!((yj - bayes).abs() < 1e-14);
        }
    }

    #[test]
    fn qary_closed_forms_agree() {
        for &(a, delta) in &[(0.5_f64, 0.1), (0.25, 0.2), (0.125, 0.05)] {
            let sigma = 1.0 - 2.0 * delta;
            let general = qary_f_information(a, sigma, &FGenerator::Kl(LogBase::Two)).unwrap();
            let kl = qary_kl_closed_form(a, delta, LogBase::Two).unwrap();
            assert!((general - kl).abs() < 1e-12);
        }
        let half = qary_kl_closed_form(0.5_f64, 0.1, LogBase::Two).unwrap();
        assert!((half - (1.0 - binary_entropy(0.1, LogBase::Two))).abs() < 1e-14);
        let chi = qary_f_information(0.5_f64, 0.3, &FGenerator::ChiSq).unwrap();
        assert!((chi - 0.09).abs() < 1e-14);
        assert!(qary_f_information(0.0_f64, 0.3, &FGenerator::ChiSq).is_err());
        assert!(qary_mass_attainable(0.25_f64, 8));
        assert!(!qary_mass_attainable(0.3_f64, 8));
    }

    #[test]
    fn qary_matches_assembled_channel() {
        let q = 8;
        let delta = 0.15_f64;
        let eps = 2.0 * delta * (1.0 - 1.0 / q as f64);
        let sc = Channel::symmetric(eps, q).unwrap();
        let j = joint_from_channel(&[1.0 / q as f64; 8], &sc).unwrap();
        // B = 0 on the first three symbols.
        let table = crate::linalg::Matrix::from_fn(2, q, |b, y| {
            (0..q).filter(|&x| (x < 3) == (b == 0)).map(|x| j.get(x, y)).sum()
        });
        let jb = crate::dist::JointPmf::<f64>::new(table).unwrap();
        let direct = mutual_information(&jb, LogBase::Two);
        let closed = qary_kl_closed_form(3.0 / 8.0, delta, LogBase::Two).unwrap();
        assert!((direct - closed).abs() < 1e-12);
    }

    #[test]
    fn one_bit_bounds_examples() {
        assert!((z_upper(0.3_f64, 0.4, 0.5).unwrap() - (0.12 + 0.5 * 0.0504f64.sqrt())).abs() < 1e-15);
        let w = witsenhausen_bound(0.3_f64, 0.4, 0.5).unwrap();
        assert!((w - (0.46 - 0.0504f64.sqrt())).abs() < 1e-15);
        assert!((w - 0.235_501).abs() < 1e-6);
        assert!((witsenhausen_bound(0.5_f64, 0.5, 0.8).unwrap() - 0.1).abs() < 1e-15);
        assert!((witsenhausen_bound_minb(0.5_f64, 0.8).unwrap() - 0.1).abs() < 1e-15);
        let chi = unbiased_estimator_info_bound(0.5_f64, 0.6, &FGenerator::ChiSq).unwrap();
        assert!((chi - 0.36).abs() < 1e-15);
    }

    #[test]
    fn minb_is_minimum_over_b() {
        for &(a, rho) in &[(0.2_f64, 0.5), (0.5, 0.3), (0.7, 0.9)] {
            let grid = (0..=100_000)
                .map(|i| witsenhausen_bound(a, i as f64 / 100_000.0, rho).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!((grid - witsenhausen_bound_minb(a, rho).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn one_bit_table_information() {
        let v = one_bit_f_information(0.5_f64, 0.5, 0.4, &FGenerator::Kl(LogBase::Two)).unwrap();
        assert!((v - (1.0 - binary_entropy(0.2, LogBase::Two))).abs() < 1e-14);
        assert!(one_bit_table(0.3_f64, 0.4, 0.35).is_err());
    }

    #[test]
    fn conjecture_small_cases() {
        let r = conjecture_search(1, 0.1_f64).unwrap();
        assert_eq!(r.functions_checked, 2);
        assert!(r.violations.is_empty() && r.capacity_violations.is_empty());
        assert!((r.max_info - r.single_letter_capacity).abs() < 1e-12);
        let r = conjecture_search(2, 0.2_f64).unwrap();
        assert_eq!(r.functions_checked, 8);
        assert!(r.violations.is_empty());
        assert!(conjecture_search(5, 0.1_f64).is_err());
    }
}
