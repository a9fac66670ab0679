//! Finite joint distributions, channels and the information measures
//! computed from them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{LogBase, Real};

/// Joint pmf of `(X, Y)` on `[m] x [n]` with strictly positive marginals.
/// Rows index `X`, columns index `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<T> {
    p: Matrix<T>,
    px: Vec<T>,
    py: Vec<T>,
    x_labels: Option<Vec<String>>,
    y_labels: Option<Vec<String>>,
}

/// Checks entries and total mass, renormalizing small deviations.
fn normalize_mass<T: Real>(p: &mut Matrix<T>) -> Result<()> {
    let (m, n) = (p.rows(), p.cols());
    for i in 0..m {
        for j in 0..n {
            let v = p[(i, j)];
            if !v.is_finite() || v < T::zero() {
                return Err(Error::InvalidProbability {
                    row: i,
                    col: j,
                    value: v.as_f64(),
                });
            }
        }
    }
    let total: T = p.as_slice().iter().copied().sum();
    let dev = (total - T::one()).abs();
    if dev > T::lit(T::RENORM_TOL) {
        return Err(Error::NotNormalized(total.as_f64()));
    }
    if dev > T::lit(T::MASS_TOL) {
        for i in 0..m {
            for j in 0..n {
                p[(i, j)] = p[(i, j)] / total;
            }
        }
    }
    Ok(())
}

impl<T: Real> JointPmf<T> {
    /// Validates a table. Mass within the renormalization tolerance of one
    /// is rescaled; zero rows or columns are rejected.
    pub fn new(mut p: Matrix<T>) -> Result<Self> {
        normalize_mass(&mut p)?;
        let (m, n) = (p.rows(), p.cols());
        let px: Vec<T> = (0..m).map(|i| p.row(i).iter().copied().sum()).collect();
        let py: Vec<T> = (0..n).map(|j| (0..m).map(|i| p[(i, j)]).sum()).collect();
        if let Some(i) = px.iter().position(|&v| v <= T::zero()) {
            return Err(Error::ZeroMassRow(i));
        }
        if let Some(j) = py.iter().position(|&v| v <= T::zero()) {
            return Err(Error::ZeroMassColumn(j));
        }
        Ok(Self {
            p,
            px,
            py,
            x_labels: None,
            y_labels: None,
        })
    }

    /// Validates a table given as rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Product distribution `p_X p_Y^T`.
    pub fn independent(px: &[T], py: &[T]) -> Result<Self> {
        Self::new(Matrix::from_fn(px.len(), py.len(), |i, j| px[i] * py[j]))
    }

    /// Attaches symbol labels.
    pub fn with_labels(mut self, x_labels: Vec<String>, y_labels: Vec<String>) -> Result<Self> {
        if x_labels.len() != self.m() || y_labels.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} x labels and {} y labels for a {}x{} table",
                x_labels.len(),
                y_labels.len(),
                self.m(),
                self.n()
            )));
        }
        self.x_labels = Some(x_labels);
        self.y_labels = Some(y_labels);
        Ok(self)
    }

    /// `|X|`.
    pub fn m(&self) -> usize {
        self.p.rows()
    }

    /// `|Y|`.
    pub fn n(&self) -> usize {
        self.p.cols()
    }

    /// Probability table.
    pub fn table(&self) -> &Matrix<T> {
        &self.p
    }

    /// `p(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.p[(i, j)]
    }

    /// Marginal of `X`.
    pub fn px(&self) -> &[T] {
        &self.px
    }

    /// Marginal of `Y`.
    pub fn py(&self) -> &[T] {
        &self.py
    }

    /// Labels of `X`, if any.
    pub fn x_labels(&self) -> Option<&[String]> {
        self.x_labels.as_deref()
    }

    /// Labels of `Y`, if any.
    pub fn y_labels(&self) -> Option<&[String]> {
        self.y_labels.as_deref()
    }

    /// Joint of `(Y, X)`.
    pub fn transpose(&self) -> Self {
        Self {
            p: self.p.transpose(),
            px: self.py.clone(),
            py: self.px.clone(),
            x_labels: self.y_labels.clone(),
            y_labels: self.x_labels.clone(),
        }
    }

    /// Joint of `((X1, X2), (Y1, Y2))` for independent pairs. Symbol
    /// `(a, b)` maps to `a * |second| + b`.
    pub fn product(&self, other: &Self) -> Self {
        let p = self.p.kron(&other.p);
        let px = kron_vec(&self.px, &other.px);
        let py = kron_vec(&self.py, &other.py);
        Self {
            p,
            px,
            py,
            x_labels: None,
            y_labels: None,
        }
    }

    /// Channel `P_{Y|X}`.
    pub fn channel(&self) -> Channel<T> {
        Channel {
            w: Matrix::from_fn(self.m(), self.n(), |i, j| self.p[(i, j)] / self.px[i]),
        }
    }

    /// `E[f(X) | Y = y]` for every `y`.
    pub fn cond_expect_x(&self, f: &[T]) -> Vec<T> {
        (0..self.n())
            .map(|j| (0..self.m()).map(|i| self.p[(i, j)] * f[i]).sum::<T>() / self.py[j])
            .collect()
    }

    /// `E[g(Y) | X = x]` for every `x`.
    pub fn cond_expect_y(&self, g: &[T]) -> Vec<T> {
        (0..self.m())
            .map(|i| (0..self.n()).map(|j| self.p[(i, j)] * g[j]).sum::<T>() / self.px[i])
            .collect()
    }
}

fn kron_vec<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

impl<T: Real> Serialize for JointPmf<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JointFile {
            p: self
                .p
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(Real::as_f64).collect())
                .collect(),
            x_labels: self.x_labels.clone(),
            y_labels: self.y_labels.clone(),
        }
        .serialize(s)
    }
}

/// On-disk layout of a joint distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointFile {
    /// Row-major table, rows index `X`.
    pub p: Vec<Vec<f64>>,
    /// Optional row labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_labels: Option<Vec<String>>,
    /// Optional column labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_labels: Option<Vec<String>>,
}

impl JointFile {
    /// Validates into a joint pmf.
    pub fn into_joint<T: Real>(self) -> Result<JointPmf<T>> {
        let rows: Vec<Vec<T>> = self.p.iter().map(|r| r.iter().map(|&v| T::lit(v)).collect()).collect();
        let j = JointPmf::from_rows(&rows)?;
        match (self.x_labels, self.y_labels) {
            (None, None) => Ok(j),
            (x, y) => {
                let x = x.unwrap_or_else(|| (0..j.m()).map(|i| i.to_string()).collect());
                let y = y.unwrap_or_else(|| (0..j.n()).map(|i| i.to_string()).collect());
                j.with_labels(x, y)
            }
        }
    }
}

/// Parses the JSON distribution format `{"p": [[..]], "x_labels": .., "y_labels": ..}`.
pub fn joint_from_json<T: Real>(text: &str) -> Result<JointPmf<T>> {
    let file: JointFile = serde_json::from_str(text)?;
    file.into_joint()
}

/// Row-stochastic matrix `W(y | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<T> {
    w: Matrix<T>,
}

impl<T: Real> Channel<T> {
    /// Validates that every row is a pmf; rows within the renormalization
    /// tolerance are rescaled.
    pub fn new(mut w: Matrix<T>) -> Result<Self> {
        for i in 0..w.rows() {
            let mut row = Matrix::from_vec(1, w.cols(), w.row(i).to_vec())?;
            normalize_mass(&mut row).map_err(|e| match e {
                Error::InvalidProbability { col, value, .. } => Error::InvalidProbability { row: i, col, value },
                Error::NotNormalized(t) => Error::InvalidPmf(format!("channel row {i} sums to {t}")),
                other => other,
            })?;
            for j in 0..w.cols() {
                w[(i, j)] = row[(0, j)];
            }
        }
        Ok(Self { w })
    }

    /// Validates rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Noiseless channel on `n` symbols.
    pub fn identity(n: usize) -> Self {
        Self { w: Matrix::identity(n) }
    }

    /// Binary symmetric channel with crossover `delta`.
    pub fn bsc(delta: T) -> Result<Self> {
        let one = T::one();
        Self::from_rows(&[vec![one - delta, delta], vec![delta, one - delta]])
    }

    /// `(eps, q)` symmetric channel: keep with `1 - eps`, otherwise move
    /// uniformly to one of the other `q - 1` symbols.
    pub fn symmetric(eps: T, q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::DomainError(format!("symmetric channel needs q >= 2, got {q}")));
        }
        let off = eps / T::lit((q - 1) as f64);
        Self::new(Matrix::from_fn(q, q, |i, j| if i == j { T::one() - eps } else { off }))
    }

    /// Number of inputs.
    pub fn inputs(&self) -> usize {
        self.w.rows()
    }

    /// Number of outputs.
    pub fn outputs(&self) -> usize {
        self.w.cols()
    }

    /// Transition matrix.
    pub fn matrix(&self) -> &Matrix<T> {
        &self.w
    }

    /// `W(y | x)`.
    pub fn get(&self, x: usize, y: usize) -> T {
        self.w[(x, y)]
    }

    /// Cascade `self` then `next`.
    pub fn compose(&self, next: &Self) -> Result<Self> {
        Ok(Self {
            w: self.w.matmul(&next.w)?,
        })
    }

    /// Memoryless product of two channels.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            w: self.w.kron(&other.w),
        }
    }

    /// `n`-fold memoryless power.
    pub fn power(&self, n: usize) -> Self {
        let mut out = Self { w: Matrix::identity(1) };
        for _ in 0..n {
            out = out.kron(self);
        }
        out
    }

    /// Pointwise mixture `(1 - t) self + t other`.
    pub fn mix(&self, other: &Self, t: T) -> Result<Self> {
        if self.w.rows() != other.w.rows() || self.w.cols() != other.w.cols() {
            return Err(Error::DimensionMismatch("mixing channels of different shape".into()));
        }
        let w = Matrix::from_fn(self.w.rows(), self.w.cols(), |i, j| {
            (T::one() - t) * self.w[(i, j)] + t * other.w[(i, j)]
        });
        Ok(Self { w })
    }
}

/// Joint `p(x) W(y | x)`. Fails if an output is unreachable.
pub fn joint_from_channel<T: Real>(px: &[T], ch: &Channel<T>) -> Result<JointPmf<T>> {
    if px.len() != ch.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "{} input probabilities for a channel with {} inputs",
            px.len(),
            ch.inputs()
        )));
    }
    JointPmf::new(Matrix::from_fn(ch.inputs(), ch.outputs(), |i, j| px[i] * ch.get(i, j)))
}

/// Like [`joint_from_channel`] but drops unreachable outputs. Returns the
/// kept output indices.
pub fn joint_from_channel_restricted<T: Real>(px: &[T], ch: &Channel<T>) -> Result<(JointPmf<T>, Vec<usize>)> {
    if px.len() != ch.inputs() {
        return Err(Error::DimensionMismatch("input marginal length".into()));
    }
    let kept: Vec<usize> = (0..ch.outputs())
        .filter(|&j| (0..ch.inputs()).any(|i| px[i] * ch.get(i, j) > T::zero()))
        .collect();
    let p = Matrix::from_fn(px.len(), kept.len(), |i, k| px[i] * ch.get(i, kept[k]));
    Ok((JointPmf::new(p)?, kept))
}

/// Convex generator `f` of an f-divergence.
#[derive(Clone)]
pub enum FGenerator<T> {
    /// `x log x`, giving mutual information in the chosen base.
    Kl(LogBase),
    /// `x^2 - 1`, giving the chi-squared information.
    ChiSq,
    /// `|x - 1| / 2`, giving total variation.
    TotalVariation,
    /// User supplied convex function with `f(1) = 0`.
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T> fmt::Debug for FGenerator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FGenerator::Kl(b) => write!(f, "Kl({b:?})"),
            FGenerator::ChiSq => write!(f, "ChiSq"),
            FGenerator::TotalVariation => write!(f, "TotalVariation"),
            FGenerator::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl<T: Real> FGenerator<T> {
    /// `f(x)`.
    pub fn eval(&self, x: T) -> T {
        match self {
            FGenerator::Kl(b) => x.xlnx() / b.ln::<T>(),
            FGenerator::ChiSq => x * x - T::one(),
            FGenerator::TotalVariation => (x - T::one()).abs() / T::lit(2.0),
            FGenerator::Custom(f) => f(x),
        }
    }
}

/// Checks that `p` is a pmf within the renormalization tolerance.
pub fn validate_pmf<T: Real>(p: &[T]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidPmf("empty vector".into()));
    }
    if let Some(i) = p.iter().position(|v| !v.is_finite() || *v < T::zero()) {
        return Err(Error::InvalidPmf(format!("entry {i} is {}", p[i])));
    }
    let total: T = p.iter().copied().sum();
    if (total - T::one()).abs() > T::lit(T::RENORM_TOL) {
        return Err(Error::InvalidPmf(format!("mass {total}")));
    }
    Ok(())
}

/// Shannon entropy of a pmf.
pub fn entropy<T: Real>(p: &[T], base: LogBase) -> T {
    -p.iter().map(|&v| v.xlnx()).sum::<T>() / base.ln::<T>()
}

/// `H(X, Y)`.
pub fn joint_entropy<T: Real>(j: &JointPmf<T>, base: LogBase) -> T {
    entropy(j.table().as_slice(), base)
}

/// `H(X | Y)`.
pub fn conditional_entropy_x_given_y<T: Real>(j: &JointPmf<T>, base: LogBase) -> T {
    (joint_entropy(j, base) - entropy(j.py(), base)).max(T::zero())
}

/// `H(Y | X)`.
pub fn conditional_entropy_y_given_x<T: Real>(j: &JointPmf<T>, base: LogBase) -> T {
    (joint_entropy(j, base) - entropy(j.px(), base)).max(T::zero())
}

/// `I(X; Y)`, clamped at zero.
pub fn mutual_information<T: Real>(j: &JointPmf<T>, base: LogBase) -> T {
    let mut acc = T::zero();
    for i in 0..j.m() {
        for k in 0..j.n() {
            let p = j.get(i, k);
            if p > T::zero() {
                acc = acc + p * (p.ln() - j.px()[i].ln() - j.py()[k].ln());
            }
        }
    }
    (acc / base.ln::<T>()).max(T::zero())
}

/// Mutual information of a non-negative table of total mass one; zero rows
/// and columns are allowed.
pub fn mutual_information_table<T: Real>(p: &Matrix<T>, base: LogBase) -> T {
    let (m, n) = (p.rows(), p.cols());
    let pr: Vec<T> = (0..m).map(|i| p.row(i).iter().copied().sum()).collect();
    let pc: Vec<T> = (0..n).map(|j| (0..m).map(|i| p[(i, j)]).sum()).collect();
    let mut acc = T::zero();
    for i in 0..m {
        for j in 0..n {
            let v = p[(i, j)];
            if v > T::zero() {
                acc = acc + v * (v.ln() - pr[i].ln() - pc[j].ln());
            }
        }
    }
    (acc / base.ln::<T>()).max(T::zero())
}

/// `chi^2(X; Y) = sum p^2 / (p_X p_Y) - 1`, clamped at zero.
pub fn chi_squared<T: Real>(j: &JointPmf<T>) -> T {
    let mut acc = T::zero();
    for i in 0..j.m() {
        for k in 0..j.n() {
            let p = j.get(i, k);
            acc = acc + p * p / (j.px()[i] * j.py()[k]);
        }
    }
    (acc - T::one()).max(T::zero())
}

/// `I_f(X; Y) = D_f(P_{X,Y} || P_X P_Y)`.
pub fn f_information<T: Real>(j: &JointPmf<T>, f: &FGenerator<T>) -> Result<T> {
    let mut acc = T::zero();
    for i in 0..j.m() {
        for k in 0..j.n() {
            let q = j.px()[i] * j.py()[k];
            let v = q * f.eval(j.get(i, k) / q);
            if !v.is_finite() {
                return Err(Error::DomainError(format!(
                    "f-generator is not finite at cell ({i}, {k})"
                )));
            }
            acc = acc + v;
        }
    }
    Ok(acc)
}

/// `D(p || q)`.
pub fn kl_divergence<T: Real>(p: &[T], q: &[T], base: LogBase) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} entries", p.len(), q.len())));
    }
    let mut acc = T::zero();
    for (i, (&a, &b)) in p.iter().zip(q).enumerate() {
        if a > T::zero() {
            if b <= T::zero() {
                return Err(Error::SupportMismatch(i));
            }
            acc = acc + a * (a.ln() - b.ln());
        }
    }
    Ok((acc / base.ln::<T>()).max(T::zero()))
}

/// Empirical joint with the observed symbol values in sorted order.
#[derive(Debug, Clone)]
pub struct Empirical<T, A, B> {
    /// Relative frequencies.
    pub joint: JointPmf<T>,
    /// Distinct `X` values; row `i` is `x_values[i]`.
    pub x_values: Vec<A>,
    /// Distinct `Y` values; column `j` is `y_values[j]`.
    pub y_values: Vec<B>,
}

/// Relative frequency table of paired samples.
pub fn empirical_joint<T, A, B>(samples: &[(A, B)]) -> Result<Empirical<T, A, B>>
where
    T: Real,
    A: Ord + Clone + fmt::Display,
    B: Ord + Clone + fmt::Display,
{
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut xs: BTreeMap<A, usize> = BTreeMap::new();
    let mut ys: BTreeMap<B, usize> = BTreeMap::new();
    for (a, b) in samples {
        xs.insert(a.clone(), 0);
        ys.insert(b.clone(), 0);
    }
    for (k, v) in xs.values_mut().enumerate() {
        *v = k;
    }
    for (k, v) in ys.values_mut().enumerate() {
        *v = k;
    }
    let mut counts = vec![0usize; xs.len() * ys.len()];
    for (a, b) in samples {
        counts[xs[a] * ys.len() + ys[b]] += 1;
    }
    let total = T::lit(samples.len() as f64);
    let p = Matrix::from_vec(
        xs.len(),
        ys.len(),
        counts.iter().map(|&c| T::lit(c as f64) / total).collect(),
    )?;
    let x_values: Vec<A> = xs.into_keys().collect();
    let y_values: Vec<B> = ys.into_keys().collect();
    let joint = JointPmf::new(p)?.with_labels(
        x_values.iter().map(|v| v.to_string()).collect(),
        y_values.iter().map(|v| v.to_string()).collect(),
    )?;
    Ok(Empirical {
        joint,
        x_values,
        y_values,
    })
}

/// Reads `x,y` sample pairs from CSV.
pub fn samples_from_csv<R: std::io::Read>(reader: R, has_header: bool) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!(
                "record {} has {} fields, expected 2",
                line + 1,
                rec.len()
            )));
        }
        out.push((rec[0].to_string(), rec[1].to_string()));
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}
