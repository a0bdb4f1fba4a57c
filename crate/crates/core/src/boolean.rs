//! Exact analysis of functions on small hypercubes.
//!
//! Tables are dense: entry `i` holds the value at the point whose coordinate
//! `k` is bit `k` of `i`. Expectations are over the uniform distribution.
//!
//! The noise operator is computed through the Walsh–Hadamard basis, where it
//! damps the coefficient of each character `chi_S` by `rho^|S|`. The
//! [`reference`] module recomputes the same quantities straight from their
//! definitions in `O(4^n)` time for cross-checking.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::channel::NoiseParameter;
use crate::error::{PrcError, Result};

/// Largest dimension any dense table may have.
pub const MAX_DIMENSION: usize = 20;

/// Slack applied to every inequality check.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Opaque outcome identifier for randomized functions.
pub type Label = u32;

fn check_dimension(n: usize) -> Result<()> {
    if n > MAX_DIMENSION {
        Err(PrcError::InvalidParameter(format!(
            "dimension {n} exceeds the cap of {MAX_DIMENSION}"
        )))
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionTable {
    n: usize,
    values: Vec<f64>,
}

impl FunctionTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_dimension(n)?;
        if values.len() != 1 << n {
            return Err(PrcError::InvalidParameter(format!(
                "table of dimension {n} needs {} entries, got {}",
                1usize << n,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(PrcError::InvalidParameter(format!("non-finite table entry {v}")));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        check_dimension(n)?;
        Self::new(n, (0..1usize << n).map(f).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    /// `(-1)^{x_k}`.
    pub fn dictator(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(PrcError::InvalidParameter(format!("coordinate {k} >= n = {n}")));
        }
        Self::from_fn(n, |x| if (x >> k) & 1 == 0 { 1.0 } else { -1.0 })
    }

    /// The character `chi_S(x) = (-1)^{|x & S|}`.
    pub fn parity(n: usize, mask: usize) -> Result<Self> {
        Self::from_fn(n, |x| {
            if (x & mask).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `(E_x |f(x)|^p)^{1/p}`.
pub fn p_norm(f: &FunctionTable, p: f64) -> Result<f64> {
    if !p.is_finite() || p < 1.0 {
        return Err(PrcError::InvalidParameter(format!(
            "norm exponent p = {p} must be >= 1"
        )));
    }
    let size = f.values.len() as f64;
    if p == 1.0 {
        return Ok(f.values.iter().map(|v| v.abs()).sum::<f64>() / size);
    }
    if p == 2.0 {
        return Ok((f.values.iter().map(|v| v * v).sum::<f64>() / size).sqrt());
    }
    // Scale by the max to keep |v|^p in range for large p.
    let max = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(0.0);
    }
    let mean = f.values.iter().map(|v| (v.abs() / max).powf(p)).sum::<f64>() / size;
    Ok(max * mean.powf(1.0 / p))
}

pub fn inner_product(f: &FunctionTable, g: &FunctionTable) -> Result<f64> {
    if f.n != g.n {
        return Err(PrcError::DimensionMismatch { left: f.n, right: g.n });
    }
    let s: f64 = f.values.iter().zip(&g.values).map(|(a, b)| a * b).sum();
    Ok(s / f.values.len() as f64)
}

fn fwht_in_place(data: &mut [f64]) {
    let mut h = 1;
    while h < data.len() {
        for block in data.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Fourier coefficients `f^(S) = E_x[f(x) chi_S(x)]`, indexed by subset mask.
pub fn walsh_hadamard(f: &FunctionTable) -> FunctionTable {
    let mut data = f.values.clone();
    fwht_in_place(&mut data);
    let scale = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    FunctionTable { n: f.n, values: data }
}

/// `f(x) = sum_S f^(S) chi_S(x)`.
pub fn inverse_walsh_hadamard(coefficients: &FunctionTable) -> FunctionTable {
    let mut data = coefficients.values.clone();
    fwht_in_place(&mut data);
    FunctionTable {
        n: coefficients.n,
        values: data,
    }
}

/// `(T_rho f)(x) = E_{y ~ N_rho(x)} f(y)`, via coefficient damping.
pub fn noise_operator(f: &FunctionTable, rho: NoiseParameter) -> FunctionTable {
    let mut coeffs = walsh_hadamard(f);
    let powers: Vec<f64> = (0..=f.n).map(|k| rho.rho().powi(k as i32)).collect();
    for (mask, c) in coeffs.values.iter_mut().enumerate() {
        *c *= powers[mask.count_ones() as usize];
    }
    inverse_walsh_hadamard(&coeffs)
}

/// `||f||_{1+rho^2} - ||T_rho f||_2`, nonnegative up to round-off.
pub fn check_hypercontractivity(f: &FunctionTable, rho: NoiseParameter) -> f64 {
    let r = rho.rho();
    let lhs = p_norm(&noise_operator(f, rho), 2.0).expect("p = 2 is valid");
    let rhs = p_norm(f, 1.0 + r * r).expect("1 + rho^2 >= 1");
    rhs - lhs
}

/// A randomized function `{0,1}^n -> labels`, stored as the conditional
/// distribution of the output for every input.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomizedFunctionTable {
    n: usize,
    labels: Vec<Label>,
    /// Row-major: `mass[x * labels.len() + j] = Pr[f(x) = labels[j]]`.
    mass: Vec<f64>,
}

const ROW_TOLERANCE: f64 = 1e-12;

impl RandomizedFunctionTable {
    /// `rows[x]` lists `(label, probability)` pairs for input `x`.
    pub fn from_rows(n: usize, rows: &[Vec<(Label, f64)>]) -> Result<Self> {
        check_dimension(n)?;
        if rows.len() != 1 << n {
            return Err(PrcError::InvalidParameter(format!(
                "randomized table of dimension {n} needs {} rows, got {}",
                1usize << n,
                rows.len()
            )));
        }
        let mut labels: Vec<Label> = rows.iter().flatten().map(|&(y, _)| y).collect();
        labels.sort_unstable();
        labels.dedup();
        let k = labels.len();
        let mut mass = vec![0.0; rows.len() * k];
        for (x, row) in rows.iter().enumerate() {
            let mut total = 0.0;
            for &(y, p) in row {
                if !p.is_finite() || p < 0.0 {
                    return Err(PrcError::InvalidParameter(format!(
                        "mass {p} for label {y} at input {x}"
                    )));
                }
                let j = labels.binary_search(&y).expect("label collected above");
                mass[x * k + j] += p;
                total += p;
            }
            if (total - 1.0).abs() > ROW_TOLERANCE {
                return Err(PrcError::InvalidParameter(format!("row {x} sums to {total}, not 1")));
            }
        }
        Ok(Self { n, labels, mass })
    }

    pub fn deterministic(n: usize, f: impl Fn(usize) -> Label) -> Result<Self> {
        check_dimension(n)?;
        let rows: Vec<Vec<(Label, f64)>> = (0..1usize << n).map(|x| vec![(f(x), 1.0)]).collect();
        Self::from_rows(n, &rows)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// `x -> Pr[f(x) = y]` as a real-valued table.
    pub fn indicator(&self, y: Label) -> FunctionTable {
        let k = self.labels.len();
        let values = match self.labels.binary_search(&y) {
            Ok(j) => (0..1usize << self.n).map(|x| self.mass[x * k + j]).collect(),
            Err(_) => vec![0.0; 1 << self.n],
        };
        FunctionTable { n: self.n, values }
    }

    pub fn mass(&self, x: usize, y: Label) -> f64 {
        match self.labels.binary_search(&y) {
            Ok(j) => self.mass[x * self.labels.len() + j],
            Err(_) => 0.0,
        }
    }

    /// `Pr_x[f(x) = y]` for every label.
    pub fn label_marginals(&self) -> BTreeMap<Label, f64> {
        let k = self.labels.len();
        let size = (1usize << self.n) as f64;
        let mut out: BTreeMap<Label, f64> = self.labels.iter().map(|&y| (y, 0.0)).collect();
        for row in self.mass.chunks(k.max(1)) {
            for (j, p) in row.iter().enumerate().take(k) {
                *out.get_mut(&self.labels[j]).expect("label present") += p;
            }
        }
        out.values_mut().for_each(|v| *v /= size);
        out
    }

    /// Labels `y` with `Pr_x[f(x) = y] > 0`.
    pub fn support(&self) -> Vec<Label> {
        self.label_marginals()
            .into_iter()
            .filter(|&(_, p)| p > 0.0)
            .map(|(y, _)| y)
            .collect()
    }
}

/// Least `alpha` with `Pr_x[f(x) = y] <= alpha` for every `y` that `g` can output.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct AlphaBound(pub f64);

pub fn alpha_of(f: &RandomizedFunctionTable, g: &RandomizedFunctionTable) -> Result<AlphaBound> {
    if f.n != g.n {
        return Err(PrcError::DimensionMismatch { left: f.n, right: g.n });
    }
    let pf = f.label_marginals();
    let alpha = g
        .support()
        .iter()
        .map(|y| pf.get(y).copied().unwrap_or(0.0))
        .fold(0.0, f64::max);
    Ok(AlphaBound(alpha))
}

/// Exact `Pr[f(x~) = g(x)]` for uniform `x` and `x~ ~ N_rho(x)`, as
/// `sum_y <q_y, T_rho p_y>` over the labels `g` can output.
pub fn collision_probability(
    f: &RandomizedFunctionTable,
    g: &RandomizedFunctionTable,
    rho: NoiseParameter,
) -> Result<f64> {
    if f.n != g.n {
        return Err(PrcError::DimensionMismatch { left: f.n, right: g.n });
    }
    let mut total = 0.0;
    for y in g.support() {
        if f.labels.binary_search(&y).is_err() {
            continue;
        }
        let smoothed = noise_operator(&f.indicator(y), rho);
        total += inner_product(&g.indicator(y), &smoothed)?;
    }
    Ok(total)
}

/// `alpha^{(1/2)(1 - rho^2)/(1 + rho^2)}`.
pub fn collision_bound(alpha: AlphaBound, rho: NoiseParameter) -> f64 {
    let r2 = rho.rho() * rho.rho();
    alpha.0.powf(0.5 * (1.0 - r2) / (1.0 + r2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CollisionCheck {
    pub n: usize,
    pub rho: f64,
    pub alpha: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub fn check_collision_bound(
    f: &RandomizedFunctionTable,
    g: &RandomizedFunctionTable,
    rho: NoiseParameter,
) -> Result<CollisionCheck> {
    let lhs = collision_probability(f, g, rho)?;
    let alpha = alpha_of(f, g)?;
    let rhs = collision_bound(alpha, rho);
    Ok(CollisionCheck {
        n: f.n,
        rho: rho.rho(),
        alpha: alpha.0,
        lhs,
        rhs,
        ok: lhs <= rhs + INEQUALITY_SLACK,
    })
}

/// Definitional `O(4^n)` computations, independent of the transform path.
pub mod reference {
    use super::*;

    /// `Pr[N_rho(x) = y]`.
    pub fn transition_probability(n: usize, x: usize, y: usize, rho: NoiseParameter) -> f64 {
        let d = (x ^ y).count_ones() as i32;
        let keep = rho.keep_probability();
        keep.powi(n as i32 - d) * (1.0 - keep).powi(d)
    }

    pub fn noise_operator(f: &FunctionTable, rho: NoiseParameter) -> FunctionTable {
        let n = f.dimension();
        let values = (0..1usize << n)
            .map(|x| {
                f.values()
                    .iter()
                    .enumerate()
                    .map(|(y, v)| transition_probability(n, x, y, rho) * v)
                    .sum()
            })
            .collect();
        FunctionTable { n, values }
    }

    /// Double sum over `(x, x~)` weighted by the channel.
    pub fn collision_probability(f: &RandomizedFunctionTable, g: &RandomizedFunctionTable, rho: NoiseParameter) -> f64 {
        let n = f.dimension();
        let size = 1usize << n;
        let mut total = 0.0;
        for x in 0..size {
            for xt in 0..size {
                let w = transition_probability(n, x, xt, rho);
                let agree: f64 = g.labels().iter().map(|&y| g.mass(x, y) * f.mass(xt, y)).sum();
                total += w * agree;
            }
        }
        total / size as f64
    }

    /// The `rho = 1` collision probability `E_x sum_y Pr[f(x)=y] Pr[g(x)=y]`.
    pub fn collision_at_identity(f: &RandomizedFunctionTable, g: &RandomizedFunctionTable) -> f64 {
        let size = 1usize << f.dimension();
        let total: f64 = (0..size)
            .map(|x| g.labels().iter().map(|&y| g.mass(x, y) * f.mass(x, y)).sum::<f64>())
            .sum();
        total / size as f64
    }
}

/// Random instance generators for sweeps.
pub mod sample {
    use super::*;
    use rand_distr::{Distribution, Exp1, StandardNormal};

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        StandardNormal.sample(rng)
    }

    fn exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        Exp1.sample(rng)
    }

    /// A random real-valued table drawn from a mix of shapes: Gaussian,
    /// sparse, nonnegative heavy-tailed, low-degree, and near-constant.
    pub fn function<R: Rng + ?Sized>(n: usize, rng: &mut R) -> FunctionTable {
        let size = 1usize << n;
        let values: Vec<f64> = match rng.gen_range(0..5) {
            0 => (0..size).map(|_| standard_normal(rng)).collect(),
            1 => {
                let density = rng.gen_range(0.01..0.3);
                (0..size)
                    .map(|_| {
                        if rng.gen_bool(density) {
                            standard_normal(rng) * 3.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            2 => (0..size).map(|_| exponential(rng).powi(3)).collect(),
            3 => {
                let degree = rng.gen_range(1..=n.min(3));
                let mut coeffs = vec![0.0; size];
                for (mask, c) in coeffs.iter_mut().enumerate() {
                    if mask.count_ones() as usize <= degree {
                        *c = standard_normal(rng);
                    }
                }
                let mut t = FunctionTable { n, values: coeffs };
                t = inverse_walsh_hadamard(&t);
                t.values
            }
            _ => {
                let c = standard_normal(rng);
                (0..size).map(|_| c + 1e-3 * standard_normal(rng)).collect()
            }
        };
        FunctionTable::new(n, values).expect("generated values are finite")
    }

    /// A random randomized function with at most `max_labels` outcomes.
    ///
    /// Shapes: deterministic functions of a few coordinates, noisy versions of
    /// those, input-independent distributions, and fully random rows.
    pub fn randomized_function<R: Rng + ?Sized>(n: usize, max_labels: u32, rng: &mut R) -> RandomizedFunctionTable {
        let size = 1usize << n;
        let k = rng.gen_range(1..=max_labels.max(1));
        let rows: Vec<Vec<(Label, f64)>> = match rng.gen_range(0..4) {
            0 => {
                // Label = a few coordinates of x, folded into k labels.
                let mask = rng.gen_range(0..size);
                (0..size).map(|x| vec![(((x & mask) as u32) % k, 1.0)]).collect()
            }
            1 => {
                let mask = rng.gen_range(0..size);
                let noise = rng.gen_range(0.0..0.5);
                (0..size)
                    .map(|x| {
                        let y = ((x & mask) as u32) % k;
                        let other = (y + 1) % k;
                        if other == y {
                            vec![(y, 1.0)]
                        } else {
                            vec![(y, 1.0 - noise), (other, noise)]
                        }
                    })
                    .collect()
            }
            2 => {
                let row = random_simplex(k, rng);
                (0..size).map(|_| row.clone()).collect()
            }
            _ => (0..size).map(|_| random_simplex(k, rng)).collect(),
        };
        RandomizedFunctionTable::from_rows(n, &rows).expect("generated rows are normalized")
    }

    fn random_simplex<R: Rng + ?Sized>(k: u32, rng: &mut R) -> Vec<(Label, f64)> {
        let raw: Vec<f64> = (0..k).map(|_| exponential(rng)).collect();
        let total: f64 = raw.iter().sum();
        let mut row: Vec<(Label, f64)> = raw.iter().enumerate().map(|(y, w)| (y as Label, w / total)).collect();
        // Renormalize the last entry so the row sums to 1 within round-off.
        let head: f64 = row[..row.len() - 1].iter().map(|(_, p)| p).sum();
        row.last_mut().expect("k >= 1").1 = (1.0 - head).max(0.0);
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rho(v: f64) -> NoiseParameter {
        NoiseParameter::new(v).unwrap()
    }

    #[test]
    fn norms_of_simple_functions() {
        let c = FunctionTable::constant(3, -2.5).unwrap();
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert!((p_norm(&c, p).unwrap() - 2.5).abs() < 1e-12);
        }
        let point = FunctionTable::new(2, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((p_norm(&point, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(p_norm(&point, 0.5).is_err());
    }

    #[test]
    fn p_norm_one_matches_plain_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = sample::function(6, &mut rng);
        let mut acc = 0.0;
        for v in f.values() {
            acc += v.abs();
        }
        assert!((p_norm(&f, 1.0).unwrap() - acc / 64.0).abs() < 1e-12);
    }

    #[test]
    fn inner_products() {
        let one = FunctionTable::constant(4, 1.0).unwrap();
        assert_eq!(inner_product(&one, &one).unwrap(), 1.0);
        for n in 1..6 {
            let chi = FunctionTable::parity(n, (1 << n) - 1).unwrap();
            assert_eq!(inner_product(&chi, &chi).unwrap(), 1.0);
        }
        let a = FunctionTable::dictator(2, 0).unwrap();
        let b = FunctionTable::dictator(2, 1).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), 0.0);
        assert!(matches!(
            inner_product(&a, &one),
            Err(PrcError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn walsh_hadamard_basics() {
        let one = walsh_hadamard(&FunctionTable::constant(3, 1.0).unwrap());
        assert_eq!(one.values()[0], 1.0);
        assert!(one.values()[1..].iter().all(|&c| c == 0.0));
        let d = walsh_hadamard(&FunctionTable::dictator(4, 2).unwrap());
        for (mask, &c) in d.values().iter().enumerate() {
            assert_eq!(c, if mask == 0b100 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn walsh_hadamard_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = sample::function(8, &mut rng);
        let back = inverse_walsh_hadamard(&walsh_hadamard(&f));
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn noise_operator_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = sample::function(5, &mut rng);
        let same = noise_operator(&f, rho(1.0));
        for (a, b) in f.values().iter().zip(same.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let flat = noise_operator(&f, rho(0.0));
        assert!(flat.values().iter().all(|v| (v - f.mean()).abs() < 1e-12));

        let step = FunctionTable::new(1, vec![0.0, 1.0]).unwrap();
        let t = noise_operator(&step, rho(0.5));
        assert!((t.values()[0] - 0.25).abs() < 1e-15);
        assert!((t.values()[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn noise_operator_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=7 {
            for r in [0.0, 0.3, 0.5, 0.9, 1.0] {
                let f = sample::function(n, &mut rng);
                let fast = noise_operator(&f, rho(r));
                let slow = reference::noise_operator(&f, rho(r));
                for (a, b) in fast.values().iter().zip(slow.values()) {
                    assert!((a - b).abs() < 1e-10, "n={n} rho={r}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn hypercontractivity_examples() {
        let one = FunctionTable::constant(4, 1.0).unwrap();
        for r in [0.0, 0.4, 1.0] {
            assert!(check_hypercontractivity(&one, rho(r)).abs() < 1e-12);
        }
        let d = FunctionTable::dictator(3, 1).unwrap();
        let t = noise_operator(&d, rho(0.5));
        assert!((p_norm(&t, 2.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((p_norm(&d, 1.25).unwrap() - 1.0).abs() < 1e-12);
        assert!((check_hypercontractivity(&d, rho(0.5)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn alpha_examples() {
        let id = RandomizedFunctionTable::deterministic(3, |x| x as Label).unwrap();
        assert_eq!(alpha_of(&id, &id).unwrap().0, 1.0 / 8.0);
        let c = RandomizedFunctionTable::deterministic(3, |_| 7).unwrap();
        assert_eq!(alpha_of(&c, &c).unwrap().0, 1.0);
        let rows: Vec<Vec<(Label, f64)>> = (0..8).map(|_| (0..4).map(|y| (y, 0.25)).collect()).collect();
        let u = RandomizedFunctionTable::from_rows(3, &rows).unwrap();
        assert!((alpha_of(&u, &u).unwrap().0 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized_rows() {
        let rows = vec![vec![(0, 0.5)], vec![(0, 1.0)]];
        assert!(RandomizedFunctionTable::from_rows(1, &rows).is_err());
        let rows = vec![vec![(0, -0.5), (1, 1.5)], vec![(0, 1.0)]];
        assert!(RandomizedFunctionTable::from_rows(1, &rows).is_err());
    }

    #[test]
    fn collision_examples() {
        let id = RandomizedFunctionTable::deterministic(2, |x| x as Label).unwrap();
        let p = collision_probability(&id, &id, rho(0.5)).unwrap();
        assert!((p - 0.5625).abs() < 1e-12);
        let check = check_collision_bound(&id, &id, rho(0.5)).unwrap();
        assert_eq!(check.alpha, 0.25);
        assert!((check.rhs - 2f64.powf(-0.6)).abs() < 1e-12);
        assert!(check.ok);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lab = RandomizedFunctionTable::deterministic(4, |x| (x * 7 % 5) as Label).unwrap();
        assert!((collision_probability(&lab, &lab, rho(1.0)).unwrap() - 1.0).abs() < 1e-12);

        // rho = 0 with g constant y0: Pr_x[f(x) = y0].
        let f = sample::randomized_function(4, 3, &mut rng);
        let g = RandomizedFunctionTable::deterministic(4, |_| 1).unwrap();
        let expected = f.label_marginals().get(&1).copied().unwrap_or(0.0);
        assert!((collision_probability(&f, &g, rho(0.0)).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn collision_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let n = rng.gen_range(1..=6);
            let f = sample::randomized_function(n, 6, &mut rng);
            let g = sample::randomized_function(n, 6, &mut rng);
            for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let fast = collision_probability(&f, &g, rho(r)).unwrap();
                let slow = reference::collision_probability(&f, &g, rho(r));
                assert!((fast - slow).abs() < 1e-10, "{fast} vs {slow}");
            }
            let at_one = collision_probability(&f, &g, rho(1.0)).unwrap();
            assert!((at_one - reference::collision_at_identity(&f, &g)).abs() < 1e-10);
        }
    }

    #[test]
    fn dimension_cap_enforced() {
        assert!(FunctionTable::from_fn(MAX_DIMENSION + 1, |_| 0.0).is_err());
    }
}
