//! Random instances for property tests.

use rand::Rng;
use rand_distr::Exp1;

use super::matrix_order_geq;
use crate::model::{BeliefState, Matrix};

fn exp_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect()
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

fn sorted_uniform<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Row-stochastic matrix with uniform-simplex rows.
pub fn random_stochastic<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let mut r = exp_vec(cols, rng);
        normalize(&mut r);
        data.extend(r);
    }
    Matrix::new(rows, cols, data).expect("shape")
}

/// Positive row-stochastic TP2 matrix.
///
/// Entries `w_j exp(s_i t_j)` with `s` and `t` increasing form a TP2 kernel;
/// normalizing rows keeps every minor's sign.
pub fn random_tp2<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let spread = rng.random_range(0.2..3.0);
    let s = sorted_uniform(rows, -spread, spread, rng);
    let t = sorted_uniform(cols, -1.0, 1.0, rng);
    let w = exp_vec(cols, rng);
    let mut data = Vec::with_capacity(rows * cols);
    for si in &s {
        let mut r: Vec<f64> = t
            .iter()
            .zip(&w)
            .map(|(tj, wj)| (wj + 1e-3) * (si * tj).exp())
            .collect();
        normalize(&mut r);
        data.extend(r);
    }
    Matrix::new(rows, cols, data).expect("shape")
}

/// TP2 transition matrix whose first row is the absorbing unit vector.
pub fn random_absorbing_tp2<R: Rng + ?Sized>(x: usize, rng: &mut R) -> Matrix {
    let block = random_tp2(x - 1, x, rng);
    let mut m = Matrix::zeros(x, x);
    m.set(0, 0, 1.0);
    for i in 1..x {
        for j in 0..x {
            m.set(i, j, block.get(i - 1, j));
        }
    }
    m
}

/// Stochastic matrix with absorbing first row and uniform-simplex other rows.
pub fn random_absorbing<R: Rng + ?Sized>(x: usize, rng: &mut R) -> Matrix {
    let rest = random_stochastic(x - 1, x, rng);
    let mut m = Matrix::zeros(x, x);
    m.set(0, 0, 1.0);
    for i in 1..x {
        for j in 0..x {
            m.set(i, j, rest.get(i - 1, j));
        }
    }
    m
}

pub fn random_belief<R: Rng + ?Sized>(x: usize, rng: &mut R) -> BeliefState {
    crate::model::dirichlet_uniform_sample(x, rng)
}

/// Pair `(hi, lo)` with `hi ≥_r lo`, obtained by tilting `lo` with an
/// increasing positive ratio.
pub fn random_mlr_pair<R: Rng + ?Sized>(x: usize, rng: &mut R) -> (BeliefState, BeliefState) {
    let lo = random_belief(x, rng);
    let mut ratio = Vec::with_capacity(x);
    let mut acc = rng.random_range(0.01..1.0);
    for _ in 0..x {
        ratio.push(acc);
        acc += rng.sample::<f64, _>(Exp1);
    }
    let hi: Vec<f64> = lo.probs().iter().zip(&ratio).map(|(p, r)| p * r).collect();
    (BeliefState::normalized(hi).expect("positive mass"), lo)
}

/// Pair `(P1, P2)` with `P1 ⪰ P2` in the transition-matrix order.
///
/// `P2` has near-identical rows and `P1` tilts each of them towards higher
/// states; candidates are rejected until the order holds.
pub fn random_ordered_transitions<R: Rng + ?Sized>(x: usize, rng: &mut R) -> (Matrix, Matrix) {
    loop {
        let mut base = exp_vec(x, rng);
        normalize(&mut base);
        let noise = rng.random_range(0.0..0.3);
        let kappa = rng.random_range(0.2..3.0);
        let t = sorted_uniform(x, 0.0, 1.0, rng);
        let mut p1 = Vec::with_capacity(x * x);
        let mut p2 = Vec::with_capacity(x * x);
        for _ in 0..x {
            let mut r2: Vec<f64> = base
                .iter()
                .map(|b| b * (1.0 + noise * rng.random_range(-1.0..1.0)))
                .collect();
            normalize(&mut r2);
            let mut r1: Vec<f64> = r2.iter().zip(&t).map(|(p, tj)| p * (kappa * tj).exp()).collect();
            normalize(&mut r1);
            p1.extend(r1);
            p2.extend(r2);
        }
        let p1 = Matrix::new(x, x, p1).expect("shape");
        let p2 = Matrix::new(x, x, p2).expect("shape");
        if matrix_order_geq(&p1, &p2).unwrap_or(false) {
            return (p1, p2);
        }
    }
}
