//! 7-point Gauss / 15-point Kronrod pair, generated at any precision.
//!
//! Gauss nodes are polished by Newton iteration on the Legendre polynomial
//! P7. Kronrod nodes are the roots of the Stieltjes polynomial E8, whose
//! coefficients are found in exact rational arithmetic. Weights follow from
//! the moment equations, solved at extra guard precision.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cplx::Cplx;
use crate::real::{BigReal, Real};

const GAUSS_POINTS: usize = 7;
const GUARD_BITS: usize = 64;

/// Double-precision abscissae, used only as Newton seeds.
const SEED_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

/// Abscissae and weights on [-1, 1], stored for the non-negative half.
///
/// `nodes[1]`, `nodes[3]`, `nodes[5]`, `nodes[7]` are the Gauss nodes and
/// `gauss_weights` are indexed accordingly.
#[derive(Debug, Clone)]
pub struct GaussKronrod15<R> {
    pub nodes: Vec<R>,
    pub kronrod_weights: Vec<R>,
    pub gauss_weights: Vec<R>,
}

impl<R: Real> GaussKronrod15<R> {
    pub fn new(ctx: R::Context) -> Self {
        let bits = R::precision_bits(ctx) + GUARD_BITS;
        let master = cached_rule(bits);
        let conv = |v: &Vec<BigReal>| v.iter().map(|x| R::from_big(ctx, x)).collect::<Vec<R>>();
        GaussKronrod15 {
            nodes: conv(&master.nodes),
            kronrod_weights: conv(&master.kronrod_weights),
            gauss_weights: conv(&master.gauss_weights),
        }
    }

    /// Returns the (Kronrod, Gauss) estimates of the integral over [a, b].
    pub fn apply<F>(&self, f: &F, a: &R, b: &R) -> (Cplx<R>, Cplx<R>)
    where
        F: Fn(&R) -> Cplx<R>,
    {
        let half = R::from_f64(a.context(), 0.5);
        let center = (a.clone() + b.clone()) * half.clone();
        let half_len = (b.clone() - a.clone()) * half;

        let fc = f(&center);
        let mut resk = fc.scale(&self.kronrod_weights[7]);
        let mut resg = fc.scale(&self.gauss_weights[3]);
        for j in 0..7 {
            let dx = half_len.clone() * self.nodes[j].clone();
            let sum = f(&(center.clone() - dx.clone())) + f(&(center.clone() + dx));
            resk = resk + sum.scale(&self.kronrod_weights[j]);
            if j % 2 == 1 {
                resg = resg + sum.scale(&self.gauss_weights[j / 2]);
            }
        }
        (resk.scale(&half_len), resg.scale(&half_len))
    }
}

fn cached_rule(bits: usize) -> Arc<GaussKronrod15<BigReal>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussKronrod15<BigReal>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&bits) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build_rule(bits));
    cache.lock().expect("rule cache poisoned").insert(bits, Arc::clone(&rule));
    rule
}

fn build_rule(bits: usize) -> GaussKronrod15<BigReal> {
    let ctx = crate::real::Bits(bits);
    let stieltjes: Vec<BigReal> = stieltjes_coefficients()
        .iter()
        .map(|c| BigReal::from_ratio(bits, c))
        .collect();

    let mut nodes = Vec::with_capacity(8);
    for (i, &seed) in SEED_NODES.iter().enumerate() {
        let x = if seed == 0.0 {
            BigReal::zero(ctx)
        } else if i % 2 == 1 {
            newton(BigReal::from_f64(ctx, seed), |x| legendre_with_derivative(GAUSS_POINTS, x))
        } else {
            newton(BigReal::from_f64(ctx, seed), |x| poly_with_derivative(&stieltjes, x))
        };
        nodes.push(x);
    }

    let gauss_weights = nodes
        .iter()
        .skip(1)
        .step_by(2)
        .map(|x| {
            let (_, dp) = legendre_with_derivative(GAUSS_POINTS, x);
            let one = BigReal::one(ctx);
            BigReal::from_f64(ctx, 2.0) / ((one - x.clone() * x.clone()) * dp.clone() * dp)
        })
        .collect();

    let kronrod_weights = moment_weights(&nodes);
    GaussKronrod15 { nodes, kronrod_weights, gauss_weights }
}

fn newton<F>(mut x: BigReal, f: F) -> BigReal
where
    F: Fn(&BigReal) -> (BigReal, BigReal),
{
    let eps = 2f64.powi(-(x.bits() as i32) + 4);
    for _ in 0..64 {
        let (p, dp) = f(&x);
        let dx = p / dp;
        let done = dx.to_f64().abs() <= eps;
        x = x - dx;
        if done {
            break;
        }
    }
    x
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
pub(crate) fn legendre_with_derivative<R: Real>(n: usize, x: &R) -> (R, R) {
    let ctx = x.context();
    let mut p0 = R::one(ctx);
    let mut p1 = x.clone();
    if n == 0 {
        return (p0, R::zero(ctx));
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((x.clone() * p1.clone()).mul_f64(2.0 * kf + 1.0) - p0.mul_f64(kf)) / R::from_f64(ctx, kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let one = R::one(ctx);
    let dp = (x.clone() * p1.clone() - p0).mul_f64(n as f64) / (x.clone() * x.clone() - one);
    (p1, dp)
}

/// Monic polynomial given by coefficients of x^0, x^1, ... (leading one implied).
fn poly_with_derivative(coeffs: &[BigReal], x: &BigReal) -> (BigReal, BigReal) {
    let ctx = crate::real::Bits(x.bits());
    let mut p = BigReal::one(ctx);
    let mut dp = BigReal::zero(ctx);
    for c in coeffs.iter().rev() {
        dp = dp * x.clone() + p.clone();
        p = p * x.clone() + c.clone();
    }
    (p, dp)
}

/// Legendre P_n in the monomial basis, exact.
fn legendre_monomial(n: usize) -> Vec<BigRational> {
    let zero = BigRational::zero();
    let mut p0 = vec![BigRational::one()];
    let mut p1 = vec![zero.clone(), BigRational::one()];
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kk = BigRational::from_integer(BigInt::from(k));
        let a = BigRational::from_integer(BigInt::from(2 * k + 1)) / (kk.clone() + BigRational::one());
        let b = kk.clone() / (kk + BigRational::one());
        let mut p2 = vec![zero.clone(); k + 2];
        for (i, c) in p1.iter().enumerate() {
            p2[i + 1] += a.clone() * c;
        }
        for (i, c) in p0.iter().enumerate() {
            p2[i] -= b.clone() * c;
        }
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Coefficients (x^0 .. x^7) of the monic Stieltjes polynomial E8.
///
/// E8 = x^8 + c6 x^6 + c4 x^4 + c2 x^2 + c0 is fixed by
/// integral(P7 E8 x^j, -1..1) = 0 for j = 1, 3, 5, 7.
fn stieltjes_coefficients() -> Vec<BigRational> {
    let p = legendre_monomial(GAUSS_POINTS);
    // integral of P7(x) x^m over [-1, 1]
    let moment = |m: usize| -> BigRational {
        p.iter().enumerate().fold(BigRational::zero(), |acc, (i, c)| {
            if (i + m).is_multiple_of(2) {
                acc + c.clone() * BigRational::new(BigInt::from(2), BigInt::from(i + m + 1))
            } else {
                acc
            }
        })
    };
    let unknown_powers = [0usize, 2, 4, 6];
    let rows = [1usize, 3, 5, 7];
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|&j| {
            let mut row: Vec<BigRational> = unknown_powers.iter().map(|&q| moment(q + j)).collect();
            row.push(-moment(8 + j));
            row
        })
        .collect();
    let sol = solve_rational(&mut a);
    let mut coeffs = vec![BigRational::zero(); 8];
    for (q, c) in unknown_powers.iter().zip(sol) {
        coeffs[*q] = c;
    }
    coeffs
}

/// Gauss-Jordan on an augmented matrix with exact arithmetic.
fn solve_rational(a: &mut [Vec<BigRational>]) -> Vec<BigRational> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).expect("singular Stieltjes system");
        a.swap(col, pivot);
        let inv = BigRational::one() / a[col][col].clone();
        for c in col..=n {
            a[col][c] = a[col][c].clone() * inv.clone();
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=n {
                    let sub = factor.clone() * a[col][c].clone();
                    a[r][c] -= sub;
                }
            }
        }
    }
    a.iter().map(|row| row[n].clone()).collect()
}

/// Interpolatory weights on the symmetric 15-node set from the even moments.
fn moment_weights(nodes: &[BigReal]) -> Vec<BigReal> {
    let bits = nodes[0].bits();
    let ctx = crate::real::Bits(bits);
    let n = nodes.len();
    let mut a: Vec<Vec<BigReal>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut row = Vec::with_capacity(n + 1);
        for x in nodes {
            let mult = if x.is_zero() { 1.0 } else { 2.0 };
            let mut pow = BigReal::one(ctx);
            for _ in 0..(2 * k) {
                pow = pow * x.clone();
            }
            row.push(pow.mul_f64(mult));
        }
        row.push(BigReal::from_f64(ctx, 2.0) / BigReal::from_f64(ctx, (2 * k + 1) as f64));
        a.push(row);
    }
    // partial pivoting elimination
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .to_f64()
                    .abs()
                    .partial_cmp(&a[j][col].to_f64().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty");
        a.swap(col, pivot);
        for r in (col + 1)..n {
            let factor = a[r][col].clone() / a[col][col].clone();
            for c in col..=n {
                let sub = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - sub;
            }
        }
    }
    let mut w = vec![BigReal::zero(ctx); n];
    for r in (0..n).rev() {
        let mut acc = a[r][n].clone();
        for c in (r + 1)..n {
            acc = acc - a[r][c].clone() * w[c].clone();
        }
        w[r] = acc / a[r][r].clone();
    }
    w
}
