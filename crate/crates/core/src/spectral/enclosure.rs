use num_integer::Integer;

use super::scc::{period, scc_condense, SccDecomposition};
use super::{SpectralError, TransitionMatrix};
use crate::scalar::{partial_max, partial_min, Scalar};

/// Iteration cap for power iteration.
pub const MAX_ITERATIONS: usize = 100_000;

const CHECK_EVERY: usize = 10;
const STALL_CHECKS: usize = 200;
const ROUNDING_BITS: u32 = 64;

/// Interval `[lower, upper]` containing the Perron–Frobenius eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEnclosure<W> {
    pub lower: W,
    pub upper: W,
    pub period: usize,
    /// Positive vector whose Collatz–Wielandt quotients give the bounds.
    /// Empty for enclosures assembled from several diagonal blocks.
    pub witness: Vec<W>,
    pub iterations: usize,
    /// False when the iteration cap was hit before reaching the tolerance.
    pub converged: bool,
}

impl<W: Scalar> SpectralEnclosure<W> {
    pub fn exact(value: W) -> Self {
        Self { lower: value.clone(), upper: value, period: 1, witness: vec![W::one()], iterations: 0, converged: true }
    }

    pub fn width(&self) -> W {
        self.upper.clone() - self.lower.clone()
    }

    pub fn midpoint(&self) -> W {
        (self.lower.clone() + self.upper.clone()) / (W::one() + W::one())
    }

    pub fn contains(&self, x: &W) -> bool {
        self.lower <= *x && *x <= self.upper
    }

    /// `upper - lower <= tol * lower` (a zero-width interval always passes).
    pub fn within(&self, tol: &W) -> bool {
        self.width() <= tol.clone() * self.lower.clone()
    }
}

/// Perron–Frobenius enclosure of an irreducible nonzero block.
///
/// A float power iteration on `A + I` (the shift removes the other
/// eigenvalues of maximal modulus of a periodic block) proposes a positive
/// vector `x`; the bounds are then the exact quotients
/// `min_i (Ax)_i / x_i <= ρ <= max_i (Ax)_i / x_i`, rounded outward to a
/// dyadic grid when the scalar type is exact.
pub fn pf_enclosure<W: Scalar>(block: &TransitionMatrix<W>, tol: &W) -> Result<SpectralEnclosure<W>, SpectralError> {
    if !tol.is_positive() {
        return Err(SpectralError::BadTolerance);
    }
    let n = block.dim();
    if n == 0 {
        return Err(SpectralError::NotIrreducible);
    }
    if block.is_zero() {
        return Err(SpectralError::ZeroBlock);
    }
    if scc_condense(block).len() != 1 {
        return Err(SpectralError::NotIrreducible);
    }
    let h = period(block)?;
    if n == 1 {
        return Ok(SpectralEnclosure { period: h, ..SpectralEnclosure::exact(block.get(0, 0)) });
    }

    let rows = block.float_rows();
    let tol_f = tol.to_f64();
    let float_target = (tol_f / 8.0).min(1e-13);
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    let mut iterations = 0;
    let mut best_float_width = f64::INFINITY;
    let mut stalled = 0;
    let mut certify_below = float_target;

    loop {
        let width = float_relative_width(&rows, &x);
        if width < best_float_width {
            best_float_width = width;
            stalled = 0;
        } else {
            stalled += 1;
        }
        let stagnant = stalled >= STALL_CHECKS;
        let capped = iterations >= MAX_ITERATIONS;
        if width <= certify_below || stagnant || capped {
            let mut enc = certify(block, &x, h, iterations)?;
            if enc.within(tol) {
                return Ok(enc);
            }
            if stagnant || capped {
                enc.converged = false;
                return Ok(enc);
            }
            // the float estimate was optimistic; iterate further before
            // paying for another exact check
            certify_below = width / 4.0;
        }
        for _ in 0..CHECK_EVERY {
            shifted_step(&rows, &x, &mut y);
            std::mem::swap(&mut x, &mut y);
        }
        iterations += CHECK_EVERY;
    }
}

/// `y = (A + I) x`, normalized to max 1.
fn shifted_step(rows: &[Vec<(usize, f64)>], x: &[f64], y: &mut [f64]) {
    let mut max = 0.0f64;
    for (i, r) in rows.iter().enumerate() {
        let v = x[i] + r.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
        y[i] = v;
        max = max.max(v);
    }
    if max > 0.0 {
        for v in y.iter_mut() {
            *v /= max;
        }
    }
}

fn float_relative_width(rows: &[Vec<(usize, f64)>], x: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (i, r) in rows.iter().enumerate() {
        if x[i] <= 0.0 {
            return f64::INFINITY;
        }
        let q = r.iter().map(|&(j, a)| a * x[j]).sum::<f64>() / x[i];
        lo = lo.min(q);
        hi = hi.max(q);
    }
    if lo > 0.0 {
        (hi - lo) / lo
    } else {
        f64::INFINITY
    }
}

/// Exact Collatz–Wielandt bounds for the positive vector nearest `x`.
fn certify<W: Scalar>(
    block: &TransitionMatrix<W>,
    x: &[f64],
    period: usize,
    iterations: usize,
) -> Result<SpectralEnclosure<W>, SpectralError> {
    let witness: Vec<W> = x
        .iter()
        .map(|&v| {
            let v = if v.is_finite() && v >= f64::MIN_POSITIVE { v } else { f64::MIN_POSITIVE };
            W::from_f64(v).ok_or(SpectralError::NumericFailure)
        })
        .collect::<Result<_, _>>()?;
    let ax = block.mul_vec(&witness);
    let mut lower: Option<W> = None;
    let mut upper: Option<W> = None;
    for (num, den) in ax.into_iter().zip(&witness) {
        let q = num / den.clone();
        lower = Some(match lower {
            Some(l) => partial_min(&l, &q),
            None => q.clone(),
        });
        upper = Some(match upper {
            Some(u) => partial_max(&u, &q),
            None => q,
        });
    }
    let (lower, upper) = (lower.ok_or(SpectralError::NumericFailure)?, upper.ok_or(SpectralError::NumericFailure)?);
    let (lower, upper) = if W::EXACT {
        (lower.round_down(ROUNDING_BITS), upper.round_up(ROUNDING_BITS))
    } else {
        (lower, upper)
    };
    let lower = partial_max(&lower, &W::zero());
    Ok(SpectralEnclosure { lower, upper, period, witness, iterations, converged: true })
}

/// Spectral radius of an arbitrary non-negative matrix with its SCC
/// structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAnalysis<W> {
    pub enclosure: SpectralEnclosure<W>,
    pub decomposition: SccDecomposition,
    /// One enclosure per diagonal block, aligned with `decomposition.blocks`.
    pub block_enclosures: Vec<SpectralEnclosure<W>>,
}

/// `ρ_A = max_i ρ_{B_i}` over the diagonal blocks of the SCC condensation.
///
/// The reported period is the lcm of the periods of the maximal blocks.
pub fn spectral_radius<W: Scalar>(a: &TransitionMatrix<W>, tol: &W) -> Result<SpectralAnalysis<W>, SpectralError> {
    if !tol.is_positive() {
        return Err(SpectralError::BadTolerance);
    }
    let mut decomposition = scc_condense(a);
    let mut block_enclosures = Vec::with_capacity(decomposition.len());
    for (b, states) in decomposition.blocks.iter().enumerate() {
        let enc = if decomposition.is_trivial(a, b) {
            SpectralEnclosure { witness: vec![W::one()], ..SpectralEnclosure::exact(W::zero()) }
        } else {
            pf_enclosure(&a.submatrix(states), tol)?
        };
        block_enclosures.push(enc);
    }
    if block_enclosures.is_empty() {
        let enclosure = SpectralEnclosure { witness: Vec::new(), ..SpectralEnclosure::exact(W::zero()) };
        return Ok(SpectralAnalysis { enclosure, decomposition, block_enclosures });
    }
    let lower = block_enclosures.iter().skip(1).fold(block_enclosures[0].lower.clone(), |m, e| partial_max(&m, &e.lower));
    let upper = block_enclosures.iter().skip(1).fold(block_enclosures[0].upper.clone(), |m, e| partial_max(&m, &e.upper));
    decomposition.maximal_blocks = block_enclosures
        .iter()
        .enumerate()
        .filter(|(_, e)| e.upper >= lower)
        .map(|(b, _)| b)
        .collect();
    let period = decomposition
        .maximal_blocks
        .iter()
        .filter(|&&b| !decomposition.is_trivial(a, b))
        .fold(1usize, |acc, &b| acc.lcm(&block_enclosures[b].period));
    let enclosure = if block_enclosures.len() == 1 {
        block_enclosures[0].clone()
    } else {
        SpectralEnclosure {
            lower,
            upper,
            period,
            witness: Vec::new(),
            iterations: block_enclosures.iter().map(|e| e.iterations).sum(),
            converged: block_enclosures.iter().all(|e| e.converged),
        }
    };
    Ok(SpectralAnalysis { enclosure, decomposition, block_enclosures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn dense(rows: &[&[i64]]) -> TransitionMatrix<Rational> {
        TransitionMatrix::from_dense(rows.iter().map(|r| r.iter().map(|&x| q(x, 1)).collect()).collect()).unwrap()
    }

    fn tol() -> Rational {
        q(1, 1_000_000_000)
    }

    /// Bisection root of x² - x - 1 on [1, 2] with rational endpoints.
    fn golden_ratio_bracket() -> (Rational, Rational) {
        let (mut lo, mut hi) = (q(1, 1), q(2, 1));
        for _ in 0..60 {
            let mid = (&lo + &hi) / q(2, 1);
            if &mid * &mid - &mid - q(1, 1) < q(0, 1) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    }

    #[test]
    fn one_by_one_is_exact() {
        let e = pf_enclosure(&dense(&[&[3]]), &tol()).unwrap();
        assert_eq!(e.lower, q(3, 1));
        assert_eq!(e.upper, q(3, 1));
    }

    #[test]
    fn fibonacci_encloses_golden_ratio() {
        let e = pf_enclosure(&dense(&[&[1, 1], &[1, 0]]), &tol()).unwrap();
        let (lo, hi) = golden_ratio_bracket();
        assert!(e.lower <= lo && hi <= e.upper, "{} {}", e.lower, e.upper);
        assert!(e.width() <= q(1, 1_000_000_000));
        assert!(e.witness.iter().all(|w| *w > q(0, 1)));
        assert_eq!(e.period, 1);
    }

    #[test]
    fn periodic_cycle_converges_via_shift() {
        let e = pf_enclosure(&dense(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]), &tol()).unwrap();
        assert_eq!((e.lower.clone(), e.upper.clone()), (q(1, 1), q(1, 1)));
        assert_eq!(e.period, 3);
    }

    #[test]
    fn errors() {
        assert_eq!(pf_enclosure(&dense(&[&[0]]), &tol()), Err(SpectralError::ZeroBlock));
        assert_eq!(pf_enclosure(&dense(&[&[1, 1], &[0, 1]]), &tol()), Err(SpectralError::NotIrreducible));
        assert_eq!(pf_enclosure(&dense(&[&[1]]), &q(0, 1)), Err(SpectralError::BadTolerance));
    }

    #[test]
    fn radius_is_max_over_blocks() {
        let a = dense(&[&[2, 0], &[0, 3]]);
        let s = spectral_radius(&a, &tol()).unwrap();
        assert_eq!(s.enclosure.lower, q(3, 1));
        assert_eq!(s.enclosure.upper, q(3, 1));
        assert_eq!(s.decomposition.maximal_blocks.len(), 1);
        let z = spectral_radius(&dense(&[&[0, 0], &[0, 0]]), &tol()).unwrap();
        assert_eq!((z.enclosure.lower, z.enclosure.upper), (q(0, 1), q(0, 1)));
    }

    #[test]
    fn float_scalar_runs_the_same_pipeline() {
        let a = TransitionMatrix::from_dense(vec![vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = pf_enclosure(&a, &1e-9).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((e.midpoint() - phi).abs() < 1e-9);
    }
}
