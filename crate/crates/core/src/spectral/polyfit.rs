//! Empirical check of the census law `w(L_n) ≈ π_s(n) ρⁿ` on each residue
//! class `s` modulo the period.
//!
//! The normalized census `c_n = w(L_n) / ρ̂ⁿ` (with `ρ̂` the enclosure
//! midpoint) is computed exactly, then finite-differenced within each residue
//! class. The estimated degree is the smallest `d` whose `(d+1)`-th
//! differences vanish or decay geometrically; those differences are the
//! reported residuals.

use serde::Serialize;

use super::{SpectralEnclosure, SpectralError};
use crate::automaton::CensusTable;
use crate::scalar::Scalar;

const MAX_DEGREE: usize = 4;
/// Ratio above which a residual sequence no longer counts as geometric decay.
const DECAY_CEILING: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidueFit {
    pub residue: usize,
    pub degree: usize,
    pub leading_coefficient: f64,
    /// `|Δ^{degree+1} c|` along the class, in increasing `n`.
    pub residuals: Vec<f64>,
    /// Largest ratio between consecutive residuals above the noise floor.
    pub decay_factor: Option<f64>,
    /// Residuals shrink by at least a constant factor per step (or sit
    /// below the noise floor).
    pub decaying: bool,
    pub noise_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyFitReport {
    pub period: usize,
    pub window: (usize, usize),
    pub classes: Vec<ResidueFit>,
}

/// Fit over the last two thirds of the census.
pub fn polyexp_fit<W: Scalar>(census: &CensusTable<W>, rho: &SpectralEnclosure<W>) -> Result<PolyFitReport, SpectralError> {
    let n = census.len();
    polyexp_fit_window(census, rho, n / 3, n.saturating_sub(1))
}

/// Fit using lengths `start..=end` only.
pub fn polyexp_fit_window<W: Scalar>(
    census: &CensusTable<W>,
    rho: &SpectralEnclosure<W>,
    start: usize,
    end: usize,
) -> Result<PolyFitReport, SpectralError> {
    let h = rho.period.max(1);
    if census.len() < 6 * h || end >= census.len() || end < start || (end - start + 1) < 3 * h {
        return Err(SpectralError::InsufficientData { have: census.len(), need: (6 * h).max(end + 1) });
    }
    let rho_hat = rho.midpoint();
    if !rho_hat.is_positive() {
        return Err(SpectralError::ZeroRadius);
    }
    let rel_width = if rho.lower.is_positive() { (rho.width() / rho.lower.clone()).to_f64() } else { f64::INFINITY };

    // c_n = w_n / ρ̂ⁿ for n in the window
    let mut power = W::one();
    for _ in 0..start {
        power = power * rho_hat.clone();
    }
    let mut normalized = Vec::with_capacity(end - start + 1);
    for n in start..=end {
        normalized.push(census.per_length[n].clone() / power.clone());
        power = power * rho_hat.clone();
    }

    let mut classes = Vec::with_capacity(h);
    for s in 0..h {
        let first = start + (s + h - start % h) % h;
        let seq: Vec<W> = (first..=end).step_by(h).map(|n| normalized[n - start].clone()).collect();
        classes.push(fit_class(s, &seq, end, h, rel_width));
    }
    if !classes.iter().any(|c| c.leading_coefficient.abs() > c.noise_floor) {
        return Err(SpectralError::VanishingFit);
    }
    Ok(PolyFitReport { period: h, window: (start, end), classes })
}

fn differences<W: Scalar>(seq: &[W]) -> Vec<W> {
    seq.windows(2).map(|w| w[1].clone() - w[0].clone()).collect()
}

fn fit_class<W: Scalar>(residue: usize, seq: &[W], n_end: usize, h: usize, rel_width: f64) -> ResidueFit {
    let scale = seq.iter().map(|c| c.to_f64().abs()).fold(0.0f64, f64::max);
    // error in c_n from using ρ̂ instead of ρ grows like n·rel_width
    let base_floor = scale * (2.0 * n_end as f64 * rel_width.min(1.0) + 1e-13);

    let mut layers: Vec<Vec<W>> = vec![seq.to_vec()];
    let max_degree = MAX_DEGREE.min(seq.len().saturating_sub(3));
    let mut chosen = max_degree;
    for d in 0..=max_degree {
        let next = differences(&layers[d]);
        layers.push(next);
        let floor = base_floor * f64::powi(2.0, d as i32 + 1);
        let residuals: Vec<f64> = layers[d + 1].iter().map(|x| x.to_f64().abs()).collect();
        if trend(&residuals, floor).0 {
            chosen = d;
            break;
        }
    }
    if layers.len() < chosen + 2 {
        let next = differences(&layers[chosen]);
        layers.push(next);
    }
    let floor = base_floor * f64::powi(2.0, chosen as i32 + 1);
    let residuals: Vec<f64> = layers[chosen + 1].iter().map(|x| x.to_f64().abs()).collect();
    let (decaying, decay_factor) = trend(&residuals, floor);
    let top = layers[chosen].last().map(|x| x.to_f64()).unwrap_or(0.0);
    let factorial: f64 = (1..=chosen).map(|k| k as f64).product();
    let leading_coefficient = top / (factorial * (h as f64).powi(chosen as i32));
    ResidueFit {
        residue,
        degree: chosen,
        leading_coefficient,
        residuals,
        decay_factor,
        decaying,
        noise_floor: base_floor,
    }
}

/// Whether `r` decays by a constant factor per step, and the worst ratio.
fn trend(r: &[f64], floor: f64) -> (bool, Option<f64>) {
    let mut worst: Option<f64> = None;
    let mut ok = true;
    for w in r.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a > floor && b > floor {
            let ratio = b / a;
            worst = Some(worst.map_or(ratio, |m: f64| m.max(ratio)));
        } else if a <= floor && b > 4.0 * floor {
            ok = false;
        }
    }
    let ends_low = r.last().is_none_or(|&x| x <= floor);
    let ok = ok && match worst {
        Some(f) => f <= DECAY_CEILING,
        None => ends_low,
    };
    (ok, worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn enclosure(value: i64, period: usize) -> SpectralEnclosure<Rational> {
        SpectralEnclosure { period, ..SpectralEnclosure::exact(q(value)) }
    }

    #[test]
    fn constant_ratio_is_degree_zero() {
        let census = CensusTable::from_per_length((0..31).map(|n| if n == 0 { q(1) } else { q(4) * num_traits::pow(q(3), n - 1) }).collect());
        let fit = polyexp_fit_window(&census, &enclosure(3, 1), 10, 30).unwrap();
        assert_eq!(fit.classes.len(), 1);
        let c = &fit.classes[0];
        assert_eq!(c.degree, 0);
        assert!((c.leading_coefficient - 4.0 / 3.0).abs() < 1e-12);
        assert!(c.decaying);
    }

    #[test]
    fn linear_growth_is_degree_one() {
        // w_n = (n + 1) 2ⁿ
        let census = CensusTable::from_per_length((0..31).map(|n| q(n as i64 + 1) * num_traits::pow(q(2), n)).collect());
        let fit = polyexp_fit(&census, &enclosure(2, 1)).unwrap();
        assert_eq!(fit.classes[0].degree, 1);
        assert!((fit.classes[0].leading_coefficient - 1.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_census_splits_into_classes() {
        // period 2: 2ⁿ words at even lengths, none at odd lengths
        let census = CensusTable::from_per_length(
            (0..30).map(|n| if n % 2 == 0 { num_traits::pow(q(2), n) } else { q(0) }).collect(),
        );
        let fit = polyexp_fit(&census, &enclosure(2, 2)).unwrap();
        assert_eq!(fit.classes.len(), 2);
        let even = &fit.classes[0];
        let odd = &fit.classes[1];
        assert_eq!((even.degree, even.leading_coefficient), (0, 1.0));
        assert_eq!((odd.degree, odd.leading_coefficient), (0, 0.0));
    }

    #[test]
    fn zero_radius_is_rejected() {
        let census = CensusTable::from_per_length(vec![q(1); 12]);
        assert_eq!(polyexp_fit(&census, &enclosure(0, 1)), Err(SpectralError::ZeroRadius));
    }

    #[test]
    fn too_short() {
        let census = CensusTable::from_per_length(vec![q(1); 5]);
        assert!(matches!(polyexp_fit(&census, &enclosure(1, 1)), Err(SpectralError::InsufficientData { .. })));
    }

    #[test]
    fn trend_detection() {
        assert_eq!(trend(&[1.0, 0.5, 0.25], 1e-9), (true, Some(0.5)));
        assert!(!trend(&[1.0, 1.0, 1.0], 1e-9).0);
        assert!(trend(&[0.0, 0.0], 1e-9).0);
        assert!(!trend(&[0.0, 1.0], 1e-9).0);
    }
}
