//! Adaptive Gauss-Kronrod quadrature and log-grid integration near singular endpoints.

use crate::error::{overflow, Result};

/// Hard lower floor for integrals over `(0, t)`.
pub const FLOOR: f64 = 1e-10;

/// Relative change under halving of the floor above which an integral over `(0, t)`
/// is declared divergent.
pub const DIVERGENCE_RATIO: f64 = 0.01;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7/15 panel: (kronrod estimate, |kronrod - gauss|).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive integration of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the total error is
/// below `max(abs_tol, rel_tol * |I|)` or the panel budget is spent.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, rel_tol, abs_tol).map(|v| -v);
    }
    const MAX_PANELS: usize = 4000;
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) && panels.len() < MAX_PANELS {
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, pv, pe) = panels.swap_remove(idx);
        let m = 0.5 * (pa + pb);
        if m <= pa || m >= pb {
            panels.push((pa, pb, pv, pe));
            break;
        }
        let (lv, le) = gk15(&f, pa, m);
        let (rv, re) = gk15(&f, m, pb);
        total += lv + rv - pv;
        err += le + re - pe;
        panels.push((pa, m, lv, le));
        panels.push((m, pb, rv, re));
    }
    // re-sum to shed accumulated cancellation error
    let total: f64 = panels.iter().map(|p| p.2).sum();
    if !total.is_finite() {
        return overflow(format!("integral over [{a}, {b}] is not finite"));
    }
    Ok(total)
}

/// Integrates over `[a, b]` with `0 < a < b` in the logarithmic variable, one decade at a time.
pub fn integrate_log<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    debug_assert!(a > 0.0 && b >= a);
    let g = |u: f64| {
        let s = u.exp();
        f(s) * s
    };
    let (la, lb) = (a.ln(), b.ln());
    let decade = std::f64::consts::LN_10;
    let pieces = ((lb - la) / decade).ceil().max(1.0) as usize;
    let step = (lb - la) / pieces as f64;
    let mut total = 0.0;
    for i in 0..pieces {
        let u0 = la + step * i as f64;
        let u1 = if i + 1 == pieces { lb } else { u0 + step };
        total += integrate(&g, u0, u1, rel_tol, 0.0)?;
    }
    Ok(total)
}

/// Integrates over `(0, t)` on a log grid truncated at [`FLOOR`].
///
/// Divergence is declared when halving the floor changes the value by more than
/// [`DIVERGENCE_RATIO`] (relative).
pub fn integrate_from_zero<F: Fn(f64) -> f64>(f: F, t: f64, rel_tol: f64) -> Result<f64> {
    if t <= FLOOR {
        return integrate(&f, 0.0, t, rel_tol, 0.0);
    }
    let main = integrate_log(&f, FLOOR, t, rel_tol)?;
    let extra = integrate(&f, FLOOR / 2.0, FLOOR, rel_tol, 0.0)?;
    if extra.abs() > DIVERGENCE_RATIO * main.abs() {
        return overflow(format!(
            "integral over (0, {t}) diverges at 0 (floor halving changes it by {extra:e} of {main:e})"
        ));
    }
    Ok(main + extra)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_is_exact_for_polynomials() {
        let (v, _) = gk15(&|x: f64| x.powi(10) - 3.0 * x.powi(3), 0.0, 2.0);
        let exact = 2f64.powi(11) / 11.0 - 3.0 * 2f64.powi(4) / 4.0;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn adaptive_handles_sqrt_singularity() {
        let v = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn log_grid_integral_of_inverse() {
        let v = integrate_log(|s: f64| 1.0 / s, 1e-6, 1.0, 1e-12).unwrap();
        assert!((v - 1e6f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn from_zero_detects_log_divergence() {
        assert!(integrate_from_zero(|s: f64| 1.0 / s, 0.5, 1e-10).is_err());
        let v = integrate_from_zero(|s: f64| s.powf(-0.5), 0.25, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-4);
    }
}
