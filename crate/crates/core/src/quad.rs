//! Quadrature over the Brillouin zone and over finite frequency intervals.
//!
//! Zone integrals are written in the phase `p = k x0 ∈ (-π, π]` and normalized
//! as `(1/2π)∫dp`, which is the continuum limit of `(1/N) Σ_k`.

use crate::bath::BathModel;
use crate::error::{Error, Result};
use crate::scalar::{from_int, lit, to_f64, Real};

const MIN_NODES: usize = 128;
const MAX_NODES: usize = 1 << 21;

/// Trapezoidal mean of a smooth periodic function over `(-π, π]`, doubling
/// the node count until two successive estimates agree to `tol` (relative to
/// `1 + |I|`).
pub fn periodic_mean<T: Real, F>(f: F, tol: T) -> Result<T>
where
    F: Fn(T) -> T,
{
    let mut nodes = MIN_NODES;
    let mut prev = midpoint_mean(&f, nodes, lit(0.5));
    loop {
        nodes *= 2;
        let next = midpoint_mean(&f, nodes, lit(0.5));
        let change = (next - prev).abs();
        if change <= tol * (T::one() + next.abs()) {
            return Ok(next);
        }
        if nodes >= MAX_NODES {
            return Err(Error::QuadratureNotConverged {
                change: to_f64(change),
                nodes,
            });
        }
        prev = next;
    }
}

fn midpoint_mean<T: Real, F: Fn(T) -> T>(f: &F, nodes: usize, offset: T) -> T {
    let h = T::two_pi() / from_int::<T>(nodes as i64);
    let pi = T::pi();
    let mut acc = T::zero();
    for j in 0..nodes {
        let p = -pi + (from_int::<T>(j as i64) + offset) * h;
        acc += f(p);
    }
    acc / from_int::<T>(nodes as i64)
}

/// Principal value of `(1/2π) ∫ dp F(p) / (E − ω(p))` over the zone.
///
/// Each simple pole `p_b` (a resonant phase of the dispersion) is cancelled
/// by adding `F(p_b)/ω′(p_b) · ½cot((p − p_b)/2)`, a periodic kernel with the
/// same residue and zero principal value. What remains is smooth and
/// periodic, so the trapezoidal rule converges geometrically.
pub fn principal_value_zone<T: Real, F>(bath: &BathModel<T>, energy: T, numerator: F, tol: T) -> Result<T>
where
    F: Fn(T) -> T,
{
    let (lo, hi) = bath.band_edges();
    if energy == lo || energy == hi {
        return Err(Error::BandEdge { omega: to_f64(energy) });
    }
    let poles: Vec<(T, T, T)> = if energy > lo && energy < hi {
        bath.resonant_branches(energy)?
            .into_iter()
            .map(|(k, _)| {
                let p = k * bath.x0;
                let slope = bath.dispersion_slope(k) / bath.x0;
                (p, numerator(p) / slope, slope)
            })
            .collect()
    } else {
        Vec::new()
    };

    // Nodes next to a pole lose accuracy in E − ω(p); the resulting noise in
    // the mean grows linearly with the node count.
    let noise_per_node = poles.iter().fold(T::zero(), |acc, &(_, c, v)| acc + (c / v).abs()) * lit(8.0) * T::eps();
    let poles: Vec<(T, T)> = poles.into_iter().map(|(p, c, _)| (p, c)).collect();
    let half = lit::<T>(0.5);
    let integrand = |p: T| {
        let mut v = numerator(p) / (energy - bath.dispersion(p / bath.x0));
        for &(pb, c) in &poles {
            v += c * half / ((p - pb) * half).tan();
        }
        v
    };

    let mut nodes = MIN_NODES;
    let mut prev = midpoint_mean(&integrand, nodes, best_offset(&poles, nodes));
    loop {
        nodes *= 2;
        let next = midpoint_mean(&integrand, nodes, best_offset(&poles, nodes));
        let change = (next - prev).abs();
        let noise = noise_per_node * from_int::<T>(nodes as i64);
        if change <= tol * (T::one() + next.abs()) + noise {
            return Ok(next);
        }
        if nodes >= MAX_NODES {
            return Err(Error::QuadratureNotConverged {
                change: to_f64(change),
                nodes,
            });
        }
        prev = next;
    }
}

/// Picks the grid offset (in cell units) keeping the nodes farthest from
/// every pole, where the subtracted integrand suffers cancellation.
fn best_offset<T: Real>(poles: &[(T, T)], nodes: usize) -> T {
    let candidates = [0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875];
    if poles.is_empty() {
        return lit(0.5);
    }
    let h = T::two_pi() / from_int::<T>(nodes as i64);
    let pi = T::pi();
    let mut best = (lit::<T>(0.5), -T::one());
    for c in candidates {
        let off = lit::<T>(c);
        let mut worst = T::max_value().unwrap();
        for &(pb, _) in poles {
            let u = (pb + pi) / h - off;
            let d = (u - u.round()).abs();
            worst = worst.min(d);
        }
        if worst > best.1 {
            best = (off, worst);
        }
    }
    best.0
}

/// Tanh-sinh quadrature of `f` on `[a, b]`; tolerates integrable endpoint
/// singularities. `f` receives the abscissa together with its distances to
/// `a` and `b`, which stay accurate where the abscissa itself rounds onto an
/// endpoint.
pub fn tanh_sinh<T: Real, F>(f: F, a: T, b: T, tol: T) -> Result<T>
where
    F: Fn(T, T, T) -> T,
{
    let half_width = (b - a) * lit(0.5);
    let half_pi = T::frac_pi_2();
    let t_max = lit::<T>(4.0);
    let mut h = T::one();
    let eval = |t: T| -> T {
        let u = half_pi * t.sinh();
        let cu = u.cosh();
        let weight = half_width * half_pi * t.cosh() / (cu * cu);
        // distance from the nearer endpoint: (b-a) / (1 + e^{2|u|})
        let d = (b - a) / (T::one() + (lit::<T>(2.0) * u.abs()).exp());
        if d <= T::zero() || weight == T::zero() {
            return T::zero();
        }
        let (x, da, db) = if t >= T::zero() {
            (b - d, b - a - d, d)
        } else {
            (a + d, d, b - a - d)
        };
        weight * f(x, da, db)
    };
    let mut sum = eval(T::zero());
    let mut k = 1i64;
    loop {
        let t = from_int::<T>(k) * h;
        if t > t_max {
            break;
        }
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..12 {
        h *= lit(0.5);
        let mut k = 1i64;
        loop {
            let t = from_int::<T>(k) * h;
            if t > t_max {
                break;
            }
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = sum * h;
        let change = (next - estimate).abs();
        estimate = next;
        if change <= tol * (T::one() + next.abs()) {
            return Ok(next);
        }
    }
    Err(Error::QuadratureNotConverged {
        change: f64::NAN,
        nodes: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn periodic_mean_of_trig_polynomial() {
        let v = periodic_mean(|p: f64| 1.0 + p.cos() + (3.0 * p).sin() + (2.0 * p).cos().powi(2), 1e-14).unwrap();
        assert_relative_eq!(v, 1.5, epsilon = 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        // ∫_{-1}^{1} dx / √(1-x²) = π
        let v = tanh_sinh(|_x: f64, da, db| 1.0 / (da * db).sqrt(), -1.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(v, PI, max_relative = 1e-10);
        let v = tanh_sinh(|x: f64, _, _| x * x, 0.0, 3.0, 1e-13).unwrap();
        assert_relative_eq!(v, 9.0, max_relative = 1e-12);
    }

    #[test]
    fn principal_value_local_green_function_vanishes_in_band() {
        // For the nearest-neighbor ring the on-site Green function is purely
        // imaginary inside the band.
        let bath = BathModel::nearest_neighbor(0.2, 1201).unwrap();
        for e in [0.7, 1.0, 1.2, 1.33] {
            let v: f64 = principal_value_zone(&bath, e, |_| 1.0, 1e-12).unwrap();
            assert!(v.abs() < 1e-10, "E = {e}: {v}");
        }
    }

    #[test]
    fn principal_value_off_site_closed_form() {
        // PV(1/2π)∫ cos(m p)/(E − ω(p)) = −sin(k0 |m|)/(2ξ sin k0) with E = ωc + 2ξ cos k0.
        let bath = BathModel::nearest_neighbor(0.2, 1201).unwrap();
        for (e, m) in [(1.0, 1.0), (1.2, 3.0), (0.75, 5.0)] {
            let k0 = ((e - 1.0) / 0.4f64).acos();
            let expected = -(k0 * m).sin() / (0.4 * k0.sin());
            let v = principal_value_zone(&bath, e, |p| (m * p).cos(), 1e-12).unwrap();
            assert_relative_eq!(v, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn principal_value_outside_band_is_ordinary_integral() {
        // (1/2π)∫ dp /(E − ωc − 2ξ cos p) = 1/√((E−ωc)² − 4ξ²) above the band.
        let bath = BathModel::nearest_neighbor(0.2, 1201).unwrap();
        let v = principal_value_zone(&bath, 1.5, |_| 1.0, 1e-13).unwrap();
        assert_relative_eq!(v, 1.0 / (0.25f64 - 0.16).sqrt(), max_relative = 1e-12);
        assert!(principal_value_zone(&bath, 1.4, |_| 1.0, 1e-12).is_err());
    }
}
