//! Closed-form evaluation: physical density, the Poisson alphabet ceiling,
//! normal-approximation finite-blocklength rates, the efficiency decomposition,
//! and strand-loss longevity.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// EB per gram per (bit/base) of single-stranded DNA.
pub const RHO_CONV: f64 = 113.7;
/// Outer parity safety factor.
pub const SAFETY: f64 = 1.08;
const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;
const GAS_CONSTANT: f64 = 8.314_462_618;
/// Storage temperature used for longevity, in kelvin.
pub const STORAGE_T: f64 = 298.15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityInputs {
    /// File length in bytes.
    pub l: usize,
    /// Oligos in the pool.
    pub n: usize,
    /// Payload bases per strand.
    pub b: usize,
    /// Physical redundancy.
    pub r: f64,
}

/// `8L / (n·B·r) · ρ` in EB per gram.
pub fn density(d: DensityInputs) -> Result<f64> {
    let denom = d.n as f64 * d.b as f64 * d.r;
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::Domain(format!(
            "density denominator n·B·r = {denom}"
        )));
    }
    Ok(8.0 * d.l as f64 / denom * RHO_CONV)
}

/// `2 · (1 − e^{−r}) / r · ρ`: two bits per base scaled by the Poisson
/// survival fraction per unit copy mass.
pub fn alphabet_ceiling(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "redundancy must be positive, got {r}"
        )));
    }
    Ok(2.0 * (-(-r).exp_m1()) / r * RHO_CONV)
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Inverse Gaussian tail: `Q⁻¹(ε)` with `Q(x) = P(Z > x)`.
pub fn q_inv(eps: f64) -> f64 {
    -Normal::standard().inverse_cdf(eps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FblRate {
    /// Achievable rate at blocklength n and block error ε.
    pub r: f64,
    /// BSC capacity.
    pub c: f64,
}

/// Normal approximation of the BSC(p) rate at blocklength `n` and error `eps`,
/// including the `log2(n) / 2n` term, clamped to [0, 1].
pub fn fbl_rate(p_sub: f64, n: usize, eps: f64) -> FblRate {
    if p_sub <= 0.0 {
        return FblRate { r: 1.0, c: 1.0 };
    }
    let c = 1.0 - h2(p_sub);
    let v = p_sub * (1.0 - p_sub) * ((1.0 - p_sub) / p_sub).log2().powi(2);
    let nf = n as f64;
    let r = c - (v / nf).sqrt() * q_inv(eps) + nf.log2() / (2.0 * nf);
    FblRate {
        r: r.clamp(0.0, 1.0),
        c,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub eta_code: f64,
    pub eta_fbl: f64,
    pub eta_ch: f64,
}

/// Splits an achieved fraction of the alphabet ceiling into code overhead
/// (`payload_bits / n / safety`), finite-blocklength loss `R / C`, and the
/// remaining channel factor.
pub fn decomposition(
    payload_bits: usize,
    n: usize,
    safety: f64,
    p_sub: f64,
    eps: f64,
    achieved_fraction: f64,
) -> Decomposition {
    let eta_code = payload_bits as f64 / n as f64 / safety;
    let fbl = fbl_rate(p_sub, n, eps);
    let eta_fbl = fbl.r / fbl.c;
    Decomposition {
        eta_code,
        eta_fbl,
        eta_ch: achieved_fraction / (eta_code * eta_fbl),
    }
}

/// Exponential strand loss from purine hydrolysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongevityModel {
    /// Aqueous depurination rate per purine at `t_ref`, s⁻¹.
    pub k_ref: f64,
    /// Reference temperature, K.
    pub t_ref: f64,
    /// Activation energy, J/mol.
    pub ea: f64,
    /// Dry-state suppression factor.
    pub suppression: f64,
    pub purines_per_strand: f64,
    /// Strand loss rate per year.
    pub lambda_strand: f64,
}

impl LongevityModel {
    /// Loss rate fixed by one observed (initial redundancy, cliff, years) point.
    pub fn calibrated(r_initial: f64, r_cliff: f64, years: f64) -> Result<Self> {
        if !(0.0 < r_cliff && r_cliff < r_initial) || !(years > 0.0) {
            return Err(Error::Domain(format!(
                "calibration needs 0 < cliff < initial and years > 0, got ({r_initial}, {r_cliff}, {years})"
            )));
        }
        Ok(LongevityModel {
            k_ref: f64::NAN,
            t_ref: f64::NAN,
            ea: f64::NAN,
            suppression: f64::NAN,
            purines_per_strand: f64::NAN,
            lambda_strand: (r_initial / r_cliff).ln() / years,
        })
    }

    /// Default calibration: a 5 → 3.25 cliff corresponds to 133 years.
    pub fn default_calibrated() -> Self {
        Self::calibrated(5.0, 3.25, 133.0).expect("constants are in range")
    }

    /// Rate from Arrhenius-scaled chemistry at 25 °C.
    pub fn from_chemistry(
        k_ref: f64,
        t_ref: f64,
        ea: f64,
        suppression: f64,
        purines_per_strand: f64,
    ) -> Self {
        let k_t = k_ref * (-ea / GAS_CONSTANT * (1.0 / STORAGE_T - 1.0 / t_ref)).exp();
        let lambda_strand = k_t / suppression * purines_per_strand * SECONDS_PER_YEAR;
        LongevityModel {
            k_ref,
            t_ref,
            ea,
            suppression,
            purines_per_strand,
            lambda_strand,
        }
    }

    /// Illustrative chemistry: 4·10⁻⁹ s⁻¹ at 70 °C, 127 kJ/mol, dry
    /// suppression 300, half the bases of a `strand_len` strand are purines.
    /// These constants are not calibrated against any cliff measurement.
    pub fn default_chemistry(strand_len: usize) -> Self {
        Self::from_chemistry(4.0e-9, 343.15, 127_000.0, 300.0, strand_len as f64 / 2.0)
    }

    /// Mean surviving copies per oligo after `years`.
    pub fn effective_r(&self, r_initial: f64, years: f64) -> f64 {
        r_initial * (-self.lambda_strand * years).exp()
    }

    /// Years until the mean copy number decays from `r_initial` to `r_cliff`.
    pub fn longevity_years(&self, r_initial: f64, r_cliff: f64) -> Result<f64> {
        if !(0.0 < r_cliff && r_cliff < r_initial) {
            return Err(Error::Domain(format!(
                "need 0 < cliff < initial, got {r_cliff} vs {r_initial}"
            )));
        }
        Ok((r_initial / r_cliff).ln() / self.lambda_strand)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Tail probability by Simpson integration of the Gaussian density.
    fn q_numeric(x: f64) -> f64 {
        let (hi, steps) = (x + 40.0, 200_000);
        let h = (hi - x) / steps as f64;
        let f = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = f(x) + f(hi);
        for i in 1..steps {
            s += f(x + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    fn q_inv_bisect(eps: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if q_numeric(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn q_inv_matches_bisection() {
        for eps in [1e-6, 1e-3, 0.05, 0.5] {
            assert!(close(q_inv(eps), q_inv_bisect(eps), 1e-7), "{eps}");
        }
    }

    #[test]
    fn density_examples() {
        let d = |l, n, b, r| density(DensityInputs { l, n, b, r }).unwrap();
        assert!(close(d(19456, 4508, 126, 0.2), 155.8, 0.05));
        assert!(close(d(19456, 2077, 126, 0.5), 135.2, 0.1));
        assert!(close(
            d(19456, 2077, 126, 1.0) * 2.0,
            d(19456, 2077, 126, 0.5),
            1e-12
        ));
        assert!(density(DensityInputs {
            l: 1,
            n: 0,
            b: 126,
            r: 1.0
        })
        .is_err());
    }

    #[test]
    fn ceiling_examples_and_limit() {
        for (r, want) in [
            (0.02, 225.1),
            (1.0, 143.7),
            (5.0, 45.2),
            (10.0, 22.7),
            (0.5, 178.9),
        ] {
            assert!(close(alphabet_ceiling(r).unwrap(), want, 0.1), "{r}");
        }
        assert!(close(alphabet_ceiling(1e-9).unwrap(), 2.0 * RHO_CONV, 1e-6));
        assert!(alphabet_ceiling(0.0).is_err());
    }

    #[test]
    fn ceiling_is_density_of_rate_two_code_at_survival_limited_pool() {
        // k oligos of B bases at 2 bits/base, pool inflated by the survival fraction.
        for r in [0.3f64, 1.0, 4.0] {
            let (k, b) = (1000.0, 126.0);
            let n = k / (1.0 - (-r).exp());
            let l_bytes = k * b * 2.0 / 8.0;
            let rho = 8.0 * l_bytes / (n * b * r) * RHO_CONV;
            assert!(close(rho, alphabet_ceiling(r).unwrap(), 1e-9));
        }
    }

    #[test]
    fn fbl_examples() {
        let a = fbl_rate(1.3e-3, 252, 1e-6);
        assert!(
            close(a.r, 0.898, 0.002) && close(a.c, 0.986, 0.001),
            "{a:?}"
        );
        let b = fbl_rate(8e-3, 252, 1e-6);
        assert!(
            close(b.r, 0.763, 0.002) && close(b.c, 0.933, 0.001),
            "{b:?}"
        );
        assert_eq!(fbl_rate(0.0, 252, 1e-6), FblRate { r: 1.0, c: 1.0 });
        assert_eq!(fbl_rate(1e-15, 252, 1e-6).r, 1.0);
    }

    #[test]
    fn fbl_monotone_on_grid() {
        let ps = [1e-4, 1e-3, 5e-3, 1e-2, 5e-2];
        let ns = [64, 128, 252, 512, 2048];
        for &n in &ns {
            for w in ps.windows(2) {
                assert!(fbl_rate(w[0], n, 1e-6).r > fbl_rate(w[1], n, 1e-6).r);
            }
        }
        for &p in &ps {
            for w in ns.windows(2) {
                assert!(fbl_rate(p, w[0], 1e-6).r < fbl_rate(p, w[1], 1e-6).r);
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let hi = decomposition(208, 252, SAFETY, 1.3e-3, 1e-6, 0.680);
        assert!(close(hi.eta_code, 0.764, 0.002));
        assert!(close(hi.eta_ch, 0.98, 0.02), "{hi:?}");
        let lo = decomposition(176, 252, SAFETY, 8e-3, 1e-6, 0.515);
        assert!(close(lo.eta_code, 0.647, 0.002));
        let f = hi.eta_code * hi.eta_fbl;
        assert!(close(
            decomposition(208, 252, SAFETY, 1.3e-3, 1e-6, f).eta_ch,
            1.0,
            1e-12
        ));
    }

    #[test]
    fn longevity_examples() {
        let m = LongevityModel::default_calibrated();
        assert!(close(m.lambda_strand, 3.24e-3, 0.01e-3));
        assert!(close(m.longevity_years(5.0, 3.25).unwrap(), 133.0, 3.0));
        assert!(close(m.longevity_years(10.0, 4.0).unwrap(), 282.0, 6.0));
        assert!(m.longevity_years(10.0, 10.0 - 1e-9).unwrap() < 1e-6);
        assert!(m.longevity_years(4.0, 4.0).is_err());
        assert!(m.longevity_years(4.0, 0.0).is_err());
    }

    #[test]
    fn longevity_and_effective_r_invert() {
        let m = LongevityModel::default_calibrated();
        for (r0, rc) in [(5.0, 3.25), (10.0, 4.0), (2.0, 1.999)] {
            let t = m.longevity_years(r0, rc).unwrap();
            assert!(close(m.effective_r(r0, t), rc, 1e-9));
        }
    }

    #[test]
    fn chemistry_chain_is_consistent() {
        let m = LongevityModel::default_chemistry(140);
        assert!(m.lambda_strand > 0.0);
        // Evaluating at the reference temperature removes the Arrhenius factor.
        let same = LongevityModel::from_chemistry(1e-10, STORAGE_T, 1e5, 300.0, 70.0);
        assert!(close(
            same.lambda_strand,
            1e-10 / 300.0 * 70.0 * SECONDS_PER_YEAR,
            1e-15
        ));
        let hot = LongevityModel::from_chemistry(1e-10, STORAGE_T + 10.0, 1e5, 300.0, 70.0);
        assert!(hot.lambda_strand < same.lambda_strand);
    }
}
