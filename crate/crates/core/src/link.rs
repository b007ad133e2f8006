//! Protocol-resolved link statistics.
//!
//! Both harvesting protocols reduce to the same three random variables:
//!
//! * `γ_h ~ Exp(γ̄_h)`, the first-hop SNR,
//! * `I_R = Σ μ_i ω_i`, the aggregate interference-to-noise ratio,
//! * `W ~ Exp(γ̄_g)`, the second-hop gain per unit of harvested power,
//!
//! with `γ_SR = γ_h / (1 + I_R)` and `γ_RD = W (γ_h + I_R)`. Everything in
//! this module is a function of [`EffectiveParams`] alone.

use log::warn;

use crate::error::{Error, Result};
use crate::mixture::{characteristic_decomposition, CharDecomp, DEFAULT_MERGE_TOLERANCE};
use crate::special::{
    bessel_k_sequence, factorial, gen_incomplete_gamma_scaled, integrate_to_infinity, ln_gamma,
    QuadratureSettings,
};

/// Relative distance at which an interferer mean is treated as equal to `γ̄_h`.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-9;
/// Relative shift applied to interferer means that coincide with `γ̄_h`.
pub const NUDGE: f64 = 1e-6;
/// Closed-form outage evaluations losing more than this factor to
/// cancellation (eight significant digits) are refused.
pub const CANCELLATION_LIMIT: f64 = 1e8;

/// Physical parameters of the three-node link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// `P_S`, watts.
    pub source_power: f64,
    /// `P_i`, watts, one per interferer.
    pub interferer_powers: Vec<f64>,
    /// `σ_R²`, watts.
    pub relay_noise_var: f64,
    /// `σ_D²`, watts.
    pub dest_noise_var: f64,
    /// `Ω_h`.
    pub mean_gain_sr: f64,
    /// `Ω_g`.
    pub mean_gain_rd: f64,
    /// `Ω_{β_i}`, one per interferer.
    pub mean_gain_interferers: Vec<f64>,
    /// Energy conversion efficiency `η ∈ [0, 1]`.
    pub efficiency: f64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("source_power", self.source_power)?;
        positive("relay_noise_var", self.relay_noise_var)?;
        positive("dest_noise_var", self.dest_noise_var)?;
        positive("mean_gain_sr", self.mean_gain_sr)?;
        positive("mean_gain_rd", self.mean_gain_rd)?;
        if self.interferer_powers.len() != self.mean_gain_interferers.len() {
            return Err(Error::Config(format!(
                "{} interferer powers but {} interferer gains",
                self.interferer_powers.len(),
                self.mean_gain_interferers.len()
            )));
        }
        for (p, g) in self.interferer_powers.iter().zip(&self.mean_gain_interferers) {
            positive("interferer power", *p)?;
            positive("interferer mean gain", *g)?;
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::Config(format!(
                "efficiency must lie in [0, 1], got {}",
                self.efficiency
            )));
        }
        Ok(())
    }

    pub fn interferer_count(&self) -> usize {
        self.interferer_powers.len()
    }
}

/// Energy-harvesting receiver architecture at the relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Harvest for a fraction `α` of the block, then split the rest between hops.
    TimeSwitching,
    /// Divert a fraction `θ` of received power to the harvester.
    PowerSplitting,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::TimeSwitching => "ts",
            Variant::PowerSplitting => "ps",
        }
    }
}

/// A protocol variant with its harvesting ratio (`α` or `θ`).
///
/// The block time is normalized to one; it cancels from every metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    pub variant: Variant,
    pub ratio: f64,
}

impl Protocol {
    pub fn new(variant: Variant, ratio: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(Error::Config(format!("harvesting ratio must lie in [0, 1], got {ratio}")));
        }
        Ok(Self { variant, ratio })
    }

    pub fn time_switching(alpha: f64) -> Result<Self> {
        Self::new(Variant::TimeSwitching, alpha)
    }

    pub fn power_splitting(theta: f64) -> Result<Self> {
        Self::new(Variant::PowerSplitting, theta)
    }

    /// Whether the ratio lies strictly inside `(0, 1)`.
    pub fn is_interior(&self) -> bool {
        self.ratio > 0.0 && self.ratio < 1.0
    }
}

/// The inputs every analytic formula needs.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveParams {
    gbar_h: f64,
    gbar_g: f64,
    mu: Vec<f64>,
    decomp_a: Option<CharDecomp>,
    decomp_b: CharDecomp,
    nudged: bool,
}

impl EffectiveParams {
    /// Builds the parameters directly from `γ̄_h`, `γ̄_g` and the interferer
    /// mean INRs.
    ///
    /// A mean within [`COINCIDENCE_TOLERANCE`] of `γ̄_h` is moved up by
    /// [`NUDGE`] (relative), since the closed-form outage expression is
    /// singular there while the probability itself is continuous. `γ̄_g = 0`
    /// is accepted and describes a dead second hop.
    pub fn new(gbar_h: f64, gbar_g: f64, mu: &[f64]) -> Result<Self> {
        if !(gbar_h > 0.0) || !gbar_h.is_finite() {
            return Err(Error::Config(format!("mean first-hop SNR must be positive, got {gbar_h}")));
        }
        if !(gbar_g >= 0.0) || !gbar_g.is_finite() {
            return Err(Error::Config(format!(
                "second-hop scale must be non-negative, got {gbar_g}"
            )));
        }
        let mut nudged = false;
        let mu: Vec<f64> = mu
            .iter()
            .map(|&m| {
                if (m - gbar_h).abs() <= COINCIDENCE_TOLERANCE * gbar_h {
                    nudged = true;
                    m * (1.0 + NUDGE)
                } else {
                    m
                }
            })
            .collect();
        if nudged {
            warn!(
                "interferer mean INR coincides with the mean first-hop SNR {gbar_h}; \
                 shifted by {NUDGE:e} (relative)"
            );
        }
        let decomp_a = if mu.is_empty() {
            None
        } else {
            Some(characteristic_decomposition(&mu, DEFAULT_MERGE_TOLERANCE)?)
        };
        let mut with_h = mu.clone();
        with_h.push(gbar_h);
        // After a nudge the shifted means sit 1e-6 from γ̄_h; merging them back
        // with γ̄_h keeps the combined decomposition well conditioned.
        let merge_b = if nudged { 4.0 * NUDGE } else { DEFAULT_MERGE_TOLERANCE };
        let decomp_b = characteristic_decomposition(&with_h, merge_b)?;
        Ok(Self {
            gbar_h,
            gbar_g,
            mu,
            decomp_a,
            decomp_b,
            nudged,
        })
    }

    /// `γ̄_h`.
    pub fn gbar_h(&self) -> f64 {
        self.gbar_h
    }

    /// `γ̄_g`.
    pub fn gbar_g(&self) -> f64 {
        self.gbar_g
    }

    /// Interferer mean INRs (after any nudge).
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Decomposition of the interference means; `None` without interferers.
    pub fn interference(&self) -> Option<&CharDecomp> {
        self.decomp_a.as_ref()
    }

    /// Decomposition of the interference means with `γ̄_h` appended.
    pub fn combined(&self) -> &CharDecomp {
        &self.decomp_b
    }

    pub fn was_nudged(&self) -> bool {
        self.nudged
    }
}

/// Resolves a physical configuration and protocol into effective parameters.
pub fn effective_params(cfg: &ChannelConfig, proto: &Protocol) -> Result<EffectiveParams> {
    cfg.validate()?;
    if !proto.is_interior() {
        return Err(Error::Config(format!(
            "analytic evaluation needs a harvesting ratio strictly inside (0, 1), got {}",
            proto.ratio
        )));
    }
    let noise_ratio = cfg.relay_noise_var / cfg.dest_noise_var;
    let (info_share, gbar_g) = match proto.variant {
        Variant::TimeSwitching => {
            let a = proto.ratio;
            (1.0, 2.0 * a * cfg.efficiency / (1.0 - a) * noise_ratio * cfg.mean_gain_rd)
        }
        Variant::PowerSplitting => {
            let t = proto.ratio;
            (1.0 - t, cfg.efficiency * t / (1.0 - t) * noise_ratio * cfg.mean_gain_rd)
        }
    };
    let gbar_h = info_share * cfg.source_power / cfg.relay_noise_var * cfg.mean_gain_sr;
    let mu: Vec<f64> = cfg
        .interferer_powers
        .iter()
        .zip(&cfg.mean_gain_interferers)
        .map(|(p, g)| info_share * p / cfg.relay_noise_var * g)
        .collect();
    EffectiveParams::new(gbar_h, gbar_g, &mu)
}

/// Distribution function of the first-hop SINR `γ_SR = γ_h / (1 + I_R)`.
pub fn cdf_gamma_sr(p: &EffectiveParams, gamma: f64) -> f64 {
    if !(gamma > 0.0) {
        return 0.0;
    }
    let x = gamma / p.gbar_h;
    let Some(a) = p.interference() else {
        return -(-x).exp_m1();
    };
    let survival: f64 = a
        .terms()
        .map(|(mu, j, chi)| chi * (1.0 + mu * x).powi(-(j as i32)))
        .sum();
    (1.0 - (-x).exp() * survival).clamp(0.0, 1.0)
}

/// Distribution function of the second-hop SNR `γ_RD = W (γ_h + I_R)`.
pub fn cdf_gamma_rd(p: &EffectiveParams, gamma: f64) -> f64 {
    if !(gamma > 0.0) {
        return 0.0;
    }
    if p.gbar_g == 0.0 {
        return 1.0;
    }
    let b = p.combined();
    let mut survival = 0.0;
    for (i, (&mu, row)) in b.distinct_means().iter().zip(b.coefficients()).enumerate() {
        let t = gamma / (p.gbar_g * mu);
        let y = 2.0 * t.sqrt();
        let tau = b.multiplicities()[i];
        let ks = match bessel_k_sequence(tau as u32, y) {
            Ok(ks) => ks,
            Err(_) => continue,
        };
        for (jm1, &chi) in row.iter().enumerate() {
            let j = jm1 + 1;
            if chi == 0.0 || ks[j] == 0.0 {
                continue;
            }
            // 2 t^{j/2} K_j(2√t) / (j−1)!
            let ln_mag = std::f64::consts::LN_2 + 0.5 * j as f64 * t.ln() + ks[j].ln() - ln_gamma(j as f64);
            survival += chi * ln_mag.exp();
        }
    }
    (1.0 - survival).clamp(0.0, 1.0)
}

/// `ln ∫_0^u y^{j−1} e^{−a y} dy / (j−1)!` for `u > 0` and any real `a`.
pub(crate) fn ln_erlang_partial(j: usize, a: f64, u: f64) -> f64 {
    let jf = j as f64;
    let x = a * u;
    if x >= 0.0 {
        if x < jf {
            // u^j e^{−x} Σ_n x^n / (j+n)!
            let mut term = 1.0;
            let mut sum = 1.0;
            for n in 1..10_000 {
                term *= x / (j + n) as f64;
                sum += term;
                if term < 1e-17 * sum {
                    break;
                }
            }
            jf * u.ln() - x - ln_gamma(jf + 1.0) + sum.ln()
        } else {
            // a^{−j} P(j, x) with P(j, x) ≥ ~1/2 here
            let mut term = 1.0;
            let mut tail = 1.0;
            for k in 1..j {
                term *= x / k as f64;
                tail += term;
            }
            -jf * a.ln() + (-(-x).exp() * tail).ln_1p()
        }
    } else {
        let ax = -x;
        if ax <= 40.0_f64.max(4.0 * jf) {
            // u^j / j! Σ_n (−x)^n / n! · j / (j+n), all terms positive
            let mut c = 1.0;
            let mut sum = 1.0;
            for n in 1..100_000 {
                c *= ax / n as f64;
                let t = c * jf / (jf + n as f64);
                sum += t;
                if t < 1e-17 * sum {
                    break;
                }
            }
            jf * u.ln() - ln_gamma(jf + 1.0) + sum.ln()
        } else {
            // |a|^{−j} e^{|x|} |S| (1 − e^{−|x|}/S), S = Σ_{k<j} x^k / k!
            let mut term = 1.0;
            let mut s = 1.0;
            for k in 1..j {
                term *= x / k as f64;
                s += term;
            }
            -jf * (-a).ln() + ax + s.abs().ln() + (-(-ax).exp() / s).ln_1p()
        }
    }
}

/// Density of `Z = (γ_h + I_R) 𝟙{γ_SR > γ_th}` on its continuous part
/// `z > γ_th`; zero elsewhere.
///
/// Integrates to the decode-success probability `1 − F_{γ_SR}(γ_th)`.
pub fn pdf_z(p: &EffectiveParams, gamma_th: f64, z: f64) -> f64 {
    if !(z > gamma_th) {
        return 0.0;
    }
    let ln_base = -z / p.gbar_h - p.gbar_h.ln();
    let Some(decomp) = p.interference() else {
        return ln_base.exp();
    };
    let u = (z - gamma_th) / (1.0 + gamma_th);
    let mut sum = 0.0;
    for (mu, j, chi) in decomp.terms() {
        if chi == 0.0 {
            continue;
        }
        let a = 1.0 / mu - 1.0 / p.gbar_h;
        let ln_term = ln_base - j as f64 * mu.ln() + ln_erlang_partial(j, a, u);
        sum += chi * ln_term.exp();
    }
    sum.max(0.0)
}

/// Outage evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutageMethod {
    /// The closed form in generalized incomplete gamma functions, with the
    /// i.i.d. and single-interferer reductions where they apply.
    ClosedForm,
    /// `1 − ∫ exp(−γ_th/(γ̄_g z)) f_Z(z) dz` by adaptive quadrature.
    Integral,
}

/// Outage probability at the destination for decoding threshold `gamma_th`.
pub fn outage_probability(p: &EffectiveParams, gamma_th: f64, method: OutageMethod) -> Result<f64> {
    match method {
        OutageMethod::ClosedForm => outage_closed_form(p, gamma_th),
        OutageMethod::Integral => outage_integral(p, gamma_th).map(|(v, _)| v),
    }
}

/// Closed form when it is well conditioned, otherwise the integral.
///
/// Returns the probability, an absolute error estimate, and the route taken.
pub fn outage_probability_auto(p: &EffectiveParams, gamma_th: f64) -> Result<(f64, f64, OutageMethod)> {
    match outage_closed_form(p, gamma_th) {
        Ok(v) => Ok((v, 1e-9, OutageMethod::ClosedForm)),
        Err(Error::Conditioning(_)) | Err(Error::Quadrature { .. }) => {
            let (v, e) = outage_integral(p, gamma_th)?;
            Ok((v, e, OutageMethod::Integral))
        }
        Err(e) => Err(e),
    }
}

fn check_threshold(gamma_th: f64) -> Result<()> {
    if !(gamma_th >= 0.0) {
        return Err(Error::Domain(format!("threshold must be non-negative, got {gamma_th}")));
    }
    Ok(())
}

fn closed_form_quadrature() -> QuadratureSettings {
    QuadratureSettings {
        relative_tolerance: 1e-14,
        absolute_tolerance: 0.0,
        max_subdivisions: 4000,
    }
}

// Large characteristic coefficients cancel inside f_Z; the absolute
// tolerance is kept above the roundoff floor they imply.
fn integral_quadrature(p: &EffectiveParams) -> QuadratureSettings {
    let spread: f64 = p
        .interference()
        .map(|d| d.coefficients().iter().flatten().map(|c| c.abs()).sum())
        .unwrap_or(1.0);
    QuadratureSettings {
        relative_tolerance: 1e-11,
        absolute_tolerance: 1e-15_f64.max(256.0 * f64::EPSILON * spread),
        max_subdivisions: 4000,
    }
}

/// Shared pieces of the closed form at one threshold.
struct ClosedFormContext {
    gbar_h: f64,
    gbar_g: f64,
    gamma_th: f64,
    /// `e^{γ_th/γ̄_h} Γ(1, γ_th/γ̄_h; γ_th/(γ̄_h γ̄_g))`
    g0_scaled: f64,
}

impl ClosedFormContext {
    fn new(p: &EffectiveParams, gamma_th: f64) -> Result<Self> {
        let x0 = gamma_th / p.gbar_h;
        let g0_scaled = gen_incomplete_gamma_scaled(
            1.0,
            x0,
            gamma_th / (p.gbar_h * p.gbar_g),
            &closed_form_quadrature(),
        )?;
        Ok(Self {
            gbar_h: p.gbar_h,
            gbar_g: p.gbar_g,
            gamma_th,
            g0_scaled,
        })
    }

    /// For one interferer mean `μ`, the brace of the closed form for
    /// `j = 1..=max_j`, each scaled by `e^{γ_th/γ̄_h}`, together with the sum
    /// of absolute values of its parts.
    fn braces(&self, mu: f64, max_j: usize) -> Result<Vec<(f64, f64)>> {
        let g = self.gamma_th;
        let a = 1.0 / mu - 1.0 / self.gbar_h;
        let b = 1.0 / self.gbar_h + a / (1.0 + g);
        let bx = b * g;
        let q = closed_form_quadrature();
        // e^{bγ_th} Γ(m+1, bγ_th; bγ_th/γ̄_g), m < max_j
        let gammas: Vec<f64> = (0..max_j)
            .map(|m| gen_incomplete_gamma_scaled(m as f64 + 1.0, bx, bx / self.gbar_g, &q))
            .collect::<Result<_>>()?;
        let c = -a * g / (1.0 + g);
        let mut out = Vec::with_capacity(max_j);
        let mut value = self.g0_scaled;
        let mut magnitude = self.g0_scaled.abs();
        for k in 0..max_j {
            // (1/k!) c^k Σ_m C(k,m) b^{−1} (−bγ_th)^{−m} Γ(m+1, ·) / γ̄_h
            let ck = c.powi(k as i32) / factorial(k as u32);
            let mut binom = 1.0;
            let mut parts = Vec::with_capacity(k + 1);
            for (m, gm) in gammas.iter().enumerate().take(k + 1) {
                if m > 0 {
                    binom *= (k + 1 - m) as f64 / m as f64;
                }
                let t = ck * binom / b * (-bx).powi(-(m as i32)) * gm / self.gbar_h;
                parts.push(t);
            }
            let (sum, abs) = ordered_sum(&mut parts);
            value -= sum;
            magnitude += abs;
            out.push((value, magnitude));
        }
        Ok(out)
    }
}

/// Neumaier sum taken in descending order of magnitude; also returns the
/// sum of magnitudes.
fn ordered_sum(parts: &mut [f64]) -> (f64, f64) {
    parts.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut abs = 0.0;
    for &v in parts.iter() {
        abs += v.abs();
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    (sum + comp, abs)
}

fn finish_closed_form(parts: &mut [f64], magnitude: f64, gamma_th: f64, gbar_h: f64) -> Result<f64> {
    let (sum, _) = ordered_sum(parts);
    if magnitude > CANCELLATION_LIMIT * sum.abs() {
        return Err(Error::Conditioning(format!(
            "closed-form outage at threshold {gamma_th} cancels {magnitude:e} down to {sum:e}; \
             use the integral method"
        )));
    }
    let success = (-gamma_th / gbar_h).exp() * sum;
    Ok((1.0 - success).clamp(0.0, 1.0))
}

/// Trivial outcomes shared by every route: `Some(p)` when the answer does
/// not need any evaluation.
fn trivial_outage(p: &EffectiveParams, gamma_th: f64) -> Result<Option<f64>> {
    check_threshold(gamma_th)?;
    if gamma_th == 0.0 {
        return Ok(Some(0.0));
    }
    if p.gbar_g == 0.0 || gamma_th / p.gbar_h > 745.0 || gamma_th.is_infinite() {
        return Ok(Some(1.0));
    }
    Ok(None)
}

/// General closed form over every characteristic term of the interference.
pub fn outage_closed_form_general(p: &EffectiveParams, gamma_th: f64) -> Result<f64> {
    if let Some(v) = trivial_outage(p, gamma_th)? {
        return Ok(v);
    }
    let ctx = ClosedFormContext::new(p, gamma_th)?;
    let Some(decomp) = p.interference() else {
        let mut parts = [ctx.g0_scaled];
        return finish_closed_form(&mut parts, ctx.g0_scaled.abs(), gamma_th, p.gbar_h);
    };
    let mut parts = Vec::new();
    let mut magnitude = 0.0;
    for (i, (&mu, row)) in decomp.distinct_means().iter().zip(decomp.coefficients()).enumerate() {
        let tau = decomp.multiplicities()[i];
        let braces = ctx.braces(mu, tau)?;
        let ratio = 1.0 - mu / p.gbar_h;
        for (jm1, &chi) in row.iter().enumerate() {
            if chi == 0.0 {
                continue;
            }
            let pref = chi * ratio.powi(-(jm1 as i32 + 1));
            let (brace, brace_mag) = braces[jm1];
            parts.push(pref * brace);
            magnitude += pref.abs() * brace_mag;
        }
    }
    finish_closed_form(&mut parts, magnitude, gamma_th, p.gbar_h)
}

/// Closed form for `M` i.i.d. interferers of mean INR `mu`.
pub fn outage_closed_form_iid(gbar_h: f64, gbar_g: f64, mu: f64, m: usize, gamma_th: f64) -> Result<f64> {
    let p = EffectiveParams::new(gbar_h, gbar_g, &vec![mu; m])?;
    if let Some(v) = trivial_outage(&p, gamma_th)? {
        return Ok(v);
    }
    let ctx = ClosedFormContext::new(&p, gamma_th)?;
    if m == 0 {
        let mut parts = [ctx.g0_scaled];
        return finish_closed_form(&mut parts, ctx.g0_scaled.abs(), gamma_th, gbar_h);
    }
    let mu = p.mu()[0];
    let braces = ctx.braces(mu, m)?;
    let pref = (1.0 - mu / gbar_h).powi(-(m as i32));
    let (brace, mag) = braces[m - 1];
    let mut parts = [pref * brace];
    finish_closed_form(&mut parts, pref.abs() * mag, gamma_th, gbar_h)
}

/// Closed form for a single interferer of mean INR `mu`.
pub fn outage_closed_form_single(gbar_h: f64, gbar_g: f64, mu: f64, gamma_th: f64) -> Result<f64> {
    let p = EffectiveParams::new(gbar_h, gbar_g, &[mu])?;
    if let Some(v) = trivial_outage(&p, gamma_th)? {
        return Ok(v);
    }
    let mu = p.mu()[0];
    let ctx = ClosedFormContext::new(&p, gamma_th)?;
    let a = 1.0 / mu - 1.0 / gbar_h;
    let b = 1.0 / gbar_h + a / (1.0 + gamma_th);
    let bx = b * gamma_th;
    let g1 = gen_incomplete_gamma_scaled(1.0, bx, bx / gbar_g, &closed_form_quadrature())?;
    // 1 − γ̄_h/(γ̄_h−μ) Γ(1, ·) + b^{−1}/(γ̄_h−μ) e^{aγ_th/(1+γ_th)} Γ(1, bγ_th; ·),
    // written in terms of the success probability scaled by e^{γ_th/γ̄_h}.
    let mut parts = [
        gbar_h / (gbar_h - mu) * ctx.g0_scaled,
        -g1 / (b * (gbar_h - mu)),
    ];
    let magnitude = parts.iter().map(|v| v.abs()).sum();
    finish_closed_form(&mut parts, magnitude, gamma_th, gbar_h)
}

fn outage_closed_form(p: &EffectiveParams, gamma_th: f64) -> Result<f64> {
    match p.interference() {
        Some(d) if d.source_means().len() == 1 => {
            outage_closed_form_single(p.gbar_h, p.gbar_g, d.distinct_means()[0], gamma_th)
        }
        Some(d) if d.distinct_count() == 1 => outage_closed_form_iid(
            p.gbar_h,
            p.gbar_g,
            d.distinct_means()[0],
            d.multiplicities()[0],
            gamma_th,
        ),
        _ => outage_closed_form_general(p, gamma_th),
    }
}

/// `(P_out, error estimate)` by quadrature over the density of `Z`.
pub(crate) fn outage_integral(p: &EffectiveParams, gamma_th: f64) -> Result<(f64, f64)> {
    if let Some(v) = trivial_outage(p, gamma_th)? {
        return Ok((v, 0.0));
    }
    // Slowest exponential decay rate among the terms of f_Z.
    let mut rate = 1.0 / p.gbar_h;
    if let Some(d) = p.interference() {
        for &mu in d.distinct_means() {
            let a = 1.0 / mu - 1.0 / p.gbar_h;
            rate = rate.min(1.0 / p.gbar_h + a / (1.0 + gamma_th));
        }
    }
    let c = gamma_th / p.gbar_g;
    let r = integrate_to_infinity(
        |z| {
            let f = pdf_z(p, gamma_th, z);
            if f == 0.0 {
                0.0
            } else {
                f * (-c / z).exp()
            }
        },
        gamma_th,
        1.0 / rate,
        &integral_quadrature(p),
    )?;
    Ok(((1.0 - r.value).clamp(0.0, 1.0), r.abs_error))
}
