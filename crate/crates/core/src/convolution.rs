//! The convolutions `⋆_λ`.
//!
//! `⋆_0` is circle convolution pulled back through `x = cos θ`,
//!
//! ```text
//! (f ⋆_0 g)(cos θ) = (1/2) ∫_{-π}^{π} f(cos(θ - t)) g(cos t) dt,
//! ```
//!
//! and for integer `k ≥ 1`
//!
//! ```text
//! f ⋆_k g = (2k - 1)!! D^k [ (I^k f) ⋆_0 (I^k g) ].
//! ```
//!
//! For other `λ` the convolution is available in coefficient space only,
//! where it is the entrywise product of transforms.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::dimension_ops::{montee_iterate, DEFAULT_MONTEE_TOL};
use crate::error::{argument, Error, Result};
use crate::families::CapConvKernel;
use crate::gegenbauer::{self, clamp_unit, snap_unit, GegenbauerParams};
use crate::kernel::{breakpoint_angles, Kernel, Scaled, Zonal};
use crate::quadrature::{gauss_legendre, panel_breaks};
use crate::transform::{angular_integral, fourier_transform, SeriesCoeffs};

/// Nodes per panel used when a caller does not choose.
pub const DEFAULT_CONV_ORDER: usize = 48;

/// Largest `k` reachable by [`dimension_hop_conv`].
pub const MAX_HOP: usize = 8;

/// Angles closer than this to a convolution kink are reported as on it.
const KINK_WINDOW: f64 = 1e-10;

/// `χ_{[c,1]}`, the indicator of a cap of geodesic radius `arccos c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapFunction {
    c: f64,
}

impl CapFunction {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > -1.0 && c < 1.0) {
            return argument(format!("cap parameter c must lie in (-1, 1), got {c}"));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

impl Zonal for CapFunction {
    fn eval(&self, x: f64) -> f64 {
        if x >= self.c {
            1.0
        } else {
            0.0
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.c]
    }

    fn montee(&self) -> Option<Kernel> {
        Some(Arc::new(CapMontee { c: self.c, j: 1 }))
    }
}

/// `I^j χ_{[c,1]} = (x - c)^j_+ / j!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapMontee {
    c: f64,
    j: u32,
}

impl CapMontee {
    pub fn new(c: f64, j: u32) -> Result<Self> {
        CapFunction::new(c)?;
        if j == 0 {
            return argument("montée order must be at least 1");
        }
        Ok(Self { c, j })
    }
}

impl Zonal for CapMontee {
    fn eval(&self, x: f64) -> f64 {
        let u = snap_unit(x) - self.c;
        if u <= 0.0 {
            return 0.0;
        }
        let fact: f64 = (1..=self.j).map(f64::from).product();
        u.powi(self.j as i32) / fact
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.c]
    }

    fn montee_source(&self) -> Option<Kernel> {
        if self.j == 1 {
            Some(Arc::new(CapFunction { c: self.c }))
        } else {
            Some(Arc::new(CapMontee {
                c: self.c,
                j: self.j - 1,
            }))
        }
    }

    fn montee(&self) -> Option<Kernel> {
        Some(Arc::new(CapMontee {
            c: self.c,
            j: self.j + 1,
        }))
    }
}

fn wrap_angle(a: f64) -> f64 {
    a - 2.0 * PI * (a / (2.0 * PI)).round()
}

/// Singular angles of `f(cos u)`: its breakpoints plus `0` and `π`.
fn singular_angles(f: &dyn Zonal) -> Vec<f64> {
    let mut out = breakpoint_angles(f);
    out.push(0.0);
    out.push(PI);
    out
}

/// Panel breaks in `t ∈ [-π, π]` for the integrand `φ(θ - t) γ(t)`.
fn circle_breaks(theta: f64, f_angles: &[f64], g_angles: &[f64]) -> Vec<f64> {
    let mut interior = Vec::with_capacity(2 * (f_angles.len() + g_angles.len()));
    for &b in f_angles {
        interior.push(wrap_angle(theta - b));
        interior.push(wrap_angle(theta + b));
    }
    for &b in g_angles {
        interior.push(b);
        interior.push(-b);
    }
    panel_breaks(-PI, PI, interior)
}

/// Candidate kink angles of `f ⋆_0 g` inside `(0, π)`.
fn convolution_kinks(f_angles: &[f64], g_angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for &a in f_angles {
        for &b in g_angles {
            for v in [a + b, (a - b).abs()] {
                let r = if v > PI { 2.0 * PI - v } else { v };
                if r > KINK_WINDOW && r < PI - KINK_WINDOW {
                    out.push(r);
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= KINK_WINDOW);
    out
}

/// `(f ⋆_0 g)(cos θ)` by Gauss–Legendre panels split at every kink of the
/// integrand; `order` is the node count per panel.
pub fn conv0(f: &dyn Zonal, g: &dyn Zonal, theta: f64, order: usize) -> Result<f64> {
    if order == 0 {
        return argument("quadrature order must be at least 1");
    }
    if !theta.is_finite() {
        return argument("angle must be finite");
    }
    let rule = gauss_legendre(order)?;
    let breaks = circle_breaks(theta, &singular_angles(f), &singular_angles(g));
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = 0.5 * (w[1] + w[0]);
        for (&u, &wt) in rule.nodes().iter().zip(rule.weights()) {
            let t = mid + half * u;
            total += half * wt * f.eval((theta - t).cos()) * g.eval(t.cos());
        }
    }
    if !total.is_finite() {
        return Err(Error::Evaluation { x: theta.cos() });
    }
    Ok(0.5 * total)
}

/// `f ⋆_0 g` as a kernel.
#[derive(Debug, Clone)]
pub struct Conv0Kernel {
    f: Kernel,
    g: Kernel,
    order: usize,
    kinks: Vec<f64>,
}

impl Conv0Kernel {
    pub fn new(f: Kernel, g: Kernel, order: usize) -> Result<Self> {
        if order == 0 {
            return argument("quadrature order must be at least 1");
        }
        let kinks = convolution_kinks(&singular_angles(f.as_ref()), &singular_angles(g.as_ref()));
        Ok(Self { f, g, order, kinks })
    }
}

impl Zonal for Conv0Kernel {
    fn eval(&self, x: f64) -> f64 {
        conv0(
            self.f.as_ref(),
            self.g.as_ref(),
            snap_unit(x).acos(),
            self.order,
        )
        .unwrap_or(f64::NAN)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.kinks.iter().map(|a| a.cos()).collect()
    }
}

/// `[f ⋆_λ g]^(n) = f̂(n) ĝ(n)`.
pub fn conv_lambda_coeffs(fhat: &SeriesCoeffs, ghat: &SeriesCoeffs) -> Result<SeriesCoeffs> {
    if fhat.params() != ghat.params() {
        return argument(format!(
            "coefficient vectors belong to different lambda ({} vs {})",
            fhat.params().lambda(),
            ghat.params().lambda()
        ));
    }
    if fhat.truncation() != ghat.truncation() {
        return argument(format!(
            "coefficient vectors have different truncation ({} vs {})",
            fhat.truncation(),
            ghat.truncation()
        ));
    }
    let prod = fhat
        .as_slice()
        .iter()
        .zip(ghat.as_slice())
        .map(|(a, b)| a * b)
        .collect();
    SeriesCoeffs::new(fhat.params(), prod)
}

/// Sum of `coef · sin^a · cos^b`; `a` may be negative.
#[derive(Debug, Clone, Default, PartialEq)]
struct TrigPoly(Vec<(i32, i32, f64)>);

impl TrigPoly {
    fn one() -> Self {
        TrigPoly(vec![(0, 0, 1.0)])
    }

    fn push(&mut self, a: i32, b: i32, coef: f64) {
        if coef == 0.0 {
            return;
        }
        match self.0.iter_mut().find(|t| t.0 == a && t.1 == b) {
            Some(t) => t.2 += coef,
            None => self.0.push((a, b, coef)),
        }
    }

    fn add(&mut self, other: &TrigPoly) {
        for &(a, b, c) in &other.0 {
            self.push(a, b, c);
        }
    }

    fn derivative(&self) -> TrigPoly {
        let mut out = TrigPoly::default();
        for &(a, b, c) in &self.0 {
            if a != 0 {
                out.push(a - 1, b + 1, f64::from(a) * c);
            }
            if b != 0 {
                out.push(a + 1, b - 1, -f64::from(b) * c);
            }
        }
        out
    }

    fn times_sin(&self, power: i32, scale: f64) -> TrigPoly {
        TrigPoly(
            self.0
                .iter()
                .map(|&(a, b, c)| (a + power, b, c * scale))
                .collect(),
        )
    }

    fn eval(&self, s: f64, c: f64) -> f64 {
        self.0
            .iter()
            .map(|&(a, b, k)| k * s.powi(a) * c.powi(b))
            .sum()
    }
}

/// `jets[i][j]`: `d^i/du^i F(cos u) = Σ_j jets[i][j](u) F^{(j)}(cos u)`.
fn chain_jets(order: usize) -> Vec<Vec<TrigPoly>> {
    let mut jets = vec![vec![TrigPoly::one()]];
    for i in 0..order {
        let prev = &jets[i];
        let mut next = vec![TrigPoly::default(); i + 2];
        for (j, q) in prev.iter().enumerate() {
            next[j].add(&q.derivative());
            next[j + 1].add(&q.times_sin(1, -1.0));
        }
        jets.push(next);
    }
    jets
}

/// `D^k H(cos θ) = Σ_m p[m](θ) Φ^{(m)}(θ)` with `D = -csc θ d/dθ`.
fn descente_in_angle(k: usize) -> Vec<TrigPoly> {
    let mut p = vec![TrigPoly::one()];
    for _ in 0..k {
        let mut next = vec![TrigPoly::default(); p.len() + 1];
        for (m, q) in p.iter().enumerate() {
            next[m].add(&q.derivative().times_sin(-1, -1.0));
            next[m + 1].add(&q.times_sin(-1, -1.0));
        }
        p = next;
    }
    p
}

/// A value of `f ⋆_k g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopValue {
    pub value: f64,
    /// `x` sits on a candidate kink of the convolution, where the identity
    /// holds only almost everywhere.
    pub at_kink: bool,
}

/// `f ⋆_k g` for integer `k`, evaluated as
/// `(2k-1)!! D^k [(I^k f) ⋆_0 (I^k g)]` with the derivatives taken under
/// the integral sign. At `x = ±1` the derivative comes from the Taylor
/// coefficients of the even function `θ ↦ (F ⋆_0 G)(cos θ)`.
#[derive(Debug, Clone)]
pub struct HopConvolution {
    k: usize,
    f_levels: Vec<Kernel>,
    g_levels: Vec<Kernel>,
    f_angles: Vec<f64>,
    g_angles: Vec<f64>,
    kinks: Vec<f64>,
    jets: Vec<Vec<TrigPoly>>,
    descente: Vec<TrigPoly>,
    order: usize,
    scale: f64,
}

impl HopConvolution {
    /// `target` is the index of the result, `λ = k`.
    pub fn new(f: Kernel, g: Kernel, target: GegenbauerParams, order: usize) -> Result<Self> {
        let lambda = target.lambda();
        if lambda.fract() != 0.0 || lambda > MAX_HOP as f64 {
            return Err(Error::UnsupportedIndex {
                lambda,
                hint: "dimension hopping reaches integer lambda up to 8 from the circle; use coefficient space",
            });
        }
        if order == 0 {
            return argument("quadrature order must be at least 1");
        }
        let k = lambda as usize;
        let levels = |h: &Kernel| -> Result<Vec<Kernel>> {
            (0..=k)
                .map(|j| montee_iterate(h, j, DEFAULT_MONTEE_TOL))
                .collect()
        };
        let f_levels = levels(&f)?;
        let g_levels = levels(&g)?;
        let f_angles = singular_angles(f.as_ref());
        let g_angles = singular_angles(g.as_ref());
        let kinks = convolution_kinks(&f_angles, &g_angles);
        let scale = (1..=k).map(|j| (2 * j - 1) as f64).product();
        Ok(Self {
            k,
            f_levels,
            g_levels,
            f_angles,
            g_angles,
            kinks,
            jets: chain_jets(k),
            descente: descente_in_angle(k),
            order,
            scale,
        })
    }

    pub fn target(&self) -> usize {
        self.k
    }

    /// `d^a/du^a (I^k h)(cos u)` for `a = 0..out.len()`.
    fn angle_jets(&self, levels: &[Kernel], u: f64, vals: &mut Vec<f64>, out: &mut [f64]) {
        let (s, c) = u.sin_cos();
        let x = c.clamp(-1.0, 1.0);
        vals.clear();
        vals.extend((0..out.len()).map(|j| levels[self.k - j].eval(x)));
        for (a, slot) in out.iter_mut().enumerate() {
            *slot = self.jets[a]
                .iter()
                .zip(vals.iter())
                .map(|(q, v)| q.eval(s, c) * v)
                .sum();
        }
    }

    /// `Φ^{(m)}(θ)` for each requested `m`, splitting `m` derivatives as
    /// `⌈m/2⌉` on the first factor and `⌊m/2⌋` on the second.
    fn angle_derivatives(&self, theta: f64, orders: &[usize]) -> Result<Vec<f64>> {
        let top = orders.iter().copied().max().unwrap_or(0);
        let mut phi = vec![0.0; top.div_ceil(2) + 1];
        let mut gam = vec![0.0; top / 2 + 1];
        let mut vals = Vec::with_capacity(self.k + 1);
        let mut acc = vec![0.0; orders.len()];
        let rule = gauss_legendre(self.order)?;
        let breaks = circle_breaks(theta, &self.f_angles, &self.g_angles);
        for w in breaks.windows(2) {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[1] + w[0]);
            for (&node, &wt) in rule.nodes().iter().zip(rule.weights()) {
                let t = mid + half * node;
                self.angle_jets(&self.f_levels, theta - t, &mut vals, &mut phi);
                self.angle_jets(&self.g_levels, t, &mut vals, &mut gam);
                for (slot, &m) in acc.iter_mut().zip(orders) {
                    *slot += half * wt * phi[m.div_ceil(2)] * gam[m / 2];
                }
            }
        }
        if acc.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation { x: theta.cos() });
        }
        Ok(acc.into_iter().map(|v| 0.5 * v).collect())
    }

    /// `D^k H` at `x = ±1`.
    fn endpoint(&self, sign: f64) -> Result<f64> {
        let k = self.k;
        let theta = if sign > 0.0 { 0.0 } else { PI };
        let orders: Vec<usize> = (0..=k).map(|j| 2 * j).collect();
        let even = self.angle_derivatives(theta, &orders)?;
        let mut fact = 1.0;
        let taylor: Vec<f64> = even
            .iter()
            .enumerate()
            .map(|(j, v)| {
                if j > 0 {
                    fact *= (2 * j - 1) as f64 * (2 * j) as f64;
                }
                v / fact
            })
            .collect();
        // x - x0 = σ (cos δ - 1) as a series in z = δ²
        let mut y = vec![0.0; k + 1];
        let mut fact = 1.0;
        for (i, slot) in y.iter_mut().enumerate().skip(1) {
            fact *= (2 * i - 1) as f64 * (2 * i) as f64;
            let alt = if i % 2 == 0 { 1.0 } else { -1.0 };
            *slot = sign * alt / fact;
        }
        let mut powers = vec![vec![0.0; k + 1]; k + 1];
        powers[0][0] = 1.0;
        for i in 1..=k {
            for j in 0..=k {
                powers[i][j] = (1..=j).map(|l| y[l] * powers[i - 1][j - l]).sum();
            }
        }
        let mut e = vec![0.0; k + 1];
        for j in 0..=k {
            let known: f64 = (0..j).map(|i| e[i] * powers[i][j]).sum();
            e[j] = (taylor[j] - known) / powers[j][j];
        }
        let kfact: f64 = (1..=k).map(|j| j as f64).product();
        Ok(kfact * e[k])
    }

    pub fn evaluate(&self, x: f64) -> Result<HopValue> {
        let x = clamp_unit(x)?;
        let raw = if x == 1.0 || x == -1.0 {
            self.endpoint(x)?
        } else {
            let theta = x.acos();
            let orders: Vec<usize> = (0..=self.k).collect();
            let derivs = self.angle_derivatives(theta, &orders)?;
            let (s, c) = theta.sin_cos();
            self.descente
                .iter()
                .zip(&derivs)
                .map(|(p, d)| p.eval(s, c) * d)
                .sum()
        };
        let theta = x.acos();
        let at_kink = self.kinks.iter().any(|&a| (a - theta).abs() <= KINK_WINDOW);
        Ok(HopValue {
            value: self.scale * raw,
            at_kink,
        })
    }
}

impl Zonal for HopConvolution {
    fn eval(&self, x: f64) -> f64 {
        self.evaluate(x).map(|v| v.value).unwrap_or(f64::NAN)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.kinks.iter().map(|a| a.cos()).collect()
    }
}

/// `(f ⋆_λ g)(x)` for integer `λ` through repeated dimension hops.
pub fn dimension_hop_conv(
    f: &Kernel,
    g: &Kernel,
    target: GegenbauerParams,
    x: f64,
    order: usize,
) -> Result<HopValue> {
    HopConvolution::new(Arc::clone(f), Arc::clone(g), target, order)?.evaluate(x)
}

/// `χ_{[c,1]} ⋆_λ χ_{[c,1]}`: the closed form `a N_{2λ+1}` when one exists,
/// otherwise dimension hopping.
pub fn cap_self_convolution(target: GegenbauerParams, c: f64) -> Result<Kernel> {
    let cap: Kernel = Arc::new(CapFunction::new(c)?);
    let lambda = target.lambda();
    if c > 0.0 && [1.0, 2.0, 3.0, 4.0].contains(&lambda) {
        let n = CapConvKernel::new(2 * lambda as u32 + 1, c.acos())?;
        let a = n.coefficients().a;
        return Ok(Arc::new(Scaled {
            factor: a,
            inner: Arc::new(n),
        }));
    }
    if target.is_zero() {
        return Ok(Arc::new(Conv0Kernel::new(
            Arc::clone(&cap),
            cap,
            DEFAULT_CONV_ORDER,
        )?));
    }
    Ok(Arc::new(HopConvolution::new(
        Arc::clone(&cap),
        cap,
        target,
        DEFAULT_CONV_ORDER,
    )?))
}

/// `∫_c^1 C^λ_n dΩ_λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapTransform {
    pub value: f64,
    /// The closed form does not cover `n = 0`; that value is a quadrature.
    pub by_quadrature: bool,
}

/// Gauss–Legendre nodes used by the cap quadratures.
const CAP_QUAD_ORDER: usize = 96;

/// `∫_c^1 C^λ_n dΩ_λ = (2λ / (n(2λ+n))) (1-c²)^{λ+1/2} C^{λ+1}_{n-1}(c)`.
pub fn cap_transform(params: GegenbauerParams, c: f64, n: usize) -> Result<CapTransform> {
    if params.is_zero() {
        return Err(Error::UnsupportedIndex {
            lambda: 0.0,
            hint: "the cap transform formula needs lambda > 0",
        });
    }
    if !(c > -1.0 && c <= 1.0) {
        return argument(format!("cap parameter c must lie in (-1, 1], got {c}"));
    }
    if n == 0 {
        return Ok(CapTransform {
            value: cap_transform_quadrature(params, c, 0, CAP_QUAD_ORDER)?,
            by_quadrature: true,
        });
    }
    let lambda = params.lambda();
    let nf = n as f64;
    let factor = 2.0 * lambda / (nf * (2.0 * lambda + nf));
    let value =
        factor * (1.0 - c * c).powf(lambda + 0.5) * gegenbauer::eval(params.raised(), n - 1, c)?;
    Ok(CapTransform {
        value,
        by_quadrature: false,
    })
}

/// `∫_c^1 C^λ_n dΩ_λ` by Gauss–Legendre in the angle variable.
pub fn cap_transform_quadrature(
    params: GegenbauerParams,
    c: f64,
    n: usize,
    order: usize,
) -> Result<f64> {
    let c = clamp_unit(c)?;
    angular_integral(params, 0.0, c.acos(), order, |x| {
        gegenbauer::eval_unchecked(params, n, x)
    })
}

/// `a_{λ,n+1} = C^λ_{n+1}(1) w_{λ+1}(n) / (2 μ_λ C^{λ+1}_n(1) w_λ(n+1))`,
/// which equals `1/(2λ+1)`.
pub fn hop_constant(params: GegenbauerParams, n: usize) -> f64 {
    let up = params.raised();
    let mu = crate::dimension_ops::mu(params);
    gegenbauer::at_one(params, n + 1) * gegenbauer::weight_w(up, n)
        / (2.0 * mu * gegenbauer::at_one(up, n) * gegenbauer::weight_w(params, n + 1))
}

/// Deviations found by [`conv_property_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvPropertyReport {
    pub lambda: f64,
    /// `‖f ⋆ g‖`, when the convolution is available pointwise.
    pub norm_conv: Option<f64>,
    /// `‖f‖ ‖g‖`.
    pub norm_product: f64,
    /// `max |f ⋆ g - g ⋆ f|`.
    pub commutativity: f64,
    /// `max |f ⋆ (g ⋆ h) - (f ⋆ g) ⋆ h|`.
    pub associativity: f64,
    /// `max_n |[f ⋆ g]^(n) - f̂(n) ĝ(n)|`.
    pub multiplicativity: f64,
}

impl ConvPropertyReport {
    pub fn norm_bound_holds(&self) -> bool {
        self.norm_conv
            .is_none_or(|n| n <= self.norm_product * (1.0 + 1e-12))
    }
}

/// Sample angles for the pointwise checks.
const PROPERTY_SAMPLES: usize = 13;
/// Transform length used by the coefficient-space checks.
const PROPERTY_TRUNCATION: usize = 12;

/// `∫ |f| dΩ_λ`.
pub fn l1_norm(f: &dyn Zonal, params: GegenbauerParams, order: usize) -> Result<f64> {
    let breaks = panel_breaks(0.0, PI, breakpoint_angles(f));
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += angular_integral(params, w[0], w[1], order, |x| f.eval(x).abs())?;
    }
    if !total.is_finite() {
        return Err(Error::Evaluation { x: f64::NAN });
    }
    Ok(total)
}

/// Numerical check of boundedness, commutativity, associativity and
/// multiplicativity. At `λ = 0` the convolutions are direct integrals; at
/// `λ > 0` the algebraic properties are checked on transforms, and the
/// norm bound through dimension hopping when `λ` is an integer.
pub fn conv_property_check(
    f: &Kernel,
    g: &Kernel,
    h: &Kernel,
    params: GegenbauerParams,
    order: usize,
) -> Result<ConvPropertyReport> {
    let norm_product = l1_norm(f.as_ref(), params, order)? * l1_norm(g.as_ref(), params, order)?;
    let fhat = fourier_transform(f.as_ref(), params, PROPERTY_TRUNCATION, order)?;
    let ghat = fourier_transform(g.as_ref(), params, PROPERTY_TRUNCATION, order)?;
    let hhat = fourier_transform(h.as_ref(), params, PROPERTY_TRUNCATION, order)?;
    if params.is_zero() {
        let fg: Kernel = Arc::new(Conv0Kernel::new(Arc::clone(f), Arc::clone(g), order)?);
        let gf: Kernel = Arc::new(Conv0Kernel::new(Arc::clone(g), Arc::clone(f), order)?);
        let gh: Kernel = Arc::new(Conv0Kernel::new(Arc::clone(g), Arc::clone(h), order)?);
        let f_gh = Conv0Kernel::new(Arc::clone(f), gh, order)?;
        let fg_h = Conv0Kernel::new(Arc::clone(&fg), Arc::clone(h), order)?;
        let mut commutativity: f64 = 0.0;
        let mut associativity: f64 = 0.0;
        for i in 0..PROPERTY_SAMPLES {
            let x = (PI * i as f64 / (PROPERTY_SAMPLES - 1) as f64).cos();
            commutativity = commutativity.max((fg.eval(x) - gf.eval(x)).abs());
            associativity = associativity.max((f_gh.eval(x) - fg_h.eval(x)).abs());
        }
        let fg_hat = fourier_transform(fg.as_ref(), params, PROPERTY_TRUNCATION, order)?;
        let product = conv_lambda_coeffs(&fhat, &ghat)?;
        let multiplicativity = max_gap(fg_hat.as_slice(), product.as_slice());
        let norm_conv = l1_norm(fg.as_ref(), params, order)?;
        if !(commutativity.is_finite() && associativity.is_finite()) {
            return Err(Error::Evaluation { x: f64::NAN });
        }
        return Ok(ConvPropertyReport {
            lambda: 0.0,
            norm_conv: Some(norm_conv),
            norm_product,
            commutativity,
            associativity,
            multiplicativity,
        });
    }
    let fg = conv_lambda_coeffs(&fhat, &ghat)?;
    let gf = conv_lambda_coeffs(&ghat, &fhat)?;
    let f_gh = conv_lambda_coeffs(&fhat, &conv_lambda_coeffs(&ghat, &hhat)?)?;
    let fg_h = conv_lambda_coeffs(&fg, &hhat)?;
    let norm_conv = match HopConvolution::new(Arc::clone(f), Arc::clone(g), params, order) {
        Ok(hop) => Some(l1_norm(&hop, params, order)?),
        Err(Error::UnsupportedIndex { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ConvPropertyReport {
        lambda: params.lambda(),
        norm_conv,
        norm_product,
        commutativity: max_gap(fg.as_slice(), gf.as_slice()),
        associativity: max_gap(f_gh.as_slice(), fg_h.as_slice()),
        multiplicativity: 0.0,
    })
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Constant;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn p(lambda: f64) -> GegenbauerParams {
        GegenbauerParams::new(lambda).unwrap()
    }

    fn cap(c: f64) -> Kernel {
        Arc::new(CapFunction::new(c).unwrap())
    }

    fn ramp_closed_form(s: f64, x: f64) -> f64 {
        let s2 = 2.0 * s;
        0.25 * (s2 - x.acos()) * (x + s2.cos() + 1.0) - 0.25 * s2.sin() * x
            + 0.25 * (2.0 + s2.cos()) * (1.0 - x * x).sqrt()
            - 0.5 * s2.sin()
    }

    #[test]
    fn conv0_of_constants() {
        let v = conv0(&Constant(1.0), &Constant(1.0), 0.7, 16).unwrap();
        assert!((v - PI).abs() < 1e-14);
    }

    #[test]
    fn conv0_of_ramps_matches_closed_form() {
        let s = FRAC_PI_4;
        let ig = CapMontee { c: s.cos(), j: 1 };
        for theta in [0.0, 0.3, 0.9, 1.4] {
            let v = conv0(&ig, &ig, theta, 32).unwrap();
            let expect = ramp_closed_form(s, theta.cos());
            assert!((v - expect).abs() < 1e-14, "θ = {theta}: {v} vs {expect}");
        }
        assert_eq!(conv0(&ig, &ig, 1.7, 32).unwrap().abs(), 0.0);
    }

    #[test]
    fn trig_algebra_derivatives() {
        // d/du cos(u) = -sin(u); second jet of F(cos u) is -cos F' + sin² F''
        let jets = chain_jets(2);
        let (s, c) = 0.4f64.sin_cos();
        assert!((jets[1][1].eval(s, c) + s).abs() < 1e-15);
        assert!((jets[2][1].eval(s, c) + c).abs() < 1e-15);
        assert!((jets[2][2].eval(s, c) - s * s).abs() < 1e-15);
        let d = descente_in_angle(1);
        assert!((d[1].eval(s, c) + 1.0 / s).abs() < 1e-15);
    }

    #[test]
    fn hop_reproduces_printed_normalizations() {
        let s = FRAC_PI_4;
        let g = cap(s.cos());
        let a1 = dimension_hop_conv(&g, &g, p(1.0), 1.0, 48).unwrap();
        assert!((a1.value - (0.5 * s - 0.25 * (2.0 * s).sin())).abs() < 1e-13);
        let s = FRAC_PI_3;
        let g = cap(s.cos());
        let a2 = dimension_hop_conv(&g, &g, p(2.0), 1.0, 48).unwrap();
        let expect =
            0.25 * s.sin() * s.cos().powi(3) - 5.0 / 8.0 * s.sin() * s.cos() + 3.0 / 8.0 * s;
        assert!(
            (a2.value - expect).abs() < 1e-13,
            "{} vs {expect}",
            a2.value
        );
    }

    #[test]
    fn hop_interior_matches_n3() {
        let s = FRAC_PI_6;
        let g = cap(s.cos());
        let hop = HopConvolution::new(Arc::clone(&g), g, p(1.0), 48).unwrap();
        let n3 = CapConvKernel::new(3, s).unwrap();
        let a = n3.coefficients().a;
        for x in [0.55, 0.7, 0.9, 0.99] {
            let v = hop.evaluate(x).unwrap();
            assert!((v.value / a - n3.eval(x)).abs() < 1e-10, "x = {x}");
        }
        assert!(hop.evaluate((2.0 * s).cos()).unwrap().at_kink);
        assert!(hop.eval(-1.0).abs() < 1e-14);
    }

    #[test]
    fn hop_rejects_fractional_index() {
        let g = cap(0.2);
        assert!(matches!(
            dimension_hop_conv(&g, &g, p(1.5), 0.0, 16),
            Err(Error::UnsupportedIndex { .. })
        ));
    }

    #[test]
    fn zero_kernels_convolve_to_zero() {
        let z: Kernel = Arc::new(Constant(0.0));
        assert_eq!(
            dimension_hop_conv(&z, &z, p(2.0), 0.3, 16).unwrap().value,
            0.0
        );
    }

    #[test]
    fn coefficient_product_checks() {
        let f = SeriesCoeffs::new(p(1.0), vec![1.0, 2.0, 3.0]).unwrap();
        let one = SeriesCoeffs::new(p(1.0), vec![2.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            conv_lambda_coeffs(&f, &one).unwrap().as_slice(),
            &[2.0, 0.0, 0.0]
        );
        let other = SeriesCoeffs::new(p(2.0), vec![1.0, 2.0, 3.0]).unwrap();
        assert!(conv_lambda_coeffs(&f, &other).is_err());
        let short = SeriesCoeffs::new(p(1.0), vec![1.0]).unwrap();
        assert!(conv_lambda_coeffs(&f, &short).is_err());
    }

    #[test]
    fn cap_transform_values() {
        let v = cap_transform(p(1.0), 0.0, 1).unwrap();
        assert!((v.value - 2.0 / 3.0).abs() < 1e-15 && !v.by_quadrature);
        assert!(cap_transform(p(1.0), 1.0, 4).unwrap().value.abs() < 1e-15);
        let q = cap_transform_quadrature(p(2.0), 0.5, 3, 64).unwrap();
        assert!((cap_transform(p(2.0), 0.5, 3).unwrap().value - q).abs() < 1e-12);
        assert!(cap_transform(p(1.0), 0.3, 0).unwrap().by_quadrature);
        assert!(cap_transform(p(0.0), 0.3, 2).is_err());
    }

    #[test]
    fn hop_constant_is_reciprocal() {
        for lambda in [0.0, 0.5, 1.0, 2.0] {
            for n in 0..=20 {
                let a = hop_constant(p(lambda), n);
                assert!(
                    (a - 1.0 / (2.0 * lambda + 1.0)).abs() < 1e-12,
                    "λ = {lambda}, n = {n}: {a}"
                );
            }
        }
    }

    #[test]
    fn property_check_at_zero() {
        let f = cap(0.0);
        let r = conv_property_check(&f, &f, &f, p(0.0), 32).unwrap();
        assert!(r.commutativity <= 1e-10);
        assert!(r.associativity <= 1e-8);
        assert!(r.multiplicativity <= 1e-8);
        assert!(r.norm_bound_holds());
    }
}
