//! Iteration of additive fourth-order maps.
//!
//! A state is the window `[x[1], x[0], x[-1], x[-2]]`. Stepping forward
//! solves the equation for `x[2]`; stepping backward solves it for `x[-2]`.
//! Orbits run either in IEEE doubles or in exact rationals. Exact orbits are
//! guarded against unbounded growth of the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::canonical::{canonical_model, CaseTag};
use crate::expr::{Poly, RationalExpr, Scalar, Var};
use crate::family::InvariantPair;
use crate::lagrangian::{euler_lagrange, DiscreteLagrangian, Multiplier, StructuredEquation};
use crate::poisson::{det4, WINDOW};

/// Exact orbits stop once a coordinate needs more bits than this.
pub const BIT_GUARD: u64 = 100_000;

/// Relative threshold under which a float denominator counts as a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

pub type State4 = [f64; 4];
pub type ExactState4 = [Scalar; 4];

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepError {
    #[error("singular step: {factor} vanishes at the current state")]
    Singular { factor: String },
    #[error("float overflow")]
    Overflow,
    #[error("exact coordinates exceed {limit} bits")]
    BitGuard { limit: u64 },
    #[error("the map has unbound parameter {0}")]
    Unbound(String),
    #[error("cannot build the map: {0}")]
    Model(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Float,
    Exact,
}

fn window_index(v: Var) -> Option<usize> {
    let k = v.shift_offset()?;
    WINDOW.iter().position(|w| *w == k)
}

/// A polynomial over the window compiled for fast float evaluation.
#[derive(Clone, Debug)]
struct CompiledPoly {
    terms: Vec<(f64, [u32; 4])>,
}

impl CompiledPoly {
    fn new(p: &Poly) -> Result<Self, StepError> {
        let mut terms = Vec::with_capacity(p.nterms());
        for (m, c) in p.terms() {
            let mut e = [0u32; 4];
            for (v, k) in m.pairs() {
                let i = window_index(*v).ok_or_else(|| StepError::Unbound(v.name()))?;
                e[i] = *k;
            }
            terms.push((c.to_f64(), e));
        }
        Ok(CompiledPoly { terms })
    }

    fn eval(&self, s: &State4) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                let mut t = *c;
                for i in 0..4 {
                    if e[i] > 0 {
                        t *= s[i].powi(e[i] as i32);
                    }
                }
                t
            })
            .sum()
    }
}

/// A rational function over the window compiled for float evaluation.
#[derive(Clone, Debug)]
pub struct Compiled {
    num: CompiledPoly,
    den: CompiledPoly,
    exact: ExactCompiled,
    source: RationalExpr,
}

impl Compiled {
    pub fn new(e: &RationalExpr) -> Result<Self, StepError> {
        Ok(Compiled {
            num: CompiledPoly::new(e.num())?,
            den: CompiledPoly::new(e.den())?,
            exact: ExactCompiled::new(e)?,
            source: e.clone(),
        })
    }

    pub fn eval(&self, s: &State4) -> f64 {
        self.num.eval(s) / self.den.eval(s)
    }

    /// Evaluates with the pole test `|den| < tol·(1 + |s|²)`.
    pub fn eval_checked(&self, s: &State4) -> Result<f64, StepError> {
        let d = self.den.eval(s);
        let norm2: f64 = s.iter().map(|x| x * x).sum();
        if !(d.abs() >= POLE_TOLERANCE * (1.0 + norm2)) {
            return Err(StepError::Singular { factor: self.source.den().to_string() });
        }
        Ok(self.num.eval(s) / d)
    }

    pub fn eval_exact(&self, s: &ExactState4) -> Result<Scalar, StepError> {
        self.exact.eval(s).ok_or_else(|| StepError::Singular { factor: self.source.den().to_string() })
    }

    pub fn expr(&self) -> &RationalExpr {
        &self.source
    }
}

fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

/// A rational function over the window with integer coefficients, evaluated
/// at rational points by clearing denominators: with `x_i = n_i/d_i` and
/// `D_i` the largest degree of `x_i`, both numerator and denominator are
/// multiplied by `Π d_i^{D_i}`, so only one reduction happens per value.
#[derive(Clone, Debug)]
struct ExactCompiled {
    num: Vec<(BigInt, [u32; 4])>,
    den: Vec<(BigInt, [u32; 4])>,
    deg: [u32; 4],
}

impl ExactCompiled {
    fn new(e: &RationalExpr) -> Result<Self, StepError> {
        let mut common = BigInt::one();
        for (_, c) in e.num().terms().iter().chain(e.den().terms()) {
            common = lcm(&common, &c.denom());
        }
        let mut deg = [0u32; 4];
        let mut conv = |p: &Poly| -> Result<Vec<(BigInt, [u32; 4])>, StepError> {
            p.terms()
                .iter()
                .map(|(m, c)| {
                    let mut ex = [0u32; 4];
                    for (v, k) in m.pairs() {
                        let i = window_index(*v).ok_or_else(|| StepError::Unbound(v.name()))?;
                        ex[i] = *k;
                        deg[i] = deg[i].max(*k);
                    }
                    Ok((c.numer() * (&common / c.denom()), ex))
                })
                .collect()
        };
        let num = conv(e.num())?;
        let den = conv(e.den())?;
        Ok(ExactCompiled { num, den, deg })
    }

    fn eval(&self, s: &ExactState4) -> Option<Scalar> {
        let pows = |base: BigInt, d: u32| {
            let mut v = Vec::with_capacity(d as usize + 1);
            v.push(BigInt::one());
            for k in 1..=d as usize {
                let next = &v[k - 1] * &base;
                v.push(next);
            }
            v
        };
        let np: Vec<Vec<BigInt>> = (0..4).map(|i| pows(s[i].numer(), self.deg[i])).collect();
        let dp: Vec<Vec<BigInt>> = (0..4).map(|i| pows(s[i].denom(), self.deg[i])).collect();
        let sum = |terms: &[(BigInt, [u32; 4])]| {
            let mut acc = BigInt::zero();
            for (c, ex) in terms {
                let mut t = c.clone();
                for i in 0..4 {
                    let e = ex[i] as usize;
                    let d = self.deg[i] as usize;
                    if e > 0 {
                        t *= &np[i][e];
                    }
                    if d > e {
                        t *= &dp[i][d - e];
                    }
                }
                acc += t;
            }
            acc
        };
        let d = sum(&self.den);
        if d.is_zero() {
            return None;
        }
        Some(Scalar::from_big(BigRational::new(sum(&self.num), d)))
    }
}


fn shift_expr(e: &RationalExpr, by: i32) -> RationalExpr {
    e.rename(&|v| match v.shift_offset() {
        Some(k) => Var::shift(k + by),
        None => v,
    })
}

/// The map `(x[1], x[0], x[-1], x[-2]) -> (x[2], x[1], x[0], x[-1])` and its
/// inverse, for an equation with numeric coefficients.
#[derive(Clone, Debug)]
pub struct AdditiveMap {
    pub equation: StructuredEquation,
    top: Compiled,
    bottom: Compiled,
    top_grad: [Compiled; 4],
    g: RationalExpr,
    lambda_squared: Scalar,
}

impl AdditiveMap {
    pub fn new(eq: &StructuredEquation) -> Result<Self, StepError> {
        let top = eq.solved_top();
        // x[-2] from (x[2], x[1], x[0], x[-1]), moved down to give x[-3].
        let bottom = shift_expr(&eq.solved_bottom(), -1);
        let vars = WINDOW.map(Var::shift);
        let grads: Vec<Compiled> = vars.iter().map(|v| Compiled::new(&top.differentiate(*v))).collect::<Result<_, _>>()?;
        let lambda_squared = eq
            .lambda
            .square
            .constant_value()
            .ok_or_else(|| StepError::Unbound(eq.lambda.square.to_string()))?;
        Ok(AdditiveMap {
            top: Compiled::new(&top)?,
            bottom: Compiled::new(&bottom)?,
            top_grad: grads.try_into().expect("four partials"),
            g: eq.g.clone(),
            lambda_squared,
            equation: eq.clone(),
        })
    }

    pub fn lambda_squared(&self) -> &Scalar {
        &self.lambda_squared
    }

    pub fn g_f64(&self, x: f64) -> f64 {
        self.g.eval_f64(&|v| (v == Var::XI).then_some(x)).unwrap_or(f64::NAN)
    }

    pub fn step_forward(&self, s: &State4) -> Result<State4, StepError> {
        let top = self.top.eval_checked(s)?;
        if !top.is_finite() {
            return Err(StepError::Overflow);
        }
        Ok([top, s[0], s[1], s[2]])
    }

    pub fn step_backward(&self, s: &State4) -> Result<State4, StepError> {
        let bot = self.bottom.eval_checked(s)?;
        if !bot.is_finite() {
            return Err(StepError::Overflow);
        }
        Ok([s[1], s[2], s[3], bot])
    }

    pub fn step_forward_exact(&self, s: &ExactState4) -> Result<ExactState4, StepError> {
        let top = guard(self.top.eval_exact(s)?)?;
        Ok([top, s[0].clone(), s[1].clone(), s[2].clone()])
    }

    pub fn step_backward_exact(&self, s: &ExactState4) -> Result<ExactState4, StepError> {
        let bot = guard(self.bottom.eval_exact(s)?)?;
        Ok([s[1].clone(), s[2].clone(), s[3].clone(), bot])
    }

    /// Determinant of the differential of the forward map at `s`.
    pub fn jacobian_det(&self, s: &State4) -> Result<f64, StepError> {
        self.top.eval_checked(s)?;
        let row: Vec<f64> = self.top_grad.iter().map(|c| c.eval(s)).collect();
        let m = [
            [row[0], row[1], row[2], row[3]],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        Ok(det4_f64(&m))
    }

    /// `λ²·g(x[-1])/g(x[1])` at `s`.
    pub fn jacobian_formula(&self, s: &State4) -> f64 {
        self.lambda_squared.to_f64() * self.g_f64(s[2]) / self.g_f64(s[0])
    }
}

fn guard(x: Scalar) -> Result<Scalar, StepError> {
    if x.bits() > BIT_GUARD {
        return Err(StepError::BitGuard { limit: BIT_GUARD });
    }
    Ok(x)
}

fn det4_f64(m: &[[f64; 4]; 4]) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).expect("nonempty");
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in (c + 1)..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Symbolic determinant of the differential of the forward map.
pub fn jacobian_det_symbolic(eq: &StructuredEquation) -> RationalExpr {
    let top = eq.solved_top();
    let z = RationalExpr::zero;
    let o = RationalExpr::one;
    let m = [
        WINDOW.map(|k| top.differentiate(Var::shift(k))),
        [o(), z(), z(), z()],
        [z(), o(), z(), z()],
        [z(), z(), o(), z()],
    ];
    det4(&m)
}

/// `λ²·g(x[-1])/g(x[1])`.
pub fn jacobian_formula_symbolic(eq: &StructuredEquation) -> RationalExpr {
    let g = |k: i32| crate::lagrangian::place(&eq.g, k, k);
    &(&eq.lambda.square * &g(-1)) / &g(1)
}

/// A sequence of states, each the image of the previous one.
#[derive(Clone, Debug, Serialize)]
pub struct Orbit<S> {
    pub states: Vec<S>,
    pub mode: Mode,
    pub label: String,
    /// Why the orbit stopped early, if it did.
    pub diagnostic: Option<StepError>,
}

impl<S> Orbit<S> {
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn complete(&self) -> bool {
        self.diagnostic.is_none()
    }
}

impl<T: PartialEq> Orbit<[T; 4]> {
    /// Consecutive windows overlap in three entries.
    pub fn is_shift_consistent(&self) -> bool {
        self.states.windows(2).all(|w| w[1][1..] == w[0][..3])
    }
}

/// Runs `n` forward steps (or backward ones when `forward` is false),
/// stopping at the first singular step.
pub fn iterate(map: &AdditiveMap, s0: State4, n: usize, forward: bool) -> Orbit<State4> {
    let mut states = Vec::with_capacity(n + 1);
    states.push(s0);
    let mut diagnostic = None;
    for _ in 0..n {
        let s = states.last().expect("nonempty");
        let next = if forward { map.step_forward(s) } else { map.step_backward(s) };
        match next {
            Ok(t) => states.push(t),
            Err(e) => {
                diagnostic = Some(e);
                break;
            }
        }
    }
    Orbit { states, mode: Mode::Float, label: String::new(), diagnostic }
}

pub fn iterate_exact(map: &AdditiveMap, s0: ExactState4, n: usize, forward: bool) -> Orbit<ExactState4> {
    let mut states = Vec::with_capacity(n + 1);
    states.push(s0);
    let mut diagnostic = None;
    for _ in 0..n {
        let s = states.last().expect("nonempty");
        let next = if forward { map.step_forward_exact(s) } else { map.step_backward_exact(s) };
        match next {
            Ok(t) => states.push(t),
            Err(e) => {
                diagnostic = Some(e);
                break;
            }
        }
    }
    Orbit { states, mode: Mode::Exact, label: String::new(), diagnostic }
}

/// Phase-space volume along an orbit.
#[derive(Clone, Debug, Serialize)]
pub struct VolumeSeries {
    /// `log|V_n|` with `V_n = g(x[0])·g(x[-1])·det(Dφⁿ)`, the determinant
    /// accumulated from the numeric Jacobians along the orbit.
    pub log_volume: Vec<f64>,
    /// `log|λ^(2n)|`.
    pub log_expected: Vec<f64>,
    /// Largest `|V_n/V_0 / λ^(2n) - 1|`.
    pub max_relative_error: f64,
}

pub fn volume_series(orbit: &Orbit<State4>, map: &AdditiveMap) -> Result<VolumeSeries, StepError> {
    let ll = map.lambda_squared().to_f64().abs().ln();
    let mut log_det = 0.0;
    let mut log_volume = Vec::with_capacity(orbit.states.len());
    let mut log_expected = Vec::with_capacity(orbit.states.len());
    let mut worst: f64 = 0.0;
    for (n, s) in orbit.states.iter().enumerate() {
        let v = (map.g_f64(s[1]) * map.g_f64(s[2])).abs().ln() + log_det;
        log_volume.push(v);
        log_expected.push(n as f64 * ll);
        let rel = ((v - log_volume[0]) - n as f64 * ll).exp_m1().abs();
        worst = worst.max(rel);
        if n + 1 < orbit.states.len() {
            log_det += map.jacobian_det(s)?.abs().ln();
        }
    }
    Ok(VolumeSeries { log_volume, log_expected, max_relative_error: worst })
}

/// Invariant drift along an orbit.
#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub steps: usize,
    pub i_initial: f64,
    pub j_initial: f64,
    /// Largest `|F_n - F_0| / max(|F_0|, 1e-300)`.
    pub i_max_relative: f64,
    pub j_max_relative: f64,
    /// For exact orbits: whether every value equals the initial one.
    pub exact_zero: Option<bool>,
}

pub fn drift_report(orbit: &Orbit<State4>, inv: &InvariantPair) -> Result<DriftReport, StepError> {
    let (ci, cj) = (Compiled::new(&inv.i)?, Compiled::new(&inv.j)?);
    let vi: Vec<f64> = orbit.states.iter().map(|s| ci.eval(s)).collect();
    let vj: Vec<f64> = orbit.states.iter().map(|s| cj.eval(s)).collect();
    let rel = |v: &[f64]| {
        let d = v[0].abs().max(1e-300);
        v.iter().map(|x| (x - v[0]).abs() / d).fold(0.0, f64::max)
    };
    Ok(DriftReport {
        steps: orbit.steps(),
        i_initial: vi[0],
        j_initial: vj[0],
        i_max_relative: rel(&vi),
        j_max_relative: rel(&vj),
        exact_zero: None,
    })
}

pub fn drift_report_exact(orbit: &Orbit<ExactState4>, inv: &InvariantPair) -> Result<DriftReport, StepError> {
    let (ci, cj) = (Compiled::new(&inv.i)?, Compiled::new(&inv.j)?);
    let vi: Vec<Scalar> = orbit.states.iter().map(|s| ci.eval_exact(s)).collect::<Result<_, _>>()?;
    let vj: Vec<Scalar> = orbit.states.iter().map(|s| cj.eval_exact(s)).collect::<Result<_, _>>()?;
    let rel = |v: &[Scalar]| {
        let d = v[0].to_f64().abs().max(1e-300);
        v.iter().map(|x| (x - &v[0]).to_f64().abs() / d).fold(0.0, f64::max)
    };
    let zero = vi.iter().all(|x| *x == vi[0]) && vj.iter().all(|x| *x == vj[0]);
    Ok(DriftReport {
        steps: orbit.steps(),
        i_initial: vi[0].to_f64(),
        j_initial: vj[0].to_f64(),
        i_max_relative: rel(&vi),
        j_max_relative: rel(&vj),
        exact_zero: Some(zero),
    })
}

/// Parameters of the dissipation figure, read as `(α, β, γ)` of the first
/// canonical form.
pub const FIGURE1_PARAMS: (i64, i64, i64) = (2, 0, -1);
pub const FIGURE1_LAMBDA: (i64, i64) = (999, 1000);
pub const FIGURE1_INITIAL: State4 = [0.01, 0.01, 0.01, 0.01];
pub const FIGURE1_STEPS: usize = 10_000;

/// The map of a canonical form at numeric `(α, β, γ)`, or of the
/// Euler-Lagrange equation of `λ^(-n)·L` with `L` its Lagrangian when
/// `lambda` is not one.
pub fn canonical_map(tag: CaseTag, alpha: &Scalar, beta: &Scalar, gamma: &Scalar, lambda: &Scalar) -> Result<AdditiveMap, StepError> {
    let r = |s: &Scalar| RationalExpr::scalar(s.clone());
    let model = canonical_model(tag, &r(alpha), &r(beta), &r(gamma)).map_err(|e| StepError::Model(e.to_string()))?;
    let l = &model.lagrangian;
    let eq = if lambda.is_one() {
        model.equation
    } else {
        let v = l.v_closed.clone().ok_or_else(|| StepError::Model("no closed potential".into()))?;
        let dl = DiscreteLagrangian::from_potential(l.g.clone(), Multiplier::numeric(lambda.clone()), v);
        euler_lagrange(&dl).map_err(|e| StepError::Model(e.to_string()))?
    };
    AdditiveMap::new(&eq)
}

/// [`canonical_map`] for the first canonical form.
pub fn first_case_map(alpha: &Scalar, beta: &Scalar, gamma: &Scalar, lambda: &Scalar) -> AdditiveMap {
    canonical_map(CaseTag::TwoRealRoots, alpha, beta, gamma, lambda).expect("first case map")
}

/// Summary of one trajectory of the dissipation figure.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySummary {
    pub lambda: f64,
    pub steps: usize,
    pub complete: bool,
    /// `max |x_n|` over the last thousand steps.
    pub tail_max_abs: f64,
    /// `max |x_n|` over the whole orbit.
    pub max_abs: f64,
    /// Smallest distance of any `x_n` to a root of `g`.
    pub min_pole_distance: f64,
}

fn summarize(orbit: &Orbit<State4>, lambda: f64) -> TrajectorySummary {
    let xs: Vec<f64> = orbit.states.iter().map(|s| s[1]).collect();
    let tail = &xs[xs.len().saturating_sub(1000)..];
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    TrajectorySummary {
        lambda,
        steps: orbit.steps(),
        complete: orbit.complete(),
        tail_max_abs: max(tail),
        max_abs: max(&xs),
        min_pole_distance: xs.iter().map(|x| (x.abs() - 1.0).abs()).fold(f64::INFINITY, f64::min),
    }
}

/// The conservative and dissipative trajectories of the dissipation figure.
pub fn figure1(steps: usize) -> ((Orbit<State4>, TrajectorySummary), (Orbit<State4>, TrajectorySummary)) {
    let (a, b, g) = FIGURE1_PARAMS;
    let (a, b, g) = (Scalar::from_int(a), Scalar::from_int(b), Scalar::from_int(g));
    let lam = Scalar::ratio(FIGURE1_LAMBDA.0, FIGURE1_LAMBDA.1);
    let run = |l: &Scalar, label: &str| {
        let map = first_case_map(&a, &b, &g, l);
        let mut o = iterate(&map, FIGURE1_INITIAL, steps, true);
        o.label = label.to_string();
        let s = summarize(&o, l.to_f64());
        (o, s)
    };
    (run(&Scalar::one(), "conservative"), run(&lam, "dissipative"))
}

/// One CSV row of an orbit: `n, x1, x0, xm1, xm2, I, J, V_n`.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitRow {
    pub n: usize,
    pub x1: f64,
    pub x0: f64,
    pub xm1: f64,
    pub xm2: f64,
    #[serde(rename = "I")]
    pub i: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    #[serde(rename = "V_n")]
    pub v_n: Option<f64>,
}

pub fn orbit_rows(orbit: &Orbit<State4>, map: &AdditiveMap, inv: Option<&InvariantPair>) -> Result<Vec<OrbitRow>, StepError> {
    let comp = match inv {
        Some(p) => Some((Compiled::new(&p.i)?, Compiled::new(&p.j)?)),
        None => None,
    };
    let vol = volume_series(orbit, map).ok();
    Ok(orbit
        .states
        .iter()
        .enumerate()
        .map(|(n, s)| OrbitRow {
            n,
            x1: s[0],
            x0: s[1],
            xm1: s[2],
            xm2: s[3],
            i: comp.as_ref().map(|c| c.0.eval(s)),
            j: comp.as_ref().map(|c| c.1.eval(s)),
            v_n: vol.as_ref().map(|v| (v.log_volume[n] - v.log_volume[0]).exp()),
        })
        .collect())
}

#[cfg(test)]
mod tests;
