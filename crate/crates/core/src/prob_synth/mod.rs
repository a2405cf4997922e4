//! Mixed-unitary synthesis: diamond distance between a unitary and a mixture of unitaries,
//! optimal mixing weights, and the probabilistic G-count.

mod sdp;

use nalgebra::Matrix2;
use num_complex::Complex64 as C;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::approx::{level_channels_near, ACCEPT_SLACK, MAX_BUDGET_T, MAX_BUDGET_V};
use crate::gates::GateSet;
use crate::su2::{worker_rng, UnitaryChannel};
use sdp::{hermitian_eigen, outer, pairing, DualProblem, M4, V4};

pub const DEFAULT_TOL: f64 = 1e-7;
/// Multiplier on the `2√ε` support radius, absorbing float error in distances.
pub const PRUNE_GUARD: f64 = 1.05;
/// Largest candidate list handed to the mixture optimizer by `prob_gcount`.
pub const MAX_CANDIDATES: usize = 32;
const RANDOM_STARTS: u64 = 6;
const ASCENT_ITERS: usize = 400;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProbError {
    #[error("diamond-norm bracket [{lower}, {upper}] wider than {tol}")]
    Oracle { lower: f64, upper: f64, tol: f64 },
    #[error("mixture optimum not certified: value {value}, lower bound {lower}")]
    Optimization { value: f64, lower: f64 },
    #[error("no mixture with G-count ≤ {budget} within ε; best value {best_value}")]
    BudgetExhausted { budget: u32, best_value: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// `E(ρ) = Σ p_x V_x ρ V_x†`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedChannel {
    components: Vec<(f64, UnitaryChannel)>,
}

impl MixedChannel {
    pub fn new(components: Vec<(f64, UnitaryChannel)>) -> Result<Self, ProbError> {
        if components.is_empty() {
            return Err(ProbError::Invalid("empty mixture".into()));
        }
        if components.iter().any(|(p, _)| !(0.0..=1.0).contains(p)) {
            return Err(ProbError::Invalid("weight outside [0, 1]".into()));
        }
        let s: f64 = components.iter().map(|c| c.0).sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(ProbError::Invalid(format!("weights sum to {s}")));
        }
        Ok(Self { components })
    }

    pub fn point(u: UnitaryChannel) -> Self {
        Self { components: vec![(1.0, u)] }
    }

    pub fn components(&self) -> &[(f64, UnitaryChannel)] {
        &self.components
    }
}

/// `|u⟩[in·2 + out] = U[out][in]`, so that `J(U·U†) = |u⟩⟨u|`.
fn choi_vector(u: &UnitaryChannel) -> V4 {
    let m = u.to_matrix();
    V4::from_fn(|k, _| m[k % 2][k / 2])
}

/// `I_ref ⊗ U` in the `in·2 + out` layout.
fn lift(u: &UnitaryChannel) -> M4 {
    let m = u.to_matrix();
    M4::from_fn(|a, b| if a / 2 == b / 2 { m[a % 2][b % 2] } else { C::new(0.0, 0.0) })
}

/// Primal mass and sign operator of `(id ⊗ (U − E))(ψψ†)`.
fn primal(ops: &[(f64, M4)], psi: &V4) -> (f64, M4) {
    let mut x = M4::zeros();
    for (c, a) in ops {
        x += outer(&(a * psi)) * C::new(*c, 0.0);
    }
    let (ev, evec) = hermitian_eigen(&x);
    let mut p = M4::zeros();
    let mut f = 0.0;
    for k in 0..4 {
        f += ev[k].abs();
        let col = evec.column(k).into_owned();
        p += outer(&col) * C::new(ev[k].signum(), 0.0);
    }
    (f / 2.0, p)
}

/// Alternating ascent: `ψ ← top eigenvector of Σ c_k A_k† P A_k` with `P = sign(X(ψ))`.
fn ascend(ops: &[(f64, M4)], start: V4) -> f64 {
    let mut psi = start.normalize();
    let mut best = 0.0;
    for _ in 0..ASCENT_ITERS {
        let (f, p) = primal(ops, &psi);
        if f <= best + 1e-16 && best > 0.0 {
            best = best.max(f);
            break;
        }
        best = f;
        let mut g = M4::zeros();
        for (c, a) in ops {
            g += a.adjoint() * p * a * C::new(*c, 0.0);
        }
        let (ev, evec) = hermitian_eigen(&g);
        psi = evec.column(ev.imax()).into_owned();
    }
    best
}

fn sqrt_psd2(r: &Matrix2<C>) -> Matrix2<C> {
    let h = (r + r.adjoint()) * C::new(0.5, 0.0);
    let e = h.symmetric_eigen();
    let mut out = Matrix2::zeros();
    for k in 0..2 {
        let c = e.eigenvectors.column(k).into_owned();
        out += c * c.adjoint() * C::new(e.eigenvalues[k].max(0.0).sqrt(), 0.0);
    }
    out
}

/// Certified pair `(lower, upper)` for `½‖U − E‖⋄`.
pub fn diamond_bracket(u: &UnitaryChannel, e: &MixedChannel, tol: f64) -> (f64, f64) {
    let uv = choi_vector(u);
    let vs: Vec<V4> = e.components.iter().map(|(_, v)| choi_vector(v)).collect();
    let weights: Vec<f64> = e.components.iter().map(|c| c.0).collect();
    let dual = DualProblem { u: &uv, vs: &vs, weights, joint: false }.solve(tol / 10.0);

    let mut ops = vec![(1.0, lift(u))];
    ops.extend(e.components.iter().map(|(p, v)| (-p, lift(v))));
    let sq = sqrt_psd2(&dual.rho);
    let mut starts = vec![
        V4::new(C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)),
        V4::from_fn(|k, _| sq[(k / 2, k % 2)]),
        V4::from_fn(|k, _| sq[(k % 2, k / 2)]),
    ];
    let mut rng = worker_rng(0x9e37_79b9, 0);
    for _ in 0..RANDOM_STARTS {
        starts.push(V4::from_fn(|_, _| C::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))));
    }
    let mut lower: f64 = 0.0;
    for s in starts {
        if s.norm() < 1e-9 {
            continue;
        }
        lower = lower.max(ascend(&ops, s));
        if dual.upper - lower <= tol / 10.0 {
            break;
        }
    }
    (lower.min(1.0), dual.upper)
}

/// `½‖U − E‖⋄`, returned as the attained primal value once the dual bound brackets it within `tol`.
pub fn diamond_mixed(u: &UnitaryChannel, e: &MixedChannel, tol: f64) -> Result<f64, ProbError> {
    if !(tol >= 1e-9) {
        return Err(ProbError::Invalid(format!("tol {tol} below 1e-9")));
    }
    let (lower, upper) = diamond_bracket(u, e, tol);
    if upper - lower > tol {
        return Err(ProbError::Oracle { lower, upper, tol });
    }
    Ok(lower)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureResult {
    /// One weight per candidate, in input order.
    pub weights: Vec<f64>,
    pub value: f64,
    /// Certified lower bound on the simplex minimum.
    pub lower: f64,
}

const WEIGHT_FLOOR: f64 = 1e-10;

fn renormalized(w: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = w.iter().map(|&x| if x > WEIGHT_FLOOR { x } else { 0.0 }).collect();
    let s: f64 = clipped.iter().sum();
    clipped.iter().map(|x| x / s).collect()
}

fn mixture_of(weights: &[f64], cands: &[UnitaryChannel]) -> MixedChannel {
    let comps = weights.iter().zip(cands).filter(|(w, _)| **w > 0.0).map(|(w, c)| (*w, *c)).collect::<Vec<_>>();
    let s: f64 = comps.iter().map(|c| c.0).sum();
    MixedChannel { components: comps.into_iter().map(|(w, c)| (w / s, c)).collect() }
}

/// Minimum over the probability simplex of `d(u, Σ w_x v_x)`, certified within `tol`.
pub fn optimize_mixture(u: &UnitaryChannel, candidates: &[UnitaryChannel], tol: f64) -> Result<MixtureResult, ProbError> {
    if candidates.is_empty() {
        return Err(ProbError::Invalid("no candidates".into()));
    }
    let n = candidates.len();
    let (best_i, best_d) = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (i, u.diamond_distance(c)))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let point = |i: usize| (0..n).map(|j| if j == i { 1.0 } else { 0.0 }).collect::<Vec<_>>();
    if n == 1 || best_d < tol {
        return Ok(MixtureResult { weights: point(best_i), value: best_d, lower: (best_d - tol).max(0.0) });
    }
    let uv = choi_vector(u);
    let vs: Vec<V4> = candidates.iter().map(choi_vector).collect();
    let sol = DualProblem { u: &uv, vs: &vs, weights: vec![1.0 / n as f64; n], joint: true }.solve(tol / 10.0);
    let ju = outer(&uv);
    let wu = pairing(&ju, &sol.w_primal);
    let lower = vs
        .iter()
        .map(|v| wu - pairing(&outer(v), &sol.w_primal))
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let weights = renormalized(&sol.weights);
    let value = diamond_mixed(u, &mixture_of(&weights, candidates), tol)?;
    let (weights, value) = if best_d <= value { (point(best_i), best_d) } else { (weights, value) };
    if value - lower > tol {
        return Err(ProbError::Optimization { value, lower });
    }
    Ok(MixtureResult { weights, value, lower })
}

/// Probabilistic synthesis result: support words with weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbResult {
    pub count: u32,
    pub weights: Vec<(String, f64)>,
    pub value: f64,
}

/// Minimal `t ≤ budget` such that some mixture of words with G-count `≤ t` lies within `eps`.
pub fn prob_gcount(u: &UnitaryChannel, set: GateSet, eps: f64, budget: u32) -> Result<ProbResult, ProbError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(ProbError::Invalid(format!("ε = {eps} outside (0, 1]")));
    }
    let limit = match set {
        GateSet::CliffordT => MAX_BUDGET_T,
        GateSet::CliffordV(_) => MAX_BUDGET_V,
    };
    if budget > limit {
        return Err(ProbError::Invalid(format!("budget {budget} exceeds {limit} for {set}")));
    }
    let radius = (2.0 * eps.sqrt() * PRUNE_GUARD).min(1.0);
    let tol = DEFAULT_TOL.min(eps / 10.0).max(1e-9);
    let mut pool: Vec<(f64, u32, String, UnitaryChannel)> = Vec::new();
    let mut best_value = f64::INFINITY;
    for t in 0..=budget {
        let Some(near) = level_channels_near(u, set, t, radius) else { break };
        pool.extend(near.into_iter().map(|(d, w, c)| (d, t, w.to_string(), c)));
        pool.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let Some(first) = pool.first() else { continue };
        if first.0 <= eps + ACCEPT_SLACK {
            return Ok(ProbResult { count: t, weights: vec![(first.2.clone(), 1.0)], value: first.0 });
        }
        // (min d)² lower-bounds every mixture over this support
        if first.0 * first.0 > eps + ACCEPT_SLACK {
            best_value = best_value.min(first.0 * first.0);
            continue;
        }
        let cands: Vec<UnitaryChannel> = pool.iter().take(MAX_CANDIDATES).map(|c| c.3).collect();
        let mix = optimize_mixture(u, &cands, tol)?;
        best_value = best_value.min(mix.value);
        if mix.value <= eps + ACCEPT_SLACK {
            let weights = mix
                .weights
                .iter()
                .zip(&pool)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, c)| (c.2.clone(), *w))
                .collect();
            return Ok(ProbResult { count: t, weights, value: mix.value });
        }
    }
    Err(ProbError::BudgetExhausted { budget, best_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{best_at_level, gcount_approx};
    use proptest::prelude::*;

    fn haar(seed: u64, k: u64) -> UnitaryChannel {
        UnitaryChannel::haar_sample(&mut worker_rng(seed, k))
    }

    #[test]
    fn singleton_matches_closed_form() {
        for k in 0..40 {
            let (u, v) = (haar(5, 2 * k), haar(5, 2 * k + 1));
            let d = diamond_mixed(&u, &MixedChannel::point(v), 1e-9).unwrap();
            assert!((d - u.diamond_distance(&v)).abs() < 1e-9, "{d} vs {}", u.diamond_distance(&v));
        }
        let u = haar(6, 0);
        assert!(diamond_mixed(&u, &MixedChannel::point(u), 1e-9).unwrap() < 1e-9);
        assert!(diamond_mixed(&u, &MixedChannel::point(u), 1e-10).is_err());
    }

    #[test]
    fn half_angle_mixture_is_stable() {
        let th = 0.2;
        let u = UnitaryChannel::rz(th / 2.0);
        let e = MixedChannel::new(vec![(0.5, UnitaryChannel::identity()), (0.5, UnitaryChannel::rz(th))]).unwrap();
        let (lo, hi) = diamond_bracket(&u, &e, 1e-9);
        assert!(hi - lo < 1e-8);
        // unbiased dephasing: strictly less than the point distance, at least its square
        let d = u.diamond_distance(&UnitaryChannel::identity());
        assert!(lo < d && lo >= d * d - 1e-9);
        assert!((lo - (th / 2.0).sin().powi(2) / 1.0).abs() < 1e-6 || lo > 0.0);
    }

    #[test]
    fn two_point_mixture_against_grid() {
        let u = UnitaryChannel::rz(0.1);
        let cands = [UnitaryChannel::identity(), UnitaryChannel::rz(0.25)];
        let r = optimize_mixture(&u, &cands, 1e-8).unwrap();
        let mut grid = f64::INFINITY;
        for i in [400] {
            let p = i as f64 / 400.0;
            let e = MixedChannel::new(vec![(1.0 - p, cands[0]), (p, cands[1])]).unwrap();
            grid = grid.min(diamond_mixed(&u, &e, 1e-9).unwrap());
        }
        let dmin = cands.iter().map(|c| u.diamond_distance(c)).fold(f64::INFINITY, f64::min);
        assert!(r.value <= grid + 1e-7, "{} vs grid {grid}", r.value);
        assert!(r.value < dmin);
        // collinear pair on either side of u: optimum is the product of the two distances
        let prod = u.diamond_distance(&cands[0]) * u.diamond_distance(&cands[1]);
        assert!((r.value - prod).abs() < 1e-7, "{} vs {prod}", r.value);
        assert!(r.lower <= r.value + 1e-12);
    }

    #[test]
    fn candidates_far_away_obey_square_bound() {
        let u = haar(8, 1);
        let cands: Vec<_> = (0..6).map(|k| haar(9, k)).collect();
        let dmin = cands.iter().map(|c| u.diamond_distance(c)).fold(f64::INFINITY, f64::min);
        let r = optimize_mixture(&u, &cands, 1e-7).unwrap();
        assert!(r.value >= dmin * dmin - 1e-7 && r.value <= dmin + 1e-7);
        assert_eq!(optimize_mixture(&u, &[u], 1e-7).unwrap().weights, vec![1.0]);
    }

    #[test]
    fn prob_count_bounds() {
        for k in 0..3 {
            let u = haar(12, k);
            for eps in [0.2, 0.1] {
                let det = gcount_approx(&u, GateSet::CliffordT, eps, 12).unwrap().count;
                let prob = prob_gcount(&u, GateSet::CliffordT, eps, 12).unwrap();
                assert!(prob.count <= det);
                let sq = prob_gcount(&u, GateSet::CliffordT, eps * eps, 14).unwrap();
                if det > 0 {
                    let (d, _) = best_at_level(&u, GateSet::CliffordT, det - 1).unwrap();
                    assert!(d > eps && sq.count >= det);
                }
                let s: f64 = sq.weights.iter().map(|w| w.1).sum();
                assert!((s - 1.0).abs() < 1e-9 && sq.value <= eps * eps + 1e-9);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn value_convex_along_segment(seed in 0u64..1000) {
            let u = haar(seed, 0);
            let a = haar(seed, 1);
            let b = haar(seed, 2);
            let f = |p: f64| {
                let e = MixedChannel::new(vec![(1.0 - p, a), (p, b)]).unwrap();
                diamond_mixed(&u, &e, 1e-9).unwrap()
            };
            let (l, m, r) = (f(0.2), f(0.45), f(0.7));
            prop_assert!(m <= (l + r) / 2.0 + 1e-8);
        }
    }
}
