//! Log-barrier Newton solver for the qubit diamond-norm dual
//! `min t  s.t.  Z ⪰ J(w), Z ⪰ 0, t·I ⪰ Tr_out Z`
//! with `J(w) = u·u† − Σ w_x v_x·v_x†`, optionally minimizing jointly over `w` in the simplex.
//!
//! Indices of 4-vectors and 4×4 matrices are `in·2 + out`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C;

pub type M4 = Matrix4<C>;
pub type V4 = Vector4<C>;

const C0: C = C { re: 0.0, im: 0.0 };
const C1: C = C { re: 1.0, im: 0.0 };

/// Hermitian basis: 4 diagonal units, 6 real symmetric pairs, 6 imaginary antisymmetric pairs.
fn herm_basis() -> Vec<M4> {
    let mut out = Vec::with_capacity(16);
    for a in 0..4 {
        let mut m = M4::zeros();
        m[(a, a)] = C1;
        out.push(m);
    }
    for a in 0..4 {
        for b in a + 1..4 {
            let mut m = M4::zeros();
            m[(a, b)] = C1;
            m[(b, a)] = C1;
            out.push(m);
        }
    }
    for a in 0..4 {
        for b in a + 1..4 {
            let mut m = M4::zeros();
            m[(a, b)] = C::new(0.0, 1.0);
            m[(b, a)] = C::new(0.0, -1.0);
            out.push(m);
        }
    }
    out
}

fn herm_coords(m: &M4) -> [f64; 16] {
    let mut z = [0.0; 16];
    let mut k = 0;
    for a in 0..4 {
        z[k] = m[(a, a)].re;
        k += 1;
    }
    for a in 0..4 {
        for b in a + 1..4 {
            z[k] = m[(a, b)].re;
            k += 1;
        }
    }
    for a in 0..4 {
        for b in a + 1..4 {
            z[k] = m[(a, b)].im;
            k += 1;
        }
    }
    z
}

pub fn partial_trace_out(z: &M4) -> Matrix2<C> {
    Matrix2::from_fn(|i, j| z[(2 * i, 2 * j)] + z[(2 * i + 1, 2 * j + 1)])
}

fn embed2(m: &Matrix2<C>) -> M4 {
    let mut out = M4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

pub fn hermitian_eigen(m: &M4) -> (Vector4<f64>, M4) {
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    let e = h.symmetric_eigen();
    (e.eigenvalues, e.eigenvectors)
}

fn min_eig(m: &M4) -> f64 {
    hermitian_eigen(m).0.min()
}

fn max_eig2(m: &Matrix2<C>) -> f64 {
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    h.symmetric_eigen().eigenvalues.max()
}

/// Lower Cholesky factor of the leading `n×n` block; `None` unless positive definite.
/// (nalgebra's complex Cholesky takes complex square roots of negative pivots.)
fn cholesky_n(m: &M4, n: usize) -> Option<M4> {
    let mut l = M4::zeros();
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let dj = d.sqrt();
        l[(j, j)] = C::new(dj, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / dj;
        }
    }
    Some(l)
}

fn logdet_pd(m: &M4, n: usize) -> Option<f64> {
    let l = cholesky_n(m, n)?;
    Some((0..n).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

fn inverse_n(m: &M4, n: usize) -> M4 {
    let l = cholesky_n(m, n).expect("positive definite");
    // L⁻¹ by forward substitution, then (L L†)⁻¹ = L⁻† L⁻¹
    let mut li = M4::zeros();
    for c in 0..n {
        for i in c..n {
            let mut s = if i == c { C1 } else { C0 };
            for k in c..i {
                s -= l[(i, k)] * li[(k, c)];
            }
            li[(i, c)] = s / l[(i, i)];
        }
    }
    let mut out = M4::zeros();
    for i in 0..n {
        for j in 0..n {
            let mut s = C0;
            for k in i.max(j)..n {
                s += li[(k, i)].conj() * li[(k, j)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

fn tr_prod_re(a: &M4, b: &M4, n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    s
}

pub fn outer(v: &V4) -> M4 {
    v * v.adjoint()
}

/// Problem data. When `joint`, `w` is free in the simplex and `weights` is the start point.
pub struct DualProblem<'a> {
    pub u: &'a V4,
    pub vs: &'a [V4],
    pub weights: Vec<f64>,
    pub joint: bool,
}

#[derive(Debug, Clone)]
pub struct DualSolution {
    /// Certified upper bound on `½‖Φ_w‖⋄` at the returned weights.
    pub upper: f64,
    pub weights: Vec<f64>,
    /// Input-side density matrix from the `t·I ⪰ Tr_out Z` multiplier.
    pub rho: Matrix2<C>,
    /// Feasible primal `0 ⪯ W ⪯ ρ⊗I` from the `Z ⪰ J` multiplier.
    pub w_primal: M4,
}

struct State {
    t: f64,
    z: [f64; 16],
    /// Free weights `w_1..w_{n−1}`; `w_n = 1 − Σ`.
    w: Vec<f64>,
}

impl DualProblem<'_> {
    fn j_of(&self, w_full: &[f64]) -> M4 {
        let mut j = outer(self.u);
        for (v, &p) in self.vs.iter().zip(w_full) {
            j -= outer(v) * C::new(p, 0.0);
        }
        j
    }

    fn full_weights(&self, s: &State) -> Vec<f64> {
        if !self.joint {
            return self.weights.clone();
        }
        let mut w = s.w.clone();
        w.push(1.0 - s.w.iter().sum::<f64>());
        w
    }

    fn z_of(basis: &[M4], z: &[f64; 16]) -> M4 {
        let mut m = M4::zeros();
        for (b, &c) in basis.iter().zip(z) {
            m += b * C::new(c, 0.0);
        }
        m
    }

    /// Barrier objective `τ·t − Σ log det − Σ log w`, or `None` outside the domain.
    fn objective(&self, basis: &[M4], s: &State, tau: f64) -> Option<f64> {
        let w = self.full_weights(s);
        if self.joint && w.iter().any(|&x| x <= 0.0) {
            return None;
        }
        let z = Self::z_of(basis, &s.z);
        let a1 = z - self.j_of(&w);
        let a3 = embed2(&(Matrix2::identity() * C::new(s.t, 0.0) - partial_trace_out(&z)));
        let mut f = tau * s.t - logdet_pd(&a1, 4)? - logdet_pd(&z, 4)? - logdet_pd(&a3, 2)?;
        if self.joint {
            f -= w.iter().map(|x| x.ln()).sum::<f64>();
        }
        Some(f)
    }

    pub fn solve(&self, gap: f64) -> DualSolution {
        let basis = herm_basis();
        let n = self.vs.len();
        let nw = if self.joint { n - 1 } else { 0 };
        let nv = 1 + 16 + nw;
        let j0 = self.j_of(&self.weights);
        let (ev, evec) = hermitian_eigen(&j0);
        let mut zpos = M4::identity();
        for k in 0..4 {
            if ev[k] > 0.0 {
                let c = evec.column(k).into_owned();
                zpos += outer(&c) * C::new(ev[k], 0.0);
            }
        }
        let t0 = max_eig2(&partial_trace_out(&zpos)) + 1.0;
        let mut s = State { t: t0, z: herm_coords(&zpos), w: self.weights[..nw].to_vec() };

        // derivative matrices per variable for the three blocks
        let zero = M4::zeros();
        let mut d1: Vec<M4> = Vec::with_capacity(nv);
        let mut d2: Vec<M4> = Vec::with_capacity(nv);
        let mut d3: Vec<M4> = Vec::with_capacity(nv);
        d1.push(zero);
        d2.push(zero);
        d3.push(embed2(&Matrix2::identity()));
        for b in &basis {
            d1.push(*b);
            d2.push(*b);
            d3.push(-embed2(&partial_trace_out(b)));
        }
        if self.joint {
            let last = outer(&self.vs[n - 1]);
            for v in &self.vs[..nw] {
                d1.push(outer(v) - last);
                d2.push(zero);
                d3.push(zero);
            }
        }

        let m_total = 10.0 + if self.joint { n as f64 } else { 0.0 };
        let mut tau = 1.0;
        loop {
            for _ in 0..100 {
                let w = self.full_weights(&s);
                let z = Self::z_of(&basis, &s.z);
                let a1 = z - self.j_of(&w);
                let a3 = embed2(&(Matrix2::identity() * C::new(s.t, 0.0) - partial_trace_out(&z)));
                let (i1, i2, i3) = (inverse_n(&a1, 4), inverse_n(&z, 4), inverse_n(&a3, 2));
                let m1: Vec<M4> = d1.iter().map(|d| i1 * d).collect();
                let m2: Vec<M4> = d2.iter().map(|d| i2 * d).collect();
                let m3: Vec<M4> = d3.iter().map(|d| i3 * d).collect();
                let mut g = DVector::<f64>::zeros(nv);
                let mut h = DMatrix::<f64>::zeros(nv, nv);
                g[0] = tau;
                for i in 0..nv {
                    let mut gi = 0.0;
                    for k in 0..4 {
                        gi += m1[i][(k, k)].re + m2[i][(k, k)].re;
                    }
                    gi += m3[i][(0, 0)].re + m3[i][(1, 1)].re;
                    g[i] -= gi;
                }
                // variable blocks: 0 = t, 1..17 = z, 17.. = w
                let z_rng = 1..17;
                for i in 0..nv {
                    for j in i..nv {
                        let iz = z_rng.contains(&i);
                        let jz = z_rng.contains(&j);
                        let mut v = tr_prod_re(&m1[i], &m1[j], 4);
                        if iz && jz {
                            v += tr_prod_re(&m2[i], &m2[j], 4);
                        }
                        if (i == 0 || iz) && (j == 0 || jz) {
                            v += tr_prod_re(&m3[i], &m3[j], 2);
                        }
                        h[(i, j)] = v;
                        h[(j, i)] = v;
                    }
                }
                if self.joint {
                    let wn = w[n - 1];
                    for x in 0..nw {
                        let ix = 17 + x;
                        g[ix] += -1.0 / w[x] + 1.0 / wn;
                        h[(ix, ix)] += 1.0 / (w[x] * w[x]);
                        for y in 0..nw {
                            h[(ix, 17 + y)] += 1.0 / (wn * wn);
                        }
                    }
                }
                let dx = match h.clone().cholesky() {
                    Some(ch) => ch.solve(&(-&g)),
                    None => match h.lu().solve(&(-&g)) {
                        Some(d) => d,
                        None => break,
                    },
                };
                let dec = -g.dot(&dx);
                if dec / 2.0 < 1e-12 {
                    break;
                }
                let f0 = self.objective(&basis, &s, tau).expect("iterate feasible");
                let mut step = 1.0;
                let mut accepted = false;
                while step > 1e-14 {
                    let cand = State {
                        t: s.t + step * dx[0],
                        z: std::array::from_fn(|k| s.z[k] + step * dx[1 + k]),
                        w: (0..nw).map(|x| s.w[x] + step * dx[17 + x]).collect(),
                    };
                    if let Some(f) = self.objective(&basis, &cand, tau) {
                        // inside the quadratic region the full step is feasible-safe; rounding in f is not
                        if dec < 0.25 || f <= f0 - 0.25 * step * dec {
                            s = cand;
                            accepted = true;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            if m_total / tau < gap {
                break;
            }
            tau *= 8.0;
        }
        self.finish(&basis, &s, tau)
    }

    fn finish(&self, basis: &[M4], s: &State, tau: f64) -> DualSolution {
        let w = self.full_weights(s);
        let (w, jw) = if self.joint {
            let clipped: Vec<f64> = w.iter().map(|x| x.max(0.0)).collect();
            let tot: f64 = clipped.iter().sum();
            let cw: Vec<f64> = clipped.iter().map(|x| x / tot).collect();
            let j = self.j_of(&cw);
            (cw, j)
        } else {
            let j = self.j_of(&w);
            (w, j)
        };
        let mut z = Self::z_of(basis, &s.z);
        // restore exact feasibility against rounding with an identity shift
        let mut delta = (-min_eig(&(z - jw))).max(-min_eig(&z)).max(0.0);
        if delta > 0.0 {
            z += M4::identity() * C::new(delta, 0.0);
        }
        while cholesky_n(&(z - jw), 4).is_none() || cholesky_n(&z, 4).is_none() {
            delta = (2.0 * delta).max(1e-15);
            z += M4::identity() * C::new(delta, 0.0);
        }
        let upper = max_eig2(&partial_trace_out(&z));

        let a1 = Self::z_of(basis, &s.z) - self.j_of(&self.full_weights(s));
        let a3 = embed2(&(Matrix2::identity() * C::new(s.t, 0.0) - partial_trace_out(&Self::z_of(basis, &s.z))));
        let s1 = inverse_n(&a1, 4) / C::new(tau, 0.0);
        let s3 = inverse_n(&a3, 2) / C::new(tau, 0.0);
        let r3 = Matrix2::from_fn(|i, j| s3[(i, j)]);
        let rho = r3 / C::new((r3[(0, 0)] + r3[(1, 1)]).re, 0.0);
        DualSolution { upper, weights: w, rho, w_primal: feasible_primal(&s1, &rho) }
    }
}

/// Scales `W ⪰ 0` so that `W ⪯ ρ⊗I_out` holds.
fn feasible_primal(w: &M4, rho: &Matrix2<C>) -> M4 {
    let rho_i = M4::from_fn(|a, b| if a % 2 == b % 2 { rho[(a / 2, b / 2)] } else { C0 });
    let (ev, evec) = hermitian_eigen(&rho_i);
    let mut inv_sqrt = M4::zeros();
    for k in 0..4 {
        let c = evec.column(k).into_owned();
        inv_sqrt += outer(&c) * C::new(1.0 / ev[k].max(1e-300).sqrt(), 0.0);
    }
    let c = hermitian_eigen(&(inv_sqrt * w * inv_sqrt)).0.max();
    let wp = w / C::new(c * (1.0 + 1e-12), 0.0);
    (wp + wp.adjoint()) * C::new(0.5, 0.0)
}

/// `Re⟨A, W⟩ = Re tr(A W)` for Hermitian arguments.
pub fn pairing(a: &M4, w: &M4) -> f64 {
    tr_prod_re(a, w, 4)
}
