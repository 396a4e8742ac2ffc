//! Dense superoperator algebra on vectorized operators.
//!
//! Operators live on an [`OpSpace`]: either the full `d×d` matrix space or a
//! list of rectangular blocks of it (energy-sector subspaces). Vectorization
//! is block-major and column-major within each block. Adjoints are taken under
//! the trace, `σ`-weighted, or `σ⁻¹`-weighted inner products; all three have
//! diagonal Gram matrices over matrix units, so weighted adjoints and
//! similarity transforms are cheap diagonal conjugations.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as c64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    self, dagger, eig_sorted_desc, eigh_ascending, expm, hermiticity_defect, max_abs, trace,
};
use crate::{Error, Result};

/// One rectangular block `rows × cols` anchored at `(row0, col0)` of the
/// underlying `d×d` operator space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub row0: usize,
    pub col0: usize,
    pub nrows: usize,
    pub ncols: usize,
}

impl Block {
    pub fn size(&self) -> usize {
        self.nrows * self.ncols
    }
}

/// The operator subspace a superoperator acts on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpSpace {
    /// Underlying Hilbert-space dimension.
    pub dim: usize,
    pub blocks: Vec<Block>,
}

impl OpSpace {
    pub fn full(dim: usize) -> Self {
        Self {
            dim,
            blocks: vec![Block {
                row0: 0,
                col0: 0,
                nrows: dim,
                ncols: dim,
            }],
        }
    }

    pub fn from_blocks(dim: usize, blocks: Vec<Block>) -> Self {
        Self { dim, blocks }
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().map(Block::size).sum()
    }

    /// Global `(row, col)` of each vector component, in vectorization order.
    pub fn components(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.size());
        for b in &self.blocks {
            for c in 0..b.ncols {
                for r in 0..b.nrows {
                    out.push((b.row0 + r, b.col0 + c));
                }
            }
        }
        out
    }

    /// Extract the space components of a full `d×d` operator.
    pub fn op_to_vec(&self, op: &Array2<c64>) -> Array1<c64> {
        let comps = self.components();
        Array1::from_iter(comps.iter().map(|&(r, c)| op[[r, c]]))
    }

    /// Embed a component vector back into a full `d×d` operator (zeros
    /// elsewhere).
    pub fn vec_to_op(&self, v: &Array1<c64>) -> Array2<c64> {
        let mut op = Array2::<c64>::zeros((self.dim, self.dim));
        for (&(r, c), &z) in self.components().iter().zip(v.iter()) {
            op[[r, c]] = z;
        }
        op
    }
}

/// Inner product on operators; weights are the diagonal of a positive state in
/// the working basis.
#[derive(Debug, Clone)]
pub enum Metric {
    /// Hilbert–Schmidt: `⟨O₁,O₂⟩ = Tr[O₁†O₂]`.
    Trace,
    /// `⟨O₁,O₂⟩_σ = Tr[O₁†√σ O₂ √σ]` (Heisenberg-side detailed balance).
    Sigma(Array1<f64>),
    /// `⟨ρ₁,ρ₂⟩_{σ⁻¹} = Tr[ρ₁† σ^{-1/2} ρ₂ σ^{-1/2}]` (Schrödinger side).
    SigmaInverse(Array1<f64>),
}

impl Metric {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Metric::Trace => Ok(()),
            Metric::Sigma(w) | Metric::SigmaInverse(w) => {
                if w.len() != dim {
                    return Err(Error::validation(format!(
                        "metric weight length {} does not match dim {}",
                        w.len(),
                        dim
                    )));
                }
                if w.iter().any(|&x| !(x > 0.0)) {
                    return Err(Error::validation("metric weights must be strictly positive"));
                }
                Ok(())
            }
        }
    }

    /// Diagonal Gram entry for the matrix-unit component at `(r, c)`.
    fn gram(&self, r: usize, c: usize) -> f64 {
        match self {
            Metric::Trace => 1.0,
            Metric::Sigma(w) => (w[r] * w[c]).sqrt(),
            Metric::SigmaInverse(w) => 1.0 / (w[r] * w[c]).sqrt(),
        }
    }
}

/// Dense superoperator over an [`OpSpace`].
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub space: OpSpace,
    pub matrix: Array2<c64>,
    pub basis_tag: String,
}

impl Superoperator {
    pub fn zeros(space: OpSpace, basis_tag: impl Into<String>) -> Self {
        let n = space.size();
        Self {
            space,
            matrix: Array2::zeros((n, n)),
            basis_tag: basis_tag.into(),
        }
    }

    pub fn identity(space: OpSpace, basis_tag: impl Into<String>) -> Self {
        let n = space.size();
        Self {
            space,
            matrix: Array2::eye(n),
            basis_tag: basis_tag.into(),
        }
    }

    pub fn size(&self) -> usize {
        self.space.size()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.basis_tag != other.basis_tag {
            return Err(Error::BasisMismatch {
                left: self.basis_tag.clone(),
                right: other.basis_tag.clone(),
            });
        }
        if self.space != other.space {
            return Err(Error::validation("operator spaces differ"));
        }
        Ok(())
    }

    /// Map `X ↦ A X B` restricted to the space (input and output projected).
    pub fn sandwich(
        space: &OpSpace,
        basis_tag: impl Into<String>,
        a: &Array2<c64>,
        b: &Array2<c64>,
    ) -> Self {
        let comps = space.components();
        let n = comps.len();
        let mut m = Array2::<c64>::zeros((n, n));
        for (oi, &(r, c)) in comps.iter().enumerate() {
            for (ii, &(rp, cp)) in comps.iter().enumerate() {
                let v = a[[r, rp]] * b[[cp, c]];
                if v != c64::new(0.0, 0.0) {
                    m[[oi, ii]] = v;
                }
            }
        }
        Self {
            space: space.clone(),
            matrix: m,
            basis_tag: basis_tag.into(),
        }
    }

    /// Lindblad dissipator term `X ↦ K X K† − ½{K†K, X}` (Schrödinger form
    /// when `K` is the jump operator).
    pub fn dissipator_term(space: &OpSpace, basis_tag: &str, k: &Array2<c64>) -> Self {
        let kd = dagger(k);
        let kdk = kd.dot(k);
        let id = Array2::<c64>::eye(space.dim);
        let mut out = Self::sandwich(space, basis_tag, k, &kd);
        let left = Self::sandwich(space, basis_tag, &kdk, &id);
        let right = Self::sandwich(space, basis_tag, &id, &kdk);
        out.matrix = out.matrix - (left.matrix + right.matrix) * c64::new(0.5, 0.0);
        out
    }

    /// Commutator generator `ρ ↦ −i[H, ρ]`.
    pub fn commutator_generator(space: &OpSpace, basis_tag: &str, h: &Array2<c64>) -> Self {
        let id = Array2::<c64>::eye(space.dim);
        let left = Self::sandwich(space, basis_tag, h, &id);
        let right = Self::sandwich(space, basis_tag, &id, h);
        let mut out = Self::zeros(space.clone(), basis_tag);
        out.matrix = (left.matrix - right.matrix) * c64::new(0.0, -1.0);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
            basis_tag: self.basis_tag.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
            basis_tag: self.basis_tag.clone(),
        })
    }

    pub fn scale(&self, factor: c64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.mapv(|z| z * factor),
            basis_tag: self.basis_tag.clone(),
        }
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.dot(&other.matrix),
            basis_tag: self.basis_tag.clone(),
        })
    }

    pub fn apply_vec(&self, v: &Array1<c64>) -> Array1<c64> {
        self.matrix.dot(v)
    }

    pub fn apply(&self, op: &Array2<c64>) -> Array2<c64> {
        let v = self.space.op_to_vec(op);
        self.space.vec_to_op(&self.apply_vec(&v))
    }

    /// Adjoint under the chosen inner product: `M‡ = G⁻¹ M† G`.
    pub fn adjoint(&self, metric: &Metric) -> Result<Self> {
        metric.validate(self.space.dim)?;
        let comps = self.space.components();
        let g: Vec<f64> = comps.iter().map(|&(r, c)| metric.gram(r, c)).collect();
        let mut m = dagger(&self.matrix);
        for (i, row) in m.rows_mut().into_iter().enumerate() {
            let gi = g[i];
            for (j, z) in row.into_iter().enumerate() {
                *z = *z * c64::new(g[j] / gi, 0.0);
            }
        }
        Ok(Self {
            space: self.space.clone(),
            matrix: m,
            basis_tag: self.basis_tag.clone(),
        })
    }

    /// Split into the self-adjoint and anti-self-adjoint parts under `metric`.
    pub fn hermitian_split(&self, metric: &Metric) -> Result<(Self, Self)> {
        let adj = self.adjoint(metric)?;
        let h = Self {
            space: self.space.clone(),
            matrix: (&self.matrix + &adj.matrix) * c64::new(0.5, 0.0),
            basis_tag: self.basis_tag.clone(),
        };
        let a = Self {
            space: self.space.clone(),
            matrix: (&self.matrix - &adj.matrix) * c64::new(0.5, 0.0),
            basis_tag: self.basis_tag.clone(),
        };
        Ok((h, a))
    }

    /// Relative detailed-balance residual `‖M − M‡‖_F / ‖M‖_F`.
    pub fn db_residual(&self, metric: &Metric) -> Result<f64> {
        let adj = self.adjoint(metric)?;
        Ok(linalg::rel_fro_diff(&self.matrix, &adj.matrix))
    }

    /// The similarity transform `G^{1/2} M G^{−1/2}`, Hermitian when the map
    /// is self-adjoint under `metric`.
    pub fn similarity(&self, metric: &Metric) -> Result<Array2<c64>> {
        metric.validate(self.space.dim)?;
        let comps = self.space.components();
        let g: Vec<f64> = comps
            .iter()
            .map(|&(r, c)| metric.gram(r, c).sqrt())
            .collect();
        let n = comps.len();
        let mut m = self.matrix.clone();
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = m[[i, j]] * c64::new(g[i] / g[j], 0.0);
            }
        }
        Ok(m)
    }

    /// Eigenvalues sorted by real part, descending. Under a metric that makes
    /// the map self-adjoint this reduces to a Hermitian eigensolve of the
    /// similarity transform; otherwise a general eigensolve is used.
    pub fn spectrum_of(&self, metric: &Metric) -> Result<Vec<c64>> {
        let m = self.similarity(metric)?;
        let scale = max_abs(&m).max(1e-300);
        if hermiticity_defect(&m) <= 1e-10 * scale {
            let (vals, _) = eigh_ascending(&m)?;
            let mut v: Vec<c64> = vals.iter().rev().map(|&x| c64::new(x, 0.0)).collect();
            v.sort_by(|x, y| y.re.partial_cmp(&x.re).unwrap());
            Ok(v)
        } else {
            eig_sorted_desc(&m)
        }
    }

    /// Spectral gap `−Re λ₂` with eigenvalues sorted descending by real part
    /// (multiplicity counted). For a generator with a unique fixed point this
    /// is the usual gap.
    pub fn gap(&self, metric: &Metric) -> Result<f64> {
        let evs = self.spectrum_of(metric)?;
        if evs.len() < 2 {
            return Err(Error::Empty("need at least a 2-dimensional space"));
        }
        Ok(-evs[1].re)
    }

    /// Operator norm with respect to the metric (largest singular value of
    /// the similarity transform).
    pub fn weighted_norm(&self, metric: &Metric) -> Result<f64> {
        let m = self.similarity(metric)?;
        linalg::spectral_norm(&m)
    }

    /// Choi matrix (full-space maps only); Hermitian iff the map preserves
    /// Hermiticity.
    pub fn choi(&self) -> Result<Array2<c64>> {
        let d = self.space.dim;
        if self.space != OpSpace::full(d) {
            return Err(Error::validation("Choi matrix requires the full space"));
        }
        let comps = self.space.components();
        let mut c = Array2::<c64>::zeros((d * d, d * d));
        for (oi, &(a, b)) in comps.iter().enumerate() {
            for (ii, &(i, j)) in comps.iter().enumerate() {
                // C[(a,i),(b,j)] = ⟨a| L[E_ij] |b⟩
                c[[a * d + i, b * d + j]] = self.matrix[[oi, ii]];
            }
        }
        Ok(c)
    }

    /// Minimum eigenvalue of the (Hermitized) Choi matrix.
    pub fn choi_min_eig(&self) -> Result<f64> {
        let c = self.choi()?;
        let h = (&c + &dagger(&c)) * c64::new(0.5, 0.0);
        let (vals, _) = eigh_ascending(&h)?;
        Ok(vals[0])
    }

    /// Minimum Choi eigenvalue off the maximally-entangled direction; the
    /// conditional-complete-positivity diagnostic for generators.
    pub fn choi_conditional_min_eig(&self) -> Result<f64> {
        let d = self.space.dim;
        let c = self.choi()?;
        let h = (&c + &dagger(&c)) * c64::new(0.5, 0.0);
        // projector off |Ω⟩ = Σ_i |ii⟩/√d; components of |ii⟩ at index i·d+i
        let mut omega = Array1::<c64>::zeros(d * d);
        for i in 0..d {
            omega[i * d + i] = c64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        let n = d * d;
        let mut p = Array2::<c64>::eye(n);
        for i in 0..n {
            for j in 0..n {
                p[[i, j]] -= omega[i] * omega[j].conj();
            }
        }
        let hp = p.dot(&h).dot(&p);
        let (vals, _) = eigh_ascending(&hp)?;
        Ok(vals[0])
    }

    /// Hermiticity preservation defect on random probes: `‖L[X†] − L[X]†‖`.
    pub fn hermiticity_preservation_defect<R: Rng>(&self, rng: &mut R, probes: usize) -> f64 {
        let d = self.space.dim;
        let mut worst = 0.0f64;
        for _ in 0..probes {
            let mut x = Array2::<c64>::zeros((d, d));
            for v in x.iter_mut() {
                *v = c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
            let lx = self.apply(&x);
            let lxd = self.apply(&dagger(&x));
            let defect = max_abs(&(&lxd - &dagger(&lx)));
            worst = worst.max(defect / max_abs(&x).max(1e-300));
        }
        worst
    }
}

/// Lower-bound estimate of `‖L‖₁→₁ = max_ψ ‖L[|ψ⟩⟨ψ|]‖₁` by alternating
/// ascent, seeded with basis states and random states.
///
/// Each sweep alternates the optimal dual sign operator with the top
/// eigenvector of `L†[S]`; the objective is monotone, so the result is a
/// certified lower bound.
pub struct OneNormEstimate {
    pub value: f64,
    pub converged: bool,
}

pub fn one_one_norm_lower<R: Rng>(
    l: &Superoperator,
    restarts: usize,
    rng: &mut R,
) -> Result<OneNormEstimate> {
    let d = l.space.dim;
    if l.space != OpSpace::full(d) {
        return Err(Error::validation("1→1 ascent requires the full space"));
    }
    let adj = l.adjoint(&Metric::Trace)?;
    let mut best = 0.0f64;
    let mut all_converged = true;

    let mut seeds: Vec<Array1<c64>> = (0..d)
        .map(|i| {
            let mut v = Array1::<c64>::zeros(d);
            v[i] = c64::new(1.0, 0.0);
            v
        })
        .collect();
    // pre-scan random states and keep the strongest as additional starts
    let mut scored: Vec<(f64, Array1<c64>)> = Vec::new();
    for _ in 0..(64 * restarts.max(1)) {
        let mut v = Array1::<c64>::zeros(d);
        for z in v.iter_mut() {
            *z = c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v = v.mapv(|z| z / norm);
        let f = linalg::trace_norm(&l.apply(&outer(&v)))?;
        scored.push((f, v));
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    seeds.extend(scored.into_iter().take(restarts.max(1)).map(|(_, v)| v));

    for seed in seeds {
        let mut psi = seed;
        let mut prev = -1.0f64;
        let mut converged = false;
        for _ in 0..200 {
            let rho = outer(&psi);
            let lrho = l.apply(&rho);
            let lrho_h = (&lrho + &dagger(&lrho)) * c64::new(0.5, 0.0);
            let (vals, vecs) = eigh_ascending(&lrho_h)?;
            let f: f64 = vals.iter().map(|x| x.abs()).sum();
            // dual sign operator
            let mut s = Array2::<c64>::zeros((d, d));
            for (k, &lambda) in vals.iter().enumerate() {
                let v = vecs.column(k);
                let sgn = if lambda >= 0.0 { 1.0 } else { -1.0 };
                for i in 0..d {
                    for j in 0..d {
                        s[[i, j]] += v[i] * v[j].conj() * sgn;
                    }
                }
            }
            let g = adj.apply(&s);
            let g = (&g + &dagger(&g)) * c64::new(0.5, 0.0);
            let (gvals, gvecs) = eigh_ascending(&g)?;
            let top = gvecs.column(gvals.len() - 1).to_owned();
            if (f - prev).abs() <= 1e-12 * (1.0 + f.abs()) {
                best = best.max(f);
                converged = true;
                break;
            }
            prev = f;
            best = best.max(f);
            psi = top;
        }
        all_converged &= converged;
    }
    Ok(OneNormEstimate {
        value: best,
        converged: all_converged,
    })
}

fn outer(psi: &Array1<c64>) -> Array2<c64> {
    let d = psi.len();
    let mut rho = Array2::<c64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            rho[[i, j]] = psi[i] * psi[j].conj();
        }
    }
    rho
}

/// Time evolution `e^{Lt}[ρ₀]` sampled at `steps+1` uniform times in `[0, t]`.
///
/// Dense matrix exponential of the stepper for `d ≤ 32`, adaptive
/// Cash–Karp 4(5) integration with local error ≤ 1e-8 beyond.
pub fn evolve(
    l: &Superoperator,
    rho0: &Array2<c64>,
    t: f64,
    steps: usize,
    trace_preserving: bool,
) -> Result<Vec<(f64, Array2<c64>)>> {
    let d = l.space.dim;
    if d > 64 {
        return Err(Error::Capacity {
            what: "hilbert dim for dense evolution",
            got: d,
            limit: 64,
        });
    }
    if steps == 0 {
        return Err(Error::validation("need at least one step"));
    }
    validate_state(rho0)?;
    let dt = t / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, rho0.clone()));
    let mut v = l.space.op_to_vec(rho0);

    if d <= 32 {
        let stepper = expm(&l.matrix.mapv(|z| z * c64::new(dt, 0.0)))?;
        for k in 1..=steps {
            v = stepper.dot(&v);
            out.push((k as f64 * dt, l.space.vec_to_op(&v)));
        }
    } else {
        for k in 1..=steps {
            v = rk45_step_to(&l.matrix, v, dt, 1e-8)?;
            out.push((k as f64 * dt, l.space.vec_to_op(&v)));
        }
    }

    if trace_preserving {
        let t0 = trace(rho0).re;
        for (time, rho) in &out {
            let drift = (trace(rho).re - t0).abs();
            if drift > 1e-6 {
                return Err(Error::numerical(format!(
                    "trace drift {drift:e} at t = {time} for a map flagged trace-preserving"
                )));
            }
        }
    }
    Ok(out)
}

fn validate_state(rho: &Array2<c64>) -> Result<()> {
    if hermiticity_defect(rho) > 1e-8 {
        return Err(Error::validation("initial state is not Hermitian"));
    }
    let (vals, _) = eigh_ascending(rho)?;
    if vals[0] < -1e-8 {
        return Err(Error::validation("initial state is not PSD"));
    }
    Ok(())
}

/// One macro step of length `dt` with embedded Cash–Karp error control.
fn rk45_step_to(m: &Array2<c64>, mut v: Array1<c64>, dt: f64, tol: f64) -> Result<Array1<c64>> {
    let mut remaining = dt;
    let mut h = dt;
    let mut guard = 0usize;
    while remaining > 1e-15 * dt.max(1.0) {
        h = h.min(remaining);
        let k1 = m.dot(&v);
        let k2 = m.dot(&(&v + &(&k1 * c64::new(h / 5.0, 0.0))));
        let k3 = m.dot(&(&v + &(&k1 * c64::new(3.0 * h / 40.0, 0.0)) + &(&k2 * c64::new(9.0 * h / 40.0, 0.0))));
        let k4 = m.dot(
            &(&v + &(&k1 * c64::new(3.0 * h / 10.0, 0.0)) - &(&k2 * c64::new(9.0 * h / 10.0, 0.0))
                + &(&k3 * c64::new(6.0 * h / 5.0, 0.0))),
        );
        let k5 = m.dot(
            &(&v - &(&k1 * c64::new(11.0 * h / 54.0, 0.0)) + &(&k2 * c64::new(5.0 * h / 2.0, 0.0))
                - &(&k3 * c64::new(70.0 * h / 27.0, 0.0))
                + &(&k4 * c64::new(35.0 * h / 27.0, 0.0))),
        );
        let k6 = m.dot(
            &(&v + &(&k1 * c64::new(1631.0 * h / 55296.0, 0.0))
                + &(&k2 * c64::new(175.0 * h / 512.0, 0.0))
                + &(&k3 * c64::new(575.0 * h / 13824.0, 0.0))
                + &(&k4 * c64::new(44275.0 * h / 110592.0, 0.0))
                + &(&k5 * c64::new(253.0 * h / 4096.0, 0.0))),
        );
        let y5 = &v
            + &(&k1 * c64::new(37.0 * h / 378.0, 0.0))
            + &(&k3 * c64::new(250.0 * h / 621.0, 0.0))
            + &(&k4 * c64::new(125.0 * h / 594.0, 0.0))
            + &(&k6 * c64::new(512.0 * h / 1771.0, 0.0));
        let y4 = &v
            + &(&k1 * c64::new(2825.0 * h / 27648.0, 0.0))
            + &(&k3 * c64::new(18575.0 * h / 48384.0, 0.0))
            + &(&k4 * c64::new(13525.0 * h / 55296.0, 0.0))
            + &(&k5 * c64::new(277.0 * h / 14336.0, 0.0))
            + &(&k6 * c64::new(h / 4.0, 0.0));
        let err = (&y5 - &y4).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if err <= tol || h < 1e-14 * dt.max(1.0) {
            remaining -= h;
            v = y5;
            if err > 0.0 {
                h *= 0.9 * (tol / err).powf(0.2).min(5.0);
            } else {
                h *= 5.0;
            }
        } else {
            h *= 0.9 * (tol / err).powf(0.25).max(0.1);
        }
        guard += 1;
        if guard > 4_000_000 {
            return Err(Error::numerical("adaptive integrator exceeded step budget"));
        }
    }
    Ok(v)
}

/// Exact evolution through the weighted-Hermitian eigendecomposition; valid
/// when the generator is self-adjoint under `metric`.
pub fn evolve_spectral(
    l: &Superoperator,
    metric: &Metric,
    rho0: &Array2<c64>,
    times: &[f64],
) -> Result<Vec<(f64, Array2<c64>)>> {
    let m = l.similarity(metric)?;
    let scale = max_abs(&m).max(1e-300);
    if hermiticity_defect(&m) > 1e-8 * scale {
        return Err(Error::validation(
            "generator is not self-adjoint under the supplied metric",
        ));
    }
    let mh = (&m + &dagger(&m)) * c64::new(0.5, 0.0);
    let (vals, vecs) = eigh_ascending(&mh)?;
    let comps = l.space.components();
    let g: Vec<f64> = comps
        .iter()
        .map(|&(r, c)| metric.gram(r, c).sqrt())
        .collect();
    let v0 = l.space.op_to_vec(rho0);
    let w0 = Array1::from_iter(v0.iter().zip(&g).map(|(&z, &gi)| z * gi));
    let coeffs = dagger(&vecs).dot(&w0);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let evolved_coeffs =
            Array1::from_iter(coeffs.iter().zip(vals.iter()).map(|(&c, &lam)| c * (lam * t).exp()));
        let wt = vecs.dot(&evolved_coeffs);
        let vt = Array1::from_iter(wt.iter().zip(&g).map(|(&z, &gi)| z / gi));
        out.push((t, l.space.vec_to_op(&vt)));
    }
    Ok(out)
}

/// Serialized container: little-endian interleaved re/im entries plus a JSON
/// sidecar with dims, basis tag, and flags.
#[derive(Debug, Serialize, Deserialize)]
pub struct SuperoperatorSidecar {
    pub dim: usize,
    pub blocks: Vec<Block>,
    pub basis_tag: String,
    pub size: usize,
}

pub fn save_superoperator(l: &Superoperator, path_bin: &std::path::Path) -> Result<()> {
    use std::io::Write;
    let n = l.size();
    let mut bytes = Vec::with_capacity(n * n * 16);
    for z in l.matrix.iter() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    std::fs::File::create(path_bin)
        .and_then(|mut f| f.write_all(&bytes))
        .map_err(|e| Error::numerical(format!("write failed: {e}")))?;
    let sidecar = SuperoperatorSidecar {
        dim: l.space.dim,
        blocks: l.space.blocks.clone(),
        basis_tag: l.basis_tag.clone(),
        size: n,
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::numerical(format!("sidecar encode failed: {e}")))?;
    std::fs::write(path_bin.with_extension("json"), json)
        .map_err(|e| Error::numerical(format!("write failed: {e}")))?;
    Ok(())
}

pub fn load_superoperator(path_bin: &std::path::Path) -> Result<Superoperator> {
    let sidecar: SuperoperatorSidecar = serde_json::from_str(
        &std::fs::read_to_string(path_bin.with_extension("json"))
            .map_err(|e| Error::numerical(format!("read failed: {e}")))?,
    )
    .map_err(|e| Error::numerical(format!("sidecar decode failed: {e}")))?;
    let bytes =
        std::fs::read(path_bin).map_err(|e| Error::numerical(format!("read failed: {e}")))?;
    let n = sidecar.size;
    if bytes.len() != n * n * 16 {
        return Err(Error::validation("binary payload size mismatch"));
    }
    let mut matrix = Array2::<c64>::zeros((n, n));
    for (k, z) in matrix.iter_mut().enumerate() {
        let re = f64::from_le_bytes(bytes[k * 16..k * 16 + 8].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[k * 16 + 8..k * 16 + 16].try_into().unwrap());
        *z = c64::new(re, im);
    }
    Ok(Superoperator {
        space: OpSpace::from_blocks(sidecar.dim, sidecar.blocks),
        matrix,
        basis_tag: sidecar.basis_tag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_superop(rng: &mut ChaCha8Rng, d: usize) -> Superoperator {
        let space = OpSpace::full(d);
        let n = space.size();
        let mut m = Array2::<c64>::zeros((n, n));
        for z in m.iter_mut() {
            *z = c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        Superoperator {
            space,
            matrix: m,
            basis_tag: "test".into(),
        }
    }

    fn random_sigma(rng: &mut ChaCha8Rng, d: usize) -> Array1<f64> {
        let mut w = Array1::<f64>::zeros(d);
        for x in w.iter_mut() {
            *x = 0.1 + rng.random::<f64>();
        }
        let s = w.sum();
        w.mapv(|x| x / s)
    }

    #[test]
    fn adjoint_is_involutive_under_all_metrics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let l = random_superop(&mut rng, 3);
        let sigma = random_sigma(&mut rng, 3);
        for metric in [
            Metric::Trace,
            Metric::Sigma(sigma.clone()),
            Metric::SigmaInverse(sigma),
        ] {
            let twice = l.adjoint(&metric).unwrap().adjoint(&metric).unwrap();
            assert!(linalg::rel_fro_diff(&l.matrix, &twice.matrix) < 1e-12);
        }
    }

    #[test]
    fn identity_map_is_self_adjoint() {
        let id = Superoperator::identity(OpSpace::full(4), "test");
        let adj = id.adjoint(&Metric::Trace).unwrap();
        assert!(linalg::rel_fro_diff(&id.matrix, &adj.matrix) < 1e-15);
    }

    #[test]
    fn kraus_adjoint_under_trace_metric() {
        // adjoint of X ↦ AXA† is X ↦ A†XA
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = 3;
        let mut a = Array2::<c64>::zeros((d, d));
        for z in a.iter_mut() {
            *z = c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let space = OpSpace::full(d);
        let fwd = Superoperator::sandwich(&space, "test", &a, &dagger(&a));
        let back = Superoperator::sandwich(&space, "test", &dagger(&a), &a);
        let adj = fwd.adjoint(&Metric::Trace).unwrap();
        assert!(linalg::rel_fro_diff(&adj.matrix, &back.matrix) < 1e-12);
    }

    #[test]
    fn hermitian_split_recombines_and_projects() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let l = random_superop(&mut rng, 3);
        let sigma = random_sigma(&mut rng, 3);
        let metric = Metric::Sigma(sigma);
        let (h, a) = l.hermitian_split(&metric).unwrap();
        let sum = h.add(&a).unwrap();
        assert!(linalg::rel_fro_diff(&l.matrix, &sum.matrix) < 1e-13);
        // components are respectively self/anti-self-adjoint
        let hadj = h.adjoint(&metric).unwrap();
        assert!(linalg::rel_fro_diff(&h.matrix, &hadj.matrix) < 1e-12);
        let aadj = a.adjoint(&metric).unwrap();
        let neg = a.scale(c64::new(-1.0, 0.0));
        assert!(linalg::rel_fro_diff(&neg.matrix, &aadj.matrix) < 1e-12);
    }

    #[test]
    fn depolarizing_to_sigma_spectrum() {
        // Heisenberg global depolarizer E[X] = Tr[σX]·I has eigenvalues {1, 0…}
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let sigma = random_sigma(&mut rng, d);
        let space = OpSpace::full(d);
        let comps = space.components();
        let n = comps.len();
        let mut m = Array2::<c64>::zeros((n, n));
        for (oi, &(r, c)) in comps.iter().enumerate() {
            for (ii, &(rp, cp)) in comps.iter().enumerate() {
                if r == c && rp == cp {
                    m[[oi, ii]] = c64::new(sigma[rp], 0.0);
                }
            }
        }
        let l = Superoperator {
            space,
            matrix: m,
            basis_tag: "test".into(),
        };
        let evs = l.spectrum_of(&Metric::Sigma(sigma)).unwrap();
        assert!((evs[0].re - 1.0).abs() < 1e-10);
        for e in &evs[1..] {
            assert!(e.re.abs() < 1e-10 && e.im.abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_matches_general_eigensolver_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let d = 3;
        let sigma = random_sigma(&mut rng, d);
        let metric = Metric::Sigma(sigma);
        let l = random_superop(&mut rng, d);
        let (h, _) = l.hermitian_split(&metric).unwrap();
        let evs = h.spectrum_of(&metric).unwrap();
        // oracle: brute-force general eigensolve of the raw matrix
        let brute = eig_sorted_desc(&h.matrix).unwrap();
        for (a, b) in evs.iter().zip(brute.iter()) {
            assert!((a.re - b.re).abs() < 1e-8, "{a} vs {b}");
        }
        for e in &evs {
            assert!(e.im.abs() < 1e-10);
        }
    }

    #[test]
    fn one_norm_of_identity_and_depolarizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let id = Superoperator::identity(OpSpace::full(2), "test");
        let est = one_one_norm_lower(&id, 4, &mut rng).unwrap();
        assert!((est.value - 1.0).abs() < 1e-10);

        // L[X] = X − Tr[X]·I/2 on d=2: max over ψ of ‖ψψ† − I/2‖₁ = 1
        let space = OpSpace::full(2);
        let comps = space.components();
        let n = comps.len();
        let mut m = Array2::<c64>::eye(n);
        for (oi, &(r, c)) in comps.iter().enumerate() {
            for (ii, &(rp, cp)) in comps.iter().enumerate() {
                if r == c && rp == cp {
                    m[[oi, ii]] -= c64::new(0.5, 0.0);
                }
            }
        }
        let l = Superoperator {
            space,
            matrix: m,
            basis_tag: "test".into(),
        };
        let est = one_one_norm_lower(&l, 6, &mut rng).unwrap();
        assert!((est.value - 1.0).abs() < 1e-9, "got {}", est.value);
    }

    #[test]
    fn one_norm_dominates_random_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let d = 4;
        let l = {
            let raw = random_superop(&mut rng, d);
            // make it hermiticity-preserving: L[X] = M X M† + N X N†
            let space = OpSpace::full(d);
            let mut mats = Vec::new();
            for _ in 0..2 {
                let mut a = Array2::<c64>::zeros((d, d));
                for z in a.iter_mut() {
                    *z = c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                }
                mats.push(a);
            }
            let mut acc = Superoperator::zeros(space.clone(), "test");
            for a in &mats {
                acc = acc
                    .add(&Superoperator::sandwich(&space, "test", a, &dagger(a)))
                    .unwrap();
            }
            drop(raw);
            acc
        };
        let est = one_one_norm_lower(&l, 8, &mut rng).unwrap();
        for _ in 0..2000 {
            let mut psi = Array1::<c64>::zeros(d);
            for z in psi.iter_mut() {
                *z = c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let psi = psi.mapv(|z| z / norm);
            let rho = outer(&psi);
            let val = linalg::trace_norm(&l.apply(&rho)).unwrap();
            assert!(
                val <= est.value + 1e-9,
                "probe {val} beats ascent {}",
                est.value
            );
        }
    }

    #[test]
    fn evolve_constant_under_zero_generator() {
        let l = Superoperator::zeros(OpSpace::full(2), "test");
        let rho = Array2::<c64>::eye(2).mapv(|z| z * c64::new(0.5, 0.0));
        let traj = evolve(&l, &rho, 3.0, 5, true).unwrap();
        for (_, r) in traj {
            assert!(max_abs(&(&r - &rho)) < 1e-14);
        }
    }

    #[test]
    fn rk_path_matches_expm_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let d = 2;
        let space = OpSpace::full(d);
        // a random Lindblad-like generator (trace-preserving by construction)
        let mut k = Array2::<c64>::zeros((d, d));
        for z in k.iter_mut() {
            *z = c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let l = Superoperator::dissipator_term(&space, "test", &k);
        let rho = Array2::<c64>::eye(d).mapv(|z| z * c64::new(0.5, 0.0));
        let fast = evolve(&l, &rho, 2.0, 4, true).unwrap();
        // manual RK comparison path
        let mut v = l.space.op_to_vec(&rho);
        for _ in 0..4 {
            v = rk45_step_to(&l.matrix, v, 0.5, 1e-10).unwrap();
        }
        let rk = l.space.vec_to_op(&v);
        assert!(max_abs(&(&fast.last().unwrap().1 - &rk)) < 1e-7);
    }

    #[test]
    fn save_load_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let l = random_superop(&mut rng, 2);
        let dir = std::env::temp_dir().join("gibbslab_superop_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("op.bin");
        save_superoperator(&l, &path).unwrap();
        let back = load_superoperator(&path).unwrap();
        assert!(linalg::rel_fro_diff(&l.matrix, &back.matrix) < 1e-15);
        assert_eq!(l.basis_tag, back.basis_tag);
    }
}
