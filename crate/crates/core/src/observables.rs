//! Quantities derived from a solved family `Θ`: correlators `Π`, the tensors `P` and `p`,
//! quantum coordinates `T^γ`, the Jacobian `𝒢`, the generating function `Z` and the free
//! energy `F`. Every quantity is computed one way and cross-checked against an independent
//! route or its defining differential equations.

use std::collections::BTreeMap;

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraSpec, Functional};
use crate::error::{Error, Result};
use crate::graded::{frac, int, sign_scalar, Scalar};
use crate::ledger::Ledger;
use crate::linalg::{Matrix, Rref};
use crate::series::{exp_neg_over_hbar, word_len, Series, Vars, Word, EXACT};
use crate::solver::SolverState;
use crate::tensor::tuples;
use crate::transfer::TransferData;

/// Scalar series matrix, row index first.
pub type SeriesMatrix = Vec<Vec<Series>>;

#[derive(Clone, Debug)]
pub struct Observables {
    pub order: usize,
    /// `e^{-Θ/ℏ}` modulo `t^{N+1}`.
    pub exp_theta: Series,
    /// `Π_S = e^{Θ/ℏ} (−ℏ)^n ∂_S e^{−Θ/ℏ}` for non-decreasing index tuples `S`, `1 ≤ n ≤ N`.
    pub correlators: BTreeMap<Vec<usize>, Series>,
    /// `P_S^γ` (component `γ`) for every ordered tuple of arity `1..=N`.
    pub p_tensors: BTreeMap<Vec<usize>, Series>,
    /// Quantum coordinates `T^γ`.
    pub coordinates: Vec<Series>,
    /// `𝒢_β^γ = ∂_β T^γ` and its inverse.
    pub jacobian: SeriesMatrix,
    pub jacobian_inverse: SeriesMatrix,
    /// Which functional served as the cycle, if any.
    pub cycle_name: Option<String>,
    /// `⟨O_γ⟩` as scalar `ℏ`-series.
    pub one_point: Vec<Series>,
    pub generating_function: Option<Series>,
    pub free_energy: Option<Series>,
    pub ledger: Ledger,
}

/// Context shared by the checks.
struct Ctx<'a> {
    spec: &'a AlgebraSpec,
    st: &'a SolverState,
    v: &'a Vars,
    n: i32,
    gh: Vec<i64>,
}

/// All non-decreasing tuples of the given arity.
pub fn sorted_tuples(h: usize, arity: usize) -> Vec<Vec<usize>> {
    tuples(h, arity).into_iter().filter(|t| t.windows(2).all(|w| w[0] <= w[1])).collect()
}

/// `None` when `a` and `b` agree on their common known window, else a witness.
pub fn disagreement(a: &Series, b: &Series, v: &Vars) -> Option<String> {
    a.first_difference(b).map(|(w, k, i, c)| format!("differ by {c} at {} hbar^{k} component {i}", v.word_label(w)))
}

fn label(labels: &[String], t: &[usize]) -> String {
    let parts: Vec<&str> = t.iter().map(|&a| labels[a].as_str()).collect();
    format!("({})", parts.join(","))
}

/// `Σ_ρ |e_ρ| t^ρ ∂_ρ`, which multiplies `t^w` by minus its ghost number.
pub fn euler(s: &Series, v: &Vars) -> Series {
    let mut out = Series::zero_trunc(s.dim, s.tmax, s.hprec);
    for (w, k, i, c) in s.terms() {
        out.add_term(w, k, i, int(-(v.word_ghost(w) as i64)) * c);
    }
    out
}

/// Scalar series product.
fn sm(a: &Series, b: &Series, v: &Vars) -> Series {
    Series::smul_scalar(a, b, v, EXACT)
}

/// `∂_{t_1} ⋯ ∂_{t_n} s`, the last index applied first.
pub fn derivs(s: &Series, t: &[usize], v: &Vars) -> Series {
    t.iter().rev().fold(s.clone(), |acc, &a| acc.deriv(a, v))
}

/// Set partitions of `0..n` as lists of blocks; blocks and their members are increasing.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for i in 0..n {
        let mut next = Vec::new();
        for p in out {
            for b in 0..p.len() {
                let mut q = p.clone();
                q[b].push(i);
                next.push(q);
            }
            let mut q = p;
            q.push(vec![i]);
            next.push(q);
        }
        out = next;
    }
    out
}

/// Koszul sign of reordering `parities` into the concatenation of `blocks`.
fn koszul(parities: &[bool], blocks: &[Vec<usize>]) -> Scalar {
    let order: Vec<usize> = blocks.iter().flatten().copied().collect();
    let mut odd = false;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if order[i] > order[j] && parities[order[i]] && parities[order[j]] {
                odd = !odd;
            }
        }
    }
    if odd {
        -Scalar::one()
    } else {
        Scalar::one()
    }
}

impl<'a> Ctx<'a> {
    fn s(&self, k: i64) -> Scalar {
        sign_scalar(k)
    }

    fn label(&self, t: &[usize]) -> String {
        label(&self.st.labels, t)
    }

    fn theta_d(&self, memo: &mut BTreeMap<Vec<usize>, Series>, t: &[usize]) -> Series {
        if let Some(s) = memo.get(t) {
            return s.clone();
        }
        let s = if t.is_empty() { self.st.theta.clone() } else { self.theta_d(memo, &t[1..]).deriv(t[0], self.v) };
        memo.insert(t.to_vec(), s.clone());
        s
    }

    /// `Σ_{partitions} ε ∏_B (−ℏ)^{|B|−1} ∂_B Θ`.
    fn correlator_by_partitions(&self, memo: &mut BTreeMap<Vec<usize>, Series>, t: &[usize]) -> Series {
        let par: Vec<bool> = t.iter().map(|&a| self.v.is_odd(a)).collect();
        let mut acc = Series::zero(self.spec.dim());
        for blocks in set_partitions(t.len()) {
            let mut prod = Series::constant(&self.spec.unit_vec());
            for b in &blocks {
                let idx: Vec<usize> = b.iter().map(|&i| t[i]).collect();
                let f = self.theta_d(memo, &idx).scale(&int(-1).pow(b.len() as i32 - 1)).hbar_shift(b.len() as i32 - 1);
                prod = self.spec.mul(&prod, &f, self.v, self.n);
            }
            acc = acc.add(&prod.scale(&koszul(&par, &blocks)));
        }
        acc
    }
}

/// Membership of `s` in `Im K`, one word at a time, modulo the highest known `ℏ`-power.
///
/// For each word the `ℏ`-coefficients `d_k` must satisfy `d_k = Σ_j K^(j) x_{k−j}` for some
/// `x`; unknowns start `k_degree` powers below the lowest present power.
pub struct ImageOfK {
    d: usize,
    maps: Vec<Matrix>,
    cache: BTreeMap<usize, Vec<Vec<(usize, Scalar)>>>,
}

impl ImageOfK {
    pub fn new(spec: &AlgebraSpec) -> Self {
        Self { d: spec.dim(), maps: (0..=spec.k_degree()).map(|l| spec.k_matrix(l)).collect(), cache: BTreeMap::new() }
    }

    /// Sparse rows spanning the annihilator of the image for a window of `len` powers.
    fn cokernel(&mut self, len: usize) -> &Vec<Vec<(usize, Scalar)>> {
        let (d, maps) = (self.d, &self.maps);
        self.cache.entry(len).or_insert_with(|| {
            let mut m = Matrix::zeros(d * len, d * len);
            for k in 0..len {
                for (j, kj) in maps.iter().enumerate() {
                    if j > k {
                        break;
                    }
                    for r in 0..d {
                        for c in 0..d {
                            m.data[k * d + r][(k - j) * d + c] = kj.data[r][c].clone();
                        }
                    }
                }
            }
            let rref = Rref::new(&m);
            rref.transform.data[rref.rank..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect())
                .collect()
        })
    }

    pub fn witness(&mut self, s: &Series, v: &Vars) -> Option<String> {
        let slack = self.maps.len() as i32 - 1;
        let mut by_word: BTreeMap<Word, BTreeMap<i32, Vec<(usize, Scalar)>>> = BTreeMap::new();
        for (w, k, i, c) in s.terms() {
            by_word.entry(w).or_default().entry(k).or_default().push((i, c.clone()));
        }
        for (w, parts) in by_word {
            let kmin = *parts.keys().next().expect("nonempty") - slack;
            let kmax = if s.hprec >= EXACT { *parts.keys().last().expect("nonempty") } else { s.hprec - 1 };
            let len = (kmax - kmin + 1) as usize;
            let d = self.d;
            let mut target: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (k, entries) in &parts {
                for (i, c) in entries {
                    target.insert((k - kmin) as usize * d + i, c.clone());
                }
            }
            for row in self.cokernel(len) {
                let mut acc = Scalar::zero();
                for (i, x) in row {
                    if let Some(t) = target.get(i) {
                        acc += x * t;
                    }
                }
                if !acc.is_zero() {
                    return Some(format!("not in the image of K at word {}", v.word_label(w)));
                }
            }
        }
        None
    }
}

/// The functional used for expectation values: the cycle when present, else the integral.
pub fn expectation_functional(spec: &AlgebraSpec) -> Option<(&'static str, &Functional)> {
    spec.cycle.as_ref().map(|c| ("cycle", c)).or_else(|| spec.integral.as_ref().map(|c| ("integral", c)))
}

/// `⟨1⟩` and `⟨O_γ⟩` as scalar `ℏ`-series.
pub fn one_point_functions(spec: &AlgebraSpec, td: &TransferData, c: &Functional, v: &Vars) -> (Series, Vec<Series>) {
    let unit = c.apply(&Series::constant(&spec.unit_vec()), v);
    let obs = (0..td.h()).map(|a| c.apply(&td.observable(a), v)).collect();
    (unit, obs)
}

/// Right inverse of `I + M` with `M` vanishing at `t = 0`, as a terminating Neumann series.
pub fn invert_unipotent(g: &SeriesMatrix, v: &Vars, order: i32) -> Result<SeriesMatrix> {
    let h = g.len();
    for (i, row) in g.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let want = if i == j { Series::one_scalar() } else { Series::zero(1) };
            if disagreement(&x.at_zero(), &want, v).is_some() {
                return Err(Error::identity("Jacobian is the identity at t = 0", format!("entry ({i},{j})")));
            }
        }
    }
    let m: SeriesMatrix =
        (0..h).map(|i| (0..h).map(|j| if i == j { g[i][j].sub(&Series::one_scalar()) } else { g[i][j].clone() }).collect()).collect();
    let ident: SeriesMatrix =
        (0..h).map(|i| (0..h).map(|j| if i == j { Series::one_scalar() } else { Series::zero(1) }).collect()).collect();
    let mut term = ident.clone();
    let mut sum = ident;
    for _ in 0..order.max(0) {
        term = mat_mul(&term, &m, v).into_iter().map(|r| r.into_iter().map(|x| x.neg()).collect()).collect();
        sum = mat_add(&sum, &term);
    }
    // The Neumann series for a right inverse multiplies `(−M)^k` on the right of `I`; `M` and
    // its powers commute with each other, so left and right inverses coincide.
    Ok(sum)
}

pub fn mat_mul(a: &SeriesMatrix, b: &SeriesMatrix, v: &Vars) -> SeriesMatrix {
    let h = a.len();
    (0..h)
        .map(|i| {
            (0..h)
                .map(|j| {
                    let mut acc = Series::zero(1);
                    for (k, x) in a[i].iter().enumerate() {
                        acc = acc.add(&sm(x, &b[k][j], v));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn mat_add(a: &SeriesMatrix, b: &SeriesMatrix) -> SeriesMatrix {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.add(y)).collect()).collect()
}

/// `Σ_k (−1)^{k+1} U^k / k` for a scalar series `U` without constant term.
fn log_one_plus(u: &Series, v: &Vars, order: i32) -> Series {
    let mut term = Series::one_scalar();
    let mut acc = Series::zero(1);
    for k in 1..=order.max(0) as i64 {
        term = sm(&term, u, v);
        let c = frac(if k % 2 == 1 { 1 } else { -1 }, k);
        acc = acc.add(&term.scale(&c));
    }
    acc
}

/// `Σ_k X^k / k!` for a scalar series `X` without constant term.
fn exp_series(x: &Series, v: &Vars, order: i32) -> Series {
    let mut term = Series::one_scalar();
    let mut acc = Series::one_scalar();
    for k in 1..=order.max(0) as i64 {
        term = sm(&term, x, v).scale(&frac(1, k));
        acc = acc.add(&term);
    }
    acc
}

/// Computes every observable of a solved state and verifies the identities relating them.
pub fn compute_observables(spec: &AlgebraSpec, td: &TransferData, st: &SolverState, seed: u64) -> Result<Observables> {
    let v = &st.vars;
    let h = st.a.h;
    let n = st.order as i32;
    let nn = st.order;
    let ctx = Ctx { spec, st, v, n, gh: (0..h).map(|a| -(v.word_ghost(crate::series::var(a)) as i64)).collect() };
    let mut led = Ledger::new();
    let labels = &st.labels;

    let e = spec.with_product(|p| exp_neg_over_hbar(&st.theta, p, &spec.unit_vec(), v, n))?;

    // Correlators: literal derivatives of e^{−Θ/ℏ}, the partition expansion, and the recursion.
    let mut tmemo = BTreeMap::new();
    let mut direct: BTreeMap<Vec<usize>, Series> = BTreeMap::new();
    let mut corr: BTreeMap<Vec<usize>, Series> = BTreeMap::new();
    direct.insert(Vec::new(), e.clone());
    let mut fail_oracle = None;
    let mut fail_rec = None;
    for arity in 1..=nn {
        for t in sorted_tuples(h, arity) {
            let d = direct[&t[1..].to_vec()].deriv(t[0], v).hbar_shift(1).neg();
            let pi = ctx.correlator_by_partitions(&mut tmemo, &t);
            if fail_oracle.is_none() {
                let rhs = spec.mul(&pi, &e, v, n);
                fail_oracle = disagreement(&d, &rhs, v).map(|w| format!("{} {w}", ctx.label(&t)));
            }
            if fail_rec.is_none() && arity >= 2 {
                let prev = &corr[&t[1..].to_vec()];
                let th = ctx.theta_d(&mut tmemo, &[t[0]]);
                let rec = spec.mul(&th, prev, v, n).sub(&prev.deriv(t[0], v).hbar_shift(1));
                fail_rec = disagreement(&pi, &rec, v).map(|w| format!("{} {w}", ctx.label(&t)));
            }
            direct.insert(t.clone(), d);
            corr.insert(t, pi);
        }
    }
    led.record("correlators: derivatives of exp(-Theta/hbar) match the partition expansion", fail_oracle);
    led.record("correlators: recursion Pi_aS = Theta_a Pi_S - hbar d_a Pi_S", fail_rec);

    // The displayed three-point formula, written out independently of the partition code.
    let three = sorted_tuples(h, 3).into_iter().find_map(|t| {
        let (a, b, c) = (t[0], t[1], t[2]);
        let o = |x: &[usize]| ctx.theta_d(&mut tmemo.clone(), x);
        let m = |x: &Series, y: &Series| spec.mul(x, y, v, n);
        let hb = |s: Series, k: i32| s.hbar_shift(k);
        let want = m(&m(&o(&[a]), &o(&[b])), &o(&[c]))
            .sub(&hb(m(&o(&[a, b]), &o(&[c])), 1))
            .sub(&hb(m(&o(&[a]), &o(&[b, c])), 1))
            .sub(&hb(m(&o(&[b]), &o(&[a, c])), 1).scale(&ctx.s(ctx.gh[a] * ctx.gh[b])))
            .add(&hb(o(&[a, b, c]), 2));
        disagreement(&corr[&t], &want, v).map(|w| format!("{} {w}", ctx.label(&t)))
    });
    led.record("correlators: three-point expansion", three);

    led.record(
        "correlators: unit insertion is trivial",
        corr.iter().find_map(|(t, s)| {
            let mut with0 = vec![0];
            with0.extend(t);
            let s0 = corr.get(&with0)?;
            disagreement(s0, s, v).map(|w| format!("{} {w}", ctx.label(&with0)))
        }),
    );
    led.record(
        "correlators: annihilated by K_Theta",
        corr.iter().find_map(|(t, s)| {
            let cap = n - t.len() as i32;
            let k = match spec.k_theta(&st.theta, s, v, cap) {
                Ok(k) => k.mod_t(cap + 1),
                Err(e) => return Some(e.to_string()),
            };
            (!k.is_zero()).then(|| format!("{} {}", ctx.label(t), k.describe(v, 3)))
        }),
    );

    // P-tensors.
    let mut ptens: BTreeMap<Vec<usize>, Series> = BTreeMap::new();
    for a in 0..h {
        let mut d = vec![Scalar::zero(); h];
        d[a] = Scalar::one();
        ptens.insert(vec![a], Series::constant(&d));
    }
    for arity in 2..=nn {
        for t in tuples(h, arity) {
            let prev = &ptens[&t[1..].to_vec()];
            let first = prev.deriv(t[0], v).hbar_shift(1).neg();
            let mut comps = Vec::with_capacity(h);
            for g in 0..h {
                let mut acc = Series::zero(1);
                for r in 0..h {
                    acc = acc.add(&sm(&prev.component(r), &st.a.at2(t[0], r).component(g), v));
                }
                comps.push(acc);
            }
            ptens.insert(t, first.add(&Series::from_components(&comps)));
        }
    }
    led.record(
        "P-tensors: polynomial in hbar of degree at most n-2",
        ptens.iter().find_map(|(t, s)| {
            let bad = s.min_hpow().is_some_and(|k| k < 0) || s.max_hpow().is_some_and(|k| k > t.len() as i32 - 2 && t.len() >= 2);
            bad.then(|| ctx.label(t))
        }),
    );
    led.record(
        "P-tensors: unit insertion is trivial",
        ptens.iter().filter(|(t, _)| t.len() >= 2 && t[0] == 0).find_map(|(t, s)| {
            disagreement(s, &ptens[&t[1..].to_vec()], v).map(|w| format!("{} {w}", ctx.label(t)))
        }),
    );
    let m2 = |a: usize, b: usize, g: usize| st.a.at2(a, b).at_zero().coeff(0, 0, g);
    let m3 = |a: usize, b: usize, c: usize, g: usize| st.a.at2(b, c).deriv(a, v).at_zero().coeff(0, 0, g);
    let m4 = |a: usize, b: usize, c: usize, d: usize, g: usize| derivs(st.a.at2(c, d), &[a, b], v).at_zero().coeff(0, 0, g);
    let p_at = |t: &[usize], g: usize| -> Series { ptens[t].at_zero().component(g) };
    let poly = |parts: &[(i32, Scalar)]| {
        let mut s = Series::zero(1);
        for (k, c) in parts {
            s.add_term(0, *k, 0, c.clone());
        }
        s
    };
    let mut p_examples = None;
    if nn >= 3 {
        p_examples = tuples(h, 3).into_iter().find_map(|t| {
            let (a1, a2, a3) = (t[0], t[1], t[2]);
            (0..h).find_map(|g| {
                let c0: Scalar = (0..h).map(|r| m2(a2, a3, r) * m2(a1, r, g)).sum();
                let want = poly(&[(0, c0), (1, -m3(a1, a2, a3, g))]);
                disagreement(&p_at(&t, g), &want, v).map(|w| format!("arity 3 {} -> {}: {w}", ctx.label(&t), labels[g]))
            })
        });
    }
    if p_examples.is_none() && nn >= 4 {
        p_examples = tuples(h, 4).into_iter().find_map(|t| {
            let (a1, a2, a3, a4) = (t[0], t[1], t[2], t[3]);
            (0..h).find_map(|g| {
                let mut c0 = Scalar::zero();
                let mut c1 = Scalar::zero();
                for r in 0..h {
                    for s in 0..h {
                        c0 += m2(a3, a4, r) * m2(a2, r, s) * m2(a1, s, g);
                    }
                    c1 += m3(a1, a3, a4, r) * m2(a2, r, g) + m2(a3, a4, r) * m3(a1, a2, r, g) + m3(a2, a3, a4, r) * m2(a1, r, g);
                }
                let want = poly(&[(0, c0), (1, -c1), (2, m4(a1, a2, a3, a4, g))]);
                disagreement(&p_at(&t, g), &want, v).map(|w| format!("arity 4 {} -> {}: {w}", ctx.label(&t), labels[g]))
            })
        });
    }
    led.record("P-tensors: low-arity closed forms at t = 0", p_examples);

    // Π_S − P_S^γ Π_γ lies in the image of K_Θ, tested on (−ℏ)^n ∂_S e^{−Θ/ℏ} in the image of K.
    let mut image = ImageOfK::new(spec);
    let mut img_fail = None;
    for (t, d) in direct.iter().filter(|(t, _)| t.len() >= 2) {
        let p = &ptens[t];
        let mut rest = d.clone();
        for g in 0..h {
            rest = rest.sub(&Series::smul(&p.component(g), &direct[&vec![g]], v, n));
        }
        if let Some(w) = image.witness(&rest, v) {
            img_fail = Some(format!("{} {w}", ctx.label(t)));
            break;
        }
    }
    led.record("correlators: Pi_S - P_S Pi differs by an exact term", img_fail);

    // Quantum coordinates.
    let mut coords: Vec<Series> = (0..h).map(|g| Series::scalar_monomial(crate::series::var(g), 0, Scalar::one())).collect();
    let mut fact = Scalar::one();
    for arity in 2..=nn {
        fact *= int(arity as i64);
        let coef = sign_scalar(arity as i64 - 1) / &fact;
        for t in tuples(h, arity) {
            let p0 = ptens[&t].at_zero();
            if p0.is_zero() {
                continue;
            }
            for g in 0..h {
                let mut c = p0.component(g).hbar_shift(1 - arity as i32).scale(&coef);
                for &a in &t {
                    c = c.mul_var(a, v);
                }
                coords[g] = coords[g].add(&c);
            }
        }
    }
    let coords: Vec<Series> = coords.into_iter().map(|c| c.truncated(n, EXACT)).collect();
    let mut lemma_t = None;
    'outer: for t in tuples(h, 2) {
        for g in 0..h {
            let mut lhs = derivs(&coords[g], &t, v).hbar_shift(1);
            for r in 0..h {
                lhs = lhs.add(&sm(&st.a.at2(t[0], t[1]).component(r), &coords[g].deriv(r, v), v));
            }
            if !lhs.is_zero() {
                lemma_t = Some(format!("{} on T^{}: {}", ctx.label(&t), labels[g], lhs.describe(v, 3)));
                break 'outer;
            }
        }
    }
    led.record("coordinates: second-order system", lemma_t);
    led.record(
        "coordinates: unit direction",
        (0..h).find_map(|g| {
            let lhs = coords[g].deriv(0, v).hbar_shift(1).add(&coords[g]);
            let want = if g == 0 { Series::scalar_monomial(0, 1, Scalar::one()) } else { Series::zero(1) };
            disagreement(&lhs, &want, v).map(|w| format!("T^{}: {w}", labels[g]))
        }),
    );
    led.record(
        "coordinates: homogeneity",
        (0..h).find_map(|g| {
            disagreement(&euler(&coords[g], v), &coords[g].scale(&int(ctx.gh[g])), v).map(|w| format!("T^{}: {w}", labels[g]))
        }),
    );
    led.record(
        "coordinates: T = t modulo quadratic terms",
        (0..h).find_map(|g| {
            let want = Series::scalar_monomial(crate::series::var(g), 0, Scalar::one());
            disagreement(&coords[g].mod_t(2), &want.mod_t(2), v).map(|w| format!("T^{}: {w}", labels[g]))
        }),
    );

    // Jacobian matrix and its inverse.
    let jac: SeriesMatrix = (0..h).map(|b| (0..h).map(|g| coords[g].deriv(b, v)).collect()).collect();
    let inv = invert_unipotent(&jac, v, n)?;
    let ident_fail = {
        let p = mat_mul(&jac, &inv, v);
        let q = mat_mul(&inv, &jac, v);
        (0..h).find_map(|i| {
            (0..h).find_map(|j| {
                let want = if i == j { Series::one_scalar() } else { Series::zero(1) };
                disagreement(&p[i][j], &want, v).or_else(|| disagreement(&q[i][j], &want, v)).map(|w| format!("entry ({i},{j}) {w}"))
            })
        })
    };
    led.record("Jacobian: invertible with two-sided inverse", ident_fail);
    led.record(
        "Jacobian: unit direction",
        (0..h).find_map(|b| {
            (0..h).find_map(|g| {
                disagreement(&jac[b][g].deriv(0, v).hbar_shift(1), &jac[b][g].neg(), v).map(|w| format!("({b},{g}) {w}"))
            })
        }),
    );
    led.record(
        "Jacobian: homogeneity",
        (0..h).find_map(|b| {
            (0..h).find_map(|g| {
                disagreement(&euler(&jac[b][g], v), &jac[b][g].scale(&int(ctx.gh[g] - ctx.gh[b])), v).map(|w| format!("({b},{g}) {w}"))
            })
        }),
    );
    // Flatness in the form d(G^{-1}) ∧ dG = 0.
    let dinv: Vec<SeriesMatrix> = (0..h).map(|a| inv.iter().map(|r| r.iter().map(|x| x.deriv(a, v)).collect()).collect()).collect();
    let djac: Vec<SeriesMatrix> = (0..h).map(|a| jac.iter().map(|r| r.iter().map(|x| x.deriv(a, v)).collect()).collect()).collect();
    let mut flat = None;
    'flat: for a in 0..h {
        for b in 0..h {
            let l = mat_mul(&dinv[a], &djac[b], v);
            let r = mat_mul(&dinv[b], &djac[a], v);
            for i in 0..h {
                for j in 0..h {
                    let d = l[i][j].sub(&r[i][j].scale(&ctx.s(ctx.gh[a] * ctx.gh[b])));
                    if !d.is_zero() {
                        flat = Some(format!("{} entry ({i},{j}): {}", ctx.label(&[a, b]), d.describe(v, 3)));
                        break 'flat;
                    }
                }
            }
        }
    }
    led.record("Jacobian: d(G^-1) wedge dG vanishes", flat);
    // Recovery of A from the Jacobian, as -ℏ (∂G) G^{-1} and as ℏ G ∂(G^{-1}).
    let mut rec_fail = None;
    'rec: for a in 0..h {
        let left = mat_mul(&djac[a], &inv, v);
        let signed: SeriesMatrix = (0..h)
            .map(|b| (0..h).map(|r| jac[b][r].scale(&ctx.s(ctx.gh[a] * (ctx.gh[b] + ctx.gh[r])))).collect())
            .collect();
        let right = mat_mul(&signed, &dinv[a], v);
        for b in 0..h {
            for g in 0..h {
                let want = st.a.at2(a, b).component(g);
                let x = left[b][g].hbar_shift(1).neg();
                let y = right[b][g].hbar_shift(1);
                if let Some(w) = disagreement(&x, &want, v).or_else(|| disagreement(&y, &want, v)) {
                    rec_fail = Some(format!("{} -> {}: {w}", ctx.label(&[a, b]), labels[g]));
                    break 'rec;
                }
                if x.tmax < n - 2 {
                    rec_fail = Some(format!("recovered A known only to word {}", x.tmax));
                    break 'rec;
                }
            }
        }
    }
    led.record("Jacobian: recovers A exactly", rec_fail);

    // Cycle-level statements.
    let mut one_point = Vec::new();
    let mut zfun = None;
    let mut free = None;
    let mut cycle_name = None;
    if let Some((name, c)) = expectation_functional(spec) {
        cycle_name = Some(name.to_string());
        let (unit_val, obs) = one_point_functions(spec, td, c, v);
        let z_direct = c.apply(&e, v);
        let mut z_coord = unit_val.clone();
        for g in 0..h {
            z_coord = z_coord.sub(&sm(&coords[g], &obs[g], v).hbar_shift(-1));
        }
        led.record(format!("generating function ({name}): two constructions agree"), disagreement(&z_direct, &z_coord, v));
        led.record(
            format!("generating function ({name}): value at t = 0"),
            disagreement(&z_direct.at_zero(), &unit_val, v),
        );
        let mut zsys = None;
        'z: for t in tuples(h, 2) {
            let mut lhs = derivs(&z_direct, &t, v).hbar_shift(1);
            for r in 0..h {
                lhs = lhs.add(&sm(&st.a.at2(t[0], t[1]).component(r), &z_direct.deriv(r, v), v));
            }
            if !lhs.is_zero() {
                zsys = Some(format!("{} {}", ctx.label(&t), lhs.describe(v, 3)));
                break 'z;
            }
        }
        led.record(format!("generating function ({name}): second-order system"), zsys);
        led.record(
            format!("generating function ({name}): unit direction"),
            disagreement(&z_direct.deriv(0, v).hbar_shift(1), &z_direct.neg(), v),
        );
        led.record(
            format!("generating function ({name}): homogeneity"),
            disagreement(&euler(&z_direct, v), &z_direct.scale(&int(c.dimension as i64)), v),
        );
        let corr_cycle: BTreeMap<&Vec<usize>, Series> = direct.iter().filter(|(t, _)| !t.is_empty()).map(|(t, d)| (t, c.apply(d, v))).collect();
        led.record(
            format!("correlators ({name}): n-point functions from one-point functions"),
            corr_cycle.iter().filter(|(t, _)| t.len() >= 2).find_map(|(t, val)| {
                let p = &ptens[*t];
                let mut want = Series::zero(1);
                for g in 0..h {
                    want = want.add(&sm(&p.component(g), &corr_cycle[&vec![g]], v));
                }
                disagreement(val, &want, v).map(|w| format!("{} {w}", ctx.label(t)))
            }),
        );
        led.record(
            format!("correlators ({name}): derivatives of the coordinates"),
            corr_cycle.iter().find_map(|(t, val)| {
                let k = t.len() as i32;
                let mut want = Series::zero(1);
                for g in 0..h {
                    want = want.add(&sm(&derivs(&coords[g], t, v), &obs[g], v));
                }
                let want = want.hbar_shift(k - 1).scale(&sign_scalar(k as i64 - 1));
                disagreement(val, &want, v).map(|w| format!("{} {w}", ctx.label(t)))
            }),
        );
        // Shifting the functional by r∘K leaves expectations of t = 0 correlators unchanged.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = spec.dim();
        let r: Vec<Scalar> =
            (0..d).map(|i| if spec.ghost(i) == c.dimension - 1 { int(rng.gen_range(-3..=3)) } else { Scalar::zero() }).collect();
        let mut shifted = c.clone();
        for l in 0..=spec.k_degree() {
            let km = spec.k_matrix(l);
            let row: Vec<Scalar> = (0..d).map(|j| (0..d).map(|i| &r[i] * &km.data[i][j]).sum()).collect();
            if shifted.maps.len() <= l {
                shifted.maps.push(vec![Scalar::zero(); d]);
            }
            for (x, y) in shifted.maps[l].iter_mut().zip(row) {
                *x += y;
            }
        }
        led.record(
            format!("correlators ({name}): invariant under homotopy of the functional"),
            corr.iter().find_map(|(t, s)| {
                let pi0 = s.at_zero();
                disagreement(&c.apply(&pi0, v), &shifted.apply(&pi0, v), v).map(|w| format!("{} {w}", ctx.label(t)))
            }),
        );
        one_point = obs.clone();

        // Free energy for unital functionals.
        if disagreement(&unit_val, &Series::one_scalar(), v).is_none() && unit_val.is_exact() {
            let u = z_direct.sub(&Series::one_scalar());
            let f = log_one_plus(&u, v, n).hbar_shift(1).neg();
            led.record(format!("free energy ({name}): power series in hbar"), f.min_hpow().filter(|&k| k < 0).map(|k| {
                let t = f.terms().find(|x| x.1 == k).expect("present");
                format!("hbar^{k} at {}", v.word_label(t.0))
            }));
            led.record(format!("free energy ({name}): vanishes at t = 0"), (!f.at_zero().is_zero()).then(|| f.at_zero().describe(v, 3)));
            let back = exp_series(&f.hbar_shift(-1).neg(), v, n);
            led.record(format!("free energy ({name}): exponential reproduces Z"), disagreement(&back, &z_direct, v));
            led.record(
                format!("free energy ({name}): first derivatives at t = 0 are one-point functions"),
                (0..h).find_map(|g| disagreement(&f.deriv(g, v).at_zero(), &obs[g], v).map(|w| format!("{}: {w}", labels[g]))),
            );
            led.record(
                format!("free energy ({name}): unit direction"),
                disagreement(&f.deriv(0, v), &Series::one_scalar().truncated(n - 1, EXACT), v),
            );
            let fd: Vec<Series> = (0..h).map(|a| f.deriv(a, v)).collect();
            led.record(
                format!("free energy ({name}): second-order system"),
                tuples(h, 2).into_iter().find_map(|t| {
                    let lhs = fd[t[1]].deriv(t[0], v).hbar_shift(1);
                    let mut rhs = sm(&fd[t[0]], &fd[t[1]], v);
                    for g in 0..h {
                        rhs = rhs.sub(&sm(&st.a.at2(t[0], t[1]).component(g), &fd[g], v));
                    }
                    disagreement(&lhs, &rhs, v).map(|w| format!("{} {w}", ctx.label(&t)))
                }),
            );
            // Taylor coefficients φ at t = 0 and the first two relations they satisfy.
            let phi = |t: &[usize]| derivs(&f, t, v).at_zero();
            let phi2 = tuples(h, 2).into_iter().find_map(|t| {
                let (a, b) = (t[0], t[1]);
                let mut rhs = sm(&phi(&[a]), &phi(&[b]), v);
                for s in 0..h {
                    rhs = rhs.sub(&phi(&[s]).scale(&m2(a, b, s)));
                }
                disagreement(&phi(&[a, b]).hbar_shift(1), &rhs, v).map(|w| format!("{} {w}", ctx.label(&t)))
            });
            let phi3 = if nn >= 3 {
                tuples(h, 3).into_iter().find_map(|t| {
                    let (a, b, c3) = (t[0], t[1], t[2]);
                    let mut rhs = sm(&phi(&[a, b]), &phi(&[c3]), v)
                        .add(&sm(&phi(&[b]), &phi(&[a, c3]), v).scale(&ctx.s(ctx.gh[a] * ctx.gh[b])));
                    for s in 0..h {
                        rhs = rhs.sub(&phi(&[a, s]).scale(&m2(b, c3, s))).sub(&phi(&[s]).scale(&m3(a, b, c3, s)));
                    }
                    disagreement(&phi(&[a, b, c3]).hbar_shift(1), &rhs, v).map(|w| format!("{} {w}", ctx.label(&t)))
                })
            } else {
                None
            };
            led.record(format!("free energy ({name}): Taylor coefficient relations"), phi2.or(phi3));
            free = Some(f);
        }
        zfun = Some(z_direct);
    }

    Ok(Observables {
        order: nn,
        exp_theta: e,
        correlators: corr,
        p_tensors: ptens,
        coordinates: coords,
        jacobian: jac,
        jacobian_inverse: inv,
        cycle_name,
        one_point,
        generating_function: zfun,
        free_energy: free,
        ledger: led,
    })
}

/// Words of a series, for reports.
pub fn words_present(s: &Series) -> Vec<Word> {
    let mut w: Vec<Word> = s.terms().map(|t| t.0).collect();
    w.dedup();
    w
}

/// Longest word present.
pub fn max_len(s: &Series) -> u32 {
    s.terms().map(|t| word_len(t.0)).max().unwrap_or(0)
}
