//! Integrals: validation, pairings on cohomology, the metric `g`, and the WDVV potential.

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraSpec, Functional};
use crate::error::{Error, Result};
use crate::graded::{format_scalar, frac, int, sign_scalar, Scalar};
use crate::ledger::{FirstFailure, Ledger};
use crate::linalg::Matrix;
use crate::observables::{derivs, disagreement, Observables, SeriesMatrix};
use crate::series::{Series, Vars, EXACT};
use crate::solver::SolverState;
use crate::tensor::tuples;
use crate::transfer::TransferData;

/// Outcome of [`validate_integral`].
#[derive(Clone, Debug)]
pub struct IntegralValidation {
    pub ledger: Ledger,
    /// Skew-adjointness of `K` under the integral pairing holds.
    pub skew_adjoint: bool,
    /// `∮ K a = 0` and `∮ (a, b)_ℏ = 0` hold.
    pub annihilates_k_and_brackets: bool,
    /// The integral has no `ℏ`-corrections and every `K^(n)` is skew-adjoint for it.
    pub semi_classical: bool,
}

fn sgn(k: i64) -> Scalar {
    sign_scalar(k)
}

/// Checks the integral axioms on all basis pairs, both in skew-adjoint form and in the
/// equivalent form `∮ K a = ∮ (a, b)_ℏ = 0`, and detects semi-classical integrals.
/// Renders a constant scalar series as `c0 + c1 hbar + …`.
fn hbar_polynomial(s: &Series) -> String {
    let parts: Vec<String> = s
        .terms()
        .map(|(_, k, _, c)| match k {
            0 => format_scalar(c),
            1 => format!("{} hbar", format_scalar(c)),
            _ => format!("{} hbar^{k}", format_scalar(c)),
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

pub fn validate_integral(spec: &AlgebraSpec, c: &Functional) -> Result<IntegralValidation> {
    spec.ensure_brackets()?;
    let v = spec.no_vars();
    let d = spec.dim();
    let lab = |i: usize| spec.basis.labels[i].as_str();
    let g = |i: usize| spec.ghost(i) as i64;
    let e: Vec<Series> = (0..d).map(|i| spec.basis_series(i)).collect();
    let ke: Vec<Series> = e.iter().map(|x| spec.apply_k(x, v)).collect();
    let show = hbar_polynomial;
    let mut led = Ledger::new();

    let mut f = FirstFailure::default();
    for (i, row) in c.maps.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            f.check(x.is_zero() || spec.ghost(j) == c.dimension, || format!("hbar^{i} part nonzero on {}", lab(j)));
        }
    }
    led.record("integral axioms: ghost support", f.0);

    let mut skew = FirstFailure::default();
    for a in 0..d {
        for b in 0..d {
            let lhs = c.apply(&spec.mul(&ke[a], &e[b], v, 0), v);
            let rhs = c.apply(&spec.mul(&e[a], &ke[b], v, 0), v).scale(&-sgn(g(a)));
            skew.check(lhs == rhs, || format!("a={}, b={}: {} vs {}", lab(a), lab(b), show(&lhs), show(&rhs)));
        }
    }
    let skew_adjoint = skew.is_clean();
    led.record("integral axioms: K skew-adjoint on every basis pair", skew.0);

    let mut kf = FirstFailure::default();
    for a in 0..d {
        let val = c.apply(&ke[a], v);
        kf.check(val.is_zero(), || format!("integral of K {} = {}", lab(a), show(&val)));
    }
    let mut bf = FirstFailure::default();
    for a in 0..d {
        for b in 0..d {
            let val = c.apply(&spec.bracket(&e[a], &e[b], v, 0)?, v);
            bf.check(val.is_zero(), || format!("integral of ({}, {}) = {}", lab(a), lab(b), show(&val)));
        }
    }
    let annihilates = kf.is_clean() && bf.is_clean();
    led.record("integral axioms: annihilates the image of K", kf.0);
    led.record("integral axioms: annihilates every bracket", bf.0);
    led.record(
        "integral axioms: skew-adjoint and annihilation forms agree",
        (skew_adjoint != annihilates).then(|| format!("skew-adjoint {skew_adjoint}, annihilation {annihilates}")),
    );

    let hbar_free = c.maps.iter().skip(1).all(|row| row.iter().all(Zero::is_zero));
    let mut each_order = true;
    for km in &spec.k {
        let kn: Vec<Series> = e.iter().map(|x| x.apply_linear(&[(0, km)], true, v)).collect();
        for a in 0..d {
            for b in 0..d {
                let lhs = c.apply(&spec.mul(&kn[a], &e[b], v, 0), v).hbar_part(0);
                let rhs = c.apply(&spec.mul(&e[a], &kn[b], v, 0), v).hbar_part(0).scale(&-sgn(g(a)));
                each_order &= lhs == rhs;
            }
        }
    }
    let semi_classical = hbar_free && each_order && annihilates;
    Ok(IntegralValidation { ledger: led, skew_adjoint, annihilates_k_and_brackets: annihilates, semi_classical })
}

/// Classical, quantum and triple pairings on cohomology.
#[derive(Clone, Debug)]
pub struct PairingData {
    /// `⟨e_α, e_β⟩ = ∫ f(e_α) · f(e_β)`.
    pub classical: Matrix,
    /// `⟨e_α, e_β⟩_ℏ = ∮ O_α · O_β` as scalar `ℏ`-series.
    pub quantum: SeriesMatrix,
    /// `⟨e_α, e_β, e_γ⟩_ℏ` at index `(α·h + β)·h + γ`.
    pub triple: Vec<Series>,
    pub ledger: Ledger,
}

impl PairingData {
    pub fn triple_at(&self, a: usize, b: usize, c: usize) -> &Series {
        let h = self.quantum.len();
        &self.triple[(a * h + b) * h + c]
    }
}

/// Products `m_2` on cohomology, read off `A` at `t = 0`.
fn m2_table(st: &SolverState) -> Vec<Vec<Vec<Scalar>>> {
    let h = st.a.h;
    (0..h).map(|a| (0..h).map(|b| (0..h).map(|g| st.a.at2(a, b).coeff(0, 0, g)).collect()).collect()).collect()
}

struct Classes<'a> {
    h: usize,
    gh: Vec<i64>,
    labels: &'a [String],
    m2: Vec<Vec<Vec<Scalar>>>,
}

impl Classes<'_> {
    fn s(&self, k: i64) -> Scalar {
        sgn(k)
    }
    fn lab3(&self, x: usize, y: usize, z: usize) -> String {
        format!("({},{},{})", self.labels[x], self.labels[y], self.labels[z])
    }
    /// `⟨x, m_2(y, z)⟩` for a pairing table.
    fn left<T: Clone>(&self, p: &dyn Fn(usize, usize) -> T, x: usize, y: usize, z: usize, add: impl Fn(T, T) -> T, scale: impl Fn(&T, &Scalar) -> T, zero: T) -> T {
        (0..self.h).fold(zero, |acc, s| if self.m2[y][z][s].is_zero() { acc } else { add(acc, scale(&p(x, s), &self.m2[y][z][s])) })
    }
    fn right<T: Clone>(&self, p: &dyn Fn(usize, usize) -> T, x: usize, y: usize, z: usize, add: impl Fn(T, T) -> T, scale: impl Fn(&T, &Scalar) -> T, zero: T) -> T {
        (0..self.h).fold(zero, |acc, s| if self.m2[x][y][s].is_zero() { acc } else { add(acc, scale(&p(s, z), &self.m2[x][y][s])) })
    }
}

/// Computes the three pairings and checks the Frobenius and trilinear identities.
pub fn pairings(spec: &AlgebraSpec, td: &TransferData, st: &SolverState, integral: &Functional, seed: u64) -> Result<PairingData> {
    let v = spec.no_vars();
    let h = td.h();
    let cls = Classes {
        h,
        gh: td.cohomology.ghosts.iter().map(|&g| g as i64).collect(),
        labels: &st.labels,
        m2: m2_table(st),
    };
    let mut led = Ledger::new();
    let obs: Vec<Series> = (0..h).map(|a| td.observable(a)).collect();
    let classical_f: Vec<Series> = obs.iter().map(|o| o.hbar_part(0)).collect();
    let classical_int = Functional { dimension: integral.dimension, maps: vec![integral.maps[0].clone()] };
    let classical = Matrix::from_rows(
        (0..h)
            .map(|a| (0..h).map(|b| classical_int.apply(&spec.mul(&classical_f[a], &classical_f[b], v, 0), v).coeff(0, 0, 0)).collect())
            .collect(),
    );
    let quantum: SeriesMatrix =
        (0..h).map(|a| (0..h).map(|b| integral.apply(&spec.mul(&obs[a], &obs[b], v, 0), v)).collect()).collect();
    // φ_2(e_α, e_β) = ∂_α ∂_β Θ at t = 0.
    let phi2: Vec<Vec<Series>> = (0..h).map(|a| (0..h).map(|b| derivs(&st.theta, &[a, b], &st.vars).at_zero()).collect()).collect();
    let pair = |x: &Series, y: &Series| integral.apply(&spec.mul(x, y, v, 0), v);
    let mut triple = Vec::with_capacity(h * h * h);
    for x in 0..h {
        for y in 0..h {
            for z in 0..h {
                let t = pair(&phi2[x][y], &obs[z]).add(&pair(&obs[y], &phi2[x][z]).scale(&cls.s(cls.gh[x] * cls.gh[y])));
                triple.push(t);
            }
        }
    }

    // Classical Frobenius identities.
    let cp = |a: usize, b: usize| classical.data[a][b].clone();
    let add = |a: Scalar, b: Scalar| a + b;
    let scl = |a: &Scalar, s: &Scalar| a * s;
    let mut f = FirstFailure::default();
    for x in 0..h {
        for y in 0..h {
            f.check(cp(x, y) == cls.s(cls.gh[x] * cls.gh[y]) * cp(y, x), || format!("({},{})", st.labels[x], st.labels[y]));
        }
    }
    led.record("pairing: classical pairing is graded symmetric", f.0);
    let mut f = FirstFailure::default();
    for x in 0..h {
        for y in 0..h {
            for z in 0..h {
                for w in 0..h {
                    let mut lhs = Scalar::zero();
                    let mut rhs = Scalar::zero();
                    for s in 0..h {
                        lhs += &cls.m2[x][y][s] * &cls.m2[s][z][w];
                        rhs += &cls.m2[y][z][s] * &cls.m2[x][s][w];
                    }
                    f.check(lhs == rhs, || format!("{} -> {}", cls.lab3(x, y, z), st.labels[w]));
                    f.check(cls.m2[x][y][w] == cls.s(cls.gh[x] * cls.gh[y]) * &cls.m2[y][x][w], || format!("({},{})", st.labels[x], st.labels[y]));
                }
            }
        }
    }
    led.record("pairing: cohomology product is graded commutative and associative", f.0);
    let forms: [(&str, Box<dyn Fn(usize, usize, usize) -> (Scalar, Scalar)>); 5] = [
        ("pairing: classical invariance", Box::new(|x, y, z| (cls.left(&cp, x, y, z, add, scl, Scalar::zero()), cls.right(&cp, x, y, z, add, scl, Scalar::zero())))),
        (
            "pairing: classical left invariance",
            Box::new(|x, y, z| (cls.left(&cp, x, y, z, add, scl, Scalar::zero()), cls.s(cls.gh[x] * cls.gh[y]) * cls.left(&cp, y, x, z, add, scl, Scalar::zero()))),
        ),
        (
            "pairing: classical right invariance",
            Box::new(|x, y, z| (cls.right(&cp, x, y, z, add, scl, Scalar::zero()), cls.s(cls.gh[y] * cls.gh[z]) * cls.right(&cp, x, z, y, add, scl, Scalar::zero()))),
        ),
        (
            "pairing: classical left cyclicity",
            Box::new(|x, y, z| {
                (cls.left(&cp, x, y, z, add, scl, Scalar::zero()), cls.s(cls.gh[x] * (cls.gh[y] + cls.gh[z])) * cls.left(&cp, y, z, x, add, scl, Scalar::zero()))
            }),
        ),
        (
            "pairing: classical right cyclicity",
            Box::new(|x, y, z| {
                (cls.right(&cp, x, y, z, add, scl, Scalar::zero()), cls.s((cls.gh[x] + cls.gh[y]) * cls.gh[z]) * cls.right(&cp, z, x, y, add, scl, Scalar::zero()))
            }),
        ),
    ];
    for (name, form) in &forms {
        let mut f = FirstFailure::default();
        for t in tuples(h, 3) {
            let (l, r) = form(t[0], t[1], t[2]);
            f.check(l == r, || format!("{}: {} vs {}", cls.lab3(t[0], t[1], t[2]), format_scalar(&l), format_scalar(&r)));
        }
        led.record(*name, f.0);
    }
    led.record(
        "pairing: quantum pairing reduces to the classical one",
        (0..h).find_map(|a| {
            (0..h).find_map(|b| (quantum[a][b].coeff(0, 0, 0) != classical.data[a][b]).then(|| format!("({},{})", st.labels[a], st.labels[b])))
        }),
    );

    // Trilinear pairing properties and the quantum defects.
    let qp = |a: usize, b: usize| quantum[a][b].clone();
    let sadd = |a: Series, b: Series| a.add(&b);
    let sscl = |a: &Series, s: &Scalar| a.scale(s);
    let zero = Series::zero(1);
    let tr = |x: usize, y: usize, z: usize| triple[(x * h + y) * h + z].clone();
    let ql = |x, y, z| cls.left(&qp, x, y, z, sadd, sscl, zero.clone());
    let qr = |x, y, z| cls.right(&qp, x, y, z, sadd, sscl, zero.clone());
    let g = &cls.gh;
    type Check<'c> = Box<dyn Fn(usize, usize, usize) -> (Series, Series) + 'c>;
    let props: Vec<(&str, Check)> = vec![
        ("trilinear pairing: graded symmetric in the last two slots", Box::new(|x, y, z| (tr(x, y, z), tr(x, z, y).scale(&cls.s(g[y] * g[z]))))),
        ("trilinear pairing: vanishes on the unit", Box::new(|_, y, z| (tr(0, y, z), Series::zero(1)))),
        (
            "trilinear pairing: associativity defect",
            Box::new(|x, y, z| (ql(x, y, z).sub(&qr(x, y, z)), tr(x, y, z).sub(&tr(z, x, y).scale(&cls.s(g[x] * g[z] + g[y] * g[z]))).hbar_shift(1))),
        ),
        (
            "trilinear pairing: left invariance defect",
            Box::new(|x, y, z| {
                (ql(x, y, z).sub(&ql(y, x, z).scale(&cls.s(g[x] * g[y]))), tr(x, y, z).sub(&tr(y, x, z).scale(&cls.s(g[x] * g[y]))).hbar_shift(1))
            }),
        ),
        (
            "trilinear pairing: right invariance defect",
            Box::new(|x, y, z| {
                (
                    qr(x, y, z).sub(&qr(x, z, y).scale(&cls.s(g[y] * g[z]))),
                    tr(z, x, y).scale(&cls.s(g[x] * g[z] + g[y] * g[z])).sub(&tr(y, x, z).scale(&cls.s(g[x] * g[y]))).hbar_shift(1),
                )
            }),
        ),
        (
            "quantum pairing: associativity defect through the second-order coefficients",
            Box::new(|x, y, z| (ql(x, y, z).sub(&qr(x, y, z)), pair(&obs[x], &phi2[y][z]).sub(&pair(&phi2[x][y], &obs[z])).hbar_shift(1).neg())),
        ),
        (
            "quantum pairing: left invariance defect through the second-order coefficients",
            Box::new(|x, y, z| {
                (
                    ql(x, y, z).sub(&ql(y, x, z).scale(&cls.s(g[x] * g[y]))),
                    pair(&obs[x], &phi2[y][z]).sub(&pair(&obs[y], &phi2[x][z]).scale(&cls.s(g[x] * g[y]))).hbar_shift(1).neg(),
                )
            }),
        ),
        (
            "quantum pairing: right invariance defect through the second-order coefficients",
            Box::new(|x, y, z| {
                (
                    qr(x, y, z).sub(&qr(x, z, y).scale(&cls.s(g[y] * g[z]))),
                    pair(&phi2[x][y], &obs[z]).sub(&pair(&phi2[x][z], &obs[y]).scale(&cls.s(g[y] * g[z]))).hbar_shift(1).neg(),
                )
            }),
        ),
    ];
    for (name, check) in &props {
        let mut f = FirstFailure::default();
        for t in tuples(h, 3) {
            let (l, r) = check(t[0], t[1], t[2]);
            f.check(disagreement(&l, &r, v).is_none(), || format!("{}: {} vs {}", cls.lab3(t[0], t[1], t[2]), l.describe(v, 3), r.describe(v, 3)));
        }
        led.record(*name, f.0);
    }

    // Homotopy invariance: shifting each representative by K of a random element.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifted: Vec<Series> = (0..h)
        .map(|a| {
            let s: Vec<Scalar> = (0..spec.dim())
                .map(|i| if spec.ghost(i) as i64 == cls.gh[a] - 1 { int(rng.gen_range(-3..=3)) } else { Scalar::zero() })
                .collect();
            obs[a].add(&spec.apply_k(&Series::constant(&s), v))
        })
        .collect();
    led.record(
        "quantum pairing: invariant under homotopy of the representatives",
        tuples(h, 2).into_iter().find_map(|t| {
            let p = pair(&shifted[t[0]], &shifted[t[1]]);
            disagreement(&p, &quantum[t[0]][t[1]], v).map(|w| format!("({},{}) {w}", st.labels[t[0]], st.labels[t[1]]))
        }),
    );

    drop(forms);
    drop(props);
    Ok(PairingData { classical, quantum, triple, ledger: led })
}

/// The metric `g_{βγ} = ∮ ∂_β Θ · ∂_γ Θ`.
#[derive(Clone, Debug)]
pub struct MetricData {
    pub g: SeriesMatrix,
    pub ledger: Ledger,
}

/// `⟨e_{a_1}, …, e_{a_k}, e_β, e_γ⟩_ℏ = ∂_{a_1} ⋯ ∂_{a_k} g_{βγ}` at `t = 0`.
pub fn n_ary_pairing(metric: &MetricData, lead: &[usize], b: usize, c: usize, v: &Vars) -> Series {
    derivs(&metric.g[b][c], lead, v).at_zero()
}

pub fn metric(spec: &AlgebraSpec, st: &SolverState, integral: &Functional, pd: &PairingData) -> MetricData {
    let v = &st.vars;
    let h = st.a.h;
    let n = st.order as i32;
    let gh: Vec<i64> = (0..h).map(|a| -(v.word_ghost(crate::series::var(a)) as i64)).collect();
    let dtheta: Vec<Series> = (0..h).map(|a| st.theta.deriv(a, v)).collect();
    let g: SeriesMatrix = (0..h).map(|b| (0..h).map(|c| integral.apply(&spec.mul(&dtheta[b], &dtheta[c], v, n - 1), v)).collect()).collect();
    let mut led = Ledger::new();
    let lab2 = |a: usize, b: usize| format!("({},{})", st.labels[a], st.labels[b]);
    let lab3 = |a: usize, b: usize, c: usize| format!("({},{},{})", st.labels[a], st.labels[b], st.labels[c]);
    let sm = |a: &Series, b: &Series| Series::smul_scalar(a, b, v, EXACT);
    led.record(
        "metric: value at t = 0 is the quantum pairing",
        tuples(h, 2).into_iter().find_map(|t| disagreement(&g[t[0]][t[1]].at_zero(), &pd.quantum[t[0]][t[1]], v).map(|w| format!("{} {w}", lab2(t[0], t[1])))),
    );
    led.record(
        "metric: first derivatives at t = 0 are the trilinear pairing",
        tuples(h, 3).into_iter().find_map(|t| {
            disagreement(&g[t[1]][t[2]].deriv(t[0], v).at_zero(), pd.triple_at(t[0], t[1], t[2]), v).map(|w| format!("{} {w}", lab3(t[0], t[1], t[2])))
        }),
    );
    led.record(
        "metric: graded symmetric",
        tuples(h, 2).into_iter().find_map(|t| {
            disagreement(&g[t[0]][t[1]], &g[t[1]][t[0]].scale(&sgn(gh[t[0]] * gh[t[1]])), v).map(|w| format!("{} {w}", lab2(t[0], t[1])))
        }),
    );
    led.record(
        "metric: independent of the unit direction",
        tuples(h, 2).into_iter().find_map(|t| {
            let d = g[t[0]][t[1]].deriv(0, v);
            (!d.is_zero()).then(|| format!("{} {}", lab2(t[0], t[1]), d.describe(v, 3)))
        }),
    );
    led.record(
        "metric: compatibility with A up to hbar",
        tuples(h, 3).into_iter().find_map(|t| {
            let (a, b, c) = (t[0], t[1], t[2]);
            let s = sgn(gh[a] * gh[b]);
            let lhs = g[b][c].deriv(a, v).sub(&g[a][c].deriv(b, v).scale(&s)).hbar_shift(1);
            let mut rhs = Series::zero(1);
            for r in 0..h {
                rhs = rhs.add(&sm(&st.a.at2(b, c).component(r), &g[a][r])).sub(&sm(&st.a.at2(a, c).component(r), &g[b][r]).scale(&s));
            }
            disagreement(&lhs, &rhs, v).map(|w| format!("{} {w}", lab3(a, b, c)))
        }),
    );
    led.record(
        "metric: unit column is closed",
        tuples(h, 2).into_iter().find_map(|t| {
            let (a, b) = (t[0], t[1]);
            let d = g[b][0].deriv(a, v).sub(&g[a][0].deriv(b, v).scale(&sgn(gh[a] * gh[b])));
            (!d.is_zero()).then(|| format!("{} {}", lab2(a, b), d.describe(v, 3)))
        }),
    );
    MetricData { g, ledger: led }
}

/// The semi-classical endgame: flat metric, lowered `A`, potential `Φ`, WDVV residual.
#[derive(Clone, Debug)]
pub struct WdvvData {
    /// `A_{αβγ} = A_{βγ}^ρ g_{αρ}` at index `(α·h + β)·h + γ`.
    pub a_lower: Vec<Series>,
    pub potential: Series,
    /// `None` when `g` is degenerate and the residual was not evaluated.
    pub metric_inverse: Option<Matrix>,
    pub ledger: Ledger,
    pub notes: Vec<String>,
}

/// First `ℏ`-dependent coefficient of `Θ`, if any.
pub fn hbar_dependence(st: &SolverState) -> Option<String> {
    st.theta.terms().find(|t| t.1 != 0).map(|(w, k, i, c)| format!("Theta has {} at {} hbar^{k} component {i}", format_scalar(c), st.vars.word_label(w)))
}

pub fn wdvv(spec: &AlgebraSpec, st: &SolverState, iv: &IntegralValidation, integral: &Functional, md: &MetricData, obs: Option<&Observables>) -> Result<WdvvData> {
    if let Some(w) = hbar_dependence(st) {
        return Err(Error::NotSemiClassical(w));
    }
    if !iv.semi_classical {
        return Err(Error::NotSemiClassical("the integral has hbar corrections or a non-skew-adjoint K component".into()));
    }
    let v = &st.vars;
    let h = st.a.h;
    let n = st.order as i32;
    let gh: Vec<i64> = (0..h).map(|a| -(v.word_ghost(crate::series::var(a)) as i64)).collect();
    let lab3 = |a: usize, b: usize, c: usize| format!("({},{},{})", st.labels[a], st.labels[b], st.labels[c]);
    let sm = |a: &Series, b: &Series| Series::smul_scalar(a, b, v, EXACT);
    let g = &md.g;
    let mut led = Ledger::new();
    let mut notes = Vec::new();

    led.record(
        "semi-classical: descendant equation at every hbar order",
        (0..=spec.k_degree()).find_map(|l| {
            let kt = st.theta.apply_linear(&[(0, &spec.k[l])], true, v);
            let br = spec.bracket(&st.theta, &st.theta, v, n).ok()?.hbar_part(l as i32).hbar_shift(-(l as i32));
            let r = kt.add(&br.scale(&frac(1, 2))).mod_t(n + 1);
            (!r.is_zero()).then(|| format!("hbar^{l}: {}", r.describe(v, 3)))
        }),
    );
    led.record(
        "semi-classical: metric independent of hbar",
        tuples(h, 2).into_iter().find_map(|t| g[t[0]][t[1]].terms().find(|x| x.1 != 0).map(|_| format!("({},{})", st.labels[t[0]], st.labels[t[1]]))),
    );
    led.record(
        "semi-classical: metric is flat",
        tuples(h, 3).into_iter().find_map(|t| {
            let d = g[t[1]][t[2]].deriv(t[0], v);
            (!d.is_zero()).then(|| format!("{} {}", lab3(t[0], t[1], t[2]), d.describe(v, 3)))
        }),
    );
    let dtheta: Vec<Series> = (0..h).map(|a| st.theta.deriv(a, v)).collect();
    led.record(
        "semi-classical: second derivatives of Theta pair to zero with first derivatives",
        tuples(h, 3).into_iter().find_map(|t| {
            let second = dtheta[t[1]].deriv(t[0], v);
            let x = integral.apply(&spec.mul(&second, &dtheta[t[2]], v, n - 2), v);
            (!x.is_zero()).then(|| format!("{} {}", lab3(t[0], t[1], t[2]), x.describe(v, 3)))
        }),
    );
    led.record(
        "semi-classical: metric compatible with A",
        tuples(h, 3).into_iter().find_map(|t| {
            let (a, b, c) = (t[0], t[1], t[2]);
            let mut lhs = Series::zero(1);
            let mut rhs = Series::zero(1);
            for r in 0..h {
                lhs = lhs.add(&sm(&st.a.at2(a, b).component(r), &g[r][c]));
                rhs = rhs.add(&sm(&st.a.at2(b, c).component(r), &g[a][r]));
            }
            disagreement(&lhs, &rhs, v).map(|w| format!("{} {w}", lab3(a, b, c)))
        }),
    );

    let mut a_lower = Vec::with_capacity(h * h * h);
    for a in 0..h {
        for b in 0..h {
            for c in 0..h {
                let mut s = Series::zero(1);
                for r in 0..h {
                    s = s.add(&sm(&st.a.at2(b, c).component(r), &g[a][r]));
                }
                a_lower.push(s);
            }
        }
    }
    let al = |a: usize, b: usize, c: usize| &a_lower[(a * h + b) * h + c];
    led.record(
        "lowered A: totally graded symmetric",
        tuples(h, 3).into_iter().find_map(|t| {
            let (a, b, c) = (t[0], t[1], t[2]);
            disagreement(al(a, b, c), &al(b, a, c).scale(&sgn(gh[a] * gh[b])), v)
                .or_else(|| disagreement(al(a, b, c), &al(a, c, b).scale(&sgn(gh[b] * gh[c])), v))
                .map(|w| format!("{} {w}", lab3(a, b, c)))
        }),
    );

    // Φ from the Euler relation: a word-length-m part equals Σ t^α t^β t^γ ∂_γ ∂_β ∂_α Φ / (m(m-1)(m-2)).
    let known = al(0, 0, 0).tmax.min(n - 2);
    let mut potential = Series::zero_trunc(1, known + 3, EXACT);
    for t in tuples(h, 3) {
        let (a, b, c) = (t[0], t[1], t[2]);
        for len in 0..=known.max(-1) {
            let part = al(c, b, a).word_part(len as u32);
            if part.is_zero() {
                continue;
            }
            let m = len as i64 + 3;
            let lifted = part.mul_var(c, v).mul_var(b, v).mul_var(a, v).scale(&frac(1, m * (m - 1) * (m - 2)));
            potential = potential.add(&lifted);
        }
    }
    let potential = potential.truncated(known + 3, EXACT);
    led.record(
        "potential: third derivatives reproduce lowered A",
        tuples(h, 3).into_iter().find_map(|t| disagreement(&derivs(&potential, &t, v), al(t[0], t[1], t[2]), v).map(|w| format!("{} {w}", lab3(t[0], t[1], t[2])))),
    );
    led.record(
        "potential: unit derivatives reproduce the metric",
        tuples(h, 2).into_iter().find_map(|t| {
            disagreement(&derivs(&potential, &[0, t[0], t[1]], v), &g[t[0]][t[1]], v).map(|w| format!("({},{}) {w}", st.labels[t[0]], st.labels[t[1]]))
        }),
    );

    let g0 = Matrix::from_rows((0..h).map(|a| (0..h).map(|b| g[a][b].coeff(0, 0, 0)).collect()).collect());
    let metric_inverse = g0.inverse();
    match &metric_inverse {
        Some(ginv) => {
            let phi3: Vec<Series> = tuples(h, 3).into_iter().map(|t| derivs(&potential, &t, v)).collect();
            let p3 = |a: usize, b: usize, c: usize| &phi3[(a * h + b) * h + c];
            let mut f = None;
            'outer: for t in tuples(h, 4) {
                let (a, b, c, r) = (t[0], t[1], t[2], t[3]);
                let mut lhs = Series::zero(1);
                let mut rhs = Series::zero(1);
                for mu in 0..h {
                    for nu in 0..h {
                        let x = &ginv.data[mu][nu];
                        if x.is_zero() {
                            continue;
                        }
                        lhs = lhs.add(&sm(p3(a, b, mu), p3(nu, c, r)).scale(x));
                        rhs = rhs.add(&sm(p3(b, c, mu), p3(a, nu, r)).scale(x));
                    }
                }
                if let Some(w) = disagreement(&lhs, &rhs, v) {
                    f = Some(format!("({},{},{},{}) {w}", st.labels[a], st.labels[b], st.labels[c], st.labels[r]));
                    break 'outer;
                }
            }
            led.record("WDVV: residual vanishes", f);
        }
        None => notes.push(format!("metric has rank {} < {h}; WDVV residual with inverse metric skipped", g0.rank())),
    }

    // Expectations against the integral used as the functional.
    if let Some(o) = obs {
        let lab2 = |a: usize, b: usize| format!("({},{})", st.labels[a], st.labels[b]);
        led.record(
            "integral as cycle: two-point correlators equal the metric",
            o.correlators.iter().filter(|(t, _)| t.len() == 2).find_map(|(t, s)| {
                disagreement(&integral.apply(s, v), &g[t[0]][t[1]], v).map(|w| format!("{} {w}", lab2(t[0], t[1])))
            }),
        );
        led.record(
            "integral as cycle: three-point correlators equal lowered A",
            o.correlators.iter().filter(|(t, _)| t.len() == 3).find_map(|(t, s)| {
                disagreement(&integral.apply(s, v), al(t[0], t[1], t[2]), v).map(|w| format!("{} {w}", lab3(t[0], t[1], t[2])))
            }),
        );
        if let Some(c) = spec.cycle.as_ref().filter(|c| *c != integral) {
            let off = o.correlators.iter().filter(|(t, _)| t.len() == 2).filter(|(t, s)| disagreement(&c.apply(s, v), &g[t[0]][t[1]], v).is_some()).count();
            notes.push(format!("the cycle differs from the integral; {off} two-point correlators against the cycle differ from the metric"));
        }
    }
    Ok(WdvvData { a_lower, potential, metric_inverse, ledger: led, notes })
}

/// Everything the integral supports, run in sequence.
#[derive(Clone, Debug)]
pub struct IntegralSuite {
    pub validation: IntegralValidation,
    pub pairings: PairingData,
    pub metric: MetricData,
    /// `Err` text when the WDVV stage does not apply.
    pub wdvv: std::result::Result<WdvvData, String>,
}

impl IntegralSuite {
    pub fn ledger(&self) -> Ledger {
        let mut l = Ledger::new();
        l.extend(self.validation.ledger.clone());
        l.extend(self.pairings.ledger.clone());
        l.extend(self.metric.ledger.clone());
        if let Ok(w) = &self.wdvv {
            l.extend(w.ledger.clone());
        }
        l
    }
}

pub fn integral_suite(spec: &AlgebraSpec, td: &TransferData, st: &SolverState, obs: Option<&Observables>, seed: u64) -> Result<IntegralSuite> {
    let integral = spec.integral.as_ref().ok_or_else(|| Error::Input(format!("instance {} has no integral", spec.name)))?;
    let validation = validate_integral(spec, integral)?;
    let pd = pairings(spec, td, st, integral, seed)?;
    let md = metric(spec, st, integral, &pd);
    let w = match wdvv(spec, st, &validation, integral, &md, obs) {
        Ok(w) => Ok(w),
        Err(Error::NotSemiClassical(w)) => Err(w),
        Err(e) => return Err(e),
    };
    Ok(IntegralSuite { validation, pairings: pd, metric: md, wdvv: w })
}

/// A copy of the functional with one extra coefficient, for negative tests.
pub fn perturbed(c: &Functional, hbar_power: usize, index: usize, amount: Scalar) -> Functional {
    let mut out = c.clone();
    let d = out.maps[0].len();
    while out.maps.len() <= hbar_power {
        out.maps.push(vec![Scalar::zero(); d]);
    }
    out.maps[hbar_power][index] += amount;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::observables::compute_observables;
    use crate::solver::{qme_solve, SolveOptions};
    use crate::transfer::{build_quantization_map, compute_cohomology};

    fn suite(inst: &instances::Instance) -> (SolverState, IntegralSuite) {
        let coh = compute_cohomology(&inst.spec).unwrap();
        let td = build_quantization_map(&inst.spec, &coh, inst.hbar_max).unwrap();
        let st = qme_solve(&inst.spec, &td, SolveOptions { order: inst.t_order, seed: None }).unwrap();
        let obs = compute_observables(&inst.spec, &td, &st, 3).unwrap();
        let s = integral_suite(&inst.spec, &td, &st, Some(&obs), 3).unwrap();
        (st, s)
    }

    #[test]
    fn frobenius_suite_passes_with_cubic_potential() {
        let inst = instances::frobenius_k0().unwrap();
        let (st, s) = suite(&inst);
        let l = s.ledger();
        assert!(l.all_pass(), "{}", l.render());
        assert!(s.validation.semi_classical);
        let anti = Matrix::from_rows(vec![vec![int(0), int(0), int(1)], vec![int(0), int(1), int(0)], vec![int(1), int(0), int(0)]]);
        assert_eq!(s.pairings.classical, anti);
        let w = s.wdvv.as_ref().unwrap();
        assert!(w.metric_inverse.is_some());
        assert!(l.get("WDVV: residual vanishes").is_some());
        // Φ = ½ (t⁰)² t² + ½ t⁰ (t¹)².
        let v = &st.vars;
        let mut want = Series::zero(1);
        want.add_term(crate::series::word_of(&[0, 0, 2]), 0, 0, frac(1, 2));
        want.add_term(crate::series::word_of(&[0, 1, 1]), 0, 0, frac(1, 2));
        assert!(disagreement(&w.potential, &want, v).is_none(), "{}", w.potential.describe(v, 10));
    }

    #[test]
    fn dgbv_suite_passes_with_degenerate_metric() {
        let inst = instances::dgbv_lg().unwrap();
        let (_, s) = suite(&inst);
        let l = s.ledger();
        assert!(l.all_pass(), "{}", l.render());
        let w = s.wdvv.as_ref().unwrap();
        assert!(w.metric_inverse.is_none());
        assert!(!w.notes.is_empty());
    }

    #[test]
    fn perturbed_integral_is_rejected() {
        let inst = instances::dgbv_lg().unwrap();
        let bad = perturbed(inst.spec.integral.as_ref().unwrap(), 0, 3, int(1));
        let iv = validate_integral(&inst.spec, &bad).unwrap();
        assert!(!iv.annihilates_k_and_brackets);
        let e = iv.ledger.get("integral axioms: annihilates the image of K").unwrap();
        assert!(e.witness.as_deref().unwrap().contains("th"), "{:?}", e.witness);
    }
}
