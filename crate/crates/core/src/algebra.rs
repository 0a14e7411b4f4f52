//! BV QFT algebra instances: product table, the differential `K = Σ ℏ^ℓ K^(ℓ)`,
//! the induced BV bracket, cycles and integrals, and exhaustive axiom validation.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::graded::{format_scalar, parity_sign, GradedBasis, Scalar};
use crate::ledger::{FirstFailure, Ledger};
use crate::linalg::Matrix;
use crate::series::{Bilinear, Series, Vars, EXACT};

/// A functional `Σ ℏ^ℓ c^(ℓ)` from the algebra to scalars of ghost number `-dimension`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functional {
    pub dimension: i32,
    /// `maps[ℓ][i] = c^(ℓ)(e_i)`.
    pub maps: Vec<Vec<Scalar>>,
}

impl Functional {
    /// Applies the functional coefficientwise: `c(t^I x) = (-1)^{N|I|} t^I c(x)`.
    pub fn apply(&self, x: &Series, vars: &Vars) -> Series {
        let mats: Vec<Matrix> = self.maps.iter().map(|row| Matrix::from_rows(vec![row.clone()])).collect();
        let maps: Vec<(i32, &Matrix)> = mats.iter().enumerate().map(|(l, m)| (l as i32, m)).collect();
        x.apply_linear(&maps, self.dimension % 2 != 0, vars)
    }

    /// Value on a constant vector as `ℏ`-coefficients.
    pub fn eval_vec(&self, x: &[Scalar]) -> Vec<Scalar> {
        self.maps.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

type Table = Vec<(i32, usize, Scalar)>;

/// A finite-dimensional BV QFT algebra with optional cycle and integral.
///
/// Immutable after construction. Bracket values are computed once per basis pair on first
/// use and cached; concurrent readers see at-most-once initialization per pair.
#[derive(Debug)]
pub struct AlgebraSpec {
    pub name: String,
    pub basis: GradedBasis,
    pub unit: usize,
    /// `prod[i*D + j]` lists `e_i · e_j` as `(0, k, coefficient)`.
    prod: Vec<Table>,
    /// `k[ℓ]` is `K^(ℓ)`.
    pub k: Vec<Matrix>,
    pub cycle: Option<Functional>,
    pub integral: Option<Functional>,
    brackets: Vec<OnceLock<std::result::Result<Table, String>>>,
    empty_vars: Vars,
}

impl Clone for AlgebraSpec {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            basis: self.basis.clone(),
            unit: self.unit,
            prod: self.prod.clone(),
            k: self.k.clone(),
            cycle: self.cycle.clone(),
            integral: self.integral.clone(),
            brackets: (0..self.brackets.len()).map(|_| OnceLock::new()).collect(),
            empty_vars: self.empty_vars.clone(),
        }
    }
}

impl AlgebraSpec {
    /// Builds an instance, checking shapes and ghost-number consistency of every table.
    pub fn new(
        name: impl Into<String>,
        basis: GradedBasis,
        unit: usize,
        product: &BTreeMap<(usize, usize), Vec<(usize, Scalar)>>,
        k: Vec<Matrix>,
        cycle: Option<Functional>,
        integral: Option<Functional>,
    ) -> Result<Self> {
        let d = basis.dim();
        let g = &basis.ghosts;
        if unit >= d {
            return Err(Error::Input(format!("unit index {unit} out of range")));
        }
        let mut prod = vec![Vec::new(); d * d];
        for (&(i, j), entries) in product {
            if i >= d || j >= d {
                return Err(Error::Input(format!("product entry ({i},{j}) out of range")));
            }
            for (kk, c) in entries {
                if *kk >= d {
                    return Err(Error::Input(format!("product ({i},{j}) targets index {kk} out of range")));
                }
                if c.is_zero() {
                    continue;
                }
                if g[*kk] != g[i] + g[j] {
                    return Err(Error::Input(format!(
                        "product {}*{} -> {} breaks ghost number",
                        basis.labels[i], basis.labels[j], basis.labels[*kk]
                    )));
                }
                prod[i * d + j].push((0, *kk, c.clone()));
            }
            prod[i * d + j].sort_by_key(|e| e.1);
        }
        if k.is_empty() {
            return Err(Error::Input("K needs at least the hbar^0 matrix".into()));
        }
        for (l, m) in k.iter().enumerate() {
            if m.rows != d || m.cols != d {
                return Err(Error::Dimension(format!("K^({l}) is {}x{}, expected {d}x{d}", m.rows, m.cols)));
            }
            for r in 0..d {
                for c in 0..d {
                    if !m.data[r][c].is_zero() && g[r] != g[c] + 1 {
                        return Err(Error::Input(format!(
                            "K^({l}) maps {} to {}, breaking ghost shift +1",
                            basis.labels[c], basis.labels[r]
                        )));
                    }
                }
            }
        }
        for (what, f) in [("cycle", &cycle), ("integral", &integral)] {
            if let Some(f) = f {
                if f.maps.is_empty() || f.maps.iter().any(|m| m.len() != d) {
                    return Err(Error::Dimension(format!("{what} maps must be nonempty rows of length {d}")));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            basis,
            unit,
            prod,
            k,
            cycle,
            integral,
            brackets: (0..d * d).map(|_| OnceLock::new()).collect(),
            empty_vars: Vars::new(Vec::new())?,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn ghost(&self, i: usize) -> i32 {
        self.basis.ghosts[i]
    }

    pub fn ghosts(&self) -> &[i32] {
        &self.basis.ghosts
    }

    /// Highest `ℏ`-power with a nonzero `K^(ℓ)`.
    pub fn k_degree(&self) -> usize {
        (0..self.k.len()).rev().find(|&l| !self.k[l].is_zero()).unwrap_or(0)
    }

    pub fn k_matrix(&self, l: usize) -> Matrix {
        self.k.get(l).cloned().unwrap_or_else(|| Matrix::zeros(self.dim(), self.dim()))
    }

    pub fn q(&self) -> &Matrix {
        &self.k[0]
    }

    /// Sparse product table as `(i, j) -> [(k, c)]`.
    pub fn product_entries(&self) -> BTreeMap<(usize, usize), Vec<(usize, Scalar)>> {
        let d = self.dim();
        let mut out = BTreeMap::new();
        for i in 0..d {
            for j in 0..d {
                let t = &self.prod[i * d + j];
                if !t.is_empty() {
                    out.insert((i, j), t.iter().map(|(_, k, c)| (*k, c.clone())).collect());
                }
            }
        }
        out
    }

    pub fn unit_vec(&self) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); self.dim()];
        v[self.unit] = Scalar::one();
        v
    }

    pub fn basis_vec(&self, i: usize) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); self.dim()];
        v[i] = Scalar::one();
        v
    }

    /// Product of constant vectors.
    pub fn mul_vec(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let d = self.dim();
        let mut out = vec![Scalar::zero(); d];
        for i in 0..d {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if y[j].is_zero() {
                    continue;
                }
                let s = &x[i] * &y[j];
                for (_, k, c) in &self.prod[i * d + j] {
                    out[*k] += &s * c;
                }
            }
        }
        out
    }

    fn compute_bracket(&self, i: usize, j: usize) -> std::result::Result<Table, String> {
        let ei = self.basis_vec(i);
        let ej = self.basis_vec(j);
        let eij = self.mul_vec(&ei, &ej);
        let si = Scalar::from_integer(parity_sign(self.ghost(i) as i64).into());
        let mut out = Vec::new();
        for (l, kl) in self.k.iter().enumerate() {
            let a = kl.apply(&eij);
            let b = self.mul_vec(&kl.apply(&ei), &ej);
            let c = self.mul_vec(&ei, &kl.apply(&ej));
            let defect: Vec<Scalar> = (0..self.dim()).map(|r| &a[r] - &b[r] - &si * &c[r]).collect();
            if l == 0 {
                if let Some(r) = defect.iter().position(|x| !x.is_zero()) {
                    return Err(format!(
                        "Q fails the Leibniz rule on ({}, {}): component {} = {}",
                        self.basis.labels[i],
                        self.basis.labels[j],
                        self.basis.labels[r],
                        format_scalar(&defect[r])
                    ));
                }
                continue;
            }
            for (r, x) in defect.into_iter().enumerate() {
                if !x.is_zero() {
                    out.push((l as i32 - 1, r, -&si * x));
                }
            }
        }
        Ok(out)
    }

    /// The bracket `(e_i, e_j)_ℏ` as `(ℏ-power, k, coefficient)` triples.
    pub fn bracket_pair(&self, i: usize, j: usize) -> Result<&[(i32, usize, Scalar)]> {
        let d = self.dim();
        match self.brackets[i * d + j].get_or_init(|| self.compute_bracket(i, j)) {
            Ok(t) => Ok(t.as_slice()),
            Err(w) => Err(Error::Divisibility { context: "BV bracket".into(), witness: w.clone() }),
        }
    }

    /// Computes every bracket pair, reporting the first divisibility failure.
    pub fn ensure_brackets(&self) -> Result<()> {
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                self.bracket_pair(i, j)?;
            }
        }
        Ok(())
    }

    /// Series product `a · b`, keeping words of length `<= cap`.
    pub fn mul(&self, a: &Series, b: &Series, vars: &Vars, cap: i32) -> Series {
        let d = self.dim();
        let table = |i: usize, j: usize| self.prod[i * d + j].as_slice();
        let sg = |i: usize| self.ghost(i);
        let op = Bilinear { out_dim: d, sign_ghost: &sg, table: &table };
        a.bilinear(b, &op, vars, cap)
    }

    /// The product as a [`Bilinear`] callback pair, for helpers that take one.
    pub fn with_product<R>(&self, f: impl FnOnce(&Bilinear<'_>) -> R) -> R {
        let d = self.dim();
        let table = |i: usize, j: usize| self.prod[i * d + j].as_slice();
        let sg = |i: usize| self.ghost(i);
        let op = Bilinear { out_dim: d, sign_ghost: &sg, table: &table };
        f(&op)
    }

    /// Series bracket `(a, b)_ℏ`, keeping words of length `<= cap`.
    pub fn bracket(&self, a: &Series, b: &Series, vars: &Vars, cap: i32) -> Result<Series> {
        self.ensure_brackets()?;
        let d = self.dim();
        let table = |i: usize, j: usize| self.bracket_pair(i, j).expect("brackets precomputed");
        let sg = |i: usize| self.ghost(i) + 1;
        let op = Bilinear { out_dim: d, sign_ghost: &sg, table: &table };
        Ok(a.bilinear(b, &op, vars, cap))
    }

    /// `K a` on a series.
    pub fn apply_k(&self, a: &Series, vars: &Vars) -> Series {
        let maps: Vec<(i32, &Matrix)> = self.k.iter().enumerate().map(|(l, m)| (l as i32, m)).collect();
        a.apply_linear(&maps, true, vars)
    }

    /// `Q a`, the `ℏ^0` part of `K`.
    pub fn apply_q(&self, a: &Series, vars: &Vars) -> Series {
        a.apply_linear(&[(0, &self.k[0])], true, vars)
    }

    /// `K_Θ e = K e + (Θ, e)_ℏ`.
    pub fn k_theta(&self, theta: &Series, e: &Series, vars: &Vars, cap: i32) -> Result<Series> {
        Ok(self.apply_k(e, vars).add(&self.bracket(theta, e, vars, cap)?))
    }

    /// `Q e + (Θ, e)` with the classical bracket, for classical `Θ` and `e`.
    pub fn q_theta(&self, theta: &Series, e: &Series, vars: &Vars, cap: i32) -> Result<Series> {
        Ok(self.apply_q(e, vars).add(&self.bracket(theta, e, vars, cap)?.hbar_part(0)))
    }

    pub fn basis_series(&self, i: usize) -> Series {
        Series::constant(&self.basis_vec(i))
    }

    /// Coordinates for constant series (no `t`).
    pub fn no_vars(&self) -> &Vars {
        &self.empty_vars
    }
}

fn show(spec: &AlgebraSpec, s: &Series) -> String {
    s.describe(spec.no_vars(), 4)
}

/// Exhaustive validation of every algebra, cycle and integral axiom over basis tuples.
pub fn validate_algebra(spec: &AlgebraSpec) -> Ledger {
    let mut ledger = Ledger::new();
    let d = spec.dim();
    let g = spec.ghosts().to_vec();
    let lab = |i: usize| spec.basis.labels[i].clone();
    let v = spec.no_vars();
    let e: Vec<Series> = (0..d).map(|i| spec.basis_series(i)).collect();
    let prod = |a: &Series, b: &Series| spec.mul(a, b, v, EXACT);

    let mut f = FirstFailure::default();
    for i in 0..d {
        for j in 0..d {
            let lhs = prod(&e[i], &e[j]);
            let rhs = prod(&e[j], &e[i]).scale(&Scalar::from_integer(parity_sign((g[i] * g[j]) as i64).into()));
            f.check(lhs == rhs, || format!("{}*{} = {}", lab(i), lab(j), show(spec, &lhs)));
        }
    }
    ledger.record("product graded commutative", f.0);

    let mut f = FirstFailure::default();
    for i in 0..d {
        for j in 0..d {
            let ij = prod(&e[i], &e[j]);
            for k in 0..d {
                let l = prod(&ij, &e[k]);
                let r = prod(&e[i], &prod(&e[j], &e[k]));
                f.check(l == r, || format!("({}*{})*{} != {}*({}*{})", lab(i), lab(j), lab(k), lab(i), lab(j), lab(k)));
            }
        }
    }
    ledger.record("product associative", f.0);

    let mut f = FirstFailure::default();
    let one = &e[spec.unit];
    for i in 0..d {
        f.check(prod(one, &e[i]) == e[i] && prod(&e[i], one) == e[i], || format!("1*{} != {}", lab(i), lab(i)));
    }
    ledger.record("product unit", f.0);

    let mut f = FirstFailure::default();
    for (l, m) in spec.k.iter().enumerate() {
        let k1 = m.apply(&spec.unit_vec());
        f.check(k1.iter().all(Zero::is_zero), || format!("K^({l}) 1 != 0"));
    }
    ledger.record("K annihilates the unit", f.0);

    let kdeg = spec.k.len() - 1;
    for l in 0..=2 * kdeg {
        let mut sum = Matrix::zeros(d, d);
        for a in 0..=l {
            if a <= kdeg && l - a <= kdeg {
                sum = sum.add(&spec.k[a].mul(&spec.k[l - a]));
            }
        }
        let name = match l {
            0 => "K^2 = 0 at hbar^0 (Q^2 = 0)".to_string(),
            1 => "K^2 = 0 at hbar^1 (QK1 + K1Q = 0)".to_string(),
            _ => format!("K^2 = 0 at hbar^{l}"),
        };
        let failure = (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .find(|&(r, c)| !sum.data[r][c].is_zero())
            .map(|(r, c)| format!("entry ({}, {}) = {}", lab(r), lab(c), format_scalar(&sum.data[r][c])));
        ledger.record(name, failure);
    }

    let divisible = spec.ensure_brackets();
    let brackets_ok = divisible.is_ok();
    ledger.record_result("Leibniz failure of K divisible by hbar", divisible);
    if !brackets_ok {
        return ledger;
    }
    let br = |a: &Series, b: &Series| spec.bracket(a, b, v, EXACT).expect("brackets precomputed");
    let sgn = |k: i32| Scalar::from_integer(parity_sign(k as i64).into());

    let mut f = FirstFailure::default();
    for i in 0..d {
        let z = br(one, &e[i]);
        f.check(z.is_zero(), || format!("(1, {}) = {}", lab(i), show(spec, &z)));
    }
    ledger.record("unit is central for the bracket", f.0);

    let mut f = FirstFailure::default();
    for a in 0..d {
        for b in 0..d {
            let ab = br(&e[a], &e[b]);
            for c in 0..d {
                let lhs = br(&e[a], &prod(&e[b], &e[c]));
                let rhs = prod(&ab, &e[c]).add(&prod(&e[b], &br(&e[a], &e[c])).scale(&sgn((g[a] + 1) * g[b])));
                f.check(lhs == rhs, || format!("a={}, b={}, c={}", lab(a), lab(b), lab(c)));
            }
        }
    }
    ledger.record("bracket Poisson law", f.0);

    let mut f = FirstFailure::default();
    for a in 0..d {
        for b in 0..d {
            let lhs = br(&e[a], &e[b]);
            let rhs = br(&e[b], &e[a]).scale(&-sgn((g[a] + 1) * (g[b] + 1)));
            f.check(lhs == rhs, || format!("a={}, b={}", lab(a), lab(b)));
        }
    }
    ledger.record("bracket graded antisymmetry", f.0);

    let mut f = FirstFailure::default();
    for a in 0..d {
        for b in 0..d {
            let ab = br(&e[a], &e[b]);
            for c in 0..d {
                let lhs = br(&e[a], &br(&e[b], &e[c]));
                let rhs = br(&ab, &e[c]).add(&br(&e[b], &br(&e[a], &e[c])).scale(&sgn((g[a] + 1) * (g[b] + 1))));
                f.check(lhs == rhs, || format!("a={}, b={}, c={}", lab(a), lab(b), lab(c)));
            }
        }
    }
    ledger.record("bracket Jacobi identity", f.0);

    let mut f = FirstFailure::default();
    for a in 0..d {
        for b in 0..d {
            let lhs = spec.apply_k(&br(&e[a], &e[b]), v);
            let rhs = br(&spec.apply_k(&e[a], v), &e[b]).add(&br(&e[a], &spec.apply_k(&e[b], v)).scale(&sgn(g[a] + 1)));
            f.check(lhs == rhs, || format!("a={}, b={}", lab(a), lab(b)));
        }
    }
    ledger.record("K is a derivation of the bracket", f.0);

    if let Some(c) = &spec.cycle {
        ledger.extend(validate_cycle(spec, c, "cycle"));
    }
    if let Some(c) = &spec.integral {
        ledger.extend(validate_cycle(spec, c, "integral"));
        let mut f = FirstFailure::default();
        for a in 0..d {
            for b in 0..d {
                let ka = spec.apply_k(&e[a], v);
                let kb = spec.apply_k(&e[b], v);
                let lhs = c.apply(&prod(&ka, &e[b]), v);
                let rhs = c.apply(&prod(&e[a], &kb), v).scale(&-sgn(g[a]));
                f.check(lhs == rhs, || format!("a={}, b={}: {} vs {}", lab(a), lab(b), show(spec, &lhs), show(spec, &rhs)));
            }
        }
        ledger.record("integral: K is skew-adjoint", f.0);
    }
    ledger
}

/// Ghost support and `c K = 0` for a cycle-type functional.
pub fn validate_cycle(spec: &AlgebraSpec, c: &Functional, what: &str) -> Ledger {
    let mut ledger = Ledger::new();
    let d = spec.dim();
    let mut f = FirstFailure::default();
    for (l, row) in c.maps.iter().enumerate() {
        for i in 0..d {
            f.check(row[i].is_zero() || spec.ghost(i) == c.dimension, || {
                format!("{what}^({l}) nonzero on {} of ghost {} (dimension {})", spec.basis.labels[i], spec.ghost(i), c.dimension)
            });
        }
    }
    ledger.record(format!("{what} supported in ghost number equal to its dimension"), f.0);
    let mut f = FirstFailure::default();
    let v = spec.no_vars();
    for i in 0..d {
        let val = c.apply(&spec.apply_k(&spec.basis_series(i), v), v);
        f.check(val.is_zero(), || format!("{what}(K {}) = {}", spec.basis.labels[i], show(spec, &val)));
    }
    ledger.record(format!("{what} annihilates the image of K"), f.0);
    ledger
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::int;

    fn exterior() -> AlgebraSpec {
        // Λ[θ] with θ odd (ghost -1), K = 0.
        let basis = GradedBasis::new(vec!["1".into(), "th".into()], vec![0, -1]).unwrap();
        let mut p = BTreeMap::new();
        p.insert((0, 0), vec![(0, int(1))]);
        p.insert((0, 1), vec![(1, int(1))]);
        p.insert((1, 0), vec![(1, int(1))]);
        AlgebraSpec::new("ext", basis, 0, &p, vec![Matrix::zeros(2, 2)], None, None).unwrap()
    }

    #[test]
    fn zero_k_gives_zero_bracket_and_passes() {
        let a = exterior();
        let l = validate_algebra(&a);
        assert!(l.all_pass(), "{}", l.render());
        assert!(a.bracket_pair(1, 1).unwrap().is_empty());
    }

    #[test]
    fn ghost_breaking_product_rejected() {
        let basis = GradedBasis::new(vec!["1".into(), "th".into()], vec![0, -1]).unwrap();
        let mut p = BTreeMap::new();
        p.insert((1, 1), vec![(0, int(1))]);
        assert!(AlgebraSpec::new("bad", basis, 0, &p, vec![Matrix::zeros(2, 2)], None, None).is_err());
    }
}
