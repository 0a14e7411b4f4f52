//! Truncated formal series in graded coordinates `t^α` and a formal parameter `ℏ`,
//! with coefficients in a finite graded vector space (or in scalars, `dim = 1`).
//!
//! A term is `t^w ℏ^k e_i` with the coordinates written to the left of the coefficient.
//! Monomials `t^w` are packed exponent vectors (4 bits per coordinate) in canonical
//! increasing order, so a word is a `u64` and the only sign bookkeeping left is the
//! reordering of odd coordinates.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::graded::{format_scalar, Scalar};
use crate::linalg::Matrix;

/// Packed monomial: coordinate `a` has multiplicity `(w >> 4a) & 0xf`.
pub type Word = u64;

pub const MAX_VARS: usize = 16;
pub const MAX_MULT: u32 = 15;

/// Sentinel for "known to all orders".
pub const EXACT: i32 = i32::MAX / 4;

/// The coordinates `t^α` of a graded space `H`, `|t^α| = -|e_α|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vars {
    /// Ghost number of `e_α` (so `t^α` has ghost `-ghosts[α]`).
    pub ghosts: Vec<i32>,
    odd_mask: u64,
}

impl Vars {
    pub fn new(ghosts: Vec<i32>) -> Result<Self> {
        if ghosts.len() > MAX_VARS {
            return Err(Error::Dimension(format!("{} coordinates exceed the limit of {MAX_VARS}", ghosts.len())));
        }
        let odd_mask = ghosts.iter().enumerate().filter(|(_, g)| *g % 2 != 0).fold(0u64, |m, (a, _)| m | (1 << a));
        Ok(Self { ghosts, odd_mask })
    }

    pub fn n(&self) -> usize {
        self.ghosts.len()
    }

    pub fn is_odd(&self, a: usize) -> bool {
        self.odd_mask >> a & 1 == 1
    }

    /// Bitmask of odd coordinates present in `w`.
    fn odd_bits(&self, w: Word) -> u64 {
        let mut bits = 0;
        let mut m = self.odd_mask;
        while m != 0 {
            let a = m.trailing_zeros() as usize;
            if mult(w, a) > 0 {
                bits |= 1 << a;
            }
            m &= m - 1;
        }
        bits
    }

    /// Ghost number of `t^w`.
    pub fn word_ghost(&self, w: Word) -> i32 {
        (0..self.n()).map(|a| -(mult(w, a) as i32) * self.ghosts[a]).sum()
    }

    /// Parity of `t^w`.
    pub fn word_parity(&self, w: Word) -> u32 {
        self.odd_bits(w).count_ones() & 1
    }

    /// `t^u · t^v = sign · t^{u+v}`, or `None` when an odd coordinate repeats.
    pub fn mul_words(&self, u: Word, v: Word) -> Option<(Word, bool)> {
        let (ou, ov) = (self.odd_bits(u), self.odd_bits(v));
        if ou & ov != 0 {
            return None;
        }
        let mut parity = 0;
        let mut m = ou;
        while m != 0 {
            let a = m.trailing_zeros();
            parity += (ov & ((1u64 << a) - 1)).count_ones();
            m &= m - 1;
        }
        for a in 0..self.n() {
            assert!(mult(u, a) + mult(v, a) <= MAX_MULT, "coordinate multiplicity exceeds {MAX_MULT}");
        }
        Some((u + v, parity % 2 == 1))
    }

    /// Left derivative `∂_a t^w = c · t^{w - a}`; `None` when `t^a` is absent.
    pub fn deriv_word(&self, w: Word, a: usize) -> Option<(Word, Scalar)> {
        let k = mult(w, a);
        if k == 0 {
            return None;
        }
        let w2 = w - var(a);
        if self.is_odd(a) {
            let below = self.odd_bits(w) & ((1u64 << a) - 1);
            let s = if below.count_ones() % 2 == 1 { -Scalar::one() } else { Scalar::one() };
            Some((w2, s))
        } else {
            Some((w2, Scalar::from_integer(k.into())))
        }
    }

    /// All words of length exactly `k` that are not forced to vanish.
    pub fn words_of_len(&self, k: u32) -> Vec<Word> {
        let mut out = Vec::new();
        self.words_rec(0, k, 0, &mut out);
        out.sort_unstable();
        out
    }

    fn words_rec(&self, a: usize, left: u32, acc: Word, out: &mut Vec<Word>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        if a == self.n() {
            return;
        }
        let cap = if self.is_odd(a) { 1 } else { left.min(MAX_MULT) };
        for m in 0..=cap.min(left) {
            self.words_rec(a + 1, left - m, acc + (m as u64) * var(a), out);
        }
    }

    /// Renders a word as `t0*t1^2`.
    pub fn word_label(&self, w: Word) -> String {
        if w == 0 {
            return "1".into();
        }
        let mut parts = Vec::new();
        for a in 0..self.n() {
            match mult(w, a) {
                0 => {}
                1 => parts.push(format!("t{a}")),
                m => parts.push(format!("t{a}^{m}")),
            }
        }
        parts.join("*")
    }
}

/// Multiplicity of coordinate `a` in `w`.
pub fn mult(w: Word, a: usize) -> u32 {
    ((w >> (4 * a)) & 0xf) as u32
}

/// The word `t^a`.
pub fn var(a: usize) -> Word {
    1u64 << (4 * a)
}

/// Length of a word.
pub fn word_len(w: Word) -> u32 {
    (0..MAX_VARS).map(|a| mult(w, a)).sum()
}

/// Builds a word from a list of coordinates (order irrelevant; multiplicities add).
pub fn word_of(indices: &[usize]) -> Word {
    indices.iter().map(|&a| var(a)).sum()
}

/// Coordinates of a word in increasing order, repeated by multiplicity.
pub fn word_indices(w: Word) -> Vec<usize> {
    let mut out = Vec::new();
    for a in 0..MAX_VARS {
        for _ in 0..mult(w, a) {
            out.push(a);
        }
    }
    out
}

/// Bilinear operation on coefficient spaces used by [`Series::bilinear`].
///
/// For `(t^I x) ⋆ (t^J y)` the result is `(-1)^{s(x)|J|} t^I t^J (x ⋆ y)` where
/// `s` is `sign_ghost` and `x ⋆ y` is a list of `(ℏ-power, index, coefficient)`.
pub struct Bilinear<'a> {
    pub out_dim: usize,
    pub sign_ghost: &'a dyn Fn(usize) -> i32,
    pub table: &'a dyn Fn(usize, usize) -> &'a [(i32, usize, Scalar)],
}

/// Truncated series. Words longer than `tmax` and ℏ-powers `>= hprec` are unknown and never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    pub dim: usize,
    terms: BTreeMap<(Word, i32, usize), Scalar>,
    pub tmax: i32,
    pub hprec: i32,
}

impl Series {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new(), tmax: EXACT, hprec: EXACT }
    }

    pub fn zero_trunc(dim: usize, tmax: i32, hprec: i32) -> Self {
        Self { dim, terms: BTreeMap::new(), tmax, hprec }
    }

    /// The constant series `v` (no `t`, no `ℏ`).
    pub fn constant(v: &[Scalar]) -> Self {
        let mut s = Self::zero(v.len());
        for (i, c) in v.iter().enumerate() {
            s.add_term(0, 0, i, c.clone());
        }
        s
    }

    /// The constant series `Σ_k ℏ^k v_k`.
    pub fn hbar_poly(dim: usize, parts: &[(i32, Vec<Scalar>)]) -> Self {
        let mut s = Self::zero(dim);
        for (k, v) in parts {
            for (i, c) in v.iter().enumerate() {
                s.add_term(0, *k, i, c.clone());
            }
        }
        s
    }

    /// The scalar series `c · t^w ℏ^k`.
    pub fn scalar_monomial(w: Word, k: i32, c: Scalar) -> Self {
        let mut s = Self::zero(1);
        s.add_term(w, k, 0, c);
        s
    }

    pub fn one_scalar() -> Self {
        Self::constant(&[Scalar::one()])
    }

    pub fn monomial(dim: usize, w: Word, k: i32, i: usize, c: Scalar) -> Self {
        let mut s = Self::zero(dim);
        s.add_term(w, k, i, c);
        s
    }

    /// Adds `c · t^w ℏ^k e_i`, dropping it when outside the known window.
    pub fn add_term(&mut self, w: Word, k: i32, i: usize, c: Scalar) {
        debug_assert!(i < self.dim);
        if c.is_zero() || word_len(w) as i32 > self.tmax || k >= self.hprec {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((w, k, i)) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn coeff(&self, w: Word, k: i32, i: usize) -> Scalar {
        self.terms.get(&(w, k, i)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Word, i32, usize, &Scalar)> {
        self.terms.iter().map(|(&(w, k, i), c)| (w, k, i, c))
    }

    /// Number of stored nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.tmax >= EXACT && self.hprec >= EXACT
    }

    /// Lowest ℏ-power present, or `None` for the zero series.
    pub fn min_hpow(&self) -> Option<i32> {
        self.terms.keys().map(|&(_, k, _)| k).min()
    }

    pub fn max_hpow(&self) -> Option<i32> {
        self.terms.keys().map(|&(_, k, _)| k).max()
    }

    /// Lowest word length present, or `None` for the zero series.
    pub fn min_wlen(&self) -> Option<u32> {
        self.terms.keys().map(|&(w, _, _)| word_len(w)).min()
    }

    fn low_t(&self) -> i32 {
        self.min_wlen().map_or(self.tmax.saturating_add(1), |v| v as i32)
    }

    fn low_h(&self) -> i32 {
        self.min_hpow().unwrap_or(self.hprec)
    }

    fn map_terms(&self, dim: usize, tmax: i32, hprec: i32, f: impl Fn(Word, i32, usize, &Scalar) -> Option<(Word, i32, usize, Scalar)>) -> Self {
        let mut out = Self::zero_trunc(dim, tmax, hprec);
        for (w, k, i, c) in self.terms() {
            if let Some((w2, k2, i2, c2)) = f(w, k, i, c) {
                out.add_term(w2, k2, i2, c2);
            }
        }
        out
    }

    /// Restricts the known window.
    pub fn truncated(&self, tmax: i32, hprec: i32) -> Self {
        let (t, h) = (self.tmax.min(tmax), self.hprec.min(hprec));
        self.map_terms(self.dim, t, h, |w, k, i, c| Some((w, k, i, c.clone())))
    }

    /// Reduction modulo `t^m`: keeps words of length `< m`.
    pub fn mod_t(&self, m: i32) -> Self {
        self.truncated(m - 1, EXACT)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "series dimension mismatch");
        let mut out = self.truncated(other.tmax, other.hprec);
        for (w, k, i, c) in other.terms() {
            out.add_term(w, k, i, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_terms(self.dim, self.tmax, self.hprec, |w, k, i, c| Some((w, k, i, -c.clone())))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero_trunc(self.dim, self.tmax, self.hprec);
        }
        self.map_terms(self.dim, self.tmax, self.hprec, |w, k, i, c| Some((w, k, i, c * s)))
    }

    /// `self += s · other`.
    pub fn add_scaled(&mut self, s: &Scalar, other: &Self) {
        assert_eq!(self.dim, other.dim, "series dimension mismatch");
        if other.tmax < self.tmax || other.hprec < self.hprec {
            *self = self.truncated(other.tmax, other.hprec);
        }
        if s.is_zero() {
            return;
        }
        for (w, k, i, c) in other.terms() {
            self.add_term(w, k, i, s * c);
        }
    }

    /// Multiplication by `ℏ^j`.
    pub fn hbar_shift(&self, j: i32) -> Self {
        let hp = if self.hprec >= EXACT { EXACT } else { self.hprec + j };
        self.map_terms(self.dim, self.tmax, hp, |w, k, i, c| Some((w, k + j, i, c.clone())))
    }

    /// Division by `ℏ` inside power series: every term with `ℏ`-power `<= 0` must vanish.
    pub fn hbar_divide(&self, context: &str, vars: Option<&Vars>) -> Result<Self> {
        if let Some((w, k, i, c)) = self.terms().find(|&(_, k, _, _)| k <= 0) {
            let wl = vars.map_or_else(|| format!("{w:#x}"), |v| v.word_label(w));
            return Err(Error::Divisibility {
                context: context.to_string(),
                witness: format!("{} at word {wl}, hbar^{k}, basis {i}", format_scalar(c)),
            });
        }
        Ok(self.hbar_shift(-1))
    }

    /// The coefficient of `ℏ^k`, as an `ℏ`-free series.
    pub fn hbar_part(&self, k: i32) -> Self {
        self.map_terms(self.dim, self.tmax, EXACT, |w, k2, i, c| (k2 == k).then(|| (w, 0, i, c.clone())))
    }

    /// The `ℏ = 0` value; panics when negative powers are present.
    pub fn classical(&self) -> Self {
        assert!(self.min_hpow().is_none_or(|k| k >= 0), "classical limit of a series with negative hbar powers");
        self.hbar_part(0)
    }

    /// The homogeneous part of word length `k`.
    pub fn word_part(&self, k: u32) -> Self {
        self.map_terms(self.dim, EXACT, self.hprec, |w, h, i, c| (word_len(w) == k).then(|| (w, h, i, c.clone())))
    }

    /// Words of length in `lo..=hi`.
    pub fn word_range(&self, lo: u32, hi: u32) -> Self {
        self.map_terms(self.dim, self.tmax.min(hi as i32), self.hprec, |w, h, i, c| {
            let l = word_len(w);
            (l >= lo && l <= hi).then(|| (w, h, i, c.clone()))
        })
    }

    /// Value at `t = 0`.
    pub fn at_zero(&self) -> Self {
        self.word_part(0)
    }

    /// The `i`-th coefficient as a scalar series.
    pub fn component(&self, i: usize) -> Self {
        self.map_terms(1, self.tmax, self.hprec, |w, k, j, c| (i == j).then(|| (w, k, 0, c.clone())))
    }

    /// Assembles a series from scalar components.
    pub fn from_components(parts: &[Self]) -> Self {
        let tmax = parts.iter().map(|p| p.tmax).min().unwrap_or(EXACT);
        let hprec = parts.iter().map(|p| p.hprec).min().unwrap_or(EXACT);
        let mut out = Self::zero_trunc(parts.len(), tmax, hprec);
        for (i, p) in parts.iter().enumerate() {
            for (w, k, _, c) in p.terms() {
                out.add_term(w, k, i, c.clone());
            }
        }
        out
    }

    /// Left derivative `∂_a`.
    pub fn deriv(&self, a: usize, vars: &Vars) -> Self {
        let tm = if self.tmax >= EXACT { EXACT } else { self.tmax - 1 };
        self.map_terms(self.dim, tm, self.hprec, |w, k, i, c| {
            vars.deriv_word(w, a).map(|(w2, s)| (w2, k, i, s * c))
        })
    }

    /// `t^a · self`, the coordinate written on the left.
    pub fn mul_var(&self, a: usize, vars: &Vars) -> Self {
        let tm = if self.tmax >= EXACT { EXACT } else { self.tmax + 1 };
        self.map_terms(self.dim, tm, self.hprec, |w, k, i, c| {
            vars.mul_words(var(a), w).map(|(w2, neg)| (w2, k, i, if neg { -c.clone() } else { c.clone() }))
        })
    }

    /// `L(t^I x) = (-1)^{p|I|} t^I L(x)` for a linear map `L = Σ ℏ^j L_j` of parity `p`.
    pub fn apply_linear(&self, maps: &[(i32, &Matrix)], odd: bool, vars: &Vars) -> Self {
        let rows = maps.first().map_or(self.dim, |(_, m)| m.rows);
        let hp = if self.hprec >= EXACT {
            EXACT
        } else {
            self.hprec + maps.iter().map(|(j, _)| *j).min().unwrap_or(0)
        };
        let mut out = Self::zero_trunc(rows, self.tmax, hp);
        for (w, k, i, c) in self.terms() {
            let neg = odd && vars.word_parity(w) == 1;
            for (j, m) in maps {
                assert_eq!(m.cols, self.dim, "linear map shape");
                for r in 0..m.rows {
                    let e = &m.data[r][i];
                    if !e.is_zero() {
                        let v = e * c;
                        out.add_term(w, k + j, r, if neg { -v } else { v });
                    }
                }
            }
        }
        out
    }

    /// Generic bilinear product; words beyond `cap` are discarded.
    pub fn bilinear(&self, other: &Self, op: &Bilinear<'_>, vars: &Vars, cap: i32) -> Self {
        let tmax = self.tmax.saturating_add(other.low_t()).min(other.tmax.saturating_add(self.low_t())).min(EXACT).min(cap);
        let hprec = if self.hprec >= EXACT && other.hprec >= EXACT {
            EXACT
        } else {
            self.hprec.saturating_add(other.low_h()).min(other.hprec.saturating_add(self.low_h())).min(EXACT)
        };
        let mut out = Self::zero_trunc(op.out_dim, tmax, hprec);
        let mut by_len: BTreeMap<u32, Vec<(Word, i32, usize, &Scalar)>> = BTreeMap::new();
        for t in other.terms() {
            by_len.entry(word_len(t.0)).or_default().push(t);
        }
        for (u, ka, i, ca) in self.terms() {
            let lu = word_len(u) as i32;
            let sg = (op.sign_ghost)(i);
            for (&lv, list) in &by_len {
                if lu + lv as i32 > tmax {
                    break;
                }
                for &(v, kb, j, cb) in list {
                    let Some((w, neg)) = vars.mul_words(u, v) else { continue };
                    let neg = neg ^ (sg % 2 != 0 && vars.word_parity(v) == 1);
                    let base = ca * cb;
                    for (h, r, e) in (op.table)(i, j) {
                        let val = &base * e;
                        out.add_term(w, ka + kb + h, *r, if neg { -val } else { val });
                    }
                }
            }
        }
        out
    }

    /// Product of a scalar series with `self`: `(t^I s)(t^J y) = t^I t^J s y`.
    pub fn smul(s: &Self, e: &Self, vars: &Vars, cap: i32) -> Self {
        assert_eq!(s.dim, 1, "left factor must be a scalar series");
        let tables: Vec<Vec<(i32, usize, Scalar)>> = (0..e.dim).map(|j| vec![(0, j, Scalar::one())]).collect();
        let table = |_: usize, j: usize| tables[j].as_slice();
        let zero = |_: usize| 0;
        let op = Bilinear { out_dim: e.dim, sign_ghost: &zero, table: &table };
        s.bilinear(e, &op, vars, cap)
    }

    /// Product of scalar series.
    pub fn smul_scalar(a: &Self, b: &Self, vars: &Vars, cap: i32) -> Self {
        Self::smul(a, b, vars, cap)
    }

    /// Sum over `γ` of `s_γ · e_γ` for scalar series `s` and series `e`.
    pub fn contract(s: &[Self], e: &[Self], vars: &Vars, cap: i32) -> Self {
        let mut acc: Option<Self> = None;
        for (a, b) in s.iter().zip(e) {
            let p = Self::smul(a, b, vars, cap);
            acc = Some(match acc {
                None => p,
                Some(x) => x.add(&p),
            });
        }
        acc.unwrap_or_else(|| Self::zero(e.first().map_or(1, |x| x.dim)))
    }

    /// True when `self` and `other` agree on their common known window.
    pub fn agrees(&self, other: &Self) -> bool {
        self.first_difference(other).is_none()
    }

    /// First term where the two series differ on their common known window.
    pub fn first_difference(&self, other: &Self) -> Option<(Word, i32, usize, Scalar)> {
        let d = self.sub(other);
        let first = d.terms().next().map(|(w, k, i, c)| (w, k, i, c.clone()));
        first
    }

    /// Checks that the known window covers words `< m` and returns the reduction modulo `t^m`.
    pub fn require_mod_t(&self, m: i32, what: &str) -> Result<Self> {
        if self.tmax < m - 1 {
            return Err(Error::Dimension(format!("{what}: known only to word length {}, need {}", self.tmax, m - 1)));
        }
        Ok(self.mod_t(m))
    }

    /// Total ghost number if homogeneous: `ghost(t^w) + ghost(e_i)` is the same on every term.
    pub fn total_ghost(&self, vars: &Vars, coeff_ghosts: &[i32]) -> Option<Option<i32>> {
        let mut g = None;
        for (w, _, i, _) in self.terms() {
            let gi = vars.word_ghost(w) + coeff_ghosts[i];
            match g {
                None => g = Some(gi),
                Some(x) if x != gi => return None,
                _ => {}
            }
        }
        Some(g)
    }

    /// Readable rendering of the first few terms.
    pub fn describe(&self, vars: &Vars, limit: usize) -> String {
        let mut parts: Vec<String> = self
            .terms()
            .take(limit)
            .map(|(w, k, i, c)| format!("{}*{}*h^{k}*e{i}", format_scalar(c), vars.word_label(w)))
            .collect();
        if self.len() > limit {
            parts.push("...".into());
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// `Σ_{n=0}^{N} (-Θ/ℏ)^n / n!` modulo `t^{N+1}`.
pub fn exp_neg_over_hbar(theta: &Series, prod: &Bilinear<'_>, unit: &[Scalar], vars: &Vars, order: i32) -> Result<Series> {
    if theta.min_wlen() == Some(0) {
        return Err(Error::Input("exponential needs a series without constant term".into()));
    }
    if theta.min_hpow().is_some_and(|k| k < 0) {
        return Err(Error::Input("exponential needs a power series in hbar".into()));
    }
    let cap = order;
    let x = theta.hbar_shift(-1).neg();
    let mut term = Series::constant(unit).truncated(cap, EXACT);
    let mut sum = term.clone();
    for n in 1..=order {
        term = term.bilinear(&x, prod, vars, cap).scale(&Scalar::new(1.into(), n.into()));
        sum = sum.add(&term);
    }
    Ok(sum.truncated(cap, EXACT))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::int;

    fn even(n: usize) -> Vars {
        Vars::new(vec![0; n]).unwrap()
    }

    #[test]
    fn odd_coordinates_anticommute() {
        let v = Vars::new(vec![1, 1]).unwrap();
        let (w1, n1) = v.mul_words(var(0), var(1)).unwrap();
        let (w2, n2) = v.mul_words(var(1), var(0)).unwrap();
        assert_eq!(w1, w2);
        assert_ne!(n1, n2);
        assert!(v.mul_words(var(0), var(0)).is_none());
    }

    #[test]
    fn scalar_polynomial_product() {
        let v = even(1);
        let a = Series::scalar_monomial(var(0), 0, int(1)).add(&Series::scalar_monomial(2 * var(0), 0, int(1)));
        let b = Series::one_scalar().sub(&Series::scalar_monomial(var(0), 0, int(1)));
        let p = Series::smul_scalar(&a, &b, &v, 3);
        let want = Series::scalar_monomial(var(0), 0, int(1)).sub(&Series::scalar_monomial(3 * var(0), 0, int(1)));
        assert!(p.agrees(&want));
        assert_eq!(p.tmax, 3);
    }

    #[test]
    fn derivative_of_square() {
        let v = even(2);
        // ∂_0 ∂_1 (½ t^1 t^0 X) = X with X = 1.
        let s = Series::scalar_monomial(var(0) + var(1), 0, Scalar::new(1.into(), 2.into()));
        let d = s.deriv(0, &v).deriv(1, &v).scale(&int(2));
        assert_eq!(d, Series::one_scalar());
    }

    #[test]
    fn odd_derivative_sign() {
        let v = Vars::new(vec![1, 1]).unwrap();
        let s = Series::scalar_monomial(var(0) + var(1), 0, int(1));
        // ∂_1 (t^0 t^1) = -t^0, ∂_0 (t^0 t^1) = t^1.
        assert_eq!(s.deriv(1, &v), Series::scalar_monomial(var(0), 0, int(-1)));
        assert_eq!(s.deriv(0, &v), Series::scalar_monomial(var(1), 0, int(1)));
    }

    #[test]
    fn hbar_divide_round_trip_and_failure() {
        let x = Series::scalar_monomial(var(0), 0, int(3));
        assert_eq!(x.hbar_shift(1).hbar_divide("t", None).unwrap(), x);
        assert!(matches!(x.hbar_divide("t", None), Err(Error::Divisibility { .. })));
    }

    #[test]
    fn words_skip_repeated_odd() {
        let v = Vars::new(vec![0, 1]).unwrap();
        assert_eq!(v.words_of_len(2), vec![2 * var(0), var(0) + var(1)].into_iter().collect::<std::collections::BTreeSet<_>>().into_iter().collect::<Vec<_>>());
    }
}
