//! Cohomology of the classical differential, the quantization map `f = Σ ℏ^ℓ f^(ℓ)` with its
//! anomaly `κ = Σ ℏ^ℓ κ^(ℓ)`, and the order-by-order decomposition and exactness oracles.

use num::{One, Zero};

use crate::algebra::{AlgebraSpec, Functional};
use crate::error::{Error, Result};
use crate::graded::{format_scalar, Scalar};
use crate::linalg::{axpy, is_zero_vec, kernel_image_basis, Matrix, Rref, Solve};
use crate::series::{Series, EXACT};

/// A basis of `H = Ker Q / Im Q` with chosen representatives; `e_0` is the class of the unit.
#[derive(Clone, Debug)]
pub struct Cohomology {
    pub labels: Vec<String>,
    pub ghosts: Vec<i32>,
    /// `reps[α]` is a `Q`-closed vector representing `e_α`.
    pub reps: Vec<Vec<Scalar>>,
    /// Echelon data of `[reps | Q]`, used to split closed vectors into class and exact part.
    split: Rref,
    /// Kernel basis of `Q`, each vector homogeneous, tagged with its ghost number.
    kernel: Vec<(i32, Vec<Scalar>)>,
}

impl Cohomology {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Writes a `Q`-closed vector as `Σ c^α reps[α] + Q y` with the canonical `y`.
    pub fn split(&self, v: &[Scalar]) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
        let h = self.dim();
        match self.split.solve(v)? {
            Solve::Solution(x) => Ok((x[..h].to_vec(), x[h..].to_vec())),
            Solve::Infeasible { residual } => Err(Error::Divisibility {
                context: "cohomology split of a vector that is not Q-closed".into(),
                witness: format!("residual {}", show_vec(&residual)),
            }),
        }
    }

    /// The class of a `Q`-closed vector.
    pub fn class_of(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        Ok(self.split(v)?.0)
    }

    /// Kernel vectors of `Q` with the given ghost number.
    pub fn kernel_of_ghost(&self, g: i32) -> impl Iterator<Item = &Vec<Scalar>> {
        self.kernel.iter().filter(move |(k, _)| *k == g).map(|(_, v)| v)
    }
}

pub(crate) fn show_vec(v: &[Scalar]) -> String {
    let parts: Vec<String> = v.iter().map(format_scalar).collect();
    format!("[{}]", parts.join(", "))
}

fn vec_ghost(spec: &AlgebraSpec, v: &[Scalar]) -> Option<i32> {
    v.iter().position(|x| !x.is_zero()).map(|i| spec.ghost(i))
}

/// Deterministic cohomology basis: the unit first, then kernel vectors of `Q` independent of
/// `Im Q` in the order of their leading free column.
pub fn compute_cohomology(spec: &AlgebraSpec) -> Result<Cohomology> {
    let d = spec.dim();
    let q = spec.q();
    let ki = kernel_image_basis(q);
    let unit = spec.unit_vec();
    if !is_zero_vec(&q.apply(&unit)) {
        return Err(Error::Input("the unit is not Q-closed".into()));
    }
    let kernel: Vec<(i32, Vec<Scalar>)> = ki
        .kernel
        .iter()
        .map(|v| (vec_ghost(spec, v).expect("kernel basis vectors are nonzero"), v.clone()))
        .collect();
    let mut cols: Vec<Vec<Scalar>> = (0..d).map(|j| q.column(j)).collect();
    cols.push(unit.clone());
    cols.extend(kernel.iter().map(|(_, v)| v.clone()));
    let r = Rref::new(&Matrix::from_columns(d, &cols));
    if !r.pivots.contains(&d) {
        return Err(Error::Input("the unit is Q-exact, so its class vanishes".into()));
    }
    let mut reps = Vec::new();
    let mut labels = Vec::new();
    let mut ghosts = Vec::new();
    for &p in r.pivots.iter().filter(|&&p| p >= d) {
        let v = cols[p].clone();
        let lead = if p == d {
            spec.unit
        } else {
            // The free column that generated this kernel vector.
            (0..d).rev().find(|&i| !v[i].is_zero()).expect("nonzero")
        };
        labels.push(format!("[{}]", spec.basis.labels[lead]));
        ghosts.push(spec.ghost(lead));
        reps.push(v);
    }
    let mut split_cols = reps.clone();
    split_cols.extend((0..d).map(|j| q.column(j)));
    let split = Rref::new(&Matrix::from_columns(d, &split_cols));
    Ok(Cohomology { labels, ghosts, reps, split, kernel })
}

/// The quantization map and anomaly, known through `ℏ^hbar_max` (or exactly).
#[derive(Clone, Debug)]
pub struct TransferData {
    pub cohomology: Cohomology,
    /// `f[ℓ]` is the `D × h` matrix of `f^(ℓ)`.
    pub f: Vec<Matrix>,
    /// `kappa[ℓ]` is the `h × h` matrix of `κ^(ℓ)`; `kappa[0] = 0`.
    pub kappa: Vec<Matrix>,
    pub hbar_max: usize,
    /// True when every later `f^(ℓ)` and `κ^(ℓ)` is provably zero.
    pub exact: bool,
}

/// Builds `f` and `κ` order by order from `K f = f κ`:
/// `Q f^(ℓ) = f^(0) κ^(ℓ) - r^(ℓ)` with `r^(ℓ) = Σ_{j≥1} K^(j) f^(ℓ-j) - Σ_{1≤j<ℓ} f^(ℓ-j) κ^(j)`.
pub fn build_quantization_map(spec: &AlgebraSpec, coh: &Cohomology, hbar_max: usize) -> Result<TransferData> {
    let d = spec.dim();
    let h = coh.dim();
    let f0 = Matrix::from_columns(d, &coh.reps);
    let mut f = vec![f0];
    let mut kappa = vec![Matrix::zeros(h, h)];
    let kdeg = spec.k_degree();
    let mut exact = kdeg == 0;
    for l in 1..=hbar_max {
        if exact {
            break;
        }
        let mut r = Matrix::zeros(d, h);
        for j in 1..=l.min(kdeg) {
            r = r.add(&spec.k_matrix(j).mul(&f[l - j]));
        }
        for j in 1..l {
            r = r.add(&f[l - j].mul(&kappa[j]).scale(&-Scalar::one()));
        }
        let mut fl = Vec::with_capacity(h);
        let mut kl = Vec::with_capacity(h);
        for a in 0..h {
            let col = r.column(a);
            let (c, y) = coh.split(&col).map_err(|e| match e {
                Error::Divisibility { witness, .. } => Error::Divisibility {
                    context: format!("transfer defect at hbar^{l} for {} is not Q-closed", coh.labels[a]),
                    witness,
                },
                e => e,
            })?;
            fl.push(y.into_iter().map(|x| -x).collect::<Vec<_>>());
            kl.push(c);
        }
        f.push(Matrix::from_columns(d, &fl));
        kappa.push(Matrix::from_columns(h, &kl));
        let tail_zero = l >= kdeg && (l + 1 - kdeg..=l).all(|j| f[j].is_zero());
        if tail_zero && kappa.iter().all(Matrix::is_zero) {
            exact = true;
        }
    }
    if exact {
        while f.len() > 1 && f.last().is_some_and(Matrix::is_zero) {
            f.pop();
        }
        kappa.truncate(f.len().max(1));
    }
    Ok(TransferData { cohomology: coh.clone(), f, kappa, hbar_max, exact })
}

impl TransferData {
    pub fn h(&self) -> usize {
        self.cohomology.dim()
    }

    /// First `ℏ`-power not known, or [`EXACT`].
    pub fn hprec(&self) -> i32 {
        if self.exact {
            EXACT
        } else {
            self.hbar_max as i32 + 1
        }
    }

    pub fn f_matrix(&self, l: usize) -> Option<&Matrix> {
        self.f.get(l)
    }

    pub fn kappa_matrix(&self, l: usize) -> Matrix {
        self.kappa.get(l).cloned().unwrap_or_else(|| Matrix::zeros(self.h(), self.h()))
    }

    /// `O_α = f(e_α)` as a constant series in `ℏ`.
    pub fn observable(&self, a: usize) -> Series {
        let d = self.f[0].rows;
        let mut s = Series::zero_trunc(d, EXACT, self.hprec());
        for (l, m) in self.f.iter().enumerate() {
            for i in 0..d {
                s.add_term(0, l as i32, i, m.data[i][a].clone());
            }
        }
        s
    }

    /// Indices `ℓ` with a nonzero `κ^(ℓ)`.
    pub fn anomalous_orders(&self) -> Vec<usize> {
        (0..self.kappa.len()).filter(|&l| !self.kappa[l].is_zero()).collect()
    }

    /// Exact check of `K f = f κ` through the known order; returns the first failing order.
    pub fn check_intertwining(&self, spec: &AlgebraSpec) -> Option<String> {
        let top = if self.exact { self.f.len() + spec.k_degree() } else { self.hbar_max };
        let d = spec.dim();
        let h = self.h();
        let zero_f = Matrix::zeros(d, h);
        let fm = |l: usize| self.f.get(l).unwrap_or(&zero_f).clone();
        for l in 0..=top {
            let mut lhs = Matrix::zeros(d, h);
            let mut rhs = Matrix::zeros(d, h);
            for j in 0..=l {
                lhs = lhs.add(&spec.k_matrix(j).mul(&fm(l - j)));
                rhs = rhs.add(&fm(l - j).mul(&self.kappa_matrix(j)));
            }
            if lhs != rhs {
                return Some(format!("K f and f kappa differ at hbar^{l}"));
            }
        }
        None
    }
}

/// Anomaly report: `κ = 0` or the list of invisibles `y` with `κ y ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnomalyReport {
    pub anomaly_free: bool,
    /// `(ℏ-order, H-label, κ^(ℓ) column)` for every basis vector moved by `κ`.
    pub invisibles: Vec<(usize, String, Vec<Scalar>)>,
}

pub fn check_anomaly_free(td: &TransferData) -> AnomalyReport {
    let mut invisibles = Vec::new();
    for (l, k) in td.kappa.iter().enumerate() {
        for a in 0..td.h() {
            let col = k.column(a);
            if !is_zero_vec(&col) {
                invisibles.push((l, td.cohomology.labels[a].clone(), col));
            }
        }
    }
    AnomalyReport { anomaly_free: invisibles.is_empty(), invisibles }
}

impl AnomalyReport {
    pub fn describe(&self) -> String {
        let parts: Vec<String> =
            self.invisibles.iter().map(|(l, a, c)| format!("kappa^({l}) {a} = {}", show_vec(c))).collect();
        parts.join("; ")
    }

    pub fn into_error(self) -> Error {
        Error::Anomaly(self.describe())
    }
}

/// Order-by-order vectors `v_0, v_1, …` standing for `Σ ℏ^ℓ v_ℓ`.
pub type HbarVec = Vec<Vec<Scalar>>;

fn mat_at(ms: &[Matrix], l: usize) -> Option<&Matrix> {
    ms.get(l)
}

/// `Σ_ℓ ℏ^ℓ (K λ)_ℓ` truncated to the length of `lam`.
pub fn apply_k_hbar(spec: &AlgebraSpec, lam: &HbarVec) -> HbarVec {
    let d = spec.dim();
    (0..lam.len())
        .map(|l| {
            let mut acc = vec![Scalar::zero(); d];
            for j in 0..=l {
                if let Some(k) = mat_at(&spec.k, j) {
                    axpy(&mut acc, &Scalar::one(), &k.apply(&lam[l - j]));
                }
            }
            acc
        })
        .collect()
}

/// `f(x)` for `x = Σ ℏ^ℓ x_ℓ`, truncated to the length of `x`.
pub fn apply_f_hbar(td: &TransferData, x: &HbarVec) -> HbarVec {
    let d = td.f[0].rows;
    (0..x.len())
        .map(|l| {
            let mut acc = vec![Scalar::zero(); d];
            for j in 0..=l {
                if let Some(f) = mat_at(&td.f, j) {
                    axpy(&mut acc, &Scalar::one(), &f.apply(&x[l - j]));
                }
            }
            acc
        })
        .collect()
}

/// `κ(x)` truncated to the length of `x`.
pub fn apply_kappa_hbar(td: &TransferData, x: &HbarVec) -> HbarVec {
    let h = td.h();
    (0..x.len())
        .map(|l| {
            let mut acc = vec![Scalar::zero(); h];
            for j in 1..=l {
                axpy(&mut acc, &Scalar::one(), &td.kappa_matrix(j).apply(&x[l - j]));
            }
            acc
        })
        .collect()
}

fn known_orders(td: &TransferData, len: usize) -> Result<()> {
    if !td.exact && len > td.hbar_max + 1 {
        return Err(Error::Dimension(format!(
            "input has {len} hbar orders but the transfer is known through hbar^{}",
            td.hbar_max
        )));
    }
    Ok(())
}

/// Writes a `K`-closed `η` as `f(x) + K λ` with `κ x = 0`, order by order with canonical sections.
pub fn decompose_cocycle(spec: &AlgebraSpec, td: &TransferData, eta: &HbarVec) -> Result<(HbarVec, HbarVec)> {
    known_orders(td, eta.len())?;
    if let Some(l) = apply_k_hbar(spec, eta).iter().position(|v| !is_zero_vec(v)) {
        return Err(Error::Input(format!("decompose_cocycle: K eta is nonzero at hbar^{l}")));
    }
    let mut x: HbarVec = Vec::new();
    let mut lam: HbarVec = Vec::new();
    for l in 0..eta.len() {
        let mut s = eta[l].clone();
        for j in 1..=l {
            if let Some(f) = mat_at(&td.f, j) {
                axpy(&mut s, &-Scalar::one(), &f.apply(&x[l - j]));
            }
            if let Some(k) = mat_at(&spec.k, j) {
                axpy(&mut s, &-Scalar::one(), &k.apply(&lam[l - j]));
            }
        }
        let (c, y) = td.cohomology.split(&s).map_err(|e| Error::Identity {
            name: "cocycle decomposition".into(),
            witness: format!("order {l}: {e}"),
        })?;
        x.push(c);
        lam.push(y);
    }
    if let Some(l) = apply_kappa_hbar(td, &x).iter().position(|v| !is_zero_vec(v)) {
        return Err(Error::identity("kappa x = 0 for the cocycle class", format!("fails at hbar^{l}")));
    }
    Ok((x, lam))
}

/// Given `f(x) = K λ`, finds `y, ζ` with `x = κ y` and `λ = f(y) + K ζ`.
pub fn solve_exactness(spec: &AlgebraSpec, td: &TransferData, x: &HbarVec, lam: &HbarVec) -> Result<(HbarVec, HbarVec)> {
    let n = x.len();
    if lam.len() != n {
        return Err(Error::Dimension("x and lambda carry different numbers of hbar orders".into()));
    }
    known_orders(td, n)?;
    let fx = apply_f_hbar(td, x);
    let kl = apply_k_hbar(spec, lam);
    if let Some(l) = (0..n).find(|&l| fx[l] != kl[l]) {
        return Err(Error::Input(format!("solve_exactness: f(x) and K lambda differ at hbar^{l}")));
    }
    let mut y: HbarVec = Vec::new();
    let mut zeta: HbarVec = Vec::new();
    for l in 0..n {
        let mut s = lam[l].clone();
        for j in 1..=l {
            if let Some(f) = mat_at(&td.f, j) {
                axpy(&mut s, &-Scalar::one(), &f.apply(&y[l - j]));
            }
            if let Some(k) = mat_at(&spec.k, j) {
                axpy(&mut s, &-Scalar::one(), &k.apply(&zeta[l - j]));
            }
        }
        let (c, z) = td.cohomology.split(&s).map_err(|e| Error::Identity {
            name: "exactness decomposition".into(),
            witness: format!("order {l}: {e}"),
        })?;
        y.push(c);
        zeta.push(z);
    }
    let ky = apply_kappa_hbar(td, &y);
    if let Some(l) = (0..n).find(|&l| ky[l] != x[l]) {
        return Err(Error::identity("x = kappa y", format!("fails at hbar^{l}")));
    }
    Ok((y, zeta))
}

/// Expectation `⟨f(x)⟩ = c f(x)` as `ℏ`-coefficients, with a warning when `κ x ≠ 0`.
pub fn expectation(td: &TransferData, cycle: &Functional, x: &HbarVec) -> (Vec<Scalar>, Option<String>) {
    let fx = apply_f_hbar(td, x);
    let n = fx.len();
    let mut out = vec![Scalar::zero(); n];
    for (l, slot) in out.iter_mut().enumerate() {
        for j in 0..=l {
            if let Some(row) = cycle.maps.get(j) {
                *slot += row.iter().zip(&fx[l - j]).map(|(a, b)| a * b).sum::<Scalar>();
            }
        }
    }
    let warn = apply_kappa_hbar(td, x)
        .iter()
        .position(|v| !is_zero_vec(v))
        .map(|l| format!("observable is not kappa-closed (hbar^{l}); its expectation is not homotopy invariant"));
    (out, warn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{int, GradedBasis};
    use std::collections::BTreeMap;

    fn exterior() -> AlgebraSpec {
        // Λ[θ] with Q = 0 and K = 0: H = C.
        let basis = GradedBasis::new(vec!["1".into(), "th".into()], vec![0, -1]).unwrap();
        let mut prod = BTreeMap::new();
        prod.insert((0, 0), vec![(0, int(1))]);
        prod.insert((0, 1), vec![(1, int(1))]);
        prod.insert((1, 0), vec![(1, int(1))]);
        AlgebraSpec::new("ext", basis, 0, &prod, vec![Matrix::zeros(2, 2)], None, None).unwrap()
    }

    #[test]
    fn zero_k_gives_identity_transfer() {
        let spec = exterior();
        let coh = compute_cohomology(&spec).unwrap();
        assert_eq!(coh.dim(), 2);
        assert_eq!(coh.labels[0], "[1]");
        let td = build_quantization_map(&spec, &coh, 3).unwrap();
        assert!(td.exact);
        assert_eq!(td.f.len(), 1);
        assert!(check_anomaly_free(&td).anomaly_free);
        assert!(td.check_intertwining(&spec).is_none());
    }

    #[test]
    fn trivial_decompositions() {
        let spec = exterior();
        let coh = compute_cohomology(&spec).unwrap();
        let td = build_quantization_map(&spec, &coh, 2).unwrap();
        let x = vec![vec![int(2), int(-1)], vec![int(0), int(3)]];
        let eta = apply_f_hbar(&td, &x);
        let (x2, lam) = decompose_cocycle(&spec, &td, &eta).unwrap();
        assert_eq!(x2, x);
        assert!(lam.iter().all(|v| is_zero_vec(v)));
        let zero: HbarVec = vec![vec![int(0); 2]; 2];
        let zh: HbarVec = vec![vec![int(0); 2]; 2];
        let (y, z) = solve_exactness(&spec, &td, &zh, &zero).unwrap();
        assert!(y.iter().chain(&z).all(|v| is_zero_vec(v)));
    }
}
