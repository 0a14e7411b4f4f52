//! Built-in example instances.
//!
//! `dgbv-lg` is the Landau–Ginzburg model of `W = x⁴/4` (critical locus `x³ = 0`) on the
//! truncated space `𝕜[x]/(x⁹) ⊗ Λ[θ]`, `|θ| = -1`, with `Q = x³ ∂_θ` and
//! `Δ = x⁴ ∂_x ∂_θ`. The twist by `x⁴` keeps `Δ` compatible with the truncation ideal and
//! makes `Δ` kill every cohomology representative. Depth 9 is the smallest depth where the
//! odd cohomology `x⁶θ, x⁷θ, x⁸θ` is separated from the even part `1, x, x²` and the
//! solver runs clean through `t`-order 4.

use std::collections::BTreeMap;

use num::Zero;

use crate::algebra::{AlgebraSpec, Functional};
use crate::error::{Error, Result};
use crate::graded::{int, GradedBasis, Scalar};
use crate::linalg::Matrix;

/// An instance together with its default truncation.
#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: AlgebraSpec,
    pub t_order: usize,
    pub hbar_max: usize,
}

pub const BUILTIN_NAMES: [&str; 4] = ["frobenius-k0", "point-unital", "dgbv-lg", "anomalous-demo"];

pub fn builtin(name: &str) -> Result<Instance> {
    match name {
        "frobenius-k0" => frobenius_k0(),
        "point-unital" => point_unital(),
        "dgbv-lg" => dgbv_lg(),
        "anomalous-demo" => anomalous_demo(),
        _ => Err(Error::Input(format!("unknown built-in instance {name:?}"))),
    }
}

/// `𝕜[e]/(e³)` in ghost 0 with `K = 0` and `∫` the coefficient of `e²`.
pub fn frobenius_k0() -> Result<Instance> {
    let basis = GradedBasis::new(vec!["1".into(), "e".into(), "e^2".into()], vec![0, 0, 0])?;
    let mut prod = BTreeMap::new();
    for i in 0..3 {
        for j in 0..3 {
            if i + j < 3 {
                prod.insert((i, j), vec![(i + j, int(1))]);
            }
        }
    }
    let integral = Functional { dimension: 0, maps: vec![vec![int(0), int(0), int(1)]] };
    let spec = AlgebraSpec::new("frobenius-k0", basis, 0, &prod, vec![Matrix::zeros(3, 3)], None, Some(integral))?;
    Ok(Instance { spec, t_order: 6, hbar_max: 6 })
}

/// The ground field with the unital cycle `1 ↦ 1`, which is also an integral.
pub fn point_unital() -> Result<Instance> {
    let basis = GradedBasis::new(vec!["1".into()], vec![0])?;
    let mut prod = BTreeMap::new();
    prod.insert((0, 0), vec![(0, int(1))]);
    let c = Functional { dimension: 0, maps: vec![vec![int(1)]] };
    let spec = AlgebraSpec::new("point-unital", basis, 0, &prod, vec![Matrix::zeros(1, 1)], Some(c.clone()), Some(c))?;
    Ok(Instance { spec, t_order: 6, hbar_max: 6 })
}

/// Parameters of a dGBV algebra on `𝕜[x]/(x^depth) ⊗ Λ[θ]` with `K = Q - ℏΔ`.
pub struct XThetaModel {
    pub depth: usize,
    /// `Q = x^p ∂_θ`, absent for `Q = 0`.
    pub q_power: Option<usize>,
    /// `Δ = x^q ∂_x ∂_θ`.
    pub delta_power: usize,
}

impl XThetaModel {
    fn label(k: usize, odd: bool) -> String {
        let x = match k {
            0 => String::new(),
            1 => "x".into(),
            _ => format!("x^{k}"),
        };
        match (x.is_empty(), odd) {
            (true, false) => "1".into(),
            (true, true) => "th".into(),
            (false, false) => x,
            (false, true) => format!("{x}*th"),
        }
    }

    /// Basis `x^k` at index `k`, then `x^k θ` at index `depth + k`.
    pub fn build(&self, name: &str, integral: Option<Functional>) -> Result<AlgebraSpec> {
        let n = self.depth;
        let d = 2 * n;
        let mut labels = Vec::with_capacity(d);
        let mut ghosts = Vec::with_capacity(d);
        for odd in [false, true] {
            for k in 0..n {
                labels.push(Self::label(k, odd));
                ghosts.push(if odd { -1 } else { 0 });
            }
        }
        let basis = GradedBasis::new(labels, ghosts)?;
        let mut prod = BTreeMap::new();
        for a in 0..n {
            for b in 0..n - a {
                prod.insert((a, b), vec![(a + b, int(1))]);
                prod.insert((a, n + b), vec![(n + a + b, int(1))]);
                prod.insert((n + a, b), vec![(n + a + b, int(1))]);
            }
        }
        let mut q = Matrix::zeros(d, d);
        if let Some(p) = self.q_power {
            for k in 0..n {
                if k + p < n {
                    q.data[k + p][n + k] = int(1);
                }
            }
        }
        // -Δ(x^k θ) = -k x^{k-1+q}.
        let mut k1 = Matrix::zeros(d, d);
        for k in 1..n {
            let target = k - 1 + self.delta_power;
            if target < n {
                k1.data[target][n + k] = int(-(k as i64));
            }
        }
        let k = if k1.is_zero() { vec![q] } else { vec![q, k1] };
        AlgebraSpec::new(name, basis, 0, &prod, k, None, integral)
    }
}

/// Coefficient of `x^k` on the `θ`-free part.
fn x_coefficient(depth: usize, k: usize) -> Functional {
    let mut row = vec![Scalar::zero(); 2 * depth];
    row[k] = int(1);
    Functional { dimension: 0, maps: vec![row] }
}

pub fn dgbv_lg() -> Result<Instance> {
    let m = XThetaModel { depth: 9, q_power: Some(3), delta_power: 4 };
    let spec = m.build("dgbv-lg", Some(x_coefficient(9, 2)))?;
    Ok(Instance { spec, t_order: 4, hbar_max: 4 })
}

/// `𝕜[x]/(x²) ⊗ Λ[θ]` with `Q = 0` and `Δ = x ∂_x ∂_θ`; `κ^(1)` sends `[xθ]` to `-[x]`.
pub fn anomalous_demo() -> Result<Instance> {
    let m = XThetaModel { depth: 2, q_power: None, delta_power: 1 };
    let spec = m.build("anomalous-demo", None)?;
    Ok(Instance { spec, t_order: 3, hbar_max: 2 })
}

/// Test-only variant of `dgbv-lg` with `Δ = x³ ∂_x ∂_θ`: `Δ` moves the odd representatives
/// into `Im Q` without creating an anomaly, so the quantization map and `Θ` acquire
/// `ℏ`-corrections.
pub fn dgbv_quantum() -> Result<Instance> {
    let m = XThetaModel { depth: 9, q_power: Some(3), delta_power: 3 };
    let spec = m.build("dgbv-quantum", None)?;
    Ok(Instance { spec, t_order: 4, hbar_max: 4 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::validate_algebra;
    use crate::transfer::{build_quantization_map, check_anomaly_free, compute_cohomology};

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_NAMES {
            let inst = builtin(name).unwrap();
            let ledger = validate_algebra(&inst.spec);
            assert!(ledger.all_pass(), "{name}:\n{}", ledger.render());
        }
        let ledger = validate_algebra(&dgbv_quantum().unwrap().spec);
        assert!(ledger.all_pass(), "{}", ledger.render());
    }

    #[test]
    fn dgbv_cohomology_and_transfer() {
        let inst = dgbv_lg().unwrap();
        let coh = compute_cohomology(&inst.spec).unwrap();
        assert_eq!(coh.labels, ["[1]", "[x]", "[x^2]", "[x^6*th]", "[x^7*th]", "[x^8*th]"]);
        let td = build_quantization_map(&inst.spec, &coh, 4).unwrap();
        assert!(td.exact);
        assert_eq!(td.f.len(), 1);

        let quantum = dgbv_quantum().unwrap();
        let coh = compute_cohomology(&quantum.spec).unwrap();
        let td = build_quantization_map(&quantum.spec, &coh, 8).unwrap();
        assert!(td.exact);
        assert_eq!(td.f.len(), 7);
        assert!(check_anomaly_free(&td).anomaly_free);
        assert!(td.check_intertwining(&quantum.spec).is_none());
    }

    #[test]
    fn anomalous_kappa() {
        let inst = anomalous_demo().unwrap();
        let coh = compute_cohomology(&inst.spec).unwrap();
        assert_eq!(coh.labels, ["[1]", "[x]", "[th]", "[x*th]"]);
        let td = build_quantization_map(&inst.spec, &coh, 2).unwrap();
        let report = check_anomaly_free(&td);
        assert!(!report.anomaly_free);
        assert_eq!(report.invisibles.len(), 1);
        let (l, label, col) = &report.invisibles[0];
        assert_eq!((*l, label.as_str()), (1, "[x*th]"));
        assert_eq!(col, &vec![int(0), int(-1), int(0), int(0)]);
    }
}
