//! Acceptance run: one PASS/FAIL line per criterion, exact arithmetic throughout.
//!
//! Each criterion combines the engine's own identity ledgers with checks recomputed here
//! from public data. Runs without the libtest harness so the lines always print.

use std::time::Instant;

use bvqft::algebra::{validate_algebra, validate_cycle, Functional};
use bvqft::graded::{int, sign_scalar, Scalar};
use bvqft::instances::{self, Instance, BUILTIN_NAMES};
use bvqft::integral::{integral_suite, perturbed, validate_integral};
use bvqft::ledger::Ledger;
use bvqft::linalg::{Matrix, Rref};
use bvqft::observables::{compute_observables, derivs, disagreement, expectation_functional, mat_mul, sorted_tuples, Observables};
use bvqft::series::{exp_neg_over_hbar, var, word_of, Series};
use bvqft::solver::{qme_solve, verify_tensor_package, verify_theta, SolveOptions, SolverState};
use bvqft::transfer::{
    apply_f_hbar, apply_k_hbar, build_quantization_map, check_anomaly_free, compute_cohomology, decompose_cocycle, HbarVec, TransferData,
};
use bvqft::Error;
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one criterion: `Ok(summary)` or `Err(first failure)`.
type Outcome = Result<String, String>;

/// A criterion returns its outcome and whether a failure counts against the run.
type Criterion = Box<dyn Fn() -> (Outcome, bool)>;

/// Every built-in instance plus the variant whose solution depends on `ℏ`.
fn all_instances() -> Vec<Instance> {
    let mut out: Vec<Instance> = BUILTIN_NAMES.iter().map(|n| instances::builtin(n).unwrap()).collect();
    out.push(instances::dgbv_quantum().unwrap());
    out
}

fn anomaly_free_instances() -> Vec<Instance> {
    all_instances().into_iter().filter(|i| i.spec.name != "anomalous-demo").collect()
}

fn transfer(inst: &Instance, hbar_max: usize) -> TransferData {
    let coh = compute_cohomology(&inst.spec).unwrap();
    build_quantization_map(&inst.spec, &coh, hbar_max).unwrap()
}

fn solve(inst: &Instance, td: &TransferData, order: usize, seed: Option<u64>) -> Result<SolverState, String> {
    qme_solve(&inst.spec, td, SolveOptions { order, seed }).map_err(|e| format!("{}: {e}", inst.spec.name))
}

fn require(ledger: &Ledger, context: &str) -> Result<usize, String> {
    match ledger.failures().next() {
        Some(e) => Err(format!("{context}: {} ({})", e.name, e.witness.as_deref().unwrap_or(""))),
        None => Ok(ledger.entries.len()),
    }
}

fn require_names(ledger: &Ledger, prefixes: &[&str], context: &str) -> Result<(), String> {
    for p in prefixes {
        if !ledger.entries.iter().any(|e| e.name.starts_with(p)) {
            return Err(format!("{context}: no identity named {p:?} was checked"));
        }
    }
    Ok(())
}

fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::new(rng.gen_range(-4i64..=4).into(), rng.gen_range(1i64..=3).into())
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Scalar> {
    (0..n).map(|_| random_scalar(rng)).collect()
}

/// Solved package with observables for the criteria that need correlators.
struct Solved {
    inst: Instance,
    td: TransferData,
    st: SolverState,
    obs: Observables,
}

fn solved(inst: Instance, order: usize) -> Result<Solved, String> {
    let td = transfer(&inst, inst.hbar_max);
    let st = solve(&inst, &td, order, None)?;
    let obs = compute_observables(&inst.spec, &td, &st, 7).map_err(|e| format!("{}: {e}", inst.spec.name))?;
    Ok(Solved { inst, td, st, obs })
}

fn axioms() -> Outcome {
    let mut checked = 0;
    for inst in all_instances() {
        let spec = &inst.spec;
        let mut led = validate_algebra(spec);
        if let Some(c) = &spec.integral {
            led.extend(validate_integral(spec, c).map_err(|e| e.to_string())?.ledger);
        }
        checked += require(&led, &spec.name)?;
        require_names(&led, &["product graded commutative", "product associative", "bracket Jacobi identity", "K is a derivation"], &spec.name)?;
    }
    Ok(format!("{checked} identities over all basis tuples on 5 instances"))
}

/// `Σ_j K^(j) f^(ℓ-j) = Σ_j f^(ℓ-j) κ^(j)` recomputed from the matrices.
fn intertwining(inst: &Instance, td: &TransferData, top: usize) -> Result<(), String> {
    let (d, h) = (inst.spec.dim(), td.h());
    let zero = Matrix::zeros(d, h);
    let f = |l: usize| td.f.get(l).cloned().unwrap_or_else(|| zero.clone());
    for l in 0..=top {
        let (mut lhs, mut rhs) = (Matrix::zeros(d, h), Matrix::zeros(d, h));
        for j in 0..=l {
            lhs = lhs.add(&inst.spec.k_matrix(j).mul(&f(l - j)));
            rhs = rhs.add(&f(l - j).mul(&td.kappa_matrix(j)));
        }
        if lhs != rhs {
            return Err(format!("{}: K f and f kappa differ at hbar^{l}", inst.spec.name));
        }
    }
    Ok(())
}

/// Kernel of `(x, λ) ↦ f(x) − K λ` on `ℏ`-orders `0..=top`; returns the `x`-parts of a basis.
fn closed_pairs(inst: &Instance, td: &TransferData, top: usize) -> Vec<Vec<Scalar>> {
    let (d, h) = (inst.spec.dim(), td.h());
    let orders = top + 1;
    let cols = orders * (h + d);
    let mut m = Matrix::zeros(orders * d, cols);
    for l in 0..orders {
        for j in 0..=l {
            if let Some(fj) = td.f.get(j) {
                for r in 0..d {
                    for a in 0..h {
                        m.data[l * d + r][(l - j) * h + a] += &fj.data[r][a];
                    }
                }
            }
            let kj = inst.spec.k_matrix(j);
            for r in 0..d {
                for c in 0..d {
                    m.data[l * d + r][orders * h + (l - j) * d + c] -= &kj.data[r][c];
                }
            }
        }
    }
    Rref::new(&m).kernel_basis().into_iter().map(|v| v[..orders * h].to_vec()).collect()
}

fn transfer_suite() -> Outcome {
    let mut round_trips = 0;
    for inst in all_instances() {
        let name = inst.spec.name.clone();
        let td = transfer(&inst, 6);
        if let Some(w) = td.check_intertwining(&inst.spec) {
            return Err(format!("{name}: {w}"));
        }
        intertwining(&inst, &td, 6)?;

        // Classes moved by some κ^(ℓ) are left out so that κ x = 0 and f(x) is K-closed.
        let h = td.h();
        let moved: Vec<bool> = (0..h).map(|a| td.kappa.iter().any(|k| k.column(a).iter().any(|x| !x.is_zero()))).collect();
        let anomaly_free = check_anomaly_free(&td).anomaly_free;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ name.len() as u64);
        for trial in 0..100 {
            let orders = 1 + trial % 5;
            let x: HbarVec = (0..orders)
                .map(|_| random_vec(&mut rng, h).into_iter().zip(&moved).map(|(c, &m)| if m { Scalar::zero() } else { c }).collect())
                .collect();
            let lam: HbarVec = (0..orders).map(|_| random_vec(&mut rng, inst.spec.dim())).collect();
            let eta: HbarVec = apply_f_hbar(&td, &x).into_iter().zip(apply_k_hbar(&inst.spec, &lam)).map(|(a, b)| a.iter().zip(&b).map(|(p, q)| p + q).collect()).collect();
            let (x2, lam2) = decompose_cocycle(&inst.spec, &td, &eta).map_err(|e| format!("{name} trial {trial}: {e}"))?;
            let back: HbarVec = apply_f_hbar(&td, &x2).into_iter().zip(apply_k_hbar(&inst.spec, &lam2)).map(|(a, b)| a.iter().zip(&b).map(|(p, q)| p + q).collect()).collect();
            if back != eta {
                return Err(format!("{name} trial {trial}: f(x) + K lambda does not reproduce the cocycle"));
            }
            if anomaly_free && x2 != x {
                return Err(format!("{name} trial {trial}: recovered class differs from the constructed one"));
            }
            round_trips += 1;
        }

        // f(x) = K λ forces x = 0 exactly when κ = 0.
        let xs = closed_pairs(&inst, &td, 3.min(td.hbar_max));
        let nonzero_x = xs.iter().any(|v| v.iter().any(|c| !c.is_zero()));
        if anomaly_free && nonzero_x {
            return Err(format!("{name}: f(x) = K lambda admits x != 0 although kappa = 0"));
        }
        if !anomaly_free && !nonzero_x {
            return Err(format!("{name}: anomalous instance shows no x != 0 with f(x) = K lambda"));
        }
    }
    Ok(format!("K f = f kappa through hbar^6; {round_trips} cocycle round trips; f(x) = K lambda forces x = 0 iff kappa = 0"))
}

fn master_equation_suite() -> Outcome {
    let mut summary = Vec::new();
    for (name, order) in [("dgbv-lg", 4), ("frobenius-k0", 6)] {
        let inst = instances::builtin(name).unwrap();
        let td = transfer(&inst, inst.hbar_max);
        let st = solve(&inst, &td, order, None)?;
        let mut led = st.ledger.clone();
        led.extend(verify_tensor_package(&st, &st.vars_ghosts()).0);
        led.extend(verify_theta(&inst.spec, &st).map_err(|e| e.to_string())?);
        let n = require(&led, name)?;
        require_names(
            &led,
            &["package: A graded symmetry", "package: A potentiality", "package: A associativity", "package: A unity", "package: A homogeneity"],
            name,
        )?;
        for k in 2..=order {
            require_names(&led, &[&format!("order {k}: ")], name)?;
        }
        let v = &st.vars;
        let e = inst.spec.with_product(|p| exp_neg_over_hbar(&st.theta, p, &inst.spec.unit_vec(), v, order as i32)).map_err(|e| e.to_string())?;
        let ke = inst.spec.apply_k(&e, v).mod_t(order as i32 + 1);
        if !ke.is_zero() {
            return Err(format!("{name}: K exp(-Theta/hbar) = {}", ke.describe(v, 3)));
        }
        summary.push(format!("{name} N={order}: {n} identities"));
    }
    Ok(summary.join("; "))
}

fn closed_forms() -> Outcome {
    let s = solved(instances::point_unital().unwrap(), 6)?;
    let v = &s.st.vars;
    let (mut t_want, mut z_want) = (Series::zero(1), Series::zero(1));
    let mut fact = Scalar::one();
    for k in 0..=6usize {
        if k > 0 {
            fact *= int(k as i64);
        }
        let c = sign_scalar(k as i64) / &fact;
        z_want.add_term(word_of(&vec![0; k]), -(k as i32), 0, c.clone());
        if k > 0 {
            t_want.add_term(word_of(&vec![0; k]), 1 - k as i32, 0, -c);
        }
    }
    let f_want = Series::scalar_monomial(var(0), 0, Scalar::one());
    let z = s.obs.generating_function.as_ref().ok_or("no generating function")?;
    let f = s.obs.free_energy.as_ref().ok_or("no free energy")?;
    for (what, got, want) in [("T^0", &s.obs.coordinates[0], &t_want), ("Z", z, &z_want), ("F", f, &f_want)] {
        let got = got.mod_t(7);
        if got.tmax < 6 {
            return Err(format!("{what} known only to word length {}", got.tmax));
        }
        if let Some(w) = disagreement(&got, want, v) {
            return Err(format!("{what}: {w}"));
        }
    }
    Ok("T^0, Z and F agree with hbar(1 - e^{-t/hbar}), e^{-t/hbar} and t through t^6".into())
}

fn correlator_suite() -> Outcome {
    let mut summary = Vec::new();
    for s in [solved(instances::dgbv_lg().unwrap(), 4)?, solved(instances::frobenius_k0().unwrap(), 5)?, solved(instances::dgbv_quantum().unwrap(), 4)?] {
        let name = &s.inst.spec.name;
        let v = &s.st.vars;
        let n = s.st.order;
        require(&s.obs.ledger, name)?;
        require_names(&s.obs.ledger, &["correlators: derivatives of exp(-Theta/hbar) match", "correlators: recursion"], name)?;

        // (−ℏ)^n ∂_S e^{−Θ/ℏ} = Π_S · e^{−Θ/ℏ}, recomputed for arities 2 to 4.
        let mut compared = 0;
        for arity in 2..=4.min(n) {
            for t in sorted_tuples(s.td.h(), arity) {
                let direct = derivs(&s.obs.exp_theta, &t, v).hbar_shift(arity as i32).scale(&sign_scalar(arity as i64));
                let pi = &s.obs.correlators[&t];
                let rhs = s.inst.spec.mul(pi, &s.obs.exp_theta, v, n as i32);
                if let Some(w) = disagreement(&direct, &rhs, v) {
                    return Err(format!("{name} {t:?}: {w}"));
                }
                compared += 1;
            }
        }

        // ⟨Π_S⟩ = P_S^γ ⟨Π_γ⟩ for every arity up to N.
        if let Some((cname, c)) = expectation_functional(&s.inst.spec) {
            let one: Vec<Series> = (0..s.td.h()).map(|g| c.apply(&s.obs.correlators[&vec![g]], v)).collect();
            for (t, pi) in &s.obs.correlators {
                let p = &s.obs.p_tensors[t];
                let mut rhs = Series::zero(1);
                for (g, o) in one.iter().enumerate() {
                    rhs = rhs.add(&Series::smul_scalar(&p.component(g), o, v, n as i32 - t.len() as i32));
                }
                let lhs = c.apply(pi, v).mod_t(n as i32 + 1 - t.len() as i32);
                if let Some(w) = disagreement(&lhs, &rhs, v) {
                    return Err(format!("{name} ({cname}) {t:?}: {w}"));
                }
            }
        }
        summary.push(format!("{name}: {compared} tuples"));
    }
    Ok(summary.join("; "))
}

fn coordinate_suite() -> Outcome {
    let mut summary = Vec::new();
    for s in [solved(instances::dgbv_lg().unwrap(), 4)?, solved(instances::frobenius_k0().unwrap(), 5)?, solved(instances::dgbv_quantum().unwrap(), 4)?] {
        let name = &s.inst.spec.name;
        let v = &s.st.vars;
        let n = require(&s.obs.ledger, name)?;
        require_names(
            &s.obs.ledger,
            &["coordinates: second-order system", "P-tensors:", "Jacobian: d(G^-1) wedge dG vanishes", "Jacobian: recovers A exactly"],
            name,
        )?;
        let h = s.td.h();
        for b in 0..h {
            for g in 0..h {
                if let Some(w) = disagreement(&s.obs.jacobian[b][g], &s.obs.coordinates[g].deriv(b, v), v) {
                    return Err(format!("{name}: jacobian entry ({b},{g}) is not d_b T^g: {w}"));
                }
            }
        }
        for (what, prod) in [("G G^-1", mat_mul(&s.obs.jacobian, &s.obs.jacobian_inverse, v)), ("G^-1 G", mat_mul(&s.obs.jacobian_inverse, &s.obs.jacobian, v))] {
            for (i, row) in prod.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    let want = if i == j { Series::one_scalar() } else { Series::zero(1) };
                    if let Some(w) = disagreement(x, &want, v) {
                        return Err(format!("{name}: {what} entry ({i},{j}): {w}"));
                    }
                }
            }
        }
        summary.push(format!("{name}: {n} identities"));
    }
    Ok(summary.join("; "))
}

/// The shipped cycle when it is unital, otherwise an `ℏ`-independent unital cycle on the
/// unit's ghost number found from the left kernel of every `K^(ℓ)`.
fn with_unital_cycle(mut inst: Instance) -> Option<Instance> {
    let spec = &inst.spec;
    if expectation_functional(spec).is_some_and(|(_, c)| c.eval_vec(&spec.unit_vec()).iter().enumerate().all(|(l, x)| *x == if l == 0 { Scalar::one() } else { Scalar::zero() })) {
        return Some(inst);
    }
    let d = spec.dim();
    let support: Vec<usize> = (0..d).filter(|&i| spec.ghost(i) == spec.ghost(spec.unit)).collect();
    let mut rows = Vec::new();
    for k in &spec.k {
        for col in 0..d {
            rows.push(support.iter().map(|&i| k.data[i][col].clone()).collect::<Vec<_>>());
        }
    }
    let unit_slot = support.iter().position(|&i| i == spec.unit)?;
    let kernel = Rref::new(&Matrix::from_rows(rows)).kernel_basis();
    let pick = kernel.into_iter().find(|c| !c[unit_slot].is_zero())?;
    let mut row = vec![Scalar::zero(); d];
    for (slot, &i) in support.iter().enumerate() {
        row[i] = &pick[slot] / &pick[unit_slot];
    }
    inst.spec.cycle = Some(Functional { dimension: -spec.ghost(spec.unit), maps: vec![row] });
    Some(inst)
}

fn free_energy_suite() -> Outcome {
    let mut summary = Vec::new();
    for inst in anomaly_free_instances() {
        let order = inst.t_order.min(5);
        let shipped = inst.spec.cycle.is_some();
        let Some(inst) = with_unital_cycle(inst) else {
            return Err("no unital cycle could be constructed".into());
        };
        let cycle = inst.spec.cycle.clone().ok_or("missing cycle")?;
        require(&validate_cycle(&inst.spec, &cycle, "cycle"), &inst.spec.name)?;
        let s = solved(inst, order)?;
        let name = &s.inst.spec.name;
        let v = &s.st.vars;
        let f = s.obs.free_energy.as_ref().ok_or_else(|| format!("{name}: free energy missing for a unital cycle"))?;
        require(&s.obs.ledger, name)?;
        require_names(&s.obs.ledger, &["free energy (cycle): exponential reproduces Z", "free energy (cycle): second-order system"], name)?;
        if f.min_hpow().is_some_and(|k| k < 0) {
            return Err(format!("{name}: negative hbar power survives in F: {}", f.describe(v, 3)));
        }
        if f.tmax < order as i32 {
            return Err(format!("{name}: F known only to word length {}", f.tmax));
        }
        for a in 0..s.td.h() {
            if let Some(w) = disagreement(&f.deriv(a, v).at_zero(), &s.obs.one_point[a].at_zero(), v) {
                return Err(format!("{name}: d_{a} F at 0 is not <O_{a}>: {w}"));
            }
        }
        let origin = if shipped { "shipped" } else { "constructed" };
        summary.push(format!("{name} ({origin} cycle): F power series in hbar to t^{order}"));
    }
    Ok(summary.join("; "))
}

fn integral_suite_criterion() -> Outcome {
    let mut summary = Vec::new();
    for name in ["frobenius-k0", "dgbv-lg", "point-unital"] {
        let inst = instances::builtin(name).unwrap();
        let order = inst.t_order.min(5);
        let s = solved(inst, order)?;
        let suite = integral_suite(&s.inst.spec, &s.td, &s.st, Some(&s.obs), 5).map_err(|e| format!("{name}: {e}"))?;
        let led = suite.ledger();
        let n = require(&led, name)?;
        require_names(
            &led,
            &["pairing: classical invariance", "trilinear pairing:", "quantum pairing:", "metric:", "semi-classical: metric is flat", "semi-classical: metric compatible"],
            name,
        )?;
        let wd = suite.wdvv.as_ref().map_err(|e| format!("{name}: {e}"))?;
        require_names(&led, &["potential: third derivatives reproduce lowered A", "integral as cycle: two-point", "integral as cycle: three-point"], name)?;
        let residual = if wd.metric_inverse.is_some() {
            require_names(&led, &["WDVV: residual vanishes"], name)?;
            "WDVV residual 0"
        } else {
            "metric degenerate, WDVV skipped"
        };
        summary.push(format!("{name}: {n} identities, {residual}"));
    }
    Ok(summary.join("; "))
}

/// `Ok` when `A` is seed-independent; `Err` carries the divergence as a finding.
fn seed_invariance() -> (Outcome, bool) {
    let mut seeds_rng = ChaCha8Rng::seed_from_u64(2026);
    let seeds: Vec<u64> = (0..5).map(|_| seeds_rng.gen()).collect();
    let mut summary = Vec::new();
    for inst in anomaly_free_instances() {
        let order = inst.t_order.min(5);
        let td = transfer(&inst, inst.hbar_max);
        let base = match solve(&inst, &td, order, None) {
            Ok(st) => st,
            Err(e) => return (Err(e), true),
        };
        let mut lambdas_moved = 0;
        for &seed in &seeds {
            let st = match solve(&inst, &td, order, Some(seed)) {
                Ok(st) => st,
                Err(e) => return (Err(e), true),
            };
            if let Err(e) = require(&st.ledger, &format!("{} seed {seed}", inst.spec.name)) {
                return (Err(e), true);
            }
            if st.a != base.a {
                return (Err(format!("finding: {} A differs under seed {seed}", inst.spec.name)), false);
            }
            lambdas_moved += usize::from(st.lambda != base.lambda);
        }
        summary.push(format!("{}: A identical, Lambda moved by {lambdas_moved}/5 seeds", inst.spec.name));
    }
    (Ok(summary.join("; ")), false)
}

fn negative_paths() -> Outcome {
    let inst = instances::anomalous_demo().unwrap();
    let td = transfer(&inst, inst.hbar_max);
    let labels = &td.cohomology.labels;
    let h = td.h();
    let col = labels.iter().position(|l| l == "[x*th]").ok_or("no class [x*th]")?;
    let mut want = Matrix::zeros(h, h);
    want.data[1][col] = int(-1);
    if td.kappa_matrix(1) != want {
        return Err(format!("kappa^(1) is {:?}", td.kappa_matrix(1).data));
    }
    match qme_solve(&inst.spec, &td, SolveOptions { order: 2, seed: None }) {
        Err(Error::Anomaly(msg)) if msg.contains("kappa^(1) [x*th] = [0, -1, 0, 0]") => {}
        other => return Err(format!("anomalous-demo: expected an anomaly error, got {other:?}")),
    }

    let inst = instances::dgbv_lg().unwrap();
    let good = inst.spec.integral.as_ref().unwrap();
    let bad = perturbed(good, 0, 3, int(1));
    let iv = validate_integral(&inst.spec, &bad).map_err(|e| e.to_string())?;
    if iv.annihilates_k_and_brackets {
        return Err("perturbed integral accepted".into());
    }
    let witness = iv.ledger.get("integral axioms: annihilates the image of K").and_then(|e| e.witness.clone()).ok_or("no witness")?;
    let named = witness.split_once("of K ").map(|(_, rest)| rest.split_whitespace().next().unwrap_or(""));
    if !named.is_some_and(|l| inst.spec.basis.index_of(l).is_some()) {
        return Err(format!("witness {witness:?} names no basis element"));
    }
    Ok(format!("anomaly kappa^(1) [x*th] = [0, -1, 0, 0]; perturbed integral rejected: {witness}"))
}

fn main() {
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 axioms", Box::new(|| (axioms(), true))),
        ("2 transfer", Box::new(|| (transfer_suite(), true))),
        ("3 quantum master equation", Box::new(|| (master_equation_suite(), true))),
        ("4 point-unital closed forms", Box::new(|| (closed_forms(), true))),
        ("5 correlators", Box::new(|| (correlator_suite(), true))),
        ("6 coordinates and Jacobian", Box::new(|| (coordinate_suite(), true))),
        ("7 free energy", Box::new(|| (free_energy_suite(), true))),
        ("8 integrals, metric and WDVV", Box::new(|| (integral_suite_criterion(), true))),
        ("9 seed invariance of A", Box::new(seed_invariance)),
        ("10 negative paths", Box::new(|| (negative_paths(), true))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let (outcome, fatal) = run();
        let secs = start.elapsed().as_secs_f64();
        let line = match &outcome {
            Ok(detail) => format!("PASS  criterion {name} [{secs:.1}s]: {detail}"),
            Err(w) if !fatal => format!("NOTE  criterion {name} [{secs:.1}s]: {w}"),
            Err(w) => {
                failed += 1;
                format!("FAIL  criterion {name} [{secs:.1}s]: {w}")
            }
        };
        println!("{line}");
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
