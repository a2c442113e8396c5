//! Seeded randomized property suite: orderings of the Ritz family,
//! inclusion counts for every Lehmann variant, inertia relations, the
//! left/right comparison, bordered-form equivalence, Goerisch validity,
//! the Bauer–Fike estimate and Temple's special case.

use std::fmt;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::kahan::{
    block_lanczos_step, conjugate_gradient, exact_w, goerisch_left, goerisch_w, kahan_left, kahan_right,
    kahan_right_spectrum, multiplicity_near,
};
use crate::lanczos::{bauer_fike_check, default_kappa};
use crate::lehmann::{
    coupled_inertia, inclusion_intervals, le_slack, left_lehmann, left_right_compare, limit_consistency,
    max_relative_deviation, right_lehmann, temple, ShiftedBounds,
};
use crate::oracle::{random_instance, random_vector, Instance, InstanceShape};
use crate::pencil::{inertia, j_matrices, schwarz_matrices, solve_definite_gep, symmetric_eigenvalues};

/// Relative slack for order and inclusion checks.
pub const CHECK_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub instances: usize,
    pub min_n: usize,
    pub max_n: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            instances: 200,
            min_n: 4,
            max_n: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Verdict {
    Pass,
    Fail,
    Unmet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    /// Instances where the property's hypothesis did not hold.
    pub unmet: usize,
    /// Description of the first failing instance.
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub properties: Vec<PropertyOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.failed == 0)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(
            f,
            "seed {} instances {} n in [{}, {}]",
            c.seed, c.instances, c.min_n, c.max_n
        )?;
        for p in &self.properties {
            let status = if p.failed == 0 { "PASS" } else { "FAIL" };
            write!(
                f,
                "{status} {:<22} passed {:>4} failed {:>4}",
                p.name, p.passed, p.failed
            )?;
            if p.unmet > 0 {
                write!(f, " hypothesis unmet {:>4}", p.unmet)?;
            }
            writeln!(f)?;
            if let Some(ce) = &p.counterexample {
                writeln!(f, "    counterexample: {ce}")?;
            }
        }
        Ok(())
    }
}

type Check = fn(&Instance, &mut ChaCha8Rng) -> Result<(Verdict, String)>;

const PROPERTIES: [(&str, Check); 11] = [
    ("ritz_ordering", check_ritz_ordering),
    ("inclusion", check_inclusion),
    ("inertia_equality", check_inertia_equality),
    ("left_right_comparison", check_comparison),
    ("coupled_inertia_bound", check_coupled_inertia),
    ("kahan_equivalence", check_kahan_equivalence),
    ("definiteness", check_definiteness),
    ("goerisch_validity", check_goerisch),
    ("bauer_fike", check_bauer_fike),
    ("temple", check_temple),
    ("limits", check_limits),
];

fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn describe(inst: &Instance, index: usize, detail: &str) -> String {
    format!(
        "instance {index}: n = {}, m = {}, rho = {:.17e}, r = {}, spectrum = {:?}; {detail}",
        inst.pencil.dim(),
        inst.basis.dim(),
        inst.rho,
        inst.r,
        inst.spectrum
    )
}

/// Runs every property on `instances` seeded random pencils. Each instance
/// draws from its own stream, so the report does not depend on evaluation order.
pub fn run_verification(config: &VerifyConfig) -> VerifyReport {
    let mut properties: Vec<PropertyOutcome> = PROPERTIES
        .iter()
        .map(|(name, _)| PropertyOutcome {
            name,
            passed: 0,
            failed: 0,
            unmet: 0,
            counterexample: None,
        })
        .collect();
    let shape = InstanceShape {
        min_n: config.min_n,
        max_n: config.max_n,
        standard: false,
    };
    for index in 0..config.instances {
        let mut rng = instance_rng(config.seed, index);
        // every other instance uses M = I so the bordered forms see both cases
        let shape = InstanceShape {
            standard: index % 2 == 0,
            ..shape
        };
        let inst = match random_instance(&mut rng, shape) {
            Ok(inst) => inst,
            Err(_) => continue,
        };
        for (slot, (_, check)) in properties.iter_mut().zip(PROPERTIES.iter()) {
            let (verdict, detail) = match check(&inst, &mut rng) {
                Ok(v) => v,
                Err(e) => (Verdict::Fail, format!("error: {e}")),
            };
            match verdict {
                Verdict::Pass => slot.passed += 1,
                Verdict::Unmet => slot.unmet += 1,
                Verdict::Fail => {
                    slot.failed += 1;
                    if slot.counterexample.is_none() {
                        slot.counterexample = Some(describe(&inst, index, &detail));
                    }
                }
            }
        }
    }
    VerifyReport {
        config: *config,
        properties,
    }
}

fn verdict(ok: bool, detail: impl FnOnce() -> String) -> (Verdict, String) {
    if ok {
        (Verdict::Pass, String::new())
    } else {
        (Verdict::Fail, detail())
    }
}

fn check_ritz_ordering(inst: &Instance, _: &mut ChaCha8Rng) -> Result<(Verdict, String)> {
    let s = schwarz_matrices(&inst.pencil, &inst.basis)?;
    let ritz = solve_definite_gep(&s.h1, &s.h2)?.values;
    let harmonic = solve_definite_gep(&s.h0, &s.h1)?.values;
    let dual = solve_definite_gep(&s.h2, &s.h3)?.values;
    let exact = &inst.spectrum;
    let n = exact.len();
    for k in 1..=s.dim() {
        let (d, r, h) = (
            dual.bottom(k).unwrap(),
            ritz.bottom(k).unwrap(),
            harmonic.bottom(k).unwrap(),
        );
        if !(le_slack(exact[k - 1], d) && le_slack(d, r) && le_slack(r, h)) {
            return Ok(verdict(false, || {
                format!("bottom {k}: exact {} dual {d} ritz {r} harmonic {h}", exact[k - 1])
            }));
        }
        let (d, r, h) = (dual.top(k).unwrap(), ritz.top(k).unwrap(), harmonic.top(k).unwrap());
        if !(le_slack(d, r) && le_slack(r, h) && le_slack(h, exact[n - k])) {
            return Ok(verdict(false, || {
                format!("top {k}: dual {d} ritz {r} harmonic {h} exact {}", exact[n - k])
            }));
        }
    }
    Ok(verdict(true, String::new))
}

fn first_failed_inclusion(b: &ShiftedBounds, spectrum: &[f64]) -> Option<String> {
    inclusion_intervals(b)
        .into_iter()
        .find(|st| !st.holds(spectrum, CHECK_SLACK))
        .map(|st| format!("{}: {st:?}", b.variant.name()))
}

fn check_inclusion(inst: &Instance, _: &mut ChaCha8Rng) -> Result<(Verdict, String)> {
    let s = schwarz_matrices(&inst.pencil, &inst.basis)?;
    let d = block_lanczos_step(&inst.pencil, &inst.basis)?;
    let mut all = vec![right_lehmann(&s, inst.rho)?, left_lehmann(&s, inst.rho)?];
    if d.rank() > 0 {
        let kappa = default_kappa(inst.spectrum_min_k()?);
        let rhs = inst.pencil.m() * &d.q2;
        let z = conjugate_gradient(inst.pencil.k(), &rhs, 5);
        all.push(goerisch_left(
            &d.h,
            &d.c,
            &goerisch_w(inst.pencil.k(), &rhs, &z, kappa)?,
            inst.rho,
        )?);
    }
    let failure = all.iter().find_map(|b| first_failed_inclusion(b, &inst.spectrum));
    Ok(match failure {
        Some(msg) => (Verdict::Fail, msg),
        None => (Verdict::Pass, String::new()),
    })
}

fn check_inertia_equality(inst: &Instance, _: &mut ChaCha8Rng) -> Result<(Verdict, String)> {
    let s = schwarz_matrices(&inst.pencil, &inst.basis)?;
    let neg = inertia(&j_matrices(&s, inst.rho).j1)?.negative;
    let (r, l) = (right_lehmann(&s, inst.rho)?.nu(), left_lehmann(&s, inst.rho)?.nu());
    Ok(verdict(r == neg && l == neg, || {
        format!("nu right {r}, nu left {l}, inertia(J1) negative {neg}")
    }))
}

fn check_comparison(inst: &Instance, _: &mut ChaCha8Rng) -> Result<(Verdict, String)> {
    let s = schwarz_matrices(&inst.pencil, &inst.basis)?;
    let rep = left_right_compare(&s, inst.rho, &inst.spectrum)?;
    if !rep.hypothesis_met {
        return Ok((Verdict::Unmet, String::new()));
    }
    Ok(verdict(rep.passed(), || format!("{rep:?}")))
}

fn check_coupled_inertia(inst: &Instance, _: &mut ChaCha8Rng) -> Result<(Verdict, String)> {
    let s = schwarz_matrices(&inst.pencil, &inst.basis)?;
    let neg = coupled_inertia(&s, inst.rho)?.negative;
    Ok(verdict(neg < inst.r, || {
        format!("G has {neg} negative eigenvalues, r = {}", inst.r)
    }))
}

fn check_kahan_equivalence(inst: &Instance, _: &mut ChaCha8Rng) -> Result<(Verdict, String)> {
    let s = schwarz_matrices(&inst.pencil, &inst.basis)?;
    let d = block_lanczos_step(&inst.pencil, &inst.basis)?;
    let w = exact_w(&inst.pencil, &d)?;
    let kr = kahan_right(&d.h, &d.c, inst.rho)?.all_values();
    let sr = right_lehmann(&s, inst.rho)?.all_values();
    let kl = kahan_left(&d.h, &d.c, &w, inst.rho)?.all_values();
    let sl = left_lehmann(&s, inst.rho)?.all_values();
    let (dr, dl) = (max_relative_deviation(&kr, &sr), max_relative_deviation(&kl, &sl));
    let spec = kahan_right_spectrum(&d.h, &d.c, inst.rho)?;
    let scale = spec.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mult = multiplicity_near(&spec, inst.rho, scale);
    Ok(verdict(dr <= 1e-8 && dl <= 1e-8 && mult == d.rank(), || {
        format!(
            "right deviation {dr:e}, left deviation {dl:e}, rho multiplicity {mult} vs k = {}",
            d.rank()
        )
    }))
}

fn check_definiteness(inst: &Instance, _: &mut ChaCha8Rng) -> Result<(Verdict, String)> {
    let d = block_lanczos_step(&inst.pencil, &inst.basis)?;
    let ritz = symmetric_eigenvalues(&d.h)?;
    if d.rank() == 0 || ritz.iter().filter(|&&v| v < inst.rho).count() + 1 < inst.r {
        return Ok((Verdict::Unmet, String::new()));
    }
    let b = kahan_left(&d.h, &d.c, &exact_w(&inst.pencil, &d)?, inst.rho)?;
    Ok(verdict(b.definite, || "bordered left pencil not definite".into()))
}

fn check_goerisch(inst: &Instance, _: &mut ChaCha8Rng) -> Result<(Verdict, String)> {
    let d = block_lanczos_step(&inst.pencil, &inst.basis)?;
    if d.rank() == 0 {
        return Ok((Verdict::Unmet, String::new()));
    }
    let kappa = default_kappa(inst.spectrum_min_k()?);
    let rhs = inst.pencil.m() * &d.q2;
    let z = conjugate_gradient(inst.pencil.k(), &rhs, 5);
    let relaxed = goerisch_left(&d.h, &d.c, &goerisch_w(inst.pencil.k(), &rhs, &z, kappa)?, inst.rho)?;
    let exact = kahan_left(&d.h, &d.c, &exact_w(&inst.pencil, &d)?, inst.rho)?;
    if let Some(msg) = first_failed_inclusion(&relaxed, &inst.spectrum) {
        return Ok((Verdict::Fail, msg));
    }
    for k in 1..=relaxed.nu() {
        if let (Some(a), Some(b)) = (relaxed.lower_bound(k), exact.lower_bound(k)) {
            if !le_slack(a, b) {
                return Ok((Verdict::Fail, format!("lower {k}: relaxed {a} tighter than exact {b}")));
            }
        }
    }
    for l in 1..=relaxed.pi() {
        if let (Some(a), Some(b)) = (relaxed.upper_bound(l), exact.upper_bound(l)) {
            if !le_slack(b, a) {
                return Ok((Verdict::Fail, format!("upper {l}: relaxed {a} tighter than exact {b}")));
            }
        }
    }
    Ok((Verdict::Pass, String::new()))
}

fn check_bauer_fike(inst: &Instance, _: &mut ChaCha8Rng) -> Result<(Verdict, String)> {
    let d = block_lanczos_step(&inst.pencil, &inst.basis)?;
    let w = exact_w(&inst.pencil, &d)?;
    let b = kahan_left(&d.h, &d.c, &w, inst.rho)?;
    let rep = bauer_fike_check(&d.h, &d.c, &w.w_hat, b.rho, &b)?;
    Ok(verdict(rep.holds(), || format!("{rep:?}")))
}

fn check_temple(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<(Verdict, String)> {
    let p = random_vector(rng, inst.pencil.dim());
    let pm = DMatrix::from_column_slice(p.len(), 1, p.as_slice());
    let basis = crate::pencil::SubspaceBasis::new(pm)?;
    let s = schwarz_matrices(&inst.pencil, &basis)?;
    // a shift just above the Rayleigh quotient satisfies the sign condition
    let rho = s.h1[(0, 0)] / s.h2[(0, 0)] + 0.25;
    let t = temple(&inst.pencil, &p, rho)?;
    let b = right_lehmann(&s, rho)?.lower_bound(1);
    Ok(verdict(
        b.is_some_and(|b| (t - b).abs() <= 1e-12 * (1.0 + t.abs())),
        || format!("temple {t}, lehmann {b:?}"),
    ))
}

fn check_limits(inst: &Instance, _: &mut ChaCha8Rng) -> Result<(Verdict, String)> {
    let s = schwarz_matrices(&inst.pencil, &inst.basis)?;
    let rep = limit_consistency(&s, inst.pencil.k_norm())?;
    let ok = rep.right_at_zero <= 1e-10
        && rep.left_at_zero <= 1e-10
        && rep.right_at_infinity <= 1e-5
        && rep.left_at_infinity <= 1e-5;
    Ok(verdict(ok, || format!("{rep:?}")))
}

impl Instance {
    fn spectrum_min_k(&self) -> Result<f64> {
        self.pencil.k_min_eigenvalue()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let cfg = VerifyConfig {
            instances: 30,
            ..VerifyConfig::default()
        };
        let a = run_verification(&cfg);
        assert!(a.all_passed(), "{a}");
        assert_eq!(a, run_verification(&cfg));
        assert!(a
            .properties
            .iter()
            .any(|p| p.name == "left_right_comparison" && p.unmet > 0));
    }
}
