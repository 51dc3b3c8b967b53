//! Theorem checks: reflection positivity, topological order, ground-state
//! positivity, vortex classification and conservation.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{commutator, exact_real, Exact, MajoranaIndex, Polynomial};
use crate::error::{Error, Result};
use crate::fock::{LinearOperator, PauliSum};
use crate::lattice::{IslandLattice, Octagon, ReflectionData};
use crate::model::{build_hamiltonian, vortex_operator};
use crate::spectral::{dense_spectrum, rp_functional, GibbsState, GroundSpace};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityFilter {
    Even,
    Odd,
    Both,
}

impl ParityFilter {
    fn admits(self, degree: usize) -> bool {
        match self {
            ParityFilter::Even => degree.is_multiple_of(2),
            ParityFilter::Odd => degree % 2 == 1,
            ParityFilter::Both => true,
        }
    }
}

/// Which elements `A` of the left algebra are tested.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RPSampleSpec {
    /// Every monomial of degree `<= max_degree` on `Λ₋`, coefficient 1.
    pub exhaustive: bool,
    pub max_degree: usize,
    /// Number of random polynomials with unit-disk coefficients.
    pub random_count: usize,
    pub seed: u64,
    pub parity: ParityFilter,
}

impl Default for RPSampleSpec {
    fn default() -> Self {
        RPSampleSpec {
            exhaustive: true,
            max_degree: 4,
            random_count: 100,
            seed: 0,
            parity: ParityFilter::Even,
        }
    }
}

fn combinations(items: &[MajoranaIndex], k: usize, out: &mut Vec<Vec<MajoranaIndex>>) {
    fn go(items: &[MajoranaIndex], k: usize, prefix: &mut Vec<MajoranaIndex>, out: &mut Vec<Vec<MajoranaIndex>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        let need = k - prefix.len();
        for i in 0..items.len() {
            if items.len() - i < need {
                break;
            }
            prefix.push(items[i]);
            go(&items[i + 1..], k, prefix, out);
            prefix.pop();
        }
    }
    go(items, k, &mut Vec::with_capacity(k), out);
}

fn unit_disk<R: Rng>(rng: &mut R) -> Complex64 {
    let r = rng.random::<f64>().sqrt();
    Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
}

impl RPSampleSpec {
    /// The sampled operators; the identity is always first.
    pub fn samples(&self, left: &[MajoranaIndex]) -> Vec<Polynomial> {
        let mut out = vec![Polynomial::identity()];
        let top = self.max_degree.min(left.len());
        let degrees: Vec<usize> = (0..=top).filter(|&d| self.parity.admits(d)).collect();
        if self.exhaustive {
            for &d in degrees.iter().filter(|&&d| d > 0) {
                let mut supports = Vec::new();
                combinations(left, d, &mut supports);
                out.extend(
                    supports
                        .iter()
                        .map(|s| Polynomial::monomial(s, Complex64::new(1.0, 0.0))),
                );
            }
        }
        if degrees.is_empty() {
            return out;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random_count {
            let terms = rng.random_range(1..=4);
            let mut p = Polynomial::zero();
            for _ in 0..terms {
                let d = degrees[rng.random_range(0..degrees.len())];
                let mut support: Vec<MajoranaIndex> =
                    sample(&mut rng, left.len(), d).into_iter().map(|i| left[i]).collect();
                support.sort();
                let c = unit_disk(&mut rng);
                if p.coefficient(&support) == Complex64::new(0.0, 0.0) {
                    p = &p + &Polynomial::monomial(&support, c);
                }
            }
            if p.is_zero() {
                p = Polynomial::identity();
            }
            out.push(p);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub lambda: f64,
    pub beta: Option<f64>,
    pub seed: Option<u64>,
}

/// Extremal value of a check and the operator that produced it, in canonical text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub value_re: f64,
    pub value_im: f64,
    pub witness: String,
}

/// Outcome of one verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub lattice: String,
    pub params: ReportParams,
    pub tolerances: BTreeMap<String, f64>,
    pub verdict: Verdict,
    /// Whether the verdict counts toward the exit status.
    pub asserted: bool,
    pub worst: Option<Witness>,
    pub details: serde_json::Value,
    /// Always null here; wall-clock times go to a separate sidecar.
    pub timing_ms: Option<f64>,
    pub version: String,
}

impl CheckReport {
    pub fn new(check: &str, lat: &IslandLattice, params: ReportParams) -> Self {
        CheckReport {
            check: check.to_string(),
            lattice: lat.hash(),
            params,
            tolerances: BTreeMap::new(),
            verdict: Verdict::Skipped,
            asserted: true,
            worst: None,
            details: serde_json::Value::Null,
            timing_ms: None,
            version: VERSION.to_string(),
        }
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Per-sample result of an RP scan.
#[derive(Clone, Debug)]
pub struct RpScan {
    pub values: Vec<Complex64>,
    pub min_index: usize,
    pub max_imag: f64,
}

impl RpScan {
    pub fn min_real(&self) -> f64 {
        self.values[self.min_index].re
    }
}

/// Evaluates the RP functional for every sample, in parallel, in sample order.
pub fn rp_scan(samples: &[Polynomial], r: &ReflectionData, gibbs: &GibbsState) -> Result<RpScan> {
    let values = samples
        .par_iter()
        .map(|a| rp_functional(a, &r.map, gibbs))
        .collect::<Result<Vec<_>>>()?;
    let min_index = (0..values.len())
        .min_by(|&a, &b| values[a].re.total_cmp(&values[b].re))
        .expect("identity is always sampled");
    let max_imag = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    Ok(RpScan {
        values,
        min_index,
        max_imag,
    })
}

/// RP report from a prepared Gibbs state.
pub fn rp_report(
    lat: &IslandLattice,
    r: &ReflectionData,
    gibbs: &GibbsState,
    lambda: f64,
    spec: &RPSampleSpec,
    tol: f64,
) -> Result<CheckReport> {
    let samples = spec.samples(&r.map.left_set());
    let scan = rp_scan(&samples, r, gibbs)?;
    let ok = scan.min_real() >= -tol && scan.max_imag <= tol;
    let name = match spec.parity {
        ParityFilter::Even => "reflection_positivity",
        ParityFilter::Odd => "reflection_positivity_odd",
        ParityFilter::Both => "reflection_positivity_all",
    };
    let mut report = CheckReport::new(
        name,
        lat,
        ReportParams {
            lambda,
            beta: Some(gibbs.beta),
            seed: Some(spec.seed),
        },
    )
    .tolerance("rp", tol);
    report.verdict = Verdict::from_bool(ok);
    report.asserted = spec.parity == ParityFilter::Even;
    let w = scan.values[scan.min_index];
    report.worst = Some(Witness {
        value_re: w.re,
        value_im: w.im,
        witness: samples[scan.min_index].render(),
    });
    report.details = serde_json::json!({
        "samples": samples.len(),
        "min_real": scan.min_real(),
        "max_abs_imag": scan.max_imag,
        "identity_value": scan.values[0].re,
        "plane": { "axis": r.plane.axis, "coordinate": r.plane.coordinate },
        "spec": spec,
    });
    Ok(report)
}

/// RP check from scratch: builds `H`, diagonalizes it and scans the samples.
pub fn check_rp(
    lat: &IslandLattice,
    r: &ReflectionData,
    lambda: f64,
    beta: f64,
    spec: &RPSampleSpec,
    tol: f64,
) -> Result<CheckReport> {
    let h = build_hamiltonian(lat, Complex64::new(lambda, 0.0));
    let op = crate::fock::to_matrix(&h, lat.num_modes())?;
    let spectrum = dense_spectrum(&op)?;
    let gibbs = GibbsState::new(&spectrum, beta)?;
    rp_report(lat, r, &gibbs, lambda, spec, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopoOutcome {
    pub alpha: f64,
    pub alpha_imag: f64,
    pub deviation: f64,
    pub pass: bool,
}

fn restricted_alpha(m: &DMatrix<Complex64>) -> (Complex64, f64) {
    let n = m.nrows();
    let alpha = m.trace() / n as f64;
    let dev = (m - DMatrix::<Complex64>::identity(n, n) * alpha)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    (alpha, dev)
}

/// Measures how far `P W P` is from a multiple of `P`.
pub fn check_topological_order(ground: &GroundSpace, w: &dyn LinearOperator, tol: f64) -> TopoOutcome {
    let (alpha, deviation) = restricted_alpha(&ground.restricted(w));
    TopoOutcome {
        alpha: alpha.re,
        alpha_imag: alpha.im,
        deviation,
        pass: deviation <= tol,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityOutcome {
    pub min: f64,
    pub max: f64,
    pub average: f64,
    pub spread: f64,
    /// `min >= -tol`.
    pub pass: bool,
    /// `average >= -tol`, the trace form.
    pub average_pass: bool,
}

/// Diagonal expectations `<Ω^μ, W_A Ω^μ>` over the ground basis.
pub fn check_ground_positivity(ground: &GroundSpace, w_a: &dyn LinearOperator, tol: f64) -> PositivityOutcome {
    let diag: Vec<f64> = ground
        .basis
        .iter()
        .map(|b| crate::fock::inner(&b.0, &w_a.apply_vec(&b.0)).re)
        .collect();
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let average = diag.iter().sum::<f64>() / diag.len() as f64;
    PositivityOutcome {
        min,
        max,
        average,
        spread: max - min,
        pass: min >= -tol,
        average_pass: average >= -tol,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VortexClass {
    VortexFree,
    VortexFull,
    PartiallyFree,
    PartiallyFull,
    Undetermined,
}

impl VortexClass {
    pub fn classify(alpha: f64, tol: f64) -> Self {
        if alpha >= 1.0 - tol {
            VortexClass::VortexFree
        } else if alpha <= -1.0 + tol {
            VortexClass::VortexFull
        } else if alpha > tol {
            VortexClass::PartiallyFree
        } else if alpha < -tol {
            VortexClass::PartiallyFull
        } else {
            VortexClass::Undetermined
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VortexClass::VortexFree => "vortex-free",
            VortexClass::VortexFull => "vortex-full",
            VortexClass::PartiallyFree => "partially-free",
            VortexClass::PartiallyFull => "partially-full",
            VortexClass::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexRecord {
    pub octagon: usize,
    pub center: [i64; 2],
    pub alpha: f64,
    pub deviation: f64,
    pub classification: VortexClass,
    pub loop_operator: String,
}

/// Matrix-free action of an octagon loop operator.
pub fn loop_action(lat: &IslandLattice, octagon: &Octagon) -> Result<PauliSum> {
    let v = vortex_operator::<Complex64>(lat, octagon, None)?;
    PauliSum::from_polynomial(&v.w, lat.num_modes())
}

/// α and classification of every octagon loop in the ground space.
pub fn vortex_map(lat: &IslandLattice, ground: &GroundSpace, tol: f64) -> Result<Vec<VortexRecord>> {
    lat.octagons()
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let v = vortex_operator::<Complex64>(lat, o, None)?;
            let op = PauliSum::from_polynomial(&v.w, lat.num_modes())?;
            let t = check_topological_order(ground, &op, tol);
            Ok(VortexRecord {
                octagon: i,
                center: [o.center.0, o.center.1],
                alpha: t.alpha,
                deviation: t.deviation,
                classification: VortexClass::classify(t.alpha, tol),
                loop_operator: v.w.render(),
            })
        })
        .collect()
}

/// Exact check that every octagon loop commutes with `H`.
pub fn check_conservation(lat: &IslandLattice, lambda: f64) -> Result<CheckReport> {
    let l = exact_real(lambda).ok_or_else(|| Error::Format(format!("lambda {lambda} is not finite")))?;
    let h = build_hamiltonian::<Exact>(lat, l);
    let mut report = CheckReport::new(
        "conservation",
        lat,
        ReportParams {
            lambda,
            beta: None,
            seed: None,
        },
    );
    let mut failures = Vec::new();
    for (i, o) in lat.octagons().iter().enumerate() {
        let v = vortex_operator::<Exact>(lat, o, None)?;
        let c = commutator(&v.w, &h);
        if !c.is_zero() {
            failures.push((i, v.w.render(), c));
        }
    }
    report.verdict = Verdict::from_bool(failures.is_empty());
    report.details = serde_json::json!({
        "octagons": lat.octagons().len(),
        "failing_octagons": failures.iter().map(|f| f.0).collect::<Vec<_>>(),
        "mode": "exact",
    });
    if let Some((i, w, c)) = failures.first() {
        let terms = c.render_terms();
        report.worst = Some(Witness {
            value_re: terms.len() as f64,
            value_im: 0.0,
            witness: format!("octagon {i}: W = {w}; [W,H] = {}", terms.join(" + ")),
        });
    }
    Ok(report)
}
