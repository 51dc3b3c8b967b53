//! End-to-end runs shared by the command line and the Python bindings:
//! certification bundles, parameter sweeps and solver summaries.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::SpectrumCache;
use crate::clifford::{exact_real, Exact};
use crate::error::{Error, Result};
use crate::fock::{to_matrix, PauliSum, DENSE_CAP};
use crate::lattice::{
    build_lattice, default_plane_for, reflection_data, Axis, Boundary, IslandLattice, Plane, ReflectionData,
};
use crate::model::{build_hamiltonian, manifest, verify_reflection_symmetry, vortex_operator, ModelManifest};
use crate::spectral::{
    dense_spectrum, ground_space_from_spectrum, lanczos_ground, thermal_expectation, GibbsState, GroundSpace,
    LanczosOptions, Spectrum,
};
use crate::verify::{
    check_conservation, check_ground_positivity, check_topological_order, rp_report, vortex_map, CheckReport,
    ParityFilter, RPSampleSpec, ReportParams, Verdict, VortexClass, VortexRecord, Witness, VERSION,
};

/// Every check name a bundle can contain, in bundle order.
pub const CHECKS: &[&str] = &[
    "reflection_symmetry",
    "conservation",
    "reflection_positivity",
    "reflection_positivity_odd",
    "thermal_vortex",
    "ground_space",
    "topological_order",
    "ground_positivity",
    "vortex_map",
    "theorem_chain",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub lx: usize,
    pub ly: usize,
    pub boundary: Boundary,
    pub plane_axis: Option<Axis>,
    pub plane_coord: Option<f64>,
}

impl LatticeSpec {
    pub fn new(lx: usize, ly: usize, boundary: Boundary) -> Self {
        LatticeSpec {
            lx,
            ly,
            boundary,
            plane_axis: None,
            plane_coord: None,
        }
    }

    pub fn lattice(&self) -> Result<IslandLattice> {
        build_lattice(self.lx, self.ly, self.boundary)
    }

    pub fn plane(&self, lat: &IslandLattice) -> Result<Plane> {
        let axis = self.plane_axis.unwrap_or(Axis::Vertical);
        match self.plane_coord {
            Some(c) => Plane::new(axis, c),
            None => Ok(default_plane_for(lat, axis)),
        }
    }

    pub fn build(&self) -> Result<(IslandLattice, ReflectionData)> {
        let lat = self.lattice()?;
        let r = reflection_data(&lat, self.plane(&lat)?)?;
        Ok((lat, r))
    }

    /// Like `build`, but a lattice without a valid default mirror is accepted
    /// when no plane was requested explicitly.
    pub fn build_optional(&self) -> Result<(IslandLattice, Option<ReflectionData>)> {
        let lat = self.lattice()?;
        match self.plane(&lat).and_then(|p| reflection_data(&lat, p)) {
            Ok(r) => Ok((lat, Some(r))),
            Err(_) if self.plane_axis.is_none() && self.plane_coord.is_none() => Ok((lat, None)),
            Err(e) => Err(e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rp: f64,
    pub topo: f64,
    pub pos: f64,
    pub gap: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rp: 1e-9,
            topo: 1e-8,
            pos: 1e-8,
            gap: None,
        }
    }
}

/// One `(lattice, lambda, beta)` instance to certify.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub lattice: LatticeSpec,
    pub lambda: f64,
    pub beta: f64,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Random polynomials in the RP sample.
    pub samples: usize,
    pub max_degree: usize,
    pub expect_fail: Vec<String>,
}

impl RunParams {
    pub fn new(lattice: LatticeSpec, lambda: f64, beta: f64) -> Self {
        RunParams {
            lattice,
            lambda,
            beta,
            seed: 0,
            tolerances: Tolerances::default(),
            samples: 100,
            max_degree: 4,
            expect_fail: Vec::new(),
        }
    }

    fn sample_spec(&self, parity: ParityFilter) -> RPSampleSpec {
        RPSampleSpec {
            exhaustive: true,
            max_degree: self.max_degree,
            random_count: self.samples,
            seed: self.seed,
            parity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub lx: usize,
    pub ly: usize,
    pub boundary: Boundary,
    pub plane: Option<Plane>,
    pub majoranas: usize,
    pub dimension: u64,
}

impl Geometry {
    fn of(lat: &IslandLattice, plane: Option<Plane>) -> Self {
        Geometry {
            lx: lat.lx(),
            ly: lat.ly(),
            boundary: lat.boundary(),
            plane,
            majoranas: lat.num_majoranas(),
            dimension: 1u64 << lat.num_modes(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundSummary {
    pub solver: String,
    pub e0: f64,
    pub degeneracy: usize,
    pub gap: Option<f64>,
    pub gap_tol: f64,
    pub max_residual: f64,
    pub matvecs: Option<usize>,
}

/// Ground space of `H(lambda)` and, at dense size, the full spectrum.
pub struct Solution {
    pub spectrum: Option<Spectrum>,
    pub ground: GroundSpace,
    pub eigenvalues: Vec<f64>,
    pub summary: GroundSummary,
}

/// Dense diagonalization up to the cap, deflated Lanczos beyond it.
pub fn solve(
    lat: &IslandLattice,
    lambda: f64,
    gap_tol: Option<f64>,
    seed: u64,
    cache: Option<&SpectrumCache>,
) -> Result<Solution> {
    let h = build_hamiltonian(lat, Complex64::new(lambda, 0.0));
    let modes = lat.num_modes();
    if 1usize << modes <= DENSE_CAP {
        let op = to_matrix(&h, modes)?;
        let cached = match cache {
            Some(c) => c.load(lat, lambda)?,
            None => None,
        };
        let spectrum = match cached {
            Some(s) => s,
            None => {
                let s = dense_spectrum(&op)?;
                if let Some(c) = cache {
                    c.store(lat, lambda, &s)?;
                }
                s
            }
        };
        let mut ground = ground_space_from_spectrum(&spectrum, gap_tol)?;
        ground.max_residual = ground
            .basis
            .iter()
            .map(|b| {
                let hv = op.apply(b).expect("dimension matches");
                hv.0.iter()
                    .zip(&b.0)
                    .map(|(x, y)| (x - y * ground.e0).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        let summary = GroundSummary {
            solver: "dense".into(),
            e0: ground.e0,
            degeneracy: ground.degeneracy(),
            gap: ground.gap,
            gap_tol: ground.gap_tol,
            max_residual: ground.max_residual,
            matvecs: None,
        };
        Ok(Solution {
            eigenvalues: spectrum.eigenvalues.clone(),
            spectrum: Some(spectrum),
            ground,
            summary,
        })
    } else {
        let op = PauliSum::from_polynomial(&h, modes)?;
        let out = lanczos_ground(
            &op,
            &LanczosOptions {
                seed,
                gap_tol,
                ..Default::default()
            },
        )?;
        let summary = GroundSummary {
            solver: "lanczos".into(),
            e0: out.ground.e0,
            degeneracy: out.ground.degeneracy(),
            gap: out.ground.gap,
            gap_tol: out.ground.gap_tol,
            max_residual: out.ground.max_residual,
            matvecs: Some(out.matvecs),
        };
        Ok(Solution {
            spectrum: None,
            ground: out.ground,
            eigenvalues: out.eigenvalues,
            summary,
        })
    }
}

/// The checks of one certify run plus the context needed to re-run them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub version: String,
    pub lattice: String,
    pub geometry: Geometry,
    pub params: ReportParams,
    pub tolerances: Tolerances,
    pub rp_samples: usize,
    pub max_degree: usize,
    pub manifest: ModelManifest,
    pub ground: GroundSummary,
    pub reports: Vec<CheckReport>,
    pub expected_failures: Vec<String>,
    pub verdict: Verdict,
}

impl Bundle {
    pub fn report(&self, check: &str) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.check == check)
    }
}

/// Wall-clock milliseconds per check; kept out of the bundle so that reports are reproducible.
pub type Timings = BTreeMap<String, f64>;

fn skipped(name: &str, lat: &IslandLattice, params: &ReportParams, reason: String) -> CheckReport {
    let mut r = CheckReport::new(name, lat, params.clone());
    r.verdict = Verdict::Skipped;
    r.details = serde_json::json!({ "reason": reason });
    r
}

fn validate_expect_fail(names: &[String]) -> Result<()> {
    for n in names {
        if !CHECKS.contains(&n.as_str()) {
            return Err(Error::Format(format!(
                "unknown check '{n}' in expect-fail (known: {})",
                CHECKS.join(", ")
            )));
        }
    }
    Ok(())
}

/// Overall verdict: asserted checks pass, except those expected to fail, which must fail.
pub fn bundle_verdict(reports: &[CheckReport], expect_fail: &[String]) -> Verdict {
    let ok = reports.iter().all(|r| {
        if expect_fail.iter().any(|e| e == &r.check) {
            r.verdict == Verdict::Fail
        } else {
            !r.asserted || r.verdict != Verdict::Fail
        }
    });
    Verdict::from_bool(ok)
}

struct Clock<'a> {
    timings: &'a mut Timings,
    start: Instant,
}

impl<'a> Clock<'a> {
    fn new(timings: &'a mut Timings) -> Self {
        Clock {
            timings,
            start: Instant::now(),
        }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.timings
            .insert(name.to_string(), (now - self.start).as_secs_f64() * 1e3);
        self.start = now;
    }
}

struct PositivityAggregate {
    min: f64,
    spread: f64,
    average_min: f64,
    witness: String,
    alphas: Vec<f64>,
}

/// Runs every check on one instance.
pub fn certify(p: &RunParams, cache: Option<&SpectrumCache>) -> Result<(Bundle, Timings)> {
    validate_expect_fail(&p.expect_fail)?;
    let (lat, r) = p.lattice.build()?;
    let tol = &p.tolerances;
    let params = ReportParams {
        lambda: p.lambda,
        beta: Some(p.beta),
        seed: Some(p.seed),
    };
    let mut timings = Timings::new();
    let mut clock = Clock::new(&mut timings);
    let mut reports = Vec::new();

    // Reflection symmetry, exactly.
    let lambda_exact =
        exact_real(p.lambda).ok_or_else(|| Error::Format(format!("lambda {} is not finite", p.lambda)))?;
    let h_exact = build_hamiltonian::<Exact>(&lat, lambda_exact);
    let sym = verify_reflection_symmetry(&h_exact, &r)?;
    let mut report = CheckReport::new("reflection_symmetry", &lat, params.clone());
    report.verdict = Verdict::from_bool(sym.symmetric);
    report.details = serde_json::json!({ "max_deviation": sym.max_deviation, "mode": "exact" });
    if !sym.symmetric {
        let diff = &h_exact.reflect(&r.map)? - &h_exact;
        report.worst = Some(Witness {
            value_re: sym.max_deviation,
            value_im: 0.0,
            witness: diff.render(),
        });
    }
    reports.push(report);
    clock.lap("reflection_symmetry");

    let mut report = check_conservation(&lat, p.lambda)?;
    report.params = params.clone();
    let conservation_ok = report.passed();
    reports.push(report);
    clock.lap("conservation");

    let sol = solve(&lat, p.lambda, tol.gap, p.seed, cache)?;
    clock.lap("solve");

    let loops: Vec<(usize, crate::model::VortexLoop)> = lat
        .octagons()
        .iter()
        .enumerate()
        .map(|(i, o)| vortex_operator(&lat, o, Some(&r)).map(|v| (i, v)))
        .collect::<Result<_>>()?;
    let loop_ops: Vec<PauliSum> = loops
        .iter()
        .map(|(_, v)| PauliSum::from_polynomial(&v.w, lat.num_modes()))
        .collect::<Result<_>>()?;

    // Thermal checks at dense size.
    let mut rp_ok = None;
    if let Some(spectrum) = &sol.spectrum {
        let gibbs = GibbsState::new(spectrum, p.beta)?;
        let even = rp_report(&lat, &r, &gibbs, p.lambda, &p.sample_spec(ParityFilter::Even), tol.rp)?;
        rp_ok = Some(even.passed());
        reports.push(even);
        clock.lap("reflection_positivity");
        reports.push(rp_report(
            &lat,
            &r,
            &gibbs,
            p.lambda,
            &p.sample_spec(ParityFilter::Odd),
            tol.rp,
        )?);
        clock.lap("reflection_positivity_odd");

        let mut report = CheckReport::new("thermal_vortex", &lat, params.clone()).tolerance("pos", tol.pos);
        let values: Vec<Complex64> = loop_ops
            .iter()
            .map(|op| thermal_expectation(op, spectrum, p.beta))
            .collect::<Result<_>>()?;
        if let Some(worst) = (0..values.len()).min_by(|&a, &b| values[a].re.total_cmp(&values[b].re)) {
            report.verdict = Verdict::from_bool(values[worst].re >= -tol.pos);
            report.worst = Some(Witness {
                value_re: values[worst].re,
                value_im: values[worst].im,
                witness: loops[worst].1.w.render(),
            });
        }
        report.details = serde_json::json!({
            "expectations": values.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>(),
        });
        reports.push(report);
        clock.lap("thermal_vortex");
    } else {
        let reason = format!("dimension {} exceeds dense cap {DENSE_CAP}", 1u64 << lat.num_modes());
        for name in ["reflection_positivity", "reflection_positivity_odd", "thermal_vortex"] {
            reports.push(skipped(name, &lat, &params, reason.clone()));
        }
    }

    let mut report = CheckReport::new("ground_space", &lat, params.clone());
    report.verdict = Verdict::Pass;
    report.asserted = false;
    report.details = serde_json::to_value(&sol.summary).expect("summary serializes");
    report.details["lowest_eigenvalues"] = serde_json::json!(sol.eigenvalues.iter().take(8).collect::<Vec<_>>());
    reports.push(report);

    // Topological order of every octagon loop.
    let topo: Vec<_> = loop_ops
        .iter()
        .map(|op| check_topological_order(&sol.ground, op, tol.topo))
        .collect();
    let mut report = CheckReport::new("topological_order", &lat, params.clone()).tolerance("topo", tol.topo);
    let topo_ok = topo.iter().all(|t| t.pass);
    report.verdict = Verdict::from_bool(topo_ok);
    if let Some(worst) = (0..topo.len()).max_by(|&a, &b| topo[a].deviation.total_cmp(&topo[b].deviation)) {
        report.worst = Some(Witness {
            value_re: topo[worst].deviation,
            value_im: 0.0,
            witness: loops[worst].1.w.render(),
        });
    } else {
        report.verdict = Verdict::Skipped;
    }
    report.details = serde_json::json!({
        "octagons": topo.iter().enumerate().map(|(i, t)| serde_json::json!({
            "octagon": i,
            "alpha": t.alpha,
            "alpha_imag": t.alpha_imag,
            "deviation": t.deviation,
        })).collect::<Vec<_>>(),
    });
    reports.push(report);
    clock.lap("topological_order");

    // Positivity of A ϑ(A) in every ground state, for octagons bisected by the plane.
    let mut report = CheckReport::new("ground_positivity", &lat, params.clone()).tolerance("pos", tol.pos);
    let mut agg: Option<PositivityAggregate> = None;
    let mut per_octagon = Vec::new();
    for (i, v) in &loops {
        let Some(a) = &v.a_factor else { continue };
        let w_a = a.multiply(&a.reflect(&r.map)?);
        let op = PauliSum::from_polynomial(&w_a, lat.num_modes())?;
        let out = check_ground_positivity(&sol.ground, &op, tol.pos);
        per_octagon.push(serde_json::json!({
            "octagon": i, "a": a.render(), "min": out.min, "max": out.max, "average": out.average, "spread": out.spread,
        }));
        let alpha = topo[*i].alpha;
        match &mut agg {
            None => {
                agg = Some(PositivityAggregate {
                    min: out.min,
                    spread: out.spread,
                    average_min: out.average,
                    witness: a.render(),
                    alphas: vec![alpha],
                })
            }
            Some(g) => {
                if out.min < g.min {
                    g.min = out.min;
                    g.witness = a.render();
                }
                g.spread = g.spread.max(out.spread);
                g.average_min = g.average_min.min(out.average);
                g.alphas.push(alpha);
            }
        }
    }
    let form = if topo_ok { "minimum" } else { "average" };
    let mut positivity_ok = None;
    match &agg {
        Some(g) => {
            let value = if topo_ok { g.min } else { g.average_min };
            let ok = value >= -tol.pos;
            positivity_ok = Some(ok);
            report.verdict = Verdict::from_bool(ok);
            report.worst = Some(Witness {
                value_re: value,
                value_im: 0.0,
                witness: g.witness.clone(),
            });
        }
        None => {
            report.verdict = Verdict::Skipped;
        }
    }
    report.details = serde_json::json!({ "form": form, "octagons": per_octagon });
    reports.push(report);
    clock.lap("ground_positivity");

    let records = vortex_map(&lat, &sol.ground, tol.topo)?;
    let mut report = CheckReport::new("vortex_map", &lat, params.clone()).tolerance("topo", tol.topo);
    report.asserted = topo_ok;
    if records.is_empty() {
        report.verdict = Verdict::Skipped;
    } else {
        report.verdict = Verdict::from_bool(records.iter().all(|rec| rec.classification == VortexClass::VortexFree));
        let worst = records
            .iter()
            .min_by(|a, b| a.alpha.total_cmp(&b.alpha))
            .expect("nonempty");
        report.worst = Some(Witness {
            value_re: worst.alpha,
            value_im: 0.0,
            witness: worst.loop_operator.clone(),
        });
    }
    report.details = serde_json::json!({ "octagons": records });
    reports.push(report);
    clock.lap("vortex_map");

    // Implications between the checks above.
    let mut report = CheckReport::new("theorem_chain", &lat, params.clone());
    let mut links = Vec::new();
    if let (Some(rp), Some(pos_min)) = (rp_ok, agg.as_ref().map(|g| g.min)) {
        let premise = rp && topo_ok;
        let conclusion = pos_min >= -tol.pos;
        links.push(("rp_and_order_imply_positivity", premise, conclusion));
    }
    if let Some(g) = &agg {
        let premise = conservation_ok && topo_ok && positivity_ok == Some(true);
        let conclusion = g.alphas.iter().all(|a| (a - 1.0).abs() <= tol.topo);
        links.push(("conserved_ordered_positive_imply_alpha_one", premise, conclusion));
        links.push(("order_implies_constant_expectation", topo_ok, g.spread <= tol.pos));
    }
    let holds = |(_, premise, conclusion): &(&str, bool, bool)| !premise || *conclusion;
    report.verdict = if links.is_empty() {
        Verdict::Skipped
    } else {
        Verdict::from_bool(links.iter().all(holds))
    };
    report.details = serde_json::json!({
        "links": links.iter().map(|l| serde_json::json!({
            "name": l.0, "premise": l.1, "conclusion": l.2, "holds": holds(l),
        })).collect::<Vec<_>>(),
    });
    reports.push(report);
    clock.lap("theorem_chain");

    let verdict = bundle_verdict(&reports, &p.expect_fail);
    let bundle = Bundle {
        version: VERSION.to_string(),
        lattice: lat.hash(),
        geometry: Geometry::of(&lat, Some(r.plane)),
        params,
        tolerances: tol.clone(),
        rp_samples: p.samples,
        max_degree: p.max_degree,
        manifest: manifest(&lat, p.lambda, &build_hamiltonian(&lat, Complex64::new(p.lambda, 0.0))),
        ground: sol.summary,
        reports,
        expected_failures: p.expect_fail.clone(),
        verdict,
    };
    Ok((bundle, timings))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub lattice: LatticeSpec,
    pub lambdas: Vec<f64>,
    pub betas: Vec<f64>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub samples: usize,
    pub max_degree: usize,
}

/// One grid point; field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub beta: f64,
    pub e0: Option<f64>,
    pub degeneracy: Option<usize>,
    pub min_rp: Option<f64>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub topo_deviation: Option<f64>,
    pub rp_verdict: Verdict,
    pub topo_verdict: Verdict,
    pub positivity_verdict: Verdict,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub version: String,
    pub lattice: String,
    pub geometry: Geometry,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub rows: Vec<SweepRow>,
}

impl SweepOutput {
    pub fn any_error(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }
}

fn sweep_lambda(lat: &IslandLattice, r: &ReflectionData, lambda: f64, p: &SweepParams) -> Result<Vec<SweepRow>> {
    let tol = &p.tolerances;
    let sol = solve(lat, lambda, tol.gap, p.seed, None)?;
    let mut alphas = Vec::new();
    let mut deviation: f64 = 0.0;
    let mut pos_min = f64::INFINITY;
    let mut pos_avg = f64::INFINITY;
    for o in lat.octagons() {
        let v = vortex_operator::<Complex64>(lat, o, Some(r))?;
        let op = PauliSum::from_polynomial(&v.w, lat.num_modes())?;
        let t = check_topological_order(&sol.ground, &op, tol.topo);
        alphas.push(t.alpha);
        deviation = deviation.max(t.deviation);
        if let Some(a) = &v.a_factor {
            let w_a = PauliSum::from_polynomial(&a.multiply(&a.reflect(&r.map)?), lat.num_modes())?;
            let out = check_ground_positivity(&sol.ground, &w_a, tol.pos);
            pos_min = pos_min.min(out.min);
            pos_avg = pos_avg.min(out.average);
        }
    }
    let topo_ok = deviation <= tol.topo;
    let positivity_verdict = if pos_min.is_infinite() {
        Verdict::Skipped
    } else if topo_ok {
        Verdict::from_bool(pos_min >= -tol.pos)
    } else {
        Verdict::from_bool(pos_avg >= -tol.pos)
    };
    let spec = RPSampleSpec {
        exhaustive: true,
        max_degree: p.max_degree,
        random_count: p.samples,
        seed: p.seed,
        parity: ParityFilter::Even,
    };
    p.betas
        .iter()
        .map(|&beta| {
            let (min_rp, rp_verdict) = match &sol.spectrum {
                Some(s) => {
                    let gibbs = GibbsState::new(s, beta)?;
                    let rep = rp_report(lat, r, &gibbs, lambda, &spec, tol.rp)?;
                    (rep.details["min_real"].as_f64(), rep.verdict)
                }
                None => (None, Verdict::Skipped),
            };
            Ok(SweepRow {
                lambda,
                beta,
                e0: Some(sol.ground.e0),
                degeneracy: Some(sol.ground.degeneracy()),
                min_rp,
                alpha_min: alphas.iter().cloned().reduce(f64::min),
                alpha_max: alphas.iter().cloned().reduce(f64::max),
                topo_deviation: Some(deviation),
                rp_verdict,
                topo_verdict: Verdict::from_bool(topo_ok),
                positivity_verdict,
                error: None,
            })
        })
        .collect()
}

/// Evaluates the `(lambda, beta)` grid; rows sorted by `(lambda, beta)`.
///
/// Each lambda is solved once and its rows are computed independently of the
/// others, so a failing point is recorded in its own rows only.
pub fn sweep(p: &SweepParams) -> Result<SweepOutput> {
    if p.lambdas.is_empty() || p.betas.is_empty() {
        return Err(Error::Format("empty sweep range".into()));
    }
    let (lat, r) = p.lattice.build()?;
    let mut lambdas = p.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let mut betas = p.betas.clone();
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    let p = SweepParams {
        lambdas,
        betas,
        ..p.clone()
    };
    let rows: Vec<Vec<SweepRow>> = p
        .lambdas
        .par_iter()
        .map(|&lambda| {
            sweep_lambda(&lat, &r, lambda, &p).unwrap_or_else(|e| {
                p.betas
                    .iter()
                    .map(|&beta| SweepRow {
                        lambda,
                        beta,
                        e0: None,
                        degeneracy: None,
                        min_rp: None,
                        alpha_min: None,
                        alpha_max: None,
                        topo_deviation: None,
                        rp_verdict: Verdict::Skipped,
                        topo_verdict: Verdict::Skipped,
                        positivity_verdict: Verdict::Skipped,
                        error: Some(e.to_string()),
                    })
                    .collect()
            })
        })
        .collect();
    Ok(SweepOutput {
        version: VERSION.to_string(),
        lattice: lat.hash(),
        geometry: Geometry::of(&lat, Some(r.plane)),
        seed: p.seed,
        tolerances: p.tolerances.clone(),
        rows: rows.into_iter().flatten().collect(),
    })
}

/// Writes sweep rows as CSV with a header in `SweepRow` field order.
pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOutput {
    pub version: String,
    pub lattice: String,
    pub geometry: Geometry,
    pub lambda: f64,
    pub seed: u64,
    pub ground: GroundSummary,
    pub eigenvalues: Vec<f64>,
}

pub fn spectrum(
    spec: &LatticeSpec,
    lambda: f64,
    seed: u64,
    gap_tol: Option<f64>,
    cache: Option<&SpectrumCache>,
) -> Result<SpectrumOutput> {
    let (lat, r) = spec.build_optional()?;
    let sol = solve(&lat, lambda, gap_tol, seed, cache)?;
    Ok(SpectrumOutput {
        version: VERSION.to_string(),
        lattice: lat.hash(),
        geometry: Geometry::of(&lat, r.map(|r| r.plane)),
        lambda,
        seed,
        ground: sol.summary,
        eigenvalues: sol.eigenvalues,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexMapOutput {
    pub version: String,
    pub lattice: String,
    pub geometry: Geometry,
    pub lambda: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub ground: GroundSummary,
    pub octagons: Vec<VortexRecord>,
}

pub fn vortex_map_run(
    spec: &LatticeSpec,
    lambda: f64,
    seed: u64,
    tolerances: &Tolerances,
    cache: Option<&SpectrumCache>,
) -> Result<VortexMapOutput> {
    let (lat, r) = spec.build_optional()?;
    let sol = solve(&lat, lambda, tolerances.gap, seed, cache)?;
    let octagons = vortex_map(&lat, &sol.ground, tolerances.topo)?;
    Ok(VortexMapOutput {
        version: VERSION.to_string(),
        lattice: lat.hash(),
        geometry: Geometry::of(&lat, r.map(|r| r.plane)),
        lambda,
        seed,
        tolerance: tolerances.topo,
        ground: sol.summary,
        octagons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> LatticeSpec {
        LatticeSpec::new(3, 3, Boundary::Open)
    }

    #[test]
    fn certify_diamond_passes() {
        let (b, t) = certify(&RunParams::new(diamond(), 0.1, 1.0), None).unwrap();
        assert_eq!(
            b.verdict,
            Verdict::Pass,
            "{:#?}",
            b.reports.iter().map(|r| (&r.check, r.verdict)).collect::<Vec<_>>()
        );
        assert_eq!(b.reports.len(), CHECKS.len());
        for (r, name) in b.reports.iter().zip(CHECKS) {
            assert_eq!(&r.check, name);
            assert!(r.timing_ms.is_none());
        }
        assert!(t.contains_key("solve"));
    }

    #[test]
    fn certify_zero_coupling_fails_order_only() {
        let mut p = RunParams::new(diamond(), 0.0, 1.0);
        let (b, _) = certify(&p, None).unwrap();
        assert_eq!(b.verdict, Verdict::Fail);
        let failing: Vec<&str> = b
            .reports
            .iter()
            .filter(|r| r.asserted && r.verdict == Verdict::Fail)
            .map(|r| r.check.as_str())
            .collect();
        assert_eq!(failing, ["topological_order"]);
        p.expect_fail = vec!["topological_order".into()];
        assert_eq!(certify(&p, None).unwrap().0.verdict, Verdict::Pass);
    }

    #[test]
    fn unknown_expect_fail() {
        let mut p = RunParams::new(diamond(), 0.1, 1.0);
        p.expect_fail = vec!["nonsense".into()];
        assert!(matches!(certify(&p, None), Err(Error::Format(_))));
    }

    #[test]
    fn sweep_rows_sorted() {
        let p = SweepParams {
            lattice: diamond(),
            lambdas: vec![0.2, 0.0, 0.1],
            betas: vec![1.0, 0.5],
            seed: 0,
            tolerances: Tolerances::default(),
            samples: 5,
            max_degree: 2,
        };
        let out = sweep(&p).unwrap();
        let keys: Vec<(f64, f64)> = out.rows.iter().map(|r| (r.lambda, r.beta)).collect();
        assert_eq!(
            keys,
            [(0.0, 0.5), (0.0, 1.0), (0.1, 0.5), (0.1, 1.0), (0.2, 0.5), (0.2, 1.0)]
        );
        let mut buf = Vec::new();
        write_sweep_csv(&out.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "lambda,beta,e0,degeneracy,min_rp,alpha_min,alpha_max,topo_deviation,rp_verdict,topo_verdict,positivity_verdict,error\n"
        ));
        assert!(sweep(&SweepParams { lambdas: vec![], ..p }).is_err());
    }
}
