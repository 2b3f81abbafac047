//! One pipeline per run mode; each returns its artifacts in memory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use qpf_core::circle::{centered, CircleInterval};
use qpf_core::config::FamilyFile;
use qpf_core::lyapunov::{
    detect_uniform_attractor, invariance_defect, pullback_graph, sink_source_search, sna_indicator, SampledGraph,
};
use qpf_core::multiscale::{
    build_critical_sets, check_recurrence, detect_i0_with, find_fast_return, hook_diagnostics, nesting_holds,
    scan_gap_parameter, scan_state, uniform_at, verify_assumptions, BoundaryStrip, GapScanSpec, MultiscaleSchedule,
    MultiscaleState, RecurrenceVariant, Verdict,
};
use qpf_core::rotation::{
    detect_plateaus, module_membership, refine_plateau_edge, sweep_values, task_seed, Plateau, Side, Staircase,
};
use qpf_core::QpfFamily;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::*;
use crate::output::{commit, num, Artifacts, ErrorKind, RunError, RunManifest};
use crate::plot::{Figure, Mark, PALETTE};

pub const DEFAULT_SEED: u64 = 1;

struct Ctx<'a> {
    cfg: &'a RunConfig,
    file: FamilyFile,
    family: QpfFamily,
    seed: u64,
}

fn tag<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn config_error(msg: impl Into<String>) -> RunError {
    RunError::new(ErrorKind::Config, msg)
}

/// Validates, computes on a pool of `workers` threads, and writes the
/// artifacts plus `manifest.json` into `out`. Returns the manifest path.
pub fn execute(
    mode: Mode,
    cfg: &RunConfig,
    base: &Path,
    out: &Path,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<PathBuf, RunError> {
    let start = Instant::now();
    cfg.validate(mode)?;
    let file = cfg.family_file(base)?;
    let family = file.build().map_err(|e| config_error(e.to_string()))?;
    let seed = seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let workers = workers
        .or(cfg.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(config_error("workers must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::new(ErrorKind::Io, e.to_string()))?;
    let cx = Ctx {
        cfg,
        file,
        family,
        seed,
    };
    let artifacts = pool.install(|| dispatch(mode, &cx))?;
    let manifest = RunManifest {
        tool: "qpf".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        mode: mode.name().into(),
        seed,
        workers,
        config: serde_json::to_value(cfg).expect("config serialises"),
        family: serde_json::to_value(&cx.file).expect("family serialises"),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: Vec::new(),
    };
    commit(out, &artifacts, manifest)
}

fn dispatch(mode: Mode, cx: &Ctx) -> Result<Artifacts, RunError> {
    let c = cx.cfg;
    match mode {
        Mode::RhoSweep => rho_sweep(cx, c.rho_sweep.as_ref().expect("validated")),
        Mode::Staircase => staircase(cx, c.staircase.as_ref().expect("validated")),
        Mode::Tongues => tongues(cx, c.tongues.as_ref().expect("validated")),
        Mode::SnaSearch => sna_search(cx, c.sna_search.as_ref().expect("validated")),
        Mode::Multiscale => multiscale(cx, c.multiscale.as_ref().expect("validated")),
        Mode::Hooks => hooks(cx, c.hooks.as_ref().expect("validated")),
        Mode::Verify => verify(cx, &c.verify.clone().unwrap_or_default()),
    }
}

fn staircase_rows(st: &Staircase) -> Vec<Vec<String>> {
    st.tau
        .iter()
        .zip(&st.estimates)
        .map(|(&t, e)| vec![num(t), num(e.rho), num(e.rho_unwrapped), num(e.spread), num(e.error_bound)])
        .collect()
}

const STAIRCASE_HEADER: [&str; 5] = ["tau", "rho", "rho_unwrapped", "spread", "error_bound"];

fn violations(family: &QpfFamily, st: &Staircase) -> Vec<usize> {
    if family.monotone_in_tau {
        st.monotonicity_violations()
    } else {
        Vec::new()
    }
}

fn rho_sweep(cx: &Ctx, c: &RhoSweepCfg) -> Result<Artifacts, RunError> {
    let st = sweep_values(&cx.family, &c.tau.values(), &c.estimator.params(cx.seed))?;
    let mut a = Artifacts::default();
    a.csv("rho.csv", &STAIRCASE_HEADER, staircase_rows(&st))?;
    a.json(
        "rho.json",
        &json!({
            "points": st.tau.len(),
            "monotone_in_tau": cx.family.monotone_in_tau,
            "monotonicity_violations": violations(&cx.family, &st),
            "max_error_bound": st.estimates.iter().map(|e| e.error_bound).fold(0.0, f64::max),
        }),
    );
    Ok(a)
}

#[derive(Serialize)]
struct PlateauRow {
    plateau: Plateau,
    refined_left: Option<f64>,
    refined_right: Option<f64>,
    refine_note: Option<String>,
    module: Option<qpf_core::rotation::ModuleWitness>,
}

fn staircase_figure(title: &str, st: &Staircase, plateaus: &[Plateau]) -> String {
    let mut f = Figure::new(title, "τ", "ρ (unwrapped)");
    let pts = st.tau.iter().zip(&st.estimates).map(|(&t, e)| (t, e.rho_unwrapped)).collect();
    f.push("ρ(τ)", PALETTE[0], Mark::Line(pts));
    if !plateaus.is_empty() {
        let segs = plateaus
            .iter()
            .map(|p| ((p.tau_left, p.rho_unwrapped), (p.tau_right, p.rho_unwrapped)))
            .collect();
        f.push(&format!("plateaus ({})", plateaus.len()), PALETTE[1], Mark::Segments(segs));
    }
    f.fit();
    f.render()
}

fn staircase(cx: &Ctx, c: &StaircaseCfg) -> Result<Artifacts, RunError> {
    let params = c.estimator.params(cx.seed);
    let st = sweep_values(&cx.family, &c.tau.values(), &params)?;
    let flat_tol = c.flat_tol.unwrap_or_else(|| params.default_flat_tol());
    let plateaus = detect_plateaus(&st, flat_tol);
    if c.refine_edges && !cx.family.monotone_in_tau {
        return Err(config_error("refine_edges needs a family monotone in τ"));
    }
    let omega = cx.family.omega.omega;
    let rows: Vec<PlateauRow> = plateaus
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = PlateauRow {
                plateau: p.clone(),
                refined_left: None,
                refined_right: None,
                refine_note: None,
                module: module_membership(p.rho_locked, omega, c.max_denominator, flat_tol),
            };
            if c.refine_edges {
                for (j, side) in [Side::Left, Side::Right].into_iter().enumerate() {
                    let pr = qpf_core::rotation::EstimatorParams {
                        seed: task_seed(cx.seed, (1 << 32) + 2 * i as u64 + j as u64),
                        ..params
                    };
                    match refine_plateau_edge(&cx.family, p, side, c.bisect_tol, &pr) {
                        Ok(e) if side == Side::Left => row.refined_left = Some(e.tau),
                        Ok(e) => row.refined_right = Some(e.tau),
                        Err(e) => row.refine_note = Some(e.to_string()),
                    }
                }
            }
            row
        })
        .collect();
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let table = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = &r.plateau;
            let m = r.module;
            vec![
                i.to_string(),
                num(p.tau_left),
                num(p.tau_right),
                num(p.width()),
                num(p.rho_locked),
                num(p.rho_unwrapped),
                num(p.edge_tolerance),
                opt(r.refined_left),
                opt(r.refined_right),
                m.map(|w| format!("{}/{}", w.r_num, w.r_den)).unwrap_or_default(),
                m.map(|w| format!("{}/{}", w.q_num, w.q_den)).unwrap_or_default(),
                r.refine_note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let mut a = Artifacts::default();
    a.csv("staircase.csv", &STAIRCASE_HEADER, staircase_rows(&st))?;
    a.csv(
        "plateaus.csv",
        &[
            "index",
            "tau_left",
            "tau_right",
            "width",
            "rho_locked",
            "rho_unwrapped",
            "edge_tolerance",
            "refined_left",
            "refined_right",
            "module_r",
            "module_q",
            "note",
        ],
        table,
    )?;
    a.json(
        "staircase.json",
        &json!({
            "flat_tol": flat_tol,
            "points": st.tau.len(),
            "monotonicity_violations": violations(&cx.family, &st),
            "plateaus": rows,
        }),
    );
    if cx.cfg.wants_plot("staircase") {
        a.add("staircase.svg", staircase_figure("Rotation number staircase", &st, &plateaus).into_bytes());
    }
    Ok(a)
}

fn set_parameter(file: &mut FamilyFile, name: &str, v: f64) -> Result<(), RunError> {
    let p = &mut file.parameters;
    let slot = match name {
        "alpha" => &mut p.alpha,
        "beta" => &mut p.beta,
        "lambda" => &mut p.lambda,
        "amplitude" => &mut p.amplitude,
        "p" => &mut p.p,
        "phase" => &mut p.phase,
        other => return Err(config_error(format!("tongues cannot vary parameter '{other}'"))),
    };
    *slot = Some(v);
    Ok(())
}

fn tongues(cx: &Ctx, c: &TonguesCfg) -> Result<Artifacts, RunError> {
    let taus = c.tau.values();
    let mut table = Vec::new();
    let mut found: Vec<(f64, Plateau)> = Vec::new();
    for (row, v) in c.values.values().into_iter().enumerate() {
        let mut file = cx.file.clone();
        set_parameter(&mut file, &c.parameter, v)?;
        let fam = file.build().map_err(|e| config_error(e.to_string()))?;
        let params = c.estimator.params(task_seed(cx.seed, row as u64));
        let st = sweep_values(&fam, &taus, &params)?;
        let tol = c.flat_tol.unwrap_or_else(|| params.default_flat_tol());
        for p in detect_plateaus(&st, tol).into_iter().filter(|p| p.width() >= c.min_width) {
            table.push(vec![
                num(v),
                num(p.rho_locked),
                num(p.rho_unwrapped),
                num(p.tau_left),
                num(p.tau_right),
                num(p.width()),
            ]);
            found.push((v, p));
        }
    }
    let mut a = Artifacts::default();
    a.csv(
        "tongues.csv",
        &[c.parameter.as_str(), "rho_locked", "rho_unwrapped", "tau_left", "tau_right", "width"],
        table,
    )?;
    if cx.cfg.wants_plot("tongues") {
        a.add("tongues.svg", tongues_figure(&c.parameter, &found).into_bytes());
    }
    Ok(a)
}

/// Plateaus as horizontal segments, one colour per frequent locked value.
fn tongues_figure(parameter: &str, found: &[(f64, Plateau)]) -> String {
    let key = |p: &Plateau| (p.rho_locked * 1e4).round() as i64;
    let mut counts: Vec<(i64, usize)> = Vec::new();
    for (_, p) in found {
        match counts.iter_mut().find(|(k, _)| *k == key(p)) {
            Some(e) => e.1 += 1,
            None => counts.push((key(p), 1)),
        }
    }
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let top: Vec<i64> = counts.iter().take(PALETTE.len() - 1).map(|c| c.0).collect();
    let mut f = Figure::new("Mode-locking tongues", "τ", parameter);
    for (i, &k) in top.iter().enumerate() {
        let segs = found
            .iter()
            .filter(|(_, p)| key(p) == k)
            .map(|(v, p)| ((p.tau_left, *v), (p.tau_right, *v)))
            .collect();
        f.push(&format!("ρ = {}", k as f64 / 1e4), PALETTE[i], Mark::Segments(segs));
    }
    let rest: Vec<_> = found
        .iter()
        .filter(|(_, p)| !top.contains(&key(p)))
        .map(|(v, p)| ((p.tau_left, *v), (p.tau_right, *v)))
        .collect();
    if !rest.is_empty() {
        f.push("other ρ", PALETTE[PALETTE.len() - 1], Mark::Segments(rest));
    }
    f.fit();
    f.render()
}

fn sna_search(cx: &Ctx, c: &SnaSearchCfg) -> Result<Artifacts, RunError> {
    let consts = cx.family.constants.as_ref();
    if c.uniform.is_some() && consts.is_none() {
        return Err(config_error("sna_search.uniform needs family constants"));
    }
    let x_init = c.x_init.unwrap_or_else(|| consts.map_or(0.5, |k| k.c.midpoint()));
    let mut table = Vec::new();
    let mut reports = Vec::new();
    for t in c.tau.values() {
        let map = cx.family.at(t);
        let g = pullback_graph(&map, c.n_pullback, c.grid_size, x_init)?;
        let rep = sna_indicator(&map, &g, &c.thresholds, x_init)?;
        let defect = invariance_defect(&map, &g);
        let ss = match &c.sink_source {
            Some(s) => Some(sink_source_search(&map, s.n_theta, s.n_x, s.horizon, s.lambda_min)?),
            None => None,
        };
        let uni = match &c.uniform {
            Some(u) => Some(detect_uniform_attractor(&map, u.iterations, u.grid)?),
            None => None,
        };
        table.push(vec![
            num(t),
            num(rep.lambda),
            tag(&rep.verdict),
            num(rep.oscillations[0]),
            num(*rep.oscillations.last().expect("at least one level")),
            g.converged.to_string(),
            num(defect),
            ss.as_ref().map(|v| v.len().to_string()).unwrap_or_default(),
            uni.as_ref().map(|u| u.is_uniform.to_string()).unwrap_or_default(),
        ]);
        reports.push(json!({
            "tau": t,
            "indicator": rep,
            "invariance_defect": defect,
            "sink_source": ss.map(|v| v.into_iter().take(5).collect::<Vec<_>>()),
            "uniform": uni,
        }));
    }
    let mut a = Artifacts::default();
    a.csv(
        "sna.csv",
        &[
            "tau",
            "lambda",
            "verdict",
            "oscillation",
            "oscillation_finest",
            "converged",
            "invariance_defect",
            "sink_source",
            "uniform",
        ],
        table,
    )?;
    a.json("sna.json", &json!({ "x_init": x_init, "results": reports }));
    if cx.cfg.wants_plot("graph") {
        let t = c.plot_tau.unwrap_or(c.tau.start);
        let g = pullback_graph(&cx.family.at(t), c.n_pullback, c.grid_size, x_init)?;
        a.add("graph.svg", graph_figure(t, &g).into_bytes());
    }
    Ok(a)
}

fn graph_figure(tau: f64, g: &SampledGraph) -> String {
    let mut f = Figure::new(&format!("Pullback graph at τ = {tau}"), "θ", "x");
    let pts = g.theta_grid.iter().copied().zip(g.values.iter().copied()).collect();
    f.push(&format!("φ ({} pts)", g.values.len()), PALETTE[0], Mark::Dots(pts));
    f.x_range = (0.0, 1.0);
    f.y_range = (0.0, 1.0);
    f.render()
}

fn schedule_for(
    cx: &Ctx,
    m: Option<&Vec<u64>>,
    eps: Option<&Vec<f64>>,
    nu: Option<f64>,
    eps0: f64,
    levels: usize,
) -> Result<MultiscaleSchedule, RunError> {
    let k = cx.family.constants()?;
    let nu = nu.unwrap_or(cx.family.omega.nu);
    let s = match m {
        Some(m) => {
            if levels > m.len() {
                return Err(config_error(format!("{levels} levels need {levels} entries in m")));
            }
            let s = MultiscaleSchedule::desk(m.clone(), k, nu, eps0)?;
            match eps {
                Some(e) => s.with_eps(e.clone())?,
                None => s,
            }
        }
        None => MultiscaleSchedule::auto(k, nu, eps0, levels)?,
    };
    Ok(s)
}

fn multiscale(cx: &Ctx, c: &MultiscaleCfg) -> Result<Artifacts, RunError> {
    let map = cx.family.at(c.tau);
    let k = *cx.family.constants()?;
    let r0 = detect_i0_with(&map, c.build.i0_cells)?;
    let schedule = schedule_for(cx, c.m.as_ref(), c.eps.as_ref(), c.nu, r0.max_length(), c.levels)?;
    let state = build_critical_sets(&map, &schedule, c.levels, &c.build, Some(r0))?;
    let nesting: Vec<_> = (1..state.regions.len()).map(|n| nesting_holds(&state, n)).collect();
    let mut table = Vec::new();
    for (n, r) in state.regions.iter().enumerate() {
        for (i, comp) in r.components().iter().enumerate() {
            table.push(vec![
                n.to_string(),
                (i + 1).to_string(),
                num(comp.left()),
                num(comp.right_unwrapped()),
                num(comp.length()),
                num(state.eps(n)),
                state.schedule.m.get(n).map(|m| m.to_string()).unwrap_or_default(),
            ]);
        }
    }
    let mut a = Artifacts::default();
    a.csv("regions.csv", &["level", "component", "left", "right", "length", "eps", "m"], table)?;
    a.json(
        "multiscale.json",
        &json!({
            "state": state,
            "recurrence_x": check_recurrence(&state, RecurrenceVariant::X),
            "recurrence_y": check_recurrence(&state, RecurrenceVariant::Y),
            "nesting": nesting,
        }),
    );
    if cx.cfg.wants_plot("strips") {
        for iota in 1..=2 {
            let svg = critical_figure(&map, &k, &state, iota, c.strip_samples)?;
            a.add(&format!("strips-{iota}.svg"), svg.into_bytes());
        }
    }
    Ok(a)
}

/// `Fwd` and `Bwd` of the first time scale over a window around `I₀^ι`,
/// in fibre coordinates centred on `E`, with the components of `ℐ₁` shaded.
fn critical_figure(
    map: &qpf_core::QpfMap,
    k: &qpf_core::FamilyConstants,
    state: &MultiscaleState,
    iota: usize,
    samples: usize,
) -> Result<String, RunError> {
    let comp = *state.regions[0].component(iota);
    let window = comp.expanded(0.25 * comp.length());
    let m = state.m(0) as i64;
    let w = map.omega();
    let mid = k.e.midpoint();
    let lifted = |lo: f64, hi: f64| {
        let y = centered(lo - mid);
        (y, y + (hi - lo))
    };
    let mut fwd = Vec::with_capacity(samples);
    let mut bwd = Vec::with_capacity(samples);
    for i in 0..samples {
        let off = window.length() * i as f64 / (samples - 1) as f64;
        let t = window.point_at(off / window.length());
        let (fl, fh) = map.iterate_arc(t - (m - 1) as f64 * w, k.c.left(), k.c.length(), m - 1)?;
        let (bl, bh) = map.iterate_arc(t + (m + 1) as f64 * w, k.e.left(), k.e.length(), -(m + 1))?;
        let (a, b) = lifted(fl, fh);
        let (c, d) = lifted(bl, bh);
        fwd.push((off, a, b));
        bwd.push((off, c, d));
    }
    let mut f = Figure::new(
        &format!("Critical geometry near I₀ component {iota} at τ = {}", map.tau),
        "θ − left end of window",
        "x − centre of E",
    );
    f.push(&format!("forward of C ({})", m - 1), PALETTE[0], Mark::Band(fwd));
    f.push(&format!("backward of E ({})", m + 1), PALETTE[1], Mark::Band(bwd));
    if let Some(r1) = state.regions.get(1) {
        let c1 = r1.component(iota);
        let o = window.offset_of(c1.left());
        f.push("ℐ₁", PALETTE[2], Mark::Spans(vec![(o, o + c1.length())]));
    }
    f.x_range = (0.0, window.length());
    f.y_range = (-0.5, 0.5);
    Ok(f.render())
}

fn hooks(cx: &Ctx, c: &HooksCfg) -> Result<Artifacts, RunError> {
    let (lo, hi) = match (c.bracket, c.tau) {
        (Some([a, b]), _) => (a, b),
        (None, Some(t)) => (t, t),
        (None, None) => return Err(config_error("hooks needs tau or bracket")),
    };
    let spec = GapScanSpec {
        tau_lo: lo,
        tau_hi: hi,
        level: c.level,
        m: c.m.clone(),
        eps: c.eps.clone(),
        nu: c.nu.unwrap_or(cx.family.omega.nu),
        build: c.build,
        hook: c.hook.spec(),
        max_bisections: c.max_bisections,
        tau_tol: c.tau_tol,
        attractor_iterations: c.uniform.iterations,
        attractor_grid: c.uniform.grid,
    };
    let mut a = Artifacts::default();
    let (tau, state, attractor, scan) = if c.bracket.is_some() {
        let mut scan = scan_gap_parameter(&cx.family, &spec)?;
        a.csv(
            "scan.csv",
            &["tau", "classification", "critical_empty", "strips_disjoint"],
            scan.steps
                .iter()
                .map(|s| vec![num(s.tau), tag(&s.classification), s.critical_empty.to_string(), s.strips_disjoint.to_string()])
                .collect(),
        )?;
        let Some(ts) = scan.tau_star else {
            return Err(RunError::new(
                ErrorKind::NotConverged,
                format!("gap scan: {}", scan.reason.clone().unwrap_or_default()),
            ));
        };
        let st = scan.state.take().expect("state at τ★");
        (ts, st, scan.attractor.clone(), Some(scan))
    } else {
        let st = scan_state(&cx.family, lo, &spec, c.level + 1)?;
        let u = uniform_at(&cx.family, lo, c.uniform.iterations, c.uniform.grid)?;
        (lo, st, Some(u), None)
    };
    if state.regions.len() <= c.level {
        return Err(RunError::new(
            ErrorKind::Structure,
            format!("critical region of level {} is empty at τ = {tau}", c.level),
        ));
    }
    let map = cx.family.at(tau);
    let report = hook_diagnostics(&map, &state, c.level, &spec.hook)?;
    let fast = find_fast_return(&state, c.level, 1, state.m(c.level));
    a.json(
        "hooks.json",
        &json!({
            "tau": tau,
            "scan": scan,
            "critical_empty_at": state.critical_empty_at,
            "fast_return": fast,
            "attractor": attractor,
            "report": report,
        }),
    );
    if cx.cfg.wants_plot("strips") {
        let k = cx.family.constants()?;
        a.add("hooks.svg", hooks_figure(&report, &k.e).into_bytes());
    }
    Ok(a)
}

fn strip_band(s: &BoundaryStrip, top: &CircleInterval, e: &CircleInterval) -> Vec<(f64, f64, f64)> {
    let Some(&l0) = s.lower.first() else {
        return Vec::new();
    };
    let shift = l0 - e.left() - centered(l0 - e.left());
    s.theta_samples
        .iter()
        .zip(s.lower.iter().zip(&s.upper))
        .map(|(&t, (&l, &u))| (top.offset_of(t), l - e.left() - shift, u - e.left() - shift))
        .collect()
}

/// `𝒜″`, `ℬ″` and `𝒟′` over `J + ω` with `P₀`, `P₁` shaded; heights are
/// measured from the lower end of `E`.
fn hooks_figure(r: &qpf_core::multiscale::HookReport, e: &CircleInterval) -> String {
    let mut f = Figure::new(
        &format!("Hooks at τ = {} (level {}, k = {}): {}", r.tau, r.level, r.k, tag(&r.classification)),
        "θ − left end of J + ω",
        "x − lower end of E",
    );
    let Some(top) = [&r.a_strip, &r.d_strip, &r.b_strip].into_iter().flatten().map(|s| s.base).next() else {
        f.push("unresolved", PALETTE[7], Mark::Dots(Vec::new()));
        return f.render();
    };
    for (label, strip, color) in [("𝒟′", &r.d_strip, PALETTE[2]), ("𝒜″", &r.a_strip, PALETTE[0]), ("ℬ″", &r.b_strip, PALETTE[1])] {
        if let Some(s) = strip {
            f.push(label, color, Mark::Band(strip_band(s, &top, e)));
        }
    }
    for (label, p, color) in [("P₀", r.p0, PALETTE[3]), ("P₁", r.p1, PALETTE[4])] {
        if let Some(p) = p {
            let o = top.offset_of(p.left());
            f.push(label, color, Mark::Spans(vec![(o, o + p.length())]));
        }
    }
    let len = e.length();
    f.push(
        "E",
        PALETTE[6],
        Mark::Segments(vec![((0.0, 0.0), (top.length(), 0.0)), ((0.0, len), (top.length(), len))]),
    );
    f.x_range = (0.0, top.length());
    f.y_range = (-len, 2.0 * len);
    f.render()
}

fn verify(cx: &Ctx, c: &VerifyCfg) -> Result<Artifacts, RunError> {
    let report = verify_assumptions(&cx.family, &c.grid)?;
    let mut a = Artifacts::default();
    a.csv(
        "verify.csv",
        &["id", "verdict", "slack", "detail"],
        report
            .conditions
            .iter()
            .map(|r| vec![r.id.clone(), tag(&r.verdict), num(r.slack), r.detail.clone()])
            .collect(),
    )?;
    a.json("verify.json", &report);
    if c.require_pass {
        if let Some(bad) = report.conditions.iter().find(|r| r.verdict == Verdict::Fail) {
            return Err(RunError::new(
                ErrorKind::Structure,
                format!("assumption {} fails: {}", bad.id, bad.detail),
            ));
        }
    }
    Ok(a)
}
