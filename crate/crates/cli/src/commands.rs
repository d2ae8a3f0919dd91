use serde_json::{json, Value};

use ringsqueeze::fock::{covariance_from_density, evolve_fock, FockBasis, FockDensity, FockOptions};
use ringsqueeze::hamiltonian::effective_hamiltonian;
use ringsqueeze::lindblad::HURWITZ_TOL;
use ringsqueeze::modes::{chain_overlap, orthogonality_deficit, overlap_matrix, EnsembleGeometry};
use ringsqueeze::protocols::{run_protocol, stability_sweep, sweep_protocols, ProtocolResult};
use ringsqueeze::squeezers::{conjugate_hamiltonian, one_two_mode_frame};
use ringsqueeze::{
    Error, Execution, GaussianState, LaserConfig, LindbladSpec, ModeLabel, ModeRegistry, OperatorExpr, Order,
    QuadraticHamiltonian,
};

use crate::config::{Frame, RunConfig};
use crate::report::{num, Report, Status, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy)]
pub struct Options {
    /// Overrides the threshold from the config file.
    pub threshold: Option<f64>,
    pub exec: Execution,
}

impl Default for Options {
    fn default() -> Self {
        Options { threshold: None, exec: Execution::Parallel }
    }
}

fn missing(table: &str) -> CliError {
    CliError::Config(vec![format!("this command needs a [{table}] table")])
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn laser(cfg: &RunConfig) -> Result<&LaserConfig, CliError> {
    cfg.laser.as_ref().ok_or_else(|| CliError::Config(vec!["this command needs a [laser] or [physical] table".into()]))
}

fn threshold(cfg: &RunConfig, opts: &Options) -> f64 {
    opts.threshold.unwrap_or(cfg.threshold)
}

fn protocol_summary(r: &ProtocolResult) -> Value {
    json!({
        "spec": r.spec,
        "metrics": r.metrics,
        "steps": r.steps,
        "final_labels": r.final_state.registry().labels(),
        "final_covariance": matrix_rows(r.final_state.covariance()),
    })
}

pub fn protocol(cfg: &RunConfig, opts: &Options) -> Result<Report, CliError> {
    let spec = cfg.protocol.as_ref().ok_or_else(|| missing("protocol"))?;
    let r = run_protocol(spec)?;
    let thr = threshold(cfg, opts);
    let m = &r.metrics;

    let mut table = Table::new([
        "time",
        "var_x_C0k",
        "var_p_C0k",
        "var_epr_minus",
        "var_epr_plus",
        "fidelity",
        "purity",
        "n_a+",
        "n_a-",
    ]);
    for s in &r.series {
        table.push_numbers([
            s.time,
            s.var_x_c0k,
            s.var_p_c0k,
            s.var_epr_minus,
            s.var_epr_plus,
            s.fidelity,
            s.purity,
            s.photons_plus,
            s.photons_minus,
        ]);
    }

    let mut results = protocol_summary(&r);
    results["threshold"] = json!(thr);
    results["checks"] = json!({
        "fidelity_above_threshold": m.fidelity >= thr,
        "decoupling": r.steps.iter().all(|s| s.decoupling.pass),
        "frame_returns_to_vacuum": m.frame_vacuum_fidelity >= thr,
        "stationary": m.all_converged,
    });
    let mut report = Report::new("protocol", results);
    report.sources = json!(r
        .steps
        .iter()
        .map(|s| json!({"step": s.resolved.step, "beta": s.resolved.pair, "source": s.resolved.source}))
        .collect::<Vec<_>>());
    report.table = Some(table);
    if m.fidelity < thr {
        report.status = Status::BelowThreshold;
        report.reason = Some(format!("fidelity {:.6} below threshold {thr}", m.fidelity));
    }
    Ok(report)
}

fn classify(abscissa: f64, kappa: f64) -> &'static str {
    let tol = HURWITZ_TOL * kappa;
    if abscissa < -tol {
        "stable"
    } else if abscissa <= tol {
        "marginal"
    } else {
        "unstable"
    }
}

pub fn steady_state(cfg: &RunConfig, opts: &Options) -> Result<Report, CliError> {
    let laser = laser(cfg)?;
    let ss = cfg.steady_state.clone().unwrap_or(crate::config::SteadyStateConfig {
        modes: None,
        frame: Frame::Lab,
        sweep_ratios: Vec::new(),
    });
    let reg = ModeRegistry::canonical(laser.ensembles.len() as u8);
    let mut h = effective_hamiltonian(laser, &reg)?;
    let mut sources = json!({"couplings": cfg.laser_source});
    if ss.frame == Frame::Squeezed {
        let e = laser.ensembles[0];
        if e.beta_s >= e.beta_u {
            return Err(Error::Stability(format!(
                "squeezed frame needs beta_s < beta_u, got {} and {}",
                e.beta_s, e.beta_u
            ))
            .into());
        }
        let xi = (e.beta_s / e.beta_u).atanh();
        h = conjugate_hamiltonian(&h, &one_two_mode_frame(&reg, 1, xi)?)?;
        sources["frame"] = json!({"xi": xi, "source": "one-two-mode-ratio"});
    }
    let mut spec = LindbladSpec::cavity(h, cfg.kappa)?;
    if let Some(m) = &ss.modes {
        spec = spec.restrict(m)?;
    }
    let dd = spec.drift_diffusion();
    let spectrum = dd.spectrum();
    let abscissa = spectrum[0].re;

    let mut results = json!({
        "frame": ss.frame,
        "labels": spec.registry().labels(),
        "spectrum": spectrum,
        "spectral_abscissa": abscissa,
        "stability": classify(abscissa, cfg.kappa),
    });

    let mut table = None;
    if !ss.sweep_ratios.is_empty() {
        let pts = stability_sweep(laser.ensembles[0].beta_u, &ss.sweep_ratios, cfg.kappa, opts.exec)?;
        let mut t = Table::new(["ratio", "spectral_abscissa", "stability"]);
        let mut rows = Vec::new();
        for p in &pts {
            let c = classify(p.spectral_abscissa, cfg.kappa);
            t.push(vec![num(p.ratio), num(p.spectral_abscissa), c.to_string()]);
            rows.push(json!({"ratio": p.ratio, "spectral_abscissa": p.spectral_abscissa, "stability": c}));
        }
        results["sweep"] = json!({"subsystem": ["a+", "C0k(1)"], "points": rows});
        table = Some(t);
    }

    let mut report = Report::new("steady-state", Value::Null);
    match dd.steady_state() {
        Ok(st) => {
            let vac = GaussianState::vacuum(st.registry().clone());
            let dev = (st.covariance() - vac.covariance()).abs().max();
            results["covariance"] = json!(matrix_rows(st.covariance()));
            results["vacuum_deviation"] = json!(dev);
            results["is_vacuum"] = json!(dev < 1e-9);
            results["purity"] = json!(st.purity()?);
            results["residual"] = json!(dd.residual(&st));
            results["convergence_time"] = json!(dd.convergence_time(1e-6)? * cfg.kappa);
            results["photon_numbers"] = json!(st
                .registry()
                .labels()
                .iter()
                .map(|l| Ok((l.to_string(), st.photon_number(*l)?)))
                .collect::<Result<std::collections::BTreeMap<_, _>, Error>>()?);
        }
        Err(e @ Error::NotHurwitz { .. }) => {
            if let Error::NotHurwitz { re, im, modes } = &e {
                results["not_hurwitz"] = json!({"re": re, "im": im, "modes": modes});
            }
            report.status = Status::from(&e);
            report.reason = Some(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    report.results = results;
    report.sources = sources;
    report.table = table;
    Ok(report)
}

pub fn evolve(cfg: &RunConfig, _opts: &Options) -> Result<Report, CliError> {
    let laser = laser(cfg)?;
    let ev = cfg.evolve.as_ref().ok_or_else(|| missing("evolve"))?;
    let reg = ModeRegistry::canonical(laser.ensembles.len() as u8);
    let mut spec = LindbladSpec::cavity(effective_hamiltonian(laser, &reg)?, cfg.kappa)?;
    if let Some(m) = &ev.modes {
        spec = spec.restrict(m)?;
    }
    let dd = spec.drift_diffusion();
    let labels = spec.registry().labels().to_vec();

    let mut header = vec!["time".to_string()];
    for l in &labels {
        header.extend([format!("var_x_{l}"), format!("var_p_{l}"), format!("n_{l}")]);
    }
    header.push("purity".into());
    let mut table = Table::new(header);

    let mut state = GaussianState::vacuum(spec.registry().clone());
    let dt = ev.duration / ev.samples as f64;
    for i in 0..=ev.samples {
        if i > 0 {
            state = dd.evolve(&state, dt / cfg.kappa)?;
        }
        let c = state.covariance();
        let mut row = vec![i as f64 * dt];
        for (j, l) in labels.iter().enumerate() {
            row.extend([c[(2 * j, 2 * j)], c[(2 * j + 1, 2 * j + 1)], state.photon_number(*l)?]);
        }
        row.push(state.purity()?);
        table.push_numbers(row);
    }

    let spectrum = dd.spectrum();
    let mut report = Report::new(
        "evolve",
        json!({
            "labels": labels,
            "duration": ev.duration,
            "spectral_abscissa": spectrum[0].re,
            "spectrum": spectrum,
            "final_covariance": matrix_rows(state.covariance()),
            "final_residual": dd.residual(&state),
        }),
    );
    report.sources = json!({"couplings": cfg.laser_source});
    report.table = Some(table);
    Ok(report)
}

fn order_name(o: Order) -> String {
    format!("C{}k", o.value())
}

pub fn modes(cfg: &RunConfig, _opts: &Options) -> Result<Report, CliError> {
    let mc = cfg.modes.as_ref().ok_or_else(|| missing("modes"))?;
    let g = EnsembleGeometry::new(mc.atoms, mc.spacing, mc.wavenumber)?;
    let m = overlap_matrix(&g, &Order::ALL);
    let deficit = orthogonality_deficit(&g);

    let mut table = Table::new(["row", "col", "re", "im", "abs"]);
    let mut pairs = Vec::new();
    let mut hermiticity = 0.0_f64;
    for (i, a) in Order::ALL.iter().enumerate() {
        for (j, b) in Order::ALL.iter().enumerate() {
            let v = m[i][j];
            hermiticity = hermiticity.max((v - m[j][i].conj()).norm());
            table.push(vec![order_name(*a), order_name(*b), num(v.re), num(v.im), num(v.norm())]);
            let c = chain_overlap(*a, *b, g.k_length());
            pairs.push(json!({
                "row": order_name(*a),
                "col": order_name(*b),
                "discrete": [v.re, v.im],
                "continuum": [c.re, c.im],
            }));
        }
    }

    let mut report = Report::new(
        "modes",
        json!({
            "atoms": g.atoms,
            "spacing": g.spacing,
            "wavenumber": g.wavenumber,
            "k_length": g.k_length(),
            "overlaps": pairs,
            "hermiticity_error": hermiticity,
            "deficit": deficit,
            "threshold": mc.threshold,
            "orthogonal": deficit <= mc.threshold,
        }),
    );
    report.table = Some(table);
    if deficit > mc.threshold {
        report.status = Status::Warning;
        report.reason = Some(format!(
            "orthogonality deficit {deficit:.3e} exceeds {}; the collective modes cannot be treated as independent",
            mc.threshold
        ));
    }
    Ok(report)
}

/// Terms of `expr` acting only on `modes`.
fn restrict_expr(expr: &OperatorExpr, modes: &[ModeLabel]) -> OperatorExpr {
    let mut out = OperatorExpr::new();
    for t in expr.terms() {
        if t.ops.iter().all(|l| modes.contains(&l.mode)) {
            out.push(t.coeff, t.ops.clone());
        }
    }
    out
}

pub fn oracle(cfg: &RunConfig, opts: &Options) -> Result<Report, CliError> {
    let laser = laser(cfg)?;
    let oc = cfg.oracle.as_ref().ok_or_else(|| missing("oracle"))?;
    let basis = FockBasis::new(oc.modes.clone(), oc.cutoffs.clone()).map_err(|e| CliError::Config(vec![format!("oracle: {e}")]))?;
    let expr = restrict_expr(&ringsqueeze::hamiltonian::effective_operator(laser), &oc.modes);
    let damped: Vec<ModeLabel> = if oc.damping { oc.modes.iter().copied().filter(ModeLabel::is_cavity).collect() } else { vec![] };

    let reg = ModeRegistry::new(oc.modes.clone())?;
    let h = QuadraticHamiltonian::from_expr(&expr, &reg)?;
    let dd = LindbladSpec::new(h, damped.clone(), cfg.kappa)?.drift_diffusion();

    let fopts = FockOptions { exec: opts.exec, ..FockOptions::default() };
    let mut times = oc.times.clone();
    times.sort_by(f64::total_cmp);
    let mut rho = FockDensity::vacuum(basis);
    let p0 = rho.purity();
    let mut gauss = GaussianState::vacuum(reg);
    let mut prev = 0.0;

    let mut table =
        Table::new(["time", "max_cov_diff", "top_population", "trace", "purity_fock", "purity_gaussian", "purity_drift"]);
    let mut worst = 0.0_f64;
    let mut worst_drift = 0.0_f64;
    let mut top = 0.0_f64;
    for &t in &times {
        let step = (t - prev) / cfg.kappa;
        let ev = evolve_fock(&rho, &expr, &damped, cfg.kappa, step, &fopts)?;
        rho = ev.state;
        gauss = dd.evolve(&gauss, step)?;
        prev = t;
        let from_fock = covariance_from_density(&rho)?;
        let diff = (from_fock.covariance() - gauss.covariance()).abs().max();
        let pf = rho.purity();
        let drift = (pf - p0).abs();
        worst = worst.max(diff);
        worst_drift = worst_drift.max(drift);
        top = top.max(ev.max_top_population);
        table.push_numbers([t, diff, rho.top_level_population(), rho.trace(), pf, gauss.purity()?, drift]);
    }

    let mut report = Report::new(
        "oracle",
        json!({
            "modes": oc.modes,
            "cutoffs": oc.cutoffs,
            "damped": damped,
            "times": times,
            "max_covariance_discrepancy": worst,
            "max_top_population": top,
            "max_purity_drift": worst_drift,
            "tolerance": oc.tolerance,
            "pass": worst < oc.tolerance,
            "hamiltonian_terms": expr.terms().iter().map(|t| {
                json!({
                    "coeff": [t.coeff.re, t.coeff.im],
                    "ops": t.ops.iter().map(|l| format!("{}{}", l.mode, if l.dagger { "^dag" } else { "" })).collect::<Vec<_>>(),
                })
            }).collect::<Vec<_>>(),
        }),
    );
    report.sources = json!({"couplings": cfg.laser_source});
    report.table = Some(table);
    if worst >= oc.tolerance {
        report.status = Status::BelowThreshold;
        report.reason = Some(format!("covariance discrepancy {worst:.3e} exceeds tolerance {:.1e}", oc.tolerance));
    }
    Ok(report)
}

pub fn sweep(cfg: &RunConfig, opts: &Options) -> Result<Report, CliError> {
    let sc = cfg.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
    let thr = threshold(cfg, opts);
    let results = sweep_protocols(&sc.protocols, opts.exec);

    let mut table = Table::new([
        "index",
        "kind",
        "xi",
        "status",
        "fidelity",
        "purity",
        "log_negativity",
        "target_log_negativity",
        "frame_vacuum_fidelity",
    ]);
    let mut entries = Vec::new();
    let mut worst = Status::Ok;
    for (i, (spec, r)) in sc.protocols.iter().zip(&results).enumerate() {
        let kind = serde_json::to_value(spec.kind)?.as_str().unwrap_or_default().to_string();
        let (status, entry) = match r {
            Ok(r) => {
                let m = &r.metrics;
                let s = if m.fidelity >= thr { Status::Ok } else { Status::BelowThreshold };
                table.push(
                    [i.to_string(), kind, num(spec.xi), status_name(s)?]
                        .into_iter()
                        .chain(
                            [m.fidelity, m.purity, m.log_negativity, m.target_log_negativity, m.frame_vacuum_fidelity]
                                .map(num),
                        )
                        .collect(),
                );
                let mut e = protocol_summary(r);
                e["status"] = json!(s);
                (s, e)
            }
            Err(e) => {
                let s = Status::from(e);
                let mut row = vec![i.to_string(), kind, num(spec.xi), status_name(s)?];
                row.extend(std::iter::repeat_n(String::new(), 5));
                table.push(row);
                (s, json!({"spec": spec, "status": s, "reason": e.to_string()}))
            }
        };
        worst = worst.max(status);
        entries.push(entry);
    }

    let mut report = Report::new("sweep", json!({"threshold": thr, "runs": entries}));
    report.table = Some(table);
    if worst != Status::Ok {
        report.status = worst;
        report.reason = Some("at least one run did not succeed; see results.runs".into());
    }
    Ok(report)
}

fn status_name(s: Status) -> Result<String, CliError> {
    Ok(serde_json::to_value(s)?.as_str().unwrap_or_default().to_string())
}
