//! Experiment registry and runner.
//!
//! Each entry declares the config sections and sweeps it consumes, runs its
//! pipeline stage by stage, and writes CSV tables, `summary.json` with fits and
//! scalars, optional SVG, and finally `manifest.json`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::config::{
    AbsorberSection, CouplingSection, ExperimentConfig, IntegrationSection, ModelSection, OutputSection,
    PulseSection, Requirements, Section, Spacing, SweepSection, SweepVariable,
};
use super::manifest::{RunManifest, StageTiming};
use super::output::{self, Cell};
use super::svg;
use crate::absorber::{integrate_hierarchy, optimize_transduction, AbsorberParams, IntegrationGrid, PulseEnvelope};
use crate::amplifier::{evolve, q_function, quantum_gain, AmplifierTrajectory, DriveSchedule, GainTrace};
use crate::criticality::{self, fit_linear, fit_power_law, ScalingFit, SweepPoint, DEFAULT_REL_STEP};
use crate::error::{Error, Result};
use crate::lmg::{solve_ground, transition_line_energies, LmgParams};

/// γ from χ(B_x).
pub const GAMMA_WINDOW: (f64, f64) = (1e-6, 1e-4);
/// ν̃ from |C_xxyy|(B_x); below ~1e-4 the N = 1000 correlator is already
/// saturated by the finite-size gap.
pub const NU_WINDOW: (f64, f64) = (1e-4, 1e-2);
/// Gap exponent from Δ(B_x), same finite-size cutoff as ν̃.
pub const GAP_WINDOW: (f64, f64) = (1e-4, 1e-2);
/// Q-function snapshot times.
pub const SNAPSHOT_TIMES: [f64; 4] = [-5.0, 0.0, 10.0, 18.0];

type Runner = fn(&ExperimentConfig, &mut RunContext) -> Result<()>;

pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    pub requirements: Requirements,
    run: Runner,
    defaults: fn() -> ExperimentConfig,
}

use Section::*;
use SweepVariable as V;

pub static REGISTRY: &[Experiment] = &[
    Experiment {
        name: "fig2_gain_vs_bias",
        description: "gain traces over a J_x grid at N = 400, J_y = 0.7, B_x = 0.01",
        requirements: Requirements {
            sections: &[Model, Coupling, Pulse, Absorber, Integration],
            sweeps: &[V::Jx],
        },
        run: run_fig2,
        defaults: defaults_fig2,
    },
    Experiment {
        name: "fig3_qfunction",
        description: "Q-function snapshots at t = -5, 0, 10, 18 for critical and off-critical bias",
        requirements: Requirements {
            sections: &[Model, Coupling, Pulse, Absorber, Integration],
            sweeps: &[V::Jx],
        },
        run: run_fig3,
        defaults: defaults_fig3,
    },
    Experiment {
        name: "fig4_susceptibility",
        description: "field sweep, susceptibility exponent and chi versus N",
        requirements: Requirements {
            sections: &[Model],
            sweeps: &[V::Bx, V::NQubits],
        },
        run: run_fig4,
        defaults: defaults_fig4,
    },
    Experiment {
        name: "fig5_correlation_gap",
        description: "C_xxyy and gap field sweeps with their exponents",
        requirements: Requirements {
            sections: &[Model],
            sweeps: &[V::Bx],
        },
        run: run_fig5,
        defaults: defaults_fig5,
    },
    Experiment {
        name: "figS1_absorption",
        description: "absorber P_e(t) for one pulse",
        requirements: Requirements {
            sections: &[Pulse, Absorber, Integration],
            sweeps: &[],
        },
        run: run_fig_s1,
        defaults: defaults_fig_s1,
    },
    Experiment {
        name: "figS2_transduction_map",
        description: "steady transduction probability over (delta_pp, gamma)",
        requirements: Requirements {
            sections: &[Pulse, Integration],
            sweeps: &[V::DeltaPp, V::Gamma],
        },
        run: run_fig_s2,
        defaults: defaults_fig_s2,
    },
    Experiment {
        name: "figS3_gain_scaling",
        description: "maximal gain and amplification time versus N",
        requirements: Requirements {
            sections: &[Model, Coupling, Pulse, Absorber, Integration],
            sweeps: &[V::NQubits],
        },
        run: run_fig_s3,
        defaults: defaults_fig_s3,
    },
    Experiment {
        name: "figS8_eta",
        description: "rescaled correlation eta versus B_x for several N",
        requirements: Requirements {
            sections: &[Model],
            sweeps: &[V::Bx, V::NQubits],
        },
        run: run_fig_s8,
        defaults: defaults_fig_s8,
    },
];

pub fn lookup(name: &str) -> Result<&'static Experiment> {
    REGISTRY
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownExperiment(name.to_owned()))
}

/// The configuration each experiment ships with.
pub fn default_config(name: &str) -> Result<ExperimentConfig> {
    Ok((lookup(name)?.defaults)())
}

pub struct RunContext {
    dir: PathBuf,
    emit_svg: bool,
    stages: Vec<StageTiming>,
    outputs: Vec<String>,
    summary: Map<String, Value>,
}

impl RunContext {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self).map_err(|e| e.context(format!("stage {name}")))?;
        self.stages.push(StageTiming {
            stage: name.to_owned(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    fn csv<R: AsRef<[Cell]>>(&mut self, file: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
        output::write_csv(&self.dir.join(file), header, rows)?;
        self.outputs.push(file.to_owned());
        Ok(())
    }

    fn svg(&mut self, file: &str, doc: impl FnOnce() -> String) -> Result<()> {
        if self.emit_svg {
            std::fs::write(self.dir.join(file), doc())?;
            self.outputs.push(file.to_owned());
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_owned(), value);
    }
}

/// Run one registry entry. `out` and `svg` override the config's output
/// section.
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>, svg: bool) -> Result<RunManifest> {
    let exp = lookup(&config.experiment).map_err(|e| e.context("stage config"))?;
    config
        .check_against(&exp.requirements)
        .map_err(|e| e.context("stage config"))?;
    let dir = match (out, &config.output) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(o)) => PathBuf::from(&o.directory),
        (None, None) => PathBuf::from("out").join(exp.name),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Error::from(e).context("stage output"))?;
    let mut ctx = RunContext {
        dir: dir.clone(),
        emit_svg: svg || config.output.as_ref().is_some_and(|o| o.emit_svg),
        stages: vec![],
        outputs: vec![],
        summary: Map::new(),
    };
    (exp.run)(config, &mut ctx)?;

    ctx.summary.insert("experiment".into(), json!(exp.name));
    output::write_json(&dir.join("summary.json"), &Value::Object(ctx.summary.clone()))
        .map_err(|e| e.context("stage output"))?;
    ctx.outputs.push("summary.json".into());

    let outputs = ctx
        .outputs
        .iter()
        .map(|f| RunManifest::describe(&dir, f))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.context("stage manifest"))?;
    let manifest = RunManifest {
        config: config.clone(),
        artifact_version: env!("CARGO_PKG_VERSION").to_owned(),
        stages: ctx.stages,
        outputs,
    };
    manifest.write(&dir).map_err(|e| e.context("stage manifest"))?;
    Ok(manifest)
}

// ---------------------------------------------------------------- helpers

fn lmg(model: &ModelSection, n: usize, jx: f64) -> LmgParams {
    LmgParams {
        n_qubits: n,
        epsilon: model.epsilon,
        jx,
        jy: model.jy,
        bx: 0.0,
    }
}

fn model_n(model: &ModelSection, swept: bool) -> Result<usize> {
    match (model.n_qubits, swept) {
        (Some(_), true) => Err(Error::Config("n_qubits is swept; remove it from [model]".into())),
        (None, false) => Err(Error::Config("[model] needs n_qubits".into())),
        (Some(n), false) => Ok(n),
        (None, true) => Ok(0),
    }
}

fn absorber_params(pulse: &PulseSection, a: &AbsorberSection) -> AbsorberParams {
    AbsorberParams {
        delta_pp: a.delta_pp,
        gamma_fg: a.gamma_fg,
        gamma_he: a.gamma_he,
        tau_f: pulse.tau_f,
        t_arrival: pulse.t_arrival,
        eta_scatter: a.eta,
        phase: a.phase,
    }
}

/// Absorber trace at every integrator step, as a drive for the amplifier.
fn drive_from_config(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<(DriveSchedule, PulseSection, IntegrationSection)> {
    let pulse = cfg.pulse()?.clone();
    let integ = cfg.integration()?.clone();
    let params = absorber_params(&pulse, cfg.absorber()?);
    let bx = cfg.coupling()?.bx;
    let trace = ctx.stage("absorber", |_| integrate_hierarchy(&params, integ.t_start, integ.t_end, integ.dt))?;
    ctx.set("absorber_pe_steady", json!(trace.pe_steady));
    let pe = trace.pe.iter().map(|p| p.clamp(0.0, 1.0)).collect();
    Ok((DriveSchedule::new(trace.times, pe, bx)?, pulse, integ))
}

fn amplifier_run(
    params: &LmgParams,
    drive: &DriveSchedule,
    integ: &IntegrationSection,
    t_arrival: f64,
) -> Result<(AmplifierTrajectory, GainTrace)> {
    let traj = evolve(params, drive, integ.t_start, integ.t_end, integ.dt, integ.sample_every)?;
    let gain = quantum_gain(&traj, integ.t_start, t_arrival)?;
    Ok((traj, gain))
}

fn gain_rows(traj: &AmplifierTrajectory, gain: &GainTrace) -> Vec<[Cell; 5]> {
    (0..traj.times.len())
        .map(|k| {
            [
                traj.times[k].into(),
                traj.pe[k].into(),
                traj.sx2[k].into(),
                traj.sy2[k].into(),
                gain.gain[k].into(),
            ]
        })
        .collect()
}

fn sweep_rows(points: &[SweepPoint]) -> Vec<[Cell; 8]> {
    points
        .iter()
        .map(|p| {
            [
                p.bx.into(),
                p.zeta_x.into(),
                p.zeta_y.into(),
                p.sqrt_zeta_x.into(),
                p.chi.into(),
                p.gap.into(),
                p.c_xxyy.into(),
                p.eta.into(),
            ]
        })
        .collect()
}

fn fit_json(fit: &ScalingFit) -> Value {
    json!({
        "exponent": fit.exponent,
        "log_amplitude": fit.log_amplitude,
        "r_squared": fit.r_squared,
        "window": [fit.window.0, fit.window.1],
        "n_points": fit.n_points,
    })
}

fn tag(v: f64) -> String {
    format!("{v:.4}")
}

fn gain_series(label: String, gain: &GainTrace) -> (String, Vec<(f64, f64)>) {
    (label, gain.times.iter().copied().zip(gain.gain.iter().copied()).collect())
}

// ------------------------------------------------------------ experiments

fn run_fig2(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let model = cfg.model()?;
    let n = model_n(model, false)?;
    let jx_values = cfg.sweep(V::Jx)?.values();
    let (drive, pulse, integ) = drive_from_config(cfg, ctx)?;
    let runs = ctx.stage("amplifier", |_| {
        jx_values
            .par_iter()
            .map(|&jx| {
                amplifier_run(&lmg(model, n, jx), &drive, &integ, pulse.t_arrival)
                    .map_err(|e| e.context(format!("jx = {jx}")))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    ctx.stage("output", |ctx| {
        let mut table = Vec::new();
        let mut series = Vec::new();
        for (&jx, (traj, gain)) in jx_values.iter().zip(&runs) {
            ctx.csv(&format!("gain_jx_{}.csv", tag(jx)), output::GAIN_HEADER, gain_rows(traj, gain))?;
            table.push(json!({"jx": jx, "g_max": gain.g_max, "t_am": gain.t_am}));
            series.push(gain_series(format!("Jx = {jx:.3}"), gain));
        }
        ctx.set("runs", Value::Array(table));
        ctx.svg("gain_vs_time.svg", || svg::lines("quantum gain", "t", "G(t)", &series))
    })
}

fn run_fig3(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let model = cfg.model()?;
    let n = model_n(model, false)?;
    let jx_values = cfg.sweep(V::Jx)?.values();
    let (drive, pulse, integ) = drive_from_config(cfg, ctx)?;
    let runs = ctx.stage("amplifier", |_| {
        jx_values
            .iter()
            .map(|&jx| amplifier_run(&lmg(model, n, jx), &drive, &integ, pulse.t_arrival))
            .collect::<Result<Vec<_>>>()
    })?;
    let space = crate::dicke::DickeSpace::new(n)?;
    ctx.stage("qfunction", |ctx| {
        let mut snaps = Vec::new();
        for (&jx, (traj, gain)) in jx_values.iter().zip(&runs) {
            ctx.csv(&format!("gain_jx_{}.csv", tag(jx)), output::GAIN_HEADER, gain_rows(traj, gain))?;
            for &t in &SNAPSHOT_TIMES {
                let k = nearest(&traj.times, t);
                let grid = q_function(&traj.states[k], space)?;
                let rows = grid.values.iter().enumerate().flat_map(|(i, row)| {
                    let th = grid.theta[i];
                    row.iter()
                        .zip(&grid.phi)
                        .map(move |(&q, &ph)| [Cell::F(th), Cell::F(ph), Cell::F(q)])
                });
                let stem = format!("qfunction_jx_{}_t_{:+.1}", tag(jx), traj.times[k]);
                ctx.csv(&format!("{stem}.csv"), output::QFUNCTION_HEADER, rows)?;
                ctx.svg(&format!("{stem}.svg"), || {
                    svg::heatmap(&format!("Q, Jx = {jx}, t = {t}"), "phi", "theta", &grid.values, 120)
                })?;
                let (th, ph, qmax) = grid.argmax();
                snaps.push(json!({
                    "jx": jx,
                    "t": traj.times[k],
                    "normalization": grid.normalization(),
                    "mass_yz": grid.azimuthal_mass_near(&YZ_PLANE, std::f64::consts::FRAC_PI_4),
                    "mass_xz": grid.azimuthal_mass_near(&XZ_PLANE, std::f64::consts::FRAC_PI_4),
                    "argmax_theta": th,
                    "argmax_phi": ph,
                    "q_max": qmax,
                }));
            }
        }
        ctx.set("snapshots", Value::Array(snaps));
        Ok(())
    })
}

pub const YZ_PLANE: [f64; 2] = [std::f64::consts::FRAC_PI_2, 3.0 * std::f64::consts::FRAC_PI_2];
pub const XZ_PLANE: [f64; 2] = [0.0, std::f64::consts::PI];

fn nearest(times: &[f64], t: f64) -> usize {
    let mut best = 0;
    for (k, &x) in times.iter().enumerate() {
        if (x - t).abs() < (times[best] - t).abs() {
            best = k;
        }
    }
    best
}

fn run_fig4(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let model = cfg.model()?;
    let n = model_n(model, false)?;
    let params = lmg(model, n, model.jx);
    let bx = cfg.sweep(V::Bx)?.values();
    let sizes = cfg.sweep(V::NQubits)?.integer_values();

    let points = ctx.stage("field_sweep", |_| criticality::field_sweep(&params, &bx, DEFAULT_REL_STEP))?;
    let (fit_chi, fit_chi_m) = ctx.stage("fit", |_| {
        let chi: Vec<(f64, f64)> = points.iter().map(|p| (p.bx, p.chi)).collect();
        let chi_m: Vec<(f64, f64)> = points.iter().map(|p| (p.bx, p.chi_m)).collect();
        Ok((fit_power_law(&chi, GAMMA_WINDOW)?, fit_power_law(&chi_m, GAMMA_WINDOW)?))
    })?;
    let size_points = ctx.stage("size_sweep", |_| {
        criticality::size_sweep(model.jx, criticality::SIZE_SWEEP_FIELD, &sizes)
    })?;
    let linear = fit_linear(&size_points.iter().map(|p| (p.n as f64, p.chi)).collect::<Vec<_>>())?;

    ctx.stage("output", |ctx| {
        ctx.csv("susceptibility_sweep.csv", output::SUSCEPTIBILITY_HEADER, sweep_rows(&points))?;
        ctx.csv(
            "size_sweep.csv",
            output::SIZE_HEADER,
            size_points
                .iter()
                .map(|p| [Cell::I(p.n), p.chi.into(), p.gap.into(), p.c_xxyy.into()]),
        )?;
        ctx.set("gamma_fit_sqrt_zeta", fit_json(&fit_chi));
        ctx.set("gamma", json!(-fit_chi.exponent));
        ctx.set("gamma_fit_magnetization", fit_json(&fit_chi_m));
        ctx.set("gamma_magnetization", json!(-fit_chi_m.exponent));
        ctx.set(
            "chi_vs_n_linear_fit",
            json!({"slope": linear.slope, "intercept": linear.intercept, "r_squared": linear.r_squared}),
        );
        let chi_pts: Vec<(f64, f64)> = points.iter().map(|p| (p.bx, p.chi)).collect();
        ctx.svg("susceptibility.svg", || {
            svg::loglog("susceptibility", "B_x", "chi", &chi_pts, Some(&fit_chi))
        })?;
        let np: Vec<(f64, f64)> = size_points.iter().map(|p| (p.n as f64, p.chi)).collect();
        ctx.svg("chi_vs_n.svg", || svg::lines("chi at B_x = 1e-5", "N", "chi", &[("chi".into(), np)]))
    })
}

fn run_fig5(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let model = cfg.model()?;
    let n = model_n(model, false)?;
    let params = lmg(model, n, model.jx);
    let bx = cfg.sweep(V::Bx)?.values();
    let points = ctx.stage("field_sweep", |_| criticality::field_sweep(&params, &bx, DEFAULT_REL_STEP))?;
    let corr: Vec<(f64, f64)> = points.iter().map(|p| (p.bx, p.c_xxyy.abs())).collect();
    let gap: Vec<(f64, f64)> = points.iter().map(|p| (p.bx, p.gap)).collect();
    let (nu, gap_fit) = ctx.stage("fit", |_| Ok((fit_power_law(&corr, NU_WINDOW)?, fit_power_law(&gap, GAP_WINDOW)?)))?;
    // Same quantities over the susceptibility window, for comparison.
    let nu_low = fit_power_law(&corr, GAMMA_WINDOW).ok();
    let gap_low = fit_power_law(&gap, GAMMA_WINDOW).ok();

    let zero = ctx.stage("zero_field", |_| solve_ground(&params))?;
    let analytic = (model.jx == model.jy).then(|| {
        let mut e = transition_line_energies(n, model.epsilon, model.jx);
        e.sort_by(f64::total_cmp);
        e[1] - e[0]
    });

    ctx.stage("output", |ctx| {
        ctx.csv("susceptibility_sweep.csv", output::SUSCEPTIBILITY_HEADER, sweep_rows(&points))?;
        ctx.set("nu_fit", fit_json(&nu));
        ctx.set("nu_tilde", json!(-nu.exponent));
        ctx.set("gap_fit", fit_json(&gap_fit));
        ctx.set("gap_exponent", json!(gap_fit.exponent));
        ctx.set("nu_fit_low_field", nu_low.as_ref().map_or(Value::Null, fit_json));
        ctx.set("gap_fit_low_field", gap_low.as_ref().map_or(Value::Null, fit_json));
        ctx.set("zero_field_gap", json!(zero.gap));
        ctx.set("analytic_zero_field_gap", json!(analytic));
        let cxy = points.iter().map(|p| p.c_xy.abs()).fold(0.0, f64::max);
        ctx.set("max_abs_c_xy", json!(cxy));
        ctx.svg("c_xxyy.svg", || svg::loglog("|C_xxyy|", "B_x", "|C_xxyy|", &corr, Some(&nu)))?;
        ctx.svg("gap.svg", || svg::loglog("gap", "B_x", "gap", &gap, Some(&gap_fit)))
    })
}

fn run_fig_s1(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let pulse = cfg.pulse()?;
    let integ = cfg.integration()?;
    let params = absorber_params(pulse, cfg.absorber()?);
    let mut grid = IntegrationGrid::new(integ.t_start, integ.t_end, integ.dt);
    grid.sample_every = integ.sample_every;
    let trace = ctx.stage("absorber", |_| {
        crate::absorber::integrate_hierarchy_sampled(&params, &grid, |_, s| s.check_invariants(1e-10))
    })?;
    ctx.stage("output", |ctx| {
        ctx.csv(
            "absorption.csv",
            output::ABSORPTION_HEADER,
            trace.times.iter().zip(&trace.pe).map(|(&t, &p)| [Cell::F(t), Cell::F(p)]),
        )?;
        ctx.set("pe_steady", json!(trace.pe_steady));
        ctx.set("pe_final", json!(trace.pe.last()));
        ctx.set(
            "pulse_norm_on_grid",
            json!(params.envelope().norm_on_grid(integ.t_start, integ.t_end, integ.dt)),
        );
        let pts: Vec<(f64, f64)> = trace.times.iter().copied().zip(trace.pe.iter().copied()).collect();
        ctx.svg("absorption.svg", || svg::lines("absorption", "t", "P_e", &[("P_e".into(), pts)]))
    })
}

fn run_fig_s2(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let pulse = cfg.pulse()?;
    let integ = cfg.integration()?;
    let deltas = cfg.sweep(V::DeltaPp)?.values();
    let gammas = cfg.sweep(V::Gamma)?.values();
    let envelope = PulseEnvelope {
        tau_f: pulse.tau_f,
        t_arrival: pulse.t_arrival,
    };
    let grid = IntegrationGrid {
        t_start: integ.t_start,
        t_end: integ.t_end,
        dt: integ.dt,
        sample_every: integ.sample_every,
    };
    let map = ctx.stage("transduction_map", |_| optimize_transduction(&deltas, &gammas, envelope, &grid))?;
    ctx.stage("output", |ctx| {
        ctx.csv(
            "transduction_map.csv",
            output::TRANSDUCTION_HEADER,
            map.cells().map(|(d, g, p)| [Cell::F(d), Cell::F(g), Cell::F(p)]),
        )?;
        let ridge: Vec<Value> = map
            .delta_pp
            .iter()
            .zip(&map.pe_steady)
            .filter(|(&d, _)| d > 0.0)
            .map(|(&d, row)| {
                let (j, &best) = row
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .expect("nonempty row");
                json!({"delta_pp": d, "best_gamma": map.gamma[j], "pe_steady": best})
            })
            .collect();
        ctx.set("ridge", Value::Array(ridge));
        ctx.svg("transduction_map.svg", || {
            svg::heatmap("pe_steady", "gamma", "delta_pp", &map.pe_steady, 200)
        })
    })
}

fn run_fig_s3(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let model = cfg.model()?;
    model_n(model, true)?;
    let sizes = cfg.sweep(V::NQubits)?.integer_values();
    let (drive, pulse, integ) = drive_from_config(cfg, ctx)?;
    let runs = ctx.stage("amplifier", |_| {
        sizes
            .par_iter()
            .map(|&n| {
                amplifier_run(&lmg(model, n, model.jx), &drive, &integ, pulse.t_arrival)
                    .map_err(|e| e.context(format!("N = {n}")))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    ctx.stage("output", |ctx| {
        let mut series = Vec::new();
        for (&n, (traj, gain)) in sizes.iter().zip(&runs) {
            ctx.csv(&format!("gain_n_{n}.csv"), output::GAIN_HEADER, gain_rows(traj, gain))?;
            series.push(gain_series(format!("N = {n}"), gain));
        }
        ctx.csv(
            "gain_scaling.csv",
            output::GAIN_SCALING_HEADER,
            sizes
                .iter()
                .zip(&runs)
                .map(|(&n, (_, g))| [Cell::I(n), g.g_max.into(), g.t_am.into()]),
        )?;
        let g: Vec<(f64, f64)> = sizes.iter().zip(&runs).map(|(&n, (_, g))| (n as f64, g.g_max)).collect();
        if g.len() >= 3 {
            let lin = fit_linear(&g)?;
            ctx.set(
                "g_max_linear_fit",
                json!({"slope": lin.slope, "intercept": lin.intercept, "r_squared": lin.r_squared}),
            );
        }
        let t: Vec<f64> = runs.iter().map(|(_, g)| g.t_am).collect();
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        let spread = t.iter().fold(f64::MIN, |a, &b| a.max(b)) - t.iter().fold(f64::MAX, |a, &b| a.min(b));
        ctx.set("t_am_relative_spread", json!(spread / mean));
        ctx.svg("gain_vs_time.svg", || svg::lines("quantum gain", "t", "G(t)", &series))
    })
}

fn run_fig_s8(cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let model = cfg.model()?;
    model_n(model, true)?;
    let bx = cfg.sweep(V::Bx)?.values();
    let sizes = cfg.sweep(V::NQubits)?.integer_values();
    let sweeps = ctx.stage("field_sweeps", |_| {
        sizes
            .iter()
            .map(|&n| criticality::field_sweep(&lmg(model, n, model.jx), &bx, DEFAULT_REL_STEP))
            .collect::<Result<Vec<_>>>()
    })?;
    ctx.stage("output", |ctx| {
        let mut mono = Map::new();
        let mut series = Vec::new();
        for (&n, pts) in sizes.iter().zip(&sweeps) {
            ctx.csv(&format!("eta_n_{n}.csv"), output::SUSCEPTIBILITY_HEADER, sweep_rows(pts))?;
            let decreasing = pts.windows(2).all(|w| w[1].eta <= w[0].eta);
            mono.insert(n.to_string(), json!(decreasing));
            series.push((
                format!("N = {n}"),
                pts.iter().map(|p| (p.bx.log10(), p.eta)).collect::<Vec<_>>(),
            ));
        }
        ctx.set("eta_monotone_decreasing", Value::Object(mono));
        ctx.svg("eta.svg", || svg::lines("eta", "log10 B_x", "eta", &series))
    })
}

// --------------------------------------------------------------- defaults

fn out(name: &str) -> Option<OutputSection> {
    Some(OutputSection {
        directory: format!("out/{name}"),
        emit_svg: false,
    })
}

fn sweep(variable: SweepVariable, lo: f64, hi: f64, points: usize, spacing: Spacing) -> SweepSection {
    SweepSection {
        variable,
        lo,
        hi,
        points,
        spacing,
    }
}

fn model(n: Option<usize>, jx: f64, jy: f64) -> Option<ModelSection> {
    Some(ModelSection {
        n_qubits: n,
        epsilon: 1.0,
        jx,
        jy,
    })
}

fn dynamics(name: &str, n: Option<usize>, jx: SweepSection) -> ExperimentConfig {
    ExperimentConfig {
        experiment: name.into(),
        model: model(n, 0.675, 0.7),
        coupling: Some(CouplingSection { bx: 0.01 }),
        pulse: Some(PulseSection {
            tau_f: 1.0,
            t_arrival: 0.0,
        }),
        absorber: Some(AbsorberSection {
            delta_pp: 5.0,
            gamma_fg: 10.0,
            gamma_he: 10.0,
            eta: 1.0,
            phase: 0.0,
        }),
        sweep: vec![jx],
        integration: Some(IntegrationSection {
            dt: 1e-3,
            t_start: -5.0,
            t_end: 20.0,
            sample_every: 100,
        }),
        output: out(name),
    }
}

fn defaults_fig2() -> ExperimentConfig {
    dynamics("fig2_gain_vs_bias", Some(400), sweep(V::Jx, 0.5, 0.7, 9, Spacing::Linear))
}

fn defaults_fig3() -> ExperimentConfig {
    dynamics("fig3_qfunction", Some(400), sweep(V::Jx, 0.5, 0.675, 2, Spacing::Linear))
}

fn defaults_fig_s3() -> ExperimentConfig {
    dynamics("figS3_gain_scaling", None, sweep(V::NQubits, 100.0, 400.0, 3, Spacing::Log))
}

fn statics(name: &str, n: Option<usize>, extra: Option<SweepSection>) -> ExperimentConfig {
    let mut sweeps = vec![sweep(V::Bx, 1e-6, 1e-2, 41, Spacing::Log)];
    sweeps.extend(extra);
    ExperimentConfig {
        experiment: name.into(),
        model: model(n, 0.7, 0.7),
        coupling: None,
        pulse: None,
        absorber: None,
        sweep: sweeps,
        integration: None,
        output: out(name),
    }
}

fn defaults_fig4() -> ExperimentConfig {
    statics(
        "fig4_susceptibility",
        Some(1000),
        Some(sweep(V::NQubits, 200.0, 2000.0, 10, Spacing::Linear)),
    )
}

fn defaults_fig5() -> ExperimentConfig {
    statics("fig5_correlation_gap", Some(1000), None)
}

fn defaults_fig_s8() -> ExperimentConfig {
    let mut c = statics("figS8_eta", None, Some(sweep(V::NQubits, 250.0, 1000.0, 3, Spacing::Log)));
    c.sweep[0].points = 21;
    c
}

fn defaults_fig_s1() -> ExperimentConfig {
    ExperimentConfig {
        experiment: "figS1_absorption".into(),
        model: None,
        coupling: None,
        pulse: Some(PulseSection {
            tau_f: 1.0,
            t_arrival: 0.0,
        }),
        absorber: Some(AbsorberSection {
            delta_pp: 5.0,
            gamma_fg: 10.0,
            gamma_he: 10.0,
            eta: 1.0,
            phase: 0.0,
        }),
        sweep: vec![],
        integration: Some(IntegrationSection {
            dt: 1e-3,
            t_start: -5.0,
            t_end: 20.0,
            sample_every: 10,
        }),
        output: out("figS1_absorption"),
    }
}

fn defaults_fig_s2() -> ExperimentConfig {
    ExperimentConfig {
        experiment: "figS2_transduction_map".into(),
        model: None,
        coupling: None,
        pulse: Some(PulseSection {
            tau_f: 1.0,
            t_arrival: 0.0,
        }),
        absorber: None,
        sweep: vec![
            sweep(V::DeltaPp, 0.0, 20.0, 11, Spacing::Linear),
            sweep(V::Gamma, 2.0, 40.0, 20, Spacing::Linear),
        ],
        integration: Some(IntegrationSection {
            dt: 1e-3,
            t_start: -5.0,
            t_end: 12.0,
            sample_every: 10,
        }),
        output: out("figS2_transduction_map"),
    }
}
