use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use kleinbarrier::kinematics::{barrier_channel, classify_mode, ChannelKind, Edge, Zone};
use kleinbarrier::phasetime::{
    edge_limit_magnitude_paper, edge_limit_magnitude_ultrarelativistic, edge_limit_ratio,
    phase_ratio_printed, phase_time, phase_time_edge, phase_time_eq7, phase_time_numeric,
    small_rho_leading,
};
use kleinbarrier::scattering::{
    edge_transmission, match_boundaries, oscillatory_transmission, paper_eq4_magnitude,
    transmission_closed_form,
};
use kleinbarrier::sweep::{self, fig1_preset, run_sweep, Outputs, SweepOutput, SweepRequest};
use kleinbarrier::wavepacket::{run_packet, write_samples_csv, PacketOptions, SpectrumSpec};
use kleinbarrier::BarrierSetup;

use crate::config::{mode_for, CliConfig, EnergyInput, Layers};
use crate::report::{Dim, Report};
use crate::{CliError, Command, CommonArgs, PacketArgs, PointArgs, SweepArgs};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Zone(a) => cmd_zone(&a),
        Command::Amp(a) => cmd_amp(&a),
        Command::Phasetime(a) => cmd_phasetime(&a),
        Command::Limits(a) => cmd_limits(&a),
        Command::Packet(a) => cmd_packet(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

fn emit(report: &Report, common: &CommonArgs) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Usage(format!("writing output: {e}"));
    match &common.out {
        Some(path) => {
            let mut f = File::create(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            report
                .write(common.json, common.units, &mut f)
                .map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            stdout_result(report.write(common.json, common.units, &mut lock))
        }
    }
}

/// A closed pipe on stdout (`| head`) is not an error.
fn stdout_result(r: io::Result<()>) -> Result<(), CliError> {
    match r {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            Err(CliError::Usage(format!("writing output: {e}")))
        }
        _ => Ok(()),
    }
}

fn point_inputs(a: &PointArgs) -> Result<(CliConfig, CliConfig), CliError> {
    let file = CliConfig::load_optional(a.common.config.as_deref())?;
    let flags = a.setup.to_config(Some(&a.energy));
    Ok((flags, file))
}

fn describe_setup(r: &mut Report, s: &BarrierSetup) {
    r.quantity("m", s.m(), Dim::Energy)
        .quantity("V0", s.v0(), Dim::Energy)
        .quantity("L", s.l(), Dim::Length)
        .num("v", s.v())
        .num("wL", s.wl())
        .num("mL", s.ml());
}

fn cmd_zone(a: &PointArgs) -> Result<(), CliError> {
    let (flags, file) = point_inputs(a)?;
    let layers = Layers {
        flags: &flags,
        file: &file,
    };
    let setup = layers.setup()?;
    let mut r = Report::new();
    let energy = match layers.require_energy()? {
        EnergyInput::Energy(e) => e,
        EnergyInput::N2(_) => mode_for(&setup, layers.require_energy()?)?.energy(),
    };
    let zone = kleinbarrier::classify_zone(&setup, energy);
    r.text("zone", zone.as_str());
    describe_setup(&mut r, &setup);
    r.quantity("E", energy, Dim::Energy);
    if zone != Zone::NonPropagating {
        let mode = kleinbarrier::mode_from_energy(&setup, energy)?;
        r.quantity("k", mode.k(), Dim::Energy).num("n2", mode.n2());
        let channel = barrier_channel(&setup, &mode);
        match channel.kind {
            ChannelKind::Evanescent { rho } => {
                r.text("channel", "Evanescent")
                    .quantity("rho", rho, Dim::Energy)
                    .opt("rho_n", channel.rho_n);
            }
            ChannelKind::Oscillatory { q } => {
                r.text("channel", "Oscillatory")
                    .quantity("q", q, Dim::Energy);
            }
            ChannelKind::Linear => {
                r.text("channel", "Linear");
            }
        }
    }
    emit(&r, &a.common)
}

fn cmd_amp(a: &PointArgs) -> Result<(), CliError> {
    let (flags, file) = point_inputs(a)?;
    let layers = Layers {
        flags: &flags,
        file: &file,
    };
    let setup = layers.setup()?;
    let mode = mode_for(&setup, layers.require_energy()?)?;
    let zone = classify_mode(&setup, &mode);
    let sol = match_boundaries(&setup, &mode)?;
    let tp = sol.transmission();

    let mut r = Report::new();
    r.text("zone", zone.as_str());
    describe_setup(&mut r, &setup);
    r.quantity("E", mode.energy(), Dim::Energy)
        .quantity("k", mode.k(), Dim::Energy)
        .num("n2", mode.n2())
        .num("T2_exact", tp.probability)
        .num("abs_T_exact", tp.magnitude)
        .num("phase_exact", tp.phase)
        .int("phase_branch", tp.branch)
        .num("R2", sol.r.norm_sqr())
        .num("unitarity_residual", sol.unitarity_residual())
        .num("continuity_residual", sol.residuals().max());
    match zone {
        Zone::Tunneling => {
            let closed = transmission_closed_form(&setup, &mode)?;
            let printed = paper_eq4_magnitude(&setup, &mode)?;
            r.num("T2_closed_form", closed.probability)
                .num("phase_closed_form", closed.phase)
                .num("T2_printed", printed * printed)
                .num("abs_T_printed", printed);
        }
        Zone::Klein | Zone::AboveBarrier => {
            let closed = oscillatory_transmission(&setup, &mode)?;
            r.num("T2_closed_form", closed.probability)
                .num("phase_closed_form", closed.phase);
        }
        Zone::EdgeLower | Zone::EdgeUpper => {
            let edge = zone.edge().unwrap_or(Edge::Upper);
            let closed = edge_transmission(&setup, edge)?;
            r.num("T2_closed_form", closed.probability)
                .num("phase_closed_form", closed.phase);
            if let Ok(t) = edge_limit_magnitude_paper(setup.v(), setup.wl(), edge) {
                r.num("T2_printed", t * t).num("abs_T_printed", t);
            }
        }
        Zone::NonPropagating => {}
    }
    emit(&r, &a.common)
}

fn cmd_phasetime(a: &PointArgs) -> Result<(), CliError> {
    let (flags, file) = point_inputs(a)?;
    let layers = Layers {
        flags: &flags,
        file: &file,
    };
    let setup = layers.setup()?;
    let mode = mode_for(&setup, layers.require_energy()?)?;
    let zone = classify_mode(&setup, &mode);
    let best = phase_time(&setup, &mode)?;

    let mut r = Report::new();
    r.text("zone", zone.as_str());
    describe_setup(&mut r, &setup);
    r.quantity("E", mode.energy(), Dim::Energy)
        .num("n2", mode.n2())
        .quantity("tau", best.tau, Dim::Time)
        .quantity("t_phi", best.t_phi, Dim::Time)
        .opt("ratio", best.ratio)
        .text("method", format!("{:?}", best.method));
    if zone == Zone::Tunneling {
        let closed = phase_time_eq7(&setup, mode.n2())?;
        r.quantity("t_phi_closed_form", closed.t_phi, Dim::Time)
            .opt("ratio_closed_form", closed.ratio)
            .num(
                "ratio_closed_form_printed",
                phase_ratio_printed(mode.n2(), setup.v(), setup.wl()),
            )
            .num("ratio_small_rho", small_rho_leading(setup.v(), mode.n2()));
    }
    match phase_time_numeric(&setup, &mode, None) {
        Ok(n) => {
            r.quantity("t_phi_numeric", n.t_phi, Dim::Time)
                .opt("ratio_numeric", n.ratio);
        }
        Err(e) => {
            r.text("ratio_numeric", format!("n/a ({e})"));
        }
    }
    for edge in [Edge::Lower, Edge::Upper] {
        let tag = match edge {
            Edge::Lower => "lower",
            Edge::Upper => "upper",
        };
        r.opt(
            &format!("{tag}.ratio_edge_limit"),
            edge_limit_ratio(setup.v(), edge).ok(),
        );
        r.opt(
            &format!("{tag}.ratio_edge_exact"),
            phase_time_edge(&setup, edge).ok().and_then(|p| p.ratio),
        );
    }
    emit(&r, &a.common)
}

fn cmd_limits(a: &PointArgs) -> Result<(), CliError> {
    let (flags, file) = point_inputs(a)?;
    let layers = Layers {
        flags: &flags,
        file: &file,
    };
    let setup = layers.setup()?;
    let (v, wl) = (setup.v(), setup.wl());
    let mut r = Report::new();
    r.num("v", v).num("wL", wl).num("mL", setup.ml());
    for edge in [Edge::Lower, Edge::Upper] {
        let tag = match edge {
            Edge::Lower => "lower",
            Edge::Upper => "upper",
        };
        let defined = edge_limit_ratio(v, edge).is_ok();
        let n2 = edge.n2(v);
        r.opt(&format!("{tag}.n2"), defined.then_some(n2));
        r.opt(
            &format!("{tag}.ratio_edge_limit"),
            edge_limit_ratio(v, edge).ok(),
        );
        r.opt(
            &format!("{tag}.ratio_small_rho"),
            defined.then(|| small_rho_leading(v, n2)),
        );
        r.opt(
            &format!("{tag}.ratio_edge_exact"),
            phase_time_edge(&setup, edge).ok().and_then(|p| p.ratio),
        );
        let printed_edge = edge_limit_magnitude_paper(v, wl, edge).ok();
        let exact = edge_transmission(&setup, edge).ok().map(|t| t.magnitude);
        r.opt(&format!("{tag}.abs_T_edge_printed"), printed_edge);
        r.opt(&format!("{tag}.abs_T_edge_exact"), exact);
        r.opt(
            &format!("{tag}.abs_T_gap"),
            printed_edge.zip(exact).map(|(a, b)| a - b),
        );
    }
    r.num(
        "abs_T_edge_ultrarelativistic",
        edge_limit_magnitude_ultrarelativistic(setup.ml()),
    );
    emit(&r, &a.common)
}

fn cmd_packet(a: &PacketArgs) -> Result<(), CliError> {
    let file = CliConfig::load_optional(a.common.config.as_deref())?;
    let mut flags = a.setup.to_config(Some(&a.energy));
    flags.k0 = a.k0;
    flags.sigma_k = a.sigma_k;
    flags.sigma_frac = a.sigma_frac;
    flags.support_halfwidth = a.support;
    flags.time_samples = a.samples;
    let layers = Layers {
        flags: &flags,
        file: &file,
    };
    let setup = layers.setup()?;
    let k0 = match (layers.get(|c| c.k0), layers.energy()?) {
        (Some(_), Some(_))
            if flags.k0.is_some() && (flags.energy.is_some() || flags.n2.is_some()) =>
        {
            return Err(CliError::Usage("give one of --k0, --E, --n2".to_string()))
        }
        (Some(k0), _) => k0,
        (None, Some(input)) => mode_for(&setup, input)?.k(),
        (None, None) => {
            return Err(CliError::Usage(
                "a spectrum centre is required: pass --k0, --E or --n2".to_string(),
            ))
        }
    };
    let sigma = match (layers.get(|c| c.sigma_k), layers.get(|c| c.sigma_frac)) {
        (Some(s), _) => s,
        (None, Some(f)) => f * k0,
        (None, None) => 0.02 * k0,
    };
    let support = layers
        .get(|c| c.support_halfwidth)
        .unwrap_or(kleinbarrier::wavepacket::DEFAULT_SUPPORT_HALFWIDTH);
    let spectrum = SpectrumSpec::with_support(k0, sigma, support)?;
    let options = PacketOptions {
        time_samples: layers.get(|c| c.time_samples).unwrap_or(2001),
        ..PacketOptions::default()
    };
    let run = run_packet(&setup, &spectrum, &options)?;

    let mut r = Report::new();
    describe_setup(&mut r, &setup);
    r.quantity("k0", k0, Dim::Energy)
        .quantity("sigma_k", sigma, Dim::Energy)
        .num("support_halfwidth", support)
        .quantity("t_min", run.time_window.0, Dim::Time)
        .quantity("t_max", run.time_window.1, Dim::Time)
        .quantity("tau", run.tau, Dim::Time)
        .quantity("t_predicted", run.arrival.t_predicted, Dim::Time)
        .quantity("t_peak", run.arrival.t_peak, Dim::Time)
        .num("relative_gap", run.arrival.relative_gap)
        .num("transmitted_norm", run.distortion.transmitted_norm)
        .num("shape_distance", run.distortion.shape_distance)
        .quantity("mean_k_shift", run.distortion.mean_k_shift, Dim::Energy);
    if let Some(path) = &a.common.out {
        write_samples_csv(&run.samples, path)?;
        r.text("samples_csv", path.display().to_string());
    }
    let stdout_only = CommonArgs {
        config: None,
        json: a.common.json,
        units: a.common.units,
        out: None,
    };
    emit(&r, &stdout_only)
}

fn outputs_from(list: Option<Vec<String>>) -> Result<Outputs, CliError> {
    match list {
        None => Ok(Outputs::ALL),
        Some(names) => {
            Outputs::parse_list(&names.join(",")).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

fn print_notes(out: &SweepOutput, label: &str) {
    for n in &out.notes {
        eprintln!("note [{label}] #{} n2={}: {}", n.index, n.n2, n.message);
    }
}

fn write_sweep(out: &SweepOutput, path: &Path, json: bool) -> Result<(), CliError> {
    let as_json = json || path.extension().is_some_and(|e| e == "json");
    if as_json {
        sweep::write_json(&out.records, path)?;
    } else {
        sweep::write_csv(&out.records, path)?;
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), CliError> {
    let file = CliConfig::load_optional(a.common.config.as_deref())?;
    let mut flags = a.setup.to_config(None);
    flags.n2_min = a.n2_min;
    flags.n2_max = a.n2_max;
    flags.count = a.count;
    flags.outputs = a.outputs.clone();
    flags.workers = a.workers;
    let layers = Layers {
        flags: &flags,
        file: &file,
    };
    let workers = layers.get(|c| c.workers);

    if let Some(preset) = &a.preset {
        if preset != "fig1" {
            return Err(CliError::Usage(format!(
                "unknown preset {preset:?} (known: fig1)"
            )));
        }
        let dir = a.common.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
        let mut r = Report::new();
        for (name, req) in fig1_preset() {
            let out = run_sweep(&req, workers)?;
            print_notes(&out, &name);
            let path = dir.join(&name);
            sweep::write_csv(&out.records, &path)?;
            r.int(&name, out.records.len() as i64);
        }
        let sink = CommonArgs {
            config: None,
            json: a.common.json,
            units: a.common.units,
            out: None,
        };
        return emit(&r, &sink);
    }

    // v = 0 has no barrier setup; the sweep runs its non-relativistic pipeline
    let zero_height = layers.get(|c| c.v0).is_none() && layers.v() == 0.0;
    let (v, wl, m) = if zero_height {
        (0.0, layers.wl(), layers.m())
    } else {
        let setup = layers.setup()?;
        (setup.v(), setup.wl(), setup.m())
    };
    let n2_max = layers.get(|c| c.n2_max).unwrap_or(v / 2.0 + 3.0);
    let count = layers.get(|c| c.count).unwrap_or(2000);
    let n2_min = layers
        .get(|c| c.n2_min)
        .unwrap_or(n2_max / count.max(1) as f64);
    let req = SweepRequest {
        v,
        wl,
        m,
        n2_min,
        n2_max,
        count,
        outputs: outputs_from(layers.outputs())?,
    };
    req.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let out = run_sweep(&req, workers)?;
    print_notes(&out, "sweep");
    match &a.common.out {
        Some(path) => {
            write_sweep(&out, path, a.common.json)?;
            let mut r = Report::new();
            r.text("written", path.display().to_string())
                .int("rows", out.records.len() as i64)
                .int("notes", out.notes.len() as i64);
            let sink = CommonArgs {
                config: None,
                json: a.common.json,
                units: a.common.units,
                out: None,
            };
            emit(&r, &sink)
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            let written = if a.common.json {
                let text = serde_json::to_string_pretty(&out.records)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                writeln!(w, "{text}")
            } else {
                w.write_all(&sweep::csv_bytes(&out.records)?)
            };
            stdout_result(written.and_then(|()| w.flush()))
        }
    }
}
